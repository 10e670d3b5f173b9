//! Adaptive Dormand-Prince 5(4) integration.
//!
//! Small, allocation-light explicit integrator for the low-dimensional
//! initial value problems in this crate (radial shooting and the
//! singular mode family). Three entry points:
//!
//! * [`integrate_to`] - advance to a fixed endpoint.
//! * [`integrate_samples`] - advance while landing exactly on a sorted
//!   list of sample abscissae (no dense-output interpolation error).
//! * [`integrate_until`] - advance until a scalar event function
//!   crosses zero, then refine the crossing by Newton iterations on
//!   re-integrations of the final subinterval.

use crate::error::{Error, Result};

/// Error-control and step-size settings.
#[derive(Clone, Copy, Debug)]
pub struct OdeTol {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for OdeTol {
    fn default() -> Self {
        OdeTol {
            rtol: 1e-13,
            atol: 1e-13,
            max_steps: 2_000_000,
        }
    }
}

const STAGES: usize = 7;

// Dormand-Prince coefficients (dopri5).
const C: [f64; STAGES] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; STAGES] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// fifth-order weights coincide with the last A row (FSAL scheme)
const B5: [f64; STAGES] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
// difference between fifth- and embedded fourth-order weights
const E: [f64; STAGES] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

struct Stepper<'a, F> {
    f: &'a F,
    dim: usize,
    k: [Vec<f64>; STAGES],
    y_stage: Vec<f64>,
    y_new: Vec<f64>,
}

impl<'a, F: Fn(f64, &[f64], &mut [f64])> Stepper<'a, F> {
    fn new(f: &'a F, dim: usize) -> Self {
        Stepper {
            f,
            dim,
            k: std::array::from_fn(|_| vec![0.0; dim]),
            y_stage: vec![0.0; dim],
            y_new: vec![0.0; dim],
        }
    }

    /// One trial step from (t, y) with size h. Returns the scaled error
    /// norm; `self.y_new` holds the fifth-order result.
    fn trial(&mut self, t: f64, y: &[f64], h: f64, tol: &OdeTol) -> f64 {
        (self.f)(t, y, &mut self.k[0]);
        for s in 1..STAGES {
            for i in 0..self.dim {
                let mut acc = 0.0;
                for (j, kj) in self.k[..s].iter().enumerate() {
                    acc += A[s][j] * kj[i];
                }
                self.y_stage[i] = y[i] + h * acc;
            }
            let ts = t + C[s] * h;
            let (head, tail) = self.k.split_at_mut(s);
            let _ = head;
            (self.f)(ts, &self.y_stage, &mut tail[0]);
        }
        for i in 0..self.dim {
            let mut acc = 0.0;
            for (j, kj) in self.k.iter().enumerate() {
                acc += B5[j] * kj[i];
            }
            self.y_new[i] = y[i] + h * acc;
        }
        let mut err = 0.0f64;
        for i in 0..self.dim {
            let mut e = 0.0;
            for (j, kj) in self.k.iter().enumerate() {
                e += E[j] * kj[i];
            }
            e *= h;
            let scale = tol.atol + tol.rtol * y[i].abs().max(self.y_new[i].abs());
            err += (e / scale) * (e / scale);
        }
        (err / self.dim as f64).sqrt()
    }
}

/// Drives adaptive steps from `t0` to `t1`, calling `on_accept(t, y)`
/// after every accepted step. Steps never overshoot `t1`.
fn drive<F: Fn(f64, &[f64], &mut [f64])>(
    f: &F,
    t0: f64,
    y0: &[f64],
    t1: f64,
    tol: &OdeTol,
    mut on_accept: impl FnMut(f64, &[f64]),
) -> Result<Vec<f64>> {
    let dim = y0.len();
    let mut st = Stepper::new(f, dim);
    let mut t = t0;
    let mut y = y0.to_vec();
    if t1 == t0 {
        return Ok(y);
    }
    let dir = (t1 - t0).signum();
    let mut h = (t1 - t0).abs().min(1e-3 * (t1 - t0).abs().max(1e-3)) * dir;
    let mut steps = 0usize;
    while (t1 - t) * dir > 0.0 {
        steps += 1;
        if steps > tol.max_steps {
            return Err(Error::solver(format!(
                "step budget exhausted at t={t} (target {t1})"
            )));
        }
        if (t + h - t1) * dir > 0.0 {
            h = t1 - t;
        }
        let err = st.trial(t, &y, h, tol);
        if err <= 1.0 {
            t += h;
            y.copy_from_slice(&st.y_new);
            on_accept(t, &y);
            let grow = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h *= grow;
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            if h.abs() < 1e-15 * t.abs().max(1e-12) {
                return Err(Error::solver(format!("step size underflow at t={t}")));
            }
        }
    }
    Ok(y)
}

/// Integrates dy/dt = f(t, y) from `t0` to `t1`.
pub fn integrate_to<F: Fn(f64, &[f64], &mut [f64])>(
    f: &F,
    t0: f64,
    y0: &[f64],
    t1: f64,
    tol: &OdeTol,
) -> Result<Vec<f64>> {
    drive(f, t0, y0, t1, tol, |_, _| {})
}

/// Integrates from `t0` landing exactly on every abscissa in `ts`
/// (which must be sorted increasing and start at or after `t0`).
/// Returns the state at each abscissa.
pub fn integrate_samples<F: Fn(f64, &[f64], &mut [f64])>(
    f: &F,
    t0: f64,
    y0: &[f64],
    ts: &[f64],
    tol: &OdeTol,
) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::with_capacity(ts.len());
    let mut t = t0;
    let mut y = y0.to_vec();
    for &target in ts {
        if target < t - 1e-15 {
            return Err(Error::domain(format!(
                "sample points must be sorted: {target} after {t}"
            )));
        }
        if target > t {
            y = integrate_to(f, t, &y, target, tol)?;
            t = target;
        }
        out.push(y.clone());
    }
    Ok(out)
}

/// Integrates until `event(y)` crosses zero, then polishes the crossing
/// time by Newton iteration on `event`, re-integrating the last
/// subinterval for each trial time. `d_event` is the derivative of the
/// event value along the flow, d/dt event(y(t)).
pub fn integrate_until<F, G, DG>(
    f: &F,
    t0: f64,
    y0: &[f64],
    event: G,
    d_event: DG,
    t_max: f64,
    tol: &OdeTol,
) -> Result<(f64, Vec<f64>)>
where
    F: Fn(f64, &[f64], &mut [f64]),
    G: Fn(&[f64]) -> f64,
    DG: Fn(f64, &[f64]) -> f64,
{
    let g0 = event(y0);
    if g0 >= 0.0 {
        return Ok((t0, y0.to_vec()));
    }
    let mut t_lo = t0;
    let mut y_lo = y0.to_vec();
    let mut hit: Option<(f64, Vec<f64>)> = None;
    {
        let mut prev_t = t0;
        let mut prev_y = y0.to_vec();
        drive(f, t0, y0, t_max, tol, |t, y| {
            if hit.is_none() {
                if event(y) >= 0.0 {
                    hit = Some((t, y.to_vec()));
                    t_lo = prev_t;
                    y_lo = prev_y.clone();
                } else {
                    prev_t = t;
                    prev_y = y.to_vec();
                }
            }
        })?;
    }
    let (t_hi, y_hi) = match hit {
        Some(h) => h,
        None => {
            return Err(Error::solver(format!(
                "event not reached before t_max = {t_max}"
            )))
        }
    };
    // Newton on  t |-> event(y(t)), flowing from the last pre-crossing
    // state; bisection fallback keeps the iterate inside the bracket.
    let mut lo = t_lo;
    let mut hi = t_hi;
    let mut t_est = {
        let g_hi = event(&y_hi);
        let g_lo = event(&y_lo);
        if g_hi > g_lo {
            lo + (hi - lo) * (-g_lo) / (g_hi - g_lo)
        } else {
            0.5 * (lo + hi)
        }
    };
    let mut y_est = y_hi;
    for _ in 0..80 {
        y_est = integrate_to(f, t_lo, &y_lo, t_est, tol)?;
        let g = event(&y_est);
        if g.abs() <= 1e-15 {
            break;
        }
        if g > 0.0 {
            hi = t_est;
        } else {
            lo = t_est;
        }
        let slope = d_event(t_est, &y_est);
        let mut next = if slope != 0.0 {
            t_est - g / slope
        } else {
            0.5 * (lo + hi)
        };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - t_est).abs() <= 1e-16 * t_est.abs().max(1e-300) {
            t_est = next;
            y_est = integrate_to(f, t_lo, &y_lo, t_est, tol)?;
            break;
        }
        t_est = next;
    }
    Ok((t_est, y_est))
}
