//! Spectral collocation on the unit disk in chart coordinates.
//!
//! Radial direction: Chebyshev points of an odd-order grid on [-1, 1],
//! which contains no node at the origin and splits into (+sigma,
//! -sigma) pairs; a function on the disk satisfies
//! u(-sigma, theta) = u(sigma, theta + pi), so the differentiation
//! matrices fold onto the positive half with a half-turn column shift.
//! Angular direction: uniform Fourier collocation.
//!
//! The transformed Laplacian on the chart (sigma, theta) with boundary
//! radius R(theta) reads
//!
//! ```text
//! R^2 Lap u = (1 + b^2) u_ss + (1 + 2 b^2 - c)/sigma u_s
//!             - 2 b / sigma u_st + u_tt / sigma^2,
//! b = R'/R,  c = R''/R,
//! ```
//!
//! which reduces to the polar Laplacian for the circle. Linear systems
//! are solved by GMRES preconditioned with the exact circle operator,
//! which is block-diagonal over Fourier modes after the parity fold.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rustfft::{num_complex::Complex, Fft, FftPlanner};

use crate::cheb;
use crate::error::{Error, Result};
use crate::fourier;

/// Folded Chebyshev x Fourier grid and differentiation operators.
pub struct DiskGrid {
    /// Radial collocation nodes in (0, 1], descending; sigma[0] = 1.
    pub sigma: Vec<f64>,
    pub theta: Vec<f64>,
    pub m: usize,
    pub n_theta: usize,
    d1_pp: DMatrix<f64>,
    d1_pm: DMatrix<f64>,
    d2_pp: DMatrix<f64>,
    d2_pm: DMatrix<f64>,
    /// Transposed periodic differentiation matrices (right-applied).
    dt1_t: DMatrix<f64>,
    dt2_t: DMatrix<f64>,
    fft_fwd: Arc<dyn Fft<f64>>,
    fft_inv: Arc<dyn Fft<f64>>,
}

impl DiskGrid {
    pub fn new(m: usize, n_theta: usize) -> Result<Self> {
        if m < 8 {
            return Err(Error::domain(
                "radial grid needs at least 8 nodes".to_string(),
            ));
        }
        if n_theta < 16 || !n_theta.is_multiple_of(2) {
            return Err(Error::domain(
                "angular grid must be even and at least 16".to_string(),
            ));
        }
        let n_cheb = 2 * m - 1; // odd order: no node at the origin
        let x = cheb::chebyshev_full(n_cheb);
        let w: Vec<f64> = (0..=n_cheb)
            .map(|j| {
                let s = if j % 2 == 0 { 1.0 } else { -1.0 };
                if j == 0 || j == n_cheb {
                    0.5 * s
                } else {
                    s
                }
            })
            .collect();
        let d_full = cheb::diff_matrix(&x, &w);
        let d2_full = &d_full * &d_full;

        let take = |src: &DMatrix<f64>| -> (DMatrix<f64>, DMatrix<f64>) {
            let mut pp = DMatrix::zeros(m, m);
            let mut pm = DMatrix::zeros(m, m);
            for i in 0..m {
                for j in 0..m {
                    pp[(i, j)] = src[(i, j)];
                    pm[(i, j)] = src[(i, n_cheb - j)];
                }
            }
            (pp, pm)
        };
        let (d1_pp, d1_pm) = take(&d_full);
        let (d2_pp, d2_pm) = take(&d2_full);

        let mut planner = FftPlanner::new();
        Ok(DiskGrid {
            sigma: x[..m].to_vec(),
            theta: fourier::theta_nodes(n_theta),
            m,
            n_theta,
            d1_pp,
            d1_pm,
            d2_pp,
            d2_pm,
            dt1_t: fourier::periodic_d1(n_theta).transpose(),
            dt2_t: fourier::periodic_d2(n_theta).transpose(),
            fft_fwd: planner.plan_fft_forward(n_theta),
            fft_inv: planner.plan_fft_inverse(n_theta),
        })
    }

    /// Half-turn column shift: out(., theta) = u(., theta + pi).
    pub fn shift_half_turn(&self, u: &DMatrix<f64>) -> DMatrix<f64> {
        let half = self.n_theta / 2;
        let mut out = DMatrix::zeros(self.m, self.n_theta);
        for j in 0..self.n_theta {
            let src = (j + half) % self.n_theta;
            out.column_mut(j).copy_from(&u.column(src));
        }
        out
    }

    /// Folded radial derivative of the given order (1 or 2).
    pub fn d_sigma(&self, u: &DMatrix<f64>, order: u8) -> DMatrix<f64> {
        let shifted = self.shift_half_turn(u);
        match order {
            1 => &self.d1_pp * u + &self.d1_pm * shifted,
            2 => &self.d2_pp * u + &self.d2_pm * shifted,
            _ => panic!("radial derivative order must be 1 or 2"),
        }
    }

    pub fn d_theta(&self, u: &DMatrix<f64>) -> DMatrix<f64> {
        u * &self.dt1_t
    }

    pub fn d_theta2(&self, u: &DMatrix<f64>) -> DMatrix<f64> {
        u * &self.dt2_t
    }

    /// Row 0 of the folded radial derivative: u_sigma at the boundary.
    pub fn boundary_d_sigma(&self, u: &DMatrix<f64>) -> Vec<f64> {
        let shifted_row = {
            let half = self.n_theta / 2;
            move |j: usize| (j + half) % self.n_theta
        };
        (0..self.n_theta)
            .map(|j| {
                let mut acc = 0.0;
                for i in 0..self.m {
                    acc += self.d1_pp[(0, i)] * u[(i, j)]
                        + self.d1_pm[(0, i)] * u[(i, shifted_row(j))];
                }
                acc
            })
            .collect()
    }

    /// Interpolates a field radially to the origin. All angles meet at
    /// the same physical point; the returned value is the angular mean
    /// of the per-column interpolants.
    pub fn value_at_origin(&self, u: &DMatrix<f64>) -> f64 {
        // full symmetric radial line through theta and theta + pi
        let n_cheb = 2 * self.m - 1;
        let x = cheb::chebyshev_full(n_cheb);
        let w: Vec<f64> = (0..=n_cheb)
            .map(|j| {
                let s = if j % 2 == 0 { 1.0 } else { -1.0 };
                if j == 0 || j == n_cheb {
                    0.5 * s
                } else {
                    s
                }
            })
            .collect();
        let half = self.n_theta / 2;
        let mut acc = 0.0;
        for j in 0..self.n_theta {
            let mut vals = Vec::with_capacity(2 * self.m);
            for i in 0..self.m {
                vals.push(u[(i, j)]);
            }
            for i in (0..self.m).rev() {
                vals.push(u[(i, (j + half) % self.n_theta)]);
            }
            acc += cheb::bary_eval(&x, &w, &vals, 0.0);
        }
        acc / self.n_theta as f64
    }

    /// Per-Fourier-mode factorization of a circle-reference operator
    /// (polar Laplacian minus a radial zeroth-order coefficient) on the
    /// interior nodes.
    pub fn mode_preconditioner(&self, w0: &[f64]) -> ModePrecond {
        let mi = self.m - 1; // interior radial count
        let half = self.n_theta / 2;
        let mut lus = Vec::with_capacity(half + 1);
        for mode in 0..=half {
            let parity = if mode % 2 == 0 { 1.0 } else { -1.0 };
            let km2 = (mode * mode) as f64;
            let mut a = DMatrix::zeros(mi, mi);
            for i in 1..self.m {
                let si = self.sigma[i];
                for j in 1..self.m {
                    let mut v = self.d2_pp[(i, j)]
                        + parity * self.d2_pm[(i, j)]
                        + (self.d1_pp[(i, j)] + parity * self.d1_pm[(i, j)]) / si;
                    if i == j {
                        v -= km2 / (si * si) + w0[i];
                    }
                    a[(i - 1, j - 1)] = v;
                }
            }
            lus.push(a.lu());
        }
        ModePrecond {
            lus,
            m: self.m,
            n_theta: self.n_theta,
        }
    }

    /// Applies the preconditioner: Fourier transform over theta,
    /// per-mode radial back-substitution, inverse transform. Input rows
    /// 1..m (the interior); the boundary row of the result stays zero.
    pub fn precond_apply(&self, p: &ModePrecond, r: &DMatrix<f64>) -> DMatrix<f64> {
        let (m, n) = (self.m, self.n_theta);
        let half = n / 2;
        let mi = m - 1;
        // row-wise forward FFT of the interior block
        let mut rows: Vec<Vec<Complex<f64>>> = Vec::with_capacity(mi);
        for i in 1..m {
            let mut buf: Vec<Complex<f64>> = (0..n).map(|j| Complex::new(r[(i, j)], 0.0)).collect();
            self.fft_fwd.process(&mut buf);
            rows.push(buf);
        }
        // per-mode solves (conjugate symmetry halves the work)
        let mut spec: Vec<Vec<Complex<f64>>> = vec![vec![Complex::new(0.0, 0.0); n]; mi];
        let mut re = DVector::zeros(mi);
        let mut im = DVector::zeros(mi);
        for mode in 0..=half {
            for i in 0..mi {
                re[i] = rows[i][mode].re;
                im[i] = rows[i][mode].im;
            }
            let xre = p.lus[mode].solve(&re).expect("preconditioner solve");
            let xim = p.lus[mode].solve(&im).expect("preconditioner solve");
            for i in 0..mi {
                spec[i][mode] = Complex::new(xre[i], xim[i]);
                if mode != 0 && mode != half {
                    spec[i][n - mode] = Complex::new(xre[i], -xim[i]);
                }
            }
        }
        // inverse FFT rows
        let mut out = DMatrix::zeros(m, n);
        for (i, row) in spec.iter_mut().enumerate() {
            self.fft_inv.process(row);
            for j in 0..n {
                out[(i + 1, j)] = row[j].re / n as f64;
            }
        }
        out
    }
}

/// LU factors of the circle-reference operator per Fourier mode.
pub struct ModePrecond {
    lus: Vec<nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>>,
    #[allow(dead_code)]
    m: usize,
    #[allow(dead_code)]
    n_theta: usize,
}

// C^3 smoothstep on [0, 1] used to blend the chart radius: value,
// first and second derivative of 35 t^4 - 84 t^5 + 70 t^6 - 20 t^7.
fn smoothstep7(t: f64) -> (f64, f64, f64) {
    if t <= 0.0 {
        (0.0, 0.0, 0.0)
    } else if t >= 1.0 {
        (1.0, 0.0, 0.0)
    } else {
        let t2 = t * t;
        let t3 = t2 * t;
        let v = t3 * t * (35.0 - 84.0 * t + 70.0 * t2 - 20.0 * t3);
        let d = t3 * (140.0 - 420.0 * t + 420.0 * t2 - 140.0 * t3);
        let dd = t2 * (420.0 - 1680.0 * t + 2100.0 * t2 - 840.0 * t3);
        (v, d, dd)
    }
}

// start of the blend transition (plain polar below, shape-fitted at 1)
const BLEND_START: f64 = 0.4;

/// Coefficient fields of R_A^2 times the Laplacian in chart
/// coordinates, for the chart radius map
///
/// ```text
/// g(sigma, theta) = sigma R_A (1 + phi(sigma) rho(theta)).
/// ```
///
/// `phi` is identically 1 for the plain radial-scaling chart. For
/// shape families carrying odd harmonics that chart concatenates
/// opposite rays of different lengths, so chart-composed fields lose
/// smoothness at the origin and collocation accuracy degrades to
/// algebraic; blending phi to zero below [`BLEND_START`] makes the
/// chart polar near the origin and restores a smooth fold. Either way
/// phi(1) = 1 with flat derivatives, so the boundary trace and every
/// boundary formula are unchanged.
#[derive(Clone, Debug)]
pub struct ChartOperator {
    /// R(theta) = g(1, theta), the physical boundary radius.
    pub boundary_r: Vec<f64>,
    c_ss: DMatrix<f64>,
    c_st: DMatrix<f64>,
    c_tt: DMatrix<f64>,
    c_s: DMatrix<f64>,
}

impl DiskGrid {
    pub fn chart_operator(
        &self,
        rho: &[f64],
        drho: &[f64],
        ddrho: &[f64],
        r_a: f64,
        blend: bool,
    ) -> ChartOperator {
        let (m, n) = (self.m, self.n_theta);
        let ra2 = r_a * r_a;
        let mut c_ss = DMatrix::zeros(m, n);
        let mut c_st = DMatrix::zeros(m, n);
        let mut c_tt = DMatrix::zeros(m, n);
        let mut c_s = DMatrix::zeros(m, n);
        for i in 0..m {
            let s = self.sigma[i];
            let (phi, dphi, ddphi) = if blend {
                smoothstep7((s - BLEND_START) / (1.0 - BLEND_START))
            } else {
                (1.0, 0.0, 0.0)
            };
            let scale = 1.0 / (1.0 - BLEND_START);
            let (dphi, ddphi) = if blend {
                (dphi * scale, ddphi * scale * scale)
            } else {
                (0.0, 0.0)
            };
            for j in 0..n {
                let g = s * r_a * (1.0 + phi * rho[j]);
                let g_s = r_a * (1.0 + (phi + s * dphi) * rho[j]);
                let g_ss = r_a * (2.0 * dphi + s * ddphi) * rho[j];
                let g_t = s * r_a * phi * drho[j];
                let g_st = r_a * (phi + s * dphi) * drho[j];
                let g_tt = s * r_a * phi * ddrho[j];
                let a = -g_t / g_s;
                let a_s = -(g_st * g_s - g_t * g_ss) / (g_s * g_s);
                let a_t = -(g_tt * g_s - g_t * g_st) / (g_s * g_s);
                c_ss[(i, j)] = ra2 * (1.0 / (g_s * g_s) + a * a / (g * g));
                c_st[(i, j)] = ra2 * 2.0 * a / (g * g);
                c_tt[(i, j)] = ra2 / (g * g);
                c_s[(i, j)] =
                    ra2 * (-g_ss / (g_s * g_s * g_s) + 1.0 / (g * g_s) + (a_t + a * a_s) / (g * g));
            }
        }
        let boundary_r = rho.iter().map(|&r| r_a * (1.0 + r)).collect();
        ChartOperator {
            boundary_r,
            c_ss,
            c_st,
            c_tt,
            c_s,
        }
    }
}

/// R_A^2 times the chart Laplacian of `u`, interior rows only (row 0
/// of the output is zero).
pub fn apply_chart_laplacian(
    grid: &DiskGrid,
    op: &ChartOperator,
    u: &DMatrix<f64>,
) -> DMatrix<f64> {
    let du = grid.d_sigma(u, 1);
    let ddu = grid.d_sigma(u, 2);
    let ut = grid.d_theta(u);
    let dut = grid.d_sigma(&ut, 1);
    let utt = grid.d_theta2(u);
    let mut out = DMatrix::zeros(grid.m, grid.n_theta);
    for i in 1..grid.m {
        for j in 0..grid.n_theta {
            out[(i, j)] = op.c_ss[(i, j)] * ddu[(i, j)]
                + op.c_s[(i, j)] * du[(i, j)]
                + op.c_st[(i, j)] * dut[(i, j)]
                + op.c_tt[(i, j)] * utt[(i, j)];
        }
    }
    out
}
