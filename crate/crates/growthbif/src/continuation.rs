//! Branch tracing by amplitude continuation.
//!
//! Near a simple symbol root the nontrivial solution family is
//! parametrized by the amplitude of its leading cosine mode, so the
//! corrector pins a_k = eps and solves the square system
//!
//! ```text
//! family coefficients 0..K of Phi(G, rho(a)) = 0
//! unknowns            G and a_m for m != k
//! ```
//!
//! with a finite-difference Jacobian in the shape coefficients. Phi is
//! affine in G, which gives the G column exactly and lets a frozen
//! shape Jacobian be re-weighted for the current G at no cost. The
//! same machinery with G held fixed drives the local-uniqueness probe
//! away from the catalog values.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::FieldContext;
use crate::fourier;
use crate::geometry::ShapeCoeffs;
use crate::spectrum::{self, BifurcationPoint, SymbolTable};

/// Corrector settings.
#[derive(Clone, Copy, Debug)]
pub struct ContinuationConfig {
    /// Truncation order of the shape expansion (coefficients 0..=K).
    pub k_trunc: usize,
    /// Sup-norm target on the family coefficients of Phi.
    pub newton_tol: f64,
    pub newton_max: usize,
    /// Finite-difference step in the shape coefficients.
    pub fd_step: f64,
}

impl Default for ContinuationConfig {
    fn default() -> Self {
        ContinuationConfig {
            k_trunc: 12,
            newton_tol: 2e-10,
            newton_max: 30,
            fd_step: 1e-6,
        }
    }
}

/// One accepted branch point.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct BranchPoint {
    pub eps: f64,
    pub g: f64,
    pub shape: ShapeCoeffs,
    /// sup |Phi| over the boundary grid at the accepted state.
    pub residual: f64,
}

/// A traced family (eps, G(eps), rho(eps)) emanating from a symbol
/// root.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Branch {
    pub l: usize,
    pub k: usize,
    /// The root G_{kl} the branch emanates from.
    pub g_origin: f64,
    pub points: Vec<BranchPoint>,
    /// Set when the corrector failed before reaching eps_max; the
    /// branch is truncated at the last accepted point.
    pub warning: Option<String>,
}

impl Branch {
    pub fn max_residual(&self) -> f64 {
        self.points.iter().fold(0.0f64, |m, p| m.max(p.residual))
    }

    pub fn mode(&self) -> usize {
        self.k * self.l
    }
}

fn family_coeffs(values: &[f64], l: usize, count: usize) -> Vec<f64> {
    let h = fourier::analyze(values);
    (0..count).map(|m| h.cos(m * l)).collect()
}

/// Whether G is a Newton unknown or held fixed.
enum GMode {
    /// G free, coefficient `k` pinned (amplitude constraint).
    Free {
        k: usize,
    },
    Fixed,
}

struct NewtonOutcome {
    g: f64,
    a: Vec<f64>,
    residual_sup: f64,
}

/// Square Newton solve on the family coefficients. `a` enters with the
/// constrained coefficient already set when G is free.
fn newton_family(
    ctx: &FieldContext,
    l: usize,
    mut g: f64,
    mut a: Vec<f64>,
    mode: GMode,
    cfg: &ContinuationConfig,
) -> Result<NewtonOutcome> {
    let kt = a.len() - 1;
    let n_eq = kt + 1;
    if ctx.cfg.n_theta < 2 * l * (kt + 1) {
        return Err(Error::domain(format!(
            "angular grid {} cannot separate {} family coefficients at order l={l}",
            ctx.cfg.n_theta,
            kt + 1
        )));
    }
    // column index map: unknown slot -> coefficient index (G handled
    // separately when free)
    let coeff_slots: Vec<usize> = match mode {
        GMode::Free { k } => (0..=kt).filter(|&m| m != k).collect(),
        GMode::Fixed => (0..=kt).collect(),
    };
    let g_free = matches!(mode, GMode::Free { .. });

    let mut jac_shape: Option<Vec<(Vec<f64>, Vec<f64>)>> = None;
    let mut prev_norm = f64::INFINITY;
    for iter in 0..cfg.newton_max {
        let shape = ShapeCoeffs::new(l, a.clone())?;
        let aff = ctx.phi_affine(&shape)?;
        let cb = family_coeffs(&aff.base, l, n_eq);
        let cs = family_coeffs(&aff.slope, l, n_eq);
        let f_vec: Vec<f64> = cb.iter().zip(&cs).map(|(b, s)| b + g * s).collect();
        let fnorm = f_vec.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if fnorm <= cfg.newton_tol {
            let sup = aff.values(g).iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let _ = iter;
            return Ok(NewtonOutcome {
                g,
                a,
                residual_sup: sup,
            });
        }
        if fnorm > 4.0 * prev_norm && iter >= 2 {
            return Err(Error::solver(format!(
                "corrector diverging (|F| {prev_norm:.3e} -> {fnorm:.3e}); \
                 reduce the continuation step"
            )));
        }
        // refresh the shape Jacobian when absent or when convergence
        // slowed below the quadratic regime
        let need_refresh = jac_shape.is_none() || (iter >= 1 && fnorm > 0.3 * prev_norm);
        if need_refresh {
            let cols: Result<Vec<(Vec<f64>, Vec<f64>)>> = coeff_slots
                .par_iter()
                .map(|&m| {
                    let mut ap = a.clone();
                    ap[m] += cfg.fd_step;
                    let shape_p = ShapeCoeffs::new(l, ap)?;
                    let aff_p = ctx.phi_affine(&shape_p)?;
                    let cb_p = family_coeffs(&aff_p.base, l, n_eq);
                    let cs_p = family_coeffs(&aff_p.slope, l, n_eq);
                    let db: Vec<f64> = cb_p
                        .iter()
                        .zip(&cb)
                        .map(|(p, c)| (p - c) / cfg.fd_step)
                        .collect();
                    let ds: Vec<f64> = cs_p
                        .iter()
                        .zip(&cs)
                        .map(|(p, c)| (p - c) / cfg.fd_step)
                        .collect();
                    Ok((db, ds))
                })
                .collect();
            jac_shape = Some(cols?);
        }
        let cols = jac_shape.as_ref().unwrap();

        let mut jac = DMatrix::zeros(n_eq, n_eq);
        let mut col0 = 0usize;
        if g_free {
            for i in 0..n_eq {
                jac[(i, 0)] = cs[i];
            }
            col0 = 1;
        }
        for (slot, (db, ds)) in cols.iter().enumerate() {
            for i in 0..n_eq {
                jac[(i, col0 + slot)] = db[i] + g * ds[i];
            }
        }
        let rhs = DVector::from_iterator(n_eq, f_vec.iter().map(|v| -v));
        let lu = jac.lu();
        let step = lu.solve(&rhs).ok_or_else(|| {
            Error::degenerate("singular corrector Jacobian (at a branch point or fold)".to_string())
        })?;
        if g_free {
            g += step[0];
        }
        for (slot, &m) in coeff_slots.iter().enumerate() {
            let idx = if g_free { slot + 1 } else { slot };
            a[m] += step[idx];
        }
        prev_norm = fnorm;
    }
    Err(Error::solver(format!(
        "corrector did not converge in {} iterations (last |F| = {prev_norm:.3e})",
        cfg.newton_max
    )))
}

/// Corrected branch point near (g0, shape0) under the amplitude
/// constraint a_k = eps.
pub fn newton_correct(
    ctx: &FieldContext,
    g0: f64,
    shape0: &ShapeCoeffs,
    k_family: usize,
    eps: f64,
    cfg: &ContinuationConfig,
) -> Result<BranchPoint> {
    if eps == 0.0 {
        let zero = ShapeCoeffs::zero(shape0.l, shape0.k_trunc());
        let aff = ctx.phi_affine(&zero)?;
        let sup = aff.values(g0).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        return Ok(BranchPoint {
            eps: 0.0,
            g: g0,
            shape: zero,
            residual: sup,
        });
    }
    let mut a = shape0.a.clone();
    a[k_family] = eps;
    let out = newton_family(ctx, shape0.l, g0, a, GMode::Free { k: k_family }, cfg)?;
    Ok(BranchPoint {
        eps,
        g: out.g,
        shape: ShapeCoeffs::new(shape0.l, out.a)?,
        residual: out.residual_sup,
    })
}

/// Traces the branch emanating from a catalog entry up to `eps_max`
/// (sign sets the branch side) in `n_steps` uniform amplitude steps.
/// A corrector failure truncates the branch and records a warning.
pub fn trace_branch(
    ctx: &FieldContext,
    point: &BifurcationPoint,
    eps_max: f64,
    n_steps: usize,
    cfg: &ContinuationConfig,
) -> Result<Branch> {
    if eps_max.abs() > 0.2 {
        return Err(Error::domain(format!(
            "amplitude cap {eps_max} outside the safe neighbourhood (|eps| <= 0.2)"
        )));
    }
    if n_steps == 0 {
        return Err(Error::domain(
            "need at least one continuation step".to_string(),
        ));
    }
    if point.k > cfg.k_trunc {
        return Err(Error::domain(format!(
            "family index {} above the truncation order {}",
            point.k, cfg.k_trunc
        )));
    }
    let zero = ShapeCoeffs::zero(point.l, cfg.k_trunc);
    let origin = newton_correct(ctx, point.g, &zero, point.k, 0.0, cfg)?;
    let mut branch = Branch {
        l: point.l,
        k: point.k,
        g_origin: point.g,
        points: vec![origin],
        warning: None,
    };
    let mut g = point.g;
    let mut shape = zero;
    for i in 1..=n_steps {
        let eps = eps_max * i as f64 / n_steps as f64;
        match newton_correct(ctx, g, &shape, point.k, eps, cfg) {
            Ok(pt) => {
                g = pt.g;
                shape = pt.shape.clone();
                branch.points.push(pt);
            }
            Err(e) => {
                branch.warning = Some(format!("truncated at step {i} (eps = {eps:.4}): {e}"));
                break;
            }
        }
    }
    Ok(branch)
}

/// Least-squares asymptotics of a branch: intercept and slope of
/// G(eps), and the uniform bound on |rho(eps) - eps cos(k l s)|/eps^2.
#[derive(Clone, Debug, Serialize)]
pub struct AsymptoticsFit {
    pub g_intercept: f64,
    pub g_slope: f64,
    pub quadratic_defect: f64,
}

pub fn fit_asymptotics(branch: &Branch) -> Result<AsymptoticsFit> {
    let pts = &branch.points;
    if pts.len() < 5 {
        return Err(Error::domain(format!(
            "asymptotics fit needs at least 5 branch points, got {}",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let (mut se, mut sg, mut see, mut seg) = (0.0, 0.0, 0.0, 0.0);
    for p in pts {
        se += p.eps;
        sg += p.g;
        see += p.eps * p.eps;
        seg += p.eps * p.g;
    }
    let det = n * see - se * se;
    if det.abs() < 1e-30 {
        return Err(Error::degenerate(
            "degenerate amplitude spread in the fit".to_string(),
        ));
    }
    let g_slope = (n * seg - se * sg) / det;
    let g_intercept = (sg - g_slope * se) / n;

    let mut defect = 0.0f64;
    for p in pts.iter().filter(|p| p.eps != 0.0) {
        // a_k = eps exactly, so removing the leading mode leaves the
        // higher-order remainder
        let rem = p.shape.with_coeff(branch.k, 0.0);
        defect = defect.max(rem.sup_norm() / (p.eps * p.eps));
    }
    Ok(AsymptoticsFit {
        g_intercept,
        g_slope,
        quadratic_defect: defect,
    })
}

/// Outcome of the local-uniqueness probe at one G value.
#[derive(Clone, Debug)]
pub struct ProbeReport {
    pub g: f64,
    pub l: usize,
    pub attempts: usize,
    pub returned_to_zero: usize,
    /// Converged nonzero solutions (findings worth reporting, not
    /// discarding).
    pub findings: Vec<ShapeCoeffs>,
}

impl ProbeReport {
    pub fn all_returned(&self) -> bool {
        self.returned_to_zero == self.attempts && self.findings.is_empty()
    }
}

/// Newton solves at fixed G from random small even l-periodic starts;
/// every run must fall back to the trivial shape when G is off the
/// catalog and above the threshold.
pub fn non_bifurcation_probe(
    ctx: &FieldContext,
    table: &SymbolTable,
    g: f64,
    l: usize,
    attempts: usize,
    seed: u64,
    cfg: &ContinuationConfig,
) -> Result<ProbeReport> {
    let k1 = spectrum::find_k1(table)?;
    let g_thresh = spectrum::g_bullet(table, k1)?;
    if g <= g_thresh {
        return Err(Error::domain(format!(
            "probe value G = {g:.4} not above the threshold {g_thresh:.4}; \
             local uniqueness is only asserted beyond it"
        )));
    }
    // distance to the catalog: a root of the symbol makes the
    // linearization singular and the probe inconclusive
    let mut m = l;
    while m <= table.k_max() {
        if let Ok(root) = table.bif_value(m.max(2)) {
            if (g - root).abs() <= 1e-6 * root.abs() {
                return Err(Error::degenerate(format!(
                    "G = {g:.6} coincides with the mode-{m} root; probe inconclusive"
                )));
            }
        }
        m += l;
    }

    let amplitude = 1e-3;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = ProbeReport {
        g,
        l,
        attempts,
        returned_to_zero: 0,
        findings: Vec::new(),
    };
    for _ in 0..attempts {
        let raw: Vec<f64> = (0..=cfg.k_trunc)
            .map(|mm| (rng.gen::<f64>() * 2.0 - 1.0) / (1.0 + (mm * mm) as f64))
            .collect();
        let unscaled = ShapeCoeffs { l, a: raw };
        let scale = amplitude / unscaled.sup_norm().max(1e-12);
        let a0: Vec<f64> = unscaled.a.iter().map(|c| c * scale).collect();
        let out = newton_family(ctx, l, g, a0, GMode::Fixed, cfg)?;
        let sup = ShapeCoeffs {
            l,
            a: out.a.clone(),
        }
        .sup_norm();
        if sup <= 1e-9 {
            report.returned_to_zero += 1;
        } else {
            report.findings.push(ShapeCoeffs { l, a: out.a });
        }
    }
    Ok(report)
}
