//! The linearization symbol, its roots in G, and the bifurcation
//! catalog.
//!
//! The boundary linearization at the radial equilibrium acts diagonally
//! on Fourier modes with eigenvalues
//!
//! ```text
//! mu_k(G) = -(|k|^3 - |k|)/R^3 - G * d_|k|,
//! d_k = (A/2) u_k'(1)/u_k(1) + A - f(1),
//! ```
//!
//! so each mode k >= 2 with d_k != 0 crosses zero at exactly one
//! G_k = -(k^3 - k)/(R^3 d_k). Mode 1 has d_1 = 0 identically (the
//! translation mode), which is why the catalog machinery must exclude
//! near-degenerate denominators robustly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::NutrientFn;
use crate::modes::{self, ModeSolution};
use crate::radial::RadialEquilibrium;

/// Symbol data for modes 0..=k_max over one equilibrium.
#[derive(Clone, Debug)]
pub struct SymbolTable {
    pub r_a: f64,
    pub a: f64,
    pub f1: f64,
    /// d_k for k = 0..=k_max.
    pub denom: Vec<f64>,
    /// u_k'(1)/u_k(1).
    pub ratios: Vec<f64>,
}

impl SymbolTable {
    /// Assembles the table by solving the mode family.
    pub fn build(
        eq: &RadialEquilibrium,
        f: &NutrientFn,
        k_max: usize,
        grid_size: usize,
    ) -> Result<Self> {
        let f1 = f.eval(1.0)?;
        let sols = modes::solve_modes(0..=k_max, eq, f, grid_size)?;
        Ok(Self::from_modes(eq.r_a, eq.a, f1, &sols))
    }

    pub fn from_modes(r_a: f64, a: f64, f1: f64, sols: &[ModeSolution]) -> Self {
        let ratios: Vec<f64> = sols.iter().map(|s| s.ratio()).collect();
        let denom = ratios.iter().map(|r| a / 2.0 * r + a - f1).collect();
        SymbolTable {
            r_a,
            a,
            f1,
            denom,
            ratios,
        }
    }

    /// Synthetic table from explicit slope ratios (test configurations
    /// with forced mode data).
    pub fn from_parts(r_a: f64, a: f64, f1: f64, ratios: Vec<f64>) -> Self {
        let denom = ratios.iter().map(|r| a / 2.0 * r + a - f1).collect();
        SymbolTable {
            r_a,
            a,
            f1,
            denom,
            ratios,
        }
    }

    pub fn k_max(&self) -> usize {
        self.denom.len() - 1
    }

    /// Threshold below which a denominator d_k counts as degenerate.
    /// Scaled by the parameter magnitude rather than by f(1) - A: the
    /// latter can itself be the near-zero quantity being guarded.
    pub fn denom_tol(&self) -> f64 {
        1e-9 * (self.a.abs() + self.f1.abs()).max(1e-30)
    }

    fn d(&self, k: usize) -> Result<f64> {
        self.denom.get(k).copied().ok_or_else(|| {
            Error::domain(format!("mode {k} beyond table range 0..={}", self.k_max()))
        })
    }

    /// mu_k(G); depends on |k| only.
    pub fn mu(&self, k: i64, g: f64) -> Result<f64> {
        let ka = k.unsigned_abs() as usize;
        let d = self.d(ka)?;
        let kf = ka as f64;
        Ok((-kf * kf * kf + kf) / self.r_a.powi(3) - g * d)
    }

    /// The unique root G_k of mu_k for k >= 2.
    pub fn bif_value(&self, k: usize) -> Result<f64> {
        if k < 2 {
            return Err(Error::domain(format!(
                "bifurcation values are defined for modes k >= 2, got {k}"
            )));
        }
        let d = self.d(k)?;
        if d.abs() <= self.denom_tol() {
            return Err(Error::degenerate(format!(
                "denominator d_{k} = {d:.3e} below threshold {:.3e}",
                self.denom_tol()
            )));
        }
        let kf = k as f64;
        Ok((-kf * kf * kf + kf) / (self.r_a.powi(3) * d))
    }

    fn bif_value_opt(&self, k: usize) -> Option<f64> {
        self.bif_value(k).ok()
    }
}

/// Smallest index k1 from which the root sequence is defined, positive
/// and strictly increasing through the end of the table.
pub fn find_k1(table: &SymbolTable) -> Result<usize> {
    let k_max = table.k_max();
    if k_max < 8 {
        return Err(Error::domain(
            "k_max too small to locate the ordering onset; use at least 8 (32 recommended)"
                .to_string(),
        ));
    }
    let roots: Vec<Option<f64>> = (0..=k_max).map(|k| table.bif_value_opt(k)).collect();
    let good = |k: usize| -> bool {
        match (roots[k], roots.get(k + 1).copied().flatten()) {
            (Some(g), Some(gn)) => g > 0.0 && g < gn,
            (Some(g), None) if k == k_max => g > 0.0,
            _ => false,
        }
    };
    'outer: for k1 in 0..k_max {
        for k in k1..k_max {
            if !good(k) {
                continue 'outer;
            }
        }
        return Ok(k1);
    }
    Err(Error::solver(format!(
        "no ordering onset below k_max = {k_max}; rerun with a larger k_max"
    )))
}

/// find_k1 plus the doubling stability test: neither the onset nor the
/// threshold value may move when the table is rebuilt with twice the
/// mode range.
pub fn find_k1_stable(
    eq: &RadialEquilibrium,
    f: &NutrientFn,
    k_max: usize,
    grid_size: usize,
) -> Result<(usize, SymbolTable)> {
    let table = SymbolTable::build(eq, f, k_max, grid_size)?;
    let k1 = find_k1(&table)?;
    let table2 = SymbolTable::build(eq, f, 2 * k_max, grid_size)?;
    let k1_2 = find_k1(&table2)?;
    if k1 != k1_2 {
        return Err(Error::solver(format!(
            "ordering onset unstable under k_max doubling: {k1} at {k_max}, {k1_2} at {}",
            2 * k_max
        )));
    }
    let gb = g_bullet(&table, k1)?;
    let gb2 = g_bullet(&table2, k1_2)?;
    if (gb - gb2).abs() > 1e-9 * gb.abs().max(1.0) {
        return Err(Error::solver(format!(
            "threshold value unstable under k_max doubling: {gb} vs {gb2}"
        )));
    }
    Ok((k1, table))
}

/// The threshold value: (k1^3 - k1)/R^3 divided by the smallest
/// nondegenerate |d_k| over 0 <= k <= k1.
pub fn g_bullet(table: &SymbolTable, k1: usize) -> Result<f64> {
    let kf = k1 as f64;
    let num = (kf * kf * kf - kf) / table.r_a.powi(3);
    if num == 0.0 {
        return Ok(0.0);
    }
    let tol = table.denom_tol();
    let min = table.denom[..=k1.min(table.k_max())]
        .iter()
        .map(|d| d.abs())
        .filter(|d| *d > tol)
        .fold(f64::INFINITY, f64::min);
    if !min.is_finite() {
        return Err(Error::degenerate(
            "all low-mode denominators are degenerate; threshold undefined".to_string(),
        ));
    }
    Ok(num / min)
}

/// Nondegeneracy of the mode-0 denominator, the standing hypothesis of
/// the branch theory.
pub fn check_feri(table: &SymbolTable, tol: f64) -> bool {
    table.denom[0].abs() > tol
}

pub const FERI_TOL: f64 = 1e-8;

/// One admissible symbol root: the catalog entry mode = k*l at G value
/// `g`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct BifurcationPoint {
    /// Full mode index k*l.
    pub mode: usize,
    /// Imposed symmetry order.
    pub l: usize,
    /// Index within the symmetry class (mode = k*l).
    pub k: usize,
    /// Root of mu_mode.
    pub g: f64,
}

// Roundoff floor for the root re-validation: G_k is formed as num/d,
// so mu(k, G_k) carries cancellation error proportional to |num| eps.
fn mu_root_tol(table: &SymbolTable, mode: usize) -> f64 {
    let kf = mode as f64;
    let num = ((kf * kf * kf - kf) / table.r_a.powi(3)).abs();
    (1e-10f64).max(32.0 * f64::EPSILON * num)
}

/// First `count` catalog entries for symmetry order l: modes k*l with
/// k >= 1 whose root exceeds the threshold, each revalidated as a
/// simple zero with the correct crossing sign. The smallest admissible
/// mode k*l = k1 sits exactly at the threshold (the threshold minimum
/// is attained there), so the comparison is tolerance-inclusive.
pub fn catalog(l: usize, count: usize, table: &SymbolTable) -> Result<Vec<BifurcationPoint>> {
    if l < 2 {
        return Err(Error::domain(format!(
            "symmetry order must be >= 2, got {l}"
        )));
    }
    if !check_feri(table, FERI_TOL) {
        return Err(Error::degenerate(
            "mode-0 denominator vanishes; catalog hypotheses violated".to_string(),
        ));
    }
    let k1 = find_k1(table)?;
    let g_thresh = g_bullet(table, k1)?;
    let mut out = Vec::with_capacity(count);
    let mut k = 1usize;
    while out.len() < count {
        let mode = k * l;
        if mode > table.k_max() {
            return Err(Error::domain(format!(
                "need mode {mode} for {count} entries but the table stops at {}; \
                 rebuild with a larger k_max",
                table.k_max()
            )));
        }
        k += 1;
        if mode < 2.max(k1) {
            continue;
        }
        let g = match table.bif_value(mode) {
            Ok(g) => g,
            Err(Error::Degenerate(_)) => continue,
            Err(e) => return Err(e),
        };
        if !(g > 0.0) || g < g_thresh * (1.0 - 1e-9) {
            continue;
        }
        let mu = table.mu(mode as i64, g)?;
        if mu.abs() > mu_root_tol(table, mode) {
            return Err(Error::degenerate(format!(
                "root revalidation failed for mode {mode}: mu = {mu:.3e}"
            )));
        }
        let point = BifurcationPoint {
            mode,
            l,
            k: mode / l,
            g,
        };
        transversality(&point, table)?;
        out.push(point);
    }
    out.sort_by(|a, b| a.g.partial_cmp(&b.g).unwrap());
    Ok(out)
}

/// Crossing speed -d_mode of the eigenvalue in G; positive for every
/// catalog entry, returned as an error otherwise.
pub fn transversality(point: &BifurcationPoint, table: &SymbolTable) -> Result<f64> {
    let d = table.d(point.mode)?;
    let v = -d;
    if v <= 0.0 {
        return Err(Error::check(format!(
            "transversality fails at mode {}: crossing speed {v:.3e} <= 0",
            point.mode
        )));
    }
    Ok(v)
}

/// Default invertibility margin for [`is_isomorphism_at`].
pub fn default_iso_margin(g: f64) -> f64 {
    1e-6 * (1.0 + g.abs())
}

/// Numerical invertibility of the linearization on the even, l-fold
/// symmetric subspace: every symbol value mu_(k l)(G) within the table
/// stays away from zero by at least `margin`.
pub fn is_isomorphism_at(g: f64, l: usize, table: &SymbolTable, margin: f64) -> bool {
    let mut m = 0usize;
    loop {
        if m > table.k_max() {
            return true;
        }
        let mu = table.mu(m as i64, g).expect("mode within range");
        if mu.abs() <= margin {
            return false;
        }
        m += l;
        if l == 0 {
            unreachable!();
        }
    }
}
