//! Boundary shapes in the even, 2 pi / l - periodic cosine basis and
//! the star-shaped coordinate chart.
//!
//! A shape is rho(s) = sum_m a_m cos(m l s); the physical boundary is
//! the polar curve r(s) = R_A (1 + rho(s)). Evenness and l-fold
//! symmetry hold identically by construction of the basis. The
//! admissible neighbourhood keeps sup |rho| < 1/4, which guarantees
//! star-shapedness with margin.
//!
//! The interior is identified with the unit disk through the plain
//! radial scaling chart (sigma, theta) -> sigma R_A (1 + rho(theta));
//! its boundary trace agrees with the usual boundary-fitted
//! diffeomorphism, and steady-state quantities only ever need that
//! trace.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier;

/// Upper bound for sup |rho| (open neighbourhood of the circle).
pub const RHO_SUP_BOUND: f64 = 0.25;

/// Cosine coefficients of an even, 2 pi / l - periodic perturbation.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ShapeCoeffs {
    /// Symmetry order (l = 1 imposes evenness only).
    pub l: usize,
    /// a[m] multiplies cos(m l s); truncation order K = a.len() - 1.
    pub a: Vec<f64>,
}

impl ShapeCoeffs {
    pub fn new(l: usize, a: Vec<f64>) -> Result<Self> {
        if l == 0 {
            return Err(Error::domain("symmetry order l must be >= 1".to_string()));
        }
        if a.is_empty() {
            return Err(Error::domain(
                "coefficient list must not be empty".to_string(),
            ));
        }
        let shape = ShapeCoeffs { l, a };
        let sup = shape.sup_norm();
        if sup >= RHO_SUP_BOUND {
            return Err(Error::domain(format!(
                "sup |rho| = {sup:.4} outside the admissible neighbourhood (< {RHO_SUP_BOUND})"
            )));
        }
        Ok(shape)
    }

    /// The zero shape with K + 1 coefficient slots.
    pub fn zero(l: usize, k_trunc: usize) -> Self {
        ShapeCoeffs {
            l,
            a: vec![0.0; k_trunc + 1],
        }
    }

    /// Single-mode shape eps * cos(k_family * l * s).
    pub fn single(l: usize, k_family: usize, k_trunc: usize, eps: f64) -> Result<Self> {
        let mut a = vec![0.0; k_trunc.max(k_family) + 1];
        a[k_family] = eps;
        ShapeCoeffs::new(l, a)
    }

    pub fn k_trunc(&self) -> usize {
        self.a.len() - 1
    }

    /// Highest physical harmonic carried by the truncation.
    pub fn max_harmonic(&self) -> usize {
        self.k_trunc() * self.l
    }

    pub fn is_zero(&self) -> bool {
        self.a.iter().all(|&c| c == 0.0)
    }

    /// rho, rho', rho'' at angle s (exact trigonometric sums).
    pub fn eval(&self, s: f64) -> (f64, f64, f64) {
        let (r, dr, ddr, _) = self.eval3(s);
        (r, dr, ddr)
    }

    /// rho through the third derivative (curvature slope needs rho''').
    pub fn eval3(&self, s: f64) -> (f64, f64, f64, f64) {
        let mut v = 0.0;
        let mut dv = 0.0;
        let mut ddv = 0.0;
        let mut dddv = 0.0;
        for (m, &c) in self.a.iter().enumerate() {
            let w = (m * self.l) as f64;
            let (sin, cos) = (w * s).sin_cos();
            v += c * cos;
            dv -= c * w * sin;
            ddv -= c * w * w * cos;
            dddv += c * w * w * w * sin;
        }
        (v, dv, ddv, dddv)
    }

    /// sup |rho| on a dense grid (the coefficients alone only bound it).
    pub fn sup_norm(&self) -> f64 {
        let samples = (8 * (self.max_harmonic() + 1)).max(256);
        (0..samples)
            .map(|j| {
                let s = 2.0 * std::f64::consts::PI * j as f64 / samples as f64;
                self.eval(s).0.abs()
            })
            .fold(0.0, f64::max)
    }

    /// Copy with coefficient m replaced.
    pub fn with_coeff(&self, m: usize, value: f64) -> Self {
        let mut a = self.a.clone();
        a[m] = value;
        ShapeCoeffs { l: self.l, a }
    }
}

/// rho, rho', rho'' at angle s.
pub fn eval_shape(shape: &ShapeCoeffs, s: f64) -> (f64, f64, f64) {
    shape.eval(s)
}

/// Curvature of the polar curve r(s) = R_A (1 + rho(s)), with the
/// circle convention kappa = 1/R.
pub fn curvature(shape: &ShapeCoeffs, r_a: f64, s: f64) -> f64 {
    let (rho, drho, ddrho) = shape.eval(s);
    let r = r_a * (1.0 + rho);
    let dr = r_a * drho;
    let ddr = r_a * ddrho;
    let q = r * r + dr * dr;
    (r * r + 2.0 * dr * dr - r * ddr) / (q * q.sqrt())
}

/// d kappa / ds along the boundary (analytic, used for the boundary
/// data slope of the pressure problem).
pub fn curvature_slope(shape: &ShapeCoeffs, r_a: f64, s: f64) -> f64 {
    let (rho, drho, ddrho, dddrho) = shape.eval3(s);
    let r = r_a * (1.0 + rho);
    let dr = r_a * drho;
    let ddr = r_a * ddrho;
    let dddr = r_a * dddrho;
    let p = r * r + 2.0 * dr * dr - r * ddr;
    let q = r * r + dr * dr;
    let dp = 2.0 * r * dr + 3.0 * dr * ddr - r * dddr;
    let dq = 2.0 * r * dr + 2.0 * dr * ddr;
    dp / (q * q.sqrt()) - 1.5 * p * dq / (q * q * q.sqrt())
}

/// Gradient of the defining function N(x) = |x| - R_A - R_A rho at the
/// boundary point with angle s, in the orthonormal polar frame
/// (radial, angular): (1, -rho'/(1+rho)). Unnormalized by convention;
/// the multiplier identities fix this normalization.
pub fn normal_field(shape: &ShapeCoeffs, s: f64) -> (f64, f64) {
    let (rho, drho, _) = shape.eval(s);
    (1.0, -drho / (1.0 + rho))
}

/// Radial-scaling chart: (sigma, theta) in [0,1] x [0, 2 pi) to the
/// plane point with polar radius sigma R_A (1 + rho(theta)).
pub fn chart(shape: &ShapeCoeffs, r_a: f64, sigma: f64, theta: f64) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&sigma) {
        return Err(Error::domain(format!(
            "chart radius sigma = {sigma} outside [0, 1]"
        )));
    }
    let (rho, _, _) = shape.eval(theta);
    let r = sigma * r_a * (1.0 + rho);
    Ok((r * theta.cos(), r * theta.sin()))
}

/// Shape data tabulated on the uniform angular grid, with enough
/// angular resolution to keep the highest carried harmonic
/// alias-free with margin.
#[derive(Clone, Debug)]
pub struct BoundaryGrid {
    pub theta: Vec<f64>,
    pub rho: Vec<f64>,
    pub drho: Vec<f64>,
    pub ddrho: Vec<f64>,
}

impl BoundaryGrid {
    pub fn new(shape: &ShapeCoeffs, n_theta: usize) -> Result<Self> {
        let needed = 4 * (shape.max_harmonic() + 1);
        if n_theta < needed {
            return Err(Error::domain(format!(
                "angular grid {n_theta} below the anti-aliasing margin {needed} \
                 for harmonic {}",
                shape.max_harmonic()
            )));
        }
        if !n_theta.is_multiple_of(2) {
            return Err(Error::domain("angular grid size must be even".to_string()));
        }
        let theta = fourier::theta_nodes(n_theta);
        let mut rho = Vec::with_capacity(n_theta);
        let mut drho = Vec::with_capacity(n_theta);
        let mut ddrho = Vec::with_capacity(n_theta);
        for &t in &theta {
            let (v, dv, ddv) = shape.eval(t);
            rho.push(v);
            drho.push(dv);
            ddrho.push(ddv);
        }
        Ok(BoundaryGrid {
            theta,
            rho,
            drho,
            ddrho,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ball(l: usize, coeffs: &[f64]) -> ShapeCoeffs {
        ShapeCoeffs::new(l, coeffs.to_vec()).unwrap()
    }

    #[test]
    fn eval_matches_hand_values() {
        let z = ShapeCoeffs::zero(2, 4);
        assert_eq!(z.eval(0.7), (0.0, 0.0, 0.0));

        // eps cos(2s): value eps, slope 0, second derivative -4 eps at 0
        let eps = 0.01;
        let s1 = ball(2, &[0.0, eps]);
        let (v, dv, ddv) = s1.eval(0.0);
        assert!((v - eps).abs() < 1e-16);
        assert!(dv.abs() < 1e-16);
        assert!((ddv + 4.0 * eps).abs() < 1e-15);
        // at s = pi/4: (0, -2 eps, 0)
        let (v, dv, ddv) = s1.eval(std::f64::consts::FRAC_PI_4);
        assert!(v.abs() < 1e-15);
        assert!((dv + 2.0 * eps).abs() < 1e-15);
        assert!(ddv.abs() < 1e-13);
    }

    #[test]
    fn circle_curvature_and_normal() {
        let z = ShapeCoeffs::zero(3, 2);
        for s in [0.0, 1.1, 4.0] {
            assert!((curvature(&z, 2.5, s) - 0.4).abs() < 1e-15);
            assert_eq!(normal_field(&z, s), (1.0, 0.0));
        }
    }

    #[test]
    fn curvature_hand_value() {
        // rho = 0.01 cos(2s) at s = 0, R_A = 1:
        // r = 1.01, r' = 0, r'' = -0.04
        let s1 = ball(2, &[0.0, 0.01]);
        let expect = (1.01f64.powi(2) + 0.04 * 1.01) / (1.01f64.powi(2)).powf(1.5);
        let got = curvature(&s1, 1.0, 0.0);
        assert!((got - expect).abs() < 1e-14, "{got} vs {expect}");
        assert!((got - 1.029_311_74).abs() < 1e-6);
    }

    #[test]
    fn normal_sign_follows_slope() {
        let eps = 0.01;
        let s1 = ball(2, &[0.0, eps]);
        // rho'(pi/4) = -2 eps, so the angular component is +2 eps
        let (nr, nt) = normal_field(&s1, std::f64::consts::FRAC_PI_4);
        assert_eq!(nr, 1.0);
        assert!((nt - 2.0 * eps).abs() < 1e-15);
    }

    #[test]
    fn chart_basics() {
        let eps = 0.01;
        let s1 = ball(2, &[0.0, eps]);
        let (x, y) = chart(&s1, 2.0, 1.0, 0.0).unwrap();
        assert!((x - 2.0 * (1.0 + eps)).abs() < 1e-15);
        assert!(y.abs() < 1e-15);
        let (x, y) = chart(&s1, 2.0, 0.0, 1.234).unwrap();
        assert_eq!((x, y), (0.0, 0.0));
        assert!(chart(&s1, 2.0, 1.2, 0.0).is_err());
        // zero shape at sigma = 1 is the circle of radius R_A
        let z = ShapeCoeffs::zero(2, 1);
        for j in 0..8 {
            let t = j as f64;
            let (x, y) = chart(&z, 1.7, 1.0, t).unwrap();
            assert!((x.hypot(y) - 1.7).abs() < 1e-14);
        }
    }

    #[test]
    fn neighbourhood_bound_enforced() {
        assert!(ShapeCoeffs::new(2, vec![0.3]).is_err());
        assert!(ShapeCoeffs::new(2, vec![0.0, 0.13, 0.13]).is_err());
        assert!(ShapeCoeffs::new(2, vec![0.0, 0.2]).is_ok());
    }

    #[test]
    fn boundary_grid_guards_aliasing() {
        let s = ball(2, &[0.0, 0.01, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.001]);
        // max harmonic 16 needs at least 68 nodes
        assert!(BoundaryGrid::new(&s, 64).is_err());
        assert!(BoundaryGrid::new(&s, 68).is_ok());
        assert!(BoundaryGrid::new(&s, 127).is_err());
    }

    #[test]
    fn spectral_derivative_consistency() {
        // rho' from coefficients vs central differences of rho
        let s = ball(4, &[0.01, 0.05, -0.02, 0.013]);
        let h = 1e-5;
        for j in 0..40 {
            let t = 0.157 * j as f64;
            let (_, dv, ddv) = s.eval(t);
            let fd1 = (s.eval(t + h).0 - s.eval(t - h).0) / (2.0 * h);
            let fd2 = (s.eval(t + h).0 - 2.0 * s.eval(t).0 + s.eval(t - h).0) / (h * h);
            assert!((dv - fd1).abs() < 1e-8, "t={t}: {dv} vs {fd1}");
            assert!((ddv - fd2).abs() < 1e-4);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        // symmetry by construction: rho(s) = rho(-s) = rho(s + 2 pi/l)
        #[test]
        fn shape_symmetries(
            l in 1usize..5,
            c0 in -0.03f64..0.03,
            c1 in -0.05f64..0.05,
            c2 in -0.05f64..0.05,
            c3 in -0.03f64..0.03,
            s in 0.0f64..6.28,
        ) {
            let shape = ShapeCoeffs::new(l, vec![c0, c1, c2, c3]).unwrap();
            let period = 2.0 * std::f64::consts::PI / l as f64;
            let v = shape.eval(s).0;
            prop_assert!((v - shape.eval(-s).0).abs() < 1e-12);
            prop_assert!((v - shape.eval(s + period).0).abs() < 1e-12);
        }

        // curvature against a finite-difference oracle on the
        // parametrized curve (x'y'' - y'x'')/(x'^2 + y'^2)^(3/2)
        #[test]
        fn curvature_matches_parametric_oracle(
            l in 1usize..4,
            c1 in -0.08f64..0.08,
            c2 in -0.08f64..0.08,
            c3 in -0.04f64..0.04,
            r_a in 0.5f64..2.0,
            s in 0.0f64..6.28,
        ) {
            let shape = ShapeCoeffs::new(l, vec![0.0, c1, c2, c3]).unwrap();
            let h = 1e-4;
            let pt = |t: f64| {
                let (rho, _, _) = shape.eval(t);
                let r = r_a * (1.0 + rho);
                (r * t.cos(), r * t.sin())
            };
            let (xp, yp) = pt(s + h);
            let (xm, ym) = pt(s - h);
            let (x0, y0) = pt(s);
            let dx = (xp - xm) / (2.0 * h);
            let dy = (yp - ym) / (2.0 * h);
            let ddx = (xp - 2.0 * x0 + xm) / (h * h);
            let ddy = (yp - 2.0 * y0 + ym) / (h * h);
            let q = dx * dx + dy * dy;
            let oracle = (dx * ddy - dy * ddx) / (q * q.sqrt());
            let exact = curvature(&shape, r_a, s);
            prop_assert!((exact - oracle).abs() < 1e-6 * exact.abs().max(1.0),
                "s={s}: {exact} vs {oracle}");
        }

        // the normal field is orthogonal to the boundary tangent
        #[test]
        fn normal_orthogonal_to_tangent(
            l in 1usize..5,
            c1 in -0.1f64..0.1,
            c2 in -0.08f64..0.08,
            s in 0.0f64..6.28,
        ) {
            let shape = ShapeCoeffs::new(l, vec![0.0, c1, c2]).unwrap();
            let r_a = 1.3;
            let (rho, drho, _) = shape.eval(s);
            let r = r_a * (1.0 + rho);
            let dr = r_a * drho;
            // tangent in the polar frame: (dr, r); normal: (1, -rho'/(1+rho))
            let (nr, nt) = normal_field(&shape, s);
            let dot = dr * nr + r * nt;
            prop_assert!(dot.abs() < 1e-10, "dot = {dot}");
        }

        // curvature slope against finite differences of curvature
        #[test]
        fn curvature_slope_consistent(
            c1 in -0.08f64..0.08,
            c2 in -0.05f64..0.05,
            s in 0.0f64..6.28,
        ) {
            let shape = ShapeCoeffs::new(2, vec![0.0, c1, c2]).unwrap();
            let h = 1e-5;
            let fd = (curvature(&shape, 1.0, s + h) - curvature(&shape, 1.0, s - h)) / (2.0 * h);
            let exact = curvature_slope(&shape, 1.0, s);
            prop_assert!((exact - fd).abs() < 1e-7 * (1.0 + exact.abs()), "{exact} vs {fd}");
        }
    }
}
