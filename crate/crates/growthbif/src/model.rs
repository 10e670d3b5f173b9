//! Model parameters and the nutrient consumption law.
//!
//! The consumption function f must vanish at zero concentration and be
//! strictly increasing; together with the apoptosis/mitosis balance
//! `A` in (0, f(1)) this guarantees a unique radially symmetric
//! equilibrium. Two laws are built in:
//!
//! * `Identity`: f(x) = x, the classical linear consumption rate.
//! * `MichaelisMenten`: f(x) = sigma x / (1 + x), saturating kinetics.
//!
//! User-defined laws are supplied as paired value/derivative closures;
//! no differentiation is performed on the user's behalf.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

type DynFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Nutrient consumption law f together with its derivative.
#[derive(Clone)]
pub enum NutrientFn {
    /// f(x) = x.
    Identity,
    /// f(x) = sigma * x / (1 + x) with sigma > 0.
    MichaelisMenten { sigma: f64 },
    /// User-supplied f and f'. Admissibility (f(0)=0, f'>0) is checked
    /// numerically by [`ModelParams::validate`], not assumed.
    Custom { name: String, f: DynFn, df: DynFn },
}

impl fmt::Debug for NutrientFn {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NutrientFn::Identity => write!(out, "Identity"),
            NutrientFn::MichaelisMenten { sigma } => {
                write!(out, "MichaelisMenten {{ sigma: {sigma} }}")
            }
            NutrientFn::Custom { name, .. } => write!(out, "Custom {{ name: {name:?} }}"),
        }
    }
}

impl NutrientFn {
    pub fn michaelis_menten(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(Error::parameter(format!(
                "Michaelis-Menten rate sigma must be positive, got {sigma}"
            )));
        }
        Ok(NutrientFn::MichaelisMenten { sigma })
    }

    pub fn custom(
        name: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        df: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        NutrientFn::Custom {
            name: name.into(),
            f: Arc::new(f),
            df: Arc::new(df),
        }
    }

    /// f(psi) for psi >= 0.
    pub fn eval(&self, psi: f64) -> Result<f64> {
        if psi < 0.0 {
            return Err(Error::domain(format!(
                "nutrient concentration must be nonnegative, got {psi}"
            )));
        }
        Ok(self.eval_unchecked(psi))
    }

    /// f'(psi) for psi >= 0. Errors if a user-defined derivative is not
    /// strictly positive at the queried point.
    pub fn eval_prime(&self, psi: f64) -> Result<f64> {
        if psi < 0.0 {
            return Err(Error::domain(format!(
                "nutrient concentration must be nonnegative, got {psi}"
            )));
        }
        let d = self.eval_prime_unchecked(psi);
        if let NutrientFn::Custom { name, .. } = self {
            if !(d > 0.0) {
                return Err(Error::parameter(format!(
                    "user-defined law {name:?} has nonpositive derivative {d} at psi={psi}"
                )));
            }
        }
        Ok(d)
    }

    /// Value without the range check; solver kernels evaluate in tight
    /// loops on states known to stay in the admissible band.
    #[inline]
    pub fn eval_unchecked(&self, psi: f64) -> f64 {
        match self {
            NutrientFn::Identity => psi,
            NutrientFn::MichaelisMenten { sigma } => sigma * psi / (1.0 + psi),
            NutrientFn::Custom { f, .. } => f(psi),
        }
    }

    /// Derivative without the range/positivity check.
    #[inline]
    pub fn eval_prime_unchecked(&self, psi: f64) -> f64 {
        match self {
            NutrientFn::Identity => 1.0,
            NutrientFn::MichaelisMenten { sigma } => {
                let q = 1.0 + psi;
                sigma / (q * q)
            }
            NutrientFn::Custom { df, .. } => df(psi),
        }
    }

    pub fn name(&self) -> String {
        match self {
            NutrientFn::Identity => "identity".into(),
            NutrientFn::MichaelisMenten { sigma } => format!("michaelis-menten(sigma={sigma})"),
            NutrientFn::Custom { name, .. } => format!("custom({name})"),
        }
    }
}

/// Free value/derivative accessors matching the operation names used
/// throughout; thin wrappers over the method forms.
pub fn eval_f(f: &NutrientFn, psi: f64) -> Result<f64> {
    f.eval(psi)
}

pub fn eval_f_prime(f: &NutrientFn, psi: f64) -> Result<f64> {
    f.eval_prime(psi)
}

/// Dimensionless model parameters.
#[derive(Clone, Debug)]
pub struct ModelParams {
    /// Apoptosis/mitosis balance; admissible iff 0 < A < f(1).
    pub a: f64,
    /// Relative mitosis rate (the bifurcation parameter). Optional
    /// because several tasks scan over it.
    pub g: Option<f64>,
    pub f: NutrientFn,
}

impl ModelParams {
    pub fn new(a: f64, g: Option<f64>, f: NutrientFn) -> Self {
        ModelParams { a, g, f }
    }

    /// Checks 0 < A < f(1) plus numerical admissibility of f on a grid
    /// over [0, psi_max]: f(0) = 0 and f' > 0, with the derivative
    /// cross-checked against a central difference of f.
    pub fn validate(self) -> Result<Self> {
        self.validate_on(2.0, 1000)
    }

    pub fn validate_on(self, psi_max: f64, samples: usize) -> Result<Self> {
        let f0 = self.f.eval(0.0)?;
        if f0.abs() > 1e-14 {
            return Err(Error::parameter(format!(
                "consumption law must satisfy f(0)=0, got f(0)={f0}"
            )));
        }
        for i in 0..=samples {
            let psi = psi_max * i as f64 / samples as f64;
            let d = self.f.eval_prime(psi)?;
            if !(d > 0.0) {
                return Err(Error::parameter(format!(
                    "consumption law must be strictly increasing; f'({psi}) = {d}"
                )));
            }
        }
        let f1 = self.f.eval(1.0)?;
        if !(self.a > 0.0) {
            return Err(Error::parameter(format!(
                "A must be positive, got A = {}",
                self.a
            )));
        }
        if !(self.a < f1) {
            return Err(Error::parameter(format!(
                "A must be below f(1) = {f1}, got A = {}",
                self.a
            )));
        }
        Ok(self)
    }
}

/// Validates and returns the parameters unchanged; see
/// [`ModelParams::validate`].
pub fn validate_params(p: ModelParams) -> Result<ModelParams> {
    p.validate()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_values() {
        let f = NutrientFn::Identity;
        assert_eq!(f.eval(0.0).unwrap(), 0.0);
        assert_eq!(f.eval(1.0).unwrap(), 1.0);
        assert_eq!(f.eval_prime(0.5).unwrap(), 1.0);
    }

    #[test]
    fn michaelis_menten_values() {
        let f = NutrientFn::michaelis_menten(2.0).unwrap();
        assert!((f.eval(1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((f.eval_prime(0.0).unwrap() - 2.0).abs() < 1e-15);
        assert!((f.eval_prime(1.0).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn negative_argument_rejected() {
        let f = NutrientFn::Identity;
        assert!(f.eval(-1e-9).is_err());
        assert!(f.eval_prime(-0.5).is_err());
    }

    #[test]
    fn custom_with_bad_derivative_rejected() {
        let f = NutrientFn::custom("flat", |_| 0.0, |_| 0.0);
        assert!(f.eval_prime(0.3).is_err());
    }

    #[test]
    fn admissible_range_for_a() {
        let ok = ModelParams::new(0.5, None, NutrientFn::Identity).validate();
        assert!(ok.is_ok());
        // boundary A = f(1) excluded
        let bad = ModelParams::new(1.0, None, NutrientFn::Identity).validate();
        assert!(bad.is_err());
        let bad = ModelParams::new(0.0, None, NutrientFn::Identity).validate();
        assert!(bad.is_err());
        // the A that puts the equilibrium radius at 1 for f = id
        let ok = ModelParams::new(0.892_779_931_793_069, None, NutrientFn::Identity).validate();
        assert!(ok.is_ok());
    }

    // built-in laws: f(0)=0, f'>0, and f' consistent with a central
    // difference of f at relative 1e-6, on 10^3 points in [0, 2]
    #[test]
    fn builtin_laws_are_admissible_and_consistent() {
        let laws = [
            NutrientFn::Identity,
            NutrientFn::michaelis_menten(2.0).unwrap(),
            NutrientFn::michaelis_menten(0.37).unwrap(),
        ];
        let h = 1e-6;
        for f in &laws {
            assert!(f.eval(0.0).unwrap().abs() == 0.0, "{:?}", f);
            for i in 0..=1000 {
                let psi = 2.0 * i as f64 / 1000.0;
                let d = f.eval_prime(psi).unwrap();
                assert!(d > 0.0);
                let psi_lo = (psi - h).max(0.0);
                let fd = (f.eval(psi + h).unwrap() - f.eval(psi_lo).unwrap()) / (psi + h - psi_lo);
                assert!(
                    (fd - d).abs() <= 1e-6 * d.abs().max(1e-12),
                    "{:?} at psi={psi}: fd={fd} vs d={d}",
                    f
                );
            }
        }
    }
}
