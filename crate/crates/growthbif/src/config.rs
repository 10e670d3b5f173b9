//! Run configuration: one TOML file, flag overrides win.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::FieldConfig;
use crate::model::{ModelParams, NutrientFn};
use crate::ode::OdeTol;
use crate::radial::RadialConfig;

/// Environment variable overriding the result directory.
pub const OUTDIR_ENV: &str = "GROWTHBIF_OUTDIR";

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
#[derive(Default)]
pub struct RunConfig {
    pub model: ModelSection,
    pub numerics: NumericsSection,
    pub output: OutputSection,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    /// Apoptosis/mitosis balance; admissible in (0, f(1)). The default
    /// puts the equilibrium radius at 1 for the identity law.
    pub a: f64,
    /// Relative mitosis rate, where a task needs a fixed value.
    pub g: Option<f64>,
    /// Consumption law: "identity" or "michaelis-menten".
    pub f: String,
    /// Michaelis-Menten rate constant (used when f = "michaelis-menten").
    pub sigma: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection {
            a: 0.892_779_931_793_069,
            g: None,
            f: "identity".to_string(),
            sigma: 2.0,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct NumericsSection {
    /// Chebyshev intervals of the stored radial profile.
    pub profile_intervals: usize,
    /// Uniform intervals of stored mode profiles.
    pub mode_grid: usize,
    /// Symbol table range.
    pub k_max: usize,
    /// Field grid (radial nodes x angular nodes).
    pub n_r: usize,
    pub n_theta: usize,
    /// Shape truncation order for continuation.
    pub k_trunc: usize,
    /// Amplitude of the finite-difference multiplier probe.
    pub multiplier_eps: f64,
    /// Residual acceptance for the radial solve.
    pub radial_residual_tol: f64,
    /// Integrator tolerance (absolute and relative).
    pub ode_tol: f64,
    /// Corrector target on the family coefficients of Phi.
    pub corrector_tol: f64,
}

impl Default for NumericsSection {
    fn default() -> Self {
        NumericsSection {
            profile_intervals: 256,
            mode_grid: 512,
            k_max: 64,
            n_r: 48,
            n_theta: 128,
            k_trunc: 12,
            multiplier_eps: 3e-3,
            radial_residual_tol: 1e-10,
            ode_tol: 1e-13,
            corrector_tol: 2e-10,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: String,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: "out".to_string(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
        let cfg: RunConfig =
            toml::from_str(&text).map_err(|e| Error::config(format!("{}: {e}", path.display())))?;
        Ok(cfg)
    }

    /// Applies the environment override for the result directory.
    pub fn apply_env(&mut self) {
        if let Ok(dir) = std::env::var(OUTDIR_ENV) {
            if !dir.is_empty() {
                self.output.dir = dir;
            }
        }
    }

    pub fn nutrient_fn(&self) -> Result<NutrientFn> {
        match self.model.f.as_str() {
            "identity" | "id" => Ok(NutrientFn::Identity),
            "michaelis-menten" | "mm" => NutrientFn::michaelis_menten(self.model.sigma),
            other => Err(Error::config(format!(
                "unknown consumption law {other:?} (expected \"identity\" or \"michaelis-menten\")"
            ))),
        }
    }

    /// Validates parameter admissibility and the documented grid
    /// bounds. Every failure surfaces as a configuration error.
    pub fn validate(&self) -> Result<()> {
        let f = self.nutrient_fn()?;
        ModelParams::new(self.model.a, self.model.g, f)
            .validate()
            .map_err(|e| Error::config(e.to_string()))?;
        let n = &self.numerics;
        if n.n_r < 32 || n.n_theta < 64 {
            return Err(Error::config(format!(
                "field grid {}x{} below the documented minimum 32x64",
                n.n_r, n.n_theta
            )));
        }
        if !n.n_theta.is_multiple_of(2) {
            return Err(Error::config("n_theta must be even".to_string()));
        }
        if n.k_max < 8 {
            return Err(Error::config("k_max must be at least 8".to_string()));
        }
        if n.profile_intervals < 32 || n.mode_grid < 32 {
            return Err(Error::config(
                "profile grids must have at least 32 intervals".to_string(),
            ));
        }
        for (name, v) in [
            ("multiplier_eps", n.multiplier_eps),
            ("radial_residual_tol", n.radial_residual_tol),
            ("ode_tol", n.ode_tol),
            ("corrector_tol", n.corrector_tol),
        ] {
            if !(v > 0.0) {
                return Err(Error::config(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    pub fn radial_config(&self) -> RadialConfig {
        RadialConfig {
            profile_intervals: self.numerics.profile_intervals,
            ode: OdeTol {
                rtol: self.numerics.ode_tol,
                atol: self.numerics.ode_tol,
                ..OdeTol::default()
            },
            residual_tol: self.numerics.radial_residual_tol,
            ..RadialConfig::default()
        }
    }

    pub fn field_config(&self) -> FieldConfig {
        FieldConfig::with_grid(self.numerics.n_r, self.numerics.n_theta)
    }
}
