use serde::{Deserialize, Serialize};

use crate::elements::DEFAULT_TOL_SPEC;
use crate::hermitian::DEFAULT_TOL_FORM;
use crate::tracefield::{DEFAULT_BUDGET, DEFAULT_TOL_REAL};

/// Tolerances and limits for a full group analysis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalysisConfig {
    pub max_word_length: usize,
    pub tol_form: f64,
    pub tol_real: f64,
    pub tol_corner: f64,
    pub tol_rel: f64,
    pub tol_spec: f64,
    pub tol_certify: f64,
    pub budget: u64,
    pub seed: u64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            max_word_length: 4,
            tol_form: DEFAULT_TOL_FORM,
            tol_real: DEFAULT_TOL_REAL,
            tol_corner: 1e-6,
            tol_rel: 1e-6,
            tol_spec: DEFAULT_TOL_SPEC,
            tol_certify: 1e-6,
            budget: DEFAULT_BUDGET,
            seed: 1,
        }
    }
}

impl AnalysisConfig {
    /// Checks that every tolerance is positive and finite and that at least
    /// words of length one are scanned.
    pub fn validate(&self) -> Result<(), String> {
        if self.max_word_length < 1 {
            return Err("max_word_length must be at least 1".into());
        }
        let tolerances = [
            ("tol_form", self.tol_form),
            ("tol_real", self.tol_real),
            ("tol_corner", self.tol_corner),
            ("tol_rel", self.tol_rel),
            ("tol_spec", self.tol_spec),
            ("tol_certify", self.tol_certify),
        ];
        for (name, value) in tolerances {
            if !(value > 0.0 && value.is_finite()) {
                return Err(format!("{name} must be positive and finite, got {value}"));
            }
        }
        Ok(())
    }
}
