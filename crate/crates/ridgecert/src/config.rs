//! JSON run configurations for the command-line front end.
//!
//! Every struct rejects unknown keys, so a typo in a config file fails
//! loudly instead of silently falling back to a default. Command-line
//! flags override file values; that merge happens in the binary, the
//! types here only describe the file format.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bounds::BoundFamily;
use crate::error::{Result, RidgeError};
use crate::measures::SobolevBudget;

/// Decay law for a synthetic diagnostic spectrum, trace-normalized by
/// the enclosing config.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DecaySpec {
    /// λ_k ∝ k^{−exponent}
    Algebraic { exponent: f64 },
    /// λ_k ∝ ratio^k
    Exponential { ratio: f64 },
}

/// Bound family name as it appears in config files and CSV output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyName {
    Basic,
    Improved,
    DataFree,
}

impl FamilyName {
    pub fn to_family(self) -> BoundFamily {
        match self {
            FamilyName::Basic => BoundFamily::Basic,
            FamilyName::Improved => BoundFamily::Improved,
            FamilyName::DataFree => BoundFamily::DataFree,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FamilyName::Basic => "basic",
            FamilyName::Improved => "improved",
            FamilyName::DataFree => "data_free",
        }
    }
}

/// Subspace Sobolev constants (C₁ˢᵘᵇ, C₂ˢᵘᵇ); defaults are the standard
/// Gaussian values 1, 1.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetConfig {
    #[serde(default = "one")]
    pub c1: f64,
    #[serde(default = "one")]
    pub c2: f64,
}

impl Default for BudgetConfig {
    fn default() -> Self {
        BudgetConfig { c1: 1.0, c2: 1.0 }
    }
}

impl BudgetConfig {
    pub fn build(&self) -> Result<SobolevBudget> {
        SobolevBudget::user_supplied(self.c1, self.c2)
    }
}

/// `ridgecert curves`: tabulate the three majorized-loss families on a
/// t grid, one row per (α, t).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurvesConfig {
    pub alphas: Vec<f64>,
    pub t_max: f64,
    #[serde(default)]
    pub t_min: f64,
    /// number of grid points, endpoints included
    #[serde(default = "default_t_steps")]
    pub t_steps: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

/// `ridgecert oracle`: closed-form linear-Gaussian benchmark over all
/// truncation ranks, with the bound-comparison columns validated
/// row-wise before anything is written.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    pub d: usize,
    /// trace normalization Σ λ_k of the diagnostic spectrum
    pub trace: f64,
    pub decay: DecaySpec,
    /// seed for the random eigenbasis of the synthesized problem
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

/// `ridgecert certify`: estimate the diagnostic matrix from a gradient
/// batch and certify its eigenvalue tails.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifyConfig {
    pub alphas: Vec<f64>,
    pub families: Vec<FamilyName>,
    /// subspace ranks to certify; default is every r in 0..=d
    #[serde(default)]
    pub rs: Option<Vec<usize>>,
    pub budget: BudgetConfig,
    /// gradient batch path; the --batch flag overrides
    #[serde(default)]
    pub batch: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

/// `ridgecert bayes-df`: data-free certification for a linear-Gaussian
/// model y = Ax + ε, ε ~ N(0, σ²I), under a standard Gaussian prior.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BayesDfConfig {
    /// forward matrix given inline as rows
    #[serde(default)]
    pub a: Option<Vec<Vec<f64>>>,
    /// or as a CSV file of rows (exactly one of `a`, `a_file`)
    #[serde(default)]
    pub a_file: Option<PathBuf>,
    /// iid noise standard deviation
    #[serde(default = "one")]
    pub sigma: f64,
    pub alphas: Vec<f64>,
    /// subspace ranks to certify; default is every r in 0..=d
    #[serde(default)]
    pub rs: Option<Vec<usize>>,
    #[serde(default)]
    pub budget: BudgetConfig,
    /// prior draws averaged into H_DF (exact for linear models at any n)
    #[serde(default = "default_n_prior")]
    pub n_prior: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

fn one() -> f64 {
    1.0
}

fn default_t_steps() -> usize {
    400
}

fn default_n_prior() -> usize {
    64
}

/// Parses a JSON config file, mapping both io and syntax problems onto
/// the config error (exit code 2).
pub fn load_config<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| RidgeError::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| RidgeError::Config(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        let r: std::result::Result<CurvesConfig, _> =
            serde_json::from_str(r#"{"alphas": [0.5], "t_max": 4.0, "t_mxa": 1.0}"#);
        assert!(r.is_err());
    }

    #[test]
    fn defaults_fill_in() {
        let c: CurvesConfig = serde_json::from_str(r#"{"alphas": [1.0], "t_max": 2.0}"#).unwrap();
        assert_eq!(c.t_steps, 400);
        assert_eq!(c.t_min, 0.0);
        assert_eq!(c.seed, 0);
        assert!(c.out.is_none());
    }

    #[test]
    fn decay_spec_is_tagged() {
        let d: DecaySpec =
            serde_json::from_str(r#"{"kind": "algebraic", "exponent": 2.0}"#).unwrap();
        assert_eq!(d, DecaySpec::Algebraic { exponent: 2.0 });
        let d: DecaySpec =
            serde_json::from_str(r#"{"kind": "exponential", "ratio": 0.9}"#).unwrap();
        assert_eq!(d, DecaySpec::Exponential { ratio: 0.9 });
    }

    #[test]
    fn family_names_round_trip() {
        for (name, fam) in [
            ("basic", BoundFamily::Basic),
            ("improved", BoundFamily::Improved),
            ("data_free", BoundFamily::DataFree),
        ] {
            let parsed: FamilyName = serde_json::from_str(&format!("\"{name}\"")).unwrap();
            assert_eq!(parsed.to_family(), fam);
            assert_eq!(parsed.as_str(), name);
        }
    }

    #[test]
    fn load_config_maps_errors_to_config() {
        let err = load_config::<CurvesConfig>(Path::new("/nonexistent/x.json")).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
