//! Problem files and their resolution into library inputs.

use serde::{Deserialize, Serialize};

use mec_core::{rat_from_decimal, Distribution, EntropyFunctional, EnumOptions, Rational};

use crate::CliError;

/// Which entropy to minimize. `base` applies to Shannon and Rényi only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropySpec {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<f64>,
}

impl Default for EntropySpec {
    fn default() -> Self {
        EntropySpec {
            kind: "shannon".to_string(),
            alpha: None,
            base: None,
        }
    }
}

impl EntropySpec {
    pub fn functional(&self) -> Result<EntropyFunctional, CliError> {
        let base = self.base.unwrap_or(2.0);
        let alpha = || {
            self.alpha
                .ok_or_else(|| CliError::Validation(format!("entropy {:?} needs alpha", self.kind)))
        };
        let built = match self.kind.as_str() {
            "shannon" => EntropyFunctional::shannon_base(base),
            "renyi" => EntropyFunctional::renyi(alpha()?, base),
            "tsallis" => EntropyFunctional::tsallis(alpha()?),
            other => {
                return Err(CliError::Validation(format!(
                    "unknown entropy kind {other:?}"
                )))
            }
        };
        built.map_err(|e| CliError::Validation(e.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProblemOptions {
    pub tie_tol: f64,
    pub prefilter: bool,
    pub budget: u64,
    pub threads: Option<usize>,
}

impl Default for ProblemOptions {
    fn default() -> Self {
        let e = EnumOptions::default();
        ProblemOptions {
            tie_tol: 1e-9,
            prefilter: e.prefilter,
            budget: e.budget,
            threads: e.threads,
        }
    }
}

/// The on-disk problem: marginals as decimal or fraction strings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemFile {
    pub marginals: Vec<Vec<String>>,
    #[serde(default)]
    pub entropy: EntropySpec,
    #[serde(default)]
    pub options: ProblemOptions,
}

/// Command-line overrides; `None` keeps the file's value.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub entropy: Option<String>,
    pub alpha: Option<f64>,
    pub base: Option<f64>,
    pub tie_tol: Option<f64>,
    pub no_prefilter: bool,
    pub threads: Option<usize>,
    pub budget: Option<u64>,
}

/// A validated problem.
#[derive(Clone, Debug)]
pub struct Problem {
    pub marginals: Vec<Distribution>,
    pub entropy_spec: EntropySpec,
    pub entropy: EntropyFunctional,
    pub enum_options: EnumOptions,
    pub tie_tol: f64,
}

pub fn parse_marginal(k: usize, literals: &[String]) -> Result<Distribution, CliError> {
    let weights = literals
        .iter()
        .enumerate()
        .map(|(i, s)| {
            rat_from_decimal(s).map_err(|e| {
                CliError::Validation(format!("marginal {} entry {}: {e}", k + 1, i + 1))
            })
        })
        .collect::<Result<Vec<Rational>, _>>()?;
    Distribution::new(weights).map_err(|e| CliError::Validation(format!("marginal {}: {e}", k + 1)))
}

impl ProblemFile {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Validation(format!("problem file: {e}")))
    }

    pub fn resolve(&self, o: &Overrides) -> Result<Problem, CliError> {
        if self.marginals.len() < 2 {
            return Err(CliError::Validation(format!(
                "need at least 2 marginals, got {}",
                self.marginals.len()
            )));
        }
        let marginals = self
            .marginals
            .iter()
            .enumerate()
            .map(|(k, m)| parse_marginal(k, m))
            .collect::<Result<Vec<_>, _>>()?;
        let mut spec = self.entropy.clone();
        if let Some(kind) = &o.entropy {
            spec.kind = kind.clone();
        }
        spec.alpha = o.alpha.or(spec.alpha);
        spec.base = o.base.or(spec.base);
        let entropy = spec.functional()?;
        let tie_tol = o.tie_tol.unwrap_or(self.options.tie_tol);
        if !(tie_tol.is_finite() && tie_tol >= 0.0) {
            return Err(CliError::Validation(format!(
                "tie tolerance must be nonnegative, got {tie_tol}"
            )));
        }
        let enum_options = EnumOptions {
            prefilter: self.options.prefilter && !o.no_prefilter,
            budget: o.budget.unwrap_or(self.options.budget),
            threads: o.threads.or(self.options.threads),
        };
        Ok(Problem {
            marginals,
            entropy_spec: spec,
            entropy,
            enum_options,
            tie_tol,
        })
    }
}
