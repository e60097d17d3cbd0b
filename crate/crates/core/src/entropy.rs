//! Entropy functionals evaluated on exact couplings, and minimizer selection.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::enumerate::ExtremePointSet;
use crate::model::Coupling;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EntropyError {
    #[error("AlphaIsOne: the order must differ from 1")]
    AlphaIsOne,
    #[error("InvalidParameter: {0}")]
    InvalidParameter(String),
    #[error("NonFiniteResult: evaluation produced {0}")]
    NonFiniteResult(f64),
    #[error("EmptySet: no extreme points to minimize over")]
    EmptySet,
}

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A user-supplied pair `H(P) = phi(sum h(p_ij))`.
#[derive(Clone)]
pub struct PhiH {
    pub phi: RealFn,
    pub h: RealFn,
}

impl fmt::Debug for PhiH {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("PhiH")
    }
}

#[derive(Clone, Debug)]
pub enum EntropyFunctional {
    Shannon {
        base: f64,
    },
    Renyi {
        alpha: f64,
        base: f64,
    },
    /// Tsallis entropy carries no logarithm, hence no base.
    Tsallis {
        alpha: f64,
    },
    PhiH(PhiH),
}

fn check_base(base: f64) -> Result<(), EntropyError> {
    if base.is_finite() && base > 1.0 {
        Ok(())
    } else {
        Err(EntropyError::InvalidParameter(format!(
            "base must exceed 1, got {base}"
        )))
    }
}

fn check_alpha(alpha: f64) -> Result<(), EntropyError> {
    if alpha == 1.0 {
        return Err(EntropyError::AlphaIsOne);
    }
    if alpha.is_finite() && alpha >= 0.0 {
        Ok(())
    } else {
        Err(EntropyError::InvalidParameter(format!(
            "order must be a finite nonnegative number, got {alpha}"
        )))
    }
}

impl EntropyFunctional {
    /// Shannon entropy in bits.
    pub fn shannon() -> Self {
        EntropyFunctional::Shannon { base: 2.0 }
    }

    pub fn shannon_base(base: f64) -> Result<Self, EntropyError> {
        check_base(base)?;
        Ok(EntropyFunctional::Shannon { base })
    }

    pub fn renyi(alpha: f64, base: f64) -> Result<Self, EntropyError> {
        check_alpha(alpha)?;
        check_base(base)?;
        Ok(EntropyFunctional::Renyi { alpha, base })
    }

    pub fn tsallis(alpha: f64) -> Result<Self, EntropyError> {
        check_alpha(alpha)?;
        Ok(EntropyFunctional::Tsallis { alpha })
    }

    /// Wraps a user pair after sampling its monotonicity conditions; the
    /// returned messages describe any sampled violation.
    pub fn phi_h(
        phi: impl Fn(f64) -> f64 + Send + Sync + 'static,
        h: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> (Self, Vec<String>) {
        let pair = PhiH {
            phi: Arc::new(phi),
            h: Arc::new(h),
        };
        let warnings = spot_check(&pair);
        for w in &warnings {
            log::warn!("{w}");
        }
        (EntropyFunctional::PhiH(pair), warnings)
    }

    /// Evaluates on a flat list of probabilities.
    pub fn evaluate_values(&self, values: &[f64]) -> Result<f64, EntropyError> {
        let positive = values.iter().copied().filter(|&v| v > 0.0);
        let result = match self {
            EntropyFunctional::Shannon { base } => {
                -positive.map(|v| v * v.ln()).sum::<f64>() / base.ln()
            }
            EntropyFunctional::Renyi { alpha, base } => {
                positive.map(|v| v.powf(*alpha)).sum::<f64>().ln() / (1.0 - alpha) / base.ln()
            }
            EntropyFunctional::Tsallis { alpha } => {
                (positive.map(|v| v.powf(*alpha)).sum::<f64>() - 1.0) / (1.0 - alpha)
            }
            EntropyFunctional::PhiH(pair) => (pair.phi)(values.iter().map(|&v| (pair.h)(v)).sum()),
        };
        if result.is_finite() {
            // Sums of -v ln v can land a hair below zero for point masses.
            Ok(if result == 0.0 { 0.0 } else { result })
        } else {
            Err(EntropyError::NonFiniteResult(result))
        }
    }

    pub fn evaluate(&self, p: &Coupling) -> Result<f64, EntropyError> {
        self.evaluate_values(&p.to_f64())
    }
}

const SAMPLES: usize = 1000;

/// Samples the three monotonicity conditions at `SAMPLES` points each.
fn spot_check(pair: &PhiH) -> Vec<String> {
    let mut warnings = Vec::new();
    let h_c = |c: f64, x: f64| (pair.h)(x) + (pair.h)(c - x);

    // Phi on the values it is actually applied to: sums of h over uniform vectors.
    let mut args: Vec<f64> = (1..=SAMPLES)
        .map(|k| k as f64 * (pair.h)(1.0 / k as f64))
        .collect();
    args.sort_by(f64::total_cmp);
    args.dedup();
    let phis: Vec<f64> = args.iter().map(|&s| (pair.phi)(s)).collect();
    let up = phis.windows(2).all(|w| w[1] > w[0]);
    let down = phis.windows(2).all(|w| w[1] < w[0]);
    if !(up || down) {
        warnings.push("phi is not strictly monotone on sampled arguments".to_string());
    }

    let steps = SAMPLES / 10;
    let mut monotone = true;
    let mut composed = true;
    for ci in 1..=10 {
        let c = ci as f64 / 10.0;
        let xs: Vec<f64> = (0..=steps)
            .map(|k| k as f64 * c / 2.0 / steps as f64)
            .collect();
        let hs: Vec<f64> = xs.iter().map(|&x| h_c(c, x)).collect();
        let up = hs.windows(2).all(|w| w[1] > w[0]);
        let down = hs.windows(2).all(|w| w[1] < w[0]);
        monotone &= up || down;
        composed &= hs.windows(2).all(|w| (pair.phi)(w[1]) > (pair.phi)(w[0]));
    }
    if !monotone {
        warnings.push("h_c is not strictly monotone on [0, c/2] at sampled points".to_string());
    }
    if !composed {
        warnings
            .push("phi(h_c) is not strictly increasing on [0, c/2] at sampled points".to_string());
    }
    warnings
}

/// Values of a functional over an extreme point set and its minimizers.
#[derive(Clone, Debug, PartialEq)]
pub struct MinimizationReport {
    pub minimum: f64,
    /// Indices into the set's points, in first-witness order.
    pub minimizers: Vec<usize>,
    /// One value per extreme point.
    pub values: Vec<f64>,
    /// Whether all minimizers share the same multiset of exact cell values.
    pub exact_profile_tie: bool,
}

/// Evaluates `f` on every extreme point and keeps those within `tie_tol` of
/// the least value.
pub fn min_entropy(
    f: &EntropyFunctional,
    set: &ExtremePointSet,
    tie_tol: f64,
) -> Result<MinimizationReport, EntropyError> {
    if set.is_empty() {
        return Err(EntropyError::EmptySet);
    }
    let values = set
        .points
        .par_iter()
        .map(|p| f.evaluate(&p.coupling))
        .collect::<Result<Vec<f64>, EntropyError>>()?;
    let minimum = values.iter().copied().fold(f64::INFINITY, f64::min);
    let minimizers: Vec<usize> = (0..values.len())
        .filter(|&k| values[k] <= minimum + tie_tol)
        .collect();
    let profile = |k: usize| {
        let mut v = set.points[k].coupling.values().to_vec();
        v.sort();
        v
    };
    let first = profile(minimizers[0]);
    let exact_profile_tie = minimizers.iter().all(|&k| profile(k) == first);
    Ok(MinimizationReport {
        minimum,
        minimizers,
        values,
        exact_profile_tie,
    })
}
