//! The four commands and their JSON outputs.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use mec_core::{
    classify, enumerate_extremes, has_circuit, kappa, marginals_of, min_entropy, peel_coupling,
    verify_local_optimal, Check, Coupling, Distribution, EnumError, ExtremePointSet, Kappa,
    Rational, SupportSet,
};

use crate::problem::{parse_marginal, EntropySpec, Problem};
use crate::CliError;

/// A coupling in sparse form: one-based support cells with exact and
/// floating values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseCoupling {
    pub support: Vec<Vec<usize>>,
    pub values: Vec<Rational>,
    #[serde(default, skip_deserializing)]
    pub floats: Vec<f64>,
}

impl SparseCoupling {
    pub fn of(c: &Coupling) -> Self {
        let cells = c.support_cells();
        let values: Vec<Rational> = cells.iter().map(|cell| c.value(cell).clone()).collect();
        SparseCoupling {
            support: cells
                .iter()
                .map(|cell| cell.iter().map(|x| x + 1).collect())
                .collect(),
            floats: values.iter().map(Rational::to_f64).collect(),
            values,
        }
    }

    /// Dense row-major values over `dims`.
    pub fn dense(&self, dims: &[usize]) -> Result<Vec<Rational>, CliError> {
        if self.support.len() != self.values.len() {
            return Err(CliError::Validation(format!(
                "{} support cells but {} values",
                self.support.len(),
                self.values.len()
            )));
        }
        let mut dense = vec![Rational::zero(); dims.iter().product()];
        for (cell, v) in self.support.iter().zip(&self.values) {
            let in_range = cell.len() == dims.len()
                && cell.iter().zip(dims).all(|(&c, &m)| (1..=m).contains(&c));
            if !in_range {
                return Err(CliError::Validation(format!(
                    "cell {cell:?} outside dims {dims:?}"
                )));
            }
            if v.is_negative() {
                return Err(CliError::Validation(format!(
                    "cell {cell:?} holds negative value {v}"
                )));
            }
            let index = cell
                .iter()
                .zip(dims)
                .fold(0, |acc, (&c, &m)| acc * m + c - 1);
            dense[index] = v.clone();
        }
        Ok(dense)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub enumerate_seconds: f64,
    pub minimize_seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub dims: Vec<usize>,
    pub marginals: Vec<Vec<Rational>>,
    pub entropy: EntropySpec,
    pub min_entropy: f64,
    pub minimizers: Vec<SparseCoupling>,
    pub extreme_point_count: usize,
    pub subsets_scanned: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<Timings>,
}

fn enumerate(problem: &Problem) -> Result<ExtremePointSet, CliError> {
    enumerate_extremes(&problem.marginals, problem.enum_options).map_err(|e| match e {
        EnumError::BudgetExceeded { .. } => CliError::Budget(e.to_string()),
        other => CliError::Validation(other.to_string()),
    })
}

fn weights(marginals: &[Distribution]) -> Vec<Vec<Rational>> {
    marginals.iter().map(|d| d.weights().to_vec()).collect()
}

/// The structure constant when it is defined and within budget.
fn kappa_of(marginals: &[Distribution]) -> Option<Kappa> {
    match marginals {
        [p, q] => kappa(p, q).ok(),
        _ => None,
    }
}

/// Enumerates, minimizes, and reports every minimizer.
pub fn solve(problem: &Problem, with_timings: bool) -> Result<SolveResult, CliError> {
    let start = Instant::now();
    let set = enumerate(problem)?;
    let enumerated = Instant::now();
    let report = min_entropy(&problem.entropy, &set, problem.tie_tol)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    let timings = Timings {
        enumerate_seconds: (enumerated - start).as_secs_f64(),
        minimize_seconds: enumerated.elapsed().as_secs_f64(),
    };
    Ok(SolveResult {
        dims: set.dims.clone(),
        marginals: weights(&problem.marginals),
        entropy: problem.entropy_spec.clone(),
        min_entropy: report.minimum,
        minimizers: report
            .minimizers
            .iter()
            .map(|&k| SparseCoupling::of(&set.points[k].coupling))
            .collect(),
        extreme_point_count: set.len(),
        subsets_scanned: set.counts.scanned,
        kappa: kappa_of(&problem.marginals).map(|k| k.value),
        timings: with_timings.then_some(timings),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanSummary {
    pub scanned: u64,
    pub prefiltered: u64,
    pub singular: u64,
    pub infeasible: u64,
    pub accepted: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ListedPoint {
    #[serde(flatten)]
    pub coupling: SparseCoupling,
    pub entropy: f64,
    pub witness_ranks: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtremesResult {
    pub dims: Vec<usize>,
    pub marginals: Vec<Vec<Rational>>,
    pub entropy: EntropySpec,
    pub extreme_point_count: usize,
    pub scan: ScanSummary,
    pub points: Vec<ListedPoint>,
}

/// Lists every extreme point with its entropy.
pub fn extremes(problem: &Problem) -> Result<ExtremesResult, CliError> {
    let set = enumerate(problem)?;
    let points = set
        .points
        .iter()
        .map(|p| {
            let entropy = problem
                .entropy
                .evaluate(&p.coupling)
                .map_err(|e| CliError::Validation(e.to_string()))?;
            Ok(ListedPoint {
                coupling: SparseCoupling::of(&p.coupling),
                entropy,
                witness_ranks: p.witness_ranks.clone(),
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let c = set.counts;
    Ok(ExtremesResult {
        dims: set.dims.clone(),
        marginals: weights(&problem.marginals),
        entropy: problem.entropy_spec.clone(),
        extreme_point_count: set.len(),
        scan: ScanSummary {
            scanned: c.scanned,
            prefiltered: c.prefiltered,
            singular: c.singular,
            infeasible: c.infeasible,
            accepted: c.accepted,
        },
        points,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KappaResult {
    pub kappa: usize,
    /// One-based: position `i` of the reordered `p` holds `p[sigma[i]]`.
    pub sigma: Vec<usize>,
    pub pi: Vec<usize>,
    pub common_prefix_sums: Vec<Rational>,
}

pub fn kappa_command(problem: &Problem) -> Result<KappaResult, CliError> {
    let [p, q] = &problem.marginals[..] else {
        return Err(CliError::Validation(format!(
            "the structure constant needs exactly 2 marginals, got {}",
            problem.marginals.len()
        )));
    };
    let k = kappa(p, q).map_err(|e| CliError::Validation(e.to_string()))?;
    Ok(KappaResult {
        kappa: k.value,
        sigma: k.sigma.iter().map(|i| i + 1).collect(),
        pi: k.pi.iter().map(|i| i + 1).collect(),
        common_prefix_sums: k.common_prefix_sums,
    })
}

/// A coupling to verify. Marginals are optional; when absent they are
/// derived from the values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingFile {
    pub dims: Vec<usize>,
    #[serde(default)]
    pub marginals: Option<Vec<Vec<String>>>,
    #[serde(flatten)]
    pub coupling: SparseCoupling,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Structure {
    pub forest: bool,
    pub tree: bool,
    pub complete: bool,
    pub components: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CouplingReport {
    pub passed: bool,
    pub support_size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub structure: Option<Structure>,
    pub checks: Vec<Check>,
    /// Checks that could not run, with the reason.
    pub skipped: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyResult {
    pub passed: bool,
    pub couplings: Vec<CouplingReport>,
}

fn check(name: &'static str, failure: Option<String>) -> Check {
    Check {
        name,
        passed: failure.is_none(),
        witness: failure,
    }
}

/// The first marginal whose exact sums differ from `expected`.
fn marginal_failure(actual: &[Vec<Rational>], expected: &[Distribution]) -> Option<String> {
    for (axis, (a, e)) in actual.iter().zip(expected).enumerate() {
        for (coordinate, (x, y)) in a.iter().zip(e.weights()).enumerate() {
            if x != y {
                return Some(format!(
                    "axis {} coordinate {}: expected {y}, actual {x}, deficit {}",
                    axis + 1,
                    coordinate + 1,
                    y - x
                ));
            }
        }
    }
    None
}

/// Extends a forest support to a spanning tree by adding cells in
/// row-major order whenever the set stays circuit-free.
fn spanning_extension(support: &SupportSet) -> Option<SupportSet> {
    let dims = support.dims().to_vec();
    let target = dims.iter().sum::<usize>() + 1 - dims.len();
    let mut cells: Vec<Vec<usize>> = support.cells().cloned().collect();
    let total: usize = dims.iter().product();
    for index in 0..total {
        if cells.len() == target {
            break;
        }
        let mut cell = vec![0; dims.len()];
        let mut rest = index;
        for t in (0..dims.len()).rev() {
            cell[t] = rest % dims[t];
            rest /= dims[t];
        }
        if support.contains(&cell) {
            continue;
        }
        cells.push(cell);
        let trial = SupportSet::new(dims.clone(), cells.clone()).ok()?;
        if has_circuit(&trial) {
            cells.pop();
        }
    }
    let tree = SupportSet::new(dims, cells).ok()?;
    classify(&tree).is_tree.then_some(tree)
}

fn verify_one(
    dims: &[usize],
    given: Option<&[Distribution]>,
    sparse: &SparseCoupling,
) -> Result<CouplingReport, CliError> {
    let dense = sparse.dense(dims)?;
    let sums = marginals_of(&dense, dims).map_err(|e| CliError::Validation(e.to_string()))?;
    let support_size = dense.iter().filter(|v| v.is_positive()).count();
    let mut report = CouplingReport {
        passed: false,
        support_size,
        kappa: None,
        structure: None,
        checks: vec![],
        skipped: vec![],
    };
    let marginals = match given {
        Some(given) => {
            let failure = marginal_failure(&sums, given);
            let ok = failure.is_none();
            report.checks.push(check("marginals", failure));
            if !ok {
                report
                    .skipped
                    .push("structural checks need matching marginals".to_string());
                return Ok(report);
            }
            given.to_vec()
        }
        None => {
            let derived: Result<Vec<Distribution>, String> = sums
                .iter()
                .enumerate()
                .map(|(t, s)| {
                    Distribution::new(s.clone()).map_err(|e| format!("axis {}: {e}", t + 1))
                })
                .collect();
            match derived {
                Ok(d) => {
                    report.checks.push(check("marginals", None));
                    d
                }
                Err(e) => {
                    report.checks.push(check("marginals", Some(e)));
                    report
                        .skipped
                        .push("structural checks need valid marginals".to_string());
                    return Ok(report);
                }
            }
        }
    };
    let coupling =
        Coupling::new(dense, marginals.clone()).map_err(|e| CliError::Validation(e.to_string()))?;
    let support = SupportSet::of(&coupling);
    let class = classify(&support);
    report.structure = Some(Structure {
        forest: class.is_forest,
        tree: class.is_tree,
        complete: class.is_complete,
        components: class.component_count,
    });
    if let [p, q] = &marginals[..] {
        match kappa(p, q) {
            Ok(k) => {
                report.kappa = Some(k.value);
                let local = verify_local_optimal(&coupling, k.value)
                    .map_err(|e| CliError::Validation(e.to_string()))?;
                report.checks.extend(local.checks);
            }
            Err(e) => {
                report.skipped.push(format!("local optimality: {e}"));
                report.checks.push(check(
                    "complete-forest",
                    (!(class.is_forest && class.is_complete))
                        .then(|| "support is not a complete forest".to_string()),
                ));
            }
        }
    } else {
        report.checks.push(check(
            "complete-forest",
            (!(class.is_forest && class.is_complete))
                .then(|| "support is not a complete peelable set".to_string()),
        ));
        let bound = dims.iter().sum::<usize>() + 1 - dims.len();
        report.checks.push(check(
            "support-size",
            (support_size > bound).then(|| format!("|V| = {support_size} exceeds {bound}")),
        ));
        report
            .skipped
            .push("dichotomy checks apply to two marginals only".to_string());
    }
    if class.is_forest {
        match spanning_extension(&support) {
            Some(tree) => {
                let failure = match peel_coupling(&tree, &marginals) {
                    Ok(peeled) if peeled == coupling => None,
                    Ok(_) => Some(
                        "peeling the spanning extension gives a different coupling".to_string(),
                    ),
                    Err(e) => Some(format!("peeling the spanning extension failed: {e}")),
                };
                report.checks.push(check("peel-cross-check", failure));
            }
            None => report
                .skipped
                .push("peel cross-check: no spanning extension found".to_string()),
        }
    } else {
        report.checks.push(check(
            "peel-cross-check",
            Some("support has a circuit".to_string()),
        ));
    }
    report.passed = report.checks.iter().all(|c| c.passed);
    Ok(report)
}

/// Verifies a coupling file, or every minimizer in a solve result.
pub fn verify(text: &str) -> Result<VerifyResult, CliError> {
    let value: serde_json::Value = serde_json::from_str(text)
        .map_err(|e| CliError::Validation(format!("coupling file: {e}")))?;
    let bad = |e: serde_json::Error| CliError::Validation(format!("coupling file: {e}"));
    let couplings = if value.get("minimizers").is_some() {
        let result: SolveResult = serde_json::from_value(value).map_err(bad)?;
        let marginals = result
            .marginals
            .iter()
            .map(|w| Distribution::new(w.clone()).map_err(|e| CliError::Validation(e.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        result
            .minimizers
            .iter()
            .map(|m| verify_one(&result.dims, Some(&marginals), m))
            .collect::<Result<Vec<_>, _>>()?
    } else {
        let file: CouplingFile = serde_json::from_value(value).map_err(bad)?;
        if file.dims.len() < 2 || file.dims.iter().any(|&m| m < 2) {
            return Err(CliError::Validation(format!(
                "dims {:?} need at least two axes of length >= 2",
                file.dims
            )));
        }
        let marginals = file
            .marginals
            .as_ref()
            .map(|ms| {
                ms.iter()
                    .enumerate()
                    .map(|(k, m)| parse_marginal(k, m))
                    .collect::<Result<Vec<_>, _>>()
            })
            .transpose()?;
        if let Some(ms) = &marginals {
            let lens: Vec<usize> = ms.iter().map(Distribution::len).collect();
            if lens != file.dims {
                return Err(CliError::Validation(format!(
                    "marginal lengths {lens:?} do not match dims {:?}",
                    file.dims
                )));
            }
        }
        vec![verify_one(
            &file.dims,
            marginals.as_deref(),
            &file.coupling,
        )?]
    };
    Ok(VerifyResult {
        passed: couplings.iter().all(|c| c.passed),
        couplings,
    })
}
