//! Error norms and cost accounting.

use serde::{Deserialize, Serialize};

use super::{pmchwt::pmchwt_unknowns, Method, Problem, Solution, Timings, COMPLEX_BYTES};
use crate::admittance::ConditionEntry;
use crate::error::{Error, Result};

/// `Σ|cal − ref|² / Σ|ref|²` over paired samples.
pub fn relative_error(cal: &[f64], reference: &[f64]) -> Result<f64> {
    if cal.len() != reference.len() || cal.is_empty() {
        return Err(Error::invalid(format!(
            "relative error needs equal non-empty samples ({} vs {})",
            cal.len(),
            reference.len()
        )));
    }
    let num: f64 = cal.iter().zip(reference).map(|(a, b)| (a - b) * (a - b)).sum();
    let den: f64 = reference.iter().map(|b| b * b).sum();
    if !(den > 0.0) {
        return Err(Error::invalid("reference samples are all zero"));
    }
    Ok(num / den)
}

/// What a solve cost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub method: Method,
    pub unknowns: usize,
    pub memory_bytes: usize,
    pub timings: Timings,
    pub conditioning: Vec<ConditionEntry>,
    pub admittance_builds: usize,
}

impl CostReport {
    pub fn of(solution: &Solution) -> Self {
        CostReport {
            method: solution.method,
            unknowns: solution.unknowns,
            memory_bytes: solution.memory_bytes,
            timings: solution.timings,
            conditioning: solution.conditioning.clone(),
            admittance_builds: solution.admittance_builds,
        }
    }

    pub fn worst_condition(&self) -> f64 {
        self.conditioning.iter().map(|c| c.cond).fold(0.0, f64::max)
    }
}

/// Upper bound on dense storage a solve will hold at its peak.
pub fn estimate_memory(problem: &Problem, method: Method) -> usize {
    match method {
        Method::SsSie => {
            let n: usize = problem.scatterers.iter().map(|s| s.outer_unknowns()).sum();
            // the largest recursion keeps a handful of layer-sized blocks alive
            let layer = problem
                .scatterers
                .iter()
                .flat_map(|s| s.boundaries.iter().map(|b| b.len()))
                .max()
                .unwrap_or(0);
            (n * n * 2 + 8 * layer * layer) * COMPLEX_BYTES
        }
        Method::Pmchwt => {
            let n = pmchwt_unknowns(problem);
            2 * n * n * COMPLEX_BYTES
        }
    }
}

/// Fails with a resource error when the estimate exceeds `limit_bytes`.
pub fn check_resources(problem: &Problem, method: Method, limit_bytes: usize) -> Result<()> {
    let need = estimate_memory(problem, method);
    if need > limit_bytes {
        return Err(Error::Resources(format!(
            "{method:?} needs about {need} bytes ({:.3e} GB) of dense storage, limit is {limit_bytes} bytes",
            need as f64 / 1e9
        )));
    }
    Ok(())
}
