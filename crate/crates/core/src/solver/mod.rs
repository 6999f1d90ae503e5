//! System assembly, solution and post-processing for both formulations.

pub mod exterior;
pub mod fields;
pub mod metrics;
pub mod mie;
pub mod pmchwt;

use serde::{Deserialize, Serialize};

use crate::admittance::{ConditioningLog, Scatterer};
use crate::assembly::QuadratureSettings;
use crate::error::{Error, Result};
use crate::geometry::Boundary;
use crate::linalg::{diagonal_equilibrate, CMatrix, CVector, Factorized};
use crate::media::{Medium, PlaneWave};

pub use exterior::{assemble_exterior_system, solve_exterior, solve_ss_sie, ExteriorSystem};
pub use fields::{far_field_rcs, near_field, radiated_field};
pub use metrics::{relative_error, CostReport};
pub use mie::{mie_layered_rcs, LayeredCylinder};
pub use pmchwt::solve_pmchwt;

/// A scattering problem: scatterers in a homogeneous background under one plane wave.
#[derive(Debug, Clone)]
pub struct Problem {
    pub frequency: f64,
    pub background: Medium,
    pub wave: PlaneWave,
    pub scatterers: Vec<Scatterer>,
    pub quadrature: QuadratureSettings,
}

impl Problem {
    pub fn validate(&self) -> Result<()> {
        self.background.validate()?;
        self.wave.validate()?;
        self.quadrature.validate()?;
        if (self.wave.frequency - self.frequency).abs() > 1e-9 * self.frequency {
            return Err(Error::invalid(format!(
                "incident wave frequency {} differs from the problem frequency {}",
                self.wave.frequency, self.frequency
            )));
        }
        for (i, a) in self.scatterers.iter().enumerate() {
            for b in &self.scatterers[i + 1..] {
                let (oa, ob) = (a.outer(), b.outer());
                if oa.intersects(ob) || oa.contains(ob.nodes[0]) || ob.contains(oa.nodes[0]) {
                    return Err(Error::invalid(format!(
                        "scatterers with outer contours {} and {} overlap",
                        oa.id, ob.id
                    )));
                }
            }
        }
        Ok(())
    }

    /// Outer contours, which bound the region where fields may be evaluated.
    pub fn outer_boundaries(&self) -> Vec<&Boundary> {
        self.scatterers.iter().map(|s| s.outer()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    SsSie,
    Pmchwt,
}

/// Equivalent currents on one contour radiating into the background.
///
/// `electric` holds rooftop coefficients of the tangential current and
/// `magnetic` (if any) the coefficients of `M_z` on the same triangle basis.
#[derive(Debug, Clone)]
pub struct Radiator {
    pub boundary: Boundary,
    pub electric: CVector,
    pub magnetic: Option<CVector>,
}

/// Wall-clock seconds per stage.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub admittance: f64,
    pub assembly: f64,
    pub solve: f64,
    pub total: f64,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub method: Method,
    pub frequency: f64,
    pub background: Medium,
    pub wave: PlaneWave,
    pub radiators: Vec<Radiator>,
    pub unknowns: usize,
    /// Bytes held by the dense matrices the method keeps alive.
    pub memory_bytes: usize,
    pub timings: Timings,
    pub conditioning: ConditioningLog,
    pub system_condition: SystemCondition,
    /// Distinct admittance recursions that were run (SS-SIE only).
    pub admittance_builds: usize,
}

/// 1-norm condition estimates of the final system before and after
/// diagonal equilibration.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SystemCondition {
    pub raw: f64,
    pub equilibrated: f64,
}

/// Solves `a x = b` through diagonal equilibration and estimates both
/// condition numbers. An empty system has the empty solution.
pub(crate) fn solve_system(a: &CMatrix, b: &CVector, label: &str) -> Result<(CVector, SystemCondition)> {
    if a.nrows() == 0 {
        return Ok((CVector::zeros(0), SystemCondition::default()));
    }
    let (x, equilibrated) = diagonal_equilibrate(a)?.solve_with_condition(b, label)?;
    let raw = Factorized::new(a.clone(), label)?.cond_estimate()?;
    Ok((x, SystemCondition { raw, equilibrated }))
}

/// Bistatic echo width sampled at `angles` (radians).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FarField {
    pub angles: Vec<f64>,
    /// Echo width in metres.
    pub rcs: Vec<f64>,
}

impl FarField {
    pub fn rcs_db(&self) -> Vec<f64> {
        self.rcs.iter().map(|s| 10.0 * s.log10()).collect()
    }
}

/// `n` angles evenly spaced over a full turn, starting at zero.
pub fn full_circle(n: usize) -> Vec<f64> {
    (0..n).map(|i| i as f64 * 2.0 * std::f64::consts::PI / n as f64).collect()
}

pub(crate) const COMPLEX_BYTES: usize = 16;

pub(crate) fn elapsed(t: std::time::Instant) -> f64 {
    t.elapsed().as_secs_f64()
}
