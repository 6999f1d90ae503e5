//! Convergence study of the split source integration on one segment near an
//! observation point, against plain Gauss quadrature of the exact kernel.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point2, Segment};
use crate::quadrature::{
    gauss_legendre_any, hybrid_inner_integral, split_by_threshold, HalfBasis, Kernel, KernelParams, TestSample,
};
use crate::special::{green_and_obs_gradient, small_arg_green, small_arg_green_gradient, ExpansionConstants};

/// Geometry and sweep of the study. The source segment runs from
/// `(−half_length, 0)` to `(half_length, 0)`; the observation point sits
/// `distance` from the first endpoint, at angle `θ` between `r'_1 − r` and
/// `r'_1 − r'_2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub half_length: f64,
    pub distance: f64,
    pub k: f64,
    /// Angles as fractions of π.
    pub thetas: Vec<f64>,
    pub deltas: Vec<f64>,
    /// Convergence threshold on `|t_{n+1} − t_n| / |t_{n+1}|`.
    pub tolerance: f64,
    pub max_points: usize,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            half_length: 0.065,
            distance: 0.02,
            k: 1.0,
            thetas: vec![0.05, 0.1, 0.5, 1.0],
            deltas: vec![0.01, 0.02, 0.05, 0.1, 0.2, 0.5],
            tolerance: 1e-15,
            max_points: 400,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StudyKernel {
    L,
    K,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub theta_over_pi: f64,
    pub delta: f64,
    pub kernel: StudyKernel,
    /// Far-part Gauss points at convergence (0 when the disk covers the segment).
    pub hybrid_points: Option<usize>,
    /// Points plain Gauss needs on the whole segment.
    pub gauss_points: Option<usize>,
    pub hybrid_value: Complex64,
    pub reference: Complex64,
    /// `|hybrid − reference| / |reference|`.
    pub discrepancy: f64,
}

pub fn observation_point(cfg: &StudyConfig, theta_over_pi: f64) -> Point2 {
    let th = theta_over_pi * std::f64::consts::PI;
    Point2::new(-cfg.half_length + cfg.distance * th.cos(), cfg.distance * th.sin())
}

struct Converged {
    value: Complex64,
    points: Option<usize>,
}

/// Raises the order until two successive values agree to `tol`.
fn converge(max: usize, tol: f64, mut eval: impl FnMut(usize) -> Result<Complex64>) -> Result<Converged> {
    let mut prev = eval(1)?;
    for n in 1..max {
        let next = eval(n + 1)?;
        if (next - prev).norm() <= tol * next.norm() {
            return Ok(Converged { value: next, points: Some(n) });
        }
        prev = next;
    }
    Ok(Converged { value: prev, points: None })
}

fn sample() -> TestSample {
    TestSample { value: Point2::new(1.0, 1.0) * std::f64::consts::FRAC_1_SQRT_2, div: 1.0 }
}

pub fn integration_study(cfg: &StudyConfig) -> Result<Vec<StudyRow>> {
    if !(cfg.k > 0.0 && cfg.half_length > 0.0 && cfg.distance > 0.0) || cfg.max_points < 2 {
        return Err(Error::invalid("study needs positive k, length, distance and at least 2 points"));
    }
    let seg = Segment::new(Point2::new(-cfg.half_length, 0.0), Point2::new(cfg.half_length, 0.0))?;
    let test = sample();
    let mut rows = Vec::new();
    for &theta in &cfg.thetas {
        let r = observation_point(cfg, theta);
        for kernel in [StudyKernel::L, StudyKernel::K] {
            let kern = match kernel {
                StudyKernel::L => Kernel::L,
                StudyKernel::K => Kernel::K,
            };
            // a vanishing disk turns the split scheme into plain Gauss
            let plain = KernelParams { k: cfg.k, omega_mu: 1.0, consts: ExpansionConstants::with_delta(1e-30) };
            let reference = converge(cfg.max_points, cfg.tolerance, |n| {
                hybrid_inner_integral(r, &seg, HalfBasis::Rising, kern, &test, &plain, &gauss_legendre_any(n))
            })?;
            for &delta in &cfg.deltas {
                let params = KernelParams { k: cfg.k, omega_mu: 1.0, consts: ExpansionConstants::with_delta(delta) };
                let far_parts = split_by_threshold(r, &seg, cfg.k, delta).far.len();
                let hybrid = if far_parts == 0 {
                    let v = hybrid_inner_integral(r, &seg, HalfBasis::Rising, kern, &test, &params, &gauss_legendre_any(1))?;
                    Converged { value: v, points: Some(0) }
                } else {
                    let c = converge(cfg.max_points, cfg.tolerance, |n| {
                        hybrid_inner_integral(r, &seg, HalfBasis::Rising, kern, &test, &params, &gauss_legendre_any(n))
                    })?;
                    Converged { value: c.value, points: c.points.map(|n| n * far_parts) }
                };
                rows.push(StudyRow {
                    theta_over_pi: theta,
                    delta,
                    kernel,
                    hybrid_points: hybrid.points,
                    gauss_points: reference.points,
                    hybrid_value: hybrid.value,
                    reference: reference.value,
                    discrepancy: (hybrid.value - reference.value).norm() / reference.value.norm(),
                });
            }
        }
    }
    Ok(rows)
}

/// Relative error of the small-argument Green's function and its gradient
/// at `k·R = delta`, compared with the Hankel-function values.
pub fn expansion_error(delta: f64) -> Result<(f64, f64)> {
    let consts = ExpansionConstants::with_delta(delta);
    consts.validate()?;
    let k = 1.0;
    let (r, rp) = (Point2::new(delta, 0.0), Point2::ORIGIN);
    let (g, grad) = green_and_obs_gradient(k, r, rp)?;
    let g_small = small_arg_green(k, r, rp, &consts)?;
    // the small-argument gradient is taken with respect to the source point
    let s = small_arg_green_gradient(k, r, rp, &consts)?;
    let grad_small = [-s[0], -s[1]];
    let gn = (grad[0].norm_sqr() + grad[1].norm_sqr()).sqrt();
    let dn = ((grad[0] - grad_small[0]).norm_sqr() + (grad[1] - grad_small[1]).norm_sqr()).sqrt();
    Ok(((g - g_small).norm() / g.norm(), dn / gn))
}
