//! Fields radiated by equivalent currents into the background.
//!
//! `E = −jωμ [∫G J + (1/k²) ∫∇G ∇'·J] + ∫(−∂_y G, ∂_x G) M_z`, with `∇`
//! acting on the observation point.

use num_complex::Complex64;
use rayon::prelude::*;

use super::{FarField, Radiator, Solution};
use crate::assembly::QuadratureSettings;
use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::quadrature::{gauss_legendre, segment_moments, HalfBasis, KernelParams, QuadratureRule};

const HALVES: [HalfBasis; 2] = [HalfBasis::Falling, HalfBasis::Rising];

/// Scattered `E` at `r` from a set of radiators.
pub fn radiated_field(
    radiators: &[Radiator],
    params: &KernelParams,
    r: Point2,
    rule: &QuadratureRule,
) -> Result<[Complex64; 2]> {
    let mut a = [Complex64::new(0.0, 0.0); 2];
    let mut grad_div = [Complex64::new(0.0, 0.0); 2];
    let mut curl = [Complex64::new(0.0, 0.0); 2];
    for rad in radiators {
        let n = rad.boundary.len();
        for (j, seg) in rad.boundary.segments.iter().enumerate() {
            let m = segment_moments(r, seg, params, rule, true)?.moments;
            let cols = [j, (j + 1) % n];
            let mut div = Complex64::new(0.0, 0.0);
            for (half, &c) in HALVES.iter().zip(&cols) {
                let (lam_g, lam_v) = m.weighted(*half, seg.length);
                let coef = rad.electric[c];
                a[0] += lam_g * coef * seg.tangent.x;
                a[1] += lam_g * coef * seg.tangent.y;
                div += coef * half.divergence(seg.length);
                if let Some(mag) = &rad.magnetic {
                    curl[0] += lam_v[0] * mag[c];
                    curl[1] += lam_v[1] * mag[c];
                }
            }
            grad_div[0] += m.v0[0] * div;
            grad_div[1] += m.v0[1] * div;
        }
    }
    let k2 = params.k * params.k;
    let mj = Complex64::new(0.0, -params.omega_mu);
    Ok([
        mj * (a[0] + grad_div[0] / k2) - curl[1],
        mj * (a[1] + grad_div[1] / k2) + curl[0],
    ])
}

/// Electric field at points outside every scatterer; with `total` the
/// incident field is added.
pub fn near_field(
    solution: &Solution,
    points: &[Point2],
    quad: &QuadratureSettings,
    total: bool,
) -> Result<Vec<[Complex64; 2]>> {
    for p in points {
        if !p.is_finite() {
            return Err(Error::invalid("non-finite field point"));
        }
        for rad in &solution.radiators {
            if rad.boundary.contains(*p) || rad.boundary.distance_to(*p) < 1e-9 * rad.boundary.perimeter() {
                return Err(Error::Domain(format!(
                    "field point ({}, {}) is inside or on contour {}; the equivalent currents only represent the exterior field",
                    p.x, p.y, rad.boundary.id
                )));
            }
        }
    }
    let params = solution.background.kernel(solution.frequency, quad.constants());
    let rule = gauss_legendre(quad.inner_points)?;
    points
        .par_iter()
        .map(|&p| {
            let mut e = radiated_field(&solution.radiators, &params, p, &rule)?;
            if total {
                let inc = solution.wave.e_field(params.k, p);
                e[0] += inc[0];
                e[1] += inc[1];
            }
            Ok(e)
        })
        .collect()
}

/// Bistatic echo width `2πρ|E_s|²/|E_0|²` as `ρ → ∞`, at angles in radians.
pub fn far_field_rcs(solution: &Solution, angles: &[f64], quad: &QuadratureSettings) -> Result<FarField> {
    let bg = solution.background;
    let k = bg.wavenumber(solution.frequency);
    let eta = bg.impedance();
    let omega_eps = bg.omega_eps(solution.frequency);
    let amp = solution.wave.amplitude;
    if amp == 0.0 {
        return Err(Error::invalid("echo width is undefined for zero incident amplitude"));
    }
    let rule = gauss_legendre(quad.outer_points.max(4))?;
    let rcs = angles
        .par_iter()
        .map(|&phi| {
            let dir = Point2::new(phi.cos(), phi.sin());
            let mut f = Complex64::new(0.0, 0.0);
            for rad in &solution.radiators {
                let n = rad.boundary.len();
                for (j, seg) in rad.boundary.segments.iter().enumerate() {
                    let cross = dir.cross(seg.tangent);
                    let (c0, c1) = (j, (j + 1) % n);
                    for (s, w) in rule.mapped(0.0, seg.length) {
                        let t = s / seg.length;
                        let phase = Complex64::from_polar(w, k * dir.dot(seg.point_at(s)));
                        let jt = rad.electric[c0] * (1.0 - t) + rad.electric[c1] * t;
                        let mut term = jt * Complex64::new(0.0, -k * cross);
                        if let Some(m) = &rad.magnetic {
                            term += (m[c0] * (1.0 - t) + m[c1] * t) * Complex64::new(0.0, -omega_eps);
                        }
                        f += term * phase;
                    }
                }
            }
            eta * eta * f.norm_sqr() / (4.0 * k * amp * amp)
        })
        .collect();
    Ok(FarField { angles: angles.to_vec(), rcs })
}
