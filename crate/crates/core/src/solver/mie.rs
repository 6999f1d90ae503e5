//! Cylindrical-harmonic series for concentric circular layers under TE
//! incidence (`H_z` is the scalar unknown).
//!
//! In each layer `H_z = Σ (a_n J_n(kρ) + b_n Y_n(kρ)) e^{jnφ}`; across a
//! circle `H_z` and `(1/ε) ∂_ρ H_z` are continuous. A perfect conductor forces
//! `∂_ρ H_z = 0`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::FarField;
use crate::error::{Error, Result};
use crate::media::Medium;
use crate::special::bessel_j0y0j1y1;

/// Concentric circles (innermost first) and the medium inside each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayeredCylinder {
    pub radii: Vec<f64>,
    /// `media[i]` fills `radii[i-1] < ρ < radii[i]`; ignored for a PEC core.
    pub media: Vec<Medium>,
    pub pec_core: bool,
    pub background: Medium,
}

impl LayeredCylinder {
    pub fn validate(&self) -> Result<()> {
        if self.radii.is_empty() || self.radii.len() != self.media.len() {
            return Err(Error::invalid("layered cylinder needs one medium per radius"));
        }
        if self.radii.windows(2).any(|w| !(w[0] < w[1])) || !(self.radii[0] > 0.0) {
            return Err(Error::invalid("radii must be positive and strictly increasing"));
        }
        for (i, m) in self.media.iter().enumerate() {
            if !(self.pec_core && i == 0) {
                m.validate()?;
            }
        }
        self.background.validate()
    }
}

/// `J_n(x)` and `Y_n(x)` for `n = 0..=order`.
pub fn bessel_orders(order: usize, x: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let b = bessel_j0y0j1y1(x)?;
    let mut y = vec![0.0; order + 1];
    y[0] = b.y0;
    if order >= 1 {
        y[1] = b.y1;
    }
    for n in 1..order {
        y[n + 1] = 2.0 * n as f64 / x * y[n] - y[n - 1];
    }
    // Miller backward recurrence, anchored to the directly computed J0/J1
    let top = {
        let m = (order as f64).max(x);
        (m + 20.0 + (40.0 * m).sqrt()) as usize + 2
    };
    let mut j = vec![0.0; top + 2];
    j[top] = 1e-300_f64.sqrt();
    for n in (1..=top).rev() {
        j[n - 1] = 2.0 * n as f64 / x * j[n] - j[n + 1];
        if j[n - 1].abs() > 1e200 {
            for v in &mut j[n - 1..] {
                *v *= 1e-200;
            }
        }
    }
    let scale = if b.j0.abs() >= b.j1.abs() { b.j0 / j[0] } else { b.j1 / j[1] };
    j.truncate(order + 1);
    for v in &mut j {
        *v *= scale;
    }
    j[0] = b.j0;
    if order >= 1 {
        j[1] = b.j1;
    }
    Ok((j, y))
}

/// Value and derivative of `J_n`, `Y_n` at one argument for `n = 0..=order`.
struct Cylindrical {
    j: Vec<f64>,
    dj: Vec<f64>,
    y: Vec<f64>,
    dy: Vec<f64>,
}

fn cylindrical(order: usize, x: f64) -> Result<Cylindrical> {
    let (j, y) = bessel_orders(order + 1, x)?;
    // Z_n' = −Z_{n+1} + (n/x) Z_n
    let deriv = |z: &[f64]| -> Vec<f64> {
        (0..=order).map(|n| n as f64 / x * z[n] - z[n + 1]).collect()
    };
    Ok(Cylindrical {
        dj: deriv(&j),
        dy: deriv(&y),
        j: j[..=order].to_vec(),
        y: y[..=order].to_vec(),
    })
}

/// Scattering coefficients `b_n`, `n = 0..=order` (and `b_{−n} = b_n`).
pub fn scattering_coefficients(cyl: &LayeredCylinder, frequency: f64, order: usize) -> Result<Vec<Complex64>> {
    cyl.validate()?;
    let p = cyl.radii.len();
    // (P, Q) = (H_z, (1/ε_r) ∂_ρ H_z) at the current radius, per order
    let mut state: Vec<(f64, f64)> = if cyl.pec_core {
        vec![(1.0, 0.0); order + 1]
    } else {
        let m = cyl.media[0];
        let k = m.wavenumber(frequency);
        let c = cylindrical(order, k * cyl.radii[0])?;
        (0..=order).map(|n| (c.j[n], k / m.eps_r * c.dj[n])).collect()
    };
    for i in 1..p {
        let m = cyl.media[i];
        let k = m.wavenumber(frequency);
        let g = k / m.eps_r;
        let x1 = k * cyl.radii[i - 1];
        let a = cylindrical(order, x1)?;
        let b = cylindrical(order, k * cyl.radii[i])?;
        let det = g * 2.0 / (std::f64::consts::PI * x1);
        for (n, s) in state.iter_mut().enumerate() {
            let (pv, qv) = *s;
            let ca = (pv * g * a.dy[n] - a.y[n] * qv) / det;
            let cb = (a.j[n] * qv - g * a.dj[n] * pv) / det;
            let np = ca * b.j[n] + cb * b.y[n];
            let nq = g * (ca * b.dj[n] + cb * b.dy[n]);
            let norm = np.abs().max(nq.abs());
            *s = if norm > 0.0 && norm.is_finite() { (np / norm, nq / norm) } else { (np, nq) };
        }
    }
    let bg = cyl.background;
    let k0 = bg.wavenumber(frequency);
    let g0 = k0 / bg.eps_r;
    let c = cylindrical(order, k0 * cyl.radii[p - 1])?;
    Ok(state
        .iter()
        .enumerate()
        .map(|(n, &(pv, qv))| {
            let h = Complex64::new(c.j[n], -c.y[n]);
            let dh = Complex64::new(c.dj[n], -c.dy[n]);
            let num = g0 * c.dj[n] * pv - qv * c.j[n];
            let den = dh * (g0 * pv) - h * qv;
            let b = -num / den;
            if b.is_finite() {
                b
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect())
}

fn echo_width(b: &[Complex64], k0: f64, incidence_angle: f64, angles: &[f64]) -> Vec<f64> {
    angles
        .iter()
        .map(|&phi| {
            let d = phi - incidence_angle;
            let mut sum = b[0];
            for (n, bn) in b.iter().enumerate().skip(1) {
                sum += bn * (2.0 * (n as f64 * d).cos());
            }
            4.0 / k0 * sum.norm_sqr()
        })
        .collect()
}

/// Bistatic echo width; `incidence_angle` is the direction of travel of the
/// incident wave. The series is extended in steps of 5 orders until the
/// echo width changes by less than `1e-10` relative.
pub fn mie_layered_rcs(
    cyl: &LayeredCylinder,
    frequency: f64,
    incidence_angle: f64,
    angles: &[f64],
) -> Result<FarField> {
    cyl.validate()?;
    let k0 = cyl.background.wavenumber(frequency);
    let size = k0 * cyl.radii.last().copied().unwrap_or(0.0);
    let mut order = (size.ceil() as usize) + 5;
    let cap = order + 200;
    let mut prev = echo_width(&scattering_coefficients(cyl, frequency, order)?, k0, incidence_angle, angles);
    loop {
        let next_order = order + 5;
        let next = echo_width(&scattering_coefficients(cyl, frequency, next_order)?, k0, incidence_angle, angles);
        let peak = next.iter().copied().fold(0.0, f64::max);
        let change = prev.iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        order = next_order;
        prev = next;
        if change <= 1e-10 * peak || peak < 1e-280 || order >= cap {
            break;
        }
    }
    Ok(FarField { angles: angles.to_vec(), rcs: prev })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::bessel_envelope;
    use std::f64::consts::PI;

    const F: f64 = 300e6;

    fn angles() -> Vec<f64> {
        (0..72).map(|i| i as f64 * 2.0 * PI / 72.0).collect()
    }

    #[test]
    fn integer_orders_satisfy_wronskian() {
        for x in [0.3, 3.0, 17.6, 40.0] {
            let (j, y) = bessel_orders(30, x).unwrap();
            for n in 0..30 {
                // J_{n+1} Y_n − J_n Y_{n+1} = 2/(πx)
                let w = j[n + 1] * y[n] - j[n] * y[n + 1];
                let want = 2.0 / (PI * x);
                assert!(((w - want) / want).abs() < 1e-9, "x={x} n={n}");
            }
        }
        // J_5(10) = −0.23406152818679364
        let (j, _) = bessel_orders(5, 10.0).unwrap();
        assert!((j[5] + 0.23406152818679364).abs() < 1e-14 * bessel_envelope(10.0) * 10.0);
    }

    #[test]
    fn zero_contrast_scatters_nothing() {
        let cyl = LayeredCylinder {
            radii: vec![0.2, 0.5],
            media: vec![Medium::VACUUM, Medium::VACUUM],
            pec_core: false,
            background: Medium::VACUUM,
        };
        let f = mie_layered_rcs(&cyl, F, 0.0, &angles()).unwrap();
        assert!(f.rcs.iter().all(|&s| s <= 1e-12));
    }

    #[test]
    fn identical_layers_equal_single_layer() {
        let m = Medium::new(4.0, 1.0).unwrap();
        let one = LayeredCylinder { radii: vec![0.5], media: vec![m], pec_core: false, background: Medium::VACUUM };
        let two = LayeredCylinder { radii: vec![0.3, 0.5], media: vec![m, m], pec_core: false, background: Medium::VACUUM };
        let a = mie_layered_rcs(&one, F, 0.0, &angles()).unwrap();
        let b = mie_layered_rcs(&two, F, 0.0, &angles()).unwrap();
        let peak = a.rcs.iter().copied().fold(0.0, f64::max);
        for (x, y) in a.rcs.iter().zip(&b.rcs) {
            assert!((x - y).abs() <= 1e-10 * peak);
        }
    }

    #[test]
    fn lossless_coefficients_conserve_energy() {
        let cyl = LayeredCylinder {
            radii: vec![0.25, 0.4, 0.5],
            media: vec![Medium::new(25.0, 1.0).unwrap(), Medium::new(16.0, 1.0).unwrap(), Medium::new(9.0, 1.0).unwrap()],
            pec_core: false,
            background: Medium::VACUUM,
        };
        for b in scattering_coefficients(&cyl, F, 40).unwrap() {
            assert!(((b * 2.0 + 1.0).norm() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn pec_core_matches_closed_form() {
        let cyl = LayeredCylinder {
            radii: vec![0.5],
            media: vec![Medium::VACUUM],
            pec_core: true,
            background: Medium::VACUUM,
        };
        let k = Medium::VACUUM.wavenumber(F);
        let b = scattering_coefficients(&cyl, F, 20).unwrap();
        let c = cylindrical(20, k * 0.5).unwrap();
        for n in 0..=20 {
            let want = -c.dj[n] / Complex64::new(c.dj[n], -c.dy[n]);
            assert!((b[n] - want).norm() < 1e-12);
        }
        // a vacuum layer around the conductor changes nothing
        let coated = LayeredCylinder {
            radii: vec![0.5, 0.7],
            media: vec![Medium::VACUUM, Medium::VACUUM],
            pec_core: true,
            background: Medium::VACUUM,
        };
        let a = mie_layered_rcs(&cyl, F, 0.0, &angles()).unwrap();
        let e = mie_layered_rcs(&coated, F, 0.0, &angles()).unwrap();
        let peak = a.rcs.iter().copied().fold(0.0, f64::max);
        for (x, y) in a.rcs.iter().zip(&e.rcs) {
            assert!((x - y).abs() <= 1e-9 * peak);
        }
    }

    #[test]
    fn truncation_is_stable() {
        let cyl = LayeredCylinder { radii: vec![0.5], media: vec![Medium::VACUUM], pec_core: true, background: Medium::VACUUM };
        let k0 = Medium::VACUUM.wavenumber(F);
        let a = echo_width(&scattering_coefficients(&cyl, F, 20).unwrap(), k0, 0.0, &angles());
        let b = echo_width(&scattering_coefficients(&cyl, F, 40).unwrap(), k0, 0.0, &angles());
        let peak = b.iter().copied().fold(0.0, f64::max);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-10 * peak);
        }
    }

    #[test]
    fn non_increasing_radii_rejected() {
        let cyl = LayeredCylinder {
            radii: vec![0.5, 0.4],
            media: vec![Medium::VACUUM, Medium::VACUUM],
            pec_core: false,
            background: Medium::VACUUM,
        };
        assert!(mie_layered_rcs(&cyl, F, 0.0, &[0.0]).is_err());
    }
}
