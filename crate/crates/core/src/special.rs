//! Bessel and Hankel functions of order 0 and 1, the 2D Helmholtz Green's
//! function and its small-argument form.
//!
//! Time convention `e^{+jωt}`; outgoing waves are `H^{(2)}`.

use std::f64::consts::{FRAC_2_PI, FRAC_PI_2, PI, SQRT_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point2;

pub const EULER_GAMMA: f64 = 0.5772156649015329;

/// Parameters of the logarithmic near-field kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpansionConstants {
    /// Switch to the expansion where `k·R < delta`.
    pub delta: f64,
    /// `exp(euler)`.
    pub gamma_exp: f64,
    pub euler: f64,
}

impl Default for ExpansionConstants {
    fn default() -> Self {
        Self::with_delta(0.1)
    }
}

impl ExpansionConstants {
    pub fn with_delta(delta: f64) -> Self {
        ExpansionConstants {
            delta,
            gamma_exp: EULER_GAMMA.exp(),
            euler: EULER_GAMMA,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0) || !self.delta.is_finite() {
            return Err(Error::invalid(format!("delta must be positive, got {}", self.delta)));
        }
        Ok(())
    }

    /// Constant part of the expanded Green's function: `G ≈ c0 − ln(R)/(2π)`.
    pub fn log_offset(&self, k: f64) -> Complex64 {
        Complex64::new(-(self.gamma_exp * k / 2.0).ln() / (2.0 * PI), -0.25)
    }
}

/// `J0, Y0, J1, Y1` at one argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bessel01 {
    pub j0: f64,
    pub y0: f64,
    pub j1: f64,
    pub y1: f64,
}

impl Bessel01 {
    pub fn h0(&self) -> Complex64 {
        Complex64::new(self.j0, -self.y0)
    }

    pub fn h1(&self) -> Complex64 {
        Complex64::new(self.j1, -self.y1)
    }
}

// Below this the ascending series converges without visible cancellation.
const SERIES_LIMIT: f64 = 2.0;
// Above this the asymptotic expansion reaches full double precision.
const ASYMPTOTIC_LIMIT: f64 = 25.0;

pub fn bessel_j0y0j1y1(x: f64) -> Result<Bessel01> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("Bessel argument must be positive and finite, got {x}")));
    }
    Ok(if x <= SERIES_LIMIT {
        ascending_series(x)
    } else if x <= ASYMPTOTIC_LIMIT {
        neumann_series(x)
    } else {
        hankel_asymptotic(x)
    })
}

fn ascending_series(x: f64) -> Bessel01 {
    let q = 0.25 * x * x;
    let half = 0.5 * x;
    // term_k = (-q)^k / (k!)^2, term1_k = (x/2)(-q)^k / (k!(k+1)!)
    let mut t0 = 1.0;
    let mut t1 = half;
    let (mut j0, mut j1) = (0.0, 0.0);
    let (mut s0, mut s1) = (0.0, 0.0);
    let mut harmonic = 0.0; // H_k
    for k in 0..60 {
        let kf = k as f64;
        let h_next = harmonic + 1.0 / (kf + 1.0);
        j0 += t0;
        j1 += t1;
        s0 += harmonic * t0;
        s1 += (harmonic + h_next) * t1;
        if t0.abs() < 1e-18 * j0.abs() && t1.abs() < 1e-18 * j1.abs() {
            break;
        }
        t0 *= -q / ((kf + 1.0) * (kf + 1.0));
        t1 *= -q / ((kf + 1.0) * (kf + 2.0));
        harmonic = h_next;
    }
    let lg = (half).ln() + EULER_GAMMA;
    // Y0 = (2/π)[(ln(x/2)+γ)J0 − Σ (−q)^k H_k/(k!)²]
    let y0 = FRAC_2_PI * (lg * j0 - s0);
    let y1 = FRAC_2_PI * lg * j1 - FRAC_2_PI / x - s1 / PI;
    Bessel01 { j0, y0, j1, y1 }
}

/// Miller backward recurrence for `J_n`, normalised by `J0 + 2ΣJ_2k = 1`, with
/// the Neumann expansions of `Y0`, `Y1` in terms of the same `J_n`.
fn neumann_series(x: f64) -> Bessel01 {
    let top = 2 * ((x + 12.0 * x.cbrt() + 30.0) as usize / 2);
    let mut j = vec![0.0; top + 2];
    j[top] = 1e-30;
    for n in (1..=top).rev() {
        j[n - 1] = 2.0 * n as f64 / x * j[n] - j[n + 1];
        if j[n - 1].abs() > 1e250 {
            for v in &mut j[n - 1..] {
                *v *= 1e-250;
            }
        }
    }
    let norm = j[0] + 2.0 * (1..=top / 2).map(|k| j[2 * k]).sum::<f64>();
    for v in &mut j {
        *v /= norm;
    }
    let lg = (0.5 * x).ln() + EULER_GAMMA;
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    for k in 1..=top / 2 {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        s0 += sign * j[2 * k] / k as f64;
        s1 += sign * (j[2 * k - 1] - j[2 * k + 1]) / k as f64;
    }
    let y0 = FRAC_2_PI * (lg * j[0] - 2.0 * s0);
    let y1 = FRAC_2_PI * (lg * j[1] - j[0] / x + s1);
    Bessel01 { j0: j[0], y0, j1: j[1], y1 }
}

/// Large-argument Hankel expansion `(P, Q)` for order `nu`.
fn asymptotic_pq(nu: f64, x: f64) -> (f64, f64) {
    let mu = 4.0 * nu * nu;
    let mut p = 0.0;
    let mut q = 0.0;
    let mut term: f64 = 1.0;
    let mut last = f64::INFINITY;
    for k in 0..60 {
        if term.abs() > last {
            break;
        }
        last = term.abs();
        match k % 4 {
            0 => p += term,
            1 => q += term,
            2 => p -= term,
            _ => q -= term,
        }
        if term.abs() < 1e-18 {
            break;
        }
        let odd = (2 * k + 1) as f64;
        term *= (mu - odd * odd) / ((k + 1) as f64 * 8.0 * x);
    }
    (p, q)
}

fn hankel_asymptotic(x: f64) -> Bessel01 {
    let amp = (FRAC_2_PI / x).sqrt();
    let (s, c) = x.sin_cos();
    // cos/sin of x − π/4 and x − 3π/4 without subtracting from a large x
    let c0 = (c + s) / SQRT_2;
    let s0 = (s - c) / SQRT_2;
    let (c1, s1) = (s0, -c0);
    let (p0, q0) = asymptotic_pq(0.0, x);
    let (p1, q1) = asymptotic_pq(1.0, x);
    Bessel01 {
        j0: amp * (p0 * c0 - q0 * s0),
        y0: amp * (p0 * s0 + q0 * c0),
        j1: amp * (p1 * c1 - q1 * s1),
        y1: amp * (p1 * s1 + q1 * c1),
    }
}

/// `H_order^{(2)}(x)` for order 0 or 1.
pub fn hankel2(order: u8, x: f64) -> Result<Complex64> {
    let b = bessel_j0y0j1y1(x)?;
    match order {
        0 => Ok(b.h0()),
        1 => Ok(b.h1()),
        _ => Err(Error::invalid(format!("Hankel order {order} not supported"))),
    }
}

/// `G(R) = −(j/4) H0^{(2)}(kR)`.
pub fn green(k: f64, r: f64) -> Result<Complex64> {
    if r == 0.0 {
        return Err(Error::Singularity("Green's function at zero distance".into()));
    }
    if !(k > 0.0) {
        return Err(Error::Domain(format!("wavenumber must be positive, got {k}")));
    }
    let b = bessel_j0y0j1y1(k * r)?;
    Ok(Complex64::new(-0.25 * b.y0, -0.25 * b.j0))
}

/// Green's function and its gradient with respect to the observation point.
///
/// `∇_r G = (jk/4) H1^{(2)}(kR) (r − r')/R`; the source gradient is its negative.
pub fn green_and_obs_gradient(k: f64, r: Point2, rp: Point2) -> Result<(Complex64, [Complex64; 2])> {
    let d = r - rp;
    let dist = d.norm();
    if dist == 0.0 {
        return Err(Error::Singularity("Green's gradient at coincident points".into()));
    }
    let b = bessel_j0y0j1y1(k * dist)?;
    let g = Complex64::new(-0.25 * b.y0, -0.25 * b.j0);
    let radial = Complex64::new(0.0, 0.25 * k) * b.h1() / dist;
    Ok((g, [radial * d.x, radial * d.y]))
}

/// Gradient of `G(|r − rp|)` with respect to the source point `rp`.
pub fn green_gradient(k: f64, r: Point2, rp: Point2) -> Result<[Complex64; 2]> {
    let (_, g) = green_and_obs_gradient(k, r, rp)?;
    Ok([-g[0], -g[1]])
}

/// `−(j/4)[1 − j(2/π) ln(γkR/2)]`.
pub fn small_arg_green(k: f64, r: Point2, rp: Point2, consts: &ExpansionConstants) -> Result<Complex64> {
    let dist = r.distance(rp);
    if dist == 0.0 {
        return Err(Error::Singularity("logarithmic kernel at zero distance".into()));
    }
    Ok(consts.log_offset(k) - dist.ln() / (2.0 * PI))
}

/// Small-argument source gradient `−(j/4)(k²/2 + 2j/(πR²))(r − rp)`.
pub fn small_arg_green_gradient(
    k: f64,
    r: Point2,
    rp: Point2,
    _consts: &ExpansionConstants,
) -> Result<[Complex64; 2]> {
    let d = r - rp;
    let r2 = d.dot(d);
    if r2 == 0.0 {
        return Err(Error::Singularity("logarithmic kernel gradient at zero distance".into()));
    }
    let c = Complex64::new(1.0 / (2.0 * PI * r2), -k * k / 8.0);
    Ok([c * d.x, c * d.y])
}

/// Magnitude scale used to judge Bessel accuracy near zeros.
pub fn bessel_envelope(x: f64) -> f64 {
    (1.0 / (FRAC_PI_2 * x)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    const REFERENCE: &str = include_str!("../tests/data/bessel_reference.csv");

    fn reference_rows() -> Vec<[f64; 5]> {
        REFERENCE
            .lines()
            .skip(1)
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                let v: Vec<f64> = l.split(',').map(|s| s.trim().parse().unwrap()).collect();
                [v[0], v[1], v[2], v[3], v[4]]
            })
            .collect()
    }

    #[test]
    fn matches_high_precision_reference() {
        let mut worst: f64 = 0.0;
        for [x, j0, y0, j1, y1] in reference_rows() {
            let b = bessel_j0y0j1y1(x).unwrap();
            for (got, want) in [(b.j0, j0), (b.y0, y0), (b.j1, j1), (b.y1, y1)] {
                let scale = want.abs().max(bessel_envelope(x));
                let err = (got - want).abs() / scale;
                worst = worst.max(err);
                assert!(err <= 1e-13, "x={x}: got {got:e}, want {want:e}, rel {err:e}");
            }
        }
        assert!(worst > 0.0);
    }

    #[test]
    fn unit_argument_table_values() {
        let b = bessel_j0y0j1y1(1.0).unwrap();
        assert!((b.j0 - 0.7651976866).abs() < 1e-10);
        assert!((b.y0 - 0.0882569642).abs() < 1e-10);
        assert!((b.j1 - 0.4400505857).abs() < 1e-10);
        assert!((b.y1 + 0.7812128213).abs() < 1e-10);
    }

    #[test]
    fn small_argument_leading_term() {
        let x = 1e-4;
        let b = bessel_j0y0j1y1(x).unwrap();
        assert!((b.j0 - (1.0 - x * x / 4.0)).abs() < 1e-12);
    }

    #[test]
    fn wronskian() {
        for x in [0.5, 1.0, 5.0, 20.0, 2.0, 25.0, 30.0, 150.0] {
            let b = bessel_j0y0j1y1(x).unwrap();
            let w = b.j1 * b.y0 - b.j0 * b.y1;
            let want = 2.0 / (PI * x);
            assert!(((w - want) / want).abs() < 1e-12, "x={x}");
        }
    }

    #[test]
    fn regimes_join_continuously() {
        for edge in [SERIES_LIMIT, ASYMPTOTIC_LIMIT] {
            let a = bessel_j0y0j1y1(edge * (1.0 - 1e-15)).unwrap();
            let b = bessel_j0y0j1y1(edge * (1.0 + 1e-15)).unwrap();
            let env = bessel_envelope(edge);
            for (u, v) in [(a.j0, b.j0), (a.y0, b.y0), (a.j1, b.j1), (a.y1, b.y1)] {
                assert!((u - v).abs() < 1e-13 * env, "edge {edge}: {u:e} vs {v:e}");
            }
        }
    }

    #[test]
    fn non_positive_argument_is_domain_error() {
        assert!(matches!(bessel_j0y0j1y1(0.0), Err(Error::Domain(_))));
        assert!(matches!(bessel_j0y0j1y1(-1.0), Err(Error::Domain(_))));
        assert!(matches!(hankel2(0, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn hankel_values() {
        let h0 = hankel2(0, 1.0).unwrap();
        let h1 = hankel2(1, 1.0).unwrap();
        assert!((h0 - Complex64::new(0.7651976866, -0.0882569642)).norm() < 1e-10);
        assert!((h1 - Complex64::new(0.4400505857, 0.7812128213)).norm() < 1e-10);
        let big = hankel2(0, 100.0).unwrap().norm();
        assert!((big / (2.0 / (PI * 100.0)).sqrt() - 1.0).abs() < 0.01);
    }

    #[test]
    fn green_values_and_scaling() {
        let g = green(1.0, 1.0).unwrap();
        assert!((g - Complex64::new(-0.0220642410, -0.1912994216)).norm() < 1e-10);
        assert_eq!(green(2.0, 0.5).unwrap(), g);
        assert!(matches!(green(1.0, 0.0), Err(Error::Singularity(_))));
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let k = 1.0;
        let r = Point2::new(0.0, 0.0);
        let rp = Point2::new(1.3, 0.4);
        let grad = green_gradient(k, r, rp).unwrap();
        let h = 1e-6;
        let g = |p: Point2| green(k, r.distance(p)).unwrap();
        let fd = [
            (g(rp + Point2::new(h, 0.0)) - g(rp - Point2::new(h, 0.0))) / (2.0 * h),
            (g(rp + Point2::new(0.0, h)) - g(rp - Point2::new(0.0, h))) / (2.0 * h),
        ];
        let norm = (grad[0].norm_sqr() + grad[1].norm_sqr()).sqrt();
        for i in 0..2 {
            assert!((grad[i] - fd[i]).norm() / norm <= 1e-7);
        }
        let (_, obs) = green_and_obs_gradient(k, r, rp).unwrap();
        assert_eq!([-obs[0], -obs[1]], grad);
        // parallel to r − rp
        let d = r - rp;
        assert!((grad[0] * d.y - grad[1] * d.x).norm() < 1e-15);
    }

    #[test]
    fn small_argument_kernel() {
        let c = ExpansionConstants::default();
        assert!((c.gamma_exp - 1.781072418).abs() < 1e-9);
        let r = Point2::ORIGIN;
        let rp = Point2::new(0.01, 0.0);
        let approx = small_arg_green(1.0, r, rp, &c).unwrap();
        let exact = green(1.0, 0.01).unwrap();
        assert!((approx - exact).norm() / exact.norm() < 1e-4);
        assert!((approx.im + 0.25).abs() < 1e-15);

        let ga = small_arg_green_gradient(1.0, r, rp, &c).unwrap();
        let ge = green_gradient(1.0, r, rp).unwrap();
        let n = (ge[0].norm_sqr() + ge[1].norm_sqr()).sqrt();
        assert!(((ga[0] - ge[0]).norm_sqr() + (ga[1] - ge[1]).norm_sqr()).sqrt() / n < 1e-3);
        // static limit (1/2π)(r − rp)/R²
        let tiny = Point2::new(1e-6, 0.0);
        let gs = small_arg_green_gradient(1.0, r, tiny, &c).unwrap();
        let stat = -1.0 / (2.0 * PI * 1e-6);
        assert!((gs[0].re - stat).abs() < 1e-12 * stat.abs());
    }

    #[test]
    fn expansion_error_shrinks_with_argument() {
        let c = ExpansionConstants::default();
        let mut prev = f64::INFINITY;
        for kr in [0.2, 0.1, 0.05, 0.02, 0.01] {
            let rp = Point2::new(kr, 0.0);
            let e = green(1.0, kr).unwrap();
            let a = small_arg_green(1.0, Point2::ORIGIN, rp, &c).unwrap();
            let err = (a - e).norm() / e.norm();
            assert!(err < prev);
            prev = err;
        }
    }
}
