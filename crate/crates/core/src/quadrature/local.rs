//! Source integrals under the logarithmic small-argument kernel, in closed form.
//!
//! Near the observation point
//! `G ≈ c0 − ln(R)/(2π)` and `∇_r G ≈ (jk²/8)(r − r') − (r − r')/(2πR²)`,
//! so every moment reduces to the appendix integrals.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::appendix::{logarithmic, rational};
use super::{HalfBasis, KernelParams, TestSample};
use crate::error::{Error, Result};
use crate::geometry::{Point2, Segment, SingularGeometry};

/// Moments in the projection coordinate `t` over one sub-interval:
/// `∫G`, `∫tG`, `∫∇_r G`, `∫t∇_r G`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NearMoments {
    pub g0: Complex64,
    pub gt: Complex64,
    pub v0: [Complex64; 2],
    pub vt: [Complex64; 2],
}

/// Closed-form moments of the small-argument kernel over `[t1, t2]`.
///
/// With the observation point on the source line and inside the interval
/// the gradient moments are principal values: the `(r − p)` part vanishes and
/// only the tangential part, which is integrable in the principal-value sense,
/// remains.
pub fn near_moments(
    geom: &SingularGeometry,
    tangent: Point2,
    t1: f64,
    t2: f64,
    params: &KernelParams,
    with_gradient: bool,
) -> Result<NearMoments> {
    let d = geom.dist;
    let c0 = params.consts.log_offset(params.k);
    let (i1, i2, i6, i7, i8) = logarithmic(d, t1, t2);
    let inv2pi = 1.0 / (2.0 * PI);
    let g0 = c0 * i6 - i1 * inv2pi;
    let gt = c0 * i7 - i2 * inv2pi;
    let zero = [Complex64::new(0.0, 0.0); 2];
    if !with_gradient {
        return Ok(NearMoments { g0, gt, v0: zero, vt: zero });
    }
    let (i3, i4, i5) = if d == 0.0 && t1 < 0.0 && t2 > 0.0 {
        (0.0, (t2 / t1).abs().ln(), t2 - t1)
    } else if d == 0.0 && (t1 == 0.0 || t2 == 0.0) {
        return Err(Error::Singularity(
            "observation point coincides with a source interval endpoint".into(),
        ));
    } else {
        rational(d, t1, t2)?
    };
    let jk2 = Complex64::new(0.0, params.k * params.k / 8.0);
    let w = geom.offset;
    let tau = tangent;
    let vec = |a: f64, b: f64, c: f64, e: f64| -> [Complex64; 2] {
        // (jk²/8)(w·a − τ·b) − (1/2π)(w·c − τ·e)
        [
            jk2 * (w.x * a - tau.x * b) - (w.x * c - tau.x * e) * inv2pi,
            jk2 * (w.y * a - tau.y * b) - (w.y * c - tau.y * e) * inv2pi,
        ]
    };
    Ok(NearMoments {
        g0,
        gt,
        v0: vec(i6, i7, i3, i4),
        vt: vec(i7, i8, i4, i5),
    })
}

/// Arc-length moments `∫G`, `∫sG`, `∫∇_r G`, `∫s∇_r G` over part of a segment
/// (`s` measured from the segment start).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcMoments {
    pub g0: Complex64,
    pub g1: Complex64,
    pub v0: [Complex64; 2],
    pub v1: [Complex64; 2],
}

impl ArcMoments {
    pub const ZERO: ArcMoments = ArcMoments {
        g0: Complex64::new(0.0, 0.0),
        g1: Complex64::new(0.0, 0.0),
        v0: [Complex64::new(0.0, 0.0); 2],
        v1: [Complex64::new(0.0, 0.0); 2],
    };

    pub fn from_near(m: &NearMoments, l1: f64) -> ArcMoments {
        ArcMoments {
            g0: m.g0,
            g1: m.gt - m.g0 * l1,
            v0: m.v0,
            v1: [m.vt[0] - m.v0[0] * l1, m.vt[1] - m.v0[1] * l1],
        }
    }

    pub fn add(&mut self, o: &ArcMoments) {
        self.g0 += o.g0;
        self.g1 += o.g1;
        for i in 0..2 {
            self.v0[i] += o.v0[i];
            self.v1[i] += o.v1[i];
        }
    }

    /// `∫Λ G` and `∫Λ ∇_r G` for one rooftop half.
    pub fn weighted(&self, half: HalfBasis, length: f64) -> (Complex64, [Complex64; 2]) {
        let (a, b) = half.linear(length);
        (
            self.g0 * a + self.g1 * b,
            [self.v0[0] * a + self.v1[0] * b, self.v0[1] * a + self.v1[1] * b],
        )
    }
}

/// `f_m(r)·(L f_n)` restricted to the integrated part, from moments.
pub(crate) fn contract_l(
    test: &TestSample,
    seg: &Segment,
    half: HalfBasis,
    m: &ArcMoments,
    params: &KernelParams,
) -> Complex64 {
    let (lam_g, _) = m.weighted(half, seg.length);
    let div_n = half.divergence(seg.length);
    let vector = lam_g * test.value.dot(seg.tangent);
    let scalar = m.g0 * (test.div * div_n / (params.k * params.k));
    Complex64::new(0.0, -params.omega_mu) * (vector - scalar)
}

/// `(f·n')τ' − (f·τ')n'`; equals `−ẑ × f` when `n'` is the +90° rotation of `τ'`.
pub(crate) fn k_contraction(test: &TestSample, seg: &Segment) -> Point2 {
    let f = test.value;
    seg.tangent * f.dot(seg.normal) - seg.normal * f.dot(seg.tangent)
}

pub(crate) fn contract_k(test: &TestSample, seg: &Segment, half: HalfBasis, m: &ArcMoments) -> Complex64 {
    let (_, lam_v) = m.weighted(half, seg.length);
    let c = k_contraction(test, seg);
    lam_v[0] * c.x + lam_v[1] * c.y
}

fn check_near(geom: &SingularGeometry, t1: f64, t2: f64, params: &KernelParams) -> Result<()> {
    let reach = t1.hypot(geom.dist).max(t2.hypot(geom.dist)) * params.k;
    if reach > params.consts.delta * (1.0 + 1e-9) {
        return Err(Error::Domain(format!(
            "interval reaches k·R = {reach}, beyond the expansion threshold {}",
            params.consts.delta
        )));
    }
    if !(t1 <= t2) || t1 < geom.l1 - 1e-12 * seg_len(geom) || t2 > geom.l2 + 1e-12 * seg_len(geom) {
        return Err(Error::invalid(format!(
            "sub-interval [{t1}, {t2}] not inside [{}, {}]",
            geom.l1, geom.l2
        )));
    }
    Ok(())
}

fn seg_len(geom: &SingularGeometry) -> f64 {
    geom.l2 - geom.l1
}

/// Closed-form L element on `[t1, t2]` (projection coordinate) for the
/// small-argument kernel. The whole interval must lie inside the δ-disk.
pub fn analytic_l_element(
    test: &TestSample,
    seg: &Segment,
    half: HalfBasis,
    geom: &SingularGeometry,
    t1: f64,
    t2: f64,
    params: &KernelParams,
) -> Result<Complex64> {
    check_near(geom, t1, t2, params)?;
    let m = near_moments(geom, seg.tangent, t1, t2, params, false)?;
    Ok(contract_l(test, seg, half, &ArcMoments::from_near(&m, geom.l1), params))
}

/// Closed-form K element (principal value) on `[t1, t2]`.
pub fn analytic_k_element(
    test: &TestSample,
    seg: &Segment,
    half: HalfBasis,
    geom: &SingularGeometry,
    t1: f64,
    t2: f64,
    params: &KernelParams,
) -> Result<Complex64> {
    check_near(geom, t1, t2, params)?;
    let m = near_moments(geom, seg.tangent, t1, t2, params, true)?;
    Ok(contract_k(test, seg, half, &ArcMoments::from_near(&m, geom.l1)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::project_onto_segment;
    use crate::quadrature::integrate_adaptive;
    use crate::special::{small_arg_green, small_arg_green_gradient, ExpansionConstants};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn params() -> KernelParams {
        KernelParams {
            k: 1.0,
            omega_mu: 3.7,
            consts: ExpansionConstants::default(),
        }
    }

    fn figure_segment() -> Segment {
        Segment::new(Point2::new(-0.065, 0.0), Point2::new(0.065, 0.0)).unwrap()
    }

    fn observation(theta: f64) -> Point2 {
        Point2::new(-0.065 + 0.02 * theta.cos(), 0.02 * theta.sin())
    }

    fn sample() -> TestSample {
        TestSample {
            value: Point2::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2),
            div: 2.5,
        }
    }

    /// Brute-force source integral of the small-argument kernel.
    fn brute(
        r: Point2,
        seg: &Segment,
        half: HalfBasis,
        test: &TestSample,
        p: &KernelParams,
        kernel: crate::quadrature::Kernel,
        s_range: (f64, f64),
    ) -> Complex64 {
        let (a, b) = half.linear(seg.length);
        let div_n = half.divergence(seg.length);
        let c = k_contraction(test, seg);
        let f = |s: f64| -> Complex64 {
            let rp = seg.point_at(s);
            let lam = a + b * s;
            match kernel {
                crate::quadrature::Kernel::L => {
                    let g = small_arg_green(p.k, r, rp, &p.consts).unwrap();
                    Complex64::new(0.0, -p.omega_mu)
                        * g
                        * (lam * test.value.dot(seg.tangent) - test.div * div_n / (p.k * p.k))
                }
                crate::quadrature::Kernel::K => {
                    let src = small_arg_green_gradient(p.k, r, rp, &p.consts).unwrap();
                    // observation gradient is the negative of the source gradient
                    -(src[0] * c.x + src[1] * c.y) * lam
                }
            }
        };
        let geom = project_onto_segment(r, seg);
        let foot = -geom.l1;
        let (lo, hi) = s_range;
        if foot > lo && foot < hi {
            integrate_adaptive(&f, lo, foot, 1e-15) + integrate_adaptive(&f, foot, hi, 1e-15)
        } else {
            integrate_adaptive(&f, lo, hi, 1e-15)
        }
    }

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn figure_configuration_matches_oracle() {
        let seg = figure_segment();
        let p = KernelParams {
            consts: ExpansionConstants::with_delta(1.0),
            ..params()
        };
        for theta in [0.05, 0.25, 0.5, 0.75, 1.0].map(|f| f * std::f64::consts::PI) {
            let r = observation(theta);
            let g = project_onto_segment(r, &seg);
            for half in [HalfBasis::Rising, HalfBasis::Falling] {
                let l = analytic_l_element(&sample(), &seg, half, &g, g.l1, g.l2, &p).unwrap();
                let lo = brute(r, &seg, half, &sample(), &p, crate::quadrature::Kernel::L, (0.0, seg.length));
                assert!(rel(l, lo) < 1e-10, "L theta={theta}: {l} vs {lo}");
                let k = analytic_k_element(&sample(), &seg, half, &g, g.l1, g.l2, &p).unwrap();
                let ko = brute(r, &seg, half, &sample(), &p, crate::quadrature::Kernel::K, (0.0, seg.length));
                assert!(rel(k, ko) < 1e-10, "K theta={theta}: {k} vs {ko}");
            }
        }
    }

    #[test]
    fn partial_interval_matches_oracle() {
        let seg = figure_segment();
        let p = params();
        let r = Point2::new(0.01, 0.004);
        let g = project_onto_segment(r, &seg);
        let (t1, t2) = (-0.05, 0.03);
        let s = (t1 - g.l1, t2 - g.l1);
        let l = analytic_l_element(&sample(), &seg, HalfBasis::Rising, &g, t1, t2, &p).unwrap();
        let lo = brute(r, &seg, HalfBasis::Rising, &sample(), &p, crate::quadrature::Kernel::L, s);
        assert!(rel(l, lo) < 1e-10);
        let k = analytic_k_element(&sample(), &seg, HalfBasis::Falling, &g, t1, t2, &p).unwrap();
        let ko = brute(r, &seg, HalfBasis::Falling, &sample(), &p, crate::quadrature::Kernel::K, s);
        assert!(rel(k, ko) < 1e-10);
    }

    #[test]
    fn zero_test_function_gives_zero() {
        let seg = figure_segment();
        let g = project_onto_segment(observation(0.3), &seg);
        let zero = TestSample { value: Point2::ORIGIN, div: 0.0 };
        let p = KernelParams { consts: ExpansionConstants::with_delta(1.0), ..params() };
        let l = analytic_l_element(&zero, &seg, HalfBasis::Rising, &g, g.l1, g.l2, &p).unwrap();
        let k = analytic_k_element(&zero, &seg, HalfBasis::Rising, &g, g.l1, g.l2, &p).unwrap();
        assert_eq!(l, Complex64::new(0.0, 0.0));
        assert_eq!(k, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn l_is_linear_in_omega_mu() {
        let seg = figure_segment();
        let g = project_onto_segment(observation(0.3), &seg);
        let p = KernelParams { consts: ExpansionConstants::with_delta(1.0), ..params() };
        let p2 = KernelParams { omega_mu: 2.0 * p.omega_mu, ..p };
        let a = analytic_l_element(&sample(), &seg, HalfBasis::Falling, &g, g.l1, g.l2, &p).unwrap();
        let b = analytic_l_element(&sample(), &seg, HalfBasis::Falling, &g, g.l1, g.l2, &p2).unwrap();
        assert_eq!(b, a * 2.0);
    }

    #[test]
    fn flipped_normal_negates_k() {
        let seg = figure_segment();
        let mut flipped = seg;
        flipped.normal = -seg.normal;
        let g = project_onto_segment(observation(0.6), &seg);
        let p = KernelParams { consts: ExpansionConstants::with_delta(1.0), ..params() };
        let a = analytic_k_element(&sample(), &seg, HalfBasis::Rising, &g, g.l1, g.l2, &p).unwrap();
        let b = analytic_k_element(&sample(), &flipped, HalfBasis::Rising, &g, g.l1, g.l2, &p).unwrap();
        assert_eq!(b, -a);
    }

    #[test]
    fn self_term_is_finite_and_tangential_contraction_vanishes() {
        let seg = figure_segment();
        let r = Point2::new(0.01, 0.0);
        let g = project_onto_segment(r, &seg);
        let p = KernelParams { consts: ExpansionConstants::with_delta(1.0), ..params() };
        let along = TestSample { value: seg.tangent * 0.4, div: 1.0 };
        let k = analytic_k_element(&along, &seg, HalfBasis::Rising, &g, g.l1, g.l2, &p).unwrap();
        assert!(k.norm() < 1e-15);
        let l = analytic_l_element(&along, &seg, HalfBasis::Rising, &g, g.l1, g.l2, &p).unwrap();
        assert!(l.is_finite());
        let lo = brute(r, &seg, HalfBasis::Rising, &along, &p, crate::quadrature::Kernel::L, (0.0, seg.length));
        assert!(rel(l, lo) < 1e-10);
    }

    #[test]
    fn outside_disk_is_domain_error() {
        let seg = figure_segment();
        let g = project_onto_segment(observation(0.5), &seg);
        let p = params();
        assert!(matches!(
            analytic_l_element(&sample(), &seg, HalfBasis::Rising, &g, g.l1, g.l2, &p),
            Err(Error::Domain(_))
        ));
    }
}
