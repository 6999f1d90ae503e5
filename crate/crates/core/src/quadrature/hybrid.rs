//! Split source integration: closed form inside the disk `k·R < δ`, Gauss
//! quadrature of the exact Hankel kernel outside it.

use num_complex::Complex64;

use super::local::{contract_k, contract_l, near_moments, ArcMoments};
use super::{HalfBasis, Kernel, KernelParams, QuadratureRule, TestSample};
use crate::error::Result;
use crate::geometry::{project_onto_segment, Point2, Segment, SingularGeometry};
use crate::special::{green, green_and_obs_gradient};

/// Observation points closer to the source line than this fraction of the
/// segment length are treated as lying on it.
const ON_LINE: f64 = 1e-10;

/// Arc-length sub-intervals of a segment (measured from its start).
#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub near: Option<(f64, f64)>,
    pub far: Vec<(f64, f64)>,
}

pub(crate) fn local_frame(r: Point2, seg: &Segment) -> SingularGeometry {
    let g = project_onto_segment(r, seg);
    if g.dist <= ON_LINE * seg.length {
        g.on_line()
    } else {
        g
    }
}

fn split_frame(geom: &SingularGeometry, length: f64, k: f64, delta: f64) -> Split {
    let radius = delta / k;
    let whole = Split { near: None, far: vec![(0.0, length)] };
    if geom.dist >= radius {
        return whole;
    }
    let half_chord = (radius * radius - geom.dist * geom.dist).sqrt();
    let t_lo = (-half_chord).max(geom.l1);
    let t_hi = half_chord.min(geom.l2);
    if t_lo >= t_hi {
        return whole;
    }
    let (a, b) = ((t_lo - geom.l1).max(0.0), (t_hi - geom.l1).min(length));
    let mut far = Vec::with_capacity(2);
    if a > 0.0 {
        far.push((0.0, a));
    }
    if b < length {
        far.push((b, length));
    }
    Split { near: Some((a, b)), far }
}

/// Intersection of the segment with the open disk of radius `δ/k` about `r`.
pub fn split_by_threshold(r: Point2, seg: &Segment, k: f64, delta: f64) -> Split {
    split_frame(&local_frame(r, seg), seg.length, k, delta)
}

/// Source-segment moments at one observation point, plus how many far-field
/// kernel evaluations were spent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentMoments {
    pub moments: ArcMoments,
    pub far_points: usize,
}

/// `∫G ds`, `∫sG ds`, `∫∇_r G ds`, `∫s∇_r G ds` over the whole segment.
pub fn segment_moments(
    r: Point2,
    seg: &Segment,
    params: &KernelParams,
    far_rule: &QuadratureRule,
    with_gradient: bool,
) -> Result<SegmentMoments> {
    let geom = local_frame(r, seg);
    let split = split_frame(&geom, seg.length, params.k, params.consts.delta);
    let mut acc = ArcMoments::ZERO;
    if let Some((a, b)) = split.near {
        let m = near_moments(&geom, seg.tangent, a + geom.l1, b + geom.l1, params, with_gradient)?;
        acc.add(&ArcMoments::from_near(&m, geom.l1));
    }
    let mut far_points = 0;
    for &(a, b) in &split.far {
        for (s, w) in far_rule.mapped(a, b) {
            let rp = seg.point_at(s);
            far_points += 1;
            if with_gradient {
                let (g, grad) = green_and_obs_gradient(params.k, r, rp)?;
                acc.g0 += g * w;
                acc.g1 += g * (w * s);
                for i in 0..2 {
                    acc.v0[i] += grad[i] * w;
                    acc.v1[i] += grad[i] * (w * s);
                }
            } else {
                let g = green(params.k, r.distance(rp))?;
                acc.g0 += g * w;
                acc.g1 += g * (w * s);
            }
        }
    }
    Ok(SegmentMoments { moments: acc, far_points })
}

/// Inner (source) integral of one rooftop half against a sampled test function.
pub fn hybrid_inner_integral(
    r: Point2,
    seg: &Segment,
    half: HalfBasis,
    kernel: Kernel,
    test: &TestSample,
    params: &KernelParams,
    far_rule: &QuadratureRule,
) -> Result<Complex64> {
    let m = segment_moments(r, seg, params, far_rule, kernel == Kernel::K)?;
    Ok(match kernel {
        Kernel::L => contract_l(test, seg, half, &m.moments, params),
        Kernel::K => contract_k(test, seg, half, &m.moments),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{analytic_l_element, gauss_legendre, gauss_legendre_any};
    use crate::special::ExpansionConstants;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn unit_segment() -> Segment {
        Segment::new(Point2::new(-1.0, 0.0), Point2::new(1.0, 0.0)).unwrap()
    }

    #[test]
    fn split_examples() {
        let seg = unit_segment();
        let s = split_by_threshold(Point2::new(0.0, 0.05), &seg, 1.0, 0.1);
        let (a, b) = s.near.unwrap();
        let h = (0.01f64 - 0.0025).sqrt();
        assert!((a - (1.0 - h)).abs() < 1e-14 && (b - (1.0 + h)).abs() < 1e-14);
        assert_eq!(s.far.len(), 2);

        let s = split_by_threshold(Point2::new(0.0, 0.5), &seg, 1.0, 0.1);
        assert_eq!(s, Split { near: None, far: vec![(0.0, 2.0)] });

        let s = split_by_threshold(Point2::new(0.0, 0.1), &seg, 1.0, 10.0);
        assert_eq!(s, Split { near: Some((0.0, 2.0)), far: vec![] });
    }

    fn figure_params(delta: f64) -> KernelParams {
        KernelParams { k: 1.0, omega_mu: 1.0, consts: ExpansionConstants::with_delta(delta) }
    }

    fn figure_setup(theta: f64) -> (Point2, Segment, TestSample) {
        let seg = Segment::new(Point2::new(-0.065, 0.0), Point2::new(0.065, 0.0)).unwrap();
        let r = Point2::new(-0.065 + 0.02 * theta.cos(), 0.02 * theta.sin());
        let test = TestSample { value: Point2::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2), div: 0.0 };
        (r, seg, test)
    }

    #[test]
    fn whole_segment_inside_disk_is_pure_analytic() {
        let (r, seg, test) = figure_setup(0.5 * PI);
        let p = figure_params(1.0);
        let rule = gauss_legendre(14).unwrap();
        let m = segment_moments(r, &seg, &p, &rule, false).unwrap();
        assert_eq!(m.far_points, 0);
        let h = hybrid_inner_integral(r, &seg, HalfBasis::Rising, Kernel::L, &test, &p, &rule).unwrap();
        let g = local_frame(r, &seg);
        let a = analytic_l_element(&test, &seg, HalfBasis::Rising, &g, g.l1, g.l2, &p).unwrap();
        assert_eq!(h, a);
    }

    #[test]
    fn far_observer_uses_plain_gauss() {
        let seg = unit_segment();
        let r = Point2::new(0.3, 4.0);
        let p = figure_params(0.1);
        let rule = gauss_legendre(14).unwrap();
        let m = segment_moments(r, &seg, &p, &rule, true).unwrap().moments;
        let mut g0 = Complex64::new(0.0, 0.0);
        for (s, w) in rule.mapped(0.0, seg.length) {
            g0 += green(1.0, r.distance(seg.point_at(s))).unwrap() * w;
        }
        assert_eq!(m.g0, g0);
    }

    #[test]
    fn hybrid_close_to_converged_gauss() {
        for theta in [0.05 * PI, 0.5 * PI, PI] {
            let (r, seg, test) = figure_setup(theta);
            let rule = gauss_legendre(14).unwrap();
            let hybrid = hybrid_inner_integral(r, &seg, HalfBasis::Rising, Kernel::L, &test, &figure_params(0.1), &rule).unwrap();
            let fine = gauss_legendre_any(400);
            let p = figure_params(1e-30);
            let reference = hybrid_inner_integral(r, &seg, HalfBasis::Rising, Kernel::L, &test, &p, &fine).unwrap();
            // first-order expansion of the kernel bounds the agreement
            assert!((hybrid - reference).norm() / reference.norm() < 5e-3);
        }
    }

    #[test]
    fn continuous_across_topology_change() {
        let seg = unit_segment();
        let p = figure_params(0.1);
        let rule = gauss_legendre(14).unwrap();
        let test = TestSample { value: Point2::new(0.6, 0.8), div: 1.3 };
        // the disk edge just touches the segment at y = 0.1
        for y in [0.1, 0.05] {
            let r0 = Point2::new(-0.95, y);
            let r1 = Point2::new(-0.95, y + 1e-9);
            for kernel in [Kernel::L, Kernel::K] {
                let a = hybrid_inner_integral(r0, &seg, HalfBasis::Falling, kernel, &test, &p, &rule).unwrap();
                let b = hybrid_inner_integral(r1, &seg, HalfBasis::Falling, kernel, &test, &p, &rule).unwrap();
                assert!((a - b).norm() / a.norm() < 1e-6);
            }
        }
    }
}
