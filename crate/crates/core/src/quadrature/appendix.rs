//! Closed-form integrals over a straight source interval.
//!
//! With `r' = p + t·τ'` (p the projection of the observation point onto the
//! source line), `d = |r − p|` and `R(t) = √(t² + d²)`, the interval `[t1, t2]`
//! yields
//!
//! | name | integrand |
//! |------|-----------|
//! | i1 | ln R |
//! | i2 | t ln R |
//! | i3 | 1 / R² |
//! | i4 | t / R² |
//! | i5 | t² / R² |
//! | i6 | 1 |
//! | i7 | t |
//! | i8 | t² |

use crate::error::{Error, Result};
use crate::geometry::SingularGeometry;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AppendixIntegrals {
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
    pub i4: f64,
    pub i5: f64,
    pub i6: f64,
    pub i7: f64,
    pub i8: f64,
}

/// All eight integrals over `[t1, t2] ⊆ [geom.l1, geom.l2]`.
///
/// Fails when the observation point sits on the source line inside the
/// interval, where `i3` diverges and `i4` exists only as a principal value.
pub fn appendix_integrals(geom: &SingularGeometry, t1: f64, t2: f64) -> Result<AppendixIntegrals> {
    check_interval(geom, t1, t2)?;
    let d = geom.dist;
    let (i1, i2, i6, i7, i8) = logarithmic(d, t1, t2);
    let (i3, i4, i5) = rational(d, t1, t2)?;
    Ok(AppendixIntegrals { i1, i2, i3, i4, i5, i6, i7, i8 })
}

fn check_interval(geom: &SingularGeometry, t1: f64, t2: f64) -> Result<()> {
    let slack = 1e-12 * (geom.l2 - geom.l1);
    if !(t1 <= t2) || t1 < geom.l1 - slack || t2 > geom.l2 + slack {
        return Err(Error::invalid(format!(
            "sub-interval [{t1}, {t2}] not inside [{}, {}]",
            geom.l1, geom.l2
        )));
    }
    Ok(())
}

fn x_log_x(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// `i1, i2, i6, i7, i8`; finite for every geometry.
pub(crate) fn logarithmic(d: f64, t1: f64, t2: f64) -> (f64, f64, f64, f64, f64) {
    let prim1 = |t: f64| {
        let r = t.hypot(d);
        let atan_part = if d == 0.0 { 0.0 } else { d * (t / d).atan() };
        // t ln R written so that t = 0, d = 0 is a removable zero
        let t_ln_r = if r == 0.0 { 0.0 } else { t * r.ln() };
        t_ln_r - t + atan_part
    };
    // ∫ t ln R dt = ½ R² ln R − ¼ R²; the ¼R² difference is (t2² − t1²)/4.
    let half_r2_ln_r = |t: f64| {
        let r2 = t * t + d * d;
        0.25 * x_log_x(r2)
    };
    let i1 = prim1(t2) - prim1(t1);
    let i2 = half_r2_ln_r(t2) - half_r2_ln_r(t1) - 0.25 * (t2 * t2 - t1 * t1);
    let i6 = t2 - t1;
    let i7 = 0.5 * (t2 - t1) * (t2 + t1);
    let i8 = (t2 - t1) * (t2 * t2 + t1 * t2 + t1 * t1) / 3.0;
    (i1, i2, i6, i7, i8)
}

/// `i3, i4, i5`.
pub(crate) fn rational(d: f64, t1: f64, t2: f64) -> Result<(f64, f64, f64)> {
    let width = t2 - t1;
    if d == 0.0 {
        if t1 <= 0.0 && t2 >= 0.0 {
            return Err(Error::Singularity(format!(
                "observation point on the source interval [{t1}, {t2}]"
            )));
        }
        let i3 = width / (t1 * t2);
        let i4 = (t2 / t1).abs().ln();
        return Ok((i3, i4, width));
    }
    let i3 = (d * width).atan2(d * d + t1 * t2) / d;
    let i4 = 0.5 * ((t2 * t2 + d * d) / (t1 * t1 + d * d)).ln();
    let i5 = width - d * d * i3;
    Ok((i3, i4, i5))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{project_onto_segment, Point2, Segment};
    use crate::quadrature::integrate_adaptive;
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn geom(l1: f64, l2: f64, d: f64) -> SingularGeometry {
        let seg = Segment::new(Point2::new(l1, 0.0), Point2::new(l2, 0.0)).unwrap();
        project_onto_segment(Point2::new(0.0, d), &seg)
    }

    fn as_array(a: &AppendixIntegrals) -> [f64; 8] {
        [a.i1, a.i2, a.i3, a.i4, a.i5, a.i6, a.i7, a.i8]
    }

    #[test]
    fn unit_geometry_values() {
        let g = geom(-1.0, 1.0, 1.0);
        let a = appendix_integrals(&g, -1.0, 1.0).unwrap();
        let i1 = 2f64.ln() - 2.0 + std::f64::consts::FRAC_PI_2;
        assert!((a.i1 - i1).abs() < 1e-15);
        assert!((a.i1 - 0.2639435).abs() < 1e-7);
        assert!((a.i3 - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert_eq!(a.i6, 2.0);
        assert_eq!(a.i7, 0.0);
        assert!((a.i8 - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn on_line_limits() {
        let g = geom(-0.5, 1.0, 0.0);
        assert!(matches!(appendix_integrals(&g, -0.5, 1.0), Err(Error::Singularity(_))));
        let (i1, i2, ..) = logarithmic(0.0, -0.5, 1.0);
        // ∫ ln|t| over [−0.5, 1] = [t ln|t| − t]
        let want1 = (0.0 - 1.0) - (-0.5 * 0.5f64.ln() + 0.5);
        assert!((i1 - want1).abs() < 1e-15);
        let want2 = (0.0 - 0.25) - (0.5 * 0.25 * 0.5f64.ln() - 0.25 * 0.25);
        assert!((i2 - want2).abs() < 1e-15);
        // off the interval the rational integrals are ordinary
        let g = geom(0.5, 2.0, 0.0);
        let a = appendix_integrals(&g, 0.5, 2.0).unwrap();
        assert!((a.i3 - 1.5).abs() < 1e-15);
        assert!((a.i4 - 4f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn rejects_sub_interval_outside_segment() {
        let g = geom(-1.0, 1.0, 0.3);
        assert!(appendix_integrals(&g, -1.5, 0.0).is_err());
        assert!(appendix_integrals(&g, 0.5, 0.2).is_err());
    }

    fn oracle(d: f64, t1: f64, t2: f64) -> [f64; 8] {
        let fs: [&dyn Fn(f64) -> f64; 8] = [
            &|t| t.hypot(d).ln(),
            &|t| t * t.hypot(d).ln(),
            &|t| 1.0 / (t * t + d * d),
            &|t| t / (t * t + d * d),
            &|t| t * t / (t * t + d * d),
            &|_| 1.0,
            &|t| t,
            &|t| t * t,
        ];
        let mut out = [0.0; 8];
        for (o, f) in out.iter_mut().zip(fs) {
            let g = |t: f64| Complex64::from(f(t));
            // split at the peak so the bisection sees smooth panels
            *o = if t1 < 0.0 && t2 > 0.0 {
                integrate_adaptive(&g, t1, 0.0, 1e-14).re + integrate_adaptive(&g, 0.0, t2, 1e-14).re
            } else {
                integrate_adaptive(&g, t1, t2, 1e-14).re
            };
        }
        out
    }

    fn l1_scale(d: f64, t1: f64, t2: f64, which: usize) -> f64 {
        let f = move |t: f64| -> f64 {
            let r2 = t * t + d * d;
            match which {
                0 => 0.5 * r2.ln(),
                1 => 0.5 * t * r2.ln(),
                2 => 1.0 / r2,
                3 => t / r2,
                4 => t * t / r2,
                5 => 1.0,
                6 => t,
                _ => t * t,
            }
            .abs()
        };
        integrate_adaptive(&|t| Complex64::from(f(t)), t1, t2, 1e-8).re
    }

    #[test]
    fn additivity_on_one_example() {
        let (d, a, b, c) = (0.01, -0.3, 0.05, 0.7);
        let g = geom(a, c, d);
        let x = as_array(&appendix_integrals(&g, a, b).unwrap());
        let y = as_array(&appendix_integrals(&g, b, c).unwrap());
        let z = as_array(&appendix_integrals(&g, a, c).unwrap());
        for i in 0..8 {
            assert!((x[i] + y[i] - z[i]).abs() <= 1e-12 * z[i].abs().max(1e-300) + 1e-15);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn matches_adaptive_oracle(
            d_exp in -4.0f64..1.0, t1 in -5.0f64..5.0, width in 1e-3f64..5.0
        ) {
            let d = 10f64.powf(d_exp);
            let t2 = t1 + width;
            let g = geom(t1, t2, d);
            let got = as_array(&appendix_integrals(&g, t1, t2).unwrap());
            let want = oracle(d, t1, t2);
            for i in 0..8 {
                let scale = l1_scale(d, t1, t2, i);
                prop_assert!((got[i] - want[i]).abs() <= 1e-10 * scale, "I{} {} vs {}", i + 1, got[i], want[i]);
            }
        }

        #[test]
        fn sub_interval_additivity(
            d in 1e-4f64..2.0, a in -3.0f64..0.0, split in 0.0f64..1.0, width in 0.01f64..3.0
        ) {
            let c = a + width;
            let b = a + split * width;
            let g = geom(a, c, d);
            let x = as_array(&appendix_integrals(&g, a, b).unwrap());
            let y = as_array(&appendix_integrals(&g, b, c).unwrap());
            let z = as_array(&appendix_integrals(&g, a, c).unwrap());
            for i in 0..8 {
                let scale = l1_scale(d, a, c, i);
                prop_assert!((x[i] + y[i] - z[i]).abs() <= 1e-12 * scale.max(z[i].abs()));
            }
        }
    }
}
