//! Gauss–Legendre rules and the near-singular source integration machinery.

mod appendix;
mod hybrid;
mod local;

pub use appendix::{appendix_integrals, AppendixIntegrals};
pub use hybrid::{hybrid_inner_integral, segment_moments, split_by_threshold, SegmentMoments, Split};
pub use local::{analytic_k_element, analytic_l_element, near_moments, ArcMoments, NearMoments};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::special::ExpansionConstants;

/// Nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights affinely mapped onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

/// Standard Gauss–Legendre rule with `1 <= n <= 64` points.
pub fn gauss_legendre(n: usize) -> Result<QuadratureRule> {
    if !(1..=64).contains(&n) {
        return Err(Error::invalid(format!("Gauss-Legendre order must be in 1..=64, got {n}")));
    }
    Ok(gauss_legendre_any(n))
}

/// Gauss–Legendre rule of any positive order (Newton iteration on `P_n`).
/// Used by convergence studies that need several hundred points.
pub fn gauss_legendre_any(n: usize) -> QuadratureRule {
    assert!(n >= 1, "Gauss-Legendre order must be positive");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-15 {
                let (_, d) = legendre_with_derivative(n, x);
                dp = d;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    QuadratureRule { nodes, weights }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// Globally adaptive bisection with an 8/16-point Gauss pair. Reference
/// integrator for verification; the production path never calls it.
pub fn integrate_adaptive(
    f: &dyn Fn(f64) -> Complex64,
    a: f64,
    b: f64,
    rel_tol: f64,
) -> Complex64 {
    let coarse = gauss_legendre_any(8);
    let fine = gauss_legendre_any(16);
    let eval = |rule: &QuadratureRule, lo: f64, hi: f64| -> Complex64 {
        rule.mapped(lo, hi).map(|(x, w)| f(x) * w).sum()
    };
    let abs_scale = {
        let g = gauss_legendre_any(64);
        g.mapped(a, b).map(|(x, w)| w * f(x).norm()).sum::<f64>().max(f64::MIN_POSITIVE)
    };
    let mut stack = vec![(a, b, 0usize)];
    let mut total = Complex64::new(0.0, 0.0);
    let mut comp = Complex64::new(0.0, 0.0);
    while let Some((lo, hi, depth)) = stack.pop() {
        let f1 = eval(&fine, lo, hi);
        let c1 = eval(&coarse, lo, hi);
        let width_share = (hi - lo).abs() / (b - a).abs();
        if (f1 - c1).norm() <= rel_tol * abs_scale * width_share.max(1e-6) || depth >= 60 {
            // Kahan summation keeps the many small panels from eroding accuracy.
            let y = f1 - comp;
            let t = total + y;
            comp = (t - total) - y;
            total = t;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((lo, mid, depth + 1));
            stack.push((mid, hi, depth + 1));
        }
    }
    total
}

/// Which operator kernel a source integral uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kernel {
    /// Electric-field (mixed potential) kernel.
    L,
    /// Gradient kernel contracted with the source frame.
    K,
}

/// Which half of a rooftop lives on a segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HalfBasis {
    /// Profile `s / l`, divergence `+1 / l` (the minus segment of its rooftop).
    Rising,
    /// Profile `(l − s) / l`, divergence `−1 / l` (the plus segment).
    Falling,
}

impl HalfBasis {
    /// Profile as `a + b·s` in arc length from the segment start.
    pub fn linear(self, length: f64) -> (f64, f64) {
        match self {
            HalfBasis::Rising => (0.0, 1.0 / length),
            HalfBasis::Falling => (1.0, -1.0 / length),
        }
    }

    pub fn divergence(self, length: f64) -> f64 {
        match self {
            HalfBasis::Rising => 1.0 / length,
            HalfBasis::Falling => -1.0 / length,
        }
    }
}

/// A testing function sampled at one observation point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestSample {
    pub value: Point2,
    pub div: f64,
}

/// Medium-dependent constants of the source integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    pub k: f64,
    pub omega_mu: f64,
    pub consts: ExpansionConstants,
}
