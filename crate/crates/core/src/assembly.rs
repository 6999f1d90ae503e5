//! Galerkin blocks between rooftop bases on two contours.
//!
//! For testing rooftops `f_m` on the observation contour and sources `f_n`:
//!
//! * `U_mn = ∫ f_m·f_n` (same contour only)
//! * `L_mn = −jωμ ∫∫ [f_m·f_n − (∇·f_m)(∇'·f_n)/k²] G`
//! * `K_mn = ∫∫ ((f_m·n')τ' − (f_m·τ')n')·∇G Λ_n` (principal value)
//! * `S_mn = ∫∫ Λ_m Λ_n G`
//! * `D_mn = ∫∫ Λ_m Λ_n n'·∇G`
//!
//! where `∇` acts on the observation point and `n'`, `τ'` belong to the
//! source segment.

use nalgebra::Cholesky;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Boundary;
use crate::linalg::{CMatrix, CVector};
use crate::media::PlaneWave;
use crate::quadrature::{gauss_legendre, segment_moments, HalfBasis, KernelParams, QuadratureRule};
use crate::special::ExpansionConstants;

/// Integration orders and the near-field threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureSettings {
    pub outer_points: usize,
    pub inner_points: usize,
    pub delta: f64,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        QuadratureSettings {
            outer_points: 5,
            inner_points: 14,
            delta: 0.1,
        }
    }
}

impl QuadratureSettings {
    pub fn validate(&self) -> Result<()> {
        gauss_legendre(self.outer_points)?;
        gauss_legendre(self.inner_points)?;
        self.constants().validate()
    }

    pub fn constants(&self) -> ExpansionConstants {
        ExpansionConstants::with_delta(self.delta)
    }

    pub(crate) fn rules(&self) -> Result<(QuadratureRule, QuadratureRule)> {
        Ok((gauss_legendre(self.outer_points)?, gauss_legendre(self.inner_points)?))
    }
}

/// A dense block `N_obs × N_src` with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorBlock {
    pub matrix: CMatrix,
    pub obs_boundary: usize,
    pub src_boundary: usize,
    pub wavenumber: f64,
}

/// Which blocks one assembly pass should produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BlockSet {
    pub l: bool,
    pub k: bool,
    pub s: bool,
    pub d: bool,
}

impl BlockSet {
    pub const LK: BlockSet = BlockSet { l: true, k: true, s: false, d: false };
    pub const ALL: BlockSet = BlockSet { l: true, k: true, s: true, d: true };

    fn needs_gradient(&self) -> bool {
        self.k || self.d
    }
}

/// Blocks produced by [`assemble_blocks`]; absent ones were not requested.
#[derive(Debug, Clone, Default)]
pub struct Blocks {
    pub l: Option<CMatrix>,
    pub k: Option<CMatrix>,
    pub s: Option<CMatrix>,
    pub d: Option<CMatrix>,
}

/// Rows `i` and `i + 1` contributed by observation segment `i`.
struct SegmentRows {
    rows: [usize; 2],
    l: Vec<Complex64>,
    k: Vec<Complex64>,
    s: Vec<Complex64>,
    d: Vec<Complex64>,
}

/// One pass over all observation/source segment pairs.
pub fn assemble_blocks(
    obs: &Boundary,
    src: &Boundary,
    params: &KernelParams,
    quad: &QuadratureSettings,
    which: BlockSet,
) -> Result<Blocks> {
    if !(params.k > 0.0) {
        return Err(Error::invalid(format!("wavenumber must be positive, got {}", params.k)));
    }
    let (outer, inner) = quad.rules()?;
    let (n_obs, n_src) = (obs.len(), src.len());
    let need_grad = which.needs_gradient();
    let k2 = params.k * params.k;
    let minus_j_omega_mu = Complex64::new(0.0, -params.omega_mu);

    let per_segment: Vec<SegmentRows> = (0..n_obs)
        .into_par_iter()
        .map(|i| -> Result<SegmentRows> {
            let seg_o = &obs.segments[i];
            let width = 2 * n_src;
            let zero = Complex64::new(0.0, 0.0);
            let alloc = |on: bool| if on { vec![zero; width] } else { Vec::new() };
            let mut out = SegmentRows {
                rows: [i, (i + 1) % n_obs],
                l: alloc(which.l),
                k: alloc(which.k),
                s: alloc(which.s),
                d: alloc(which.d),
            };
            // test halves on this segment: rooftop i falls, rooftop i+1 rises
            let tests = [HalfBasis::Falling, HalfBasis::Rising];
            for (s_o, w_o) in outer.mapped(0.0, seg_o.length) {
                let r = seg_o.point_at(s_o);
                let lam_m = tests.map(|h| {
                    let (a, b) = h.linear(seg_o.length);
                    a + b * s_o
                });
                let div_m = tests.map(|h| h.divergence(seg_o.length));
                for (j, seg_s) in src.segments.iter().enumerate() {
                    let m = segment_moments(r, seg_s, params, &inner, need_grad)?.moments;
                    let cols = [j, (j + 1) % n_src];
                    let tau_dot = seg_o.tangent.dot(seg_s.tangent);
                    // contraction vector of K for a unit tangential test function
                    let c_unit = seg_s.tangent * seg_o.tangent.dot(seg_s.normal)
                        - seg_s.normal * seg_o.tangent.dot(seg_s.tangent);
                    for (hn, &col) in [HalfBasis::Falling, HalfBasis::Rising].iter().zip(&cols) {
                        let (lam_g, lam_v) = m.weighted(*hn, seg_s.length);
                        let div_n = hn.divergence(seg_s.length);
                        for t in 0..2 {
                            let idx = t * n_src + col;
                            let wl = w_o * lam_m[t];
                            if which.l {
                                let v = lam_g * (tau_dot * lam_m[t]) - m.g0 * (div_m[t] * div_n / k2);
                                out.l[idx] += minus_j_omega_mu * v * w_o;
                            }
                            if which.k {
                                out.k[idx] += (lam_v[0] * c_unit.x + lam_v[1] * c_unit.y) * wl;
                            }
                            if which.s {
                                out.s[idx] += lam_g * wl;
                            }
                            if which.d {
                                let n = seg_s.normal;
                                out.d[idx] += (lam_v[0] * n.x + lam_v[1] * n.y) * wl;
                            }
                        }
                    }
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut blocks = Blocks::default();
    let gather = |pick: &dyn Fn(&SegmentRows) -> &Vec<Complex64>| -> CMatrix {
        let mut m = CMatrix::zeros(n_obs, n_src);
        for seg in &per_segment {
            let v = pick(seg);
            for t in 0..2 {
                let row = seg.rows[t];
                for c in 0..n_src {
                    m[(row, c)] += v[t * n_src + c];
                }
            }
        }
        m
    };
    if which.l {
        blocks.l = Some(gather(&|s| &s.l));
    }
    if which.k {
        blocks.k = Some(gather(&|s| &s.k));
    }
    if which.s {
        blocks.s = Some(gather(&|s| &s.s));
    }
    if which.d {
        blocks.d = Some(gather(&|s| &s.d));
    }
    Ok(blocks)
}

fn block(matrix: CMatrix, obs: &Boundary, src: &Boundary, k: f64) -> OperatorBlock {
    OperatorBlock {
        matrix,
        obs_boundary: obs.id,
        src_boundary: src.id,
        wavenumber: k,
    }
}

/// Rooftop Gram matrix (exact for straight segments).
pub fn assemble_u(boundary: &Boundary) -> OperatorBlock {
    let n = boundary.len();
    let mut m = CMatrix::zeros(n, n);
    for (j, seg) in boundary.segments.iter().enumerate() {
        // segment j carries rooftop j (falling) and rooftop j+1 (rising)
        let (a, b) = (j, (j + 1) % n);
        let l = seg.length;
        m[(a, a)] += Complex64::from(l / 3.0);
        m[(b, b)] += Complex64::from(l / 3.0);
        m[(a, b)] += Complex64::from(l / 6.0);
        m[(b, a)] += Complex64::from(l / 6.0);
    }
    block(m, boundary, boundary, 0.0)
}

/// True when the Gram matrix admits a Cholesky factorization.
pub fn is_positive_definite(u: &CMatrix) -> bool {
    let real = u.map(|z| z.re);
    Cholesky::new(real).is_some()
}

pub fn assemble_l(
    obs: &Boundary,
    src: &Boundary,
    params: &KernelParams,
    quad: &QuadratureSettings,
) -> Result<OperatorBlock> {
    let b = assemble_blocks(obs, src, params, quad, BlockSet { l: true, ..Default::default() })?;
    Ok(block(b.l.expect("requested"), obs, src, params.k))
}

pub fn assemble_k(
    obs: &Boundary,
    src: &Boundary,
    params: &KernelParams,
    quad: &QuadratureSettings,
) -> Result<OperatorBlock> {
    let b = assemble_blocks(obs, src, params, quad, BlockSet { k: true, ..Default::default() })?;
    Ok(block(b.k.expect("requested"), obs, src, params.k))
}

/// `⟨f_m, E_inc⟩` on every rooftop of the contour.
pub fn test_incident(
    boundary: &Boundary,
    wave: &PlaneWave,
    k: f64,
    quad: &QuadratureSettings,
) -> Result<CVector> {
    wave.validate()?;
    let outer = gauss_legendre(quad.outer_points)?;
    let n = boundary.len();
    let mut v = CVector::zeros(n);
    for (j, seg) in boundary.segments.iter().enumerate() {
        for (s, w) in outer.mapped(0.0, seg.length) {
            let e = wave.e_field(k, seg.point_at(s));
            let e_tan = e[0] * seg.tangent.x + e[1] * seg.tangent.y;
            let frac = s / seg.length;
            v[j] += e_tan * (w * (1.0 - frac));
            v[(j + 1) % n] += e_tan * (w * frac);
        }
    }
    Ok(v)
}

/// `⟨Λ_m, H_z^inc⟩` on every rooftop of the contour.
pub fn test_incident_h(
    boundary: &Boundary,
    wave: &PlaneWave,
    k: f64,
    impedance: f64,
    quad: &QuadratureSettings,
) -> Result<CVector> {
    wave.validate()?;
    let outer = gauss_legendre(quad.outer_points)?;
    let n = boundary.len();
    let mut v = CVector::zeros(n);
    for (j, seg) in boundary.segments.iter().enumerate() {
        for (s, w) in outer.mapped(0.0, seg.length) {
            let h = wave.h_z(k, impedance, seg.point_at(s));
            let frac = s / seg.length;
            v[j] += h * (w * (1.0 - frac));
            v[(j + 1) % n] += h * (w * frac);
        }
    }
    Ok(v)
}
