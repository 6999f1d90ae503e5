//! Surface admittance operators and the layer-by-layer differential
//! admittance of a nested scatterer.
//!
//! On a closed contour with homogeneous interior, the tested fields satisfy
//! `½U e = L h + K e`, so `h = Y e` with `Y = L⁻¹(½U − K)`. Replacing the
//! interior by the exterior medium gives `Ŷ`; the differential operator
//! `Ŷ − Y` maps `e` to the single equivalent electric current that reproduces
//! the exterior field.

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::assembly::{assemble_blocks, assemble_u, BlockSet, QuadratureSettings};
use crate::error::{Error, Result};
use crate::geometry::{Boundary, Point2};
use crate::linalg::{CMatrix, Factorized};
use crate::media::Medium;
use crate::quadrature::KernelParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AdmittanceKind {
    Sao,
    SaoEquivalent,
    Dsao,
    Pec,
    CGamma,
    VGamma,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdmittanceOperator {
    pub matrix: CMatrix,
    pub boundary: usize,
    pub kind: AdmittanceKind,
}

/// Condition estimate of one factorized block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionEntry {
    pub label: String,
    pub cond: f64,
}

pub type ConditioningLog = Vec<ConditionEntry>;

/// Innermost region of a scatterer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Core {
    Penetrable,
    Pec,
}

/// Nested contours `γ_1 … γ_p` (innermost first) and the medium inside each.
#[derive(Debug, Clone, PartialEq)]
pub struct Scatterer {
    pub position: Point2,
    /// Contours relative to `position`.
    pub local: Vec<Boundary>,
    /// Contours in scene coordinates.
    pub boundaries: Vec<Boundary>,
    /// `media[i]` fills the region between `γ_{i-1}` and `γ_i`; unused for a PEC core.
    pub media: Vec<Medium>,
    pub core: Core,
}

impl Scatterer {
    pub fn new(position: Point2, local: Vec<Boundary>, media: Vec<Medium>, core: Core) -> Result<Self> {
        if local.is_empty() || local.len() != media.len() {
            return Err(Error::invalid(format!(
                "scatterer needs one medium per contour ({} contours, {} media)",
                local.len(),
                media.len()
            )));
        }
        if core == Core::Pec && local.len() < 2 {
            return Err(Error::invalid(
                "a PEC core needs at least one enclosing penetrable layer",
            ));
        }
        for (i, m) in media.iter().enumerate() {
            if !(core == Core::Pec && i == 0) {
                m.validate()?;
            }
        }
        for i in 1..local.len() {
            let (inner, outer) = (&local[i - 1], &local[i]);
            if inner.intersects(outer) || !inner.nodes.iter().all(|&p| outer.contains(p)) {
                return Err(Error::invalid(format!("contour {} is not strictly inside contour {i}", i - 1)));
            }
        }
        let boundaries = local.iter().map(|b| b.translated(position)).collect();
        Ok(Scatterer { position, local, boundaries, media, core })
    }

    pub fn outer(&self) -> &Boundary {
        self.boundaries.last().expect("non-empty")
    }

    /// Unknowns of the single-source system for this scatterer.
    pub fn outer_unknowns(&self) -> usize {
        self.outer().len()
    }

    /// Medium just outside contour `i`.
    pub fn medium_outside(&self, i: usize, background: &Medium) -> Medium {
        if i + 1 < self.media.len() {
            self.media[i + 1]
        } else {
            *background
        }
    }

    /// Hash of everything the admittance depends on; translation invariant.
    pub fn fingerprint(&self, background: &Medium, frequency: f64, quad: &QuadratureSettings) -> String {
        let mut h = Sha256::new();
        let mut put = |x: f64| h.update(x.to_le_bytes());
        put(frequency);
        put(background.eps_r);
        put(background.mu_r);
        put(quad.outer_points as f64);
        put(quad.inner_points as f64);
        put(quad.delta);
        put(if self.core == Core::Pec { 1.0 } else { 0.0 });
        for (b, m) in self.local.iter().zip(&self.media) {
            put(b.nodes.len() as f64);
            for p in &b.nodes {
                put(p.x);
                put(p.y);
            }
            put(m.eps_r);
            put(m.mu_r);
        }
        hex::encode(h.finalize())
    }
}

fn factor(a: CMatrix, label: &str, log: &mut ConditioningLog) -> Result<Factorized> {
    let f = Factorized::new(a, label)?;
    log.push(ConditionEntry { label: label.to_string(), cond: f.cond_estimate()? });
    Ok(f)
}

fn half_u_minus_k(boundary: &Boundary, k: &CMatrix) -> CMatrix {
    assemble_u(boundary).matrix * Complex64::from(0.5) - k
}

/// `Y = L⁻¹(½U − K)` from precomputed self blocks.
fn sao_from_blocks(boundary: &Boundary, l: &CMatrix, k: &CMatrix, label: &str, log: &mut ConditioningLog) -> Result<CMatrix> {
    factor(l.clone(), label, log)?.solve(&half_u_minus_k(boundary, k))
}

fn self_blocks(boundary: &Boundary, params: &KernelParams, quad: &QuadratureSettings) -> Result<(CMatrix, CMatrix)> {
    let b = assemble_blocks(boundary, boundary, params, quad, BlockSet::LK)?;
    Ok((b.l.expect("requested"), b.k.expect("requested")))
}

/// Admittance of the contour with the interior filled by the `k_in` medium.
pub fn sao_interior(boundary: &Boundary, inner: &KernelParams, quad: &QuadratureSettings) -> Result<AdmittanceOperator> {
    let (l, k) = self_blocks(boundary, inner, quad)?;
    let m = sao_from_blocks(boundary, &l, &k, &format!("L self γ{}", boundary.id), &mut Vec::new())?;
    Ok(AdmittanceOperator { matrix: m, boundary: boundary.id, kind: AdmittanceKind::Sao })
}

/// Admittance of the equivalent problem (interior filled by the exterior medium).
pub fn sao_equivalent(boundary: &Boundary, outer: &KernelParams, quad: &QuadratureSettings) -> Result<AdmittanceOperator> {
    let mut y = sao_interior(boundary, outer, quad)?;
    y.kind = AdmittanceKind::SaoEquivalent;
    Ok(y)
}

/// `Ŷ − Y` for a homogeneous contour.
pub fn dsao_innermost(
    boundary: &Boundary,
    inner: &KernelParams,
    outer: &KernelParams,
    quad: &QuadratureSettings,
) -> Result<AdmittanceOperator> {
    let y = sao_interior(boundary, inner, quad)?;
    let y_hat = sao_equivalent(boundary, outer, quad)?;
    Ok(AdmittanceOperator {
        matrix: y_hat.matrix - y.matrix,
        boundary: boundary.id,
        kind: AdmittanceKind::Dsao,
    })
}

/// Blocks between an inner and an outer contour in the medium between them.
struct Coupling {
    l11: CMatrix,
    l12: CMatrix,
    k12: CMatrix,
    l21: CMatrix,
    l22: CMatrix,
    k22: CMatrix,
}

fn coupling(
    inner: &Boundary,
    outer: &Boundary,
    between: &KernelParams,
    quad: &QuadratureSettings,
    inner_self: Option<CMatrix>,
    outer_self: Option<(CMatrix, CMatrix)>,
) -> Result<Coupling> {
    let l11 = match inner_self {
        Some(l) => l,
        None => assemble_blocks(inner, inner, between, quad, BlockSet { l: true, ..Default::default() })?
            .l
            .expect("requested"),
    };
    let b12 = assemble_blocks(inner, outer, between, quad, BlockSet::LK)?;
    let l21 = assemble_blocks(outer, inner, between, quad, BlockSet { l: true, ..Default::default() })?
        .l
        .expect("requested");
    let (l22, k22) = match outer_self {
        Some(v) => v,
        None => self_blocks(outer, between, quad)?,
    };
    Ok(Coupling {
        l11,
        l12: b12.l.expect("requested"),
        k12: b12.k.expect("requested"),
        l21,
        l22,
        k22,
    })
}

fn penetrable_step(
    inner: &Boundary,
    inner_dsao: &CMatrix,
    outer: &Boundary,
    c: &Coupling,
    log: &mut ConditioningLog,
) -> Result<CMatrix> {
    let u1 = assemble_u(inner).matrix;
    let c_mat = u1 - &c.l11 * inner_dsao;
    let c_fac = factor(c_mat, &format!("C_γ{}", inner.id), log)?;
    // Yγ1 C⁻¹ applied to the two coupling blocks at once
    let y_c_l12 = inner_dsao * c_fac.solve(&c.l12)?;
    let y_c_k12 = inner_dsao * c_fac.solve(&c.k12)?;
    let v = &c.l22 + &c.l21 * y_c_l12;
    let r = half_u_minus_k(outer, &c.k22) - &c.l21 * y_c_k12;
    factor(v, &format!("V_γ{}", outer.id), log)?.solve(&r)
}

fn pec_step(outer: &Boundary, inner_id: usize, c: &Coupling, log: &mut ConditioningLog) -> Result<CMatrix> {
    let l11 = factor(c.l11.clone(), &format!("L self γ{inner_id} (PEC)"), log)?;
    let inv_l12 = l11.solve(&c.l12)?;
    let inv_k12 = l11.solve(&c.k12)?;
    let v = &c.l22 - &c.l21 * inv_l12;
    let r = half_u_minus_k(outer, &c.k22) + &c.l21 * inv_k12;
    factor(v, &format!("V_γ{}", outer.id), log)?.solve(&r)
}

/// Admittance of the outer contour when the inner contour carries a known
/// differential admittance and the medium between has wavenumber `between.k`.
pub fn propagate_penetrable(
    inner: &Boundary,
    inner_dsao: &AdmittanceOperator,
    outer: &Boundary,
    between: &KernelParams,
    quad: &QuadratureSettings,
) -> Result<(AdmittanceOperator, ConditioningLog)> {
    let mut log = Vec::new();
    let c = coupling(inner, outer, between, quad, None, None)?;
    let m = penetrable_step(inner, &inner_dsao.matrix, outer, &c, &mut log)?;
    Ok((AdmittanceOperator { matrix: m, boundary: outer.id, kind: AdmittanceKind::Sao }, log))
}

/// Admittance of the outer contour around a perfectly conducting inner contour.
pub fn propagate_pec(
    inner: &Boundary,
    outer: &Boundary,
    between: &KernelParams,
    quad: &QuadratureSettings,
) -> Result<(AdmittanceOperator, ConditioningLog)> {
    let mut log = Vec::new();
    let c = coupling(inner, outer, between, quad, None, None)?;
    let m = pec_step(outer, inner.id, &c, &mut log)?;
    Ok((AdmittanceOperator { matrix: m, boundary: outer.id, kind: AdmittanceKind::Pec }, log))
}

/// Result of the recursion for one scatterer.
#[derive(Debug, Clone)]
pub struct ScattererDsao {
    pub dsao: AdmittanceOperator,
    pub log: ConditioningLog,
}

fn with_layer<T>(layer: usize, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Conditioning { block, detail } => Error::Conditioning {
            block: format!("layer {layer}: {block}"),
            detail,
        },
        other => other,
    })
}

/// Differential admittance on the outermost contour, built from the core outward.
pub fn build_scatterer_dsao(
    scatterer: &Scatterer,
    background: &Medium,
    frequency: f64,
    quad: &QuadratureSettings,
) -> Result<ScattererDsao> {
    quad.validate()?;
    let consts = quad.constants();
    let bs = &scatterer.boundaries;
    let p = bs.len();
    let mut log = Vec::new();
    // Self blocks of γ_i in the medium outside it: used by Ŷ_i and again as
    // the inner self block of the next propagation step.
    let outside = |i: usize| scatterer.medium_outside(i, background).kernel(frequency, consts);

    let (mut dsao, start) = match scatterer.core {
        Core::Penetrable => {
            let inside = scatterer.media[0].kernel(frequency, consts);
            let (l_in, k_in) = with_layer(1, self_blocks(&bs[0], &inside, quad))?;
            let y = with_layer(1, sao_from_blocks(&bs[0], &l_in, &k_in, &format!("L self γ{}", bs[0].id), &mut log))?;
            let (l_out, k_out) = with_layer(1, self_blocks(&bs[0], &outside(0), quad))?;
            let y_hat = with_layer(1, sao_from_blocks(&bs[0], &l_out, &k_out, &format!("L̂ self γ{}", bs[0].id), &mut log))?;
            ((y_hat - y, l_out), 1)
        }
        Core::Pec => {
            let between = outside(0);
            let c = with_layer(2, coupling(&bs[0], &bs[1], &between, quad, None, None))?;
            let y = with_layer(2, pec_step(&bs[1], bs[0].id, &c, &mut log))?;
            let (l_out, k_out) = with_layer(2, self_blocks(&bs[1], &outside(1), quad))?;
            let y_hat = with_layer(2, sao_from_blocks(&bs[1], &l_out, &k_out, &format!("L̂ self γ{}", bs[1].id), &mut log))?;
            ((y_hat - y, l_out), 2)
        }
    };
    for i in start..p {
        let layer = i + 1;
        let between = outside(i - 1);
        let (prev_dsao, prev_self) = dsao;
        let (l22, k22) = with_layer(layer, self_blocks(&bs[i], &between, quad))?;
        let c = with_layer(layer, coupling(&bs[i - 1], &bs[i], &between, quad, Some(prev_self), Some((l22, k22))))?;
        let y = with_layer(layer, penetrable_step(&bs[i - 1], &prev_dsao, &bs[i], &c, &mut log))?;
        let (l_out, k_out) = with_layer(layer, self_blocks(&bs[i], &outside(i), quad))?;
        let y_hat = with_layer(layer, sao_from_blocks(&bs[i], &l_out, &k_out, &format!("L̂ self γ{}", bs[i].id), &mut log))?;
        dsao = (y_hat - y, l_out);
    }
    Ok(ScattererDsao {
        dsao: AdmittanceOperator {
            matrix: dsao.0,
            boundary: scatterer.outer().id,
            kind: AdmittanceKind::Dsao,
        },
        log,
    })
}

/// Shares differential admittances between scatterers with identical
/// geometry (up to translation), media and settings.
#[derive(Debug, Default)]
pub struct DsaoCache {
    entries: Mutex<HashMap<String, Arc<ScattererDsao>>>,
    builds: AtomicUsize,
}

impl DsaoCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of recursions actually run (cache misses).
    pub fn builds(&self) -> usize {
        self.builds.load(Ordering::SeqCst)
    }

    pub fn get(&self, key: &str) -> Option<Arc<ScattererDsao>> {
        self.entries.lock().expect("cache lock").get(key).cloned()
    }

    pub fn get_or_build(
        &self,
        scatterer: &Scatterer,
        background: &Medium,
        frequency: f64,
        quad: &QuadratureSettings,
    ) -> Result<Arc<ScattererDsao>> {
        let key = scatterer.fingerprint(background, frequency, quad);
        if let Some(hit) = self.get(&key) {
            return Ok(hit);
        }
        let built = Arc::new(build_scatterer_dsao(scatterer, background, frequency, quad)?);
        self.builds.fetch_add(1, Ordering::SeqCst);
        let mut map = self.entries.lock().expect("cache lock");
        Ok(map.entry(key).or_insert(built).clone())
    }
}
