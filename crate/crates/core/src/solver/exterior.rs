//! Single-source system on the outer contours.
//!
//! Each scatterer is replaced by the background medium plus an electric
//! current `J_s = Y_s e_s` on its outer contour, where `Y_s` is the
//! differential admittance. Testing the total tangential field gives
//! `U_s e_s − Σ_t L(s, t) Y_t e_t = ⟨f, E_inc⟩` for every scatterer `s`.

use std::collections::HashMap;
use std::sync::Arc;
use std::time::Instant;

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::{elapsed, solve_system, Method, Problem, Radiator, Solution, SystemCondition, Timings, COMPLEX_BYTES};
use crate::admittance::{ConditionEntry, DsaoCache, Scatterer, ScattererDsao};
use crate::assembly::{assemble_blocks, assemble_u, test_incident, BlockSet, QuadratureSettings};
use crate::error::Result;
use crate::linalg::{CMatrix, CVector};
use crate::media::{Medium, PlaneWave};

/// Dense system plus the row offset of each scatterer's block.
#[derive(Debug, Clone)]
pub struct ExteriorSystem {
    pub matrix: CMatrix,
    pub rhs: CVector,
    pub offsets: Vec<usize>,
}

/// Differential admittance per scatterer; identical templates share one build.
pub fn build_dsaos(problem: &Problem, cache: &DsaoCache) -> Result<Vec<Arc<ScattererDsao>>> {
    let (bg, f, quad) = (&problem.background, problem.frequency, &problem.quadrature);
    let keys: Vec<String> = problem.scatterers.iter().map(|s| s.fingerprint(bg, f, quad)).collect();
    let mut first: HashMap<&str, usize> = HashMap::new();
    for (i, k) in keys.iter().enumerate() {
        first.entry(k.as_str()).or_insert(i);
    }
    let mut unique: Vec<usize> = first.values().copied().collect();
    unique.sort_unstable();
    let built: Vec<Arc<ScattererDsao>> = unique
        .par_iter()
        .map(|&i| cache.get_or_build(&problem.scatterers[i], bg, f, quad))
        .collect::<Result<_>>()?;
    let by_key: HashMap<&str, Arc<ScattererDsao>> =
        unique.iter().zip(built).map(|(&i, d)| (keys[i].as_str(), d)).collect();
    Ok(keys.iter().map(|k| by_key[k.as_str()].clone()).collect())
}

pub fn assemble_exterior_system(
    scatterers: &[Scatterer],
    dsaos: &[Arc<ScattererDsao>],
    background: &Medium,
    wave: &PlaneWave,
    quad: &QuadratureSettings,
) -> Result<ExteriorSystem> {
    let params = background.kernel(wave.frequency, quad.constants());
    let sizes: Vec<usize> = scatterers.iter().map(|s| s.outer_unknowns()).collect();
    let mut offsets = Vec::with_capacity(sizes.len());
    let mut total = 0;
    for n in &sizes {
        offsets.push(total);
        total += n;
    }
    let pairs: Vec<(usize, usize)> =
        (0..scatterers.len()).flat_map(|s| (0..scatterers.len()).map(move |t| (s, t))).collect();
    let blocks: Vec<CMatrix> = pairs
        .par_iter()
        .map(|&(s, t)| -> Result<CMatrix> {
            let obs = scatterers[s].outer();
            let src = scatterers[t].outer();
            let l = assemble_blocks(obs, src, &params, quad, BlockSet { l: true, ..Default::default() })?
                .l
                .expect("requested");
            let mut b = -(l * &dsaos[t].dsao.matrix);
            if s == t {
                b += assemble_u(obs).matrix;
            }
            Ok(b)
        })
        .collect::<Result<_>>()?;
    let mut matrix = DMatrix::zeros(total, total);
    for (&(s, t), b) in pairs.iter().zip(&blocks) {
        matrix.view_mut((offsets[s], offsets[t]), (sizes[s], sizes[t])).copy_from(b);
    }
    let mut rhs = CVector::zeros(total);
    for (s, sc) in scatterers.iter().enumerate() {
        let v = test_incident(sc.outer(), wave, params.k, quad)?;
        rhs.rows_mut(offsets[s], sizes[s]).copy_from(&v);
    }
    Ok(ExteriorSystem { matrix, rhs, offsets })
}

/// Solves for the tangential field coefficients on every outer contour.
pub fn solve_exterior(system: &ExteriorSystem) -> Result<(CVector, SystemCondition)> {
    solve_system(&system.matrix, &system.rhs, "single-source system")
}

/// Full single-source pipeline: admittances, exterior system, currents.
pub fn solve_ss_sie(problem: &Problem, cache: &DsaoCache) -> Result<Solution> {
    problem.validate()?;
    let start = Instant::now();
    let builds_before = cache.builds();
    let dsaos = build_dsaos(problem, cache)?;
    let t_adm = elapsed(start);

    let t = Instant::now();
    let system = assemble_exterior_system(
        &problem.scatterers,
        &dsaos,
        &problem.background,
        &problem.wave,
        &problem.quadrature,
    )?;
    let t_asm = elapsed(t);

    let t = Instant::now();
    let (e, cond) = solve_exterior(&system)?;
    let t_solve = elapsed(t);

    let mut conditioning = Vec::new();
    if !system.rhs.is_empty() {
        conditioning.push(ConditionEntry { label: "single-source system".into(), cond: cond.equilibrated });
    }
    let mut seen: Vec<*const ScattererDsao> = Vec::new();
    let mut dsao_bytes = 0;
    for d in &dsaos {
        let ptr = Arc::as_ptr(d);
        if !seen.contains(&ptr) {
            seen.push(ptr);
            conditioning.extend(d.log.iter().cloned());
            dsao_bytes += d.dsao.matrix.len() * COMPLEX_BYTES;
        }
    }

    let radiators = problem
        .scatterers
        .iter()
        .zip(&dsaos)
        .zip(&system.offsets)
        .map(|((s, d), &off)| {
            let n = s.outer_unknowns();
            let e_s = e.rows(off, n).into_owned();
            Radiator { boundary: s.outer().clone(), electric: &d.dsao.matrix * e_s, magnetic: None }
        })
        .collect();

    Ok(Solution {
        method: Method::SsSie,
        frequency: problem.frequency,
        background: problem.background,
        wave: problem.wave,
        radiators,
        unknowns: system.rhs.len(),
        memory_bytes: system.matrix.len() * COMPLEX_BYTES + dsao_bytes,
        timings: Timings { admittance: t_adm, assembly: t_asm, solve: t_solve, total: elapsed(start) },
        conditioning,
        system_condition: cond,
        admittance_builds: cache.builds() - builds_before,
    })
}
