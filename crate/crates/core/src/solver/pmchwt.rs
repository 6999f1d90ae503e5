//! Reference surface formulation with both current densities on every
//! interface.
//!
//! Unknowns per interface are the rooftop coefficients of the tangential
//! `E` (`e`) and triangle coefficients of `H_z` (`h`). In a homogeneous region
//! `Ω` the tested fields on its boundary are represented by
//!
//! * `E: Σ_b s_b (L h_b + K e_b)`
//! * `H: Σ_b s_b (−jωε S e_b − D h_b)`
//!
//! with `s_b = +1` when `Ω` lies inside `b` and `−1` otherwise. Equating the
//! inside and outside representations on each interface (the background
//! side carries the incident field) gives the system. A perfect conductor has
//! `e = 0` and contributes only its outside `E` equation.

use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::{elapsed, solve_system, Method, Problem, Radiator, Solution, Timings, COMPLEX_BYTES};
use crate::admittance::{ConditionEntry, Core};
use crate::assembly::{assemble_blocks, test_incident, test_incident_h, BlockSet, Blocks};
use crate::error::Result;
use crate::geometry::Boundary;
use crate::linalg::{CMatrix, CVector};
use crate::media::Medium;

struct Interface<'a> {
    boundary: &'a Boundary,
    pec: bool,
    outer: bool,
    /// Column / row offset of `h`; `e` follows at `offset + n` unless PEC.
    offset: usize,
}

struct Region {
    medium: Medium,
    /// Interface index and `s_b`.
    boundary: Vec<(usize, f64)>,
    background: bool,
}

fn layout(problem: &Problem) -> (Vec<Interface<'_>>, Vec<Region>, usize) {
    let mut faces = Vec::new();
    let mut regions = Vec::new();
    let mut background = Region { medium: problem.background, boundary: Vec::new(), background: true };
    let mut offset = 0;
    for sc in &problem.scatterers {
        let p = sc.boundaries.len();
        let first = faces.len();
        for (i, b) in sc.boundaries.iter().enumerate() {
            let pec = sc.core == Core::Pec && i == 0;
            faces.push(Interface { boundary: b, pec, outer: i + 1 == p, offset });
            offset += if pec { b.len() } else { 2 * b.len() };
        }
        for i in 0..p {
            if i == 0 && sc.core == Core::Pec {
                continue;
            }
            let mut boundary = vec![(first + i, 1.0)];
            if i > 0 {
                boundary.push((first + i - 1, -1.0));
            }
            regions.push(Region { medium: sc.media[i], boundary, background: false });
        }
        background.boundary.push((first + p - 1, -1.0));
    }
    regions.push(background);
    (faces, regions, offset)
}

/// Total unknown count, `2 Σ N` less `N` for each perfectly conducting contour.
pub fn pmchwt_unknowns(problem: &Problem) -> usize {
    layout(problem).2
}

pub fn assemble_pmchwt(problem: &Problem) -> Result<(CMatrix, CVector)> {
    let (faces, regions, total) = layout(problem);
    let quad = &problem.quadrature;
    let f = problem.frequency;
    let jobs: Vec<(usize, usize, usize)> = regions
        .iter()
        .enumerate()
        .flat_map(|(r, reg)| {
            let n = reg.boundary.len();
            (0..n).flat_map(move |a| (0..n).map(move |b| (r, a, b)))
        })
        .collect();
    let computed: Vec<Blocks> = jobs
        .par_iter()
        .map(|&(r, a, b)| {
            let reg = &regions[r];
            let (fa, fb) = (&faces[reg.boundary[a].0], &faces[reg.boundary[b].0]);
            let params = reg.medium.kernel(f, quad.constants());
            let which = BlockSet { l: true, k: !fb.pec, s: !fa.pec && !fb.pec, d: !fa.pec };
            assemble_blocks(fa.boundary, fb.boundary, &params, quad, which)
        })
        .collect::<Result<_>>()?;

    let mut matrix: CMatrix = DMatrix::zeros(total, total);
    for (&(r, a, b), blk) in jobs.iter().zip(&computed) {
        let reg = &regions[r];
        let (ia, sa) = reg.boundary[a];
        let (ib, sb) = reg.boundary[b];
        let (fa, fb) = (&faces[ia], &faces[ib]);
        let (na, nb) = (fa.boundary.len(), fb.boundary.len());
        let sign = Complex64::from(sa * sb);
        let mut put = |row: usize, col: usize, m: &CMatrix, scale: Complex64| {
            let mut v = matrix.view_mut((row, col), (na, nb));
            v += m * (sign * scale);
        };
        let one = Complex64::from(1.0);
        let (ha, ea) = (fa.offset, fa.offset + na);
        let (hb, eb) = (fb.offset, fb.offset + nb);
        put(ha, hb, blk.l.as_ref().expect("requested"), one);
        if !fb.pec {
            put(ha, eb, blk.k.as_ref().expect("requested"), one);
        }
        if !fa.pec {
            put(ea, hb, blk.d.as_ref().expect("requested"), -one);
            if !fb.pec {
                let jwe = Complex64::new(0.0, -reg.medium.omega_eps(f));
                put(ea, eb, blk.s.as_ref().expect("requested"), jwe);
            }
        }
    }

    let mut rhs = CVector::zeros(total);
    let bg = problem.background;
    let k0 = bg.wavenumber(f);
    for face in faces.iter().filter(|x| x.outer) {
        let n = face.boundary.len();
        let e = test_incident(face.boundary, &problem.wave, k0, quad)?;
        rhs.rows_mut(face.offset, n).copy_from(&e);
        if !face.pec {
            let h = test_incident_h(face.boundary, &problem.wave, k0, bg.impedance(), quad)?;
            rhs.rows_mut(face.offset + n, n).copy_from(&h);
        }
    }
    debug_assert!(regions.iter().filter(|r| r.background).count() == 1);
    Ok((matrix, rhs))
}

pub fn solve_pmchwt(problem: &Problem) -> Result<Solution> {
    problem.validate()?;
    let start = Instant::now();
    let (matrix, rhs) = assemble_pmchwt(problem)?;
    let t_asm = elapsed(start);
    let t = Instant::now();
    let (x, cond) = solve_system(&matrix, &rhs, "two-current system")?;
    let t_solve = elapsed(t);

    let (faces, _, total) = layout(problem);
    let radiators = faces
        .iter()
        .filter(|f| f.outer)
        .map(|f| {
            let n = f.boundary.len();
            Radiator {
                boundary: f.boundary.clone(),
                electric: -x.rows(f.offset, n).into_owned(),
                magnetic: (!f.pec).then(|| -x.rows(f.offset + n, n).into_owned()),
            }
        })
        .collect();
    Ok(Solution {
        method: Method::Pmchwt,
        frequency: problem.frequency,
        background: problem.background,
        wave: problem.wave,
        radiators,
        unknowns: total,
        memory_bytes: matrix.len() * COMPLEX_BYTES,
        timings: Timings { admittance: 0.0, assembly: t_asm, solve: t_solve, total: elapsed(start) },
        conditioning: if total > 0 {
            vec![ConditionEntry { label: "two-current system".into(), cond: cond.equilibrated }]
        } else {
            Vec::new()
        },
        system_condition: cond,
        admittance_builds: 0,
    })
}
