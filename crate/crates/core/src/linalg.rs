//! Dense complex LU, condition estimates and diagonal equilibration.

use nalgebra::{DMatrix, DVector, Dyn, LU};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Condition estimates above this are logged as warnings.
pub const COND_WARN: f64 = 1e12;

pub fn norm1(a: &CMatrix) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// LU factorization with partial pivoting of a square matrix.
pub struct Factorized {
    lu: LU<Complex64, Dyn, Dyn>,
    dim: usize,
    norm1: f64,
    label: String,
}

impl Factorized {
    pub fn new(a: CMatrix, label: &str) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::invalid(format!(
                "{label}: cannot factor a {}x{} matrix",
                a.nrows(),
                a.ncols()
            )));
        }
        if a.iter().any(|z| !z.is_finite()) {
            return Err(Error::Conditioning {
                block: label.to_string(),
                detail: "non-finite matrix entry".into(),
            });
        }
        let norm1 = norm1(&a);
        let lu = a.lu();
        let n = lu.u().nrows();
        let u = lu.u();
        let pivot_max = (0..n).map(|i| u[(i, i)].norm()).fold(0.0, f64::max);
        if (0..n).any(|i| u[(i, i)].norm() <= f64::EPSILON * pivot_max * 1e-3 || u[(i, i)] == Complex64::new(0.0, 0.0)) {
            return Err(Error::Conditioning {
                block: label.to_string(),
                detail: "matrix is numerically singular (zero pivot)".into(),
            });
        }
        Ok(Factorized {
            lu,
            dim: n,
            norm1,
            label: label.to_string(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn solve(&self, b: &CMatrix) -> Result<CMatrix> {
        self.lu.solve(b).ok_or_else(|| self.singular())
    }

    pub fn solve_vec(&self, b: &CVector) -> Result<CVector> {
        self.lu.solve(b).ok_or_else(|| self.singular())
    }

    pub fn inverse(&self) -> Result<CMatrix> {
        self.lu.try_inverse().ok_or_else(|| self.singular())
    }

    fn singular(&self) -> Error {
        Error::Conditioning {
            block: self.label.clone(),
            detail: "LU solve failed (singular factor)".into(),
        }
    }

    /// Solves `Aᴴ x = b` with the stored factors (`PA = LU`).
    fn solve_adjoint(&self, factors: &(CMatrix, CMatrix), b: &CVector) -> Result<CVector> {
        let (u_h, l_h) = factors;
        let y = u_h.solve_lower_triangular(b).ok_or_else(|| self.singular())?;
        let mut z = l_h.solve_upper_triangular(&y).ok_or_else(|| self.singular())?;
        self.lu.p().inv_permute_rows(&mut z);
        Ok(z)
    }

    /// Hager–Higham estimate of the 1-norm condition number.
    pub fn cond_estimate(&self) -> Result<f64> {
        let n = self.dim();
        if n == 0 {
            return Ok(1.0);
        }
        let mut x = CVector::from_element(n, Complex64::new(1.0 / n as f64, 0.0));
        let mut estimate = 0.0;
        let mut last_j = usize::MAX;
        let factors = (self.lu.u().adjoint(), self.lu.l().adjoint());
        for _ in 0..5 {
            let y = self.solve_vec(&x)?;
            estimate = y.iter().map(|z| z.norm()).sum::<f64>();
            let sign = y.map(|z| if z.norm() == 0.0 { Complex64::new(1.0, 0.0) } else { z / z.norm() });
            let z = self.solve_adjoint(&factors, &sign)?;
            let (j, zmax) = z
                .iter()
                .enumerate()
                .map(|(i, v)| (i, v.norm()))
                .fold((0, -1.0), |acc, v| if v.1 > acc.1 { v } else { acc });
            let zx = z.dotc(&x).re;
            if zmax <= zx || j == last_j {
                break;
            }
            last_j = j;
            x.fill(Complex64::new(0.0, 0.0));
            x[j] = Complex64::new(1.0, 0.0);
        }
        // Higham's alternating test vector guards against unlucky iterates.
        let alt = CVector::from_fn(n, |i, _| {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            let t = if n > 1 { i as f64 / (n - 1) as f64 } else { 0.0 };
            Complex64::new(sign * (1.0 + t), 0.0)
        });
        let alt_est = 2.0 * self.solve_vec(&alt)?.iter().map(|z| z.norm()).sum::<f64>() / (3.0 * n as f64);
        let cond = self.norm1 * estimate.max(alt_est);
        if cond > COND_WARN {
            log::warn!("{}: condition estimate {:.3e} exceeds {:.0e}", self.label, cond, COND_WARN);
        }
        Ok(cond)
    }
}

/// Exact 1-norm condition number through the explicit inverse.
pub fn cond1_exact(a: &CMatrix) -> Result<f64> {
    let f = Factorized::new(a.clone(), "cond1")?;
    Ok(norm1(a) * norm1(&f.inverse()?))
}

/// Symmetric diagonal scaling `S A S` with `S = diag(1/√|a_ii|)`.
#[derive(Debug, Clone)]
pub struct Equilibrated {
    pub matrix: CMatrix,
    pub row_scale: Vec<f64>,
    pub col_scale: Vec<f64>,
    /// True when a zero diagonal forced row-norm scaling instead.
    pub row_norm_fallback: bool,
}

pub fn diagonal_equilibrate(a: &CMatrix) -> Result<Equilibrated> {
    if !a.is_square() {
        return Err(Error::invalid("equilibration needs a square matrix"));
    }
    let n = a.nrows();
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].norm()).collect();
    let (row_scale, col_scale, fallback) = if diag.iter().all(|&d| d > 0.0 && d.is_finite()) {
        let s: Vec<f64> = diag.iter().map(|d| 1.0 / d.sqrt()).collect();
        (s.clone(), s, false)
    } else {
        log::warn!("zero diagonal entry; falling back to row-norm scaling");
        let rows: Vec<f64> = (0..n)
            .map(|i| {
                let r = a.row(i).iter().map(|z| z.norm()).fold(0.0, f64::max);
                if r > 0.0 {
                    1.0 / r
                } else {
                    1.0
                }
            })
            .collect();
        (rows, vec![1.0; n], true)
    };
    let matrix = CMatrix::from_fn(n, n, |i, j| a[(i, j)] * (row_scale[i] * col_scale[j]));
    Ok(Equilibrated {
        matrix,
        row_scale,
        col_scale,
        row_norm_fallback: fallback,
    })
}

impl Equilibrated {
    /// Solves the original system `A x = b` through the scaled matrix.
    pub fn solve(&self, b: &CVector, label: &str) -> Result<CVector> {
        let scaled_b = CVector::from_fn(b.len(), |i, _| b[i] * self.row_scale[i]);
        let y = Factorized::new(self.matrix.clone(), label)?.solve_vec(&scaled_b)?;
        Ok(CVector::from_fn(y.len(), |i, _| y[i] * self.col_scale[i]))
    }

    /// Like [`Equilibrated::solve`], also returning the 1-norm condition
    /// estimate of the scaled matrix.
    pub fn solve_with_condition(&self, b: &CVector, label: &str) -> Result<(CVector, f64)> {
        let scaled_b = CVector::from_fn(b.len(), |i, _| b[i] * self.row_scale[i]);
        let f = Factorized::new(self.matrix.clone(), label)?;
        let cond = f.cond_estimate()?;
        let y = f.solve_vec(&scaled_b)?;
        Ok((CVector::from_fn(y.len(), |i, _| y[i] * self.col_scale[i]), cond))
    }
}
