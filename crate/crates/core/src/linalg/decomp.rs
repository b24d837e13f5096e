//! Hermitian eigendecomposition, PSD square roots and singular-value helpers.
//!
//! The Hermitian eigensolver and the SVD are delegated to `nalgebra`; every
//! result is post-checked against the residual bounds below.

use std::cmp::Ordering;

use nalgebra::{SymmetricEigen, SVD};
use serde::Serialize;

use super::matrix::{phase_normalize, ComplexMatrix, C64};
use super::tolerances::Tolerances;
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 10_000;

/// Eigenvalues in descending order with unitary eigenvector columns.
#[derive(Debug, Clone)]
pub struct EigDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl EigDecomposition {
    /// `V diag(f(w)) V*`
    pub fn reassemble(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let v = &self.eigenvectors;
        let n = v.rows();
        let k = v.cols();
        let fw: Vec<f64> = self.eigenvalues.iter().map(|&w| f(w)).collect();
        ComplexMatrix::from_fn(n, n, |i, j| {
            let mut s = C64::new(0.0, 0.0);
            for c in 0..k {
                s += v[(i, c)] * v[(j, c)].conj() * fw[c];
            }
            s
        })
    }

    pub fn eigenvector(&self, k: usize) -> Vec<C64> {
        self.eigenvectors.column(k)
    }
}

fn herm_scale(a: &ComplexMatrix) -> f64 {
    1.0 + a.frobenius_norm()
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Eigenvalues come out descending; within a cluster of values closer than
/// `eps_herm * (1 + ‖a‖_F)` the eigenvectors are ordered lexicographically
/// (descending) after rotating each so its first nonzero entry is real positive.
pub fn eigh(a: &ComplexMatrix, tol: &Tolerances) -> Result<EigDecomposition> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigh expects a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let scale = herm_scale(a);
    let residual = a.hermiticity_residual();
    if residual > tol.eps_herm * scale {
        return Err(Error::NotHermitian { residual });
    }
    let n = a.rows();
    let sym = a.hermitian_part();
    let eig = SymmetricEigen::try_new(sym.to_nalgebra(), f64::EPSILON, MAX_SWEEPS)
        .ok_or_else(|| Error::NumericalFailure("Hermitian eigensolver did not converge".into()))?;

    let mut pairs: Vec<(f64, Vec<C64>)> = (0..n)
        .map(|k| {
            let mut v: Vec<C64> = eig.eigenvectors.column(k).iter().copied().collect();
            phase_normalize(&mut v);
            (eig.eigenvalues[k], v)
        })
        .collect();
    pairs.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap_or(Ordering::Equal));

    let tie = tol.eps_herm * scale;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && pairs[end - 1].0 - pairs[end].0 <= tie {
            end += 1;
        }
        pairs[start..end].sort_by(|x, y| lex_cmp(&y.1, &x.1));
        start = end;
    }

    let mut vecs = ComplexMatrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (k, (w, v)) in pairs.into_iter().enumerate() {
        values.push(w);
        vecs.set_column(k, &v);
    }
    let dec = EigDecomposition {
        eigenvalues: values,
        eigenvectors: vecs,
    };

    let recon = {
        let av = a.matmul(&dec.eigenvectors);
        let vw = ComplexMatrix::from_fn(n, n, |i, j| dec.eigenvectors[(i, j)] * dec.eigenvalues[j]);
        (&av - &vw).frobenius_norm()
    };
    let unit = {
        let g = dec.eigenvectors.adjoint().matmul(&dec.eigenvectors);
        (&g - &ComplexMatrix::identity(n)).frobenius_norm()
    };
    if recon > tol.eps_herm * scale || unit > tol.eps_herm {
        return Err(Error::NumericalFailure(format!(
            "eigendecomposition residuals too large (reconstruction {recon:.3e}, unitarity {unit:.3e})"
        )));
    }
    Ok(dec)
}

fn lex_cmp(a: &[C64], b: &[C64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.re.partial_cmp(&y.re).unwrap_or(Ordering::Equal) {
            Ordering::Equal => {}
            o => return o,
        }
        match x.im.partial_cmp(&y.im).unwrap_or(Ordering::Equal) {
            Ordering::Equal => {}
            o => return o,
        }
    }
    Ordering::Equal
}

/// Eigenvalues of the Hermitian part of a square matrix, descending.
pub fn hermitian_eigenvalues(a: &ComplexMatrix) -> Vec<f64> {
    let mut w: Vec<f64> = a
        .hermitian_part()
        .to_nalgebra()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .collect();
    w.sort_by(|x, y| y.partial_cmp(x).unwrap_or(Ordering::Equal));
    w
}

/// Smallest eigenvalue of the Hermitian part.
pub fn lambda_min(a: &ComplexMatrix) -> f64 {
    hermitian_eigenvalues(a).last().copied().unwrap_or(0.0)
}

/// PSD square root. Eigenvalues in `[-eps_psd, 0)` are clamped to zero.
pub fn psd_sqrt(a: &ComplexMatrix, tol: &Tolerances) -> Result<ComplexMatrix> {
    let dec = eigh(a, tol)?;
    let lmin = dec.eigenvalues.last().copied().unwrap_or(0.0);
    if lmin < -tol.eps_psd {
        return Err(Error::NotPsd { lambda_min: lmin });
    }
    Ok(dec.reassemble(|w| w.max(0.0).sqrt()))
}

/// Singular values, descending.
pub fn singular_values(a: &ComplexMatrix) -> Vec<f64> {
    let mut s: Vec<f64> = SVD::new(a.to_nalgebra(), false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    s.sort_by(|x, y| y.partial_cmp(x).unwrap_or(Ordering::Equal));
    s
}

/// Numerical rank: singular values above `rel_tol * σ_max`.
pub fn numerical_rank(a: &ComplexMatrix, rel_tol: f64) -> usize {
    let s = singular_values(a);
    let top = s.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return 0;
    }
    s.iter().filter(|&&x| x > rel_tol * top).count()
}

/// Orthonormal basis of `{x : A x = 0}` as columns, using singular values
/// below `abs_tol` as the cutoff.
pub fn null_space(a: &ComplexMatrix, abs_tol: f64) -> Result<ComplexMatrix> {
    let (m, n) = a.shape();
    // Pad wide inputs with zero rows so the SVD returns a full right basis.
    let padded = if m < n {
        let mut p = ComplexMatrix::zeros(n, n);
        p.set_block(0, 0, a);
        p
    } else {
        a.clone()
    };
    let svd = SVD::try_new(padded.to_nalgebra(), false, true, f64::EPSILON, MAX_SWEEPS)
        .ok_or_else(|| Error::NumericalFailure("SVD did not converge".into()))?;
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::NumericalFailure("SVD returned no right vectors".into()))?;
    let mut cols: Vec<Vec<C64>> = Vec::new();
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s <= abs_tol {
            // Rows of V^H are conjugated right singular vectors.
            let mut v: Vec<C64> = (0..n).map(|j| v_t[(k, j)].conj()).collect();
            phase_normalize(&mut v);
            cols.push(v);
        }
    }
    let mut out = ComplexMatrix::zeros(n, cols.len());
    for (k, c) in cols.iter().enumerate() {
        out.set_column(k, c);
    }
    Ok(out)
}

/// Norm and positivity summary of a matrix.
#[derive(Debug, Clone, Serialize)]
pub struct MatrixReport {
    pub frobenius: f64,
    pub trace_norm: f64,
    pub operator_norm: f64,
    /// Smallest eigenvalue of the Hermitian part; `None` for non-square input.
    pub lambda_min: Option<f64>,
    pub is_hermitian: bool,
    pub is_psd: bool,
}

pub fn norms_and_psd_check(a: &ComplexMatrix, tol: &Tolerances) -> MatrixReport {
    let s = singular_values(a);
    let trace_norm = s.iter().sum();
    let operator_norm = s.first().copied().unwrap_or(0.0);
    let (lmin, is_hermitian) = if a.is_square() {
        (
            Some(lambda_min(a)),
            a.hermiticity_residual() <= tol.eps_herm * herm_scale(a),
        )
    } else {
        (None, false)
    };
    MatrixReport {
        frobenius: a.frobenius_norm(),
        trace_norm,
        operator_norm,
        lambda_min: lmin,
        is_hermitian,
        is_psd: is_hermitian && lmin.is_some_and(|l| l >= -tol.eps_psd),
    }
}

/// Trace norm (sum of singular values).
pub fn trace_norm(a: &ComplexMatrix) -> f64 {
    singular_values(a).iter().sum()
}
