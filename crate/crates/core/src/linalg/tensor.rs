use super::matrix::{ComplexMatrix, ZERO};
use crate::error::{Error, Result};

/// Kronecker product; block `(i, j)` of the result is `a[i, j] * b`.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    ComplexMatrix::from_fn(ar * br, ac * bc, |i, j| {
        a[(i / br, j / bc)] * b[(i % br, j % bc)]
    })
}

/// Traces out the second tensor factor of an operator on `C^dim_a ⊗ C^dim_b`
/// (first factor indexed slowest).
pub fn partial_trace_second(
    x: &ComplexMatrix,
    dim_a: usize,
    dim_b: usize,
) -> Result<ComplexMatrix> {
    let n = dim_a * dim_b;
    if x.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!(
            "partial trace expects {n}x{n}, got {}x{}",
            x.rows(),
            x.cols()
        )));
    }
    Ok(ComplexMatrix::from_fn(dim_a, dim_a, |i, j| {
        let mut s = ZERO;
        for m in 0..dim_b {
            s += x[(i * dim_b + m, j * dim_b + m)];
        }
        s
    }))
}

/// Traces out the first tensor factor.
pub fn partial_trace_first(x: &ComplexMatrix, dim_a: usize, dim_b: usize) -> Result<ComplexMatrix> {
    let n = dim_a * dim_b;
    if x.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!(
            "partial trace expects {n}x{n}, got {}x{}",
            x.rows(),
            x.cols()
        )));
    }
    Ok(ComplexMatrix::from_fn(dim_b, dim_b, |m, l| {
        let mut s = ZERO;
        for i in 0..dim_a {
            s += x[(i * dim_b + m, i * dim_b + l)];
        }
        s
    }))
}
