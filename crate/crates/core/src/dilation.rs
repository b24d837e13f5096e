//! Dilation of a measure-and-prepare channel to the predual of a positive map
//! with commutative range.
//!
//! With `E = ⊕_{k=1}^m C^d`, the isometry `U: C^d -> E` stacks the blocks
//! `F_k^{1/2}`, `Ψ(Y) = ⊕_k Tr(Y R_k) I_d` has block-scalar (hence commuting)
//! outputs, and `Φ(X) = Ψ_*(U X U*)` where `Ψ_*(Z) = Σ_k Tr(Z_kk) R_k`.

use serde::Serialize;

use crate::channel::HolevoChannel;
use crate::error::{Error, Result};
use crate::linalg::{psd_sqrt, ComplexMatrix, Tolerances, C64};

#[derive(Debug, Clone)]
pub struct DilationResult {
    pub dim_in: usize,
    pub dim_out: usize,
    /// `(d m) x d`; block `k` is `F_k^{1/2}`.
    pub isometry: ComplexMatrix,
    pub block_count: usize,
    pub preparations: Vec<ComplexMatrix>,
    pub dilation_dim: usize,
}

pub fn build_dilation(ch: &HolevoChannel, tol: &Tolerances) -> Result<DilationResult> {
    let d = ch.dim_in();
    let m = ch.pairs().len();
    let mut isometry = ComplexMatrix::zeros(d * m, d);
    for (k, f) in ch.effects().enumerate() {
        let root = psd_sqrt(f, tol).map_err(|e| match e {
            Error::NotPsd { lambda_min } => Error::NotPsdInput {
                what: format!("holevo.effects[{k}]"),
                lambda_min,
            },
            other => other,
        })?;
        isometry.set_block(k * d, 0, &root);
    }
    Ok(DilationResult {
        dim_in: d,
        dim_out: ch.dim_out(),
        isometry,
        block_count: m,
        preparations: ch.states().cloned().collect(),
        dilation_dim: d * m,
    })
}

impl DilationResult {
    /// `Ψ(Y) = ⊕_k Tr(Y R_k) I_d`.
    pub fn psi_apply(&self, y: &ComplexMatrix) -> Result<ComplexMatrix> {
        if y.shape() != (self.dim_out, self.dim_out) {
            return Err(Error::DimensionMismatch(format!(
                "psi expects {0}x{0}, got {1}x{2}",
                self.dim_out,
                y.rows(),
                y.cols()
            )));
        }
        let d = self.dim_in;
        let mut out = ComplexMatrix::zeros(self.dilation_dim, self.dilation_dim);
        for (k, r) in self.preparations.iter().enumerate() {
            let a = y.trace_product(r);
            for i in 0..d {
                out[(k * d + i, k * d + i)] = a;
            }
        }
        Ok(out)
    }

    /// `Ψ_*(Z) = Σ_k Tr(Z_kk) R_k`.
    pub fn predual_apply(&self, z: &ComplexMatrix) -> Result<ComplexMatrix> {
        if z.shape() != (self.dilation_dim, self.dilation_dim) {
            return Err(Error::DimensionMismatch(format!(
                "predual expects {0}x{0}, got {1}x{2}",
                self.dilation_dim,
                z.rows(),
                z.cols()
            )));
        }
        let d = self.dim_in;
        let mut out = ComplexMatrix::zeros(self.dim_out, self.dim_out);
        for (k, r) in self.preparations.iter().enumerate() {
            let t: C64 = (0..d).map(|i| z[(k * d + i, k * d + i)]).sum();
            out += &r.scale(t);
        }
        Ok(out)
    }

    /// `U X U*`
    pub fn embed(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if x.shape() != (self.dim_in, self.dim_in) {
            return Err(Error::DimensionMismatch(format!(
                "embed expects {0}x{0}, got {1}x{2}",
                self.dim_in,
                x.rows(),
                x.cols()
            )));
        }
        Ok(self.isometry.sandwich(x))
    }

    pub fn isometry_residual(&self) -> f64 {
        let g = self.isometry.adjoint().matmul(&self.isometry);
        (&g - &ComplexMatrix::identity(self.dim_in)).frobenius_norm()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DilationReport {
    pub isometry_residual: f64,
    pub reconstruction_residual: f64,
    pub commutativity_residual: f64,
    pub ok: bool,
}

fn hermitian_operator_basis(n: usize) -> Vec<ComplexMatrix> {
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        out.push(ComplexMatrix::unit(n, i, i));
        for j in (i + 1)..n {
            out.push(&ComplexMatrix::unit(n, i, j) + &ComplexMatrix::unit(n, j, i));
            let anti = &ComplexMatrix::unit(n, i, j) - &ComplexMatrix::unit(n, j, i);
            out.push(anti.scale(C64::new(0.0, 1.0)));
        }
    }
    out
}

pub fn verify_dilation(
    dil: &DilationResult,
    ch: &HolevoChannel,
    tol: &Tolerances,
) -> Result<DilationReport> {
    if ch.dim_in() != dil.dim_in || ch.dim_out() != dil.dim_out {
        return Err(Error::DimensionMismatch(format!(
            "dilation is {}->{}, channel is {}->{}",
            dil.dim_in,
            dil.dim_out,
            ch.dim_in(),
            ch.dim_out()
        )));
    }
    let d = dil.dim_in;
    let mut reconstruction_residual: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            let unit = ComplexMatrix::unit(d, i, j);
            let via = dil.predual_apply(&dil.embed(&unit)?)?;
            let direct = ch.apply(&unit)?;
            reconstruction_residual =
                reconstruction_residual.max((&via - &direct).frobenius_norm());
        }
    }
    let images = hermitian_operator_basis(dil.dim_out)
        .iter()
        .map(|y| dil.psi_apply(y))
        .collect::<Result<Vec<_>>>()?;
    let mut commutativity_residual: f64 = 0.0;
    for a in 0..images.len() {
        for b in (a + 1)..images.len() {
            commutativity_residual =
                commutativity_residual.max(images[a].commutator(&images[b]).frobenius_norm());
        }
    }
    let isometry_residual = dil.isometry_residual();
    Ok(DilationReport {
        isometry_residual,
        reconstruction_residual,
        commutativity_residual,
        ok: isometry_residual <= tol.eps_recon
            && reconstruction_residual <= tol.eps_recon
            && commutativity_residual <= tol.eps_comm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{HolevoChannel, HolevoPair};
    use crate::random::{ginibre, random_holevo, rng};
    use proptest::prelude::{any, prop_assert, proptest, ProptestConfig};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn close(a: &ComplexMatrix, b: &ComplexMatrix, eps: f64) -> bool {
        (a - b).frobenius_norm() <= eps
    }

    fn dephasing(d: usize) -> HolevoChannel {
        HolevoChannel::from_parts(
            d,
            d,
            (0..d).map(|k| ComplexMatrix::unit(d, k, k)).collect(),
            (0..d).map(|k| ComplexMatrix::unit(d, k, k)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn dephasing_isometry_blocks() {
        let dil = build_dilation(&dephasing(2), &tol()).unwrap();
        let expected =
            ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, 0.0], &[0.0, 0.0], &[0.0, 1.0]]);
        assert!(close(&dil.isometry, &expected, 1e-15));
        assert!(dil.isometry_residual() < 1e-15);
        assert_eq!((dil.block_count, dil.dilation_dim), (2, 4));
    }

    #[test]
    fn single_identity_effect_is_trivial() {
        let rho = ComplexMatrix::diag_real(&[0.25, 0.75]);
        let h = HolevoChannel::new(
            3,
            2,
            vec![HolevoPair {
                state: rho,
                effect: ComplexMatrix::identity(3),
            }],
        )
        .unwrap();
        let dil = build_dilation(&h, &tol()).unwrap();
        assert!(close(&dil.isometry, &ComplexMatrix::identity(3), 1e-15));
    }

    #[test]
    fn random_isometry_residual() {
        let mut r = rng(30);
        let h = random_holevo(&mut r, 3, 2, 4).unwrap();
        let dil = build_dilation(&h, &tol()).unwrap();
        assert!(dil.isometry_residual() <= 1e-12);
        assert!(verify_dilation(&dil, &h, &tol()).unwrap().ok);
    }

    #[test]
    fn psi_examples() {
        let dil = build_dilation(&dephasing(2), &tol()).unwrap();
        assert!(close(
            &dil.psi_apply(&ComplexMatrix::identity(2)).unwrap(),
            &ComplexMatrix::identity(4),
            1e-15
        ));
        let out = dil.psi_apply(&ComplexMatrix::unit(2, 0, 0)).unwrap();
        assert!(close(
            &out,
            &ComplexMatrix::diag_real(&[1.0, 1.0, 0.0, 0.0]),
            1e-15
        ));
    }

    #[test]
    fn psi_range_commutes() {
        let mut r = rng(31);
        let h = random_holevo(&mut r, 2, 3, 3).unwrap();
        let dil = build_dilation(&h, &tol()).unwrap();
        let a = dil.psi_apply(&ginibre(&mut r, 3, 3)).unwrap();
        let b = dil.psi_apply(&ginibre(&mut r, 3, 3)).unwrap();
        assert!(a.commutator(&b).frobenius_norm() <= 1e-13);
    }

    #[test]
    fn predual_of_identity() {
        let mut r = rng(32);
        let h = random_holevo(&mut r, 3, 2, 4).unwrap();
        let dil = build_dilation(&h, &tol()).unwrap();
        let out = dil
            .predual_apply(&ComplexMatrix::identity(dil.dilation_dim))
            .unwrap();
        let mut expected = ComplexMatrix::zeros(2, 2);
        for rk in h.states() {
            expected += &rk.scale_re(3.0);
        }
        assert!(close(&out, &expected, 1e-13));
    }

    #[test]
    fn mismatched_channel_fails() {
        let mut r = rng(33);
        let h = random_holevo(&mut r, 2, 2, 3).unwrap();
        let dil = build_dilation(&h, &tol()).unwrap();
        let rep = verify_dilation(&dil, &dephasing(2), &tol()).unwrap();
        assert!(!rep.ok);
        assert!(rep.reconstruction_residual > 0.01);
    }

    #[test]
    fn negative_effect_is_reported() {
        let h = HolevoChannel::from_parts(
            2,
            1,
            vec![ComplexMatrix::identity(1), ComplexMatrix::identity(1)],
            vec![
                ComplexMatrix::diag_real(&[1.5, 1.0]),
                ComplexMatrix::diag_real(&[-0.5, 0.0]),
            ],
        )
        .unwrap();
        match build_dilation(&h, &tol()) {
            Err(Error::NotPsdInput { what, lambda_min }) => {
                assert_eq!(what, "holevo.effects[1]");
                assert!((lambda_min + 0.5).abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn prop_reconstruction_and_adjointness(seed in any::<u64>(), d in 1usize..5, e in 1usize..4, m in 1usize..5) {
            let mut r = rng(seed);
            let h = random_holevo(&mut r, d, e, m).unwrap();
            let dil = build_dilation(&h, &tol()).unwrap();
            let rep = verify_dilation(&dil, &h, &tol()).unwrap();
            prop_assert!(rep.ok, "{:?}", rep);
            let x = ginibre(&mut r, d, d);
            let via = dil.predual_apply(&dil.embed(&x).unwrap()).unwrap();
            prop_assert!((&via - &h.apply(&x).unwrap()).frobenius_norm() <= 1e-10 * (1.0 + x.frobenius_norm()));
            let z = ginibre(&mut r, d * m, d * m);
            let y = ginibre(&mut r, e, e);
            let lhs = dil.predual_apply(&z).unwrap().trace_product(&y);
            let rhs = z.trace_product(&dil.psi_apply(&y).unwrap());
            prop_assert!((lhs - rhs).norm() <= 1e-10);
        }
    }
}
