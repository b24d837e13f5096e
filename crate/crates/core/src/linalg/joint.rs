//! Joint diagonalization of a commuting family of normal matrices.
//!
//! The family is split into Hermitian generators `(M + M*)/2` and
//! `(M - M*)/2i`. A seeded random real combination of the generators is
//! diagonalized; every cluster of (numerically) equal eigenvalues is refined
//! with a fresh combination restricted to that cluster, up to a recursion
//! depth equal to the family size. The result is accepted only if every member
//! is diagonal in the returned basis to `eps_comm * (1 + ‖M‖_F)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::decomp::eigh;
use super::matrix::{phase_normalize, ComplexMatrix, C64};
use super::tolerances::Tolerances;
use crate::error::{Error, Result};

/// Returns a unitary `U` such that `U* M U` is diagonal for every member `M`.
///
/// Columns are phase-normalized and ordered by the position of their dominant
/// entry, so a family that is already diagonal yields the identity.
pub fn simultaneous_diagonalize(
    family: &[ComplexMatrix],
    seed: u64,
    tol: &Tolerances,
) -> Result<ComplexMatrix> {
    let first = family
        .first()
        .ok_or_else(|| Error::DimensionMismatch("empty family".into()))?;
    let n = first.rows();
    for (k, m) in family.iter().enumerate() {
        if m.shape() != (n, n) {
            return Err(Error::DimensionMismatch(format!(
                "family member {k} is {}x{}, expected {n}x{n}",
                m.rows(),
                m.cols()
            )));
        }
    }
    check_commuting(family, tol)?;

    let norms: Vec<f64> = family.iter().map(|m| m.frobenius_norm()).collect();
    let max_norm = norms.iter().copied().fold(0.0, f64::max);
    let mut generators = Vec::new();
    for m in family {
        for g in [m.hermitian_part(), m.skew_part()] {
            let gn = g.frobenius_norm();
            if gn > 1e-14 * max_norm && gn > 0.0 {
                generators.push(g.scale_re(1.0 / gn));
            }
        }
    }
    if generators.is_empty() {
        return Ok(ComplexMatrix::identity(n));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut columns = Vec::with_capacity(n);
    refine(
        &ComplexMatrix::identity(n),
        &generators,
        0,
        family.len().max(1),
        &mut rng,
        tol,
        &mut columns,
    )?;
    let u = canonical_columns(n, columns);

    let ua = u.adjoint();
    for (k, m) in family.iter().enumerate() {
        let rotated = ua.matmul(m).matmul(&u);
        let residual = rotated.offdiag_norm();
        if residual > tol.eps_comm * (1.0 + norms[k]) {
            return Err(Error::DiagonalizationFailure { index: k, residual });
        }
    }
    Ok(u)
}

/// Checks `‖[A, B]‖_F ≤ eps_comm * max_{pairs} ‖A‖_F ‖B‖_F` over all pairs and
/// reports the worst pair otherwise.
fn check_commuting(family: &[ComplexMatrix], tol: &Tolerances) -> Result<()> {
    let norms: Vec<f64> = family.iter().map(|m| m.frobenius_norm()).collect();
    let mut sorted = norms.clone();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let scale = match sorted.as_slice() {
        [a, b, ..] => a * b,
        _ => return Ok(()),
    };
    let bound = tol.eps_comm * scale;
    let mut worst: Option<(usize, usize, f64)> = None;
    for i in 0..family.len() {
        for j in (i + 1)..family.len() {
            let r = family[i].commutator(&family[j]).frobenius_norm();
            if r > bound && worst.is_none_or(|(_, _, w)| r > w) {
                worst = Some((i, j, r));
            }
        }
    }
    match worst {
        Some((first, second, r)) => Err(Error::NotCommutingFamily {
            first,
            second,
            residual: r / scale,
        }),
        None => Ok(()),
    }
}

#[allow(clippy::too_many_arguments)]
fn refine(
    basis: &ComplexMatrix,
    generators: &[ComplexMatrix],
    depth: usize,
    max_depth: usize,
    rng: &mut ChaCha8Rng,
    tol: &Tolerances,
    out: &mut Vec<Vec<C64>>,
) -> Result<()> {
    let r = basis.cols();
    if r == 1 {
        out.push(basis.column(0));
        return Ok(());
    }
    let n = basis.rows();
    let mut combo = ComplexMatrix::zeros(n, n);
    let mut weight = 0.0;
    for g in generators {
        let c: f64 = rng.random_range(-1.0..1.0);
        weight += c.abs();
        combo += &g.scale_re(c);
    }
    let compressed = basis
        .adjoint()
        .matmul(&combo)
        .matmul(basis)
        .hermitian_part();
    let dec = eigh(&compressed, tol)?;
    let rotated = basis.matmul(&dec.eigenvectors);

    let gap = tol.eps_rank * (1.0 + weight);
    let w = &dec.eigenvalues;
    let mut clusters = Vec::new();
    let mut start = 0;
    for k in 1..=r {
        if k == r || w[k - 1] - w[k] >= gap {
            clusters.push(start..k);
            start = k;
        }
    }
    if clusters.len() == 1 || depth + 1 >= max_depth {
        for k in 0..r {
            out.push(rotated.column(k));
        }
        return Ok(());
    }
    for cluster in clusters {
        let idx: Vec<usize> = cluster.collect();
        let sub = rotated.select_columns(&idx);
        refine(&sub, generators, depth + 1, max_depth, rng, tol, out)?;
    }
    Ok(())
}

fn canonical_columns(n: usize, mut columns: Vec<Vec<C64>>) -> ComplexMatrix {
    for c in columns.iter_mut() {
        phase_normalize(c);
    }
    let key = |c: &Vec<C64>| {
        let max = c.iter().map(|z| z.norm()).fold(0.0, f64::max);
        c.iter().position(|z| z.norm() >= max - 1e-8).unwrap_or(0)
    };
    let mut order: Vec<usize> = (0..columns.len()).collect();
    order.sort_by_key(|&k| key(&columns[k]));
    let mut u = ComplexMatrix::zeros(n, n);
    for (j, &k) in order.iter().enumerate() {
        u.set_column(j, &columns[k]);
    }
    u
}

#[cfg(test)]
mod tests {
    use super::simultaneous_diagonalize;
    use crate::error::Error;
    use crate::linalg::{ComplexMatrix, Tolerances, C64};
    use crate::random::{random_unitary, rng};
    use proptest::prelude::{any, prop_assert, proptest, ProptestConfig};
    use rand::Rng as _;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn assert_diagonalizes(u: &ComplexMatrix, family: &[ComplexMatrix], bound: f64) {
        let n = u.rows();
        let g = u.adjoint().matmul(u);
        assert!((&g - &ComplexMatrix::identity(n)).frobenius_norm() < 1e-12);
        for m in family {
            let r = u.adjoint().matmul(m).matmul(u);
            assert!(r.offdiag_norm() <= bound, "offdiag {}", r.offdiag_norm());
        }
    }

    #[test]
    fn diagonal_family_gives_identity() {
        let fam = vec![
            ComplexMatrix::diag_real(&[1.0, 2.0]),
            ComplexMatrix::diag_real(&[3.0, 3.0]),
        ];
        let u = simultaneous_diagonalize(&fam, 1, &tol()).unwrap();
        assert!((&u - &ComplexMatrix::identity(2)).frobenius_norm() < 1e-14);
    }

    #[test]
    fn pauli_x_with_identity() {
        let x = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let fam = vec![x.clone(), ComplexMatrix::identity(2)];
        let u = simultaneous_diagonalize(&fam, 9, &tol()).unwrap();
        assert_diagonalizes(&u, &fam, 1e-14);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for c in 0..2 {
            let col = u.column(c);
            assert!((col[0].norm() - s).abs() < 1e-14 && (col[1].norm() - s).abs() < 1e-14);
        }
    }

    #[test]
    fn qutrit_dephasing_family() {
        let d = 3;
        let fam: Vec<ComplexMatrix> = (0..d * d)
            .map(|ij| {
                let (i, j) = (ij / d, ij % d);
                if i == j {
                    ComplexMatrix::unit(d, i, i)
                } else {
                    ComplexMatrix::zeros(d, d)
                }
            })
            .collect();
        let u = simultaneous_diagonalize(&fam, 4, &tol()).unwrap();
        assert_diagonalizes(&u, &fam, 1e-12);
        assert!((&u - &ComplexMatrix::identity(d)).frobenius_norm() < 1e-12);
    }

    #[test]
    fn degenerate_joint_spectrum_is_refined() {
        // A and B share a rotated basis; each alone has a repeated eigenvalue.
        let mut r = rng(2);
        let w = random_unitary(&mut r, 4);
        let a = w
            .matmul(&ComplexMatrix::diag_real(&[1.0, 1.0, 2.0, 2.0]))
            .matmul(&w.adjoint());
        let b = w
            .matmul(&ComplexMatrix::diag_real(&[5.0, 6.0, 5.0, 6.0]))
            .matmul(&w.adjoint());
        let fam = vec![a, b];
        let u = simultaneous_diagonalize(&fam, 77, &tol()).unwrap();
        assert_diagonalizes(&u, &fam, 1e-9);
    }

    #[test]
    fn non_commuting_family_is_rejected() {
        let x = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let z = ComplexMatrix::diag_real(&[1.0, -1.0]);
        match simultaneous_diagonalize(&[x, z], 0, &tol()) {
            Err(Error::NotCommutingFamily { first, second, .. }) => {
                assert_eq!((first, second), (0, 1));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn normal_non_hermitian_family() {
        let mut r = rng(13);
        let w = random_unitary(&mut r, 5);
        let fam: Vec<ComplexMatrix> = (0..4)
            .map(|_| {
                let diag: Vec<C64> = (0..5)
                    .map(|_| C64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)))
                    .collect();
                w.matmul(&ComplexMatrix::diag(&diag)).matmul(&w.adjoint())
            })
            .collect();
        let u = simultaneous_diagonalize(&fam, 5, &tol()).unwrap();
        assert_diagonalizes(&u, &fam, 1e-9);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn prop_deterministic_and_trace_preserving(seed in any::<u64>(), n in 2usize..6, k in 1usize..5) {
            let mut r = rng(seed);
            let w = random_unitary(&mut r, n);
            let fam: Vec<ComplexMatrix> = (0..k)
                .map(|_| {
                    // Coarse spectrum so that degeneracies occur.
                    let diag: Vec<f64> = (0..n).map(|_| r.random_range(0..3) as f64).collect();
                    w.matmul(&ComplexMatrix::diag_real(&diag)).matmul(&w.adjoint())
                })
                .collect();
            let u1 = simultaneous_diagonalize(&fam, seed ^ 0x55, &tol()).unwrap();
            let u2 = simultaneous_diagonalize(&fam, seed ^ 0x55, &tol()).unwrap();
            prop_assert!(u1 == u2);
            for m in &fam {
                let rot = u1.adjoint().matmul(m).matmul(&u1);
                prop_assert!((rot.trace() - m.trace()).norm() <= 1e-12);
                prop_assert!(rot.offdiag_norm() <= tol().eps_comm * (1.0 + m.frobenius_norm()));
            }
        }
    }
}
