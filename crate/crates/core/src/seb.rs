//! Commutative-range test and certified measure-and-prepare decomposition.
//!
//! For a channel whose images `M_ij = Φ(e_i e_j*)` pairwise commute, a unitary
//! `U` diagonalizing all of them gives the separable form of the weighted Choi
//! state `σ = Σ_k p_k ρ_k ⊗ v_k v_k*` with `v_k = U e_k`, and the channel is
//! `Φ(X) = Σ_k Tr(F_k X) v_k v_k*` with
//! `F_k[i, j] = (U* M_ji U)_kk = p_k (ρ_k)_ji / √(λ_i λ_j)`.

use serde::Serialize;

use crate::channel::{
    check_weights, uniform_weights, weighted_choi, Channel, HolevoChannel, HolevoPair,
};
use crate::error::{Error, Result};
use crate::linalg::{
    lambda_min, simultaneous_diagonalize, tensor_product, ComplexMatrix, Tolerances, C64,
};

/// Largest `d_in * d_out` for which `decompose_seb` materializes `σ` during
/// certification.
pub const SIGMA_CERTIFY_MAX_DIM: usize = 16;

/// Outcome of [`range_commutativity_test`]. Matrix-unit labels are 1-based:
/// `[[i, j], [k, l]]` names the pair `Φ(e_i e_j*)`, `Φ(e_k e_l*)`.
#[derive(Debug, Clone, Serialize)]
pub struct RangeCommutativityReport {
    pub commutes: bool,
    pub worst_pair: Option<[[usize; 2]; 2]>,
    /// `‖[M_ij, M_kl]‖_F / (1 + ‖M_ij‖_F ‖M_kl‖_F)` for the worst pair.
    pub worst_residual: f64,
    /// Unnormalized `‖[M_ij, M_kl]‖_F` for the worst pair.
    pub worst_commutator_norm: f64,
    /// `max ‖M_ij* - M_ji‖_F`.
    pub adjoint_closure_residual: f64,
}

pub fn range_commutativity_test(ch: &Channel, tol: &Tolerances) -> RangeCommutativityReport {
    let d = ch.dim_in();
    let images = ch.unit_images();
    range_report(d, &images, tol)
}

fn range_report(d: usize, images: &[ComplexMatrix], tol: &Tolerances) -> RangeCommutativityReport {
    let norms: Vec<f64> = images.iter().map(ComplexMatrix::frobenius_norm).collect();
    let mut worst: Option<(usize, usize, f64, f64)> = None;
    for a in 0..images.len() {
        for b in (a + 1)..images.len() {
            let raw = images[a].commutator(&images[b]).frobenius_norm();
            let rel = raw / (1.0 + norms[a] * norms[b]);
            if worst.is_none_or(|(_, _, w, _)| rel > w) {
                worst = Some((a, b, rel, raw));
            }
        }
    }
    let mut adjoint_closure_residual: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            let r = (&images[i * d + j].adjoint() - &images[j * d + i]).frobenius_norm();
            adjoint_closure_residual = adjoint_closure_residual.max(r);
        }
    }
    let (worst_pair, worst_residual, worst_commutator_norm) = match worst {
        Some((a, b, rel, raw)) => (
            Some([[a / d + 1, a % d + 1], [b / d + 1, b % d + 1]]),
            rel,
            raw,
        ),
        None => (None, 0.0, 0.0),
    };
    RangeCommutativityReport {
        commutes: worst_residual <= tol.eps_comm,
        worst_pair,
        worst_residual,
        worst_commutator_norm,
        adjoint_closure_residual,
    }
}

/// A kept term `p_k ρ_k ⊗ v_k v_k*`; `index` is `k` (0-based) into the
/// effects and preparations of the decomposition.
#[derive(Debug, Clone, Serialize)]
pub struct SebTerm {
    pub index: usize,
    pub probability: f64,
    #[serde(skip)]
    pub state: ComplexMatrix,
    #[serde(skip)]
    pub vector: Vec<C64>,
}

/// Certified measure-and-prepare decomposition of a commutative-range channel.
#[derive(Debug, Clone)]
pub struct SebDecomposition {
    pub dim_in: usize,
    pub dim_out: usize,
    /// Columns are the orthonormal vectors `v_k`.
    pub u: ComplexMatrix,
    pub weights: Vec<f64>,
    pub terms: Vec<SebTerm>,
    /// `F_k` for every `k`, including dropped terms.
    pub effects: Vec<ComplexMatrix>,
    /// `R_k = v_k v_k*` for every `k`.
    pub preparations: Vec<ComplexMatrix>,
    pub dropped_mass: f64,
}

impl SebDecomposition {
    /// Measure-and-prepare channel `X ↦ Σ_k Tr(F_k X) R_k`.
    pub fn to_holevo(&self) -> Result<HolevoChannel> {
        let pairs = self
            .effects
            .iter()
            .zip(&self.preparations)
            .map(|(f, r)| HolevoPair {
                state: r.clone(),
                effect: f.clone(),
            })
            .collect();
        HolevoChannel::new(self.dim_in, self.dim_out, pairs)
    }

    /// `Σ_k p_k ρ_k ⊗ v_k v_k*` over the kept terms.
    pub fn separable_sigma(&self) -> ComplexMatrix {
        let n = self.dim_in * self.dim_out;
        let mut s = ComplexMatrix::zeros(n, n);
        for t in &self.terms {
            let proj = ComplexMatrix::outer(&t.vector, &t.vector);
            s += &tensor_product(&t.state, &proj).scale_re(t.probability);
        }
        s
    }

    fn reconstruct_unit(&self, i: usize, j: usize) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim_out, self.dim_out);
        for (f, r) in self.effects.iter().zip(&self.preparations) {
            // Tr(F e_i e_j*) = F[j, i]
            out += &r.scale(f[(j, i)]);
        }
        out
    }
}

/// Decomposes a channel with commutative range into measure-and-prepare form.
///
/// `weights` defaults to uniform. The result is returned only after every
/// invariant (orthonormal `v_k`, probability mass, POVM, states, separable
/// form of `σ`, reconstruction on matrix units) has been checked.
pub fn decompose_seb(
    ch: &Channel,
    weights: Option<&[f64]>,
    seed: u64,
    tol: &Tolerances,
) -> Result<SebDecomposition> {
    let d = ch.dim_in();
    let e = ch.dim_out();
    let weights = weights.map_or_else(|| uniform_weights(d), <[f64]>::to_vec);
    check_weights(&weights, d)?;
    let choi = if d * e <= SIGMA_CERTIFY_MAX_DIM {
        Some(weighted_choi(ch, &weights)?)
    } else {
        None
    };

    let images = ch.unit_images();
    let report = range_report(d, &images, tol);
    if !report.commutes {
        return Err(Error::NotCommutativeRange {
            residual: report.worst_residual,
        });
    }

    let u = simultaneous_diagonalize(&images, seed, tol)?;
    let ua = u.adjoint();
    // diag[ij][k] = (U* M_ij U)_kk
    let diag: Vec<Vec<C64>> = images
        .iter()
        .map(|m| ua.matmul(m).matmul(&u).diagonal())
        .collect();

    let mut effects = Vec::with_capacity(e);
    let mut preparations = Vec::with_capacity(e);
    let mut terms = Vec::new();
    let mut dropped_mass = 0.0;
    #[allow(clippy::needless_range_loop)]
    for k in 0..e {
        let f = ComplexMatrix::from_fn(d, d, |i, j| diag[j * d + i][k]);
        let b = ComplexMatrix::from_fn(d, d, |i, j| {
            diag[i * d + j][k] * (weights[i] * weights[j]).sqrt()
        });
        let p = b.trace().re;
        let v = u.column(k);
        if p > tol.eps_rank {
            terms.push(SebTerm {
                index: k,
                probability: p,
                state: b.scale_re(1.0 / p),
                vector: v.clone(),
            });
        } else {
            dropped_mass += p;
        }
        effects.push(f);
        preparations.push(ComplexMatrix::outer(&v, &v));
    }

    let dec = SebDecomposition {
        dim_in: d,
        dim_out: e,
        u,
        weights,
        terms,
        effects,
        preparations,
        dropped_mass,
    };
    certify(&dec, &images, choi.as_ref().map(|c| c.sigma()), tol)?;
    Ok(dec)
}

fn fail(invariant: &str, residual: f64) -> Error {
    Error::CertificationFailure {
        invariant: invariant.to_string(),
        residual,
    }
}

fn certify(
    dec: &SebDecomposition,
    images: &[ComplexMatrix],
    sigma: Option<&ComplexMatrix>,
    tol: &Tolerances,
) -> Result<()> {
    let d = dec.dim_in;
    let e = dec.dim_out;
    let unit = (&dec.u.adjoint().matmul(&dec.u) - &ComplexMatrix::identity(e)).frobenius_norm();
    if unit > tol.eps_herm {
        return Err(fail("orthonormal vectors v_k", unit));
    }
    let mass: f64 = dec.terms.iter().map(|t| t.probability).sum::<f64>() + dec.dropped_mass;
    if (mass - 1.0).abs() > tol.eps_recon {
        return Err(fail("probabilities sum to one", (mass - 1.0).abs()));
    }
    let mut total = ComplexMatrix::zeros(d, d);
    for f in &dec.effects {
        let herm = f.hermiticity_residual();
        if herm > tol.eps_herm * (1.0 + f.frobenius_norm()) {
            return Err(fail("effect is Hermitian", herm));
        }
        let lmin = lambda_min(f);
        if lmin < -tol.eps_psd {
            return Err(fail("effect is positive semidefinite", -lmin));
        }
        total += f;
    }
    let povm = (&total - &ComplexMatrix::identity(d)).frobenius_norm();
    if povm > tol.eps_recon {
        return Err(fail("effects sum to identity", povm));
    }
    for t in &dec.terms {
        let lmin = lambda_min(&t.state);
        if lmin < -tol.eps_psd {
            return Err(fail("rho_k is positive semidefinite", -lmin));
        }
        let tr = (t.state.trace() - 1.0).norm();
        if tr > tol.eps_recon {
            return Err(fail("rho_k has unit trace", tr));
        }
    }
    if let Some(sigma) = sigma {
        let gap = (sigma - &dec.separable_sigma()).frobenius_norm();
        if gap > tol.eps_recon {
            return Err(fail("sigma equals sum of p_k rho_k ⊗ v_k v_k*", gap));
        }
    }
    let recon = reconstruction_gap(dec, images);
    if recon > tol.eps_recon {
        return Err(fail("reconstruction on matrix units", recon));
    }
    Ok(())
}

fn reconstruction_gap(dec: &SebDecomposition, images: &[ComplexMatrix]) -> f64 {
    let d = dec.dim_in;
    let mut worst: f64 = 0.0;
    for (ij, m) in images.iter().enumerate() {
        let gap = (m - &dec.reconstruct_unit(ij / d, ij % d)).frobenius_norm();
        worst = worst.max(gap);
    }
    worst
}

/// Outcome of [`verify_separable_decomposition`].
#[derive(Debug, Clone, Serialize)]
pub struct SeparabilityReport {
    pub sigma_residual: f64,
    pub reconstruction_residual: f64,
    pub povm_residual: f64,
    pub psd_min: f64,
    pub ok: bool,
}

/// Independently re-checks a decomposition against its channel.
pub fn verify_separable_decomposition(
    dec: &SebDecomposition,
    ch: &Channel,
    tol: &Tolerances,
) -> Result<SeparabilityReport> {
    if ch.dim_in() != dec.dim_in || ch.dim_out() != dec.dim_out {
        return Err(Error::DimensionMismatch(format!(
            "decomposition is {}->{}, channel is {}->{}",
            dec.dim_in,
            dec.dim_out,
            ch.dim_in(),
            ch.dim_out()
        )));
    }
    let sigma = weighted_choi(ch, &dec.weights)?;
    let sigma_residual = (sigma.sigma() - &dec.separable_sigma()).frobenius_norm();
    let reconstruction_residual = reconstruction_gap(dec, &ch.unit_images());
    let mut total = ComplexMatrix::zeros(dec.dim_in, dec.dim_in);
    let mut psd_min = f64::INFINITY;
    for f in &dec.effects {
        total += f;
        psd_min = psd_min.min(lambda_min(f));
    }
    let povm_residual = (&total - &ComplexMatrix::identity(dec.dim_in)).frobenius_norm();
    let ok = sigma_residual <= tol.eps_recon
        && reconstruction_residual <= tol.eps_recon
        && povm_residual <= tol.eps_recon
        && psd_min >= -tol.eps_psd;
    Ok(SeparabilityReport {
        sigma_residual,
        reconstruction_residual,
        povm_residual,
        psd_min,
        ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{
        dephasing_channel, identity_channel, prepare_state_channel, verify_cptp, KrausChannel,
    };
    use crate::random::{random_commutative_holevo, random_holevo, rng};
    use proptest::prelude::{any, prop_assert, proptest, ProptestConfig};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn close(a: &ComplexMatrix, b: &ComplexMatrix, eps: f64) -> bool {
        (a - b).frobenius_norm() <= eps
    }

    #[test]
    fn dephasing_range_commutes() {
        let rep = range_commutativity_test(&Channel::Kraus(dephasing_channel(3)), &tol());
        assert!(rep.commutes);
        assert!(rep.worst_residual <= 1e-14);
    }

    #[test]
    fn identity_range_witness() {
        let rep = range_commutativity_test(&Channel::Kraus(identity_channel(2)), &tol());
        assert!(!rep.commutes);
        assert_eq!(rep.worst_pair, Some([[1, 2], [2, 1]]));
        // [e1 e2*, e2 e1*] = diag(1, -1)
        assert!((rep.worst_commutator_norm - 2f64.sqrt()).abs() < 1e-14);
        assert!(rep.adjoint_closure_residual < 1e-15);
    }

    #[test]
    fn prepare_state_range_commutes() {
        let rho = ComplexMatrix::from_real_rows(&[&[0.7, 0.2], &[0.2, 0.3]]);
        let rep = range_commutativity_test(&Channel::Holevo(prepare_state_channel(3, rho)), &tol());
        assert!(rep.commutes);
    }

    #[test]
    fn decompose_dephasing() {
        let dec = decompose_seb(&Channel::Kraus(dephasing_channel(2)), None, 0, &tol()).unwrap();
        assert!(close(&dec.u, &ComplexMatrix::identity(2), 1e-14));
        assert_eq!(dec.terms.len(), 2);
        for k in 0..2 {
            let ekk = ComplexMatrix::unit(2, k, k);
            assert!(close(&dec.effects[k], &ekk, 1e-14));
            assert!(close(&dec.preparations[k], &ekk, 1e-14));
            assert!((dec.terms[k].probability - 0.5).abs() < 1e-14);
            assert!(close(&dec.terms[k].state, &ekk, 1e-14));
        }
        let rep =
            verify_separable_decomposition(&dec, &Channel::Kraus(dephasing_channel(2)), &tol())
                .unwrap();
        assert!(rep.ok);
        assert!(
            rep.sigma_residual <= 1e-10
                && rep.reconstruction_residual <= 1e-10
                && rep.povm_residual <= 1e-10
        );
    }

    #[test]
    fn decompose_prepare_state() {
        let q = [0.5, 0.3, 0.2];
        let ch = Channel::Holevo(prepare_state_channel(2, ComplexMatrix::diag_real(&q)));
        let dec = decompose_seb(&ch, None, 3, &tol()).unwrap();
        for (k, &qk) in q.iter().enumerate() {
            assert!(close(
                &dec.effects[k],
                &ComplexMatrix::identity(2).scale_re(qk),
                1e-12
            ));
            assert!(close(
                &dec.preparations[k],
                &ComplexMatrix::unit(3, k, k),
                1e-12
            ));
        }
    }

    #[test]
    fn non_commutative_range_is_rejected() {
        match decompose_seb(&Channel::Kraus(identity_channel(2)), None, 0, &tol()) {
            Err(Error::NotCommutativeRange { residual }) => assert!(residual > 0.1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn mixture_of_states_is_weight_diagonal() {
        let mut r = rng(10);
        let ch = Channel::Holevo(random_commutative_holevo(&mut r, 3, 4).unwrap());
        let w = [0.2, 0.5, 0.3];
        let dec = decompose_seb(&ch, Some(&w), 1, &tol()).unwrap();
        let mut mix = ComplexMatrix::zeros(3, 3);
        for t in &dec.terms {
            mix += &t.state.scale_re(t.probability);
        }
        assert!(close(&mix, &ComplexMatrix::diag_real(&w), 1e-10));
    }

    #[test]
    fn schur_identity_links_effects_and_states() {
        let mut r = rng(11);
        let ch = Channel::Holevo(random_commutative_holevo(&mut r, 3, 5).unwrap());
        let w = [0.1, 0.6, 0.3];
        let dec = decompose_seb(&ch, Some(&w), 2, &tol()).unwrap();
        for t in &dec.terms {
            let f = &dec.effects[t.index];
            for i in 0..3 {
                for j in 0..3 {
                    let lhs = f[(j, i)] * (w[i] * w[j]).sqrt();
                    let rhs = t.state[(i, j)] * t.probability;
                    assert!((lhs - rhs).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn perturbed_effect_fails_verification() {
        let ch = Channel::Kraus(dephasing_channel(2));
        let mut dec = decompose_seb(&ch, None, 0, &tol()).unwrap();
        dec.effects[0] += &ComplexMatrix::unit(2, 0, 0).scale_re(0.01);
        let rep = verify_separable_decomposition(&dec, &ch, &tol()).unwrap();
        assert!(!rep.ok);
        assert!((rep.povm_residual - 0.01).abs() < 1e-12);
    }

    #[test]
    fn reshuffled_terms_still_verify() {
        let mut r = rng(12);
        let ch = Channel::Holevo(random_commutative_holevo(&mut r, 3, 4).unwrap());
        let mut dec = decompose_seb(&ch, None, 4, &tol()).unwrap();
        dec.terms.reverse();
        dec.effects.reverse();
        dec.preparations.reverse();
        let rep = verify_separable_decomposition(&dec, &ch, &tol()).unwrap();
        assert!(rep.ok, "{rep:?}");
    }

    #[test]
    fn decomposition_is_a_valid_channel() {
        let mut r = rng(13);
        let ch = Channel::Holevo(random_commutative_holevo(&mut r, 4, 6).unwrap());
        let dec = decompose_seb(&ch, None, 5, &tol()).unwrap();
        let h = Channel::Holevo(dec.to_holevo().unwrap());
        assert!(verify_cptp(&h, &tol()).ok);
        assert!(close(&h.superoperator(), &ch.superoperator(), 1e-9));
    }

    #[test]
    fn rank_deficient_input_drops_mass() {
        // e1 e1* ↦ e1 e1*, e2 e2* ↦ e1 e1*: the second output direction is never prepared.
        let ops = vec![ComplexMatrix::unit(2, 0, 0), ComplexMatrix::unit(2, 0, 1)];
        let ch = Channel::Kraus(KrausChannel::new(2, 2, ops).unwrap());
        let dec = decompose_seb(&ch, None, 0, &tol()).unwrap();
        assert_eq!(dec.terms.len(), 1);
        assert_eq!(dec.effects.len(), 2);
        assert!(dec.dropped_mass.abs() < 1e-12);
    }

    #[test]
    fn generic_holevo_channel_is_not_commutative() {
        let mut r = rng(14);
        let ch = Channel::Holevo(random_holevo(&mut r, 2, 3, 3).unwrap());
        assert!(!range_commutativity_test(&ch, &tol()).commutes);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn prop_action_is_seed_invariant(seed in any::<u64>(), s1 in any::<u64>(), s2 in any::<u64>(), d in 2usize..5, m in 1usize..6) {
            let mut r = rng(seed);
            let ch = Channel::Holevo(random_commutative_holevo(&mut r, d, m).unwrap());
            let a = decompose_seb(&ch, None, s1, &tol()).unwrap();
            let b = decompose_seb(&ch, None, s2, &tol()).unwrap();
            let sa = Channel::Holevo(a.to_holevo().unwrap()).superoperator();
            let sb = Channel::Holevo(b.to_holevo().unwrap()).superoperator();
            prop_assert!((&sa - &sb).frobenius_norm() <= 1e-9);
            let rep = verify_separable_decomposition(&a, &ch, &tol()).unwrap();
            prop_assert!(rep.ok);
        }
    }
}
