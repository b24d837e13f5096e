//! Synthesis of a measure-and-prepare channel with a prescribed null space.
//!
//! Given a self-adjoint subspace `N` of trace-zero operators, take a Hermitian
//! basis `{G_1 = I, G_2, ..., G_m}` of the annihilator `N^⊥`, normalize
//! `‖G_k‖ = 1` for `k ≥ 2`, and set
//!
//! ```text
//! F̃_k = I + G_k / 2,   F_k = 2^{-k} F̃_k  (k ≥ 2),   F_1 = I - Σ_{k≥2} F_k.
//! ```
//!
//! The channel `X ↦ Σ_k Tr(F_k X) e_k e_k*` on `C^m` vanishes exactly on `N`.

use serde::Serialize;

use crate::channel::{HolevoChannel, HolevoPair};
use crate::error::{Error, Result};
use crate::linalg::{
    lambda_min, numerical_rank, singular_values, trace_norm, ComplexMatrix, Tolerances, C64,
};

/// A complex subspace of `d x d` operators given by a spanning set.
#[derive(Debug, Clone)]
pub struct SubspaceSpec {
    dim: usize,
    generators: Vec<ComplexMatrix>,
    hermitian_basis: Vec<ComplexMatrix>,
}

fn vectorize(ms: &[ComplexMatrix], d: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d * d, ms.len(), |r, c| ms[c][(r / d, r % d)])
}

fn real_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.hs_inner(b).re
}

/// Appends `cand` to the orthonormal list `basis` (real Hilbert-Schmidt inner
/// product) when its residual after two Gram-Schmidt passes exceeds
/// `threshold * ‖cand‖`.
fn gram_schmidt_push(basis: &mut Vec<ComplexMatrix>, cand: &ComplexMatrix, threshold: f64) -> bool {
    let n0 = cand.frobenius_norm();
    if n0 == 0.0 {
        return false;
    }
    let mut v = cand.clone();
    for _ in 0..2 {
        for b in basis.iter() {
            let c = real_inner(b, &v);
            v -= &b.scale_re(c);
        }
    }
    let n = v.frobenius_norm();
    if n <= threshold * n0 {
        return false;
    }
    basis.push(v.scale_re(1.0 / n));
    true
}

impl SubspaceSpec {
    /// Validates trace-zero generators and self-adjointness of their span.
    pub fn new(dim: usize, generators: Vec<ComplexMatrix>, tol: &Tolerances) -> Result<Self> {
        for (k, g) in generators.iter().enumerate() {
            if g.shape() != (dim, dim) {
                return Err(Error::DimensionMismatch(format!(
                    "generator {k} is {}x{}, expected {dim}x{dim}",
                    g.rows(),
                    g.cols()
                )));
            }
            let tr = g.trace().norm();
            if tr > tol.eps_recon {
                return Err(Error::NotTraceZero {
                    index: k,
                    trace: tr,
                });
            }
        }
        if !generators.is_empty() {
            let rank = numerical_rank(&vectorize(&generators, dim), tol.eps_rank);
            let mut closure = generators.clone();
            closure.extend(generators.iter().map(ComplexMatrix::adjoint));
            let closure_rank = numerical_rank(&vectorize(&closure, dim), tol.eps_rank);
            if closure_rank > rank {
                return Err(Error::NotSelfAdjoint { rank, closure_rank });
            }
        }
        let mut hermitian_basis = Vec::new();
        for g in &generators {
            gram_schmidt_push(&mut hermitian_basis, &g.hermitian_part(), tol.eps_rank);
            gram_schmidt_push(&mut hermitian_basis, &g.skew_part(), tol.eps_rank);
        }
        Ok(Self {
            dim,
            generators,
            hermitian_basis,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[ComplexMatrix] {
        &self.generators
    }

    /// Complex dimension of the span.
    pub fn subspace_dim(&self) -> usize {
        self.hermitian_basis.len()
    }

    /// Hilbert-Schmidt orthonormal Hermitian basis of the span.
    pub fn hermitian_basis(&self) -> &[ComplexMatrix] {
        &self.hermitian_basis
    }
}

/// Hermitian basis of all `d x d` Hermitian matrices: `E_ii`, `(E_ij + E_ji)/√2`, `i(E_ij - E_ji)/√2`.
fn standard_hermitian_basis(d: usize) -> Vec<ComplexMatrix> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(d * d);
    for i in 0..d {
        out.push(ComplexMatrix::unit(d, i, i));
    }
    for i in 0..d {
        for j in (i + 1)..d {
            let sym = &ComplexMatrix::unit(d, i, j) + &ComplexMatrix::unit(d, j, i);
            out.push(sym.scale_re(s));
            let anti = &ComplexMatrix::unit(d, i, j) - &ComplexMatrix::unit(d, j, i);
            out.push(anti.scale(C64::new(0.0, s)));
        }
    }
    out
}

fn operator_norm(a: &ComplexMatrix) -> f64 {
    singular_values(a).first().copied().unwrap_or(0.0)
}

/// Hermitian basis `{I, G_2, ..., G_m}` of `N^⊥ = {Y : Tr(XY) = 0 ∀X ∈ N}`,
/// `m = d² - dim N`. The `G_k` (k ≥ 2) are Hilbert-Schmidt orthogonal to `I`
/// and to each other, with operator norm 1.
pub fn orthocomplement(spec: &SubspaceSpec, tol: &Tolerances) -> Result<Vec<ComplexMatrix>> {
    let d = spec.dim();
    let expected = d * d - spec.subspace_dim();
    let mut work: Vec<ComplexMatrix> = spec.hermitian_basis().to_vec();
    let n_len = work.len();
    let identity = ComplexMatrix::identity(d);
    if !gram_schmidt_push(&mut work, &identity, tol.eps_rank) {
        return Err(Error::NumericalFailure(
            "identity lies in the subspace; generators are not trace-zero".into(),
        ));
    }
    for cand in standard_hermitian_basis(d) {
        if work.len() - n_len == expected {
            break;
        }
        // Candidates are unit vectors, so a fixed cutoff keeps pivoting stable.
        gram_schmidt_push(&mut work, &cand, 1e-6);
    }
    let found = work.len() - n_len;
    if found != expected {
        return Err(Error::NumericalFailure(format!(
            "complement has dimension {found}, expected {expected}"
        )));
    }
    let mut out = vec![identity];
    for g in &work[n_len + 1..] {
        // Tr(XY) = <X, Y>_HS for Hermitian X ∈ N, so orthogonality to the
        // Hermitian basis of N is exactly the annihilator condition.
        let norm = operator_norm(g);
        out.push(g.hermitian_part().scale_re(1.0 / norm));
    }
    Ok(out)
}

/// Effects `F_1..F_m` built from a basis starting with the identity.
#[derive(Debug, Clone)]
pub struct EffectSynthesis {
    pub effects: Vec<ComplexMatrix>,
    pub f_tilde: Vec<ComplexMatrix>,
    pub lambda_min_f1: f64,
}

pub fn build_effects(basis: &[ComplexMatrix], tol: &Tolerances) -> Result<EffectSynthesis> {
    let first = basis
        .first()
        .ok_or_else(|| Error::DimensionMismatch("empty basis".into()))?;
    let d = first.rows();
    let identity = ComplexMatrix::identity(d);
    let gap = (first - &identity).frobenius_norm();
    if gap > tol.eps_herm {
        return Err(Error::CertificationFailure {
            invariant: "basis starts with the identity".into(),
            residual: gap,
        });
    }
    let mut f_tilde = Vec::with_capacity(basis.len().saturating_sub(1));
    let mut effects = vec![identity.clone()];
    let mut weight = 1.0;
    for g in &basis[1..] {
        weight *= 0.5;
        let ft = &identity + &g.scale_re(0.5);
        // F_k = 2^{-k} F̃_k with k counted from 1, so the first extra effect gets 1/4.
        let f = ft.scale_re(weight * 0.5);
        effects[0] -= &f;
        effects.push(f);
        f_tilde.push(ft);
    }
    let lambda_min_f1 = lambda_min(&effects[0]);
    if lambda_min_f1 < 0.25 - tol.eps_psd {
        return Err(Error::CertificationFailure {
            invariant: "lambda_min(F_1) >= 1/4".into(),
            residual: 0.25 - lambda_min_f1,
        });
    }
    Ok(EffectSynthesis {
        effects,
        f_tilde,
        lambda_min_f1,
    })
}

/// A channel whose null space is a prescribed subspace.
#[derive(Debug, Clone)]
pub struct NullspaceChannel {
    /// `C^d -> C^m`, pairs `(e_k e_k*, F_k)`.
    pub channel: HolevoChannel,
    pub effects_basis: Vec<ComplexMatrix>,
    pub f_tilde: Vec<ComplexMatrix>,
    pub lambda_min_f1: f64,
}

pub fn synthesize_channel(spec: &SubspaceSpec, tol: &Tolerances) -> Result<NullspaceChannel> {
    let basis = orthocomplement(spec, tol)?;
    let synth = build_effects(&basis, tol)?;
    let m = synth.effects.len();
    let pairs = synth
        .effects
        .into_iter()
        .enumerate()
        .map(|(k, effect)| HolevoPair {
            state: ComplexMatrix::unit(m, k, k),
            effect,
        })
        .collect();
    Ok(NullspaceChannel {
        channel: HolevoChannel::new(spec.dim(), m, pairs)?,
        effects_basis: basis,
        f_tilde: synth.f_tilde,
        lambda_min_f1: synth.lambda_min_f1,
    })
}

/// Outcome of [`verify_nullspace`].
#[derive(Debug, Clone, Serialize)]
pub struct NullspaceReport {
    /// `‖Φ(N_j)‖_1 / (1 + ‖N_j‖_1)` per generator.
    pub generator_residuals: Vec<f64>,
    pub rank_of_effect_map: usize,
    pub expected_rank: usize,
    pub ok: bool,
}

/// Rank of `X ↦ (Tr(F_k X))_k` on all `d x d` operators.
pub fn effect_map_rank<'a>(
    effects: impl IntoIterator<Item = &'a ComplexMatrix>,
    d: usize,
    tol: &Tolerances,
) -> usize {
    let effects: Vec<&ComplexMatrix> = effects.into_iter().collect();
    let map = ComplexMatrix::from_fn(effects.len(), d * d, |k, c| effects[k][(c % d, c / d)]);
    numerical_rank(&map, tol.eps_rank)
}

pub fn verify_nullspace(
    out: &NullspaceChannel,
    spec: &SubspaceSpec,
    tol: &Tolerances,
) -> Result<NullspaceReport> {
    let d = spec.dim();
    if out.channel.dim_in() != d {
        return Err(Error::DimensionMismatch(format!(
            "channel input dimension {} vs subspace dimension {d}",
            out.channel.dim_in()
        )));
    }
    let mut generator_residuals = Vec::with_capacity(spec.generators().len());
    let mut gens_ok = true;
    for g in spec.generators() {
        let image = out.channel.apply(g)?;
        let rel = trace_norm(&image) / (1.0 + trace_norm(g));
        gens_ok &= rel <= tol.eps_recon;
        generator_residuals.push(rel);
    }
    let rank = effect_map_rank(out.channel.effects(), d, tol);
    let expected = d * d - spec.subspace_dim();
    Ok(NullspaceReport {
        generator_residuals,
        rank_of_effect_map: rank,
        expected_rank: expected,
        ok: gens_ok && rank == expected,
    })
}
