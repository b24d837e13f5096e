//! Seeded random generators for matrices, states, POVMs and channels.
//!
//! Everything draws from a caller-supplied RNG so that runs are reproducible;
//! [`rng`] gives the ChaCha stream used throughout the crate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::channel::{HolevoChannel, HolevoPair, KrausChannel};
use crate::error::{Error, Result};
use crate::linalg::{eigh, vdot, vec_norm, ComplexMatrix, Tolerances, C64};
use crate::structure::RankOneKraus;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_normal(rng))
}

pub fn random_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<C64> {
    (0..n).map(|_| complex_normal(rng)).collect()
}

pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<C64> {
    let mut v = random_vector(rng, n);
    let norm = vec_norm(&v);
    v.iter_mut().for_each(|z| *z /= norm);
    v
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    ginibre(rng, n, n).hermitian_part()
}

/// Random `rows x cols` isometry (`rows >= cols`) by Gram-Schmidt on Gaussian columns.
pub fn random_isometry<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    assert!(rows >= cols);
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(cols);
    while basis.len() < cols {
        let mut v = random_vector(rng, rows);
        for _ in 0..2 {
            for b in &basis {
                let c = vdot(b, &v);
                for (x, y) in v.iter_mut().zip(b) {
                    *x -= c * y;
                }
            }
        }
        let n = vec_norm(&v);
        if n < 1e-8 {
            continue;
        }
        v.iter_mut().for_each(|z| *z /= n);
        basis.push(v);
    }
    let mut m = ComplexMatrix::zeros(rows, cols);
    for (j, b) in basis.iter().enumerate() {
        m.set_column(j, b);
    }
    m
}

pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    random_isometry(rng, n, n)
}

/// Random density matrix `G G* / Tr(G G*)` with `G` of the given rank.
pub fn random_state<R: Rng + ?Sized>(rng: &mut R, n: usize, rank: usize) -> ComplexMatrix {
    let g = ginibre(rng, n, rank.max(1));
    let rho = g.matmul(&g.adjoint());
    let t = rho.trace().re;
    rho.scale_re(1.0 / t)
}

/// Random POVM with `m` effects: `F_k = S^{-1/2} G_k S^{-1/2}` where the
/// `G_k` are random PSD and `S = Σ G_k`.
pub fn random_povm<R: Rng + ?Sized>(rng: &mut R, d: usize, m: usize) -> Result<Vec<ComplexMatrix>> {
    let tol = Tolerances::default();
    let raw: Vec<ComplexMatrix> = (0..m)
        .map(|_| {
            let rank = rng.random_range(d.div_ceil(m)..=d);
            let g = ginibre(rng, d, rank);
            g.matmul(&g.adjoint())
        })
        .collect();
    let mut s = ComplexMatrix::zeros(d, d);
    for g in &raw {
        s += g;
    }
    let inv_sqrt = eigh(&s, &tol)?.reassemble(|w| 1.0 / w.sqrt());
    Ok(raw
        .iter()
        .map(|g| inv_sqrt.matmul(g).matmul(&inv_sqrt).hermitian_part())
        .collect())
}

/// Random measure-and-prepare channel `C^d -> C^dim_out` with `m` terms.
pub fn random_holevo<R: Rng + ?Sized>(
    rng: &mut R,
    d: usize,
    dim_out: usize,
    m: usize,
) -> Result<HolevoChannel> {
    let effects = random_povm(rng, d, m)?;
    let states = (0..m)
        .map(|_| {
            let rank = rng.random_range(1..=dim_out);
            random_state(rng, dim_out, rank)
        })
        .collect();
    HolevoChannel::from_parts(d, dim_out, states, effects)
}

/// Random measure-and-prepare channel whose prepared states are all diagonal
/// in one random basis, so the range is commutative.
pub fn random_commutative_holevo<R: Rng + ?Sized>(
    rng: &mut R,
    d: usize,
    m: usize,
) -> Result<HolevoChannel> {
    let effects = random_povm(rng, d, m)?;
    let w = random_unitary(rng, d);
    let states = (0..m)
        .map(|_| {
            let mut p: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..1.0)).collect();
            let t: f64 = p.iter().sum();
            p.iter_mut().for_each(|x| *x /= t);
            w.matmul(&ComplexMatrix::diag_real(&p)).matmul(&w.adjoint())
        })
        .collect();
    HolevoChannel::from_parts(d, d, states, effects)
}

/// Random general channel from a random Stinespring isometry with `k` Kraus operators.
pub fn random_kraus<R: Rng + ?Sized>(
    rng: &mut R,
    d: usize,
    dim_out: usize,
    k: usize,
) -> Result<KrausChannel> {
    if dim_out * k < d {
        return Err(Error::DimensionMismatch(format!(
            "{k} Kraus operators of output dimension {dim_out} cannot be trace preserving on dimension {d}"
        )));
    }
    let v = random_isometry(rng, dim_out * k, d);
    let ops = (0..k)
        .map(|a| v.block(a * dim_out, 0, dim_out, d))
        .collect();
    KrausChannel::new(d, dim_out, ops)
}

/// Prepare-a-state terms with effects `F_k` and states `e_k e_k*`.
pub fn classical_readout(effects: Vec<ComplexMatrix>) -> Result<HolevoChannel> {
    let d = effects[0].rows();
    let m = effects.len();
    let pairs = effects
        .into_iter()
        .enumerate()
        .map(|(k, effect)| HolevoPair {
            state: ComplexMatrix::unit(m, k, k),
            effect,
        })
        .collect();
    HolevoChannel::new(d, m, pairs)
}

/// Rank-one Kraus channel on `⊕_b C^{blocks[b]}` whose `u_k`, `v_k` each lie in
/// one block, `per_block` pairs per block (`per_block >= block size`).
/// Returns the channel and the block projections.
pub fn random_block_rank_one<R: Rng + ?Sized>(
    rng: &mut R,
    blocks: &[usize],
    per_block: usize,
) -> Result<(RankOneKraus, Vec<ComplexMatrix>)> {
    let d: usize = blocks.iter().sum();
    let zero = C64::new(0.0, 0.0);
    let mut pairs = Vec::new();
    let mut projections = Vec::new();
    let mut offset = 0;
    for &size in blocks {
        if per_block < size {
            return Err(Error::DimensionMismatch(format!(
                "{per_block} pairs cannot resolve the identity on a block of size {size}"
            )));
        }
        let frame = random_isometry(rng, per_block, size);
        for k in 0..per_block {
            let mut u = vec![zero; d];
            let mut v = vec![zero; d];
            let local = random_unit_vector(rng, size);
            for i in 0..size {
                u[offset + i] = local[i];
                v[offset + i] = frame[(k, i)].conj();
            }
            pairs.push((u, v));
        }
        projections.push(ComplexMatrix::from_fn(d, d, |i, j| {
            if i == j && (offset..offset + size).contains(&i) {
                C64::new(1.0, 0.0)
            } else {
                zero
            }
        }));
        offset += size;
    }
    let ch = RankOneKraus::new(d, d, pairs, &Tolerances::default())?;
    Ok((ch, projections))
}
