//! Fixed points of the dual map and multiplicative domain of channels given
//! by rank-one Kraus operators `E_k = u_k v_k*`.

use rand::Rng;
use serde::Serialize;

use crate::channel::{rank_one_factor, KrausChannel};
use crate::error::{Error, Result};
use crate::linalg::{eigh, null_space, vdot, vec_norm, ComplexMatrix, Tolerances, C64};
use crate::random::{complex_normal, rng};

/// `Φ(X) = Σ_k (v_k* X v_k) u_k u_k*` with unit `u_k` and `Σ_k v_k v_k* = I`.
#[derive(Debug, Clone)]
pub struct RankOneKraus {
    dim_in: usize,
    dim_out: usize,
    /// `(u_k, v_k)`
    pairs: Vec<(Vec<C64>, Vec<C64>)>,
}

impl RankOneKraus {
    pub fn new(
        dim_in: usize,
        dim_out: usize,
        pairs: Vec<(Vec<C64>, Vec<C64>)>,
        tol: &Tolerances,
    ) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::DimensionMismatch("no Kraus pairs".into()));
        }
        let mut frame = ComplexMatrix::zeros(dim_in, dim_in);
        for (k, (u, v)) in pairs.iter().enumerate() {
            if u.len() != dim_out || v.len() != dim_in {
                return Err(Error::DimensionMismatch(format!(
                    "pair {k}: u has length {}, v has length {}",
                    u.len(),
                    v.len()
                )));
            }
            let un = vec_norm(u);
            if (un - 1.0).abs() > tol.eps_herm {
                return Err(Error::Validation {
                    path: format!("pairs[{k}].u"),
                    message: format!("norm {un} is not 1"),
                });
            }
            frame += &ComplexMatrix::outer(v, v);
        }
        let residual = (&frame - &ComplexMatrix::identity(dim_in)).frobenius_norm();
        if residual > tol.eps_recon {
            return Err(Error::Validation {
                path: "pairs[].v".into(),
                message: format!("sum of v_k v_k* differs from identity by {residual:.3e}"),
            });
        }
        Ok(Self {
            dim_in,
            dim_out,
            pairs,
        })
    }

    /// Factors every Kraus operator as `u v*`; fails with `NotRankOne` otherwise.
    pub fn from_kraus(ch: &KrausChannel, tol: &Tolerances) -> Result<Self> {
        let mut pairs = Vec::new();
        for (k, e) in ch.operators().iter().enumerate() {
            if let Some(pair) = rank_one_factor(e, k, tol)? {
                pairs.push(pair);
            }
        }
        Self::new(ch.dim_in(), ch.dim_out(), pairs, tol)
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn pairs(&self) -> &[(Vec<C64>, Vec<C64>)] {
        &self.pairs
    }

    pub fn kraus_operators(&self) -> Vec<ComplexMatrix> {
        self.pairs
            .iter()
            .map(|(u, v)| ComplexMatrix::outer(u, v))
            .collect()
    }

    pub fn to_kraus(&self) -> KrausChannel {
        KrausChannel::new(self.dim_in, self.dim_out, self.kraus_operators())
            .expect("shapes checked at construction")
    }

    pub fn apply(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim_out, self.dim_out);
        for (u, v) in &self.pairs {
            let c = vdot(v, &x.mul_vec(v));
            out += &ComplexMatrix::outer(u, u).scale(c);
        }
        out
    }

    /// `Φ*(Y) = Σ_k (u_k* Y u_k) v_k v_k*`.
    pub fn dual_apply(&self, y: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim_in, self.dim_in);
        for (u, v) in &self.pairs {
            let c = vdot(u, &y.mul_vec(u));
            out += &ComplexMatrix::outer(v, v).scale(c);
        }
        out
    }
}

fn check_projection(p: &ComplexMatrix, n: usize, tol: &Tolerances) -> Result<()> {
    if p.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!(
            "projection must be {n}x{n}, got {}x{}",
            p.rows(),
            p.cols()
        )));
    }
    let idempotence = (&p.matmul(p) - p).frobenius_norm();
    let hermiticity = p.hermiticity_residual();
    if idempotence > tol.eps_recon || hermiticity > tol.eps_herm {
        return Err(Error::NotProjection {
            idempotence,
            hermiticity,
        });
    }
    Ok(())
}

/// Rayleigh quotients of a projection on `v_k` and `u_k`.
#[derive(Debug, Clone, Serialize)]
pub struct EigenEntry {
    pub k: usize,
    pub on_v: f64,
    pub on_u: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FixedPointReport {
    pub fixed: bool,
    /// `‖Φ*(P) - P‖_F`
    pub residual: f64,
    pub max_kraus_commutator: f64,
    pub commutes_with_all_kraus: bool,
    /// Filled only when `fixed`.
    pub eigen_structure: Vec<EigenEntry>,
}

/// Tests whether a projection is a fixed point of the dual map and compares
/// with the commutator criterion `[P, E_k] = 0`.
pub fn adjoint_fixed_check(
    ch: &RankOneKraus,
    p: &ComplexMatrix,
    tol: &Tolerances,
) -> Result<FixedPointReport> {
    if ch.dim_in != ch.dim_out {
        return Err(Error::DimensionMismatch(format!(
            "fixed points need a square channel, got {}->{}",
            ch.dim_in, ch.dim_out
        )));
    }
    check_projection(p, ch.dim_in, tol)?;
    let residual = (&ch.dual_apply(p) - p).frobenius_norm();
    let fixed = residual <= tol.eps_recon;
    let max_kraus_commutator = ch
        .kraus_operators()
        .iter()
        .map(|e| p.commutator(e).frobenius_norm())
        .fold(0.0, f64::max);
    let eigen_structure = if fixed {
        ch.pairs
            .iter()
            .enumerate()
            .map(|(k, (u, v))| EigenEntry {
                k,
                on_v: vdot(v, &p.mul_vec(v)).re / vdot(v, v).re,
                on_u: vdot(u, &p.mul_vec(u)).re,
            })
            .collect()
    } else {
        Vec::new()
    };
    Ok(FixedPointReport {
        fixed,
        residual,
        max_kraus_commutator,
        commutes_with_all_kraus: max_kraus_commutator <= tol.eps_comm,
        eigen_structure,
    })
}

/// Commutant `A = {A : [A, E_k] = [A, E_k*] = 0 ∀k}` and its projections.
#[derive(Debug, Clone)]
pub struct CommutantReport {
    pub basis: Vec<ComplexMatrix>,
    pub projections: Vec<ComplexMatrix>,
    pub pairwise_comm_residual: f64,
}

/// Row block of the linear map `A ↦ [A, E]` on row-major vectorized `A`.
fn commutator_rows(e: &ComplexMatrix, d: usize, out: &mut Vec<Vec<C64>>) {
    for a in 0..d {
        for b in 0..d {
            let mut row = vec![C64::new(0.0, 0.0); d * d];
            for c in 0..d {
                row[a * d + c] += e[(c, b)];
                row[c * d + b] -= e[(a, c)];
            }
            out.push(row);
        }
    }
}

fn random_hermitian_element<R: Rng>(basis: &[ComplexMatrix], rng: &mut R) -> ComplexMatrix {
    let d = basis[0].rows();
    let mut h = ComplexMatrix::zeros(d, d);
    for b in basis {
        h += &b.scale(complex_normal(rng));
    }
    &h + &h.adjoint()
}

/// Splits `range(V)` into eigenspaces of `V* H V`. Returns column groups.
fn split_range(
    v: &ComplexMatrix,
    h: &ComplexMatrix,
    tol: &Tolerances,
) -> Result<Vec<ComplexMatrix>> {
    let compressed = v.adjoint().matmul(h).matmul(v).hermitian_part();
    let dec = eigh(&compressed, tol)?;
    let rotated = v.matmul(&dec.eigenvectors);
    let w = &dec.eigenvalues;
    let gap = tol.eps_comm * (1.0 + h.frobenius_norm());
    let r = w.len();
    let mut groups = Vec::new();
    let mut start = 0;
    for k in 1..=r {
        if k == r || w[k - 1] - w[k] > gap {
            let idx: Vec<usize> = (start..k).collect();
            groups.push(rotated.select_columns(&idx));
            start = k;
        }
    }
    Ok(groups)
}

pub fn commutant_projections(
    ch: &RankOneKraus,
    seed: u64,
    tol: &Tolerances,
) -> Result<CommutantReport> {
    if ch.dim_in != ch.dim_out {
        return Err(Error::DimensionMismatch(format!(
            "commutant needs a square channel, got {}->{}",
            ch.dim_in, ch.dim_out
        )));
    }
    let d = ch.dim_in;
    let mut rows = Vec::new();
    for e in ch.kraus_operators() {
        commutator_rows(&e, d, &mut rows);
        commutator_rows(&e.adjoint(), d, &mut rows);
    }
    let constraint = ComplexMatrix::from_fn(rows.len(), d * d, |r, c| rows[r][c]);
    let top = crate::linalg::singular_values(&constraint)
        .first()
        .copied()
        .unwrap_or(0.0);
    let kernel = null_space(&constraint, tol.eps_rank * top.max(1.0))?;
    let basis: Vec<ComplexMatrix> = (0..kernel.cols())
        .map(|c| {
            let col = kernel.column(c);
            ComplexMatrix::from_fn(d, d, |i, j| col[i * d + j])
        })
        .collect();

    let mut rng = rng(seed);
    let mut ranges = vec![ComplexMatrix::identity(d)];
    if !basis.is_empty() {
        for _ in 0..basis.len().max(1) {
            let h = random_hermitian_element(&basis, &mut rng);
            let mut next = Vec::new();
            let mut split = false;
            for v in &ranges {
                if v.cols() == 1 {
                    next.push(v.clone());
                    continue;
                }
                let parts = split_range(v, &h, tol)?;
                split |= parts.len() > 1;
                next.extend(parts);
            }
            ranges = next;
            if !split {
                break;
            }
        }
    }
    let projections: Vec<ComplexMatrix> = ranges
        .iter()
        .map(|v| v.matmul(&v.adjoint()).hermitian_part())
        .collect();
    let mut pairwise_comm_residual: f64 = 0.0;
    for a in 0..projections.len() {
        for b in (a + 1)..projections.len() {
            pairwise_comm_residual = pairwise_comm_residual
                .max(projections[a].commutator(&projections[b]).frobenius_norm());
        }
    }
    Ok(CommutantReport {
        basis,
        projections,
        pairwise_comm_residual,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct MultiplicativeReport {
    pub in_domain: bool,
    pub worst_product_residual: f64,
    /// `‖(Φ*∘Φ)(P) - P‖_F`
    pub fix_of_dual_circ_phi: f64,
    pub v_eigen_ok: bool,
}

/// Tests `Φ(PB) = Φ(P)Φ(B)` and `Φ(BP) = Φ(B)Φ(P)` on every matrix unit `B`.
pub fn multiplicative_projection_check(
    ch: &RankOneKraus,
    p: &ComplexMatrix,
    tol: &Tolerances,
) -> Result<MultiplicativeReport> {
    let d = ch.dim_in;
    check_projection(p, d, tol)?;
    let phi_p = ch.apply(p);
    let mut worst: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            let b = ComplexMatrix::unit(d, i, j);
            let phi_b = ch.apply(&b);
            let left = (&ch.apply(&p.matmul(&b)) - &phi_p.matmul(&phi_b)).frobenius_norm();
            let right = (&ch.apply(&b.matmul(p)) - &phi_b.matmul(&phi_p)).frobenius_norm();
            worst = worst.max(left).max(right);
        }
    }
    let scale = p.frobenius_norm().max(1.0);
    let fix_of_dual_circ_phi = (&ch.dual_apply(&phi_p) - p).frobenius_norm();
    let v_eigen_ok = ch.pairs.iter().all(|(_, v)| {
        let nv = vdot(v, v).re;
        if nv == 0.0 {
            return true;
        }
        let pv = p.mul_vec(v);
        let lambda = vdot(v, &pv) / nv;
        let resid: Vec<C64> = pv.iter().zip(v).map(|(a, b)| a - lambda * b).collect();
        vec_norm(&resid) <= tol.eps_recon * nv.sqrt().max(1.0)
    });
    Ok(MultiplicativeReport {
        in_domain: worst <= tol.eps_recon * scale,
        worst_product_residual: worst,
        fix_of_dual_circ_phi,
        v_eigen_ok,
    })
}
