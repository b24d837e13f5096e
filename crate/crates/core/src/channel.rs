//! Channel data model: Kraus, measure-and-prepare (Holevo) and weighted Choi
//! representations, conversions between them and CPTP verification.
//!
//! Choi matrices put the input factor first (slowest index):
//! `σ = Σ_ij √(λ_i λ_j) e_i e_j* ⊗ Φ(e_i e_j*)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    eigh, lambda_min, phase_normalize, singular_values, tensor_product, vdot, vec_norm,
    ComplexMatrix, Tolerances, C64,
};

/// Default upper bound on the length of a Kraus sequence.
pub const DEFAULT_KRAUS_CAP: usize = 4096;

fn expect_shape(what: &str, m: &ComplexMatrix, rows: usize, cols: usize) -> Result<()> {
    if m.shape() != (rows, cols) {
        return Err(Error::DimensionMismatch(format!(
            "{what}: expected {rows}x{cols}, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    Ok(())
}

/// `Φ(X) = Σ_k E_k X E_k*`.
///
/// Construction checks shapes only; trace preservation is reported by
/// [`verify_cptp`] so that non-TP inputs can still be inspected.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<ComplexMatrix>,
}

impl KrausChannel {
    pub fn new(dim_in: usize, dim_out: usize, kraus: Vec<ComplexMatrix>) -> Result<Self> {
        Self::with_cap(dim_in, dim_out, kraus, DEFAULT_KRAUS_CAP)
    }

    pub fn with_cap(
        dim_in: usize,
        dim_out: usize,
        kraus: Vec<ComplexMatrix>,
        cap: usize,
    ) -> Result<Self> {
        if kraus.is_empty() || kraus.len() > cap {
            return Err(Error::KrausCount {
                len: kraus.len(),
                cap,
            });
        }
        for (k, e) in kraus.iter().enumerate() {
            expect_shape(&format!("kraus[{k}]"), e, dim_out, dim_in)?;
        }
        Ok(Self {
            dim_in,
            dim_out,
            kraus,
        })
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn apply(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        expect_shape("input", x, self.dim_in, self.dim_in)?;
        let mut out = ComplexMatrix::zeros(self.dim_out, self.dim_out);
        for e in &self.kraus {
            out += &e.sandwich(x);
        }
        Ok(out)
    }

    /// `Φ*(Y) = Σ_k E_k* Y E_k`.
    pub fn dual_apply(&self, y: &ComplexMatrix) -> Result<ComplexMatrix> {
        expect_shape("dual input", y, self.dim_out, self.dim_out)?;
        let mut out = ComplexMatrix::zeros(self.dim_in, self.dim_in);
        for e in &self.kraus {
            out += &e.adjoint().matmul(y).matmul(e);
        }
        Ok(out)
    }

    /// `Σ_k E_k* E_k`
    pub fn gram_sum(&self) -> ComplexMatrix {
        let mut s = ComplexMatrix::zeros(self.dim_in, self.dim_in);
        for e in &self.kraus {
            s += &e.adjoint().matmul(e);
        }
        s
    }
}

/// One measure-and-prepare term: prepare `state` with probability `Tr(effect X)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HolevoPair {
    pub state: ComplexMatrix,
    pub effect: ComplexMatrix,
}

/// `Φ(X) = Σ_k R_k Tr(F_k X)` with states `R_k` and a POVM `{F_k}`.
#[derive(Debug, Clone, PartialEq)]
pub struct HolevoChannel {
    dim_in: usize,
    dim_out: usize,
    pairs: Vec<HolevoPair>,
}

impl HolevoChannel {
    /// Checks shapes only. See [`HolevoChannel::validate`] for the state and
    /// POVM conditions.
    pub fn new(dim_in: usize, dim_out: usize, pairs: Vec<HolevoPair>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::DimensionMismatch(
                "empty measure-and-prepare sequence".into(),
            ));
        }
        for (k, p) in pairs.iter().enumerate() {
            expect_shape(&format!("states[{k}]"), &p.state, dim_out, dim_out)?;
            expect_shape(&format!("effects[{k}]"), &p.effect, dim_in, dim_in)?;
        }
        Ok(Self {
            dim_in,
            dim_out,
            pairs,
        })
    }

    pub fn from_parts(
        dim_in: usize,
        dim_out: usize,
        states: Vec<ComplexMatrix>,
        effects: Vec<ComplexMatrix>,
    ) -> Result<Self> {
        if states.len() != effects.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} states but {} effects",
                states.len(),
                effects.len()
            )));
        }
        let pairs = states
            .into_iter()
            .zip(effects)
            .map(|(state, effect)| HolevoPair { state, effect })
            .collect();
        Self::new(dim_in, dim_out, pairs)
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn pairs(&self) -> &[HolevoPair] {
        &self.pairs
    }

    pub fn states(&self) -> impl Iterator<Item = &ComplexMatrix> {
        self.pairs.iter().map(|p| &p.state)
    }

    pub fn effects(&self) -> impl Iterator<Item = &ComplexMatrix> {
        self.pairs.iter().map(|p| &p.effect)
    }

    pub fn effect_sum(&self) -> ComplexMatrix {
        let mut s = ComplexMatrix::zeros(self.dim_in, self.dim_in);
        for f in self.effects() {
            s += f;
        }
        s
    }

    pub fn apply(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        expect_shape("input", x, self.dim_in, self.dim_in)?;
        let mut out = ComplexMatrix::zeros(self.dim_out, self.dim_out);
        for p in &self.pairs {
            out += &p.state.scale(p.effect.trace_product(x));
        }
        Ok(out)
    }

    /// `Φ*(Y) = Σ_k Tr(R_k Y) F_k`; unital whenever `Σ F_k = I`.
    pub fn dual_apply(&self, y: &ComplexMatrix) -> Result<ComplexMatrix> {
        expect_shape("dual input", y, self.dim_out, self.dim_out)?;
        let mut out = ComplexMatrix::zeros(self.dim_in, self.dim_in);
        for p in &self.pairs {
            out += &p.effect.scale(p.state.trace_product(y));
        }
        Ok(out)
    }

    /// Checks that every `R_k` is a state, every `F_k` is PSD and `Σ F_k = I`.
    /// Errors name the offending field (`holevo.states[k]`, `holevo.effects`).
    pub fn validate(&self, tol: &Tolerances) -> Result<()> {
        for (k, p) in self.pairs.iter().enumerate() {
            let herm = p.state.hermiticity_residual();
            let lmin = lambda_min(&p.state);
            let tr = p.state.trace();
            if herm > tol.eps_herm * (1.0 + p.state.frobenius_norm())
                || lmin < -tol.eps_psd
                || (tr - 1.0).norm() > tol.eps_recon
            {
                return Err(Error::Validation {
                    path: format!("holevo.states[{k}]"),
                    message: format!(
                        "not a state (hermiticity {herm:.3e}, lambda_min {lmin:.3e}, trace {:.6}{:+.3e}i)",
                        tr.re, tr.im
                    ),
                });
            }
            let herm = p.effect.hermiticity_residual();
            let lmin = lambda_min(&p.effect);
            if herm > tol.eps_herm * (1.0 + p.effect.frobenius_norm()) || lmin < -tol.eps_psd {
                return Err(Error::Validation {
                    path: format!("holevo.effects[{k}]"),
                    message: format!(
                        "not positive semidefinite (hermiticity {herm:.3e}, lambda_min {lmin:.3e})"
                    ),
                });
            }
        }
        let residual =
            (&self.effect_sum() - &ComplexMatrix::identity(self.dim_in)).frobenius_norm();
        if residual > tol.eps_recon {
            return Err(Error::Validation {
                path: "holevo.effects".into(),
                message: format!("effects do not sum to the identity (residual {residual:.3e})"),
            });
        }
        Ok(())
    }
}

/// Weighted Choi matrix `σ = Σ_ij √(λ_i λ_j) e_i e_j* ⊗ Φ(e_i e_j*)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedChoi {
    dim_in: usize,
    dim_out: usize,
    weights: Vec<f64>,
    sigma: ComplexMatrix,
}

impl WeightedChoi {
    pub fn new(
        dim_in: usize,
        dim_out: usize,
        weights: Vec<f64>,
        sigma: ComplexMatrix,
    ) -> Result<Self> {
        check_weights(&weights, dim_in)?;
        let n = dim_in * dim_out;
        expect_shape("choi.sigma", &sigma, n, n)?;
        Ok(Self {
            dim_in,
            dim_out,
            weights,
            sigma,
        })
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn sigma(&self) -> &ComplexMatrix {
        &self.sigma
    }

    /// `Φ(e_i e_j*) = (e_i ⊗ I)* σ (e_j ⊗ I) / √(λ_i λ_j)`.
    pub fn unit_image(&self, i: usize, j: usize) -> ComplexMatrix {
        let d = self.dim_out;
        let s = (self.weights[i] * self.weights[j]).sqrt();
        self.sigma.block(i * d, j * d, d, d).scale_re(1.0 / s)
    }

    pub fn apply(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        expect_shape("input", x, self.dim_in, self.dim_in)?;
        let mut out = ComplexMatrix::zeros(self.dim_out, self.dim_out);
        for i in 0..self.dim_in {
            for j in 0..self.dim_in {
                let xij = x[(i, j)];
                if xij != C64::new(0.0, 0.0) {
                    out += &self.unit_image(i, j).scale(xij);
                }
            }
        }
        Ok(out)
    }

    pub fn dual_apply(&self, y: &ComplexMatrix) -> Result<ComplexMatrix> {
        expect_shape("dual input", y, self.dim_out, self.dim_out)?;
        Ok(ComplexMatrix::from_fn(self.dim_in, self.dim_in, |j, i| {
            self.unit_image(i, j).trace_product(y)
        }))
    }
}

pub(crate) fn check_weights(weights: &[f64], dim: usize) -> Result<()> {
    if weights.len() != dim {
        return Err(Error::BadWeights(format!(
            "expected {dim} weights, got {}",
            weights.len()
        )));
    }
    if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
        return Err(Error::BadWeights(format!(
            "weight {w} is not strictly positive"
        )));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::BadWeights(format!("weights sum to {total}, not 1")));
    }
    Ok(())
}

/// Uniform weights `λ_i = 1/d`.
pub fn uniform_weights(dim: usize) -> Vec<f64> {
    vec![1.0 / dim as f64; dim]
}

/// A channel in any of the three interchangeable representations.
#[derive(Debug, Clone, PartialEq)]
pub enum Channel {
    Kraus(KrausChannel),
    Holevo(HolevoChannel),
    Choi(WeightedChoi),
}

impl From<KrausChannel> for Channel {
    fn from(c: KrausChannel) -> Self {
        Channel::Kraus(c)
    }
}

impl From<HolevoChannel> for Channel {
    fn from(c: HolevoChannel) -> Self {
        Channel::Holevo(c)
    }
}

impl From<WeightedChoi> for Channel {
    fn from(c: WeightedChoi) -> Self {
        Channel::Choi(c)
    }
}

impl Channel {
    pub fn dim_in(&self) -> usize {
        match self {
            Channel::Kraus(c) => c.dim_in(),
            Channel::Holevo(c) => c.dim_in(),
            Channel::Choi(c) => c.dim_in(),
        }
    }

    pub fn dim_out(&self) -> usize {
        match self {
            Channel::Kraus(c) => c.dim_out(),
            Channel::Holevo(c) => c.dim_out(),
            Channel::Choi(c) => c.dim_out(),
        }
    }

    pub fn representation(&self) -> &'static str {
        match self {
            Channel::Kraus(_) => "kraus",
            Channel::Holevo(_) => "holevo",
            Channel::Choi(_) => "choi",
        }
    }

    pub fn apply(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        match self {
            Channel::Kraus(c) => c.apply(x),
            Channel::Holevo(c) => c.apply(x),
            Channel::Choi(c) => c.apply(x),
        }
    }

    pub fn dual_apply(&self, y: &ComplexMatrix) -> Result<ComplexMatrix> {
        match self {
            Channel::Kraus(c) => c.dual_apply(y),
            Channel::Holevo(c) => c.dual_apply(y),
            Channel::Choi(c) => c.dual_apply(y),
        }
    }

    /// Images `M_ij = Φ(e_i e_j*)`, flattened row-major (`i * d + j`).
    pub fn unit_images(&self) -> Vec<ComplexMatrix> {
        let d = self.dim_in();
        if let Channel::Choi(c) = self {
            return (0..d * d).map(|ij| c.unit_image(ij / d, ij % d)).collect();
        }
        (0..d * d)
            .map(|ij| {
                self.apply(&ComplexMatrix::unit(d, ij / d, ij % d))
                    .expect("matrix unit has the input dimension")
            })
            .collect()
    }

    /// Matrix of the map on row-major vectorized operators.
    pub fn superoperator(&self) -> ComplexMatrix {
        let d = self.dim_in();
        let e = self.dim_out();
        let images = self.unit_images();
        ComplexMatrix::from_fn(e * e, d * d, |r, c| images[c][(r / e, r % e)])
    }

    /// Converts to Kraus form. Choi input is factored through its
    /// eigendecomposition.
    pub fn to_kraus(&self, tol: &Tolerances) -> Result<KrausChannel> {
        match self {
            Channel::Kraus(c) => Ok(c.clone()),
            Channel::Holevo(c) => holevo_to_kraus(c, tol),
            Channel::Choi(c) => choi_to_kraus(c, tol),
        }
    }

    pub fn to_choi(&self, weights: Option<&[f64]>) -> Result<WeightedChoi> {
        let w = weights.map_or_else(|| uniform_weights(self.dim_in()), <[f64]>::to_vec);
        weighted_choi(self, &w)
    }
}

/// Builds the weighted Choi matrix of `ch`.
pub fn weighted_choi(ch: &Channel, weights: &[f64]) -> Result<WeightedChoi> {
    let d = ch.dim_in();
    let e = ch.dim_out();
    check_weights(weights, d)?;
    let mut sigma = ComplexMatrix::zeros(d * e, d * e);
    for (ij, m) in ch.unit_images().iter().enumerate() {
        let (i, j) = (ij / d, ij % d);
        let s = (weights[i] * weights[j]).sqrt();
        sigma.set_block(i * e, j * e, &m.scale_re(s));
    }
    WeightedChoi::new(d, e, weights.to_vec(), sigma)
}

/// Outcome of [`verify_cptp`].
#[derive(Debug, Clone, Serialize)]
pub struct CptpReport {
    pub tp_residual: f64,
    pub cp_lambda_min: f64,
    pub ok: bool,
}

/// Trace preservation residual and the smallest eigenvalue of the
/// uniform-weight Choi matrix.
pub fn verify_cptp(ch: &Channel, tol: &Tolerances) -> CptpReport {
    let d = ch.dim_in();
    let id = ComplexMatrix::identity(d);
    // T_ji = Tr Φ(e_i e_j*) equals (Σ E_k* E_k)_ji for any representation.
    let images = ch.unit_images();
    let traces = ComplexMatrix::from_fn(d, d, |j, i| images[i * d + j].trace());
    let generic = (&traces - &id).frobenius_norm();
    let tp_residual = match ch {
        Channel::Kraus(c) => (&c.gram_sum() - &id).frobenius_norm(),
        Channel::Holevo(c) => (&c.effect_sum() - &id).frobenius_norm().max(generic),
        Channel::Choi(_) => generic,
    };
    let cp_lambda_min = match ch.to_choi(None) {
        Ok(c) => lambda_min(c.sigma()),
        Err(_) => f64::NEG_INFINITY,
    };
    CptpReport {
        tp_residual,
        cp_lambda_min,
        ok: tp_residual <= tol.eps_recon && cp_lambda_min >= -tol.eps_psd,
    }
}

/// Rank-one Kraus form of a measure-and-prepare channel: each pair contributes
/// `√(q_a μ_b) u_a w_b*` from the spectral decompositions
/// `R = Σ q_a u_a u_a*` and `F = Σ μ_b w_b w_b*`.
pub fn holevo_to_kraus(ch: &HolevoChannel, tol: &Tolerances) -> Result<KrausChannel> {
    let mut kraus = Vec::new();
    for (k, p) in ch.pairs().iter().enumerate() {
        let r = eigh(&p.state, tol)?;
        let f = eigh(&p.effect, tol)?;
        for (what, dec) in [("states", &r), ("effects", &f)] {
            let lmin = dec.eigenvalues.last().copied().unwrap_or(0.0);
            if lmin < -tol.eps_psd {
                return Err(Error::NotPsdInput {
                    what: format!("holevo.{what}[{k}]"),
                    lambda_min: lmin,
                });
            }
        }
        for (a, &q) in r.eigenvalues.iter().enumerate() {
            if q <= tol.eps_rank {
                continue;
            }
            let u = r.eigenvector(a);
            for (b, &mu) in f.eigenvalues.iter().enumerate() {
                if mu <= tol.eps_rank {
                    continue;
                }
                let w = f.eigenvector(b);
                kraus.push(ComplexMatrix::outer(&u, &w).scale_re((q * mu).sqrt()));
            }
        }
    }
    KrausChannel::new(ch.dim_in(), ch.dim_out(), kraus)
}

/// Factors a numerically rank-one operator as `u v*` with `‖u‖ = 1` and the
/// first nonzero component of `u` real positive. Returns `None` for the zero
/// operator.
pub fn rank_one_factor(
    e: &ComplexMatrix,
    index: usize,
    tol: &Tolerances,
) -> Result<Option<(Vec<C64>, Vec<C64>)>> {
    let s = singular_values(e);
    let s1 = s.first().copied().unwrap_or(0.0);
    if s1 == 0.0 {
        return Ok(None);
    }
    let ratio = s.get(1).copied().unwrap_or(0.0) / s1;
    if ratio > tol.eps_rank {
        return Err(Error::NotRankOne { index, ratio });
    }
    let best = (0..e.cols())
        .max_by(|&a, &b| vec_norm(&e.column(a)).total_cmp(&vec_norm(&e.column(b))))
        .unwrap_or(0);
    let mut u = e.column(best);
    let n = vec_norm(&u);
    for z in u.iter_mut() {
        *z /= n;
    }
    phase_normalize(&mut u);
    // v = E* u, so that u v* = u u* E = E.
    let v = e.adjoint().mul_vec(&u);
    debug_assert!(vdot(&u, &u).re > 0.0);
    Ok(Some((u, v)))
}

/// Measure-and-prepare form of a rank-one Kraus channel: `E_k = u_k v_k*`
/// gives `R_k = u_k u_k*` and `F_k = v_k v_k*`. Zero operators are skipped.
pub fn kraus_to_holevo(ch: &KrausChannel, tol: &Tolerances) -> Result<HolevoChannel> {
    let mut pairs = Vec::new();
    for (k, e) in ch.operators().iter().enumerate() {
        if let Some((u, v)) = rank_one_factor(e, k, tol)? {
            pairs.push(HolevoPair {
                state: ComplexMatrix::outer(&u, &u),
                effect: ComplexMatrix::outer(&v, &v),
            });
        }
    }
    HolevoChannel::new(ch.dim_in(), ch.dim_out(), pairs)
}

fn choi_to_kraus(ch: &WeightedChoi, tol: &Tolerances) -> Result<KrausChannel> {
    let d = ch.dim_in();
    let e = ch.dim_out();
    let dec = eigh(ch.sigma(), tol)?;
    let lmin = dec.eigenvalues.last().copied().unwrap_or(0.0);
    if lmin < -tol.eps_psd {
        return Err(Error::NotPsdInput {
            what: "choi.sigma".into(),
            lambda_min: lmin,
        });
    }
    let top = dec.eigenvalues.first().copied().unwrap_or(0.0);
    let mut kraus = Vec::new();
    for (a, &mu) in dec.eigenvalues.iter().enumerate() {
        if mu <= tol.eps_rank * top.max(1.0) {
            continue;
        }
        let s = dec.eigenvector(a);
        let w = ch.weights();
        kraus.push(ComplexMatrix::from_fn(e, d, |m, i| {
            s[i * e + m] * (mu / w[i]).sqrt()
        }));
    }
    KrausChannel::new(d, e, kraus)
}

/// Convenience: the Choi matrix `σ` of a Kraus channel built from the Kraus
/// vectors `Σ_i √λ_i e_i ⊗ E e_i`, independent of [`weighted_choi`].
pub fn choi_from_kraus_vectors(ch: &KrausChannel, weights: &[f64]) -> ComplexMatrix {
    let d = ch.dim_in();
    let e = ch.dim_out();
    let mut sigma = ComplexMatrix::zeros(d * e, d * e);
    for op in ch.operators() {
        let mut vecs = vec![C64::new(0.0, 0.0); d * e];
        for i in 0..d {
            for m in 0..e {
                vecs[i * e + m] = op[(m, i)] * weights[i].sqrt();
            }
        }
        sigma += &ComplexMatrix::outer(&vecs, &vecs);
    }
    sigma
}

/// Kraus channel of the identity map on `C^d`.
pub fn identity_channel(d: usize) -> KrausChannel {
    KrausChannel::new(d, d, vec![ComplexMatrix::identity(d)]).expect("valid shapes")
}

/// Completely dephasing channel `X ↦ Σ_k e_k e_k* X e_k e_k*`.
pub fn dephasing_channel(d: usize) -> KrausChannel {
    KrausChannel::new(d, d, (0..d).map(|k| ComplexMatrix::unit(d, k, k)).collect())
        .expect("valid shapes")
}

/// Replacement channel `X ↦ Tr(X) ρ`.
pub fn prepare_state_channel(dim_in: usize, rho: ComplexMatrix) -> HolevoChannel {
    let dim_out = rho.rows();
    HolevoChannel::new(
        dim_in,
        dim_out,
        vec![HolevoPair {
            state: rho,
            effect: ComplexMatrix::identity(dim_in),
        }],
    )
    .expect("valid shapes")
}

/// Transpose map `X ↦ X^t` as a weighted Choi matrix (uniform weights); it is
/// positive and trace preserving but not completely positive.
pub fn transpose_map(d: usize) -> WeightedChoi {
    let mut sigma = ComplexMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            let block = ComplexMatrix::unit(d, j, i).scale_re(1.0 / d as f64);
            sigma += &tensor_product(&ComplexMatrix::unit(d, i, j), &block);
        }
    }
    WeightedChoi::new(d, d, uniform_weights(d), sigma).expect("valid shapes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::partial_trace_second;
    use crate::random::{ginibre, random_holevo, random_kraus, random_state, rng};
    use proptest::prelude::{any, prop_assert, proptest, ProptestConfig};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn dephasing_holevo(d: usize) -> HolevoChannel {
        HolevoChannel::from_parts(
            d,
            d,
            (0..d).map(|k| ComplexMatrix::unit(d, k, k)).collect(),
            (0..d).map(|k| ComplexMatrix::unit(d, k, k)).collect(),
        )
        .unwrap()
    }

    fn close(a: &ComplexMatrix, b: &ComplexMatrix, eps: f64) -> bool {
        (a - b).frobenius_norm() <= eps
    }

    #[test]
    fn dephasing_apply() {
        let x =
            ComplexMatrix::from_rows(&[&[c(1.0, 0.0), c(2.0, 1.0)], &[c(3.0, 0.0), c(4.0, -1.0)]]);
        let out = dephasing_channel(2).apply(&x).unwrap();
        assert!(close(
            &out,
            &ComplexMatrix::diag(&[c(1.0, 0.0), c(4.0, -1.0)]),
            1e-15
        ));
        let out = dephasing_holevo(2).apply(&x).unwrap();
        assert!(close(
            &out,
            &ComplexMatrix::diag(&[c(1.0, 0.0), c(4.0, -1.0)]),
            1e-15
        ));
    }

    #[test]
    fn apply_rejects_wrong_dimension() {
        assert!(matches!(
            dephasing_channel(2).apply(&ComplexMatrix::identity(3)),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn kraus_and_choi_apply_agree() {
        let mut r = rng(1);
        let k = random_kraus(&mut r, 3, 2, 4).unwrap();
        let ch = Channel::Kraus(k);
        let choi = Channel::Choi(ch.to_choi(Some(&[0.2, 0.3, 0.5])).unwrap());
        for _ in 0..5 {
            let x = ginibre(&mut r, 3, 3);
            assert!(close(
                &ch.apply(&x).unwrap(),
                &choi.apply(&x).unwrap(),
                1e-9
            ));
        }
    }

    #[test]
    fn dual_examples() {
        let h = dephasing_holevo(2);
        assert!(close(
            &h.dual_apply(&ComplexMatrix::identity(2)).unwrap(),
            &ComplexMatrix::identity(2),
            1e-15
        ));
        let e11 = ComplexMatrix::unit(2, 0, 0);
        assert!(close(&h.dual_apply(&e11).unwrap(), &e11, 1e-15));
    }

    #[test]
    fn duality_identity_all_representations() {
        let mut r = rng(2);
        let h = random_holevo(&mut r, 3, 4, 5).unwrap();
        let chans = [
            Channel::Holevo(h.clone()),
            Channel::Kraus(holevo_to_kraus(&h, &tol()).unwrap()),
            Channel::Choi(Channel::Holevo(h).to_choi(None).unwrap()),
        ];
        for ch in &chans {
            for _ in 0..10 {
                let x = ginibre(&mut r, 3, 3);
                let y = ginibre(&mut r, 4, 4);
                let lhs = ch.apply(&x).unwrap().trace_product(&y);
                let rhs = x.trace_product(&ch.dual_apply(&y).unwrap());
                assert!((lhs - rhs).norm() <= 1e-10, "{}", ch.representation());
            }
        }
    }

    #[test]
    fn identity_choi_is_maximally_entangled() {
        let ch = Channel::Kraus(identity_channel(2));
        let w = weighted_choi(&ch, &uniform_weights(2)).unwrap();
        let h = 0.5;
        let expected = ComplexMatrix::from_real_rows(&[
            &[h, 0.0, 0.0, h],
            &[0.0, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 0.0],
            &[h, 0.0, 0.0, h],
        ]);
        assert!(close(w.sigma(), &expected, 1e-15));
    }

    #[test]
    fn dephasing_choi_is_diagonal() {
        let ch = Channel::Kraus(dephasing_channel(2));
        let w = weighted_choi(&ch, &uniform_weights(2)).unwrap();
        assert!(close(
            w.sigma(),
            &ComplexMatrix::diag_real(&[0.5, 0.0, 0.0, 0.5]),
            1e-15
        ));
    }

    #[test]
    fn weighted_choi_matches_kraus_vector_oracle() {
        let mut r = rng(3);
        let k = random_kraus(&mut r, 3, 3, 3).unwrap();
        let weights = [0.5, 0.3, 0.2];
        let oracle = choi_from_kraus_vectors(&k, &weights);
        let w = weighted_choi(&Channel::Kraus(k), &weights).unwrap();
        assert!(close(w.sigma(), &oracle, 1e-12));
        assert!((w.sigma().trace() - 1.0).norm() < 1e-12);
        assert!(lambda_min(w.sigma()) >= -1e-12);
        let pt = partial_trace_second(w.sigma(), 3, 3).unwrap();
        assert!(close(&pt, &ComplexMatrix::diag_real(&weights), 1e-10));
    }

    #[test]
    fn bad_weights_are_rejected() {
        let ch = Channel::Kraus(dephasing_channel(2));
        assert!(matches!(
            weighted_choi(&ch, &[0.5]),
            Err(Error::BadWeights(_))
        ));
        assert!(matches!(
            weighted_choi(&ch, &[1.0, 0.0]),
            Err(Error::BadWeights(_))
        ));
        assert!(matches!(
            weighted_choi(&ch, &[0.6, 0.6]),
            Err(Error::BadWeights(_))
        ));
    }

    #[test]
    fn verify_cptp_dephasing() {
        let rep = verify_cptp(&Channel::Kraus(dephasing_channel(2)), &tol());
        assert!(rep.ok);
        assert!(rep.tp_residual <= 1e-14);
    }

    #[test]
    fn verify_cptp_flags_transpose() {
        // σ = SWAP / 2 has eigenvalues +1/2 (symmetric) and -1/2 (antisymmetric).
        let rep = verify_cptp(&Channel::Choi(transpose_map(2)), &tol());
        assert!(!rep.ok);
        assert!(rep.tp_residual < 1e-14);
        assert!((rep.cp_lambda_min + 0.5).abs() < 1e-12);
    }

    #[test]
    fn verify_cptp_flags_povm_excess() {
        let mut effects: Vec<ComplexMatrix> =
            (0..2).map(|k| ComplexMatrix::unit(2, k, k)).collect();
        effects[0] += &ComplexMatrix::unit(2, 0, 0).scale_re(0.1);
        let states = (0..2).map(|k| ComplexMatrix::unit(2, k, k)).collect();
        let h = HolevoChannel::from_parts(2, 2, states, effects).unwrap();
        let rep = verify_cptp(&Channel::Holevo(h.clone()), &tol());
        assert!(!rep.ok);
        assert!((rep.tp_residual - 0.1).abs() < 1e-12);
        match h.validate(&tol()) {
            Err(Error::Validation { path, .. }) => assert_eq!(path, "holevo.effects"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn holevo_to_kraus_dephasing() {
        let k = holevo_to_kraus(&dephasing_holevo(2), &tol()).unwrap();
        assert_eq!(k.operators().len(), 2);
        for (a, op) in k.operators().iter().enumerate() {
            assert!(close(op, &ComplexMatrix::unit(2, a, a), 1e-14));
        }
    }

    #[test]
    fn holevo_to_kraus_prepare_state() {
        let q = [0.5, 0.3, 0.2];
        let h = prepare_state_channel(2, ComplexMatrix::diag_real(&q));
        let k = holevo_to_kraus(&h, &tol()).unwrap();
        assert_eq!(k.operators().len(), 6);
        // Expected set {√q_k e_k e_m*}; eigenvectors of the identity effect are e_m.
        for (kk, &qk) in q.iter().enumerate() {
            for m in 0..2 {
                let target = ComplexMatrix::from_fn(3, 2, |i, j| {
                    if i == kk && j == m {
                        C64::new(qk.sqrt(), 0.0)
                    } else {
                        C64::new(0.0, 0.0)
                    }
                });
                assert!(k.operators().iter().any(|op| close(op, &target, 1e-14)));
            }
        }
        let src = Channel::Holevo(h).superoperator();
        let out = Channel::Kraus(k).superoperator();
        assert!(close(&src, &out, 1e-12));
    }

    #[test]
    fn holevo_to_kraus_random_superoperator() {
        let mut r = rng(4);
        let h = random_holevo(&mut r, 4, 4, 5).unwrap();
        let k = holevo_to_kraus(&h, &tol()).unwrap();
        let src = Channel::Holevo(h).superoperator();
        let out = Channel::Kraus(k.clone()).superoperator();
        assert!(close(&src, &out, 1e-9));
        // Σ v v* = I for the rank-one factors
        let frame = k.gram_sum();
        assert!(close(&frame, &ComplexMatrix::identity(4), 1e-8));
    }

    #[test]
    fn holevo_to_kraus_rejects_negative_effect() {
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
        assert!(matches!(
            holevo_to_kraus(&h, &tol()),
            Err(Error::NotPsdInput { .. })
        ));
    }

    #[test]
    fn kraus_to_holevo_examples() {
        let h = kraus_to_holevo(&dephasing_channel(2), &tol()).unwrap();
        for (k, p) in h.pairs().iter().enumerate() {
            assert!(close(&p.state, &ComplexMatrix::unit(2, k, k), 1e-14));
            assert!(close(&p.effect, &ComplexMatrix::unit(2, k, k), 1e-14));
        }

        let e = ComplexMatrix::outer(&[c(1.0, 0.0), c(0.0, 0.0)], &[c(0.0, 0.0), c(2.0, 0.0)]);
        let k = KrausChannel::new(2, 2, vec![e]).unwrap();
        let h = kraus_to_holevo(&k, &tol()).unwrap();
        assert!(close(
            &h.pairs()[0].effect,
            &ComplexMatrix::unit(2, 1, 1).scale_re(4.0),
            1e-14
        ));
        assert!(!verify_cptp(&Channel::Holevo(h), &tol()).ok);

        match kraus_to_holevo(&identity_channel(2), &tol()) {
            Err(Error::NotRankOne { index, ratio }) => {
                assert_eq!(index, 0);
                assert!((ratio - 1.0).abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn kraus_to_holevo_phase_convention() {
        let u = [c(0.0, 1.0), c(0.0, 0.0)];
        let v = [c(0.6, 0.0), c(0.0, 0.8)];
        let k = KrausChannel::new(2, 2, vec![ComplexMatrix::outer(&u, &v)]).unwrap();
        let h = kraus_to_holevo(&k, &tol()).unwrap();
        let (uu, _) = rank_one_factor(&k.operators()[0], 0, &tol())
            .unwrap()
            .unwrap();
        assert!((uu[0] - c(1.0, 0.0)).norm() < 1e-14);
        let same = Channel::Holevo(h).superoperator();
        assert!(close(&same, &Channel::Kraus(k).superoperator(), 1e-14));
    }

    #[test]
    fn choi_to_kraus_round_trip() {
        let mut r = rng(6);
        let k = random_kraus(&mut r, 3, 2, 2).unwrap();
        let ch = Channel::Kraus(k);
        let choi = Channel::Choi(ch.to_choi(Some(&[0.1, 0.6, 0.3])).unwrap());
        let back = Channel::Kraus(choi.to_kraus(&tol()).unwrap());
        assert!(close(&ch.superoperator(), &back.superoperator(), 1e-10));
    }

    #[test]
    fn kraus_count_cap() {
        let ops = vec![ComplexMatrix::identity(1); 3];
        assert!(matches!(
            KrausChannel::with_cap(1, 1, ops, 2),
            Err(Error::KrausCount { len: 3, cap: 2 })
        ));
        assert!(KrausChannel::new(1, 1, vec![]).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn prop_round_trip_preserves_action(seed in any::<u64>(), d in 1usize..5, e in 1usize..5, m in 1usize..6) {
            let mut r = rng(seed);
            let h = random_holevo(&mut r, d, e, m).unwrap();
            let k = holevo_to_kraus(&h, &tol()).unwrap();
            let back = kraus_to_holevo(&k, &tol()).unwrap();
            let a = Channel::Holevo(h).superoperator();
            let b = Channel::Holevo(back).superoperator();
            prop_assert!((&a - &b).frobenius_norm() <= tol().eps_recon);
        }

        #[test]
        fn prop_trace_and_positivity_preserved(seed in any::<u64>(), d in 1usize..5, e in 1usize..5) {
            let mut r = rng(seed);
            let ch = Channel::Kraus(random_kraus(&mut r, d, e, d).unwrap());
            let x = ginibre(&mut r, d, d);
            let out = ch.apply(&x).unwrap();
            let x1 = crate::linalg::trace_norm(&x);
            prop_assert!((out.trace() - x.trace()).norm() <= tol().eps_recon * x1);
            let rho = random_state(&mut r, d, d);
            let out = ch.apply(&rho).unwrap();
            prop_assert!(out.hermiticity_residual() <= 1e-12);
            prop_assert!(lambda_min(&out) >= -tol().eps_psd);
        }

        #[test]
        fn prop_weighted_choi_marginal(seed in any::<u64>(), d in 1usize..5) {
            let mut r = rng(seed);
            let mut w: Vec<f64> = (0..d).map(|_| rand::Rng::random_range(&mut r, 0.1..1.0)).collect();
            let t: f64 = w.iter().sum();
            w.iter_mut().for_each(|x| *x /= t);
            let s: f64 = w.iter().sum();
            w[0] += 1.0 - s;
            let ch = Channel::Holevo(random_holevo(&mut r, d, 3, 4).unwrap());
            let choi = weighted_choi(&ch, &w).unwrap();
            let pt = partial_trace_second(choi.sigma(), d, 3).unwrap();
            prop_assert!((&pt - &ComplexMatrix::diag_real(&w)).frobenius_norm() <= 1e-10);
            prop_assert!(lambda_min(choi.sigma()) >= -tol().eps_psd);
            prop_assert!((choi.sigma().trace() - 1.0).norm() <= 1e-10);
        }
    }
}
