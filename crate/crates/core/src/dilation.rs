// SPDX-License-Identifier: Apache-2.0

//! Object-plus-apparatus dynamics on chains.
//!
//! A [`CompoundState`] over a chain of `n` points stores one object vector per
//! sign pattern `s ∈ {−, +}ⁿ`. Bit `k` of the pattern index is set when slot
//! `k` carries the input gauge vector `ξ₊` and clear when it carries `ξ₋`.

use ndarray::{Array1, Array2};

use crate::chains::{
    derive_seed, mc_average, pairing_factor, sample_poisson_chain, truncated_exp_series, Chain,
    PoissonConfig,
};
use crate::error::{Error, Result};
use crate::hamiltonian::Hamiltonian;
use crate::interaction::InteractionOperator;
use crate::linalg::{c, expm, eye, kron, max_abs, max_abs_diff, singular_values, unit, vec_norm, C64, I};
use crate::montecarlo::{summarize, Execution};
use crate::pseudo::{pi_dt, GaugePair, IncrementKind, IncrementRep, Metric, PseudoOperator};

/// Default cap on chain length for dense compound states (2ⁿ patterns).
pub const DEFAULT_MAX_CHAIN: usize = 16;

/// Environment variable that overrides [`DEFAULT_MAX_CHAIN`].
pub const MAX_CHAIN_ENV: &str = "ITO_DILATION_MAX_CHAIN";

/// [`DEFAULT_MAX_CHAIN`] unless `ITO_DILATION_MAX_CHAIN` holds a valid integer.
pub fn max_chain_from_env() -> usize {
    std::env::var(MAX_CHAIN_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_MAX_CHAIN)
}

/// Which gauge vector occupies a slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Minus,
    Plus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompoundState {
    chain: Chain,
    object_dim: usize,
    /// Row `p` is the object vector for pattern `p`.
    amplitudes: Array2<C64>,
}

impl CompoundState {
    /// `ψ ⊗ ξ₊(t₁) ⊗ … ⊗ ξ₊(tₙ)`: all amplitude on the all-plus pattern.
    pub fn embed(chain: &Chain, psi: &Array1<C64>, max_chain: usize) -> Result<Self> {
        let n = chain.len();
        if n > max_chain {
            return Err(Error::ChainTooLong { len: n, max: max_chain });
        }
        let d = psi.len();
        let mut amplitudes = Array2::zeros((1 << n, d));
        amplitudes.row_mut((1 << n) - 1).assign(psi);
        Ok(Self {
            chain: chain.clone(),
            object_dim: d,
            amplitudes,
        })
    }

    pub fn chain(&self) -> &Chain {
        &self.chain
    }

    pub fn object_dim(&self) -> usize {
        self.object_dim
    }

    pub fn slots(&self) -> usize {
        self.chain.len()
    }

    pub fn patterns(&self) -> usize {
        self.amplitudes.nrows()
    }

    pub fn amplitudes(&self) -> &Array2<C64> {
        &self.amplitudes
    }

    pub fn amplitude(&self, pattern: usize) -> Array1<C64> {
        self.amplitudes.row(pattern).to_owned()
    }

    pub fn signs(&self, pattern: usize) -> Vec<Sign> {
        (0..self.slots())
            .map(|k| if pattern >> k & 1 == 1 { Sign::Plus } else { Sign::Minus })
            .collect()
    }

    pub fn pattern_index(signs: &[Sign]) -> usize {
        signs
            .iter()
            .enumerate()
            .filter(|(_, s)| **s == Sign::Plus)
            .fold(0, |acc, (k, _)| acc | 1 << k)
    }

    pub fn minus_count(&self, pattern: usize) -> u32 {
        self.slots() as u32 - pattern.count_ones()
    }

    pub fn pattern_norms(&self) -> Vec<f64> {
        self.amplitudes
            .rows()
            .into_iter()
            .map(|r| r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
            .collect()
    }

    /// Applies `G` jointly to the object and fiber slot `slot`.
    pub fn apply(&mut self, g: &InteractionOperator, slot: usize) -> Result<()> {
        if g.object_dim() != self.object_dim {
            return Err(Error::DimensionMismatch {
                expected: self.object_dim,
                found: g.object_dim(),
            });
        }
        if slot >= self.slots() {
            return Err(Error::InvalidChain(format!("slot {slot} out of range")));
        }
        let blocks = [[g.block(0, 0), g.block(0, 1)], [g.block(1, 0), g.block(1, 1)]];
        let bit = 1usize << slot;
        for plus in (0..self.patterns()).filter(|p| p & bit != 0) {
            let minus = plus & !bit;
            let a_minus = self.amplitudes.row(minus).to_owned();
            let a_plus = self.amplitudes.row(plus).to_owned();
            let new_minus = blocks[0][0].dot(&a_minus) + blocks[0][1].dot(&a_plus);
            let new_plus = blocks[1][0].dot(&a_minus) + blocks[1][1].dot(&a_plus);
            self.amplitudes.row_mut(minus).assign(&new_minus);
            self.amplitudes.row_mut(plus).assign(&new_plus);
        }
        Ok(())
    }
}

/// `ψ_t(ϑ) = G_t^⊙(ϑ) F⋆(ϑ) ψ`: applies `G` at every point of `ϑ ∩ [0, t)` in
/// increasing order.
pub fn evolve_on_chain(
    g: &InteractionOperator,
    chain: &Chain,
    psi: &Array1<C64>,
    t: f64,
    max_chain: usize,
) -> Result<CompoundState> {
    let norm = vec_norm(psi);
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::NotNormalized { norm });
    }
    if psi.len() != g.object_dim() {
        return Err(Error::DimensionMismatch {
            expected: g.object_dim(),
            found: psi.len(),
        });
    }
    if !(t >= 0.0 && t <= chain.horizon()) {
        return Err(Error::InvalidChain(format!(
            "t = {t} outside [0, {}]",
            chain.horizon()
        )));
    }
    let mut state = CompoundState::embed(chain, psi, max_chain)?;
    for slot in 0..chain.count_before(t) {
        state.apply(g, slot)?;
    }
    Ok(state)
}

/// Numerical rank of the `d × 2ⁿ` matrix of pattern amplitudes. Rank 1
/// means the object factors out of the apparatus record.
pub fn entanglement_rank(state: &CompoundState, tol: f64) -> Result<usize> {
    if state.slots() == 0 {
        return Err(Error::EmptyChain);
    }
    let m = state.amplitudes.t().to_owned();
    Ok(singular_values(&m).into_iter().filter(|&s| s > tol).count())
}

/// Output covector `ξ₋⋆ + w·ξ₊⋆` used to read each slot.
pub fn output_covector(weight: f64) -> Array1<C64> {
    let gauge = GaugePair::canonical();
    let eta = Metric::eta2();
    eta.covector(&gauge.xi_minus) + eta.covector(&gauge.xi_plus) * c(weight)
}

/// Pairs every slot with `ξ₋⋆ + (ν/κ)·ξ₊⋆`, where `κ` is the intensity the
/// chain was sampled at. A slot that interacted then contributes
/// `I + (ν/κ)L`, an untouched slot contributes `1`.
pub fn project_output_with_intensity(state: &CompoundState, nu: f64, intensity: f64) -> Result<Array1<C64>> {
    if !(nu >= 0.0 && nu.is_finite()) {
        return Err(Error::Negative { name: "nu", value: nu });
    }
    let weight = if intensity > 0.0 { nu / intensity } else { 0.5 };
    let q = output_covector(weight);
    let mut out = Array1::<C64>::zeros(state.object_dim);
    for p in 0..state.patterns() {
        let coeff = (0..state.slots()).fold(c(1.0), |acc, k| acc * q[p >> k & 1]);
        if coeff != c(0.0) {
            out = out + state.amplitudes.row(p).mapv(|z| z * coeff);
        }
    }
    Ok(out)
}

/// [`project_output_with_intensity`] for chains drawn at the standard
/// intensity `2ν`. Averaging over the Poisson measure gives `V_ν(t)ψ`.
pub fn project_output(state: &CompoundState, nu: f64) -> Result<Array1<C64>> {
    project_output_with_intensity(state, nu, 2.0 * nu)
}

/// Chain average of [`project_output`] over `config`, with its entrywise-max
/// standard error.
pub fn averaged_output(
    g: &InteractionOperator,
    config: &PoissonConfig,
    psi: &Array1<C64>,
    max_chain: usize,
    exec: Execution,
) -> Result<(Array1<C64>, f64)> {
    let longest = (0..config.samples)
        .map(|i| crate::chains::sample_chain(config, i).len())
        .max()
        .unwrap_or(0);
    if longest > max_chain {
        return Err(Error::ChainTooLong { len: longest, max: max_chain });
    }
    // validates psi once up front
    evolve_on_chain(g, &Chain::empty(config.horizon), psi, config.horizon, max_chain)?;
    let d = psi.len();
    let summary = summarize(config.samples, (d, 1), exec, |i| {
        let chain = crate::chains::sample_chain(config, i);
        let state = evolve_on_chain(g, &chain, psi, config.horizon, max_chain)
            .expect("inputs validated above");
        let out = project_output(&state, config.nu).expect("nu validated by config");
        out.into_shape_with_order((d, 1)).expect("column vector")
    });
    let mean = summary.mean.column(0).to_owned();
    Ok((mean, summary.stderr))
}

/// `G⊙G` on `fiber ⊗ fiber ⊗ object` and its deviation from reference forms.
#[derive(Debug, Clone, PartialEq)]
pub struct SemiTensorSquare {
    pub product: Array2<C64>,
    /// Deviation from `𝐈 + L⊗π⊗I + L⊗I⊗π − H²⊗π⊗π`.
    pub defect: f64,
    /// Deviation from the quadratic-only form `𝐈 − H²⊗π⊗π`. Zero only for
    /// `H = 0`: the first-order terms are present in `G⊙G`.
    pub quadratic_only_defect: f64,
}

/// Composes `G` acting on (object, slot 1) with `G` acting on (object, slot 2).
pub fn semi_tensor_square(g: &InteractionOperator) -> SemiTensorSquare {
    let d = g.object_dim();
    let id2 = eye(2);
    let mut first = Array2::<C64>::zeros((4 * d, 4 * d));
    let mut second = Array2::<C64>::zeros((4 * d, 4 * d));
    for a in 0..2 {
        for b in 0..2 {
            let block = g.block(a, b);
            let e = unit(2, a, b);
            first = first + kron(&kron(&e, &id2), &block);
            second = second + kron(&kron(&id2, &e), &block);
        }
    }
    let product = first.dot(&second);

    let l = g.generator();
    let h_squared = match g.hamiltonian() {
        Some(h) => h.matrix().dot(h.matrix()),
        // L = −iH ⇒ −H² = L²
        None => -l.dot(l),
    };
    let pp = kron(&pi_dt(), &pi_dt());
    let quadratic = kron(&pp, &h_squared);
    let quadratic_only = eye(4 * d) - &quadratic;
    let full = &quadratic_only + &kron(&kron(&pi_dt(), &id2), l) + &kron(&kron(&id2, &pi_dt()), l);

    SemiTensorSquare {
        defect: max_abs_diff(&product, &full),
        quadratic_only_defect: max_abs_diff(&product, &quadratic_only),
        product,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartialDilationConfig {
    lambda: f64,
    nu: f64,
}

impl PartialDilationConfig {
    pub fn new(lambda: f64, nu: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::NonPositive { name: "lambda", value: lambda });
        }
        if !(nu >= 0.0 && nu.is_finite()) {
            return Err(Error::Negative { name: "nu", value: nu });
        }
        Ok(Self { lambda, nu })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// Coefficient `λ − ν/λ` of the effective generator `−i(λ − ν/λ)H`.
    pub fn effective_rate(&self) -> f64 {
        self.lambda - self.nu / self.lambda
    }
}

/// Order-`N` Taylor sum for `e^X`, evaluated on `X/2ˢ` with `‖X/2ˢ‖₁ ≤ 1`
/// and squared back. Summing the raw series loses about `‖X‖ᴺ/N!·ε` to
/// cancellation, which exceeds 1e−10 once `‖X‖` reaches the mid teens.
fn scaled_exp_series(x: &Array2<C64>, truncation: usize) -> Array2<C64> {
    let norm1 = x
        .columns()
        .into_iter()
        .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let s = if norm1 > 1.0 { norm1.log2().ceil() as i32 } else { 0 };
    let mut out = truncated_exp_series(&x.mapv(|z| z / 2f64.powi(s)), truncation);
    for _ in 0..s {
        out = out.dot(&out);
    }
    out
}

/// `e^{−iHλt} · Σ_{n≤N} ((i/λ)Hν t)ⁿ/n!`: free evolution between
/// measurements times the expectation of the measured part. The sum is
/// taken with scaling and squaring, see [`scaled_exp_series`].
pub fn partial_dilation_propagator(
    h: &Hamiltonian,
    cfg: &PartialDilationConfig,
    t: f64,
    truncation: usize,
) -> Result<Array2<C64>> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Negative { name: "t", value: t });
    }
    let free = expm(&h.matrix().mapv(|z| -I * cfg.lambda * t * z));
    let measured = h.matrix().mapv(|z| I * (cfg.nu * t / cfg.lambda) * z);
    Ok(free.dot(&scaled_exp_series(&measured, truncation)))
}

/// `𝒢_λ = 𝐈 + (i/λ)H ϖ(d𝐧) − iλH ϖ(dt)` on `(ℂ ⊕ 𝕜 ⊕ ℂ) ⊗ object`.
pub fn dilated_interaction(h: &Hamiltonian, lambda: f64) -> Result<PseudoOperator> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::NonPositive { name: "lambda", value: lambda });
    }
    let d = h.dim();
    let dn = IncrementRep::new(IncrementKind::DnHat4);
    let dt = IncrementRep::new(IncrementKind::Dt4Corner);
    let m = eye(4 * d)
        + kron(dn.matrix(), &h.matrix().mapv(|z| I / lambda * z))
        + kron(dt.matrix(), &h.matrix().mapv(|z| -I * lambda * z));
    PseudoOperator::new(m, Metric::eta4().lifted(d))
}

/// The vector `ξ_ν` with `ξ_ν⋆ = (1, (√ν, 0), 0)` under `η₄`.
pub fn output_vector(nu: f64) -> Array1<C64> {
    let covector = ndarray::array![c(1.0), c(nu.sqrt()), c(0.0), c(0.0)];
    // ξ⋆ = ξ†η ⇒ ξ = η · conj(ξ⋆)
    Metric::eta4().matrix().dot(&covector.mapv(|z| z.conj()))
}

/// `(ξ⋆ ⊗ I) 𝒢⋆ (m ⊗ I) 𝒢 (ξ ⊗ I)` as a d×d operator on the object.
fn output_pairing(g: &PseudoOperator, m: &Array2<C64>, xi: &Array1<C64>, d: usize) -> Array2<C64> {
    let lifted = kron(m, &eye(d));
    let sandwich = g.star().matrix().dot(&lifted).dot(g.matrix());
    let eta = Metric::eta4();
    let xi_star = eta.covector(xi);
    let mut out = Array2::<C64>::zeros((d, d));
    for a in 0..4 {
        for b in 0..4 {
            let w = xi_star[a] * xi[b];
            if w == c(0.0) {
                continue;
            }
            let block = sandwich.slice(ndarray::s![a * d..(a + 1) * d, b * d..(b + 1) * d]);
            out = out + block.mapv(|z| z * w);
        }
    }
    out
}

/// Output-side bookkeeping of the partially dilated process.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputLedger {
    /// Coefficient of `dt` in the output measure of `d𝐧`; equals `ν`.
    pub per_point_counting_coefficient: f64,
    /// `(1/λ, −ν/λ)`: `dm̃ = (1/λ) d𝐧 − (ν/λ) dt`.
    pub martingale_increment_coefficients: (f64, f64),
    /// Max entry of the output expectation of `ϖ(dm̃)`; zero for a martingale.
    pub martingale_expectation: f64,
    /// How far the counting pairing is from a multiple of the identity.
    pub scalar_defect: f64,
}

pub fn output_ledger(h: &Hamiltonian, lambda: f64, nu: f64) -> Result<OutputLedger> {
    if !(nu >= 0.0 && nu.is_finite()) {
        return Err(Error::Negative { name: "nu", value: nu });
    }
    let d = h.dim();
    let g = dilated_interaction(h, lambda)?;
    let xi = output_vector(nu);
    let dn = IncrementRep::new(IncrementKind::DnHat4);
    let dt = IncrementRep::new(IncrementKind::Dt4Corner);

    let counting = output_pairing(&g, dn.matrix(), &xi, d);
    let coefficient = (0..d).map(|i| counting[[i, i]].re).sum::<f64>() / d as f64;
    let scalar_defect = max_abs_diff(&counting, &(eye(d) * c(coefficient)));

    let dm = (dn.matrix() - &(dt.matrix() * c(nu))) / c(lambda);
    let martingale = output_pairing(&g, &dm, &xi, d);

    Ok(OutputLedger {
        per_point_counting_coefficient: coefficient,
        martingale_increment_coefficients: (1.0 / lambda, -nu / lambda),
        martingale_expectation: max_abs(&martingale),
        scalar_defect,
    })
}

/// Output measure coefficient of the pseudo-counting increment: `M̃[d𝐧] = ν dt`.
pub fn output_measure(h: &Hamiltonian, lambda: f64, nu: f64) -> Result<f64> {
    Ok(output_ledger(h, lambda, nu)?.per_point_counting_coefficient)
}

/// One row of a large-number sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LargeNumberRow {
    pub nu: f64,
    /// Max entry of `|mean − e^{−iHt}|`.
    pub bias: f64,
    pub stderr: f64,
    /// Max entrywise standard deviation of the per-chain products.
    pub fluctuation: f64,
    pub fluctuation_stderr: f64,
}

impl LargeNumberRow {
    pub fn bias_within(&self, sigmas: f64) -> bool {
        self.bias <= sigmas * self.stderr
    }
}

/// Runs the `ν`-scaled process (generator `−iH/ν` per interaction,
/// intensity `2ν`) for each `ν`. Every row estimates `e^{−iHt}`; the
/// per-sample fluctuation shrinks as `ν` grows.
pub fn large_number_sweep(
    h: &Hamiltonian,
    t: f64,
    nus: &[f64],
    samples: u64,
    seed: u64,
    exec: Execution,
) -> Result<Vec<LargeNumberRow>> {
    if nus.is_empty() {
        return Err(Error::InvalidChain("empty nu grid".into()));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::NonPositive { name: "t", value: t });
    }
    let exact = expm(&h.generator().mapv(|z| z * t));
    nus.iter()
        .enumerate()
        .map(|(k, &nu)| {
            let cfg = PoissonConfig::new(nu, t, samples, derive_seed(seed, k as u64))?;
            if nu <= 0.0 {
                return Err(Error::NonPositive { name: "nu", value: nu });
            }
            let factor = pairing_factor(&h.scaled(1.0 / nu));
            let summary = mc_average(&factor, t, samples, exec, |i| {
                sample_poisson_chain(cfg.intensity(), t, cfg.seed, i)
            });
            Ok(LargeNumberRow {
                nu,
                bias: max_abs_diff(&summary.mean, &exact),
                stderr: summary.stderr,
                fluctuation: summary.fluctuation,
                fluctuation_stderr: summary.fluctuation_stderr,
            })
        })
        .collect()
}
