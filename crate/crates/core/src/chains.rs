// SPDX-License-Identifier: Apache-2.0

//! Finite chains, Poisson chain sampling and the expectation functionals
//! that project the chain dynamics back onto the object space.
//!
//! Two routes to the boosted propagator `V_ν(t) = e^{−iνHt}` live here:
//!
//! * [`exact_expectation`] sums the chain integral order by order. Each
//!   point contributes `ξ₊⋆ G ξ₊ = −iH` boosted by `ν`, and the ordered
//!   simplex of `n` points has volume `tⁿ/n!`.
//! * [`mc_expectation`] samples chains from a Poisson process of intensity
//!   `2ν` and averages the product of per-point factors `p⋆ G p = I + L/2`,
//!   with `p = (1, 1)/√2` the Poisson state vector. The Poisson product
//!   formula gives `exp(2νt · L/2) = e^{νLt}`.

use ndarray::{array, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::hamiltonian::Hamiltonian;
use crate::interaction::InteractionOperator;
use crate::linalg::{c, expm, eye, C64, I};
use crate::montecarlo::{summarize, Execution, SampleSummary};

/// Default series truncation order.
pub const DEFAULT_TRUNCATION: usize = 25;

/// A strictly increasing finite set of interaction times in `[0, horizon)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    times: Vec<f64>,
    horizon: f64,
}

impl Chain {
    pub fn new(times: Vec<f64>, horizon: f64) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::NonPositive {
                name: "horizon",
                value: horizon,
            });
        }
        if let Some(bad) = times.iter().find(|t| !(**t >= 0.0 && **t < horizon)) {
            return Err(Error::InvalidChain(format!(
                "time {bad} outside [0, {horizon})"
            )));
        }
        if times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidChain("times must be strictly increasing".into()));
        }
        Ok(Self { times, horizon })
    }

    pub fn empty(horizon: f64) -> Self {
        Self {
            times: Vec::new(),
            horizon,
        }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Number of points in `ϑ ∩ [0, t)`.
    pub fn count_before(&self, t: f64) -> usize {
        self.times.partition_point(|&s| s < t)
    }

    /// The points of `[start, start + len)` translated by `−start`, as a
    /// chain on `[0, len)`. This is the discrete form of the shift `T`.
    pub fn window(&self, start: f64, len: f64) -> Result<Chain> {
        let times = self
            .times
            .iter()
            .filter(|&&s| s >= start && s < start + len)
            .map(|&s| s - start)
            // rounding in the subtraction may land on the right edge
            .filter(|&s| s < len)
            .collect();
        Chain::new(times, len)
    }
}

/// Parameters of a Poisson Monte Carlo run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoissonConfig {
    pub nu: f64,
    pub horizon: f64,
    pub samples: u64,
    pub seed: u64,
}

impl PoissonConfig {
    /// `nu = 0` is accepted as a degenerate case that only ever yields the
    /// empty chain.
    pub fn new(nu: f64, horizon: f64, samples: u64, seed: u64) -> Result<Self> {
        if !(nu >= 0.0 && nu.is_finite()) {
            return Err(Error::Negative { name: "nu", value: nu });
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::NonPositive {
                name: "horizon",
                value: horizon,
            });
        }
        if samples == 0 {
            return Err(Error::NonPositive {
                name: "samples",
                value: 0.0,
            });
        }
        Ok(Self {
            nu,
            horizon,
            samples,
            seed,
        })
    }

    /// Sampling intensity `2ν`.
    pub fn intensity(&self) -> f64 {
        2.0 * self.nu
    }
}

/// SplitMix64 finaliser over `seed ⊕ key`, for deriving independent
/// sub-seeds from a single user seed.
pub fn derive_seed(seed: u64, key: u64) -> u64 {
    let mut z = seed ^ key.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Draws a chain on `[0, horizon)` from a homogeneous Poisson process.
///
/// The RNG is ChaCha8 keyed by `seed` with stream `draw_index`, so each
/// draw is a pure function of `(seed, draw_index)`.
pub fn sample_poisson_chain(intensity: f64, horizon: f64, seed: u64, draw_index: u64) -> Chain {
    let mean = intensity * horizon;
    if mean <= 0.0 {
        return Chain::empty(horizon);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(draw_index);
    let n = Poisson::new(mean)
        .expect("finite positive Poisson mean")
        .sample(&mut rng) as usize;
    loop {
        let mut times: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * horizon).collect();
        times.sort_by(f64::total_cmp);
        if let Ok(chain) = Chain::new(times, horizon) {
            return chain;
        }
        // duplicate or edge-rounded draw; redraw the positions
    }
}

/// One chain from the intensity-`2ν` process of `config`.
pub fn sample_chain(config: &PoissonConfig, draw_index: u64) -> Chain {
    sample_poisson_chain(config.intensity(), config.horizon, config.seed, draw_index)
}

/// Volume `tⁿ/n!` of the ordered simplex `{0 ≤ t₁ < … < tₙ < t}`.
pub fn simplex_volume(n: u32, t: f64) -> f64 {
    (1..=n).fold(1.0, |v, k| v * t / k as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ExactSeries,
    MatrixExponential,
    MonteCarlo,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::ExactSeries => "exact_series",
            Method::MatrixExponential => "matrix_exponential",
            Method::MonteCarlo => "monte_carlo",
        }
    }
}

/// An estimate of `V_ν(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagatorEstimate {
    pub matrix: Array2<C64>,
    pub method: Method,
    /// Entrywise-max standard error; zero for deterministic methods.
    pub stderr: f64,
    /// Truncation order for the series, sample count for Monte Carlo.
    pub truncation_or_samples: u64,
    /// Bound `‖νHt‖^{N+1}/(N+1)!` on the omitted series tail.
    pub remainder_bound: Option<f64>,
}

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Negative { name: "t", value: t })
    }
}

fn check_nu(nu: f64) -> Result<()> {
    if nu >= 0.0 && nu.is_finite() {
        Ok(())
    } else {
        Err(Error::Negative { name: "nu", value: nu })
    }
}

/// `Σ_{n=0}^{N} Xⁿ/n!` by the term recurrence `T_n = T_{n−1}·X/n`.
pub(crate) fn truncated_exp_series(x: &Array2<C64>, truncation: usize) -> Array2<C64> {
    let n = x.nrows();
    let mut term = eye(n);
    let mut sum = eye(n);
    for k in 1..=truncation {
        term = term.dot(x) / c(k as f64);
        sum += &term;
    }
    sum
}

/// Guichardet chain sum `Σ_{n≤N} (ν·(−iH))ⁿ tⁿ/n!`.
pub fn exact_expectation(h: &Hamiltonian, t: f64, nu: f64, truncation: usize) -> Result<PropagatorEstimate> {
    check_time(t)?;
    check_nu(nu)?;
    let x = h.generator() * c(nu * t);
    let matrix = truncated_exp_series(&x, truncation);
    let norm = h.spectral_norm() * nu * t;
    let remainder = simplex_volume(truncation as u32 + 1, norm);
    Ok(PropagatorEstimate {
        matrix,
        method: Method::ExactSeries,
        stderr: 0.0,
        truncation_or_samples: truncation as u64,
        remainder_bound: Some(remainder),
    })
}

/// Reference propagator `e^{−iνHt}` by scaling and squaring.
pub fn matrix_exponential(h: &Hamiltonian, t: f64, nu: f64) -> Result<PropagatorEstimate> {
    check_time(t)?;
    check_nu(nu)?;
    Ok(PropagatorEstimate {
        matrix: expm(&h.matrix().mapv(|z| -I * nu * t * z)),
        method: Method::MatrixExponential,
        stderr: 0.0,
        truncation_or_samples: 0,
        remainder_bound: None,
    })
}

/// The single-point factor `p⋆ G p` with `p = (1, 1)/√2`, which is
/// `I + L/2`.
pub fn pairing_factor(h: &Hamiltonian) -> Array2<C64> {
    let g = InteractionOperator::new(h);
    // pair with (1, 1) and rescale by exactly 1/2 to avoid rounding in (1/√2)²
    let p = array![c(1.0), c(1.0)];
    g.pair(&p, &p) * c(0.5)
}

/// [`pairing_factor`] for a positive boost `ν`. Sampling at intensity `2ν`
/// turns `2ν·(factor − I) = −iνH` into the boosted generator.
pub fn coherent_pairing_factor(h: &Hamiltonian, nu: f64) -> Result<Array2<C64>> {
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(Error::NonPositive { name: "nu", value: nu });
    }
    Ok(pairing_factor(h))
}

/// Ordered product `f(t_k) ⋯ f(t_1)` over chain points before `t`.
pub fn chain_product(factor: &Array2<C64>, chain: &Chain, t: f64) -> Array2<C64> {
    let mut out = eye(factor.nrows());
    for _ in 0..chain.count_before(t) {
        out = factor.dot(&out);
    }
    out
}

/// Averages per-chain products of `factor` over chains from `source`.
pub fn mc_average<S>(factor: &Array2<C64>, t: f64, samples: u64, exec: Execution, source: S) -> SampleSummary
where
    S: Fn(u64) -> Chain + Sync,
{
    let d = factor.nrows();
    summarize(samples, (d, d), exec, |i| chain_product(factor, &source(i), t))
}

fn to_estimate(summary: SampleSummary) -> PropagatorEstimate {
    PropagatorEstimate {
        matrix: summary.mean,
        method: Method::MonteCarlo,
        stderr: summary.stderr,
        truncation_or_samples: summary.samples,
        remainder_bound: None,
    }
}

/// Poisson Monte Carlo estimate of `e^{−iνHt}` with the default execution.
pub fn mc_expectation(h: &Hamiltonian, config: &PoissonConfig) -> PropagatorEstimate {
    mc_expectation_with(h, config, Execution::default())
}

pub fn mc_expectation_with(h: &Hamiltonian, config: &PoissonConfig, exec: Execution) -> PropagatorEstimate {
    let factor = pairing_factor(h);
    let summary = mc_average(&factor, config.horizon, config.samples, exec, |i| {
        sample_chain(config, i)
    });
    to_estimate(summary)
}

/// Monte Carlo estimate over chains supplied by the caller.
pub fn mc_expectation_from<S>(h: &Hamiltonian, t: f64, samples: u64, exec: Execution, source: S) -> PropagatorEstimate
where
    S: Fn(u64) -> Chain + Sync,
{
    to_estimate(mc_average(&pairing_factor(h), t, samples, exec, source))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_diff, zeros};

    #[test]
    fn chain_validation() {
        assert!(Chain::new(vec![0.1, 0.5, 0.9], 1.0).is_ok());
        assert!(Chain::new(vec![], 1.0).is_ok());
        assert!(Chain::new(vec![0.5, 0.5], 1.0).is_err());
        assert!(Chain::new(vec![0.6, 0.5], 1.0).is_err());
        assert!(Chain::new(vec![1.0], 1.0).is_err());
        assert!(Chain::new(vec![-0.1], 1.0).is_err());
        assert!(Chain::new(vec![], 0.0).is_err());
    }

    #[test]
    fn count_before_and_window() {
        let ch = Chain::new(vec![0.1, 0.4, 0.7, 1.2], 2.0).unwrap();
        assert_eq!(ch.count_before(0.05), 0);
        assert_eq!(ch.count_before(0.4), 1);
        assert_eq!(ch.count_before(2.0), 4);
        let w = ch.window(0.3, 1.0).unwrap();
        assert_eq!(w.len(), 3);
        assert!((w.times()[0] - 0.1).abs() < 1e-15);
        assert_eq!(w.horizon(), 1.0);
    }

    #[test]
    fn zero_intensity_gives_empty_chain() {
        let cfg = PoissonConfig::new(0.0, 1.0, 10, 3).unwrap();
        for i in 0..10 {
            assert!(sample_chain(&cfg, i).is_empty());
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let cfg = PoissonConfig::new(3.0, 2.0, 1, 77).unwrap();
        for i in [0, 1, 999, u64::MAX] {
            assert_eq!(sample_chain(&cfg, i), sample_chain(&cfg, i));
        }
        let a: Vec<_> = (0..20).map(|i| sample_chain(&cfg, i).len()).collect();
        let b: Vec<_> = (0..20)
            .map(|i| sample_chain(&PoissonConfig { seed: 78, ..cfg }, i).len())
            .collect();
        assert_ne!(a, b);
    }

    #[test]
    fn config_validation() {
        assert!(PoissonConfig::new(-1.0, 1.0, 1, 0).is_err());
        assert!(PoissonConfig::new(1.0, 0.0, 1, 0).is_err());
        assert!(PoissonConfig::new(1.0, 1.0, 0, 0).is_err());
        assert_eq!(PoissonConfig::new(1.5, 1.0, 1, 0).unwrap().intensity(), 3.0);
    }

    #[test]
    fn simplex_volume_examples() {
        assert_eq!(simplex_volume(0, 3.0), 1.0);
        assert_eq!(simplex_volume(1, 3.0), 3.0);
        assert!((simplex_volume(2, 1.0) - 0.5).abs() < 1e-16);
        assert!((simplex_volume(5, 2.0) - 32.0 / 120.0).abs() < 1e-15);
    }

    #[test]
    fn zero_hamiltonian_series_is_identity() {
        for n in [0, 1, 25] {
            let est = exact_expectation(&Hamiltonian::zero(3), 1.7, 2.0, n).unwrap();
            assert_eq!(est.matrix, eye(3));
        }
    }

    #[test]
    fn pauli_z_series() {
        let est = exact_expectation(&Hamiltonian::pauli_z(), 1.0, 1.0, 25).unwrap();
        assert!((est.matrix[[0, 0]] - C64::new(0.0, -1.0).exp()).norm() < 1e-10);
        assert!((est.matrix[[1, 1]] - C64::new(0.0, 1.0).exp()).norm() < 1e-10);
        assert_eq!(est.matrix[[0, 1]], c(0.0));
        assert!(est.remainder_bound.unwrap() < 1e-25);
    }

    #[test]
    fn boost_doubles_time() {
        let h = Hamiltonian::pauli_z();
        let a = exact_expectation(&h, 0.8, 2.0, 25).unwrap();
        let b = exact_expectation(&h, 1.6, 1.0, 25).unwrap();
        assert!(max_abs_diff(&a.matrix, &b.matrix) < 1e-10);
    }

    #[test]
    fn negative_inputs_rejected() {
        let h = Hamiltonian::pauli_z();
        assert!(exact_expectation(&h, -1.0, 1.0, 5).is_err());
        assert!(exact_expectation(&h, 1.0, -1.0, 5).is_err());
        assert!(matrix_exponential(&h, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn pairing_factor_examples() {
        assert_eq!(coherent_pairing_factor(&Hamiltonian::zero(2), 1.0).unwrap(), eye(2));
        let f = coherent_pairing_factor(&Hamiltonian::pauli_x(), 1.0).unwrap();
        let expected = array![[c(1.0), C64::new(0.0, -0.5)], [C64::new(0.0, -0.5), c(1.0)]];
        assert!(max_abs_diff(&f, &expected) < 1e-15);
        assert!(coherent_pairing_factor(&Hamiltonian::pauli_x(), 0.0).is_err());
    }

    #[test]
    fn pairing_factor_consistency() {
        let h = Hamiltonian::random(3, 4);
        for nu in [0.5, 1.0, 3.0] {
            let f = coherent_pairing_factor(&h, nu).unwrap();
            let lhs = (f - eye(3)) * c(2.0 * nu);
            let rhs = h.generator() * c(nu);
            assert!(max_abs_diff(&lhs, &rhs) < 1e-14);
        }
    }

    #[test]
    fn mc_zero_hamiltonian_is_exact_identity() {
        let cfg = PoissonConfig::new(1.0, 1.0, 2000, 1).unwrap();
        let est = mc_expectation(&Hamiltonian::zero(2), &cfg);
        assert_eq!(est.matrix, eye(2));
        assert_eq!(est.stderr, 0.0);
    }

    #[test]
    fn mc_single_forced_empty_chain() {
        let est = mc_expectation_from(&Hamiltonian::pauli_y(), 1.0, 1, Execution::Sequential, |_| {
            Chain::empty(1.0)
        });
        assert_eq!(est.matrix, eye(2));
        assert_eq!(est.truncation_or_samples, 1);
    }

    #[test]
    fn chain_product_counts_only_points_before_t() {
        let f = array![[c(2.0), c(0.0)], [c(0.0), c(3.0)]];
        let ch = Chain::new(vec![0.1, 0.2, 0.9], 1.0).unwrap();
        let p = chain_product(&f, &ch, 0.5);
        assert_eq!(p, array![[c(4.0), c(0.0)], [c(0.0), c(9.0)]]);
        assert_eq!(chain_product(&zeros(2), &Chain::empty(1.0), 1.0), eye(2));
    }

    #[test]
    fn derived_seeds_differ() {
        assert_ne!(derive_seed(1, 0), derive_seed(1, 1));
        assert_ne!(derive_seed(1, 0), derive_seed(2, 0));
        assert_eq!(derive_seed(5, 7), derive_seed(5, 7));
    }
}
