// SPDX-License-Identifier: Apache-2.0

//! Deterministic block reduction for matrix-valued Monte Carlo estimators.
//!
//! Draws are grouped into fixed blocks of [`BLOCK_SIZE`] consecutive draw
//! indices. Each block is summed sequentially, and block partial sums are
//! combined by a balanced pairwise tree over block order. Neither step
//! depends on how work is scheduled, so the parallel and sequential paths
//! give bit-identical results.

use std::ops::Range;

use ndarray::Array2;

use crate::linalg::C64;

/// Number of consecutive draws summed sequentially before pairwise combination.
pub const BLOCK_SIZE: u64 = 1024;

/// Execution strategy for the block map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Uses rayon when the `parallel` feature is enabled, otherwise
    /// silently runs sequentially.
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

/// Moments of a matrix-valued sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSummary {
    pub samples: u64,
    pub mean: Array2<C64>,
    /// Entrywise sample standard deviation, `sqrt(Σ|x − x̄|² / (M − 1))`.
    pub std_dev: Array2<f64>,
    /// Largest entrywise standard error `std_dev / √M`.
    pub stderr: f64,
    /// Largest entrywise standard deviation.
    pub fluctuation: f64,
    /// Approximate standard error of `fluctuation`, from the fourth
    /// central moment of the maximising entry.
    pub fluctuation_stderr: f64,
}

fn blocks(samples: u64) -> Vec<Range<u64>> {
    (0..samples.div_ceil(BLOCK_SIZE))
        .map(|b| b * BLOCK_SIZE..((b + 1) * BLOCK_SIZE).min(samples))
        .collect()
}

fn block_map<T, F>(samples: u64, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(Range<u64>) -> T + Sync,
{
    let ranges = blocks(samples);
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            ranges.into_par_iter().map(&f).collect()
        }
        _ => ranges.into_iter().map(f).collect(),
    }
}

/// Balanced pairwise combination in index order.
fn pairwise<T, F>(items: &[T], add: &F) -> T
where
    T: Clone,
    F: Fn(&T, &T) -> T,
{
    match items.len() {
        0 => panic!("pairwise reduction of an empty slice"),
        1 => items[0].clone(),
        n => {
            let (l, r) = items.split_at(n / 2);
            add(&pairwise(l, add), &pairwise(r, add))
        }
    }
}

/// Evaluates `eval(i)` for `i in 0..samples` and returns mean and spread.
///
/// `eval` is called twice per draw (once per pass), so it must be a pure
/// function of the draw index.
pub fn summarize<F>(samples: u64, shape: (usize, usize), exec: Execution, eval: F) -> SampleSummary
where
    F: Fn(u64) -> Array2<C64> + Sync,
{
    assert!(samples > 0, "at least one sample is required");
    let m = samples as f64;

    let sums = block_map(samples, exec, |range| {
        let mut acc = Array2::<C64>::zeros(shape);
        for i in range {
            acc += &eval(i);
        }
        acc
    });
    let mean = pairwise(&sums, &|a, b| a + b) / C64::new(m, 0.0);

    let central = block_map(samples, exec, |range| {
        let mut s2 = Array2::<f64>::zeros(shape);
        let mut s4 = Array2::<f64>::zeros(shape);
        for i in range {
            let x = eval(i);
            ndarray::Zip::from(&mut s2)
                .and(&mut s4)
                .and(&x)
                .and(&mean)
                .for_each(|s2, s4, x, mu| {
                    let d2 = (x - mu).norm_sqr();
                    *s2 += d2;
                    *s4 += d2 * d2;
                });
        }
        (s2, s4)
    });
    let (s2, s4) = pairwise(&central, &|a, b| (&a.0 + &b.0, &a.1 + &b.1));

    let std_dev = if samples > 1 {
        s2.mapv(|v| (v / (m - 1.0)).sqrt())
    } else {
        Array2::zeros(shape)
    };

    let (argmax, fluctuation) = std_dev
        .indexed_iter()
        .fold(((0, 0), 0.0_f64), |best, (idx, &s)| if s > best.1 { (idx, s) } else { best });

    let fluctuation_stderr = if fluctuation > 0.0 {
        let m2 = s2[argmax] / m;
        let m4 = s4[argmax] / m;
        ((m4 - m2 * m2).max(0.0) / m).sqrt() / (2.0 * fluctuation)
    } else {
        0.0
    };

    SampleSummary {
        samples,
        mean,
        stderr: fluctuation / m.sqrt(),
        fluctuation,
        fluctuation_stderr,
        std_dev,
    }
}
