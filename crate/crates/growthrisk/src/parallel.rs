//! Rayon drivers. Work is split into fixed, seed-addressed units (one λ, one
//! path, one sampling chunk), so results do not depend on the thread count.

use growthrisk_core::optimizer::{frontier_point, FrontierPoint};
use growthrisk_core::oracle::sample_kernel_stream;
use growthrisk_core::policy::{simulate_path, PathOutcome};
use growthrisk_core::{EfficientSolution, Error, MarketParams, ReplicationReport, Result, Structure, WeightingMeasure};
use rayon::prelude::*;

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "GROWTH_RISK_THREADS";

/// Draws per sampling chunk; chunk `i` uses RNG stream `i + 1`.
pub const CHUNK: usize = 1 << 16;

/// Worker count from [`THREADS_ENV`], if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|&n: &usize| n > 0)
}

/// Runs `f` inside a pool sized by [`thread_cap`] (rayon's default otherwise).
pub fn with_pool<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_cap() {
        b = b.num_threads(n);
    }
    match b.build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

/// Frontier points for each λ in parallel, sorted by λ, with the Kelly point
/// appended. Per-point failures stay in the output.
pub fn frontier(m: &WeightingMeasure, grid: &[f64], params: &MarketParams) -> Result<Vec<Result<FrontierPoint>>> {
    if grid.is_empty() {
        return Err(Error::Domain { what: "lambda grid length", value: 0.0 });
    }
    if let Some(&bad) = grid.iter().find(|l| !(**l >= 0.0 && l.is_finite())) {
        return Err(Error::Domain { what: "lambda", value: bad });
    }
    let mut lambdas = grid.to_vec();
    lambdas.sort_by(f64::total_cmp);
    lambdas.push(f64::INFINITY);
    Ok(lambdas.par_iter().map(|&l| frontier_point(m, l, params)).collect())
}

/// Terminal outcomes of paths `0..n_paths` (path `i` on stream `i`).
pub fn simulate_paths(sol: &EfficientSolution, n_steps: usize, n_paths: usize, seed: u64) -> Result<Vec<PathOutcome>> {
    (0..n_paths as u64).into_par_iter().map(|i| simulate_path(sol, n_steps, seed, i, |_| {})).collect()
}

/// Parallel counterpart of `policy::replicate`, with identical results.
pub fn replicate(
    sol: &EfficientSolution,
    n_steps: usize,
    n_paths: usize,
    seed: u64,
    band: f64,
) -> Result<ReplicationReport> {
    if let Structure::General = sol.structure() {
        return Err(Error::UnsupportedStructure("GENERAL"));
    }
    if n_steps < 100 {
        return Err(Error::Domain { what: "n_steps", value: n_steps as f64 });
    }
    let outcomes = simulate_paths(sol, n_steps, n_paths, seed)?;
    Ok(ReplicationReport::from_outcomes(sol, n_steps, &outcomes, band))
}

/// `n` kernel draws in chunks of [`CHUNK`].
pub fn sample_kernel(params: &MarketParams, n: usize, seed: u64) -> Vec<f64> {
    let chunks = n.div_ceil(CHUNK);
    let parts: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|i| sample_kernel_stream(params, CHUNK.min(n - i * CHUNK), seed, i as u64 + 1))
        .collect();
    parts.concat()
}
