//! Independent checks: kernel sampling, Monte Carlo estimators with standard
//! errors, nested conditional pricing, and a brute-force discrete quantile
//! optimizer that does not use the envelope.

use alloc::vec::Vec;

use libm::{exp, log, sqrt};

use crate::envelope::{build_phi, EnvelopeResult};
use crate::error::{Error, Result};
use crate::market::MarketParams;
use crate::measure::{empirical_wvar_sorted, wvar_log_return, QuantileCurve, WeightingMeasure};
use crate::normal::{cdf as ncdf, pdf as npdf, quantile as nq};
use crate::quad;
use crate::optimizer::EfficientSolution;
use crate::policy::{normal_draw, path_rng};
use rand_chacha::ChaCha8Rng;
use rand_core::RngCore;

/// A Monte Carlo estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
}

impl Estimate {
    /// Whether `target` lies within `k` standard errors, plus a `1e-9` relative
    /// floor for the quadrature error of `target` when the sample is degenerate.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.std_error + 1e-9 * target.abs().max(1.0)
    }

    /// `|mean - target|` in standard errors.
    pub fn z_score(&self, target: f64) -> f64 {
        (self.mean - target).abs() / self.std_error
    }
}

/// Sample mean and its standard error.
pub fn mean_estimate(values: &[f64]) -> Result<Estimate> {
    if values.is_empty() {
        return Err(Error::EmptySample);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return Ok(Estimate { mean, std_error: 0.0 });
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    Ok(Estimate { mean, std_error: sqrt(var / n) })
}

/// `n` i.i.d. draws of `ξ_T`, deterministic in `seed` (ChaCha8, stream 0,
/// inverse-CDF normals).
pub fn sample_kernel(params: &MarketParams, n: usize, seed: u64) -> Vec<f64> {
    sample_kernel_stream(params, n, seed, 0)
}

/// Like [`sample_kernel`] on an explicit stream, for chunked parallel sampling.
pub fn sample_kernel_stream(params: &MarketParams, n: usize, seed: u64, stream: u64) -> Vec<f64> {
    let k = params.kernel();
    let mut rng = path_rng(seed, stream);
    (0..n).map(|_| exp(k.log_mean + k.log_std * normal_draw(&mut rng))).collect()
}

/// `E[ξ_T X(ξ_T)]` from kernel samples.
pub fn estimate_budget(payoff: impl Fn(f64) -> f64, samples: &[f64]) -> Result<Estimate> {
    let v: Vec<f64> = samples.iter().map(|&xi| xi * payoff(xi)).collect();
    mean_estimate(&v)
}

/// Empirical WVaR of `samples` with a batch-means standard error over
/// `n_batches` contiguous batches.
pub fn empirical_wvar_estimate(m: &WeightingMeasure, samples: &[f64], n_batches: usize) -> Result<Estimate> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let b = n_batches.clamp(2, samples.len());
    let size = samples.len() / b;
    let mut batch_values = Vec::with_capacity(b);
    for i in 0..b {
        let mut chunk = samples[i * size..(i + 1) * size].to_vec();
        chunk.sort_by(f64::total_cmp);
        batch_values.push(empirical_wvar_sorted(m, &chunk));
    }
    let mut all = samples.to_vec();
    all.sort_by(f64::total_cmp);
    let se = mean_estimate(&batch_values)?.std_error;
    Ok(Estimate { mean: empirical_wvar_sorted(m, &all), std_error: se })
}

/// `E[ξ_T X*(ξ_T) | ξ_t] / ξ_t` by `n` conditional draws.
pub fn nested_price(
    sol: &EfficientSolution,
    t: f64,
    xi_t: f64,
    n: usize,
    seed: u64,
    stream: u64,
) -> Result<Estimate> {
    let p = sol.params();
    let tau = p.time_to_go(t)?;
    if !(xi_t > 0.0) {
        return Err(Error::domain("xi_t", xi_t));
    }
    let th = p.theta();
    let drift = -(p.r() + 0.5 * th * th) * tau;
    let vol = th * sqrt(tau);
    let lx0 = log(xi_t);
    let mut rng = path_rng(seed, stream);
    let v: Vec<f64> = (0..n)
        .map(|_| {
            let g = drift - vol * normal_draw(&mut rng);
            exp(g) * sol.payoff_at_log_kernel(lx0 + g)
        })
        .collect();
    mean_estimate(&v)
}

/// `λE[R] - ρ_Φ(R)` for the payoff with quantile `h` (given at scores
/// `u = N⁻¹(s)`), by quadrature. `break_scores` lists where `h` jumps or kinks.
pub fn quantile_objective(
    m: &WeightingMeasure,
    lambda: f64,
    params: &MarketParams,
    h: &dyn Fn(f64) -> f64,
    break_scores: &[f64],
) -> Result<f64> {
    let k = params.score_shift();
    let (x, t) = (params.x0(), params.horizon());
    let curve = QuantileCurve::new(|z| h(nq(z) + k))
        .with_breaks(break_scores.iter().map(|u| ncdf(u - k)).collect());
    let risk = wvar_log_return(m, &curve, x, t)?;
    if lambda == 0.0 {
        return Ok(-risk);
    }
    let shifted: Vec<f64> = break_scores.iter().map(|u| u - k).collect();
    let f = |v: f64| {
        let w = h(v + k);
        if w <= 0.0 {
            return f64::NEG_INFINITY;
        }
        log(w / x) / t * npdf(v)
    };
    let mean = quad::integrate_with_breaks(f, -8.0, 8.0, &shifted, 1e-12).value;
    Ok(lambda * mean - risk)
}

/// Objective at `H*` and at renormalized perturbations of it.
#[derive(Debug, Clone, PartialEq)]
pub struct Perturbation {
    pub optimum: f64,
    pub perturbed: Vec<f64>,
}

impl Perturbation {
    /// Largest `J(H_ε) - J(H*)`; nonpositive at an optimum.
    pub fn max_improvement(&self) -> f64 {
        self.perturbed.iter().fold(f64::NEG_INFINITY, |m, &j| m.max(j - self.optimum))
    }
}

/// A bounded nondecreasing step function of `s`, stored as jumps at scores.
struct Steps {
    scores: Vec<f64>,
    sizes: Vec<f64>,
    base: f64,
}

impl Steps {
    fn random(rng: &mut ChaCha8Rng) -> Self {
        let mut unit = || ((rng.next_u64() >> 11) as f64 + 0.5) / (1u64 << 53) as f64;
        let n = 1 + (unit() * 5.0) as usize;
        let mut scores: Vec<f64> = (0..n).map(|_| nq(0.001 + 0.998 * unit())).collect();
        scores.sort_by(f64::total_cmp);
        let sizes = (0..n).map(|_| unit()).collect();
        Self { scores, sizes, base: unit() - 0.5 }
    }

    fn at(&self, u: f64) -> f64 {
        self.base + self.scores.iter().zip(&self.sizes).filter(|(s, _)| u >= **s).map(|(_, d)| d).sum::<f64>()
    }
}

/// Evaluates `λE[R] - ρ_Φ(R)` at `H*` and at `n` payoffs
/// `c·max(H* + εD, 0)`, where `D` is a random bounded nondecreasing step
/// function, `ε` cycles through `{0.3, 0.03, 0.003}` and `c` restores the budget.
pub fn perturbation_test(sol: &EfficientSolution, n: usize, seed: u64) -> Result<Perturbation> {
    let lambda = sol.lambda();
    if !lambda.is_finite() {
        return Err(Error::UnsupportedStructure("KELLY"));
    }
    let (m, p) = (sol.measure(), sol.params());
    let target = p.x0() / p.kernel_mean();
    let base = sol.break_scores();
    let optimum = quantile_objective(m, lambda, p, &|u| sol.quantile_at_score(u), &base)?;
    let mut rng = path_rng(seed, 0);
    let mut perturbed = Vec::with_capacity(n);
    for i in 0..n {
        let d = Steps::random(&mut rng);
        let eps = [0.3, 0.03, 0.003][i % 3];
        let mut breaks = base.clone();
        breaks.extend(&d.scores);
        breaks.sort_by(f64::total_cmp);
        let raw = |u: f64| (sol.quantile_at_score(u) + eps * d.at(u)).max(0.0);
        let mass = quad::integrate_with_breaks(|u| raw(u) * npdf(u), -12.0, 12.0, &breaks, 1e-13).value;
        let c = target / mass;
        perturbed.push(quantile_objective(m, lambda, p, &|u| c * raw(u), &breaks)?);
    }
    Ok(Perturbation { optimum, perturbed })
}

/// Result of the discrete quantile optimizer.
#[derive(Debug, Clone, PartialEq)]
pub struct BruteForce {
    /// Cell edges `0 = s_0 < ... < s_k = 1`.
    pub edges: Vec<f64>,
    /// Nondecreasing cell values of `H`.
    pub h: Vec<f64>,
    pub objective: f64,
    /// Objective after each sweep.
    pub history: Vec<f64>,
}

/// Weights `c_j = λ Δw⁻¹ + Φ([w⁻¹(s_j), w⁻¹(s_{j+1})))` of the cells.
pub fn cell_weights(m: &WeightingMeasure, lambda: f64, params: &MarketParams, edges: &[f64]) -> Result<Vec<f64>> {
    let phi = build_phi(m, lambda, params)?;
    Ok(edges
        .windows(2)
        .map(|e| ((1.0 + lambda) * (phi.evaluate_left(e[1]) - phi.evaluate_left(e[0]))).max(0.0))
        .collect())
}

/// `Σ c_j ln h_j`, the discretized objective `λ∫ln H dw⁻¹ + ∫ln H dΦ(w⁻¹)`.
pub fn discrete_objective(weights: &[f64], h: &[f64]) -> f64 {
    weights
        .iter()
        .zip(h)
        .map(|(&c, &v)| if c == 0.0 { 0.0 } else if v <= 0.0 { f64::NEG_INFINITY } else { c * log(v) })
        .sum()
}

/// Cell averages of `H* = (x/E[ξ]) δ'` on `edges`.
pub fn envelope_cell_averages(env: &EnvelopeResult, params: &MarketParams, edges: &[f64]) -> Vec<f64> {
    let scale = params.x0() / params.kernel_mean();
    edges
        .windows(2)
        .map(|e| scale * (env.delta(e[1]) - env.delta(e[0])) / (e[1] - e[0]))
        .collect()
}

/// `k` equal cells in `s`, with the nearest interior edge moved onto each
/// jump `w(a)` of `φ` so step functions can jump where the optimum does.
pub fn aligned_grid(m: &WeightingMeasure, params: &MarketParams, k: usize) -> Vec<f64> {
    let mut edges: Vec<f64> = (0..=k).map(|i| i as f64 / k as f64).collect();
    for a in m.atoms() {
        let s = params.w(a.location).unwrap_or(0.0);
        let j = ((s * k as f64 + 0.5) as usize).clamp(1, k - 1);
        if s > edges[j - 1] && s < edges[j + 1] {
            edges[j] = s;
        }
    }
    edges
}

/// Brute-force optimizer on the `k`-cell [`aligned_grid`].
pub fn brute_force_quantile_opt(
    m: &WeightingMeasure,
    lambda: f64,
    params: &MarketParams,
    k: usize,
) -> Result<BruteForce> {
    if !(3..=50).contains(&k) {
        return Err(Error::domain("cells", k as f64));
    }
    brute_force_on_grid(m, lambda, params, &aligned_grid(m, params, k))
}

/// Brute-force optimizer on arbitrary edges.
///
/// Maximizes `Σ c_j ln h_j` over nondecreasing `h ≥ 0` with `Σ h_j Δ_j = x/E[ξ]`
/// by coordinate ascent from the constant start. Each move reallocates budget
/// between the two units on either side of a cell boundary (a unit is the run
/// of tied cells on that side, cut at the boundary); the two-variable
/// subproblem is solved in closed form and clipped to keep `h` nondecreasing.
pub fn brute_force_on_grid(
    m: &WeightingMeasure,
    lambda: f64,
    params: &MarketParams,
    edges: &[f64],
) -> Result<BruteForce> {
    if !(params.x0() > 0.0) {
        return Err(Error::domain("x0", params.x0()));
    }
    if edges.len() < 2 || edges[0] != 0.0 || *edges.last().unwrap() != 1.0 || edges.windows(2).any(|e| e[1] <= e[0]) {
        return Err(Error::domain("edges", edges.len() as f64));
    }
    let c = cell_weights(m, lambda, params, edges)?;
    let width: Vec<f64> = edges.windows(2).map(|e| e[1] - e[0]).collect();
    let budget = params.x0() / params.kernel_mean();
    let k = c.len();
    let mut h = alloc::vec![budget; k];
    let mut obj = discrete_objective(&c, &h);
    let mut history = alloc::vec![obj];

    for _ in 0..200_000 {
        for j in 0..k - 1 {
            let mut a = j;
            while a > 0 && h[a - 1] == h[j] {
                a -= 1;
            }
            let mut b = j + 1;
            while b + 1 < k && h[b + 1] == h[j + 1] {
                b += 1;
            }
            let (c1, w1): (f64, f64) = (c[a..=j].iter().sum(), width[a..=j].iter().sum());
            let (c2, w2): (f64, f64) = (c[j + 1..=b].iter().sum(), width[j + 1..=b].iter().sum());
            let total = h[j] * w1 + h[j + 1] * w2;
            let lo_prev = if a == 0 { 0.0 } else { h[a - 1] };
            let hi_next = if b + 1 == k { f64::INFINITY } else { h[b + 1] };
            let mut v1 = if c1 + c2 > 0.0 { c1 * total / ((c1 + c2) * w1) } else { h[j] };
            let tie = total / (w1 + w2);
            v1 = v1.min(tie).max(lo_prev).max((total - hi_next * w2) / w1);
            let v2 = if v1 == tie { tie } else { (total - v1 * w1) / w2 };
            let before = pair_objective(c1, c2, h[j], h[j + 1]);
            if pair_objective(c1, c2, v1, v2) > before {
                h[a..=j].fill(v1);
                h[j + 1..=b].fill(v2);
            }
        }
        let next = discrete_objective(&c, &h);
        history.push(next);
        let gain = next - obj;
        obj = next;
        if gain < 1e-12 {
            break;
        }
    }
    Ok(BruteForce { edges: edges.to_vec(), h, objective: obj, history })
}

fn pair_objective(c1: f64, c2: f64, v1: f64, v2: f64) -> f64 {
    let term = |c: f64, v: f64| if c == 0.0 { 0.0 } else if v <= 0.0 { f64::NEG_INFINITY } else { c * log(v) };
    term(c1, v1) + term(c2, v2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envelope::{envelope_es, envelope_var};
    use crate::market::base_market;
    use crate::measure::{Atom, DensitySegment};
    use alloc::vec;

    /// Pool-adjacent-violators solution of the same discrete problem.
    fn pava(c: &[f64], w: &[f64], budget: f64) -> Vec<f64> {
        let total: f64 = c.iter().sum();
        let mut blocks: Vec<(f64, f64, usize)> = Vec::new();
        for j in 0..c.len() {
            blocks.push((c[j], w[j], 1));
            while blocks.len() > 1 {
                let (b, a) = (blocks[blocks.len() - 1], blocks[blocks.len() - 2]);
                if a.0 / a.1 >= b.0 / b.1 {
                    blocks.pop();
                    blocks.pop();
                    blocks.push((a.0 + b.0, a.1 + b.1, a.2 + b.2));
                } else {
                    break;
                }
            }
        }
        blocks.iter().flat_map(|b| core::iter::repeat_n(budget * b.0 / (b.1 * total), b.2)).collect()
    }

    #[test]
    fn sampler_moments_and_determinism() {
        let p = base_market();
        let xs = sample_kernel(&p, 200_000, 11);
        assert_eq!(xs, sample_kernel(&p, 200_000, 11));
        assert_ne!(xs[0], sample_kernel(&p, 1, 12)[0]);
        let est = mean_estimate(&xs).unwrap();
        assert!(est.within(exp(-0.05), 3.0), "{est:?}");
        let mut sorted = xs.clone();
        sorted.sort_by(f64::total_cmp);
        let median = sorted[sorted.len() / 2];
        assert!((median - exp(-0.13)).abs() < 0.01);
    }

    #[test]
    fn budget_estimator() {
        let p = base_market();
        let xs = sample_kernel(&p, 100_000, 3);
        let kelly = estimate_budget(|xi| 1.0 / xi, &xs).unwrap();
        assert!((kelly.mean - 1.0).abs() < 1e-12 && kelly.std_error < 1e-12);
        let cst = estimate_budget(|_| 2.0, &xs).unwrap();
        assert!(cst.within(2.0 * exp(-0.05), 3.0));
    }

    #[test]
    fn coordinate_ascent_matches_pava() {
        let p = base_market();
        let measures = [
            WeightingMeasure::expected_shortfall(0.25).unwrap(),
            WeightingMeasure::dirac(0.25).unwrap(),
            WeightingMeasure::new(
                vec![Atom { location: 0.1, mass: 0.4 }],
                vec![DensitySegment { lo: 0.3, hi: 0.6, density: 2.0 }],
            )
            .unwrap(),
        ];
        for m in &measures {
            for lambda in [0.0, 0.3, 1.0, 5.0] {
                for k in [5, 20, 40] {
                    let bf = brute_force_quantile_opt(m, lambda, &p, k).unwrap();
                    let edges = &bf.edges;
                    let c = cell_weights(m, lambda, &p, edges).unwrap();
                    let w: Vec<f64> = edges.windows(2).map(|e| e[1] - e[0]).collect();
                    let exact = pava(&c, &w, exp(0.05));
                    let jo = discrete_objective(&c, &exact);
                    assert!(bf.objective >= jo - 1e-9, "λ={lambda} k={k}: {} < {jo}", bf.objective);
                    assert!(bf.h.windows(2).all(|v| v[1] >= v[0]));
                    let spent: f64 = bf.h.iter().zip(&w).map(|(h, w)| h * w).sum();
                    assert!((spent - exp(0.05)).abs() < 1e-12);
                    assert!(bf.history.windows(2).all(|v| v[1] >= v[0]));
                }
            }
        }
    }

    #[test]
    fn brute_force_near_envelope() {
        use crate::optimizer::{solve_es, solve_var};
        let p = base_market();
        for (m, env, sol) in [
            (
                WeightingMeasure::expected_shortfall(0.25).unwrap(),
                envelope_es(0.25, 1.0, &p).unwrap(),
                solve_es(0.25, 1.0, &p).unwrap(),
            ),
            (
                WeightingMeasure::dirac(0.25).unwrap(),
                envelope_var(0.25, 1.0, &p).unwrap(),
                solve_var(0.25, 1.0, &p).unwrap(),
            ),
        ] {
            // continuous optimum λ∫ln G dz + ∫ln G dΦ at x = T = 1
            let best = sol.expected_log_return() - sol.risk_value();
            let mut last_gap = f64::INFINITY;
            for k in [10, 20, 40] {
                let bf = brute_force_quantile_opt(&m, 1.0, &p, k).unwrap();
                let c = cell_weights(&m, 1.0, &p, &bf.edges).unwrap();
                let ana = envelope_cell_averages(&env, &p, &bf.edges);
                let on_grid = discrete_objective(&c, &ana);
                assert!(bf.objective >= on_grid - 1e-12);
                assert!(k < 20 || bf.objective - on_grid < 1e-3, "k={k}");
                let gap = best - bf.objective;
                assert!(gap > 0.0 && gap < last_gap, "k={k}: {gap}");
                last_gap = gap;
            }
        }
    }

    #[test]
    fn objective_of_optimum_matches_solution() {
        use crate::optimizer::{solve_es, solve_var};
        let p = base_market();
        for sol in [solve_es(0.05, 0.7, &p).unwrap(), solve_var(0.1, 2.0, &p).unwrap()] {
            let j = quantile_objective(sol.measure(), sol.lambda(), &p, &|u| sol.quantile_at_score(u), &sol.break_scores())
                .unwrap();
            let expect = sol.lambda() * sol.expected_log_return() - sol.risk_value();
            assert!((j - expect).abs() < 1e-9, "{j} vs {expect}");
        }
    }

    #[test]
    fn min_var_digital_shape() {
        let p = base_market();
        let wa = p.w(0.25).unwrap();
        let mut edges: Vec<f64> = (0..=8).map(|i| wa * i as f64 / 8.0).collect();
        edges.extend((1..=12).map(|i| wa + (1.0 - wa) * i as f64 / 12.0));
        let bf = brute_force_on_grid(&WeightingMeasure::dirac(0.25).unwrap(), 0.0, &p, &edges).unwrap();
        let level = exp(0.05) / (1.0 - wa);
        for (j, &v) in bf.h.iter().enumerate() {
            if j < 8 {
                assert_eq!(v, 0.0);
            } else {
                assert!((v - level).abs() < 1e-9, "{j}: {v}");
            }
        }
    }

    #[test]
    fn rejects_bad_grid() {
        let p = base_market();
        let m = WeightingMeasure::dirac(0.2).unwrap();
        assert!(brute_force_quantile_opt(&m, 1.0, &p, 2).is_err());
        assert!(brute_force_quantile_opt(&m, 1.0, &p, 51).is_err());
        assert!(brute_force_on_grid(&m, 1.0, &p, &[0.0, 0.5, 0.4, 1.0]).is_err());
    }
}
