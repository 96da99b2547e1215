//! Time-`t` wealth `X_t = E[ξ_T X*_T | F_t]/ξ_t`, the dollar amount `π_t` held
//! in the stock, and Euler replication of the terminal payoff.
//!
//! All closed forms use
//! `d₁(t, ξ_t, y) = (ln(y/ξ_t) + (r + θ²/2)(T-t)) / (θ√(T-t))` and
//! `d₂ = d₁ - θ√(T-t)`.

use alloc::vec::Vec;

use libm::{exp, log, sqrt};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::market::MarketParams;
use crate::normal::{cdf as ncdf, pdf as npdf, quantile as nq};
use crate::optimizer::{EfficientSolution, EsThresholds, Structure, VarThresholds};

/// Wealth and stock position at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyState {
    pub t: f64,
    pub xi_t: f64,
    pub wealth: f64,
    pub stock_dollars: f64,
}

struct Greeks<'a> {
    p: &'a MarketParams,
    tau: f64,
    xi: f64,
    disc: f64,
    vol: f64,
}

impl<'a> Greeks<'a> {
    fn new(p: &'a MarketParams, t: f64, xi: f64) -> Result<Self> {
        let tau = p.time_to_go(t)?;
        if !(xi > 0.0 && xi.is_finite()) {
            return Err(Error::domain("xi_t", xi));
        }
        Ok(Self { p, tau, xi, disc: exp(-p.r() * tau), vol: p.theta() * sqrt(tau) })
    }

    fn d1(&self, y: f64) -> f64 {
        self.p.d1_unchecked(self.tau, log(y / self.xi))
    }

    fn d2(&self, y: f64) -> f64 {
        self.d1(y) - self.vol
    }

    /// `x/ξ_t`.
    fn kelly(&self) -> f64 {
        self.p.x0() / self.xi
    }

    /// `θ/σ`.
    fn ratio(&self) -> f64 {
        self.p.theta() / self.p.sigma()
    }
}

/// Mean-VaR wealth at `(t, ξ_t)`.
pub fn var_wealth(t: f64, xi_t: f64, th: &VarThresholds, lambda: f64, params: &MarketParams) -> Result<f64> {
    let g = Greeks::new(params, t, xi_t)?;
    let da = g.d2(th.xi_alpha);
    match th.xi_lower {
        None => Ok(th.level * g.disc * ncdf(da)),
        Some(lo) => {
            let f = lambda / (1.0 + lambda);
            let tails = ncdf(-g.d1(th.xi_alpha)) + ncdf(g.d1(lo));
            Ok(f * g.kelly() * tails + th.level * g.disc * (ncdf(da) - ncdf(g.d2(lo))))
        }
    }
}

/// Mean-VaR stock position at `(t, ξ_t)`.
pub fn var_policy(t: f64, xi_t: f64, th: &VarThresholds, lambda: f64, params: &MarketParams) -> Result<f64> {
    let g = Greeks::new(params, t, xi_t)?;
    let spike = g.disc * npdf(g.d2(th.xi_alpha)) / (params.sigma() * sqrt(g.tau));
    match th.xi_lower {
        None => Ok(th.level * spike),
        Some(lo) => {
            let f = lambda / (1.0 + lambda);
            let tails = ncdf(-g.d1(th.xi_alpha)) + ncdf(g.d1(lo));
            Ok(f * g.kelly() * tails * g.ratio() + spike * (th.level - f * params.x0() / th.xi_alpha))
        }
    }
}

/// Multiplier `(1/α + λ)/(1 + λ)` of the Kelly payoff above `ξ̄_ES`.
fn es_upper_factor(th: &EsThresholds, params: &MarketParams) -> f64 {
    th.level * th.xi_upper / params.x0()
}

/// Mean-ES wealth at `(t, ξ_t)`.
pub fn es_wealth(t: f64, xi_t: f64, th: &EsThresholds, lambda: f64, params: &MarketParams) -> Result<f64> {
    let g = Greeks::new(params, t, xi_t)?;
    let up = es_upper_factor(th, params);
    let mut x = up * g.kelly() * ncdf(-g.d1(th.xi_upper)) + th.level * g.disc * ncdf(g.d2(th.xi_upper));
    if let Some(lo) = th.xi_lower {
        let f = lambda / (1.0 + lambda);
        x += f * g.kelly() * ncdf(g.d1(lo)) - th.level * g.disc * ncdf(g.d2(lo));
    }
    Ok(x)
}

/// Mean-ES stock position at `(t, ξ_t)`.
pub fn es_policy(t: f64, xi_t: f64, th: &EsThresholds, lambda: f64, params: &MarketParams) -> Result<f64> {
    let g = Greeks::new(params, t, xi_t)?;
    let up = es_upper_factor(th, params);
    let mut w = up * ncdf(-g.d1(th.xi_upper));
    if let Some(lo) = th.xi_lower {
        w += lambda / (1.0 + lambda) * ncdf(g.d1(lo));
    }
    Ok(g.kelly() * g.ratio() * w)
}

/// `X_t` and `π_t` for a closed-form solution.
pub fn policy_state(sol: &EfficientSolution, t: f64, xi_t: f64) -> Result<PolicyState> {
    let p = sol.params();
    let l = sol.lambda();
    let (wealth, stock_dollars) = match sol.structure() {
        Structure::VarClosedForm(th) => (var_wealth(t, xi_t, &th, l, p)?, var_policy(t, xi_t, &th, l, p)?),
        Structure::EsClosedForm(th) => (es_wealth(t, xi_t, &th, l, p)?, es_policy(t, xi_t, &th, l, p)?),
        Structure::Kelly => {
            let g = Greeks::new(p, t, xi_t)?;
            (g.kelly(), g.kelly() * g.ratio())
        }
        Structure::General => return Err(Error::UnsupportedStructure("GENERAL")),
    };
    Ok(PolicyState { t, xi_t, wealth, stock_dollars })
}

/// Standard normal draw by inversion of a 53-bit uniform on the open interval.
#[inline]
pub fn normal_draw<R: RngCore>(rng: &mut R) -> f64 {
    let u = ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0);
    nq(u)
}

/// Generator for path `path_id`: ChaCha8 keyed by `seed`, one stream per path.
pub fn path_rng(seed: u64, path_id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path_id);
    rng
}

/// Terminal outcome of one simulated path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathOutcome {
    pub xi_terminal: f64,
    pub simulated: f64,
    pub target: f64,
}

/// Simulates one path from `ξ_0 = 1`, `X_0 = x0`: `ln ξ` exactly, wealth by an
/// Euler step of `dX = rX dt + σπ(θ dt + dW)` with `π` evaluated at the start of
/// each step. `record` receives the state at every step start.
pub fn simulate_path(
    sol: &EfficientSolution,
    n_steps: usize,
    seed: u64,
    path_id: u64,
    mut record: impl FnMut(&PolicyState),
) -> Result<PathOutcome> {
    if n_steps == 0 {
        return Err(Error::domain("n_steps", 0.0));
    }
    let p = sol.params();
    let (r, th, sg) = (p.r(), p.theta(), p.sigma());
    let dt = p.horizon() / n_steps as f64;
    let sdt = sqrt(dt);
    let drift = -(r + 0.5 * th * th) * dt;
    let mut rng = path_rng(seed, path_id);
    let (mut lx, mut x) = (0.0f64, p.x0());
    for i in 0..n_steps {
        let t = i as f64 * dt;
        let mut st = policy_state(sol, t, exp(lx))?;
        st.wealth = x;
        record(&st);
        let z = normal_draw(&mut rng);
        x += r * x * dt + sg * st.stock_dollars * (th * dt + sdt * z);
        lx += drift - th * sdt * z;
    }
    Ok(PathOutcome { xi_terminal: exp(lx), simulated: x, target: sol.payoff_at_log_kernel(lx) })
}

/// Terminal tracking error over many paths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplicationReport {
    pub n_paths: usize,
    pub n_steps: usize,
    /// Paths dropped because `ξ_T` fell in the band around a payoff jump.
    pub excluded: usize,
    /// `sqrt(mean((X_sim - X*)²))` over the kept paths.
    pub rmse: f64,
    /// `rmse / sqrt(mean(X*²))`.
    pub relative_rmse: f64,
    pub max_abs_error: f64,
}

/// Relative half-width of the exclusion band around `ξ_α` for VaR.
pub const DEFAULT_EXCLUSION: f64 = 0.05;

/// Whether `xi` lies inside the band around the payoff jump of `sol`.
pub fn near_jump(sol: &EfficientSolution, xi: f64, band: f64) -> bool {
    match sol.structure() {
        Structure::VarClosedForm(th) => (xi - th.xi_alpha).abs() < band * th.xi_alpha,
        _ => false,
    }
}

impl ReplicationReport {
    /// Aggregates path outcomes in the given order.
    pub fn from_outcomes(
        sol: &EfficientSolution,
        n_steps: usize,
        outcomes: &[PathOutcome],
        band: f64,
    ) -> Self {
        let (mut se, mut s2, mut kept, mut max) = (0.0, 0.0, 0usize, 0.0f64);
        for o in outcomes {
            if near_jump(sol, o.xi_terminal, band) {
                continue;
            }
            let e = o.simulated - o.target;
            se += e * e;
            s2 += o.target * o.target;
            max = max.max(e.abs());
            kept += 1;
        }
        let n = kept.max(1) as f64;
        let rmse = sqrt(se / n);
        Self {
            n_paths: outcomes.len(),
            n_steps,
            excluded: outcomes.len() - kept,
            rmse,
            relative_rmse: rmse / sqrt(s2 / n),
            max_abs_error: max,
        }
    }
}

/// Serial replication over `n_paths` paths; path `i` uses stream `i`.
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
        return Err(Error::domain("n_steps", n_steps as f64));
    }
    let outcomes = (0..n_paths as u64)
        .map(|i| simulate_path(sol, n_steps, seed, i, |_| {}))
        .collect::<Result<Vec<_>>>()?;
    Ok(ReplicationReport::from_outcomes(sol, n_steps, &outcomes, band))
}
