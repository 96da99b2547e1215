//! Efficient terminal wealth, its risk and expected log-return, and the
//! mean-risk frontier.
//!
//! The optimal quantile is `H*(s) = (x/E[ξ_T]) δ'(s;λ)` and the payoff is
//! `X*(ξ) = H*(w(1 - F_ξ(ξ)))`. VaR and ES additionally get explicit
//! piecewise payoffs in `ξ` with named thresholds.

use alloc::boxed::Box;
use alloc::vec::Vec;

use libm::{exp, log};

use crate::envelope::{self, EnvelopeResult};
use crate::error::{Error, Result};
use crate::market::MarketParams;
use crate::measure::{self, QuantileCurve, WeightingMeasure};
use crate::normal::{cdf as ncdf, pdf as npdf, quantile as nq};
use crate::quad;

/// Thresholds of the mean-VaR payoff.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarThresholds {
    /// `ξ_α = G_ξ(1 - α)`, where the payoff jumps.
    pub xi_alpha: f64,
    /// `ξ̲_VaR` (λ > 0 only).
    pub xi_lower: Option<f64>,
    /// Constant payoff `X̲_VaR` on the middle band.
    pub level: f64,
    /// Score `N⁻¹(s*(λ))` of the bridge end (λ > 0 only).
    pub s_star_score: Option<f64>,
}

/// Thresholds of the mean-ES payoff.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EsThresholds {
    /// `ξ̄_ES`.
    pub xi_upper: f64,
    /// `ξ̲_ES = (λ/(1/α + λ)) ξ̄_ES` (λ > 0 only).
    pub xi_lower: Option<f64>,
    /// `X̲_ES`.
    pub level: f64,
    /// Score of `t₀` (λ = 0) or `t₁(λ)`.
    pub t_score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Structure {
    General,
    VarClosedForm(VarThresholds),
    EsClosedForm(EsThresholds),
    Kelly,
}

impl Structure {
    pub fn tag(&self) -> &'static str {
        match self {
            Structure::General => "GENERAL",
            Structure::VarClosedForm(_) => "VAR_CLOSED_FORM",
            Structure::EsClosedForm(_) => "ES_CLOSED_FORM",
            Structure::Kelly => "KELLY",
        }
    }
}

#[derive(Debug, Clone)]
enum Payoff {
    Envelope(Box<EnvelopeResult>),
    /// `below·x/ξ` for scores `u < lo`, `level` on `[lo, hi)`, `above·x/ξ` for
    /// `u ≥ hi`. Comparing scores keeps the jump at `ξ_α` exact.
    Banded { lo: f64, hi: f64, below: f64, level: f64, above: f64 },
    Kelly,
}

/// An optimal payoff for one `λ`, with its risk and expected log-return.
#[derive(Debug, Clone)]
pub struct EfficientSolution {
    lambda: f64,
    params: MarketParams,
    measure: WeightingMeasure,
    structure: Structure,
    payoff: Payoff,
    expected_log_return: f64,
    risk_value: f64,
    stated_risk: Option<f64>,
}

impl EfficientSolution {
    /// `λ`; `+∞` for the growth-optimal solution.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn params(&self) -> &MarketParams {
        &self.params
    }

    pub fn measure(&self) -> &WeightingMeasure {
        &self.measure
    }

    pub fn structure(&self) -> Structure {
        self.structure
    }

    /// The envelope behind the solution, if one was built.
    pub fn envelope(&self) -> Option<&EnvelopeResult> {
        match &self.payoff {
            Payoff::Envelope(e) => Some(e),
            _ => None,
        }
    }

    /// `E[R*]`, possibly `-∞`.
    pub fn expected_log_return(&self) -> f64 {
        self.expected_log_return
    }

    /// `ρ_Φ(R*) = -∫ G_R dΦ`, possibly `+∞`.
    pub fn risk_value(&self) -> f64 {
        self.risk_value
    }

    /// The risk expression as printed in the closed-form statements, when it
    /// exists. For VaR it carries the opposite sign of [`Self::risk_value`].
    pub fn stated_risk(&self) -> Option<f64> {
        self.stated_risk
    }

    /// Whether [`Self::stated_risk`] disagrees with [`Self::risk_value`].
    pub fn sign_discrepancy(&self) -> bool {
        self.stated_risk
            .is_some_and(|s| (s - self.risk_value).abs() > 1e-9 * s.abs().max(1.0))
    }

    /// `X*(ξ)`.
    pub fn payoff(&self, xi: f64) -> f64 {
        if !(xi > 0.0) {
            return f64::NAN;
        }
        self.payoff_at_log_kernel(log(xi))
    }

    /// `X*` at `ξ = e^{lx}`.
    pub fn payoff_at_log_kernel(&self, lx: f64) -> f64 {
        match &self.payoff {
            Payoff::Kelly => self.params.x0() * exp(-lx),
            Payoff::Banded { .. } => self.banded(self.params.score_of_log_kernel(lx), lx),
            Payoff::Envelope(_) => self.quantile_at_score(self.params.score_of_log_kernel(lx)),
        }
    }

    /// `H*` at the level with score `u = N⁻¹(s)`.
    pub fn quantile_at_score(&self, u: f64) -> f64 {
        match &self.payoff {
            Payoff::Envelope(e) => {
                self.params.x0() / self.params.kernel_mean() * e.delta_prime_at_score(u)
            }
            Payoff::Banded { .. } => self.banded(u, self.params.log_kernel_at_score(u)),
            Payoff::Kelly => self.params.x0() * exp(-self.params.log_kernel_at_score(u)),
        }
    }

    fn banded(&self, u: f64, lx: f64) -> f64 {
        let Payoff::Banded { lo, hi, below, level, above } = self.payoff else {
            unreachable!()
        };
        let kelly = || self.params.x0() * exp(-lx);
        if u < lo {
            if below == 0.0 {
                0.0
            } else {
                below * kelly()
            }
        } else if u < hi {
            level
        } else {
            above * kelly()
        }
    }

    /// `H*(s)`.
    pub fn optimal_quantile(&self, s: f64) -> f64 {
        self.quantile_at_score(nq(s))
    }

    /// Quantile of the terminal wealth, `G_{X*}(z) = H*(w(z))`.
    pub fn wealth_quantile(&self, z: f64) -> f64 {
        self.quantile_at_score(nq(z) + self.params.score_shift())
    }

    /// `G_{R*}(z) = (1/T) ln(H*(w(z))/x)`.
    pub fn log_return_quantile(&self, z: f64) -> f64 {
        let x = self.wealth_quantile(z);
        if x <= 0.0 {
            return f64::NEG_INFINITY;
        }
        log(x / self.params.x0()) / self.params.horizon()
    }

    /// Scores `u` at which `H*` jumps or kinks.
    pub fn break_scores(&self) -> Vec<f64> {
        let mut out = match &self.payoff {
            Payoff::Envelope(e) => e.kink_scores(),
            Payoff::Banded { lo, hi, .. } => alloc::vec![*lo, *hi],
            Payoff::Kelly => Vec::new(),
        };
        out.retain(|u| u.is_finite());
        out.sort_by(f64::total_cmp);
        out
    }

    /// `E[ξ_T X*] = E[ξ_T] ∫₀¹ H*(s) ds` by quadrature; equals `x0` at the optimum.
    pub fn budget(&self) -> f64 {
        let breaks = self.break_scores();
        let r = quad::integrate_with_breaks(
            |u| self.quantile_at_score(u) * npdf(u),
            -12.0,
            12.0,
            &breaks,
            1e-12,
        );
        self.params.kernel_mean() * r.value
    }

    /// Wealth quantile as a [`QuantileCurve`] with its jump levels declared.
    pub fn wealth_curve(&self) -> QuantileCurve<'_> {
        let k = self.params.score_shift();
        let breaks = self.break_scores().into_iter().map(|u| ncdf(u - k)).collect();
        QuantileCurve::new(move |z| self.wealth_quantile(z)).with_breaks(breaks)
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::domain("lambda", lambda));
    }
    Ok(())
}

/// Solves for any measure via the convex envelope; analytic envelopes are used
/// when `m` is a Dirac or ES measure, a sampled hull otherwise.
pub fn solve_general(m: &WeightingMeasure, lambda: f64, params: &MarketParams) -> Result<EfficientSolution> {
    check_lambda(lambda)?;
    let env = if let Some(alpha) = m.as_dirac() {
        envelope::envelope_var(alpha, lambda, params)?
    } else if let Some(alpha) = m.as_expected_shortfall() {
        envelope::envelope_es(alpha, lambda, params)?
    } else {
        envelope::envelope_numeric(&envelope::build_phi(m, lambda, params)?, envelope::DEFAULT_GRID)?
    };
    solve_with_envelope(env, params)
}

/// Builds the solution from a precomputed envelope.
pub fn solve_with_envelope(env: EnvelopeResult, params: &MarketParams) -> Result<EfficientSolution> {
    let mut sol = EfficientSolution {
        lambda: env.lambda(),
        params: *params,
        measure: env.phi().measure().clone(),
        structure: Structure::General,
        payoff: Payoff::Envelope(Box::new(env)),
        expected_log_return: 0.0,
        risk_value: 0.0,
        stated_risk: None,
    };
    sol.expected_log_return = expected_log_return(&sol);
    let risk = measure::wvar_log_return(&sol.measure, &sol.wealth_curve(), params.x0(), params.horizon())?;
    sol.risk_value = risk;
    Ok(sol)
}

/// Mean-VaR solution with explicit thresholds.
pub fn solve_var(alpha: f64, lambda: f64, params: &MarketParams) -> Result<EfficientSolution> {
    let env = envelope::envelope_var(alpha, lambda, params)?;
    let (x, t) = (params.x0(), params.horizon());
    let k = params.score_shift();
    let m = params.kernel().log_mean;
    let a = nq(alpha);
    let xi_alpha = exp(m - k * a);
    let th = if lambda == 0.0 {
        VarThresholds {
            xi_alpha,
            xi_lower: None,
            level: x / (params.kernel_mean() * ncdf(-(a + k))),
            s_star_score: None,
        }
    } else {
        let u = env.roots()[0].score;
        let xi_lower = exp(m - k * (u - k));
        VarThresholds {
            xi_alpha,
            xi_lower: Some(xi_lower),
            level: lambda / (1.0 + lambda) * x / xi_lower,
            s_star_score: Some(u),
        }
    };
    let stated = log(th.level / x) / t;
    let mut sol = EfficientSolution {
        lambda,
        params: *params,
        measure: env.phi().measure().clone(),
        structure: Structure::VarClosedForm(th),
        payoff: Payoff::Banded {
            lo: a + k,
            hi: th.s_star_score.unwrap_or(f64::INFINITY),
            below: lambda / (1.0 + lambda),
            level: th.level,
            above: lambda / (1.0 + lambda),
        },
        expected_log_return: 0.0,
        risk_value: -stated,
        stated_risk: Some(stated),
    };
    sol.expected_log_return = expected_log_return(&sol);
    Ok(sol)
}

/// Mean-ES solution with explicit thresholds.
pub fn solve_es(alpha: f64, lambda: f64, params: &MarketParams) -> Result<EfficientSolution> {
    let env = envelope::envelope_es(alpha, lambda, params)?;
    let x = params.x0();
    let k = params.score_shift();
    let m = params.kernel().log_mean;
    let u = env.roots()[0].score;
    let xi_upper = exp(m - k * (u - k));
    let g = (1.0 / alpha + lambda) / (1.0 + lambda);
    let th = EsThresholds {
        xi_upper,
        xi_lower: (lambda > 0.0).then(|| lambda / (1.0 / alpha + lambda) * xi_upper),
        level: g * x / xi_upper,
        t_score: u,
    };
    let stated = es_closed_form(alpha, lambda, xi_upper, params);
    let mut sol = EfficientSolution {
        lambda,
        params: *params,
        measure: env.phi().measure().clone(),
        structure: Structure::EsClosedForm(th),
        payoff: Payoff::Banded {
            lo: u,
            hi: if lambda > 0.0 { u + log((1.0 / alpha + lambda) / lambda) / k } else { f64::INFINITY },
            below: g,
            level: th.level,
            above: lambda / (1.0 + lambda),
        },
        expected_log_return: 0.0,
        risk_value: stated,
        stated_risk: Some(stated),
    };
    sol.expected_log_return = expected_log_return(&sol);
    // the definition of ρ_Φ is normative; keep the closed form only if it agrees
    let definitional = measure::wvar_log_return(&sol.measure, &sol.wealth_curve(), x, params.horizon())?;
    if (definitional - stated).abs() > 1e-7 * stated.abs().max(1.0) {
        sol.risk_value = definitional;
    }
    Ok(sol)
}

/// Closed-form `ES_α(R*)` given `ξ̄_ES`.
fn es_closed_form(alpha: f64, lambda: f64, xi_upper: f64, params: &MarketParams) -> f64 {
    let t = params.horizon();
    let th = params.theta();
    let b = (params.r() + 0.5 * th * th) * t;
    let sd = params.score_shift();
    let ln_alpha_state = params.kernel().log_mean - sd * nq(alpha);
    let c0 = if lambda == 0.0 { log(alpha) } else { log((1.0 + lambda) / (1.0 / alpha + lambda)) };
    let da = (ln_alpha_state + b) / sd;
    let du = (log(xi_upper) + b) / sd;
    (c0 * ncdf(-da) + log(xi_upper) * (ncdf(du) - ncdf(da)) + sd * npdf(du) - b * ncdf(-du)) / (alpha * t)
}

/// Growth-optimal payoff `x/ξ_T`, with its risk under `m`.
pub fn solve_kelly(m: &WeightingMeasure, params: &MarketParams) -> Result<EfficientSolution> {
    let mut sol = EfficientSolution {
        lambda: f64::INFINITY,
        params: *params,
        measure: m.clone(),
        structure: Structure::Kelly,
        payoff: Payoff::Kelly,
        expected_log_return: params.kelly_expected_return(),
        risk_value: 0.0,
        stated_risk: None,
    };
    let risk = measure::wvar_log_return(m, &sol.wealth_curve(), params.x0(), params.horizon())?;
    sol.risk_value = risk;
    Ok(sol)
}

/// Dispatches to the closed forms for VaR and ES, the envelope otherwise, and
/// the Kelly solution for `λ = +∞`.
pub fn solve(m: &WeightingMeasure, lambda: f64, params: &MarketParams) -> Result<EfficientSolution> {
    if lambda == f64::INFINITY {
        return solve_kelly(m, params);
    }
    if let Some(alpha) = m.as_dirac() {
        solve_var(alpha, lambda, params)
    } else if let Some(alpha) = m.as_expected_shortfall() {
        solve_es(alpha, lambda, params)
    } else {
        solve_general(m, lambda, params)
    }
}

/// `(1/T) ∫₀¹ ln(H*(w(z))/x) dz`, integrated in `v = N⁻¹(z)` over `[-8, 8]`.
pub fn expected_log_return(sol: &EfficientSolution) -> f64 {
    if let Structure::Kelly = sol.structure {
        return sol.params.kelly_expected_return();
    }
    let p = &sol.params;
    let k = p.score_shift();
    let (x, t) = (p.x0(), p.horizon());
    let breaks: Vec<f64> = sol.break_scores().into_iter().map(|u| u - k).collect();
    let f = |v: f64| {
        let h = sol.quantile_at_score(v + k);
        if h <= 0.0 {
            return f64::NEG_INFINITY;
        }
        log(h / x) / t * npdf(v)
    };
    quad::integrate_with_breaks(f, -8.0, 8.0, &breaks, 1e-12).value
}

/// One point of the efficient frontier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrontierPoint {
    pub lambda: f64,
    pub risk: f64,
    pub expected_log_return: f64,
}

/// Solves for one `λ` and reduces to `(risk, E[R])`.
pub fn frontier_point(m: &WeightingMeasure, lambda: f64, params: &MarketParams) -> Result<FrontierPoint> {
    let sol = solve(m, lambda, params)?;
    Ok(FrontierPoint { lambda, risk: sol.risk_value(), expected_log_return: sol.expected_log_return() })
}

/// Frontier over `lambda_grid` (sorted ascending), followed by the Kelly
/// endpoint at `λ = +∞`. Failures are reported per point.
pub fn frontier(
    m: &WeightingMeasure,
    lambda_grid: &[f64],
    params: &MarketParams,
) -> Result<Vec<Result<FrontierPoint>>> {
    if lambda_grid.is_empty() {
        return Err(Error::domain("lambda grid length", 0.0));
    }
    let mut grid = lambda_grid.to_vec();
    for &l in &grid {
        check_lambda(l)?;
    }
    grid.sort_by(f64::total_cmp);
    let mut out: Vec<Result<FrontierPoint>> = grid.iter().map(|&l| frontier_point(m, l, params)).collect();
    out.push(frontier_point(m, f64::INFINITY, params));
    Ok(out)
}

/// `n` log-spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) || n == 0 {
        return Err(Error::domain("log grid bounds", lo));
    }
    if n == 1 {
        return Ok(alloc::vec![lo]);
    }
    let (a, b) = (log(lo), log(hi));
    Ok((0..n).map(|i| exp(a + (b - a) * i as f64 / (n - 1) as f64)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::base_market;
    use crate::measure::{Atom, DensitySegment};
    use alloc::vec;
    use proptest::prelude::*;

    fn kernel_grid(p: &MarketParams) -> Vec<f64> {
        (1..400).map(|i| p.kernel_quantile(i as f64 / 400.0).unwrap()).collect()
    }

    #[test]
    fn min_var_level_and_return() {
        let p = base_market();
        let sol = solve_var(0.05, 0.0, &p).unwrap();
        let Structure::VarClosedForm(th) = sol.structure() else { panic!() };
        // 1/(e^{-0.05}(1 - w(0.05))) with w(0.05) = 0.10659277975...
        assert!((th.level - 1.176_698_68).abs() < 1e-7, "{}", th.level);
        assert_eq!(sol.expected_log_return(), f64::NEG_INFINITY);
        assert!((sol.risk_value() + log(th.level)).abs() < 1e-14);
        assert!(sol.sign_discrepancy());
        assert!((sol.budget() - 1.0).abs() < 1e-9);
        assert_eq!(sol.payoff(th.xi_alpha * 1.001), 0.0);
        assert_eq!(sol.payoff(th.xi_alpha * 0.999), th.level);
    }

    #[test]
    fn var_positive_lambda_shape() {
        let p = base_market();
        for lambda in [0.1, 1.0, 10.0] {
            let sol = solve_var(0.05, lambda, &p).unwrap();
            let Structure::VarClosedForm(th) = sol.structure() else { panic!() };
            let lo = th.xi_lower.unwrap();
            assert!(lo < th.xi_alpha);
            // continuous at ξ̲, jump down at ξ_α
            assert!((sol.payoff(lo * (1.0 - 1e-12)) - sol.payoff(lo * (1.0 + 1e-12))).abs() < 1e-9);
            assert!(sol.payoff(th.xi_alpha * 0.9999999) > sol.payoff(th.xi_alpha * 1.0000001) + 0.1);
            assert!((sol.budget() - 1.0).abs() < 1e-9);
            // the bridge slope of the envelope gives the same level
            let env = envelope::envelope_var(0.05, lambda, &p).unwrap();
            let level = p.x0() / p.kernel_mean() * env.affine_segments()[0].slope;
            assert!(((level - th.level) / th.level).abs() < 1e-9);
            assert!((sol.risk_value() + log(th.level)).abs() < 1e-12);
        }
    }

    #[test]
    fn es_shape_and_continuity() {
        let p = base_market();
        for lambda in [0.0, 0.5, 1.0, 5.0] {
            let sol = solve_es(0.05, lambda, &p).unwrap();
            let Structure::EsClosedForm(th) = sol.structure() else { panic!() };
            let hi = th.xi_upper;
            assert!((sol.payoff(hi * (1.0 - 1e-12)) - sol.payoff(hi * (1.0 + 1e-12))).abs() < 1e-9);
            if let Some(lo) = th.xi_lower {
                assert!(lo < hi);
                assert!((sol.payoff(lo * (1.0 - 1e-12)) - sol.payoff(lo * (1.0 + 1e-12))).abs() < 1e-9);
                let g = lambda / (1.0 + lambda) * p.x0() / lo;
                assert!(((g - th.level) / g).abs() < 1e-12);
            }
            assert!((sol.budget() - 1.0).abs() < 1e-9);
            assert!(!sol.sign_discrepancy(), "λ={lambda}");
        }
    }

    #[test]
    fn es_closed_form_matches_definition() {
        let p = base_market();
        for alpha in [0.01, 0.05, 0.25] {
            for lambda in [0.0, 0.5, 1.0, 5.0] {
                let sol = solve_es(alpha, lambda, &p).unwrap();
                let def = measure::wvar_log_return(sol.measure(), &sol.wealth_curve(), 1.0, 1.0).unwrap();
                assert!((def - sol.stated_risk().unwrap()).abs() < 1e-8, "α={alpha} λ={lambda}");
            }
        }
    }

    #[test]
    fn general_agrees_with_closed_forms() {
        let p = base_market();
        for lambda in [0.0, 0.5, 2.0] {
            for (m, closed) in [
                (WeightingMeasure::dirac(0.05).unwrap(), solve_var(0.05, lambda, &p).unwrap()),
                (WeightingMeasure::expected_shortfall(0.05).unwrap(), solve_es(0.05, lambda, &p).unwrap()),
            ] {
                let gen = solve_general(&m, lambda, &p).unwrap();
                for xi in kernel_grid(&p) {
                    let (a, b) = (gen.payoff(xi), closed.payoff(xi));
                    assert!((a - b).abs() <= 1e-6 * b.max(1.0), "ξ={xi}: {a} vs {b}");
                }
                assert!((gen.risk_value() - closed.risk_value()).abs() < 1e-8);
                let (ea, eb) = (gen.expected_log_return(), closed.expected_log_return());
                assert!(ea == eb || (ea - eb).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn kelly_endpoint() {
        let p = base_market();
        let es = solve_kelly(&WeightingMeasure::expected_shortfall(0.05).unwrap(), &p).unwrap();
        // -m + s ν(N⁻¹(α))/α for R ~ N(0.13, 0.4²)
        let expect = -0.13 + 0.4 * npdf(nq(0.05)) / 0.05;
        assert!((es.risk_value() - expect).abs() < 1e-8);
        assert!((es.risk_value() - 0.695_085_12).abs() < 1e-7);
        let var = solve_kelly(&WeightingMeasure::dirac(0.05).unwrap(), &p).unwrap();
        assert!((var.risk_value() + (0.13 + 0.4 * nq(0.05))).abs() < 1e-12);
        assert_eq!(var.expected_log_return(), 0.13);
        assert!((var.budget() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn expected_return_by_quadrature_is_exact_for_kelly_like_payoff() {
        // at λ = 10⁴ the ES payoff is within 1e-4 of x/ξ away from the band
        let p = base_market();
        let sol = solve_es(0.05, 1e4, &p).unwrap();
        assert!((sol.expected_log_return() - 0.13).abs() < 1e-3);
        let gen = solve_general(&WeightingMeasure::dirac(0.05).unwrap(), 1e4, &p).unwrap();
        let Structure::VarClosedForm(th) = solve_var(0.05, 1e4, &p).unwrap().structure() else { panic!() };
        for xi in kernel_grid(&p) {
            if xi > th.xi_lower.unwrap() * 0.99 && xi < th.xi_alpha * 1.01 {
                continue;
            }
            assert!(((gen.payoff(xi) - 1.0 / xi) * xi).abs() < 0.01);
        }
    }

    #[test]
    fn frontier_monotone_and_concave() {
        let p = base_market();
        let grid = log_grid(0.01, 100.0, 30).unwrap();
        for m in [WeightingMeasure::expected_shortfall(0.05).unwrap(), WeightingMeasure::dirac(0.05).unwrap()] {
            let pts: Vec<FrontierPoint> =
                frontier(&m, &grid, &p).unwrap().into_iter().map(|r| r.unwrap()).collect();
            assert_eq!(pts.len(), 31);
            for w in pts.windows(2) {
                assert!(w[1].risk >= w[0].risk - 1e-10);
                assert!(w[1].expected_log_return >= w[0].expected_log_return - 1e-10);
            }
            // near λ = 0 the ES frontier is flat to 1e-13; merge such points
            let mut kept: Vec<FrontierPoint> = Vec::new();
            for q in &pts[..30] {
                if kept.last().is_none_or(|l| q.risk - l.risk > 1e-9) {
                    kept.push(*q);
                }
            }
            let slopes: Vec<f64> = kept
                .windows(2)
                .map(|w| (w[1].expected_log_return - w[0].expected_log_return) / (w[1].risk - w[0].risk))
                .collect();
            for s in slopes.windows(2) {
                assert!(s[1] <= s[0] * (1.0 + 1e-6) + 1e-9, "{s:?}");
            }
        }
    }

    #[test]
    fn general_measure_solution() {
        let p = base_market();
        let m = WeightingMeasure::new(
            vec![Atom { location: 0.1, mass: 0.5 }],
            vec![DensitySegment { lo: 0.2, hi: 0.4, density: 2.5 }],
        )
        .unwrap();
        let sol = solve(&m, 0.5, &p).unwrap();
        assert_eq!(sol.structure().tag(), "GENERAL");
        assert!((sol.budget() - 1.0).abs() < 1e-6);
        let xs = kernel_grid(&p);
        for w in xs.windows(2) {
            assert!(sol.payoff(w[1]) <= sol.payoff(w[0]) * (1.0 + 1e-12));
        }
        // min-risk: payoff zero below w(z_Φ)
        let min = solve(&m, 0.0, &p).unwrap();
        assert_eq!(min.wealth_quantile(0.05), 0.0);
        assert_eq!(min.expected_log_return(), f64::NEG_INFINITY);
    }

    #[test]
    fn rejects_bad_input() {
        let p = base_market();
        assert!(solve_var(0.0, 1.0, &p).is_err());
        assert!(solve_es(0.5, -1.0, &p).is_err());
        assert!(frontier(&WeightingMeasure::dirac(0.05).unwrap(), &[], &p).is_err());
        assert!(log_grid(0.0, 1.0, 3).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn budgets_hold(alpha in 0.01f64..0.4, lambda in 0.0f64..20.0, es in any::<bool>()) {
            let p = base_market();
            let sol = if es { solve_es(alpha, lambda, &p) } else { solve_var(alpha, lambda, &p) }.unwrap();
            prop_assert!((sol.budget() - 1.0).abs() < 1e-8);
            let xs = kernel_grid(&p);
            for w in xs.windows(2) {
                prop_assert!(sol.payoff(w[1]) <= sol.payoff(w[0]) * (1.0 + 1e-12));
            }
        }
    }
}
