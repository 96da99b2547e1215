//! Black–Scholes market primitives.
//!
//! The pricing kernel `ξ_T` is lognormal with log-mean `-(r + θ²/2)T` and log-std
//! `θ√T`. Substituting its quantile into the weight function
//! `w(s) = ∫_{[0,s)} G_ξ(1-z) dz / E[ξ_T]` gives the closed forms
//! `w(s) = N(N⁻¹(s) + θ√T)` and `w⁻¹(s) = N(N⁻¹(s) - θ√T)`.
//!
//! Many computations downstream run in *score* coordinates `u = N⁻¹(s)`, where `w`
//! is a shift by `θ√T` and levels arbitrarily close to 1 stay representable.

use libm::{exp, log, sqrt};

use crate::error::{Error, Result};
use crate::normal;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketParams {
    r: f64,
    mu: f64,
    sigma: f64,
    horizon: f64,
    x0: f64,
    theta: f64,
}

/// Lognormal law of the terminal pricing kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelDistribution {
    pub log_mean: f64,
    pub log_std: f64,
}

impl MarketParams {
    /// `r` risk-free rate, `mu` stock drift, `sigma` volatility, `horizon` = T in
    /// years, `x0` initial wealth.
    pub fn new(r: f64, mu: f64, sigma: f64, horizon: f64, x0: f64) -> Result<Self> {
        if !(r.is_finite() && r >= 0.0) {
            return Err(Error::InvalidMarket("risk-free rate must be finite and >= 0"));
        }
        if !mu.is_finite() {
            return Err(Error::InvalidMarket("drift must be finite"));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidMarket("volatility must be > 0"));
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::InvalidMarket("horizon must be > 0"));
        }
        if !(x0.is_finite() && x0 > 0.0) {
            return Err(Error::InvalidMarket("initial wealth must be > 0"));
        }
        let theta = (mu - r) / sigma;
        if !theta.is_finite() || theta == 0.0 {
            return Err(Error::InvalidMarket("market price of risk must be finite and nonzero"));
        }
        if theta < 0.0 {
            return Err(Error::InvalidMarket(
                "market price of risk must be positive (drift above the risk-free rate)",
            ));
        }
        Ok(Self { r, mu, sigma, horizon, x0, theta })
    }

    /// Builds the market from the market price of risk directly; `mu = r + θσ`.
    pub fn with_theta(r: f64, theta: f64, sigma: f64, horizon: f64, x0: f64) -> Result<Self> {
        let mut p = Self::new(r, r + theta * sigma, sigma, horizon, x0)?;
        p.theta = theta;
        Ok(p)
    }

    pub fn r(&self) -> f64 {
        self.r
    }
    pub fn mu(&self) -> f64 {
        self.mu
    }
    pub fn sigma(&self) -> f64 {
        self.sigma
    }
    pub fn horizon(&self) -> f64 {
        self.horizon
    }
    pub fn x0(&self) -> f64 {
        self.x0
    }
    /// Market price of risk `θ = (μ - r)/σ`.
    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn kernel(&self) -> KernelDistribution {
        KernelDistribution {
            log_mean: -(self.r + 0.5 * self.theta * self.theta) * self.horizon,
            log_std: self.score_shift(),
        }
    }

    /// `θ√T`: the log-std of `ξ_T` and the shift of `w` in score coordinates.
    #[inline]
    pub fn score_shift(&self) -> f64 {
        self.theta * sqrt(self.horizon)
    }

    /// `E[ξ_T] = e^{-rT}`.
    pub fn kernel_mean(&self) -> f64 {
        exp(-self.r * self.horizon)
    }

    pub fn kernel_cdf(&self, y: f64) -> Result<f64> {
        if !(y > 0.0) {
            return Err(Error::domain("kernel value", y));
        }
        if y == f64::INFINITY {
            return Ok(1.0);
        }
        let k = self.kernel();
        Ok(normal::cdf((log(y) - k.log_mean) / k.log_std))
    }

    pub fn kernel_quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::domain("probability", p));
        }
        let k = self.kernel();
        Ok(exp(k.log_mean + k.log_std * normal::quantile(p)))
    }

    /// `w(s) = N(N⁻¹(s) + θ√T)`, exact at the endpoints.
    pub fn w(&self, s: f64) -> Result<f64> {
        check_unit("s", s)?;
        Ok(self.shift_level(s, self.score_shift()))
    }

    /// `w⁻¹(s) = N(N⁻¹(s) - θ√T)`, exact at the endpoints.
    pub fn w_inv(&self, s: f64) -> Result<f64> {
        check_unit("s", s)?;
        Ok(self.shift_level(s, -self.score_shift()))
    }

    fn shift_level(&self, s: f64, shift: f64) -> f64 {
        if s == 0.0 || s == 1.0 {
            return s;
        }
        normal::cdf(normal::quantile_clamped(s) + shift)
    }

    /// `(w⁻¹)'(s) = exp(θ√T·N⁻¹(s) - θ²T/2)` on the open interval.
    pub fn w_inv_prime(&self, s: f64) -> Result<f64> {
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::domain("s", s));
        }
        Ok(self.w_inv_prime_at_score(normal::quantile(s)))
    }

    /// `(w⁻¹)'` at the level whose score is `u`.
    #[inline]
    pub fn w_inv_prime_at_score(&self, u: f64) -> f64 {
        let k = self.score_shift();
        exp(k * u - 0.5 * k * k)
    }

    /// `ln ξ` of the kernel state that maps to the level with score `u` under
    /// `s = w(1 - F_ξ(ξ))`.
    #[inline]
    pub fn log_kernel_at_score(&self, u: f64) -> f64 {
        let k = self.score_shift();
        self.kernel().log_mean + k * k - k * u
    }

    /// Inverse of [`Self::log_kernel_at_score`].
    #[inline]
    pub fn score_of_log_kernel(&self, log_xi: f64) -> f64 {
        let k = self.score_shift();
        (self.kernel().log_mean + k * k - log_xi) / k
    }

    /// Black–Scholes-style `d₁(t, ξ_t, y)`.
    pub fn d1(&self, t: f64, xi_t: f64, y: f64) -> Result<f64> {
        let tau = self.time_to_go(t)?;
        if !(xi_t > 0.0) {
            return Err(Error::domain("xi_t", xi_t));
        }
        if !(y > 0.0) {
            return Err(Error::domain("y", y));
        }
        Ok(self.d1_unchecked(tau, log(y / xi_t)))
    }

    pub fn d2(&self, t: f64, xi_t: f64, y: f64) -> Result<f64> {
        let tau = self.time_to_go(t)?;
        Ok(self.d1(t, xi_t, y)? - self.theta * sqrt(tau))
    }

    /// `d₁` from time-to-go and `ln(y/ξ_t)`.
    #[inline]
    pub(crate) fn d1_unchecked(&self, tau: f64, log_ratio: f64) -> f64 {
        let th = self.theta;
        (log_ratio + (self.r + 0.5 * th * th) * tau) / (th * sqrt(tau))
    }

    pub(crate) fn time_to_go(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0 && t < self.horizon) {
            return Err(Error::domain("t", t));
        }
        Ok(self.horizon - t)
    }

    /// Expected log-return of the growth-optimal payoff `x/ξ_T`: `r + θ²/2`.
    pub fn kelly_expected_return(&self) -> f64 {
        self.r + 0.5 * self.theta * self.theta
    }
}

fn check_unit(what: &'static str, s: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::domain(what, s));
    }
    Ok(())
}

#[cfg(test)]
pub(crate) fn base_market() -> MarketParams {
    MarketParams::with_theta(0.05, 0.4, 0.2, 1.0, 1.0).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_degenerate_markets() {
        assert!(MarketParams::new(0.05, 0.05, 0.2, 1.0, 1.0).is_err());
        assert!(MarketParams::new(0.05, 0.1, 0.0, 1.0, 1.0).is_err());
        assert!(MarketParams::new(0.05, 0.1, 0.2, 0.0, 1.0).is_err());
        assert!(MarketParams::new(0.05, 0.1, 0.2, 1.0, -1.0).is_err());
        assert!(MarketParams::new(0.05, 0.01, 0.2, 1.0, 1.0).is_err());
    }

    #[test]
    fn kernel_median_and_tail() {
        let p = base_market();
        assert!((p.kernel_cdf(exp(-0.13)).unwrap() - 0.5).abs() < 1e-15);
        assert!((p.kernel_quantile(0.5).unwrap() - exp(-0.13)).abs() < 1e-15);
        // exp(-0.13 + 0.4·N⁻¹(0.95))
        let q95 = p.kernel_quantile(0.95).unwrap();
        assert!((q95 - 1.695_438_570_090_933_8).abs() < 1e-12);
        assert!((p.kernel_cdf(1.6955).unwrap() - 0.95).abs() < 1e-4);
        assert!(p.kernel_cdf(1e-300).unwrap() < 1e-12);
        assert!(p.kernel_cdf(1e300).unwrap() > 1.0 - 1e-12);
        assert!(p.kernel_cdf(0.0).is_err());
        assert!(p.kernel_quantile(1.0).is_err());
    }

    #[test]
    fn weight_function_values() {
        let p = base_market();
        assert_eq!(p.w(0.0).unwrap(), 0.0);
        assert_eq!(p.w(1.0).unwrap(), 1.0);
        assert_eq!(p.w_inv(0.0).unwrap(), 0.0);
        assert!((p.w(0.5).unwrap() - 0.655_421_741_610_324_2).abs() < 1e-14);
        assert!((p.w(0.05).unwrap() - 0.106_592_779_752_479_94).abs() < 1e-14);
        assert!((p.w_inv(0.5).unwrap() - 0.344_578_258_389_675_8).abs() < 1e-14);
        assert!(p.w(1.5).is_err());
        assert!(p.w_inv(-0.5).is_err());
    }

    #[test]
    fn w_inv_prime_values() {
        let p = base_market();
        assert!((p.w_inv_prime(0.5).unwrap() - exp(-0.08)).abs() < 1e-15);
        let s = normal::cdf(0.2);
        assert!((p.w_inv_prime(s).unwrap() - 1.0).abs() < 1e-14);
        assert!(p.w_inv_prime(0.2).unwrap() < p.w_inv_prime(0.8).unwrap());
        assert!(p.w_inv_prime(0.0).is_err());
        assert!(p.w_inv_prime(1.0).is_err());
        for i in 1..20 {
            let s = i as f64 / 20.0;
            let h = 1e-5;
            let fd = (p.w_inv(s + h).unwrap() - p.w_inv(s - h).unwrap()) / (2.0 * h);
            assert!((fd - p.w_inv_prime(s).unwrap()).abs() < 1e-6);
        }
    }

    #[test]
    fn d1_d2_helpers() {
        let p = base_market();
        let tau = 0.7;
        let y = 1.3 * exp(-(0.05 + 0.08) * tau);
        assert!(p.d1(0.3, 1.3, y).unwrap().abs() < 1e-14);
        let d1 = p.d1(0.0, 1.0, 1.6955).unwrap();
        assert!((d1 - (log(1.6955) + 0.13) / 0.4).abs() < 1e-14);
        let y95 = p.kernel_quantile(0.95).unwrap();
        let d1 = p.d1(0.0, 1.0, y95).unwrap();
        assert!((d1 - normal::quantile(0.95)).abs() < 1e-12);
        assert!((p.d2(0.0, 1.0, y95).unwrap() - (normal::quantile(0.95) - 0.4)).abs() < 1e-12);
        assert!((p.d1(0.5, 2.0, 0.7).unwrap() - p.d2(0.5, 2.0, 0.7).unwrap() - 0.4 * sqrt(0.5)).abs() < 1e-14);
        assert!(p.d1(1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn kelly_return() {
        assert!((base_market().kelly_expected_return() - 0.13).abs() < 1e-15);
        let p = MarketParams::with_theta(0.0, 1.0, 0.3, 3.0, 1.0).unwrap();
        assert!((p.kelly_expected_return() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn score_coordinates_round_trip() {
        let p = base_market();
        for &u in &[-30.0, -3.0, 0.0, 1.7, 40.0] {
            let lx = p.log_kernel_at_score(u);
            assert!((p.score_of_log_kernel(lx) - u).abs() < 1e-12);
        }
        // score of w(α) corresponds to ξ_α = G_ξ(1-α)
        let a = normal::quantile(0.05);
        let xi_alpha = p.kernel_quantile(0.95).unwrap();
        assert!((p.log_kernel_at_score(a + 0.4) - log(xi_alpha)).abs() < 1e-13);
    }
}
