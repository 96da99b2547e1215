//! The composite slope function `φ(s;λ) = (Φ([0, w⁻¹(s)]) + λ w⁻¹(s))/(1+λ)`,
//! its left-continuous version, and the convex envelope `δ` of `φ(s−;λ)`.
//!
//! The optimal quantile is `(x/E[ξ]) δ'(w(z))`, so everything downstream only
//! needs `δ'`. VaR and ES have semi-closed envelopes (one bridge each, located by
//! a scalar root); any other measure goes through a sampled lower hull.
//!
//! Roots are solved in score coordinates `u = N⁻¹(s)`. In those coordinates `w`
//! is a shift by `k = θ√T`, `(w⁻¹)'(s) = exp(k u - k²/2)`, and the ES tangency
//! map `y(s)` is a shift by `ln((1/α+λ)/λ)/k`, so bridges ending within 1e-300 of
//! 0 or 1 are still located exactly.

use alloc::vec::Vec;

use libm::{exp, log};

use crate::error::{Error, Result};
use crate::market::MarketParams;
use crate::measure::WeightingMeasure;
use crate::normal::{cdf as ncdf, quantile as nq};
use crate::roots::bisect;

/// `φ(·;λ)` for a fixed measure and market.
#[derive(Debug, Clone)]
pub struct PhiCurve {
    measure: WeightingMeasure,
    lambda: f64,
    params: MarketParams,
    /// `(w(a), N⁻¹(a) + k, mass)` per atom, sorted.
    atoms: Vec<(f64, f64, f64)>,
    /// `(N⁻¹(lo) + k, N⁻¹(hi) + k, density)` per density segment.
    seg_scores: Vec<(f64, f64, f64)>,
}

/// Builds `φ(·;λ)`.
pub fn build_phi(m: &WeightingMeasure, lambda: f64, params: &MarketParams) -> Result<PhiCurve> {
    check_lambda(lambda)?;
    let k = params.score_shift();
    let atoms = m
        .atoms()
        .iter()
        .map(|a| (params.w(a.location).unwrap_or(0.0), nq(a.location) + k, a.mass))
        .collect();
    let seg_scores = m
        .segments()
        .iter()
        .map(|s| (nq(s.lo) + k, nq(s.hi) + k, s.density))
        .collect();
    Ok(PhiCurve { measure: m.clone(), lambda, params: *params, atoms, seg_scores })
}

impl PhiCurve {
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn measure(&self) -> &WeightingMeasure {
        &self.measure
    }

    pub fn params(&self) -> &MarketParams {
        &self.params
    }

    /// `φ(s−;λ)`, with `φ(0−) = 0`.
    pub fn evaluate_left(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        if s >= 1.0 {
            return 1.0;
        }
        let z = self.params.w_inv(s).unwrap_or(0.0);
        let atoms: f64 = self.atoms.iter().filter(|a| a.0 < s).map(|a| a.2).sum();
        self.combine(atoms + self.measure.density_mass_below(z), z)
    }

    /// `φ(s;λ)`.
    pub fn evaluate_right(&self, s: f64) -> f64 {
        if s < 0.0 {
            return 0.0;
        }
        if s >= 1.0 {
            return 1.0;
        }
        let z = self.params.w_inv(s).unwrap_or(0.0);
        let atoms: f64 = self.atoms.iter().filter(|a| a.0 <= s).map(|a| a.2).sum();
        self.combine(atoms + self.measure.density_mass_below(z), z)
    }

    /// `φ(s−;λ)` at the level with score `u`.
    pub fn left_at_score(&self, u: f64) -> f64 {
        if u == f64::NEG_INFINITY {
            return 0.0;
        }
        if u == f64::INFINITY {
            return 1.0;
        }
        let z = ncdf(u - self.params.score_shift());
        let atoms: f64 = self.atoms.iter().filter(|a| a.1 < u).map(|a| a.2).sum();
        self.combine(atoms + self.measure.density_mass_below(z), z)
    }

    fn combine(&self, mass: f64, z: f64) -> f64 {
        ((mass + self.lambda * z) / (1.0 + self.lambda)).min(1.0)
    }

    /// Right derivative `φ'(s;λ)` away from jumps; `+∞` at `s = 1` unless the
    /// curve is flat there.
    pub fn derivative(&self, s: f64) -> f64 {
        let dens = if s >= 1.0 {
            0.0
        } else {
            self.measure.density_at(self.params.w_inv(s.max(0.0)).unwrap_or(0.0))
        };
        let factor = (dens + self.lambda) / (1.0 + self.lambda);
        if factor == 0.0 || s <= 0.0 {
            return 0.0;
        }
        if s >= 1.0 {
            return f64::INFINITY;
        }
        factor * self.params.w_inv_prime(s).unwrap_or(0.0)
    }

    /// `φ'` at the level with score `u`.
    pub fn derivative_at_score(&self, u: f64) -> f64 {
        let dens = self
            .seg_scores
            .iter()
            .find(|g| g.0 <= u && u < g.1)
            .map_or(0.0, |g| g.2);
        let factor = (dens + self.lambda) / (1.0 + self.lambda);
        if factor == 0.0 {
            return 0.0;
        }
        factor * self.params.w_inv_prime_at_score(u)
    }

    /// Levels `w(a)` of the atoms of `Φ`, sorted.
    pub fn jump_locations(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| a.0).collect()
    }

    /// Scores where `φ` jumps or its density factor changes.
    pub fn break_scores(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.atoms.iter().map(|a| a.1).collect();
        for g in &self.seg_scores {
            out.push(g.0);
            out.push(g.1);
        }
        out.retain(|u| u.is_finite());
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }
}

/// Affine piece `δ(s) = intercept + slope·s` on `(lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineSegment {
    pub lo: f64,
    pub hi: f64,
    pub slope: f64,
    pub intercept: f64,
    /// `N⁻¹(lo)`, `N⁻¹(hi)`; exact even where `lo`/`hi` round to 0 or 1.
    pub lo_score: f64,
    pub hi_score: f64,
}

/// A root of one of the envelope equations, with its residual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootReport {
    pub name: &'static str,
    pub level: f64,
    pub score: f64,
    pub residual: f64,
}

/// Continuous piecewise-linear function on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl PiecewiseLinear {
    pub fn vertices(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs.iter().copied().zip(self.ys.iter().copied())
    }

    fn segment(&self, s: f64) -> usize {
        let i = self.xs.partition_point(|&x| x <= s);
        i.clamp(1, self.xs.len() - 1) - 1
    }

    pub fn eval(&self, s: f64) -> f64 {
        let i = self.segment(s);
        let (x0, x1, y0, y1) = (self.xs[i], self.xs[i + 1], self.ys[i], self.ys[i + 1]);
        if s <= x0 {
            return y0;
        }
        if s >= x1 {
            return y1;
        }
        y0 + (y1 - y0) * (s - x0) / (x1 - x0)
    }

    /// Slope of the piece `[x_i, x_{i+1})` containing `s`.
    pub fn slope(&self, s: f64) -> f64 {
        let i = self.segment(s);
        (self.ys[i + 1] - self.ys[i]) / (self.xs[i + 1] - self.xs[i])
    }
}

#[derive(Debug, Clone)]
enum Repr {
    Bridged(Vec<AffineSegment>),
    Hull { hull: PiecewiseLinear, bridges: Vec<AffineSegment> },
}

/// Convex envelope `δ(·;λ)` of `φ(·−;λ)`.
#[derive(Debug, Clone)]
pub struct EnvelopeResult {
    phi: PhiCurve,
    repr: Repr,
    roots: Vec<RootReport>,
}

impl EnvelopeResult {
    pub fn phi(&self) -> &PhiCurve {
        &self.phi
    }

    pub fn lambda(&self) -> f64 {
        self.phi.lambda
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self.repr, Repr::Hull { .. })
    }

    /// Roots located by the analytic constructions (empty for numeric hulls).
    pub fn roots(&self) -> &[RootReport] {
        &self.roots
    }

    /// Maximal intervals on which `δ < φ(·−)`.
    pub fn affine_segments(&self) -> &[AffineSegment] {
        match &self.repr {
            Repr::Bridged(b) => b,
            Repr::Hull { bridges, .. } => bridges,
        }
    }

    pub fn delta(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        if s >= 1.0 {
            return 1.0;
        }
        match &self.repr {
            Repr::Bridged(bridges) => match bridges.iter().find(|b| b.lo < s && s <= b.hi) {
                Some(b) => b.intercept + b.slope * s,
                None => self.phi.evaluate_left(s),
            },
            Repr::Hull { hull, .. } => hull.eval(s),
        }
    }

    /// Right derivative `δ'(s)`.
    pub fn delta_prime(&self, s: f64) -> f64 {
        match &self.repr {
            Repr::Bridged(bridges) => match bridges.iter().find(|b| b.lo <= s && s < b.hi) {
                Some(b) => b.slope,
                None => self.phi.derivative(s),
            },
            Repr::Hull { hull, .. } => hull.slope(s),
        }
    }

    /// `δ'` at the level with score `u`; resolves levels that round to 0 or 1.
    pub fn delta_prime_at_score(&self, u: f64) -> f64 {
        match &self.repr {
            Repr::Bridged(bridges) => {
                match bridges.iter().find(|b| b.lo_score <= u && u < b.hi_score) {
                    Some(b) => b.slope,
                    None => self.phi.derivative_at_score(u),
                }
            }
            Repr::Hull { hull, .. } => hull.slope(ncdf(u)),
        }
    }

    /// Whether `δ(s) = φ(s−)` to within `tol`.
    pub fn is_contact(&self, s: f64, tol: f64) -> bool {
        (self.phi.evaluate_left(s) - self.delta(s)).abs() <= tol
    }

    /// Scores at which `δ'` may jump: bridge ends and the breaks of `φ`.
    pub fn kink_scores(&self) -> Vec<f64> {
        let mut out = self.phi.break_scores();
        for b in self.affine_segments() {
            out.push(b.lo_score);
            out.push(b.hi_score);
        }
        out.retain(|u| u.is_finite());
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::domain("lambda", lambda));
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain("alpha", alpha));
    }
    Ok(())
}

fn bridge(lo_score: f64, hi_score: f64, slope: f64, anchor: (f64, f64)) -> AffineSegment {
    AffineSegment {
        lo: ncdf(lo_score),
        hi: ncdf(hi_score),
        slope,
        intercept: anchor.1 - slope * anchor.0,
        lo_score,
        hi_score,
    }
}

/// Score-space constants shared by the VaR and ES constructions.
#[derive(Clone, Copy)]
struct Ctx {
    k: f64,
    a: f64,
    alpha: f64,
    lambda: f64,
}

impl Ctx {
    fn new(alpha: f64, lambda: f64, params: &MarketParams) -> Self {
        Self { k: params.score_shift(), a: nq(alpha), alpha, lambda }
    }

    /// Score of `w(α)`.
    fn ua(&self) -> f64 {
        self.a + self.k
    }

    /// `(w⁻¹)'` at score `u`.
    fn wip(&self, u: f64) -> f64 {
        exp(self.k * u - 0.5 * self.k * self.k)
    }

    /// `N(v) - N(u)` for `v ≥ u`, accurate in both tails.
    fn gap(u: f64, v: f64) -> f64 {
        if u > 0.0 {
            ncdf(-u) - ncdf(-v)
        } else {
            ncdf(v) - ncdf(u)
        }
    }

    fn f1(&self, u: f64) -> f64 {
        let l = self.lambda;
        let jump = 1.0 + l * (ncdf(u - self.k) - self.alpha);
        (jump - l * self.wip(u) * Self::gap(self.ua(), u)) / (1.0 + l)
    }

    fn f2(&self, u: f64) -> f64 {
        1.0 - ncdf(u - self.k) / self.alpha - self.wip(u) * ncdf(-u) / self.alpha
    }

    /// Score shift of `y(s)`.
    fn shift(&self) -> f64 {
        let c = (1.0 / self.alpha + self.lambda) / self.lambda;
        log(c) / self.k
    }

    fn f3(&self, u: f64) -> f64 {
        let l = self.lambda;
        let b = 1.0 / self.alpha + l;
        let v = u + self.shift();
        let phi_y = 1.0 + l * ncdf(v - self.k);
        let phi_s = b * ncdf(u - self.k);
        (phi_y - phi_s - b * self.wip(u) * Self::gap(u, v)) / (1.0 + l)
    }
}

fn var_ctx(alpha: f64, lambda: f64, params: &MarketParams) -> Result<Ctx> {
    check_alpha(alpha)?;
    check_lambda(lambda)?;
    Ok(Ctx::new(alpha, lambda, params))
}

/// `f₁(s;λ) = φ(s−) - φ(w(α)−) - φ'(s)(s - w(α))` for the VaR measure, on
/// `w(α) < s < 1`.
pub fn f1(s: f64, lambda: f64, alpha: f64, params: &MarketParams) -> Result<f64> {
    let c = var_ctx(alpha, lambda, params)?;
    if !(lambda > 0.0) {
        return Err(Error::domain("lambda", lambda));
    }
    if !(s > ncdf(c.ua()) && s < 1.0) {
        return Err(Error::domain("s", s));
    }
    Ok(c.f1(nq(s)))
}

/// `f₂(s) = 1 - φ(s−;0) - φ'(s;0)(1 - s)` for the ES measure, on `0 < s < w(α)`.
pub fn f2(s: f64, alpha: f64, params: &MarketParams) -> Result<f64> {
    let c = var_ctx(alpha, 0.0, params)?;
    if !(s > 0.0 && s < ncdf(c.ua())) {
        return Err(Error::domain("s", s));
    }
    Ok(c.f2(nq(s)))
}

fn es_inner(s: f64, lambda: f64, alpha: f64, params: &MarketParams) -> Result<(Ctx, f64)> {
    let c = var_ctx(alpha, lambda, params)?;
    if !(lambda > 0.0) {
        return Err(Error::domain("lambda", lambda));
    }
    let lo = ncdf(c.ua() - c.shift());
    if !(s > lo && s < ncdf(c.ua())) {
        return Err(Error::domain("s", s));
    }
    Ok((c, nq(s)))
}

/// `f₃(s;λ) = φ(y(s)−) - φ(s−) - φ'(s)(y(s) - s)` for the ES measure, on
/// `s̲(λ) < s < w(α)`.
pub fn f3(s: f64, lambda: f64, alpha: f64, params: &MarketParams) -> Result<f64> {
    let (c, u) = es_inner(s, lambda, alpha, params)?;
    Ok(c.f3(u))
}

/// The level `y(s) > w(α)` with `φ'(y(s)) = φ'(s)` for the ES measure.
pub fn y_map(s: f64, lambda: f64, alpha: f64, params: &MarketParams) -> Result<f64> {
    let (c, u) = es_inner(s, lambda, alpha, params)?;
    Ok(ncdf(u + c.shift()))
}

/// `s̲(λ)`: the level below which `y(s)` would fall short of `w(α)`.
pub fn s_lower(lambda: f64, alpha: f64, params: &MarketParams) -> Result<f64> {
    let c = var_ctx(alpha, lambda, params)?;
    if !(lambda > 0.0) {
        return Err(Error::domain("lambda", lambda));
    }
    Ok(ncdf(c.ua() - c.shift()))
}

/// Envelope for the VaR measure (Dirac mass at `alpha`).
pub fn envelope_var(alpha: f64, lambda: f64, params: &MarketParams) -> Result<EnvelopeResult> {
    let c = var_ctx(alpha, lambda, params)?;
    let phi = build_phi(&WeightingMeasure::dirac(alpha)?, lambda, params)?;
    let ua = c.ua();
    let wa = ncdf(ua);
    if lambda == 0.0 {
        let slope = 1.0 / ncdf(-ua);
        let b = bridge(ua, f64::INFINITY, slope, (wa, 0.0));
        return Ok(EnvelopeResult { phi, repr: Repr::Bridged(alloc::vec![b]), roots: Vec::new() });
    }

    let f = |u: f64| c.f1(u);
    let mut hi = ua + 1.0;
    let mut step = 1.0;
    for _ in 0..60 {
        if f(hi) < 0.0 {
            break;
        }
        hi += step;
        step *= 2.0;
    }
    let u_star = bisect("f1", f, ua, hi)?;
    let slope = phi.derivative_at_score(u_star);
    let b = bridge(ua, u_star, slope, (wa, lambda * alpha / (1.0 + lambda)));
    let roots = alloc::vec![RootReport {
        name: "f1",
        level: ncdf(u_star),
        score: u_star,
        residual: c.f1(u_star),
    }];
    Ok(EnvelopeResult { phi, repr: Repr::Bridged(alloc::vec![b]), roots })
}

/// Envelope for the expected-shortfall measure at `alpha`.
pub fn envelope_es(alpha: f64, lambda: f64, params: &MarketParams) -> Result<EnvelopeResult> {
    let c = var_ctx(alpha, lambda, params)?;
    let phi = build_phi(&WeightingMeasure::expected_shortfall(alpha)?, lambda, params)?;
    let ua = c.ua();
    if lambda == 0.0 {
        let f = |u: f64| c.f2(u);
        let mut lo = ua - 1.0;
        let mut step = 1.0;
        for _ in 0..60 {
            if f(lo) > 0.0 || lo < -38.0 {
                break;
            }
            lo -= step;
            step *= 2.0;
        }
        let u0 = bisect("f2", f, lo, ua)?;
        let t0 = ncdf(u0);
        let slope = phi.derivative_at_score(u0);
        let b = bridge(u0, f64::INFINITY, slope, (t0, phi.left_at_score(u0)));
        let roots = alloc::vec![RootReport { name: "f2", level: t0, score: u0, residual: c.f2(u0) }];
        return Ok(EnvelopeResult { phi, repr: Repr::Bridged(alloc::vec![b]), roots });
    }

    let u1 = bisect("f3", |u| c.f3(u), ua - c.shift(), ua)?;
    let t1 = ncdf(u1);
    let slope = phi.derivative_at_score(u1);
    let b = bridge(u1, u1 + c.shift(), slope, (t1, phi.left_at_score(u1)));
    let roots = alloc::vec![RootReport { name: "f3", level: t1, score: u1, residual: c.f3(u1) }];
    Ok(EnvelopeResult { phi, repr: Repr::Bridged(alloc::vec![b]), roots })
}

/// Default sample count for [`envelope_numeric`].
pub const DEFAULT_GRID: usize = 200_000;

/// Highest level sampled before the hull is closed at `(1, 1)`.
const TOP: f64 = 1.0 - 1e-10;

/// Sampled lower convex hull of `φ(·−;λ)` for an arbitrary measure.
pub fn envelope_numeric(phi: &PhiCurve, grid_size: usize) -> Result<EnvelopeResult> {
    if grid_size < 2 {
        return Err(Error::domain("grid_size", grid_size as f64));
    }
    let jumps: Vec<(f64, f64)> =
        phi.jump_locations().into_iter().map(|s| (s, phi.evaluate_right(s))).collect();
    let (hull, bridges) = lower_hull(|s| phi.evaluate_left(s), &jumps, grid_size);
    let bridges = bridges
        .into_iter()
        .map(|(lo, hi)| {
            let slope = (hull.eval(hi) - hull.eval(lo)) / (hi - lo);
            AffineSegment {
                lo,
                hi,
                slope,
                intercept: hull.eval(lo) - slope * lo,
                lo_score: nq(lo),
                hi_score: nq(hi),
            }
        })
        .collect();
    Ok(EnvelopeResult { phi: phi.clone(), repr: Repr::Hull { hull, bridges }, roots: Vec::new() })
}

/// Lower convex hull of a left-continuous function sampled on a uniform grid of
/// `grid_size` cells, plus score-spaced tails and `(s_j + ε, right value)` after
/// each jump `s_j`. The hull is refined twice around the ends of its bridges.
///
/// Returns the hull and the `(lo, hi)` bridges where it leaves the samples.
pub fn lower_hull<F: Fn(f64) -> f64>(
    f: F,
    jumps: &[(f64, f64)],
    grid_size: usize,
) -> (PiecewiseLinear, Vec<(f64, f64)>) {
    let n = grid_size;
    let h = 1.0 / n as f64;
    let mut pts: Vec<(f64, f64)> = Vec::with_capacity(n + 8000 + 2 * jumps.len());
    for i in 0..n {
        let s = i as f64 * h;
        pts.push((s, f(s)));
    }
    // tails in score space
    for i in 0..=5000 {
        let u = 3.0 + i as f64 * 0.001;
        for s in [ncdf(u), ncdf(-u)] {
            if s > 0.0 && s < TOP {
                pts.push((s, f(s)));
            }
        }
    }
    pts.push((TOP, f(TOP)));
    for &(s, right) in jumps {
        pts.push((s, f(s)));
        let eps = (1e-3 * h).max(4.0 * f64::EPSILON * s);
        if s + eps < TOP {
            pts.push((s + eps, right));
        }
    }
    pts.push((1.0, 1.0));

    let mut width = 2.0 * h;
    let mut hull = chain(&mut pts);
    for _ in 0..2 {
        let ends = bridge_ends(&pts, &hull);
        if ends.is_empty() {
            break;
        }
        let step = width / 1000.0;
        for x in ends {
            for j in -1000..=1000 {
                let s = x + j as f64 * step;
                if s > 0.0 && s < TOP {
                    pts.push((s, f(s)));
                }
            }
        }
        width = 2.0 * step;
        hull = chain(&mut pts);
    }

    let bridges = bridge_spans(&pts, &hull);
    let (xs, ys) = hull.iter().map(|&i| pts[i]).unzip();
    (PiecewiseLinear { xs, ys }, bridges)
}

/// Andrew's monotone chain, lower half. Sorts and dedups `pts` in place and
/// returns hull vertex indices.
fn chain(pts: &mut Vec<(f64, f64)>) -> Vec<usize> {
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts.dedup_by(|b, a| a.0 == b.0);
    let mut hull: Vec<usize> = Vec::with_capacity(1024);
    for (i, p) in pts.iter().enumerate() {
        while hull.len() >= 2 {
            let o = pts[hull[hull.len() - 2]];
            let a = pts[hull[hull.len() - 1]];
            let cross = (a.0 - o.0) * (p.1 - o.1) - (a.1 - o.1) * (p.0 - o.0);
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    hull
}

/// Hull edges that skip samples lying measurably above the chord.
fn bridge_edges(pts: &[(f64, f64)], hull: &[usize]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for w in hull.windows(2) {
        let (i, j) = (w[0], w[1]);
        if j == i + 1 {
            continue;
        }
        let (p, q) = (pts[i], pts[j]);
        let slope = (q.1 - p.1) / (q.0 - p.0);
        let gap = pts[i + 1..j]
            .iter()
            .map(|r| r.1 - (p.1 + slope * (r.0 - p.0)))
            .fold(0.0, f64::max);
        if gap > 1e-12 {
            out.push((i, j));
        }
    }
    out
}

fn bridge_ends(pts: &[(f64, f64)], hull: &[usize]) -> Vec<f64> {
    let mut edges = bridge_edges(pts, hull);
    edges.sort_by(|a, b| (pts[b.1].0 - pts[b.0].0).total_cmp(&(pts[a.1].0 - pts[a.0].0)));
    edges.truncate(64);
    let mut ends: Vec<f64> = edges.iter().flat_map(|&(i, j)| [pts[i].0, pts[j].0]).collect();
    ends.retain(|&s| s > 0.0 && s < 1.0);
    ends
}

fn bridge_spans(pts: &[(f64, f64)], hull: &[usize]) -> Vec<(f64, f64)> {
    bridge_edges(pts, hull).into_iter().map(|(i, j)| (pts[i].0, pts[j].0)).collect()
}

/// Left end `z_Φ` of the support of `Φ` and whether it carries an atom. The
/// optimal payoff vanishes on the states below `w(z_Φ)` when `λ = 0`.
pub fn min_risk_support_left(m: &WeightingMeasure, _params: &MarketParams) -> (f64, bool) {
    m.support_left()
}
