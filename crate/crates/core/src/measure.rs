//! Weighting measures `Φ` on `[0, 1]` and the WVaR functional `ρ_Φ(X) = -∫ G_X dΦ`.

use alloc::boxed::Box;
use alloc::vec::Vec;

use libm::log;

use crate::error::{Error, Result};
use crate::quad;

/// Point mass of `Φ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub location: f64,
    pub mass: f64,
}

/// Constant density on `[lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensitySegment {
    pub lo: f64,
    pub hi: f64,
    pub density: f64,
}

/// A probability measure on `[0, 1]` made of finitely many atoms and
/// piecewise-constant densities.
///
/// Construction enforces `Φ({1}) = 0` and rejects the uniform measure on `[0, 1]`;
/// both make the optimization trivial.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightingMeasure {
    atoms: Vec<Atom>,
    segments: Vec<DensitySegment>,
}

const MASS_TOL: f64 = 1e-12;

impl WeightingMeasure {
    pub fn new(atoms: Vec<Atom>, segments: Vec<DensitySegment>) -> Result<Self> {
        let mut atoms = atoms;
        for a in &atoms {
            if !(a.location >= 0.0 && a.location < 1.0) {
                return Err(Error::InvalidMeasure("atoms must lie in [0, 1)"));
            }
            if !(a.mass > 0.0 && a.mass.is_finite()) {
                return Err(Error::InvalidMeasure("atom masses must be positive"));
            }
        }
        atoms.sort_by(|x, y| x.location.total_cmp(&y.location));
        // merge duplicates
        let mut merged: Vec<Atom> = Vec::with_capacity(atoms.len());
        for a in atoms {
            match merged.last_mut() {
                Some(last) if last.location == a.location => last.mass += a.mass,
                _ => merged.push(a),
            }
        }

        let mut segs: Vec<DensitySegment> = Vec::with_capacity(segments.len());
        for s in segments {
            if !(s.lo >= 0.0 && s.hi <= 1.0 && s.lo < s.hi) {
                return Err(Error::InvalidMeasure("density segments need 0 <= lo < hi <= 1"));
            }
            if !(s.density >= 0.0 && s.density.is_finite()) {
                return Err(Error::InvalidMeasure("densities must be finite and >= 0"));
            }
            if s.density > 0.0 {
                segs.push(s);
            }
        }
        segs.sort_by(|x, y| x.lo.total_cmp(&y.lo));
        if segs.windows(2).any(|w| w[1].lo < w[0].hi) {
            return Err(Error::InvalidMeasure("density segments overlap"));
        }
        let mut joined: Vec<DensitySegment> = Vec::with_capacity(segs.len());
        for s in segs {
            match joined.last_mut() {
                Some(last) if last.hi == s.lo && last.density == s.density => last.hi = s.hi,
                _ => joined.push(s),
            }
        }

        let total: f64 = merged.iter().map(|a| a.mass).sum::<f64>()
            + joined.iter().map(|s| s.density * (s.hi - s.lo)).sum::<f64>();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidMeasure("total mass must equal 1"));
        }
        if merged.is_empty()
            && joined.len() == 1
            && joined[0].lo == 0.0
            && joined[0].hi == 1.0
            && joined[0].density == 1.0
        {
            return Err(Error::InvalidMeasure("the uniform measure on [0, 1] is excluded"));
        }
        Ok(Self { atoms: merged, segments: joined })
    }

    /// Dirac mass at `alpha`: WVaR becomes VaR at level `alpha`.
    pub fn dirac(alpha: f64) -> Result<Self> {
        check_level(alpha)?;
        Self::new(alloc::vec![Atom { location: alpha, mass: 1.0 }], Vec::new())
    }

    /// Density `1/alpha` on `[0, alpha]`: WVaR becomes expected shortfall.
    pub fn expected_shortfall(alpha: f64) -> Result<Self> {
        check_level(alpha)?;
        Ok(Self {
            atoms: Vec::new(),
            segments: alloc::vec![DensitySegment { lo: 0.0, hi: alpha, density: 1.0 / alpha }],
        })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn segments(&self) -> &[DensitySegment] {
        &self.segments
    }

    /// `Some(alpha)` if this is exactly a Dirac mass.
    pub fn as_dirac(&self) -> Option<f64> {
        match (self.atoms.as_slice(), self.segments.is_empty()) {
            ([a], true) => Some(a.location),
            _ => None,
        }
    }

    /// `Some(alpha)` if this is exactly the ES weighting at `alpha`.
    pub fn as_expected_shortfall(&self) -> Option<f64> {
        match (self.atoms.is_empty(), self.segments.as_slice()) {
            (true, [s]) if s.lo == 0.0 && (s.density * s.hi - 1.0).abs() <= MASS_TOL => Some(s.hi),
            _ => None,
        }
    }

    /// `Φ([0, z])`.
    pub fn cdf(&self, z: f64) -> f64 {
        if z >= 1.0 {
            return 1.0;
        }
        let atoms: f64 = self.atoms.iter().filter(|a| a.location <= z).map(|a| a.mass).sum();
        (atoms + self.density_mass_below(z)).clamp(0.0, 1.0)
    }

    /// `Φ([0, z))`.
    pub fn cdf_left(&self, z: f64) -> f64 {
        let atoms: f64 = self.atoms.iter().filter(|a| a.location < z).map(|a| a.mass).sum();
        let v = (atoms + self.density_mass_below(z)).clamp(0.0, 1.0);
        if z >= 1.0 && (v - 1.0).abs() <= MASS_TOL {
            1.0
        } else {
            v
        }
    }

    pub(crate) fn density_mass_below(&self, z: f64) -> f64 {
        self.segments
            .iter()
            .map(|s| s.density * (z.clamp(s.lo, s.hi) - s.lo))
            .sum()
    }

    /// Right-continuous density at `z`.
    pub fn density_at(&self, z: f64) -> f64 {
        self.segments
            .iter()
            .find(|s| s.lo <= z && z < s.hi)
            .map_or(0.0, |s| s.density)
    }

    /// Left end of the support, `z_Φ = sup{z : Φ([0, z]) = 0}`, and whether it
    /// carries an atom.
    pub fn support_left(&self) -> (f64, bool) {
        let first_atom = self.atoms.first().map_or(f64::INFINITY, |a| a.location);
        let first_seg = self.segments.first().map_or(f64::INFINITY, |s| s.lo);
        if first_atom <= first_seg {
            (first_atom, true)
        } else {
            (first_seg, false)
        }
    }

    /// Every location where `Φ` has an atom or its density changes.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = self.atoms.iter().map(|a| a.location).collect();
        for s in &self.segments {
            pts.push(s.lo);
            pts.push(s.hi);
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }
}

fn check_level(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain("alpha", alpha));
    }
    Ok(())
}

/// A quantile function `z ↦ G(z)` on `[0, 1)`, possibly taking `-∞`.
pub struct QuantileCurve<'a> {
    f: Box<dyn Fn(f64) -> f64 + 'a>,
    breaks: Vec<f64>,
}

impl<'a> QuantileCurve<'a> {
    pub fn new(f: impl Fn(f64) -> f64 + 'a) -> Self {
        Self { f: Box::new(f), breaks: Vec::new() }
    }

    /// Declares jump locations so segment quadrature splits there.
    pub fn with_breaks(mut self, breaks: Vec<f64>) -> Self {
        self.breaks = breaks;
        self
    }

    pub fn eval(&self, z: f64) -> f64 {
        (self.f)(z)
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    fn check_monotone(&self, extra: &[f64]) -> Result<()> {
        const N: usize = 512;
        let mut pts: Vec<f64> = (1..N).map(|i| i as f64 / N as f64).collect();
        pts.extend_from_slice(extra);
        pts.extend_from_slice(&self.breaks);
        pts.retain(|z| (0.0..1.0).contains(z));
        pts.sort_by(f64::total_cmp);
        let mut prev = f64::NEG_INFINITY;
        for z in pts {
            let g = self.eval(z);
            if g.is_nan() {
                return Err(Error::NonMonotone { at: z });
            }
            if g < prev - 1e-12 * prev.abs().max(1.0) {
                return Err(Error::NonMonotone { at: z });
            }
            prev = g;
        }
        Ok(())
    }
}

/// `ρ_Φ = -∫ G dΦ`: exact atom sums plus adaptive quadrature over density segments.
///
/// Returns `+∞` when `G = -∞` on a set of positive `Φ`-mass.
pub fn wvar(m: &WeightingMeasure, g: &QuantileCurve<'_>) -> Result<f64> {
    g.check_monotone(&m.breakpoints())?;
    let mut integral = 0.0;
    for a in m.atoms() {
        integral += a.mass * g.eval(a.location);
    }
    for s in m.segments() {
        let part = quad::integrate_with_breaks(|z| g.eval(z), s.lo, s.hi, g.breaks(), quad::TOL);
        integral += s.density * part.value;
    }
    if integral == f64::NEG_INFINITY {
        return Ok(f64::INFINITY);
    }
    Ok(-integral)
}

/// WVaR of the log-return `(1/T) ln(X/x0)` given the quantile curve of `X ≥ 0`.
pub fn wvar_log_return(
    m: &WeightingMeasure,
    wealth_quantile: &QuantileCurve<'_>,
    x0: f64,
    horizon: f64,
) -> Result<f64> {
    let log_curve = QuantileCurve::new(|z| {
        let x = wealth_quantile.eval(z);
        if x <= 0.0 {
            f64::NEG_INFINITY
        } else {
            log(x / x0) / horizon
        }
    })
    .with_breaks(wealth_quantile.breaks().to_vec());
    wvar(m, &log_curve)
}

/// WVaR of the empirical distribution of `samples`.
///
/// The empirical quantile is the right-continuous order statistic
/// `G(z) = x_(⌊nz⌋+1)`; density segments integrate that step function exactly.
pub fn empirical_wvar(m: &WeightingMeasure, samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(empirical_wvar_sorted(m, &sorted))
}

/// [`empirical_wvar`] on samples already sorted ascending.
pub fn empirical_wvar_sorted(m: &WeightingMeasure, sorted: &[f64]) -> f64 {
    let n = sorted.len();
    let nf = n as f64;
    let order_stat = |z: f64| sorted[((z * nf) as usize).min(n - 1)];
    let mut integral = 0.0;
    for a in m.atoms() {
        integral += a.mass * order_stat(a.location);
    }
    for s in m.segments() {
        let first = (s.lo * nf) as usize;
        let last = (libm::ceil(s.hi * nf) as usize).min(n);
        let mut part = 0.0;
        for (i, &x) in sorted.iter().enumerate().take(last).skip(first) {
            let cell_lo = (i as f64 / nf).max(s.lo);
            let cell_hi = ((i + 1) as f64 / nf).min(s.hi);
            if cell_hi > cell_lo {
                part += x * (cell_hi - cell_lo);
            }
        }
        integral += s.density * part;
    }
    if integral == f64::NEG_INFINITY {
        return f64::INFINITY;
    }
    -integral
}
