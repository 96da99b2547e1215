//! Experiment settings from a flat TOML file, overridden by command-line flags.
//!
//! ```toml
//! measure = "custom"            # "var", "es" or "custom"
//! alpha = 0.05                  # var / es only
//! atoms = [[0.1, 0.4]]          # custom: [location, mass]
//! segments = [[0.0, 0.2, 3.0]]  # custom: [lo, hi, density]
//! lambda = 1.0
//! lambda_grid = "0.1:10:50log"  # lo:hi:N followed by "log" or "lin"
//! r = 0.05
//! theta = 0.4
//! sigma = 0.2
//! T = 1.0
//! x0 = 1.0
//! seed = 42
//! n_samples = 1000000
//! n_paths = 10
//! n_steps = 1000
//! record_every = 10
//! exclusion = 0.05
//! points = 201
//! grid = 200000
//! out = "out"
//! ```

use std::path::{Path, PathBuf};

use growthrisk_core::measure::{Atom, DensitySegment};
use growthrisk_core::optimizer::log_grid;
use growthrisk_core::{MarketParams, WeightingMeasure};
use serde::Deserialize;

use crate::error::CliError;

pub const DEFAULT_R: f64 = 0.05;
pub const DEFAULT_THETA: f64 = 0.4;
/// Only the dollar position depends on σ; the payoffs do not.
pub const DEFAULT_SIGMA: f64 = 0.2;
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    pub measure: Option<String>,
    pub alpha: Option<f64>,
    pub atoms: Option<Vec<[f64; 2]>>,
    pub segments: Option<Vec<[f64; 3]>>,
    pub lambda: Option<f64>,
    pub lambda_grid: Option<String>,
    pub r: Option<f64>,
    pub theta: Option<f64>,
    pub sigma: Option<f64>,
    #[serde(rename = "T")]
    pub horizon: Option<f64>,
    pub x0: Option<f64>,
    pub seed: Option<u64>,
    pub n_samples: Option<usize>,
    pub n_paths: Option<usize>,
    pub n_steps: Option<usize>,
    pub record_every: Option<usize>,
    pub exclusion: Option<f64>,
    pub points: Option<usize>,
    pub grid: Option<usize>,
    pub out: Option<PathBuf>,
}

macro_rules! overlay {
    ($dst:ident, $src:ident; $($f:ident),*) => {
        $( if $src.$f.is_some() { $dst.$f = $src.$f.clone(); } )*
    };
}

impl Settings {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("config file: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Fields set in `top` replace those in `self`.
    pub fn overridden_by(mut self, top: &Settings) -> Self {
        overlay!(self, top; measure, alpha, atoms, segments, lambda, lambda_grid, r, theta, sigma,
            horizon, x0, seed, n_samples, n_paths, n_steps, record_every, exclusion, points, grid, out);
        self
    }

    pub fn params(&self) -> Result<MarketParams, CliError> {
        Ok(MarketParams::with_theta(
            self.r.unwrap_or(DEFAULT_R),
            self.theta.unwrap_or(DEFAULT_THETA),
            self.sigma.unwrap_or(DEFAULT_SIGMA),
            self.horizon.unwrap_or(1.0),
            self.x0.unwrap_or(1.0),
        )?)
    }

    pub fn measure(&self) -> Result<WeightingMeasure, CliError> {
        let kind = self.measure.as_deref().unwrap_or("es");
        let alpha = || self.alpha.ok_or_else(|| CliError::Config(format!("--alpha is required for --measure {kind}")));
        Ok(match kind {
            "var" => WeightingMeasure::dirac(alpha()?)?,
            "es" => WeightingMeasure::expected_shortfall(alpha()?)?,
            "custom" => {
                let atoms = self.atoms.clone().unwrap_or_default();
                let segments = self.segments.clone().unwrap_or_default();
                WeightingMeasure::new(
                    atoms.iter().map(|a| Atom { location: a[0], mass: a[1] }).collect(),
                    segments.iter().map(|s| DensitySegment { lo: s[0], hi: s[1], density: s[2] }).collect(),
                )?
            }
            other => return Err(CliError::Config(format!("unknown measure {other:?} (var, es, custom)"))),
        })
    }

    pub fn lambda(&self) -> Result<f64, CliError> {
        self.lambda.ok_or_else(|| CliError::Config("--lambda is required".into()))
    }

    pub fn lambda_grid(&self) -> Result<Vec<f64>, CliError> {
        parse_grid(self.lambda_grid.as_deref().unwrap_or("0.1:10:50log"))
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }
}

/// Parses `lo:hi:N` followed by `log` or `lin`.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Config(format!("bad grid {spec:?}; expected lo:hi:Nlog or lo:hi:Nlin"));
    let parts: Vec<&str> = spec.split(':').collect();
    let [lo, hi, n] = parts[..] else { return Err(bad()) };
    let (lo, hi): (f64, f64) = (lo.trim().parse().map_err(|_| bad())?, hi.trim().parse().map_err(|_| bad())?);
    let n = n.trim();
    let (count, log) = if let Some(c) = n.strip_suffix("log") {
        (c, true)
    } else if let Some(c) = n.strip_suffix("lin") {
        (c, false)
    } else {
        (n, true)
    };
    let count: usize = count.parse().map_err(|_| bad())?;
    if count == 0 || !(lo >= 0.0) || !(hi >= lo) || !hi.is_finite() {
        return Err(bad());
    }
    if log {
        log_grid(lo, hi, count).map_err(|_| bad())
    } else if count == 1 {
        Ok(vec![lo])
    } else {
        Ok((0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        let g = parse_grid("0.1:10:50log").unwrap();
        assert_eq!(g.len(), 50);
        assert!((g[0] - 0.1).abs() < 1e-15 && (g[49] - 10.0).abs() < 1e-12);
        assert_eq!(parse_grid("0:1:3lin").unwrap(), vec![0.0, 0.5, 1.0]);
        assert!(parse_grid("0:1:3log").is_err());
        assert!(parse_grid("1:2").is_err());
        assert!(parse_grid("2:1:4lin").is_err());
    }

    #[test]
    fn flat_file_and_precedence() {
        let file = Settings::from_toml("measure = \"custom\"\natoms = [[0.1, 0.4]]\nsegments = [[0.0, 0.2, 3.0]]\nT = 2.0\nr = 0.01\n").unwrap();
        let m = file.measure().unwrap();
        assert_eq!(m.atoms().len(), 1);
        let cli = Settings { r: Some(0.03), ..Default::default() };
        let s = file.overridden_by(&cli);
        let p = s.params().unwrap();
        assert_eq!((p.r(), p.horizon(), p.sigma()), (0.03, 2.0, DEFAULT_SIGMA));
    }

    #[test]
    fn rejects_unknown_keys_and_measures() {
        assert!(matches!(Settings::from_toml("alhpa = 0.1"), Err(CliError::Config(_))));
        let s = Settings { measure: Some("cvar".into()), ..Default::default() };
        assert!(s.measure().is_err());
        let s = Settings { measure: Some("var".into()), ..Default::default() };
        assert!(s.measure().is_err());
    }
}
