//! Subcommand implementations. Each returns the bytes it wrote so callers (and
//! tests) can inspect them.

use std::path::{Path, PathBuf};

use growthrisk_core::envelope::{build_phi, envelope_es, envelope_numeric, envelope_var, DEFAULT_GRID};
use growthrisk_core::policy::{near_jump, simulate_path, PolicyState, DEFAULT_EXCLUSION};
use growthrisk_core::{EfficientSolution, EnvelopeResult, MarketParams, ReplicationReport, Structure, WeightingMeasure};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::Settings;
use crate::error::CliError;
use crate::format::{emit, to_json, ExtReal, Table};
use crate::parallel;
use crate::verify::{run_suite, Sizes};

#[derive(Debug, Serialize)]
pub struct MeasureDoc {
    pub atoms: Vec<[f64; 2]>,
    pub segments: Vec<[f64; 3]>,
}

impl MeasureDoc {
    pub fn of(m: &WeightingMeasure) -> Self {
        Self {
            atoms: m.atoms().iter().map(|a| [a.location, a.mass]).collect(),
            segments: m.segments().iter().map(|s| [s.lo, s.hi, s.density]).collect(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ParamsDoc {
    pub r: f64,
    pub mu: f64,
    pub sigma: f64,
    pub theta: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub x0: f64,
}

impl ParamsDoc {
    pub fn of(p: &MarketParams) -> Self {
        Self { r: p.r(), mu: p.mu(), sigma: p.sigma(), theta: p.theta(), horizon: p.horizon(), x0: p.x0() }
    }
}

/// Kernel thresholds and the constant payoff level; absent fields are `null`.
#[derive(Debug, Default, Serialize)]
pub struct ThresholdsDoc {
    pub xi_alpha: Option<f64>,
    pub xi_lower: Option<f64>,
    pub xi_upper: Option<f64>,
    pub level: Option<f64>,
}

impl ThresholdsDoc {
    pub fn of(s: &Structure) -> Self {
        match s {
            Structure::VarClosedForm(t) => {
                Self { xi_alpha: Some(t.xi_alpha), xi_lower: t.xi_lower, xi_upper: None, level: Some(t.level) }
            }
            Structure::EsClosedForm(t) => {
                Self { xi_alpha: None, xi_lower: t.xi_lower, xi_upper: Some(t.xi_upper), level: Some(t.level) }
            }
            _ => Self::default(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct PayoffRow {
    pub xi: f64,
    pub payoff: f64,
}

#[derive(Debug, Serialize)]
pub struct SolveDoc {
    pub structure: &'static str,
    pub measure: MeasureDoc,
    pub lambda: ExtReal,
    pub params: ParamsDoc,
    pub thresholds: ThresholdsDoc,
    /// `ρ_Φ(R*)` by definition.
    pub risk: ExtReal,
    /// The closed-form risk expression where one exists.
    pub stated_risk: Option<ExtReal>,
    pub sign_discrepancy: bool,
    pub expected_log_return: ExtReal,
    /// `E[ξ_T X*]` by quadrature.
    pub budget: f64,
    pub payoff_table: Vec<PayoffRow>,
}

/// `n` kernel values at the midpoint quantiles `(i + 1/2)/n`.
pub fn kernel_grid(p: &MarketParams, n: usize) -> Vec<f64> {
    (0..n).map(|i| p.kernel_quantile((i as f64 + 0.5) / n as f64).expect("interior level")).collect()
}

pub fn solve_doc(sol: &EfficientSolution, points: usize) -> SolveDoc {
    let p = sol.params();
    SolveDoc {
        structure: sol.structure().tag(),
        measure: MeasureDoc::of(sol.measure()),
        lambda: ExtReal(sol.lambda()),
        params: ParamsDoc::of(p),
        thresholds: ThresholdsDoc::of(&sol.structure()),
        risk: ExtReal(sol.risk_value()),
        stated_risk: sol.stated_risk().map(ExtReal),
        sign_discrepancy: sol.sign_discrepancy(),
        expected_log_return: ExtReal(sol.expected_log_return()),
        budget: sol.budget(),
        payoff_table: kernel_grid(p, points).into_iter().map(|xi| PayoffRow { xi, payoff: sol.payoff(xi) }).collect(),
    }
}

pub fn solve(s: &Settings) -> Result<String, CliError> {
    let p = s.params()?;
    let sol = growthrisk_core::optimizer::solve(&s.measure()?, s.lambda()?, &p)?;
    let text = to_json(&solve_doc(&sol, s.points.unwrap_or(201)));
    emit(s.out.as_deref(), &text)?;
    Ok(text)
}

/// Frontier CSV rows; failed points are reported on stderr and skipped.
pub fn frontier_table(m: &WeightingMeasure, grid: &[f64], p: &MarketParams) -> Result<Table, CliError> {
    let mut t = Table::new(&["lambda", "risk", "expected_log_return"]);
    let pts = parallel::with_pool(|| parallel::frontier(m, grid, p))?;
    let mut sorted = grid.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut failures = 0;
    for (i, r) in pts.iter().enumerate() {
        match r {
            Ok(q) => t.push(&[q.lambda, q.risk, q.expected_log_return]),
            Err(e) => {
                failures += 1;
                let l = sorted.get(i).copied().unwrap_or(f64::INFINITY);
                eprintln!("frontier point λ = {l} failed: {e}");
            }
        }
    }
    if failures == pts.len() {
        return Err(CliError::Numeric("every frontier point failed".into()));
    }
    Ok(t)
}

pub fn frontier(s: &Settings) -> Result<String, CliError> {
    let text = frontier_table(&s.measure()?, &s.lambda_grid()?, &s.params()?)?.render();
    emit(s.out.as_deref(), &text)?;
    Ok(text)
}

/// Analytic envelope for VaR/ES measures, sampled hull otherwise.
pub fn envelope_for(m: &WeightingMeasure, lambda: f64, p: &MarketParams, grid: usize) -> Result<EnvelopeResult, CliError> {
    Ok(if let Some(a) = m.as_dirac() {
        envelope_var(a, lambda, p)?
    } else if let Some(a) = m.as_expected_shortfall() {
        envelope_es(a, lambda, p)?
    } else {
        envelope_numeric(&build_phi(m, lambda, p)?, grid)?
    })
}

/// `s, φ(s-), δ(s), δ'(s)` at the midpoints of `points` equal cells of `[0, 1]`.
pub fn envelope_table(env: &EnvelopeResult, points: usize) -> Table {
    let mut t = Table::new(&["s", "phi_left", "delta", "delta_prime"]);
    for i in 0..points {
        let s = (i as f64 + 0.5) / points as f64;
        t.push(&[s, env.phi().evaluate_left(s), env.delta(s), env.delta_prime(s)]);
    }
    t
}

pub fn envelope(s: &Settings) -> Result<String, CliError> {
    let p = s.params()?;
    let env = envelope_for(&s.measure()?, s.lambda()?, &p, s.grid.unwrap_or(DEFAULT_GRID))?;
    let text = envelope_table(&env, s.points.unwrap_or(1000)).render();
    emit(s.out.as_deref(), &text)?;
    Ok(text)
}

#[derive(Debug, Serialize)]
pub struct TerminalDoc {
    pub path_id: u64,
    pub xi_terminal: f64,
    pub simulated: f64,
    pub target: f64,
    pub excluded: bool,
}

#[derive(Debug, Serialize)]
pub struct PathSummary {
    pub structure: &'static str,
    pub lambda: ExtReal,
    pub seed: u64,
    pub n_paths: usize,
    pub n_steps: usize,
    pub exclusion: f64,
    pub excluded: usize,
    pub rmse: f64,
    pub relative_rmse: f64,
    pub max_abs_error: f64,
    pub terminal: Vec<TerminalDoc>,
}

/// Simulates `n_paths` paths, recording every `record_every`-th step start.
/// Writes `paths.csv` and `summary.json` into `dir`.
pub fn run_paths(
    sol: &EfficientSolution,
    n_steps: usize,
    n_paths: usize,
    record_every: usize,
    seed: u64,
    band: f64,
    dir: &Path,
) -> Result<PathSummary, CliError> {
    if let Structure::General = sol.structure() {
        return Err(growthrisk_core::Error::UnsupportedStructure("GENERAL").into());
    }
    if n_steps < 100 {
        return Err(CliError::Config(format!("--n-steps must be at least 100, got {n_steps}")));
    }
    let every = record_every.max(1);
    let runs = parallel::with_pool(|| {
        (0..n_paths as u64)
            .into_par_iter()
            .map(|id| {
                let mut rows = Vec::new();
                let mut step = 0usize;
                let out = simulate_path(sol, n_steps, seed, id, |st: &PolicyState| {
                    if step.is_multiple_of(every) {
                        rows.push([st.t, st.xi_t, st.wealth, st.stock_dollars]);
                    }
                    step += 1;
                })?;
                Ok((out, rows))
            })
            .collect::<growthrisk_core::Result<Vec<_>>>()
    })?;
    let mut table = Table::new(&["path_id", "t", "xi_t", "wealth", "pi"]);
    for (id, (_, rows)) in runs.iter().enumerate() {
        for r in rows {
            table.push_with_id(id as u64, r);
        }
    }
    let outcomes: Vec<_> = runs.iter().map(|r| r.0).collect();
    let rep = ReplicationReport::from_outcomes(sol, n_steps, &outcomes, band);
    let summary = PathSummary {
        structure: sol.structure().tag(),
        lambda: ExtReal(sol.lambda()),
        seed,
        n_paths,
        n_steps,
        exclusion: band,
        excluded: rep.excluded,
        rmse: rep.rmse,
        relative_rmse: rep.relative_rmse,
        max_abs_error: rep.max_abs_error,
        terminal: outcomes
            .iter()
            .enumerate()
            .map(|(i, o)| TerminalDoc {
                path_id: i as u64,
                xi_terminal: o.xi_terminal,
                simulated: o.simulated,
                target: o.target,
                excluded: near_jump(sol, o.xi_terminal, band),
            })
            .collect(),
    };
    emit(Some(&dir.join("paths.csv")), &table.render())?;
    emit(Some(&dir.join("summary.json")), &to_json(&summary))?;
    Ok(summary)
}

pub fn path(s: &Settings) -> Result<PathSummary, CliError> {
    let p = s.params()?;
    let sol = growthrisk_core::optimizer::solve(&s.measure()?, s.lambda()?, &p)?;
    let dir = s.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    run_paths(
        &sol,
        s.n_steps.unwrap_or(1000),
        s.n_paths.unwrap_or(10),
        s.record_every.unwrap_or(10),
        s.seed(),
        s.exclusion.unwrap_or(DEFAULT_EXCLUSION),
        &dir,
    )
}

/// Runs the suite; a failed check is an error carrying exit code 3.
pub fn verify(s: &Settings, suite: &str) -> Result<String, CliError> {
    let sizes = match suite {
        "quick" => Sizes::quick(),
        "full" => Sizes::full(),
        other => return Err(CliError::Config(format!("unknown suite {other:?} (quick, full)"))),
    };
    let mut sizes = sizes;
    if let Some(n) = s.n_samples {
        sizes.mc = n;
        sizes.nested = n;
    }
    if let Some(n) = s.n_paths {
        sizes.paths = n;
    }
    let p = s.params()?;
    let report = parallel::with_pool(|| run_suite(suite, &p, &sizes, s.seed()));
    let text = to_json(&report);
    emit(s.out.as_deref(), &text)?;
    if report.passed {
        Ok(text)
    } else {
        let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        Err(CliError::Verification(failed.join(", ")))
    }
}
