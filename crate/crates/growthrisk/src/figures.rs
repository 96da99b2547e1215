//! Plot-ready data for the payoff, frontier and envelope figures.

use std::path::{Path, PathBuf};

use growthrisk_core::optimizer::{log_grid, solve_es, solve_var};
use growthrisk_core::{EfficientSolution, MarketParams, WeightingMeasure};

use crate::commands::{envelope_for, envelope_table};
use crate::error::CliError;
use crate::format::{emit, Table};
use crate::parallel;

/// Confidence levels shown in the payoff and frontier figures.
pub const FIGURE_ALPHAS: [f64; 3] = [0.01, 0.05, 0.10];
/// λ of the mean-risk (as opposed to minimum-risk) payoff figures.
pub const FIGURE_LAMBDA: f64 = 1.0;
pub const PAYOFF_POINTS: usize = 501;
pub const FRONTIER_POINTS: usize = 50;
pub const ENVELOPE_POINTS: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct FigureConfig {
    pub params: MarketParams,
    pub out: PathBuf,
}

impl FigureConfig {
    /// `T = 1`, `r = 0.05`, `θ = 0.4`, `σ = 0.2`, `x0 = 1`.
    pub fn standard(out: impl Into<PathBuf>) -> Self {
        Self { params: MarketParams::with_theta(0.05, 0.4, 0.2, 1.0, 1.0).expect("valid"), out: out.into() }
    }
}

/// Log-spaced kernel values between the 0.1% and 99.9% kernel quantiles.
fn xi_axis(p: &MarketParams) -> Vec<f64> {
    let lo = p.kernel_quantile(0.001).expect("interior");
    let hi = p.kernel_quantile(0.999).expect("interior");
    log_grid(lo, hi, PAYOFF_POINTS).expect("ordered")
}

fn payoff_table(p: &MarketParams, sols: &[EfficientSolution]) -> Table {
    let names: Vec<String> = FIGURE_ALPHAS.iter().map(|a| format!("alpha_{a:.2}")).collect();
    let mut header = vec!["xi", "kelly"];
    header.extend(names.iter().map(String::as_str));
    let mut t = Table::new(&header);
    for xi in xi_axis(p) {
        let mut row = vec![xi, p.x0() / xi];
        row.extend(sols.iter().map(|s| s.payoff(xi)));
        t.push(&row);
    }
    t
}

fn frontier_rows(p: &MarketParams, es: bool, with_min: bool) -> Result<Table, CliError> {
    let mut grid = log_grid(0.1, 10.0, FRONTIER_POINTS)?;
    if with_min {
        grid.insert(0, 0.0);
    }
    let mut t = Table::new(&["alpha", "lambda", "risk", "expected_log_return"]);
    for &a in &FIGURE_ALPHAS {
        let m = if es { WeightingMeasure::expected_shortfall(a)? } else { WeightingMeasure::dirac(a)? };
        for q in parallel::frontier(&m, &grid, p)? {
            let q = q?;
            t.push(&[a, q.lambda, q.risk, q.expected_log_return]);
        }
    }
    Ok(t)
}

/// Writes every figure CSV into `cfg.out` and returns the paths written.
///
/// The minimum-VaR frontier point has `E[R] = -∞` and is left out of the VaR
/// frontier; the minimum-ES point is finite and included.
pub fn reproduce_figures(cfg: &FigureConfig) -> Result<Vec<PathBuf>, CliError> {
    let p = &cfg.params;
    let mut files: Vec<(&str, String)> = Vec::new();
    let sols = |es: bool, lambda: f64| -> Result<Vec<EfficientSolution>, CliError> {
        FIGURE_ALPHAS
            .iter()
            .map(|&a| Ok(if es { solve_es(a, lambda, p)? } else { solve_var(a, lambda, p)? }))
            .collect()
    };
    files.push(("fig1_var_min_payoff.csv", payoff_table(p, &sols(false, 0.0)?).render()));
    files.push(("fig2_var_payoff.csv", payoff_table(p, &sols(false, FIGURE_LAMBDA)?).render()));
    files.push(("fig3_var_frontier.csv", frontier_rows(p, false, false)?.render()));
    files.push(("fig4_es_min_payoff.csv", payoff_table(p, &sols(true, 0.0)?).render()));
    files.push(("fig5_es_payoff.csv", payoff_table(p, &sols(true, FIGURE_LAMBDA)?).render()));
    files.push(("fig6_es_frontier.csv", frontier_rows(p, true, true)?.render()));
    for (name, es, lambda) in [
        ("envelope_var_lambda0.csv", false, 0.0),
        ("envelope_var_lambda1.csv", false, 1.0),
        ("envelope_es_lambda0.csv", true, 0.0),
        ("envelope_es_lambda1.csv", true, 1.0),
    ] {
        let m = if es { WeightingMeasure::expected_shortfall(0.05)? } else { WeightingMeasure::dirac(0.05)? };
        let env = envelope_for(&m, lambda, p, 0)?;
        files.push((name, envelope_table(&env, ENVELOPE_POINTS).render()));
    }
    let mut written = Vec::new();
    for (name, text) in files {
        let path = cfg.out.join(name);
        emit(Some(&path), &text)?;
        written.push(path);
    }
    Ok(written)
}

/// Reads a figure CSV back as a header and numeric rows.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>), CliError> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default().split(',').map(str::to_string).collect();
    let rows = lines
        .map(|l| {
            l.split(',')
                .map(|v| v.parse::<f64>().map_err(|_| CliError::Numeric(format!("bad number {v:?} in {}", path.display()))))
                .collect()
        })
        .collect::<Result<_, _>>()?;
    Ok((header, rows))
}
