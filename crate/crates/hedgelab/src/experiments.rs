//! Monte-Carlo experiment harness: table reproduction, convergence-rate
//! studies and super-hedging checks.
//!
//! Path-level work is parallel; per-path results are keyed by path index and
//! reduced in index order, so reports are byte-identical across reruns and
//! thread counts.

use crate::analytics::{bs_price, delta};
use crate::error::{Error, Result};
use crate::hedging::{
    corrected_error, hedge_path, CorrectionMode, CostModel, Liquidation, StrategyKind,
};
use crate::limits::QuadratureConfig;
use crate::models::{simulate_path, MarketModel};
use crate::schedule::{RevisionSchedule, VolatilityProfile, DEFAULT_SUBSTEPS};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::time::Instant;

/// Cost parameter as a fixed number or a power rule `rho(n) = c n^exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum RhoSpec {
    Fixed { value: f64 },
    PowerRule { c: f64, exponent: f64 },
}

impl RhoSpec {
    pub fn rho(&self, n: usize) -> f64 {
        match *self {
            RhoSpec::Fixed { value } => value,
            RhoSpec::PowerRule { c, exponent } => c * (n as f64).powf(exponent),
        }
    }

    /// Growth condition for the improved-rate correction: `rho(n)` must tend
    /// to infinity while `rho(n) n^(-mu/(2(mu+2)))` tends to zero. For the
    /// built-in power rule this pins `0 < exponent < mu / (2 (mu + 2))`.
    pub fn validate_growth_condition(&self, mu: f64) -> Result<()> {
        let limit = mu / (2.0 * (mu + 2.0));
        match *self {
            RhoSpec::Fixed { .. } => Err(Error::RhoRule(
                "a fixed rho does not tend to infinity; use a power rule".into(),
            )),
            RhoSpec::PowerRule { c, exponent } => {
                if !(c > 0.0) {
                    return Err(Error::RhoRule(format!("rule constant must be positive, got {c}")));
                }
                if !(exponent > 0.0 && exponent < limit) {
                    return Err(Error::RhoRule(format!(
                        "rule exponent {exponent} must lie in (0, {limit}) for mu = {mu}"
                    )));
                }
                Ok(())
            }
        }
    }
}

/// Volatility-profile family, instantiated per revision count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileSpec {
    NewForm { rho: RhoSpec },
    Classic { sigma0: f64, rho: RhoSpec, alpha: f64 },
}

impl ProfileSpec {
    pub fn rho(&self, n: usize) -> f64 {
        match self {
            ProfileSpec::NewForm { rho } | ProfileSpec::Classic { rho, .. } => rho.rho(n),
        }
    }

    pub fn build(&self, n: usize, mu: f64) -> Result<VolatilityProfile> {
        match *self {
            ProfileSpec::NewForm { rho } => VolatilityProfile::new_form(rho.rho(n), n, mu),
            ProfileSpec::Classic { sigma0, rho, alpha } => {
                VolatilityProfile::classic(sigma0, rho.rho(n), n, alpha)
            }
        }
    }
}

fn default_substeps() -> usize {
    DEFAULT_SUBSTEPS
}

/// Full specification of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: MarketModel,
    pub strike: f64,
    /// Revision counts, one report row each.
    pub n_values: Vec<usize>,
    pub mu: f64,
    #[serde(default = "default_substeps")]
    pub substeps: usize,
    pub profile: ProfileSpec,
    pub cost: CostModel,
    pub strategy: StrategyKind,
    pub correction: CorrectionMode,
    pub n_paths: u64,
    pub seed: u64,
    #[serde(default)]
    pub liquidation: Liquidation,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    /// Slack for the super-hedging count `V_1 >= h(S_1) - tolerance`.
    #[serde(default)]
    pub superhedge_tolerance: f64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        MarketModel::new(self.model.kind, self.model.corr, self.model.s0, self.model.y0)?;
        self.cost.validate()?;
        if !(self.strike > 0.0) {
            return Err(Error::ParameterDomain(format!(
                "strike must be positive, got {}",
                self.strike
            )));
        }
        if self.n_values.is_empty() {
            return Err(Error::ParameterDomain("n_values must be non-empty".into()));
        }
        if self.n_values.iter().any(|&n| n == 0) {
            return Err(Error::ParameterDomain("all n_values must be >= 1".into()));
        }
        if !(1.0..2.0).contains(&self.mu) {
            return Err(Error::ParameterDomain(format!(
                "mu must satisfy 1 <= mu < 2, got {}",
                self.mu
            )));
        }
        if self.substeps == 0 {
            return Err(Error::ParameterDomain("substeps must be >= 1".into()));
        }
        if self.n_paths == 0 {
            return Err(Error::ParameterDomain("n_paths must be >= 1".into()));
        }
        for &n in &self.n_values {
            // constructing the profile surfaces per-n domain violations early
            self.profile.build(n, self.mu)?;
        }
        if matches!(self.correction, CorrectionMode::LelandRhoOfN) {
            match &self.profile {
                ProfileSpec::NewForm { rho } | ProfileSpec::Classic { rho, .. } => {
                    rho.validate_growth_condition(self.mu)?;
                }
            }
        }
        Ok(())
    }
}

/// One aggregated report row.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub n: usize,
    pub gain_loss: f64,
    pub corrected_error: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    /// Model price at the full cumulated variance.
    pub price: f64,
    /// Initial hedge ratio.
    pub strategy_delta: f64,
    pub n_paths: u64,
    pub seed: u64,
    pub runtime_secs: f64,
}

/// Report of a table run; serializes to the fixed seven-column CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub rows: Vec<ReportRow>,
}

pub const REPORT_CSV_HEADER: &str = "n,gain_loss,corrected_error,ci_lo,ci_hi,price,strategy";

impl ExperimentReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(REPORT_CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{:.7},{:.7},{:.7},{:.7},{:.7},{:.7}\n",
                r.n, r.gain_loss, r.corrected_error, r.ci_lo, r.ci_hi, r.price, r.strategy_delta
            ));
        }
        out
    }
}

struct PathErrors {
    raw: Vec<f64>,
    corrected: Vec<f64>,
}

/// Simulates, hedges and corrects every path for a single revision count,
/// returning the per-path errors in path-index order.
fn run_row(config: &ExperimentConfig, n: usize) -> Result<PathErrors> {
    let schedule = RevisionSchedule::new(n, config.mu, config.substeps)?;
    let profile = config.profile.build(n, config.mu)?;
    let rho_n = config.profile.rho(n);
    let kappa = config.cost.kappa_star();

    let per_path: Vec<Result<(f64, f64)>> = (0..config.n_paths)
        .into_par_iter()
        .map(|i| {
            let path = simulate_path(&config.model, &schedule, config.seed, i);
            let sigma_y1 = config.model.sigma(*path.y.last().expect("non-empty path"));
            let outcome = hedge_path(
                &path,
                &schedule,
                &profile,
                config.strike,
                config.strategy,
                &config.cost,
                config.liquidation,
                sigma_y1,
            );
            let corrected =
                corrected_error(&outcome, config.correction, rho_n, kappa, &config.quadrature)?;
            Ok((outcome.raw_error, corrected))
        })
        .collect();

    let mut raw = Vec::with_capacity(per_path.len());
    let mut corrected = Vec::with_capacity(per_path.len());
    for r in per_path {
        let (a, b) = r?;
        raw.push(a);
        corrected.push(b);
    }
    Ok(PathErrors { raw, corrected })
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn std_error(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0);
    (var / xs.len() as f64).sqrt()
}

fn rms(xs: &[f64]) -> f64 {
    (xs.iter().map(|x| x * x).sum::<f64>() / xs.len() as f64).sqrt()
}

/// Runs the full table: one row per revision count, aggregated with 95%
/// confidence intervals on the corrected error.
pub fn run_table(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let mut rows = Vec::with_capacity(config.n_values.len());
    for &n in &config.n_values {
        let start = Instant::now();
        let errors = run_row(config, n)?;
        let profile = config.profile.build(n, config.mu)?;
        let lambda0 = profile.lambda0();
        let m = mean(&errors.corrected);
        let half = 1.96 * std_error(&errors.corrected);
        rows.push(ReportRow {
            n,
            gain_loss: mean(&errors.raw),
            corrected_error: m,
            ci_lo: m - half,
            ci_hi: m + half,
            price: bs_price(lambda0, config.model.s0, config.strike),
            strategy_delta: delta(lambda0, config.model.s0, config.strike),
            n_paths: config.n_paths,
            seed: config.seed,
            runtime_secs: start.elapsed().as_secs_f64(),
        });
    }
    Ok(ExperimentReport { rows })
}

/// Least-squares fit of `log RMS(corrected error)` against `log n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceFit {
    pub slope: f64,
    pub slope_stderr: f64,
    /// `(n, rms)` per ladder rung.
    pub points: Vec<(usize, f64)>,
}

impl ConvergenceFit {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,rms\n");
        for &(n, r) in &self.points {
            out.push_str(&format!("{n},{r:.7}\n"));
        }
        out
    }
}

/// Estimates the convergence rate over the configured ladder of revision
/// counts. Requires at least 5 rungs spanning 1.5 decades and 2000 paths.
pub fn convergence_study(config: &ExperimentConfig) -> Result<ConvergenceFit> {
    config.validate()?;
    if config.n_values.len() < 5 {
        return Err(Error::Config(format!(
            "rate fitting needs at least 5 ladder rungs, got {}",
            config.n_values.len()
        )));
    }
    let n_min = *config.n_values.iter().min().expect("non-empty");
    let n_max = *config.n_values.iter().max().expect("non-empty");
    if (n_max as f64 / n_min as f64).log10() < 1.5 {
        return Err(Error::Config(format!(
            "ladder must span at least 1.5 decades, got {n_min}..{n_max}"
        )));
    }
    if config.n_paths < 2000 {
        return Err(Error::Config(format!(
            "rate fitting needs at least 2000 paths per rung, got {}",
            config.n_paths
        )));
    }

    let mut points = Vec::with_capacity(config.n_values.len());
    for &n in &config.n_values {
        let errors = run_row(config, n)?;
        points.push((n, rms(&errors.corrected)));
    }

    let xs: Vec<f64> = points.iter().map(|&(n, _)| (n as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, r)| r.ln()).collect();
    let (slope, slope_stderr) = least_squares_slope(&xs, &ys);
    Ok(ConvergenceFit {
        slope,
        slope_stderr,
        points,
    })
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let xb = xs.iter().sum::<f64>() / n;
    let yb = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - xb) * (x - xb)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - xb) * (y - yb)).sum();
    let slope = sxy / sxx;
    let intercept = yb - slope * xb;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let stderr = (ss_res / (n - 2.0) / sxx).sqrt();
    (slope, stderr)
}

/// Fraction of paths whose terminal wealth covers the payoff, per ladder rung.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperhedgeRow {
    pub n: usize,
    pub fraction: f64,
}

/// Counts paths with `V_1 >= h(S_1) - tolerance` for each revision count.
pub fn superhedge_check(config: &ExperimentConfig) -> Result<Vec<SuperhedgeRow>> {
    config.validate()?;
    let mut rows = Vec::with_capacity(config.n_values.len());
    for &n in &config.n_values {
        let errors = run_row(config, n)?;
        let covered = errors
            .raw
            .iter()
            .filter(|&&raw| raw >= -config.superhedge_tolerance)
            .count();
        rows.push(SuperhedgeRow {
            n,
            fraction: covered as f64 / errors.raw.len() as f64,
        });
    }
    Ok(rows)
}
