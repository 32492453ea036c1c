use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "fracpoisson",
    version,
    about = "Fractional Poisson process: evaluation, tables, simulation and verification"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate one special function or process quantity.
    Eval(EvalArgs),
    /// Counting probabilities p_n(t) with their routes.
    PmfTable(PmfTableArgs),
    /// Closed-form renewal function against the mean of the pmf.
    RenewalTable(RenewalTableArgs),
    /// Monte Carlo ensemble of counting paths.
    Simulate(SimulateArgs),
    /// Run a verification suite.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Function {
    Ml,
    MlDeriv,
    Wright,
    MWright,
    StableDensity,
    Survival,
    Pmf,
    Renewal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    /// Bare values, one per line (eval) or a text report (verify).
    Plain,
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RouteArg {
    Renewal,
    Parametric,
}

impl From<RouteArg> for fracpoisson::montecarlo::Route {
    fn from(r: RouteArg) -> Self {
        match r {
            RouteArg::Renewal => Self::Renewal,
            RouteArg::Parametric => Self::Parametric,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Pairs,
    Fde,
    Theorem,
    Normalization,
    Asymptotics,
    All,
}

/// `a:b:step`, inclusive of `b` up to rounding.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeGridSpec {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl TimeGridSpec {
    pub fn points(&self) -> Vec<f64> {
        let count = ((self.stop - self.start) / self.step * (1.0 + 1e-12)).floor() as usize + 1;
        (0..count)
            .map(|i| self.start + i as f64 * self.step)
            .collect()
    }
}

/// Largest grid accepted from the command line.
const MAX_GRID_POINTS: f64 = 1e6;

fn parse_grid(s: &str) -> Result<TimeGridSpec, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, step] = parts.as_slice() else {
        return Err(format!("expected a:b:step, got {s:?}"));
    };
    let num = |x: &str| {
        x.trim()
            .parse::<f64>()
            .map_err(|e| format!("{x:?}: {e}"))
            .and_then(|v| {
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(format!("{x:?} is not finite"))
                }
            })
    };
    let g = TimeGridSpec {
        start: num(a)?,
        stop: num(b)?,
        step: num(step)?,
    };
    if !(g.step > 0.0) || g.stop < g.start || g.start < 0.0 {
        return Err(format!("need 0 <= a <= b and step > 0, got {s:?}"));
    }
    if (g.stop - g.start) / g.step > MAX_GRID_POINTS {
        return Err(format!(
            "grid {s:?} has more than {MAX_GRID_POINTS:e} points"
        ));
    }
    Ok(g)
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TimeArgs {
    /// Evaluation time.
    #[arg(long = "t", conflicts_with = "t_grid")]
    pub t: Option<f64>,
    /// Evaluation times as start:stop:step.
    #[arg(long = "t-grid", value_parser = parse_grid)]
    pub t_grid: Option<TimeGridSpec>,
}

impl TimeArgs {
    pub fn times(&self) -> Result<Vec<f64>, CliError> {
        let ts = match (self.t, self.t_grid) {
            (Some(t), None) => vec![t],
            (None, Some(g)) => g.points(),
            _ => return Err(CliError::Usage("one of --t or --t-grid is required".into())),
        };
        if let Some(t) = ts.iter().find(|t| !(**t >= 0.0 && t.is_finite())) {
            return Err(CliError::Usage(format!(
                "times must be finite and >= 0, got {t}"
            )));
        }
        Ok(ts)
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OutputArgs {
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EvalArgs {
    #[arg(long = "fn", value_enum)]
    pub function: Function,
    /// Mittag-Leffler index, or ν for m-wright.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Process order β.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Function argument (ml, ml-deriv, wright, m-wright).
    #[arg(long, alias = "x", allow_hyphen_values = true)]
    pub z: Option<f64>,
    /// Derivative order or event count.
    #[arg(long)]
    pub n: Option<usize>,
    /// Wright parameter λ.
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    /// Wright parameter μ.
    #[arg(long, allow_hyphen_values = true)]
    pub mu: Option<f64>,
    /// Intensity λ of the process; 1 when absent.
    #[arg(long)]
    pub rate: Option<f64>,
    #[command(flatten)]
    pub time: TimeArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PmfTableArgs {
    #[arg(long)]
    pub beta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub rate: f64,
    #[command(flatten)]
    pub time: TimeArgs,
    /// Last n listed; defaults to where the tail drops below --eps-tail.
    #[arg(long = "n-max")]
    pub n_max: Option<usize>,
    #[arg(long = "eps-tail", default_value_t = 1e-12)]
    pub eps_tail: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RenewalTableArgs {
    #[arg(long)]
    pub beta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub rate: f64,
    #[command(flatten)]
    pub time: TimeArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub route: RouteArg,
    #[arg(long)]
    pub beta: f64,
    /// Evaluation times; the path horizon is the largest.
    #[command(flatten)]
    pub time: TimeArgs,
    #[arg(long)]
    pub paths: usize,
    /// RNG seed; required, there is no ambient entropy.
    #[arg(long)]
    pub seed: u64,
    /// Operational-time step of the parametric route.
    #[arg(long = "dt-star", default_value_t = fracpoisson::montecarlo::DEFAULT_DT_STAR)]
    pub dt_star: f64,
    /// Last histogram bin; defaults to the largest observed count.
    #[arg(long = "n-max")]
    pub n_max: Option<usize>,
    /// Manifest path; defaults to `<out>.manifest.json`, or stderr without --out.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub suite: Suite,
    /// Paths per route for the theorem suite.
    #[arg(long, default_value_t = 100_000)]
    pub paths: usize,
    /// Seed for the theorem suite.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long = "dt-star", default_value_t = fracpoisson::montecarlo::DEFAULT_DT_STAR)]
    pub dt_star: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_includes_the_endpoint() {
        let g = parse_grid("0.1:1:0.1").unwrap();
        let p = g.points();
        assert_eq!(p.len(), 10);
        assert!((p[9] - 1.0).abs() < 1e-12);
        assert_eq!(parse_grid("2:2:1").unwrap().points(), vec![2.0]);
    }

    #[test]
    fn grid_rejects_bad_specs() {
        for s in ["1:0:0.1", "0:1:0", "0:1", "a:1:1", "-1:1:1", "0:1:1e-9"] {
            assert!(parse_grid(s).is_err(), "{s}");
        }
    }

    #[test]
    fn command_line_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
