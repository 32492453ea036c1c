use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use serde::Serialize;

use fracpoisson::montecarlo::{
    empirical_pmf, simulate_ensemble, write_ensemble_csv, EnsembleConfig, Route,
};

use crate::args::{Format, SimulateArgs};
use crate::error::CliError;
use crate::output::{emit, resolve_format, write_json};

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    config: &'a SimulateArgs,
    seed: u64,
    paths: usize,
    dt_star: f64,
    route: &'static str,
    horizon: f64,
    n_max: usize,
    /// Paths with more than `n_max` events, per evaluation time.
    overflow: Vec<u64>,
    threads: usize,
    wall_time_s: f64,
    csv: Option<PathBuf>,
}

fn manifest_path(a: &SimulateArgs) -> Option<PathBuf> {
    a.manifest.clone().or_else(|| {
        a.output.out.as_ref().map(|p| {
            let mut s = p.clone().into_os_string();
            s.push(".manifest.json");
            PathBuf::from(s)
        })
    })
}

pub fn run(a: &SimulateArgs) -> Result<ExitCode, CliError> {
    resolve_format(a.output.format, Format::Csv, &[Format::Csv], "simulate")?;
    if a.paths == 0 {
        return Err(CliError::Usage("--paths must be at least 1".into()));
    }
    let times = a.time.times()?;
    let horizon = times.iter().copied().fold(0.0, f64::max);
    let route: Route = a.route.into();
    let cfg = EnsembleConfig {
        beta: a.beta,
        horizon,
        paths: a.paths,
        seed: a.seed,
        dt_star: a.dt_star,
        route,
    };
    let start = Instant::now();
    let paths = simulate_ensemble(&cfg)?;
    let n_max = a
        .n_max
        .unwrap_or_else(|| paths.iter().map(|p| p.count_at(horizon)).max().unwrap_or(0));
    let stats = times
        .iter()
        .map(|&t| empirical_pmf(&paths, t, n_max))
        .collect::<Result<Vec<_>, _>>()?;
    let wall_time_s = start.elapsed().as_secs_f64();

    emit(a.output.out.as_deref(), |w| {
        Ok(write_ensemble_csv(w, a.beta, route, &stats)?)
    })?;
    let manifest = Manifest {
        tool: "fracpoisson",
        version: env!("CARGO_PKG_VERSION"),
        command: "simulate",
        config: a,
        seed: a.seed,
        paths: a.paths,
        dt_star: a.dt_star,
        route: route.as_str(),
        horizon,
        n_max,
        overflow: stats.iter().map(|s| s.overflow).collect(),
        threads: rayon::current_num_threads(),
        wall_time_s,
        csv: a.output.out.clone(),
    };
    let written = match manifest_path(a) {
        Some(path) => emit(Some(&path), |w| write_json(w, &manifest)),
        None => {
            let stderr = std::io::stderr();
            let mut w = stderr.lock();
            write_json(&mut w, &manifest).and_then(|_| Ok(w.flush()?))
        }
    };
    if let Err(e) = written {
        // a CSV without its manifest is a partial artifact
        if let Some(out) = &a.output.out {
            let _ = fs::remove_file(out);
        }
        return Err(e);
    }
    Ok(ExitCode::SUCCESS)
}
