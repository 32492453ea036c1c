use std::io::Write;
use std::process::ExitCode;

use serde::Serialize;

use fracpoisson::fraccalc::{
    fde_system_residual, relaxation_residual, sample_pmf_levels, sample_survival,
};
use fracpoisson::laplace::{registered_pairs, verify_pair, InversionConfig};
use fracpoisson::montecarlo::{
    empirical_pmf, equivalence_test, simulate_ensemble, EnsembleConfig, EnsembleStats, Route,
};
use fracpoisson::process::{
    mean_waiting_time, pmf, pmf_vector, renewal_function, survival_tail_ratio, FppParams,
};
use fracpoisson::specfun::m_wright_tail;
use fracpoisson::table::{fmt17, write_row};

use crate::args::{Format, Suite, VerifyArgs};
use crate::error::CliError;
use crate::output::{emit, resolve_format, write_json};

#[derive(Debug, Clone, Serialize)]
struct Check {
    suite: &'static str,
    name: String,
    measured: f64,
    requirement: String,
    pass: bool,
    note: String,
}

#[derive(Default)]
struct Report {
    checks: Vec<Check>,
}

impl Report {
    fn push(
        &mut self,
        suite: &'static str,
        name: String,
        measured: f64,
        requirement: String,
        pass: bool,
        note: String,
    ) {
        self.checks.push(Check {
            suite,
            name,
            measured,
            requirement,
            pass,
            note,
        });
    }

    fn below(
        &mut self,
        suite: &'static str,
        name: String,
        measured: f64,
        bound: f64,
        note: String,
    ) {
        let pass = measured < bound;
        self.push(suite, name, measured, format!("< {bound:e}"), pass, note);
    }

    fn within(&mut self, suite: &'static str, name: String, measured: f64, lo: f64, hi: f64) {
        let pass = (lo..=hi).contains(&measured);
        self.push(
            suite,
            name,
            measured,
            format!("in [{lo}, {hi}]"),
            pass,
            String::new(),
        );
    }

    fn at_least(
        &mut self,
        suite: &'static str,
        name: String,
        measured: f64,
        bound: f64,
        note: String,
    ) {
        let pass = measured >= bound;
        self.push(suite, name, measured, format!(">= {bound:.4}"), pass, note);
    }

    /// A check whose computation itself failed.
    fn error(&mut self, suite: &'static str, name: String, e: impl std::fmt::Display) {
        self.push(
            suite,
            name,
            f64::NAN,
            "computable".into(),
            false,
            e.to_string(),
        );
    }
}

fn params(beta: f64) -> FppParams {
    FppParams::standard(beta).expect("orders in the suites are valid")
}

/// Points log-spaced over `[0.1, 10]`.
fn pair_grid() -> Vec<f64> {
    (0..=10)
        .map(|i| 0.1 * 100f64.powf(i as f64 / 10.0))
        .collect()
}

fn pairs(r: &mut Report) {
    const S: &str = "pairs";
    let cfg = InversionConfig::default();
    let grid = pair_grid();
    for pair in registered_pairs() {
        match verify_pair(&pair, &grid, &cfg) {
            Ok(rep) => {
                let note = format!(
                    "stehfest flagged {} of {} points (advisory)",
                    rep.flagged(),
                    rep.rows.len()
                );
                r.below(S, rep.pair.clone(), rep.max_residual, 1e-6, note);
            }
            Err(e) => r.error(S, pair.name.clone(), e),
        }
    }
}

/// Residuals at `h` and `h/2` on `[0, 2]`.
fn two_levels<F>(mut residual: F) -> Result<[f64; 2], fracpoisson::Error>
where
    F: FnMut(f64, usize) -> Result<f64, fracpoisson::Error>,
{
    let mut out = [0.0; 2];
    for (i, h) in [1e-3f64, 5e-4].into_iter().enumerate() {
        out[i] = residual(h, (2.0 / h).round() as usize + 1)?;
    }
    Ok(out)
}

fn fde(r: &mut Report) {
    const S: &str = "fde";
    for beta in [0.5, 0.9] {
        // order 2 - β with a 0.8 safety factor
        let need = 2f64.powf(0.8 * (2.0 - beta));
        match two_levels(|h, n| {
            sample_survival(beta, h, n).and_then(|g| relaxation_residual(beta, &g))
        }) {
            Ok([c, f]) => r.at_least(
                S,
                format!("relaxation beta={beta} convergence ratio"),
                c / f,
                need,
                format!("residual {c:.3e} at h=1e-3, {f:.3e} at h=5e-4"),
            ),
            Err(e) => r.error(S, format!("relaxation beta={beta}"), e),
        }
        let mut levels = Vec::new();
        for h in [1e-3f64, 5e-4] {
            let count = (2.0 / h).round() as usize + 1;
            match sample_pmf_levels(beta, h, count, 3).and_then(|lv| fde_system_residual(beta, &lv))
            {
                Ok(v) => levels.push(v),
                Err(e) => {
                    r.error(S, format!("system beta={beta} h={h}"), e);
                    break;
                }
            }
        }
        if levels.len() == 2 {
            let pairs = levels[0].iter().zip(&levels[1]).enumerate();
            for (n, (&c, &f)) in pairs.skip(1).take(3) {
                r.at_least(
                    S,
                    format!("system beta={beta} n={n} convergence ratio"),
                    c / f,
                    need,
                    format!("residual {c:.3e} at h=1e-3, {f:.3e} at h=5e-4"),
                );
            }
        }
    }
    // β = 1: first-order classical equations at h = 1e-3
    let h = 1e-3f64;
    let count = (2.0 / h).round() as usize + 1;
    match sample_survival(1.0, h, count).and_then(|g| relaxation_residual(1.0, &g)) {
        Ok(v) => r.below(S, "relaxation beta=1 h=1e-3".into(), v, 5e-3, String::new()),
        Err(e) => r.error(S, "relaxation beta=1".into(), e),
    }
    match sample_pmf_levels(1.0, h, count, 1).and_then(|lv| fde_system_residual(1.0, &lv)) {
        Ok(v) => r.below(
            S,
            "system beta=1 n=1 h=1e-3".into(),
            v[1],
            5e-3,
            String::new(),
        ),
        Err(e) => r.error(S, "system beta=1".into(), e),
    }
}

fn ensemble(
    beta: f64,
    route: Route,
    a: &VerifyArgs,
    seed: u64,
) -> Result<EnsembleStats, fracpoisson::Error> {
    let cfg = EnsembleConfig {
        beta,
        horizon: 1.0,
        paths: a.paths,
        seed,
        dt_star: a.dt_star,
        route,
    };
    simulate_ensemble(&cfg).and_then(|p| empirical_pmf(&p, 1.0, 30))
}

fn theorem(r: &mut Report, a: &VerifyArgs, seed: u64) {
    const S: &str = "theorem";
    let beta = 0.5;
    let mut stats = Vec::new();
    for route in [Route::Renewal, Route::Parametric] {
        match ensemble(beta, route, a, seed) {
            Ok(s) => stats.push((route, s)),
            Err(e) => r.error(S, format!("{} ensemble", route.as_str()), e),
        }
    }
    for (route, s) in &stats {
        let mut worst = 0.0f64;
        for n in 0..=8 {
            match pmf(params(beta), 1.0, n) {
                Ok(p) if s.se[n] > 0.0 => worst = worst.max((s.p_hat[n] - p).abs() / s.se[n]),
                Ok(p) => worst = worst.max(if s.p_hat[n] == p { 0.0 } else { f64::INFINITY }),
                Err(e) => {
                    r.error(S, format!("pmf n={n}"), e);
                    return;
                }
            }
        }
        r.push(
            S,
            format!("{} marginal n<=8 worst |p_hat - p_n|/SE", route.as_str()),
            worst,
            "<= 4".into(),
            worst <= 4.0,
            format!("seed {seed}, {} paths", a.paths),
        );
        match s.mean() {
            Some((m, se)) => {
                let z = (m - renewal_function(params(beta), 1.0).expect("t = 1")).abs() / se;
                r.push(
                    S,
                    format!("{} mean law |mean - m(1)|/SE", route.as_str()),
                    z,
                    "<= 4".into(),
                    z <= 4.0,
                    String::new(),
                );
            }
            None => r.error(
                S,
                format!("{} mean law", route.as_str()),
                "counts overflowed the histogram",
            ),
        }
    }
    if let [(_, a_stats), (_, b_stats)] = stats.as_slice() {
        match equivalence_test(a_stats, b_stats) {
            Ok(rep) => r.push(
                S,
                "renewal vs parametric chi-square p-value".into(),
                rep.p_value,
                "> 1e-3".into(),
                rep.p_value > 1e-3,
                format!("statistic {:.3} on {} dof", rep.statistic, rep.dof),
            ),
            Err(e) => r.error(S, "renewal vs parametric".into(), e),
        }
    }
    // power: a visibly different order must be rejected
    if let Some((_, base)) = stats.first() {
        match ensemble(0.9, Route::Renewal, a, seed ^ 0x9e37_79b9_7f4a_7c15)
            .and_then(|other| equivalence_test(base, &other))
        {
            Ok(rep) => r.push(
                S,
                "beta=0.5 vs beta=0.9 chi-square p-value".into(),
                rep.p_value,
                "< 1e-3".into(),
                rep.p_value < 1e-3,
                format!("statistic {:.3} on {} dof", rep.statistic, rep.dof),
            ),
            Err(e) => r.error(S, "power check".into(), e),
        }
    }
}

fn normalization(r: &mut Report) {
    const S: &str = "normalization";
    for beta in [0.3, 0.5, 0.7, 0.9, 1.0] {
        for t in [0.1, 1.0, 5.0] {
            let name = format!("beta={beta} t={t} |sum + tail - 1|");
            match pmf_vector(params(beta), t, 1e-12) {
                Ok(v) => {
                    let note = format!("n_max {}, tail {:.2e}", v.n_max, v.tail_mass);
                    let d = v.normalization_defect();
                    r.push(S, name, d, "<= 1e-10".into(), d <= 1e-10, note);
                }
                Err(e) => r.error(S, name, e),
            }
        }
    }
}

fn asymptotics(r: &mut Report) {
    const S: &str = "asymptotics";
    for (t, lo, hi) in [(100.0, 0.85, 1.15), (1e4, 0.985, 1.015)] {
        let name = format!("survival tail ratio beta=0.5 t={t}");
        match survival_tail_ratio(params(0.5), t) {
            Ok(v) => r.within(S, name, v, lo, hi),
            Err(e) => r.error(S, name, e),
        }
    }
    let exact = (-25.0f64).exp() / std::f64::consts::PI.sqrt();
    r.within(
        S,
        "m-wright tail ratio nu=0.5 x=10".into(),
        m_wright_tail(0.5, 10.0) / exact,
        0.95,
        1.05,
    );
    for beta in [0.5, 1.0] {
        let m = mean_waiting_time(params(beta));
        let ok = if beta < 1.0 {
            m.is_infinite()
        } else {
            m == 1.0
        };
        let want = if beta < 1.0 { "infinite" } else { "= 1" };
        r.push(
            S,
            format!("mean waiting time beta={beta}"),
            m,
            want.into(),
            ok,
            String::new(),
        );
    }
}

fn write_text(w: &mut dyn Write, r: &Report) -> Result<(), CliError> {
    for c in &r.checks {
        let mark = if c.pass { "PASS" } else { "FAIL" };
        write!(
            w,
            "{mark} {}/{}: measured {}, required {}",
            c.suite,
            c.name,
            fmt17(c.measured),
            c.requirement
        )?;
        if c.note.is_empty() {
            writeln!(w)?;
        } else {
            writeln!(w, " ({})", c.note)?;
        }
    }
    let passed = r.checks.iter().filter(|c| c.pass).count();
    writeln!(w, "verify: {passed} of {} checks passed", r.checks.len())?;
    Ok(())
}

fn write_csv(w: &mut dyn Write, r: &Report) -> Result<(), CliError> {
    let quote = |s: &str| format!("\"{}\"", s.replace('"', "\"\""));
    write_row(
        w,
        &["suite", "check", "measured", "requirement", "pass", "note"].map(String::from),
    )?;
    for c in &r.checks {
        write_row(
            w,
            &[
                c.suite.to_string(),
                quote(&c.name),
                fmt17(c.measured),
                quote(&c.requirement),
                c.pass.to_string(),
                quote(&c.note),
            ],
        )?;
    }
    Ok(())
}

#[derive(Serialize)]
struct JsonReport<'a> {
    suite: Suite,
    passed: usize,
    total: usize,
    checks: &'a [Check],
}

pub fn run(a: &VerifyArgs) -> Result<ExitCode, CliError> {
    let format = resolve_format(
        a.output.format,
        Format::Plain,
        &[Format::Plain, Format::Csv, Format::Json],
        "verify",
    )?;
    let stochastic = matches!(a.suite, Suite::Theorem | Suite::All);
    let seed = match (stochastic, a.seed) {
        (true, None) => return Err(CliError::Usage("--suite theorem needs --seed".into())),
        (_, s) => s.unwrap_or(0),
    };
    if stochastic && a.paths < 2 {
        return Err(CliError::Usage("--paths must be at least 2".into()));
    }
    let mut r = Report::default();
    let run_suite = |s: Suite| a.suite == s || a.suite == Suite::All;
    if run_suite(Suite::Pairs) {
        pairs(&mut r);
    }
    if run_suite(Suite::Fde) {
        fde(&mut r);
    }
    if run_suite(Suite::Normalization) {
        normalization(&mut r);
    }
    if run_suite(Suite::Asymptotics) {
        asymptotics(&mut r);
    }
    if run_suite(Suite::Theorem) {
        theorem(&mut r, a, seed);
    }
    let passed = r.checks.iter().filter(|c| c.pass).count();
    emit(a.output.out.as_deref(), |w| match format {
        Format::Plain => write_text(w, &r),
        Format::Csv => write_csv(w, &r),
        Format::Json => write_json(
            w,
            &JsonReport {
                suite: a.suite,
                passed,
                total: r.checks.len(),
                checks: &r.checks,
            },
        ),
    })?;
    Ok(if passed == r.checks.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}
