use std::io::Write;
use std::process::ExitCode;

use serde::Serialize;

use fracpoisson::process::{self, FppParams};
use fracpoisson::specfun::{
    m_wright, mittag_leffler, mittag_leffler_deriv, stable_density, wright, MlOrder, SeriesControl,
    WrightParams,
};
use fracpoisson::table::{fmt17, write_row};
use fracpoisson::Error;

use crate::args::{EvalArgs, Format, Function};
use crate::error::CliError;
use crate::output::{emit, resolve_format, write_json};

#[derive(Debug, Clone, Serialize)]
struct Row {
    function: Function,
    p1: Option<f64>,
    p2: Option<f64>,
    n: Option<usize>,
    x: f64,
    value: f64,
}

fn need<T: Copy>(v: Option<T>, flag: &str, f: Function) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Usage(format!("--fn {} needs {flag}", name(f))))
}

fn name(f: Function) -> &'static str {
    match f {
        Function::Ml => "ml",
        Function::MlDeriv => "ml-deriv",
        Function::Wright => "wright",
        Function::MWright => "m-wright",
        Function::StableDensity => "stable-density",
        Function::Survival => "survival",
        Function::Pmf => "pmf",
        Function::Renewal => "renewal",
    }
}

/// Rejects flags the function does not read, so a typo cannot be ignored.
fn reject_unused(a: &EvalArgs, used: &[&str]) -> Result<(), CliError> {
    let given = [
        ("--alpha", a.alpha.is_some()),
        ("--beta", a.beta.is_some()),
        ("--z", a.z.is_some()),
        ("--n", a.n.is_some()),
        ("--lambda", a.lambda.is_some()),
        ("--mu", a.mu.is_some()),
        ("--rate", a.rate.is_some()),
        ("--t", a.time.t.is_some() || a.time.t_grid.is_some()),
    ];
    for (flag, present) in given {
        if present && !used.contains(&flag) {
            return Err(CliError::Usage(format!(
                "--fn {} does not take {flag}",
                name(a.function)
            )));
        }
    }
    Ok(())
}

fn rows(a: &EvalArgs) -> Result<Vec<Row>, CliError> {
    let f = a.function;
    let ctl = SeriesControl::default();
    let row = |p1, p2, n, x, value| Row {
        function: f,
        p1,
        p2,
        n,
        x,
        value,
    };
    let over_times = |g: &dyn Fn(f64) -> Result<f64, Error>, p1, n| -> Result<Vec<Row>, CliError> {
        a.time
            .times()?
            .into_iter()
            .map(|t| Ok(row(p1, None, n, t, g(t)?)))
            .collect()
    };
    match f {
        Function::Ml => {
            reject_unused(a, &["--alpha", "--z"])?;
            let (alpha, z) = (need(a.alpha, "--alpha", f)?, need(a.z, "--z", f)?);
            let v = mittag_leffler(MlOrder::new(alpha)?, z, &ctl)?;
            Ok(vec![row(Some(alpha), None, None, z, v)])
        }
        Function::MlDeriv => {
            reject_unused(a, &["--alpha", "--z", "--n"])?;
            let (alpha, z, n) = (
                need(a.alpha, "--alpha", f)?,
                need(a.z, "--z", f)?,
                need(a.n, "--n", f)?,
            );
            let v = mittag_leffler_deriv(MlOrder::new(alpha)?, z, n, &ctl)?;
            Ok(vec![row(Some(alpha), None, Some(n), z, v)])
        }
        Function::Wright => {
            reject_unused(a, &["--lambda", "--mu", "--z"])?;
            let (lambda, mu, z) = (
                need(a.lambda, "--lambda", f)?,
                need(a.mu, "--mu", f)?,
                need(a.z, "--z", f)?,
            );
            let v = wright(WrightParams::new(lambda, mu)?, z, &ctl)?;
            Ok(vec![row(Some(lambda), Some(mu), None, z, v)])
        }
        Function::MWright => {
            reject_unused(a, &["--alpha", "--z"])?;
            let (nu, x) = (need(a.alpha, "--alpha", f)?, need(a.z, "--z", f)?);
            let v = m_wright(nu, x, &ctl)?;
            Ok(vec![row(Some(nu), None, None, x, v)])
        }
        Function::StableDensity => {
            reject_unused(a, &["--beta", "--t"])?;
            let beta = need(a.beta, "--beta", f)?;
            over_times(&|t| stable_density(beta, t), Some(beta), None)
        }
        Function::Survival => {
            reject_unused(a, &["--beta", "--rate", "--t"])?;
            let p = FppParams::new(need(a.beta, "--beta", f)?, a.rate.unwrap_or(1.0))?;
            over_times(
                &|t| process::renewal_triple(p, t).map(|r| r.survival),
                Some(p.beta()),
                None,
            )
        }
        Function::Pmf => {
            reject_unused(a, &["--beta", "--rate", "--t", "--n"])?;
            let p = FppParams::new(need(a.beta, "--beta", f)?, a.rate.unwrap_or(1.0))?;
            let n = need(a.n, "--n", f)?;
            over_times(
                &|t| process::pmf_routed(p, t, n).map(|(v, _)| v),
                Some(p.beta()),
                Some(n),
            )
        }
        Function::Renewal => {
            reject_unused(a, &["--beta", "--rate", "--t"])?;
            let p = FppParams::new(need(a.beta, "--beta", f)?, a.rate.unwrap_or(1.0))?;
            over_times(&|t| process::renewal_function(p, t), Some(p.beta()), None)
        }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt17).unwrap_or_default()
}

fn write_csv(w: &mut dyn Write, rows: &[Row]) -> Result<(), CliError> {
    write_row(
        w,
        &["function", "p1", "p2", "n", "x", "value"].map(String::from),
    )?;
    for r in rows {
        write_row(
            w,
            &[
                name(r.function).to_string(),
                opt(r.p1),
                opt(r.p2),
                r.n.map(|n| n.to_string()).unwrap_or_default(),
                fmt17(r.x),
                fmt17(r.value),
            ],
        )?;
    }
    Ok(())
}

pub fn run(a: &EvalArgs) -> Result<ExitCode, CliError> {
    let format = resolve_format(
        a.output.format,
        Format::Plain,
        &[Format::Plain, Format::Csv, Format::Json],
        "eval",
    )?;
    let rows = rows(a)?;
    emit(a.output.out.as_deref(), |w| match format {
        Format::Plain => {
            for r in &rows {
                writeln!(w, "{}", r.value)?;
            }
            Ok(())
        }
        Format::Csv => write_csv(w, &rows),
        Format::Json => write_json(w, &rows),
    })?;
    Ok(ExitCode::SUCCESS)
}
