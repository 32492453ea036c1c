use std::process::ExitCode;

use serde::Serialize;

use fracpoisson::process::{
    pmf_routed, pmf_vector, renewal_row, write_pmf_csv, write_renewal_csv, CountingPmf, FppParams,
    RenewalRow,
};
use fracpoisson::Error;

use crate::args::{Format, PmfTableArgs, RenewalTableArgs};
use crate::error::CliError;
use crate::output::{emit, resolve_format, write_json};

fn at(t: f64) -> impl FnOnce(Error) -> Error {
    move |e| Error::AtGridPoint {
        t,
        source: Box::new(e),
    }
}

/// Counting distribution at `t`, cut or extended to `n_max` when given.
fn table_at(
    p: FppParams,
    t: f64,
    eps_tail: f64,
    n_max: Option<usize>,
) -> Result<CountingPmf, Error> {
    let mut v = pmf_vector(p, t, eps_tail).map_err(at(t))?;
    let Some(n_max) = n_max else {
        return Ok(v);
    };
    if n_max < v.n_max {
        v.tail_mass += v.probs[n_max + 1..].iter().sum::<f64>();
        v.probs.truncate(n_max + 1);
        v.routes.truncate(n_max + 1);
    }
    for n in v.n_max + 1..=n_max {
        let (q, route) = pmf_routed(p, t, n).map_err(at(t))?;
        v.probs.push(q);
        v.routes.push(route);
        v.tail_mass = (v.tail_mass - q).max(0.0);
    }
    v.n_max = n_max;
    Ok(v)
}

#[derive(Serialize)]
struct PmfJson<'a> {
    beta: f64,
    rate: f64,
    t: f64,
    n_max: usize,
    tail_mass: f64,
    probs: &'a [f64],
    routes: Vec<&'static str>,
}

pub fn pmf_table(a: &PmfTableArgs) -> Result<ExitCode, CliError> {
    let format = resolve_format(
        a.output.format,
        Format::Csv,
        &[Format::Csv, Format::Json],
        "pmf-table",
    )?;
    if !(a.eps_tail > 0.0 && a.eps_tail < 1.0) {
        return Err(CliError::Usage(format!(
            "--eps-tail must lie in (0, 1), got {}",
            a.eps_tail
        )));
    }
    let p = FppParams::new(a.beta, a.rate)?;
    let tables = a
        .time
        .times()?
        .into_iter()
        .map(|t| table_at(p, t, a.eps_tail, a.n_max))
        .collect::<Result<Vec<_>, _>>()?;
    emit(a.output.out.as_deref(), |w| match format {
        Format::Json => {
            let rows: Vec<PmfJson> = tables
                .iter()
                .map(|v| PmfJson {
                    beta: a.beta,
                    rate: a.rate,
                    t: v.t,
                    n_max: v.n_max,
                    tail_mass: v.tail_mass,
                    probs: &v.probs,
                    routes: v.routes.iter().map(|r| r.as_str()).collect(),
                })
                .collect();
            write_json(w, &rows)
        }
        _ => Ok(write_pmf_csv(w, a.beta, &tables)?),
    })?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct RenewalJson {
    beta: f64,
    t: f64,
    m_closed: f64,
    m_sum: f64,
    residual: f64,
}

impl From<&RenewalRow> for RenewalJson {
    fn from(r: &RenewalRow) -> Self {
        RenewalJson {
            beta: r.beta,
            t: r.t,
            m_closed: r.m_closed,
            m_sum: r.m_sum,
            residual: r.residual,
        }
    }
}

pub fn renewal_table(a: &RenewalTableArgs) -> Result<ExitCode, CliError> {
    let format = resolve_format(
        a.output.format,
        Format::Csv,
        &[Format::Csv, Format::Json],
        "renewal-table",
    )?;
    let p = FppParams::new(a.beta, a.rate)?;
    let rows = a
        .time
        .times()?
        .into_iter()
        .map(|t| renewal_row(p, t).map_err(at(t)))
        .collect::<Result<Vec<_>, _>>()?;
    emit(a.output.out.as_deref(), |w| match format {
        Format::Json => write_json(w, &rows.iter().map(RenewalJson::from).collect::<Vec<_>>()),
        _ => Ok(write_renewal_csv(w, &rows)?),
    })?;
    Ok(ExitCode::SUCCESS)
}
