//! Registry of transform pairs and their inversion residual reports.

use std::io::{self, Write};

use num_complex::Complex64;

use super::inversion::{invert_hyperbolic, invert_stehfest, invert_talbot};
use super::InversionConfig;
use crate::error::{Error, Result};
use crate::specfun::{
    m_wright, mittag_leffler, mittag_leffler_complex, scaled_deriv, stable_density, MlOrder,
    SeriesControl,
};
use crate::table::{fmt17, write_row};

/// Nodes per half of the hyperbolic contour.
const HYPERBOLIC_NODES: usize = 24;

/// Which contour inverts the image.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Contour {
    Talbot,
    /// For entire images that blow up near the negative real axis.
    Hyperbolic,
}

type TimeFn = Box<dyn Fn(f64) -> Result<f64> + Send + Sync>;
type ImageFn = Box<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

pub struct TransformPair {
    pub name: String,
    pub time_fn: TimeFn,
    pub image_fn: ImageFn,
    pub valid_t_range: (f64, f64),
    pub contour: Contour,
}

impl std::fmt::Debug for TransformPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TransformPair")
            .field("name", &self.name)
            .field("valid_t_range", &self.valid_t_range)
            .field("contour", &self.contour)
            .finish_non_exhaustive()
    }
}

impl TransformPair {
    pub fn invert(&self, t: f64, cfg: &InversionConfig) -> Result<f64> {
        match self.contour {
            Contour::Talbot => invert_talbot(&self.image_fn, t, cfg),
            Contour::Hyperbolic => invert_hyperbolic(&self.image_fn, t, HYPERBOLIC_NODES),
        }
    }
}

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

fn check_beta(beta: f64) -> Result<()> {
    crate::process::check_beta(beta)
}

/// Survival `Ψ_β(t) = E_β(-t^β)` and `s^{β-1}/(1 + s^β)`.
pub fn psi_pair(beta: f64) -> Result<TransformPair> {
    check_beta(beta)?;
    let order = MlOrder::new(beta)?;
    Ok(TransformPair {
        name: format!("psi(beta={beta})"),
        time_fn: Box::new(move |t| mittag_leffler(order, -t.powf(beta), &SeriesControl::default())),
        image_fn: Box::new(move |s| s.powf(beta - 1.0) / (one() + s.powf(beta))),
        valid_t_range: (1e-2, 1e2),
        contour: Contour::Talbot,
    })
}

/// Waiting-time density `φ_β(t) = β t^{β-1} E'_β(-t^β)` and `1/(1 + s^β)`.
pub fn phi_pair(beta: f64) -> Result<TransformPair> {
    check_beta(beta)?;
    Ok(TransformPair {
        name: format!("phi(beta={beta})"),
        time_fn: Box::new(move |t| {
            if beta == 1.0 {
                return Ok((-t).exp());
            }
            // β t^{β-1} E'(-x) = (β/t) · x E'(-x), x = t^β
            let (g1, _) = scaled_deriv(beta, t.powf(beta), 1, 1e-15, &SeriesControl::default())?;
            Ok(beta / t * g1)
        }),
        image_fn: Box::new(move |s| one() / (one() + s.powf(beta))),
        valid_t_range: (1e-2, 1e2),
        contour: Contour::Talbot,
    })
}

/// `M_ν(t)` and `E_ν(-s)`.
pub fn m_wright_pair(nu: f64) -> Result<TransformPair> {
    crate::specfun::check_fraction("nu", nu)?;
    Ok(TransformPair {
        name: format!("m-wright(nu={nu})"),
        time_fn: Box::new(move |t| m_wright(nu, t, &SeriesControl::default())),
        image_fn: Box::new(move |s| {
            mittag_leffler_complex(nu, -s, 1e-13).unwrap_or(Complex64::new(f64::NAN, f64::NAN))
        }),
        valid_t_range: (1e-1, 1e1),
        contour: Contour::Hyperbolic,
    })
}

/// Extremal stable density `(ν/t^{ν+1}) M_ν(t^{-ν})` and `exp(-s^ν)`.
pub fn stretched_exp_pair(nu: f64) -> Result<TransformPair> {
    crate::specfun::check_fraction("nu", nu)?;
    Ok(TransformPair {
        name: format!("stretched-exp(nu={nu})"),
        time_fn: Box::new(move |t| stable_density(nu, t)),
        image_fn: Box::new(move |s| (-s.powf(nu)).exp()),
        valid_t_range: (1e-1, 1e2),
        contour: Contour::Talbot,
    })
}

/// Counting probability `p_n(t)` and `s^{β-1}/(1 + s^β)^{n+1}` (unit rate).
pub fn pmf_pair(beta: f64, n: usize) -> Result<TransformPair> {
    check_beta(beta)?;
    Ok(TransformPair {
        name: format!("pmf(beta={beta},n={n})"),
        time_fn: Box::new(move |t| {
            Ok(scaled_deriv(beta, t.powf(beta), n, 1e-15, &SeriesControl::default())?.0)
        }),
        image_fn: Box::new(move |s| s.powf(beta - 1.0) / (one() + s.powf(beta)).powi(n as i32 + 1)),
        valid_t_range: (1e-2, 1e2),
        contour: Contour::Talbot,
    })
}

/// The pairs exercised by the verification suite.
pub fn registered_pairs() -> Vec<TransformPair> {
    let mut v = Vec::new();
    for beta in [0.5, 0.8] {
        v.push(psi_pair(beta).expect("valid order"));
        v.push(phi_pair(beta).expect("valid order"));
    }
    v.push(m_wright_pair(0.5).expect("valid order"));
    v.push(stretched_exp_pair(0.5).expect("valid order"));
    v
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairRow {
    pub t: f64,
    pub time_value: f64,
    pub inverted_value: f64,
    pub abs_residual: f64,
    /// Gaver-Stehfest vote; `None` when it overflowed.
    pub stehfest_value: Option<f64>,
    /// Set when Stehfest disagrees with the contour value beyond tolerance.
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairReport {
    pub pair: String,
    pub rows: Vec<PairRow>,
    pub max_residual: f64,
}

impl PairReport {
    pub fn flagged(&self) -> usize {
        self.rows.iter().filter(|r| r.flagged).count()
    }
}

/// Inverts the image at every grid point and compares with the time side.
pub fn verify_pair(
    pair: &TransformPair,
    t_grid: &[f64],
    cfg: &InversionConfig,
) -> Result<PairReport> {
    cfg.validate()?;
    let (lo, hi) = pair.valid_t_range;
    let mut rows = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let tag = |e: Error| Error::AtGridPoint {
            t,
            source: Box::new(e),
        };
        if !(t >= lo && t <= hi) {
            return Err(tag(Error::domain(format!(
                "outside the valid range [{lo}, {hi}] of {}",
                pair.name
            ))));
        }
        let time_value = (pair.time_fn)(t).map_err(tag)?;
        let inverted_value = pair.invert(t, cfg).map_err(tag)?;
        let stehfest_value =
            invert_stehfest(|s| (pair.image_fn)(Complex64::new(s, 0.0)).re, t, cfg).ok();
        let flagged = match stehfest_value {
            Some(v) => !((v - inverted_value).abs() <= cfg.agreement_tol),
            None => true,
        };
        rows.push(PairRow {
            t,
            time_value,
            inverted_value,
            abs_residual: (inverted_value - time_value).abs(),
            stehfest_value,
            flagged,
        });
    }
    let max_residual = rows.iter().map(|r| r.abs_residual).fold(0.0, f64::max);
    Ok(PairReport {
        pair: pair.name.clone(),
        rows,
        max_residual,
    })
}

/// Columns: pair, t, time_value, inverted_value, abs_residual.
pub fn write_report_csv<W: Write + ?Sized>(w: &mut W, reports: &[PairReport]) -> io::Result<()> {
    write_row(
        w,
        &["pair", "t", "time_value", "inverted_value", "abs_residual"].map(String::from),
    )?;
    for rep in reports {
        for r in &rep.rows {
            write_row(
                w,
                &[
                    format!("\"{}\"", rep.pair),
                    fmt17(r.t),
                    fmt17(r.time_value),
                    fmt17(r.inverted_value),
                    fmt17(r.abs_residual),
                ],
            )?;
        }
    }
    Ok(())
}
