//! Subordination integral for `p_n(t)`:
//! `p_n = ∫_0^∞ Pois_n(u) · M_β(u/x)/x du` with `x = λ t^β`.

use crate::error::{Error, Result};
use crate::quad::{gauss_legendre, CompensatedSum};
use crate::specfun::{ln_factorial, m_wright, SeriesControl};

/// `ln M_β` below which the integrand is dropped (e^{-40} ≈ 4e-18).
const TAIL_EXPONENT: f64 = 40.0;

/// Quadrature absolute tolerance for a single `p_n`.
pub(crate) const SUBORD_TOL: f64 = 1e-9;

/// Point beyond which `M_β(y) < e^{-40}`, from the saddle-point exponent
/// `b (βy)^{1/(1-β)}`.
fn m_wright_cutoff(beta: f64) -> f64 {
    let b = (1.0 - beta) / beta;
    (TAIL_EXPONENT / b).powf(1.0 - beta) / beta
}

/// Points per Gauss-Legendre panel.
const PANEL_ORDER: usize = 16;
pub(crate) const MAX_NODES: usize = 1 << 16;

/// Panel width near the mode, relative to `1 - β`.
const SPIKE_WIDTH: f64 = 1.0;
/// Growth of panel width with distance from the mode.
const GRADING: f64 = 0.25;

/// Panel breakpoints in `r = sqrt(u/x)` over `[0, sqrt(y_cut)]`.
///
/// In `r` the Poisson factor has width `1/(2 sqrt x)` wherever its mass
/// sits, so uniform panels resolve every `n` alike; their count grows with
/// `sqrt(x)` beyond the `base` floor. As `β → 1` the density collapses onto
/// `y = 1` with a right edge of width about `1 - β`; panels shrink
/// geometrically towards it until they are that narrow.
fn mesh(beta: f64, x: f64, base: usize, scale: f64) -> Vec<f64> {
    let r_cut = m_wright_cutoff(beta).sqrt();
    let panels = base.max((3.0 * r_cut * x.sqrt()).ceil() as usize);
    let wide = scale * r_cut / panels as f64;
    let narrow = scale * SPIKE_WIDTH * (1.0 - beta);
    if narrow >= wide {
        let n = (r_cut / wide).ceil() as usize;
        return (0..=n).map(|k| r_cut * k as f64 / n as f64).collect();
    }
    let mode = r_cut.min(1.0);
    let step = |d: f64| (GRADING * d).clamp(narrow, wide);
    let mut left = vec![mode];
    let mut r = mode;
    while r > 0.0 {
        r = (r - step(mode - r)).max(0.0);
        left.push(r);
    }
    left.reverse();
    let mut r = mode;
    while r < r_cut {
        r = (r + step(r - mode)).min(r_cut);
        left.push(r);
    }
    left
}

/// Nodes `u_i` and weights `W_i` with `p_n ≈ Σ W_i Pois_n(u_i)`; the
/// M-Wright factor is folded into the weights once per `(β, x)`.
#[derive(Debug, Clone)]
pub(crate) struct SubordRule {
    u: Vec<f64>,
    w: Vec<f64>,
}

impl SubordRule {
    /// Composite Gauss-Legendre rule in `r = sqrt(u/x)` over
    /// `[0, sqrt(y_cut)]` on the panels of [`mesh`], widths times `scale`.
    fn new(beta: f64, x: f64, nodes: usize, scale: f64) -> Result<Self> {
        if !(PANEL_ORDER..=MAX_NODES).contains(&nodes) {
            return Err(Error::domain(format!(
                "quad_nodes must lie in {PANEL_ORDER}..={MAX_NODES}, got {nodes}"
            )));
        }
        let breaks = mesh(beta, x, nodes / PANEL_ORDER, scale);
        if (breaks.len() - 1) * PANEL_ORDER > MAX_NODES {
            return Err(Error::QuadratureFailure {
                what: "subordination integral (panel budget)",
                tol: SUBORD_TOL,
                estimate: f64::INFINITY,
            });
        }
        let (gx, gw) = gauss_legendre(PANEL_ORDER);
        let ctl = SeriesControl::default();
        let mut u = Vec::with_capacity((breaks.len() - 1) * PANEL_ORDER);
        let mut w = Vec::with_capacity(u.capacity());
        for pair in breaks.windows(2) {
            let (mid, half) = (0.5 * (pair[0] + pair[1]), 0.5 * (pair[1] - pair[0]));
            for (&z, &gwi) in gx.iter().zip(&gw) {
                let r = mid + half * z;
                let y = r * r;
                let m = m_wright(beta, y, &ctl)?;
                // dy = 2r dr
                u.push(x * y);
                w.push(half * gwi * 2.0 * r * m);
            }
        }
        Ok(SubordRule { u, w })
    }

    pub(crate) fn pmf(&self, n: usize) -> f64 {
        let nf = n as f64;
        let lf = ln_factorial(n);
        let mut acc = CompensatedSum::new();
        for (&u, &w) in self.u.iter().zip(&self.w) {
            let ln_p = if n == 0 { -u } else { nf * u.ln() - u - lf };
            acc.add(w * ln_p.exp());
        }
        acc.value()
    }
}

/// A rule and a twin on panels 4/3 as wide; their difference is the error
/// estimate.
#[derive(Debug, Clone)]
pub(crate) struct SubordPair {
    fine: SubordRule,
    coarse: SubordRule,
}

impl SubordPair {
    pub(crate) fn new(beta: f64, x: f64, nodes: usize) -> Result<Self> {
        Ok(SubordPair {
            fine: SubordRule::new(beta, x, nodes, 1.0)?,
            coarse: SubordRule::new(beta, x, nodes, 4.0 / 3.0)?,
        })
    }

    pub(crate) fn pmf(&self, n: usize) -> Result<f64> {
        let a = self.fine.pmf(n);
        let b = self.coarse.pmf(n);
        let err = (a - b).abs();
        if !(err <= SUBORD_TOL) || !a.is_finite() {
            return Err(Error::QuadratureFailure {
                what: "subordination integral",
                tol: SUBORD_TOL,
                estimate: err,
            });
        }
        Ok(a.clamp(0.0, 1.0))
    }
}
