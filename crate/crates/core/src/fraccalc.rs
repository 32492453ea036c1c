//! Discrete fractional calculus on uniform grids starting at `t = 0`.

use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::process::{pmf, FppParams};
use crate::specfun::{gamma, mittag_leffler, MlOrder, SeriesControl};
use crate::table::{fmt17, write_row};

/// Samples `f(k h)` for `k = 0..count`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    h: f64,
    values: Vec<f64>,
}

impl TimeGrid {
    pub fn new(h: f64, values: Vec<f64>) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::domain(format!(
                "grid step must be positive, got {h}"
            )));
        }
        if values.len() < 2 {
            return Err(Error::GridTooCoarse(format!(
                "{} samples, need at least 2",
                values.len()
            )));
        }
        Ok(TimeGrid { h, values })
    }

    /// Grid of `count` nodes with values `f(k h)`.
    pub fn sample<F: FnMut(f64) -> Result<f64>>(h: f64, count: usize, mut f: F) -> Result<Self> {
        let values = (0..count)
            .map(|k| f(k as f64 * h))
            .collect::<Result<Vec<_>>>()?;
        Self::new(h, values)
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn count(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn t(&self, k: usize) -> f64 {
        k as f64 * self.h
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FracOrder(f64);

impl FracOrder {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha > 0.0 && alpha <= 1.0 {
            Ok(FracOrder(alpha))
        } else {
            Err(Error::InvalidOrder {
                value: alpha,
                reason: "operator order must lie in (0, 1]",
            })
        }
    }

    pub fn alpha(self) -> f64 {
        self.0
    }
}

/// `(1+x)^q - 1 - q x` without cancellation.
fn pow1p_tail(q: f64, x: f64) -> f64 {
    if x.abs() > 0.25 {
        return (q * x.ln_1p()).exp_m1() - q * x;
    }
    let mut term = q * x;
    let mut sum = 0.0;
    for k in 2..200 {
        term *= (q - (k - 1) as f64) / k as f64 * x;
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// Product-trapezoid `J^α f`: the kernel is integrated exactly against the
/// piecewise-linear interpolant, so linear `f` is reproduced exactly.
pub fn rl_integral(grid: &TimeGrid, order: FracOrder) -> TimeGrid {
    let a = order.alpha();
    let f = &grid.values;
    let n = f.len();
    let c = grid.h.powf(a) / gamma(a + 2.0);
    let q = a + 1.0;
    // second differences of m^q, expanded around m to avoid cancellation
    let w: Vec<f64> = (0..n)
        .map(|m| {
            if m == 0 {
                return 0.0;
            }
            let mf = m as f64;
            mf.powf(q) * (pow1p_tail(q, 1.0 / mf) + pow1p_tail(q, -1.0 / mf))
        })
        .collect();
    let mut out = vec![0.0; n];
    for k in 1..n {
        let kf = k as f64;
        // (k-1)^q - (k-q) k^{q-1}
        let w0 = kf.powf(q) * pow1p_tail(q, -1.0 / kf);
        let mut s = w0 * f[0];
        for j in 1..k {
            s += w[k - j] * f[j];
        }
        s += f[k];
        out[k] = c * s;
    }
    TimeGrid {
        h: grid.h,
        values: out,
    }
}

/// L1 weights `b_j = (j+1)^{1-α} - j^{1-α}`; `b_0 = 1` also at `α = 1`.
fn l1_weights(alpha: f64, n: usize) -> Vec<f64> {
    let e = 1.0 - alpha;
    (0..n)
        .map(|j| {
            if j == 0 {
                1.0
            } else {
                let jf = j as f64;
                jf.powf(e) * (e * (1.0 / jf).ln_1p()).exp_m1()
            }
        })
        .collect()
}

fn l1_apply(f: &[f64], b: &[f64], scale: f64) -> Vec<f64> {
    let n = f.len();
    let d: Vec<f64> = f.windows(2).map(|w| w[1] - w[0]).collect();
    let mut out = vec![f64::NAN; n];
    for k in 1..n {
        let mut s = 0.0;
        for j in 0..k {
            s += b[j] * d[k - 1 - j];
        }
        out[k] = scale * s;
    }
    out
}

/// L1 scheme for the Caputo derivative. Node 0 carries NaN; at `α = 1` the
/// scheme is the backward difference.
pub fn caputo_derivative(grid: &TimeGrid, order: FracOrder) -> Result<TimeGrid> {
    if grid.count() < 3 {
        return Err(Error::GridTooCoarse(format!(
            "Caputo derivative needs 3 nodes, got {}",
            grid.count()
        )));
    }
    let a = order.alpha();
    let b = l1_weights(a, grid.count());
    let scale = grid.h.powf(-a) / gamma(2.0 - a);
    Ok(TimeGrid {
        h: grid.h,
        values: l1_apply(&grid.values, &b, scale),
    })
}

/// L1 scheme with starting corrections that make it exact on `t^σ` for every
/// `σ` in `exponents` and on `t`, using the samples at the first few nodes.
///
/// Plain L1 has an `h`-independent error at a fixed node index for
/// `f ~ t^σ`, `σ < 2 - α`; the corrections remove those terms and restore
/// order `2 - α` uniformly on the grid.
pub fn caputo_derivative_corrected(
    grid: &TimeGrid,
    order: FracOrder,
    exponents: &[f64],
) -> Result<TimeGrid> {
    let m = exponents.len();
    if grid.count() < (m + 2).max(3) {
        return Err(Error::GridTooCoarse(format!(
            "{} corrections need {} nodes, got {}",
            m,
            (m + 2).max(3),
            grid.count()
        )));
    }
    if exponents.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
        return Err(Error::domain("correction exponents must be positive"));
    }
    // the corrections must leave linear functions exact
    let mut exponents = exponents.to_vec();
    if !exponents.is_empty() && !exponents.contains(&1.0) {
        exponents.push(1.0);
    }
    let m = exponents.len();
    let a = order.alpha();
    let n = grid.count();
    let h = grid.h;
    let b = l1_weights(a, n);
    let scale = h.powf(-a) / gamma(2.0 - a);
    let mut out = l1_apply(&grid.values, &b, scale);
    if m == 0 {
        return Ok(TimeGrid { h, values: out });
    }
    // in units of t' = t/h: row r holds j^{σ_r}, j = 1..=m
    let basis: Vec<Vec<f64>> = exponents
        .iter()
        .map(|&s| (1..=m).map(|j| (j as f64).powf(s)).collect())
        .collect();
    let lu = Lu::new(basis)?;
    // defect of plain L1 on t'^σ, in the same units
    let defects: Vec<Vec<f64>> = exponents
        .iter()
        .map(|&s| {
            let f: Vec<f64> = (0..n).map(|k| (k as f64).powf(s)).collect();
            let approx = l1_apply(&f, &b, 1.0 / gamma(2.0 - a));
            let c = gamma(s + 1.0) / gamma(s + 1.0 - a);
            (0..n)
                .map(|k| c * (k as f64).powf(s - a) - approx[k])
                .collect()
        })
        .collect();
    let f0 = grid.values[0];
    let df: Vec<f64> = (1..=m).map(|j| grid.values[j] - f0).collect();
    let ha = h.powf(-a);
    for k in 1..n {
        let rhs: Vec<f64> = defects.iter().map(|d| d[k]).collect();
        let w = lu.solve(&rhs);
        let corr: f64 = w.iter().zip(&df).map(|(w, d)| w * d).sum();
        out[k] += ha * corr;
    }
    Ok(TimeGrid { h, values: out })
}

/// Dense LU with partial pivoting for the small correction systems.
struct Lu {
    a: Vec<Vec<f64>>,
    perm: Vec<usize>,
}

impl Lu {
    fn new(mut a: Vec<Vec<f64>>) -> Result<Self> {
        let n = a.len();
        let mut perm: Vec<usize> = (0..n).collect();
        for c in 0..n {
            let p = (c..n)
                .max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs()))
                .expect("non-empty range");
            if a[p][c].abs() < 1e-300 {
                return Err(Error::domain("correction exponents must be distinct"));
            }
            a.swap(c, p);
            perm.swap(c, p);
            for r in c + 1..n {
                let l = a[r][c] / a[c][c];
                a[r][c] = l;
                let (upper, lower) = a.split_at_mut(r);
                for (x, &y) in lower[0][c + 1..].iter_mut().zip(&upper[c][c + 1..]) {
                    *x -= l * y;
                }
            }
        }
        Ok(Lu { a, perm })
    }

    fn solve(&self, d: &[f64]) -> Vec<f64> {
        let n = d.len();
        let mut y: Vec<f64> = self.perm.iter().map(|&p| d[p]).collect();
        for r in 0..n {
            for j in 0..r {
                y[r] -= self.a[r][j] * y[j];
            }
        }
        for r in (0..n).rev() {
            for j in r + 1..n {
                y[r] -= self.a[r][j] * y[j];
            }
            y[r] /= self.a[r][r];
        }
        y
    }
}

/// Non-integer powers `kβ < 2` present in the expansions of `Ψ` and `p_n`.
pub fn singular_exponents(beta: f64) -> Vec<f64> {
    (1..)
        .map(|k| k as f64 * beta)
        .take_while(|&s| s < 2.0 - 1e-12)
        .filter(|s| (s - s.round()).abs() > 1e-9)
        .collect()
}

/// Samples of `Ψ(t) = E_β(-t^β)` on `count` nodes of step `h`.
pub fn sample_survival(beta: f64, h: f64, count: usize) -> Result<TimeGrid> {
    let order = MlOrder::new(beta)?;
    let ctl = SeriesControl::default();
    TimeGrid::sample(h, count, |t| mittag_leffler(order, -t.powf(beta), &ctl))
}

/// Samples of `p_0 ..= p_{n_levels}` on `count` nodes of step `h`.
pub fn sample_pmf_levels(
    beta: f64,
    h: f64,
    count: usize,
    n_levels: usize,
) -> Result<Vec<TimeGrid>> {
    let params = FppParams::standard(beta)?;
    (0..=n_levels)
        .map(|n| TimeGrid::sample(h, count, |t| pmf(params, t, n)))
        .collect()
}

fn max_from_second_interior(r: &[f64]) -> f64 {
    r.iter()
        .skip(2)
        .fold(0.0, |m, &v| if v.is_nan() { f64::NAN } else { m.max(v) })
}

/// `max_k |D^β Ψ + Ψ|` over interior nodes after the first, with `D^β` the
/// corrected L1 scheme.
pub fn relaxation_residual(beta: f64, grid: &TimeGrid) -> Result<f64> {
    let order = FracOrder::new(beta)?;
    let d = caputo_derivative_corrected(grid, order, &singular_exponents(beta))?;
    let r: Vec<f64> = d
        .values
        .iter()
        .zip(&grid.values)
        .map(|(d, p)| (d + p).abs())
        .collect();
    Ok(max_from_second_interior(&r))
}

/// Same residual with the plain L1 scheme.
pub fn relaxation_residual_plain(beta: f64, grid: &TimeGrid) -> Result<f64> {
    let d = caputo_derivative(grid, FracOrder::new(beta)?)?;
    let r: Vec<f64> = d
        .values
        .iter()
        .zip(&grid.values)
        .map(|(d, p)| (d + p).abs())
        .collect();
    Ok(max_from_second_interior(&r))
}

/// Per-level residuals of `D^β p_n = p_{n-1} - p_n`; entry 0 is
/// `sup |p_0 - E_β(-t^β)|`.
pub fn fde_system_residual(beta: f64, levels: &[TimeGrid]) -> Result<Vec<f64>> {
    let order = FracOrder::new(beta)?;
    let first = levels
        .first()
        .ok_or_else(|| Error::domain("need at least level 0"))?;
    if levels
        .iter()
        .any(|g| g.h != first.h || g.count() != first.count())
    {
        return Err(Error::domain("all levels must share one grid"));
    }
    let psi = sample_survival(beta, first.h, first.count())?;
    let mut out = vec![first
        .values
        .iter()
        .zip(&psi.values)
        .fold(0.0, |m: f64, (a, b)| m.max((a - b).abs()))];
    let exps = singular_exponents(beta);
    for n in 1..levels.len() {
        let d = caputo_derivative_corrected(&levels[n], order, &exps)?;
        let r: Vec<f64> = (0..first.count())
            .map(|k| (d.values[k] - (levels[n - 1].values[k] - levels[n].values[k])).abs())
            .collect();
        out.push(max_from_second_interior(&r));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub beta: f64,
    pub h: f64,
    pub max_residual: f64,
    /// `log2` of the residual ratio against the previous, twice coarser row.
    pub observed_order: Option<f64>,
}

/// Residuals on `t ∈ [0, horizon]` for `h0, h0/2, …` (`halvings + 1` rows).
pub fn convergence_table<F>(
    beta: f64,
    horizon: f64,
    h0: f64,
    halvings: usize,
    mut residual: F,
) -> Result<Vec<ConvergenceRow>>
where
    F: FnMut(f64, usize) -> Result<f64>,
{
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(halvings + 1);
    for i in 0..=halvings {
        let h = h0 / 2f64.powi(i as i32);
        let count = (horizon / h).round() as usize + 1;
        let r = residual(h, count)?;
        let observed_order = rows.last().map(|p| (p.max_residual / r).log2());
        rows.push(ConvergenceRow {
            beta,
            h,
            max_residual: r,
            observed_order,
        });
    }
    Ok(rows)
}

/// Columns: beta, h, max_residual, observed_order (empty on the first row).
pub fn write_convergence_csv<W: Write + ?Sized>(
    w: &mut W,
    rows: &[ConvergenceRow],
) -> io::Result<()> {
    write_row(
        w,
        &["beta", "h", "max_residual", "observed_order"].map(String::from),
    )?;
    for r in rows {
        write_row(
            w,
            &[
                fmt17(r.beta),
                fmt17(r.h),
                fmt17(r.max_residual),
                r.observed_order.map(fmt17).unwrap_or_default(),
            ],
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ord(a: f64) -> FracOrder {
        FracOrder::new(a).unwrap()
    }

    fn power(h: f64, count: usize, p: f64) -> TimeGrid {
        TimeGrid::sample(h, count, |t| Ok(t.powf(p))).unwrap()
    }

    #[test]
    fn rl_reference_values() {
        let g = power(0.01, 101, 0.0);
        let v = rl_integral(&g, ord(0.5)).values[100];
        assert!((v - std::f64::consts::FRAC_2_SQRT_PI).abs() < 1e-14, "{v}");
        let g = power(0.02, 101, 0.0);
        assert!((rl_integral(&g, ord(1.0)).values[100] - 2.0).abs() < 1e-14);
        let g = power(0.01, 101, 1.0);
        assert!((rl_integral(&g, ord(0.5)).values[100] - 0.752_252_778_063_675_1).abs() < 1e-14);
    }

    #[test]
    fn caputo_reference_values() {
        let g = TimeGrid::sample(0.01, 101, |_| Ok(3.0)).unwrap();
        let d = caputo_derivative(&g, ord(0.4)).unwrap();
        assert!(d.values[1..].iter().all(|&v| v == 0.0));
        let g = power(0.01, 101, 1.0);
        let d = caputo_derivative(&g, ord(0.5)).unwrap();
        assert!((d.values[100] - std::f64::consts::FRAC_2_SQRT_PI).abs() < 1e-13);
        assert!(caputo_derivative(&power(0.1, 2, 1.0), ord(0.5)).is_err());
    }

    #[test]
    fn unit_order_is_backward_difference() {
        let g = TimeGrid::sample(0.05, 40, |t| Ok((3.0 * t).sin())).unwrap();
        let d = caputo_derivative(&g, ord(1.0)).unwrap();
        for k in 1..40 {
            let bd = (g.values[k] - g.values[k - 1]) / 0.05;
            assert!((d.values[k] - bd).abs() < 1e-12);
        }
    }

    #[test]
    fn corrections_are_exact_on_their_powers() {
        let a = 0.6;
        let h = 0.01;
        let g =
            TimeGrid::sample(h, 201, |t| Ok(2.0 + t.powf(0.6) - 0.3 * t.powf(1.2) + t)).unwrap();
        let d = caputo_derivative_corrected(&g, ord(a), &[0.6, 1.2]).unwrap();
        for k in 1..201 {
            let t = k as f64 * h;
            let exact = gamma(1.6) / gamma(1.0) - 0.3 * gamma(2.2) / gamma(1.6) * t.powf(0.6)
                + t.powf(0.4) / gamma(1.4);
            assert!(
                (d.values[k] - exact).abs() < 1e-10,
                "k={k}: {} vs {exact}",
                d.values[k]
            );
        }
    }

    #[test]
    fn exponent_sets() {
        assert_eq!(singular_exponents(0.5), vec![0.5, 1.5]);
        assert_eq!(singular_exponents(0.9), vec![0.9, 1.8]);
        assert!(singular_exponents(1.0).is_empty());
    }

    #[test]
    fn unit_order_relaxation() {
        let g = sample_survival(1.0, 1e-3, 2001).unwrap();
        assert!(relaxation_residual(1.0, &g).unwrap() < 5e-3);
    }

    #[test]
    fn poisson_system() {
        let lv = sample_pmf_levels(1.0, 1e-3, 2001, 1).unwrap();
        let r = fde_system_residual(1.0, &lv).unwrap();
        assert!(r[0] < 1e-15 && r[1] < 5e-3);
        let lv = sample_pmf_levels(0.5, 1e-2, 201, 0).unwrap();
        assert!(fde_system_residual(0.5, &lv).unwrap()[0] < 1e-12);
    }

    #[test]
    fn csv_layout() {
        let rows = convergence_table(0.5, 1.0, 0.02, 1, |h, n| {
            relaxation_residual(0.5, &sample_survival(0.5, h, n)?)
        })
        .unwrap();
        let mut buf = Vec::new();
        write_convergence_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("beta,h,max_residual,observed_order\n"));
        assert!(text.lines().nth(1).unwrap().ends_with(','));
    }
}
