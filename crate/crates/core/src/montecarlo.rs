//! Samplers for the stable, Mittag-Leffler and inverse-stable laws, counting
//! paths by the renewal and the time-change routes, and ensemble statistics.

use std::f64::consts::PI;
use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, Open01};
use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::process::check_beta;
use crate::table::{fmt17, write_row};

/// Hard cap on events in one path.
pub const PATH_EVENT_CAP: usize = 1_000_000;
/// Operational steps coarser than this lose resolution against the unit
/// mean operational waiting time.
pub const DT_STAR_WARN: f64 = 0.05;
pub const DEFAULT_DT_STAR: f64 = 1e-3;
/// Stream offset separating the two routes of one seed.
pub const PARAMETRIC_STREAM_BASE: u64 = 1 << 40;

/// Identifies one ChaCha8 stream; draws depend on nothing else.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        RngStream { seed, stream_id }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(self.stream_id);
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Route {
    Renewal,
    Parametric,
}

impl Route {
    pub fn as_str(self) -> &'static str {
        match self {
            Route::Renewal => "renewal",
            Route::Parametric => "parametric",
        }
    }

    fn stream_base(self) -> u64 {
        match self {
            Route::Renewal => 0,
            Route::Parametric => PARAMETRIC_STREAM_BASE,
        }
    }
}

impl std::str::FromStr for Route {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "renewal" => Ok(Route::Renewal),
            "parametric" => Ok(Route::Parametric),
            _ => Err(Error::domain(format!(
                "unknown route {s:?}, expected renewal or parametric"
            ))),
        }
    }
}

/// Event epochs in `(0, horizon]`.
///
/// Renewal paths are strictly increasing. A parametric path repeats an epoch
/// when several operational events fall in one operational step (the step
/// maps to a single natural time), so it is only non-decreasing.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSample {
    pub beta: f64,
    pub horizon: f64,
    pub event_times: Vec<f64>,
    pub route: Route,
}

impl PathSample {
    /// `N(t) = #{t_j ≤ t}`.
    pub fn count_at(&self, t: f64) -> usize {
        self.event_times.partition_point(|&e| e <= t)
    }

    pub fn is_legal(&self) -> bool {
        let in_range = self
            .event_times
            .iter()
            .all(|&e| e > 0.0 && e <= self.horizon);
        let ordered = match self.route {
            Route::Renewal => self.event_times.windows(2).all(|w| w[0] < w[1]),
            Route::Parametric => self.event_times.windows(2).all(|w| w[0] <= w[1]),
        };
        in_range && ordered
    }
}

/// Leading process `t(t_*)` sampled at `t_* = k dt_star`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubordinatorPath {
    pub beta: f64,
    pub dt_star: f64,
    /// Starts at 0.
    pub leading_values: Vec<f64>,
}

fn check_fraction(beta: f64) -> Result<()> {
    if beta > 0.0 && beta < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "stable sampling needs 0 < beta < 1, got {beta}"
        )))
    }
}

/// One draw with `E[e^{-sS}] = e^{-s^β}` by Kanter's representation
/// `S = A(U)^{1/β} E^{-(1-β)/β}`, where
/// `A(u) = sin(βπu)^β sin((1-β)πu)^{1-β} / sin(πu)`.
pub fn sample_stable<R: Rng + ?Sized>(beta: f64, rng: &mut R) -> Result<f64> {
    check_fraction(beta)?;
    Ok(stable_unchecked(beta, rng))
}

fn stable_unchecked<R: Rng + ?Sized>(beta: f64, rng: &mut R) -> f64 {
    let u: f64 = rng.sample(Open01);
    let e: f64 = rng.sample(Exp1);
    let ln_a = beta * (beta * PI * u).sin().ln()
        + (1.0 - beta) * ((1.0 - beta) * PI * u).sin().ln()
        - (PI * u).sin().ln();
    ((ln_a - (1.0 - beta) * e.ln()) / beta).exp()
}

/// Waiting time with survival `E_β(-t^β)`: `T = E^{1/β} S`; `T = E` at `β = 1`.
pub fn sample_ml_waiting<R: Rng + ?Sized>(beta: f64, rng: &mut R) -> Result<f64> {
    check_beta(beta)?;
    Ok(ml_waiting_unchecked(beta, rng))
}

fn ml_waiting_unchecked<R: Rng + ?Sized>(beta: f64, rng: &mut R) -> f64 {
    let e: f64 = rng.sample(Exp1);
    if beta == 1.0 {
        return e;
    }
    e.powf(1.0 / beta) * stable_unchecked(beta, rng)
}

/// `t_*(t) = (t/S)^β`, exactly `t` at `β = 1`.
pub fn sample_inverse_subordinator<R: Rng + ?Sized>(beta: f64, t: f64, rng: &mut R) -> Result<f64> {
    check_beta(beta)?;
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::domain(format!(
            "inverse subordinator needs t > 0, got {t}"
        )));
    }
    if beta == 1.0 {
        return Ok(t);
    }
    Ok((t / stable_unchecked(beta, rng)).powf(beta))
}

fn check_horizon(horizon: f64) -> Result<()> {
    if horizon > 0.0 && horizon.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "horizon must be positive, got {horizon}"
        )))
    }
}

/// Cumulative Mittag-Leffler waiting times up to `horizon`.
pub fn simulate_renewal_path<R: Rng + ?Sized>(
    beta: f64,
    horizon: f64,
    rng: &mut R,
) -> Result<PathSample> {
    check_beta(beta)?;
    check_horizon(horizon)?;
    let mut t = 0.0;
    let mut events = Vec::new();
    loop {
        t += ml_waiting_unchecked(beta, rng);
        if t > horizon {
            break;
        }
        if events.len() == PATH_EVENT_CAP {
            return Err(Error::PathBudgetExceeded {
                cap: PATH_EVENT_CAP,
            });
        }
        events.push(t);
    }
    Ok(PathSample {
        beta,
        horizon,
        event_times: events,
        route: Route::Renewal,
    })
}

/// Unit-rate Poisson events in operational time mapped through the stable
/// subordinator built on steps of `dt_star`.
///
/// An event at operational epoch in `(k dt_*, (k+1) dt_*]` lands at
/// `t((k+1) dt_*)`. At `β = 1` the subordinator is the identity and the
/// epochs are used as they are, with the same draws as the renewal route.
pub fn simulate_parametric_path<R: Rng + ?Sized>(
    beta: f64,
    horizon: f64,
    dt_star: f64,
    rng: &mut R,
) -> Result<PathSample> {
    warn_coarse(beta, dt_star);
    simulate_parametric(beta, horizon, dt_star, rng, None)
}

/// As [`simulate_parametric_path`], also returning the leading process up to
/// its first passage above `horizon`.
pub fn simulate_parametric_with_leading<R: Rng + ?Sized>(
    beta: f64,
    horizon: f64,
    dt_star: f64,
    rng: &mut R,
) -> Result<(PathSample, SubordinatorPath)> {
    warn_coarse(beta, dt_star);
    let mut leading = vec![0.0];
    let path = simulate_parametric(beta, horizon, dt_star, rng, Some(&mut leading))?;
    Ok((
        path,
        SubordinatorPath {
            beta,
            dt_star,
            leading_values: leading,
        },
    ))
}

fn warn_coarse(beta: f64, dt_star: f64) {
    if beta < 1.0 && dt_star > DT_STAR_WARN {
        log::warn!("dt_star = {dt_star} is coarse against the unit operational waiting time");
    }
}

fn simulate_parametric<R: Rng + ?Sized>(
    beta: f64,
    horizon: f64,
    dt_star: f64,
    rng: &mut R,
    mut leading: Option<&mut Vec<f64>>,
) -> Result<PathSample> {
    check_beta(beta)?;
    check_horizon(horizon)?;
    if !(dt_star > 0.0 && dt_star.is_finite()) {
        return Err(Error::domain(format!(
            "dt_star must be positive, got {dt_star}"
        )));
    }
    let mut events = Vec::new();
    let push = |events: &mut Vec<f64>, t: f64| -> Result<()> {
        if events.len() == PATH_EVENT_CAP {
            return Err(Error::PathBudgetExceeded {
                cap: PATH_EVENT_CAP,
            });
        }
        events.push(t);
        Ok(())
    };
    if beta == 1.0 {
        let mut tau = 0.0;
        loop {
            tau += rng.sample::<f64, _>(Exp1);
            if tau > horizon {
                break;
            }
            push(&mut events, tau)?;
        }
        if let Some(l) = leading {
            l.push(horizon);
        }
    } else {
        let scale = dt_star.powf(1.0 / beta);
        let mut next_event: f64 = rng.sample(Exp1);
        let mut lead = 0.0;
        let mut k = 0u64;
        loop {
            k += 1;
            lead += scale * stable_unchecked(beta, rng);
            if let Some(l) = leading.as_deref_mut() {
                l.push(lead);
            }
            if lead > horizon {
                break;
            }
            let cell_end = k as f64 * dt_star;
            while next_event <= cell_end {
                push(&mut events, lead)?;
                next_event += rng.sample::<f64, _>(Exp1);
            }
        }
    }
    Ok(PathSample {
        beta,
        horizon,
        event_times: events,
        route: Route::Parametric,
    })
}

/// Inputs of a seeded ensemble run; path `i` uses stream
/// `route base + i` of `seed`, so results do not depend on the worker count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleConfig {
    pub beta: f64,
    pub horizon: f64,
    pub paths: usize,
    pub seed: u64,
    pub dt_star: f64,
    pub route: Route,
}

impl EnsembleConfig {
    pub fn stream(&self, i: usize) -> RngStream {
        RngStream::new(self.seed, self.route.stream_base() + i as u64)
    }
}

/// Path `i` of the ensemble. Unlike the single-path entry points this does
/// not warn about a coarse `dt_star`; [`simulate_ensemble`] does, once.
pub fn simulate_path(cfg: &EnsembleConfig, i: usize) -> Result<PathSample> {
    let mut rng = cfg.stream(i).rng();
    match cfg.route {
        Route::Renewal => simulate_renewal_path(cfg.beta, cfg.horizon, &mut rng),
        Route::Parametric => {
            simulate_parametric(cfg.beta, cfg.horizon, cfg.dt_star, &mut rng, None)
        }
    }
}

/// All paths of the ensemble, in stream order, generated on the current
/// rayon pool.
pub fn simulate_ensemble(cfg: &EnsembleConfig) -> Result<Vec<PathSample>> {
    if cfg.route == Route::Parametric {
        warn_coarse(cfg.beta, cfg.dt_star);
    }
    (0..cfg.paths)
        .into_par_iter()
        .map(|i| simulate_path(cfg, i))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleStats {
    pub t: f64,
    pub n_max: usize,
    /// Paths with `N(t) = n` for `n = 0..=n_max`.
    pub counts: Vec<u64>,
    /// Paths with `N(t) > n_max`.
    pub overflow: u64,
    pub paths: u64,
    pub p_hat: Vec<f64>,
    /// `sqrt(p̂(1 - p̂)/paths)`.
    pub se: Vec<f64>,
}

impl EnsembleStats {
    pub fn from_counts(t: f64, counts: Vec<u64>, overflow: u64) -> Result<Self> {
        let paths = counts.iter().sum::<u64>() + overflow;
        if paths == 0 {
            return Err(Error::EmptyEnsemble);
        }
        let m = paths as f64;
        let p_hat: Vec<f64> = counts.iter().map(|&c| c as f64 / m).collect();
        let se = p_hat.iter().map(|&p| (p * (1.0 - p) / m).sqrt()).collect();
        Ok(EnsembleStats {
            t,
            n_max: counts.len() - 1,
            counts,
            overflow,
            paths,
            p_hat,
            se,
        })
    }

    /// Sample mean of `N(t)` and its standard error; needs `overflow == 0`.
    pub fn mean(&self) -> Option<(f64, f64)> {
        if self.overflow > 0 {
            return None;
        }
        let m = self.paths as f64;
        let mean: f64 = self
            .counts
            .iter()
            .enumerate()
            .map(|(n, &c)| n as f64 * c as f64)
            .sum::<f64>()
            / m;
        let second: f64 = self
            .counts
            .iter()
            .enumerate()
            .map(|(n, &c)| (n * n) as f64 * c as f64)
            .sum::<f64>()
            / m;
        Some((mean, ((second - mean * mean).max(0.0) / m).sqrt()))
    }
}

/// Histogram of `N(t)` over the ensemble.
pub fn empirical_pmf(paths: &[PathSample], t: f64, n_max: usize) -> Result<EnsembleStats> {
    if paths.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    let mut counts = vec![0u64; n_max + 1];
    let mut overflow = 0;
    for p in paths {
        if p.horizon < t {
            return Err(Error::HorizonMismatch {
                horizon: p.horizon,
                t,
            });
        }
        match counts.get_mut(p.count_at(t)) {
            Some(c) => *c += 1,
            None => overflow += 1,
        }
    }
    EnsembleStats::from_counts(t, counts, overflow)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceReport {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    /// Bins after merging; the last one absorbs the sparse tail.
    pub bins: usize,
}

/// Two-sample chi-square homogeneity test on the `N(t)` histograms.
///
/// Bins are scanned from the top; a bin whose smaller pooled expected count
/// is below 5 is merged into the tail, so every remaining bin has both
/// expected counts at least 5.
pub fn equivalence_test(a: &EnsembleStats, b: &EnsembleStats) -> Result<EquivalenceReport> {
    if a.t != b.t || a.n_max != b.n_max {
        return Err(Error::domain("ensembles must share t and n_max"));
    }
    let na = a.paths as f64;
    let nb = b.paths as f64;
    let total = na + nb;
    let expected_min = |ca: u64, cb: u64| {
        let pooled = (ca + cb) as f64 / total;
        (na * pooled).min(nb * pooled)
    };
    let raw: Vec<(u64, u64)> = (0..=a.n_max)
        .map(|n| (a.counts[n], b.counts[n]))
        .chain(std::iter::once((a.overflow, b.overflow)))
        .collect();
    let mut bins: Vec<(u64, u64)> = Vec::new();
    let mut acc = (0, 0);
    for &(ca, cb) in raw.iter().rev() {
        acc = (acc.0 + ca, acc.1 + cb);
        if expected_min(acc.0, acc.1) >= 5.0 {
            bins.push(acc);
            acc = (0, 0);
        }
    }
    if acc.0 + acc.1 > 0 {
        match bins.last_mut() {
            // a sparse lowest bin joins its neighbour
            Some(last) => *last = (last.0 + acc.0, last.1 + acc.1),
            None => bins.push(acc),
        }
    }
    if bins.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "{} usable bin(s), need 2",
            bins.len()
        )));
    }
    let mut stat = 0.0;
    for &(ca, cb) in &bins {
        let pooled = (ca + cb) as f64 / total;
        let (ea, eb) = (na * pooled, nb * pooled);
        stat += (ca as f64 - ea).powi(2) / ea + (cb as f64 - eb).powi(2) / eb;
    }
    let dof = bins.len() - 1;
    let dist = ChiSquared::new(dof as f64).map_err(|e| Error::domain(e.to_string()))?;
    Ok(EquivalenceReport {
        statistic: stat,
        dof,
        p_value: dist.sf(stat),
        bins: bins.len(),
    })
}

/// Columns: beta, t, n, count, p_hat, se, route.
pub fn write_ensemble_csv<W: Write + ?Sized>(
    w: &mut W,
    beta: f64,
    route: Route,
    stats: &[EnsembleStats],
) -> io::Result<()> {
    write_row(
        w,
        &["beta", "t", "n", "count", "p_hat", "se", "route"].map(String::from),
    )?;
    for s in stats {
        for n in 0..=s.n_max {
            write_row(
                w,
                &[
                    fmt17(beta),
                    fmt17(s.t),
                    n.to_string(),
                    s.counts[n].to_string(),
                    fmt17(s.p_hat[n]),
                    fmt17(s.se[n]),
                    route.as_str().to_string(),
                ],
            )?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::{pmf, FppParams};

    fn rng(id: u64) -> ChaCha8Rng {
        RngStream::new(20240611, id).rng()
    }

    fn within_4se(xs: impl Iterator<Item = f64>, target: f64) -> (bool, f64, f64) {
        let v: Vec<f64> = xs.collect();
        let m = v.len() as f64;
        let mean = v.iter().sum::<f64>() / m;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
        let se = (var / m).sqrt();
        ((mean - target).abs() <= 4.0 * se, mean, se)
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<f64> = (0..5).map(|_| rng(3).random()).collect();
        let mut r = rng(3);
        let b: Vec<f64> = (0..5).map(|_| r.random()).collect();
        let mut r = rng(4);
        let c: Vec<f64> = (0..5).map(|_| r.random()).collect();
        assert_eq!(a[0], b[0]);
        assert_ne!(b, c);
    }

    #[test]
    fn stable_transform() {
        let mut r = rng(1);
        let (ok, mean, se) = within_4se(
            (0..100_000).map(|_| (-sample_stable(0.5, &mut r).unwrap()).exp()),
            (-1.0f64).exp(),
        );
        assert!(ok, "{mean} ± {se}");
        assert!(sample_stable(1.0, &mut r).is_err());
    }

    #[test]
    fn waiting_time_survival_and_transform() {
        let mut r = rng(2);
        let draws: Vec<f64> = (0..100_000)
            .map(|_| sample_ml_waiting(0.5, &mut r).unwrap())
            .collect();
        let (ok, ..) = within_4se(
            draws.iter().map(|&t| if t > 1.0 { 1.0 } else { 0.0 }),
            0.427_583_576_155_807,
        );
        assert!(ok);
        let (ok, ..) = within_4se(draws.iter().map(|&t| (-t).exp()), 0.5);
        assert!(ok);
    }

    #[test]
    fn inverse_subordinator_mean() {
        let mut r = rng(5);
        assert_eq!(sample_inverse_subordinator(1.0, 2.5, &mut r).unwrap(), 2.5);
        let (ok, mean, se) = within_4se(
            (0..100_000).map(|_| sample_inverse_subordinator(0.5, 1.0, &mut r).unwrap()),
            std::f64::consts::FRAC_2_SQRT_PI,
        );
        assert!(ok, "{mean} ± {se}");
    }

    #[test]
    fn counting_and_legality() {
        let p = PathSample {
            beta: 0.5,
            horizon: 1.0,
            event_times: vec![0.3, 0.7],
            route: Route::Renewal,
        };
        assert_eq!(p.count_at(0.5), 1);
        assert_eq!(p.count_at(0.7), 2);
        let mut r = rng(6);
        for _ in 0..200 {
            assert!(simulate_renewal_path(0.5, 3.0, &mut r).unwrap().is_legal());
            assert!(simulate_parametric_path(0.5, 3.0, 1e-2, &mut r)
                .unwrap()
                .is_legal());
        }
    }

    #[test]
    fn unit_order_routes_coincide() {
        for i in 0..50 {
            let a = simulate_renewal_path(1.0, 4.0, &mut rng(i)).unwrap();
            let b = simulate_parametric_path(1.0, 4.0, 1e-3, &mut rng(i)).unwrap();
            assert_eq!(a.event_times, b.event_times);
        }
    }

    #[test]
    fn leading_process_is_monotone() {
        let (_, lead) = simulate_parametric_with_leading(0.6, 1.0, 1e-2, &mut rng(7)).unwrap();
        assert_eq!(lead.leading_values[0], 0.0);
        assert!(lead.leading_values.windows(2).all(|w| w[0] <= w[1]));
        assert!(*lead.leading_values.last().unwrap() > 1.0);
    }

    #[test]
    fn ensemble_is_independent_of_pool_size() {
        let cfg = EnsembleConfig {
            beta: 0.7,
            horizon: 1.0,
            paths: 300,
            seed: 11,
            dt_star: 1e-2,
            route: Route::Parametric,
        };
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let three = rayon::ThreadPoolBuilder::new()
            .num_threads(3)
            .build()
            .unwrap();
        let a = one.install(|| simulate_ensemble(&cfg)).unwrap();
        let b = three.install(|| simulate_ensemble(&cfg)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn poisson_ensemble() {
        let cfg = EnsembleConfig {
            beta: 1.0,
            horizon: 1.0,
            paths: 100_000,
            seed: 12,
            dt_star: DEFAULT_DT_STAR,
            route: Route::Renewal,
        };
        let stats = empirical_pmf(&simulate_ensemble(&cfg).unwrap(), 1.0, 8).unwrap();
        let params = FppParams::standard(1.0).unwrap();
        for n in 0..=5 {
            let p = pmf(params, 1.0, n).unwrap();
            assert!((stats.p_hat[n] - p).abs() <= 4.0 * stats.se[n], "n={n}");
        }
        assert_eq!(stats.counts.iter().sum::<u64>() + stats.overflow, 100_000);
    }

    #[test]
    fn empirical_errors() {
        assert_eq!(empirical_pmf(&[], 1.0, 3), Err(Error::EmptyEnsemble));
        let p = PathSample {
            beta: 0.5,
            horizon: 1.0,
            event_times: vec![],
            route: Route::Renewal,
        };
        assert!(matches!(
            empirical_pmf(&[p], 2.0, 3),
            Err(Error::HorizonMismatch { .. })
        ));
    }

    #[test]
    fn chi_square_power_and_null() {
        let run = |beta: f64, seed: u64| {
            let cfg = EnsembleConfig {
                beta,
                horizon: 1.0,
                paths: 20_000,
                seed,
                dt_star: DEFAULT_DT_STAR,
                route: Route::Renewal,
            };
            empirical_pmf(&simulate_ensemble(&cfg).unwrap(), 1.0, 12).unwrap()
        };
        let a = run(0.5, 1);
        let b = run(0.5, 2);
        let c = run(0.9, 3);
        assert!(equivalence_test(&a, &b).unwrap().p_value > 1e-3);
        assert!(equivalence_test(&a, &c).unwrap().p_value < 1e-3);
        let lone = EnsembleStats::from_counts(1.0, vec![10, 0, 0], 0).unwrap();
        assert!(matches!(
            equivalence_test(&lone, &lone),
            Err(Error::InsufficientData(_))
        ));
    }
}
