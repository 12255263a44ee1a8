//! Scan execution: single points, dense (t, eps) grids and
//! maximum-tolerable-noise threshold curves, emitted as CSV.

use rayon::prelude::*;

use cvcka::{finite_key_rate, key_rate, ChannelParams64, Error, Result};

use crate::config::{ScanConfig, ScanMode};

/// One point of a threshold curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdPoint {
    pub t: f64,
    pub eps_max: f64,
    pub rate_at_zero_eps: f64,
}

/// Key rate of the configured scenario at channel `(t, eps)`.
pub fn evaluate_rate(cfg: &ScanConfig, t: f64, eps: f64) -> Result<f64> {
    let ch = ChannelParams64::new(t, eps)?;
    match &cfg.finite_size {
        None => Ok(key_rate(&cfg.scenario, cfg.rate, &ch)?.rate_bits_per_use),
        Some((fs, ordering)) => finite_key_rate(&cfg.scenario, cfg.rate, &ch, fs, *ordering),
    }
}

/// Bisects the noise threshold at fixed `t`: the largest `eps` in
/// `[0, hi]` with non-negative rate, to tolerance `tol`. Reports 0 when
/// even a noiseless channel yields no key. Every emitted point with
/// `eps_max > 0` brackets the sign change to within `tol`; a rate that
/// never turns negative inside `[0, hi]`, or a non-monotone sign pattern
/// around the root, is a diagnostic error carrying the offending values.
pub fn threshold_at(cfg: &ScanConfig, t: f64, hi: f64, tol: f64) -> Result<ThresholdPoint> {
    let rate_at_zero = evaluate_rate(cfg, t, 0.0)?;
    if rate_at_zero < 0.0 {
        return Ok(ThresholdPoint {
            t,
            eps_max: 0.0,
            rate_at_zero_eps: rate_at_zero,
        });
    }
    let rate_at_hi = evaluate_rate(cfg, t, hi)?;
    if rate_at_hi >= 0.0 {
        return Err(Error::Bisection {
            t,
            lo: 0.0,
            hi,
            r_lo: rate_at_zero,
            r_hi: rate_at_hi,
            msg: "rate stays non-negative across the whole bracket; raise eps_hi".into(),
        });
    }
    let (mut lo, mut up) = (0.0f64, hi);
    while up - lo > tol {
        let mid = 0.5 * (lo + up);
        if evaluate_rate(cfg, t, mid)? >= 0.0 {
            lo = mid;
        } else {
            up = mid;
        }
    }
    let eps_max = 0.5 * (lo + up);
    let r_lo = evaluate_rate(cfg, t, (eps_max - tol).max(0.0))?;
    let r_hi = evaluate_rate(cfg, t, eps_max + tol)?;
    if !(r_lo >= 0.0 && r_hi < 0.0) {
        return Err(Error::Bisection {
            t,
            lo: (eps_max - tol).max(0.0),
            hi: eps_max + tol,
            r_lo,
            r_hi,
            msg: "non-monotone sign pattern around the bisected threshold".into(),
        });
    }
    Ok(ThresholdPoint {
        t,
        eps_max,
        rate_at_zero_eps: rate_at_zero,
    })
}

/// Threshold curve over the configured t grid (parallel over t, output
/// order fixed by the grid).
pub fn run_threshold_scan(cfg: &ScanConfig) -> Result<Vec<ThresholdPoint>> {
    let ScanMode::ThresholdCurve { t, eps_hi, eps_tol } = &cfg.mode else {
        return Err(Error::Domain("config mode is not threshold_curve".into()));
    };
    t.values()
        .par_iter()
        .map(|&tv| threshold_at(cfg, tv, *eps_hi, *eps_tol))
        .collect()
}

/// Dense rate table, t-major then eps (parallel, deterministic order).
pub fn run_grid(cfg: &ScanConfig) -> Result<Vec<(f64, f64, f64)>> {
    let ScanMode::Grid { t, eps } = &cfg.mode else {
        return Err(Error::Domain("config mode is not grid".into()));
    };
    let ts = t.values();
    let epss = eps.values();
    let points: Vec<(f64, f64)> = ts
        .iter()
        .flat_map(|&tv| epss.iter().map(move |&ev| (tv, ev)))
        .collect();
    points
        .par_iter()
        .map(|&(tv, ev)| evaluate_rate(cfg, tv, ev).map(|r| (tv, ev, r)))
        .collect()
}

/// Single-point evaluation.
pub fn run_point(cfg: &ScanConfig) -> Result<(f64, f64, f64)> {
    let ScanMode::SinglePoint { t, eps } = cfg.mode else {
        return Err(Error::Domain("config mode is not single_point".into()));
    };
    evaluate_rate(cfg, t, eps).map(|r| (t, eps, r))
}

/// 12-significant-digit decimal formatting, locale-free.
pub fn fmt_sig(x: f64) -> String {
    format!("{x:.11e}")
}

/// CSV for a threshold curve: `t,eps_max,rate_at_zero_eps`, LF newlines.
pub fn threshold_csv(points: &[ThresholdPoint]) -> String {
    let mut out = String::from("t,eps_max,rate_at_zero_eps\n");
    for p in points {
        out.push_str(&format!(
            "{},{},{}\n",
            fmt_sig(p.t),
            fmt_sig(p.eps_max),
            fmt_sig(p.rate_at_zero_eps)
        ));
    }
    out
}

/// CSV for grid/point results: `t,eps,rate`, LF newlines.
pub fn rate_csv(rows: &[(f64, f64, f64)]) -> String {
    let mut out = String::from("t,eps,rate\n");
    for (t, e, r) in rows {
        out.push_str(&format!("{},{},{}\n", fmt_sig(*t), fmt_sig(*e), fmt_sig(*r)));
    }
    out
}
