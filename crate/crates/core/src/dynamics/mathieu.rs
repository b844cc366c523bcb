use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

use super::rk4_step;
use crate::error::{Error, Result};

/// Periods of the drive (π in τ) integrated for a stability verdict.
pub const STABILITY_PERIODS: usize = 200;
/// Growth rate per unit τ above which a solution counts as unbounded.
pub const GROWTH_THRESHOLD: f64 = 1e-4;

const DEFAULT_DTAU: f64 = PI / 100.0;

/// Solution of z̃″ + 2q cos(2τ) z̃ = 0 sampled at uniform τ.
#[derive(Debug, Clone, PartialEq)]
pub struct MathieuTrajectory {
    pub tau: Vec<f64>,
    pub z: Vec<f64>,
    pub dz: Vec<f64>,
}

fn rhs(q: f64) -> impl Fn(f64, &[f64; 2]) -> [f64; 2] {
    move |tau, y| [y[1], -2.0 * q * (2.0 * tau).cos() * y[0]]
}

pub fn mathieu_reference(q: f64, tau_span: f64, init: [f64; 2]) -> Result<MathieuTrajectory> {
    mathieu_reference_with_step(q, tau_span, init, DEFAULT_DTAU)
}

pub fn mathieu_reference_with_step(q: f64, tau_span: f64, init: [f64; 2], dtau: f64) -> Result<MathieuTrajectory> {
    if !q.is_finite() {
        return Err(Error::invalid("q", "must be finite"));
    }
    if !(tau_span > 0.0 && tau_span.is_finite() && dtau > 0.0) {
        return Err(Error::invalid("tau_span", "span and step must be positive"));
    }
    let steps = (tau_span / dtau).round().max(1.0) as usize;
    let f = rhs(q);
    let mut y = init;
    let mut out = MathieuTrajectory {
        tau: Vec::with_capacity(steps + 1),
        z: Vec::with_capacity(steps + 1),
        dz: Vec::with_capacity(steps + 1),
    };
    for i in 0..=steps {
        let tau = i as f64 * dtau;
        out.tau.push(tau);
        out.z.push(y[0]);
        out.dz.push(y[1]);
        y = rk4_step(&f, tau, &y, dtau);
    }
    Ok(out)
}

/// Floquet growth rate per unit τ, measured from the fundamental solutions
/// after [`STABILITY_PERIODS`] drive periods.
pub fn growth_rate(q: f64) -> f64 {
    let f = |tau: f64, y: &[f64; 4]| {
        let k = -2.0 * q * (2.0 * tau).cos();
        [y[1], k * y[0], y[3], k * y[2]]
    };
    let per_period = (PI / DEFAULT_DTAU).round() as usize;
    let mut y = [1.0, 0.0, 0.0, 1.0];
    let mut log_scale = 0.0;
    for p in 0..STABILITY_PERIODS {
        for i in 0..per_period {
            let tau = (p * per_period + i) as f64 * DEFAULT_DTAU;
            y = rk4_step(&f, tau, &y, DEFAULT_DTAU);
        }
        let norm = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if norm > 1e100 {
            y.iter_mut().for_each(|v| *v /= norm);
            log_scale += norm.ln();
        }
    }
    // columns are the two fundamental solutions
    let (tr, det) = (y[0] + y[3], y[0] * y[3] - y[2] * y[1]);
    let disc = 0.25 * tr * tr - det;
    let radius = if disc >= 0.0 {
        0.5 * tr.abs() + disc.sqrt()
    } else {
        det.abs().sqrt()
    };
    (log_scale + radius.ln()) / (STABILITY_PERIODS as f64 * PI)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityPoint {
    pub q: f64,
    pub growth_rate: f64,
    pub stable: bool,
}

fn classify(q: f64) -> StabilityPoint {
    let g = growth_rate(q);
    StabilityPoint {
        q,
        growth_rate: g,
        stable: g < GROWTH_THRESHOLD,
    }
}

/// Stability verdicts at `n` evenly spaced q in [q_min, q_max].
pub fn stability_scan(q_min: f64, q_max: f64, n: usize) -> Result<Vec<StabilityPoint>> {
    if n < 2 {
        return Err(Error::invalid("n", "a scan needs at least two points"));
    }
    if !(q_min.is_finite() && q_max.is_finite() && q_max > q_min) {
        return Err(Error::invalid("q range", "must be finite and increasing"));
    }
    Ok((0..n)
        .into_par_iter()
        .map(|i| classify(q_min + (q_max - q_min) * i as f64 / (n - 1) as f64))
        .collect())
}

/// Bisects the stable/unstable transition inside [lo, hi].
pub fn stability_edge(lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let (mut lo, mut hi) = (lo, hi);
    if !classify(lo).stable || classify(hi).stable {
        return Err(Error::NoSolution(format!("[{lo}, {hi}] does not bracket a stability edge")));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if classify(mid).stable {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
