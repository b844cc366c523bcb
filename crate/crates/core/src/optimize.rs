//! Depth optimization of the single-rf ring at fixed trap height.
//!
//! The height constraint fixes b for every a, leaving a one-dimensional
//! maximization of D/D_4rod over a. Everything is evaluated in units of the
//! target height, so results are scale-free.

use serde::{Deserialize, Serialize};
use std::f64::consts::SQRT_2;

use crate::characterize::{geometric_factor, trap_height, turning_point};
use crate::error::{Error, Result};
use crate::field::axial_slope;
use crate::solve::{brent_root, golden_section_max};
use crate::trap::RingGeometry;

/// Bracket width on a/z₀ at which the search stops.
pub const A_TOLERANCE: f64 = 1e-10;
pub const MAX_ITERATIONS: usize = 200;

/// Optimal ring dimensions and figures of merit, all relative to z₀.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub a_over_z0: f64,
    pub b_over_z0: f64,
    pub zmax_over_z0: f64,
    pub q_over_q4rod: f64,
    pub d_over_d4rod: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Target height the result was requested for (m).
    #[serde(rename = "z0_target_m")]
    pub z0_target: f64,
}

impl OptimizationResult {
    /// The optimal geometry at the requested height.
    pub fn geometry(&self) -> Result<RingGeometry> {
        RingGeometry::new(self.a_over_z0 * self.z0_target, self.b_over_z0 * self.z0_target)
    }

    /// |z₀(a, b)/z₀_target − 1| for the reported geometry.
    pub fn constraint_residual(&self) -> Result<f64> {
        Ok((trap_height(&self.geometry()?, 0.0)? / self.z0_target - 1.0).abs())
    }
}

fn check_target(z0: f64) -> Result<()> {
    if z0 > 0.0 && z0.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid("z0_target", format!("{z0} must be finite and > 0")))
    }
}

/// Outer radius b that places the node at `z0_target` for inner radius `a`.
///
/// z₀(a, b) increases monotonically in b from a/√2 (as b → a) without bound,
/// so a solution exists exactly when a < √2·z0_target.
pub fn height_constrained_b(a: f64, z0_target: f64) -> Result<f64> {
    check_target(z0_target)?;
    if !(a > 0.0 && a < SQRT_2 * z0_target) {
        return Err(Error::NoSolution(format!(
            "inner radius {a} m admits no ring with node height {z0_target} m (need 0 < a < {} m)",
            SQRT_2 * z0_target
        )));
    }
    let height = |b: f64| -> f64 {
        let (a23, b23) = (a.powf(2.0 / 3.0), b.powf(2.0 / 3.0));
        (b23 * b23 * a23 * a23 / (b23 + a23)).sqrt()
    };
    let mut hi = 2.0 * a;
    while height(hi) < z0_target {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::NoSolution("bracket expansion overflowed".into()));
        }
    }
    let b = brent_root(|b| height(b) - z0_target, a, hi, 1e-15 * hi, 300)?;
    if b <= a {
        return Err(Error::NoSolution(format!("inner radius {a} m is at the feasibility limit")));
    }
    Ok(b)
}

/// D/D_4rod of the ring with inner radius `a_over_z0` at unit height.
pub fn depth_ratio(a_over_z0: f64) -> Result<f64> {
    let b = height_constrained_b(a_over_z0, 1.0)?;
    let geom = RingGeometry::new(a_over_z0, b)?;
    let zmax = turning_point(&geom, 0.0)?;
    Ok(axial_slope(&geom, 0.0, zmax).powi(2))
}

/// Maximizes D/D_4rod over a/z₀ in the full feasible range.
pub fn optimize_depth_at_height(z0_target: f64) -> Result<OptimizationResult> {
    optimize_depth_in_bracket(z0_target, 1e-3, SQRT_2 * (1.0 - 1e-9))
}

/// Maximizes D/D_4rod with a/z₀ restricted to [lo, hi].
pub fn optimize_depth_in_bracket(z0_target: f64, lo: f64, hi: f64) -> Result<OptimizationResult> {
    check_target(z0_target)?;
    if !(lo > 0.0 && hi > lo && hi < SQRT_2) {
        return Err(Error::invalid("bracket", format!("[{lo}, {hi}] must lie inside (0, √2)")));
    }
    let g = golden_section_max(|a| depth_ratio(a).unwrap_or(f64::NEG_INFINITY), lo, hi, A_TOLERANCE, MAX_ITERATIONS);
    if !g.converged {
        log::warn!("depth optimization stopped after {} iterations", g.iterations);
    }
    let b = height_constrained_b(g.x, 1.0)?;
    let geom = RingGeometry::new(g.x, b)?;
    Ok(OptimizationResult {
        a_over_z0: g.x,
        b_over_z0: b,
        zmax_over_z0: turning_point(&geom, 0.0)?,
        q_over_q4rod: geometric_factor(&geom),
        d_over_d4rod: g.value,
        converged: g.converged,
        iterations: g.iterations,
        z0_target,
    })
}
