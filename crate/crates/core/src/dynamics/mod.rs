//! Time-domain ion motion in the oscillating trap field.
//!
//! All integrators are fixed-step classical Runge–Kutta. The axial
//! integrator uses the closed-form on-axis field; the 3D integrator uses an
//! interpolated field map.

mod axial;
mod mathieu;
mod three_d;

pub use axial::{integrate_axial, micromotion_with_dc, AxialIntegrator, MicromotionResult};
pub use mathieu::{
    growth_rate, mathieu_reference, mathieu_reference_with_step, stability_edge, stability_scan, MathieuTrajectory,
    StabilityPoint,
};
pub use three_d::{integrate_3d, ThreeDField};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trap::TrapConfig;

/// Default steps per rf period.
pub const STEPS_PER_PERIOD: f64 = 100.0;
/// Coarsest step accepted, in steps per rf period.
pub const MIN_STEPS_PER_PERIOD: f64 = 50.0;
/// Default initial displacement from the node, as a fraction of z₀.
pub const DEFAULT_AMPLITUDE_FRACTION: f64 = 0.01;

/// Position and velocity at one instant, Cartesian with z along the trap axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    #[serde(rename = "t_s")]
    pub t: f64,
    #[serde(rename = "position_m")]
    pub position: [f64; 3],
    #[serde(rename = "velocity_mps")]
    pub velocity: [f64; 3],
}

impl TrajectoryPoint {
    pub fn rho(&self) -> f64 {
        self.position[0].hypot(self.position[1])
    }

    pub fn z(&self) -> f64 {
        self.position[2]
    }

    pub fn v_z(&self) -> f64 {
        self.velocity[2]
    }

    /// Radial velocity component; zero on the axis.
    pub fn v_rho(&self) -> f64 {
        let r = self.rho();
        if r == 0.0 {
            0.0
        } else {
            (self.position[0] * self.velocity[0] + self.position[1] * self.velocity[1]) / r
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Trajectory {
    pub points: Vec<TrajectoryPoint>,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.t).collect()
    }

    pub fn component(&self, axis: usize) -> Vec<f64> {
        self.points.iter().map(|p| p.position[axis]).collect()
    }

    pub fn last(&self) -> Option<&TrajectoryPoint> {
        self.points.last()
    }
}

/// One classical RK4 step of y′ = f(t, y).
pub fn rk4_step<const N: usize, F>(f: &F, t: f64, y: &[f64; N], dt: f64) -> [f64; N]
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let axpy = |a: f64, x: &[f64; N], y: &[f64; N]| -> [f64; N] {
        let mut out = *y;
        for i in 0..N {
            out[i] += a * x[i];
        }
        out
    };
    let k1 = f(t, y);
    let k2 = f(t + 0.5 * dt, &axpy(0.5 * dt, &k1, y));
    let k3 = f(t + 0.5 * dt, &axpy(0.5 * dt, &k2, y));
    let k4 = f(t + dt, &axpy(dt, &k3, y));
    let mut out = *y;
    for i in 0..N {
        out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// Default integration step for a configuration: one hundredth of the rf period.
pub fn default_step(config: &TrapConfig) -> f64 {
    config.drive.period() / STEPS_PER_PERIOD
}

pub(crate) fn check_step(config: &TrapConfig, dt: f64, duration: f64) -> Result<usize> {
    let limit = config.drive.period() / MIN_STEPS_PER_PERIOD;
    if !(dt > 0.0) {
        return Err(Error::invalid("dt", "must be positive"));
    }
    if dt > limit {
        return Err(Error::StepTooLarge { dt, limit });
    }
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(Error::invalid("duration", "must be finite and positive"));
    }
    Ok((duration / dt).round().max(1.0) as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rk4_is_fourth_order() {
        // y' = y, y(0) = 1
        let f = |_t: f64, y: &[f64; 1]| [y[0]];
        let err = |n: usize| {
            let dt = 1.0 / n as f64;
            let mut y = [1.0];
            for i in 0..n {
                y = rk4_step(&f, i as f64 * dt, &y, dt);
            }
            (y[0] - 1f64.exp()).abs()
        };
        let ratio = err(20) / err(40);
        assert!((ratio - 16.0).abs() < 1.0, "{ratio}");
    }

    #[test]
    fn radial_helpers() {
        let p = TrajectoryPoint {
            t: 0.0,
            position: [3.0, 4.0, 1.0],
            velocity: [3.0, 4.0, 0.0],
        };
        assert_eq!(p.rho(), 5.0);
        assert!((p.v_rho() - 5.0).abs() < 1e-15);
        let axis = TrajectoryPoint {
            position: [0.0, 0.0, 1.0],
            ..p
        };
        assert_eq!(axis.v_rho(), 0.0);
    }
}
