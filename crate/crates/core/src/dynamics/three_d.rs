use std::cell::RefCell;

use super::{check_step, rk4_step, Trajectory, TrajectoryPoint};
use crate::characterize::{trap_height, turning_point};
use crate::error::{Error, Result};
use crate::field::InterpolatedField;
use crate::trap::TrapConfig;

/// Interpolated ∇κ over a (ρ, z) region, shared by 3D trajectories.
#[derive(Debug, Clone)]
pub struct ThreeDField {
    field: InterpolatedField,
}

impl ThreeDField {
    pub fn build(config: &TrapConfig, rho_max: f64, z_range: (f64, f64), n_rho: usize, n_z: usize) -> Result<Self> {
        Ok(ThreeDField {
            field: InterpolatedField::build(config, rho_max, z_range, n_rho, n_z)?,
        })
    }

    /// 400 × 400 map over ρ ∈ [0, 2z₀], z ∈ [0.2z₀, 3z₀].
    pub fn default_for(config: &TrapConfig) -> Result<Self> {
        let z0 = trap_height(&config.geometry, config.drive.epsilon)?;
        Self::build(config, 2.0 * z0, (0.2 * z0, 3.0 * z0), 400, 400)
    }

    pub fn from_interpolated(field: InterpolatedField) -> Self {
        ThreeDField { field }
    }

    pub fn interpolated(&self) -> &InterpolatedField {
        &self.field
    }

    /// Cartesian ∇κ at (x, y, z).
    pub fn gradient(&self, p: &[f64; 3]) -> Result<[f64; 3]> {
        let rho = p[0].hypot(p[1]);
        let (gz, gr) = self.field.gradient(rho, p[2])?;
        if rho == 0.0 {
            return Ok([0.0, 0.0, gz]);
        }
        Ok([gr * p[0] / rho, gr * p[1] / rho, gz])
    }
}

/// Integrates r̈ = −(Q/M) V cos(Ωt) ∇κ in three dimensions.
pub fn integrate_3d(
    config: &TrapConfig,
    field: &ThreeDField,
    position: [f64; 3],
    velocity: [f64; 3],
    duration: f64,
    dt: f64,
) -> Result<Trajectory> {
    let steps = check_step(config, dt, duration)?;
    let z_limit = 10.0 * turning_point(&config.geometry, config.drive.epsilon)?;
    field.gradient(&position)?;
    let qm = config.species.charge / config.species.mass;
    let (v_rf, omega) = (config.drive.v_rf, config.drive.omega_rf);
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let f = |t: f64, y: &[f64; 6]| -> [f64; 6] {
        let g = match field.gradient(&[y[0], y[1], y[2]]) {
            Ok(g) => g,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                [0.0; 3]
            }
        };
        let k = -qm * v_rf * (omega * t).cos();
        [y[3], y[4], y[5], k * g[0], k * g[1], k * g[2]]
    };
    let mut y = [position[0], position[1], position[2], velocity[0], velocity[1], velocity[2]];
    let mut points = Vec::with_capacity(steps + 1);
    let point = |t: f64, y: &[f64; 6]| TrajectoryPoint {
        t,
        position: [y[0], y[1], y[2]],
        velocity: [y[3], y[4], y[5]],
    };
    points.push(point(0.0, &y));
    for i in 0..steps {
        let t = i as f64 * dt;
        y = rk4_step(&f, t, &y, dt);
        let t = t + dt;
        if !(y[2] > 0.0 && y[2] < z_limit) || y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Escaped {
                t,
                rho: y[0].hypot(y[1]),
                z: y[2],
            });
        }
        if let Some(e) = failure.borrow_mut().take() {
            return Err(e);
        }
        points.push(point(t, &y));
    }
    Ok(Trajectory { points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characterize::secular_frequencies;
    use crate::dynamics::default_step;
    use crate::spectrum::dominant_peak;
    use crate::trap::{IonSpecies, RfDrive, RingGeometry};
    use std::f64::consts::PI;

    fn reference_trap() -> TrapConfig {
        TrapConfig::new(
            RingGeometry::new(0.651679e-3, 3.57668e-3).unwrap(),
            RfDrive::from_frequency_hz(300.0, 8e6, 0.0).unwrap(),
            IonSpecies::strontium_88(),
        )
    }

    fn local_field(c: &TrapConfig) -> ThreeDField {
        ThreeDField::build(c, 0.4e-3, (0.6e-3, 1.4e-3), 21, 41).unwrap()
    }

    #[test]
    fn node_is_equilibrium() {
        let c = reference_trap();
        let f = local_field(&c);
        let z0 = trap_height(&c.geometry, 0.0).unwrap();
        let tr = integrate_3d(&c, &f, [0.0, 0.0, z0], [0.0; 3], 200.0 * c.drive.period(), default_step(&c)).unwrap();
        let worst = tr.points.iter().map(|p| (p.z() - z0).abs().max(p.rho())).fold(0.0, f64::max);
        assert!(worst < 1e-4 * z0, "{worst}");
    }

    #[test]
    fn radial_to_axial_ratio_and_meridian_plane() {
        let c = reference_trap();
        let f = local_field(&c);
        let z0 = trap_height(&c.geometry, 0.0).unwrap();
        let wz = secular_frequencies(&c).unwrap().omega_z;
        let dt = default_step(&c);
        let duration = 20.0 * 2.0 * PI / (0.5 * wz);
        let tr = integrate_3d(&c, &f, [10e-6, 0.0, z0 + 10e-6], [0.0; 3], duration, dt).unwrap();
        assert!(tr.points.iter().all(|p| p.position[1] == 0.0));
        let x = tr.component(0);
        let z = tr.component(2);
        let band = (0.1 * wz, 0.5 * c.drive.omega_rf);
        let wr = dominant_peak(&x, dt, band.0, band.1).unwrap().frequency;
        let wa = dominant_peak(&z, dt, band.0, band.1).unwrap().frequency;
        assert!((wr / wa - 0.5).abs() < 0.01, "{}", wr / wa);
    }

    #[test]
    fn leaving_the_map_is_reported() {
        let c = reference_trap();
        let f = local_field(&c);
        let r = integrate_3d(&c, &f, [0.0, 0.0, 0.5e-3], [0.0; 3], c.drive.period(), default_step(&c));
        assert!(matches!(r, Err(Error::OutOfExtent { .. })));
        let r = integrate_3d(&c, &f, [0.0, 0.0, 1e-3], [0.0, 0.0, 2000.0], 50.0 * c.drive.period(), default_step(&c));
        assert!(matches!(r, Err(Error::OutOfExtent { .. })));
    }
}
