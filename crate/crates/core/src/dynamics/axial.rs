use serde::Serialize;

use super::{check_step, rk4_step, Trajectory, TrajectoryPoint};
use crate::characterize::{trap_height, turning_point};
use crate::error::{Error, Result};
use crate::field::axial_slope;
use crate::spectrum::{amplitude_at, windowed_mean};
use crate::trap::TrapConfig;

/// On-axis motion z̈ = −(Q/M) V cos(Ωt) ∂κ/∂z plus optional static forces.
#[derive(Debug, Clone, Copy)]
pub struct AxialIntegrator {
    config: TrapConfig,
    e_dc: f64,
    spring: Option<(f64, f64)>,
}

impl AxialIntegrator {
    pub fn new(config: &TrapConfig) -> Self {
        AxialIntegrator {
            config: *config,
            e_dc: 0.0,
            spring: None,
        }
    }

    /// Uniform static field along +z (V/m).
    pub fn with_dc_field(mut self, e_dc: f64) -> Self {
        self.e_dc = e_dc;
        self
    }

    /// Static harmonic test potential ½Mω²(z − center)².
    pub fn with_static_spring(mut self, omega: f64, center: f64) -> Self {
        self.spring = Some((omega, center));
        self
    }

    fn acceleration(&self, t: f64, z: f64) -> f64 {
        let c = &self.config;
        let qm = c.species.charge / c.species.mass;
        let rf = -qm * c.drive.v_rf * (c.drive.omega_rf * t).cos() * axial_slope(&c.geometry, c.drive.epsilon, z);
        let spring = self.spring.map_or(0.0, |(w, zc)| -w * w * (z - zc));
        rf + qm * self.e_dc + spring
    }

    /// Energy per unit mass of the static part of the model (J/kg).
    pub fn static_energy(&self, z: f64, v: f64) -> f64 {
        let qm = self.config.species.charge / self.config.species.mass;
        let spring = self.spring.map_or(0.0, |(w, zc)| 0.5 * w * w * (z - zc).powi(2));
        0.5 * v * v + spring - qm * self.e_dc * z
    }

    pub fn run(&self, z_init: f64, v_init: f64, duration: f64, dt: f64) -> Result<Trajectory> {
        if !(z_init > 0.0) {
            return Err(Error::invalid("z_init", "must be above the electrode plane"));
        }
        let steps = check_step(&self.config, dt, duration)?;
        let z_limit = 10.0 * turning_point(&self.config.geometry, self.config.drive.epsilon)?;
        let f = |t: f64, y: &[f64; 2]| [y[1], self.acceleration(t, y[0])];
        let mut y = [z_init, v_init];
        let mut points = Vec::with_capacity(steps + 1);
        let point = |t: f64, y: &[f64; 2]| TrajectoryPoint {
            t,
            position: [0.0, 0.0, y[0]],
            velocity: [0.0, 0.0, y[1]],
        };
        points.push(point(0.0, &y));
        for i in 0..steps {
            let t = i as f64 * dt;
            y = rk4_step(&f, t, &y, dt);
            let t = t + dt;
            if !(y[0] > 0.0 && y[0] < z_limit) || !y[1].is_finite() {
                return Err(Error::Escaped { t, rho: 0.0, z: y[0] });
            }
            points.push(point(t, &y));
        }
        Ok(Trajectory { points })
    }
}

/// Integrates on-axis motion in the rf field alone.
pub fn integrate_axial(config: &TrapConfig, z_init: f64, v_init: f64, duration: f64, dt: f64) -> Result<Trajectory> {
    AxialIntegrator::new(config).run(z_init, v_init, duration, dt)
}

/// Excess micromotion caused by a uniform dc field along the axis.
#[derive(Debug, Clone, Serialize)]
pub struct MicromotionResult {
    #[serde(skip)]
    pub trajectory: Trajectory,
    /// Mean displacement of the ion from the rf node (m).
    #[serde(rename = "displacement_m")]
    pub displacement: f64,
    /// Amplitude of the motion at the rf frequency (m).
    #[serde(rename = "driven_amplitude_m")]
    pub driven_amplitude: f64,
}

/// Starts the ion at rest on the node with a dc field applied and measures
/// its mean offset and the resulting motion at Ω.
pub fn micromotion_with_dc(config: &TrapConfig, e_dc: f64, duration: f64, dt: f64) -> Result<MicromotionResult> {
    let z0 = trap_height(&config.geometry, config.drive.epsilon)?;
    let trajectory = AxialIntegrator::new(config).with_dc_field(e_dc).run(z0, 0.0, duration, dt)?;
    let z = trajectory.component(2);
    Ok(MicromotionResult {
        displacement: windowed_mean(&z) - z0,
        driven_amplitude: amplitude_at(&z, dt, config.drive.omega_rf),
        trajectory,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characterize::{mathieu_q, secular_frequencies};
    use crate::dynamics::default_step;
    use crate::field::pseudopotential_axial;
    use crate::solve::brent_root;
    use crate::spectrum::dominant_peak;
    use crate::trap::{IonSpecies, RfDrive, RingGeometry};

    fn reference_trap() -> TrapConfig {
        TrapConfig::new(
            RingGeometry::new(0.651679e-3, 3.57668e-3).unwrap(),
            RfDrive::from_frequency_hz(300.0, 8e6, 0.0).unwrap(),
            IonSpecies::strontium_88(),
        )
    }

    #[test]
    fn no_force_without_drive() {
        let c = reference_trap().with_v_rf(0.0);
        let tr = integrate_axial(&c, 1.2e-3, 0.0, 100.0 * c.drive.period(), default_step(&c)).unwrap();
        assert!(tr.points.iter().all(|p| p.z() == 1.2e-3));
    }

    #[test]
    fn step_and_escape_errors() {
        let c = reference_trap();
        let t = c.drive.period();
        assert!(matches!(integrate_axial(&c, 1e-3, 0.0, t, t / 40.0), Err(Error::StepTooLarge { .. })));
        assert!(integrate_axial(&c, -1e-3, 0.0, t, t / 100.0).is_err());
        // launched downward fast enough to hit the surface
        let r = integrate_axial(&c, 1e-3, -1e4, 100.0 * t, t / 100.0);
        assert!(matches!(r, Err(Error::Escaped { .. })));
    }

    #[test]
    fn secular_frequency_and_sidebands() {
        let c = reference_trap();
        let z0 = trap_height(&c.geometry, 0.0).unwrap();
        let wz = secular_frequencies(&c).unwrap().omega_z;
        let dt = default_step(&c);
        let duration = 40.0 * 2.0 * std::f64::consts::PI / wz;
        let tr = integrate_axial(&c, z0 + 10e-6, 0.0, duration, dt).unwrap();
        let z = tr.component(2);
        let peak = dominant_peak(&z, dt, 0.1 * wz, 0.5 * c.drive.omega_rf).unwrap();
        assert!((peak.frequency / wz - 1.0).abs() < 0.02, "{}", peak.frequency / wz);
        let w_rf = c.drive.omega_rf;
        let sidebands = amplitude_at(&z, dt, w_rf - peak.frequency) + amplitude_at(&z, dt, w_rf + peak.frequency);
        let ratio = sidebands / peak.amplitude;
        let q = mathieu_q(&c).unwrap();
        assert!((ratio / (q / 2.0) - 1.0).abs() < 0.1, "{ratio} vs {}", q / 2.0);
    }

    #[test]
    fn energy_conserved_with_static_spring() {
        let c = reference_trap().with_v_rf(0.0);
        let w = 2.0 * std::f64::consts::PI * 1e6;
        let integ = AxialIntegrator::new(&c).with_static_spring(w, 1e-3);
        let dt = 2.0 * std::f64::consts::PI / w / 1000.0;
        let tr = integ.run(1.05e-3, 0.0, 1e4 * dt, dt).unwrap();
        assert_eq!(tr.points.len(), 10_001);
        let e0 = integ.static_energy(tr.points[0].z(), tr.points[0].v_z());
        let worst = tr
            .points
            .iter()
            .map(|p| (integ.static_energy(p.z(), p.v_z()) / e0 - 1.0).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-8, "{worst}");
    }

    #[test]
    fn pseudopotential_predicts_turning_points() {
        let c = reference_trap();
        let z0 = trap_height(&c.geometry, 0.0).unwrap();
        let dt = default_step(&c);
        let wz = secular_frequencies(&c).unwrap().omega_z;
        let tr = integrate_axial(&c, z0 + 0.3e-3, 0.0, 6.0 * 2.0 * std::f64::consts::PI / wz, dt).unwrap();
        // average over one rf period to strip the micromotion
        let z = tr.component(2);
        let n = crate::dynamics::STEPS_PER_PERIOD as usize;
        let avg: Vec<f64> = z.windows(n).map(|w| w.iter().sum::<f64>() / n as f64).collect();
        let upper = avg.iter().cloned().fold(f64::MIN, f64::max);
        let lower = avg.iter().cloned().fold(f64::MAX, f64::min);
        let level = pseudopotential_axial(&c, upper);
        let predicted = brent_root(|z| pseudopotential_axial(&c, z) - level, 0.2 * z0, z0, 1e-12, 200).unwrap();
        let (got, want) = (z0 - lower, z0 - predicted);
        assert!((got / want - 1.0).abs() < 0.05, "{got} vs {want}");
        // anharmonic: the orbit is not symmetric about the node
        assert!(((upper - z0) / want - 1.0).abs() > 0.05);
    }

    #[test]
    fn dc_displacement_and_linear_micromotion() {
        let c = reference_trap();
        let w = secular_frequencies(&c).unwrap().omega_z;
        let dt = default_step(&c);
        let duration = 30.0 * 2.0 * std::f64::consts::PI / w;
        let zero = micromotion_with_dc(&c, 0.0, duration, dt).unwrap();
        assert!(zero.driven_amplitude < 1e-15);
        let q = mathieu_q(&c).unwrap();
        let mut amps = Vec::new();
        for e in [5.0, 10.0, 20.0] {
            let r = micromotion_with_dc(&c, e, duration, dt).unwrap();
            let expected = c.species.charge * e / (c.species.mass * w * w);
            assert!((r.displacement / expected - 1.0).abs() < 0.05, "{} vs {expected}", r.displacement);
            assert!((r.driven_amplitude / (0.5 * q * r.displacement) - 1.0).abs() < 0.1);
            amps.push(r.driven_amplitude / e);
        }
        assert!((amps[2] / amps[0] - 1.0).abs() < 0.02);
    }
}
