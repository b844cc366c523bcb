//! Closed-form trap metrics for single- and dual-rf drive.
//!
//! The on-axis field of the ring has a node at z₀ and a pseudopotential
//! maximum (turning point) at z_max. With the centre electrode driven at ε
//! both move; for ε = 0 the single-rf expressions are used directly so the
//! dual-rf quantities reduce to them exactly.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::SQRT_2;

use crate::error::{Error, Result};
use crate::field::{axial_slope, FieldSolver};
use crate::solve::{brent_root, fit_quadratic};
use crate::trap::{RingGeometry, TrapConfig};

/// Half-width of the quadratic-fit window in units of the trap height.
pub const FIT_HALF_WIDTH: f64 = 0.05;
/// Samples across the fit window.
pub const FIT_POINTS: usize = 11;
/// Mathieu q above which the pseudopotential picture is flagged as unreliable.
pub const Q_WARNING_THRESHOLD: f64 = 0.3;

/// Height of the rf node above the electrode plane (m).
pub fn trap_height(geom: &RingGeometry, epsilon: f64) -> Result<f64> {
    geom.check_epsilon(epsilon)?;
    let (a, b) = (geom.a(), geom.b());
    let z0 = if epsilon == 0.0 {
        let (a23, b23) = (a.powf(2.0 / 3.0), b.powf(2.0 / 3.0));
        (b23 * b23 * a23 * a23 / (b23 + a23)).sqrt()
    } else {
        let r = (1.0 - epsilon).powf(2.0 / 3.0);
        let (a43, b43) = (a.powf(4.0 / 3.0), b.powf(4.0 / 3.0));
        ((b * b * a43 * r - a * a * b43) / (b43 - a43 * r)).sqrt()
    };
    debug_assert!(axial_slope(geom, epsilon, z0).abs() <= 1e-9 * (1.0 / a));
    Ok(z0)
}

/// Turning point of the on-axis pseudopotential above the node (m).
pub fn turning_point(geom: &RingGeometry, epsilon: f64) -> Result<f64> {
    geom.check_epsilon(epsilon)?;
    let (a, b) = (geom.a(), geom.b());
    let zmax = if epsilon == 0.0 {
        ((b.powf(1.2) - a.powf(1.2)) / (a.powf(-0.8) - b.powf(-0.8))).sqrt()
    } else {
        let r = (1.0 - epsilon).powf(0.4);
        let (a45, b45) = (a.powf(0.8), b.powf(0.8));
        ((b * b * a45 * r - a * a * b45) / (b45 - a45 * r)).sqrt()
    };
    Ok(zmax)
}

/// Geometric factor f(a, b) of the single-rf trap (m⁻²); equals −∂²κ/∂z² at z₀.
pub fn geometric_factor(geom: &RingGeometry) -> f64 {
    let (a23, b23) = (geom.a().powf(2.0 / 3.0), geom.b().powf(2.0 / 3.0));
    let (a43, b43) = (a23 * a23, b23 * b23);
    (9.0 * (b23 - a23).powi(2) * (b23 + a23).powi(6) / (b43 * a43 * (b43 + b23 * a23 + a43).powi(5))).sqrt()
}

/// Field curvature −∂²κ/∂z² at the node for drive ratio ε (m⁻²).
pub fn field_curvature(geom: &RingGeometry, epsilon: f64) -> Result<f64> {
    if epsilon == 0.0 {
        geom.check_epsilon(0.0)?;
        return Ok(geometric_factor(geom));
    }
    let z = trap_height(geom, epsilon)?;
    let (a2, b2, z2) = (geom.a().powi(2), geom.b().powi(2), z * z);
    Ok(3.0 * a2 * z * (1.0 - epsilon) / (a2 + z2).powf(2.5) - 3.0 * b2 * z / (b2 + z2).powf(2.5))
}

/// Mathieu q of the axial motion.
pub fn mathieu_q(config: &TrapConfig) -> Result<f64> {
    Ok(config.q_prefactor() * field_curvature(&config.geometry, config.drive.epsilon)?)
}

/// Axial and radial secular angular frequencies (rad/s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecularFrequencies {
    #[serde(rename = "omega_z_rad_per_s")]
    pub omega_z: f64,
    #[serde(rename = "omega_rho_rad_per_s")]
    pub omega_rho: f64,
}

impl SecularFrequencies {
    pub fn ratio(&self) -> f64 {
        self.omega_rho / self.omega_z
    }
}

fn fit_offsets(half_width: f64) -> Vec<f64> {
    (0..FIT_POINTS)
        .map(|j| -half_width + 2.0 * half_width * j as f64 / (FIT_POINTS - 1) as f64)
        .collect()
}

fn frequency_from_fit(xs: &[f64], psi: &[f64], mass: f64, axis: &str) -> Result<f64> {
    let (c, _) = fit_quadratic(xs, psi).ok_or_else(|| Error::FitFailure(format!("{axis} fit is singular")))?;
    if !(c[2] > 0.0) {
        return Err(Error::FitFailure(format!(
            "{axis} pseudopotential samples are not convex (curvature {:e})",
            c[2]
        )));
    }
    Ok((2.0 * c[2] / mass).sqrt())
}

/// Radial secular frequency from a quadratic fit of the numerically
/// integrated Ψ(ρ) in the node plane.
pub fn radial_frequency_fit(config: &TrapConfig) -> Result<f64> {
    let z0 = trap_height(&config.geometry, config.drive.epsilon)?;
    let solver = FieldSolver::for_trap(config)?;
    let c = config.pseudopotential_prefactor();
    let xs = fit_offsets(FIT_HALF_WIDTH * z0);
    // Ψ is even in ρ
    let psi = xs
        .iter()
        .map(|x| Ok(c * solver.sample(z0, x.abs())?.gradient_squared()))
        .collect::<Result<Vec<_>>>()?;
    frequency_from_fit(&xs, &psi, config.species.mass, "radial")
}

/// Axial secular frequency from a quadratic fit of the numerically
/// integrated Ψ(z) on the axis.
pub fn axial_frequency_fit(config: &TrapConfig) -> Result<f64> {
    let z0 = trap_height(&config.geometry, config.drive.epsilon)?;
    let solver = FieldSolver::for_trap(config)?;
    let c = config.pseudopotential_prefactor();
    let xs = fit_offsets(FIT_HALF_WIDTH * z0);
    let psi = xs
        .iter()
        .map(|x| Ok(c * solver.sample(z0 + x, 0.0)?.gradient_squared()))
        .collect::<Result<Vec<_>>>()?;
    frequency_from_fit(&xs, &psi, config.species.mass, "axial")
}

/// ω_z from the Mathieu q, ω_ρ from the radial fit.
pub fn secular_frequencies(config: &TrapConfig) -> Result<SecularFrequencies> {
    let q = mathieu_q(config)?;
    if q.abs() > Q_WARNING_THRESHOLD {
        log::warn!("|q| = {:.3} exceeds {Q_WARNING_THRESHOLD}; pseudopotential results are approximate", q.abs());
    }
    Ok(SecularFrequencies {
        omega_z: q.abs() * config.drive.omega_rf / (2.0 * SQRT_2),
        omega_rho: radial_frequency_fit(config)?,
    })
}

/// Both frequencies from quadratic fits to the numerically integrated Ψ.
pub fn fitted_secular_frequencies(config: &TrapConfig) -> Result<SecularFrequencies> {
    Ok(SecularFrequencies {
        omega_z: axial_frequency_fit(config)?,
        omega_rho: radial_frequency_fit(config)?,
    })
}

/// Which side of the node limits the trap depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Barrier {
    /// Ψ maximum above the node, at the turning point.
    Upper,
    /// Ψ maximum between the electrode plane and the node.
    Lower,
}

/// Pseudopotential barriers on either side of the node, measured from Ψ(z₀) (J).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepthBarriers {
    pub upper: f64,
    pub lower: f64,
}

impl DepthBarriers {
    pub fn depth(&self) -> f64 {
        self.upper.min(self.lower)
    }

    pub fn limiting(&self) -> Barrier {
        if self.upper <= self.lower {
            Barrier::Upper
        } else {
            Barrier::Lower
        }
    }
}

fn barrier_slopes(geom: &RingGeometry, epsilon: f64) -> Result<(f64, f64, f64)> {
    let z0 = trap_height(geom, epsilon)?;
    let zmax = turning_point(geom, epsilon)?;
    let at = |z| axial_slope(geom, epsilon, z).powi(2);
    // ∂κ/∂z decreases monotonically on [0, z_max], so the largest on-axis Ψ
    // below the node is its value at the surface.
    Ok((at(zmax), at(0.0), at(z0)))
}

pub fn depth_barriers(config: &TrapConfig) -> Result<DepthBarriers> {
    let c = config.pseudopotential_prefactor();
    let (up, low, node) = barrier_slopes(&config.geometry, config.drive.epsilon)?;
    Ok(DepthBarriers {
        upper: c * (up - node),
        lower: c * (low - node),
    })
}

/// Trap depth: the lower of the two barriers (J).
pub fn trap_depth(config: &TrapConfig) -> Result<f64> {
    Ok(depth_barriers(config)?.depth())
}

/// q and depth of a four-rod trap with ion–electrode distance z₀.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourRodReferences {
    pub q_4rod: f64,
    #[serde(rename = "d_4rod_j")]
    pub d_4rod: f64,
}

pub fn four_rod_references(config: &TrapConfig) -> Result<FourRodReferences> {
    let z0 = trap_height(&config.geometry, config.drive.epsilon)?;
    Ok(FourRodReferences {
        q_4rod: config.q_prefactor() / (z0 * z0),
        d_4rod: config.pseudopotential_prefactor() / (z0 * z0),
    })
}

/// Full set of derived metrics for one configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrapCharacteristics {
    #[serde(rename = "z0_m")]
    pub z0: f64,
    #[serde(rename = "z_max_m")]
    pub z_max: f64,
    #[serde(rename = "f_geometric_per_m2")]
    pub f_geometric: f64,
    pub q: f64,
    #[serde(rename = "omega_z_rad_per_s")]
    pub omega_z: f64,
    #[serde(rename = "omega_rho_rad_per_s")]
    pub omega_rho: f64,
    #[serde(rename = "depth_j")]
    pub depth: f64,
    pub q_4rod: f64,
    #[serde(rename = "d_4rod_j")]
    pub d_4rod: f64,
    pub epsilon_used: f64,
    pub q_exceeds_warning_threshold: bool,
}

pub fn characterize(config: &TrapConfig) -> Result<TrapCharacteristics> {
    let eps = config.drive.epsilon;
    let z0 = trap_height(&config.geometry, eps)?;
    let z_max = turning_point(&config.geometry, eps)?;
    let f_geometric = field_curvature(&config.geometry, eps)?;
    let q = mathieu_q(config)?;
    let freqs = secular_frequencies(config)?;
    let refs = four_rod_references(config)?;
    Ok(TrapCharacteristics {
        z0,
        z_max,
        f_geometric,
        q,
        omega_z: freqs.omega_z,
        omega_rho: freqs.omega_rho,
        depth: trap_depth(config)?,
        q_4rod: refs.q_4rod,
        d_4rod: refs.d_4rod,
        epsilon_used: eps,
        q_exceeds_warning_threshold: q.abs() > Q_WARNING_THRESHOLD,
    })
}

/// One row of an ε sweep. Quantities are `None` where no trap exists.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub epsilon: f64,
    #[serde(rename = "z0_prime_m")]
    pub z0_prime: Option<f64>,
    pub q_prime: Option<f64>,
    #[serde(rename = "depth_prime_j")]
    pub depth_prime: Option<f64>,
    #[serde(rename = "upper_barrier_j")]
    pub upper_barrier: Option<f64>,
    #[serde(rename = "lower_barrier_j")]
    pub lower_barrier: Option<f64>,
    pub limiting: Option<Barrier>,
    pub valid: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonSweep {
    pub rows: Vec<SweepRow>,
}

impl EpsilonSweep {
    /// ε at which the limiting barrier first switches from the upper to the
    /// lower side, interpolated linearly between rows.
    pub fn cusp(&self) -> Option<f64> {
        self.rows.windows(2).find_map(|w| match (w[0].limiting, w[1].limiting) {
            (Some(Barrier::Upper), Some(Barrier::Lower)) => {
                let d0 = w[0].upper_barrier? - w[0].lower_barrier?;
                let d1 = w[1].upper_barrier? - w[1].lower_barrier?;
                let t = d0 / (d0 - d1);
                Some(w[0].epsilon + t * (w[1].epsilon - w[0].epsilon))
            }
            _ => None,
        })
    }
}

/// Tabulates z′₀, q′ and D′ over `n` evenly spaced ε in [eps_min, eps_max].
/// The `epsilon` of `config.drive` is ignored.
pub fn epsilon_sweep(config: &TrapConfig, eps_min: f64, eps_max: f64, n: usize) -> Result<EpsilonSweep> {
    if n < 2 {
        return Err(Error::invalid("n", "a sweep needs at least two points"));
    }
    if !(eps_min < eps_max) || !eps_min.is_finite() || !eps_max.is_finite() {
        return Err(Error::invalid("epsilon range", format!("[{eps_min}, {eps_max}] must be finite and increasing")));
    }
    let rows = (0..n)
        .into_par_iter()
        .map(|i| {
            let eps = if i + 1 == n {
                eps_max
            } else {
                eps_min + (eps_max - eps_min) * i as f64 / (n - 1) as f64
            };
            let cfg = config.with_epsilon(eps);
            match (trap_height(&cfg.geometry, eps), depth_barriers(&cfg), mathieu_q(&cfg)) {
                (Ok(z0), Ok(bar), Ok(q)) => SweepRow {
                    epsilon: eps,
                    z0_prime: Some(z0),
                    q_prime: Some(q),
                    depth_prime: Some(bar.depth()),
                    upper_barrier: Some(bar.upper),
                    lower_barrier: Some(bar.lower),
                    limiting: Some(bar.limiting()),
                    valid: true,
                },
                _ => SweepRow {
                    epsilon: eps,
                    z0_prime: None,
                    q_prime: None,
                    depth_prime: None,
                    upper_barrier: None,
                    lower_barrier: None,
                    limiting: None,
                    valid: false,
                },
            }
        })
        .collect();
    Ok(EpsilonSweep { rows })
}

/// Exact ε in (0, ε_crit) where the two depth barriers are equal.
pub fn depth_cusp(geom: &RingGeometry) -> Result<f64> {
    let diff = |eps: f64| -> f64 {
        let (up, low, _) = barrier_slopes(geom, eps).expect("inside the trap window");
        up - low
    };
    let hi = geom.epsilon_crit() * (1.0 - 1e-12);
    brent_root(diff, 0.0, hi, 1e-14, 200)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::JOULES_PER_EV;
    use crate::trap::{IonSpecies, RfDrive};
    use std::f64::consts::PI;

    fn table() -> RingGeometry {
        RingGeometry::new(0.651679, 3.57668).unwrap()
    }

    fn reference_trap() -> TrapConfig {
        TrapConfig::new(
            table().scaled(1e-3),
            RfDrive::from_frequency_hz(300.0, 8e6, 0.0).unwrap(),
            IonSpecies::strontium_88(),
        )
    }

    #[test]
    fn heights_match_reference_geometries() {
        let z0 = trap_height(&table(), 0.0).unwrap();
        assert!((z0 - 1.0).abs() < 1e-6);
        let lab = RingGeometry::new(650e-6, 3.24e-3).unwrap();
        let z = trap_height(&lab, 0.0).unwrap();
        assert!((z - 960e-6).abs() < 2e-6, "{z}");
        let z = trap_height(&lab, 0.52).unwrap();
        assert!((z - 600e-6).abs() < 15e-6, "{z}");
        assert!(matches!(trap_height(&lab, 0.9), Err(Error::NoTrap { .. })));
    }

    #[test]
    fn turning_point_table_value() {
        let zmax = turning_point(&table(), 0.0).unwrap();
        let z0 = trap_height(&table(), 0.0).unwrap();
        assert!((zmax / z0 - 1.957965).abs() < 1e-5);
    }

    #[test]
    fn dual_forms_reduce_at_zero() {
        // ε = 0 dispatches to the single-rf forms; the general forms must agree
        let g = table();
        let tiny = 1e-13;
        assert!((trap_height(&g, tiny).unwrap() - trap_height(&g, 0.0).unwrap()).abs() < 1e-10);
        assert!((turning_point(&g, tiny).unwrap() - turning_point(&g, 0.0).unwrap()).abs() < 1e-10);
        assert!((field_curvature(&g, tiny).unwrap() - geometric_factor(&g)).abs() < 1e-10);
    }

    #[test]
    fn geometric_factor_is_curvature_at_node() {
        let g = table();
        let z0 = trap_height(&g, 0.0).unwrap();
        let h = 1e-3;
        let k = |z: f64| crate::field::kappa_axial(&g, 0.0, z).unwrap();
        let fd = (-k(z0 + 2.0 * h) + 16.0 * k(z0 + h) - 30.0 * k(z0) + 16.0 * k(z0 - h) - k(z0 - 2.0 * h)) / (12.0 * h * h);
        let f = geometric_factor(&g);
        assert!(((-fd) - f).abs() < 1e-6 * f, "{fd} {f}");
        assert!((f * z0 * z0 - 0.471565).abs() < 1e-5);
        let f2 = geometric_factor(&g.scaled(2.0));
        assert!((f2 - f / 4.0).abs() < 1e-14 * f);
    }

    #[test]
    fn reference_trap_values() {
        let c = reference_trap();
        let q = mathieu_q(&c).unwrap();
        assert!((q - 0.123).abs() < 0.001, "{q}");
        let w = secular_frequencies(&c).unwrap();
        let fz = w.omega_z / (2.0 * PI);
        assert!((fz - 347e3).abs() < 1.5e3, "{fz}");
        assert!((w.ratio() - 0.50).abs() < 0.01, "{}", w.ratio());
        let d = trap_depth(&c).unwrap() / JOULES_PER_EV;
        assert!((d - 0.19).abs() < 0.01, "{d}");
        let refs = four_rod_references(&c).unwrap();
        assert!((refs.d_4rod / JOULES_PER_EV - 9.8).abs() < 0.1);
        assert!((q / refs.q_4rod - 0.471565).abs() < 1e-5);
        assert!((trap_depth(&c).unwrap() / refs.d_4rod - 0.019703).abs() < 1e-5);
    }

    #[test]
    fn zero_voltage() {
        let c = reference_trap().with_v_rf(0.0);
        assert_eq!(mathieu_q(&c).unwrap(), 0.0);
    }

    #[test]
    fn frequencies_linear_in_voltage() {
        let c = reference_trap();
        let w1 = secular_frequencies(&c).unwrap();
        let w2 = secular_frequencies(&c.with_v_rf(600.0)).unwrap();
        assert!((w2.omega_z / w1.omega_z - 2.0).abs() < 1e-12);
        assert!((w2.omega_rho / w1.omega_rho - 2.0).abs() < 1e-6);
    }

    #[test]
    fn four_rod_scaling() {
        let c = reference_trap();
        let r1 = four_rod_references(&c).unwrap();
        let mut half = c;
        half.geometry = c.geometry.scaled(0.5);
        let r2 = four_rod_references(&half).unwrap();
        assert!((r2.q_4rod / r1.q_4rod - 4.0).abs() < 1e-12);
    }

    #[test]
    fn depth_vanishes_for_thin_ring() {
        let c = reference_trap();
        let mut thin = c;
        thin.geometry = RingGeometry::new(1e-3, 1.0001e-3).unwrap();
        let d = trap_depth(&thin).unwrap();
        assert!(d / trap_depth(&c).unwrap() < 1e-6);
        // node and turning point tend to a/√2 and a·√(3/2), not to each other
        let z0 = trap_height(&thin.geometry, 0.0).unwrap();
        let zm = turning_point(&thin.geometry, 0.0).unwrap();
        assert!((z0 / 1e-3 - 0.5f64.sqrt()).abs() < 1e-4);
        assert!((zm / z0 - 3f64.sqrt()).abs() < 1e-4);
    }

    #[test]
    fn sweep_dynamic_range_and_cusp() {
        let c = TrapConfig::new(table(), RfDrive::new(1.0, 1.0, 0.0).unwrap(), IonSpecies::new(1.0, 1.0).unwrap());
        let s = epsilon_sweep(&c, 0.0, 0.8, 81).unwrap();
        assert_eq!(s.rows.len(), 81);
        let drop = s.rows[0].z0_prime.unwrap() - s.rows[70].z0_prime.unwrap();
        assert!((drop - 0.581).abs() < 1e-3, "{drop}");
        let cusp = s.cusp().unwrap();
        assert!((cusp - 0.70).abs() < 0.05, "{cusp}");
        let exact = depth_cusp(&table()).unwrap();
        assert!((cusp - exact).abs() < 1e-3);
        // past the critical ratio rows are flagged, not fatal
        let s = epsilon_sweep(&c, 0.5, 0.9, 5).unwrap();
        assert!(s.rows[0].valid && !s.rows[4].valid);
        assert!(epsilon_sweep(&c, 0.5, 0.4, 5).is_err());
        assert!(epsilon_sweep(&c, 0.0, 0.4, 1).is_err());
    }

    #[test]
    fn characterize_bundle_consistent() {
        let ch = characterize(&reference_trap()).unwrap();
        assert!(ch.z0 < ch.z_max && ch.depth > 0.0);
        assert!((ch.q / ch.q_4rod - ch.f_geometric * ch.z0 * ch.z0).abs() < 1e-12);
        assert!(!ch.q_exceeds_warning_threshold);
    }
}
