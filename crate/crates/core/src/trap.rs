//! Trap description: electrodes, ring geometry, rf drive and ion species.
//!
//! All quantities are SI.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::constants::{ATOMIC_MASS_UNIT, ELECTRON_MASS, ELEMENTARY_CHARGE, SR88_ATOMIC_MASS_U};
use crate::error::{Error, Result};

/// A flat annulus α ≤ ρ ≤ β in the z = 0 plane held at potential amplitude V.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnularElectrode {
    pub inner_radius: f64,
    pub outer_radius: f64,
    pub amplitude: f64,
}

impl AnnularElectrode {
    pub fn new(inner_radius: f64, outer_radius: f64, amplitude: f64) -> Result<Self> {
        if !(inner_radius >= 0.0) || !inner_radius.is_finite() {
            return Err(Error::invalid("inner_radius", format!("{inner_radius} must be finite and >= 0")));
        }
        if !(outer_radius > inner_radius) || !outer_radius.is_finite() {
            return Err(Error::invalid(
                "outer_radius",
                format!("{outer_radius} must be finite and exceed inner radius {inner_radius}"),
            ));
        }
        if !amplitude.is_finite() {
            return Err(Error::invalid("amplitude", "must be finite"));
        }
        Ok(AnnularElectrode {
            inner_radius,
            outer_radius,
            amplitude,
        })
    }

    /// Solid disk of the given radius.
    pub fn disk(radius: f64, amplitude: f64) -> Result<Self> {
        Self::new(0.0, radius, amplitude)
    }

    pub fn scaled(&self, s: f64) -> Self {
        AnnularElectrode {
            inner_radius: self.inner_radius * s,
            outer_radius: self.outer_radius * s,
            amplitude: self.amplitude,
        }
    }
}

/// Inner radius `a` and outer radius `b` of the rf ring electrode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawRing")]
pub struct RingGeometry {
    a: f64,
    b: f64,
}

#[derive(Deserialize)]
struct RawRing {
    a: f64,
    b: f64,
}

impl TryFrom<RawRing> for RingGeometry {
    type Error = Error;
    fn try_from(raw: RawRing) -> Result<Self> {
        RingGeometry::new(raw.a, raw.b)
    }
}

impl RingGeometry {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::invalid("a", format!("inner radius {a} must be finite and > 0")));
        }
        if !(b > a) || !b.is_finite() {
            return Err(Error::invalid("b", format!("outer radius {b} must be finite and exceed a = {a}")));
        }
        Ok(RingGeometry { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn scaled(&self, s: f64) -> Self {
        RingGeometry {
            a: self.a * s,
            b: self.b * s,
        }
    }

    /// Largest in-phase drive ratio that still leaves an on-axis node: 1 - a/b.
    pub fn epsilon_crit(&self) -> f64 {
        1.0 - self.a / self.b
    }

    /// Most negative (out-of-phase) drive ratio with an on-axis node: 1 - (b/a)².
    pub fn epsilon_floor(&self) -> f64 {
        1.0 - (self.b / self.a).powi(2)
    }

    /// Checks that `epsilon` yields a trap, returning [`Error::NoTrap`] otherwise.
    pub fn check_epsilon(&self, epsilon: f64) -> Result<()> {
        let (lower, upper) = (self.epsilon_floor(), self.epsilon_crit());
        if epsilon.is_finite() && epsilon > lower && epsilon < upper {
            Ok(())
        } else {
            Err(Error::NoTrap { epsilon, lower, upper })
        }
    }

    /// Electrode stack with unit ring amplitude and the centre electrode at `epsilon`.
    pub fn electrode_stack(&self, epsilon: f64) -> Vec<AnnularElectrode> {
        let ring = AnnularElectrode {
            inner_radius: self.a,
            outer_radius: self.b,
            amplitude: 1.0,
        };
        if epsilon == 0.0 {
            vec![ring]
        } else {
            vec![
                AnnularElectrode {
                    inner_radius: 0.0,
                    outer_radius: self.a,
                    amplitude: epsilon,
                },
                ring,
            ]
        }
    }
}

/// rf drive: amplitude, angular frequency and centre-electrode ratio ε.
///
/// Negative ε is an out-of-phase drive on the centre electrode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RfDrive {
    pub v_rf: f64,
    pub omega_rf: f64,
    pub epsilon: f64,
}

impl RfDrive {
    pub fn new(v_rf: f64, omega_rf: f64, epsilon: f64) -> Result<Self> {
        if !(v_rf >= 0.0) || !v_rf.is_finite() {
            return Err(Error::invalid("v_rf", format!("{v_rf} must be finite and >= 0")));
        }
        if !(omega_rf > 0.0) || !omega_rf.is_finite() {
            return Err(Error::invalid("omega_rf", format!("{omega_rf} must be finite and > 0")));
        }
        if !(epsilon <= 1.0) || !epsilon.is_finite() {
            return Err(Error::invalid("epsilon", format!("{epsilon} must be finite and <= 1")));
        }
        Ok(RfDrive {
            v_rf,
            omega_rf,
            epsilon,
        })
    }

    pub fn from_frequency_hz(v_rf: f64, frequency_hz: f64, epsilon: f64) -> Result<Self> {
        Self::new(v_rf, 2.0 * PI * frequency_hz, epsilon)
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega_rf
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IonSpecies {
    pub charge: f64,
    pub mass: f64,
}

impl IonSpecies {
    pub fn new(charge: f64, mass: f64) -> Result<Self> {
        if charge == 0.0 || !charge.is_finite() {
            return Err(Error::invalid("charge", "must be finite and non-zero"));
        }
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(Error::invalid("mass", format!("{mass} must be finite and > 0")));
        }
        Ok(IonSpecies { charge, mass })
    }

    /// Singly ionised strontium-88.
    pub fn strontium_88() -> Self {
        IonSpecies {
            charge: ELEMENTARY_CHARGE,
            mass: SR88_ATOMIC_MASS_U * ATOMIC_MASS_UNIT - ELECTRON_MASS,
        }
    }

    pub fn from_amu(mass_amu: f64, charge_e: f64) -> Result<Self> {
        Self::new(charge_e * ELEMENTARY_CHARGE, mass_amu * ATOMIC_MASS_UNIT)
    }
}

/// Geometry, drive and species together.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrapConfig {
    pub geometry: RingGeometry,
    pub drive: RfDrive,
    pub species: IonSpecies,
}

impl TrapConfig {
    pub fn new(geometry: RingGeometry, drive: RfDrive, species: IonSpecies) -> Self {
        TrapConfig {
            geometry,
            drive,
            species,
        }
    }

    /// Q²V²/(4MΩ²): multiplies |∇κ|² to give the pseudopotential (J m²).
    pub fn pseudopotential_prefactor(&self) -> f64 {
        let IonSpecies { charge, mass } = self.species;
        let RfDrive { v_rf, omega_rf, .. } = self.drive;
        (charge * v_rf).powi(2) / (4.0 * mass * omega_rf * omega_rf)
    }

    /// 2QV/(MΩ²): multiplies a field curvature (m⁻²) to give a Mathieu q.
    pub fn q_prefactor(&self) -> f64 {
        let IonSpecies { charge, mass } = self.species;
        let RfDrive { v_rf, omega_rf, .. } = self.drive;
        2.0 * charge * v_rf / (mass * omega_rf * omega_rf)
    }

    pub fn electrode_stack(&self) -> Vec<AnnularElectrode> {
        self.geometry.electrode_stack(self.drive.epsilon)
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Self {
        let mut c = *self;
        c.drive.epsilon = epsilon;
        c
    }

    pub fn with_v_rf(&self, v_rf: f64) -> Self {
        let mut c = *self;
        c.drive.v_rf = v_rf;
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ring_rejects_bad_radii() {
        assert!(RingGeometry::new(1.0, 1.0).is_err());
        assert!(RingGeometry::new(2.0, 1.0).is_err());
        assert!(RingGeometry::new(0.0, 1.0).is_err());
        assert!(RingGeometry::new(f64::NAN, 1.0).is_err());
        assert!(RingGeometry::new(0.5, 1.0).is_ok());
    }

    #[test]
    fn electrode_invariants() {
        assert!(AnnularElectrode::new(1.0, 0.5, 1.0).is_err());
        assert!(AnnularElectrode::new(-1.0, 0.5, 1.0).is_err());
        assert!(AnnularElectrode::new(0.0, 0.5, f64::INFINITY).is_err());
    }

    #[test]
    fn drive_limits() {
        assert!(RfDrive::new(-1.0, 1.0, 0.0).is_err());
        assert!(RfDrive::new(1.0, 0.0, 0.0).is_err());
        assert!(RfDrive::new(1.0, 1.0, 1.5).is_err());
        assert!(RfDrive::new(1.0, 1.0, -3.0).is_ok());
    }

    #[test]
    fn epsilon_window() {
        let g = RingGeometry::new(0.651679, 3.57668).unwrap();
        assert!((g.epsilon_crit() - 0.8177978).abs() < 1e-6);
        assert!(g.check_epsilon(0.0).is_ok());
        assert!(g.check_epsilon(0.81).is_ok());
        assert!(matches!(g.check_epsilon(0.82), Err(Error::NoTrap { .. })));
        assert!(g.check_epsilon(g.epsilon_floor() + 0.01).is_ok());
        assert!(g.check_epsilon(g.epsilon_floor() - 0.01).is_err());
    }

    #[test]
    fn strontium_mass() {
        let sr = IonSpecies::strontium_88();
        assert!((sr.mass / ATOMIC_MASS_UNIT - 87.905).abs() < 1e-3);
    }

    #[test]
    fn stack_omits_grounded_centre() {
        let g = RingGeometry::new(1.0, 2.0).unwrap();
        assert_eq!(g.electrode_stack(0.0).len(), 1);
        assert_eq!(g.electrode_stack(0.3).len(), 2);
    }
}
