//! Electrostatic shape function κ and pseudopotential Ψ of concentric
//! annular electrodes.
//!
//! For a stack of annuli at amplitudes Vᵢ the potential above the plane is
//!
//! ```text
//! κ(z, ρ) = ∫₀^∞ A(k) e^{-kz} J₀(kρ) dk,   A(k) = Σᵢ Vᵢ [βᵢ J₁(kβᵢ) − αᵢ J₁(kαᵢ)]
//! ```
//!
//! On the axis the integral has a closed form; elsewhere it is evaluated by
//! panelled Gauss–Kronrod quadrature in units of the outermost radius.

mod interp;
mod map;

pub use interp::{FieldDerivatives, InterpolatedField};
pub use map::{field_map, FieldMap};

use std::f64::consts::PI;

use crate::bessel::{j0, j1};
use crate::error::{Error, Result};
use crate::quadrature::{integrate_panels_best_effort, Integral};
use crate::trap::{AnnularElectrode, RingGeometry, TrapConfig};

/// Aᵢ(k) = V [β J₁(kβ) − α J₁(kα)] for one electrode.
pub fn annular_coefficient(electrode: &AnnularElectrode, k: f64) -> f64 {
    let AnnularElectrode {
        inner_radius,
        outer_radius,
        amplitude,
    } = *electrode;
    let inner = if inner_radius > 0.0 {
        inner_radius * j1(k * inner_radius)
    } else {
        0.0
    };
    amplitude * (outer_radius * j1(k * outer_radius) - inner)
}

fn check_height(z: f64) -> Result<()> {
    if z > 0.0 && z.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("height z = {z} must be finite and > 0")))
    }
}

/// On-axis κ(z, 0) of the ring with the centre electrode driven at ε.
pub fn kappa_axial(geom: &RingGeometry, epsilon: f64, z: f64) -> Result<f64> {
    check_height(z)?;
    let (a, b) = (geom.a(), geom.b());
    let ia = 1.0 / (1.0 + (a / z).powi(2)).sqrt();
    let ib = 1.0 / (1.0 + (b / z).powi(2)).sqrt();
    Ok(ia - ib + epsilon * (1.0 - ia))
}

/// ∂κ/∂z on the axis (m⁻¹). Valid for any z ≥ 0.
pub fn axial_slope(geom: &RingGeometry, epsilon: f64, z: f64) -> f64 {
    let (a2, b2, z2) = (geom.a().powi(2), geom.b().powi(2), z * z);
    (1.0 - epsilon) * a2 / (z2 + a2).powf(1.5) - b2 / (z2 + b2).powf(1.5)
}

/// ∂²κ/∂z² on the axis (m⁻²).
pub fn axial_curvature(geom: &RingGeometry, epsilon: f64, z: f64) -> f64 {
    let (a2, b2, z2) = (geom.a().powi(2), geom.b().powi(2), z * z);
    -3.0 * z * ((1.0 - epsilon) * a2 / (z2 + a2).powf(2.5) - b2 / (z2 + b2).powf(2.5))
}

/// Quadrature settings for off-axis evaluation.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureOptions {
    /// Target error relative to the electrode amplitude scale.
    pub rel_tol: f64,
    /// Cap on the truncation wavenumber times the outermost radius.
    pub max_k_span: f64,
    /// Bisection budget per evaluation.
    pub max_splits: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions {
            rel_tol: 1e-9,
            max_k_span: 1e6,
            max_splits: 20_000,
        }
    }
}

/// κ and its gradient at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub kappa: f64,
    /// ∂κ/∂z (m⁻¹)
    pub d_dz: f64,
    /// ∂κ/∂ρ (m⁻¹)
    pub d_drho: f64,
    /// Set when z is so close to the electrodes that the wavenumber cap
    /// bounds accuracy.
    pub degraded: bool,
}

impl FieldSample {
    pub fn gradient_squared(&self) -> f64 {
        self.d_dz * self.d_dz + self.d_drho * self.d_drho
    }
}

/// Off-axis evaluator for a fixed electrode stack.
#[derive(Debug, Clone)]
pub struct FieldSolver {
    // radii in units of `length_scale`
    electrodes: Vec<AnnularElectrode>,
    length_scale: f64,
    amplitude_scale: f64,
    smallest_radius: f64,
    options: QuadratureOptions,
}

impl FieldSolver {
    pub fn new(stack: &[AnnularElectrode]) -> Result<Self> {
        Self::with_options(stack, QuadratureOptions::default())
    }

    pub fn with_options(stack: &[AnnularElectrode], options: QuadratureOptions) -> Result<Self> {
        if stack.is_empty() {
            return Err(Error::invalid("stack", "at least one electrode is required"));
        }
        for e in stack {
            AnnularElectrode::new(e.inner_radius, e.outer_radius, e.amplitude)?;
        }
        let length_scale = stack.iter().map(|e| e.outer_radius).fold(0.0, f64::max);
        let electrodes: Vec<_> = stack.iter().map(|e| e.scaled(1.0 / length_scale)).collect();
        let amplitude_scale = electrodes
            .iter()
            .map(|e| e.amplitude.abs() * (e.inner_radius + e.outer_radius))
            .sum::<f64>()
            .max(f64::MIN_POSITIVE);
        let smallest_radius = stack
            .iter()
            .flat_map(|e| [e.inner_radius, e.outer_radius])
            .filter(|r| *r > 0.0)
            .fold(f64::INFINITY, f64::min);
        Ok(FieldSolver {
            electrodes,
            length_scale,
            amplitude_scale,
            smallest_radius,
            options,
        })
    }

    pub fn for_trap(config: &TrapConfig) -> Result<Self> {
        Self::new(&config.electrode_stack())
    }

    fn coefficient(&self, k: f64) -> f64 {
        self.electrodes.iter().map(|e| annular_coefficient(e, k)).sum()
    }

    fn abs_tol(&self) -> f64 {
        self.options.rel_tol * self.amplitude_scale
    }

    /// Truncation wavenumber (scaled) and whether the cap was hit.
    fn truncation(&self, z_hat: f64) -> (f64, bool) {
        // |A(k)| <= S, so the tails of all three integrands are bounded by
        // S e^{-t} max(1/z, (t+1)/z²) with t = k_max z.
        let s = self.amplitude_scale;
        let target = 0.1 * self.abs_tol();
        let mut t: f64 = 1.0;
        for _ in 0..8 {
            let bound = s * (1.0 / z_hat).max((t + 1.0) / (z_hat * z_hat));
            t = (bound / target).ln().max(1.0);
        }
        let k_max = t / z_hat;
        if k_max > self.options.max_k_span {
            (self.options.max_k_span, true)
        } else {
            (k_max, false)
        }
    }

    fn degraded_height(&self, z: f64) -> bool {
        z < 1e-3 * self.smallest_radius
    }

    fn validate(&self, z: f64, rho: f64) -> Result<()> {
        check_height(z)?;
        if rho >= 0.0 && rho.is_finite() {
            Ok(())
        } else {
            Err(Error::Domain(format!("radius rho = {rho} must be finite and >= 0")))
        }
    }

    fn integrate<const N: usize>(&self, z: f64, rho: f64, f: impl Fn(f64, f64, f64) -> [f64; N]) -> Result<(Integral<N>, bool)> {
        self.validate(z, rho)?;
        let (zh, rh) = (z / self.length_scale, rho / self.length_scale);
        let (k_max, capped) = self.truncation(zh);
        let degraded = capped || self.degraded_height(z);
        let r = integrate_panels_best_effort(
            |k| f(k, self.coefficient(k) * (-k * zh).exp(), rh),
            0.0,
            k_max,
            PI / (1.0 + rh),
            self.abs_tol(),
            self.options.max_splits,
        );
        // near the surface the best available estimate is returned, flagged
        if r.error > self.abs_tol() && !degraded {
            return Err(Error::Quadrature {
                tolerance: self.abs_tol(),
                estimate: r.error,
            });
        }
        Ok((r, degraded))
    }

    /// κ(z, ρ) alone.
    pub fn kappa(&self, z: f64, rho: f64) -> Result<f64> {
        let (r, _) = self.integrate(z, rho, |k, w, rh| [w * j0(k * rh)])?;
        Ok(r.value[0])
    }

    /// κ together with ∂κ/∂z and ∂κ/∂ρ.
    pub fn sample(&self, z: f64, rho: f64) -> Result<FieldSample> {
        let (r, degraded) = self.integrate(z, rho, |k, w, rh| {
            let j0k = j0(k * rh);
            [w * j0k, -k * w * j0k, -k * w * j1(k * rh)]
        })?;
        Ok(FieldSample {
            kappa: r.value[0],
            d_dz: r.value[1] / self.length_scale,
            d_drho: r.value[2] / self.length_scale,
            degraded,
        })
    }
}

/// κ(z, ρ) for an arbitrary electrode stack.
pub fn kappa_numeric(stack: &[AnnularElectrode], z: f64, rho: f64) -> Result<f64> {
    FieldSolver::new(stack)?.kappa(z, rho)
}

/// (∂κ/∂z, ∂κ/∂ρ) for an arbitrary electrode stack.
pub fn kappa_gradient(stack: &[AnnularElectrode], z: f64, rho: f64) -> Result<(f64, f64)> {
    let s = FieldSolver::new(stack)?.sample(z, rho)?;
    Ok((s.d_dz, s.d_drho))
}

/// Pseudopotential Ψ = Q²V²/(4MΩ²) |∇κ|² (J).
pub fn pseudopotential(config: &TrapConfig, z: f64, rho: f64) -> Result<f64> {
    let s = FieldSolver::for_trap(config)?.sample(z, rho)?;
    Ok(config.pseudopotential_prefactor() * s.gradient_squared())
}

/// On-axis pseudopotential from the closed-form slope (J).
pub fn pseudopotential_axial(config: &TrapConfig, z: f64) -> f64 {
    config.pseudopotential_prefactor() * axial_slope(&config.geometry, config.drive.epsilon, z).powi(2)
}
