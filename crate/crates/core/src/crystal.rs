//! Equilibrium configurations of small ion crystals above the rf node.
//!
//! Energies and forces are minimized in scaled units: lengths in
//! ℓ = (kQ²/(Mω_ρ²))^{1/3}, energies in kQ²/ℓ. By default the trap is
//! replaced by its harmonic expansion about the node; the full mode uses
//! Ψ = C|∇κ|² from an interpolated field map.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::characterize::{radial_frequency_fit, secular_frequencies, trap_height};
use crate::constants::COULOMB_CONSTANT;
use crate::error::{Error, Result};
use crate::field::InterpolatedField;
use crate::trap::TrapConfig;

pub const DEFAULT_RESTARTS: usize = 16;
/// Residual force per ion accepted as equilibrium (N).
pub const FORCE_TOLERANCE: f64 = 1e-19;
// tighter bound in scaled units, so that small crystals are resolved well
// past the absolute threshold
const SCALED_FORCE_TOLERANCE: f64 = 1e-9;
const MAX_ITERATIONS: usize = 50_000;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CrystalConfiguration {
    #[serde(rename = "positions_m")]
    pub positions: Vec<[f64; 3]>,
    #[serde(rename = "total_energy_j")]
    pub total_energy: f64,
    pub converged: bool,
    #[serde(rename = "max_residual_force_n")]
    pub max_residual_force: f64,
    pub iterations: usize,
    /// Total energy after each accepted minimizer step (J).
    #[serde(skip)]
    pub energy_history: Vec<f64>,
}

impl CrystalConfiguration {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Mean position of the ions (m).
    pub fn center(&self) -> [f64; 3] {
        let n = self.positions.len().max(1) as f64;
        let mut c = [0.0; 3];
        for p in &self.positions {
            for i in 0..3 {
                c[i] += p[i] / n;
            }
        }
        c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Planarity {
    pub planar: bool,
    #[serde(rename = "z_spread_m")]
    pub z_spread: f64,
}

/// Whether all ions share one axial plane within `tol` (m).
pub fn planarity(config: &CrystalConfiguration, tol: f64) -> Planarity {
    let (lo, hi) = config
        .positions
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p[2]), hi.max(p[2])));
    let z_spread = if config.positions.is_empty() { 0.0 } else { hi - lo };
    Planarity {
        planar: z_spread <= tol,
        z_spread,
    }
}

/// Force-balance separation of two ions in a radial harmonic well (m).
pub fn two_ion_separation(config: &TrapConfig, omega_rho: f64) -> f64 {
    let q = config.species.charge;
    (2.0 * COULOMB_CONSTANT * q * q / (config.species.mass * omega_rho * omega_rho)).cbrt()
}

enum Trap<'a> {
    Harmonic { ratio_sq: f64 },
    Full { field: &'a InterpolatedField, prefactor: f64 },
}

/// Energy model in scaled units.
struct Model<'a> {
    trap: Trap<'a>,
    length: f64,
    energy: f64,
    z0: f64,
}

impl<'a> Model<'a> {
    fn new(config: &TrapConfig, omega_rho: f64, trap: Trap<'a>) -> Result<Self> {
        let q = config.species.charge;
        let kq2 = COULOMB_CONSTANT * q * q;
        let length = (kq2 / (config.species.mass * omega_rho * omega_rho)).cbrt();
        Ok(Model {
            trap,
            length,
            energy: kq2 / length,
            z0: trap_height(&config.geometry, config.drive.epsilon)?,
        })
    }

    fn to_si(&self, u: &[f64; 3]) -> [f64; 3] {
        [u[0] * self.length, u[1] * self.length, self.z0 + u[2] * self.length]
    }

    fn to_scaled(&self, p: &[f64; 3]) -> [f64; 3] {
        [p[0] / self.length, p[1] / self.length, (p[2] - self.z0) / self.length]
    }

    /// Trap energy of one ion and its gradient, scaled.
    fn single(&self, u: &[f64; 3]) -> Result<(f64, [f64; 3])> {
        match &self.trap {
            Trap::Harmonic { ratio_sq } => Ok((
                0.5 * (u[0] * u[0] + u[1] * u[1] + ratio_sq * u[2] * u[2]),
                [u[0], u[1], ratio_sq * u[2]],
            )),
            Trap::Full { field, prefactor } => {
                let p = self.to_si(u);
                let rho = p[0].hypot(p[1]);
                let d = field.derivatives(rho, p[2]).map_err(|_| Error::IonEscaped)?;
                let psi = prefactor * (d.d_dz * d.d_dz + d.d_drho * d.d_drho);
                let dpsi_dz = 2.0 * prefactor * (d.d_dz * d.d_dz_dz + d.d_drho * d.d_drho_dz);
                let dpsi_drho = 2.0 * prefactor * (d.d_dz * d.d_dz_drho + d.d_drho * d.d_drho_drho);
                let s = self.length / self.energy;
                let (cx, cy) = if rho > 0.0 { (p[0] / rho, p[1] / rho) } else { (0.0, 0.0) };
                Ok((psi / self.energy, [s * dpsi_drho * cx, s * dpsi_drho * cy, s * dpsi_dz]))
            }
        }
    }

    fn evaluate(&self, x: &[[f64; 3]]) -> Result<(f64, Vec<[f64; 3]>)> {
        let mut e = 0.0;
        let mut g = vec![[0.0; 3]; x.len()];
        for (i, u) in x.iter().enumerate() {
            let (ei, gi) = self.single(u)?;
            e += ei;
            g[i] = gi;
        }
        for i in 0..x.len() {
            for j in i + 1..x.len() {
                let d = [x[i][0] - x[j][0], x[i][1] - x[j][1], x[i][2] - x[j][2]];
                let r2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
                let r = r2.sqrt();
                e += 1.0 / r;
                let f = 1.0 / (r2 * r);
                for k in 0..3 {
                    g[i][k] -= f * d[k];
                    g[j][k] += f * d[k];
                }
            }
        }
        Ok((e, g))
    }
}

fn max_norm(g: &[[f64; 3]]) -> f64 {
    g.iter().map(|v| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()).fold(0.0, f64::max)
}

fn shifted(x: &[[f64; 3]], dir: &[[f64; 3]], s: f64) -> Vec<[f64; 3]> {
    x.iter()
        .zip(dir)
        .map(|(p, d)| [p[0] + s * d[0], p[1] + s * d[1], p[2] + s * d[2]])
        .collect()
}

struct Minimum {
    x: Vec<[f64; 3]>,
    energy: f64,
    force: f64,
    iterations: usize,
    history: Vec<f64>,
}

fn minimize(model: &Model, mut x: Vec<[f64; 3]>, tol: f64) -> Result<Minimum> {
    let (mut e, mut g) = model.evaluate(&x)?;
    let mut history = vec![e];
    let mut step = 0.1;
    let mut iterations = 0;
    let neg = |g: &[[f64; 3]]| g.iter().map(|v| [-v[0], -v[1], -v[2]]).collect::<Vec<_>>();

    // gradient descent with backtracking until forces are small
    while max_norm(&g) > 1e-3 && iterations < MAX_ITERATIONS {
        iterations += 1;
        let dir = neg(&g);
        let g2: f64 = g.iter().flat_map(|v| v.iter()).map(|c| c * c).sum();
        let trial = shifted(&x, &dir, step);
        match model.evaluate(&trial) {
            Ok((et, gt)) if et <= e - 1e-4 * step * g2 => {
                x = trial;
                e = et;
                g = gt;
                history.push(e);
                step = (step * 1.5).min(1.0);
            }
            _ => step *= 0.5,
        }
        if step < 1e-14 {
            break;
        }
    }

    // heavy-ball polish; a step that would raise the energy resets the
    // momentum. Close to the minimum energy differences drop below the
    // rounding error of the pair sum, so there a step is also taken when the
    // energy is unchanged to within that error and the force falls.
    let n_ions = x.len() as f64;
    let roundoff = |e: f64| 64.0 * f64::EPSILON * (e.abs() + n_ions);
    let mut v = vec![[0.0; 3]; x.len()];
    let mut step = 0.05;
    while max_norm(&g) > tol && iterations < MAX_ITERATIONS {
        iterations += 1;
        let v_new: Vec<[f64; 3]> = v
            .iter()
            .zip(&g)
            .map(|(v, g)| [0.9 * v[0] - step * g[0], 0.9 * v[1] - step * g[1], 0.9 * v[2] - step * g[2]])
            .collect();
        let trial = shifted(&x, &v_new, 1.0);
        match model.evaluate(&trial) {
            Ok((et, gt)) if et <= e || (et - e <= roundoff(e) && max_norm(&gt) < max_norm(&g)) => {
                x = trial;
                e = et;
                g = gt;
                v = v_new;
                history.push(e);
                step = (step * 1.05).min(0.5);
            }
            _ => {
                v.iter_mut().for_each(|c| *c = [0.0; 3]);
                step *= 0.5;
                if step < 1e-16 {
                    break;
                }
            }
        }
    }
    Ok(Minimum {
        force: max_norm(&g),
        x,
        energy: e,
        iterations,
        history,
    })
}

fn initial_positions(n: usize, rng: &mut ChaCha8Rng) -> Vec<[f64; 3]> {
    let radius = 1.0 + (n as f64).cbrt();
    (0..n)
        .map(|_| {
            [
                rng.gen_range(-radius..radius),
                rng.gen_range(-radius..radius),
                rng.gen_range(-0.5 * radius..0.5 * radius),
            ]
        })
        .collect()
}

fn solve(config: &TrapConfig, model: &Model, n: usize, seed: u64, restarts: usize) -> Result<CrystalConfiguration> {
    if n == 0 {
        return Err(Error::invalid("n", "at least one ion is required"));
    }
    if restarts == 0 {
        return Err(Error::invalid("restarts", "at least one restart is required"));
    }
    let force_unit = model.energy / model.length;
    let tol = (FORCE_TOLERANCE / force_unit).min(SCALED_FORCE_TOLERANCE);
    let runs: Vec<Result<Minimum>> = (0..restarts)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
            minimize(model, initial_positions(n, &mut rng), tol)
        })
        .collect();
    // lowest energy; earliest restart wins ties so the result is reproducible
    let mut best: Option<Minimum> = None;
    for run in runs {
        let run = run?;
        if best.as_ref().is_none_or(|b| run.energy < b.energy) {
            best = Some(run);
        }
    }
    let best = best.expect("at least one restart");
    let _ = config;
    Ok(CrystalConfiguration {
        positions: best.x.iter().map(|u| model.to_si(u)).collect(),
        total_energy: best.energy * model.energy,
        converged: best.force <= tol,
        max_residual_force: best.force * force_unit,
        iterations: best.iterations,
        energy_history: best.history.iter().map(|e| e * model.energy).collect(),
    })
}

/// Best equilibrium of `n` ions in the harmonic expansion of the trap,
/// over `restarts` seeded random starts.
pub fn crystal_equilibrium(config: &TrapConfig, n: usize, seed: u64, restarts: usize) -> Result<CrystalConfiguration> {
    let w = secular_frequencies(config)?;
    let model = Model::new(
        config,
        w.omega_rho,
        Trap::Harmonic {
            ratio_sq: (w.omega_z / w.omega_rho).powi(2),
        },
    )?;
    solve(config, &model, n, seed, restarts)
}

/// As [`crystal_equilibrium`] but with the full pseudopotential from `field`.
pub fn crystal_equilibrium_full(
    config: &TrapConfig,
    field: &InterpolatedField,
    n: usize,
    seed: u64,
    restarts: usize,
) -> Result<CrystalConfiguration> {
    let model = Model::new(
        config,
        radial_frequency_fit(config)?,
        Trap::Full {
            field,
            prefactor: config.pseudopotential_prefactor(),
        },
    )?;
    solve(config, &model, n, seed, restarts)
}

/// Total energy (J) of arbitrary ion positions in the harmonic model.
pub fn harmonic_energy(config: &TrapConfig, positions: &[[f64; 3]]) -> Result<f64> {
    let w = secular_frequencies(config)?;
    let model = Model::new(
        config,
        w.omega_rho,
        Trap::Harmonic {
            ratio_sq: (w.omega_z / w.omega_rho).powi(2),
        },
    )?;
    let x: Vec<_> = positions.iter().map(|p| model.to_scaled(p)).collect();
    Ok(model.evaluate(&x)?.0 * model.energy)
}
