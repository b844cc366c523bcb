use serde::Serialize;
use serde_json::{json, Value};
use std::f64::consts::PI;
use std::path::Path;

use pointtrap::characterize::{characterize, epsilon_sweep, trap_height, TrapCharacteristics};
use pointtrap::constants::JOULES_PER_EV;
use pointtrap::crystal::{crystal_equilibrium, crystal_equilibrium_full, planarity};
use pointtrap::dynamics::{default_step, DEFAULT_AMPLITUDE_FRACTION, integrate_3d, AxialIntegrator, ThreeDField, Trajectory};
use pointtrap::field::field_map;
use pointtrap::optimize::optimize_depth_at_height;
use pointtrap::TrapConfig;

use crate::config::{self, TrapConfigFile};
use crate::error::CliError;
use crate::output::{emit, json as to_json, num, Csv, TOOL_VERSION};
use crate::units::Length;
use crate::{Command, ConfigArgs, Mode};

/// Relative z spread below which a crystal counts as planar (× z₀).
pub const PLANARITY_TOLERANCE: f64 = 1e-3;

struct Loaded {
    trap: TrapConfig,
    sha: String,
}

fn load(path: &Path, overrides: &[impl AsRef<Path>]) -> Result<Loaded, CliError> {
    let file = config::load(path, overrides)?;
    let trap = file.to_trap()?;
    let sha = file.sha256();
    Ok(Loaded { trap, sha })
}

// same region as ThreeDField::default_for, with a selectable resolution
fn map_3d(trap: &TrapConfig, z0: f64, n: usize) -> Result<ThreeDField, CliError> {
    Ok(ThreeDField::build(trap, 2.0 * z0, (0.2 * z0, 3.0 * z0), n, n)?)
}

pub fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Characterize { cfg } => characterize_cmd(&cfg),
        Command::Optimize { height, output } => optimize_cmd(height, output.as_deref()),
        Command::SweepEpsilon { cfg, from, to, steps } => sweep_cmd(&cfg, from, to, steps),
        Command::Fieldmap {
            cfg,
            rho_max,
            z_min,
            z_max,
            n,
        } => fieldmap_cmd(&cfg, rho_max, z_min, z_max, n),
        Command::Simulate {
            cfg,
            mode,
            duration,
            dt,
            z_offset,
            rho_offset,
            v_z,
            e_dc,
            map_n,
        } => {
            let l = load(&cfg.config, &cfg.overrides)?;
            let dt = dt.map_or_else(|| default_step(&l.trap), |d| d.0);
            let z0 = trap_height(&l.trap.geometry, l.trap.drive.epsilon)?;
            let z_init = z0 + z_offset.map_or(DEFAULT_AMPLITUDE_FRACTION * z0, |o| o.0);
            let tr = match mode {
                Mode::Axial => {
                    if rho_offset.0 != 0.0 {
                        return Err(CliError::config("--rho-offset needs --mode 3d"));
                    }
                    let mut integ = AxialIntegrator::new(&l.trap);
                    if let Some(e) = e_dc {
                        integ = integ.with_dc_field(e.0);
                    }
                    integ.run(z_init, v_z, duration.0, dt)?
                }
                Mode::ThreeD => {
                    if e_dc.is_some() {
                        return Err(CliError::config("--e-dc needs --mode axial"));
                    }
                    let field = map_3d(&l.trap, z0, map_n)?;
                    integrate_3d(&l.trap, &field, [rho_offset.0, 0.0, z_init], [0.0, 0.0, v_z], duration.0, dt)?
                }
            };
            emit(cfg.output.as_deref(), &trajectory_csv(&tr, &l.sha))
        }
        Command::Crystal {
            config,
            overrides,
            output,
            n,
            seed,
            restarts,
            full,
            map_n,
        } => {
            let l = load(&config, &overrides)?;
            let z0 = trap_height(&l.trap.geometry, l.trap.drive.epsilon)?;
            let conf = if full {
                let field = map_3d(&l.trap, z0, map_n)?;
                crystal_equilibrium_full(&l.trap, field.interpolated(), n, seed, restarts)?
            } else {
                crystal_equilibrium(&l.trap, n, seed, restarts)?
            };
            let tol = PLANARITY_TOLERANCE * z0;
            let plan = planarity(&conf, tol);
            let mut csv = Csv::new(Some(&l.sha), &["ion", "x_m", "y_m", "z_m"]);
            for (i, p) in conf.positions.iter().enumerate() {
                csv.row(&[i.to_string(), num(p[0]), num(p[1]), num(p[2])]);
            }
            let summary = json!({
                "tool_version": TOOL_VERSION,
                "config_sha256": l.sha,
                "model": if full { "full" } else { "harmonic" },
                "n_ions": conf.len(),
                "seed": seed,
                "restarts": restarts,
                "total_energy_j": conf.total_energy,
                "total_energy_ev": conf.total_energy / JOULES_PER_EV,
                "converged": conf.converged,
                "max_residual_force_n": conf.max_residual_force,
                "iterations": conf.iterations,
                "planar": plan.planar,
                "z_spread_m": plan.z_spread,
                "planarity_tolerance_m": tol,
            });
            emit(Some(&output), &csv.finish())?;
            emit(None, &to_json(&summary))
        }
    }
}

#[derive(Serialize)]
struct Summary {
    z0_um: f64,
    z_max_um: f64,
    omega_z_over_2pi_khz: f64,
    omega_rho_over_2pi_khz: f64,
    omega_rho_over_omega_z: f64,
    depth_ev: f64,
    d_4rod_ev: f64,
}

#[derive(Serialize)]
struct Report<'a> {
    tool_version: &'static str,
    config_sha256: &'a str,
    config: &'a TrapConfigFile,
    characteristics: TrapCharacteristics,
    summary: Summary,
}

/// The `characterize` report for a loaded configuration.
pub fn characterize_report(file: &TrapConfigFile) -> Result<String, CliError> {
    let trap = file.to_trap()?;
    let c = characterize(&trap)?;
    if c.q_exceeds_warning_threshold {
        eprintln!("warning: |q| = {:.3} exceeds 0.3; the pseudopotential approximation degrades", c.q);
    }
    let sha = file.sha256();
    let report = Report {
        tool_version: TOOL_VERSION,
        config_sha256: &sha,
        config: file,
        characteristics: c,
        summary: Summary {
            z0_um: c.z0 * 1e6,
            z_max_um: c.z_max * 1e6,
            omega_z_over_2pi_khz: c.omega_z / (2.0 * PI) / 1e3,
            omega_rho_over_2pi_khz: c.omega_rho / (2.0 * PI) / 1e3,
            omega_rho_over_omega_z: c.omega_rho / c.omega_z,
            depth_ev: c.depth / JOULES_PER_EV,
            d_4rod_ev: c.d_4rod / JOULES_PER_EV,
        },
    };
    Ok(to_json(&report))
}

fn characterize_cmd(cfg: &ConfigArgs) -> Result<(), CliError> {
    let file = config::load(&cfg.config, &cfg.overrides)?;
    emit(cfg.output.as_deref(), &characterize_report(&file)?)
}

fn optimize_cmd(height: Length, output: Option<&Path>) -> Result<(), CliError> {
    let r = optimize_depth_at_height(height.0)?;
    let g = r.geometry()?;
    let mut v = serde_json::to_value(r).expect("serializable");
    let obj = v.as_object_mut().expect("object");
    obj.insert("tool_version".into(), Value::from(TOOL_VERSION));
    obj.insert("a_m".into(), Value::from(g.a()));
    obj.insert("b_m".into(), Value::from(g.b()));
    obj.insert("zmax_m".into(), Value::from(r.zmax_over_z0 * r.z0_target));
    obj.insert("constraint_residual".into(), Value::from(r.constraint_residual()?));
    emit(output, &to_json(&v))
}

fn sweep_cmd(cfg: &ConfigArgs, from: f64, to: f64, steps: usize) -> Result<(), CliError> {
    let l = load(&cfg.config, &cfg.overrides)?;
    let sweep = epsilon_sweep(&l.trap, from, to, steps)?;
    let mut csv = Csv::new(
        Some(&l.sha),
        &[
            "epsilon",
            "z0_prime_m",
            "q_prime",
            "depth_prime_j",
            "depth_prime_ev",
            "upper_barrier_j",
            "lower_barrier_j",
            "limiting_barrier",
            "valid",
        ],
    );
    for r in &sweep.rows {
        let limiting = match r.limiting {
            Some(b) => serde_json::to_value(b).expect("serializable").as_str().unwrap_or_default().to_string(),
            None => String::new(),
        };
        csv.row(&[
            num(r.epsilon),
            num(r.z0_prime),
            num(r.q_prime),
            num(r.depth_prime),
            num(r.depth_prime.map(|d| d / JOULES_PER_EV)),
            num(r.upper_barrier),
            num(r.lower_barrier),
            limiting,
            r.valid.to_string(),
        ]);
    }
    emit(cfg.output.as_deref(), &csv.finish())
}

fn fieldmap_cmd(cfg: &ConfigArgs, rho_max: Length, z_min: Length, z_max: Length, n: usize) -> Result<(), CliError> {
    let l = load(&cfg.config, &cfg.overrides)?;
    let map = field_map(&l.trap, (0.0, rho_max.0), (z_min.0, z_max.0), n, n)?;
    let mut csv = Csv::new(
        Some(&l.sha),
        &["rho_m", "z_m", "kappa", "dkappa_dz_per_m", "dkappa_drho_per_m", "psi_j", "psi_ev"],
    );
    for (iz, z) in map.z.iter().enumerate() {
        for (ir, rho) in map.rho.iter().enumerate() {
            let psi = map.psi[[iz, ir]];
            csv.row(&[
                num(*rho),
                num(*z),
                num(map.kappa[[iz, ir]]),
                num(map.d_dz[[iz, ir]]),
                num(map.d_drho[[iz, ir]]),
                num(psi),
                num(psi / JOULES_PER_EV),
            ]);
        }
    }
    if map.degraded {
        eprintln!("warning: some samples lie too close to the electrode plane for full accuracy");
    }
    emit(cfg.output.as_deref(), &csv.finish())
}

fn trajectory_csv(tr: &Trajectory, sha: &str) -> String {
    let mut csv = Csv::new(Some(sha), &["t_s", "rho_m", "z_m", "v_rho_mps", "v_z_mps"]);
    for p in &tr.points {
        csv.row(&[num(p.t), num(p.rho()), num(p.z()), num(p.v_rho()), num(p.v_z())]);
    }
    csv.finish()
}
