use ndarray::Array2;
use rayon::prelude::*;

use super::{FieldSample, FieldSolver};
use crate::error::{Error, Result};
use crate::trap::TrapConfig;

/// κ, ∇κ and Ψ sampled on a uniform (ρ, z) grid.
///
/// Arrays are indexed `[iz, irho]`.
#[derive(Debug, Clone)]
pub struct FieldMap {
    pub rho: Vec<f64>,
    pub z: Vec<f64>,
    pub kappa: Array2<f64>,
    pub d_dz: Array2<f64>,
    pub d_drho: Array2<f64>,
    pub psi: Array2<f64>,
    /// True if any sample was flagged as near-surface degraded.
    pub degraded: bool,
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let h = (hi - lo) / (n - 1) as f64;
    (0..n)
        .map(|i| if i + 1 == n { hi } else { lo + i as f64 * h })
        .collect()
}

/// Samples the trap field over `rho_range × z_range` with `n_rho × n_z` nodes.
///
/// Grid points are evaluated in parallel; the result does not depend on
/// scheduling.
pub fn field_map(
    config: &TrapConfig,
    rho_range: (f64, f64),
    z_range: (f64, f64),
    n_rho: usize,
    n_z: usize,
) -> Result<FieldMap> {
    if !(rho_range.0 >= 0.0 && rho_range.1 > rho_range.0 && rho_range.1.is_finite()) {
        return Err(Error::invalid("rho_range", format!("{rho_range:?} must satisfy 0 <= lo < hi")));
    }
    if !(z_range.0 > 0.0 && z_range.1 > z_range.0 && z_range.1.is_finite()) {
        return Err(Error::invalid("z_range", format!("{z_range:?} must satisfy 0 < lo < hi")));
    }
    if n_rho < 2 || n_z < 2 {
        return Err(Error::invalid("n", "at least two nodes per axis are required"));
    }
    let solver = FieldSolver::for_trap(config)?;
    let rho = linspace(rho_range.0, rho_range.1, n_rho);
    let z = linspace(z_range.0, z_range.1, n_z);
    let samples: Vec<FieldSample> = (0..n_z * n_rho)
        .into_par_iter()
        .map(|idx| {
            let (iz, ir) = (idx / n_rho, idx % n_rho);
            solver.sample(z[iz], rho[ir]).map_err(|e| Error::FieldMapPoint {
                rho: rho[ir],
                z: z[iz],
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;

    let prefactor = config.pseudopotential_prefactor();
    let shape = (n_z, n_rho);
    let pick = |f: &dyn Fn(&FieldSample) -> f64| {
        Array2::from_shape_vec(shape, samples.iter().map(f).collect()).expect("grid shape")
    };
    Ok(FieldMap {
        kappa: pick(&|s| s.kappa),
        d_dz: pick(&|s| s.d_dz),
        d_drho: pick(&|s| s.d_drho),
        psi: pick(&|s| prefactor * s.gradient_squared()),
        degraded: samples.iter().any(|s| s.degraded),
        rho,
        z,
    })
}

impl FieldMap {
    pub fn n_rho(&self) -> usize {
        self.rho.len()
    }

    pub fn n_z(&self) -> usize {
        self.z.len()
    }

    /// Discrete cylindrical Laplacian κ_zz + κ_ρρ + κ_ρ/ρ at interior nodes
    /// with ρ > 0; other entries are NaN.
    pub fn laplacian(&self) -> Array2<f64> {
        let (nz, nr) = (self.n_z(), self.n_rho());
        let mut out = Array2::from_elem((nz, nr), f64::NAN);
        if nz < 3 || nr < 3 {
            return out;
        }
        let hz = self.z[1] - self.z[0];
        let hr = self.rho[1] - self.rho[0];
        let k = &self.kappa;
        for iz in 1..nz - 1 {
            for ir in 1..nr - 1 {
                let r = self.rho[ir];
                if r <= 0.0 {
                    continue;
                }
                let kzz = (k[[iz + 1, ir]] - 2.0 * k[[iz, ir]] + k[[iz - 1, ir]]) / (hz * hz);
                let krr = (k[[iz, ir + 1]] - 2.0 * k[[iz, ir]] + k[[iz, ir - 1]]) / (hr * hr);
                let kr = (k[[iz, ir + 1]] - k[[iz, ir - 1]]) / (2.0 * hr);
                out[[iz, ir]] = kzz + krr + kr / r;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trap::{IonSpecies, RfDrive, RingGeometry};

    fn config() -> TrapConfig {
        TrapConfig::new(
            RingGeometry::new(0.651679e-3, 3.57668e-3).unwrap(),
            RfDrive::from_frequency_hz(300.0, 8e6, 0.0).unwrap(),
            IonSpecies::strontium_88(),
        )
    }

    #[test]
    fn rejects_bad_grids() {
        let c = config();
        assert!(field_map(&c, (0.0, 1e-3), (0.0, 1e-3), 4, 4).is_err());
        assert!(field_map(&c, (1e-3, 0.0), (0.5e-3, 1e-3), 4, 4).is_err());
        assert!(field_map(&c, (0.0, 1e-3), (0.5e-3, 1e-3), 1, 4).is_err());
    }

    #[test]
    fn node_is_column_minimum() {
        let c = config();
        let z0 = 0.999_999_826_946_730_2e-3;
        // odd node count centred on z0 places a grid line on the node
        let m = field_map(&c, (0.0, 0.4e-3), (z0 - 0.3e-3, z0 + 0.3e-3), 5, 13).unwrap();
        let col: Vec<f64> = (0..m.n_z()).map(|iz| m.psi[[iz, 0]]).collect();
        let (imin, _) = col
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap();
        assert_eq!(imin, 6);
        assert!(m.psi.iter().all(|p| *p >= 0.0));
        assert!(!m.degraded);
    }

    #[test]
    fn kappa_is_harmonic() {
        let c = config();
        let z0 = 1e-3;
        let m = field_map(&c, (0.0, 0.5e-3), (0.7e-3, 1.3e-3), 21, 25).unwrap();
        let lap = m.laplacian();
        let worst = lap.iter().filter(|v| v.is_finite()).fold(0.0f64, |a, v| a.max(v.abs()));
        assert!(worst * z0 * z0 < 1e-3, "{worst}");
    }

    #[test]
    fn deterministic() {
        let c = config();
        let a = field_map(&c, (0.0, 1e-3), (0.5e-3, 1.5e-3), 6, 7).unwrap();
        let b = field_map(&c, (0.0, 1e-3), (0.5e-3, 1.5e-3), 6, 7).unwrap();
        assert_eq!(a.psi, b.psi);
        assert_eq!(a.kappa, b.kappa);
    }
}
