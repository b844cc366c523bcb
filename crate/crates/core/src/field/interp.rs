use ndarray::Array2;

use super::{field_map, FieldMap};
use crate::error::{Error, Result};
use crate::trap::TrapConfig;

/// Gradient of κ and its first derivatives at an interpolated point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldDerivatives {
    pub d_dz: f64,
    pub d_drho: f64,
    pub d_dz_dz: f64,
    pub d_dz_drho: f64,
    pub d_drho_dz: f64,
    pub d_drho_drho: f64,
}

/// Bicubic (Catmull–Rom) interpolation of a precomputed ∇κ map.
///
/// When the map starts at ρ = 0 the stencil is continued across the axis
/// using the parity of each component (∂κ/∂z even, ∂κ/∂ρ odd in ρ).
#[derive(Debug, Clone)]
pub struct InterpolatedField {
    rho0: f64,
    h_rho: f64,
    z0: f64,
    h_z: f64,
    d_dz: Array2<f64>,
    d_drho: Array2<f64>,
    mirror: bool,
}

// Catmull–Rom weights and their t-derivatives for stencil offsets -1, 0, 1, 2.
fn cubic_weights(t: f64) -> ([f64; 4], [f64; 4]) {
    let (t2, t3) = (t * t, t * t * t);
    (
        [
            0.5 * (-t3 + 2.0 * t2 - t),
            0.5 * (3.0 * t3 - 5.0 * t2 + 2.0),
            0.5 * (-3.0 * t3 + 4.0 * t2 + t),
            0.5 * (t3 - t2),
        ],
        [
            0.5 * (-3.0 * t2 + 4.0 * t - 1.0),
            0.5 * (9.0 * t2 - 10.0 * t),
            0.5 * (-9.0 * t2 + 8.0 * t + 1.0),
            0.5 * (3.0 * t2 - 2.0 * t),
        ],
    )
}

fn is_uniform(v: &[f64]) -> bool {
    let h = v[1] - v[0];
    v.windows(2).all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h.abs())
}

impl InterpolatedField {
    pub fn from_map(map: &FieldMap) -> Result<Self> {
        if map.n_rho() < 4 || map.n_z() < 4 {
            return Err(Error::invalid("map", "interpolation needs at least 4 nodes per axis"));
        }
        if !is_uniform(&map.rho) || !is_uniform(&map.z) {
            return Err(Error::invalid("map", "grid must be uniform"));
        }
        Ok(InterpolatedField {
            rho0: map.rho[0],
            h_rho: map.rho[1] - map.rho[0],
            z0: map.z[0],
            h_z: map.z[1] - map.z[0],
            d_dz: map.d_dz.clone(),
            d_drho: map.d_drho.clone(),
            mirror: map.rho[0] == 0.0,
        })
    }

    /// Computes a map over [0, rho_max] × z_range and wraps it.
    pub fn build(config: &TrapConfig, rho_max: f64, z_range: (f64, f64), n_rho: usize, n_z: usize) -> Result<Self> {
        Self::from_map(&field_map(config, (0.0, rho_max), z_range, n_rho, n_z)?)
    }

    /// Region where a full interpolation stencil is available: ((ρ_lo, ρ_hi), (z_lo, z_hi)).
    pub fn extent(&self) -> ((f64, f64), (f64, f64)) {
        let (nz, nr) = self.d_dz.dim();
        let rho_lo = if self.mirror { self.rho0 } else { self.rho0 + self.h_rho };
        (
            (rho_lo, self.rho0 + (nr - 2) as f64 * self.h_rho),
            (self.z0 + self.h_z, self.z0 + (nz - 2) as f64 * self.h_z),
        )
    }

    pub fn contains(&self, rho: f64, z: f64) -> bool {
        let ((r0, r1), (z0, z1)) = self.extent();
        rho >= r0 && rho <= r1 && z >= z0 && z <= z1
    }

    fn locate(s: f64, lo: f64, n: usize) -> Option<(isize, f64)> {
        if !(s >= lo && s <= (n - 2) as f64) {
            return None;
        }
        let i = (s.floor() as isize).min(n as isize - 3);
        Some((i, s - i as f64))
    }

    fn value(&self, arr: &Array2<f64>, odd: bool, iz: usize, ir: isize) -> f64 {
        if ir < 0 {
            let v = arr[[iz, (-ir) as usize]];
            if odd {
                -v
            } else {
                v
            }
        } else {
            arr[[iz, ir as usize]]
        }
    }

    pub fn derivatives(&self, rho: f64, z: f64) -> Result<FieldDerivatives> {
        let (nz, nr) = self.d_dz.dim();
        let out = || Error::OutOfExtent { rho, z };
        let sr = (rho - self.rho0) / self.h_rho;
        let sz = (z - self.z0) / self.h_z;
        let (ir, tr) = Self::locate(sr, if self.mirror { 0.0 } else { 1.0 }, nr).ok_or_else(out)?;
        let (iz, tz) = Self::locate(sz, 1.0, nz).ok_or_else(out)?;
        let (wr, dwr) = cubic_weights(tr);
        let (wz, dwz) = cubic_weights(tz);

        let mut acc = [0.0; 6];
        for (a, jz) in (iz - 1..=iz + 2).enumerate() {
            let jz = jz as usize;
            for (b, jr) in (ir - 1..=ir + 2).enumerate() {
                let gz = self.value(&self.d_dz, false, jz, jr);
                let gr = self.value(&self.d_drho, true, jz, jr);
                let w = wz[a] * wr[b];
                let w_z = dwz[a] * wr[b];
                let w_r = wz[a] * dwr[b];
                acc[0] += w * gz;
                acc[1] += w * gr;
                acc[2] += w_z * gz;
                acc[3] += w_r * gz;
                acc[4] += w_z * gr;
                acc[5] += w_r * gr;
            }
        }
        Ok(FieldDerivatives {
            d_dz: acc[0],
            d_drho: acc[1],
            d_dz_dz: acc[2] / self.h_z,
            d_dz_drho: acc[3] / self.h_rho,
            d_drho_dz: acc[4] / self.h_z,
            d_drho_drho: acc[5] / self.h_rho,
        })
    }

    /// (∂κ/∂z, ∂κ/∂ρ) at (ρ, z).
    pub fn gradient(&self, rho: f64, z: f64) -> Result<(f64, f64)> {
        let d = self.derivatives(rho, z)?;
        Ok((d.d_dz, d.d_drho))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldSolver;
    use crate::trap::{IonSpecies, RfDrive, RingGeometry};

    fn config() -> TrapConfig {
        TrapConfig::new(
            RingGeometry::new(0.651679, 3.57668).unwrap(),
            RfDrive::new(1.0, 1.0, 0.0).unwrap(),
            IonSpecies::new(1.0, 1.0).unwrap(),
        )
    }

    #[test]
    fn reproduces_quadrature_between_nodes() {
        let c = config();
        let f = InterpolatedField::build(&c, 0.6, (0.6, 1.4), 31, 41).unwrap();
        let solver = FieldSolver::for_trap(&c).unwrap();
        for &(rho, z) in &[(0.013, 0.91), (0.0, 1.07), (0.31, 1.2), (0.47, 0.77)] {
            let (gz, gr) = f.gradient(rho, z).unwrap();
            let s = solver.sample(z, rho).unwrap();
            assert!((gz - s.d_dz).abs() < 2e-5, "gz at {rho},{z}");
            assert!((gr - s.d_drho).abs() < 2e-5, "gr at {rho},{z}");
        }
    }

    #[test]
    fn exact_on_nodes_and_odd_across_axis() {
        let c = config();
        let m = field_map(&c, (0.0, 0.5), (0.5, 1.5), 11, 11).unwrap();
        let f = InterpolatedField::from_map(&m).unwrap();
        let (gz, gr) = f.gradient(m.rho[3], m.z[4]).unwrap();
        assert!((gz - m.d_dz[[4, 3]]).abs() < 1e-14);
        assert!((gr - m.d_drho[[4, 3]]).abs() < 1e-14);
        let (_, g_axis) = f.gradient(0.0, 1.0).unwrap();
        assert!(g_axis.abs() < 1e-14);
    }

    #[test]
    fn out_of_extent() {
        let c = config();
        let f = InterpolatedField::build(&c, 0.5, (0.5, 1.5), 8, 8).unwrap();
        assert!(matches!(f.gradient(0.1, 0.45), Err(Error::OutOfExtent { .. })));
        assert!(f.gradient(0.49, 1.0).is_err());
        assert!(f.contains(0.0, 1.0));
    }
}
