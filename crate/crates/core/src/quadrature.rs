//! Adaptive Gauss–Kronrod (7/15) quadrature of vector-valued integrands over
//! a sequence of panels.
//!
//! The field integrals are oscillatory, so callers split the range into
//! panels no wider than half an oscillation period; each panel is then
//! refined by bisection until its local error estimate meets its share of
//! the absolute tolerance.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5] and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Result of an integration: value and estimated absolute error per component.
#[derive(Debug, Clone, Copy)]
pub struct Integral<const N: usize> {
    pub value: [f64; N],
    pub error: f64,
    pub evaluations: usize,
}

/// One 15-point Kronrod evaluation on [lo, hi]: returns (kronrod, |kronrod - gauss|_max, sum |f| h).
fn gk15<const N: usize, F>(f: &F, lo: f64, hi: f64) -> ([f64; N], f64, f64)
where
    F: Fn(f64) -> [f64; N],
{
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);
    let mut kron = [0.0; N];
    let mut gauss = [0.0; N];
    let mut resabs = 0.0;
    for c in 0..N {
        kron[c] = fc[c] * WGK[7];
        gauss[c] = fc[c] * WG[3];
        resabs += (fc[c] * WGK[7]).abs();
    }
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        for c in 0..N {
            let s = f1[c] + f2[c];
            kron[c] += WGK[j] * s;
            resabs += WGK[j] * (f1[c].abs() + f2[c].abs());
            if j % 2 == 1 {
                gauss[c] += WG[j / 2] * s;
            }
        }
    }
    let mut err: f64 = 0.0;
    for c in 0..N {
        kron[c] *= half;
        gauss[c] *= half;
        err = err.max((kron[c] - gauss[c]).abs());
    }
    (kron, err, resabs * half.abs())
}

/// Integrates `f` over [lo, hi] split into equal panels of width at most
/// `max_panel`.
///
/// Panels that miss their share of `abs_tol` are bisected worst-first until
/// the summed error estimate meets `abs_tol`; running out of `max_splits`
/// bisections returns [`Error::Quadrature`].
pub fn integrate_panels<const N: usize, F>(
    f: F,
    lo: f64,
    hi: f64,
    max_panel: f64,
    abs_tol: f64,
    max_splits: usize,
) -> Result<Integral<N>>
where
    F: Fn(f64) -> [f64; N],
{
    let total = integrate_panels_best_effort(f, lo, hi, max_panel, abs_tol, max_splits);
    if total.error > abs_tol {
        return Err(Error::Quadrature {
            tolerance: abs_tol,
            estimate: total.error,
        });
    }
    Ok(total)
}

/// As [`integrate_panels`], but returns whatever estimate the split budget
/// allowed; the caller inspects `error`.
pub fn integrate_panels_best_effort<const N: usize, F>(
    f: F,
    lo: f64,
    hi: f64,
    max_panel: f64,
    abs_tol: f64,
    max_splits: usize,
) -> Integral<N>
where
    F: Fn(f64) -> [f64; N],
{
    let span = hi - lo;
    let mut total = Integral {
        value: [0.0; N],
        error: 0.0,
        evaluations: 0,
    };
    if span <= 0.0 {
        return total;
    }
    let n_panels = (span / max_panel).ceil().max(1.0) as usize;
    let width = span / n_panels as f64;
    let mut pending = BinaryHeap::new();
    let mut pending_error = 0.0;
    let accept = |total: &mut Integral<N>, val: [f64; N], err: f64| {
        for c in 0..N {
            total.value[c] += val[c];
        }
        total.error += err;
    };
    let evaluate = |a: f64, b: f64, total: &mut Integral<N>| {
        let (val, err, resabs) = gk15(&f, a, b);
        total.evaluations += 15;
        // below this floor the estimate is roundoff, and bisecting cannot help
        let settled = err <= 50.0 * f64::EPSILON * resabs;
        Piece { a, b, val, err, settled }
    };
    for p in 0..n_panels {
        let a = lo + p as f64 * width;
        let b = if p + 1 == n_panels { hi } else { a + width };
        let piece = evaluate(a, b, &mut total);
        if piece.settled || piece.err <= abs_tol * (b - a) / span {
            accept(&mut total, piece.val, piece.err);
        } else {
            pending_error += piece.err;
            pending.push(piece);
        }
    }
    let mut splits = 0;
    while total.error + pending_error > abs_tol {
        let Some(worst) = pending.pop() else { break };
        if splits >= max_splits {
            pending.push(worst);
            break;
        }
        splits += 1;
        pending_error -= worst.err;
        let mid = 0.5 * (worst.a + worst.b);
        for (a, b) in [(worst.a, mid), (mid, worst.b)] {
            let piece = evaluate(a, b, &mut total);
            if piece.settled {
                accept(&mut total, piece.val, piece.err);
            } else {
                pending_error += piece.err;
                pending.push(piece);
            }
        }
    }
    for piece in pending {
        accept(&mut total, piece.val, piece.err);
    }
    total
}

struct Piece<const N: usize> {
    a: f64,
    b: f64,
    val: [f64; N],
    err: f64,
    settled: bool,
}

impl<const N: usize> PartialEq for Piece<N> {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}

impl<const N: usize> Eq for Piece<N> {}

impl<const N: usize> PartialOrd for Piece<N> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<const N: usize> Ord for Piece<N> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_for_polynomials() {
        // K15 is exact through degree 22, G7 through 13; above that the
        // estimate is pessimistic but the value stays exact.
        for p in 0..=22 {
            let tol = if p <= 13 { 1e-14 } else { 1.0 };
            let r = integrate_panels(|x| [x.powi(p)], -1.0, 1.0, 10.0, tol, 0).unwrap();
            let exact = if p % 2 == 0 { 2.0 / (p as f64 + 1.0) } else { 0.0 };
            assert!((r.value[0] - exact).abs() < 1e-14, "degree {p}");
        }
    }

    #[test]
    fn oscillatory_damped() {
        // ∫₀^∞ e^{-x} cos(10x) dx = 1/101
        let r = integrate_panels(
            |x| [(-x).exp() * (10.0 * x).cos(), (-x).exp() * (10.0 * x).sin()],
            0.0,
            40.0,
            0.3,
            1e-13,
            20,
        )
        .unwrap();
        assert!((r.value[0] - 1.0 / 101.0).abs() < 1e-13);
        assert!((r.value[1] - 10.0 / 101.0).abs() < 1e-13);
    }

    #[test]
    fn refines_sharp_features() {
        // narrow Lorentzian in a single wide panel
        let eps = 1e-3;
        let r = integrate_panels(|x| [eps / (x * x + eps * eps)], -1.0, 1.0, 2.0, 1e-10, 400).unwrap();
        let exact = 2.0 * (1.0 / eps).atan();
        assert!((r.value[0] - exact).abs() < 1e-9);
    }

    #[test]
    fn reports_failure_when_depth_exhausted() {
        let r = integrate_panels(|x| [(1.0 / x.abs().max(1e-300)).sin()], -1.0, 1.0, 2.0, 1e-14, 50);
        assert!(matches!(r, Err(Error::Quadrature { .. })));
    }
}
