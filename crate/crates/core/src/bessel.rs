//! Bessel functions of the first kind, orders 0 and 1.
//!
//! Backed by the fdlibm rational approximations shipped in `libm`, which
//! hold the absolute error well below 1e-12 over the whole real line.

/// J₀(x).
#[inline]
pub fn j0(x: f64) -> f64 {
    libm::j0(x)
}

/// J₁(x).
#[inline]
pub fn j1(x: f64) -> f64 {
    libm::j1(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    // Power series, accurate to ~1e-14 absolute for |x| <= 8.
    fn series(nu: u32, x: f64) -> f64 {
        let h = 0.5 * x;
        let mut term = if nu == 0 { 1.0 } else { h };
        let mut sum = term;
        for k in 1..80 {
            let k = k as f64;
            term *= -h * h / (k * (k + nu as f64));
            sum += term;
        }
        sum
    }

    // Hankel asymptotic expansion; error ~ e^{-2x} at its optimal truncation.
    fn asymptotic(nu: u32, x: f64) -> f64 {
        let mu = 4.0 * (nu * nu) as f64;
        let mut p = 1.0;
        let mut q = 0.0;
        let mut term = 1.0;
        for k in 1..40 {
            let kk = k as f64;
            term *= (mu - (2.0 * kk - 1.0).powi(2)) / (kk * 8.0 * x);
            if k % 2 == 1 {
                q += if (k / 2) % 2 == 0 { term } else { -term };
            } else {
                p += if (k / 2) % 2 == 0 { term } else { -term };
            }
        }
        let chi = x - (0.5 * nu as f64 + 0.25) * PI;
        (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
    }

    #[test]
    fn matches_series_below_eight() {
        for i in 0..=800 {
            let x = i as f64 * 0.01;
            assert!((j0(x) - series(0, x)).abs() < 1e-12, "j0({x})");
            assert!((j1(x) - series(1, x)).abs() < 1e-12, "j1({x})");
        }
    }

    #[test]
    fn matches_asymptotic_far_out() {
        for i in 0..200 {
            let x = 40.0 + i as f64 * 1.37;
            assert!((j0(x) - asymptotic(0, x)).abs() < 1e-12, "j0({x})");
            assert!((j1(x) - asymptotic(1, x)).abs() < 1e-12, "j1({x})");
        }
    }

    #[test]
    fn reference_values() {
        assert!((j0(1.0) - 0.765_197_686_557_966_6).abs() < 1e-15);
        assert!((j1(1.0) - 0.440_050_585_744_933_5).abs() < 1e-15);
        assert!(j0(2.404_825_557_695_773).abs() < 1e-15);
        assert!(j1(3.831_705_970_207_512).abs() < 1e-15);
        assert_eq!(j1(0.0), 0.0);
        assert_eq!(j0(0.0), 1.0);
    }
}
