//! Complex Gamma function by the Lanczos approximation (g = 7, nine terms)
//! with the reflection formula on the left half plane.

use crate::error::{Error, Result};
use crate::scalar::{as_integer, re, Real, C};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_P: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos_right<T: Real>(z: C<T>) -> C<T> {
    let z = z - T::one();
    let mut acc = re(T::lit(LANCZOS_P[0]));
    for (k, p) in LANCZOS_P.iter().enumerate().skip(1) {
        acc += re(T::lit(*p)) / (z + T::of(k));
    }
    let t = z + T::lit(LANCZOS_G + 0.5);
    let sqrt_two_pi = (T::PI() + T::PI()).sqrt();
    ((z + T::lit(0.5)) * t.ln() - t).exp() * acc * sqrt_two_pi
}

fn is_pole<T: Real>(z: C<T>) -> bool {
    z.im == T::zero() && matches!(as_integer(z.re), Some(n) if n <= 0)
}

/// Γ(z) for complex `z`; non-positive integers are reported as poles.
pub fn gamma<T: Real>(z: C<T>) -> Result<C<T>> {
    if is_pole(z) {
        return Err(Error::GammaPole(format!("{}", z.re)));
    }
    if z.re < T::lit(0.5) {
        let s = (z * T::PI()).sin();
        Ok(re(T::PI()) / (s * lanczos_right(C::new(T::one(), T::zero()) - z)))
    } else {
        Ok(lanczos_right(z))
    }
}

/// Γ of a real argument.
pub fn gamma_real<T: Real>(x: T) -> Result<T> {
    gamma(re(x)).map(|g| g.re)
}

/// 1/Γ(z), entire: zero at the poles of Γ.
pub fn rgamma<T: Real>(z: C<T>) -> C<T> {
    if is_pole(z) {
        return C::new(T::zero(), T::zero());
    }
    if z.re < T::lit(0.5) {
        (z * T::PI()).sin() * lanczos_right(C::new(T::one(), T::zero()) - z) / T::PI()
    } else {
        C::new(T::one(), T::zero()) / lanczos_right(z)
    }
}

/// n! as a float.
pub fn factorial<T: Real>(n: usize) -> T {
    (1..=n).fold(T::one(), |acc, k| acc * T::of(k))
}

/// Binomial coefficient C(n, k) as a float.
pub fn binomial<T: Real>(n: usize, k: usize) -> T {
    if k > n {
        return T::zero();
    }
    let k = k.min(n - k);
    (0..k).fold(T::one(), |acc, j| acc * T::of(n - j) / T::of(j + 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    // Independent oracle: Stirling series after shifting the argument far to the right.
    fn stirling(z: Complex64) -> Complex64 {
        let shift = 20;
        let mut w = z;
        let mut prod = Complex64::new(1.0, 0.0);
        for _ in 0..shift {
            prod *= w;
            w += 1.0;
        }
        let inv = 1.0 / w;
        let inv2 = inv * inv;
        let series = inv
            * (1.0 / 12.0
                - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 * (1.0 / 1680.0 - inv2 / 1188.0))));
        let ln = (w - 0.5) * w.ln() - w + 0.5 * (2.0 * std::f64::consts::PI).ln() + series;
        ln.exp() / prod
    }

    #[test]
    fn known_real_values() {
        assert!((gamma_real(0.5f64).unwrap() - std::f64::consts::PI.sqrt()).abs() < 1e-14);
        assert!((gamma_real(5.0f64).unwrap() - 24.0).abs() < 1e-11);
        assert!((gamma_real(1.5f64).unwrap() - 0.886_226_925_452_758).abs() < 1e-14);
        assert!((gamma_real(-0.5f64).unwrap() + 2.0 * std::f64::consts::PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn matches_stirling_oracle_off_axis() {
        for &(a, b) in &[(1.0, 1.0), (0.3, -2.0), (-1.7, 0.4), (4.2, 3.3), (-3.5, -1.0), (0.5, 0.0)] {
            let z = Complex64::new(a, b);
            let g = gamma(z).unwrap();
            let o = stirling(z);
            assert!((g - o).norm() / o.norm() < 1e-12, "z={z} g={g} o={o}");
        }
    }

    #[test]
    fn poles_are_rejected_and_rgamma_vanishes() {
        assert!(matches!(gamma(Complex64::new(-2.0, 0.0)), Err(Error::GammaPole(_))));
        assert_eq!(rgamma(Complex64::new(0.0, 0.0)).norm(), 0.0);
        let z = Complex64::new(0.25, 0.75);
        assert!((rgamma(z) * gamma(z).unwrap() - 1.0).norm() < 1e-13);
    }

    #[test]
    fn single_precision_is_usable() {
        let g = gamma_real(0.5f32).unwrap();
        assert!((g - std::f32::consts::PI.sqrt()).abs() < 1e-5);
    }

    #[test]
    fn factorials_and_binomials() {
        assert_eq!(factorial::<f64>(5), 120.0);
        assert_eq!(binomial::<f64>(6, 2), 15.0);
        assert_eq!(binomial::<f64>(3, 5), 0.0);
    }
}
