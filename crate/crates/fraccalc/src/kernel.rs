//! Orders of differintegration and the one-sided kernels `D±^α(w)` together with their
//! ε-regularized forms.

use crate::branchcut::{principal_power, Approach, CutOrientation, UnitPhase};
use crate::error::{Error, Result};
use crate::quad::{Quad, QuadratureConfig};
use crate::scalar::{as_integer, cx, re, Real, C};
use crate::special::gamma;

/// Arithmetic class of an order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OrderClass {
    NonNegInteger,
    NegInteger,
    /// Real rational `p/q` in lowest terms, `q ≥ 2`.
    RationalPQ(i64, i64),
    Other,
}

/// Complex order `α = α1 + iα2` split as `α1 = n + Δα`, `0 ≤ Δα < 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Order<T> {
    pub value: C<T>,
    pub n: i64,
    pub delta: T,
    pub class: OrderClass,
}

const MAX_DENOMINATOR: i64 = 1000;

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

// Smallest-denominator rational reproducing x to 1e-12, via continued fractions.
fn detect_rational<T: Real>(x: T) -> Option<(i64, i64)> {
    let xf = x.to_f64_lossy();
    let (mut h0, mut h1) = (0i64, 1i64);
    let (mut k0, mut k1) = (1i64, 0i64);
    let mut y = xf;
    for _ in 0..40 {
        let a = y.floor();
        if a.abs() > 1e12 {
            return None;
        }
        let a = a as i64;
        let h2 = a.checked_mul(h1)?.checked_add(h0)?;
        let k2 = a.checked_mul(k1)?.checked_add(k0)?;
        if k2 > MAX_DENOMINATOR {
            return None;
        }
        if (h2 as f64 / k2 as f64 - xf).abs() <= 1e-12 * xf.abs().max(1.0) {
            return Some((h2, k2));
        }
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
        let frac = y - y.floor();
        if frac == 0.0 {
            return None;
        }
        y = 1.0 / frac;
    }
    None
}

impl<T: Real> Order<T> {
    pub fn new(value: C<T>) -> Self {
        let n = value.re.floor();
        let delta = value.re - n;
        let n_int = n.to_f64_lossy() as i64;
        let class = if value.im != T::zero() {
            OrderClass::Other
        } else if let Some(k) = as_integer(value.re) {
            if k >= 0 {
                OrderClass::NonNegInteger
            } else {
                OrderClass::NegInteger
            }
        } else if let Some((p, q)) = detect_rational(value.re) {
            OrderClass::RationalPQ(p, q)
        } else {
            OrderClass::Other
        };
        Self { value, n: n_int, delta, class }
    }

    pub fn real(a: T) -> Self {
        Self::new(re(a))
    }

    pub fn complex(a1: T, a2: T) -> Self {
        Self::new(cx(a1, a2))
    }

    /// Exact rational order `p/q`.
    pub fn rational(p: i64, q: i64) -> Result<Self> {
        if q <= 0 {
            return Err(Error::Input("denominator must be positive".into()));
        }
        let g = gcd(p, q);
        let (p, q) = (p / g, q / g);
        let mut o = Self::real(T::lit(p as f64) / T::lit(q as f64));
        if q > 1 {
            o.class = OrderClass::RationalPQ(p, q);
        }
        Ok(o)
    }

    pub fn alpha1(&self) -> T {
        self.value.re
    }

    pub fn alpha2(&self) -> T {
        self.value.im
    }

    pub fn is_integer(&self) -> bool {
        matches!(self.class, OrderClass::NonNegInteger | OrderClass::NegInteger)
    }

    /// The integer value for integer orders.
    pub fn integer(&self) -> Option<i64> {
        if self.is_integer() {
            Some(self.n)
        } else {
            None
        }
    }

    pub fn add(&self, other: &Order<T>) -> Order<T> {
        match (self.class, other.class) {
            (OrderClass::RationalPQ(p1, q1), OrderClass::RationalPQ(p2, q2)) => {
                Order::rational(p1 * q2 + p2 * q1, q1 * q2).unwrap_or_else(|_| Order::new(self.value + other.value))
            }
            _ => Order::new(self.value + other.value),
        }
    }
}

fn check_not_negative_integer<T: Real>(a: &Order<T>) -> Result<()> {
    if a.class == OrderClass::NegInteger {
        return Err(Error::GammaPole(format!("α = {}", a.n)));
    }
    Ok(())
}

/// `((-1)^{α+1}Γ(α+1)/2iπ)·((w+iε)^{-α-1} - (w-iε)^{-α-1})` with powers cut along the side's axis.
pub fn kernel_eps<T: Real>(alpha: &Order<T>, w: T, eps: T, side: CutOrientation) -> Result<C<T>> {
    kernel_eps_with_phase(alpha, w, eps, side, 0)
}

/// [`kernel_eps`] with an explicit branch `n` of the unit phase.
pub fn kernel_eps_with_phase<T: Real>(alpha: &Order<T>, w: T, eps: T, side: CutOrientation, n: i64) -> Result<C<T>> {
    if !(eps > T::zero()) {
        return Err(Error::Input("ε must be positive".into()));
    }
    check_not_negative_integer(alpha)?;
    let a1 = alpha.value + T::one();
    let g = gamma(a1)?;
    let unit = UnitPhase::new(a1, n).value;
    let p = principal_power(cx(w, eps), -a1, side, Approach::FromAbove)?;
    let m = principal_power(cx(w, -eps), -a1, side, Approach::FromAbove)?;
    let two_i_pi = cx(T::zero(), T::PI() + T::PI());
    Ok(unit * g / two_i_pi * (p - m))
}

/// ε → 0 limit of [`kernel_eps`]: `w^{-α-1}/Γ(-α)` on the supporting side, exact zero on the other.
///
/// Negative integer orders give the repeated-integral kernel `|w|^{n-1}/(n-1)!`.
pub fn kernel_limit<T: Real>(alpha: &Order<T>, w: T, side: CutOrientation) -> Result<C<T>> {
    if w == T::zero() {
        return Err(Error::Domain("kernel is singular at w = 0".into()));
    }
    if alpha.class == OrderClass::NonNegInteger {
        return Err(Error::NotAFunction(alpha.n));
    }
    let a1 = alpha.value + T::one();
    // Γ(α+1) sin((α+1)π)/π = 1/Γ(-α), finite also at negative integers.
    let coeff = crate::special::rgamma(-alpha.value);
    let mag = (-a1 * w.abs().ln()).exp();
    match side {
        CutOrientation::PlusAxis => {
            if w < T::zero() {
                Ok(C::new(T::zero(), T::zero()))
            } else {
                Ok(coeff * mag)
            }
        }
        CutOrientation::MinusAxis => {
            if w > T::zero() {
                Ok(C::new(T::zero(), T::zero()))
            } else {
                let phase = (a1 * cx(T::zero(), T::PI())).exp();
                Ok(-(phase * coeff * mag))
            }
        }
    }
}

/// `∫_{-R}^{R} kernel_eps(0, w, ε) dw`, which tends to 1 as `R/ε → ∞`.
pub fn delta_moment_check<T: Real>(eps: T, r: T) -> Result<T> {
    if !(eps > T::zero()) || !(r > T::zero()) {
        return Err(Error::Input("ε and R must be positive".into()));
    }
    let zero = Order::real(T::zero());
    let q = Quad::new(QuadratureConfig::default())?;
    let f = |w: T| kernel_eps(&zero, w, eps, CutOrientation::PlusAxis).unwrap_or(C::new(T::nan(), T::zero()));
    // Panels grade away from the peak at w = 0.
    let half_width = eps.min(r);
    let inner = q.adaptive(&f, -half_width, half_width, T::lit(1e-15))?;
    let outer = if r > half_width { q.graded(&f, half_width, r, inner.value.norm())? } else { crate::quad::Est::zero() };
    Ok(inner.value.re + T::lit(2.0) * outer.value.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn o(a: f64) -> Order<f64> {
        Order::real(a)
    }

    fn five_point(f: impl Fn(f64) -> Complex64, x: f64, h: f64) -> Complex64 {
        (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
    }

    #[test]
    fn order_decomposition() {
        let a = o(-1.25);
        assert_eq!(a.n, -2);
        assert!((a.delta - 0.75).abs() < 1e-15);
        assert_eq!(a.class, OrderClass::RationalPQ(-5, 4));
        assert_eq!(o(3.0).class, OrderClass::NonNegInteger);
        assert_eq!(o(-2.0).class, OrderClass::NegInteger);
        assert_eq!(o(0.5f64.sqrt()).class, OrderClass::Other);
        assert_eq!(Order::<f64>::complex(0.5, 0.2).class, OrderClass::Other);
        assert_eq!(Order::<f64>::rational(6, 4).unwrap().class, OrderClass::RationalPQ(3, 2));
    }

    #[test]
    fn poisson_kernel_at_order_zero() {
        let v = kernel_eps(&o(0.0), 0.0, 1.0, CutOrientation::PlusAxis).unwrap();
        assert!((v - 1.0 / PI).norm() < 1e-15);
        let mut s: u64 = 7;
        for _ in 0..20 {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let w = ((s >> 11) as f64 / (1u64 << 53) as f64 - 0.5) * 10.0;
            let eps = 0.01 + ((s >> 20) % 1000) as f64 / 400.0;
            for side in [CutOrientation::PlusAxis, CutOrientation::MinusAxis] {
                let v = kernel_eps(&o(0.0), w, eps, side).unwrap();
                let expect = eps / (PI * (w * w + eps * eps));
                assert!((v - expect).norm() < 1e-13 * expect.max(1.0));
            }
        }
    }

    #[test]
    fn first_order_is_derivative_of_zeroth() {
        for &(w, eps) in &[(0.3, 0.5), (-1.2, 0.2), (2.0, 1.0)] {
            let d = five_point(|x| kernel_eps(&o(0.0), x, eps, CutOrientation::PlusAxis).unwrap(), w, 1e-3);
            let v = kernel_eps(&o(1.0), w, eps, CutOrientation::PlusAxis).unwrap();
            assert!((d - v).norm() < 1e-6 * v.norm().max(1e-3));
        }
    }

    #[test]
    fn limit_examples() {
        assert_eq!(kernel_limit(&o(0.5), -1.0, CutOrientation::PlusAxis).unwrap(), Complex64::new(0.0, 0.0));
        let v = kernel_limit(&o(0.5), 1.0, CutOrientation::PlusAxis).unwrap();
        assert!((v.re + 0.282_094_791_773_878_1).abs() < 1e-13 && v.im.abs() < 1e-15);
        assert_eq!(kernel_limit(&o(0.5), 1.0, CutOrientation::MinusAxis).unwrap(), Complex64::new(0.0, 0.0));
        assert_eq!(kernel_limit(&o(2.0), 1.0, CutOrientation::PlusAxis), Err(Error::NotAFunction(2)));
        assert!(matches!(kernel_limit(&o(0.5), 0.0, CutOrientation::PlusAxis), Err(Error::Domain(_))));
        // Two-fold integral kernel.
        let v = kernel_limit(&o(-2.0), 3.0, CutOrientation::PlusAxis).unwrap();
        assert!((v.re - 3.0).abs() < 1e-12);
    }

    #[test]
    fn limit_is_reached_as_eps_shrinks() {
        for side in [CutOrientation::PlusAxis, CutOrientation::MinusAxis] {
            let a = Order::complex(0.4, 0.3);
            for &w in &[1.3, -0.7] {
                let lim = kernel_limit(&a, w, side).unwrap();
                let errs: Vec<f64> = (4..16)
                    .step_by(4)
                    .map(|j| (kernel_eps(&a, w, 2f64.powi(-j), side).unwrap() - lim).norm())
                    .collect();
                assert!(errs[1] < errs[0] * 0.1 && errs[2] < errs[1] * 0.1, "{side:?} {w} {errs:?}");
            }
        }
    }

    #[test]
    fn negative_integer_regularized_kernel_is_a_gamma_pole() {
        assert!(matches!(kernel_eps(&o(-1.0), 1.0, 0.1, CutOrientation::PlusAxis), Err(Error::GammaPole(_))));
    }

    #[test]
    fn delta_moments() {
        assert!((delta_moment_check(1.0f64, 1.0).unwrap() - 0.5).abs() < 1e-12);
        let v = delta_moment_check(0.01, 10.0).unwrap();
        assert!((v - 2.0 / PI * 1000f64.atan()).abs() < 1e-10);
        assert!((2.0 / PI * (1e12f64).atan() - 1.0).abs() < 1e-11);
    }

    proptest! {
        #[test]
        fn recurrence_in_the_order(idx in 0usize..4, w in -3.0f64..3.0, eps in 0.2f64..2.0) {
            let alphas = [Complex64::new(0.0, 0.0), Complex64::new(0.3, 0.0), Complex64::new(0.5, 0.2), Complex64::new(1.7, 0.0)];
            let a = Order::new(alphas[idx]);
            let a_next = Order::new(alphas[idx] + 1.0);
            for side in [CutOrientation::PlusAxis, CutOrientation::MinusAxis] {
                let d = five_point(|x| kernel_eps(&a, x, eps, side).unwrap(), w, 1e-3 * eps);
                let v = kernel_eps(&a_next, w, eps, side).unwrap();
                prop_assert!((d - v).norm() <= 1e-6 * v.norm().max(1e-2), "{d} vs {v}");
            }
        }

        #[test]
        fn one_sided_support(a in -3.5f64..3.5, w in 0.01f64..10.0) {
            prop_assume!(a.fract().abs() > 1e-3);
            prop_assert_eq!(kernel_limit(&o(a), -w, CutOrientation::PlusAxis).unwrap(), Complex64::new(0.0, 0.0));
            prop_assert_eq!(kernel_limit(&o(a), w, CutOrientation::MinusAxis).unwrap(), Complex64::new(0.0, 0.0));
        }

        #[test]
        fn continuous_in_complex_order(a1 in -0.9f64..2.5, a2 in -1.0f64..1.0, w in 0.1f64..4.0) {
            let a = Order::complex(a1, a2);
            let b = Order::complex(a1 + 1e-7, a2 - 1e-7);
            for (x, side) in [(w, CutOrientation::PlusAxis), (-w, CutOrientation::MinusAxis)] {
                let u = kernel_eps(&a, x, 0.3, side).unwrap();
                let v = kernel_eps(&b, x, 0.3, side).unwrap();
                prop_assert!((u - v).norm() <= 1e-5 * u.norm().max(1.0));
            }
        }
    }
}
