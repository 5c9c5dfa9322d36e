//! Built-in test functions and small combinators.

use std::sync::Arc;

use crate::branchcut::CutOrientation;
use crate::quad::Tail;
use crate::realline::{derivative, RealFunction};
use crate::scalar::{cx, i_unit, re, Real, C};
use crate::special::factorial;

/// `exp(c x)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Exp<T> {
    pub c: C<T>,
}

impl<T: Real> Exp<T> {
    pub fn new(c: C<T>) -> Self {
        Self { c }
    }

    pub fn real(c: T) -> Self {
        Self { c: re(c) }
    }
}

impl<T: Real> RealFunction<T> for Exp<T> {
    fn value(&self, x: T) -> C<T> {
        (self.c * x).exp()
    }

    fn deriv(&self, k: usize, x: T) -> Option<C<T>> {
        Some(self.c.powi(k as i32) * (self.c * x).exp())
    }

    fn tail(&self, side: CutOrientation) -> Tail<T> {
        let decays = match side {
            CutOrientation::PlusAxis => self.c.re > T::zero(),
            CutOrientation::MinusAxis => self.c.re < T::zero(),
        };
        if decays {
            Tail::Exponential
        } else {
            Tail::Unknown
        }
    }
}

/// `1/(1 + x²)`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Lorentzian;

impl<T: Real> RealFunction<T> for Lorentzian {
    fn value(&self, x: T) -> C<T> {
        re(T::one() / (T::one() + x * x))
    }

    fn deriv(&self, k: usize, x: T) -> Option<C<T>> {
        // 1/(1+x²) = (1/2i)(1/(x-i) - 1/(x+i)).
        let i = i_unit::<T>();
        let kp = -((k + 1) as i32);
        let s = if k % 2 == 0 { T::one() } else { -T::one() };
        let d = (re(x) - i).powi(kp) - (re(x) + i).powi(kp);
        Some(d * s * factorial::<T>(k) / (i * T::lit(2.0)))
    }

    fn tail(&self, _side: CutOrientation) -> Tail<T> {
        Tail::Algebraic(T::lit(2.0))
    }
}

/// `exp(-x²)`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Gaussian;

impl<T: Real> RealFunction<T> for Gaussian {
    fn value(&self, x: T) -> C<T> {
        re((-x * x).exp())
    }

    fn deriv(&self, k: usize, x: T) -> Option<C<T>> {
        // (-1)^k H_k(x) e^{-x²} with physicists' Hermite polynomials.
        let two = T::lit(2.0);
        let (mut h0, mut h1) = (T::one(), two * x);
        let hk = if k == 0 {
            h0
        } else {
            for j in 1..k {
                let h2 = two * x * h1 - two * T::of(j) * h0;
                h0 = h1;
                h1 = h2;
            }
            h1
        };
        let s = if k % 2 == 0 { T::one() } else { -T::one() };
        Some(re(s * hk * (-x * x).exp()))
    }

    fn tail(&self, _side: CutOrientation) -> Tail<T> {
        Tail::Exponential
    }
}

/// `Σ c_j f_j`.
#[derive(Clone)]
pub struct Combination<T: Real> {
    pub terms: Vec<(C<T>, Arc<dyn RealFunction<T>>)>,
}

fn weaker<T: Real>(a: Tail<T>, b: Tail<T>) -> Tail<T> {
    match (a, b) {
        (Tail::Unknown, _) | (_, Tail::Unknown) => Tail::Unknown,
        (Tail::Algebraic(p), Tail::Algebraic(q)) => Tail::Algebraic(p.min(q)),
        (Tail::Algebraic(p), Tail::Exponential) | (Tail::Exponential, Tail::Algebraic(p)) => Tail::Algebraic(p),
        (Tail::Exponential, Tail::Exponential) => Tail::Exponential,
    }
}

impl<T: Real> RealFunction<T> for Combination<T> {
    fn value(&self, x: T) -> C<T> {
        self.terms.iter().fold(C::new(T::zero(), T::zero()), |acc, (c, f)| acc + *c * f.value(x))
    }

    fn deriv(&self, k: usize, x: T) -> Option<C<T>> {
        let mut acc = C::new(T::zero(), T::zero());
        for (c, f) in &self.terms {
            acc += *c * f.deriv(k, x)?;
        }
        Some(acc)
    }

    fn tail(&self, side: CutOrientation) -> Tail<T> {
        self.terms.iter().map(|(_, f)| f.tail(side)).reduce(weaker).unwrap_or(Tail::Exponential)
    }

    fn real_poles(&self) -> Vec<T> {
        self.terms.iter().flat_map(|(_, f)| f.real_poles()).collect()
    }

    fn scale(&self) -> T {
        self.terms.iter().map(|(_, f)| f.scale()).fold(T::one(), |a, b| a.max(b))
    }
}

/// `f^{(k)}` as a function in its own right.
#[derive(Clone)]
pub struct Derivative<T: Real> {
    pub f: Arc<dyn RealFunction<T>>,
    pub k: usize,
}

impl<T: Real> RealFunction<T> for Derivative<T> {
    fn value(&self, x: T) -> C<T> {
        derivative(&*self.f, self.k, x).0
    }

    fn deriv(&self, j: usize, x: T) -> Option<C<T>> {
        self.f.deriv(self.k + j, x)
    }

    fn tail(&self, side: CutOrientation) -> Tail<T> {
        match self.f.tail(side) {
            Tail::Algebraic(p) => Tail::Algebraic(p + T::of(self.k)),
            t => t,
        }
    }

    fn real_poles(&self) -> Vec<T> {
        self.f.real_poles()
    }

    fn scale(&self) -> T {
        self.f.scale()
    }
}

type ValueFn<T> = dyn Fn(T) -> C<T> + Send + Sync;

/// A function given by a closure and explicit tail behaviour.
#[derive(Clone)]
pub struct FnFunction<T: Real> {
    pub f: Arc<ValueFn<T>>,
    pub tail_minus_inf: Tail<T>,
    pub tail_plus_inf: Tail<T>,
    pub scale: T,
}

impl<T: Real> FnFunction<T> {
    pub fn new(f: impl Fn(T) -> C<T> + Send + Sync + 'static, tail: Tail<T>) -> Self {
        Self { f: Arc::new(f), tail_minus_inf: tail, tail_plus_inf: tail, scale: T::one() }
    }
}

impl<T: Real> RealFunction<T> for FnFunction<T> {
    fn value(&self, x: T) -> C<T> {
        (self.f)(x)
    }

    fn tail(&self, side: CutOrientation) -> Tail<T> {
        match side {
            CutOrientation::PlusAxis => self.tail_minus_inf,
            CutOrientation::MinusAxis => self.tail_plus_inf,
        }
    }

    fn scale(&self) -> T {
        self.scale
    }
}

/// Parses `exp(c)` with real or `a+bi` complex `c`, `lorentzian`, `gaussian`.
pub fn builtin<T: Real>(name: &str) -> Option<Arc<dyn RealFunction<T>>> {
    let name = name.trim();
    match name {
        "lorentzian" => return Some(Arc::new(Lorentzian)),
        "gaussian" => return Some(Arc::new(Gaussian)),
        _ => {}
    }
    let inner = name.strip_prefix("exp(")?.strip_suffix(')')?.trim();
    parse_complex(inner).map(|c| Arc::new(Exp::new(cx(T::lit(c.0), T::lit(c.1)))) as Arc<dyn RealFunction<T>>)
}

/// Parses `a`, `bi`, `a+bi` or `a-bi`.
pub fn parse_complex(s: &str) -> Option<(f64, f64)> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if let Ok(v) = s.parse::<f64>() {
        return Some((v, 0.0));
    }
    let body = s.strip_suffix('i')?;
    let split = body
        .char_indices()
        .skip(1)
        .filter(|&(i, c)| (c == '+' || c == '-') && !body[..i].ends_with(['e', 'E']))
        .map(|(i, _)| i)
        .last();
    let imag = |t: &str| -> Option<f64> {
        match t {
            "" | "+" => Some(1.0),
            "-" => Some(-1.0),
            _ => t.parse().ok(),
        }
    };
    match split {
        Some(i) => Some((body[..i].parse().ok()?, imag(&body[i..])?)),
        None => Some((0.0, imag(body)?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd(f: &dyn RealFunction<f64>, x: f64) -> f64 {
        let h = 1e-5;
        ((f.value(x + h) - f.value(x - h)) / (2.0 * h)).re
    }

    #[test]
    fn derivative_oracles_match_differences() {
        for &x in &[-1.3, 0.0, 0.4, 2.2] {
            for k in 0..4 {
                for f in [&Lorentzian as &dyn RealFunction<f64>, &Gaussian, &Exp::real(0.7)] {
                    let exact = f.deriv(k + 1, x).unwrap().re;
                    let g = Shift { f, k };
                    assert!((fd(&g, x) - exact).abs() < 1e-7 * exact.abs().max(1.0), "k={k} x={x}");
                }
            }
        }
    }

    struct Shift<'a> {
        f: &'a dyn RealFunction<f64>,
        k: usize,
    }

    impl RealFunction<f64> for Shift<'_> {
        fn value(&self, x: f64) -> C<f64> {
            self.f.deriv(self.k, x).unwrap()
        }
    }

    #[test]
    fn lorentzian_low_derivatives() {
        let d1 = RealFunction::<f64>::deriv(&Lorentzian, 1, 1.0).unwrap();
        assert!((d1.re + 0.5).abs() < 1e-15 && d1.im.abs() < 1e-15);
        let d2 = RealFunction::<f64>::deriv(&Lorentzian, 2, 0.0).unwrap();
        assert!((d2.re + 2.0).abs() < 1e-14);
    }

    #[test]
    fn catalog_names() {
        assert!(builtin::<f64>("lorentzian").is_some());
        assert!(builtin::<f64>("gaussian").is_some());
        let e = builtin::<f64>("exp(2)").unwrap();
        assert!((e.value(1.0).re - 2f64.exp()).abs() < 1e-12);
        let e = builtin::<f64>("exp(0.5-1.5i)").unwrap();
        assert!((e.value(1.0) - C::new(0.5, -1.5).exp()).norm() < 1e-12);
        assert!(builtin::<f64>("sin").is_none());
    }

    #[test]
    fn complex_literals() {
        assert_eq!(parse_complex("2"), Some((2.0, 0.0)));
        assert_eq!(parse_complex("i"), Some((0.0, 1.0)));
        assert_eq!(parse_complex("-2.5i"), Some((0.0, -2.5)));
        assert_eq!(parse_complex("1e-3+2i"), Some((1e-3, 2.0)));
        assert_eq!(parse_complex("1-i"), Some((1.0, -1.0)));
        assert_eq!(parse_complex("x"), None);
    }

    #[test]
    fn combination_tail_is_the_weakest() {
        let c = Combination::<f64> {
            terms: vec![(C::new(1.0, 0.0), Arc::new(Gaussian)), (C::new(2.0, 0.0), Arc::new(Lorentzian))],
        };
        assert_eq!(c.tail(CutOrientation::PlusAxis), Tail::Algebraic(2.0));
        assert!((c.value(0.0).re - 3.0).abs() < 1e-15);
    }
}
