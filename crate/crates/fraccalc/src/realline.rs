//! The operators `D±^α` on functions of a real variable.
//!
//! `D₊` integrates toward `-∞`, `D₋` toward `+∞`. Internally every integral is written over
//! `t ∈ (0, ∞)` with `f(x - t)` for `D₊` and `f(x + t)` for `D₋`; the minus side carries the
//! factor `exp(iπα)` of the reflection `D₋^α f(x) = exp(iπα)·D₊^α[f(-·)](-x)`.

use crate::branchcut::{CutOrientation, UnitPhase};
use crate::error::{Error, Result};
use crate::kernel::{Order, OrderClass};
use crate::quad::{Est, Quad, QuadratureConfig, Tail};
use crate::scalar::{cx, finite, re, Real, C};
use crate::special::{binomial, rgamma};

/// A function of a real variable with optional derivative oracles and decay information.
pub trait RealFunction<T: Real>: Send + Sync {
    fn value(&self, x: T) -> C<T>;

    /// Exact `k`-th derivative if known.
    fn deriv(&self, _k: usize, _x: T) -> Option<C<T>> {
        None
    }

    /// Decay of `f` along the ray used by `side` (`-∞` for `PlusAxis`, `+∞` for `MinusAxis`).
    fn tail(&self, _side: CutOrientation) -> Tail<T> {
        Tail::Unknown
    }

    /// Real points where the function is singular.
    fn real_poles(&self) -> Vec<T> {
        Vec::new()
    }

    /// Length scale beyond which the tail behaviour applies.
    fn scale(&self) -> T {
        T::one()
    }
}

impl<T: Real, F: RealFunction<T> + ?Sized> RealFunction<T> for &F {
    fn value(&self, x: T) -> C<T> {
        (**self).value(x)
    }
    fn deriv(&self, k: usize, x: T) -> Option<C<T>> {
        (**self).deriv(k, x)
    }
    fn tail(&self, side: CutOrientation) -> Tail<T> {
        (**self).tail(side)
    }
    fn real_poles(&self) -> Vec<T> {
        (**self).real_poles()
    }
    fn scale(&self) -> T {
        (**self).scale()
    }
}

impl<T: Real, F: RealFunction<T> + ?Sized> RealFunction<T> for Box<F> {
    fn value(&self, x: T) -> C<T> {
        (**self).value(x)
    }
    fn deriv(&self, k: usize, x: T) -> Option<C<T>> {
        (**self).deriv(k, x)
    }
    fn tail(&self, side: CutOrientation) -> Tail<T> {
        (**self).tail(side)
    }
    fn real_poles(&self) -> Vec<T> {
        (**self).real_poles()
    }
    fn scale(&self) -> T {
        (**self).scale()
    }
}

impl<T: Real, F: RealFunction<T> + ?Sized> RealFunction<T> for std::sync::Arc<F> {
    fn value(&self, x: T) -> C<T> {
        (**self).value(x)
    }
    fn deriv(&self, k: usize, x: T) -> Option<C<T>> {
        (**self).deriv(k, x)
    }
    fn tail(&self, side: CutOrientation) -> Tail<T> {
        (**self).tail(side)
    }
    fn real_poles(&self) -> Vec<T> {
        (**self).real_poles()
    }
    fn scale(&self) -> T {
        (**self).scale()
    }
}

/// Evaluation path taken by [`frac_differint`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    IntegerDerivative,
    LiouvilleByParts,
    DirectConvergent,
    NFoldIntegral,
    EpsRegularized,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::IntegerDerivative => "integer_derivative",
            Method::LiouvilleByParts => "liouville_by_parts",
            Method::DirectConvergent => "direct_convergent",
            Method::NFoldIntegral => "nfold_integral",
            Method::EpsRegularized => "eps_regularized",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DifferintResult<T> {
    pub value: C<T>,
    pub est_error: T,
    pub method: Method,
    pub branch: UnitPhase<T>,
    /// Set when a derivative had to be approximated by finite differences.
    pub approximate: bool,
}

/// Outcome of [`growth_check`].
#[derive(Clone, Debug, PartialEq)]
pub struct GrowthReport {
    pub pass: bool,
    pub diagnostic: String,
}

/// Derivative of order `k`: the oracle if present, otherwise Richardson-extrapolated
/// central differences. Returns `(value, error estimate, approximate)`.
pub fn derivative<T: Real>(f: &dyn RealFunction<T>, k: usize, x: T) -> (C<T>, T, bool) {
    if k == 0 {
        return (f.value(x), T::zero(), false);
    }
    if let Some(v) = f.deriv(k, x) {
        return (v, T::zero(), false);
    }
    let h0 = T::lit(0.1) * x.abs().max(T::one());
    let half = T::lit(k as f64 / 2.0);
    let diff = |h: T| {
        let mut acc = C::new(T::zero(), T::zero());
        for j in 0..=k {
            let c = binomial::<T>(k, j) * if j % 2 == 0 { T::one() } else { -T::one() };
            acc += f.value(x + (half - T::of(j)) * h) * c;
        }
        acc / h.powi(k as i32)
    };
    let mut hs = Vec::new();
    let mut vs = Vec::new();
    let mut best = (C::new(T::nan(), T::zero()), T::infinity());
    for j in 0..8 {
        let h = h0 / T::lit(2f64.powi(j));
        hs.push(h);
        vs.push(diff(h));
        if hs.len() >= 2 {
            let (v, corr) = crate::quad::richardson(&hs, &vs, T::lit(2.0));
            if finite(v) && corr < best.1 {
                best = (v, corr);
            }
        }
    }
    (best.0, best.1, true)
}

fn side_phase<T: Real>(alpha: C<T>, side: CutOrientation) -> C<T> {
    match side {
        CutOrientation::PlusAxis => C::new(T::one(), T::zero()),
        CutOrientation::MinusAxis => UnitPhase::principal(alpha).value,
    }
}

fn reflect<T: Real>(x: T, t: T, side: CutOrientation) -> T {
    match side {
        CutOrientation::PlusAxis => x - t,
        CutOrientation::MinusAxis => x + t,
    }
}

fn check_poles<T: Real>(f: &dyn RealFunction<T>, x: T, side: CutOrientation, on_ray: bool) -> Result<()> {
    if !finite(f.value(x)) {
        return Err(Error::PoleAtEvaluationPoint(x.to_f64_lossy()));
    }
    for p in f.real_poles() {
        if p == x {
            return Err(Error::PoleAtEvaluationPoint(x.to_f64_lossy()));
        }
        let ahead = match side {
            CutOrientation::PlusAxis => p < x,
            CutOrientation::MinusAxis => p > x,
        };
        if on_ray && ahead {
            return Err(Error::Domain(format!("function has a pole at {p} on the integration ray")));
        }
    }
    Ok(())
}

fn shifted_tail<T: Real>(t: Tail<T>, k: usize) -> Tail<T> {
    match t {
        Tail::Algebraic(p) => Tail::Algebraic(p + T::of(k)),
        other => other,
    }
}

/// `∫_0^∞ t^μ g(t) dt` with `g(t) = h(x ∓ t)` (finite part when `Re μ ≤ -1`).
fn ray_integral<T: Real>(
    cfg: &QuadratureConfig<T>,
    mu: C<T>,
    g: &dyn Fn(T) -> C<T>,
    x: T,
    scale: T,
    tail: Tail<T>,
) -> Result<Est<T>> {
    let q = Quad::new(*cfg)?;
    let h0 = scale.max(T::lit(0.25)).min(T::one());
    let l_min = T::lit(4.0) * (x.abs() + scale.max(T::one()));
    let l_min = match cfg.truncation_radius {
        Some(r) => l_min.max(r),
        None => l_min,
    };
    q.ray(mu, g, h0, l_min, tail)
}

/// Heuristic check of `f(z)/z^{α1} → 0` along the ray of `side`.
pub fn growth_check<T: Real>(f: &dyn RealFunction<T>, alpha: &Order<T>, side: CutOrientation) -> GrowthReport {
    let a1 = alpha.alpha1();
    match f.tail(side) {
        Tail::Exponential => {
            return GrowthReport { pass: true, diagnostic: "exponential decay".into() };
        }
        Tail::Algebraic(p) => {
            let pass = p + a1 > T::zero();
            return GrowthReport {
                pass,
                diagnostic: format!("algebraic decay |f| ~ |x|^-{p}, requires {p} + {a1} > 0"),
            };
        }
        Tail::Unknown => {}
    }
    let sgn = match side {
        CutOrientation::PlusAxis => -T::one(),
        CutOrientation::MinusAxis => T::one(),
    };
    let samples: Vec<T> = (4..=20)
        .map(|j| {
            let r = T::lit(2f64.powi(j));
            f.value(sgn * r).norm() / r.powf(a1)
        })
        .collect();
    let last = &samples[samples.len() - 5..];
    if last.iter().any(|v| !v.is_finite()) {
        return GrowthReport { pass: false, diagnostic: "|f| overflows along the ray instead of decaying".into() };
    }
    let non_decreasing = last.windows(2).all(|w| w[1] >= w[0]);
    let at_zero = last.iter().all(|v| *v == T::zero());
    if non_decreasing && !at_zero {
        GrowthReport { pass: false, diagnostic: format!("|f/z^α1| does not decay: last samples {last:?}") }
    } else {
        GrowthReport { pass: true, diagnostic: "sampled decay".into() }
    }
}

fn require_growth<T: Real>(f: &dyn RealFunction<T>, alpha: &Order<T>, side: CutOrientation) -> Result<()> {
    let r = growth_check(f, alpha, side);
    if r.pass {
        Ok(())
    } else {
        Err(Error::Convergence(r.diagnostic))
    }
}

/// `D±^α f(x)` dispatched on the class of `α`.
pub fn frac_differint<T: Real>(
    f: &dyn RealFunction<T>,
    alpha: &Order<T>,
    x: T,
    side: CutOrientation,
    cfg: &QuadratureConfig<T>,
) -> Result<DifferintResult<T>> {
    cfg.validate()?;
    let branch = UnitPhase::principal(alpha.value);
    let a1 = alpha.alpha1();
    if alpha.class == OrderClass::NonNegInteger {
        check_poles(f, x, side, false)?;
        let (v, e, approx) = derivative(f, alpha.n as usize, x);
        return Ok(DifferintResult { value: v, est_error: e, method: Method::IntegerDerivative, branch, approximate: approx });
    }
    if alpha.class == OrderClass::NegInteger {
        check_poles(f, x, side, false)?;
        return nfold_integral(f, (-alpha.n) as usize, x, side, cfg);
    }
    check_poles(f, x, side, true)?;
    require_growth(f, alpha, side)?;
    if a1 >= T::zero() {
        liouville(f, alpha, x, side, cfg)
    } else if a1 >= -T::one() {
        direct(f, alpha.value, x, side, cfg)
    } else {
        lowered(f, alpha, x, side, cfg)
    }
}

// (1/Γ(1-Δ))∫_0^∞ t^{-Δ} f^{(n+1)}(x ∓ t) dt, with Δ = α - n.
fn liouville<T: Real>(
    f: &dyn RealFunction<T>,
    alpha: &Order<T>,
    x: T,
    side: CutOrientation,
    cfg: &QuadratureConfig<T>,
) -> Result<DifferintResult<T>> {
    let n = alpha.n as usize;
    let delta = alpha.value - T::of(n);
    let k = n + 1;
    let approx = f.deriv(k, x).is_none();
    let g = |t: T| derivative(f, k, reflect(x, t, side)).0;
    let est = ray_integral(cfg, -delta, &g, x, f.scale(), shifted_tail(f.tail(side), k))?;
    let sign = match side {
        CutOrientation::PlusAxis => T::one(),
        CutOrientation::MinusAxis => {
            if k % 2 == 0 {
                T::one()
            } else {
                -T::one()
            }
        }
    };
    let pre = rgamma(C::new(T::one(), T::zero()) - delta) * side_phase(alpha.value, side) * sign;
    let est = est.scale(pre);
    Ok(DifferintResult {
        value: est.value,
        est_error: est.err,
        method: Method::LiouvilleByParts,
        branch: UnitPhase::principal(alpha.value),
        approximate: approx,
    })
}

// (1/Γ(-α))∫_0^∞ t^{-α-1} f(x ∓ t) dt for -1 ≤ Re α < 0.
fn direct<T: Real>(
    f: &dyn RealFunction<T>,
    alpha: C<T>,
    x: T,
    side: CutOrientation,
    cfg: &QuadratureConfig<T>,
) -> Result<DifferintResult<T>> {
    let g = |t: T| f.value(reflect(x, t, side));
    let mu = -alpha - T::one();
    let est = ray_integral(cfg, mu, &g, x, f.scale(), f.tail(side))?;
    let pre = rgamma(-alpha) * side_phase(alpha, side);
    let est = est.scale(pre);
    Ok(DifferintResult {
        value: est.value,
        est_error: est.err,
        method: Method::DirectConvergent,
        branch: UnitPhase::principal(alpha),
        approximate: false,
    })
}

/// `m`-fold integral of `f` from the side's infinity, evaluated lazily.
struct RepeatedIntegral<'a, T: Real> {
    f: &'a dyn RealFunction<T>,
    m: usize,
    side: CutOrientation,
    cfg: QuadratureConfig<T>,
}

impl<T: Real> RealFunction<T> for RepeatedIntegral<'_, T> {
    fn value(&self, x: T) -> C<T> {
        nfold_integral(self.f, self.m, x, self.side, &self.cfg)
            .map(|r| r.value)
            .unwrap_or(C::new(T::nan(), T::nan()))
    }

    fn tail(&self, side: CutOrientation) -> Tail<T> {
        match self.f.tail(side) {
            Tail::Algebraic(p) if p > T::of(self.m) => Tail::Algebraic(p - T::of(self.m)),
            Tail::Exponential => Tail::Exponential,
            _ => Tail::Unknown,
        }
    }

    fn real_poles(&self) -> Vec<T> {
        self.f.real_poles()
    }

    fn scale(&self) -> T {
        self.f.scale()
    }
}

// Re α < -1 non-integer: integrate m times, then apply the order α + m with -1 ≤ Re < 0.
fn lowered<T: Real>(
    f: &dyn RealFunction<T>,
    alpha: &Order<T>,
    x: T,
    side: CutOrientation,
    cfg: &QuadratureConfig<T>,
) -> Result<DifferintResult<T>> {
    let m = (-alpha.n - 1) as usize;
    let beta = alpha.value + T::of(m);
    let inner = RepeatedIntegral { f, m, side, cfg: *cfg };
    let mut r = direct(&inner, beta, x, side, cfg)?;
    if !finite(r.value) {
        return Err(Error::Convergence("repeated integral diverged".into()));
    }
    r.branch = UnitPhase::principal(alpha.value);
    Ok(r)
}

/// `(1/Γ(n))∫_{∓∞}^x (x-z)^{n-1} f(z) dz`, times `(-1)^n` on the minus side.
pub fn nfold_integral<T: Real>(
    f: &dyn RealFunction<T>,
    n: usize,
    x: T,
    side: CutOrientation,
    cfg: &QuadratureConfig<T>,
) -> Result<DifferintResult<T>> {
    if n == 0 {
        return Err(Error::Input("n-fold integral needs n ≥ 1".into()));
    }
    let alpha = Order::real(-T::of(n));
    check_poles(f, x, side, true)?;
    require_growth(f, &alpha, side)?;
    let g = |t: T| f.value(reflect(x, t, side));
    let mu = re(T::of(n - 1));
    let est = ray_integral(cfg, mu, &g, x, f.scale(), f.tail(side))?;
    let sign = if side == CutOrientation::MinusAxis && n % 2 == 1 { -T::one() } else { T::one() };
    let pre = sign / crate::special::factorial::<T>(n - 1);
    let est = est.scale(re(pre));
    Ok(DifferintResult {
        value: est.value,
        est_error: est.err,
        method: Method::NFoldIntegral,
        branch: UnitPhase::principal(alpha.value),
        approximate: false,
    })
}

/// Hadamard finite part `(1/Γ(-α)) FP∫_0^∞ t^{-α-1} f(x ∓ t) dt`, the exact `ε → 0` limit
/// of [`eps_regularized`]. Needs no derivatives of `f`.
pub fn finite_part<T: Real>(
    f: &dyn RealFunction<T>,
    alpha: &Order<T>,
    x: T,
    side: CutOrientation,
    cfg: &QuadratureConfig<T>,
) -> Result<DifferintResult<T>> {
    cfg.validate()?;
    if alpha.is_integer() {
        return frac_differint(f, alpha, x, side, cfg);
    }
    check_poles(f, x, side, true)?;
    require_growth(f, alpha, side)?;
    let mut r = direct(f, alpha.value, x, side, cfg)?;
    r.method = Method::EpsRegularized;
    Ok(r)
}

/// `(1/Γ(-α))[∫_ε^∞ t^{-α-1} f(x ∓ t) dt - f(x)/(α ε^α)]`, times `exp(iπα)` on the minus side.
pub fn eps_regularized<T: Real>(
    f: &dyn RealFunction<T>,
    alpha: &Order<T>,
    x: T,
    side: CutOrientation,
    eps: T,
    cfg: &QuadratureConfig<T>,
) -> Result<C<T>> {
    if !(eps > T::zero()) {
        return Err(Error::Input("ε must be positive".into()));
    }
    if alpha.is_integer() {
        return Err(Error::Input("ε-regularized form needs a non-integer order".into()));
    }
    check_poles(f, x, side, true)?;
    require_growth(f, alpha, side)?;
    let q = Quad::new(*cfg)?;
    let a = alpha.value;
    let mu = -a - T::one();
    let integrand = |t: T| f.value(reflect(x, t, side)) * (mu * t.ln()).exp();
    let l_min = T::lit(4.0) * (x.abs() + f.scale().max(T::one()));
    let tail = q.ray_from(&integrand, eps, l_min, f.tail(side), mu, Est::zero())?;
    let boundary = f.value(x) * (-a * eps.ln()).exp() / a;
    Ok((tail.value - boundary) * rgamma(-a) * side_phase(a, side))
}

/// `I(γ, x) = ∫_{∓∞}^x f(z)/(x-z)^γ dz`, continued by the finite part for `γ ≥ 1`.
///
/// On the minus side `(x - z)^{-γ} = exp(iπγ) t^{-γ}`, so `I = -exp(iπγ)∫_0^∞ t^{-γ} f(x+t) dt`.
pub fn power_integral<T: Real>(
    f: &dyn RealFunction<T>,
    gamma_exp: T,
    x: T,
    side: CutOrientation,
    cfg: &QuadratureConfig<T>,
) -> Result<C<T>> {
    cfg.validate()?;
    if gamma_exp >= T::one() && gamma_exp == gamma_exp.round() {
        return Err(Error::Domain("finite part undefined at integer exponents ≥ 1".into()));
    }
    check_poles(f, x, side, true)?;
    require_growth(f, &Order::real(gamma_exp - T::one()), side)?;
    let g = |t: T| f.value(reflect(x, t, side));
    let est = ray_integral(cfg, re(-gamma_exp), &g, x, f.scale(), f.tail(side))?;
    Ok(match side {
        CutOrientation::PlusAxis => est.value,
        CutOrientation::MinusAxis => -(est.value * cx(T::zero(), T::PI() * gamma_exp).exp()),
    })
}

/// `d/dx I(γ, x)` through the recurrence `-γ I(γ+1, x)`.
pub fn derivative_of_integral<T: Real>(
    f: &dyn RealFunction<T>,
    gamma_exp: T,
    x: T,
    side: CutOrientation,
    cfg: &QuadratureConfig<T>,
) -> Result<C<T>> {
    if gamma_exp == T::zero() {
        check_poles(f, x, side, false)?;
        return Ok(f.value(x));
    }
    Ok(power_integral(f, gamma_exp + T::one(), x, side, cfg)? * (-gamma_exp))
}

/// The Liouville path with the `n + 1` derivatives taken outside the integral:
/// `(d/dx)^{n+1}` of the order `Δ - 1` integral, by central differences in `x`.
pub fn liouville_outer_derivative<T: Real>(
    f: &dyn RealFunction<T>,
    alpha: &Order<T>,
    x: T,
    side: CutOrientation,
    cfg: &QuadratureConfig<T>,
) -> Result<C<T>> {
    if alpha.alpha1() < T::zero() || alpha.is_integer() {
        return Err(Error::Input("outer-derivative form needs Re α ≥ 0 and a non-integer order".into()));
    }
    let n = alpha.n as usize;
    let inner_order = alpha.value - T::of(n + 1);
    let inner = |y: T| direct(f, inner_order, y, side, cfg).map(|r| r.value);
    let k = n + 1;
    let h = T::lit(0.02) * x.abs().max(T::one());
    let half = T::lit(k as f64 / 2.0);
    let stencil = |h: T| -> Result<C<T>> {
        let mut acc = C::new(T::zero(), T::zero());
        for j in 0..=k {
            let c = binomial::<T>(k, j) * if j % 2 == 0 { T::one() } else { -T::one() };
            acc += inner(x + (half - T::of(j)) * h)? * c;
        }
        Ok(acc / h.powi(k as i32))
    };
    let hs = [h, h / T::lit(2.0), h / T::lit(4.0)];
    let vs = [stencil(hs[0])?, stencil(hs[1])?, stencil(hs[2])?];
    Ok(crate::quad::richardson(&hs, &vs, T::lit(2.0)).0)
}

/// `D^α f` at each point of `xs` in parallel.
pub fn frac_differint_many<T: Real>(
    f: &dyn RealFunction<T>,
    alpha: &Order<T>,
    xs: &[T],
    side: CutOrientation,
    cfg: &QuadratureConfig<T>,
) -> Vec<Result<DifferintResult<T>>> {
    use rayon::prelude::*;
    xs.par_iter().map(|&x| frac_differint(f, alpha, x, side, cfg)).collect()
}
