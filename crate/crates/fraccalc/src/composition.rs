//! The composition law `D^α ∘ D^β = D^{α+β}` and the Gamma/Beta identities behind it.

use rayon::prelude::*;
use serde_json::json;

use crate::branchcut::{to_pair, CutOrientation};
use crate::error::{Error, Result};
use crate::kernel::{kernel_limit, Order, OrderClass};
use crate::quad::{Est, Quad, QuadratureConfig, Tail};
use crate::realline::{derivative, finite_part, frac_differint, frac_differint_many, nfold_integral, RealFunction};
use crate::scalar::{cx, finite, i_unit, re, Real, C};
use crate::special::gamma;

/// Outcome of a two-sided numerical check.
#[derive(Clone, Debug, PartialEq)]
pub struct CompositionReport<T> {
    pub case: String,
    pub alpha: Order<T>,
    pub beta: Order<T>,
    pub lhs: C<T>,
    pub rhs: C<T>,
    /// `|lhs - rhs| / max(|lhs|, floor)`.
    pub residual: T,
    pub notes: String,
}

impl<T: Real> CompositionReport<T> {
    pub fn passes(&self, tolerance: T) -> bool {
        self.residual <= tolerance
    }

    pub fn to_json(&self, tolerance: T) -> String {
        json!({
            "case": self.case,
            "params": {"alpha": to_pair(self.alpha.value), "beta": to_pair(self.beta.value), "notes": self.notes},
            "lhs": to_pair(self.lhs),
            "rhs": to_pair(self.rhs),
            "residual": self.residual.to_f64_lossy(),
            "tolerance": tolerance.to_f64_lossy(),
            "pass": self.passes(tolerance),
        })
        .to_string()
    }
}

/// A named identity evaluated on both sides with its own tolerance.
#[derive(Clone, Debug, PartialEq)]
pub struct IdentityCheck<T> {
    pub case: String,
    pub params: Vec<(String, T)>,
    pub lhs: C<T>,
    pub rhs: C<T>,
    pub residual: T,
    pub tolerance: T,
}

impl<T: Real> IdentityCheck<T> {
    fn relative(case: impl Into<String>, params: Vec<(String, T)>, lhs: C<T>, rhs: C<T>, tolerance: T) -> Self {
        let residual = (lhs - rhs).norm() / rhs.norm().max(T::lit(1e-300));
        Self { case: case.into(), params, lhs, rhs, residual, tolerance }
    }

    fn absolute(case: impl Into<String>, params: Vec<(String, T)>, lhs: C<T>, rhs: C<T>, tolerance: T) -> Self {
        let residual = (lhs - rhs).norm();
        Self { case: case.into(), params, lhs, rhs, residual, tolerance }
    }

    pub fn pass(&self) -> bool {
        self.residual <= self.tolerance
    }

    pub fn to_json(&self) -> String {
        let params: serde_json::Map<String, serde_json::Value> =
            self.params.iter().map(|(k, v)| (k.clone(), json!(v.to_f64_lossy()))).collect();
        json!({
            "case": self.case,
            "params": params,
            "lhs": to_pair(self.lhs),
            "rhs": to_pair(self.rhs),
            "residual": self.residual.to_f64_lossy(),
            "tolerance": self.tolerance.to_f64_lossy(),
            "pass": self.pass(),
        })
        .to_string()
    }
}

fn residual<T: Real>(lhs: C<T>, rhs: C<T>) -> T {
    (lhs - rhs).norm() / lhs.norm().max(T::lit(1e-12))
}

fn params<T: Real>(pairs: &[(&str, T)]) -> Vec<(String, T)> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn check_order_pair<T: Real>(alpha: &Order<T>, beta: &Order<T>) -> Result<()> {
    if alpha.class == OrderClass::NegInteger || beta.class == OrderClass::NegInteger {
        return Err(Error::GammaPole("α and β must avoid -1, -2, …".into()));
    }
    if !(alpha.alpha1() + beta.alpha1() > -T::one()) {
        return Err(Error::Input("Re(α+β) must exceed -1".into()));
    }
    Ok(())
}

/// `J = 2iπ Γ(α+β+1) / ((z2-z1)^{α+β+1} Γ(α+1) Γ(β+1))` with the principal power.
pub fn j_closed<T: Real>(z1: C<T>, z2: C<T>, alpha: &Order<T>, beta: &Order<T>) -> Result<C<T>> {
    if z1 == z2 {
        return Err(Error::Input("z1 and z2 must differ".into()));
    }
    check_order_pair(alpha, beta)?;
    let s = alpha.value + beta.value + T::one();
    let g = gamma(s)? / (gamma(alpha.value + T::one())? * gamma(beta.value + T::one())?);
    Ok(i_unit::<T>() * T::TAU() * g / (z2 - z1).powc(s))
}

/// Directed integration line `point + t·direction`, `t ∈ ℝ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Line<T> {
    pub point: C<T>,
    pub direction: C<T>,
}

impl<T: Real> Line<T> {
    /// Perpendicular bisector of `[z1, z2]`, with `z2` on its right.
    pub fn bisector(z1: C<T>, z2: C<T>) -> Self {
        let d = z2 - z1;
        Self { point: (z1 + z2) / T::lit(2.0), direction: i_unit::<T>() * d / d.norm() }
    }

    pub fn reversed(self) -> Self {
        Self { point: self.point, direction: -self.direction }
    }

    fn project(&self, z: C<T>) -> (T, T) {
        let u = self.direction / self.direction.norm();
        let rel = (z - self.point) * u.conj();
        (rel.re, rel.im.abs())
    }
}

/// `∫_ℝ f(t) dt` for `f` smooth except for sharp features of width `w_k` around `t_k`,
/// decaying like `|t|^{-p}` (times `|t|^{i Im μ}`) with an expansion in `1/t`.
fn real_line_integral<T: Real>(
    quad: &Quad<T>,
    cfg: &QuadratureConfig<T>,
    f: &dyn Fn(T) -> C<T>,
    centers: &[(T, T)],
    tail_p: T,
    mu: C<T>,
) -> Result<Est<T>> {
    let mut c: Vec<(T, T)> = centers.to_vec();
    c.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite centers"));
    let add = |a: Est<T>, b: Est<T>| Est { value: a.value + b.value, err: a.err + b.err };
    // ∫_0^len f(p + σ s) ds with panels refined toward s = 0.
    let near = |p: T, sigma: T, len: T, width: T| -> Result<Est<T>> {
        let g = |s: T| f(p + sigma * s);
        let delta = (width / T::lit(4.0)).min(len / T::lit(4.0)).max(T::lit(1e-300));
        let head = quad.adaptive(&g, T::zero(), delta, cfg.tol(g(delta).norm() * delta) / T::lit(8.0))?;
        let rest = quad.graded(&g, delta, len, head.value.norm())?;
        Ok(add(head, rest))
    };
    let ray = |p: T, sigma: T, width: T, acc: Est<T>| -> Result<Est<T>> {
        let head = near(p, sigma, T::one(), width)?;
        let g = |t: T| f(p + sigma * t);
        let scale = c.iter().map(|x| x.0.abs()).fold(T::one(), |a, b| a.max(b));
        let l_min = cfg.truncation_radius.unwrap_or(T::lit(8.0) * scale);
        let mut tail = quad.ray_from(&g, T::one(), l_min, Tail::Algebraic(tail_p), mu, add(acc, head))?;
        tail.err = tail.err.max(T::zero());
        Ok(tail)
    };
    let (first, last) = (c[0], c[c.len() - 1]);
    let mut acc = ray(first.0, -T::one(), first.1, Est::zero())?;
    for w in c.windows(2) {
        let (a, b) = (w[0], w[1]);
        let half = (b.0 - a.0) / T::lit(2.0);
        if half > T::zero() {
            acc = add(acc, near(a.0, T::one(), half, a.1)?);
            acc = add(acc, near(b.0, -T::one(), half, b.1)?);
        }
    }
    ray(last.0, T::one(), last.1, acc)
}

/// `∫_K dz / ((z2 - z)^{α+1} (z - z1)^{β+1})` along `line` (default: the perpendicular
/// bisector with `z2` on the right). Powers of `z2 - z` and `z - z1` take their phase
/// relative to `arg(z2 - z1)` in `(-π, π)`, placing the cuts on the outward rays from
/// `z2` and `z1`.
pub fn j_numeric<T: Real>(
    z1: C<T>,
    z2: C<T>,
    alpha: &Order<T>,
    beta: &Order<T>,
    line: Option<Line<T>>,
    cfg: &QuadratureConfig<T>,
) -> Result<C<T>> {
    if z1 == z2 {
        return Err(Error::Input("z1 and z2 must differ".into()));
    }
    check_order_pair(alpha, beta)?;
    let line = line.unwrap_or_else(|| Line::bisector(z1, z2));
    let u = line.direction / line.direction.norm();
    let e = (z2 - z1) / (z2 - z1).norm();
    let phi = e.arg();
    let (a1, b1) = (-alpha.value - T::one(), -beta.value - T::one());
    let pow = |w: C<T>, s: C<T>| (s * cx(w.norm().ln(), phi + (w / e).arg())).exp();
    let f = |t: T| {
        let z = line.point + u * t;
        pow(z2 - z, a1) * pow(z - z1, b1) * u
    };
    let (t1, w1) = line.project(z1);
    let (t2, w2) = line.project(z2);
    if w1 == T::zero() || w2 == T::zero() {
        return Err(Error::Geometry("integration line passes through a singular point".into()));
    }
    let quad = Quad::new(*cfg)?;
    let p = alpha.alpha1() + beta.alpha1() + T::lit(2.0);
    let mu = cx(T::zero(), -(alpha.alpha2() + beta.alpha2()));
    let est = real_line_integral(&quad, cfg, &f, &[(t1, w1), (t2, w2)], p, mu)?;
    let slack = if p - T::one() < T::lit(0.05) { T::lit(1e3) } else { T::one() };
    if !finite(est.value) || est.err * slack > T::lit(1e3) * cfg.tol(est.value.norm()).max(T::lit(1e-12)) {
        return Err(Error::Accuracy { est_error: est.err.to_f64_lossy() });
    }
    Ok(est.value)
}

/// Barycentric Chebyshev interpolant of `D^β f` on `[x - W, x + W]`, evaluated directly
/// outside the window.
struct Materialized<'a, T: Real> {
    f: &'a dyn RealFunction<T>,
    beta: Order<T>,
    side: CutOrientation,
    cfg: QuadratureConfig<T>,
    center: T,
    half: T,
    nodes: Vec<T>,
    values: Vec<C<T>>,
}

impl<'a, T: Real> Materialized<'a, T> {
    fn new(
        f: &'a dyn RealFunction<T>,
        beta: &Order<T>,
        side: CutOrientation,
        center: T,
        half: T,
        n: usize,
        cfg: &QuadratureConfig<T>,
    ) -> Result<Self> {
        let nodes: Vec<T> = (0..n)
            .map(|j| center + half * (T::PI() * T::of(j) / T::of(n - 1)).cos())
            .collect();
        let values = frac_differint_many(f, beta, &nodes, side, cfg)
            .into_iter()
            .map(|r| r.map(|d| d.value))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { f, beta: *beta, side, cfg: *cfg, center, half, nodes, values })
    }

    fn interpolate(&self, y: T) -> C<T> {
        let n = self.nodes.len();
        let mut num = C::new(T::zero(), T::zero());
        let mut den = T::zero();
        for j in 0..n {
            let d = y - self.nodes[j];
            if d == T::zero() {
                return self.values[j];
            }
            let mut w = if j % 2 == 0 { T::one() } else { -T::one() };
            if j == 0 || j == n - 1 {
                w = w / T::lit(2.0);
            }
            num += self.values[j] * (w / d);
            den += w / d;
        }
        num / den
    }
}

impl<T: Real> RealFunction<T> for Materialized<'_, T> {
    fn value(&self, y: T) -> C<T> {
        if (y - self.center).abs() <= self.half {
            self.interpolate(y)
        } else {
            frac_differint(self.f, &self.beta, y, self.side, &self.cfg)
                .map(|r| r.value)
                .unwrap_or(C::new(T::nan(), T::nan()))
        }
    }

    fn tail(&self, side: CutOrientation) -> Tail<T> {
        match self.f.tail(side) {
            Tail::Algebraic(p) if self.beta.alpha2() == T::zero() => Tail::Algebraic(p + self.beta.alpha1()),
            Tail::Algebraic(_) => Tail::Unknown,
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

/// Compares `D^{α+β} f(x)` with `D^α [D^β f](x)` on the same side.
pub fn verify_composition<T: Real>(
    f: &dyn RealFunction<T>,
    alpha: &Order<T>,
    beta: &Order<T>,
    x: T,
    side: CutOrientation,
    cfg: &QuadratureConfig<T>,
) -> Result<CompositionReport<T>> {
    if alpha.class == OrderClass::NegInteger || beta.class == OrderClass::NegInteger {
        return Err(Error::GammaPole("α and β must avoid -1, -2, …".into()));
    }
    let sum = alpha.add(beta);
    let lhs = frac_differint(f, &sum, x, side, cfg)?.value;
    let g = Materialized::new(f, beta, side, x, T::lit(2.0), 64, cfg)?;
    let (rhs, notes) = match alpha.class {
        OrderClass::NonNegInteger => {
            let n = alpha.n as usize;
            let v = if n == 0 { g.value(x) } else { derivative(&g, n, x).0 };
            (v, "outer integer derivative of the interpolated inner result")
        }
        OrderClass::NegInteger => (nfold_integral(&g, (-alpha.n) as usize, x, side, cfg)?.value, "outer repeated integral"),
        _ => (finite_part(&g, alpha, x, side, cfg)?.value, "outer finite-part quadrature"),
    };
    if !finite(rhs) {
        return Err(Error::Convergence("inner result could not be evaluated along the outer ray".into()));
    }
    Ok(CompositionReport {
        case: "semigroup".into(),
        alpha: *alpha,
        beta: *beta,
        lhs,
        rhs,
        residual: residual(lhs, rhs),
        notes: notes.into(),
    })
}

/// `|Γ(γ)Γ(1-γ) sin(γπ) - π|`.
pub fn gamma_reflection<T: Real>(g: C<T>) -> Result<T> {
    let v = gamma(g)? * gamma(re(T::one()) - g)? * (g * T::PI()).sin();
    Ok((v - re(T::PI())).norm())
}

/// The three segment integrals of `1/|(x-y)^a (y-z)^b|` and the identities they satisfy.
#[derive(Clone, Debug, PartialEq)]
pub struct BetaReport<T> {
    /// Quadrature values of `I1, I2, I3`.
    pub integrals: [T; 3],
    /// `Γ`-ratio closed forms divided by `d^{a+b-1}`.
    pub closed: [T; 3],
    pub checks: Vec<IdentityCheck<T>>,
}

impl<T: Real> BetaReport<T> {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass())
    }

    pub fn max_residual(&self) -> T {
        self.checks.iter().map(|c| c.residual).fold(T::zero(), |a, b| a.max(b))
    }
}

fn gr<T: Real>(x: T) -> Result<T> {
    Ok(gamma(re(x))?.re)
}

pub fn beta_identity_suite<T: Real>(a: T, b: T, x: T, z: T, cfg: &QuadratureConfig<T>) -> Result<BetaReport<T>> {
    if !(a < T::one() && b < T::one() && a + b > T::one()) {
        return Err(Error::Input("need a < 1, b < 1, a + b > 1".into()));
    }
    if x == z {
        return Err(Error::Input("x and z must differ".into()));
    }
    let d = (x - z).abs();
    let quad = Quad::new(*cfg)?;
    let one = T::one();
    let outer = |p: T, q: T| -> Result<T> {
        // ∫_0^∞ t^{-p} (t + d)^{-q} dt.
        let g = |t: T| re((t + d).powf(-q));
        Ok(quad.ray(re(-p), &g, d / T::lit(2.0), T::lit(8.0) * d, Tail::Algebraic(q))?.value.re)
    };
    let i1 = outer(a, b)?;
    let i3 = outer(b, a)?;
    let half = d / T::lit(2.0);
    let ga = |t: T| re((d - t).powf(-b));
    let gb = |t: T| re((d - t).powf(-a));
    let i2 = quad.singular_segment(re(-a), &ga, half)?.value.re + quad.singular_segment(re(-b), &gb, half)?.value.re;
    let scale = d.powf(a + b - one);
    let c1 = gr(one - a)? * gr(a + b - one)? / gr(b)? / scale;
    let c2 = gr(one - a)? * gr(one - b)? / gr(T::lit(2.0) - a - b)? / scale;
    let c3 = gr(one - b)? * gr(a + b - one)? / gr(a)? / scale;
    let p = params(&[("a", a), ("b", b), ("x", x), ("z", z)]);
    let tol = T::lit(1e-8);
    let mut checks = vec![
        IdentityCheck::relative("I1", p.clone(), re(i1), re(c1), tol),
        IdentityCheck::relative("I2", p.clone(), re(i2), re(c2), tol),
        IdentityCheck::relative("I3", p.clone(), re(i3), re(c3), tol),
    ];
    let cos_sum = (a * T::PI()).cos() * i1 + i2 + (b * T::PI()).cos() * i3;
    let size = i1.abs() + i2.abs() + i3.abs();
    checks.push(IdentityCheck::absolute("cosine_identity", p.clone(), re(cos_sum / size), re(T::zero()), tol));
    let s1 = (a * T::PI()).sin() * gr(one - a)? / gr(b)?;
    let s2 = (b * T::PI()).sin() * gr(one - b)? / gr(a)?;
    checks.push(IdentityCheck::relative("sine_identity", p, re(s1), re(s2), tol));
    Ok(BetaReport { integrals: [i1, i2, i3], closed: [c1, c2, c3], checks })
}

/// One factor `h(γ, w)`: `1/(w + iτ)^γ` above the axis, `-1/(w - iτ)^γ` below, with the
/// cut of the power along `(0, +∞)` or `(0, -∞)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HFactor {
    pub cut: CutOrientation,
    pub upper: bool,
}

impl HFactor {
    fn name(self) -> String {
        let s = if self.cut == CutOrientation::PlusAxis { "+" } else { "-" };
        if self.upper {
            format!("h^{s}")
        } else {
            format!("h_{s}")
        }
    }

    fn eval<T: Real>(self, gamma_exp: T, w: T, tau: T) -> C<T> {
        let (u, sign) = if self.upper { (cx(w, tau), T::one()) } else { (cx(w, -tau), -T::one()) };
        let mut arg = u.arg();
        if self.cut == CutOrientation::PlusAxis && arg < T::zero() {
            arg = arg + T::TAU();
        }
        (cx(u.norm().ln(), arg) * -gamma_exp).exp() * sign
    }
}

/// The product `h(a, x - y) h(b, y - z)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Combo {
    pub first: HFactor,
    pub second: HFactor,
}

impl Combo {
    pub fn name(&self) -> String {
        format!("{}{}", self.first.name(), self.second.name())
    }

    fn all() -> Vec<Combo> {
        let mut out = Vec::new();
        for &up1 in &[true, false] {
            for &c1 in &[CutOrientation::PlusAxis, CutOrientation::MinusAxis] {
                for &up2 in &[true, false] {
                    for &c2 in &[CutOrientation::PlusAxis, CutOrientation::MinusAxis] {
                        out.push(Combo { first: HFactor { cut: c1, upper: up1 }, second: HFactor { cut: c2, upper: up2 } });
                    }
                }
            }
        }
        out
    }

    /// The eight products with both factors on the same side of the axis.
    pub fn separating() -> Vec<Combo> {
        Self::all().into_iter().filter(|c| c.first.upper == c.second.upper).collect()
    }

    /// The eight mixed products, whose singularities lie on one side of the axis.
    pub fn vanishing() -> Vec<Combo> {
        Self::all().into_iter().filter(|c| c.first.upper != c.second.upper).collect()
    }

    /// Tabulated `τ → 0` value in units of `G`; `None` for the vanishing products.
    pub fn table_factor<T: Real>(&self, a: T, b: T, x_below_z: bool) -> Option<C<T>> {
        use CutOrientation::{MinusAxis as M, PlusAxis as P};
        if self.first.upper != self.second.upper {
            return None;
        }
        let e = |t: T| (i_unit::<T>() * T::PI() * t).exp();
        let one = C::new(T::one(), T::zero());
        let (c1, c2) = (self.first.cut, self.second.cut);
        Some(match (self.first.upper, c1, c2, x_below_z) {
            (true, _, _, true) => e(-(a + b)),
            (true, _, _, false) => -one,
            (false, P, P, true) => -e(-(a + b)),
            (false, P, M, true) => -e(-(a - b)),
            (false, M, P, true) => -e(a - b),
            (false, M, M, true) => -e(a + b),
            (false, P, P, false) => e(-T::lit(2.0) * (a + b)),
            (false, P, M, false) => e(-T::lit(2.0) * a),
            (false, M, P, false) => e(-T::lit(2.0) * b),
            (false, M, M, false) => one,
        })
    }
}

/// `G = 2iπ Γ(a+b-1) / (d^{a+b-1} Γ(a) Γ(b))`.
pub fn g_constant<T: Real>(a: T, b: T, d: T) -> Result<C<T>> {
    let one = T::one();
    Ok(i_unit::<T>() * T::TAU() * gr(a + b - one)? / (d.powf(a + b - one) * gr(a)? * gr(b)?))
}

/// `∫ h(a, x-y) h(b, y-z) dy` at finite `τ`.
pub fn h_product_integral<T: Real>(combo: Combo, a: T, b: T, x: T, z: T, tau: T, cfg: &QuadratureConfig<T>) -> Result<C<T>> {
    let quad = Quad::new(*cfg)?;
    let f = |y: T| combo.first.eval(a, x - y, tau) * combo.second.eval(b, y - z, tau);
    Ok(real_line_integral(&quad, cfg, &f, &[(x, tau), (z, tau)], a + b, re(T::zero()))?.value)
}

/// Evaluates one product at `τ = 1e-2, 1e-3`, extrapolates linearly to `τ = 0` and
/// compares with the tabulated value (relative, 1e-3) or with zero (absolute, 1e-6).
pub fn phase_table_check<T: Real>(combo: Combo, a: T, b: T, x: T, z: T, cfg: &QuadratureConfig<T>) -> Result<IdentityCheck<T>> {
    if !(a < T::one() && b < T::one() && a + b > T::one()) {
        return Err(Error::Input("need a < 1, b < 1, a + b > 1".into()));
    }
    if x == z {
        return Err(Error::Input("x and z must differ".into()));
    }
    let (t1, t2) = (T::lit(1e-2), T::lit(1e-3));
    let v1 = h_product_integral(combo, a, b, x, z, t1, cfg)?;
    let v2 = h_product_integral(combo, a, b, x, z, t2, cfg)?;
    let limit = v2 + (v2 - v1) * (t2 / (t1 - t2));
    let order = if x < z { "x<z" } else { "x>z" };
    let case = format!("{} {order}", combo.name());
    let p = params(&[("a", a), ("b", b), ("x", x), ("z", z)]);
    Ok(match combo.table_factor(a, b, x < z) {
        Some(factor) => {
            let expected = factor * g_constant(a, b, (x - z).abs())?;
            IdentityCheck::relative(case, p, limit, expected, T::lit(1e-3))
        }
        None => IdentityCheck::absolute(case, p, limit, re(T::zero()), T::lit(1e-6)),
    })
}

/// All sixteen tabulated cases and the sixteen vanishing ones (both orderings), in parallel.
pub fn phase_table_all<T: Real>(a: T, b: T, d: T, cfg: &QuadratureConfig<T>) -> Result<Vec<IdentityCheck<T>>> {
    let mut jobs = Vec::new();
    for combo in Combo::separating().into_iter().chain(Combo::vanishing()) {
        jobs.push((combo, T::zero(), d));
        jobs.push((combo, d, T::zero()));
    }
    jobs.par_iter().map(|&(c, x, z)| phase_table_check(c, a, b, x, z, cfg)).collect()
}

/// Compares the kernel `D^{α+β}(x - z)` with `∫ D^α(x - y) D^β(y - z) dy` for `α = -n`,
/// `β < 0`, using the one-sided power kernels.
pub fn negative_order_composition<T: Real>(
    alpha: &Order<T>,
    beta: &Order<T>,
    x: T,
    z: T,
    side: CutOrientation,
    cfg: &QuadratureConfig<T>,
) -> Result<CompositionReport<T>> {
    if alpha.class != OrderClass::NegInteger {
        return Err(Error::Input("α must be a negative integer".into()));
    }
    if !(beta.alpha2() == T::zero() && beta.alpha1() < T::zero()) {
        return Err(Error::Input("β must be real and negative".into()));
    }
    let sum = alpha.add(beta);
    let w = x - z;
    let lhs = kernel_limit(&sum, w, side)?;
    let supported = match side {
        CutOrientation::PlusAxis => w > T::zero(),
        CutOrientation::MinusAxis => w < T::zero(),
    };
    let report = |rhs: C<T>, notes: &str| CompositionReport {
        case: "negative_order_kernel".into(),
        alpha: *alpha,
        beta: *beta,
        lhs,
        rhs,
        residual: if lhs == rhs { T::zero() } else { residual(lhs, rhs) },
        notes: notes.into(),
    };
    if !supported {
        return Ok(report(C::new(T::zero(), T::zero()), "evaluation point outside the kernel support"));
    }
    // y runs from z toward x; s = |y - z|.
    let sigma = if w > T::zero() { T::one() } else { -T::one() };
    let len = w.abs();
    let c_beta = kernel_limit(beta, sigma, side)?;
    let quad = Quad::new(*cfg)?;
    let g = |s: T| kernel_limit(alpha, sigma * (len - s), side).unwrap_or(C::new(T::nan(), T::nan())) * c_beta;
    let rhs = quad.singular_segment(-beta.value - T::one(), &g, len)?.value;
    if !finite(rhs) {
        return Err(Error::Accuracy { est_error: f64::INFINITY });
    }
    Ok(report(rhs, "product rule at y = z"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::{Exp, Lorentzian};
    use crate::scalar::rel_err;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    type C64 = C<f64>;

    fn cfg() -> QuadratureConfig<f64> {
        QuadratureConfig::default()
    }

    fn c(a: f64, b: f64) -> C64 {
        C64::new(a, b)
    }

    // ∫ dz / ((z2 - z)(z - z1)) across a separating line is 2iπ/(z2 - z1) by residues.
    #[test]
    fn j_closed_residue_oracle() {
        let z = Order::real(0.0);
        let v = j_closed(c(0.0, 0.0), c(1.0, 0.0), &z, &z).unwrap();
        assert!((v - c(0.0, 2.0 * PI)).norm() < 1e-14);
        let v = j_closed(c(0.0, 0.0), c(0.0, 2.0), &z, &z).unwrap();
        assert!((v - c(PI, 0.0)).norm() < 1e-14);
        assert!(j_closed(c(0.0, 0.0), c(1.0, 0.0), &Order::real(-1.0), &z).is_err());
        assert!(j_closed(c(0.0, 0.0), c(1.0, 0.0), &Order::real(-0.7), &Order::real(-0.6)).is_err());
    }

    #[test]
    fn j_numeric_matches_closed_form() {
        let (a, b) = (Order::real(0.3), Order::real(0.4));
        for &(z1, z2) in &[(c(0.0, 0.0), c(1.0, 0.0)), (c(-0.3, 0.7), c(1.1, -1.4)), (c(2.0, 1.0), c(-1.0, 0.5))] {
            let closed = j_closed(z1, z2, &a, &b).unwrap();
            let num = j_numeric(z1, z2, &a, &b, None, &cfg()).unwrap();
            assert!(rel_err(num, closed, 1e-300) < 1e-6, "{num} vs {closed}");
            let rev = j_numeric(z1, z2, &a, &b, Some(Line::bisector(z1, z2).reversed()), &cfg()).unwrap();
            assert!(rel_err(rev, -closed, 1e-300) < 1e-6);
            // A tilted line still crossing [z1, z2] gives the same value.
            let tilted = Line { point: z1 * 0.3 + z2 * 0.7, direction: Line::bisector(z1, z2).direction * C64::from_polar(1.0, 0.4) };
            let t = j_numeric(z1, z2, &a, &b, Some(tilted), &cfg()).unwrap();
            assert!(rel_err(t, closed, 1e-300) < 1e-6);
        }
    }

    #[test]
    fn j_numeric_vanishes_off_the_segment() {
        let (a, b) = (Order::real(0.3), Order::real(0.4));
        let (z1, z2) = (c(-0.3, 0.7), c(1.1, -1.4));
        let e = (z2 - z1) / (z2 - z1).norm();
        for off in [1.0, -2.5] {
            let line = Line { point: (z1 + z2) / 2.0 + e * C64::i() * off, direction: e };
            let v = j_numeric(z1, z2, &a, &b, Some(line), &cfg()).unwrap();
            assert!(v.norm() < 1e-8, "{v}");
        }
    }

    #[test]
    fn semigroup_on_the_exponential() {
        let f = Exp::real(1.0);
        let r = verify_composition(&f, &Order::real(0.3), &Order::real(0.7), 0.0, CutOrientation::PlusAxis, &cfg()).unwrap();
        assert!((r.lhs - c(1.0, 0.0)).norm() < 1e-8);
        assert!(r.residual < 1e-4, "{r:?}");
    }

    #[test]
    fn half_derivatives_compose_to_the_first() {
        let r = verify_composition(&Lorentzian, &Order::real(0.5), &Order::real(0.5), 1.0, CutOrientation::PlusAxis, &cfg()).unwrap();
        assert!((r.rhs - c(-0.5, 0.0)).norm() < 1e-4 * 0.5, "{r:?}");
        assert!(r.residual < 1e-4);
        let m = verify_composition(&Lorentzian, &Order::real(0.5), &Order::real(0.5), 1.0, CutOrientation::MinusAxis, &cfg()).unwrap();
        assert!((m.rhs - c(-0.5, 0.0)).norm() < 1e-4 * 0.5, "{m:?}");
    }

    #[test]
    fn zero_order_outer_is_the_identity() {
        let r = verify_composition(&Lorentzian, &Order::real(0.0), &Order::real(0.35), 0.4, CutOrientation::PlusAxis, &cfg()).unwrap();
        assert!(r.residual < 1e-10, "{r:?}");
    }

    #[test]
    fn negative_orders_compose() {
        let r = verify_composition(&Lorentzian, &Order::real(-0.5), &Order::real(0.75), -0.3, CutOrientation::PlusAxis, &cfg()).unwrap();
        assert!(r.residual < 1e-4, "{r:?}");
    }

    #[test]
    fn gamma_reflection_cases() {
        assert!(gamma_reflection(c(0.5, 0.0)).unwrap() < 1e-14);
        assert!(gamma_reflection(c(0.3, 0.0)).unwrap() < 1e-12);
        assert!(gamma_reflection(c(0.4, 0.2)).unwrap() < 1e-10);
        assert!(gamma_reflection(c(2.0, 0.0)).is_err());
    }

    #[test]
    fn beta_suite() {
        let r = beta_identity_suite(0.6, 0.6, 0.0, 1.0, &cfg()).unwrap();
        assert!(r.pass(), "{:?}", r.checks);
        assert!(r.max_residual() <= 1e-8);
        let r = beta_identity_suite(0.7, 0.45, 2.0, -1.5, &cfg()).unwrap();
        assert!(r.pass(), "{:?}", r.checks);
        // Beta(1/2, 1/2) = Γ(1/2)² = π.
        let b: f64 = gr(0.5f64).unwrap().powi(2) / gr(1.0f64).unwrap();
        assert!((b - PI).abs() < 1e-13);
        assert!(beta_identity_suite(0.3, 0.4, 0.0, 1.0, &cfg()).is_err());
    }

    #[test]
    fn phase_table_rows() {
        let (a, b) = (0.6, 0.6);
        let upper_plus = HFactor { cut: CutOrientation::PlusAxis, upper: true };
        let combo = Combo { first: upper_plus, second: upper_plus };
        let g = g_constant(a, b, 5.0).unwrap();
        let v = h_product_integral(combo, a, b, 0.0, 5.0, 1e-3, &cfg()).unwrap();
        let expected = C64::from_polar(1.0, -PI * (a + b)) * g;
        assert!(rel_err(v, expected, 1e-300) < 1e-3, "{v} vs {expected}");
        let v = h_product_integral(combo, a, b, 5.0, 0.0, 1e-3, &cfg()).unwrap();
        assert!(rel_err(v, -g, 1e-300) < 1e-3);
        let all = phase_table_all(a, b, 5.0, &cfg()).unwrap();
        assert_eq!(all.len(), 32);
        for check in &all {
            assert!(check.pass(), "{}", check.to_json());
        }
    }

    #[test]
    fn negative_order_kernels() {
        let side = CutOrientation::PlusAxis;
        let r = negative_order_composition(&Order::real(-1.0), &Order::real(-0.5), 1.0, 0.0, side, &cfg()).unwrap();
        assert!(r.residual < 1e-6, "{r:?}");
        // Two-fold integral kernel is w.
        let r = negative_order_composition(&Order::real(-1.0), &Order::real(-1.0), 2.5, 0.5, side, &cfg()).unwrap();
        assert!((r.lhs - c(2.0, 0.0)).norm() < 1e-14);
        assert!(r.residual < 1e-8, "{r:?}");
        let r = negative_order_composition(&Order::real(-2.0), &Order::real(-0.999999), 2.5, 0.5, side, &cfg()).unwrap();
        assert!(r.residual < 1e-5, "{r:?}");
        let r = negative_order_composition(&Order::real(-1.0), &Order::real(-0.5), -1.0, 0.0, side, &cfg()).unwrap();
        assert_eq!((r.lhs, r.rhs), (c(0.0, 0.0), c(0.0, 0.0)));
        let m = negative_order_composition(&Order::real(-2.0), &Order::real(-0.3), -1.5, 0.0, CutOrientation::MinusAxis, &cfg()).unwrap();
        assert!(m.residual < 1e-6, "{m:?}");
    }

    #[test]
    fn report_json_shape() {
        let r = negative_order_composition(&Order::real(-1.0), &Order::real(-0.5), 1.0, 0.0, CutOrientation::PlusAxis, &cfg()).unwrap();
        let v: serde_json::Value = serde_json::from_str(&r.to_json(1e-6)).unwrap();
        for key in ["case", "params", "lhs", "rhs", "residual", "tolerance", "pass"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["pass"], serde_json::Value::Bool(true));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn j_orientation_flips_sign(a in -0.4f64..1.5, b in -0.4f64..1.5, x1 in -2.0f64..2.0, y1 in -2.0f64..2.0, x2 in -2.0f64..2.0, y2 in -2.0f64..2.0) {
            prop_assume!(a + b > -0.6 && (c(x1, y1) - c(x2, y2)).norm() > 0.2);
            let (z1, z2) = (c(x1, y1), c(x2, y2));
            let (oa, ob) = (Order::real(a), Order::real(b));
            let fwd = j_numeric(z1, z2, &oa, &ob, None, &cfg()).unwrap();
            let back = j_numeric(z1, z2, &oa, &ob, Some(Line::bisector(z1, z2).reversed()), &cfg()).unwrap();
            prop_assert!((fwd + back).norm() < 1e-8 * fwd.norm().max(1.0));
            let closed = j_closed(z1, z2, &oa, &ob).unwrap();
            prop_assert!(rel_err(fwd, closed, 1e-12) < 1e-6);
        }

        #[test]
        fn reflection_formula(re_g in -3.0f64..3.0, im_g in -1.5f64..1.5) {
            prop_assume!((re_g - re_g.round()).abs() > 0.05 || im_g.abs() > 0.05);
            let r = gamma_reflection(c(re_g, im_g)).unwrap();
            prop_assert!(r < 1e-10 * (1.0 + (PI * im_g).sinh().abs() * 10.0));
        }

        #[test]
        fn sine_identity_holds(a in 0.05f64..0.95, b in 0.05f64..0.95) {
            prop_assume!(a + b > 1.05);
            let s1 = (a * PI).sin() * gr(1.0 - a).unwrap() / gr(b).unwrap();
            let s2 = (b * PI).sin() * gr(1.0 - b).unwrap() / gr(a).unwrap();
            prop_assert!((s1 - s2).abs() < 1e-12 * s1.abs().max(1.0));
        }
    }
}
