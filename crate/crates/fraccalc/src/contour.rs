//! Fractional differintegrals along curves in the complex plane.
//!
//! A curve ψ is a polyline whose two ends are rays toward `exp(iθ1)∞` and `exp(iθ2)∞`.
//! For a point `z0` on ψ the operator of side ψ± integrates along the part of ψ running
//! from `z0` to the corresponding end:
//!
//! `D^α f(z0) = -(1/Γ(-α)) FP∫ f(z) (z0 - z)^{-α-1} dz`
//!
//! The phase of `z0 - z` starts at `arg(-ν0) ∈ (-2π, 0]`, `ν0` being the direction of the
//! path at `z0`, and is continued along the path. On the real axis this reproduces the
//! real-line operators of the same side.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::branchcut::{
    from_pair, piece_intersection, rule2_windings, to_pair, BranchAssignment, CutCurve, CutPiece, UnitPhase,
};
use crate::error::{Error, Result};
use crate::kernel::{Order, OrderClass};
use crate::poleform::{BranchChoice, PoleForm};
use crate::quad::{Est, Quad, QuadratureConfig, Tail};
use crate::realline::{DifferintResult, Method};
use crate::scalar::{cis, cx, finite, i_unit, re, Real, C};
use crate::special::{factorial, gamma, rgamma};

type CFn<T> = dyn Fn(C<T>) -> C<T> + Send + Sync;

/// A function analytic near the curve, with its decay along the end rays.
#[derive(Clone)]
pub struct AnalyticFn<T: Real> {
    pub f: Arc<CFn<T>>,
    pub tail: Tail<T>,
    /// Known singular points, kept away from cuts and Cauchy circles.
    pub singularities: Vec<C<T>>,
}

impl<T: Real> AnalyticFn<T> {
    pub fn new(f: impl Fn(C<T>) -> C<T> + Send + Sync + 'static, tail: Tail<T>) -> Self {
        Self { f: Arc::new(f), tail, singularities: Vec::new() }
    }

    pub fn eval(&self, z: C<T>) -> C<T> {
        (self.f)(z)
    }

    pub fn from_pole_form(h: &PoleForm<T>) -> Self {
        let p = h.decay_order();
        let h2 = h.clone();
        Self {
            f: Arc::new(move |z| h2.eval(z)),
            tail: p.map_or(Tail::Exponential, |p| Tail::Algebraic(T::of(p))),
            singularities: h.poles(),
        }
    }

    pub fn lorentzian() -> Self {
        Self::from_pole_form(&PoleForm::lorentzian())
    }

    /// `exp(-z²)`.
    pub fn gaussian() -> Self {
        Self::new(|z: C<T>| (-z * z).exp(), Tail::Unknown)
    }

    /// `exp(c z)`.
    pub fn exp(c: C<T>) -> Self {
        Self::new(move |z: C<T>| (c * z).exp(), Tail::Unknown)
    }

    fn min_singular_distance(&self, z: C<T>) -> T {
        self.singularities.iter().map(|&p| (p - z).norm()).fold(T::infinity(), |a, b| a.min(b))
    }
}

/// Which end of the parametrization.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum End {
    /// `ψ(-∞) = exp(iθ1)∞`.
    First,
    /// `ψ(+∞) = exp(iθ2)∞`.
    Last,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    PsiPlus,
    PsiMinus,
}

/// A side with its resolved endpoint.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SideLabel<T> {
    pub side: Side,
    pub end: End,
    pub theta: T,
}

/// Simple polyline `ψ` with end rays toward `exp(iθ1)∞` (before the first vertex) and
/// `exp(iθ2)∞` (after the last vertex).
#[derive(Clone, Debug, PartialEq)]
pub struct CurvePsi<T> {
    pub vertices: Vec<C<T>>,
    pub theta1: T,
    pub theta2: T,
}

#[derive(Serialize, Deserialize)]
struct CurveWire {
    vertices: Vec<[f64; 2]>,
    theta1: f64,
    theta2: f64,
}

fn unit<T: Real>(z: C<T>) -> C<T> {
    z / z.norm()
}

fn tol_of<T: Real>(z: C<T>) -> T {
    T::lit(1e-12) * z.norm().max(T::one())
}

impl<T: Real> CurvePsi<T> {
    pub fn new(vertices: Vec<C<T>>, theta1: T, theta2: T) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::Input("curve needs at least one vertex".into()));
        }
        if !(theta1.is_finite() && theta2.is_finite()) || vertices.iter().any(|&v| !finite(v)) {
            return Err(Error::Input("curve data must be finite".into()));
        }
        if (cis(theta1) - cis(theta2)).norm() <= T::lit(1e-12) {
            return Err(Error::Geometry("degenerate curve: both ends go to the same direction".into()));
        }
        if vertices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Input("repeated vertex in curve".into()));
        }
        let psi = Self { vertices, theta1, theta2 };
        psi.validate_simple()?;
        Ok(psi)
    }

    /// Straight line through `p` traversed in direction `exp(iθ)`.
    pub fn line(p: C<T>, theta: T) -> Self {
        Self { vertices: vec![p], theta1: theta + T::PI(), theta2: theta }
    }

    /// Real axis traversed from `-∞` to `+∞`.
    pub fn real_axis() -> Self {
        Self::line(re(T::zero()), T::zero())
    }

    /// The same point set traversed backwards.
    pub fn reversed(&self) -> Self {
        let mut v = self.vertices.clone();
        v.reverse();
        Self { vertices: v, theta1: self.theta2, theta2: self.theta1 }
    }

    /// Piece 0 is the first ray, leaving `v_0` toward `exp(iθ1)∞`; pieces `1..m` join
    /// consecutive vertices; piece `m` is the last ray.
    fn pieces(&self) -> Vec<CutPiece<T>> {
        let v = &self.vertices;
        let mut out = vec![CutPiece { start: v[0], dir: cis(self.theta1), unbounded: true }];
        out.extend(v.windows(2).map(|w| CutPiece { start: w[0], dir: w[1] - w[0], unbounded: false }));
        out.push(CutPiece { start: v[v.len() - 1], dir: cis(self.theta2), unbounded: true });
        out
    }

    fn validate_simple(&self) -> Result<()> {
        let p = self.pieces();
        let m = p.len();
        let bad = || Err(Error::Geometry("curve intersects itself".into()));
        // The first ray points away from v_0; reversing the first segment makes its end the shared vertex.
        let first_seg = if m > 2 {
            CutPiece { start: p[1].start + p[1].dir, dir: -p[1].dir, unbounded: false }
        } else {
            p[1]
        };
        if m == 2 {
            return Ok(());
        }
        if piece_intersection(&first_seg, &p[0], true) == Some(true) {
            return bad();
        }
        for i in 0..m {
            for j in i + 1..m {
                if i == 0 && j == 1 {
                    continue;
                }
                let adjacent = j == i + 1;
                if piece_intersection(&p[i], &p[j], adjacent) == Some(true) {
                    return bad();
                }
            }
        }
        Ok(())
    }

    fn direction_in(&self, j: usize) -> C<T> {
        if j == 0 {
            -cis(self.theta1)
        } else {
            unit(self.vertices[j] - self.vertices[j - 1])
        }
    }

    fn direction_out(&self, j: usize) -> C<T> {
        if j + 1 == self.vertices.len() {
            cis(self.theta2)
        } else {
            unit(self.vertices[j + 1] - self.vertices[j])
        }
    }

    // (piece index, vertex index when z0 sits on a vertex).
    fn locate(&self, z0: C<T>) -> Result<(usize, Option<usize>)> {
        let eps = tol_of(z0);
        if let Some(j) = self.vertices.iter().position(|&v| (v - z0).norm() <= eps) {
            if (self.direction_in(j) - self.direction_out(j)).norm() > T::lit(1e-12) {
                return Err(Error::Geometry("evaluation point is a corner of the curve".into()));
            }
            return Ok((j, Some(j)));
        }
        for (i, p) in self.pieces().iter().enumerate() {
            let d2 = p.dir.norm_sqr();
            let u = ((z0 - p.start) * p.dir.conj()).re / d2;
            if u < T::zero() || (!p.unbounded && u > T::one()) {
                continue;
            }
            if (p.start + p.dir * u - z0).norm() <= eps {
                return Ok((i, None));
            }
        }
        Err(Error::Geometry("evaluation point is not on the curve".into()))
    }

    /// Unit tangent in the direction of traversal.
    pub fn tangent(&self, z0: C<T>) -> Result<C<T>> {
        let (i, vertex) = self.locate(z0)?;
        Ok(match vertex {
            Some(j) => self.direction_out(j),
            None if i == 0 => -cis(self.theta1),
            None if i == self.vertices.len() => cis(self.theta2),
            None => unit(self.vertices[i] - self.vertices[i - 1]),
        })
    }

    /// Part of the curve from `z0` to the given end, as a cut.
    pub fn cut_toward(&self, z0: C<T>, end: End) -> Result<CutCurve<T>> {
        let (i, vertex) = self.locate(z0)?;
        let m = self.vertices.len();
        let mut pts = vec![z0];
        match (end, vertex) {
            (End::First, Some(j)) => pts.extend(self.vertices[..j].iter().rev()),
            (End::First, None) => pts.extend(self.vertices[..i].iter().rev()),
            (End::Last, Some(j)) => pts.extend(&self.vertices[j + 1..]),
            (End::Last, None) if i < m => pts.extend(&self.vertices[i..]),
            (End::Last, None) => {}
        }
        let theta = match end {
            End::First => self.theta1,
            End::Last => self.theta2,
        };
        CutCurve::new(z0, pts, theta)
    }

    /// Part of the curve from `z0` toward the end of `side`.
    pub fn cut(&self, z0: C<T>, side: Side) -> Result<CutCurve<T>> {
        let (plus, minus) = psi_side_labels(self)?;
        let end = if side == Side::PsiPlus { plus.end } else { minus.end };
        self.cut_toward(z0, end)
    }

    pub fn to_json(&self) -> String {
        let wire = CurveWire {
            vertices: self.vertices.iter().map(|&v| to_pair(v)).collect(),
            theta1: self.theta1.to_f64_lossy(),
            theta2: self.theta2.to_f64_lossy(),
        };
        serde_json::to_string(&wire).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let w: CurveWire = serde_json::from_str(text).map_err(|e| Error::Input(format!("curve JSON: {e}")))?;
        Self::new(w.vertices.into_iter().map(from_pair).collect(), T::lit(w.theta1), T::lit(w.theta2))
    }
}

/// Assigns ψ+ to the end with the smaller `cos θ`, ties broken by the smaller `sin θ`.
pub fn psi_side_labels<T: Real>(psi: &CurvePsi<T>) -> Result<(SideLabel<T>, SideLabel<T>)> {
    let (c1, c2) = (psi.theta1.cos(), psi.theta2.cos());
    let (s1, s2) = (psi.theta1.sin(), psi.theta2.sin());
    let eps = T::lit(1e-12);
    let first_is_plus = if (c1 - c2).abs() > eps {
        c1 < c2
    } else if (s1 - s2).abs() > eps {
        s1 < s2
    } else {
        return Err(Error::Geometry("degenerate curve: both ends go to the same direction".into()));
    };
    let first = |side| SideLabel { side, end: End::First, theta: psi.theta1 };
    let last = |side| SideLabel { side, end: End::Last, theta: psi.theta2 };
    Ok(if first_is_plus {
        (first(Side::PsiPlus), last(Side::PsiMinus))
    } else {
        (last(Side::PsiPlus), first(Side::PsiMinus))
    })
}

/// `arg(-ν0)` in `(-2π, 0]`.
fn start_phase<T: Real>(nu0: C<T>) -> T {
    let a = (-nu0).arg();
    if a > T::zero() {
        a - T::TAU()
    } else {
        a
    }
}

fn power<T: Real>(w: C<T>, expo: C<T>, phase: T) -> C<T> {
    (expo * cx(w.norm().ln(), phase)).exp()
}

struct PathSetup<T: Real> {
    quad: Quad<T>,
    cfg: QuadratureConfig<T>,
    h0: T,
    l_min: T,
}

impl<T: Real> PathSetup<T> {
    fn new(f: &AnalyticFn<T>, z0: C<T>, cfg: QuadratureConfig<T>) -> Result<Self> {
        let quad = Quad::new(cfg)?;
        let far = f.singularities.iter().map(|p| p.norm()).fold(T::zero(), |a, b| a.max(b));
        let h0 = (f.min_singular_distance(z0) / T::lit(2.0)).min(T::one());
        let l_min = cfg.truncation_radius.unwrap_or(T::lit(4.0) * (z0.norm() + far + T::one()));
        Ok(Self { quad, cfg, h0, l_min })
    }

    /// `∫_cut f(z) w^expo dz` with `w = z0 - z`, as a finite part at `z0`, or trimmed to
    /// `|z - z0| ≥ ε` when `trim` is set.
    fn integral(&self, f: &AnalyticFn<T>, cut: &CutCurve<T>, expo: C<T>, trim: Option<T>) -> Result<Est<T>> {
        let z0 = cut.branch_point;
        let pieces = cut.pieces();
        let nu0 = cut.initial_direction();
        let theta0 = start_phase(nu0);
        let rot = nu0 * (i_unit::<T>() * expo * theta0).exp();
        let g = |s: T| f.eval(z0 + nu0 * s) * rot;
        let first = pieces[0];
        let mut acc = match (first.unbounded, trim) {
            (false, None) => self.quad.singular_segment(expo, &g, first.dir.norm())?,
            (true, None) => self.quad.ray(expo, &g, self.h0, self.l_min, f.tail)?,
            (false, Some(eps)) => {
                let h = |s: T| g(s) * (expo * s.ln()).exp();
                self.quad.graded(&h, eps, first.dir.norm(), h(eps).norm() * eps)?
            }
            (true, Some(eps)) => {
                let h = |s: T| g(s) * (expo * s.ln()).exp();
                self.quad.ray_from(&h, eps, self.l_min, f.tail, expo, Est::zero())?
            }
        };
        if first.unbounded {
            return Ok(acc);
        }
        let mut phase = theta0;
        for p in &pieces[1..] {
            let a = p.start;
            let wa = z0 - a;
            let u = p.dir / p.dir.norm();
            let phase_a = phase;
            let integrand = |z: C<T>| {
                let w = z0 - z;
                f.eval(z) * power(w, expo, phase_a + (w / wa).arg()) * u
            };
            if p.unbounded {
                let h = |t: T| integrand(a + u * (t - T::one()));
                acc = self.quad.ray_from(&h, T::one(), self.l_min, f.tail, expo, acc)?;
            } else {
                let len = p.dir.norm();
                let h = |s: T| integrand(a + u * s);
                let tol = self.cfg.tol(acc.value.norm()) / T::lit(8.0);
                let seg = self.quad.adaptive(&h, T::zero(), len, tol)?;
                acc = Est { value: acc.value + seg.value, err: acc.err + seg.err };
                phase = phase_a + ((z0 - (a + p.dir)) / wa).arg();
            }
        }
        Ok(acc)
    }
}

fn check_cut<T: Real>(f: &AnalyticFn<T>, cut: &CutCurve<T>) -> Result<()> {
    for &p in &f.singularities {
        if cut.distance(p) <= tol_of(p) {
            return Err(Error::Geometry("a singularity of f lies on the path".into()));
        }
    }
    if f.min_singular_distance(cut.branch_point) <= tol_of(cut.branch_point) {
        return Err(Error::PoleAtEvaluationPoint(cut.branch_point.re.to_f64_lossy()));
    }
    Ok(())
}

/// `lim f(z)/z^{α1} = 0` along the end ray of the cut.
fn growth_ok<T: Real>(f: &AnalyticFn<T>, cut: &CutCurve<T>, alpha1: T) -> bool {
    match f.tail {
        Tail::Exponential => true,
        Tail::Algebraic(p) => p + alpha1 > T::zero(),
        Tail::Unknown => {
            let last = *cut.pieces().last().expect("non-empty");
            let samples: Vec<T> = (4..=20)
                .map(|j| {
                    let s = T::lit(2f64.powi(j));
                    f.eval(last.start + last.dir * s).norm() / s.powf(alpha1)
                })
                .collect();
            if samples.iter().any(|v| !v.is_finite()) {
                return false;
            }
            let tail = &samples[samples.len() - 5..];
            let increasing = tail.windows(2).all(|w| w[1] >= w[0]) && tail[0] > T::zero();
            !increasing
        }
    }
}

/// `f^{(n)}(z0)` from the Cauchy integral on a circle, by the trapezoidal rule.
fn cauchy<T: Real>(f: &AnalyticFn<T>, n: usize, z0: C<T>) -> Est<T> {
    let r = (f.min_singular_distance(z0) / T::lit(2.0)).min(T::lit(0.5));
    let sum = |m: usize| {
        let mut acc = C::new(T::zero(), T::zero());
        for j in 0..m {
            let t = T::TAU() * T::of(j) / T::of(m);
            acc += f.eval(z0 + cis(t) * r) * cis(-T::of(n) * t);
        }
        acc * factorial::<T>(n) / (T::of(m) * r.powi(n as i32))
    };
    let coarse = sum(64);
    let fine = sum(128);
    Est { value: fine, err: (fine - coarse).norm() }
}

/// `D_ψ±^α f(z0)`.
pub fn frac_differint_curve<T: Real>(
    f: &AnalyticFn<T>,
    alpha: &Order<T>,
    z0: C<T>,
    psi: &CurvePsi<T>,
    side: Side,
    cfg: &QuadratureConfig<T>,
) -> Result<DifferintResult<T>> {
    let cut = psi.cut(z0, side)?;
    check_cut(f, &cut)?;
    let branch = UnitPhase::principal(alpha.value);
    let (est, method) = match alpha.class {
        OrderClass::NonNegInteger => (cauchy(f, alpha.n as usize, z0), Method::IntegerDerivative),
        OrderClass::NegInteger => {
            let n = (-alpha.n) as usize;
            (nfold_est(f, n, &cut, cfg)?, Method::NFoldIntegral)
        }
        _ => {
            if !growth_ok(f, &cut, alpha.alpha1()) {
                return Err(Error::Convergence(format!(
                    "f(z)/z^{} does not vanish along the end of the path",
                    alpha.alpha1()
                )));
            }
            let setup = PathSetup::new(f, z0, *cfg)?;
            let expo = -alpha.value - T::one();
            let c = -rgamma(-alpha.value);
            (setup.integral(f, &cut, expo, None)?.scale(c), Method::EpsRegularized)
        }
    };
    if !finite(est.value) {
        return Err(Error::Domain("non-finite curve integral".into()));
    }
    Ok(DifferintResult { value: est.value, est_error: est.err, method, branch, approximate: false })
}

/// [`frac_differint_curve`] at several points in parallel.
pub fn frac_differint_curve_many<T: Real>(
    f: &AnalyticFn<T>,
    alpha: &Order<T>,
    points: &[C<T>],
    psi: &CurvePsi<T>,
    side: Side,
    cfg: &QuadratureConfig<T>,
) -> Vec<Result<DifferintResult<T>>> {
    points.par_iter().map(|&z| frac_differint_curve(f, alpha, z, psi, side, cfg)).collect()
}

/// The ε-trimmed form `-(1/Γ(-α)) (∫_{|z-z0|≥ε} f(z)(z0-z)^{-α-1} dz + f(z0) ε^{-α} e^{-iαθ0}/α)`.
pub fn eps_regularized_curve<T: Real>(
    f: &AnalyticFn<T>,
    alpha: &Order<T>,
    z0: C<T>,
    psi: &CurvePsi<T>,
    side: Side,
    eps: T,
    cfg: &QuadratureConfig<T>,
) -> Result<C<T>> {
    if alpha.is_integer() {
        return Err(Error::Domain("the ε form needs a non-integer order".into()));
    }
    if !(eps > T::zero()) {
        return Err(Error::Input("ε must be positive".into()));
    }
    let cut = psi.cut(z0, side)?;
    check_cut(f, &cut)?;
    let first = cut.pieces()[0];
    if !first.unbounded && eps >= first.dir.norm() {
        return Err(Error::Input("ε exceeds the first straight piece of the path".into()));
    }
    let a = alpha.value;
    let setup = PathSetup::new(f, z0, *cfg)?;
    let trimmed = setup.integral(f, &cut, -a - T::one(), Some(eps))?.value;
    let theta0 = start_phase(cut.initial_direction());
    let boundary = f.eval(z0) * (-a * cx(eps.ln(), theta0)).exp() / a;
    Ok(-rgamma(-a) * (trimmed + boundary))
}

/// Limit of [`eps_regularized_curve`] over `ε0 2^{-k}`, `k = 0..=4`, eliminating the
/// `ε^{j-α}` terms for `j = 1..=4`. The error estimate is the size of the last step.
pub fn eps_limit_curve<T: Real>(
    f: &AnalyticFn<T>,
    alpha: &Order<T>,
    z0: C<T>,
    psi: &CurvePsi<T>,
    side: Side,
    eps0: T,
    cfg: &QuadratureConfig<T>,
) -> Result<Est<T>> {
    let two = T::lit(2.0);
    let mut v: Vec<C<T>> = (0..5)
        .map(|k| eps_regularized_curve(f, alpha, z0, psi, side, eps0 / two.powi(k), cfg))
        .collect::<Result<_>>()?;
    let mut err = T::infinity();
    for j in 1..v.len() {
        let r = ((re(T::of(j)) - alpha.value) * two.ln()).exp();
        let next: Vec<C<T>> = v.windows(2).map(|w| (w[1] * r - w[0]) / (r - T::one())).collect();
        err = (next[next.len() - 1] - v[v.len() - 1]).norm();
        v = next;
    }
    Ok(Est { value: v[0], err })
}

fn nfold_est<T: Real>(f: &AnalyticFn<T>, n: usize, cut: &CutCurve<T>, cfg: &QuadratureConfig<T>) -> Result<Est<T>> {
    let setup = PathSetup::new(f, cut.branch_point, *cfg)?;
    let v = setup.integral(f, cut, re(T::of(n - 1)), None)?;
    Ok(v.scale(re(-T::one() / factorial::<T>(n - 1))))
}

/// `-(1/(n-1)!) ∫ (z0 - z)^{n-1} f(z) dz` along the side's part of ψ.
pub fn nfold_primitive_curve<T: Real>(
    f: &AnalyticFn<T>,
    n: usize,
    z0: C<T>,
    psi: &CurvePsi<T>,
    side: Side,
    cfg: &QuadratureConfig<T>,
) -> Result<C<T>> {
    if n == 0 {
        return Err(Error::Input("n must be positive".into()));
    }
    let cut = psi.cut(z0, side)?;
    check_cut(f, &cut)?;
    if let Tail::Algebraic(p) = f.tail {
        if p <= T::of(n) {
            return Err(Error::Convergence(format!("tail t^-{p} is too slow for an {n}-fold primitive")));
        }
    }
    Ok(nfold_est(f, n, &cut, cfg)?.value)
}

/// Reference point `z0 - r` on the reference half line, closer to `z0` than anything else.
fn near_reference<T: Real>(cut: &CutCurve<T>, others: &[C<T>]) -> C<T> {
    let z0 = cut.branch_point;
    let first = cut.pieces()[0];
    let mut r = others.iter().map(|&p| (p - z0).norm()).fold(T::one(), |a, b| a.min(b));
    if !first.unbounded {
        r = r.min(first.dir.norm());
    }
    z0 - re(r / T::lit(4.0))
}

/// The branch choice for a pole sum induced by taking ψ's part toward `side` as the cut.
pub fn induced_branch_choice<T: Real>(h: &PoleForm<T>, z0: C<T>, psi: &CurvePsi<T>, side: Side) -> Result<BranchChoice<T>> {
    let cut = psi.cut(z0, side)?;
    let z_r = near_reference(&cut, &h.poles());
    BranchChoice::curve(h, cut, z_r)
}

/// `(Γ(α+1)/2iπ) ∫_{C0} f(z) (z0 - z)^{-α-1} dz` along the polyline `c0`, with the phase of
/// `z0 - z` fixed at the first vertex by `branch` and continued along `c0`.
pub fn remainder_integral<T: Real>(
    f: &AnalyticFn<T>,
    alpha: &Order<T>,
    z0: C<T>,
    c0: &[C<T>],
    cut: &CutCurve<T>,
    branch: &BranchAssignment<T>,
    cfg: &QuadratureConfig<T>,
) -> Result<C<T>> {
    if c0.len() < 2 {
        return Err(Error::Input("C0 needs at least two vertices".into()));
    }
    if branch.is_empty() {
        return Err(Error::Input("branch assignment must cover the first vertex of C0".into()));
    }
    let pieces = cut.pieces();
    for w in c0.windows(2) {
        let seg = CutPiece { start: w[0], dir: w[1] - w[0], unbounded: false };
        if pieces.iter().any(|p| piece_intersection(&seg, p, false) == Some(true)) {
            return Err(Error::Geometry("C0 crosses the cut".into()));
        }
    }
    let quad = Quad::new(*cfg)?;
    let expo = -alpha.value - T::one();
    let mut phase = branch.effective_phase(0);
    let mut acc = C::new(T::zero(), T::zero());
    for w in c0.windows(2) {
        let (a, b) = (w[0], w[1]);
        let wa = z0 - a;
        let d = b - a;
        let phase_a = phase;
        let h = |s: T| {
            let z = a + d * s;
            let wz = z0 - z;
            f.eval(z) * power(wz, expo, phase_a + (wz / wa).arg()) * d
        };
        acc += quad.adaptive(&h, T::zero(), T::one(), cfg.tol(acc.norm()) / T::lit(8.0))?.value;
        phase = phase_a + ((z0 - b) / wa).arg();
    }
    Ok(gamma(alpha.value + T::one())? / (i_unit::<T>() * T::TAU()) * acc)
}

/// Branch assignment of the point `s` relative to `cut`, using the reference point of
/// [`induced_branch_choice`].
pub fn point_branch<T: Real>(cut: &CutCurve<T>, s: C<T>, others: &[C<T>]) -> Result<BranchAssignment<T>> {
    let mut all = others.to_vec();
    all.push(s);
    rule2_windings(cut, near_reference(cut, &all), &[s])
}
