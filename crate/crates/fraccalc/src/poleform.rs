//! Closed-form differintegrals of pole sums `h(z) = Σ a_k (z - z_k)^{-n_k-1}` with explicit
//! branch bookkeeping, enumeration of the branch values and primitive-constant differences.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::branchcut::{from_pair, rule2_windings, to_pair, BranchAssignment, CutCurve, UnitPhase};
use crate::error::{Error, Result};
use crate::kernel::{Order, OrderClass};
use crate::quad::Tail;
use crate::realline::RealFunction;
use crate::scalar::{cx, i_unit, re, Real, C};
use crate::special::{binomial, factorial, gamma};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PoleTerm<T> {
    pub a: C<T>,
    pub z: C<T>,
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PoleForm<T> {
    pub terms: Vec<PoleTerm<T>>,
}

impl<T: Real> PoleForm<T> {
    pub fn new(terms: Vec<PoleTerm<T>>) -> Result<Self> {
        for (i, a) in terms.iter().enumerate() {
            if !(a.z.re.is_finite() && a.z.im.is_finite() && a.a.re.is_finite() && a.a.im.is_finite()) {
                return Err(Error::Input("non-finite pole data".into()));
            }
            if terms[..i].iter().any(|b| b.z == a.z) {
                return Err(Error::Input("poles must be pairwise distinct".into()));
            }
        }
        Ok(Self { terms })
    }

    /// `1/(1+x²) = (1/2i)/(x - i) - (1/2i)/(x + i)`, poles ordered `-i`, `+i`.
    pub fn lorentzian() -> Self {
        let half_over_i = C::new(T::one(), T::zero()) / (i_unit::<T>() * T::lit(2.0));
        Self {
            terms: vec![
                PoleTerm { a: -half_over_i, z: cx(T::zero(), -T::one()), n: 0 },
                PoleTerm { a: half_over_i, z: cx(T::zero(), T::one()), n: 0 },
            ],
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn poles(&self) -> Vec<C<T>> {
        self.terms.iter().map(|t| t.z).collect()
    }

    pub fn eval(&self, z: C<T>) -> C<T> {
        self.terms
            .iter()
            .fold(C::new(T::zero(), T::zero()), |acc, t| acc + t.a * (z - t.z).powi(-(t.n as i32) - 1))
    }

    /// Smallest `p` with `h(z) ~ c z^{-p}` at infinity; `None` when every coefficient up to
    /// the number of poles plus the highest order cancels.
    pub fn decay_order(&self) -> Option<usize> {
        let max_n = self.terms.iter().map(|t| t.n).max()?;
        let radius = self.terms.iter().map(|t| t.z.norm()).fold(T::one(), |a, b| a.max(b));
        let size: T = self.terms.iter().map(|t| t.a.norm()).fold(T::zero(), |a, b| a + b);
        (1..=max_n + 1 + self.terms.len()).find(|&p| {
            let c = self.terms.iter().filter(|t| t.n < p).fold(C::new(T::zero(), T::zero()), |acc, t| {
                acc + t.a * binomial::<T>(p - 1, t.n) * t.z.powi((p - 1 - t.n) as i32)
            });
            c.norm() > T::lit(1e-12) * size * radius.powi(p as i32 - 1)
        })
    }

    pub fn to_json(&self) -> String {
        let wire = PoleFormWire {
            terms: self.terms.iter().map(|t| PoleTermWire { a: to_pair(t.a), z: to_pair(t.z), n: t.n }).collect(),
        };
        serde_json::to_string(&wire).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let wire: PoleFormWire = serde_json::from_str(text).map_err(|e| Error::Input(format!("pole form JSON: {e}")))?;
        Self::new(
            wire.terms
                .into_iter()
                .map(|t| PoleTerm { a: from_pair(t.a), z: from_pair(t.z), n: t.n })
                .collect(),
        )
    }
}

#[derive(Serialize, Deserialize)]
struct PoleTermWire {
    a: [f64; 2],
    z: [f64; 2],
    n: usize,
}

#[derive(Serialize, Deserialize)]
struct PoleFormWire {
    terms: Vec<PoleTermWire>,
}

impl<T: Real> RealFunction<T> for PoleForm<T> {
    fn value(&self, x: T) -> C<T> {
        self.eval(re(x))
    }

    fn deriv(&self, k: usize, x: T) -> Option<C<T>> {
        let s = if k % 2 == 0 { T::one() } else { -T::one() };
        Some(self.terms.iter().fold(C::new(T::zero(), T::zero()), |acc, t| {
            let c = factorial::<T>(t.n + k) / factorial::<T>(t.n) * s;
            acc + t.a * c * (re(x) - t.z).powi(-((t.n + k) as i32) - 1)
        }))
    }

    fn tail(&self, _side: crate::branchcut::CutOrientation) -> Tail<T> {
        self.decay_order().map_or(Tail::Exponential, |p| Tail::Algebraic(T::of(p)))
    }

    fn real_poles(&self) -> Vec<T> {
        self.terms.iter().filter(|t| t.z.im == T::zero()).map(|t| t.z.re).collect()
    }

    fn scale(&self) -> T {
        self.terms.iter().map(|t| t.z.norm()).fold(T::one(), |a, b| a.max(b))
    }
}

/// How the cut is specified.
#[derive(Clone, Debug, PartialEq)]
pub enum CutSpec<T> {
    /// Half line `[z0, z0 + exp(iθ)∞)`.
    Straight(T),
    Curve(CutCurve<T>),
    /// Windings supplied directly.
    Explicit,
}

/// A cut together with the phases and windings it induces on the poles.
#[derive(Clone, Debug, PartialEq)]
pub struct BranchChoice<T> {
    pub cut: CutSpec<T>,
    pub windings: BranchAssignment<T>,
    /// Branch index of the unit phase `(-1)^α`.
    pub unit_phase_n: i64,
}

impl<T: Real> BranchChoice<T> {
    /// Straight cut leaving `z0` in direction `θ`.
    pub fn straight(h: &PoleForm<T>, z0: C<T>, theta: T) -> Result<Self> {
        let windings = BranchAssignment::straight(z0, theta, &h.poles())?;
        Ok(Self { cut: CutSpec::Straight(theta), windings, unit_phase_n: 0 })
    }

    /// Polyline cut with reference point `z_r` on `(z0, z0 - ∞)`.
    pub fn curve(h: &PoleForm<T>, cut: CutCurve<T>, z_r: C<T>) -> Result<Self> {
        let windings = rule2_windings(&cut, z_r, &h.poles())?;
        Ok(Self { cut: CutSpec::Curve(cut), windings, unit_phase_n: 0 })
    }

    /// Base angles measured from `(z0, z0 - ∞)` with the given winding integers.
    pub fn explicit(h: &PoleForm<T>, z0: C<T>, windings: &[i64]) -> Result<Self> {
        if windings.len() != h.len() {
            return Err(Error::Input("one winding per pole is required".into()));
        }
        let mut phases = Vec::with_capacity(h.len());
        for p in h.poles() {
            let w = z0 - p;
            if w.norm() == T::zero() {
                return Err(Error::Domain("evaluation point coincides with a pole".into()));
            }
            phases.push(crate::branchcut::wrap_2pi(w.im.atan2(w.re)));
        }
        Ok(Self {
            cut: CutSpec::Explicit,
            windings: BranchAssignment { reference_point: z0 - T::one(), windings: windings.to_vec(), phases },
            unit_phase_n: 0,
        })
    }

    pub fn with_unit_phase(mut self, n: i64) -> Self {
        self.unit_phase_n = n;
        self
    }
}

/// `(-1)^α Σ_k Γ(α+n_k+1)/Γ(n_k+1) · a_k · exp(-i(φ_k + 2πm_k)(α+1)) / (|w_k|^{α+1} w_k^{n_k})`,
/// `w_k = z0 - z_k`.
pub fn closed_frac_deriv<T: Real>(h: &PoleForm<T>, alpha: &Order<T>, z0: C<T>, choice: &BranchChoice<T>) -> Result<C<T>> {
    if choice.windings.len() != h.len() {
        return Err(Error::Input("branch assignment does not match the pole form".into()));
    }
    if alpha.class == OrderClass::NegInteger {
        return Err(Error::GammaPole(format!("α = {}; use the repeated-integral path", alpha.n)));
    }
    match &choice.cut {
        CutSpec::Straight(theta) => {
            let d = crate::branchcut::CutCurve::straight(z0, *theta);
            for t in &h.terms {
                if d.distance(t.z) <= T::lit(1e-12) * t.z.norm().max(T::one()) {
                    return Err(Error::Geometry("pole lies on the cut".into()));
                }
            }
        }
        CutSpec::Curve(c) => {
            if c.branch_point != z0 {
                return Err(Error::Geometry("cut must start at the evaluation point".into()));
            }
        }
        CutSpec::Explicit => {}
    }
    let a1 = alpha.value + T::one();
    let unit = UnitPhase::new(alpha.value, choice.unit_phase_n).value;
    let two_pi = T::PI() + T::PI();
    let mut acc = C::new(T::zero(), T::zero());
    for (k, t) in h.terms.iter().enumerate() {
        let w = z0 - t.z;
        let r = w.norm();
        if r == T::zero() {
            return Err(Error::Domain("evaluation point coincides with a pole".into()));
        }
        let phi = choice.windings.phases[k] + two_pi * T::lit(choice.windings.windings[k] as f64);
        let g = gamma(a1 + T::of(t.n))? / factorial::<T>(t.n);
        acc += g * t.a * (-a1 * cx(r.ln(), phi)).exp() * w.powi(-(t.n as i32));
    }
    Ok(unit * acc)
}

/// `exp(-iπk(α+1)) Γ(α+1) (1+x²)^{-(α+1)/2} sin[(arctan x + (2k+1)π/2)(α+1)]`.
///
/// `k = 0` is `D₊^α` of `1/(1+x²)`, `k = -1` is `D₋^α`; at `α = -1` the primitive
/// `arctan x + (2k+1)π/2` is returned.
pub fn lorentzian_closed<T: Real>(alpha: &Order<T>, x: T, k: i64) -> C<T> {
    if alpha.class == OrderClass::NonNegInteger {
        return crate::functions::Lorentzian.deriv(alpha.n as usize, x).expect("closed form");
    }
    let a1 = alpha.value + T::one();
    let c = x.atan() + T::lit((2 * k + 1) as f64) * T::FRAC_PI_2();
    if a1.norm() == T::zero() {
        return re(c);
    }
    // Γ(A) sin(cA) = Γ(A+1) sin(cA)/A stays finite as A → 0.
    let g1 = gamma(a1 + T::one()).unwrap_or(C::new(T::nan(), T::nan()));
    let r = (-a1 / T::lit(2.0) * (T::one() + x * x).ln()).exp();
    let phase = (a1 * cx(T::zero(), -T::PI() * T::lit(k as f64))).exp();
    phase * g1 * r * (a1 * c).sin() / a1
}

/// `|f₋(x) - (-1)^α f₊(-x)|` on the Lorentzian family.
pub fn reflection_check<T: Real>(alpha: &Order<T>, x: T) -> T {
    let unit = UnitPhase::principal(alpha.value).value;
    (lorentzian_closed(alpha, x, -1) - unit * lorentzian_closed(alpha, -x, 0)).norm()
}

/// Difference of primitive constants picked up by pole `p` under `m` extra windings:
/// `2iπ m a_p (z0 - z_p)^{n-n_p-1} / ((n-n_p-1)! n_p!)`, zero when `n_p ≥ n`.
pub fn primitive_difference<T: Real>(n: usize, pole: &PoleTerm<T>, z0: C<T>, m: i64) -> Result<C<T>> {
    if n == 0 {
        return Err(Error::Input("n must be at least 1".into()));
    }
    if pole.n >= n {
        return Ok(C::new(T::zero(), T::zero()));
    }
    let e = n - pole.n - 1;
    let two_i_pi = cx(T::zero(), T::PI() + T::PI());
    Ok(two_i_pi * T::lit(m as f64) * pole.a * (z0 - pole.z).powi(e as i32) / (factorial::<T>(e) * factorial::<T>(pole.n)))
}

/// Result of [`branch_value_set`].
#[derive(Clone, Debug, PartialEq)]
pub struct BranchValueSet<T> {
    /// Distinct values, with the number of lattice points that produced each.
    pub values: Vec<(C<T>, usize)>,
    pub lattice_points: usize,
    /// `q^{N+1}` for rational `α = p/q`.
    pub bound: Option<u64>,
    pub within_bound: bool,
    /// Whether `m_k → m_k + q` left every value unchanged (rational `α` only).
    pub periodic: Option<bool>,
    /// Distinct counts for enumeration bounds `1..=enum_bound`.
    pub counts_by_bound: Vec<usize>,
    /// Per-winding factor `exp(-2iπm(α+1))` as (phase mod 2π, modulus) for `m = -B..=B`.
    pub winding_factors: Vec<(i64, T, T)>,
}

impl<T> BranchValueSet<T> {
    pub fn count(&self) -> usize {
        self.values.len()
    }
}

fn merge<T: Real>(vals: &[C<T>]) -> Vec<(C<T>, usize)> {
    let scale = vals.iter().map(|v| v.norm()).fold(T::zero(), |a, b| a.max(b));
    let tol = T::lit(1e-10) * scale.max(T::min_positive_value());
    let mut out: Vec<(C<T>, usize)> = Vec::new();
    for v in vals {
        match out.iter_mut().find(|(u, _)| (*u - *v).norm() <= tol) {
            Some(e) => e.1 += 1,
            None => out.push((*v, 1)),
        }
    }
    out
}

fn lattice(n: usize, b: i64) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|p| {
                (-b..=b).map(move |m| {
                    let mut q = p.clone();
                    q.push(m);
                    q
                })
            })
            .collect();
    }
    out
}

/// All values of the closed form over windings `|m_k| ≤ enum_bound` (and, for rational
/// `α = p/q`, the `q` branches of the unit phase).
pub fn branch_value_set<T: Real>(h: &PoleForm<T>, alpha: &Order<T>, z0: C<T>, enum_bound: i64) -> Result<BranchValueSet<T>> {
    if enum_bound < 1 {
        return Err(Error::Input("enumeration bound must be at least 1".into()));
    }
    if h.is_empty() {
        return Err(Error::Input("empty pole form".into()));
    }
    let rational_q = match alpha.class {
        OrderClass::RationalPQ(_, q) => Some(q),
        _ => None,
    };
    let unit_range: Vec<i64> = match rational_q {
        Some(q) => (0..q).collect(),
        None => vec![0],
    };
    let eval_at = |ms: &[i64], n: i64| -> Result<C<T>> {
        let choice = BranchChoice::explicit(h, z0, ms)?.with_unit_phase(n);
        closed_frac_deriv(h, alpha, z0, &choice)
    };
    let collect = |b: i64| -> Result<Vec<C<T>>> {
        let pts = lattice(h.len(), b);
        let per: Vec<Result<Vec<C<T>>>> = pts
            .par_iter()
            .map(|ms| unit_range.iter().map(|&n| eval_at(ms, n)).collect())
            .collect();
        let mut all = Vec::new();
        for r in per {
            all.extend(r?);
        }
        Ok(all)
    };
    let mut counts_by_bound = Vec::new();
    for b in 1..enum_bound {
        counts_by_bound.push(merge(&collect(b)?).len());
    }
    let all = collect(enum_bound)?;
    let values = merge(&all);
    counts_by_bound.push(values.len());
    let bound = rational_q.map(|q| (q as u64).saturating_pow(h.len() as u32 + 1));
    let within_bound = bound.map(|b| values.len() as u64 <= b).unwrap_or(true);
    let periodic = match rational_q {
        Some(q) if q <= enum_bound => {
            let scale = values.iter().map(|v| v.0.norm()).fold(T::zero(), |a, b| a.max(b));
            let tol = T::lit(1e-10) * scale;
            let mut ok = true;
            for ms in lattice(h.len(), enum_bound) {
                for k in 0..ms.len() {
                    if ms[k] + q > enum_bound {
                        continue;
                    }
                    let mut shifted = ms.clone();
                    shifted[k] += q;
                    if (eval_at(&ms, 0)? - eval_at(&shifted, 0)?).norm() > tol {
                        ok = false;
                    }
                }
            }
            Some(ok)
        }
        _ => None,
    };
    let two_pi = T::PI() + T::PI();
    let winding_factors = (-enum_bound..=enum_bound)
        .map(|m| {
            let mf = T::lit(m as f64);
            let a1 = alpha.value + T::one();
            let phase = crate::branchcut::wrap_2pi(-two_pi * mf * a1.re);
            let modulus = (two_pi * mf * a1.im).exp();
            (m, phase, modulus)
        })
        .collect();
    Ok(BranchValueSet {
        values,
        lattice_points: all.len(),
        bound,
        within_bound,
        periodic,
        counts_by_bound,
        winding_factors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::branchcut::CutOrientation;
    use crate::quad::QuadratureConfig;
    use crate::realline::frac_differint;
    use num_complex::Complex64;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn c(a: f64, b: f64) -> Complex64 {
        Complex64::new(a, b)
    }

    fn lor() -> PoleForm<f64> {
        PoleForm::lorentzian()
    }

    #[test]
    fn lorentzian_decomposition_evaluates() {
        for &x in &[-2.0, 0.0, 0.3] {
            assert!((lor().eval(c(x, 0.0)) - 1.0 / (1.0 + x * x)).norm() < 1e-15);
        }
    }

    #[test]
    fn first_derivative_is_cut_independent() {
        let h = lor();
        for &theta in &[0.0, 0.7, PI, 4.0] {
            for &x in &[-1.2, 0.5] {
                let ch = BranchChoice::straight(&h, c(x, 0.0), theta).unwrap();
                let v = closed_frac_deriv(&h, &Order::real(1.0), c(x, 0.0), &ch).unwrap();
                let expect = -2.0 * x / (1.0 + x * x).powi(2);
                assert!((v - expect).norm() < 1e-14, "θ={theta} x={x} {v}");
            }
        }
    }

    #[test]
    fn single_pole_phase_and_winding() {
        let h = PoleForm::new(vec![PoleTerm { a: c(1.0, 0.0), z: c(0.0, 0.0), n: 0 }]).unwrap();
        let z0 = c(1.0, 0.0);
        let a = Order::real(0.5);
        let ch = BranchChoice::straight(&h, z0, PI / 2.0).unwrap();
        assert_eq!(ch.windings.phases[0], 0.0);
        let v = closed_frac_deriv(&h, &a, z0, &ch).unwrap();
        let unit = UnitPhase::principal(c(0.5, 0.0)).value;
        assert!((v - unit * 0.886_226_925_452_758).norm() < 1e-14);
        let wound = BranchChoice::explicit(&h, z0, &[1]).unwrap();
        let w = closed_frac_deriv(&h, &a, z0, &wound).unwrap();
        assert!((w + v).norm() < 1e-14);
    }

    #[test]
    fn power_rule_oracle() {
        // D^α (z - c)^{-1} = (-1)^α Γ(α+1) (z - c)^{-α-1} with the principal power when the
        // cut does not separate.
        let h = PoleForm::new(vec![PoleTerm { a: c(1.0, 0.0), z: c(0.3, -0.8), n: 0 }]).unwrap();
        let z0 = c(1.1, 0.4);
        let a = c(0.35, 0.0);
        let ch = BranchChoice::straight(&h, z0, PI).unwrap();
        let v = closed_frac_deriv(&h, &Order::new(a), z0, &ch).unwrap();
        let w = z0 - c(0.3, -0.8);
        let expect = UnitPhase::principal(a).value * crate::special::gamma(a + 1.0).unwrap() * w.powc(-(a + 1.0));
        assert!((v - expect).norm() < 1e-13 * expect.norm());
    }

    #[test]
    fn higher_order_pole() {
        // (z - c)^{-3}: D^α gives (-1)^α Γ(α+3)/2 (z - c)^{-α-3}.
        let cc = c(0.0, 1.0);
        let h = PoleForm::new(vec![PoleTerm { a: c(1.0, 0.0), z: cc, n: 2 }]).unwrap();
        let z0 = c(0.4, 0.0);
        let a = c(0.6, 0.0);
        let ch = BranchChoice::straight(&h, z0, PI).unwrap();
        let v = closed_frac_deriv(&h, &Order::new(a), z0, &ch).unwrap();
        let w: Complex64 = z0 - cc;
        let phi = crate::branchcut::wrap_2pi(w.arg());
        let wpow = (-(a + 3.0) * c(w.norm().ln(), phi)).exp();
        let expect = UnitPhase::principal(a).value * crate::special::gamma(a + 3.0).unwrap() / 2.0 * wpow;
        assert!((v - expect).norm() < 1e-13 * expect.norm());
    }

    #[test]
    fn lorentzian_family_examples() {
        let v = lorentzian_closed(&Order::real(0.5), 0.0, 0);
        assert!((v.re - 0.626_657_068_657_750_1f64).abs() < 1e-14);
        for k in -2..3 {
            let v = lorentzian_closed(&Order::real(1.0), 0.8, k);
            assert!((v - c(-1.6 / 1.64f64.powi(2), 0.0)).norm() < 1e-14, "k={k}");
            let p = lorentzian_closed(&Order::real(-1.0), 0.8, k);
            assert!((p.re - (0.8f64.atan() + (2 * k + 1) as f64 * PI / 2.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn limit_toward_minus_one_is_continuous() {
        for k in -1..2 {
            let target = 0.3f64.atan() + (2 * k + 1) as f64 * PI / 2.0;
            let hs: Vec<f64> = (3..6).map(|j| 10f64.powi(-j)).collect();
            let vs: Vec<Complex64> = hs.iter().map(|h| lorentzian_closed(&Order::real(-1.0 + h), 0.3, k)).collect();
            let (v, _) = crate::quad::richardson(&hs, &vs, 1.0);
            assert!((v.re - target).abs() < 1e-9, "k={k}");
        }
    }

    #[test]
    fn windings_reproduce_the_family() {
        let h = lor();
        for &a in &[0.5, 0.3, 1.7] {
            for &x in &[-0.7, 0.0, 1.3] {
                for k in -2..3 {
                    let ch = BranchChoice::explicit(&h, c(x, 0.0), &[0, k]).unwrap();
                    let v = closed_frac_deriv(&h, &Order::real(a), c(x, 0.0), &ch).unwrap();
                    let f = lorentzian_closed(&Order::real(a), x, k);
                    assert!((v - f).norm() < 1e-13 * f.norm().max(1.0), "a={a} x={x} k={k} {v} {f}");
                }
            }
        }
    }

    #[test]
    fn reflection_examples() {
        assert!(reflection_check(&Order::real(0.5), 1.0) <= 1e-12);
        assert_eq!(reflection_check(&Order::real(2.0), 3.0), 0.0);
        assert!(reflection_check(&Order::complex(0.3, 0.1), 0.7) <= 1e-12);
    }

    #[test]
    fn closed_form_matches_quadrature() {
        let h = lor();
        let cfg = QuadratureConfig::default();
        for &a in &[0.25, 0.5, 0.75, 1.5] {
            for i in 0..21 {
                let x = -5.0 + 0.5 * i as f64;
                for (side, theta) in [(CutOrientation::PlusAxis, PI), (CutOrientation::MinusAxis, 0.0)] {
                    let ch = BranchChoice::straight(&h, c(x, 0.0), theta).unwrap();
                    let closed = closed_frac_deriv(&h, &Order::real(a), c(x, 0.0), &ch).unwrap();
                    let q = frac_differint(&h, &Order::real(a), x, side, &cfg).unwrap().value;
                    assert!((closed - q).norm() <= 1e-6 * closed.norm().max(1e-12), "a={a} x={x} {side:?}");
                }
            }
        }
    }

    #[test]
    fn reference_shift_changes_only_the_unit_phase() {
        let h = PoleForm::new(vec![
            PoleTerm { a: c(1.0, 0.5), z: c(1.0, 0.3), n: 0 },
            PoleTerm { a: c(-0.3, 0.0), z: c(-2.0, 1.5), n: 1 },
            PoleTerm { a: c(0.2, 0.0), z: c(0.4, -1.2), n: 0 },
        ])
        .unwrap();
        let z0 = c(0.0, 0.0);
        let cut = CutCurve::new(z0, vec![z0, c(0.0, 1.0), c(-1.0, 1.0), c(-1.0, -2.0)], -PI / 2.0).unwrap();
        let a = Order::real(0.37);
        let ch1 = BranchChoice::curve(&h, cut.clone(), c(-0.5, 0.0)).unwrap();
        let ch2 = BranchChoice::curve(&h, cut, c(-1.5, 0.0)).unwrap();
        let shift = ch2.windings.windings[0] - ch1.windings.windings[0];
        assert!(ch1.windings.windings.iter().zip(&ch2.windings.windings).all(|(a, b)| b - a == shift));
        let v1 = closed_frac_deriv(&h, &a, z0, &ch1).unwrap();
        let v2 = closed_frac_deriv(&h, &a, z0, &ch2.with_unit_phase(shift)).unwrap();
        assert!((v1 - v2).norm() <= 1e-12 * v1.norm());
    }

    #[test]
    fn branch_sets() {
        let h = lor();
        let s = branch_value_set(&h, &Order::rational(1, 2).unwrap(), c(0.4, 0.0), 3).unwrap();
        assert_eq!(s.bound, Some(8));
        assert!(s.within_bound && s.count() <= 8);
        assert_eq!(s.periodic, Some(true));
        let s = branch_value_set(&h, &Order::real(2.0), c(0.4, 0.0), 3).unwrap();
        assert_eq!(s.count(), 1);
        let single = PoleForm::new(vec![PoleTerm { a: c(1.0, 0.0), z: c(0.0, 1.0), n: 0 }]).unwrap();
        let s = branch_value_set(&single, &Order::real(0.5f64.sqrt()), c(0.0, 0.0), 6).unwrap();
        assert_eq!(s.count(), 13);
        assert!(s.counts_by_bound.windows(2).all(|w| w[1] > w[0]));
        assert!(matches!(branch_value_set(&single, &Order::real(0.5), c(0.0, 0.0), 0), Err(Error::Input(_))));
        let s = branch_value_set(&single, &Order::complex(0.5, 0.1), c(0.0, 0.0), 2).unwrap();
        let (_, _, m1) = s.winding_factors[3];
        assert!((m1 - (2.0 * PI * -0.1f64).exp()).abs() < 1e-12 || (m1 - (2.0 * PI * 0.1f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn primitive_differences() {
        let p = PoleTerm { a: c(0.3, -0.2), z: c(1.0, 1.0), n: 0 };
        let d = primitive_difference(1, &p, c(0.0, 0.0), 1).unwrap();
        assert!((d - c(0.0, 2.0 * PI) * p.a).norm() < 1e-15);
        let q = PoleTerm { n: 2, ..p };
        assert_eq!(primitive_difference(2, &q, c(0.0, 0.0), 3).unwrap(), c(0.0, 0.0));
        // Lorentzian: the two poles together shift the primitive by π(m2 - m1).
        let h = lor();
        for (m1, m2) in [(0, 1), (1, 0), (-1, 2)] {
            let d = primitive_difference(1, &h.terms[0], c(0.5, 0.0), m1).unwrap()
                + primitive_difference(1, &h.terms[1], c(0.5, 0.0), m2).unwrap();
            assert!((d - c(PI * (m2 - m1) as f64, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn json_round_trip() {
        let h = lor();
        let back = PoleForm::<f64>::from_json(&h.to_json()).unwrap();
        assert_eq!(back, h);
        assert!(PoleForm::<f64>::from_json(r#"{"terms":[{"a":[1,0],"z":[0,0],"n":0},{"a":[1,0],"z":[0,0],"n":1}]}"#).is_err());
    }

    proptest! {
        #[test]
        fn rational_orders_are_winding_periodic(p in 1i64..7, q in 2i64..5, m in -3i64..3, k in 0usize..2) {
            prop_assume!(p % q != 0);
            let h = lor();
            let a = Order::rational(p, q).unwrap();
            let z0 = c(0.3, 0.0);
            let qq = match a.class { OrderClass::RationalPQ(_, q) => q, _ => 1 };
            let mut ms = vec![0, 0];
            ms[k] = m;
            let v1 = closed_frac_deriv(&h, &a, z0, &BranchChoice::explicit(&h, z0, &ms).unwrap()).unwrap();
            ms[k] += qq;
            let v2 = closed_frac_deriv(&h, &a, z0, &BranchChoice::explicit(&h, z0, &ms).unwrap()).unwrap();
            prop_assert!((v1 - v2).norm() <= 1e-12 * v1.norm().max(1e-300));
        }

        #[test]
        fn integer_orders_ignore_the_cut(n in 0i64..4, theta in 0.0f64..6.2, x in -2.0f64..2.0, m1 in -2i64..3, m2 in -2i64..3) {
            let h = lor();
            let z0 = c(x, 0.0);
            let a = Order::real(n as f64);
            let v1 = closed_frac_deriv(&h, &a, z0, &BranchChoice::straight(&h, z0, theta).unwrap());
            prop_assume!(v1.is_ok());
            let v1 = v1.unwrap();
            let v2 = closed_frac_deriv(&h, &a, z0, &BranchChoice::explicit(&h, z0, &[m1, m2]).unwrap()).unwrap();
            prop_assert!((v1 - v2).norm() <= 1e-12 * v1.norm().max(1e-12));
        }
    }
}
