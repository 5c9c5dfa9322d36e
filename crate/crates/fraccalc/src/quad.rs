//! Quadrature building blocks.
//!
//! * Gauss–Legendre rules by Newton iteration on the Legendre recurrence.
//! * Adaptive bisection comparing one 20-point panel with its two halves.
//! * Product integration for `∫_0^h t^μ g(t) dt` with complex `μ`: `g` is expanded in
//!   shifted Legendre polynomials and integrated against the closed-form moments
//!   `∫_0^1 u^μ P_j(2u-1) du = μ(μ-1)…(μ-j+1) / ((μ+1)…(μ+j+1))`.
//!   The moments are analytic in `μ`, so for `Re μ ≤ -1` the rule returns the Hadamard
//!   finite part.
//! * Half-line integrals built from a product panel at the origin, geometrically growing
//!   panels, and an algebraic tail mapped to `u = 1/t` when the decay exponent is known.

use crate::error::{Error, Result};
use crate::scalar::{finite, Real, C};

/// Tolerances and limits for all quadratures.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureConfig<T> {
    pub rel_tol: T,
    pub abs_tol: T,
    /// Radius beyond which an algebraic tail may be mapped analytically; `None` picks it from the problem scale.
    pub truncation_radius: Option<T>,
    /// Maximum bisection depth of an adaptive panel.
    pub max_subdivisions: usize,
    /// Node count of the endpoint product rule.
    pub endpoint_nodes: usize,
}

impl<T: Real> Default for QuadratureConfig<T> {
    fn default() -> Self {
        Self {
            rel_tol: T::lit(1e-10),
            abs_tol: T::lit(1e-14),
            truncation_radius: None,
            max_subdivisions: 48,
            endpoint_nodes: 32,
        }
    }
}

impl<T: Real> QuadratureConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > T::zero() && self.abs_tol > T::zero()) {
            return Err(Error::Input("tolerances must be positive".into()));
        }
        if self.endpoint_nodes < 2 {
            return Err(Error::Input("endpoint_nodes must be at least 2".into()));
        }
        Ok(())
    }

    pub(crate) fn tol(&self, scale: T) -> T {
        self.abs_tol.max(self.rel_tol * scale)
    }
}

/// Decay of an integrand factor toward infinity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Tail<T> {
    /// Faster than any power.
    Exponential,
    /// `g(t) ~ t^{-p}` with `g(t) t^p` analytic in `1/t`.
    Algebraic(T),
    Unknown,
}

/// Value with an error estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Est<T> {
    pub value: C<T>,
    pub err: T,
}

impl<T: Real> Est<T> {
    pub fn zero() -> Self {
        Self { value: C::new(T::zero(), T::zero()), err: T::zero() }
    }

    fn add(self, o: Est<T>) -> Self {
        Self { value: self.value + o.value, err: self.err + o.err }
    }

    pub fn scale(self, s: C<T>) -> Self {
        Self { value: self.value * s, err: self.err * s.norm() }
    }
}

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    let mut x = vec![T::zero(); n];
    let mut w = vec![T::zero(); n];
    let nf = T::of(n);
    for i in 0..(n + 1) / 2 {
        let mut z = (T::PI() * (T::of(i) + T::lit(0.75)) / (nf + T::lit(0.5))).cos();
        let mut dp = T::one();
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() <= T::epsilon() * T::lit(4.0) {
                let (_, d) = legendre_with_derivative(n, z);
                dp = d;
                break;
            }
        }
        let wi = T::lit(2.0) / ((T::one() - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre_with_derivative<T: Real>(n: usize, z: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = z;
    if n == 0 {
        return (T::one(), T::zero());
    }
    for k in 2..=n {
        let kf = T::of(k);
        let p2 = ((T::lit(2.0) * kf - T::one()) * z * p1 - (kf - T::one()) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = T::of(n) * (z * p1 - p0) / (z * z - T::one());
    (p1, d)
}

/// Interpolatory rule for `∫_0^1 u^μ g(u) du` at Gauss–Legendre nodes.
#[derive(Clone, Debug)]
struct ProductRule<T> {
    u: Vec<T>,
    w: Vec<T>,
    // legendre[i][j] = P_j(x_i)
    legendre: Vec<Vec<T>>,
}

impl<T: Real> ProductRule<T> {
    fn new(m: usize) -> Self {
        let (x, w) = gauss_legendre::<T>(m);
        let legendre = x
            .iter()
            .map(|&xi| {
                let mut row = Vec::with_capacity(m);
                let (mut p0, mut p1) = (T::one(), xi);
                row.push(p0);
                if m > 1 {
                    row.push(p1);
                }
                for k in 2..m {
                    let kf = T::of(k);
                    let p2 = ((T::lit(2.0) * kf - T::one()) * xi * p1 - (kf - T::one()) * p0) / kf;
                    row.push(p2);
                    p0 = p1;
                    p1 = p2;
                }
                row
            })
            .collect();
        let u = x.iter().map(|&xi| (xi + T::one()) / T::lit(2.0)).collect();
        Self { u, w, legendre }
    }

    fn weights(&self, mu: C<T>) -> Result<Vec<C<T>>> {
        let m = self.u.len();
        let mut moments = Vec::with_capacity(m);
        let one = C::new(T::one(), T::zero());
        let mut mj = one / (mu + one);
        for j in 0..m {
            if j > 0 {
                let jf = T::of(j);
                mj = mj * (mu - (jf - T::one())) / (mu + jf + T::one());
            }
            moments.push(mj);
        }
        if moments.iter().any(|v| !finite(*v)) {
            return Err(Error::Domain(format!(
                "endpoint exponent {}{:+}i is a negative integer",
                mu.re, mu.im
            )));
        }
        Ok((0..m)
            .map(|i| {
                let s = (0..m).fold(C::new(T::zero(), T::zero()), |acc, j| {
                    acc + moments[j] * (self.legendre[i][j] * (T::lit(2.0) * T::of(j) + T::one()) / T::lit(2.0))
                });
                s * self.w[i]
            })
            .collect())
    }

    fn apply(&self, mu: C<T>, h: T, g: &dyn Fn(T) -> C<T>) -> Result<C<T>> {
        self.apply_with_magnitude(mu, h, g).map(|(v, _)| v)
    }

    // Also returns Σ|W_i g_i| |h^{μ+1}|, the scale against which cancellation is judged.
    fn apply_with_magnitude(&self, mu: C<T>, h: T, g: &dyn Fn(T) -> C<T>) -> Result<(C<T>, T)> {
        let w = self.weights(mu)?;
        let mut sum = C::new(T::zero(), T::zero());
        let mut mag = T::zero();
        for (&u, &wi) in self.u.iter().zip(w.iter()) {
            let term = wi * g(h * u);
            sum += term;
            mag += term.norm();
        }
        let hpow = ((mu + T::one()) * h.ln()).exp();
        Ok((sum * hpow, mag * hpow.norm()))
    }
}

/// Quadrature engine: a configuration plus precomputed rules.
#[derive(Clone, Debug)]
pub struct Quad<T> {
    pub cfg: QuadratureConfig<T>,
    gl: (Vec<T>, Vec<T>),
    lo: ProductRule<T>,
    hi: ProductRule<T>,
}

impl<T: Real> Quad<T> {
    pub fn new(cfg: QuadratureConfig<T>) -> Result<Self> {
        cfg.validate()?;
        let m = cfg.endpoint_nodes;
        let lo = ProductRule::new((m * 3 / 4).max(2));
        let hi = ProductRule::new(m);
        Ok(Self { gl: gauss_legendre(20), lo, hi, cfg })
    }

    fn gl_panel(&self, f: &dyn Fn(T) -> C<T>, a: T, b: T) -> C<T> {
        let half = (b - a) / T::lit(2.0);
        let mid = (a + b) / T::lit(2.0);
        let (x, w) = &self.gl;
        x.iter()
            .zip(w.iter())
            .fold(C::new(T::zero(), T::zero()), |acc, (&xi, &wi)| acc + f(mid + half * xi) * wi)
            * half
    }

    /// Adaptive integral of `f` over `[a, b]` to absolute tolerance `tol`.
    pub fn adaptive(&self, f: &dyn Fn(T) -> C<T>, a: T, b: T, tol: T) -> Result<Est<T>> {
        if a == b {
            return Ok(Est::zero());
        }
        let whole = self.gl_panel(f, a, b);
        let est = self.bisect(f, a, b, whole, tol, 0)?;
        if !finite(est.value) {
            return Err(Error::Domain(format!("non-finite integrand on [{a}, {b}]")));
        }
        Ok(est)
    }

    fn bisect(&self, f: &dyn Fn(T) -> C<T>, a: T, b: T, whole: C<T>, tol: T, depth: usize) -> Result<Est<T>> {
        let mid = (a + b) / T::lit(2.0);
        let left = self.gl_panel(f, a, mid);
        let right = self.gl_panel(f, mid, b);
        let sum = left + right;
        let diff = (sum - whole).norm();
        if diff <= tol.max(self.cfg.rel_tol * sum.norm()) || !finite(sum) {
            return Ok(Est { value: sum, err: diff });
        }
        if depth >= self.cfg.max_subdivisions {
            return Err(Error::Accuracy { est_error: diff.to_f64_lossy() });
        }
        let l = self.bisect(f, a, mid, left, tol / T::lit(1.5), depth + 1)?;
        let r = self.bisect(f, mid, b, right, tol / T::lit(1.5), depth + 1)?;
        Ok(l.add(r))
    }

    /// `∫_0^h t^μ g(t) dt` on a single product panel, shrinking `h` until the two rule orders agree.
    /// Returns the estimate and the panel length actually used.
    pub fn endpoint_panel(&self, mu: C<T>, g: &dyn Fn(T) -> C<T>, h_max: T) -> Result<(Est<T>, T)> {
        let mut h = h_max;
        let mut last_err = T::infinity();
        for _ in 0..40 {
            let lo = self.lo.apply(mu, h, g)?;
            let (hi, mag) = self.hi.apply_with_magnitude(mu, h, g)?;
            let err = (hi - lo).norm();
            if finite(hi) && err <= self.cfg.tol(hi.norm().max(mag * T::lit(1e-3))) / T::lit(4.0) {
                return Ok((Est { value: hi, err }, h));
            }
            last_err = err;
            h = h / T::lit(4.0);
        }
        Err(Error::Accuracy { est_error: last_err.to_f64_lossy() })
    }

    /// `∫_a^b f` split into panels growing geometrically away from `a` (`0 < a`), for integrands
    /// that vary on the scale of their distance to the origin.
    pub fn graded(&self, f: &dyn Fn(T) -> C<T>, a: T, b: T, scale: T) -> Result<Est<T>> {
        let mut total = Est::zero();
        let mut lo = a;
        while lo < b {
            let hi = (lo * T::lit(2.0)).min(b);
            let hi = if b - hi < (hi - lo) * T::lit(0.25) { b } else { hi };
            let panel = self.adaptive(f, lo, hi, self.cfg.tol(scale.max(total.value.norm())) / T::lit(8.0))?;
            total = total.add(panel);
            lo = hi;
        }
        Ok(total)
    }

    /// `∫_0^L t^μ g(t) dt` with an endpoint singularity (or Hadamard finite part) at `t = 0`.
    pub fn singular_segment(&self, mu: C<T>, g: &dyn Fn(T) -> C<T>, length: T) -> Result<Est<T>> {
        let (head, h) = self.endpoint_panel(mu, g, length / T::lit(2.0))?;
        let f = |t: T| g(t) * (mu * t.ln()).exp();
        let rest = self.graded(&f, h, length, head.value.norm())?;
        Ok(head.add(rest))
    }

    /// `∫_0^∞ t^μ g(t) dt`.
    ///
    /// `h0` is the initial endpoint panel, `l_min` the radius below which no tail
    /// approximation is attempted, `tail` the decay of `g`.
    pub fn ray(&self, mu: C<T>, g: &dyn Fn(T) -> C<T>, h0: T, l_min: T, tail: Tail<T>) -> Result<Est<T>> {
        let (head, h) = self.endpoint_panel(mu, g, h0)?;
        let f = |t: T| g(t) * (mu * t.ln()).exp();
        self.ray_from(&f, h, l_min, tail, mu, head)
    }

    /// `∫_a^∞ f(t) dt` for `a > 0` and `f(t) = t^μ g(t)` with `g` decaying as `tail`.
    /// `acc` is added to the result and sets the tolerance scale.
    pub fn ray_from(
        &self,
        f: &dyn Fn(T) -> C<T>,
        a: T,
        l_min: T,
        tail: Tail<T>,
        mu: C<T>,
        acc: Est<T>,
    ) -> Result<Est<T>> {
        let mut total = acc;
        let mut lo = a;
        let mut small = 0usize;
        for _ in 0..400 {
            let hi = lo * T::lit(2.0);
            let panel = self.adaptive(f, lo, hi, self.cfg.tol(total.value.norm()) / T::lit(16.0))?;
            total = total.add(panel);
            lo = hi;
            if lo < l_min {
                continue;
            }
            match tail {
                Tail::Algebraic(p) => {
                    let nu = C::new(p, T::zero()) - mu - T::lit(2.0);
                    if nu.re <= -T::one() {
                        return Err(Error::Convergence(format!(
                            "integrand decays like t^({}) which is not integrable",
                            (mu - p).re
                        )));
                    }
                    let gu = |u: T| {
                        let t = T::one() / u;
                        f(t) * ((C::new(p, T::zero()) - mu) * t.ln()).exp()
                    };
                    let lo_v = self.lo.apply(nu, T::one() / lo, &gu);
                    let hi_v = self.hi.apply(nu, T::one() / lo, &gu);
                    if let (Ok(a1), Ok(a2)) = (lo_v, hi_v) {
                        let err = (a2 - a1).norm();
                        if finite(a2) && err <= self.cfg.tol((total.value + a2).norm()) / T::lit(4.0) {
                            return Ok(total.add(Est { value: a2, err }));
                        }
                    }
                }
                Tail::Exponential | Tail::Unknown => {
                    if panel.value.norm() <= self.cfg.tol(total.value.norm()) / T::lit(64.0) {
                        small += 1;
                        if small >= 2 {
                            return Ok(total.add(Est { value: C::new(T::zero(), T::zero()), err: panel.value.norm() }));
                        }
                    } else {
                        small = 0;
                    }
                }
            }
        }
        Err(Error::Convergence(format!(
            "half-line integral did not settle by t = {lo}"
        )))
    }
}

/// Neville extrapolation to `h → 0` of values `v_j` computed at steps `h_j` for an error
/// expansion in powers of `h^order`. Returns the extrapolated value and the last correction.
pub fn richardson<T: Real>(hs: &[T], vs: &[C<T>], order: T) -> (C<T>, T) {
    let n = vs.len();
    let mut table = vs.to_vec();
    let mut correction = T::infinity();
    for level in 1..n {
        for i in (level..n).rev() {
            let ratio = (hs[i - level] / hs[i]).powf(order);
            let prev = table[i];
            table[i] = prev + (prev - table[i - 1]) / (ratio - T::one());
            if i == n - 1 {
                correction = (table[i] - prev).norm();
            }
        }
    }
    (table[n - 1], correction)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn quad() -> Quad<f64> {
        Quad::new(QuadratureConfig::default()).unwrap()
    }

    #[test]
    fn legendre_rule_integrates_polynomials() {
        let (x, w) = gauss_legendre::<f64>(10);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(18)).sum();
        assert!((s - 2.0 / 19.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn product_rule_complex_power_moment() {
        // ∫_0^1 t^μ e^t dt against a series oracle Σ 1/(k!(μ+k+1)).
        let q = quad();
        let mu = Complex64::new(-0.4, 0.7);
        let (v, _) = q.endpoint_panel(mu, &|t| Complex64::new(t.exp(), 0.0), 1.0).unwrap();
        let mut oracle = Complex64::new(0.0, 0.0);
        let mut fact = 1.0;
        for k in 0..40 {
            if k > 0 {
                fact *= k as f64;
            }
            oracle += 1.0 / (fact * (mu + (k as f64 + 1.0)));
        }
        assert!((v.value - oracle).norm() < 1e-13, "{} vs {}", v.value, oracle);
    }

    #[test]
    fn finite_part_of_hypersingular_moment() {
        // FP ∫_0^1 t^{-3/2} (1 + t) dt = -2 + 2 = 0.
        let q = quad();
        let (v, _) = q
            .endpoint_panel(Complex64::new(-1.5, 0.0), &|t| Complex64::new(1.0 + t, 0.0), 1.0)
            .unwrap();
        assert!(v.value.norm() < 1e-11, "{}", v.value);
    }

    #[test]
    fn ray_with_algebraic_tail() {
        // ∫_0^∞ t^{-1/2}/(1+t) dt = π.
        let q = quad();
        let v = q
            .ray(
                Complex64::new(-0.5, 0.0),
                &|t| Complex64::new(1.0 / (1.0 + t), 0.0),
                0.5,
                4.0,
                Tail::Algebraic(1.0),
            )
            .unwrap();
        assert!((v.value.re - std::f64::consts::PI).abs() < 1e-10, "{}", v.value);
    }

    #[test]
    fn ray_with_exponential_tail() {
        // ∫_0^∞ t^{-0.3} e^{-t} dt = Γ(0.7).
        let q = quad();
        let v = q
            .ray(Complex64::new(-0.3, 0.0), &|t| Complex64::new((-t).exp(), 0.0), 0.5, 4.0, Tail::Exponential)
            .unwrap();
        assert!((v.value.re - 1.298_055_332_647_558).abs() < 1e-10, "{}", v.value);
    }

    #[test]
    fn richardson_removes_quadratic_error() {
        let hs: [f64; 3] = [0.1, 0.05, 0.025];
        let vs: Vec<Complex64> = hs.iter().map(|h| Complex64::new(1.0 + 3.0 * h * h - h.powi(4), 0.0)).collect();
        let (v, _) = richardson(&hs, &vs, 2.0);
        assert!((v.re - 1.0).abs() < 1e-12);
    }
}
