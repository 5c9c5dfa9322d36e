//! Phase conventions for multi-valued powers and the geometric rules that assign
//! phases and winding integers to poles relative to straight or polyline cuts.
//!
//! Angles are kept unreduced so that winding corrections stay visible.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{as_integer, cis, cx, Real, C};

/// Orientation of a straight cut of `w^γ` along the real axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CutOrientation {
    /// Cut on `(0, +∞)`; selects `D₊`.
    PlusAxis,
    /// Cut on `(0, -∞)`; selects `D₋`.
    MinusAxis,
}

impl CutOrientation {
    pub fn sign<T: Real>(self) -> T {
        match self {
            CutOrientation::PlusAxis => T::one(),
            CutOrientation::MinusAxis => -T::one(),
        }
    }

    pub fn opposite(self) -> Self {
        match self {
            CutOrientation::PlusAxis => CutOrientation::MinusAxis,
            CutOrientation::MinusAxis => CutOrientation::PlusAxis,
        }
    }
}

/// Side from which a point on the real axis is approached.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Approach {
    FromAbove,
    FromBelow,
}

/// The ambiguous global factor `(-1)^α = exp(iα(2n+1)π)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitPhase<T> {
    pub n: i64,
    pub value: C<T>,
}

impl<T: Real> UnitPhase<T> {
    pub fn new(alpha: C<T>, n: i64) -> Self {
        if alpha.im == T::zero() {
            if let Some(a) = as_integer(alpha.re) {
                let odd = (a * (2 * n + 1)).rem_euclid(2) == 1;
                let v = if odd { -T::one() } else { T::one() };
                return Self { n, value: cx(v, T::zero()) };
            }
        }
        let k = T::lit((2 * n + 1) as f64) * T::PI();
        let value = (alpha * cx(T::zero(), k)).exp();
        Self { n, value }
    }

    /// Branch `n = 0`.
    pub fn principal(alpha: C<T>) -> Self {
        Self::new(alpha, 0)
    }
}

fn two_pi<T: Real>() -> T {
    T::PI() + T::PI()
}

/// Reduces an angle to `[0, 2π)`.
pub fn wrap_2pi<T: Real>(a: T) -> T {
    let tp = two_pi::<T>();
    let r = a - (a / tp).floor() * tp;
    if r >= tp {
        r - tp
    } else {
        r
    }
}

/// Argument of `w` under the cut convention: `[0, 2π)` for `PlusAxis`, `(-π, π]` for
/// `MinusAxis`; points on the cut take the limit from the requested side.
pub fn phase_arg<T: Real>(w: C<T>, cut: CutOrientation, approach: Approach) -> Result<T> {
    if w.re == T::zero() && w.im == T::zero() {
        return Err(Error::Domain("power of zero at the branch point".into()));
    }
    let pi = T::PI();
    if w.im == T::zero() {
        let on_positive = w.re > T::zero();
        return Ok(match (cut, on_positive, approach) {
            (CutOrientation::PlusAxis, true, Approach::FromAbove) => T::zero(),
            (CutOrientation::PlusAxis, true, Approach::FromBelow) => two_pi(),
            (CutOrientation::PlusAxis, false, _) => pi,
            (CutOrientation::MinusAxis, true, _) => T::zero(),
            (CutOrientation::MinusAxis, false, Approach::FromAbove) => pi,
            (CutOrientation::MinusAxis, false, Approach::FromBelow) => -pi,
        });
    }
    let a = w.im.atan2(w.re);
    Ok(match cut {
        CutOrientation::PlusAxis => wrap_2pi(a),
        CutOrientation::MinusAxis => a,
    })
}

/// `w^γ` with the phase fixed by the cut convention. Integer real `γ` is cut free.
pub fn principal_power<T: Real>(w: C<T>, gamma: C<T>, cut: CutOrientation, approach: Approach) -> Result<C<T>> {
    if gamma.im == T::zero() {
        if let Some(k) = as_integer(gamma.re) {
            if k.abs() <= i32::MAX as i64 {
                if k < 0 && w.norm() == T::zero() {
                    return Err(Error::Domain("negative power of zero".into()));
                }
                return Ok(w.powi(k as i32));
            }
        }
    }
    let arg = phase_arg(w, cut, approach)?;
    Ok((gamma * cx(w.norm().ln(), arg)).exp())
}

/// Power with an explicitly supplied argument of the base.
pub fn power_with_arg<T: Real>(modulus: T, arg: T, gamma: C<T>) -> C<T> {
    (gamma * cx(modulus.ln(), arg)).exp()
}

fn cross<T: Real>(a: C<T>, b: C<T>) -> T {
    a.re * b.im - a.im * b.re
}

fn geom_eps<T: Real>(scale: T) -> T {
    T::lit(1e-12) * scale.max(T::one())
}

/// Phase of `z0 - z_k` for a straight cut leaving `z0` in direction `cut_direction`.
///
/// Measured counterclockwise from the half line `(z0, z0 - ∞)` and reduced by `2π` when
/// the measuring arc passes the cut. The result lies in `[ω - 2π, ω)` where `ω` is the
/// direction of the cut seen from the pole side (`[0, 2π)` when the cut runs along the
/// reference half line itself).
pub fn rule1_phase<T: Real>(z0: C<T>, zk: C<T>, cut_direction: T) -> Result<T> {
    let w = z0 - zk;
    if w.norm() == T::zero() {
        return Err(Error::Domain("pole coincides with the evaluation point".into()));
    }
    let phi = wrap_2pi(w.im.atan2(w.re));
    let omega = wrap_2pi(cut_direction + T::PI());
    let eps = T::lit(1e-12);
    let on_cut = (phi - omega).abs() < eps || (omega.abs() < eps && (phi - two_pi()).abs() < eps);
    if on_cut {
        return Err(Error::Geometry("pole lies on the cut".into()));
    }
    if omega > T::zero() && phi > omega {
        Ok(phi - two_pi())
    } else {
        Ok(phi)
    }
}

/// Polyline cut from a branch point toward `exp(iθ)∞`.
#[derive(Clone, Debug, PartialEq)]
pub struct CutCurve<T> {
    pub branch_point: C<T>,
    /// Vertices starting with `branch_point`.
    pub vertices: Vec<C<T>>,
    /// Direction of the final unbounded ray leaving the last vertex.
    pub terminal_angle: T,
}

/// A piece of a cut: `start + u·dir` with `u ∈ [0, 1)` or `u ∈ [0, ∞)` for the ray.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CutPiece<T> {
    pub start: C<T>,
    pub dir: C<T>,
    pub unbounded: bool,
}

impl<T: Real> CutCurve<T> {
    pub fn new(branch_point: C<T>, mut vertices: Vec<C<T>>, terminal_angle: T) -> Result<Self> {
        if vertices.first() != Some(&branch_point) {
            vertices.insert(0, branch_point);
        }
        let cut = Self { branch_point, vertices, terminal_angle };
        cut.validate()?;
        Ok(cut)
    }

    /// Straight half line `[z0, z0 + exp(iθ)∞)`.
    pub fn straight(z0: C<T>, theta: T) -> Self {
        Self { branch_point: z0, vertices: vec![z0], terminal_angle: theta }
    }

    pub fn pieces(&self) -> Vec<CutPiece<T>> {
        let mut out: Vec<CutPiece<T>> = self
            .vertices
            .windows(2)
            .map(|p| CutPiece { start: p[0], dir: p[1] - p[0], unbounded: false })
            .collect();
        out.push(CutPiece {
            start: *self.vertices.last().expect("non-empty"),
            dir: cis(self.terminal_angle),
            unbounded: true,
        });
        out
    }

    /// Direction of the cut at the branch point.
    pub fn initial_direction(&self) -> C<T> {
        let p = self.pieces()[0];
        p.dir / p.dir.norm()
    }

    fn validate(&self) -> Result<()> {
        if !self.terminal_angle.is_finite() {
            return Err(Error::Input("terminal angle must be finite".into()));
        }
        for w in self.vertices.windows(2) {
            if (w[1] - w[0]).norm() == T::zero() {
                return Err(Error::Input("repeated vertex in cut polyline".into()));
            }
        }
        let pieces = self.pieces();
        for i in 0..pieces.len() {
            for j in i + 1..pieces.len() {
                let adjacent = j == i + 1;
                if let Some(hit) = piece_intersection(&pieces[i], &pieces[j], adjacent) {
                    if hit {
                        return Err(Error::Input("cut polyline intersects itself".into()));
                    }
                }
            }
        }
        Ok(())
    }

    /// Distance from `z` to the cut.
    pub fn distance(&self, z: C<T>) -> T {
        self.pieces()
            .iter()
            .map(|p| {
                let d2 = p.dir.norm_sqr();
                let mut u = ((z - p.start) * p.dir.conj()).re / d2;
                u = u.max(T::zero());
                if !p.unbounded {
                    u = u.min(T::one());
                }
                (p.start + p.dir * u - z).norm()
            })
            .fold(T::infinity(), |a, b| a.min(b))
    }
}

// Returns Some(true) when two pieces intersect improperly (adjacent pieces may share only
// their common vertex).
pub(crate) fn piece_intersection<T: Real>(a: &CutPiece<T>, b: &CutPiece<T>, adjacent: bool) -> Option<bool> {
    let den = cross(a.dir, b.dir);
    let ab = b.start - a.start;
    let scale = a.dir.norm() * b.dir.norm();
    if den.abs() <= T::lit(1e-14) * scale {
        // Parallel: overlapping only if collinear.
        if cross(ab, a.dir).abs() > T::lit(1e-12) * (a.dir.norm() * ab.norm()).max(T::lit(1e-300)) {
            return Some(false);
        }
        let d2 = a.dir.norm_sqr();
        let u0 = (ab * a.dir.conj()).re / d2;
        let u1 = ((ab + b.dir) * a.dir.conj()).re / d2;
        let (lo, hi) = if b.unbounded {
            if (b.dir * a.dir.conj()).re > T::zero() {
                (u0, T::infinity())
            } else {
                (T::neg_infinity(), u0)
            }
        } else {
            (u0.min(u1), u0.max(u1))
        };
        let amax = if a.unbounded { T::infinity() } else { T::one() };
        let overlap_lo = lo.max(T::zero());
        let overlap_hi = hi.min(amax);
        let eps = T::lit(1e-12);
        if adjacent {
            return Some(overlap_hi - overlap_lo > eps);
        }
        return Some(overlap_hi >= overlap_lo - eps);
    }
    let u = cross(ab, b.dir) / den;
    let v = cross(ab, a.dir) / den;
    let eps = T::lit(1e-12);
    let in_a = u >= -eps && (a.unbounded || u <= T::one() + eps);
    let in_b = v >= -eps && (b.unbounded || v <= T::one() + eps);
    if !(in_a && in_b) {
        return Some(false);
    }
    if adjacent && (u - T::one()).abs() <= eps && v.abs() <= eps {
        return Some(false);
    }
    Some(true)
}

/// Phases and winding integers of the poles relative to a cut.
#[derive(Clone, Debug, PartialEq)]
pub struct BranchAssignment<T> {
    pub reference_point: C<T>,
    /// Signed crossing counts `m_k`.
    pub windings: Vec<i64>,
    /// Base angles `∠ z_R z0 z_k` in `[0, 2π)`.
    pub phases: Vec<T>,
}

impl<T: Real> BranchAssignment<T> {
    /// `φ_k + 2π m_k`.
    pub fn effective_phase(&self, k: usize) -> T {
        self.phases[k] + two_pi::<T>() * T::lit(self.windings[k] as f64)
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    /// Assignment for a straight cut using the reduction of [`rule1_phase`].
    pub fn straight(z0: C<T>, theta: T, poles: &[C<T>]) -> Result<Self> {
        let mut phases = Vec::with_capacity(poles.len());
        let mut windings = Vec::with_capacity(poles.len());
        for &p in poles {
            let phi = rule1_phase(z0, p, theta)?;
            if phi < T::zero() {
                phases.push(phi + two_pi());
                windings.push(-1);
            } else {
                phases.push(phi);
                windings.push(0);
            }
        }
        Ok(Self { reference_point: z0 - T::one(), windings, phases })
    }
}

/// Default reference point on `(z0, z0 - ∞)`: half the distance to the nearest pole.
pub fn default_reference<T: Real>(z0: C<T>, poles: &[C<T>]) -> C<T> {
    let d = poles.iter().map(|p| (*p - z0).norm()).fold(T::infinity(), |a, b| a.min(b));
    let r = if d.is_finite() && d > T::zero() { d / T::lit(2.0) } else { T::one() };
    z0 - r
}

/// Rule 2: base angle from the reference half line plus `±2π` per transversal crossing of
/// the measuring path with the cut (`+` when `cross(path, cut) > 0`).
///
/// The measuring path runs counterclockwise along the circle `|z - z0| = |z_R - z0|` from
/// `z_R` to the ray through `z_k`, then radially to `z_k`.
pub fn rule2_windings<T: Real>(cut: &CutCurve<T>, z_r: C<T>, poles: &[C<T>]) -> Result<BranchAssignment<T>> {
    let z0 = cut.branch_point;
    let rel = z_r - z0;
    let r = rel.norm();
    if r == T::zero() || rel.re >= T::zero() || rel.im.abs() > geom_eps(r) {
        return Err(Error::Geometry("reference point must lie on the half line (z0, z0 - ∞)".into()));
    }
    let pieces = cut.pieces();
    let mut phases = Vec::with_capacity(poles.len());
    let mut windings = Vec::with_capacity(poles.len());
    for &p in poles {
        let scale = (p - z0).norm().max(r);
        if cut.distance(p) <= geom_eps(scale) {
            return Err(Error::Geometry("pole lies on the cut".into()));
        }
        let w = p - z0;
        let phi0 = wrap_2pi(w.im.atan2(w.re) - T::PI());
        let mut m = 0i64;
        for piece in &pieces {
            m += arc_crossings(z0, r, phi0, piece)?;
        }
        let arc_end = z0 + cis(T::PI() + phi0) * r;
        for piece in &pieces {
            m += segment_crossings(arc_end, p, piece)?;
        }
        phases.push(phi0);
        windings.push(m);
    }
    Ok(BranchAssignment { reference_point: z_r, windings, phases })
}

fn arc_crossings<T: Real>(z0: C<T>, r: T, phi0: T, piece: &CutPiece<T>) -> Result<i64> {
    let q = piece.start - z0;
    let a = piece.dir.norm_sqr();
    let b = (q * piece.dir.conj()).re * T::lit(2.0);
    let c = q.norm_sqr() - r * r;
    let disc = b * b - T::lit(4.0) * a * c;
    if disc < T::zero() {
        return Ok(0);
    }
    let sq = disc.sqrt();
    let roots = [(-b - sq) / (T::lit(2.0) * a), (-b + sq) / (T::lit(2.0) * a)];
    let eps = T::lit(1e-12);
    let mut count = 0;
    for (idx, &u) in roots.iter().enumerate() {
        if idx == 1 && sq == T::zero() {
            break;
        }
        let in_range = u >= T::zero() && (piece.unbounded || u < T::one());
        if !in_range {
            continue;
        }
        let x = piece.start + piece.dir * u;
        let rel = x - z0;
        let offset = wrap_2pi(rel.im.atan2(rel.re) - T::PI());
        if offset <= eps || offset > phi0 + eps {
            continue;
        }
        let tangent = rel * cx(T::zero(), T::one());
        let s = cross(tangent, piece.dir);
        if s.abs() <= T::lit(1e-10) * tangent.norm() * piece.dir.norm() {
            return Err(Error::Geometry("measuring arc is tangent to the cut".into()));
        }
        count += if s > T::zero() { 1 } else { -1 };
    }
    Ok(count)
}

fn segment_crossings<T: Real>(a: C<T>, b: C<T>, piece: &CutPiece<T>) -> Result<i64> {
    let e = b - a;
    let den = cross(e, piece.dir);
    let scale = e.norm() * piece.dir.norm();
    if scale == T::zero() {
        return Ok(0);
    }
    let ap = piece.start - a;
    if den.abs() <= T::lit(1e-12) * scale {
        if cross(ap, e).abs() <= T::lit(1e-12) * (e.norm() * ap.norm()).max(T::lit(1e-300)) {
            // Collinear: the radial leg runs along the cut.
            let d2 = e.norm_sqr();
            let u0 = (ap * e.conj()).re / d2;
            let u1 = ((ap + piece.dir) * e.conj()).re / d2;
            let (lo, hi) = if piece.unbounded {
                if (piece.dir * e.conj()).re > T::zero() {
                    (u0, T::infinity())
                } else {
                    (T::neg_infinity(), u0)
                }
            } else {
                (u0.min(u1), u0.max(u1))
            };
            if hi > T::zero() && lo < T::one() {
                return Err(Error::Geometry("measuring path runs along the cut".into()));
            }
        }
        return Ok(0);
    }
    let s = cross(ap, piece.dir) / den;
    let u = cross(ap, e) / den;
    let eps = T::lit(1e-12);
    let hit_path = s > eps && s <= T::one() + eps;
    let hit_cut = u >= -eps && (piece.unbounded || u < T::one() - eps);
    if hit_path && hit_cut {
        Ok(if den > T::zero() { 1 } else { -1 })
    } else {
        Ok(0)
    }
}

#[derive(Serialize, Deserialize)]
struct CutCurveWire {
    branch_point: [f64; 2],
    vertices: Vec<[f64; 2]>,
    terminal_angle: f64,
}

pub(crate) fn to_pair<T: Real>(z: C<T>) -> [f64; 2] {
    [z.re.to_f64_lossy(), z.im.to_f64_lossy()]
}

pub(crate) fn from_pair<T: Real>(p: [f64; 2]) -> C<T> {
    cx(T::lit(p[0]), T::lit(p[1]))
}

impl<T: Real> CutCurve<T> {
    pub fn to_json(&self) -> String {
        let wire = CutCurveWire {
            branch_point: to_pair(self.branch_point),
            vertices: self.vertices.iter().map(|v| to_pair(*v)).collect(),
            terminal_angle: self.terminal_angle.to_f64_lossy(),
        };
        serde_json::to_string(&wire).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let wire: CutCurveWire = serde_json::from_str(text).map_err(|e| Error::Input(format!("cut curve JSON: {e}")))?;
        Self::new(
            from_pair(wire.branch_point),
            wire.vertices.into_iter().map(from_pair).collect(),
            T::lit(wire.terminal_angle),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn c(a: f64, b: f64) -> Complex64 {
        Complex64::new(a, b)
    }

    #[test]
    fn phase_table_examples() {
        let half = c(0.5, 0.0);
        let v = principal_power(c(1.0, 0.0), half, CutOrientation::MinusAxis, Approach::FromAbove).unwrap();
        assert!((v - c(1.0, 0.0)).norm() < 1e-15);
        let v = principal_power(c(-1.0, 0.0), half, CutOrientation::MinusAxis, Approach::FromBelow).unwrap();
        assert!((v - c(0.0, -1.0)).norm() < 1e-15);
        for cut in [CutOrientation::PlusAxis, CutOrientation::MinusAxis] {
            for ap in [Approach::FromAbove, Approach::FromBelow] {
                let v = principal_power(c(-1.0, 0.0), c(2.0, 0.0), cut, ap).unwrap();
                assert_eq!(v, c(1.0, 0.0));
            }
        }
    }

    #[test]
    fn full_phase_table() {
        let a = c(0.3, 0.0);
        let e = |t: f64| (a * c(0.0, t)).exp();
        let cases = [
            (-2.0, CutOrientation::PlusAxis, Approach::FromAbove, e(PI)),
            (-2.0, CutOrientation::MinusAxis, Approach::FromAbove, e(PI)),
            (-2.0, CutOrientation::PlusAxis, Approach::FromBelow, e(PI)),
            (-2.0, CutOrientation::MinusAxis, Approach::FromBelow, e(-PI)),
            (2.0, CutOrientation::PlusAxis, Approach::FromAbove, e(0.0)),
            (2.0, CutOrientation::MinusAxis, Approach::FromAbove, e(0.0)),
            (2.0, CutOrientation::PlusAxis, Approach::FromBelow, e(2.0 * PI)),
            (2.0, CutOrientation::MinusAxis, Approach::FromBelow, e(0.0)),
        ];
        for (x, cut, ap, phase) in cases {
            let v = principal_power(c(x, 0.0), a, cut, ap).unwrap();
            let expect = phase * 2f64.powf(0.3);
            assert!((v - expect).norm() < 1e-14, "{x} {cut:?} {ap:?}");
        }
    }

    #[test]
    fn zero_is_a_branch_point() {
        assert!(matches!(
            principal_power(c(0.0, 0.0), c(0.5, 0.0), CutOrientation::PlusAxis, Approach::FromAbove),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn unit_phase_modulus() {
        let a = c(0.4, 0.3);
        for n in -2..3 {
            let u = UnitPhase::new(a, n);
            let expect = (-0.3 * (2 * n + 1) as f64 * PI).exp();
            assert!((u.value.norm() - expect).abs() < 1e-12 * expect);
        }
    }

    #[test]
    fn rule1_examples() {
        let z0 = c(0.0, 0.0);
        // Cut toward +real: a pole straight above needs the arc to pass the cut, so the
        // counterclockwise angle 3π/2 is reduced to -π/2.
        let phi = rule1_phase(z0, c(0.0, 1.0), 0.0).unwrap();
        assert!((phi + PI / 2.0).abs() < 1e-14);
        // Pole on the reference half line.
        assert_eq!(rule1_phase(z0, c(-2.0, 0.0), 0.0).unwrap(), 0.0);
        // Moving the pole across the cut changes the phase by 2π.
        let above = rule1_phase(z0, c(3.0, 1e-6), 0.0).unwrap();
        let below = rule1_phase(z0, c(3.0, -1e-6), 0.0).unwrap();
        assert!(((below - above) - 2.0 * PI).abs() < 1e-5);
        assert!(matches!(rule1_phase(z0, c(3.0, 0.0), 0.0), Err(Error::Geometry(_))));
        assert!(matches!(rule1_phase(z0, z0, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn straight_cut_not_between_gives_zero_windings() {
        let z0 = c(0.0, 0.0);
        let cut = CutCurve::straight(z0, PI);
        let poles = [c(1.0, 1.0), c(1.0, -1.0), c(2.0, 0.5)];
        let b = rule2_windings(&cut, c(-0.5, 0.0), &poles).unwrap();
        assert!(b.windings.iter().all(|&m| m == 0));
    }

    #[test]
    fn looping_cut_separates_two_poles_by_one_winding() {
        let z0 = c(0.0, 0.0);
        let poles = [c(1.0, 0.0), c(-1.0, 0.0)];
        let straight = rule2_windings(&CutCurve::straight(z0, PI / 2.0), c(-0.5, 0.0), &poles).unwrap();
        let loop_cut = CutCurve::new(
            z0,
            vec![z0, c(0.0, -0.7), c(2.0, -0.7), c(2.0, 1.0), c(0.5, 1.0)],
            PI / 2.0,
        )
        .unwrap();
        let looped = rule2_windings(&loop_cut, c(-0.5, 0.0), &poles).unwrap();
        let d_straight = straight.windings[0] - straight.windings[1];
        let d_loop = looped.windings[0] - looped.windings[1];
        assert_eq!((d_loop - d_straight).abs(), 1);
    }

    #[test]
    fn reference_shift_moves_all_phases_equally() {
        let z0 = c(0.0, 0.0);
        // The cut dips across the reference half line at x = -1.
        let cut = CutCurve::new(z0, vec![z0, c(0.0, 1.0), c(-1.0, 1.0), c(-1.0, -2.0)], -PI / 2.0).unwrap();
        let poles = [c(1.0, 0.3), c(-2.0, 1.5), c(0.4, -1.2)];
        let a = rule2_windings(&cut, c(-0.5, 0.0), &poles).unwrap();
        let b = rule2_windings(&cut, c(-1.5, 0.0), &poles).unwrap();
        let shifts: Vec<f64> = (0..3).map(|k| b.effective_phase(k) - a.effective_phase(k)).collect();
        assert!((shifts[0] - shifts[1]).abs() < 1e-12 && (shifts[1] - shifts[2]).abs() < 1e-12);
        assert!((shifts[0].abs() - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn self_intersecting_cut_is_rejected() {
        let z0 = c(0.0, 0.0);
        let r = CutCurve::new(z0, vec![z0, c(1.0, 0.0), c(1.0, 1.0), c(0.5, -1.0)], 0.0);
        assert!(matches!(r, Err(Error::Input(_))));
        let r = CutCurve::new(z0, vec![z0, c(2.0, 0.0)], PI);
        assert!(matches!(r, Err(Error::Input(_))));
    }

    #[test]
    fn pole_on_cut_is_rejected() {
        let z0 = c(0.0, 0.0);
        let cut = CutCurve::new(z0, vec![z0, c(1.0, 1.0)], 0.0).unwrap();
        let r = rule2_windings(&cut, c(-1.0, 0.0), &[c(0.5, 0.5)]);
        assert!(matches!(r, Err(Error::Geometry(_))));
    }

    #[test]
    fn json_round_trip() {
        let z0 = c(0.5, -0.25);
        let cut = CutCurve::new(z0, vec![z0, c(1.0, 1.0)], 1.25).unwrap();
        let back = CutCurve::<f64>::from_json(&cut.to_json()).unwrap();
        assert_eq!(back, cut);
        let parsed = CutCurve::<f64>::from_json(r#"{"branch_point":[0,0],"vertices":[[1,1]],"terminal_angle":0.5}"#).unwrap();
        assert_eq!(parsed.vertices.len(), 2);
    }

    proptest! {
        #[test]
        fn integer_powers_ignore_the_cut(k in -3i32..=3, re_w in -5.0f64..5.0, im_w in -5.0f64..5.0) {
            prop_assume!(re_w.abs() + im_w.abs() > 1e-3);
            let w = c(re_w, im_w);
            for cut in [CutOrientation::PlusAxis, CutOrientation::MinusAxis] {
                for ap in [Approach::FromAbove, Approach::FromBelow] {
                    let v = principal_power(w, c(k as f64, 0.0), cut, ap).unwrap();
                    prop_assert!((v - w.powi(k)).norm() <= 1e-12 * w.powi(k).norm());
                }
            }
        }

        #[test]
        fn power_is_continuous_away_from_the_cut(t in 0.01f64..6.27, r in 0.1f64..4.0, g in -1.5f64..1.5) {
            // Walk a small step along the circle |w| = r without touching the cut.
            let cut = if t < PI { CutOrientation::PlusAxis } else { CutOrientation::MinusAxis };
            let start = if cut == CutOrientation::PlusAxis { t.min(6.2) } else { t - 2.0 * PI };
            let gamma = c(g, 0.3);
            let a = principal_power(Complex64::from_polar(r, start), gamma, cut, Approach::FromAbove).unwrap();
            let b = principal_power(Complex64::from_polar(r, start + 1e-7), gamma, cut, Approach::FromAbove).unwrap();
            prop_assert!((a - b).norm() <= 1e-5 * a.norm().max(1e-3));
        }

        #[test]
        fn straight_rule2_reproduces_rule1(theta in 0.0f64..6.2, px in -3.0f64..3.0, py in -3.0f64..3.0, r in 0.05f64..2.0) {
            let z0 = c(0.1, -0.2);
            let p = c(px, py);
            prop_assume!((p - z0).norm() > 1e-2);
            let cut = CutCurve::straight(z0, theta);
            prop_assume!(cut.distance(p) > 1e-6);
            // Keep the measuring circle away from tangency with the cut.
            let phi1 = rule1_phase(z0, p, theta).unwrap();
            let zr = z0 - r;
            prop_assume!(cut.distance(zr) > 1e-6 || (wrap_2pi(theta) - PI).abs() < 1e-12);
            let b = rule2_windings(&cut, zr, &[p]).unwrap();
            prop_assert!((b.effective_phase(0) - phi1).abs() < 1e-9, "{} vs {}", b.effective_phase(0), phi1);
        }
    }
}
