//! FFT implementation of the multiplier on uniformly sampled data.
//!
//! Samples `v_n = f(x0 + n dx)` expand as `Σ F_j e^{iκ_j x}`, so the multiplier
//! `(-ik)^α` with `k = -κ` becomes `(iκ)^α`. `D₊` takes the principal branch
//! (`arg ∈ (-π, π]`), `D₋` the branch with `arg ∈ [0, 2π)`.

use std::io::{BufRead, Write};

use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::branchcut::{principal_power, Approach, CutOrientation};
use crate::error::{Error, Result};
use crate::kernel::Order;
use crate::scalar::{cx, Real, C};

/// Uniform samples on `[x0, x0 + (N-1) dx]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledGrid<T> {
    pub x0: T,
    pub dx: T,
    pub values: Vec<C<T>>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Real")]
struct GridJson<T> {
    x0: T,
    dx: T,
    n: usize,
    values: Vec<[T; 2]>,
    #[serde(default)]
    meta: serde_json::Value,
}

impl<T: Real> SampledGrid<T> {
    pub fn new(x0: T, dx: T, values: Vec<C<T>>) -> Result<Self> {
        if values.len() < 8 {
            return Err(Error::Input("a grid needs at least 8 samples".into()));
        }
        if !(dx > T::zero()) || !x0.is_finite() {
            return Err(Error::Input("grid spacing must be positive".into()));
        }
        Ok(Self { x0, dx, values })
    }

    /// Samples `f` at `n` points spanning `[a, b]`.
    pub fn sample(f: impl Fn(T) -> C<T>, a: T, b: T, n: usize) -> Result<Self> {
        if n < 8 || !(b > a) {
            return Err(Error::Input("need n ≥ 8 and a < b".into()));
        }
        let dx = (b - a) / T::of(n - 1);
        Self::new(a, dx, (0..n).map(|j| f(a + dx * T::of(j))).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn x(&self, j: usize) -> T {
        self.x0 + self.dx * T::of(j)
    }

    pub fn xs(&self) -> Vec<T> {
        (0..self.len()).map(|j| self.x(j)).collect()
    }

    /// `x, re, im` rows with a header line.
    pub fn write_csv(&self, out: &mut dyn Write) -> std::io::Result<()> {
        writeln!(out, "x,re,im")?;
        for (j, v) in self.values.iter().enumerate() {
            writeln!(out, "{:e},{:e},{:e}", self.x(j), v.re, v.im)?;
        }
        Ok(())
    }

    pub fn read_csv(input: &mut dyn BufRead) -> Result<Self> {
        let mut xs = Vec::new();
        let mut values = Vec::new();
        for (ln, line) in input.lines().enumerate() {
            let line = line.map_err(|e| Error::Input(e.to_string()))?;
            let line = line.trim();
            if line.is_empty() || (ln == 0 && line.starts_with('x')) {
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.len() < 2 {
                return Err(Error::Input(format!("line {}: expected x,re[,im]", ln + 1)));
            }
            let num = |s: &str| s.parse::<f64>().map(T::lit).map_err(|_| Error::Input(format!("line {}: bad number {s:?}", ln + 1)));
            xs.push(num(cols[0])?);
            let im = if cols.len() > 2 { num(cols[2])? } else { T::zero() };
            values.push(cx(num(cols[1])?, im));
        }
        if xs.len() < 2 {
            return Err(Error::Input("a grid needs at least 8 samples".into()));
        }
        let dx = (xs[xs.len() - 1] - xs[0]) / T::of(xs.len() - 1);
        let uniform = xs.iter().enumerate().all(|(j, &x)| (x - xs[0] - dx * T::of(j)).abs() <= T::lit(1e-9) * dx.abs().max(xs[0].abs()));
        if !uniform {
            return Err(Error::Input("x column is not uniformly spaced".into()));
        }
        Self::new(xs[0], dx, values)
    }

    pub fn to_json(&self, meta: serde_json::Value) -> String {
        let g = GridJson { x0: self.x0, dx: self.dx, n: self.len(), values: self.values.iter().map(|v| [v.re, v.im]).collect(), meta };
        serde_json::to_string(&g).expect("grid serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let g: GridJson<T> = serde_json::from_str(text).map_err(|e| Error::Input(e.to_string()))?;
        if g.values.len() != g.n {
            return Err(Error::Input("`n` does not match the number of values".into()));
        }
        Self::new(g.x0, g.dx, g.values.into_iter().map(|[a, b]| cx(a, b)).collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DcMode {
    /// Drop the `k = 0` mode.
    ZeroDC,
    /// Fail when the samples have a nonzero mean.
    RequireZeroMean,
    /// Fail for negative orders when the mean is nonzero.
    Error,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Window<T> {
    None,
    /// Multiplies the samples by `exp(-decay·((x - c)/h)^8)` about the grid centre `c`,
    /// `h` the half width. `decay = 0` treats the samples as periodic as they stand.
    Exponential(T),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SpectralConfig<T> {
    pub dc_mode: DcMode,
    pub window: Window<T>,
    pub side: CutOrientation,
}

impl<T: Real> SpectralConfig<T> {
    /// `ZeroDC` for positive orders, `RequireZeroMean` otherwise; no window.
    pub fn for_order(alpha: &Order<T>, side: CutOrientation) -> Self {
        let dc_mode = if alpha.alpha1() > T::zero() { DcMode::ZeroDC } else { DcMode::RequireZeroMean };
        Self { dc_mode, window: Window::None, side }
    }
}

/// `(iκ)^α` on the branch selected by `side`.
pub fn multiplier<T: Real>(kappa: T, alpha: &Order<T>, side: CutOrientation) -> Result<C<T>> {
    let cut = match side {
        CutOrientation::PlusAxis => CutOrientation::MinusAxis,
        CutOrientation::MinusAxis => CutOrientation::PlusAxis,
    };
    principal_power(cx(T::zero(), kappa), alpha.value, cut, Approach::FromAbove)
}

fn transform<T: Real>(values: &mut [C<T>], inverse: bool) {
    let mut planner = FftPlanner::<T>::new();
    let fft = if inverse { planner.plan_fft_inverse(values.len()) } else { planner.plan_fft_forward(values.len()) };
    fft.process(values);
    if inverse {
        let s = T::one() / T::of(values.len());
        values.iter_mut().for_each(|v| *v = *v * s);
    }
}

/// Forward then inverse transform; the identity up to rounding.
pub fn round_trip<T: Real>(grid: &SampledGrid<T>) -> SampledGrid<T> {
    let mut v = grid.values.clone();
    transform(&mut v, false);
    transform(&mut v, true);
    SampledGrid { x0: grid.x0, dx: grid.dx, values: v }
}

pub fn fft_frac_deriv<T: Real>(grid: &SampledGrid<T>, alpha: &Order<T>, cfg: &SpectralConfig<T>) -> Result<SampledGrid<T>> {
    let n = grid.len();
    if n < 8 || !(grid.dx > T::zero()) {
        return Err(Error::Input("a grid needs at least 8 samples and dx > 0".into()));
    }
    if !(alpha.alpha1() > -T::one()) {
        return Err(Error::Input("spectral orders need Re α > -1".into()));
    }
    let mut v = grid.values.clone();
    match cfg.window {
        Window::None => {
            let peak = v.iter().map(|z| z.norm()).fold(T::zero(), T::max);
            let edge = v[0].norm().max(v[n - 1].norm());
            if edge >= T::lit(1e-6) * peak {
                return Err(Error::Boundary(format!(
                    "boundary magnitude {:e} is not below 1e-6 of the peak {:e}",
                    edge.to_f64_lossy(),
                    peak.to_f64_lossy()
                )));
            }
        }
        Window::Exponential(decay) => {
            if decay < T::zero() {
                return Err(Error::Input("window decay must be non-negative".into()));
            }
            let half = grid.dx * T::of(n - 1) / T::lit(2.0);
            let centre = grid.x0 + half;
            for (j, z) in v.iter_mut().enumerate() {
                let r = (grid.x(j) - centre) / half;
                *z = *z * (-decay * r.powi(8)).exp();
            }
        }
    }
    transform(&mut v, false);
    let zero_order = alpha.value.norm() == T::zero();
    let peak = v.iter().map(|z| z.norm()).fold(T::zero(), T::max);
    let has_mean = v[0].norm() > T::lit(1e-10) * peak.max(T::min_positive_value());
    v[0] = if zero_order {
        v[0]
    } else if alpha.alpha1() > T::zero() {
        C::new(T::zero(), T::zero())
    } else {
        match cfg.dc_mode {
            _ if !has_mean => C::new(T::zero(), T::zero()),
            DcMode::ZeroDC => C::new(T::zero(), T::zero()),
            DcMode::RequireZeroMean | DcMode::Error => {
                return Err(Error::Dc(format!("nonzero mean {:e} with Re α ≤ 0", (v[0].norm() / T::of(n)).to_f64_lossy())))
            }
        }
    };
    if cfg.dc_mode == DcMode::RequireZeroMean && has_mean && !zero_order && alpha.alpha1() > T::zero() {
        return Err(Error::Dc("samples must have zero mean".into()));
    }
    let step = T::TAU() / (T::of(n) * grid.dx);
    for j in 1..n {
        let m = if 2 * j == n {
            let k = step * T::of(j);
            (multiplier(k, alpha, cfg.side)? + multiplier(-k, alpha, cfg.side)?) / T::lit(2.0)
        } else {
            let signed = if 2 * j < n { T::of(j) } else { -T::of(n - j) };
            multiplier(step * signed, alpha, cfg.side)?
        };
        v[j] = v[j] * m;
    }
    transform(&mut v, true);
    Ok(SampledGrid { x0: grid.x0, dx: grid.dx, values: v })
}

pub fn fft_frac_deriv_many<T: Real>(grids: &[SampledGrid<T>], alpha: &Order<T>, cfg: &SpectralConfig<T>) -> Vec<Result<SampledGrid<T>>> {
    grids.par_iter().map(|g| fft_frac_deriv(g, alpha, cfg)).collect()
}

/// `max |a - b| / max |b|` over samples with `|x - centre| ≤ radius`.
pub fn central_rel_err<T: Real>(a: &SampledGrid<T>, b: &[C<T>], centre: T, radius: T) -> T {
    let mut diff = T::zero();
    let mut scale = T::zero();
    for (j, (u, w)) in a.values.iter().zip(b).enumerate() {
        if (a.x(j) - centre).abs() <= radius {
            diff = diff.max((*u - *w).norm());
            scale = scale.max(w.norm());
        }
    }
    diff / scale.max(T::min_positive_value())
}
