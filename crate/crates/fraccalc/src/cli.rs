//! Command-line front end: expression parser, argument handling and output formatting.
//!
//! Every numeric path maps onto a library call; this module only parses and prints.

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::branchcut::{to_pair, CutOrientation};
use crate::composition::{
    beta_identity_suite, gamma_reflection, j_closed, j_numeric, negative_order_composition, phase_table_all,
    verify_composition, Line,
};
use crate::contour::{frac_differint_curve, AnalyticFn, CurvePsi, Side};
use crate::error::{Error, Result};
use crate::functions::{builtin, parse_complex};
use crate::kernel::{kernel_eps, kernel_limit, Order};
use crate::poleform::{branch_value_set, PoleForm};
use crate::quad::{QuadratureConfig, Tail};
use crate::realline::{frac_differint, frac_differint_many, RealFunction};
use crate::scalar::C;
use crate::spectral::{central_rel_err, fft_frac_deriv, SampledGrid, SpectralConfig};

type C64 = C<f64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

/// Parsed function expression in the variable `x`.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    /// Non-negative literal; `imaginary` marks an `i` suffix.
    Num { value: f64, imaginary: bool },
    X,
    Neg(Box<Expr>),
    Exp(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn eval(&self, x: C64) -> C64 {
        match self {
            Expr::Num { value, imaginary: false } => C64::new(*value, 0.0),
            Expr::Num { value, imaginary: true } => C64::new(0.0, *value),
            Expr::X => x,
            Expr::Neg(e) => -e.eval(x),
            Expr::Exp(e) => e.eval(x).exp(),
            Expr::Bin(op, a, b) => {
                let (u, v) = (a.eval(x), b.eval(x));
                match op {
                    BinOp::Add => u + v,
                    BinOp::Sub => u - v,
                    BinOp::Mul => u * v,
                    BinOp::Div => u / v,
                    BinOp::Pow if v.im == 0.0 && v.re.fract() == 0.0 && v.re.abs() <= 64.0 => u.powi(v.re as i32),
                    BinOp::Pow => u.powc(v),
                }
            }
        }
    }
}

/// Prints binary nodes in parentheses so that parsing the output gives back the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num { value, imaginary } => write!(f, "{value}{}", if *imaginary { "i" } else { "" }),
            Expr::X => write!(f, "x"),
            Expr::Neg(e) => match **e {
                Expr::Num { .. } | Expr::X | Expr::Exp(_) | Expr::Neg(_) => write!(f, "-{e}"),
                _ => write!(f, "-({e})"),
            },
            Expr::Exp(e) => write!(f, "exp({e})"),
            Expr::Bin(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
        }
    }
}

const OPERAND: &str = "operand (number, 'x', 'exp(', '(' or '-')";

struct ExprParser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl ExprParser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn fail<T>(&mut self, expected: &str) -> Result<T> {
        self.skip_ws();
        Err(Error::Syntax { offset: self.pos, expected: expected.into() })
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            self.fail(&format!("'{}'", c as char))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let op = if c == b'+' { BinOp::Add } else { BinOp::Sub };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.term()?));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        while let Some(c @ (b'*' | b'/')) = self.peek() {
            self.pos += 1;
            let op = if c == b'*' { BinOp::Mul } else { BinOp::Div };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.factor()?));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr> {
        let base = self.base()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(self.factor()?)));
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.base()?)))
            }
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(b'x') => {
                self.pos += 1;
                Ok(Expr::X)
            }
            Some(b'e') if self.src[self.pos..].starts_with(b"exp") => {
                self.pos += 3;
                self.expect(b'(')?;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(Expr::Exp(Box::new(e)))
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            _ => self.fail(OPERAND),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
            p.pos - s
        };
        let mut count = digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            count += digits(self);
        }
        if count == 0 {
            self.pos = start;
            return self.fail("digits");
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) && !self.src[self.pos..].starts_with(b"exp") {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                self.pos = save + 1;
                return Err(Error::Syntax { offset: self.pos, expected: "exponent digits".into() });
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        let value: f64 = text.parse().map_err(|_| Error::Syntax { offset: start, expected: "number".into() })?;
        let imaginary = self.src.get(self.pos) == Some(&b'i');
        if imaginary {
            self.pos += 1;
        }
        Ok(Expr::Num { value, imaginary })
    }
}

pub fn parse_expression(text: &str) -> Result<Expr> {
    let mut p = ExprParser { src: text.as_bytes(), pos: 0 };
    let e = p.expr()?;
    if p.peek().is_some() {
        return p.fail("operator or end of input");
    }
    Ok(e)
}

/// A parsed expression viewed as a function on the real line.
pub struct ExprFunction {
    pub expr: Expr,
}

impl RealFunction<f64> for ExprFunction {
    fn value(&self, x: f64) -> C64 {
        self.expr.eval(C64::new(x, 0.0))
    }

    fn tail(&self, _side: CutOrientation) -> Tail<f64> {
        Tail::Unknown
    }
}

/// `1/2`, `0.5`, `0.5+0.25i`.
pub fn parse_order(s: &str) -> Result<Order<f64>> {
    if let Some((p, q)) = s.split_once('/') {
        let p: i64 = p.trim().parse().map_err(|_| Error::Input(format!("bad rational order {s:?}")))?;
        let q: i64 = q.trim().parse().map_err(|_| Error::Input(format!("bad rational order {s:?}")))?;
        return Order::rational(p, q);
    }
    match parse_complex(s) {
        Some((a, 0.0)) => Ok(Order::real(a)),
        Some((a, b)) => Ok(Order::complex(a, b)),
        None => Err(Error::Input(format!("bad order {s:?}"))),
    }
}

fn parse_point(s: &str) -> Result<C64> {
    parse_complex(s).map(|(a, b)| C64::new(a, b)).ok_or_else(|| Error::Input(format!("bad complex number {s:?}")))
}

fn read_file(path: &str) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{path}: {e}")))
}

fn load_real_function(spec: &str) -> Result<Arc<dyn RealFunction<f64>>> {
    if let Some(text) = spec.strip_prefix("expr:") {
        return Ok(Arc::new(ExprFunction { expr: parse_expression(text)? }));
    }
    if spec.ends_with(".json") {
        return Ok(Arc::new(PoleForm::<f64>::from_json(&read_file(spec)?)?));
    }
    builtin(spec).ok_or_else(|| Error::Input(format!("unknown function {spec:?}")))
}

fn load_analytic(spec: &str) -> Result<AnalyticFn<f64>> {
    if let Some(text) = spec.strip_prefix("expr:") {
        let e = parse_expression(text)?;
        return Ok(AnalyticFn::new(move |z| e.eval(z), Tail::Unknown));
    }
    if spec.ends_with(".json") {
        return Ok(AnalyticFn::from_pole_form(&PoleForm::from_json(&read_file(spec)?)?));
    }
    match spec.trim() {
        "lorentzian" => Ok(AnalyticFn::lorentzian()),
        "gaussian" => Ok(AnalyticFn::gaussian()),
        s => {
            let c = s
                .strip_prefix("exp(")
                .and_then(|r| r.strip_suffix(')'))
                .and_then(parse_complex)
                .ok_or_else(|| Error::Input(format!("unknown function {spec:?}")))?;
            Ok(AnalyticFn::exp(C64::new(c.0, c.1)))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SideArg {
    Plus,
    Minus,
}

impl SideArg {
    fn orientation(self) -> CutOrientation {
        match self {
            SideArg::Plus => CutOrientation::PlusAxis,
            SideArg::Minus => CutOrientation::MinusAxis,
        }
    }

    fn curve_side(self) -> Side {
        match self {
            SideArg::Plus => Side::PsiPlus,
            SideArg::Minus => Side::PsiMinus,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    All,
    Reflection,
    Beta,
    Phase,
    J,
    Negative,
}

#[derive(Clone, Debug, clap::Args)]
pub struct Tolerances {
    /// Relative quadrature tolerance.
    #[arg(long)]
    pub rel_tol: Option<f64>,
    /// Absolute quadrature tolerance.
    #[arg(long)]
    pub abs_tol: Option<f64>,
}

impl Tolerances {
    fn config(&self) -> QuadratureConfig<f64> {
        let mut cfg = QuadratureConfig::default();
        if let Some(r) = self.rel_tol {
            cfg.rel_tol = r;
        }
        if let Some(a) = self.abs_tol {
            cfg.abs_tol = a;
        }
        cfg
    }
}

#[derive(Debug, Parser)]
#[command(name = "fraccalc", version, about = "Fractional differintegrals via the (-ik)^α multiplier")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Differintegral at one point.
    Eval {
        /// Catalog name, `expr:<expression>` or a pole-form JSON path.
        #[arg(long = "fn")]
        func: String,
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
        #[arg(long, allow_hyphen_values = true, default_value = "0")]
        x: String,
        #[arg(long, value_enum, default_value = "plus")]
        side: SideArg,
        /// Curve JSON; evaluates at the complex point `--x` on that curve.
        #[arg(long)]
        curve: Option<String>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[command(flatten)]
        tol: Tolerances,
    },
    /// Differintegral on a uniform grid.
    Table {
        #[arg(long = "fn")]
        func: String,
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
        #[arg(long, value_enum, default_value = "plus")]
        side: SideArg,
        #[arg(long, allow_hyphen_values = true)]
        min: f64,
        #[arg(long, allow_hyphen_values = true)]
        max: f64,
        #[arg(long, default_value_t = 11)]
        count: usize,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[command(flatten)]
        tol: Tolerances,
    },
    /// Distinct values of the closed form over winding numbers.
    Branches {
        #[arg(long)]
        poleform: Option<String>,
        #[arg(long = "fn")]
        func: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
        #[arg(long, allow_hyphen_values = true, default_value = "0")]
        z: String,
        #[arg(long, default_value_t = 8)]
        max_winding: i64,
    },
    /// Compares D^{α+β} f with D^α D^β f.
    ComposeCheck {
        #[arg(long = "fn")]
        func: String,
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
        #[arg(long, allow_hyphen_values = true)]
        beta: String,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        x: f64,
        #[arg(long, value_enum, default_value = "plus")]
        side: SideArg,
        #[arg(long, default_value_t = 1e-4)]
        tolerance: f64,
        #[command(flatten)]
        tol: Tolerances,
    },
    /// FFT multiplier against quadrature on the central region of a grid.
    SpectralCompare {
        #[arg(long = "fn")]
        func: String,
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
        #[arg(long, value_enum, default_value = "plus")]
        side: SideArg,
        #[arg(long, allow_hyphen_values = true, default_value_t = -512.0)]
        min: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 512.0)]
        max: f64,
        #[arg(long, default_value_t = 4096)]
        n: usize,
        /// Quadrature comparison points across the central region.
        #[arg(long, default_value_t = 17)]
        points: usize,
        /// Half width of the central region around the grid centre.
        #[arg(long, default_value_t = 4.0)]
        radius: f64,
        #[arg(long, default_value_t = 1e-3)]
        tolerance: f64,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Regularized (`--eps`) or limiting kernel on a grid.
    KernelDump {
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
        #[arg(long, value_enum, default_value = "plus")]
        side: SideArg,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, allow_hyphen_values = true, default_value_t = -2.0)]
        min: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 2.0)]
        max: f64,
        #[arg(long, default_value_t = 9)]
        count: usize,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Identity suites.
    Verify {
        #[arg(long, value_enum, default_value = "all")]
        suite: Suite,
        #[command(flatten)]
        tol: Tolerances,
    },
}

enum Failure {
    Usage(Error),
    Numeric(Error),
    Verification(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Convergence(_) | Error::Accuracy { .. } => Failure::Numeric(e),
            _ => Failure::Usage(e),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(Error::Input(e.to_string()))
    }
}

type Outcome = std::result::Result<(), Failure>;

fn grid(min: f64, max: f64, count: usize) -> Result<Vec<f64>> {
    if count < 1 || !(min < max) {
        return Err(Error::Input("need count ≥ 1 and min < max".into()));
    }
    if count == 1 {
        return Ok(vec![min]);
    }
    Ok((0..count).map(|j| min + (max - min) * j as f64 / (count - 1) as f64).collect())
}

fn c_json(z: C64) -> serde_json::Value {
    json!(to_pair(z))
}

fn side_name(side: SideArg) -> &'static str {
    match side {
        SideArg::Plus => "plus",
        SideArg::Minus => "minus",
    }
}

#[allow(clippy::too_many_arguments)]
fn run_eval(
    out: &mut dyn Write,
    func: &str,
    alpha: &str,
    x: &str,
    side: SideArg,
    curve: Option<&str>,
    format: Format,
    cfg: &QuadratureConfig<f64>,
) -> Outcome {
    let a = parse_order(alpha)?;
    if let Some(path) = curve {
        let psi = CurvePsi::from_json(&read_file(path)?)?;
        let f = load_analytic(func)?;
        let z0 = parse_point(x)?;
        let r = frac_differint_curve(&f, &a, z0, &psi, side.curve_side(), cfg)?;
        match format {
            Format::Json => writeln!(
                out,
                "{}",
                json!({"z": c_json(z0), "alpha": c_json(a.value), "side": side_name(side), "re": r.value.re, "im": r.value.im,
                       "est_error": r.est_error, "method": r.method.name(), "branch_n": r.branch.n})
            )?,
            Format::Csv => writeln!(out, "z_re,z_im,re,im,est_error,method,branch_n\n{},{},{},{},{},{},{}", z0.re, z0.im, r.value.re, r.value.im, r.est_error, r.method.name(), r.branch.n)?,
        }
        return Ok(());
    }
    let f = load_real_function(func)?;
    let xv: f64 = x.trim().parse().map_err(|_| Error::Input(format!("bad x {x:?}")))?;
    let r = frac_differint(&f, &a, xv, side.orientation(), cfg)?;
    match format {
        Format::Json => writeln!(
            out,
            "{}",
            json!({"x": xv, "alpha": c_json(a.value), "side": side_name(side), "re": r.value.re, "im": r.value.im,
                   "est_error": r.est_error, "method": r.method.name(), "branch_n": r.branch.n, "approximate": r.approximate})
        )?,
        Format::Csv => writeln!(out, "x,re,im,est_error,method,branch_n\n{},{},{},{},{},{}", xv, r.value.re, r.value.im, r.est_error, r.method.name(), r.branch.n)?,
    }
    Ok(())
}

fn run_table(out: &mut dyn Write, func: &str, alpha: &str, side: SideArg, xs: &[f64], format: Format, cfg: &QuadratureConfig<f64>) -> Outcome {
    let a = parse_order(alpha)?;
    let f = load_real_function(func)?;
    let results = frac_differint_many(&f, &a, xs, side.orientation(), cfg);
    let mut rows = Vec::new();
    for (x, r) in xs.iter().zip(results) {
        rows.push((*x, r?));
    }
    match format {
        Format::Csv => {
            writeln!(out, "x,re,im,est_error,method,branch_n")?;
            for (x, r) in rows {
                writeln!(out, "{},{},{},{:e},{},{}", x, r.value.re, r.value.im, r.est_error, r.method.name(), r.branch.n)?;
            }
        }
        Format::Json => {
            let rows: Vec<_> = rows
                .iter()
                .map(|(x, r)| json!({"x": x, "re": r.value.re, "im": r.value.im, "est_error": r.est_error, "method": r.method.name(), "branch_n": r.branch.n}))
                .collect();
            writeln!(out, "{}", json!({"function": func, "alpha": c_json(a.value), "side": side_name(side), "rows": rows}))?;
        }
    }
    Ok(())
}

fn run_branches(out: &mut dyn Write, poleform: Option<&str>, func: Option<&str>, alpha: &str, z: &str, max_winding: i64) -> Outcome {
    let h = match (poleform, func) {
        (Some(path), _) => PoleForm::from_json(&read_file(path)?)?,
        (None, Some("lorentzian")) => PoleForm::lorentzian(),
        _ => return Err(Error::Input("branches needs --poleform PATH or --fn lorentzian".into()).into()),
    };
    let a = parse_order(alpha)?;
    let z0 = parse_point(z)?;
    let set = branch_value_set(&h, &a, z0, max_winding)?;
    let bound = match set.bound {
        Some(b) => {
            let q = match a.class {
                crate::kernel::OrderClass::RationalPQ(_, q) => q,
                _ => 0,
            };
            json!(format!("q^{{N+1}} = {q}^{} = {b}", h.len() + 1))
        }
        None => json!(null),
    };
    let bound_text = set.bound.map(|b| format!("q^{{N+1}} = {b}"));
    writeln!(
        out,
        "{}",
        json!({
            "alpha": c_json(a.value),
            "z0": c_json(z0),
            "poles": h.len(),
            "max_winding": max_winding,
            "count": set.count(),
            "bound": bound_text,
            "bound_detail": bound,
            "within_bound": set.within_bound,
            "periodic": set.periodic,
            "counts_by_bound": set.counts_by_bound,
            "lattice_points": set.lattice_points,
            "values": set.values.iter().map(|(v, m)| json!({"value": c_json(*v), "multiplicity": m})).collect::<Vec<_>>(),
        })
    )?;
    if set.within_bound {
        Ok(())
    } else {
        Err(Failure::Verification(format!("{} distinct values exceed the bound", set.count())))
    }
}

#[allow(clippy::too_many_arguments)]
fn run_spectral(
    out: &mut dyn Write,
    func: &str,
    alpha: &str,
    side: SideArg,
    (min, max, n): (f64, f64, usize),
    points: usize,
    radius: f64,
    tolerance: f64,
    format: Format,
) -> Outcome {
    let a = parse_order(alpha)?;
    let f = load_real_function(func)?;
    let g = SampledGrid::sample(|x| f.value(x), min, max, n)?;
    let d = fft_frac_deriv(&g, &a, &SpectralConfig::for_order(&a, side.orientation()))?;
    let centre = (min + max) / 2.0;
    let picks: Vec<usize> = (0..n).filter(|&j| (d.x(j) - centre).abs() <= radius).collect();
    if picks.is_empty() {
        return Err(Error::Input("no grid points inside the central region".into()).into());
    }
    let stride = (picks.len() / points.max(1)).max(1);
    let chosen: Vec<usize> = picks.iter().copied().step_by(stride).collect();
    let xs: Vec<f64> = chosen.iter().map(|&j| d.x(j)).collect();
    let cfg = QuadratureConfig::default();
    let quad: Vec<C64> = frac_differint_many(&f, &a, &xs, side.orientation(), &cfg)
        .into_iter()
        .map(|r| r.map(|v| v.value))
        .collect::<Result<_>>()?;
    let sub = SampledGrid { x0: d.x0, dx: d.dx, values: d.values.clone() };
    let mut reference = vec![C64::new(f64::NAN, 0.0); n];
    for (&j, v) in chosen.iter().zip(&quad) {
        reference[j] = *v;
    }
    let picked = SampledGrid { x0: 0.0, dx: 1.0, values: chosen.iter().map(|&j| sub.values[j]).collect() };
    let err = central_rel_err(&picked, &quad, 0.0, f64::INFINITY);
    let pass = err <= tolerance;
    match format {
        Format::Csv => {
            writeln!(out, "x,spectral_re,spectral_im,quadrature_re,quadrature_im")?;
            for (&j, q) in chosen.iter().zip(&quad) {
                writeln!(out, "{},{},{},{},{}", d.x(j), d.values[j].re, d.values[j].im, q.re, q.im)?;
            }
        }
        Format::Json => {
            let rows: Vec<_> = chosen
                .iter()
                .zip(&quad)
                .map(|(&j, q)| json!({"x": d.x(j), "spectral": c_json(d.values[j]), "quadrature": c_json(*q)}))
                .collect();
            writeln!(out, "{}", json!({"case": "spectral_compare", "rows": rows, "residual": err, "tolerance": tolerance, "pass": pass}))?;
        }
    }
    if pass {
        Ok(())
    } else {
        Err(Failure::Verification(format!("central relative error {err:e} exceeds {tolerance:e}")))
    }
}

fn run_kernel(out: &mut dyn Write, alpha: &str, side: SideArg, eps: Option<f64>, ws: &[f64], format: Format) -> Outcome {
    let a = parse_order(alpha)?;
    let mut rows = Vec::new();
    for &w in ws {
        let v = match eps {
            Some(e) => kernel_eps(&a, w, e, side.orientation())?,
            None => kernel_limit(&a, w, side.orientation())?,
        };
        rows.push((w, v));
    }
    match format {
        Format::Csv => {
            writeln!(out, "w,re,im")?;
            for (w, v) in rows {
                writeln!(out, "{w},{},{}", v.re, v.im)?;
            }
        }
        Format::Json => {
            let rows: Vec<_> = rows.iter().map(|(w, v)| json!({"w": w, "re": v.re, "im": v.im})).collect();
            writeln!(out, "{}", json!({"alpha": c_json(a.value), "side": side_name(side), "eps": eps, "rows": rows}))?;
        }
    }
    Ok(())
}

/// Deterministic points `(re, im)` on `(-3, 3) × (-1.5, 1.5)` away from the integers.
pub fn reflection_points(n: usize) -> Vec<C64> {
    let (g1, g2) = (0.754_877_666_246_692_7, 0.569_840_290_998_053_3);
    (1..)
        .map(|k: usize| {
            let u = (k as f64 * g1).fract();
            let v = (k as f64 * g2).fract();
            C64::new(-3.0 + 6.0 * u, -1.5 + 3.0 * v)
        })
        .filter(|g| (g.re - g.re.round()).abs() > 0.05 || g.im.abs() > 0.05)
        .take(n)
        .collect()
}

fn run_verify(out: &mut dyn Write, suite: Suite, cfg: &QuadratureConfig<f64>) -> Outcome {
    let want = |s: Suite| suite == Suite::All || suite == s;
    let mut failed = 0usize;
    let mut total = 0usize;
    let mut emit = |out: &mut dyn Write, line: String, pass: bool| -> std::io::Result<()> {
        total += 1;
        if !pass {
            failed += 1;
        }
        writeln!(out, "{line}")
    };
    if want(Suite::Reflection) {
        for g in reflection_points(50) {
            let r = gamma_reflection(g)?;
            let pass = r <= 1e-10;
            emit(out, json!({"case": "gamma_reflection", "params": {"gamma": c_json(g)}, "residual": r, "tolerance": 1e-10, "pass": pass}).to_string(), pass)?;
        }
    }
    if want(Suite::Beta) {
        for (a, b, x, z) in [(0.6, 0.6, 0.0, 1.0), (0.7, 0.45, 2.0, -1.5)] {
            for c in beta_identity_suite(a, b, x, z, cfg)?.checks {
                emit(out, c.to_json(), c.pass())?;
            }
        }
    }
    if want(Suite::Phase) {
        for c in phase_table_all(0.6, 0.6, 5.0, cfg)? {
            emit(out, c.to_json(), c.pass())?;
        }
    }
    if want(Suite::J) {
        let (a, b) = (Order::real(0.3), Order::real(0.4));
        let (z1, z2) = (C64::new(-0.3, 0.7), C64::new(1.1, -1.4));
        let closed = j_closed(z1, z2, &a, &b)?;
        let num = j_numeric(z1, z2, &a, &b, None, cfg)?;
        let rel = (num - closed).norm() / closed.norm();
        emit(out, json!({"case": "j_separating", "lhs": c_json(num), "rhs": c_json(closed), "residual": rel, "tolerance": 1e-6, "pass": rel <= 1e-6}).to_string(), rel <= 1e-6)?;
        let rev = j_numeric(z1, z2, &a, &b, Some(Line::bisector(z1, z2).reversed()), cfg)?;
        let flip = (rev + num).norm() / num.norm();
        emit(out, json!({"case": "j_reversed", "lhs": c_json(rev), "rhs": c_json(-num), "residual": flip, "tolerance": 1e-8, "pass": flip <= 1e-8}).to_string(), flip <= 1e-8)?;
        let e = (z2 - z1) / (z2 - z1).norm();
        let off = Line { point: (z1 + z2) / 2.0 + e * C64::i() * 2.0, direction: e };
        let v = j_numeric(z1, z2, &a, &b, Some(off), cfg)?;
        emit(out, json!({"case": "j_non_separating", "lhs": c_json(v), "rhs": [0.0, 0.0], "residual": v.norm(), "tolerance": 1e-8, "pass": v.norm() <= 1e-8}).to_string(), v.norm() <= 1e-8)?;
    }
    if want(Suite::Negative) || suite == Suite::Beta {
        let side = CutOrientation::PlusAxis;
        for (al, be, x, tol) in [(-1.0, -0.5, 1.0, 1e-6), (-1.0, -1.0, 1.0, 1e-8), (-2.0, -0.3, 1.5, 1e-6)] {
            let r = negative_order_composition(&Order::real(al), &Order::real(be), x, 0.0, side, cfg)?;
            emit(out, r.to_json(tol), r.passes(tol))?;
        }
    }
    writeln!(out, "{}", json!({"suite": format!("{suite:?}").to_lowercase(), "checks": total, "failed": failed, "pass": failed == 0}))?;
    if failed == 0 {
        Ok(())
    } else {
        Err(Failure::Verification(format!("{failed} of {total} checks failed")))
    }
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Outcome {
    match cli.command {
        Command::Eval { func, alpha, x, side, curve, format, tol } => run_eval(out, &func, &alpha, &x, side, curve.as_deref(), format, &tol.config()),
        Command::Table { func, alpha, side, min, max, count, format, tol } => run_table(out, &func, &alpha, side, &grid(min, max, count)?, format, &tol.config()),
        Command::Branches { poleform, func, alpha, z, max_winding } => run_branches(out, poleform.as_deref(), func.as_deref(), &alpha, &z, max_winding),
        Command::ComposeCheck { func, alpha, beta, x, side, tolerance, tol } => {
            let f = load_real_function(&func)?;
            let r = verify_composition(&f, &parse_order(&alpha)?, &parse_order(&beta)?, x, side.orientation(), &tol.config())?;
            writeln!(out, "{}", r.to_json(tolerance))?;
            if r.passes(tolerance) {
                Ok(())
            } else {
                Err(Failure::Verification(format!("residual {:e} exceeds {tolerance:e}", r.residual)))
            }
        }
        Command::SpectralCompare { func, alpha, side, min, max, n, points, radius, tolerance, format } => {
            run_spectral(out, &func, &alpha, side, (min, max, n), points, radius, tolerance, format)
        }
        Command::KernelDump { alpha, side, eps, min, max, count, format } => run_kernel(out, &alpha, side, eps, &grid(min, max, count)?, format),
        Command::Verify { suite, tol } => run_verify(out, suite, &tol.config()),
    }
}

fn diagnostic(err: &mut dyn Write, kind: &str, code: &str, message: &str) {
    let _ = writeln!(err, "{}", json!({"error": kind, "code": code, "message": message}));
}

/// Sizes the global thread pool from `FRAC_NUM_THREADS` when set.
pub fn init_threads() {
    if let Some(n) = std::env::var("FRAC_NUM_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

/// Runs one command line and returns the process exit code.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            diagnostic(err, "usage", "usage", e.to_string().trim());
            return 1;
        }
    };
    match dispatch(cli, out) {
        Ok(()) => 0,
        Err(Failure::Usage(e)) => {
            diagnostic(err, "usage", e.code(), &e.to_string());
            1
        }
        Err(Failure::Numeric(e)) => {
            diagnostic(err, "numeric", e.code(), &e.to_string());
            2
        }
        Err(Failure::Verification(m)) => {
            diagnostic(err, "verification", "verification", &m);
            3
        }
    }
}
