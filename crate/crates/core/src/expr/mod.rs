//! Symbolic complex-valued scalar fields over the four chart coordinates.
//!
//! A [`ScalarExpr`] is an immutable, reference-counted expression DAG. Nodes
//! are shared freely between expressions, and every node memoizes its own
//! partial derivatives, so repeated differentiation of large shared
//! subexpressions (metric inverses, connection components) stays linear in
//! the size of the DAG.
//!
//! Construction goes through smart constructors that perform light
//! simplification only: constant folding and the usual `0`/`1` identities.
//! Equality of two expressions is decided by evaluation at sample points,
//! never structurally.

mod eval;
mod parse;
mod print;

use std::f64::consts::PI;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;

pub use eval::{DomainKind, EvalError, Evaluator};
pub use parse::{parse_expr, ParseError, ParseErrorKind};

/// Number of chart coordinates.
pub const DIM: usize = 4;

/// A point of the coordinate chart, `(x0, x1, x2, x3)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartPoint([f64; DIM]);

impl ChartPoint {
    /// Returns `None` unless all four coordinates are finite.
    pub fn new(coords: [f64; DIM]) -> Option<Self> {
        coords.iter().all(|c| c.is_finite()).then_some(Self(coords))
    }

    pub fn origin() -> Self {
        Self([0.0; DIM])
    }

    pub fn coords(&self) -> [f64; DIM] {
        self.0
    }

    pub fn coord(&self, axis: usize) -> f64 {
        self.0[axis]
    }

    /// Copy of this point with one coordinate shifted by `delta`.
    pub fn shifted(&self, axis: usize, delta: f64) -> Self {
        let mut c = self.0;
        c[axis] += delta;
        Self(c)
    }
}

impl std::fmt::Display for ChartPoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let [a, b, c, d] = self.0;
        write!(f, "({a:.6}, {b:.6}, {c:.6}, {d:.6})")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
        }
    }
}

#[derive(Debug)]
pub(crate) enum Kind {
    Const(Complex64),
    Var(usize),
    Add(ScalarExpr, ScalarExpr),
    Sub(ScalarExpr, ScalarExpr),
    Mul(ScalarExpr, ScalarExpr),
    Div(ScalarExpr, ScalarExpr),
    Pow(ScalarExpr, i32),
    Neg(ScalarExpr),
    Conj(ScalarExpr),
    Apply(Func, ScalarExpr),
}

#[derive(Debug)]
pub(crate) struct Node {
    kind: Kind,
    /// Bit `a` is set when coordinate `a` occurs in the subtree.
    vars: u8,
    /// Real-valued wherever it evaluates successfully.
    real: bool,
    derivs: [OnceLock<ScalarExpr>; DIM],
}

/// Immutable symbolic scalar field; cheap to clone.
#[derive(Debug, Clone)]
pub struct ScalarExpr(Arc<Node>);

fn node(kind: Kind) -> ScalarExpr {
    let (vars, real) = match &kind {
        Kind::Const(c) => (0, c.im == 0.0),
        Kind::Var(a) => (1u8 << a, true),
        Kind::Add(a, b) | Kind::Sub(a, b) | Kind::Mul(a, b) | Kind::Div(a, b) => {
            (a.0.vars | b.0.vars, a.0.real && b.0.real)
        }
        Kind::Pow(a, _) | Kind::Neg(a) | Kind::Conj(a) | Kind::Apply(_, a) => (a.0.vars, a.0.real),
    };
    ScalarExpr(Arc::new(Node {
        kind,
        vars,
        real,
        derivs: Default::default(),
    }))
}

impl ScalarExpr {
    pub fn constant(value: Complex64) -> Self {
        node(Kind::Const(value))
    }

    pub fn real(value: f64) -> Self {
        Self::constant(Complex64::new(value, 0.0))
    }

    pub fn zero() -> Self {
        Self::real(0.0)
    }

    pub fn one() -> Self {
        Self::real(1.0)
    }

    /// The imaginary unit `i`.
    pub fn i() -> Self {
        Self::constant(Complex64::i())
    }

    pub fn pi() -> Self {
        Self::real(PI)
    }

    /// The coordinate function `x^axis`.
    ///
    /// Panics if `axis >= 4`.
    pub fn var(axis: usize) -> Self {
        assert!(axis < DIM, "chart coordinate index {axis} out of range");
        node(Kind::Var(axis))
    }

    pub(crate) fn kind(&self) -> &Kind {
        &self.0.kind
    }

    pub(crate) fn node_ptr(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub(crate) fn is_shared(&self) -> bool {
        Arc::strong_count(&self.0) > 1
    }

    pub fn as_constant(&self) -> Option<Complex64> {
        match self.0.kind {
            Kind::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_constant() == Some(Complex64::new(0.0, 0.0))
    }

    pub fn is_one(&self) -> bool {
        self.as_constant() == Some(Complex64::new(1.0, 0.0))
    }

    /// True when the expression is known to be real-valued by construction.
    pub fn is_real(&self) -> bool {
        self.0.real
    }

    /// True when no chart coordinate occurs in the expression.
    pub fn is_coordinate_free(&self) -> bool {
        self.0.vars == 0
    }

    pub fn depends_on(&self, axis: usize) -> bool {
        self.0.vars & (1 << axis) != 0
    }

    /// Same node (pointer identity), not mathematical equality.
    pub fn ptr_eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    pub fn powi(&self, n: i32) -> Self {
        match n {
            0 => return Self::one(),
            1 => return self.clone(),
            _ => {}
        }
        if let Some(c) = self.as_constant() {
            if c != Complex64::new(0.0, 0.0) || n > 0 {
                return Self::constant(c.powi(n));
            }
        }
        if let Kind::Pow(base, m) = &self.0.kind {
            if let Some(mn) = m.checked_mul(n) {
                return base.powi(mn);
            }
        }
        node(Kind::Pow(self.clone(), n))
    }

    pub fn conj(&self) -> Self {
        if self.0.real {
            return self.clone();
        }
        match &self.0.kind {
            Kind::Const(c) => Self::constant(c.conj()),
            Kind::Conj(inner) => inner.clone(),
            _ => node(Kind::Conj(self.clone())),
        }
    }

    pub fn apply(&self, func: Func) -> Self {
        if let Some(c) = self.as_constant() {
            let folded = match func {
                Func::Sin => Some(c.sin()),
                Func::Cos => Some(c.cos()),
                Func::Exp => Some(c.exp()),
                Func::Log if c.im != 0.0 || c.re > 0.0 => Some(c.ln()),
                Func::Log => None,
            };
            if let Some(v) = folded {
                return Self::constant(v);
            }
        }
        node(Kind::Apply(func, self.clone()))
    }

    pub fn sin(&self) -> Self {
        self.apply(Func::Sin)
    }

    pub fn cos(&self) -> Self {
        self.apply(Func::Cos)
    }

    pub fn exp(&self) -> Self {
        self.apply(Func::Exp)
    }

    /// Principal natural logarithm.
    pub fn ln(&self) -> Self {
        self.apply(Func::Log)
    }

    /// Exact partial derivative with respect to coordinate `axis`.
    ///
    /// Memoized per node, so differentiating the same shared subexpression
    /// twice costs nothing the second time. Panics if `axis >= 4`.
    pub fn diff(&self, axis: usize) -> Self {
        assert!(axis < DIM, "chart coordinate index {axis} out of range");
        if !self.depends_on(axis) {
            return Self::zero();
        }
        self.0.derivs[axis]
            .get_or_init(|| self.compute_diff(axis))
            .clone()
    }

    // The result must never reference `self`, otherwise the memo slot would
    // form an Arc cycle.
    fn compute_diff(&self, axis: usize) -> Self {
        match &self.0.kind {
            Kind::Const(_) => Self::zero(),
            Kind::Var(a) => {
                if *a == axis {
                    Self::one()
                } else {
                    Self::zero()
                }
            }
            Kind::Add(a, b) => a.diff(axis) + b.diff(axis),
            Kind::Sub(a, b) => a.diff(axis) - b.diff(axis),
            Kind::Mul(a, b) => a.diff(axis) * b + a * b.diff(axis),
            Kind::Div(a, b) => {
                let da = a.diff(axis);
                let db = b.diff(axis);
                if db.is_zero() {
                    da / b
                } else {
                    (da * b - a * db) / b.powi(2)
                }
            }
            Kind::Pow(a, n) => Self::real(*n as f64) * a.powi(n - 1) * a.diff(axis),
            Kind::Neg(a) => -a.diff(axis),
            Kind::Conj(a) => a.diff(axis).conj(),
            Kind::Apply(func, a) => {
                let da = a.diff(axis);
                let outer = match func {
                    Func::Sin => a.cos(),
                    Func::Cos => -a.sin(),
                    Func::Exp => node(Kind::Apply(Func::Exp, a.clone())),
                    Func::Log => return da / a,
                };
                outer * da
            }
        }
    }

    /// Evaluates at `p`; see [`Evaluator`] for batch evaluation that shares
    /// work between expressions.
    pub fn eval(&self, p: &ChartPoint) -> Result<Complex64, EvalError> {
        Evaluator::new(*p).eval(self)
    }
}

/// Partial derivative of `e` with respect to coordinate `axis`.
pub fn diff_expr(e: &ScalarExpr, axis: usize) -> ScalarExpr {
    e.diff(axis)
}

/// Evaluates `e` at the chart point `p`.
pub fn eval_expr(e: &ScalarExpr, p: &ChartPoint) -> Result<Complex64, EvalError> {
    e.eval(p)
}

fn add(a: &ScalarExpr, b: &ScalarExpr) -> ScalarExpr {
    match (a.as_constant(), b.as_constant()) {
        (Some(x), Some(y)) => ScalarExpr::constant(x + y),
        _ if a.is_zero() => b.clone(),
        _ if b.is_zero() => a.clone(),
        _ => {
            if let Kind::Neg(nb) = b.kind() {
                return sub(a, nb);
            }
            node(Kind::Add(a.clone(), b.clone()))
        }
    }
}

fn sub(a: &ScalarExpr, b: &ScalarExpr) -> ScalarExpr {
    match (a.as_constant(), b.as_constant()) {
        (Some(x), Some(y)) => ScalarExpr::constant(x - y),
        _ if b.is_zero() => a.clone(),
        _ if a.is_zero() => neg(b),
        _ if a.ptr_eq(b) => ScalarExpr::zero(),
        _ => {
            if let Kind::Neg(nb) = b.kind() {
                return add(a, nb);
            }
            node(Kind::Sub(a.clone(), b.clone()))
        }
    }
}

fn mul(a: &ScalarExpr, b: &ScalarExpr) -> ScalarExpr {
    let minus_one = Complex64::new(-1.0, 0.0);
    match (a.as_constant(), b.as_constant()) {
        (Some(x), Some(y)) => ScalarExpr::constant(x * y),
        _ if a.is_zero() || b.is_zero() => ScalarExpr::zero(),
        _ if a.is_one() => b.clone(),
        _ if b.is_one() => a.clone(),
        (Some(x), None) if x == minus_one => neg(b),
        (None, Some(y)) if y == minus_one => neg(a),
        (Some(x), None) => scale(x, b),
        (None, Some(y)) => scale(y, a),
        _ => node(Kind::Mul(a.clone(), b.clone())),
    }
}

// constant * expr, merging constant prefactors.
fn scale(c: Complex64, e: &ScalarExpr) -> ScalarExpr {
    if let Kind::Mul(l, r) = e.kind() {
        if let Some(x) = l.as_constant() {
            return mul(&ScalarExpr::constant(c * x), r);
        }
    }
    if let Kind::Neg(inner) = e.kind() {
        return scale(-c, inner);
    }
    node(Kind::Mul(ScalarExpr::constant(c), e.clone()))
}

fn div(a: &ScalarExpr, b: &ScalarExpr) -> ScalarExpr {
    match (a.as_constant(), b.as_constant()) {
        (Some(x), Some(y)) if y != Complex64::new(0.0, 0.0) => ScalarExpr::constant(x / y),
        _ if b.is_one() => a.clone(),
        _ if a.is_zero() && !b.is_zero() => ScalarExpr::zero(),
        (None, Some(y)) if y != Complex64::new(0.0, 0.0) => scale(y.inv(), a),
        _ => node(Kind::Div(a.clone(), b.clone())),
    }
}

fn neg(a: &ScalarExpr) -> ScalarExpr {
    match a.kind() {
        Kind::Const(c) => ScalarExpr::constant(-c),
        Kind::Neg(inner) => inner.clone(),
        Kind::Mul(l, r) if l.as_constant().is_some() => scale(-l.as_constant().unwrap(), r),
        _ => node(Kind::Neg(a.clone())),
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $f:ident) => {
        impl $trait<&ScalarExpr> for &ScalarExpr {
            type Output = ScalarExpr;
            fn $method(self, rhs: &ScalarExpr) -> ScalarExpr {
                $f(self, rhs)
            }
        }
        impl $trait<ScalarExpr> for &ScalarExpr {
            type Output = ScalarExpr;
            fn $method(self, rhs: ScalarExpr) -> ScalarExpr {
                $f(self, &rhs)
            }
        }
        impl $trait<&ScalarExpr> for ScalarExpr {
            type Output = ScalarExpr;
            fn $method(self, rhs: &ScalarExpr) -> ScalarExpr {
                $f(&self, rhs)
            }
        }
        impl $trait<ScalarExpr> for ScalarExpr {
            type Output = ScalarExpr;
            fn $method(self, rhs: ScalarExpr) -> ScalarExpr {
                $f(&self, &rhs)
            }
        }
    };
}

binop!(Add, add, add);
binop!(Sub, sub, sub);
binop!(Mul, mul, mul);
binop!(Div, div, div);

impl Neg for &ScalarExpr {
    type Output = ScalarExpr;
    fn neg(self) -> ScalarExpr {
        neg(self)
    }
}

impl Neg for ScalarExpr {
    type Output = ScalarExpr;
    fn neg(self) -> ScalarExpr {
        neg(&self)
    }
}

impl From<f64> for ScalarExpr {
    fn from(v: f64) -> Self {
        Self::real(v)
    }
}

impl From<Complex64> for ScalarExpr {
    fn from(v: Complex64) -> Self {
        Self::constant(v)
    }
}

impl std::str::FromStr for ScalarExpr {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, ParseError> {
        parse_expr(s)
    }
}

impl std::iter::Sum for ScalarExpr {
    fn sum<I: Iterator<Item = ScalarExpr>>(iter: I) -> Self {
        iter.fold(ScalarExpr::zero(), |acc, e| acc + e)
    }
}
