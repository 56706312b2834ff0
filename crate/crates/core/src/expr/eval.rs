use std::collections::HashMap;

use num_complex::Complex64;
use thiserror::Error;

use super::{ChartPoint, Func, Kind, ScalarExpr};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainKind {
    DivisionByZero,
    LogOfNonpositive,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{} in `{term}` at {point}", match .kind {
    DomainKind::DivisionByZero => "division by zero",
    DomainKind::LogOfNonpositive => "logarithm of a nonpositive real",
})]
pub struct EvalError {
    pub kind: DomainKind,
    /// Printed form of the offending subterm.
    pub term: String,
    pub point: ChartPoint,
}

/// Evaluates many expressions at one chart point, memoizing shared nodes.
///
/// The cache holds a clone of every node it memoizes, so node addresses stay
/// valid for the lifetime of the evaluator.
pub struct Evaluator {
    point: ChartPoint,
    cache: HashMap<usize, (ScalarExpr, Complex64)>,
}

impl Evaluator {
    pub fn new(point: ChartPoint) -> Self {
        Self {
            point,
            cache: HashMap::new(),
        }
    }

    pub fn point(&self) -> &ChartPoint {
        &self.point
    }

    pub fn eval(&mut self, e: &ScalarExpr) -> Result<Complex64, EvalError> {
        let memo = !matches!(e.kind(), Kind::Const(_) | Kind::Var(_)) && e.is_shared();
        if memo {
            if let Some((_, v)) = self.cache.get(&e.node_ptr()) {
                return Ok(*v);
            }
        }
        let v = self.compute(e)?;
        if memo {
            self.cache.insert(e.node_ptr(), (e.clone(), v));
        }
        Ok(v)
    }

    fn domain(&self, kind: DomainKind, e: &ScalarExpr) -> EvalError {
        EvalError {
            kind,
            term: e.to_string(),
            point: self.point,
        }
    }

    fn compute(&mut self, e: &ScalarExpr) -> Result<Complex64, EvalError> {
        let zero = Complex64::new(0.0, 0.0);
        Ok(match e.kind() {
            Kind::Const(c) => *c,
            Kind::Var(a) => Complex64::new(self.point.coord(*a), 0.0),
            Kind::Add(a, b) => self.eval(a)? + self.eval(b)?,
            Kind::Sub(a, b) => self.eval(a)? - self.eval(b)?,
            Kind::Mul(a, b) => self.eval(a)? * self.eval(b)?,
            Kind::Div(a, b) => {
                let num = self.eval(a)?;
                let den = self.eval(b)?;
                if den == zero {
                    return Err(self.domain(DomainKind::DivisionByZero, e));
                }
                num / den
            }
            Kind::Pow(a, n) => {
                let base = self.eval(a)?;
                if base == zero && *n < 0 {
                    return Err(self.domain(DomainKind::DivisionByZero, e));
                }
                base.powi(*n)
            }
            Kind::Neg(a) => -self.eval(a)?,
            Kind::Conj(a) => self.eval(a)?.conj(),
            Kind::Apply(func, a) => {
                let x = self.eval(a)?;
                match func {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Exp => x.exp(),
                    Func::Log => {
                        if x.im == 0.0 && x.re <= 0.0 {
                            return Err(self.domain(DomainKind::LogOfNonpositive, e));
                        }
                        x.ln()
                    }
                }
            }
        })
    }
}
