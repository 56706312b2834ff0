use std::fmt;

use num_complex::Complex64;

use super::{Kind, ScalarExpr};

// Binding strength of the printed form; higher binds tighter.
const SUM: u8 = 1;
const PRODUCT: u8 = 2;
const UNARY: u8 = 3;
const POWER: u8 = 4;
const ATOM: u8 = 5;

fn precedence(e: &ScalarExpr) -> u8 {
    match e.kind() {
        Kind::Add(..) | Kind::Sub(..) => SUM,
        Kind::Mul(..) | Kind::Div(..) => PRODUCT,
        Kind::Neg(_) => UNARY,
        Kind::Pow(..) => POWER,
        Kind::Const(_) | Kind::Var(_) | Kind::Conj(_) | Kind::Apply(..) => ATOM,
    }
}

fn write_real(f: &mut fmt::Formatter<'_>, v: f64) -> fmt::Result {
    // `{}` on f64 prints the shortest string that parses back to the same value.
    if v < 0.0 || (v == 0.0 && v.is_sign_negative()) {
        write!(f, "(-{})", -v)
    } else {
        write!(f, "{v}")
    }
}

fn write_const(f: &mut fmt::Formatter<'_>, c: Complex64) -> fmt::Result {
    if c.im == 0.0 {
        return write_real(f, c.re);
    }
    let imag = if c.im == 1.0 {
        "i".to_string()
    } else if c.im == -1.0 {
        "-i".to_string()
    } else if c.im < 0.0 {
        format!("-{}*i", -c.im)
    } else {
        format!("{}*i", c.im)
    };
    if c.re == 0.0 {
        if c.im == 1.0 {
            f.write_str("i")
        } else {
            write!(f, "({imag})")
        }
    } else if imag.starts_with('-') {
        write!(f, "({}{imag})", c.re)
    } else {
        write!(f, "({}+{imag})", c.re)
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, e: &ScalarExpr, min: u8) -> fmt::Result {
    if precedence(e) < min {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for ScalarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind() {
            Kind::Const(c) => write_const(f, *c),
            Kind::Var(a) => write!(f, "x{a}"),
            Kind::Add(a, b) => {
                write_operand(f, a, SUM)?;
                f.write_str(" + ")?;
                write_operand(f, b, PRODUCT)
            }
            Kind::Sub(a, b) => {
                write_operand(f, a, SUM)?;
                f.write_str(" - ")?;
                write_operand(f, b, PRODUCT)
            }
            Kind::Mul(a, b) => {
                write_operand(f, a, PRODUCT)?;
                f.write_str("*")?;
                write_operand(f, b, POWER)
            }
            Kind::Div(a, b) => {
                write_operand(f, a, PRODUCT)?;
                f.write_str("/")?;
                write_operand(f, b, POWER)
            }
            Kind::Pow(a, n) => {
                write_operand(f, a, ATOM)?;
                write!(f, "^{n}")
            }
            Kind::Neg(a) => {
                f.write_str("-")?;
                write_operand(f, a, POWER)
            }
            Kind::Conj(a) => write!(f, "conj({a})"),
            Kind::Apply(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}
