//! Closed arithmetic over integer and float literals, plus the comparison
//! operators shared by version selectors and attribute restrictions.

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Lt,
    Le,
    Eq,
    Gt,
    Ge,
}

impl CmpOp {
    pub const ALL: [CmpOp; 5] = [CmpOp::Le, CmpOp::Lt, CmpOp::Eq, CmpOp::Gt, CmpOp::Ge];

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Eq => "=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    /// Applies the operator to an already computed ordering of `lhs` vs `rhs`.
    pub fn holds(self, ord: Ordering) -> bool {
        match self {
            CmpOp::Lt => ord == Ordering::Less,
            CmpOp::Le => ord != Ordering::Greater,
            CmpOp::Eq => ord == Ordering::Equal,
            CmpOp::Gt => ord == Ordering::Greater,
            CmpOp::Ge => ord != Ordering::Less,
        }
    }
}

impl fmt::Display for CmpOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl ArithOp {
    pub fn symbol(self) -> char {
        match self {
            ArithOp::Add => '+',
            ArithOp::Sub => '-',
            ArithOp::Mul => '*',
            ArithOp::Div => '/',
        }
    }
}

/// An arithmetic expression over literals of type `T`. Parenthesized groups
/// are kept so that printing reproduces the source structure.
#[derive(Debug, Clone, PartialEq)]
pub enum Arith<T> {
    Lit(T),
    Group(Box<Arith<T>>),
    Binary(Box<Arith<T>>, ArithOp, Box<Arith<T>>),
}

pub type IntExpr = Arith<i64>;
pub type FloatExpr = Arith<f64>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("integer overflow")]
    Overflow,
    #[error("result is not a finite number")]
    NonFinite,
}

impl IntExpr {
    pub fn eval(&self) -> Result<i64, ArithError> {
        match self {
            Arith::Lit(v) => Ok(*v),
            Arith::Group(inner) => inner.eval(),
            Arith::Binary(l, op, r) => {
                let (l, r) = (l.eval()?, r.eval()?);
                match op {
                    ArithOp::Add => l.checked_add(r).ok_or(ArithError::Overflow),
                    ArithOp::Sub => l.checked_sub(r).ok_or(ArithError::Overflow),
                    ArithOp::Mul => l.checked_mul(r).ok_or(ArithError::Overflow),
                    ArithOp::Div if r == 0 => Err(ArithError::DivisionByZero),
                    ArithOp::Div => l.checked_div(r).ok_or(ArithError::Overflow),
                }
            }
        }
    }
}

impl FloatExpr {
    pub fn eval(&self) -> Result<f64, ArithError> {
        let v = match self {
            Arith::Lit(v) => *v,
            Arith::Group(inner) => inner.eval()?,
            Arith::Binary(l, op, r) => {
                let (l, r) = (l.eval()?, r.eval()?);
                match op {
                    ArithOp::Add => l + r,
                    ArithOp::Sub => l - r,
                    ArithOp::Mul => l * r,
                    ArithOp::Div if r == 0.0 => return Err(ArithError::DivisionByZero),
                    ArithOp::Div => l / r,
                }
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(ArithError::NonFinite)
        }
    }
}

/// Renders a float literal so that it lexes back as a float literal
/// (always with a decimal point, never in exponent notation).
pub fn float_literal(v: f64) -> String {
    let mut s = format!("{v}");
    if !s.contains('.') {
        s.push_str(".0");
    }
    s
}

pub trait LiteralDisplay {
    fn literal(&self) -> String;
}

impl LiteralDisplay for i64 {
    fn literal(&self) -> String {
        self.to_string()
    }
}

impl LiteralDisplay for f64 {
    fn literal(&self) -> String {
        float_literal(*self)
    }
}

impl<T: LiteralDisplay> fmt::Display for Arith<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Arith::Lit(v) => f.write_str(&v.literal()),
            Arith::Group(inner) => write!(f, "({inner})"),
            Arith::Binary(l, op, r) => write!(f, "{l} {} {r}", op.symbol()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bin<T>(l: Arith<T>, op: ArithOp, r: Arith<T>) -> Arith<T> {
        Arith::Binary(Box::new(l), op, Box::new(r))
    }

    #[test]
    fn int_arith() {
        let e = bin(Arith::Lit(2), ArithOp::Add, Arith::Lit(3));
        assert_eq!(e.eval(), Ok(5));
        let e = bin(Arith::Lit(7), ArithOp::Div, Arith::Lit(2));
        assert_eq!(e.eval(), Ok(3));
        let e = bin(Arith::Lit(1), ArithOp::Div, Arith::Lit(0));
        assert_eq!(e.eval(), Err(ArithError::DivisionByZero));
        let e = bin(Arith::Lit(i64::MAX), ArithOp::Add, Arith::Lit(1));
        assert_eq!(e.eval(), Err(ArithError::Overflow));
    }

    #[test]
    fn float_arith() {
        let e = bin(Arith::Lit(1.5), ArithOp::Mul, Arith::Lit(2.0));
        assert_eq!(e.eval(), Ok(3.0));
        let e = bin(Arith::Lit(1.0), ArithOp::Div, Arith::Lit(0.0));
        assert_eq!(e.eval(), Err(ArithError::DivisionByZero));
    }

    #[test]
    fn cmp_ops() {
        assert!(CmpOp::Le.holds(1.cmp(&1)));
        assert!(!CmpOp::Lt.holds(1.cmp(&1)));
        assert!(CmpOp::Ge.holds(2.cmp(&1)));
        assert!(!CmpOp::Eq.holds(2.cmp(&1)));
    }

    #[test]
    fn float_literal_keeps_point() {
        assert_eq!(float_literal(1.0), "1.0");
        assert_eq!(float_literal(0.25), "0.25");
        assert_eq!(float_literal(1e20), "100000000000000000000.0");
        assert_eq!(float_literal(-2.5), "-2.5");
    }
}
