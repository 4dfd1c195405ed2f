//! Rate-function expressions: a small arithmetic language over the trait
//! variables `x` and `y` with exact forward-mode derivatives.
//!
//! The grammar (see [`parse`]) covers `+ - * / ^`, unary minus, the functions
//! `exp log sin cos sqrt`, decimal literals (with optional exponent part) and
//! the named constants `pi` and `e`. Trees are immutable after parsing and can
//! be evaluated concurrently. All arithmetic is IEEE binary64; any NaN or
//! infinity surfaces as a [`EvalError::Domain`] instead of propagating
//! silently.

mod dual;
mod parse;

pub use dual::Dual;
pub use parse::parse;

use std::fmt;
use thiserror::Error;

/// one of the two trait variables an expression may reference
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    X,
    Y,
}

impl Var {
    pub fn name(self) -> &'static str {
        match self {
            Var::X => "x",
            Var::Y => "y",
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryFn {
    Neg,
    Exp,
    Log,
    Sin,
    Cos,
    Sqrt,
}

impl UnaryFn {
    fn name(self) -> &'static str {
        match self {
            UnaryFn::Neg => "-",
            UnaryFn::Exp => "exp",
            UnaryFn::Log => "log",
            UnaryFn::Sin => "sin",
            UnaryFn::Cos => "cos",
            UnaryFn::Sqrt => "sqrt",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
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

/// Parsed expression tree. Finite and acyclic by construction; variables are
/// restricted to `x` and `y` at parse time.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Variable(Var),
    Unary(UnaryFn, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ParseError {
    #[error("syntax error at offset {offset}: expected {expected}")]
    Syntax { offset: usize, expected: String },
    #[error("unknown function `{name}` at offset {offset}")]
    UnknownFunction { offset: usize, name: String },
    #[error("unknown variable `{name}` at offset {offset} (only x and y are allowed)")]
    UnknownVariable { offset: usize, name: String },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. }
            | ParseError::UnknownFunction { offset, .. }
            | ParseError::UnknownVariable { offset, .. } => *offset,
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    Unbound(Var),
    #[error("domain error: {0}")]
    Domain(String),
}

fn finite(v: f64, op: &str) -> Result<f64, EvalError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::Domain(format!(
            "non-finite result {v} from `{op}`"
        )))
    }
}

impl Expr {
    /// Evaluate at `x` (and `y` when the expression uses it).
    pub fn eval(&self, x: f64, y: Option<f64>) -> Result<f64, EvalError> {
        let v = match self {
            Expr::Const(c) => *c,
            Expr::Variable(Var::X) => x,
            Expr::Variable(Var::Y) => y.ok_or(EvalError::Unbound(Var::Y))?,
            Expr::Unary(f, a) => {
                let a = a.eval(x, y)?;
                match f {
                    UnaryFn::Neg => -a,
                    UnaryFn::Exp => a.exp(),
                    UnaryFn::Log => {
                        if a <= 0.0 {
                            return Err(EvalError::Domain(format!(
                                "log of non-positive value {a}"
                            )));
                        }
                        a.ln()
                    }
                    UnaryFn::Sin => a.sin(),
                    UnaryFn::Cos => a.cos(),
                    UnaryFn::Sqrt => {
                        if a < 0.0 {
                            return Err(EvalError::Domain(format!("sqrt of negative value {a}")));
                        }
                        a.sqrt()
                    }
                }
            }
            Expr::Binary(op, l, r) => {
                let l = l.eval(x, y)?;
                let r = r.eval(x, y)?;
                match op {
                    BinOp::Add => l + r,
                    BinOp::Sub => l - r,
                    BinOp::Mul => l * r,
                    BinOp::Div => {
                        if r == 0.0 {
                            return Err(EvalError::Domain("division by zero".into()));
                        }
                        l / r
                    }
                    BinOp::Pow => l.powf(r),
                }
            }
        };
        finite(v, self.op_name())
    }

    /// Evaluate together with the exact derivative with respect to `seed`.
    ///
    /// Returns `(value, d value / d seed)`. The value component always equals
    /// [`Expr::eval`] at the same point.
    pub fn eval_d(&self, x: f64, y: Option<f64>, seed: Var) -> Result<(f64, f64), EvalError> {
        let d = self.eval_dual(x, y, seed)?;
        let v = finite(d.value, self.op_name())?;
        let dv = finite(d.deriv, self.op_name())?;
        Ok((v, dv))
    }

    fn eval_dual(&self, x: f64, y: Option<f64>, seed: Var) -> Result<Dual, EvalError> {
        Ok(match self {
            Expr::Const(c) => Dual::constant(*c),
            Expr::Variable(v) => {
                let value = match v {
                    Var::X => x,
                    Var::Y => y.ok_or(EvalError::Unbound(Var::Y))?,
                };
                if *v == seed {
                    Dual::seeded(value)
                } else {
                    Dual::constant(value)
                }
            }
            Expr::Unary(f, a) => {
                let a = a.eval_dual(x, y, seed)?;
                match f {
                    UnaryFn::Neg => a.neg(),
                    UnaryFn::Exp => a.exp(),
                    UnaryFn::Log => a.ln()?,
                    UnaryFn::Sin => a.sin(),
                    UnaryFn::Cos => a.cos(),
                    UnaryFn::Sqrt => a.sqrt()?,
                }
            }
            Expr::Binary(op, l, r) => {
                let l = l.eval_dual(x, y, seed)?;
                let r = r.eval_dual(x, y, seed)?;
                match op {
                    BinOp::Add => l.add(r),
                    BinOp::Sub => l.sub(r),
                    BinOp::Mul => l.mul(r),
                    BinOp::Div => l.div(r)?,
                    BinOp::Pow => l.pow(r)?,
                }
            }
        })
    }

    /// Whether the tree references the second variable `y`.
    pub fn uses_y(&self) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Variable(v) => *v == Var::Y,
            Expr::Unary(_, a) => a.uses_y(),
            Expr::Binary(_, l, r) => l.uses_y() || r.uses_y(),
        }
    }

    fn op_name(&self) -> &'static str {
        match self {
            Expr::Const(_) => "constant",
            Expr::Variable(_) => "variable",
            Expr::Unary(f, _) => f.name(),
            Expr::Binary(op, _, _) => match op {
                BinOp::Add => "+",
                BinOp::Sub => "-",
                BinOp::Mul => "*",
                BinOp::Div => "/",
                BinOp::Pow => "^",
            },
        }
    }

    // precedence levels used by the printer; pow binds tighter than unary minus
    fn precedence(&self) -> u8 {
        match self {
            Expr::Const(c) if *c < 0.0 => 3,
            Expr::Const(_) | Expr::Variable(_) => 5,
            Expr::Unary(UnaryFn::Neg, _) => 3,
            Expr::Unary(_, _) => 5,
            Expr::Binary(BinOp::Pow, _, _) => 4,
            Expr::Binary(BinOp::Mul | BinOp::Div, _, _) => 2,
            Expr::Binary(BinOp::Add | BinOp::Sub, _, _) => 1,
        }
    }
}

/// Prints a form that [`parse`] reads back to an equivalent tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn child(
            f: &mut fmt::Formatter<'_>,
            e: &Expr,
            min_prec: u8,
        ) -> fmt::Result {
            if e.precedence() < min_prec {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        }
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Variable(v) => write!(f, "{v}"),
            Expr::Unary(UnaryFn::Neg, a) => {
                f.write_str("-")?;
                child(f, a, 3)
            }
            Expr::Unary(func, a) => write!(f, "{}({a})", func.name()),
            Expr::Binary(op, l, r) => {
                match op {
                    BinOp::Add => {
                        child(f, l, 1)?;
                        f.write_str("+")?;
                        child(f, r, 2)
                    }
                    BinOp::Sub => {
                        child(f, l, 1)?;
                        f.write_str("-")?;
                        // right operand needs strictly higher precedence: a-(b+c)
                        child(f, r, 2)
                    }
                    BinOp::Mul => {
                        child(f, l, 2)?;
                        f.write_str("*")?;
                        child(f, r, 3)
                    }
                    BinOp::Div => {
                        child(f, l, 2)?;
                        f.write_str("/")?;
                        child(f, r, 3)
                    }
                    BinOp::Pow => {
                        // left operand of ^ must be an atom; -x^2 parses as -(x^2)
                        child(f, l, 5)?;
                        f.write_str("^")?;
                        child(f, r, 4)
                    }
                }
            }
        }
    }
}

impl std::str::FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}
