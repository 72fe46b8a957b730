//! Symbolic optimization problems.
//!
//! A problem is kept apart from its instance data: expressions mention
//! placeholders and decision variables by name, reductions carry their
//! index and domain symbolically, and nothing is expanded until data is
//! supplied. Subtraction and division exist only as JSON sugar; the core
//! tree has `Add`/`Neg` and `Mul`/`Recip` instead.

mod data;
pub(crate) mod eval;
mod json;
mod validate;

use std::fmt;
use std::ops;

pub use data::{parse_data, serialize_data, DataBindings, Tensor};
pub use eval::{eval_expr, Env, EvalError, Value};
pub use json::{
    expr_from_json, expr_to_json, parse_problem, problem_from_json, problem_to_json,
    serialize_problem,
};
pub use validate::{validate_problem, Diagnostic, Severity};

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error("{path}: non-finite number")]
    NonFinite { path: String },
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
}

impl ModelError {
    pub fn path(&self) -> Option<&str> {
        match self {
            ModelError::Json(_) => None,
            ModelError::Schema { path, .. }
            | ModelError::NonFinite { path }
            | ModelError::Invalid { path, .. } => Some(path),
        }
    }
}

/// Symbolic expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    /// A bound index variable.
    Element(String),
    Placeholder {
        name: String,
        subscripts: Vec<Expr>,
    },
    DecisionVar {
        name: String,
        subscripts: Vec<Expr>,
    },
    Add(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Recip(Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Sum(Box<Reduction>),
    Prod(Box<Reduction>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Not(Box<Expr>),
    Min(Box<Expr>, Box<Expr>),
    Max(Box<Expr>, Box<Expr>),
    Lt(Box<Expr>, Box<Expr>),
    Le(Box<Expr>, Box<Expr>),
    CmpEq(Box<Expr>, Box<Expr>),
    /// The "no filter" condition of a reduction.
    NoCond,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reduction {
    pub index: String,
    pub domain: Expr,
    /// `Expr::NoCond` when the reduction is unfiltered.
    pub condition: Expr,
    pub operand: Expr,
}

/// Maps `-0.0` to `0.0`; every other value is returned unchanged.
pub fn canonical_num(v: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        v
    }
}

impl Expr {
    pub fn num(v: f64) -> Expr {
        Expr::Num(canonical_num(v))
    }

    pub fn element(name: &str) -> Expr {
        Expr::Element(name.to_owned())
    }

    pub fn placeholder(name: &str, subscripts: Vec<Expr>) -> Expr {
        Expr::Placeholder {
            name: name.to_owned(),
            subscripts,
        }
    }

    pub fn var(name: &str, subscripts: Vec<Expr>) -> Expr {
        Expr::DecisionVar {
            name: name.to_owned(),
            subscripts,
        }
    }

    pub fn sum(index: &str, domain: Expr, condition: Option<Expr>, operand: Expr) -> Expr {
        Expr::Sum(Box::new(Reduction {
            index: index.to_owned(),
            domain,
            condition: condition.unwrap_or(Expr::NoCond),
            operand,
        }))
    }

    pub fn prod(index: &str, domain: Expr, condition: Option<Expr>, operand: Expr) -> Expr {
        Expr::Prod(Box::new(Reduction {
            index: index.to_owned(),
            domain,
            condition: condition.unwrap_or(Expr::NoCond),
            operand,
        }))
    }

    pub fn recip(self) -> Expr {
        Expr::Recip(Box::new(self))
    }

    pub fn pow(self, exponent: Expr) -> Expr {
        Expr::Pow(Box::new(self), Box::new(exponent))
    }

    pub fn min(self, other: Expr) -> Expr {
        Expr::Min(Box::new(self), Box::new(other))
    }

    pub fn max(self, other: Expr) -> Expr {
        Expr::Max(Box::new(self), Box::new(other))
    }

    pub fn lt(self, other: Expr) -> Expr {
        Expr::Lt(Box::new(self), Box::new(other))
    }

    pub fn le(self, other: Expr) -> Expr {
        Expr::Le(Box::new(self), Box::new(other))
    }

    pub fn cmp_eq(self, other: Expr) -> Expr {
        Expr::CmpEq(Box::new(self), Box::new(other))
    }

    pub fn and(self, other: Expr) -> Expr {
        Expr::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: Expr) -> Expr {
        Expr::Or(Box::new(self), Box::new(other))
    }

    /// Immediate sub-expressions, in field order.
    pub fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::Num(_) | Expr::Element(_) | Expr::NoCond => vec![],
            Expr::Placeholder { subscripts, .. } | Expr::DecisionVar { subscripts, .. } => {
                subscripts.iter().collect()
            }
            Expr::Neg(a) | Expr::Recip(a) | Expr::Not(a) => vec![a],
            Expr::Add(a, b)
            | Expr::Mul(a, b)
            | Expr::Pow(a, b)
            | Expr::And(a, b)
            | Expr::Or(a, b)
            | Expr::Min(a, b)
            | Expr::Max(a, b)
            | Expr::Lt(a, b)
            | Expr::Le(a, b)
            | Expr::CmpEq(a, b) => vec![a, b],
            Expr::Sum(r) | Expr::Prod(r) => vec![&r.domain, &r.condition, &r.operand],
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        1 + self.children().into_iter().map(Expr::size).sum::<usize>()
    }

    /// True if any decision variable occurs in the tree.
    pub fn mentions_decision_var(&self) -> bool {
        matches!(self, Expr::DecisionVar { .. })
            || self.children().into_iter().any(Expr::mentions_decision_var)
    }
}

impl ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::Add(Box::new(self), Box::new(rhs))
    }
}

impl ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::Mul(Box::new(self), Box::new(rhs))
    }
}

impl ops::Not for Expr {
    type Output = Expr;
    fn not(self) -> Expr {
        Expr::Not(Box::new(self))
    }
}

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}

/// Desugars to `self + (-rhs)`.
impl ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        self + (-rhs)
    }
}

/// Desugars to `self * rhs⁻¹`.
impl ops::Div for Expr {
    type Output = Expr;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Expr) -> Expr {
        self * rhs.recip()
    }
}

impl From<f64> for Expr {
    fn from(v: f64) -> Expr {
        Expr::num(v)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn subs(f: &mut fmt::Formatter<'_>, name: &str, s: &[Expr]) -> fmt::Result {
            f.write_str(name)?;
            if !s.is_empty() {
                f.write_str("[")?;
                for (k, e) in s.iter().enumerate() {
                    if k > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{e}")?;
                }
                f.write_str("]")?;
            }
            Ok(())
        }
        fn red(f: &mut fmt::Formatter<'_>, sym: &str, r: &Reduction) -> fmt::Result {
            write!(f, "{sym}({} < {}", r.index, r.domain)?;
            if r.condition != Expr::NoCond {
                write!(f, " | {}", r.condition)?;
            }
            write!(f, ", {})", r.operand)
        }
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Element(n) => f.write_str(n),
            Expr::Placeholder { name, subscripts } => subs(f, name, subscripts),
            Expr::DecisionVar { name, subscripts } => subs(f, name, subscripts),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Neg(a) => write!(f, "-{a}"),
            Expr::Recip(a) => write!(f, "{a}^-1"),
            Expr::Pow(a, b) => write!(f, "({a} ^ {b})"),
            Expr::Sum(r) => red(f, "sum", r),
            Expr::Prod(r) => red(f, "prod", r),
            Expr::And(a, b) => write!(f, "({a} && {b})"),
            Expr::Or(a, b) => write!(f, "({a} || {b})"),
            Expr::Not(a) => write!(f, "!{a}"),
            Expr::Min(a, b) => write!(f, "min({a}, {b})"),
            Expr::Max(a, b) => write!(f, "max({a}, {b})"),
            Expr::Lt(a, b) => write!(f, "({a} < {b})"),
            Expr::Le(a, b) => write!(f, "({a} <= {b})"),
            Expr::CmpEq(a, b) => write!(f, "({a} == {b})"),
            Expr::NoCond => f.write_str("_"),
        }
    }
}

/// Comparison kind of a constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sense {
    Eq,
    Le,
    Ge,
}

impl Sense {
    /// The sense obtained by swapping the two sides.
    pub fn mirror(self) -> Sense {
        match self {
            Sense::Eq => Sense::Eq,
            Sense::Le => Sense::Ge,
            Sense::Ge => Sense::Le,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Sense::Eq => "eq",
            Sense::Le => "le",
            Sense::Ge => "ge",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintDef {
    pub name: String,
    pub sense: Sense,
    pub left: Expr,
    pub right: Expr,
    /// `(element, domain)` pairs, outermost first.
    pub forall: Vec<(String, Expr)>,
}

impl ConstraintDef {
    pub fn new(name: &str, sense: Sense, left: Expr, right: Expr) -> Self {
        ConstraintDef {
            name: name.to_owned(),
            sense,
            left,
            right,
            forall: Vec::new(),
        }
    }

    pub fn forall(mut self, element: &str, domain: Expr) -> Self {
        self.forall.push((element.to_owned(), domain));
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ObjectiveSense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DType {
    Integer,
    Float,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarKind {
    Binary,
    Integer,
    Continuous,
}

impl VarKind {
    pub fn as_str(self) -> &'static str {
        match self {
            VarKind::Binary => "binary",
            VarKind::Integer => "integer",
            VarKind::Continuous => "continuous",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlaceholderDecl {
    pub name: String,
    pub ndim: usize,
    pub dtype: Option<DType>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionVarDecl {
    pub name: String,
    pub kind: VarKind,
    pub shape: Vec<Expr>,
    pub lower: Option<Expr>,
    pub upper: Option<Expr>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElementDecl {
    pub name: String,
    pub belong_to: Expr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemDef {
    pub name: String,
    pub sense: ObjectiveSense,
    pub placeholders: Vec<PlaceholderDecl>,
    pub decision_vars: Vec<DecisionVarDecl>,
    pub elements: Vec<ElementDecl>,
    pub objective: Expr,
    pub constraints: Vec<ConstraintDef>,
}

impl ProblemDef {
    pub fn new(name: &str, sense: ObjectiveSense) -> Self {
        ProblemDef {
            name: name.to_owned(),
            sense,
            placeholders: Vec::new(),
            decision_vars: Vec::new(),
            elements: Vec::new(),
            objective: Expr::num(0.0),
            constraints: Vec::new(),
        }
    }

    pub fn placeholder(&self, name: &str) -> Option<&PlaceholderDecl> {
        self.placeholders.iter().find(|p| p.name == name)
    }

    pub fn decision_var(&self, name: &str) -> Option<&DecisionVarDecl> {
        self.decision_vars.iter().find(|v| v.name == name)
    }

    pub fn element(&self, name: &str) -> Option<&ElementDecl> {
        self.elements.iter().find(|e| e.name == name)
    }

    pub fn constraint(&self, name: &str) -> Option<&ConstraintDef> {
        self.constraints.iter().find(|c| c.name == name)
    }
}
