use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use smallvec::SmallVec;

use crate::model::{canonical_num, VarKind};
use crate::symbol::Symbol;

/// E-class identifier.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct Id(pub(crate) u32);

impl Id {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for Id {
    fn from(n: usize) -> Id {
        Id(n as u32)
    }
}

impl fmt::Display for Id {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A finite real used as an e-node payload.
///
/// Hashing and equality use the bit pattern (after mapping `-0.0` to
/// `0.0`); ordering uses `total_cmp`.
#[derive(Clone, Copy, Debug)]
pub struct Float(f64);

impl Float {
    pub fn new(v: f64) -> Float {
        debug_assert!(v.is_finite(), "e-graph numbers must be finite");
        Float(canonical_num(v))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl PartialEq for Float {
    fn eq(&self, other: &Float) -> bool {
        self.0.to_bits() == other.0.to_bits()
    }
}

impl Eq for Float {}

impl Hash for Float {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.to_bits().hash(state)
    }
}

impl PartialOrd for Float {
    fn partial_cmp(&self, other: &Float) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Float {
    fn cmp(&self, other: &Float) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Operator of an e-node. The derived ordering is the fixed operator order
/// used to break ties during extraction.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Op {
    Num(Float),
    /// Bound index variable.
    Element(Symbol),
    /// Name of a placeholder or decision variable.
    Name(Symbol),
    /// Declared kind of a decision variable.
    Kind(VarKind),
    NoCond,
    SenseEq,
    SenseLe,
    SenseGe,
    /// `[name, subscripts]`
    Placeholder,
    /// `[name, kind, subscripts]`
    DecisionVar,
    Add,
    Mul,
    Neg,
    Recip,
    Pow,
    /// `[index, domain, condition, operand]`
    Sum,
    Prod,
    And,
    Or,
    Not,
    Min,
    Max,
    Lt,
    Le,
    CmpEq,
    /// `[sense, left, right, forall_list]`
    Constraint,
    /// `[element, domain]`
    ForallBind,
    /// Variadic.
    List,
}

impl Op {
    pub fn num(v: f64) -> Op {
        Op::Num(Float::new(v))
    }

    pub fn element(name: &str) -> Op {
        Op::Element(Symbol::new(name))
    }

    pub fn name(name: &str) -> Op {
        Op::Name(Symbol::new(name))
    }

    /// Fixed arity, or `None` for the variadic `List`.
    pub fn arity(self) -> Option<usize> {
        use Op::*;
        Some(match self {
            Num(_) | Element(_) | Name(_) | Kind(_) | NoCond | SenseEq | SenseLe | SenseGe => 0,
            Neg | Recip | Not => 1,
            Placeholder | ForallBind | Add | Mul | Pow | And | Or | Min | Max | Lt | Le | CmpEq => {
                2
            }
            DecisionVar => 3,
            Sum | Prod | Constraint => 4,
            List => return None,
        })
    }

    pub fn accepts_arity(self, n: usize) -> bool {
        self.arity().is_none_or(|a| a == n)
    }

    pub fn as_num(self) -> Option<f64> {
        match self {
            Op::Num(v) => Some(v.get()),
            _ => None,
        }
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Op::*;
        match self {
            Num(v) => return write!(f, "{}", v.get()),
            Element(s) => return write!(f, "{s}"),
            Name(s) => return write!(f, "@{s}"),
            Kind(k) => return f.write_str(k.as_str()),
            _ => {}
        }
        f.write_str(match self {
            NoCond => "_",
            SenseEq => ":eq",
            SenseLe => ":le",
            SenseGe => ":ge",
            Placeholder => "ph",
            DecisionVar => "var",
            Add => "+",
            Mul => "*",
            Neg => "neg",
            Recip => "recip",
            Pow => "pow",
            Sum => "sum",
            Prod => "prod",
            And => "and",
            Or => "or",
            Not => "not",
            Min => "min",
            Max => "max",
            Lt => "<",
            Le => "<=",
            CmpEq => "==",
            Constraint => "constraint",
            ForallBind => "forall",
            List => "list",
            Num(_) | Element(_) | Name(_) | Kind(_) => unreachable!(),
        })
    }
}

/// An operator applied to e-class children.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct ENode {
    pub op: Op,
    pub children: SmallVec<[Id; 4]>,
}

impl ENode {
    pub fn new(op: Op, children: impl IntoIterator<Item = Id>) -> ENode {
        ENode {
            op,
            children: children.into_iter().collect(),
        }
    }

    pub fn leaf(op: Op) -> ENode {
        ENode {
            op,
            children: SmallVec::new(),
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

impl fmt::Display for ENode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.children.is_empty() && self.op != Op::List {
            return write!(f, "{}", self.op);
        }
        write!(f, "({}", self.op)?;
        for c in &self.children {
            write!(f, " #{c}")?;
        }
        f.write_str(")")
    }
}

/// A ground term over e-node operators.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Term {
    pub op: Op,
    pub children: Vec<Term>,
}

impl Term {
    pub fn new(op: Op, children: Vec<Term>) -> Term {
        Term { op, children }
    }

    pub fn leaf(op: Op) -> Term {
        Term {
            op,
            children: Vec::new(),
        }
    }

    pub fn size(&self) -> usize {
        1 + self.children.iter().map(Term::size).sum::<usize>()
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.children.is_empty() && self.op != Op::List {
            return write!(f, "{}", self.op);
        }
        write!(f, "({}", self.op)?;
        for c in &self.children {
            write!(f, " {c}")?;
        }
        f.write_str(")")
    }
}
