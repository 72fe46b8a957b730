//! Typed tree builders shared by ground terms and patterns.
//!
//! Rules and detector patterns are written as ordinary Rust expressions
//! over any [`Recursive`] type, so they are checked at compile time instead
//! of being parsed from strings. Multi-child operators are built through
//! views with named fields; the views fix the child order.

use std::ops;

use crate::egraph::{Op, Term};
use crate::model::VarKind;

use super::pattern::PatTree;

/// A tree that can be folded out of operators and children, and unfolded
/// back (when it is not a pattern variable).
pub trait Recursive: Sized {
    fn node(op: Op, children: Vec<Self>) -> Self;
    fn as_node(&self) -> Option<(Op, &[Self])>;
}

impl Recursive for Term {
    fn node(op: Op, children: Vec<Term>) -> Term {
        Term::new(op, children)
    }

    fn as_node(&self) -> Option<(Op, &[Term])> {
        Some((self.op, &self.children))
    }
}

impl Recursive for PatTree {
    fn node(op: Op, children: Vec<PatTree>) -> PatTree {
        PatTree::Node(op, children)
    }

    fn as_node(&self) -> Option<(Op, &[PatTree])> {
        match self {
            PatTree::Node(op, cs) => Some((*op, cs)),
            PatTree::Var(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstraintView<T> {
    pub sense: T,
    pub left: T,
    pub right: T,
    pub forall_list: T,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionView<T> {
    pub index: T,
    pub domain: T,
    pub condition: T,
    pub operand: T,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarView<T> {
    pub name: T,
    pub kind: T,
    pub subscripts: T,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NodeView<T> {
    Constraint(ConstraintView<T>),
    Sum(ReductionView<T>),
    Prod(ReductionView<T>),
    DecisionVar(VarView<T>),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ViewError {
    #[error("`{0}` has no field view")]
    NoView(String),
    #[error("`{op}` expects {expected} children, got {got}")]
    Arity {
        op: String,
        expected: usize,
        got: usize,
    },
}

/// Flattens a view into its operator and children in fixed order.
pub fn view_to_children<T>(v: NodeView<T>) -> (Op, Vec<T>) {
    match v {
        NodeView::Constraint(c) => (
            Op::Constraint,
            vec![c.sense, c.left, c.right, c.forall_list],
        ),
        NodeView::Sum(r) => (Op::Sum, vec![r.index, r.domain, r.condition, r.operand]),
        NodeView::Prod(r) => (Op::Prod, vec![r.index, r.domain, r.condition, r.operand]),
        NodeView::DecisionVar(v) => (Op::DecisionVar, vec![v.name, v.kind, v.subscripts]),
    }
}

pub fn children_to_view<T>(op: Op, children: Vec<T>) -> Result<NodeView<T>, ViewError> {
    let expected = match op {
        Op::Constraint | Op::Sum | Op::Prod => 4,
        Op::DecisionVar => 3,
        _ => return Err(ViewError::NoView(op.to_string())),
    };
    if children.len() != expected {
        return Err(ViewError::Arity {
            op: op.to_string(),
            expected,
            got: children.len(),
        });
    }
    let mut it = children.into_iter();
    let mut next = || it.next().expect("length checked");
    Ok(match op {
        Op::Constraint => NodeView::Constraint(ConstraintView {
            sense: next(),
            left: next(),
            right: next(),
            forall_list: next(),
        }),
        Op::DecisionVar => NodeView::DecisionVar(VarView {
            name: next(),
            kind: next(),
            subscripts: next(),
        }),
        _ => {
            let r = ReductionView {
                index: next(),
                domain: next(),
                condition: next(),
                operand: next(),
            };
            if op == Op::Sum {
                NodeView::Sum(r)
            } else {
                NodeView::Prod(r)
            }
        }
    })
}

fn from_view<T: Recursive>(v: NodeView<T>) -> T {
    let (op, children) = view_to_children(v);
    T::node(op, children)
}

pub fn constraint<T: Recursive>(v: ConstraintView<T>) -> T {
    from_view(NodeView::Constraint(v))
}

pub fn sum<T: Recursive>(v: ReductionView<T>) -> T {
    from_view(NodeView::Sum(v))
}

pub fn prod<T: Recursive>(v: ReductionView<T>) -> T {
    from_view(NodeView::Prod(v))
}

pub fn decision_var<T: Recursive>(v: VarView<T>) -> T {
    from_view(NodeView::DecisionVar(v))
}

fn cons<T: Recursive>(sense: Op, left: T, right: T, forall_list: T) -> T {
    constraint(ConstraintView {
        sense: T::node(sense, vec![]),
        left,
        right,
        forall_list,
    })
}

pub fn eq_cons<T: Recursive>(left: T, right: T, forall_list: T) -> T {
    cons(Op::SenseEq, left, right, forall_list)
}

pub fn le_cons<T: Recursive>(left: T, right: T, forall_list: T) -> T {
    cons(Op::SenseLe, left, right, forall_list)
}

pub fn ge_cons<T: Recursive>(left: T, right: T, forall_list: T) -> T {
    cons(Op::SenseGe, left, right, forall_list)
}

pub fn leaf<T: Recursive>(op: Op) -> T {
    T::node(op, vec![])
}

pub fn num<T: Recursive>(v: f64) -> T {
    leaf(Op::num(v))
}

pub fn element<T: Recursive>(name: &str) -> T {
    leaf(Op::element(name))
}

pub fn name<T: Recursive>(name: &str) -> T {
    leaf(Op::name(name))
}

pub fn kind<T: Recursive>(k: VarKind) -> T {
    leaf(Op::Kind(k))
}

pub fn no_cond<T: Recursive>() -> T {
    leaf(Op::NoCond)
}

pub fn list<T: Recursive>(items: Vec<T>) -> T {
    T::node(Op::List, items)
}

pub fn placeholder<T: Recursive>(name: T, subscripts: T) -> T {
    T::node(Op::Placeholder, vec![name, subscripts])
}

pub fn forall_bind<T: Recursive>(element: T, domain: T) -> T {
    T::node(Op::ForallBind, vec![element, domain])
}

macro_rules! unary {
    ($($f:ident => $op:ident),*) => {$(
        pub fn $f<T: Recursive>(a: T) -> T {
            T::node(Op::$op, vec![a])
        }
    )*};
}

macro_rules! binary {
    ($($f:ident => $op:ident),*) => {$(
        pub fn $f<T: Recursive>(a: T, b: T) -> T {
            T::node(Op::$op, vec![a, b])
        }
    )*};
}

unary!(neg => Neg, recip => Recip, not => Not);
binary!(
    add => Add, mul => Mul, pow => Pow, and => And, or => Or, min => Min, max => Max,
    lt => Lt, le => Le, cmp_eq => CmpEq
);

macro_rules! overloads {
    ($t:ty) => {
        impl ops::Add for $t {
            type Output = $t;
            fn add(self, rhs: $t) -> $t {
                add(self, rhs)
            }
        }

        impl ops::Mul for $t {
            type Output = $t;
            fn mul(self, rhs: $t) -> $t {
                mul(self, rhs)
            }
        }

        impl ops::Neg for $t {
            type Output = $t;
            fn neg(self) -> $t {
                neg(self)
            }
        }

        /// `a - b` is `a + (-b)`.
        impl ops::Sub for $t {
            type Output = $t;
            fn sub(self, rhs: $t) -> $t {
                add(self, neg(rhs))
            }
        }
    };
}

overloads!(Term);
overloads!(PatTree);
