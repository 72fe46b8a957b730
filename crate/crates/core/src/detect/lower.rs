//! Conversion between model expressions and e-graph terms.

use crate::egraph::{Op, Term};
use crate::model::{ConstraintDef, Expr, ProblemDef, Reduction, Sense, VarKind};
use crate::rewrite::recursive::*;

fn reduction(r: &Reduction, p: &ProblemDef) -> ReductionView<Term> {
    ReductionView {
        index: element(&r.index),
        domain: lower_expr(&r.domain, p),
        condition: lower_expr(&r.condition, p),
        operand: lower_expr(&r.operand, p),
    }
}

/// Lowers an expression. Decision variables carry their declared kind;
/// undeclared names default to continuous.
pub fn lower_expr(e: &Expr, p: &ProblemDef) -> Term {
    let l = |e: &Expr| lower_expr(e, p);
    let subs = |s: &[Expr]| list(s.iter().map(l).collect());
    match e {
        Expr::Num(v) => num(*v),
        Expr::Element(n) => element(n),
        Expr::Placeholder {
            name: n,
            subscripts,
        } => placeholder(name(n), subs(subscripts)),
        Expr::DecisionVar {
            name: n,
            subscripts,
        } => {
            let k = p.decision_var(n).map_or(VarKind::Continuous, |d| d.kind);
            decision_var(VarView {
                name: name(n),
                kind: kind(k),
                subscripts: subs(subscripts),
            })
        }
        Expr::Add(a, b) => add(l(a), l(b)),
        Expr::Mul(a, b) => mul(l(a), l(b)),
        Expr::Neg(a) => neg(l(a)),
        Expr::Recip(a) => recip(l(a)),
        Expr::Pow(a, b) => pow(l(a), l(b)),
        Expr::Sum(r) => sum(reduction(r, p)),
        Expr::Prod(r) => prod(reduction(r, p)),
        Expr::And(a, b) => and(l(a), l(b)),
        Expr::Or(a, b) => or(l(a), l(b)),
        Expr::Not(a) => not(l(a)),
        Expr::Min(a, b) => min(l(a), l(b)),
        Expr::Max(a, b) => max(l(a), l(b)),
        Expr::Lt(a, b) => lt(l(a), l(b)),
        Expr::Le(a, b) => le(l(a), l(b)),
        Expr::CmpEq(a, b) => cmp_eq(l(a), l(b)),
        Expr::NoCond => no_cond(),
    }
}

pub fn lower_forall(forall: &[(String, Expr)], p: &ProblemDef) -> Term {
    list(
        forall
            .iter()
            .map(|(e, d)| forall_bind(element(e), lower_expr(d, p)))
            .collect(),
    )
}

pub fn lower_constraint(c: &ConstraintDef, p: &ProblemDef) -> Term {
    let sense = match c.sense {
        Sense::Eq => Op::SenseEq,
        Sense::Le => Op::SenseLe,
        Sense::Ge => Op::SenseGe,
    };
    constraint(ConstraintView {
        sense: leaf(sense),
        left: lower_expr(&c.left, p),
        right: lower_expr(&c.right, p),
        forall_list: lower_forall(&c.forall, p),
    })
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("term `{0}` is not an expression")]
pub struct RaiseError(pub String);

fn symbol_of(t: &Term) -> Result<&'static str, RaiseError> {
    match t.op {
        Op::Name(s) | Op::Element(s) => Ok(s.as_str()),
        _ => Err(RaiseError(t.to_string())),
    }
}

fn raise_list(t: &Term) -> Result<Vec<Expr>, RaiseError> {
    if t.op != Op::List {
        return Err(RaiseError(t.to_string()));
    }
    t.children.iter().map(raise_term).collect()
}

/// Converts an extracted term back into an expression.
pub fn raise_term(t: &Term) -> Result<Expr, RaiseError> {
    let c = |k: usize| raise_term(&t.children[k]).map(Box::new);
    let bad = || RaiseError(t.to_string());
    Ok(match t.op {
        Op::Num(v) => Expr::Num(v.get()),
        Op::Element(s) => Expr::Element(s.as_str().to_owned()),
        Op::NoCond => Expr::NoCond,
        Op::Placeholder => Expr::Placeholder {
            name: symbol_of(&t.children[0])?.to_owned(),
            subscripts: raise_list(&t.children[1])?,
        },
        Op::DecisionVar => Expr::DecisionVar {
            name: symbol_of(&t.children[0])?.to_owned(),
            subscripts: raise_list(&t.children[2])?,
        },
        Op::Add => Expr::Add(c(0)?, c(1)?),
        Op::Mul => Expr::Mul(c(0)?, c(1)?),
        Op::Neg => Expr::Neg(c(0)?),
        Op::Recip => Expr::Recip(c(0)?),
        Op::Pow => Expr::Pow(c(0)?, c(1)?),
        Op::Sum | Op::Prod => {
            let index = match t.children[0].op {
                Op::Element(s) => s.as_str().to_owned(),
                _ => return Err(bad()),
            };
            let r = Box::new(Reduction {
                index,
                domain: *c(1)?,
                condition: *c(2)?,
                operand: *c(3)?,
            });
            if t.op == Op::Sum {
                Expr::Sum(r)
            } else {
                Expr::Prod(r)
            }
        }
        Op::And => Expr::And(c(0)?, c(1)?),
        Op::Or => Expr::Or(c(0)?, c(1)?),
        Op::Not => Expr::Not(c(0)?),
        Op::Min => Expr::Min(c(0)?, c(1)?),
        Op::Max => Expr::Max(c(0)?, c(1)?),
        Op::Lt => Expr::Lt(c(0)?, c(1)?),
        Op::Le => Expr::Le(c(0)?, c(1)?),
        Op::CmpEq => Expr::CmpEq(c(0)?, c(1)?),
        Op::Name(_)
        | Op::Kind(_)
        | Op::SenseEq
        | Op::SenseLe
        | Op::SenseGe
        | Op::Constraint
        | Op::ForallBind
        | Op::List => return Err(bad()),
    })
}

/// Splits an extracted forall list into `(element, domain)` pairs.
pub fn raise_forall(t: &Term) -> Result<Vec<(String, Expr)>, RaiseError> {
    if t.op != Op::List {
        return Err(RaiseError(t.to_string()));
    }
    t.children
        .iter()
        .map(|b| match (b.op, b.children.as_slice()) {
            (Op::ForallBind, [e, d]) => Ok((symbol_of(e)?.to_owned(), raise_term(d)?)),
            _ => Err(RaiseError(b.to_string())),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DecisionVarDecl, ObjectiveSense};

    #[test]
    fn round_trip() {
        let mut p = ProblemDef::new("t", ObjectiveSense::Minimize);
        p.decision_vars.push(DecisionVarDecl {
            name: "x".into(),
            kind: VarKind::Binary,
            shape: vec![Expr::placeholder("N", vec![])],
            lower: None,
            upper: None,
        });
        let e = Expr::sum(
            "i",
            Expr::placeholder("N", vec![]),
            Some(Expr::placeholder("a", vec![Expr::element("i")]).lt(Expr::num(50.0))),
            Expr::num(2.0) * Expr::var("x", vec![Expr::element("i")]) - Expr::num(1.0),
        );
        let t = lower_expr(&e, &p);
        assert_eq!(raise_term(&t).unwrap(), e);
        assert!(t.to_string().contains("(var @x binary (list i))"));
    }

    #[test]
    fn constraint_shape() {
        let p = ProblemDef::new("t", ObjectiveSense::Minimize);
        let c = ConstraintDef::new("c", Sense::Le, Expr::num(1.0), Expr::num(2.0))
            .forall("i", Expr::num(3.0));
        let t = lower_constraint(&c, &p);
        assert_eq!(t.to_string(), "(constraint :le 1 2 (list (forall i 3)))");
        assert_eq!(
            raise_forall(&t.children[3]).unwrap(),
            vec![("i".to_owned(), Expr::num(3.0))]
        );
        assert!(raise_term(&t).is_err());
    }
}
