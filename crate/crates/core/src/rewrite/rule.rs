use std::fmt;

use serde::Serialize;

use super::pattern::{compile_pattern, search, PatTree, Pattern, PatternError, Subst, Var};
use crate::egraph::{EGraph, EGraphError, ENode, Id, TypeHint};

/// Side condition, checked against class analysis data only.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Condition {
    IsOfType(Var, TypeHint),
    IsConst(Var),
    IsNonZeroConst(Var),
    IsPositiveConst(Var),
    /// Known constant with an integral value.
    IsIntegerConst(Var),
    /// Not known to be the constant 0 (an unknown value passes).
    NotKnownZero(Var),
}

impl Condition {
    pub fn var(self) -> Var {
        match self {
            Condition::IsOfType(v, _)
            | Condition::IsConst(v)
            | Condition::IsNonZeroConst(v)
            | Condition::IsPositiveConst(v)
            | Condition::IsIntegerConst(v)
            | Condition::NotKnownZero(v) => v,
        }
    }

    pub fn holds(self, g: &EGraph, s: &Subst) -> bool {
        let Some(id) = s.get(self.var()) else {
            return false;
        };
        let data = g.data(id);
        match self {
            Condition::IsOfType(_, hint) => data.type_hint == hint,
            Condition::IsConst(_) => data.const_val.is_some(),
            Condition::IsNonZeroConst(_) => data.const_val.is_some_and(|c| c != 0.0),
            Condition::IsPositiveConst(_) => data.const_val.is_some_and(|c| c > 0.0),
            Condition::IsIntegerConst(_) => data.const_val.is_some_and(|c| c.fract() == 0.0),
            Condition::NotKnownZero(_) => data.const_val != Some(0.0),
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Condition::IsOfType(v, h) => write!(f, "is_of_type({v}, {h:?})"),
            Condition::IsConst(v) => write!(f, "is_const({v})"),
            Condition::IsNonZeroConst(v) => write!(f, "is_nonzero_const({v})"),
            Condition::IsPositiveConst(v) => write!(f, "is_positive_const({v})"),
            Condition::IsIntegerConst(v) => write!(f, "is_integer_const({v})"),
            Condition::NotKnownZero(v) => write!(f, "not_known_zero({v})"),
        }
    }
}

/// A conditional rewrite `searcher => applier`.
#[derive(Clone, Debug)]
pub struct Rewrite {
    pub name: String,
    pub searcher: Pattern,
    pub applier: Pattern,
    pub conditions: Vec<Condition>,
    /// Grows the graph on most matches; banned sooner by the scheduler.
    pub expansive: bool,
    applier_tree: PatTree,
}

impl Rewrite {
    pub fn new(name: &str, lhs: PatTree, rhs: PatTree) -> Result<Rewrite, PatternError> {
        let bound = lhs.vars();
        if let Some(v) = rhs.vars().into_iter().find(|v| !bound.contains(v)) {
            return Err(PatternError::UnboundVar(v));
        }
        Ok(Rewrite {
            name: name.to_owned(),
            searcher: compile_pattern(&lhs)?,
            applier: compile_pattern(&rhs)?,
            conditions: Vec::new(),
            expansive: false,
            applier_tree: rhs,
        })
    }

    pub fn when(mut self, c: Condition) -> Self {
        self.conditions.push(c);
        self
    }

    pub fn expansive(mut self) -> Self {
        self.expansive = true;
        self
    }

    /// Matches whose conditions hold.
    pub fn search(&self, g: &EGraph) -> Vec<(Id, Subst)> {
        let mut m = search(g, &self.searcher);
        m.retain(|(_, s)| self.conditions.iter().all(|c| c.holds(g, s)));
        m
    }

    pub fn listing(&self) -> RuleListing {
        RuleListing {
            name: self.name.clone(),
            searcher: self.searcher.tree().to_string(),
            applier: self.applier_tree.to_string(),
            conditions: self.conditions.iter().map(|c| c.to_string()).collect(),
        }
    }
}

impl fmt::Display for Rewrite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} => {}",
            self.name,
            self.searcher.tree(),
            self.applier_tree
        )?;
        for (k, c) in self.conditions.iter().enumerate() {
            f.write_str(if k == 0 { " if " } else { ", " })?;
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct RuleListing {
    pub name: String,
    pub searcher: String,
    pub applier: String,
    pub conditions: Vec<String>,
}

/// Adds `t` under `s` and returns its class.
pub fn instantiate(g: &mut EGraph, t: &PatTree, s: &Subst) -> Id {
    match t {
        PatTree::Var(v) => s[*v],
        PatTree::Node(op, cs) => {
            let children: Vec<Id> = cs.iter().map(|c| instantiate(g, c, s)).collect();
            g.add(ENode::new(*op, children))
        }
    }
}

/// Instantiates the applier for one match and merges it into the match
/// root. Returns whether a non-trivial union happened.
pub fn apply_rule(g: &mut EGraph, r: &Rewrite, m: &(Id, Subst)) -> Result<bool, EGraphError> {
    let id = instantiate(g, &r.applier_tree, &m.1);
    g.union(m.0, id)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::egraph::{Op, Term};

    fn add(a: PatTree, b: PatTree) -> PatTree {
        PatTree::Node(Op::Add, vec![a, b])
    }

    #[test]
    fn add_zero_merges() {
        let rule = Rewrite::new(
            "add-zero",
            add(PatTree::var("a"), PatTree::Node(Op::num(0.0), vec![])),
            PatTree::var("a"),
        )
        .unwrap();
        let mut g = EGraph::new();
        let x = Term::leaf(Op::element("x"));
        let root = g.add_term(&Term::new(
            Op::Add,
            vec![x.clone(), Term::leaf(Op::num(0.0))],
        ));
        g.rebuild().unwrap();
        let matches = rule.search(&g);
        assert_eq!(matches.len(), 1);
        assert!(apply_rule(&mut g, &rule, &matches[0]).unwrap());
        g.rebuild().unwrap();
        assert_eq!(g.find(root), g.lookup_term(&x).unwrap());
    }

    #[test]
    fn rhs_vars_must_be_bound() {
        assert!(matches!(
            Rewrite::new("bad", PatTree::var("a"), PatTree::var("b")),
            Err(PatternError::UnboundVar(_))
        ));
    }

    #[test]
    fn type_guard_blocks_boolean() {
        let rule = Rewrite::new(
            "add-zero-rev",
            PatTree::var("a"),
            add(PatTree::var("a"), PatTree::Node(Op::num(0.0), vec![])),
        )
        .unwrap()
        .when(Condition::IsOfType(Var::new("a"), TypeHint::Scalar));
        let mut g = EGraph::new();
        let one = Term::leaf(Op::num(1.0));
        g.add_term(&Term::new(Op::Lt, vec![one.clone(), one]));
        g.rebuild().unwrap();
        let m = rule.search(&g);
        // only the scalar literal qualifies, never the comparison
        assert_eq!(m.len(), 1);
        assert_eq!(g.data(m[0].0).type_hint, TypeHint::Scalar);
    }
}
