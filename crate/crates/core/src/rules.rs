//! The rewrite-rule catalog.
//!
//! Reversible rules come in `name` / `name-rev` pairs. Reverses that would
//! be unsound or type-breaking on arbitrary classes carry a guard.

use std::fmt;

use crate::egraph::TypeHint;
use crate::rewrite::recursive::*;
use crate::rewrite::{Condition, PatTree, Rewrite, RuleListing, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Group {
    Constraint,
    Arith,
    Reduction,
    Boolean,
    Lattice,
    /// Logically redundant rules kept for speed.
    Shortcuts,
}

impl Group {
    pub const ALL: [Group; 6] = [
        Group::Constraint,
        Group::Arith,
        Group::Reduction,
        Group::Boolean,
        Group::Lattice,
        Group::Shortcuts,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Group::Constraint => "constraint",
            Group::Arith => "arith",
            Group::Reduction => "reduction",
            Group::Boolean => "boolean",
            Group::Lattice => "lattice",
            Group::Shortcuts => "shortcuts",
        }
    }

    pub fn parse(s: &str) -> Option<Group> {
        Group::ALL.into_iter().find(|g| g.as_str() == s)
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub group: Group,
    pub rule: Rewrite,
}

#[derive(Clone, Debug)]
pub struct RuleCatalog {
    pub entries: Vec<CatalogEntry>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RuleError {
    #[error("unknown rule or group `{0}`")]
    Unknown(String),
    #[error("empty rule selection")]
    Empty,
}

impl RuleCatalog {
    pub fn rules(&self) -> Vec<Rewrite> {
        self.entries.iter().map(|e| e.rule.clone()).collect()
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.rule.name.as_str()).collect()
    }

    pub fn get(&self, name: &str) -> Option<&Rewrite> {
        self.entries
            .iter()
            .find(|e| e.rule.name == name)
            .map(|e| &e.rule)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn listing(&self) -> Vec<(Group, RuleListing)> {
        self.entries
            .iter()
            .map(|e| (e.group, e.rule.listing()))
            .collect()
    }

    fn matches(&self, token: &str) -> Option<Vec<bool>> {
        if token == "all" || token == "default" {
            return Some(vec![true; self.len()]);
        }
        if let Some(g) = Group::parse(token) {
            return Some(self.entries.iter().map(|e| e.group == g).collect());
        }
        self.get(token)?;
        Some(self.entries.iter().map(|e| e.rule.name == token).collect())
    }
}

/// Selects rules by a comma-separated list of group or rule names.
/// `no-<name>` removes a group or rule; when only removals are given they
/// apply to the whole catalog. Catalog order is preserved.
pub fn rule_subset(catalog: &RuleCatalog, selection: &str) -> Result<RuleCatalog, RuleError> {
    let tokens: Vec<&str> = selection
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .collect();
    let has_positive = tokens.iter().any(|t| !t.starts_with("no-"));
    let mut keep = vec![!has_positive; catalog.len()];
    for t in &tokens {
        let (negate, name) = match t.strip_prefix("no-") {
            Some(rest) => (true, rest),
            None => (false, *t),
        };
        let hit = catalog
            .matches(name)
            .ok_or_else(|| RuleError::Unknown((*t).to_owned()))?;
        if !negate {
            for (k, h) in keep.iter_mut().zip(&hit) {
                *k |= *h;
            }
        }
    }
    for t in tokens.iter().filter_map(|t| t.strip_prefix("no-")) {
        let hit = catalog.matches(t).expect("checked above");
        for (k, h) in keep.iter_mut().zip(&hit) {
            *k &= !*h;
        }
    }
    if tokens.is_empty() {
        return Err(RuleError::Empty);
    }
    Ok(RuleCatalog {
        entries: catalog
            .entries
            .iter()
            .zip(keep)
            .filter(|(_, k)| *k)
            .map(|(e, _)| e.clone())
            .collect(),
    })
}

fn v(name: &str) -> PatTree {
    PatTree::var(name)
}

fn n(x: f64) -> PatTree {
    num(x)
}

fn reduction(operand: PatTree) -> ReductionView<PatTree> {
    ReductionView {
        index: v("i"),
        domain: v("d"),
        condition: v("k"),
        operand,
    }
}

fn sense_cons(left: PatTree, right: PatTree) -> PatTree {
    constraint(ConstraintView {
        sense: v("p"),
        left,
        right,
        forall_list: v("f"),
    })
}

struct Builder {
    group: Group,
    entries: Vec<CatalogEntry>,
}

impl Builder {
    fn rule(&mut self, name: &str, lhs: PatTree, rhs: PatTree) -> &mut CatalogEntry {
        let rule = Rewrite::new(name, lhs, rhs).expect("catalog rules are well-formed");
        self.entries.push(CatalogEntry {
            group: self.group,
            rule,
        });
        self.entries.last_mut().expect("just pushed")
    }

    fn both(&mut self, name: &str, lhs: PatTree, rhs: PatTree) {
        self.rule(name, lhs.clone(), rhs.clone());
        self.rule(&format!("{name}-rev"), rhs, lhs);
    }
}

impl CatalogEntry {
    fn when(&mut self, c: Condition) -> &mut Self {
        self.rule.conditions.push(c);
        self
    }

    fn expansive(&mut self) -> &mut Self {
        self.rule.expansive = true;
        self
    }
}

fn var(name: &str) -> Var {
    Var::new(name)
}

/// The full catalog in a fixed order.
pub fn default_rules() -> RuleCatalog {
    use Condition::*;
    let mut b = Builder {
        group: Group::Constraint,
        entries: Vec::new(),
    };
    let (a, bb, c, f) = (|| v("a"), || v("b"), || v("c"), || v("f"));

    b.rule("eq-symm", eq_cons(a(), bb(), f()), eq_cons(bb(), a(), f()));
    b.rule("le-ge", le_cons(a(), bb(), f()), ge_cons(bb(), a(), f()));
    b.rule("ge-le", ge_cons(a(), bb(), f()), le_cons(bb(), a(), f()));
    b.rule(
        "trans",
        sense_cons(a() + bb(), c()),
        sense_cons(a(), c() - bb()),
    );
    b.rule(
        "add-cancel",
        sense_cons(a() + c(), bb() + c()),
        sense_cons(a(), bb()),
    );
    b.rule(
        "mul-cancel",
        eq_cons(a() * c(), bb() * c(), f()),
        eq_cons(a(), bb(), f()),
    )
    .when(IsNonZeroConst(var("c")));
    b.rule(
        "mul-div",
        eq_cons(a() * c(), bb(), f()),
        eq_cons(a(), bb() * recip(c()), f()),
    )
    .when(IsNonZeroConst(var("c")));
    b.rule(
        "mul-div-le",
        le_cons(a() * c(), bb(), f()),
        le_cons(a(), bb() * recip(c()), f()),
    )
    .when(IsPositiveConst(var("c")));
    b.rule(
        "le-mul-div",
        le_cons(a(), bb() * c(), f()),
        le_cons(a() * recip(c()), bb(), f()),
    )
    .when(IsPositiveConst(var("c")));

    b.group = Group::Arith;
    b.rule("add-comm", a() + bb(), bb() + a());
    b.both("add-assoc", a() + (bb() + c()), (a() + bb()) + c());
    b.rule("mul-comm", a() * bb(), bb() * a());
    b.both("mul-assoc", a() * (bb() * c()), (a() * bb()) * c());
    b.rule("add-zero", a() + n(0.0), a());
    b.rule("zero-add", n(0.0) + a(), a());
    b.rule("add-zero-rev", a(), a() + n(0.0))
        .when(IsOfType(var("a"), TypeHint::Scalar))
        .expansive();
    b.rule("mul-one", a() * n(1.0), a());
    b.rule("one-mul", n(1.0) * a(), a());
    b.rule("mul-one-rev", a(), n(1.0) * a())
        .when(IsOfType(var("a"), TypeHint::Scalar))
        .expansive();
    b.both("negone-mul", n(-1.0) * a(), -a());
    b.both("mul-negone", a() * n(-1.0), -a());
    b.rule("mul-zero", a() * n(0.0), n(0.0));
    b.rule("zero-mul", n(0.0) * a(), n(0.0));
    b.rule("distr-r", (a() + bb()) * c(), a() * c() + bb() * c())
        .when(NotKnownZero(var("a")))
        .when(NotKnownZero(var("b")));
    b.rule("distr-r-rev", a() * c() + bb() * c(), (a() + bb()) * c())
        .when(NotKnownZero(var("c")))
        .expansive();
    b.rule("distr-l", a() * (bb() + c()), a() * bb() + a() * c())
        .when(NotKnownZero(var("b")))
        .when(NotKnownZero(var("c")));
    b.rule("distr-l-rev", a() * bb() + a() * c(), a() * (bb() + c()))
        .when(NotKnownZero(var("a")))
        .expansive();
    b.rule("recip-mul", recip(a() * bb()), recip(a()) * recip(bb()))
        .when(IsNonZeroConst(var("a")))
        .when(IsNonZeroConst(var("b")));
    b.rule("mul-recip", a() * recip(a()), n(1.0))
        .when(IsNonZeroConst(var("a")));
    b.rule("recip-recip", recip(recip(a())), a())
        .when(IsNonZeroConst(var("a")));

    b.group = Group::Shortcuts;
    b.rule("add-inv", a() + -a(), n(0.0));
    b.rule("add-inv-comm", -a() + a(), n(0.0));

    b.group = Group::Reduction;
    b.rule(
        "sum-factor",
        c() * sum(reduction(a())),
        sum(reduction(c() * a())),
    );
    b.rule(
        "sum-factor-rev",
        sum(reduction(c() * a())),
        c() * sum(reduction(a())),
    )
    .when(IsConst(var("c")));
    b.rule("sum-zero", sum(reduction(n(0.0))), n(0.0));
    b.rule(
        "prod-pow",
        pow(prod(reduction(a())), c()),
        prod(reduction(pow(a(), c()))),
    )
    .when(IsIntegerConst(var("c")));
    b.rule(
        "prod-pow-rev",
        prod(reduction(pow(a(), c()))),
        pow(prod(reduction(a())), c()),
    )
    .when(IsIntegerConst(var("c")));
    b.rule("prod-one", prod(reduction(n(1.0))), n(1.0));

    b.group = Group::Boolean;
    b.rule("and-comm", and(a(), bb()), and(bb(), a()));
    b.both(
        "and-assoc",
        and(a(), and(bb(), c())),
        and(and(a(), bb()), c()),
    );
    b.rule("or-comm", or(a(), bb()), or(bb(), a()));
    b.both("or-assoc", or(a(), or(bb(), c())), or(or(a(), bb()), c()));
    b.rule("absorb-or", or(and(a(), bb()), a()), a());
    b.rule("absorb-and", and(or(a(), bb()), a()), a());
    b.both(
        "de-morgan-and",
        not(and(a(), bb())),
        or(not(a()), not(bb())),
    );
    b.both("de-morgan-or", not(or(a(), bb())), and(not(a()), not(bb())));

    b.group = Group::Lattice;
    b.rule("min-comm", min(a(), bb()), min(bb(), a()));
    b.rule("max-comm", max(a(), bb()), max(bb(), a()));
    b.both(
        "min-assoc",
        min(a(), min(bb(), c())),
        min(min(a(), bb()), c()),
    );
    b.both(
        "max-assoc",
        max(a(), max(bb(), c())),
        max(max(a(), bb()), c()),
    );
    b.rule("min-idem", min(a(), a()), a());
    b.rule("max-idem", max(a(), a()), a());

    RuleCatalog { entries: b.entries }
}

/// `a => a + 0` with no type guard. Only for demonstrating what the guard
/// prevents.
pub fn unguarded_add_zero_rev() -> Rewrite {
    Rewrite::new("add-zero-rev", v("a"), v("a") + n(0.0))
        .expect("well-formed")
        .expansive()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn names_are_unique_and_revs_paired() {
        let cat = default_rules();
        let names: BTreeSet<&str> = cat.names().into_iter().collect();
        assert_eq!(names.len(), cat.len());
        for name in &names {
            if let Some(base) = name.strip_suffix("-rev") {
                assert!(names.contains(base), "{name} has no forward rule");
            }
        }
    }

    #[test]
    fn eq_symm_shape() {
        let cat = default_rules();
        let r = cat.get("eq-symm").unwrap();
        assert_eq!(r.searcher.tree(), eq_cons(v("a"), v("b"), v("f")));
        assert_eq!(r.searcher.tree().to_string(), "(constraint :eq ?a ?b ?f)");
    }

    #[test]
    fn add_zero_rev_is_guarded() {
        let cat = default_rules();
        let r = cat.get("add-zero-rev").unwrap();
        assert_eq!(
            r.conditions,
            vec![Condition::IsOfType(var("a"), TypeHint::Scalar)]
        );
        assert!(!unguarded_add_zero_rev().conditions.iter().any(|_| true));
    }

    #[test]
    fn self_symmetric_rules_have_no_reverse() {
        let cat = default_rules();
        for name in ["add-comm", "mul-comm", "and-comm", "or-comm", "eq-symm"] {
            assert!(cat.get(name).is_some());
            assert!(cat.get(&format!("{name}-rev")).is_none());
        }
    }

    #[test]
    fn subsets() {
        let cat = default_rules();
        let no_short = rule_subset(&cat, "no-shortcuts").unwrap();
        assert!(no_short.get("add-inv").is_none());
        assert!(no_short.get("add-inv-comm").is_none());
        assert_eq!(no_short.len(), cat.len() - 2);

        let arith = rule_subset(&cat, "arith").unwrap();
        assert!(arith.entries.iter().all(|e| e.group == Group::Arith));
        assert!(!arith.is_empty());

        let mixed = rule_subset(&cat, "constraint,add-comm,no-trans").unwrap();
        assert!(mixed.get("add-comm").is_some());
        assert!(mixed.get("trans").is_none());
        assert!(mixed.get("eq-symm").is_some());

        assert_eq!(
            rule_subset(&cat, "foo").unwrap_err(),
            RuleError::Unknown("foo".into())
        );
        assert!(rule_subset(&cat, "").is_err());
    }

    #[test]
    fn guarded_reverses_have_conditions() {
        let cat = default_rules();
        for name in [
            "add-zero-rev",
            "mul-one-rev",
            "distr-r-rev",
            "distr-l-rev",
            "sum-factor-rev",
            "prod-pow-rev",
        ] {
            assert!(!cat.get(name).unwrap().conditions.is_empty(), "{name}");
        }
    }
}
