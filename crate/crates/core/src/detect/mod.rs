//! Constraint detection: one e-graph per constraint, saturated under the
//! rule catalog, then searched with the detector patterns.

mod expand;
mod lower;

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::egraph::{EGraph, EGraphError, Id, Op, Term};
use crate::model::{
    eval_expr, expr_to_json, validate_problem, ConstraintDef, Env, Expr, ProblemDef, Severity,
    Value as EvalValue, VarKind,
};
use crate::rewrite::recursive::*;
use crate::rewrite::{run, PatTree, Pattern, Rewrite, RunReport, RunnerConfig, Subst, Var};
use crate::rules::default_rules;

pub use expand::{expand_hint_counts, HintCounts};
pub use lower::{lower_constraint, lower_expr, lower_forall, raise_forall, raise_term, RaiseError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DetectError {
    #[error("invalid problem: {0}")]
    Invalid(String),
    #[error("constraint `{constraint}`: {source}")]
    Engine {
        constraint: String,
        source: EGraphError,
    },
    #[error(transparent)]
    Raise(#[from] RaiseError),
}

/// A Σ-shaped hint: one-hot (`= 1`) or SOS1 over binaries (`<= 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct SumHint {
    pub constraint: String,
    pub var: String,
    pub index: String,
    pub domain: Expr,
    pub condition: Option<Expr>,
    pub subscripts: Vec<Expr>,
    pub forall: Vec<(String, Expr)>,
}

pub type OneHotHint = SumHint;
pub type Sos1BinaryHint = SumHint;

fn forall_json(forall: &[(String, Expr)]) -> Value {
    Value::Array(
        forall
            .iter()
            .map(|(e, d)| json!({"element": e, "domain": expr_to_json(d)}))
            .collect(),
    )
}

impl SumHint {
    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("constraint".into(), json!(self.constraint));
        m.insert("var".into(), json!(self.var));
        m.insert("index".into(), json!(self.index));
        m.insert("domain".into(), expr_to_json(&self.domain));
        if let Some(c) = &self.condition {
            m.insert("condition".into(), expr_to_json(c));
        }
        m.insert(
            "subscripts".into(),
            Value::Array(self.subscripts.iter().map(expr_to_json).collect()),
        );
        m.insert("forall".into(), forall_json(&self.forall));
        Value::Object(m)
    }
}

/// SOS1 over continuous variables, from a binary SOS1 hint plus a family
/// of upper bounds `c[k] <= coef * b[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sos1GeneralHint {
    pub binary: Sos1BinaryHint,
    pub continuous: String,
    pub bound_constraint: String,
    pub coef: Expr,
}

impl Sos1GeneralHint {
    pub fn to_json(&self) -> Value {
        json!({
            "binary": self.binary.to_json(),
            "continuous": self.continuous,
            "bound_constraint": self.bound_constraint,
            "coef": expr_to_json(&self.coef),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    OneHot,
    Sos1Binary,
    None,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::OneHot => "one_hot",
            Outcome::Sos1Binary => "sos1_binary",
            Outcome::None => "none",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintStats {
    pub constraint: String,
    pub outcome: Outcome,
    pub run: RunReport,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Timing {
    pub saturate: Duration,
    pub match_patterns: Duration,
    pub combine: Duration,
    pub total: Duration,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct HintReport {
    pub one_hot: Vec<OneHotHint>,
    pub sos1_binary: Vec<Sos1BinaryHint>,
    pub sos1_general: Vec<Sos1GeneralHint>,
    pub stats: Vec<ConstraintStats>,
    pub timing: Timing,
}

impl HintReport {
    /// Hint lists only; independent of timing and of saturation stats.
    pub fn hints_json(&self) -> Value {
        json!({
            "one_hot": self.one_hot.iter().map(SumHint::to_json).collect::<Vec<_>>(),
            "sos1_binary": self.sos1_binary.iter().map(SumHint::to_json).collect::<Vec<_>>(),
            "sos1_general": self.sos1_general.iter().map(Sos1GeneralHint::to_json).collect::<Vec<_>>(),
        })
    }

    /// Hints plus per-constraint saturation stats (no wall-clock values).
    pub fn to_json(&self) -> Value {
        let mut v = self.hints_json();
        let stats: Map<String, Value> = self
            .stats
            .iter()
            .map(|s| {
                let mut run = serde_json::to_value(&s.run).expect("reports serialize");
                run["outcome"] = json!(s.outcome.as_str());
                (s.constraint.clone(), run)
            })
            .collect();
        v["stats"] = Value::Object(stats);
        v
    }

    pub fn timing_json(&self) -> Value {
        let ms = |d: Duration| d.as_secs_f64() * 1e3;
        json!({
            "saturate_ms": ms(self.timing.saturate),
            "match_ms": ms(self.timing.match_patterns),
            "combine_ms": ms(self.timing.combine),
            "total_ms": ms(self.timing.total),
        })
    }
}

/// A saturated per-constraint e-graph.
pub struct ConstraintGraph {
    pub name: String,
    pub egraph: EGraph,
    pub root: Id,
    pub report: RunReport,
}

pub fn saturate_constraint(
    c: &ConstraintDef,
    p: &ProblemDef,
    rules: &[Rewrite],
    cfg: &RunnerConfig,
) -> Result<ConstraintGraph, DetectError> {
    let engine = |source| DetectError::Engine {
        constraint: c.name.clone(),
        source,
    };
    let mut egraph = EGraph::new();
    let root = egraph.add_term(&lower_constraint(c, p));
    let report = run(&mut egraph, rules, cfg).map_err(engine)?;
    let root = egraph.find(root);
    Ok(ConstraintGraph {
        name: c.name.clone(),
        egraph,
        root,
        report,
    })
}

fn v(name: &str) -> PatTree {
    PatTree::var(name)
}

fn sum_over_binary(sense: fn(PatTree, PatTree, PatTree) -> PatTree) -> Pattern {
    let tree = sense(
        sum(ReductionView {
            index: v("index"),
            domain: v("domain"),
            condition: v("cond"),
            operand: decision_var(VarView {
                name: v("name"),
                kind: kind(VarKind::Binary),
                subscripts: v("subs"),
            }),
        }),
        num(1.0),
        v("foralls"),
    );
    crate::rewrite::compile_pattern(&tree).expect("detector patterns are well-formed")
}

/// `Σ_{index in domain | cond} name[subs] = 1`, with the forall list free.
pub fn one_hot_pattern() -> Pattern {
    sum_over_binary(eq_cons)
}

/// `Σ_{index in domain | cond} name[subs] <= 1`.
pub fn sos1_binary_pattern() -> Pattern {
    sum_over_binary(le_cons)
}

fn extract(g: &EGraph, id: Id) -> Term {
    g.extract_term(id)
        .expect("every class of a graph built from finite terms has a finite member")
}

fn symbol(g: &EGraph, id: Id) -> Option<&'static str> {
    g.class(id).nodes.iter().find_map(|n| match n.op {
        Op::Name(s) | Op::Element(s) => Some(s.as_str()),
        _ => None,
    })
}

fn sum_hint_at(
    g: &EGraph,
    root: Id,
    pattern: &Pattern,
    c: &ConstraintDef,
) -> Result<Option<SumHint>, DetectError> {
    let var = |n: &str| Var::new(n);
    let mut best: Option<(String, SumHint)> = None;
    for s in pattern.search_class(g, root) {
        if !subscripts_mention(g, &s, var("subs"), var("index")) {
            continue;
        }
        let Some(index) = g
            .class(s[var("index")])
            .nodes
            .iter()
            .find_map(|n| match n.op {
                Op::Element(e) => Some(e.as_str().to_owned()),
                _ => None,
            })
        else {
            continue;
        };
        let Some(name) = symbol(g, s[var("name")]) else {
            continue;
        };
        let condition = match raise_term(&extract(g, s[var("cond")]))? {
            Expr::NoCond => None,
            e => Some(e),
        };
        let subs_term = extract(g, s[var("subs")]);
        let hint = SumHint {
            constraint: c.name.clone(),
            var: name.to_owned(),
            index,
            domain: raise_term(&extract(g, s[var("domain")]))?,
            condition,
            subscripts: subs_term
                .children
                .iter()
                .map(raise_term)
                .collect::<Result<_, _>>()?,
            forall: raise_forall(&extract(g, s[var("foralls")]))?,
        };
        let key = hint.to_json().to_string();
        if best.as_ref().is_none_or(|(k, _)| key < *k) {
            best = Some((key, hint));
        }
    }
    Ok(best.map(|(_, h)| h))
}

/// Some list node in the `subs` class has the `index` class as an entry.
fn subscripts_mention(g: &EGraph, s: &Subst, subs: Var, index: Var) -> bool {
    let index = g.find(s[index]);
    g.class(s[subs])
        .nodes
        .iter()
        .any(|n| n.op == Op::List && n.children.iter().any(|&c| g.find(c) == index))
}

pub fn detect_one_hot(
    g: &EGraph,
    root: Id,
    c: &ConstraintDef,
) -> Result<Option<OneHotHint>, DetectError> {
    sum_hint_at(g, root, &one_hot_pattern(), c)
}

pub fn detect_sos1_binary(
    g: &EGraph,
    root: Id,
    c: &ConstraintDef,
) -> Result<Option<Sos1BinaryHint>, DetectError> {
    sum_hint_at(g, root, &sos1_binary_pattern(), c)
}

fn has_zero_lower_bound(name: &str, p: &ProblemDef, graphs: &[ConstraintGraph]) -> bool {
    let declared = p
        .decision_var(name)
        .and_then(|d| d.lower.as_ref())
        .and_then(|l| eval_expr(l, &Env::new()).ok())
        == Some(EvalValue::Scalar(0.0));
    if declared {
        return true;
    }
    let nonneg = crate::rewrite::compile_pattern(&ge_cons(
        decision_var(VarView {
            name: crate::rewrite::recursive::name(name),
            kind: kind(VarKind::Continuous),
            subscripts: v("s"),
        }),
        num(0.0),
        v("f"),
    ))
    .expect("well-formed");
    graphs
        .iter()
        .any(|cg| !nonneg.search_class(&cg.egraph, cg.root).is_empty())
}

fn bound_pattern(binary: &str) -> Pattern {
    crate::rewrite::compile_pattern(&le_cons(
        decision_var(VarView {
            name: v("c"),
            kind: kind(VarKind::Continuous),
            subscripts: v("cs"),
        }),
        v("coef")
            * decision_var(VarView {
                name: name(binary),
                kind: kind(VarKind::Binary),
                subscripts: v("bs"),
            }),
        v("f"),
    ))
    .expect("well-formed")
}

/// Joins binary SOS1 hints with upper-bound families `c[k] <= coef * b[k]`
/// over the same domain, where `c` is continuous and nonnegative.
pub fn combine_general_sos1(
    binary_hints: &[Sos1BinaryHint],
    graphs: &[ConstraintGraph],
    p: &ProblemDef,
) -> Result<Vec<Sos1GeneralHint>, DetectError> {
    let var = |n: &str| Var::new(n);
    let mut out = Vec::new();
    for h in binary_hints {
        if h.subscripts != [Expr::Element(h.index.clone())] {
            continue;
        }
        let pattern = bound_pattern(&h.var);
        for cg in graphs.iter().filter(|cg| cg.name != h.constraint) {
            let g = &cg.egraph;
            let mut best: Option<(String, Sos1GeneralHint)> = None;
            for s in pattern.search_class(g, cg.root) {
                let Some(cont) = symbol(g, s[var("c")]) else {
                    continue;
                };
                let forall = raise_forall(&extract(g, s[var("f")]))?;
                let [(k, domain)] = forall.as_slice() else {
                    continue;
                };
                if *domain != h.domain {
                    continue;
                }
                let only_k = |id: Id| -> Result<bool, DetectError> {
                    let t = extract(g, id);
                    Ok(t.op == Op::List
                        && t.children.len() == 1
                        && raise_term(&t.children[0])? == Expr::Element(k.clone()))
                };
                if !only_k(s[var("cs")])? || !only_k(s[var("bs")])? {
                    continue;
                }
                let coef = raise_term(&extract(g, s[var("coef")]))?;
                if coef.mentions_decision_var() {
                    continue;
                }
                if !has_zero_lower_bound(cont, p, graphs) {
                    continue;
                }
                let hint = Sos1GeneralHint {
                    binary: h.clone(),
                    continuous: cont.to_owned(),
                    bound_constraint: cg.name.clone(),
                    coef,
                };
                let key = hint.to_json().to_string();
                if best.as_ref().is_none_or(|(bk, _)| key < *bk) {
                    best = Some((key, hint));
                }
            }
            out.extend(best.map(|(_, h)| h));
        }
    }
    Ok(out)
}

/// Runs the full pipeline with the default catalog.
pub fn detect_constraints(p: &ProblemDef, cfg: &RunnerConfig) -> Result<HintReport, DetectError> {
    detect_with_rules(p, &default_rules().rules(), cfg)
}

pub fn detect_with_rules(
    p: &ProblemDef,
    rules: &[Rewrite],
    cfg: &RunnerConfig,
) -> Result<HintReport, DetectError> {
    let start = Instant::now();
    if let Some(d) = validate_problem(p)
        .into_iter()
        .find(|d| d.severity == Severity::Error)
    {
        return Err(DetectError::Invalid(d.to_string()));
    }

    struct PerConstraint {
        graph: ConstraintGraph,
        one_hot: Option<OneHotHint>,
        sos1: Option<Sos1BinaryHint>,
        match_time: Duration,
    }

    let results: Vec<PerConstraint> = p
        .constraints
        .par_iter()
        .map(|c| {
            let graph = saturate_constraint(c, p, rules, cfg)?;
            let t = Instant::now();
            let one_hot = detect_one_hot(&graph.egraph, graph.root, c)?;
            // equality is the stronger claim; never report both
            let sos1 = match one_hot {
                Some(_) => None,
                None => detect_sos1_binary(&graph.egraph, graph.root, c)?,
            };
            Ok(PerConstraint {
                graph,
                one_hot,
                sos1,
                match_time: t.elapsed(),
            })
        })
        .collect::<Result<_, DetectError>>()?;

    let mut report = HintReport::default();
    let mut graphs = Vec::with_capacity(results.len());
    for r in results {
        let outcome = if r.one_hot.is_some() {
            Outcome::OneHot
        } else if r.sos1.is_some() {
            Outcome::Sos1Binary
        } else {
            Outcome::None
        };
        log::info!(
            "{}: {} after {} iterations ({})",
            r.graph.name,
            outcome.as_str(),
            r.graph.report.iterations,
            r.graph.report.stop_reason.as_str()
        );
        report.timing.saturate += r.graph.report.elapsed;
        report.timing.match_patterns += r.match_time;
        report.one_hot.extend(r.one_hot);
        report.sos1_binary.extend(r.sos1);
        report.stats.push(ConstraintStats {
            constraint: r.graph.name.clone(),
            outcome,
            run: r.graph.report.clone(),
        });
        graphs.push(r.graph);
    }

    let t = Instant::now();
    report.sos1_general = combine_general_sos1(&report.sos1_binary, &graphs, p)?;
    report.timing.combine = t.elapsed();
    report.timing.total = start.elapsed();
    Ok(report)
}
