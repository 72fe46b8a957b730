//! Patterns, e-matching, conditional rewrites and the saturation runner.

mod pattern;
pub mod recursive;
mod rule;
mod runner;

pub use pattern::{
    compile_pattern, search, Instruction, PatTree, Pattern, PatternError, Reg, Subst, Var,
};
pub use recursive::{
    children_to_view, view_to_children, ConstraintView, NodeView, Recursive, ReductionView,
    VarView, ViewError,
};
pub use rule::{apply_rule, instantiate, Condition, Rewrite, RuleListing};
pub use runner::{run, RunReport, RunnerConfig, Scheduler, StopReason};

#[cfg(test)]
mod tests {
    use super::recursive::*;
    use super::*;
    use crate::egraph::{EGraph, Term};

    fn v(n: &str) -> PatTree {
        PatTree::var(n)
    }

    fn assoc_rules() -> Vec<Rewrite> {
        vec![
            Rewrite::new("add-comm", v("a") + v("b"), v("b") + v("a")).unwrap(),
            Rewrite::new(
                "add-assoc",
                v("a") + (v("b") + v("c")),
                (v("a") + v("b")) + v("c"),
            )
            .unwrap(),
            Rewrite::new(
                "add-assoc-rev",
                (v("a") + v("b")) + v("c"),
                v("a") + (v("b") + v("c")),
            )
            .unwrap(),
        ]
    }

    #[test]
    fn bidirectional_assoc_enables_match() {
        let mut g = EGraph::new();
        let t = element::<Term>("a") + (element::<Term>("b") + element("c"));
        g.add_term(&t);
        g.rebuild().unwrap();
        let p = compile_pattern(&((v("x") + v("y")) + v("z"))).unwrap();
        assert!(search(&g, &p).is_empty());
        let report = run(&mut g, &assoc_rules(), &RunnerConfig::default()).unwrap();
        assert_eq!(report.stop_reason, StopReason::Saturated);
        assert!(!search(&g, &p).is_empty());
    }

    #[test]
    fn empty_rule_set_saturates_immediately() {
        let mut g = EGraph::new();
        g.add_term(&(element::<Term>("a") + num(1.0)));
        let nodes = g.total_nodes();
        let report = run(&mut g, &[], &RunnerConfig::default()).unwrap();
        assert_eq!(report.stop_reason, StopReason::Saturated);
        assert!(report.iterations <= 1);
        assert_eq!(g.total_nodes(), nodes);
    }

    #[test]
    fn folding_through_negation() {
        let mut g = EGraph::new();
        let root = g.add_term(&(num::<Term>(1.0) + neg(num(-1.0))));
        run(&mut g, &[], &RunnerConfig::default()).unwrap();
        assert_eq!(g.lookup_term(&num(2.0)), Some(g.find(root)));
    }

    #[test]
    fn iteration_limit_is_reported() {
        let mut g = EGraph::new();
        let mut t: Term = element("x0");
        for k in 1..8 {
            t = t + element(&format!("x{k}"));
        }
        g.add_term(&t);
        let cfg = RunnerConfig {
            max_iterations: 2,
            ..RunnerConfig::default()
        };
        let report = run(&mut g, &assoc_rules(), &cfg).unwrap();
        assert_eq!(report.stop_reason, StopReason::IterLimit);
        assert_eq!(report.iterations, 2);
    }

    #[test]
    fn node_limit_is_reported() {
        let mut g = EGraph::new();
        let mut t: Term = element("x0");
        for k in 1..10 {
            t = t + element(&format!("x{k}"));
        }
        g.add_term(&t);
        let cfg = RunnerConfig {
            node_limit: 200,
            scheduler: Scheduler::Plain,
            ..RunnerConfig::default()
        };
        let report = run(&mut g, &assoc_rules(), &cfg).unwrap();
        assert_eq!(report.stop_reason, StopReason::NodeLimit);
    }
}
