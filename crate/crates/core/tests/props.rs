mod oracles;

use constraint_detect::detect::{detect_constraints, expand_hint_counts};
use constraint_detect::egraph::{EGraph, ENode, Id, Op, Term};
use constraint_detect::gen::{plant_data, plant_model, tsp_data, tsp_model};
use constraint_detect::model::{
    expr_from_json, expr_to_json, parse_data, parse_problem, serialize_data, serialize_problem,
    DataBindings, Expr, Tensor,
};
use constraint_detect::rewrite::recursive::*;
use constraint_detect::rewrite::{compile_pattern, run, search, RunnerConfig};
use constraint_detect::rules::{default_rules, rule_subset};
use oracles::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn dag_egraph(nodes: &[DagNode]) -> (EGraph, Vec<Id>) {
    let mut g = EGraph::new();
    let mut ids = Vec::new();
    for n in nodes {
        let kids: Vec<Id> = n.children.iter().map(|&k| ids[k]).collect();
        ids.push(g.add(ENode::new(n.op, kids)));
    }
    (g, ids)
}

fn dump_text(g: &EGraph) -> String {
    serde_json::to_string(&g.dump()).unwrap()
}

fn arith_term() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        prop::sample::select(vec!["a", "b", "c"])
            .prop_map(|n| placeholder::<Term>(name(n), list(vec![]))),
        (-3i32..=3).prop_map(|k| num::<Term>(k as f64)),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|t| -t),
            (inner.clone(), inner.clone()).prop_map(|(x, y)| x + y),
            (inner.clone(), inner).prop_map(|(x, y)| x * y),
        ]
    })
}

fn expr_tree() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (-1e6f64..1e6).prop_map(Expr::num),
        Just(Expr::element("i")),
        Just(Expr::placeholder("N", vec![])),
        Just(Expr::var("x", vec![Expr::element("i")])),
    ];
    leaf.prop_recursive(4, 32, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|e| -e),
            (inner.clone(), inner.clone()).prop_map(|(x, y)| x + y),
            (inner.clone(), inner.clone()).prop_map(|(x, y)| x * y),
            (inner.clone(), inner.clone()).prop_map(|(x, y)| x.min(y)),
            (inner.clone(), inner.clone()).prop_map(|(x, y)| x.le(y)),
            inner.clone().prop_map(|e| e.recip()),
            inner.prop_map(|e| Expr::sum("j", Expr::placeholder("N", vec![]), None, e)),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn union_and_rebuild_match_congruence_closure(seed in any::<u64>(), size in 2usize..40) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nodes = random_dag(&mut rng, size);
        let merges: Vec<(usize, usize)> = (0..size / 3)
            .map(|k| ((k * 7 + seed as usize) % size, (k * 13 + 1) % size))
            .collect();
        let (mut g, ids) = dag_egraph(&nodes);
        for &(a, b) in &merges {
            g.union(ids[a], ids[b]).unwrap();
        }
        g.rebuild().unwrap();
        prop_assert!(g.is_clean());
        g.check_invariants().map_err(TestCaseError::fail)?;
        let got: Vec<Id> = ids.iter().map(|&id| g.find(id)).collect();
        prop_assert!(same_partition(&got, &congruence_closure(&nodes, &merges)));
    }

    #[test]
    fn adding_an_existing_node_is_a_no_op(seed in any::<u64>(), size in 1usize..30) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nodes = random_dag(&mut rng, size);
        let (mut g, ids) = dag_egraph(&nodes);
        let before = dump_text(&g);
        for (n, &id) in nodes.iter().zip(&ids) {
            let kids: Vec<Id> = n.children.iter().map(|&k| ids[k]).collect();
            prop_assert_eq!(g.add(ENode::new(n.op, kids)), id);
        }
        prop_assert_eq!(dump_text(&g), before);
    }

    #[test]
    fn search_leaves_the_graph_unchanged(seed in any::<u64>(), size in 4usize..25) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nodes = random_dag(&mut rng, size);
        let (g, _) = dag_egraph(&nodes);
        let before = dump_text(&g);
        for _ in 0..5 {
            let p = compile_pattern(&random_pattern(&mut rng, 5)).unwrap();
            let _ = search(&g, &p);
        }
        prop_assert_eq!(dump_text(&g), before);
    }

    #[test]
    fn compiled_patterns_convert_back_losslessly(seed in any::<u64>(), size in 1usize..9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_pattern(&mut rng, size);
        let compiled = compile_pattern(&p).unwrap();
        prop_assert_eq!(compiled.tree(), p);
    }

    #[test]
    fn extracted_terms_stay_in_their_class(t in arith_term()) {
        let mut g = EGraph::new();
        let root = g.add_term(&t);
        let rules = rule_subset(&default_rules(), "arith").unwrap().rules();
        let cfg = RunnerConfig { max_iterations: 6, node_limit: 3_000, ..Default::default() };
        run(&mut g, &rules, &cfg).unwrap();
        let best = g.extract_term(root).unwrap();
        prop_assert!(best.size() <= t.size());
        prop_assert_eq!(g.lookup_term(&best).map(|id| g.find(id)), Some(g.find(root)));
    }

    #[test]
    fn rewriting_preserves_value(
        t in arith_term(),
        vals in prop::array::uniform3(-4i32..=4),
    ) {
        let data = ["a", "b", "c"]
            .iter()
            .zip(vals)
            .fold(DataBindings::new(), |d, (n, v)| d.with(n, Tensor::scalar(v as f64)));
        let none = DataBindings::new();
        let before = eval_term(&t, &data, &none).unwrap();
        let mut g = EGraph::new();
        let root = g.add_term(&t);
        let rules = rule_subset(&default_rules(), "arith").unwrap().rules();
        let cfg = RunnerConfig { max_iterations: 6, node_limit: 3_000, ..Default::default() };
        run(&mut g, &rules, &cfg).unwrap();
        let after = eval_term(&g.extract_term(root).unwrap(), &data, &none).unwrap();
        prop_assert!(values_agree(before, after), "{t}: {before:?} vs {after:?}");
        if let Some(c) = g.data(root).const_val {
            prop_assert!(values_agree(before, constraint_detect::model::Value::Scalar(c)));
        }
    }

    #[test]
    fn expressions_round_trip_through_json(e in expr_tree()) {
        prop_assert_eq!(expr_from_json(&expr_to_json(&e)).unwrap(), e);
    }

    #[test]
    fn data_round_trips_through_json(n in 1usize..8, m in 1usize..8, seed in any::<u64>()) {
        let d = plant_data(n, m, seed).unwrap();
        prop_assert_eq!(parse_data(&serialize_data(&d)).unwrap(), d);
        let t = tsp_data(n, seed).unwrap();
        prop_assert_eq!(parse_data(&serialize_data(&t)).unwrap(), t);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn tsp_hints_expand_to_two_per_city(n in 1usize..200, seed in any::<u64>()) {
        let r = detect_constraints(&tsp_model(), &RunnerConfig::default()).unwrap();
        let c = expand_hint_counts(&r, &tsp_data(n, seed).unwrap()).unwrap();
        prop_assert_eq!(c.one_hot, 2 * n);
        prop_assert_eq!(c.sos1_binary + c.sos1_general, 0);
    }

    #[test]
    fn plant_counts_follow_the_data(n in 1usize..30, m in 1usize..30, seed in any::<u64>()) {
        let r = detect_constraints(&plant_model(), &RunnerConfig::default()).unwrap();
        let c = expand_hint_counts(&r, &plant_data(n, m, seed).unwrap()).unwrap();
        prop_assert_eq!(c.one_hot, 0);
        prop_assert_eq!(c.sos1_general, c.sos1_binary);
        prop_assert!(c.sos1_binary > 0);
    }
}

#[test]
fn models_round_trip_through_json() {
    for p in [tsp_model(), plant_model()] {
        assert_eq!(parse_problem(&serialize_problem(&p)).unwrap(), p);
    }
}

#[test]
fn detection_is_deterministic() {
    for p in [tsp_model(), plant_model()] {
        let cfg = RunnerConfig::default();
        let a = detect_constraints(&p, &cfg).unwrap().to_json();
        let b = detect_constraints(&p, &cfg).unwrap().to_json();
        assert_eq!(a, b);
    }
}

#[test]
fn rebuild_is_idempotent() {
    let mut g = EGraph::new();
    let x = g.add(ENode::leaf(Op::name("a")));
    let y = g.add(ENode::leaf(Op::name("b")));
    let fx = g.add(ENode::new(Op::Neg, [x]));
    let fy = g.add(ENode::new(Op::Neg, [y]));
    g.union(x, y).unwrap();
    g.rebuild().unwrap();
    assert_eq!(g.find(fx), g.find(fy));
    let once = dump_text(&g);
    g.rebuild().unwrap();
    assert_eq!(dump_text(&g), once);
}
