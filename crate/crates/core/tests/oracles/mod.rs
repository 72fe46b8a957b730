//! Brute-force reference implementations shared by the integration tests.
//! None of these use the e-graph's own matching or rebuilding code.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use constraint_detect::detect::{raise_forall, raise_term};
use constraint_detect::egraph::{EGraph, Id, Op, Term};
use constraint_detect::model::{eval_expr, DataBindings, Env, Sense, Value};
use constraint_detect::rewrite::{PatTree, Var};
use rand::seq::SliceRandom;
use rand::Rng;

/// A node whose children are indices of earlier nodes.
#[derive(Clone, Debug)]
pub struct DagNode {
    pub op: Op,
    pub children: Vec<usize>,
}

pub const LEAVES: [&str; 4] = ["a", "b", "c", "d"];

/// Random DAG over leaves `a..d`, `neg`, `+` and `*`. No numeric leaves, so
/// constant folding never adds equalities of its own.
pub fn random_dag(rng: &mut impl Rng, size: usize) -> Vec<DagNode> {
    let mut nodes: Vec<DagNode> = LEAVES
        .iter()
        .take(size.clamp(1, LEAVES.len()))
        .map(|l| DagNode {
            op: Op::name(l),
            children: vec![],
        })
        .collect();
    while nodes.len() < size {
        let n = nodes.len();
        let node = match rng.gen_range(0..5) {
            0 => DagNode {
                op: Op::Neg,
                children: vec![rng.gen_range(0..n)],
            },
            1 | 2 => DagNode {
                op: Op::Add,
                children: vec![rng.gen_range(0..n), rng.gen_range(0..n)],
            },
            _ => DagNode {
                op: Op::Mul,
                children: vec![rng.gen_range(0..n), rng.gen_range(0..n)],
            },
        };
        nodes.push(node);
    }
    nodes
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Congruence closure by naive fixpoint: keep merging any two nodes with
/// the same operator and pairwise-equivalent children until nothing changes.
/// Returns the representative of every node.
pub fn congruence_closure(nodes: &[DagNode], merges: &[(usize, usize)]) -> Vec<usize> {
    let mut parent: Vec<usize> = (0..nodes.len()).collect();
    for &(a, b) in merges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        parent[ra] = rb;
    }
    loop {
        let mut changed = false;
        for i in 0..nodes.len() {
            for j in i + 1..nodes.len() {
                let (a, b) = (&nodes[i], &nodes[j]);
                if a.op != b.op || a.children.len() != b.children.len() {
                    continue;
                }
                let congruent = a
                    .children
                    .iter()
                    .zip(&b.children)
                    .all(|(&x, &y)| find(&mut parent, x) == find(&mut parent, y));
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if congruent && ri != rj {
                    parent[ri] = rj;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    (0..nodes.len()).map(|i| find(&mut parent, i)).collect()
}

/// Both vectors induce the same equivalence on node indices.
pub fn same_partition<A: PartialEq, B: PartialEq>(x: &[A], y: &[B]) -> bool {
    x.len() == y.len()
        && (0..x.len()).all(|i| (0..x.len()).all(|j| (x[i] == x[j]) == (y[i] == y[j])))
}

pub fn random_pattern(rng: &mut impl Rng, max_size: usize) -> PatTree {
    fn go(rng: &mut impl Rng, budget: usize) -> PatTree {
        if budget <= 1 || rng.gen_bool(0.3) {
            return if rng.gen_bool(0.7) {
                PatTree::var(["x", "y", "z"].choose(rng).unwrap())
            } else {
                PatTree::Node(Op::name(LEAVES.choose(rng).unwrap()), vec![])
            };
        }
        if budget < 3 || rng.gen_bool(0.25) {
            return PatTree::Node(Op::Neg, vec![go(rng, budget - 1)]);
        }
        let left = rng.gen_range(1..=budget - 2);
        let l = go(rng, left);
        let r = go(rng, budget - 1 - l.size());
        let op = if rng.gen_bool(0.5) { Op::Add } else { Op::Mul };
        PatTree::Node(op, vec![l, r])
    }
    loop {
        let p = go(rng, max_size);
        if p.size() <= max_size {
            return p;
        }
    }
}

pub type MatchSet = BTreeSet<(Id, Vec<(Var, Id)>)>;

/// Every `(root class, assignment)` pair, found by trying all assignments
/// of pattern variables to classes and evaluating the pattern bottom-up
/// into the set of classes it denotes.
pub fn brute_force_matches(g: &EGraph, p: &PatTree) -> MatchSet {
    let classes: Vec<Id> = g.classes().map(|c| c.id).collect();
    let vars = p.vars();
    let mut out = MatchSet::new();
    let mut assignment = vec![0usize; vars.len()];
    loop {
        let sigma: BTreeMap<Var, Id> = vars
            .iter()
            .zip(&assignment)
            .map(|(v, &k)| (*v, classes[k]))
            .collect();
        for root in denotes(g, p, &sigma) {
            out.insert((root, sigma.iter().map(|(v, id)| (*v, *id)).collect()));
        }
        // next assignment, odometer style
        let mut k = 0;
        loop {
            if k == assignment.len() {
                return out;
            }
            assignment[k] += 1;
            if assignment[k] < classes.len() {
                break;
            }
            assignment[k] = 0;
            k += 1;
        }
    }
}

fn denotes(g: &EGraph, p: &PatTree, sigma: &BTreeMap<Var, Id>) -> BTreeSet<Id> {
    match p {
        PatTree::Var(v) => BTreeSet::from([sigma[v]]),
        PatTree::Node(op, kids) => {
            let kid_sets: Vec<BTreeSet<Id>> = kids.iter().map(|k| denotes(g, k, sigma)).collect();
            g.classes()
                .filter(|c| {
                    c.nodes.iter().any(|n| {
                        n.op == *op
                            && n.children.len() == kids.len()
                            && n.children
                                .iter()
                                .zip(&kid_sets)
                                .all(|(ch, set)| set.contains(&g.find(*ch)))
                    })
                })
                .map(|c| c.id)
                .collect()
        }
    }
}

/// Ground value of a term: a scalar, a boolean, or the truth of a
/// constraint over every instance of its forall list.
pub fn eval_term(t: &Term, data: &DataBindings, vars: &DataBindings) -> Result<Value, String> {
    let env = Env::new().with_placeholders(data).with_vars(vars);
    if t.op != Op::Constraint {
        let e = raise_term(t).map_err(|e| e.to_string())?;
        return eval_expr(&e, &env).map_err(|e| e.to_string());
    }
    let sense = match t.children[0].op {
        Op::SenseEq => Sense::Eq,
        Op::SenseLe => Sense::Le,
        Op::SenseGe => Sense::Ge,
        _ => return Err(format!("bad sense in {t}")),
    };
    let left = raise_term(&t.children[1]).map_err(|e| e.to_string())?;
    let right = raise_term(&t.children[2]).map_err(|e| e.to_string())?;
    let forall = raise_forall(&t.children[3]).map_err(|e| e.to_string())?;

    fn all(
        forall: &[(String, constraint_detect::model::Expr)],
        env: Env<'_>,
        check: &dyn Fn(&Env<'_>) -> Result<bool, String>,
    ) -> Result<bool, String> {
        let Some(((el, dom), rest)) = forall.split_first() else {
            return check(&env);
        };
        let n = eval_expr(dom, &env)
            .map_err(|e| e.to_string())?
            .as_scalar()
            .ok_or("domain is not a scalar")?;
        let mut ok = true;
        for k in 0..n as usize {
            ok &= all(rest, env.clone().bind(el, k as f64), check)?;
        }
        Ok(ok)
    }

    let check = |env: &Env<'_>| -> Result<bool, String> {
        let s = |e| {
            eval_expr(e, env)
                .map_err(|e| e.to_string())?
                .as_scalar()
                .ok_or_else(|| "constraint side is not a scalar".to_owned())
        };
        let (l, r) = (s(&left)?, s(&right)?);
        let tol = 1e-9 * l.abs().max(r.abs()).max(1.0);
        Ok(match sense {
            Sense::Eq => (l - r).abs() <= tol,
            Sense::Le => l <= r + tol,
            Sense::Ge => l + tol >= r,
        })
    };
    all(&forall, env.clone(), &check).map(Value::Bool)
}

/// Scalars agree to 1e-9 relative (absolute below magnitude 1); booleans
/// must be equal.
pub fn values_agree(a: Value, b: Value) -> bool {
    match (a, b) {
        (Value::Scalar(x), Value::Scalar(y)) => {
            (x - y).abs() <= 1e-9 * x.abs().max(y.abs()).max(1.0)
        }
        (Value::Bool(x), Value::Bool(y)) => x == y,
        _ => false,
    }
}
