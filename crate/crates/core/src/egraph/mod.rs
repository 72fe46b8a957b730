//! Hashconsed e-graph with deferred congruence-closure rebuilding.
//!
//! Classes are stored densely by id; a merged-away id keeps a `None` slot
//! and resolves through the union-find. `add` and `union` may leave the
//! graph temporarily non-congruent. Call [`EGraph::rebuild`] before
//! searching to restore the invariants:
//!
//! * every canonical node lives in exactly one class (hashcons),
//! * nodes with the same operator and equivalent children share a class,
//! * each class's analysis data is the join of `make` over its nodes.

mod analysis;
mod extract;
mod lang;

use std::collections::HashMap;

use serde::Serialize;

pub use analysis::{consts_agree, make, AnalysisData, TypeHint, CONST_TOLERANCE};
pub use extract::Extractor;
pub use lang::{ENode, Float, Id, Op, Term};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EGraphError {
    #[error("unsound merge of classes {a} and {b}: constants {left} and {right} disagree")]
    UnsoundMerge { a: Id, b: Id, left: f64, right: f64 },
    #[error("class {0} has no finite term")]
    ExtractionDiverged(Id),
}

#[derive(Debug, Clone, Default)]
struct UnionFind {
    parents: Vec<Id>,
}

impl UnionFind {
    fn make_set(&mut self) -> Id {
        let id = Id::from(self.parents.len());
        self.parents.push(id);
        id
    }

    fn find(&self, mut id: Id) -> Id {
        while self.parents[id.index()] != id {
            id = self.parents[id.index()];
        }
        id
    }

    fn find_mut(&mut self, mut id: Id) -> Id {
        while self.parents[id.index()] != id {
            let grandparent = self.parents[self.parents[id.index()].index()];
            self.parents[id.index()] = grandparent;
            id = grandparent;
        }
        id
    }

    fn union(&mut self, root: Id, child: Id) {
        self.parents[child.index()] = root;
    }
}

#[derive(Debug, Clone)]
pub struct EClass {
    pub id: Id,
    pub nodes: Vec<ENode>,
    pub data: AnalysisData,
    parents: Vec<(ENode, Id)>,
}

impl EClass {
    pub fn parents(&self) -> impl Iterator<Item = &(ENode, Id)> {
        self.parents.iter()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct RebuildReport {
    /// Unions or analysis updates performed while restoring invariants.
    pub repairs: usize,
    pub classes: usize,
    pub nodes: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassDump {
    pub id: u32,
    pub type_hint: TypeHint,
    pub const_val: Option<f64>,
    pub nodes: Vec<String>,
}

#[derive(Debug, Clone, Default)]
pub struct EGraph {
    unionfind: UnionFind,
    memo: HashMap<ENode, Id>,
    classes: Vec<Option<EClass>>,
    pending: Vec<(ENode, Id)>,
    analysis_pending: Vec<(ENode, Id)>,
    nodes_added: usize,
    merges: usize,
}

impl EGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn find(&self, id: Id) -> Id {
        self.unionfind.find(id)
    }

    fn find_mut(&mut self, id: Id) -> Id {
        self.unionfind.find_mut(id)
    }

    /// The class `id` currently belongs to.
    pub fn class(&self, id: Id) -> &EClass {
        let root = self.find(id);
        self.classes[root.index()]
            .as_ref()
            .expect("canonical ids always have a class")
    }

    fn class_mut(&mut self, id: Id) -> &mut EClass {
        let root = self.find_mut(id);
        self.classes[root.index()]
            .as_mut()
            .expect("canonical ids always have a class")
    }

    pub fn data(&self, id: Id) -> &AnalysisData {
        &self.class(id).data
    }

    /// Canonical classes in id order.
    pub fn classes(&self) -> impl Iterator<Item = &EClass> {
        self.classes.iter().flatten()
    }

    pub fn num_classes(&self) -> usize {
        self.classes().count()
    }

    pub fn total_nodes(&self) -> usize {
        self.classes().map(|c| c.nodes.len()).sum()
    }

    /// Hashcons size: exact after a rebuild, an upper bound between rebuilds.
    pub fn total_nodes_upper_bound(&self) -> usize {
        self.memo.len()
    }

    /// Number of ids ever allocated.
    pub fn num_ids(&self) -> usize {
        self.unionfind.parents.len()
    }

    /// Nodes ever inserted (monotone).
    pub fn nodes_added(&self) -> usize {
        self.nodes_added
    }

    /// Non-trivial unions ever performed (monotone).
    pub fn merges(&self) -> usize {
        self.merges
    }

    /// True when no merges are awaiting a rebuild.
    pub fn is_clean(&self) -> bool {
        self.pending.is_empty() && self.analysis_pending.is_empty()
    }

    pub fn canonicalize(&self, node: &ENode) -> ENode {
        ENode {
            op: node.op,
            children: node.children.iter().map(|&c| self.find(c)).collect(),
        }
    }

    pub fn lookup(&self, node: &ENode) -> Option<Id> {
        self.memo
            .get(&self.canonicalize(node))
            .map(|&id| self.find(id))
    }

    /// Class of `term` if it is represented, without adding anything.
    pub fn lookup_term(&self, term: &Term) -> Option<Id> {
        let children = term
            .children
            .iter()
            .map(|c| self.lookup_term(c))
            .collect::<Option<Vec<_>>>()?;
        self.lookup(&ENode::new(term.op, children))
    }

    fn make(&self, node: &ENode) -> AnalysisData {
        make(node, |k| *self.data(node.children[k]))
    }

    /// Inserts a node (hashconsed) and returns its class.
    pub fn add(&mut self, node: ENode) -> Id {
        debug_assert!(
            node.op.accepts_arity(node.children.len()),
            "bad arity for {node:?}"
        );
        let node = self.canonicalize(&node);
        if let Some(&id) = self.memo.get(&node) {
            return self.find(id);
        }
        let id = self.unionfind.make_set();
        let data = self.make(&node);
        for &c in &node.children {
            self.class_mut(c).parents.push((node.clone(), id));
        }
        self.classes.push(Some(EClass {
            id,
            nodes: vec![node.clone()],
            data,
            parents: Vec::new(),
        }));
        self.memo.insert(node, id);
        self.nodes_added += 1;
        self.modify(id)
            .expect("a fresh class agrees with the literal of its own constant");
        self.find(id)
    }

    /// Adds every subterm bottom-up; returns the class of the root.
    pub fn add_term(&mut self, term: &Term) -> Id {
        let children: Vec<Id> = term.children.iter().map(|c| self.add_term(c)).collect();
        self.add(ENode::new(term.op, children))
    }

    /// Constant folding hook: a scalar class with a known value also holds
    /// the corresponding literal.
    fn modify(&mut self, id: Id) -> Result<(), EGraphError> {
        let class = self.class(id);
        let Some(v) = class.data.const_val else {
            return Ok(());
        };
        if !class.data.is_scalar() {
            return Ok(());
        }
        if class.nodes.iter().any(|n| n.op.as_num().is_some()) {
            return Ok(());
        }
        let lit = self.add(ENode::leaf(Op::num(v)));
        self.union(id, lit)?;
        Ok(())
    }

    /// Merges two classes. Returns whether anything changed.
    pub fn union(&mut self, a: Id, b: Id) -> Result<bool, EGraphError> {
        let (a, b) = (self.find_mut(a), self.find_mut(b));
        if a == b {
            return Ok(false);
        }
        let (ca, cb) = (self.class(a), self.class(b));
        let (joined, changed_a, changed_b) =
            analysis::join(&ca.data, &cb.data).map_err(|c| EGraphError::UnsoundMerge {
                a,
                b,
                left: c.0,
                right: c.1,
            })?;
        // the class with more parents stays root: fewer entries to re-canonicalize
        let (root, child, changed_root, changed_child) =
            if ca.parents.len() + ca.nodes.len() >= cb.parents.len() + cb.nodes.len() {
                (a, b, changed_a, changed_b)
            } else {
                (b, a, changed_b, changed_a)
            };
        self.unionfind.union(root, child);
        self.merges += 1;
        let absorbed = self.classes[child.index()]
            .take()
            .expect("child was canonical");
        self.pending.extend(absorbed.parents.iter().cloned());
        if changed_child {
            self.analysis_pending
                .extend(absorbed.parents.iter().cloned());
        }
        let root_class = self.classes[root.index()]
            .as_mut()
            .expect("root is canonical");
        if changed_root {
            self.analysis_pending
                .extend(root_class.parents.iter().cloned());
        }
        root_class.nodes.extend(absorbed.nodes);
        root_class.parents.extend(absorbed.parents);
        root_class.data = joined;
        self.modify(root)?;
        Ok(true)
    }

    /// Restores hashcons, congruence and analysis invariants.
    pub fn rebuild(&mut self) -> Result<RebuildReport, EGraphError> {
        let mut repairs = 0;
        while !self.is_clean() {
            while let Some((node, class)) = self.pending.pop() {
                let node = self.canonicalize(&node);
                let class = self.find_mut(class);
                if let Some(old) = self.memo.insert(node, class) {
                    if self.union(old, class)? {
                        repairs += 1;
                    }
                }
            }
            while let Some((node, class)) = self.analysis_pending.pop() {
                let class = self.find_mut(class);
                let node_data = self.make(&self.canonicalize(&node));
                let current = self.class(class).data;
                let (joined, changed, _) = analysis::join(&current, &node_data).map_err(|c| {
                    EGraphError::UnsoundMerge {
                        a: class,
                        b: class,
                        left: c.0,
                        right: c.1,
                    }
                })?;
                if changed {
                    repairs += 1;
                    let cls = self.class_mut(class);
                    cls.data = joined;
                    let parents = cls.parents.clone();
                    self.analysis_pending.extend(parents);
                    self.modify(class)?;
                }
            }
        }
        self.rebuild_classes();
        Ok(RebuildReport {
            repairs,
            classes: self.num_classes(),
            nodes: self.total_nodes(),
        })
    }

    fn rebuild_classes(&mut self) {
        let uf = &self.unionfind;
        let canon = |n: &ENode| ENode {
            op: n.op,
            children: n.children.iter().map(|&c| uf.find(c)).collect(),
        };
        // Congruence is already repaired, so distinct keys can only collapse
        // onto the same class. Pruned nodes stay in the memo: re-adding one
        // must find its class rather than grow the graph.
        let stale = std::mem::take(&mut self.memo);
        for (n, id) in stale {
            let (n, id) = (canon(&n), uf.find(id));
            let prev = self.memo.insert(n, id);
            debug_assert!(prev.is_none_or(|p| p == id), "congruence left unrepaired");
        }
        for class in self.classes.iter_mut().flatten() {
            for n in class.nodes.iter_mut() {
                *n = canon(n);
            }
            class.nodes.sort_unstable();
            class.nodes.dedup();
            // a scalar class with a known value is represented by its literal
            if class.data.is_scalar() && class.data.const_val.is_some() {
                class.nodes.retain(ENode::is_leaf);
            }
            for (n, id) in class.parents.iter_mut() {
                *n = canon(n);
                *id = uf.find(*id);
            }
            class.parents.sort_unstable();
            class.parents.dedup();
            for n in &class.nodes {
                self.memo.insert(n.clone(), class.id);
            }
        }
    }

    /// Cheapest term in the class of `id`.
    pub fn extract_term(&self, id: Id) -> Result<Term, EGraphError> {
        Extractor::new(self).extract(id)
    }

    /// Stable per-class dump, in id order.
    pub fn dump(&self) -> Vec<ClassDump> {
        self.classes()
            .map(|c| ClassDump {
                id: c.id.0,
                type_hint: c.data.type_hint,
                const_val: c.data.const_val,
                nodes: c
                    .nodes
                    .iter()
                    .map(|n| self.canonicalize(n).to_string())
                    .collect(),
            })
            .collect()
    }

    /// Checks the post-rebuild invariants; intended for tests.
    pub fn check_invariants(&self) -> Result<(), String> {
        if !self.is_clean() {
            return Err("graph has pending repairs".into());
        }
        let mut seen: HashMap<ENode, Id> = HashMap::new();
        for class in self.classes() {
            if self.find(class.id) != class.id {
                return Err(format!("class {} is not canonical", class.id));
            }
            let mut expected: Option<AnalysisData> = None;
            for n in &class.nodes {
                let canon = self.canonicalize(n);
                if &canon != n {
                    return Err(format!("node {n} in class {} is not canonical", class.id));
                }
                if let Some(other) = seen.insert(canon.clone(), class.id) {
                    return Err(format!(
                        "node {canon} appears in classes {other} and {}",
                        class.id
                    ));
                }
                match self.memo.get(&canon) {
                    Some(&m) if self.find(m) == class.id => {}
                    _ => return Err(format!("hashcons does not map {canon} to {}", class.id)),
                }
                let d = self.make(n);
                expected = Some(match expected {
                    None => d,
                    Some(e) => {
                        analysis::join(&e, &d)
                            .map_err(|c| {
                                format!("class {} holds conflicting constants {c:?}", class.id)
                            })?
                            .0
                    }
                });
            }
            let expected = expected.ok_or_else(|| format!("class {} is empty", class.id))?;
            if expected.type_hint != class.data.type_hint
                || expected.const_val.is_some() != class.data.const_val.is_some()
            {
                return Err(format!(
                    "class {} data {:?} is not the join of its nodes ({expected:?})",
                    class.id, class.data
                ));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn leaf(g: &mut EGraph, name: &str) -> Id {
        g.add(ENode::leaf(Op::element(name)))
    }

    fn num(g: &mut EGraph, v: f64) -> Id {
        g.add(ENode::leaf(Op::num(v)))
    }

    fn f(g: &mut EGraph, op: Op, children: &[Id]) -> Id {
        g.add(ENode::new(op, children.iter().copied()))
    }

    #[test]
    fn folding_injects_literal() {
        let mut g = EGraph::new();
        let one = num(&mut g, 1.0);
        let sum = f(&mut g, Op::Add, &[one, one]);
        g.rebuild().unwrap();
        assert_eq!(g.data(sum).const_val, Some(2.0));
        assert_eq!(g.lookup(&ENode::leaf(Op::num(2.0))), Some(g.find(sum)));
        g.check_invariants().unwrap();
    }

    #[test]
    fn hashcons_identity() {
        let mut g = EGraph::new();
        let a = leaf(&mut g, "i");
        let b = leaf(&mut g, "i");
        assert_eq!(a, b);
    }

    #[test]
    fn no_folding_without_constants() {
        let mut g = EGraph::new();
        let a = leaf(&mut g, "a");
        let na = f(&mut g, Op::Neg, &[a]);
        let root = f(&mut g, Op::Add, &[a, na]);
        g.rebuild().unwrap();
        assert_eq!(g.num_classes(), 3);
        assert_eq!(g.data(root).const_val, None);
    }

    #[test]
    fn merge_semantics() {
        let mut g = EGraph::new();
        let x = leaf(&mut g, "x");
        let before = (g.merges(), g.nodes_added());
        assert!(!g.union(x, x).unwrap());
        assert_eq!((g.merges(), g.nodes_added()), before);

        let one = num(&mut g, 1.0);
        let two_a = f(&mut g, Op::Add, &[one, one]);
        let two_b = f(&mut g, Op::Mul, &[two_a, one]);
        g.union(two_a, two_b).unwrap();
        g.rebuild().unwrap();
        assert_eq!(g.data(two_a).const_val, Some(2.0));

        let err = g.union(one, two_a).unwrap_err();
        assert!(matches!(err, EGraphError::UnsoundMerge { .. }));
    }

    #[test]
    fn congruence_after_merge() {
        let mut g = EGraph::new();
        let a = leaf(&mut g, "a");
        let b = leaf(&mut g, "b");
        let fa = f(&mut g, Op::Neg, &[a]);
        let fb = f(&mut g, Op::Neg, &[b]);
        g.rebuild().unwrap();
        assert_ne!(g.find(fa), g.find(fb));
        g.union(a, b).unwrap();
        g.rebuild().unwrap();
        assert_eq!(g.find(fa), g.find(fb));
        g.check_invariants().unwrap();
    }

    #[test]
    fn transitive_congruence_chain() {
        let mut g = EGraph::new();
        let a = leaf(&mut g, "a");
        let b = leaf(&mut g, "b");
        let ga = f(&mut g, Op::Neg, &[a]);
        let gb = f(&mut g, Op::Neg, &[b]);
        let ha = f(&mut g, Op::Not, &[ga]);
        let hb = f(&mut g, Op::Not, &[gb]);
        g.union(a, b).unwrap();
        g.rebuild().unwrap();
        assert_eq!(g.find(ha), g.find(hb));
        assert_eq!(g.num_classes(), 3);
    }

    #[test]
    fn clean_rebuild_does_nothing() {
        let mut g = EGraph::new();
        let a = leaf(&mut g, "a");
        f(&mut g, Op::Neg, &[a]);
        g.rebuild().unwrap();
        assert_eq!(g.rebuild().unwrap().repairs, 0);
    }

    #[test]
    fn constants_discovered_by_merge_propagate_up() {
        let mut g = EGraph::new();
        let x = leaf(&mut g, "x");
        let one = num(&mut g, 1.0);
        let sum = f(&mut g, Op::Add, &[x, one]);
        let three = num(&mut g, 3.0);
        g.union(x, three).unwrap();
        g.rebuild().unwrap();
        assert_eq!(g.data(sum).const_val, Some(4.0));
        assert_eq!(g.lookup(&ENode::leaf(Op::num(4.0))), Some(g.find(sum)));
        g.check_invariants().unwrap();
    }

    #[test]
    fn boolean_constants_get_no_literal() {
        let mut g = EGraph::new();
        let one = num(&mut g, 1.0);
        let two = num(&mut g, 2.0);
        let lt = f(&mut g, Op::Lt, &[one, two]);
        g.rebuild().unwrap();
        assert_eq!(g.data(lt).const_val, Some(1.0));
        assert_eq!(g.data(lt).type_hint, TypeHint::Boolean);
        assert_ne!(g.find(lt), g.find(one));
    }
}
