use super::{EGraph, EGraphError, ENode, Id, Term};

/// Smallest-term extraction. Cost is the number of nodes; ties are broken
/// by operator order, then by the children's ids.
pub struct Extractor<'a> {
    egraph: &'a EGraph,
    best: Vec<Option<(usize, ENode)>>,
}

impl<'a> Extractor<'a> {
    pub fn new(egraph: &'a EGraph) -> Self {
        let mut best: Vec<Option<(usize, ENode)>> = vec![None; egraph.num_ids()];
        let mut changed = true;
        while changed {
            changed = false;
            for class in egraph.classes() {
                for node in &class.nodes {
                    let Some(cost) = node
                        .children
                        .iter()
                        .map(|&c| best[egraph.find(c).index()].as_ref().map(|b| b.0))
                        .try_fold(1usize, |acc, c| c.map(|c| acc.saturating_add(c)))
                    else {
                        continue;
                    };
                    let node = egraph.canonicalize(node);
                    let slot = &mut best[class.id.index()];
                    let better = match slot {
                        None => true,
                        Some((c, n)) => (cost, &node) < (*c, &*n),
                    };
                    if better {
                        *slot = Some((cost, node));
                        changed = true;
                    }
                }
            }
        }
        Extractor { egraph, best }
    }

    pub fn cost(&self, id: Id) -> Option<usize> {
        self.best[self.egraph.find(id).index()]
            .as_ref()
            .map(|b| b.0)
    }

    pub fn extract(&self, id: Id) -> Result<Term, EGraphError> {
        let root = self.egraph.find(id);
        let (_, node) = self.best[root.index()]
            .as_ref()
            .ok_or(EGraphError::ExtractionDiverged(root))?;
        let children = node
            .children
            .iter()
            .map(|&c| self.extract(c))
            .collect::<Result<_, _>>()?;
        Ok(Term::new(node.op, children))
    }
}

#[cfg(test)]
mod tests {
    use super::super::Op;
    use super::*;

    #[test]
    fn picks_smallest_representative() {
        let mut g = EGraph::new();
        let x = Term::leaf(Op::element("x"));
        let zero = Term::leaf(Op::num(0.0));
        let big = g.add_term(&Term::new(Op::Add, vec![x.clone(), zero]));
        let small = g.add_term(&x);
        g.union(big, small).unwrap();
        g.rebuild().unwrap();
        assert_eq!(g.extract_term(big).unwrap(), x);
    }

    #[test]
    fn ties_follow_operator_order() {
        let mut g = EGraph::new();
        let a = g.add_term(&Term::leaf(Op::element("a")));
        let n = g.add_term(&Term::leaf(Op::num(7.0)));
        g.union(a, n).unwrap();
        g.rebuild().unwrap();
        assert_eq!(g.extract_term(a).unwrap(), Term::leaf(Op::num(7.0)));
    }
}
