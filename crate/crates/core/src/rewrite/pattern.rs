use std::fmt;

use smallvec::SmallVec;

use crate::egraph::{EGraph, Id, Op};
use crate::symbol::Symbol;

/// Pattern variable, written `?name`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(Symbol);

impl Var {
    /// Accepts the name with or without the leading `?`.
    pub fn new(name: &str) -> Var {
        Var(Symbol::new(name.strip_prefix('?').unwrap_or(name)))
    }

    pub fn name(self) -> &'static str {
        self.0.as_str()
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "?{}", self.0)
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Pattern in tree form.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum PatTree {
    Var(Var),
    Node(Op, Vec<PatTree>),
}

impl PatTree {
    pub fn var(name: &str) -> PatTree {
        PatTree::Var(Var::new(name))
    }

    /// Variables in order of first occurrence (preorder).
    pub fn vars(&self) -> Vec<Var> {
        fn go(t: &PatTree, out: &mut Vec<Var>) {
            match t {
                PatTree::Var(v) => {
                    if !out.contains(v) {
                        out.push(*v)
                    }
                }
                PatTree::Node(_, cs) => cs.iter().for_each(|c| go(c, out)),
            }
        }
        let mut out = Vec::new();
        go(self, &mut out);
        out
    }

    pub fn size(&self) -> usize {
        match self {
            PatTree::Var(_) => 1,
            PatTree::Node(_, cs) => 1 + cs.iter().map(PatTree::size).sum::<usize>(),
        }
    }
}

impl fmt::Display for PatTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PatTree::Var(v) => write!(f, "{v}"),
            PatTree::Node(op, cs) if cs.is_empty() && *op != Op::List => write!(f, "{op}"),
            PatTree::Node(op, cs) => {
                write!(f, "({op}")?;
                for c in cs {
                    write!(f, " {c}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PatternError {
    #[error("`{op}` applied to {got} children")]
    Arity { op: String, got: usize },
    #[error("right-hand side uses {0}, which the left-hand side does not bind")]
    UnboundVar(Var),
}

/// Register of the matching machine.
pub type Reg = usize;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Instruction {
    /// For each node in the class held in `input` with this operator and
    /// arity, load its children into `out..out + arity`.
    Bind {
        op: Op,
        arity: usize,
        input: Reg,
        out: Reg,
    },
    /// Require two registers to hold the same class.
    Compare { a: Reg, b: Reg },
}

/// A compiled pattern. The root is matched against register 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pattern {
    program: Vec<Instruction>,
    /// Register of each variable's first occurrence.
    vars: Vec<(Var, Reg)>,
    registers: usize,
}

pub fn compile_pattern(tree: &PatTree) -> Result<Pattern, PatternError> {
    let mut p = Pattern {
        program: Vec::new(),
        vars: Vec::new(),
        registers: 1,
    };
    // Breadth-first over (subtree, register) so child registers of one
    // Bind are contiguous.
    let mut queue = std::collections::VecDeque::from([(tree, 0usize)]);
    while let Some((t, reg)) = queue.pop_front() {
        match t {
            PatTree::Var(v) => match p.vars.iter().find(|(w, _)| w == v) {
                Some(&(_, first)) => p.program.push(Instruction::Compare { a: reg, b: first }),
                None => p.vars.push((*v, reg)),
            },
            PatTree::Node(op, children) => {
                if !op.accepts_arity(children.len()) {
                    return Err(PatternError::Arity {
                        op: op.to_string(),
                        got: children.len(),
                    });
                }
                let out = p.registers;
                p.registers += children.len();
                p.program.push(Instruction::Bind {
                    op: *op,
                    arity: children.len(),
                    input: reg,
                    out,
                });
                for (k, c) in children.iter().enumerate() {
                    queue.push_back((c, out + k));
                }
            }
        }
    }
    Ok(p)
}

/// Variable → class assignment produced by a match, sorted by variable.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Subst(SmallVec<[(Var, Id); 4]>);

impl Subst {
    pub fn get(&self, v: Var) -> Option<Id> {
        self.0
            .binary_search_by(|(w, _)| w.cmp(&v))
            .ok()
            .map(|k| self.0[k].1)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Var, Id)> + '_ {
        self.0.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Var, Id)>) -> Subst {
        let mut v: SmallVec<[(Var, Id); 4]> = pairs.into_iter().collect();
        v.sort();
        v.dedup_by_key(|p| p.0);
        Subst(v)
    }
}

impl std::ops::Index<Var> for Subst {
    type Output = Id;

    fn index(&self, v: Var) -> &Id {
        let k = self
            .0
            .binary_search_by(|(w, _)| w.cmp(&v))
            .unwrap_or_else(|_| panic!("{v} is not bound"));
        &self.0[k].1
    }
}

impl fmt::Display for Subst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, (v, id)) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}: {id}")?;
        }
        f.write_str("}")
    }
}

impl Pattern {
    pub fn program(&self) -> &[Instruction] {
        &self.program
    }

    pub fn vars(&self) -> Vec<Var> {
        self.vars.iter().map(|&(v, _)| v).collect()
    }

    /// Number of non-variable pattern nodes.
    pub fn num_structural(&self) -> usize {
        self.program
            .iter()
            .filter(|i| matches!(i, Instruction::Bind { .. }))
            .count()
    }

    /// Decompiles back to the tree the pattern was compiled from.
    pub fn tree(&self) -> PatTree {
        let mut binds = vec![None; self.registers];
        let mut var_of = vec![None; self.registers];
        for &(v, r) in &self.vars {
            var_of[r] = Some(v);
        }
        for inst in &self.program {
            match *inst {
                Instruction::Bind {
                    op,
                    arity,
                    input,
                    out,
                } => binds[input] = Some((op, out, arity)),
                Instruction::Compare { a, b } => var_of[a] = var_of[b],
            }
        }
        fn build(r: Reg, binds: &[Option<(Op, Reg, usize)>], var_of: &[Option<Var>]) -> PatTree {
            match binds[r] {
                Some((op, out, arity)) => PatTree::Node(
                    op,
                    (out..out + arity)
                        .map(|c| build(c, binds, var_of))
                        .collect(),
                ),
                None => PatTree::Var(var_of[r].expect("every register is bound or a variable")),
            }
        }
        build(0, &binds, &var_of)
    }

    /// Matches rooted at `id`.
    pub fn search_class(&self, g: &EGraph, id: Id) -> Vec<Subst> {
        let mut regs = vec![Id::default(); self.registers];
        regs[0] = g.find(id);
        let mut out = Vec::new();
        self.step(g, 0, &mut regs, &mut out);
        out.sort();
        out.dedup();
        out
    }

    fn step(&self, g: &EGraph, pc: usize, regs: &mut Vec<Id>, out: &mut Vec<Subst>) {
        let Some(inst) = self.program.get(pc) else {
            out.push(Subst::from_pairs(
                self.vars.iter().map(|&(v, r)| (v, g.find(regs[r]))),
            ));
            return;
        };
        match *inst {
            Instruction::Compare { a, b } => {
                if g.find(regs[a]) == g.find(regs[b]) {
                    self.step(g, pc + 1, regs, out);
                }
            }
            Instruction::Bind {
                op,
                arity,
                input,
                out: base,
            } => {
                let class = g.class(regs[input]);
                // nodes are sorted after rebuild, so one operator is a run
                let start = class.nodes.partition_point(|n| n.op < op);
                for node in class.nodes[start..].iter().take_while(|n| n.op == op) {
                    if node.children.len() != arity {
                        continue;
                    }
                    for (k, &c) in node.children.iter().enumerate() {
                        regs[base + k] = c;
                    }
                    self.step(g, pc + 1, regs, out);
                }
            }
        }
    }
}

/// All matches of `p` in `g`, by root class in id order. Never mutates `g`;
/// expects a rebuilt graph.
pub fn search(g: &EGraph, p: &Pattern) -> Vec<(Id, Subst)> {
    let root_op = p.program.first().and_then(|i| match i {
        Instruction::Bind { op, .. } => Some(*op),
        Instruction::Compare { .. } => None,
    });
    let mut out = Vec::new();
    for class in g.classes() {
        if let Some(op) = root_op {
            if !class.nodes.iter().any(|n| n.op == op) {
                continue;
            }
        }
        for s in p.search_class(g, class.id) {
            out.push((class.id, s));
        }
    }
    out
}
