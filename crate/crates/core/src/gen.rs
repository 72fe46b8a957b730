//! Generators for the two benchmark models: TSP and plant placement.
//!
//! The symbolic model is the same for every size; only the data grows.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{
    ConstraintDef, DType, DataBindings, DecisionVarDecl, ElementDecl, Expr, ObjectiveSense,
    PlaceholderDecl, ProblemDef, Sense, Tensor, VarKind,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GenError {
    #[error("{0} must be at least 1")]
    Size(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Tsp,
    Plant,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Tsp => "tsp",
            Kind::Plant => "plant",
        }
    }
}

fn ph(name: &str) -> Expr {
    Expr::placeholder(name, vec![])
}

fn el(name: &str) -> Expr {
    Expr::element(name)
}

fn placeholder(name: &str, ndim: usize, dtype: Option<DType>) -> PlaceholderDecl {
    PlaceholderDecl {
        name: name.into(),
        ndim,
        dtype,
    }
}

fn element(name: &str, belong_to: Expr) -> ElementDecl {
    ElementDecl {
        name: name.into(),
        belong_to,
    }
}

fn sq(e: Expr) -> Expr {
    e.pow(Expr::num(2.0))
}

/// TSP over `N` cities with binary `x[i,t]` (city `i` visited at time `t`).
/// `one_time` is deliberately written as `2 * sum_t x[i,t] - 1 == 1`.
pub fn tsp_model() -> ProblemDef {
    let n = || ph("N");
    let mut p = ProblemDef::new("TSP", ObjectiveSense::Minimize);
    p.placeholders = vec![
        placeholder("N", 0, Some(DType::Integer)),
        placeholder("d", 2, None),
    ];
    p.decision_vars = vec![DecisionVarDecl {
        name: "x".into(),
        kind: VarKind::Binary,
        shape: vec![n(), n()],
        lower: None,
        upper: None,
    }];
    p.elements = vec![element("i", n()), element("j", n()), element("t", n())];

    let x = |a: Expr, b: Expr| Expr::var("x", vec![a, b]);
    p.constraints = vec![
        ConstraintDef::new(
            "one_city",
            Sense::Eq,
            Expr::sum("i", n(), None, x(el("i"), el("t"))),
            Expr::num(1.0),
        )
        .forall("t", n()),
        ConstraintDef::new(
            "one_time",
            Sense::Eq,
            Expr::num(2.0) * Expr::sum("t", n(), None, x(el("i"), el("t"))) - Expr::num(1.0),
            Expr::num(1.0),
        )
        .forall("i", n()),
    ];

    // Tour length with wrap-around: steps t -> t+1 for t < N-1, then the
    // closing step N-1 -> 0.
    let last = n() - Expr::num(1.0);
    let step = Expr::sum(
        "t",
        n(),
        Some(el("t").lt(last.clone())),
        x(el("i"), el("t")) * x(el("j"), el("t") + Expr::num(1.0)),
    ) + x(el("i"), last) * x(el("j"), Expr::num(0.0));
    p.objective = Expr::sum(
        "i",
        n(),
        None,
        Expr::sum(
            "j",
            n(),
            None,
            Expr::placeholder("d", vec![el("i"), el("j")]) * step,
        ),
    );
    p
}

/// Rounded Euclidean distances between `n` random points in a 100x100 box.
pub fn tsp_data(n: usize, seed: u64) -> Result<DataBindings, GenError> {
    if n == 0 {
        return Err(GenError::Size("n"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<(f64, f64)> = (0..n)
        .map(|_| (rng.gen_range(0.0..100.0), rng.gen_range(0.0..100.0)))
        .collect();
    let rows: Vec<Vec<f64>> = pts
        .iter()
        .map(|a| {
            pts.iter()
                .map(|b| ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt().round())
                .collect()
        })
        .collect();
    Ok(DataBindings::new()
        .with("N", Tensor::scalar(n as f64))
        .with("d", Tensor::from_rows(&rows)))
}

/// Plant placement: open at most one plant on each side of `x = 50`,
/// ship `s[i,j]` from plant `i` to customer `j`.
pub fn plant_model() -> ProblemDef {
    let (n, m) = (|| ph("N"), || ph("M"));
    let at = |name: &str, k: &str| Expr::placeholder(name, vec![el(k)]);
    let delta = || Expr::var("delta", vec![el("i")]);
    let c = || Expr::var("c", vec![el("i")]);
    let s = || Expr::var("s", vec![el("i"), el("j")]);

    let mut p = ProblemDef::new("plant_placement", ObjectiveSense::Minimize);
    p.placeholders = vec![
        placeholder("N", 0, Some(DType::Integer)),
        placeholder("M", 0, Some(DType::Integer)),
        placeholder("x", 1, None),
        placeholder("y", 1, None),
        placeholder("cx", 1, None),
        placeholder("cy", 1, None),
        placeholder("C", 1, None),
        placeholder("d", 1, None),
    ];
    p.decision_vars = vec![
        DecisionVarDecl {
            name: "delta".into(),
            kind: VarKind::Binary,
            shape: vec![n()],
            lower: None,
            upper: None,
        },
        DecisionVarDecl {
            name: "c".into(),
            kind: VarKind::Continuous,
            shape: vec![n()],
            lower: Some(Expr::num(0.0)),
            upper: None,
        },
        DecisionVarDecl {
            name: "s".into(),
            kind: VarKind::Continuous,
            shape: vec![n(), m()],
            lower: Some(Expr::num(0.0)),
            upper: None,
        },
    ];
    p.elements = vec![element("i", n()), element("j", m())];

    let east = at("x", "i").lt(Expr::num(50.0));
    let west = Expr::num(50.0).le(at("x", "i"));
    p.constraints = vec![
        ConstraintDef::new(
            "sos1_east",
            Sense::Le,
            Expr::sum("i", n(), Some(east), delta()),
            Expr::num(1.0),
        ),
        ConstraintDef::new(
            "sos1_west",
            Sense::Le,
            Expr::sum("i", n(), Some(west), delta()),
            Expr::num(1.0),
        ),
        ConstraintDef::new("capacity", Sense::Le, c(), at("C", "i") * delta()).forall("i", n()),
        ConstraintDef::new(
            "demand",
            Sense::Eq,
            Expr::sum("i", n(), None, s()),
            at("d", "j"),
        )
        .forall("j", m()),
        ConstraintDef::new("supply", Sense::Eq, Expr::sum("j", m(), None, s()), c())
            .forall("i", n()),
    ];

    let dist =
        (sq(at("x", "i") - at("cx", "j")) + sq(at("y", "i") - at("cy", "j"))).pow(Expr::num(0.5));
    p.objective = Expr::sum("i", n(), None, Expr::sum("j", m(), None, s() * dist))
        + Expr::sum("i", n(), None, c());
    p
}

/// Plants and customers uniform in a 100x100 box; capacities in
/// [50, 150), demands in [5, 30), both integral.
pub fn plant_data(n: usize, m: usize, seed: u64) -> Result<DataBindings, GenError> {
    if n == 0 {
        return Err(GenError::Size("n"));
    }
    if m == 0 {
        return Err(GenError::Size("m"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coords = |k: usize| -> Vec<f64> {
        (0..k)
            .map(|_| (rng.gen_range(0.0..100.0_f64) * 100.0).round() / 100.0)
            .collect()
    };
    let (x, y, cx, cy) = (coords(n), coords(n), coords(m), coords(m));
    let cap: Vec<f64> = (0..n).map(|_| rng.gen_range(50..150) as f64).collect();
    let demand: Vec<f64> = (0..m).map(|_| rng.gen_range(5..30) as f64).collect();
    Ok(DataBindings::new()
        .with("N", Tensor::scalar(n as f64))
        .with("M", Tensor::scalar(m as f64))
        .with("x", Tensor::vector(x))
        .with("y", Tensor::vector(y))
        .with("cx", Tensor::vector(cx))
        .with("cy", Tensor::vector(cy))
        .with("C", Tensor::vector(cap))
        .with("d", Tensor::vector(demand)))
}

/// Model and data for one benchmark instance.
pub fn generate(
    kind: Kind,
    n: usize,
    m: usize,
    seed: u64,
) -> Result<(ProblemDef, DataBindings), GenError> {
    match kind {
        Kind::Tsp => Ok((tsp_model(), tsp_data(n, seed)?)),
        Kind::Plant => Ok((plant_model(), plant_data(n, m, seed)?)),
    }
}
