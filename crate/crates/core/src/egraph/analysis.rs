//! Per-class facts: an approximate type and, when known, a constant value.

use serde::Serialize;

use super::lang::{ENode, Op};
use crate::model::canonical_num;

/// Flat lattice of type approximations. `Unknown` is bottom, `Conflict`
/// is top, and any two distinct concrete hints join to `Conflict`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize)]
pub enum TypeHint {
    Unknown,
    Scalar,
    Boolean,
    IndexSet,
    SenseKind,
    ListKind,
    Conflict,
}

impl TypeHint {
    pub fn join(self, other: TypeHint) -> TypeHint {
        use TypeHint::*;
        match (self, other) {
            (Unknown, x) | (x, Unknown) => x,
            (a, b) if a == b => a,
            _ => Conflict,
        }
    }
}

/// Relative tolerance below which two folded constants count as equal.
pub const CONST_TOLERANCE: f64 = 1e-12;

/// Constants agree when they differ by at most `CONST_TOLERANCE` relative to
/// the larger magnitude, with magnitudes below 1 treated as 1.
pub fn consts_agree(a: f64, b: f64) -> bool {
    a.to_bits() == b.to_bits() || (a - b).abs() <= CONST_TOLERANCE * a.abs().max(b.abs()).max(1.0)
}

#[derive(Clone, Copy, PartialEq, Debug, Serialize)]
pub struct AnalysisData {
    pub type_hint: TypeHint,
    pub const_val: Option<f64>,
}

impl AnalysisData {
    pub fn is_scalar(&self) -> bool {
        self.type_hint == TypeHint::Scalar
    }
}

/// Two known constants that disagree.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstConflict(pub f64, pub f64);

/// Joins `b` into `a`. Returns the join and whether it differs from `a`
/// and from `b` respectively.
pub fn join(
    a: &AnalysisData,
    b: &AnalysisData,
) -> Result<(AnalysisData, bool, bool), ConstConflict> {
    let const_val = match (a.const_val, b.const_val) {
        (Some(x), Some(y)) => {
            if !consts_agree(x, y) {
                return Err(ConstConflict(x, y));
            }
            Some(x)
        }
        (x, y) => x.or(y),
    };
    let joined = AnalysisData {
        type_hint: a.type_hint.join(b.type_hint),
        const_val,
    };
    let differs = |d: &AnalysisData| {
        d.type_hint != joined.type_hint
            || d.const_val.map(f64::to_bits) != joined.const_val.map(f64::to_bits)
    };
    Ok((joined, differs(a), differs(b)))
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then(|| canonical_num(v))
}

fn truth(b: bool) -> Option<f64> {
    Some(if b { 1.0 } else { 0.0 })
}

/// Facts about a single node, given the facts of its children.
pub fn make(node: &ENode, child: impl Fn(usize) -> AnalysisData) -> AnalysisData {
    use Op::*;
    let type_hint = match node.op {
        Num(_) | Add | Mul | Neg | Recip | Pow | Sum | Prod | Min | Max => TypeHint::Scalar,
        Element(_) | Placeholder | DecisionVar => TypeHint::Scalar,
        And | Or | Not | Lt | Le | CmpEq => TypeHint::Boolean,
        ForallBind | List => TypeHint::ListKind,
        SenseEq | SenseLe | SenseGe => TypeHint::SenseKind,
        Name(_) | Kind(_) | NoCond | Constraint => TypeHint::Unknown,
    };
    let c = |k: usize| child(k).const_val;
    let const_val = match node.op {
        Num(v) => Some(v.get()),
        Add => c(0).zip(c(1)).and_then(|(a, b)| finite(a + b)),
        Mul => c(0).zip(c(1)).and_then(|(a, b)| finite(a * b)),
        Neg => c(0).map(|a| canonical_num(-a)),
        Recip => c(0).filter(|&a| a != 0.0).and_then(|a| finite(1.0 / a)),
        Pow => c(0)
            .zip(c(1))
            .filter(|&(a, b)| !(a == 0.0 && b < 0.0))
            .and_then(|(a, b)| finite(a.powf(b))),
        Min => c(0).zip(c(1)).map(|(a, b)| a.min(b)),
        Max => c(0).zip(c(1)).map(|(a, b)| a.max(b)),
        Lt => c(0).zip(c(1)).and_then(|(a, b)| truth(a < b)),
        Le => c(0).zip(c(1)).and_then(|(a, b)| truth(a <= b)),
        CmpEq => c(0).zip(c(1)).and_then(|(a, b)| truth(a == b)),
        _ => None,
    };
    AnalysisData {
        type_hint,
        const_val,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn hint() -> impl Strategy<Value = TypeHint> {
        prop_oneof![
            Just(TypeHint::Unknown),
            Just(TypeHint::Scalar),
            Just(TypeHint::Boolean),
            Just(TypeHint::IndexSet),
            Just(TypeHint::SenseKind),
            Just(TypeHint::ListKind),
            Just(TypeHint::Conflict),
        ]
    }

    proptest! {
        #[test]
        fn join_is_a_semilattice(a in hint(), b in hint(), c in hint()) {
            prop_assert_eq!(a.join(b), b.join(a));
            prop_assert_eq!(a.join(b).join(c), a.join(b.join(c)));
            prop_assert_eq!(a.join(a), a);
            prop_assert_eq!(TypeHint::Unknown.join(a), a);
            prop_assert_eq!(TypeHint::Conflict.join(a), TypeHint::Conflict);
        }
    }

    #[test]
    fn distinct_concrete_hints_conflict() {
        assert_eq!(TypeHint::Scalar.join(TypeHint::Boolean), TypeHint::Conflict);
    }

    #[test]
    fn constant_join() {
        let two = AnalysisData {
            type_hint: TypeHint::Scalar,
            const_val: Some(2.0),
        };
        let one = AnalysisData {
            const_val: Some(1.0),
            ..two
        };
        let unknown = AnalysisData {
            type_hint: TypeHint::Scalar,
            const_val: None,
        };
        assert_eq!(join(&two, &two).unwrap(), (two, false, false));
        assert_eq!(join(&unknown, &two).unwrap(), (two, true, false));
        assert_eq!(join(&one, &two), Err(ConstConflict(1.0, 2.0)));
        assert!(consts_agree(0.1 + 0.2, 0.3));
        assert!(!consts_agree(1.0, 1.0 + 1e-9));
    }
}
