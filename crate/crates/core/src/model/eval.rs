//! Ground evaluation of expressions.
//!
//! Used to expand forall families against data and, in tests, as the
//! reference semantics that every rewrite rule has to preserve.

use super::{DataBindings, Expr, Reduction};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Scalar(f64),
    Bool(bool),
}

impl Value {
    pub fn as_scalar(self) -> Option<f64> {
        match self {
            Value::Scalar(v) => Some(v),
            Value::Bool(_) => None,
        }
    }

    pub fn as_bool(self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(b),
            Value::Scalar(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("no binding for `{0}`")]
    MissingBinding(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("result of {0} is not a finite real")]
    Domain(&'static str),
    #[error("expected a {expected} value in {context}")]
    KindMismatch {
        expected: &'static str,
        context: &'static str,
    },
    #[error("`{0}` must be a nonnegative integer, got {1}")]
    NotAnIndex(String, f64),
    #[error("index out of bounds for `{0}`")]
    OutOfBounds(String),
}

/// Assignment of elements, placeholders and decision variables.
#[derive(Debug, Clone, Default)]
pub struct Env<'a> {
    elements: Vec<(String, f64)>,
    placeholders: Option<&'a DataBindings>,
    vars: Option<&'a DataBindings>,
}

impl<'a> Env<'a> {
    pub fn new() -> Self {
        Env::default()
    }

    pub fn with_placeholders(mut self, data: &'a DataBindings) -> Self {
        self.placeholders = Some(data);
        self
    }

    pub fn with_vars(mut self, values: &'a DataBindings) -> Self {
        self.vars = Some(values);
        self
    }

    pub fn bind(mut self, element: &str, value: f64) -> Self {
        self.elements.push((element.to_owned(), value));
        self
    }

    pub(crate) fn push(&mut self, element: &str, value: f64) {
        self.elements.push((element.to_owned(), value));
    }

    pub(crate) fn pop(&mut self) {
        self.elements.pop();
    }

    fn element(&self, name: &str) -> Option<f64> {
        self.elements
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|&(_, v)| v)
    }
}

fn scalar(e: &Expr, env: &mut Env<'_>, context: &'static str) -> Result<f64, EvalError> {
    eval(e, env)?.as_scalar().ok_or(EvalError::KindMismatch {
        expected: "scalar",
        context,
    })
}

fn boolean(e: &Expr, env: &mut Env<'_>, context: &'static str) -> Result<bool, EvalError> {
    eval(e, env)?.as_bool().ok_or(EvalError::KindMismatch {
        expected: "boolean",
        context,
    })
}

fn as_index(name: &str, v: f64) -> Result<usize, EvalError> {
    if v < 0.0 || v.fract() != 0.0 {
        return Err(EvalError::NotAnIndex(name.to_owned(), v));
    }
    Ok(v as usize)
}

fn lookup(
    table: Option<&DataBindings>,
    name: &str,
    subscripts: &[Expr],
    env: &mut Env<'_>,
) -> Result<f64, EvalError> {
    let mut index = Vec::with_capacity(subscripts.len());
    for s in subscripts {
        index.push(as_index(name, scalar(s, env, "subscript")?)?);
    }
    let t = table
        .and_then(|d| d.get(name))
        .ok_or_else(|| EvalError::MissingBinding(name.to_owned()))?;
    t.get(&index)
        .ok_or_else(|| EvalError::OutOfBounds(name.to_owned()))
}

/// Evaluates the domain of a reduction or forall binding to its extent.
pub(crate) fn extent(domain: &Expr, env: &mut Env<'_>) -> Result<usize, EvalError> {
    let n = scalar(domain, env, "domain")?;
    as_index("domain", n)
}

fn reduce(
    r: &Reduction,
    env: &mut Env<'_>,
    init: f64,
    step: fn(f64, f64) -> f64,
) -> Result<f64, EvalError> {
    let n = extent(&r.domain, env)?;
    let mut acc = init;
    for k in 0..n {
        env.push(&r.index, k as f64);
        let admitted = match &r.condition {
            Expr::NoCond => Ok(true),
            c => boolean(c, env, "condition"),
        };
        let result = admitted.and_then(|ok| {
            if ok {
                scalar(&r.operand, env, "reduction operand").map(|v| step(acc, v))
            } else {
                Ok(acc)
            }
        });
        env.pop();
        acc = result?;
    }
    Ok(acc)
}

fn finite(v: f64, what: &'static str) -> Result<f64, EvalError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::Domain(what))
    }
}

fn eval(e: &Expr, env: &mut Env<'_>) -> Result<Value, EvalError> {
    use Value::{Bool, Scalar};
    Ok(match e {
        Expr::Num(v) => Scalar(*v),
        Expr::Element(n) => Scalar(
            env.element(n)
                .ok_or_else(|| EvalError::MissingBinding(n.clone()))?,
        ),
        Expr::Placeholder { name, subscripts } => {
            let table = env.placeholders;
            Scalar(lookup(table, name, subscripts, env)?)
        }
        Expr::DecisionVar { name, subscripts } => {
            let table = env.vars;
            Scalar(lookup(table, name, subscripts, env)?)
        }
        Expr::Add(a, b) => Scalar(scalar(a, env, "add")? + scalar(b, env, "add")?),
        Expr::Mul(a, b) => Scalar(scalar(a, env, "mul")? * scalar(b, env, "mul")?),
        Expr::Neg(a) => Scalar(-scalar(a, env, "neg")?),
        Expr::Recip(a) => {
            let v = scalar(a, env, "recip")?;
            if v == 0.0 {
                return Err(EvalError::DivisionByZero);
            }
            Scalar(1.0 / v)
        }
        Expr::Pow(a, b) => {
            let base = scalar(a, env, "pow")?;
            let exp = scalar(b, env, "pow")?;
            if base == 0.0 && exp < 0.0 {
                return Err(EvalError::DivisionByZero);
            }
            Scalar(finite(base.powf(exp), "pow")?)
        }
        Expr::Min(a, b) => Scalar(scalar(a, env, "min")?.min(scalar(b, env, "min")?)),
        Expr::Max(a, b) => Scalar(scalar(a, env, "max")?.max(scalar(b, env, "max")?)),
        Expr::Sum(r) => Scalar(reduce(r, env, 0.0, |acc, v| acc + v)?),
        Expr::Prod(r) => Scalar(reduce(r, env, 1.0, |acc, v| acc * v)?),
        Expr::And(a, b) => Bool(boolean(a, env, "and")? & boolean(b, env, "and")?),
        Expr::Or(a, b) => Bool(boolean(a, env, "or")? | boolean(b, env, "or")?),
        Expr::Not(a) => Bool(!boolean(a, env, "not")?),
        Expr::Lt(a, b) => Bool(scalar(a, env, "lt")? < scalar(b, env, "lt")?),
        Expr::Le(a, b) => Bool(scalar(a, env, "le")? <= scalar(b, env, "le")?),
        Expr::CmpEq(a, b) => Bool(scalar(a, env, "cmp_eq")? == scalar(b, env, "cmp_eq")?),
        Expr::NoCond => {
            return Err(EvalError::KindMismatch {
                expected: "scalar or boolean",
                context: "empty condition",
            })
        }
    })
}

/// Evaluates `e` under `env`. Reductions iterate their index over
/// `0..extent(domain)`, skipping indices whose condition is false.
pub fn eval_expr(e: &Expr, env: &Env<'_>) -> Result<Value, EvalError> {
    let mut scope = env.clone();
    eval(e, &mut scope)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Tensor;

    #[test]
    fn sum_over_index() {
        let e = Expr::sum("i", Expr::num(3.0), None, Expr::element("i"));
        assert_eq!(eval_expr(&e, &Env::new()), Ok(Value::Scalar(3.0)));
    }

    #[test]
    fn literal() {
        assert_eq!(
            eval_expr(&Expr::num(5.0), &Env::new()),
            Ok(Value::Scalar(5.0))
        );
    }

    #[test]
    fn boolean_connectives() {
        let e = Expr::num(1.0)
            .lt(Expr::num(2.0))
            .and(!Expr::num(0.0).cmp_eq(Expr::num(0.0)));
        assert_eq!(eval_expr(&e, &Env::new()), Ok(Value::Bool(false)));
    }

    #[test]
    fn conditional_sum_skips_indices() {
        // sum over i < 5 of i, keeping only i < 3: 0 + 1 + 2
        let e = Expr::sum(
            "i",
            Expr::num(5.0),
            Some(Expr::element("i").lt(Expr::num(3.0))),
            Expr::element("i"),
        );
        assert_eq!(eval_expr(&e, &Env::new()), Ok(Value::Scalar(3.0)));
    }

    #[test]
    fn placeholders_and_errors() {
        let data = DataBindings::new().with("a", Tensor::vector(vec![2.0, 4.0]));
        let env = Env::new().with_placeholders(&data).bind("k", 1.0);
        let e = Expr::placeholder("a", vec![Expr::element("k")]);
        assert_eq!(eval_expr(&e, &env), Ok(Value::Scalar(4.0)));

        let oob = Expr::placeholder("a", vec![Expr::num(7.0)]);
        assert!(matches!(
            eval_expr(&oob, &env),
            Err(EvalError::OutOfBounds(_))
        ));
        let missing = Expr::placeholder("b", vec![]);
        assert!(matches!(
            eval_expr(&missing, &env),
            Err(EvalError::MissingBinding(_))
        ));
        assert_eq!(
            eval_expr(&Expr::num(0.0).recip(), &env),
            Err(EvalError::DivisionByZero)
        );
        assert!(matches!(
            eval_expr(&(Expr::num(1.0) + Expr::num(1.0).lt(Expr::num(2.0))), &env),
            Err(EvalError::KindMismatch { .. })
        ));
    }
}
