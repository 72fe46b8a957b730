use serde::Serialize;

use super::HintReport;
use crate::model::eval::extent;
use crate::model::{DataBindings, Env, EvalError, Expr};

/// Number of concrete constraints each hint kind covers.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct HintCounts {
    pub one_hot: usize,
    pub sos1_binary: usize,
    pub sos1_general: usize,
}

fn instances(forall: &[(String, Expr)], env: &mut Env<'_>) -> Result<usize, EvalError> {
    let Some(((element, domain), rest)) = forall.split_first() else {
        return Ok(1);
    };
    let n = extent(domain, env)?;
    let mut total = 0;
    for k in 0..n {
        env.push(element, k as f64);
        let r = instances(rest, env);
        env.pop();
        total += r?;
    }
    Ok(total)
}

/// Expands each hint's forall family against `data`. Inner domains may
/// depend on outer elements.
pub fn expand_hint_counts(r: &HintReport, data: &DataBindings) -> Result<HintCounts, EvalError> {
    let mut env = Env::new().with_placeholders(data);
    let mut count = |forall: &[(String, Expr)]| instances(forall, &mut env);
    let mut c = HintCounts::default();
    for h in &r.one_hot {
        c.one_hot += count(&h.forall)?;
    }
    for h in &r.sos1_binary {
        c.sos1_binary += count(&h.forall)?;
    }
    for h in &r.sos1_general {
        c.sos1_general += count(&h.binary.forall)?;
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detect::SumHint;
    use crate::model::Tensor;

    fn hint(forall: Vec<(String, Expr)>) -> SumHint {
        SumHint {
            constraint: "c".into(),
            var: "x".into(),
            index: "i".into(),
            domain: Expr::placeholder("N", vec![]),
            condition: None,
            subscripts: vec![],
            forall,
        }
    }

    #[test]
    fn nested_domains() {
        // j ranges over 0..i for i in 0..4: 0 + 1 + 2 + 3
        let r = HintReport {
            one_hot: vec![hint(vec![
                ("i".into(), Expr::num(4.0)),
                ("j".into(), Expr::element("i")),
            ])],
            ..HintReport::default()
        };
        let c = expand_hint_counts(&r, &DataBindings::new()).unwrap();
        assert_eq!(c.one_hot, 6);
    }

    #[test]
    fn empty_forall_counts_once_and_missing_data_errors() {
        let r = HintReport {
            sos1_binary: vec![hint(vec![])],
            one_hot: vec![hint(vec![("t".into(), Expr::placeholder("N", vec![]))])],
            ..HintReport::default()
        };
        let d = DataBindings::new().with("N", Tensor::scalar(0.0));
        assert_eq!(
            expand_hint_counts(&r, &d).unwrap(),
            HintCounts {
                one_hot: 0,
                sos1_binary: 1,
                sos1_general: 0
            }
        );
        assert!(matches!(
            expand_hint_counts(&r, &DataBindings::new()),
            Err(EvalError::MissingBinding(_))
        ));
    }
}
