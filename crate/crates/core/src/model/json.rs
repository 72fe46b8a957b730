use serde_json::{json, Map, Value};

use super::{
    canonical_num, validate_problem, ConstraintDef, DType, DecisionVarDecl, ElementDecl, Expr,
    ModelError, ObjectiveSense, PlaceholderDecl, ProblemDef, Reduction, Sense, Severity, VarKind,
};

fn schema(path: &str, message: impl Into<String>) -> ModelError {
    ModelError::Schema {
        path: path.to_owned(),
        message: message.into(),
    }
}

fn object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>, ModelError> {
    v.as_object()
        .ok_or_else(|| schema(path, "expected an object"))
}

fn array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>, ModelError> {
    v.as_array()
        .ok_or_else(|| schema(path, "expected an array"))
}

fn string<'a>(v: &'a Value, path: &str) -> Result<&'a str, ModelError> {
    v.as_str().ok_or_else(|| schema(path, "expected a string"))
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a Value, ModelError> {
    obj.get(key)
        .ok_or_else(|| schema(path, format!("missing field `{key}`")))
}

fn only_keys(obj: &Map<String, Value>, allowed: &[&str], path: &str) -> Result<(), ModelError> {
    match obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(schema(path, format!("unknown field `{k}`"))),
        None => Ok(()),
    }
}

fn identifier(v: &Value, path: &str) -> Result<String, ModelError> {
    let s = string(v, path)?;
    if s.is_empty() {
        return Err(schema(path, "identifier must be non-empty"));
    }
    Ok(s.to_owned())
}

fn pair(v: &Value, path: &str) -> Result<(Expr, Expr), ModelError> {
    let items = array(v, path)?;
    if items.len() != 2 {
        return Err(schema(
            path,
            format!("expected 2 operands, found {}", items.len()),
        ));
    }
    Ok((
        expr_from_json_at(&items[0], &format!("{path}[0]"))?,
        expr_from_json_at(&items[1], &format!("{path}[1]"))?,
    ))
}

fn expr_list(v: &Value, path: &str) -> Result<Vec<Expr>, ModelError> {
    array(v, path)?
        .iter()
        .enumerate()
        .map(|(k, e)| expr_from_json_at(e, &format!("{path}[{k}]")))
        .collect()
}

fn indexed(v: &Value, path: &str) -> Result<(String, Vec<Expr>), ModelError> {
    let obj = object(v, path)?;
    only_keys(obj, &["name", "subscripts"], path)?;
    let name = identifier(field(obj, "name", path)?, &format!("{path}.name"))?;
    let subscripts = match obj.get("subscripts") {
        Some(s) => expr_list(s, &format!("{path}.subscripts"))?,
        None => Vec::new(),
    };
    Ok((name, subscripts))
}

fn reduction(v: &Value, path: &str) -> Result<Reduction, ModelError> {
    let obj = object(v, path)?;
    only_keys(obj, &["index", "domain", "condition", "operand"], path)?;
    let index = identifier(field(obj, "index", path)?, &format!("{path}.index"))?;
    let domain = expr_from_json_at(field(obj, "domain", path)?, &format!("{path}.domain"))?;
    let condition = match obj.get("condition") {
        None | Some(Value::Null) => Expr::NoCond,
        Some(c) => expr_from_json_at(c, &format!("{path}.condition"))?,
    };
    let operand = expr_from_json_at(field(obj, "operand", path)?, &format!("{path}.operand"))?;
    Ok(Reduction {
        index,
        domain,
        condition,
        operand,
    })
}

fn boxed2(f: fn(Box<Expr>, Box<Expr>) -> Expr, (a, b): (Expr, Expr)) -> Expr {
    f(Box::new(a), Box::new(b))
}

/// Parses one expression, desugaring `sub` and `div`.
pub fn expr_from_json(v: &Value) -> Result<Expr, ModelError> {
    expr_from_json_at(v, "$")
}

pub(crate) fn expr_from_json_at(v: &Value, path: &str) -> Result<Expr, ModelError> {
    let obj = object(v, path)?;
    if obj.len() != 1 {
        return Err(schema(
            path,
            "expression must be an object with exactly one key",
        ));
    }
    let (key, body) = obj.iter().next().expect("one entry");
    let at = format!("{path}.{key}");
    let e = match key.as_str() {
        "num" => {
            let x = body
                .as_f64()
                .ok_or_else(|| schema(&at, "expected a number"))?;
            if !x.is_finite() {
                return Err(ModelError::NonFinite { path: at });
            }
            Expr::Num(canonical_num(x))
        }
        "element" => Expr::Element(identifier(body, &at)?),
        "placeholder" => {
            let (name, subscripts) = indexed(body, &at)?;
            Expr::Placeholder { name, subscripts }
        }
        "var" => {
            let (name, subscripts) = indexed(body, &at)?;
            Expr::DecisionVar { name, subscripts }
        }
        "add" => boxed2(Expr::Add, pair(body, &at)?),
        "mul" => boxed2(Expr::Mul, pair(body, &at)?),
        "pow" => boxed2(Expr::Pow, pair(body, &at)?),
        "and" => boxed2(Expr::And, pair(body, &at)?),
        "or" => boxed2(Expr::Or, pair(body, &at)?),
        "min" => boxed2(Expr::Min, pair(body, &at)?),
        "max" => boxed2(Expr::Max, pair(body, &at)?),
        "lt" => boxed2(Expr::Lt, pair(body, &at)?),
        "le" => boxed2(Expr::Le, pair(body, &at)?),
        "cmp_eq" => boxed2(Expr::CmpEq, pair(body, &at)?),
        "sub" => {
            let (a, b) = pair(body, &at)?;
            a - b
        }
        "div" => {
            let (a, b) = pair(body, &at)?;
            a / b
        }
        "neg" => Expr::Neg(Box::new(expr_from_json_at(body, &at)?)),
        "recip" => Expr::Recip(Box::new(expr_from_json_at(body, &at)?)),
        "not" => Expr::Not(Box::new(expr_from_json_at(body, &at)?)),
        "sum" => Expr::Sum(Box::new(reduction(body, &at)?)),
        "prod" => Expr::Prod(Box::new(reduction(body, &at)?)),
        other => return Err(schema(path, format!("unknown expression kind `{other}`"))),
    };
    Ok(e)
}

/// Canonical JSON form of an expression. `NoCond` is written as `null`.
pub fn expr_to_json(e: &Expr) -> Value {
    fn two(key: &str, a: &Expr, b: &Expr) -> Value {
        json!({ key: [expr_to_json(a), expr_to_json(b)] })
    }
    fn red(key: &str, r: &Reduction) -> Value {
        json!({ key: {
            "index": r.index,
            "domain": expr_to_json(&r.domain),
            "condition": expr_to_json(&r.condition),
            "operand": expr_to_json(&r.operand),
        }})
    }
    fn list(items: &[Expr]) -> Value {
        Value::Array(items.iter().map(expr_to_json).collect())
    }
    match e {
        Expr::Num(v) => json!({ "num": canonical_num(*v) }),
        Expr::Element(n) => json!({ "element": n }),
        Expr::Placeholder { name, subscripts } => {
            json!({ "placeholder": { "name": name, "subscripts": list(subscripts) } })
        }
        Expr::DecisionVar { name, subscripts } => {
            json!({ "var": { "name": name, "subscripts": list(subscripts) } })
        }
        Expr::Add(a, b) => two("add", a, b),
        Expr::Mul(a, b) => two("mul", a, b),
        Expr::Pow(a, b) => two("pow", a, b),
        Expr::And(a, b) => two("and", a, b),
        Expr::Or(a, b) => two("or", a, b),
        Expr::Min(a, b) => two("min", a, b),
        Expr::Max(a, b) => two("max", a, b),
        Expr::Lt(a, b) => two("lt", a, b),
        Expr::Le(a, b) => two("le", a, b),
        Expr::CmpEq(a, b) => two("cmp_eq", a, b),
        Expr::Neg(a) => json!({ "neg": expr_to_json(a) }),
        Expr::Recip(a) => json!({ "recip": expr_to_json(a) }),
        Expr::Not(a) => json!({ "not": expr_to_json(a) }),
        Expr::Sum(r) => red("sum", r),
        Expr::Prod(r) => red("prod", r),
        Expr::NoCond => Value::Null,
    }
}

fn sense_from(v: &Value, path: &str) -> Result<Sense, ModelError> {
    match string(v, path)? {
        "eq" => Ok(Sense::Eq),
        "le" => Ok(Sense::Le),
        "ge" => Ok(Sense::Ge),
        other => Err(schema(path, format!("unknown constraint sense `{other}`"))),
    }
}

fn opt_expr(obj: &Map<String, Value>, key: &str, path: &str) -> Result<Option<Expr>, ModelError> {
    match obj.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => expr_from_json_at(v, &format!("{path}.{key}")).map(Some),
    }
}

fn placeholder_decl(v: &Value, path: &str) -> Result<PlaceholderDecl, ModelError> {
    let obj = object(v, path)?;
    only_keys(obj, &["name", "ndim", "dtype"], path)?;
    let name = identifier(field(obj, "name", path)?, &format!("{path}.name"))?;
    let ndim = match obj.get("ndim") {
        None => 0,
        Some(n) => n
            .as_u64()
            .ok_or_else(|| schema(&format!("{path}.ndim"), "expected a nonnegative integer"))?
            as usize,
    };
    let dtype = match obj.get("dtype") {
        None | Some(Value::Null) => None,
        Some(d) => Some(match string(d, &format!("{path}.dtype"))? {
            "integer" => DType::Integer,
            "float" => DType::Float,
            other => {
                return Err(schema(
                    &format!("{path}.dtype"),
                    format!("unknown dtype `{other}`"),
                ))
            }
        }),
    };
    Ok(PlaceholderDecl { name, ndim, dtype })
}

fn var_decl(v: &Value, path: &str) -> Result<DecisionVarDecl, ModelError> {
    let obj = object(v, path)?;
    only_keys(obj, &["name", "kind", "shape", "lower", "upper"], path)?;
    let name = identifier(field(obj, "name", path)?, &format!("{path}.name"))?;
    let kind_path = format!("{path}.kind");
    let kind = match string(field(obj, "kind", path)?, &kind_path)? {
        "binary" => VarKind::Binary,
        "integer" => VarKind::Integer,
        "continuous" => VarKind::Continuous,
        other => {
            return Err(schema(
                &kind_path,
                format!("unknown variable kind `{other}`"),
            ))
        }
    };
    let shape = match obj.get("shape") {
        None => Vec::new(),
        Some(s) => expr_list(s, &format!("{path}.shape"))?,
    };
    Ok(DecisionVarDecl {
        name,
        kind,
        shape,
        lower: opt_expr(obj, "lower", path)?,
        upper: opt_expr(obj, "upper", path)?,
    })
}

fn element_decl(v: &Value, path: &str) -> Result<ElementDecl, ModelError> {
    let obj = object(v, path)?;
    only_keys(obj, &["name", "belong_to"], path)?;
    Ok(ElementDecl {
        name: identifier(field(obj, "name", path)?, &format!("{path}.name"))?,
        belong_to: expr_from_json_at(field(obj, "belong_to", path)?, &format!("{path}.belong_to"))?,
    })
}

fn constraint_def(v: &Value, path: &str) -> Result<ConstraintDef, ModelError> {
    let obj = object(v, path)?;
    only_keys(obj, &["name", "sense", "left", "right", "forall"], path)?;
    let name = identifier(field(obj, "name", path)?, &format!("{path}.name"))?;
    let sense = sense_from(field(obj, "sense", path)?, &format!("{path}.sense"))?;
    let left = expr_from_json_at(field(obj, "left", path)?, &format!("{path}.left"))?;
    let right = expr_from_json_at(field(obj, "right", path)?, &format!("{path}.right"))?;
    let mut forall = Vec::new();
    if let Some(f) = obj.get("forall") {
        let fpath = format!("{path}.forall");
        for (k, binding) in array(f, &fpath)?.iter().enumerate() {
            let bpath = format!("{fpath}[{k}]");
            let items = array(binding, &bpath)?;
            if items.len() != 2 {
                return Err(schema(&bpath, "forall binding must be [element, domain]"));
            }
            forall.push((
                identifier(&items[0], &format!("{bpath}[0]"))?,
                expr_from_json_at(&items[1], &format!("{bpath}[1]"))?,
            ));
        }
    }
    Ok(ConstraintDef {
        name,
        sense,
        left,
        right,
        forall,
    })
}

fn decl_list<T>(
    obj: &Map<String, Value>,
    key: &str,
    f: fn(&Value, &str) -> Result<T, ModelError>,
) -> Result<Vec<T>, ModelError> {
    match obj.get(key) {
        None => Ok(Vec::new()),
        Some(v) => {
            let path = format!("$.{key}");
            array(v, &path)?
                .iter()
                .enumerate()
                .map(|(k, item)| f(item, &format!("{path}[{k}]")))
                .collect()
        }
    }
}

/// Structural decoding only; no name resolution.
pub fn problem_from_json(v: &Value) -> Result<ProblemDef, ModelError> {
    let obj = object(v, "$")?;
    only_keys(
        obj,
        &[
            "name",
            "sense",
            "placeholders",
            "decision_vars",
            "elements",
            "objective",
            "constraints",
        ],
        "$",
    )?;
    let name = identifier(field(obj, "name", "$")?, "$.name")?;
    let sense = match obj.get("sense") {
        None => ObjectiveSense::Minimize,
        Some(s) => match string(s, "$.sense")? {
            "minimize" => ObjectiveSense::Minimize,
            "maximize" => ObjectiveSense::Maximize,
            other => return Err(schema("$.sense", format!("unknown sense `{other}`"))),
        },
    };
    let objective = match obj.get("objective") {
        None => Expr::num(0.0),
        Some(o) => expr_from_json_at(o, "$.objective")?,
    };
    Ok(ProblemDef {
        name,
        sense,
        placeholders: decl_list(obj, "placeholders", placeholder_decl)?,
        decision_vars: decl_list(obj, "decision_vars", var_decl)?,
        elements: decl_list(obj, "elements", element_decl)?,
        objective,
        constraints: decl_list(obj, "constraints", constraint_def)?,
    })
}

/// Parses and validates a problem document.
pub fn parse_problem(text: &str) -> Result<ProblemDef, ModelError> {
    let value: Value = serde_json::from_str(text)?;
    let problem = problem_from_json(&value)?;
    if let Some(d) = validate_problem(&problem)
        .into_iter()
        .find(|d| d.severity == Severity::Error)
    {
        return Err(ModelError::Invalid {
            path: d.location,
            message: d.message,
        });
    }
    Ok(problem)
}

pub fn problem_to_json(p: &ProblemDef) -> Value {
    let opt = |e: &Option<Expr>| e.as_ref().map(expr_to_json).unwrap_or(Value::Null);
    let placeholders: Vec<Value> = p
        .placeholders
        .iter()
        .map(|d| {
            let mut m = Map::new();
            m.insert("name".into(), json!(d.name));
            m.insert("ndim".into(), json!(d.ndim));
            if let Some(t) = d.dtype {
                let s = match t {
                    DType::Integer => "integer",
                    DType::Float => "float",
                };
                m.insert("dtype".into(), json!(s));
            }
            Value::Object(m)
        })
        .collect();
    let vars: Vec<Value> = p
        .decision_vars
        .iter()
        .map(|d| {
            let mut m = Map::new();
            m.insert("name".into(), json!(d.name));
            m.insert("kind".into(), json!(d.kind.as_str()));
            m.insert(
                "shape".into(),
                Value::Array(d.shape.iter().map(expr_to_json).collect()),
            );
            if d.lower.is_some() {
                m.insert("lower".into(), opt(&d.lower));
            }
            if d.upper.is_some() {
                m.insert("upper".into(), opt(&d.upper));
            }
            Value::Object(m)
        })
        .collect();
    let elements: Vec<Value> = p
        .elements
        .iter()
        .map(|e| json!({ "name": e.name, "belong_to": expr_to_json(&e.belong_to) }))
        .collect();
    let constraints: Vec<Value> = p
        .constraints
        .iter()
        .map(|c| {
            json!({
                "name": c.name,
                "sense": c.sense.as_str(),
                "left": expr_to_json(&c.left),
                "right": expr_to_json(&c.right),
                "forall": c.forall.iter().map(|(e, d)| json!([e, expr_to_json(d)])).collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({
        "name": p.name,
        "sense": match p.sense {
            ObjectiveSense::Minimize => "minimize",
            ObjectiveSense::Maximize => "maximize",
        },
        "placeholders": placeholders,
        "decision_vars": vars,
        "elements": elements,
        "objective": expr_to_json(&p.objective),
        "constraints": constraints,
    })
}

/// Pretty-printed canonical JSON.
pub fn serialize_problem(p: &ProblemDef) -> String {
    serde_json::to_string_pretty(&problem_to_json(p)).expect("JSON values always serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(text: &str) -> Result<Expr, ModelError> {
        expr_from_json(&serde_json::from_str(text).unwrap())
    }

    #[test]
    fn negative_zero_is_canonicalized() {
        let x = e(r#"{"num": -0.0}"#).unwrap();
        match x {
            Expr::Num(v) => {
                assert_eq!(v, 0.0);
                assert!(v.is_sign_positive());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn sub_and_div_desugar() {
        assert_eq!(
            e(r#"{"sub":[{"num":1.0},{"num":2.0}]}"#).unwrap(),
            Expr::Add(
                Box::new(Expr::Num(1.0)),
                Box::new(Expr::Neg(Box::new(Expr::Num(2.0))))
            )
        );
        assert_eq!(
            e(r#"{"div":[{"num":1.0},{"num":2.0}]}"#).unwrap(),
            Expr::Mul(
                Box::new(Expr::Num(1.0)),
                Box::new(Expr::Recip(Box::new(Expr::Num(2.0))))
            )
        );
    }

    #[test]
    fn errors_carry_paths() {
        let err = e(r#"{"add":[{"num":1.0},{"bogus":2}]}"#).unwrap_err();
        assert_eq!(err.path(), Some("$.add[1]"));
        let err = e(r#"{"mul":[{"num":1.0}]}"#).unwrap_err();
        assert_eq!(err.path(), Some("$.mul"));
        let err = e(r#"{"num":1.0,"element":"i"}"#).unwrap_err();
        assert_eq!(err.path(), Some("$"));
    }

    #[test]
    fn huge_literals_are_rejected() {
        // serde_json either refuses the literal or yields infinity; both must fail.
        assert!(serde_json::from_str::<Value>(r#"{"num": 1e999}"#)
            .map_err(ModelError::from)
            .and_then(|v| expr_from_json(&v))
            .is_err());
    }

    #[test]
    fn null_condition_is_nocond() {
        let x = e(r#"{"sum":{"index":"i","domain":{"num":3},"condition":null,"operand":{"element":"i"}}}"#)
            .unwrap();
        assert_eq!(x, Expr::sum("i", Expr::num(3.0), None, Expr::element("i")));
        assert_eq!(expr_from_json(&expr_to_json(&x)).unwrap(), x);
    }

    #[test]
    fn empty_problem_serializes_empty_constraints() {
        let p = ProblemDef::new("empty", ObjectiveSense::Minimize);
        let v = problem_to_json(&p);
        assert_eq!(v["constraints"], json!([]));
        assert_eq!(parse_problem(&serialize_problem(&p)).unwrap(), p);
    }
}
