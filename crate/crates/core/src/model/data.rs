use std::collections::BTreeMap;

use serde_json::{Map, Value};

use super::{DType, ModelError, ProblemDef};

/// Dense row-major tensor. A scalar has an empty shape and one value.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub shape: Vec<usize>,
    pub values: Vec<f64>,
}

impl Tensor {
    pub fn scalar(v: f64) -> Self {
        Tensor {
            shape: Vec::new(),
            values: vec![v],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Tensor {
            shape: vec![rows.len(), cols],
            values: rows.iter().flatten().copied().collect(),
        }
    }

    pub fn vector(values: Vec<f64>) -> Self {
        Tensor {
            shape: vec![values.len()],
            values,
        }
    }

    pub fn ndim(&self) -> usize {
        self.shape.len()
    }

    /// Looks up one entry; `None` when the index is out of bounds.
    pub fn get(&self, index: &[usize]) -> Option<f64> {
        if index.len() != self.shape.len() {
            return None;
        }
        let mut flat = 0usize;
        for (&i, &n) in index.iter().zip(&self.shape) {
            if i >= n {
                return None;
            }
            flat = flat * n + i;
        }
        self.values.get(flat).copied()
    }

    fn to_json(&self) -> Value {
        fn nest(shape: &[usize], values: &[f64]) -> Value {
            match shape.split_first() {
                None => num(values[0]),
                Some((&n, rest)) => {
                    let stride: usize = rest.iter().product();
                    Value::Array(
                        (0..n)
                            .map(|k| nest(rest, &values[k * stride..(k + 1) * stride]))
                            .collect(),
                    )
                }
            }
        }
        fn num(v: f64) -> Value {
            if v.fract() == 0.0 && v.abs() < 9.0e15 {
                Value::from(v as i64)
            } else {
                Value::from(v)
            }
        }
        nest(&self.shape, &self.values)
    }

    fn from_json(v: &Value, path: &str) -> Result<Tensor, ModelError> {
        fn shape_of(v: &Value, path: &str, shape: &mut Vec<usize>) -> Result<(), ModelError> {
            if let Some(items) = v.as_array() {
                shape.push(items.len());
                if let Some(first) = items.first() {
                    shape_of(first, &format!("{path}[0]"), shape)?;
                }
            }
            Ok(())
        }
        fn fill(
            v: &Value,
            shape: &[usize],
            path: &str,
            out: &mut Vec<f64>,
        ) -> Result<(), ModelError> {
            match shape.split_first() {
                None => {
                    let x = v.as_f64().ok_or_else(|| ModelError::Schema {
                        path: path.to_owned(),
                        message: "expected a number".into(),
                    })?;
                    if !x.is_finite() {
                        return Err(ModelError::NonFinite {
                            path: path.to_owned(),
                        });
                    }
                    out.push(x);
                    Ok(())
                }
                Some((&n, rest)) => {
                    let items = v.as_array().filter(|a| a.len() == n).ok_or_else(|| {
                        ModelError::Schema {
                            path: path.to_owned(),
                            message: format!("expected an array of length {n} (ragged tensor?)"),
                        }
                    })?;
                    for (k, item) in items.iter().enumerate() {
                        fill(item, rest, &format!("{path}[{k}]"), out)?;
                    }
                    Ok(())
                }
            }
        }
        let mut shape = Vec::new();
        shape_of(v, path, &mut shape)?;
        let mut values = Vec::with_capacity(shape.iter().product());
        fill(v, &shape, path, &mut values)?;
        Ok(Tensor { shape, values })
    }
}

/// Instance data: placeholder name → value.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DataBindings {
    pub values: BTreeMap<String, Tensor>,
}

impl DataBindings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, t: Tensor) -> Self {
        self.values.insert(name.to_owned(), t);
        self
    }

    pub fn get(&self, name: &str) -> Option<&Tensor> {
        self.values.get(name)
    }

    /// Checks that every bound placeholder is declared with a matching
    /// dimensionality and that integer placeholders hold integers.
    pub fn check_against(&self, p: &ProblemDef) -> Result<(), ModelError> {
        for (name, t) in &self.values {
            let path = format!("$.{name}");
            let decl = p.placeholder(name).ok_or_else(|| ModelError::Invalid {
                path: path.clone(),
                message: format!("`{name}` is not a declared placeholder"),
            })?;
            if decl.ndim != t.ndim() {
                return Err(ModelError::Invalid {
                    path,
                    message: format!(
                        "placeholder `{name}` has {} dimension(s), bound value has {}",
                        decl.ndim,
                        t.ndim()
                    ),
                });
            }
            if decl.dtype == Some(DType::Integer) && t.values.iter().any(|v| v.fract() != 0.0) {
                return Err(ModelError::Invalid {
                    path,
                    message: format!("placeholder `{name}` is integer-typed"),
                });
            }
        }
        Ok(())
    }
}

pub fn parse_data(text: &str) -> Result<DataBindings, ModelError> {
    let v: Value = serde_json::from_str(text)?;
    let obj = v.as_object().ok_or_else(|| ModelError::Schema {
        path: "$".into(),
        message: "data must be an object".into(),
    })?;
    let mut out = DataBindings::new();
    for (name, value) in obj {
        out.values.insert(
            name.clone(),
            Tensor::from_json(value, &format!("$.{name}"))?,
        );
    }
    Ok(out)
}

pub fn serialize_data(d: &DataBindings) -> String {
    let obj: Map<String, Value> = d
        .values
        .iter()
        .map(|(k, t)| (k.clone(), t.to_json()))
        .collect();
    serde_json::to_string(&Value::Object(obj)).expect("JSON values always serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nested_arrays_round_trip() {
        let d = parse_data(r#"{"N": 3, "d": [[0,9,1],[2,0,5],[4,1,0]]}"#).unwrap();
        assert_eq!(d.get("N").unwrap(), &Tensor::scalar(3.0));
        let m = d.get("d").unwrap();
        assert_eq!(m.shape, vec![3, 3]);
        assert_eq!(m.get(&[1, 2]), Some(5.0));
        assert_eq!(m.get(&[3, 0]), None);
        assert_eq!(parse_data(&serialize_data(&d)).unwrap(), d);
    }

    #[test]
    fn ragged_is_rejected() {
        let err = parse_data(r#"{"d": [[1,2],[3]]}"#).unwrap_err();
        assert_eq!(err.path(), Some("$.d[1]"));
    }
}
