use std::collections::HashSet;
use std::fmt;

use super::{Expr, ProblemDef};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    /// JSON path of the offending node, e.g. `$.constraints[1].left.add[0]`.
    pub location: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev}: {}: {}", self.location, self.message)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Scalar,
    Bool,
    Cond,
}

struct Checker<'p> {
    problem: &'p ProblemDef,
    diags: Vec<Diagnostic>,
}

/// Binders (sum/prod indices and forall elements) enclosing the current
/// position. A binder may not shadow an enclosing one; siblings may reuse
/// a name.
#[derive(Default)]
struct Scope {
    live: Vec<String>,
}

impl<'p> Checker<'p> {
    fn error(&mut self, location: &str, message: impl Into<String>) {
        self.diags.push(Diagnostic {
            severity: Severity::Error,
            location: location.to_owned(),
            message: message.into(),
        });
    }

    fn warning(&mut self, location: &str, message: impl Into<String>) {
        self.diags.push(Diagnostic {
            severity: Severity::Warning,
            location: location.to_owned(),
            message: message.into(),
        });
    }

    fn expect(&mut self, got: Kind, want: Kind, path: &str) {
        let ok = got == want || (want == Kind::Bool && got == Kind::Cond);
        if !ok {
            let name = |k: Kind| match k {
                Kind::Scalar => "scalar",
                Kind::Bool => "boolean",
                Kind::Cond => "empty condition",
            };
            self.error(
                path,
                format!("expected a {} expression, found {}", name(want), name(got)),
            );
        }
    }

    fn open_binder(&mut self, scope: &mut Scope, name: &str, domain: &Expr, path: &str) {
        match self.problem.element(name) {
            None => self.error(path, format!("undeclared element `{name}`")),
            Some(decl) => {
                if decl.belong_to != *domain {
                    self.warning(
                        path,
                        format!("domain of `{name}` differs from its declaration"),
                    );
                }
            }
        }
        if scope.live.iter().any(|l| l == name) {
            self.error(
                path,
                format!("index `{name}` shadows an enclosing binder of the same name"),
            );
        }
        scope.live.push(name.to_owned());
    }

    fn indexed(
        &mut self,
        what: &str,
        name: &str,
        subscripts: &[Expr],
        declared: Option<usize>,
        scope: &mut Scope,
        path: &str,
    ) -> Kind {
        match declared {
            None => self.error(path, format!("undeclared {what} `{name}`")),
            Some(ndim) if ndim != subscripts.len() => self.error(
                path,
                format!(
                    "{what} `{name}` has {ndim} dimension(s) but {} subscript(s)",
                    subscripts.len()
                ),
            ),
            Some(_) => {}
        }
        for (k, s) in subscripts.iter().enumerate() {
            let p = format!("{path}.subscripts[{k}]");
            let got = self.walk(s, scope, &p);
            self.expect(got, Kind::Scalar, &p);
        }
        Kind::Scalar
    }

    fn binary(&mut self, a: &Expr, b: &Expr, want: Kind, scope: &mut Scope, path: &str) {
        for (k, e) in [a, b].into_iter().enumerate() {
            let p = format!("{path}[{k}]");
            let got = self.walk(e, scope, &p);
            self.expect(got, want, &p);
        }
    }

    fn unary(&mut self, a: &Expr, want: Kind, scope: &mut Scope, path: &str) {
        let got = self.walk(a, scope, path);
        self.expect(got, want, path);
    }

    fn walk(&mut self, e: &Expr, scope: &mut Scope, path: &str) -> Kind {
        match e {
            Expr::Num(v) => {
                if !v.is_finite() {
                    self.error(path, "non-finite number");
                }
                Kind::Scalar
            }
            Expr::Element(name) => {
                if !scope.live.iter().any(|n| n == name) {
                    if self.problem.element(name).is_some() {
                        self.error(path, format!("element `{name}` is not bound here"));
                    } else {
                        self.error(path, format!("undeclared element `{name}`"));
                    }
                }
                Kind::Scalar
            }
            Expr::Placeholder { name, subscripts } => {
                let ndim = self.problem.placeholder(name).map(|p| p.ndim);
                self.indexed(
                    "placeholder",
                    name,
                    subscripts,
                    ndim,
                    scope,
                    &format!("{path}.placeholder"),
                )
            }
            Expr::DecisionVar { name, subscripts } => {
                let ndim = self.problem.decision_var(name).map(|v| v.shape.len());
                self.indexed(
                    "decision variable",
                    name,
                    subscripts,
                    ndim,
                    scope,
                    &format!("{path}.var"),
                )
            }
            Expr::Add(a, b) => self.scalar2(a, b, scope, path, "add"),
            Expr::Mul(a, b) => self.scalar2(a, b, scope, path, "mul"),
            Expr::Pow(a, b) => self.scalar2(a, b, scope, path, "pow"),
            Expr::Min(a, b) => self.scalar2(a, b, scope, path, "min"),
            Expr::Max(a, b) => self.scalar2(a, b, scope, path, "max"),
            Expr::Neg(a) => {
                self.unary(a, Kind::Scalar, scope, &format!("{path}.neg"));
                Kind::Scalar
            }
            Expr::Recip(a) => {
                self.unary(a, Kind::Scalar, scope, &format!("{path}.recip"));
                Kind::Scalar
            }
            Expr::Not(a) => {
                self.unary(a, Kind::Bool, scope, &format!("{path}.not"));
                Kind::Bool
            }
            Expr::And(a, b) => {
                self.binary(a, b, Kind::Bool, scope, &format!("{path}.and"));
                Kind::Bool
            }
            Expr::Or(a, b) => {
                self.binary(a, b, Kind::Bool, scope, &format!("{path}.or"));
                Kind::Bool
            }
            Expr::Lt(a, b) => {
                self.binary(a, b, Kind::Scalar, scope, &format!("{path}.lt"));
                Kind::Bool
            }
            Expr::Le(a, b) => {
                self.binary(a, b, Kind::Scalar, scope, &format!("{path}.le"));
                Kind::Bool
            }
            Expr::CmpEq(a, b) => {
                self.binary(a, b, Kind::Scalar, scope, &format!("{path}.cmp_eq"));
                Kind::Bool
            }
            Expr::Sum(r) | Expr::Prod(r) => {
                let key = if matches!(e, Expr::Sum(_)) {
                    "sum"
                } else {
                    "prod"
                };
                let at = format!("{path}.{key}");
                let dpath = format!("{at}.domain");
                let got = self.walk(&r.domain, scope, &dpath);
                self.expect(got, Kind::Scalar, &dpath);
                self.open_binder(scope, &r.index, &r.domain, &format!("{at}.index"));
                let cpath = format!("{at}.condition");
                let got = self.walk(&r.condition, scope, &cpath);
                self.expect(got, Kind::Bool, &cpath);
                let opath = format!("{at}.operand");
                let got = self.walk(&r.operand, scope, &opath);
                self.expect(got, Kind::Scalar, &opath);
                scope.live.pop();
                Kind::Scalar
            }
            Expr::NoCond => Kind::Cond,
        }
    }

    fn scalar2(&mut self, a: &Expr, b: &Expr, scope: &mut Scope, path: &str, key: &str) -> Kind {
        self.binary(a, b, Kind::Scalar, scope, &format!("{path}.{key}"));
        Kind::Scalar
    }

    /// Shapes, bounds and element domains may only mention placeholders and constants.
    fn data_only(&mut self, e: &Expr, path: &str) {
        fn offending(e: &Expr) -> Option<String> {
            match e {
                Expr::Element(n) => Some(format!("element `{n}`")),
                Expr::DecisionVar { name, .. } => Some(format!("decision variable `{name}`")),
                Expr::Sum(_) | Expr::Prod(_) => Some("a reduction".to_owned()),
                _ => e.children().into_iter().find_map(offending),
            }
        }
        if let Some(what) = offending(e) {
            self.error(
                path,
                format!("{what} is not allowed here; use placeholders and constants"),
            );
            return;
        }
        let got = self.walk(e, &mut Scope::default(), path);
        self.expect(got, Kind::Scalar, path);
    }
}

/// Checks name resolution, arities, binder uniqueness and scalar/boolean
/// kinds. An empty result means the problem is well formed.
pub fn validate_problem(p: &ProblemDef) -> Vec<Diagnostic> {
    let mut c = Checker {
        problem: p,
        diags: Vec::new(),
    };

    let mut names = HashSet::new();
    let declared = p
        .placeholders
        .iter()
        .enumerate()
        .map(|(k, d)| (&d.name, format!("$.placeholders[{k}].name")))
        .chain(
            p.decision_vars
                .iter()
                .enumerate()
                .map(|(k, d)| (&d.name, format!("$.decision_vars[{k}].name"))),
        )
        .chain(
            p.elements
                .iter()
                .enumerate()
                .map(|(k, d)| (&d.name, format!("$.elements[{k}].name"))),
        )
        .collect::<Vec<_>>();
    for (name, path) in declared {
        if !names.insert(name.clone()) {
            c.error(&path, format!("duplicate declaration of `{name}`"));
        }
    }

    for (k, v) in p.decision_vars.iter().enumerate() {
        for (d, s) in v.shape.iter().enumerate() {
            c.data_only(s, &format!("$.decision_vars[{k}].shape[{d}]"));
        }
        if let Some(l) = &v.lower {
            c.data_only(l, &format!("$.decision_vars[{k}].lower"));
        }
        if let Some(u) = &v.upper {
            c.data_only(u, &format!("$.decision_vars[{k}].upper"));
        }
    }
    for (k, el) in p.elements.iter().enumerate() {
        c.data_only(&el.belong_to, &format!("$.elements[{k}].belong_to"));
    }

    let got = c.walk(&p.objective, &mut Scope::default(), "$.objective");
    c.expect(got, Kind::Scalar, "$.objective");

    let mut cnames = HashSet::new();
    for (k, con) in p.constraints.iter().enumerate() {
        let at = format!("$.constraints[{k}]");
        if !cnames.insert(con.name.clone()) {
            c.error(
                &format!("{at}.name"),
                format!("duplicate constraint name `{}`", con.name),
            );
        }
        let mut scope = Scope::default();
        for (b, (elem, domain)) in con.forall.iter().enumerate() {
            let dpath = format!("{at}.forall[{b}][1]");
            let got = c.walk(domain, &mut scope, &dpath);
            c.expect(got, Kind::Scalar, &dpath);
            c.open_binder(&mut scope, elem, domain, &format!("{at}.forall[{b}][0]"));
        }
        for (side, e) in [("left", &con.left), ("right", &con.right)] {
            let path = format!("{at}.{side}");
            let got = c.walk(e, &mut scope, &path);
            c.expect(got, Kind::Scalar, &path);
        }
    }
    c.diags
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        ConstraintDef, DecisionVarDecl, ElementDecl, ObjectiveSense, PlaceholderDecl, Sense,
        VarKind,
    };

    fn base() -> ProblemDef {
        let n = || Expr::placeholder("N", vec![]);
        let mut p = ProblemDef::new("p", ObjectiveSense::Minimize);
        p.placeholders.push(PlaceholderDecl {
            name: "N".into(),
            ndim: 0,
            dtype: None,
        });
        p.decision_vars.push(DecisionVarDecl {
            name: "x".into(),
            kind: VarKind::Binary,
            shape: vec![n()],
            lower: None,
            upper: None,
        });
        p.elements.push(ElementDecl {
            name: "i".into(),
            belong_to: n(),
        });
        p.constraints.push(ConstraintDef::new(
            "c1",
            Sense::Eq,
            Expr::sum("i", n(), None, Expr::var("x", vec![Expr::element("i")])),
            Expr::num(1.0),
        ));
        p
    }

    #[test]
    fn well_formed_is_clean() {
        assert!(validate_problem(&base()).is_empty());
    }

    #[test]
    fn undeclared_variable() {
        let mut p = base();
        p.constraints[0].right = Expr::var("y", vec![]);
        let d = validate_problem(&p);
        assert_eq!(d.len(), 1, "{d:?}");
        assert_eq!(d[0].severity, Severity::Error);
        assert_eq!(d[0].location, "$.constraints[0].right.var");
    }

    #[test]
    fn duplicate_constraint_names() {
        let mut p = base();
        p.constraints.push(p.constraints[0].clone());
        let d = validate_problem(&p);
        assert_eq!(d.len(), 1);
        assert!(d[0].message.contains("duplicate constraint name"));
    }

    #[test]
    fn subscript_arity() {
        let mut p = base();
        p.constraints[0].right = Expr::var("x", vec![]);
        let d = validate_problem(&p);
        assert!(d[0].message.contains("1 dimension(s) but 0 subscript(s)"));
    }

    #[test]
    fn unbound_element_and_rebinding() {
        let mut p = base();
        p.constraints[0].right = Expr::element("i");
        assert!(validate_problem(&p)[0].message.contains("not bound"));

        let mut p = base();
        p.constraints[0] = p.constraints[0]
            .clone()
            .forall("i", Expr::placeholder("N", vec![]));
        assert!(validate_problem(&p)[0].message.contains("shadows"));
    }

    #[test]
    fn kinds_are_checked() {
        let mut p = base();
        p.constraints[0].right = Expr::num(1.0).lt(Expr::num(2.0));
        assert!(validate_problem(&p)[0]
            .message
            .contains("expected a scalar"));
    }
}
