use std::collections::HashSet;

use thiserror::Error;

use super::{Atom, Coord, Expr, JetVar};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContextError {
    #[error("at least one base variable and one field are required")]
    Empty,
    #[error("name `{0}` is declared twice")]
    Duplicate(String),
    #[error("name `{0}` is reserved")]
    Reserved(String),
    #[error("invalid identifier `{0}`")]
    InvalidName(String),
    #[error("argument `{arg}` of `{func}` is not a base or zero-order fiber coordinate")]
    BadArgument { func: String, arg: String },
    #[error("coordinate out of range: {0}")]
    OutOfRange(String),
    #[error("unknown opaque function `{0}`")]
    UnknownFunction(String),
    #[error("opaque function `{name}` expects {expected} arguments, got {got}")]
    Arity {
        name: String,
        expected: usize,
        got: usize,
    },
}

const RESERVED: &[&str] = &["sin", "cos", "exp", "log", "sqrt", "pi"];

/// Declared smooth coefficient function on `Y`, e.g. a metric entry `g(q1, q2)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpaqueDecl {
    pub name: String,
    pub args: Vec<Coord>,
}

/// Base variables `x^λ`, fields `y^i` and the opaque function catalog.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JetContext {
    base: Vec<String>,
    fields: Vec<String>,
    functions: Vec<OpaqueDecl>,
}

fn valid_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric())
}

impl JetContext {
    pub fn new<S: Into<String>>(
        base: impl IntoIterator<Item = S>,
        fields: impl IntoIterator<Item = S>,
    ) -> Result<Self, ContextError> {
        let base: Vec<String> = base.into_iter().map(Into::into).collect();
        let fields: Vec<String> = fields.into_iter().map(Into::into).collect();
        if base.is_empty() || fields.is_empty() {
            return Err(ContextError::Empty);
        }
        let mut seen = HashSet::new();
        for name in base.iter().chain(&fields) {
            if !valid_identifier(name) {
                return Err(ContextError::InvalidName(name.clone()));
            }
            if RESERVED.contains(&name.as_str()) {
                return Err(ContextError::Reserved(name.clone()));
            }
            if !seen.insert(name.clone()) {
                return Err(ContextError::Duplicate(name.clone()));
            }
        }
        Ok(JetContext {
            base,
            fields,
            functions: Vec::new(),
        })
    }

    /// Declares an opaque function whose arguments are named base or
    /// zero-order fiber coordinates.
    pub fn declare_function<S: AsRef<str>>(
        &mut self,
        name: &str,
        args: &[S],
    ) -> Result<(), ContextError> {
        if !valid_identifier(name) {
            return Err(ContextError::InvalidName(name.to_string()));
        }
        if RESERVED.contains(&name) {
            return Err(ContextError::Reserved(name.to_string()));
        }
        if self.base.iter().chain(&self.fields).any(|n| n == name)
            || self.functions.iter().any(|f| f.name == name)
        {
            return Err(ContextError::Duplicate(name.to_string()));
        }
        let args = args
            .iter()
            .map(|a| {
                let a = a.as_ref();
                if let Some(l) = self.base_index(a) {
                    Ok(Coord::Base(l))
                } else if let Some(i) = self.field_index(a) {
                    Ok(Coord::Jet(JetVar::base_value(i, self.n())))
                } else {
                    Err(ContextError::BadArgument {
                        func: name.to_string(),
                        arg: a.to_string(),
                    })
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        self.functions.push(OpaqueDecl {
            name: name.to_string(),
            args,
        });
        Ok(())
    }

    pub fn with_function<S: AsRef<str>>(
        mut self,
        name: &str,
        args: &[S],
    ) -> Result<Self, ContextError> {
        self.declare_function(name, args)?;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.base.len()
    }

    pub fn m(&self) -> usize {
        self.fields.len()
    }

    pub fn base_names(&self) -> &[String] {
        &self.base
    }

    pub fn field_names(&self) -> &[String] {
        &self.fields
    }

    pub fn functions(&self) -> &[OpaqueDecl] {
        &self.functions
    }

    pub fn base_index(&self, name: &str) -> Option<usize> {
        self.base.iter().position(|b| b == name)
    }

    pub fn field_index(&self, name: &str) -> Option<usize> {
        self.fields.iter().position(|f| f == name)
    }

    pub fn function(&self, name: &str) -> Option<&OpaqueDecl> {
        self.functions.iter().find(|f| f.name == name)
    }

    /// True when every base name is a single character, which enables the
    /// `y_tt` shorthand.
    pub fn single_letter_base(&self) -> bool {
        self.base.iter().all(|b| b.chars().count() == 1)
    }

    /// `y^i` as an expression.
    pub fn field(&self, i: usize) -> Expr {
        Expr::field(i, self.n())
    }

    /// The declared argument list of an opaque function as expressions.
    pub fn function_args(&self, decl: &OpaqueDecl) -> Vec<Expr> {
        decl.args.iter().map(Expr::coord).collect()
    }

    /// Checks that every coordinate and opaque symbol in `e` belongs here.
    pub fn validate(&self, e: &Expr) -> Result<(), ContextError> {
        for (m, _) in e.terms() {
            for (atom, _) in m.factors() {
                match atom {
                    Atom::Pi => {}
                    Atom::Base(l) => {
                        if *l >= self.n() {
                            return Err(ContextError::OutOfRange(format!("base index {l}")));
                        }
                    }
                    Atom::Jet(v) => self.validate_var(v)?,
                    Atom::Apply(_, a) | Atom::Recip(a) => self.validate(a)?,
                    Atom::Opaque(app) => {
                        let decl = self
                            .function(&app.name)
                            .ok_or_else(|| ContextError::UnknownFunction(app.name.to_string()))?;
                        if decl.args.len() != app.args.len() || app.partials.len() != app.args.len()
                        {
                            return Err(ContextError::Arity {
                                name: app.name.to_string(),
                                expected: decl.args.len(),
                                got: app.args.len(),
                            });
                        }
                        for a in &app.args {
                            self.validate(a)?;
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn validate_var(&self, v: &JetVar) -> Result<(), ContextError> {
        if v.field >= self.m() || v.sigma.dim() != self.n() {
            return Err(ContextError::OutOfRange(format!("{v:?}")));
        }
        Ok(())
    }

    /// Human-readable name of a coordinate, `y_{t t}` style.
    pub fn coord_name(&self, c: &Coord) -> String {
        match c {
            Coord::Base(l) => self.base[*l].clone(),
            Coord::Jet(v) => {
                if v.sigma.is_zero() {
                    self.fields[v.field].clone()
                } else {
                    format!(
                        "{}_{{{}}}",
                        self.fields[v.field],
                        v.sigma.render(&self.base, " ")
                    )
                }
            }
        }
    }
}
