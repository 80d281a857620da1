//! Loading source files: definitions are admitted in order, proofs are
//! checked against everything loaded before them.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::admissibility::{admit, AdmissibilityReport};
use crate::eval::{DefEnv, EvalError};
use crate::prover::{check_and_record, ProofOutcome, RuleDb};
use crate::syntax::{parse_program_named, Property, SexpKind, SyntaxError, TopFormKind};
use crate::testing::{run_trials, PropertyError, TestOutcome};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LoadError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("{file}: `{name}` is already defined")]
    Redefinition { file: String, name: String },
    #[error("{file}: {message}")]
    BadDirective { file: String, message: String },
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Item {
    Definition { file: String, report: AdmissibilityReport },
    Defun { file: String, name: String, trusted: bool, error: Option<String> },
    Property { file: String, name: String },
    Proof { file: String, name: String, outcome: ProofOutcome },
}

impl Item {
    pub fn name(&self) -> &str {
        match self {
            Item::Definition { report, .. } => &report.name,
            Item::Defun { name, .. } | Item::Property { name, .. } | Item::Proof { name, .. } => name,
        }
    }

    /// Whether loading this item succeeded; properties are judged when run.
    pub fn ok(&self) -> bool {
        match self {
            Item::Definition { report, .. } => report.admitted(),
            Item::Defun { trusted, error, .. } => *trusted && error.is_none(),
            Item::Property { .. } => true,
            Item::Proof { outcome, .. } => outcome.accepted(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Workbench {
    pub env: DefEnv,
    pub db: RuleDb,
    pub items: Vec<Item>,
    pub properties: Vec<Property>,
    loaded: BTreeSet<PathBuf>,
    root: Option<PathBuf>,
}

impl Default for Workbench {
    fn default() -> Self {
        Self::new()
    }
}

impl Workbench {
    pub fn new() -> Self {
        Workbench {
            env: DefEnv::new(),
            db: RuleDb::with_axioms(),
            items: Vec::new(),
            properties: Vec::new(),
            loaded: BTreeSet::new(),
            root: None,
        }
    }

    /// File names in reports are shown relative to `root` when possible.
    pub fn with_root(mut self, root: &Path) -> Self {
        self.root = root.canonicalize().ok();
        self
    }

    fn label(&self, canon: &Path, given: &Path) -> String {
        match self.root.as_deref().and_then(|r| canon.strip_prefix(r).ok()) {
            Some(rel) => rel.display().to_string(),
            None => given.display().to_string(),
        }
    }

    /// Loads a file; `(include "path")` is resolved relative to it and each
    /// file is loaded at most once.
    pub fn load_file(&mut self, path: &Path) -> Result<(), LoadError> {
        let io = |e: std::io::Error| LoadError::Io { path: path.display().to_string(), message: e.to_string() };
        let canon = path.canonicalize().map_err(io)?;
        if !self.loaded.insert(canon.clone()) {
            return Ok(());
        }
        let text = std::fs::read_to_string(&canon).map_err(io)?;
        let dir = canon.parent().map(Path::to_path_buf);
        let label = self.label(&canon, path);
        self.load_str(&text, &label, dir.as_deref())
    }

    pub fn load_str(&mut self, text: &str, file: &str, dir: Option<&Path>) -> Result<(), LoadError> {
        for form in parse_program_named(text, file)? {
            if let Some(name) = form.name() {
                let taken = match &form.kind {
                    TopFormKind::DefEquations(_) | TopFormKind::RawDefun(_) => self.env.contains(name),
                    TopFormKind::Property(_) => self.properties.iter().any(|p| p.name == name),
                    TopFormKind::Proof(_) => {
                        self.items.iter().any(|i| matches!(i, Item::Proof { name: n, .. } if n == name))
                    }
                    TopFormKind::Directive { .. } => false,
                };
                if taken {
                    return Err(LoadError::Redefinition { file: file.to_string(), name: name.to_string() });
                }
            }
            let file = file.to_string();
            match form.kind {
                TopFormKind::DefEquations(d) => {
                    let report = admit(&d, &self.env);
                    if let Some(c) = &report.compiled {
                        self.env.define(&c.name, c.params.clone(), c.body.clone()).expect("admitted body resolves");
                        self.db.add_definition(&d);
                        self.db.infer_naturals(&self.env);
                    }
                    self.items.push(Item::Definition { file, report });
                }
                TopFormKind::RawDefun(d) => {
                    let mut error = None;
                    if d.trust {
                        if let Err(e) = self.env.define(&d.name, d.params.clone(), d.body.clone()) {
                            error = Some(e.to_string());
                        } else {
                            self.db.infer_naturals(&self.env);
                        }
                    } else {
                        error = Some("raw defun needs :trust to be admitted".into());
                    }
                    self.items.push(Item::Defun { file, name: d.name, trusted: d.trust, error });
                }
                TopFormKind::Property(p) => {
                    self.items.push(Item::Property { file, name: p.name.clone() });
                    self.properties.push(p);
                }
                TopFormKind::Proof(script) => {
                    let outcome = check_and_record(&script, &mut self.db, &self.env);
                    self.items.push(Item::Proof { file, name: script.name, outcome });
                }
                TopFormKind::Directive { kind, payload } if kind == "include" => {
                    let [arg] = payload.as_slice() else {
                        return Err(LoadError::BadDirective { file, message: "include takes one path".into() });
                    };
                    let SexpKind::Str(rel) = &arg.kind else {
                        return Err(LoadError::BadDirective { file, message: "include path must be a string".into() });
                    };
                    let target = match dir {
                        Some(d) => d.join(rel),
                        None => PathBuf::from(rel),
                    };
                    self.load_file(&target)?;
                }
                TopFormKind::Directive { kind, .. } => {
                    return Err(LoadError::BadDirective { file, message: format!("unknown directive `{kind}`") });
                }
            }
        }
        Ok(())
    }

    pub fn property(&self, name: &str) -> Option<&Property> {
        self.properties.iter().find(|p| p.name == name)
    }

    /// Runs every property with its own trial count, or `trials` when given.
    pub fn run_properties(&self, seed: u64, trials: Option<u32>) -> Vec<(String, Result<TestOutcome, PropertyError>)> {
        self.properties
            .iter()
            .map(|p| (p.name.clone(), run_trials(p, seed, trials.unwrap_or(p.trials), &self.env)))
            .collect()
    }

    /// Evaluates a ground expression against the loaded definitions.
    pub fn eval_str(&self, expr: &str) -> Result<crate::eval::Value, EvalOrSyntax> {
        let t = crate::syntax::parse_term(expr)?;
        Ok(crate::eval::eval_ground(&t, &self.env)?)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalOrSyntax {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loads_in_order() {
        let mut w = Workbench::new();
        w.load_str(
            "(defequations len (xs) :sig (list) (len0 (len nil) = 0) (len1 (len (cons x xs)) = (1+ (len xs))))
             (defun twice (n) :trust (+ n n))
             (defun untrusted (n) n)
             (defproperty len-nat (xs :value (random-list-of (random-integer))) (natp (len xs)))",
            "t.lx",
            None,
        )
        .unwrap();
        assert!(w.items[0].ok());
        assert!(w.items[1].ok());
        assert!(!w.items[2].ok());
        assert_eq!(w.eval_str("(twice (len '(1 2 3)))").unwrap(), crate::eval::Value::from(6));
        assert!(w.run_properties(1, None)[0].1.as_ref().unwrap().passed());
        let e = w.load_str("(defun twice (n) :trust n)", "u.lx", None).unwrap_err();
        assert!(matches!(e, LoadError::Redefinition { .. }));
    }

    #[test]
    fn rejected_definitions_are_not_callable() {
        let mut w = Workbench::new();
        w.load_str("(defequations f (n) :sig (nat) (a (f 0) = 1))", "t.lx", None).unwrap();
        assert!(!w.items[0].ok());
        assert!(w.eval_str("(f 0)").is_err());
    }
}
