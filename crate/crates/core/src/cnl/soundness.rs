use std::collections::{BTreeMap, BTreeSet, VecDeque};

use super::{CnlDocument, ElementKind};
use crate::keyword::Keyword;
use crate::registry::Registry;
use crate::spec::Combinator;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FindingKind {
    /// The document names a contract the registry does not define.
    MissingSpec,
    CombinatorMismatch {
        cnl: Combinator,
        /// `None` when the registered contract is not built with a combinator.
        registry: Option<Combinator>,
    },
    ChildrenMismatch {
        expected: Vec<Keyword>,
        /// `None` entries are inline (unnamed) children.
        actual: Vec<Option<Keyword>>,
    },
    RootMismatch {
        expected: Option<Keyword>,
        found: Option<Keyword>,
    },
    UnreachableElement,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Finding {
    pub name: Keyword,
    pub kind: FindingKind,
    /// Line of the element the finding is about, when known.
    pub line: Option<usize>,
}

impl Finding {
    pub fn severity(&self) -> Severity {
        match self.kind {
            FindingKind::UnreachableElement => Severity::Warning,
            _ => Severity::Error,
        }
    }

    pub fn code(&self) -> &'static str {
        match self.kind {
            FindingKind::MissingSpec => "missing-spec",
            FindingKind::CombinatorMismatch { .. } => "combinator-mismatch",
            FindingKind::ChildrenMismatch { .. } => "children-mismatch",
            FindingKind::RootMismatch { .. } => "root-mismatch",
            FindingKind::UnreachableElement => "unreachable-element",
        }
    }

    pub fn message(&self) -> String {
        let names = |ks: &[Keyword]| ks.iter().map(Keyword::to_string).collect::<Vec<_>>().join(", ");
        match &self.kind {
            FindingKind::MissingSpec => format!("no contract is registered under {}", self.name),
            FindingKind::CombinatorMismatch { cnl, registry } => format!(
                "{} is written as `{cnl}` but registered as `{}`",
                self.name,
                registry.map_or("atomic", Combinator::as_str)
            ),
            FindingKind::ChildrenMismatch { expected, actual } => format!(
                "{} lists [{}] but the registered contract uses [{}]",
                self.name,
                names(expected),
                actual
                    .iter()
                    .map(|c| c.as_ref().map_or("<inline>".to_owned(), Keyword::to_string))
                    .collect::<Vec<_>>()
                    .join(", ")
            ),
            FindingKind::RootMismatch { expected, found } => format!(
                "root contract is {} but {} was expected",
                found.as_ref().map_or("missing".to_owned(), Keyword::to_string),
                expected.as_ref().map_or("none".to_owned(), Keyword::to_string)
            ),
            FindingKind::UnreachableElement => format!("{} is not reachable from the root contract", self.name),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut obj = serde_json::json!({
            "kind": self.code(),
            "severity": match self.severity() { Severity::Error => "error", Severity::Warning => "warning" },
            "name": self.name.to_string(),
            "line": self.line,
            "message": self.message(),
        });
        match &self.kind {
            FindingKind::CombinatorMismatch { cnl, registry } => {
                obj["cnl"] = cnl.as_str().into();
                obj["registry"] = registry.map_or("atomic", Combinator::as_str).into();
            }
            FindingKind::ChildrenMismatch { expected, actual } => {
                obj["expected"] = expected.iter().map(Keyword::to_string).collect::<Vec<_>>().into();
                obj["actual"] = actual
                    .iter()
                    .map(|c| c.as_ref().map_or("<inline>".to_owned(), Keyword::to_string))
                    .collect::<Vec<_>>()
                    .into();
            }
            FindingKind::RootMismatch { expected, found } => {
                obj["expected"] = expected.as_ref().map(Keyword::to_string).into();
                obj["found"] = found.as_ref().map(Keyword::to_string).into();
            }
            _ => {}
        }
        obj
    }
}

/// Checks every structural claim of `doc` against `registry`. Atomic
/// elements only claim that the contract exists. An empty result means the
/// document is sound. `expected_root`, when given, must match the document's
/// root declaration.
pub fn soundness_check(doc: &CnlDocument, registry: &Registry, expected_root: Option<&Keyword>) -> Vec<Finding> {
    let mut findings = Vec::new();
    let defined: BTreeMap<&Keyword, usize> = doc.elements.iter().map(|e| (&e.name, e.line)).collect();

    for el in &doc.elements {
        let line = Some(el.line);
        let Some(entry) = registry.get(&el.name) else {
            findings.push(Finding { name: el.name.clone(), kind: FindingKind::MissingSpec, line });
            continue;
        };
        let ElementKind::Compound { combinator, children } = &el.kind else { continue };
        let shape = entry.form.shape();
        if shape.combinator != Some(*combinator) {
            findings.push(Finding {
                name: el.name.clone(),
                kind: FindingKind::CombinatorMismatch { cnl: *combinator, registry: shape.combinator },
                line,
            });
            continue;
        }
        let matches = match combinator {
            Combinator::Keys => {
                let cnl: BTreeSet<Option<&Keyword>> = children.iter().map(Some).collect();
                let reg: BTreeSet<Option<&Keyword>> = shape.children.iter().map(Option::as_ref).collect();
                cnl == reg && shape.children.len() == children.len()
            }
            _ => shape.children.iter().map(Option::as_ref).eq(children.iter().map(Some)),
        };
        if !matches {
            findings.push(Finding {
                name: el.name.clone(),
                kind: FindingKind::ChildrenMismatch { expected: children.clone(), actual: shape.children },
                line,
            });
        }
    }

    let mut reported = BTreeSet::new();
    for el in &doc.elements {
        for child in el.kind.children() {
            if !defined.contains_key(child) && !registry.contains(child) && reported.insert(child.clone()) {
                findings.push(Finding { name: child.clone(), kind: FindingKind::MissingSpec, line: Some(el.line) });
            }
        }
    }

    if let Some(expected) = expected_root {
        if doc.root.as_ref() != Some(expected) {
            findings.push(Finding {
                name: doc.root.clone().unwrap_or_else(|| expected.clone()),
                kind: FindingKind::RootMismatch { expected: Some(expected.clone()), found: doc.root.clone() },
                line: doc.root_element().map(|e| e.line),
            });
        }
    }

    if let Some(root) = &doc.root {
        let mut reached = BTreeSet::new();
        let mut queue = VecDeque::from([root]);
        while let Some(k) = queue.pop_front() {
            if !reached.insert(k) {
                continue;
            }
            if let Some(el) = doc.element(k) {
                queue.extend(el.kind.children());
            }
        }
        for el in &doc.elements {
            if !reached.contains(&el.name) {
                findings.push(Finding {
                    name: el.name.clone(),
                    kind: FindingKind::UnreachableElement,
                    line: Some(el.line),
                });
            }
        }
    }
    findings
}
