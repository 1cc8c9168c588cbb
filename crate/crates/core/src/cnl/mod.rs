//! Controlled natural language view of a contract registry.
//!
//! A document is a list of sentences, one per line, each naming a contract
//! and either declaring it atomic or listing the contracts it is built from:
//!
//! ```text
//! namespace: mmsr
//!
//! The contract ::valid-date must hold.
//! source: "Date time is always represented in an ISO 8601 format ..."
//! The contract ::trade-date holds, if at least one of the contracts ::valid-date-time-ms, ::valid-date holds.
//!
//! The root contract is ::trade-date.
//! ```

mod abstraction;
mod parse;
mod render;
mod soundness;
mod traceback;

use std::collections::BTreeSet;

use thiserror::Error;

use crate::keyword::Keyword;
use crate::spec::Combinator;

pub use abstraction::{abstract_registry, AbstractError, Abstraction};
pub use parse::parse;
pub use render::{render, sentence};
pub use soundness::{soundness_check, Finding, FindingKind, Severity};
pub use traceback::{traceback, TraceEntry};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ElementKind {
    Atomic,
    Compound {
        combinator: Combinator,
        children: Vec<Keyword>,
    },
}

impl ElementKind {
    pub fn children(&self) -> &[Keyword] {
        match self {
            ElementKind::Atomic => &[],
            ElementKind::Compound { children, .. } => children,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            ElementKind::Atomic => "atomic",
            ElementKind::Compound { combinator, .. } => combinator.as_str(),
        }
    }
}

#[derive(Debug, Clone, Eq)]
pub struct CnlElement {
    pub name: Keyword,
    pub kind: ElementKind,
    pub is_root: bool,
    pub source_text: Option<String>,
    /// 1-based line of the sentence in its source text; 0 when synthesized.
    pub line: usize,
}

// `line` is positional metadata and takes no part in equality.
impl PartialEq for CnlElement {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.kind == other.kind
            && self.is_root == other.is_root
            && self.source_text == other.source_text
    }
}

impl CnlElement {
    pub fn atomic(name: Keyword) -> Self {
        CnlElement {
            name,
            kind: ElementKind::Atomic,
            is_root: false,
            source_text: None,
            line: 0,
        }
    }

    pub fn compound(name: Keyword, combinator: Combinator, children: Vec<Keyword>) -> Self {
        CnlElement {
            kind: ElementKind::Compound { combinator, children },
            ..CnlElement::atomic(name)
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "name": self.name.to_string(),
            "kind": self.kind.label(),
            "children": self.kind.children().iter().map(Keyword::to_string).collect::<Vec<_>>(),
            "is-root": self.is_root,
            "source-text": self.source_text,
            "line": self.line,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CnlDocument {
    pub namespace: Option<String>,
    pub elements: Vec<CnlElement>,
    pub root: Option<Keyword>,
}

impl CnlDocument {
    pub fn element(&self, name: &Keyword) -> Option<&CnlElement> {
        self.elements.iter().find(|e| &e.name == name)
    }

    pub fn root_element(&self) -> Option<&CnlElement> {
        self.root.as_ref().and_then(|r| self.element(r))
    }

    /// Children named by compounds but not defined in this document.
    pub fn external_references(&self) -> Vec<Keyword> {
        let defined: BTreeSet<&Keyword> = self.elements.iter().map(|e| &e.name).collect();
        let mut seen = BTreeSet::new();
        self.elements
            .iter()
            .flat_map(|e| e.kind.children())
            .filter(|c| !defined.contains(c) && seen.insert(*c))
            .cloned()
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "namespace": self.namespace,
            "root": self.root.as_ref().map(Keyword::to_string),
            "elements": self.elements.iter().map(CnlElement::to_json).collect::<Vec<_>>(),
            "external": self.external_references().iter().map(Keyword::to_string).collect::<Vec<_>>(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CnlError {
    #[error("line {line}: syntax error, expected {expected}")]
    Syntax { line: usize, expected: String },
    #[error("line {line}: contract {name} is already defined")]
    DuplicateName { line: usize, name: Keyword },
    #[error("line {line}: source line does not follow a contract sentence")]
    DanglingSource { line: usize },
    #[error("line {line}: a root contract was already declared")]
    MultipleRoots { line: usize },
    #[error("line {line}: root contract {name} is not defined in this document")]
    UndefinedRoot { line: usize, name: Keyword },
    #[error("cyclic reference: {}", .names.iter().map(Keyword::to_string).collect::<Vec<_>>().join(" -> "))]
    CyclicReference { names: Vec<Keyword> },
}

impl CnlError {
    pub fn line(&self) -> Option<usize> {
        match self {
            CnlError::Syntax { line, .. }
            | CnlError::DuplicateName { line, .. }
            | CnlError::DanglingSource { line }
            | CnlError::MultipleRoots { line }
            | CnlError::UndefinedRoot { line, .. } => Some(*line),
            CnlError::CyclicReference { .. } => None,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CnlError::Syntax { .. } => "syntax-error",
            CnlError::DuplicateName { .. } => "duplicate-name",
            CnlError::DanglingSource { .. } => "dangling-source",
            CnlError::MultipleRoots { .. } => "multiple-roots",
            CnlError::UndefinedRoot { .. } => "undefined-root",
            CnlError::CyclicReference { .. } => "cyclic-reference",
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut obj = serde_json::json!({
            "kind": self.kind(),
            "line": self.line(),
            "message": self.to_string(),
        });
        match self {
            CnlError::Syntax { expected, .. } => obj["expected"] = expected.clone().into(),
            CnlError::CyclicReference { names } => {
                obj["names"] = names.iter().map(Keyword::to_string).collect::<Vec<_>>().into()
            }
            _ => {}
        }
        obj
    }
}
