use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::{parse, render, CnlDocument, CnlElement, ElementKind};
use crate::keyword::Keyword;
use crate::registry::{Registry, SpecEntry};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AbstractError {
    #[error("unknown spec {0}")]
    UnknownSpec(Keyword),
    #[error("contracts reachable from the root form a cycle: {}", .0.iter().map(Keyword::to_string).collect::<Vec<_>>().join(" -> "))]
    Cyclic(Vec<Keyword>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Abstraction {
    pub document: CnlDocument,
    /// Contracts used by more than one parent; each is emitted once.
    pub shared: Vec<Keyword>,
}

/// How a registered contract appears in the controlled language. Predicates,
/// aliases, opaque contracts and combinators with inline children are atomic.
pub(super) fn element_kind(entry: &SpecEntry) -> ElementKind {
    if entry.meta.opaque {
        return ElementKind::Atomic;
    }
    let shape = entry.form.shape();
    match (shape.combinator, shape.named_children()) {
        (Some(combinator), Some(children)) => ElementKind::Compound { combinator, children },
        _ => ElementKind::Atomic,
    }
}

/// Walks the registry from `root` and produces its controlled-language
/// document, children before parents.
pub fn abstract_registry(registry: &Registry, root: &Keyword) -> Result<Abstraction, AbstractError> {
    struct Walk<'a> {
        registry: &'a Registry,
        done: BTreeSet<Keyword>,
        stack: Vec<Keyword>,
        parents: BTreeMap<Keyword, usize>,
        elements: Vec<CnlElement>,
    }

    impl Walk<'_> {
        fn visit(&mut self, name: &Keyword) -> Result<(), AbstractError> {
            if self.done.contains(name) {
                return Ok(());
            }
            if let Some(pos) = self.stack.iter().position(|k| k == name) {
                let mut cycle = self.stack[pos..].to_vec();
                cycle.push(name.clone());
                return Err(AbstractError::Cyclic(cycle));
            }
            let entry = self
                .registry
                .get(name)
                .ok_or_else(|| AbstractError::UnknownSpec(name.clone()))?;
            let kind = element_kind(entry);
            self.stack.push(name.clone());
            for child in kind.children() {
                *self.parents.entry(child.clone()).or_default() += 1;
                self.visit(child)?;
            }
            self.stack.pop();
            self.done.insert(name.clone());
            self.elements.push(CnlElement {
                name: name.clone(),
                kind,
                is_root: false,
                source_text: entry.meta.source_text.clone(),
                line: 0,
            });
            Ok(())
        }
    }

    let mut walk = Walk {
        registry,
        done: BTreeSet::new(),
        stack: Vec::new(),
        parents: BTreeMap::new(),
        elements: Vec::new(),
    };
    walk.visit(root)?;

    for el in &mut walk.elements {
        el.is_root = &el.name == root;
    }
    let all_qualified = walk
        .elements
        .iter()
        .all(|e| !e.name.namespace().is_empty() && e.kind.children().iter().all(|c| !c.namespace().is_empty()));
    let namespace = (!root.namespace().is_empty() && all_qualified).then(|| root.namespace().to_owned());
    let doc = CnlDocument {
        namespace,
        elements: walk.elements,
        root: Some(root.clone()),
    };
    // re-read the canonical text so element lines match `render` output
    let document = parse(&render(&doc)).expect("rendered abstraction parses");
    let shared = walk
        .parents
        .into_iter()
        .filter(|(_, n)| *n > 1)
        .map(|(k, _)| k)
        .collect();
    Ok(Abstraction { document, shared })
}
