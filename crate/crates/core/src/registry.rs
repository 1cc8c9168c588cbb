//! Immutable name → contract store.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use thiserror::Error;

use crate::keyword::Keyword;
use crate::predicates::PredicateLib;
use crate::spec::{SpecForm, SpecMeta};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error("unknown spec {0}")]
    UnknownSpec(Keyword),
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),
    #[error("cyclic definition: {}", display_chain(.0))]
    CyclicDefinition(Vec<Keyword>),
    #[error("malformed spec {name}: {reason}")]
    MalformedSpec { name: Keyword, reason: String },
}

fn display_chain(names: &[Keyword]) -> String {
    names.iter().map(Keyword::to_string).collect::<Vec<_>>().join(" -> ")
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpecEntry {
    pub form: SpecForm,
    pub meta: SpecMeta,
}

/// A persistent registry: `register` leaves `self` untouched and returns the
/// extended registry, so a `Registry` can be shared freely across threads.
///
/// Forward references are allowed while building; [`Registry::check`]
/// verifies that every reference resolves.
#[derive(Debug, Clone)]
pub struct Registry {
    entries: BTreeMap<Keyword, Arc<SpecEntry>>,
    predicates: Arc<PredicateLib>,
}

impl Default for Registry {
    fn default() -> Self {
        Registry::new()
    }
}

impl Registry {
    pub fn new() -> Self {
        Registry::with_predicates(PredicateLib::builtin())
    }

    pub fn with_predicates(predicates: PredicateLib) -> Self {
        Registry {
            entries: BTreeMap::new(),
            predicates: Arc::new(predicates),
        }
    }

    pub fn predicates(&self) -> &PredicateLib {
        &self.predicates
    }

    /// Registers `name`, replacing any earlier definition.
    pub fn register(&self, name: Keyword, form: SpecForm, meta: SpecMeta) -> Result<Registry, SpecError> {
        form.check_well_formed().map_err(|reason| SpecError::MalformedSpec {
            name: name.clone(),
            reason,
        })?;
        let mut next = self.clone();
        next.entries.insert(name.clone(), Arc::new(SpecEntry { form, meta }));
        if let Some(cycle) = next.find_cycle_through(&name) {
            return Err(SpecError::CyclicDefinition(cycle));
        }
        Ok(next)
    }

    /// `register` with empty metadata.
    pub fn define(&self, name: Keyword, form: SpecForm) -> Result<Registry, SpecError> {
        self.register(name, form, SpecMeta::default())
    }

    /// Registry without `name` (no-op when absent).
    pub fn without(&self, name: &Keyword) -> Registry {
        let mut next = self.clone();
        next.entries.remove(name);
        next
    }

    pub fn get(&self, name: &Keyword) -> Option<&SpecEntry> {
        self.entries.get(name).map(Arc::as_ref)
    }

    pub fn contains(&self, name: &Keyword) -> bool {
        self.entries.contains_key(name)
    }

    /// The stored form of `name`, one level deep.
    pub fn resolve(&self, name: &Keyword) -> Result<&SpecForm, SpecError> {
        self.get(name)
            .map(|e| &e.form)
            .ok_or_else(|| SpecError::UnknownSpec(name.clone()))
    }

    pub fn names(&self) -> impl Iterator<Item = &Keyword> {
        self.entries.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Keyword, &SpecEntry)> {
        self.entries.iter().map(|(k, e)| (k, e.as_ref()))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Depth-first search for a non-consuming path from `start` back to itself.
    fn find_cycle_through(&self, start: &Keyword) -> Option<Vec<Keyword>> {
        fn dfs(
            reg: &Registry,
            current: &Keyword,
            start: &Keyword,
            path: &mut Vec<Keyword>,
            visited: &mut BTreeSet<Keyword>,
        ) -> bool {
            let Some(entry) = reg.get(current) else {
                return false;
            };
            let mut targets = Vec::new();
            entry.form.non_consuming_refs(&mut targets);
            for t in targets {
                if &t == start {
                    path.push(t);
                    return true;
                }
                if visited.insert(t.clone()) {
                    path.push(t.clone());
                    if dfs(reg, &t, start, path, visited) {
                        return true;
                    }
                    path.pop();
                }
            }
            false
        }
        let mut path = vec![start.clone()];
        let mut visited = BTreeSet::new();
        dfs(self, start, start, &mut path, &mut visited).then_some(path)
    }

    /// Verifies that every reference resolves, every predicate exists and
    /// predicate parameters are acceptable. Returns the first problem found.
    pub fn check(&self) -> Result<(), SpecError> {
        for (name, entry) in self.iter() {
            let mut refs = Vec::new();
            entry.form.all_refs(&mut refs);
            if let Some(missing) = refs.into_iter().find(|r| !self.contains(r)) {
                return Err(SpecError::UnknownSpec(missing));
            }
            let mut preds = Vec::new();
            collect_pred_nodes(&entry.form, &mut preds);
            for (pred, params) in preds {
                let def = self
                    .predicates
                    .get(pred)
                    .ok_or_else(|| SpecError::UnknownPredicate(pred.to_owned()))?;
                (def.check_params)(params).map_err(|reason| SpecError::MalformedSpec {
                    name: name.clone(),
                    reason: format!("{pred}: {reason}"),
                })?;
            }
        }
        Ok(())
    }
}

fn collect_pred_nodes<'a>(form: &'a SpecForm, out: &mut Vec<(&'a str, &'a crate::value::Value)>) {
    match form {
        SpecForm::Pred { name, params } => out.push((name, params)),
        SpecForm::Or(branches) => branches.iter().for_each(|(_, c)| collect_pred_nodes(c, out)),
        SpecForm::And(children) => children.iter().for_each(|c| collect_pred_nodes(c, out)),
        SpecForm::WithGen { child, .. } | SpecForm::CollOf { child, .. } => collect_pred_nodes(child, out),
        SpecForm::Ref(_) | SpecForm::Keys { .. } => {}
    }
}
