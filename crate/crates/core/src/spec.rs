//! The contract AST.

use std::collections::BTreeSet;
use std::fmt;

use crate::keyword::Keyword;
use crate::value::Value;

#[derive(Debug, Clone, PartialEq)]
pub enum SpecForm {
    /// Named predicate from the predicate library.
    Pred { name: String, params: Value },
    /// Reference to a registered contract.
    Ref(Keyword),
    /// Tagged alternatives; the first accepting branch wins.
    Or(Vec<(Keyword, SpecForm)>),
    And(Vec<SpecForm>),
    /// Map contract; the value under each listed key must satisfy the
    /// contract registered under that key's own name.
    Keys {
        required: Vec<Keyword>,
        optional: Vec<Keyword>,
    },
    CollOf {
        child: Box<SpecForm>,
        min_count: Option<usize>,
        max_count: Option<usize>,
    },
    /// Validation-transparent wrapper attaching a named generator.
    WithGen {
        child: Box<SpecForm>,
        generator: String,
        params: Value,
    },
}

/// The four combinators the controlled language can talk about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Combinator {
    Or,
    And,
    Keys,
    CollOf,
}

impl Combinator {
    pub fn as_str(self) -> &'static str {
        match self {
            Combinator::Or => "or",
            Combinator::And => "and",
            Combinator::Keys => "keys",
            Combinator::CollOf => "coll-of",
        }
    }
}

impl fmt::Display for Combinator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Registry-side metadata of a contract.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SpecMeta {
    /// Quote of the regulation text the contract encodes.
    pub source_text: Option<String>,
    /// Forces the contract to be shown as an atomic element.
    pub opaque: bool,
}

impl SpecMeta {
    pub fn with_source(text: impl Into<String>) -> Self {
        SpecMeta {
            source_text: Some(text.into()),
            opaque: false,
        }
    }
}

/// Top-level structure of a form as seen by the controlled language:
/// the combinator (after unwrapping generator wrappers) and, per child,
/// the referenced name or `None` for an inline child.
#[derive(Debug, Clone, PartialEq)]
pub struct Shape {
    pub combinator: Option<Combinator>,
    pub children: Vec<Option<Keyword>>,
}

impl Shape {
    /// Children as names, if every child is a reference and there is at least one.
    pub fn named_children(&self) -> Option<Vec<Keyword>> {
        if self.children.is_empty() {
            return None;
        }
        self.children.iter().cloned().collect()
    }
}

fn ref_name(form: &SpecForm) -> Option<Keyword> {
    match form {
        SpecForm::Ref(k) => Some(k.clone()),
        _ => None,
    }
}

impl SpecForm {
    pub fn pred(name: &str) -> SpecForm {
        SpecForm::Pred {
            name: name.to_owned(),
            params: Value::Null,
        }
    }

    pub fn pred_with(name: &str, params: impl Into<Value>) -> SpecForm {
        SpecForm::Pred {
            name: name.to_owned(),
            params: params.into(),
        }
    }

    pub fn one_of<T: Into<Value>>(values: Vec<T>) -> SpecForm {
        SpecForm::pred_with("one-of", Value::from(values))
    }

    pub fn reference(k: &Keyword) -> SpecForm {
        SpecForm::Ref(k.clone())
    }

    /// Or whose tags are the referenced names, the shape the controlled
    /// language abstracts.
    pub fn or_of_refs(children: &[Keyword]) -> SpecForm {
        SpecForm::Or(
            children
                .iter()
                .map(|k| (k.clone(), SpecForm::Ref(k.clone())))
                .collect(),
        )
    }

    pub fn coll_of(child: SpecForm) -> SpecForm {
        SpecForm::CollOf {
            child: Box::new(child),
            min_count: None,
            max_count: None,
        }
    }

    pub fn with_gen(child: SpecForm, generator: &str) -> SpecForm {
        SpecForm::WithGen {
            child: Box::new(child),
            generator: generator.to_owned(),
            params: Value::Null,
        }
    }

    /// Checks the structural invariants of the form and all its subforms.
    pub fn check_well_formed(&self) -> Result<(), String> {
        match self {
            SpecForm::Pred { name, .. } if name.is_empty() => Err("empty predicate name".into()),
            SpecForm::Pred { .. } | SpecForm::Ref(_) => Ok(()),
            SpecForm::Or(branches) => {
                if branches.is_empty() {
                    return Err("or needs at least one branch".into());
                }
                let mut tags = BTreeSet::new();
                for (tag, child) in branches {
                    if !tags.insert(tag) {
                        return Err(format!("duplicate or tag {tag}"));
                    }
                    child.check_well_formed()?;
                }
                Ok(())
            }
            SpecForm::And(children) => {
                if children.is_empty() {
                    return Err("and needs at least one child".into());
                }
                children.iter().try_for_each(SpecForm::check_well_formed)
            }
            SpecForm::Keys { required, optional } => {
                let mut seen = BTreeSet::new();
                for k in required.iter().chain(optional) {
                    if !seen.insert(k) {
                        return Err(format!("key {k} listed twice"));
                    }
                }
                Ok(())
            }
            SpecForm::CollOf {
                child,
                min_count,
                max_count,
            } => {
                if let (Some(lo), Some(hi)) = (min_count, max_count) {
                    if lo > hi {
                        return Err(format!("min-count {lo} exceeds max-count {hi}"));
                    }
                }
                child.check_well_formed()
            }
            SpecForm::WithGen { child, generator, .. } => {
                if generator.is_empty() {
                    return Err("empty generator name".into());
                }
                child.check_well_formed()
            }
        }
    }

    /// Registered names reached without descending into the value: through
    /// `Ref`, `Or`, `And` and `WithGen`, but not `Keys` or `CollOf`. A cycle
    /// over these edges would make validation loop on any input.
    pub fn non_consuming_refs(&self, out: &mut Vec<Keyword>) {
        match self {
            SpecForm::Ref(k) => out.push(k.clone()),
            SpecForm::Or(branches) => branches.iter().for_each(|(_, c)| c.non_consuming_refs(out)),
            SpecForm::And(children) => children.iter().for_each(|c| c.non_consuming_refs(out)),
            SpecForm::WithGen { child, .. } => child.non_consuming_refs(out),
            SpecForm::Pred { .. } | SpecForm::Keys { .. } | SpecForm::CollOf { .. } => {}
        }
    }

    /// Every registered name this form depends on, including map keys.
    pub fn all_refs(&self, out: &mut Vec<Keyword>) {
        match self {
            SpecForm::Ref(k) => out.push(k.clone()),
            SpecForm::Or(branches) => branches.iter().for_each(|(_, c)| c.all_refs(out)),
            SpecForm::And(children) => children.iter().for_each(|c| c.all_refs(out)),
            SpecForm::WithGen { child, .. } | SpecForm::CollOf { child, .. } => child.all_refs(out),
            SpecForm::Keys { required, optional } => out.extend(required.iter().chain(optional).cloned()),
            SpecForm::Pred { .. } => {}
        }
    }

    pub fn predicates<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            SpecForm::Pred { name, .. } => out.push(name),
            SpecForm::Or(branches) => branches.iter().for_each(|(_, c)| c.predicates(out)),
            SpecForm::And(children) => children.iter().for_each(|c| c.predicates(out)),
            SpecForm::WithGen { child, .. } | SpecForm::CollOf { child, .. } => child.predicates(out),
            SpecForm::Ref(_) | SpecForm::Keys { .. } => {}
        }
    }

    pub fn shape(&self) -> Shape {
        match self {
            SpecForm::WithGen { child, .. } => child.shape(),
            SpecForm::Or(branches) => Shape {
                combinator: Some(Combinator::Or),
                children: branches.iter().map(|(_, c)| ref_name(c)).collect(),
            },
            SpecForm::And(children) => Shape {
                combinator: Some(Combinator::And),
                children: children.iter().map(ref_name).collect(),
            },
            SpecForm::Keys { required, optional } => Shape {
                combinator: Some(Combinator::Keys),
                children: required.iter().chain(optional).cloned().map(Some).collect(),
            },
            SpecForm::CollOf { child, .. } => Shape {
                combinator: Some(Combinator::CollOf),
                children: vec![ref_name(child)],
            },
            SpecForm::Pred { .. } | SpecForm::Ref(_) => Shape {
                combinator: None,
                children: Vec::new(),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kw;

    #[test]
    fn well_formedness() {
        assert!(SpecForm::Or(vec![]).check_well_formed().is_err());
        assert!(SpecForm::And(vec![]).check_well_formed().is_err());
        let dup = SpecForm::Or(vec![
            (kw!("::a"), SpecForm::pred("even")),
            (kw!("::a"), SpecForm::pred("even")),
        ]);
        assert!(dup.check_well_formed().is_err());
        let overlap = SpecForm::Keys {
            required: vec![kw!("::a")],
            optional: vec![kw!("::a")],
        };
        assert!(overlap.check_well_formed().is_err());
        let counts = SpecForm::CollOf {
            child: Box::new(SpecForm::pred("even")),
            min_count: Some(3),
            max_count: Some(2),
        };
        assert!(counts.check_well_formed().is_err());
        assert!(SpecForm::or_of_refs(&[kw!("::a"), kw!("::b")]).check_well_formed().is_ok());
    }

    #[test]
    fn shape_unwraps_generators() {
        let f = SpecForm::with_gen(SpecForm::or_of_refs(&[kw!("::a")]), "g");
        let s = f.shape();
        assert_eq!(s.combinator, Some(Combinator::Or));
        assert_eq!(s.named_children(), Some(vec![kw!("::a")]));
        let inline = SpecForm::And(vec![SpecForm::Ref(kw!("::a")), SpecForm::pred("even")]);
        assert_eq!(inline.shape().named_children(), None);
    }

    #[test]
    fn non_consuming_edges_skip_collections() {
        let f = SpecForm::And(vec![
            SpecForm::Ref(kw!("::a")),
            SpecForm::coll_of(SpecForm::Ref(kw!("::b"))),
        ]);
        let mut out = Vec::new();
        f.non_consuming_refs(&mut out);
        assert_eq!(out, vec![kw!("::a")]);
        let mut all = Vec::new();
        f.all_refs(&mut all);
        assert_eq!(all, vec![kw!("::a"), kw!("::b")]);
    }
}
