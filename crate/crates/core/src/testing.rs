//! Property-test generators and registry mutation operators.
//!
//! Random registries are acyclic by construction: spec `s{i}` only refers
//! to specs `s{j}` with `j < i`. Values draw map keys and keywords from the
//! same name pool so that `Keys` contracts see relevant input.

use std::collections::BTreeMap;

use proptest::prelude::*;

use crate::cnl::{CnlDocument, CnlElement, ElementKind};
use crate::datagen::{generate, GenContext, Generators};
use crate::keyword::Keyword;
use crate::registry::Registry;
use crate::spec::{Combinator, SpecForm, SpecMeta};
use crate::value::Value;

pub const NAMESPACE: &str = "t";
pub const MAX_SPECS: usize = 6;

/// `::t/s{i}`.
pub fn spec_name(i: usize) -> Keyword {
    Keyword::new(NAMESPACE, &format!("s{i}")).expect("valid name")
}

fn tag(i: usize) -> Keyword {
    Keyword::simple(["a", "b", "c", "d"][i % 4]).expect("valid tag")
}

pub fn value_strategy() -> impl Strategy<Value = Value> {
    let leaf = prop_oneof![
        Just(Value::Null),
        any::<bool>().prop_map(Value::Bool),
        (-3i64..12).prop_map(Value::Int),
        prop::sample::select(vec![-0.5, 0.0, 2.5, 7.25, f64::NAN]).prop_map(Value::Float),
        prop::sample::select(vec!["", " ", "a", "ab", "abc", "ba", "x", "2017-04-10", "BORR"])
            .prop_map(Value::from),
        (0..MAX_SPECS).prop_map(|i| Value::Keyword(spec_name(i))),
    ];
    leaf.prop_recursive(3, 24, 4, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 0..4).prop_map(Value::Vector),
            prop::collection::btree_map((0..MAX_SPECS).prop_map(spec_name), inner, 0..4).prop_map(Value::Map),
        ]
    })
}

/// Shape of a form before references are bound to earlier specs.
#[derive(Debug, Clone)]
enum RawForm {
    Pred(u8, i64, i64),
    Ref(u8),
    Or(Vec<RawForm>),
    And(Vec<RawForm>),
    Keys(Vec<u8>, Vec<u8>),
    CollOf(Box<RawForm>, Option<u8>, Option<u8>),
}

fn raw_form() -> impl Strategy<Value = RawForm> {
    let leaf = prop_oneof![
        3 => (0u8..10, -2i64..5, 0i64..8).prop_map(|(p, a, b)| RawForm::Pred(p, a, b)),
        2 => any::<u8>().prop_map(RawForm::Ref),
        1 => (prop::collection::vec(any::<u8>(), 0..3), prop::collection::vec(any::<u8>(), 0..3))
            .prop_map(|(r, o)| RawForm::Keys(r, o)),
    ];
    leaf.prop_recursive(3, 12, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 1..4).prop_map(RawForm::Or),
            prop::collection::vec(inner.clone(), 1..3).prop_map(RawForm::And),
            (inner, prop::option::of(0u8..3), prop::option::of(0u8..4)).prop_map(|(c, lo, hi)| {
                let hi = match (lo, hi) {
                    (Some(l), Some(h)) => Some(l.max(h)),
                    (_, h) => h,
                };
                RawForm::CollOf(Box::new(c), lo, hi)
            }),
        ]
    })
}

fn leaf_pred(p: u8, a: i64, b: i64) -> SpecForm {
    let range = |lo: i64, hi: i64| {
        Value::Map(BTreeMap::from([
            (Keyword::simple("min").unwrap(), Value::Int(lo)),
            (Keyword::simple("max").unwrap(), Value::Int(hi)),
        ]))
    };
    match p {
        0 => SpecForm::pred("even"),
        1 => SpecForm::pred("positive-number"),
        2 => SpecForm::pred("non-blank-string"),
        3 => SpecForm::pred_with("type-is", ["int", "string", "number", "vector", "map", "null"][(b % 6) as usize]),
        4 => SpecForm::one_of(vec![Value::Int(a), Value::from("ab"), Value::Null]),
        5 => SpecForm::pred_with("int-range", range(a, a + b)),
        6 => SpecForm::pred_with("string-regex", "[ab]{1,3}"),
        7 => SpecForm::pred_with("string-length", range(b.min(2), b)),
        8 => SpecForm::pred_with("number-range", range(a, a + b)),
        _ => SpecForm::pred("iso-date"),
    }
}

fn bind(raw: &RawForm, index: usize) -> SpecForm {
    let earlier = |r: u8| (index > 0).then(|| spec_name(index - 1 - r as usize % index));
    match raw {
        RawForm::Pred(p, a, b) => leaf_pred(*p, *a, *b),
        RawForm::Ref(r) => earlier(*r).map_or_else(|| SpecForm::pred("even"), SpecForm::Ref),
        RawForm::Or(children) => SpecForm::Or(
            children
                .iter()
                .enumerate()
                .map(|(i, c)| (tag(i), bind(c, index)))
                .collect(),
        ),
        RawForm::And(children) => SpecForm::And(children.iter().map(|c| bind(c, index)).collect()),
        RawForm::Keys(req, opt) => {
            let mut required: Vec<Keyword> = req.iter().filter_map(|r| earlier(*r)).collect();
            required.sort();
            required.dedup();
            let mut optional: Vec<Keyword> = opt.iter().filter_map(|r| earlier(*r)).filter(|k| !required.contains(k)).collect();
            optional.sort();
            optional.dedup();
            SpecForm::Keys { required, optional }
        }
        RawForm::CollOf(child, lo, hi) => SpecForm::CollOf {
            child: Box::new(bind(child, index)),
            min_count: lo.map(usize::from),
            max_count: hi.map(usize::from),
        },
    }
}

/// Acyclic registries over `::t/s0 .. ::t/s{n-1}`.
pub fn registry_strategy() -> impl Strategy<Value = Registry> {
    prop::collection::vec(raw_form(), 1..=MAX_SPECS).prop_map(|raws| {
        raws.iter().enumerate().fold(Registry::new(), |r, (i, raw)| {
            r.define(spec_name(i), bind(raw, i)).expect("acyclic by construction")
        })
    })
}

#[derive(Debug, Clone)]
pub struct SpecCase {
    pub registry: Registry,
    pub spec: Keyword,
    pub value: Value,
}

/// A registry, one of its specs, and a value that is either random or
/// generated from that contract (so roughly half the cases are valid).
pub fn spec_case() -> impl Strategy<Value = SpecCase> {
    (registry_strategy(), any::<prop::sample::Index>(), value_strategy(), prop::option::of(any::<u64>())).prop_map(
        |(registry, pick, random, seed)| {
            let spec = spec_name(pick.index(registry.len()));
            let value = seed
                .and_then(|s| generate(&registry, &Generators::builtin(), &spec, &GenContext::seeded(s)).ok())
                .unwrap_or(random);
            SpecCase { registry, spec, value }
        },
    )
}

#[derive(Debug, Clone)]
struct RawElement {
    combinator: Option<u8>,
    children: Vec<(bool, u8)>,
    source: Option<String>,
    foreign: bool,
}

fn raw_element() -> impl Strategy<Value = RawElement> {
    (
        prop::option::of(0u8..4),
        prop::collection::vec((prop::bool::weighted(0.2), any::<u8>()), 1..4),
        prop::option::of("(.|\n){0,24}"),
        prop::bool::weighted(0.15),
    )
        .prop_map(|(combinator, children, source, foreign)| RawElement { combinator, children, source, foreign })
}

/// Valid controlled-language documents. Children refer to earlier elements
/// or to external names, so documents are acyclic.
pub fn cnl_document_strategy() -> impl Strategy<Value = CnlDocument> {
    (
        prop::option::of(prop::sample::select(vec!["doc", "reg.v1"])),
        prop::collection::vec(raw_element(), 0..8),
        any::<prop::sample::Index>(),
        any::<bool>(),
    )
        .prop_map(|(ns, raws, root_pick, with_root)| {
            let home = ns.unwrap_or("");
            let names: Vec<Keyword> = raws
                .iter()
                .enumerate()
                .map(|(i, r)| Keyword::new(if r.foreign { "other" } else { home }, &format!("e{i}")).unwrap())
                .collect();
            let external = |n: u8| Keyword::new("ext", &format!("x{}", n % 5)).unwrap();
            let elements: Vec<CnlElement> = raws
                .iter()
                .enumerate()
                .map(|(i, raw)| {
                    let kind = match raw.combinator {
                        None => ElementKind::Atomic,
                        Some(c) => {
                            let combinator = [Combinator::Or, Combinator::And, Combinator::Keys, Combinator::CollOf][c as usize];
                            let mut children: Vec<Keyword> = raw
                                .children
                                .iter()
                                .map(|&(ext, n)| if ext || i == 0 { external(n) } else { names[n as usize % i].clone() })
                                .collect();
                            children.dedup();
                            if combinator == Combinator::CollOf {
                                children.truncate(1);
                            }
                            ElementKind::Compound { combinator, children }
                        }
                    };
                    CnlElement {
                        name: names[i].clone(),
                        kind,
                        is_root: false,
                        source_text: raw.source.clone(),
                        line: 0,
                    }
                })
                .collect();
            let mut doc = CnlDocument {
                namespace: ns.map(str::to_owned),
                elements,
                root: None,
            };
            if with_root && !doc.elements.is_empty() {
                let i = root_pick.index(doc.elements.len());
                doc.elements[i].is_root = true;
                doc.root = Some(doc.elements[i].name.clone());
            }
            doc
        })
}

/// One single-edit change to a registry.
#[derive(Debug, Clone)]
pub struct Mutant {
    pub description: String,
    pub registry: Registry,
}

fn children_of(form: &SpecForm) -> Option<(Combinator, Vec<SpecForm>)> {
    Some(match form {
        SpecForm::Or(b) => (Combinator::Or, b.iter().map(|(_, c)| c.clone()).collect()),
        SpecForm::And(c) => (Combinator::And, c.clone()),
        SpecForm::Keys { required, optional } => {
            (Combinator::Keys, required.iter().chain(optional).cloned().map(SpecForm::Ref).collect())
        }
        SpecForm::CollOf { child, .. } => (Combinator::CollOf, vec![(**child).clone()]),
        _ => return None,
    })
}

fn build(combinator: Combinator, children: Vec<SpecForm>) -> Option<SpecForm> {
    Some(match combinator {
        Combinator::Or => SpecForm::Or(
            children
                .into_iter()
                .enumerate()
                .map(|(i, c)| match &c {
                    SpecForm::Ref(k) => (k.clone(), c),
                    _ => (Keyword::simple(&format!("branch{i}")).unwrap(), c),
                })
                .collect(),
        ),
        Combinator::And => SpecForm::And(children),
        Combinator::Keys => SpecForm::Keys {
            required: children
                .into_iter()
                .map(|c| match c {
                    SpecForm::Ref(k) => Some(k),
                    _ => None,
                })
                .collect::<Option<_>>()?,
            optional: vec![],
        },
        Combinator::CollOf => {
            let [child]: [SpecForm; 1] = children.try_into().ok()?;
            SpecForm::coll_of(child)
        }
    })
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

/// Every combinator swap, child drop, child reorder and spec deletion of
/// `registry`. Reorders of `Keys` children are skipped: a map contract's
/// keys are a set, so reordering them changes nothing.
pub fn mutants(registry: &Registry) -> Vec<Mutant> {
    let mut out = Vec::new();
    let mut push = |description: String, name: &Keyword, form: SpecForm, meta: &SpecMeta| {
        if let Ok(registry) = registry.register(name.clone(), form, meta.clone()) {
            out.push(Mutant { description, registry });
        }
    };
    for (name, entry) in registry.iter() {
        let Some((combinator, children)) = children_of(&entry.form) else { continue };
        for target in [Combinator::Or, Combinator::And, Combinator::Keys, Combinator::CollOf] {
            if target == combinator {
                continue;
            }
            if target == Combinator::CollOf && children.len() > 1 {
                for (i, c) in children.iter().enumerate() {
                    if let Some(f) = build(target, vec![c.clone()]) {
                        push(format!("{name}: {combinator} -> coll-of over child {i}"), name, f, &entry.meta);
                    }
                }
            } else if let Some(f) = build(target, children.clone()) {
                push(format!("{name}: {combinator} -> {target}"), name, f, &entry.meta);
            }
        }
        if children.len() > 1 {
            for i in 0..children.len() {
                let form = match &entry.form {
                    SpecForm::Keys { required, optional } => {
                        let drop = &children[i];
                        let keep = |ks: &Vec<Keyword>| ks.iter().filter(|k| SpecForm::Ref((*k).clone()) != *drop).cloned().collect();
                        SpecForm::Keys { required: keep(required), optional: keep(optional) }
                    }
                    SpecForm::Or(branches) => {
                        SpecForm::Or(branches.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, b)| b.clone()).collect())
                    }
                    _ => {
                        let mut rest = children.clone();
                        rest.remove(i);
                        build(combinator, rest).expect("same combinator rebuilds")
                    }
                };
                push(format!("{name}: drop child {i}"), name, form, &entry.meta);
            }
            if combinator != Combinator::Keys {
                for perm in permutations(children.len()).into_iter().filter(|p| p.windows(2).any(|w| w[0] > w[1])) {
                    let form = match &entry.form {
                        SpecForm::Or(branches) => SpecForm::Or(perm.iter().map(|&j| branches[j].clone()).collect()),
                        _ => SpecForm::And(perm.iter().map(|&j| children[j].clone()).collect()),
                    };
                    push(format!("{name}: reorder children {perm:?}"), name, form, &entry.meta);
                }
            }
        }
    }
    for name in registry.names() {
        out.push(Mutant {
            description: format!("delete {name}"),
            registry: registry.without(name),
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mmsr;

    #[test]
    fn permutations_are_complete() {
        assert_eq!(permutations(3).len(), 6);
        assert_eq!(permutations(0), vec![Vec::<usize>::new()]);
    }

    #[test]
    fn bundle_has_enough_mutants() {
        let rs = mmsr::ruleset();
        let m = mutants(&rs.registry);
        assert_eq!(m.len(), 56);
        assert!(m.iter().all(|m| m.registry.len() >= rs.registry.len() - 1));
    }

    proptest! {
        #[test]
        fn random_registries_pass_check(r in registry_strategy()) {
            prop_assert!(r.check().is_ok());
        }
    }
}
