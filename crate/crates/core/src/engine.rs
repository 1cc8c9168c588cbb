//! Validation, conformance and explanation over a [`Registry`].

use std::collections::BTreeMap;

use crate::keyword::Keyword;
use crate::registry::{Registry, SpecError};
use crate::spec::SpecForm;
use crate::value::{PathStep, Value};

/// A path-addressed reason why a value fails a contract.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    /// Data path from the validated root to the offending value.
    pub in_path: Vec<PathStep>,
    /// Chain of registered contracts entered, outermost first.
    pub via: Vec<Keyword>,
    pub pred: String,
    pub val: Value,
}

impl Problem {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "in": self.in_path.iter().map(PathStep::to_json).collect::<Vec<_>>(),
            "via": self.via.iter().map(Keyword::to_string).collect::<Vec<_>>(),
            "pred": self.pred,
            "val": self.val.to_json(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConformResult {
    /// The input with every traversed `Or` replaced by `[tag, conformed]`.
    Conformed(Value),
    Invalid(Vec<Problem>),
}

impl ConformResult {
    pub fn is_conformed(&self) -> bool {
        matches!(self, ConformResult::Conformed(_))
    }

    pub fn problems(&self) -> &[Problem] {
        match self {
            ConformResult::Conformed(_) => &[],
            ConformResult::Invalid(p) => p,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            ConformResult::Conformed(v) => serde_json::json!({ "conformed": v.to_json() }),
            ConformResult::Invalid(p) => {
                serde_json::json!({ "problems": p.iter().map(Problem::to_json).collect::<Vec<_>>() })
            }
        }
    }
}

type Outcome = Result<Value, Vec<Problem>>;

fn count_description(min: Option<usize>, max: Option<usize>) -> String {
    match (min, max) {
        (Some(lo), Some(hi)) => format!("{lo} <= count <= {hi}"),
        (Some(lo), None) => format!("count >= {lo}"),
        (None, Some(hi)) => format!("count <= {hi}"),
        (None, None) => unreachable!("count checked without bounds"),
    }
}

fn count_ok(n: usize, min: Option<usize>, max: Option<usize>) -> bool {
    min.is_none_or(|lo| n >= lo) && max.is_none_or(|hi| n <= hi)
}

fn key_spec_missing(name: &Keyword) -> SpecError {
    SpecError::UnknownSpec(name.clone())
}

impl Registry {
    /// True iff `value` satisfies the contract registered under `name`.
    pub fn validate(&self, name: &Keyword, value: &Value) -> Result<bool, SpecError> {
        let form = self.resolve(name)?;
        self.valid_form(form, value)
    }

    pub fn valid_form(&self, form: &SpecForm, value: &Value) -> Result<bool, SpecError> {
        Ok(match form {
            SpecForm::Pred { name, params } => {
                let def = self
                    .predicates()
                    .get(name)
                    .ok_or_else(|| SpecError::UnknownPredicate(name.clone()))?;
                (def.eval)(params, value)
            }
            SpecForm::Ref(target) => self.validate(target, value)?,
            SpecForm::Or(branches) => {
                for (_, child) in branches {
                    if self.valid_form(child, value)? {
                        return Ok(true);
                    }
                }
                false
            }
            SpecForm::And(children) => {
                for child in children {
                    if !self.valid_form(child, value)? {
                        return Ok(false);
                    }
                }
                true
            }
            SpecForm::Keys { required, optional } => {
                let Value::Map(map) = value else {
                    return Ok(false);
                };
                for key in required {
                    match map.get(key) {
                        Some(v) => {
                            if !self.validate(key, v)? {
                                return Ok(false);
                            }
                        }
                        None => return Ok(false),
                    }
                }
                for key in optional {
                    if let Some(v) = map.get(key) {
                        if !self.validate(key, v)? {
                            return Ok(false);
                        }
                    }
                }
                true
            }
            SpecForm::CollOf {
                child,
                min_count,
                max_count,
            } => {
                let Value::Vector(items) = value else {
                    return Ok(false);
                };
                if !count_ok(items.len(), *min_count, *max_count) {
                    return Ok(false);
                }
                for item in items {
                    if !self.valid_form(child, item)? {
                        return Ok(false);
                    }
                }
                true
            }
            SpecForm::WithGen { child, .. } => self.valid_form(child, value)?,
        })
    }

    /// Conformed tree on success, the full problem list otherwise.
    pub fn conform(&self, name: &Keyword, value: &Value) -> Result<ConformResult, SpecError> {
        let mut path = Vec::new();
        let mut via = Vec::new();
        Ok(match self.conform_named(name, value, &mut path, &mut via)? {
            Ok(v) => ConformResult::Conformed(v),
            Err(problems) => ConformResult::Invalid(problems),
        })
    }

    /// Problems explaining why `value` fails `name`; empty when it is valid.
    pub fn explain(&self, name: &Keyword, value: &Value) -> Result<Vec<Problem>, SpecError> {
        Ok(match self.conform(name, value)? {
            ConformResult::Conformed(_) => Vec::new(),
            ConformResult::Invalid(p) => p,
        })
    }

    fn conform_named(
        &self,
        name: &Keyword,
        value: &Value,
        path: &mut Vec<PathStep>,
        via: &mut Vec<Keyword>,
    ) -> Result<Outcome, SpecError> {
        let form = self.resolve(name)?;
        via.push(name.clone());
        let out = self.conform_form(form, value, path, via);
        via.pop();
        out
    }

    fn conform_form(
        &self,
        form: &SpecForm,
        value: &Value,
        path: &mut Vec<PathStep>,
        via: &mut Vec<Keyword>,
    ) -> Result<Outcome, SpecError> {
        let problem = |path: &[PathStep], via: &[Keyword], pred: String, val: &Value| Problem {
            in_path: path.to_vec(),
            via: via.to_vec(),
            pred,
            val: val.clone(),
        };
        match form {
            SpecForm::Pred { name, params } => {
                let def = self
                    .predicates()
                    .get(name)
                    .ok_or_else(|| SpecError::UnknownPredicate(name.clone()))?;
                Ok(if (def.eval)(params, value) {
                    Ok(value.clone())
                } else {
                    Err(vec![problem(path, via, def.describe(params), value)])
                })
            }
            SpecForm::Ref(target) => self.conform_named(target, value, path, via),
            SpecForm::Or(branches) => {
                let mut problems = Vec::new();
                for (tag, child) in branches {
                    match self.conform_form(child, value, path, via)? {
                        Ok(conformed) => {
                            return Ok(Ok(Value::Vector(vec![Value::Keyword(tag.clone()), conformed])))
                        }
                        Err(p) => problems.extend(p),
                    }
                }
                Ok(Err(problems))
            }
            SpecForm::And(children) => {
                // Conjuncts do not transform the value; the result is the
                // conformed form of the first conjunct.
                let mut first = None;
                for child in children {
                    match self.conform_form(child, value, path, via)? {
                        Ok(conformed) => {
                            first.get_or_insert(conformed);
                        }
                        Err(p) => return Ok(Err(p)),
                    }
                }
                Ok(Ok(first.expect("and has at least one child")))
            }
            SpecForm::Keys { required, optional } => {
                let Value::Map(map) = value else {
                    return Ok(Err(vec![problem(path, via, "map?".into(), value)]));
                };
                let mut problems = Vec::new();
                let mut conformed: BTreeMap<Keyword, Value> = map.clone();
                for key in required {
                    if !map.contains_key(key) {
                        problems.push(problem(path, via, format!("contains key {key}"), value));
                    }
                }
                for key in required.iter().chain(optional) {
                    let Some(v) = map.get(key) else { continue };
                    if !self.contains(key) {
                        return Err(key_spec_missing(key));
                    }
                    path.push(PathStep::Key(key.clone()));
                    let out = self.conform_named(key, v, path, via);
                    path.pop();
                    match out? {
                        Ok(c) => {
                            conformed.insert(key.clone(), c);
                        }
                        Err(p) => problems.extend(p),
                    }
                }
                Ok(if problems.is_empty() {
                    Ok(Value::Map(conformed))
                } else {
                    Err(problems)
                })
            }
            SpecForm::CollOf {
                child,
                min_count,
                max_count,
            } => {
                let Value::Vector(items) = value else {
                    return Ok(Err(vec![problem(path, via, "vector?".into(), value)]));
                };
                let mut problems = Vec::new();
                let mut conformed = Vec::with_capacity(items.len());
                for (i, item) in items.iter().enumerate() {
                    path.push(PathStep::Index(i));
                    let out = self.conform_form(child, item, path, via);
                    path.pop();
                    match out? {
                        Ok(c) => conformed.push(c),
                        Err(p) => problems.extend(p),
                    }
                }
                if !count_ok(items.len(), *min_count, *max_count) {
                    problems.push(problem(path, via, count_description(*min_count, *max_count), value));
                }
                Ok(if problems.is_empty() {
                    Ok(Value::Vector(conformed))
                } else {
                    Err(problems)
                })
            }
            SpecForm::WithGen { child, .. } => self.conform_form(child, value, path, via),
        }
    }

    /// Inverse of `conform`: strips the `Or` tags from a conformed tree.
    pub fn unform(&self, name: &Keyword, conformed: &Value) -> Result<Value, SpecError> {
        let form = self.resolve(name)?;
        self.unform_form(form, conformed)
    }

    fn unform_form(&self, form: &SpecForm, conformed: &Value) -> Result<Value, SpecError> {
        Ok(match form {
            SpecForm::Pred { .. } => conformed.clone(),
            SpecForm::Ref(target) => self.unform(target, conformed)?,
            SpecForm::Or(branches) => match conformed {
                Value::Vector(pair) if pair.len() == 2 => {
                    let branch = match &pair[0] {
                        Value::Keyword(tag) => branches.iter().find(|(t, _)| t == tag),
                        _ => None,
                    };
                    match branch {
                        Some((_, child)) => self.unform_form(child, &pair[1])?,
                        None => conformed.clone(),
                    }
                }
                _ => conformed.clone(),
            },
            SpecForm::And(children) => self.unform_form(&children[0], conformed)?,
            SpecForm::Keys { required, optional } => match conformed {
                Value::Map(map) => {
                    let mut out = map.clone();
                    for key in required.iter().chain(optional) {
                        if let Some(v) = map.get(key) {
                            out.insert(key.clone(), self.unform(key, v)?);
                        }
                    }
                    Value::Map(out)
                }
                other => other.clone(),
            },
            SpecForm::CollOf { child, .. } => match conformed {
                Value::Vector(items) => Value::Vector(
                    items
                        .iter()
                        .map(|i| self.unform_form(child, i))
                        .collect::<Result<_, _>>()?,
                ),
                other => other.clone(),
            },
            SpecForm::WithGen { child, .. } => self.unform_form(child, conformed)?,
        })
    }
}
