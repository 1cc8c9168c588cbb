//! JSON ruleset files.
//!
//! ```json
//! {
//!   "namespace": "mmsr",
//!   "specs": {
//!     "::valid-date": {"op": "pred", "name": "iso-date", "source": "..."},
//!     "::trade-date": {"op": "or", "branches": [["::valid-date", "::valid-date"]]}
//!   },
//!   "root": "::trade-date"
//! }
//! ```
//!
//! A spec node is either a `"::name"` string (a reference) or an object
//! with an `op` of `pred`, `one-of`, `or`, `and`, `keys`, `coll-of`,
//! `with-gen` or `ref`. Top-level entries may also carry `source` and
//! `opaque` metadata. Bare `::name` keywords resolve against `namespace`.

use std::path::Path;

use serde_json::{Map, Value as Json};
use thiserror::Error;

use crate::keyword::Keyword;
use crate::predicates::PredicateLib;
use crate::registry::{Registry, SpecError};
use crate::spec::{SpecForm, SpecMeta};
use crate::value::Value;

#[derive(Debug, Error)]
pub enum RulesetError {
    #[error("cannot read ruleset: {0}")]
    Io(#[from] std::io::Error),
    #[error("ruleset is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{at}: {reason}")]
    Invalid { at: String, reason: String },
    #[error(transparent)]
    Spec(#[from] SpecError),
}

#[derive(Debug, Clone)]
pub struct Ruleset {
    pub namespace: Option<String>,
    pub registry: Registry,
    pub root: Keyword,
}

pub fn load_ruleset(path: impl AsRef<Path>) -> Result<Ruleset, RulesetError> {
    parse_ruleset(&std::fs::read_to_string(path)?)
}

pub fn parse_ruleset(text: &str) -> Result<Ruleset, RulesetError> {
    parse_ruleset_with(text, PredicateLib::builtin())
}

pub fn parse_ruleset_with(text: &str, predicates: PredicateLib) -> Result<Ruleset, RulesetError> {
    let json: Json = serde_json::from_str(text)?;
    let top = json.as_object().ok_or_else(|| invalid("ruleset", "expected an object"))?;
    for key in top.keys() {
        if !["namespace", "specs", "root"].contains(&key.as_str()) {
            return Err(invalid("ruleset", format!("unexpected field `{key}`")));
        }
    }
    let namespace = match top.get("namespace") {
        None | Some(Json::Null) => None,
        Some(Json::String(ns)) => {
            Keyword::new(ns, "x").map_err(|_| invalid("namespace", format!("invalid namespace {ns:?}")))?;
            Some(ns.clone())
        }
        Some(_) => return Err(invalid("namespace", "expected a string")),
    };
    let ns = namespace.as_deref();
    let specs = top
        .get("specs")
        .and_then(Json::as_object)
        .ok_or_else(|| invalid("specs", "expected an object of spec definitions"))?;
    let root_text = top
        .get("root")
        .and_then(Json::as_str)
        .ok_or_else(|| invalid("root", "expected a keyword string"))?;
    let root = keyword(root_text, ns).map_err(|r| invalid("root", r))?;

    let mut registry = Registry::with_predicates(predicates);
    for (name_text, node) in specs {
        let name = keyword(name_text, ns).map_err(|r| invalid(name_text, r))?;
        let (form, meta) = entry(node, ns).map_err(|r| invalid(name_text, r))?;
        registry = registry.register(name, form, meta)?;
    }
    registry.check()?;
    registry.resolve(&root)?;
    Ok(Ruleset { namespace, registry, root })
}

fn invalid(at: &str, reason: impl Into<String>) -> RulesetError {
    RulesetError::Invalid {
        at: at.to_owned(),
        reason: reason.into(),
    }
}

fn keyword(text: &str, ns: Option<&str>) -> Result<Keyword, String> {
    Keyword::parse_with_default(text, ns).map_err(|e| e.to_string())
}

fn entry(node: &Json, ns: Option<&str>) -> Result<(SpecForm, SpecMeta), String> {
    let mut meta = SpecMeta::default();
    if let Json::Object(obj) = node {
        if let Some(src) = obj.get("source") {
            meta.source_text = Some(src.as_str().ok_or("`source` must be a string")?.to_owned());
        }
        if let Some(opaque) = obj.get("opaque") {
            meta.opaque = opaque.as_bool().ok_or("`opaque` must be a boolean")?;
        }
    }
    Ok((form(node, ns, true)?, meta))
}

fn form(node: &Json, ns: Option<&str>, top_level: bool) -> Result<SpecForm, String> {
    let obj = match node {
        Json::String(s) => return Ok(SpecForm::Ref(keyword(s, ns)?)),
        Json::Object(obj) => obj,
        _ => return Err("a spec node is a keyword string or an object with `op`".into()),
    };
    let op = obj.get("op").and_then(Json::as_str).ok_or("missing `op`")?;
    let allowed: &[&str] = match op {
        "pred" => &["name", "params"],
        "one-of" => &["values"],
        "or" => &["branches"],
        "and" => &["children"],
        "keys" => &["required", "optional"],
        "coll-of" => &["child", "min-count", "max-count"],
        "with-gen" => &["child", "generator", "params"],
        "ref" => &["target"],
        other => return Err(format!("unknown op `{other}`")),
    };
    for key in obj.keys() {
        let meta_key = top_level && (key == "source" || key == "opaque");
        if key != "op" && !meta_key && !allowed.contains(&key.as_str()) {
            return Err(format!("unexpected field `{key}` for op `{op}`"));
        }
    }
    let field = |name: &str| obj.get(name).ok_or_else(|| format!("`{op}` needs `{name}`"));
    let params = |obj: &Map<String, Json>| -> Result<Value, String> {
        obj.get("params")
            .map(Value::from_json)
            .transpose()
            .map(Option::unwrap_or_default)
            .map_err(|e| format!("params: {e}"))
    };
    let keywords = |name: &str| -> Result<Vec<Keyword>, String> {
        match obj.get(name) {
            None => Ok(Vec::new()),
            Some(Json::Array(items)) => items
                .iter()
                .map(|i| i.as_str().ok_or_else(|| format!("`{name}` holds keyword strings")).and_then(|s| keyword(s, ns)))
                .collect(),
            Some(_) => Err(format!("`{name}` must be an array")),
        }
    };
    let count = |name: &str| -> Result<Option<usize>, String> {
        match obj.get(name) {
            None | Some(Json::Null) => Ok(None),
            Some(v) => v
                .as_u64()
                .map(|n| Some(n as usize))
                .ok_or_else(|| format!("`{name}` must be a non-negative integer")),
        }
    };

    Ok(match op {
        "pred" => SpecForm::Pred {
            name: field("name")?.as_str().ok_or("`name` must be a string")?.to_owned(),
            params: params(obj)?,
        },
        "one-of" => {
            let values = Value::from_json(field("values")?).map_err(|e| format!("values: {e}"))?;
            if !matches!(values, Value::Vector(_)) {
                return Err("`values` must be an array".into());
            }
            SpecForm::pred_with("one-of", values)
        }
        "or" => {
            let branches = field("branches")?.as_array().ok_or("`branches` must be an array")?;
            SpecForm::Or(
                branches
                    .iter()
                    .map(|b| match b.as_array().map(Vec::as_slice) {
                        Some([Json::String(tag), child]) => Ok((keyword(tag, ns)?, form(child, ns, false)?)),
                        _ => Err("each branch is [\"::tag\", node]".to_owned()),
                    })
                    .collect::<Result<_, _>>()?,
            )
        }
        "and" => SpecForm::And(
            field("children")?
                .as_array()
                .ok_or("`children` must be an array")?
                .iter()
                .map(|c| form(c, ns, false))
                .collect::<Result<_, _>>()?,
        ),
        "keys" => SpecForm::Keys {
            required: keywords("required")?,
            optional: keywords("optional")?,
        },
        "coll-of" => SpecForm::CollOf {
            child: Box::new(form(field("child")?, ns, false)?),
            min_count: count("min-count")?,
            max_count: count("max-count")?,
        },
        "with-gen" => SpecForm::WithGen {
            child: Box::new(form(field("child")?, ns, false)?),
            generator: field("generator")?.as_str().ok_or("`generator` must be a string")?.to_owned(),
            params: params(obj)?,
        },
        "ref" => SpecForm::Ref(keyword(field("target")?.as_str().ok_or("`target` must be a string")?, ns)?),
        _ => unreachable!("op checked above"),
    })
}

/// Serializes a form with fully qualified keywords.
pub fn form_to_json(form: &SpecForm) -> Json {
    use serde_json::json;
    match form {
        SpecForm::Ref(k) => Json::String(k.to_string()),
        SpecForm::Pred { name, params } if name == "one-of" && matches!(params, Value::Vector(_)) => {
            json!({"op": "one-of", "values": params.to_json()})
        }
        SpecForm::Pred { name, params } => {
            let mut obj = json!({"op": "pred", "name": name});
            if *params != Value::Null {
                obj["params"] = params.to_json();
            }
            obj
        }
        SpecForm::Or(branches) => json!({
            "op": "or",
            "branches": branches.iter().map(|(t, c)| json!([t.to_string(), form_to_json(c)])).collect::<Vec<_>>(),
        }),
        SpecForm::And(children) => json!({"op": "and", "children": children.iter().map(form_to_json).collect::<Vec<_>>()}),
        SpecForm::Keys { required, optional } => json!({
            "op": "keys",
            "required": required.iter().map(Keyword::to_string).collect::<Vec<_>>(),
            "optional": optional.iter().map(Keyword::to_string).collect::<Vec<_>>(),
        }),
        SpecForm::CollOf { child, min_count, max_count } => {
            let mut obj = json!({"op": "coll-of", "child": form_to_json(child)});
            if let Some(n) = min_count {
                obj["min-count"] = json!(n);
            }
            if let Some(n) = max_count {
                obj["max-count"] = json!(n);
            }
            obj
        }
        SpecForm::WithGen { child, generator, params } => {
            let mut obj = json!({"op": "with-gen", "child": form_to_json(child), "generator": generator});
            if *params != Value::Null {
                obj["params"] = params.to_json();
            }
            obj
        }
    }
}

/// The ruleset file for `registry` (every registered spec), rooted at `root`.
pub fn ruleset_to_json(registry: &Registry, root: &Keyword, namespace: Option<&str>) -> Json {
    let mut specs = Map::new();
    for (name, entry) in registry.iter() {
        let mut node = form_to_json(&entry.form);
        if entry.meta.source_text.is_some() || entry.meta.opaque {
            if !node.is_object() {
                node = serde_json::json!({"op": "ref", "target": node});
            }
            if let Some(src) = &entry.meta.source_text {
                node["source"] = src.clone().into();
            }
            if entry.meta.opaque {
                node["opaque"] = true.into();
            }
        }
        specs.insert(name.to_string(), node);
    }
    serde_json::json!({
        "namespace": namespace,
        "specs": specs,
        "root": root.to_string(),
    })
}
