//! Named boolean predicates referenced from `Pred` nodes.
//!
//! Every predicate is total: a value of the wrong type simply fails it.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, OnceLock, RwLock};

use regex::Regex;
use thiserror::Error;

use crate::keyword::Keyword;
use crate::value::Value;

pub type EvalFn = dyn Fn(&Value, &Value) -> bool + Send + Sync;

#[derive(Clone)]
pub struct PredicateDef {
    pub name: String,
    /// Human description of the accepted parameters.
    pub params_schema: String,
    /// Problem text; `{params}` is replaced by the node's parameters.
    pub description: String,
    /// `eval(params, value)`.
    pub eval: Arc<EvalFn>,
    pub check_params: fn(&Value) -> Result<(), String>,
    pub default_generator: Option<String>,
}

impl fmt::Debug for PredicateDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PredicateDef")
            .field("name", &self.name)
            .field("params_schema", &self.params_schema)
            .field("default_generator", &self.default_generator)
            .finish_non_exhaustive()
    }
}

impl PredicateDef {
    pub fn new(
        name: &str,
        eval: impl Fn(&Value, &Value) -> bool + Send + Sync + 'static,
    ) -> Self {
        PredicateDef {
            name: name.to_owned(),
            params_schema: "none".to_owned(),
            description: name.to_owned(),
            eval: Arc::new(eval),
            check_params: accept_any,
            default_generator: None,
        }
    }

    pub fn describe(&self, params: &Value) -> String {
        if self.description.contains("{params}") {
            self.description.replace("{params}", &params.to_string())
        } else {
            self.description.clone()
        }
    }
}

fn accept_any(_: &Value) -> Result<(), String> {
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PredicateError {
    #[error("predicate `{0}` is already defined")]
    DuplicatePredicate(String),
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),
}

/// Immutable catalogue of predicates; `register` returns an extended copy.
#[derive(Debug, Clone)]
pub struct PredicateLib {
    defs: BTreeMap<String, Arc<PredicateDef>>,
}

impl Default for PredicateLib {
    fn default() -> Self {
        PredicateLib::builtin()
    }
}

impl PredicateLib {
    pub fn builtin() -> Self {
        let defs = builtins()
            .into_iter()
            .map(|d| (d.name.clone(), Arc::new(d)))
            .collect();
        PredicateLib { defs }
    }

    pub fn register(&self, def: PredicateDef) -> Result<PredicateLib, PredicateError> {
        if self.defs.contains_key(&def.name) {
            return Err(PredicateError::DuplicatePredicate(def.name));
        }
        let mut defs = self.defs.clone();
        defs.insert(def.name.clone(), Arc::new(def));
        Ok(PredicateLib { defs })
    }

    pub fn get(&self, name: &str) -> Option<&PredicateDef> {
        self.defs.get(name).map(Arc::as_ref)
    }

    pub fn eval(&self, name: &str, params: &Value, value: &Value) -> Result<bool, PredicateError> {
        let def = self
            .get(name)
            .ok_or_else(|| PredicateError::UnknownPredicate(name.to_owned()))?;
        Ok((def.eval)(params, value))
    }

    pub fn iter(&self) -> impl Iterator<Item = &PredicateDef> {
        self.defs.values().map(Arc::as_ref)
    }

    /// JSON catalogue: name, params schema and description per predicate.
    pub fn catalogue(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.iter()
                .map(|d| {
                    serde_json::json!({
                        "name": d.name,
                        "params": d.params_schema,
                        "description": d.description,
                        "default-generator": d.default_generator,
                    })
                })
                .collect(),
        )
    }
}

fn def(
    name: &str,
    params_schema: &str,
    description: &str,
    generator: Option<&str>,
    check_params: fn(&Value) -> Result<(), String>,
    eval: impl Fn(&Value, &Value) -> bool + Send + Sync + 'static,
) -> PredicateDef {
    PredicateDef {
        name: name.to_owned(),
        params_schema: params_schema.to_owned(),
        description: description.to_owned(),
        eval: Arc::new(eval),
        check_params,
        default_generator: generator.map(str::to_owned),
    }
}

/// Names of the predicates shipped with the library.
pub const BUILTIN_NAMES: [&str; 12] = [
    "one-of",
    "string-regex",
    "int-range",
    "number-range",
    "string-length",
    "type-is",
    "iso-date",
    "iso-datetime-no-ms",
    "iso-datetime-ms",
    "even",
    "positive-number",
    "non-blank-string",
];

fn builtins() -> Vec<PredicateDef> {
    vec![
        def(
            "one-of",
            "vector of allowed values",
            "one-of {params}",
            Some("one-of"),
            |p| match p {
                Value::Vector(v) if !v.is_empty() => Ok(()),
                _ => Err("one-of expects a non-empty vector".into()),
            },
            |p, v| matches!(p, Value::Vector(items) if items.contains(v)),
        ),
        def(
            "string-regex",
            "pattern string, matched against the whole value",
            "string-regex {params}",
            Some("regex-sampler"),
            |p| match p.as_str() {
                Some(pat) => full_match_regex(pat)
                    .map(|_| ())
                    .ok_or_else(|| format!("invalid pattern {pat:?}")),
                None => Err("string-regex expects a pattern string".into()),
            },
            |p, v| match (p.as_str(), v.as_str()) {
                (Some(pat), Some(s)) => full_match_regex(pat).is_some_and(|re| re.is_match(s)),
                _ => false,
            },
        ),
        def(
            "int-range",
            "{\"min\": int?, \"max\": int?}, inclusive",
            "int-range {params}",
            Some("int-range"),
            check_range,
            |p, v| match (range_bounds(p), v) {
                (Some((lo, hi)), Value::Int(i)) => in_bounds(*i as f64, lo, hi),
                _ => false,
            },
        ),
        def(
            "number-range",
            "{\"min\": number?, \"max\": number?}, inclusive",
            "number-range {params}",
            Some("number-range"),
            check_range,
            |p, v| match (range_bounds(p), v) {
                (Some((lo, hi)), Value::Int(_) | Value::Float(_)) => {
                    v.as_f64().is_some_and(|x| !x.is_nan() && in_bounds(x, lo, hi))
                }
                _ => false,
            },
        ),
        def(
            "string-length",
            "{\"min\": int?, \"max\": int?}, character count, inclusive",
            "string-length {params}",
            Some("string-length"),
            check_range,
            |p, v| match (range_bounds(p), v.as_str()) {
                (Some((lo, hi)), Some(s)) => in_bounds(s.chars().count() as f64, lo, hi),
                _ => false,
            },
        ),
        def(
            "type-is",
            "one of null, bool, int, float, number, string, keyword, vector, map",
            "type-is {params}",
            Some("type-is"),
            |p| match p.as_str() {
                Some(k) if TYPE_KINDS.contains(&k) => Ok(()),
                _ => Err(format!("type-is expects one of {TYPE_KINDS:?}")),
            },
            |p, v| match p.as_str() {
                Some("number") => matches!(v, Value::Int(_) | Value::Float(_)),
                Some(kind) => v.kind() == kind,
                None => false,
            },
        ),
        def(
            "iso-date",
            "none",
            "iso-date YYYY-MM-DD",
            None,
            accept_any,
            |_, v| v.as_str().is_some_and(is_iso_date),
        ),
        def(
            "iso-datetime-no-ms",
            "none",
            "iso-datetime-no-ms YYYY-MM-DDThh:mm:ss+/-hh:mm",
            None,
            accept_any,
            |_, v| v.as_str().is_some_and(|s| is_iso_datetime(s, false)),
        ),
        def(
            "iso-datetime-ms",
            "none",
            "iso-datetime-ms YYYY-MM-DDThh:mm:ss.sss+/-hh:mm",
            None,
            accept_any,
            |_, v| v.as_str().is_some_and(|s| is_iso_datetime(s, true)),
        ),
        def(
            "even",
            "none",
            "even",
            Some("even"),
            accept_any,
            |_, v| matches!(v, Value::Int(i) if i % 2 == 0),
        ),
        def(
            "positive-number",
            "none",
            "positive-number",
            Some("positive-number"),
            accept_any,
            |_, v| match v {
                Value::Int(i) => *i > 0,
                Value::Float(f) => f.is_finite() && *f > 0.0,
                _ => false,
            },
        ),
        def(
            "non-blank-string",
            "none",
            "non-blank-string",
            Some("non-blank-string"),
            accept_any,
            |_, v| v.as_str().is_some_and(|s| !s.trim().is_empty()),
        ),
    ]
}

pub const TYPE_KINDS: [&str; 9] = [
    "null", "bool", "int", "float", "number", "string", "keyword", "vector", "map",
];

/// Compiled `^(?:pattern)$`, cached per pattern. `None` for invalid patterns.
pub fn full_match_regex(pattern: &str) -> Option<Arc<Regex>> {
    static CACHE: OnceLock<RwLock<HashMap<String, Option<Arc<Regex>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(hit) = cache.read().expect("regex cache poisoned").get(pattern) {
        return hit.clone();
    }
    let compiled = Regex::new(&format!("^(?:{pattern})$")).ok().map(Arc::new);
    cache
        .write()
        .expect("regex cache poisoned")
        .insert(pattern.to_owned(), compiled.clone());
    compiled
}

/// `(min, max)` from a `{"min": .., "max": ..}` map; `None` when malformed.
pub fn range_bounds(params: &Value) -> Option<(Option<f64>, Option<f64>)> {
    let map = match params {
        Value::Null => return Some((None, None)),
        Value::Map(m) => m,
        _ => return None,
    };
    let bound = |name: &str| -> Option<Option<f64>> {
        let key = Keyword::simple(name).expect("static key");
        match map.get(&key) {
            None | Some(Value::Null) => Some(None),
            Some(v) => v.as_f64().filter(|x| !x.is_nan()).map(Some),
        }
    };
    Some((bound("min")?, bound("max")?))
}

fn check_range(params: &Value) -> Result<(), String> {
    match range_bounds(params) {
        Some((Some(lo), Some(hi))) if lo > hi => Err(format!("min {lo} exceeds max {hi}")),
        Some(_) => Ok(()),
        None => Err("expects {\"min\": number?, \"max\": number?}".into()),
    }
}

fn in_bounds(x: f64, lo: Option<f64>, hi: Option<f64>) -> bool {
    lo.is_none_or(|lo| x >= lo) && hi.is_none_or(|hi| x <= hi)
}

pub fn is_leap_year(year: u32) -> bool {
    (year.is_multiple_of(4) && !year.is_multiple_of(100)) || year.is_multiple_of(400)
}

pub fn days_in_month(year: u32, month: u32) -> u32 {
    match month {
        1 | 3 | 5 | 7 | 8 | 10 | 12 => 31,
        4 | 6 | 9 | 11 => 30,
        2 if is_leap_year(year) => 29,
        2 => 28,
        _ => 0,
    }
}

fn digits(b: &[u8]) -> Option<u32> {
    if b.is_empty() || !b.iter().all(u8::is_ascii_digit) {
        return None;
    }
    Some(b.iter().fold(0, |acc, d| acc * 10 + u32::from(d - b'0')))
}

fn check_date(b: &[u8]) -> bool {
    if b.len() != 10 || b[4] != b'-' || b[7] != b'-' {
        return false;
    }
    match (digits(&b[0..4]), digits(&b[5..7]), digits(&b[8..10])) {
        (Some(y), Some(m), Some(d)) => (1..=12).contains(&m) && d >= 1 && d <= days_in_month(y, m),
        _ => false,
    }
}

/// `hh:mm` with hours 00-23 and minutes 00-59.
fn check_hh_mm(b: &[u8]) -> bool {
    b.len() == 5
        && b[2] == b':'
        && digits(&b[0..2]).is_some_and(|h| h <= 23)
        && digits(&b[3..5]).is_some_and(|m| m <= 59)
}

/// `YYYY-MM-DD` naming a real Gregorian calendar date.
pub fn is_iso_date(s: &str) -> bool {
    check_date(s.as_bytes())
}

/// `YYYY-MM-DDThh:mm:ss[.sss]+/-hh:mm`. Leap seconds are rejected.
pub fn is_iso_datetime(s: &str, with_millis: bool) -> bool {
    let b = s.as_bytes();
    let expected_len = if with_millis { 29 } else { 25 };
    if b.len() != expected_len || !check_date(&b[0..10]) || b[10] != b'T' {
        return false;
    }
    if !check_hh_mm(&b[11..16]) || b[16] != b':' || !digits(&b[17..19]).is_some_and(|s| s <= 59) {
        return false;
    }
    let mut rest = &b[19..];
    if with_millis {
        if rest[0] != b'.' || digits(&rest[1..4]).is_none() {
            return false;
        }
        rest = &rest[4..];
    }
    matches!(rest[0], b'+' | b'-') && check_hh_mm(&rest[1..])
}

/// Legal Entity Identifier check: 18 alphanumerics, 2 check digits, and an
/// ISO 7064 mod 97-10 remainder of 1 over the letter-expanded string.
pub fn is_valid_lei(s: &str) -> bool {
    let b = s.as_bytes();
    if b.len() != 20
        || !b[..18].iter().all(|c| c.is_ascii_digit() || c.is_ascii_uppercase())
        || !b[18..].iter().all(u8::is_ascii_digit)
    {
        return false;
    }
    let mut rem: u32 = 0;
    for &c in b {
        let v = if c.is_ascii_digit() {
            u32::from(c - b'0')
        } else {
            u32::from(c - b'A') + 10
        };
        rem = if v >= 10 { (rem * 100 + v) % 97 } else { (rem * 10 + v) % 97 };
    }
    rem == 1
}

/// Example custom predicate, not part of the built-in set.
pub fn lei_checksum_predicate() -> PredicateDef {
    PredicateDef {
        params_schema: "none".into(),
        description: "lei-checksum (ISO 17442 / ISO 7064 mod 97-10)".into(),
        ..PredicateDef::new("lei-checksum", |_, v| v.as_str().is_some_and(is_valid_lei))
    }
}
