//! The data model messages are made of, and its JSON interchange form.
//!
//! In JSON, map keys are written without the leading colons
//! (`"mmsr/trade-date"`) and keyword values carry a single `:` prefix
//! (`":mmsr/valid-date"`). A consequence is that plain strings starting with
//! `:` cannot be expressed in the interchange form.

use std::collections::BTreeMap;
use std::fmt;

use serde_json::Number;
use thiserror::Error;

use crate::keyword::Keyword;

#[derive(Debug, Clone, Default)]
pub enum Value {
    #[default]
    Null,
    Bool(bool),
    Int(i64),
    Float(f64),
    String(String),
    Keyword(Keyword),
    Vector(Vec<Value>),
    Map(BTreeMap<Keyword, Value>),
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        use Value::*;
        match (self, other) {
            (Null, Null) => true,
            (Bool(a), Bool(b)) => a == b,
            (Int(a), Int(b)) => a == b,
            // bitwise, except that NaN never equals anything
            (Float(a), Float(b)) => !a.is_nan() && a.to_bits() == b.to_bits(),
            (String(a), String(b)) => a == b,
            (Keyword(a), Keyword(b)) => a == b,
            (Vector(a), Vector(b)) => a == b,
            (Map(a), Map(b)) => a == b,
            _ => false,
        }
    }
}

impl Value {
    pub fn kind(&self) -> &'static str {
        match self {
            Value::Null => "null",
            Value::Bool(_) => "bool",
            Value::Int(_) => "int",
            Value::Float(_) => "float",
            Value::String(_) => "string",
            Value::Keyword(_) => "keyword",
            Value::Vector(_) => "vector",
            Value::Map(_) => "map",
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::String(s) => Some(s),
            _ => None,
        }
    }

    /// Numeric view used by range predicates; Int and Float compare by value.
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Int(i) => Some(*i as f64),
            Value::Float(f) => Some(*f),
            _ => None,
        }
    }

    pub fn as_map(&self) -> Option<&BTreeMap<Keyword, Value>> {
        match self {
            Value::Map(m) => Some(m),
            _ => None,
        }
    }

    /// Looks up a map entry by an unqualified or `ns/name` key.
    pub fn get(&self, key: &Keyword) -> Option<&Value> {
        self.as_map().and_then(|m| m.get(key))
    }

    /// Follows a data path from this value.
    pub fn get_in(&self, path: &[PathStep]) -> Option<&Value> {
        let mut cur = self;
        for step in path {
            cur = match (step, cur) {
                (PathStep::Key(k), Value::Map(m)) => m.get(k)?,
                (PathStep::Index(i), Value::Vector(v)) => v.get(*i)?,
                _ => return None,
            };
        }
        Some(cur)
    }

    pub fn from_json(json: &serde_json::Value) -> Result<Value, ValueError> {
        Ok(match json {
            serde_json::Value::Null => Value::Null,
            serde_json::Value::Bool(b) => Value::Bool(*b),
            serde_json::Value::Number(n) => match n.as_i64() {
                Some(i) => Value::Int(i),
                None => Value::Float(n.as_f64().ok_or(ValueError::Number)?),
            },
            serde_json::Value::String(s) => match s.strip_prefix(':') {
                Some(body) => Value::Keyword(
                    Keyword::parse_body(body, None).map_err(|e| ValueError::Keyword(e.to_string()))?,
                ),
                None => Value::String(s.clone()),
            },
            serde_json::Value::Array(items) => Value::Vector(
                items
                    .iter()
                    .map(Value::from_json)
                    .collect::<Result<_, _>>()?,
            ),
            serde_json::Value::Object(obj) => {
                let mut map = BTreeMap::new();
                for (k, v) in obj {
                    let key = Keyword::parse_body(k, None)
                        .map_err(|e| ValueError::Keyword(e.to_string()))?;
                    map.insert(key, Value::from_json(v)?);
                }
                Value::Map(map)
            }
        })
    }

    /// Non-finite floats have no JSON form and are written as `null`.
    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Value::Null => serde_json::Value::Null,
            Value::Bool(b) => serde_json::Value::Bool(*b),
            Value::Int(i) => serde_json::Value::Number((*i).into()),
            Value::Float(f) => Number::from_f64(*f)
                .map(serde_json::Value::Number)
                .unwrap_or(serde_json::Value::Null),
            Value::String(s) => serde_json::Value::String(s.clone()),
            Value::Keyword(k) => serde_json::Value::String(format!(":{}", k.body())),
            Value::Vector(items) => {
                serde_json::Value::Array(items.iter().map(Value::to_json).collect())
            }
            Value::Map(m) => serde_json::Value::Object(
                m.iter().map(|(k, v)| (k.body(), v.to_json())).collect(),
            ),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_json())
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::String(s.to_owned())
    }
}

impl From<String> for Value {
    fn from(s: String) -> Self {
        Value::String(s)
    }
}

impl From<i64> for Value {
    fn from(i: i64) -> Self {
        Value::Int(i)
    }
}

impl From<f64> for Value {
    fn from(f: f64) -> Self {
        Value::Float(f)
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Self {
        Value::Bool(b)
    }
}

impl From<Keyword> for Value {
    fn from(k: Keyword) -> Self {
        Value::Keyword(k)
    }
}

impl<T: Into<Value>> From<Vec<T>> for Value {
    fn from(items: Vec<T>) -> Self {
        Value::Vector(items.into_iter().map(Into::into).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValueError {
    #[error("number is not representable as a 64-bit value")]
    Number,
    #[error("{0}")]
    Keyword(String),
}

/// One step of a data path: a map key or a vector index.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PathStep {
    Key(Keyword),
    Index(usize),
}

impl PathStep {
    pub fn to_json(&self) -> serde_json::Value {
        match self {
            PathStep::Key(k) => serde_json::Value::String(k.body()),
            PathStep::Index(i) => serde_json::Value::Number((*i as u64).into()),
        }
    }
}
