//! Namespaced keywords, the names under which contracts are registered.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid keyword `{text}`: {reason}")]
pub struct KeywordError {
    pub text: String,
    pub reason: &'static str,
}

/// A namespaced name such as `::mmsr/trade-date`.
///
/// The namespace may be empty, in which case the keyword prints as `::name`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Keyword {
    namespace: String,
    name: String,
}

fn is_segment(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

fn is_namespace(s: &str) -> bool {
    s.split('.').all(is_segment)
}

impl Keyword {
    pub fn new(namespace: &str, name: &str) -> Result<Self, KeywordError> {
        let err = |reason| KeywordError {
            text: format!("{namespace}/{name}"),
            reason,
        };
        if !is_segment(name) {
            return Err(err("name must match [A-Za-z][A-Za-z0-9_-]*"));
        }
        if !namespace.is_empty() && !is_namespace(namespace) {
            return Err(err("namespace must be dot-separated [A-Za-z][A-Za-z0-9_-]* segments"));
        }
        Ok(Keyword {
            namespace: namespace.to_owned(),
            name: name.to_owned(),
        })
    }

    /// Keyword without a namespace.
    pub fn simple(name: &str) -> Result<Self, KeywordError> {
        Keyword::new("", name)
    }

    pub fn namespace(&self) -> &str {
        &self.namespace
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Parses `::ns/name` or `::name`; a bare `::name` takes `default_ns`.
    pub fn parse_with_default(text: &str, default_ns: Option<&str>) -> Result<Self, KeywordError> {
        let body = text.strip_prefix("::").ok_or_else(|| KeywordError {
            text: text.to_owned(),
            reason: "keywords start with `::`",
        })?;
        Keyword::parse_body(body, default_ns).map_err(|mut e| {
            e.text = text.to_owned();
            e
        })
    }

    /// Parses the unprefixed `ns/name` or `name` form used for message map keys.
    pub fn parse_body(body: &str, default_ns: Option<&str>) -> Result<Self, KeywordError> {
        match body.split_once('/') {
            Some(("", _)) => Err(KeywordError {
                text: body.to_owned(),
                reason: "empty namespace before `/`",
            }),
            Some((ns, name)) => Keyword::new(ns, name),
            None => Keyword::new(default_ns.unwrap_or(""), body),
        }
    }

    /// `ns/name`, or just `name` when the namespace is empty.
    pub fn body(&self) -> String {
        if self.namespace.is_empty() {
            self.name.clone()
        } else {
            format!("{}/{}", self.namespace, self.name)
        }
    }

    /// Text form relative to a document namespace: `::name` when the
    /// namespace matches, the full `::ns/name` otherwise.
    pub fn to_relative(&self, doc_ns: Option<&str>) -> String {
        match doc_ns {
            Some(ns) if ns == self.namespace => format!("::{}", self.name),
            _ => self.to_string(),
        }
    }
}

impl fmt::Display for Keyword {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "::{}", self.body())
    }
}

impl FromStr for Keyword {
    type Err = KeywordError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Keyword::parse_with_default(s, None)
    }
}

/// Shorthand for tests and static tables; panics on malformed input.
#[macro_export]
macro_rules! kw {
    ($text:expr) => {
        $text.parse::<$crate::Keyword>().expect("valid keyword literal")
    };
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_qualified_and_bare() {
        let k: Keyword = "::mmsr/trade-date".parse().unwrap();
        assert_eq!(k.namespace(), "mmsr");
        assert_eq!(k.name(), "trade-date");
        assert_eq!(k.to_string(), "::mmsr/trade-date");

        let bare = Keyword::parse_with_default("::valid-date", Some("mmsr")).unwrap();
        assert_eq!(bare, k.clone_with_name("valid-date"));
        assert_eq!(Keyword::simple("fruit").unwrap().to_string(), "::fruit");
    }

    #[test]
    fn dotted_namespace() {
        let k: Keyword = "::eu.ecb.mmsr/lei".parse().unwrap();
        assert_eq!(k.namespace(), "eu.ecb.mmsr");
        assert!("::a/b.c".parse::<Keyword>().is_err());
    }

    #[test]
    fn rejects_malformed() {
        for bad in ["fruit", "::", "::1abc", "::a/", "::/a", "::a b", "::a/b/c", "::.a/b"] {
            assert!(bad.parse::<Keyword>().is_err(), "{bad} accepted");
        }
    }

    #[test]
    fn relative_rendering() {
        let k: Keyword = "::mmsr/valid-date".parse().unwrap();
        assert_eq!(k.to_relative(Some("mmsr")), "::valid-date");
        assert_eq!(k.to_relative(Some("other")), "::mmsr/valid-date");
        assert_eq!(k.to_relative(None), "::mmsr/valid-date");
    }

    impl Keyword {
        fn clone_with_name(&self, name: &str) -> Keyword {
            Keyword::new(&self.namespace, name).unwrap()
        }
    }
}
