//! The bundled secured-market report contracts.
//!
//! An illustrative encoding of a handful of fields from money market
//! statistical reporting, with the trade date contract as its centrepiece.
//! It is not an authoritative encoding of the reporting rules.

use crate::cnl::{parse, CnlDocument};
use crate::datagen::{iso_date_generator, iso_datetime_ms_generator, iso_datetime_no_ms_generator, Generators};
use crate::keyword::Keyword;
use crate::ruleset::{parse_ruleset, Ruleset};
use crate::value::Value;

pub const RULESET_JSON: &str = include_str!("../../../data/mmsr.json");
pub const CNL_TEXT: &str = include_str!("../../../data/mmsr.cnl");
pub const EXAMPLE_MESSAGE_JSON: &str = include_str!("../../../data/example-message.json");

/// Messages that break one rule each, with the problems `explain` reports
/// for them against [`SECURED_REPORT`].
pub const INVALID_MESSAGES: [(&str, &str, &str); 7] = [
    invalid!("bad-date"),
    invalid!("bad-transaction-type"),
    invalid!("missing-lei"),
    invalid!("negative-amount"),
    invalid!("non-leap-maturity"),
    invalid!("short-isin"),
    invalid!("string-rate"),
];

macro_rules! invalid {
    ($name:literal) => {
        (
            $name,
            include_str!(concat!("../../../data/invalid-messages/", $name, ".json")),
            include_str!(concat!("../../../data/invalid-messages/", $name, ".expected.json")),
        )
    };
}
use invalid;

pub const NAMESPACE: &str = "mmsr";
pub const ROOT: &str = "::mmsr/report-file";
pub const SECURED_REPORT: &str = "::mmsr/secured-report";
pub const TRADE_DATE: &str = "::mmsr/trade-date";

pub fn keyword(name: &str) -> Keyword {
    Keyword::new(NAMESPACE, name).expect("bundle names are valid")
}

pub fn ruleset() -> Ruleset {
    parse_ruleset(RULESET_JSON).expect("bundled ruleset loads")
}

/// Built-in generators plus the date generators the bundle attaches.
pub fn generators() -> Generators {
    [iso_date_generator(), iso_datetime_no_ms_generator(), iso_datetime_ms_generator()]
        .into_iter()
        .try_fold(Generators::builtin(), |g, def| g.register(def))
        .expect("date generator names are free")
}

pub fn cnl_document() -> CnlDocument {
    parse(CNL_TEXT).expect("bundled document parses")
}

/// A complete secured-market report with a millisecond trade date.
pub fn canonical_example() -> Value {
    message(EXAMPLE_MESSAGE_JSON)
}

fn message(text: &str) -> Value {
    Value::from_json(&serde_json::from_str(text).expect("bundled message is JSON")).expect("bundled message decodes")
}

/// `(name, message, expected problems as JSON)` for every bundled invalid message.
pub fn invalid_messages() -> Vec<(&'static str, Value, serde_json::Value)> {
    INVALID_MESSAGES
        .iter()
        .map(|(name, msg, expected)| (*name, message(msg), serde_json::from_str(expected).expect("expected problems are JSON")))
        .collect()
}

/// Every bundled message with its expected verdict against [`SECURED_REPORT`].
pub fn examples() -> Vec<(Value, bool)> {
    std::iter::once((canonical_example(), true))
        .chain(invalid_messages().into_iter().map(|(_, msg, _)| (msg, false)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnl::{abstract_registry, render, soundness_check};
    use crate::engine::Problem;
    use crate::kw;

    #[test]
    fn bundle_loads_with_expected_root() {
        let rs = ruleset();
        assert_eq!(rs.root, kw!("::mmsr/report-file"));
        assert_eq!(rs.registry.len(), 15);
        assert_eq!(rs.namespace.as_deref(), Some(NAMESPACE));
    }

    #[test]
    fn canonical_example_is_valid() {
        let rs = ruleset();
        let msg = canonical_example();
        assert!(rs.registry.validate(&kw!("::mmsr/secured-report"), &msg).unwrap());
        assert!(rs.registry.validate(&rs.root, &Value::Vector(vec![msg])).unwrap());
        assert!(!rs.registry.validate(&rs.root, &Value::Vector(vec![])).unwrap());
    }

    #[test]
    fn invalid_messages_report_expected_problems() {
        let rs = ruleset();
        for (name, msg, expected) in invalid_messages() {
            let problems = rs.registry.explain(&kw!("::mmsr/secured-report"), &msg).unwrap();
            let got: Vec<_> = problems.iter().map(Problem::to_json).collect();
            assert_eq!(serde_json::Value::from(got), expected, "{name}");
        }
    }

    #[test]
    fn examples_match_their_verdicts() {
        let rs = ruleset();
        let spec = kw!("::mmsr/secured-report");
        for (msg, expected) in examples() {
            assert_eq!(rs.registry.validate(&spec, &msg).unwrap(), expected, "{msg}");
        }
    }

    #[test]
    fn shipped_document_is_the_abstraction() {
        let rs = ruleset();
        let a = abstract_registry(&rs.registry, &rs.root).unwrap();
        assert_eq!(render(&a.document), CNL_TEXT);
        assert_eq!(cnl_document(), a.document);
        assert!(soundness_check(&cnl_document(), &rs.registry, Some(&rs.root)).is_empty());
        assert_eq!(a.document.elements.len(), rs.registry.len());
    }
}
