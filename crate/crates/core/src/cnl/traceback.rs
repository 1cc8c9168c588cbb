use super::{sentence, CnlDocument};
use crate::engine::Problem;
use crate::keyword::Keyword;

/// A validation problem located in the controlled-language document.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    pub problem: Problem,
    /// The innermost contract of `problem.via` present in the document, or
    /// the root when none is.
    pub element: Option<Keyword>,
    pub sentence: Option<String>,
    pub source_text: Option<String>,
    pub line: Option<usize>,
    /// The failing contract is finer-grained than anything the document names.
    pub below_granularity: bool,
}

impl TraceEntry {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "problem": self.problem.to_json(),
            "element": self.element.as_ref().map(Keyword::to_string),
            "sentence": self.sentence,
            "source-text": self.source_text,
            "line": self.line,
            "below-granularity": self.below_granularity,
        })
    }
}

pub fn traceback(doc: &CnlDocument, problems: &[Problem]) -> Vec<TraceEntry> {
    let ns = doc.namespace.as_deref();
    problems
        .iter()
        .map(|p| {
            let hit = p.via.iter().rev().find_map(|k| doc.element(k));
            let below_granularity = hit.is_none();
            let element = hit.or_else(|| doc.root_element());
            TraceEntry {
                problem: p.clone(),
                element: element.map(|e| e.name.clone()),
                sentence: element.map(|e| sentence(e, ns)),
                source_text: element.and_then(|e| e.source_text.clone()),
                line: element.map(|e| e.line),
                below_granularity,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;
    use crate::kw;
    use crate::value::Value;

    fn problem(via: &[&str]) -> Problem {
        Problem {
            in_path: vec![],
            via: via.iter().map(|k| kw!(k)).collect(),
            pred: "p".into(),
            val: Value::Null,
        }
    }

    fn doc() -> CnlDocument {
        parse(
            "namespace: mmsr\nThe contract ::valid-date must hold.\nsource: \"YYYY-MM-DD\"\n\
             The contract ::trade-date holds, if at least one of the contracts ::valid-date holds.\n\
             The root contract is ::trade-date.",
        )
        .unwrap()
    }

    #[test]
    fn innermost_element_wins() {
        let t = traceback(&doc(), &[problem(&["::mmsr/trade-date", "::mmsr/valid-date"])]);
        assert_eq!(t[0].element, Some(kw!("::mmsr/valid-date")));
        assert_eq!(t[0].sentence.as_deref(), Some("The contract ::valid-date must hold."));
        assert_eq!(t[0].source_text.as_deref(), Some("YYYY-MM-DD"));
        assert_eq!(t[0].line, Some(2));
        assert!(!t[0].below_granularity);
    }

    #[test]
    fn unknown_chain_falls_back_to_root() {
        let t = traceback(&doc(), &[problem(&["::k-not-in-doc"])]);
        assert_eq!(t[0].element, Some(kw!("::mmsr/trade-date")));
        assert!(t[0].below_granularity);
        assert!(traceback(&doc(), &[]).is_empty());
    }
}
