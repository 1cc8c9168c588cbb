use std::collections::{BTreeMap, BTreeSet};

use super::{CnlDocument, CnlElement, CnlError, ElementKind};
use crate::keyword::Keyword;
use crate::spec::Combinator;

pub(super) const ATOMIC: &str = "The contract <k> must hold.";
pub(super) const OR: &str = "The contract <k> holds, if at least one of the contracts <k1>, ..., <kn> holds.";
pub(super) const AND: &str = "The contract <k> holds, if all of the contracts <k1>, ..., <kn> hold.";
pub(super) const KEYS: &str =
    "The contract <k> holds, if for the keys and values of this map the contracts <k1>, ..., <kn> hold.";
pub(super) const COLL_OF: &str =
    "The contract <k> holds, if for the members of this collection the contract <k1> holds.";
const ROOT: &str = "The root contract is <k>.";
const SOURCE: &str = "source: \"<quote>\"";
const NAMESPACE: &str = "namespace: <ident> before any sentence";
const ANY: &str = "a contract sentence, `The root contract is <k>.`, `source: \"<quote>\"`, `namespace: <ident>` or a `#` comment";

struct Cursor<'a> {
    rest: &'a str,
    ns: Option<&'a str>,
}

impl<'a> Cursor<'a> {
    fn eat(&mut self, lit: &str) -> bool {
        match self.rest.strip_prefix(lit) {
            Some(r) => {
                self.rest = r;
                true
            }
            None => false,
        }
    }

    fn segment(&mut self) -> Option<&'a str> {
        let bytes = self.rest.as_bytes();
        if !bytes.first()?.is_ascii_alphabetic() {
            return None;
        }
        let end = bytes
            .iter()
            .position(|b| !(b.is_ascii_alphanumeric() || *b == b'_' || *b == b'-'))
            .unwrap_or(bytes.len());
        let (seg, rest) = self.rest.split_at(end);
        self.rest = rest;
        Some(seg)
    }

    /// `::name` or `::ns/name`; a namespace may contain dots, a name may not,
    /// so a dot not followed by a letter ends the token (sentence period).
    fn keyword(&mut self) -> Option<Keyword> {
        let start = self.rest;
        if !self.eat("::") {
            return None;
        }
        self.segment()?;
        let mut dotted = false;
        while self.rest.starts_with('.')
            && self.rest.as_bytes()[1..].first().is_some_and(u8::is_ascii_alphabetic)
        {
            self.rest = &self.rest[1..];
            self.segment()?;
            dotted = true;
        }
        if self.eat("/") {
            self.segment()?;
        } else if dotted {
            return None;
        }
        let token = &start[..start.len() - self.rest.len()];
        Keyword::parse_with_default(token, self.ns).ok()
    }

    fn keyword_list(&mut self) -> Option<Vec<Keyword>> {
        let mut out = vec![self.keyword()?];
        while self.eat(", ") {
            out.push(self.keyword()?);
        }
        Some(out)
    }
}

enum Line {
    Element(CnlElement),
    Root(Keyword),
}

fn syntax(line: usize, expected: &str) -> CnlError {
    CnlError::Syntax {
        line,
        expected: expected.to_owned(),
    }
}

fn compound_tail(c: &mut Cursor<'_>, line: usize) -> Result<(Combinator, Vec<Keyword>), CnlError> {
    let (combinator, template, verb) = if c.eat("at least one of the contracts ") {
        (Combinator::Or, OR, " holds.")
    } else if c.eat("all of the contracts ") {
        (Combinator::And, AND, " hold.")
    } else if c.eat("for the keys and values of this map the contracts ") {
        (Combinator::Keys, KEYS, " hold.")
    } else if c.eat("for the members of this collection the contract ") {
        let child = c.keyword().ok_or_else(|| syntax(line, COLL_OF))?;
        if !c.eat(" holds.") || !c.rest.is_empty() {
            return Err(syntax(line, COLL_OF));
        }
        return Ok((Combinator::CollOf, vec![child]));
    } else {
        return Err(syntax(
            line,
            "one of the compound templates: `at least one of the contracts ...`, `all of the contracts ...`, \
             `for the keys and values of this map the contracts ...`, `for the members of this collection the contract ...`",
        ));
    };
    let children = c.keyword_list().ok_or_else(|| syntax(line, template))?;
    if !c.eat(verb) || !c.rest.is_empty() {
        return Err(syntax(line, template));
    }
    Ok((combinator, children))
}

fn sentence_line(text: &str, ns: Option<&str>, line: usize) -> Result<Line, CnlError> {
    let mut c = Cursor { rest: text, ns };
    if c.eat("The root contract is ") {
        let k = c.keyword().ok_or_else(|| syntax(line, ROOT))?;
        if !c.eat(".") || !c.rest.is_empty() {
            return Err(syntax(line, ROOT));
        }
        return Ok(Line::Root(k));
    }
    if !c.eat("The contract ") {
        return Err(syntax(line, ANY));
    }
    let name = c.keyword().ok_or_else(|| syntax(line, "a keyword `::name` or `::ns/name` after `The contract`"))?;
    let kind = if c.eat(" must hold.") {
        if !c.rest.is_empty() {
            return Err(syntax(line, ATOMIC));
        }
        ElementKind::Atomic
    } else if c.eat(" holds, if ") {
        let (combinator, children) = compound_tail(&mut c, line)?;
        ElementKind::Compound { combinator, children }
    } else {
        return Err(syntax(line, "` must hold.` or ` holds, if ...` after the contract name"));
    };
    Ok(Line::Element(CnlElement {
        name,
        kind,
        is_root: false,
        source_text: None,
        line,
    }))
}

/// Parses a document. One sentence per line; `#` lines are comments.
pub fn parse(text: &str) -> Result<CnlDocument, CnlError> {
    let mut doc = CnlDocument::default();
    let mut root_line = 0;
    let mut seen_statement = false;
    // index of the element a `source:` line may attach to
    let mut attach: Option<usize> = None;
    let mut names: BTreeMap<Keyword, usize> = BTreeMap::new();

    for (idx, raw) in text.split('\n').enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix("namespace:") {
            let ns = rest.trim();
            if seen_statement || ns.is_empty() || Keyword::new(ns, "x").is_err() {
                return Err(syntax(line, NAMESPACE));
            }
            doc.namespace = Some(ns.to_owned());
            seen_statement = true;
            continue;
        }
        seen_statement = true;
        if let Some(rest) = trimmed.strip_prefix("source:") {
            let quote: String = serde_json::from_str(rest.trim()).map_err(|_| syntax(line, SOURCE))?;
            let idx = attach.take().ok_or(CnlError::DanglingSource { line })?;
            doc.elements[idx].source_text = Some(quote);
            continue;
        }
        attach = None;
        match sentence_line(trimmed, doc.namespace.as_deref(), line)? {
            Line::Root(k) => {
                if doc.root.is_some() {
                    return Err(CnlError::MultipleRoots { line });
                }
                doc.root = Some(k);
                root_line = line;
            }
            Line::Element(el) => {
                if names.insert(el.name.clone(), doc.elements.len()).is_some() {
                    return Err(CnlError::DuplicateName { line, name: el.name });
                }
                attach = Some(doc.elements.len());
                doc.elements.push(el);
            }
        }
    }

    if let Some(root) = doc.root.clone() {
        match names.get(&root) {
            Some(&i) => doc.elements[i].is_root = true,
            None => return Err(CnlError::UndefinedRoot { line: root_line, name: root }),
        }
    }
    if let Some(cycle) = find_cycle(&doc, &names) {
        return Err(CnlError::CyclicReference { names: cycle });
    }
    Ok(doc)
}

fn find_cycle(doc: &CnlDocument, names: &BTreeMap<Keyword, usize>) -> Option<Vec<Keyword>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Active,
        Done,
    }
    fn visit(
        i: usize,
        doc: &CnlDocument,
        names: &BTreeMap<Keyword, usize>,
        marks: &mut [Mark],
        stack: &mut Vec<usize>,
    ) -> Option<Vec<Keyword>> {
        marks[i] = Mark::Active;
        stack.push(i);
        for child in doc.elements[i].kind.children() {
            let Some(&j) = names.get(child) else { continue };
            match marks[j] {
                Mark::Active => {
                    let pos = stack.iter().position(|&s| s == j).expect("active node on stack");
                    let mut cycle: Vec<Keyword> = stack[pos..].iter().map(|&s| doc.elements[s].name.clone()).collect();
                    cycle.push(doc.elements[j].name.clone());
                    return Some(cycle);
                }
                Mark::New => {
                    if let Some(c) = visit(j, doc, names, marks, stack) {
                        return Some(c);
                    }
                }
                Mark::Done => {}
            }
        }
        stack.pop();
        marks[i] = Mark::Done;
        None
    }
    let mut marks = vec![Mark::New; doc.elements.len()];
    let mut seen = BTreeSet::new();
    for i in 0..doc.elements.len() {
        if marks[i] == Mark::New && seen.insert(i) {
            if let Some(c) = visit(i, doc, names, &mut marks, &mut Vec::new()) {
                return Some(c);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kw;

    const TRADE_DATE: &str = "\
The contract ::mmsr/valid-date-time-ms must hold.
The contract ::mmsr/valid-date-time-no-ms must hold.
The contract ::mmsr/valid-date must hold.
The contract ::mmsr/trade-date holds, if at least one of the contracts ::mmsr/valid-date-time-ms, ::mmsr/valid-date-time-no-ms, ::mmsr/valid-date holds.
";

    #[test]
    fn trade_date_listing() {
        let doc = parse(TRADE_DATE).unwrap();
        assert_eq!(doc.elements.len(), 4);
        assert!(doc.elements[..3].iter().all(|e| e.kind == ElementKind::Atomic));
        assert_eq!(
            doc.elements[3],
            CnlElement::compound(
                kw!("::mmsr/trade-date"),
                Combinator::Or,
                vec![
                    kw!("::mmsr/valid-date-time-ms"),
                    kw!("::mmsr/valid-date-time-no-ms"),
                    kw!("::mmsr/valid-date")
                ]
            )
        );
        assert_eq!(doc.elements[3].line, 4);
    }

    #[test]
    fn namespace_resolution() {
        let doc = parse("namespace: mmsr\nThe contract ::a holds, if all of the contracts ::b, ::other/c hold.\n").unwrap();
        assert_eq!(doc.elements[0].name, kw!("::mmsr/a"));
        assert_eq!(doc.elements[0].kind.children(), &[kw!("::mmsr/b"), kw!("::other/c")]);
        assert_eq!(doc.external_references(), vec![kw!("::mmsr/b"), kw!("::other/c")]);
    }

    #[test]
    fn every_template() {
        let text = "\
# comment
namespace: eu.mmsr

The contract ::a must hold.
source: \"quoted \\\"text\\\"\"
The contract ::m holds, if for the keys and values of this map the contracts ::a, ::b hold.
The contract ::b holds, if for the members of this collection the contract ::a holds.
The contract ::r holds, if all of the contracts ::m hold.
The root contract is ::r.
";
        let doc = parse(text).unwrap();
        assert_eq!(doc.namespace.as_deref(), Some("eu.mmsr"));
        assert_eq!(doc.elements[0].source_text.as_deref(), Some("quoted \"text\""));
        assert_eq!(doc.elements[1].kind.label(), "keys");
        assert_eq!(doc.elements[2].kind.label(), "coll-of");
        assert_eq!(doc.root, Some(kw!("::eu.mmsr/r")));
        assert!(doc.elements[3].is_root);
    }

    #[test]
    fn duplicate_name() {
        let err = parse("The contract ::a must hold.\nThe contract ::a must hold.").unwrap_err();
        assert_eq!(err, CnlError::DuplicateName { line: 2, name: kw!("::a") });
    }

    #[test]
    fn verb_agreement_is_strict() {
        let err = parse("The contract ::a holds, if all of the contracts ::a holds.").unwrap_err();
        assert_eq!(err, CnlError::Syntax { line: 1, expected: AND.into() });
        let err = parse("The contract ::a holds, if at least one of the contracts ::b hold.").unwrap_err();
        assert_eq!(err, CnlError::Syntax { line: 1, expected: OR.into() });
    }

    #[test]
    fn structural_errors() {
        assert!(matches!(parse("source: \"x\""), Err(CnlError::DanglingSource { line: 1 })));
        assert!(matches!(
            parse("The contract ::a must hold.\nsource: \"x\"\nsource: \"y\""),
            Err(CnlError::DanglingSource { line: 3 })
        ));
        assert!(matches!(
            parse("The contract ::a must hold.\nThe root contract is ::a.\nThe root contract is ::a."),
            Err(CnlError::MultipleRoots { line: 3 })
        ));
        assert!(matches!(parse("The root contract is ::z."), Err(CnlError::UndefinedRoot { line: 1, .. })));
        assert!(matches!(
            parse("The contract ::a must hold.\nnamespace: x"),
            Err(CnlError::Syntax { line: 2, .. })
        ));
        assert!(matches!(parse("the contract ::a must hold."), Err(CnlError::Syntax { line: 1, .. })));
        assert!(matches!(parse("The contract ::a must  hold."), Err(CnlError::Syntax { line: 1, .. })));
        assert!(matches!(parse("The contract ::a must hold. extra"), Err(CnlError::Syntax { line: 1, .. })));
        assert!(matches!(parse("The contract ::a must hold.\nsource: unquoted"), Err(CnlError::Syntax { line: 2, .. })));
    }

    #[test]
    fn cycles_are_rejected() {
        let err = parse(
            "The contract ::a holds, if all of the contracts ::b hold.\nThe contract ::b holds, if at least one of the contracts ::a holds.",
        )
        .unwrap_err();
        assert_eq!(err, CnlError::CyclicReference { names: vec![kw!("::a"), kw!("::b"), kw!("::a")] });
    }

    #[test]
    fn empty_document() {
        assert_eq!(parse("").unwrap(), CnlDocument::default());
        assert_eq!(parse("\n# only comments\n\n").unwrap(), CnlDocument::default());
    }
}
