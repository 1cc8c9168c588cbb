use super::{CnlDocument, CnlElement, ElementKind};
use crate::keyword::Keyword;
use crate::spec::Combinator;

fn list(children: &[Keyword], ns: Option<&str>) -> String {
    children
        .iter()
        .map(|k| k.to_relative(ns))
        .collect::<Vec<_>>()
        .join(", ")
}

/// The sentence for one element, with names shortened against `ns`.
pub fn sentence(element: &CnlElement, ns: Option<&str>) -> String {
    let name = element.name.to_relative(ns);
    match &element.kind {
        ElementKind::Atomic => format!("The contract {name} must hold."),
        ElementKind::Compound { combinator, children } => {
            let tail = match combinator {
                Combinator::Or => format!("at least one of the contracts {} holds.", list(children, ns)),
                Combinator::And => format!("all of the contracts {} hold.", list(children, ns)),
                Combinator::Keys => format!(
                    "for the keys and values of this map the contracts {} hold.",
                    list(children, ns)
                ),
                Combinator::CollOf => format!(
                    "for the members of this collection the contract {} holds.",
                    list(children, ns)
                ),
            };
            format!("The contract {name} holds, if {tail}")
        }
    }
}

/// Canonical text: namespace directive, one sentence per element (each
/// followed by its `source:` line), then the root declaration.
pub fn render(doc: &CnlDocument) -> String {
    let ns = doc.namespace.as_deref();
    let mut out = String::new();
    if let Some(ns) = ns {
        out.push_str(&format!("namespace: {ns}\n\n"));
    }
    for el in &doc.elements {
        out.push_str(&sentence(el, ns));
        out.push('\n');
        if let Some(src) = &el.source_text {
            let quoted = serde_json::to_string(src).expect("strings always serialize");
            out.push_str(&format!("source: {quoted}\n"));
        }
    }
    if let Some(root) = &doc.root {
        if !doc.elements.is_empty() {
            out.push('\n');
        }
        out.push_str(&format!("The root contract is {}.\n", root.to_relative(ns)));
    }
    out
}
