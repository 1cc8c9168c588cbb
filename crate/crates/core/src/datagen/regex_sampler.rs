//! Random strings matching a regular expression, drawn from its parsed HIR.

use rand::Rng;
use regex_syntax::hir::{Class, Hir, HirKind};

/// Upper bound added to the minimum of unbounded repetitions (`*`, `+`, `{n,}`).
const DEFAULT_EXTRA_REPEATS: u32 = 8;

pub fn sample<R: Rng + ?Sized>(pattern: &str, rng: &mut R, extra_repeats: Option<u32>) -> Result<String, String> {
    let hir = regex_syntax::Parser::new()
        .parse(pattern)
        .map_err(|e| format!("invalid pattern {pattern:?}: {e}"))?;
    let mut out = String::new();
    walk(&hir, rng, extra_repeats.unwrap_or(DEFAULT_EXTRA_REPEATS), &mut out)?;
    Ok(out)
}

fn walk<R: Rng + ?Sized>(hir: &Hir, rng: &mut R, extra: u32, out: &mut String) -> Result<(), String> {
    match hir.kind() {
        HirKind::Empty | HirKind::Look(_) => {}
        HirKind::Literal(lit) => {
            out.push_str(std::str::from_utf8(&lit.0).map_err(|_| "non-UTF-8 literal".to_string())?)
        }
        HirKind::Class(Class::Unicode(class)) => out.push(pick_char(class, rng)?),
        HirKind::Class(Class::Bytes(class)) => {
            let ascii: Vec<u8> = class
                .iter()
                .flat_map(|r| r.start()..=r.end())
                .filter(u8::is_ascii)
                .collect();
            if ascii.is_empty() {
                return Err("byte class without ASCII members".into());
            }
            out.push(ascii[rng.gen_range(0..ascii.len())] as char);
        }
        HirKind::Repetition(rep) => {
            let hi = rep.max.unwrap_or(rep.min.saturating_add(extra));
            let n = rng.gen_range(rep.min..=hi);
            for _ in 0..n {
                walk(&rep.sub, rng, extra, out)?;
            }
        }
        HirKind::Capture(cap) => walk(&cap.sub, rng, extra, out)?,
        HirKind::Concat(parts) => {
            for part in parts {
                walk(part, rng, extra, out)?;
            }
        }
        HirKind::Alternation(alts) => {
            let alt = &alts[rng.gen_range(0..alts.len())];
            walk(alt, rng, extra, out)?;
        }
    }
    Ok(())
}

/// Large classes (negations, `.`) are narrowed to printable ASCII when that
/// leaves anything, to keep samples readable.
fn pick_char<R: Rng + ?Sized>(class: &regex_syntax::hir::ClassUnicode, rng: &mut R) -> Result<char, String> {
    let size = |ranges: &[(u32, u32)]| ranges.iter().map(|(a, b)| u64::from(b - a) + 1).sum::<u64>();
    let all: Vec<(u32, u32)> = class.iter().map(|r| (r.start() as u32, r.end() as u32)).collect();
    let printable: Vec<(u32, u32)> = all
        .iter()
        .filter_map(|&(a, b)| {
            let (lo, hi) = (a.max(0x20), b.min(0x7e));
            (lo <= hi).then_some((lo, hi))
        })
        .collect();
    let ranges = if size(&all) > 256 && !printable.is_empty() { printable } else { all };
    let total = size(&ranges);
    if total == 0 {
        return Err("empty character class".into());
    }
    let mut idx = rng.gen_range(0..total);
    for (a, b) in ranges {
        let len = u64::from(b - a) + 1;
        if idx < len {
            // ranges from regex-syntax never contain surrogates
            return char::from_u32(a + idx as u32).ok_or_else(|| "invalid code point".to_string());
        }
        idx -= len;
    }
    unreachable!("index within total class size")
}
