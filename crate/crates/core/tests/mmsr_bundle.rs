use regspec_core::cnl::traceback;
use regspec_core::ruleset::{parse_ruleset, ruleset_to_json};
use regspec_core::{kw, mmsr, ConformResult, Keyword, Value};

const MS: &str = "::mmsr/valid-date-time-ms";
const NO_MS: &str = "::mmsr/valid-date-time-no-ms";
const DATE: &str = "::mmsr/valid-date";

fn with_trade_date(s: &str) -> Value {
    let Value::Map(mut m) = mmsr::canonical_example() else { unreachable!() };
    m.insert(kw!("::mmsr/trade-date"), s.into());
    Value::Map(m)
}

/// `(corrupted value, atomic spec of the form it was derived from)`.
fn corruptions() -> Vec<(&'static str, &'static str)> {
    vec![
        ("2017-04-10T09:30:00.000", MS),
        ("2017-04-10T09:30:00.00+01:00", MS),
        ("2017-04-10T09:30:00.0000+01:00", MS),
        ("2017-13-10T09:30:00.000+01:00", MS),
        ("2017-02-30T09:30:00.000+01:00", MS),
        ("2017-04-10t09:30:00.000+01:00", MS),
        ("2017-04-10T09:30:00", NO_MS),
        ("2017-13-10T09:30:00+01:00", NO_MS),
        ("2017-02-30T09:30:00+01:00", NO_MS),
        ("2017-04-10t09:30:00+01:00", NO_MS),
        ("2017-13-10", DATE),
        ("2017-02-30", DATE),
        ("2017-4-10", DATE),
    ]
}

#[test]
fn accepted_forms() {
    let rs = mmsr::ruleset();
    let td = kw!("::mmsr/trade-date");
    let sr = kw!("::mmsr/secured-report");
    for (s, tag) in [("2017-04-10T09:30:00+01:00", NO_MS), ("2017-04-10T09:30:00.000+01:00", MS), ("2017-04-10", DATE)] {
        assert!(rs.registry.validate(&sr, &with_trade_date(s)).unwrap(), "{s}");
        let ConformResult::Conformed(Value::Vector(pair)) = rs.registry.conform(&td, &s.into()).unwrap() else {
            panic!("{s} did not conform")
        };
        assert_eq!(pair[0], Value::Keyword(tag.parse().unwrap()), "{s}");
    }
}

#[test]
fn corrupted_forms_fail_at_the_date_specs() {
    let rs = mmsr::ruleset();
    let sr = kw!("::mmsr/secured-report");
    let atomic: Vec<Keyword> = [MS, NO_MS, DATE].iter().map(|k| k.parse().unwrap()).collect();
    let cases = corruptions();
    assert!(cases.len() >= 12);
    for (s, origin) in cases {
        let problems = rs.registry.explain(&sr, &with_trade_date(s)).unwrap();
        let ends: Vec<Keyword> = problems.iter().map(|p| p.via.last().unwrap().clone()).collect();
        assert_eq!(ends, atomic, "{s}");
        assert!(ends.contains(&origin.parse().unwrap()));
        for p in &problems {
            assert_eq!(p.via[..2], [sr.clone(), kw!("::mmsr/trade-date")]);
            assert_eq!(p.val, s.into());
        }
    }
}

#[test]
fn traceback_names_the_failing_branch() {
    let rs = mmsr::ruleset();
    let doc = mmsr::cnl_document();
    let problems = rs.registry.explain(&kw!("::mmsr/secured-report"), &with_trade_date("2017-02-30")).unwrap();
    let trace = traceback(&doc, &problems);
    assert_eq!(trace[2].sentence.as_deref(), Some("The contract ::valid-date must hold."));
    assert!(trace[2].source_text.as_deref().unwrap().contains("YYYY-MM-DD"));
    assert!(trace.iter().all(|t| !t.below_granularity));
}

#[test]
fn non_iso_date_and_missing_key() {
    let rs = mmsr::ruleset();
    let sr = kw!("::mmsr/secured-report");
    assert!(!rs.registry.validate(&sr, &with_trade_date("10/04/2017")).unwrap());
    let Value::Map(mut m) = mmsr::canonical_example() else { unreachable!() };
    m.remove(&kw!("::mmsr/counterparty-lei"));
    let problems = rs.registry.explain(&sr, &Value::Map(m)).unwrap();
    assert_eq!(problems.len(), 1);
    assert_eq!(problems[0].pred, "contains key ::mmsr/counterparty-lei");
}

#[test]
fn trade_date_is_an_or_of_the_three_forms() {
    let rs = mmsr::ruleset();
    let shape = rs.registry.resolve(&kw!("::mmsr/trade-date")).unwrap().shape();
    assert_eq!(shape.combinator, Some(regspec_core::Combinator::Or));
    assert_eq!(shape.named_children().unwrap(), [MS, NO_MS, DATE].map(|k| k.parse::<Keyword>().unwrap()));
}

#[test]
fn ruleset_survives_export() {
    let rs = mmsr::ruleset();
    let text = ruleset_to_json(&rs.registry, &rs.root, rs.namespace.as_deref()).to_string();
    let again = parse_ruleset(&text).unwrap();
    assert_eq!(again.root, rs.root);
    for (name, entry) in rs.registry.iter() {
        assert_eq!(again.registry.get(name), Some(entry));
    }
}
