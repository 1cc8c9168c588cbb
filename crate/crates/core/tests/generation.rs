use std::collections::BTreeSet;

use proptest::prelude::*;
use regspec_core::datagen::{generate, sample, GenContext, Generators};
use regspec_core::testing::registry_strategy;
use regspec_core::{kw, mmsr, ConformResult, Value};

#[test]
fn bundle_values_validate() {
    let rs = mmsr::ruleset();
    let gens = mmsr::generators();
    for name in rs.registry.names() {
        for seed in 0..200 {
            let v = generate(&rs.registry, &gens, name, &GenContext::seeded(seed)).unwrap();
            assert!(rs.registry.validate(name, &v).unwrap(), "{name} seed {seed}: {v}");
        }
    }
}

#[test]
fn every_trade_date_form_is_generated() {
    let rs = mmsr::ruleset();
    let spec = kw!("::mmsr/trade-date");
    let tags: BTreeSet<String> = sample(&rs.registry, &mmsr::generators(), &spec, 300, &GenContext::seeded(7))
        .unwrap()
        .iter()
        .map(|v| match rs.registry.conform(&spec, v).unwrap() {
            ConformResult::Conformed(Value::Vector(pair)) => pair[0].to_string(),
            other => panic!("unexpected {other:?}"),
        })
        .collect();
    assert_eq!(tags.len(), 3);
}

#[test]
fn generation_is_deterministic() {
    let rs = mmsr::ruleset();
    let ctx = GenContext::seeded(42);
    let a = sample(&rs.registry, &mmsr::generators(), &rs.root, 5, &ctx).unwrap();
    let b = sample(&rs.registry, &mmsr::generators(), &rs.root, 5, &ctx).unwrap();
    assert_eq!(a, b);
    assert_ne!(a[0], a[1]);
    assert!(sample(&rs.registry, &mmsr::generators(), &rs.root, 0, &ctx).unwrap().is_empty());
}

#[test]
fn collection_sizes_follow_bounds() {
    let rs = mmsr::ruleset();
    for seed in 0..50 {
        let ctx = GenContext { size: 3, ..GenContext::seeded(seed) };
        match generate(&rs.registry, &mmsr::generators(), &rs.root, &ctx).unwrap() {
            Value::Vector(items) => assert!((1..=3).contains(&items.len())),
            other => panic!("expected a vector, got {other}"),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn generated_values_validate(r in registry_strategy(), seed in any::<u64>()) {
        for name in r.names() {
            // generation may legitimately give up (unsatisfiable And, no generator)
            if let Ok(v) = generate(&r, &Generators::builtin(), name, &GenContext::seeded(seed)) {
                prop_assert!(r.validate(name, &v).unwrap(), "{} produced {}", name, v);
            }
        }
    }
}
