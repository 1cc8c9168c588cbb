use proptest::prelude::*;
use regspec_core::testing::{spec_case, value_strategy, SpecCase};
use regspec_core::{kw, ConformResult, Keyword, Registry, SpecForm, Value};

/// Direct reading of the combinator semantics, sharing nothing with the
/// engine except predicate evaluation.
fn oracle(r: &Registry, form: &SpecForm, v: &Value) -> bool {
    match form {
        SpecForm::Pred { name, params } => r.predicates().eval(name, params, v).unwrap(),
        SpecForm::Ref(k) => oracle(r, &r.get(k).unwrap().form, v),
        SpecForm::Or(branches) => branches.iter().any(|(_, c)| oracle(r, c, v)),
        SpecForm::And(children) => children.iter().all(|c| oracle(r, c, v)),
        SpecForm::Keys { required, optional } => match v {
            Value::Map(m) => {
                required.iter().all(|k| m.contains_key(k))
                    && required
                        .iter()
                        .chain(optional)
                        .all(|k| m.get(k).is_none_or(|x| oracle(r, &SpecForm::Ref(k.clone()), x)))
            }
            _ => false,
        },
        SpecForm::CollOf { child, min_count, max_count } => match v {
            Value::Vector(items) => {
                min_count.is_none_or(|lo| items.len() >= lo)
                    && max_count.is_none_or(|hi| items.len() <= hi)
                    && items.iter().all(|x| oracle(r, child, x))
            }
            _ => false,
        },
        SpecForm::WithGen { child, .. } => oracle(r, child, v),
    }
}

/// Structural identity; unlike `==`, a NaN is identical to itself.
fn identity(v: &Value) -> String {
    format!("{v:?}")
}

fn fruit_and_veg() -> Registry {
    Registry::new()
        .define(kw!("::fruit"), SpecForm::one_of(vec!["apple", "pear", "cherry"]))
        .unwrap()
        .define(kw!("::veg"), SpecForm::one_of(vec!["carrot", "cucumber"]))
        .unwrap()
        .define(kw!("::fruit-or-veg"), SpecForm::or_of_refs(&[kw!("::fruit"), kw!("::veg")]))
        .unwrap()
}

#[test]
fn fruit_and_veg_basics() {
    let r = fruit_and_veg();
    assert!(r.validate(&kw!("::fruit"), &"apple".into()).unwrap());
    assert!(!r.validate(&kw!("::fruit"), &"carrot".into()).unwrap());
    assert_eq!(
        r.conform(&kw!("::fruit-or-veg"), &"carrot".into()).unwrap(),
        ConformResult::Conformed(Value::Vector(vec![Value::Keyword(kw!("::veg")), "carrot".into()]))
    );
    let problems = r.explain(&kw!("::fruit-or-veg"), &"potato".into()).unwrap();
    let vias: Vec<Vec<Keyword>> = problems.iter().map(|p| p.via.clone()).collect();
    assert_eq!(vias, [vec![kw!("::fruit-or-veg"), kw!("::fruit")], vec![kw!("::fruit-or-veg"), kw!("::veg")]]);
}

#[test]
fn set_semantics_over_a_finite_universe() {
    // Or is union, And is intersection, over every value in the universe.
    let r = Registry::new()
        .define(kw!("::a"), SpecForm::one_of(vec![1i64, 2, 3]))
        .unwrap()
        .define(kw!("::b"), SpecForm::pred("even"))
        .unwrap()
        .define(kw!("::u"), SpecForm::or_of_refs(&[kw!("::a"), kw!("::b")]))
        .unwrap()
        .define(kw!("::i"), SpecForm::And(vec![SpecForm::Ref(kw!("::a")), SpecForm::Ref(kw!("::b"))]))
        .unwrap();
    let universe: Vec<Value> = (-4..8).map(Value::Int).chain(["1".into(), Value::Null]).collect();
    let set = |k: &Keyword| -> Vec<&Value> { universe.iter().filter(|v| r.validate(k, v).unwrap()).collect() };
    let (a, b) = (set(&kw!("::a")), set(&kw!("::b")));
    let union: Vec<&Value> = universe.iter().filter(|v| a.contains(v) || b.contains(v)).collect();
    let inter: Vec<&Value> = universe.iter().filter(|v| a.contains(v) && b.contains(v)).collect();
    assert_eq!(set(&kw!("::u")), union);
    assert_eq!(set(&kw!("::i")), inter);
    assert_eq!(inter, [&Value::Int(2)]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn verdicts_agree(case in spec_case()) {
        let SpecCase { registry, spec, value } = case;
        let valid = registry.validate(&spec, &value).unwrap();
        let conformed = registry.conform(&spec, &value).unwrap();
        let problems = registry.explain(&spec, &value).unwrap();
        prop_assert_eq!(valid, conformed.is_conformed());
        prop_assert_eq!(valid, problems.is_empty());
        prop_assert_eq!(valid, oracle(&registry, &SpecForm::Ref(spec.clone()), &value));
        if let ConformResult::Conformed(c) = conformed {
            prop_assert_eq!(identity(&registry.unform(&spec, &c).unwrap()), identity(&value));
        }
    }

    #[test]
    fn problems_point_into_the_value(case in spec_case()) {
        for p in case.registry.explain(&case.spec, &case.value).unwrap() {
            prop_assert_eq!(p.via.first(), Some(&case.spec));
            prop_assert_eq!(case.value.get_in(&p.in_path).map(identity), Some(identity(&p.val)));
        }
    }

    #[test]
    fn registration_is_persistent(case in spec_case(), v in value_strategy()) {
        let before = case.registry.validate(&case.spec, &v).unwrap();
        let _other = case.registry.define(case.spec.clone(), SpecForm::pred("even")).unwrap();
        prop_assert_eq!(case.registry.validate(&case.spec, &v).unwrap(), before);
    }
}
