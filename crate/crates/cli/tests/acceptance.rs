//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::cell::Cell;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use proptest::test_runner::{Config, TestCaseError, TestRng, TestRunner};
use regspec_core::bench::{self, BenchConfig, Scenario};
use regspec_core::cnl::{parse, render, soundness_check};
use regspec_core::datagen::{generate, GenContext, Generators};
use regspec_core::testing::{cnl_document_strategy, mutants, spec_case};
use regspec_core::{kw, mmsr, ConformResult, Keyword, Registry, SpecForm, Value};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn runner(cases: u32) -> TestRunner {
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    let rng = TestRng::deterministic_rng(config.rng_algorithm);
    TestRunner::new_with_rng(config, rng)
}

fn fruit_and_veg() -> Check {
    let r = Registry::new()
        .define(kw!("::fruit"), SpecForm::one_of(vec!["apple", "pear", "cherry"]))
        .and_then(|r| r.define(kw!("::veg"), SpecForm::one_of(vec!["carrot", "cucumber"])))
        .and_then(|r| r.define(kw!("::fruit-or-veg"), SpecForm::or_of_refs(&[kw!("::fruit"), kw!("::veg")])))
        .map_err(|e| e.to_string())?;
    ensure(r.validate(&kw!("::fruit"), &"apple".into()) == Ok(true), || "apple is not a ::fruit".into())?;
    let expected = ConformResult::Conformed(Value::Vector(vec![Value::Keyword(kw!("::veg")), "carrot".into()]));
    let got = r.conform(&kw!("::fruit-or-veg"), &"carrot".into()).map_err(|e| e.to_string())?;
    ensure(got == expected, || format!("conform gave {got:?}"))?;
    for seed in 0..100 {
        let v = generate(&r, &Generators::builtin(), &kw!("::veg"), &GenContext::seeded(seed)).map_err(|e| e.to_string())?;
        ensure(v == "carrot".into() || v == "cucumber".into(), || format!("generated {v}"))?;
    }
    Ok("validate, conform and 100 generated ::veg values exact".into())
}

fn trade_date_suite() -> Check {
    const MS: &str = "::mmsr/valid-date-time-ms";
    const NO_MS: &str = "::mmsr/valid-date-time-no-ms";
    const DATE: &str = "::mmsr/valid-date";
    let rs = mmsr::ruleset();
    let td = kw!("::mmsr/trade-date");
    let Value::Map(base) = mmsr::canonical_example() else { return Err("example is not a map".into()) };
    let message = |s: &str| {
        let mut m = base.clone();
        m.insert(td.clone(), s.into());
        Value::Map(m)
    };
    let sr = kw!("::mmsr/secured-report");
    for s in ["2017-04-10T09:30:00+01:00", "2017-04-10T09:30:00.000+01:00", "2017-04-10"] {
        ensure(rs.registry.validate(&sr, &message(s)) == Ok(true), || format!("{s} rejected"))?;
    }
    let corrupted = [
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
    ];
    for (s, origin) in corrupted {
        let problems = rs.registry.explain(&sr, &message(s)).map_err(|e| e.to_string())?;
        ensure(!problems.is_empty(), || format!("{s} accepted"))?;
        let ends: Vec<String> = problems.iter().filter_map(|p| p.via.last().map(Keyword::to_string)).collect();
        ensure(ends == [MS, NO_MS, DATE], || format!("{s}: via chains end at {ends:?}"))?;
        ensure(ends.iter().any(|e| e == origin), || format!("{s}: no problem at {origin}"))?;
    }
    Ok(format!("3 forms accepted, {} corrupted variants rejected at the date specs", corrupted.len()))
}

fn equivalence() -> Check {
    let start = Instant::now();
    let count = Cell::new(0usize);
    runner(10_000)
        .run(&spec_case(), |case| {
            count.set(count.get() + 1);
            let r = &case.registry;
            let err = |e: regspec_core::SpecError| TestCaseError::fail(e.to_string());
            let valid = r.validate(&case.spec, &case.value).map_err(err)?;
            let conformed = r.conform(&case.spec, &case.value).map_err(err)?.is_conformed();
            let clean = r.explain(&case.spec, &case.value).map_err(err)?.is_empty();
            if valid == conformed && valid == clean {
                Ok(())
            } else {
                Err(TestCaseError::fail(format!("validate {valid}, conformed {conformed}, no problems {clean}")))
            }
        })
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(count.get() >= 10_000, || format!("only {} pairs ran", count.get()))?;
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!("{} pairs in {:.1} s", count.get(), elapsed.as_secs_f64()))
}

fn gen_validate() -> Check {
    let rs = mmsr::ruleset();
    let gens = mmsr::generators();
    let mut checked = 0;
    for name in rs.registry.names() {
        for seed in 0..1000 {
            let v = generate(&rs.registry, &gens, name, &GenContext::seeded(seed)).map_err(|e| format!("{name} seed {seed}: {e}"))?;
            ensure(rs.registry.validate(name, &v) == Ok(true), || format!("{name} seed {seed} produced invalid {v}"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} generated values over {} specs all valid", rs.registry.len()))
}

fn cnl_round_trip() -> Check {
    let count = Cell::new(0usize);
    runner(1000)
        .run(&cnl_document_strategy(), |doc| {
            count.set(count.get() + 1);
            match parse(&render(&doc)) {
                Ok(back) if back == doc => Ok(()),
                Ok(back) => Err(TestCaseError::fail(format!("round trip changed the document: {back:?}"))),
                Err(e) => Err(TestCaseError::fail(e.to_string())),
            }
        })
        .map_err(|e| e.to_string())?;
    let shipped = parse(mmsr::CNL_TEXT).map_err(|e| e.to_string())?;
    ensure(render(&shipped) == mmsr::CNL_TEXT, || "shipped mmsr.cnl does not re-render identically".into())?;
    Ok(format!("{} random documents and the shipped document", count.get()))
}

fn mutation_kill_rate() -> Check {
    let rs = mmsr::ruleset();
    let doc = mmsr::cnl_document();
    let all = mutants(&rs.registry);
    ensure(all.len() >= 50, || format!("only {} mutants", all.len()))?;
    let survivors: Vec<&str> = all
        .iter()
        .filter(|m| soundness_check(&doc, &m.registry, Some(&rs.root)).is_empty())
        .map(|m| m.description.as_str())
        .collect();
    ensure(survivors.is_empty(), || format!("survivors: {survivors:?}"))?;
    Ok(format!("{}/{} mutants killed", all.len(), all.len()))
}

fn performance() -> Check {
    let rs = mmsr::ruleset();
    let spec = kw!("::mmsr/secured-report");
    let example = mmsr::canonical_example();
    let config = BenchConfig { iterations: 1000, warmup: 1000, seed: 0 };
    let rows = bench::run(&rs.registry, &mmsr::generators(), &spec, &example, &config).map_err(|e| e.to_string())?;
    let mean = |s: Scenario| rows.iter().find(|r| r.scenario == s).map(|r| r.mean).unwrap_or(f64::NAN);
    let (validation, generation) = (mean(Scenario::Validation), mean(Scenario::Generation));
    ensure(rows.len() == 5, || format!("{} bench rows", rows.len()))?;
    ensure(validation <= 1000.0, || format!("validation mean {validation:.1} µs"))?;
    ensure(generation <= 50_000.0, || format!("generation mean {generation:.1} µs"))?;
    ensure(validation < generation, || format!("validation {validation:.1} µs not below generation {generation:.1} µs"))?;
    let start = Instant::now();
    for _ in 0..100 * 100 {
        ensure(rs.registry.validate(&spec, std::hint::black_box(&example)) == Ok(true), || "example rejected".into())?;
    }
    let elapsed = start.elapsed();
    ensure(elapsed <= Duration::from_secs(10), || format!("10000 validations took {elapsed:?}"))?;
    Ok(format!(
        "validation {validation:.1} µs, generation {generation:.1} µs, 10000 validations in {:.3} s",
        elapsed.as_secs_f64()
    ))
}

fn data(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(rel)
}

fn cli_exit_codes() -> Check {
    let exe = env!("CARGO_BIN_EXE_regspec");
    let ruleset = data("mmsr.json");
    let status = |input: &Path| -> Result<Option<i32>, String> {
        Command::new(exe)
            .args(["validate", "--spec", "::secured-report", "--ruleset"])
            .arg(&ruleset)
            .arg("--in")
            .arg(input)
            .env_remove("REGSPEC_RULESET")
            .output()
            .map(|o| o.status.code())
            .map_err(|e| e.to_string())
    };
    let files = |dir: &str, suffix: &str| -> Result<Vec<PathBuf>, String> {
        let mut out: Vec<PathBuf> = std::fs::read_dir(data(dir))
            .map_err(|e| e.to_string())?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.to_string_lossy().ends_with(suffix) && !p.to_string_lossy().ends_with(".expected.json"))
            .collect();
        out.sort();
        Ok(out)
    };
    let mut counts = [0; 3];
    for (code, inputs) in [
        (0, vec![data("example-message.json")]),
        (1, files("invalid-messages", ".json")?),
        (2, files("malformed", ".json")?),
    ] {
        ensure(!inputs.is_empty(), || format!("no inputs for exit code {code}"))?;
        for input in inputs {
            let got = status(&input)?;
            ensure(got == Some(code), || format!("{} exited {got:?}, expected {code}", input.display()))?;
            counts[code as usize] += 1;
        }
    }
    Ok(format!("{} valid, {} invalid, {} malformed inputs", counts[0], counts[1], counts[2]))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("fruit-and-veg-basics", fruit_and_veg),
        ("trade-date-suite", trade_date_suite),
        ("equivalence-law", equivalence),
        ("gen-validate-soundness", gen_validate),
        ("cnl-round-trip", cnl_round_trip),
        ("mutation-kill-rate", mutation_kill_rate),
        ("performance", performance),
        ("cli-exit-codes", cli_exit_codes),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(reason) => {
                failed += 1;
                println!("FAIL {name}: {reason}");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
