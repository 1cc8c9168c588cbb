//! Timing harness for the five engine scenarios.
//!
//! Every scenario runs `warmup` untimed iterations, then `iterations` timed
//! ones. Absolute numbers depend on the machine; only their ordering is
//! meaningful across hosts.

use std::fmt::Write as _;
use std::time::Instant;

use crate::datagen::{generate, GenContext, GenError, Generators};
use crate::keyword::Keyword;
use crate::registry::{Registry, SpecError};
use crate::value::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Validation,
    Conform,
    Generation,
    GenerationValidation,
    GenerationConformance,
}

impl Scenario {
    pub const ALL: [Scenario; 5] = [
        Scenario::Validation,
        Scenario::Conform,
        Scenario::Generation,
        Scenario::GenerationValidation,
        Scenario::GenerationConformance,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Validation => "Validation",
            Scenario::Conform => "Conform",
            Scenario::Generation => "Generation",
            Scenario::GenerationValidation => "Generation+Validation",
            Scenario::GenerationConformance => "Generation+Conformance",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub iterations: usize,
    pub warmup: usize,
    /// Seed of the first generated value; iteration `i` uses `seed + i`.
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            iterations: 1000,
            warmup: 1000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub scenario: Scenario,
    pub iterations: usize,
    /// Microseconds.
    pub mean: f64,
    /// Sample standard deviation, microseconds.
    pub std_dev: f64,
    pub min: f64,
    pub max: f64,
    /// Iterations whose validation or conformance verdict was negative.
    pub rejected: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error("at least one timed iteration is required")]
    NoIterations,
}

pub fn mean_and_std(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    if samples.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() < 2 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Runs every scenario against `spec`. `example` is the fixed input of the
/// Validation and Conform scenarios.
pub fn run(
    registry: &Registry,
    generators: &Generators,
    spec: &Keyword,
    example: &Value,
    config: &BenchConfig,
) -> Result<Vec<BenchRow>, BenchError> {
    if config.iterations == 0 {
        return Err(BenchError::NoIterations);
    }
    registry.resolve(spec)?;
    Scenario::ALL
        .iter()
        .map(|&scenario| {
            let step = |i: usize| -> Result<bool, BenchError> {
                let generated = || {
                    generate(registry, generators, spec, &GenContext::seeded(config.seed.wrapping_add(i as u64)))
                };
                Ok(match scenario {
                    Scenario::Validation => registry.validate(spec, example)?,
                    Scenario::Conform => registry.conform(spec, example)?.is_conformed(),
                    Scenario::Generation => {
                        generated()?;
                        true
                    }
                    Scenario::GenerationValidation => registry.validate(spec, &generated()?)?,
                    Scenario::GenerationConformance => registry.conform(spec, &generated()?)?.is_conformed(),
                })
            };
            for i in 0..config.warmup {
                std::hint::black_box(step(i)?);
            }
            let mut samples = Vec::with_capacity(config.iterations);
            let mut rejected = 0;
            for i in 0..config.iterations {
                let start = Instant::now();
                let ok = std::hint::black_box(step(config.warmup + i)?);
                samples.push(start.elapsed().as_secs_f64() * 1e6);
                rejected += usize::from(!ok);
            }
            let (mean, std_dev) = mean_and_std(&samples);
            Ok(BenchRow {
                scenario,
                iterations: config.iterations,
                mean,
                std_dev,
                min: samples.iter().copied().fold(f64::INFINITY, f64::min),
                max: samples.iter().copied().fold(0.0, f64::max),
                rejected,
            })
        })
        .collect()
}

pub fn table(rows: &[BenchRow]) -> String {
    let width = rows.iter().map(|r| r.scenario.name().len()).max().unwrap_or(0).max(8);
    let mut out = format!(
        "{:<width$}  {:>12}  {:>12}  {:>12}  {:>12}  {:>8}\n",
        "Scenario", "mean (µs)", "std (µs)", "min (µs)", "max (µs)", "rejected"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:<width$}  {:>12.3}  {:>12.3}  {:>12.3}  {:>12.3}  {:>8}",
            r.scenario.name(),
            r.mean,
            r.std_dev,
            r.min,
            r.max,
            r.rejected
        );
    }
    out
}

pub fn to_json(rows: &[BenchRow]) -> serde_json::Value {
    rows.iter()
        .map(|r| {
            serde_json::json!({
                "scenario": r.scenario.name(),
                "iterations": r.iterations,
                "mean-us": r.mean,
                "std-us": r.std_dev,
                "min-us": r.min,
                "max-us": r.max,
                "rejected": r.rejected,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mmsr;

    #[test]
    fn sample_statistics() {
        let (m, s) = mean_and_std(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]);
        assert_eq!(m, 5.0);
        assert!((s - (32.0f64 / 7.0).sqrt()).abs() < 1e-12);
        assert_eq!(mean_and_std(&[3.0]), (3.0, 0.0));
    }

    #[test]
    fn five_rows_on_the_bundle() {
        let rs = mmsr::ruleset();
        let config = BenchConfig { iterations: 20, warmup: 5, seed: 1 };
        let spec = mmsr::keyword("secured-report");
        let rows = run(&rs.registry, &mmsr::generators(), &spec, &mmsr::canonical_example(), &config).unwrap();
        let names: Vec<_> = rows.iter().map(|r| r.scenario.name()).collect();
        assert_eq!(
            names,
            ["Validation", "Conform", "Generation", "Generation+Validation", "Generation+Conformance"]
        );
        assert!(rows.iter().all(|r| r.rejected == 0 && r.mean > 0.0 && r.min <= r.mean && r.mean <= r.max));
        assert_eq!(table(&rows).lines().count(), 6);
        assert_eq!(to_json(&rows).as_array().unwrap().len(), 5);
    }
}
