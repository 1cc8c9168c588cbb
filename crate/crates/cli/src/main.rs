//! `regspec`: validate, conform, explain and generate messages against a
//! JSON ruleset, check controlled-language documents, benchmark, serve.
//!
//! Exit codes: 0 success (all messages valid, document sound), 1 a message
//! is invalid or a document has error-level findings, 2 usage, I/O or
//! syntax errors.

use std::io::{BufWriter, Read, Write};
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use regspec_core::bench::{self, BenchConfig};
use regspec_core::cnl::{abstract_registry, parse, render, soundness_check, traceback, CnlDocument, Severity, TraceEntry};
use regspec_core::datagen::{generate, sample, GenContext, Generators};
use regspec_core::engine::Problem;
use regspec_core::ruleset::{load_ruleset, Ruleset};
use regspec_core::{mmsr, ConformResult, Keyword, Registry, Value};
use regspec_service::AppState;
use serde_json::json;

#[derive(Parser)]
#[command(name = "regspec", version, about = "Executable regulatory contracts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print one `{"index", "valid"}` line per message.
    Validate(MessageArgs),
    /// Print the conformed value or the problems of each message.
    Conform(MessageArgs),
    /// Print the problems of each message, optionally traced into a .cnl document.
    Explain {
        #[command(flatten)]
        messages: MessageArgs,
        #[arg(long)]
        cnl: Option<PathBuf>,
    },
    /// Print generated messages, one JSON value per line.
    Generate {
        #[command(flatten)]
        target: Target,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Upper bound for unbounded collection and string sizes.
        #[arg(long)]
        size: Option<usize>,
    },
    /// Controlled-language documents.
    #[command(subcommand)]
    Cnl(CnlCommand),
    /// Time validation, conformance and generation.
    Bench {
        /// Ruleset to measure; the bundled MMSR ruleset when absent.
        #[arg(long, env = "REGSPEC_RULESET")]
        ruleset: Option<PathBuf>,
        /// Spec to measure; `::mmsr/secured-report` for the bundle, else the root.
        #[arg(long)]
        spec: Option<String>,
        /// Message for the Validation and Conform rows; generated when absent.
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 1000)]
        iterations: usize,
        #[arg(long, default_value_t = 1000)]
        warmup: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
    /// Serve the HTTP API.
    Serve {
        /// Directory of `<id>.json` rulesets with optional `<id>.cnl`; the bundle when absent.
        #[arg(long)]
        rulesets_dir: Option<PathBuf>,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
        /// Allowed CORS origin; repeatable. Any origin when absent.
        #[arg(long)]
        allow_origin: Vec<String>,
    },
    /// List the predicate library.
    Predicates,
}

#[derive(Subcommand)]
enum CnlCommand {
    /// Check a document against a ruleset; exits 1 on error-level findings.
    Check {
        #[arg(long)]
        cnl: PathBuf,
        #[arg(long, env = "REGSPEC_RULESET")]
        ruleset: PathBuf,
        /// Report a root declaration that differs from the ruleset root.
        #[arg(long)]
        check_root: bool,
    },
    /// Print a document in canonical form.
    Render {
        #[arg(long)]
        cnl: PathBuf,
    },
    /// Print the document abstracted from a ruleset.
    Abstract {
        #[command(flatten)]
        target: Target,
    },
}

#[derive(Args)]
struct Target {
    #[arg(long, env = "REGSPEC_RULESET")]
    ruleset: PathBuf,
    /// Spec name, `::name` resolving against the ruleset namespace; defaults to the root.
    #[arg(long)]
    spec: Option<String>,
}

#[derive(Args)]
struct MessageArgs {
    #[command(flatten)]
    target: Target,
    /// Input file, `-` for stdin.
    #[arg(long = "in", default_value = "-")]
    input: PathBuf,
    /// `json`: the input is one message. `jsonl`: one message per line.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Worker threads for message checks.
    #[arg(long, default_value_t = 1)]
    parallel: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Jsonl,
}

/// An error that ends the command with exit code 2.
#[derive(Debug)]
struct Fatal(String);

impl<E: std::fmt::Display> From<E> for Fatal {
    fn from(e: E) -> Self {
        Fatal(e.to_string())
    }
}

type Outcome = Result<bool, Fatal>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Fatal(msg)) => {
            eprintln!("regspec: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Outcome {
    let out = std::io::stdout().lock();
    let mut out = BufWriter::new(out);
    let result = match command {
        Command::Validate(args) => cmd_validate(&args, &mut out),
        Command::Conform(args) => cmd_conform(&args, &mut out),
        Command::Explain { messages, cnl } => cmd_explain(&messages, cnl.as_deref(), &mut out),
        Command::Generate { target, count, seed, size } => cmd_generate(&target, count, seed, size, &mut out),
        Command::Cnl(c) => cmd_cnl(c, &mut out),
        Command::Bench { ruleset, spec, input, iterations, warmup, seed, json } => {
            cmd_bench(ruleset.as_deref(), spec.as_deref(), input.as_deref(), BenchConfig { iterations, warmup, seed }, json, &mut out)
        }
        Command::Serve { rulesets_dir, port, host, allow_origin } => {
            out.flush()?;
            cmd_serve(rulesets_dir.as_deref(), SocketAddr::new(host, port), &allow_origin)
        }
        Command::Predicates => {
            writeln!(out, "{}", serde_json::to_string_pretty(&regspec_core::predicates::PredicateLib::builtin().catalogue())?)?;
            Ok(true)
        }
    };
    out.flush()?;
    result
}

fn load(path: &Path) -> Result<Ruleset, Fatal> {
    load_ruleset(path).map_err(|e| Fatal(format!("{}: {e}", path.display())))
}

fn spec_of(ruleset: &Ruleset, spec: Option<&str>) -> Result<Keyword, Fatal> {
    let Some(text) = spec else { return Ok(ruleset.root.clone()) };
    let k = Keyword::parse_with_default(text, ruleset.namespace.as_deref())?;
    ruleset.registry.resolve(&k)?;
    Ok(k)
}

fn read_input(path: &Path) -> Result<String, Fatal> {
    let mut text = String::new();
    if path == Path::new("-") {
        std::io::stdin().read_to_string(&mut text)?;
    } else {
        text = std::fs::read_to_string(path).map_err(|e| Fatal(format!("{}: {e}", path.display())))?;
    }
    Ok(text)
}

fn decode(text: &str, where_: &str) -> Result<Value, Fatal> {
    let json: serde_json::Value = serde_json::from_str(text).map_err(|e| Fatal(format!("{where_}: malformed JSON: {e}")))?;
    Value::from_json(&json).map_err(|e| Fatal(format!("{where_}: {e}")))
}

fn read_messages(path: &Path, format: Format) -> Result<Vec<Value>, Fatal> {
    let text = read_input(path)?;
    let name = path.display().to_string();
    match format {
        Format::Json => Ok(vec![decode(&text, &name)?]),
        Format::Jsonl => text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| decode(l, &format!("{name}:{}", i + 1)))
            .collect(),
    }
}

/// Applies `f` to every message, fanning out over `workers` threads.
fn check_all<T: Send>(
    messages: &[Value],
    workers: usize,
    f: impl Fn(&Value) -> Result<T, regspec_core::SpecError> + Sync,
) -> Result<Vec<T>, Fatal> {
    let chunk = messages.len().div_ceil(workers.max(1)).max(1);
    let results: Vec<Result<Vec<T>, regspec_core::SpecError>> = std::thread::scope(|s| {
        let handles: Vec<_> = messages
            .chunks(chunk)
            .map(|part| s.spawn(|| part.iter().map(&f).collect::<Result<Vec<T>, _>>()))
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let mut out = Vec::with_capacity(messages.len());
    for r in results {
        out.extend(r?);
    }
    Ok(out)
}

struct Loaded {
    ruleset: Ruleset,
    spec: Keyword,
    messages: Vec<Value>,
}

fn load_messages(args: &MessageArgs) -> Result<Loaded, Fatal> {
    let ruleset = load(&args.target.ruleset)?;
    let spec = spec_of(&ruleset, args.target.spec.as_deref())?;
    let messages = read_messages(&args.input, args.format)?;
    Ok(Loaded { ruleset, spec, messages })
}

fn line(out: &mut impl Write, value: serde_json::Value) -> Result<(), Fatal> {
    writeln!(out, "{value}")?;
    Ok(())
}

fn cmd_validate(args: &MessageArgs, out: &mut impl Write) -> Outcome {
    let l = load_messages(args)?;
    let verdicts = check_all(&l.messages, args.parallel, |m| l.ruleset.registry.validate(&l.spec, m))?;
    for (index, valid) in verdicts.iter().enumerate() {
        line(out, json!({ "index": index, "valid": valid }))?;
    }
    Ok(verdicts.iter().all(|v| *v))
}

fn cmd_conform(args: &MessageArgs, out: &mut impl Write) -> Outcome {
    let l = load_messages(args)?;
    let results = check_all(&l.messages, args.parallel, |m| l.ruleset.registry.conform(&l.spec, m))?;
    for (index, r) in results.iter().enumerate() {
        let mut obj = r.to_json();
        obj["index"] = index.into();
        line(out, obj)?;
    }
    Ok(results.iter().all(ConformResult::is_conformed))
}

fn load_cnl(path: &Path) -> Result<CnlDocument, Fatal> {
    let text = std::fs::read_to_string(path).map_err(|e| Fatal(format!("{}: {e}", path.display())))?;
    parse(&text).map_err(|e| Fatal(format!("{}: {e}", path.display())))
}

fn cmd_explain(args: &MessageArgs, cnl: Option<&Path>, out: &mut impl Write) -> Outcome {
    let l = load_messages(args)?;
    let doc = cnl.map(load_cnl).transpose()?;
    let results = check_all(&l.messages, args.parallel, |m| l.ruleset.registry.explain(&l.spec, m))?;
    for (index, problems) in results.iter().enumerate() {
        let mut obj = json!({
            "index": index,
            "valid": problems.is_empty(),
            "problems": problems.iter().map(Problem::to_json).collect::<Vec<_>>(),
        });
        if let Some(doc) = &doc {
            obj["traceback"] = traceback(doc, problems).iter().map(TraceEntry::to_json).collect();
        }
        line(out, obj)?;
    }
    Ok(results.iter().all(Vec::is_empty))
}

fn cmd_generate(target: &Target, count: usize, seed: u64, size: Option<usize>, out: &mut impl Write) -> Outcome {
    let ruleset = load(&target.ruleset)?;
    let spec = spec_of(&ruleset, target.spec.as_deref())?;
    let mut ctx = GenContext::seeded(seed);
    if let Some(size) = size {
        ctx.size = size;
    }
    match sample(&ruleset.registry, &mmsr::generators(), &spec, count, &ctx) {
        Ok(values) => {
            for v in values {
                line(out, v.to_json())?;
            }
            Ok(true)
        }
        Err(e) => {
            eprintln!("regspec: cannot generate {spec}: {e}");
            Ok(false)
        }
    }
}

fn cmd_cnl(command: CnlCommand, out: &mut impl Write) -> Outcome {
    match command {
        CnlCommand::Check { cnl, ruleset, check_root } => {
            let ruleset = load(&ruleset)?;
            let text = std::fs::read_to_string(&cnl).map_err(|e| Fatal(format!("{}: {e}", cnl.display())))?;
            let doc = match parse(&text) {
                Ok(doc) => doc,
                Err(e) => {
                    line(out, json!({ "syntax-error": e.to_json() }))?;
                    return Err(Fatal(format!("{}: {e}", cnl.display())));
                }
            };
            let findings = soundness_check(&doc, &ruleset.registry, check_root.then_some(&ruleset.root));
            let sound = findings.iter().all(|f| f.severity() != Severity::Error);
            let report = json!({ "sound": sound, "findings": findings.iter().map(|f| f.to_json()).collect::<Vec<_>>() });
            writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
            Ok(sound)
        }
        CnlCommand::Render { cnl } => {
            write!(out, "{}", render(&load_cnl(&cnl)?))?;
            Ok(true)
        }
        CnlCommand::Abstract { target } => {
            let ruleset = load(&target.ruleset)?;
            let spec = spec_of(&ruleset, target.spec.as_deref())?;
            write!(out, "{}", render(&abstract_registry(&ruleset.registry, &spec)?.document))?;
            Ok(true)
        }
    }
}

fn bench_example(registry: &Registry, gens: &Generators, spec: &Keyword, seed: u64) -> Result<Value, Fatal> {
    Ok(generate(registry, gens, spec, &GenContext::seeded(seed))?)
}

fn cmd_bench(
    ruleset: Option<&Path>,
    spec: Option<&str>,
    input: Option<&Path>,
    config: BenchConfig,
    as_json: bool,
    out: &mut impl Write,
) -> Outcome {
    let gens = mmsr::generators();
    let (rs, spec, default_example) = match ruleset {
        Some(path) => {
            let rs = load(path)?;
            let spec = spec_of(&rs, spec)?;
            (rs, spec, None)
        }
        None => {
            let rs = mmsr::ruleset();
            let spec = spec_of(&rs, Some(spec.unwrap_or(mmsr::SECURED_REPORT)))?;
            let example = (spec.to_string() == mmsr::SECURED_REPORT).then(mmsr::canonical_example);
            (rs, spec, example)
        }
    };
    let example = match (input, default_example) {
        (Some(path), _) => decode(&read_input(path)?, &path.display().to_string())?,
        (None, Some(v)) => v,
        (None, None) => bench_example(&rs.registry, &gens, &spec, config.seed)?,
    };
    let rows = bench::run(&rs.registry, &gens, &spec, &example, &config)?;
    if as_json {
        let report = json!({ "spec": spec.to_string(), "warmup": config.warmup, "rows": bench::to_json(&rows) });
        writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
    } else {
        writeln!(out, "spec {spec}, {} iterations after {} warmup", config.iterations, config.warmup)?;
        write!(out, "{}", bench::table(&rows))?;
    }
    Ok(true)
}

fn cmd_serve(dir: Option<&Path>, addr: SocketAddr, origins: &[String]) -> Outcome {
    let state = match dir {
        Some(dir) => AppState::load_dir(dir)?,
        None => AppState::bundled(),
    };
    let origins = origins
        .iter()
        .map(|o| o.parse().map_err(|_| Fatal(format!("invalid origin {o:?}"))))
        .collect::<Result<Vec<_>, _>>()?;
    eprintln!(
        "regspec: serving {} ruleset(s) on http://{addr}",
        state.rulesets.len()
    );
    regspec_service::serve(addr, state, &origins)?;
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_checks_keep_order() {
        let values: Vec<Value> = (0..23).map(Value::Int).collect();
        let doubled = check_all(&values, 4, |v| Ok(v.as_f64().unwrap() * 2.0)).unwrap();
        assert_eq!(doubled, (0..23).map(|i| f64::from(i) * 2.0).collect::<Vec<_>>());
        assert!(check_all(&[], 3, |_| Ok(())).unwrap().is_empty());
    }

    #[test]
    fn arguments_parse() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
