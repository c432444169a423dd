//! Command-line front end for `fdcalc`. Everything goes through [`run`],
//! which returns the process exit code:
//!
//! * 0: all checks passed
//! * 1: a bound or divisibility violation was found (the report is still written)
//! * 2: invalid input
//! * 3: capacity exceeded

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use fdcalc::binomial::{
    audit_lift_divisibility, fundamental_coefficients, proper_lift, wilson_hypothesis, wilson_sum,
    BinomialSeries, SeriesCodomain,
};
use fdcalc::calculus::{fdeg, partial_fdeg, FunctionTable};
use fdcalc::groups::DEFAULT_ELEMENT_CAP;
use fdcalc::rings::{validate_rng, FiniteRng, RngDescriptor, SparsePoly};
use fdcalc::verifier::{
    default_sweep, run_campaign, sigma_invariant, verify_instance, BoundQuery, CampaignConfig,
    SystemInstance, DEFAULT_SIGMA_CAP,
};
use fdcalc::{Degree, PGroupShape, Valuation};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_CAPACITY: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Capacity(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Capacity(_) => EXIT_CAPACITY,
        }
    }
}

fn core_err(context: impl std::fmt::Display) -> impl FnOnce(fdcalc::Error) -> CliError {
    move |e| match e {
        fdcalc::Error::Capacity { .. } => CliError::Capacity(format!("{context}: {e}")),
        _ => CliError::Input(format!("{context}: {e}")),
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "fdcalc", version, about = "Finite-difference calculus on finite abelian p-groups")]
struct Cli {
    #[command(flatten)]
    global: GlobalFlags,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
struct GlobalFlags {
    /// Seed for randomized commands.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for `verify`.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Enumeration cap on domain elements.
    #[arg(long, global = true)]
    cap_elements: Option<u64>,
    /// Also write the JSON report here.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// JSON file whose keys override the flags of the same name.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Text,
    Json,
}

/// Keys accepted in a `--config` file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    seed: Option<u64>,
    workers: Option<usize>,
    cap_elements: Option<u64>,
    out: Option<PathBuf>,
    format: Option<Format>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Functional degree and partial degrees of a table.
    Fdeg { table: PathBuf },
    /// Fundamental binomial representation of a table.
    Represent { table: PathBuf },
    /// Proper lift of a series, with the divisibility audit.
    Lift {
        series: PathBuf,
        /// Domain exponents α (comma separated) for the audit thresholds.
        #[arg(long, value_delimiter = ',', required = true)]
        alphas: Vec<u32>,
        #[arg(long, default_value_t = 3)]
        h_max: u32,
    },
    /// Sum of a scalar integer series over [0, p)^N.
    Wilson {
        series: PathBuf,
        #[arg(long)]
        p: u64,
        #[arg(long)]
        beta: u32,
    },
    /// Check every applicable bound on an instance or a campaign.
    Verify {
        /// Instance or campaign config file.
        input: Option<PathBuf>,
        /// Run the default sweep with this many instances instead.
        #[arg(long, conflicts_with = "input")]
        sweep: Option<usize>,
    },
    /// Summation invariant σ(A, B).
    Sigma {
        /// File with `{"domain": shape, "codomain": shape}`.
        shapes: Option<PathBuf>,
        #[arg(long, requires_all = ["domain", "codomain"])]
        p: Option<u64>,
        #[arg(long, value_delimiter = ',')]
        domain: Option<Vec<u32>>,
        #[arg(long, value_delimiter = ',')]
        codomain: Option<Vec<u32>>,
        #[arg(long, default_value_t = DEFAULT_SIGMA_CAP)]
        cap: u64,
    },
    /// Rng utilities.
    Ring {
        #[command(subcommand)]
        command: RingCommand,
    },
    /// Reduced form of a polynomial over F_q.
    Reduce { poly: PathBuf },
    /// Evaluate one bound formula on given inputs.
    Bound { query: PathBuf },
}

#[derive(Debug, Subcommand)]
enum RingCommand {
    /// Validate structure constants.
    Check { spec: PathBuf },
}

#[derive(Debug)]
struct Settings {
    seed: Option<u64>,
    workers: usize,
    cap: u64,
    out: Option<PathBuf>,
    format: Format,
}

impl Settings {
    fn resolve(flags: GlobalFlags) -> CliResult<Self> {
        let file = match &flags.config {
            Some(path) => read_json::<ConfigFile>(path)?,
            None => ConfigFile::default(),
        };
        let s = Settings {
            seed: file.seed.or(flags.seed),
            workers: file.workers.or(flags.workers).unwrap_or(1),
            cap: file.cap_elements.or(flags.cap_elements).unwrap_or(DEFAULT_ELEMENT_CAP),
            out: file.out.or(flags.out),
            format: file.format.or(flags.format).unwrap_or(Format::Text),
        };
        if s.workers == 0 || s.cap == 0 {
            return Err(CliError::Input("workers and cap-elements must be at least 1".into()));
        }
        Ok(s)
    }
}

/// What a command produced: the JSON report, its text rendering and the
/// exit code it implies.
#[derive(Debug)]
struct Outcome {
    report: Value,
    text: String,
    code: i32,
}

impl Outcome {
    fn ok(report: Value, text: String) -> Self {
        Outcome { report, text, code: EXIT_OK }
    }
}

/// Parses `argv` (program name first), runs the command and returns the
/// exit code. Output goes to stdout, diagnostics to stderr.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    match execute(cli) {
        Ok((settings, outcome)) => match emit(&settings, &outcome, out) {
            Ok(()) => outcome.code,
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                e.exit_code()
            }
        },
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: Cli) -> CliResult<(Settings, Outcome)> {
    let settings = Settings::resolve(cli.global)?;
    let outcome = match cli.command {
        Command::Fdeg { table } => cmd_fdeg(&read_json(&table)?)?,
        Command::Represent { table } => cmd_represent(&read_json(&table)?)?,
        Command::Lift { series, alphas, h_max } => cmd_lift(&read_json(&series)?, &alphas, h_max)?,
        Command::Wilson { series, p, beta } => cmd_wilson(&read_json(&series)?, p, beta)?,
        Command::Verify { input, sweep } => cmd_verify(&settings, input.as_deref(), sweep)?,
        Command::Sigma {
            shapes,
            p,
            domain,
            codomain,
            cap,
        } => {
            let (a, b) = match (shapes, p) {
                (Some(path), None) => {
                    let pair: ShapePair = read_json(&path)?;
                    (pair.domain, pair.codomain)
                }
                (None, Some(p)) => (
                    shape_arg(p, domain.unwrap_or_default(), "--domain")?,
                    shape_arg(p, codomain.unwrap_or_default(), "--codomain")?,
                ),
                _ => {
                    return Err(CliError::Input(
                        "sigma needs either a shapes file or --p with --domain and --codomain".into(),
                    ))
                }
            };
            cmd_sigma(&a, &b, cap)?
        }
        Command::Ring {
            command: RingCommand::Check { spec },
        } => cmd_ring_check(read_json(&spec)?)?,
        Command::Reduce { poly } => cmd_reduce(&read_json(&poly)?)?,
        Command::Bound { query } => cmd_bound(&read_json(&query)?)?,
    };
    Ok((settings, outcome))
}

fn emit(settings: &Settings, outcome: &Outcome, out: &mut dyn Write) -> CliResult<()> {
    let json = serde_json::to_string_pretty(&outcome.report).expect("reports are plain JSON") + "\n";
    if let Some(path) = &settings.out {
        fs::write(path, &json)
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?;
    }
    let body = match settings.format {
        Format::Json => json,
        Format::Text => outcome.text.clone(),
    };
    out.write_all(body.as_bytes())
        .map_err(|e| CliError::Input(format!("cannot write output: {e}")))
}

/// Reads and parses a JSON file, reporting the path of the offending value
/// on failure.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    parse_json(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Parses JSON text; the error names the JSON path where parsing failed.
pub fn parse_json<T: DeserializeOwned>(text: &str) -> std::result::Result<T, String> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        format!("at JSON path `{path}`: {}", e.inner())
    })
}

#[derive(Deserialize)]
struct ShapePair {
    domain: PGroupShape,
    codomain: PGroupShape,
}

fn shape_arg(p: u64, alphas: Vec<u32>, flag: &str) -> CliResult<PGroupShape> {
    PGroupShape::new(p, alphas).map_err(core_err(flag))
}

fn cmd_fdeg(f: &FunctionTable) -> CliResult<Outcome> {
    let d = fdeg(f).map_err(core_err("fdeg"))?;
    let partials = (0..f.domain().arity())
        .map(|j| partial_fdeg(f, j))
        .collect::<fdcalc::Result<Vec<Degree>>>()
        .map_err(core_err("partial degrees"))?;
    let text = format!(
        "{d}\npartial degrees: {}\n",
        partials.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(" ")
    );
    Ok(Outcome::ok(
        json!({"fdeg": d, "partial_fdeg": partials, "degree_bound": f.degree_bound()}),
        text,
    ))
}

fn cmd_represent(f: &FunctionTable) -> CliResult<Outcome> {
    let s = fundamental_coefficients(f).map_err(core_err("represent"))?;
    let report = serde_json::to_value(&s).expect("series serialize");
    let text = format!(
        "{} nonzero coefficients, degree {}\n{}\n",
        s.len(),
        s.degree(),
        serde_json::to_string(&report).expect("series serialize")
    );
    Ok(Outcome::ok(report, text))
}

fn cmd_lift(s: &BinomialSeries, alphas: &[u32], h_max: u32) -> CliResult<Outcome> {
    let SeriesCodomain::PGroup(target) = s.codomain() else {
        return Err(CliError::Input("lift: the series must take values in a p-group".into()));
    };
    let lift = proper_lift(s).map_err(core_err("lift"))?;
    let audit = audit_lift_divisibility(&lift, target.p(), alphas, h_max).map_err(core_err("lift audit"))?;
    let pass = audit.pass();
    let failures: Vec<String> = audit
        .failures()
        .map(|(h, e)| format!("  p^{h} does not divide the coefficient at {:?}", e.n))
        .collect();
    let checked: usize = audit.levels.iter().map(|l| l.entries.len()).sum();
    let mut text = format!(
        "lift degree {}, {checked} divisibility checks, {}\n",
        lift.degree(),
        if pass { "all pass" } else { "FAILED" }
    );
    for f in failures {
        text += &f;
        text.push('\n');
    }
    Ok(Outcome {
        report: json!({"lift": lift, "audit": audit, "pass": pass}),
        text,
        code: if pass { EXIT_OK } else { EXIT_VIOLATION },
    })
}

fn cmd_wilson(s: &BinomialSeries, p: u64, beta: u32) -> CliResult<Outcome> {
    let w = wilson_sum(s, p).map_err(core_err("wilson"))?;
    let hypothesis = wilson_hypothesis(s.degree(), p, s.arity(), beta);
    let divisible = w.valuation >= Valuation::Finite(beta as u64);
    let violation = hypothesis && !divisible;
    let text = format!(
        "sum {}\nvaluation {}\nhypothesis {}\ndivisible by p^{beta}: {divisible}\n",
        w.sum,
        w.valuation,
        if hypothesis { "holds" } else { "fails" }
    );
    Ok(Outcome {
        report: json!({
            "p": p,
            "beta": beta,
            "fdeg": s.degree(),
            "sum": serde_json::to_value(&w).expect("wilson serialize")["sum"],
            "valuation": w.valuation,
            "hypothesis": hypothesis,
            "divisible": divisible,
        }),
        text,
        code: if violation { EXIT_VIOLATION } else { EXIT_OK },
    })
}

fn cmd_verify(settings: &Settings, input: Option<&Path>, sweep: Option<usize>) -> CliResult<Outcome> {
    let mut cfg = match (input, sweep) {
        (Some(path), None) => {
            // a campaign config is recognized by its `runs` key
            let value: Value = read_json(path)?;
            if value.get("runs").is_none() {
                return verify_one(settings, &read_json::<SystemInstance>(path)?);
            }
            read_json::<CampaignConfig>(path)?
        }
        (None, Some(count)) => {
            let seed = settings
                .seed
                .ok_or_else(|| CliError::Input("--sweep needs --seed".into()))?;
            default_sweep(seed, count)
        }
        _ => return Err(CliError::Input("verify needs an input file or --sweep".into())),
    };
    if let Some(seed) = settings.seed {
        cfg.seed = seed;
    }
    cfg.workers = settings.workers;
    cfg.cap_elements = settings.cap;
    let report = run_campaign(&cfg).map_err(core_err("campaign"))?;
    let mut text = format!(
        "{} instances, {} passed, {} violations, {} with no zeros\n",
        report.instances, report.passed, report.violations, report.tightness.empty_zero_sets
    );
    for (name, gaps) in &report.tightness.gaps {
        let cells: Vec<String> = gaps.iter().map(|(g, n)| format!("{g}:{n}")).collect();
        text += &format!("gap {name}: {}\n", cells.join(" "));
    }
    for o in report.outcomes.iter().filter(|o| !o.report.pass) {
        let names: Vec<&str> = o.report.violations().map(|b| b.name.as_str()).collect();
        text += &format!("VIOLATION instance {} (seed {}): {}\n", o.index, o.seed, names.join(", "));
    }
    let code = if report.violations > 0 { EXIT_VIOLATION } else { EXIT_OK };
    Ok(Outcome {
        report: serde_json::to_value(&report).expect("campaign serialize"),
        text,
        code,
    })
}

fn verify_one(settings: &Settings, inst: &SystemInstance) -> CliResult<Outcome> {
    let r = verify_instance(inst, settings.cap).map_err(core_err("verify"))?;
    let mut text = format!(
        "zeros {} of {}\nvaluation {}\n",
        r.zero_count, r.domain_order, r.valuation
    );
    for b in &r.bounds {
        let status = match (b.applicable, b.bound) {
            (true, Some(bound)) if r.valuation >= bound => format!("{bound} ok"),
            (true, Some(bound)) => format!("{bound} VIOLATED"),
            _ => "not applicable".to_string(),
        };
        text += &format!("{}: {status}\n", b.name);
    }
    let code = if r.pass { EXIT_OK } else { EXIT_VIOLATION };
    Ok(Outcome {
        report: serde_json::to_value(&r).expect("report serialize"),
        text,
        code,
    })
}

fn cmd_sigma(a: &PGroupShape, b: &PGroupShape, cap: u64) -> CliResult<Outcome> {
    let r = sigma_invariant(a, b, cap).map_err(core_err("sigma"))?;
    let witness_degree = fdeg(&r.witness).map_err(core_err("sigma witness"))?;
    let text = format!(
        "{}\nwitness degree {witness_degree}, {} functions enumerated\n",
        r.sigma, r.functions_enumerated
    );
    Ok(Outcome::ok(
        json!({
            "domain": a,
            "codomain": b,
            "sigma": r.sigma,
            "witness_fdeg": witness_degree,
            "functions_enumerated": r.functions_enumerated,
            "witness": r.witness,
        }),
        text,
    ))
}

fn cmd_ring_check(d: RngDescriptor) -> CliResult<Outcome> {
    let validation = match &d {
        RngDescriptor::Spec(spec) => validate_rng(spec).map_err(core_err("ring check"))?,
        RngDescriptor::Field { .. } => FiniteRng::from_descriptor(d.clone())
            .map_err(core_err("ring check"))?
            .validation()
            .clone(),
    };
    let text = format!(
        "associative {}\ncommutative {}\nunital {}\nfield {}\n",
        validation.associative,
        validation.commutative,
        validation.unital(),
        validation.field
    ) + &validation
        .witness
        .map(|[i, j, k]| format!("non-associative triple: e{i} e{j} e{k}\n"))
        .unwrap_or_default();
    Ok(Outcome::ok(
        serde_json::to_value(&validation).expect("validation serialize"),
        text,
    ))
}

fn cmd_reduce(f: &SparsePoly) -> CliResult<Outcome> {
    let r = f.reduce_over_fq().map_err(core_err("reduce"))?;
    let report = serde_json::to_value(&r).expect("poly serialize");
    let text = format!(
        "{} terms, degree {}, p-weight degree {}\n{}\n",
        r.terms().len(),
        r.degree(),
        r.p_weight_degree(),
        serde_json::to_string(&report).expect("poly serialize")
    );
    Ok(Outcome::ok(report, text))
}

fn cmd_bound(q: &BoundQuery) -> CliResult<Outcome> {
    let v = q.evaluate().map_err(core_err("bound"))?;
    let mut report = serde_json::to_value(q).expect("query serialize");
    report["value"] = serde_json::to_value(v).expect("valuation serialize");
    Ok(Outcome::ok(report, format!("{v}\n")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use fdcalc::binomial::MultiIndex;
    use num_bigint::BigInt;

    fn flags() -> GlobalFlags {
        GlobalFlags {
            seed: Some(1),
            workers: Some(4),
            cap_elements: None,
            out: None,
            format: Some(Format::Text),
            config: None,
        }
    }

    #[test]
    fn settings_defaults_and_validation() {
        let s = Settings::resolve(flags()).unwrap();
        assert_eq!((s.seed, s.workers, s.cap, s.format), (Some(1), 4, DEFAULT_ELEMENT_CAP, Format::Text));
        let mut f = flags();
        f.workers = Some(0);
        assert_eq!(Settings::resolve(f).unwrap_err().exit_code(), EXIT_INPUT);
    }

    #[test]
    fn config_keys_are_checked() {
        assert!(parse_json::<ConfigFile>(r#"{"seed": 3, "format": "json"}"#).is_ok());
        let e = parse_json::<ConfigFile>(r#"{"sed": 3}"#).unwrap_err();
        assert!(e.contains("unknown field"), "{e}");
        let e = parse_json::<ConfigFile>(r#"{"format": "xml"}"#).unwrap_err();
        assert!(e.contains("format"), "{e}");
    }

    #[test]
    fn core_errors_map_to_exit_codes() {
        let cap = fdcalc::Error::Capacity { what: "x".into(), needed: 9, cap: 1 };
        assert_eq!(core_err("ctx")(cap).exit_code(), EXIT_CAPACITY);
        let bad = fdcalc::Error::Input("nope".into());
        let e = core_err("ctx")(bad);
        assert_eq!(e.exit_code(), EXIT_INPUT);
        assert!(e.to_string().starts_with("ctx: "));
    }

    #[test]
    fn wilson_outside_hypothesis_is_not_a_violation() {
        // C(x,1) over [0,2) sums to 1, but fdeg 1 is not below (p−1)(N−β+1) = 1
        let mut s = BinomialSeries::zero(1, SeriesCodomain::Integers { width: 1 });
        s.insert(MultiIndex(vec![1]), vec![BigInt::from(1)]).unwrap();
        let o = cmd_wilson(&s, 2, 1).unwrap();
        assert_eq!(o.report["hypothesis"], false);
        assert_eq!(o.report["divisible"], false);
        assert_eq!(o.code, EXIT_OK);
    }

    #[test]
    fn lift_needs_a_group_valued_series() {
        let s = BinomialSeries::zero(1, SeriesCodomain::Integers { width: 1 });
        assert_eq!(cmd_lift(&s, &[1], 2).unwrap_err().exit_code(), EXIT_INPUT);
    }
}
