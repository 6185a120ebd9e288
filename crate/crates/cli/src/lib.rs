//! Command dispatch for the `wconorm` binary. Kept as a library so the
//! integration tests can drive it without spawning processes.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use wconorm::exec::Exec;
use wconorm::norms::{
    derive_seed, formal_adjoint_matrix, norm_p, realize, EstimateOptions, Exponent, NormBounds, DEFAULT_RESTARTS,
};
use wconorm::scenario::{
    counterexample_scenario, load_scenario, random_scenario, running_scenario, RandomSpec, Scenario, TermSpec,
};
use wconorm::verify::{
    batch_to_csv, check_property_star, reports_to_csv, run_batch, run_checks, CheckName, Outcome,
    Verdict, VerificationReport,
};
use wconorm::{Error, GroupDescriptor};

#[derive(Debug, Parser)]
#[command(name = "wconorm", version, about = "Norms and structural checks for weighted composition operators")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Norm bounds of the scenario element for each p.
    Norm(NormArgs),
    /// Run checkers on the scenario element.
    Verify(VerifyArgs),
    /// The element twisted by every character of the group.
    Twist(ScenarioArgs),
    /// The formal-adjoint matrix.
    Adjoint(ScenarioArgs),
    /// Built-in running scenario and non-free counterexample.
    Demo(OutputArgs),
    /// Seeded random scenarios through the verify suite.
    Batch(BatchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Write artifacts into this directory instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Overrides the scenario seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_RESTARTS)]
    pub restarts: usize,
    /// Run everything on the calling thread.
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ScenarioArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct NormArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Comma-separated exponents: `1`, `inf`, decimals.
    #[arg(long, default_value = "1,2,inf")]
    pub p: String,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[arg(long, default_value = "2")]
    pub p: String,
    /// Checker names, comma-separated, or `all`.
    #[arg(long, default_value = "all")]
    pub checks: String,
    /// Same as `--checks all`.
    #[arg(long)]
    pub all: bool,
}

#[derive(Debug, Clone, Args)]
pub struct BatchArgs {
    #[command(flatten)]
    pub output: OutputArgs,
    #[arg(long, default_value_t = 20)]
    pub count: usize,
    #[arg(long, default_value = "cyclic:3")]
    pub group: String,
    /// Defaults to the group order.
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    /// Defaults to the whole group.
    #[arg(long)]
    pub support: Option<usize>,
    #[arg(long, default_value = "1,2,inf")]
    pub p: String,
    #[arg(long, default_value = "all")]
    pub checks: String,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{0}")]
    Usage(String),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(Error::from(e))
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Parse `args` (including the program name) and run the command. Returns
/// the process exit code: 0 when every check passed or failed as expected,
/// 1 when some check failed unexpectedly.
pub fn run_command<I, S>(args: I, stdout: &mut dyn Write) -> CliResult<i32>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            write!(stdout, "{e}")?;
            return Ok(0);
        }
        Err(e) => return Err(CliError::Usage(e.to_string())),
    };
    match cli.command {
        Command::Norm(a) => norm(&a, stdout),
        Command::Verify(a) => verify(&a, stdout),
        Command::Twist(a) => twist(&a, stdout),
        Command::Adjoint(a) => adjoint(&a, stdout),
        Command::Demo(a) => demo(&a, stdout),
        Command::Batch(a) => batch(&a, stdout),
    }
}

fn estimate_options(out: &OutputArgs, scenario_seed: u64) -> EstimateOptions {
    EstimateOptions {
        restarts: out.restarts,
        seed: out.seed.unwrap_or(scenario_seed),
        exec: if out.sequential { Exec::Sequential } else { Exec::default() },
        ..EstimateOptions::default()
    }
}

fn load(args: &ScenarioArgs) -> CliResult<Scenario> {
    let mut sc = load_scenario(&args.scenario)?;
    if let Some(seed) = args.output.seed {
        sc.seed = seed;
    }
    Ok(sc)
}

/// Write `body` to `out/name` or to stdout.
fn emit(out: &OutputArgs, name: &str, body: &str, stdout: &mut dyn Write) -> CliResult<()> {
    match &out.out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            write_file(&dir.join(name), body)
        }
        None => {
            stdout.write_all(body.as_bytes())?;
            if !body.ends_with('\n') {
                stdout.write_all(b"\n")?;
            }
            Ok(())
        }
    }
}

fn write_file(path: &Path, body: &str) -> CliResult<()> {
    fs::write(path, body).map_err(|e| CliError::Core(Error::Io(format!("{}: {e}", path.display()))))
}

fn pretty(v: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

fn norm(args: &NormArgs, stdout: &mut dyn Write) -> CliResult<i32> {
    let sc = load(&args.scenario)?;
    let inst = sc.instantiate()?;
    let ps = Exponent::parse_list(&args.p)?;
    let opts = estimate_options(&args.scenario.output, sc.seed);
    let bounds: Vec<(Exponent, NormBounds)> = ps.iter().map(|&p| (p, norm_p(&realize(&inst.element, p), &opts))).collect();
    let out = &args.scenario.output;
    match out.format {
        Format::Json => {
            let items: Vec<Value> = bounds.iter().map(|(p, nb)| json!({"p": p, "bounds": nb})).collect();
            emit(out, "norm.json", &pretty(&json!({"label": sc.label, "norms": items})), stdout)?;
        }
        Format::Csv => {
            let mut s = String::from("p,lower,upper,lower_method,upper_method,exact\n");
            for (p, nb) in &bounds {
                s += &format!("{p},{},{},{},{},{}\n", nb.lower, nb.upper, nb.lower_method, nb.upper_method, nb.exact);
            }
            emit(out, "norm.csv", &s, stdout)?;
        }
    }
    Ok(0)
}

fn reports(outcomes: &[Outcome]) -> Vec<&VerificationReport> {
    outcomes
        .iter()
        .filter_map(|o| match o {
            Outcome::Report(r) => Some(r.as_ref()),
            Outcome::Skipped(_) => None,
        })
        .collect()
}

fn exit_code<'a>(reports: impl IntoIterator<Item = &'a VerificationReport>) -> i32 {
    i32::from(reports.into_iter().any(|r| r.verdict == Verdict::Fail))
}

fn verify(args: &VerifyArgs, stdout: &mut dyn Write) -> CliResult<i32> {
    let sc = load(&args.scenario)?;
    let inst = sc.instantiate()?;
    let ps = Exponent::parse_list(&args.p)?;
    let checks = if args.all { CheckName::ALL.to_vec() } else { CheckName::parse_list(&args.checks)? };
    let opts = estimate_options(&args.scenario.output, sc.seed);
    let outcomes = run_checks(&inst.element, &checks, &ps, &opts)?;
    let out = &args.scenario.output;
    match out.format {
        Format::Json => emit(out, "reports.json", &pretty(&outcomes), stdout)?,
        Format::Csv => emit(out, "reports.csv", &reports_to_csv(&reports(&outcomes))?, stdout)?,
    }
    Ok(exit_code(reports(&outcomes)))
}

fn twist(args: &ScenarioArgs, stdout: &mut dyn Write) -> CliResult<i32> {
    let sc = load(args)?;
    let inst = sc.instantiate()?;
    let chars = inst.space.group().characters()?;
    let twisted: Vec<(Vec<String>, Vec<TermSpec>)> = chars
        .iter()
        .map(|chi| {
            let phases = chi.phases().iter().map(|r| r.to_string()).collect();
            let terms = inst.element.twist(chi).terms().map(|(g, f)| TermSpec::from_field(g, f)).collect();
            (phases, terms)
        })
        .collect();
    match args.output.format {
        Format::Json => {
            let items: Vec<Value> =
                twisted.iter().map(|(phases, terms)| json!({"character": phases, "element": terms})).collect();
            emit(&args.output, "twist.json", &pretty(&items), stdout)?;
        }
        Format::Csv => {
            let mut s = String::from("character,g,x,row,col,re,im\n");
            for (c, (_, terms)) in twisted.iter().enumerate() {
                for t in terms {
                    for (x, m) in t.coeff.iter().enumerate() {
                        for (i, row) in m.iter().enumerate() {
                            for (j, z) in row.iter().enumerate() {
                                s += &format!("{c},{},{x},{i},{j},{},{}\n", t.g, z[0], z[1]);
                            }
                        }
                    }
                }
            }
            emit(&args.output, "twist.csv", &s, stdout)?;
        }
    }
    Ok(0)
}

fn adjoint(args: &ScenarioArgs, stdout: &mut dyn Write) -> CliResult<i32> {
    let sc = load(args)?;
    let inst = sc.instantiate()?;
    let adj = formal_adjoint_matrix(&inst.element);
    match args.output.format {
        Format::Json => emit(&args.output, "adjoint.json", &pretty(&adj.to_json()), stdout)?,
        Format::Csv => emit(&args.output, "adjoint.csv", &adj.to_csv()?, stdout)?,
    }
    Ok(0)
}

fn summary_line(label: &str, r: &VerificationReport) -> String {
    let verdict = match r.verdict {
        Verdict::Pass => "pass".to_string(),
        Verdict::Fail => "FAIL".to_string(),
        Verdict::ExpectedFailure => {
            let what = if r.claim.starts_with("property-star@") { "property (*)" } else { r.claim.as_str() };
            format!("expected failure: {what}")
        }
    };
    format!("{label:<20} {:<34} discrepancy {:<10.3e} {verdict}\n", r.claim, r.discrepancy)
}

fn demo(args: &OutputArgs, stdout: &mut dyn Write) -> CliResult<i32> {
    let running = running_scenario();
    let inst = running.instantiate()?;
    let opts = estimate_options(args, running.seed);
    let ps = [Exponent::ONE, Exponent::TWO, Exponent::INFINITY];
    let outcomes = run_checks(&inst.element, &CheckName::ALL, &ps, &opts)?;

    let counter = counterexample_scenario();
    let cinst = counter.instantiate()?;
    let copts = estimate_options(args, counter.seed);
    let cstar: Vec<VerificationReport> =
        ps.iter().map(|&p| check_property_star(&cinst.element, p, &copts)).collect::<Result<_, _>>()?;

    let mut text = String::new();
    text += &format!("running scenario `{}`: Z2 swap on two points, a_e = (1, 2), a_s = (3, 1)\n", running.label);
    for p in ps {
        let nb = norm_p(&realize(&inst.element, p), &opts);
        text += &format!("  ‖b‖_{p} = {:.12} ({})\n", nb.value(), nb.lower_method);
    }
    for r in reports(&outcomes) {
        text += &summary_line(&running.label, r);
    }
    text += &format!("counterexample `{}`: trivial action, b = T_e - T_s realizes to 0\n", counter.label);
    for r in &cstar {
        text += &summary_line(&counter.label, r);
    }
    let running_ok = exit_code(reports(&outcomes)) == 0;
    let counter_ok = cstar.iter().all(|r| r.verdict == Verdict::ExpectedFailure);
    text += &format!(
        "demo: {}\n",
        if running_ok && counter_ok { "ok" } else { "unexpected results" }
    );
    match &args.out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            write_file(&dir.join("demo.json"), &pretty(&json!({"running": outcomes, "counterexample": cstar})))?;
            let mut all = reports(&outcomes);
            all.extend(cstar.iter());
            write_file(&dir.join("demo.csv"), &reports_to_csv(&all)?)?;
            stdout.write_all(text.as_bytes())?;
        }
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(if running_ok && counter_ok { 0 } else { 1 })
}

fn batch(args: &BatchArgs, stdout: &mut dyn Write) -> CliResult<i32> {
    let group: GroupDescriptor = args.group.parse()?;
    let order = wconorm::FiniteGroup::build(&group)?.order();
    let seed = args.output.seed.unwrap_or(0);
    let scenarios: Vec<Scenario> = (0..args.count)
        .map(|i| {
            random_scenario(&RandomSpec {
                group: group.clone(),
                points: args.points.unwrap_or(order),
                dim: args.dim,
                support: args.support.unwrap_or(order),
                seed: derive_seed(seed, i as u64),
                free: true,
            })
        })
        .collect::<Result<_, _>>()?;
    let ps = Exponent::parse_list(&args.p)?;
    let checks = CheckName::parse_list(&args.checks)?;
    let opts = estimate_options(&args.output, seed);
    let entries = run_batch(&scenarios, &checks, &ps, &opts)?;
    let code = exit_code(entries.iter().flat_map(|e| reports(&e.outcomes)));
    match (&args.output.out, args.output.format) {
        (Some(dir), _) => {
            fs::create_dir_all(dir)?;
            write_file(&dir.join("batch.json"), &pretty(&entries))?;
            write_file(&dir.join("batch.csv"), &batch_to_csv(&entries)?)?;
            for (i, sc) in scenarios.iter().enumerate() {
                sc.save(dir.join(format!("scenario-{i:04}.json")))?;
            }
        }
        (None, Format::Json) => emit(&args.output, "batch.json", &pretty(&entries), stdout)?,
        (None, Format::Csv) => emit(&args.output, "batch.csv", &batch_to_csv(&entries)?, stdout)?,
    }
    Ok(code)
}
