//! The `nevlab` command line: scenario files in, reports out.
//!
//! Exit status: 0 when every selected check verifies, 1 when an inequality
//! is violated on the grid, 2 when a theorem does not apply, 64 on usage
//! errors, 65 on invalid scenarios and 74 on I/O failures.

pub mod expr;
mod run;
pub mod scenario;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

pub use run::{
    check_options, combine_exit_codes, effective_grid, execute, execute_check, run, write_artifacts,
    write_atomic, CheckOutcome, Overrides, RunError, RunSummary,
};
pub use scenario::{
    parse_scenario, CheckOptionsSpec, CheckSpec, Diagnostic, DiagnosticCode, GridSpec, Scenario,
    Theorem,
};

use crate::theorems::TheoremReport;

pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DATA: i32 = 65;
pub const EXIT_IO: i32 = 74;

#[derive(Parser, Debug)]
#[command(name = "nevlab", version, about = "Value-distribution experiments on exponential-polynomial curves")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Scenario JSON file.
    scenario: PathBuf,
    /// Radius grid `r_min:r_max:points[:geometric|linear]`.
    #[arg(long)]
    grid: Option<String>,
    /// Slack coefficient of the `o(T_f)` allowance.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Truncation level for counting functions.
    #[arg(long)]
    truncation: Option<u32>,
    /// Directory for report artifacts.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed of randomized searches.
    #[arg(long)]
    seed: Option<u64>,
    /// Machine-readable output on stdout.
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run every check listed in the scenario.
    Run(Common),
    /// First main theorem for each curve and hypersurface.
    FmtCheck(Selected),
    /// Second main theorem for hyperplanes.
    CartanCheck(Selected),
    /// Second main theorem for hypersurfaces, with its transfer identities.
    MainSmt(Selected),
    /// Multiplicity criterion for algebraic degeneracy.
    Degeneracy(Selected),
    /// Uniqueness for two curves sharing preimages.
    Uniqueness(Selected),
    /// Table of (N+1)-subsets with certificate status.
    GeneralPosition(Common),
    /// Nullstellensatz certificates for one (N+1)-subset.
    Certificate(CertificateArgs),
    /// Characteristic and related functionals of one curve as CSV.
    Profile(Selected),
}

#[derive(Args, Debug, Clone)]
struct Selected {
    #[command(flatten)]
    common: Common,
    /// Curve label; defaults to the scenario's checks or its first curve.
    #[arg(long)]
    curve: Option<String>,
}

#[derive(Args, Debug, Clone)]
struct CertificateArgs {
    #[command(flatten)]
    common: Common,
    /// Hypersurfaces by 1-based position or label, comma separated.
    #[arg(long, value_delimiter = ',')]
    subset: Option<Vec<String>>,
    /// Only print the certificate for the variable `w<var>`.
    #[arg(long)]
    var: Option<usize>,
    /// Curve for the norm-bound spot check.
    #[arg(long)]
    curve: Option<String>,
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

fn load(c: &Common) -> Result<(Scenario, Overrides), Failure> {
    let text = std::fs::read_to_string(&c.scenario)
        .map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", c.scenario.display())))?;
    let sc = parse_scenario(&text)
        .map_err(|d| Failure::new(EXIT_DATA, format!("{}: {d}", c.scenario.display())))?;
    let grid = c
        .grid
        .as_deref()
        .map(GridSpec::parse_cli)
        .transpose()
        .map_err(|e| Failure::new(EXIT_USAGE, format!("--grid: {e}")))?;
    if let Some(g) = &grid {
        g.build().map_err(|e| Failure::new(EXIT_USAGE, format!("--grid: {e}")))?;
    }
    Ok((
        sc,
        Overrides {
            grid,
            epsilon: c.epsilon,
            truncation: c.truncation,
            seed: c.seed,
        },
    ))
}

/// Checks of the given kinds from the scenario, or synthesized defaults
/// when it lists none.
fn select(sc: &Scenario, kinds: &[Theorem], curve: Option<&str>) -> Result<Vec<CheckSpec>, Failure> {
    if let Some(c) = curve {
        if sc.curve(c).is_none() {
            return Err(Failure::new(EXIT_DATA, format!("unknown curve `{c}`")));
        }
    }
    let mut listed: Vec<CheckSpec> = sc
        .checks
        .iter()
        .filter(|c| kinds.contains(&c.theorem))
        .filter(|c| curve.is_none() || c.curve.as_deref() == curve)
        .cloned()
        .collect();
    if !listed.is_empty() {
        return Ok(listed);
    }
    let label = curve
        .map(str::to_string)
        .or_else(|| sc.curves.keys().next().cloned());
    for &kind in kinds {
        let mut spec = CheckSpec::new(kind);
        spec.curve = label.clone();
        match kind {
            Theorem::Fmt => {
                for h in sc.hypersurfaces.keys() {
                    let mut s = spec.clone();
                    s.hypersurfaces = vec![h.clone()];
                    listed.push(s);
                }
            }
            Theorem::Uniqueness => {
                spec.other_curve = sc.curves.keys().find(|k| Some(*k) != label.as_ref()).cloned();
                if spec.other_curve.is_some() {
                    listed.push(spec);
                }
            }
            _ => listed.push(spec),
        }
    }
    if listed.is_empty() || (label.is_none() && kinds.iter().any(|k| *k != Theorem::GeneralPosition)) {
        return Err(Failure::new(EXIT_DATA, "the scenario has nothing to check for this command"));
    }
    if sc.hypersurfaces.is_empty() && !kinds.contains(&Theorem::Profile) {
        return Err(Failure::new(EXIT_DATA, "the scenario declares no hypersurfaces"));
    }
    Ok(listed)
}

fn print_reports(summary: &RunSummary, json_out: bool) {
    if json_out {
        let reports: Vec<_> = summary
            .outcomes
            .iter()
            .map(|o| json!({"name": o.name, "report": o.report.to_json()}))
            .collect();
        let doc = json!({"summary": summary.to_json(), "reports": reports});
        println!("{}", serde_json::to_string_pretty(&doc).expect("serializable"));
    } else {
        for o in &summary.outcomes {
            println!("== {} ==", o.name);
            print!("{}", o.report.to_text());
            println!();
        }
        print!("{}", summary.to_text());
    }
}

fn finish(summary: RunSummary, c: &Common, json_out: bool) -> Result<i32, Failure> {
    if let Some(out) = &c.out {
        write_artifacts(&summary, out).map_err(|e| Failure::new(EXIT_IO, e.to_string()))?;
    }
    print_reports(&summary, json_out);
    Ok(summary.exit_code())
}

fn run_selected(s: &Selected, kinds: &[Theorem]) -> Result<i32, Failure> {
    let (sc, ov) = load(&s.common)?;
    let checks = select(&sc, kinds, s.curve.as_deref())?;
    let summary = execute(&sc, &checks, &ov).map_err(|e| Failure::new(EXIT_USAGE, e))?;
    finish(summary, &s.common, s.common.json)
}

fn general_position_table(rep: &TheoremReport) -> String {
    let mut out = format!("{:<24} {:<14} detail\n", "subset", "status");
    if let Some(rows) = rep.details.get("subsets").and_then(|v| v.as_array()) {
        for row in rows {
            let subset: Vec<&str> = row["subset"]
                .as_array()
                .map(|a| a.iter().filter_map(|s| s.as_str()).collect())
                .unwrap_or_default();
            let status = row["status"].as_str().unwrap_or("");
            let detail = match status {
                "certified" => format!("m = {}, c1 = {}", row["exponents"], row["c1"]),
                "common-zero" => format!("zero at {}", row["point"].as_str().unwrap_or("")),
                _ => format!("no certificate up to m = {}", row["m_max"]),
            };
            out.push_str(&format!("{:<24} {:<14} {detail}\n", subset.join(","), status));
        }
    }
    out.push_str(&format!("verdict: {}\n", rep.verdict.label()));
    out
}

fn general_position(c: &Common) -> Result<i32, Failure> {
    let (sc, ov) = load(c)?;
    let mut checks = select(&sc, &[Theorem::GeneralPosition], None)?;
    checks.truncate(1);
    let summary = execute(&sc, &checks, &ov).map_err(|e| Failure::new(EXIT_USAGE, e))?;
    if let Some(out) = &c.out {
        write_artifacts(&summary, out).map_err(|e| Failure::new(EXIT_IO, e.to_string()))?;
    }
    let rep = &summary.outcomes[0].report;
    if c.json {
        println!("{}", serde_json::to_string_pretty(&rep.to_json()).expect("serializable"));
    } else {
        print!("{}", general_position_table(rep));
    }
    Ok(rep.exit_code())
}

fn certificate(a: &CertificateArgs) -> Result<i32, Failure> {
    let (sc, ov) = load(&a.common)?;
    let mut spec = CheckSpec::new(Theorem::Certificate);
    if let Some(items) = &a.subset {
        for item in items {
            let item = item.trim();
            let label = match item.parse::<usize>() {
                Ok(i) if i >= 1 && i <= sc.hypersurfaces.len() => {
                    sc.hypersurfaces.get_index(i - 1).map(|(k, _)| k.clone())
                }
                Ok(_) => None,
                Err(_) => sc.hypersurfaces.contains_key(item).then(|| item.to_string()),
            };
            let label = label.ok_or_else(|| Failure::new(EXIT_USAGE, format!("--subset: unknown `{item}`")))?;
            spec.hypersurfaces.push(label);
        }
    }
    if sc.hypersurfaces.is_empty() {
        return Err(Failure::new(EXIT_DATA, "the scenario declares no hypersurfaces"));
    }
    if let Some(c) = &a.curve {
        if sc.curve(c).is_none() {
            return Err(Failure::new(EXIT_DATA, format!("unknown curve `{c}`")));
        }
    }
    spec.curve = a.curve.clone();
    if let Some(v) = a.var {
        if v > sc.dimension {
            return Err(Failure::new(EXIT_USAGE, format!("--var {v}: variables are w0..w{}", sc.dimension)));
        }
    }
    let summary = execute(&sc, &[spec], &ov).map_err(|e| Failure::new(EXIT_USAGE, e))?;
    if let Some(out) = &a.common.out {
        write_artifacts(&summary, out).map_err(|e| Failure::new(EXIT_IO, e.to_string()))?;
    }
    let rep = &summary.outcomes[0].report;
    if a.common.json {
        println!("{}", serde_json::to_string_pretty(&rep.to_json()).expect("serializable"));
        return Ok(rep.exit_code());
    }
    if let Some(set) = rep.details.get("certificates") {
        let subset = rep.details["subset"]
            .as_array()
            .map(|v| v.iter().filter_map(|s| s.as_str()).collect::<Vec<_>>().join(","))
            .unwrap_or_default();
        println!("subset: {subset} (common degree n = {})", rep.details["degree"]);
        println!("c1: {}", set["c1"]);
        for cert in set["certificates"].as_array().into_iter().flatten() {
            let k = cert["variable"].as_u64().unwrap_or(0) as usize;
            if a.var.is_some_and(|v| v != k) {
                continue;
            }
            println!("m_{k} = {}", cert["exponent"]);
            for (j, b) in cert["cofactors"].as_array().into_iter().flatten().enumerate() {
                println!("b_{k},{} = {}", j + 1, b.as_str().unwrap_or(""));
            }
            println!("residual_{k} = {}", cert["residual"]);
        }
        if let Some(v) = rep.details.get("max_norm_ratio") {
            println!("max norm ratio: {v}");
        }
    }
    println!("verdict: {}", rep.verdict.label());
    Ok(rep.exit_code())
}

fn profile(s: &Selected) -> Result<i32, Failure> {
    let (sc, ov) = load(&s.common)?;
    let mut checks = select(&sc, &[Theorem::Profile], s.curve.as_deref())?;
    checks.truncate(1);
    let summary = execute(&sc, &checks, &ov).map_err(|e| Failure::new(EXIT_USAGE, e))?;
    if let Some(out) = &s.common.out {
        write_artifacts(&summary, out).map_err(|e| Failure::new(EXIT_IO, e.to_string()))?;
    }
    let rep = &summary.outcomes[0].report;
    if s.common.json {
        println!("{}", serde_json::to_string_pretty(&rep.to_json()).expect("serializable"));
    } else {
        print!("{}", rep.to_csv());
    }
    Ok(rep.exit_code())
}

fn configure_threads() {
    if let Ok(v) = std::env::var("NEVLAB_THREADS") {
        match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => eprintln!("nevlab: ignoring NEVLAB_THREADS={v:?}"),
        }
    }
}

/// Parses arguments, runs the command and returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    configure_threads();
    let result = match &cli.command {
        Command::Run(c) => load(c).and_then(|(sc, ov)| {
            let out = c.out.clone().unwrap_or_else(|| PathBuf::from("out"));
            let summary = execute(&sc, &sc.checks, &ov).map_err(|e| Failure::new(EXIT_USAGE, e))?;
            write_artifacts(&summary, &out).map_err(|e| Failure::new(EXIT_IO, e.to_string()))?;
            if c.json {
                println!("{}", serde_json::to_string_pretty(&summary.to_json()).expect("serializable"));
            } else {
                print!("{}", summary.to_text());
            }
            Ok(summary.exit_code())
        }),
        Command::FmtCheck(s) => run_selected(s, &[Theorem::Fmt]),
        Command::CartanCheck(s) => run_selected(s, &[Theorem::Cartan]),
        Command::MainSmt(s) => run_selected(
            s,
            &[Theorem::MainSmt, Theorem::TfTransfer, Theorem::CountingTransfer],
        ),
        Command::Degeneracy(s) => run_selected(s, &[Theorem::Degeneracy]),
        Command::Uniqueness(s) => run_selected(s, &[Theorem::Uniqueness]),
        Command::GeneralPosition(c) => general_position(c),
        Command::Certificate(a) => certificate(a),
        Command::Profile(s) => profile(s),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            eprintln!("nevlab: {}", f.message);
            f.code
        }
    }
}
