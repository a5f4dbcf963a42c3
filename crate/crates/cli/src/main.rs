use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use noarb_core::emm::{build_emm, verify_martingale, EmmError};
use noarb_core::geometry::{NodeCertificate, RiCertificate};
use noarb_core::model::{gains, validate, Strategy, Violation};
use noarb_core::verify::{
    beta_exact, equivalence_report, oracle_arbitrage_lp, random_tree, GeneratorMode, GeneratorParams, VerifyError,
};
use noarb_core::{Rational, ScenarioTree, TreeDocument};

/// Exact no-arbitrage checks for finite scenario-tree markets.
#[derive(Parser)]
#[command(name = "noarb", version)]
struct Cli {
    /// Machine-readable JSON on stdout.
    #[arg(long, global = true)]
    json: bool,
    /// Print nothing on success; the exit code carries the verdict.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the structural rules of a tree file.
    Validate { file: PathBuf },
    /// Run all three routes and report whether they agree.
    Check {
        file: PathBuf,
        /// Include wall-clock timings (makes output nondeterministic).
        #[arg(long)]
        timing: bool,
    },
    /// Search for an arbitrage strategy.
    FindArbitrage { file: PathBuf },
    /// Construct a martingale measure with bounded density.
    BuildEmm { file: PathBuf },
    /// Generate a seeded random tree.
    Gen(GenArgs),
    /// Exact optimum of the gain-functional LP.
    Beta { file: PathBuf },
}

#[derive(Args)]
struct GenArgs {
    /// Number of assets.
    #[arg(short = 'd', long = "assets", default_value_t = 1)]
    assets: usize,
    /// Number of periods.
    #[arg(short = 'n', long = "periods", default_value_t = 2)]
    periods: usize,
    /// Largest number of children per node.
    #[arg(short, long, default_value_t = 3)]
    branching: usize,
    /// Increments lie in [-value-range, value-range].
    #[arg(long, default_value_t = 2)]
    value_range: i64,
    /// Increments are multiples of 1/grid.
    #[arg(long, default_value_t = 2)]
    grid: i64,
    #[arg(long, default_value_t = GeneratorMode::Generic)]
    mode: GeneratorMode,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when absent.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

/// Exit status contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    /// The property holds or the artifact was produced.
    Holds = 0,
    /// The property fails in the expected way.
    Fails = 1,
    /// Unreadable or invalid input.
    Input = 2,
    /// Routes disagree or a witness failed re-verification.
    Alarm = 3,
}

struct Output {
    status: Status,
    human: String,
    json: String,
}

impl Output {
    fn new(status: Status, human: String, json: impl Serialize) -> Self {
        Output {
            status,
            human,
            json: serde_json::to_string_pretty(&json).expect("output types serialize") + "\n",
        }
    }
}

/// Failure before any verdict is reached.
struct Failure {
    status: Status,
    message: String,
    violations: Vec<Violation>,
}

impl Failure {
    fn input(message: String) -> Self {
        Failure {
            status: Status::Input,
            message,
            violations: Vec::new(),
        }
    }

    fn alarm(message: String) -> Self {
        Failure {
            status: Status::Alarm,
            message,
            violations: Vec::new(),
        }
    }
}

#[derive(Serialize)]
struct ErrorJson<'a> {
    error: &'a str,
    #[serde(skip_serializing_if = "<[_]>::is_empty")]
    violations: &'a [Violation],
}

fn read_document(path: &Path) -> Result<TreeDocument, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<ScenarioTree, Failure> {
    let doc = read_document(path)?;
    let violations = validate(&doc);
    if !violations.is_empty() {
        return Err(Failure {
            status: Status::Input,
            message: format!("{}: invalid tree", path.display()),
            violations,
        });
    }
    ScenarioTree::from_document(&doc).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn verify_failure(e: VerifyError) -> Failure {
    match e {
        VerifyError::Params(m) => Failure::input(m),
        VerifyError::Model(m) => Failure::input(m.to_string()),
        other => Failure::alarm(other.to_string()),
    }
}

fn describe(tree: &ScenarioTree) -> String {
    format!("{} nodes, d = {}, N = {}", tree.len(), tree.dim(), tree.horizon())
}

fn strategy_lines(out: &mut String, strategy: &Strategy) {
    for (node, position) in &strategy.0 {
        if !position.is_zero() {
            out.push_str(&format!("  node {node}: {position}\n"));
        }
    }
}

fn certificate_line(c: &NodeCertificate) -> String {
    match &c.certificate {
        RiCertificate::InRi { .. } => format!("  node {}: origin in relative interior\n", c.node),
        RiCertificate::NotInRi { direction } => format!("  node {}: one-sided direction {direction}\n", c.node),
    }
}

fn cmd_validate(path: &Path) -> Result<Output, Failure> {
    let doc = read_document(path)?;
    let violations = validate(&doc);
    if !violations.is_empty() {
        return Err(Failure {
            status: Status::Input,
            message: format!("{}: invalid tree", path.display()),
            violations,
        });
    }
    let tree = ScenarioTree::from_document(&doc).map_err(|e| Failure::input(e.to_string()))?;
    #[derive(Serialize)]
    struct Valid {
        valid: bool,
        nodes: usize,
        d: usize,
        #[serde(rename = "N")]
        horizon: usize,
    }
    Ok(Output::new(
        Status::Holds,
        format!("valid: {}\n", describe(&tree)),
        Valid {
            valid: true,
            nodes: tree.len(),
            d: tree.dim(),
            horizon: tree.horizon(),
        },
    ))
}

fn cmd_check(path: &Path, timing: bool) -> Result<Output, Failure> {
    let tree = load(path)?;
    let mut report = match equivalence_report(&tree) {
        Ok(r) => r,
        Err(VerifyError::Inconsistent(report)) => {
            let mut report = *report;
            if !timing {
                report.timing = None;
            }
            let human = format!(
                "ALARM: routes disagree (strategy: {}, geometry: {}, measure: {})\n",
                report.verdict_na_strategy, report.verdict_geometry, report.verdict_emm
            );
            return Ok(Output::new(Status::Alarm, human, report));
        }
        Err(e) => return Err(verify_failure(e)),
    };
    if !timing {
        report.timing = None;
    }
    let mut human = format!("tree: {}\n", describe(&tree));
    let yes_no = |b: bool| if b { "no arbitrage" } else { "arbitrage" };
    human.push_str(&format!("strategy route: {}\n", yes_no(report.verdict_na_strategy)));
    human.push_str(&format!("geometry route: {}\n", yes_no(report.verdict_geometry)));
    human.push_str(&format!("measure route:  {}\n", yes_no(report.verdict_emm)));
    if let Some(s) = &report.arbitrage {
        human.push_str("arbitrage strategy:\n");
        strategy_lines(&mut human, s);
    }
    let failing: Vec<&NodeCertificate> = report.certificates.iter().filter(|c| !c.certificate.is_in_ri()).collect();
    if !failing.is_empty() {
        human.push_str("hull certificates:\n");
        for c in failing {
            human.push_str(&certificate_line(c));
        }
    }
    if let Some(bound) = &report.density_bound {
        human.push_str(&format!("density bound: {bound}\n"));
    }
    if let Some(t) = &report.timing {
        human.push_str(&format!(
            "timing: strategy {} ms, geometry {} ms, measure {} ms\n",
            t.strategy_ms, t.geometry_ms, t.emm_ms
        ));
    }
    human.push_str(&format!("verdict: {} (routes consistent)\n", yes_no(report.no_arbitrage())));
    let status = if report.no_arbitrage() { Status::Holds } else { Status::Fails };
    Ok(Output::new(status, human, report))
}

fn cmd_find_arbitrage(path: &Path) -> Result<Output, Failure> {
    let tree = load(path)?;
    #[derive(Serialize)]
    struct Found {
        arbitrage: Option<Strategy>,
        #[serde(skip_serializing_if = "Option::is_none")]
        gains: Option<BTreeMap<noarb_core::NodeId, Rational>>,
    }
    match oracle_arbitrage_lp(&tree).map_err(verify_failure)? {
        Some(strategy) => {
            let g = gains(&tree, &strategy).map_err(|e| Failure::alarm(e.to_string()))?;
            let mut human = String::from("arbitrage strategy:\n");
            strategy_lines(&mut human, &strategy);
            human.push_str("terminal gains:\n");
            for (leaf, v) in &g {
                human.push_str(&format!("  leaf {leaf}: {v}\n"));
            }
            Ok(Output::new(
                Status::Holds,
                human,
                Found {
                    arbitrage: Some(strategy),
                    gains: Some(g),
                },
            ))
        }
        None => Ok(Output::new(
            Status::Fails,
            "no arbitrage strategy exists\n".into(),
            Found {
                arbitrage: None,
                gains: None,
            },
        )),
    }
}

fn cmd_build_emm(path: &Path) -> Result<Output, Failure> {
    let tree = load(path)?;
    match build_emm(&tree) {
        Ok(emm) => {
            let check = verify_martingale(&tree, &emm.leaf_density).map_err(|e| Failure::alarm(e.to_string()))?;
            if !check.holds {
                return Err(Failure::alarm("constructed density fails the martingale check".into()));
            }
            let mut human = String::from("density on leaves:\n");
            for (leaf, z) in &emm.leaf_density.0 {
                human.push_str(&format!("  leaf {leaf}: {z}\n"));
            }
            human.push_str("one-step scales:\n");
            for d in &emm.per_node {
                human.push_str(&format!("  node {}: f = {}\n", d.node, d.f));
            }
            human.push_str(&format!("density bound: {}\n", emm.bound));
            Ok(Output::new(Status::Holds, human, emm))
        }
        Err(EmmError::NotInRelativeInterior { node, certificate }) => {
            let cert = NodeCertificate { node, certificate };
            let human = format!("no martingale measure:\n{}", certificate_line(&cert));
            Ok(Output::new(Status::Fails, human, cert))
        }
        Err(EmmError::Model(e)) => Err(Failure::input(e.to_string())),
        Err(e) => Err(Failure::alarm(e.to_string())),
    }
}

fn cmd_beta(path: &Path) -> Result<Output, Failure> {
    let tree = load(path)?;
    #[derive(Serialize)]
    struct Beta {
        beta: Rational,
    }
    match beta_exact(&tree) {
        Ok(beta) => {
            if beta > Rational::one() {
                return Err(Failure::alarm(format!("beta = {beta} exceeds 1")));
            }
            Ok(Output::new(Status::Holds, format!("beta = {beta}\n"), Beta { beta }))
        }
        Err(VerifyError::Geometry { node, certificate }) => {
            let cert = NodeCertificate { node, certificate };
            let human = format!("beta undefined, arbitrage at:\n{}", certificate_line(&cert));
            Ok(Output::new(Status::Fails, human, cert))
        }
        Err(e) => Err(verify_failure(e)),
    }
}

fn cmd_gen(args: &GenArgs) -> Result<Output, Failure> {
    let params = GeneratorParams {
        d: args.assets,
        horizon: args.periods,
        max_branching: args.branching,
        value_range: args.value_range,
        grid: args.grid,
        mode: args.mode,
    };
    let tree = random_tree(&params, args.seed).map_err(verify_failure)?;
    let doc = tree.to_document();
    match &args.out {
        Some(out) => {
            let text = serde_json::to_string_pretty(&doc).expect("tree serializes") + "\n";
            fs::write(out, text).map_err(|e| Failure::input(format!("{}: {e}", out.display())))?;
            #[derive(Serialize)]
            struct Written<'a> {
                out: &'a Path,
                seed: u64,
                nodes: usize,
            }
            Ok(Output::new(
                Status::Holds,
                format!("wrote {} ({}, seed {})\n", out.display(), describe(&tree), args.seed),
                Written {
                    out,
                    seed: args.seed,
                    nodes: tree.len(),
                },
            ))
        }
        None => {
            let text = serde_json::to_string_pretty(&doc).expect("tree serializes") + "\n";
            Ok(Output::new(Status::Holds, text, doc))
        }
    }
}

fn run(cli: &Cli) -> Result<Output, Failure> {
    match &cli.command {
        Command::Validate { file } => cmd_validate(file),
        Command::Check { file, timing } => cmd_check(file, *timing),
        Command::FindArbitrage { file } => cmd_find_arbitrage(file),
        Command::BuildEmm { file } => cmd_build_emm(file),
        Command::Gen(args) => cmd_gen(args),
        Command::Beta { file } => cmd_beta(file),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut stdout = stdout.lock();
    let status = match run(&cli) {
        Ok(out) => {
            if !cli.quiet {
                let text = if cli.json {
                    out.json
                } else {
                    out.human
                };
                let _ = stdout.write_all(text.as_bytes());
            }
            out.status
        }
        Err(f) => {
            if cli.json {
                let body = ErrorJson {
                    error: &f.message,
                    violations: &f.violations,
                };
                let text = serde_json::to_string_pretty(&body).expect("error serializes");
                let _ = writeln!(stdout, "{text}");
            } else {
                let mut stderr = io::stderr().lock();
                let _ = writeln!(stderr, "error: {}", f.message);
                for v in &f.violations {
                    let _ = writeln!(stderr, "  {v}");
                }
            }
            f.status
        }
    };
    ExitCode::from(status as u8)
}
