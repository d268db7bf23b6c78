//! `ergolab`: runs a scenario against a finite quantum group (or a family of
//! corepresentation blocks) and writes a JSON header plus a CSV table.
//!
//! Exit status: 0 when every check passes, 1 when a residual exceeds the
//! tolerance, 2 on bad input (the message names the offending flag).

mod report;
mod scenarios;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use scenarios::{CliError, ScenarioConfig};

const SCENARIOS: [&str; 9] = [
    "axioms",
    "haar",
    "cesaro",
    "iterates",
    "idempotents",
    "lp",
    "semigroup",
    "blocks",
    "list",
];

#[derive(Debug, Parser)]
#[command(name = "ergolab", version, about = "Ergodic-theory experiments on finite quantum groups")]
struct Args {
    /// One of: axioms, haar, cesaro, iterates, idempotents, lp, semigroup, blocks, list.
    #[arg(value_name = "SCENARIO", conflicts_with = "scenario")]
    command: Option<String>,
    /// Alternative to the positional scenario name.
    #[arg(long)]
    scenario: Option<String>,
    /// Builtin name (see `list`) or `file:<path>` to a JSON structure.
    #[arg(long, default_value = "kac-paljutkin")]
    group: String,
    /// haar | counit | uniform | ev:<i> | random:<seed> | vector:[re,im;...]
    #[arg(long, default_value = "random:0")]
    state: String,
    /// Longest average or iterate; defaults to 10000 (cesaro, lp) or 50 (iterates).
    #[arg(long)]
    n_max: Option<usize>,
    /// Comma-separated times; defaults to 1,10,100,1000 (semigroup) or 0.5,1,π (blocks).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    t_grid: Option<Vec<f64>>,
    /// Comma-separated exponents, `inf` allowed; defaults to 1,2,3,4,inf (lp) or 2,inf (semigroup).
    #[arg(long, value_delimiter = ',')]
    p: Option<Vec<String>>,
    #[arg(long, default_value_t = 0.5)]
    q: f64,
    #[arg(long, default_value_t = 2.0)]
    l_max: f64,
    /// JSON file of blocks for the `blocks` scenario, instead of --q/--l-max.
    #[arg(long)]
    blocks: Option<PathBuf>,
    #[arg(long, env = "ERGOLAB_TOL", default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random states per support pattern in the `idempotents` scan.
    #[arg(long, default_value_t = 3)]
    draws: usize,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn config(args: Args) -> Result<(ScenarioConfig, Option<PathBuf>), CliError> {
    let scenario = args
        .command
        .or(args.scenario)
        .ok_or_else(|| CliError::field("scenario", "missing scenario name"))?;
    if !SCENARIOS.contains(&scenario.as_str()) {
        return Err(CliError::field(
            "scenario",
            format!("unknown scenario `{scenario}` (expected one of {})", SCENARIOS.join(", ")),
        ));
    }
    if !(args.tol > 0.0) {
        return Err(CliError::field("tol", format!("must be positive, got {}", args.tol)));
    }
    let n_max = args
        .n_max
        .unwrap_or(if scenario == "iterates" { 50 } else { 10_000 });
    if n_max == 0 {
        return Err(CliError::field("n-max", "must be at least 1"));
    }
    let t_grid = args.t_grid.unwrap_or_else(|| match scenario.as_str() {
        "blocks" => vec![0.5, 1.0, std::f64::consts::PI],
        _ => vec![1.0, 10.0, 100.0, 1000.0],
    });
    let p = args.p.unwrap_or_else(|| {
        let d: &[&str] = if scenario == "lp" { &["1", "2", "3", "4", "inf"] } else { &["2", "inf"] };
        d.iter().map(|s| s.to_string()).collect()
    });
    scenarios::parse_exponents(&p)?;
    let cfg = ScenarioConfig {
        scenario,
        group: args.group,
        state: args.state,
        n_max,
        t_grid,
        p,
        q: args.q,
        l_max: args.l_max,
        tol: args.tol,
        seed: args.seed,
        draws: args.draws,
        blocks: args.blocks.map(|p| p.display().to_string()),
    };
    Ok((cfg, args.out))
}

fn execute(args: Args) -> Result<bool, CliError> {
    let (cfg, out) = config(args)?;
    let rep = scenarios::run(&cfg)?;
    let echo = serde_json::to_value(&cfg).expect("config serializes");
    let text = rep.render(&echo, cfg.tol);
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    if !rep.passed() {
        eprintln!("ergolab {}: {} check(s) above tolerance: {}", cfg.scenario, rep.failures.len(), rep.failures.join(", "));
    }
    Ok(rep.passed())
}

fn main() -> ExitCode {
    match execute(Args::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("ergolab: error: {e}");
            ExitCode::from(2)
        }
    }
}
