use std::process::ExitCode;

use atomwork::chain::ChainStructure;
use atomwork::logic::{self, Formula};
use atomwork::suite::{self, ChainConfig, Report, StructureSpec, TermConfig};
use atomwork::{ComplexAlgebra, Term};
use clap::{Parser, Subcommand, ValueEnum};
use log::info;

/// Verification suites for relation-algebra atom structures.
///
/// Structures are named as `z:N` (the plant structure with plants
/// `0..=N`), `file:PATH` (a JSON structure) or a chain list such as
/// `omega,zed`. Exit status is 0 when every check passes, 1 when a check
/// fails and 2 on bad usage. Set ATOMWORK_LOG (e.g. `info`) for logging.
#[derive(Parser, Debug)]
#[command(name = "atomwork", version)]
struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Well-formedness, relation-algebra axioms and the diversity-product implication.
    VerifyZ {
        /// Plant bound of the Z structure.
        #[arg(long, conflicts_with = "structure")]
        n: Option<u32>,
        #[arg(long)]
        structure: Option<StructureSpec>,
    },
    /// Splitting laws over seeded random terms.
    SplitsSuite {
        #[arg(long, default_value = "z:2")]
        structure: StructureSpec,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 5)]
        max_depth: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// The splitting sentence with constructive witnesses.
    CheckPhi {
        #[arg(long, default_value = "z:3")]
        structure: StructureSpec,
    },
    /// The explicit representation on a finite window.
    VerifyRep {
        /// Plants in the window.
        #[arg(long, default_value_t = 3)]
        n: u32,
        /// Point indices in the window.
        #[arg(long, default_value_t = 6)]
        m: u64,
    },
    /// Exact finite/cofinite chain algebra checks.
    HhSuite {
        #[arg(long, default_value = "omega")]
        chains: ChainStructure,
        #[arg(long, default_value_t = 500)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Ehrenfeucht–Fraïssé game between two finite structures.
    Ef {
        #[arg(long)]
        left: StructureSpec,
        #[arg(long)]
        right: StructureSpec,
        #[arg(long, default_value_t = 3)]
        rounds: usize,
    },
    /// Evaluate a term such as `(comp r(1,1) (conv r(1,1)))`.
    EvalTerm {
        #[arg(long, default_value = "z:2")]
        structure: StructureSpec,
        term: String,
    },
    /// Evaluate a sentence such as `(forall (x identity) (P x x x))`.
    EvalFormula {
        #[arg(long, default_value = "z:2")]
        structure: StructureSpec,
        formula: String,
    },
    /// Print a structure as JSON.
    Dump {
        #[arg(long, default_value = "z:1")]
        structure: StructureSpec,
    },
}

enum Outcome {
    Report(Report),
    Value { ok: bool, text: String, json: serde_json::Value },
}

fn run(cli: &Cli) -> atomwork::Result<Outcome> {
    info!("running {:?}", cli.command);
    let report = match &cli.command {
        Command::VerifyZ { n, structure } => {
            let spec = match (n, structure) {
                (_, Some(s)) => s.clone(),
                (n, None) => StructureSpec::Z(n.unwrap_or(2)),
            };
            suite::verify_structure(&spec)?
        }
        Command::SplitsSuite { structure, trials, max_depth, seed } => suite::splits_suite(
            structure,
            TermConfig { trials: *trials, max_depth: *max_depth, seed: *seed },
        )?,
        Command::CheckPhi { structure } => suite::check_phi_suite(structure)?,
        Command::VerifyRep { n, m } => suite::verify_rep(*n, *m)?,
        Command::HhSuite { chains, trials, seed } => {
            suite::hh_suite(chains, ChainConfig { trials: *trials, seed: *seed })?
        }
        Command::Ef { left, right, rounds } => suite::ef_suite(left, right, *rounds)?,
        Command::EvalTerm { structure, term } => {
            let s = structure.load()?;
            let t: Term = term.parse()?;
            let value = ComplexAlgebra::new(&s).eval(&t)?;
            let labels: Vec<String> = value.labels(&s).iter().map(ToString::to_string).collect();
            return Ok(Outcome::Value {
                ok: true,
                text: format!("{{{}}}", labels.join(", ")),
                json: serde_json::json!({"term": t.to_string(), "value": labels}),
            });
        }
        Command::EvalFormula { structure, formula } => {
            let s = structure.load()?;
            let f: Formula = formula.parse()?;
            let value = logic::holds(&s, &f)?;
            return Ok(Outcome::Value {
                ok: true,
                text: value.to_string(),
                json: serde_json::json!({"formula": f.to_string(), "value": value}),
            });
        }
        Command::Dump { structure } => {
            let parts = structure.load()?.to_parts();
            let json = serde_json::to_value(&parts).expect("parts serialize");
            return Ok(Outcome::Value {
                ok: true,
                text: serde_json::to_string_pretty(&json).unwrap(),
                json,
            });
        }
    };
    Ok(Outcome::Report(report))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("ATOMWORK_LOG")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Outcome::Report(report)) => {
            match cli.format {
                Format::Json => println!("{}", report.to_json()),
                Format::Text => print!("{}", report.to_text()),
            }
            info!("finished in {} ms", report.elapsed_ms);
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Ok(Outcome::Value { ok, text, json }) => {
            match cli.format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&json).unwrap()),
                Format::Text => println!("{text}"),
            }
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
