use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use mrv_core::chain::{load_manifest, verify_chain};
use mrv_core::ffl::render;
use mrv_core::il::{interpret_il, load, parse_args};
use mrv_core::rewrite::list_rules;
use mrv_core::translate::translate;
use mrv_core::Outcome;

#[derive(Parser)]
#[command(name = "mrv", version, about = "Check chains of IL programs for equivalence")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// Verify every step of a chain manifest and its endpoints.
    Check {
        manifest: PathBuf,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        budget: Option<u64>,
        #[arg(long, value_enum, default_value = "text")]
        report: ReportFormat,
        #[arg(long)]
        verbose: bool,
    },
    /// List the rewrite rules.
    Rules,
    /// Run one program on a literal argument tuple, e.g. --args "[[1],[0]], 1/2, 3".
    Run {
        file: PathBuf,
        #[arg(long, default_value = "")]
        args: String,
        #[arg(long, default_value_t = 1_000_000)]
        budget: u64,
    },
    /// Print the FFL translation of a program.
    Translate { file: PathBuf },
}

fn read_program(file: &PathBuf) -> Result<mrv_core::il::TypedProgram, String> {
    let src = std::fs::read_to_string(file).map_err(|e| format!("{}: {e}", file.display()))?;
    load(&src).map_err(|e| e.render(&file.display().to_string()))
}

fn run(file: &PathBuf, args: &str, budget: u64) -> Result<ExitCode, String> {
    let p = read_program(file)?;
    let vals = parse_args(args, &p, budget).map_err(|e| format!("--args: {e}"))?;
    let out = interpret_il(&p, &vals, budget);
    println!("{out}");
    Ok(match out {
        Outcome::Val(_) => ExitCode::SUCCESS,
        _ => ExitCode::from(1),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let r = match cli.cmd {
        Cmd::Check {
            manifest,
            trials,
            seed,
            budget,
            report,
            verbose,
        } => match load_manifest(&manifest) {
            Err(e) => Err(format!("{}: {e}", manifest.display())),
            Ok(mut m) => {
                if let Some(t) = trials {
                    m.config.trials = t;
                }
                if let Some(s) = seed {
                    m.config.seed = s;
                }
                if let Some(b) = budget {
                    m.config.budget = b;
                }
                let r = verify_chain(&m);
                match report {
                    ReportFormat::Text => print!("{}", r.to_text(verbose)),
                    ReportFormat::Json => println!("{}", r.to_json()),
                }
                Ok(if r.pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
            }
        },
        Cmd::Rules => {
            for r in list_rules() {
                let kind = if r.definitional { "definitional" } else { "structural" };
                println!("{} ({kind})\n    {}", r.name, r.doc);
                for s in &r.side_conditions {
                    println!("    side condition: {s}");
                }
                for o in &r.obligations {
                    println!("    obligation (tested): {o}");
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Run { file, args, budget } => run(&file, &args, budget),
        Cmd::Translate { file } => read_program(&file).map(|p| {
            println!("{}", render(&translate(&p)));
            ExitCode::SUCCESS
        }),
    };
    match r {
        Ok(c) => c,
        Err(e) => {
            eprintln!("mrv: {e}");
            ExitCode::from(2)
        }
    }
}
