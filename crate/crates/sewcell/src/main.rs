use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use sewcell::commands::{catalog_export, catalog_listing, cmd_nullity, cmd_sew, cmd_verify, CommandError, ConventionChoice};
use sewcell::report::{Report, Settings, Timing};

#[derive(Parser)]
#[command(name = "sewcell", version, about = "Verify almost contact metric cells and their sewn manifolds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Number of sample points.
    #[arg(long, default_value_t = 25)]
    points: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Also write the report as JSON to this path (`-` for stdout only).
    #[arg(long, value_name = "PATH")]
    json: Option<PathBuf>,
    /// Record wall-clock time in the report.
    #[arg(long)]
    timing: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Convention {
    Raw,
    Kenmotsu,
}

#[derive(Subcommand)]
enum Command {
    /// Structure axioms, curvature identities, classification, normality.
    Verify {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Per-sample nullity fit and leafwise constancy.
    Nullity {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Convention::Raw)]
        convention: Convention,
        #[command(flatten)]
        common: Common,
    },
    /// Sew copies of a cell, write the result and check the transfer theorems.
    Sew {
        file: PathBuf,
        #[arg(long, default_value_t = 2)]
        copies: usize,
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// List catalog entries, or export one as a definition file.
    Catalog {
        name: Option<String>,
        /// Parameter values in declaration order; defaults fill the rest.
        #[arg(long = "param", value_name = "VALUE", allow_negative_numbers = true)]
        params: Vec<f64>,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
}

fn settings(c: &Common) -> Settings {
    Settings {
        points: c.points,
        seed: c.seed,
        tol: c.tol,
        ..Settings::default()
    }
}

fn emit(result: Result<Report, CommandError>, common: &Common, started: Instant) -> ExitCode {
    let mut report = match result {
        Ok(r) => r,
        Err(e) => {
            eprintln!("sewcell: {}", e);
            return ExitCode::from(e.exit_code());
        }
    };
    if common.timing {
        report.timing = Some(Timing {
            elapsed_ms: started.elapsed().as_secs_f64() * 1e3,
        });
    }
    match &common.json {
        Some(p) if p.as_os_str() == "-" => print!("{}", report.to_json()),
        Some(p) => {
            print!("{}", report.to_text());
            if let Err(e) = fs::write(p, report.to_json()) {
                eprintln!("sewcell: cannot write {}: {}", p.display(), e);
                return ExitCode::from(2);
            }
        }
        None => print!("{}", report.to_text()),
    }
    if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    match cli.command {
        Command::Verify { files, common } => emit(cmd_verify(&files, settings(&common)), &common, started),
        Command::Nullity {
            file,
            convention,
            common,
        } => {
            let choice = match convention {
                Convention::Raw => ConventionChoice::Raw,
                Convention::Kenmotsu => ConventionChoice::Kenmotsu,
            };
            emit(cmd_nullity(&file, settings(&common), choice), &common, started)
        }
        Command::Sew {
            file,
            copies,
            out,
            common,
        } => emit(cmd_sew(&file, copies, &out, settings(&common)), &common, started),
        Command::Catalog { name: None, .. } => {
            print!("{}", catalog_listing());
            ExitCode::SUCCESS
        }
        Command::Catalog {
            name: Some(name),
            params,
            out,
        } => match catalog_export(&name, &params) {
            Ok(file) => match out {
                Some(path) => match file.save(&path) {
                    Ok(_) => ExitCode::SUCCESS,
                    Err(e) => {
                        eprintln!("sewcell: {}", e);
                        ExitCode::from(2)
                    }
                },
                None => {
                    print!("{}", file.to_json());
                    ExitCode::SUCCESS
                }
            },
            Err(e) => {
                eprintln!("sewcell: {}", e);
                ExitCode::from(e.exit_code())
            }
        },
    }
}
