use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use credal_vn::algebra::EngineKind;
use credal_vn::cli::{
    cmd_compare, cmd_demo, cmd_infer, cmd_validate, resolve_seed, CliError, CliResult, CompareOutput, InferOptions,
    TruthSource, EXIT_PARSE,
};
use credal_vn::optim::SolverKind;

/// Inference in valuation networks over precise and interval-valued probabilities.
#[derive(Parser)]
#[command(name = "cvn", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the marginal of the query variables.
    Infer {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "credal")]
        engine: Engine,
        #[command(flatten)]
        run: RunFlags,
    },
    /// Check a network file without running inference.
    Validate {
        file: PathBuf,
        /// Also print the row layout of every table.
        #[arg(long)]
        explain: bool,
        #[arg(long)]
        json: bool,
    },
    /// Put the credal marginal next to a reference and other interval sets.
    Compare {
        file: PathBuf,
        /// File of reference probabilities.
        #[arg(long, group = "truth_source")]
        truth: Option<PathBuf>,
        /// Reference probabilities, comma separated.
        #[arg(long, group = "truth_source", value_delimiter = ',')]
        truth_inline: Option<Vec<f64>>,
        /// Use the precise engine's answer as the reference.
        #[arg(long, group = "truth_source")]
        truth_precise: bool,
        /// Extra interval column, as NAME=FILE.
        #[arg(long)]
        extra: Vec<String>,
        #[command(flatten)]
        run: RunFlags,
    },
    /// Run a bundled example.
    Demo {
        name: String,
        #[command(flatten)]
        run: RunFlags,
    },
}

#[derive(Args)]
struct RunFlags {
    /// Elimination order, comma separated.
    #[arg(long, value_delimiter = ',')]
    order: Option<Vec<String>>,
    #[arg(long, default_value = "auto")]
    solver: SolverKind,
    /// Multi-start seed; defaults to CVN_SEED, then 0.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    json: bool,
    /// Report wall-clock time.
    #[arg(long)]
    timing: bool,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Engine {
    Precise,
    Credal,
}

impl RunFlags {
    fn options(&self, engine: EngineKind) -> CliResult<InferOptions> {
        Ok(InferOptions {
            engine,
            order: self.order.clone(),
            solver: self.solver,
            seed: resolve_seed(self.seed)?,
            timing: self.timing,
        })
    }
}

fn read(path: &PathBuf) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))
}

fn print_compare(out: &CompareOutput, json: bool) {
    if json {
        println!("{}", out.to_json());
    } else {
        print!("{}", out.table.render());
        if let Some(t) = out.credal.wall_clock_seconds {
            println!("credal time: {t:.3} s");
        }
    }
}

fn run(cli: Cli) -> CliResult<i32> {
    match cli.command {
        Command::Infer { file, engine, run } => {
            let engine = match engine {
                Engine::Precise => EngineKind::Precise,
                Engine::Credal => EngineKind::Credal,
            };
            let doc = cmd_infer(&read(&file)?, &run.options(engine)?)?;
            if run.json {
                println!("{}", doc.to_json());
            } else {
                print!("{}", doc.render());
            }
            Ok(0)
        }
        Command::Validate { file, explain, json } => {
            let report = cmd_validate(&read(&file)?, explain);
            if json {
                println!("{}", serde_json::to_string_pretty(&report).expect("reports serialize"));
            } else {
                print!("{}", report.render());
            }
            Ok(report.exit_code())
        }
        Command::Compare {
            file,
            truth,
            truth_inline,
            truth_precise,
            extra,
            run,
        } => {
            let truth = match (truth, truth_inline, truth_precise) {
                (Some(p), _, _) => TruthSource::File(read(&p)?),
                (_, Some(v), _) => TruthSource::Inline(v),
                (_, _, true) => TruthSource::Precise,
                _ => TruthSource::None,
            };
            let extras = extra
                .iter()
                .map(|e| {
                    let (name, path) = e
                        .split_once('=')
                        .ok_or_else(|| CliError::usage(format!("--extra expects NAME=FILE, got `{e}`")))?;
                    Ok((name.to_string(), read(&PathBuf::from(path))?))
                })
                .collect::<CliResult<Vec<_>>>()?;
            let out = cmd_compare(&read(&file)?, &truth, &extras, &run.options(EngineKind::Credal)?)?;
            print_compare(&out, run.json);
            Ok(0)
        }
        Command::Demo { name, run } => {
            let out = cmd_demo(&name, &run.options(EngineKind::Credal)?)?;
            print_compare(&out, run.json);
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.code == 0 { EXIT_PARSE } else { e.code } as u8)
        }
    }
}
