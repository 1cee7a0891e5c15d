//! Command-line front end.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::bootstrap::{bootstrap_pvalues, klic_mc, size_power_study, StudyConfig, StudyConfigJson};
use crate::data::SampleMatrix;
use crate::error::{Error, Result};
use crate::gof::TestId;
use crate::rvine::{fit_mle, fit_sequential, fit_sequential_with, select_sequential, simulate, FitMode, RVineSpec};
use crate::rvine::models::SELECTION_FAMILIES;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FORMAT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "vinegof", version, about = "Vine copula goodness-of-fit toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Method {
    /// Tree-by-tree Kendall's tau inversion
    Seq,
    /// Joint maximum likelihood from the sequential start
    Mle,
    /// Per-edge family selection by AIC, then joint maximum likelihood
    Select,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw a sample from a model
    Simulate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate the parameters of a model on data
    Fit {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "mle")]
        method: Method,
    },
    /// Bootstrap goodness-of-fit test
    Gof {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Test name or `all`
        #[arg(long)]
        test: String,
        #[arg(long = "B")]
        b: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Size and power study
    PowerStudy {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Monte Carlo Kullback-Leibler distance
    Klic {
        #[arg(long = "true")]
        truth: PathBuf,
        #[arg(long)]
        alt: PathBuf,
        #[arg(long = "N")]
        draws: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a model file
    Validate {
        #[arg(long)]
        model: PathBuf,
    },
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Format(_) | Error::Json(_) | Error::Io(_) | Error::InvalidModel(_) => EXIT_FORMAT,
        Error::Domain(_)
        | Error::Numerical(_)
        | Error::Convergence(_)
        | Error::SingularMatrix(_)
        | Error::Study(_) => EXIT_NUMERICAL,
    }
}

fn read_text(path: &PathBuf) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

fn read_model(path: &PathBuf) -> Result<RVineSpec> {
    RVineSpec::from_json_str(&read_text(path)?)
}

fn read_data(path: &PathBuf) -> Result<SampleMatrix> {
    SampleMatrix::read_csv(path).map_err(|e| match e {
        Error::Io(io) => Error::Format(format!("{}: {io}", path.display())),
        other => other,
    })
}

fn write_json<T: serde::Serialize>(path: &PathBuf, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

fn execute(cmd: Command, out: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Simulate { model, n, seed, out: path } => {
            let spec = read_model(&model)?;
            if n == 0 {
                return Err(Error::Format("--n must be at least 1".into()));
            }
            let x = simulate(&spec, n, seed)?;
            x.write_csv(&path)?;
            writeln!(out, "rows: {n}\ncolumns: {}\nseed: {seed}\nout: {}", spec.dim(), path.display())?;
        }
        Command::Fit { model, data, out: path, method } => {
            let spec = read_model(&model)?;
            let x = read_data(&data)?;
            let (fitted, iterations) = match method {
                Method::Seq => (fit_sequential(&spec, &x)?, 0),
                Method::Mle => {
                    let f = fit_mle(&fit_sequential_with(&spec, &x, FitMode::Lenient)?, &x)?;
                    (f.spec, f.iterations)
                }
                Method::Select => {
                    let start = select_sequential(spec.matrix(), &x, &SELECTION_FAMILIES)?;
                    let f = fit_mle(&start, &x)?;
                    (f.spec, f.iterations)
                }
            };
            let (ll, _) = crate::rvine::loglik(&fitted, &x)?;
            fitted.write_json(&path)?;
            writeln!(out, "loglik: {ll}\nparameters: {}\niterations: {iterations}\nout: {}", fitted.nparams(), path.display())?;
        }
        Command::Gof { model, data, test, b, seed, out: path, workers } => {
            let tests: Vec<TestId> = if test == "all" { TestId::ALL.to_vec() } else { vec![test.parse()?] };
            let spec = read_model(&model)?;
            let x = read_data(&data)?;
            if spec.nparams() == 0 {
                return Err(Error::domain("model has no free parameters to test"));
            }
            let reports = bootstrap_pvalues(&tests, &spec, &x, b, seed, workers)?;
            for r in &reports {
                writeln!(out, "test: {}\nstatistic: {}\np_value: {}", r.test, r.statistic, r.p_value)?;
            }
            if reports.len() == 1 {
                write_json(&path, &reports[0])?;
            } else {
                write_json(&path, &reports)?;
            }
        }
        Command::PowerStudy { config, out: path, workers } => {
            let j: StudyConfigJson =
                serde_json::from_str(&read_text(&config)?).map_err(|e| Error::Format(format!("study config: {e}")))?;
            let cfg = StudyConfig::from_json(&j)?;
            let result = size_power_study(&cfg, workers)?;
            for (test, models) in &result.results {
                for (name, o) in models {
                    writeln!(out, "{test} {name}: {}", o.estimate)?;
                }
            }
            write_json(&path, &result)?;
        }
        Command::Klic { truth, alt, draws, seed, out: path } => {
            let k = klic_mc(&read_model(&truth)?, &read_model(&alt)?, draws, seed)?;
            writeln!(out, "klic: {}\nstd_error: {}\ndraws: {}", k.estimate, k.std_error, k.draws)?;
            if let Some(p) = path {
                write_json(&p, &k)?;
            }
        }
        Command::Validate { model } => {
            let j = serde_json::from_str(&read_text(&model)?).map_err(|e| Error::Format(format!("model JSON: {e}")))?;
            let violations = RVineSpec::diagnose_json(&j);
            if violations.is_empty() {
                writeln!(out, "valid: true")?;
            } else {
                writeln!(out, "valid: false")?;
                for v in &violations {
                    writeln!(out, "violation: {v}")?;
                }
                return Ok(EXIT_FORMAT);
            }
        }
    }
    Ok(EXIT_OK)
}

/// Parse `args` (program name first), run the command and return the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if code == EXIT_OK { write!(out, "{}", e.render()) } else { write!(err, "{}", e.render()) };
            return code;
        }
    };
    let unknown_test = matches!(&cli.command, Command::Gof { test, .. } if test != "all" && test.parse::<TestId>().is_err());
    match execute(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if unknown_test {
                EXIT_USAGE
            } else {
                exit_code(&e)
            }
        }
    }
}
