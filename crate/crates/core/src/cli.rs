//! Command-line front end for the experiment drivers.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::experiments::{check, run, write_outputs, ConfigFile, ExperimentKind, ExperimentSpec, MAIN_HEADER};

#[derive(Parser, Debug)]
#[command(name = "semisup-robust", version, about = "Gaussian-model simulations of robust self-training")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Closed-form errors against Monte Carlo estimates.
    Verify(Common),
    /// Supervised versus self-trained robust error.
    Gap(Common),
    /// Self-training error as the unlabeled count grows.
    SweepUnlabeled(Common),
    /// Self-training with a fraction of irrelevant unlabeled data.
    SweepIrrelevant(Common),
    /// Self-training error as the label count grows.
    SweepLabels(Common),
    /// Robust self-training of a logistic model.
    RstDemo(Common),
    /// Randomized-smoothing certified accuracy.
    CertifyDemo(Common),
}

#[derive(Args, Debug, Default)]
struct Common {
    #[arg(long)]
    n0: Option<u64>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    eps: Option<f64>,
    /// Permit epsilon >= 1/2.
    #[arg(long)]
    allow_large_eps: bool,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Main CSV path; the summary goes beside it. Without it the main CSV
    /// goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    /// `key = value` file whose entries override the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Exit with status 2 when a built-in threshold fails.
    #[arg(long)]
    check: bool,
}

impl Command {
    fn split(self) -> (ExperimentKind, Common) {
        match self {
            Command::Verify(c) => (ExperimentKind::VerifyClosedForm, c),
            Command::Gap(c) => (ExperimentKind::Gap, c),
            Command::SweepUnlabeled(c) => (ExperimentKind::UnlabeledSweep, c),
            Command::SweepIrrelevant(c) => (ExperimentKind::IrrelevantSweep, c),
            Command::SweepLabels(c) => (ExperimentKind::LabelSweep, c),
            Command::RstDemo(c) => (ExperimentKind::RstDemo, c),
            Command::CertifyDemo(c) => (ExperimentKind::CertifyDemo, c),
        }
    }
}

fn build_spec(kind: ExperimentKind, c: &Common) -> Result<(ExperimentSpec, bool)> {
    let mut spec = ExperimentSpec::defaults(kind);
    if let Some(v) = c.n0 {
        spec.n0 = v;
    }
    if let Some(v) = c.d {
        spec.d = v;
    }
    if let Some(v) = c.trials {
        spec.trials = v;
    }
    if let Some(v) = c.seed {
        spec.seed = v;
    }
    if let Some(v) = c.workers {
        spec.workers = v;
    }
    if c.out.is_some() {
        spec.out = c.out.clone();
    }
    let mut eps_set = false;
    if let Some(v) = c.eps {
        spec.epsilon = v;
        eps_set = true;
    }
    let mut allow_set = c.allow_large_eps;
    if c.allow_large_eps {
        spec.allow_large_eps = true;
    }
    if let Some(path) = &c.config {
        let (e, a) = ConfigFile::load(path)?.apply(&mut spec)?;
        eps_set |= e;
        allow_set |= a;
    }
    // a default epsilon may carry its own override; an explicit one needs
    // an explicit override
    if eps_set && !allow_set {
        spec.allow_large_eps = false;
    }
    spec.validate()?;
    Ok((spec, c.check))
}

fn execute(kind: ExperimentKind, common: &Common) -> Result<i32> {
    let (spec, want_check) = build_spec(kind, common)?;
    if let Some(path) = &spec.out {
        // fail before spending time on the run
        std::fs::write(path, format!("{MAIN_HEADER}\n"))
            .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    }
    let output = run(&spec)?;
    match &spec.out {
        Some(path) => write_outputs(path, &output)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(crate::experiments::main_csv(&output.rows).as_bytes())?;
        }
    }
    if want_check {
        let failed: Vec<_> = check(&spec, &output).into_iter().filter(|o| !o.passed).collect();
        for f in &failed {
            eprintln!("check failed: {}: {}", f.id, f.detail);
        }
        if !failed.is_empty() {
            return Ok(2);
        }
    }
    Ok(0)
}

/// Parses `argv` (including the program name), runs the experiment and
/// returns the process exit code: 0 on success, 1 on a usage or validation
/// error, 2 when `--check` finds a failed threshold.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = e.print();
                    return 0;
                }
                ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand | ErrorKind::MissingSubcommand => {
                    eprintln!("a subcommand is required; run with --help for the list");
                    return 1;
                }
                _ => {}
            }
            let text = e.to_string();
            let line = text.lines().next().unwrap_or("invalid arguments");
            eprintln!("{}", line.trim_start_matches("error: "));
            return 1;
        }
    };
    let (kind, common) = cli.command.split();
    match execute(kind, &common) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}", e.to_string().replace('\n', " "));
            1
        }
    }
}
