use clap::{Parser, Subcommand};
use permax_cli::{analyze_file, bench, bench_table, parse_rd, report, FileOutcome, Options};
use rayon::prelude::*;
use std::path::PathBuf;
use std::process::ExitCode;

/// Infer permission pre- and postconditions for array programs.
#[derive(Parser)]
#[command(name = "permax", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Print specifications with `rd` replaced by this rational.
    #[arg(long, value_parser = parse_rd)]
    rd: Option<permax::expr::PermValue>,
    /// Integer window of the bounded soundness check.
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
    inv_range: Option<Vec<i64>>,
    /// Node budget above which a boundary filter is dropped.
    #[arg(long)]
    filter_budget: Option<usize>,
    /// Use only annotated loop invariants.
    #[arg(long)]
    no_intervals: bool,
}

impl Common {
    fn options(&self) -> Options {
        let d = Options::default();
        Options {
            rd: self.rd.clone(),
            window: self.inv_range.as_ref().map_or(d.window, |v| (v[0], v[1])),
            filter_budget: self.filter_budget.unwrap_or(d.filter_budget),
            intervals: !self.no_intervals,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print each program annotated with `requires` and `ensures`.
    ///
    /// Exit status: 0 on success, 1 on errors, 2 if some precondition is
    /// unsatisfiable because a loop failed its soundness check.
    Analyze {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[command(flatten)]
        common: Common,
        /// Write the JSON report here.
        #[arg(long, value_name = "PATH")]
        emit_json: Option<PathBuf>,
        /// Write one SMT-LIB script per loop soundness condition here.
        #[arg(long, value_name = "DIR")]
        emit_smt: Option<PathBuf>,
        /// Worker threads; all cores by default.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Time the analysis of every `.arr` file in a directory.
    Bench {
        dir: PathBuf,
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 50)]
        warmup: usize,
        #[arg(long, default_value_t = 5)]
        runs: usize,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match cli.command {
        Command::Analyze { files, common, emit_json, emit_smt, jobs } => {
            analyze(&files, &common.options(), emit_json, emit_smt, jobs)
        }
        Command::Bench { dir, common, warmup, runs } => match bench(&dir, warmup, runs, &common.options()) {
            Ok(rows) => {
                print!("{}", bench_table(&rows));
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        },
    }
}

fn analyze(
    files: &[PathBuf],
    opts: &Options,
    emit_json: Option<PathBuf>,
    emit_smt: Option<PathBuf>,
    jobs: Option<usize>,
) -> ExitCode {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.unwrap_or(0)).build().expect("thread pool");
    let outcomes: Vec<FileOutcome> = pool.install(|| files.par_iter().map(|f| analyze_file(f, opts)).collect());

    let mut failed = false;
    for (i, o) in outcomes.iter().enumerate() {
        if let Some(text) = &o.annotated {
            if files.len() > 1 {
                if i > 0 {
                    println!();
                }
                println!("// {}", o.report.file);
            }
            print!("{text}");
        }
        for e in &o.report.errors {
            eprintln!("error: {e}");
        }
        failed |= o.failed();
    }
    if let Some(path) = emit_json {
        let reports: Vec<_> = outcomes.iter().map(|o| o.report.clone()).collect();
        if let Err(e) = std::fs::write(&path, report::to_json(&reports)) {
            eprintln!("error: {}: {e}", path.display());
            failed = true;
        }
    }
    if let Some(dir) = emit_smt {
        let written = std::fs::create_dir_all(&dir).and_then(|()| {
            outcomes.iter().flat_map(|o| &o.smt).try_for_each(|(name, s)| std::fs::write(dir.join(name), s))
        });
        if let Err(e) = written {
            eprintln!("error: {}: {e}", dir.display());
            failed = true;
        }
    }
    if failed {
        ExitCode::from(1)
    } else if outcomes.iter().any(FileOutcome::unsatisfiable) {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    }
}
