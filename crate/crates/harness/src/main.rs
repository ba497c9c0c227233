use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{error::ErrorKind, Parser, Subcommand};
use npb_core::{Benchmark, ProblemClass};
use npb_harness::compare::{compare_runs, KeyColumn};
use npb_harness::emit::{emit, read_csv};
use npb_harness::{execute, exit, run_once, HarnessError, Isolation, OutputFormat, RunSpec};

#[derive(Parser)]
#[command(
    name = "npb",
    version,
    about = "Run and compare NAS Parallel Benchmarks"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a benchmark repeatedly over a sweep of worker counts.
    Run {
        #[arg(value_parser = parse_benchmark)]
        benchmark: Benchmark,
        #[arg(long, value_parser = parse_class)]
        class: ProblemClass,
        /// Comma-separated worker counts [default: available cores].
        #[arg(long, env = "NPB_WORKERS", value_delimiter = ',')]
        workers: Vec<usize>,
        #[arg(long, default_value_t = 10)]
        reps: usize,
        /// Keep bounds checks in hot loops; `--safe-mode=false` elides them.
        #[arg(long, num_args = 0..=1, default_value_t = true, default_missing_value = "true", action = clap::ArgAction::Set)]
        safe_mode: bool,
        /// Worker stack size in bytes.
        #[arg(long)]
        stack_reserve: Option<usize>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
        format: OutputFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare two CSV result files configuration by configuration.
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value = "benchmark,class,workers")]
        key: String,
        #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
        format: OutputFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the supported benchmark and class matrix.
    List,
    /// One in-process run printed as JSON (used for process isolation).
    #[command(hide = true)]
    RunOnce {
        #[arg(value_parser = parse_benchmark)]
        benchmark: Benchmark,
        #[arg(long, value_parser = parse_class)]
        class: ProblemClass,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long, num_args = 0..=1, default_value_t = true, default_missing_value = "true", action = clap::ArgAction::Set)]
        safe_mode: bool,
        #[arg(long)]
        stack_reserve: Option<usize>,
    },
}

fn parse_benchmark(s: &str) -> Result<Benchmark, String> {
    s.parse().map_err(|e: npb_core::NpbError| e.to_string())
}

fn parse_class(s: &str) -> Result<ProblemClass, String> {
    s.parse().map_err(|e: npb_core::NpbError| e.to_string())
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>, HarnessError> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn default_workers() -> Vec<usize> {
    vec![std::thread::available_parallelism().map_or(1, |n| n.get())]
}

fn real_main(cli: Cli) -> Result<i32, HarnessError> {
    match cli.command {
        Cmd::Run {
            benchmark,
            class,
            workers,
            reps,
            safe_mode,
            stack_reserve,
            format,
            out,
        } => {
            let spec = RunSpec {
                benchmark,
                class,
                workers: if workers.is_empty() {
                    default_workers()
                } else {
                    workers
                },
                reps,
                safe_mode,
                stack_reserve,
                format,
                out,
            };
            let exe = std::env::current_exe()?;
            let run = execute(&spec, &Isolation::Subprocess(exe))?;
            let mut w = sink(&spec.out)?;
            emit(&mut w, spec.format, &run.records, &[])?;
            w.flush()?;
            for f in &run.failures {
                eprintln!(
                    "verification failed: {} workers, repetition {}: {}",
                    f.workers, f.rep, f.reason
                );
            }
            Ok(if run.failures.is_empty() {
                exit::SUCCESS
            } else {
                exit::VERIFICATION
            })
        }
        Cmd::Compare {
            a,
            b,
            key,
            format,
            out,
        } => {
            let keys = KeyColumn::parse_list(&key)?;
            let ra = read_csv(File::open(&a)?)?;
            let rb = read_csv(File::open(&b)?)?;
            let reports = compare_runs(
                &a.display().to_string(),
                &ra,
                &b.display().to_string(),
                &rb,
                &keys,
            )?;
            let mut w = sink(&out)?;
            if format == OutputFormat::Csv {
                return Err(HarnessError::Usage(
                    "compare supports --format text or json".into(),
                ));
            }
            emit(&mut w, format, &[], &reports)?;
            w.flush()?;
            Ok(exit::SUCCESS)
        }
        Cmd::List => {
            let mut w = io::stdout().lock();
            write!(w, "{:<6}", "bench")?;
            for c in ProblemClass::ALL {
                write!(w, " {c}")?;
            }
            writeln!(w)?;
            for b in Benchmark::ALL {
                write!(w, "{:<6}", b.name())?;
                for c in ProblemClass::ALL {
                    write!(w, " {}", if b.supports(c) { 'y' } else { '-' })?;
                }
                writeln!(w)?;
            }
            Ok(exit::SUCCESS)
        }
        Cmd::RunOnce {
            benchmark,
            class,
            workers,
            safe_mode,
            stack_reserve,
        } => {
            if workers == 0 {
                return Err(HarnessError::Usage(
                    "worker counts must be at least 1".into(),
                ));
            }
            let r = run_once(benchmark, class, workers, safe_mode, stack_reserve)?;
            serde_json::to_writer(io::stdout().lock(), &r)?;
            Ok(exit::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => exit::SUCCESS,
                _ => exit::USAGE,
            };
            return ExitCode::from(code as u8);
        }
    };
    match real_main(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
