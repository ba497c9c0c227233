//! Running a benchmark configuration sweep, one repetition at a time.

use std::path::{Path, PathBuf};
use std::process::Command;

use npb_core::{Benchmark, BenchmarkResult, ExecMode, Pool, PoolConfig, ProblemClass};
use serde::{Deserialize, Serialize};

use crate::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
    #[default]
    Text,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub benchmark: Benchmark,
    pub class: ProblemClass,
    pub workers: Vec<usize>,
    pub reps: usize,
    pub safe_mode: bool,
    /// Worker stack size in bytes; `None` takes the benchmark's own request.
    pub stack_reserve: Option<usize>,
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
}

impl RunSpec {
    pub fn new(benchmark: Benchmark, class: ProblemClass) -> Self {
        RunSpec {
            benchmark,
            class,
            workers: vec![1],
            reps: 10,
            safe_mode: true,
            stack_reserve: None,
            format: OutputFormat::Text,
            out: None,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.reps == 0 {
            return Err(HarnessError::Usage("repetitions must be at least 1".into()));
        }
        if self.workers.is_empty() || self.workers.contains(&0) {
            return Err(HarnessError::Usage(
                "worker counts must be at least 1".into(),
            ));
        }
        if !self.benchmark.supports(self.class) {
            return Err(HarnessError::Usage(format!(
                "class {} is not supported by {}",
                self.class, self.benchmark
            )));
        }
        Ok(())
    }

    fn mode(&self) -> ExecMode {
        if self.safe_mode {
            ExecMode::Safe
        } else {
            ExecMode::Unchecked
        }
    }
}

/// Where each repetition runs. Child processes give every repetition a
/// fresh heap and a fresh worker pool.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Isolation {
    InProcess,
    Subprocess(PathBuf),
}

/// One repetition, numbered from zero within its configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub rep: usize,
    pub result: BenchmarkResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub workers: usize,
    pub rep: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Execution {
    pub records: Vec<RunRecord>,
    pub failures: Vec<Failure>,
}

impl Execution {
    pub fn results(&self) -> Vec<BenchmarkResult> {
        self.records.iter().map(|r| r.result.clone()).collect()
    }
}

/// A single run in the current process.
pub fn run_once(
    benchmark: Benchmark,
    class: ProblemClass,
    workers: usize,
    safe_mode: bool,
    stack_reserve: Option<usize>,
) -> Result<BenchmarkResult, HarnessError> {
    let mut config = PoolConfig::new(workers);
    if let Some(bytes) = stack_reserve.or_else(|| benchmark.stack_reserve(class)) {
        config = config.stack_size(bytes);
    }
    let pool = Pool::new(config)?;
    let mode = if safe_mode {
        ExecMode::Safe
    } else {
        ExecMode::Unchecked
    };
    Ok(benchmark.run(class, &pool, mode)?)
}

fn run_child(exe: &Path, spec: &RunSpec, workers: usize) -> Result<BenchmarkResult, HarnessError> {
    let mut cmd = Command::new(exe);
    cmd.arg("run-once")
        .arg(spec.benchmark.name())
        .arg("--class")
        .arg(spec.class.to_string())
        .arg("--workers")
        .arg(workers.to_string())
        .arg(format!("--safe-mode={}", spec.safe_mode));
    if let Some(bytes) = spec.stack_reserve {
        cmd.arg("--stack-reserve").arg(bytes.to_string());
    }
    let out = cmd.output()?;
    if !out.status.success() {
        return Err(HarnessError::Child(format!(
            "{} exited with {}: {}",
            exe.display(),
            out.status,
            String::from_utf8_lossy(&out.stderr).trim()
        )));
    }
    Ok(serde_json::from_slice(&out.stdout)?)
}

/// Runs `reps` repetitions for every worker count. A configuration stops at
/// its first unverified repetition; that result is kept and the failure is
/// recorded, and the sweep moves on to the next worker count.
pub fn execute(spec: &RunSpec, isolation: &Isolation) -> Result<Execution, HarnessError> {
    spec.validate()?;
    let mut exec = Execution::default();
    for &workers in &spec.workers {
        for rep in 0..spec.reps {
            let result = match isolation {
                Isolation::InProcess => run_once(
                    spec.benchmark,
                    spec.class,
                    workers,
                    spec.safe_mode,
                    spec.stack_reserve,
                )?,
                Isolation::Subprocess(exe) => run_child(exe, spec, workers)?,
            };
            debug_assert_eq!(result.safe_mode, spec.mode().is_safe());
            let verified = result.verified;
            exec.records.push(RunRecord { rep, result });
            if !verified {
                exec.failures.push(Failure {
                    workers,
                    rep,
                    reason: format!(
                        "{} class {} failed verification",
                        spec.benchmark, spec.class
                    ),
                });
                break;
            }
        }
    }
    Ok(exec)
}
