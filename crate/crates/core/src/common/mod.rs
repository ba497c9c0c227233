//! Services shared by all benchmarks: random numbers, timers, complex
//! arithmetic, problem classes, verification and result reporting.

mod class;
mod complex;
pub mod random;
mod report;
mod timer;
mod verify;

pub use class::ProblemClass;
pub use complex::Complex;
pub use random::{randlc, seed_advance, vranlc, RandomStream};
pub use report::{mops, report, BenchmarkResult};
pub use timer::TimerSet;
pub use verify::{relative_error, verify_all, verify_scalar};
