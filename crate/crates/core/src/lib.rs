//! NAS Parallel Benchmarks (EP, CG, FT, IS, MG, BT, SP, LU) over a small
//! data-parallel runtime.

pub mod bench;
pub mod common;
pub mod error;
pub mod runtime;

pub use bench::{Benchmark, ExecMode};
pub use common::{BenchmarkResult, ProblemClass};
pub use error::{NpbError, Result};
pub use runtime::{Pool, PoolConfig};
