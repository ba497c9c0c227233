//! The eight benchmarks and the name-based dispatch used by the harness.

use std::fmt;
use std::str::FromStr;

use crate::common::{mops, BenchmarkResult, ProblemClass};
use crate::error::{NpbError, Result};
use crate::runtime::Pool;

pub mod bt;
pub mod cfd;
pub mod cg;
pub mod ep;
pub mod ft;
pub mod is;
pub mod lu;
pub mod mg;
pub mod sp;

/// Bounds-check policy for the hot loops that offer an unchecked variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExecMode {
    #[default]
    Safe,
    Unchecked,
}

impl ExecMode {
    pub fn is_safe(self) -> bool {
        self == ExecMode::Safe
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Benchmark {
    Ep,
    Cg,
    Ft,
    Is,
    Mg,
    Bt,
    Sp,
    Lu,
}

impl Benchmark {
    pub const ALL: [Benchmark; 8] = [
        Benchmark::Ep,
        Benchmark::Cg,
        Benchmark::Ft,
        Benchmark::Is,
        Benchmark::Mg,
        Benchmark::Bt,
        Benchmark::Sp,
        Benchmark::Lu,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Benchmark::Ep => "EP",
            Benchmark::Cg => "CG",
            Benchmark::Ft => "FT",
            Benchmark::Is => "IS",
            Benchmark::Mg => "MG",
            Benchmark::Bt => "BT",
            Benchmark::Sp => "SP",
            Benchmark::Lu => "LU",
        }
    }

    pub fn supports(self, _class: ProblemClass) -> bool {
        true
    }

    /// Worker stack size the benchmark asks for, if it needs more than the
    /// platform default.
    pub fn stack_reserve(self, class: ProblemClass) -> Option<usize> {
        match self {
            Benchmark::Sp => Some(sp::stack_reserve(class)),
            _ => None,
        }
    }

    pub fn run(self, class: ProblemClass, pool: &Pool, mode: ExecMode) -> Result<BenchmarkResult> {
        if !self.supports(class) {
            return Err(NpbError::UnsupportedClass {
                benchmark: self.name().into(),
                class: class.to_string(),
            });
        }
        match self {
            Benchmark::Ep => ep::run(class, pool, mode),
            Benchmark::Cg => cg::run(class, pool, mode),
            Benchmark::Ft => ft::run(class, pool, mode),
            Benchmark::Is => is::run(class, pool, mode),
            Benchmark::Mg => mg::run(class, pool, mode),
            Benchmark::Bt => bt::run(class, pool, mode),
            Benchmark::Sp => sp::run(class, pool, mode),
            Benchmark::Lu => lu::run(class, pool, mode),
        }
    }
}

impl fmt::Display for Benchmark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Benchmark {
    type Err = NpbError;

    fn from_str(s: &str) -> Result<Self> {
        Benchmark::ALL
            .into_iter()
            .find(|b| b.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| NpbError::UnknownBenchmark(s.to_string()))
    }
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn finish(
    name: &str,
    class: ProblemClass,
    size: String,
    iterations: usize,
    seconds: f64,
    ops: f64,
    op_kind: &str,
    verified: bool,
    pool: &Pool,
    mode: ExecMode,
) -> BenchmarkResult {
    BenchmarkResult {
        name: name.to_string(),
        class,
        size,
        iterations,
        seconds,
        mflops: mops(ops, seconds),
        op_kind: op_kind.to_string(),
        verified,
        workers: pool.workers(),
        safe_mode: mode.is_safe(),
    }
}

/// Slice access for hot loops compiled in both a checked and an unchecked
/// flavour. `SAFE = true` keeps the normal bounds check.
#[allow(dead_code)]
pub(crate) mod access {
    /// # Safety
    /// With `SAFE = false` the caller guarantees `i < s.len()`.
    #[inline(always)]
    pub unsafe fn ld<T: Copy, const SAFE: bool>(s: &[T], i: usize) -> T {
        if SAFE {
            s[i]
        } else {
            debug_assert!(i < s.len());
            *s.get_unchecked(i)
        }
    }

    /// # Safety
    /// With `SAFE = false` the caller guarantees `i < s.len()`.
    #[inline(always)]
    pub unsafe fn st<T, const SAFE: bool>(s: &mut [T], i: usize, v: T) {
        if SAFE {
            s[i] = v;
        } else {
            debug_assert!(i < s.len());
            *s.get_unchecked_mut(i) = v;
        }
    }

    /// # Safety
    /// With `SAFE = false` the caller guarantees `i < s.len()`.
    #[inline(always)]
    pub unsafe fn at<T, const SAFE: bool>(s: &mut [T], i: usize) -> &mut T {
        if SAFE {
            &mut s[i]
        } else {
            debug_assert!(i < s.len());
            s.get_unchecked_mut(i)
        }
    }
}
