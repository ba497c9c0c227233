use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::ProblemClass;

/// One timed, verified run of one benchmark.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkResult {
    pub name: String,
    pub class: ProblemClass,
    /// Grid or array extents, e.g. `64 x 64 x 64`.
    pub size: String,
    pub iterations: usize,
    /// Seconds spent in the timed section only.
    pub seconds: f64,
    pub mflops: f64,
    /// "floating point" or "keys ranked".
    pub op_kind: String,
    pub verified: bool,
    pub workers: usize,
    pub safe_mode: bool,
}

/// Operation rate in millions per second; zero when the time is not positive.
pub fn mops(ops: f64, seconds: f64) -> f64 {
    if seconds > 0.0 {
        ops / seconds / 1.0e6
    } else {
        0.0
    }
}

/// Classic result banner.
pub fn report(r: &BenchmarkResult) -> String {
    let mut s = String::new();
    let _ = writeln!(s);
    let _ = writeln!(s, " {} Benchmark Completed.", r.name);
    let _ = writeln!(s, " Class           =  {:>24}", r.class);
    let _ = writeln!(s, " Size            =  {:>24}", r.size);
    let _ = writeln!(s, " Iterations      =  {:>24}", r.iterations);
    let _ = writeln!(s, " Time in seconds =  {:>24.2}", r.seconds);
    let _ = writeln!(s, " Total threads   =  {:>24}", r.workers);
    let _ = writeln!(s, " Mop/s total     =  {:>24.2}", r.mflops);
    let _ = writeln!(s, " Operation type  =  {:>24}", r.op_kind);
    let _ = writeln!(
        s,
        " Verification    =  {:>24}",
        if r.verified {
            "SUCCESSFUL"
        } else {
            "UNSUCCESSFUL"
        }
    );
    let _ = writeln!(
        s,
        " Safe mode       =  {:>24}",
        if r.safe_mode { "yes" } else { "no" }
    );
    let _ = writeln!(
        s,
        " {}",
        if r.verified {
            "VERIFICATION SUCCESSFUL"
        } else {
            "VERIFICATION FAILED"
        }
    );
    s
}
