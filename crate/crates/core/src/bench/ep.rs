//! EP: Gaussian deviates by the polar method, tallied in square annuli.

use std::ops::Add;

use crate::bench::{finish, ExecMode};
use crate::common::{
    seed_advance, verify_scalar, BenchmarkResult, ProblemClass, RandomStream, TimerSet,
};
use crate::error::Result;
use crate::runtime::Pool;

pub const SEED: f64 = 271_828_183.0;
/// log2 of the pairs handled per chunk.
pub const MK: u32 = 16;
pub const NQ: usize = 10;
pub const EPSILON: f64 = 1.0e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpParams {
    /// log2 of the total number of pairs.
    pub m: u32,
    pub sx: f64,
    pub sy: f64,
    pub gaussian_count: u64,
}

#[allow(clippy::excessive_precision)]
pub fn params(class: ProblemClass) -> EpParams {
    let (m, sx, sy, gc) = match class {
        ProblemClass::S => (
            24,
            -3.247_834_652_034_740e3,
            -6.958_407_078_382_297e3,
            13_176_389,
        ),
        ProblemClass::W => (
            25,
            -2.863_319_731_645_753e3,
            -6.320_053_679_109_499e3,
            26_354_769,
        ),
        ProblemClass::A => (
            28,
            -4.295_875_165_629_892e3,
            -1.580_732_573_678_431e4,
            210_832_767,
        ),
        ProblemClass::B => (
            30,
            4.033_815_542_441_498e4,
            -2.660_669_192_809_235e4,
            843_345_606,
        ),
        ProblemClass::C => (
            32,
            4.764_367_927_995_374e4,
            -8.084_072_988_043_731e4,
            3_373_275_903,
        ),
    };
    EpParams {
        m,
        sx,
        sy,
        gaussian_count: gc,
    }
}

/// Sums and annulus counts of accepted deviates.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GaussianTally {
    pub sx: f64,
    pub sy: f64,
    pub q: [u64; NQ],
    pub pair_count: u64,
}

impl Add for GaussianTally {
    type Output = GaussianTally;

    fn add(mut self, o: GaussianTally) -> GaussianTally {
        self.sx += o.sx;
        self.sy += o.sy;
        for (a, b) in self.q.iter_mut().zip(o.q) {
            *a += b;
        }
        self.pair_count += o.pair_count;
        self
    }
}

/// Tallies `count` pairs starting at pair number `first_pair` of the stream
/// seeded with `base_seed`.
pub fn generate_pairs(first_pair: u64, count: usize, base_seed: f64) -> GaussianTally {
    let mut t = GaussianTally::default();
    if count == 0 {
        return t;
    }
    let mut stream = RandomStream::with_default_multiplier(base_seed);
    let jump = seed_advance(stream.multiplier(), 2 * first_pair);
    let mut seed = stream.seed();
    crate::common::randlc(&mut seed, jump);
    stream = RandomStream::new(seed, stream.multiplier());

    let mut x = vec![0.0; 2 * count];
    stream.fill(&mut x);
    for pair in x.chunks_exact(2) {
        let x1 = 2.0 * pair[0] - 1.0;
        let x2 = 2.0 * pair[1] - 1.0;
        let t1 = x1 * x1 + x2 * x2;
        if t1 <= 1.0 {
            let t2 = (-2.0 * t1.ln() / t1).sqrt();
            let t3 = x1 * t2;
            let t4 = x2 * t2;
            let l = t3.abs().max(t4.abs()) as usize;
            t.q[l] += 1;
            t.sx += t3;
            t.sy += t4;
            t.pair_count += 1;
        }
    }
    t
}

/// Tally for chunk `chunk_index` of `chunk_size` pairs.
pub fn generate_chunk(chunk_index: u64, chunk_size: usize, base_seed: f64) -> GaussianTally {
    generate_pairs(chunk_index * chunk_size as u64, chunk_size, base_seed)
}

/// Parallel tally over `2^m` pairs in chunks of `2^MK`.
pub fn tally(m: u32, pool: &Pool) -> GaussianTally {
    let mk = MK.min(m);
    let nk = 1usize << mk;
    let nn = 1usize << (m - mk);
    pool.par_map_reduce(
        0..nn,
        GaussianTally::default(),
        |k| generate_chunk(k as u64, nk, SEED),
        |a, b| a + b,
    )
}

pub fn verify(class: ProblemClass, t: &GaussianTally) -> bool {
    let p = params(class);
    verify_scalar(t.sx, p.sx, EPSILON)
        && verify_scalar(t.sy, p.sy, EPSILON)
        && t.q.iter().sum::<u64>() == p.gaussian_count
        && t.pair_count == p.gaussian_count
}

pub fn run(class: ProblemClass, pool: &Pool, mode: ExecMode) -> Result<BenchmarkResult> {
    let p = params(class);
    let mut timers = TimerSet::new(1);
    timers.start(0);
    let t = tally(p.m, pool);
    timers.stop(0);
    let seconds = timers.read(0);
    let ops = 2f64.powi(p.m as i32 + 1);
    Ok(finish(
        "EP",
        class,
        format!("{}", 1u64 << (p.m + 1)),
        0,
        seconds,
        ops,
        "Random numbers generated",
        verify(class, &t),
        pool,
        mode,
    ))
}
