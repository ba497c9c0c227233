//! IS: bucket-sort ranking of uniformly-summed integer keys.

use crate::bench::access::{at, ld};
use crate::bench::{finish, ExecMode};
use crate::common::{BenchmarkResult, ProblemClass, RandomStream, TimerSet};
use crate::error::Result;
use crate::runtime::{static_partition, DisjointSlice, Pool};

pub const SEED: f64 = 314_159_265.0;
pub const A: f64 = 1_220_703_125.0;
pub const MAX_ITERATIONS: usize = 10;
pub const TEST_ARRAY_SIZE: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsParams {
    pub class: ProblemClass,
    pub total_keys_log2: u32,
    pub max_key_log2: u32,
    pub buckets_log2: u32,
    pub test_index: [usize; TEST_ARRAY_SIZE],
    pub test_rank: [usize; TEST_ARRAY_SIZE],
}

impl IsParams {
    pub fn num_keys(&self) -> usize {
        1 << self.total_keys_log2
    }

    pub fn max_key(&self) -> usize {
        1 << self.max_key_log2
    }

    /// Expected rank of test key `i` after `iteration` key mutations.
    pub fn expected_rank(&self, i: usize, iteration: usize) -> usize {
        let r = self.test_rank[i];
        match self.class {
            ProblemClass::S | ProblemClass::C => {
                if i <= 2 {
                    r + iteration
                } else {
                    r - iteration
                }
            }
            ProblemClass::W => {
                if i < 2 {
                    r + iteration - 2
                } else {
                    r - iteration
                }
            }
            ProblemClass::A => {
                if i <= 2 {
                    r + iteration - 1
                } else {
                    r - (iteration - 1)
                }
            }
            ProblemClass::B => {
                if i == 1 || i == 2 || i == 4 {
                    r + iteration
                } else {
                    r - iteration
                }
            }
        }
    }
}

pub fn params(class: ProblemClass) -> IsParams {
    let (t, m, b, test_index, test_rank) = match class {
        ProblemClass::S => (
            16,
            11,
            9,
            [48427, 17148, 23627, 62548, 4431],
            [0, 18, 346, 64917, 65463],
        ),
        ProblemClass::W => (
            20,
            16,
            10,
            [357773, 934767, 875723, 898999, 404505],
            [1249, 11698, 1039987, 1043896, 1048018],
        ),
        ProblemClass::A => (
            23,
            19,
            10,
            [2112377, 662041, 5336171, 3642833, 4250760],
            [104, 17523, 123928, 8288932, 8388264],
        ),
        ProblemClass::B => (
            25,
            21,
            10,
            [41869, 812306, 5102857, 18232239, 26860214],
            [33422937, 10244, 59149, 33135281, 99],
        ),
        ProblemClass::C => (
            27,
            23,
            10,
            [44172927, 72999161, 74326391, 129606274, 21736814],
            [61147, 882988, 266290, 133997595, 133525895],
        ),
    };
    IsParams {
        class,
        total_keys_log2: t,
        max_key_log2: m,
        buckets_log2: b,
        test_index,
        test_rank,
    }
}

/// `n` keys, each `floor(max_key / 4 * (r1 + r2 + r3 + r4))` from four
/// consecutive draws. Worker chunks jump the stream so the array does not
/// depend on the worker count.
pub fn create_seq(pool: &Pool, n: usize, max_key: usize, seed: f64, a: f64) -> Vec<u32> {
    let mut keys = vec![0u32; n];
    let k = (max_key / 4) as f64;
    let base = RandomStream::new(seed, a);
    let w = pool.workers();
    let chunk = n.div_ceil(w).max(1);
    pool.par_chunks_mut(&mut keys, chunk, |c, out| {
        let mut s = base.jumped(4 * (c * chunk) as u64);
        for key in out.iter_mut() {
            let mut x = s.next_f64();
            x += s.next_f64();
            x += s.next_f64();
            x += s.next_f64();
            *key = (k * x) as u32;
        }
    });
    keys
}

/// Buffers of the bucketed counting sort.
#[derive(Debug, Clone)]
pub struct RankState {
    keys: Vec<u32>,
    /// After ranking: number of keys `<= v` at index `v`.
    pub key_buff1: Vec<u32>,
    /// Keys grouped by bucket, stable within each bucket.
    pub key_buff2: Vec<u32>,
    /// End offset of each bucket in `key_buff2`.
    pub bucket_end: Vec<usize>,
    pub max_key_log2: u32,
    pub buckets_log2: u32,
    pub passed_verification: usize,
}

impl RankState {
    /// Panics if a key is not below `2^max_key_log2`.
    pub fn new(keys: Vec<u32>, max_key_log2: u32, buckets_log2: u32) -> Self {
        assert!(buckets_log2 <= max_key_log2);
        assert!(
            keys.iter().all(|&k| (k as u64) < 1u64 << max_key_log2),
            "key out of range"
        );
        let n = keys.len();
        Self {
            keys,
            key_buff1: vec![0; 1 << max_key_log2],
            key_buff2: vec![0; n],
            bucket_end: vec![0; 1 << buckets_log2],
            max_key_log2,
            buckets_log2,
            passed_verification: 0,
        }
    }

    pub fn keys(&self) -> &[u32] {
        &self.keys
    }

    /// Panics if `value` is not below `2^max_key_log2`.
    pub fn set_key(&mut self, i: usize, value: u32) {
        assert!(
            (value as u64) < 1u64 << self.max_key_log2,
            "key out of range"
        );
        self.keys[i] = value;
    }

    /// Ranks the current keys into `key_buff1`.
    pub fn rank_keys(&mut self, pool: &Pool, mode: ExecMode) {
        match mode {
            ExecMode::Safe => self.rank_keys_impl::<true>(pool),
            ExecMode::Unchecked => self.rank_keys_impl::<false>(pool),
        }
    }

    fn rank_keys_impl<const SAFE: bool>(&mut self, pool: &Pool) {
        let n = self.keys.len();
        let nb = 1usize << self.buckets_log2;
        let shift = self.max_key_log2 - self.buckets_log2;
        let nw = pool.workers();
        let keys = &self.keys;

        // Worker-private histograms over contiguous key ranges.
        let mut counts = vec![0usize; nw * nb];
        pool.par_chunks_mut(&mut counts, nb, |w, hist| {
            for i in static_partition(0..n, w, nw) {
                // SAFETY: keys are below 2^max_key_log2, so k >> shift < nb.
                unsafe {
                    let b = (ld::<_, SAFE>(keys, i) >> shift) as usize;
                    *at::<_, SAFE>(hist, b) += 1;
                }
            }
        });

        // Bucket-major, worker-minor prefix sums give every worker its own
        // write window inside each bucket.
        let mut ptrs = vec![0usize; nw * nb];
        let mut acc = 0;
        for b in 0..nb {
            for w in 0..nw {
                ptrs[w * nb + b] = acc;
                acc += counts[w * nb + b];
            }
            self.bucket_end[b] = acc;
        }

        let ptrs = &ptrs;
        pool.par_map_disjoint(0..nw, &mut self.key_buff2, |w, out| {
            let mut my = ptrs[w * nb..(w + 1) * nb].to_vec();
            for i in static_partition(0..n, w, nw) {
                // SAFETY: worker w writes slots ptrs[w][b]..ptrs[w][b] +
                // counts[w][b] only, and these windows partition 0..n.
                unsafe {
                    let k = ld::<_, SAFE>(keys, i);
                    let slot = at::<_, SAFE>(&mut my, (k >> shift) as usize);
                    out.write(*slot, k);
                    *slot += 1;
                }
            }
        });

        // Per bucket: count the keys, then prefix-sum over the bucket's
        // key range offset by the keys in earlier buckets.
        let per_bucket = 1usize << shift;
        let kb2 = &self.key_buff2;
        let ends = &self.bucket_end;
        pool.par_chunks_mut(&mut self.key_buff1, per_bucket, |b, kb1| {
            kb1.fill(0);
            let m = if b > 0 { ends[b - 1] } else { 0 };
            // SAFETY: keys of bucket b lie in b*per_bucket..(b+1)*per_bucket,
            // so the local index is below per_bucket; m..ends[b] is within n.
            unsafe {
                for k in m..ends[b] {
                    let key = ld::<_, SAFE>(kb2, k) as usize - b * per_bucket;
                    *at::<_, SAFE>(kb1, key) += 1;
                }
                *at::<_, SAFE>(kb1, 0) += m as u32;
                for k in 1..per_bucket {
                    let prev = ld::<_, SAFE>(kb1, k - 1);
                    *at::<_, SAFE>(kb1, k) += prev;
                }
            }
        });
    }

    /// Writes every key into its sorted position using the ranks, restoring
    /// `keys` as a sorted array, and returns the number of adjacent
    /// inversions.
    pub fn full_verify(&mut self, pool: &Pool, mode: ExecMode) -> usize {
        let nb = self.bucket_end.len();
        let per_bucket = 1usize << (self.max_key_log2 - self.buckets_log2);
        let kb2 = &self.key_buff2;
        let ends = &self.bucket_end;
        let ranks = DisjointSlice::new(&mut self.key_buff1);
        // The scatter goes through the asserting view in both modes.
        let _ = mode;
        pool.par_map_disjoint(0..nb, &mut self.keys, |b, out| {
            let m = if b > 0 { ends[b - 1] } else { 0 };
            for &k in &kb2[m..ends[b]] {
                // SAFETY: bucket b owns rank counters b*per_bucket..(b+1)*per_bucket
                // and output slots m..ends[b], since the ranks of its keys
                // count exactly the keys before and inside the bucket.
                unsafe {
                    debug_assert!((k as usize) / per_bucket == b);
                    let r = ranks.get_mut(k as usize);
                    *r -= 1;
                    debug_assert!((m..ends[b]).contains(&(*r as usize)));
                    out.write(*r as usize, k);
                }
            }
        });
        let keys = &self.keys;
        let n = keys.len();
        if n < 2 {
            return 0;
        }
        let chunk = 4096;
        pool.par_map_reduce(
            0..(n - 1).div_ceil(chunk),
            0usize,
            |c| {
                let lo = 1 + c * chunk;
                let hi = (lo + chunk).min(n);
                (lo..hi).filter(|&i| keys[i - 1] > keys[i]).count()
            },
            |a, b| a + b,
        )
    }
}

/// One benchmark iteration: mutate two keys, rank, check the test keys.
pub fn rank(p: &IsParams, s: &mut RankState, iteration: usize, pool: &Pool, mode: ExecMode) {
    let max_key = p.max_key();
    s.set_key(iteration, iteration as u32);
    s.set_key(iteration + MAX_ITERATIONS, (max_key - iteration) as u32);
    let mut partial = [0usize; TEST_ARRAY_SIZE];
    for (v, &idx) in partial.iter_mut().zip(&p.test_index) {
        *v = s.keys[idx] as usize;
    }
    s.rank_keys(pool, mode);
    for (i, &k) in partial.iter().enumerate() {
        if 0 < k && k < p.num_keys() {
            let key_rank = s.key_buff1[k - 1] as usize;
            if key_rank == p.expected_rank(i, iteration) {
                s.passed_verification += 1;
            }
        }
    }
}

pub fn initial_state(p: &IsParams, pool: &Pool) -> RankState {
    let keys = create_seq(pool, p.num_keys(), p.max_key(), SEED, A);
    RankState::new(keys, p.max_key_log2, p.buckets_log2)
}

/// Full benchmark flow; returns the final state, the inversion count and
/// the timed seconds.
pub fn execute(p: &IsParams, pool: &Pool, mode: ExecMode) -> (RankState, usize, f64) {
    let mut s = initial_state(p, pool);
    rank(p, &mut s, 1, pool, mode);
    s.passed_verification = 0;

    let mut timers = TimerSet::new(1);
    timers.start(0);
    for it in 1..=MAX_ITERATIONS {
        rank(p, &mut s, it, pool, mode);
    }
    timers.stop(0);
    let seconds = timers.read(0);

    let inversions = s.full_verify(pool, mode);
    if inversions == 0 {
        s.passed_verification += 1;
    }
    (s, inversions, seconds)
}

pub fn run(class: ProblemClass, pool: &Pool, mode: ExecMode) -> Result<BenchmarkResult> {
    let p = params(class);
    let (s, _, seconds) = execute(&p, pool, mode);
    let verified = s.passed_verification == TEST_ARRAY_SIZE * MAX_ITERATIONS + 1;
    Ok(finish(
        "IS",
        class,
        p.num_keys().to_string(),
        MAX_ITERATIONS,
        seconds,
        (MAX_ITERATIONS * p.num_keys()) as f64,
        "keys ranked",
        verified,
        pool,
        mode,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::runtime::PoolConfig;

    #[test]
    fn keys_in_range_and_first_key_from_stream() {
        let p = params(ProblemClass::S);
        let keys = create_seq(&Pool::sequential(), p.num_keys(), p.max_key(), SEED, A);
        assert_eq!(keys.len(), 1 << 16);
        assert!(keys.iter().all(|&k| (k as usize) < p.max_key()));
        let mut s = RandomStream::new(SEED, A);
        let x: f64 = (0..4).map(|_| s.next_f64()).fold(0.0, |a, b| a + b);
        assert_eq!(keys[0], ((p.max_key() / 4) as f64 * x) as u32);
        let par = create_seq(
            &Pool::new(PoolConfig::new(3)).unwrap(),
            p.num_keys(),
            p.max_key(),
            SEED,
            A,
        );
        assert_eq!(keys, par);
    }

    #[test]
    fn reversed_small_array_sorts() {
        let keys: Vec<u32> = (0..10).rev().collect();
        let mut s = RankState::new(keys, 4, 2);
        s.rank_keys(&Pool::sequential(), ExecMode::Safe);
        assert_eq!(s.full_verify(&Pool::sequential(), ExecMode::Safe), 0);
        assert_eq!(s.keys, (0..10).collect::<Vec<u32>>());
    }

    #[test]
    fn ranks_count_smaller_or_equal_keys() {
        let keys = create_seq(&Pool::sequential(), 5000, 1 << 10, SEED, A);
        for w in [1, 2, 4] {
            let mut s = RankState::new(keys.clone(), 10, 4);
            s.rank_keys(&Pool::new(PoolConfig::new(w)).unwrap(), ExecMode::Safe);
            let mut hist = vec![0u32; 1 << 10];
            for &k in &keys {
                hist[k as usize] += 1;
            }
            let mut acc = 0;
            for (v, h) in hist.iter().enumerate() {
                acc += h;
                assert_eq!(s.key_buff1[v], acc);
            }
        }
    }

    #[test]
    fn class_s_matches_comparison_sort() {
        let p = params(ProblemClass::S);
        let (s, inversions, _) = execute(&p, &Pool::sequential(), ExecMode::Safe);
        assert_eq!(inversions, 0);
        let mut oracle = create_seq(&Pool::sequential(), p.num_keys(), p.max_key(), SEED, A);
        for it in 1..=MAX_ITERATIONS {
            oracle[it] = it as u32;
            oracle[it + MAX_ITERATIONS] = (p.max_key() - it) as u32;
        }
        oracle.sort();
        assert_eq!(s.keys, oracle);
        assert_eq!(s.passed_verification, 51);
    }

    #[test]
    fn worker_count_does_not_change_ranks() {
        let p = params(ProblemClass::S);
        let (seq, _, _) = execute(&p, &Pool::sequential(), ExecMode::Safe);
        for w in [2, 4, 8] {
            for mode in [ExecMode::Safe, ExecMode::Unchecked] {
                let (par, _, _) = execute(&p, &Pool::new(PoolConfig::new(w)).unwrap(), mode);
                assert_eq!(par.key_buff1, seq.key_buff1);
                assert_eq!(par.key_buff2, seq.key_buff2);
                assert_eq!(par.keys, seq.keys);
            }
        }
    }
}
