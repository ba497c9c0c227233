//! The 46-bit multiplicative linear congruential generator shared by every
//! benchmark.
//!
//! State and multiplier are odd integers below 2^46 held exactly in `f64`.
//! The product `a * x mod 2^46` is formed by splitting both operands into
//! 23-bit halves so that every intermediate is an integer below 2^53.

/// Default multiplier, 5^13.
pub const MULTIPLIER: f64 = 1_220_703_125.0;
/// Default seed used by EP.
pub const DEFAULT_SEED: f64 = 271_828_183.0;

const R23: f64 = 1.0 / 8_388_608.0; // 2^-23
const R46: f64 = R23 * R23;
const T23: f64 = 8_388_608.0; // 2^23
const T46: f64 = T23 * T23;

/// Advances `x` to `a * x mod 2^46` and returns the new state scaled to (0,1).
#[inline(always)]
pub fn randlc(x: &mut f64, a: f64) -> f64 {
    let t1 = R23 * a;
    let a1 = t1.trunc();
    let a2 = a - T23 * a1;

    let t1 = R23 * *x;
    let x1 = t1.trunc();
    let x2 = *x - T23 * x1;

    let t1 = a1 * x2 + a2 * x1;
    let t2 = (R23 * t1).trunc();
    let z = t1 - T23 * t2;
    let t3 = T23 * z + a2 * x2;
    let t4 = (R46 * t3).trunc();
    *x = t3 - T46 * t4;
    R46 * *x
}

/// Fills `out` with successive values of the stream, exactly as repeated
/// [`randlc`] calls would.
pub fn vranlc(x: &mut f64, a: f64, out: &mut [f64]) {
    let t1 = R23 * a;
    let a1 = t1.trunc();
    let a2 = a - T23 * a1;
    let mut xv = *x;
    for slot in out.iter_mut() {
        let t1 = R23 * xv;
        let x1 = t1.trunc();
        let x2 = xv - T23 * x1;
        let t1 = a1 * x2 + a2 * x1;
        let t2 = (R23 * t1).trunc();
        let z = t1 - T23 * t2;
        let t3 = T23 * z + a2 * x2;
        let t4 = (R46 * t3).trunc();
        xv = t3 - T46 * t4;
        *slot = R46 * xv;
    }
    *x = xv;
}

/// `a^k mod 2^46` by binary exponentiation over the exact modular multiply.
///
/// Multiplying a seed by the result jumps the stream forward `k` steps.
pub fn seed_advance(a: f64, k: u64) -> f64 {
    let mut result = 1.0;
    let mut base = a;
    let mut n = k;
    while n != 0 {
        if n & 1 == 1 {
            randlc(&mut result, base);
        }
        let b = base;
        randlc(&mut base, b);
        n >>= 1;
    }
    result
}

/// A generator state together with its multiplier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomStream {
    seed: f64,
    mult: f64,
}

impl RandomStream {
    /// Panics if either value is not an odd integer in (0, 2^46).
    pub fn new(seed: f64, mult: f64) -> Self {
        assert!(
            is_valid_state(seed),
            "seed must be an odd integer below 2^46"
        );
        assert!(
            is_valid_state(mult),
            "multiplier must be an odd integer below 2^46"
        );
        Self { seed, mult }
    }

    pub fn with_default_multiplier(seed: f64) -> Self {
        Self::new(seed, MULTIPLIER)
    }

    pub fn seed(&self) -> f64 {
        self.seed
    }

    pub fn multiplier(&self) -> f64 {
        self.mult
    }

    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        randlc(&mut self.seed, self.mult)
    }

    pub fn fill(&mut self, out: &mut [f64]) {
        vranlc(&mut self.seed, self.mult, out);
    }

    pub fn take_vec(&mut self, n: usize) -> Vec<f64> {
        let mut v = vec![0.0; n];
        self.fill(&mut v);
        v
    }

    /// Moves the stream forward `k` steps without generating the values.
    pub fn skip(&mut self, k: u64) {
        let jump = seed_advance(self.mult, k);
        randlc(&mut self.seed, jump);
    }

    /// A copy of this stream positioned `k` steps ahead.
    pub fn jumped(&self, k: u64) -> Self {
        let mut s = *self;
        s.skip(k);
        s
    }
}

fn is_valid_state(v: f64) -> bool {
    v > 0.0 && v < T46 && v.fract() == 0.0 && (v as u64) % 2 == 1
}
