//! FT: spectral solution of a 3-D diffusion equation with forward and
//! inverse complex FFTs and per-step checksums.

use crate::bench::access::{ld, st};
use crate::bench::{finish, ExecMode};
use crate::common::{BenchmarkResult, Complex, ProblemClass, RandomStream, TimerSet};
use crate::error::Result;
use crate::runtime::Pool;

pub const SEED: f64 = 314_159_265.0;
pub const A: f64 = 1_220_703_125.0;
pub const ALPHA: f64 = 1.0e-6;
pub const EPSILON: f64 = 1.0e-12;
const FFTBLOCK: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct FtParams {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub niter: usize,
    pub checksums: &'static [(f64, f64)],
}

const CSUM_S: [(f64, f64); 6] = [
    (5.546087004964e+02, 4.845363331978e+02),
    (5.546385409189e+02, 4.865304269511e+02),
    (5.546148406171e+02, 4.883910722336e+02),
    (5.545423607415e+02, 4.901273169046e+02),
    (5.544255039624e+02, 4.917475857993e+02),
    (5.542683411902e+02, 4.932597244941e+02),
];
const CSUM_W: [(f64, f64); 6] = [
    (5.673612178944e+02, 5.293246849175e+02),
    (5.631436885271e+02, 5.282149986629e+02),
    (5.594024089970e+02, 5.270996558037e+02),
    (5.560698047020e+02, 5.260027904925e+02),
    (5.530898991250e+02, 5.249400845633e+02),
    (5.504159734538e+02, 5.239212247086e+02),
];
const CSUM_A: [(f64, f64); 6] = [
    (5.046735008193e+02, 5.114047905510e+02),
    (5.059412319734e+02, 5.098809666433e+02),
    (5.069376896287e+02, 5.098144042213e+02),
    (5.077892868474e+02, 5.101336130759e+02),
    (5.085233095391e+02, 5.104914655194e+02),
    (5.091487099959e+02, 5.107917842803e+02),
];
const CSUM_B: [(f64, f64); 20] = [
    (5.177643571579e+02, 5.077803458597e+02),
    (5.154521291263e+02, 5.088249431599e+02),
    (5.146409228649e+02, 5.096208912659e+02),
    (5.142378756213e+02, 5.101023387619e+02),
    (5.139626667737e+02, 5.103976610617e+02),
    (5.137423460082e+02, 5.105948019802e+02),
    (5.135547056878e+02, 5.107404165783e+02),
    (5.133910925466e+02, 5.108576573661e+02),
    (5.132470705390e+02, 5.109577278523e+02),
    (5.131197729984e+02, 5.110460304483e+02),
    (5.130070319283e+02, 5.111252433800e+02),
    (5.129070537032e+02, 5.111968077718e+02),
    (5.128182883502e+02, 5.112616233064e+02),
    (5.127393733383e+02, 5.113203605551e+02),
    (5.126691062020e+02, 5.113735928093e+02),
    (5.126064276004e+02, 5.114218460548e+02),
    (5.125504076570e+02, 5.114656139760e+02),
    (5.125002331720e+02, 5.115053595966e+02),
    (5.124551951846e+02, 5.115415130407e+02),
    (5.124146770029e+02, 5.115744692211e+02),
];
const CSUM_C: [(f64, f64); 20] = [
    (5.195078707457e+02, 5.149019699238e+02),
    (5.155422171134e+02, 5.127578201997e+02),
    (5.144678022222e+02, 5.122251847514e+02),
    (5.140150594328e+02, 5.121090289018e+02),
    (5.137550426810e+02, 5.121143685824e+02),
    (5.135811056728e+02, 5.121496764568e+02),
    (5.134569343165e+02, 5.121870921893e+02),
    (5.133651975661e+02, 5.122193250322e+02),
    (5.132955192805e+02, 5.122454735794e+02),
    (5.132410471738e+02, 5.122663649603e+02),
    (5.131971141679e+02, 5.122830879827e+02),
    (5.131605205716e+02, 5.122965869718e+02),
    (5.131290734194e+02, 5.123075927445e+02),
    (5.131012720314e+02, 5.123166486553e+02),
    (5.130760908195e+02, 5.123241541685e+02),
    (5.130528295923e+02, 5.123304037599e+02),
    (5.130310107773e+02, 5.123356167976e+02),
    (5.130103090133e+02, 5.123399592211e+02),
    (5.129905029333e+02, 5.123435588985e+02),
    (5.129714421109e+02, 5.123465164008e+02),
];

pub fn params(class: ProblemClass) -> FtParams {
    let (nx, ny, nz, niter, checksums): (_, _, _, _, &'static [(f64, f64)]) = match class {
        ProblemClass::S => (64, 64, 64, 6, &CSUM_S),
        ProblemClass::W => (128, 128, 32, 6, &CSUM_W),
        ProblemClass::A => (256, 256, 128, 6, &CSUM_A),
        ProblemClass::B => (512, 256, 256, 20, &CSUM_B),
        ProblemClass::C => (512, 512, 512, 20, &CSUM_C),
    };
    FtParams {
        nx,
        ny,
        nz,
        niter,
        checksums,
    }
}

/// Complex field with `i` fastest: `index(i, j, k) = i + nx * (j + ny * k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexGrid3 {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub data: Vec<Complex>,
}

impl ComplexGrid3 {
    pub fn zeros(nx: usize, ny: usize, nz: usize) -> Self {
        assert!(
            nx.is_power_of_two() && ny.is_power_of_two() && nz.is_power_of_two(),
            "grid dimensions must be powers of two"
        );
        Self {
            nx,
            ny,
            nz,
            data: vec![Complex::ZERO; nx * ny * nz],
        }
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.nx * (j + self.ny * k)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FftDirection {
    Forward,
    Inverse,
}

/// Fills the grid from the random stream, plane by plane. Plane `k` starts
/// `2 * nx * ny * k` draws into the stream, so the result does not depend on
/// how planes are spread over workers.
pub fn compute_initial_conditions(pool: &Pool, grid: &mut ComplexGrid3) {
    let plane = grid.nx * grid.ny;
    let base = RandomStream::new(SEED, A);
    pool.par_chunks_mut(&mut grid.data, plane, |k, out| {
        let mut s = base.jumped((2 * plane * k) as u64);
        let mut buf = vec![0.0; 2 * out.len()];
        s.fill(&mut buf);
        for (c, pair) in out.iter_mut().zip(buf.chunks_exact(2)) {
            *c = Complex::new(pair[0], pair[1]);
        }
    });
}

/// Per-mode decay factors `exp(-4 alpha pi^2 |k|^2)` with wavenumbers folded
/// into `[-n/2, n/2)`.
pub fn exponent_table(pool: &Pool, nx: usize, ny: usize, nz: usize) -> Vec<f64> {
    let ap = -4.0 * ALPHA * std::f64::consts::PI * std::f64::consts::PI;
    let fold = |i: usize, n: usize| ((i + n / 2) % n) as i64 - (n / 2) as i64;
    let mut t = vec![0.0; nx * ny * nz];
    pool.par_chunks_mut(&mut t, nx * ny, |k, plane| {
        let kk = fold(k, nz);
        for j in 0..ny {
            let jj = fold(j, ny);
            let kj2 = jj * jj + kk * kk;
            for i in 0..nx {
                let ii = fold(i, nx);
                plane[i + nx * j] = (ap * (ii * ii + kj2) as f64).exp();
            }
        }
    });
    t
}

/// Roots of unity `exp(-2 pi i k / n)` for `k < n / 2`.
#[derive(Debug, Clone)]
pub struct FftPlan {
    roots: [Vec<Complex>; 3],
}

impl FftPlan {
    pub fn new(nx: usize, ny: usize, nz: usize) -> Self {
        let table = |n: usize| {
            (0..n / 2)
                .map(|k| Complex::cis(-2.0 * std::f64::consts::PI * k as f64 / n as f64))
                .collect()
        };
        Self {
            roots: [table(nx), table(ny), table(nz)],
        }
    }
}

/// Stockham radix-2 transform of `b` interleaved pencils of length `n`,
/// stored as `x[pos * b + col]`. `y` is scratch of the same size. The
/// inverse is unscaled.
fn fft_pencils<const SAFE: bool>(
    x: &mut [Complex],
    y: &mut [Complex],
    n: usize,
    b: usize,
    roots: &[Complex],
    dir: FftDirection,
) {
    assert!(x.len() >= n * b && y.len() >= n * b && roots.len() >= n / 2);
    let mut src: &mut [Complex] = x;
    let mut dst: &mut [Complex] = y;
    let mut len = n;
    let mut s = 1;
    let mut swapped = false;
    while len > 1 {
        let m = len / 2;
        let rstep = n / len;
        for p in 0..m {
            // SAFETY: p < n/2 and p * rstep < n/2 <= roots.len(); every
            // offset below is at most (s * len - 1) * b + b - 1 = n * b - 1.
            unsafe {
                let mut w = ld::<_, SAFE>(roots, p * rstep);
                if dir == FftDirection::Inverse {
                    w = w.conj();
                }
                for q in 0..s {
                    let ia = (q + s * p) * b;
                    let ib = (q + s * (p + m)) * b;
                    let oa = (q + s * 2 * p) * b;
                    let ob = oa + s * b;
                    for c in 0..b {
                        let u = ld::<_, SAFE>(src, ia + c);
                        let v = ld::<_, SAFE>(src, ib + c);
                        st::<_, SAFE>(dst, oa + c, u + v);
                        st::<_, SAFE>(dst, ob + c, (u - v) * w);
                    }
                }
            }
        }
        std::mem::swap(&mut src, &mut dst);
        swapped = !swapped;
        len = m;
        s *= 2;
    }
    if swapped {
        dst[..n * b].copy_from_slice(&src[..n * b]);
    }
}

/// 1-D transform along `dim` (0 = i, 1 = j, 2 = k) of every pencil.
pub fn fft_dim<const SAFE: bool>(
    pool: &Pool,
    grid: &mut ComplexGrid3,
    dim: usize,
    dir: FftDirection,
    plan: &FftPlan,
) {
    let (nx, ny, nz) = (grid.nx, grid.ny, grid.nz);
    let plane = nx * ny;
    match dim {
        0 => {
            let b = FFTBLOCK.min(ny);
            let roots = &plan.roots[0];
            pool.par_chunks_mut(&mut grid.data, plane, |_, pl| {
                let mut x = vec![Complex::ZERO; nx * b];
                let mut y = vec![Complex::ZERO; nx * b];
                for j0 in (0..ny).step_by(b) {
                    // SAFETY: j0 + c < ny and pos < nx keep every offset
                    // below nx * ny = pl.len() and below nx * b for x.
                    unsafe {
                        for c in 0..b {
                            for pos in 0..nx {
                                st::<_, SAFE>(
                                    &mut x,
                                    pos * b + c,
                                    ld::<_, SAFE>(pl, (j0 + c) * nx + pos),
                                );
                            }
                        }
                        fft_pencils::<SAFE>(&mut x, &mut y, nx, b, roots, dir);
                        for c in 0..b {
                            for pos in 0..nx {
                                st::<_, SAFE>(
                                    pl,
                                    (j0 + c) * nx + pos,
                                    ld::<_, SAFE>(&x, pos * b + c),
                                );
                            }
                        }
                    }
                }
            });
        }
        1 => {
            let b = FFTBLOCK.min(nx);
            let roots = &plan.roots[1];
            pool.par_chunks_mut(&mut grid.data, plane, |_, pl| {
                let mut x = vec![Complex::ZERO; ny * b];
                let mut y = vec![Complex::ZERO; ny * b];
                for i0 in (0..nx).step_by(b) {
                    // SAFETY: pos < ny and i0 + c < nx bound the plane offset
                    // by nx * ny; x offsets stay below ny * b.
                    unsafe {
                        for pos in 0..ny {
                            for c in 0..b {
                                st::<_, SAFE>(
                                    &mut x,
                                    pos * b + c,
                                    ld::<_, SAFE>(pl, pos * nx + i0 + c),
                                );
                            }
                        }
                        fft_pencils::<SAFE>(&mut x, &mut y, ny, b, roots, dir);
                        for pos in 0..ny {
                            for c in 0..b {
                                st::<_, SAFE>(
                                    pl,
                                    pos * nx + i0 + c,
                                    ld::<_, SAFE>(&x, pos * b + c),
                                );
                            }
                        }
                    }
                }
            });
        }
        2 => {
            let b = FFTBLOCK.min(nx);
            let roots = &plan.roots[2];
            pool.par_map_disjoint(0..ny, &mut grid.data, |j, g| {
                let mut x = vec![Complex::ZERO; nz * b];
                let mut y = vec![Complex::ZERO; nz * b];
                for i0 in (0..nx).step_by(b) {
                    // SAFETY: index j touches only elements i + nx * (j + ny * k),
                    // which no other j addresses; the view asserts bounds.
                    unsafe {
                        for pos in 0..nz {
                            let base = i0 + nx * (j + ny * pos);
                            for c in 0..b {
                                st::<_, SAFE>(&mut x, pos * b + c, g.read(base + c));
                            }
                        }
                        fft_pencils::<SAFE>(&mut x, &mut y, nz, b, roots, dir);
                        for pos in 0..nz {
                            let base = i0 + nx * (j + ny * pos);
                            for c in 0..b {
                                g.write(base + c, ld::<_, SAFE>(&x, pos * b + c));
                            }
                        }
                    }
                }
            });
        }
        _ => panic!("dimension {dim} out of range"),
    }
}

/// Full 3-D transform. The inverse is unscaled.
pub fn fft3d<const SAFE: bool>(
    pool: &Pool,
    grid: &mut ComplexGrid3,
    dir: FftDirection,
    plan: &FftPlan,
) {
    match dir {
        FftDirection::Forward => {
            for d in 0..3 {
                fft_dim::<SAFE>(pool, grid, d, dir, plan);
            }
        }
        FftDirection::Inverse => {
            for d in (0..3).rev() {
                fft_dim::<SAFE>(pool, grid, d, dir, plan);
            }
        }
    }
}

fn fft3d_mode(
    pool: &Pool,
    grid: &mut ComplexGrid3,
    dir: FftDirection,
    plan: &FftPlan,
    mode: ExecMode,
) {
    match mode {
        ExecMode::Safe => fft3d::<true>(pool, grid, dir, plan),
        ExecMode::Unchecked => fft3d::<false>(pool, grid, dir, plan),
    }
}

/// `u0 *= table^step`, then `u1 = u0`.
pub fn evolve(pool: &Pool, u0: &mut ComplexGrid3, u1: &mut ComplexGrid3, table: &[f64], step: i32) {
    let plane = u0.nx * u0.ny;
    pool.par_chunks_mut(&mut u0.data, plane, |k, pl| {
        let t = &table[k * plane..(k + 1) * plane];
        for (v, &f) in pl.iter_mut().zip(t) {
            *v = v.scale(f.powi(step));
        }
    });
    let src = &u0.data;
    pool.par_chunks_mut(&mut u1.data, plane, |k, pl| {
        pl.copy_from_slice(&src[k * plane..(k + 1) * plane]);
    });
}

/// Sum of 1024 scattered elements divided by the grid volume.
pub fn checksum(pool: &Pool, grid: &ComplexGrid3) -> Complex {
    let sum = pool.par_map_reduce(
        1..1025,
        Complex::ZERO,
        |j| grid.data[grid.index(j % grid.nx, (3 * j) % grid.ny, (5 * j) % grid.nz)],
        |a, b| a + b,
    );
    sum.scale(1.0 / grid.len() as f64)
}

pub fn verify(class: ProblemClass, sums: &[Complex]) -> bool {
    let p = params(class);
    sums.len() == p.niter
        && sums.iter().zip(p.checksums).all(|(c, &(re, im))| {
            let r = Complex::new(re, im);
            let err = (*c - r).abs() / r.abs();
            err.is_finite() && err <= EPSILON
        })
}

pub fn flops(p: &FtParams) -> f64 {
    let n = (p.nx * p.ny * p.nz) as f64;
    n * (14.8157 + 7.19641 * n.ln() + (5.23518 + 7.21113 * n.ln()) * p.niter as f64)
}

/// Forward transform followed by `niter` evolve/inverse/checksum steps.
pub fn solve(
    pool: &Pool,
    p: &FtParams,
    u0: &mut ComplexGrid3,
    u1: &mut ComplexGrid3,
    table: &[f64],
    plan: &FftPlan,
    mode: ExecMode,
) -> Vec<Complex> {
    fft3d_mode(pool, u0, FftDirection::Forward, plan, mode);
    let mut sums = Vec::with_capacity(p.niter);
    for _ in 0..p.niter {
        evolve(pool, u0, u1, table, 1);
        fft3d_mode(pool, u1, FftDirection::Inverse, plan, mode);
        sums.push(checksum(pool, u1));
    }
    sums
}

pub fn run(class: ProblemClass, pool: &Pool, mode: ExecMode) -> Result<BenchmarkResult> {
    let p = params(class);
    let (sums, seconds) = run_checksums(&p, pool, mode);
    Ok(finish(
        "FT",
        class,
        format!("{}x{}x{}", p.nx, p.ny, p.nz),
        p.niter,
        seconds,
        flops(&p),
        "floating point",
        verify(class, &sums),
        pool,
        mode,
    ))
}

/// Runs the benchmark and returns the checksums with the timed seconds.
pub fn run_checksums(p: &FtParams, pool: &Pool, mode: ExecMode) -> (Vec<Complex>, f64) {
    let mut u0 = ComplexGrid3::zeros(p.nx, p.ny, p.nz);
    let mut u1 = ComplexGrid3::zeros(p.nx, p.ny, p.nz);
    let plan = FftPlan::new(p.nx, p.ny, p.nz);
    let table = exponent_table(pool, p.nx, p.ny, p.nz);

    // Untimed pass over the transform touches all memory once.
    compute_initial_conditions(pool, &mut u0);
    fft3d_mode(pool, &mut u0, FftDirection::Forward, &plan, mode);
    compute_initial_conditions(pool, &mut u0);

    let mut timers = TimerSet::new(1);
    timers.start(0);
    let sums = solve(pool, p, &mut u0, &mut u1, &table, &plan, mode);
    timers.stop(0);
    (sums, timers.read(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::runtime::PoolConfig;

    fn pencil_fft(v: &[Complex], dir: FftDirection) -> Vec<Complex> {
        let n = v.len();
        let plan = FftPlan::new(n, 1, 1);
        let mut x = v.to_vec();
        let mut y = vec![Complex::ZERO; n];
        fft_pencils::<true>(&mut x, &mut y, n, 1, &plan.roots[0], dir);
        x
    }

    #[test]
    fn delta_gives_flat_spectrum() {
        let mut v = vec![Complex::ZERO; 8];
        v[0] = Complex::new(1.0, 0.0);
        for c in pencil_fft(&v, FftDirection::Forward) {
            assert!((c.re - 1.0).abs() < 1e-15 && c.im.abs() < 1e-15);
        }
    }

    #[test]
    fn pencil_matches_naive_dft() {
        let mut s = RandomStream::new(SEED, A);
        for n in [2usize, 4, 16, 64] {
            let v: Vec<Complex> = (0..n)
                .map(|_| Complex::new(s.next_f64(), s.next_f64()))
                .collect();
            let got = pencil_fft(&v, FftDirection::Forward);
            for (k, g) in got.iter().enumerate() {
                let mut e = Complex::ZERO;
                for (j, x) in v.iter().enumerate() {
                    let th = -2.0 * std::f64::consts::PI * ((j * k) % n) as f64 / n as f64;
                    e += *x * Complex::cis(th);
                }
                assert!((*g - e).abs() < 1e-12, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn initial_conditions_independent_of_workers() {
        let mut seq = ComplexGrid3::zeros(8, 4, 4);
        compute_initial_conditions(&Pool::sequential(), &mut seq);
        let mut s = RandomStream::new(SEED, A);
        let stream = s.take_vec(2 * 8 * 4 * 4);
        for (c, pair) in seq.data.iter().zip(stream.chunks_exact(2)) {
            assert_eq!((c.re, c.im), (pair[0], pair[1]));
        }
        let mut par = ComplexGrid3::zeros(8, 4, 4);
        compute_initial_conditions(&Pool::new(PoolConfig::new(4)).unwrap(), &mut par);
        assert_eq!(seq, par);
    }

    #[test]
    fn third_dimension_parallel_equals_sequential() {
        let mut g = ComplexGrid3::zeros(32, 16, 8);
        compute_initial_conditions(&Pool::sequential(), &mut g);
        let plan = FftPlan::new(32, 16, 8);
        let mut seq = g.clone();
        fft_dim::<true>(
            &Pool::sequential(),
            &mut seq,
            2,
            FftDirection::Forward,
            &plan,
        );
        for w in [2, 4, 8] {
            let mut par = g.clone();
            fft_dim::<true>(
                &Pool::new(PoolConfig::new(w)).unwrap(),
                &mut par,
                2,
                FftDirection::Forward,
                &plan,
            );
            assert_eq!(seq, par);
        }
    }

    #[test]
    fn safe_and_unchecked_transforms_agree() {
        let mut g = ComplexGrid3::zeros(16, 8, 32);
        compute_initial_conditions(&Pool::sequential(), &mut g);
        let plan = FftPlan::new(16, 8, 32);
        let mut a = g.clone();
        let mut b = g;
        fft3d::<true>(&Pool::sequential(), &mut a, FftDirection::Forward, &plan);
        fft3d::<false>(&Pool::sequential(), &mut b, FftDirection::Forward, &plan);
        assert_eq!(a, b);
    }

    #[test]
    fn evolve_exponents_add() {
        let pool = Pool::sequential();
        let mut g = ComplexGrid3::zeros(8, 8, 8);
        compute_initial_conditions(&pool, &mut g);
        let table = exponent_table(&pool, 8, 8, 8);
        assert!(table.iter().all(|&t| t > 0.0 && t <= 1.0));
        assert_eq!(table[0], 1.0);

        let mut copy = g.clone();
        let mut scratch = g.clone();
        evolve(&pool, &mut copy, &mut scratch, &table, 0);
        assert_eq!(scratch, g);

        let mut once = g.clone();
        let mut twice = g.clone();
        let mut out = g.clone();
        evolve(&pool, &mut once, &mut out, &table, 2);
        evolve(&pool, &mut twice, &mut scratch, &table, 1);
        evolve(&pool, &mut twice, &mut scratch, &table, 1);
        for (a, b) in out.data.iter().zip(&scratch.data) {
            assert!((*a - *b).abs() <= 1e-15 * a.abs());
        }
    }

    #[test]
    fn zero_grid_checksum() {
        let g = ComplexGrid3::zeros(8, 8, 8);
        assert_eq!(checksum(&Pool::sequential(), &g), Complex::ZERO);
    }

    #[test]
    fn class_s_verifies() {
        let r = run(ProblemClass::S, &Pool::sequential(), ExecMode::Safe).unwrap();
        assert!(r.verified);
    }
}
