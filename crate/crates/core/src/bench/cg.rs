//! CG: smallest-eigenvalue estimate of a random sparse SPD matrix by inverse
//! power iteration, each step solved with 25 conjugate-gradient iterations.

use crate::bench::{finish, ExecMode};
use crate::common::{randlc, verify_scalar, BenchmarkResult, ProblemClass, TimerSet};
use crate::error::Result;
use crate::runtime::Pool;

pub const SEED: f64 = 314_159_265.0;
pub const AMULT: f64 = 1_220_703_125.0;
pub const RCOND: f64 = 0.1;
pub const CGITMAX: usize = 25;
pub const EPSILON: f64 = 1.0e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgParams {
    pub na: usize,
    pub nonzer: usize,
    pub niter: usize,
    pub shift: f64,
    pub zeta_verify: f64,
}

pub fn params(class: ProblemClass) -> CgParams {
    let (na, nonzer, niter, shift, zeta_verify) = match class {
        ProblemClass::S => (1400, 7, 15, 10.0, 8.597_177_507_864_8),
        ProblemClass::W => (7000, 8, 15, 12.0, 10.362_595_087_124),
        ProblemClass::A => (14000, 11, 15, 20.0, 17.130_235_054_029),
        ProblemClass::B => (75000, 13, 75, 60.0, 22.712_745_482_631),
        ProblemClass::C => (150_000, 15, 75, 110.0, 28.973_605_592_845),
    };
    CgParams {
        na,
        nonzer,
        niter,
        shift,
        zeta_verify,
    }
}

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrixCsr {
    pub n: usize,
    pub row_start: Vec<usize>,
    pub col: Vec<usize>,
    pub val: Vec<f64>,
}

impl SparseMatrixCsr {
    pub fn nnz(&self) -> usize {
        self.val.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_start[i]..self.row_start[i + 1];
        (&self.col[r.clone()], &self.val[r])
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        let (c, v) = self.row(i);
        c.binary_search(&j).ok().map(|k| v[k])
    }
}

/// Random sparse vector with `nz` distinct 1-based positions in `1..=n`.
fn sprnvc(n: usize, nz: usize, nn1: usize, tran: &mut f64, v: &mut Vec<f64>, iv: &mut Vec<usize>) {
    v.clear();
    iv.clear();
    while iv.len() < nz {
        let vecelt = randlc(tran, AMULT);
        let vecloc = randlc(tran, AMULT);
        let i = (nn1 as f64 * vecloc) as usize + 1;
        if i > n || iv.contains(&i) {
            continue;
        }
        v.push(vecelt);
        iv.push(i);
    }
}

fn vecset(v: &mut Vec<f64>, iv: &mut Vec<usize>, i: usize, val: f64) {
    let mut set = false;
    for (k, &pos) in iv.iter().enumerate() {
        if pos == i {
            v[k] = val;
            set = true;
        }
    }
    if !set {
        v.push(val);
        iv.push(i);
    }
}

/// Generates the benchmark matrix: a weighted sum of outer products of
/// random sparse vectors plus a shifted diagonal. `tran` must be the stream
/// state the reference setup leaves before assembly.
pub fn makea(n: usize, nonzer: usize, shift: f64, tran: &mut f64) -> SparseMatrixCsr {
    let mut nn1 = 1;
    while nn1 < n {
        nn1 *= 2;
    }
    let mut rows: Vec<(Vec<usize>, Vec<f64>)> = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(nonzer + 1);
    let mut iv = Vec::with_capacity(nonzer + 1);
    for iouter in 0..n {
        sprnvc(n, nonzer, nn1, tran, &mut v, &mut iv);
        vecset(&mut v, &mut iv, iouter + 1, 0.5);
        rows.push((iv.iter().map(|&i| i - 1).collect(), v.clone()));
    }
    sparse(n, &rows, shift)
}

fn sparse(n: usize, rows: &[(Vec<usize>, Vec<f64>)], shift: f64) -> SparseMatrixCsr {
    // Upper bound on entries per row.
    let mut rowstr = vec![0usize; n + 1];
    for (acol, _) in rows {
        for &j in acol {
            rowstr[j + 1] += acol.len();
        }
    }
    for j in 1..=n {
        rowstr[j] += rowstr[j - 1];
    }
    let cap = rowstr[n];
    let mut a = vec![0.0; cap];
    let mut colidx: Vec<Option<usize>> = vec![None; cap];
    let mut nzloc = vec![0usize; n];

    let ratio = RCOND.powf(1.0 / n as f64);
    let mut size = 1.0;
    for (i, (acol, aelt)) in rows.iter().enumerate() {
        for (&j, &ej) in acol.iter().zip(aelt) {
            let scale = size * ej;
            for (&jcol, &ejcol) in acol.iter().zip(aelt) {
                let mut va = ejcol * scale;
                if jcol == j && j == i {
                    va = va + RCOND - shift;
                }
                let mut slot = None;
                for k in rowstr[j]..rowstr[j + 1] {
                    match colidx[k] {
                        Some(c) if c > jcol => {
                            for kk in (k..rowstr[j + 1] - 1).rev() {
                                if colidx[kk].is_some() {
                                    a[kk + 1] = a[kk];
                                    colidx[kk + 1] = colidx[kk];
                                }
                            }
                            colidx[k] = Some(jcol);
                            a[k] = 0.0;
                            slot = Some(k);
                            break;
                        }
                        None => {
                            colidx[k] = Some(jcol);
                            slot = Some(k);
                            break;
                        }
                        Some(c) if c == jcol => {
                            nzloc[j] += 1;
                            slot = Some(k);
                            break;
                        }
                        Some(_) => {}
                    }
                }
                let k = slot.expect("row storage overflow during assembly");
                a[k] += va;
            }
        }
        size *= ratio;
    }

    // Squeeze out the unused tail of each row.
    for j in 1..n {
        nzloc[j] += nzloc[j - 1];
    }
    let mut val = Vec::new();
    let mut col = Vec::new();
    let mut row_start = vec![0usize; n + 1];
    for j in 0..n {
        let used = (rowstr[j + 1] - rowstr[j]) - (nzloc[j] - if j > 0 { nzloc[j - 1] } else { 0 });
        for k in rowstr[j]..rowstr[j] + used {
            val.push(a[k]);
            col.push(colidx[k].expect("hole inside a row"));
        }
        row_start[j + 1] = val.len();
    }
    SparseMatrixCsr {
        n,
        row_start,
        col,
        val,
    }
}

/// Builds the class matrix from a fresh stream, consuming the one draw the
/// reference setup makes before assembly.
pub fn class_matrix(p: &CgParams) -> SparseMatrixCsr {
    let mut tran = SEED;
    randlc(&mut tran, AMULT);
    makea(p.na, p.nonzer, p.shift, &mut tran)
}

fn grain(pool: &Pool, n: usize) -> usize {
    let w = pool.workers();
    if w == 1 {
        n.max(1)
    } else {
        n.div_ceil(4 * w).max(64)
    }
}

/// `out = A p`, one row per output element.
pub fn spmv(pool: &Pool, a: &SparseMatrixCsr, p: &[f64], out: &mut [f64]) {
    let g = grain(pool, a.n);
    pool.par_chunks_mut(out, g, |c, chunk| {
        let base = c * g;
        for (r, o) in chunk.iter_mut().enumerate() {
            let (cols, vals) = a.row(base + r);
            let mut sum = 0.0;
            for (&j, &v) in cols.iter().zip(vals) {
                sum += v * p[j];
            }
            *o = sum;
        }
    });
}

fn dot_with<F>(pool: &Pool, n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let g = grain(pool, n);
    let chunks = n.div_ceil(g);
    pool.par_map_reduce(
        0..chunks,
        0.0,
        |c| {
            let mut s = 0.0;
            for i in c * g..((c + 1) * g).min(n) {
                s += f(i);
            }
            s
        },
        |x, y| x + y,
    )
}

pub fn dot(pool: &Pool, x: &[f64], y: &[f64]) -> f64 {
    dot_with(pool, x.len(), |i| x[i] * y[i])
}

/// Work vectors of the solver.
#[derive(Debug, Clone)]
pub struct CgState {
    pub x: Vec<f64>,
    pub z: Vec<f64>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub r: Vec<f64>,
    pub zeta: f64,
    pub rnorm: f64,
}

impl CgState {
    pub fn new(n: usize) -> Self {
        Self {
            x: vec![1.0; n],
            z: vec![0.0; n],
            p: vec![0.0; n],
            q: vec![0.0; n],
            r: vec![0.0; n],
            zeta: 0.0,
            rnorm: 0.0,
        }
    }
}

/// 25 CG iterations on `A z = x` from `z = 0`; leaves `z` and returns
/// `||x - A z||`.
pub fn conj_grad(pool: &Pool, a: &SparseMatrixCsr, s: &mut CgState) -> f64 {
    let g = grain(pool, a.n);
    let x = &s.x;
    {
        let (q, z, r, p) = (&mut s.q, &mut s.z, &mut s.r, &mut s.p);
        pool.par_chunks_mut(q, g, |_, c| c.fill(0.0));
        pool.par_chunks_mut(z, g, |_, c| c.fill(0.0));
        pool.par_chunks_mut(r, g, |ci, c| {
            c.copy_from_slice(&x[ci * g..ci * g + c.len()])
        });
        p.copy_from_slice(r);
    }
    let mut rho = dot(pool, &s.r, &s.r);

    for _ in 0..CGITMAX {
        spmv(pool, a, &s.p, &mut s.q);
        let d = dot(pool, &s.p, &s.q);
        let alpha = rho / d;
        let rho0 = rho;
        {
            let (p, q) = (&s.p, &s.q);
            pool.par_chunks_mut(&mut s.z, g, |ci, c| {
                for (k, zi) in c.iter_mut().enumerate() {
                    *zi += alpha * p[ci * g + k];
                }
            });
            pool.par_chunks_mut(&mut s.r, g, |ci, c| {
                for (k, ri) in c.iter_mut().enumerate() {
                    *ri -= alpha * q[ci * g + k];
                }
            });
        }
        rho = dot(pool, &s.r, &s.r);
        if rho == 0.0 {
            break;
        }
        let beta = rho / rho0;
        let r = &s.r;
        pool.par_chunks_mut(&mut s.p, g, |ci, c| {
            for (k, pi) in c.iter_mut().enumerate() {
                *pi = r[ci * g + k] + beta * *pi;
            }
        });
    }

    spmv(pool, a, &s.z, &mut s.r);
    let (x, r) = (&s.x, &s.r);
    let sum = dot_with(pool, a.n, |i| {
        let d = x[i] - r[i];
        d * d
    });
    s.rnorm = sum.sqrt();
    s.rnorm
}

/// One power-iteration step: solve, update zeta, renormalize x.
pub fn outer_step(pool: &Pool, a: &SparseMatrixCsr, s: &mut CgState, shift: f64) -> f64 {
    conj_grad(pool, a, s);
    let norm_temp1 = dot(pool, &s.x, &s.z);
    let norm_temp2 = 1.0 / dot(pool, &s.z, &s.z).sqrt();
    s.zeta = shift + 1.0 / norm_temp1;
    let g = grain(pool, a.n);
    let z = &s.z;
    pool.par_chunks_mut(&mut s.x, g, |ci, c| {
        for (k, xi) in c.iter_mut().enumerate() {
            *xi = norm_temp2 * z[ci * g + k];
        }
    });
    s.zeta
}

/// Runs `niter` outer steps and returns the final zeta.
pub fn outer_loop(
    pool: &Pool,
    a: &SparseMatrixCsr,
    s: &mut CgState,
    niter: usize,
    shift: f64,
) -> f64 {
    for _ in 0..niter {
        outer_step(pool, a, s, shift);
    }
    s.zeta
}

pub fn flops(p: &CgParams) -> f64 {
    let nz = p.nonzer as f64;
    2.0 * p.niter as f64
        * p.na as f64
        * (3.0 + nz * (nz + 1.0) + 25.0 * (5.0 + nz * (nz + 1.0)) + 3.0)
}

pub fn run(class: ProblemClass, pool: &Pool, mode: ExecMode) -> Result<BenchmarkResult> {
    let p = params(class);
    let a = class_matrix(&p);
    let mut s = CgState::new(p.na);

    // Untimed warm-up step touches every code path and page.
    outer_step(pool, &a, &mut s, p.shift);
    s.x.fill(1.0);
    s.zeta = 0.0;

    let mut timers = TimerSet::new(1);
    timers.start(0);
    let zeta = outer_loop(pool, &a, &mut s, p.niter, p.shift);
    timers.stop(0);

    Ok(finish(
        "CG",
        class,
        p.na.to_string(),
        p.niter,
        timers.read(0),
        flops(&p),
        "floating point",
        verify_scalar(zeta, p.zeta_verify, EPSILON),
        pool,
        mode,
    ))
}
