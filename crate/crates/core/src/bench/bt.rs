//! BT: implicit ADI solver for the compressible Navier-Stokes equations,
//! factored into block-tridiagonal systems of 5x5 blocks along x, y and z.

use super::cfd::{self, binvcrhs, binvrhs, matmul_sub, matvec_sub, Aux, Consts, M5, V5};
use super::{finish, ExecMode};
use crate::common::{BenchmarkResult, ProblemClass, TimerSet};
use crate::error::Result;
use crate::runtime::Pool;

pub const EPSILON: f64 = 1e-8;

#[derive(Debug, Clone, Copy)]
pub struct BtParams {
    pub n: usize,
    pub dt: f64,
    pub niter: usize,
    pub xcr: V5,
    pub xce: V5,
}

#[allow(clippy::excessive_precision)]
pub fn params(class: ProblemClass) -> BtParams {
    use ProblemClass::*;
    match class {
        S => BtParams {
            n: 12,
            dt: 0.01,
            niter: 60,
            xcr: [
                1.7034283709541311e-01,
                1.2975252070034097e-02,
                3.2527926989486055e-02,
                2.6436421275166801e-02,
                1.9211784131744430e-01,
            ],
            xce: [
                4.9976913345811579e-04,
                4.5195666782961927e-05,
                7.3973765172921357e-05,
                7.3821238632439731e-05,
                8.9269630987491446e-04,
            ],
        },
        W => BtParams {
            n: 24,
            dt: 0.0008,
            niter: 200,
            xcr: [
                0.1125590409344e+03,
                0.1180007595731e+02,
                0.2710329767846e+02,
                0.2469174937669e+02,
                0.2638427874317e+03,
            ],
            xce: [
                0.4419655736008e+01,
                0.4638531260002e+00,
                0.1011551749967e+01,
                0.9235878729944e+00,
                0.1018045837718e+02,
            ],
        },
        A => BtParams {
            n: 64,
            dt: 0.0008,
            niter: 200,
            xcr: [
                1.0806346714637264e+02,
                1.1319730901220813e+01,
                2.5974354511582465e+01,
                2.3665622544678910e+01,
                2.5278963211748344e+02,
            ],
            xce: [
                4.2348416040525025e+00,
                4.4390282496995698e-01,
                9.6692480136345650e-01,
                8.8302063039765474e-01,
                9.7379901770829278e+00,
            ],
        },
        B => BtParams {
            n: 102,
            dt: 0.0003,
            niter: 200,
            xcr: [
                1.4233597229287254e+03,
                9.9330522590150238e+01,
                3.5646025644535285e+02,
                3.2485447959084092e+02,
                3.2707541254659363e+03,
            ],
            xce: [
                5.2969847140936856e+01,
                4.4632896115670668e+00,
                1.3122573342210174e+01,
                1.2006925323559144e+01,
                1.2459576151035986e+02,
            ],
        },
        C => BtParams {
            n: 162,
            dt: 0.0001,
            niter: 200,
            xcr: [
                0.62398116551764615e+04,
                0.50793239190423964e+03,
                0.15423530093013596e+04,
                0.13302387929291190e+04,
                0.11604087428436455e+05,
            ],
            xce: [
                0.16462008369091265e+03,
                0.11497107903824313e+02,
                0.41207446207461508e+02,
                0.37087651059694167e+02,
                0.36211053051841265e+03,
            ],
        },
    }
}

/// Block-tridiagonal solve by forward elimination and back substitution.
/// `aa`, `bb`, `cc` are the sub-, main and super-diagonal blocks; `bb` and
/// `cc` are overwritten. No pivoting.
pub fn block_tridiag_solve(aa: &[M5], bb: &mut [M5], cc: &mut [M5], rhs: &mut [V5]) {
    let n = rhs.len();
    assert!(n >= 2 && aa.len() == n && bb.len() == n && cc.len() == n);
    binvcrhs(&mut bb[0], &mut cc[0], &mut rhs[0]);
    for i in 1..n - 1 {
        let prev = rhs[i - 1];
        matvec_sub(&aa[i], &prev, &mut rhs[i]);
        let cprev = cc[i - 1];
        matmul_sub(&aa[i], &cprev, &mut bb[i]);
        binvcrhs(&mut bb[i], &mut cc[i], &mut rhs[i]);
    }
    let last = n - 1;
    let prev = rhs[last - 1];
    matvec_sub(&aa[last], &prev, &mut rhs[last]);
    let cprev = cc[last - 1];
    matmul_sub(&aa[last], &cprev, &mut bb[last]);
    binvrhs(&mut bb[last], &mut rhs[last]);
    for i in (0..last).rev() {
        let next = rhs[i + 1];
        matvec_sub(&cc[i], &next, &mut rhs[i]);
    }
}

const IDENTITY: M5 = {
    let mut m = [[0.0; 5]; 5];
    let mut i = 0;
    while i < 5 {
        m[i][i] = 1.0;
        i += 1;
    }
    m
};

/// Per-line scratch, reused across lines.
struct LineSolver {
    fjac: Vec<M5>,
    njac: Vec<M5>,
    aa: Vec<M5>,
    bb: Vec<M5>,
    cc: Vec<M5>,
    u: Vec<V5>,
    r: Vec<V5>,
}

impl LineSolver {
    fn new(n: usize) -> Self {
        Self {
            fjac: vec![[[0.0; 5]; 5]; n],
            njac: vec![[[0.0; 5]; 5]; n],
            aa: vec![[[0.0; 5]; 5]; n],
            bb: vec![[[0.0; 5]; 5]; n],
            cc: vec![[[0.0; 5]; 5]; n],
            u: vec![[0.0; 5]; n],
            r: vec![[0.0; 5]; n],
        }
    }

    /// Assembles and solves the system along axis `a` for the line already
    /// gathered into `self.u` and `self.r`.
    fn solve(&mut self, c: &Consts, a: usize) {
        let n = self.u.len();
        for i in 0..n {
            self.fjac[i] = cfd::flux_jacobian(a, &self.u[i]);
            self.njac[i] = cfd::viscous_jacobian(a, &self.u[i], c.c3c4, c.c1345);
        }
        let tmp1 = c.dt * c.t1[a];
        let tmp2 = c.dt * c.t2[a];
        let dd = &c.d[a];
        for e in [0, n - 1] {
            self.aa[e] = [[0.0; 5]; 5];
            self.bb[e] = IDENTITY;
            self.cc[e] = [[0.0; 5]; 5];
        }
        for i in 1..n - 1 {
            let (fm, nm) = (&self.fjac[i - 1], &self.njac[i - 1]);
            let n0 = &self.njac[i];
            let (fp, np) = (&self.fjac[i + 1], &self.njac[i + 1]);
            for r in 0..5 {
                for col in 0..5 {
                    self.aa[i][r][col] = -tmp2 * fm[r][col] - tmp1 * nm[r][col];
                    self.bb[i][r][col] = tmp1 * 2.0 * n0[r][col];
                    self.cc[i][r][col] = tmp2 * fp[r][col] - tmp1 * np[r][col];
                }
                self.aa[i][r][r] -= tmp1 * dd[r];
                self.bb[i][r][r] = 1.0 + tmp1 * 2.0 * n0[r][r] + tmp1 * 2.0 * dd[r];
                self.cc[i][r][r] -= tmp1 * dd[r];
            }
        }
        block_tridiag_solve(&self.aa, &mut self.bb, &mut self.cc, &mut self.r);
    }
}

/// Solution state of one BT run.
pub struct BtState {
    pub c: Consts,
    pub u: Vec<V5>,
    pub rhs: Vec<V5>,
    pub forcing: Vec<V5>,
    aux: Aux,
}

impl BtState {
    pub fn new(pool: &Pool, p: &BtParams) -> Self {
        let c = Consts::new(p.n, p.dt);
        let pts = c.points();
        let mut s = Self {
            u: vec![[1.0; 5]; pts],
            rhs: vec![[0.0; 5]; pts],
            forcing: vec![[0.0; 5]; pts],
            aux: Aux::new(pts),
            c,
        };
        cfd::initialize(pool, &s.c, &mut s.u);
        cfd::exact_rhs(pool, &s.c, &mut s.forcing);
        s
    }

    pub fn reinitialize(&mut self, pool: &Pool) {
        cfd::initialize(pool, &self.c, &mut self.u);
    }

    pub fn compute_rhs(&mut self, pool: &Pool) {
        cfd::compute_rhs(
            pool,
            &self.c,
            &self.u,
            &self.forcing,
            &mut self.aux,
            &mut self.rhs,
        );
    }

    /// Lines along x and y are independent within a k-plane.
    fn solve_in_planes(&mut self, pool: &Pool, a: usize) {
        let c = &self.c;
        let [nx, ny, nz] = c.n;
        let plane = c.plane();
        let u = &self.u;
        pool.par_chunks_mut(&mut self.rhs, plane, |k, pl| {
            if k == 0 || k == nz - 1 {
                return;
            }
            let ulane = &u[k * plane..(k + 1) * plane];
            let (len, outer, s_line, s_outer) = if a == 0 {
                (nx, ny, 1, nx)
            } else {
                (ny, nx, nx, 1)
            };
            let mut ls = LineSolver::new(len);
            for o in 1..outer - 1 {
                for t in 0..len {
                    let q = o * s_outer + t * s_line;
                    ls.u[t] = ulane[q];
                    ls.r[t] = pl[q];
                }
                ls.solve(c, a);
                for t in 1..len - 1 {
                    pl[o * s_outer + t * s_line] = ls.r[t];
                }
            }
        });
    }

    /// Lines along z: each task owns one j and every k.
    fn solve_z(&mut self, pool: &Pool) {
        let c = &self.c;
        let [nx, ny, nz] = c.n;
        let plane = c.plane();
        let u = &self.u;
        pool.par_map_disjoint(1..ny - 1, &mut self.rhs, |j, rhs| {
            let mut ls = LineSolver::new(nz);
            for i in 1..nx - 1 {
                for k in 0..nz {
                    let q = i + nx * j + plane * k;
                    ls.u[k] = u[q];
                    // SAFETY: task j touches only points with this j.
                    ls.r[k] = unsafe { rhs.read(q) };
                }
                ls.solve(c, 2);
                for k in 1..nz - 1 {
                    // SAFETY: as above.
                    unsafe { rhs.write(i + nx * j + plane * k, ls.r[k]) };
                }
            }
        });
    }

    /// One time step.
    pub fn adi(&mut self, pool: &Pool) {
        self.compute_rhs(pool);
        self.solve_in_planes(pool, 0);
        self.solve_in_planes(pool, 1);
        self.solve_z(pool);
        cfd::add(pool, &self.c, &mut self.u, &self.rhs);
    }

    /// Residual norms scaled by 1/dt and error norms.
    pub fn norms(&mut self, pool: &Pool) -> (V5, V5) {
        let xce = cfd::error_norm(pool, &self.c, &self.u);
        self.compute_rhs(pool);
        let mut xcr = cfd::rhs_norm(pool, &self.c, &self.rhs);
        for x in xcr.iter_mut() {
            *x /= self.c.dt;
        }
        (xcr, xce)
    }
}

/// Runs the untimed warm-up step, reinitializes and times `niter` steps.
/// Returns residual norms, error norms and seconds.
pub fn solve(p: &BtParams, pool: &Pool) -> (V5, V5, f64) {
    let mut s = BtState::new(pool, p);
    s.adi(pool);
    s.reinitialize(pool);
    let mut timers = TimerSet::new(1);
    timers.start(0);
    for _ in 0..p.niter {
        s.adi(pool);
    }
    timers.stop(0);
    let secs = timers.read(0);
    let (xcr, xce) = s.norms(pool);
    (xcr, xce, secs)
}

pub fn flops(p: &BtParams) -> f64 {
    let n = p.n as f64;
    p.niter as f64 * (3478.8 * n * n * n - 17655.7 * n * n + 28023.7 * n)
}

pub fn run(class: ProblemClass, pool: &Pool, mode: ExecMode) -> Result<BenchmarkResult> {
    let p = params(class);
    let (xcr, xce, secs) = solve(&p, pool);
    let verified = cfd::verify_norms(&xcr, &xce, &p.xcr, &p.xce, EPSILON);
    Ok(finish(
        "BT",
        class,
        format!("{}x{}x{}", p.n, p.n, p.n),
        p.niter,
        secs,
        flops(&p),
        "floating point",
        verified,
        pool,
        mode,
    ))
}
