//! SP: the same equations as BT, diagonalized so that each direction needs
//! three scalar pentadiagonal solves plus two more for the acoustic modes.

#![allow(clippy::needless_range_loop)]

use super::cfd::{self, Aux, Consts, C2, V5};
use super::{finish, ExecMode};
use crate::common::{BenchmarkResult, ProblemClass, TimerSet};
use crate::error::Result;
use crate::runtime::Pool;

pub const EPSILON: f64 = 1e-8;

/// Longest supported line; per-line scratch is sized for it.
pub const MAX_LINE: usize = 162;

#[derive(Debug, Clone, Copy)]
pub struct SpParams {
    pub n: usize,
    pub dt: f64,
    pub niter: usize,
    pub xcr: V5,
    pub xce: V5,
}

#[allow(clippy::excessive_precision)]
pub fn params(class: ProblemClass) -> SpParams {
    use ProblemClass::*;
    match class {
        S => SpParams {
            n: 12,
            dt: 0.015,
            niter: 100,
            xcr: [
                2.7470315451339479e-02,
                1.0360746705285417e-02,
                1.6235745065095532e-02,
                1.5840557224455615e-02,
                3.4849040609362460e-02,
            ],
            xce: [
                2.7289258557377227e-05,
                1.0364446640837285e-05,
                1.6154798287166471e-05,
                1.5750704994480102e-05,
                3.4177666183390531e-05,
            ],
        },
        W => SpParams {
            n: 36,
            dt: 0.0015,
            niter: 400,
            xcr: [
                0.1893253733584e-02,
                0.1717075447775e-03,
                0.2778153350936e-03,
                0.2887475409984e-03,
                0.3143611161242e-02,
            ],
            xce: [
                0.7542088599534e-04,
                0.6512852253086e-05,
                0.1049092285688e-04,
                0.1128838671535e-04,
                0.1212845639773e-03,
            ],
        },
        A => SpParams {
            n: 64,
            dt: 0.0015,
            niter: 400,
            xcr: [
                2.4799822399300195,
                1.1276337964368832,
                1.5028977888770491,
                1.4217816211695179,
                2.1292113035138280,
            ],
            xce: [
                1.0900140297820550e-04,
                3.7343951769282091e-05,
                5.0092785406541633e-05,
                4.7671093939528255e-05,
                1.3621613399213001e-04,
            ],
        },
        B => SpParams {
            n: 102,
            dt: 0.001,
            niter: 400,
            xcr: [
                0.6903293579998e+02,
                0.3095134488084e+02,
                0.4103336647017e+02,
                0.3864769009604e+02,
                0.5643482272596e+02,
            ],
            xce: [
                0.9810006190188e-02,
                0.1022827905670e-02,
                0.1720597911692e-02,
                0.1694479428231e-02,
                0.1847456263981e-01,
            ],
        },
        C => SpParams {
            n: 162,
            dt: 0.00067,
            niter: 400,
            xcr: [
                0.5881691581829e+03,
                0.2454417603569e+03,
                0.3293829191851e+03,
                0.3081924971891e+03,
                0.4597223799176e+03,
            ],
            xce: [
                0.2598120500183e+00,
                0.2590888922315e-01,
                0.5132886416320e-01,
                0.4806073419454e-01,
                0.5483377491301e+00,
            ],
        },
    }
}

/// Solves a pentadiagonal system in place for the components `comps` of
/// `rhs`. Row `i` of `lhs` holds the coefficients of unknowns `i-2..=i+2`.
/// No pivoting; `lhs` is overwritten.
pub fn penta_solve(
    lhs: &mut [[f64; 5]],
    rhs: &mut [V5],
    comps: std::ops::Range<usize>,
    divide_last: bool,
) {
    let n = rhs.len();
    assert!(n >= 3 && lhs.len() == n);
    for i in 0..n - 2 {
        let (i1, i2) = (i + 1, i + 2);
        let fac1 = 1.0 / lhs[i][2];
        lhs[i][3] *= fac1;
        lhs[i][4] *= fac1;
        for m in comps.clone() {
            rhs[i][m] *= fac1;
        }
        lhs[i1][2] -= lhs[i1][1] * lhs[i][3];
        lhs[i1][3] -= lhs[i1][1] * lhs[i][4];
        for m in comps.clone() {
            rhs[i1][m] -= lhs[i1][1] * rhs[i][m];
        }
        lhs[i2][1] -= lhs[i2][0] * lhs[i][3];
        lhs[i2][2] -= lhs[i2][0] * lhs[i][4];
        for m in comps.clone() {
            rhs[i2][m] -= lhs[i2][0] * rhs[i][m];
        }
    }
    let (i, i1) = (n - 2, n - 1);
    let fac1 = 1.0 / lhs[i][2];
    lhs[i][3] *= fac1;
    lhs[i][4] *= fac1;
    for m in comps.clone() {
        rhs[i][m] *= fac1;
    }
    lhs[i1][2] -= lhs[i1][1] * lhs[i][3];
    lhs[i1][3] -= lhs[i1][1] * lhs[i][4];
    for m in comps.clone() {
        rhs[i1][m] -= lhs[i1][1] * rhs[i][m];
    }
    if divide_last {
        for m in comps.clone() {
            rhs[i1][m] /= lhs[i1][2];
        }
    } else {
        let fac2 = 1.0 / lhs[i1][2];
        for m in comps.clone() {
            rhs[i1][m] *= fac2;
        }
    }
    for m in comps.clone() {
        rhs[i][m] -= lhs[i][3] * rhs[i1][m];
    }
    for i in (0..n - 2).rev() {
        for m in comps.clone() {
            rhs[i][m] -= lhs[i][3] * rhs[i + 1][m] + lhs[i][4] * rhs[i + 2][m];
        }
    }
}

/// Stack-resident scratch for one line.
struct Line {
    n: usize,
    lhs: [[f64; 5]; MAX_LINE],
    lhsp: [[f64; 5]; MAX_LINE],
    lhsm: [[f64; 5]; MAX_LINE],
    cv: [f64; MAX_LINE],
    rhon: [f64; MAX_LINE],
    speed: [f64; MAX_LINE],
    r: [V5; MAX_LINE],
}

impl Line {
    fn new(n: usize) -> Self {
        assert!(n <= MAX_LINE, "line length {n} exceeds {MAX_LINE}");
        Self {
            n,
            lhs: [[0.0; 5]; MAX_LINE],
            lhsp: [[0.0; 5]; MAX_LINE],
            lhsm: [[0.0; 5]; MAX_LINE],
            cv: [0.0; MAX_LINE],
            rhon: [0.0; MAX_LINE],
            speed: [0.0; MAX_LINE],
            r: [[0.0; 5]; MAX_LINE],
        }
    }

    /// Gathers coefficients and right-hand side for the line of points
    /// `base + t*stride`.
    fn gather(
        &mut self,
        c: &Consts,
        a: usize,
        aux: &Aux,
        rhs: impl Fn(usize) -> V5,
        base: usize,
        stride: usize,
    ) {
        let v = a + 1;
        let d = &c.d[a];
        for t in 0..self.n {
            let p = base + t * stride;
            let ru1 = c.c3c4 * aux.rho_i[p];
            self.cv[t] = aux.vel[a][p];
            self.rhon[t] = (d[v] + c.con43 * ru1)
                .max(d[4] + c.c1c5 * ru1)
                .max((c.dmax[a] + ru1).max(d[0]));
            self.speed[t] = aux.speed[p];
            self.r[t] = rhs(p);
        }
    }

    fn solve(&mut self, c: &Consts, a: usize) {
        let n = self.n;
        let (dtt1, dtt2, c2dtt1) = (c.dtt1[a], c.dtt2[a], c.c2dtt1[a]);
        let lhs = &mut self.lhs[..n];
        let edge = [0.0, 0.0, 1.0, 0.0, 0.0];
        lhs[0] = edge;
        lhs[n - 1] = edge;
        for t in 1..n - 1 {
            lhs[t] = [
                0.0,
                -dtt2 * self.cv[t - 1] - dtt1 * self.rhon[t - 1],
                1.0 + c2dtt1 * self.rhon[t],
                dtt2 * self.cv[t + 1] - dtt1 * self.rhon[t + 1],
                0.0,
            ];
        }
        let (z1, z4, z5, z6) = (c.comz1, c.comz4, c.comz5, c.comz6);
        lhs[1][2] += z5;
        lhs[1][3] -= z4;
        lhs[1][4] += z1;
        lhs[2][1] -= z4;
        lhs[2][2] += z6;
        lhs[2][3] -= z4;
        lhs[2][4] += z1;
        for row in lhs.iter_mut().take(n - 3).skip(3) {
            row[0] += z1;
            row[1] -= z4;
            row[2] += z6;
            row[3] -= z4;
            row[4] += z1;
        }
        let t = n - 3;
        lhs[t][0] += z1;
        lhs[t][1] -= z4;
        lhs[t][2] += z6;
        lhs[t][3] -= z4;
        lhs[t + 1][0] += z1;
        lhs[t + 1][1] -= z4;
        lhs[t + 1][2] += z5;

        self.lhsp[0] = edge;
        self.lhsp[n - 1] = edge;
        self.lhsm[0] = edge;
        self.lhsm[n - 1] = edge;
        for t in 1..n - 1 {
            let l = lhs[t];
            self.lhsp[t] = [
                l[0],
                l[1] - dtt2 * self.speed[t - 1],
                l[2],
                l[3] + dtt2 * self.speed[t + 1],
                l[4],
            ];
            self.lhsm[t] = [
                l[0],
                l[1] + dtt2 * self.speed[t - 1],
                l[2],
                l[3] - dtt2 * self.speed[t + 1],
                l[4],
            ];
        }
        let r = &mut self.r[..n];
        penta_solve(lhs, r, 0..3, false);
        penta_solve(&mut self.lhsp[..n], r, 3..4, true);
        penta_solve(&mut self.lhsm[..n], r, 4..5, true);
    }
}

/// Transforms the right-hand side into the x characteristic variables.
fn txinvr(c: &Consts, aux: &Aux, p: usize, r: &mut V5) {
    let ru1 = aux.rho_i[p];
    let (uu, vv, ww) = (aux.vel[0][p], aux.vel[1][p], aux.vel[2][p]);
    let ac = aux.speed[p];
    let ac2inv = ac * ac;
    let [r1, r2, r3, r4, r5] = *r;
    let t1 = C2 / ac2inv * (aux.qs[p] * r1 - uu * r2 - vv * r3 - ww * r4 + r5);
    let t2 = c.bt * ru1 * (uu * r1 - r2);
    let t3 = (c.bt * ru1 * ac) * t1;
    *r = [
        r1 - t1,
        -ru1 * (ww * r1 - r4),
        ru1 * (vv * r1 - r3),
        -t2 + t3,
        t2 + t3,
    ];
}

fn ninvr(c: &Consts, r: &mut V5) {
    let [r1, r2, r3, r4, r5] = *r;
    let t1 = c.bt * r3;
    let t2 = 0.5 * (r4 + r5);
    *r = [-r2, r1, c.bt * (r4 - r5), -t1 + t2, t1 + t2];
}

fn pinvr(c: &Consts, r: &mut V5) {
    let [r1, r2, r3, r4, r5] = *r;
    let t1 = c.bt * r1;
    let t2 = 0.5 * (r4 + r5);
    *r = [c.bt * (r4 - r5), -r3, r2, -t1 + t2, t1 + t2];
}

/// Back to conserved variables after the z sweep.
fn tzetar(c: &Consts, aux: &Aux, u: &V5, p: usize, r: &mut V5) {
    let (xvel, yvel, zvel) = (aux.vel[0][p], aux.vel[1][p], aux.vel[2][p]);
    let ac = aux.speed[p];
    let ac2u = ac * ac;
    let [r1, r2, r3, r4, r5] = *r;
    let uzik1 = u[0];
    let btuz = c.bt * uzik1;
    let t1 = btuz / ac * (r4 + r5);
    let t2 = r3 + t1;
    let t3 = btuz * (r4 - r5);
    *r = [
        t2,
        -uzik1 * r2 + xvel * t2,
        uzik1 * r1 + yvel * t2,
        zvel * t2 + t3,
        uzik1 * (-xvel * r2 + yvel * r1) + aux.qs[p] * t2 + c.c2iv * ac2u * t1 + zvel * t3,
    ];
}

pub struct SpState {
    pub c: Consts,
    pub u: Vec<V5>,
    pub rhs: Vec<V5>,
    pub forcing: Vec<V5>,
    aux: Aux,
}

impl SpState {
    pub fn new(pool: &Pool, p: &SpParams) -> Self {
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

    /// txinvr, then x lines with ninvr, then y lines with pinvr, one
    /// k-plane per task.
    fn sweep_planes(&mut self, pool: &Pool) {
        let c = &self.c;
        let aux = &self.aux;
        let [nx, ny, nz] = c.n;
        let plane = c.plane();
        pool.par_chunks_mut(&mut self.rhs, plane, |k, pl| {
            if k == 0 || k == nz - 1 {
                return;
            }
            let base = k * plane;
            for j in 1..ny - 1 {
                for i in 1..nx - 1 {
                    txinvr(c, aux, base + i + nx * j, &mut pl[i + nx * j]);
                }
            }
            let mut line = Line::new(nx);
            for j in 1..ny - 1 {
                line.gather(c, 0, aux, |p| pl[p - base], base + nx * j, 1);
                line.solve(c, 0);
                pl[nx * j + 1..nx * j + nx - 1].copy_from_slice(&line.r[1..nx - 1]);
            }
            for j in 1..ny - 1 {
                for i in 1..nx - 1 {
                    ninvr(c, &mut pl[i + nx * j]);
                }
            }
            let mut line = Line::new(ny);
            for i in 1..nx - 1 {
                line.gather(c, 1, aux, |p| pl[p - base], base + i, nx);
                line.solve(c, 1);
                for j in 1..ny - 1 {
                    pl[i + nx * j] = line.r[j];
                }
            }
            for j in 1..ny - 1 {
                for i in 1..nx - 1 {
                    pinvr(c, &mut pl[i + nx * j]);
                }
            }
        });
    }

    /// z lines with tzetar, one j per task.
    fn sweep_z(&mut self, pool: &Pool) {
        let c = &self.c;
        let aux = &self.aux;
        let u = &self.u;
        let [nx, ny, nz] = c.n;
        let plane = c.plane();
        pool.par_map_disjoint(1..ny - 1, &mut self.rhs, |j, rhs| {
            let mut line = Line::new(nz);
            for i in 1..nx - 1 {
                let base = i + nx * j;
                // SAFETY: task j touches only points with this j.
                line.gather(c, 2, aux, |p| unsafe { rhs.read(p) }, base, plane);
                line.solve(c, 2);
                for k in 1..nz - 1 {
                    let p = base + plane * k;
                    let mut r = line.r[k];
                    tzetar(c, aux, &u[p], p, &mut r);
                    // SAFETY: as above.
                    unsafe { rhs.write(p, r) };
                }
            }
        });
    }

    pub fn adi(&mut self, pool: &Pool) {
        self.compute_rhs(pool);
        self.sweep_planes(pool);
        self.sweep_z(pool);
        cfd::add(pool, &self.c, &mut self.u, &self.rhs);
    }

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

pub fn solve(p: &SpParams, pool: &Pool) -> (V5, V5, f64) {
    let mut s = SpState::new(pool, p);
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

pub fn flops(p: &SpParams) -> f64 {
    let n = p.n as f64;
    p.niter as f64 * (881.174 * n * n * n - 4683.91 * n * n + 11484.5 * n - 19272.4)
}

/// Per-worker stack reserve for a class: the line scratch lives on the
/// stack and grows with the grid.
pub fn stack_reserve(class: ProblemClass) -> usize {
    match class {
        ProblemClass::B | ProblemClass::C => 32 << 20,
        _ => 4 << 20,
    }
}

pub fn run(class: ProblemClass, pool: &Pool, mode: ExecMode) -> Result<BenchmarkResult> {
    let p = params(class);
    let (xcr, xce, secs) = solve(&p, pool);
    let verified = cfd::verify_norms(&xcr, &xce, &p.xcr, &p.xce, EPSILON);
    Ok(finish(
        "SP",
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

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Dense Gaussian elimination with partial pivoting.
    fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
        let n = b.len();
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
                .unwrap();
            a.swap(col, piv);
            b.swap(col, piv);
            for r in col + 1..n {
                let f = a[r][col] / a[col][col];
                for cc in col..n {
                    a[r][cc] -= f * a[col][cc];
                }
                b[r] -= f * b[col];
            }
        }
        let mut x = vec![0.0; n];
        for r in (0..n).rev() {
            let s: f64 = (r + 1..n).map(|cc| a[r][cc] * x[cc]).sum();
            x[r] = (b[r] - s) / a[r][r];
        }
        x
    }

    proptest! {
        #[test]
        fn penta_matches_dense(
            n in 3usize..20,
            coefs in proptest::collection::vec(-1.0f64..1.0, 100),
            rhs in proptest::collection::vec(-5.0f64..5.0, 20),
        ) {
            let mut lhs = vec![[0.0; 5]; n];
            let mut dense = vec![vec![0.0; n]; n];
            for i in 0..n {
                for d in 0..5 {
                    let col = i as isize + d as isize - 2;
                    let v = if d == 2 { 6.0 + coefs[5 * i + d] } else { coefs[5 * i + d] };
                    if col >= 0 && (col as usize) < n {
                        lhs[i][d] = v;
                        dense[i][col as usize] = v;
                    }
                }
            }
            let b: Vec<f64> = rhs[..n].to_vec();
            let want = dense_solve(dense, b.clone());
            let mut r: Vec<V5> = b.iter().map(|&x| [x, 2.0 * x, -x, 0.0, 0.0]).collect();
            penta_solve(&mut lhs, &mut r, 0..3, false);
            for i in 0..n {
                prop_assert!((r[i][0] - want[i]).abs() < 1e-10);
                prop_assert!((r[i][1] - 2.0 * want[i]).abs() < 1e-10);
                prop_assert!((r[i][2] + want[i]).abs() < 1e-10);
                prop_assert_eq!(r[i][3], 0.0);
            }
        }
    }

    #[test]
    fn class_s_verifies() {
        let p = params(ProblemClass::S);
        let (xcr, xce, _) = solve(&p, &Pool::sequential());
        assert!(
            cfd::verify_norms(&xcr, &xce, &p.xcr, &p.xce, EPSILON),
            "{xcr:?} {xce:?}"
        );
    }

    #[test]
    fn fields_agree_bitwise_across_workers() {
        let p = params(ProblemClass::S);
        let field = |pool: &Pool| {
            let mut s = SpState::new(pool, &p);
            for _ in 0..3 {
                s.adi(pool);
            }
            s.u
        };
        let base = field(&Pool::sequential());
        for w in [2, 3, 8] {
            let pool = Pool::new(
                crate::runtime::PoolConfig::new(w).stack_size(stack_reserve(ProblemClass::S)),
            )
            .unwrap();
            assert!(field(&pool) == base, "{w} workers");
        }
    }
}
