//! LU: symmetric successive over-relaxation on the same Navier-Stokes
//! system. The lower and upper triangular sweeps carry dependencies in i, j
//! and k; they run as a wavefront over (k, j-block) stages.

#![allow(clippy::needless_range_loop)]

use super::cfd::{self, exact_solution, Consts, C1, C2, C3, C4, C5, M5, V5};
use super::{finish, ExecMode};
use crate::common::{BenchmarkResult, ProblemClass, TimerSet};
use crate::error::Result;
use crate::runtime::{static_partition, Direction, DisjointSlice, Pool, TicketEvent};

pub const EPSILON: f64 = 1e-8;
pub const OMEGA: f64 = 1.2;

#[derive(Debug, Clone, Copy)]
pub struct LuParams {
    pub n: usize,
    pub itmax: usize,
    pub dt: f64,
    pub xcr: V5,
    pub xce: V5,
    pub xci: f64,
}

#[allow(clippy::excessive_precision)]
pub fn params(class: ProblemClass) -> LuParams {
    use ProblemClass::*;
    match class {
        S => LuParams {
            n: 12,
            itmax: 50,
            dt: 0.5,
            xcr: [
                1.6196343210976702e-02,
                2.1976745164821318e-03,
                1.5179927653399185e-03,
                1.5029584435994323e-03,
                3.4264073155896461e-02,
            ],
            xce: [
                6.4223319957960924e-04,
                8.4144342047347926e-05,
                5.8588269616485186e-05,
                5.8474222595157350e-05,
                1.3103347914111294e-03,
            ],
            xci: 7.8418928865937083,
        },
        W => LuParams {
            n: 33,
            itmax: 300,
            dt: 1.5e-3,
            xcr: [
                0.1236511638192e+02,
                0.1317228477799e+01,
                0.2550120713095e+01,
                0.2326187750252e+01,
                0.2826799444189e+02,
            ],
            xce: [
                0.4867877144216e+00,
                0.5064652880982e-01,
                0.9281818101960e-01,
                0.8570126542733e-01,
                0.1084277417792e+01,
            ],
            xci: 0.1161399311023e+02,
        },
        A => LuParams {
            n: 64,
            itmax: 250,
            dt: 2.0,
            xcr: [
                7.7902107606689367e+02,
                6.3402765259692870e+01,
                1.9499249727292479e+02,
                1.7845301160418537e+02,
                1.8384760349464247e+03,
            ],
            xce: [
                2.9964085685471943e+01,
                2.8194576365003349e+00,
                7.3473412698774742e+00,
                6.7139225687777051e+00,
                7.0715315688392578e+01,
            ],
            xci: 2.6030925604886277e+01,
        },
        B => LuParams {
            n: 102,
            itmax: 250,
            dt: 2.0,
            xcr: [
                3.5532672969982736e+03,
                2.6214750795310692e+02,
                8.8333721850952190e+02,
                7.7812774739425265e+02,
                7.3087969592545314e+03,
            ],
            xce: [
                1.1401176380212709e+02,
                8.1098963655421574e+00,
                2.8480597317698308e+01,
                2.5905394567832939e+01,
                2.6054907504857413e+02,
            ],
            xci: 4.7887162703308227e+01,
        },
        C => LuParams {
            n: 162,
            itmax: 250,
            dt: 2.0,
            xcr: [
                1.03766980323537846e+04,
                8.92212458801008552e+02,
                2.56238814582660871e+03,
                2.19194343857831427e+03,
                1.78078057261061185e+04,
            ],
            xce: [
                2.15986399716949279e+02,
                1.55789559239863600e+01,
                5.41318863077207766e+01,
                4.82262643154045421e+01,
                4.55902910043250358e+02,
            ],
            xci: 6.66404553572181300e+01,
        },
    }
}

/// Exact solution at grid point (i, j, k); coordinates by division as in
/// the reference setup.
fn exact(c: &Consts, i: usize, j: usize, k: usize) -> V5 {
    exact_solution(
        i as f64 / (c.n[0] - 1) as f64,
        j as f64 / (c.n[1] - 1) as f64,
        k as f64 / (c.n[2] - 1) as f64,
    )
}

/// Residual contribution of axis `a` at point `p` (position `pos` along the
/// axis): flux differences, viscous terms and fourth-order dissipation.
#[inline(always)]
#[allow(clippy::too_many_arguments)]
fn residual_axis(
    c: &Consts,
    a: usize,
    w: &[V5],
    rho_i: &[f64],
    qs: &[f64],
    p: usize,
    pos: usize,
    out: &mut V5,
) {
    let s = c.stride(a);
    let v = a + 1;
    let (t1, t2, t3) = (c.t1[a], c.t2[a], c.t3[a]);
    let d = &c.d[a];
    let flux = |q: usize| -> V5 {
        let x = &w[q];
        let uv = x[v] * rho_i[q];
        let mut f = [
            x[v],
            x[1] * uv,
            x[2] * uv,
            x[3] * uv,
            (C1 * x[4] - C2 * qs[q]) * uv,
        ];
        f[v] += C2 * (x[4] - qs[q]);
        f
    };
    let (fp, fm) = (flux(p + s), flux(p - s));
    for m in 0..5 {
        out[m] -= t2 * (fp[m] - fm[m]);
    }
    let r43 = 4.0 / 3.0;
    let c1c5 = C1 * C5;
    let visc = |q: usize| -> V5 {
        let (x, y) = (&w[q], &w[q - s]);
        let ui = [
            x[1] * rho_i[q],
            x[2] * rho_i[q],
            x[3] * rho_i[q],
            x[4] * rho_i[q],
        ];
        let um = [
            y[1] * rho_i[q - s],
            y[2] * rho_i[q - s],
            y[3] * rho_i[q - s],
            y[4] * rho_i[q - s],
        ];
        let mut g = [0.0; 5];
        for m in 1..4 {
            let f = if m == v { r43 * t3 } else { t3 };
            g[m] = f * (ui[m - 1] - um[m - 1]);
        }
        g[4] = 0.5
            * (1.0 - c1c5)
            * t3
            * ((ui[0] * ui[0] + ui[1] * ui[1] + ui[2] * ui[2])
                - (um[0] * um[0] + um[1] * um[1] + um[2] * um[2]))
            + (1.0 / 6.0) * t3 * (ui[v - 1] * ui[v - 1] - um[v - 1] * um[v - 1])
            + c1c5 * t3 * (ui[3] - um[3]);
        g
    };
    let (gp, g0) = (visc(p + s), visc(p));
    let d2 = |m: usize| w[p - s][m] - 2.0 * w[p][m] + w[p + s][m];
    out[0] += d[0] * t1 * d2(0);
    for m in 1..5 {
        out[m] += t3 * C3 * C4 * (gp[m] - g0[m]) + d[m] * t1 * d2(m);
    }
    let n = c.n[a];
    let dssp = c.dssp;
    for m in 0..5 {
        let f = |o: isize| w[(p as isize + o * s as isize) as usize][m];
        out[m] -= dssp
            * if pos == 1 {
                5.0 * f(0) - 4.0 * f(1) + f(2)
            } else if pos == 2 {
                -4.0 * f(-1) + 6.0 * f(0) - 4.0 * f(1) + f(2)
            } else if pos == n - 3 {
                f(-2) - 4.0 * f(-1) + 6.0 * f(0) - 4.0 * f(1)
            } else if pos == n - 2 {
                f(-2) - 4.0 * f(-1) + 5.0 * f(0)
            } else {
                f(-2) - 4.0 * f(-1) + 6.0 * f(0) - 4.0 * f(1) + f(2)
            };
    }
}

/// Adds all three axis residuals over the interior of every plane.
fn accumulate_residual(
    pool: &Pool,
    c: &Consts,
    w: &[V5],
    rho_i: &[f64],
    qs: &[f64],
    out: &mut [V5],
) {
    let [nx, ny, nz] = c.n;
    let plane = c.plane();
    pool.par_chunks_mut(out, plane, |k, pl| {
        if k == 0 || k == nz - 1 {
            return;
        }
        for a in 0..3 {
            for j in 1..ny - 1 {
                for i in 1..nx - 1 {
                    let pos = [i, j, k][a];
                    residual_axis(c, a, w, rho_i, qs, c.idx(i, j, k), pos, &mut pl[i + nx * j]);
                }
            }
        }
    });
}

fn density_terms(pool: &Pool, c: &Consts, w: &[V5], rho_i: &mut [f64], qs: &mut [f64]) {
    let plane = c.plane();
    let qv = DisjointSlice::new(qs);
    pool.par_chunks_mut(rho_i, plane, |k, r| {
        for (t, ri) in r.iter_mut().enumerate() {
            let p = k * plane + t;
            let x = &w[p];
            let tmp = 1.0 / x[0];
            *ri = tmp;
            // SAFETY: plane k owns these indices in both arrays.
            unsafe { qv.write(p, 0.5 * (x[1] * x[1] + x[2] * x[2] + x[3] * x[3]) * tmp) };
        }
    });
}

/// `-dt*t1*(d + N) - dt*t2*F` for the lower neighbour along `a`, or with
/// `+dt*t2*F` for the upper neighbour.
#[inline(always)]
fn off_diagonal(c: &Consts, a: usize, w: &V5, upper: bool) -> M5 {
    let f = cfd::flux_jacobian(a, w);
    let nj = cfd::viscous_jacobian(a, w, C3 * C4, C1 * C3 * C4 * C5);
    let (dtt1, dtt2) = (c.dt * c.t1[a], c.dt * c.t2[a]);
    let sign = if upper { 1.0 } else { -1.0 };
    let mut out = [[0.0; 5]; 5];
    for r in 0..5 {
        for col in 0..5 {
            out[r][col] = sign * dtt2 * f[r][col] - dtt1 * nj[r][col];
        }
        out[r][r] -= dtt1 * c.d[a][r];
    }
    out
}

/// Diagonal block `I + 2 dt sum_a t1_a (d_a + N_a)`.
#[inline(always)]
fn diagonal(c: &Consts, w: &V5) -> M5 {
    let c34 = C3 * C4;
    let c1345 = C1 * C3 * C4 * C5;
    let r43 = 4.0 / 3.0;
    let [tx1, ty1, tz1] = c.t1;
    let [dx, dy, dz] = c.d;
    let dt = c.dt;
    let tmp1 = 1.0 / w[0];
    let tmp2 = tmp1 * tmp1;
    let tmp3 = tmp1 * tmp2;
    let mut d = [[0.0; 5]; 5];
    d[0][0] = 1.0 + dt * 2.0 * (tx1 * dx[0] + ty1 * dy[0] + tz1 * dz[0]);
    let sums = [
        tx1 * r43 + ty1 + tz1,
        tx1 + ty1 * r43 + tz1,
        tx1 + ty1 + tz1 * r43,
    ];
    for m in 1..4 {
        d[m][0] = -dt * 2.0 * sums[m - 1] * c34 * tmp2 * w[m];
        d[m][m] = 1.0
            + dt * 2.0 * c34 * tmp1 * sums[m - 1]
            + dt * 2.0 * (tx1 * dx[m] + ty1 * dy[m] + tz1 * dz[m]);
    }
    let e = [
        tx1 * (r43 * c34 - c1345) + ty1 * (c34 - c1345) + tz1 * (c34 - c1345),
        tx1 * (c34 - c1345) + ty1 * (r43 * c34 - c1345) + tz1 * (c34 - c1345),
        tx1 * (c34 - c1345) + ty1 * (c34 - c1345) + tz1 * (r43 * c34 - c1345),
    ];
    d[4][0] = -dt
        * 2.0
        * ((e[0] * (w[1] * w[1]) + e[1] * (w[2] * w[2]) + e[2] * (w[3] * w[3])) * tmp3
            + (tx1 + ty1 + tz1) * c1345 * tmp2 * w[4]);
    for m in 1..4 {
        d[4][m] = dt * 2.0 * tmp2 * w[m] * e[m - 1];
    }
    d[4][4] = 1.0
        + dt * 2.0 * (tx1 + ty1 + tz1) * c1345 * tmp1
        + dt * 2.0 * (tx1 * dx[4] + ty1 * dy[4] + tz1 * dz[4]);
    d
}

/// Solves `t x = v` by elimination without pivoting; `v` becomes `x`.
#[inline(always)]
fn diag_solve(t: &mut M5, v: &mut V5) {
    for p in 0..4 {
        let tmp1 = 1.0 / t[p][p];
        for r in p + 1..5 {
            let tmp = tmp1 * t[r][p];
            for col in p + 1..5 {
                t[r][col] -= tmp * t[p][col];
            }
            v[r] -= v[p] * tmp;
        }
    }
    for r in (0..5).rev() {
        let mut x = v[r];
        for col in r + 1..5 {
            x -= t[r][col] * v[col];
        }
        v[r] = x / t[r][r];
    }
}

#[inline(always)]
fn matvec(a: &M5, x: &V5) -> V5 {
    let mut y = [0.0; 5];
    for r in 0..5 {
        y[r] = a[r][0] * x[0] + a[r][1] * x[1] + a[r][2] * x[2] + a[r][3] * x[3] + a[r][4] * x[4];
    }
    y
}

pub struct LuState {
    pub c: Consts,
    pub u: Vec<V5>,
    pub rsd: Vec<V5>,
    pub frct: Vec<V5>,
    rho_i: Vec<f64>,
    qs: Vec<f64>,
}

impl LuState {
    pub fn new(pool: &Pool, p: &LuParams) -> Self {
        let c = Consts::new(p.n, p.dt);
        let pts = c.points();
        let mut s = Self {
            u: vec![[0.0; 5]; pts],
            rsd: vec![[0.0; 5]; pts],
            frct: vec![[0.0; 5]; pts],
            rho_i: vec![0.0; pts],
            qs: vec![0.0; pts],
            c,
        };
        s.set_initial(pool);
        s.erhs(pool);
        s
    }

    /// Exact values on the boundary (setbv) and transfinite interpolation
    /// inside (setiv).
    pub fn set_initial(&mut self, pool: &Pool) {
        let c = &self.c;
        let [nx, ny, nz] = c.n;
        pool.par_chunks_mut(&mut self.u, c.plane(), |k, pl| {
            for j in 0..ny {
                for i in 0..nx {
                    let boundary =
                        i == 0 || j == 0 || k == 0 || i == nx - 1 || j == ny - 1 || k == nz - 1;
                    pl[i + nx * j] = if boundary {
                        exact(c, i, j, k)
                    } else {
                        let xi = i as f64 / (nx - 1) as f64;
                        let eta = j as f64 / (ny - 1) as f64;
                        let zeta = k as f64 / (nz - 1) as f64;
                        let (e1, e2) = (exact(c, 0, j, k), exact(c, nx - 1, j, k));
                        let (e3, e4) = (exact(c, i, 0, k), exact(c, i, ny - 1, k));
                        let (e5, e6) = (exact(c, i, j, 0), exact(c, i, j, nz - 1));
                        let mut out = [0.0; 5];
                        for m in 0..5 {
                            let pxi = (1.0 - xi) * e1[m] + xi * e2[m];
                            let peta = (1.0 - eta) * e3[m] + eta * e4[m];
                            let pzeta = (1.0 - zeta) * e5[m] + zeta * e6[m];
                            out[m] = pxi + peta + pzeta - pxi * peta - peta * pzeta - pzeta * pxi
                                + pxi * peta * pzeta;
                        }
                        out
                    };
                }
            }
        });
    }

    /// Forcing: the residual operator applied to the exact solution.
    fn erhs(&mut self, pool: &Pool) {
        let c = &self.c;
        let [nx, ny, _] = c.n;
        let plane = c.plane();
        let mut ue = vec![[0.0; 5]; c.points()];
        pool.par_chunks_mut(&mut ue, plane, |k, pl| {
            for j in 0..ny {
                for i in 0..nx {
                    pl[i + nx * j] = exact(c, i, j, k);
                }
            }
        });
        let mut rho_i = vec![0.0; c.points()];
        let mut qs = vec![0.0; c.points()];
        density_terms(pool, c, &ue, &mut rho_i, &mut qs);
        self.frct.fill([0.0; 5]);
        accumulate_residual(pool, c, &ue, &rho_i, &qs, &mut self.frct);
    }

    /// `rsd = -frct + residual(u)`.
    pub fn rhs(&mut self, pool: &Pool) {
        let c = &self.c;
        density_terms(pool, c, &self.u, &mut self.rho_i, &mut self.qs);
        for (r, f) in self.rsd.iter_mut().zip(&self.frct) {
            *r = f.map(|x| -x);
        }
        accumulate_residual(pool, c, &self.u, &self.rho_i, &self.qs, &mut self.rsd);
    }

    /// RMS over the interior.
    pub fn l2norm(&self, pool: &Pool, v: &[V5]) -> V5 {
        interior_rms(pool, &self.c, |p| v[p])
    }

    /// RMS error against the exact solution over the interior.
    pub fn error(&self, pool: &Pool) -> V5 {
        let c = &self.c;
        let [nx, ny, _] = c.n;
        let plane = c.plane();
        interior_rms(pool, c, |p| {
            let (k, rest) = (p / plane, p % plane);
            let e = exact(c, rest % nx, rest / nx % ny, k);
            let x = self.u[p];
            [
                e[0] - x[0],
                e[1] - x[1],
                e[2] - x[2],
                e[3] - x[3],
                e[4] - x[4],
            ]
        })
    }

    /// Lower triangular sweep over ascending k, one stage per (k, j-block).
    pub fn lower_sweep(&mut self, pool: &Pool, log: bool) -> Option<Vec<TicketEvent>> {
        let c = &self.c;
        let [nx, ny, nz] = c.n;
        let plane = c.plane();
        let u = &self.u;
        let blocks = pool.workers();
        let v = DisjointSlice::new(&mut self.rsd);
        let stage = |k: usize, b: usize| {
            let rows = static_partition(1..ny - 1, b, blocks);
            // SAFETY: the stage writes only rows `rows` of plane k; it reads
            // plane k-1 (published by this block's previous stage) and row
            // rows.start-1 of plane k (published by block b-1).
            unsafe {
                for j in rows.clone() {
                    for i in 1..nx - 1 {
                        let p = c.idx(i, j, k);
                        let lz = off_diagonal(c, 2, &u[p - plane], false);
                        let below = v.read(p - plane);
                        let t = matvec(&lz, &below);
                        let x = v.get_mut(p);
                        for m in 0..5 {
                            x[m] -= OMEGA * t[m];
                        }
                    }
                }
                for j in rows {
                    for i in 1..nx - 1 {
                        let p = c.idx(i, j, k);
                        let ly = off_diagonal(c, 1, &u[p - nx], false);
                        let lx = off_diagonal(c, 0, &u[p - 1], false);
                        let (vy, vx) = (v.read(p - nx), v.read(p - 1));
                        let cur = v.read(p);
                        let mut tv = [0.0; 5];
                        for m in 0..5 {
                            let mut s = 0.0;
                            for n in 0..5 {
                                s = s + ly[m][n] * vy[n] + lx[m][n] * vx[n];
                            }
                            tv[m] = cur[m] - OMEGA * s;
                        }
                        let mut t = diagonal(c, &u[p]);
                        diag_solve(&mut t, &mut tv);
                        v.write(p, tv);
                    }
                }
            }
        };
        if log {
            Some(pool.ordered_pipeline_logged(1..nz - 1, blocks, Direction::Ascending, stage))
        } else {
            pool.ordered_pipeline(1..nz - 1, blocks, Direction::Ascending, stage);
            None
        }
    }

    /// Upper triangular sweep over descending k.
    pub fn upper_sweep(&mut self, pool: &Pool, log: bool) -> Option<Vec<TicketEvent>> {
        let c = &self.c;
        let [nx, ny, nz] = c.n;
        let plane = c.plane();
        let u = &self.u;
        let blocks = pool.workers();
        let v = DisjointSlice::new(&mut self.rsd);
        let stage = |k: usize, b: usize| {
            let rows = static_partition(1..ny - 1, b, blocks);
            if rows.is_empty() {
                return;
            }
            let row0 = rows.start;
            let mut tv = vec![[0.0; 5]; rows.len() * nx];
            // SAFETY: mirror of the lower sweep: writes rows `rows` of plane
            // k; reads plane k+1 and row rows.end of plane k, both published.
            unsafe {
                for j in rows.clone() {
                    for i in 1..nx - 1 {
                        let p = c.idx(i, j, k);
                        let uz = off_diagonal(c, 2, &u[p + plane], true);
                        let t = matvec(&uz, &v.read(p + plane));
                        tv[(j - row0) * nx + i] = t.map(|x| OMEGA * x);
                    }
                }
                for j in rows.clone().rev() {
                    for i in (1..nx - 1).rev() {
                        let p = c.idx(i, j, k);
                        let uy = off_diagonal(c, 1, &u[p + nx], true);
                        let ux = off_diagonal(c, 0, &u[p + 1], true);
                        let (vy, vx) = (v.read(p + nx), v.read(p + 1));
                        let t = &mut tv[(j - row0) * nx + i];
                        for m in 0..5 {
                            let mut s = 0.0;
                            for n in 0..5 {
                                s = s + uy[m][n] * vy[n] + ux[m][n] * vx[n];
                            }
                            t[m] += OMEGA * s;
                        }
                        let mut d = diagonal(c, &u[p]);
                        diag_solve(&mut d, t);
                        let x = v.get_mut(p);
                        for m in 0..5 {
                            x[m] -= t[m];
                        }
                    }
                }
            }
        };
        if log {
            Some(pool.ordered_pipeline_logged(1..nz - 1, blocks, Direction::Descending, stage))
        } else {
            pool.ordered_pipeline(1..nz - 1, blocks, Direction::Descending, stage);
            None
        }
    }

    /// One SSOR iteration, ending with a fresh residual.
    pub fn ssor_step(&mut self, pool: &Pool) {
        let c = &self.c;
        let [nx, ny, nz] = c.n;
        let dt = c.dt;
        pool.par_chunks_mut(&mut self.rsd, c.plane(), |k, pl| {
            if k == 0 || k == nz - 1 {
                return;
            }
            for j in 1..ny - 1 {
                for x in &mut pl[nx * j + 1..nx * j + nx - 1] {
                    *x = x.map(|y| dt * y);
                }
            }
        });
        self.lower_sweep(pool, false);
        self.upper_sweep(pool, false);
        let tmp = 1.0 / (OMEGA * (2.0 - OMEGA));
        let c = &self.c;
        let rsd = &self.rsd;
        let plane = c.plane();
        pool.par_chunks_mut(&mut self.u, plane, |k, pl| {
            if k == 0 || k == nz - 1 {
                return;
            }
            for j in 1..ny - 1 {
                for i in 1..nx - 1 {
                    let q = i + nx * j;
                    let r = rsd[k * plane + q];
                    for m in 0..5 {
                        pl[q][m] += tmp * r[m];
                    }
                }
            }
        });
        self.rhs(pool);
    }

    /// Surface integral of the pressure over three pairs of faces.
    pub fn pintgr(&self) -> f64 {
        let c = &self.c;
        let [nx0, ny0, nz0] = c.n;
        let (ibeg, ifin) = (1, nx0 - 2);
        let (jbeg, jfin) = (1, ny0 - 3);
        let (ki1, ki2) = (2, nz0 - 2);
        let dxi = 1.0 / (nx0 - 1) as f64;
        let deta = 1.0 / (ny0 - 1) as f64;
        let dzeta = 1.0 / (nz0 - 1) as f64;
        let pressure = |i: usize, j: usize, k: usize| {
            let x = &self.u[c.idx(i, j, k)];
            C2 * (x[4] - 0.5 * (x[1] * x[1] + x[2] * x[2] + x[3] * x[3]) / x[0])
        };
        let quad = |f: &dyn Fn(usize, usize) -> f64,
                    g: &dyn Fn(usize, usize) -> f64,
                    a: (usize, usize),
                    b: (usize, usize)| {
            let mut s = 0.0;
            for y in b.0..b.1 {
                for x in a.0..a.1 {
                    s += f(x, y)
                        + f(x + 1, y)
                        + f(x, y + 1)
                        + f(x + 1, y + 1)
                        + g(x, y)
                        + g(x + 1, y)
                        + g(x, y + 1)
                        + g(x + 1, y + 1);
                }
            }
            s
        };
        let frc1 = dxi
            * deta
            * quad(
                &|i, j| pressure(i, j, ki1),
                &|i, j| pressure(i, j, ki2),
                (ibeg, ifin),
                (jbeg, jfin),
            );
        let frc2 = dxi
            * dzeta
            * quad(
                &|i, k| pressure(i, jbeg, k),
                &|i, k| pressure(i, jfin, k),
                (ibeg, ifin),
                (ki1, ki2),
            );
        let frc3 = deta
            * dzeta
            * quad(
                &|j, k| pressure(ibeg, j, k),
                &|j, k| pressure(ifin, j, k),
                (jbeg, jfin),
                (ki1, ki2),
            );
        0.25 * (frc1 + frc2 + frc3)
    }
}

fn interior_rms(pool: &Pool, c: &Consts, f: impl Fn(usize) -> V5 + Sync) -> V5 {
    let [nx, ny, nz] = c.n;
    let s = pool.par_map_reduce(
        1..nz - 1,
        [0.0; 5],
        |k| {
            let mut s = [0.0; 5];
            for j in 1..ny - 1 {
                for i in 1..nx - 1 {
                    let x = f(c.idx(i, j, k));
                    for m in 0..5 {
                        s[m] += x[m] * x[m];
                    }
                }
            }
            s
        },
        |a, b| {
            [
                a[0] + b[0],
                a[1] + b[1],
                a[2] + b[2],
                a[3] + b[3],
                a[4] + b[4],
            ]
        },
    );
    let count = ((nx - 2) * (ny - 2) * (nz - 2)) as f64;
    s.map(|x| (x / count).sqrt())
}

/// Outcome of a full run: residual norms, error norms, surface integral.
#[derive(Debug, Clone, Copy)]
pub struct LuOutcome {
    pub xcr: V5,
    pub xce: V5,
    pub xci: f64,
    pub seconds: f64,
}

/// One untimed warm-up iteration, reset, then `itmax` timed iterations.
pub fn solve(p: &LuParams, pool: &Pool) -> LuOutcome {
    let mut s = LuState::new(pool, p);
    s.rhs(pool);
    s.ssor_step(pool);
    s.set_initial(pool);
    s.rhs(pool);
    let mut timers = TimerSet::new(1);
    timers.start(0);
    for _ in 0..p.itmax {
        s.ssor_step(pool);
    }
    timers.stop(0);
    let seconds = timers.read(0);
    LuOutcome {
        xcr: s.l2norm(pool, &s.rsd),
        xce: s.error(pool),
        xci: s.pintgr(),
        seconds,
    }
}

pub fn verify(p: &LuParams, o: &LuOutcome) -> bool {
    cfd::verify_norms(&o.xcr, &o.xce, &p.xcr, &p.xce, EPSILON)
        && crate::common::verify_scalar(o.xci, p.xci, EPSILON)
}

pub fn flops(p: &LuParams) -> f64 {
    let n = p.n as f64;
    p.itmax as f64 * (1984.77 * n * n * n - 10923.3 * n * n + 27770.9 * n - 144010.0)
}

pub fn run(class: ProblemClass, pool: &Pool, mode: ExecMode) -> Result<BenchmarkResult> {
    let p = params(class);
    let o = solve(&p, pool);
    Ok(finish(
        "LU",
        class,
        format!("{}x{}x{}", p.n, p.n, p.n),
        p.itmax,
        o.seconds,
        flops(&p),
        "floating point",
        verify(&p, &o),
        pool,
        mode,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::runtime::{audit_pipeline_log, PoolConfig};

    fn pool(w: usize) -> Pool {
        Pool::new(PoolConfig::new(w)).unwrap()
    }

    /// State after `steps` iterations plus the dt scaling of the next one,
    /// ready for a sweep.
    fn primed(pool: &Pool, steps: usize) -> LuState {
        let p = params(ProblemClass::S);
        let mut s = LuState::new(pool, &p);
        s.rhs(pool);
        for _ in 0..steps {
            s.ssor_step(pool);
        }
        s
    }

    #[test]
    fn boundaries_hold_exact_solution() {
        let s = primed(&Pool::sequential(), 0);
        let c = &s.c;
        for k in 0..12 {
            for j in 0..12 {
                for i in [0, 11] {
                    assert_eq!(s.u[c.idx(i, j, k)], exact(c, i, j, k));
                    assert_eq!(s.u[c.idx(j, i, k)], exact(c, j, i, k));
                    assert_eq!(s.u[c.idx(j, k, i)], exact(c, j, k, i));
                }
            }
        }
    }

    #[test]
    fn exact_solution_has_small_residual() {
        let pool = Pool::sequential();
        let mut s = primed(&pool, 0);
        let c = s.c.clone();
        for k in 0..12 {
            for j in 0..12 {
                for i in 0..12 {
                    s.u[c.idx(i, j, k)] = exact(&c, i, j, k);
                }
            }
        }
        s.rhs(&pool);
        let worst = s.rsd.iter().flatten().fold(0.0f64, |a, &b| a.max(b.abs()));
        assert!(worst < 1e-10, "{worst}");
    }

    #[test]
    fn l2norm_of_zero_and_spike() {
        let pool = Pool::sequential();
        let s = primed(&pool, 0);
        let mut v = vec![[0.0; 5]; s.c.points()];
        assert_eq!(s.l2norm(&pool, &v), [0.0; 5]);
        v[s.c.idx(3, 4, 5)] = [2.0, 0.0, 0.0, 0.0, -1.0];
        let n = s.l2norm(&pool, &v);
        assert!((n[0] - (4.0f64 / 1000.0).sqrt()).abs() < 1e-15);
        assert!((n[4] - (1.0f64 / 1000.0).sqrt()).abs() < 1e-15);
        assert_eq!(n[1], 0.0);
    }

    #[test]
    fn diag_solve_matches_multiplication() {
        let w = exact_solution(0.3, 0.4, 0.5);
        let c = Consts::new(12, 0.5);
        let d = diagonal(&c, &w);
        let b = [1.0, -0.5, 0.25, 2.0, -3.0];
        let mut x = b;
        let mut t = d;
        diag_solve(&mut t, &mut x);
        let back = matvec(&d, &x);
        for m in 0..5 {
            assert!((back[m] - b[m]).abs() < 1e-12);
        }
    }

    fn scaled(pool: &Pool) -> LuState {
        let mut s = primed(pool, 2);
        let dt = s.c.dt;
        for r in s.rsd.iter_mut() {
            *r = r.map(|x| dt * x);
        }
        s
    }

    #[test]
    fn pipelined_sweeps_match_sequential_bitwise() {
        let seq = Pool::sequential();
        let mut base = scaled(&seq);
        base.lower_sweep(&seq, false);
        let lower = base.rsd.clone();
        base.upper_sweep(&seq, false);
        let upper = base.rsd.clone();
        for w in [2, 4, 8] {
            let pl = pool(w);
            let mut s = scaled(&pl);
            s.lower_sweep(&pl, false);
            assert!(s.rsd == lower, "lower sweep, {w} workers");
            s.upper_sweep(&pl, false);
            assert!(s.rsd == upper, "upper sweep, {w} workers");
        }
    }

    #[test]
    fn ticket_logs_have_no_violations() {
        let pl = pool(4);
        let mut s = scaled(&pl);
        let log = s.lower_sweep(&pl, true).unwrap();
        assert_eq!(
            audit_pipeline_log(&log, 1..11, 4, Direction::Ascending),
            (0, 40)
        );
        let log = s.upper_sweep(&pl, true).unwrap();
        assert_eq!(
            audit_pipeline_log(&log, 1..11, 4, Direction::Descending),
            (0, 40)
        );
    }

    #[test]
    fn residual_decreases_over_first_ten_steps() {
        let pool = Pool::sequential();
        let mut s = primed(&pool, 0);
        let mut prev = s.l2norm(&pool, &s.rsd);
        for _ in 0..10 {
            s.ssor_step(&pool);
            let now = s.l2norm(&pool, &s.rsd);
            let (a, b): (f64, f64) = (
                now.iter().map(|x| x * x).sum(),
                prev.iter().map(|x| x * x).sum(),
            );
            assert!(a < b, "{now:?} vs {prev:?}");
            prev = now;
        }
    }

    #[test]
    fn class_s_verifies() {
        let p = params(ProblemClass::S);
        let o = solve(&p, &Pool::sequential());
        assert!(verify(&p, &o), "{o:?}");
    }

    #[test]
    fn fields_agree_bitwise_across_workers() {
        let base = primed(&Pool::sequential(), 3).u;
        for w in [2, 3, 8] {
            assert!(primed(&pool(w), 3).u == base, "{w} workers");
        }
    }
}
