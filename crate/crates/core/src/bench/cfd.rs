//! Pieces shared by the BT and SP pseudo-applications (and partly LU): the
//! manufactured exact solution, flux and viscous Jacobians, the explicit
//! right-hand side and the verification norms.

// Dense 5x5 block algebra reads best with explicit indices.
#![allow(clippy::needless_range_loop)]

use crate::runtime::{DisjointSlice, Pool};

pub type V5 = [f64; 5];
pub type M5 = [[f64; 5]; 5];

/// Polynomial coefficients of the exact solution, one row per component.
pub const CE: [[f64; 13]; 5] = [
    [
        2.0, 0.0, 0.0, 4.0, 5.0, 3.0, 0.5, 0.02, 0.01, 0.03, 0.5, 0.4, 0.3,
    ],
    [
        1.0, 0.0, 0.0, 0.0, 1.0, 2.0, 3.0, 0.01, 0.03, 0.02, 0.4, 0.3, 0.5,
    ],
    [
        2.0, 2.0, 0.0, 0.0, 0.0, 2.0, 3.0, 0.04, 0.03, 0.05, 0.3, 0.5, 0.4,
    ],
    [
        2.0, 2.0, 0.0, 0.0, 0.0, 2.0, 3.0, 0.03, 0.05, 0.04, 0.2, 0.1, 0.3,
    ],
    [
        5.0, 4.0, 3.0, 2.0, 0.1, 0.4, 0.3, 0.05, 0.04, 0.03, 0.1, 0.3, 0.2,
    ],
];

pub const C1: f64 = 1.4;
pub const C2: f64 = 0.4;
pub const C3: f64 = 0.1;
pub const C4: f64 = 1.0;
pub const C5: f64 = 1.4;

/// Exact solution at `(xi, eta, zeta)` in the unit cube.
#[inline]
pub fn exact_solution(xi: f64, eta: f64, zeta: f64) -> V5 {
    let mut out = [0.0; 5];
    for (m, ce) in CE.iter().enumerate() {
        out[m] = ce[0]
            + xi * (ce[1] + xi * (ce[4] + xi * (ce[7] + xi * ce[10])))
            + eta * (ce[2] + eta * (ce[5] + eta * (ce[8] + eta * ce[11])))
            + zeta * (ce[3] + zeta * (ce[6] + zeta * (ce[9] + zeta * ce[12])));
    }
    out
}

/// Grid extents, time step and every derived coefficient.
#[derive(Debug, Clone)]
pub struct Consts {
    pub n: [usize; 3],
    pub dt: f64,
    /// Mesh spacing 1/(n-1) per axis.
    pub h: [f64; 3],
    pub c1c2: f64,
    pub c1c5: f64,
    pub c3c4: f64,
    pub c1345: f64,
    pub conz1: f64,
    pub con43: f64,
    pub con16: f64,
    pub c2iv: f64,
    pub bt: f64,
    /// tx1/ty1/tz1 = 1/h^2.
    pub t1: [f64; 3],
    /// tx2/ty2/tz2 = 1/(2h).
    pub t2: [f64; 3],
    /// tx3/ty3/tz3 = 1/h.
    pub t3: [f64; 3],
    /// Second-order dissipation coefficients dx1..dx5, dy*, dz*.
    pub d: [[f64; 5]; 3],
    /// d * t1 per axis and component.
    pub dt1: [[f64; 5]; 3],
    /// xxcon1..5, yycon*, zzcon*.
    pub con: [[f64; 5]; 3],
    pub dmax: [f64; 3],
    pub dssp: f64,
    pub dtt1: [f64; 3],
    pub dtt2: [f64; 3],
    pub c2dtt1: [f64; 3],
    pub comz1: f64,
    pub comz4: f64,
    pub comz5: f64,
    pub comz6: f64,
}

impl Consts {
    pub fn new(n: usize, dt: f64) -> Self {
        let nn = [n, n, n];
        let h = nn.map(|n| 1.0 / (n - 1) as f64);
        let c1c2 = C1 * C2;
        let c1c5 = C1 * C5;
        let c3c4 = C3 * C4;
        let c1345 = c1c5 * c3c4;
        let conz1 = 1.0 - c1c5;
        let con43 = 4.0 / 3.0;
        let con16 = 1.0 / 6.0;
        let t1 = h.map(|h| 1.0 / (h * h));
        let t2 = h.map(|h| 1.0 / (2.0 * h));
        let t3 = h.map(|h| 1.0 / h);
        let d = [[0.75; 5], [0.75; 5], [1.0; 5]];
        let mut dt1 = [[0.0; 5]; 3];
        let mut con = [[0.0; 5]; 3];
        for a in 0..3 {
            for m in 0..5 {
                dt1[a][m] = d[a][m] * t1[a];
            }
            let c3c4t3 = c3c4 * t3[a];
            con[a] = [
                c3c4t3 * con43 * t3[a],
                c3c4t3 * t3[a],
                c3c4t3 * conz1 * t3[a],
                c3c4t3 * con16 * t3[a],
                c3c4t3 * c1c5 * t3[a],
            ];
        }
        let dmax = [
            d[0][2].max(d[0][3]),
            d[1][1].max(d[1][3]),
            d[2][1].max(d[2][2]),
        ];
        let dssp = 0.25 * d[0][0].max(d[1][0].max(d[2][0]));
        let dtt1 = t1.map(|t| dt * t);
        let dtt2 = t2.map(|t| dt * t);
        let dtdssp = dt * dssp;
        Self {
            n: nn,
            dt,
            h,
            c1c2,
            c1c5,
            c3c4,
            c1345,
            conz1,
            con43,
            con16,
            c2iv: 2.5,
            bt: 0.5f64.sqrt(),
            t1,
            t2,
            t3,
            d,
            dt1,
            con,
            dmax,
            dssp,
            dtt1,
            dtt2,
            c2dtt1: dtt1.map(|x| 2.0 * x),
            comz1: dtdssp,
            comz4: 4.0 * dtdssp,
            comz5: 5.0 * dtdssp,
            comz6: 6.0 * dtdssp,
        }
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.n[0] * (j + self.n[1] * k)
    }

    pub fn points(&self) -> usize {
        self.n[0] * self.n[1] * self.n[2]
    }

    pub fn plane(&self) -> usize {
        self.n[0] * self.n[1]
    }

    /// Storage stride along `axis`.
    pub fn stride(&self, axis: usize) -> usize {
        match axis {
            0 => 1,
            1 => self.n[0],
            _ => self.n[0] * self.n[1],
        }
    }
}

/// Point-wise quantities derived from `u` before every right-hand side.
#[derive(Debug, Clone)]
pub struct Aux {
    pub rho_i: Vec<f64>,
    /// us, vs, ws.
    pub vel: [Vec<f64>; 3],
    pub square: Vec<f64>,
    pub qs: Vec<f64>,
    pub speed: Vec<f64>,
}

impl Aux {
    pub fn new(points: usize) -> Self {
        Self {
            rho_i: vec![0.0; points],
            vel: [vec![0.0; points], vec![0.0; points], vec![0.0; points]],
            square: vec![0.0; points],
            qs: vec![0.0; points],
            speed: vec![0.0; points],
        }
    }
}

/// Transfinite interpolation of the face values inside, exact values on
/// the faces.
pub fn initialize(pool: &Pool, c: &Consts, u: &mut [V5]) {
    let [nx, ny, nz] = c.n;
    let [hx, hy, hz] = c.h;
    pool.par_chunks_mut(u, c.plane(), |k, pl| {
        let zeta = k as f64 * hz;
        for j in 0..ny {
            let eta = j as f64 * hy;
            for i in 0..nx {
                let xi = i as f64 * hx;
                let px = [
                    exact_solution(0.0, eta, zeta),
                    exact_solution(1.0, eta, zeta),
                ];
                let py = [exact_solution(xi, 0.0, zeta), exact_solution(xi, 1.0, zeta)];
                let pz = [exact_solution(xi, eta, 0.0), exact_solution(xi, eta, 1.0)];
                let cell = &mut pl[i + nx * j];
                for m in 0..5 {
                    let pxi = xi * px[1][m] + (1.0 - xi) * px[0][m];
                    let peta = eta * py[1][m] + (1.0 - eta) * py[0][m];
                    let pzeta = zeta * pz[1][m] + (1.0 - zeta) * pz[0][m];
                    cell[m] = pxi + peta + pzeta - pxi * peta - pxi * pzeta - peta * pzeta
                        + pxi * peta * pzeta;
                }
            }
        }
        for j in 0..ny {
            let eta = j as f64 * hy;
            pl[nx * j] = exact_solution(0.0, eta, zeta);
            pl[nx - 1 + nx * j] = exact_solution(1.0, eta, zeta);
        }
        for i in 0..nx {
            let xi = i as f64 * hx;
            pl[i] = exact_solution(xi, 0.0, zeta);
            pl[i + nx * (ny - 1)] = exact_solution(xi, 1.0, zeta);
        }
        if k == 0 || k == nz - 1 {
            let zf = if k == 0 { 0.0 } else { 1.0 };
            for j in 0..ny {
                let eta = j as f64 * hy;
                for i in 0..nx {
                    pl[i + nx * j] = exact_solution(i as f64 * hx, eta, zf);
                }
            }
        }
    });
}

/// Fourth-order dissipation stencil at position `pos` of a line of length
/// `n`, applied to values `f(offset)` with `offset` relative to `pos`.
#[inline(always)]
fn dissipation(pos: usize, n: usize, f: impl Fn(isize) -> f64) -> f64 {
    if pos == 1 {
        5.0 * f(0) - 4.0 * f(1) + f(2)
    } else if pos == 2 {
        -4.0 * f(-1) + 6.0 * f(0) - 4.0 * f(1) + f(2)
    } else if pos == n - 3 {
        f(-2) - 4.0 * f(-1) + 6.0 * f(0) - 4.0 * f(1)
    } else if pos == n - 2 {
        f(-2) - 4.0 * f(-1) + 5.0 * f(0)
    } else {
        f(-2) - 4.0 * f(-1) + 6.0 * f(0) - 4.0 * f(1) + f(2)
    }
}

/// Adds the axis-`a` exact-solution flux differences and dissipation to a
/// line of forcing values. `ue` holds the exact solution along the line.
fn exact_rhs_line(c: &Consts, a: usize, ue: &[V5], out: &mut [V5]) {
    let n = ue.len();
    let v = a + 1;
    let (others0, others1) = match a {
        0 => (2, 3),
        1 => (1, 3),
        _ => (1, 2),
    };
    let mut buf = vec![[0.0; 5]; n];
    let mut cuf = vec![0.0; n];
    let mut q = vec![0.0; n];
    for p in 0..n {
        let dtpp = 1.0 / ue[p][0];
        for m in 1..5 {
            buf[p][m] = dtpp * ue[p][m];
        }
        cuf[p] = buf[p][v] * buf[p][v];
        buf[p][0] = cuf[p] + buf[p][others0] * buf[p][others0] + buf[p][others1] * buf[p][others1];
        q[p] = 0.5 * (buf[p][1] * ue[p][1] + buf[p][2] * ue[p][2] + buf[p][3] * ue[p][3]);
    }
    let t2 = c.t2[a];
    let dt1 = &c.dt1[a];
    let con = &c.con[a];
    for p in 1..n - 1 {
        let (pm, pp) = (p - 1, p + 1);
        let d2 = |m: usize| ue[pp][m] - 2.0 * ue[p][m] + ue[pm][m];
        let b2 = |m: usize| buf[pp][m] - 2.0 * buf[p][m] + buf[pm][m];
        let f = &mut out[p];
        f[0] += -t2 * (ue[pp][v] - ue[pm][v]) + dt1[0] * d2(0);
        for m in 1..4 {
            if m == v {
                f[m] += -t2
                    * ((ue[pp][v] * buf[pp][v] + C2 * (ue[pp][4] - q[pp]))
                        - (ue[pm][v] * buf[pm][v] + C2 * (ue[pm][4] - q[pm])))
                    + con[0] * b2(v)
                    + dt1[m] * d2(m);
            } else {
                f[m] += -t2 * (ue[pp][m] * buf[pp][v] - ue[pm][m] * buf[pm][v])
                    + con[1] * b2(m)
                    + dt1[m] * d2(m);
            }
        }
        f[4] += -t2
            * (buf[pp][v] * (C1 * ue[pp][4] - C2 * q[pp])
                - buf[pm][v] * (C1 * ue[pm][4] - C2 * q[pm]))
            + 0.5 * con[2] * b2(0)
            + con[3] * (cuf[pp] - 2.0 * cuf[p] + cuf[pm])
            + con[4] * b2(4)
            + dt1[4] * d2(4);
    }
    for p in 1..n - 1 {
        for m in 0..5 {
            out[p][m] -= c.dssp * dissipation(p, n, |o| ue[(p as isize + o) as usize][m]);
        }
    }
}

/// Forcing term that makes the exact solution a steady state of the
/// discrete equations.
pub fn exact_rhs(pool: &Pool, c: &Consts, forcing: &mut [V5]) {
    let [nx, ny, nz] = c.n;
    let [hx, hy, hz] = c.h;
    forcing.fill([0.0; 5]);
    pool.par_chunks_mut(forcing, c.plane(), |k, pl| {
        if k == 0 || k == nz - 1 {
            return;
        }
        let zeta = k as f64 * hz;
        let mut ue = vec![[0.0; 5]; nx.max(ny)];
        let mut line = vec![[0.0; 5]; nx.max(ny)];
        for j in 1..ny - 1 {
            let eta = j as f64 * hy;
            for i in 0..nx {
                ue[i] = exact_solution(i as f64 * hx, eta, zeta);
                line[i] = pl[i + nx * j];
            }
            exact_rhs_line(c, 0, &ue[..nx], &mut line[..nx]);
            pl[nx * j + 1..nx * j + nx - 1].copy_from_slice(&line[1..nx - 1]);
        }
        for i in 1..nx - 1 {
            let xi = i as f64 * hx;
            for j in 0..ny {
                ue[j] = exact_solution(xi, j as f64 * hy, zeta);
                line[j] = pl[i + nx * j];
            }
            exact_rhs_line(c, 1, &ue[..ny], &mut line[..ny]);
            for j in 1..ny - 1 {
                pl[i + nx * j] = line[j];
            }
        }
    });
    let plane = c.plane();
    pool.par_map_disjoint(1..ny - 1, forcing, |j, f| {
        let eta = j as f64 * hy;
        let mut ue = vec![[0.0; 5]; nz];
        let mut line = vec![[0.0; 5]; nz];
        for i in 1..nx - 1 {
            let xi = i as f64 * hx;
            for k in 0..nz {
                ue[k] = exact_solution(xi, eta, k as f64 * hz);
                // SAFETY: index j only touches points with this j.
                line[k] = unsafe { f.read(i + nx * j + plane * k) };
            }
            exact_rhs_line(c, 2, &ue, &mut line);
            for (k, v) in line.iter().enumerate().take(nz - 1).skip(1) {
                let mut neg = *v;
                for x in neg.iter_mut() {
                    *x = -*x;
                }
                // SAFETY: as above.
                unsafe { f.write(i + nx * j + plane * k, neg) };
            }
        }
    });
}

/// Recomputes the point-wise auxiliary fields from `u`.
pub fn compute_aux(pool: &Pool, c: &Consts, u: &[V5], aux: &mut Aux) {
    let plane = c.plane();
    let Aux {
        rho_i,
        vel,
        square,
        qs,
        speed,
    } = aux;
    let [us, vs, ws] = vel;
    let views = (
        DisjointSlice::new(rho_i),
        DisjointSlice::new(us),
        DisjointSlice::new(vs),
        DisjointSlice::new(ws),
        DisjointSlice::new(square),
        DisjointSlice::new(qs),
    );
    let views = &views;
    pool.par_map_disjoint(0..c.n[2], speed, |k, sp| {
        for p in k * plane..(k + 1) * plane {
            let w = u[p];
            let rho_inv = 1.0 / w[0];
            let sq = 0.5 * (w[1] * w[1] + w[2] * w[2] + w[3] * w[3]) * rho_inv;
            let aux = c.c1c2 * rho_inv * (w[4] - sq);
            // SAFETY: plane k owns points k*plane..(k+1)*plane of every field.
            unsafe {
                views.0.write(p, rho_inv);
                views.1.write(p, w[1] * rho_inv);
                views.2.write(p, w[2] * rho_inv);
                views.3.write(p, w[3] * rho_inv);
                views.4.write(p, sq);
                views.5.write(p, sq * rho_inv);
                sp.write(p, aux.sqrt());
            }
        }
    });
}

/// Flux differences and dissipation along axis `a` at point `p`.
#[inline(always)]
fn rhs_axis(c: &Consts, a: usize, u: &[V5], aux: &Aux, p: usize, pos: usize, r: &mut V5) {
    let s = c.stride(a);
    let n = c.n[a];
    let v = a + 1;
    let (pp, pm) = (p + s, p - s);
    let vel = &aux.vel[a];
    let (up1, um1, uijk) = (vel[pp], vel[pm], vel[p]);
    let t2 = c.t2[a];
    let dt1 = &c.dt1[a];
    let con = &c.con[a];
    let d2 = |m: usize| u[pp][m] - 2.0 * u[p][m] + u[pm][m];
    r[0] += dt1[0] * d2(0) - t2 * (u[pp][v] - u[pm][v]);
    for m in 1..4 {
        if m == v {
            r[m] += dt1[m] * d2(m) + con[1] * c.con43 * (up1 - 2.0 * uijk + um1)
                - t2 * (u[pp][m] * up1 - u[pm][m] * um1
                    + (u[pp][4] - aux.square[pp] - u[pm][4] + aux.square[pm]) * C2);
        } else {
            let w = &aux.vel[m - 1];
            r[m] += dt1[m] * d2(m) + con[1] * (w[pp] - 2.0 * w[p] + w[pm])
                - t2 * (u[pp][m] * up1 - u[pm][m] * um1);
        }
    }
    r[4] += dt1[4] * d2(4)
        + con[2] * (aux.qs[pp] - 2.0 * aux.qs[p] + aux.qs[pm])
        + con[3] * (up1 * up1 - 2.0 * uijk * uijk + um1 * um1)
        + con[4]
            * (u[pp][4] * aux.rho_i[pp] - 2.0 * u[p][4] * aux.rho_i[p] + u[pm][4] * aux.rho_i[pm])
        - t2 * ((C1 * u[pp][4] - C2 * aux.square[pp]) * up1
            - (C1 * u[pm][4] - C2 * aux.square[pm]) * um1);
    for m in 0..5 {
        r[m] -= c.dssp * dissipation(pos, n, |o| u[(p as isize + o * s as isize) as usize][m]);
    }
}

/// `rhs = dt * (forcing - residual(u))`, zero on the boundary. The x and y
/// parts run plane-parallel; the z part runs over j inside a loop over k.
pub fn compute_rhs(
    pool: &Pool,
    c: &Consts,
    u: &[V5],
    forcing: &[V5],
    aux: &mut Aux,
    rhs: &mut [V5],
) {
    compute_aux(pool, c, u, aux);
    let [nx, ny, nz] = c.n;
    let plane = c.plane();
    let aux = &*aux;
    pool.par_chunks_mut(rhs, plane, |k, pl| {
        pl.copy_from_slice(&forcing[k * plane..(k + 1) * plane]);
        if k == 0 || k == nz - 1 {
            return;
        }
        for j in 1..ny - 1 {
            for i in 1..nx - 1 {
                let p = c.idx(i, j, k);
                let r = &mut pl[i + nx * j];
                rhs_axis(c, 0, u, aux, p, i, r);
            }
        }
        for j in 1..ny - 1 {
            for i in 1..nx - 1 {
                let p = c.idx(i, j, k);
                let r = &mut pl[i + nx * j];
                rhs_axis(c, 1, u, aux, p, j, r);
            }
        }
    });
    for k in 1..nz - 1 {
        let pl = &mut rhs[k * plane..(k + 1) * plane];
        pool.par_chunks_mut(pl, nx, |j, row| {
            if j == 0 || j == ny - 1 {
                return;
            }
            for (i, r) in row.iter_mut().enumerate().take(nx - 1).skip(1) {
                rhs_axis(c, 2, u, aux, c.idx(i, j, k), k, r);
                for x in r.iter_mut() {
                    *x *= c.dt;
                }
            }
        });
    }
}

/// `u += rhs` over the interior.
pub fn add(pool: &Pool, c: &Consts, u: &mut [V5], rhs: &[V5]) {
    let [nx, ny, nz] = c.n;
    let plane = c.plane();
    pool.par_chunks_mut(u, plane, |k, pl| {
        if k == 0 || k == nz - 1 {
            return;
        }
        for j in 1..ny - 1 {
            for i in 1..nx - 1 {
                let q = i + nx * j;
                let r = &rhs[k * plane + q];
                for m in 0..5 {
                    pl[q][m] += r[m];
                }
            }
        }
    });
}

fn normalize(c: &Consts, mut s: V5) -> V5 {
    for x in s.iter_mut() {
        for d in 0..3 {
            *x /= (c.n[d] - 2) as f64;
        }
        *x = x.sqrt();
    }
    s
}

fn add5(a: V5, b: V5) -> V5 {
    [
        a[0] + b[0],
        a[1] + b[1],
        a[2] + b[2],
        a[3] + b[3],
        a[4] + b[4],
    ]
}

/// RMS distance from the exact solution over all points.
pub fn error_norm(pool: &Pool, c: &Consts, u: &[V5]) -> V5 {
    let [nx, ny, _] = c.n;
    let [hx, hy, hz] = c.h;
    let s = pool.par_map_reduce(
        0..c.n[2],
        [0.0; 5],
        |k| {
            let mut s = [0.0; 5];
            let zeta = k as f64 * hz;
            for j in 0..ny {
                let eta = j as f64 * hy;
                for i in 0..nx {
                    let e = exact_solution(i as f64 * hx, eta, zeta);
                    let w = u[c.idx(i, j, k)];
                    for m in 0..5 {
                        let d = w[m] - e[m];
                        s[m] += d * d;
                    }
                }
            }
            s
        },
        add5,
    );
    normalize(c, s)
}

/// RMS of the right-hand side over the interior.
pub fn rhs_norm(pool: &Pool, c: &Consts, rhs: &[V5]) -> V5 {
    let [nx, ny, nz] = c.n;
    let s = pool.par_map_reduce(
        1..nz - 1,
        [0.0; 5],
        |k| {
            let mut s = [0.0; 5];
            for j in 1..ny - 1 {
                for i in 1..nx - 1 {
                    let w = rhs[c.idx(i, j, k)];
                    for m in 0..5 {
                        s[m] += w[m] * w[m];
                    }
                }
            }
            s
        },
        add5,
    );
    normalize(c, s)
}

/// Residual and error norms compared with reference values.
pub fn verify_norms(xcr: &V5, xce: &V5, xcr_ref: &V5, xce_ref: &V5, eps: f64) -> bool {
    crate::common::verify_all(xcr, xcr_ref, eps) && crate::common::verify_all(xce, xce_ref, eps)
}

/// Jacobian of the inviscid flux along axis `a` (0, 1, 2) with respect to
/// the conserved variables.
#[inline]
pub fn flux_jacobian(a: usize, w: &V5) -> M5 {
    let d = a + 1;
    let tmp1 = 1.0 / w[0];
    let tmp2 = tmp1 * tmp1;
    let square = 0.5 * (w[1] * w[1] + w[2] * w[2] + w[3] * w[3]) * tmp1;
    let qs = square * tmp1;
    let mut f = [[0.0; 5]; 5];
    f[0][d] = 1.0;
    for m in 1..4 {
        if m == d {
            f[m][0] = -(w[d] * w[d] * tmp2) + C2 * qs;
            for o in 1..4 {
                f[m][o] = if o == d {
                    (2.0 - C2) * (w[d] * tmp1)
                } else {
                    -C2 * (w[o] * tmp1)
                };
            }
            f[m][4] = C2;
        } else {
            f[m][0] = -(w[m] * w[d]) * tmp2;
            f[m][m] = w[d] * tmp1;
            f[m][d] = w[m] * tmp1;
        }
    }
    f[4][0] = (C2 * 2.0 * square - C1 * w[4]) * (w[d] * tmp2);
    for o in 1..4 {
        f[4][o] = if o == d {
            C1 * w[4] * tmp1 - C2 * (w[d] * w[d] * tmp2 + qs)
        } else {
            -C2 * (w[o] * w[d]) * tmp2
        };
    }
    f[4][4] = C1 * (w[d] * tmp1);
    f
}

/// Jacobian of the viscous flux along axis `a`, with `c3c4` and `c1345`
/// the diffusion coefficients.
#[inline]
pub fn viscous_jacobian(a: usize, w: &V5, c3c4: f64, c1345: f64) -> M5 {
    let d = a + 1;
    let con43 = 4.0 / 3.0;
    let tmp1 = 1.0 / w[0];
    let tmp2 = tmp1 * tmp1;
    let tmp3 = tmp1 * tmp2;
    let mut nj = [[0.0; 5]; 5];
    let coef = |m: usize| if m == d { con43 * c3c4 } else { c3c4 };
    for m in 1..4 {
        nj[m][0] = -coef(m) * tmp2 * w[m];
        nj[m][m] = coef(m) * tmp1;
    }
    nj[4][0] = -(coef(1) - c1345) * tmp3 * (w[1] * w[1])
        - (coef(2) - c1345) * tmp3 * (w[2] * w[2])
        - (coef(3) - c1345) * tmp3 * (w[3] * w[3])
        - c1345 * tmp2 * w[4];
    for m in 1..4 {
        nj[4][m] = (coef(m) - c1345) * tmp2 * w[m];
    }
    nj[4][4] = c1345 * tmp1;
    nj
}

/// `b -= a x`.
#[inline(always)]
pub fn matvec_sub(a: &M5, x: &V5, b: &mut V5) {
    for r in 0..5 {
        b[r] = b[r]
            - a[r][0] * x[0]
            - a[r][1] * x[1]
            - a[r][2] * x[2]
            - a[r][3] * x[3]
            - a[r][4] * x[4];
    }
}

/// `c -= a b`.
#[inline(always)]
pub fn matmul_sub(a: &M5, b: &M5, c: &mut M5) {
    for r in 0..5 {
        for col in 0..5 {
            c[r][col] = c[r][col]
                - a[r][0] * b[0][col]
                - a[r][1] * b[1][col]
                - a[r][2] * b[2][col]
                - a[r][3] * b[3][col]
                - a[r][4] * b[4][col];
        }
    }
}

/// Gauss-Jordan without pivoting: `c = lhs^-1 c`, `r = lhs^-1 r`.
/// `lhs` is destroyed.
#[inline(always)]
pub fn binvcrhs(lhs: &mut M5, c: &mut M5, r: &mut V5) {
    for p in 0..5 {
        let pivot = 1.0 / lhs[p][p];
        for col in p + 1..5 {
            lhs[p][col] *= pivot;
        }
        for col in 0..5 {
            c[p][col] *= pivot;
        }
        r[p] *= pivot;
        for q in 0..5 {
            if q == p {
                continue;
            }
            let coeff = lhs[q][p];
            for col in p + 1..5 {
                lhs[q][col] -= coeff * lhs[p][col];
            }
            for col in 0..5 {
                c[q][col] -= coeff * c[p][col];
            }
            r[q] -= coeff * r[p];
        }
    }
}

/// Gauss-Jordan without pivoting: `r = lhs^-1 r`. `lhs` is destroyed.
#[inline(always)]
pub fn binvrhs(lhs: &mut M5, r: &mut V5) {
    for p in 0..5 {
        let pivot = 1.0 / lhs[p][p];
        for col in p + 1..5 {
            lhs[p][col] *= pivot;
        }
        r[p] *= pivot;
        for q in 0..5 {
            if q == p {
                continue;
            }
            let coeff = lhs[q][p];
            for col in p + 1..5 {
                lhs[q][col] -= coeff * lhs[p][col];
            }
            r[q] -= coeff * r[p];
        }
    }
}
