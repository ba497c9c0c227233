//! MG: V-cycle multigrid for a periodic 3-D Poisson problem on grids held in
//! flat storage with computed indices.

use crate::bench::access::{at, ld, st};
use crate::bench::{finish, ExecMode};
use crate::common::{verify_scalar, BenchmarkResult, ProblemClass, RandomStream, TimerSet};
use crate::error::Result;
use crate::runtime::Pool;

pub const SEED: f64 = 314_159_265.0;
pub const A: f64 = 1_220_703_125.0;
pub const EPSILON: f64 = 1.0e-8;
/// Number of +1 and of -1 charges placed by [`zran3`].
pub const MM: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MgParams {
    /// log2 of the grid edge.
    pub lt: usize,
    pub nit: usize,
    pub rnm2_verify: f64,
    pub a: [f64; 4],
    pub c: [f64; 4],
}

impl MgParams {
    pub fn n(&self) -> usize {
        1 << self.lt
    }
}

pub fn params(class: ProblemClass) -> MgParams {
    let a = [-8.0 / 3.0, 0.0, 1.0 / 6.0, 1.0 / 12.0];
    let c_small = [-3.0 / 8.0, 1.0 / 32.0, -1.0 / 64.0, 0.0];
    let c_large = [-3.0 / 17.0, 1.0 / 33.0, -1.0 / 61.0, 0.0];
    let (lt, nit, rnm2, c) = match class {
        ProblemClass::S => (5, 4, 0.530_770_700_573_4e-4, c_small),
        ProblemClass::W => (7, 4, 0.646_732_937_533_9e-5, c_small),
        ProblemClass::A => (8, 4, 0.243_336_530_906_9e-5, c_small),
        ProblemClass::B => (8, 20, 0.180_056_440_135_5e-5, c_large),
        ProblemClass::C => (9, 20, 0.570_673_228_574_0e-6, c_large),
    };
    MgParams {
        lt,
        nit,
        rnm2_verify: rnm2,
        a,
        c,
    }
}

/// Extents and storage offset of one level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Level {
    pub n1: usize,
    pub n2: usize,
    pub n3: usize,
    pub offset: usize,
}

impl Level {
    pub fn len(&self) -> usize {
        self.n1 * self.n2 * self.n3
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn idx(&self, i1: usize, i2: usize, i3: usize) -> usize {
        self.offset + i1 + self.n1 * (i2 + self.n2 * i3)
    }
}

/// Levels `1..=lt` of edge `2^k + 2` (one ghost layer per side), finest
/// first, packed into one block.
#[derive(Debug, Clone, PartialEq)]
pub struct HierarchicalGrid {
    pub data: Vec<f64>,
    levels: Vec<Level>,
}

impl HierarchicalGrid {
    pub fn new(lt: usize) -> Self {
        assert!(lt >= 1);
        let mut levels = vec![
            Level {
                n1: 0,
                n2: 0,
                n3: 0,
                offset: 0
            };
            lt
        ];
        let mut offset = 0;
        for k in (1..=lt).rev() {
            let n = (1 << k) + 2;
            levels[k - 1] = Level {
                n1: n,
                n2: n,
                n3: n,
                offset,
            };
            offset += n * n * n;
        }
        Self {
            data: vec![0.0; offset],
            levels,
        }
    }

    pub fn lt(&self) -> usize {
        self.levels.len()
    }

    pub fn level(&self, k: usize) -> Level {
        self.levels[k - 1]
    }

    pub fn slice(&self, k: usize) -> &[f64] {
        let l = self.level(k);
        &self.data[l.offset..l.offset + l.len()]
    }

    pub fn slice_mut(&mut self, k: usize) -> &mut [f64] {
        let l = self.level(k);
        &mut self.data[l.offset..l.offset + l.len()]
    }

    /// Level `k` and level `k - 1` borrowed together.
    pub fn pair_mut(&mut self, k: usize) -> (&mut [f64], &mut [f64]) {
        let fine = self.level(k);
        let coarse = self.level(k - 1);
        let (a, b) = self.data.split_at_mut(coarse.offset);
        (
            &mut a[fine.offset..fine.offset + fine.len()],
            &mut b[..coarse.len()],
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dims {
    pub n1: usize,
    pub n2: usize,
    pub n3: usize,
}

impl From<Level> for Dims {
    fn from(l: Level) -> Self {
        Dims {
            n1: l.n1,
            n2: l.n2,
            n3: l.n3,
        }
    }
}

impl Dims {
    pub fn cube(n: usize) -> Self {
        Dims {
            n1: n,
            n2: n,
            n3: n,
        }
    }

    fn plane(&self) -> usize {
        self.n1 * self.n2
    }

    fn len(&self) -> usize {
        self.n1 * self.n2 * self.n3
    }
}

/// Periodic ghost exchange.
pub fn comm3(pool: &Pool, u: &mut [f64], d: Dims) {
    let Dims { n1, n2, n3 } = d;
    let plane = d.plane();
    pool.par_chunks_mut(&mut u[..d.len()], plane, |i3, p| {
        if i3 == 0 || i3 == n3 - 1 {
            return;
        }
        for i2 in 1..n2 - 1 {
            p[i2 * n1] = p[i2 * n1 + n1 - 2];
            p[i2 * n1 + n1 - 1] = p[i2 * n1 + 1];
        }
        p.copy_within((n2 - 2) * n1..(n2 - 1) * n1, 0);
        p.copy_within(n1..2 * n1, (n2 - 1) * n1);
    });
    u.copy_within((n3 - 2) * plane..(n3 - 1) * plane, 0);
    u.copy_within(plane..2 * plane, (n3 - 1) * plane);
}

/// `r = v - A u`; `v = None` means `v` is `r` itself.
pub fn resid<const SAFE: bool>(
    pool: &Pool,
    u: &[f64],
    v: Option<&[f64]>,
    r: &mut [f64],
    d: Dims,
    a: &[f64; 4],
) {
    let Dims { n1, n2, n3 } = d;
    let plane = d.plane();
    assert!(u.len() >= d.len() && r.len() >= d.len() && v.is_none_or(|v| v.len() >= d.len()));
    assert!(n1 >= 3 && n2 >= 3 && n3 >= 3);
    pool.par_chunks_mut(&mut r[..d.len()], plane, |i3, rp| {
        if i3 == 0 || i3 == n3 - 1 {
            return;
        }
        let mut u1 = vec![0.0; n1];
        let mut u2 = vec![0.0; n1];
        let (lo, mid, hi) = ((i3 - 1) * plane, i3 * plane, (i3 + 1) * plane);
        for i2 in 1..n2 - 1 {
            let (m, s, n) = ((i2 - 1) * n1, i2 * n1, (i2 + 1) * n1);
            // SAFETY: i1 < n1, i2 +- 1 < n2, i3 +- 1 < n3 keep every offset
            // inside the level, whose length was asserted above.
            unsafe {
                for i1 in 0..n1 {
                    st::<_, SAFE>(
                        &mut u1,
                        i1,
                        ld::<_, SAFE>(u, mid + m + i1)
                            + ld::<_, SAFE>(u, mid + n + i1)
                            + ld::<_, SAFE>(u, lo + s + i1)
                            + ld::<_, SAFE>(u, hi + s + i1),
                    );
                    st::<_, SAFE>(
                        &mut u2,
                        i1,
                        ld::<_, SAFE>(u, lo + m + i1)
                            + ld::<_, SAFE>(u, lo + n + i1)
                            + ld::<_, SAFE>(u, hi + m + i1)
                            + ld::<_, SAFE>(u, hi + n + i1),
                    );
                }
                for i1 in 1..n1 - 1 {
                    let vv = match v {
                        Some(v) => ld::<_, SAFE>(v, mid + s + i1),
                        None => ld::<_, SAFE>(rp, s + i1),
                    };
                    let val = vv
                        - a[0] * ld::<_, SAFE>(u, mid + s + i1)
                        - a[2]
                            * (ld::<_, SAFE>(&u2, i1)
                                + ld::<_, SAFE>(&u1, i1 - 1)
                                + ld::<_, SAFE>(&u1, i1 + 1))
                        - a[3] * (ld::<_, SAFE>(&u2, i1 - 1) + ld::<_, SAFE>(&u2, i1 + 1));
                    st::<_, SAFE>(rp, s + i1, val);
                }
            }
        }
    });
    comm3(pool, r, d);
}

/// Smoother: `u += S r`.
pub fn psinv<const SAFE: bool>(pool: &Pool, r: &[f64], u: &mut [f64], d: Dims, c: &[f64; 4]) {
    let Dims { n1, n2, n3 } = d;
    let plane = d.plane();
    assert!(u.len() >= d.len() && r.len() >= d.len());
    assert!(n1 >= 3 && n2 >= 3 && n3 >= 3);
    pool.par_chunks_mut(&mut u[..d.len()], plane, |i3, up| {
        if i3 == 0 || i3 == n3 - 1 {
            return;
        }
        let mut r1 = vec![0.0; n1];
        let mut r2 = vec![0.0; n1];
        let (lo, mid, hi) = ((i3 - 1) * plane, i3 * plane, (i3 + 1) * plane);
        for i2 in 1..n2 - 1 {
            let (m, s, n) = ((i2 - 1) * n1, i2 * n1, (i2 + 1) * n1);
            // SAFETY: as in `resid`.
            unsafe {
                for i1 in 0..n1 {
                    st::<_, SAFE>(
                        &mut r1,
                        i1,
                        ld::<_, SAFE>(r, mid + m + i1)
                            + ld::<_, SAFE>(r, mid + n + i1)
                            + ld::<_, SAFE>(r, lo + s + i1)
                            + ld::<_, SAFE>(r, hi + s + i1),
                    );
                    st::<_, SAFE>(
                        &mut r2,
                        i1,
                        ld::<_, SAFE>(r, lo + m + i1)
                            + ld::<_, SAFE>(r, lo + n + i1)
                            + ld::<_, SAFE>(r, hi + m + i1)
                            + ld::<_, SAFE>(r, hi + n + i1),
                    );
                }
                for i1 in 1..n1 - 1 {
                    let add = c[0] * ld::<_, SAFE>(r, mid + s + i1)
                        + c[1]
                            * (ld::<_, SAFE>(r, mid + s + i1 - 1)
                                + ld::<_, SAFE>(r, mid + s + i1 + 1)
                                + ld::<_, SAFE>(&r1, i1))
                        + c[2]
                            * (ld::<_, SAFE>(&r2, i1)
                                + ld::<_, SAFE>(&r1, i1 - 1)
                                + ld::<_, SAFE>(&r1, i1 + 1));
                    *at::<_, SAFE>(up, s + i1) += add;
                }
            }
        }
    });
    comm3(pool, u, d);
}

/// Full-weighting restriction of `r` (dims `dk`) into `s` (dims `dj`).
pub fn rprj3<const SAFE: bool>(pool: &Pool, r: &[f64], dk: Dims, s: &mut [f64], dj: Dims) {
    let d1 = if dk.n1 == 3 { 2 } else { 1 };
    let d2 = if dk.n2 == 3 { 2 } else { 1 };
    let d3 = if dk.n3 == 3 { 2 } else { 1 };
    assert!(r.len() >= dk.len() && s.len() >= dj.len());
    assert!(2 * dj.n1 - 2 - d1 < dk.n1 && 2 * dj.n2 - 2 - d2 < dk.n2 && 2 * dj.n3 - 2 - d3 < dk.n3);
    let (m1, pk) = (dk.n1, dk.plane());
    let at3 = |i1: usize, i2: usize, i3: usize| i1 + m1 * i2 + pk * i3;
    pool.par_chunks_mut(&mut s[..dj.len()], dj.plane(), |j3, sp| {
        if j3 == 0 || j3 == dj.n3 - 1 {
            return;
        }
        let mut x1 = vec![0.0; dk.n1];
        let mut y1 = vec![0.0; dk.n1];
        let i3 = 2 * j3 - d3;
        for j2 in 1..dj.n2 - 1 {
            let i2 = 2 * j2 - d2;
            // SAFETY: the assertion above bounds i1 + 2, i2 + 2 and i3 + 2
            // by the fine extents; j1, j2 stay inside the coarse plane.
            unsafe {
                for j1 in 1..dj.n1 {
                    let i1 = 2 * j1 - d1;
                    st::<_, SAFE>(
                        &mut x1,
                        i1,
                        ld::<_, SAFE>(r, at3(i1, i2, i3 + 1))
                            + ld::<_, SAFE>(r, at3(i1, i2 + 2, i3 + 1))
                            + ld::<_, SAFE>(r, at3(i1, i2 + 1, i3))
                            + ld::<_, SAFE>(r, at3(i1, i2 + 1, i3 + 2)),
                    );
                    st::<_, SAFE>(
                        &mut y1,
                        i1,
                        ld::<_, SAFE>(r, at3(i1, i2, i3))
                            + ld::<_, SAFE>(r, at3(i1, i2, i3 + 2))
                            + ld::<_, SAFE>(r, at3(i1, i2 + 2, i3))
                            + ld::<_, SAFE>(r, at3(i1, i2 + 2, i3 + 2)),
                    );
                }
                for j1 in 1..dj.n1 - 1 {
                    let i1 = 2 * j1 - d1;
                    let y2 = ld::<_, SAFE>(r, at3(i1 + 1, i2, i3))
                        + ld::<_, SAFE>(r, at3(i1 + 1, i2, i3 + 2))
                        + ld::<_, SAFE>(r, at3(i1 + 1, i2 + 2, i3))
                        + ld::<_, SAFE>(r, at3(i1 + 1, i2 + 2, i3 + 2));
                    let x2 = ld::<_, SAFE>(r, at3(i1 + 1, i2, i3 + 1))
                        + ld::<_, SAFE>(r, at3(i1 + 1, i2 + 2, i3 + 1))
                        + ld::<_, SAFE>(r, at3(i1 + 1, i2 + 1, i3))
                        + ld::<_, SAFE>(r, at3(i1 + 1, i2 + 1, i3 + 2));
                    let val = 0.5 * ld::<_, SAFE>(r, at3(i1 + 1, i2 + 1, i3 + 1))
                        + 0.25
                            * (ld::<_, SAFE>(r, at3(i1, i2 + 1, i3 + 1))
                                + ld::<_, SAFE>(r, at3(i1 + 2, i2 + 1, i3 + 1))
                                + x2)
                        + 0.125 * (ld::<_, SAFE>(&x1, i1) + ld::<_, SAFE>(&x1, i1 + 2) + y2)
                        + 0.0625 * (ld::<_, SAFE>(&y1, i1) + ld::<_, SAFE>(&y1, i1 + 2));
                    st::<_, SAFE>(sp, j1 + dj.n1 * j2, val);
                }
            }
        }
    });
    comm3(pool, s, dj);
}

/// Trilinear prolongation of `z` (dims `dm`) added into `u` (dims `dn`).
pub fn interp<const SAFE: bool>(pool: &Pool, z: &[f64], dm: Dims, u: &mut [f64], dn: Dims) {
    assert!(
        dn.n1 != 3 && dn.n2 != 3 && dn.n3 != 3,
        "odd-extent prolongation is not used by MG"
    );
    assert!(z.len() >= dm.len() && u.len() >= dn.len());
    assert!(2 * dm.n1 - 2 <= dn.n1 && 2 * dm.n2 - 2 <= dn.n2 && 2 * dm.n3 - 2 <= dn.n3);
    let (mm1, mm2) = (dm.n1, dm.n2);
    let pm = dm.plane();
    let (n1, pn) = (dn.n1, dn.plane());
    // Coarse plane i3 feeds fine planes 2*i3 and 2*i3+1 only.
    let fine = &mut u[..2 * (dm.n3 - 1) * pn];
    pool.par_chunks_mut(fine, 2 * pn, |i3, up| {
        let mut z1 = vec![0.0; mm1];
        let mut z2 = vec![0.0; mm1];
        let mut z3 = vec![0.0; mm1];
        let zc = |i1: usize, i2: usize, k: usize| i1 + mm1 * i2 + pm * (i3 + k);
        let uf = |i1: usize, i2: usize, k: usize| i1 + n1 * i2 + pn * k;
        for i2 in 0..mm2 - 1 {
            // SAFETY: i3 + 1 < n3 and i2 + 1 < mm2 keep coarse reads in
            // range; fine offsets are below 2 * pn by the extent assertion.
            unsafe {
                for i1 in 0..mm1 {
                    let a = ld::<_, SAFE>(z, zc(i1, i2 + 1, 0)) + ld::<_, SAFE>(z, zc(i1, i2, 0));
                    st::<_, SAFE>(&mut z1, i1, a);
                    st::<_, SAFE>(
                        &mut z2,
                        i1,
                        ld::<_, SAFE>(z, zc(i1, i2, 1)) + ld::<_, SAFE>(z, zc(i1, i2, 0)),
                    );
                    st::<_, SAFE>(
                        &mut z3,
                        i1,
                        ld::<_, SAFE>(z, zc(i1, i2 + 1, 1)) + ld::<_, SAFE>(z, zc(i1, i2, 1)) + a,
                    );
                }
                for i1 in 0..mm1 - 1 {
                    *at::<_, SAFE>(up, uf(2 * i1, 2 * i2, 0)) += ld::<_, SAFE>(z, zc(i1, i2, 0));
                    *at::<_, SAFE>(up, uf(2 * i1 + 1, 2 * i2, 0)) += 0.5
                        * (ld::<_, SAFE>(z, zc(i1 + 1, i2, 0)) + ld::<_, SAFE>(z, zc(i1, i2, 0)));
                }
                for i1 in 0..mm1 - 1 {
                    *at::<_, SAFE>(up, uf(2 * i1, 2 * i2 + 1, 0)) += 0.5 * ld::<_, SAFE>(&z1, i1);
                    *at::<_, SAFE>(up, uf(2 * i1 + 1, 2 * i2 + 1, 0)) +=
                        0.25 * (ld::<_, SAFE>(&z1, i1) + ld::<_, SAFE>(&z1, i1 + 1));
                }
                for i1 in 0..mm1 - 1 {
                    *at::<_, SAFE>(up, uf(2 * i1, 2 * i2, 1)) += 0.5 * ld::<_, SAFE>(&z2, i1);
                    *at::<_, SAFE>(up, uf(2 * i1 + 1, 2 * i2, 1)) +=
                        0.25 * (ld::<_, SAFE>(&z2, i1) + ld::<_, SAFE>(&z2, i1 + 1));
                }
                for i1 in 0..mm1 - 1 {
                    *at::<_, SAFE>(up, uf(2 * i1, 2 * i2 + 1, 1)) += 0.25 * ld::<_, SAFE>(&z3, i1);
                    *at::<_, SAFE>(up, uf(2 * i1 + 1, 2 * i2 + 1, 1)) +=
                        0.125 * (ld::<_, SAFE>(&z3, i1) + ld::<_, SAFE>(&z3, i1 + 1));
                }
            }
        }
    });
}

/// `(sqrt(sum r^2 / (nx ny nz)), max |r|)` over the interior.
pub fn norm2u3(pool: &Pool, r: &[f64], d: Dims, nx: usize, ny: usize, nz: usize) -> (f64, f64) {
    let Dims { n1, n2, n3 } = d;
    let plane = d.plane();
    let (s, mx) = pool.par_map_reduce(
        1..n3 - 1,
        (0.0, 0.0),
        |i3| {
            let mut s = 0.0;
            let mut mx: f64 = 0.0;
            for i2 in 1..n2 - 1 {
                for &x in &r[i3 * plane + i2 * n1 + 1..i3 * plane + i2 * n1 + n1 - 1] {
                    s += x * x;
                    mx = mx.max(x.abs());
                }
            }
            (s, mx)
        },
        |a, b| (a.0 + b.0, a.1.max(b.1)),
    );
    ((s / (nx * ny * nz) as f64).sqrt(), mx)
}

/// Fills the interior with the random stream, then keeps only the `MM`
/// largest values as +1 and the `MM` smallest as -1.
pub fn zran3(pool: &Pool, z: &mut [f64], d: Dims, nx: usize, ny: usize) {
    let Dims { n1, n2, n3 } = d;
    let plane = d.plane();
    let base = RandomStream::new(SEED, A);
    z[..d.len()].fill(0.0);
    pool.par_chunks_mut(&mut z[..d.len()], plane, |i3, p| {
        if i3 == 0 || i3 == n3 - 1 {
            return;
        }
        for i2 in 1..n2 - 1 {
            let offset = nx * (i2 - 1) + nx * ny * (i3 - 1);
            let mut s = base.jumped(offset as u64);
            s.fill(&mut p[i2 * n1 + 1..i2 * n1 + 1 + nx]);
        }
    });

    type Best = (Vec<(f64, usize)>, Vec<(f64, usize)>);
    fn keep(mut v: Vec<(f64, usize)>, largest: bool) -> Vec<(f64, usize)> {
        let cmp = |a: &(f64, usize), b: &(f64, usize)| {
            let o = a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
            if largest {
                o.reverse()
            } else {
                o
            }
        };
        if v.len() > MM {
            v.select_nth_unstable_by(MM - 1, cmp);
            v.truncate(MM);
        }
        v.sort_by(cmp);
        v
    }
    let zr = &z[..d.len()];
    let (big, small): Best = pool.par_map_reduce(
        1..n3 - 1,
        (Vec::new(), Vec::new()),
        |i3| {
            let mut vals = Vec::with_capacity((n1 - 2) * (n2 - 2));
            for i2 in 1..n2 - 1 {
                for i1 in 1..n1 - 1 {
                    let idx = i1 + n1 * i2 + plane * i3;
                    vals.push((zr[idx], idx));
                }
            }
            (keep(vals.clone(), true), keep(vals, false))
        },
        |a, b| {
            (
                keep([a.0, b.0].concat(), true),
                keep([a.1, b.1].concat(), false),
            )
        },
    );
    z[..d.len()].fill(0.0);
    for &(_, i) in &small {
        z[i] = -1.0;
    }
    for &(_, i) in &big {
        z[i] = 1.0;
    }
    comm3(pool, z, d);
}

/// Solver state: hierarchical `u` and `r`, finest-level right side `v`.
#[derive(Debug, Clone)]
pub struct MgState {
    pub u: HierarchicalGrid,
    pub r: HierarchicalGrid,
    pub v: Vec<f64>,
    pub p: MgParams,
}

impl MgState {
    pub fn new(p: MgParams, pool: &Pool) -> Self {
        let u = HierarchicalGrid::new(p.lt);
        let r = HierarchicalGrid::new(p.lt);
        let fine = u.level(p.lt);
        let mut v = vec![0.0; fine.len()];
        zran3(pool, &mut v, fine.into(), p.n(), p.n());
        Self { u, r, v, p }
    }

    pub fn fine_dims(&self) -> Dims {
        self.u.level(self.p.lt).into()
    }

    pub fn reset(&mut self, pool: &Pool) {
        self.u.data.fill(0.0);
        let d = self.fine_dims();
        zran3(pool, &mut self.v, d, self.p.n(), self.p.n());
    }

    /// `r = v - A u` on the finest level.
    pub fn resid_fine(&mut self, pool: &Pool, mode: ExecMode) {
        let lt = self.p.lt;
        let d = self.fine_dims();
        let a = self.p.a;
        let u = self.u.slice(lt);
        let r = self.r.slice_mut(lt);
        match mode {
            ExecMode::Safe => resid::<true>(pool, u, Some(&self.v), r, d, &a),
            ExecMode::Unchecked => resid::<false>(pool, u, Some(&self.v), r, d, &a),
        }
    }

    pub fn norm(&self, pool: &Pool) -> (f64, f64) {
        let n = self.p.n();
        norm2u3(pool, self.r.slice(self.p.lt), self.fine_dims(), n, n, n)
    }

    pub fn mg3p(&mut self, pool: &Pool, mode: ExecMode) {
        match mode {
            ExecMode::Safe => self.mg3p_impl::<true>(pool),
            ExecMode::Unchecked => self.mg3p_impl::<false>(pool),
        }
    }

    fn mg3p_impl<const SAFE: bool>(&mut self, pool: &Pool) {
        let lt = self.p.lt;
        let (a, c) = (self.p.a, self.p.c);
        let dims = |g: &HierarchicalGrid, k: usize| -> Dims { g.level(k).into() };

        for k in (2..=lt).rev() {
            let (dk, dj) = (dims(&self.r, k), dims(&self.r, k - 1));
            let (fine, coarse) = self.r.pair_mut(k);
            rprj3::<SAFE>(pool, fine, dk, coarse, dj);
        }

        let d1 = dims(&self.u, 1);
        self.u.slice_mut(1).fill(0.0);
        psinv::<SAFE>(pool, self.r.slice(1), self.u.slice_mut(1), d1, &c);

        for k in 2..lt {
            let (dk, dj) = (dims(&self.u, k), dims(&self.u, k - 1));
            {
                let (fine, coarse) = self.u.pair_mut(k);
                fine.fill(0.0);
                interp::<SAFE>(pool, coarse, dj, fine, dk);
            }
            resid::<SAFE>(pool, self.u.slice(k), None, self.r.slice_mut(k), dk, &a);
            psinv::<SAFE>(pool, self.r.slice(k), self.u.slice_mut(k), dk, &c);
        }

        let (dk, dj) = (dims(&self.u, lt), dims(&self.u, lt - 1));
        {
            let (fine, coarse) = self.u.pair_mut(lt);
            interp::<SAFE>(pool, coarse, dj, fine, dk);
        }
        resid::<SAFE>(
            pool,
            self.u.slice(lt),
            Some(&self.v),
            self.r.slice_mut(lt),
            dk,
            &a,
        );
        psinv::<SAFE>(pool, self.r.slice(lt), self.u.slice_mut(lt), dk, &c);
    }
}

/// Runs the benchmark and returns `(rnm2, rnmu, seconds)`.
pub fn solve(p: &MgParams, pool: &Pool, mode: ExecMode) -> (f64, f64, f64) {
    let mut s = MgState::new(*p, pool);
    s.resid_fine(pool, mode);
    // Untimed cycle, then start over from the same right side.
    s.mg3p(pool, mode);
    s.resid_fine(pool, mode);
    s.reset(pool);

    let mut timers = TimerSet::new(1);
    timers.start(0);
    s.resid_fine(pool, mode);
    for _ in 0..p.nit {
        s.mg3p(pool, mode);
        s.resid_fine(pool, mode);
    }
    let (rnm2, rnmu) = s.norm(pool);
    timers.stop(0);
    (rnm2, rnmu, timers.read(0))
}

pub fn run(class: ProblemClass, pool: &Pool, mode: ExecMode) -> Result<BenchmarkResult> {
    let p = params(class);
    let (rnm2, _, seconds) = solve(&p, pool, mode);
    let n = p.n();
    Ok(finish(
        "MG",
        class,
        format!("{n}x{n}x{n}"),
        p.nit,
        seconds,
        58.0 * p.nit as f64 * (n * n * n) as f64,
        "floating point",
        verify_scalar(rnm2, p.rnm2_verify, EPSILON),
        pool,
        mode,
    ))
}
