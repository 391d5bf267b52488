//! Explicit leapfrog discretization, monolithic reference solve, the
//! d'Alembert oracle and per-node certification.
//!
//! Each half of the domain gets its own spacing `dx = c dt / nu`, so the
//! Courant number is `nu` on both sides and, at `nu = 1`, the discrete
//! dependency cone travels exactly one node per step at the physical speed.
//! The interface node uses the non-uniform three-point Laplacian with an
//! effective `c^2 = c_left c_right`; for `nu = 1` this is the exact
//! transmission rule for `u` and `u_x` continuous across `L/2`.

use crate::config::{InitialData, ProblemConfig, Side};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::tents::Rect;

const ALIGN_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct Grid<S> {
    pub nx: usize,
    pub nt: usize,
    pub dt: S,
    pub dx_left: S,
    pub dx_right: S,
    /// Node index of `x = L/2`.
    pub interface: usize,
    pub length: S,
    pub final_time: S,
    pub c_left: S,
    pub c_right: S,
    pub nu: S,
    x: Vec<S>,
    speed: Vec<S>,
    w_left: Vec<S>,
    w_right: Vec<S>,
}

fn near_integer<S: Real>(v: S) -> Option<usize> {
    let r = v.round();
    if (v - r).abs() <= S::lit(ALIGN_TOL) && r >= S::zero() {
        r.to_usize()
    } else {
        None
    }
}

impl<S: Real> Grid<S> {
    /// Grid whose nodes contain every decomposition point.
    ///
    /// The fast-side spacing is `L1 / points_per_subdomain`; the time step
    /// is `nu dx / c_max`. Heights that are not multiples of `dt` are
    /// rounded down when pitching (see [`Grid::levels_for`]); the last time
    /// level is the first one at or beyond `T`.
    pub fn new(cfg: &ProblemConfig<S>) -> Result<Self> {
        cfg.validate()?;
        let two = S::lit(2.0);
        let half = cfg.half();
        let c_fast = cfg.c_fast();
        let l1 = cfg.length / (two * S::from_usize_lossy(cfg.m1));
        let dx_fast = l1 / S::from_usize_lossy(cfg.points_per_subdomain);
        let dt = cfg.nu * dx_fast / c_fast;
        let spacing = |side: Side| {
            if side == cfg.fast_side() {
                dx_fast
            } else {
                dx_fast * (cfg.speed(side) / c_fast)
            }
        };
        let dx_left = spacing(Side::Left);
        let dx_right = spacing(Side::Right);

        let cells = |side: Side, dx: S| -> Result<usize> {
            let n = near_integer(half / dx).ok_or_else(|| {
                Error::Misaligned(format!(
                    "L/2 = {half} is not a multiple of the {side:?} spacing {dx}"
                ))
            })?;
            let gaps = 2 * cfg.count(side);
            if n == 0 || n % gaps != 0 {
                return Err(Error::Misaligned(format!(
                    "{side:?} half has {n} cells, not divisible into {gaps} point gaps; \
                     adjust points_per_subdomain"
                )));
            }
            Ok(n)
        };
        let n_left = cells(Side::Left, dx_left)?;
        let n_right = cells(Side::Right, dx_right)?;
        let nx = n_left + n_right + 1;

        let steps = (cfg.final_time / dt - S::lit(1e-9)).ceil();
        let nt = steps.to_usize().unwrap_or(0).max(1) + 1;

        let mut x = Vec::with_capacity(nx);
        for i in 0..nx {
            x.push(if i < n_left {
                S::from_usize_lossy(i) * dx_left
            } else if i == n_left {
                half
            } else {
                cfg.length - S::from_usize_lossy(nx - 1 - i) * dx_right
            });
        }

        let nu2 = cfg.nu * cfg.nu;
        let sum = cfg.c_left + cfg.c_right;
        let mut speed = vec![S::zero(); nx];
        let mut w_left = vec![S::zero(); nx];
        let mut w_right = vec![S::zero(); nx];
        for i in 0..nx {
            let (c, wl, wr) = if i < n_left {
                (cfg.c_left, nu2, nu2)
            } else if i > n_left {
                (cfg.c_right, nu2, nu2)
            } else if cfg.c_left == cfg.c_right {
                (cfg.c_left, nu2, nu2)
            } else {
                (
                    (cfg.c_left * cfg.c_right).sqrt(),
                    two * nu2 * cfg.c_right / sum,
                    two * nu2 * cfg.c_left / sum,
                )
            };
            speed[i] = c;
            w_left[i] = wl;
            w_right[i] = wr;
        }

        Ok(Self {
            nx,
            nt,
            dt,
            dx_left,
            dx_right,
            interface: n_left,
            length: cfg.length,
            final_time: cfg.final_time,
            c_left: cfg.c_left,
            c_right: cfg.c_right,
            nu: cfg.nu,
            x,
            speed,
            w_left,
            w_right,
        })
    }

    pub fn x(&self, i: usize) -> S {
        self.x[i]
    }

    pub fn xs(&self) -> &[S] {
        &self.x
    }

    pub fn t(&self, n: usize) -> S {
        S::from_usize_lossy(n) * self.dt
    }

    /// Effective wave speed used by the stencil at node `i`.
    pub fn speed(&self, i: usize) -> S {
        self.speed[i]
    }

    /// Stencil weights `(w_left, w_right)` of node `i`.
    pub fn weights(&self, i: usize) -> (S, S) {
        (self.w_left[i], self.w_right[i])
    }

    /// Spacing of the cell `[x_i, x_{i+1}]`.
    pub fn cell(&self, i: usize) -> S {
        if i < self.interface {
            self.dx_left
        } else {
            self.dx_right
        }
    }

    pub fn node_of(&self, x: S) -> Result<usize> {
        let half = self.length / S::lit(2.0);
        let i = if x <= half {
            near_integer(x / self.dx_left)
        } else {
            near_integer((self.length - x) / self.dx_right)
                .and_then(|back| (self.nx - 1).checked_sub(back))
        };
        i.filter(|&i| i < self.nx)
            .ok_or_else(|| Error::Misaligned(format!("x = {x} is not a grid node")))
    }

    pub fn level_of(&self, t: S) -> Result<usize> {
        near_integer(t / self.dt)
            .filter(|&n| n < self.nt)
            .ok_or_else(|| Error::Misaligned(format!("t = {t} is not a time level")))
    }

    /// Whole time steps that fit in `height`.
    pub fn levels_for(&self, height: S) -> usize {
        (height / self.dt + S::lit(1e-9))
            .floor()
            .to_usize()
            .unwrap_or(0)
    }

    /// Initial displacement and velocity sampled on the nodes, with the
    /// Dirichlet walls forced to zero.
    pub fn initial_rows(&self, data: &InitialData<S>) -> (Vec<S>, Vec<S>) {
        let mut u0: Vec<S> = self
            .x
            .iter()
            .map(|&x| data.displacement(x, self.length))
            .collect();
        let mut g: Vec<S> = self
            .x
            .iter()
            .map(|&x| data.velocity(x, self.length))
            .collect();
        for row in [&mut u0, &mut g] {
            row[0] = S::zero();
            row[self.nx - 1] = S::zero();
        }
        (u0, g)
    }

    pub fn same_shape(&self, other: &Grid<S>) -> bool {
        self.nx == other.nx
            && self.nt == other.nt
            && self.dt == other.dt
            && self.dx_left == other.dx_left
            && self.dx_right == other.dx_right
    }
}

#[inline]
pub(crate) fn leapfrog_step<S: Real>(wl: S, wr: S, um: S, u: S, up: S, uold: S) -> S {
    (u + u) - uold + (wl * (um - u) + wr * (up - u))
}

#[inline]
pub(crate) fn taylor_start<S: Real>(wl: S, wr: S, um: S, u: S, up: S, g: S, dt: S) -> S {
    u + dt * g + S::lit(0.5) * (wl * (um - u) + wr * (up - u))
}

/// Solution samples on the full space-time grid plus the certification mask.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalField<S> {
    pub grid: Grid<S>,
    values: Vec<S>,
    mask: Vec<bool>,
}

impl<S: Real> GlobalField<S> {
    /// UTP initial guess: zero everywhere except the initial row, certified
    /// on row 0 and on the two wall columns.
    pub fn initial_guess(grid: Grid<S>, u0: &[S]) -> Self {
        let (nx, nt) = (grid.nx, grid.nt);
        let mut values = vec![S::zero(); nx * nt];
        values[..nx].copy_from_slice(u0);
        values[0] = S::zero();
        values[nx - 1] = S::zero();
        let mut mask = vec![false; nx * nt];
        mask[..nx].fill(true);
        for n in 0..nt {
            mask[n * nx] = true;
            mask[n * nx + nx - 1] = true;
        }
        Self { grid, values, mask }
    }

    #[inline]
    pub fn get(&self, n: usize, i: usize) -> S {
        self.values[n * self.grid.nx + i]
    }

    #[inline]
    pub fn certified(&self, n: usize, i: usize) -> bool {
        self.mask[n * self.grid.nx + i]
    }

    pub fn row(&self, n: usize) -> &[S] {
        let nx = self.grid.nx;
        &self.values[n * nx..(n + 1) * nx]
    }

    pub fn mask_row(&self, n: usize) -> &[bool] {
        let nx = self.grid.nx;
        &self.mask[n * nx..(n + 1) * nx]
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    #[inline]
    pub(crate) fn set(&mut self, n: usize, i: usize, v: S, certified: bool) {
        let idx = n * self.grid.nx + i;
        self.values[idx] = v;
        self.mask[idx] = certified;
    }

    /// Highest level `n` such that column `i` is certified on `0..=n`.
    pub fn certified_front(&self, i: usize) -> usize {
        let nx = self.grid.nx;
        let mut n = 0;
        while n + 1 < self.grid.nt && self.mask[(n + 1) * nx + i] {
            n += 1;
        }
        n
    }

    pub fn certified_fronts(&self) -> Vec<usize> {
        (0..self.grid.nx).map(|i| self.certified_front(i)).collect()
    }

    pub fn certified_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn is_fully_certified(&self) -> bool {
        self.mask.iter().all(|&m| m)
    }
}

/// Node-aligned rectangle: columns `i_lo..=i_hi`, levels `n_lo..=n_hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DiscreteRect {
    pub i_lo: usize,
    pub i_hi: usize,
    pub n_lo: usize,
    pub n_hi: usize,
}

impl DiscreteRect {
    pub fn from_rect<S: Real>(rect: &Rect<S>, grid: &Grid<S>) -> Result<Self> {
        let d = Self {
            i_lo: grid.node_of(rect.x_lo)?,
            i_hi: grid.node_of(rect.x_hi)?,
            n_lo: grid.level_of(rect.t_lo)?,
            n_hi: grid.level_of(rect.t_hi)?,
        };
        if d.i_hi < d.i_lo + 2 || d.n_hi <= d.n_lo {
            return Err(Error::Misaligned(format!(
                "rectangle {d:?} has no interior nodes"
            )));
        }
        Ok(d)
    }

    pub fn width(&self) -> usize {
        self.i_hi - self.i_lo + 1
    }

    pub fn rows(&self) -> usize {
        self.n_hi - self.n_lo + 1
    }

    pub fn node_count(&self) -> usize {
        self.width() * self.rows()
    }
}

/// Data below a rectangle: the initial row and velocity for a pitch from
/// `t = 0`, otherwise the two levels `t_lo - dt` and `t_lo`.
#[derive(Debug, Clone, PartialEq)]
pub enum Base<S> {
    Initial { u0: Vec<S>, g: Vec<S> },
    Levels { below: Vec<S>, at: Vec<S> },
}

impl<S> Base<S> {
    fn at(&self) -> &[S] {
        match self {
            Base::Initial { u0, .. } => u0,
            Base::Levels { at, .. } => at,
        }
    }
}

/// Lateral Dirichlet data for levels `n_lo + 1..=n_hi`.
#[derive(Debug, Clone, PartialEq)]
pub struct Traces<S> {
    pub left: Vec<S>,
    pub right: Vec<S>,
}

/// Certification of a rectangle's inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct BaseMask {
    pub at: Vec<bool>,
    /// `None` for a pitch from `t = 0`, where the velocity is exact data.
    pub below: Option<Vec<bool>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceMasks {
    pub left: Vec<bool>,
    pub right: Vec<bool>,
}

/// Values over a rectangle, row-major, row 0 at `n_lo`.
#[derive(Debug, Clone, PartialEq)]
pub struct Patch<S> {
    pub rect: DiscreteRect,
    pub values: Vec<S>,
}

impl<S: Copy> Patch<S> {
    #[inline]
    pub fn get(&self, r: usize, c: usize) -> S {
        self.values[r * self.rect.width() + c]
    }
}

/// Row-major certification flags over a rectangle.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskPatch {
    pub rect: DiscreteRect,
    pub flags: Vec<bool>,
}

impl MaskPatch {
    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        self.flags[r * self.rect.width() + c]
    }
}

fn check_inputs<S>(rect: &DiscreteRect, base: &Base<S>, traces: &Traces<S>) -> Result<()> {
    let w = rect.width();
    let steps = rect.rows() - 1;
    let base_ok = match base {
        Base::Initial { u0, g } => rect.n_lo == 0 && u0.len() == w && g.len() == w,
        Base::Levels { below, at } => rect.n_lo > 0 && below.len() == w && at.len() == w,
    };
    if !base_ok || traces.left.len() != steps || traces.right.len() != steps {
        return Err(Error::GridMismatch(format!(
            "local inputs do not match rectangle {rect:?}"
        )));
    }
    Ok(())
}

/// Leapfrog solve on a rectangle given in physical coordinates; rejects
/// rectangles that do not sit on grid nodes.
pub fn leapfrog_local<S: Real>(
    rect: &Rect<S>,
    grid: &Grid<S>,
    base: &Base<S>,
    traces: &Traces<S>,
) -> Result<Patch<S>> {
    let d = DiscreteRect::from_rect(rect, grid)?;
    leapfrog_patch(&d, grid, base, traces)
}

/// Leapfrog solve on a node-aligned rectangle.
pub fn leapfrog_patch<S: Real>(
    rect: &DiscreteRect,
    grid: &Grid<S>,
    base: &Base<S>,
    traces: &Traces<S>,
) -> Result<Patch<S>> {
    check_inputs(rect, base, traces)?;
    let w = rect.width();
    let rows = rect.rows();
    let mut v = vec![S::zero(); rows * w];
    v[..w].copy_from_slice(base.at());

    for r in 1..rows {
        v[r * w] = traces.left[r - 1];
        v[r * w + w - 1] = traces.right[r - 1];
        for c in 1..w - 1 {
            let (wl, wr) = grid.weights(rect.i_lo + c);
            let prev = (r - 1) * w;
            let (um, u, up) = (v[prev + c - 1], v[prev + c], v[prev + c + 1]);
            v[r * w + c] = if r == 1 {
                match base {
                    Base::Initial { g, .. } => taylor_start(wl, wr, um, u, up, g[c], grid.dt),
                    Base::Levels { below, .. } => leapfrog_step(wl, wr, um, u, up, below[c]),
                }
            } else {
                leapfrog_step(wl, wr, um, u, up, v[(r - 2) * w + c])
            };
        }
    }
    Ok(Patch {
        rect: *rect,
        values: v,
    })
}

/// Certification of a leapfrog patch: a computed node is certified iff the
/// four stencil inputs are; lateral and base nodes inherit their donors'
/// flags.
pub fn certify(rect: &DiscreteRect, base: &BaseMask, traces: &TraceMasks) -> MaskPatch {
    let w = rect.width();
    let rows = rect.rows();
    let mut m = vec![false; rows * w];
    m[..w].copy_from_slice(&base.at);
    for r in 1..rows {
        m[r * w] = traces.left[r - 1];
        m[r * w + w - 1] = traces.right[r - 1];
        for c in 1..w - 1 {
            let prev = (r - 1) * w;
            let below = if r == 1 {
                base.below.as_ref().is_none_or(|b| b[c])
            } else {
                m[(r - 2) * w + c]
            };
            m[r * w + c] = below && m[prev + c - 1] && m[prev + c] && m[prev + c + 1];
        }
    }
    MaskPatch {
        rect: *rect,
        flags: m,
    }
}

/// Full-domain leapfrog run; every node certified.
pub fn monolithic_solve<S: Real>(cfg: &ProblemConfig<S>, grid: &Grid<S>) -> GlobalField<S> {
    let (u0, g) = grid.initial_rows(&cfg.initial_data);
    monolithic_from_rows(grid, &u0, &g)
}

pub fn monolithic_from_rows<S: Real>(grid: &Grid<S>, u0: &[S], g: &[S]) -> GlobalField<S> {
    let (nx, nt) = (grid.nx, grid.nt);
    let mut v = vec![S::zero(); nx * nt];
    v[..nx].copy_from_slice(u0);
    v[0] = S::zero();
    v[nx - 1] = S::zero();
    for n in 1..nt {
        for i in 1..nx - 1 {
            let (wl, wr) = grid.weights(i);
            let prev = (n - 1) * nx;
            let (um, u, up) = (v[prev + i - 1], v[prev + i], v[prev + i + 1]);
            v[n * nx + i] = if n == 1 {
                taylor_start(wl, wr, um, u, up, g[i], grid.dt)
            } else {
                leapfrog_step(wl, wr, um, u, up, v[(n - 2) * nx + i])
            };
        }
    }
    GlobalField {
        grid: grid.clone(),
        values: v,
        mask: vec![true; nx * nt],
    }
}

/// Discrete energy between levels `n` and `n + 1`,
/// `sum_i m_i/(2 c_i^2) (du_i/dt)^2 + sum_cells (du^{n+1} du^n)/(2 h)`,
/// which the scheme conserves up to rounding.
pub fn discrete_energy<S: Real>(field: &GlobalField<S>, n: usize) -> S {
    let g = &field.grid;
    let half = S::lit(0.5);
    let (a, b) = (field.row(n), field.row(n + 1));
    let mut kinetic = S::zero();
    for i in 1..g.nx - 1 {
        let m = half * (g.cell(i - 1) + g.cell(i));
        let c = g.speed(i);
        let du = (b[i] - a[i]) / g.dt;
        kinetic = kinetic + half * m * du * du / (c * c);
    }
    let mut potential = S::zero();
    for i in 0..g.nx - 1 {
        potential = potential + half * (b[i + 1] - b[i]) * (a[i + 1] - a[i]) / g.cell(i);
    }
    kinetic + potential
}

/// Odd, `2L`-periodic extension of `f`.
pub fn odd_periodic<S: Real>(f: &impl Fn(S) -> S, length: S, x: S) -> S {
    let period = length + length;
    let mut y = x % period;
    if y < S::zero() {
        y = y + period;
    }
    if y == S::zero() || y == length {
        S::zero()
    } else if y < length {
        f(y)
    } else {
        -f(period - y)
    }
}

/// Adaptive Simpson quadrature to an absolute tolerance.
pub fn adaptive_simpson<S: Real>(f: &impl Fn(S) -> S, a: S, b: S, tol: S) -> S {
    fn simpson<S: Real>(fa: S, fm: S, fb: S, a: S, b: S) -> S {
        (b - a) / S::lit(6.0) * (fa + S::lit(4.0) * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse<S: Real>(
        f: &impl Fn(S) -> S,
        a: S,
        b: S,
        fa: S,
        fm: S,
        fb: S,
        whole: S,
        tol: S,
        depth: u32,
    ) -> S {
        let two = S::lit(2.0);
        let m = (a + b) / two;
        let (lm, rm) = ((a + m) / two, (m + b) / two);
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= S::lit(15.0) * tol {
            left + right + delta / S::lit(15.0)
        } else {
            recurse(f, a, m, fa, flm, fm, left, tol / two, depth - 1)
                + recurse(f, m, b, fm, frm, fb, right, tol / two, depth - 1)
        }
    }
    if a == b {
        return S::zero();
    }
    let m = (a + b) / S::lit(2.0);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(fa, fm, fb, a, b);
    recurse(f, a, b, fa, fm, fb, whole, tol, 48)
}

/// d'Alembert solution with Dirichlet walls (odd reflections) for
/// displacement `f` and velocity `g` on `(0, L)`.
pub fn dalembert_with<S: Real>(
    f: impl Fn(S) -> S,
    g: impl Fn(S) -> S,
    length: S,
    c: S,
    x: S,
    t: S,
) -> S {
    let half = S::lit(0.5);
    let (a, b) = (x - c * t, x + c * t);
    let waves = half * (odd_periodic(&f, length, b) + odd_periodic(&f, length, a));
    let gt = |s: S| odd_periodic(&g, length, s);
    // split at wall images so each panel integrates a smooth piece
    let mut cuts = vec![a];
    let mut wall = (a / length).floor() + S::one();
    while wall * length < b {
        cuts.push(wall * length);
        wall = wall + S::one();
    }
    cuts.push(b);
    let tol = S::lit(1e-12) / S::from_usize_lossy(cuts.len());
    let integral = cuts
        .windows(2)
        .map(|p| adaptive_simpson(&gt, p[0], p[1], tol))
        .fold(S::zero(), |acc, v| acc + v);
    waves + integral / (c + c)
}

/// Closed-form solution of the homogeneous problem.
pub fn dalembert_exact<S: Real>(x: S, t: S, cfg: &ProblemConfig<S>) -> Result<S> {
    if !cfg.is_homogeneous() {
        return Err(Error::NotHomogeneous);
    }
    let data = cfg.initial_data;
    let length = cfg.length;
    Ok(dalembert_with(
        |s| data.displacement(s, length),
        |s| data.velocity(s, length),
        length,
        cfg.c_left,
        x,
        t,
    ))
}
