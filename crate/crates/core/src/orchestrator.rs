//! Red/black iteration driver over the discrete grid.
//!
//! Every iteration reads one snapshot of the global field, solves all
//! rectangles of the current color independently (in parallel when a
//! thread count is given) and merges the patches back in subdomain order.
//! A node that is already certified is never overwritten, so certified
//! values are final and the result does not depend on scheduling.

use std::time::Instant;

use log::debug;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::ProblemConfig;
use crate::decomp::{build_decomposition, Color, Decomposition};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::solver::{
    certify, leapfrog_patch, monolithic_from_rows, Base, BaseMask, DiscreteRect, GlobalField,
    Grid, MaskPatch, Patch, TraceMasks, Traces,
};
use crate::tents::Rect;

const MAX_ITERATIONS: usize = 100_000;
const FAULT: f64 = 1e-3;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOptions {
    /// Worker threads; 0 runs serially on the calling thread.
    pub threads: usize,
    /// Stop after this many iterations even if the field is not certified.
    pub max_iterations: Option<usize>,
    /// Perturb one certified node of the first patch, to exercise the
    /// oracle comparison.
    pub inject_fault: bool,
    pub record_wall_clock: bool,
}

/// One solved rectangle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    pub k: usize,
    pub color: Color,
    pub j: usize,
    pub x_lo: f64,
    pub x_hi: f64,
    pub t_lo: f64,
    pub t_hi: f64,
    pub nodes: usize,
    pub newly_certified: usize,
    pub wall_clock_us: u64,
}

#[derive(Debug, Clone)]
pub struct UtpRun<S> {
    pub field: GlobalField<S>,
    pub iterations: usize,
    pub records: Vec<IterationRecord>,
    pub rects: Vec<Rect<S>>,
    /// Certified front (highest contiguous level per column) after each
    /// iteration.
    pub fronts: Vec<Vec<usize>>,
    pub decomposition: Decomposition<S>,
}

impl<S: Real> UtpRun<S> {
    pub fn completed(&self) -> bool {
        self.field.is_fully_certified()
    }
}

/// Deviation of a UTP field from the monolithic solve on the same grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Deviation {
    pub max_certified_dev: f64,
    pub max_uncertified_dev: f64,
    pub uncertified_count: usize,
}

/// Mutable state of a UTP run between iterations.
#[derive(Debug, Clone)]
pub struct UtpState<S> {
    pub field: GlobalField<S>,
    velocity: Vec<S>,
}

struct Solved<S> {
    j: usize,
    patch: Patch<S>,
    mask: MaskPatch,
    micros: u64,
}

impl<S: Real> UtpState<S> {
    pub fn new(grid: Grid<S>, u0: &[S], g: &[S]) -> Result<Self> {
        if u0.len() != grid.nx || g.len() != grid.nx {
            return Err(Error::GridMismatch(format!(
                "initial rows have {} and {} values for {} nodes",
                u0.len(),
                g.len(),
                grid.nx
            )));
        }
        let mut velocity = g.to_vec();
        velocity[0] = S::zero();
        velocity[grid.nx - 1] = S::zero();
        Ok(Self {
            field: GlobalField::initial_guess(grid, u0),
            velocity,
        })
    }

    fn inputs(&self, d: &DiscreteRect) -> (Base<S>, Traces<S>, BaseMask, TraceMasks) {
        let f = &self.field;
        let cols = d.i_lo..=d.i_hi;
        let at = f.row(d.n_lo)[cols.clone()].to_vec();
        let at_mask = f.mask_row(d.n_lo)[cols.clone()].to_vec();
        let (base, below) = if d.n_lo == 0 {
            let g = self.velocity[cols].to_vec();
            (Base::Initial { u0: at, g }, None)
        } else {
            let below = f.row(d.n_lo - 1)[cols.clone()].to_vec();
            let below_mask = f.mask_row(d.n_lo - 1)[cols].to_vec();
            (Base::Levels { below, at }, Some(below_mask))
        };
        let levels = d.n_lo + 1..=d.n_hi;
        let traces = Traces {
            left: levels.clone().map(|n| f.get(n, d.i_lo)).collect(),
            right: levels.clone().map(|n| f.get(n, d.i_hi)).collect(),
        };
        let masks = TraceMasks {
            left: levels.clone().map(|n| f.certified(n, d.i_lo)).collect(),
            right: levels.map(|n| f.certified(n, d.i_hi)).collect(),
        };
        let base_mask = BaseMask { at: at_mask, below };
        (base, traces, base_mask, masks)
    }

    fn solve(&self, j: usize, d: &DiscreteRect, k: usize, timed: bool) -> Result<Solved<S>> {
        let start = timed.then(Instant::now);
        let (base, traces, base_mask, trace_masks) = self.inputs(d);
        let patch = leapfrog_patch(d, &self.field.grid, &base, &traces).map_err(|e| {
            Error::LocalSolve {
                j,
                k,
                reason: e.to_string(),
            }
        })?;
        let mask = certify(d, &base_mask, &trace_masks);
        let micros = start.map_or(0, |s| s.elapsed().as_micros() as u64);
        Ok(Solved {
            j,
            patch,
            mask,
            micros,
        })
    }

    /// Writes a patch into the field, keeping nodes that are already
    /// certified. Returns the number of newly certified nodes.
    fn merge(&mut self, s: &Solved<S>) -> usize {
        let d = s.patch.rect;
        let mut fresh = 0;
        for r in 1..d.rows() {
            let n = d.n_lo + r;
            for c in 1..d.width() - 1 {
                let i = d.i_lo + c;
                if self.field.certified(n, i) {
                    continue;
                }
                let ok = s.mask.get(r, c);
                fresh += usize::from(ok);
                self.field.set(n, i, s.patch.get(r, c), ok);
            }
        }
        fresh
    }
}

fn min_front(fronts: &[usize], lo: usize, hi: usize) -> usize {
    fronts[lo..=hi].iter().copied().min().unwrap_or(0)
}

/// Node-aligned rectangles for iteration `k`: base at the lowest certified
/// level over the subdomain, height `H` (first iteration) or `2H` in whole
/// time steps, capped at the last level.
pub fn pitch_iteration<S: Real>(
    fronts: &[usize],
    k: usize,
    grid: &Grid<S>,
    dec: &Decomposition<S>,
) -> Result<Vec<(usize, DiscreteRect)>> {
    let last = grid.nt - 1;
    let mut out = Vec::new();
    for &j in dec.color_set(Color::of_iteration(k)) {
        let (a, b) = dec.interval(j);
        let (i_lo, i_hi) = (grid.node_of(a)?, grid.node_of(b)?);
        let n_lo = min_front(fronts, i_lo, i_hi);
        if n_lo >= last {
            continue;
        }
        let h = dec.pitch_height(j);
        let height = if k == 1 { h } else { h + h };
        let n_hi = (n_lo + grid.levels_for(height)).min(last);
        if n_hi == n_lo || i_hi < i_lo + 2 {
            return Err(Error::LocalSolve {
                j,
                k,
                reason: format!(
                    "rectangle spans levels {n_lo}..={n_hi} and columns {i_lo}..={i_hi}; \
                     refine the grid"
                ),
            });
        }
        out.push((
            j,
            DiscreteRect {
                i_lo,
                i_hi,
                n_lo,
                n_hi,
            },
        ));
    }
    Ok(out)
}

/// Full UTP run from the configured initial data.
pub fn run_utp<S: Real>(cfg: &ProblemConfig<S>, opts: &RunOptions) -> Result<UtpRun<S>> {
    let grid = Grid::new(cfg)?;
    let (u0, g) = grid.initial_rows(&cfg.initial_data);
    run_utp_from_rows(cfg, grid, &u0, &g, opts)
}

/// UTP run from explicit initial rows on a prepared grid.
pub fn run_utp_from_rows<S: Real>(
    cfg: &ProblemConfig<S>,
    grid: Grid<S>,
    u0: &[S],
    g: &[S],
    opts: &RunOptions,
) -> Result<UtpRun<S>> {
    let dec = build_decomposition(cfg)?;
    let pool = if opts.threads > 0 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(opts.threads)
                .build()
                .map_err(|e| Error::InvalidConfig {
                    key: "threads".into(),
                    reason: e.to_string(),
                })?,
        )
    } else {
        None
    };

    let mut state = UtpState::new(grid, u0, g)?;
    let limit = opts.max_iterations.unwrap_or(MAX_ITERATIONS);
    let mut records = Vec::new();
    let mut rects = Vec::new();
    let mut fronts = Vec::new();
    let mut mins = vec![0usize];
    let mut k = 0;

    while !state.field.is_fully_certified() && k < limit {
        k += 1;
        let current = state.field.certified_fronts();
        let pitched = pitch_iteration(&current, k, &state.field.grid, &dec)?;
        let snapshot = &state;
        let work = |(j, d): &(usize, DiscreteRect)| snapshot.solve(*j, d, k, opts.record_wall_clock);
        let solved: Vec<Solved<S>> = match &pool {
            Some(p) => p.install(|| pitched.par_iter().map(work).collect::<Result<_>>())?,
            None => pitched.iter().map(work).collect::<Result<_>>()?,
        };

        for (idx, mut s) in solved.into_iter().enumerate() {
            if opts.inject_fault && k == 1 && idx == 0 {
                inject(&mut s);
            }
            let fresh = state.merge(&s);
            let d = s.patch.rect;
            let grid = &state.field.grid;
            let rect = Rect {
                j: s.j,
                k,
                x_lo: grid.x(d.i_lo),
                x_hi: grid.x(d.i_hi),
                t_lo: grid.t(d.n_lo),
                t_hi: grid.t(d.n_hi),
            };
            records.push(IterationRecord {
                k,
                color: Color::of_iteration(k),
                j: s.j,
                x_lo: rect.x_lo.as_f64(),
                x_hi: rect.x_hi.as_f64(),
                t_lo: rect.t_lo.as_f64(),
                t_hi: rect.t_hi.as_f64(),
                nodes: d.node_count(),
                newly_certified: fresh,
                wall_clock_us: s.micros,
            });
            rects.push(rect);
        }

        let front = state.field.certified_fronts();
        let lowest = front.iter().copied().min().unwrap_or(0);
        debug!("iteration {k}: lowest certified level {lowest}");
        mins.push(lowest);
        fronts.push(front);
        // a red+black pair must raise the lowest certified level
        if k >= 2 && mins[k] <= mins[k - 2] && !state.field.is_fully_certified() {
            return Err(Error::Stagnation { k });
        }
    }

    if opts.max_iterations.is_none() && !state.field.is_fully_certified() {
        return Err(Error::Stagnation { k });
    }
    Ok(UtpRun {
        field: state.field,
        iterations: k,
        records,
        rects,
        fronts,
        decomposition: dec,
    })
}

fn inject<S: Real>(s: &mut Solved<S>) {
    let d = s.patch.rect;
    let w = d.width();
    let r = d.rows() - 1;
    if let Some(c) = (1..w - 1).find(|&c| s.mask.get(r, c)) {
        let v = &mut s.patch.values[r * w + c];
        *v = *v + S::lit(FAULT);
    }
}

/// Compares a UTP field with the monolithic solve from the same initial rows.
pub fn verify_against_monolithic<S: Real>(field: &GlobalField<S>, g: &[S]) -> Deviation {
    let grid = &field.grid;
    let mono = monolithic_from_rows(grid, field.row(0), g);
    let mut dev = Deviation {
        max_certified_dev: 0.0,
        max_uncertified_dev: 0.0,
        uncertified_count: 0,
    };
    for n in 0..grid.nt {
        for i in 0..grid.nx {
            let e = (field.get(n, i) - mono.get(n, i)).abs().as_f64();
            if field.certified(n, i) {
                dev.max_certified_dev = dev.max_certified_dev.max(e);
            } else {
                dev.uncertified_count += 1;
                dev.max_uncertified_dev = dev.max_uncertified_dev.max(e);
            }
        }
    }
    dev
}
