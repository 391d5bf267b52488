//! Randomized cases and independent oracles shared by the property tests
//! and the acceptance harness.

#![allow(dead_code)]

use std::collections::HashSet;

use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

use utp::costmodel::{evaluate_strategy, Strategy as CostStrategy};
use utp::orchestrator::{run_utp_from_rows, RunOptions};
use utp::solver::{certify, leapfrog_patch, Base, BaseMask, DiscreteRect, Grid, TraceMasks, Traces};
use utp::tents::{default_resolution, front_advance, travel_time, Front, Rect};
use utp::{build_decomposition, Config, H2Rule, InitialData};

const SPEEDS: [(f64, f64); 6] = [(2.0, 1.0), (1.0, 2.0), (1.0, 1.0), (3.0, 1.0), (1.0, 3.0), (1.5, 1.0)];
const MAX_SAMPLES: usize = 1200;

fn rule(i: usize) -> H2Rule {
    H2Rule::ALL[i % H2Rule::ALL.len()]
}

// ---------------------------------------------------------------- fronts

#[derive(Debug, Clone)]
pub struct FrontCase {
    pub cfg: Config,
    pub j_pick: f64,
    pub start: f64,
    pub start2: f64,
    pub steps: Vec<f64>,
    pub steps2: Vec<f64>,
    pub drop: f64,
    pub height: f64,
}

pub fn front_cases() -> impl Strategy<Value = FrontCase> {
    (
        (1usize..=3, 1usize..=6, 0usize..SPEEDS.len(), 0usize..4),
        0.0f64..1.0,
        (0.0f64..0.3, 0.0f64..0.3),
        prop::collection::vec(-1.0f64..=1.0, MAX_SAMPLES),
        prop::collection::vec(-1.0f64..=1.0, MAX_SAMPLES),
        (0.0f64..1.0, 0.01f64..0.5),
    )
        .prop_map(|((m1, m2, sp, r), j_pick, (start, start2), steps, steps2, (drop, height))| {
            let (c_left, c_right) = SPEEDS[sp];
            let cfg = Config {
                m1,
                m2,
                c_left,
                c_right,
                h2_rule: rule(r),
                final_time: 1.0,
                ..Config::baseline()
            };
            FrontCase {
                cfg,
                j_pick,
                start,
                start2,
                steps,
                steps2,
                drop,
                height,
            }
        })
}

/// Random walk whose increments are bounded by the travel time between
/// neighboring samples, clipped at zero.
pub fn lipschitz_front(cfg: &Config, resolution: usize, start: f64, steps: &[f64]) -> Front<f64> {
    let probe = Front::flat(cfg.length, resolution, 0.0);
    let mut v = Vec::with_capacity(resolution);
    v.push(start);
    for s in 1..resolution {
        let tau = travel_time(probe.x(s - 1), probe.x(s), cfg);
        v.push((v[s - 1] + steps[s] * tau).max(0.0));
    }
    Front::from_values(cfg.length, v)
}

impl FrontCase {
    pub fn fronts(&self) -> (Front<f64>, Front<f64>) {
        let res = default_resolution(&self.cfg);
        assert!(res <= MAX_SAMPLES, "resolution {res}");
        let a = lipschitz_front(&self.cfg, res, self.start, &self.steps);
        let b = lipschitz_front(&self.cfg, res, self.start2, &self.steps2);
        (a, b)
    }

    /// Valid rectangle on `front`: base at or below its minimum over the
    /// chosen subdomain.
    pub fn rect(&self, front: &Front<f64>) -> Rect<f64> {
        let dec = build_decomposition(&self.cfg).unwrap();
        let n = dec.n_subdomains();
        let j = (1 + (self.j_pick * n as f64) as usize).min(n);
        let (x_lo, x_hi) = dec.interval(j);
        let t_lo = front.min_over(x_lo, x_hi) * (1.0 - self.drop);
        Rect {
            j,
            k: 2,
            x_lo,
            x_hi,
            t_lo,
            t_hi: t_lo + self.height,
        }
    }
}

/// Monotonicity, idempotence and Lipschitz preservation of one advance.
pub fn check_front_laws(case: &FrontCase) -> Result<(), TestCaseError> {
    let cfg = &case.cfg;
    let (phi, other) = case.fronts();
    let psi = Front::from_values(
        cfg.length,
        phi.values()
            .iter()
            .zip(other.values())
            .map(|(a, b)| a.max(*b))
            .collect(),
    );
    let rect = case.rect(&phi);
    let a = front_advance(&phi, &rect, cfg).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let b = front_advance(&psi, &rect, cfg).map_err(|e| TestCaseError::fail(e.to_string()))?;
    for s in 0..a.resolution() {
        prop_assert!(a.values()[s] <= b.values()[s], "monotonicity at sample {}", s);
        prop_assert!(a.values()[s] >= phi.values()[s], "front moved down at {}", s);
    }
    let again = front_advance(&a, &rect, cfg).map_err(|e| TestCaseError::fail(e.to_string()))?;
    prop_assert_eq!(again.values(), a.values(), "not idempotent");
    for s in 1..a.resolution() {
        let tau = travel_time(a.x(s - 1), a.x(s), cfg);
        let jump = (a.values()[s] - a.values()[s - 1]).abs();
        prop_assert!(jump <= tau + 1e-12, "Lipschitz bound broken at {}: {} > {}", s, jump, tau);
    }
    Ok(())
}

/// Travel time by midpoint quadrature of the slowness, split at `L/2`.
pub fn slowness_integral(cfg: &Config, a: f64, b: f64) -> f64 {
    let (lo, hi) = (a.min(b), a.max(b));
    let half = cfg.length / 2.0;
    let pieces: Vec<(f64, f64)> = if lo < half && half < hi {
        vec![(lo, half), (half, hi)]
    } else {
        vec![(lo, hi)]
    };
    let cells = 1000;
    pieces
        .into_iter()
        .map(|(p, q)| {
            let h = (q - p) / cells as f64;
            (0..cells)
                .map(|i| {
                    let mid = p + (i as f64 + 0.5) * h;
                    let c = if mid < half { cfg.c_left } else { cfg.c_right };
                    h / c
                })
                .sum::<f64>()
        })
        .sum()
}

/// Brute-force certified height at each sample of the rectangle: scan
/// `levels + 1` candidate times and keep the highest one whose backward
/// characteristics reach each non-wall side no later than the front there.
pub fn brute_force_advance(front: &Front<f64>, rect: &Rect<f64>, cfg: &Config, levels: usize) -> Vec<(usize, f64)> {
    let tol = 1e-12 * cfg.length;
    let lo_wall = rect.x_lo <= tol;
    let hi_wall = rect.x_hi >= cfg.length - tol;
    let phi_lo = front.value_at(rect.x_lo);
    let phi_hi = front.value_at(rect.x_hi);
    let dt = (rect.t_hi - rect.t_lo) / levels as f64;
    front
        .sample_range(rect.x_lo, rect.x_hi)
        .map(|s| {
            let x = front.x(s);
            let to_lo = slowness_integral(cfg, x, rect.x_lo);
            let to_hi = slowness_integral(cfg, x, rect.x_hi);
            let mut best = front.values()[s];
            for l in 0..=levels {
                let t = rect.t_lo + l as f64 * dt;
                let ok_lo = lo_wall || t - to_lo <= phi_lo;
                let ok_hi = hi_wall || t - to_hi <= phi_hi;
                if ok_lo && ok_hi {
                    best = best.max(t);
                }
            }
            (s, best)
        })
        .collect()
}

pub fn check_min_plus_oracle(case: &FrontCase) -> Result<(), TestCaseError> {
    let cfg = &case.cfg;
    let (phi, _) = case.fronts();
    let rect = case.rect(&phi);
    let levels = 1000;
    let fast = front_advance(&phi, &rect, cfg).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let spacing = (rect.t_hi - rect.t_lo) / levels as f64;
    for (s, oracle) in brute_force_advance(&phi, &rect, cfg, levels) {
        let got = fast.values()[s];
        prop_assert!(
            (got - oracle).abs() <= 1e-10 + spacing,
            "sample {}: advance {} vs brute force {}",
            s,
            got,
            oracle
        );
    }
    Ok(())
}

// --------------------------------------------------------- certification

#[derive(Debug, Clone)]
pub struct CertCase {
    pub width: usize,
    pub rows: usize,
    pub initial: bool,
    pub col_pick: f64,
    pub at: Vec<bool>,
    pub below: Vec<bool>,
    pub left: Vec<bool>,
    pub right: Vec<bool>,
    pub values: Vec<f64>,
    pub noise: Vec<f64>,
}

pub fn cert_cases() -> impl Strategy<Value = CertCase> {
    let flags = || prop::collection::vec(prop::bool::weighted(0.8), 16);
    (
        (3usize..=14, 2usize..=12, any::<bool>(), 0.0f64..1.0),
        (flags(), flags(), flags(), flags()),
        prop::collection::vec(-1.0f64..1.0, 64),
        prop::collection::vec(0.5f64..2.0, 64),
    )
        .prop_map(|((width, rows, initial, col_pick), (at, below, left, right), values, noise)| CertCase {
            width,
            rows,
            initial,
            col_pick,
            at,
            below,
            left,
            right,
            values,
            noise,
        })
}

/// Certification by explicit traversal of each node's dependency cone.
pub fn brute_force_certify(
    rect: &DiscreteRect,
    base: &BaseMask,
    traces: &TraceMasks,
) -> Vec<bool> {
    let w = rect.width();
    let rows = rect.rows();
    let mut out = vec![false; rows * w];
    // row index -1 is encoded as `None`
    for r in 0..rows {
        for c in 0..w {
            let mut seen: HashSet<(Option<usize>, usize)> = HashSet::new();
            let mut stack = vec![(Some(r), c)];
            let mut ok = true;
            while let Some(node) = stack.pop() {
                if !seen.insert(node) {
                    continue;
                }
                let (row, col) = node;
                let leaf = match row {
                    None => Some(base.below.as_ref().is_none_or(|b| b[col])),
                    Some(0) => Some(base.at[col]),
                    Some(rr) if col == 0 => Some(traces.left[rr - 1]),
                    Some(rr) if col == w - 1 => Some(traces.right[rr - 1]),
                    Some(_) => None,
                };
                match leaf {
                    Some(flag) => ok &= flag,
                    None => {
                        let rr = row.unwrap();
                        for cc in [col - 1, col, col + 1] {
                            stack.push((Some(rr - 1), cc));
                        }
                        stack.push((rr.checked_sub(2), col));
                    }
                }
            }
            out[r * w + c] = ok;
        }
    }
    out
}

pub fn cert_grid() -> Grid<f64> {
    Grid::new(&Config::baseline()).unwrap()
}

/// The stencil rule agrees with the dependency cone, and perturbing any
/// uncertified input leaves every certified output bit-identical.
pub fn check_certification(case: &CertCase, grid: &Grid<f64>) -> Result<(), TestCaseError> {
    let (w, rows) = (case.width, case.rows);
    let i_lo = 1 + (case.col_pick * (grid.nx - w - 2) as f64) as usize;
    let n_lo = if case.initial { 0 } else { 5 };
    let rect = DiscreteRect {
        i_lo,
        i_hi: i_lo + w - 1,
        n_lo,
        n_hi: n_lo + rows - 1,
    };
    let base_mask = BaseMask {
        at: case.at[..w].to_vec(),
        below: (!case.initial).then(|| case.below[..w].to_vec()),
    };
    let trace_masks = TraceMasks {
        left: case.left[..rows - 1].to_vec(),
        right: case.right[..rows - 1].to_vec(),
    };
    let got = certify(&rect, &base_mask, &trace_masks);
    let oracle = brute_force_certify(&rect, &base_mask, &trace_masks);
    prop_assert_eq!(&got.flags, &oracle);

    let v = &case.values;
    let at: Vec<f64> = v[..w].to_vec();
    let below: Vec<f64> = v[16..16 + w].to_vec();
    let left: Vec<f64> = v[32..32 + rows - 1].to_vec();
    let right: Vec<f64> = v[48..48 + rows - 1].to_vec();
    let bump = |vals: &[f64], flags: &[bool], off: usize| -> Vec<f64> {
        vals.iter()
            .zip(flags)
            .enumerate()
            .map(|(i, (&x, &f))| if f { x } else { x + case.noise[off + i] })
            .collect()
    };
    let make_base = |at: Vec<f64>, below: Vec<f64>| {
        if case.initial {
            Base::Initial { u0: at, g: below }
        } else {
            Base::Levels { below, at }
        }
    };
    // initial velocity is exact data, so it is never perturbed
    let below_flags = if case.initial { vec![true; w] } else { case.below[..w].to_vec() };
    let clean = leapfrog_patch(
        &rect,
        grid,
        &make_base(at.clone(), below.clone()),
        &Traces {
            left: left.clone(),
            right: right.clone(),
        },
    )
    .map_err(|e| TestCaseError::fail(e.to_string()))?;
    let noisy = leapfrog_patch(
        &rect,
        grid,
        &make_base(bump(&at, &case.at[..w], 0), bump(&below, &below_flags, 16)),
        &Traces {
            left: bump(&left, &case.left[..rows - 1], 32),
            right: bump(&right, &case.right[..rows - 1], 48),
        },
    )
    .map_err(|e| TestCaseError::fail(e.to_string()))?;
    for r in 0..rows {
        for c in 0..w {
            if got.get(r, c) {
                prop_assert_eq!(
                    clean.get(r, c).to_bits(),
                    noisy.get(r, c).to_bits(),
                    "certified node ({}, {}) depends on uncertified input",
                    r,
                    c
                );
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------- mirror

const MIRROR_SPEEDS: [(f64, f64); 5] = [(2.0, 1.0), (1.0, 2.0), (3.0, 1.0), (1.0, 4.0), (4.0, 1.0)];

#[derive(Debug, Clone)]
pub struct MirrorCase {
    pub cfg: Config,
}

pub fn mirror_cases() -> impl Strategy<Value = MirrorCase> {
    (1usize..=3, 1usize..=4, 0usize..MIRROR_SPEEDS.len(), 0usize..4, 0.2f64..0.8)
        .prop_map(|(m1, m2, sp, r, center)| {
            let (c_left, c_right) = MIRROR_SPEEDS[sp];
            MirrorCase {
                cfg: Config {
                    m1,
                    m2,
                    c_left,
                    c_right,
                    h2_rule: rule(r),
                    final_time: Config::default_final_time(1.0, c_left, c_right),
                    points_per_subdomain: 24,
                    initial_data: InitialData::GaussianPulse { center, width: 0.07 },
                    ..Config::baseline()
                },
            }
        })
}

/// Decomposition, discrete UTP run and pipeline totals of the mirrored
/// problem are the reflections of the original ones.
pub fn check_mirror(case: &MirrorCase) -> Result<(), TestCaseError> {
    let cfg = &case.cfg;
    let mir = cfg.mirrored();

    let d = build_decomposition(cfg).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let dm = build_decomposition(&mir).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let n = d.n_points();
    prop_assert_eq!(n, dm.n_points());
    for i in 0..n {
        prop_assert!((dm.points[i] - (cfg.length - d.points[n - 1 - i])).abs() <= 1e-12);
    }
    let mut lengths = d.interval_lengths();
    lengths.reverse();
    for (a, b) in lengths.iter().zip(dm.interval_lengths()) {
        prop_assert!((a - b).abs() <= 1e-12);
    }

    let s = CostStrategy {
        m2: cfg.m2,
        h2_rule: cfg.h2_rule,
    };
    match (evaluate_strategy(cfg, s), evaluate_strategy(&mir, s)) {
        (Ok(a), Ok(b)) => {
            prop_assert_eq!(a.iterations, b.iterations);
            prop_assert!((a.sync.total - b.sync.total).abs() <= 1e-12 * a.sync.total.max(1.0));
            prop_assert!(
                (a.asynchronous.total - b.asynchronous.total).abs()
                    <= 1e-12 * a.asynchronous.total.max(1.0)
            );
        }
        (Err(a), Err(b)) => prop_assert_eq!(a, b),
        (a, b) => prop_assert!(false, "one side failed: {:?} / {:?}", a.err(), b.err()),
    }

    let grid = Grid::new(cfg).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let grid_m = Grid::new(&mir).map_err(|e| TestCaseError::fail(e.to_string()))?;
    prop_assert_eq!((grid.nx, grid.nt), (grid_m.nx, grid_m.nt));
    let (u0, g) = grid.initial_rows(&cfg.initial_data);
    let mut u0m = u0.clone();
    u0m.reverse();
    let opts = RunOptions::default();
    let a = run_utp_from_rows(cfg, grid.clone(), &u0, &g, &opts);
    let b = run_utp_from_rows(&mir, grid_m, &u0m, &g, &opts);
    match (a, b) {
        (Ok(a), Ok(b)) => {
            prop_assert_eq!(a.iterations, b.iterations);
            for t in 0..grid.nt {
                let mut row = a.field.row(t).to_vec();
                row.reverse();
                let bits = |r: &[f64]| r.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
                prop_assert_eq!(bits(&row), bits(b.field.row(t)), "level {}", t);
                let mut mask = a.field.mask_row(t).to_vec();
                mask.reverse();
                prop_assert_eq!(&mask[..], b.field.mask_row(t));
            }
        }
        (Err(a), Err(b)) => prop_assert_eq!(a, b),
        (a, b) => prop_assert!(false, "one side failed: {:?} / {:?}", a.err(), b.err()),
    }
    Ok(())
}
