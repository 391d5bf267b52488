//! Continuous tent geometry: characteristic travel times, the certified
//! front `phi` and its min-plus growth, and the geometric iteration
//! simulator.
//!
//! Inside a pitched rectangle `(x_lo, x_hi) x (t_lo, t_hi)` the local
//! solution at `(x, t)` only depends on exact data if its backward
//! characteristic cone stays inside certified input: the base row (exact by
//! construction, `t_lo <= min phi`) and the two lateral traces, exact up to
//! `phi(x_lo)` and `phi(x_hi)`. Hence
//!
//! ```text
//! phi'(x) = max(phi(x), min(t_hi, phi(x_lo) + tau(x, x_lo), phi(x_hi) + tau(x, x_hi)))
//! ```
//!
//! with a wall endpoint (`0` or `L`) dropping its term, since homogeneous
//! Dirichlet data is exact for all times.

use serde::Serialize;

use crate::config::ProblemConfig;
use crate::decomp::{classify_strategy, Color, Decomposition, StrategyTag};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Minimum number of front samples.
pub const MIN_RESOLUTION: usize = 257;

/// Target number of gaps of the default front sampling.
const TARGET_GAPS: usize = 1024;

const MAX_ITERATIONS: usize = 100_000;

/// Characteristic travel time between `x` and `y` through the two-speed
/// medium.
pub fn travel_time<S: Real>(x: S, y: S, cfg: &ProblemConfig<S>) -> S {
    let half = cfg.half();
    let (a, b) = if x <= y { (x, y) } else { (y, x) };
    if b <= half {
        (b - a) / cfg.c_left
    } else if a >= half {
        (b - a) / cfg.c_right
    } else {
        (half - a) / cfg.c_left + (b - half) / cfg.c_right
    }
}

/// Space-time rectangle `I_j x (t_lo, t_hi)` pitched at iteration `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rect<S> {
    pub j: usize,
    pub k: usize,
    pub x_lo: S,
    pub x_hi: S,
    pub t_lo: S,
    pub t_hi: S,
}

impl<S: Real> Rect<S> {
    pub fn width(&self) -> S {
        self.x_hi - self.x_lo
    }

    pub fn height(&self) -> S {
        self.t_hi - self.t_lo
    }

    pub fn color(&self) -> Color {
        Color::of_iteration(self.k)
    }
}

/// Certified height `phi` sampled uniformly on `[0, L]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Front<S> {
    length: S,
    values: Vec<S>,
}

impl<S: Real> Front<S> {
    pub fn flat(length: S, resolution: usize, value: S) -> Self {
        assert!(resolution >= 2, "front needs at least two samples");
        Self {
            length,
            values: vec![value; resolution],
        }
    }

    pub fn from_values(length: S, values: Vec<S>) -> Self {
        assert!(values.len() >= 2, "front needs at least two samples");
        Self { length, values }
    }

    pub fn resolution(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn length(&self) -> S {
        self.length
    }

    pub fn spacing(&self) -> S {
        self.length / S::from_usize_lossy(self.values.len() - 1)
    }

    pub fn x(&self, s: usize) -> S {
        if s + 1 == self.values.len() {
            self.length
        } else {
            S::from_usize_lossy(s) * self.spacing()
        }
    }

    /// Linear interpolation; exact at samples.
    pub fn value_at(&self, x: S) -> S {
        let last = self.values.len() - 1;
        let pos = (x / self.spacing()).max(S::zero());
        let nearest = pos.round();
        if (pos - nearest).abs() <= S::lit(1e-9) {
            let s = nearest.to_usize().unwrap_or(last).min(last);
            return self.values[s];
        }
        let s = pos.floor().to_usize().unwrap_or(last).min(last - 1);
        let w = pos - S::from_usize_lossy(s);
        self.values[s] * (S::one() - w) + self.values[s + 1] * w
    }

    /// `x` moved onto the nearest sample when it is within rounding of one.
    pub fn snap(&self, x: S) -> S {
        let pos = x / self.spacing();
        let nearest = pos.round();
        if (pos - nearest).abs() <= S::lit(1e-9) && nearest >= S::zero() {
            let last = self.values.len() - 1;
            self.x(nearest.to_usize().unwrap_or(last).min(last))
        } else {
            x
        }
    }

    /// Sample indices inside the closed interval `[a, b]`.
    pub fn sample_range(&self, a: S, b: S) -> std::ops::RangeInclusive<usize> {
        let ds = self.spacing();
        let eps = S::lit(1e-9);
        let last = self.values.len() - 1;
        let lo = (a / ds - eps).ceil().max(S::zero()).to_usize().unwrap_or(0);
        let hi = (b / ds + eps).floor().to_usize().unwrap_or(last).min(last);
        lo..=hi
    }

    pub fn min(&self) -> S {
        self.values.iter().copied().fold(S::infinity(), S::min)
    }

    pub fn max(&self) -> S {
        self.values.iter().copied().fold(S::neg_infinity(), S::max)
    }

    pub fn min_over(&self, a: S, b: S) -> S {
        let range = self.sample_range(a, b);
        let mut m = self.value_at(a).min(self.value_at(b));
        for s in range {
            m = m.min(self.values[s]);
        }
        m
    }
}

fn at_wall<S: Real>(x: S, cfg: &ProblemConfig<S>) -> (bool, bool) {
    let tol = cfg.length * S::lit(1e-12);
    (x <= tol, x >= cfg.length - tol)
}

/// Advances `front` through one pitched rectangle.
pub fn front_advance<S: Real>(
    front: &Front<S>,
    rect: &Rect<S>,
    cfg: &ProblemConfig<S>,
) -> Result<Front<S>> {
    let mut out = front.clone();
    front_advance_into(front, rect, cfg, &mut out)?;
    Ok(out)
}

/// Like [`front_advance`], reading `front` and raising `out` in place.
/// Same-color rectangles only share endpoints, which never move, so several
/// of them may be applied into one output.
pub fn front_advance_into<S: Real>(
    front: &Front<S>,
    rect: &Rect<S>,
    cfg: &ProblemConfig<S>,
    out: &mut Front<S>,
) -> Result<()> {
    let base_min = front.min_over(rect.x_lo, rect.x_hi);
    if rect.t_lo > base_min + S::tie_tol() {
        return Err(Error::InvalidPitch {
            j: rect.j,
            k: rect.k,
            t_lo: rect.t_lo.as_f64(),
            front_min: base_min.as_f64(),
        });
    }
    let lo_wall = at_wall(rect.x_lo, cfg).0;
    let hi_wall = at_wall(rect.x_hi, cfg).1;
    let (x_lo, x_hi) = (front.snap(rect.x_lo), front.snap(rect.x_hi));
    let phi_lo = front.value_at(x_lo);
    let phi_hi = front.value_at(x_hi);
    for s in front.sample_range(rect.x_lo, rect.x_hi) {
        let x = front.x(s);
        let mut reach = rect.t_hi;
        if !lo_wall {
            reach = reach.min(phi_lo + travel_time(x, x_lo, cfg));
        }
        if !hi_wall {
            reach = reach.min(phi_hi + travel_time(x, x_hi, cfg));
        }
        let v = &mut out.values[s];
        *v = v.max(front.values[s].max(reach));
    }
    Ok(())
}

/// Front sampling that puts every decomposition point on a sample.
pub fn default_resolution<S: Real>(cfg: &ProblemConfig<S>) -> usize {
    let unit = lcm(4 * cfg.m1, 4 * cfg.m2);
    let gaps = unit * TARGET_GAPS.div_ceil(unit);
    (gaps + 1).max(MIN_RESOLUTION)
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

/// Result of a geometric run.
#[derive(Debug, Clone)]
pub struct GeometricRun<S> {
    pub iterations: usize,
    /// Front after each iteration (`fronts[k-1]` after iteration `k`).
    pub fronts: Vec<Front<S>>,
    pub rects: Vec<Rect<S>>,
}

impl<S: Real> GeometricRun<S> {
    pub fn rects_of(&self, k: usize) -> impl Iterator<Item = &Rect<S>> {
        self.rects.iter().filter(move |r| r.k == k)
    }
}

/// Rectangles pitched at iteration `k` on top of `front`: base is the
/// lowest certified height over `I_j`, top is `min(T, base + H)` for the
/// first iteration and `min(T, base + 2H)` afterwards. Subdomains already
/// certified up to `T` are skipped.
pub fn pitch_on_front<S: Real>(
    front: &Front<S>,
    k: usize,
    cfg: &ProblemConfig<S>,
    dec: &Decomposition<S>,
) -> Vec<Rect<S>> {
    let t_end = cfg.final_time;
    let done = t_end - S::tie_tol();
    let two = S::lit(2.0);
    dec.color_set(Color::of_iteration(k))
        .iter()
        .filter_map(|&j| {
            let (x_lo, x_hi) = dec.interval(j);
            let base = front.min_over(x_lo, x_hi);
            if base >= done {
                return None;
            }
            let h = dec.pitch_height(j);
            let height = if k == 1 { h } else { two * h };
            Some(Rect {
                j,
                k,
                x_lo,
                x_hi,
                t_lo: base,
                t_hi: (base + height).min(t_end),
            })
        })
        .collect()
}

/// Pitches red/black rectangles on the continuous front until it reaches
/// `T` everywhere.
pub fn simulate_geometric<S: Real>(
    cfg: &ProblemConfig<S>,
    dec: &Decomposition<S>,
) -> Result<GeometricRun<S>> {
    simulate_geometric_with_resolution(cfg, dec, default_resolution(cfg))
}

pub fn simulate_geometric_with_resolution<S: Real>(
    cfg: &ProblemConfig<S>,
    dec: &Decomposition<S>,
    resolution: usize,
) -> Result<GeometricRun<S>> {
    cfg.validate()?;
    let t_end = cfg.final_time;
    let done = t_end - S::tie_tol();
    let stall = S::lit(1e-10) * t_end;

    let mut front = Front::flat(cfg.length, resolution.max(MIN_RESOLUTION), S::zero());
    let mut fronts = Vec::new();
    let mut rects = Vec::new();
    let mut mins = vec![front.min()];
    let mut k = 0;
    while front.min() < done {
        k += 1;
        if k > MAX_ITERATIONS {
            return Err(Error::Stagnation { k });
        }
        let pitched = pitch_on_front(&front, k, cfg, dec);
        let mut next = front.clone();
        for rect in &pitched {
            front_advance_into(&front, rect, cfg, &mut next)?;
        }
        rects.extend(pitched);
        front = next;
        mins.push(front.min());
        // a red+black pair must raise the global minimum
        if k >= 2 && mins[k] - mins[k - 2] < stall && front.min() < done {
            return Err(Error::Stagnation { k });
        }
        fronts.push(front.clone());
    }
    Ok(GeometricRun {
        iterations: k,
        fronts,
        rects,
    })
}

/// Mean per-iteration advance `H1*` of the slow-side certified minimum, from
/// the end of the first iteration until the slow side is complete.
/// Defined for class-c strategies only; aligned classes advance by exactly
/// `H1` per iteration.
pub fn effective_height<S: Real>(cfg: &ProblemConfig<S>, dec: &Decomposition<S>) -> Result<S> {
    let class = classify_strategy(cfg, dec);
    if class.tag != StrategyTag::C {
        return Err(Error::UnsupportedClass(class.tag.as_char()));
    }
    let run = simulate_geometric(cfg, dec)?;
    let half = cfg.half();
    let slow_is_right = cfg.fast_side() == crate::config::Side::Left;
    let slow_min = |front: &Front<S>| {
        (0..front.resolution())
            .filter(|&s| {
                let x = front.x(s);
                if slow_is_right {
                    x > half
                } else {
                    x < half
                }
            })
            .map(|s| front.values()[s])
            .fold(S::infinity(), S::min)
    };
    let done = cfg.final_time - S::tie_tol();
    let first = slow_min(&run.fronts[0]);
    let finished = run
        .fronts
        .iter()
        .position(|f| slow_min(f) >= done)
        .map(|i| i + 1)
        .unwrap_or(run.iterations);
    if finished < 2 {
        return Err(Error::UnsupportedClass('c'));
    }
    Ok((cfg.final_time - first) / S::from_usize_lossy(finished - 1))
}
