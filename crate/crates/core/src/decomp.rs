//! Overlapping interval decomposition, red/black coloring, pitch heights and
//! classification of slow-side strategies.

use num_rational::Ratio;
use serde::Serialize;

use crate::config::{H2Rule, ProblemConfig, Side};
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    Red,
    Black,
}

impl Color {
    /// Red on odd iterations, black on even ones.
    pub fn of_iteration(k: usize) -> Color {
        if k % 2 == 1 {
            Color::Red
        } else {
            Color::Black
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Color::Red => "red",
            Color::Black => "black",
        }
    }
}

/// Points `x_0 < ... < x_{N-1}`, intervals `I_j = (x_{j-1}, x_{j+1})` for
/// `j = 1..N-2`, and the pitch heights of both sides.
///
/// On a side with `m` subdomains the points have spacing `L/(4m)`, so every
/// interval on that side has length `L/(2m)`. The two sides share the point
/// `L/2`; the interval centered there straddles the interface and uses the
/// fast-side height.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition<S> {
    pub length: S,
    pub points: Vec<S>,
    pub red: Vec<usize>,
    pub black: Vec<usize>,
    /// Fast-side subdomain length `L/(2 m1)`.
    pub l1: S,
    /// Slow-side subdomain length `L/(2 m2)`.
    pub l2: S,
    /// Fast-side pitch height `L1/(2 c1)`.
    pub h1: S,
    /// Slow-side pitch height selected by the `H2` rule.
    pub h2: S,
    /// Index of the point at `L/2` (None for a bare homogeneous layout whose
    /// midpoint is not a point).
    pub interface: Option<usize>,
    fast_side: Side,
}

impl<S: Real> Decomposition<S> {
    /// Classic homogeneous layout with `N` equispaced points and
    /// `H = L / (c (N-1))`.
    pub fn homogeneous(length: S, c: S, n_points: usize) -> Result<Self> {
        if n_points < 3 || n_points.is_multiple_of(2) {
            return Err(Error::EvenPointCount(n_points));
        }
        let gaps = S::from_usize_lossy(n_points - 1);
        let points: Vec<S> = (0..n_points)
            .map(|i| {
                if i == n_points - 1 {
                    length
                } else {
                    S::from_usize_lossy(i) * length / gaps
                }
            })
            .collect();
        let h = homogeneous_pitch_height(length, c, n_points);
        let sub = S::lit(2.0) * length / gaps;
        let interface = if (n_points - 1).is_multiple_of(2) {
            Some((n_points - 1) / 2)
        } else {
            None
        };
        let (red, black) = colors(n_points);
        Ok(Self {
            length,
            points,
            red,
            black,
            l1: sub,
            l2: sub,
            h1: h,
            h2: h,
            interface,
            fast_side: Side::Left,
        })
    }

    pub fn n_points(&self) -> usize {
        self.points.len()
    }

    /// Number of subdomains `N - 2`.
    pub fn n_subdomains(&self) -> usize {
        self.points.len() - 2
    }

    /// Bounds of `I_j`, `1 <= j <= N-2`.
    pub fn interval(&self, j: usize) -> (S, S) {
        (self.points[j - 1], self.points[j + 1])
    }

    pub fn color_set(&self, color: Color) -> &[usize] {
        match color {
            Color::Red => &self.red,
            Color::Black => &self.black,
        }
    }

    pub fn color_of(&self, j: usize) -> Color {
        if j % 2 == 1 {
            Color::Red
        } else {
            Color::Black
        }
    }

    /// Side owning subdomain `j` (the side of its center point).
    pub fn side_of_subdomain(&self, j: usize) -> Side {
        match self.interface {
            Some(i) if j == i => self.fast_side,
            Some(i) if j < i => Side::Left,
            Some(_) => Side::Right,
            None => {
                if self.points[j] + self.points[j] <= self.length {
                    Side::Left
                } else {
                    Side::Right
                }
            }
        }
    }

    pub fn is_fast(&self, j: usize) -> bool {
        self.side_of_subdomain(j) == self.fast_side
    }

    /// Base pitch height `H` of subdomain `j` (first red pitch uses `H`,
    /// every later pitch `2H`).
    pub fn pitch_height(&self, j: usize) -> S {
        if self.is_fast(j) {
            self.h1
        } else {
            self.h2
        }
    }

    pub fn fast_side(&self) -> Side {
        self.fast_side
    }

    /// Subdomain lengths in index order (`|I_j|`, `j = 1..N-2`).
    pub fn interval_lengths(&self) -> Vec<S> {
        (1..=self.n_subdomains())
            .map(|j| {
                let (a, b) = self.interval(j);
                b - a
            })
            .collect()
    }
}

fn colors(n_points: usize) -> (Vec<usize>, Vec<usize>) {
    let red = (1..=n_points - 2).step_by(2).collect();
    let black = (2..=n_points.saturating_sub(3)).step_by(2).collect();
    (red, black)
}

/// `H = L / (c (N - 1))`.
pub fn homogeneous_pitch_height<S: Real>(length: S, c: S, n_points: usize) -> S {
    length / (c * S::from_usize_lossy(n_points - 1))
}

/// Slow-side height `H2` for the configured rule.
pub fn slow_height<S: Real>(cfg: &ProblemConfig<S>) -> S {
    let two = S::lit(2.0);
    let l1 = cfg.length / (two * S::from_usize_lossy(cfg.m1));
    let l2 = cfg.length / (two * S::from_usize_lossy(cfg.m2));
    let h1 = l1 / (two * cfg.c_fast());
    match cfg.h2_rule {
        H2Rule::Equal => h1,
        H2Rule::GreaterA => S::lit(1.5) * h1,
        H2Rule::GreaterB => l2 / (two * cfg.c_slow()),
        H2Rule::Smaller => h1 / two,
    }
}

/// Builds the two-sided decomposition: `2 m` gaps of width `L/(4m)` on each
/// half, joined at `L/2`, so `N = 2 m1 + 2 m2 + 1` (which is `4 m1 + 1` when
/// `m1 = m2`).
pub fn build_decomposition<S: Real>(cfg: &ProblemConfig<S>) -> Result<Decomposition<S>> {
    cfg.validate()?;
    let two = S::lit(2.0);
    let half = cfg.half();
    let m_left = cfg.count(Side::Left);
    let m_right = cfg.count(Side::Right);
    let gap_left = half / S::from_usize_lossy(2 * m_left);
    let gap_right = half / S::from_usize_lossy(2 * m_right);

    let mut points = Vec::with_capacity(2 * (m_left + m_right) + 1);
    for i in 0..2 * m_left {
        points.push(S::from_usize_lossy(i) * gap_left);
    }
    points.push(half);
    for i in 1..=2 * m_right {
        let back = 2 * m_right - i;
        points.push(cfg.length - S::from_usize_lossy(back) * gap_right);
    }

    let n = points.len();
    if n % 2 == 0 {
        return Err(Error::EvenPointCount(n));
    }
    let (red, black) = colors(n);
    let l1 = cfg.length / (two * S::from_usize_lossy(cfg.m1));
    let l2 = cfg.length / (two * S::from_usize_lossy(cfg.m2));
    let h1 = l1 / (two * cfg.c_fast());
    Ok(Decomposition {
        length: cfg.length,
        points,
        red,
        black,
        l1,
        l2,
        h1,
        h2: slow_height(cfg),
        interface: Some(2 * m_left),
        fast_side: cfg.fast_side(),
    })
}

/// `m2* = m1 c1 / c2` as an exact rational.
///
/// The speeds are converted with a best rational approximation, so decimal
/// inputs like `0.3` and `0.1` give the intended `3`.
pub fn m2_star<S: Real>(cfg: &ProblemConfig<S>) -> Ratio<i64> {
    let c1 = to_ratio(cfg.c_fast());
    let c2 = to_ratio(cfg.c_slow());
    Ratio::from_integer(cfg.m1 as i64) * c1 / c2
}

fn to_ratio<S: Real>(v: S) -> Ratio<i64> {
    Ratio::<i64>::approximate_float(v.as_f64()).expect("speed is not representable as a ratio")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum StrategyTag {
    /// Slow tent peak above the rectangle top.
    A,
    /// Peak exactly at the top.
    B,
    /// Peak strictly below the top.
    C,
}

impl StrategyTag {
    pub fn as_char(self) -> char {
        match self {
            StrategyTag::A => 'a',
            StrategyTag::B => 'b',
            StrategyTag::C => 'c',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrategyClass<S> {
    pub tag: StrategyTag,
    /// `L2 / (2 c2)`.
    pub peak_height: S,
    /// `H2`.
    pub rect_height: S,
}

pub fn classify_strategy<S: Real>(
    cfg: &ProblemConfig<S>,
    dec: &Decomposition<S>,
) -> StrategyClass<S> {
    let peak = dec.l2 / (S::lit(2.0) * cfg.c_slow());
    let rect = dec.h2;
    let tag = if (peak - rect).abs() <= S::tie_tol() {
        StrategyTag::B
    } else if peak > rect {
        StrategyTag::A
    } else {
        StrategyTag::C
    };
    StrategyClass {
        tag,
        peak_height: peak,
        rect_height: rect,
    }
}
