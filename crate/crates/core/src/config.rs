//! Problem setup: domain, piecewise-constant medium, strategy knobs and
//! initial data.
//!
//! The speed is `c_left` on `(0, L/2)` and `c_right` on `(L/2, L)`. The side
//! with the larger speed is the *fast* side; `m1` always counts subdomains on
//! the fast side and `m2` on the slow side, whichever physical half that is.
//! Every derived quantity is computed in physical coordinates, so a mirrored
//! problem (`x -> L - x`, speeds swapped) yields mirrored results without an
//! explicit coordinate transform.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Rule selecting the slow-side pitch height `H2` relative to `H1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum H2Rule {
    /// `H2 = H1`.
    Equal,
    /// `H2 = 3/2 H1`: taller than `H1`, below the slow tent peak whenever
    /// the peak exceeds `3/2 H1`.
    GreaterA,
    /// `H2 = L2 / (2 c2)`: rectangle top at the slow tent peak.
    GreaterB,
    /// `H2 = H1 / 2`.
    Smaller,
}

impl H2Rule {
    pub const ALL: [H2Rule; 4] = [
        H2Rule::Equal,
        H2Rule::GreaterA,
        H2Rule::GreaterB,
        H2Rule::Smaller,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            H2Rule::Equal => "equal",
            H2Rule::GreaterA => "greater_a",
            H2Rule::GreaterB => "greater_b",
            H2Rule::Smaller => "smaller",
        }
    }
}

impl fmt::Display for H2Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for H2Rule {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim() {
            "equal" => Ok(H2Rule::Equal),
            "greater_a" => Ok(H2Rule::GreaterA),
            "greater_b" => Ok(H2Rule::GreaterB),
            "smaller" => Ok(H2Rule::Smaller),
            other => Err(format!(
                "unknown rule `{other}` (expected equal, greater_a, greater_b or smaller)"
            )),
        }
    }
}

/// Initial displacement `f`; every choice starts at rest (`g = 0`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialData<S> {
    Zero,
    /// `sin(p pi x / L)`.
    StandingMode(u32),
    /// `exp(-((x - center) / width)^2)`.
    GaussianPulse { center: S, width: S },
}

impl<S: Real> InitialData<S> {
    pub fn displacement(&self, x: S, length: S) -> S {
        match *self {
            InitialData::Zero => S::zero(),
            InitialData::StandingMode(p) => {
                (S::from_u32(p).unwrap() * S::PI() * x / length).sin()
            }
            InitialData::GaussianPulse { center, width } => {
                let z = (x - center) / width;
                (-(z * z)).exp()
            }
        }
    }

    pub fn velocity(&self, _x: S, _length: S) -> S {
        S::zero()
    }

    /// Data for the mirrored problem. Standing modes with odd `p` are
    /// symmetric about `L/2`; even modes change sign, which is not
    /// representable here, so they are returned unchanged.
    pub fn mirrored(&self, length: S) -> Self {
        match *self {
            InitialData::GaussianPulse { center, width } => InitialData::GaussianPulse {
                center: length - center,
                width,
            },
            other => other,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, InitialData::Zero)
    }
}

impl<S: Real> fmt::Display for InitialData<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialData::Zero => f.write_str("zero"),
            InitialData::StandingMode(p) => write!(f, "standing_mode({p})"),
            InitialData::GaussianPulse { center, width } => {
                write!(f, "gaussian_pulse({center}, {width})")
            }
        }
    }
}

impl FromStr for InitialData<f64> {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = s.trim();
        if s == "zero" {
            return Ok(InitialData::Zero);
        }
        let (name, args) = s
            .strip_suffix(')')
            .and_then(|head| head.split_once('('))
            .ok_or_else(|| format!("cannot parse initial data `{s}`"))?;
        let args: Vec<&str> = args.split(',').map(str::trim).collect();
        match (name.trim(), args.as_slice()) {
            ("standing_mode", [p]) => {
                let p: u32 = p.parse().map_err(|_| format!("bad mode number `{p}`"))?;
                if p == 0 {
                    return Err("mode number must be positive".into());
                }
                Ok(InitialData::StandingMode(p))
            }
            ("gaussian_pulse", [c, w]) => {
                let center: f64 = c.parse().map_err(|_| format!("bad center `{c}`"))?;
                let width: f64 = w.parse().map_err(|_| format!("bad width `{w}`"))?;
                if !width.is_finite() || width <= 0.0 {
                    return Err("pulse width must be positive".into());
                }
                Ok(InitialData::GaussianPulse { center, width })
            }
            _ => Err(format!(
                "unknown initial data `{s}` (expected zero, standing_mode(p) or gaussian_pulse(center, width))"
            )),
        }
    }
}

/// Physical half of the domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemConfig<S> {
    pub length: S,
    pub final_time: S,
    pub c_left: S,
    pub c_right: S,
    /// Subdomain count on the fast side.
    pub m1: usize,
    /// Subdomain count on the slow side.
    pub m2: usize,
    pub h2_rule: H2Rule,
    /// Courant number of the discrete solver.
    pub nu: S,
    pub points_per_subdomain: usize,
    pub initial_data: InitialData<S>,
}

impl<S: Real> ProblemConfig<S> {
    /// `L = 1`, `c_left = 2`, `c_right = 1`, `m1 = m2 = 2`, `T = L/(2 c1)`,
    /// `nu = 1`, a centered Gaussian pulse.
    pub fn baseline() -> Self {
        let length = S::one();
        let c_left = S::lit(2.0);
        Self {
            length,
            final_time: length / (S::lit(2.0) * c_left),
            c_left,
            c_right: S::one(),
            m1: 2,
            m2: 2,
            h2_rule: H2Rule::Equal,
            nu: S::one(),
            points_per_subdomain: 32,
            initial_data: InitialData::GaussianPulse {
                center: S::lit(0.5),
                width: S::lit(0.05),
            },
        }
    }

    /// `T = L / (2 c1)` with `c1` the fast speed.
    pub fn default_final_time(length: S, c_left: S, c_right: S) -> S {
        length / (S::lit(2.0) * c_left.max(c_right))
    }

    pub fn validate(&self) -> Result<()> {
        fn bad(key: &str, reason: &str) -> Error {
            Error::InvalidConfig {
                key: key.to_string(),
                reason: reason.to_string(),
            }
        }
        let positive = |v: S| v.is_finite() && v > S::zero();
        if !positive(self.length) {
            return Err(bad("L", "must be finite and > 0"));
        }
        if !positive(self.final_time) {
            return Err(bad("T", "must be finite and > 0"));
        }
        if !positive(self.c_left) {
            return Err(bad("c_left", "must be finite and > 0"));
        }
        if !positive(self.c_right) {
            return Err(bad("c_right", "must be finite and > 0"));
        }
        if self.m1 == 0 {
            return Err(bad("m1", "must be a positive integer"));
        }
        if self.m2 == 0 {
            return Err(bad("m2", "must be a positive integer"));
        }
        if !(self.nu > S::zero() && self.nu <= S::one()) {
            return Err(bad("nu", "must satisfy 0 < nu <= 1"));
        }
        if self.points_per_subdomain == 0 {
            return Err(bad("points_per_subdomain", "must be a positive integer"));
        }
        if let InitialData::GaussianPulse { width, .. } = self.initial_data {
            if !positive(width) {
                return Err(bad("initial_data", "pulse width must be > 0"));
            }
        }
        Ok(())
    }

    pub fn fast_side(&self) -> Side {
        if self.c_left >= self.c_right {
            Side::Left
        } else {
            Side::Right
        }
    }

    pub fn c_fast(&self) -> S {
        self.c_left.max(self.c_right)
    }

    pub fn c_slow(&self) -> S {
        self.c_left.min(self.c_right)
    }

    pub fn is_homogeneous(&self) -> bool {
        self.c_left == self.c_right
    }

    pub fn half(&self) -> S {
        self.length / S::lit(2.0)
    }

    pub fn speed(&self, side: Side) -> S {
        match side {
            Side::Left => self.c_left,
            Side::Right => self.c_right,
        }
    }

    /// Subdomain count on a physical side.
    pub fn count(&self, side: Side) -> usize {
        if side == self.fast_side() {
            self.m1
        } else {
            self.m2
        }
    }

    /// Side a position belongs to; the interface point goes to the fast side.
    pub fn side_of(&self, x: S) -> Side {
        let half = self.half();
        if x < half {
            Side::Left
        } else if x > half {
            Side::Right
        } else {
            self.fast_side()
        }
    }

    pub fn speed_at(&self, x: S) -> S {
        self.speed(self.side_of(x))
    }

    /// Problem mirrored about `L/2`: speeds swapped, initial data reflected.
    pub fn mirrored(&self) -> Self {
        Self {
            c_left: self.c_right,
            c_right: self.c_left,
            initial_data: self.initial_data.mirrored(self.length),
            ..self.clone()
        }
    }

    /// Same problem with the slow-side strategy replaced.
    pub fn with_strategy(&self, m2: usize, h2_rule: H2Rule) -> Self {
        Self {
            m2,
            h2_rule,
            ..self.clone()
        }
    }
}
