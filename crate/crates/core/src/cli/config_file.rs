//! Flat `key = value` configuration files.
//!
//! ```text
//! # heterogeneous two-speed bar
//! L = 1
//! c_left = 2
//! c_right = 1
//! m1 = 2
//! m2 = 2
//! initial_data = gaussian_pulse(0.5, 0.05)
//! ```
//!
//! Missing keys take the built-in defaults; `T` defaults to `L / (2 c1)`
//! for the given speeds. `sweep_m2` and `sweep_h2` (comma-separated) pick
//! the strategies of the `sweep` command.

use std::collections::BTreeSet;
use std::str::FromStr;

use serde_json::{json, Value};

use crate::config::{H2Rule, InitialData, ProblemConfig};
use crate::costmodel::Strategy;
use crate::error::{Error, Result};

pub const KEYS: [&str; 12] = [
    "L",
    "T",
    "c_left",
    "c_right",
    "m1",
    "m2",
    "h2_rule",
    "nu",
    "points_per_subdomain",
    "initial_data",
    "sweep_m2",
    "sweep_h2",
];

#[derive(Debug, Clone, PartialEq)]
pub struct FileConfig {
    pub problem: ProblemConfig<f64>,
    pub sweep_m2: Option<Vec<usize>>,
    pub sweep_h2: Option<Vec<H2Rule>>,
}

fn invalid(key: &str, reason: impl Into<String>) -> Error {
    Error::InvalidConfig {
        key: key.to_string(),
        reason: reason.into(),
    }
}

fn parse_value<T: FromStr>(key: &str, v: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    v.parse::<T>().map_err(|e| invalid(key, format!("cannot parse {v:?}: {e}")))
}

fn parse_list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_value(key, s))
        .collect()
}

pub fn parse(text: &str) -> Result<FileConfig> {
    let mut cfg = ProblemConfig::<f64>::baseline();
    let mut final_time = None;
    let mut sweep_m2 = None;
    let mut sweep_h2 = None;
    let mut seen = BTreeSet::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| invalid(line, format!("line {} is not `key = value`", lineno + 1)))?;
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(invalid(key, "unknown key"));
        }
        if !seen.insert(key.to_string()) {
            return Err(invalid(key, "given more than once"));
        }
        let list = key.starts_with("sweep_");
        if value.is_empty() && !list {
            return Err(invalid(key, "empty value"));
        }
        match key {
            "L" => cfg.length = parse_value(key, value)?,
            "T" => final_time = Some(parse_value(key, value)?),
            "c_left" => cfg.c_left = parse_value(key, value)?,
            "c_right" => cfg.c_right = parse_value(key, value)?,
            "m1" => cfg.m1 = parse_value(key, value)?,
            "m2" => cfg.m2 = parse_value(key, value)?,
            "h2_rule" => cfg.h2_rule = parse_value(key, value)?,
            "nu" => cfg.nu = parse_value(key, value)?,
            "points_per_subdomain" => cfg.points_per_subdomain = parse_value(key, value)?,
            "initial_data" => cfg.initial_data = parse_value::<InitialData<f64>>(key, value)?,
            "sweep_m2" => sweep_m2 = Some(parse_list(key, value)?),
            "sweep_h2" => sweep_h2 = Some(parse_list(key, value)?),
            _ => unreachable!("key list checked above"),
        }
    }
    cfg.final_time = final_time.unwrap_or_else(|| {
        ProblemConfig::default_final_time(cfg.length, cfg.c_left, cfg.c_right)
    });
    cfg.validate()?;
    Ok(FileConfig {
        problem: cfg,
        sweep_m2,
        sweep_h2,
    })
}

impl FileConfig {
    /// Strategies for the sweep: the cross product of the configured lists,
    /// with the default list filling in whichever is absent.
    pub fn strategies(&self, defaults: &[Strategy]) -> Vec<Strategy> {
        let mut m2s: Vec<usize> = Vec::new();
        let mut rules: Vec<H2Rule> = Vec::new();
        for s in defaults {
            if !m2s.contains(&s.m2) {
                m2s.push(s.m2);
            }
            if !rules.contains(&s.h2_rule) {
                rules.push(s.h2_rule);
            }
        }
        let m2s = self.sweep_m2.clone().unwrap_or(m2s);
        let rules = self.sweep_h2.clone().unwrap_or(rules);
        m2s.iter()
            .flat_map(|&m2| rules.iter().map(move |&h2_rule| Strategy { m2, h2_rule }))
            .collect()
    }
}

/// Resolved problem configuration as a JSON object keyed like the file.
pub fn to_json(cfg: &ProblemConfig<f64>) -> Value {
    json!({
        "L": cfg.length,
        "T": cfg.final_time,
        "c_left": cfg.c_left,
        "c_right": cfg.c_right,
        "m1": cfg.m1,
        "m2": cfg.m2,
        "h2_rule": cfg.h2_rule.as_str(),
        "nu": cfg.nu,
        "points_per_subdomain": cfg.points_per_subdomain,
        "initial_data": cfg.initial_data.to_string(),
    })
}
