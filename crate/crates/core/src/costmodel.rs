//! Area-based cost model, per-process pipelines and the strategy sweep.
//!
//! A rectangle costs its space-time area. Subdomain `j` runs on process
//! `(j - 1) / 2`, so process `p` owns red subdomain `2p + 1` and black
//! subdomain `2p + 2`; with `m1 + m2` processes the last one has no black
//! work.
//!
//! Two timelines are built from the same rectangle schedule:
//! * synchronous: iterations are separated by barriers and each lasts as
//!   long as its most expensive rectangle;
//! * asynchronous: a rectangle starts once its process is free and the
//!   rectangles it reads from (neighbors at `k - 1`, itself at `k - 2`)
//!   have finished.

use std::cmp::Ordering;

use log::warn;
use serde::Serialize;

use crate::config::{H2Rule, ProblemConfig};
use crate::decomp::{build_decomposition, classify_strategy, m2_star, Color, Decomposition, StrategyTag};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::tents::{simulate_geometric, Rect};

/// Relative tolerance used when comparing totals.
pub const COST_TOL: f64 = 1e-9;

pub fn rect_area<S: Real>(rect: &Rect<S>) -> S {
    rect.width() * rect.height()
}

pub fn process_of(j: usize) -> usize {
    (j - 1) / 2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PipelineModel {
    Synchronous,
    Asynchronous,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaskRecord<S> {
    pub process: usize,
    pub k: usize,
    pub j: usize,
    pub cost: S,
    pub start: S,
    pub end: S,
    /// Idle time on this process between the end of the task and the start
    /// of its next one (or the end of the pipeline).
    pub idle_after: S,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineSchedule<S> {
    pub model: PipelineModel,
    pub processes: usize,
    pub iterations: usize,
    /// Ordered by `(k, j)`.
    pub tasks: Vec<TaskRecord<S>>,
    pub total: S,
    /// Idle time per process over `[0, total]`.
    pub idle: Vec<S>,
    /// Barrier-to-barrier durations (synchronous model only).
    pub iteration_durations: Vec<S>,
}

impl<S: Real> PipelineSchedule<S> {
    pub fn tasks_of(&self, k: usize) -> impl Iterator<Item = &TaskRecord<S>> {
        self.tasks.iter().filter(move |t| t.k == k)
    }

    pub fn busy(&self, p: usize) -> S {
        self.tasks
            .iter()
            .filter(|t| t.process == p)
            .fold(S::zero(), |acc, t| acc + t.cost)
    }

    pub fn idle_total(&self) -> S {
        self.idle.iter().fold(S::zero(), |acc, &v| acc + v)
    }

    /// Processes that are not busy for the whole of iteration `k`
    /// (synchronous model).
    pub fn idle_processes(&self, k: usize) -> Vec<usize> {
        let duration = self.iteration_durations[k - 1];
        let tol = S::lit(COST_TOL) * duration.max(S::one());
        (0..self.processes)
            .filter(|&p| {
                let busy = self
                    .tasks_of(k)
                    .filter(|t| t.process == p)
                    .fold(S::zero(), |acc, t| acc + t.cost);
                duration - busy > tol
            })
            .collect()
    }
}

fn process_count<S: Real>(dec: &Decomposition<S>) -> usize {
    dec.red.len()
}

/// Synchronous pipeline: every iteration starts after the slowest
/// rectangle of the previous one.
pub fn build_pipeline<S: Real>(dec: &Decomposition<S>, rects: &[Rect<S>]) -> PipelineSchedule<S> {
    let processes = process_count(dec);
    let iterations = rects.iter().map(|r| r.k).max().unwrap_or(0);
    let mut tasks = Vec::with_capacity(rects.len());
    let mut idle = vec![S::zero(); processes];
    let mut durations = Vec::with_capacity(iterations);
    let mut clock = S::zero();
    for k in 1..=iterations {
        let mut round: Vec<&Rect<S>> = rects.iter().filter(|r| r.k == k).collect();
        round.sort_by_key(|r| r.j);
        let duration = round
            .iter()
            .map(|r| rect_area(r))
            .fold(S::zero(), S::max);
        let mut used = vec![false; processes];
        for r in round {
            let p = process_of(r.j);
            let cost = rect_area(r);
            used[p] = true;
            idle[p] = idle[p] + (duration - cost);
            tasks.push(TaskRecord {
                process: p,
                k,
                j: r.j,
                cost,
                start: clock,
                end: clock + cost,
                idle_after: duration - cost,
            });
        }
        for (p, u) in used.iter().enumerate() {
            if !u {
                idle[p] = idle[p] + duration;
            }
        }
        clock = clock + duration;
        durations.push(duration);
    }
    PipelineSchedule {
        model: PipelineModel::Synchronous,
        processes,
        iterations,
        tasks,
        total: clock,
        idle,
        iteration_durations: durations,
    }
}

/// Dependency-driven pipeline without barriers.
pub fn build_pipeline_async<S: Real>(
    dec: &Decomposition<S>,
    rects: &[Rect<S>],
) -> PipelineSchedule<S> {
    let processes = process_count(dec);
    let iterations = rects.iter().map(|r| r.k).max().unwrap_or(0);
    let n_sub = dec.n_subdomains();
    // finish[k][j], None when (j, k) was not pitched
    let mut finish: Vec<Vec<Option<S>>> = vec![vec![None; n_sub + 2]; iterations + 1];
    let mut free = vec![S::zero(); processes];
    let mut tasks = Vec::with_capacity(rects.len());

    let mut ordered: Vec<&Rect<S>> = rects.iter().collect();
    ordered.sort_by_key(|r| (r.k, r.j));
    for r in ordered {
        let (j, k) = (r.j, r.k);
        let p = process_of(j);
        let mut start = free[p];
        let mut dep = |kk: usize, jj: usize| {
            if let Some(Some(t)) = finish.get(kk).and_then(|row| row.get(jj)) {
                start = start.max(*t);
            }
        };
        if k >= 2 {
            dep(k - 1, j - 1);
            dep(k - 1, j + 1);
        }
        if k >= 3 {
            dep(k - 2, j);
        }
        let cost = rect_area(r);
        let end = start + cost;
        finish[k][j] = Some(end);
        free[p] = end;
        tasks.push(TaskRecord {
            process: p,
            k,
            j,
            cost,
            start,
            end,
            idle_after: S::zero(),
        });
    }

    let total = tasks.iter().map(|t| t.end).fold(S::zero(), S::max);
    for p in 0..processes {
        let mut mine: Vec<usize> = (0..tasks.len()).filter(|&i| tasks[i].process == p).collect();
        mine.sort_by(|&a, &b| tasks[a].start.partial_cmp(&tasks[b].start).unwrap_or(Ordering::Equal));
        for w in 0..mine.len() {
            let next = mine.get(w + 1).map_or(total, |&i| tasks[i].start);
            let t = &mut tasks[mine[w]];
            t.idle_after = next - t.end;
        }
    }
    let idle = (0..processes)
        .map(|p| {
            let busy = tasks
                .iter()
                .filter(|t| t.process == p)
                .fold(S::zero(), |acc, t| acc + t.cost);
            total - busy
        })
        .collect();
    PipelineSchedule {
        model: PipelineModel::Asynchronous,
        processes,
        iterations,
        tasks,
        total,
        idle,
        iteration_durations: Vec::new(),
    }
}

/// Closed-form synchronous total `2 T max(L1, L2)` for `H2 = H1` strategies
/// of class a or b with `T` a multiple of `H1`; with `T = L/(2 c1)` this is
/// `L^2 / (2 min(m1, m2) c1)`.
pub fn total_cost<S: Real>(cfg: &ProblemConfig<S>) -> Result<S> {
    let dec = build_decomposition(cfg)?;
    let class = classify_strategy(cfg, &dec);
    if class.tag == StrategyTag::C {
        return Err(Error::UnsupportedClass('c'));
    }
    if cfg.h2_rule != H2Rule::Equal {
        return Err(Error::NoClosedForm(format!(
            "h2_rule = {} (only equal heights have one)",
            cfg.h2_rule
        )));
    }
    let ratio = cfg.final_time / dec.h1;
    if (ratio - ratio.round()).abs() > S::lit(1e-9) {
        return Err(Error::NoClosedForm(format!(
            "T / H1 = {ratio} is not an integer"
        )));
    }
    let two = S::lit(2.0);
    Ok(two * cfg.final_time * dec.l1.max(dec.l2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Strategy {
    pub m2: usize,
    pub h2_rule: H2Rule,
}

/// One evaluated strategy. Numbers are reported in `f64`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrategyEntry {
    pub m2: usize,
    pub h2_rule: H2Rule,
    pub class: char,
    pub peak_height: f64,
    pub rect_height: f64,
    pub processes: usize,
    pub iterations: Option<usize>,
    pub total_cost: Option<f64>,
    pub idle: Option<f64>,
    pub async_total_cost: Option<f64>,
    pub async_idle: Option<f64>,
    pub closed_form: Option<f64>,
    pub annotations: Vec<String>,
    pub error: Option<String>,
    /// 1-based position in the ranking; `None` for failed strategies.
    pub rank: Option<usize>,
}

impl StrategyEntry {
    pub fn strategy(&self) -> Strategy {
        Strategy {
            m2: self.m2,
            h2_rule: self.h2_rule,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostReport {
    pub m1: usize,
    pub c_fast: f64,
    pub c_slow: f64,
    pub length: f64,
    pub final_time: f64,
    pub m2_star: String,
    /// Ranked entries first, failed ones after in input order.
    pub entries: Vec<StrategyEntry>,
}

impl CostReport {
    pub fn best(&self) -> Option<&StrategyEntry> {
        self.entries.first().filter(|e| e.rank.is_some())
    }

    pub fn find(&self, m2: usize, rule: H2Rule) -> Option<&StrategyEntry> {
        self.entries
            .iter()
            .find(|e| e.m2 == m2 && e.h2_rule == rule)
    }
}

/// `a` vs `b` with a relative tolerance.
pub fn cmp_cost(a: f64, b: f64) -> Ordering {
    let scale = a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
    if (a - b).abs() <= COST_TOL * scale {
        Ordering::Equal
    } else {
        a.total_cmp(&b)
    }
}

fn rule_order(r: H2Rule) -> usize {
    H2Rule::ALL.iter().position(|&x| x == r).unwrap_or(0)
}

/// Ranking order: total cost, then process count, then iterations, then
/// smaller `m2`, then rule.
pub fn rank_order(a: &StrategyEntry, b: &StrategyEntry) -> Ordering {
    cmp_cost(a.total_cost.unwrap_or(f64::INFINITY), b.total_cost.unwrap_or(f64::INFINITY))
        .then(a.processes.cmp(&b.processes))
        .then(a.iterations.cmp(&b.iterations))
        .then(a.m2.cmp(&b.m2))
        .then(rule_order(a.h2_rule).cmp(&rule_order(b.h2_rule)))
}

/// Simulation, decomposition and pipelines of one strategy.
#[derive(Debug, Clone)]
pub struct Evaluation<S> {
    pub config: ProblemConfig<S>,
    pub decomposition: Decomposition<S>,
    pub rects: Vec<Rect<S>>,
    pub iterations: usize,
    pub sync: PipelineSchedule<S>,
    pub asynchronous: PipelineSchedule<S>,
}

pub fn evaluate_strategy<S: Real>(base: &ProblemConfig<S>, s: Strategy) -> Result<Evaluation<S>> {
    let cfg = base.with_strategy(clamp_m2(s.m2), s.h2_rule);
    let dec = build_decomposition(&cfg)?;
    let run = simulate_geometric(&cfg, &dec)?;
    let sync = build_pipeline(&dec, &run.rects);
    let asynchronous = build_pipeline_async(&dec, &run.rects);
    Ok(Evaluation {
        config: cfg,
        decomposition: dec,
        iterations: run.iterations,
        rects: run.rects,
        sync,
        asynchronous,
    })
}

fn clamp_m2(m2: usize) -> usize {
    if m2 == 0 {
        warn!("m2 = 0 is not a valid subdomain count; using 1");
        1
    } else {
        m2
    }
}

fn annotations<S: Real>(dec: &Decomposition<S>) -> Vec<String> {
    let tol = S::tie_tol();
    if dec.h2 > dec.h1 + tol {
        vec!["communication delay".to_string()]
    } else if dec.h2 < dec.h1 - tol {
        vec!["characteristic conflict".to_string()]
    } else {
        Vec::new()
    }
}

/// Evaluates and ranks a list of strategies on top of `base`. Strategies
/// that fail (e.g. stagnate) are kept in the report with their error.
pub fn sweep_strategies<S: Real>(
    base: &ProblemConfig<S>,
    strategies: &[Strategy],
) -> Result<CostReport> {
    if strategies.is_empty() {
        return Err(Error::EmptyStrategyList);
    }
    base.validate()?;
    let mut ranked = Vec::new();
    let mut failed = Vec::new();
    for &s in strategies {
        let cfg = base.with_strategy(clamp_m2(s.m2), s.h2_rule);
        let dec = build_decomposition(&cfg)?;
        let class = classify_strategy(&cfg, &dec);
        let mut entry = StrategyEntry {
            m2: cfg.m2,
            h2_rule: s.h2_rule,
            class: class.tag.as_char(),
            peak_height: class.peak_height.as_f64(),
            rect_height: class.rect_height.as_f64(),
            processes: process_count(&dec),
            iterations: None,
            total_cost: None,
            idle: None,
            async_total_cost: None,
            async_idle: None,
            closed_form: total_cost(&cfg).ok().map(|v| v.as_f64()),
            annotations: annotations(&dec),
            error: None,
            rank: None,
        };
        match evaluate_strategy(base, s) {
            Ok(ev) => {
                entry.iterations = Some(ev.iterations);
                entry.total_cost = Some(ev.sync.total.as_f64());
                entry.idle = Some(ev.sync.idle_total().as_f64());
                entry.async_total_cost = Some(ev.asynchronous.total.as_f64());
                entry.async_idle = Some(ev.asynchronous.idle_total().as_f64());
                ranked.push(entry);
            }
            Err(e) => {
                entry.error = Some(e.to_string());
                failed.push(entry);
            }
        }
    }
    ranked.sort_by(rank_order);
    for (i, e) in ranked.iter_mut().enumerate() {
        e.rank = Some(i + 1);
    }
    ranked.extend(failed);
    Ok(CostReport {
        m1: base.m1,
        c_fast: base.c_fast().as_f64(),
        c_slow: base.c_slow().as_f64(),
        length: base.length.as_f64(),
        final_time: base.final_time.as_f64(),
        m2_star: m2_star(base).to_string(),
        entries: ranked,
    })
}

/// `m2` in `{round(m1/2), m1, m2*, 2 m2*}` (rounded, at least 1) crossed
/// with every `H2` rule.
pub fn default_strategies<S: Real>(cfg: &ProblemConfig<S>) -> Vec<Strategy> {
    let star = m2_star(cfg);
    let round = |r: num_rational::Ratio<i64>| r.round().to_integer().max(0) as usize;
    let half_m1 = cfg.m1.div_ceil(2);
    let mut counts = Vec::new();
    for m in [half_m1, cfg.m1, round(star), round(star * 2)] {
        let m = clamp_m2(m);
        if !counts.contains(&m) {
            counts.push(m);
        }
    }
    counts
        .into_iter()
        .flat_map(|m2| H2Rule::ALL.into_iter().map(move |h2_rule| Strategy { m2, h2_rule }))
        .collect()
}

pub fn color_of_task<S>(t: &TaskRecord<S>) -> Color {
    Color::of_iteration(t.k)
}
