use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use serde::Serialize;

use super::rule::{apply_rule, Rewrite};
use crate::egraph::{EGraph, EGraphError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheduler {
    /// Every rule fires on every match, every iteration.
    Plain,
    /// A rule whose match count exceeds `match_limit << times_banned` is
    /// skipped for `ban_length << times_banned` iterations.
    Backoff {
        match_limit: usize,
        ban_length: usize,
    },
}

/// Non-expansive rules get this many times the match budget.
const NON_EXPANSIVE_FACTOR: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RunnerConfig {
    pub max_iterations: usize,
    pub node_limit: usize,
    pub time_limit_ms: u64,
    pub scheduler: Scheduler,
}

impl Default for RunnerConfig {
    fn default() -> Self {
        RunnerConfig {
            max_iterations: 30,
            node_limit: 50_000,
            time_limit_ms: 5_000,
            scheduler: Scheduler::Backoff {
                match_limit: 1_000,
                ban_length: 5,
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Saturated,
    IterLimit,
    NodeLimit,
    TimeLimit,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::Saturated => "saturated",
            StopReason::IterLimit => "iter_limit",
            StopReason::NodeLimit => "node_limit",
            StopReason::TimeLimit => "time_limit",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub iterations: usize,
    pub stop_reason: StopReason,
    /// Matches found per rule, summed over iterations (banned searches
    /// excluded). Rules that never matched are omitted.
    pub rule_matches: BTreeMap<String, usize>,
    pub nodes: usize,
    pub classes: usize,
    #[serde(skip)]
    pub elapsed: Duration,
}

#[derive(Clone, Copy, Default)]
struct RuleStats {
    times_banned: u32,
    banned_until: usize,
}

/// Saturates `g` under `rules`. Each iteration searches every rule on the
/// rebuilt graph, applies the surviving matches, then rebuilds.
pub fn run(
    g: &mut EGraph,
    rules: &[Rewrite],
    cfg: &RunnerConfig,
) -> Result<RunReport, EGraphError> {
    let start = Instant::now();
    let time_limit = Duration::from_millis(cfg.time_limit_ms);
    let mut stats = vec![RuleStats::default(); rules.len()];
    let mut rule_matches: BTreeMap<String, usize> = BTreeMap::new();
    let mut iterations = 0;
    g.rebuild()?;

    let stop_reason = loop {
        if iterations >= cfg.max_iterations {
            break StopReason::IterLimit;
        }
        if start.elapsed() >= time_limit {
            break StopReason::TimeLimit;
        }
        let before = (g.nodes_added(), g.merges());
        let mut banned_now = false;

        let mut all_matches = Vec::with_capacity(rules.len());
        for (k, rule) in rules.iter().enumerate() {
            let st = &mut stats[k];
            if iterations < st.banned_until {
                banned_now = true;
                all_matches.push(Vec::new());
                continue;
            }
            let matches = rule.search(g);
            if let Scheduler::Backoff {
                match_limit,
                ban_length,
            } = cfg.scheduler
            {
                let budget = if rule.expansive {
                    match_limit
                } else {
                    match_limit * NON_EXPANSIVE_FACTOR
                };
                let threshold = budget.checked_shl(st.times_banned).unwrap_or(usize::MAX);
                if matches.len() > threshold {
                    let len = ban_length
                        .checked_shl(st.times_banned)
                        .unwrap_or(usize::MAX);
                    st.times_banned += 1;
                    st.banned_until = iterations.saturating_add(len);
                    banned_now = true;
                    log::debug!(
                        "banning {} for {len} iterations ({} matches)",
                        rule.name,
                        matches.len()
                    );
                    all_matches.push(Vec::new());
                    continue;
                }
            }
            if !matches.is_empty() {
                *rule_matches.entry(rule.name.clone()).or_default() += matches.len();
            }
            all_matches.push(matches);
            if start.elapsed() >= time_limit {
                break;
            }
        }

        iterations += 1;
        let mut limit = None;
        'apply: for (rule, matches) in rules.iter().zip(&all_matches) {
            for m in matches {
                apply_rule(g, rule, m)?;
                if g.total_nodes_upper_bound() > cfg.node_limit {
                    limit = Some(StopReason::NodeLimit);
                    break 'apply;
                }
            }
            if start.elapsed() >= time_limit {
                limit = Some(StopReason::TimeLimit);
                break;
            }
        }
        g.rebuild()?;
        log::trace!(
            "iteration {iterations}: {} classes, {} nodes",
            g.num_classes(),
            g.total_nodes()
        );
        if let Some(reason) = limit {
            break reason;
        }
        if g.total_nodes() > cfg.node_limit {
            break StopReason::NodeLimit;
        }
        if (g.nodes_added(), g.merges()) == before {
            if !banned_now {
                break StopReason::Saturated;
            }
            // nothing happened but some rules sat out: let them back in
            for st in stats.iter_mut() {
                st.banned_until = st.banned_until.min(iterations);
            }
        }
    };

    Ok(RunReport {
        iterations,
        stop_reason,
        rule_matches,
        nodes: g.total_nodes(),
        classes: g.num_classes(),
        elapsed: start.elapsed(),
    })
}
