//! Time-dependent community variables: joiners, size, age, launch phase,
//! past activity and rotating leadership.

use std::collections::{BTreeMap, HashSet};
use std::str::FromStr;

use chrono::Duration;
use serde::{Deserialize, Serialize};

use crate::error::DynamicsError;
use crate::ingest::{MonthWindow, PostIndex, PostRecord};
use crate::month::YearMonth;
use crate::netgraph::{betweenness, build_graph_from_posts};

/// Snapshot grid used to sample members' betweenness within a month.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SnapshotConfig {
    spacing_days: u32,
    trail_days: u32,
}

impl SnapshotConfig {
    pub fn new(spacing_days: u32, trail_days: u32) -> Result<Self, DynamicsError> {
        if trail_days > 31 {
            return Err(DynamicsError::TrailTooLong(trail_days));
        }
        if spacing_days == 0 || spacing_days > trail_days {
            return Err(DynamicsError::SpacingExceedsTrail {
                spacing_days,
                trail_days,
            });
        }
        Ok(Self {
            spacing_days,
            trail_days,
        })
    }

    pub fn spacing_days(self) -> u32 {
        self.spacing_days
    }

    pub fn trail_days(self) -> u32 {
        self.trail_days
    }
}

impl Default for SnapshotConfig {
    fn default() -> Self {
        Self {
            spacing_days: 1,
            trail_days: 7,
        }
    }
}

/// One member's raw betweenness at each snapshot of a month.
#[derive(Debug, Clone, PartialEq)]
pub struct MemberSeries {
    pub author_id: String,
    pub values: Vec<f64>,
}

/// Samples raw betweenness for every member who posted in `month`.
///
/// Snapshot instants are `month_start + k·spacing` for `k = 1..=⌊len/spacing⌋`.
/// At each instant the graph is built from the community posts in
/// `(t − trail, t]`; members missing from that graph score 0. `community_posts`
/// must be the community's full history in timestamp order.
pub fn betweenness_series(
    community_posts: &[&PostRecord],
    month: YearMonth,
    config: SnapshotConfig,
    index: &PostIndex<'_>,
) -> Vec<MemberSeries> {
    let (start, end) = (month.start(), month.end());
    let mut members: Vec<&str> = community_posts
        .iter()
        .filter(|p| p.timestamp >= start && p.timestamp < end)
        .map(|p| p.author_id.as_str())
        .collect();
    if members.is_empty() {
        return Vec::new();
    }
    members.sort_unstable();
    members.dedup();

    let spacing = Duration::days(config.spacing_days as i64);
    let trail = Duration::days(config.trail_days as i64);
    let snapshots = month.duration().num_days() / config.spacing_days as i64;

    let mut values = vec![Vec::with_capacity(snapshots as usize); members.len()];
    for k in 1..=snapshots {
        let t = start + spacing * k as i32;
        let from = t - trail;
        let lo = community_posts.partition_point(|p| p.timestamp <= from);
        let hi = community_posts.partition_point(|p| p.timestamp <= t);
        let graph = build_graph_from_posts(community_posts[lo..hi].iter().copied(), index);
        let scores = betweenness(&graph);
        for (m, author) in members.iter().enumerate() {
            let b = graph.node_index(author).map_or(0.0, |i| scores.raw[i]);
            values[m].push(b);
        }
    }
    members
        .into_iter()
        .zip(values)
        .map(|(author, values)| MemberSeries {
            author_id: author.to_string(),
            values,
        })
        .collect()
}

/// Counts direction reversals in a series.
///
/// Runs of equal values are collapsed first; a plateau whose neighbours lie
/// on the same side is one extremum, a plateau between a lower and a higher
/// value is none.
pub fn count_oscillations(series: &[f64]) -> usize {
    let mut collapsed: Vec<f64> = Vec::with_capacity(series.len());
    for &v in series {
        if collapsed.last() != Some(&v) {
            collapsed.push(v);
        }
    }
    collapsed
        .windows(3)
        .filter(|w| (w[1] > w[0]) == (w[1] > w[2]))
        .count()
}

/// Mean oscillation count over the given series; 0 when there are none.
pub fn rotating_leadership(series: &[MemberSeries]) -> f64 {
    if series.is_empty() {
        return 0.0;
    }
    let total: usize = series.iter().map(|s| count_oscillations(&s.values)).sum();
    total as f64 / series.len() as f64
}

fn first_post_months<'a>(windows: &[MonthWindow<'a>]) -> BTreeMap<&'a str, YearMonth> {
    let mut first = BTreeMap::new();
    for w in windows {
        for p in &w.posts {
            first.entry(p.author_id.as_str()).or_insert(w.month);
        }
    }
    first
}

/// Authors whose first post in the community falls in `month`.
pub fn joiners(windows: &[MonthWindow<'_>], month: YearMonth) -> usize {
    first_post_months(windows)
        .values()
        .filter(|&&m| m == month)
        .count()
}

/// Distinct contributors through the end of `month`.
pub fn size(windows: &[MonthWindow<'_>], month: YearMonth) -> usize {
    windows
        .iter()
        .filter(|w| w.month <= month)
        .flat_map(|w| w.posts.iter().map(|p| p.author_id.as_str()))
        .collect::<HashSet<_>>()
        .len()
}

/// Months since the community's first posting month, which has age 1.
pub fn age(first_month: YearMonth, month: YearMonth) -> u32 {
    (first_month.months_until(month) + 1).max(1) as u32
}

/// Post count of the month before `month`; 0 when there is none.
pub fn past_activity(windows: &[MonthWindow<'_>], month: YearMonth) -> usize {
    let prev = month.pred();
    windows
        .iter()
        .find(|w| w.month == prev)
        .map_or(0, |w| w.posts.len())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LaunchRule {
    /// Launch phase if either threshold is met.
    Or,
    /// Launch phase only if both thresholds are met.
    And,
}

impl FromStr for LaunchRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "or" => Ok(Self::Or),
            "and" => Ok(Self::And),
            other => Err(format!("unknown launch rule `{other}` (expected or|and)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LaunchThresholds {
    /// Ages up to and including this many months count as launch.
    pub max_age: u32,
    /// Sizes strictly below this count as launch.
    pub min_size: usize,
    pub rule: LaunchRule,
}

impl Default for LaunchThresholds {
    fn default() -> Self {
        Self {
            max_age: 3,
            min_size: 50,
            rule: LaunchRule::Or,
        }
    }
}

pub fn launch_phase(age: u32, size: usize, thresholds: &LaunchThresholds) -> bool {
    let young = age <= thresholds.max_age;
    let small = size < thresholds.min_size;
    match thresholds.rule {
        LaunchRule::Or => young || small,
        LaunchRule::And => young && small,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicsRow {
    pub community_id: String,
    pub month: YearMonth,
    pub joiners: u64,
    pub size: u64,
    pub age: u32,
    pub launch_phase: bool,
    pub past_activity: u64,
    pub rotating_leadership: f64,
    pub posts: u64,
    pub active_members: u64,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct DynamicsConfig {
    pub snapshots: SnapshotConfig,
    pub launch: LaunchThresholds,
}

/// All dynamics rows of one community, in month order. `windows` must be the
/// community's contiguous monthly windows.
pub fn community_dynamics(
    windows: &[MonthWindow<'_>],
    index: &PostIndex<'_>,
    config: &DynamicsConfig,
) -> Vec<DynamicsRow> {
    let Some(first) = windows.first() else {
        return Vec::new();
    };
    let history: Vec<&PostRecord> = windows.iter().flat_map(|w| w.posts.iter().copied()).collect();
    let first_months = first_post_months(windows);
    let mut joined_per_month: BTreeMap<YearMonth, u64> = BTreeMap::new();
    for m in first_months.values() {
        *joined_per_month.entry(*m).or_default() += 1;
    }

    let mut rows = Vec::with_capacity(windows.len());
    let mut size = 0u64;
    let mut prev_posts = 0u64;
    for w in windows {
        let joiners = joined_per_month.get(&w.month).copied().unwrap_or(0);
        size += joiners;
        let age = age(first.month, w.month);
        let series = betweenness_series(&history, w.month, config.snapshots, index);
        rows.push(DynamicsRow {
            community_id: w.community_id.to_string(),
            month: w.month,
            joiners,
            size,
            age,
            launch_phase: launch_phase(age, size as usize, &config.launch),
            past_activity: prev_posts,
            rotating_leadership: rotating_leadership(&series),
            posts: w.posts.len() as u64,
            active_members: series.len() as u64,
        });
        prev_posts = w.posts.len() as u64;
    }
    rows
}
