//! Shared oracles and generators for the integration suites.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use vcop::netgraph::InteractionGraph;
use vcop::panel::PanelRow;
use vcop::YearMonth;

/// Random simple undirected graph on `n` nodes with edge probability `p`.
pub fn random_edges(n: usize, p: f64, rng: &mut impl Rng) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(p) {
                edges.push((i, j));
            }
        }
    }
    edges
}

pub fn adjacency(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<bool>> {
    let mut adj = vec![vec![false; n]; n];
    for &(a, b) in edges {
        if a != b {
            adj[a][b] = true;
            adj[b][a] = true;
        }
    }
    adj
}

fn all_simple_paths(adj: &[Vec<bool>], s: usize, t: usize) -> Vec<Vec<usize>> {
    fn walk(adj: &[Vec<bool>], t: usize, path: &mut Vec<usize>, on: &mut [bool], out: &mut Vec<Vec<usize>>) {
        let u = *path.last().unwrap();
        if u == t {
            out.push(path.clone());
            return;
        }
        for v in 0..adj.len() {
            if adj[u][v] && !on[v] {
                on[v] = true;
                path.push(v);
                walk(adj, t, path, on, out);
                path.pop();
                on[v] = false;
            }
        }
    }
    let mut on = vec![false; adj.len()];
    on[s] = true;
    let mut out = Vec::new();
    walk(adj, t, &mut vec![s], &mut on, &mut out);
    out
}

/// Betweenness by enumerating every simple path between every unordered pair
/// and keeping the shortest ones.
pub fn brute_force_betweenness(n: usize, edges: &[(usize, usize)]) -> Vec<f64> {
    let adj = adjacency(n, edges);
    let mut b = vec![0.0; n];
    for s in 0..n {
        for t in s + 1..n {
            let paths = all_simple_paths(&adj, s, t);
            let Some(shortest) = paths.iter().map(Vec::len).min() else {
                continue;
            };
            let geodesics: Vec<&Vec<usize>> = paths.iter().filter(|p| p.len() == shortest).collect();
            let total = geodesics.len() as f64;
            for (v, bv) in b.iter_mut().enumerate() {
                if v == s || v == t {
                    continue;
                }
                let through = geodesics.iter().filter(|p| p.contains(&v)).count() as f64;
                *bv += through / total;
            }
        }
    }
    b
}

/// Centralization straight from its definition on raw scores.
pub fn centralization_oracle(b: &[f64]) -> Option<f64> {
    let n = b.len();
    if n < 3 {
        return None;
    }
    let max = b.iter().cloned().fold(f64::MIN, f64::max);
    let gaps: f64 = b.iter().map(|x| max - x).sum();
    let nf = n as f64;
    Some(2.0 * gaps / ((nf - 1.0).powi(2) * (nf - 2.0)))
}

pub fn graph(n: usize, edges: &[(usize, usize)]) -> InteractionGraph {
    InteractionGraph::from_edges(n, edges)
}

pub fn star(n: usize) -> Vec<(usize, usize)> {
    (1..n).map(|i| (0, i)).collect()
}

pub fn cycle(n: usize) -> Vec<(usize, usize)> {
    (0..n).map(|i| (i, (i + 1) % n)).collect()
}

pub fn complete(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

pub struct PanelTruth {
    pub groups: usize,
    pub per_group: usize,
    pub beta: (f64, f64),
    pub var_u: f64,
    pub var_e: f64,
}

/// Balanced panel with outcome `joiners = b0 + b1 x + u_g + e` and the
/// covariate in extra column `x`.
pub fn synthetic_panel(truth: &PanelTruth, seed: u64) -> Vec<PanelRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let std = Normal::new(0.0, 1.0).unwrap();
    let start = YearMonth::new(2008, 4).unwrap();
    let mut rows = Vec::with_capacity(truth.groups * truth.per_group);
    for g in 0..truth.groups {
        let u = truth.var_u.sqrt() * std.sample(&mut rng);
        for m in 0..truth.per_group {
            let x: f64 = 2.0 * std.sample(&mut rng);
            let e = truth.var_e.sqrt() * std.sample(&mut rng);
            let mut row = PanelRow {
                community_id: format!("g{g:02}"),
                month: Some(start.plus_months(m as u32)),
                joiners: Some(truth.beta.0 + truth.beta.1 * x + u + e),
                ..PanelRow::default()
            };
            row.extra.insert("x".into(), x);
            rows.push(row);
        }
    }
    rows
}

/// Ordinary least squares of joiners on `x`.
pub fn ols(rows: &[PanelRow]) -> (f64, f64) {
    let xs: Vec<f64> = rows.iter().map(|r| r.extra["x"]).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.joiners.unwrap()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let b1 = sxy / sxx;
    (my - b1 * mx, b1)
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn sd(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}
