//! Reply-interaction graphs, individual betweenness and group betweenness
//! centralization.
//!
//! Replies are stored as directed, weighted arcs (replier → replied-to), but
//! geodesics are counted on the symmetrized simple graph with unit edge
//! lengths and self-replies removed. Pairs with no connecting path contribute
//! nothing.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::io::Write;

use crate::ingest::{MonthWindow, PostIndex, PostRecord};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct InteractionGraph {
    nodes: Vec<String>,
    lookup: HashMap<String, usize>,
    /// (from, to) → reply count, self-replies included.
    arcs: BTreeMap<(usize, usize), u32>,
    /// Sorted undirected neighbour lists without self-loops.
    adjacency: Vec<Vec<usize>>,
}

impl InteractionGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `author` if absent and returns its node index.
    pub fn add_node(&mut self, author: &str) -> usize {
        if let Some(&i) = self.lookup.get(author) {
            return i;
        }
        let i = self.nodes.len();
        self.nodes.push(author.to_string());
        self.lookup.insert(author.to_string(), i);
        self.adjacency.push(Vec::new());
        i
    }

    /// Records one reply from `from` to `to`.
    pub fn add_reply(&mut self, from: &str, to: &str) {
        let a = self.add_node(from);
        let b = self.add_node(to);
        *self.arcs.entry((a, b)).or_insert(0) += 1;
        if a != b {
            if let Err(pos) = self.adjacency[a].binary_search(&b) {
                self.adjacency[a].insert(pos, b);
            }
            if let Err(pos) = self.adjacency[b].binary_search(&a) {
                self.adjacency[b].insert(pos, a);
            }
        }
    }

    /// Builds an undirected simple graph on nodes `0..n` from an edge list.
    /// Node `i` is named by its decimal index.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut g = Self::new();
        for i in 0..n {
            g.add_node(&i.to_string());
        }
        for &(a, b) in edges {
            g.add_reply(&a.to_string(), &b.to_string());
        }
        g
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn node_index(&self, author: &str) -> Option<usize> {
        self.lookup.get(author).copied()
    }

    /// Directed reply counts keyed by (from, to) author.
    pub fn arcs(&self) -> impl Iterator<Item = (&str, &str, u32)> + '_ {
        self.arcs
            .iter()
            .map(|(&(a, b), &w)| (self.nodes[a].as_str(), self.nodes[b].as_str(), w))
    }

    pub fn weight(&self, from: &str, to: &str) -> Option<u32> {
        let a = self.node_index(from)?;
        let b = self.node_index(to)?;
        self.arcs.get(&(a, b)).copied()
    }

    /// Neighbours of node `i` in the undirected simple view.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn undirected_edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Writes the directed arcs as `from,to,weight` csv.
    pub fn write_edge_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["from", "to", "weight"])?;
        for (from, to, weight) in self.arcs() {
            w.write_record([from, to, &weight.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Builds the interaction graph of a set of posts.
///
/// Every author in `posts` becomes a node. A post whose parent resolves
/// through `index` adds a reply arc to the parent's author, who becomes a node
/// too even when the parent was posted outside `posts`.
pub fn build_graph_from_posts<'a, I>(posts: I, index: &PostIndex<'_>) -> InteractionGraph
where
    I: IntoIterator<Item = &'a PostRecord>,
{
    let mut g = InteractionGraph::new();
    for post in posts {
        g.add_node(&post.author_id);
        if let Some(parent_author) = index.parent_author(post) {
            g.add_reply(&post.author_id, parent_author);
        }
    }
    g
}

pub fn build_graph(window: &MonthWindow<'_>, index: &PostIndex<'_>) -> InteractionGraph {
    build_graph_from_posts(window.posts.iter().copied(), index)
}

/// Raw and standardized betweenness per node, aligned with
/// [`InteractionGraph::nodes`].
#[derive(Debug, Clone, PartialEq)]
pub struct BetweennessMap {
    pub nodes: Vec<String>,
    pub raw: Vec<f64>,
    /// `raw / ((n-1)(n-2)/2)`; `None` when n < 3.
    pub standardized: Option<Vec<f64>>,
}

impl BetweennessMap {
    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    pub fn raw_of(&self, author: &str) -> Option<f64> {
        self.nodes.iter().position(|a| a == author).map(|i| self.raw[i])
    }

    pub fn max_raw(&self) -> Option<f64> {
        self.raw.iter().copied().reduce(f64::max)
    }
}

/// Betweenness of every node by Brandes' accumulation over BFS trees.
///
/// Sources are processed in node order and dependencies are summed in a fixed
/// order, so results are reproducible bit for bit.
pub fn betweenness(graph: &InteractionGraph) -> BetweennessMap {
    let n = graph.node_count();
    let mut raw = vec![0.0f64; n];

    let mut sigma = vec![0.0f64; n];
    let mut dist = vec![usize::MAX; n];
    let mut delta = vec![0.0f64; n];
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::with_capacity(n);

    for s in 0..n {
        sigma.fill(0.0);
        dist.fill(usize::MAX);
        delta.fill(0.0);
        order.clear();

        sigma[s] = 1.0;
        dist[s] = 0;
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &w in graph.neighbors(v) {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                }
            }
        }
        // Predecessors of w are its neighbours one level closer to s.
        for &w in order.iter().rev() {
            let coeff = (1.0 + delta[w]) / sigma[w];
            for &v in graph.neighbors(w) {
                if dist[v] != usize::MAX && dist[v] + 1 == dist[w] {
                    delta[v] += sigma[v] * coeff;
                }
            }
            if w != s {
                raw[w] += delta[w];
            }
        }
    }
    // Each unordered pair was counted from both endpoints.
    for b in &mut raw {
        *b /= 2.0;
    }

    let standardized = (n >= 3).then(|| {
        let max_pairs = ((n - 1) * (n - 2)) as f64 / 2.0;
        raw.iter().map(|b| b / max_pairs).collect()
    });
    BetweennessMap {
        nodes: graph.nodes().to_vec(),
        raw,
        standardized,
    }
}

/// Group betweenness centralization from raw individual scores:
/// `2 Σ (max − b_i) / ((n−1)² (n−2))`. `None` when fewer than 3 nodes.
pub fn centralization(raw: &[f64]) -> Option<f64> {
    let n = raw.len();
    if n < 3 {
        return None;
    }
    let max = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let gap: f64 = raw.iter().map(|b| max - b).sum();
    let nf = n as f64;
    Some(2.0 * gap / ((nf - 1.0) * (nf - 1.0) * (nf - 2.0)))
}

pub fn group_betweenness(graph: &InteractionGraph) -> Option<f64> {
    centralization(&betweenness(graph).raw)
}
