//! Undirected guard graphs, bounded in-degree orientations, degeneracy
//! orderings and greedy colorings.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

/// Errors raised while building or reading graphs.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("loop at vertex {0} is not allowed")]
    Loop(usize),
    #[error("vertex {v} out of range for a graph on {n} vertices")]
    OutOfRange { v: usize, n: usize },
    #[error("tuple {tuple:?} of relation {rel} is not a clique of the guard graph")]
    NotGuarded { rel: String, tuple: Vec<usize> },
}

/// A simple undirected graph on vertices `0..n` with sorted adjacency lists.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Graph {
    adj: Vec<Vec<usize>>,
    edges: usize,
}

impl Graph {
    /// The edgeless graph on `n` vertices.
    pub fn empty(n: usize) -> Self {
        Graph { adj: vec![Vec::new(); n], edges: 0 }
    }

    /// Builds a graph from an edge list. Parallel and reversed pairs collapse;
    /// loops are rejected.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, GraphError> {
        let mut adj = vec![Vec::new(); n];
        for (u, v) in edges {
            for w in [u, v] {
                if w >= n {
                    return Err(GraphError::OutOfRange { v: w, n });
                }
            }
            if u == v {
                return Err(GraphError::Loop(u));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        Ok(Self::from_raw_adjacency(adj))
    }

    /// Sorts and deduplicates raw symmetric adjacency lists (no loops).
    pub(crate) fn from_raw_adjacency(mut adj: Vec<Vec<usize>>) -> Self {
        let mut twice = 0;
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
            twice += list.len();
        }
        Graph { adj, edges: twice / 2 }
    }

    /// An `rows × cols` grid graph, vertex `r * cols + c`.
    pub fn grid(rows: usize, cols: usize) -> Self {
        let mut edges = Vec::with_capacity(2 * rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                let v = r * cols + c;
                if c + 1 < cols {
                    edges.push((v, v + 1));
                }
                if r + 1 < rows {
                    edges.push((v, v + cols));
                }
            }
        }
        Self::from_edges(rows * cols, edges).expect("grid edges are valid")
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n() && self.adj[u].binary_search(&v).is_ok()
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    /// Edge density |E| / |V| (zero for the empty graph).
    pub fn density(&self) -> f64 {
        if self.n() == 0 {
            0.0
        } else {
            self.edges as f64 / self.n() as f64
        }
    }

    /// The subgraph induced by `members`, keeping the vertex numbering.
    pub fn induced(&self, members: &[bool]) -> Graph {
        let adj = self
            .adj
            .iter()
            .enumerate()
            .map(|(u, list)| {
                if members[u] {
                    list.iter().copied().filter(|&v| members[v]).collect()
                } else {
                    Vec::new()
                }
            })
            .collect();
        Self::from_raw_adjacency(adj)
    }

    /// True when every edge of `self` is an edge of `other`.
    pub fn is_subgraph_of(&self, other: &Graph) -> bool {
        self.n() == other.n() && self.edges().all(|(u, v)| other.has_edge(u, v))
    }

    /// True when the given vertices are pairwise adjacent (repeats allowed).
    pub fn is_clique(&self, vertices: &[usize]) -> bool {
        vertices.iter().enumerate().all(|(i, &u)| {
            vertices[i + 1..].iter().all(|&v| u == v || self.has_edge(u, v))
        })
    }

    /// Parses the `graph <n>` / `u v` text format.
    pub fn parse(text: &str) -> Result<Graph, GraphError> {
        let (n, pairs) = parse_pairs(text, "graph")?;
        Graph::from_edges(n, pairs).map_err(|e| match e {
            GraphError::Loop(v) => GraphError::Syntax { line: 0, msg: format!("loop at vertex {v}") },
            other => other,
        })
    }

    /// Writes the `graph <n>` / `u v` text format.
    pub fn to_text(&self) -> String {
        let mut out = format!("graph {}\n", self.n());
        for (u, v) in self.edges() {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }
}

/// Shared reader for `graph <n>` and `digraph <n>` files.
fn parse_pairs(text: &str, header: &str) -> Result<(usize, Vec<(usize, usize)>), GraphError> {
    let mut n = None;
    let mut pairs = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let words: Vec<&str> = body.split_whitespace().collect();
        let syntax = |msg: String| GraphError::Syntax { line, msg };
        match n {
            None => {
                if words.len() != 2 || words[0] != header {
                    return Err(syntax(format!("expected `{header} <n>`")));
                }
                n = Some(words[1].parse::<usize>().map_err(|_| syntax(format!("bad vertex count `{}`", words[1])))?);
            }
            Some(size) => {
                if words.len() != 2 {
                    return Err(syntax("expected a `u v` pair".into()));
                }
                let mut ends = [0usize; 2];
                for (slot, w) in ends.iter_mut().zip(&words) {
                    *slot = w.parse().map_err(|_| syntax(format!("bad vertex `{w}`")))?;
                    if *slot >= size {
                        return Err(syntax(format!("vertex {slot} out of range (n = {size})")));
                    }
                }
                if ends[0] == ends[1] {
                    return Err(syntax(format!("loop at vertex {}", ends[0])));
                }
                pairs.push((ends[0], ends[1]));
            }
        }
    }
    let n = n.ok_or(GraphError::Syntax { line: 0, msg: format!("missing `{header} <n>` header") })?;
    Ok((n, pairs))
}

/// A loop-free digraph with at most one edge per ordered pair.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DiGraph {
    out: Vec<Vec<usize>>,
    inc: Vec<Vec<usize>>,
    edges: usize,
}

impl DiGraph {
    pub fn empty(n: usize) -> Self {
        DiGraph { out: vec![Vec::new(); n], inc: vec![Vec::new(); n], edges: 0 }
    }

    /// Builds a digraph from directed pairs; duplicates collapse, loops are rejected.
    pub fn from_arcs(n: usize, arcs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, GraphError> {
        let mut out = vec![Vec::new(); n];
        for (u, v) in arcs {
            for w in [u, v] {
                if w >= n {
                    return Err(GraphError::OutOfRange { v: w, n });
                }
            }
            if u == v {
                return Err(GraphError::Loop(u));
            }
            out[u].push(v);
        }
        Ok(Self::from_out_lists(out))
    }

    /// Builds the in-lists from (possibly unsorted, duplicated) out-lists.
    pub(crate) fn from_out_lists(mut out: Vec<Vec<usize>>) -> Self {
        let n = out.len();
        let mut inc = vec![Vec::new(); n];
        let mut edges = 0;
        for (u, list) in out.iter_mut().enumerate() {
            list.sort_unstable();
            list.dedup();
            edges += list.len();
            for &v in list.iter() {
                inc[v].push(u);
            }
        }
        // in-lists are filled in increasing tail order, hence already sorted
        DiGraph { out, inc, edges }
    }

    pub fn n(&self) -> usize {
        self.out.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges
    }

    pub fn out_neighbors(&self, v: usize) -> &[usize] {
        &self.out[v]
    }

    pub fn in_neighbors(&self, v: usize) -> &[usize] {
        &self.inc[v]
    }

    pub fn has_arc(&self, u: usize, v: usize) -> bool {
        self.out[u].binary_search(&v).is_ok()
    }

    /// Adjacent in either direction.
    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        self.has_arc(u, v) || self.has_arc(v, u)
    }

    pub fn max_in_degree(&self) -> usize {
        self.inc.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.out.iter().enumerate().flat_map(|(u, list)| list.iter().map(move |&v| (u, v)))
    }

    /// The underlying undirected graph.
    pub fn underlying(&self) -> Graph {
        let mut adj = self.out.clone();
        for (v, list) in self.inc.iter().enumerate() {
            adj[v].extend_from_slice(list);
        }
        Graph::from_raw_adjacency(adj)
    }

    pub fn parse(text: &str) -> Result<DiGraph, GraphError> {
        let (n, pairs) = parse_pairs(text, "digraph")?;
        DiGraph::from_arcs(n, pairs)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("digraph {}\n", self.n());
        for (u, v) in self.arcs() {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }
}

/// A vertex ordering in which every vertex has at most `degeneracy`
/// neighbors earlier in the order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegeneracyOrder {
    pub order: Vec<usize>,
    /// `position[v]` is the index of `v` in `order`.
    pub position: Vec<usize>,
    pub degeneracy: usize,
}

impl DegeneracyOrder {
    /// Number of neighbors of `v` placed before `v`.
    pub fn back_degree(&self, g: &Graph, v: usize) -> usize {
        g.neighbors(v).iter().filter(|&&u| self.position[u] < self.position[v]).count()
    }
}

/// Smallest-last ordering via a bucket queue, linear in n + |E|.
///
/// Vertices are repeatedly removed at minimum remaining degree (ties broken
/// by smallest index within the bucket); the ordering is the reverse removal
/// sequence, so each vertex sees at most `degeneracy` earlier neighbors.
pub fn degeneracy_order(g: &Graph) -> DegeneracyOrder {
    let n = g.n();
    let mut deg: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    let max_deg = deg.iter().copied().max().unwrap_or(0);
    // Buckets hold vertices by current degree; stale entries are skipped lazily.
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); max_deg + 1];
    for v in (0..n).rev() {
        buckets[deg[v]].push(v);
    }
    let mut removed = vec![false; n];
    let mut removal = Vec::with_capacity(n);
    let mut degeneracy = 0;
    let mut low = 0;
    while removal.len() < n {
        while buckets[low].is_empty() {
            low += 1;
        }
        let v = buckets[low].pop().expect("non-empty bucket");
        if removed[v] || deg[v] != low {
            continue;
        }
        removed[v] = true;
        degeneracy = degeneracy.max(low);
        removal.push(v);
        for &u in g.neighbors(v) {
            if !removed[u] {
                deg[u] -= 1;
                buckets[deg[u]].push(u);
                if deg[u] < low {
                    low = deg[u];
                }
            }
        }
    }
    removal.reverse();
    let mut position = vec![0; n];
    for (i, &v) in removal.iter().enumerate() {
        position[v] = i;
    }
    DegeneracyOrder { order: removal, position, degeneracy }
}

/// Directs every edge from its earlier to its later endpoint in `ord`.
pub fn orient_by_order(g: &Graph, ord: &DegeneracyOrder) -> DiGraph {
    let out = (0..g.n())
        .map(|u| g.neighbors(u).iter().copied().filter(|&v| ord.position[u] < ord.position[v]).collect())
        .collect();
    DiGraph::from_out_lists(out)
}

/// A proper vertex coloring with colors `1..=k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coloring {
    pub colors: Vec<usize>,
    pub k: usize,
}

impl Coloring {
    pub fn is_proper(&self, g: &Graph) -> bool {
        g.edges().all(|(u, v)| self.colors[u] != self.colors[v])
    }

    /// Membership mask of the vertices whose color lies in `classes`.
    pub fn class_mask(&self, classes: &[usize]) -> Vec<bool> {
        self.colors.iter().map(|c| classes.contains(c)).collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (v, c) in self.colors.iter().enumerate() {
            let _ = writeln!(out, "{v} {c}");
        }
        out
    }
}

/// Greedy coloring along `ord`: each vertex takes the smallest color not
/// used by its earlier neighbors, so at most `degeneracy + 1` colors appear.
pub fn greedy_color(g: &Graph, ord: &DegeneracyOrder) -> Coloring {
    let mut colors = vec![0usize; g.n()];
    let mut seen = vec![usize::MAX; ord.degeneracy + 2];
    let mut k = 0;
    for &v in &ord.order {
        for &u in g.neighbors(v) {
            let c = colors[u];
            if c != 0 && c < seen.len() {
                seen[c] = v;
            }
        }
        let c = (1..).find(|&c| c >= seen.len() || seen[c] != v).expect("a free color exists");
        colors[v] = c;
        k = k.max(c);
    }
    Coloring { colors, k }
}

/// Relation-membership index: every tuple is associated with its latest
/// element in a degeneracy order of the guard, which bounds the number of
/// tuples stored per vertex by a function of the degeneracy and arities.
#[derive(Clone, Debug)]
pub struct TupleIndex {
    position: Vec<usize>,
    /// `assoc[v]`: relation name → tuples whose latest element is `v`.
    assoc: Vec<BTreeMap<String, Vec<Vec<usize>>>>,
}

impl TupleIndex {
    /// Indexes the given `(relation, tuple)` pairs; each tuple's elements
    /// must form a clique in `guard`.
    pub fn build<'a>(
        guard: &Graph,
        ord: &DegeneracyOrder,
        tuples: impl IntoIterator<Item = (&'a str, &'a [usize])>,
    ) -> Result<TupleIndex, GraphError> {
        let mut assoc = vec![BTreeMap::<String, Vec<Vec<usize>>>::new(); guard.n()];
        for (rel, tuple) in tuples {
            if let Some(&v) = tuple.iter().find(|&&v| v >= guard.n()) {
                return Err(GraphError::OutOfRange { v, n: guard.n() });
            }
            if !guard.is_clique(tuple) {
                return Err(GraphError::NotGuarded { rel: rel.to_string(), tuple: tuple.to_vec() });
            }
            let Some(owner) = tuple.iter().copied().max_by_key(|&v| ord.position[v]) else {
                continue; // nullary tuples carry no element to attach to
            };
            let list = assoc[owner].entry(rel.to_string()).or_default();
            if !list.iter().any(|t| t.as_slice() == tuple) {
                list.push(tuple.to_vec());
            }
        }
        Ok(TupleIndex { position: ord.position.clone(), assoc })
    }

    /// Tuples associated with `v`.
    pub fn associated(&self, v: usize) -> impl Iterator<Item = (&str, &[usize])> {
        self.assoc[v].iter().flat_map(|(r, ts)| ts.iter().map(move |t| (r.as_str(), t.as_slice())))
    }

    /// Number of tuples associated with `v`.
    pub fn load(&self, v: usize) -> usize {
        self.assoc[v].values().map(Vec::len).sum()
    }

    /// Membership test; inspects only the tuples of the latest element.
    pub fn contains(&self, rel: &str, tuple: &[usize]) -> bool {
        if tuple.iter().any(|&v| v >= self.position.len()) {
            return false;
        }
        let Some(owner) = tuple.iter().copied().max_by_key(|&v| self.position[v]) else {
            return false;
        };
        self.assoc[owner].get(rel).is_some_and(|ts| ts.iter().any(|t| t.as_slice() == tuple))
    }
}
