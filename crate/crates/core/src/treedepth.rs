//! Low tree-depth colorings and depth-certifying rooted forests.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::augment::{kth_augmentation_with, AugmentError, AugmentLimits, AugmentationChain};
use crate::graph::{degeneracy_order, greedy_color, Coloring, Graph};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreedepthError {
    #[error("order d must be at least 1")]
    ZeroOrder,
    #[error(transparent)]
    Augment(#[from] AugmentError),
    #[error("edge {u}-{v} is not an ancestor-descendant pair of the forest")]
    AncestorViolation { u: usize, v: usize },
    #[error("forest depth {depth} exceeds the bound {bound} for {classes} classes")]
    DepthBound { depth: usize, bound: usize, classes: usize },
    #[error("exact tree-depth is limited to {max} vertices, got {n}")]
    TooLarge { n: usize, max: usize },
    #[error("{0} classes requested but the coloring has order {1}")]
    TooManyClasses(usize, usize),
}

/// A rooted forest over the vertices `0..n` of a host graph, restricted to a
/// member set. Roots (and non-members) are their own parents; roots have
/// depth 1 and non-members depth 0.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RootedForest {
    pub parent: Vec<usize>,
    pub depth: Vec<usize>,
    pub members: Vec<bool>,
    children: Vec<Vec<usize>>,
    roots: Vec<usize>,
}

impl RootedForest {
    /// Builds a forest from a parent array (self-parent = root) over the
    /// member set. Panics on cycles or parents outside the members.
    pub fn from_parents(parent: Vec<usize>, members: Vec<bool>) -> Self {
        let n = parent.len();
        let mut depth = vec![0usize; n];
        let mut children = vec![Vec::new(); n];
        let mut roots = Vec::new();
        for v in 0..n {
            if !members[v] {
                assert_eq!(parent[v], v, "non-member {v} must be its own parent");
                continue;
            }
            if parent[v] == v {
                roots.push(v);
            } else {
                assert!(members[parent[v]], "parent of {v} is not a member");
                children[parent[v]].push(v);
            }
        }
        let mut stack: Vec<usize> = roots.iter().rev().copied().collect();
        for &r in &roots {
            depth[r] = 1;
        }
        let mut seen = roots.len();
        while let Some(v) = stack.pop() {
            for &c in children[v].iter().rev() {
                depth[c] = depth[v] + 1;
                seen += 1;
                stack.push(c);
            }
        }
        assert_eq!(seen, members.iter().filter(|&&m| m).count(), "parent links contain a cycle");
        RootedForest { parent, depth, members, children, roots }
    }

    pub fn n(&self) -> usize {
        self.parent.len()
    }

    pub fn roots(&self) -> &[usize] {
        &self.roots
    }

    /// Children of `v` in ascending order.
    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    pub fn is_member(&self, v: usize) -> bool {
        self.members[v]
    }

    /// Maximum depth over members (0 for an empty forest).
    pub fn height(&self) -> usize {
        self.depth.iter().copied().max().unwrap_or(0)
    }

    /// The root path `P(v)` from the root down to `v` (`path[i]` has depth `i+1`).
    pub fn root_path(&self, v: usize) -> Vec<usize> {
        let mut path = vec![v];
        let mut u = v;
        while self.parent[u] != u {
            u = self.parent[u];
            path.push(u);
        }
        path.reverse();
        path
    }

    /// The ancestor of `v` at depth `d` (`1 ≤ d ≤ depth(v)`).
    pub fn ancestor_at(&self, v: usize, d: usize) -> usize {
        let mut u = v;
        while self.depth[u] > d {
            u = self.parent[u];
        }
        u
    }

    /// True when `a` is an ancestor of `b` or equal to it.
    pub fn is_ancestor(&self, a: usize, b: usize) -> bool {
        self.members[a] && self.members[b] && self.depth[a] <= self.depth[b] && self.ancestor_at(b, self.depth[a]) == a
    }

    /// True when `u` and `v` lie on a common root path.
    pub fn comparable(&self, u: usize, v: usize) -> bool {
        self.is_ancestor(u, v) || self.is_ancestor(v, u)
    }

    /// Checks that every edge of `h` joins an ancestor-descendant pair.
    pub fn check_closure(&self, h: &Graph) -> Result<(), TreedepthError> {
        for (u, v) in h.edges() {
            if !self.comparable(u, v) {
                return Err(TreedepthError::AncestorViolation { u, v });
            }
        }
        Ok(())
    }

    /// `v parent depth` lines for members.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for v in (0..self.n()).filter(|&v| self.members[v]) {
            let _ = writeln!(out, "{v} {} {}", self.parent[v], self.depth[v]);
        }
        out
    }
}

/// DFS forest of the subgraph of `g` induced by `members`: one tree per
/// component, rooted at its smallest vertex, children visited in ascending
/// order. DFS trees have no cross edges, so every edge of the induced
/// subgraph joins an ancestor and a descendant.
pub fn dfs_forest(g: &Graph, members: &[bool]) -> RootedForest {
    let n = g.n();
    let mut parent: Vec<usize> = (0..n).collect();
    let mut visited = vec![false; n];
    for root in 0..n {
        if !members[root] || visited[root] {
            continue;
        }
        visited[root] = true;
        // Stack of (vertex, next neighbor index).
        let mut stack = vec![(root, 0usize)];
        while let Some(&mut (v, ref mut next)) = stack.last_mut() {
            let nbrs = g.neighbors(v);
            while *next < nbrs.len() && (!members[nbrs[*next]] || visited[nbrs[*next]]) {
                *next += 1;
            }
            if *next == nbrs.len() {
                stack.pop();
                continue;
            }
            let w = nbrs[*next];
            *next += 1;
            visited[w] = true;
            parent[w] = v;
            stack.push((w, 0));
        }
    }
    RootedForest::from_parents(parent, members.to_vec())
}

/// DFS forest of `g[vertices]` on local identifiers: local vertex `i` is
/// `vertices[i]` (which must be sorted ascending). Same traversal rules as
/// [`dfs_forest`]; runs in time linear in the size of the induced subgraph
/// plus the degrees of `vertices`.
pub fn dfs_forest_local(g: &Graph, vertices: &[usize], scratch: &mut LocalIds) -> (RootedForest, Graph) {
    scratch.assign(vertices);
    let m = vertices.len();
    let adj: Vec<Vec<usize>> = vertices
        .iter()
        .map(|&v| g.neighbors(v).iter().filter_map(|&u| scratch.get(u)).collect())
        .collect();
    scratch.clear(vertices);
    let local = Graph::from_raw_adjacency(adj);
    let forest = dfs_forest(&local, &vec![true; m]);
    (forest, local)
}

/// Reusable global → local identifier map.
#[derive(Clone, Debug)]
pub struct LocalIds {
    ids: Vec<usize>,
}

impl LocalIds {
    pub fn new(n: usize) -> Self {
        LocalIds { ids: vec![usize::MAX; n] }
    }

    fn assign(&mut self, vertices: &[usize]) {
        for (i, &v) in vertices.iter().enumerate() {
            self.ids[v] = i;
        }
    }

    fn clear(&mut self, vertices: &[usize]) {
        for &v in vertices {
            self.ids[v] = usize::MAX;
        }
    }

    fn get(&self, v: usize) -> Option<usize> {
        let id = self.ids[v];
        (id != usize::MAX).then_some(id)
    }
}

/// Checks the ancestor property of `forest` for `h` and the depth bound
/// `2^classes − 1`.
pub fn certify_forest(forest: &RootedForest, h: &Graph, classes: usize) -> Result<(), TreedepthError> {
    forest.check_closure(h)?;
    let bound = (1usize << classes.min(usize::BITS as usize - 1)) - 1;
    if forest.height() > bound {
        return Err(TreedepthError::DepthBound { depth: forest.height(), bound, classes });
    }
    Ok(())
}

/// Depth-certifying forest for the subgraph of `g` induced by `members`,
/// which is a union of `classes` color classes of a low tree-depth coloring:
/// checks the ancestor property and the depth bound `2^classes − 1`.
pub fn depth_certifying_forest(g: &Graph, members: &[bool], classes: usize) -> Result<RootedForest, TreedepthError> {
    let forest = dfs_forest(g, members);
    certify_forest(&forest, &g.induced(members), classes)?;
    Ok(forest)
}

/// A coloring of `G_k` (`k = 3(d+1)²`) in which any `s ≤ d` classes induce a
/// subgraph of `G` with tree-depth at most `s`.
#[derive(Clone, Debug)]
pub struct LowTDColoring {
    pub chain: AugmentationChain,
    pub coloring: Coloring,
    pub order: usize,
}

/// Number of augmentation rounds used for a coloring of order `d`.
pub fn rounds_for_order(d: usize) -> usize {
    3 * (d + 1) * (d + 1)
}

pub fn low_treedepth_coloring(g: &Graph, d: usize) -> Result<LowTDColoring, TreedepthError> {
    low_treedepth_coloring_with(g, d, AugmentLimits::default())
}

pub fn low_treedepth_coloring_with(g: &Graph, d: usize, limits: AugmentLimits) -> Result<LowTDColoring, TreedepthError> {
    if d == 0 {
        return Err(TreedepthError::ZeroOrder);
    }
    let chain = kth_augmentation_with(g, rounds_for_order(d), limits)?;
    let coloring = greedy_color(&chain.augmented, &degeneracy_order(&chain.augmented));
    Ok(LowTDColoring { chain, coloring, order: d })
}

impl LowTDColoring {
    /// Depth-certifying forest for the union of the given classes.
    pub fn forest_for_classes(&self, classes: &[usize]) -> Result<RootedForest, TreedepthError> {
        if classes.len() > self.order {
            return Err(TreedepthError::TooManyClasses(classes.len(), self.order));
        }
        let members = self.coloring.class_mask(classes);
        depth_certifying_forest(&self.chain.base, &members, classes.len())
    }
}

/// Largest graph accepted by [`exact_treedepth`].
pub const EXACT_TREEDEPTH_MAX: usize = 20;

/// Exact tree-depth by the recursion `td(G) = 1 + min_v td(G − v)` on
/// connected graphs and the maximum over components otherwise, memoized on
/// vertex subsets.
pub fn exact_treedepth(h: &Graph) -> Result<usize, TreedepthError> {
    let n = h.n();
    if n > EXACT_TREEDEPTH_MAX {
        return Err(TreedepthError::TooLarge { n, max: EXACT_TREEDEPTH_MAX });
    }
    let nbr: Vec<u32> = (0..n).map(|v| h.neighbors(v).iter().fold(0u32, |m, &u| m | 1 << u)).collect();
    let mut memo = HashMap::new();
    let full = if n == 0 { 0 } else { (1u32 << n) - 1 };
    Ok(td_subset(full, &nbr, &mut memo))
}

fn td_subset(set: u32, nbr: &[u32], memo: &mut HashMap<u32, usize>) -> usize {
    if set == 0 {
        return 0;
    }
    if set.count_ones() == 1 {
        return 1;
    }
    if let Some(&d) = memo.get(&set) {
        return d;
    }
    // Component containing the lowest vertex.
    let mut comp = set & set.wrapping_neg();
    loop {
        let mut grown = comp;
        let mut bits = comp;
        while bits != 0 {
            let v = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            grown |= nbr[v] & set;
        }
        if grown == comp {
            break;
        }
        comp = grown;
    }
    let result = if comp != set {
        td_subset(comp, nbr, memo).max(td_subset(set & !comp, nbr, memo))
    } else {
        let mut best = usize::MAX;
        let mut bits = set;
        while bits != 0 {
            let v = bits.trailing_zeros();
            bits &= bits - 1;
            best = best.min(1 + td_subset(set & !(1 << v), nbr, memo));
        }
        best
    };
    memo.insert(set, result);
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> Graph {
        Graph::from_edges(n, (1..n).map(|v| (v - 1, v))).unwrap()
    }

    fn complete(n: usize) -> Graph {
        Graph::from_edges(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)))).unwrap()
    }

    #[test]
    fn exact_values() {
        for n in 1..=6 {
            assert_eq!(exact_treedepth(&complete(n)).unwrap(), n);
        }
        assert_eq!(exact_treedepth(&path(4)).unwrap(), 3);
        assert_eq!(exact_treedepth(&path(7)).unwrap(), 3);
        assert_eq!(exact_treedepth(&path(8)).unwrap(), 4);
        let star = Graph::from_edges(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        assert_eq!(exact_treedepth(&star).unwrap(), 2);
        assert_eq!(exact_treedepth(&Graph::empty(0)).unwrap(), 0);
        assert!(exact_treedepth(&Graph::empty(21)).is_err());
    }

    #[test]
    fn dfs_forests() {
        let g = Graph::empty(4);
        let f = dfs_forest(&g, &[true; 4]);
        assert_eq!(f.roots(), &[0, 1, 2, 3]);
        assert_eq!(f.height(), 1);

        let e = Graph::from_edges(2, [(0, 1)]).unwrap();
        let f = dfs_forest(&e, &[true; 2]);
        assert_eq!(f.parent, vec![0, 0]);
        assert_eq!(f.depth, vec![1, 2]);

        let p = path(4);
        let f = depth_certifying_forest(&p, &[true; 4], 3).unwrap();
        f.check_closure(&p).unwrap();
        assert!(f.height() <= 7);
        assert_eq!(f.root_path(3), vec![0, 1, 2, 3]);
        assert!(f.is_ancestor(1, 3) && !f.is_ancestor(3, 1));
    }

    #[test]
    fn depth_bound_is_enforced() {
        // a path on 4 vertices does not fit depth 2^2 − 1 = 3 as a DFS path from 0
        assert!(matches!(
            depth_certifying_forest(&path(4), &[true; 4], 2),
            Err(TreedepthError::DepthBound { .. })
        ));
    }

    #[test]
    fn low_td_coloring_small() {
        assert_eq!(rounds_for_order(1), 12);
        let tri = complete(3);
        let ltd = low_treedepth_coloring(&tri, 1).unwrap();
        for c in 1..=ltd.coloring.k {
            let members = ltd.coloring.class_mask(&[c]);
            assert_eq!(tri.induced(&members).edge_count(), 0);
        }
        let p = path(4);
        let ltd = low_treedepth_coloring(&p, 2).unwrap();
        for a in 1..=ltd.coloring.k {
            for b in a + 1..=ltd.coloring.k {
                let members = ltd.coloring.class_mask(&[a, b]);
                assert!(exact_treedepth(&p.induced(&members)).unwrap() <= 2);
                ltd.forest_for_classes(&[a, b]).unwrap();
            }
        }
    }
}
