//! Transitive-fraternal augmentations of oriented graphs and k-th augmentations.

use thiserror::Error;

use crate::graph::{degeneracy_order, orient_by_order, DiGraph, Graph};

/// Resource limits for augmentation. Exceeding either returns an error
/// instead of exhausting memory or time.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AugmentLimits {
    /// Maximum number of arcs in any digraph of the chain.
    pub max_arcs: usize,
    /// Maximum number of candidate pairs inspected over the whole chain.
    pub max_pair_checks: u64,
}

impl Default for AugmentLimits {
    fn default() -> Self {
        AugmentLimits { max_arcs: 20_000_000, max_pair_checks: 4_000_000_000 }
    }
}

impl AugmentLimits {
    pub const UNLIMITED: AugmentLimits = AugmentLimits { max_arcs: usize::MAX, max_pair_checks: u64::MAX };
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AugmentError {
    #[error("augmentation round {round} exceeded the arc cap ({arcs} arcs > {cap})")]
    ArcCap { round: usize, arcs: usize, cap: usize },
    #[error("augmentation round {round} exceeded the pair-check cap ({cap})")]
    WorkCap { round: usize, cap: u64 },
}

/// A k-th augmentation `G ⊆ G_1 ⊆ … ⊆ G_k` with its orientations.
#[derive(Clone, Debug)]
pub struct AugmentationChain {
    pub base: Graph,
    /// `D_0..D_j` for the rounds that changed something; once a round adds
    /// no arc, every later `D_i` equals the last stored digraph.
    digraphs: Vec<DiGraph>,
    /// Underlying undirected graph of `D_k`.
    pub augmented: Graph,
    pub k: usize,
    /// Candidate pairs inspected (abstract work units).
    pub pair_checks: u64,
}

impl AugmentationChain {
    /// `D_i` for `0 ≤ i ≤ k`.
    pub fn digraph(&self, i: usize) -> &DiGraph {
        assert!(i <= self.k, "round {i} beyond k = {}", self.k);
        &self.digraphs[i.min(self.digraphs.len() - 1)]
    }

    /// First round index after which nothing changes (`None` if the chain
    /// was still growing at round k).
    pub fn fixpoint(&self) -> Option<usize> {
        let stored = self.digraphs.len() - 1;
        (stored < self.k).then_some(stored)
    }

    /// Edge densities |E(G_i)| / |V| for `i = 0..=k`.
    pub fn densities(&self) -> Vec<f64> {
        let n = self.base.n().max(1) as f64;
        (0..=self.k).map(|i| self.digraph(i).edge_count() as f64 / n).collect()
    }
}

/// One oriented augmentation round with no resource limits.
pub fn oriented_augment(d: &DiGraph) -> DiGraph {
    let mut work = 0;
    augment_round(d, AugmentLimits::UNLIMITED, 1, &mut work).expect("unlimited round cannot fail")
}

/// One oriented augmentation round of `d`:
/// transitive arcs `x→y` for every `x→z→y` with no arc `x→y`, then one arc
/// per fraternal pair `x→z←y` (x, y non-adjacent in `d` and not joined by a
/// transitive arc), the pairs being oriented along a degeneracy order of the
/// fraternal pair graph.
fn augment_round(d: &DiGraph, limits: AugmentLimits, round: usize, work: &mut u64) -> Result<DiGraph, AugmentError> {
    let n = d.n();
    let mut stamp = vec![usize::MAX; n];
    let check_work = |work: &u64| {
        if *work > limits.max_pair_checks {
            Err(AugmentError::WorkCap { round, cap: limits.max_pair_checks })
        } else {
            Ok(())
        }
    };

    // Transitive arcs.
    let mut trans_out: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut new_arcs = 0usize;
    for x in 0..n {
        stamp[x] = x;
        for &y in d.out_neighbors(x) {
            stamp[y] = x;
        }
        for &z in d.out_neighbors(x) {
            let outs = d.out_neighbors(z);
            *work += outs.len() as u64;
            for &y in outs {
                if stamp[y] != x {
                    stamp[y] = x;
                    trans_out[x].push(y);
                }
            }
        }
        new_arcs += trans_out[x].len();
        if d.edge_count() + new_arcs > limits.max_arcs {
            return Err(AugmentError::ArcCap { round, arcs: d.edge_count() + new_arcs, cap: limits.max_arcs });
        }
        check_work(work)?;
    }
    let mut trans_in: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (x, list) in trans_out.iter().enumerate() {
        for &y in list {
            trans_in[y].push(x);
        }
    }

    // Fraternal pairs {x, y}, x < y.
    stamp.iter_mut().for_each(|s| *s = usize::MAX);
    let mut frat_adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut frat_pairs = 0usize;
    for x in 0..n {
        stamp[x] = x;
        for list in [d.out_neighbors(x), d.in_neighbors(x), &trans_out[x], &trans_in[x]] {
            for &y in list {
                stamp[y] = x;
            }
        }
        for &z in d.out_neighbors(x) {
            let ins = d.in_neighbors(z);
            *work += ins.len() as u64;
            for &y in ins {
                if y > x && stamp[y] != x {
                    stamp[y] = x;
                    frat_adj[x].push(y);
                    frat_adj[y].push(x);
                    frat_pairs += 1;
                }
            }
        }
        if d.edge_count() + new_arcs + frat_pairs > limits.max_arcs {
            return Err(AugmentError::ArcCap {
                round,
                arcs: d.edge_count() + new_arcs + frat_pairs,
                cap: limits.max_arcs,
            });
        }
        check_work(work)?;
    }
    let frat = Graph::from_raw_adjacency(frat_adj);
    let frat_orient = orient_by_order(&frat, &degeneracy_order(&frat));

    let mut out: Vec<Vec<usize>> = (0..n).map(|v| d.out_neighbors(v).to_vec()).collect();
    for v in 0..n {
        out[v].extend_from_slice(&trans_out[v]);
        out[v].extend_from_slice(frat_orient.out_neighbors(v));
    }
    Ok(DiGraph::from_out_lists(out))
}

/// The k-th augmentation of `g` with default limits.
pub fn kth_augmentation(g: &Graph, k: usize) -> Result<AugmentationChain, AugmentError> {
    kth_augmentation_with(g, k, AugmentLimits::default())
}

/// The k-th augmentation of `g`, starting from the degeneracy orientation
/// `D_0` of `g`. Rounds stop early at a fixpoint, since an augmentation of a
/// transitively-fraternally closed digraph is the identity.
pub fn kth_augmentation_with(g: &Graph, k: usize, limits: AugmentLimits) -> Result<AugmentationChain, AugmentError> {
    let d0 = orient_by_order(g, &degeneracy_order(g));
    let mut digraphs = vec![d0];
    let mut work = 0u64;
    for round in 1..=k {
        let prev = digraphs.last().expect("chain starts with D_0");
        let next = augment_round(prev, limits, round, &mut work)?;
        if next.edge_count() == prev.edge_count() {
            break;
        }
        digraphs.push(next);
    }
    let augmented = digraphs.last().expect("non-empty").underlying();
    Ok(AugmentationChain { base: g.clone(), digraphs, augmented, k, pair_checks: work })
}
