//! Graph layer checked against direct definitions: degeneracy by subset
//! search, augmentation rules arc by arc, tree-depth by enumerating rooted
//! forests.

use rand::Rng;
use sparsefo::augment::kth_augmentation;
use sparsefo::gen;
use sparsefo::graph::{degeneracy_order, greedy_color, orient_by_order, Graph};
use sparsefo::treedepth::{dfs_forest, exact_treedepth, low_treedepth_coloring};

/// Maximum over vertex subsets of the minimum degree inside the subset.
fn brute_degeneracy(g: &Graph) -> usize {
    let n = g.n();
    let mut best = 0;
    for mask in 1u32..(1 << n) {
        let inside = |v: usize| mask >> v & 1 == 1;
        let min_deg = (0..n).filter(|&v| inside(v)).map(|v| g.neighbors(v).iter().filter(|&&u| inside(u)).count()).min();
        best = best.max(min_deg.unwrap_or(0));
    }
    best
}

/// Smallest height of a rooted forest on `0..n` whose ancestor relation
/// contains every edge, over all parent arrays.
fn brute_treedepth(g: &Graph) -> usize {
    let n = g.n();
    if n == 0 {
        return 0;
    }
    let mut parent = vec![0usize; n];
    let mut best = n;
    loop {
        // parent[v] == v marks a root.
        let depth: Option<Vec<usize>> = (0..n)
            .map(|v| {
                let mut d = 1;
                let mut w = v;
                while parent[w] != w {
                    w = parent[w];
                    d += 1;
                    if d > n {
                        return None;
                    }
                }
                Some(d)
            })
            .collect();
        if let Some(depth) = depth {
            let is_ancestor = |a: usize, mut b: usize| loop {
                if a == b {
                    return true;
                }
                if parent[b] == b {
                    return false;
                }
                b = parent[b];
            };
            if g.edges().all(|(u, v)| is_ancestor(u, v) || is_ancestor(v, u)) {
                best = best.min(depth.into_iter().max().unwrap());
            }
        }
        let mut i = 0;
        while i < n {
            parent[i] += 1;
            if parent[i] < n {
                break;
            }
            parent[i] = 0;
            i += 1;
        }
        if i == n {
            return best;
        }
    }
}

#[test]
fn degeneracy_orders_are_optimal() {
    let mut r = gen::rng(1);
    for _ in 0..60 {
        let n = r.gen_range(1..=11);
        let c = r.gen_range(1..=4);
        let g = gen::random_degenerate(n, c, &mut r);
        let ord = degeneracy_order(&g);
        assert_eq!(ord.degeneracy, brute_degeneracy(&g), "{}", g.to_text());
        let d = orient_by_order(&g, &ord);
        assert!(d.max_in_degree() <= ord.degeneracy);
        assert_eq!(d.underlying(), g);
        let col = greedy_color(&g, &ord);
        assert!(col.is_proper(&g));
        assert!(col.k <= ord.degeneracy + 1);
    }
}

#[test]
fn augmentations_follow_the_rules() {
    let mut r = gen::rng(2);
    for _ in 0..40 {
        let n = r.gen_range(2..=16);
        let g = gen::random_degenerate(n, 2, &mut r);
        let chain = kth_augmentation(&g, 3).unwrap();
        assert_eq!(chain.digraph(0).underlying(), g);
        for i in 0..3 {
            let (d, next) = (chain.digraph(i), chain.digraph(i + 1));
            for (x, z) in d.arcs() {
                assert!(next.has_arc(x, z), "arcs persist");
                for &y in d.out_neighbors(z) {
                    if y != x {
                        assert!(next.has_arc(x, y), "transitive {x}->{z}->{y}");
                    }
                }
                for &y in d.in_neighbors(z) {
                    if y != x {
                        assert!(next.adjacent(x, y), "fraternal {x}->{z}<-{y}");
                    }
                }
            }
            // Nothing else is added.
            for (x, y) in next.arcs().filter(|&(x, y)| !d.has_arc(x, y)) {
                let transitive = d.out_neighbors(x).iter().any(|&z| d.has_arc(z, y));
                let fraternal = d.out_neighbors(x).iter().any(|&z| d.has_arc(y, z));
                assert!(transitive || fraternal, "unexplained arc {x}->{y}");
            }
        }
        assert!(chain.augmented == chain.digraph(3).underlying());
    }
}

#[test]
fn exact_treedepth_matches_forest_enumeration() {
    let mut r = gen::rng(3);
    for _ in 0..40 {
        let n = r.gen_range(0..=6);
        let g = gen::random_degenerate(n, r.gen_range(1..=3), &mut r);
        assert_eq!(exact_treedepth(&g).unwrap(), brute_treedepth(&g), "{}", g.to_text());
    }
    assert_eq!(exact_treedepth(&Graph::from_edges(7, (0..6).map(|v| (v, v + 1))).unwrap()).unwrap(), 3);
}

#[test]
fn dfs_forests_have_no_cross_edges() {
    let mut r = gen::rng(4);
    for _ in 0..50 {
        let n = r.gen_range(1..=20);
        let g = gen::random_sparse(n, &mut r);
        let members: Vec<bool> = (0..n).map(|_| r.gen_bool(0.7)).collect();
        let f = dfs_forest(&g, &members);
        f.check_closure(&g.induced(&members)).unwrap();
        for v in 0..n {
            assert_eq!(f.is_member(v), members[v]);
            if members[v] && f.parent[v] != v {
                assert!(g.has_edge(v, f.parent[v]), "tree edges are graph edges");
                assert_eq!(f.depth[v], f.depth[f.parent[v]] + 1);
            }
        }
    }
}

#[test]
fn low_treedepth_colorings_bound_class_unions() {
    let mut r = gen::rng(5);
    for _ in 0..25 {
        let n = r.gen_range(1..=12);
        let g = gen::random_degenerate(n, 2, &mut r);
        for d in 1..=2 {
            let ltd = low_treedepth_coloring(&g, d).unwrap();
            assert!(ltd.coloring.is_proper(&ltd.chain.augmented));
            let k = ltd.coloring.k;
            for a in 1..=k {
                for b in a..=k {
                    let classes: Vec<usize> = if a == b { vec![a] } else { vec![a, b] };
                    if classes.len() > d {
                        continue;
                    }
                    let h = g.induced(&ltd.coloring.class_mask(&classes));
                    let forest = ltd.forest_for_classes(&classes).unwrap();
                    assert!(forest.height() < 1 << classes.len());
                    assert!(brute_treedepth_small(&h) <= classes.len());
                }
            }
        }
    }
}

/// Tree-depth of a graph with at most a few non-isolated vertices.
fn brute_treedepth_small(h: &Graph) -> usize {
    let active: Vec<usize> = (0..h.n()).filter(|&v| h.degree(v) > 0).collect();
    if active.is_empty() {
        return usize::from(h.n() > 0);
    }
    let edges = h.edges().map(|(u, v)| {
        (active.iter().position(|&w| w == u).unwrap(), active.iter().position(|&w| w == v).unwrap())
    });
    let compact = Graph::from_edges(active.len(), edges).unwrap();
    if compact.n() <= 7 {
        brute_treedepth(&compact)
    } else {
        exact_treedepth(&compact).unwrap()
    }
}
