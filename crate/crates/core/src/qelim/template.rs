//! Templates: small rooted forests with a placement of terms, the patterns
//! that value tuples trace in a rooted forest.

use std::collections::{BTreeMap, BTreeSet};

use crate::logic::Term;
use crate::treedepth::RootedForest;

/// A rooted forest on `0..len` (roots are their own parents, depths start
/// at 1) with a map `alpha` from terms to vertices. Every leaf carries at
/// least one term.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Template {
    pub parent: Vec<usize>,
    pub depth: Vec<usize>,
    pub alpha: BTreeMap<Term, usize>,
}

impl Template {
    /// Builds a template from parents and placements, checking the forest
    /// shape and the leaf condition.
    pub fn new(parent: Vec<usize>, alpha: BTreeMap<Term, usize>) -> Option<Template> {
        let m = parent.len();
        let mut depth = vec![0usize; m];
        for v in 0..m {
            let mut d = 1;
            let mut u = v;
            while parent[u] != u {
                u = *parent.get(u)?;
                if u >= m || d > m {
                    return None;
                }
                d += 1;
            }
            depth[v] = d;
        }
        let t = Template { parent, depth, alpha };
        if t.alpha.values().any(|&v| v >= m) {
            return None;
        }
        let placed: BTreeSet<usize> = t.alpha.values().copied().collect();
        let leaves_ok = (0..m).all(|v| !t.children(v).is_empty() || placed.contains(&v));
        leaves_ok.then_some(t)
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    /// Depth of the deepest vertex.
    pub fn height(&self) -> usize {
        self.depth.iter().copied().max().unwrap_or(0)
    }

    pub fn roots(&self) -> Vec<usize> {
        (0..self.len()).filter(|&v| self.parent[v] == v).collect()
    }

    pub fn children(&self, v: usize) -> Vec<usize> {
        (0..self.len()).filter(|&c| c != v && self.parent[c] == v).collect()
    }

    /// The template parent function iterated `k` times (roots are fixed).
    pub fn q_pow(&self, mut v: usize, k: usize) -> usize {
        for _ in 0..k {
            v = self.parent[v];
        }
        v
    }

    pub fn root_of(&self, v: usize) -> usize {
        self.q_pow(v, self.depth[v] - 1)
    }

    /// True when `a` is an ancestor of `b` or equal to it.
    pub fn is_ancestor(&self, a: usize, b: usize) -> bool {
        self.depth[a] <= self.depth[b] && self.q_pow(b, self.depth[b] - self.depth[a]) == a
    }

    pub fn comparable(&self, a: usize, b: usize) -> bool {
        self.is_ancestor(a, b) || self.is_ancestor(b, a)
    }

    /// Vertex of a term.
    pub fn at(&self, t: &Term) -> usize {
        self.alpha[t]
    }

    /// The minimal subforest containing the vertices of `terms` (and the
    /// roots above them), with the placement restricted to `terms`.
    pub fn restrict(&self, terms: &BTreeSet<Term>) -> Template {
        let mut keep = vec![false; self.len()];
        for t in terms {
            let mut v = self.alpha[t];
            loop {
                keep[v] = true;
                if self.parent[v] == v {
                    break;
                }
                v = self.parent[v];
            }
        }
        let ids: Vec<usize> = (0..self.len()).filter(|&v| keep[v]).collect();
        let new_id: BTreeMap<usize, usize> = ids.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let parent = ids.iter().map(|&v| new_id[&self.parent[v]]).collect();
        let depth = ids.iter().map(|&v| self.depth[v]).collect();
        let alpha = terms.iter().map(|t| (t.clone(), new_id[&self.alpha[t]])).collect();
        Template { parent, depth, alpha }
    }

    /// Canonical string of the isomorphism class: trees are encoded
    /// bottom-up with the sorted term labels of each vertex and the sorted
    /// encodings of its children.
    pub fn key(&self) -> String {
        let mut labels: Vec<Vec<String>> = vec![Vec::new(); self.len()];
        for (t, &v) in &self.alpha {
            labels[v].push(t.to_string());
        }
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); self.len()];
        for v in 0..self.len() {
            if self.parent[v] != v {
                children[self.parent[v]].push(v);
            }
        }
        fn enc(v: usize, labels: &[Vec<String>], children: &[Vec<usize>]) -> String {
            let mut parts: Vec<String> = children[v].iter().map(|&c| enc(c, labels, children)).collect();
            parts.sort();
            let mut ls = labels[v].clone();
            ls.sort();
            format!("({}{})", ls.join(","), parts.concat())
        }
        let mut roots: Vec<String> = self.roots().into_iter().map(|r| enc(r, &labels, &children)).collect();
        roots.sort();
        roots.concat()
    }
}

/// The template traced by term values in a forest: the minimal subforest
/// containing every value and the roots of their trees, each term placed
/// at its value.
pub fn canonical_template(values: &BTreeMap<Term, usize>, forest: &RootedForest) -> Template {
    let mut vertices: BTreeSet<(usize, usize)> = BTreeSet::new();
    for &v in values.values() {
        let mut u = v;
        loop {
            if !vertices.insert((forest.depth[u], u)) {
                break;
            }
            if forest.parent[u] == u {
                break;
            }
            u = forest.parent[u];
        }
    }
    let ids: Vec<usize> = vertices.iter().map(|&(_, v)| v).collect();
    let new_id: BTreeMap<usize, usize> = ids.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let parent = ids.iter().map(|&v| new_id[&forest.parent[v]]).collect();
    let depth = ids.iter().map(|&v| forest.depth[v]).collect();
    let alpha = values.iter().map(|(t, v)| (t.clone(), new_id[v])).collect();
    Template { parent, depth, alpha }
}

/// All `terms`-templates of height at most `d`, pairwise non-isomorphic,
/// or `None` once more than `cap` have been found.
pub fn enumerate_templates(terms: &[Term], d: usize, cap: usize) -> Option<Vec<Template>> {
    // Grow templates term by term: each new term lands on an existing
    // vertex, or at the end of a fresh chain hanging below an existing
    // vertex or forming a new tree.
    let mut current: Vec<(Vec<usize>, BTreeMap<Term, usize>)> = vec![(Vec::new(), BTreeMap::new())];
    for t in terms {
        let mut next: BTreeMap<String, (Vec<usize>, BTreeMap<Term, usize>)> = BTreeMap::new();
        for (parent, alpha) in &current {
            let depth_of = |v: usize| {
                let mut d = 1;
                let mut u = v;
                while parent[u] != u {
                    u = parent[u];
                    d += 1;
                }
                d
            };
            let push = |parent: Vec<usize>, at: usize, next: &mut BTreeMap<String, _>| {
                let mut alpha = alpha.clone();
                alpha.insert(t.clone(), at);
                let depth = (0..parent.len())
                    .map(|v| {
                        let mut d = 1;
                        let mut u = v;
                        while parent[u] != u {
                            u = parent[u];
                            d += 1;
                        }
                        d
                    })
                    .collect();
                let tpl = Template { parent: parent.clone(), depth, alpha: alpha.clone() };
                next.entry(tpl.key()).or_insert((parent, alpha));
            };
            for v in 0..parent.len() {
                push(parent.clone(), v, &mut next);
            }
            let anchors: Vec<Option<usize>> = std::iter::once(None).chain((0..parent.len()).map(Some)).collect();
            for anchor in anchors {
                let base = anchor.map_or(0, depth_of);
                for len in 1..=d.saturating_sub(base) {
                    let mut p = parent.clone();
                    let mut above = anchor;
                    for _ in 0..len {
                        let id = p.len();
                        p.push(above.unwrap_or(id));
                        above = Some(id);
                    }
                    let at = p.len() - 1;
                    push(p, at, &mut next);
                }
            }
            if next.len() > cap {
                return None;
            }
        }
        current = next.into_values().collect();
    }
    Some(
        current
            .into_iter()
            .map(|(parent, alpha)| Template::new(parent, alpha).expect("grown templates are well formed"))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(name: &str) -> Term {
        Term::var(name)
    }

    #[test]
    fn counts_of_small_templates() {
        assert_eq!(enumerate_templates(&[x("x")], 1, 100).unwrap().len(), 1);
        assert_eq!(enumerate_templates(&[x("x")], 2, 100).unwrap().len(), 2);
        // Two terms, depth 1: same root, or two roots.
        assert_eq!(enumerate_templates(&[x("x"), x("y")], 1, 100).unwrap().len(), 2);
        for t in enumerate_templates(&[x("x"), x("y"), Term::app("f", x("x"))], 3, 10_000).unwrap() {
            assert!(t.height() <= 3);
            assert!(Template::new(t.parent.clone(), t.alpha.clone()).is_some());
        }
    }

    #[test]
    fn canonical_template_is_minimal() {
        // forest 0 - 1 - 2, 1 - 3 ; 4 alone
        let f = RootedForest::from_parents(vec![0, 0, 1, 1, 4], vec![true; 5]);
        let values: BTreeMap<Term, usize> = [(x("x"), 2), (x("y"), 3)].into_iter().collect();
        let t = canonical_template(&values, &f);
        assert_eq!(t.len(), 4);
        assert_eq!(t.roots().len(), 1);
        let values: BTreeMap<Term, usize> = [(x("x"), 2), (x("y"), 4)].into_iter().collect();
        let t = canonical_template(&values, &f);
        assert_eq!(t.len(), 4);
        assert_eq!(t.roots().len(), 2);
        let values: BTreeMap<Term, usize> = [(x("x"), 1), (x("y"), 1)].into_iter().collect();
        assert_eq!(canonical_template(&values, &f).key(), "((x,y))");
    }
}
