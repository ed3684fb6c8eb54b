//! Seeded random generators for graphs, guarded structures and formulas,
//! shared by the command-line self-test, the benchmarks and the test suites.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::Graph;
use crate::logic::{Formula, Structure, Term};

/// The generator used everywhere: reproducible from a `u64` seed.
pub type GenRng = ChaCha8Rng;

pub fn rng(seed: u64) -> GenRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform random recursive tree: vertex `v > 0` attaches to a random
/// earlier vertex.
pub fn random_tree(n: usize, rng: &mut GenRng) -> Graph {
    let edges: Vec<(usize, usize)> = (1..n).map(|v| (rng.gen_range(0..v), v)).collect();
    Graph::from_edges(n, edges).expect("valid tree")
}

/// Every vertex links to at most `c` random earlier vertices, so the result
/// is `c`-degenerate.
pub fn random_degenerate(n: usize, c: usize, rng: &mut GenRng) -> Graph {
    let mut edges = Vec::new();
    for v in 1..n {
        let k = rng.gen_range(0..=c.min(v));
        let mut earlier: Vec<usize> = (0..v).collect();
        earlier.shuffle(rng);
        edges.extend(earlier.into_iter().take(k).map(|u| (u, v)));
    }
    Graph::from_edges(n, edges).expect("valid graph")
}

/// Random graph of maximum degree at most `max_degree`: random pairs are
/// kept while both endpoints have spare degree.
pub fn random_bounded_degree(n: usize, max_degree: usize, attempts: usize, rng: &mut GenRng) -> Graph {
    let mut deg = vec![0usize; n];
    let mut edges = std::collections::BTreeSet::new();
    if n >= 2 {
        for _ in 0..attempts {
            let u = rng.gen_range(0..n);
            let v = rng.gen_range(0..n);
            if u != v && deg[u] < max_degree && deg[v] < max_degree && edges.insert((u.min(v), u.max(v))) {
                deg[u] += 1;
                deg[v] += 1;
            }
        }
    }
    Graph::from_edges(n, edges).expect("valid graph")
}

/// Random subgraph of the `rows × cols` grid keeping each edge with
/// probability `p`.
pub fn random_grid_subgraph(rows: usize, cols: usize, p: f64, rng: &mut GenRng) -> Graph {
    let grid = Graph::grid(rows, cols);
    let edges: Vec<(usize, usize)> = grid.edges().filter(|_| rng.gen_bool(p)).collect();
    Graph::from_edges(grid.n(), edges).expect("valid graph")
}

/// A random graph from a mix of sparse families, on exactly `n` vertices.
pub fn random_sparse(n: usize, rng: &mut GenRng) -> Graph {
    match rng.gen_range(0..4) {
        0 => random_tree(n, rng),
        1 => random_degenerate(n, 2, rng),
        2 => random_bounded_degree(n, 3, 2 * n, rng),
        _ => {
            let cols = (1..=n).find(|c| c * c >= n).unwrap_or(1);
            let rows = n.div_ceil(cols.max(1));
            let g = random_grid_subgraph(rows, cols, 0.8, rng);
            let edges: Vec<(usize, usize)> = g.edges().filter(|&(u, v)| u < n && v < n).collect();
            Graph::from_edges(n, edges).expect("valid graph")
        }
    }
}

/// A random tuple of the given arity all of whose elements are pairwise
/// equal or adjacent in `g`.
pub fn random_guarded_tuple(g: &Graph, arity: usize, rng: &mut GenRng) -> Vec<usize> {
    let mut tuple: Vec<usize> = Vec::with_capacity(arity);
    if arity == 0 || g.n() == 0 {
        return tuple;
    }
    tuple.push(rng.gen_range(0..g.n()));
    while tuple.len() < arity {
        let mut candidates: Vec<usize> = tuple.clone();
        candidates.extend(g.neighbors(tuple[0]).iter().copied().filter(|&w| tuple.iter().all(|&t| t == w || g.has_edge(t, w))));
        let pick = *candidates.choose(rng).expect("non-empty");
        tuple.push(pick);
    }
    tuple.shuffle(rng);
    tuple
}

/// A random structure guarded by `g`: about `density · n` random guarded
/// tuples per relation (nullary relations hold with probability one half),
/// and functions mapping each vertex to itself or a random neighbor.
pub fn random_structure(
    g: &Graph,
    relations: &[(&str, usize)],
    functions: &[&str],
    density: f64,
    rng: &mut GenRng,
) -> Structure {
    let mut s = Structure::new(g.n());
    for &(name, arity) in relations {
        s.add_relation(name, arity).expect("fresh relation");
        if arity == 0 {
            if rng.gen_bool(0.5) {
                s.insert(name, Vec::new()).expect("nullary fact");
            }
            continue;
        }
        let count = (density * g.n() as f64).round() as usize;
        for _ in 0..count {
            let t = random_guarded_tuple(g, arity, rng);
            s.insert(name, t).expect("guarded tuple");
        }
    }
    for &f in functions {
        s.add_function(f).expect("fresh function");
        let map = (0..g.n())
            .map(|v| {
                let nb = g.neighbors(v);
                if nb.is_empty() || rng.gen_bool(0.3) {
                    v
                } else {
                    *nb.choose(rng).expect("non-empty")
                }
            })
            .collect();
        s.set_function(f, map).expect("valid map");
    }
    s
}

/// Shape of random formulas.
#[derive(Clone, Debug)]
pub struct FormulaShape<'a> {
    pub relations: &'a [(&'a str, usize)],
    pub functions: &'a [&'a str],
    /// Maximum nesting of function symbols in a term.
    pub term_nesting: usize,
    /// Number of atoms in a quantifier-free part, at least one.
    pub atoms: usize,
}

fn random_term(vars: &[String], shape: &FormulaShape, rng: &mut GenRng) -> Term {
    let mut t = Term::var(vars.choose(rng).expect("some variable"));
    if !shape.functions.is_empty() && shape.term_nesting > 0 {
        let k = rng.gen_range(0..=shape.term_nesting);
        for _ in 0..k {
            t = Term::app(shape.functions.choose(rng).expect("some function"), t);
        }
    }
    t
}

fn random_atom(vars: &[String], shape: &FormulaShape, rng: &mut GenRng) -> Formula {
    let with_eq = vars.len() >= 2 || !shape.functions.is_empty();
    if shape.relations.is_empty() || (with_eq && rng.gen_bool(0.25)) {
        if vars.is_empty() {
            return if rng.gen_bool(0.5) { Formula::True } else { Formula::False };
        }
        return Formula::eq(random_term(vars, shape, rng), random_term(vars, shape, rng));
    }
    let &(name, arity) = shape.relations.choose(rng).expect("some relation");
    if arity > 0 && vars.is_empty() {
        return random_atom(vars, &FormulaShape { relations: &[], ..shape.clone() }, rng);
    }
    Formula::rel(name, (0..arity).map(|_| random_term(vars, shape, rng)).collect())
}

/// A random Boolean combination of `shape.atoms` literals over `vars`.
pub fn random_quantifier_free(vars: &[String], shape: &FormulaShape, rng: &mut GenRng) -> Formula {
    let mut parts: Vec<Formula> = (0..shape.atoms.max(1))
        .map(|_| {
            let a = random_atom(vars, shape, rng);
            if rng.gen_bool(0.35) {
                Formula::not(a)
            } else {
                a
            }
        })
        .collect();
    while parts.len() > 1 {
        let i = rng.gen_range(0..parts.len() - 1);
        let a = parts.remove(i);
        let b = parts.remove(i);
        let joined = if rng.gen_bool(0.5) { Formula::And(vec![a, b]) } else { Formula::Or(vec![a, b]) };
        parts.insert(i, joined);
    }
    parts.pop().expect("one part")
}

/// `∃x1 … ∃xk. ψ` with `ψ` quantifier-free over the listed relations.
pub fn random_existential(k: usize, shape: &FormulaShape, rng: &mut GenRng) -> Formula {
    let vars: Vec<String> = (1..=k).map(|i| format!("x{i}")).collect();
    let mut f = random_quantifier_free(&vars, shape, rng);
    for v in vars.iter().rev() {
        f = Formula::exists(v, f);
    }
    f
}

/// A random sentence of quantifier depth exactly `depth`, with free
/// quantifier alternation and connectives between levels.
pub fn random_sentence(depth: usize, shape: &FormulaShape, rng: &mut GenRng) -> Formula {
    fn go(depth: usize, vars: &mut Vec<String>, shape: &FormulaShape, rng: &mut GenRng) -> Formula {
        if depth == 0 {
            return random_quantifier_free(vars, shape, rng);
        }
        let x = format!("x{}", vars.len() + 1);
        vars.push(x.clone());
        let body = go(depth - 1, vars, shape, rng);
        vars.pop();
        // Mix in a quantifier-free side condition on the outer variables.
        let body = if !vars.is_empty() && rng.gen_bool(0.3) {
            let mut inner_vars = vars.clone();
            inner_vars.push(x.clone());
            let side = random_quantifier_free(&inner_vars, &FormulaShape { atoms: 1, ..shape.clone() }, rng);
            if rng.gen_bool(0.5) {
                Formula::And(vec![side, body])
            } else {
                Formula::Or(vec![side, body])
            }
        } else {
            body
        };
        let q = if rng.gen_bool(0.5) { Formula::exists(&x, body) } else { Formula::forall(&x, body) };
        if rng.gen_bool(0.2) {
            Formula::not(q)
        } else {
            q
        }
    }
    go(depth, &mut Vec::new(), shape, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::is_guarded;

    #[test]
    fn generators_are_reproducible_and_guarded() {
        for seed in 0..20 {
            let g = random_sparse(25, &mut rng(seed));
            assert_eq!(g.n(), 25);
            let again = random_sparse(25, &mut rng(seed));
            assert_eq!(g, again);
            let s = random_structure(&g, &[("E", 2), ("P", 1), ("T", 3), ("Z", 0)], &["f"], 1.0, &mut rng(seed));
            assert!(is_guarded(&s, &g).unwrap());
        }
    }

    #[test]
    fn sentences_have_requested_shape() {
        let shape = FormulaShape { relations: &[("E", 2), ("P", 1)], functions: &["f"], term_nesting: 2, atoms: 3 };
        let mut r = rng(7);
        for depth in 0..4 {
            let f = random_sentence(depth, &shape, &mut r);
            assert!(f.is_sentence(), "{f}");
            assert_eq!(f.quantifier_depth(), depth);
        }
        let e = random_existential(3, &FormulaShape { functions: &[], ..shape }, &mut r);
        assert!(e.is_sentence());
    }
}
