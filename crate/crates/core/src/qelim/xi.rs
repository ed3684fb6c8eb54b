//! Quantifier-free formulas testing whether value tuples trace a template.

use crate::logic::{Formula, Term};

use super::template::Template;

/// `p^k(t) = p^k'(t')` or its negation, as decided by the template.
fn relation(t: &Template, p: &str, a: &Term, k: usize, b: &Term, k2: usize) -> Formula {
    let lhs = Term::iterate(p, k, a.clone());
    let rhs = Term::iterate(p, k2, b.clone());
    let eq = Formula::eq(lhs, rhs);
    if t.q_pow(t.at(a), k) == t.q_pow(t.at(b), k2) {
        eq
    } else {
        Formula::not(eq)
    }
}

/// The conjunction over all pairs of terms `t, t'` and all `0 ≤ k, k' ≤
/// h + 1` (`h` the template height) of `p^k(t) = p^k'(t')` when the
/// template's parent function agrees there, and of the disequality
/// otherwise. With `p` read as a forest parent function, it holds exactly
/// when the term values trace the template.
pub fn build_xi(t: &Template, p: &str) -> Formula {
    let terms: Vec<&Term> = t.alpha.keys().collect();
    let bound = t.height() + 1;
    let mut parts = Vec::new();
    for (i, a) in terms.iter().enumerate() {
        for b in &terms[i..] {
            for k in 0..=bound {
                for k2 in 0..=bound {
                    if a == b && k2 <= k {
                        continue;
                    }
                    parts.push(relation(t, p, a, k, b, k2));
                }
            }
        }
    }
    Formula::and(parts)
}

/// A formula of linear size equivalent to [`build_xi`] whenever `p` is a
/// forest parent function. Every template vertex `u` gets a representative
/// value `val(u) = p^j(r)` read off a term `r` placed below it; the formula
/// states that roots are fixed by `p`, that `p` maps `val(u)` to the value
/// of `u`'s parent and moves it, that siblings (and roots) have distinct
/// values, and that every term equals the value of its vertex. Induction on
/// depth shows that `val` is then an embedding preserving depths, so the
/// term values trace the template.
pub fn build_xi_reduced(t: &Template, p: &str) -> Formula {
    let m = t.len();
    // Representative term placed in the subtree of each vertex.
    let mut rep: Vec<Option<&Term>> = vec![None; m];
    for (term, &v) in &t.alpha {
        let mut u = v;
        loop {
            if rep[u].is_none() {
                rep[u] = Some(term);
            }
            if t.parent[u] == u {
                break;
            }
            u = t.parent[u];
        }
    }
    let val = |u: usize| -> Term {
        let r = rep[u].expect("every vertex lies above a term");
        Term::iterate(p, t.depth[t.at(r)] - t.depth[u], r.clone())
    };
    let mut parts = Vec::new();
    for u in 0..m {
        let vu = val(u);
        if t.parent[u] == u {
            parts.push(Formula::eq(Term::app(p, vu.clone()), vu));
        } else {
            let vp = val(t.parent[u]);
            let up = Term::app(p, vu.clone());
            if up != vp {
                parts.push(Formula::eq(up, vp.clone()));
            }
            parts.push(Formula::not(Formula::eq(vu, vp)));
        }
    }
    let roots = t.roots();
    let mut groups: Vec<Vec<usize>> = (0..m).map(|u| t.children(u)).collect();
    groups.push(roots);
    for g in groups {
        for (i, &a) in g.iter().enumerate() {
            for &b in &g[i + 1..] {
                parts.push(Formula::not(Formula::eq(val(a), val(b))));
            }
        }
    }
    for (term, &v) in &t.alpha {
        let vv = val(v);
        if *term != vv {
            parts.push(Formula::eq(term.clone(), vv));
        }
    }
    Formula::and(parts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    #[test]
    fn equal_placements_give_equalities() {
        let alpha: BTreeMap<Term, usize> = [(Term::var("x"), 0), (Term::var("y"), 0)].into_iter().collect();
        let t = Template::new(vec![0], alpha).unwrap();
        let xi = build_xi(&t, "p");
        let text = xi.to_string();
        assert!(text.contains("x = y"), "{text}");
        assert!(text.contains("p(x) = x") || text.contains("x = p(x)"), "{text}");
    }
}
