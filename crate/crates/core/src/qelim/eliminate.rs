//! Elimination of one existential quantifier for one template, together
//! with the expander computing the fresh relations.
//!
//! Atoms are split by the template into *local* atoms, which mention a
//! term in the part of the template owned by `x0` and can be evaluated from
//! `x0`'s value alone, and the remaining atoms, which do not depend on `x0`
//! once path terms are read off another variable. For every truth vector
//! `β` of the local atoms the expander marks the anchors (roots of the
//! subtrees that hold `x0`) with a witness realizing `β`, and counting
//! relations tell whether such an anchor exists besides those occupied by
//! the other variables. The result is the disjunction over `β` of the
//! formula with the local atoms replaced by `β`, conjoined with the
//! counting conditions. Vectors without witnesses give empty relations and
//! drop out.

use std::collections::{BTreeMap, BTreeSet};

use crate::logic::{Compiled, Formula, LogicError, Structure, Term};
use crate::treedepth::RootedForest;

use super::normal::{fold_atoms, simplify};
use super::template::{canonical_template, Template};
use super::xi::build_xi_reduced;
use super::{eval_term, Names};

/// A fresh relation: name, arity and tuples.
pub type NewRelation = (String, usize, BTreeSet<Vec<usize>>);

/// Output of [`eliminate_template`].
#[derive(Clone, Debug)]
pub enum TemplateElimination {
    /// The quantifier was eliminated syntactically.
    Done(Formula),
    /// The result depends on fresh relations computed by the expander.
    Expand(Expander),
}

/// Everything needed to finish one elimination on a concrete structure.
#[derive(Clone, Debug)]
pub struct Expander {
    pub x0: String,
    /// The formula after atoms decided by the template were folded, with the atoms
    /// not in `local` rewritten to avoid `x0`.
    pub body: Formula,
    /// Local atoms as they occur in `body`.
    pub local: Vec<Formula>,
    /// The same atoms with every term expressed through `x0`.
    pub local_on_x0: Vec<Formula>,
    /// Tracing condition for the terms without `x0`.
    pub xi_rest: Formula,
    /// Depth of the vertices carrying the anchor relation (1 for roots).
    pub anchor_depth: usize,
    /// Depth of `x0`'s value.
    pub x0_depth: usize,
    /// Template that the terms containing `x0` must trace, and its key.
    pub t0: Template,
    pub t0_key: String,
    /// Terms reaching the anchors occupied by the other variables.
    pub occupied: Vec<Term>,
    /// Term reaching the common parent of the anchors; `None` when the
    /// anchors are roots and the counting relations are nullary.
    pub parent_term: Option<Term>,
}

fn literal_terms(f: &Formula) -> Vec<Term> {
    let mut out = Vec::new();
    f.visit_terms(&mut |t| out.push(t.clone()));
    out
}

/// Eliminates `∃x0` from the quantifier-free `psi` restricted to value
/// tuples tracing `t`, in the language extended by the parent function `p`
/// and fresh relations. Every term of `psi` and every free variable must be
/// placed by the template.
pub fn eliminate_template(psi: &Formula, t: &Template, x0: &str, p: &str) -> TemplateElimination {
    let terms: Vec<Term> = t.alpha.keys().cloned().collect();
    let at = |term: &Term| t.alpha[term];
    let has_x0 = |s: &Term| s.variable() == x0;
    // A function value must lie on the root path of its argument or below.
    for term in &terms {
        if let Term::App(..) = term {
            if !t.comparable(at(term), at(&Term::var(term.variable()))) {
                return TemplateElimination::Done(Formula::False);
            }
        }
    }
    // Under the template, equalities are decided by the placement, and
    // atoms whose terms are not pairwise comparable fail.
    let psi = fold_atoms(psi, &mut |a| match a {
        Formula::Eq(l, r) => Some(at(l) == at(r)),
        Formula::Rel(_, args) => {
            let vs: Vec<usize> = args.iter().map(at).collect();
            let incomparable = vs.iter().enumerate().any(|(i, &a)| vs[i + 1..].iter().any(|&b| !t.comparable(a, b)));
            incomparable.then_some(false)
        }
        _ => None,
    });
    if psi == Formula::False {
        return TemplateElimination::Done(Formula::False);
    }
    let x0_vertex = at(&Term::var(x0));
    // x0 sits above the value of a term without x0: substitute.
    if let Some(s) = terms.iter().find(|s| !has_x0(s) && t.is_ancestor(x0_vertex, at(s))) {
        let k = t.depth[at(s)] - t.depth[x0_vertex];
        let by = Term::iterate(p, k, s.clone());
        let f = Formula::and(vec![build_xi_reduced(t, p), psi]);
        return TemplateElimination::Done(simplify(&f.substitute(x0, &by)));
    }
    let body = psi;
    let others: BTreeSet<Term> = terms.iter().filter(|s| !has_x0(s)).cloned().collect();
    let with_x0: BTreeSet<Term> = terms.iter().filter(|s| has_x0(s)).cloned().collect();
    let t0 = t.restrict(&with_x0);
    let t0_key = t0.key();
    let xi_rest = if others.is_empty() { Formula::True } else { build_xi_reduced(&t.restrict(&others), p) };
    let x0_root = t.root_of(x0_vertex);
    let x0_depth = t.depth[x0_vertex];
    let shares_tree = others.iter().any(|s| t.root_of(at(s)) == x0_root);

    // The part of the template owned by x0: the subtree of `top`.
    let (top, path_end) = if shares_tree {
        // v: nearest proper ancestor of x0's vertex above a term without x0.
        let mut v = t.parent[x0_vertex];
        while !others.iter().any(|s| t.is_ancestor(v, at(s))) {
            v = t.parent[v];
        }
        (t.q_pow(x0_vertex, x0_depth - t.depth[v] - 1), Some(v))
    } else {
        (x0_root, None)
    };
    let owned = |s: &Term| t.is_ancestor(top, at(s));
    let on_path = |s: &Term| path_end.is_some_and(|v| t.is_ancestor(at(s), v));
    let mut local = BTreeSet::new();
    body.visit_atoms(&mut |a| {
        if literal_terms(a).iter().any(owned) {
            local.insert(a.clone());
        }
    });
    let local: Vec<Formula> = local.into_iter().collect();
    let local_on_x0: Vec<Formula> = local
        .iter()
        .map(|a| {
            a.map_terms(&mut |s| {
                if on_path(s) {
                    Term::iterate(p, x0_depth - t.depth[at(s)], Term::var(x0))
                } else {
                    s.clone()
                }
            })
        })
        .collect();

    let (anchor_depth, occupied, parent_term, body) = match path_end {
        Some(v) => {
            let tv = others.iter().find(|s| t.is_ancestor(v, at(s))).expect("v lies above a term").clone();
            let dv = t.depth[v];
            let tv_depth = t.depth[at(&tv)];
            // Outside the local atoms, path terms with x0 are read off t_v.
            let local_set: BTreeSet<&Formula> = local.iter().collect();
            let body = body.map_atoms(&mut |a| {
                if local_set.contains(a) {
                    return a.clone();
                }
                a.map_terms(&mut |s| {
                    if has_x0(s) && on_path(s) {
                        Term::iterate(p, tv_depth - t.depth[at(s)], tv.clone())
                    } else {
                        s.clone()
                    }
                })
            });
            let occupied = t
                .children(v)
                .into_iter()
                .filter(|&c| c != top)
                .map(|c| {
                    let s = terms.iter().find(|s| t.is_ancestor(c, at(s))).expect("every subtree carries a term");
                    Term::iterate(p, t.depth[at(s)] - dv - 1, s.clone())
                })
                .collect();
            (dv + 1, occupied, Some(Term::iterate(p, tv_depth - dv, tv)), body)
        }
        None => {
            let occupied = t
                .roots()
                .into_iter()
                .filter(|&r| r != x0_root)
                .map(|r| {
                    let s = terms.iter().find(|s| t.root_of(at(s)) == r).expect("every tree carries a term");
                    Term::iterate(p, t.depth[at(s)] - 1, s.clone())
                })
                .collect();
            (1, occupied, None, body)
        }
    };
    TemplateElimination::Expand(Expander {
        x0: x0.to_string(),
        body,
        local,
        local_on_x0,
        xi_rest,
        anchor_depth,
        x0_depth,
        t0,
        t0_key,
        occupied,
        parent_term,
    })
}

impl Expander {
    /// Computes the anchor and counting relations for every realized truth
    /// vector of the local atoms on a structure whose interpretation of the
    /// parent symbol is `forest`'s parent function, and returns the
    /// eliminated formula with the relations it mentions.
    pub fn expand(
        &self,
        s: &Structure,
        forest: &RootedForest,
        names: &mut Names,
    ) -> Result<(Formula, Vec<NewRelation>), LogicError> {
        let atoms: Vec<Compiled> = self
            .local_on_x0
            .iter()
            .map(|a| Compiled::new(s, a, std::slice::from_ref(&self.x0)))
            .collect::<Result<_, _>>()?;
        let x0_terms: Vec<Term> = self.t0.alpha.keys().cloned().collect();
        let mut groups: BTreeMap<Vec<bool>, BTreeSet<usize>> = BTreeMap::new();
        for v0 in 0..s.size() {
            if forest.depth[v0] != self.x0_depth {
                continue;
            }
            let values: BTreeMap<Term, usize> =
                x0_terms.iter().map(|term| (term.clone(), eval_term(s, term, &|_| v0))).collect();
            if values.values().any(|&v| !forest.is_member(v)) || canonical_template(&values, forest).key() != self.t0_key {
                continue;
            }
            let beta: Vec<bool> = atoms.iter().map(|a| a.eval(&[v0])).collect();
            groups.entry(beta).or_default().insert(forest.ancestor_at(v0, self.anchor_depth));
        }
        let mut relations = Vec::new();
        let mut disjuncts = Vec::new();
        for (beta, anchors) in groups {
            let assignment: BTreeMap<&Formula, bool> = self.local.iter().zip(beta.iter().copied()).collect();
            let body = fold_atoms(&self.body, &mut |a| assignment.get(a).copied());
            if body == Formula::False {
                continue;
            }
            let u0 = names.fresh("U");
            relations.push((u0.clone(), 1, anchors.iter().map(|&w| vec![w]).collect()));
            // counts[i]: at least i + 1 marked anchors (below the parent).
            let m = self.occupied.len();
            let mut counts: Vec<Formula> = Vec::with_capacity(m + 1);
            match &self.parent_term {
                None => {
                    for i in 0..=m {
                        counts.push(if anchors.len() > i { Formula::True } else { Formula::False });
                    }
                }
                Some(pt) => {
                    let mut per_parent: BTreeMap<usize, usize> = BTreeMap::new();
                    for &w in &anchors {
                        *per_parent.entry(forest.parent[w]).or_default() += 1;
                    }
                    for i in 0..=m {
                        let tuples: BTreeSet<Vec<usize>> =
                            per_parent.iter().filter(|&(_, &c)| c > i).map(|(&w, _)| vec![w]).collect();
                        if tuples.is_empty() {
                            counts.push(Formula::False);
                        } else {
                            let name = names.fresh("U");
                            counts.push(Formula::rel(&name, vec![pt.clone()]));
                            relations.push((name, 1, tuples));
                        }
                    }
                }
            }
            let mut parts = vec![body];
            for mask in 0u64..(1 << m) {
                let chosen: Vec<Formula> = (0..m)
                    .filter(|i| mask >> i & 1 == 1)
                    .map(|i| Formula::rel(&u0, vec![self.occupied[i].clone()]))
                    .collect();
                let size = chosen.len();
                parts.push(Formula::or(vec![Formula::not(Formula::and(chosen)), counts[size].clone()]));
            }
            disjuncts.push(simplify(&Formula::and(parts)));
        }
        let formula = simplify(&Formula::and(vec![self.xi_rest.clone(), Formula::or(disjuncts)]));
        // Keep only the relations the formula still mentions.
        let used: BTreeSet<String> = formula.relations().into_iter().map(|(r, _)| r).collect();
        relations.retain(|(r, _, _)| used.contains(r));
        Ok((formula, relations))
    }
}
