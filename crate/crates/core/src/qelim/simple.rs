//! Making terms simple by composing function symbols.

use std::collections::BTreeMap;

use crate::graph::{degeneracy_order, orient_by_order, DiGraph, Graph};
use crate::augment::oriented_augment;
use crate::logic::{Formula, Structure, Term};

use super::{Names, QelimError};

/// Result of [`to_simple`].
#[derive(Clone, Debug)]
pub struct Simplified {
    pub formula: Formula,
    pub structure: Structure,
    pub guard: Graph,
    /// Fresh function symbols with the pair `(outer, inner)` they compose.
    pub composed: Vec<(String, String, String)>,
    /// Composition rounds performed.
    pub rounds: usize,
}

/// Replaces nested terms `g(f(t))` by `h(t)` with a fresh `h = g∘f`, one
/// nesting level per round, until every term is a variable or a function
/// applied to a variable. Each round extends the guard by one augmentation
/// of its degeneracy orientation enlarged with the arcs `f(v) → v` of the
/// composed functions, so the expanded structure stays guarded.
pub fn to_simple(formula: &Formula, structure: &Structure, guard: &Graph, names: &mut Names) -> Result<Simplified, QelimError> {
    let mut formula = formula.clone();
    let mut structure = structure.clone();
    let mut guard = guard.clone();
    let mut composed = Vec::new();
    let mut rounds = 0;
    while !formula.is_simple() {
        rounds += 1;
        // Innermost compositions g(f(x)) of this round.
        let mut pairs: BTreeMap<(String, String), String> = BTreeMap::new();
        formula.visit_terms(&mut |t| {
            if let Some((g, f)) = innermost_pair(t) {
                pairs.entry((g, f)).or_default();
            }
        });
        let mut involved: Vec<String> = Vec::new();
        for ((g, f), h) in pairs.iter_mut() {
            *h = names.fresh("h");
            let gm = structure.function(g).ok_or_else(|| QelimError::UnknownFunction(g.clone()))?.to_vec();
            let fm = structure.function(f).ok_or_else(|| QelimError::UnknownFunction(f.clone()))?.to_vec();
            structure.add_function(h)?;
            structure.set_function(h, fm.iter().map(|&v| gm[v]).collect())?;
            composed.push((h.clone(), g.clone(), f.clone()));
            involved.push(g.clone());
            involved.push(f.clone());
        }
        involved.sort();
        involved.dedup();
        let ord = degeneracy_order(&guard);
        let base = orient_by_order(&guard, &ord);
        let mut arcs: Vec<(usize, usize)> = base.arcs().collect();
        for f in &involved {
            let map = structure.function(f).expect("checked above");
            arcs.extend(map.iter().enumerate().filter(|&(v, &w)| v != w).map(|(v, &w)| (w, v)));
        }
        let d = DiGraph::from_arcs(guard.n(), arcs)?;
        guard = oriented_augment(&d).underlying();
        formula = formula.map_terms(&mut |t| rewrite(t, &pairs));
    }
    Ok(Simplified { formula, structure, guard, composed, rounds })
}

/// `(g, f)` for a term `… g(f(x))` with nesting at least two.
fn innermost_pair(t: &Term) -> Option<(String, String)> {
    match t {
        Term::App(g, inner) => match &**inner {
            Term::App(f, x) if matches!(**x, Term::Var(_)) => Some((g.clone(), f.clone())),
            Term::App(..) => innermost_pair(inner),
            Term::Var(_) => None,
        },
        Term::Var(_) => None,
    }
}

fn rewrite(t: &Term, pairs: &BTreeMap<(String, String), String>) -> Term {
    match t {
        Term::App(g, inner) => match &**inner {
            Term::App(f, x) if matches!(**x, Term::Var(_)) => {
                Term::app(&pairs[&(g.clone(), f.clone())], (**x).clone())
            }
            Term::App(..) => Term::app(g, rewrite(inner, pairs)),
            Term::Var(_) => t.clone(),
        },
        Term::Var(_) => t.clone(),
    }
}
