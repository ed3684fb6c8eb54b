//! Normal forms used by the elimination engine.

use std::collections::HashSet;

use crate::logic::{Formula, Term};

/// Constant folding and flattening of connectives, bottom-up.
pub fn simplify(f: &Formula) -> Formula {
    fold_atoms(f, &mut |_| None)
}

/// [`simplify`] after replacing every atom `a` for which `decide(a)` is
/// `Some(b)` by the constant `b`. A conjunction (disjunction) stops at its
/// first false (true) part, so decided branches are never copied.
pub fn fold_atoms(f: &Formula, decide: &mut dyn FnMut(&Formula) -> Option<bool>) -> Formula {
    match f {
        Formula::Not(g) => Formula::not_simplified(fold_atoms(g, decide)),
        Formula::And(gs) | Formula::Or(gs) => {
            let conj = matches!(f, Formula::And(_));
            let mut parts: Vec<Formula> = Vec::new();
            for g in gs {
                match fold_atoms(g, decide) {
                    Formula::True if conj => {}
                    Formula::False if !conj => {}
                    Formula::True => return Formula::True,
                    Formula::False => return Formula::False,
                    Formula::And(inner) if conj => parts.extend(inner),
                    Formula::Or(inner) if !conj => parts.extend(inner),
                    other => parts.push(other),
                }
            }
            let parts = dedup(parts);
            if conj {
                Formula::and(parts)
            } else {
                Formula::or(parts)
            }
        }
        Formula::Exists(x, g) => Formula::exists(x, fold_atoms(g, decide)),
        Formula::Forall(x, g) => Formula::forall(x, fold_atoms(g, decide)),
        Formula::True | Formula::False => f.clone(),
        atom => match decide(atom) {
            Some(true) => Formula::True,
            Some(false) => Formula::False,
            None => match atom {
                Formula::Eq(a, b) if a == b => Formula::True,
                _ => atom.clone(),
            },
        },
    }
}

fn dedup(parts: Vec<Formula>) -> Vec<Formula> {
    let mut seen = HashSet::new();
    let fresh: Vec<bool> = parts.iter().map(|p| seen.insert(p)).collect();
    drop(seen);
    parts.into_iter().zip(fresh).filter_map(|(p, keep)| keep.then_some(p)).collect()
}

/// Replaces `∀x φ` by `¬∃x ¬φ`.
pub fn eliminate_forall(f: &Formula) -> Formula {
    match f {
        Formula::Forall(x, g) => Formula::not(Formula::exists(x, Formula::not(eliminate_forall(g)))),
        Formula::Exists(x, g) => Formula::exists(x, eliminate_forall(g)),
        Formula::Not(g) => Formula::not(eliminate_forall(g)),
        Formula::And(gs) => Formula::And(gs.iter().map(eliminate_forall).collect()),
        Formula::Or(gs) => Formula::Or(gs.iter().map(eliminate_forall).collect()),
        atom => atom.clone(),
    }
}

/// Renames every bound variable to `{prefix}{i}` with a fresh `i`, so that
/// no two quantifiers bind the same name and no bound name is free
/// elsewhere.
pub fn rename_apart(f: &Formula, prefix: &str, counter: &mut usize) -> Formula {
    fn go(f: &Formula, prefix: &str, counter: &mut usize, scope: &mut Vec<(String, String)>) -> Formula {
        let rename = |t: &Term, scope: &[(String, String)]| -> Term {
            let x = t.variable();
            match scope.iter().rev().find(|(old, _)| old == x) {
                Some((_, new)) => t.substitute(x, &Term::var(new)),
                None => t.clone(),
            }
        };
        match f {
            Formula::Exists(x, g) | Formula::Forall(x, g) => {
                *counter += 1;
                let new = format!("{prefix}{counter}");
                scope.push((x.clone(), new.clone()));
                let body = go(g, prefix, counter, scope);
                scope.pop();
                if matches!(f, Formula::Exists(..)) {
                    Formula::exists(&new, body)
                } else {
                    Formula::forall(&new, body)
                }
            }
            Formula::Not(g) => Formula::not(go(g, prefix, counter, scope)),
            Formula::And(gs) => Formula::And(gs.iter().map(|g| go(g, prefix, counter, scope)).collect()),
            Formula::Or(gs) => Formula::Or(gs.iter().map(|g| go(g, prefix, counter, scope)).collect()),
            atom => atom.map_terms(&mut |t| rename(t, scope)),
        }
    }
    go(f, prefix, counter, &mut Vec::new())
}

/// Pushes existential quantifiers inward: through disjunctions, and past
/// conjuncts not mentioning the bound variable; drops vacuous quantifiers.
/// Valid over non-empty universes. Expects a formula without `∀`.
pub fn miniscope(f: &Formula) -> Formula {
    match f {
        Formula::Exists(x, g) => {
            let body = simplify(&miniscope(g));
            push_exists(x, body)
        }
        Formula::Not(g) => Formula::not(miniscope(g)),
        Formula::And(gs) => Formula::And(gs.iter().map(miniscope).collect()),
        Formula::Or(gs) => Formula::Or(gs.iter().map(miniscope).collect()),
        other => other.clone(),
    }
}

fn push_exists(x: &str, body: Formula) -> Formula {
    if !body.free_vars().contains(x) {
        return body;
    }
    match body {
        Formula::Or(parts) => Formula::Or(parts.into_iter().map(|p| push_exists(x, p)).collect()),
        Formula::And(parts) => {
            let (inside, outside): (Vec<Formula>, Vec<Formula>) = parts.into_iter().partition(|p| p.free_vars().contains(x));
            if outside.is_empty() {
                return Formula::exists(x, Formula::and(inside));
            }
            let mut all = outside;
            all.push(push_exists(x, Formula::and(inside)));
            Formula::And(all)
        }
        other => Formula::exists(x, other),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Formula {
        Formula::parse(s).unwrap()
    }

    #[test]
    fn miniscoping_splits_scopes() {
        let f = miniscope(&p("E y. P(x) & R(x, y)"));
        assert_eq!(f.to_string(), "P(x) & (E y. R(x,y))");
        let f = miniscope(&p("E y. P(x)"));
        assert_eq!(f.to_string(), "P(x)");
    }

    #[test]
    fn renaming_keeps_meaning() {
        let mut c = 0;
        let f = rename_apart(&p("E x. (P(x) & A x. Q(x)) | E x. R(x)"), "v", &mut c);
        assert_eq!(f.to_string(), "E v1. P(v1) & (A v2. Q(v2)) | (E v3. R(v3))");
    }
}
