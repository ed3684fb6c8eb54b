//! Reference implementations used by the integration tests. They are written
//! for obviousness, not speed, and share no code with the library beyond the
//! data types.
#![allow(dead_code)]

use std::collections::HashMap;

use sparsefo::logic::{Formula, Structure, Term};

/// Value of a term under an environment.
pub fn term_value(s: &Structure, t: &Term, env: &HashMap<String, usize>) -> usize {
    match t {
        Term::Var(x) => *env.get(x).unwrap_or_else(|| panic!("unbound variable {x}")),
        Term::App(f, inner) => {
            let v = term_value(s, inner, env);
            s.function(f).unwrap_or_else(|| panic!("unknown function {f}"))[v]
        }
    }
}

/// Textbook recursive satisfaction: quantifiers loop over the universe.
pub fn naive_holds(s: &Structure, f: &Formula, env: &mut HashMap<String, usize>) -> bool {
    match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Rel(r, args) => {
            let tuple: Vec<usize> = args.iter().map(|t| term_value(s, t, env)).collect();
            s.relation(r).unwrap_or_else(|| panic!("unknown relation {r}")).tuples.contains(&tuple)
        }
        Formula::Eq(a, b) => term_value(s, a, env) == term_value(s, b, env),
        Formula::Not(g) => !naive_holds(s, g, env),
        Formula::And(gs) => gs.iter().all(|g| naive_holds(s, g, env)),
        Formula::Or(gs) => gs.iter().any(|g| naive_holds(s, g, env)),
        Formula::Exists(x, g) | Formula::Forall(x, g) => {
            let want_exists = matches!(f, Formula::Exists(..));
            let saved = env.get(x).copied();
            let mut result = !want_exists;
            for v in 0..s.size() {
                env.insert(x.clone(), v);
                if naive_holds(s, g, env) == want_exists {
                    result = want_exists;
                    break;
                }
            }
            match saved {
                Some(v) => env.insert(x.clone(), v),
                None => env.remove(x),
            };
            result
        }
    }
}

pub fn naive_sentence(s: &Structure, f: &Formula) -> bool {
    naive_holds(s, f, &mut HashMap::new())
}

/// Checks a witness of a prenex existential sentence `∃x̄. ψ`.
pub fn witness_satisfies(s: &Structure, f: &Formula, witness: &[(String, usize)]) -> bool {
    let mut body = f;
    while let Formula::Exists(_, inner) = body {
        body = inner;
    }
    let mut env: HashMap<String, usize> = witness.iter().cloned().collect();
    naive_holds(s, body, &mut env)
}
