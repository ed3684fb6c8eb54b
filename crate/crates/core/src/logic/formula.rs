//! Terms and first-order formulas over relations and unary functions.

use std::collections::BTreeSet;
use std::fmt;

/// A term: a variable or a unary function applied to a term.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    App(String, Box<Term>),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }

    pub fn app(f: &str, t: Term) -> Term {
        Term::App(f.to_string(), Box::new(t))
    }

    /// `f` applied `k` times to `t`.
    pub fn iterate(f: &str, k: usize, t: Term) -> Term {
        (0..k).fold(t, |acc, _| Term::app(f, acc))
    }

    /// The variable at the bottom of the term.
    pub fn variable(&self) -> &str {
        match self {
            Term::Var(v) => v,
            Term::App(_, t) => t.variable(),
        }
    }

    /// Number of function applications.
    pub fn nesting(&self) -> usize {
        match self {
            Term::Var(_) => 0,
            Term::App(_, t) => 1 + t.nesting(),
        }
    }

    /// A variable or a single function applied to a variable.
    pub fn is_simple(&self) -> bool {
        self.nesting() <= 1
    }

    /// Replaces the variable `x` by `by`.
    pub fn substitute(&self, x: &str, by: &Term) -> Term {
        match self {
            Term::Var(v) if v == x => by.clone(),
            Term::Var(_) => self.clone(),
            Term::App(f, t) => Term::App(f.clone(), Box::new(t.substitute(x, by))),
        }
    }

    fn collect_functions(&self, out: &mut BTreeSet<String>) {
        if let Term::App(f, t) = self {
            out.insert(f.clone());
            t.collect_functions(out);
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::App(g, t) => write!(f, "{g}({t})"),
        }
    }
}

/// A first-order formula. Conjunctions and disjunctions are n-ary; the
/// printer and parser keep explicit grouping, so `parse(print(φ)) == φ`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    Rel(String, Vec<Term>),
    Eq(Term, Term),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Exists(String, Box<Formula>),
    Forall(String, Box<Formula>),
}

impl Formula {
    pub fn rel(name: &str, args: Vec<Term>) -> Formula {
        Formula::Rel(name.to_string(), args)
    }

    pub fn eq(a: Term, b: Term) -> Formula {
        Formula::Eq(a, b)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn exists(x: &str, f: Formula) -> Formula {
        Formula::Exists(x.to_string(), Box::new(f))
    }

    pub fn forall(x: &str, f: Formula) -> Formula {
        Formula::Forall(x.to_string(), Box::new(f))
    }

    /// Conjunction; `⊤` when empty, the formula itself when singleton.
    pub fn and(mut parts: Vec<Formula>) -> Formula {
        match parts.len() {
            0 => Formula::True,
            1 => parts.pop().expect("one part"),
            _ => Formula::And(parts),
        }
    }

    /// Disjunction; `⊥` when empty, the formula itself when singleton.
    pub fn or(mut parts: Vec<Formula>) -> Formula {
        match parts.len() {
            0 => Formula::False,
            1 => parts.pop().expect("one part"),
            _ => Formula::Or(parts),
        }
    }

    /// Conjunction with constant folding and flattening.
    pub fn and_simplified(parts: Vec<Formula>) -> Formula {
        let mut flat = Vec::new();
        for p in parts {
            match p {
                Formula::True => {}
                Formula::False => return Formula::False,
                Formula::And(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        Formula::and(flat)
    }

    /// Disjunction with constant folding and flattening.
    pub fn or_simplified(parts: Vec<Formula>) -> Formula {
        let mut flat = Vec::new();
        for p in parts {
            match p {
                Formula::False => {}
                Formula::True => return Formula::True,
                Formula::Or(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        Formula::or(flat)
    }

    /// Negation with constant folding and double-negation removal.
    pub fn not_simplified(f: Formula) -> Formula {
        match f {
            Formula::True => Formula::False,
            Formula::False => Formula::True,
            Formula::Not(inner) => *inner,
            other => Formula::not(other),
        }
    }

    /// Number of syntax-tree nodes (terms count one node per symbol).
    pub fn size(&self) -> usize {
        fn term_size(t: &Term) -> usize {
            1 + t.nesting()
        }
        match self {
            Formula::True | Formula::False => 1,
            Formula::Rel(_, args) => 1 + args.iter().map(term_size).sum::<usize>(),
            Formula::Eq(a, b) => 1 + term_size(a) + term_size(b),
            Formula::Not(f) => 1 + f.size(),
            Formula::And(fs) | Formula::Or(fs) => 1 + fs.iter().map(Formula::size).sum::<usize>(),
            Formula::Exists(_, f) | Formula::Forall(_, f) => 1 + f.size(),
        }
    }

    /// Maximum nesting of quantifiers.
    pub fn quantifier_depth(&self) -> usize {
        match self {
            Formula::Not(f) => f.quantifier_depth(),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().map(Formula::quantifier_depth).max().unwrap_or(0),
            Formula::Exists(_, f) | Formula::Forall(_, f) => 1 + f.quantifier_depth(),
            _ => 0,
        }
    }

    pub fn is_quantifier_free(&self) -> bool {
        self.quantifier_depth() == 0
    }

    /// Free variables, sorted.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        let mut term = |t: &Term, bound: &Vec<String>| {
            let v = t.variable();
            if !bound.iter().any(|b| b == v) {
                out.insert(v.to_string());
            }
        };
        match self {
            Formula::True | Formula::False => {}
            Formula::Rel(_, args) => args.iter().for_each(|t| term(t, bound)),
            Formula::Eq(a, b) => {
                term(a, bound);
                term(b, bound);
            }
            Formula::Not(f) => f.collect_free(bound, out),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.collect_free(bound, out)),
            Formula::Exists(x, f) | Formula::Forall(x, f) => {
                bound.push(x.clone());
                f.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// True when the formula has no free variables.
    pub fn is_sentence(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Relation symbols with the arities they are used at.
    pub fn relations(&self) -> BTreeSet<(String, usize)> {
        let mut out = BTreeSet::new();
        self.visit_atoms(&mut |f| {
            if let Formula::Rel(r, args) = f {
                out.insert((r.clone(), args.len()));
            }
        });
        out
    }

    /// Function symbols occurring in terms.
    pub fn functions(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit_terms(&mut |t| t.collect_functions(&mut out));
        out
    }

    /// Every term occurring as an atom argument (no sub-terms), deduplicated.
    pub fn terms(&self) -> BTreeSet<Term> {
        let mut out = BTreeSet::new();
        self.visit_terms(&mut |t| {
            out.insert(t.clone());
        });
        out
    }

    /// True when every term is simple.
    pub fn is_simple(&self) -> bool {
        let mut ok = true;
        self.visit_terms(&mut |t| ok &= t.is_simple());
        ok
    }

    /// Calls `f` on every atom (relation, equality, constant).
    pub fn visit_atoms(&self, f: &mut impl FnMut(&Formula)) {
        match self {
            Formula::Not(g) | Formula::Exists(_, g) | Formula::Forall(_, g) => g.visit_atoms(f),
            Formula::And(gs) | Formula::Or(gs) => gs.iter().for_each(|g| g.visit_atoms(f)),
            atom => f(atom),
        }
    }

    /// Calls `f` on every top-level atom argument term.
    pub fn visit_terms(&self, f: &mut impl FnMut(&Term)) {
        self.visit_atoms(&mut |a| match a {
            Formula::Rel(_, args) => args.iter().for_each(&mut *f),
            Formula::Eq(x, y) => {
                f(x);
                f(y);
            }
            _ => {}
        });
    }

    /// Rewrites every atom-argument term with `f` (quantifiers untouched).
    pub fn map_terms(&self, f: &mut impl FnMut(&Term) -> Term) -> Formula {
        self.map_atoms(&mut |a| match a {
            Formula::Rel(r, args) => Formula::Rel(r.clone(), args.iter().map(&mut *f).collect()),
            Formula::Eq(x, y) => Formula::Eq(f(x), f(y)),
            other => other.clone(),
        })
    }

    /// Rewrites every atom with `f`, preserving the connective structure.
    pub fn map_atoms(&self, f: &mut impl FnMut(&Formula) -> Formula) -> Formula {
        match self {
            Formula::Not(g) => Formula::Not(Box::new(g.map_atoms(f))),
            Formula::And(gs) => Formula::And(gs.iter().map(|g| g.map_atoms(f)).collect()),
            Formula::Or(gs) => Formula::Or(gs.iter().map(|g| g.map_atoms(f)).collect()),
            Formula::Exists(x, g) => Formula::Exists(x.clone(), Box::new(g.map_atoms(f))),
            Formula::Forall(x, g) => Formula::Forall(x.clone(), Box::new(g.map_atoms(f))),
            atom => f(atom),
        }
    }

    /// Substitutes `by` for the free occurrences of `x`. The caller must
    /// ensure no variable of `by` is captured (variables are kept distinct
    /// from bound names throughout this crate).
    pub fn substitute(&self, x: &str, by: &Term) -> Formula {
        match self {
            Formula::Exists(y, _) | Formula::Forall(y, _) if y == x => self.clone(),
            Formula::Exists(y, g) => Formula::Exists(y.clone(), Box::new(g.substitute(x, by))),
            Formula::Forall(y, g) => Formula::Forall(y.clone(), Box::new(g.substitute(x, by))),
            Formula::Not(g) => Formula::Not(Box::new(g.substitute(x, by))),
            Formula::And(gs) => Formula::And(gs.iter().map(|g| g.substitute(x, by)).collect()),
            Formula::Or(gs) => Formula::Or(gs.iter().map(|g| g.substitute(x, by)).collect()),
            atom => atom.map_terms(&mut |t| t.substitute(x, by)),
        }
    }
}

/// Operator precedence used by the printer.
fn precedence(f: &Formula) -> u8 {
    match f {
        Formula::Exists(..) | Formula::Forall(..) => 0,
        Formula::Or(_) => 1,
        Formula::And(_) => 2,
        Formula::Not(inner) if !matches!(**inner, Formula::Eq(..)) => 3,
        _ => 4,
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, g: &Formula, min: u8) -> fmt::Result {
    if precedence(g) >= min {
        write!(f, "{g}")
    } else {
        write!(f, "({g})")
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => write!(f, "T"),
            Formula::False => write!(f, "F"),
            Formula::Rel(r, args) => {
                write!(f, "{r}(")?;
                for (i, t) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{t}")?;
                }
                write!(f, ")")
            }
            Formula::Eq(a, b) => write!(f, "{a} = {b}"),
            Formula::Not(g) => match &**g {
                Formula::Eq(a, b) => write!(f, "{a} != {b}"),
                inner => {
                    write!(f, "!")?;
                    write_operand(f, inner, 3)
                }
            },
            Formula::And(gs) | Formula::Or(gs) => {
                let (sep, min) = if matches!(self, Formula::And(_)) { (" & ", 3) } else { (" | ", 2) };
                for (i, g) in gs.iter().enumerate() {
                    if i > 0 {
                        write!(f, "{sep}")?;
                    }
                    write_operand(f, g, min)?;
                }
                Ok(())
            }
            Formula::Exists(x, g) => write!(f, "E {x}. {g}"),
            Formula::Forall(x, g) => write!(f, "A {x}. {g}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_variables_and_depth() {
        let phi = Formula::exists(
            "x",
            Formula::and(vec![
                Formula::rel("E", vec![Term::var("x"), Term::var("y")]),
                Formula::forall("z", Formula::eq(Term::var("z"), Term::app("f", Term::var("x")))),
            ]),
        );
        assert_eq!(phi.free_vars().into_iter().collect::<Vec<_>>(), vec!["y".to_string()]);
        assert_eq!(phi.quantifier_depth(), 2);
        assert!(phi.is_simple());
        assert_eq!(phi.to_string(), "E x. E(x,y) & (A z. z = f(x))");
    }

    #[test]
    fn printer_parenthesizes_nested_connectives() {
        let a = Formula::rel("P", vec![Term::var("x")]);
        let b = Formula::rel("Q", vec![Term::var("x")]);
        let f = Formula::And(vec![Formula::Or(vec![a.clone(), b.clone()]), Formula::not(a.clone())]);
        assert_eq!(f.to_string(), "(P(x) | Q(x)) & !P(x)");
        let g = Formula::not(Formula::And(vec![a, b]));
        assert_eq!(g.to_string(), "!(P(x) & Q(x))");
    }
}
