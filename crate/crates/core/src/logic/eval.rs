//! Reference (brute-force) evaluation of formulas on structures.

use std::collections::{BTreeSet, HashMap};

use super::formula::{Formula, Term};
use super::structure::{LogicError, Structure};

#[derive(Debug)]
enum CTerm {
    Var(usize),
    App(usize, Box<CTerm>),
}

#[derive(Debug)]
enum Node {
    Const(bool),
    Rel(usize, Vec<CTerm>),
    Eq(CTerm, CTerm),
    Not(Box<Node>),
    And(Vec<Node>),
    Or(Vec<Node>),
    Exists(usize, Box<Node>),
    Forall(usize, Box<Node>),
}

/// A formula compiled against a structure: symbols resolved to indexes and
/// variables to slots. Free variables occupy the first slots, in the order
/// given at compile time.
pub struct Compiled<'s> {
    n: usize,
    rels: Vec<&'s BTreeSet<Vec<usize>>>,
    funs: Vec<&'s [usize]>,
    root: Node,
    slots: usize,
    free: usize,
}

struct Builder<'s> {
    s: &'s Structure,
    rel_ids: HashMap<String, usize>,
    fun_ids: HashMap<String, usize>,
    rels: Vec<&'s BTreeSet<Vec<usize>>>,
    funs: Vec<&'s [usize]>,
    scope: Vec<(String, usize)>,
    slots: usize,
}

impl<'s> Builder<'s> {
    fn term(&mut self, t: &Term) -> Result<CTerm, LogicError> {
        match t {
            Term::Var(v) => {
                let slot = self.scope.iter().rev().find(|(name, _)| name == v).map(|&(_, s)| s);
                slot.map(CTerm::Var).ok_or_else(|| LogicError::Unbound(v.clone()))
            }
            Term::App(f, inner) => {
                let id = match self.fun_ids.get(f) {
                    Some(&id) => id,
                    None => {
                        let map = self.s.function(f).ok_or_else(|| LogicError::UnknownFunction(f.clone()))?;
                        self.funs.push(map);
                        self.fun_ids.insert(f.clone(), self.funs.len() - 1);
                        self.funs.len() - 1
                    }
                };
                Ok(CTerm::App(id, Box::new(self.term(inner)?)))
            }
        }
    }

    fn node(&mut self, f: &Formula) -> Result<Node, LogicError> {
        Ok(match f {
            Formula::True => Node::Const(true),
            Formula::False => Node::Const(false),
            Formula::Rel(r, args) => {
                let id = match self.rel_ids.get(r) {
                    Some(&id) => id,
                    None => {
                        let rel = self.s.relation(r).ok_or_else(|| LogicError::UnknownRelation(r.clone()))?;
                        if rel.arity != args.len() {
                            return Err(LogicError::Arity { name: r.clone(), expected: rel.arity, got: args.len() });
                        }
                        self.rels.push(&rel.tuples);
                        self.rel_ids.insert(r.clone(), self.rels.len() - 1);
                        self.rels.len() - 1
                    }
                };
                if self.s.relation(r).map(|x| x.arity) != Some(args.len()) {
                    let expected = self.s.relation(r).map_or(0, |x| x.arity);
                    return Err(LogicError::Arity { name: r.clone(), expected, got: args.len() });
                }
                Node::Rel(id, args.iter().map(|t| self.term(t)).collect::<Result<_, _>>()?)
            }
            Formula::Eq(a, b) => Node::Eq(self.term(a)?, self.term(b)?),
            Formula::Not(g) => Node::Not(Box::new(self.node(g)?)),
            Formula::And(gs) => Node::And(gs.iter().map(|g| self.node(g)).collect::<Result<_, _>>()?),
            Formula::Or(gs) => Node::Or(gs.iter().map(|g| self.node(g)).collect::<Result<_, _>>()?),
            Formula::Exists(x, g) | Formula::Forall(x, g) => {
                let slot = self.slots;
                self.slots += 1;
                self.scope.push((x.clone(), slot));
                let body = self.node(g)?;
                self.scope.pop();
                if matches!(f, Formula::Exists(..)) {
                    Node::Exists(slot, Box::new(body))
                } else {
                    Node::Forall(slot, Box::new(body))
                }
            }
        })
    }
}

impl<'s> Compiled<'s> {
    /// Compiles `f` against `s`; `free` lists the variables supplied at
    /// evaluation time (every free variable of `f` must be among them).
    pub fn new(s: &'s Structure, f: &Formula, free: &[String]) -> Result<Compiled<'s>, LogicError> {
        let mut b = Builder {
            s,
            rel_ids: HashMap::new(),
            fun_ids: HashMap::new(),
            rels: Vec::new(),
            funs: Vec::new(),
            scope: free.iter().enumerate().map(|(i, v)| (v.clone(), i)).collect(),
            slots: free.len(),
        };
        let root = b.node(f)?;
        Ok(Compiled { n: s.size(), rels: b.rels, funs: b.funs, root, slots: b.slots, free: free.len() })
    }

    /// Evaluates with the free variables bound to `values` (same order as at
    /// compile time).
    pub fn eval(&self, values: &[usize]) -> bool {
        assert_eq!(values.len(), self.free, "one value per free variable");
        let mut env = vec![0usize; self.slots];
        env[..self.free].copy_from_slice(values);
        self.node(&self.root, &mut env)
    }

    fn term(&self, t: &CTerm, env: &[usize]) -> usize {
        match t {
            CTerm::Var(s) => env[*s],
            CTerm::App(f, inner) => self.funs[*f][self.term(inner, env)],
        }
    }

    fn node(&self, node: &Node, env: &mut Vec<usize>) -> bool {
        match node {
            Node::Const(b) => *b,
            Node::Rel(r, args) => {
                let mut buf = [0usize; 8];
                if args.len() <= buf.len() {
                    for (slot, t) in buf.iter_mut().zip(args) {
                        *slot = self.term(t, env);
                    }
                    self.rels[*r].contains(&buf[..args.len()])
                } else {
                    let tuple: Vec<usize> = args.iter().map(|t| self.term(t, env)).collect();
                    self.rels[*r].contains(&tuple)
                }
            }
            Node::Eq(a, b) => self.term(a, env) == self.term(b, env),
            Node::Not(g) => !self.node(g, env),
            Node::And(gs) => gs.iter().all(|g| self.node(g, env)),
            Node::Or(gs) => gs.iter().any(|g| self.node(g, env)),
            Node::Exists(slot, g) => (0..self.n).any(|v| {
                env[*slot] = v;
                self.node(g, env)
            }),
            Node::Forall(slot, g) => (0..self.n).all(|v| {
                env[*slot] = v;
                self.node(g, env)
            }),
        }
    }
}

/// Tarskian truth of `f` in `s` under `bindings`, by exhaustive expansion
/// of the quantifiers. Over an empty universe `∃` is false and `∀` is true.
pub fn eval_oracle(s: &Structure, f: &Formula, bindings: &HashMap<String, usize>) -> Result<bool, LogicError> {
    let free: Vec<String> = f.free_vars().into_iter().collect();
    let mut values = Vec::with_capacity(free.len());
    for v in &free {
        let &val = bindings.get(v).ok_or_else(|| LogicError::Unbound(v.clone()))?;
        if val >= s.size() {
            return Err(LogicError::OutOfUniverse { v: val, n: s.size() });
        }
        values.push(val);
    }
    Ok(Compiled::new(s, f, &free)?.eval(&values))
}

/// Truth of a sentence.
pub fn eval_sentence(s: &Structure, f: &Formula) -> Result<bool, LogicError> {
    eval_oracle(s, f, &HashMap::new())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> Structure {
        let mut s = Structure::new(3);
        s.add_relation("Edge", 2).unwrap();
        for (a, b) in [(0, 1), (1, 2), (2, 0)] {
            s.insert("Edge", vec![a, b]).unwrap();
            s.insert("Edge", vec![b, a]).unwrap();
        }
        s
    }

    #[test]
    fn basic_sentences() {
        let phi = Formula::parse("E x. E y. Edge(x,y)").unwrap();
        assert!(eval_sentence(&triangle(), &phi).unwrap());
        let mut empty = Structure::new(3);
        empty.add_relation("Edge", 2).unwrap();
        assert!(!eval_sentence(&empty, &phi).unwrap());
    }

    #[test]
    fn empty_universe() {
        let mut s = Structure::new(0);
        s.add_relation("Edge", 2).unwrap();
        assert!(!eval_sentence(&s, &Formula::parse("E x. x = x").unwrap()).unwrap());
        assert!(eval_sentence(&s, &Formula::parse("A x. Edge(x,x)").unwrap()).unwrap());
    }

    #[test]
    fn shadowing_and_bindings() {
        let s = triangle();
        let f = Formula::parse("Edge(x,y) & E x. x = y").unwrap();
        let b: HashMap<String, usize> = [("x".to_string(), 0), ("y".to_string(), 1)].into();
        assert!(eval_oracle(&s, &f, &b).unwrap());
        assert!(matches!(eval_oracle(&s, &f, &HashMap::new()), Err(LogicError::Unbound(_))));
        assert!(eval_sentence(&s, &Formula::parse("E x. Q(x)").unwrap()).is_err());
        assert!(eval_sentence(&s, &Formula::parse("E x. Edge(x)").unwrap()).is_err());
    }
}
