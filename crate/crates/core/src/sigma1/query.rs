//! Compiled Σ₁ queries: the set of small structures satisfying the matrix,
//! matched against the global lists of an index.

use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, Mutex};

use super::labelled::{CanonicalKey, KLabelledStructure};
use super::{IndexError, Schema};
use crate::logic::{Formula, Term};

/// Largest number of possible facts over one small universe; the matrix is
/// evaluated on every subset of them.
pub const MAX_FACT_BITS: usize = 22;

#[derive(Clone, Debug)]
enum SNode {
    Const(bool),
    Rel(usize, Vec<usize>),
    Eq(usize, usize),
    Not(Box<SNode>),
    And(Vec<SNode>),
    Or(Vec<SNode>),
}

/// An existential sentence `∃x₁…∃x_q μ` compiled against a schema, with the
/// set of all structures on at most `q` elements (over the relations of μ)
/// that satisfy it. The set is stored as one bitset per universe size,
/// indexed by the fact encoding; it is closed under isomorphism.
#[derive(Clone, Debug)]
pub struct Sigma1Query {
    pub text: String,
    vars: Vec<String>,
    /// Schema ids of the relations used, in local order.
    rels: Vec<usize>,
    arities: Vec<usize>,
    matrix: SNode,
    satisfying: Vec<Vec<u64>>,
}

/// Verdict, verified witness (variable ↦ vertex) and work units spent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QueryAnswer {
    pub sat: bool,
    pub witness: Option<Vec<(String, usize)>>,
    pub work: u64,
}

impl QueryAnswer {
    /// `SAT x=1,y=2` or `UNSAT`.
    pub fn render(&self) -> String {
        match (&self.sat, &self.witness) {
            (true, Some(w)) => {
                let parts: Vec<String> = w.iter().map(|(x, v)| format!("{x}={v}")).collect();
                format!("SAT {}", parts.join(",")).trim_end().to_string()
            }
            (true, None) => "SAT".to_string(),
            _ => "UNSAT".to_string(),
        }
    }
}

impl Sigma1Query {
    pub fn compile(phi: &Formula, schema: &Schema, d0: usize) -> Result<Sigma1Query, IndexError> {
        let mut vars: Vec<String> = Vec::new();
        let mut body = phi;
        while let Formula::Exists(x, inner) = body {
            vars.retain(|v| v != x);
            vars.push(x.clone());
            body = inner;
        }
        if !body.is_quantifier_free() {
            return Err(IndexError::NotSigma1("the matrix contains quantifiers".into()));
        }
        if !phi.is_sentence() {
            let free: Vec<String> = phi.free_vars().into_iter().collect();
            return Err(IndexError::NotSigma1(format!("free variables {}", free.join(", "))));
        }
        if let Some(f) = body.functions().into_iter().next() {
            return Err(IndexError::FunctionSymbol(f));
        }
        if vars.len() > d0 {
            return Err(IndexError::TooManyVariables { got: vars.len(), max: d0 });
        }
        let mut rels = Vec::new();
        let mut arities = Vec::new();
        for (name, arity) in body.relations() {
            let id = schema.id(&name).ok_or_else(|| IndexError::UnknownRelation(name.clone()))?;
            let expected = schema.arity(id).expect("known id");
            if expected != arity {
                return Err(IndexError::Arity { rel: name, expected, got: arity });
            }
            rels.push(id);
            arities.push(arity);
        }
        let local: HashMap<String, usize> =
            body.relations().into_iter().enumerate().map(|(i, (name, _))| (name, i)).collect();
        let mut q = Sigma1Query { text: phi.to_string(), vars, rels, arities, matrix: SNode::Const(false), satisfying: Vec::new() };
        q.matrix = q.lower(body, &local);
        for j in 0..=q.vars.len() {
            let bits = q.fact_bits(j);
            if bits > MAX_FACT_BITS {
                return Err(IndexError::Cap(format!("{bits} possible facts on {j} elements (limit {MAX_FACT_BITS})")));
            }
            let mut set = vec![0u64; ((1usize << bits) + 63) / 64];
            let mut assignment = vec![0usize; q.vars.len()];
            for mask in 0..(1u64 << bits) {
                if q.find_assignment(j, mask, &mut assignment) {
                    set[(mask / 64) as usize] |= 1 << (mask % 64);
                }
            }
            q.satisfying.push(set);
        }
        Ok(q)
    }

    fn lower(&self, f: &Formula, local: &HashMap<String, usize>) -> SNode {
        let slot = |t: &Term| self.vars.iter().position(|v| v == t.variable()).expect("sentence variables are quantified");
        match f {
            Formula::True => SNode::Const(true),
            Formula::False => SNode::Const(false),
            Formula::Rel(r, args) => {
                SNode::Rel(local[r], args.iter().map(slot).collect())
            }
            Formula::Eq(a, b) => SNode::Eq(slot(a), slot(b)),
            Formula::Not(g) => SNode::Not(Box::new(self.lower(g, local))),
            Formula::And(gs) => SNode::And(gs.iter().map(|g| self.lower(g, local)).collect()),
            Formula::Or(gs) => SNode::Or(gs.iter().map(|g| self.lower(g, local)).collect()),
            Formula::Exists(..) | Formula::Forall(..) => unreachable!("matrix is quantifier-free"),
        }
    }

    pub fn variables(&self) -> &[String] {
        &self.vars
    }

    fn fact_bits(&self, j: usize) -> usize {
        self.arities.iter().map(|&a| j.pow(a as u32)).sum()
    }

    fn fact_bit(&self, j: usize, local: usize, tuple: &[usize]) -> usize {
        let offset: usize = self.arities[..local].iter().map(|&a| j.pow(a as u32)).sum();
        offset + tuple.iter().fold(0, |acc, &e| acc * j + e)
    }

    fn eval(&self, node: &SNode, j: usize, mask: u64, a: &[usize]) -> bool {
        match node {
            SNode::Const(b) => *b,
            SNode::Rel(r, slots) => {
                let tuple: Vec<usize> = slots.iter().map(|&s| a[s]).collect();
                mask >> self.fact_bit(j, *r, &tuple) & 1 == 1
            }
            SNode::Eq(x, y) => a[*x] == a[*y],
            SNode::Not(g) => !self.eval(g, j, mask, a),
            SNode::And(gs) => gs.iter().all(|g| self.eval(g, j, mask, a)),
            SNode::Or(gs) => gs.iter().any(|g| self.eval(g, j, mask, a)),
        }
    }

    /// Searches assignments of the variables into `0..j` satisfying the
    /// matrix in the structure encoded by `mask`.
    fn find_assignment(&self, j: usize, mask: u64, a: &mut [usize]) -> bool {
        let q = a.len();
        if q == 0 {
            return self.eval(&self.matrix, j, mask, a);
        }
        if j == 0 {
            return false;
        }
        a.iter_mut().for_each(|x| *x = 0);
        loop {
            if self.eval(&self.matrix, j, mask, a) {
                return true;
            }
            let mut i = 0;
            while i < q {
                a[i] += 1;
                if a[i] < j {
                    break;
                }
                a[i] = 0;
                i += 1;
            }
            if i == q {
                return false;
            }
        }
    }

    /// Encodes a stored structure (plus the current nullary facts) over the
    /// query's relations; `None` if it has more elements than variables.
    fn encode(&self, s: &KLabelledStructure, nullary: &BTreeSet<usize>) -> Option<u64> {
        let j = s.size;
        if j > self.vars.len() {
            return None;
        }
        let mut mask = 0u64;
        for (rel, t) in &s.tuples {
            if let Some(local) = self.rels.iter().position(|r| r == rel) {
                mask |= 1 << self.fact_bit(j, local, t);
            }
        }
        for (local, (&rel, &arity)) in self.rels.iter().zip(&self.arities).enumerate() {
            if arity == 0 && nullary.contains(&rel) {
                mask |= 1 << self.fact_bit(j, local, &[]);
            }
        }
        Some(mask)
    }

    /// Scans global-list structures; on the first one satisfying the
    /// sentence returns its key and an assignment of variables to its
    /// elements. Also returns the number of structures inspected.
    pub fn scan<'a>(
        &self,
        globals: impl Iterator<Item = (&'a CanonicalKey, &'a KLabelledStructure)>,
        nullary: &BTreeSet<usize>,
    ) -> (Option<(CanonicalKey, Vec<usize>)>, u64) {
        let mut work = 0;
        for (key, s) in globals {
            work += 1;
            let Some(mask) = self.encode(s, nullary) else { continue };
            let j = s.size;
            if self.satisfying[j][(mask / 64) as usize] >> (mask % 64) & 1 == 1 {
                let mut a = vec![0usize; self.vars.len()];
                let found = self.find_assignment(j, mask, &mut a);
                debug_assert!(found, "bitset and evaluation agree");
                return (Some((key.clone(), a)), work);
            }
        }
        (None, work)
    }

    /// Evaluates the matrix on concrete vertices (one per variable) against
    /// a fact oracle.
    pub fn verify(&self, values: &[usize], holds: impl Fn(usize, &[usize]) -> bool) -> bool {
        fn go(q: &Sigma1Query, node: &SNode, v: &[usize], holds: &dyn Fn(usize, &[usize]) -> bool) -> bool {
            match node {
                SNode::Const(b) => *b,
                SNode::Rel(r, slots) => {
                    let tuple: Vec<usize> = slots.iter().map(|&s| v[s]).collect();
                    holds(q.rels[*r], &tuple)
                }
                SNode::Eq(x, y) => v[*x] == v[*y],
                SNode::Not(g) => !go(q, g, v, holds),
                SNode::And(gs) => gs.iter().all(|g| go(q, g, v, holds)),
                SNode::Or(gs) => gs.iter().any(|g| go(q, g, v, holds)),
            }
        }
        go(self, &self.matrix, values, &holds)
    }

    /// Number of structures (over the query's relations, up to `q`
    /// elements, counted with their element orderings) that satisfy it.
    pub fn satisfying_count(&self) -> u64 {
        self.satisfying.iter().flatten().map(|w| u64::from(w.count_ones())).sum()
    }
}

/// Memo of compiled queries keyed by formula text.
#[derive(Debug, Default)]
pub struct QueryCache {
    map: Mutex<HashMap<String, Arc<Sigma1Query>>>,
}

impl Clone for QueryCache {
    fn clone(&self) -> Self {
        QueryCache { map: Mutex::new(self.map.lock().expect("cache lock").clone()) }
    }
}

impl QueryCache {
    pub fn get(&self, phi: &Formula, schema: &Schema, d0: usize) -> Result<Arc<Sigma1Query>, IndexError> {
        let text = phi.to_string();
        if let Some(q) = self.map.lock().expect("cache lock").get(&text) {
            return Ok(q.clone());
        }
        let q = Arc::new(Sigma1Query::compile(phi, schema, d0)?);
        self.map.lock().expect("cache lock").insert(text, q.clone());
        Ok(q)
    }

    pub fn len(&self) -> usize {
        self.map.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
