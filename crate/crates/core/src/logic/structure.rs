//! Languages, relational structures with unary functions, Gaifman graphs
//! and the structure text format.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use thiserror::Error;

use super::parse::is_identifier;
use crate::graph::Graph;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LogicError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("symbol {0} is declared twice")]
    DuplicateSymbol(String),
    #[error("unknown relation symbol {0}")]
    UnknownRelation(String),
    #[error("unknown function symbol {0}")]
    UnknownFunction(String),
    #[error("relation {name} has arity {expected}, got a tuple of length {got}")]
    Arity { name: String, expected: usize, got: usize },
    #[error("element {v} outside the universe of size {n}")]
    OutOfUniverse { v: usize, n: usize },
    #[error("free variable {0} has no binding")]
    Unbound(String),
    #[error("structure has {structure} elements but the guard has {guard} vertices")]
    SizeMismatch { structure: usize, guard: usize },
    #[error("invalid symbol name `{0}`")]
    BadName(String),
}

/// Relation symbols with arities and unary function symbols.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Language {
    pub relations: Vec<(String, usize)>,
    pub functions: Vec<String>,
}

impl Language {
    pub fn new(relations: Vec<(String, usize)>, functions: Vec<String>) -> Result<Language, LogicError> {
        let mut seen = BTreeSet::new();
        for name in relations.iter().map(|(r, _)| r).chain(&functions) {
            if !seen.insert(name.clone()) {
                return Err(LogicError::DuplicateSymbol(name.clone()));
            }
        }
        Ok(Language { relations, functions })
    }

    pub fn relation_arity(&self, name: &str) -> Option<usize> {
        self.relations.iter().find(|(r, _)| r == name).map(|&(_, a)| a)
    }

    pub fn has_function(&self, name: &str) -> bool {
        self.functions.iter().any(|f| f == name)
    }

    pub fn has_symbol(&self, name: &str) -> bool {
        self.relation_arity(name).is_some() || self.has_function(name)
    }
}

/// A relation: its arity and tuple set.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Relation {
    pub arity: usize,
    pub tuples: BTreeSet<Vec<usize>>,
}

/// A finite structure on the universe `0..n` with named relations and
/// total unary functions.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Structure {
    n: usize,
    relations: BTreeMap<String, Relation>,
    functions: BTreeMap<String, Vec<usize>>,
}

impl Structure {
    pub fn new(n: usize) -> Structure {
        Structure { n, relations: BTreeMap::new(), functions: BTreeMap::new() }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// The size measure |V| + Σ|R| + |functions|·|V|.
    pub fn weight(&self) -> usize {
        self.n + self.relations.values().map(|r| r.tuples.len()).sum::<usize>() + self.functions.len() * self.n
    }

    pub fn language(&self) -> Language {
        Language {
            relations: self.relations.iter().map(|(r, rel)| (r.clone(), rel.arity)).collect(),
            functions: self.functions.keys().cloned().collect(),
        }
    }

    pub fn has_symbol(&self, name: &str) -> bool {
        self.relations.contains_key(name) || self.functions.contains_key(name)
    }

    /// Declares an empty relation (keeps existing tuples if already declared
    /// with the same arity).
    pub fn add_relation(&mut self, name: &str, arity: usize) -> Result<(), LogicError> {
        if self.functions.contains_key(name) {
            return Err(LogicError::DuplicateSymbol(name.to_string()));
        }
        match self.relations.get(name) {
            Some(r) if r.arity != arity => Err(LogicError::DuplicateSymbol(name.to_string())),
            Some(_) => Ok(()),
            None => {
                self.relations.insert(name.to_string(), Relation { arity, tuples: BTreeSet::new() });
                Ok(())
            }
        }
    }

    /// Declares a relation with the given tuples, replacing any previous one.
    pub fn set_relation(&mut self, name: &str, arity: usize, tuples: BTreeSet<Vec<usize>>) -> Result<(), LogicError> {
        if self.functions.contains_key(name) {
            return Err(LogicError::DuplicateSymbol(name.to_string()));
        }
        for t in &tuples {
            self.check_tuple(name, arity, t)?;
        }
        self.relations.insert(name.to_string(), Relation { arity, tuples });
        Ok(())
    }

    /// Declares a function (identity everywhere) if absent.
    pub fn add_function(&mut self, name: &str) -> Result<(), LogicError> {
        if self.relations.contains_key(name) {
            return Err(LogicError::DuplicateSymbol(name.to_string()));
        }
        let n = self.n;
        self.functions.entry(name.to_string()).or_insert_with(|| (0..n).collect());
        Ok(())
    }

    /// Declares a function with the given total map, replacing any previous one.
    pub fn set_function(&mut self, name: &str, map: Vec<usize>) -> Result<(), LogicError> {
        if self.relations.contains_key(name) {
            return Err(LogicError::DuplicateSymbol(name.to_string()));
        }
        if map.len() != self.n {
            return Err(LogicError::Arity { name: name.to_string(), expected: self.n, got: map.len() });
        }
        if let Some(&v) = map.iter().find(|&&v| v >= self.n) {
            return Err(LogicError::OutOfUniverse { v, n: self.n });
        }
        self.functions.insert(name.to_string(), map);
        Ok(())
    }

    fn check_tuple(&self, name: &str, arity: usize, tuple: &[usize]) -> Result<(), LogicError> {
        if tuple.len() != arity {
            return Err(LogicError::Arity { name: name.to_string(), expected: arity, got: tuple.len() });
        }
        if let Some(&v) = tuple.iter().find(|&&v| v >= self.n) {
            return Err(LogicError::OutOfUniverse { v, n: self.n });
        }
        Ok(())
    }

    /// Inserts a tuple; returns whether it was new.
    pub fn insert(&mut self, name: &str, tuple: Vec<usize>) -> Result<bool, LogicError> {
        let arity = self.relations.get(name).ok_or_else(|| LogicError::UnknownRelation(name.to_string()))?.arity;
        self.check_tuple(name, arity, &tuple)?;
        Ok(self.relations.get_mut(name).expect("checked").tuples.insert(tuple))
    }

    /// Removes a tuple; returns whether it was present.
    pub fn remove(&mut self, name: &str, tuple: &[usize]) -> Result<bool, LogicError> {
        let rel = self.relations.get_mut(name).ok_or_else(|| LogicError::UnknownRelation(name.to_string()))?;
        Ok(rel.tuples.remove(tuple))
    }

    pub fn relation(&self, name: &str) -> Option<&Relation> {
        self.relations.get(name)
    }

    pub fn relations(&self) -> impl Iterator<Item = (&str, &Relation)> {
        self.relations.iter().map(|(r, rel)| (r.as_str(), rel))
    }

    pub fn function(&self, name: &str) -> Option<&[usize]> {
        self.functions.get(name).map(Vec::as_slice)
    }

    pub fn functions(&self) -> impl Iterator<Item = (&str, &[usize])> {
        self.functions.iter().map(|(f, m)| (f.as_str(), m.as_slice()))
    }

    pub fn contains(&self, name: &str, tuple: &[usize]) -> bool {
        self.relations.get(name).is_some_and(|r| r.tuples.contains(tuple))
    }

    /// Keeps only the listed symbols.
    pub fn restrict_to(&self, keep: &BTreeSet<String>) -> Structure {
        Structure {
            n: self.n,
            relations: self.relations.iter().filter(|(r, _)| keep.contains(*r)).map(|(r, x)| (r.clone(), x.clone())).collect(),
            functions: self.functions.iter().filter(|(f, _)| keep.contains(*f)).map(|(f, m)| (f.clone(), m.clone())).collect(),
        }
    }

    /// Substructure induced by `members` on the same universe: relations keep
    /// only tuples inside the member set; functions are dropped.
    pub fn induced_relations(&self, members: &[bool]) -> Structure {
        Structure {
            n: self.n,
            relations: self
                .relations
                .iter()
                .map(|(r, rel)| {
                    let tuples = rel.tuples.iter().filter(|t| t.iter().all(|&v| members[v])).cloned().collect();
                    (r.clone(), Relation { arity: rel.arity, tuples })
                })
                .collect(),
            functions: BTreeMap::new(),
        }
    }

    /// Parses the structure text format.
    pub fn parse(text: &str) -> Result<Structure, LogicError> {
        enum Section {
            None,
            Rel(String),
            Fun(String),
        }
        let mut s: Option<Structure> = None;
        let mut section = Section::None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let syntax = |msg: String| LogicError::Syntax { line, msg };
            let words: Vec<&str> = body.split_whitespace().collect();
            let Some(st) = s.as_mut() else {
                if words.len() != 2 || words[0] != "universe" {
                    return Err(syntax("expected `universe <n>`".into()));
                }
                let n = words[1].parse().map_err(|_| syntax(format!("bad universe size `{}`", words[1])))?;
                s = Some(Structure::new(n));
                continue;
            };
            match words[0] {
                "universe" => return Err(syntax("duplicate `universe` line".into())),
                "rel" => {
                    let spec = words.get(1).filter(|_| words.len() == 2).ok_or_else(|| syntax("expected `rel <Name>/<arity>`".into()))?;
                    let (name, arity) = spec.split_once('/').ok_or_else(|| syntax("expected `rel <Name>/<arity>`".into()))?;
                    if !is_identifier(name) {
                        return Err(syntax(format!("invalid relation name `{name}`")));
                    }
                    let arity: usize = arity.parse().map_err(|_| syntax(format!("bad arity `{arity}`")))?;
                    if st.has_symbol(name) {
                        return Err(syntax(format!("symbol {name} declared twice")));
                    }
                    st.add_relation(name, arity).map_err(|e| syntax(e.to_string()))?;
                    section = Section::Rel(name.to_string());
                }
                "fun" => {
                    let name = words.get(1).filter(|_| words.len() == 2).ok_or_else(|| syntax("expected `fun <name>`".into()))?;
                    if !is_identifier(name) {
                        return Err(syntax(format!("invalid function name `{name}`")));
                    }
                    if st.has_symbol(name) {
                        return Err(syntax(format!("symbol {name} declared twice")));
                    }
                    st.add_function(name).map_err(|e| syntax(e.to_string()))?;
                    section = Section::Fun(name.to_string());
                }
                _ => match &section {
                    Section::None => return Err(syntax("data line before any `rel` or `fun` header".into())),
                    Section::Rel(name) => {
                        let tuple: Vec<usize> = if words == ["()"] {
                            Vec::new()
                        } else {
                            words
                                .iter()
                                .map(|w| w.parse().map_err(|_| syntax(format!("bad element `{w}`"))))
                                .collect::<Result<_, _>>()?
                        };
                        st.insert(name, tuple).map_err(|e| syntax(e.to_string()))?;
                    }
                    Section::Fun(name) => {
                        if words.len() != 2 {
                            return Err(syntax("expected a `v w` pair".into()));
                        }
                        let v: usize = words[0].parse().map_err(|_| syntax(format!("bad element `{}`", words[0])))?;
                        let w: usize = words[1].parse().map_err(|_| syntax(format!("bad element `{}`", words[1])))?;
                        for x in [v, w] {
                            if x >= st.n {
                                return Err(syntax(format!("element {x} outside the universe of size {}", st.n)));
                            }
                        }
                        st.functions.get_mut(name).expect("declared")[v] = w;
                    }
                },
            }
        }
        s.ok_or(LogicError::Syntax { line: 0, msg: "missing `universe <n>` line".into() })
    }

    /// Writes the structure text format (nullary tuples as `()`; identity
    /// function entries omitted).
    pub fn to_text(&self) -> String {
        let mut out = format!("universe {}\n", self.n);
        for (name, rel) in &self.relations {
            let _ = writeln!(out, "rel {name}/{}", rel.arity);
            for t in &rel.tuples {
                if t.is_empty() {
                    out.push_str("()\n");
                } else {
                    let words: Vec<String> = t.iter().map(usize::to_string).collect();
                    let _ = writeln!(out, "{}", words.join(" "));
                }
            }
        }
        for (name, map) in &self.functions {
            let _ = writeln!(out, "fun {name}");
            for (v, &w) in map.iter().enumerate() {
                if v != w {
                    let _ = writeln!(out, "{v} {w}");
                }
            }
        }
        out
    }
}

/// The Gaifman graph: elements joined when they share a tuple or one is the
/// image of the other under a function.
pub fn gaifman_graph(s: &Structure) -> Graph {
    let mut adj = vec![Vec::new(); s.size()];
    for (_, rel) in s.relations() {
        for t in &rel.tuples {
            for &a in t {
                for &b in t {
                    if a != b {
                        adj[a].push(b);
                    }
                }
            }
        }
    }
    for (_, map) in s.functions() {
        for (v, &w) in map.iter().enumerate() {
            if v != w {
                adj[v].push(w);
                adj[w].push(v);
            }
        }
    }
    Graph::from_raw_adjacency(adj)
}

/// True when the Gaifman graph of `s` is a subgraph of `g`.
pub fn is_guarded(s: &Structure, g: &Graph) -> Result<bool, LogicError> {
    if s.size() != g.n() {
        return Err(LogicError::SizeMismatch { structure: s.size(), guard: g.n() });
    }
    Ok(gaifman_graph(s).is_subgraph_of(g))
}
