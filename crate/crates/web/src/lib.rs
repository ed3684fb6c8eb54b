//! Browser front end for `sparsefo`: three operations on text inputs, each
//! returning a plain-text report for the page to display.
//!
//! The `*_report` functions hold the logic and are ordinary Rust; the
//! `#[wasm_bindgen]` exports wrap them for JavaScript.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use sparsefo::graph::Graph;
use sparsefo::logic::{is_guarded, parse_formula, Structure};
use sparsefo::qelim::reduce_sentence;
use sparsefo::sigma1::BEIndex;
use sparsefo::treedepth::low_treedepth_coloring;
use wasm_bindgen::prelude::*;

/// Largest graph the page accepts; the augmentation is quadratic on dense
/// inputs and the page runs on the main thread.
pub const MAX_VERTICES: usize = 400;

fn read_graph(text: &str) -> Result<Graph, String> {
    let g = Graph::parse(text).map_err(|e| format!("graph: {e}"))?;
    if g.n() > MAX_VERTICES {
        return Err(format!("graph: {} vertices, the demo accepts at most {MAX_VERTICES}", g.n()));
    }
    Ok(g)
}

/// `graph <n>` text of a `rows × cols` grid, for the page's example button.
pub fn grid_text(rows: usize, cols: usize) -> String {
    Graph::grid(rows, cols).to_text()
}

/// Low tree-depth coloring of order `d`: densities of the augmentation
/// chain, the number of colors and the `v color` lines.
pub fn color_report(graph: &str, d: usize) -> Result<String, String> {
    let g = read_graph(graph)?;
    let ltd = low_treedepth_coloring(&g, d).map_err(|e| e.to_string())?;
    let mut out = String::new();
    let _ = writeln!(out, "{} vertices, {} edges, augmentation rounds k = {}", g.n(), g.edge_count(), ltd.chain.k);
    let densities: Vec<String> = ltd.chain.densities().iter().map(|x| format!("{x:.2}")).collect();
    let _ = writeln!(out, "arcs per vertex by round: {}", densities.join(" "));
    if let Some(round) = ltd.chain.fixpoint() {
        let _ = writeln!(out, "no new arcs after round {round}");
    }
    let _ = writeln!(out, "{} colors", ltd.coloring.k);
    out.push_str(&ltd.coloring.to_text());
    Ok(out)
}

/// Depth-certifying forest for the union of `classes` (comma-separated) of
/// the order-`d` coloring, as `v parent depth` lines.
pub fn forest_report(graph: &str, d: usize, classes: &str) -> Result<String, String> {
    let g = read_graph(graph)?;
    let classes: Vec<usize> = classes
        .split(',')
        .map(|c| c.trim().parse().map_err(|_| format!("bad class `{}`", c.trim())))
        .collect::<Result<_, _>>()?;
    let ltd = low_treedepth_coloring(&g, d).map_err(|e| e.to_string())?;
    if let Some(c) = classes.iter().find(|&&c| c == 0 || c > ltd.coloring.k) {
        return Err(format!("class {c} outside 1..={}", ltd.coloring.k));
    }
    let forest = ltd.forest_for_classes(&classes).map_err(|e| e.to_string())?;
    let members = forest.members.iter().filter(|&&m| m).count();
    let mut out = String::new();
    let _ = writeln!(out, "{members} vertices, height {} (bound {})", forest.height(), (1usize << classes.len()) - 1);
    out.push_str(&forest.to_text());
    Ok(out)
}

/// Decides a sentence on a structure guarded by the graph. Existential
/// sentences over relations only go to the Σ₁ index (with a witness);
/// everything else goes through quantifier elimination.
pub fn query_report(graph: &str, structure: &str, formula: &str) -> Result<String, String> {
    let g = read_graph(graph)?;
    let s = Structure::parse(structure).map_err(|e| format!("structure: {e}"))?;
    if s.size() != g.n() {
        return Err(format!("structure has {} elements but the graph has {} vertices", s.size(), g.n()));
    }
    if !is_guarded(&s, &g).map_err(|e| e.to_string())? {
        return Err("the structure is not guarded by the graph".into());
    }
    let phi = parse_formula(formula, &s.language()).map_err(|e| format!("formula: {e}"))?;
    // The index works on the relational part of the structure.
    let relations: BTreeSet<String> = s.relations().map(|(r, _)| r.to_string()).collect();
    let sigma1 = BEIndex::build(&g, &s.restrict_to(&relations), 3).and_then(|mut idx| idx.query(&phi));
    match sigma1 {
        Ok(answer) => Ok(format!("{}\n(Σ₁ index, {} work units)\n", answer.render(), answer.work)),
        Err(_) => {
            let red = reduce_sentence(&phi, &s, &g).map_err(|e| e.to_string())?;
            let mut out = format!("{}\n(quantifier elimination, {} eliminations)\n", red.value, red.stats.eliminations);
            for line in &red.trace {
                let _ = writeln!(out, "  {line}");
            }
            Ok(out)
        }
    }
}

fn js(r: Result<String, String>) -> Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn grid(rows: usize, cols: usize) -> String {
    grid_text(rows, cols)
}

#[wasm_bindgen]
pub fn color(graph: &str, d: usize) -> Result<String, JsValue> {
    js(color_report(graph, d))
}

#[wasm_bindgen]
pub fn forest(graph: &str, d: usize, classes: &str) -> Result<String, JsValue> {
    js(forest_report(graph, d, classes))
}

#[wasm_bindgen]
pub fn query(graph: &str, structure: &str, formula: &str) -> Result<String, JsValue> {
    js(query_report(graph, structure, formula))
}
