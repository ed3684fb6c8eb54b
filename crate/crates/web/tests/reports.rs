use sparsefo_web::{color_report, forest_report, grid_text, query_report};

const TRIANGLE_TAIL: &str = "graph 4\n0 1\n1 2\n0 2\n2 3\n";

#[test]
fn coloring_lists_every_vertex() {
    let out = color_report(TRIANGLE_TAIL, 1).unwrap();
    assert!(out.starts_with("4 vertices, 4 edges, augmentation rounds k = 12\n"), "{out}");
    let lines: Vec<&str> =
        out.lines().filter(|l| l.split(' ').all(|w| w.parse::<usize>().is_ok()) && l.split(' ').count() == 2).collect();
    assert_eq!(lines.len(), 4, "{out}");
    assert!(color_report("graph 2\n0 0\n", 1).is_err());
    assert!(color_report(TRIANGLE_TAIL, 0).is_err());
}

#[test]
fn forests_respect_the_depth_bound() {
    let out = forest_report(&grid_text(3, 3), 2, "1,2").unwrap();
    let header = out.lines().next().unwrap();
    assert!(header.contains("(bound 3)"), "{out}");
    assert!(forest_report(TRIANGLE_TAIL, 1, "1,2").is_err());
    assert!(forest_report(TRIANGLE_TAIL, 1, "x").is_err());
    assert!(forest_report(TRIANGLE_TAIL, 1, "77").is_err());
}

#[test]
fn queries_pick_an_engine() {
    let s = "universe 4\nrel R/2\n0 1\n2 3\nrel P/1\n3\nfun f\n0 1\n";
    let out = query_report(TRIANGLE_TAIL, s, "E x. E y. R(x, y) & P(y)").unwrap();
    assert!(out.starts_with("SAT x=2,y=3\n(Σ₁ index"), "{out}");
    let out = query_report(TRIANGLE_TAIL, s, "A x. E y. R(x, y) | R(y, x)").unwrap();
    assert!(out.starts_with("true\n(quantifier elimination"), "{out}");
    let out = query_report(TRIANGLE_TAIL, s, "E x. P(f(x)) & !P(x)").unwrap();
    assert!(out.starts_with("false\n"), "{out}");
    assert!(query_report(TRIANGLE_TAIL, "universe 4\nrel R/2\n0 3\n", "T").is_err());
    assert!(query_report(TRIANGLE_TAIL, "universe 3\n", "T").is_err());
    assert!(query_report(TRIANGLE_TAIL, s, "E x. Q(x)").is_err());
}
