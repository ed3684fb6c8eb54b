//! Grid benchmark for the Σ₁ index: build on an empty structure guarded by
//! a grid, replay a script of updates and queries, and record work counters
//! (never wall time) so that runs on different sizes can be compared.

use crate::graph::Graph;
use crate::logic::Structure;
use crate::sigma1::{BEIndex, BeLimits, IndexError};

use super::script::{parse_script, run_script, Command, ScriptError, Step};
use super::CounterReport;

/// Relations of the benchmark structure.
pub const BENCH_RELATIONS: [(&str, usize); 2] = [("R", 2), ("P", 1)];

/// The default script touches only the corner `0, 1` of the grid, so it is
/// valid on every grid with at least two columns.
pub const DEFAULT_SCRIPT: &str = "\
add R 0 1
add P 1
ask E x. E y. R(x, y) & P(y)
del R 0 1
ask E x. E y. R(x, y) & P(y)
";

pub fn default_script() -> Vec<(usize, Command)> {
    parse_script(DEFAULT_SCRIPT).expect("built-in script parses")
}

/// Counters of one script step.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StepCounters {
    pub forests_touched: u64,
    pub vertices_recomputed: u64,
    pub query_work: u64,
}

/// Counters of a completed run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridCounters {
    pub build_work: u64,
    pub forests: usize,
    pub steps: Vec<StepCounters>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridRun {
    pub rows: usize,
    pub cols: usize,
    /// Counters, or the resource cap that stopped the run.
    pub outcome: Result<GridCounters, String>,
}

impl GridRun {
    pub fn n(&self) -> usize {
        self.rows * self.cols
    }

    pub fn label(&self) -> String {
        format!("grid_{}x{}", self.rows, self.cols)
    }
}

/// Builds the index on an empty `rows × cols` grid structure and replays
/// `script`. Resource caps end the run with a recorded diagnostic; any other
/// failure (a script line invalid on this grid) is returned as an error.
pub fn bench_grid(
    rows: usize,
    cols: usize,
    d0: usize,
    script: &[(usize, Command)],
    limits: BeLimits,
) -> Result<GridRun, ScriptError> {
    let g = Graph::grid(rows, cols);
    let mut s = Structure::new(g.n());
    for (name, arity) in BENCH_RELATIONS {
        s.add_relation(name, arity).expect("fresh relation");
    }
    let capped = |e: IndexError| Ok(GridRun { rows, cols, outcome: Err(e.to_string()) });
    let mut index = match BEIndex::build_with(&g, &s, d0, limits) {
        Ok(index) => index,
        Err(e) if e.is_cap() => return capped(e),
        Err(e) => return Err(ScriptError::Index { line: 0, source: e }),
    };
    let steps = match run_script(&mut index, script) {
        Ok(steps) => steps,
        Err(ScriptError::Index { source, .. }) if source.is_cap() => return capped(source),
        Err(e) => return Err(e),
    };
    let steps = steps
        .into_iter()
        .map(|step| match step {
            Step::Update(r) => StepCounters {
                forests_touched: r.forests_touched as u64,
                vertices_recomputed: r.vertices_recomputed,
                query_work: 0,
            },
            Step::Answer(_, work) => StepCounters { query_work: work, ..StepCounters::default() },
        })
        .collect();
    let counters = GridCounters { build_work: index.counters.build_work, forests: index.subsets().len(), steps };
    Ok(GridRun { rows, cols, outcome: Ok(counters) })
}

/// One `name value` line per counter: size, build work, forests and the
/// per-step counters of every run; capped runs report `capped 1`.
pub fn report(runs: &[GridRun]) -> CounterReport {
    let mut r = CounterReport::default();
    for run in runs {
        let label = run.label();
        r.add(&format!("{label}.n"), run.n() as u64);
        match &run.outcome {
            Err(_) => r.add(&format!("{label}.capped"), 1),
            Ok(c) => {
                r.add(&format!("{label}.build_work"), c.build_work);
                r.add(&format!("{label}.forests"), c.forests as u64);
                for (i, step) in c.steps.iter().enumerate() {
                    r.add(&format!("{label}.step{}.forests_touched", i + 1), step.forests_touched);
                    r.add(&format!("{label}.step{}.vertices_recomputed", i + 1), step.vertices_recomputed);
                    r.add(&format!("{label}.step{}.query_work", i + 1), step.query_work);
                }
            }
        }
    }
    r
}

/// Parses grid sizes such as `10x10,32x32` (a bare `n` means `n × n`).
pub fn parse_grids(text: &str) -> Result<Vec<(usize, usize)>, String> {
    text.split(',')
        .map(|part| {
            let part = part.trim();
            let (r, c) = part.split_once('x').unwrap_or((part, part));
            match (r.parse::<usize>(), c.parse::<usize>()) {
                (Ok(r), Ok(c)) if r > 0 && c > 0 => Ok((r, c)),
                _ => Err(format!("bad grid size `{part}`")),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_sizes_parse() {
        assert_eq!(parse_grids("10x10, 4,2x3").unwrap(), vec![(10, 10), (4, 4), (2, 3)]);
        assert!(parse_grids("3x").is_err());
        assert!(parse_grids("0").is_err());
    }

    #[test]
    fn empty_script_only_builds() {
        let run = bench_grid(3, 3, 1, &[], BeLimits::default()).unwrap();
        let c = run.outcome.unwrap();
        assert!(c.build_work > 0);
        assert!(c.steps.is_empty());
    }

    #[test]
    fn default_script_replays() {
        let run = bench_grid(3, 4, 2, &default_script(), BeLimits::default()).unwrap();
        let c = run.outcome.unwrap();
        assert_eq!(c.steps.len(), 5);
        assert!(c.steps[0].forests_touched > 0);
        assert!(c.steps[2].query_work > 0);
        assert_eq!(c.steps[2].forests_touched, 0);
    }
}
