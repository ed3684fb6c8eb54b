use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use sparsefo::augment::{kth_augmentation_with, AugmentError, AugmentLimits};
use sparsefo::cli::bench::{bench_grid, default_script, parse_grids, report};
use sparsefo::cli::script::{parse_script, run_script, Step};
use sparsefo::cli::selftest::{run_selftest, SelftestConfig};
use sparsefo::cli::{CounterReport, Exit, RunConfig};
use sparsefo::graph::Graph;
use sparsefo::logic::{eval_sentence, is_guarded, parse_formula, Formula, Structure};
use sparsefo::qelim::{reduce_sentence_with, QelimError, QelimLimits};
use sparsefo::sigma1::{BEIndex, BeLimits, Fault, MAX_D0};
use sparsefo::treedepth::{low_treedepth_coloring_with, TreedepthError};

#[derive(Parser)]
#[command(name = "sparsefo", version)]
#[command(about = "First-order model checking on structures guarded by sparse graphs")]
struct Cli {
    /// Seed of every random choice
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,

    /// Print work counters (`name value` lines) to standard error
    #[arg(long, global = true)]
    counters: bool,

    /// Suppress results on standard output (files are still written)
    #[arg(long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the k-th transitive-fraternal augmentation of a graph
    Augment {
        #[arg(long)]
        graph: PathBuf,
        #[arg(short)]
        k: usize,
        /// Output graph file (standard output if absent)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Directory receiving the oriented chain `d0.dgr` … `d<k>.dgr`
        #[arg(long)]
        chain: Option<PathBuf>,
    },
    /// Low tree-depth coloring of order d (`v color` lines)
    Color {
        #[arg(long)]
        graph: PathBuf,
        #[arg(short)]
        d: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Depth-certifying forest for a union of color classes (`v parent depth` lines)
    Forest {
        #[arg(long)]
        graph: PathBuf,
        #[arg(short)]
        d: usize,
        /// Comma-separated color classes, at most d of them
        #[arg(long, value_delimiter = ',', required = true)]
        classes: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide a first-order sentence on a structure
    Check {
        #[arg(long)]
        structure: PathBuf,
        /// Guard graph (required by the qelim engine)
        #[arg(long)]
        guard: Option<PathBuf>,
        #[arg(long)]
        formula: String,
        #[arg(long, value_enum, default_value_t = Engine::Qelim)]
        engine: Engine,
        /// Largest accepted quantifier depth
        #[arg(long, default_value_t = RunConfig::default().max_quantifier_depth)]
        max_depth: usize,
        /// Largest number of templates per palette
        #[arg(long, default_value_t = RunConfig::default().max_templates)]
        max_templates: usize,
        /// File receiving one line per elimination round
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Run an update/query script against the dynamic Σ₁ index
    Index {
        #[arg(long)]
        guard: PathBuf,
        #[arg(long)]
        structure: PathBuf,
        #[arg(long, default_value_t = 2)]
        d0: usize,
        #[arg(long)]
        script: PathBuf,
    },
    /// Randomized differential tests of every module against brute force
    Selftest {
        /// Multiplier of the number of trials
        #[arg(long, default_value_t = 1)]
        scale: usize,
        /// Inject a defect to check that the tests catch it
        #[arg(long, value_enum)]
        fault: Option<FaultArg>,
    },
    /// Build the Σ₁ index on grids, replay a script and report work counters
    Bench {
        /// Grid sizes, e.g. `10x10,32x32,100x100`
        #[arg(long, default_value = "10x10,32x32,100x100")]
        grids: String,
        #[arg(long, default_value_t = 2)]
        d0: usize,
        /// Update/query script (a small built-in one if absent)
        #[arg(long)]
        script: Option<PathBuf>,
        /// Cap on the number of color subsets (forest indexes)
        #[arg(long, default_value_t = BeLimits::default().max_subsets)]
        max_subsets: usize,
        /// Cap on the arcs of any augmentation round
        #[arg(long, default_value_t = AugmentLimits::default().max_arcs)]
        max_arcs: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Engine {
    Qelim,
    Oracle,
}

#[derive(Clone, Copy, ValueEnum)]
enum FaultArg {
    SkipList3Update,
}

/// A failed command: exit status and message.
struct Failure(Exit, String);

fn input<E: Display>(e: E) -> Failure {
    Failure(Exit::InputError, e.to_string())
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn read_graph(path: &Path) -> Result<Graph, Failure> {
    Graph::parse(&read(path)?).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn read_structure(path: &Path) -> Result<Structure, Failure> {
    Structure::parse(&read(path)?).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn augment_failure(e: AugmentError) -> Failure {
    Failure(Exit::Cap, e.to_string())
}

fn treedepth_failure(e: TreedepthError) -> Failure {
    match e {
        TreedepthError::Augment(e) => augment_failure(e),
        e => input(e),
    }
}

/// What a successful command prints.
struct Output {
    stdout: String,
    counters: CounterReport,
    exit: Exit,
}

impl Output {
    fn new(stdout: String) -> Self {
        Output { stdout, counters: CounterReport::default(), exit: Exit::Ok }
    }
}

/// Writes `text` to `out`, or returns it for standard output.
fn emit(text: String, out: Option<&Path>) -> Result<String, Failure> {
    match out {
        Some(path) => write(path, &text).map(|_| String::new()),
        None => Ok(text),
    }
}

fn run(cli: &Cli) -> Result<Output, Failure> {
    match &cli.command {
        Command::Augment { graph, k, out, chain } => {
            let g = read_graph(graph)?;
            let c = kth_augmentation_with(&g, *k, AugmentLimits::default()).map_err(augment_failure)?;
            if let Some(dir) = chain {
                fs::create_dir_all(dir).map_err(|e| input(format!("{}: {e}", dir.display())))?;
                for i in 0..=*k {
                    write(&dir.join(format!("d{i}.dgr")), &c.digraph(i).to_text())?;
                }
            }
            let mut o = Output::new(emit(c.augmented.to_text(), out.as_deref())?);
            o.counters.add("vertices", g.n() as u64);
            for i in 0..=*k {
                o.counters.add(&format!("round{i}.arcs"), c.digraph(i).edge_count() as u64);
            }
            o.counters.add("pair_checks", c.pair_checks);
            Ok(o)
        }
        Command::Color { graph, d, out } => {
            let g = read_graph(graph)?;
            let ltd = low_treedepth_coloring_with(&g, *d, AugmentLimits::default()).map_err(treedepth_failure)?;
            let mut o = Output::new(emit(ltd.coloring.to_text(), out.as_deref())?);
            o.counters.add("colors", ltd.coloring.k as u64);
            o.counters.add("augmented_edges", ltd.chain.augmented.edge_count() as u64);
            o.counters.add("pair_checks", ltd.chain.pair_checks);
            Ok(o)
        }
        Command::Forest { graph, d, classes, out } => {
            let g = read_graph(graph)?;
            let ltd = low_treedepth_coloring_with(&g, *d, AugmentLimits::default()).map_err(treedepth_failure)?;
            if let Some(c) = classes.iter().find(|&&c| c == 0 || c > ltd.coloring.k) {
                return Err(input(format!("class {c} outside 1..={}", ltd.coloring.k)));
            }
            let forest = ltd.forest_for_classes(classes).map_err(treedepth_failure)?;
            let mut o = Output::new(emit(forest.to_text(), out.as_deref())?);
            o.counters.add("members", forest.members.iter().filter(|&&m| m).count() as u64);
            o.counters.add("height", forest.height() as u64);
            Ok(o)
        }
        Command::Check { structure, guard, formula, engine, max_depth, max_templates, trace } => {
            let s = read_structure(structure)?;
            let phi = parse_formula(formula, &s.language()).map_err(input)?;
            if !phi.is_sentence() {
                return Err(input(format!("formula has free variables: {phi}")));
            }
            if phi.quantifier_depth() > *max_depth {
                let depth = phi.quantifier_depth();
                return Err(Failure(Exit::Cap, format!("quantifier depth {depth} exceeds --max-depth {max_depth}")));
            }
            match engine {
                Engine::Oracle => {
                    let value = eval_sentence(&s, &phi).map_err(input)?;
                    Ok(Output::new(format!("{value}\n")))
                }
                Engine::Qelim => {
                    let Some(guard) = guard else {
                        return Err(input("the qelim engine needs --guard"));
                    };
                    let g = read_graph(guard)?;
                    check_qelim(&phi, &s, &g, *max_depth, *max_templates, trace.as_deref())
                }
            }
        }
        Command::Index { guard, structure, d0, script } => {
            let g = read_graph(guard)?;
            let s = read_structure(structure)?;
            let commands = parse_script(&read(script)?).map_err(input)?;
            if *d0 == 0 || *d0 > RunConfig::default().max_d0.min(MAX_D0) {
                return Err(input(format!("--d0 must be in 1..={}", RunConfig::default().max_d0.min(MAX_D0))));
            }
            let mut index = BEIndex::build(&g, &s, *d0).map_err(|e| {
                let exit = if e.is_cap() { Exit::Cap } else { Exit::InputError };
                Failure(exit, e.to_string())
            })?;
            let steps = run_script(&mut index, &commands).map_err(|e| {
                let exit = if e.is_cap() { Exit::Cap } else { Exit::InputError };
                Failure(exit, e.to_string())
            })?;
            let answers: String = steps
                .iter()
                .filter_map(|s| match s {
                    Step::Answer(text, _) => Some(format!("{text}\n")),
                    Step::Update(_) => None,
                })
                .collect();
            let mut o = Output::new(answers);
            let c = index.counters;
            o.counters.add("build_work", c.build_work);
            o.counters.add("forests", index.subsets().len() as u64);
            o.counters.add("updates", c.updates);
            o.counters.add("forests_touched", c.forests_touched);
            o.counters.add("vertices_recomputed", c.vertices_recomputed);
            o.counters.add("queries", c.queries);
            o.counters.add("query_work", c.query_work);
            Ok(o)
        }
        Command::Selftest { scale, fault } => {
            let config = SelftestConfig {
                seed: cli.seed,
                scale: *scale,
                fault: fault.map(|FaultArg::SkipList3Update| Fault::SkipList3Update),
                ..SelftestConfig::default()
            };
            let r = run_selftest(&config);
            let mut o = Output::new(r.to_text());
            for s in &r.suites {
                o.counters.add(&format!("{}.trials", s.name), s.trials as u64);
                o.counters.add(&format!("{}.capped", s.name), s.capped as u64);
            }
            o.exit = if r.passed() { Exit::Ok } else { Exit::Mismatch };
            Ok(o)
        }
        Command::Bench { grids, d0, script, max_subsets, max_arcs } => {
            let grids = parse_grids(grids).map_err(input)?;
            let commands = match script {
                Some(path) => parse_script(&read(path)?).map_err(input)?,
                None => default_script(),
            };
            let limits = BeLimits {
                max_subsets: *max_subsets,
                augment: AugmentLimits { max_arcs: *max_arcs, ..AugmentLimits::default() },
            };
            let mut runs = Vec::new();
            let mut notes = String::new();
            for (rows, cols) in grids {
                let run = bench_grid(rows, cols, *d0, &commands, limits).map_err(input)?;
                if let Err(cap) = &run.outcome {
                    notes.push_str(&format!("{}: {cap}\n", run.label()));
                }
                runs.push(run);
            }
            let capped = !notes.is_empty();
            let mut o = Output::new(report(&runs).to_text());
            if capped {
                eprint!("{notes}");
                o.exit = Exit::Cap;
            }
            Ok(o)
        }
    }
}

fn check_qelim(
    phi: &Formula,
    s: &Structure,
    g: &Graph,
    max_depth: usize,
    max_templates: usize,
    trace: Option<&Path>,
) -> Result<Output, Failure> {
    if !is_guarded(s, g).map_err(input)? {
        return Err(input("the structure is not guarded by the graph"));
    }
    let limits = QelimLimits { max_quantifier_depth: max_depth, max_templates, ..QelimLimits::default() };
    let red = reduce_sentence_with(phi, s, g, limits).map_err(|e| match e {
        QelimError::Cap(_) | QelimError::Augment(_) => Failure(Exit::Cap, e.to_string()),
        e => input(e),
    })?;
    if let Some(path) = trace {
        let mut text = red.trace.join("\n");
        text.push('\n');
        write(path, &text)?;
    }
    let mut o = Output::new(format!("{}\n", red.value));
    let st = red.stats;
    for (name, value) in [
        ("eliminations", st.eliminations),
        ("palettes", st.palettes),
        ("templates", st.templates),
        ("pieces", st.pieces),
        ("compositions", st.compositions),
        ("materialized", st.materialized),
        ("fresh_symbols", st.fresh_symbols),
        ("max_formula_size", st.max_formula_size),
        ("max_guard_edges", st.max_guard_edges),
        ("max_forest_height", st.max_forest_height),
    ] {
        o.counters.add(name, value as u64);
    }
    Ok(o)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(o) => {
            if !cli.quiet {
                print!("{}", o.stdout);
            }
            if cli.counters {
                eprint!("{}", o.counters.to_text());
            }
            ExitCode::from(o.exit.code() as u8)
        }
        Err(Failure(exit, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(exit.code() as u8)
        }
    }
}
