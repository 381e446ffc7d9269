//! Command-line front end: instance ingestion, solver invocation,
//! verification, axiom suite, LFMIS benchmark, structured stats output.
//!
//! Exit codes are the stable contract: 0 = solved and verified,
//! 1 = convergence criterion unsatisfied, 2 = cap exhausted,
//! 3 = input or configuration error.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::apps::coloring::{build_hypergraph_coloring, Hypergraph};
use crate::apps::ksat::{build_ksat, CnfInstance};
use crate::apps::packing::{build_packing, PackingInstance};
use crate::apps::rainbow::{
    build_rainbow_hamcycle, build_rainbow_matching_kn, build_rainbow_matching_kns, EdgeColoring,
};
use crate::apps::strong::{build_strong_coloring, BlockPartition};
use crate::apps::transversal::{build_transversal, ColorMatrix};
use crate::apps::{verify_solution, Application, Interner};
use crate::axiomtest::verify_space_suite;
use crate::engine::{
    default_resample_cap, default_round_cap, run_parallel, run_round_sequential, run_sequential,
    RunResult,
};
use crate::lfmis::lfmis_round_stats;
use crate::spaces::SpaceDescriptor;
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CRITERION: i32 = 1;
pub const EXIT_EXHAUSTED: i32 = 2;
pub const EXIT_INPUT: i32 = 3;

#[derive(Parser)]
#[command(name = "llll", about = "Constructive local lemma solver", version)]
pub struct Cli {
    /// Size of the worker thread pool (0 = one per CPU).
    #[arg(long, global = true, default_value_t = 0)]
    pub workers: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Seq,
    RoundSeq,
    Parallel,
}

#[derive(Args)]
pub struct SolveArgs {
    /// Instance file; format depends on the subcommand.
    #[arg(long)]
    pub input: PathBuf,
    /// Master random seed; fixes the entire run.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Criterion slack parameter.
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    #[arg(long, value_enum, default_value_t = Mode::Parallel)]
    pub mode: Mode,
    /// Round cap (round drivers) or resample cap (sequential driver);
    /// 0 uses a size-derived default.
    #[arg(long, default_value_t = 0)]
    pub max_rounds: usize,
    /// Refuse to solve when the criterion is unsatisfied.
    #[arg(long)]
    pub strict: bool,
    /// Write per-round statistics records to this file.
    #[arg(long)]
    pub stats: Option<PathBuf>,
    /// Only evaluate the convergence criterion; no solve.
    #[arg(long)]
    pub verify_only: bool,
}

#[derive(Subcommand)]
pub enum Command {
    /// Satisfy a uniform-width CNF formula (DIMACS format).
    Sat(SolveArgs),
    /// Non-monochromatically color a uniform hypergraph.
    Hypcolor {
        #[command(flatten)]
        args: SolveArgs,
        /// Number of colors.
        #[arg(long, default_value_t = 2)]
        colors: usize,
    },
    /// Find a transversal of a color matrix with no color repeated s times.
    Transversal {
        #[command(flatten)]
        args: SolveArgs,
        /// Forbidden repetition count s.
        #[arg(long, default_value_t = 2)]
        arity: usize,
    },
    /// Find a rainbow perfect matching of an edge-colored K_n or K_n^(s).
    RainbowMatching(SolveArgs),
    /// Find a rainbow Hamiltonian cycle of an edge-colored K_n.
    RainbowHamcycle(SolveArgs),
    /// Strongly color a graph partitioned into equal blocks.
    StrongColor(SolveArgs),
    /// Pack two uniform hypergraphs edge-disjointly into [n].
    Pack(SolveArgs),
    /// Run the resampling-oracle axiom suite on one space.
    VerifyOracle {
        /// Space family: vars, perm, matching, or hamcycle.
        #[arg(long)]
        space: String,
        /// Ground-set size.
        #[arg(long)]
        n: usize,
        /// Edge size for matchings.
        #[arg(long, default_value_t = 2)]
        s: usize,
        /// Domain size for variable spaces.
        #[arg(long, default_value_t = 2)]
        domain: usize,
    },
    /// Measure parallel LFMIS peeling rounds on random digraphs.
    LfmisBench {
        #[arg(long)]
        n: usize,
        /// Edge probability.
        #[arg(long, default_value_t = 0.1)]
        density: f64,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

pub fn run(cli: Cli) -> i32 {
    if cli.workers > 0 {
        // A global pool can only be installed once per process; ignore
        // a second attempt (tests drive `run` repeatedly).
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.workers).build_global();
    }
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT
        }
    }
}

fn dispatch(command: Command) -> Result<i32> {
    match command {
        Command::Sat(args) => {
            let cnf = parse_dimacs(&read(&args.input)?)?;
            solve(build_ksat(cnf, args.epsilon)?, &args)
        }
        Command::Hypcolor { args, colors } => {
            let h = parse_hypergraph(&read(&args.input)?)?;
            solve(build_hypergraph_coloring(h, colors, args.epsilon)?, &args)
        }
        Command::Transversal { args, arity } => {
            let m = parse_color_matrix(&read(&args.input)?)?;
            solve(build_transversal(m, arity, args.epsilon)?, &args)
        }
        Command::RainbowMatching(args) => {
            let coloring = parse_edge_coloring(&read(&args.input)?)?;
            let app = if coloring.s == 2 {
                build_rainbow_matching_kn(coloring, args.epsilon)?
            } else {
                build_rainbow_matching_kns(coloring, args.epsilon)?
            };
            solve(app, &args)
        }
        Command::RainbowHamcycle(args) => {
            let coloring = parse_edge_coloring(&read(&args.input)?)?;
            if coloring.s != 2 {
                return Err(Error::Input("Hamiltonian cycles need 2-edges".into()));
            }
            solve(build_rainbow_hamcycle(coloring, args.epsilon)?, &args)
        }
        Command::StrongColor(args) => {
            let part = parse_block_partition(&read(&args.input)?)?;
            solve(build_strong_coloring(part, args.epsilon)?, &args)
        }
        Command::Pack(args) => {
            let inst = parse_packing(&read(&args.input)?)?;
            solve(build_packing(inst, args.epsilon)?, &args)
        }
        Command::VerifyOracle { space, n, s, domain } => verify_oracle(&space, n, s, domain),
        Command::LfmisBench { n, density, trials, seed } => {
            let rounds = lfmis_round_stats(n, density, trials, seed);
            let mut sorted = rounds.clone();
            sorted.sort_unstable();
            println!(
                "lfmis n={n} density={density} trials={trials} median_rounds={} max_rounds={}",
                sorted[sorted.len() / 2],
                sorted.last().unwrap()
            );
            Ok(EXIT_OK)
        }
    }
}

fn solve(app: impl Application, args: &SolveArgs) -> Result<i32> {
    let cert = app.certificate();
    println!(
        "criterion: {} ({})",
        if cert.satisfied { "satisfied" } else { "unsatisfied" },
        cert.detail
    );
    if cert.satisfied {
        println!("expected work bound: {:.4}", cert.work_bound);
    }
    if args.verify_only {
        return Ok(if cert.satisfied { EXIT_OK } else { EXIT_CRITERION });
    }
    if !cert.satisfied && args.strict {
        println!("strict mode: not attempting a solve");
        return Ok(EXIT_CRITERION);
    }
    let p = app.problem();
    let (n, m) = (p.ground_size(), p.events.len());
    let started = Instant::now();
    let result = match args.mode {
        Mode::Seq => {
            let cap = if args.max_rounds > 0 { args.max_rounds } else { default_resample_cap(n, m) };
            run_sequential(p, args.seed, cap)
        }
        Mode::RoundSeq => {
            let cap =
                if args.max_rounds > 0 { args.max_rounds } else { default_round_cap(n, m, args.epsilon) };
            run_round_sequential(p, args.seed, cap)
        }
        Mode::Parallel => {
            let cap =
                if args.max_rounds > 0 { args.max_rounds } else { default_round_cap(n, m, args.epsilon) };
            run_parallel(p, args.seed, cap)?
        }
    };
    // Wall time goes to stdout only; the stats file must be a pure
    // function of (input, config, seed).
    println!("wall time: {:.3}s", started.elapsed().as_secs_f64());
    if let Some(path) = &args.stats {
        std::fs::write(path, render_stats(&result))
            .map_err(|e| Error::Input(format!("cannot write {}: {e}", path.display())))?;
    }
    if !result.success {
        println!(
            "cap exhausted after {} rounds / {} resamples",
            result.rounds.len(),
            result.resamples
        );
        return Ok(EXIT_EXHAUSTED);
    }
    if !verify_solution(&app, &result.state) {
        println!("internal error: solution failed verification");
        return Ok(EXIT_EXHAUSTED);
    }
    println!(
        "solved in {} rounds / {} resamples (verified)",
        result.rounds.len(),
        result.resamples
    );
    println!("solution: {}", app.render_solution(&result.state));
    Ok(if cert.satisfied { EXIT_OK } else { EXIT_CRITERION })
}

/// Line-delimited, machine-parseable stats: one record per round plus a
/// summary. Deliberately excludes wall time so bytes are reproducible.
fn render_stats(result: &RunResult) -> String {
    let mut out = String::new();
    for r in &result.rounds {
        writeln!(
            out,
            "round t={} violated={} resampled={} lfmis_rounds={}",
            r.t,
            r.violated,
            r.resampled.len(),
            r.lfmis_rounds
        )
        .unwrap();
    }
    writeln!(
        out,
        "summary rounds={} resamples={} seed={} success={}",
        result.rounds.len(),
        result.resamples,
        result.master,
        result.success
    )
    .unwrap();
    out
}

fn verify_oracle(space: &str, n: usize, s: usize, domain: usize) -> Result<i32> {
    let descriptor = match space {
        "vars" => SpaceDescriptor::uniform_variables(n, domain),
        "perm" => SpaceDescriptor::Permutation { n },
        "matching" => SpaceDescriptor::Matching { n, s },
        "hamcycle" => SpaceDescriptor::HamCycle { n },
        other => {
            return Err(Error::Input(format!(
                "unknown space {other:?}; expected vars, perm, matching, or hamcycle"
            )))
        }
    };
    let reports = verify_space_suite(&descriptor)?;
    let mut all_pass = true;
    for r in &reports {
        all_pass &= r.pass;
        println!(
            "{} {} {}{}",
            if r.pass { "PASS" } else { "FAIL" },
            r.axiom,
            r.subject,
            if r.detail.is_empty() { String::new() } else { format!(" ({})", r.detail) }
        );
    }
    println!("{} checks, all_pass={all_pass}", reports.len());
    Ok(if all_pass { EXIT_OK } else { EXIT_CRITERION })
}

// ---------------------------------------------------------------------
// Parsers.
// ---------------------------------------------------------------------

fn read(path: &PathBuf) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))
}

/// DIMACS CNF: comment lines start with c, a `p cnf <vars> <clauses>`
/// header, then clauses as 0-terminated literal lists (possibly spanning
/// lines).
pub fn parse_dimacs(text: &str) -> Result<CnfInstance> {
    let mut num_vars = None;
    let mut clauses = Vec::new();
    let mut current: Vec<i64> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if let Some(rest) = line.strip_prefix('p') {
            let fields: Vec<&str> = rest.split_whitespace().collect();
            if fields.len() != 3 || fields[0] != "cnf" {
                return Err(Error::Input(format!("line {}: bad DIMACS header", lineno + 1)));
            }
            num_vars = Some(parse_num::<usize>(fields[1], lineno)?);
            continue;
        }
        for tok in line.split_whitespace() {
            let lit = parse_num::<i64>(tok, lineno)?;
            if lit == 0 {
                if current.is_empty() {
                    return Err(Error::Input(format!("line {}: empty clause", lineno + 1)));
                }
                clauses.push(std::mem::take(&mut current));
            } else {
                current.push(lit);
            }
        }
    }
    if !current.is_empty() {
        clauses.push(current);
    }
    let num_vars = num_vars.ok_or_else(|| Error::Input("missing p cnf header".into()))?;
    Ok(CnfInstance { num_vars, clauses })
}

/// CSV of color labels; n is inferred from the row count.
pub fn parse_color_matrix(text: &str) -> Result<ColorMatrix> {
    let mut interner = Interner::new();
    let colors: Vec<Vec<usize>> = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.split(',').map(|c| interner.intern(c.trim())).collect())
        .collect();
    let m = ColorMatrix { n: colors.len(), colors };
    m.validate()?;
    Ok(m)
}

/// Whitespace-separated `v1 … vs color` lines; s is inferred from the
/// first line and n from the largest vertex.
pub fn parse_edge_coloring(text: &str) -> Result<EdgeColoring> {
    let mut interner = Interner::new();
    let mut assignments = Vec::new();
    let mut s = None;
    let mut n = 0;
    for (lineno, line) in text.lines().enumerate() {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        if toks.len() < 3 {
            return Err(Error::Input(format!(
                "line {}: expected `v1 … vs color`",
                lineno + 1
            )));
        }
        let edge_size = toks.len() - 1;
        if *s.get_or_insert(edge_size) != edge_size {
            return Err(Error::Input(format!("line {}: inconsistent edge size", lineno + 1)));
        }
        let edge: Vec<usize> = toks[..edge_size]
            .iter()
            .map(|t| parse_num::<usize>(t, lineno))
            .collect::<Result<_>>()?;
        n = n.max(edge.iter().max().copied().unwrap_or(0) + 1);
        assignments.push((edge, interner.intern(toks[edge_size])));
    }
    let s = s.ok_or_else(|| Error::Input("empty edge coloring".into()))?;
    EdgeColoring::new(n, s, assignments)
}

/// `p hyp <n> <m>` header followed by m whitespace-separated vertex
/// lists, one edge per line.
pub fn parse_hypergraph(text: &str) -> Result<Hypergraph> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (lineno, header) =
        lines.next().ok_or_else(|| Error::Input("empty hypergraph".into()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 4 || fields[0] != "p" || fields[1] != "hyp" {
        return Err(Error::Input(format!("line {}: expected `p hyp n m`", lineno + 1)));
    }
    let n = parse_num::<usize>(fields[2], lineno)?;
    let m = parse_num::<usize>(fields[3], lineno)?;
    let mut edges = Vec::with_capacity(m);
    for (lineno, line) in lines {
        let edge: Vec<usize> = line
            .split_whitespace()
            .map(|t| parse_num::<usize>(t, lineno))
            .collect::<Result<_>>()?;
        edges.push(edge);
    }
    if edges.len() != m {
        return Err(Error::Input(format!("header promises {m} edges, found {}", edges.len())));
    }
    Ok(Hypergraph { n, edges })
}

/// Two hypergraphs in `p hyp` format separated by a `%` line.
pub fn parse_packing(text: &str) -> Result<PackingInstance> {
    let parts: Vec<&str> = text.splitn(2, "\n%").collect();
    if parts.len() != 2 {
        return Err(Error::Input("expected two hypergraphs separated by a % line".into()));
    }
    let h1 = parse_hypergraph(parts[0])?;
    let h2 = parse_hypergraph(parts[1].trim_start_matches('%'))?;
    let n = h1.n.max(h2.n);
    Ok(PackingInstance { n, h1: h1.edges, h2: h2.edges })
}

/// `block v1 … vb` lines declaring the partition, then `u v` edge lines.
pub fn parse_block_partition(text: &str) -> Result<BlockPartition> {
    let mut blocks = Vec::new();
    let mut edges = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        if toks[0] == "block" {
            let b: Vec<usize> = toks[1..]
                .iter()
                .map(|t| parse_num::<usize>(t, lineno))
                .collect::<Result<_>>()?;
            blocks.push(b);
        } else if toks.len() == 2 {
            edges.push((parse_num(toks[0], lineno)?, parse_num(toks[1], lineno)?));
        } else {
            return Err(Error::Input(format!(
                "line {}: expected `block v1 … vb` or `u v`",
                lineno + 1
            )));
        }
    }
    Ok(BlockPartition { blocks, edges })
}

fn parse_num<T: std::str::FromStr>(tok: &str, lineno: usize) -> Result<T> {
    tok.parse()
        .map_err(|_| Error::Input(format!("line {}: bad number {tok:?}", lineno + 1)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimacs_roundtrip() {
        let cnf = parse_dimacs("c comment\np cnf 4 2\n1 -2 3 0\n-1 2\n4 0\n").unwrap();
        assert_eq!(cnf.num_vars, 4);
        assert_eq!(cnf.clauses, vec![vec![1, -2, 3], vec![-1, 2, 4]]);
        assert!(parse_dimacs("1 2 0\n").is_err(), "missing header");
    }

    #[test]
    fn color_matrix_interns_labels() {
        let m = parse_color_matrix("a,b\nb,a\n").unwrap();
        assert_eq!(m.colors, vec![vec![0, 1], vec![1, 0]]);
        assert!(parse_color_matrix("a,b\nc\n").is_err(), "ragged rows");
    }

    #[test]
    fn edge_coloring_infers_arity() {
        let c = parse_edge_coloring("0 1 red\n0 2 blue\n1 2 red\n").unwrap();
        assert_eq!((c.n, c.s), (3, 2));
        assert_eq!(c.max_multiplicity(), 2);
        assert!(parse_edge_coloring("0 1 red\n0 1 2 blue\n").is_err());
    }

    #[test]
    fn hypergraph_header_is_checked() {
        let h = parse_hypergraph("p hyp 5 2\n0 1 2\n2 3 4\n").unwrap();
        assert_eq!((h.n, h.edges.len()), (5, 2));
        assert!(parse_hypergraph("p hyp 5 3\n0 1 2\n").is_err(), "edge count mismatch");
    }

    #[test]
    fn packing_splits_on_percent() {
        let inst = parse_packing("p hyp 6 1\n0 1\n%\np hyp 6 2\n2 3\n4 5\n").unwrap();
        assert_eq!(inst.h1.len(), 1);
        assert_eq!(inst.h2.len(), 2);
        assert_eq!(inst.n, 6);
    }

    #[test]
    fn block_partition_format() {
        let p = parse_block_partition("block 0 1\nblock 2 3\n0 2\n1 3\n").unwrap();
        assert_eq!(p.blocks.len(), 2);
        assert_eq!(p.edges, vec![(0, 2), (1, 3)]);
    }
}
