//! Acceptance gate: one test per criterion, each printing a single
//! PASS/FAIL line (run with `--nocapture` to see them live; failures
//! also show the line in the captured output).

use std::process::Command as Proc;

use llll::apps::ksat::{build_ksat, random_bounded_ksat};
use llll::apps::rainbow::{
    build_rainbow_hamcycle, build_rainbow_matching_kn, build_rainbow_matching_kns,
    random_edge_coloring,
};
use llll::apps::transversal::{build_transversal, random_color_matrix};
use llll::apps::{verify_solution, Application};
use llll::axiomtest::{standard_spaces, suite_atoms, verify_lifting, verify_space_suite};
use llll::engine::{
    couple_check, default_round_cap, run_parallel, run_sequential, Problem,
};
use llll::lfmis::{lfmis_parallel, lfmis_sequential, random_digraph, random_order, Digraph};
use llll::rng::{stream, TAG_MISC};
use llll::spaces::{atoms_dependent, SpaceDescriptor};

fn report(criterion: usize, name: &str, pass: bool) {
    println!("criterion {criterion} ({name}): {}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {criterion} ({name}) failed");
}

#[test]
fn criterion_1_axiom_suite_exact() {
    let mut pass = true;
    for space in standard_spaces() {
        let reports = verify_space_suite(&space).unwrap();
        for r in &reports {
            if !r.pass {
                eprintln!("  FAIL {} {} ({})", r.axiom, r.subject, r.detail);
                pass = false;
            }
        }
    }
    report(1, "axiom suite exact on all standard spaces", pass);
}

#[test]
fn criterion_2_lifting_suite() {
    let spaces = [
        SpaceDescriptor::Permutation { n: 4 },
        SpaceDescriptor::Matching { n: 6, s: 2 },
        SpaceDescriptor::HamCycle { n: 5 },
    ];
    let mut pass = true;
    for space in &spaces {
        let atoms = suite_atoms(space);
        let mut pairs = Vec::new();
        for (i, a) in atoms.iter().enumerate() {
            for b in &atoms[i + 1..] {
                if !atoms_dependent(a, b) {
                    pairs.push((a.clone(), b.clone()));
                }
            }
        }
        assert!(!pairs.is_empty());
        let reports = verify_lifting(space, &pairs).unwrap();
        for r in &reports {
            if !r.pass {
                eprintln!("  FAIL {} {} ({})", r.axiom, r.subject, r.detail);
                pass = false;
            }
        }
    }
    report(2, "two-atom lifted events satisfy the axioms", pass);
}

#[test]
fn criterion_3_driver_coupling() {
    let mut pass = true;
    let mut check_instance = |name: &str, problem: &Problem, eps: f64| {
        let cap = default_round_cap(problem.ground_size(), problem.events.len(), eps);
        for master in 0..50 {
            if !couple_check(problem, master, cap).unwrap() {
                eprintln!("  coupling broke: {name}, master {master}");
                pass = false;
            }
        }
    };
    let latin = build_transversal(
        random_color_matrix(20, 2, &mut stream(101, TAG_MISC, 0, 0)),
        2,
        0.1,
    )
    .unwrap();
    check_instance("latin transversal n=20", latin.problem(), 0.1);
    // Occurrence 14 needs the ε→0 cap (≈14.2); ε=0.1 would demand ≤12.
    let sat = build_ksat(
        random_bounded_ksat(100, 7, 14, &mut stream(102, TAG_MISC, 0, 0)),
        1e-9,
    )
    .unwrap();
    assert!(sat.certificate().satisfied);
    check_instance("k-SAT k=7", sat.problem(), 0.1);
    let matching = build_rainbow_matching_kn(
        random_edge_coloring(20, 2, 2, &mut stream(103, TAG_MISC, 0, 0)),
        0.1,
    )
    .unwrap();
    check_instance("rainbow matching n=20", matching.problem(), 0.1);
    report(3, "parallel and round-sequential drivers agree exactly", pass);
}

/// A directed path plus back-pointers: the worst case for sequential
/// dependency chains in the peeling argument.
fn adversarial_chain(n: usize, back: bool) -> Digraph {
    let mut g = Digraph::new(n);
    for v in 0..n - 1 {
        g.add_edge(v, v + 1);
        if back {
            g.add_edge(v + 1, v);
        }
    }
    g
}

#[test]
fn criterion_4_lfmis_equivalence_and_rounds() {
    let mut pass = true;
    let mut cases = 0;
    for (ni, &n) in [50usize, 200, 500].iter().enumerate() {
        for (di, &density) in [0.01, 0.1, 0.5].iter().enumerate() {
            for trial in 0..23u64 {
                let mut r = stream(104, TAG_MISC, (ni * 3 + di) as u64, trial);
                let g = random_digraph(n, density, &mut r);
                let order = random_order(n, &mut r);
                let seq = lfmis_sequential(&g, &order);
                let (par, _) = lfmis_parallel(&g, &order);
                if seq != par {
                    pass = false;
                }
                cases += 1;
            }
        }
    }
    assert!(cases >= 200);
    for n in [64usize, 257] {
        for back in [false, true] {
            let g = adversarial_chain(n, back);
            for (o, order) in [
                (0..n).collect::<Vec<_>>(),
                (0..n).rev().collect(),
                random_order(n, &mut stream(105, TAG_MISC, n as u64, back as u64)),
            ]
            .iter()
            .enumerate()
            {
                let seq = lfmis_sequential(&g, order);
                let (par, _) = lfmis_parallel(&g, order);
                if seq != par {
                    eprintln!("  chain n={n} back={back} order#{o} disagrees");
                    pass = false;
                }
            }
        }
    }
    // Round growth: median peeling rounds within 8(log₂ n)² on sparse
    // random digraphs with expected out-degree 8.
    for (i, &n) in [1usize << 10, 1 << 12, 1 << 14].iter().enumerate() {
        let mut rounds: Vec<usize> = (0..50u64)
            .map(|t| {
                let mut r = stream(106, TAG_MISC, i as u64, t);
                let g = random_digraph(n, 8.0 / n as f64, &mut r);
                let order = random_order(n, &mut r);
                lfmis_parallel(&g, &order).1
            })
            .collect();
        rounds.sort_unstable();
        let median = rounds[rounds.len() / 2];
        let bound = (8.0 * (n as f64).log2().powi(2)) as usize;
        if median > bound {
            eprintln!("  n={n}: median {median} rounds exceeds bound {bound}");
            pass = false;
        }
    }
    report(4, "parallel LFMIS is exact and shallow", pass);
}

/// Runs one app instance per seed and demands ≥95% verified successes.
fn success_rate(
    name: &str,
    seeds: u64,
    mut run_one: impl FnMut(u64) -> bool,
) -> bool {
    let ok = (0..seeds).filter(|&s| run_one(s)).count();
    let pass = ok * 20 >= seeds as usize * 19;
    if !pass {
        eprintln!("  {name}: only {ok}/{seeds} verified successes");
    }
    pass
}

#[test]
fn criterion_5_applications_at_desk_scale() {
    let eps = 0.1;
    let mut pass = true;

    pass &= success_rate("latin transversal n=100 Δ=10", 20, |i| {
        let m = random_color_matrix(100, 10, &mut stream(110, TAG_MISC, i, 0));
        let app = build_transversal(m, 2, eps).unwrap();
        assert!(app.certificate().satisfied);
        let p = app.problem();
        let cap = default_round_cap(p.ground_size(), p.events.len(), eps);
        let r = run_parallel(p, i, cap).unwrap();
        r.success && verify_solution(&app, &r.state)
    });

    pass &= success_rate("rainbow matching K_100 Δ=10", 20, |i| {
        let c = random_edge_coloring(100, 2, 10, &mut stream(111, TAG_MISC, i, 0));
        let app = build_rainbow_matching_kn(c, eps).unwrap();
        assert!(app.certificate().satisfied);
        let p = app.problem();
        let cap = default_round_cap(p.ground_size(), p.events.len(), eps);
        let r = run_parallel(p, i, cap).unwrap();
        r.success && verify_solution(&app, &r.state)
    });

    pass &= success_rate("rainbow hamcycle K_100 Δ=2", 20, |i| {
        let c = random_edge_coloring(100, 2, 2, &mut stream(112, TAG_MISC, i, 0));
        let app = build_rainbow_hamcycle(c, eps).unwrap();
        assert!(app.certificate().satisfied);
        let p = app.problem();
        let cap = default_round_cap(p.ground_size(), p.events.len(), eps);
        let r = run_parallel(p, i, cap).unwrap();
        r.success && verify_solution(&app, &r.state)
    });

    pass &= success_rate("k-SAT k=7 occurrences ≤ 14", 20, |i| {
        let cnf = random_bounded_ksat(200, 7, 14, &mut stream(113, TAG_MISC, i, 0));
        // Occurrence 14 is within the cap only as ε→0.
        let app = build_ksat(cnf, 1e-9).unwrap();
        assert!(app.certificate().satisfied);
        let p = app.problem();
        let cap = default_round_cap(p.ground_size(), p.events.len(), eps);
        let r = run_parallel(p, i, cap).unwrap();
        r.success && verify_solution(&app, &r.state)
    });

    pass &= success_rate("rainbow matching K_12^(3), sequential", 20, |i| {
        let c = random_edge_coloring(12, 3, 2, &mut stream(114, TAG_MISC, i, 0));
        let app = build_rainbow_matching_kns(c, eps).unwrap();
        assert!(app.certificate().satisfied, "{}", app.certificate().detail);
        let r = run_sequential(app.problem(), i, 10_000);
        r.success && verify_solution(&app, &r.state)
    });

    report(5, "applications solved and verified at desk scale", pass);
}

#[test]
fn criterion_6_round_scaling() {
    let eps = 0.2;
    let mut medians = Vec::new();
    let mut pass = true;
    for (si, &m) in [1_000usize, 4_000, 16_000].iter().enumerate() {
        let mut rounds: Vec<usize> = (0..20u64)
            .map(|i| {
                let cnf =
                    random_bounded_ksat(m / 2, 7, 14, &mut stream(120, TAG_MISC, si as u64, i));
                assert!((cnf.clauses.len() as f64) >= 0.9 * m as f64);
                let app = build_ksat(cnf, eps).unwrap();
                let p = app.problem();
                let cap = default_round_cap(p.ground_size(), p.events.len(), eps);
                let r = run_parallel(p, i, cap).unwrap();
                if !r.success {
                    pass = false;
                }
                r.rounds.len()
            })
            .collect();
        rounds.sort_unstable();
        medians.push(rounds[rounds.len() / 2]);
    }
    eprintln!("  median parallel rounds per size: {medians:?}");
    // Logarithmic growth: each 4× in m may add at most a constant number
    // of rounds.
    for w in medians.windows(2) {
        if w[1] > w[0] + 4 {
            pass = false;
        }
    }
    report(6, "parallel rounds grow additively per 4x event count", pass);
}

#[test]
fn criterion_7_cli_determinism_across_workers() {
    let bin = env!("CARGO_BIN_EXE_llll");
    let dir = std::env::temp_dir().join(format!("llll-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();

    // A Δ=2 transversal instance as CSV.
    let matrix = random_color_matrix(20, 2, &mut stream(130, TAG_MISC, 0, 0));
    let csv: String = matrix
        .colors
        .iter()
        .map(|row| row.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(","))
        .collect::<Vec<_>>()
        .join("\n");
    let input = dir.join("colors.csv");
    std::fs::write(&input, csv).unwrap();

    let mut pass = true;
    let mut outputs = Vec::new();
    for workers in [1usize, 4] {
        let stats = dir.join(format!("stats-{workers}.txt"));
        let out = Proc::new(bin)
            .args([
                "--workers",
                &workers.to_string(),
                "transversal",
                "--input",
                input.to_str().unwrap(),
                "--seed",
                "7",
                "--mode",
                "parallel",
                "--stats",
                stats.to_str().unwrap(),
            ])
            .output()
            .unwrap();
        if !out.status.success() {
            eprintln!("  workers={workers}: exit {:?}", out.status.code());
            pass = false;
        }
        // Everything except the wall-time line is part of the
        // determinism contract; the stats file has no timing at all.
        let stdout = String::from_utf8_lossy(&out.stdout)
            .lines()
            .filter(|l| !l.starts_with("wall time"))
            .collect::<Vec<_>>()
            .join("\n");
        outputs.push((stdout, std::fs::read(&stats).unwrap()));
    }
    if outputs[0] != outputs[1] {
        eprintln!("  outputs differ between 1 and 4 workers");
        pass = false;
    }
    std::fs::remove_dir_all(&dir).ok();
    report(7, "CLI output is byte-identical across worker counts", pass);
}
