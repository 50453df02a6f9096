//! Acceptance suite: end-to-end exactness, step preservation, budget
//! compliance, separator-graph preservation, algebra laws, the
//! series-parallel specialization, and breakpoint-growth measurement.
//! Every check is exact (rational arithmetic, zero tolerance); one test per
//! criterion, each printing a PASS line with its effective sample size.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use starmesh::decomposition::balanced_separator;
use starmesh::experiment::{run_experiment, ExperimentConfig, GeneratorKind};
use starmesh::generate::{
    layered, random_fifo_function, random_partial_ktree, series_parallel, GeneratedInstance,
};
use starmesh::oracle::{crosscheck, enumerate_paths_arrival, td_dijkstra};
use starmesh::rational::midpoint;
use starmesh::reduction::{
    contract_to_separator_graph, reduce_to_terminals, reduce_with_observer, Reduced, StepKind,
};
use starmesh::{rat_int, Arrival, Graph, PwlFunction, Rat};

/// Deterministic mixed-family instance: layered, series-parallel, and
/// partial k-tree in rotation, all connected and FIFO by construction.
fn mixed_instance(index: u64, max_n: usize, pieces: usize) -> GeneratedInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_5500 + index);
    let n = rng.gen_range(3..=max_n);
    match index % 3 {
        0 => {
            let w = rng.gen_range(1..=2);
            layered(&mut rng, n, w, pieces)
        }
        1 => series_parallel(&mut rng, n, pieces),
        _ => {
            let k = rng.gen_range(1..=4);
            random_partial_ktree(&mut rng, n, k, pieces)
        }
    }
}

fn budget_check(n: usize, width: usize, out: &Reduced) {
    assert_eq!(
        out.trace.star_mesh_count,
        n - 2,
        "connected reductions remove exactly n-2 vertices by star-mesh"
    );
    let degree_cap = width + 1;
    for step in &out.trace.steps {
        if step.kind == StepKind::StarMesh {
            let d = step.degree.expect("star-mesh steps carry a degree");
            assert!(d <= degree_cap, "star degree {d} exceeds width+1 = {degree_cap}");
        }
    }
    assert!(out.trace.max_star_degree <= degree_cap);
    let parallel_cap = (n - 2) * (degree_cap * width / 2).max(1);
    assert!(
        out.trace.parallel_count <= parallel_cap,
        "parallel count {} exceeds (n-2)*C(w+1,2) = {parallel_cap}",
        out.trace.parallel_count
    );
}

#[test]
fn criterion_oracle_equivalence() {
    let mut checked = 0usize;
    for index in 0..200u64 {
        let inst = mixed_instance(index, 10, 3);
        let g = &inst.graph;
        assert!(g.is_connected());
        assert!(g.validate().is_empty());
        let (s, d) = g.terminals();
        let out = reduce_to_terminals(g, &inst.decomposition)
            .unwrap_or_else(|e| panic!("instance {index}: {e}"));
        let truth_fwd = enumerate_paths_arrival(g, s, d).unwrap();
        let truth_bwd = enumerate_paths_arrival(g, d, s).unwrap();
        assert_eq!(out.forward, truth_fwd, "instance {index}: forward function differs");
        assert_eq!(out.backward, truth_bwd, "instance {index}: backward function differs");
        // the crosscheck harness agrees as well
        let report = crosscheck(&out.forward, g, &[]).unwrap();
        assert!(report.is_empty(), "instance {index}: {:?}", report.mismatches);
        checked += 1;
    }
    println!("acceptance: oracle equivalence PASS ({checked} instances, exact equality)");
}

#[test]
fn criterion_step_preservation() {
    let mut checked = 0usize;
    let mut steps_total = 0usize;
    for index in 0..50u64 {
        let inst = mixed_instance(index, 8, 3);
        let g = &inst.graph;
        let (s, d) = g.terminals();
        let est = enumerate_paths_arrival(g, s, d).unwrap();

        // grid: every breakpoint and midpoint of the estimate, 0, one point
        // past the end, and 5 random departure times
        let mut grid: Vec<Rat> = vec![rat_int(0)];
        let bps: Vec<Rat> = est.breakpoints().into_iter().map(|b| b.t).collect();
        for w in bps.windows(2) {
            grid.push(midpoint(&w[0], &w[1]));
        }
        grid.push(bps.last().map_or(rat_int(1), |last| last + rat_int(1)));
        grid.extend(bps);
        let mut rng = ChaCha8Rng::seed_from_u64(0x57E9 + index);
        for _ in 0..5 {
            grid.push(starmesh::rat(rng.gen_range(0..400), rng.gen_range(1..5)));
        }
        grid.sort();
        grid.dedup();

        let baseline: Vec<Arrival> =
            grid.iter().map(|t| td_dijkstra(g, s, t).unwrap()[&d].clone()).collect();
        for (t, want) in grid.iter().zip(&baseline) {
            assert_eq!(&est.eval(t), want, "oracle self-consistency at t = {t}");
        }

        let mut local_steps = 0usize;
        let mut observer = |current: &Graph, _step: &starmesh::reduction::ReductionStep| {
            local_steps += 1;
            for (t, want) in grid.iter().zip(&baseline) {
                let arrivals = td_dijkstra(current, s, t).map_err(|e| e.to_string())?;
                if &arrivals[&d] != want {
                    return Err(format!(
                        "s-d arrival changed at t = {t}: {} vs {}",
                        arrivals[&d], want
                    ));
                }
            }
            Ok(())
        };
        let out = reduce_with_observer(g, &inst.decomposition, Some(&mut observer))
            .unwrap_or_else(|e| panic!("instance {index}: {e}"));
        assert_eq!(out.forward, est);
        steps_total += local_steps;
        checked += 1;
    }
    println!(
        "acceptance: step preservation PASS ({checked} instances, {steps_total} transformations checked exactly)"
    );
}

#[test]
fn criterion_transformation_budgets() {
    let mut checked = 0usize;
    for index in 0..120u64 {
        let inst = mixed_instance(index, 10, 2);
        let n = inst.graph.vertex_count();
        let width = inst.decomposition.width();
        let out = reduce_to_terminals(&inst.graph, &inst.decomposition).unwrap();
        assert_eq!(out.width, width, "make_nice must not change the width");
        budget_check(n, width, &out);
        checked += 1;
    }
    println!("acceptance: transformation budgets PASS ({checked} reductions, star_mesh = n-2, degrees <= w+1)");
}

#[test]
fn criterion_claim1_separator_graph() {
    let mut checked = 0usize;
    let mut index = 0u64;
    while checked < 20 {
        index += 1;
        let mut rng = ChaCha8Rng::seed_from_u64(0xC1A1_0000 + index);
        let n = rng.gen_range(10..=14);
        let inst = match index % 3 {
            0 => layered(&mut rng, n, 1, 2),
            1 => series_parallel(&mut rng, n, 2),
            _ => random_partial_ktree(&mut rng, n, 2, 2),
        };
        let g = &inst.graph;
        let td = &inst.decomposition;
        let w = td.width();
        if g.vertex_count() <= 2 * w + 2 {
            continue;
        }
        let sep = match balanced_separator(g, td) {
            Ok(sep) => sep,
            Err(_) => continue,
        };
        let contracted =
            contract_to_separator_graph(g, &sep.separator, &sep.side_a, &sep.side_b).unwrap();
        let original = reduce_to_terminals(g, td).unwrap();
        let via_separator = reduce_to_terminals(
            &contracted,
            &starmesh::decomposition::heuristic_decomposition(&contracted),
        )
        .unwrap();
        assert_eq!(
            via_separator.forward, original.forward,
            "instance {index}: separator graph changed the end-to-end function"
        );
        assert_eq!(
            via_separator.forward.breakpoint_count(),
            original.forward.breakpoint_count()
        );
        checked += 1;
    }
    println!("acceptance: separator-graph preservation PASS ({checked} instances, functions and breakpoint counts equal)");
}

#[test]
fn criterion_pwl_property_suite() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x9019);
    let pairs = 1000usize;
    for case in 0..pairs {
        let pieces = rng.gen_range(1..=4);
        let f = random_fifo_function(&mut rng, pieces);
        let g_pieces = rng.gen_range(1..=4);
        let g = random_fifo_function(&mut rng, g_pieces);
        let h_pieces = rng.gen_range(1..=3);
        let h = random_fifo_function(&mut rng, h_pieces);

        let fb = f.breakpoint_count();
        let gb = g.breakpoint_count();

        // pointwise minimum on the breakpoint+midpoint grid of the result
        let min_fg = f.minimum(&g);
        for t in grid_of(&min_fg) {
            let want = f.eval(&t).min(g.eval(&t));
            assert_eq!(min_fg.eval(&t), want, "case {case}: min mismatch at t = {t}");
        }
        assert!(min_fg.breakpoint_count() <= 2 * (fb + gb) + 1, "case {case}: min budget");
        assert!(min_fg.is_fifo(), "case {case}: min closure");

        // pointwise composition g∘f on its own grid
        let comp = g.compose(&f);
        for t in grid_of(&comp) {
            let inner = f.eval(&t).expect_finite("random functions are finite");
            assert_eq!(comp.eval(&t), g.eval(&inner), "case {case}: compose mismatch at t = {t}");
        }
        assert!(comp.breakpoint_count() <= fb + gb, "case {case}: compose budget");
        assert!(comp.is_fifo(), "case {case}: compose closure");

        // left distributivity of composition over minimum
        let left = h.compose(&min_fg);
        let right = h.compose(&f).minimum(&h.compose(&g));
        assert_eq!(left, right, "case {case}: left distributivity");

        // associativity of composition
        let assoc_a = h.compose(&g).compose(&f);
        let assoc_b = h.compose(&g.compose(&f));
        assert_eq!(assoc_a, assoc_b, "case {case}: associativity");

        // canonical form is stable under rebuilding
        let rebuilt = PwlFunction::from_pieces(min_fg.pieces().to_vec()).unwrap();
        assert_eq!(rebuilt, min_fg, "case {case}: canonicalize idempotent");
    }
    println!("acceptance: pwl property suite PASS ({pairs} random FIFO pairs, exact)");
}

fn grid_of(f: &PwlFunction) -> Vec<Rat> {
    let mut grid = vec![rat_int(0)];
    let bps: Vec<Rat> = f.breakpoints().into_iter().map(|b| b.t).collect();
    for w in bps.windows(2) {
        grid.push(midpoint(&w[0], &w[1]));
    }
    grid.push(bps.last().map_or(rat_int(1), |last| last + rat_int(1)));
    grid.extend(bps);
    grid.sort();
    grid.dedup();
    grid
}

#[test]
fn criterion_series_parallel_specialization() {
    let mut checked = 0usize;
    for index in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5EA1 + index);
        let n = rng.gen_range(3..=14);
        let inst = series_parallel(&mut rng, n, 2);
        assert!(inst.decomposition.width() <= 2);
        let out = reduce_to_terminals(&inst.graph, &inst.decomposition).unwrap();
        assert!(
            out.trace.max_star_degree <= 3,
            "instance {index}: degree {} exceeds the wye-delta catalog",
            out.trace.max_star_degree
        );
        let truth = enumerate_paths_arrival(
            &inst.graph,
            inst.graph.terminals().0,
            inst.graph.terminals().1,
        );
        if let Ok(truth) = truth {
            assert_eq!(out.forward, truth);
        }
        checked += 1;
    }
    println!("acceptance: series-parallel specialization PASS ({checked} instances, star degrees <= 3)");
}

#[test]
fn criterion_growth_measurement() {
    // layered families at fixed w: finite breakpoint counts, rows reported
    // in monotone n order, the small end cross-checked against the oracle
    let sweep: Vec<usize> = vec![10, 20, 30, 40, 50, 60];
    for w in [2usize, 3] {
        let mut rows = Vec::new();
        for &n in &sweep {
            let cfg = ExperimentConfig {
                generator: GeneratorKind::Layered,
                n,
                width: w,
                seed: 7,
                pieces_per_edge: 2,
            };
            let row = run_experiment(&cfg).unwrap();
            assert_eq!(row.n, n);
            rows.push(row);
        }
        for pair in rows.windows(2) {
            assert!(pair[0].n < pair[1].n, "rows must be reported in monotone n order");
        }
        // n = 10 cross-check: the reduced function matches the oracle, so
        // its breakpoint count cannot exceed the oracle count
        let cfg = ExperimentConfig {
            generator: GeneratorKind::Layered,
            n: 10,
            width: w,
            seed: 7,
            pieces_per_edge: 2,
        };
        let inst = cfg.instance();
        let out = reduce_to_terminals(&inst.graph, &inst.decomposition).unwrap();
        let truth = enumerate_paths_arrival(
            &inst.graph,
            inst.graph.terminals().0,
            inst.graph.terminals().1,
        )
        .unwrap();
        assert_eq!(out.forward, truth);
        assert!(out.forward.breakpoint_count() <= truth.breakpoint_count());
    }

    // chain family (w = 1): series compositions only, so the end-to-end
    // breakpoint count folds within K, the total piece count
    for &n in &sweep {
        for seed in 0..3u64 {
            let cfg = ExperimentConfig {
                generator: GeneratorKind::Layered,
                n,
                width: 1,
                seed,
                pieces_per_edge: 3,
            };
            let row = run_experiment(&cfg).unwrap();
            assert!(
                row.breakpoints <= row.total_pieces,
                "chain breakpoints {} exceed K = {}",
                row.breakpoints,
                row.total_pieces
            );
            assert_eq!(row.star_mesh_count, n - 2);
        }
    }
    println!("acceptance: growth measurement PASS (layered w in {{2,3}}, n in 10..=60; chain K-budget exact)");
}
