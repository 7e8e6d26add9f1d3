use kinex::exchange::{ExchangeTopology, Protocol};
use kinex::experiments::{run_phase_scan, run_scan_cell, run_transition, Context, PhaseDiagram, RuleKind, ScanGrid, Setup};
use kinex::stats::{Verdict, SIGNIFICANCE_LEVELS};

fn grid(relax: u64) -> ScanGrid {
    ScanGrid {
        c1_values: vec![0.0, 0.3, 0.5, 0.7, 0.9],
        c2_values: vec![0.1, 0.3, 1.0, 3.0, 10.0, 30.0],
        rule_kind: RuleKind::ExpSaturating,
        setup: Setup {
            n_agents: 500,
            topology: ExchangeTopology::Global,
            initial: Default::default(),
            protocol: Protocol {
                relax_sweeps: relax,
                sample_count: 20,
                sample_gap: 10,
            },
        },
        replicas_per_cell: 1,
    }
}

fn verdicts(d: &PhaseDiagram, alpha: f64) -> Vec<Verdict> {
    d.verdict_matrix(alpha).into_iter().flatten().map(Option::unwrap).collect()
}

#[test]
fn scan_is_deterministic_and_thread_count_independent() {
    let g = grid(200);
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let a = one.install(|| run_phase_scan(&Context::new(11, 200), &g).unwrap());
    let b = four.install(|| run_phase_scan(&Context::new(11, 200), &g).unwrap());
    for (x, y) in a.cells.iter().zip(&b.cells) {
        assert_eq!(x.result.as_ref().unwrap().replicas, y.result.as_ref().unwrap().replicas);
    }
}

#[test]
fn any_cell_reruns_alone() {
    let mut g = grid(100);
    g.replicas_per_cell = 3;
    let ctx = Context::new(12, 200);
    let full = run_phase_scan(&ctx, &g).unwrap();
    // a fresh context, as when only this cell is re-run later
    let ctx = Context::new(12, 200);
    for (row, col) in [(4, 3), (0, 0), (2, 5)] {
        let alone = run_scan_cell(&ctx, &g, row, col).unwrap();
        let cell = full.cell(row, col).result.as_ref().unwrap();
        assert_eq!(alone.replicas, cell.replicas);
        assert_eq!(alone.dip, cell.dip);
    }
}

#[test]
fn verdict_structure() {
    let d = run_phase_scan(&Context::new(13, 200), &grid(200)).unwrap();
    for c in &d.cells {
        let r = &c.result.as_ref().unwrap().dip;
        for (i, &a) in SIGNIFICANCE_LEVELS.iter().enumerate() {
            assert_eq!(r.verdicts[i], r.verdict_at(a));
        }
        // nested levels
        if r.is_bimodal_at(0.01) {
            assert!(r.is_bimodal_at(0.05) && r.is_bimodal_at(0.10));
        }
        if c.c1 == 0.0 {
            assert!(!r.is_bimodal_at(0.10), "c1 = 0 cell at c2 = {} rejected", c.c2);
        }
    }
}

/// Doubling the relaxation keeps the 5% verdict in at least 95% of cells.
#[test]
fn relaxation_is_long_enough() {
    let short = run_phase_scan(&Context::new(14, 200), &grid(500)).unwrap();
    let long = run_phase_scan(&Context::new(14, 200), &grid(1000)).unwrap();
    let (a, b) = (verdicts(&short, 0.05), verdicts(&long, 0.05));
    let same = a.iter().zip(&b).filter(|(x, y)| x == y).count();
    assert!(same as f64 >= 0.95 * a.len() as f64, "{same} of {} cells agree", a.len());
}

#[test]
fn transition_reuses_one_quenched_draw() {
    let setup = Setup {
        n_agents: 200,
        topology: ExchangeTopology::Binary,
        initial: Default::default(),
        protocol: Protocol {
            relax_sweeps: 50,
            sample_count: 20,
            sample_gap: 5,
        },
    };
    let ctx = Context::new(15, 100);
    let a = run_transition(&ctx, &[0.0, 1.0], &setup).unwrap();
    let b = run_transition(&ctx, &[1.0], &setup).unwrap();
    assert_eq!(a.quenched_c1, b.quenched_c1);
    assert!(a.quenched_c1.iter().all(|&c| (0.0..1.0).contains(&c)));
    assert_eq!(a.rows.len(), 2);
    // c2 = 0 switches retention off whatever the quenched c1
    assert!(a.rows[0].population.ks_exponential < 0.05);
}
