mod common;

use common::{dip_lp, multisets};
use kinex::stats::dip_sorted;
use kinex::RngStream;

fn check(sample: &[f64]) {
    let fast = dip_sorted(sample).unwrap();
    let lp = dip_lp(sample);
    assert!((fast - lp).abs() < 1e-9, "fast {fast} lp {lp} for {sample:?}");
}

#[test]
fn multiset_count() {
    // C(5 + 8, 8) - 1 non-empty multisets of size <= 8 over 5 points
    assert_eq!(multisets(&[0.0, 1.0, 2.0, 3.0, 4.0], 8).len(), 1286);
}

#[test]
fn regular_grid_with_ties() {
    for s in multisets(&[0.0, 1.0, 2.0, 3.0, 4.0], 8) {
        check(&s);
    }
}

#[test]
fn irregular_grids_with_ties() {
    let mut rng = RngStream::new(11);
    for _ in 0..4 {
        let mut grid: Vec<f64> = (0..5).map(|_| rng.uniform()).collect();
        grid.sort_by(f64::total_cmp);
        for s in multisets(&grid, 7) {
            check(&s);
        }
    }
}

#[test]
fn continuous_samples() {
    let mut rng = RngStream::new(12);
    for n in 2..40 {
        for _ in 0..5 {
            let mut s: Vec<f64> = (0..n)
                .map(|_| if rng.uniform() < 0.5 { rng.exponential() } else { 4.0 + rng.uniform() })
                .collect();
            s.sort_by(f64::total_cmp);
            check(&s);
        }
    }
}
