#![allow(dead_code)]

use minilp::{ComparisonOp, OptimizationDirection, Problem, Variable};

fn constrain<const K: usize>(p: &mut Problem, terms: [(Variable, f64); K], op: ComparisonOp, rhs: f64) {
    let mut t = terms.to_vec();
    t.sort_by_key(|(v, _)| v.idx());
    let mut merged: Vec<(Variable, f64)> = Vec::new();
    for (v, c) in t {
        match merged.last_mut() {
            Some((lv, lc)) if *lv == v => *lc += c,
            _ => merged.push((v, c)),
        }
    }
    p.add_constraint(merged, op, rhs);
}

/// Dip by direct minimisation over unimodal CDFs, one LP per candidate mode
/// location. Works in count units: `G` and the ECDF are scaled by `n`.
///
/// Tied values are read as an infinitesimally spread cluster, so the mode
/// cluster may be crossed by a steep linear piece from `a` to `b`.
pub fn dip_lp(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    assert!(n > 0);
    if n == 1 {
        return 0.25;
    }
    let (lo, hi) = (sorted[0], sorted[n - 1]);
    if lo == hi {
        return 0.5 / n as f64;
    }
    let mut v: Vec<f64> = Vec::new();
    let mut cum: Vec<f64> = Vec::new();
    for (i, &x) in sorted.iter().enumerate() {
        let x = (x - lo) / (hi - lo);
        if v.last() == Some(&x) {
            *cum.last_mut().unwrap() = (i + 1) as f64;
        } else {
            v.push(x);
            cum.push((i + 1) as f64);
        }
    }
    let k = v.len();
    let prev = |i: usize| if i == 0 { 0.0 } else { cum[i - 1] };
    (0..k)
        .map(|m| mode_lp(&v, &cum, m, &prev))
        .fold(f64::INFINITY, f64::min)
        / n as f64
}

fn mode_lp(v: &[f64], cum: &[f64], m: usize, prev: &dyn Fn(usize) -> f64) -> f64 {
    use ComparisonOp::{Ge, Le};
    let k = v.len();
    let n = cum[k - 1];
    let mut p = Problem::new(OptimizationDirection::Minimize);
    let d = p.add_var(1.0, (0.0, f64::INFINITY));
    let g: Vec<_> = (0..k).map(|_| p.add_var(0.0, (0.0, n))).collect();
    let b = p.add_var(0.0, (0.0, n));
    for i in 0..k {
        if i == m {
            // a = g[m]: first point of the mode cluster
            constrain(&mut p, [(g[i], 1.0), (d, 1.0)], Ge, prev(i) + 1.0);
            constrain(&mut p, [(g[i], 1.0), (d, -1.0)], Le, prev(i));
            constrain(&mut p, [(b, 1.0), (d, 1.0)], Ge, cum[i]);
            constrain(&mut p, [(b, 1.0), (d, -1.0)], Le, cum[i] - 1.0);
            constrain(&mut p, [(b, 1.0), (g[i], -1.0)], Ge, 0.0);
        } else {
            constrain(&mut p, [(g[i], 1.0), (d, 1.0)], Ge, cum[i]);
            constrain(&mut p, [(g[i], 1.0), (d, -1.0)], Le, prev(i));
        }
    }
    // value entering and leaving each knot
    let left = |i: usize| g[i];
    let right = |i: usize| if i == m { b } else { g[i] };
    for i in 0..k.saturating_sub(1) {
        constrain(&mut p, [(left(i + 1), 1.0), (right(i), -1.0)], Ge, 0.0);
    }
    for i in 1..k.saturating_sub(1) {
        let (h0, h1) = (v[i] - v[i - 1], v[i + 1] - v[i]);
        // slope(i, i+1) - slope(i-1, i), scaled by h0 * h1
        let expr = [(left(i + 1), h0), (right(i), -h0), (left(i), -h1), (right(i - 1), h1)];
        if i < m {
            constrain(&mut p, expr, Ge, 0.0);
        } else if i > m {
            constrain(&mut p, expr, Le, 0.0);
        }
    }
    p.solve().expect("dip LP is always feasible").objective()
}

/// All multisets of `grid` with sizes `1..=max_size`, each sorted.
pub fn multisets(grid: &[f64], max_size: usize) -> Vec<Vec<f64>> {
    fn rec(grid: &[f64], start: usize, cur: &mut Vec<f64>, max: usize, out: &mut Vec<Vec<f64>>) {
        if !cur.is_empty() {
            out.push(cur.clone());
        }
        if cur.len() == max {
            return;
        }
        for i in start..grid.len() {
            cur.push(grid[i]);
            rec(grid, i, cur, max, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(grid, 0, &mut Vec::new(), max_size, &mut out);
    out
}
