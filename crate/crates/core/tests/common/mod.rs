//! Independent oracles shared by the integration and acceptance suites.
//! Apart from `invariants`, nothing here calls into the closed-form code
//! paths it is used to check.
#![allow(dead_code)]

pub mod invariants;

use median_core::analysis::SquareSumProblem;
use rand::Rng;

/// All ways to split `0..k` into `floor(k/2)` disjoint pairs (plus one
/// leftover when `k` is odd). Each is equally likely under a uniform shuffle.
pub fn enumerate_matchings(k: usize) -> Vec<Vec<(usize, usize)>> {
    fn rec(
        free: &mut Vec<usize>,
        leftover_allowed: bool,
        cur: &mut Vec<(usize, usize)>,
        out: &mut Vec<Vec<(usize, usize)>>,
    ) {
        let Some(&first) = free.first() else {
            out.push(cur.clone());
            return;
        };
        if leftover_allowed {
            free.remove(0);
            rec(free, false, cur, out);
            free.insert(0, first);
        }
        for j in 1..free.len() {
            let partner = free[j];
            let rest: Vec<usize> = free
                .iter()
                .copied()
                .filter(|&x| x != first && x != partner)
                .collect();
            let mut rest = rest;
            cur.push((first, partner));
            rec(&mut rest, leftover_allowed, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut (0..k).collect(), k % 2 == 1, &mut Vec::new(), &mut out);
    out
}

/// `(E[X], E[X^2])` of the matching sum by exhaustive enumeration.
pub fn enumerated_moments(k: usize, dist: impl Fn(usize, usize) -> f64) -> (f64, f64) {
    let matchings = enumerate_matchings(k);
    let count = matchings.len() as f64;
    let mut mean = 0.0;
    let mut second = 0.0;
    for m in &matchings {
        let x: f64 = m.iter().map(|&(a, b)| dist(a, b)).sum();
        mean += x;
        second += x * x;
    }
    (mean / count, second / count)
}

/// Row sums of a row-major matrix, diagonal included.
pub fn row_sums(n: usize, matrix: &[f64]) -> Vec<f64> {
    matrix.chunks(n).map(|row| row.iter().sum()).collect()
}

/// First index attaining the minimum.
pub fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v < values[best] {
            best = i;
        }
    }
    best
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Draws an assignment of `k^2` entries in `[0, cap]` summing to the mass,
/// or `None` when the draw is rejected.
pub fn sample_feasible(prob: &SquareSumProblem, rng: &mut impl Rng) -> Option<Vec<f64>> {
    let k2 = prob.ball_size * prob.ball_size;
    let cap = prob.cap();
    let mut raw: Vec<f64> = match rng.random_range(0..4) {
        0 => (0..k2).map(|_| rng.random::<f64>()).collect(),
        1 => {
            let support = rng.random_range(1..=k2);
            let mut v = vec![0.0; k2];
            for e in v.iter_mut().take(support) {
                *e = rng.random::<f64>();
            }
            v
        }
        2 => (0..k2).map(|_| (8.0 * rng.random::<f64>()).exp()).collect(),
        _ => return Some(clipped(prob, rng)),
    };
    let total: f64 = raw.iter().sum();
    if total <= 0.0 {
        return None;
    }
    let scale = prob.mass() / total;
    raw.iter_mut().for_each(|e| *e *= scale);
    raw.iter().all(|&e| e <= cap).then_some(raw)
}

/// `min(cap, t * w)` for random weights `w`, with `t` found by bisection so
/// the entries sum to the mass (from below, up to rounding).
fn clipped(prob: &SquareSumProblem, rng: &mut impl Rng) -> Vec<f64> {
    let k2 = prob.ball_size * prob.ball_size;
    let cap = prob.cap();
    let w: Vec<f64> = (0..k2).map(|_| (6.0 * rng.random::<f64>()).exp()).collect();
    let fill = |t: f64| -> Vec<f64> { w.iter().map(|&x| (t * x).min(cap)).collect() };
    let (mut lo, mut hi) = (0.0, cap / w.iter().copied().fold(f64::INFINITY, f64::min));
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if fill(mid).iter().sum::<f64>() <= prob.mass() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    fill(lo)
}

#[test]
fn matching_counts() {
    // (k-1)!! for even k, k * (k-2)!! for odd k.
    let want = [1, 1, 1, 3, 3, 15, 15, 105, 105];
    for (k, &w) in want.iter().enumerate() {
        assert_eq!(enumerate_matchings(k).len(), w, "k = {k}");
    }
}
