//! Suprema of a functional of interval averages over all subintervals of
//! `[0, 1]`, for two-channel step functions.
//!
//! Phase (a) evaluates every breakpoint-aligned interval exactly. Phase (b)
//! takes every pair of pieces `(i, j)`, `i < j`, lets the endpoints move
//! inside them and maximizes by coordinate-wise golden section, started from
//! the best corner and from the centre. Within one piece pair the average is
//! a smooth function of the two endpoint offsets.

use rayon::prelude::*;
use serde::Serialize;

use crate::numeric::{golden_max, CompensatedSum};

/// Relative width tolerance of the golden-section steps.
pub const SEARCH_TOL: f64 = 1e-10;

const MAX_ROUNDS: usize = 60;

/// A maximizing interval `[start, end]` and the objective there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntervalMax {
    pub value: f64,
    pub start: f64,
    pub end: f64,
}

impl IntervalMax {
    fn none() -> Self {
        IntervalMax { value: f64::NEG_INFINITY, start: 0.0, end: 1.0 }
    }

    fn improve(&mut self, other: IntervalMax) {
        if other.value > self.value {
            *self = other;
        }
    }
}

/// Prefix integrals of a two-channel step function.
#[derive(Debug, Clone)]
pub struct IntervalSearch {
    bp: Vec<f64>,
    vals: Vec<[f64; 2]>,
    prefix: Vec<[f64; 2]>,
}

impl IntervalSearch {
    /// `breakpoints` as in a step function on `[0, 1]`, one value per piece.
    pub fn new(breakpoints: &[f64], vals: Vec<[f64; 2]>) -> Self {
        assert_eq!(breakpoints.len(), vals.len() + 1);
        let mut acc = [CompensatedSum::default(), CompensatedSum::default()];
        let mut prefix = vec![[0.0; 2]];
        for (i, v) in vals.iter().enumerate() {
            let w = breakpoints[i + 1] - breakpoints[i];
            for c in 0..2 {
                acc[c].add(w * v[c]);
            }
            prefix.push([acc[0].value(), acc[1].value()]);
        }
        IntervalSearch { bp: breakpoints.to_vec(), vals, prefix }
    }

    pub fn piece_count(&self) -> usize {
        self.vals.len()
    }

    /// Average over `[s, t]`, `s < t`.
    pub fn average(&self, s: f64, t: f64) -> [f64; 2] {
        let i = self.bp.partition_point(|&b| b <= s).clamp(1, self.vals.len()) - 1;
        let j = self.bp.partition_point(|&b| b < t).clamp(1, self.vals.len()) - 1;
        if i == j {
            return self.vals[i];
        }
        self.pair_average(i, j, self.bp[i + 1] - s, t - self.bp[j])
    }

    /// Average over `[b_{i+1} - ls, b_j + lt]` for pieces `i < j`.
    fn pair_average(&self, i: usize, j: usize, ls: f64, lt: f64) -> [f64; 2] {
        let len = (self.bp[j] - self.bp[i + 1]) + ls + lt;
        let mut out = [0.0; 2];
        for (c, o) in out.iter_mut().enumerate() {
            let mid = self.prefix[j][c] - self.prefix[i + 1][c];
            *o = (mid + ls * self.vals[i][c] + lt * self.vals[j][c]) / len;
        }
        out
    }

    fn aligned(&self, k: usize, l: usize) -> [f64; 2] {
        let len = self.bp[l] - self.bp[k];
        [(self.prefix[l][0] - self.prefix[k][0]) / len, (self.prefix[l][1] - self.prefix[k][1]) / len]
    }

    /// Maximize `objective(average)` over all subintervals.
    ///
    /// Deterministic: per-pair results are reduced in index order and ties
    /// keep the first interval found.
    pub fn maximize<F>(&self, objective: F) -> IntervalMax
    where
        F: Fn([f64; 2]) -> f64 + Sync,
    {
        let p = self.vals.len();
        let mut best = IntervalMax::none();
        for k in 0..p {
            for l in k + 1..=p {
                let v = objective(self.aligned(k, l));
                best.improve(IntervalMax { value: v, start: self.bp[k], end: self.bp[l] });
            }
        }
        let pairs: Vec<(usize, usize)> = (0..p).flat_map(|i| (i + 1..p).map(move |j| (i, j))).collect();
        let local: Vec<IntervalMax> = pairs.par_iter().map(|&(i, j)| self.pair_max(i, j, &objective)).collect();
        for m in local {
            best.improve(m);
        }
        best
    }

    fn pair_max<F: Fn([f64; 2]) -> f64>(&self, i: usize, j: usize, objective: &F) -> IntervalMax {
        let wi = self.bp[i + 1] - self.bp[i];
        let wj = self.bp[j + 1] - self.bp[j];
        let adjacent = j == i + 1;
        let eval = |ls: f64, lt: f64| {
            if adjacent && ls + lt <= 0.0 {
                f64::NEG_INFINITY
            } else {
                objective(self.pair_average(i, j, ls, lt))
            }
        };
        let mut best = IntervalMax::none();
        let corners = [(0.0, 0.0), (wi, 0.0), (0.0, wj), (wi, wj)];
        let start = corners
            .iter()
            .map(|&(a, b)| (a, b, eval(a, b)))
            .fold((0.0, 0.0, f64::NEG_INFINITY), |m, c| if c.2 > m.2 { c } else { m });
        for (mut ls, mut lt) in [(start.0, start.1), (0.5 * wi, 0.5 * wj)] {
            let mut value = eval(ls, lt);
            for _ in 0..MAX_ROUNDS {
                let prev = value;
                let (ols, olt) = (ls, lt);
                let e = golden_max(|x| eval(x, lt), 0.0, wi, SEARCH_TOL);
                if e.value > value {
                    ls = e.arg;
                    value = e.value;
                }
                let e = golden_max(|x| eval(ls, x), 0.0, wj, SEARCH_TOL);
                if e.value > value {
                    lt = e.arg;
                    value = e.value;
                }
                let moved = (ls - ols).abs() > SEARCH_TOL * wi || (lt - olt).abs() > SEARCH_TOL * wj;
                if !moved || value - prev <= 1e-15 * value.abs().max(1e-300) {
                    break;
                }
            }
            best.improve(IntervalMax { value, start: self.bp[i + 1] - ls, end: self.bp[j] + lt });
        }
        best
    }
}
