//! Dyadic and continuous BMO seminorms and `A_{p1,p2}` characteristics.

use serde::{Deserialize, Serialize};

use super::interval::{IntervalMax, IntervalSearch};
use super::step::{parent_index, DyadicStepFunction, StepFunction1D};
use crate::error::{Error, Result};
use crate::geometry::{min_extension_power, Extension, Lens};

/// Exponents and constant of the class `A_{p1,p2}`:
/// `<phi^p1>^(1/p1) <phi^p2>^(-1/p2) <= Q` on every cube.
///
/// `A_2` is `(1, -1)` and the characteristic is then `<phi><phi^-1>`,
/// not its square root. Classical `A_p` is `(1, -1/(p-1))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApParams {
    pub p1: f64,
    pub p2: f64,
    #[serde(rename = "Q")]
    pub q_const: f64,
}

impl ApParams {
    pub fn new(p1: f64, p2: f64, q_const: f64) -> Result<Self> {
        if !(p1 > p2) || p1 == 0.0 || p2 == 0.0 || !p1.is_finite() || !p2.is_finite() {
            return Err(Error::InvalidParameter(format!("need p1 > p2 and p1 p2 != 0, got p1 = {p1}, p2 = {p2}")));
        }
        if !(q_const >= 1.0) || !q_const.is_finite() {
            return Err(Error::InvalidParameter(format!("Q = {q_const} must be at least 1")));
        }
        Ok(ApParams { p1, p2, q_const })
    }

    pub fn a2(q_const: f64) -> Result<Self> {
        ApParams::new(1.0, -1.0, q_const)
    }

    pub fn muckenhoupt(p: f64, q_const: f64) -> Result<Self> {
        if !(p > 1.0) {
            return Err(Error::InvalidParameter(format!("Muckenhoupt exponent p = {p} must exceed 1")));
        }
        ApParams::new(1.0, -1.0 / (p - 1.0), q_const)
    }

    /// Exponent `q = p2 / p1` of the target power lens.
    pub fn lens_exponent(&self) -> f64 {
        self.p2 / self.p1
    }

    /// Size `C = Q^|p2|` of the target power lens.
    pub fn lens_constant(&self) -> f64 {
        self.q_const.powf(self.p2.abs())
    }

    /// The lens `Omega_C^q` the embedded function lives in.
    pub fn lens(&self) -> Result<Lens> {
        Lens::power(self.lens_constant(), self.lens_exponent())
    }

    /// Convert a power-lens size back to the class constant.
    pub fn constant_from_lens(&self, c: f64) -> f64 {
        c.powf(1.0 / self.p2.abs())
    }

    /// Constant of the continuous class reached by rearranging functions of
    /// the dyadic class, for filtration ratio `alpha`. `None` in the epigraph
    /// regime (the rearrangement is not bounded).
    pub fn rearranged_constant(&self, alpha: f64) -> Result<Option<f64>> {
        if self.q_const == 1.0 {
            return Ok(Some(1.0));
        }
        Ok(match min_extension_power(self.lens_constant(), self.lens_exponent(), alpha)? {
            Extension::Bounded(c) => Some(self.constant_from_lens(c)),
            Extension::Epigraph => None,
        })
    }
}

/// Square root of the largest variance over dyadic subcubes.
pub fn dyadic_bmo_seminorm(f: &DyadicStepFunction) -> f64 {
    let n = f.n();
    let mut level: Vec<(f64, f64)> = f.values().iter().map(|&v| (v, 0.0)).collect();
    let mut best = 0.0f64;
    let w = 1.0 / (1usize << n) as f64;
    for j in (1..=f.depth()).rev() {
        let mut sums = vec![(0.0, 0.0); level.len() >> n];
        for (idx, &(m, _)) in level.iter().enumerate() {
            sums[parent_index(idx, n, j)].0 += m;
        }
        for s in sums.iter_mut() {
            s.0 *= w;
        }
        for (idx, &(m, v)) in level.iter().enumerate() {
            let p = parent_index(idx, n, j);
            let d = m - sums[p].0;
            sums[p].1 += w * (v + d * d);
        }
        best = sums.iter().fold(best, |b, s| b.max(s.1));
        level = sums;
    }
    best.sqrt()
}

fn positive_logs(values: &[f64]) -> Result<Vec<f64>> {
    values
        .iter()
        .enumerate()
        .map(|(index, &v)| if v > 0.0 { Ok(v.ln()) } else { Err(Error::NonPositiveValue { index, value: v }) })
        .collect()
}

fn log_mean_exp(xs: impl Iterator<Item = f64> + Clone, count: f64) -> f64 {
    let m = xs.clone().fold(f64::NEG_INFINITY, f64::max);
    m + (xs.map(|x| (x - m).exp()).sum::<f64>() / count).ln()
}

/// Largest `<f^p1>^(1/p1) <f^p2>^(-1/p2)` over dyadic subcubes, accumulated
/// in the log domain.
pub fn ap_characteristic_dyadic(f: &DyadicStepFunction, p: &ApParams) -> Result<f64> {
    let logs = positive_logs(f.values())?;
    let n = f.n();
    let mut level: Vec<(f64, f64)> = logs.iter().map(|&l| (p.p1 * l, p.p2 * l)).collect();
    let score = |l: &(f64, f64)| l.0 / p.p1 - l.1 / p.p2;
    let mut best = level.iter().map(score).fold(f64::NEG_INFINITY, f64::max);
    let kids = (1usize << n) as f64;
    for j in (1..=f.depth()).rev() {
        let mut groups: Vec<Vec<(f64, f64)>> = vec![Vec::with_capacity(1 << n); level.len() >> n];
        for (idx, &l) in level.iter().enumerate() {
            groups[parent_index(idx, n, j)].push(l);
        }
        level = groups
            .iter()
            .map(|g| (log_mean_exp(g.iter().map(|l| l.0), kids), log_mean_exp(g.iter().map(|l| l.1), kids)))
            .collect();
        best = level.iter().map(score).fold(best, f64::max);
    }
    Ok(best.exp())
}

fn weighted_mean(g: &StepFunction1D, h: impl Fn(f64) -> f64) -> f64 {
    g.pieces().map(|(lo, hi, v)| (hi - lo) * h(v)).sum()
}

/// Sup over subintervals of the variance, with the maximizing interval.
/// `value` is the seminorm (square root of the variance).
pub fn continuous_bmo_search(g: &StepFunction1D) -> IntervalMax {
    let g = g.merged();
    let mean = weighted_mean(&g, |v| v);
    let vals = g.values().iter().map(|&v| [v - mean, (v - mean) * (v - mean)]).collect();
    let search = IntervalSearch::new(g.breakpoints(), vals);
    let mut m = search.maximize(|a| a[1] - a[0] * a[0]);
    m.value = m.value.max(0.0).sqrt();
    m
}

/// Continuous BMO seminorm of a step function on `[0, 1]`.
pub fn continuous_bmo_seminorm_1d(g: &StepFunction1D) -> f64 {
    continuous_bmo_search(g).value
}

/// Sup over subintervals of the `A_{p1,p2}` functional, with the maximizing
/// interval.
pub fn ap_continuous_search(g: &StepFunction1D, p: &ApParams) -> Result<IntervalMax> {
    let g = g.merged();
    let logs = positive_logs(g.values())?;
    let centre: f64 = g.pieces().zip(&logs).map(|((lo, hi, _), l)| (hi - lo) * l).sum();
    let vals = logs.iter().map(|l| [(p.p1 * (l - centre)).exp(), (p.p2 * (l - centre)).exp()]).collect();
    let search = IntervalSearch::new(g.breakpoints(), vals);
    let mut m = search.maximize(|a| a[0].ln() / p.p1 - a[1].ln() / p.p2);
    m.value = m.value.exp();
    Ok(m)
}

pub fn ap_characteristic_continuous_1d(g: &StepFunction1D, p: &ApParams) -> Result<f64> {
    Ok(ap_continuous_search(g, p)?.value)
}
