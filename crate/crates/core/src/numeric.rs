//! Scalar helpers shared by the geometric and interval searches.

use crate::error::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Result of a one-dimensional maximization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum {
    pub arg: f64,
    pub value: f64,
}

/// Golden-section maximization of a unimodal function on `[lo, hi]`.
///
/// Stops once the bracket is narrower than `rel_tol * (hi - lo)` (or a few
/// ulps). The endpoints are evaluated too, so a monotone function returns its
/// boundary maximum rather than a point one tolerance away from it.
pub fn golden_max<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, rel_tol: f64) -> Extremum {
    let mut best = Extremum { arg: lo, value: f(lo) };
    let fh = f(hi);
    if fh > best.value {
        best = Extremum { arg: hi, value: fh };
    }
    if !(hi > lo) {
        return best;
    }
    let width_tol = (rel_tol * (hi - lo)).max(4.0 * f64::EPSILON * lo.abs().max(hi.abs()));
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > width_tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    for (x, fx) in [(c, fc), (d, fd)] {
        if fx > best.value {
            best = Extremum { arg: x, value: fx };
        }
    }
    best
}

/// Bisection on a bracket `[lo, hi]` with `f(lo)` and `f(hi)` of opposite sign.
///
/// Iterates until the bracket width is below `rel_tol * max(|lo|, |hi|)` or an
/// exact zero is hit.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, rel_tol: f64) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa.is_finite() && fb.is_finite()) || fa.signum() == fb.signum() {
        return Err(Error::RootBracketing(format!(
            "no sign change on [{lo}, {hi}] (f = {fa}, {fb})"
        )));
    }
    for _ in 0..400 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
        if (b - a) <= rel_tol * a.abs().max(b.abs()) {
            break;
        }
    }
    Ok(0.5 * (a + b))
}

/// Scan `grid` for sign changes of `f` and bisect each one.
///
/// Grid points where `f` vanishes exactly are reported as roots directly.
pub fn scan_roots<F: FnMut(f64) -> f64>(mut f: F, grid: &[f64], rel_tol: f64) -> Vec<f64> {
    let mut roots = Vec::new();
    let vals: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
    for i in 0..grid.len() {
        if vals[i] == 0.0 {
            roots.push(grid[i]);
            continue;
        }
        if i + 1 < grid.len()
            && vals[i + 1] != 0.0
            && vals[i].is_finite()
            && vals[i + 1].is_finite()
            && vals[i].signum() != vals[i + 1].signum()
        {
            if let Ok(r) = bisect(&mut f, grid[i], grid[i + 1], rel_tol) {
                roots.push(r);
            }
        }
    }
    roots
}

/// Neumaier-compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Log-spaced grid of `per_decade` points per decade on `[lo, hi]`, both ends included.
pub fn log_grid(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    let (l0, l1) = (lo.log10(), hi.log10());
    let steps = (((l1 - l0) * per_decade as f64).ceil() as usize).max(1);
    (0..=steps)
        .map(|i| 10f64.powf(l0 + (l1 - l0) * i as f64 / steps as f64))
        .collect()
}
