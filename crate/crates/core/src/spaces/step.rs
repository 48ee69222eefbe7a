//! Step functions on the dyadic grid of `[0,1]^n` and on `[0,1]`.

use std::ops::{Add, Mul};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point2;

/// Largest supported `n * depth`.
pub const MAX_LOG2_CELLS: usize = 24;

/// Values a step function may take: reals or plane points.
pub trait StepValue:
    Copy + PartialEq + std::fmt::Debug + Add<Output = Self> + Mul<f64, Output = Self> + Send + Sync
{
    fn zero() -> Self;
    fn is_finite(&self) -> bool;
}

impl StepValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
}

impl StepValue for Point2 {
    fn zero() -> Self {
        Point2::default()
    }
    fn is_finite(&self) -> bool {
        Point2::is_finite(self)
    }
}

#[derive(Deserialize)]
struct RawDyadic<V> {
    n: usize,
    depth: usize,
    values: Vec<V>,
}

/// A function on `[0,1]^n` constant on the dyadic cells of side `2^-depth`.
///
/// Cells are stored in row-major order: the cell with coordinates
/// `(i_0, .., i_{n-1})` sits at `sum_d i_d * 2^(depth * d)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDyadic<V>", bound(deserialize = "V: StepValue + Deserialize<'de>"))]
pub struct DyadicStepFunction<V = f64> {
    n: usize,
    depth: usize,
    values: Vec<V>,
}

impl<V: StepValue> TryFrom<RawDyadic<V>> for DyadicStepFunction<V> {
    type Error = Error;
    fn try_from(raw: RawDyadic<V>) -> Result<Self> {
        DyadicStepFunction::new(raw.n, raw.depth, raw.values)
    }
}

pub(crate) fn check_grid(n: usize, depth: usize) -> Result<usize> {
    if n == 0 {
        return Err(Error::InvalidParameter("dimension n must be positive".into()));
    }
    let log2 = n.checked_mul(depth).unwrap_or(usize::MAX);
    if log2 > MAX_LOG2_CELLS {
        return Err(Error::BudgetExceeded { requested: log2, limit: MAX_LOG2_CELLS });
    }
    Ok(1usize << log2)
}

impl<V: StepValue> DyadicStepFunction<V> {
    pub fn new(n: usize, depth: usize, values: Vec<V>) -> Result<Self> {
        let expected = check_grid(n, depth)?;
        if values.len() != expected {
            return Err(Error::LengthMismatch { expected, got: values.len() });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::MalformedStepFunction(format!("value at cell {i} is not finite")));
        }
        Ok(Self { n, depth, values })
    }

    pub fn constant(n: usize, depth: usize, value: V) -> Result<Self> {
        let len = check_grid(n, depth)?;
        Self::new(n, depth, vec![value; len])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn values(&self) -> &[V] {
        &self.values
    }

    pub fn cell_count(&self) -> usize {
        self.values.len()
    }

    /// Lebesgue measure of one cell, `2^-(n depth)`; exact in binary.
    pub fn cell_measure(&self) -> f64 {
        (-((self.n * self.depth) as f64)).exp2()
    }

    pub fn map<W: StepValue>(&self, f: impl Fn(V) -> W) -> DyadicStepFunction<W> {
        DyadicStepFunction { n: self.n, depth: self.depth, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    /// Averages over the dyadic cubes of side `2^-level`, indexed like cells
    /// of a depth-`level` grid.
    pub fn cube_averages(&self, level: usize) -> Vec<V> {
        assert!(level <= self.depth, "level {level} deeper than the grid");
        let mut cur = self.values.clone();
        for j in (level + 1..=self.depth).rev() {
            cur = coarsen(&cur, self.n, j);
        }
        cur
    }

    /// Averages for every level `0..=depth`, coarsest first.
    pub fn all_cube_averages(&self) -> Vec<Vec<V>> {
        let mut levels = vec![self.values.clone()];
        for j in (1..=self.depth).rev() {
            let next = coarsen(levels.last().unwrap(), self.n, j);
            levels.push(next);
        }
        levels.reverse();
        levels
    }
}

/// Index of the parent cube (level `j - 1`) of the level-`j` cube `idx`.
pub(crate) fn parent_index(idx: usize, n: usize, j: usize) -> usize {
    let mask = (1usize << j) - 1;
    let mut parent = 0;
    for d in 0..n {
        let coord = (idx >> (j * d)) & mask;
        parent |= (coord >> 1) << ((j - 1) * d);
    }
    parent
}

fn coarsen<V: StepValue>(vals: &[V], n: usize, j: usize) -> Vec<V> {
    let mut out = vec![V::zero(); vals.len() >> n];
    for (idx, &v) in vals.iter().enumerate() {
        let p = parent_index(idx, n, j);
        out[p] = out[p] + v;
    }
    let w = 1.0 / (1usize << n) as f64;
    out.into_iter().map(|v| v * w).collect()
}

#[derive(Deserialize)]
struct RawStep<V> {
    breakpoints: Vec<f64>,
    values: Vec<V>,
}

/// A piecewise-constant function on `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawStep<V>", bound(deserialize = "V: StepValue + Deserialize<'de>"))]
pub struct StepFunction1D<V = f64> {
    breakpoints: Vec<f64>,
    values: Vec<V>,
}

impl<V: StepValue> TryFrom<RawStep<V>> for StepFunction1D<V> {
    type Error = Error;
    fn try_from(raw: RawStep<V>) -> Result<Self> {
        StepFunction1D::new(raw.breakpoints, raw.values)
    }
}

impl<V: StepValue> StepFunction1D<V> {
    pub fn new(breakpoints: Vec<f64>, values: Vec<V>) -> Result<Self> {
        if breakpoints.len() < 2 || breakpoints.len() != values.len() + 1 {
            return Err(Error::MalformedStepFunction(format!(
                "{} breakpoints for {} pieces",
                breakpoints.len(),
                values.len()
            )));
        }
        if breakpoints[0] != 0.0 || *breakpoints.last().unwrap() != 1.0 {
            return Err(Error::MalformedStepFunction("breakpoints must start at 0 and end at 1".into()));
        }
        if !breakpoints.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::MalformedStepFunction("breakpoints must be strictly increasing".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::MalformedStepFunction("values must be finite".into()));
        }
        Ok(Self { breakpoints, values })
    }

    pub fn constant(value: V) -> Self {
        Self { breakpoints: vec![0.0, 1.0], values: vec![value] }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[V] {
        &self.values
    }

    pub fn piece_count(&self) -> usize {
        self.values.len()
    }

    /// `(start, end, value)` per piece.
    pub fn pieces(&self) -> impl Iterator<Item = (f64, f64, V)> + '_ {
        self.values.iter().enumerate().map(|(i, &v)| (self.breakpoints[i], self.breakpoints[i + 1], v))
    }

    /// Merge adjacent pieces with equal values.
    pub fn merged(&self) -> Self {
        let mut bps = vec![0.0];
        let mut vals: Vec<V> = Vec::new();
        for (_, hi, v) in self.pieces() {
            if vals.last() == Some(&v) {
                *bps.last_mut().unwrap() = hi;
            } else {
                vals.push(v);
                bps.push(hi);
            }
        }
        Self { breakpoints: bps, values: vals }
    }

    pub fn map<W: StepValue>(&self, f: impl Fn(V) -> W) -> StepFunction1D<W> {
        StepFunction1D { breakpoints: self.breakpoints.clone(), values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn value_at(&self, x: f64) -> V {
        let i = self.breakpoints.partition_point(|&b| b <= x).clamp(1, self.values.len());
        self.values[i - 1]
    }

    /// Lift to a one-dimensional dyadic step function of the given depth.
    /// Every breakpoint must be a multiple of `2^-depth`.
    pub fn to_dyadic(&self, depth: usize) -> Result<DyadicStepFunction<V>> {
        let cells = check_grid(1, depth)?;
        let scale = cells as f64;
        for &b in &self.breakpoints {
            let k = b * scale;
            if k != k.round() {
                return Err(Error::IncompatibleDepth(format!("breakpoint {b} is not on the 2^-{depth} grid")));
            }
        }
        let mut values = Vec::with_capacity(cells);
        for (lo, hi, v) in self.pieces() {
            let count = ((hi - lo) * scale).round() as usize;
            values.extend(std::iter::repeat(v).take(count));
        }
        DyadicStepFunction::new(1, depth, values)
    }
}
