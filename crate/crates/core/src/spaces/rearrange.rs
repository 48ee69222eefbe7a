//! Monotone rearrangement, lens embeddings and class membership on `[0, 1]`.

use serde::Serialize;

use super::characteristic::ApParams;
use super::interval::{IntervalMax, IntervalSearch};
use super::step::{DyadicStepFunction, StepFunction1D, StepValue};
use crate::error::{Error, Result};
use crate::geometry::{affine_orbit_parabolic, affine_orbit_power, Lens, Point2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Order {
    #[default]
    NonIncreasing,
    NonDecreasing,
}

fn rearrange_by<V: StepValue>(f: &DyadicStepFunction<V>, key: impl Fn(&V) -> f64, order: Order) -> StepFunction1D<V> {
    let mut idx: Vec<usize> = (0..f.cell_count()).collect();
    let vals = f.values();
    // stable: equal keys keep cell order
    idx.sort_by(|&a, &b| {
        let o = key(&vals[a]).total_cmp(&key(&vals[b]));
        match order {
            Order::NonIncreasing => o.reverse(),
            Order::NonDecreasing => o,
        }
    });
    let total = f.cell_count();
    let mut bps = vec![0.0];
    let mut out: Vec<V> = Vec::new();
    for (k, &i) in idx.iter().enumerate() {
        let end = (k + 1) as f64 / total as f64;
        if out.last() == Some(&vals[i]) {
            *bps.last_mut().unwrap() = end;
        } else {
            out.push(vals[i]);
            bps.push(end);
        }
    }
    StepFunction1D::new(bps, out).expect("rearrangement of a valid step function")
}

/// The non-increasing rearrangement on `[0, 1]`.
pub fn monotone_rearrangement(f: &DyadicStepFunction) -> StepFunction1D {
    rearrange_by(f, |&v| v, Order::NonIncreasing)
}

pub fn monotone_rearrangement_ordered(f: &DyadicStepFunction, order: Order) -> StepFunction1D {
    rearrange_by(f, |&v| v, order)
}

/// Rearrangement of a fixed-boundary-valued function by its first coordinate.
pub fn lens_rearrangement(f: &DyadicStepFunction<Point2>, lens: &Lens) -> Result<StepFunction1D<Point2>> {
    if let Some(index) = f.values().iter().position(|p| !lens.on_fixed(p)) {
        return Err(Error::OffFixedBoundary { index });
    }
    Ok(rearrange_by(f, |p| p.x1, Order::NonIncreasing))
}

/// `v -> (v, v^2)`.
pub fn embed_bmo(f: &DyadicStepFunction) -> DyadicStepFunction<Point2> {
    f.map(|v| Point2::new(v, v * v))
}

fn embed_ap_value(v: f64, p: &ApParams) -> Point2 {
    if p.p2 < 0.0 {
        Point2::new(v.powf(p.p1), v.powf(p.p2))
    } else {
        Point2::new((v / p.q_const).powf(p.p1), v.powf(p.p2))
    }
}

/// The embedding of `A_{p1,p2}` into a power-lens class, with the lens.
pub fn embed_ap(f: &DyadicStepFunction, p: &ApParams) -> Result<(DyadicStepFunction<Point2>, Lens)> {
    if let Some((index, &value)) = f.values().iter().enumerate().find(|(_, &v)| !(v > 0.0)) {
        return Err(Error::NonPositiveValue { index, value });
    }
    Ok((f.map(|v| embed_ap_value(v, p)), p.lens()?))
}

/// The same embedding for a function on `[0, 1]`.
pub fn embed_ap_1d(g: &StepFunction1D, p: &ApParams) -> Result<StepFunction1D<Point2>> {
    if let Some((index, &value)) = g.values().iter().enumerate().find(|(_, &v)| !(v > 0.0)) {
        return Err(Error::NonPositiveValue { index, value });
    }
    Ok(g.map(|v| embed_ap_value(v, p)))
}

pub fn embed_bmo_1d(g: &StepFunction1D) -> StepFunction1D<Point2> {
    g.map(|v| Point2::new(v, v * v))
}

/// Outcome of a membership search over all subintervals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassMembership {
    pub member: bool,
    /// Largest [`Lens::violation`] of an interval average.
    pub violation: f64,
    pub worst: IntervalMax,
}

/// Move values by a lens symmetry so the search works with centred data.
fn normalized(g: &StepFunction1D<Point2>, lens: &Lens) -> StepFunction1D<Point2> {
    match *lens {
        Lens::Parabolic { .. } => {
            let mean: f64 = g.pieces().map(|(lo, hi, v)| (hi - lo) * v.x1).sum();
            g.map(|p| affine_orbit_parabolic(&p, -mean))
        }
        _ => {
            if g.values().iter().any(|p| !(p.x1 > 0.0)) {
                return g.clone();
            }
            let q = lens.exponent().unwrap();
            let lmean: f64 = g.pieces().map(|(lo, hi, v)| (hi - lo) * v.x1.ln()).sum();
            let t = (-lmean).exp();
            g.map(|p| affine_orbit_power(&p, t, q).expect("positive scale"))
        }
    }
}

fn search(g: &StepFunction1D<Point2>) -> IntervalSearch {
    IntervalSearch::new(g.breakpoints(), g.values().iter().map(|p| [p.x1, p.x2]).collect())
}

/// Whether every interval average of `g` lies in the lens, with the most
/// violating interval.
pub fn membership_in_class(g: &StepFunction1D<Point2>, lens: &Lens) -> ClassMembership {
    let merged = g.merged();
    let h = normalized(&merged, lens);
    let engine = search(&h);
    let mut worst = engine.maximize(|a| lens.side_violations(&Point2::new(a[0], a[1])).0);
    let free = engine.maximize(|a| lens.side_violations(&Point2::new(a[0], a[1])).1);
    if free.value > worst.value {
        worst = free;
    }
    let avg = search(&merged).average(worst.start, worst.end);
    let member = worst.value <= 0.0 || lens.contains(&Point2::new(avg[0], avg[1]));
    ClassMembership { member, violation: worst.value, worst }
}

/// Largest lens gauge of an interval average: the smallest size parameter of
/// a lens with the same fixed boundary containing all averages.
pub fn class_characteristic(g: &StepFunction1D<Point2>, lens: &Lens) -> IntervalMax {
    let merged = g.merged();
    let h = normalized(&merged, lens);
    match *lens {
        Lens::Parabolic { .. } => {
            let mut m = search(&h).maximize(|a| a[1] - a[0] * a[0]);
            m.value = m.value.max(0.0).sqrt();
            m
        }
        _ => {
            let probe = *lens;
            let mut m = search(&h).maximize(|a| probe.gauge(&Point2::new(a[0], a[1])).ln());
            m.value = m.value.exp();
            m
        }
    }
}
