use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{affine_orbit_parabolic, affine_orbit_power, Lens, Point2};
use crate::martingale::{dyadic_filtration, Filtration};
use crate::spaces::DyadicStepFunction;

/// Tries per node before giving up.
pub const REJECTION_BUDGET: usize = 10_000;

fn point_in_lens(lens: &Lens, rng: &mut ChaCha8Rng) -> Result<Point2> {
    match *lens {
        Lens::Parabolic { eps } => {
            let x1 = rng.gen_range(-eps..=eps);
            Ok(Point2::new(x1, x1 * x1 + rng.gen_range(0.0..eps * eps)))
        }
        Lens::Power { q, lower, upper } => {
            let x1 = rng.gen_range(-std::f64::consts::LN_2..std::f64::consts::LN_2).exp();
            Ok(Point2::new(x1, rng.gen_range(lower..upper) * x1.powf(q)))
        }
        Lens::EpigraphPower { .. } => Err(Error::InvalidParameter("cannot sample an unbounded lens".into())),
    }
}

/// Child averages of a node that stay in the lens and average to the parent.
///
/// The parent is moved by a lens symmetry to abscissa 0 (parabolic) or 1
/// (power). Children are `(u_i, h(u_i) + g_i)` up to the power weight, with
/// `h` the fixed boundary, centred random abscissas `u_i` (shrunk until the
/// fixed-boundary part alone does not overshoot the parent) and random gaps
/// `g_i` sharing the remaining excess; a draw is rejected if a gap exceeds
/// the lens width.
fn split(lens: &Lens, parent: Point2, kids: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Point2>> {
    let (centre, spread, width) = match *lens {
        Lens::Parabolic { eps } => (0.0, eps, eps * eps),
        _ => (1.0, 0.9, lens.free_coef().unwrap() - lens.fixed_coef().unwrap()),
    };
    let p0 = match *lens {
        Lens::Parabolic { .. } => affine_orbit_parabolic(&parent, -parent.x1),
        _ => affine_orbit_power(&parent, 1.0 / parent.x1, lens.exponent().unwrap())?,
    };
    let weight = |u: f64| match *lens {
        Lens::Parabolic { .. } => 1.0,
        _ => u.powf(lens.exponent().unwrap()),
    };
    let fixed = |u: f64| match *lens {
        Lens::Parabolic { .. } => u * u,
        _ => lens.fixed_coef().unwrap() * weight(u),
    };
    for _ in 0..REJECTION_BUDGET {
        let mut v: Vec<f64> = (0..kids).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mean = v.iter().sum::<f64>() / kids as f64;
        v.iter_mut().for_each(|x| *x -= mean);
        let vmax = v.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
        let mut sigma = rng.gen::<f64>() * spread / vmax;
        let mut u: Vec<f64>;
        let mut excess;
        let mut halvings = 0;
        loop {
            u = v.iter().map(|x| centre + sigma * x).collect();
            excess = p0.x2 - u.iter().map(|&x| fixed(x)).sum::<f64>() / kids as f64;
            if excess * width.signum() >= 0.0 {
                break;
            }
            halvings += 1;
            sigma = if halvings > 60 { 0.0 } else { 0.5 * sigma };
        }
        let shares: Vec<f64> = (0..kids).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
        let total: f64 = shares.iter().sum();
        let children: Vec<Point2> = u
            .iter()
            .zip(&shares)
            .map(|(&x, &w)| {
                let g = kids as f64 * w / total * excess / weight(x);
                (g, Point2::new(x, fixed(x) + g * weight(x)))
            })
            .filter(|(g, _)| g.abs() <= width.abs())
            .map(|(_, p)| p)
            .collect();
        if children.len() < kids {
            continue;
        }
        let back: Vec<Point2> = match *lens {
            Lens::Parabolic { .. } => children.iter().map(|c| affine_orbit_parabolic(c, parent.x1)).collect(),
            _ => children
                .iter()
                .map(|c| affine_orbit_power(c, parent.x1, lens.exponent().unwrap()))
                .collect::<Result<_>>()?,
        };
        if back.iter().all(|c| lens.contains(c)) {
            return Ok(back);
        }
    }
    Err(Error::RejectionBudget(format!("no admissible split of {parent:?} after {REJECTION_BUDGET} tries")))
}

/// The sub-lens the sampler draws from: points of a power lens with `q > 0`
/// have a fixed-boundary midpoint chord only while the ratio to the fixed
/// boundary stays below `2^|q-1|`, so larger lenses are cut down to that.
fn sampling_lens(lens: &Lens) -> Result<Lens> {
    match *lens {
        Lens::Power { q, .. } if q > 0.0 => {
            let cap = 2f64.powf((q - 1.0).abs()) * (1.0 - 1e-6);
            if lens.parameter() > cap {
                lens.with_parameter(cap)
            } else {
                Ok(*lens)
            }
        }
        _ => Ok(*lens),
    }
}

/// A random function in the lens class of a dyadic filtration.
///
/// Atom averages are drawn top-down: a random root point, then for every
/// atom random child averages that stay inside the lens and average to the
/// parent. Each finest cell is then split once more, half of its sub-cells
/// taking each end of the fixed-boundary chord with midpoint the cell
/// average, so the result lives on a grid one level finer than the
/// filtration and takes values on the fixed boundary. For power lenses with
/// `q > 0` the averages are drawn from a smaller lens with the same fixed
/// boundary, where such chords exist. Deterministic per seed; not uniform in
/// any sense.
pub fn random_class_function(lens: &Lens, filt: &Filtration, seed: u64) -> Result<DyadicStepFunction<Point2>> {
    let lens = &sampling_lens(lens)?;
    let (n, depth) = (filt.n(), filt.depth());
    if *filt != dyadic_filtration(n, depth)? {
        return Err(Error::InvalidParameter("the sampler needs a dyadic filtration".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut level = vec![point_in_lens(lens, &mut rng)?];
    let kids = 1usize << n;
    for k in 0..depth {
        let mut next = vec![Point2::default(); filt.level(k + 1).len()];
        for (atom, &p) in filt.level(k).iter().zip(&level) {
            for (&c, v) in atom.children.iter().zip(split(lens, p, kids, &mut rng)?) {
                next[c] = v;
            }
        }
        level = next;
    }
    let fine = depth + 1;
    let mut values = vec![Point2::default(); 1 << (n * fine)];
    let mut used = vec![0usize; level.len()];
    let chords: Vec<(Point2, Point2)> = level
        .iter()
        .map(|p| {
            lens.midpoint_chord(p)
                .ok_or_else(|| Error::RejectionBudget(format!("no fixed-boundary chord through {p:?}")))
        })
        .collect::<Result<_>>()?;
    let mask = (1usize << fine) - 1;
    for (idx, v) in values.iter_mut().enumerate() {
        let mut cell = 0;
        for d in 0..n {
            cell |= (((idx >> (fine * d)) & mask) >> 1) << (depth * d);
        }
        let (a, b) = chords[cell];
        *v = if used[cell] < kids / 2 { a } else { b };
        used[cell] += 1;
    }
    DyadicStepFunction::new(n, fine, values)
}
