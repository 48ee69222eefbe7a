//! Binary refinement of a filtration along a lens-valued function, and the
//! α-martingale certificate built on it.

use serde::Serialize;

use super::filtration::{atom_averages, first_violation, Filtration};
use crate::error::{Error, Result};
use crate::geometry::{Lens, Point2, Segment};
use crate::spaces::DyadicStepFunction;

/// One atom of an intermediate algebra: a set of atoms of the next level of
/// the original filtration, all inside the original atom `origin`.
#[derive(Debug, Clone)]
struct Group {
    members: Vec<usize>,
    origin: usize,
}

/// Refine `filt` into a binary filtration that keeps every atom average of
/// `f` in the lens. Returns the refinement and the indices `m` with level
/// `m[k]` of the refinement equal to level `k` of `filt`.
///
/// A binary filtration is returned as is with `m[k] = k`. Otherwise every
/// new algebra splits one atom of its predecessor into two. Atoms of each
/// level are processed in id order; each is peeled one child at a time,
/// taking the lowest-id child whose complement average lies in the lens.
/// A level of `filt` that splits nothing becomes one non-splitting step, so
/// `m` stays strictly increasing.
pub fn binary_refinement(
    filt: &Filtration,
    f: &DyadicStepFunction<Point2>,
    lens: &Lens,
) -> Result<(Filtration, Vec<usize>)> {
    if let Some((level, atom)) = first_violation(f, filt, lens)? {
        return Err(Error::NotInClass { level, atom });
    }
    if filt.is_binary() {
        return Ok((filt.clone(), (0..filt.level_count()).collect()));
    }
    let avg = atom_averages(f, filt)?;
    let mut parents: Vec<Vec<usize>> = Vec::new();
    let mut m = vec![0];
    for k in 0..filt.level_count() - 1 {
        let next = filt.level(k + 1);
        let mut cur: Vec<Group> =
            filt.level(k).iter().map(|a| Group { members: a.children.clone(), origin: a.id }).collect();
        let mut split_any = false;
        for id in 0..cur.len() {
            while let Some(pos) = cur.iter().position(|g| g.origin == id && g.members.len() > 1) {
                let members = &cur[pos].members;
                let complement_inside = |c: usize| {
                    let (mut s, mut w) = (Point2::default(), 0.0);
                    for &o in members.iter().filter(|&&o| o != c) {
                        s = s + avg[k + 1][o] * next[o].measure;
                        w += next[o].measure;
                    }
                    lens.contains(&(s * (1.0 / w)))
                };
                let c = *members
                    .iter()
                    .find(|&&c| complement_inside(c))
                    .ok_or(Error::SelectionLemma { level: k, atom: id })?;
                let rest: Vec<usize> = members.iter().copied().filter(|&o| o != c).collect();
                parents.push((0..=cur.len()).map(|i| if i <= pos { i } else { i - 1 }).collect());
                cur[pos].members = rest;
                cur.insert(pos, Group { members: vec![c], origin: id });
                split_any = true;
            }
        }
        // relabel the last refined level (all singletons) into the order of
        // level k + 1 of the original filtration
        let mut order: Vec<(usize, usize)> = cur.iter().enumerate().map(|(pos, g)| (g.members[0], pos)).collect();
        order.sort_unstable();
        if split_any {
            let last = parents.pop().unwrap();
            parents.push(order.iter().map(|&(_, pos)| last[pos]).collect());
        } else {
            parents.push(order.iter().map(|&(_, pos)| pos).collect());
        }
        m.push(parents.len());
    }
    let refined = Filtration::from_parents(filt.n(), filt.depth(), parents, filt.leaf_of_cell().to_vec())?;
    Ok((refined, m))
}

/// Verdict of the α-martingale check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Certificate {
    CertifiedYes,
    CertifiedNoForBinary,
    Unknown,
}

fn binary_condition_holds(avg: &[Vec<Point2>], filt: &Filtration, lens: &Lens, alpha: f64) -> bool {
    for (k, level) in filt.levels().iter().enumerate() {
        for atom in level {
            if atom.children.len() != 2 {
                continue;
            }
            let w = avg[k][atom.id];
            let (c0, c1) = (avg[k + 1][atom.children[0]], avg[k + 1][atom.children[1]]);
            for (p1, p2) in [(c0, c1), (c1, c0)] {
                let inside = match Segment::new(p2, w) {
                    Ok(seg) => lens.contains_segment(&seg),
                    Err(_) => true,
                };
                if inside {
                    continue;
                }
                let lhs = p1.dist(&w);
                let rhs = alpha * p1.dist(&p2);
                if lhs < rhs - 1e-12 * (1.0 + rhs) {
                    return false;
                }
            }
        }
    }
    true
}

/// Check the α-martingale displacement condition.
///
/// Binary filtrations are checked directly. Otherwise the filtration is
/// refined by [`binary_refinement`]; if the refinement passes the answer is
/// yes, else unknown, since another refinement might still pass.
pub fn is_alpha_martingale_certified(
    f: &DyadicStepFunction<Point2>,
    filt: &Filtration,
    lens: &Lens,
    alpha: f64,
) -> Certificate {
    if filt.is_binary() {
        return match atom_averages(f, filt) {
            Ok(avg) if binary_condition_holds(&avg, filt, lens, alpha) => Certificate::CertifiedYes,
            Ok(_) => Certificate::CertifiedNoForBinary,
            Err(_) => Certificate::Unknown,
        };
    }
    match binary_refinement(filt, f, lens) {
        Ok((refined, _)) => match atom_averages(f, &refined) {
            Ok(avg) if binary_condition_holds(&avg, &refined, lens, alpha) => Certificate::CertifiedYes,
            _ => Certificate::Unknown,
        },
        Err(_) => Certificate::Unknown,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::martingale::filtration::{dyadic_filtration, is_alpha_filtration};

    fn parabola(x: f64) -> Point2 {
        Point2::new(x, x * x)
    }

    #[test]
    fn binary_input_is_kept() {
        let filt = dyadic_filtration(1, 2).unwrap();
        let f = DyadicStepFunction::new(1, 2, vec![parabola(0.3), parabola(0.1), parabola(-0.2), parabola(0.0)]).unwrap();
        let (r, m) = binary_refinement(&filt, &f, &Lens::parabolic(1.0).unwrap()).unwrap();
        assert_eq!(r, filt);
        assert_eq!(m, vec![0, 1, 2]);
    }

    #[test]
    fn four_children_take_three_splits() {
        let filt = dyadic_filtration(2, 1).unwrap();
        let f = DyadicStepFunction::new(2, 1, vec![parabola(0.5), parabola(-0.5), parabola(0.2), parabola(0.1)]).unwrap();
        let lens = Lens::parabolic(1.0).unwrap();
        let (r, m) = binary_refinement(&filt, &f, &lens).unwrap();
        assert_eq!(m, vec![0, 3]);
        assert_eq!(r.level_count(), 4);
        assert!(r.is_binary());
        assert!(is_alpha_filtration(&r, 0.25));
        for k in 1..4 {
            assert_eq!(r.level(k).len(), k + 1);
        }
        assert_eq!(r.level(3).iter().map(|a| a.measure).collect::<Vec<_>>(), vec![0.25; 4]);
        for k in 0..4 {
            assert!(atom_averages(&f, &r).unwrap()[k].iter().all(|p| lens.contains(p)));
        }
        assert_eq!(is_alpha_martingale_certified(&f, &filt, &lens, 0.25), Certificate::CertifiedYes);
    }

    #[test]
    fn refusing_non_members() {
        let filt = dyadic_filtration(1, 1).unwrap();
        let f = DyadicStepFunction::new(1, 1, vec![parabola(2.0), parabola(-2.0)]).unwrap();
        assert_eq!(
            binary_refinement(&filt, &f, &Lens::parabolic(1.0).unwrap()),
            Err(Error::NotInClass { level: 0, atom: 0 })
        );
    }

    #[test]
    fn displacement_violation_is_detected() {
        let filt = Filtration::from_partitions(2, 1, &[vec![vec![0, 1, 2, 3]], vec![vec![0], vec![1, 2, 3]]]).unwrap();
        let a = Point2::new(2.0, 4.0);
        let b = Point2::new(-0.2, 0.04);
        let f = DyadicStepFunction::new(2, 1, vec![a, b, b, b]).unwrap();
        let lens = Lens::parabolic(1.0).unwrap();
        assert_eq!(is_alpha_martingale_certified(&f, &filt, &lens, 0.5), Certificate::CertifiedNoForBinary);
        assert_eq!(is_alpha_martingale_certified(&f, &filt, &lens, 0.25), Certificate::CertifiedYes);
    }

    #[test]
    fn trivial_filtration_is_certified() {
        let filt = dyadic_filtration(1, 0).unwrap();
        let f = DyadicStepFunction::constant(1, 0, parabola(1.0)).unwrap();
        assert_eq!(is_alpha_martingale_certified(&f, &filt, &Lens::parabolic(1.0).unwrap(), 0.9), Certificate::CertifiedYes);
    }
}
