//! Finite filtrations of the unit cube, realized on a dyadic grid.

use std::collections::BTreeSet;
use std::ops::Range;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Lens, Point2};
use crate::spaces::step::{check_grid, parent_index};
use crate::spaces::DyadicStepFunction;

/// Ratio tolerance of the α-filtration check.
pub const RATIO_TOL: f64 = 1e-12;

/// An atom of one algebra. `id` is its index within the level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Atom {
    pub id: usize,
    pub measure: f64,
    pub parent: Option<usize>,
    #[serde(skip)]
    pub children: Vec<usize>,
    /// Number of grid cells in the atom.
    #[serde(skip)]
    pub cells: usize,
}

/// A filtration `F_0 ⊂ F_1 ⊂ ...` of partitions of `[0,1]^n` whose finest
/// algebra is a union of cells of the dyadic grid of side `2^-depth`.
/// Level 0 is the trivial algebra.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Filtration {
    #[serde(skip)]
    n: usize,
    #[serde(skip)]
    depth: usize,
    levels: Vec<Vec<Atom>>,
    /// Finest-level atom of each grid cell.
    #[serde(skip)]
    leaf_of_cell: Vec<usize>,
}

impl Filtration {
    /// Build from parent pointers per level (level 0 is the root alone) and
    /// the finest atom of each cell. Measures are derived from cell counts.
    pub fn from_parents(n: usize, depth: usize, parents: Vec<Vec<usize>>, leaf_of_cell: Vec<usize>) -> Result<Self> {
        let cells = check_grid(n, depth)?;
        if leaf_of_cell.len() != cells {
            return Err(Error::LengthMismatch { expected: cells, got: leaf_of_cell.len() });
        }
        let mut sizes = vec![1usize];
        sizes.extend(parents.iter().map(Vec::len));
        let finest = *sizes.last().unwrap();
        let mut counts = vec![0usize; finest];
        for &a in &leaf_of_cell {
            if a >= finest {
                return Err(Error::MalformedFiltration(format!("cell mapped to missing atom {a}")));
            }
            counts[a] += 1;
        }
        if counts.contains(&0) {
            return Err(Error::MalformedFiltration("empty atom at the finest level".into()));
        }
        let mut levels: Vec<Vec<Atom>> = Vec::with_capacity(sizes.len());
        let cell_measure = (-((n * depth) as f64)).exp2();
        let mut level_counts = vec![counts];
        for (k, ps) in parents.iter().enumerate().rev() {
            let mut up = vec![0usize; sizes[k]];
            for (i, &p) in ps.iter().enumerate() {
                if p >= sizes[k] {
                    return Err(Error::MalformedFiltration(format!("level {}: atom {i} has missing parent {p}", k + 1)));
                }
                up[p] += level_counts[0][i];
            }
            if up.contains(&0) {
                return Err(Error::MalformedFiltration(format!("level {k} has an atom without children")));
            }
            level_counts.insert(0, up);
        }
        for (k, cnt) in level_counts.iter().enumerate() {
            let atoms = cnt
                .iter()
                .enumerate()
                .map(|(id, &c)| Atom {
                    id,
                    measure: c as f64 * cell_measure,
                    parent: if k == 0 { None } else { Some(parents[k - 1][id]) },
                    children: Vec::new(),
                    cells: c,
                })
                .collect();
            levels.push(atoms);
        }
        for k in 1..levels.len() {
            for id in 0..levels[k].len() {
                let p = levels[k][id].parent.unwrap();
                levels[k - 1][p].children.push(id);
            }
        }
        Ok(Filtration { n, depth, levels, leaf_of_cell })
    }

    /// Build from explicit partitions: `levels[k]` lists the atoms of `F_k`
    /// as sets of cell indices. The first partition must be the whole grid.
    pub fn from_partitions(n: usize, depth: usize, levels: &[Vec<Vec<usize>>]) -> Result<Self> {
        let cells = check_grid(n, depth)?;
        let mut maps: Vec<Vec<usize>> = Vec::with_capacity(levels.len());
        for (k, part) in levels.iter().enumerate() {
            let mut map = vec![usize::MAX; cells];
            for (a, atom) in part.iter().enumerate() {
                if atom.is_empty() {
                    return Err(Error::MalformedFiltration(format!("level {k}: atom {a} is empty")));
                }
                for &c in atom {
                    if c >= cells || map[c] != usize::MAX {
                        return Err(Error::MalformedFiltration(format!("level {k}: cell {c} missing or repeated")));
                    }
                    map[c] = a;
                }
            }
            if map.contains(&usize::MAX) {
                return Err(Error::MalformedFiltration(format!("level {k} does not cover the grid")));
            }
            maps.push(map);
        }
        if maps.is_empty() || levels[0].len() != 1 {
            return Err(Error::MalformedFiltration("level 0 must be the trivial algebra".into()));
        }
        let mut parents = Vec::new();
        for k in 1..maps.len() {
            let mut ps = vec![usize::MAX; levels[k].len()];
            for c in 0..cells {
                let (a, p) = (maps[k][c], maps[k - 1][c]);
                if ps[a] == usize::MAX {
                    ps[a] = p;
                } else if ps[a] != p {
                    return Err(Error::MalformedFiltration(format!("level {k}: atom {a} straddles two parents")));
                }
            }
            parents.push(ps);
        }
        Filtration::from_parents(n, depth, parents, maps.pop().unwrap())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn levels(&self) -> &[Vec<Atom>] {
        &self.levels
    }

    pub fn level(&self, k: usize) -> &[Atom] {
        &self.levels[k]
    }

    pub fn level_count(&self) -> usize {
        self.levels.len()
    }

    pub fn finest(&self) -> &[Atom] {
        self.levels.last().unwrap()
    }

    pub fn leaf_of_cell(&self) -> &[usize] {
        &self.leaf_of_cell
    }

    /// Every parent has at most two children.
    pub fn is_binary(&self) -> bool {
        self.levels.iter().flatten().all(|a| a.children.len() <= 2)
    }

    /// Finest-level atom containing the atom `(level, id)`'s cells, as a
    /// per-cell indicator: the grid cells of the atom as index ranges.
    pub fn atom_cells(&self, level: usize, id: usize) -> Vec<Range<usize>> {
        let mut member = vec![false; self.finest().len()];
        for (leaf, m) in member.iter_mut().enumerate() {
            let mut a = leaf;
            for k in (level + 1..self.levels.len()).rev() {
                a = self.levels[k][a].parent.unwrap();
            }
            *m = a == id;
        }
        let mut out: Vec<Range<usize>> = Vec::new();
        for (c, &leaf) in self.leaf_of_cell.iter().enumerate() {
            if member[leaf] {
                match out.last_mut() {
                    Some(r) if r.end == c => r.end = c + 1,
                    _ => out.push(c..c + 1),
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("filtration serializes")
    }
}

/// Level `k` holds the dyadic cubes of side `2^-k`, indexed row-major.
pub fn dyadic_filtration(n: usize, depth: usize) -> Result<Filtration> {
    let cells = check_grid(n, depth)?;
    let parents = (1..=depth).map(|k| (0..1usize << (n * k)).map(|i| parent_index(i, n, k)).collect()).collect();
    Filtration::from_parents(n, depth, parents, (0..cells).collect())
}

/// Every child has at least an `alpha` fraction of its parent's measure.
pub fn is_alpha_filtration(f: &Filtration, alpha: f64) -> bool {
    f.levels.windows(2).all(|w| {
        w[1].iter().all(|a| a.measure / w[0][a.parent.unwrap()].measure >= alpha - RATIO_TOL)
    })
}

fn dedup_sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| (*a - *b).abs() <= RATIO_TOL);
    v
}

/// The ratios `mu(child) / mu(parent)` below 1.
pub fn admissible_alphas(f: &Filtration) -> Vec<f64> {
    let mut out = Vec::new();
    for w in f.levels.windows(2) {
        for a in &w[1] {
            let p = &w[0][a.parent.unwrap()];
            if a.cells < p.cells {
                out.push(a.cells as f64 / p.cells as f64);
            }
        }
    }
    dedup_sorted(out)
}

/// The ratios `mu(union of some children) / mu(parent)` strictly between 0 and 1.
pub fn union_ratios(f: &Filtration) -> Vec<f64> {
    let mut out = Vec::new();
    for w in f.levels.windows(2) {
        for p in &w[0] {
            if p.children.len() < 2 {
                continue;
            }
            let mut sums = BTreeSet::from([0usize]);
            for &c in &p.children {
                let k = w[1][c].cells;
                let next: Vec<usize> = sums.iter().map(|s| s + k).collect();
                sums.extend(next);
            }
            out.extend(sums.into_iter().filter(|&s| s > 0 && s < p.cells).map(|s| s as f64 / p.cells as f64));
        }
    }
    dedup_sorted(out)
}

/// Averages of `f` over every atom of every level.
///
/// `f` must share the dimension of the filtration and be at least as fine as
/// its grid.
pub fn atom_averages(f: &DyadicStepFunction<Point2>, filt: &Filtration) -> Result<Vec<Vec<Point2>>> {
    if f.n() != filt.n || f.depth() < filt.depth {
        return Err(Error::IncompatibleDepth(format!(
            "function on n = {}, depth {} against filtration on n = {}, depth {}",
            f.n(),
            f.depth(),
            filt.n,
            filt.depth
        )));
    }
    let (n, shift, fd) = (f.n(), f.depth() - filt.depth, f.depth());
    let fine_mask = (1usize << fd) - 1;
    let mut sums = vec![Point2::default(); filt.finest().len()];
    for (idx, &v) in f.values().iter().enumerate() {
        let mut cell = 0;
        for d in 0..n {
            cell |= (((idx >> (fd * d)) & fine_mask) >> shift) << (filt.depth * d);
        }
        let leaf = filt.leaf_of_cell[cell];
        sums[leaf] = sums[leaf] + v;
    }
    let per_cell = (1usize << (n * shift)) as f64;
    let mut levels = vec![sums];
    for k in (1..filt.levels.len()).rev() {
        let mut up = vec![Point2::default(); filt.levels[k - 1].len()];
        for (a, &s) in filt.levels[k].iter().zip(&levels[0]) {
            let p = a.parent.unwrap();
            up[p] = up[p] + s;
        }
        levels.insert(0, up);
    }
    Ok(levels
        .into_iter()
        .zip(&filt.levels)
        .map(|(s, atoms)| s.into_iter().zip(atoms).map(|(v, a)| v * (1.0 / (a.cells as f64 * per_cell))).collect())
        .collect())
}

/// The martingale generated by a function and a filtration: exact atom
/// averages at every level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MartingaleTrajectory {
    pub levels: Vec<Vec<Point2>>,
}

impl MartingaleTrajectory {
    pub fn average(&self, level: usize, id: usize) -> Point2 {
        self.levels[level][id]
    }
}

/// Requires `f` constant on every atom of the finest algebra.
pub fn generate_martingale(f: &DyadicStepFunction<Point2>, filt: &Filtration) -> Result<MartingaleTrajectory> {
    let levels = atom_averages(f, filt)?;
    let shift = f.depth() - filt.depth;
    let fd = f.depth();
    let mut seen: Vec<Option<Point2>> = vec![None; filt.finest().len()];
    for (idx, &v) in f.values().iter().enumerate() {
        let mut cell = 0;
        for d in 0..f.n() {
            cell |= (((idx >> (fd * d)) & ((1 << fd) - 1)) >> shift) << (filt.depth * d);
        }
        let leaf = filt.leaf_of_cell[cell];
        match seen[leaf] {
            None => seen[leaf] = Some(v),
            Some(w) if w == v => {}
            Some(_) => return Err(Error::NotMeasurable { atom: leaf }),
        }
    }
    Ok(MartingaleTrajectory { levels })
}

/// First atom (in level, then id order) whose average leaves the lens.
pub fn first_violation(f: &DyadicStepFunction<Point2>, filt: &Filtration, lens: &Lens) -> Result<Option<(usize, usize)>> {
    let avg = atom_averages(f, filt)?;
    for (k, level) in avg.iter().enumerate() {
        if let Some(id) = level.iter().position(|p| !lens.contains(p)) {
            return Ok(Some((k, id)));
        }
    }
    Ok(None)
}

/// Every atom average lies in the lens.
pub fn membership_in_class_f(f: &DyadicStepFunction<Point2>, filt: &Filtration, lens: &Lens) -> Result<bool> {
    Ok(first_violation(f, filt, lens)?.is_none())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dyadic_shapes() {
        let f = dyadic_filtration(1, 1).unwrap();
        assert_eq!(f.level_count(), 2);
        assert_eq!(f.level(1).iter().map(|a| a.measure).collect::<Vec<_>>(), vec![0.5, 0.5]);
        let g = dyadic_filtration(2, 1).unwrap();
        assert!(g.level(1).iter().all(|a| a.measure == 0.25));
        assert!(is_alpha_filtration(&g, 0.25));
        assert!(!is_alpha_filtration(&g, 0.26));
        let t = dyadic_filtration(1, 0).unwrap();
        assert_eq!(t.level_count(), 1);
        assert!(admissible_alphas(&t).is_empty());
        assert!(matches!(dyadic_filtration(5, 5), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn alpha_predicates() {
        let f = dyadic_filtration(1, 3).unwrap();
        assert!(is_alpha_filtration(&f, 0.5));
        assert!(!is_alpha_filtration(&f, 0.51));
        assert!(is_alpha_filtration(&f, 1e-9));
        assert_eq!(admissible_alphas(&f), vec![0.5]);
        let g = dyadic_filtration(2, 2).unwrap();
        assert_eq!(admissible_alphas(&g), vec![0.25]);
        assert_eq!(union_ratios(&g), vec![0.25, 0.5, 0.75]);
    }

    #[test]
    fn cube_cells_are_ranges() {
        let g = dyadic_filtration(2, 2).unwrap();
        // level-1 cube (1, 0) holds x-coords 2..4 in rows 0 and 1
        assert_eq!(g.atom_cells(1, 1), vec![2..4, 6..8]);
        assert_eq!(g.atom_cells(0, 0), vec![0..16]);
    }

    #[test]
    fn partitions_validated() {
        let ok = Filtration::from_partitions(2, 1, &[vec![vec![0, 1, 2, 3]], vec![vec![0], vec![1, 2, 3]]]).unwrap();
        assert_eq!(ok.level(1)[1].measure, 0.75);
        assert!(ok.is_binary());
        assert!(Filtration::from_partitions(2, 1, &[vec![vec![0, 1], vec![2, 3]]]).is_err());
        let straddle = [vec![vec![0, 1, 2, 3]], vec![vec![0, 1], vec![2, 3]], vec![vec![0, 2], vec![1], vec![3]]];
        assert!(Filtration::from_partitions(2, 1, &straddle).is_err());
    }

    #[test]
    fn martingale_and_membership() {
        let filt = dyadic_filtration(1, 1).unwrap();
        let f = DyadicStepFunction::new(1, 1, vec![Point2::new(1.0, 1.0), Point2::new(-1.0, 1.0)]).unwrap();
        let m = generate_martingale(&f, &filt).unwrap();
        assert_eq!(m.average(0, 0), Point2::new(0.0, 1.0));
        assert!(membership_in_class_f(&f, &filt, &Lens::parabolic(1.0).unwrap()).unwrap());
        assert!(!membership_in_class_f(&f, &filt, &Lens::parabolic(0.999).unwrap()).unwrap());
        let coarse = dyadic_filtration(1, 0).unwrap();
        assert_eq!(generate_martingale(&f, &coarse), Err(Error::NotMeasurable { atom: 0 }));
        assert!(matches!(atom_averages(&f, &dyadic_filtration(1, 2).unwrap()), Err(Error::IncompatibleDepth(_))));
    }

    #[test]
    fn json_export() {
        let f = dyadic_filtration(1, 1).unwrap();
        assert_eq!(
            f.to_json(),
            r#"{"levels":[[{"id":0,"measure":1.0,"parent":null}],[{"id":0,"measure":0.5,"parent":0},{"id":1,"measure":0.5,"parent":0}]]}"#
        );
    }
}
