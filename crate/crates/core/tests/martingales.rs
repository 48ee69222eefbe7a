use std::collections::BTreeSet;

use lensrr_core::geometry::Lens;
use lensrr_core::martingale::{
    atom_averages, binary_refinement, dyadic_filtration, generate_martingale, is_alpha_filtration,
    is_alpha_martingale_certified, membership_in_class_f, Certificate, Filtration,
};
use lensrr_core::witness::random_class_function;
use lensrr_core::Point2;

/// A level as a set of cell sets.
fn partition(f: &Filtration, level: usize) -> BTreeSet<Vec<usize>> {
    (0..f.level(level).len())
        .map(|id| f.atom_cells(level, id).into_iter().flatten().collect::<Vec<_>>())
        .collect()
}

fn check_lemma(lens: &Lens, n: usize, depth: usize, seed: u64) {
    let alpha = (-(n as f64)).exp2();
    let filt = dyadic_filtration(n, depth).unwrap();
    let f = random_class_function(lens, &filt, seed).unwrap();
    assert!(membership_in_class_f(&f, &filt, lens).unwrap());
    let (r, m) = binary_refinement(&filt, &f, lens).unwrap();
    assert!(r.is_binary());
    assert!(is_alpha_filtration(&r, alpha), "n={n} depth={depth} seed={seed}");
    assert_eq!(m.len(), filt.level_count());
    assert!(m.windows(2).all(|w| w[0] < w[1]));
    for (k, &mk) in m.iter().enumerate() {
        assert_eq!(partition(&r, mk), partition(&filt, k));
    }
    for (k, level) in r.levels().iter().enumerate() {
        for atom in level {
            if atom.children.is_empty() {
                continue;
            }
            let total: f64 = atom.children.iter().map(|&c| r.level(k + 1)[c].measure).sum();
            assert!((total - atom.measure).abs() <= 1e-15 * atom.measure);
        }
        if n > 1 && k + 1 < r.level_count() {
            let splits = level.iter().filter(|a| a.children.len() == 2).count();
            assert!(splits <= 1, "more than one split at level {k}");
        }
    }
    for level in atom_averages(&f, &r).unwrap() {
        assert!(level.iter().all(|p| lens.contains(p)));
    }
    assert_eq!(is_alpha_martingale_certified(&f, &filt, lens, alpha), Certificate::CertifiedYes);
}

#[test]
fn lemma_suite_parabolic() {
    let lens = Lens::parabolic(1.0).unwrap();
    for n in 1..=2 {
        for depth in 1..=3 {
            for seed in 0..100 {
                check_lemma(&lens, n, depth, seed);
            }
        }
    }
}

#[test]
fn lemma_suite_power() {
    for lens in [Lens::power(2.0, -1.0).unwrap(), Lens::power(3.0, 2.0).unwrap(), Lens::power(1.5, 0.5).unwrap()] {
        for n in 1..=2 {
            for depth in 1..=3 {
                for seed in 0..20 {
                    check_lemma(&lens, n, depth, seed);
                }
            }
        }
    }
}

#[test]
fn martingale_levels_are_conditional_averages() {
    let lens = Lens::parabolic(1.0).unwrap();
    let filt = dyadic_filtration(2, 2).unwrap();
    let f = random_class_function(&lens, &filt, 3).unwrap();
    // the sampler's output lives one level finer; measurable w.r.t. the
    // dyadic filtration of its own depth
    let fine = dyadic_filtration(2, 3).unwrap();
    let traj = generate_martingale(&f, &fine).unwrap();
    let cells = f.values();
    for (k, level) in fine.levels().iter().enumerate() {
        for atom in level {
            let members: Vec<usize> = fine.atom_cells(k, atom.id).into_iter().flatten().collect();
            let s = members.iter().fold(Point2::default(), |acc, &i| acc + cells[i]);
            let avg = s * (1.0 / members.len() as f64);
            assert!(traj.average(k, atom.id).dist(&avg) < 1e-12);
        }
    }
    // martingale property: parent = measure-weighted mean of children
    for (k, level) in fine.levels().iter().enumerate() {
        for atom in level.iter().filter(|a| !a.children.is_empty()) {
            let mut s = Point2::default();
            for &c in &atom.children {
                s = s + traj.average(k + 1, c) * (fine.level(k + 1)[c].measure / atom.measure);
            }
            assert!(s.dist(&traj.average(k, atom.id)) < 1e-12);
        }
    }
}

#[test]
fn coarser_function_is_measurable_only_on_fine_grid() {
    let filt = dyadic_filtration(1, 1).unwrap();
    let f = random_class_function(&Lens::parabolic(1.0).unwrap(), &filt, 0).unwrap();
    assert!(generate_martingale(&f, &filt).is_err());
}
