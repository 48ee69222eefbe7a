use lensrr_core::geometry::{is_alpha_extension, min_extension_a2, min_extension_parabolic, min_extension_power, EnvelopeGrid, Lens};
use lensrr_core::martingale::{dyadic_filtration, membership_in_class_f};
use lensrr_core::spaces::{
    ap_characteristic_continuous_1d, continuous_bmo_seminorm_1d, embed_ap, embed_bmo, membership_in_class,
    monotone_rearrangement, ApParams,
};
use lensrr_core::witness::{
    a2_extremal_witness, bmo_extremal_witness, random_class_function, theorem1_falsifier, RearrangedFunction,
    WitnessFunction,
};
use lensrr_core::{DyadicStepFunction, Falsification};

fn scalar(w: &WitnessFunction) -> &DyadicStepFunction {
    match w {
        WitnessFunction::Scalar(f) => f,
        WitnessFunction::Plane(_) => panic!("expected a scalar witness"),
    }
}

#[test]
fn bmo_witnesses_attain_the_constant() {
    for n in 1..=3usize {
        let expected = (1.0 + 2f64.powi(n as i32)) / 2f64.powf(1.0 + n as f64 / 2.0);
        let r = bmo_extremal_witness(1.0, n).unwrap();
        assert!((r.dyadic - 1.0).abs() < 1e-12, "n={n}: {}", r.dyadic);
        assert!((r.ratio - expected).abs() < 1e-6, "n={n}: {} vs {expected}", r.ratio);
        assert_eq!(r.worst_interval[0], 0.0);
        let f = scalar(&r.witness);
        let filt = dyadic_filtration(n, f.depth()).unwrap();
        assert!(membership_in_class_f(&embed_bmo(f), &filt, &Lens::parabolic(1.0).unwrap()).unwrap());
        let RearrangedFunction::Scalar(g) = &r.rearranged else { panic!() };
        assert!((continuous_bmo_seminorm_1d(g) - r.continuous).abs() < 1e-15);
    }
    let r = bmo_extremal_witness(2.5, 2).unwrap();
    assert!((r.dyadic - 2.5).abs() < 1e-12);
    assert!((r.ratio - 1.25).abs() < 1e-6);
}

#[test]
fn a2_witnesses_attain_the_constant() {
    for q in [1.5, 2.0, 4.0] {
        for n in 1..=2usize {
            let p = 2f64.powi(n as i32);
            let expected = (q * (p + 1.0) * (p + 1.0) - (p - 1.0) * (p - 1.0)) / (4.0 * p);
            let r = a2_extremal_witness(q, n).unwrap();
            assert!((r.ratio - expected).abs() < 1e-6, "Q={q} n={n}: {} vs {expected}", r.ratio);
            assert!((r.dyadic - q).abs() < 1e-9 * q);
            let f = scalar(&r.witness);
            let (e, lens) = embed_ap(f, &ApParams::a2(q).unwrap()).unwrap();
            assert!(membership_in_class_f(&e, &dyadic_filtration(n, f.depth()).unwrap(), &lens).unwrap());
        }
    }
    let r = a2_extremal_witness(3.0, 2).unwrap();
    assert!((r.ratio - 4.125).abs() < 1e-6);
}

fn outcome(lens: &Lens, candidate: &Lens, alpha: f64) -> bool {
    let filt = dyadic_filtration(1, 1).unwrap();
    match theorem1_falsifier(lens, candidate, alpha, &filt).unwrap() {
        Falsification::Counterexample(report) => {
            let RearrangedFunction::Plane(g) = &report.rearranged else { panic!() };
            assert!(!membership_in_class(g, candidate).member);
            true
        }
        Falsification::NoneFound => false,
    }
}

#[test]
fn falsifier_agrees_with_extension_check() {
    let factors = [0.9, 0.97, 0.99, 0.999, 1.0, 1.001, 1.01, 1.1];
    let cases = [
        (Lens::parabolic(1.0).unwrap(), min_extension_parabolic(1.0, 0.5)),
        (Lens::power(2.0, -1.0).unwrap(), min_extension_a2(2.0, 0.5)),
        (Lens::power(1.5, 2.0).unwrap(), min_extension_power(1.5, 2.0, 0.5).unwrap().constant().unwrap()),
        (Lens::power(2.0, -2.0).unwrap(), min_extension_power(2.0, -2.0, 0.5).unwrap().constant().unwrap()),
        (Lens::power(1.2, 0.5).unwrap(), min_extension_power(1.2, 0.5, 0.5).unwrap().constant().unwrap()),
    ];
    for (lens, minimal) in cases {
        let grid = EnvelopeGrid::for_lens(&lens);
        for k in factors {
            let candidate = lens.with_parameter(minimal * k).unwrap();
            let falsified = outcome(&lens, &candidate, 0.5);
            let extension = is_alpha_extension(&lens, &candidate, 0.5, &grid).unwrap();
            assert_eq!(falsified, !extension, "{lens:?} factor {k}");
            assert_eq!(falsified, k < 1.0, "{lens:?} factor {k}");
        }
    }
}

#[test]
fn random_functions_respect_the_sharp_bounds() {
    let bmo_lens = Lens::parabolic(1.0).unwrap();
    let a2 = ApParams::a2(2.0).unwrap();
    let a2_lens = a2.lens().unwrap();
    for n in 1..=2usize {
        let alpha = (-(n as f64)).exp2();
        let filt = dyadic_filtration(n, if n == 1 { 3 } else { 2 }).unwrap();
        for seed in 0..200 {
            let f = random_class_function(&bmo_lens, &filt, seed).unwrap().map(|p| p.x1);
            let c = continuous_bmo_seminorm_1d(&monotone_rearrangement(&f));
            assert!(c <= min_extension_parabolic(1.0, alpha) + 1e-9, "seed {seed}: {c}");
            let w = random_class_function(&a2_lens, &filt, seed).unwrap().map(|p| p.x1);
            let c = ap_characteristic_continuous_1d(&monotone_rearrangement(&w), &a2).unwrap();
            assert!(c <= min_extension_a2(2.0, alpha) + 1e-9, "seed {seed}: {c}");
        }
    }
}

#[test]
fn ap_pipeline_reduces_to_a2() {
    for q in [1.5, 2.0, 4.0] {
        for alpha in [0.25, 0.5] {
            let got = ApParams::a2(q).unwrap().rearranged_constant(alpha).unwrap().unwrap();
            assert!((got - min_extension_a2(q, alpha)).abs() < 1e-10);
        }
    }
    // A_3 = A_{1,-1/2}: lens Omega_{Q^{1/2}}^{-1/2}, answer mapped back by squaring
    let p = ApParams::muckenhoupt(3.0, 2.0).unwrap();
    let k = min_extension_power(2f64.sqrt(), -0.5, 0.5).unwrap().constant().unwrap();
    assert!((p.rearranged_constant(0.5).unwrap().unwrap() - k * k).abs() < 1e-12);
    assert!(ApParams::new(1.0, 2.0, 2.0).is_err());
    // (1, 1/2) with Q = 4 conjugates to Omega_4^2, unbounded up to alpha = 3/4
    let p = ApParams::new(1.0, 0.5, 4.0).unwrap();
    assert!(p.rearranged_constant(0.5).unwrap().is_none());
    let k = min_extension_power(4.0, 2.0, 0.9).unwrap().constant().unwrap();
    assert!((p.rearranged_constant(0.9).unwrap().unwrap() - k).abs() < 1e-10 * k);
}
