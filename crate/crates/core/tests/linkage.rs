mod oracles;

use catch_core::hand_model::{default_catch919, Finger, INDEX_LINKAGE};
use catch_core::linkage::{
    coupling_curve, grashof_class, solve_coupler, synthesize, Branch, CouplingCurve, FourBarDims, GrashofClass,
    LinkageError, SynthesisBounds, SynthesisError,
};
use oracles::bisect_dip;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random linkages that assemble without toggling over PIP 0..90°.
fn assemblable(rng: &mut ChaCha8Rng, count: usize) -> Vec<FourBarDims> {
    let mut out = Vec::new();
    while out.len() < count {
        let raw = FourBarDims {
            ground_mm: rng.random_range(5.0..50.0),
            input_mm: rng.random_range(5.0..50.0),
            coupler_mm: rng.random_range(5.0..50.0),
            output_mm: rng.random_range(5.0..50.0),
            input_mount_deg: rng.random_range(5.0..175.0),
            output_mount_deg: 0.0,
            branch: if rng.random_bool(0.5) { Branch::Open } else { Branch::Crossed },
        };
        if let Ok(d) = raw.zeroed() {
            if coupling_curve(&d, 0.0, 90.0, 181).is_ok() {
                out.push(d);
            }
        }
    }
    out
}

#[test]
fn closure_matches_bisection_on_random_linkages() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for dims in assemblable(&mut rng, 100) {
        for _ in 0..10 {
            let pip = rng.random_range(0.0..90.0);
            let got = solve_coupler(&dims, pip).unwrap();
            let want = bisect_dip(&dims, pip).unwrap();
            worst = worst.max((got - want).abs());
        }
    }
    assert!(worst < 1e-6, "worst disagreement {worst}°");
}

#[test]
fn canonical_coupling_is_monotone_with_right_endpoints() {
    let curve = coupling_curve(&INDEX_LINKAGE, 0.0, 90.0, 91).unwrap();
    assert!(curve.is_monotone());
    let (_, first) = curve.samples[0];
    let (_, last) = curve.samples[90];
    assert!(first.abs() < 1e-9);
    assert!((last - 90.0).abs() <= 2.0);
    for &(pip, dip) in &curve.samples {
        assert!((dip - bisect_dip(&INDEX_LINKAGE, pip).unwrap()).abs() < 1e-6);
    }
    assert!((solve_coupler(&INDEX_LINKAGE, 60.0).unwrap() - bisect_dip(&INDEX_LINKAGE, 60.0).unwrap()).abs() < 1e-9);
}

#[test]
fn every_finger_linkage_matches_the_index_curve() {
    let m = default_catch919();
    for f in [Finger::Middle, Finger::Ring, Finger::Little] {
        for pip in [0.0, 30.0, 75.0] {
            let a = m.coupled_dip(f, pip).unwrap();
            let b = m.coupled_dip(Finger::Index, pip).unwrap();
            assert!((a - b).abs() < 1e-9);
        }
    }
}

#[test]
fn parallelogram_transmits_angle() {
    let p = FourBarDims::parallelogram(20.0, 10.0, 0.0);
    assert!((solve_coupler(&p, 37.0).unwrap() - 37.0).abs() < 1e-9);
    let curve = coupling_curve(&FourBarDims::parallelogram(20.0, 10.0, 60.0), 0.0, 90.0, 10).unwrap();
    for (pip, dip) in curve.samples {
        assert!((dip - pip).abs() <= 1e-9 * pip.abs().max(1.0));
    }
}

#[test]
fn non_assembling_linkage_reports_first_failing_sample() {
    // Output and coupler too short to span the ground once the crank swings away.
    let d = FourBarDims {
        ground_mm: 40.0,
        input_mm: 10.0,
        coupler_mm: 25.0,
        output_mm: 8.0,
        input_mount_deg: 10.0,
        output_mount_deg: 0.0,
        branch: Branch::Open,
    };
    match coupling_curve(&d, 0.0, 90.0, 10) {
        Err(LinkageError::Sample { index, .. }) => assert!(index < 10),
        other => panic!("expected a sample failure, got {other:?}"),
    }
}

#[test]
fn grashof_examples() {
    assert_eq!(grashof_class(&FourBarDims::parallelogram(20.0, 10.0, 0.0)), GrashofClass::ChangePoint);
    let mut d = FourBarDims::parallelogram(100.0, 30.0, 0.0);
    d.coupler_mm = 90.0;
    d.output_mm = 80.0;
    assert_eq!(grashof_class(&d), GrashofClass::CrankRocker);
    d.ground_mm = 30.0;
    d.input_mm = 100.0;
    assert_eq!(grashof_class(&d), GrashofClass::DoubleCrank);
}

#[test]
fn synthesis_recovers_identity_from_perturbed_parallelogram() {
    let mut init = FourBarDims::parallelogram(22.0, 12.0, 60.0);
    init.coupler_mm = 23.5;
    init.output_mm = 11.0;
    let init = init.zeroed().unwrap();
    let r = synthesize(&CouplingCurve::identity(0.0, 90.0, 19), &init, &SynthesisBounds::finger_scale()).unwrap();
    assert!(r.rms_deg < 0.1, "rms {}", r.rms_deg);
    assert!(coupling_curve(&r.dims, 0.0, 90.0, 91).is_ok());
}

#[test]
fn synthesis_reproduces_a_generated_curve_from_noisy_start() {
    let truth = FourBarDims {
        ground_mm: 24.0,
        input_mm: 11.0,
        coupler_mm: 22.0,
        output_mm: 13.0,
        input_mount_deg: 70.0,
        output_mount_deg: 0.0,
        branch: Branch::Open,
    }
    .zeroed()
    .unwrap();
    let target = coupling_curve(&truth, 0.0, 90.0, 19).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut noisy = truth;
    for v in [&mut noisy.ground_mm, &mut noisy.input_mm, &mut noisy.coupler_mm, &mut noisy.output_mm, &mut noisy.input_mount_deg] {
        *v *= 1.0 + rng.random_range(-0.1..0.1);
    }
    let r = synthesize(&target, &noisy.zeroed().unwrap(), &SynthesisBounds::finger_scale()).unwrap();
    assert!(r.rms_deg < 0.5, "rms {}", r.rms_deg);
    assert!(coupling_curve(&r.dims, 0.0, 90.0, 19).is_ok());
}

#[test]
fn synthesis_rejects_decreasing_target() {
    let target = CouplingCurve { samples: vec![(0.0, 0.0), (45.0, 50.0), (90.0, 40.0)] };
    let err = synthesize(&target, &INDEX_LINKAGE, &SynthesisBounds::finger_scale()).unwrap_err();
    assert_eq!(err, SynthesisError::NonMonotoneTarget);
}

#[test]
fn steep_linkage_jumps_shrink_under_refinement() {
    let dims = assemblable(&mut ChaCha8Rng::seed_from_u64(2321), 1)[0];
    let max_jump = |n: usize| {
        let curve = coupling_curve(&dims, 0.0, 90.0, n).unwrap();
        curve.samples.windows(2).map(|w| (w[1].1 - w[0].1).abs()).fold(0.0, f64::max)
    };
    let (coarse, fine) = (max_jump(91), max_jump(9001));
    assert!(coarse >= 5.0, "expected a steep linkage, got {coarse}");
    assert!(fine < 0.5 * coarse, "coarse {coarse}, fine {fine}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn coupling_is_continuous(seed in 0u64..10_000) {
        // Near a toggle position the curve is steep but continuous, so jumps
        // shrink under refinement; a branch flip would not.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dims = assemblable(&mut rng, 1)[0];
        let max_jump = |n: usize| {
            let curve = coupling_curve(&dims, 0.0, 90.0, n).unwrap();
            curve.samples.windows(2).map(|w| (w[1].1 - w[0].1).abs()).fold(0.0, f64::max)
        };
        let (coarse, fine) = (max_jump(91), max_jump(9001));
        prop_assert!(coarse < 5.0 || fine < 0.5 * coarse, "coarse {coarse}, fine {fine}");
    }

    #[test]
    fn scaling_preserves_coupling(factor in 0.5f64..2.0, pip in 0.0f64..90.0) {
        let a = solve_coupler(&INDEX_LINKAGE, pip).unwrap();
        let b = solve_coupler(&INDEX_LINKAGE.scaled(factor), pip).unwrap();
        prop_assert!((a - b).abs() < 1e-9);
    }
}
