use diode_core::bifurcation::{
    assemble_branches, scan_1d, scan_surface, BranchEventKind, CrossingKind, LineSweep, Param,
    ScanResult, Space, SurfaceSweep, ZAxis,
};
use diode_core::cubic::{discriminant, matched_root_distance, solve_numeric_oracle};
use diode_core::model::ReducedParams;
use proptest::prelude::*;

fn line(space: Space, fixed: Param, value: f64, range: (f64, f64), n: usize) -> LineSweep {
    LineSweep {
        space,
        fixed,
        fixed_value: value,
        range,
        n,
    }
}

fn surface(space: Space, n: usize) -> ScanResult {
    scan_surface(&SurfaceSweep {
        space,
        k_range: (-5.0, 5.0),
        b_range: (-5.0, 5.0),
        n_k: n,
        n_b: n,
        z: ZAxis::Re,
    })
    .unwrap()
}

#[test]
fn u_surface_is_fully_covered() {
    let s = surface(Space::U, 101);
    assert_eq!(s.coverage, 1.0);
    assert!(s.mask.iter().all(|m| !m));
    for sample in &s.samples {
        let im: f64 = sample
            .values
            .iter()
            .map(|v| v.value.im * v.multiplicity as f64)
            .sum();
        assert_eq!(im, 0.0, "at ({}, {})", sample.k_hat, sample.b_hat);
        assert_eq!(
            sample
                .values
                .iter()
                .map(|v| v.multiplicity as usize)
                .sum::<usize>(),
            3
        );
        assert!(sample.max_residual < 1e-9);
    }
}

#[test]
fn theta_surface_has_empty_regions() {
    let u = surface(Space::U, 101);
    let t = surface(Space::Theta, 101);
    assert!(t.coverage < 1.0);
    assert!(t.mask.iter().any(|m| *m));
    for (a, b) in u.samples.iter().zip(&t.samples) {
        assert!(b.values.len() <= a.values.len());
        assert!(b.max_residual < 1e-9);
    }
    // empty exactly where no oracle root has positive real part
    for (s, m) in t.samples.iter().zip(&t.mask) {
        let oracle = solve_numeric_oracle(&ReducedParams::cubic(s.k_hat, s.b_hat));
        let none_positive = oracle.roots.iter().all(|r| r.value.re <= 1e-12);
        if oracle.roots.iter().all(|r| r.value.re.abs() > 1e-9) {
            assert_eq!(*m, none_positive, "at ({}, {})", s.k_hat, s.b_hat);
        }
    }
}

#[test]
fn samples_agree_with_the_oracle() {
    let s = surface(Space::U, 41);
    for sample in &s.samples {
        let p = ReducedParams::cubic(sample.k_hat, sample.b_hat);
        let oracle = solve_numeric_oracle(&p);
        let closed = diode_core::cubic::solve_closed_form(&p);
        assert!(matched_root_distance(&closed, &oracle) < 1e-9);
    }
}

#[test]
fn bifurcation_points_are_zeros_of_the_discriminant() {
    let s = surface(Space::U, 101);
    assert!(!s.bifurcation_points.is_empty());
    for p in &s.bifurcation_points {
        let d = discriminant(&ReducedParams::cubic(p.k_hat, p.b_hat));
        assert!(d.abs() < 1e-8, "Δ = {d:e} at ({}, {})", p.k_hat, p.b_hat);
        assert_eq!(d, p.discriminant);
    }
}

#[test]
fn loop_through_the_triple_root() {
    let sweep = line(
        Space::U,
        Param::BHat,
        Param::BHat.triple_root_value(),
        (-5.0, 5.0),
        1001,
    );
    let s = scan_1d(&sweep).unwrap();
    let b = assemble_branches(&s).unwrap();
    assert_eq!(b.loops.len(), 1);
    let [x, y] = b.loops[0];
    let (bx, by) = (&b.branches[x], &b.branches[y]);
    assert!(bx.is_loop && by.is_loop && !bx.real);
    let start = &b.events[bx.start.unwrap()];
    let end = &b.events[bx.end.unwrap()];
    assert_eq!(start.kind, BranchEventKind::Merge);
    // the loop closes on the triple root
    assert!((end.t - 3f64.sqrt()).abs() < 1e-7);
    // conjugate halves
    for (p, q) in bx.points.iter().zip(&by.points) {
        assert_eq!(p.value.re, q.value.re);
        assert_eq!(p.value.im, -q.value.im);
    }
}

#[test]
fn triple_root_touch_along_k_sqrt3() {
    let sweep = line(
        Space::U,
        Param::KHat,
        Param::KHat.triple_root_value(),
        (-5.0, 5.0),
        1001,
    );
    let s = scan_1d(&sweep).unwrap();
    assert_eq!(s.bifurcation_points.len(), 1);
    let p = s.bifurcation_points[0];
    assert_eq!(p.kind, CrossingKind::Touch);
    assert!((p.b_hat - 3f64.sqrt() / 9.0).abs() < 1e-7);

    let theta = scan_1d(&LineSweep {
        space: Space::Theta,
        ..sweep
    })
    .unwrap();
    let u_count: usize = s.samples.iter().map(|x| x.values.len()).sum();
    let t_count: usize = theta.samples.iter().map(|x| x.values.len()).sum();
    assert!(t_count < u_count);
    for (a, b) in s.samples.iter().zip(&theta.samples) {
        assert!(b.values.len() <= a.values.len());
    }
}

#[test]
fn one_crossing_is_one_real_pair_merge() {
    // k̂ = 3: Δ(0) = 5 > 0 and Δ(1) < 0
    let s = scan_1d(&line(Space::U, Param::KHat, 3.0, (0.0, 1.0), 51)).unwrap();
    assert_eq!(s.samples[0].values.len(), 3);
    let b = assemble_branches(&s).unwrap();
    assert_eq!(b.events.len(), 1);
    let e = &b.events[0];
    assert_eq!(e.kind, BranchEventKind::Merge);
    assert_eq!(e.before.len(), 2);
    assert_eq!(e.after.len(), 2);
    assert!(e.before.iter().all(|&i| b.branches[i].real));
    assert!(e.after.iter().all(|&i| !b.branches[i].real));
    // the root-count oracle agrees on both sides of the event
    let left = solve_numeric_oracle(&ReducedParams::cubic(3.0, e.t - 1e-6));
    let right = solve_numeric_oracle(&ReducedParams::cubic(3.0, e.t + 1e-6));
    assert_eq!(left.distinct_real_count(), 3);
    assert_eq!(right.distinct_real_count(), 1);
}

#[test]
fn negative_discriminant_sweep_has_one_real_branch_and_a_pair() {
    let s = scan_1d(&line(Space::U, Param::KHat, 0.0, (-5.0, 5.0), 201)).unwrap();
    assert!(s.bifurcation_points.is_empty());
    let b = assemble_branches(&s).unwrap();
    assert_eq!(b.branches.len(), 3);
    assert_eq!(b.branches.iter().filter(|x| x.real).count(), 1);
    assert!(b.loops.is_empty());
    let pair: Vec<_> = b.branches.iter().filter(|x| !x.real).collect();
    for (p, q) in pair[0].points.iter().zip(&pair[1].points) {
        assert_eq!(p.value.im, -q.value.im);
    }
}

#[test]
fn degenerate_range_gives_constant_branches() {
    let s = scan_1d(&line(Space::U, Param::KHat, 3.0, (0.5, 0.5), 9)).unwrap();
    let b = assemble_branches(&s).unwrap();
    assert_eq!(b.branches.len(), 3);
    for br in &b.branches {
        assert_eq!(br.points.len(), 9);
        assert!(br.points.iter().all(|p| p.value == br.points[0].value));
    }
}

#[test]
fn surfaces_do_not_assemble_into_branches() {
    assert!(assemble_branches(&surface(Space::U, 3)).is_err());
}

/// Event kinds, positions and branch counts.
fn topology(s: &ScanResult) -> (Vec<BranchEventKind>, Vec<f64>, usize, usize) {
    let b = assemble_branches(s).unwrap();
    (
        b.events.iter().map(|e| e.kind).collect(),
        b.events.iter().map(|e| e.t).collect(),
        b.branches.len(),
        b.loops.len(),
    )
}

#[test]
fn refinement_keeps_topology() {
    let sweeps = [
        line(
            Space::U,
            Param::BHat,
            Param::BHat.triple_root_value(),
            (-5.0, 5.0),
            201,
        ),
        line(
            Space::U,
            Param::KHat,
            Param::KHat.triple_root_value(),
            (-5.0, 5.0),
            201,
        ),
        line(Space::U, Param::KHat, 3.0, (-5.0, 5.0), 201),
        line(Space::U, Param::BHat, -0.4, (-5.0, 5.0), 201),
        line(Space::Theta, Param::BHat, 0.1, (-5.0, 5.0), 201),
    ];
    for sweep in sweeps {
        let coarse = topology(&scan_1d(&sweep).unwrap());
        let fine = topology(
            &scan_1d(&LineSweep {
                n: 2 * sweep.n - 1,
                ..sweep
            })
            .unwrap(),
        );
        assert_eq!(coarse.0, fine.0, "{sweep:?}");
        assert_eq!((coarse.2, coarse.3), (fine.2, fine.3), "{sweep:?}");
        for (a, b) in coarse.1.iter().zip(&fine.1) {
            assert!((a - b).abs() < 1e-7, "{sweep:?}: {a} vs {b}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn line_sweep_invariants(
        fixed_k in any::<bool>(),
        value in -5.0f64..5.0,
        lo in -5.0f64..0.0,
        hi in 0.0f64..5.0,
        n in 2usize..80,
    ) {
        let fixed = if fixed_k { Param::KHat } else { Param::BHat };
        let u = scan_1d(&line(Space::U, fixed, value, (lo, hi), n)).unwrap();
        let t = scan_1d(&line(Space::Theta, fixed, value, (lo, hi), n)).unwrap();
        prop_assert_eq!(u.coverage, 1.0);
        for (a, b) in u.samples.iter().zip(&t.samples) {
            prop_assert!(a.max_residual < 1e-9 && b.max_residual < 1e-9);
            prop_assert!(b.values.len() <= a.values.len());
            // conjugate pairs are exact
            for v in &a.values {
                if v.value.im != 0.0 {
                    prop_assert!(a.values.iter().any(|w| w.value == v.value.conj()));
                }
            }
        }
        for p in &u.bifurcation_points {
            prop_assert!(p.discriminant.abs() < 1e-8);
        }
        let b = assemble_branches(&u).unwrap();
        let points: usize = b.branches.iter().map(|x| x.points.len()).sum();
        prop_assert_eq!(points, 3 * n);
    }
}
