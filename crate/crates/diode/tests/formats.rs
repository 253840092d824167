use diode::output::{
    write_diode, write_potential, write_scan_csv, write_scan_gnuplot, write_scan_json, Format,
};
use diode::par;
use diode_core::bifurcation::{
    self, assemble_branches, LineSweep, Param, Space, SurfaceSweep, ZAxis,
};
use diode_core::bvp::{integrate_uv, DiodeState, UvOptions};
use diode_core::potential::{integrate_d, IntegrateOptions, PotentialState};
use diode_core::Trajectory;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn parse_csv(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn potential_csv_round_trips_exactly() {
    let traj = integrate_d(1.0, 3.0, 1.0, &IntegrateOptions::default()).unwrap();
    let mut buf = Vec::new();
    write_potential(&mut buf, &traj, Format::Csv).unwrap();
    let (header, rows) = parse_csv(std::str::from_utf8(&buf).unwrap());
    assert_eq!(header, ["x", "D", "D_prime"]);
    assert_eq!(rows.len(), traj.len());
    for (row, (x, s)) in rows.iter().zip(traj.iter()) {
        assert_eq!(row, &[x, s.d, s.d_prime]);
    }
}

#[test]
fn json_trajectories_round_trip() {
    let traj = integrate_uv(0.5, 0.3, &UvOptions::default()).unwrap();
    let mut buf = Vec::new();
    write_diode(&mut buf, &traj, Format::Json).unwrap();
    let back: Trajectory<DiodeState> = serde_json::from_slice(&buf).unwrap();
    assert_eq!(back, traj);

    let traj = integrate_d(1.0, 2.0, 5.0, &IntegrateOptions::default()).unwrap();
    let mut buf = Vec::new();
    write_potential(&mut buf, &traj, Format::Json).unwrap();
    let back: Trajectory<PotentialState> = serde_json::from_slice(&buf).unwrap();
    assert_eq!(back, traj);
}

#[test]
fn diode_gnuplot_columns() {
    let traj = integrate_uv(0.2, 0.0, &UvOptions::default()).unwrap();
    let mut buf = Vec::new();
    write_diode(&mut buf, &traj, Format::Gnuplot).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# x u u_prime v v_prime theta"));
    for (line, (x, s)) in lines.zip(traj.iter()) {
        let v: Vec<f64> = line.split(' ').map(|t| t.parse().unwrap()).collect();
        assert_eq!(v, [x, s.u, s.u_prime, s.v, s.v_prime, s.theta]);
    }
}

#[test]
fn surface_gnuplot_is_a_nonuniform_matrix() {
    let spec = SurfaceSweep {
        space: Space::Theta,
        k_range: (-5.0, 5.0),
        b_range: (-5.0, 5.0),
        n_k: 7,
        n_b: 5,
        z: ZAxis::Re,
    };
    let scan = par::scan_surface(&spec).unwrap();
    let mut buf = Vec::new();
    write_scan_gnuplot(&mut buf, &scan, None).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let blocks: Vec<&str> = text.split("\n\n\n").collect();
    let slots = scan.samples.iter().map(|s| s.values.len()).max().unwrap();
    assert_eq!(blocks.len(), slots);
    for block in blocks {
        let rows: Vec<Vec<f64>> = block
            .lines()
            .filter(|l| !l.starts_with('#'))
            .map(|l| l.split(' ').map(|t| t.parse().unwrap()).collect())
            .collect();
        assert_eq!(rows.len(), 1 + spec.n_b);
        assert_eq!(rows[0][0], spec.n_k as f64);
        assert_eq!(rows[0][1], -5.0);
        assert_eq!(rows[1][0], -5.0);
        assert!(rows.iter().all(|r| r.len() == 1 + spec.n_k));
    }
}

#[test]
fn scan_csv_and_json_agree() {
    let sweep = LineSweep {
        space: Space::U,
        fixed: Param::KHat,
        fixed_value: 3.0,
        range: (-1.0, 1.0),
        n: 21,
    };
    let scan = par::scan_1d(&sweep).unwrap();
    let branches = assemble_branches(&scan).unwrap();

    let mut csv = Vec::new();
    write_scan_csv(&mut csv, &scan).unwrap();
    let (_, rows) = parse_csv(std::str::from_utf8(&csv).unwrap());
    assert_eq!(
        rows.len(),
        scan.samples.iter().map(|s| s.values.len()).sum::<usize>()
    );

    let mut json = Vec::new();
    write_scan_json(&mut json, &scan, Some(&branches)).unwrap();
    let doc: serde_json::Value = serde_json::from_slice(&json).unwrap();
    assert_eq!(doc["samples"].as_array().unwrap().len(), 21);
    assert_eq!(
        doc["branches"]["branches"].as_array().unwrap().len(),
        branches.branches.len()
    );

    let mut i = 0;
    for s in &scan.samples {
        for (slot, v) in s.values.iter().enumerate() {
            let r = &rows[i];
            assert_eq!(
                r[..5],
                [s.k_hat, s.b_hat, slot as f64, v.value.re, v.value.im]
            );
            assert_eq!(r[5], v.multiplicity as f64);
            assert_eq!(r[6], s.discriminant);
            i += 1;
        }
    }
}

#[test]
fn parallel_surface_matches_sequential() {
    for space in [Space::U, Space::Theta] {
        let spec = SurfaceSweep {
            space,
            k_range: (-5.0, 5.0),
            b_range: (-5.0, 5.0),
            n_k: 61,
            n_b: 37,
            z: ZAxis::Im,
        };
        assert_eq!(
            par::scan_surface(&spec).unwrap(),
            bifurcation::scan_surface(&spec).unwrap()
        );
    }
}

#[test]
fn parallel_lines_match_sequential_on_random_sweeps() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..40 {
        let lo = rng.random_range(-5.0..0.0);
        let sweep = LineSweep {
            space: if rng.random_bool(0.5) {
                Space::U
            } else {
                Space::Theta
            },
            fixed: if rng.random_bool(0.5) {
                Param::KHat
            } else {
                Param::BHat
            },
            fixed_value: rng.random_range(-5.0..5.0),
            range: (lo, lo + rng.random_range(0.0..10.0)),
            n: rng.random_range(2..300),
        };
        assert_eq!(
            par::scan_1d(&sweep).unwrap(),
            bifurcation::scan_1d(&sweep).unwrap(),
            "{sweep:?}"
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn scan_csv_values_round_trip(k in -5.0f64..5.0, lo in -5.0f64..5.0, width in 0.0f64..3.0, n in 2usize..40) {
        let sweep = LineSweep { space: Space::U, fixed: Param::KHat, fixed_value: k, range: (lo, lo + width), n };
        let scan = par::scan_1d(&sweep).unwrap();
        let mut csv = Vec::new();
        write_scan_csv(&mut csv, &scan).unwrap();
        let (_, rows) = parse_csv(std::str::from_utf8(&csv).unwrap());
        let expected: Vec<f64> = scan.samples.iter().flat_map(|s| s.values.iter().flat_map(|v| [v.value.re, v.value.im])).collect();
        let got: Vec<f64> = rows.iter().flat_map(|r| [r[3], r[4]]).collect();
        prop_assert_eq!(got, expected);
    }
}
