//! Companion-matrix roots, polished by Newton's method on the cubic itself.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::Matrix3;
use num_complex::Complex64;

use crate::model::{ComplexValue, ReducedParams, RootClass, RootEntry, RootSet};

/// Roots closer than this are merged into one entry.
pub const CLUSTER_TOL: f64 = 1e-8;
/// Pairs this close are tested against the critical points of the cubic.
const NEAR_TOL: f64 = 1e-4;

fn eval(u: Complex64, k: f64, b: f64) -> (Complex64, Complex64) {
    let p = ((u + k) * u + 1.0) * u + b;
    let dp = (u * 3.0 + 2.0 * k) * u + 1.0;
    (p, dp)
}

fn polish(mut u: Complex64, k: f64, b: f64) -> Complex64 {
    let (mut p, mut dp) = eval(u, k, b);
    for _ in 0..50 {
        if p.norm() == 0.0 || dp.norm() == 0.0 {
            break;
        }
        let next = u - p / dp;
        let (np, ndp) = eval(next, k, b);
        if !(np.norm() < p.norm()) {
            break;
        }
        u = next;
        p = np;
        dp = ndp;
    }
    u
}

/// Scale for the rounding error of `p(u)`.
fn eval_scale(u: f64, k: f64, b: f64) -> f64 {
    let a = libm::fabs(u);
    a * a * a + libm::fabs(k) * a * a + a + libm::fabs(b)
}

/// Roots of the cubic from the eigenvalues of its companion matrix.
///
/// Multiplicities come from clustering within [`CLUSTER_TOL`]. Because a
/// double root is only determined to about `√ε`, roots closer than `1e-4` are
/// first checked against the real critical points of the cubic and snapped to
/// one when the cubic vanishes there to rounding.
pub fn solve_numeric_oracle(p: &ReducedParams) -> RootSet {
    let (k, b) = (p.k_hat, p.b_hat);
    let companion = Matrix3::new(-k, -1.0, -b, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0);
    let eig = companion.complex_eigenvalues();
    let mut roots: Vec<Complex64> = eig.iter().map(|&z| polish(z, k, b)).collect();
    enforce_conjugacy(&mut roots);

    let entries = cluster(&roots, k, b);
    let class = match entries.len() {
        1 => RootClass::TripleRoot,
        2 => RootClass::DoubleRoot,
        _ if entries.iter().all(|e| e.value.is_real()) => RootClass::ThreeDistinctReal,
        _ => RootClass::OneRealConjugatePair,
    };
    RootSet {
        discriminant: root_discriminant(&roots),
        class,
        roots: entries,
        fallback: false,
    }
}

/// Π (r_i − r_j)² computed from the roots.
pub fn root_discriminant(roots: &[Complex64]) -> f64 {
    let d = (roots[0] - roots[1]) * (roots[0] - roots[2]) * (roots[1] - roots[2]);
    (d * d).re
}

fn enforce_conjugacy(roots: &mut [Complex64]) {
    // a real cubic has a real root; the one nearest the axis is it
    let idx = (0..3)
        .min_by(|&i, &j| libm::fabs(roots[i].im).total_cmp(&libm::fabs(roots[j].im)))
        .unwrap_or(0);
    roots.swap(0, idx);
    roots[0].im = 0.0;
    let (a, b) = (roots[1], roots[2]);
    if a.im == 0.0 && b.im == 0.0 {
        return;
    }
    if a.im == 0.0 || b.im == 0.0 || a.im.signum() == b.im.signum() {
        // both polished onto the real axis side; keep them real
        roots[1].im = 0.0;
        roots[2].im = 0.0;
        return;
    }
    let re = 0.5 * (a.re + b.re);
    let im = 0.5 * (libm::fabs(a.im) + libm::fabs(b.im));
    roots[1] = Complex64::new(re, im);
    roots[2] = Complex64::new(re, -im);
}

fn cluster(roots: &[Complex64], k: f64, b: f64) -> Vec<RootEntry> {
    let crit = critical_points(k);
    let p = |u: f64| ((u + k) * u + 1.0) * u + b;
    let vanishes = |u: f64| libm::fabs(p(u)) <= 64.0 * f64::EPSILON * eval_scale(u, k, b);

    let spread = (0..3)
        .flat_map(|i| (i + 1..3).map(move |j| (i, j)))
        .map(|(i, j)| (roots[i] - roots[j]).norm())
        .fold(0.0, f64::max);
    let inflection = -k / 3.0;
    if spread < NEAR_TOL && vanishes(inflection) {
        return vec![RootEntry {
            value: ComplexValue::real(inflection),
            multiplicity: 3,
        }];
    }

    let mut values: Vec<ComplexValue> = roots.iter().map(|&z| z.into()).collect();
    if let Some(cps) = crit {
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            let (a, c) = (roots[i], roots[j]);
            if (a - c).norm() >= NEAR_TOL {
                continue;
            }
            let mid = 0.5 * (a.re + c.re);
            let cp = if libm::fabs(cps.0 - mid) < libm::fabs(cps.1 - mid) {
                cps.0
            } else {
                cps.1
            };
            if libm::fabs(cp - mid) < NEAR_TOL && vanishes(cp) {
                values[i] = ComplexValue::real(cp);
                values[j] = ComplexValue::real(cp);
            }
        }
    }

    let mut entries: Vec<RootEntry> = Vec::with_capacity(3);
    for v in values {
        let near = entries.iter_mut().find(|e| {
            let d = Complex64::from(e.value) - Complex64::from(v);
            d.norm() <= CLUSTER_TOL
        });
        match near {
            Some(e) => e.multiplicity += 1,
            None => entries.push(RootEntry {
                value: v,
                multiplicity: 1,
            }),
        }
    }
    entries
}

/// Real zeros of `3u² + 2k̂u + 1`, if any.
fn critical_points(k: f64) -> Option<(f64, f64)> {
    let disc = k * k - 3.0;
    if disc < -1e-12 {
        return None;
    }
    let s = libm::sqrt(libm::fmax(disc, 0.0));
    Some(((-k - s) / 3.0, (-k + s) / 3.0))
}
