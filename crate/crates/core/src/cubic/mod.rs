//! The deflection cubic `u³ + k̂u² + u + b̂ = 0` and the θ-equation it induces.
//!
//! [`solve_closed_form`] evaluates the radical formulas case by case on the
//! sign of the discriminant; [`solve_numeric_oracle`] computes the same roots
//! from the eigenvalues of the companion matrix, sharing no code with the
//! closed forms. The two are compared by the tests and by every scan.

mod closed_form;
mod oracle;

use alloc::vec::Vec;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::model::{ComplexValue, ReducedParams, RootSet};

pub use closed_form::solve_closed_form;
pub use oracle::solve_numeric_oracle;

/// `Δ = 18k̂b̂ + k̂² − 4 − 4k̂³b̂ − 27b̂²`.
pub fn discriminant(p: &ReducedParams) -> f64 {
    let (k, b) = (p.k_hat, p.b_hat);
    18.0 * k * b + k * k - 4.0 - 4.0 * k * k * k * b - 27.0 * b * b
}

/// Half-width of the band in which Δ is treated as zero.
pub fn zero_band(p: &ReducedParams) -> f64 {
    1e-10 * (1.0 + libm::fabs(p.k_hat).powi(3) + p.b_hat * p.b_hat)
}

/// `|u³ + k̂u² + u + b̂|` at a complex point.
pub fn cubic_residual(u: ComplexValue, p: &ReducedParams) -> f64 {
    let u = Complex64::from(u);
    let v = ((u + p.k_hat) * u + 1.0) * u + p.b_hat;
    v.norm()
}

/// Largest distance between corresponding roots after sorting both sets by
/// `(re, im)`.
pub fn sorted_root_distance(a: &RootSet, b: &RootSet) -> f64 {
    a.expanded()
        .iter()
        .zip(b.expanded().iter())
        .map(|(x, y)| (Complex64::from(*x) - Complex64::from(*y)).norm())
        .fold(0.0, f64::max)
}

/// Largest distance between roots under the best pairing of the two sets.
///
/// Agrees with [`sorted_root_distance`] unless two roots share a real part to
/// within the comparison error, where the sort order is arbitrary.
pub fn matched_root_distance(a: &RootSet, b: &RootSet) -> f64 {
    const PERMS: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let (x, y) = (a.expanded(), b.expanded());
    PERMS
        .iter()
        .map(|perm| {
            (0..3)
                .map(|i| (Complex64::from(x[i]) - Complex64::from(y[perm[i]])).norm())
                .fold(0.0, f64::max)
        })
        .fold(f64::INFINITY, f64::min)
}

/// One admissible θ value and where it came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaCandidate {
    pub value: ComplexValue,
    /// Multiplicity of the source root.
    pub count: u8,
    /// Index of the source root in [`RootSet::roots`].
    pub source: usize,
}

/// θ = u² for every root with `Re(u) > 0`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ThetaCandidates {
    pub values: Vec<ThetaCandidate>,
    /// Roots (counted with multiplicity) dropped for `Re(u) ≤ 0`.
    pub dropped: usize,
}

impl ThetaCandidates {
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub fn theta_candidates(roots: &RootSet) -> ThetaCandidates {
    let mut out = ThetaCandidates::default();
    for (source, entry) in roots.roots.iter().enumerate() {
        let u = entry.value;
        if u.re > 0.0 {
            let value = ComplexValue::new(u.re * u.re - u.im * u.im, 2.0 * u.re * u.im);
            out.values.push(ThetaCandidate {
                value,
                count: entry.multiplicity,
                source,
            });
        } else {
            out.dropped += entry.multiplicity as usize;
        }
    }
    out
}

/// `|θ^{3/2} + k̂θ + θ^{1/2} + b̂|` with the principal square root.
pub fn theta_residual(theta: ComplexValue, p: &ReducedParams) -> f64 {
    let t = Complex64::from(theta);
    let s = t.sqrt();
    (t * s + t * p.k_hat + s + p.b_hat).norm()
}

/// A point `(k̂, b̂)` where the cubic is `(u − root)³`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TripleRootLocus {
    pub k_hat: f64,
    pub b_hat: f64,
    pub root: f64,
}

/// Both real solutions of `k̂ = −3r`, `3r² = 1`, `b̂ = −r³`.
pub fn triple_root_loci() -> [TripleRootLocus; 2] {
    let r = libm::sqrt(3.0) / 3.0;
    [-r, r].map(|root| TripleRootLocus {
        k_hat: -3.0 * root,
        b_hat: -root * root * root,
        root,
    })
}

/// The triple-root locus with `b̂ ≥ 0`: `(√3, √3/9, −√3/3)`.
pub fn triple_root_locus() -> TripleRootLocus {
    triple_root_loci()[0]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{RootClass, RootEntry};

    const SQRT3: f64 = 1.732_050_807_568_877_2;

    fn rp(k: f64, b: f64) -> ReducedParams {
        ReducedParams::cubic(k, b)
    }

    #[test]
    fn discriminant_examples() {
        assert_eq!(discriminant(&rp(0.0, 0.0)), -4.0);
        assert_eq!(discriminant(&rp(2.0, 0.0)), 0.0);
        assert_eq!(discriminant(&rp(-2.0, 0.0)), 0.0);
        assert!(discriminant(&rp(SQRT3, SQRT3 / 9.0)).abs() < 1e-14);
    }

    #[test]
    fn discriminant_matches_root_differences() {
        // u(u − r)(u − 1/r) keeps the linear coefficient at 1; Δ = Π (r_i − r_j)².
        let r: f64 = 2.5;
        let k = -(r + 1.0 / r);
        let expect = (r - 1.0 / r).powi(2);
        assert!((discriminant(&rp(k, 0.0)) - expect).abs() < 1e-12);
    }

    #[test]
    fn triple_locus_solves_vieta() {
        let t = triple_root_locus();
        assert!((t.k_hat - SQRT3).abs() < 1e-15);
        assert!((t.b_hat - SQRT3 / 9.0).abs() < 1e-15);
        assert!((t.root + SQRT3 / 3.0).abs() < 1e-15);
        assert!(discriminant(&rp(t.k_hat, t.b_hat)).abs() < 1e-12);
        assert!(cubic_residual(ComplexValue::real(t.root), &rp(t.k_hat, t.b_hat)) < 1e-12);
        let other = triple_root_loci()[1];
        assert!(other.b_hat < 0.0 && other.root > 0.0);
    }

    #[test]
    fn theta_candidates_examples() {
        let set = solve_closed_form(&rp(-2.0, 0.0));
        let c = theta_candidates(&set);
        assert_eq!(c.values.len(), 1);
        assert!((c.values[0].value.re - 1.0).abs() < 1e-14);
        assert_eq!(c.values[0].count, 2);
        assert_eq!(c.dropped, 1);

        let c = theta_candidates(&solve_closed_form(&rp(0.0, 0.0)));
        assert!(c.is_empty());
        assert_eq!(c.dropped, 3);

        let t = triple_root_locus();
        let c = theta_candidates(&solve_closed_form(&rp(t.k_hat, t.b_hat)));
        assert!(c.is_empty());
    }

    #[test]
    fn theta_candidates_keep_strict_positivity() {
        let set = RootSet {
            discriminant: 0.0,
            class: RootClass::ThreeDistinctReal,
            roots: alloc::vec![
                RootEntry {
                    value: ComplexValue::new(0.0, 1.0),
                    multiplicity: 1
                },
                RootEntry {
                    value: ComplexValue::new(2.0, 0.0),
                    multiplicity: 1
                },
                RootEntry {
                    value: ComplexValue::new(-1.0, 0.0),
                    multiplicity: 1
                },
            ],
            fallback: false,
        };
        let c = theta_candidates(&set);
        assert_eq!(c.values.len(), 1);
        assert_eq!(c.values[0].source, 1);
        assert_eq!(c.values[0].value, ComplexValue::real(4.0));
    }

    #[test]
    fn theta_residual_examples() {
        assert_eq!(theta_residual(ComplexValue::real(1.0), &rp(-2.0, 0.0)), 0.0);
        assert_eq!(theta_residual(ComplexValue::real(1.0), &rp(0.0, 0.0)), 2.0);
    }

    proptest::proptest! {
        #[test]
        fn theta_candidates_solve_theta_equation(k in -5.0f64..5.0, b in -5.0f64..5.0) {
            let p = rp(k, b);
            for c in theta_candidates(&solve_closed_form(&p)).values {
                proptest::prop_assert!(theta_residual(c.value, &p) < 1e-9);
            }
        }
    }
}
