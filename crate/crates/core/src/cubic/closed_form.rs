use alloc::vec;
use core::f64::consts::PI;

use super::{discriminant, solve_numeric_oracle, zero_band};
use crate::model::{ComplexValue, ReducedParams, RootClass, RootEntry, RootSet};

/// `|3 − k̂²|` below which a root inside the Δ = 0 band is taken as triple.
const TRIPLE_TOL: f64 = 1e-6;

/// Roots of `u³ + k̂u² + u + b̂` from the case formulas.
///
/// Δ < 0 uses Cardano radicals, Δ > 0 the trigonometric form (which needs
/// `k̂² > 3`), and the Δ = 0 band the rational double/triple root formulas.
/// A case outside its real domain falls back to the companion-matrix oracle
/// and sets [`RootSet::fallback`].
pub fn solve_closed_form(p: &ReducedParams) -> RootSet {
    let delta = discriminant(p);
    let k = p.k_hat;
    if libm::fabs(delta) <= zero_band(p) {
        degenerate(p, delta)
    } else if delta < 0.0 {
        cardano(p, delta)
    } else if k * k > 3.0 {
        trigonometric(p, delta)
    } else {
        let mut set = solve_numeric_oracle(p);
        set.discriminant = delta;
        set.fallback = true;
        set
    }
}

fn degenerate(p: &ReducedParams, delta: f64) -> RootSet {
    let (k, b) = (p.k_hat, p.b_hat);
    let gap = 3.0 - k * k;
    if libm::fabs(gap) <= TRIPLE_TOL {
        return RootSet {
            discriminant: delta,
            class: RootClass::TripleRoot,
            roots: vec![RootEntry {
                value: ComplexValue::real(-k / 3.0),
                multiplicity: 3,
            }],
            fallback: false,
        };
    }
    let simple = (k * k * k - 4.0 * k + 9.0 * b) / gap;
    let double = (9.0 * b - k) / (2.0 * k * k - 6.0);
    RootSet {
        discriminant: delta,
        class: RootClass::DoubleRoot,
        roots: vec![
            RootEntry {
                value: ComplexValue::real(simple),
                multiplicity: 1,
            },
            RootEntry {
                value: ComplexValue::real(double),
                multiplicity: 2,
            },
        ],
        fallback: false,
    }
}

fn cardano(p: &ReducedParams, delta: f64) -> RootSet {
    let (k, b) = (p.k_hat, p.b_hat);
    let gap = 3.0 - k * k;
    let a1 = -54.0 * k * k * k + 243.0 * k - 729.0 * b;
    let a2 = libm::sqrt(libm::fmax(a1 * a1 + 2916.0 * gap * gap * gap, 0.0));
    let cbrt4 = libm::cbrt(4.0);

    // ∛(A₁ + A₂)·∛(A₁ − A₂) = −9∛4·(3 − k̂²); take the larger-magnitude cube
    // root directly and recover the other from the product.
    let big = libm::cbrt(a1 + libm::copysign(a2, a1));
    let small = if big == 0.0 {
        0.0
    } else {
        -9.0 * cbrt4 * gap / big
    };
    let (plus, minus) = if a1 >= 0.0 {
        (big, small)
    } else {
        (small, big)
    };

    let sum = plus + minus;
    let diff = plus - minus;
    let mut real = -k / 3.0 + cbrt4 / 18.0 * sum;
    let mut pair_re = -k / 3.0 - cbrt4 / 36.0 * sum;
    let pair_im = libm::fabs(libm::sqrt(3.0) * cbrt4 / 36.0 * diff);
    let pair_sq = pair_re * pair_re + pair_im * pair_im;
    if real * real < pair_sq {
        // the radical sum cancels for a small real root; Vieta's product and sum
        // give the same roots without cancellation
        real = -b / pair_sq;
        pair_re = -(k + real) / 2.0;
    }
    RootSet {
        discriminant: delta,
        class: RootClass::OneRealConjugatePair,
        roots: vec![
            RootEntry {
                value: ComplexValue::real(real),
                multiplicity: 1,
            },
            RootEntry {
                value: ComplexValue::new(pair_re, pair_im),
                multiplicity: 1,
            },
            RootEntry {
                value: ComplexValue::new(pair_re, -pair_im),
                multiplicity: 1,
            },
        ],
        fallback: false,
    }
}

fn trigonometric(p: &ReducedParams, delta: f64) -> RootSet {
    let (k, b) = (p.k_hat, p.b_hat);
    let s = libm::sqrt(k * k - 3.0);
    let a3 = 2.0 / 3.0 * s;
    let a4 = (2.0 * k * k * k - 9.0 * k + 27.0 * b) / ((6.0 - 2.0 * k * k) * s);
    let phi = libm::acos(a4.clamp(-1.0, 1.0)) / 3.0;
    let root = |shift: f64| RootEntry {
        value: ComplexValue::real(a3 * libm::cos(phi + shift) - k / 3.0),
        multiplicity: 1,
    };
    RootSet {
        discriminant: delta,
        class: RootClass::ThreeDistinctReal,
        roots: vec![root(0.0), root(2.0 * PI / 3.0), root(4.0 * PI / 3.0)],
        fallback: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cubic::cubic_residual;
    use crate::model::RootClass;
    use alloc::vec::Vec;

    const SQRT3: f64 = 1.732_050_807_568_877_2;

    fn rp(k: f64, b: f64) -> ReducedParams {
        ReducedParams::cubic(k, b)
    }

    fn close(a: &[ComplexValue], b: &[(f64, f64)], tol: f64) -> bool {
        a.len() == b.len()
            && a.iter()
                .zip(b)
                .all(|(x, y)| (x.re - y.0).abs() <= tol && (x.im - y.1).abs() <= tol)
    }

    #[test]
    fn double_root_example() {
        let set = solve_closed_form(&rp(-2.0, 0.0));
        assert_eq!(set.class, RootClass::DoubleRoot);
        assert!(close(
            &set.expanded(),
            &[(0.0, 0.0), (1.0, 0.0), (1.0, 0.0)],
            1e-14
        ));
        let two = set.roots.iter().find(|r| r.multiplicity == 2).unwrap();
        assert_eq!(two.value, ComplexValue::real(1.0));
    }

    #[test]
    fn imaginary_pair_example() {
        let set = solve_closed_form(&rp(0.0, 0.0));
        assert_eq!(set.class, RootClass::OneRealConjugatePair);
        assert!(close(
            &set.expanded(),
            &[(0.0, -1.0), (0.0, 0.0), (0.0, 1.0)],
            1e-14
        ));
    }

    #[test]
    fn triple_root_example() {
        let set = solve_closed_form(&rp(SQRT3, SQRT3 / 9.0));
        assert_eq!(set.class, RootClass::TripleRoot);
        assert_eq!(set.roots.len(), 1);
        assert!((set.roots[0].value.re + SQRT3 / 3.0).abs() < 1e-15);
        // the seven-decimal inputs of the CLI example land in the same case
        let set = solve_closed_form(&rp(1.7320508, 0.1924501));
        assert_eq!(set.class, RootClass::TripleRoot);
    }

    #[test]
    fn three_real_example() {
        // u(u² − 3u + 1): 0, (3 ± √5)/2
        let set = solve_closed_form(&rp(-3.0, 0.0));
        assert_eq!(set.class, RootClass::ThreeDistinctReal);
        let s5 = libm::sqrt(5.0);
        let want = [(0.0, 0.0), ((3.0 - s5) / 2.0, 0.0), ((3.0 + s5) / 2.0, 0.0)];
        assert!(close(&set.expanded(), &want, 1e-14));
    }

    #[test]
    fn every_case_satisfies_vieta() {
        let cases = [
            (1.7, 0.4),
            (-4.0, 1.0),
            (4.5, 2.0),
            (0.3, -2.0),
            (-2.0, 0.0),
            (3.0, 0.5),
        ];
        for (k, b) in cases {
            let p = rp(k, b);
            let r: Vec<num_complex::Complex64> = solve_closed_form(&p)
                .expanded()
                .into_iter()
                .map(Into::into)
                .collect();
            let sum = r[0] + r[1] + r[2];
            let pairs = r[0] * r[1] + r[0] * r[2] + r[1] * r[2];
            let prod = r[0] * r[1] * r[2];
            assert!((sum + k).norm() < 1e-9, "sum at {k},{b}");
            assert!((pairs - 1.0).norm() < 1e-9, "pairs at {k},{b}");
            assert!((prod + b).norm() < 1e-9, "product at {k},{b}");
            for z in r {
                assert!(cubic_residual(z.into(), &p) < 1e-10);
            }
        }
    }

    #[test]
    fn conjugates_are_exact() {
        for (k, b) in [(1.7, 0.4), (0.0, 3.0), (-1.0, -1.0)] {
            let set = solve_closed_form(&rp(k, b));
            assert_eq!(set.roots[1].value, set.roots[2].value.conj());
        }
    }
}
