//! Domain types shared by every solver.

use alloc::vec::Vec;
use core::cmp::Ordering;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Physical inputs of the reduced diode problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiodeParams {
    pub j_x: f64,
    #[serde(rename = "phi_L")]
    pub phi_l: f64,
    #[serde(rename = "a_L")]
    pub a_l: f64,
    /// Cathode slope `v'(0)` of the magnetic potential.
    pub beta: f64,
    /// `1 + phi_L`, the anode value of `u`.
    pub alpha: f64,
}

impl DiodeParams {
    /// `beta = 0` is admitted as the Child–Langmuir (unmagnetized) case.
    pub fn new(j_x: f64, phi_l: f64, a_l: f64, beta: f64) -> Result<Self> {
        if !(j_x > 0.0) || !j_x.is_finite() {
            return Err(domain("j_x must be positive and finite"));
        }
        if !(beta >= 0.0) || !beta.is_finite() {
            return Err(domain("beta must be non-negative and finite"));
        }
        if !phi_l.is_finite() || !a_l.is_finite() {
            return Err(domain("boundary values must be finite"));
        }
        Ok(Self {
            j_x,
            phi_l,
            a_l,
            beta,
            alpha: 1.0 + phi_l,
        })
    }
}

/// Coefficients of the deflection cubic and the sweep parameter γ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedParams {
    pub k_hat: f64,
    pub b_hat: f64,
    pub gamma: f64,
}

impl ReducedParams {
    pub const fn new(k_hat: f64, b_hat: f64, gamma: f64) -> Self {
        Self {
            k_hat,
            b_hat,
            gamma,
        }
    }

    /// Cubic coefficients only; γ does not enter the cubic.
    pub const fn cubic(k_hat: f64, b_hat: f64) -> Self {
        Self {
            k_hat,
            b_hat,
            gamma: 0.0,
        }
    }
}

/// `k̂ = k/(8jₓ)`, `b̂ = β²/(2jₓ)`, `γ = −β²/(2jₓ)`.
///
/// `gamma` keeps the published sign convention. The coefficient that actually
/// governs θ along solutions of the `(u, v)` system is `+β²/(2jₓ)`, see
/// [`crate::bvp::theta_gamma`].
pub fn reduce_params(k: f64, params: &DiodeParams) -> Result<ReducedParams> {
    let j_x = params.j_x;
    if !(j_x > 0.0) {
        return Err(domain("j_x must be positive"));
    }
    let beta_sq = params.beta * params.beta;
    let b_hat = beta_sq / (2.0 * j_x);
    Ok(ReducedParams {
        k_hat: k / (8.0 * j_x),
        b_hat,
        gamma: -b_hat,
    })
}

/// A complex number as it appears in reports.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ComplexValue {
    pub re: f64,
    pub im: f64,
}

impl ComplexValue {
    pub const fn new(re: f64, im: f64) -> Self {
        Self { re, im }
    }

    pub const fn real(re: f64) -> Self {
        Self { re, im: 0.0 }
    }

    pub fn is_real(&self) -> bool {
        self.im == 0.0
    }

    pub fn conj(self) -> Self {
        Self {
            re: self.re,
            im: -self.im,
        }
    }

    /// Lexicographic order on `(re, im)`.
    pub fn lex_cmp(&self, other: &Self) -> Ordering {
        let by = |a: f64, b: f64| a.partial_cmp(&b).unwrap_or_else(|| a.total_cmp(&b));
        by(self.re, other.re).then(by(self.im, other.im))
    }
}

impl From<Complex64> for ComplexValue {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

impl From<ComplexValue> for Complex64 {
    fn from(z: ComplexValue) -> Self {
        Complex64::new(z.re, z.im)
    }
}

/// Root structure of the cubic as predicted by the sign of its discriminant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RootClass {
    OneRealConjugatePair,
    TripleRoot,
    DoubleRoot,
    ThreeDistinctReal,
}

/// One distinct root and how many times it occurs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootEntry {
    pub value: ComplexValue,
    pub multiplicity: u8,
}

/// All complex roots of the deflection cubic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootSet {
    pub discriminant: f64,
    pub class: RootClass,
    pub roots: Vec<RootEntry>,
    /// Set when a closed form was outside its domain and the numeric oracle
    /// supplied the roots instead.
    #[serde(default)]
    pub fallback: bool,
}

impl RootSet {
    /// The three roots repeated by multiplicity, sorted by `(re, im)`.
    pub fn expanded(&self) -> Vec<ComplexValue> {
        let mut out: Vec<ComplexValue> = self
            .roots
            .iter()
            .flat_map(|r| core::iter::repeat_n(r.value, r.multiplicity as usize))
            .collect();
        out.sort_by(ComplexValue::lex_cmp);
        out
    }

    pub fn total_multiplicity(&self) -> usize {
        self.roots.iter().map(|r| r.multiplicity as usize).sum()
    }

    /// Number of distinct roots with zero imaginary part.
    pub fn distinct_real_count(&self) -> usize {
        self.roots.iter().filter(|r| r.value.is_real()).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(j_x: f64, beta: f64) -> DiodeParams {
        DiodeParams::new(j_x, 0.5, 0.0, beta).unwrap()
    }

    #[test]
    fn reduce_zero_case() {
        let r = reduce_params(0.0, &params(1.0, 0.0)).unwrap();
        assert_eq!((r.k_hat, r.b_hat, r.gamma), (0.0, 0.0, 0.0));
    }

    #[test]
    fn reduce_identity_scaling() {
        let r = reduce_params(8.0, &params(1.0, core::f64::consts::SQRT_2)).unwrap();
        assert_eq!(r.k_hat, 1.0);
        assert!((r.b_hat - 1.0).abs() < 1e-15);
        assert!((r.gamma + 1.0).abs() < 1e-15);
    }

    #[test]
    fn reduce_half_current() {
        // k̂ = 4/(8·0.5) = 1, b̂ = 1/(2·0.5) = 1
        let r = reduce_params(4.0, &params(0.5, 1.0)).unwrap();
        assert_eq!((r.k_hat, r.b_hat, r.gamma), (1.0, 1.0, -1.0));
    }

    #[test]
    fn alpha_is_one_plus_phi() {
        let p = DiodeParams::new(0.3, 2.25, 0.1, 0.2).unwrap();
        assert_eq!(p.alpha, 3.25);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(DiodeParams::new(0.0, 0.0, 0.0, 0.0).is_err());
        assert!(DiodeParams::new(-1.0, 0.0, 0.0, 0.0).is_err());
        assert!(DiodeParams::new(1.0, 0.0, 0.0, -0.1).is_err());
        assert!(DiodeParams::new(f64::NAN, 0.0, 0.0, 0.0).is_err());
        let mut p = params(1.0, 1.0);
        p.j_x = -2.0;
        assert!(reduce_params(1.0, &p).is_err());
    }

    #[test]
    fn json_field_names() {
        let p = DiodeParams::new(0.5, 1.0, 0.2, 0.3).unwrap();
        let v: serde_json::Value = serde_json::to_value(p).unwrap();
        for key in ["j_x", "phi_L", "a_L", "beta", "alpha"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        let r = serde_json::to_value(ReducedParams::new(1.0, 2.0, 3.0)).unwrap();
        assert_eq!(r["k_hat"], 1.0);
        assert_eq!(r["b_hat"], 2.0);
    }

    proptest::proptest! {
        #[test]
        fn reduce_is_homogeneous(
            k in -10.0f64..10.0,
            j_x in 0.01f64..10.0,
            beta in 0.0f64..5.0,
            e in -4i32..4,
        ) {
            // powers of two keep every product exact
            let s = libm::ldexp(1.0, 2 * e);
            let sqrt_s = libm::ldexp(1.0, e);
            let a = reduce_params(k, &params(j_x, beta)).unwrap();
            let b = reduce_params(k * s, &params(j_x * s, beta * sqrt_s)).unwrap();
            proptest::prop_assert_eq!(a, b);
            proptest::prop_assert!(a.gamma <= 0.0);
            proptest::prop_assert!(a.b_hat >= 0.0);
        }
    }
}
