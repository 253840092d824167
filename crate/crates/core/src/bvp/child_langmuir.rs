//! Child–Langmuir bounds for the non-magnetic problem `φ'' = jₓ(1 + φ)/√(φ(2 + φ))`.
//!
//! `φ₀ = δ²x^{4/3}` is a lower solution when `φ₀'' ≥ jₓ(1 + φ₀)/√(φ₀(2 + φ₀))`
//! on `(0, 1]`. Multiplying by `x^{2/3}` leaves `(1 + δ²s)/√(2 + δ²s)` with
//! `s = x^{4/3}`, increasing in `s`, so the worst point is `x = 1` and the
//! condition reduces to `4δ³ ≥ 9jₓ(1 + δ²)/√(2 + δ²)`. The line
//! `φ⁰ = φ_L·x` lies above it whenever `φ_L ≥ δ²`.

use serde::{Deserialize, Serialize};

/// Relative slack allowed when comparing the two sides of an inequality.
const SLACK: f64 = 1e-12;
const GRID: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChildLangmuirReport {
    pub delta: f64,
    pub j_x_max: f64,
    #[serde(rename = "phi_L")]
    pub phi_l: f64,
    /// `4δ³`.
    pub lower_lhs: f64,
    /// `9jₓ(1 + δ²)/√(2 + δ²)`.
    pub lower_rhs: f64,
    pub lower_holds: bool,
    /// `φ_L ≥ δ²`.
    pub upper_holds: bool,
    pub grid_points: usize,
    /// Grid points where `φ₀''` falls below the right-hand side.
    pub grid_violations: usize,
    /// Largest relative shortfall `(rhs − φ₀'')/rhs` on the grid, or 0.
    pub grid_max_violation: f64,
}

fn holds(lhs: f64, rhs: f64) -> bool {
    lhs >= rhs * (1.0 - SLACK)
}

/// Evaluate both bounds and check the lower one pointwise on a grid.
pub fn child_langmuir_check(delta: f64, j_x_max: f64, phi_l: f64) -> ChildLangmuirReport {
    let d2 = delta * delta;
    let lower_lhs = 4.0 * d2 * delta;
    let lower_rhs = 9.0 * j_x_max * (1.0 + d2) / libm::sqrt(2.0 + d2);

    let mut violations = 0;
    let mut worst: f64 = 0.0;
    for i in 1..=GRID {
        let x = i as f64 / GRID as f64;
        let x23 = libm::cbrt(x * x);
        let phi = d2 * x23 * x23;
        let curvature = 4.0 / 9.0 * d2 / x23;
        let rhs = j_x_max * (1.0 + phi) / libm::sqrt(phi * (2.0 + phi));
        if !holds(curvature, rhs) {
            violations += 1;
            worst = worst.max((rhs - curvature) / rhs);
        }
    }

    ChildLangmuirReport {
        delta,
        j_x_max,
        phi_l,
        lower_lhs,
        lower_rhs,
        lower_holds: holds(lower_lhs, lower_rhs),
        upper_holds: holds(phi_l, d2),
        grid_points: GRID,
        grid_violations: violations,
        grid_max_violation: worst,
    }
}
