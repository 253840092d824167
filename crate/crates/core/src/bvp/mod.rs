//! The two-potential system
//!
//! ```text
//! u'' = jₓ·u/√θ,   v'' = jₓ·v/√θ,   θ = u² − 1 − v²,
//! u(0) = 1, u'(0) = 0, v(0) = 0, v'(0) = β,
//! ```
//!
//! with the anode conditions `u(1) = α`, `v(1) = a_L` imposed by shooting.
//! Electrons are turned back where θ returns to zero; the first such point
//! `x*` is a free boundary and integration stops there.
//!
//! Differentiating θ twice and using `(u'² − v'²)' = 2jₓ(√θ)'` gives
//! `θ'' = jₓ(6√θ + 2/√θ) − 2β²`, the effective-potential equation with
//! `γ = β²/(2jₓ)`; see [`theta_gamma`].

mod child_langmuir;
mod shoot;

pub use child_langmuir::{child_langmuir_check, ChildLangmuirReport};
pub use shoot::{shoot, Freeze, ShootOptions, ShootResult};

use alloc::format;
use alloc::string::String;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::ode::{StepFailure, Stepper, System, Tolerance, Trial};
use crate::series::diode_series;
use crate::trajectory::{EventKind, Trajectory, TrajectoryEvent};

/// Sample of the `(u, v)` system; `theta` is computed from the other fields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiodeState {
    pub u: f64,
    pub u_prime: f64,
    pub v: f64,
    pub v_prime: f64,
    pub theta: f64,
}

impl DiodeState {
    /// Cathode state for a given `β`.
    pub fn cathode(beta: f64) -> Self {
        Self {
            u: 1.0,
            u_prime: 0.0,
            v: 0.0,
            v_prime: beta,
            theta: 0.0,
        }
    }

    /// `θ' = 2uu' − 2vv'`.
    pub fn theta_prime(&self) -> f64 {
        2.0 * (self.u * self.u_prime - self.v * self.v_prime)
    }

    fn from_shifted(y: &[f64; 4]) -> Self {
        Self {
            u: 1.0 + y[0],
            u_prime: y[1],
            v: y[2],
            v_prime: y[3],
            theta: theta_shifted(y),
        }
    }
}

/// θ from `w = u − 1`, which avoids the cancellation in `u² − 1` near the cathode.
fn theta_shifted(y: &[f64; 4]) -> f64 {
    y[0] * (y[0] + 2.0) - y[2] * y[2]
}

/// The γ for which `D = θ` solves the effective-potential equation.
///
/// The sign follows from the cathode data `u'(0) = 0`, `v'(0) = β`: the
/// conserved quantity `u'² − v'² − 2jₓ√θ` equals `−β²`, so γ is non-negative.
pub fn theta_gamma(j_x: f64, beta: f64) -> f64 {
    beta * beta / (2.0 * j_x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UvOptions {
    pub tol: f64,
    pub x0: f64,
    /// Anode position.
    pub x_end: f64,
    pub max_steps: usize,
}

impl Default for UvOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            x0: 1e-6,
            x_end: 1.0,
            max_steps: 200_000,
        }
    }
}

/// Location of the free boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XStar {
    pub x: f64,
    /// `θ'` on approach, negative.
    pub slope: f64,
    /// θ at the reported point, the last sample of the trajectory.
    pub theta: f64,
}

fn check(j_x: f64, beta: f64, x0: f64) -> Result<()> {
    if !(j_x > 0.0) || !j_x.is_finite() {
        return Err(domain("j_x must be positive"));
    }
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(domain("beta must be non-negative"));
    }
    if !(x0 > 0.0) || !x0.is_finite() {
        return Err(domain("startup offset x0 must be positive"));
    }
    Ok(())
}

/// `A = (9jₓ/(4√2))^{2/3}` in `u ≈ 1 + A·x^{4/3}`.
pub fn u_coefficient(j_x: f64) -> f64 {
    let c = libm::cbrt(9.0 * j_x / (4.0 * core::f64::consts::SQRT_2));
    c * c
}

/// Leading-order startup `(u, u', v, v')`.
pub fn series_startup_uv(j_x: f64, beta: f64, x0: f64) -> Result<(f64, f64, f64, f64)> {
    check(j_x, beta, x0)?;
    let a = u_coefficient(j_x);
    let b = 9.0 * j_x * beta / (28.0 * libm::sqrt(2.0 * a));
    let c = libm::cbrt(x0);
    let x13 = c * c * c * c;
    Ok((
        1.0 + a * x13,
        4.0 * a / 3.0 * c,
        beta * x0 + b * x0 * x13,
        beta + 7.0 * b / 3.0 * x13,
    ))
}

/// Startup from the full truncated series, as `[u − 1, u', v, v']`.
fn startup_shifted(j_x: f64, beta: f64, x0: f64) -> [f64; 4] {
    let (us, vs) = diode_series(j_x, beta);
    let c = libm::cbrt(x0);
    let t = c * c;
    // u = U(t), v = x·V(t), dt/dx = (2/3)t^{−1/2}
    let w = us.eval(t) - 1.0;
    let u_prime = us.eval_derivative(t) * 2.0 / 3.0 / libm::sqrt(t);
    let v = x0 * vs.eval(t);
    let v_prime = vs.eval(t) + 2.0 / 3.0 * t * vs.eval_derivative(t);
    [w, u_prime, v, v_prime]
}

/// High-order startup state at `x0`.
pub fn startup_uv(j_x: f64, beta: f64, x0: f64) -> Result<DiodeState> {
    check(j_x, beta, x0)?;
    Ok(DiodeState::from_shifted(&startup_shifted(j_x, beta, x0)))
}

struct UvOde {
    j_x: f64,
}

impl System<4> for UvOde {
    fn rhs(&self, _x: f64, y: &[f64; 4]) -> Option<[f64; 4]> {
        let theta = theta_shifted(y);
        if !(theta > 0.0) {
            return None;
        }
        let k = self.j_x / libm::sqrt(theta);
        Some([y[1], k * (1.0 + y[0]), y[3], k * y[2]])
    }
}

/// Integrate from the startup toward the anode, stopping at `x*` if θ
/// returns to zero first.
pub fn integrate_uv(j_x: f64, beta: f64, opts: &UvOptions) -> Result<Trajectory<DiodeState>> {
    check(j_x, beta, opts.x0)?;
    if !(opts.tol > 0.0) {
        return Err(domain("tolerance must be positive"));
    }
    if !(opts.x_end > opts.x0) {
        return Err(domain("anode position must exceed the startup offset"));
    }
    let y0 = startup_shifted(j_x, beta, opts.x0);
    let start = DiodeState::from_shifted(&y0);
    if !(start.theta > 0.0) {
        return Err(domain(format!(
            "theta is not positive at the startup x0 = {:e}",
            opts.x0
        )));
    }

    let sys = UvOde { j_x };
    let mut st = Stepper::new(
        &sys,
        opts.x0,
        y0,
        0.1 * opts.x0,
        Tolerance::uniform(opts.tol),
    )
    .ok_or_else(|| Error::Internal(String::from("startup state outside the domain")))?;
    st.max_steps = opts.max_steps;
    let mut traj = Trajectory::new(opts.x0, DiodeState::cathode(beta));
    traj.push(opts.x0, start);
    let mut max_theta = start.theta;

    while st.x < opts.x_end {
        match st.step(opts.x_end) {
            Ok(_) => {}
            Err(StepFailure::Underflow { x, h }) => {
                // stalled against the zero of θ
                let s = DiodeState::from_shifted(&st.y);
                if s.theta_prime() < 0.0 {
                    record_x_star(&mut traj, x, s);
                }
                traj.metadata.truncated =
                    Some(format!("step size underflow at x = {x:e} (h = {h:e})"));
                break;
            }
            Err(StepFailure::TooManySteps) => {
                traj.metadata.truncated = Some(String::from("step limit reached"));
                break;
            }
        }
        let s = DiodeState::from_shifted(&st.y);
        traj.push(st.x, s);
        max_theta = max_theta.max(s.theta);
        let slope = s.theta_prime();
        let closing = slope < 0.0 && (s.theta < 1e-8 * max_theta || s.theta < -slope * st.h);
        if closing && st.x < opts.x_end {
            if let Some(hit) = locate_zero(&mut st, opts.x_end) {
                let s = DiodeState::from_shifted(&hit.y);
                traj.push(hit.x, s);
                record_x_star(&mut traj, hit.x, s);
                break;
            }
        }
    }
    traj.metadata.stats = st.stats;
    Ok(traj)
}

fn record_x_star(traj: &mut Trajectory<DiodeState>, x: f64, s: DiodeState) {
    traj.metadata.events.push(TrajectoryEvent {
        kind: EventKind::FreeBoundary,
        x,
        value: s.theta_prime(),
    });
}

/// Bisect single steps from the current state for the zero of θ.
///
/// Returns the last state with θ > 0, or `None`
/// if θ stays positive up to `x_end`, in which case the stepper is left
/// unchanged.
fn locate_zero(st: &mut Stepper<'_, UvOde, 4>, x_end: f64) -> Option<Trial<4>> {
    let room = x_end - st.x;
    let s = DiodeState::from_shifted(&st.y);
    let guess = 2.0 * s.theta / -s.theta_prime();
    let ok = |t: &Option<Trial<4>>| t.as_ref().is_some_and(|t| theta_shifted(&t.y) > 0.0);

    let (mut lo, mut hi) = (0.0, guess.min(room));
    let mut best: Option<Trial<4>> = None;
    // widen until the step crosses the zero
    loop {
        let t = st.try_step(hi);
        if !ok(&t) {
            break;
        }
        if hi >= room {
            return None;
        }
        lo = hi;
        best = t;
        hi = (2.0 * hi).min(room);
    }
    let width = 1e-15 * (1.0 + libm::fabs(st.x));
    while hi - lo > width {
        if best.as_ref().is_some_and(|b| theta_shifted(&b.y) < 1e-11) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let t = st.try_step(mid);
        if ok(&t) {
            lo = mid;
            best = t;
        } else {
            hi = mid;
        }
    }
    let best = best?;
    st.accept(&best);
    Some(best)
}

/// Free boundary recorded on a trajectory by [`integrate_uv`].
pub fn find_x_star(traj: &Trajectory<DiodeState>) -> Option<XStar> {
    let e = traj.event(EventKind::FreeBoundary)?;
    let (_, last) = traj.last()?;
    Some(XStar {
        x: e.x,
        slope: e.value,
        theta: last.theta,
    })
}

/// Anode values `(u(1), v(1))`, or `None` if integration stopped early.
pub fn end_values(traj: &Trajectory<DiodeState>, x_end: f64) -> Option<(f64, f64)> {
    let (x, s) = traj.last()?;
    (x == x_end).then_some((s.u, s.v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_sign() {
        assert_eq!(theta_gamma(0.5, 0.3), 0.09 / 1.0);
        assert!((theta_gamma(0.5, 0.3) - 0.09).abs() < 1e-17);
    }

    #[test]
    fn leading_startup_matches_potential_leading_order() {
        // θ ≈ 2A·x^{4/3} and (2A)^{3/2} = (9/2)jₓ
        for j_x in [0.1, 0.5, 3.0] {
            let a = u_coefficient(j_x);
            assert!((libm::pow(2.0 * a, 1.5) - 4.5 * j_x).abs() < 1e-12 * j_x);
            let (u, _, v, _) = series_startup_uv(j_x, 0.0, 1e-6).unwrap();
            let (d, _) = crate::potential::series_startup_d(j_x, 1e-6).unwrap();
            assert!(((u * u - 1.0 - v * v) - d).abs() < 1e-6 * d);
        }
    }

    #[test]
    fn zero_beta_startup_has_no_v() {
        let (_, _, v, vp) = series_startup_uv(1.0, 0.0, 1e-3).unwrap();
        assert_eq!((v, vp), (0.0, 0.0));
        let s = startup_uv(1.0, 0.0, 1e-3).unwrap();
        assert_eq!((s.v, s.v_prime), (0.0, 0.0));
    }

    #[test]
    fn startup_rejects_bad_input() {
        assert!(series_startup_uv(1.0, 0.1, 0.0).is_err());
        assert!(series_startup_uv(0.0, 0.1, 1e-3).is_err());
        assert!(series_startup_uv(1.0, -0.1, 1e-3).is_err());
    }

    #[test]
    fn high_order_startup_agrees_with_leading_order() {
        let (j_x, beta, x0) = (0.5, 0.3, 1e-6);
        let (u, up, v, vp) = series_startup_uv(j_x, beta, x0).unwrap();
        let s = startup_uv(j_x, beta, x0).unwrap();
        // next corrections are O(x0^{2/3}) relative
        assert!(((s.u - 1.0) - (u - 1.0)).abs() < 1e-3 * (u - 1.0));
        assert!((s.u_prime - up).abs() < 1e-3 * up);
        assert!((s.v - v).abs() < 1e-9 * v);
        assert!((s.v_prime - vp).abs() < 1e-9 * vp);
    }
}
