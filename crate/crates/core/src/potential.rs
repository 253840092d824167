//! The effective-potential equation
//!
//! ```text
//! D'' = jₓ(6√D + 2/√D − 4γ),   D(0) = D'(0) = 0,
//! ```
//!
//! integrated from a fractional power series past the singular start. The
//! initial conditions fix the first integral
//! `(D')² = 8jₓ(D^{3/2} − γD + D^{1/2})`, whose bracket decides the regime:
//!
//! - `γ < 2`: the bracket stays positive and `D` grows without bound;
//! - `γ = 2`: `√D = 1` is a double zero, `D` creeps up to 1 along the stable
//!   manifold of the saddle `D = 1`;
//! - `γ > 2`: `D` turns at the first zero `Dₜ` of the bracket, falls back to 0
//!   symmetrically and repeats.
//!
//! The `γ = 2` trajectory is a separatrix, so the integrator projects each
//! step back onto `D' = √(8jₓ)·D^{1/4}(1 − √D)`; any unprojected scheme leaves
//! the saddle at rate `√(2jₓ)`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::ode::{StepFailure, Stepper, System, Tolerance, Trial};
use crate::series::potential_series;
use crate::trajectory::{hermite, EventKind, Trajectory, TrajectoryEvent};

pub const DEFAULT_X0: f64 = 1e-6;
pub const DEFAULT_TOL: f64 = 1e-10;
/// Width of the band around `γ = 2` treated as the separatrix.
pub const GAMMA_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialState {
    #[serde(rename = "D")]
    pub d: f64,
    #[serde(rename = "D_prime")]
    pub d_prime: f64,
}

impl PotentialState {
    pub const ORIGIN: Self = Self {
        d: 0.0,
        d_prime: 0.0,
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Unbounded,
    AsymptoticToOne,
    Periodic,
}

pub fn regime_of(gamma: f64) -> Regime {
    if (gamma - 2.0).abs() <= GAMMA_TOL {
        Regime::AsymptoticToOne
    } else if gamma < 2.0 {
        Regime::Unbounded
    } else {
        Regime::Periodic
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub gamma: f64,
    pub regime: Regime,
    pub turning_point: Option<f64>,
    /// Distance from the start to the turning point.
    pub half_period: Option<f64>,
    pub period: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrateOptions {
    /// Relative and absolute step tolerance.
    pub tol: f64,
    /// Offset of the series startup from the singular point.
    pub x0: f64,
    pub max_steps: usize,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            x0: DEFAULT_X0,
            max_steps: 200_000,
        }
    }
}

/// First zero of `D^{3/2} − γD + D^{1/2}` reached from `D = 0`, for `γ ≥ 2`.
pub fn turning_point(gamma: f64) -> Option<f64> {
    if gamma < 2.0 - GAMMA_TOL {
        return None;
    }
    // smaller root of y² − γy + 1, written to avoid cancellation for large γ
    let disc = (gamma * gamma - 4.0).max(0.0);
    let y = 2.0 / (gamma + libm::sqrt(disc));
    Some(y * y)
}

/// `jₓ(6√D + 2/√D − 4γ)`.
pub fn rhs_d(j_x: f64, gamma: f64, d: f64) -> f64 {
    let s = libm::sqrt(d);
    j_x * (6.0 * s + 2.0 / s - 4.0 * gamma)
}

/// `8jₓ(D^{3/2} − γD + D^{1/2})`, the value of `(D')²` on the solution.
pub fn first_integral(j_x: f64, gamma: f64, d: f64) -> f64 {
    let s = libm::sqrt(d);
    8.0 * j_x * (d * s - gamma * d + s)
}

/// `A = (9jₓ/2)^{2/3}` in `D ≈ A·x^{4/3}`.
pub fn leading_coefficient(j_x: f64) -> f64 {
    let c = libm::cbrt(4.5 * j_x);
    c * c
}

/// Leading-order startup `(A·x₀^{4/3}, (4A/3)·x₀^{1/3})`.
pub fn series_startup_d(j_x: f64, x0: f64) -> Result<(f64, f64)> {
    check_startup(j_x, x0)?;
    let a = leading_coefficient(j_x);
    let c = libm::cbrt(x0);
    Ok((a * c * c * c * c, 4.0 * a / 3.0 * c))
}

/// Startup from the full truncated series, including the γ-dependent terms.
pub fn startup_d(j_x: f64, gamma: f64, x0: f64) -> Result<PotentialState> {
    check_startup(j_x, x0)?;
    let p = potential_series(j_x, gamma);
    let c = libm::cbrt(x0);
    let t = c * c;
    // D = t²P(t), dt/dx = (2/3)t^{−1/2}
    let d = t * t * p.eval(t);
    let d_dt = 2.0 * t * p.eval(t) + t * t * p.eval_derivative(t);
    Ok(PotentialState {
        d,
        d_prime: d_dt * 2.0 / 3.0 / libm::sqrt(t),
    })
}

fn check_startup(j_x: f64, x0: f64) -> Result<()> {
    if !(j_x > 0.0) || !j_x.is_finite() {
        return Err(domain("j_x must be positive"));
    }
    if !(x0 > 0.0) || !x0.is_finite() {
        return Err(domain("startup offset x0 must be positive"));
    }
    Ok(())
}

struct PotentialOde {
    j_x: f64,
    gamma: f64,
}

impl System<2> for PotentialOde {
    fn rhs(&self, _x: f64, y: &[f64; 2]) -> Option<[f64; 2]> {
        (y[0] > 0.0).then(|| [y[1], rhs_d(self.j_x, self.gamma, y[0])])
    }
}

fn state(y: &[f64; 2]) -> PotentialState {
    PotentialState {
        d: y[0],
        d_prime: y[1],
    }
}

fn failure_reason(e: StepFailure) -> String {
    match e {
        StepFailure::Underflow { x, h } => format!("step size underflow at x = {x:e} (h = {h:e})"),
        StepFailure::TooManySteps => String::from("step limit reached"),
    }
}

fn x_tol(x: f64) -> f64 {
    1e-14 * (1.0 + libm::fabs(x))
}

/// Largest `h` in `[0, h_hi]` with `pred(step(h))` still true, to `x_tol`.
fn bisect_step<S: System<2>>(
    st: &mut Stepper<'_, S, 2>,
    h_hi: f64,
    x_tol: f64,
    pred: impl Fn(&[f64; 2]) -> bool,
) -> Option<Trial<2>> {
    let (mut lo, mut hi) = (0.0, h_hi);
    let mut best: Option<Trial<2>> = None;
    while hi - lo > x_tol {
        let mid = 0.5 * (lo + hi);
        match st.try_step(mid) {
            Some(t) if pred(&t.y) => {
                lo = mid;
                best = Some(t);
            }
            _ => hi = mid,
        }
    }
    best
}

/// Integrate `D` from the series startup at `x0` to `x_max`.
///
/// For `γ > 2` the turning point is located by bisection, the descent is
/// integrated until `D` falls back to its startup value, and later periods
/// are generated by periodic extension. The trajectory records the turning
/// point, the period end, and how far the integrated descent departs from
/// the mirror image of the rise.
pub fn integrate_d(
    j_x: f64,
    gamma: f64,
    x_max: f64,
    opts: &IntegrateOptions,
) -> Result<Trajectory<PotentialState>> {
    integrate_impl(j_x, gamma, x_max, opts, false)
}

fn integrate_impl(
    j_x: f64,
    gamma: f64,
    x_max: f64,
    opts: &IntegrateOptions,
    stop_at_turning: bool,
) -> Result<Trajectory<PotentialState>> {
    if !(opts.tol > 0.0) {
        return Err(domain("tolerance must be positive"));
    }
    let start = startup_d(j_x, gamma, opts.x0)?;
    if !(x_max > opts.x0) {
        return Err(domain("x_max must exceed the startup offset x0"));
    }
    let regime = regime_of(gamma);
    let sys = PotentialOde { j_x, gamma };
    let mut traj = Trajectory::new(opts.x0, PotentialState::ORIGIN);
    traj.push(opts.x0, start);

    let y0 = [start.d, start.d_prime];
    let mut st = Stepper::new(
        &sys,
        opts.x0,
        y0,
        0.1 * opts.x0,
        Tolerance::uniform(opts.tol),
    )
    .ok_or_else(|| Error::Internal(String::from("startup state outside the domain")))?;
    st.max_steps = opts.max_steps;
    if regime == Regime::AsymptoticToOne {
        st.h_max = 1.0 / libm::sqrt(2.0 * j_x);
    }
    // rise
    let mut turning: Option<(f64, f64)> = None;
    while st.x < x_max {
        let (px, py) = (st.x, st.y);
        let trial = match st.step(x_max) {
            Ok(t) => t,
            Err(e) => {
                traj.metadata.truncated = Some(failure_reason(e));
                traj.metadata.stats = st.stats;
                return Ok(traj);
            }
        };
        if regime == Regime::AsymptoticToOne {
            let d = trial.y[0].min(1.0);
            let dp =
                libm::sqrt(8.0 * j_x) * libm::sqrt(libm::sqrt(d)) * (1.0 - libm::sqrt(d)).max(0.0);
            st.reset(trial.x, [d, dp])
                .ok_or_else(|| Error::Internal(String::from("projection left the domain")))?;
        }
        if regime == Regime::Periodic && trial.y[1] <= 0.0 {
            st.reset(px, py)
                .ok_or_else(|| Error::Internal(String::from("lost the pre-turning state")))?;
            let hit = bisect_step(&mut st, trial.x - px, x_tol(px), |y| y[1] > 0.0)
                .ok_or_else(|| Error::Internal(String::from("turning point bracket collapsed")))?;
            let xt = hit.x;
            let dt = hit.y[0];
            st.reset(xt, [dt, 0.0])
                .ok_or_else(|| Error::Internal(String::from("turning state outside the domain")))?;
            st.stats.accepted += 1;
            traj.push(
                xt,
                PotentialState {
                    d: dt,
                    d_prime: 0.0,
                },
            );
            traj.metadata.events.push(TrajectoryEvent {
                kind: EventKind::TurningPoint,
                x: xt,
                value: dt,
            });
            turning = Some((xt, dt));
            break;
        }
        if st.y[0] <= 0.0 {
            return Err(Error::Internal(format!(
                "D became non-positive at x = {}",
                st.x
            )));
        }
        traj.push(st.x, state(&st.y));
    }

    let Some((xt, _)) = turning else {
        traj.metadata.stats = st.stats;
        return Ok(traj);
    };
    if stop_at_turning {
        traj.metadata.stats = st.stats;
        return Ok(traj);
    }

    // descent, integrated until D is back at its startup value
    let rise_len = traj.len();
    let floor = start.d;
    let mut descent_end: Option<f64> = None;
    while st.x < x_max {
        let (px, py) = (st.x, st.y);
        let trial = match st.step(x_max) {
            Ok(t) => t,
            Err(e) => {
                traj.metadata.truncated = Some(failure_reason(e));
                break;
            }
        };
        if trial.y[0] <= floor {
            st.reset(px, py)
                .ok_or_else(|| Error::Internal(String::from("lost the pre-floor state")))?;
            if let Some(hit) = bisect_step(&mut st, trial.x - px, x_tol(px), |y| y[0] > floor) {
                st.accept(&hit);
                traj.push(hit.x, state(&hit.y));
            }
            descent_end = Some(st.x);
            break;
        }
        traj.push(st.x, state(&st.y));
    }
    traj.metadata.stats = st.stats;

    let defect = reflection_defect(&traj, rise_len, xt);
    traj.metadata.events.push(TrajectoryEvent {
        kind: EventKind::ReflectionDefect,
        x: xt,
        value: defect,
    });

    let period = 2.0 * xt;
    let Some(end) = descent_end else {
        return Ok(traj);
    };
    if period <= end || period > x_max {
        return Ok(traj);
    }
    traj.push(period, PotentialState::ORIGIN);
    traj.metadata.events.push(TrajectoryEvent {
        kind: EventKind::PeriodEnd,
        x: period,
        value: 0.0,
    });

    // periodic extension
    let base: Vec<(f64, PotentialState)> = traj.iter().map(|(x, s)| (x, *s)).collect();
    let budget = 4 * opts.max_steps.max(base.len());
    'periods: for k in 1.. {
        let shift = k as f64 * period;
        for &(x, s) in &base {
            let x = x + shift;
            if x > x_max {
                break 'periods;
            }
            if traj.len() >= budget {
                traj.metadata.truncated = Some(String::from(
                    "sample budget reached during periodic extension",
                ));
                break 'periods;
            }
            traj.push(x, s);
        }
    }
    Ok(traj)
}

/// Largest `|D(x) − D(2xₜ − x)|` over the integrated descent, with the rise
/// evaluated by Hermite interpolation.
fn reflection_defect(traj: &Trajectory<PotentialState>, rise_len: usize, xt: f64) -> f64 {
    let rise = Trajectory {
        grid: traj.grid[..rise_len].to_vec(),
        states: traj.states[..rise_len].to_vec(),
        metadata: traj.metadata.clone(),
    };
    traj.iter()
        .skip(rise_len)
        .filter_map(|(x, s)| interpolate(&rise, 2.0 * xt - x).map(|m| libm::fabs(m.d - s.d)))
        .fold(0.0, f64::max)
}

/// Cubic Hermite interpolation of `(D, D')` between samples.
pub fn interpolate(traj: &Trajectory<PotentialState>, x: f64) -> Option<PotentialState> {
    let i = traj.bracket(x)?;
    let (xa, xb) = (traj.grid[i], traj.grid[i + 1]);
    let (a, b) = (traj.states[i], traj.states[i + 1]);
    let (d, dp) = hermite(xa, xb, a.d, b.d, a.d_prime, b.d_prime, x);
    Some(PotentialState { d, d_prime: dp })
}

/// `max |(D')² − 8jₓ(D^{3/2} − γD + D^{1/2})| / (1 + (D')²)` over the samples.
pub fn first_integral_residual(traj: &Trajectory<PotentialState>, j_x: f64, gamma: f64) -> f64 {
    traj.states
        .iter()
        .map(|s| {
            let lhs = s.d_prime * s.d_prime;
            libm::fabs(lhs - first_integral(j_x, gamma, s.d)) / (1.0 + lhs)
        })
        .fold(0.0, f64::max)
}

/// Smallest `x` where `D'` changes sign from positive to negative.
///
/// An exact zero sample counts only if `D'` goes negative afterwards, so a
/// plateau at `D' = 0` (the `γ = 2` limit in floating point) is not a
/// deflection. Between samples the zero is refined by bisection on the
/// derivative of the Hermite interpolant.
pub fn deflection_point(traj: &Trajectory<PotentialState>) -> Option<f64> {
    let s = &traj.states;
    let g = &traj.grid;
    for i in 0..s.len().saturating_sub(1) {
        if !(s[i].d_prime > 0.0) {
            continue;
        }
        let next = s[i + 1].d_prime;
        if next < 0.0 {
            let (a, b) = (s[i], s[i + 1]);
            let slope = |x: f64| hermite(g[i], g[i + 1], a.d, b.d, a.d_prime, b.d_prime, x).1;
            let (mut lo, mut hi) = (g[i], g[i + 1]);
            while hi - lo > 1e-10 {
                let mid = 0.5 * (lo + hi);
                if slope(mid) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Some(0.5 * (lo + hi));
        }
        if next == 0.0 {
            let goes_negative = s[i + 1..]
                .iter()
                .map(|t| t.d_prime)
                .find(|&v| v != 0.0)
                .is_some_and(|v| v < 0.0);
            if goes_negative {
                return Some(g[i + 1]);
            }
        }
    }
    None
}

/// Regime, turning point and measured (half-)period for a given γ.
pub fn classify_regime(j_x: f64, gamma: f64) -> Result<RegimeReport> {
    classify_regime_with(j_x, gamma, &IntegrateOptions::default())
}

pub fn classify_regime_with(j_x: f64, gamma: f64, opts: &IntegrateOptions) -> Result<RegimeReport> {
    if !(j_x > 0.0) {
        return Err(domain("j_x must be positive"));
    }
    let regime = regime_of(gamma);
    let turning = match regime {
        Regime::Unbounded => None,
        _ => turning_point(gamma),
    };
    let mut report = RegimeReport {
        gamma,
        regime,
        turning_point: turning,
        half_period: None,
        period: None,
    };
    if regime == Regime::Periodic {
        let traj = integrate_impl(j_x, gamma, 1e12, opts, true)?;
        if let Some(ev) = traj.event(EventKind::TurningPoint) {
            report.half_period = Some(ev.x);
            report.period = Some(2.0 * ev.x);
        }
    }
    Ok(report)
}
