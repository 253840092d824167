//! Damped Newton shooting on `(jₓ, β) ↦ (u(1) − α, v(1) − a_L)`.

use serde::{Deserialize, Serialize};

use super::{find_x_star, integrate_uv, DiodeState, UvOptions, XStar};
use crate::error::{domain, Result};
use crate::trajectory::Trajectory;

/// Shooting coordinate held at its initial value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Freeze {
    #[default]
    None,
    Jx,
    Beta,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShootOptions {
    /// Convergence threshold on the max-norm of the anode residual.
    pub tol: f64,
    pub max_iter: usize,
    /// Relative forward-difference step of the Jacobian.
    pub fd_step: f64,
    pub freeze: Freeze,
    pub integrator: UvOptions,
}

impl Default for ShootOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 25,
            fd_step: 1e-6,
            freeze: Freeze::None,
            integrator: UvOptions {
                tol: 1e-12,
                ..UvOptions::default()
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShootResult {
    pub j_x: f64,
    pub beta: f64,
    pub trajectory: Trajectory<DiodeState>,
    /// `(u(1), v(1))`, linearly extended from `x*` when the run stopped there.
    pub end_values: (f64, f64),
    /// Max-norm distance of `end_values` to the targets.
    pub residual: f64,
    pub x_star: Option<XStar>,
    pub iterations: usize,
    pub converged: bool,
    /// The returned run stopped before the anode and `end_values` are extrapolated.
    pub penalized: bool,
    pub freeze: Freeze,
}

struct Eval {
    p: [f64; 2],
    f: [f64; 2],
    end: (f64, f64),
    norm: f64,
    penalized: bool,
    traj: Trajectory<DiodeState>,
}

fn evaluate(p: [f64; 2], target: (f64, f64), opts: &UvOptions) -> Result<Eval> {
    let traj = integrate_uv(p[0], p[1], opts)?;
    let (x, last) = traj.last().expect("integration keeps the startup sample");
    let penalized = x < opts.x_end;
    // continue from the last state with its slope; past x* this keeps the
    // residual continuous in the parameters
    let dx = opts.x_end - x;
    let end = (last.u + last.u_prime * dx, last.v + last.v_prime * dx);
    let f = [end.0 - target.0, end.1 - target.1];
    let norm = libm::fmax(libm::fabs(f[0]), libm::fabs(f[1]));
    Ok(Eval {
        p,
        f,
        end,
        norm,
        penalized,
        traj,
    })
}

/// Solve for `(jₓ, β)` so that `u(1) = α` and `v(1) = a_L`.
///
/// With `a_L = 0` and a zero initial β the problem stays on the invariant
/// subspace `v ≡ 0` and only `jₓ` is shot. Non-convergence is reported via
/// `converged = false` with the best iterate.
pub fn shoot(alpha: f64, a_l: f64, guess: (f64, f64), opts: &ShootOptions) -> Result<ShootResult> {
    if !(alpha > 1.0) || !alpha.is_finite() {
        return Err(domain("alpha must exceed 1"));
    }
    if !(a_l >= 0.0) || !a_l.is_finite() {
        return Err(domain("a_L must be non-negative"));
    }
    if !(guess.0 > 0.0) {
        return Err(domain("initial j_x must be positive"));
    }
    if !(guess.1 >= 0.0) {
        return Err(domain("initial beta must be non-negative"));
    }
    if !(opts.tol > 0.0) || !(opts.fd_step > 0.0) {
        return Err(domain("tolerances must be positive"));
    }
    let freeze = match opts.freeze {
        Freeze::None if a_l == 0.0 && guess.1 == 0.0 => Freeze::Beta,
        f => f,
    };
    let free = [freeze != Freeze::Jx, freeze != Freeze::Beta];
    let target = (alpha, a_l);
    let ode = &opts.integrator;

    let mut cur = evaluate([guess.0, guess.1], target, ode)?;
    let mut iterations = 0;
    while cur.norm > opts.tol && iterations < opts.max_iter {
        iterations += 1;
        let mut jac = [[0.0; 2]; 2];
        for c in 0..2 {
            if !free[c] {
                continue;
            }
            let h = opts.fd_step * libm::fmax(libm::fabs(cur.p[c]), 1e-3);
            let mut q = cur.p;
            q[c] += h;
            let e = evaluate(q, target, ode)?;
            for (row, (fe, fc)) in jac.iter_mut().zip(e.f.iter().zip(&cur.f)) {
                row[c] = (fe - fc) / h;
            }
        }
        let Some(step) = newton_step(&jac, &cur.f, free) else {
            break;
        };

        // halve until the residual drops and the parameters stay admissible
        let mut lambda = 1.0;
        let mut next = None;
        for _ in 0..30 {
            let q = [cur.p[0] + lambda * step[0], cur.p[1] + lambda * step[1]];
            if q[0] > 0.0 && q[1] >= 0.0 {
                if let Ok(e) = evaluate(q, target, ode) {
                    if e.norm < cur.norm {
                        next = Some(e);
                        break;
                    }
                }
            }
            lambda *= 0.5;
        }
        match next {
            Some(e) => cur = e,
            None => break,
        }
    }

    let x_star = find_x_star(&cur.traj);
    Ok(ShootResult {
        j_x: cur.p[0],
        beta: cur.p[1],
        end_values: cur.end,
        residual: cur.norm,
        x_star,
        iterations,
        converged: cur.norm <= opts.tol,
        penalized: cur.penalized,
        freeze,
        trajectory: cur.traj,
    })
}

/// Newton (or, for one free coordinate, least-squares) step `−J⁺F`.
fn newton_step(jac: &[[f64; 2]; 2], f: &[f64; 2], free: [bool; 2]) -> Option<[f64; 2]> {
    match free {
        [true, true] => {
            let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
            let scale = libm::fmax(
                libm::fabs(jac[0][0] * jac[1][1]),
                libm::fabs(jac[0][1] * jac[1][0]),
            );
            if !(libm::fabs(det) > 1e-14 * scale) {
                return None;
            }
            Some([
                -(jac[1][1] * f[0] - jac[0][1] * f[1]) / det,
                -(-jac[1][0] * f[0] + jac[0][0] * f[1]) / det,
            ])
        }
        [c0, c1] if c0 || c1 => {
            let c = if c0 { 0 } else { 1 };
            let n = jac[0][c] * jac[0][c] + jac[1][c] * jac[1][c];
            if !(n > 0.0) {
                return None;
            }
            let mut s = [0.0; 2];
            s[c] = -(jac[0][c] * f[0] + jac[1][c] * f[1]) / n;
            Some(s)
        }
        _ => None,
    }
}
