//! Embedded Dormand–Prince 5(4) stepping for small fixed-size systems.
//!
//! The driver loops (events, reflection, projection) live with each problem;
//! this module only takes steps and adapts their size.

use crate::trajectory::StepStats;

/// `y' = f(x, y)`; `None` marks a state outside the domain of `f`.
pub trait System<const N: usize> {
    fn rhs(&self, x: f64, y: &[f64; N]) -> Option<[f64; N]>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
}

impl Tolerance {
    pub const fn uniform(tol: f64) -> Self {
        Self {
            rtol: tol,
            atol: tol,
        }
    }
}

const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Result of one attempted step.
#[derive(Debug, Clone, Copy)]
pub struct Trial<const N: usize> {
    pub x: f64,
    pub y: [f64; N],
    pub f: [f64; N],
    /// Error estimate scaled by the tolerance; the step is acceptable at `<= 1`.
    pub error: f64,
}

/// One Dormand–Prince step of size `h` from `(x, y)` with `f = f(x, y)`.
pub fn dopri_step<S: System<N>, const N: usize>(
    sys: &S,
    x: f64,
    y: &[f64; N],
    f: &[f64; N],
    h: f64,
    tol: Tolerance,
) -> Option<Trial<N>> {
    let mut k = [[0.0; N]; 7];
    k[0] = *f;
    for s in 0..6 {
        let mut ys = *y;
        for (i, yi) in ys.iter_mut().enumerate() {
            let mut acc = 0.0;
            for j in 0..=s {
                acc += A[s][j] * k[j][i];
            }
            *yi += h * acc;
        }
        k[s + 1] = sys.rhs(x + C[s] * h, &ys)?;
        if s == 5 {
            // the last stage state is the 5th-order solution (FSAL)
            let mut err = 0.0f64;
            for i in 0..N {
                let mut e = 0.0;
                for j in 0..7 {
                    e += E[j] * k[j][i];
                }
                let scale = tol.atol + tol.rtol * libm::fmax(libm::fabs(y[i]), libm::fabs(ys[i]));
                err = err.max(libm::fabs(h * e) / scale);
            }
            if !err.is_finite() || ys.iter().any(|v| !v.is_finite()) {
                return None;
            }
            return Some(Trial {
                x: x + h,
                y: ys,
                f: k[6],
                error: err,
            });
        }
    }
    None
}

/// Why a step could not be taken.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepFailure {
    Underflow { x: f64, h: f64 },
    TooManySteps,
}

/// Adaptive stepping state.
#[derive(Debug, Clone)]
pub struct Stepper<'a, S, const N: usize> {
    sys: &'a S,
    pub x: f64,
    pub y: [f64; N],
    pub f: [f64; N],
    pub h: f64,
    pub tol: Tolerance,
    pub h_max: f64,
    pub max_steps: usize,
    pub stats: StepStats,
}

impl<'a, S: System<N>, const N: usize> Stepper<'a, S, N> {
    pub fn new(sys: &'a S, x: f64, y: [f64; N], h: f64, tol: Tolerance) -> Option<Self> {
        let f = sys.rhs(x, &y)?;
        Some(Self {
            sys,
            x,
            y,
            f,
            h,
            tol,
            h_max: f64::INFINITY,
            max_steps: 1_000_000,
            stats: StepStats {
                evaluations: 1,
                ..StepStats::default()
            },
        })
    }

    pub fn system(&self) -> &'a S {
        self.sys
    }

    fn h_min(&self) -> f64 {
        1e-15 * libm::fmax(libm::fabs(self.x), 1e-300) + 1e-300
    }

    /// Attempt a step of exactly `h` without changing state.
    pub fn try_step(&mut self, h: f64) -> Option<Trial<N>> {
        self.stats.evaluations += 6;
        dopri_step(self.sys, self.x, &self.y, &self.f, h, self.tol)
    }

    /// Replace the current state, e.g. after a projection or reflection.
    pub fn reset(&mut self, x: f64, y: [f64; N]) -> Option<()> {
        self.f = self.sys.rhs(x, &y)?;
        self.stats.evaluations += 1;
        self.x = x;
        self.y = y;
        Some(())
    }

    pub fn accept(&mut self, trial: &Trial<N>) {
        self.x = trial.x;
        self.y = trial.y;
        self.f = trial.f;
        self.stats.accepted += 1;
    }

    /// Take one accepted step without passing `x_limit`; returns the trial
    /// that was accepted.
    pub fn step(&mut self, x_limit: f64) -> Result<Trial<N>, StepFailure> {
        if self.stats.accepted >= self.max_steps {
            return Err(StepFailure::TooManySteps);
        }
        loop {
            let room = x_limit - self.x;
            let clipped = self.h >= room;
            let h = if clipped {
                room
            } else {
                self.h.min(self.h_max)
            };
            if h < self.h_min() {
                return Err(StepFailure::Underflow { x: self.x, h });
            }
            match self.try_step(h) {
                None => {
                    self.stats.rejected += 1;
                    self.h = 0.5 * h;
                }
                Some(trial) if trial.error > 1.0 => {
                    self.stats.rejected += 1;
                    self.h = h * factor(trial.error).min(1.0);
                }
                Some(trial) => {
                    let grown = h * factor(trial.error);
                    // a clipped final step says nothing about the natural size
                    self.h = if clipped { self.h.max(grown) } else { grown }.min(self.h_max);
                    self.accept(&trial);
                    return Ok(trial);
                }
            }
        }
    }
}

fn factor(err: f64) -> f64 {
    if err == 0.0 {
        5.0
    } else {
        (0.9 * libm::pow(err, -0.2)).clamp(0.2, 5.0)
    }
}
