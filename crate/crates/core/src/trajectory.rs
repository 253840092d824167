//! Sampled solution curves.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

/// Step-control counters of one integration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    /// `D' = 0` with `D'' < 0`; `value` is `D` there.
    TurningPoint,
    /// `D` back at zero after one period.
    PeriodEnd,
    /// Largest gap between the integrated descent and the mirrored rise.
    ReflectionDefect,
    /// θ reached zero from above; `value` is the approach slope `θ'`.
    FreeBoundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryEvent {
    pub kind: EventKind,
    pub x: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMeta<S> {
    /// Offset of the first sample from the singular point `x = 0`.
    pub x0: f64,
    /// Analytic state at `x = 0`.
    pub origin: S,
    pub stats: StepStats,
    /// Why integration stopped before the requested end, if it did.
    pub truncated: Option<String>,
    #[serde(default)]
    pub events: Vec<TrajectoryEvent>,
}

/// States sampled on a strictly increasing grid starting at `x0 > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory<S> {
    pub grid: Vec<f64>,
    pub states: Vec<S>,
    pub metadata: TrajectoryMeta<S>,
}

impl<S: Copy> Trajectory<S> {
    pub(crate) fn new(x0: f64, origin: S) -> Self {
        Self {
            grid: Vec::new(),
            states: Vec::new(),
            metadata: TrajectoryMeta {
                x0,
                origin,
                stats: StepStats::default(),
                truncated: None,
                events: Vec::new(),
            },
        }
    }

    pub(crate) fn push(&mut self, x: f64, s: S) {
        debug_assert!(
            self.grid.last().is_none_or(|&last| x > last),
            "grid must increase"
        );
        self.grid.push(x);
        self.states.push(s);
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn last(&self) -> Option<(f64, S)> {
        Some((*self.grid.last()?, *self.states.last()?))
    }

    pub fn event(&self, kind: EventKind) -> Option<&TrajectoryEvent> {
        self.metadata.events.iter().find(|e| e.kind == kind)
    }

    pub fn is_truncated(&self) -> bool {
        self.metadata.truncated.is_some()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &S)> {
        self.grid.iter().copied().zip(self.states.iter())
    }

    /// Index `i` with `grid[i] <= x <= grid[i + 1]`.
    pub fn bracket(&self, x: f64) -> Option<usize> {
        let n = self.grid.len();
        if n < 2 || !(x >= self.grid[0]) || !(x <= self.grid[n - 1]) {
            return None;
        }
        let i = self.grid.partition_point(|&g| g <= x);
        Some(i.saturating_sub(1).min(n - 2))
    }
}

/// Cubic Hermite interpolant on `[xa, xb]` and its derivative at `x`.
pub fn hermite(xa: f64, xb: f64, fa: f64, fb: f64, da: f64, db: f64, x: f64) -> (f64, f64) {
    let h = xb - xa;
    let t = (x - xa) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    let value = h00 * fa + h10 * h * da + h01 * fb + h11 * h * db;
    let d00 = (6.0 * t2 - 6.0 * t) / h;
    let d10 = 3.0 * t2 - 4.0 * t + 1.0;
    let d01 = (-6.0 * t2 + 6.0 * t) / h;
    let d11 = 3.0 * t2 - 2.0 * t;
    let slope = d00 * fa + d10 * da + d01 * fb + d11 * db;
    (value, slope)
}
