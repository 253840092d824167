//! Parameter sweeps over `(k̂, b̂)`.
//!
//! A sweep solves the deflection cubic at every grid point, optionally maps
//! the roots to θ, and locates the points where the discriminant vanishes.
//! Δ can change sign (two real roots collide and leave the real axis) or
//! touch zero without changing sign; along `k̂ = √3`, for instance,
//! `Δ = −(3√3·b̂ − 1)²`. Sign changes are found by bisection and touches as
//! local minima of `|Δ|`.

mod branches;

pub use branches::{
    assemble_branches, Branch, BranchEvent, BranchEventKind, BranchPoint, Branches,
};

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::cubic::{
    cubic_residual, discriminant, solve_closed_form, theta_candidates, theta_residual,
    triple_root_locus,
};
use crate::error::{domain, Result};
use crate::model::{ComplexValue, ReducedParams};

/// Largest `|Δ|` accepted at a touch point.
pub const TOUCH_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Space {
    /// Roots `u` of the cubic.
    U,
    /// `θ = u²` for roots with positive real part.
    Theta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Param {
    KHat,
    BHat,
}

impl Param {
    pub fn other(self) -> Self {
        match self {
            Param::KHat => Param::BHat,
            Param::BHat => Param::KHat,
        }
    }

    /// Value at the triple-root locus, `k̂ = √3` or `b̂ = √3/9`.
    pub fn triple_root_value(self) -> f64 {
        match self {
            Param::KHat => triple_root_locus().k_hat,
            Param::BHat => triple_root_locus().b_hat,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZAxis {
    Re,
    Im,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineSweep {
    pub space: Space,
    pub fixed: Param,
    pub fixed_value: f64,
    /// Range of the other parameter.
    pub range: (f64, f64),
    pub n: usize,
}

impl LineSweep {
    pub fn varied(&self) -> Param {
        self.fixed.other()
    }

    /// Grid value `i` of the varied parameter; the last one is exactly `range.1`.
    pub fn grid_value(&self, i: usize) -> f64 {
        grid_value(self.range, self.n, i)
    }

    pub fn params_at(&self, t: f64) -> ReducedParams {
        match self.fixed {
            Param::KHat => ReducedParams::cubic(self.fixed_value, t),
            Param::BHat => ReducedParams::cubic(t, self.fixed_value),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceSweep {
    pub space: Space,
    pub k_range: (f64, f64),
    pub b_range: (f64, f64),
    pub n_k: usize,
    pub n_b: usize,
    /// Component meant for the height of the surface; samples keep both.
    pub z: ZAxis,
}

impl SurfaceSweep {
    /// Grid points in row-major order: rows of constant `b̂`, `k̂` varying fastest.
    pub fn points(&self) -> Vec<(f64, f64)> {
        (0..self.n_b)
            .flat_map(|j| {
                let b = grid_value(self.b_range, self.n_b, j);
                (0..self.n_k).map(move |i| (grid_value(self.k_range, self.n_k, i), b))
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SweepSpec {
    Line(LineSweep),
    Surface(SurfaceSweep),
}

impl SweepSpec {
    pub fn space(&self) -> Space {
        match self {
            SweepSpec::Line(l) => l.space,
            SweepSpec::Surface(s) => s.space,
        }
    }
}

fn grid_value(range: (f64, f64), n: usize, i: usize) -> f64 {
    if i + 1 == n {
        range.1
    } else {
        range.0 + (range.1 - range.0) * i as f64 / (n - 1) as f64
    }
}

/// A solution at one grid point, with multiplicity (u) or count (θ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolutionValue {
    pub value: ComplexValue,
    pub multiplicity: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub k_hat: f64,
    pub b_hat: f64,
    pub discriminant: f64,
    /// Sorted by `(re, im)`.
    pub values: Vec<SolutionValue>,
    /// Roots without a θ image, counted with multiplicity.
    pub dropped: usize,
    /// Largest cubic (u) or θ-equation residual among `values`.
    pub max_residual: f64,
}

impl Sample {
    pub fn coordinate(&self, p: Param) -> f64 {
        match p {
            Param::KHat => self.k_hat,
            Param::BHat => self.b_hat,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Solve one grid point.
pub fn sample_at(space: Space, k_hat: f64, b_hat: f64) -> Sample {
    let p = ReducedParams::cubic(k_hat, b_hat);
    let roots = solve_closed_form(&p);
    let (mut values, dropped, max_residual) = match space {
        Space::U => {
            let values: Vec<SolutionValue> = roots
                .roots
                .iter()
                .map(|r| SolutionValue {
                    value: r.value,
                    multiplicity: r.multiplicity,
                })
                .collect();
            let res = values
                .iter()
                .map(|v| cubic_residual(v.value, &p))
                .fold(0.0, f64::max);
            (values, 0, res)
        }
        Space::Theta => {
            let c = theta_candidates(&roots);
            let values: Vec<SolutionValue> = c
                .values
                .iter()
                .map(|t| SolutionValue {
                    value: t.value,
                    multiplicity: t.count,
                })
                .collect();
            let res = values
                .iter()
                .map(|v| theta_residual(v.value, &p))
                .fold(0.0, f64::max);
            (values, c.dropped, res)
        }
    };
    values.sort_by(|a, b| a.value.lex_cmp(&b.value));
    Sample {
        k_hat,
        b_hat,
        discriminant: roots.discriminant,
        values,
        dropped,
        max_residual,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossingKind {
    /// Δ changes sign.
    SignChange,
    /// Δ reaches zero without changing sign.
    Touch,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BifurcationPoint {
    pub k_hat: f64,
    pub b_hat: f64,
    /// Δ evaluated directly at the located point.
    pub discriminant: f64,
    pub kind: CrossingKind,
    /// Index of the sample just before the point along its line.
    pub interval: usize,
}

impl BifurcationPoint {
    pub fn coordinate(&self, p: Param) -> f64 {
        match p {
            Param::KHat => self.k_hat,
            Param::BHat => self.b_hat,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub spec: SweepSpec,
    pub samples: Vec<Sample>,
    pub bifurcation_points: Vec<BifurcationPoint>,
    /// Fraction of samples with at least one solution.
    pub coverage: f64,
    /// `true` where a sample has no solution.
    pub mask: Vec<bool>,
}

fn check_range(range: (f64, f64), n: usize) -> Result<()> {
    if n < 2 {
        return Err(domain("a sweep needs at least two points"));
    }
    if !range.0.is_finite() || !range.1.is_finite() {
        return Err(domain("sweep range must be finite"));
    }
    Ok(())
}

pub fn check_line(spec: &LineSweep) -> Result<()> {
    check_range(spec.range, spec.n)?;
    if !spec.fixed_value.is_finite() {
        return Err(domain("fixed parameter must be finite"));
    }
    Ok(())
}

pub fn check_surface(spec: &SurfaceSweep) -> Result<()> {
    check_range(spec.k_range, spec.n_k)?;
    check_range(spec.b_range, spec.n_b)
}

/// One-parameter sweep with bifurcation points along the varied parameter.
pub fn scan_1d(spec: &LineSweep) -> Result<ScanResult> {
    check_line(spec)?;
    let samples = (0..spec.n)
        .map(|i| {
            let p = spec.params_at(spec.grid_value(i));
            sample_at(spec.space, p.k_hat, p.b_hat)
        })
        .collect();
    Ok(assemble_line(spec, samples))
}

/// Build a line result from samples computed in grid order.
pub fn assemble_line(spec: &LineSweep, samples: Vec<Sample>) -> ScanResult {
    let ts: Vec<f64> = (0..spec.n).map(|i| spec.grid_value(i)).collect();
    let deltas: Vec<f64> = samples.iter().map(|s| s.discriminant).collect();
    let line = |t: f64| spec.params_at(t);
    let bifurcation_points = line_zeros(&ts, &deltas, &line, true);
    finish(SweepSpec::Line(*spec), samples, bifurcation_points)
}

/// Two-parameter sweep; bifurcation points are sign changes of Δ along each
/// row of constant `b̂`.
pub fn scan_surface(spec: &SurfaceSweep) -> Result<ScanResult> {
    check_surface(spec)?;
    let samples = spec
        .points()
        .into_iter()
        .map(|(k, b)| sample_at(spec.space, k, b))
        .collect();
    Ok(assemble_surface(spec, samples))
}

/// Build a surface result from samples computed in [`SurfaceSweep::points`] order.
pub fn assemble_surface(spec: &SurfaceSweep, samples: Vec<Sample>) -> ScanResult {
    let ts: Vec<f64> = (0..spec.n_k)
        .map(|i| grid_value(spec.k_range, spec.n_k, i))
        .collect();
    let mut points = Vec::new();
    for (j, row) in samples.chunks(spec.n_k).enumerate() {
        let b = row[0].b_hat;
        let deltas: Vec<f64> = row.iter().map(|s| s.discriminant).collect();
        let line = |k: f64| ReducedParams::cubic(k, b);
        points.extend(
            line_zeros(&ts, &deltas, &line, false)
                .into_iter()
                .map(|mut p| {
                    p.interval += j * spec.n_k;
                    p
                }),
        );
    }
    finish(SweepSpec::Surface(*spec), samples, points)
}

fn finish(
    spec: SweepSpec,
    samples: Vec<Sample>,
    bifurcation_points: Vec<BifurcationPoint>,
) -> ScanResult {
    let mask: Vec<bool> = samples.iter().map(Sample::is_empty).collect();
    let covered = mask.iter().filter(|m| !**m).count();
    ScanResult {
        spec,
        coverage: covered as f64 / samples.len() as f64,
        samples,
        bifurcation_points,
        mask,
    }
}

/// Zeros of Δ along a sampled line `t ↦ params(t)`.
fn line_zeros(
    ts: &[f64],
    deltas: &[f64],
    params: &impl Fn(f64) -> ReducedParams,
    touches: bool,
) -> Vec<BifurcationPoint> {
    let delta = |t: f64| discriminant(&params(t));
    let point = |t: f64, kind, interval| {
        let p = params(t);
        BifurcationPoint {
            k_hat: p.k_hat,
            b_hat: p.b_hat,
            discriminant: discriminant(&p),
            kind,
            interval,
        }
    };
    let n = ts.len();
    let mut out = Vec::new();
    for i in 0..n.saturating_sub(1) {
        let (a, b) = (deltas[i], deltas[i + 1]);
        if a == 0.0 {
            let before = if i > 0 { deltas[i - 1] } else { b };
            let kind = if before * b < 0.0 {
                CrossingKind::SignChange
            } else {
                CrossingKind::Touch
            };
            out.push(point(ts[i], kind, i));
        } else if a * b < 0.0 {
            out.push(point(
                bisect(&delta, ts[i], ts[i + 1], a),
                CrossingKind::SignChange,
                i,
            ));
        }
    }
    if deltas.last() == Some(&0.0) && n >= 2 {
        out.push(point(ts[n - 1], CrossingKind::Touch, n - 2));
    }
    if touches {
        for i in 1..n.saturating_sub(1) {
            let (l, m, r) = (deltas[i - 1], deltas[i], deltas[i + 1]);
            let one_sided = l * m > 0.0 && m * r > 0.0;
            if one_sided && libm::fabs(m) < libm::fabs(l) && libm::fabs(m) <= libm::fabs(r) {
                let (t, value) = golden_min(&|t| libm::fabs(delta(t)), ts[i - 1], ts[i + 1]);
                if value < TOUCH_TOL {
                    let interval = if t < ts[i] { i - 1 } else { i };
                    out.push(point(t, CrossingKind::Touch, interval));
                }
            }
        }
        out.sort_by_key(|p| p.interval);
    }
    out
}

/// Bisection to adjacent floats; `fa` is the value at `a`.
fn bisect(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, fa: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a.min(b) || mid >= a.max(b) {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = mid;
        } else {
            b = mid;
        }
    }
    if libm::fabs(f(a)) <= libm::fabs(f(b)) {
        a
    } else {
        b
    }
}

/// Minimum of a unimodal function on `[a, b]` by golden-section search.
fn golden_min(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let r = 0.5 * (libm::sqrt(5.0) - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if b - a <= 4.0 * f64::EPSILON * (1.0 + libm::fabs(a)) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQRT_3: f64 = 1.732_050_807_568_877_2;

    fn line(space: Space, fixed: Param, value: f64, range: (f64, f64), n: usize) -> LineSweep {
        LineSweep {
            space,
            fixed,
            fixed_value: value,
            range,
            n,
        }
    }

    #[test]
    fn grid_hits_both_ends() {
        let s = line(Space::U, Param::KHat, 0.0, (-5.0, 5.0), 7);
        assert_eq!(s.grid_value(0), -5.0);
        assert_eq!(s.grid_value(6), 5.0);
        assert_eq!(s.grid_value(3), 0.0);
    }

    #[test]
    fn rejects_short_or_infinite_sweeps() {
        assert!(scan_1d(&line(Space::U, Param::KHat, 0.0, (0.0, 1.0), 1)).is_err());
        assert!(scan_1d(&line(Space::U, Param::KHat, 0.0, (0.0, f64::INFINITY), 5)).is_err());
        assert!(scan_1d(&line(Space::U, Param::KHat, f64::NAN, (0.0, 1.0), 5)).is_err());
    }

    #[test]
    fn touch_at_triple_root_along_k_sqrt3() {
        let s = scan_1d(&line(Space::U, Param::KHat, SQRT_3, (-5.0, 5.0), 101)).unwrap();
        assert_eq!(s.bifurcation_points.len(), 1);
        let p = s.bifurcation_points[0];
        assert_eq!(p.kind, CrossingKind::Touch);
        assert!((p.b_hat - SQRT_3 / 9.0).abs() < 1e-7);
        assert!(p.discriminant.abs() < TOUCH_TOL);
    }

    #[test]
    fn single_sign_change_is_bisected() {
        // at k̂ = 3, Δ(b̂) = −27b̂² − 54b̂ + 5 has one root in [0, 1]
        let s = scan_1d(&line(Space::U, Param::KHat, 3.0, (0.0, 1.0), 11)).unwrap();
        assert_eq!(s.bifurcation_points.len(), 1);
        let p = s.bifurcation_points[0];
        let exact = (-54.0 + libm::sqrt(54.0 * 54.0 + 4.0 * 27.0 * 5.0)) / 54.0;
        assert!((p.b_hat - exact).abs() < 1e-14);
        assert!(p.discriminant.abs() < 1e-8);
        assert_eq!(p.kind, CrossingKind::SignChange);
        assert!(
            s.samples[p.interval].b_hat <= p.b_hat && p.b_hat <= s.samples[p.interval + 1].b_hat
        );
    }

    #[test]
    fn golden_section_finds_parabola_minimum() {
        let (t, v) = golden_min(&|t: f64| (t - 0.3) * (t - 0.3) + 1.0, -1.0, 2.0);
        assert!((t - 0.3).abs() < 1e-7);
        assert!((v - 1.0).abs() < 1e-14);
    }
}
