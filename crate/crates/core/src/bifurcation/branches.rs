//! Linking per-sample solutions of a line sweep into branches.
//!
//! Solutions are continued from sample to sample by the assignment of least
//! total distance in the complex plane. The resulting tracks are cut at every
//! bifurcation point into branches that are either real throughout or
//! complex; a complex branch cut at both ends is a closed loop, since its
//! imaginary part leaves zero at one event and returns to it at the next.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{CrossingKind, ScanResult, SweepSpec};
use crate::error::{domain, Result};
use crate::model::ComplexValue;

/// Relative distance below which two solutions of one sample are
/// indistinguishable for linking.
pub const LINK_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchPoint {
    /// Value of the varied parameter.
    pub t: f64,
    pub value: ComplexValue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub points: Vec<BranchPoint>,
    /// Every point has zero imaginary part.
    pub real: bool,
    /// Event that starts the branch, `None` at the sweep boundary.
    pub start: Option<usize>,
    pub end: Option<usize>,
    pub is_loop: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchEventKind {
    /// Two real branches meet and continue as a conjugate pair.
    Merge,
    /// A conjugate pair meets on the real axis and continues as two real branches.
    Split,
    /// A conjugate pair touches the real axis and stays complex.
    Touch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchEvent {
    pub kind: BranchEventKind,
    pub t: f64,
    /// Branches ending at the event.
    pub before: Vec<usize>,
    /// Branches starting at the event.
    pub after: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Branches {
    pub branches: Vec<Branch>,
    pub events: Vec<BranchEvent>,
    /// Conjugate loop branches, pairwise.
    pub loops: Vec<[usize; 2]>,
    /// Samples where two solutions coincided to within [`LINK_TOL`] and the
    /// link was decided by the `(re, im)` order.
    pub ambiguous: Vec<usize>,
}

struct Track {
    points: Vec<(usize, ComplexValue)>,
}

impl Track {
    fn at(&self, sample: usize) -> Option<ComplexValue> {
        let first = self.points.first()?.0;
        let i = sample.checked_sub(first)?;
        self.points.get(i).filter(|p| p.0 == sample).map(|p| p.1)
    }
}

/// Link the solutions of a line sweep into branches and events.
pub fn assemble_branches(scan: &ScanResult) -> Result<Branches> {
    let SweepSpec::Line(spec) = scan.spec else {
        return Err(domain("branches are assembled from line sweeps only"));
    };
    let varied = spec.varied();
    let ts: Vec<f64> = scan.samples.iter().map(|s| s.coordinate(varied)).collect();
    let values: Vec<Vec<ComplexValue>> = scan
        .samples
        .iter()
        .map(|s| {
            s.values
                .iter()
                .flat_map(|v| core::iter::repeat_n(v.value, v.multiplicity as usize))
                .collect()
        })
        .collect();

    let (tracks, ambiguous) = continue_tracks(&values);

    // cuts[track] = intervals (j, event) after which the track is cut
    let mut cuts: Vec<Vec<(usize, usize)>> = vec![Vec::new(); tracks.len()];
    let mut kinds = Vec::new();
    for (e, p) in scan.bifurcation_points.iter().enumerate() {
        let j = p.interval;
        let involved = involved_tracks(&tracks, j);
        let kind = match p.kind {
            CrossingKind::Touch => BranchEventKind::Touch,
            CrossingKind::SignChange if scan.samples[j].discriminant > 0.0 => {
                BranchEventKind::Merge
            }
            CrossingKind::SignChange if scan.samples[j].discriminant < 0.0 => {
                BranchEventKind::Split
            }
            CrossingKind::SignChange if scan.samples[j + 1].discriminant < 0.0 => {
                BranchEventKind::Merge
            }
            CrossingKind::SignChange => BranchEventKind::Split,
        };
        kinds.push((kind, p.coordinate(varied)));
        for t in involved {
            cuts[t].push((j, e));
        }
    }

    let mut out = Branches {
        ambiguous,
        ..Branches::default()
    };
    out.events = kinds
        .iter()
        .map(|&(kind, t)| BranchEvent {
            kind,
            t,
            before: Vec::new(),
            after: Vec::new(),
        })
        .collect();
    for (track, track_cuts) in tracks.iter().zip(cuts.iter_mut()) {
        track_cuts.sort_unstable();
        let mut start = None;
        let mut from = 0;
        let pieces = track_cuts
            .iter()
            .map(|&(j, e)| (Some(j), Some(e)))
            .chain(core::iter::once((None, None)));
        for (until, event) in pieces {
            let end_idx = match until {
                Some(j) => track
                    .points
                    .iter()
                    .position(|p| p.0 == j)
                    .map_or(from, |i| i + 1),
                None => track.points.len(),
            };
            let pts = &track.points[from..end_idx.max(from)];
            if !pts.is_empty() {
                let id = out.branches.len();
                let real = pts.iter().all(|p| p.1.is_real());
                out.branches.push(Branch {
                    points: pts
                        .iter()
                        .map(|&(i, value)| BranchPoint { t: ts[i], value })
                        .collect(),
                    real,
                    start,
                    end: event,
                    is_loop: !real && start.is_some() && event.is_some(),
                });
                if let Some(s) = start {
                    out.events[s].after.push(id);
                }
                if let Some(e) = event {
                    out.events[e].before.push(id);
                }
            }
            start = event;
            from = end_idx.max(from);
        }
    }

    // pair conjugate loops by shared events
    let loops: Vec<usize> = (0..out.branches.len())
        .filter(|&i| out.branches[i].is_loop)
        .collect();
    let mut used = vec![false; out.branches.len()];
    for (n, &a) in loops.iter().enumerate() {
        if used[a] {
            continue;
        }
        let ends = (out.branches[a].start, out.branches[a].end);
        if let Some(&b) = loops[n + 1..]
            .iter()
            .find(|&&b| !used[b] && (out.branches[b].start, out.branches[b].end) == ends)
        {
            used[a] = true;
            used[b] = true;
            out.loops.push([a, b]);
        }
    }
    Ok(out)
}

/// Tracks cut at an event between samples `j` and `j + 1`: those complex on
/// either side, or failing that the closest pair.
fn involved_tracks(tracks: &[Track], j: usize) -> Vec<usize> {
    let across: Vec<usize> = (0..tracks.len())
        .filter(|&t| tracks[t].at(j).is_some() && tracks[t].at(j + 1).is_some())
        .collect();
    let complex: Vec<usize> = across
        .iter()
        .copied()
        .filter(|&t| !tracks[t].at(j).unwrap().is_real() || !tracks[t].at(j + 1).unwrap().is_real())
        .collect();
    if !complex.is_empty() {
        return complex;
    }
    let mut best: Option<(f64, usize, usize)> = None;
    for (n, &a) in across.iter().enumerate() {
        for &b in &across[n + 1..] {
            let d = dist(tracks[a].at(j).unwrap(), tracks[b].at(j).unwrap());
            if best.is_none_or(|(bd, _, _)| d < bd) {
                best = Some((d, a, b));
            }
        }
    }
    best.map_or_else(Vec::new, |(_, a, b)| vec![a, b])
}

fn dist(a: ComplexValue, b: ComplexValue) -> f64 {
    (Complex64::from(a) - Complex64::from(b)).norm()
}

/// Greedy continuation: each sample's values are linked to the live tracks by
/// the injective assignment of least total distance.
fn continue_tracks(values: &[Vec<ComplexValue>]) -> (Vec<Track>, Vec<usize>) {
    let mut tracks: Vec<Track> = Vec::new();
    let mut live: Vec<usize> = Vec::new();
    let mut ambiguous = Vec::new();
    for (i, vals) in values.iter().enumerate() {
        if has_near_duplicates(vals) {
            ambiguous.push(i);
        }
        let prev: Vec<ComplexValue> = live
            .iter()
            .map(|&t| tracks[t].points.last().unwrap().1)
            .collect();
        let assignment = best_assignment(&prev, vals);
        let mut next_live = Vec::new();
        for (v, value) in vals.iter().enumerate() {
            let t = match assignment.iter().position(|&a| a == Some(v)) {
                Some(p) => live[p],
                None => {
                    tracks.push(Track { points: Vec::new() });
                    tracks.len() - 1
                }
            };
            tracks[t].points.push((i, *value));
            next_live.push(t);
        }
        live = next_live;
    }
    (tracks, ambiguous)
}

fn has_near_duplicates(vals: &[ComplexValue]) -> bool {
    vals.iter().enumerate().any(|(n, a)| {
        vals[n + 1..]
            .iter()
            .any(|b| dist(*a, *b) <= LINK_TOL * (1.0 + Complex64::from(*a).norm()))
    })
}

/// For each previous value, the index of the next value it continues to.
///
/// Candidates are enumerated in a fixed order and only a strictly smaller
/// cost replaces the incumbent, so ties go to the earlier `(re, im)`-sorted
/// target.
fn best_assignment(prev: &[ComplexValue], next: &[ComplexValue]) -> Vec<Option<usize>> {
    let mut best: Option<(f64, Vec<Option<usize>>)> = None;
    let mut current = vec![None; prev.len()];
    let mut taken = vec![false; next.len()];
    search(prev, next, 0, 0.0, &mut current, &mut taken, &mut best);
    best.map_or_else(|| vec![None; prev.len()], |b| b.1)
}

fn search(
    prev: &[ComplexValue],
    next: &[ComplexValue],
    i: usize,
    cost: f64,
    current: &mut Vec<Option<usize>>,
    taken: &mut Vec<bool>,
    best: &mut Option<(f64, Vec<Option<usize>>)>,
) {
    if i == prev.len() {
        // every value should be used when there are enough tracks for it
        let linked = current.iter().filter(|c| c.is_some()).count();
        if linked == prev.len().min(next.len()) && best.as_ref().is_none_or(|b| cost < b.0) {
            *best = Some((cost, current.clone()));
        }
        return;
    }
    for j in 0..next.len() {
        if !taken[j] {
            taken[j] = true;
            current[i] = Some(j);
            search(
                prev,
                next,
                i + 1,
                cost + dist(prev[i], next[j]),
                current,
                taken,
                best,
            );
            taken[j] = false;
        }
    }
    if prev.len() > next.len() {
        current[i] = None;
        search(prev, next, i + 1, cost, current, taken, best);
    }
}
