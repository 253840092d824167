//! Scans with grid points solved on the rayon pool.
//!
//! Samples are collected in grid order, so the result is identical to the
//! sequential scan no matter how the work is scheduled.

use diode_core::bifurcation::{
    assemble_line, assemble_surface, check_line, check_surface, sample_at, LineSweep, ScanResult,
    SurfaceSweep,
};
use diode_core::Result;
use rayon::prelude::*;

pub fn scan_1d(spec: &LineSweep) -> Result<ScanResult> {
    check_line(spec)?;
    let samples = (0..spec.n)
        .into_par_iter()
        .map(|i| {
            let p = spec.params_at(spec.grid_value(i));
            sample_at(spec.space, p.k_hat, p.b_hat)
        })
        .collect();
    Ok(assemble_line(spec, samples))
}

pub fn scan_surface(spec: &SurfaceSweep) -> Result<ScanResult> {
    check_surface(spec)?;
    let samples = spec
        .points()
        .into_par_iter()
        .map(|(k, b)| sample_at(spec.space, k, b))
        .collect();
    Ok(assemble_surface(spec, samples))
}
