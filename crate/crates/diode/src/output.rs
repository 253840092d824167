//! Text encodings of trajectories, root sets and scans.
//!
//! Floats are written with 17 significant digits (`{:.16e}`) so every value
//! round-trips; JSON goes through `serde_json`, which prints the shortest
//! round-tripping form.

use std::io::{self, Write};

use clap::ValueEnum;
use diode_core::bifurcation::{Branches, ScanResult, SweepSpec, ZAxis};
use diode_core::bvp::DiodeState;
use diode_core::potential::PotentialState;
use diode_core::Trajectory;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
    Gnuplot,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Gnuplot => "dat",
        }
    }
}

pub struct F(pub f64);

impl std::fmt::Display for F {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:.16e}", self.0)
    }
}

fn rows(
    w: &mut impl Write,
    sep: &str,
    header: Option<&[&str]>,
    data: impl Iterator<Item = Vec<f64>>,
) -> io::Result<()> {
    if let Some(h) = header {
        writeln!(w, "{}", h.join(sep))?;
    }
    for row in data {
        let line: Vec<String> = row.into_iter().map(|v| F(v).to_string()).collect();
        writeln!(w, "{}", line.join(sep))?;
    }
    Ok(())
}

pub fn write_json<T: Serialize>(w: &mut impl Write, value: &T) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut *w, value)?;
    writeln!(w)
}

pub fn write_potential(
    w: &mut impl Write,
    traj: &Trajectory<PotentialState>,
    format: Format,
) -> io::Result<()> {
    let data = traj.iter().map(|(x, s)| vec![x, s.d, s.d_prime]);
    match format {
        Format::Csv => rows(w, ",", Some(&["x", "D", "D_prime"]), data),
        Format::Gnuplot => {
            writeln!(w, "# x D D_prime")?;
            rows(w, " ", None, data)
        }
        Format::Json => write_json(w, traj),
    }
}

pub fn write_diode(
    w: &mut impl Write,
    traj: &Trajectory<DiodeState>,
    format: Format,
) -> io::Result<()> {
    let data = traj
        .iter()
        .map(|(x, s)| vec![x, s.u, s.u_prime, s.v, s.v_prime, s.theta]);
    let header = ["x", "u", "u_prime", "v", "v_prime", "theta"];
    match format {
        Format::Csv => rows(w, ",", Some(&header), data),
        Format::Gnuplot => {
            writeln!(w, "# {}", header.join(" "))?;
            rows(w, " ", None, data)
        }
        Format::Json => write_json(w, traj),
    }
}

/// Long format: one row per solution per grid point.
pub fn write_scan_csv(w: &mut impl Write, scan: &ScanResult) -> io::Result<()> {
    writeln!(
        w,
        "k_hat,b_hat,solution_index,re,im,multiplicity,discriminant"
    )?;
    for s in &scan.samples {
        for (i, v) in s.values.iter().enumerate() {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                F(s.k_hat),
                F(s.b_hat),
                i,
                F(v.value.re),
                F(v.value.im),
                v.multiplicity,
                F(s.discriminant)
            )?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct ScanDocument<'a> {
    #[serde(flatten)]
    scan: &'a ScanResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    branches: Option<&'a Branches>,
}

pub fn write_scan_json(
    w: &mut impl Write,
    scan: &ScanResult,
    branches: Option<&Branches>,
) -> io::Result<()> {
    write_json(w, &ScanDocument { scan, branches })
}

/// Surfaces as ASCII nonuniform matrices, one `index` block per solution
/// slot; lines as one block per branch with columns `t re im`.
pub fn write_scan_gnuplot(
    w: &mut impl Write,
    scan: &ScanResult,
    branches: Option<&Branches>,
) -> io::Result<()> {
    match scan.spec {
        SweepSpec::Surface(spec) => {
            let slots = scan
                .samples
                .iter()
                .map(|s| s.values.len())
                .max()
                .unwrap_or(0);
            let part = match spec.z {
                ZAxis::Re => "re",
                ZAxis::Im => "im",
            };
            for slot in 0..slots {
                if slot > 0 {
                    write!(w, "\n\n")?;
                }
                writeln!(
                    w,
                    "# solution {slot}, z = {part}; splot '...' nonuniform matrix index {slot}"
                )?;
                write!(w, "{}", spec.n_k)?;
                for s in &scan.samples[..spec.n_k] {
                    write!(w, " {}", F(s.k_hat))?;
                }
                writeln!(w)?;
                for row in scan.samples.chunks(spec.n_k) {
                    write!(w, "{}", F(row[0].b_hat))?;
                    for s in row {
                        let z = s.values.get(slot).map_or(f64::NAN, |v| match spec.z {
                            ZAxis::Re => v.value.re,
                            ZAxis::Im => v.value.im,
                        });
                        write!(w, " {}", F(z))?;
                    }
                    writeln!(w)?;
                }
            }
            Ok(())
        }
        SweepSpec::Line(_) => {
            let Some(b) = branches else { return Ok(()) };
            for (i, br) in b.branches.iter().enumerate() {
                if i > 0 {
                    write!(w, "\n\n")?;
                }
                writeln!(w, "# branch {i} real={} loop={}", br.real, br.is_loop)?;
                rows(
                    w,
                    " ",
                    None,
                    br.points.iter().map(|p| vec![p.t, p.value.re, p.value.im]),
                )?;
            }
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(F(0.1).to_string(), "1.0000000000000001e-1");
        assert_eq!(F(-2.0).to_string(), "-2.0000000000000000e0");
        for x in [std::f64::consts::PI, 1e-300, -123456.789, 5e-324] {
            assert_eq!(F(x).to_string().parse::<f64>().unwrap(), x);
        }
    }
}
