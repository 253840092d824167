//! The `diode` command line.
//!
//! Every command prints a JSON report on stdout. Commands that produce a
//! curve or a scan also write a data file, whose path appears in the report.
//! Exit status is 0 on success, 1 when a solver flagged its result and 2 for
//! usage, configuration or domain errors.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use diode_core::bifurcation::{
    assemble_branches, LineSweep, Param, ScanResult, Space, SurfaceSweep, SweepSpec, ZAxis,
};
use diode_core::bvp::{child_langmuir_check, shoot, Freeze, ShootOptions};
use diode_core::cubic::{
    matched_root_distance, solve_closed_form, solve_numeric_oracle, theta_candidates, zero_band,
};
use diode_core::model::RootClass;
use diode_core::potential::{
    classify_regime_with, deflection_point, first_integral_residual, integrate_d, IntegrateOptions,
};
use diode_core::ReducedParams;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::json;

use crate::config::RunConfig;
use crate::output::{self, Format, F};
use crate::par;

/// Largest closed-form vs oracle deviation accepted for simple roots.
pub const ORACLE_TOL: f64 = 1e-9;

/// Environment variable naming the directory for default output files.
pub const OUTPUT_DIR_VAR: &str = "DIODE_OUTPUT_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "diode",
    version,
    about = "Vacuum diode solvers: deflection cubic, effective potential, shooting, bifurcation scans"
)]
pub struct Cli {
    /// JSON file with default values for any argument
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Data file to write [default: $DIODE_OUTPUT_DIR/<command>.<ext>]
    #[arg(long, short, global = true, value_name = "FILE")]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Roots of u³ + k̂u² + u + b̂, or the θ values they induce
    #[command(allow_negative_numbers = true)]
    Cubic {
        k_hat: Option<f64>,
        b_hat: Option<f64>,
        /// u or theta
        #[arg(long, value_parser = parse_enum::<Space>)]
        space: Option<Space>,
        /// Compare against the companion-matrix eigenvalues
        #[arg(long)]
        oracle: bool,
    },
    /// Integrate the effective potential D from the cathode
    #[command(allow_negative_numbers = true)]
    Integrate {
        j_x: Option<f64>,
        gamma: Option<f64>,
        x_max: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
        /// Startup offset from the singular point
        #[arg(long)]
        x0: Option<f64>,
    },
    /// Solve the two-point problem u(1) = alpha, v(1) = a_L for (j_x, beta)
    #[command(allow_negative_numbers = true)]
    Shoot {
        alpha: Option<f64>,
        #[arg(value_name = "A_L")]
        a_l: Option<f64>,
        #[arg(long)]
        jx_guess: Option<f64>,
        #[arg(long)]
        beta_guess: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
        /// none, jx or beta
        #[arg(long, value_parser = parse_enum::<Freeze>)]
        freeze: Option<Freeze>,
        #[arg(long)]
        max_iter: Option<usize>,
    },
    /// Sample solutions over a line or a rectangle of (k̂, b̂)
    #[command(allow_negative_numbers = true)]
    Scan {
        /// u or theta
        #[arg(long, value_parser = parse_enum::<Space>)]
        space: Option<Space>,
        /// Scan the (k̂, b̂) rectangle instead of a line
        #[arg(long)]
        surface: bool,
        /// Parameter held fixed on a line: k_hat or b_hat
        #[arg(long, value_parser = parse_enum::<Param>)]
        fixed: Option<Param>,
        /// Value of the fixed parameter
        #[arg(long)]
        value: Option<f64>,
        /// Range of the varied parameter
        #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
        range: Option<Vec<f64>>,
        /// Points on a line
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
        k_range: Option<Vec<f64>>,
        #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
        b_range: Option<Vec<f64>>,
        #[arg(long)]
        n_k: Option<usize>,
        #[arg(long)]
        n_b: Option<usize>,
        /// Surface height: re or im
        #[arg(long, value_parser = parse_enum::<ZAxis>)]
        z: Option<ZAxis>,
    },
    /// Check the Child–Langmuir bounds for a trial potential δ²x^{4/3}
    #[command(name = "child-langmuir", allow_negative_numbers = true)]
    ChildLangmuir {
        delta: Option<f64>,
        j_x_max: Option<f64>,
        #[arg(value_name = "PHI_L")]
        phi_l: Option<f64>,
    },
}

fn parse_enum<T: DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.into())).map_err(|e| e.to_string())
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Config(#[from] crate::config::ConfigError),
    #[error("{0}")]
    Domain(String),
    #[error("{0}")]
    Solver(String),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) | CliError::Domain(_) => 2,
            CliError::Solver(_) | CliError::Io { .. } => 1,
        }
    }
}

impl From<diode_core::Error> for CliError {
    fn from(e: diode_core::Error) -> Self {
        match e {
            diode_core::Error::Domain(m) => CliError::Domain(m),
            diode_core::Error::Internal(m) => CliError::Solver(m),
        }
    }
}

/// Outcome of a command that ran to completion.
struct Outcome {
    report: serde_json::Value,
    /// Reason the result should not be trusted, if any.
    flag: Option<String>,
}

struct Ctx<'a> {
    cfg: RunConfig,
    output: Option<PathBuf>,
    format: Option<Format>,
    out_dir: Option<&'a Path>,
}

impl Ctx<'_> {
    fn format(&self, default: Format) -> Format {
        self.format.or(self.cfg.format).unwrap_or(default)
    }

    fn destination(&self, command: &str, format: Format) -> PathBuf {
        if let Some(p) = self.output.clone().or_else(|| self.cfg.output.clone()) {
            return p;
        }
        let name = format!("{command}.{}", format.extension());
        match self.out_dir {
            Some(d) => d.join(name),
            None => PathBuf::from(name),
        }
    }

    fn explicit_destination(&self) -> Option<PathBuf> {
        self.output.clone().or_else(|| self.cfg.output.clone())
    }
}

fn need<T>(value: Option<T>, name: &str) -> Result<T, CliError> {
    value.ok_or_else(|| {
        CliError::Usage(format!(
            "missing {name} (give it on the command line or in --config)"
        ))
    })
}

fn pair(v: Option<Vec<f64>>) -> Option<(f64, f64)> {
    v.map(|v| (v[0], v[1]))
}

fn write_file(
    path: &Path,
    f: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>,
) -> Result<(), CliError> {
    let io_err = |source| CliError::Io {
        path: path.into(),
        source,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io_err)?;
    }
    let mut w = BufWriter::new(File::create(path).map_err(io_err)?);
    f(&mut w).and_then(|_| w.flush()).map_err(io_err)
}

/// Parse `args` (including the program name) and run the command.
///
/// `out_dir` is the default directory for data files, usually taken from
/// [`OUTPUT_DIR_VAR`]. Returns the process exit code.
pub fn run<I, T>(
    args: I,
    out_dir: Option<&Path>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                stdout.write_all(text.as_bytes())
            } else {
                stderr.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(cli, out_dir) {
        Ok(outcome) => {
            let mut text =
                serde_json::to_string_pretty(&outcome.report).expect("reports serialize");
            text.push('\n');
            if stdout.write_all(text.as_bytes()).is_err() {
                return 1;
            }
            match outcome.flag {
                Some(msg) => {
                    let _ = writeln!(stderr, "diode: {msg}");
                    1
                }
                None => 0,
            }
        }
        Err(e) => {
            let _ = writeln!(stderr, "diode: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: Cli, out_dir: Option<&Path>) -> Result<Outcome, CliError> {
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let ctx = Ctx {
        cfg,
        output: cli.output,
        format: cli.format,
        out_dir,
    };
    match cli.command {
        Command::Cubic {
            k_hat,
            b_hat,
            space,
            oracle,
        } => cmd_cubic(
            &ctx,
            need(k_hat.or(ctx.cfg.k_hat), "k_hat")?,
            need(b_hat.or(ctx.cfg.b_hat), "b_hat")?,
            space.or(ctx.cfg.space).unwrap_or(Space::U),
            oracle || ctx.cfg.oracle.unwrap_or(false),
        ),
        Command::Integrate {
            j_x,
            gamma,
            x_max,
            tol,
            x0,
        } => {
            let mut opts = IntegrateOptions::default();
            if let Some(t) = tol.or(ctx.cfg.tol) {
                opts.tol = t;
            }
            if let Some(x) = x0.or(ctx.cfg.x0) {
                opts.x0 = x;
            }
            cmd_integrate(
                &ctx,
                need(j_x.or(ctx.cfg.j_x), "j_x")?,
                need(gamma.or(ctx.cfg.gamma), "gamma")?,
                need(x_max.or(ctx.cfg.x_max), "x_max")?,
                &opts,
            )
        }
        Command::Shoot {
            alpha,
            a_l,
            jx_guess,
            beta_guess,
            tol,
            freeze,
            max_iter,
        } => {
            let mut opts = ShootOptions::default();
            if let Some(t) = tol.or(ctx.cfg.tol) {
                opts.tol = t;
            }
            if let Some(f) = freeze.or(ctx.cfg.freeze) {
                opts.freeze = f;
            }
            if let Some(m) = max_iter.or(ctx.cfg.max_iter) {
                opts.max_iter = m;
            }
            let guess = (
                jx_guess.or(ctx.cfg.jx_guess).unwrap_or(1.0),
                beta_guess.or(ctx.cfg.beta_guess).unwrap_or(0.0),
            );
            cmd_shoot(
                &ctx,
                need(alpha.or(ctx.cfg.alpha), "alpha")?,
                need(a_l.or(ctx.cfg.a_l), "a_L")?,
                guess,
                &opts,
            )
        }
        Command::Scan {
            space,
            surface,
            fixed,
            value,
            range,
            n,
            k_range,
            b_range,
            n_k,
            n_b,
            z,
        } => {
            let c = &ctx.cfg;
            let space = space.or(c.space).unwrap_or(Space::U);
            let spec = if surface || c.surface.unwrap_or(false) {
                SweepSpec::Surface(SurfaceSweep {
                    space,
                    k_range: pair(k_range).or(c.k_range).unwrap_or((-5.0, 5.0)),
                    b_range: pair(b_range).or(c.b_range).unwrap_or((-5.0, 5.0)),
                    n_k: n_k.or(c.n_k).unwrap_or(201),
                    n_b: n_b.or(c.n_b).unwrap_or(201),
                    z: z.or(c.z).unwrap_or(ZAxis::Re),
                })
            } else {
                SweepSpec::Line(LineSweep {
                    space,
                    fixed: need(fixed.or(c.fixed), "fixed")?,
                    fixed_value: need(value.or(c.value), "value")?,
                    range: pair(range).or(c.range).unwrap_or((-5.0, 5.0)),
                    n: n.or(c.n).unwrap_or(201),
                })
            };
            cmd_scan(&ctx, spec)
        }
        Command::ChildLangmuir {
            delta,
            j_x_max,
            phi_l,
        } => cmd_child_langmuir(
            need(delta.or(ctx.cfg.delta), "delta")?,
            need(j_x_max.or(ctx.cfg.j_x_max), "j_x_max")?,
            need(phi_l.or(ctx.cfg.phi_l), "phi_L")?,
        ),
    }
}

fn finite(values: &[(&str, f64)]) -> Result<(), CliError> {
    for (name, v) in values {
        if !v.is_finite() {
            return Err(CliError::Domain(format!("{name} must be finite")));
        }
    }
    Ok(())
}

fn cmd_cubic(
    ctx: &Ctx,
    k_hat: f64,
    b_hat: f64,
    space: Space,
    oracle: bool,
) -> Result<Outcome, CliError> {
    finite(&[("k_hat", k_hat), ("b_hat", b_hat)])?;
    let p = ReducedParams::cubic(k_hat, b_hat);
    let roots = solve_closed_form(&p);
    let mut flag = roots
        .fallback
        .then(|| "closed form fell back to the numeric oracle".to_string());

    let mut report = json!({ "k_hat": k_hat, "b_hat": b_hat, "space": space });
    let theta = (space == Space::Theta).then(|| theta_candidates(&roots));
    if let Some(t) = &theta {
        report["theta"] = json!(t);
    }
    report["roots"] = json!(roots);

    if oracle {
        let numeric = solve_numeric_oracle(&p);
        let deviation = matched_root_distance(&roots, &numeric);
        // inside the zero band the cubic may really have a cluster of roots:
        // Δ is the product of squared root differences, so a triple spreads
        // like |Δ|^{1/6} and a double like |Δ|^{1/2}/d² (d: distance to the
        // simple root)
        let band = zero_band(&p);
        let tol = match roots.class {
            RootClass::TripleRoot => ORACLE_TOL.max(2.0 * band.powf(1.0 / 6.0)),
            RootClass::DoubleRoot => {
                let d = (roots.roots[0].value.re - roots.roots[1].value.re).abs();
                ORACLE_TOL.max(2.0 * band.sqrt() / (d * d))
            }
            _ => ORACLE_TOL,
        };
        report["oracle"] =
            json!({ "roots": numeric, "max_deviation": deviation, "tolerance": tol });
        if !(deviation <= tol) && flag.is_none() {
            flag = Some(format!(
                "closed form deviates from the oracle by {deviation:e}"
            ));
        }
    }

    if let Some(path) = ctx.explicit_destination() {
        let format = ctx.format(Format::Json);
        write_file(&path, |w| match format {
            Format::Json => output::write_json(w, &report),
            Format::Csv | Format::Gnuplot => {
                let sep = if format == Format::Csv { "," } else { " " };
                let values: Vec<_> = match &theta {
                    Some(t) => t.values.iter().map(|c| (c.value, c.count)).collect(),
                    None => roots
                        .roots
                        .iter()
                        .map(|r| (r.value, r.multiplicity))
                        .collect(),
                };
                let header = ["index", "re", "im", "multiplicity"].join(sep);
                if format == Format::Csv {
                    writeln!(w, "{header}")?;
                } else {
                    writeln!(w, "# {header}")?;
                }
                for (i, (v, m)) in values.iter().enumerate() {
                    writeln!(w, "{i}{sep}{}{sep}{}{sep}{m}", F(v.re), F(v.im))?;
                }
                Ok(())
            }
        })?;
        report["output"] = json!(path);
    }
    Ok(Outcome { report, flag })
}

fn cmd_integrate(
    ctx: &Ctx,
    j_x: f64,
    gamma: f64,
    x_max: f64,
    opts: &IntegrateOptions,
) -> Result<Outcome, CliError> {
    finite(&[("j_x", j_x), ("gamma", gamma), ("x_max", x_max)])?;
    let traj = integrate_d(j_x, gamma, x_max, opts)?;
    let regime = classify_regime_with(j_x, gamma, opts)?;
    let format = ctx.format(Format::Csv);
    let path = ctx.destination("integrate", format);
    write_file(&path, |w| output::write_potential(w, &traj, format))?;

    let (x_end, last) = traj.last().expect("trajectory keeps the startup sample");
    let truncated = traj.metadata.truncated.clone();
    let report = json!({
        "j_x": j_x,
        "gamma": gamma,
        "regime": regime,
        "samples": traj.len(),
        "x_end": x_end,
        "D_end": last.d,
        "deflection_point": deflection_point(&traj),
        "first_integral_residual": first_integral_residual(&traj, j_x, gamma),
        "events": traj.metadata.events,
        "stats": traj.metadata.stats,
        "truncated": truncated,
        "output": path,
    });
    let flag = truncated.map(|t| format!("integration stopped early: {t}"));
    Ok(Outcome { report, flag })
}

fn cmd_shoot(
    ctx: &Ctx,
    alpha: f64,
    a_l: f64,
    guess: (f64, f64),
    opts: &ShootOptions,
) -> Result<Outcome, CliError> {
    finite(&[
        ("alpha", alpha),
        ("a_L", a_l),
        ("jx_guess", guess.0),
        ("beta_guess", guess.1),
    ])?;
    let r = shoot(alpha, a_l, guess, opts)?;
    let format = ctx.format(Format::Csv);
    let path = ctx.destination("shoot", format);
    write_file(&path, |w| output::write_diode(w, &r.trajectory, format))?;

    let report = json!({
        "alpha": alpha,
        "a_L": a_l,
        "j_x": r.j_x,
        "beta": r.beta,
        "end_values": r.end_values,
        "residual": r.residual,
        "x_star": r.x_star,
        "iterations": r.iterations,
        "converged": r.converged,
        "penalized": r.penalized,
        "freeze": r.freeze,
        "options": opts,
        "output": path,
    });
    let flag = if !r.converged {
        Some(format!(
            "shooting did not converge (residual {:e})",
            r.residual
        ))
    } else if r.penalized {
        Some("solution reaches the free boundary before the anode".to_string())
    } else {
        None
    };
    Ok(Outcome { report, flag })
}

#[derive(Serialize)]
struct BranchSummary {
    branches: usize,
    real_branches: usize,
    events: usize,
    loops: usize,
    ambiguous: usize,
}

fn cmd_scan(ctx: &Ctx, spec: SweepSpec) -> Result<Outcome, CliError> {
    if let SweepSpec::Line(s) = &spec {
        finite(&[
            ("value", s.fixed_value),
            ("range", s.range.0),
            ("range", s.range.1),
        ])?;
    }
    let scan: ScanResult = match &spec {
        SweepSpec::Line(s) => par::scan_1d(s)?,
        SweepSpec::Surface(s) => par::scan_surface(s)?,
    };
    let branches = match spec {
        SweepSpec::Line(_) => Some(assemble_branches(&scan)?),
        SweepSpec::Surface(_) => None,
    };
    let format = ctx.format(Format::Csv);
    let path = ctx.destination("scan", format);
    write_file(&path, |w| match format {
        Format::Csv => output::write_scan_csv(w, &scan),
        Format::Json => output::write_scan_json(w, &scan, branches.as_ref()),
        Format::Gnuplot => output::write_scan_gnuplot(w, &scan, branches.as_ref()),
    })?;

    let summary = branches.as_ref().map(|b| BranchSummary {
        branches: b.branches.len(),
        real_branches: b.branches.iter().filter(|x| x.real).count(),
        events: b.events.len(),
        loops: b.loops.len(),
        ambiguous: b.ambiguous.len(),
    });
    let max_residual = scan
        .samples
        .iter()
        .map(|s| s.max_residual)
        .fold(0.0, f64::max);
    let report = json!({
        "spec": scan.spec,
        "samples": scan.samples.len(),
        "coverage": scan.coverage,
        "masked": scan.mask.iter().filter(|m| **m).count(),
        "max_residual": max_residual,
        "bifurcation_points": scan.bifurcation_points,
        "branches": summary,
        "output": path,
    });
    let flag =
        (max_residual > ORACLE_TOL).then(|| format!("largest cubic residual {max_residual:e}"));
    Ok(Outcome { report, flag })
}

fn cmd_child_langmuir(delta: f64, j_x_max: f64, phi_l: f64) -> Result<Outcome, CliError> {
    for (name, v) in [("delta", delta), ("j_x_max", j_x_max), ("phi_L", phi_l)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(CliError::Domain(format!("{name} must be positive")));
        }
    }
    let r = child_langmuir_check(delta, j_x_max, phi_l);
    Ok(Outcome {
        report: json!(r),
        flag: None,
    })
}
