//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on runtime or convergence failure, 2 on
//! usage errors.

pub mod export;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fem::{P1Space, ScalarField, Space};
use crate::mesh::{generate_mesh, read_mesh, write_mesh, DomainSpec, TriMesh};
use crate::oracle::{self, radial_interpolate, RadialProfile};
use crate::solver::{solve_eigenproblem, SolveReport, SolverConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Rows kept in the exported oracle profile.
const PROFILE_ROWS: usize = 1000;

#[derive(Debug, Parser)]
#[command(
    name = "ma-eigen",
    version,
    about = "Monge-Ampere eigenvalue solver on convex planar domains"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a mesh and write it in the plain-text mesh format.
    Mesh(MeshArgs),
    /// Solve on one mesh and write report and field files.
    Solve(SolveArgs),
    /// Solve for several h and write a convergence table.
    Table(TableArgs),
    /// Radial shooting reference for the unit disk.
    Oracle(OracleArgs),
}

fn positive(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("expected a positive number, got {s}"))
    }
}

fn domain(s: &str) -> std::result::Result<DomainSpec, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Args)]
pub struct MeshArgs {
    #[arg(long, value_parser = domain)]
    pub domain: DomainSpec,
    #[arg(long, value_parser = positive, allow_hyphen_values = true)]
    pub h: f64,
    #[arg(long)]
    pub out: PathBuf,
}

/// Overrides of the per-domain solver preset.
#[derive(Debug, Clone, Default, Args, Serialize)]
pub struct ConfigOverrides {
    #[arg(long, value_parser = positive, allow_hyphen_values = true)]
    pub tau: Option<f64>,
    #[arg(long = "eps-coeff", value_parser = positive, allow_hyphen_values = true)]
    pub eps_coeff: Option<f64>,
    #[arg(long, value_parser = positive, allow_hyphen_values = true)]
    pub c: Option<f64>,
    #[arg(long, value_parser = positive, allow_hyphen_values = true)]
    pub eta: Option<f64>,
    #[arg(long, value_parser = positive, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    #[arg(long, value_parser = positive, allow_hyphen_values = true)]
    pub xi: Option<f64>,
    #[arg(long = "inner-steps", value_parser = clap::value_parser!(u64).range(1..))]
    pub inner_steps: Option<u64>,
    #[arg(long = "max-outer", value_parser = clap::value_parser!(u64).range(1..))]
    pub max_outer: Option<u64>,
}

impl ConfigOverrides {
    pub fn apply(&self, mut cfg: SolverConfig) -> SolverConfig {
        if let Some(v) = self.tau {
            cfg.tau = v;
        }
        if let Some(v) = self.eps_coeff {
            cfg.eps_coeff = v;
        }
        if let Some(v) = self.c {
            cfg.c = v;
        }
        if let Some(v) = self.eta {
            cfg.eta = v;
        }
        if let Some(v) = self.beta {
            cfg.beta = v;
        }
        if let Some(v) = self.xi {
            cfg.xi = v;
        }
        if let Some(v) = self.inner_steps {
            cfg.inner_steps = v as usize;
        }
        if let Some(v) = self.max_outer {
            cfg.max_outer = v as usize;
        }
        cfg
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long, value_parser = domain, required_unless_present = "mesh")]
    pub domain: Option<DomainSpec>,
    #[arg(long, value_parser = positive, allow_hyphen_values = true, required_unless_present = "mesh", conflicts_with = "mesh")]
    pub h: Option<f64>,
    /// Mesh file; `--domain` then only selects the parameter preset.
    #[arg(long)]
    pub mesh: Option<PathBuf>,
    #[command(flatten)]
    pub config: ConfigOverrides,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Also write a legacy VTK file.
    #[arg(long)]
    pub vtk: bool,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[arg(long, value_parser = domain)]
    pub domain: DomainSpec,
    #[arg(long = "h", value_parser = positive, allow_hyphen_values = true, required = true)]
    pub h: Vec<f64>,
    #[command(flatten)]
    pub config: ConfigOverrides,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long, value_parser = positive, default_value_t = oracle::DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

/// Inputs and emitted files of one command invocation.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub domain: Option<String>,
    pub h: Vec<f64>,
    pub overrides: ConfigOverrides,
    pub out_dir: PathBuf,
    pub files: Vec<PathBuf>,
}

impl RunManifest {
    fn new(command: &str, domain: Option<&DomainSpec>, h: Vec<f64>, overrides: ConfigOverrides, out: &Path) -> Self {
        RunManifest {
            command: command.into(),
            domain: domain.map(|d| d.name().to_string()),
            h,
            overrides,
            out_dir: out.to_path_buf(),
            files: Vec::new(),
        }
    }

    fn add(&mut self, path: PathBuf) -> PathBuf {
        self.files.push(path.clone());
        path
    }

    /// Writes `manifest.json` after checking every listed file exists.
    fn finish(mut self) -> Result<()> {
        let path = self.out_dir.join("manifest.json");
        self.files.push(path.clone());
        if let Some(missing) = self.files[..self.files.len() - 1].iter().find(|f| !f.exists()) {
            return Err(Error::InvalidArgument(format!(
                "expected output {} was not written",
                missing.display()
            )));
        }
        export::write_json(&self, &path)
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Runs a parsed command and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let outcome = match cli.command {
        Command::Mesh(a) => cmd_mesh(&a),
        Command::Solve(a) => cmd_solve(&a),
        Command::Table(a) => cmd_table(&a),
        Command::Oracle(a) => cmd_oracle(&a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_FAILURE
        }
    }
}

fn usage(msg: impl std::fmt::Display) -> Result<i32> {
    eprintln!("usage error: {msg}");
    Ok(EXIT_USAGE)
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            code
        }
    }
}

pub fn cmd_mesh(args: &MeshArgs) -> Result<i32> {
    let mesh = generate_mesh(&args.domain, args.h)?;
    if let Some(dir) = args.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        ensure_dir(dir)?;
    }
    write_mesh(&mesh, &args.out)?;
    println!("N_h={}", mesh.num_vertices());
    println!("N_0h={}", mesh.num_interior());
    println!("h_actual={}", mesh.h());
    Ok(EXIT_OK)
}

fn config_for(domain: Option<&DomainSpec>, overrides: &ConfigOverrides) -> Result<SolverConfig> {
    let base = domain.map_or_else(SolverConfig::default, SolverConfig::for_domain);
    let cfg = overrides.apply(base);
    cfg.validate()?;
    Ok(cfg)
}

macro_rules! usage_on_err {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(e) => return usage(e),
        }
    };
}

#[derive(Serialize)]
struct StructuredReport<'a> {
    domain: Option<&'a str>,
    config: &'a SolverConfig,
    report: &'a SolveReport,
}

pub fn cmd_solve(args: &SolveArgs) -> Result<i32> {
    let cfg = usage_on_err!(config_for(args.domain.as_ref(), &args.config));
    let mesh = match (&args.mesh, &args.domain, args.h) {
        (Some(path), _, _) => read_mesh(path)?,
        (None, Some(d), Some(h)) => generate_mesh(d, h)?,
        _ => return usage("need --mesh or both --domain and --h"),
    };
    ensure_dir(&args.out)?;
    let h_list = args.h.into_iter().collect();
    let mut manifest = RunManifest::new("solve", args.domain.as_ref(), h_list, args.config.clone(), &args.out);

    let report = solve_eigenproblem(mesh.clone(), cfg.clone())?;
    let structured = StructuredReport {
        domain: args.domain.as_ref().map(DomainSpec::name),
        config: &cfg,
        report: &report,
    };
    export::write_report_text(&report, &manifest.add(args.out.join("report.txt")))?;
    export::write_json(&structured, &manifest.add(args.out.join("report.json")))?;
    export::write_field_csv(&mesh, &report.final_u, &manifest.add(args.out.join("field.csv")))?;
    let cs = export::cross_section(&mesh, &report.final_u);
    export::write_cross_section_csv(&cs, &manifest.add(args.out.join("cross_section.csv")))?;
    if args.vtk {
        export::write_vtk(&mesh, &report.final_u, &manifest.add(args.out.join("field.vtk")))?;
    }
    manifest.finish()?;

    println!("lambda_final={}", report.lambda_final);
    println!("min_u={}", report.min_u);
    println!("iterations={}", report.iterations);
    println!("converged={}", report.converged);
    println!("wall_time={:.3}", report.wall_time);
    if report.converged {
        Ok(EXIT_OK)
    } else {
        eprintln!(
            "error: no convergence after {} outer iterations (last residual {:.3e})",
            report.iterations,
            report.residual_history.last().copied().unwrap_or(f64::NAN)
        );
        Ok(EXIT_FAILURE)
    }
}

/// Discrete `L2` (lumped) and max-norm errors against the radial profile.
pub fn disk_errors(mesh: &TriMesh, u: &[f64], profile: &RadialProfile) -> Result<(f64, f64)> {
    let exact = radial_interpolate(profile, mesh.vertices())?;
    let diff: Vec<f64> = u.iter().zip(&exact).map(|(a, b)| a - b).collect();
    let linf = diff.iter().fold(0.0_f64, |m, d| m.max(d.abs()));
    let space = P1Space::new(mesh.clone());
    let l2 = space.norm(&ScalarField::new(diff, Space::Full))?;
    Ok((l2, linf))
}

/// One line of the convergence table.
#[derive(Debug, Clone, Serialize)]
pub struct TableRow {
    pub h: f64,
    pub h_actual: f64,
    pub num_vertices: usize,
    pub iterations: usize,
    pub converged: bool,
    pub residual: f64,
    pub lambda: f64,
    pub min_u: f64,
    pub l2_error: Option<f64>,
    pub linf_error: Option<f64>,
    pub l2_rate: Option<f64>,
    pub linf_rate: Option<f64>,
    pub wall_time: f64,
    pub error: Option<String>,
}

impl TableRow {
    fn failed(h: f64, e: &Error) -> Self {
        TableRow {
            h,
            h_actual: f64::NAN,
            num_vertices: 0,
            iterations: 0,
            converged: false,
            residual: f64::NAN,
            lambda: f64::NAN,
            min_u: f64::NAN,
            l2_error: None,
            linf_error: None,
            l2_rate: None,
            linf_rate: None,
            wall_time: 0.0,
            error: Some(e.to_string()),
        }
    }
}

fn rate(coarse: Option<f64>, fine: Option<f64>) -> Option<f64> {
    match (coarse, fine) {
        (Some(c), Some(f)) if c > 0.0 && f > 0.0 => Some((c / f).log2()),
        _ => None,
    }
}

/// Solves every `h` in turn; a failing row is recorded and the sweep goes on.
pub fn table_rows(
    domain: &DomainSpec,
    hs: &[f64],
    cfg: &SolverConfig,
    mut on_report: impl FnMut(usize, &TriMesh, &SolveReport) -> Result<()>,
) -> Result<Vec<TableRow>> {
    let profile = match domain {
        DomainSpec::Disk => Some(oracle::solve_disk_eigen(oracle::DEFAULT_TOL)?),
        _ => None,
    };
    let mut rows: Vec<TableRow> = Vec::with_capacity(hs.len());
    for (i, &h) in hs.iter().enumerate() {
        let attempt = (|| -> Result<TableRow> {
            let mesh = generate_mesh(domain, h)?;
            let report = solve_eigenproblem(mesh.clone(), cfg.clone())?;
            on_report(i, &mesh, &report)?;
            let errors = profile
                .as_ref()
                .map(|p| disk_errors(&mesh, &report.final_u, p))
                .transpose()?;
            Ok(TableRow {
                h,
                h_actual: mesh.h(),
                num_vertices: mesh.num_vertices(),
                iterations: report.iterations,
                converged: report.converged,
                residual: report.residual_history.last().copied().unwrap_or(f64::NAN),
                lambda: report.lambda_final,
                min_u: report.min_u,
                l2_error: errors.map(|e| e.0),
                linf_error: errors.map(|e| e.1),
                l2_rate: None,
                linf_rate: None,
                wall_time: report.wall_time,
                error: None,
            })
        })();
        let mut row = attempt.unwrap_or_else(|e| TableRow::failed(h, &e));
        if let Some(prev) = rows.last() {
            row.l2_rate = rate(prev.l2_error, row.l2_error);
            row.linf_rate = rate(prev.linf_error, row.linf_error);
        }
        rows.push(row);
    }
    Ok(rows)
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

pub fn table_csv(rows: &[TableRow]) -> String {
    let mut s = String::from(
        "h,h_actual,num_vertices,iterations,converged,residual,lambda,min_u,l2_error,linf_error,l2_rate,linf_rate,error\n",
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.h,
            r.h_actual,
            r.num_vertices,
            r.iterations,
            r.converged,
            r.residual,
            r.lambda,
            r.min_u,
            opt(r.l2_error),
            opt(r.linf_error),
            opt(r.l2_rate),
            opt(r.linf_rate),
            r.error.as_deref().unwrap_or("").replace(',', ";"),
        );
    }
    s
}

pub fn cmd_table(args: &TableArgs) -> Result<i32> {
    if args.h.is_empty() {
        return usage("at least one --h is required");
    }
    let cfg = usage_on_err!(config_for(Some(&args.domain), &args.config));
    ensure_dir(&args.out)?;
    let mut manifest = RunManifest::new(
        "table",
        Some(&args.domain),
        args.h.clone(),
        args.config.clone(),
        &args.out,
    );
    let mut written = Vec::new();
    let rows = table_rows(&args.domain, &args.h, &cfg, |i, _, report| {
        let path = args.out.join(format!("report_{i}.txt"));
        export::write_report_text(report, &path)?;
        written.push(path);
        Ok(())
    })?;
    manifest.files.extend(written);
    let table_path = manifest.add(args.out.join("table.csv"));
    let text = table_csv(&rows);
    fs::write(&table_path, &text).map_err(|e| Error::io(&table_path, e))?;
    export::write_json(&rows, &manifest.add(args.out.join("table.json")))?;
    manifest.finish()?;
    print!("{text}");
    let all_ok = rows.iter().all(|r| r.error.is_none() && r.converged);
    Ok(if all_ok { EXIT_OK } else { EXIT_FAILURE })
}

pub fn cmd_oracle(args: &OracleArgs) -> Result<i32> {
    let profile = oracle::solve_disk_eigen(args.tol)?;
    ensure_dir(&args.out)?;
    let mut manifest = RunManifest::new(
        "oracle",
        Some(&DomainSpec::Disk),
        Vec::new(),
        ConfigOverrides::default(),
        &args.out,
    );
    let stride = (profile.r_grid.len() / PROFILE_ROWS).max(1);
    oracle::write_profile_csv(&profile.thinned(stride), manifest.add(args.out.join("profile.csv")))?;
    manifest.finish()?;
    println!("lambda={}", profile.lambda);
    println!("u0={}", profile.u0);
    Ok(EXIT_OK)
}
