use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use robin_spectra::discretize::fem::{principal_eigenvalue_fem, BoundaryField};
use robin_spectra::discretize::mesh::{mesh_annulus, mesh_disk, mesh_rectangle, Mesh2D};
use robin_spectra::discretize::meshio::parse_mesh;
use robin_spectra::error::SpectraError;
use robin_spectra::exact1d::{decide_sign, principal_eigenvalue_1d};
use robin_spectra::harness::config::parse_config;
use robin_spectra::harness::svg::render_svg;
use robin_spectra::harness::sweep::{run_sweep, write_csv};
use robin_spectra::harness::verify::{verify_all, Fault, VerifyOptions};
use robin_spectra::radial::{principal_eigenvalue_ball, BallProblem};
use robin_spectra::types::{BoundaryOperator, EigenEstimate, Problem1D, TolerancePolicy};

const EXIT_VERIFY: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_SOLVER: u8 = 3;

#[derive(Parser)]
#[command(name = "robin-spectra", version, about = "Principal eigenvalues of the Laplacian with Robin boundary conditions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Interval (0, L), solved through its characteristic equation.
    Exact1d {
        #[arg(long, allow_hyphen_values = true)]
        length: f64,
        /// D, N, R (with --beta-left), R(beta) or a bare coefficient.
        #[arg(long, allow_hyphen_values = true)]
        left: String,
        #[arg(long, allow_hyphen_values = true)]
        right: String,
        #[arg(long, allow_hyphen_values = true)]
        beta_left: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        beta_right: Option<f64>,
    },
    /// Ball of radius R in R^N, by radial shooting.
    Ball {
        #[arg(long)]
        dim: u32,
        #[arg(long, allow_hyphen_values = true)]
        radius: f64,
        /// Robin coefficient, or D / N.
        #[arg(long, allow_hyphen_values = true)]
        beta: String,
    },
    /// Finite elements on a mesh file or a built-in mesh.
    Fem {
        /// A mesh file, or builtin:square:A:RES, builtin:rect:A:B:RES,
        /// builtin:disk:R:RES, builtin:annulus:R0:R1:RES.
        #[arg(long)]
        mesh: String,
        /// Uniform boundary condition; defaults to the mesh's own tags.
        #[arg(long, allow_hyphen_values = true)]
        beta: Option<String>,
        #[arg(long)]
        eig_rel_tol: Option<f64>,
    },
    /// Parameter sweep described by a config file.
    Sweep {
        #[arg(long)]
        spec: PathBuf,
        /// Overrides `output` from the config; `-` writes to stdout.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Run every invariant check and print a table.
    Verify {
        #[arg(long)]
        fast: bool,
        #[arg(long)]
        eig_rel_tol: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Deliberately break the solvers to confirm the checks notice.
        #[arg(long, value_enum)]
        inject_fault: Option<FaultArg>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FaultArg {
    FlipRobinSign,
}

enum Failure {
    Usage(String),
    Solver(SpectraError),
    Verify,
}

impl From<SpectraError> for Failure {
    fn from(e: SpectraError) -> Self {
        match e {
            SpectraError::Config { .. } | SpectraError::MeshParse { .. } | SpectraError::InvalidBoundary(_) | SpectraError::Io(_) => {
                Failure::Usage(e.to_string())
            }
            other => Failure::Solver(other),
        }
    }
}

fn boundary(spec: &str, beta: Option<f64>) -> Result<BoundaryOperator, Failure> {
    match (spec.trim().to_ascii_lowercase().as_str(), beta) {
        ("r" | "robin", Some(b)) => Ok(BoundaryOperator::Robin(b)),
        ("r" | "robin", None) => Err(Failure::Usage(format!("`{spec}` needs a coefficient"))),
        (_, Some(_)) => Err(Failure::Usage(format!("a coefficient was given for non-Robin condition `{spec}`"))),
        _ => Ok(spec.parse()?),
    }
}

fn number(s: &str, what: &str) -> Result<f64, Failure> {
    s.parse().map_err(|_| Failure::Usage(format!("bad {what} `{s}` in builtin mesh")))
}

fn resolution(s: &str) -> Result<usize, Failure> {
    s.parse().map_err(|_| Failure::Usage(format!("bad resolution `{s}` in builtin mesh")))
}

fn load_mesh(spec: &str) -> Result<Mesh2D, Failure> {
    let Some(rest) = spec.strip_prefix("builtin:") else {
        let text = fs::read_to_string(spec).map_err(|e| Failure::Usage(format!("{spec}: {e}")))?;
        return Ok(parse_mesh(&text)?);
    };
    let parts: Vec<&str> = rest.split(':').collect();
    let mesh = match parts.as_slice() {
        ["square", a, res] => mesh_rectangle(number(a, "side")?, number(a, "side")?, resolution(res)?),
        ["rect", a, b, res] => mesh_rectangle(number(a, "width")?, number(b, "height")?, resolution(res)?),
        ["disk", r, res] => mesh_disk(number(r, "radius")?, resolution(res)?),
        ["annulus", r0, r1, res] => mesh_annulus(number(r0, "inner radius")?, number(r1, "outer radius")?, resolution(res)?),
        _ => return Err(Failure::Usage(format!("unknown builtin mesh `{spec}`"))),
    };
    Ok(mesh?)
}

fn print_estimate(out: &mut impl Write, est: &EigenEstimate) -> io::Result<()> {
    writeln!(out, "sigma    = {:.16e}", est.value)?;
    writeln!(out, "residual = {:.3e}", est.residual)?;
    writeln!(out, "method   = {}", est.method.as_str())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let mut out = io::stdout().lock();
    let io_err = |e: io::Error| Failure::Usage(e.to_string());
    match cli.command {
        Command::Exact1d { length, left, right, beta_left, beta_right } => {
            let problem = Problem1D::interval(length, boundary(&left, beta_left)?, boundary(&right, beta_right)?);
            let est = principal_eigenvalue_1d(&problem, &TolerancePolicy::default())?;
            print_estimate(&mut out, &est).map_err(io_err)?;
            writeln!(out, "regime   = {:?}", decide_sign(&problem)).map_err(io_err)?;
        }
        Command::Ball { dim, radius, beta } => {
            let problem = BallProblem::new(dim, radius, boundary(&beta, None)?);
            let est = principal_eigenvalue_ball(&problem, &TolerancePolicy::default())?;
            print_estimate(&mut out, &est).map_err(io_err)?;
        }
        Command::Fem { mesh, beta, eig_rel_tol } => {
            let mesh = load_mesh(&mesh)?;
            let tol = TolerancePolicy { eig_rel_tol: eig_rel_tol.unwrap_or(1e-9), ..TolerancePolicy::discretization() }.validate()?;
            let field = match beta {
                Some(b) => BoundaryField::Uniform(boundary(&b, None)?),
                None => BoundaryField::FromMesh,
            };
            let (est, warnings) = principal_eigenvalue_fem(&mesh, &field, None, &tol)?;
            for w in &warnings {
                eprintln!("warning: {w}");
            }
            print_estimate(&mut out, &est).map_err(io_err)?;
            writeln!(out, "vertices = {}\ntriangles = {}", mesh.vertices.len(), mesh.triangles.len()).map_err(io_err)?;
        }
        Command::Sweep { spec, output, svg } => {
            let text = fs::read_to_string(&spec).map_err(|e| Failure::Usage(format!("{}: {e}", spec.display())))?;
            let config = parse_config(&text)?;
            let result = run_sweep(&config.spec)?;
            let failed = result.rows.iter().filter(|r| !r.converged()).count();
            match output.or(config.output) {
                Some(path) if path.as_os_str() != "-" => {
                    let file = fs::File::create(&path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
                    write_csv(&result.rows, file, config.timing)?;
                }
                _ => write_csv(&result.rows, &mut out, config.timing)?,
            }
            if let Some(path) = svg.or(config.svg) {
                let title = spec.file_stem().map_or("sweep".into(), |s| s.to_string_lossy().into_owned());
                fs::write(&path, render_svg(&result.rows, &title)).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            }
            eprintln!("fit: {} (R² = {:.6})", result.fit.model, result.fit.quality);
            if failed > 0 {
                eprintln!("{failed} grid points failed to converge and were left out of the fit");
            }
        }
        Command::Verify { fast, eig_rel_tol, seed, inject_fault } => {
            let defaults = VerifyOptions::default();
            let opts = VerifyOptions {
                tol: TolerancePolicy { eig_rel_tol: eig_rel_tol.unwrap_or(defaults.tol.eig_rel_tol), ..defaults.tol }.validate()?,
                fast,
                fault: inject_fault.map(|FaultArg::FlipRobinSign| Fault::FlipRobinSign),
                seed: seed.unwrap_or(defaults.seed),
            };
            let report = verify_all(&opts);
            write!(out, "{}", report.render()).map_err(io_err)?;
            if !report.all_passed() {
                return Err(Failure::Verify);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verify) => ExitCode::from(EXIT_VERIFY),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Solver(e)) => {
            eprintln!("solver failure: {e}");
            ExitCode::from(EXIT_SOLVER)
        }
    }
}
