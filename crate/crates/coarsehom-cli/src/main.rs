//! Command-line front end.
//!
//! Every command writes a versioned JSON report (or CSV where noted) and
//! exits 0 on success, 2 on configuration errors, 3 on numerical failures,
//! and 4 when the verification suite reports a failing criterion. Reports
//! are byte-deterministic for a fixed config and seed; wall-clock timing
//! goes to stderr.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use coarsehom::amenability::{
    cross_check_equivalence, foelner_search_with, isoperimetric_profile_with, CrossCheckConfig,
    ProfileSample, RegionFamily,
};
use coarsehom::chains::Chain0;
use coarsehom::decider::{
    decide, psc_verdict, Certificate, DecideConfig, DemandFamily, FlowProblem, Verdict,
};
use coarsehom::error::Error as LibError;
use coarsehom::report::Report;
use coarsehom::space::{build_window_with, BuildOptions, SpaceSpec, Window};
use coarsehom::spectral::{
    laplacian_spectrum_with, verify_eigen_covering_bound, weyl_check_with, MeshSpec,
    SpectralOptions, WeylOptions, WeylReport,
};
use coarsehom::suite::{check_all, Scale};

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_ACCEPTANCE: u8 = 4;

#[derive(Parser)]
#[command(
    name = "coarsehom",
    about = "Finite-window vanishing decider for degree-0 uniformly finite homology, \
             with flow certificates, amenability search, and spectral counting bounds",
    version
)]
struct Cli {
    /// Seed for any randomized search order (none is used by default; the
    /// value is echoed into reports for reproducibility).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide vanishing of a demand family across a list of window sizes.
    Decide(DecideArgs),
    /// Solve fixed-capacity feasibility and report the tail certificate.
    Tails(CertificateArgs),
    /// Solve fixed-capacity feasibility and report the cut certificate.
    Cut(CertificateArgs),
    /// Decide vanishing, then apply the genus invariant of the summand.
    Psc(PscArgs),
    /// Search for a region with small collar-to-volume ratio.
    Foelner(FoelnerArgs),
    /// Sample the isoperimetric profile over a region family (CSV).
    Profile(ProfileArgs),
    /// Amenability search cross-checked against the decider.
    CrossCheck(CrossCheckArgs),
    /// Eigenvalues of the scaled mesh Laplacian.
    Spectrum(MeshArgs),
    /// Counting-function growth and volume collapse across meshes (CSV).
    Weyl(WeylArgs),
    /// Covering numbers, packing counts, and the eigenvalue-index bound.
    Cover(CoverArgs),
    /// Run the built-in verification suite.
    CheckAll(CheckAllArgs),
}

#[derive(Args, Serialize)]
struct DecideArgs {
    /// Space spec: a JSON file path, or inline `lattice:N` / `tree:K`.
    #[arg(long)]
    space: String,
    /// Demand family: all-ones, alternating, sublattice:K, or delta.
    #[arg(long, default_value = "all-ones")]
    demand: String,
    /// Largest pair distance the flow may use.
    #[arg(long, default_value_t = 1)]
    reach: u32,
    /// Comma-separated window radii.
    #[arg(long, value_delimiter = ',')]
    sizes: Vec<u32>,
    /// Window vertex budget.
    #[arg(long, default_value_t = coarsehom::space::DEFAULT_VERTEX_BUDGET)]
    budget: usize,
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct CertificateArgs {
    #[arg(long)]
    space: String,
    #[arg(long, default_value = "all-ones")]
    demand: String,
    #[arg(long, default_value_t = 1)]
    reach: u32,
    /// Window radius.
    #[arg(long)]
    size: u32,
    /// Uniform per-pair capacity; defaults to 1.1x (tails) or 0.9x (cut)
    /// of the computed least capacity.
    #[arg(long)]
    capacity: Option<f64>,
    #[arg(long, default_value_t = coarsehom::space::DEFAULT_VERTEX_BUDGET)]
    budget: usize,
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct PscArgs {
    #[command(flatten)]
    decide: DecideArgs,
    /// Integer genus invariant of the compact summand.
    #[arg(long)]
    ahat: i64,
}

#[derive(Args, Serialize)]
struct FoelnerArgs {
    #[arg(long)]
    space: String,
    /// Collar radius.
    #[arg(long, default_value_t = 1)]
    r: u32,
    /// Target collar-to-volume ratio.
    #[arg(long)]
    epsilon: f64,
    /// Maximum number of region evaluations.
    #[arg(long, default_value_t = 10_000)]
    budget: usize,
    #[arg(long, default_value_t = coarsehom::space::DEFAULT_VERTEX_BUDGET)]
    vertex_budget: usize,
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct ProfileArgs {
    #[arg(long)]
    space: String,
    #[arg(long, default_value_t = 1)]
    r: u32,
    /// Region family: balls or boxes.
    #[arg(long, value_enum, default_value_t = ProfileFamily::Balls)]
    family: ProfileFamily,
    /// Comma-separated ball radii (family = balls).
    #[arg(long, value_delimiter = ',')]
    radii: Vec<u32>,
    /// Comma-separated box half-widths (family = boxes).
    #[arg(long, value_delimiter = ',')]
    half_widths: Vec<u32>,
    #[arg(long, default_value_t = coarsehom::space::DEFAULT_VERTEX_BUDGET)]
    vertex_budget: usize,
    /// CSV output path (columns: region_id, vol_R, vol_dR, ratio).
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum ProfileFamily {
    Balls,
    Boxes,
}

#[derive(Args, Serialize)]
struct CrossCheckArgs {
    #[arg(long)]
    space: String,
    #[arg(long, default_value_t = 1)]
    r: u32,
    #[arg(long, value_delimiter = ',')]
    sizes: Vec<u32>,
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    #[arg(long, default_value_t = 10_000)]
    budget: usize,
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct MeshArgs {
    /// Manifold: circle, torus, or interval.
    #[arg(long, value_enum)]
    mesh: Manifold,
    /// Torus dimension (1 to 3).
    #[arg(long, default_value_t = 2)]
    dims: usize,
    /// Side length (circle circumference, torus side, interval length).
    #[arg(long, default_value_t = std::f64::consts::TAU)]
    side: f64,
    /// Subdivisions per dimension.
    #[arg(long)]
    subdiv: u32,
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Manifold {
    Circle,
    Torus,
    Interval,
}

#[derive(Args, Serialize)]
struct WeylArgs {
    /// Mesh family: circle or torus.
    #[arg(long, value_enum)]
    family: Manifold,
    /// Comma-separated subdivision counts, one mesh each.
    #[arg(long, value_delimiter = ',')]
    sizes: Vec<u32>,
    /// scale: volumes grow with the subdivisions at fixed spacing;
    /// refine: fixed volume, finer spacing. Defaults per family.
    #[arg(long, value_enum)]
    mode: Option<WeylMode>,
    /// Base side length of the smallest mesh.
    #[arg(long, default_value_t = std::f64::consts::TAU)]
    side: f64,
    /// Comma-separated lambda grid; a family default is used when empty.
    #[arg(long, value_delimiter = ',')]
    lambda_grid: Vec<f64>,
    /// CSV output (columns: lambda, N_lambda, vol, n, bound_rhs).
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum WeylMode {
    Scale,
    Refine,
}

#[derive(Args, Serialize)]
struct CoverArgs {
    #[command(flatten)]
    mesh: MeshArgs,
    /// Comma-separated covering scales.
    #[arg(long, value_delimiter = ',')]
    epsilons: Vec<f64>,
}

#[derive(Args, Serialize)]
struct CheckAllArgs {
    /// quick trims sizes; full runs the documented ones.
    #[arg(long, value_enum, default_value_t = Profile::Quick)]
    profile: Profile,
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Profile {
    Quick,
    Full,
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("COARSEHOM_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            let exit = classify(&e);
            let payload = serde_json::json!({
                "error": e.to_string(),
                "exit": exit,
            });
            eprintln!("{payload}");
            ExitCode::from(exit)
        }
    }
}

fn classify(e: &LibError) -> u8 {
    match e {
        LibError::InvalidSpec(_)
        | LibError::InvalidParameter(_)
        | LibError::Disconnected
        | LibError::BudgetExceeded { .. }
        | LibError::UnknownVertex(_)
        | LibError::EmptyRegion
        | LibError::RegionCoversWindow
        | LibError::WindowMismatch { .. }
        | LibError::SpanExceeded { .. }
        | LibError::SupportOutsideInterior { .. } => EXIT_CONFIG,
        _ => EXIT_NUMERICAL,
    }
}

fn run(cli: Cli) -> Result<ExitCode, LibError> {
    let seed = cli.seed;
    match cli.command {
        Command::Decide(args) => {
            let verdict = run_decide(&args)?;
            emit_report("decide", seed, &args, &verdict, args.out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Tails(args) => {
            let payload = run_certificate(&args, CertificateKind::Tails)?;
            emit_report("tails", seed, &args, &payload, args.out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Cut(args) => {
            let payload = run_certificate(&args, CertificateKind::Cut)?;
            emit_report("cut", seed, &args, &payload, args.out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Psc(args) => {
            let verdict = run_decide(&args.decide)?;
            let psc = psc_verdict(&verdict, args.ahat)?;
            let payload = serde_json::json!({
                "decision": verdict,
                "ahat": args.ahat,
                "psc": psc,
            });
            emit_report("psc", seed, &args, &payload, args.decide.out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Foelner(args) => {
            let spec = parse_space(&args.space)?;
            let opts = BuildOptions {
                vertex_budget: args.vertex_budget,
            };
            let report = foelner_search_with(&spec, args.r, args.epsilon, args.budget, &opts)?;
            emit_report("foelner", seed, &args, &report, args.out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Profile(args) => {
            let spec = parse_space(&args.space)?;
            let family = match args.family {
                ProfileFamily::Balls => RegionFamily::Balls {
                    radii: args.radii.clone(),
                },
                ProfileFamily::Boxes => RegionFamily::Boxes {
                    half_widths: args.half_widths.clone(),
                },
            };
            let opts = BuildOptions {
                vertex_budget: args.vertex_budget,
            };
            let profile = isoperimetric_profile_with(&spec, args.r, &family, &opts)?;
            let mut csv = String::from("region_id,vol_R,vol_dR,ratio\n");
            for sample in &profile.samples {
                match sample {
                    ProfileSample::Ok(d) => {
                        let _ = writeln!(
                            csv,
                            "{},{},{},{}",
                            d.descriptor, d.vol_region, d.vol_boundary, d.ratio
                        );
                    }
                    ProfileSample::Error {
                        descriptor,
                        message,
                    } => {
                        let _ = writeln!(csv, "{descriptor},error,error,{message:?}");
                    }
                }
            }
            emit_text(&csv, args.out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::CrossCheck(args) => {
            let spec = parse_space(&args.space)?;
            let cfg = CrossCheckConfig {
                epsilon: args.epsilon,
                budget: args.budget,
                decide: DecideConfig::default(),
            };
            let report = cross_check_equivalence(&spec, args.r, &args.sizes, &cfg)?;
            emit_report("cross-check", seed, &args, &report, args.out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Spectrum(args) => {
            let mesh = parse_mesh(&args)?;
            let report = laplacian_spectrum_with(&mesh, &SpectralOptions::default())?;
            emit_report("spectrum", seed, &args, &report, args.out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Weyl(args) => {
            let (meshes, grid) = weyl_family(&args)?;
            let report = weyl_check_with(&meshes, &grid, &WeylOptions::default())?;
            let csv = weyl_csv(&report);
            emit_text(&csv, args.out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Cover(args) => {
            let mesh = parse_mesh(&args.mesh)?;
            if args.epsilons.is_empty() {
                return Err(LibError::InvalidParameter(
                    "cover needs at least one epsilon".into(),
                ));
            }
            let report = verify_eigen_covering_bound(&mesh, &args.epsilons)?;
            emit_report("cover", seed, &args, &report, args.mesh.out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::CheckAll(args) => {
            let scale = match args.profile {
                Profile::Quick => Scale::Quick,
                Profile::Full => Scale::Full,
            };
            let suite = check_all(scale);
            for result in &suite.results {
                eprintln!("{}", result.summary());
                for line in &result.details {
                    eprintln!("    {line}");
                }
            }
            emit_report("check-all", seed, &args, &suite, args.out.as_deref())?;
            if suite.all_passed {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(EXIT_ACCEPTANCE))
            }
        }
    }
}

enum CertificateKind {
    Tails,
    Cut,
}

#[derive(Serialize)]
struct CertificatePayload {
    window: Window,
    demand: Chain0,
    reach: u32,
    capacity: f64,
    c_star: f64,
    certificate: Certificate,
}

fn run_decide(args: &DecideArgs) -> Result<Verdict, LibError> {
    let spec = parse_space(&args.space)?;
    let family: DemandFamily = args.demand.parse()?;
    let cfg = DecideConfig {
        vertex_budget: args.budget,
        ..Default::default()
    };
    decide(&spec, &family, args.reach, &args.sizes, &cfg)
}

fn run_certificate(
    args: &CertificateArgs,
    kind: CertificateKind,
) -> Result<CertificatePayload, LibError> {
    let spec = parse_space(&args.space)?;
    let family: DemandFamily = args.demand.parse()?;
    let opts = BuildOptions {
        vertex_budget: args.budget,
    };
    let window = build_window_with(&spec, args.size, &opts)?;
    let demand = family.generate(&window)?;
    let problem = FlowProblem::new(&window, demand.clone(), args.reach)?;
    let c_star = problem.min_capacity()?.c_star;
    let capacity = args.capacity.unwrap_or(match kind {
        CertificateKind::Tails => 1.1 * c_star,
        CertificateKind::Cut => 0.9 * c_star,
    });
    let certificate = problem.solve_feasibility(capacity)?;
    Ok(CertificatePayload {
        window,
        demand,
        reach: args.reach,
        capacity,
        c_star,
        certificate,
    })
}

/// A space is either a JSON file or the inline shorthand `lattice:N` /
/// `tree:K`.
fn parse_space(input: &str) -> Result<SpaceSpec, LibError> {
    if Path::new(input).exists() {
        let text = std::fs::read_to_string(input)
            .map_err(|e| LibError::InvalidSpec(format!("cannot read {input}: {e}")))?;
        let spec: SpaceSpec = serde_json::from_str(&text)
            .map_err(|e| LibError::InvalidSpec(format!("{input}: {e}")))?;
        spec.validate()?;
        return Ok(spec);
    }
    let spec = match input.split_once(':') {
        Some(("lattice", n)) => SpaceSpec::lattice(n.parse().map_err(|_| bad_space(input))?),
        Some(("tree", k)) => SpaceSpec::tree(k.parse().map_err(|_| bad_space(input))?),
        _ => return Err(bad_space(input)),
    };
    spec.validate()?;
    Ok(spec)
}

fn bad_space(input: &str) -> LibError {
    LibError::InvalidSpec(format!(
        "space {input:?} is neither a readable JSON file nor inline lattice:N / tree:K"
    ))
}

fn parse_mesh(args: &MeshArgs) -> Result<MeshSpec, LibError> {
    let mesh = match args.mesh {
        Manifold::Circle => MeshSpec::Circle {
            length: args.side,
            subdivisions: args.subdiv,
        },
        Manifold::Interval => MeshSpec::Interval {
            length: args.side,
            subdivisions: args.subdiv,
        },
        Manifold::Torus => MeshSpec::Torus {
            sides: vec![args.side; args.dims],
            subdivisions: vec![args.subdiv; args.dims],
        },
    };
    mesh.validate()?;
    Ok(mesh)
}

fn weyl_family(args: &WeylArgs) -> Result<(Vec<MeshSpec>, Vec<f64>), LibError> {
    if args.sizes.len() < 3 {
        return Err(LibError::InvalidParameter(
            "weyl needs at least three sizes".into(),
        ));
    }
    let mode = args.mode.unwrap_or(match args.family {
        Manifold::Circle => WeylMode::Scale,
        _ => WeylMode::Refine,
    });
    let base = args.sizes[0] as f64;
    let meshes: Vec<MeshSpec> = args
        .sizes
        .iter()
        .map(|&s| {
            let length = match mode {
                // constant spacing: the volume grows with the subdivisions
                WeylMode::Scale => args.side * s as f64 / base,
                WeylMode::Refine => args.side,
            };
            match args.family {
                Manifold::Circle => MeshSpec::Circle {
                    length,
                    subdivisions: s,
                },
                Manifold::Interval => MeshSpec::Interval {
                    length,
                    subdivisions: s,
                },
                Manifold::Torus => MeshSpec::Torus {
                    sides: vec![length; 2],
                    subdivisions: vec![s; 2],
                },
            }
        })
        .collect();
    for m in &meshes {
        m.validate()?;
    }
    let grid = if args.lambda_grid.is_empty() {
        match args.family {
            Manifold::Circle => (4..=16).map(|k| (k * k) as f64).collect(),
            _ => (0..8)
                .map(|i| 4.0 * (25.0f64 / 4.0).powf(i as f64 / 7.0))
                .collect(),
        }
    } else {
        args.lambda_grid.clone()
    };
    Ok((meshes, grid))
}

fn weyl_csv(report: &WeylReport) -> String {
    let mut csv = String::from("lambda,N_lambda,vol,n,bound_rhs\n");
    for mesh in &report.per_mesh {
        for (&lambda, &count) in report.lambda_grid.iter().zip(&mesh.counts) {
            let _ = writeln!(
                csv,
                "{lambda},{count},{},{},{}",
                mesh.vol,
                report.dim,
                report.bound_rhs(mesh.vol, lambda)
            );
        }
    }
    csv
}

fn emit_report<C: Serialize, P: Serialize>(
    command: &str,
    seed: u64,
    config: &C,
    payload: &P,
    out: Option<&Path>,
) -> Result<(), LibError> {
    let report = Report::new(command, seed, config, payload)?;
    let bytes = report.to_bytes()?;
    emit_bytes(&bytes, out)
}

fn emit_text(text: &str, out: Option<&Path>) -> Result<(), LibError> {
    emit_bytes(text.as_bytes(), out)
}

fn emit_bytes(bytes: &[u8], out: Option<&Path>) -> Result<(), LibError> {
    match out {
        Some(path) => std::fs::write(path, bytes)
            .map_err(|e| LibError::InvalidSpec(format!("cannot write {}: {e}", path.display()))),
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(bytes)
                .map_err(|e| LibError::InvalidSpec(format!("cannot write stdout: {e}")))
        }
    }
}
