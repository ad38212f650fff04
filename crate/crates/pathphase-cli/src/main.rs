//! `pathphase`: command-line interface to the two-path interferometer
//! toolkit: phase decompositions, Bloch-sphere solid angles, phase sweeps,
//! synthetic interferograms and the fringe/visibility fits.
//!
//! Exit codes: 0 success, 2 usage error, 3 domain/physics error, 4 parse
//! error (1 for I/O failures). Machine output goes to stdout, messages to
//! stderr.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pathphase::io::{
    decomposition_json, emit_results, parse_angle, parse_circuit, parse_sweep,
    parse_two_column_csv, sig9, OutputFormat, ParseError, ResultSet, SweepConfig,
    FRINGES_CSV_HEADER, POINTS_CSV_HEADER,
};
use pathphase::{
    build_evolution_path, compensated_shifts, fit_fringe, fit_visibility_c, phase_decomposition,
    phase_sweep, signed_solid_angle, synthesize_interferogram, unwrap_phases, Error, Interferogram,
    NoiseModel,
};

const EXIT_IO: u8 = 1;
const EXIT_DOMAIN: u8 = 3;
const EXIT_PARSE: u8 = 4;

/// Angles accept a `pi` suffix: `2pi`, `-0.2pi`, `pi`.
fn angle(s: &str) -> Result<f64, String> {
    parse_angle(s)
}

#[derive(Parser)]
#[command(
    name = "pathphase",
    about = "Two-path interferometer phases, Bloch-sphere solid angles and fringe analysis",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decompose the relative phase into Pancharatnam, dynamical and geometric parts (JSON).
    Phase(PhaseArgs),
    /// Phase sweep over dchi; CSV per the sweep schema.
    Sweep(SweepArgs),
    /// Solid angle of the Bloch-sphere evolution path and -Omega/2 (JSON).
    SolidAngle(SolidAngleArgs),
    /// Synthesize an interferogram (CSV eta,counts).
    Fringes(FringesArgs),
    /// Fit A + B cos(eta - phi) to an eta,counts CSV (JSON).
    FitFringe(FitFringeArgs),
    /// Fit the visibility coefficient C to a dchi,phase CSV (JSON).
    FitVisibility(FitVisibilityArgs),
    /// Run a circuit file: phase decomposition plus an optional interferogram.
    Run(RunArgs),
}

#[derive(Args)]
struct PhaseArgs {
    /// Absorber transmissivity T in [0, 1].
    #[arg(long, value_parser = angle)]
    t: f64,
    /// Total phase difference dchi; requires --compensated.
    #[arg(long, value_parser = angle, conflicts_with_all = ["chi1", "chi2"])]
    dchi: Option<f64>,
    /// Derive chi1, chi2 from --dchi with the dynamical phase compensated.
    #[arg(long, requires = "dchi")]
    compensated: bool,
    /// Explicit shift on the |p_perp> path.
    #[arg(long, value_parser = angle, requires = "chi2")]
    chi1: Option<f64>,
    /// Explicit shift on the |p> path.
    #[arg(long, value_parser = angle, requires = "chi1")]
    chi2: Option<f64>,
}

#[derive(Args)]
struct SweepArgs {
    /// Sweep configuration file (key=value lines).
    #[arg(long, conflicts_with_all = ["dchi_from", "dchi_to", "steps", "t1", "t2", "s1", "c"])]
    config: Option<PathBuf>,
    #[arg(long, value_parser = angle)]
    dchi_from: Option<f64>,
    #[arg(long, value_parser = angle)]
    dchi_to: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long, value_parser = angle)]
    t1: Option<f64>,
    #[arg(long, value_parser = angle)]
    t2: Option<f64>,
    #[arg(long, value_parser = angle)]
    s1: Option<f64>,
    #[arg(long, value_parser = angle)]
    c: Option<f64>,
    /// Write CSV here instead of stdout (overrides the config's output).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SolidAngleArgs {
    #[arg(long, value_parser = angle)]
    t: f64,
    #[arg(long, value_parser = angle)]
    dchi: f64,
    /// Chords per arc in the discretization.
    #[arg(long, default_value_t = 1024)]
    segments: usize,
    /// Dump the discretized path as CSV (segment_index,kind,x,y,z).
    #[arg(long)]
    dump_path: Option<PathBuf>,
}

#[derive(Args)]
struct FringesArgs {
    #[arg(long, value_parser = angle, default_value = "1")]
    t1: f64,
    #[arg(long, value_parser = angle, default_value = "0.12")]
    t2: f64,
    #[arg(long, value_parser = angle, default_value = "0.108695652173913")]
    s1: f64,
    #[arg(long, value_parser = angle, default_value = "0.57")]
    c: f64,
    #[arg(long, value_parser = angle)]
    dchi: f64,
    #[arg(long, default_value_t = 1000.0)]
    mean_counts: f64,
    #[arg(long, default_value_t = 32)]
    points: usize,
    /// Noise model: none or poisson.
    #[arg(long, default_value = "none")]
    noise: String,
    /// RNG seed; defaults to $PATHPHASE_SEED, then 0.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct FitFringeArgs {
    /// Input CSV (eta,counts); stdin when omitted.
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(Args)]
struct FitVisibilityArgs {
    /// Input CSV (dchi,phase); stdin when omitted.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, value_parser = angle, default_value = "1")]
    t1: f64,
    #[arg(long, value_parser = angle, default_value = "0.12")]
    t2: f64,
    #[arg(long, value_parser = angle, default_value = "0.108695652173913")]
    s1: f64,
}

#[derive(Args)]
struct RunArgs {
    /// Circuit description file.
    #[arg(long)]
    circuit: PathBuf,
    /// Also emit an interferogram with this many eta settings.
    #[arg(long)]
    eta_steps: Option<usize>,
}

fn env_seed() -> u64 {
    std::env::var("PATHPHASE_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(0)
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("pathphase: {msg}");
    ExitCode::from(code)
}

fn domain_exit(e: &Error) -> u8 {
    match e {
        Error::Io { .. } => EXIT_IO,
        _ => EXIT_DOMAIN,
    }
}

fn read_input(path: Option<&PathBuf>) -> Result<String, (u8, String)> {
    match path {
        Some(p) => std::fs::read_to_string(p)
            .map_err(|e| (EXIT_IO, format!("cannot read {}: {e}", p.display()))),
        None => {
            use std::io::Read;
            let mut buf = String::new();
            std::io::stdin()
                .read_to_string(&mut buf)
                .map_err(|e| (EXIT_IO, format!("cannot read stdin: {e}")))?;
            Ok(buf)
        }
    }
}

fn parse_failure(e: &ParseError) -> ExitCode {
    fail(EXIT_PARSE, e)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Phase(args) => cmd_phase(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::SolidAngle(args) => cmd_solid_angle(args),
        Command::Fringes(args) => cmd_fringes(args),
        Command::FitFringe(args) => cmd_fit_fringe(args),
        Command::FitVisibility(args) => cmd_fit_visibility(args),
        Command::Run(args) => cmd_run(args),
    }
}

fn cmd_phase(args: PhaseArgs) -> ExitCode {
    let (chi1, chi2) = match (args.dchi, args.chi1, args.chi2) {
        (Some(dchi), None, None) => {
            if !args.compensated {
                return fail(2, "--dchi requires --compensated (or pass --chi1/--chi2)");
            }
            match compensated_shifts(args.t, dchi) {
                Ok(pair) => pair,
                Err(e) => return fail(domain_exit(&e), e),
            }
        }
        (None, Some(c1), Some(c2)) => (c1, c2),
        _ => return fail(2, "pass either --dchi with --compensated, or both --chi1 and --chi2"),
    };
    match phase_decomposition(args.t, chi1, chi2) {
        Ok(d) => {
            println!("{}", decomposition_json(&d));
            ExitCode::SUCCESS
        }
        Err(e) => fail(domain_exit(&e), e),
    }
}

fn cmd_sweep(args: SweepArgs) -> ExitCode {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = match std::fs::read_to_string(path) {
                Ok(t) => t,
                Err(e) => return fail(EXIT_IO, format!("cannot read {}: {e}", path.display())),
            };
            match parse_sweep(&text) {
                Ok(cfg) => cfg,
                Err(e) => return parse_failure(&e),
            }
        }
        None => SweepConfig::default(),
    };
    if let Some(v) = args.dchi_from {
        cfg.dchi_from = v;
    }
    if let Some(v) = args.dchi_to {
        cfg.dchi_to = v;
    }
    if let Some(v) = args.steps {
        if v < 2 {
            return fail(EXIT_PARSE, "steps must be at least 2");
        }
        cfg.steps = v;
    }
    if let Some(v) = args.t1 {
        cfg.t1 = v;
    }
    if let Some(v) = args.t2 {
        cfg.t2 = v;
    }
    if let Some(v) = args.s1 {
        cfg.s1 = v;
        cfg.s2 = 1.0 - v;
    }
    if let Some(v) = args.c {
        cfg.c = v;
    }
    if cfg.dchi_from >= cfg.dchi_to {
        return fail(EXIT_PARSE, "dchi_from must be less than dchi_to");
    }
    let rows = match phase_sweep(cfg.t1, cfg.t2, cfg.s1, cfg.s2, cfg.c, &cfg.grid()) {
        Ok(rows) => rows,
        Err(e) => return fail(domain_exit(&e), e),
    };
    let dest = args
        .output
        .clone()
        .or_else(|| (!cfg.output_path.is_empty()).then(|| PathBuf::from(&cfg.output_path)));
    match emit_results(&ResultSet::Sweep(rows), OutputFormat::Csv, dest.as_deref()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(domain_exit(&e), e),
    }
}

fn cmd_solid_angle(args: SolidAngleArgs) -> ExitCode {
    let path = match build_evolution_path(args.t, args.dchi, args.segments) {
        Ok(p) => p,
        Err(e) => return fail(domain_exit(&e), e),
    };
    if let Some(dump) = &args.dump_path {
        if let Err(e) = std::fs::write(dump, path.to_csv()) {
            return fail(EXIT_IO, format!("cannot write {}: {e}", dump.display()));
        }
    }
    match signed_solid_angle(&path) {
        Ok(omega) => {
            println!(
                "{{\"omega\":{},\"phase_from_area\":{}}}",
                sig9(omega),
                sig9(-0.5 * omega)
            );
            ExitCode::SUCCESS
        }
        Err(e) => fail(domain_exit(&e), e),
    }
}

fn cmd_fringes(args: FringesArgs) -> ExitCode {
    let noise = match args.noise.as_str() {
        "none" => NoiseModel::None,
        "poisson" => NoiseModel::Poisson,
        other => return fail(2, format!("unknown noise model `{other}` (use none|poisson)")),
    };
    let seed = args.seed.unwrap_or_else(env_seed);
    let ig = match synthesize_interferogram(
        args.t1,
        args.t2,
        args.s1,
        1.0 - args.s1,
        args.c,
        args.dchi,
        args.mean_counts,
        args.points,
        noise,
        seed,
    ) {
        Ok(ig) => ig,
        Err(e) => return fail(domain_exit(&e), e),
    };
    match emit_results(&ResultSet::Fringes(ig), OutputFormat::Csv, args.output.as_deref()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(domain_exit(&e), e),
    }
}

fn cmd_fit_fringe(args: FitFringeArgs) -> ExitCode {
    let text = match read_input(args.input.as_ref()) {
        Ok(t) => t,
        Err((code, msg)) => return fail(code, msg),
    };
    let rows = match parse_two_column_csv(&text, FRINGES_CSV_HEADER) {
        Ok(r) => r,
        Err(e) => return parse_failure(&e),
    };
    let (eta, counts): (Vec<f64>, Vec<f64>) = rows.into_iter().unzip();
    let ig = match Interferogram::new(eta, counts, None) {
        Ok(ig) => ig,
        Err(e) => return fail(domain_exit(&e), e),
    };
    match fit_fringe(&ig) {
        Ok(fit) => {
            println!(
                "{{\"offset\":{},\"amplitude\":{},\"phase\":{},\"phase_stderr\":{},\"converged\":{}}}",
                sig9(fit.offset),
                sig9(fit.amplitude),
                sig9(fit.phase),
                sig9(fit.phase_stderr),
                fit.converged
            );
            ExitCode::SUCCESS
        }
        Err(e) => fail(domain_exit(&e), e),
    }
}

fn cmd_fit_visibility(args: FitVisibilityArgs) -> ExitCode {
    let text = match read_input(args.input.as_ref()) {
        Ok(t) => t,
        Err((code, msg)) => return fail(code, msg),
    };
    let raw = match parse_two_column_csv(&text, POINTS_CSV_HEADER) {
        Ok(r) => r,
        Err(e) => return parse_failure(&e),
    };
    // Phases must share a continuous branch before the residuals mean anything.
    let phases: Vec<f64> = raw.iter().map(|&(_, p)| p).collect();
    let unwrapped = unwrap_phases(&phases);
    let points: Vec<(f64, f64)> = raw
        .iter()
        .zip(&unwrapped)
        .map(|(&(d, _), &p)| (d, p))
        .collect();
    match fit_visibility_c(&points, args.t1, args.t2, args.s1, 1.0 - args.s1) {
        Ok((c, stderr)) => {
            println!("{{\"c\":{},\"stderr\":{}}}", sig9(c), sig9(stderr));
            ExitCode::SUCCESS
        }
        Err(e) => fail(domain_exit(&e), e),
    }
}

fn cmd_run(args: RunArgs) -> ExitCode {
    let text = match std::fs::read_to_string(&args.circuit) {
        Ok(t) => t,
        Err(e) => return fail(EXIT_IO, format!("cannot read {}: {e}", args.circuit.display())),
    };
    let spec = match parse_circuit(&text) {
        Ok(s) => s,
        Err(e) => return parse_failure(&e),
    };
    let t = spec.transmissivity();
    let (chi1, chi2) = spec.shifts();
    let d = match phase_decomposition(t, chi1, chi2) {
        Ok(d) => d,
        Err(e) => return fail(domain_exit(&e), e),
    };
    println!("{}", decomposition_json(&d));
    if let Some(n) = args.eta_steps {
        if n < 5 {
            return fail(2, "--eta-steps must be at least 5");
        }
        // Expected intensity with both beams projected onto |q>:
        // reference amplitude 1/sqrt(2), evolved amplitude |z|/2.
        let z = d.amplitude; // |e^{i chi1} + sqrt(T) e^{i chi2}| / 2
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let offset = r * r + z * z;
        let amp = 2.0 * r * z;
        println!("{FRINGES_CSV_HEADER}");
        for j in 0..n {
            let eta = 4.0 * std::f64::consts::PI * j as f64 / n as f64;
            let counts = offset + amp * (eta + spec.reference_eta - d.pancharatnam).cos();
            println!("{},{}", sig9(eta), sig9(counts));
        }
    }
    ExitCode::SUCCESS
}
