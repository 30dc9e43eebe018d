//! `hamlab`: reproducible stability experiments over the system catalog.
//!
//! Every command reads a fully explicit run specification from its flags,
//! computes through the library, and emits CSV or JSON. Identical invocations
//! (including the seed) produce byte-identical output. Exit status: 0 on
//! success, 2 on a usage error, 3 on a numerical failure (the failure is then
//! serialized as a JSON body on standard output).

mod output;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use hamlab::analysis::{analyze, AnalysisOptions};
use hamlab::integrate::{integrate, IntegrationConfig, Termination};
use hamlab::isochrony::{isochrony_report, DEFAULT_SPREAD_TOL};
use hamlab::probe::{
    certify_no_asymptotic, default_cascade, instability_probe, ClosedFormMotion, ProbeConfig,
    Witness, DEFAULT_ESCAPE_RADIUS, DEFAULT_T_MAX,
};
use hamlab::{GFunction, HamiltonianSystem, PhaseState, SystemParams};

use output::{emit, pretty_json, Failure};

#[derive(Parser)]
#[command(
    name = "hamlab",
    version,
    about = "Stability laboratory for Hamiltonian equilibria",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the system catalog.
    Catalog(CatalogArgs),
    /// Full analysis: spectrum, escape probe, certificates, composite verdict.
    Analyze(AnalyzeArgs),
    /// Integrate one trajectory and emit it.
    Integrate(IntegrateArgs),
    /// Run the shrinking-offset escape probe.
    Probe(ProbeArgs),
    /// Evaluate the conserved-quantity cascade certificate.
    Certify(CertifyArgs),
    /// Measure oscillation periods across an amplitude ladder.
    PeriodScan(PeriodScanArgs),
    /// Render a figure as SVG with a CSV data sidecar.
    Plot(PlotArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutFmt {
    Json,
    Csv,
}

/// System selection shared by most commands.
#[derive(Args)]
struct SystemArgs {
    /// Catalog name: free_particle | l4_linear | cherry | variation_like.
    system: String,
    /// Coupling strength for cherry, or shorthand for g(x) = x + sigma x^2
    /// on variation_like. Default 1.
    #[arg(long, allow_negative_numbers = true)]
    sigma: Option<f64>,
    /// Coefficients c1,c2,... of g(x) = c1 x + c2 x^2 + ... (variation_like
    /// only); entries may be rationals such as 10/9.
    #[arg(long, value_name = "C1,C2,...")]
    g_coeffs: Option<String>,
}

impl SystemArgs {
    fn build(&self) -> Result<HamiltonianSystem, Failure> {
        let takes_params = matches!(self.system.as_str(), "cherry" | "variation_like");
        if !takes_params && (self.sigma.is_some() || self.g_coeffs.is_some()) {
            return Err(Failure::Usage(format!(
                "{} takes neither --sigma nor --g-coeffs",
                self.system
            )));
        }
        if self.system == "cherry" && self.g_coeffs.is_some() {
            return Err(Failure::Usage("cherry takes --sigma, not --g-coeffs".into()));
        }
        if self.sigma.is_some() && self.g_coeffs.is_some() {
            return Err(Failure::Usage(
                "--sigma and --g-coeffs are mutually exclusive".into(),
            ));
        }
        let params = SystemParams {
            sigma: self.sigma.unwrap_or(1.0),
            g: match &self.g_coeffs {
                Some(spec) => Some(GFunction::parse(spec)?),
                None => None,
            },
        };
        Ok(HamiltonianSystem::from_catalog(&self.system, &params)?)
    }
}

#[derive(Args)]
struct CatalogArgs {
    #[arg(long, value_enum, default_value = "json")]
    format: OutFmt,
    /// Write to this file instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    system: SystemArgs,
    /// Seed for certificate sampling and the transform check.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct IntegrateArgs {
    #[command(flatten)]
    system: SystemArgs,
    /// Initial state q1,..,qn,p1,..,pn; defaults to the system's standard
    /// probe state at offset 0.1.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    state: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    t0: f64,
    #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
    t1: f64,
    #[arg(long, default_value_t = 1e-3)]
    step: f64,
    /// Stop once the state norm reaches this radius.
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long, value_enum, default_value = "csv")]
    format: OutFmt,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ProbeArgs {
    #[command(flatten)]
    system: SystemArgs,
    /// Strictly decreasing initial offsets along the witness direction.
    #[arg(long, value_delimiter = ',', default_value = "0.5,0.2,0.1,0.01")]
    epsilons: Vec<f64>,
    /// Escape radius of the probe ball.
    #[arg(long, default_value_t = DEFAULT_ESCAPE_RADIUS)]
    radius: f64,
    #[arg(long, default_value_t = DEFAULT_T_MAX)]
    tmax: f64,
    #[arg(long, default_value_t = 1e-3)]
    step: f64,
    #[arg(long, value_enum, default_value = "json")]
    format: OutFmt,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CertifyArgs {
    #[command(flatten)]
    system: SystemArgs,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Random states drawn per cascade stage.
    #[arg(long, default_value_t = 200)]
    samples: usize,
    /// Conservation threshold for the directional derivative.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, value_enum, default_value = "json")]
    format: OutFmt,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PeriodScanArgs {
    /// Coefficients c1,c2,... of the restoring force g; rationals allowed.
    #[arg(long, value_name = "C1,C2,...", default_value = "1,1")]
    g_coeffs: String,
    /// Oscillation amplitudes, strictly increasing.
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.2,0.3")]
    amplitudes: Vec<f64>,
    #[arg(long, default_value_t = 1e-3)]
    step: f64,
    /// Period spread below which the scan counts as isochronous.
    #[arg(long, default_value_t = DEFAULT_SPREAD_TOL)]
    spread_tol: f64,
    #[arg(long, value_enum, default_value = "csv")]
    format: OutFmt,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum PlotKind {
    /// Closed-form orbit falling into the cherry equilibrium as t -> -inf.
    CherryAsymptotic,
    /// Unbounded orbit of the variation-like system from the probe witness.
    VariationUnbounded,
}

#[derive(Args)]
struct PlotArgs {
    #[arg(value_enum)]
    kind: PlotKind,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    sigma: f64,
    /// Start time (cherry-asymptotic; must satisfy t0 < t1 < 0).
    #[arg(long, allow_negative_numbers = true)]
    t0: Option<f64>,
    /// End time (cherry-asymptotic).
    #[arg(long, allow_negative_numbers = true)]
    t1: Option<f64>,
    /// Integration span (variation-unbounded).
    #[arg(long)]
    tmax: Option<f64>,
    #[arg(long, default_value_t = 1e-3)]
    step: f64,
    /// Coordinate pair to project onto, from q1,q2,p1,p2.
    #[arg(long, value_name = "CX,CY", default_value = "q1,q2")]
    coords: String,
    /// Output SVG path; the data sidecar replaces its extension with .csv.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            #[derive(Serialize)]
            struct Body<'a> {
                status: &'a str,
                error: &'a str,
            }
            print!(
                "{}",
                pretty_json(&Body {
                    status: "numerical_failure",
                    error: &msg,
                })
            );
            ExitCode::from(3)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("io error: {msg}");
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Catalog(args) => cmd_catalog(args),
        Command::Analyze(args) => cmd_analyze(args),
        Command::Integrate(args) => cmd_integrate(args),
        Command::Probe(args) => cmd_probe(args),
        Command::Certify(args) => cmd_certify(args),
        Command::PeriodScan(args) => cmd_period_scan(args),
        Command::Plot(args) => cmd_plot(args),
    }
}

fn cmd_catalog(args: CatalogArgs) -> Result<(), Failure> {
    #[derive(Serialize)]
    struct Row {
        name: &'static str,
        dof: usize,
        params: Vec<&'static str>,
        summary: &'static str,
    }
    let rows = vec![
        Row {
            name: "free_particle",
            dof: 1,
            params: vec![],
            summary: "uniform drift; unstable with no past-asymptotic motion",
        },
        Row {
            name: "l4_linear",
            dof: 2,
            params: vec![],
            summary: "resonant linear system with secular growth inside a conserved shell",
        },
        Row {
            name: "cherry",
            dof: 2,
            params: vec!["sigma"],
            summary: "1:2 resonant oscillators; cubic coupling creates an orbit falling in from the past",
        },
        Row {
            name: "variation_like",
            dof: 2,
            params: vec!["sigma", "g-coeffs"],
            summary: "indefinite quadratic plus separating well; escape without asymptotic motion",
        },
    ];
    let body = match args.format {
        OutFmt::Json => pretty_json(&rows),
        OutFmt::Csv => {
            let mut s = String::from("name,dof,params\n");
            for r in &rows {
                s.push_str(&format!("{},{},{}\n", r.name, r.dof, r.params.join(" ")));
            }
            s
        }
    };
    emit(&args.out, &body)
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<(), Failure> {
    let sys = args.system.build()?;
    let opts = AnalysisOptions {
        seed: args.seed,
        ..AnalysisOptions::default()
    };
    let report = analyze(&sys, &opts)?;
    emit(&args.out, &pretty_json(&report))
}

fn cmd_integrate(args: IntegrateArgs) -> Result<(), Failure> {
    let sys = args.system.build()?;
    if !(args.step > 0.0) {
        return Err(Failure::Usage(format!("step must be positive, got {}", args.step)));
    }
    if !(args.t1 > args.t0) {
        return Err(Failure::Usage(format!(
            "need t0 < t1, got [{}, {}]",
            args.t0, args.t1
        )));
    }
    let state = match args.state {
        Some(coords) => {
            if coords.len() != sys.dim() {
                return Err(Failure::Usage(format!(
                    "--state needs {} components for {}, got {}",
                    sys.dim(),
                    sys.name(),
                    coords.len()
                )));
            }
            PhaseState { coords }
        }
        None => Witness::for_system(&sys).initial_state(0.1),
    };
    let mut cfg = IntegrationConfig::new(args.t0, args.t1, args.step);
    if let Some(radius) = args.radius {
        cfg = cfg.with_escape_radius(radius);
    }
    let traj = integrate(&sys, &state, &cfg)?;
    if traj.termination == Termination::CorrectorFailure {
        return Err(Failure::Numerical(format!(
            "implicit corrector failed near t = {:.6} (state norm {:.3e}); \
             the orbit is leaving floating-point range",
            traj.final_time(),
            hamlab::phase::norm(&traj.final_state().coords),
        )));
    }
    let body = match args.format {
        OutFmt::Json => pretty_json(&traj),
        OutFmt::Csv => output::trajectory_csv(&traj),
    };
    emit(&args.out, &body)
}

fn cmd_probe(args: ProbeArgs) -> Result<(), Failure> {
    let sys = args.system.build()?;
    let witness = Witness::for_system(&sys);
    let cfg = ProbeConfig {
        epsilons: args.epsilons,
        escape_radius: args.radius,
        t_max: args.tmax,
        step: args.step,
    };
    let report = instability_probe(&sys, &witness, &cfg)?;
    let body = match args.format {
        OutFmt::Json => pretty_json(&report),
        OutFmt::Csv => output::probe_csv(&report),
    };
    emit(&args.out, &body)
}

fn cmd_certify(args: CertifyArgs) -> Result<(), Failure> {
    let sys = args.system.build()?;
    let stages = default_cascade(&sys).ok_or_else(|| {
        Failure::Usage(format!("no default certificate cascade for {}", sys.name()))
    })?;
    let cert = certify_no_asymptotic(&sys, &stages, args.samples, args.tol, args.seed)?;
    let body = match args.format {
        OutFmt::Json => pretty_json(&cert),
        OutFmt::Csv => output::certificate_csv(&cert),
    };
    emit(&args.out, &body)
}

fn cmd_period_scan(args: PeriodScanArgs) -> Result<(), Failure> {
    let g = GFunction::parse(&args.g_coeffs)?;
    let report = isochrony_report(&g, &args.amplitudes, args.step, args.spread_tol)?;
    let body = match args.format {
        OutFmt::Json => pretty_json(&report),
        OutFmt::Csv => output::period_csv(&report.table),
    };
    emit(&args.out, &body)
}

fn cmd_plot(args: PlotArgs) -> Result<(), Failure> {
    let (cx, cy) = parse_coords(&args.coords)?;
    let out = args.out.clone().unwrap_or_else(|| match args.kind {
        PlotKind::CherryAsymptotic => PathBuf::from("cherry-asymptotic.svg"),
        PlotKind::VariationUnbounded => PathBuf::from("variation-unbounded.svg"),
    });
    if out.extension().is_some_and(|e| e == "csv") {
        return Err(Failure::Usage(
            "plot output must not end in .csv; that path is reserved for the data sidecar".into(),
        ));
    }
    let sidecar = out.with_extension("csv");

    let (title, rows) = match args.kind {
        PlotKind::CherryAsymptotic => {
            let t0 = args.t0.unwrap_or(-60.0);
            let t1 = args.t1.unwrap_or(-1.0);
            if args.tmax.is_some() {
                return Err(Failure::Usage(
                    "cherry-asymptotic takes --t0/--t1, not --tmax".into(),
                ));
            }
            if !(t0 < t1) {
                return Err(Failure::Usage(format!(
                    "need a span of positive length, got [{t0}, {t1}]"
                )));
            }
            if !(t1 < 0.0) {
                return Err(Failure::Usage(format!(
                    "the asymptotic orbit lives at t < 0; got t1 = {t1}"
                )));
            }
            if args.sigma == 0.0 {
                return Err(Failure::Usage(
                    "cherry-asymptotic needs sigma != 0 (the coupled orbit vanishes otherwise)"
                        .into(),
                ));
            }
            let motion = ClosedFormMotion::PastAsymptoticOrbit { sigma: args.sigma };
            let points = 2000;
            let rows: Vec<[f64; 3]> = (0..points)
                .map(|i| {
                    let t = t0 + (t1 - t0) * i as f64 / (points - 1) as f64;
                    let x = motion.state(t);
                    [t, x.coords[cx], x.coords[cy]]
                })
                .collect();
            (format!("Asymptotic orbit, sigma = {}", args.sigma), rows)
        }
        PlotKind::VariationUnbounded => {
            let tmax = args.tmax.unwrap_or(200.0);
            if args.t0.is_some() || args.t1.is_some() {
                return Err(Failure::Usage(
                    "variation-unbounded takes --tmax, not --t0/--t1".into(),
                ));
            }
            if !(tmax > 0.0) {
                return Err(Failure::Usage(format!(
                    "need a span of positive length, got tmax = {tmax}"
                )));
            }
            if !(args.step > 0.0) {
                return Err(Failure::Usage(format!(
                    "step must be positive, got {}",
                    args.step
                )));
            }
            let g = GFunction::with_quadratic(args.sigma)?;
            let sys = HamiltonianSystem::variation_like(g);
            let state = Witness::for_system(&sys).initial_state(0.01);
            let steps = (tmax / args.step).ceil() as usize;
            let cfg = IntegrationConfig::new(0.0, tmax, args.step)
                .with_store_every((steps / 2000).max(1));
            let traj = integrate(&sys, &state, &cfg)?;
            if traj.termination == Termination::CorrectorFailure {
                return Err(Failure::Numerical(format!(
                    "implicit corrector failed near t = {:.6}",
                    traj.final_time()
                )));
            }
            let rows: Vec<[f64; 3]> = traj
                .times
                .iter()
                .zip(&traj.states)
                .map(|(t, x)| [*t, x.coords[cx], x.coords[cy]])
                .collect();
            (format!("Unbounded orbit, sigma = {}", args.sigma), rows)
        }
    };

    let (cx_name, cy_name) = coord_names(&args.coords);
    let mut csv = format!("t,{cx_name},{cy_name}\n");
    for [t, x, y] in &rows {
        csv.push_str(&format!("{t:.16e},{x:.16e},{y:.16e}\n"));
    }
    let fig = plot::Figure {
        title,
        x_label: cx_name.to_string(),
        y_label: cy_name.to_string(),
        points: rows.iter().map(|[_, x, y]| (*x, *y)).collect(),
    };
    let svg = plot::render_svg(&fig);
    std::fs::write(&sidecar, csv).map_err(|e| Failure::Io(format!("{}: {e}", sidecar.display())))?;
    std::fs::write(&out, svg).map_err(|e| Failure::Io(format!("{}: {e}", out.display())))?;

    #[derive(Serialize)]
    struct Done {
        status: &'static str,
        svg: String,
        csv: String,
        points: usize,
    }
    print!(
        "{}",
        pretty_json(&Done {
            status: "ok",
            svg: out.display().to_string(),
            csv: sidecar.display().to_string(),
            points: rows.len(),
        })
    );
    Ok(())
}

/// Maps a `CX,CY` spec onto indices into the 4-dimensional flat state.
fn parse_coords(spec: &str) -> Result<(usize, usize), Failure> {
    let index = |name: &str| match name {
        "q1" => Ok(0),
        "q2" => Ok(1),
        "p1" => Ok(2),
        "p2" => Ok(3),
        other => Err(Failure::Usage(format!(
            "unknown coordinate {other:?}; choose from q1,q2,p1,p2"
        ))),
    };
    let mut parts = spec.split(',');
    let (a, b) = match (parts.next(), parts.next(), parts.next()) {
        (Some(a), Some(b), None) => (a, b),
        _ => {
            return Err(Failure::Usage(format!(
                "--coords wants exactly two entries, got {spec:?}"
            )))
        }
    };
    let (i, j) = (index(a.trim())?, index(b.trim())?);
    if i == j {
        return Err(Failure::Usage("--coords entries must differ".into()));
    }
    Ok((i, j))
}

fn coord_names(spec: &str) -> (&str, &str) {
    let mut parts = spec.split(',');
    (
        parts.next().unwrap_or("x").trim(),
        parts.next().unwrap_or("y").trim(),
    )
}
