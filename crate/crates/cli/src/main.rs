mod csvio;
mod plot;
mod specs;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use cohdist::complementarity::{check_measurement_channel, check_single, ClosedFormReport};
use cohdist::measures::{coherence_l1, coherence_relative_entropy, von_neumann_entropy};
use cohdist::quantities::{coherent_information, disturbance, DiscordConfig, ErConfig};
use cohdist::{
    sweep, verify_closed_forms, Basis, BasisChoice, ChannelFamily, ErMode, Error, ParamGrid,
    Relation, SweepConfig,
};
use serde_json::json;

use crate::csvio::CsvError;
use crate::specs::SpecError;

const EXIT_IO: u8 = 1;
const EXIT_VIOLATION: u8 = 2;
const EXIT_CLOSED_FORM: u8 = 3;
const EXIT_USAGE: u8 = 64;
const EXIT_FORMAT: u8 = 65;

#[derive(Parser)]
#[command(
    name = "cohdist",
    version,
    about = "Coherence–disturbance complementarity numerics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte-Carlo sweep over states and a channel-parameter grid, written as CSV.
    Sweep(SweepArgs),
    /// Compare the Schmidt-family closed forms with the general definitions.
    VerifyClosedForms {
        /// Grid divisions per axis; λ₀ and the channel parameter take grid+1 values in [0, 1].
        #[arg(long, default_value_t = 20)]
        grid: usize,
    },
    /// Print entropies, coherence, coherent information and disturbance for one state and channel.
    Report {
        /// `schmidt:λ0` or a JSON file {"dim": d, "entries": [[re, im], ...]} (row-major).
        #[arg(long)]
        state: String,
        /// e.g. `weak:0.5`, `depolarizing:1`, `amplitude-damping:0.3`, `identity`, `projective`.
        #[arg(long)]
        channel: String,
        /// Coherence frame; defaults to plus-minus for Schmidt states, computational otherwise.
        #[arg(long)]
        basis: Option<ReportBasis>,
    },
    /// Render a sweep CSV as an SVG scatter with the bound line.
    Plot {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum ReportBasis {
    Computational,
    PlusMinus,
}

#[derive(clap::Args)]
struct SweepArgs {
    #[arg(long)]
    relation: Relation,
    #[arg(long)]
    channel: ChannelFamily,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.0)]
    param_start: f64,
    #[arg(long, default_value_t = 1.0)]
    param_stop: f64,
    /// Number of grid points, endpoints included.
    #[arg(long, default_value_t = 11)]
    steps: usize,
    /// computational | plus-minus | schmidt-family
    #[arg(long, default_value = "computational")]
    basis: BasisChoice,
    /// certified (mutual-information bound) | variational
    #[arg(long, default_value = "certified", value_parser = parse_er_mode)]
    er_mode: ErMode,
    #[arg(long, default_value = "sweep.csv")]
    output: PathBuf,
    /// Where to dump a violating instance; defaults to <output>.counterexample.json.
    #[arg(long)]
    counterexample: Option<PathBuf>,
}

fn parse_er_mode(s: &str) -> Result<ErMode, String> {
    match s {
        "certified" => Ok(ErMode::Certified),
        "variational" => Ok(ErMode::Variational),
        _ => Err(format!("unknown E_R mode `{s}`")),
    }
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

fn io_failure(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::new(EXIT_IO, format!("{}: {e}", path.display()))
}

fn core_failure(e: Error) -> Failure {
    match e {
        Error::Counterexample(_) => Failure::new(EXIT_VIOLATION, e.to_string()),
        _ => Failure::new(EXIT_USAGE, e.to_string()),
    }
}

fn sidecar_path(output: &Path, suffix: &str) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn configure_threads() -> Result<(), Failure> {
    if let Ok(v) = std::env::var("COHDIST_THREADS") {
        let n: usize = v.parse().ok().filter(|&n| n > 0).ok_or_else(|| {
            Failure::new(
                EXIT_USAGE,
                format!("COHDIST_THREADS must be a positive integer, got `{v}`"),
            )
        })?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?;
    }
    Ok(())
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), Failure> {
    std::fs::write(path, contents).map_err(|e| io_failure(path, e))
}

fn cmd_sweep(args: SweepArgs) -> Result<(), Failure> {
    let grid =
        ParamGrid::new(args.param_start, args.param_stop, args.steps).map_err(core_failure)?;
    let config = SweepConfig {
        relation: args.relation,
        channel: args.channel,
        grid,
        dim: args.dim,
        samples: args.samples,
        seed: args.seed,
        basis: args.basis,
        er_mode: args.er_mode,
    };
    config.validate().map_err(core_failure)?;
    configure_threads()?;

    let records = match sweep(&config) {
        Ok(r) => r,
        Err(Error::Counterexample(cx)) => {
            let path = args
                .counterexample
                .unwrap_or_else(|| sidecar_path(&args.output, ".counterexample.json"));
            let body = serde_json::to_vec_pretty(&cx).expect("serializable");
            write_file(&path, &body)?;
            return Err(Failure::new(
                EXIT_VIOLATION,
                format!("{cx}; reproduction written to {}", path.display()),
            ));
        }
        Err(e) => return Err(core_failure(e)),
    };

    let file = File::create(&args.output).map_err(|e| io_failure(&args.output, e))?;
    csvio::write_records(BufWriter::new(file), &records).map_err(|e| match e {
        CsvError::Io(io) => io_failure(&args.output, io),
        CsvError::Format(m) => Failure::new(EXIT_FORMAT, m),
    })?;

    let meta = json!({
        "config": config,
        "rows": records.len(),
        "code_version": env!("CARGO_PKG_VERSION"),
        "solver": {
            "discord": DiscordConfig::default(),
            "entanglement": ErConfig::default(),
            "entanglement_mixture_size": "(d_A d_B)^2",
        },
    });
    let meta_path = sidecar_path(&args.output, ".meta.json");
    write_file(
        &meta_path,
        (serde_json::to_string_pretty(&meta).expect("serializable") + "\n").as_bytes(),
    )?;
    println!(
        "{} rows written to {}; min residual {:.3e}",
        records.len(),
        args.output.display(),
        records
            .iter()
            .map(|r| r.residual)
            .fold(f64::INFINITY, f64::min)
    );
    Ok(())
}

fn print_closed_forms(report: &ClosedFormReport) {
    println!(
        "closed-form check on a {0}×{0} lattice (tolerance {1:e})",
        report.grid + 1,
        report.tolerance
    );
    println!(
        "{:<30} {:>14} {:>14} {:>14}  {:<12} status",
        "expression", "vs physical", "vs ± coords", "vs mixed", "worst (λ₀,p)"
    );
    for c in &report.checks {
        println!(
            "{:<30} {:>14.3e} {:>14.3e} {:>14.3e}  ({:.2},{:.2})  {}",
            c.name,
            c.max_deviation_physical,
            c.max_deviation_plus_minus,
            c.max_deviation_mixed_frame,
            c.worst_point.0,
            c.worst_point.1,
            if c.matches { "match" } else { "MISMATCH" }
        );
    }
    match &report.amplitude_damping_variant {
        Some(v) => println!("amplitude-damping variant matching the general definition: {v}"),
        None => {
            println!("amplitude-damping: neither the printed nor the corrected variant matches")
        }
    }
    println!("overall: {}", if report.passed { "pass" } else { "FAIL" });
}

fn cmd_verify(grid: usize) -> Result<(), Failure> {
    let report = verify_closed_forms(grid).map_err(core_failure)?;
    print_closed_forms(&report);
    if report.passed {
        Ok(())
    } else {
        Err(Failure::new(EXIT_CLOSED_FORM, "closed-form mismatch"))
    }
}

fn spec_failure(e: SpecError) -> Failure {
    match e {
        SpecError::Usage(m) => Failure::new(EXIT_USAGE, m),
        SpecError::Io(m) => Failure::new(EXIT_IO, m),
        SpecError::Format(m) => Failure::new(EXIT_FORMAT, m),
    }
}

/// Adding zero turns −0 into +0 for display.
fn show(v: f64) -> f64 {
    v + 0.0
}

fn cmd_report(state: &str, channel: &str, basis: Option<ReportBasis>) -> Result<(), Failure> {
    let spec = specs::parse_state(state).map_err(spec_failure)?;
    let rho = &spec.state;
    let d = rho.dim();
    let ch = specs::parse_channel(channel, d).map_err(spec_failure)?;
    let (basis, basis_name) = match basis {
        Some(ReportBasis::Computational) => (Basis::computational(d), "computational"),
        Some(ReportBasis::PlusMinus) => {
            if d != 2 {
                return Err(Failure::new(
                    EXIT_USAGE,
                    "the plus-minus frame needs a qubit state",
                ));
            }
            (Basis::plus_minus(), "plus-minus")
        }
        None if state.starts_with("schmidt:") => (spec.natural_basis.clone(), "plus-minus"),
        None => (spec.natural_basis.clone(), "computational"),
    };

    let s = von_neumann_entropy(rho);
    let cr = coherence_relative_entropy(rho, &basis).map_err(core_failure)?;
    let cl1 = coherence_l1(rho, &basis).map_err(core_failure)?;
    let ic = coherent_information(rho, &ch).map_err(core_failure)?;
    let dist = disturbance(rho, &ch).map_err(core_failure)?;
    let report = if ch.is_measurement() {
        check_measurement_channel(rho, &ch, &basis)
    } else {
        check_single(rho, &ch, &basis)
    }
    .map_err(core_failure)?;

    let param = ch.param().map(|p| format!(" ({p})")).unwrap_or_default();
    println!("state    {} (d = {d})", spec.description);
    println!("channel  {}{param}", ch.label());
    println!("basis    {basis_name}");
    println!("S        = {:.12}", show(s));
    println!("C_r      = {:.12}", show(cr));
    println!("C_l1     = {:.12}", show(cl1));
    println!("I_c      = {:.12}", show(ic));
    println!("D        = {:.12}", show(dist));
    let relation = match report.relation {
        Relation::Measurement => "C + D <= log2 d_E",
        _ => "2C + D <= 2 log2 d",
    };
    println!("relation {} : {relation}", report.relation);
    println!("lhs      = {:.12}", show(report.lhs));
    println!("bound    = {:.12}", show(report.bound));
    println!("residual = {:.12}", show(report.residual));
    println!("holds    = {}", report.satisfied);
    Ok(())
}

fn cmd_plot(input: &Path, output: &Path) -> Result<(), Failure> {
    let file = File::open(input).map_err(|e| io_failure(input, e))?;
    let records = csvio::read_records(file).map_err(|e| match e {
        CsvError::Io(io) => io_failure(input, io),
        CsvError::Format(m) => Failure::new(EXIT_FORMAT, format!("{}: {m}", input.display())),
    })?;
    let svg = plot::render(&records);
    let mut out = File::create(output).map_err(|e| io_failure(output, e))?;
    out.write_all(svg.as_bytes())
        .map_err(|e| io_failure(output, e))?;
    println!("{} points plotted to {}", records.len(), output.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Sweep(args) => cmd_sweep(args),
        Command::VerifyClosedForms { grid } => cmd_verify(grid),
        Command::Report {
            state,
            channel,
            basis,
        } => cmd_report(&state, &channel, basis),
        Command::Plot { input, output } => cmd_plot(&input, &output),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("cohdist: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
