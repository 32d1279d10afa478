//! `chain-transport` command-line front end.
//!
//! Exit codes: 0 success, 1 invalid input, 2 numerical failure, 3 edge guard
//! violated under `--strict-edges`.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use chain_transport::analytics::{approx_displacement, fit_periods, ApproxParams};
use chain_transport::io::{
    format_significant, gnuplot_script, parse_grid, read_sweep_csv, write_occupations_csv, write_sweep_csv,
    RunConfig, RunSummary,
};
use chain_transport::observables::simulate;
use chain_transport::sweep::run_sweep_with_jobs;
use chain_transport::{Error, SweepParameter};

#[derive(Parser)]
#[command(name = "chain-transport", version, about = "Excitation transport on vibrating chains in a static field")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Propagate one configuration and write occupations plus a summary.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Occupations CSV; the summary goes next to it as `<stem>.summary.json`.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        strict_edges: bool,
    },
    /// Sweep one parameter of a configuration and write the sweep CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// phi, amplitude or field.
        #[arg(long)]
        param: SweepParameter,
        /// `start:stop:steps` (inclusive) or a comma-separated list.
        #[arg(long, allow_hyphen_values = true)]
        grid: String,
        /// Worker threads; defaults to every available core.
        #[arg(long)]
        jobs: Option<usize>,
        /// CSV path; stdout when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        strict_edges: bool,
        /// Leave the delta_n_approx column empty.
        #[arg(long)]
        no_overlay: bool,
        /// Factor applied to the analytic overlay.
        #[arg(long)]
        overlay_scale: Option<f64>,
    },
    /// Print the analytic displacement with 10 significant digits.
    Analytic {
        #[arg(long = "V", allow_hyphen_values = true)]
        prefactor: f64,
        #[arg(long, allow_hyphen_values = true)]
        f: f64,
        #[arg(long, allow_hyphen_values = true)]
        omega: f64,
        #[arg(long, allow_hyphen_values = true)]
        a: f64,
        #[arg(long, allow_hyphen_values = true)]
        phi: f64,
        #[arg(long, default_value_t = 1)]
        l: u32,
    },
    /// Fit phase offset and amplitude to a phase sweep CSV.
    Fit {
        csv: PathBuf,
        #[arg(long)]
        abar: f64,
        #[arg(long, default_value_t = 1)]
        l: u32,
        /// FitResult JSON path; stdout when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

enum Failure {
    Input(String),
    Numerical(String),
    Edges(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 1,
            Failure::Numerical(_) => 2,
            Failure::Edges(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Numerical(m) | Failure::Edges(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn load_config(path: &Path) -> Result<RunConfig, Failure> {
    let file = File::open(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    RunConfig::from_reader(BufReader::new(file)).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

fn cmd_run(config: &Path, output: Option<PathBuf>, strict_edges: bool) -> Outcome {
    let cfg = load_config(config)?;
    let plan = cfg.plan()?;
    let csv_path = output
        .or_else(|| cfg.output.occupations.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| sibling(config, ".occupations.csv"));
    let summary_path = cfg
        .output
        .summary
        .as_ref()
        .map(PathBuf::from)
        .unwrap_or_else(|| sibling(&csv_path, ".summary.json"));

    let record = simulate(&plan.chain, &plan.coupling, &plan.packet, &plan.integrator, &plan.record)?;

    let mut csv = create(&csv_path)?;
    write_occupations_csv(&record, &mut csv)?;
    csv.flush()?;

    let summary = RunSummary::new(&cfg, &record);
    let mut out = create(&summary_path)?;
    serde_json::to_writer_pretty(&mut out, &summary).map_err(|e| Failure::Input(e.to_string()))?;
    writeln!(out)?;
    out.flush()?;

    if cfg.output.gnuplot {
        std::fs::write(sibling(&csv_path, ".gp"), gnuplot_script(&csv_path.to_string_lossy()))?;
    }

    for (l, dn) in &summary.displacements {
        println!("delta_n[{l}] = {}", format_significant(*dn, 10));
    }
    println!("occupations: {}", csv_path.display());
    println!("summary: {}", summary_path.display());

    if strict_edges && !record.edge_guard.ok {
        return Err(Failure::Edges(format!(
            "edge occupation reached {:.3e} (threshold {:.1e})",
            record.edge_guard.max_edge_occupation, record.edge_guard.threshold
        )));
    }
    if !record.edge_guard.ok {
        eprintln!(
            "warning: edge occupation reached {:.3e}; displacements are affected by the chain ends",
            record.edge_guard.max_edge_occupation
        );
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    config: &Path,
    param: SweepParameter,
    grid: &str,
    jobs: Option<usize>,
    output: Option<PathBuf>,
    strict_edges: bool,
    no_overlay: bool,
    overlay_scale: Option<f64>,
) -> Outcome {
    let cfg = load_config(config)?;
    let mut spec = cfg.sweep_spec(param, parse_grid(grid)?)?;
    spec.analytic_overlay = !no_overlay;
    spec.overlay_scale = overlay_scale;
    if jobs == Some(0) {
        return Err(Failure::Input("--jobs must be at least 1".into()));
    }
    let result = run_sweep_with_jobs(&spec, jobs)?;

    match &output {
        Some(path) => {
            let mut w = create(path)?;
            write_sweep_csv(&result, &mut w)?;
            w.flush()?;
        }
        None => write_sweep_csv(&result, io::stdout().lock())?,
    }

    let mut failure = None;
    for row in result.rows.iter().filter(|r| r.error.is_some()) {
        let msg = format!("{} = {}: {}", spec.parameter, row.value, row.error.as_deref().unwrap_or_default());
        eprintln!("error: {msg}");
        let f = if row.numerical_failure { Failure::Numerical(msg) } else { Failure::Input(msg) };
        if failure.as_ref().is_none_or(|prev: &Failure| f.code() > prev.code()) {
            failure = Some(f);
        }
    }
    if let Some(f) = failure {
        return Err(f);
    }
    if !result.all_edges_ok() {
        let bad = result.rows.iter().filter(|r| !r.edge_ok).count();
        let msg = format!("edge guard failed at {bad} of {} grid points", result.rows.len());
        if strict_edges {
            return Err(Failure::Edges(msg));
        }
        eprintln!("warning: {msg}");
    }
    Ok(())
}

fn cmd_analytic(params: ApproxParams) -> Outcome {
    let value = approx_displacement(&params)?;
    println!("{}", format_significant(value, 10));
    Ok(())
}

fn cmd_fit(csv: &Path, abar: f64, l: u32, output: Option<PathBuf>) -> Outcome {
    let file = File::open(csv).map_err(|e| Failure::Input(format!("{}: {e}", csv.display())))?;
    let rows = read_sweep_csv(BufReader::new(file))?;
    let data: Vec<(u32, f64, f64)> = rows
        .iter()
        .filter_map(|r| r.delta_n.map(|dn| (r.l, r.param, dn)))
        .collect();
    let fit = fit_periods(&data, abar, l)?;
    let json = serde_json::to_string_pretty(&fit).map_err(|e| Failure::Input(e.to_string()))?;
    match output {
        Some(path) => std::fs::write(&path, format!("{json}\n"))?,
        None => println!("{json}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run { config, output, strict_edges } => cmd_run(&config, output, strict_edges),
        Command::Sweep { config, param, grid, jobs, output, strict_edges, no_overlay, overlay_scale } => {
            cmd_sweep(&config, param, &grid, jobs, output, strict_edges, no_overlay, overlay_scale)
        }
        Command::Analytic { prefactor, f, omega, a, phi, l } => cmd_analytic(ApproxParams {
            prefactor,
            field_strength: f,
            angular_frequency: omega,
            amplitude: a,
            phase: phi,
            periods: l,
        }),
        Command::Fit { csv, abar, l, output } => cmd_fit(&csv, abar, l, output),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
