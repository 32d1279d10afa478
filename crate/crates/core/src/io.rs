//! Run configuration schema and plot-ready output files.
//!
//! Config (JSON, unknown keys rejected):
//!
//! ```json
//! {
//!   "chain": { "n_nodes": 103, "dipolar_prefactor": 1.0, "field_strength": 0.2,
//!              "dephasing_rate": 0.0, "site_energies": null },
//!   "coupling": { "kind": "uniform", "amplitude": 0.1, "angular_frequency": 0.2, "phase": 0.0 },
//!   "packet": { "center": 52, "width": 6.0 },
//!   "integrator": { "steps_per_period": 4000, "periods": 2.0, "snapshot_stride": 40 },
//!   "output": { "periods": [1, 2], "edge_threshold": 1e-4 }
//! }
//! ```
//!
//! `coupling.kind` is `static`, `uniform` or `eigenmode` (with `mode_index`,
//! `mean_amplitude`, `angular_frequency`, `phase`). The integrator takes
//! either `steps_per_period` + `periods` (Bloch periods) or an explicit
//! `step` + `duration`; the latter is required when `field_strength` is 0.
//!
//! Outputs: occupations CSV `t,node,prob`, sweep CSV
//! `param,l,delta_n,delta_n_approx,edge_ok`, and JSON summaries. Numbers are
//! written in Rust's shortest round-trip form, `\n` line endings.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::chain::{ChainSpec, CouplingProfile};
use crate::observables::{
    half_period_excursion, occupation_variance, EdgeGuard, RecordOptions, TrajectoryRecord,
    DEFAULT_EDGE_THRESHOLD,
};
use crate::propagator::{IntegratorConfig, DEFAULT_PERIODS, DEFAULT_SNAPSHOT_STRIDE, DEFAULT_STEPS_PER_PERIOD};
use crate::state::WavePacketSpec;
use crate::sweep::{SweepParameter, SweepResult, SweepSpec};
use crate::{Error, Result};

fn default_prefactor() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainConfig {
    pub n_nodes: usize,
    #[serde(default = "default_prefactor")]
    pub dipolar_prefactor: f64,
    pub field_strength: f64,
    #[serde(default)]
    pub dephasing_rate: f64,
    /// Omitted or null means all zero.
    #[serde(default)]
    pub site_energies: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSettings {
    #[serde(default)]
    pub steps_per_period: Option<usize>,
    #[serde(default)]
    pub periods: Option<f64>,
    #[serde(default)]
    pub step: Option<f64>,
    #[serde(default)]
    pub duration: Option<f64>,
    #[serde(default)]
    pub snapshot_stride: Option<usize>,
    /// Propagate a density matrix even when the dephasing rate is zero.
    #[serde(default)]
    pub mixed: bool,
}

fn default_periods() -> Vec<u32> {
    vec![1, 2]
}

fn default_threshold() -> f64 {
    DEFAULT_EDGE_THRESHOLD
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputOptions {
    /// `l` values for which `Delta N_l` is reported.
    #[serde(default = "default_periods")]
    pub periods: Vec<u32>,
    #[serde(default = "default_threshold")]
    pub edge_threshold: f64,
    #[serde(default)]
    pub occupations: Option<String>,
    #[serde(default)]
    pub summary: Option<String>,
    /// Also write a gnuplot script next to the occupations CSV.
    #[serde(default)]
    pub gnuplot: bool,
}

impl Default for OutputOptions {
    fn default() -> Self {
        Self {
            periods: default_periods(),
            edge_threshold: default_threshold(),
            occupations: None,
            summary: None,
            gnuplot: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub chain: ChainConfig,
    pub coupling: CouplingProfile,
    pub packet: WavePacketSpec,
    #[serde(default)]
    pub integrator: IntegratorSettings,
    #[serde(default)]
    pub output: OutputOptions,
}

/// Validated domain objects of a [`RunConfig`].
#[derive(Clone, Debug, PartialEq)]
pub struct RunPlan {
    pub chain: ChainSpec,
    pub coupling: CouplingProfile,
    pub packet: WavePacketSpec,
    pub integrator: IntegratorConfig,
    pub record: RecordOptions,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        serde_json::from_reader(reader).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn chain_spec(&self) -> Result<ChainSpec> {
        let c = &self.chain;
        let energies = c.site_energies.clone().unwrap_or_else(|| vec![0.0; c.n_nodes]);
        if energies.len() != c.n_nodes {
            return Err(Error::InvalidParameter(format!(
                "{} site energies for {} nodes",
                energies.len(),
                c.n_nodes
            )));
        }
        ChainSpec::with_site_energies(energies, c.dipolar_prefactor, c.field_strength, c.dephasing_rate)
    }

    fn integrator_config(&self, chain: &ChainSpec) -> Result<IntegratorConfig> {
        let s = &self.integrator;
        let stride = s.snapshot_stride.unwrap_or(DEFAULT_SNAPSHOT_STRIDE);
        match (s.step, s.duration, s.steps_per_period, s.periods) {
            (Some(step), Some(duration), None, None) => IntegratorConfig::new(step, duration, stride),
            (None, None, spp, periods) => IntegratorConfig::bloch_periods(
                chain.field_strength,
                periods.unwrap_or(DEFAULT_PERIODS),
                spp.unwrap_or(DEFAULT_STEPS_PER_PERIOD),
                stride,
            ),
            _ => Err(Error::Config(
                "integrator takes either step + duration or steps_per_period + periods".into(),
            )),
        }
    }

    /// Validates everything before any computation starts.
    pub fn plan(&self) -> Result<RunPlan> {
        let chain = self.chain_spec()?;
        self.coupling.validate(&chain)?;
        self.packet.validate(&chain)?;
        let integrator = self.integrator_config(&chain)?;
        if self.output.periods.contains(&0) {
            return Err(Error::Config("output periods must be >= 1".into()));
        }
        if self.output.edge_threshold.is_nan() || self.output.edge_threshold < 0.0 {
            return Err(Error::Config("edge threshold must be >= 0".into()));
        }
        Ok(RunPlan {
            chain,
            coupling: self.coupling.clone(),
            packet: self.packet,
            integrator,
            record: RecordOptions {
                periods: self.output.periods.clone(),
                edge_threshold: self.output.edge_threshold,
                force_mixed: self.integrator.mixed,
            },
        })
    }

    /// Sweep over `parameter` with this config as the base point.
    pub fn sweep_spec(&self, parameter: SweepParameter, grid: Vec<f64>) -> Result<SweepSpec> {
        let chain = self.chain_spec()?;
        self.packet.validate(&chain)?;
        let s = &self.integrator;
        if s.step.is_some() || s.duration.is_some() {
            return Err(Error::Config(
                "sweeps derive their time grid from the Bloch period; use steps_per_period".into(),
            ));
        }
        let mut spec = SweepSpec::new(chain, self.coupling.clone(), self.packet, parameter, grid);
        spec.steps_per_period = s.steps_per_period.unwrap_or(DEFAULT_STEPS_PER_PERIOD);
        spec.snapshot_stride = s.snapshot_stride.unwrap_or(DEFAULT_SNAPSHOT_STRIDE);
        spec.record_periods = self.output.periods.clone();
        spec.edge_threshold = self.output.edge_threshold;
        spec.validate()?;
        Ok(spec)
    }
}

/// Locale-independent, round-trip exact number formatting.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

/// `x` with `digits` significant digits, positional notation.
pub fn format_significant(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i64;
    let decimals = (digits as i64 - 1 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

/// Long-format occupations: one `t,node,prob` row per snapshot and node.
pub fn write_occupations_csv<W: Write>(record: &TrajectoryRecord, out: W) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record(["t", "node", "prob"])?;
    for (t, row) in record.times.iter().zip(&record.occupations) {
        let t = fmt_f64(*t);
        for (i, p) in row.iter().enumerate() {
            w.write_record([t.as_str(), &(i + 1).to_string(), &fmt_f64(*p)])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimedValue {
    pub t: f64,
    pub value: f64,
}

/// Summary JSON of a single run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub provenance: RunConfig,
    pub integrator: IntegratorConfig,
    pub mixed: bool,
    pub times: Vec<f64>,
    pub centers: Vec<f64>,
    pub displacements: BTreeMap<u32, f64>,
    pub half_period_excursion: Option<f64>,
    pub min_center: TimedValue,
    pub max_center: TimedValue,
    pub final_variance: f64,
    pub trace_drift: f64,
    pub edge_guard: EdgeGuard,
}

impl RunSummary {
    pub fn new(config: &RunConfig, record: &TrajectoryRecord) -> Self {
        let extreme = |better: fn(f64, f64) -> bool| {
            let mut best = TimedValue { t: record.times[0], value: record.centers[0] };
            for (t, c) in record.times.iter().zip(&record.centers) {
                if better(*c, best.value) {
                    best = TimedValue { t: *t, value: *c };
                }
            }
            best
        };
        let f = record.parameters.chain.field_strength;
        Self {
            provenance: config.clone(),
            integrator: record.parameters.integrator,
            mixed: record.parameters.mixed,
            times: record.times.clone(),
            centers: record.centers.clone(),
            displacements: record.displacements.clone(),
            half_period_excursion: if f != 0.0 { half_period_excursion(record, f).ok() } else { None },
            min_center: extreme(|a, b| a < b),
            max_center: extreme(|a, b| a > b),
            final_variance: occupation_variance(record.final_occupations()),
            trace_drift: record.trace_drift(),
            edge_guard: record.edge_guard,
        }
    }
}

/// `param,l,delta_n,delta_n_approx,edge_ok`, one row per grid value and `l`.
/// Missing values are left empty.
pub fn write_sweep_csv<W: Write>(result: &SweepResult, out: W) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record(["param", "l", "delta_n", "delta_n_approx", "edge_ok"])?;
    for row in &result.rows {
        for &l in &result.metadata.record_periods {
            let dn = row.displacements.get(&l).map(|v| fmt_f64(*v)).unwrap_or_default();
            let approx = row
                .approx
                .as_ref()
                .and_then(|a| a.get(&l))
                .map(|v| fmt_f64(*v))
                .unwrap_or_default();
            w.write_record([
                fmt_f64(row.value),
                l.to_string(),
                dn,
                approx,
                row.edge_ok.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepCsvRow {
    pub param: f64,
    pub l: u32,
    pub delta_n: Option<f64>,
    pub delta_n_approx: Option<f64>,
    pub edge_ok: bool,
}

pub fn read_sweep_csv<R: Read>(input: R) -> Result<Vec<SweepCsvRow>> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = r.headers()?.clone();
    let expected = ["param", "l", "delta_n", "delta_n_approx", "edge_ok"];
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(Error::Config(format!(
            "sweep CSV header must be {}, got {}",
            expected.join(","),
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    r.deserialize()
        .map(|row| row.map_err(|e| Error::Config(format!("bad sweep CSV row: {e}"))))
        .collect()
}

/// `start:stop:steps` (inclusive linspace) or a comma-separated list. The
/// literal `pi` and `2pi` are accepted in place of numbers.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let number = |s: &str| -> Result<f64> {
        let s = s.trim();
        match s {
            "pi" => Ok(std::f64::consts::PI),
            "2pi" => Ok(2.0 * std::f64::consts::PI),
            _ => s
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("bad grid value '{s}'"))),
        }
    };
    let parts: Vec<&str> = text.split(':').collect();
    let grid = match parts.as_slice() {
        [start, stop, steps] => {
            let (a, b) = (number(start)?, number(stop)?);
            let n: usize = steps
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad grid step count '{steps}'")))?;
            match n {
                0 => Vec::new(),
                1 => vec![a],
                _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
            }
        }
        [_] => text.split(',').map(number).collect::<Result<_>>()?,
        _ => return Err(Error::Config(format!("bad grid '{text}'"))),
    };
    if grid.is_empty() {
        return Err(Error::Config("grid is empty".into()));
    }
    Ok(grid)
}

/// Minimal gnuplot script drawing the occupation heat map of a CSV.
pub fn gnuplot_script(csv_path: &str) -> String {
    format!(
        "set datafile separator ','\n\
         set xlabel 'node'\n\
         set ylabel 't'\n\
         set view map\n\
         set palette negative grey\n\
         plot '{csv_path}' every ::1 using 2:1:3 with image notitle\n"
    )
}
