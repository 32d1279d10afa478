//! Parameter grids over the phase, the modulation amplitude or the field.
//!
//! Every grid point is an independent propagation. With the `parallel`
//! feature the points are distributed over a rayon pool; results are always
//! gathered in grid order, so serial and parallel runs are bit-identical.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::analytics::{approx_displacement, ApproxParams};
use crate::chain::{ChainSpec, CouplingProfile};
use crate::observables::{simulate, RecordOptions, DEFAULT_EDGE_THRESHOLD};
use crate::propagator::{IntegratorConfig, DEFAULT_SNAPSHOT_STRIDE, DEFAULT_STEPS_PER_PERIOD};
use crate::state::WavePacketSpec;
use crate::{Error, Result};

/// Scale applied to the analytic overlay of eigenmode sweeps.
pub const EIGENMODE_OVERLAY_SCALE: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    /// `phi` of the coupling profile.
    #[serde(rename = "phi")]
    Phase,
    /// `a` for the uniform chain, `abar_q` for an eigenmode.
    Amplitude,
    /// `f`; the Bloch period and thus the time grid change with it.
    #[serde(rename = "field")]
    FieldStrength,
}

impl std::fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Phase => "phi",
            Self::Amplitude => "amplitude",
            Self::FieldStrength => "field",
        })
    }
}

impl std::str::FromStr for SweepParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "phi" | "phase" => Ok(Self::Phase),
            "amplitude" | "a" => Ok(Self::Amplitude),
            "field" | "f" => Ok(Self::FieldStrength),
            other => Err(Error::Config(format!("unknown sweep parameter '{other}'"))),
        }
    }
}

/// A grid of simulations sharing everything but one parameter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub chain: ChainSpec,
    pub coupling: CouplingProfile,
    pub packet: WavePacketSpec,
    /// RK4 steps per Bloch period of each point.
    pub steps_per_period: usize,
    pub snapshot_stride: usize,
    pub parameter: SweepParameter,
    pub grid: Vec<f64>,
    pub record_periods: Vec<u32>,
    pub analytic_overlay: bool,
    /// Factor on the overlay; defaults to 1 for uniform and static chains
    /// and to [`EIGENMODE_OVERLAY_SCALE`] for eigenmodes.
    pub overlay_scale: Option<f64>,
    pub edge_threshold: f64,
}

impl SweepSpec {
    /// Sweep with default resolution, `l = 1, 2` and the overlay on.
    pub fn new(
        chain: ChainSpec,
        coupling: CouplingProfile,
        packet: WavePacketSpec,
        parameter: SweepParameter,
        grid: Vec<f64>,
    ) -> Self {
        Self {
            chain,
            coupling,
            packet,
            steps_per_period: DEFAULT_STEPS_PER_PERIOD,
            snapshot_stride: DEFAULT_SNAPSHOT_STRIDE,
            parameter,
            grid,
            record_periods: vec![1, 2],
            analytic_overlay: true,
            overlay_scale: None,
            edge_threshold: DEFAULT_EDGE_THRESHOLD,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::Config("sweep grid is empty".into()));
        }
        if self.grid.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("sweep grid contains a non-finite value".into()));
        }
        if self.record_periods.is_empty() || self.record_periods.contains(&0) {
            return Err(Error::Config("record periods must be a non-empty list of l >= 1".into()));
        }
        if self.steps_per_period == 0 || self.snapshot_stride == 0 {
            return Err(Error::Config("steps per period and snapshot stride must be >= 1".into()));
        }
        Ok(())
    }

    pub fn overlay_scale(&self) -> f64 {
        self.overlay_scale
            .unwrap_or(if self.coupling.is_eigenmode() { EIGENMODE_OVERLAY_SCALE } else { 1.0 })
    }

    /// Chain and profile of one grid point.
    pub fn point(&self, value: f64) -> (ChainSpec, CouplingProfile) {
        match self.parameter {
            SweepParameter::Phase => (self.chain.clone(), self.coupling.with_phase(value)),
            SweepParameter::Amplitude => (self.chain.clone(), self.coupling.with_amplitude(value)),
            SweepParameter::FieldStrength => (self.chain.with_field_strength(value), self.coupling.clone()),
        }
    }

    fn run_point(&self, value: f64) -> SweepRow {
        match self.try_point(value) {
            Ok(row) => row,
            Err(e) => SweepRow {
                value,
                displacements: BTreeMap::new(),
                approx: None,
                edge_ok: false,
                max_edge_occupation: f64::NAN,
                error: Some(e.to_string()),
                numerical_failure: e.is_numerical(),
            },
        }
    }

    fn try_point(&self, value: f64) -> Result<SweepRow> {
        let (chain, coupling) = self.point(value);
        let last = *self.record_periods.iter().max().expect("validated non-empty");
        let cfg = IntegratorConfig::bloch_periods(
            chain.field_strength,
            f64::from(last),
            self.steps_per_period,
            self.snapshot_stride,
        )?;
        let options = RecordOptions {
            periods: self.record_periods.clone(),
            edge_threshold: self.edge_threshold,
            force_mixed: false,
        };
        let record = simulate(&chain, &coupling, &self.packet, &cfg, &options)?;
        let approx = if self.analytic_overlay {
            self.overlay(&chain, &coupling).ok()
        } else {
            None
        };
        Ok(SweepRow {
            value,
            displacements: record.displacements,
            approx,
            edge_ok: record.edge_guard.ok,
            max_edge_occupation: record.edge_guard.max_edge_occupation,
            error: None,
            numerical_failure: false,
        })
    }

    fn overlay(&self, chain: &ChainSpec, coupling: &CouplingProfile) -> Result<BTreeMap<u32, f64>> {
        let scale = self.overlay_scale();
        self.record_periods
            .iter()
            .map(|&l| {
                let p = ApproxParams {
                    prefactor: chain.dipolar_prefactor,
                    field_strength: chain.field_strength,
                    angular_frequency: coupling.angular_frequency(),
                    amplitude: coupling.amplitude(),
                    phase: coupling.phase(),
                    periods: l,
                };
                Ok((l, scale * approx_displacement(&p)?))
            })
            .collect()
    }
}

/// Result of one grid point. Failures are recorded in `error`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub displacements: BTreeMap<u32, f64>,
    pub approx: Option<BTreeMap<u32, f64>>,
    pub edge_ok: bool,
    pub max_edge_occupation: f64,
    pub error: Option<String>,
    /// The point failed during integration rather than validation.
    #[serde(default)]
    pub numerical_failure: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub metadata: SweepSpec,
    pub integrator: String,
}

impl SweepResult {
    /// `(value, Delta N_l)` for rows that produced a value for `l`.
    pub fn series(&self, l: u32) -> Vec<(f64, f64)> {
        self.rows
            .iter()
            .filter_map(|r| r.displacements.get(&l).map(|d| (r.value, *d)))
            .collect()
    }

    pub fn all_edges_ok(&self) -> bool {
        self.rows.iter().all(|r| r.edge_ok)
    }
}

/// How grid points are scheduled.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Execution {
    Serial,
    /// rayon pool; falls back to serial without the `parallel` feature.
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Self::Parallel
        } else {
            Self::Serial
        }
    }
}

/// Maps `job` over `items` in order, in parallel when enabled.
pub fn map_points<T, R, F>(items: &[T], execution: Execution, job: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match execution {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(job).collect()
        }
        _ => items.iter().map(job).collect(),
    }
}

pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    run_sweep_with(spec, Execution::default())
}

pub fn run_sweep_with(spec: &SweepSpec, execution: Execution) -> Result<SweepResult> {
    spec.validate()?;
    let rows = map_points(&spec.grid, execution, |&v| spec.run_point(v));
    Ok(SweepResult {
        rows,
        metadata: spec.clone(),
        integrator: format!(
            "rk4 fixed step, {} steps per Bloch period, {} execution",
            spec.steps_per_period,
            match execution {
                Execution::Serial => "serial",
                Execution::Parallel => "parallel",
            }
        ),
    })
}

/// Runs on a dedicated pool of `jobs` threads (`None` uses every core).
pub fn run_sweep_with_jobs(spec: &SweepSpec, jobs: Option<usize>) -> Result<SweepResult> {
    #[cfg(feature = "parallel")]
    {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = jobs {
            builder = builder.num_threads(n.max(1));
        }
        let pool = builder
            .build()
            .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
        let execution = if jobs == Some(1) { Execution::Serial } else { Execution::Parallel };
        pool.install(|| run_sweep_with(spec, execution))
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = jobs;
        run_sweep_with(spec, Execution::Serial)
    }
}
