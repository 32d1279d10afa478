//! Occupations, packet centre, per-period displacements and the edge guard.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::chain::{ChainSpec, CouplingProfile};
use crate::propagator::{propagate_with, IntegratorConfig, Snapshot};
use crate::state::{gaussian_packet, QuantumState, WavePacketSpec};
use crate::{Error, Result};

/// Default bound on `rho_11 + rho_NN`.
pub const DEFAULT_EDGE_THRESHOLD: f64 = 1e-4;

/// Everything needed to repeat a simulation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub chain: ChainSpec,
    pub coupling: CouplingProfile,
    pub packet: WavePacketSpec,
    pub integrator: IntegratorConfig,
    pub mixed: bool,
}

/// Outcome of the edge-reflection check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeGuard {
    pub ok: bool,
    pub max_edge_occupation: f64,
    pub threshold: f64,
}

/// Recorded observables of one simulation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub step_indices: Vec<usize>,
    pub times: Vec<f64>,
    /// `rho_kk(t)`, one row per snapshot.
    pub occupations: Vec<Vec<f64>>,
    pub centers: Vec<f64>,
    /// `tr rho` (or `<psi|psi>`) per snapshot.
    pub traces: Vec<f64>,
    /// `tr rho^2` per snapshot.
    pub purities: Vec<f64>,
    /// `Delta N_l` keyed by number of Bloch periods `l`.
    pub displacements: BTreeMap<u32, f64>,
    pub edge_occupation_max: f64,
    pub edge_guard: EdgeGuard,
    pub parameters: Provenance,
}

impl TrajectoryRecord {
    fn row_at_time(&self, t: f64) -> Option<usize> {
        let k = self.parameters.integrator.snapshot_index_at(t)?;
        self.step_indices.binary_search(&k).ok()
    }

    /// Packet centre at an on-grid time.
    pub fn center_at(&self, t: f64) -> Result<f64> {
        self.row_at_time(t)
            .map(|i| self.centers[i])
            .ok_or_else(|| Error::Grid(format!("t = {t} is not a recorded snapshot time")))
    }

    pub fn occupations_at(&self, t: f64) -> Result<&[f64]> {
        self.row_at_time(t)
            .map(|i| self.occupations[i].as_slice())
            .ok_or_else(|| Error::Grid(format!("t = {t} is not a recorded snapshot time")))
    }

    pub fn final_occupations(&self) -> &[f64] {
        self.occupations.last().map(Vec::as_slice).unwrap_or(&[])
    }

    /// `max_t |tr rho(t) - 1|`.
    pub fn trace_drift(&self) -> f64 {
        self.traces.iter().fold(0.0_f64, |m, t| m.max((t - 1.0).abs()))
    }
}

/// First moment `sum_k k rho_kk` with 1-based `k`.
pub fn center_of(state: &QuantumState) -> f64 {
    center_of_occupations(&state.occupations())
}

pub fn center_of_occupations(occupations: &[f64]) -> f64 {
    occupations
        .iter()
        .enumerate()
        .map(|(i, p)| (i + 1) as f64 * p)
        .sum()
}

/// Second central moment of the occupation distribution.
pub fn occupation_variance(occupations: &[f64]) -> f64 {
    let mean = center_of_occupations(occupations);
    occupations
        .iter()
        .enumerate()
        .map(|(i, p)| ((i + 1) as f64 - mean).powi(2) * p)
        .sum()
}

/// `Delta N_l = N_c(l T_B) - N_c(0)` for each requested `l`.
pub fn displacements_of(
    record: &TrajectoryRecord,
    field_strength: f64,
    periods: &[u32],
) -> Result<BTreeMap<u32, f64>> {
    let period = crate::bloch_period(field_strength)?;
    let start = *record
        .centers
        .first()
        .ok_or_else(|| Error::Grid("empty trajectory".into()))?;
    let end = record.times.last().copied().unwrap_or(0.0);
    periods
        .iter()
        .map(|&l| {
            let t = f64::from(l) * period;
            if t > end + 0.5 * record.parameters.integrator.step {
                return Err(Error::Grid(format!(
                    "{l} Bloch periods (t = {t}) exceed the trajectory end {end}"
                )));
            }
            Ok((l, record.center_at(t)? - start))
        })
        .collect()
}

/// `N_c(T_B / 2) - N_c(0)`.
pub fn half_period_excursion(record: &TrajectoryRecord, field_strength: f64) -> Result<f64> {
    let t = 0.5 * crate::bloch_period(field_strength)?;
    let end = record.times.last().copied().unwrap_or(0.0);
    if t > end + 0.5 * record.parameters.integrator.step {
        return Err(Error::Grid(format!("trajectory ends at {end}, before T_B/2 = {t}")));
    }
    let start = record.centers[0];
    Ok(record.center_at(t)? - start)
}

fn edge_occupation(occupations: &[f64]) -> f64 {
    match occupations {
        [] => 0.0,
        [only] => *only,
        [first, .., last] => first + last,
    }
}

/// Fails iff `rho_11 + rho_NN` exceeds `threshold` at any snapshot.
pub fn edge_guard(occupations: &[Vec<f64>], threshold: f64) -> EdgeGuard {
    let max_edge_occupation = occupations
        .iter()
        .map(|row| edge_occupation(row))
        .fold(0.0_f64, f64::max);
    EdgeGuard { ok: max_edge_occupation <= threshold, max_edge_occupation, threshold }
}

/// What to extract while simulating.
#[derive(Clone, Debug, PartialEq)]
pub struct RecordOptions {
    /// Periods `l` for which `Delta N_l` is computed.
    pub periods: Vec<u32>,
    pub edge_threshold: f64,
    /// Propagate a density matrix even without dephasing.
    pub force_mixed: bool,
}

impl Default for RecordOptions {
    fn default() -> Self {
        Self { periods: vec![1, 2], edge_threshold: DEFAULT_EDGE_THRESHOLD, force_mixed: false }
    }
}

/// Builds a record from retained snapshots.
pub fn record_from_snapshots(
    snapshots: &[Snapshot],
    parameters: Provenance,
    options: &RecordOptions,
) -> Result<TrajectoryRecord> {
    let mut builder = RecordBuilder::new(parameters);
    for s in snapshots {
        builder.push(s.step_index, s.time, &s.state);
    }
    builder.finish(options)
}

struct RecordBuilder {
    record: TrajectoryRecord,
}

impl RecordBuilder {
    fn new(parameters: Provenance) -> Self {
        let capacity = parameters.integrator.snapshot_count();
        Self {
            record: TrajectoryRecord {
                step_indices: Vec::with_capacity(capacity),
                times: Vec::with_capacity(capacity),
                occupations: Vec::with_capacity(capacity),
                centers: Vec::with_capacity(capacity),
                traces: Vec::with_capacity(capacity),
                purities: Vec::with_capacity(capacity),
                displacements: BTreeMap::new(),
                edge_occupation_max: 0.0,
                edge_guard: EdgeGuard { ok: true, max_edge_occupation: 0.0, threshold: 0.0 },
                parameters,
            },
        }
    }

    fn push(&mut self, step_index: usize, time: f64, state: &QuantumState) {
        let occ = state.occupations();
        let r = &mut self.record;
        r.step_indices.push(step_index);
        r.times.push(time);
        r.centers.push(center_of_occupations(&occ));
        r.traces.push(state.trace());
        r.purities.push(state.purity());
        r.occupations.push(occ);
    }

    fn finish(mut self, options: &RecordOptions) -> Result<TrajectoryRecord> {
        let guard = edge_guard(&self.record.occupations, options.edge_threshold);
        self.record.edge_guard = guard;
        self.record.edge_occupation_max = guard.max_edge_occupation;
        if !options.periods.is_empty() {
            let f = self.record.parameters.chain.field_strength;
            self.record.displacements = displacements_of(&self.record, f, &options.periods)?;
        }
        Ok(self.record)
    }
}

/// Propagates a Gaussian packet and records observables at every snapshot.
pub fn simulate(
    spec: &ChainSpec,
    profile: &CouplingProfile,
    packet: &WavePacketSpec,
    cfg: &IntegratorConfig,
    options: &RecordOptions,
) -> Result<TrajectoryRecord> {
    let psi = gaussian_packet(spec, packet)?;
    let mixed = options.force_mixed || spec.dephasing_rate > 0.0;
    let state0 = if mixed { QuantumState::Mixed(psi.to_mixed()) } else { psi };
    if !options.periods.is_empty() {
        let period = spec.bloch_period()?;
        let last = options.periods.iter().max().copied().unwrap_or(0);
        if f64::from(last) * period > cfg.duration + 0.5 * cfg.step {
            return Err(Error::Grid(format!(
                "duration {} shorter than {last} Bloch periods",
                cfg.duration
            )));
        }
    }
    let parameters = Provenance {
        chain: spec.clone(),
        coupling: profile.clone(),
        packet: *packet,
        integrator: *cfg,
        mixed,
    };
    let mut builder = RecordBuilder::new(parameters);
    propagate_with(spec, profile, &state0, cfg, |k, t, state| {
        builder.push(k, t, state);
        Ok(())
    })?;
    builder.finish(options)
}
