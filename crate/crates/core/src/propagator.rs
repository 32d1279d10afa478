//! Fixed-step RK4 integration of `psi' = -i H(t) psi` and of the dephasing
//! master equation `rho' = -i [H(t), rho] - lambda (1 - delta_kl) rho_kl`.
//!
//! RK4 runs in the interaction picture of the diagonal (field plus site
//! energies), which is exact, so only the hopping term is discretised. The
//! hopping is evaluated at `t`, `t + dt/2` and `t + dt` within each step. Its
//! tridiagonal structure keeps a pure-state derivative at `O(N)` and a
//! density-matrix derivative at `O(N^2)`. Trace and norm are never
//! renormalised; their drift is reported by the observables.

use serde::{Deserialize, Serialize};

use crate::chain::{BondCouplings, ChainSpec, CouplingProfile};
use crate::state::{DensityMatrix, QuantumState};
use crate::{Error, Result, C64};

/// Steps per Bloch period used by [`IntegratorConfig::default_for`].
pub const DEFAULT_STEPS_PER_PERIOD: usize = 4000;
/// Snapshot stride used by [`IntegratorConfig::default_for`]; 100 snapshots
/// per Bloch period, with `T_B/2` on the grid.
pub const DEFAULT_SNAPSHOT_STRIDE: usize = 40;
/// Bloch periods covered by [`IntegratorConfig::default_for`].
pub const DEFAULT_PERIODS: f64 = 2.0;

/// Tolerance on `duration / step` being an integer, in units of one step.
const GRID_TOLERANCE: f64 = 1e-6;

/// Time grid of a propagation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    pub step: f64,
    pub duration: f64,
    pub snapshot_stride: usize,
}

impl IntegratorConfig {
    pub fn new(step: f64, duration: f64, snapshot_stride: usize) -> Result<Self> {
        let cfg = Self { step, duration, snapshot_stride };
        cfg.validate()?;
        Ok(cfg)
    }

    /// `periods` Bloch periods of field `f`, `steps_per_period` steps each.
    pub fn bloch_periods(
        field_strength: f64,
        periods: f64,
        steps_per_period: usize,
        snapshot_stride: usize,
    ) -> Result<Self> {
        if steps_per_period == 0 {
            return Err(Error::Grid("steps per period must be positive".into()));
        }
        let period = crate::bloch_period(field_strength)?;
        Self::new(period / steps_per_period as f64, periods * period, snapshot_stride)
    }

    /// `dt = T_B / 4000` over two Bloch periods.
    pub fn default_for(spec: &ChainSpec) -> Result<Self> {
        Self::bloch_periods(
            spec.field_strength,
            DEFAULT_PERIODS,
            DEFAULT_STEPS_PER_PERIOD,
            DEFAULT_SNAPSHOT_STRIDE,
        )
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::Grid(format!("step must be > 0, got {}", self.step)));
        }
        if !(self.duration >= 0.0 && self.duration.is_finite()) {
            return Err(Error::Grid(format!("duration must be >= 0, got {}", self.duration)));
        }
        if self.snapshot_stride == 0 {
            return Err(Error::Grid("snapshot stride must be >= 1".into()));
        }
        let ratio = self.duration / self.step;
        if (ratio - ratio.round()).abs() > GRID_TOLERANCE {
            return Err(Error::Grid(format!(
                "duration {} is not a whole number of steps of {} ({ratio} steps)",
                self.duration, self.step
            )));
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        (self.duration / self.step).round() as usize
    }

    pub fn time_of(&self, step_index: usize) -> f64 {
        step_index as f64 * self.step
    }

    /// True if step `k` is recorded: every `snapshot_stride`-th step plus the
    /// final one.
    pub fn is_snapshot(&self, step_index: usize) -> bool {
        step_index.is_multiple_of(self.snapshot_stride) || step_index == self.n_steps()
    }

    /// Step index landing exactly on time `t`, if that step is recorded.
    pub fn snapshot_index_at(&self, t: f64) -> Option<usize> {
        let k = t / self.step;
        let kr = k.round();
        if kr < 0.0 || (k - kr).abs() > GRID_TOLERANCE {
            return None;
        }
        let k = kr as usize;
        (k <= self.n_steps() && self.is_snapshot(k)).then_some(k)
    }

    pub fn snapshot_count(&self) -> usize {
        let n = self.n_steps();
        n / self.snapshot_stride + 1 + usize::from(!n.is_multiple_of(self.snapshot_stride))
    }
}

/// One recorded state.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub step_index: usize,
    pub time: f64,
    pub state: QuantumState,
}

/// Right-hand sides in the interaction picture of the diagonal `D`:
/// `psi~ = e^{iDt} psi`, `rho~ = e^{iDt} rho e^{-iDt}`. The field and site
/// energies then act exactly and only the hopping, carried by the complex
/// bond elements `c_n = J_n(t) e^{i (d_n - d_{n+1}) t}`, is integrated.
struct Dynamics {
    dim: usize,
    diagonal: Vec<f64>,
    /// `d_n - d_{n+1}` per bond.
    bond_detuning: Vec<f64>,
    couplings: BondCouplings,
    dephasing: f64,
}

impl Dynamics {
    fn new(spec: &ChainSpec, profile: &CouplingProfile) -> Result<Self> {
        let couplings = BondCouplings::new(spec, profile)?;
        let mut diagonal = spec.diagonal();
        // A constant offset is a global phase for psi and drops out of rho.
        let mean = diagonal.iter().sum::<f64>() / diagonal.len() as f64;
        diagonal.iter_mut().for_each(|d| *d -= mean);
        let bond_detuning = diagonal.windows(2).map(|w| w[0] - w[1]).collect();
        Ok(Self {
            dim: spec.n_nodes,
            diagonal,
            bond_detuning,
            couplings,
            dephasing: spec.dephasing_rate,
        })
    }

    fn bonds_at(&self, t: f64, scratch: &mut [f64], out: &mut [C64]) {
        self.couplings.fill(t, scratch);
        for ((c, j), w) in out.iter_mut().zip(scratch.iter()).zip(&self.bond_detuning) {
            *c = C64::from_polar(*j, w * t);
        }
    }

    fn pure_rhs(&self, c: &[C64], psi: &[C64], out: &mut [C64]) {
        let n = self.dim;
        for i in 0..n {
            let mut h = C64::new(0.0, 0.0);
            if i > 0 {
                h += c[i - 1].conj() * psi[i - 1];
            }
            if i + 1 < n {
                h += c[i] * psi[i + 1];
            }
            out[i] = C64::new(h.im, -h.re);
        }
    }

    fn mixed_rhs(&self, c: &[C64], rho: &[C64], out: &mut [C64]) {
        let n = self.dim;
        let lambda = self.dephasing;
        for r in 0..n {
            let row = &rho[r * n..(r + 1) * n];
            let above = (r > 0).then(|| (&rho[(r - 1) * n..r * n], c[r - 1].conj()));
            let below = (r + 1 < n).then(|| (&rho[(r + 1) * n..(r + 2) * n], c[r]));
            let out_row = &mut out[r * n..(r + 1) * n];
            for col in 0..n {
                // (H rho - rho H)_{r, col}
                let mut comm = C64::new(0.0, 0.0);
                if let Some((a, h)) = above {
                    comm += h * a[col];
                }
                if let Some((b, h)) = below {
                    comm += h * b[col];
                }
                if col > 0 {
                    comm -= row[col - 1] * c[col - 1];
                }
                if col + 1 < n {
                    comm -= row[col + 1] * c[col].conj();
                }
                let mut v = C64::new(comm.im, -comm.re);
                if r != col {
                    v -= row[col] * lambda;
                }
                out_row[col] = v;
            }
        }
    }

    /// Writes the lab-frame state of the interaction-picture vector `frame`.
    fn to_lab(&self, t: f64, frame: &[C64], lab: &mut QuantumState) {
        let phases: Vec<C64> = self.diagonal.iter().map(|d| C64::from_polar(1.0, -d * t)).collect();
        match lab {
            QuantumState::Pure(psi) => {
                for ((out, z), p) in psi.iter_mut().zip(frame).zip(&phases) {
                    *out = z * p;
                }
            }
            QuantumState::Mixed(rho) => {
                let n = self.dim;
                let out = rho.as_mut_slice();
                for r in 0..n {
                    for col in 0..n {
                        out[r * n + col] = frame[r * n + col] * phases[r] * phases[col].conj();
                    }
                }
            }
        }
    }
}

#[derive(Clone, Copy)]
enum Kind {
    Pure,
    Mixed,
}

struct Rk4 {
    k1: Vec<C64>,
    k2: Vec<C64>,
    k3: Vec<C64>,
    k4: Vec<C64>,
    tmp: Vec<C64>,
    scratch: Vec<f64>,
    c_start: Vec<C64>,
    c_mid: Vec<C64>,
    c_end: Vec<C64>,
}

impl Rk4 {
    fn new(len: usize, bonds: usize) -> Self {
        let z = C64::new(0.0, 0.0);
        Self {
            k1: vec![z; len],
            k2: vec![z; len],
            k3: vec![z; len],
            k4: vec![z; len],
            tmp: vec![z; len],
            scratch: vec![0.0; bonds],
            c_start: vec![z; bonds],
            c_mid: vec![z; bonds],
            c_end: vec![z; bonds],
        }
    }

    fn step(&mut self, dynamics: &Dynamics, kind: Kind, y: &mut [C64], t: f64, dt: f64) {
        let rhs = |c: &[C64], y: &[C64], out: &mut [C64]| match kind {
            Kind::Pure => dynamics.pure_rhs(c, y, out),
            Kind::Mixed => dynamics.mixed_rhs(c, y, out),
        };
        dynamics.bonds_at(t, &mut self.scratch, &mut self.c_start);
        dynamics.bonds_at(t + 0.5 * dt, &mut self.scratch, &mut self.c_mid);
        dynamics.bonds_at(t + dt, &mut self.scratch, &mut self.c_end);

        rhs(&self.c_start, y, &mut self.k1);
        axpy(&mut self.tmp, y, 0.5 * dt, &self.k1);
        rhs(&self.c_mid, &self.tmp, &mut self.k2);
        axpy(&mut self.tmp, y, 0.5 * dt, &self.k2);
        rhs(&self.c_mid, &self.tmp, &mut self.k3);
        axpy(&mut self.tmp, y, dt, &self.k3);
        rhs(&self.c_end, &self.tmp, &mut self.k4);

        let w = dt / 6.0;
        for (i, yi) in y.iter_mut().enumerate() {
            *yi += (self.k1[i] + (self.k2[i] + self.k3[i]) * 2.0 + self.k4[i]) * w;
        }
    }
}

fn axpy(out: &mut [C64], y: &[C64], h: f64, k: &[C64]) {
    for ((o, a), b) in out.iter_mut().zip(y).zip(k) {
        *o = a + b * h;
    }
}

fn check_inputs(
    spec: &ChainSpec,
    state0: &QuantumState,
    cfg: &IntegratorConfig,
) -> Result<()> {
    spec.validate()?;
    cfg.validate()?;
    if state0.dim() != spec.n_nodes {
        return Err(Error::InvalidState(format!(
            "state has dimension {} but the chain has {} nodes",
            state0.dim(),
            spec.n_nodes
        )));
    }
    state0.validate()
}

/// Integrates from `state0` and hands every recorded snapshot to `observe`,
/// in time order, without retaining it.
///
/// A pure input is promoted to a density matrix when the dephasing rate is
/// positive.
pub fn propagate_with<F>(
    spec: &ChainSpec,
    profile: &CouplingProfile,
    state0: &QuantumState,
    cfg: &IntegratorConfig,
    mut observe: F,
) -> Result<()>
where
    F: FnMut(usize, f64, &QuantumState) -> Result<()>,
{
    check_inputs(spec, state0, cfg)?;
    let dynamics = Dynamics::new(spec, profile)?;
    let mut state = match state0 {
        QuantumState::Pure(psi) if spec.dephasing_rate > 0.0 => {
            QuantumState::Mixed(DensityMatrix::from_pure(psi))
        }
        s => s.clone(),
    };
    let kind = if state.is_mixed() { Kind::Mixed } else { Kind::Pure };
    // The interaction and lab frames coincide at t = 0.
    let mut frame = match &state {
        QuantumState::Pure(psi) => psi.clone(),
        QuantumState::Mixed(rho) => rho.as_slice().to_vec(),
    };
    let mut rk = Rk4::new(frame.len(), dynamics.couplings.n_bonds());

    observe(0, 0.0, &state)?;
    let n_steps = cfg.n_steps();
    for k in 0..n_steps {
        rk.step(&dynamics, kind, &mut frame, cfg.time_of(k), cfg.step);
        let k = k + 1;
        if cfg.is_snapshot(k) {
            let t = cfg.time_of(k);
            if !frame.iter().all(|z| z.is_finite()) {
                return Err(Error::Numerical(format!("state became non-finite at t = {t}")));
            }
            dynamics.to_lab(t, &frame, &mut state);
            observe(k, t, &state)?;
        }
    }
    Ok(())
}

/// Integrates from `state0` and returns every recorded snapshot, including
/// `t = 0` and `t = duration`.
pub fn propagate(
    spec: &ChainSpec,
    profile: &CouplingProfile,
    state0: &QuantumState,
    cfg: &IntegratorConfig,
) -> Result<Vec<Snapshot>> {
    let mut out = Vec::with_capacity(cfg.snapshot_count());
    propagate_with(spec, profile, state0, cfg, |step_index, time, state| {
        out.push(Snapshot { step_index, time, state: state.clone() });
        Ok(())
    })?;
    Ok(out)
}
