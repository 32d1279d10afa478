//! Coherent and dephasing excitation transport on vibrating chains in a
//! constant external field.
//!
//! A chain of `N` nodes carries a single excitation. Neighbouring nodes are
//! coupled by `J_n(t) = -V / [1 - 2 a_n sin(w t + phi)]^3`, and a static field
//! adds `f * n` to the energy of node `n`. Matching the Bloch frequency `f`
//! with the chain frequency `w` turns the usual Bloch oscillation into a net
//! drift of the wave packet whose direction is set by the phase `phi`.
//!
//! Units: `hbar = 1`, energies in units of `V`, times in `1 / V`. Node indices
//! are 1-based wherever they enter physics (field energy, packet centre).
//!
//! Module map:
//! - [`chain`]: chain parameters, coupling profiles, tridiagonal Hamiltonian.
//! - [`state`]: pure and mixed states, Gaussian initial packets.
//! - [`propagator`]: fixed-step RK4 for the Schrödinger and dephasing
//!   Lindblad equations.
//! - [`observables`]: occupations, packet centre, displacements, edge guard.
//! - [`analytics`]: continuum displacement estimates and the cosine fit.
//! - [`sweep`]: parameter grids, run in parallel when the `parallel` feature
//!   is on.
//! - [`io`]: run configuration schema and CSV / JSON output.

pub mod analytics;
pub mod chain;
mod error;
pub mod io;
pub mod observables;
pub mod propagator;
pub mod quadrature;
pub mod state;
pub mod sweep;

pub use error::{Error, Result};

pub use chain::{ChainSpec, CouplingProfile, HamiltonianMatrix};
pub use observables::TrajectoryRecord;
pub use propagator::IntegratorConfig;
pub use state::{DensityMatrix, QuantumState, WavePacketSpec};
pub use sweep::{Execution, SweepParameter, SweepResult, SweepSpec};

/// Complex amplitude type used throughout.
pub type C64 = num_complex::Complex64;

/// Bloch period `2 pi / f`.
pub fn bloch_period(field_strength: f64) -> Result<f64> {
    if field_strength == 0.0 || !field_strength.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "Bloch period undefined for field strength {field_strength}"
        )));
    }
    Ok(2.0 * std::f64::consts::PI / field_strength.abs())
}
