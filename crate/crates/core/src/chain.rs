//! Chain parameters, coupling profiles and the tridiagonal Hamiltonian
//! `H_S(t) = sum_n (E_n + f n) |n><n| + sum_n J_n(t) (|n><n+1| + h.c.)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Upper bound on `max_n |2 a_n|`. The coupling `-V / (1 - 2 a_n s)^3`
/// diverges as this approaches one.
pub const MAX_MODULATION: f64 = 0.999;

/// Static description of the chain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    pub n_nodes: usize,
    /// `E_n` for n = 1..N, stored 0-based.
    pub site_energies: Vec<f64>,
    /// `V`, the magnitude of the static coupling.
    pub dipolar_prefactor: f64,
    /// `f`, energy gained per node index.
    pub field_strength: f64,
    /// `lambda`, dephasing rate in the node basis.
    pub dephasing_rate: f64,
}

impl ChainSpec {
    /// Chain with all site energies zero.
    pub fn new(
        n_nodes: usize,
        dipolar_prefactor: f64,
        field_strength: f64,
        dephasing_rate: f64,
    ) -> Result<Self> {
        Self::with_site_energies(
            vec![0.0; n_nodes],
            dipolar_prefactor,
            field_strength,
            dephasing_rate,
        )
    }

    pub fn with_site_energies(
        site_energies: Vec<f64>,
        dipolar_prefactor: f64,
        field_strength: f64,
        dephasing_rate: f64,
    ) -> Result<Self> {
        let spec = Self {
            n_nodes: site_energies.len(),
            site_energies,
            dipolar_prefactor,
            field_strength,
            dephasing_rate,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_nodes < 2 {
            return Err(Error::InvalidParameter(format!(
                "chain needs at least 2 nodes, got {}",
                self.n_nodes
            )));
        }
        if self.site_energies.len() != self.n_nodes {
            return Err(Error::InvalidParameter(format!(
                "{} site energies for {} nodes",
                self.site_energies.len(),
                self.n_nodes
            )));
        }
        if self.site_energies.iter().any(|e| !e.is_finite()) {
            return Err(Error::InvalidParameter("non-finite site energy".into()));
        }
        if !(self.dipolar_prefactor >= 0.0 && self.dipolar_prefactor.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "dipolar prefactor must be finite and >= 0, got {}",
                self.dipolar_prefactor
            )));
        }
        if !self.field_strength.is_finite() {
            return Err(Error::InvalidParameter("non-finite field strength".into()));
        }
        if !(self.dephasing_rate >= 0.0 && self.dephasing_rate.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "dephasing rate must be finite and >= 0, got {}",
                self.dephasing_rate
            )));
        }
        Ok(())
    }

    pub fn bloch_period(&self) -> Result<f64> {
        crate::bloch_period(self.field_strength)
    }

    pub fn with_field_strength(&self, field_strength: f64) -> Self {
        Self { field_strength, ..self.clone() }
    }

    pub fn with_dephasing_rate(&self, dephasing_rate: f64) -> Self {
        Self { dephasing_rate, ..self.clone() }
    }

    /// Diagonal of `H_S`: `E_n + f n` with the 1-based node index `n`.
    pub fn diagonal(&self) -> Vec<f64> {
        self.site_energies
            .iter()
            .enumerate()
            .map(|(i, e)| e + self.field_strength * (i + 1) as f64)
            .collect()
    }
}

/// How the bond couplings vary in time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CouplingProfile {
    /// `J_n = -V` for every bond.
    Static,
    /// All nodes oscillate in phase: `J(t) = -V / [1 - 2a sin(w t + phi)]^3`.
    Uniform {
        amplitude: f64,
        angular_frequency: f64,
        phase: f64,
    },
    /// The chain sits in its `q`-th normal mode. `mean_amplitude` is
    /// `abar_q = (1/N) sum |a_{n,q}|`, `angular_frequency` is the mode
    /// frequency `w_q` itself.
    Eigenmode {
        mode_index: usize,
        mean_amplitude: f64,
        angular_frequency: f64,
        phase: f64,
    },
}

impl CouplingProfile {
    pub fn uniform(amplitude: f64, angular_frequency: f64, phase: f64) -> Self {
        Self::Uniform { amplitude, angular_frequency, phase }
    }

    pub fn eigenmode(mode_index: usize, mean_amplitude: f64, angular_frequency: f64, phase: f64) -> Self {
        Self::Eigenmode { mode_index, mean_amplitude, angular_frequency, phase }
    }

    pub fn angular_frequency(&self) -> f64 {
        match *self {
            Self::Static => 0.0,
            Self::Uniform { angular_frequency, .. } | Self::Eigenmode { angular_frequency, .. } => {
                angular_frequency
            }
        }
    }

    pub fn phase(&self) -> f64 {
        match *self {
            Self::Static => 0.0,
            Self::Uniform { phase, .. } | Self::Eigenmode { phase, .. } => phase,
        }
    }

    /// `a` for the uniform profile, `abar_q` for the eigenmode, zero if static.
    pub fn amplitude(&self) -> f64 {
        match *self {
            Self::Static => 0.0,
            Self::Uniform { amplitude, .. } => amplitude,
            Self::Eigenmode { mean_amplitude, .. } => mean_amplitude,
        }
    }

    /// Same profile with a new phase. A static profile is returned unchanged.
    pub fn with_phase(&self, phase: f64) -> Self {
        let mut p = self.clone();
        match &mut p {
            Self::Static => {}
            Self::Uniform { phase: ph, .. } | Self::Eigenmode { phase: ph, .. } => *ph = phase,
        }
        p
    }

    /// Same profile with a new `a` (uniform) or `abar_q` (eigenmode). A static
    /// profile becomes a uniform one at zero frequency and phase.
    pub fn with_amplitude(&self, amplitude: f64) -> Self {
        match *self {
            Self::Static => Self::uniform(amplitude, 0.0, 0.0),
            Self::Uniform { angular_frequency, phase, .. } => {
                Self::uniform(amplitude, angular_frequency, phase)
            }
            Self::Eigenmode { mode_index, angular_frequency, phase, .. } => {
                Self::eigenmode(mode_index, amplitude, angular_frequency, phase)
            }
        }
    }

    pub fn is_eigenmode(&self) -> bool {
        matches!(self, Self::Eigenmode { .. })
    }

    /// Modulation amplitude of each bond, `n = 1..N-1`, stored 0-based.
    pub fn bond_amplitudes(&self, n_nodes: usize) -> Vec<f64> {
        let bonds = n_nodes.saturating_sub(1);
        match *self {
            Self::Static => vec![0.0; bonds],
            Self::Uniform { amplitude, .. } => vec![amplitude; bonds],
            Self::Eigenmode { mode_index, mean_amplitude, .. } => {
                let base = n_nodes as f64 * mean_amplitude / mode_index as f64;
                eigenmode_bond_amplitudes(n_nodes, mode_index, base)
            }
        }
    }

    /// Checks the profile against the chain it will drive.
    pub fn validate(&self, spec: &ChainSpec) -> Result<()> {
        let (amp, omega, phase) = match *self {
            Self::Static => return Ok(()),
            Self::Uniform { amplitude, angular_frequency, phase } => {
                (amplitude, angular_frequency, phase)
            }
            Self::Eigenmode { mode_index, mean_amplitude, angular_frequency, phase } => {
                if mode_index == 0 || mode_index >= spec.n_nodes {
                    return Err(Error::InvalidParameter(format!(
                        "mode index {mode_index} outside 1..{}",
                        spec.n_nodes - 1
                    )));
                }
                (mean_amplitude, angular_frequency, phase)
            }
        };
        if !(amp >= 0.0 && amp.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "amplitude must be finite and >= 0, got {amp}"
            )));
        }
        if !(omega >= 0.0 && omega.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "angular frequency must be finite and >= 0, got {omega}"
            )));
        }
        if !phase.is_finite() {
            return Err(Error::InvalidParameter("non-finite phase".into()));
        }
        let worst = self
            .bond_amplitudes(spec.n_nodes)
            .iter()
            .fold(0.0_f64, |m, a| m.max((2.0 * a).abs()));
        if worst > MAX_MODULATION {
            return Err(Error::SingularCoupling(format!(
                "max |2 a_n| = {worst} exceeds {MAX_MODULATION}"
            )));
        }
        Ok(())
    }
}

fn eigenmode_bond_amplitudes(n_nodes: usize, q: usize, base_amplitude: f64) -> Vec<f64> {
    let n = n_nodes as f64;
    let q = q as f64;
    let scale = base_amplitude * (q * PI / (2.0 * n)).tan();
    (1..n_nodes)
        .map(|bond| scale * (bond as f64 * q * PI / n).sin())
        .collect()
}

/// Evaluates all bond couplings of a validated profile. Built once per
/// propagation so the per-bond amplitudes are not recomputed every substep.
#[derive(Clone, Debug)]
pub struct BondCouplings {
    prefactor: f64,
    amplitudes: Vec<f64>,
    angular_frequency: f64,
    phase: f64,
}

impl BondCouplings {
    pub fn new(spec: &ChainSpec, profile: &CouplingProfile) -> Result<Self> {
        spec.validate()?;
        profile.validate(spec)?;
        Ok(Self {
            prefactor: spec.dipolar_prefactor,
            amplitudes: profile.bond_amplitudes(spec.n_nodes),
            angular_frequency: profile.angular_frequency(),
            phase: profile.phase(),
        })
    }

    pub fn n_bonds(&self) -> usize {
        self.amplitudes.len()
    }

    /// Writes `J_n(t)` for every bond into `out`.
    pub fn fill(&self, t: f64, out: &mut [f64]) {
        let s = (self.angular_frequency * t + self.phase).sin();
        for (j, a) in out.iter_mut().zip(&self.amplitudes) {
            let d = 1.0 - 2.0 * a * s;
            *j = -self.prefactor / (d * d * d);
        }
    }

    pub fn at(&self, bond: usize, t: f64) -> f64 {
        let s = (self.angular_frequency * t + self.phase).sin();
        let d = 1.0 - 2.0 * self.amplitudes[bond] * s;
        -self.prefactor / (d * d * d)
    }
}

/// `J_n(t)` for the 1-based bond between nodes `bond_index` and
/// `bond_index + 1`.
pub fn coupling_at(
    profile: &CouplingProfile,
    spec: &ChainSpec,
    bond_index: usize,
    t: f64,
) -> Result<f64> {
    if bond_index == 0 || bond_index >= spec.n_nodes {
        return Err(Error::InvalidParameter(format!(
            "bond index {bond_index} outside 1..{}",
            spec.n_nodes - 1
        )));
    }
    Ok(BondCouplings::new(spec, profile)?.at(bond_index - 1, t))
}

/// Per-bond amplitudes and frequency of the `q`-th normal mode.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenmodeParameters {
    /// `a_{n,q}` for bonds n = 1..N-1.
    pub bond_amplitudes: Vec<f64>,
    /// `w_q = 2 w sin(q pi / 2N)`.
    pub mode_frequency: f64,
    /// `(1/N) sum_{n=1}^{N} |a_{n,q}|` by direct summation.
    pub mean_amplitude: f64,
    /// `a q / N`.
    pub mean_amplitude_closed_form: f64,
}

/// Normal-mode parameters for base amplitude `a` and base frequency `w`.
///
/// The mean amplitude is summed over all `N` nodes (the `n = N` term holds
/// `sin(q pi)`, which vanishes). For `q = 1` the sum must equal the closed
/// form `a q / N`; for higher modes the two differ slightly and both are
/// returned.
pub fn eigenmode_parameters(
    spec: &ChainSpec,
    q: usize,
    base_amplitude: f64,
    base_frequency: f64,
) -> Result<EigenmodeParameters> {
    spec.validate()?;
    let n_nodes = spec.n_nodes;
    if q == 0 || q >= n_nodes {
        return Err(Error::InvalidParameter(format!(
            "mode index {q} outside 1..{}",
            n_nodes - 1
        )));
    }
    if !base_amplitude.is_finite() || !base_frequency.is_finite() {
        return Err(Error::InvalidParameter("non-finite eigenmode parameter".into()));
    }
    let n = n_nodes as f64;
    let qf = q as f64;
    let bond_amplitudes = eigenmode_bond_amplitudes(n_nodes, q, base_amplitude);
    let worst = bond_amplitudes.iter().fold(0.0_f64, |m, a| m.max((2.0 * a).abs()));
    if worst > MAX_MODULATION {
        return Err(Error::SingularCoupling(format!(
            "max |2 a_n,q| = {worst} exceeds {MAX_MODULATION}"
        )));
    }
    let tan = (qf * PI / (2.0 * n)).tan();
    let node_sum: f64 = (1..=n_nodes)
        .map(|k| (base_amplitude * tan * (k as f64 * qf * PI / n).sin()).abs())
        .sum();
    let mean_amplitude = node_sum / n;
    let mean_amplitude_closed_form = base_amplitude * qf / n;
    if q == 1 {
        let scale = mean_amplitude_closed_form.abs().max(f64::MIN_POSITIVE);
        let rel = (mean_amplitude - mean_amplitude_closed_form).abs() / scale;
        if rel > 1e-12 && mean_amplitude_closed_form != 0.0 {
            return Err(Error::Numerical(format!(
                "mean amplitude sum {mean_amplitude} disagrees with a/N = {mean_amplitude_closed_form}"
            )));
        }
    }
    Ok(EigenmodeParameters {
        bond_amplitudes,
        mode_frequency: 2.0 * base_frequency * (qf * PI / (2.0 * n)).sin(),
        mean_amplitude,
        mean_amplitude_closed_form,
    })
}

/// Real symmetric tridiagonal `H_S(t)`. Storage is 0-based: `diagonal[i]`
/// belongs to node `i + 1`, `off_diagonal[i]` couples nodes `i + 1` and
/// `i + 2`.
#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianMatrix {
    pub diagonal: Vec<f64>,
    pub off_diagonal: Vec<f64>,
    pub evaluated_at: f64,
}

impl HamiltonianMatrix {
    pub fn dimension(&self) -> usize {
        self.diagonal.len()
    }

    /// Element `(i, j)`, 0-based.
    pub fn element(&self, i: usize, j: usize) -> f64 {
        match i.abs_diff(j) {
            0 => self.diagonal[i],
            1 => self.off_diagonal[i.min(j)],
            _ => 0.0,
        }
    }
}

/// `H_S(t)` for a validated chain and profile.
pub fn hamiltonian_at(spec: &ChainSpec, profile: &CouplingProfile, t: f64) -> Result<HamiltonianMatrix> {
    let couplings = BondCouplings::new(spec, profile)?;
    let mut off_diagonal = vec![0.0; couplings.n_bonds()];
    couplings.fill(t, &mut off_diagonal);
    Ok(HamiltonianMatrix {
        diagonal: spec.diagonal(),
        off_diagonal,
        evaluated_at: t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(n: usize, f: f64) -> ChainSpec {
        ChainSpec::new(n, 1.0, f, 0.0).unwrap()
    }

    #[test]
    fn static_coupling_is_minus_v() {
        let spec = chain(10, 0.2);
        for &t in &[0.0, 1.3, 100.0] {
            for n in 1..10 {
                assert_eq!(coupling_at(&CouplingProfile::Static, &spec, n, t).unwrap(), -1.0);
            }
        }
    }

    #[test]
    fn uniform_coupling_values() {
        let spec = chain(10, 0.2);
        let p = CouplingProfile::uniform(0.1, 0.2, 0.0);
        assert_eq!(coupling_at(&p, &spec, 3, 0.0).unwrap(), -1.0);
        // w t = pi/2: denominator 1 - 0.2 = 0.8, 0.8^3 = 0.512.
        let t = PI / 2.0 / 0.2;
        let j = coupling_at(&p, &spec, 3, t).unwrap();
        assert!((j - (-1.0 / 0.512)).abs() < 1e-12);
        assert!((j + 1.953125).abs() < 1e-12);
    }

    #[test]
    fn eigenmode_coupling_at_zero_phase_and_time() {
        let spec = chain(103, 0.2);
        let p = CouplingProfile::eigenmode(1, 0.04, 0.2, 0.0);
        assert_eq!(coupling_at(&p, &spec, 52, 0.0).unwrap(), -1.0);
    }

    #[test]
    fn bond_index_range() {
        let spec = chain(5, 0.2);
        let p = CouplingProfile::Static;
        assert!(coupling_at(&p, &spec, 0, 0.0).is_err());
        assert!(coupling_at(&p, &spec, 5, 0.0).is_err());
        assert!(coupling_at(&p, &spec, 4, 0.0).is_ok());
    }

    #[test]
    fn singular_profiles_rejected() {
        let spec = chain(103, 0.2);
        let err = CouplingProfile::uniform(0.6, 0.2, 0.0).validate(&spec).unwrap_err();
        assert!(matches!(err, Error::SingularCoupling(_)));
        assert!(CouplingProfile::uniform(0.4996, 0.2, 0.0).validate(&spec).is_err());
        assert!(CouplingProfile::uniform(-0.1, 0.2, 0.0).validate(&spec).is_err());
        // abar = 0.5 gives max |2 a_n| ~ 1.57.
        assert!(CouplingProfile::eigenmode(1, 0.5, 0.2, 0.0).validate(&spec).is_err());
        assert!(CouplingProfile::eigenmode(0, 0.04, 0.2, 0.0).validate(&spec).is_err());
        assert!(CouplingProfile::eigenmode(103, 0.04, 0.2, 0.0).validate(&spec).is_err());
    }

    #[test]
    fn chain_validation() {
        assert!(ChainSpec::new(1, 1.0, 0.2, 0.0).is_err());
        assert!(ChainSpec::new(3, 1.0, 0.2, -0.1).is_err());
        assert!(ChainSpec::new(3, -1.0, 0.2, 0.0).is_err());
        let mut spec = chain(3, 0.2);
        spec.site_energies.pop();
        assert!(spec.validate().is_err());
    }

    #[test]
    fn eigenmode_mean_amplitude() {
        let spec = chain(103, 0.2);
        let p = eigenmode_parameters(&spec, 1, 4.12, 0.3).unwrap();
        assert_eq!(p.bond_amplitudes.len(), 102);
        assert!((p.mean_amplitude_closed_form - 0.04).abs() < 1e-15);
        assert!((p.mean_amplitude - 0.04).abs() < 1e-12 * 0.04);
        assert!((p.mode_frequency - 0.6 * (PI / 206.0).sin()).abs() < 1e-15);

        let zero = eigenmode_parameters(&spec, 1, 0.0, 0.3).unwrap();
        assert!(zero.bond_amplitudes.iter().all(|&a| a == 0.0));
        assert_eq!(zero.mean_amplitude, 0.0);

        assert!(eigenmode_parameters(&spec, 0, 1.0, 0.2).is_err());
        assert!(eigenmode_parameters(&spec, 103, 1.0, 0.2).is_err());
        assert!(matches!(
            eigenmode_parameters(&spec, 1, 40.0, 0.2),
            Err(Error::SingularCoupling(_))
        ));
    }

    #[test]
    fn eigenmode_profile_matches_parameters() {
        let spec = chain(103, 0.2);
        let from_profile = CouplingProfile::eigenmode(1, 0.04, 0.2, 0.0).bond_amplitudes(103);
        let direct = eigenmode_parameters(&spec, 1, 4.12, 1.0).unwrap().bond_amplitudes;
        for (a, b) in from_profile.iter().zip(&direct) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn hamiltonian_small_chain() {
        let spec = chain(3, 0.2);
        let h = hamiltonian_at(&spec, &CouplingProfile::Static, 0.0).unwrap();
        assert_eq!(h.dimension(), 3);
        for (d, want) in h.diagonal.iter().zip([0.2, 0.4, 0.6]) {
            assert!((d - want).abs() < 1e-15);
        }
        assert_eq!(h.off_diagonal, vec![-1.0, -1.0]);
        assert_eq!(h.element(0, 1), h.element(1, 0));
        assert_eq!(h.element(0, 2), 0.0);
    }

    #[test]
    fn hamiltonian_zero_field() {
        let spec = chain(6, 0.0);
        let h = hamiltonian_at(&spec, &CouplingProfile::Static, 3.0).unwrap();
        assert!(h.diagonal.iter().all(|&d| d == 0.0));
        assert!(h.off_diagonal.iter().all(|&j| j == -1.0));
    }

    #[test]
    fn hamiltonian_quarter_period() {
        let spec = chain(103, 0.2);
        let p = CouplingProfile::uniform(0.1, 0.2, 0.0);
        let t = 2.0 * PI / 0.2 / 4.0;
        let h = hamiltonian_at(&spec, &p, t).unwrap();
        assert!(h.off_diagonal.iter().all(|j| (j + 1.953125).abs() < 1e-12));
    }

    #[test]
    fn site_energies_enter_diagonal() {
        let spec = ChainSpec::with_site_energies(vec![1.0, -1.0, 0.5], 1.0, 0.1, 0.0).unwrap();
        let d = spec.diagonal();
        assert!((d[0] - 1.1).abs() < 1e-15);
        assert!((d[1] + 0.8).abs() < 1e-15);
        assert!((d[2] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn profile_serde_shape() {
        let p: CouplingProfile = serde_json::from_str(
            r#"{"kind":"uniform","amplitude":0.1,"angular_frequency":0.2,"phase":0.0}"#,
        )
        .unwrap();
        assert_eq!(p, CouplingProfile::uniform(0.1, 0.2, 0.0));
        let bad = serde_json::from_str::<CouplingProfile>(
            r#"{"kind":"uniform","amplitude":0.1,"angular_frequency":0.2,"phase":0.0,"extra":1}"#,
        );
        assert!(bad.is_err());
        let s: CouplingProfile = serde_json::from_str(r#"{"kind":"static"}"#).unwrap();
        assert_eq!(s, CouplingProfile::Static);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn uniform_coupling_is_periodic(
                a in 0.0..0.45_f64, w in 0.05..2.0_f64, phi in 0.0..6.3_f64, t in 0.0..200.0_f64,
            ) {
                let spec = chain(8, 0.2);
                let p = CouplingProfile::uniform(a, w, phi);
                let j0 = coupling_at(&p, &spec, 2, t).unwrap();
                let j1 = coupling_at(&p, &spec, 2, t + 2.0 * PI / w).unwrap();
                prop_assert!((j0 - j1).abs() <= 1e-9 * j0.abs());
            }

            #[test]
            fn eigenmode_coupling_is_periodic(
                abar in 0.0..0.08_f64, w in 0.05..1.0_f64, phi in 0.0..6.3_f64,
                t in 0.0..200.0_f64, bond in 1usize..103,
            ) {
                let spec = chain(103, 0.2);
                let p = CouplingProfile::eigenmode(1, abar, w, phi);
                let j0 = coupling_at(&p, &spec, bond, t).unwrap();
                let j1 = coupling_at(&p, &spec, bond, t + 2.0 * PI / w).unwrap();
                prop_assert!((j0 - j1).abs() <= 1e-9 * j0.abs());
            }

            #[test]
            fn hamiltonian_is_symmetric_tridiagonal_and_negative(
                a in 0.0..0.45_f64, w in 0.0..1.0_f64, phi in -7.0..7.0_f64,
                t in 0.0..100.0_f64, f in -1.0..1.0_f64, eig in any::<bool>(),
            ) {
                let spec = chain(17, f);
                let p = if eig {
                    CouplingProfile::eigenmode(1, a / 10.0, w, phi)
                } else {
                    CouplingProfile::uniform(a, w, phi)
                };
                let h = hamiltonian_at(&spec, &p, t).unwrap();
                prop_assert_eq!(h.off_diagonal.len(), 16);
                for i in 0..17 {
                    for j in 0..17 {
                        prop_assert_eq!(h.element(i, j), h.element(j, i));
                        if i.abs_diff(j) > 1 { prop_assert_eq!(h.element(i, j), 0.0); }
                    }
                }
                prop_assert!(h.off_diagonal.iter().all(|j| j.is_finite() && *j < 0.0));
            }

            #[test]
            fn zero_amplitude_eigenmode_is_static(w in 0.0..1.0_f64, phi in -7.0..7.0_f64, t in 0.0..100.0_f64) {
                let spec = chain(20, 0.3);
                let a = hamiltonian_at(&spec, &CouplingProfile::eigenmode(1, 0.0, w, phi), t).unwrap();
                let b = hamiltonian_at(&spec, &CouplingProfile::Static, t).unwrap();
                prop_assert_eq!(a.off_diagonal, b.off_diagonal);
            }
        }
    }
}
