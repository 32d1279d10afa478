//! Pure and mixed single-excitation states over the node basis.

use serde::{Deserialize, Serialize};

use crate::chain::ChainSpec;
use crate::{Error, Result, C64};

/// Tolerance for normalisation and Hermiticity checks on input states.
pub const STATE_TOLERANCE: f64 = 1e-10;

/// Dense `N x N` density matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl DensityMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![C64::new(0.0, 0.0); dim * dim] }
    }

    pub fn from_rows(dim: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::InvalidState(format!(
                "{} entries for a {dim}x{dim} matrix",
                data.len()
            )));
        }
        Ok(Self { dim, data })
    }

    /// `|psi><psi|`.
    pub fn from_pure(psi: &[C64]) -> Self {
        let dim = psi.len();
        let mut data = Vec::with_capacity(dim * dim);
        for a in psi {
            for b in psi {
                data.push(a * b.conj());
            }
        }
        Self { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: C64) {
        self.data[i * self.dim + j] = value;
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// `tr(rho^2)`, which for a Hermitian matrix is the sum of `|rho_ij|^2`.
    pub fn purity(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i).re).collect()
    }

    /// `max_ij |rho_ij - conj(rho_ji)|`.
    pub fn hermiticity_error(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.dim {
            for j in i..self.dim {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }
}

/// State of the excitation.
#[derive(Clone, Debug, PartialEq)]
pub enum QuantumState {
    Pure(Vec<C64>),
    Mixed(DensityMatrix),
}

impl QuantumState {
    pub fn basis(dim: usize, node: usize) -> Result<Self> {
        if node == 0 || node > dim {
            return Err(Error::InvalidState(format!("node {node} outside 1..{dim}")));
        }
        let mut psi = vec![C64::new(0.0, 0.0); dim];
        psi[node - 1] = C64::new(1.0, 0.0);
        Ok(Self::Pure(psi))
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Pure(psi) => psi.len(),
            Self::Mixed(rho) => rho.dim(),
        }
    }

    pub fn is_mixed(&self) -> bool {
        matches!(self, Self::Mixed(_))
    }

    pub fn to_mixed(&self) -> DensityMatrix {
        match self {
            Self::Pure(psi) => DensityMatrix::from_pure(psi),
            Self::Mixed(rho) => rho.clone(),
        }
    }

    /// Occupation probabilities `rho_kk`.
    pub fn occupations(&self) -> Vec<f64> {
        match self {
            Self::Pure(psi) => psi.iter().map(|z| z.norm_sqr()).collect(),
            Self::Mixed(rho) => rho.diagonal(),
        }
    }

    pub fn trace(&self) -> f64 {
        match self {
            Self::Pure(psi) => psi.iter().map(|z| z.norm_sqr()).sum(),
            Self::Mixed(rho) => rho.trace().re,
        }
    }

    pub fn purity(&self) -> f64 {
        match self {
            Self::Pure(psi) => {
                let n: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
                n * n
            }
            Self::Mixed(rho) => rho.purity(),
        }
    }

    /// Checks normalisation, and for mixed states Hermiticity and
    /// non-negative populations.
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Pure(psi) => {
                if psi.iter().any(|z| !z.is_finite()) {
                    return Err(Error::InvalidState("non-finite amplitude".into()));
                }
                let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
                if (norm - 1.0).abs() > STATE_TOLERANCE {
                    return Err(Error::InvalidState(format!("state norm {norm} != 1")));
                }
            }
            Self::Mixed(rho) => {
                if rho.as_slice().iter().any(|z| !z.is_finite()) {
                    return Err(Error::InvalidState("non-finite matrix element".into()));
                }
                let herm = rho.hermiticity_error();
                if herm > STATE_TOLERANCE {
                    return Err(Error::InvalidState(format!("not Hermitian, deviation {herm}")));
                }
                let tr = rho.trace().re;
                if (tr - 1.0).abs() > STATE_TOLERANCE {
                    return Err(Error::InvalidState(format!("trace {tr} != 1")));
                }
                if let Some(p) = rho.diagonal().into_iter().find(|&p| p < -STATE_TOLERANCE) {
                    return Err(Error::InvalidState(format!("negative population {p}")));
                }
            }
        }
        Ok(())
    }
}

/// Initial Gaussian packet: 1-based centre node and probability standard
/// deviation in nodes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WavePacketSpec {
    pub center: usize,
    pub width: f64,
}

impl WavePacketSpec {
    pub fn new(center: usize, width: f64) -> Self {
        Self { center, width }
    }

    pub fn validate(&self, spec: &ChainSpec) -> Result<()> {
        if self.center == 0 || self.center > spec.n_nodes {
            return Err(Error::InvalidParameter(format!(
                "packet centre {} outside 1..{}",
                self.center, spec.n_nodes
            )));
        }
        if !(self.width > 0.0 && self.width.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "packet width must be > 0, got {}",
                self.width
            )));
        }
        Ok(())
    }
}

/// Real, zero-momentum Gaussian `psi_n ~ exp(-(n - N0)^2 / (4 sigma^2))`, so
/// that `|psi_n|^2` has standard deviation `sigma`.
pub fn gaussian_packet(spec: &ChainSpec, packet: &WavePacketSpec) -> Result<QuantumState> {
    packet.validate(spec)?;
    let n0 = packet.center as f64;
    let denom = 4.0 * packet.width * packet.width;
    let raw: Vec<f64> = (1..=spec.n_nodes)
        .map(|n| {
            let d = n as f64 - n0;
            (-d * d / denom).exp()
        })
        .collect();
    let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
    Ok(QuantumState::Pure(raw.into_iter().map(|x| C64::new(x / norm, 0.0)).collect()))
}
