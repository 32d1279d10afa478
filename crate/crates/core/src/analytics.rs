//! Continuum estimates of the packet displacement and the cosine fit model.
//!
//! On an infinite static chain the centre of a zero-momentum packet follows
//! `Delta N(t) = -(4V/f) sin^2(f t / 2)`, i.e. `N'(t) = -2V sin(f t)`.
//! Replacing `V` by the modulated coupling and integrating over whole Bloch
//! periods gives
//!
//! ```text
//! Delta N_l,approx = -2V int_0^{l T_B} sin(f t) / [1 - 2a sin(w t + phi)]^3 dt
//! ```
//!
//! which for `w = f` reduces to `-12 l pi a V cos(phi) / [f (1 - 4a^2)^{5/2}]`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::quadrature::{adaptive_simpson, QuadratureOptions};
use crate::{Error, Result};

/// Absolute tolerance of [`approx_displacement_quadrature`].
pub const QUADRATURE_TOLERANCE: f64 = 1e-9;

/// Inputs of the approximate displacement.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproxParams {
    pub prefactor: f64,
    pub field_strength: f64,
    pub angular_frequency: f64,
    pub amplitude: f64,
    pub phase: f64,
    pub periods: u32,
}

impl ApproxParams {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.prefactor, self.field_strength, self.angular_frequency, self.amplitude, self.phase]
            .iter()
            .all(|x| x.is_finite());
        if !finite {
            return Err(Error::InvalidParameter("non-finite analytic parameter".into()));
        }
        if self.field_strength <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "field strength must be > 0, got {}",
                self.field_strength
            )));
        }
        if (2.0 * self.amplitude).abs() >= 1.0 {
            return Err(Error::SingularCoupling(format!(
                "|2a| = {} must be < 1",
                (2.0 * self.amplitude).abs()
            )));
        }
        if self.periods == 0 {
            return Err(Error::InvalidParameter("number of periods must be >= 1".into()));
        }
        Ok(())
    }

    pub fn is_resonant(&self) -> bool {
        self.angular_frequency == self.field_strength
    }
}

/// `-(4V/f) sin^2(f t / 2)`.
pub fn static_displacement(t: f64, prefactor: f64, field_strength: f64) -> Result<f64> {
    if field_strength == 0.0 {
        return Err(Error::InvalidParameter("Bloch period undefined for f = 0".into()));
    }
    let s = (0.5 * field_strength * t).sin();
    Ok(-4.0 * prefactor / field_strength * s * s)
}

/// `-2V sin(f t)`.
pub fn displacement_rate(t: f64, prefactor: f64, field_strength: f64) -> f64 {
    -2.0 * prefactor * (field_strength * t).sin()
}

/// Quadrature of the displacement integral over `l` Bloch periods.
pub fn approx_displacement_quadrature(p: &ApproxParams) -> Result<f64> {
    p.validate()?;
    let f = p.field_strength;
    let (w, a, phi) = (p.angular_frequency, p.amplitude, p.phase);
    let end = f64::from(p.periods) * 2.0 * PI / f;
    let cycles_per_period = (w / f).ceil().max(1.0) as usize;
    let opts = QuadratureOptions {
        abs_tol: QUADRATURE_TOLERANCE / (2.0 * p.prefactor.abs()).max(1.0),
        panels: 16 * p.periods as usize * cycles_per_period,
        ..Default::default()
    };
    let integral = adaptive_simpson(
        |t| {
            let d = 1.0 - 2.0 * a * (w * t + phi).sin();
            (f * t).sin() / (d * d * d)
        },
        0.0,
        end,
        opts,
    )?;
    Ok(-2.0 * p.prefactor * integral)
}

/// Closed form at resonance `w = f`.
pub fn approx_displacement_resonant(p: &ApproxParams) -> Result<f64> {
    p.validate()?;
    if !p.is_resonant() {
        return Err(Error::InvalidParameter(format!(
            "closed form needs w = f, got w = {} and f = {}",
            p.angular_frequency, p.field_strength
        )));
    }
    let a = p.amplitude;
    let l = f64::from(p.periods);
    let v = -12.0 * l * PI * a * p.prefactor * p.phase.cos()
        / (p.field_strength * (1.0 - 4.0 * a * a).powf(2.5));
    // -0.0 at a = 0 or cos(phi) = -0.0 would print as "-0".
    Ok(if v == 0.0 { 0.0 } else { v })
}

/// Closed form at resonance, quadrature otherwise.
pub fn approx_displacement(p: &ApproxParams) -> Result<f64> {
    if p.is_resonant() {
        approx_displacement_resonant(p)
    } else {
        approx_displacement_quadrature(p)
    }
}

/// Approximate displacement as a function of `f` at fixed chain frequency,
/// multiplied by `scale` (1 for the uniform chain, 1/2 as a rough estimate
/// for the lowest eigenmode).
pub fn detuning_curve(base: &ApproxParams, fields: &[f64], scale: f64) -> Result<Vec<(f64, f64)>> {
    fields
        .iter()
        .map(|&f| {
            let p = ApproxParams { field_strength: f, ..*base };
            Ok((f, scale * approx_displacement(&p)?))
        })
        .collect()
}

/// `abar / (1 - 4 abar^2)^{5/2}`, the amplitude factor of the fit model.
fn amplitude_factor(mean_amplitude: f64) -> f64 {
    mean_amplitude / (1.0 - 4.0 * mean_amplitude * mean_amplitude).powf(2.5)
}

/// `beta abar cos(phi + alpha) / (1 - 4 abar^2)^{5/2}`.
pub fn fit_model(phase: f64, alpha: f64, beta: f64, mean_amplitude: f64) -> f64 {
    beta * amplitude_factor(mean_amplitude) * (phase + alpha).cos()
}

/// Least-squares estimate of `(alpha_l, beta_l)` for one `l`.
///
/// `alpha` lies in `(-pi/2, pi/2]` and `beta` carries the sign of the
/// displacement at `phi = -alpha`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodFit {
    pub alpha: f64,
    pub beta: f64,
    pub residual_rms: f64,
    pub points: usize,
}

/// Fit for the requested `l`, plus every `l` present in the data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub l: u32,
    pub mean_amplitude: f64,
    pub alpha: f64,
    pub beta: f64,
    pub residual_rms: f64,
    pub per_l: BTreeMap<u32, PeriodFit>,
}

/// Fits `(phi, Delta N_l)` pairs with the cosine model.
///
/// Linearised as `beta cos(phi + alpha) = A cos(phi) + B sin(phi)` and solved
/// through the 2x2 normal equations.
pub fn fit_displacement_model(data: &[(f64, f64)], mean_amplitude: f64) -> Result<PeriodFit> {
    if data.iter().any(|(p, d)| !p.is_finite() || !d.is_finite()) {
        return Err(Error::DegenerateFit("non-finite data point".into()));
    }
    let mut distinct: Vec<f64> = data.iter().map(|(p, _)| p.rem_euclid(2.0 * PI)).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    if distinct.len() >= 2 && (distinct[0] + 2.0 * PI - distinct[distinct.len() - 1]).abs() < 1e-9 {
        distinct.pop();
    }
    if distinct.len() < 3 {
        return Err(Error::DegenerateFit(format!(
            "need at least 3 distinct phases, got {}",
            distinct.len()
        )));
    }
    let g = amplitude_factor(mean_amplitude);
    if g == 0.0 || !g.is_finite() || (2.0 * mean_amplitude).abs() >= 1.0 {
        return Err(Error::DegenerateFit(format!(
            "mean amplitude {mean_amplitude} gives no usable model scale"
        )));
    }

    let (mut cc, mut cs, mut ss, mut cy, mut sy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(phi, y) in data {
        let (s, c) = phi.sin_cos();
        let y = y / g;
        cc += c * c;
        cs += c * s;
        ss += s * s;
        cy += c * y;
        sy += s * y;
    }
    let det = cc * ss - cs * cs;
    if det.abs() <= 1e-12 * (cc + ss).powi(2) {
        return Err(Error::DegenerateFit("singular design matrix".into()));
    }
    let a = (ss * cy - cs * sy) / det;
    let b = (cc * sy - cs * cy) / det;

    let mut alpha = (-b).atan2(a);
    let mut beta = a.hypot(b);
    if alpha > 0.5 * PI {
        alpha -= PI;
        beta = -beta;
    } else if alpha <= -0.5 * PI {
        alpha += PI;
        beta = -beta;
    }

    let sq: f64 = data
        .iter()
        .map(|&(phi, y)| (y - fit_model(phi, alpha, beta, mean_amplitude)).powi(2))
        .sum();
    Ok(PeriodFit {
        alpha,
        beta,
        residual_rms: (sq / data.len() as f64).sqrt(),
        points: data.len(),
    })
}

/// Fits every `l` found in `(l, phi, Delta N_l)` rows and reports `l`.
pub fn fit_periods(rows: &[(u32, f64, f64)], mean_amplitude: f64, l: u32) -> Result<FitResult> {
    let mut grouped: BTreeMap<u32, Vec<(f64, f64)>> = BTreeMap::new();
    for &(period, phi, dn) in rows {
        grouped.entry(period).or_default().push((phi, dn));
    }
    if !grouped.contains_key(&l) {
        return Err(Error::DegenerateFit(format!("no data for l = {l}")));
    }
    let mut per_l = BTreeMap::new();
    for (period, data) in &grouped {
        match fit_displacement_model(data, mean_amplitude) {
            Ok(fit) => {
                per_l.insert(*period, fit);
            }
            Err(e) if *period == l => return Err(e),
            Err(_) => {}
        }
    }
    let main = per_l[&l];
    Ok(FitResult {
        l,
        mean_amplitude,
        alpha: main.alpha,
        beta: main.beta,
        residual_rms: main.residual_rms,
        per_l,
    })
}
