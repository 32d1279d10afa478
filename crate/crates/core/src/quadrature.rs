//! Adaptive Simpson quadrature with Richardson extrapolation.

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureOptions {
    /// Target absolute error over the whole interval.
    pub abs_tol: f64,
    /// Maximum bisection depth below each initial panel.
    pub max_depth: u32,
    /// Equal-width panels the interval is split into before adapting.
    pub panels: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self { abs_tol: 1e-9, max_depth: 48, panels: 16 }
    }
}

struct Segment {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

fn refine<F: Fn(f64) -> f64>(f: &F, s: Segment, tol: f64, depth: u32) -> Result<f64> {
    let m = 0.5 * (s.a + s.b);
    let lm = 0.5 * (s.a + m);
    let rm = 0.5 * (m + s.b);
    let flm = f(lm);
    let frm = f(rm);
    if !flm.is_finite() || !frm.is_finite() {
        return Err(Error::Numerical(format!("integrand not finite near t = {m}")));
    }
    let left = simpson(s.a, m, s.fa, flm, s.fm);
    let right = simpson(m, s.b, s.fm, frm, s.fb);
    let delta = left + right - s.whole;
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::Numerical(format!(
            "quadrature did not converge on [{}, {}] (error estimate {})",
            s.a,
            s.b,
            delta.abs() / 15.0
        )));
    }
    let l = refine(f, Segment { a: s.a, b: m, fa: s.fa, fm: flm, fb: s.fm, whole: left }, 0.5 * tol, depth - 1)?;
    let r = refine(f, Segment { a: m, b: s.b, fa: s.fm, fm: frm, fb: s.fb, whole: right }, 0.5 * tol, depth - 1)?;
    Ok(l + r)
}

/// `int_a^b f(t) dt` to absolute tolerance `opts.abs_tol`.
///
/// Fails with [`Error::Numerical`] when the depth limit is reached or the
/// integrand is not finite; a partial sum is never returned.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: QuadratureOptions) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidParameter("non-finite integration bounds".into()));
    }
    if a == b {
        return Ok(0.0);
    }
    let panels = opts.panels.max(1);
    let width = (b - a) / panels as f64;
    let tol = opts.abs_tol / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * width;
        let hi = if p + 1 == panels { b } else { a + (p + 1) as f64 * width };
        let mid = 0.5 * (lo + hi);
        let (fa, fm, fb) = (f(lo), f(mid), f(hi));
        if !(fa.is_finite() && fm.is_finite() && fb.is_finite()) {
            return Err(Error::Numerical(format!("integrand not finite on [{lo}, {hi}]")));
        }
        let whole = simpson(lo, hi, fa, fm, fb);
        total += refine(&f, Segment { a: lo, b: hi, fa, fm, fb, whole }, tol, opts.max_depth)?;
    }
    Ok(total)
}
