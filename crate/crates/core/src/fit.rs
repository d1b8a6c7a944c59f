//! Least-squares fits shared by the tail, renewal and correlation modules.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Result of a straight-line fit `y = intercept + slope * x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub residuals: Vec<f64>,
}

/// Ordinary least squares on paired samples.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if xs.len() != ys.len() {
        return Err(Error::Degenerate(format!("length mismatch {} vs {}", xs.len(), ys.len())));
    }
    let n = xs.len();
    if n < 2 {
        return Err(Error::Degenerate("need at least two points".into()));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx <= 0.0 || !sxx.is_finite() {
        return Err(Error::Degenerate("abscissae have zero variance".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| y - intercept - slope * x).collect();
    let ss_res: f64 = residuals.iter().map(|r| r * r).sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(LineFit { slope, intercept, r2, residuals })
}

/// Inclusive index window `[lo, hi]` into a sequence indexed by `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub lo: usize,
    pub hi: usize,
}

impl Window {
    pub fn new(lo: usize, hi: usize) -> Self {
        Self { lo, hi }
    }
}

/// Fits `log y = intercept + slope log x` over the points whose abscissa lies
/// in `window`. Requires at least eight points and positive ordinates.
pub fn loglog_slope(xs: &[f64], ys: &[f64], window: Window) -> Result<LineFit> {
    let mut lx = Vec::new();
    let mut ly = Vec::new();
    for (&x, &y) in xs.iter().zip(ys) {
        if x >= window.lo as f64 && x <= window.hi as f64 {
            if !(y > 0.0) || !(x > 0.0) {
                return Err(Error::Degenerate(format!("nonpositive value at x={x}: y={y}")));
            }
            lx.push(x.ln());
            ly.push(y.ln());
        }
    }
    if lx.len() < 8 {
        return Err(Error::Degenerate(format!("window {:?} holds only {} points", window, lx.len())));
    }
    linear_fit(&lx, &ly)
}

/// Convenience wrapper for a sequence indexed by `n = 0, 1, 2, ...`.
pub fn loglog_slope_indexed(ys: &[f64], window: Window) -> Result<LineFit> {
    if window.hi >= ys.len() {
        return Err(Error::HorizonExceeded { requested: window.hi, available: ys.len().saturating_sub(1) });
    }
    let xs: Vec<f64> = (window.lo..=window.hi).map(|n| n as f64).collect();
    loglog_slope(&xs, &ys[window.lo..=window.hi], window)
}

/// Quadratic coefficient of a least-squares fit `y = a + b t + c t^2`, together
/// with the spread of `t`. Used as a curvature diagnostic on log-log data.
pub fn quadratic_curvature(ts: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    let n = ts.len();
    if n < 3 || ys.len() != n {
        return Err(Error::Degenerate("curvature needs three or more points".into()));
    }
    let mt = ts.iter().sum::<f64>() / n as f64;
    let t: Vec<f64> = ts.iter().map(|x| x - mt).collect();
    // Normal equations for the centered basis {1, t, t^2}.
    let mut a = [[0.0f64; 3]; 3];
    let mut rhs = [0.0f64; 3];
    for (ti, yi) in t.iter().zip(ys) {
        let basis = [1.0, *ti, ti * ti];
        for r in 0..3 {
            rhs[r] += basis[r] * yi;
            for c in 0..3 {
                a[r][c] += basis[r] * basis[c];
            }
        }
    }
    let m = nalgebra::Matrix3::from_fn(|r, c| a[r][c]);
    let b = nalgebra::Vector3::new(rhs[0], rhs[1], rhs[2]);
    let sol = m.lu().solve(&b).ok_or_else(|| Error::Degenerate("singular curvature system".into()))?;
    let spread = t.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    Ok((sol[2], spread))
}
