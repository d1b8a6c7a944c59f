//! Piecewise monotone interval maps with a neutral fixed point at the origin.
//!
//! Three families are provided: the Liverani-Saussol-Vaienti map
//! `x(1 + (c1 x)^γ)` on `[0,1/2)` glued to `2x - 1`, the Thaler-type map
//! `x(1 + c2 x^γ) mod 1`, and the doubling map as a uniformly expanding
//! control. Branch domains are half-open `[lo, hi)`.
//!
//! Besides forward evaluation each branch offers an inverse accurate to
//! relative machine precision and *difference* forms `F(x+e) - F(x)` and
//! its inverse. The difference forms keep full relative accuracy when `e`
//! is tiny compared with `x`, which deep cylinders and periodic-orbit
//! expansions rely on.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The map families understood by the crate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    Lsv,
    Thaler,
    Doubling,
}

/// Closed-form law of a single branch.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum BranchLaw {
    /// `x + a x^(γ+1) - shift`
    Power { a: f64, gamma: f64, shift: f64 },
    /// `slope x - shift`
    Affine { slope: f64, shift: f64 },
}

/// One monotone branch with half-open domain `[lo, hi)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub id: usize,
    pub lo: f64,
    pub hi: f64,
    pub law: BranchLaw,
}

/// `(x+e)^p - x^p` without cancellation.
fn pow_diff(x: f64, e: f64, p: f64) -> f64 {
    if x > 0.0 {
        let r = e / x;
        if r <= -1.0 {
            return -x.powf(p);
        }
        x.powf(p) * (p * r.ln_1p()).exp_m1()
    } else {
        e.max(0.0).powf(p)
    }
}

impl Branch {
    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x < self.hi
    }

    /// Forward value without range reduction or clamping.
    pub fn forward(&self, x: f64) -> f64 {
        match self.law {
            BranchLaw::Power { a, gamma, shift } => x + a * x * x.powf(gamma) - shift,
            BranchLaw::Affine { slope, shift } => slope * x - shift,
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match self.law {
            BranchLaw::Power { a, gamma, .. } => 1.0 + a * (gamma + 1.0) * x.powf(gamma),
            BranchLaw::Affine { slope, .. } => slope,
        }
    }

    /// `F(x+e) - F(x)` evaluated to full relative precision.
    pub fn forward_diff(&self, x: f64, e: f64) -> f64 {
        match self.law {
            BranchLaw::Power { a, gamma, .. } => e + a * pow_diff(x, e, gamma + 1.0),
            BranchLaw::Affine { slope, .. } => slope * e,
        }
    }

    /// Image interval `[F(lo), F(hi))`.
    pub fn image(&self) -> (f64, f64) {
        (self.forward(self.lo), self.forward(self.hi))
    }

    /// True when the branch maps its domain onto `[0,1)`.
    pub fn is_full(&self) -> bool {
        let (a, b) = self.image();
        a.abs() < 1e-12 && (b - 1.0).abs() < 1e-12
    }

    /// Solves `F(x) = y` on the branch domain. The caller guarantees that
    /// `y` lies in the image; the result is clamped to the domain.
    pub fn inverse(&self, y: f64) -> f64 {
        match self.law {
            BranchLaw::Affine { slope, shift } => ((y + shift) / slope).clamp(self.lo, self.hi),
            BranchLaw::Power { a, gamma, shift } => {
                let target = y + shift;
                let g = |x: f64| x + a * x * x.powf(gamma) - target;
                let mut lo = self.lo;
                let mut hi = self.hi;
                let mut x = if shift == 0.0 {
                    // One fixed-point step of x = y / (1 + a x^γ) starting from y.
                    y / (1.0 + a * y.max(0.0).powf(gamma))
                } else {
                    // Linearize about the left end, where F(lo) = 0.
                    lo + y / self.derivative(lo)
                };
                if !(x > lo && x < hi) {
                    x = 0.5 * (lo + hi);
                }
                for _ in 0..200 {
                    let r = g(x);
                    if r == 0.0 {
                        return x;
                    }
                    if r > 0.0 {
                        hi = x;
                    } else {
                        lo = x;
                    }
                    let step = r / self.derivative(x);
                    let mut next = x - step;
                    if !(next > lo && next < hi) {
                        next = 0.5 * (lo + hi);
                    }
                    let scale = next.abs().max(f64::MIN_POSITIVE);
                    if (next - x).abs() <= 2.0 * f64::EPSILON * scale || hi - lo <= 2.0 * f64::EPSILON * scale {
                        return next;
                    }
                    x = next;
                }
                x
            }
        }
    }

    /// Solves `F(x+e) - F(x) = d` for `e`, to full relative precision.
    pub fn inverse_diff(&self, x: f64, d: f64) -> f64 {
        match self.law {
            BranchLaw::Affine { slope, .. } => d / slope,
            BranchLaw::Power { .. } => {
                if d == 0.0 {
                    return 0.0;
                }
                // F is increasing and convex, so Newton from d / F'(x) approaches
                // the root monotonically from above.
                let mut e = d / self.derivative(x);
                for _ in 0..100 {
                    let r = self.forward_diff(x, e) - d;
                    let step = r / self.derivative((x + e).max(0.0));
                    let next = e - step;
                    if (next - e).abs() <= 2.0 * f64::EPSILON * next.abs() {
                        return next;
                    }
                    e = next;
                }
                e
            }
        }
    }
}

/// A piecewise monotone map of `[0,1)` from one of the supported families.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntermittentMap {
    pub family: Family,
    /// Exponent of the neutral fixed point; `None` for the doubling map.
    pub gamma: Option<f64>,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub branches: Vec<Branch>,
}

impl IntermittentMap {
    /// `x(1 + (c1 x)^γ)` on `[0,1/2)`, `2x - 1` on `[1/2,1)`.
    pub fn lsv(gamma: f64, c1: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!("gamma must be positive, got {gamma}")));
        }
        if !(c1 > 0.0 && c1 <= 2.0) {
            return Err(Error::InvalidParameter(format!("c1 must lie in (0,2], got {c1}")));
        }
        let a = c1.powf(gamma);
        Ok(Self {
            family: Family::Lsv,
            gamma: Some(gamma),
            c1: Some(c1),
            c2: None,
            branches: vec![
                Branch { id: 0, lo: 0.0, hi: 0.5, law: BranchLaw::Power { a, gamma, shift: 0.0 } },
                Branch { id: 1, lo: 0.5, hi: 1.0, law: BranchLaw::Affine { slope: 2.0, shift: 1.0 } },
            ],
        })
    }

    /// `x(1 + c2 x^γ) mod 1`. Branch `j` is where `x(1 + c2 x^γ)` lies in `[j, j+1)`.
    pub fn thaler(gamma: f64, c2: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!("gamma must be positive, got {gamma}")));
        }
        if !(c2 > 0.0 && c2.is_finite()) {
            return Err(Error::InvalidParameter(format!("c2 must be positive, got {c2}")));
        }
        let lift = |x: f64| x + c2 * x * x.powf(gamma);
        let top = lift(1.0);
        let mut cuts = vec![0.0];
        let mut j = 1.0;
        while j < top - 1e-12 {
            let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if lift(mid) < j {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            cuts.push(hi);
            j += 1.0;
        }
        cuts.push(1.0);
        let branches = cuts
            .windows(2)
            .enumerate()
            .map(|(id, w)| Branch {
                id,
                lo: w[0],
                hi: w[1],
                law: BranchLaw::Power { a: c2, gamma, shift: id as f64 },
            })
            .collect();
        Ok(Self { family: Family::Thaler, gamma: Some(gamma), c1: None, c2: Some(c2), branches })
    }

    /// `2x mod 1`.
    pub fn doubling() -> Self {
        Self {
            family: Family::Doubling,
            gamma: None,
            c1: None,
            c2: None,
            branches: vec![
                Branch { id: 0, lo: 0.0, hi: 0.5, law: BranchLaw::Affine { slope: 2.0, shift: 0.0 } },
                Branch { id: 1, lo: 0.5, hi: 1.0, law: BranchLaw::Affine { slope: 2.0, shift: 1.0 } },
            ],
        }
    }

    /// Tail exponent `1/γ`; `None` for the doubling map (exponential tails).
    pub fn beta(&self) -> Option<f64> {
        self.gamma.map(|g| 1.0 / g)
    }

    /// Markov presets: LSV with `c1 = 2`, Thaler with integer `c2`, doubling.
    pub fn is_markov(&self) -> bool {
        self.branches.iter().all(Branch::is_full)
    }

    pub fn branch(&self, id: usize) -> Result<&Branch> {
        self.branches.get(id).ok_or(Error::UnknownBranch(id))
    }

    /// Index of the branch whose domain contains `x`.
    pub fn branch_index(&self, x: f64) -> Result<usize> {
        if !(0.0..1.0).contains(&x) {
            return Err(Error::Domain { x });
        }
        let idx = self.branches.partition_point(|b| b.lo <= x);
        Ok(idx - 1)
    }

    pub fn evaluate(&self, x: f64) -> Result<f64> {
        let b = &self.branches[self.branch_index(x)?];
        Ok(b.forward(x).clamp(0.0, 1.0 - f64::EPSILON / 2.0))
    }

    /// `f'(x)`. Interior branch boundaries are rejected because the two
    /// one-sided derivatives differ; use [`Self::branch_derivative`].
    pub fn derivative(&self, x: f64) -> Result<f64> {
        let idx = self.branch_index(x)?;
        if idx > 0 && x == self.branches[idx].lo {
            return Err(Error::BranchBoundary { x });
        }
        Ok(self.branches[idx].derivative(x))
    }

    pub fn branch_derivative(&self, id: usize, x: f64) -> Result<f64> {
        Ok(self.branch(id)?.derivative(x))
    }

    /// The unique `x` in branch `id` with `f(x) = y`.
    pub fn branch_inverse(&self, id: usize, y: f64) -> Result<f64> {
        let b = self.branch(id)?;
        let (lo, hi) = b.image();
        let tol = 1e-14;
        if !(y >= lo - tol && y < hi + tol) || !y.is_finite() {
            return Err(Error::OutsideImage { branch: id, y, lo, hi });
        }
        Ok(b.inverse(y))
    }

    /// `(x0, f x0, ..., f^n x0)`.
    pub fn orbit(&self, x0: f64, n: usize) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(n + 1);
        let mut x = x0;
        if !(0.0..1.0).contains(&x) {
            return Err(Error::Domain { x });
        }
        out.push(x);
        for _ in 0..n {
            x = self.evaluate(x)?;
            out.push(x);
        }
        Ok(out)
    }
}
