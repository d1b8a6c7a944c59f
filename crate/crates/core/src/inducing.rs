//! First-return inducing on the rightmost full branch `Y`.
//!
//! Cylinders of constant return time are generated by pulling `Y` back
//! through words of excursion branches. The pull-back is carried out in
//! difference form, so cylinder lengths keep full relative precision even
//! when the cylinders accumulate at the left end of `Y`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{self, LineFit, Window};
use crate::maps::IntermittentMap;
use crate::quad;

/// A depth-one element of the partition: a maximal interval on which the
/// return time is constant and the induced map is a single full branch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cylinder {
    pub id: usize,
    pub lo: f64,
    pub hi: f64,
    /// Length computed without cancellation.
    pub length: f64,
    pub phi: usize,
    /// Branch ids visited at times `0..phi`; the first entry is the return branch.
    pub itinerary: Vec<u8>,
    /// Cylinder whose excursion word is this one's with the first excursion
    /// symbol removed; `None` for the return-time-one cylinder.
    pub parent: Option<usize>,
}

/// Part of `Y` whose return time was not resolved, either because it
/// exceeds `phi_max` or because the branch word was pruned.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnresolvedRegion {
    pub lo: f64,
    pub hi: f64,
    pub length: f64,
    /// Every point of the region has return time at least this large.
    pub min_phi: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolicMetric {
    pub theta: f64,
}

impl SymbolicMetric {
    pub fn distance(&self, separation: usize) -> f64 {
        self.theta.powi(separation as i32)
    }
}

/// Construction parameters for [`InducingScheme`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchemeConfig {
    pub phi_max: usize,
    pub theta: f64,
    pub epsilon: f64,
    /// Branch words whose pulled-back interval is shorter than this are
    /// dropped and reported as unresolved. Zero disables pruning.
    pub prune_length: f64,
    /// Hard cap on the number of cylinders.
    pub max_cylinders: usize,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        Self { phi_max: 4096, theta: 0.75, epsilon: 0.5, prune_length: 0.0, max_cylinders: 4_000_000 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InducingScheme {
    pub map: IntermittentMap,
    pub y_lo: f64,
    pub y_hi: f64,
    pub return_branch: usize,
    pub excursion_branches: Vec<usize>,
    pub phi_max: usize,
    pub metric: SymbolicMetric,
    pub epsilon: f64,
    /// Second-level return time; identically one for first-return inducing.
    pub rho: usize,
    pub alpha: Vec<Cylinder>,
    pub unresolved: Vec<UnresolvedRegion>,
    sorted: Vec<usize>,
}

/// Pull-back state of one excursion word `w`: `Ψ_w` is the composition of
/// the inverse branches along `w`.
#[derive(Clone, Copy, Debug)]
struct WordNode {
    parent_cylinder: Option<usize>,
    /// `Ψ_w(y_lo)` and `Ψ_w(y_hi) - Ψ_w(y_lo)`.
    u_lo: f64,
    du: f64,
    /// `Ψ_w(0)` and `Ψ_w(y_lo) - Ψ_w(0)`.
    u0: f64,
    d0: f64,
}

impl InducingScheme {
    /// Builds the first-return scheme on the rightmost branch domain and its
    /// partition up to return time `phi_max`. Maps that are not Markov are
    /// rejected.
    pub fn new(map: IntermittentMap, config: &SchemeConfig) -> Result<Self> {
        if !map.is_markov() {
            return Err(Error::NonMarkov(format!(
                "{:?} with c1={:?}, c2={:?} has a branch that is not full",
                map.family, map.c1, map.c2
            )));
        }
        if config.phi_max == 0 {
            return Err(Error::InvalidParameter("phi_max must be positive".into()));
        }
        if !(config.theta > 0.0 && config.theta < 1.0) {
            return Err(Error::InvalidParameter(format!("theta must lie in (0,1), got {}", config.theta)));
        }
        let return_branch = map.branches.len() - 1;
        let yb = &map.branches[return_branch];
        let (y_lo, y_hi) = (yb.lo, yb.hi);
        let excursion_branches: Vec<usize> = (0..return_branch).collect();
        let mut scheme = Self {
            map,
            y_lo,
            y_hi,
            return_branch,
            excursion_branches,
            phi_max: config.phi_max,
            metric: SymbolicMetric { theta: config.theta },
            epsilon: config.epsilon,
            rho: 1,
            alpha: Vec::new(),
            unresolved: Vec::new(),
            sorted: Vec::new(),
        };
        scheme.build_partition(config)?;
        Ok(scheme)
    }

    fn build_partition(&mut self, config: &SchemeConfig) -> Result<()> {
        let ret = self.map.branches[self.return_branch].clone();
        let mut level = vec![WordNode {
            parent_cylinder: None,
            u_lo: self.y_lo,
            du: self.y_hi - self.y_lo,
            u0: 0.0,
            d0: self.y_lo,
        }];
        let mut words: Vec<Vec<u8>> = vec![vec![]];
        for depth in 1..=config.phi_max {
            let mut next = Vec::new();
            let mut next_words = Vec::new();
            for (node, word) in level.iter().zip(&words) {
                let z_lo = ret.inverse(node.u_lo);
                let length = ret.inverse_diff(z_lo, node.du);
                let id = self.alpha.len();
                let mut itinerary = Vec::with_capacity(depth);
                itinerary.push(self.return_branch as u8);
                itinerary.extend_from_slice(word);
                self.alpha.push(Cylinder {
                    id,
                    lo: z_lo,
                    hi: z_lo + length,
                    length,
                    phi: depth,
                    itinerary,
                    parent: node.parent_cylinder,
                });
                if self.alpha.len() > config.max_cylinders {
                    return Err(Error::InvalidParameter(format!(
                        "more than {} cylinders; raise prune_length or lower phi_max",
                        config.max_cylinders
                    )));
                }
                if depth == config.phi_max {
                    self.push_unresolved(node, depth + 1);
                    continue;
                }
                for b in self.excursion_branches.clone() {
                    let br = &self.map.branches[b];
                    let x_lo = br.inverse(node.u_lo);
                    let dx = br.inverse_diff(x_lo, node.du);
                    let x0 = br.inverse(node.u0);
                    let dx0 = br.inverse_diff(x0, node.d0);
                    let child = WordNode { parent_cylinder: Some(id), u_lo: x_lo, du: dx, u0: x0, d0: dx0 };
                    if config.prune_length > 0.0 {
                        let z0 = ret.inverse(child.u0);
                        let full = ret.inverse_diff(z0, child.d0 + child.du);
                        if full < config.prune_length {
                            self.push_unresolved(&child, depth + 1);
                            continue;
                        }
                    }
                    let mut w = Vec::with_capacity(word.len() + 1);
                    w.push(b as u8);
                    w.extend_from_slice(word);
                    next.push(child);
                    next_words.push(w);
                }
            }
            if next.is_empty() {
                break;
            }
            level = next;
            words = next_words;
        }
        let mut sorted: Vec<usize> = (0..self.alpha.len()).collect();
        sorted.sort_by(|&a, &b| self.alpha[a].lo.total_cmp(&self.alpha[b].lo));
        self.sorted = sorted;
        Ok(())
    }

    /// Records `B_Y^{-1}(Ψ_w([0, y_lo)))`, the points whose return time
    /// exceeds the word depth.
    fn push_unresolved(&mut self, node: &WordNode, min_phi: usize) {
        let ret = &self.map.branches[self.return_branch];
        let lo = ret.inverse(node.u0);
        let length = ret.inverse_diff(lo, node.d0);
        if length > 0.0 {
            self.unresolved.push(UnresolvedRegion { lo, hi: lo + length, length, min_phi });
        }
    }

    pub fn y_length(&self) -> f64 {
        self.y_hi - self.y_lo
    }

    pub fn in_y(&self, x: f64) -> bool {
        x >= self.y_lo && x < self.y_hi
    }

    /// Lebesgue measure of the unresolved part of `Y`.
    pub fn unresolved_length(&self) -> f64 {
        self.unresolved.iter().map(|r| r.length).sum()
    }

    /// Lebesgue measure of the unresolved part of `Y` as a fraction of `|Y|`.
    pub fn truncation_mass(&self) -> f64 {
        self.unresolved_length() / self.y_length()
    }

    /// Greatest common divisor of the represented return times.
    pub fn phi_gcd(&self) -> usize {
        fn gcd(a: usize, b: usize) -> usize {
            if b == 0 {
                a
            } else {
                gcd(b, a % b)
            }
        }
        self.alpha.iter().fold(0, |g, c| gcd(g, c.phi))
    }

    /// Index into `alpha` of the cylinder containing `z`, if resolved.
    pub fn cylinder_of(&self, z: f64) -> Option<usize> {
        let pos = self.sorted.partition_point(|&i| self.alpha[i].lo <= z);
        if pos == 0 {
            return None;
        }
        let c = self.sorted[pos - 1];
        (z < self.alpha[c].hi).then_some(c)
    }

    /// `(τ(x), f^τ(x))` for `x ∈ Y`.
    pub fn first_return(&self, x: f64, cap: usize) -> Result<(usize, f64)> {
        let (tau, y, _) = self.first_return_word(x, cap)?;
        Ok((tau, y))
    }

    /// First return together with the branch word visited on the way.
    pub fn first_return_word(&self, x: f64, cap: usize) -> Result<(usize, f64, Vec<u8>)> {
        if !self.in_y(x) {
            return Err(Error::InvalidParameter(format!("{x} is not in Y = [{}, {})", self.y_lo, self.y_hi)));
        }
        let mut word = Vec::new();
        let mut y = x;
        for n in 1..=cap {
            word.push(self.map.branch_index(y)? as u8);
            y = self.map.evaluate(y)?;
            if self.in_y(y) {
                return Ok((n, y, word));
            }
        }
        Err(Error::Escape { x, cap })
    }

    /// Return time capped at `cap`: `None` when the orbit has not returned
    /// within `cap` steps.
    pub fn return_time_capped(&self, x: f64, cap: usize) -> Option<usize> {
        let mut y = x;
        for n in 1..=cap {
            y = self.map.evaluate(y).ok()?;
            if self.in_y(y) {
                return Some(n);
            }
        }
        None
    }

    /// Inverse of the induced branch with the given itinerary, with its
    /// derivative: returns `(z, dz/dy)` where `G z = y`.
    pub fn pull_back(&self, itinerary: &[u8], y: f64) -> (f64, f64) {
        let mut x = y;
        let mut jac = 1.0;
        for &b in itinerary.iter().rev() {
            let br = &self.map.branches[b as usize];
            x = br.inverse(x);
            jac /= br.derivative(x);
        }
        (x, jac)
    }

    /// Forward image along an explicit itinerary (no branch lookup).
    pub fn push_forward(&self, itinerary: &[u8], z: f64) -> f64 {
        itinerary.iter().fold(z, |x, &b| self.map.branches[b as usize].forward(x))
    }

    /// Induced map `G z` and `φ(z)`.
    pub fn induced(&self, z: f64) -> Result<(f64, usize)> {
        let (tau, y) = self.first_return(z, 1 << 26)?;
        Ok((y, tau))
    }

    /// Separation time `s(z, z')` with respect to the partition, capped at `depth`.
    pub fn separation_time(&self, z: f64, zp: f64, depth: usize) -> Result<Separation> {
        if z == zp {
            return Ok(Separation::AtLeast(depth));
        }
        let (mut a, mut b) = (z, zp);
        for s in 0..depth {
            let (_, ga, wa) = self.first_return_word(a, 1 << 26)?;
            let (_, gb, wb) = self.first_return_word(b, 1 << 26)?;
            if wa != wb {
                return Ok(Separation::Exact(s));
            }
            if ga == gb {
                return Ok(Separation::AtLeast(depth));
            }
            a = ga;
            b = gb;
        }
        Ok(Separation::AtLeast(depth))
    }
}

/// Outcome of [`InducingScheme::separation_time`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Separation {
    Exact(usize),
    /// The cap was reached; the true value is at least this.
    AtLeast(usize),
}

impl Separation {
    pub fn value(self) -> usize {
        match self {
            Separation::Exact(s) | Separation::AtLeast(s) => s,
        }
    }
}

/// Piecewise-constant density on an equal-width grid of `Y`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellDensity {
    pub y_lo: f64,
    pub y_hi: f64,
    /// Density value on each cell; integrates to one over `Y`.
    pub values: Vec<f64>,
}

impl CellDensity {
    pub fn uniform(y_lo: f64, y_hi: f64, m: usize) -> Self {
        Self { y_lo, y_hi, values: vec![1.0 / (y_hi - y_lo); m] }
    }

    fn width(&self) -> f64 {
        (self.y_hi - self.y_lo) / self.values.len() as f64
    }

    pub fn cell_of(&self, x: f64) -> usize {
        let j = ((x - self.y_lo) / self.width()).floor();
        (j.max(0.0) as usize).min(self.values.len() - 1)
    }

    pub fn at(&self, x: f64) -> f64 {
        self.values[self.cell_of(x)]
    }

    /// Piecewise-linear interpolation through the cell centers; constant
    /// beyond the outermost centers.
    pub fn smooth_at(&self, x: f64) -> f64 {
        let w = self.width();
        let t = (x - self.y_lo) / w - 0.5;
        let m = self.values.len();
        if t <= 0.0 {
            return self.values[0];
        }
        if t >= (m - 1) as f64 {
            return self.values[m - 1];
        }
        let j = t.floor() as usize;
        let f = t - j as f64;
        self.values[j] * (1.0 - f) + self.values[j + 1] * f
    }

    /// Measure of `[lo, hi)`, given its cancellation-free `length`.
    pub fn mass(&self, lo: f64, hi: f64, length: f64) -> f64 {
        let (ja, jb) = (self.cell_of(lo), self.cell_of(hi));
        if ja == jb || hi <= self.y_lo + (jb as f64) * self.width() {
            return self.values[ja] * length;
        }
        let w = self.width();
        let mut total = self.values[ja] * (self.y_lo + (ja as f64 + 1.0) * w - lo);
        for j in (ja + 1)..jb {
            total += self.values[j] * w;
        }
        total + self.values[jb] * (hi - (self.y_lo + jb as f64 * w))
    }
}

/// Weighting used for tail statistics.
#[derive(Clone, Copy, Debug)]
pub enum Weighting<'a> {
    /// Normalized Lebesgue measure on `Y`.
    Lebesgue,
    /// A probability density on `Y`.
    Density(&'a CellDensity),
}

/// `μ(φ > n)` for `n = 0..=N` together with `μ(φ = n)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailDistribution {
    /// `tail[n] = μ(φ > n)`.
    pub tail: Vec<f64>,
    /// `point[n] = μ(φ = n)`; `point[0] = 0`.
    pub point: Vec<f64>,
    /// Measure of the unresolved region, included in every tail value.
    pub unresolved: f64,
}

/// Exact tail distribution from the partition.
pub fn tail_distribution(scheme: &InducingScheme, weighting: Weighting<'_>, n_max: usize) -> TailDistribution {
    let mass = |lo: f64, hi: f64, len: f64| match weighting {
        Weighting::Lebesgue => len / scheme.y_length(),
        Weighting::Density(d) => d.mass(lo, hi, len),
    };
    let top = scheme.phi_max.max(n_max);
    let mut point = vec![0.0; top + 2];
    for c in &scheme.alpha {
        point[c.phi] += mass(c.lo, c.hi, c.length);
    }
    let unresolved: f64 = scheme.unresolved.iter().map(|r| mass(r.lo, r.hi, r.length)).sum();
    let mut tail = vec![0.0; top + 1];
    let mut acc = unresolved;
    for n in (0..=top).rev() {
        tail[n] = acc;
        acc += point[n];
    }
    // Normalize so that μ(φ > 0) = 1 exactly.
    let total = tail[0];
    tail.truncate(n_max + 1);
    point.truncate(n_max + 1);
    TailDistribution {
        tail: tail.iter().map(|t| t / total).collect(),
        point: point.iter().map(|p| p / total).collect(),
        unresolved: unresolved / total,
    }
}

/// Monte Carlo estimate of `μ(φ > n)` from uniform samples on `Y`,
/// optionally reweighted by a density. Returns `(mass, stderr)`.
pub fn monte_carlo_tail(
    scheme: &InducingScheme,
    samples: usize,
    n_max: usize,
    seed: u64,
    density: Option<&CellDensity>,
) -> (Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = vec![0.0; n_max + 1];
    let mut sum2 = vec![0.0; n_max + 1];
    let ylen = scheme.y_length();
    for _ in 0..samples {
        let y = scheme.y_lo + ylen * rng.gen::<f64>();
        let w = density.map_or(1.0, |d| d.at(y) * ylen);
        let tau = scheme.return_time_capped(y, n_max + 1).unwrap_or(n_max + 1);
        for n in 0..tau.min(n_max + 1) {
            sum[n] += w;
            sum2[n] += w * w;
        }
    }
    let s = samples as f64;
    let mean: Vec<f64> = sum.iter().map(|a| a / s).collect();
    let se = sum2
        .iter()
        .zip(&mean)
        .map(|(q, m)| ((q / s - m * m).max(0.0) / s).sqrt())
        .collect();
    (mean, se)
}

/// Power-law fit of a tail sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub beta_hat: f64,
    pub c_hat: f64,
    pub r2: f64,
    /// Quadratic coefficient in `log n` times the squared half-spread, in log units.
    pub curvature: f64,
    /// False when the curvature diagnostic rejects a power law.
    pub power_law: bool,
}

/// Curvature above this many log units marks the data as not a power law.
pub const CURVATURE_LIMIT: f64 = 0.25;

/// Least-squares fit of `log tail[n]` against `log n` on `window`.
pub fn fit_tail_exponent(tail: &[f64], window: Window) -> Result<TailFit> {
    let f: LineFit = fit::loglog_slope_indexed(tail, window)?;
    let ts: Vec<f64> = (window.lo..=window.hi).map(|n| (n as f64).ln()).collect();
    let ys: Vec<f64> = tail[window.lo..=window.hi].iter().map(|t| t.ln()).collect();
    let (c, spread) = fit::quadratic_curvature(&ts, &ys)?;
    let curvature = c.abs() * spread * spread;
    Ok(TailFit {
        beta_hat: -f.slope,
        c_hat: f.intercept.exp(),
        r2: f.r2,
        curvature,
        power_law: curvature <= CURVATURE_LIMIT,
    })
}

/// Result of the distortion scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistortionEstimate {
    pub c3_hat: f64,
    /// Running maximum after each depth `1..=depth`.
    pub by_depth: Vec<f64>,
    pub ratio_part: f64,
    pub holder_part: f64,
}

/// Return times of the first-level cylinders sampled by the distortion scan.
const DISTORTION_PHIS: [usize; 7] = [1, 2, 3, 4, 8, 16, 64];

/// Empirical distortion constant: the larger of
/// `max e^{g_n(z)} / μ_Z(a)` and
/// `max |e^{g_n(z)} - e^{g_n(z')}| / (μ_Z(a) d_θ(G^n z, G^n z'))`
/// over sampled `n`-cylinders `a` with `n ≤ depth`.
pub fn estimate_distortion(scheme: &InducingScheme, density: &dyn Fn(f64) -> f64, depth: usize) -> Result<DistortionEstimate> {
    let base: Vec<&Cylinder> = DISTORTION_PHIS
        .iter()
        .filter_map(|&p| scheme.alpha.iter().find(|c| c.phi == p))
        .collect();
    if base.is_empty() {
        return Err(Error::InvalidParameter("partition is empty".into()));
    }
    // Integration nodes on Y: 8 panels of 8-point Gauss-Legendre.
    let (gx, gw) = quad::gauss_legendre(8);
    let panels = 8;
    let h = scheme.y_length() / panels as f64;
    let mut qy = Vec::new();
    let mut qw = Vec::new();
    for p in 0..panels {
        let a = scheme.y_lo + p as f64 * h;
        let (x, w) = quad::mapped(&gx, &gw, a, a + h);
        qy.extend(x);
        qw.extend(w);
    }
    // Pairs (y, y') in Y with their symbolic distance.
    let mut pairs = Vec::new();
    for i in 0..9 {
        let y = scheme.y_lo + scheme.y_length() * (i as f64 + 0.1234567) / 10.0;
        for &rel in &[1e-2, 1e-4, 1e-6] {
            let yp = y + rel * scheme.y_length();
            let s = scheme.separation_time(y, yp, 40)?.value();
            pairs.push((y, yp, scheme.metric.distance(s)));
        }
    }

    let mut ratio_part = 0.0f64;
    let mut holder_part = 0.0f64;
    let mut by_depth = Vec::with_capacity(depth);
    let mut frontier: Vec<Vec<u8>> = vec![vec![]];
    for _n in 1..=depth {
        let mut next = Vec::with_capacity(frontier.len() * base.len());
        for word in &frontier {
            for c in &base {
                // The new symbol is applied last in time, i.e. outermost in the pull-back.
                let mut w = word.clone();
                w.extend_from_slice(&c.itinerary);
                let eg = |y: f64| {
                    let (z, jac) = scheme.pull_back(&w, y);
                    density(z) * jac / density(y)
                };
                let mu_a: f64 = qy
                    .iter()
                    .zip(&qw)
                    .map(|(&y, &wt)| {
                        let (z, jac) = scheme.pull_back(&w, y);
                        wt * density(z) * jac
                    })
                    .sum();
                for &y in &qy {
                    ratio_part = ratio_part.max(eg(y) / mu_a);
                }
                for &(y, yp, d) in &pairs {
                    holder_part = holder_part.max((eg(y) - eg(yp)).abs() / (mu_a * d));
                }
                next.push(w);
            }
        }
        by_depth.push(ratio_part.max(holder_part));
        frontier = next;
    }
    Ok(DistortionEstimate { c3_hat: ratio_part.max(holder_part), by_depth, ratio_part, holder_part })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lsv(gamma: f64, phi_max: usize) -> InducingScheme {
        let cfg = SchemeConfig { phi_max, ..Default::default() };
        InducingScheme::new(IntermittentMap::lsv(gamma, 2.0).unwrap(), &cfg).unwrap()
    }

    #[test]
    fn first_return_examples() {
        let s = lsv(1.0, 64);
        let (t, y) = s.first_return(0.9, 10).unwrap();
        assert_eq!(t, 1);
        assert!((y - 0.8).abs() < 1e-15);
        let (t, y) = s.first_return(0.7, 10).unwrap();
        assert_eq!(t, 2);
        assert!((y - 0.72).abs() < 1e-14);
        let d = InducingScheme::new(IntermittentMap::doubling(), &SchemeConfig { phi_max: 20, ..Default::default() })
            .unwrap();
        let (t, y) = d.first_return(0.75, 10).unwrap();
        assert_eq!((t, y), (1, 0.5));
        assert!(matches!(s.first_return(0.5 + 1e-12, 5), Err(Error::Escape { .. })));
    }

    #[test]
    fn first_cylinders() {
        let s = lsv(1.0, 64);
        let c = &s.alpha[0];
        assert_eq!(c.phi, 1);
        assert!((c.lo - 0.75).abs() < 1e-15 && (c.hi - 1.0).abs() < 1e-15);
        let d = InducingScheme::new(IntermittentMap::doubling(), &SchemeConfig { phi_max: 20, ..Default::default() })
            .unwrap();
        assert!((d.alpha[0].lo - 0.75).abs() < 1e-15);
        for c in &d.alpha {
            assert!((c.length - 0.5f64.powi(c.phi as i32 + 1)).abs() < 1e-18);
        }
    }

    #[test]
    fn nonmarkov_rejected() {
        let m = IntermittentMap::lsv(0.5, 1.7).unwrap();
        assert!(matches!(InducingScheme::new(m, &SchemeConfig::default()), Err(Error::NonMarkov(_))));
        let t = IntermittentMap::thaler(0.5, 1.5).unwrap();
        assert!(matches!(InducingScheme::new(t, &SchemeConfig::default()), Err(Error::NonMarkov(_))));
    }

    #[test]
    fn doubling_tail_is_geometric() {
        let d = InducingScheme::new(IntermittentMap::doubling(), &SchemeConfig { phi_max: 40, ..Default::default() })
            .unwrap();
        let t = tail_distribution(&d, Weighting::Lebesgue, 30);
        assert_eq!(t.tail[0], 1.0);
        for n in 0..=30 {
            assert!((t.tail[n] - 0.5f64.powi(n as i32)).abs() < 1e-15 * 1.0f64.max(0.5f64.powi(n as i32) * 1e3));
        }
    }

    #[test]
    fn separation_examples() {
        let s = lsv(1.0, 64);
        assert_eq!(s.separation_time(0.9, 0.7, 10).unwrap(), Separation::Exact(0));
        assert_eq!(s.separation_time(0.8, 0.8, 10).unwrap(), Separation::AtLeast(10));
        // Both in [3/4,1); G = 2x-1 sends 0.8 -> 0.6 (return time 2) and 0.95 -> 0.9 (return time 1).
        assert_eq!(s.separation_time(0.8, 0.95, 10).unwrap(), Separation::Exact(1));
    }

    #[test]
    fn tail_fit_synthetic() {
        let tail: Vec<f64> = (0..600).map(|n| if n == 0 { 1.0 } else { (n as f64).powi(-2) }).collect();
        let f = fit_tail_exponent(&tail, Window::new(8, 512)).unwrap();
        assert!((f.beta_hat - 2.0).abs() < 1e-10);
        assert!(f.power_law);
        let geo: Vec<f64> = (0..600).map(|n| 0.5f64.powi(n)).collect();
        let f = fit_tail_exponent(&geo, Window::new(8, 512));
        // 2^{-512} underflows to a positive subnormal only down to ~2^{-1074}; still positive.
        let f = f.unwrap();
        assert!(!f.power_law);
    }
}
