//! Correlation functions of the toral extension, assembled one Fourier mode
//! at a time, and the checks of their decay laws.
//!
//! For observables supported in `Y × T^d` the mode-`k` term is
//! `μ(Y) ⟨w_k, T_{k,n} v_{-k}⟩_{μ_Z}`, evaluated on the Ulam grid with the
//! stationary cell weights. Observables on all of `X × T^d` go through the
//! discrete tower instead.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cocycle::{ModeFunction, ToralCocycle, ToralObservable};
use crate::error::{Error, Result};
use crate::fit::{self, LineFit, Window};
use crate::inducing::InducingScheme;
use crate::operators::{build_twisted_sets, TwistedOperatorSet, UlamGrid};
use crate::quad;
use crate::renewal::{renewal_recursion, tower_generator, tower_points, RenewalMode, RenewalSequence, Tower};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MeasureRegime {
    Finite,
    Infinite,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EstimatorKind {
    Operator,
    MonteCarlo,
}

/// `d_β = sin(βπ)/π` on `(0,1)` and `1` at `β = 1`.
pub fn d_beta(beta: f64) -> Option<f64> {
    if beta > 0.0 && beta < 1.0 {
        Some((beta * PI).sin() / PI)
    } else if beta == 1.0 {
        Some(1.0)
    } else {
        None
    }
}

/// Neumaier-compensated sum.
pub fn compensated_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            c += (sum - t) + x;
        } else {
            c += (x - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// Return-time tail of the discrete operator, with a power-law continuation
/// beyond the truncation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReturnTail {
    pub beta: Option<f64>,
    /// Constant `ℓ` in `μ_Z(φ > n) ≈ ℓ n^{-β}`, measured at the top of the
    /// resolved range with the exponent held at `β`.
    pub ell: f64,
    pub phi_max: usize,
    pub regime: MeasureRegime,
    /// `z_tail[n] = μ_Z(φ > n)` for `n ≤ phi_max`.
    pub z_tail: Vec<f64>,
    /// `suffix[n] = Σ_{j > n} μ_Z(φ > j)`; empty in the infinite regime.
    suffix: Vec<f64>,
    /// `E_{μ_Z} φ`, finite regime only.
    pub mean_return: Option<f64>,
    /// `μ(Y)`: `1/Eφ` for a probability measure, `1` when `μ` is infinite
    /// and normalized on `Y`.
    pub mu_y: f64,
}

impl ReturnTail {
    pub fn from_set(set: &TwistedOperatorSet, beta: Option<f64>) -> Result<Self> {
        let phi_max = set.phi_max;
        let mut z_tail = Vec::with_capacity(phi_max + 1);
        let mut acc = 1.0;
        z_tail.push(acc);
        for n in 1..=phi_max {
            acc -= set.mass_by_phi.get(n).copied().unwrap_or(0.0);
            z_tail.push(acc.max(0.0));
        }
        let ell = match beta {
            Some(b) => {
                let lo = (phi_max / 8).max(1);
                let hi = (phi_max / 2).max(lo + 1);
                let logs: Vec<f64> =
                    (lo..=hi).filter(|&n| z_tail[n] > 0.0).map(|n| z_tail[n].ln() + b * (n as f64).ln()).collect();
                if logs.is_empty() {
                    0.0
                } else {
                    (logs.iter().sum::<f64>() / logs.len() as f64).exp()
                }
            }
            None => 0.0,
        };
        let regime = match beta {
            Some(b) if b <= 1.0 => MeasureRegime::Infinite,
            _ => MeasureRegime::Finite,
        };
        let mut tail = Self { beta, ell, phi_max, regime, z_tail, suffix: Vec::new(), mean_return: None, mu_y: 1.0 };
        if regime == MeasureRegime::Finite {
            let mut suffix = vec![0.0; phi_max + 1];
            suffix[phi_max] = tail.continuation_sum(phi_max);
            for n in (0..phi_max).rev() {
                suffix[n] = suffix[n + 1] + tail.z_tail[n + 1];
            }
            let e = 1.0 + suffix[0];
            tail.suffix = suffix;
            tail.mean_return = Some(e);
            tail.mu_y = 1.0 / e;
        }
        Ok(tail)
    }

    /// `Σ_{j > n} ℓ j^{-β}` for `n ≥ phi_max` (midpoint integral rule).
    fn continuation_sum(&self, n: usize) -> f64 {
        match self.beta {
            Some(b) if b > 1.0 && self.ell > 0.0 => self.ell * (n as f64 + 0.5).powf(1.0 - b) / (b - 1.0),
            _ => 0.0,
        }
    }

    /// `μ_Z(φ > n)`.
    pub fn z_tail_at(&self, n: usize) -> f64 {
        match self.z_tail.get(n) {
            Some(&t) => t,
            None => match self.beta {
                Some(b) => self.ell * (n as f64).powf(-b),
                None => 0.0,
            },
        }
    }

    /// `μ(τ > n) = μ(Y) μ_Z(φ > n)`.
    pub fn tau_tail(&self, n: usize) -> f64 {
        self.mu_y * self.z_tail_at(n)
    }

    /// `Σ_{j > n} μ(τ > j)`; finite regime only.
    pub fn leading_sum(&self, n: usize) -> Option<f64> {
        if self.regime != MeasureRegime::Finite {
            return None;
        }
        let s = match self.suffix.get(n) {
            Some(&s) => s,
            None => self.continuation_sum(n),
        };
        Some(self.mu_y * s)
    }

    /// `ℓ̃(n)`: `ℓ` for `β < 1`, `Σ_{j ≤ n} ℓ/j` for `β = 1`.
    pub fn elltilde(&self, n: usize) -> f64 {
        if self.beta == Some(1.0) {
            self.ell * (1..=n).map(|j| 1.0 / j as f64).sum::<f64>()
        } else {
            self.ell
        }
    }
}

/// Twisted operator sets for the frequencies an observable pair needs, plus
/// the return-time tail of the untwisted set.
pub struct OperatorBundle<'a> {
    pub scheme: &'a InducingScheme,
    pub h: &'a ToralCocycle,
    pub grid: UlamGrid,
    pub sets: Vec<TwistedOperatorSet>,
    pub tail: ReturnTail,
}

impl<'a> OperatorBundle<'a> {
    /// Builds sets for `ks` (the zero frequency is always added).
    pub fn new(scheme: &'a InducingScheme, h: &'a ToralCocycle, m: usize, phi_max: usize, ks: &[Vec<i32>]) -> Result<Self> {
        let d = h.dim();
        let mut all: Vec<Vec<i32>> = vec![vec![0; d]];
        for k in ks {
            if k.len() != d {
                return Err(Error::InvalidParameter(format!("frequency {k:?} does not have dimension {d}")));
            }
            if !all.contains(k) {
                all.push(k.clone());
            }
        }
        let grid = UlamGrid::for_scheme(scheme, m)?;
        let sets = build_twisted_sets(scheme, h, &all, &grid, phi_max)?;
        let tail = ReturnTail::from_set(&sets[0], scheme.map.beta())?;
        Ok(Self { scheme, h, grid, sets, tail })
    }

    /// Wraps sets built elsewhere (for instance loaded from a cache). The
    /// first set must be the untwisted one.
    pub fn from_sets(scheme: &'a InducingScheme, h: &'a ToralCocycle, sets: Vec<TwistedOperatorSet>) -> Result<Self> {
        let first = sets.first().ok_or_else(|| Error::InvalidParameter("no operator sets supplied".into()))?;
        if first.k.iter().any(|&x| x != 0) || first.k.len() != h.dim() {
            return Err(Error::InvalidParameter("the first operator set must have k = 0".into()));
        }
        if sets.iter().any(|s| s.grid != first.grid || s.phi_max != first.phi_max) {
            return Err(Error::InvalidParameter("operator sets disagree on grid or truncation".into()));
        }
        let grid = first.grid.clone();
        let tail = ReturnTail::from_set(first, scheme.map.beta())?;
        Ok(Self { scheme, h, grid, sets, tail })
    }

    /// Every frequency appearing in the observables, zero first.
    pub fn frequencies_of(d: usize, observables: &[&ToralObservable]) -> Vec<Vec<i32>> {
        let mut ks: Vec<Vec<i32>> = vec![vec![0; d]];
        for obs in observables {
            for k in obs.frequencies() {
                if !ks.contains(&k) {
                    ks.push(k);
                }
            }
        }
        ks
    }

    /// Builds sets for every frequency appearing in the observables.
    pub fn for_observables(
        scheme: &'a InducingScheme,
        h: &'a ToralCocycle,
        m: usize,
        phi_max: usize,
        observables: &[&ToralObservable],
    ) -> Result<Self> {
        let mut ks: Vec<Vec<i32>> = Vec::new();
        for obs in observables {
            for k in obs.frequencies() {
                if !ks.contains(&k) {
                    ks.push(k);
                }
            }
        }
        Self::new(scheme, h, m, phi_max, &ks)
    }

    pub fn set(&self, k: &[i32]) -> Option<&TwistedOperatorSet> {
        self.sets.iter().find(|s| s.k == k)
    }

    pub fn weights(&self) -> &[f64] {
        &self.sets[0].stationary
    }
}

/// Cell averages of a mode function on the grid (4-point Gauss-Legendre).
pub fn grid_values(f: &ModeFunction, grid: &UlamGrid) -> Vec<Complex64> {
    let (x, w) = quad::gauss_legendre(4);
    (0..grid.m)
        .map(|j| {
            let (a, b) = grid.cell_bounds(j);
            let (px, pw) = quad::mapped(&x, &w, a, b);
            px.iter().zip(&pw).map(|(x, w)| f.eval(*x) * *w).sum::<Complex64>() / (b - a)
        })
        .collect()
}

/// `μ(Y) Σ_i p_i w_i (T_{k,n} v)_i`. A vector-mode sequence must have been
/// started from `v_minus_k`.
pub fn mode_correlation(
    ren: &RenewalSequence,
    weights: &[f64],
    v_minus_k: &[Complex64],
    w_k: &[Complex64],
    mu_y: f64,
    n: usize,
) -> Result<Complex64> {
    if n > ren.horizon {
        return Err(Error::HorizonExceeded { requested: n, available: ren.horizon });
    }
    let tv: Vec<Complex64> = match (ren.matrix(n), ren.vector(n)) {
        (Some(t), _) => {
            (0..t.nrows).map(|i| t.row(i).iter().zip(v_minus_k).map(|(a, b)| a * b).sum()).collect()
        }
        (None, Some(tv)) => {
            let probe = ren.vector(0).unwrap_or(&[]);
            if probe.len() != v_minus_k.len() || probe.iter().zip(v_minus_k).any(|(a, b)| (a - b).norm() > 1e-14) {
                return Err(Error::InvalidParameter("renewal sequence was started from a different vector".into()));
            }
            tv.to_vec()
        }
        (None, None) => return Err(Error::HorizonExceeded { requested: n, available: ren.horizon }),
    };
    let mut acc = ZERO;
    for ((p, w), t) in weights.iter().zip(w_k).zip(&tv) {
        acc += *p * w * t;
    }
    Ok(acc * mu_y)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeTerm {
    pub k: Vec<i32>,
    pub values: Vec<Complex64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationSeries {
    /// `ns[i] = i`, from `0` to the horizon.
    pub ns: Vec<usize>,
    pub rho: Vec<f64>,
    /// Largest imaginary part discarded when forming `rho`.
    pub rho_imag_max: f64,
    pub mode_terms: Vec<ModeTerm>,
    pub vbar: f64,
    pub wbar: f64,
    pub beta: Option<f64>,
    pub d_beta: Option<f64>,
    pub ell: f64,
    pub mu_y: f64,
    pub regime: MeasureRegime,
    pub estimator: EstimatorKind,
    pub stderr: Option<Vec<f64>>,
    /// Zero cocycle with nonzero fibre modes present: the extension does not mix.
    pub non_mixing: bool,
    pub warnings: Vec<String>,
}

impl CorrelationSeries {
    pub fn horizon(&self) -> usize {
        self.rho.len().saturating_sub(1)
    }

    /// `ℓ̃(n)` as recorded at construction (`ℓ` constant, harmonic sum at `β = 1`).
    pub fn elltilde(&self, n: usize) -> f64 {
        if self.beta == Some(1.0) {
            self.ell * (1..=n).map(|j| 1.0 / j as f64).sum::<f64>()
        } else {
            self.ell
        }
    }

    fn from_terms(
        mode_terms: Vec<ModeTerm>,
        vbar: f64,
        wbar: f64,
        tail: &ReturnTail,
        estimator: EstimatorKind,
        non_mixing: bool,
        warnings: Vec<String>,
    ) -> Self {
        let len = mode_terms.first().map_or(0, |t| t.values.len());
        let mut rho = Vec::with_capacity(len);
        let mut imag = 0.0_f64;
        for n in 0..len {
            let re = compensated_sum(mode_terms.iter().map(|t| t.values[n].re));
            let im = compensated_sum(mode_terms.iter().map(|t| t.values[n].im));
            imag = imag.max(im.abs());
            rho.push(re);
        }
        Self {
            ns: (0..len).collect(),
            rho,
            rho_imag_max: imag,
            mode_terms,
            vbar,
            wbar,
            beta: tail.beta,
            d_beta: tail.beta.and_then(d_beta),
            ell: tail.ell,
            mu_y: tail.mu_y,
            regime: tail.regime,
            estimator,
            stderr: None,
            non_mixing,
            warnings,
        }
    }
}

fn negate(k: &[i32]) -> Vec<i32> {
    k.iter().map(|x| -x).collect()
}

fn check_dims(v: &ToralObservable, w: &ToralObservable, h: &ToralCocycle) -> Result<()> {
    if v.d != h.dim() || w.d != h.dim() {
        return Err(Error::InvalidParameter(format!(
            "observables have dimensions {} and {}, cocycle has {}",
            v.d,
            w.d,
            h.dim()
        )));
    }
    Ok(())
}

/// Pairs `(k, v_{-k}, w_k)` contributing to the correlation.
fn contributing_modes<'o>(v: &'o ToralObservable, w: &'o ToralObservable) -> Vec<(Vec<i32>, &'o ModeFunction, &'o ModeFunction)> {
    w.modes
        .iter()
        .filter_map(|wm| v.mode(&negate(&wm.k)).map(|vm| (wm.k.clone(), vm, &wm.v)))
        .collect()
}

fn is_non_mixing(h: &ToralCocycle, v: &ToralObservable, w: &ToralObservable) -> bool {
    h.is_zero() && contributing_modes(v, w).iter().any(|(k, _, _)| k.iter().any(|&x| x != 0))
}

/// Operator estimator for observables supported in `Y × T^d`.
pub fn operator_series(
    v: &ToralObservable,
    w: &ToralObservable,
    bundle: &OperatorBundle<'_>,
    horizon: usize,
) -> Result<CorrelationSeries> {
    check_dims(v, w, bundle.h)?;
    let p = bundle.weights();
    let mu_y = bundle.tail.mu_y;
    let mut warnings = Vec::new();
    if horizon > bundle.tail.phi_max {
        warnings.push(format!(
            "horizon {horizon} exceeds the truncation {}; longer returns are dropped",
            bundle.tail.phi_max
        ));
    }
    for set in &bundle.sets {
        warnings.extend(set.warnings.iter().cloned());
    }
    let mut terms = Vec::new();
    for (k, vm, wm) in contributing_modes(v, w) {
        let set = bundle
            .set(&k)
            .ok_or_else(|| Error::InvalidParameter(format!("no operator set was built for frequency {k:?}")))?;
        let vg = grid_values(vm, &bundle.grid);
        let wg = grid_values(wm, &bundle.grid);
        let ren = renewal_recursion(set, horizon, RenewalMode::Vector(vg.clone()))?;
        let values = (0..=horizon).map(|n| mode_correlation(&ren, p, &vg, &wg, mu_y, n)).collect::<Result<Vec<_>>>()?;
        terms.push(ModeTerm { k, values });
    }
    if terms.is_empty() {
        terms.push(ModeTerm { k: vec![0; v.d], values: vec![ZERO; horizon + 1] });
    }
    let zero = vec![0; v.d];
    let mean = |obs: &ToralObservable| -> f64 {
        obs.mode(&zero).map_or(0.0, |f| {
            mu_y * compensated_sum(grid_values(f, &bundle.grid).iter().zip(p).map(|(x, p)| x.re * p))
        })
    };
    let (vbar, wbar) = (mean(v), mean(w));
    Ok(CorrelationSeries::from_terms(
        terms,
        vbar,
        wbar,
        &bundle.tail,
        EstimatorKind::Operator,
        is_non_mixing(bundle.h, v, w),
        warnings,
    ))
}

/// Operator estimator for observables on all of `X × T^d`, by iterating the
/// twisted tower generator. The tower measure is normalized to a probability.
pub fn tower_series(
    v: &ToralObservable,
    w: &ToralObservable,
    bundle: &OperatorBundle<'_>,
    horizon: usize,
) -> Result<CorrelationSeries> {
    check_dims(v, w, bundle.h)?;
    if bundle.tail.regime != MeasureRegime::Finite {
        return Err(Error::Regime("tower observables on X need a finite invariant measure".into()));
    }
    let tower = Tower::build(&bundle.sets[0]);
    let total: f64 = compensated_sum(tower.weights.iter().copied());
    let pi: Vec<f64> = tower.weights.iter().map(|w| w / total).collect();
    let pts = tower_points(&tower, &bundle.sets[0], bundle.scheme);
    let lift = |f: &ModeFunction| -> Vec<Complex64> {
        let mut vals = grid_values(f, &bundle.grid);
        vals.extend(pts[tower.m..].iter().map(|&x| f.eval(x)));
        vals
    };
    let mut terms = Vec::new();
    for (k, vm, wm) in contributing_modes(v, w) {
        let set = bundle
            .set(&k)
            .ok_or_else(|| Error::InvalidParameter(format!("no operator set was built for frequency {k:?}")))?;
        let g = tower_generator(set, &tower, bundle.scheme, bundle.h)?;
        let mut u = lift(vm);
        let wl = lift(wm);
        let mut values = Vec::with_capacity(horizon + 1);
        for n in 0..=horizon {
            if n > 0 {
                u = g.mul_vec(&u);
            }
            let re = compensated_sum(pi.iter().zip(&wl).zip(&u).map(|((p, a), b)| p * (a * b).re));
            let im = compensated_sum(pi.iter().zip(&wl).zip(&u).map(|((p, a), b)| p * (a * b).im));
            values.push(Complex64::new(re, im));
        }
        terms.push(ModeTerm { k, values });
    }
    if terms.is_empty() {
        terms.push(ModeTerm { k: vec![0; v.d], values: vec![ZERO; horizon + 1] });
    }
    let zero = vec![0; v.d];
    let mean = |obs: &ToralObservable| -> f64 {
        obs.mode(&zero).map_or(0.0, |f| compensated_sum(lift(f).iter().zip(&pi).map(|(x, p)| x.re * p)))
    };
    let (vbar, wbar) = (mean(v), mean(w));
    let mut tail = bundle.tail.clone();
    tail.mu_y = pi[..tower.m].iter().sum();
    let mut warnings = vec![format!("tower with {} states", tower.size())];
    warnings.extend(bundle.sets[0].warnings.iter().cloned());
    Ok(CorrelationSeries::from_terms(
        terms,
        vbar,
        wbar,
        &tail,
        EstimatorKind::Operator,
        is_non_mixing(bundle.h, v, w),
        warnings,
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloConfig {
    pub samples: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub batches: usize,
    /// Multiply both observables by `1_Y`.
    pub restrict_to_y: bool,
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        Self { samples: 1_000_000, burn_in: 10_000, seed: 0x5eed, batches: 100, restrict_to_y: true }
    }
}

/// Monte Carlo estimator along one long orbit. Each orbit point gets a fresh
/// uniform fibre angle and its antithetic partner `ψ + π`; standard errors
/// come from batch means over contiguous stretches of the orbit.
pub fn monte_carlo_series(
    v: &ToralObservable,
    w: &ToralObservable,
    scheme: &InducingScheme,
    h: &ToralCocycle,
    horizon: usize,
    cfg: &MonteCarloConfig,
) -> Result<CorrelationSeries> {
    check_dims(v, w, h)?;
    let beta = scheme.map.beta();
    if beta.is_some_and(|b| b <= 1.0) {
        return Err(Error::Regime("Monte Carlo needs a finite invariant measure (γ < 1)".into()));
    }
    if cfg.samples < cfg.batches || cfg.batches < 2 {
        return Err(Error::InvalidParameter("need at least two batches and one sample per batch".into()));
    }
    let map = &scheme.map;
    let d = h.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut warnings = Vec::new();
    let mut reseeds = 0usize;
    let mut x: f64 = rng.gen_range(0.0..1.0);
    let step = |x: f64, rng: &mut ChaCha8Rng, reseeds: &mut usize| -> Result<f64> {
        let y = map.evaluate(x)?;
        // Exact zero is the neutral fixed point; a finite-precision orbit can
        // only land there through round-off.
        if y <= 0.0 || y >= 1.0 {
            *reseeds += 1;
            return Ok(rng.gen_range(0.0..1.0));
        }
        Ok(y)
    };
    for _ in 0..cfg.burn_in {
        x = step(x, &mut rng, &mut reseeds)?;
    }
    let len = cfg.samples + horizon;
    let mut orbit = Vec::with_capacity(len);
    let mut hs = Vec::with_capacity(len * d);
    for _ in 0..len {
        orbit.push(x);
        hs.extend(h.lifted(x));
        x = step(x, &mut rng, &mut reseeds)?;
    }
    if reseeds > 0 {
        warnings.push(format!("orbit restarted {reseeds} times after reaching an endpoint"));
    }
    let indicator = |x: f64| if !cfg.restrict_to_y || scheme.in_y(x) { 1.0 } else { 0.0 };
    let per_batch = cfg.samples / cfg.batches;
    let used = per_batch * cfg.batches;
    let mut batch_sums = vec![vec![0.0; cfg.batches]; horizon + 1];
    let mut vsum = 0.0;
    let mut wsum = 0.0;
    let mut psi = vec![0.0; d];
    let mut shifted = vec![0.0; d];
    let mut acc = vec![0.0; d];
    for t in 0..used {
        let b = t / per_batch;
        for p in psi.iter_mut() {
            *p = rng.gen_range(0.0..TAU);
        }
        let iv = indicator(orbit[t]);
        let mut v_pair = [0.0; 2];
        for (s, vp) in v_pair.iter_mut().enumerate() {
            for (q, p) in shifted.iter_mut().zip(&psi) {
                *q = p + s as f64 * PI;
            }
            *vp = iv * v.evaluate(orbit[t], &shifted)?;
        }
        vsum += 0.5 * (v_pair[0] + v_pair[1]);
        wsum += 0.5 * (indicator(orbit[t]) * (w.evaluate(orbit[t], &psi)? + w.evaluate(orbit[t], &shifted)?));
        if iv == 0.0 {
            continue;
        }
        acc.iter_mut().for_each(|a| *a = 0.0);
        for n in 0..=horizon {
            let xn = orbit[t + n];
            let iw = indicator(xn);
            if iw != 0.0 {
                let mut val = 0.0;
                for (s, vp) in v_pair.iter().enumerate() {
                    for ((q, p), a) in shifted.iter_mut().zip(&psi).zip(&acc) {
                        *q = p + s as f64 * PI + a;
                    }
                    val += vp * w.evaluate(xn, &shifted)?;
                }
                batch_sums[n][b] += 0.5 * val * iw;
            }
            for (a, hv) in acc.iter_mut().zip(&hs[(t + n) * d..(t + n + 1) * d]) {
                *a += hv;
            }
        }
    }
    let nb = cfg.batches as f64;
    let mut rho = Vec::with_capacity(horizon + 1);
    let mut stderr = Vec::with_capacity(horizon + 1);
    for sums in &batch_sums {
        let means: Vec<f64> = sums.iter().map(|s| s / per_batch as f64).collect();
        let mean = compensated_sum(means.iter().copied()) / nb;
        let var = means.iter().map(|m| (m - mean) * (m - mean)).sum::<f64>() / (nb - 1.0);
        rho.push(mean);
        stderr.push((var / nb).sqrt());
    }
    let tail_stub = ReturnTail {
        beta,
        ell: 0.0,
        phi_max: 0,
        regime: MeasureRegime::Finite,
        z_tail: vec![1.0],
        suffix: Vec::new(),
        mean_return: None,
        mu_y: orbit[..used].iter().filter(|&&x| scheme.in_y(x)).count() as f64 / used as f64,
    };
    let terms = vec![ModeTerm { k: vec![0; d], values: rho.iter().map(|&r| Complex64::new(r, 0.0)).collect() }];
    let mut series = CorrelationSeries::from_terms(
        terms,
        vsum / used as f64,
        wsum / used as f64,
        &tail_stub,
        EstimatorKind::MonteCarlo,
        is_non_mixing(h, v, w),
        warnings,
    );
    series.stderr = Some(stderr);
    Ok(series)
}

/// Which estimator [`correlation_series`] should use.
pub enum Estimator<'b, 'a> {
    Operator(&'b OperatorBundle<'a>),
    MonteCarlo { scheme: &'b InducingScheme, h: &'b ToralCocycle, config: MonteCarloConfig },
}

pub fn correlation_series(
    v: &ToralObservable,
    w: &ToralObservable,
    horizon: usize,
    estimator: Estimator<'_, '_>,
) -> Result<CorrelationSeries> {
    match estimator {
        Estimator::Operator(bundle) => operator_series(v, w, bundle, horizon),
        Estimator::MonteCarlo { scheme, h, config } => monte_carlo_series(v, w, scheme, h, horizon, &config),
    }
}

/// `max_{n ≤ j ≤ N} |x_j|`: the smallest nonincreasing majorant of `|x|`.
/// Slopes of `O(n^{-q})` bounds are fitted to this envelope so that sign
/// changes of the series do not break the logarithm.
pub fn decay_envelope(xs: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; xs.len()];
    let mut run = 0.0_f64;
    for i in (0..xs.len()).rev() {
        run = run.max(xs[i].abs());
        out[i] = run;
    }
    out
}

/// The last decade `[N/10, N]` of a horizon, floored at `n = 8`.
pub fn last_decade(horizon: usize) -> Window {
    Window::new((horizon / 10).max(8), horizon)
}

fn envelope_fit(xs: &[f64], window: Window) -> Result<LineFit> {
    fit::loglog_slope_indexed(&decay_envelope(xs), window)
}

/// Relative level below which a residual is treated as round-off.
pub const NOISE_FLOOR: f64 = 1e-13;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteLawReport {
    pub beta: f64,
    pub window: Window,
    /// Rate `q` expected for the remainder.
    pub q: f64,
    pub q_rule: String,
    pub mean_zero: bool,
    /// `Σ_{j>n} μ(τ>j) v̄ w̄`.
    pub leading: Vec<f64>,
    /// `ρ(n) − v̄w̄ − leading(n)`.
    pub residual: Vec<f64>,
    pub leading_fit: Option<LineFit>,
    /// Extremes of `(ρ(n) − v̄w̄) / leading(n)` over the window.
    pub ratio_range: Option<(f64, f64)>,
    pub residual_fit: Option<LineFit>,
    pub below_noise_floor: bool,
}

impl FiniteLawReport {
    pub fn ratio_within(&self, tol: f64) -> bool {
        self.ratio_range.is_some_and(|(lo, hi)| lo >= 1.0 - tol && hi <= 1.0 + tol)
    }
}

/// Compares `ρ(n) − v̄w̄` with the renewal leading term and fits the decay of
/// what remains.
pub fn theorem_check_finite(series: &CorrelationSeries, tail: &ReturnTail, window: Window) -> Result<FiniteLawReport> {
    let beta = match (series.regime, series.beta) {
        (MeasureRegime::Finite, Some(b)) if b > 1.0 => b,
        _ => return Err(Error::Regime("the finite-measure law needs β > 1".into())),
    };
    if window.hi > series.horizon() || window.hi < window.lo + 7 {
        return Err(Error::HorizonExceeded { requested: window.hi, available: series.horizon() });
    }
    let vw = series.vbar * series.wbar;
    let mean_zero = series.vbar.abs() <= 1e-12 || series.wbar.abs() <= 1e-12;
    let (q, q_rule) = if mean_zero || beta >= 2.0 {
        (beta, "β − ε".to_string())
    } else {
        (2.0 * beta - 2.0, "2β − 2".to_string())
    };
    let leading: Vec<f64> = (0..=series.horizon())
        .map(|n| tail.leading_sum(n).map(|s| s * vw).ok_or_else(|| Error::Regime("tail has no finite mean".into())))
        .collect::<Result<_>>()?;
    let residual: Vec<f64> = series.rho.iter().zip(&leading).map(|(r, l)| r - vw - l).collect();
    let leading_fit = if mean_zero { None } else { envelope_fit(&leading, window).ok() };
    let ratio_range = (!mean_zero).then(|| {
        (window.lo..=window.hi).map(|n| (series.rho[n] - vw) / leading[n]).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), r| {
            (a.min(r), b.max(r))
        })
    });
    let scale = series.rho.iter().fold(0.0_f64, |a, r| a.max(r.abs())).max(f64::MIN_POSITIVE);
    let peak = residual[window.lo..=window.hi].iter().fold(0.0_f64, |a, r| a.max(r.abs()));
    let below_noise_floor = peak <= NOISE_FLOOR * scale;
    let residual_fit = if below_noise_floor { None } else { envelope_fit(&residual, window).ok() };
    Ok(FiniteLawReport {
        beta,
        window,
        q,
        q_rule,
        mean_zero,
        leading,
        residual,
        leading_fit,
        ratio_range,
        residual_fit,
        below_noise_floor,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InfiniteLawReport {
    pub beta: f64,
    pub d_beta: f64,
    pub ell: f64,
    pub target: f64,
    pub mean_zero: bool,
    /// `(n, ℓ̃(n) n^{1−β} ρ(n))` at log-spaced points of the last decade.
    pub scaled: Vec<(usize, f64)>,
    /// Relative gaps to the target at the same points.
    pub gaps: Vec<f64>,
    pub gap_at_horizon: Option<f64>,
    /// Slope of the gap against `log n` over the last decade.
    pub gap_trend: Option<f64>,
    /// Decay fit of the scaled quantity (mean-zero data or `β < 1/2`).
    pub decay_fit: Option<LineFit>,
}

impl InfiniteLawReport {
    pub fn trend_decreasing(&self) -> bool {
        self.gap_trend.is_some_and(|s| s < 0.0) && self.gaps.first().zip(self.gaps.last()).is_some_and(|(a, b)| b <= a)
    }
}

pub fn theorem_check_infinite(series: &CorrelationSeries, window: Window) -> Result<InfiniteLawReport> {
    let beta = match (series.regime, series.beta) {
        (MeasureRegime::Infinite, Some(b)) if b > 0.0 && b <= 1.0 => b,
        _ => return Err(Error::Regime("the infinite-measure law needs β ∈ (0, 1]".into())),
    };
    if series.estimator != EstimatorKind::Operator {
        return Err(Error::Regime("infinite-measure correlations come from the operator estimator".into()));
    }
    if window.hi > series.horizon() || window.lo == 0 || window.hi <= window.lo {
        return Err(Error::HorizonExceeded { requested: window.hi, available: series.horizon() });
    }
    let db = d_beta(beta).ok_or_else(|| Error::Regime(format!("no d_β for β = {beta}")))?;
    let target = db * series.vbar * series.wbar;
    let mean_zero = series.vbar.abs() <= 1e-12 || series.wbar.abs() <= 1e-12;
    let scaled_at = |n: usize| series.elltilde(n) * (n as f64).powf(1.0 - beta) * series.rho[n];
    let points = 16;
    let (l0, l1) = ((window.lo as f64).ln(), (window.hi as f64).ln());
    let mut ns: Vec<usize> =
        (0..=points).map(|i| (l0 + (l1 - l0) * i as f64 / points as f64).exp().round() as usize).collect();
    ns.dedup();
    let scaled: Vec<(usize, f64)> = ns.iter().map(|&n| (n, scaled_at(n))).collect();
    let (gaps, gap_at_horizon, gap_trend) = if mean_zero {
        (Vec::new(), None, None)
    } else {
        let gaps: Vec<f64> = scaled.iter().map(|(_, s)| (s / target - 1.0).abs()).collect();
        let xs: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
        let trend = fit::linear_fit(&xs, &gaps).ok().map(|f| f.slope);
        (gaps.clone(), gaps.last().copied(), trend)
    };
    let decay_fit = if mean_zero || beta < 0.5 {
        let full: Vec<f64> = (0..=series.horizon()).map(|n| if n == 0 { 0.0 } else { scaled_at(n) }).collect();
        envelope_fit(&full, window).ok()
    } else {
        None
    };
    Ok(InfiniteLawReport {
        beta,
        d_beta: db,
        ell: series.ell,
        target,
        mean_zero,
        scaled,
        gaps,
        gap_at_horizon,
        gap_trend,
        decay_fit,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UpperBoundReport {
    pub beta: f64,
    pub window: Window,
    pub fit: LineFit,
    /// Slope of the bound, `−(β − 1)`.
    pub bound_slope: f64,
}

impl UpperBoundReport {
    pub fn within(&self, tol: f64) -> bool {
        self.fit.slope <= self.bound_slope + tol
    }
}

/// Fits the decay of `|ρ(n) − v̄w̄|` for full-space observables.
pub fn upper_bound_check(series: &CorrelationSeries, window: Window) -> Result<UpperBoundReport> {
    if series.non_mixing {
        return Err(Error::Regime("non-mixing extension: the zero cocycle leaves fibre modes undamped".into()));
    }
    let beta = match (series.regime, series.beta) {
        (MeasureRegime::Finite, Some(b)) if b > 1.0 => b,
        _ => return Err(Error::Regime("the upper bound needs a finite invariant measure".into())),
    };
    let vw = series.vbar * series.wbar;
    let dev: Vec<f64> = series.rho.iter().map(|r| r - vw).collect();
    let fit = envelope_fit(&dev, window)?;
    Ok(UpperBoundReport { beta, window, fit, bound_slope: -(beta - 1.0) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn d_beta_values() {
        assert!((d_beta(0.5).unwrap() - 1.0 / PI).abs() < 1e-15);
        assert_eq!(d_beta(1.0), Some(1.0));
        assert_eq!(d_beta(2.0), None);
    }

    #[test]
    fn envelope_is_nonincreasing_majorant() {
        let e = decay_envelope(&[1.0, -3.0, 0.5, 0.0, -0.2]);
        assert_eq!(e, vec![3.0, 3.0, 0.5, 0.2, 0.2]);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let xs = [1.0, 1e-16, 1e-16, -1.0];
        assert_eq!(compensated_sum(xs), 2e-16);
    }
}
