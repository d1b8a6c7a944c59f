//! Probes for the obstructions to mixing: fixed and periodic points of the
//! induced map, the two-fixed-point resonance test, the expansion of the
//! cocycle along homoclinic-type periodic orbits, and the defect of
//! approximate eigenfunctions of `M_{k,ω} v = e^{-ik·H} e^{-iωφ} v ∘ G`.
//!
//! Periodic points are found by iterating composed inverse branches, which
//! contract. Cocycle sums are kept as real lifts; angles are reduced only
//! when compared.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cocycle::{circ_dist, ToralCocycle};
use crate::error::{Error, Result};
use crate::fit::{self, LineFit};
use crate::inducing::InducingScheme;

const MAX_ITER: usize = 10_000;

/// Lifted `H` and the image `G z` for `z` in cylinder `cyl`, following the
/// cylinder's branch word.
fn cylinder_step(scheme: &InducingScheme, h: &ToralCocycle, cyl: usize, z: f64) -> (Vec<f64>, f64) {
    let mut acc = vec![0.0; h.dim()];
    let mut x = z;
    for &b in &scheme.alpha[cyl].itinerary {
        h.accumulate(x, &mut acc);
        x = scheme.map.branches[b as usize].forward(x);
    }
    (acc, x)
}

/// Fixed point of a composition of inverse branches, started from the middle
/// of `Y`. Returns the point and the derivative of the composition there.
fn contracting_fixed_point(scheme: &InducingScheme, word: &[usize]) -> Result<(f64, f64)> {
    let compose = |y: f64| -> (f64, f64) {
        let mut x = y;
        let mut jac = 1.0;
        for &c in word.iter().rev() {
            let (z, dz) = scheme.pull_back(&scheme.alpha[c].itinerary, x);
            x = z;
            jac *= dz;
        }
        (x, jac)
    };
    let mut y = 0.5 * (scheme.y_lo + scheme.y_hi);
    for _ in 0..MAX_ITER {
        let (next, jac) = compose(y);
        if (next - y).abs() <= 1e-16 * next.abs().max(1.0) {
            return Ok((next, jac));
        }
        y = next;
    }
    let (z, jac) = compose(y);
    if (z - y).abs() < 1e-14 {
        Ok((z, jac))
    } else {
        Err(Error::NoConvergence(format!("inverse-branch iteration for word {word:?} stalled at {z}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedPoint {
    pub cylinder: usize,
    pub point: f64,
    /// The point sits on the closure boundary of its cylinder (possibly
    /// outside `Y`), so it is not a genuine fixed point of `G`.
    pub boundary: bool,
    /// `|(G|_a)^{-1}'|` at the point.
    pub contraction: f64,
    pub phi: usize,
    /// Lifted `H(point)`.
    pub h_value: Vec<f64>,
}

/// One fixed point per cylinder with `φ ≤ phi_cap`.
pub fn fixed_points(scheme: &InducingScheme, h: &ToralCocycle, phi_cap: usize) -> Result<Vec<FixedPoint>> {
    let mut out = Vec::new();
    for (c, cyl) in scheme.alpha.iter().enumerate() {
        if cyl.phi > phi_cap {
            continue;
        }
        let (z, jac) = contracting_fixed_point(scheme, &[c])?;
        let tol = 1e-9 * cyl.length;
        let boundary = (z - cyl.lo).abs() <= tol || (z - cyl.hi).abs() <= tol || z >= scheme.y_hi;
        let (h_value, _) = cylinder_step(scheme, h, c, z);
        out.push(FixedPoint { cylinder: c, point: z, boundary, contraction: jac.abs(), phi: cyl.phi, h_value });
    }
    Ok(out)
}

/// `min_{0 < |k|_∞ ≤ K} dist(φ(z₂) k·H(z₁) − φ(z₁) k·H(z₂), 2πZ)` from the
/// raw values at the two fixed points.
pub fn resonance_defect_values(h1: &[f64], phi1: usize, h2: &[f64], phi2: usize, k_max: i32) -> (f64, Vec<i32>) {
    let d = h1.len();
    let mut best = (f64::INFINITY, vec![0; d]);
    let side = (2 * k_max + 1) as usize;
    let total = side.pow(d as u32);
    for idx in 0..total {
        let mut r = idx;
        let k: Vec<i32> = (0..d)
            .map(|_| {
                let v = (r % side) as i32 - k_max;
                r /= side;
                v
            })
            .collect();
        if k.iter().all(|&x| x == 0) {
            continue;
        }
        let dot = |hv: &[f64]| k.iter().zip(hv).map(|(a, b)| *a as f64 * b).sum::<f64>();
        let diff = phi2 as f64 * dot(h1) - phi1 as f64 * dot(h2);
        let dist = circ_dist(diff, 0.0);
        if dist < best.0 {
            best = (dist, k);
        }
    }
    best
}

/// Resonance defect of two fixed points of `G`.
pub fn resonance_defect(z1: &FixedPoint, z2: &FixedPoint, k_max: i32) -> Result<(f64, Vec<i32>)> {
    if z1.cylinder == z2.cylinder {
        return Err(Error::InvalidParameter("the two fixed points must lie in different cylinders".into()));
    }
    if z1.h_value.len() != z2.h_value.len() || k_max < 1 {
        return Err(Error::InvalidParameter("dimension mismatch or empty frequency range".into()));
    }
    Ok(resonance_defect_values(&z1.h_value, z1.phi, &z2.h_value, z2.phi, k_max))
}

/// The two interior fixed points with the largest return times (ties broken
/// by cylinder order).
pub fn deepest_interior_pair(points: &[FixedPoint]) -> Option<(FixedPoint, FixedPoint)> {
    let mut interior: Vec<&FixedPoint> = points.iter().filter(|p| !p.boundary).collect();
    interior.sort_by(|a, b| b.phi.cmp(&a.phi).then(a.cylinder.cmp(&b.cylinder)));
    match interior.as_slice() {
        [a, b, ..] => Some(((*a).clone(), (*b).clone())),
        _ => None,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodicOrbitProbe {
    /// Cylinder ids `a_0 … a_{N-1}`.
    pub itinerary: Vec<usize>,
    pub point: f64,
    /// `G^j(point)` for `j < N`, obtained from the inverse-branch chain.
    pub orbit: Vec<f64>,
    /// Lifted `H_N(point)`.
    pub h_n: Vec<f64>,
    pub phi_n: usize,
    /// `max_j |G(orbit_j) − orbit_{j+1}|` with indices mod `N`.
    pub closing_error: f64,
}

/// The period-`N` point of `G` with the given cylinder itinerary.
pub fn periodic_point(scheme: &InducingScheme, h: &ToralCocycle, itinerary: &[usize]) -> Result<PeriodicOrbitProbe> {
    if itinerary.is_empty() {
        return Err(Error::InvalidParameter("itinerary must be nonempty".into()));
    }
    if let Some(&c) = itinerary.iter().find(|&&c| c >= scheme.alpha.len()) {
        return Err(Error::InvalidParameter(format!("unknown cylinder {c}")));
    }
    let (p, _) = contracting_fixed_point(scheme, itinerary)?;
    let n = itinerary.len();
    // orbit[j] = Ψ_{a_j}(orbit[j+1]), orbit[N] = p.
    let mut orbit = vec![0.0; n + 1];
    orbit[n] = p;
    for j in (0..n).rev() {
        orbit[j] = scheme.pull_back(&scheme.alpha[itinerary[j]].itinerary, orbit[j + 1]).0;
    }
    orbit.truncate(n);
    let mut h_n = vec![0.0; h.dim()];
    let mut phi_n = 0;
    let mut closing_error = 0.0_f64;
    for (j, &c) in itinerary.iter().enumerate() {
        let (hv, image) = cylinder_step(scheme, h, c, orbit[j]);
        for (a, b) in h_n.iter_mut().zip(&hv) {
            *a += b;
        }
        phi_n += scheme.alpha[c].phi;
        closing_error = closing_error.max((image - orbit[(j + 1) % n]).abs());
    }
    Ok(PeriodicOrbitProbe { itinerary: itinerary.to_vec(), point: orbit[0], orbit, h_n, phi_n, closing_error })
}

/// Relative level below which successive differences are treated as round-off.
pub const DIFFERENCE_FLOOR: f64 = 1e-13;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoodAsymptoticsFit {
    pub ns: Vec<usize>,
    pub base_point: f64,
    /// `1/|G'(p_0)|`, reported next to `gamma_hat` for comparison.
    pub gamma_reference: f64,
    /// `φ_N(p_N) − N φ(p_0)` for every `N`.
    pub kappa_prime: Vec<i64>,
    pub kappa_prime_constant: bool,
    /// `D_N = H_N(p_N) − N H(p_0)` per `N`, lifted.
    pub offsets: Vec<Vec<f64>>,
    pub kappa_hat: Vec<f64>,
    pub gamma_hat: f64,
    /// Coordinate used for the rate fit (largest offset variation).
    pub coordinate: usize,
    /// Geometric fit of `log |D_{N+1} − D_N|` against `N`.
    pub fit: Option<LineFit>,
    /// `N` values that entered the fit (differences above round-off).
    pub fit_ns: Vec<usize>,
    /// `r_N = D_N − κ̂` per `N` and coordinate.
    pub residuals: Vec<Vec<f64>>,
    /// `J_N = r_N / γ̂^N` on the fit coordinate.
    pub j_n: Vec<f64>,
    /// `|J_N|` per coordinate.
    pub e_n: Vec<Vec<f64>>,
    /// `min |E_N|` over the last third of the fitted `N`, per coordinate.
    pub liminf_proxy: Vec<f64>,
    /// Offsets constant in `N`: no good asymptotics.
    pub degenerate: bool,
    /// Consecutive offsets jumped by more than `π`.
    pub unwrap_failure: bool,
    /// Share of sign changes of `J_N`, as a multiple of `π` per step.
    pub sign_change_frequency: f64,
}

impl GoodAsymptoticsFit {
    pub fn is_good(&self) -> bool {
        !self.degenerate && !self.unwrap_failure && self.liminf_proxy.iter().any(|&e| e > 0.0)
    }
}

/// Periodic points with itineraries `base^{N-1} · excursion`, `N = 3..=n_max`,
/// and the expansion `H_N(p_N) = N H(p_0) + κ + J_N γ^N + …`.
pub fn good_asymptotics_fit(
    scheme: &InducingScheme,
    h: &ToralCocycle,
    base_cyl: usize,
    excursion_cyl: usize,
    n_max: usize,
) -> Result<GoodAsymptoticsFit> {
    if base_cyl == excursion_cyl {
        return Err(Error::InvalidParameter("base and excursion cylinders must differ".into()));
    }
    if n_max < 6 {
        return Err(Error::InvalidParameter("need n_max ≥ 6".into()));
    }
    let base = periodic_point(scheme, h, &[base_cyl])?;
    let cyl = &scheme.alpha[base_cyl];
    if base.point <= cyl.lo || base.point >= cyl.hi {
        return Err(Error::InvalidParameter(format!("cylinder {base_cyl} has no interior fixed point")));
    }
    let (_, jac) = contracting_fixed_point(scheme, &[base_cyl])?;
    let d = h.dim();
    let h0 = &base.h_n;
    let phi0 = base.phi_n as i64;
    let ns: Vec<usize> = (3..=n_max).collect();
    let mut offsets = Vec::with_capacity(ns.len());
    let mut kappa_prime = Vec::with_capacity(ns.len());
    for &n in &ns {
        let mut word = vec![base_cyl; n - 1];
        word.push(excursion_cyl);
        let probe = periodic_point(scheme, h, &word)?;
        // Sum H(q_j) − H(p_0) termwise to avoid cancelling N H(p_0).
        let mut off = vec![0.0; d];
        for (j, &c) in word.iter().enumerate() {
            let (hv, _) = cylinder_step(scheme, h, c, probe.orbit[j]);
            let reference: &[f64] = if c == base_cyl { h0 } else { &[] };
            for i in 0..d {
                off[i] += hv[i] - reference.get(i).copied().unwrap_or(0.0);
            }
        }
        // The excursion step contributes its full H; remove the one H(p_0)
        // that N H(p_0) charges for it.
        for i in 0..d {
            off[i] -= h0[i];
        }
        offsets.push(off);
        kappa_prime.push(probe.phi_n as i64 - n as i64 * phi0);
    }
    let kappa_prime_constant = kappa_prime.windows(2).all(|w| w[0] == w[1]);
    let unwrap_failure = offsets.windows(2).any(|w| w[0].iter().zip(&w[1]).any(|(a, b)| (b - a).abs() > PI));

    let variation = |i: usize| offsets.iter().map(|o| (o[i] - offsets[0][i]).abs()).fold(0.0, f64::max);
    let coordinate = (0..d).max_by(|&a, &b| variation(a).total_cmp(&variation(b))).unwrap_or(0);
    let scale = 1.0 + offsets.iter().map(|o| o[coordinate].abs()).fold(0.0, f64::max);
    let diffs: Vec<f64> = offsets.windows(2).map(|w| w[1][coordinate] - w[0][coordinate]).collect();
    let mut fit_ns = Vec::new();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (i, &dv) in diffs.iter().enumerate() {
        if dv.abs() > DIFFERENCE_FLOOR * scale {
            fit_ns.push(ns[i]);
            xs.push(ns[i] as f64);
            ys.push(dv.abs().ln());
        } else {
            break;
        }
    }
    let degenerate = variation(coordinate) <= DIFFERENCE_FLOOR * scale;
    let fit = if degenerate || xs.len() < 3 { None } else { fit::linear_fit(&xs, &ys).ok() };
    let gamma_hat = fit.as_ref().map_or(0.0, |f| f.slope.exp());

    // κ̂ = D_last + Σ_{j ≥ last} Δ_j, the geometric tail summed in closed form.
    let last = fit_ns.len();
    let kappa_hat: Vec<f64> = (0..d)
        .map(|i| {
            if degenerate || fit.is_none() || gamma_hat >= 1.0 {
                return offsets.last().map_or(0.0, |o| o[i]);
            }
            let dl = offsets[last][i] - offsets[last - 1][i];
            offsets[last][i] + dl * gamma_hat / (1.0 - gamma_hat)
        })
        .collect();
    let residuals: Vec<Vec<f64>> = offsets.iter().map(|o| o.iter().zip(&kappa_hat).map(|(a, k)| a - k).collect()).collect();
    let pow = |n: usize| if gamma_hat > 0.0 { gamma_hat.powi(n as i32) } else { 1.0 };
    let j_n: Vec<f64> = if degenerate {
        vec![0.0; ns.len()]
    } else {
        ns.iter().zip(&residuals).map(|(&n, r)| r[coordinate] / pow(n)).collect()
    };
    let e_n: Vec<Vec<f64>> = if degenerate {
        vec![vec![0.0; d]; ns.len()]
    } else {
        ns.iter().zip(&residuals).map(|(&n, r)| r.iter().map(|x| x.abs() / pow(n)).collect()).collect()
    };
    let fitted = fit_ns.len().max(1);
    let from = fitted - fitted.div_ceil(3);
    let liminf_proxy: Vec<f64> =
        (0..d).map(|i| e_n[from..fitted].iter().map(|e| e[i]).fold(f64::INFINITY, f64::min)).collect();
    let changes = j_n[..fitted].windows(2).filter(|w| w[0] * w[1] < 0.0).count();
    let sign_change_frequency = if fitted > 1 { changes as f64 / (fitted - 1) as f64 } else { 0.0 };

    Ok(GoodAsymptoticsFit {
        ns,
        base_point: base.point,
        gamma_reference: jac.abs(),
        kappa_prime,
        kappa_prime_constant,
        offsets,
        kappa_hat,
        gamma_hat,
        coordinate,
        fit,
        fit_ns,
        residuals,
        j_n,
        e_n,
        liminf_proxy: if degenerate { vec![0.0; d] } else { liminf_proxy },
        degenerate,
        unwrap_failure,
        sign_change_frequency,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenDefect {
    pub defect: f64,
    /// Trial index achieving the minimum (`0` is `u ≡ 1`).
    pub best_trial: usize,
    pub chi: f64,
    /// `max | |M^n u| − 1 |` over all trials and samples.
    pub isometry_error: f64,
}

/// `min_u min_χ max_z |M_{k,ω}^n u(z) − e^{iχ} u(z)|` over sample points of
/// the cylinders `z0` and a trial family: `u ≡ 1`, then `trials − 1`
/// functions with a random constant phase on each cylinder of `Y`.
#[allow(clippy::too_many_arguments)]
pub fn approx_eigen_defect(
    scheme: &InducingScheme,
    h: &ToralCocycle,
    k: &[i32],
    omega: f64,
    n: usize,
    z0: &[usize],
    trials: usize,
    seed: u64,
) -> Result<EigenDefect> {
    if z0.is_empty() || trials == 0 {
        return Err(Error::InvalidParameter("need a nonempty cylinder set and at least one trial".into()));
    }
    if k.len() != h.dim() {
        return Err(Error::InvalidParameter("frequency and cocycle dimensions differ".into()));
    }
    const PER_CYLINDER: usize = 8;
    // Dyadic sample positions reach the indifferent point in finitely many
    // steps of a piecewise-linear map; an irrational offset avoids that.
    let offset = (5f64.sqrt() - 1.0) / 2.0;
    // (z, k·H_n(z) + ω φ_n(z), cylinder of G^n z)
    let mut samples: Vec<(f64, f64, Option<usize>)> = Vec::new();
    for &c in z0 {
        let cyl = scheme.alpha.get(c).ok_or_else(|| Error::InvalidParameter(format!("unknown cylinder {c}")))?;
        for i in 0..PER_CYLINDER {
            let z = cyl.lo + cyl.length * (i as f64 + offset) / PER_CYLINDER as f64;
            let mut x = z;
            let mut phase = 0.0;
            let mut here = Some(c);
            for _ in 0..n {
                let Some(cur) = here else { break };
                let (hv, image) = cylinder_step(scheme, h, cur, x);
                phase += k.iter().zip(&hv).map(|(a, b)| *a as f64 * b).sum::<f64>()
                    + omega * scheme.alpha[cur].phi as f64;
                x = image.clamp(scheme.y_lo, scheme.y_hi - f64::EPSILON);
                here = scheme.cylinder_of(x);
            }
            if here.is_some() || n == 0 {
                samples.push((z, phase, here));
            }
        }
    }
    if samples.is_empty() {
        return Err(Error::NoConvergence("every sample orbit left the resolved partition".into()));
    }
    let cyl_of_start: Vec<usize> = samples.iter().map(|(z, _, _)| scheme.cylinder_of(*z).unwrap_or(0)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = EigenDefect { defect: f64::INFINITY, best_trial: 0, chi: 0.0, isometry_error: 0.0 };
    let mut phases = vec![0.0; scheme.alpha.len()];
    for t in 0..trials {
        if t > 0 {
            phases.iter_mut().for_each(|p| *p = rng.gen_range(0.0..std::f64::consts::TAU));
        }
        let u = |c: usize| Complex64::from_polar(1.0, phases[c]);
        let mu: Vec<(Complex64, Complex64)> = samples
            .iter()
            .zip(&cyl_of_start)
            .map(|((_, phase, end), &start)| {
                let end_val = end.map_or(Complex64::new(1.0, 0.0), u);
                (Complex64::from_polar(1.0, -phase) * end_val, u(start))
            })
            .collect();
        let iso = mu.iter().map(|(m, _)| (m.norm() - 1.0).abs()).fold(0.0, f64::max);
        best.isometry_error = best.isometry_error.max(iso);
        let mean: Complex64 = mu.iter().map(|(m, u)| m * u.conj()).sum::<Complex64>() / mu.len() as f64;
        let chi = mean.arg();
        let rot = Complex64::from_polar(1.0, chi);
        let defect = mu.iter().map(|(m, u)| (m - rot * u).norm()).fold(0.0, f64::max);
        if defect < best.defect {
            best.defect = defect;
            best.best_trial = t;
            best.chi = chi;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constructed_resonance() {
        let (d, k) = resonance_defect_values(&[PI], 1, &[PI], 1, 3);
        assert!(d < 1e-15);
        assert_eq!(k.len(), 1);
        let (d, _) = resonance_defect_values(&[0.0, 0.0], 2, &[0.0, 0.0], 3, 2);
        assert_eq!(d, 0.0);
    }
}
