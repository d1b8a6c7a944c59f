//! Ulam discretization of the induced transfer operator and its twisted,
//! return-time-resolved pieces.
//!
//! Quadrature is carried out in image coordinates: for a cylinder `a` with
//! inverse branch `Ψ_a : Y → a`, the Lebesgue piece
//! `M[i][j] = ∫_{cell_i} e^{ik·H(Ψ_a y)} |Ψ_a'(y)| 1{Ψ_a y ∈ cell_j} dy`
//! is integrated with Gauss-Legendre nodes on the image cell. The state of
//! each node along the excursion word (point, partial cocycle sum and
//! Jacobian) is carried down the cylinder tree, so a cylinder costs one
//! inverse-branch step per node regardless of its return time.
//!
//! Matrices are stored in the *function* convention with respect to the
//! discrete stationary measure `p`: `R̃[i][j] = M[i][j] / |cell_j| · p_j / p_i`.
//! In this convention `R̃_0` has unit row sums up to truncation and
//! `∫ w · R̃ v dμ_Z = ∫ (w ∘ G) v dμ_Z`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cocycle::ToralCocycle;
use crate::error::{Error, Result};
use crate::inducing::InducingScheme;
use crate::quad;
use crate::sparse::{CsrMatrix, DenseMatrix};

/// Gauss-Legendre nodes per image cell.
pub const DEFAULT_ORDER: usize = 8;
/// Condition numbers above this are reported as numerically singular.
pub const SINGULAR_CONDITION: f64 = 1e12;

/// Equal-width partition of `Y` into `m` cells.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UlamGrid {
    pub y_lo: f64,
    pub y_hi: f64,
    pub m: usize,
    pub order: usize,
}

impl UlamGrid {
    pub fn new(y_lo: f64, y_hi: f64, m: usize) -> Result<Self> {
        if m == 0 || !(y_hi > y_lo) {
            return Err(Error::InvalidParameter(format!("grid needs m >= 1 and a nonempty interval, got m={m}")));
        }
        Ok(Self { y_lo, y_hi, m, order: DEFAULT_ORDER })
    }

    pub fn for_scheme(scheme: &InducingScheme, m: usize) -> Result<Self> {
        Self::new(scheme.y_lo, scheme.y_hi, m)
    }

    pub fn width(&self) -> f64 {
        (self.y_hi - self.y_lo) / self.m as f64
    }

    pub fn cell_bounds(&self, j: usize) -> (f64, f64) {
        let w = self.width();
        let hi = if j + 1 == self.m { self.y_hi } else { self.y_lo + (j + 1) as f64 * w };
        (self.y_lo + j as f64 * w, hi)
    }

    pub fn cell_of(&self, x: f64) -> usize {
        let j = ((x - self.y_lo) / self.width()).floor();
        (j.max(0.0) as usize).min(self.m - 1)
    }

    /// Inclusive range of cells met by the half-open interval `[lo, hi)`.
    pub fn cell_range(&self, lo: f64, hi: f64) -> (usize, usize) {
        let ja = self.cell_of(lo);
        let mut jb = self.cell_of(hi);
        while jb > ja && hi <= self.cell_bounds(jb).0 {
            jb -= 1;
        }
        (ja, jb)
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.m).map(|j| self.y_lo + (j as f64 + 0.5) * self.width()).collect()
    }
}

/// Portion of `{φ = n}` inside one grid cell; the unit from which the
/// discrete tower is built.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TowerClass {
    pub cell: usize,
    pub phi: usize,
    /// Lebesgue fraction of the cell occupied by `{φ = n}`.
    pub fraction: f64,
    /// Point of the class used for the phases on the upper tower levels.
    pub representative: f64,
    /// Cylinder holding the largest share of the class.
    pub cylinder: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwistedOperatorSet {
    pub k: Vec<i32>,
    pub grid: UlamGrid,
    pub phi_max: usize,
    /// `pieces[n - 1]` is `R̃_{k,n}`.
    pub pieces: Vec<CsrMatrix>,
    /// Discrete stationary measure of the cells (sums to one).
    pub stationary: Vec<f64>,
    /// Truncation-corrected, column-stochastic untwisted transfer matrix
    /// acting on cell masses (row = target cell), row-major.
    pub transfer: Vec<f64>,
    /// `mass_by_phi[n] = μ_Z(φ = n)` as resolved by the pieces.
    pub mass_by_phi: Vec<f64>,
    /// Largest row deficit `1 - Σ_j R̃_0[i][j]` of the untwisted pieces.
    pub row_deficit: f64,
    /// `μ_Z`-mass missing from the pieces.
    pub truncation_measure: f64,
    /// Lebesgue fraction of `Y` whose return time is unresolved.
    pub truncation_mass: f64,
    pub classes: Vec<TowerClass>,
    pub stationary_residual: f64,
    pub warnings: Vec<String>,
}

/// Per-node state along an excursion word.
#[derive(Clone)]
struct Chain {
    u: Vec<f64>,
    s: Vec<f64>,
    jac: Vec<f64>,
}

type ColumnMap = BTreeMap<usize, Vec<Complex64>>;

struct Builder<'a> {
    scheme: &'a InducingScheme,
    h: &'a ToralCocycle,
    grid: &'a UlamGrid,
    ks: Vec<Vec<f64>>,
    ys: Vec<f64>,
    ws: Vec<f64>,
    gl: (Vec<f64>, Vec<f64>),
    /// `acc[kidx][n]` maps a source cell to the column over target cells.
    acc: Vec<Vec<ColumnMap>>,
    classes: BTreeMap<(usize, usize), (f64, f64, usize, f64)>,
}

impl<'a> Builder<'a> {
    fn add(&mut self, n: usize, i: usize, j: usize, weight: f64, hsum: &[f64]) {
        let m = self.grid.m;
        for (kidx, k) in self.ks.iter().enumerate() {
            let phase: f64 = k.iter().zip(hsum).map(|(a, b)| a * b).sum();
            let col = self.acc[kidx][n].entry(j).or_insert_with(|| vec![Complex64::new(0.0, 0.0); m]);
            col[i] += Complex64::from_polar(weight, phase);
        }
    }

    /// Full pull-back of `y` through the cylinder: `(z, dz/dy, H(z))`.
    fn pull_back_full(&self, itinerary: &[u8], y: f64) -> (f64, f64, Vec<f64>) {
        let (z, jac) = self.scheme.pull_back(itinerary, y);
        let mut hs = vec![0.0; self.h.dim()];
        let mut x = z;
        for &b in itinerary {
            self.h.accumulate(x, &mut hs);
            x = self.scheme.map.branches[b as usize].forward(x);
        }
        (z, jac, hs)
    }

    fn record_class(&mut self, j: usize, phi: usize, cyl: usize, overlap: f64, mid: f64) {
        let frac = overlap / self.grid.width();
        let e = self.classes.entry((j, phi)).or_insert((0.0, mid, cyl, 0.0));
        e.0 += frac;
        if overlap > e.3 {
            e.1 = mid;
            e.2 = cyl;
            e.3 = overlap;
        }
    }

    fn cylinder(&mut self, cid: usize, chain: &Chain) {
        let c = &self.scheme.alpha[cid];
        let (phi, lo, hi, length) = (c.phi, c.lo, c.hi, c.length);
        let itinerary = c.itinerary.clone();
        let ret = self.scheme.map.branches[self.scheme.return_branch].clone();
        let d = self.h.dim();
        let order = self.grid.order;
        let (ja, jb) = self.grid.cell_range(lo, hi);
        let chain_cell = |b: &mut Self, i: usize, j: usize| {
            let mut hs = vec![0.0; d];
            for q in i * order..(i + 1) * order {
                let z = ret.inverse(chain.u[q]);
                let w = b.ws[q] * chain.jac[q] / ret.derivative(z);
                hs.copy_from_slice(&chain.s[q * d..(q + 1) * d]);
                b.h.accumulate(z, &mut hs);
                b.add(phi, i, j, w, &hs);
            }
        };
        if ja == jb {
            self.record_class(ja, phi, cid, length, lo + 0.5 * length);
            for i in 0..self.grid.m {
                chain_cell(self, i, ja);
            }
            return;
        }
        for j in ja..=jb {
            let (a, b) = self.grid.cell_bounds(j);
            let (s, e) = (lo.max(a), hi.min(b));
            if e > s {
                self.record_class(j, phi, cid, e - s, 0.5 * (s + e));
            }
        }
        for i in 0..self.grid.m {
            let (ya, yb) = self.grid.cell_bounds(i);
            let za = self.scheme.pull_back(&itinerary, ya).0;
            let zb = self.scheme.pull_back(&itinerary, yb).0;
            let (ca, cb) = self.grid.cell_range(za, zb);
            if ca == cb {
                chain_cell(self, i, ca);
                continue;
            }
            // The image cell straddles source-cell boundaries: split at their images.
            let mut cuts = vec![ya];
            for jj in (ca + 1)..=cb {
                let zc = self.grid.cell_bounds(jj).0;
                cuts.push(self.scheme.push_forward(&itinerary, zc).clamp(ya, yb));
            }
            cuts.push(yb);
            for (t, seg) in cuts.windows(2).enumerate() {
                if seg[1] <= seg[0] {
                    continue;
                }
                let (xs, wts) = quad::mapped(&self.gl.0, &self.gl.1, seg[0], seg[1]);
                for (&y, &wt) in xs.iter().zip(&wts) {
                    let (_, jac, hs) = self.pull_back_full(&itinerary, y);
                    self.add(phi, i, ca + t, wt * jac, &hs);
                }
            }
        }
    }
}

/// Builds the twisted operator sets for several frequency vectors in one
/// pass over the partition. The untwisted data needed for the stationary
/// measure is always computed.
pub fn build_twisted_sets(
    scheme: &InducingScheme,
    h: &ToralCocycle,
    ks: &[Vec<i32>],
    grid: &UlamGrid,
    phi_max: usize,
) -> Result<Vec<TwistedOperatorSet>> {
    if phi_max == 0 || phi_max > scheme.phi_max {
        return Err(Error::InvalidParameter(format!(
            "phi_max {phi_max} must lie in 1..={} (partition depth)",
            scheme.phi_max
        )));
    }
    if (grid.y_lo, grid.y_hi) != (scheme.y_lo, scheme.y_hi) {
        return Err(Error::InvalidParameter("grid does not cover the return set".into()));
    }
    for k in ks {
        if k.len() != h.dim() {
            return Err(Error::InvalidParameter(format!("k={k:?} does not match cocycle dimension {}", h.dim())));
        }
    }
    let m = grid.m;
    let gl = quad::gauss_legendre(grid.order);
    let mut ys = Vec::with_capacity(m * grid.order);
    let mut ws = Vec::with_capacity(m * grid.order);
    for i in 0..m {
        let (a, b) = grid.cell_bounds(i);
        let (x, w) = quad::mapped(&gl.0, &gl.1, a, b);
        ys.extend(x);
        ws.extend(w);
    }
    let mut all_k: Vec<Vec<f64>> = vec![vec![0.0; h.dim()]];
    all_k.extend(ks.iter().map(|k| k.iter().map(|&x| x as f64).collect()));
    let nk = all_k.len();
    let mut b = Builder {
        scheme,
        h,
        grid,
        ks: all_k,
        ys,
        ws,
        gl,
        acc: vec![vec![ColumnMap::new(); phi_max + 1]; nk],
        classes: BTreeMap::new(),
    };

    let mut children: Vec<Vec<usize>> = vec![Vec::new(); scheme.alpha.len()];
    for c in &scheme.alpha {
        if let Some(p) = c.parent {
            if c.phi <= phi_max {
                children[p].push(c.id);
            }
        }
    }
    let d = h.dim();
    let root = Chain { u: b.ys.clone(), s: vec![0.0; b.ys.len() * d], jac: vec![1.0; b.ys.len()] };
    let mut stack: Vec<(usize, Chain)> =
        scheme.alpha.iter().filter(|c| c.parent.is_none()).map(|c| (c.id, root.clone())).collect();
    while let Some((cid, chain)) = stack.pop() {
        b.cylinder(cid, &chain);
        let kids = &children[cid];
        let mut chain = Some(chain);
        for (idx, &ch) in kids.iter().enumerate() {
            let br = &scheme.map.branches[scheme.alpha[ch].itinerary[1] as usize];
            let mut next = if idx + 1 == kids.len() { chain.take().unwrap() } else { chain.clone().unwrap() };
            for q in 0..next.u.len() {
                let x = br.inverse(next.u[q]);
                next.u[q] = x;
                next.jac[q] /= br.derivative(x);
                h.accumulate(x, &mut next.s[q * d..(q + 1) * d]);
            }
            stack.push((ch, next));
        }
    }

    let width = grid.width();
    // Untwisted transfer matrix on masses with truncation correction.
    let mut transfer = vec![0.0; m * m];
    let mut deepest: Vec<Option<usize>> = vec![None; m];
    for n in 1..=phi_max {
        for (&j, col) in &b.acc[0][n] {
            for (i, v) in col.iter().enumerate() {
                transfer[i * m + j] += v.re / width;
            }
            deepest[j] = Some(n);
        }
    }
    let mut deficit = vec![0.0; m];
    for j in 0..m {
        let colsum: f64 = (0..m).map(|i| transfer[i * m + j]).sum();
        deficit[j] = 1.0 - colsum;
        let shape: Vec<f64> = match deepest[j] {
            Some(n) => {
                let col = &b.acc[0][n][&j];
                let tot: f64 = col.iter().map(|v| v.re).sum();
                col.iter().map(|v| v.re / tot).collect()
            }
            None => vec![1.0 / m as f64; m],
        };
        for i in 0..m {
            transfer[i * m + j] += deficit[j] * shape[i];
        }
    }
    let (stationary, stationary_residual) = power_iteration(&transfer, m, 1e-15, 200_000)?;
    if stationary.iter().any(|&p| !(p > 0.0)) {
        return Err(Error::Degenerate("stationary vector has a nonpositive cell".into()));
    }
    let truncation_measure: f64 = (0..m).map(|j| deficit[j] * stationary[j]).sum();

    let mut mass_by_phi = vec![0.0; phi_max + 1];
    for n in 1..=phi_max {
        for (&j, col) in &b.acc[0][n] {
            mass_by_phi[n] += col.iter().map(|v| v.re).sum::<f64>() / width * stationary[j];
        }
    }

    let to_pieces = |acc: &Vec<ColumnMap>| -> Vec<CsrMatrix> {
        (1..=phi_max)
            .map(|n| {
                let trip = acc[n].iter().flat_map(|(&j, col)| {
                    let st = &stationary;
                    col.iter()
                        .enumerate()
                        .map(move |(i, v)| (i, j, v * (st[j] / (width * st[i]))))
                });
                CsrMatrix::from_triplets(m, m, trip)
            })
            .collect()
    };
    let pieces0 = to_pieces(&b.acc[0]);
    let mut rowsum = vec![0.0; m];
    for p in &pieces0 {
        for (i, r) in rowsum.iter_mut().enumerate() {
            *r += p.row(i).map(|(_, v)| v.re).sum::<f64>();
        }
    }
    let row_deficit = rowsum.iter().map(|r| (1.0 - r).max(0.0)).fold(0.0, f64::max);

    let classes: Vec<TowerClass> = b
        .classes
        .iter()
        .map(|(&(cell, phi), &(fraction, representative, cylinder, _))| TowerClass {
            cell,
            phi,
            fraction,
            representative,
            cylinder,
        })
        .collect();

    let mut warnings = Vec::new();
    let truncation_mass = scheme
        .unresolved
        .iter()
        .map(|r| r.length)
        .sum::<f64>()
        / scheme.y_length()
        + scheme.alpha.iter().filter(|c| c.phi > phi_max).map(|c| c.length).sum::<f64>() / scheme.y_length();
    if truncation_mass > 1e-3 {
        warnings.push(format!(
            "return times above {phi_max} carry Lebesgue fraction {truncation_mass:.3e} of Y"
        ));
    }
    if m < 32 {
        warnings.push(format!("grid has {m} cells, fewer than the recommended 32"));
    }

    let mut out = Vec::with_capacity(ks.len());
    for (kidx, k) in ks.iter().enumerate() {
        let pieces = if k.iter().all(|&x| x == 0) { pieces0.clone() } else { to_pieces(&b.acc[kidx + 1]) };
        out.push(TwistedOperatorSet {
            k: k.clone(),
            grid: grid.clone(),
            phi_max,
            pieces,
            stationary: stationary.clone(),
            transfer: transfer.clone(),
            mass_by_phi: mass_by_phi.clone(),
            row_deficit,
            truncation_measure,
            truncation_mass,
            classes: classes.clone(),
            stationary_residual,
            warnings: warnings.clone(),
        });
    }
    Ok(out)
}

/// Single-`k` convenience wrapper around [`build_twisted_sets`].
pub fn build_twisted_set(
    scheme: &InducingScheme,
    h: &ToralCocycle,
    k: &[i32],
    grid: &UlamGrid,
    phi_max: usize,
) -> Result<TwistedOperatorSet> {
    Ok(build_twisted_sets(scheme, h, &[k.to_vec()], grid, phi_max)?.remove(0))
}

/// Perron vector of a column-stochastic matrix by power iteration.
/// Returns the vector (summing to one) and the final `ℓ¹` residual.
pub fn power_iteration(p: &[f64], m: usize, tol: f64, max_iter: usize) -> Result<(Vec<f64>, f64)> {
    let mut v = vec![1.0 / m as f64; m];
    let mut next = vec![0.0; m];
    for _ in 0..max_iter {
        for (i, out) in next.iter_mut().enumerate() {
            *out = p[i * m..(i + 1) * m].iter().zip(&v).map(|(a, b)| a * b).sum();
        }
        let s: f64 = next.iter().sum();
        next.iter_mut().for_each(|x| *x /= s);
        let diff: f64 = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut v, &mut next);
        if diff < tol {
            let res = (0..m)
                .map(|i| (p[i * m..(i + 1) * m].iter().zip(&v).map(|(a, b)| a * b).sum::<f64>() - v[i]).abs())
                .sum();
            return Ok((v, res));
        }
    }
    Err(Error::NoConvergence(format!("power iteration did not converge in {max_iter} steps")))
}

/// Stationary probability vector of the untwisted set, recomputed from its
/// transfer matrix.
pub fn stationary_density(set: &TwistedOperatorSet) -> Result<Vec<f64>> {
    if set.k.iter().any(|&x| x != 0) {
        return Err(Error::InvalidParameter("stationary density needs the untwisted set (k = 0)".into()));
    }
    Ok(power_iteration(&set.transfer, set.grid.m, 1e-15, 200_000)?.0)
}

/// Leading eigenvalue moduli of the untwisted transfer matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralGap {
    pub perron: f64,
    pub lambda2: f64,
}

pub fn spectral_gap(set: &TwistedOperatorSet) -> Result<SpectralGap> {
    let m = set.grid.m;
    let p = DMatrix::from_row_slice(m, m, &set.transfer);
    let mut mods: Vec<f64> = p.complex_eigenvalues().iter().map(|z| z.norm()).collect();
    if mods.iter().any(|x| !x.is_finite()) {
        return Err(Error::NoConvergence("eigenvalue solver returned non-finite values".into()));
    }
    mods.sort_by(|a, b| b.total_cmp(a));
    Ok(SpectralGap { perron: mods[0], lambda2: mods.get(1).copied().unwrap_or(0.0) })
}

/// `Σ_{n ≤ n_cap} R̃_{k,n} e^{inω}` as a dense matrix.
pub fn assemble_r_omega_upto(set: &TwistedOperatorSet, omega: f64, n_cap: usize) -> DenseMatrix {
    let m = set.grid.m;
    let mut out = DenseMatrix::zeros(m, m);
    for (idx, piece) in set.pieces.iter().enumerate().take(n_cap) {
        let e = Complex64::from_polar(1.0, (idx + 1) as f64 * omega);
        for r in 0..m {
            let row = out.row_mut(r);
            for (c, v) in piece.row(r) {
                row[c] += v * e;
            }
        }
    }
    out
}

pub fn assemble_r_omega(set: &TwistedOperatorSet, omega: f64) -> DenseMatrix {
    assemble_r_omega_upto(set, omega, set.pieces.len())
}

/// Sup norms of the individual pieces, to compare with `C3 μ_Z(φ = n)`.
pub fn piece_norms(set: &TwistedOperatorSet) -> Vec<f64> {
    set.pieces.iter().map(|p| p.sup_norm()).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormKind {
    /// Maximum absolute row sum.
    Sup,
    /// Largest singular value.
    Spectral,
}

/// Resolvent at one frequency.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolventPoint {
    pub omega: f64,
    pub norm: f64,
    pub condition: f64,
    pub singular: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolventScan {
    pub k: Vec<i32>,
    pub points: Vec<ResolventPoint>,
    /// Largest norm over the non-singular grid points.
    pub sup_norm: f64,
    pub argmax_omega: f64,
}

impl ResolventScan {
    pub fn singular_points(&self) -> impl Iterator<Item = &ResolventPoint> {
        self.points.iter().filter(|p| p.singular)
    }

    pub fn is_singular(&self) -> bool {
        self.points.iter().any(|p| p.singular)
    }
}

/// Inverse of `I - R̃_k(ω)` when it exists.
pub fn resolvent(set: &TwistedOperatorSet, omega: f64) -> Option<DMatrix<Complex64>> {
    let m = set.grid.m;
    let r = assemble_r_omega(set, omega).to_nalgebra();
    let a = DMatrix::<Complex64>::identity(m, m) - r;
    a.try_inverse()
}

fn sup_norm(a: &DMatrix<Complex64>) -> f64 {
    a.row_iter().map(|r| r.iter().map(|v| v.norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// Evaluates `‖(I - R̃_k(ω))^{-1}‖` at one frequency. The point is flagged
/// singular when the inverse does not exist, when the condition number
/// exceeds [`SINGULAR_CONDITION`], or when the inverse norm reaches half the
/// reciprocal of the truncation deficit (a truncated operator that would
/// otherwise have eigenvalue one cannot get closer than that).
pub fn resolvent_at(set: &TwistedOperatorSet, omega: f64, norm: NormKind) -> ResolventPoint {
    let m = set.grid.m;
    let r = assemble_r_omega(set, omega).to_nalgebra();
    let a = DMatrix::<Complex64>::identity(m, m) - r;
    let forced = set.k.iter().all(|&x| x == 0) && omega.rem_euclid(std::f64::consts::TAU) == 0.0;
    match a.clone().try_inverse() {
        None => ResolventPoint { omega, norm: f64::INFINITY, condition: f64::INFINITY, singular: true },
        Some(inv) => {
            let inv_sup = sup_norm(&inv);
            let condition = sup_norm(&a) * inv_sup;
            let value = match norm {
                NormKind::Sup => inv_sup,
                NormKind::Spectral => inv.singular_values().max(),
            };
            let limit = if set.row_deficit > 0.0 { 0.5 / set.row_deficit } else { f64::INFINITY };
            let singular = forced || !condition.is_finite() || condition > SINGULAR_CONDITION || inv_sup >= limit;
            ResolventPoint { omega, norm: value, condition, singular }
        }
    }
}

/// Scans `ω_j = 2πj / omega_count` and reports the largest resolvent norm.
pub fn resolvent_diagnostic(set: &TwistedOperatorSet, omega_count: usize, norm: NormKind) -> Result<ResolventScan> {
    if omega_count == 0 {
        return Err(Error::InvalidParameter("omega grid must be nonempty".into()));
    }
    let points: Vec<ResolventPoint> = (0..omega_count)
        .map(|j| resolvent_at(set, std::f64::consts::TAU * j as f64 / omega_count as f64, norm))
        .collect();
    let (sup_norm, argmax_omega) = points
        .iter()
        .filter(|p| !p.singular)
        .fold((0.0f64, 0.0f64), |acc, p| if p.norm > acc.0 { (p.norm, p.omega) } else { acc });
    Ok(ResolventScan { k: set.k.clone(), points, sup_norm, argmax_omega })
}
