//! Renewal sequences `T_{k,n}`, their Fourier cross-check, and the discrete
//! tower with its first/last-return decomposition.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::cocycle::ToralCocycle;
use crate::error::{Error, Result};
use crate::fit::{self, LineFit, Window};
use crate::inducing::InducingScheme;
use crate::operators::{TowerClass, TwistedOperatorSet, SINGULAR_CONDITION};
use crate::sparse::{CsrMatrix, DenseMatrix};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum RenewalMode {
    Matrix,
    /// Apply the sequence to one probe vector.
    Vector(Vec<Complex64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum RenewalValues {
    Matrices(Vec<DenseMatrix>),
    Vectors(Vec<Vec<Complex64>>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RenewalSequence {
    pub k: Vec<i32>,
    pub horizon: usize,
    pub values: RenewalValues,
    /// Sup norm of `T_{k,n}` (max row sum) or of `T_{k,n} v` (max modulus).
    pub norms: Vec<f64>,
}

impl RenewalSequence {
    pub fn matrix(&self, n: usize) -> Option<&DenseMatrix> {
        match &self.values {
            RenewalValues::Matrices(ms) => ms.get(n),
            RenewalValues::Vectors(_) => None,
        }
    }

    pub fn vector(&self, n: usize) -> Option<&[Complex64]> {
        match &self.values {
            RenewalValues::Vectors(vs) => vs.get(n).map(|v| v.as_slice()),
            RenewalValues::Matrices(_) => None,
        }
    }
}

/// `T_{k,0} = I` and `T_{k,n} = Σ_{j=1}^{n} R̃_{k,j} T_{k,n-j}`, with pieces
/// beyond the set's truncation treated as zero.
pub fn renewal_recursion(set: &TwistedOperatorSet, horizon: usize, mode: RenewalMode) -> Result<RenewalSequence> {
    let m = set.grid.m;
    let p = set.pieces.len();
    match mode {
        RenewalMode::Matrix => {
            let mut ts: Vec<DenseMatrix> = vec![DenseMatrix::identity(m)];
            for n in 1..=horizon {
                let mut t = DenseMatrix::zeros(m, m);
                for j in 1..=n.min(p) {
                    t.add_sparse_dense(&set.pieces[j - 1], &ts[n - j]);
                }
                ts.push(t);
            }
            let norms = ts.iter().map(|t| t.sup_norm()).collect();
            Ok(RenewalSequence { k: set.k.clone(), horizon, values: RenewalValues::Matrices(ts), norms })
        }
        RenewalMode::Vector(v) => {
            if v.len() != m {
                return Err(Error::InvalidParameter(format!("probe has length {}, grid has {m} cells", v.len())));
            }
            let mut ts: Vec<Vec<Complex64>> = vec![v];
            for n in 1..=horizon {
                let mut t = vec![ZERO; m];
                for j in 1..=n.min(p) {
                    set.pieces[j - 1].mul_vec_add(&ts[n - j], ONE, &mut t);
                }
                ts.push(t);
            }
            let norms = ts.iter().map(|t| t.iter().map(|x| x.norm()).fold(0.0, f64::max)).collect();
            Ok(RenewalSequence { k: set.k.clone(), horizon, values: RenewalValues::Vectors(ts), norms })
        }
    }
}

/// Log-log least-squares fit of a norm sequence indexed by `n`.
pub fn decay_fit(norms: &[f64], window: Window) -> Result<LineFit> {
    fit::loglog_slope_indexed(norms, window)
}

/// Coefficients recovered by discrete Fourier inversion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierRenewal {
    pub k: Vec<i32>,
    pub omega_count: usize,
    /// Radius of the circle the resolvent was sampled on.
    pub radius: f64,
    pub values: Vec<DenseMatrix>,
    pub max_condition: f64,
}

/// Recovers `T_n`, `n ≤ horizon`, from samples of `T(z) = Σ_n T_n z^n` at
/// `z_j = r e^{2πij/M}`. `sample(z)` returns `T(z)`.
///
/// The inversion is a four-step DFT: with `M = M1 M2`, the samples for one
/// residue `j1 mod M1` are transformed with a length-`M2` FFT and twiddled
/// into the output, so only `M2` sampled matrices are alive at a time.
pub fn fourier_invert(
    dim: usize,
    horizon: usize,
    omega_count: usize,
    radius: f64,
    sample: &mut dyn FnMut(Complex64) -> Result<DMatrix<Complex64>>,
) -> Result<Vec<DenseMatrix>> {
    if !omega_count.is_power_of_two() {
        return Err(Error::InvalidParameter(format!("omega_count {omega_count} is not a power of two")));
    }
    let mm = omega_count;
    let log2 = mm.trailing_zeros();
    let m2 = 1usize << log2.div_ceil(2);
    let m1 = mm / m2;
    let fft = FftPlanner::<f64>::new().plan_fft_forward(m2);
    let entries = dim * dim;
    let mut out: Vec<DenseMatrix> = (0..=horizon).map(|_| DenseMatrix::zeros(dim, dim)).collect();
    let mut block = vec![ZERO; entries * m2];
    let mut buf = vec![ZERO; m2];
    let tau = std::f64::consts::TAU;
    for j1 in 0..m1 {
        for j2 in 0..m2 {
            let j = j1 + m1 * j2;
            let z = Complex64::from_polar(radius, tau * j as f64 / mm as f64);
            let t = sample(z)?;
            // Entry-major layout: block[e * m2 + j2].
            for r in 0..dim {
                for c in 0..dim {
                    block[(r * dim + c) * m2 + j2] = t[(r, c)];
                }
            }
        }
        for e in 0..entries {
            buf.copy_from_slice(&block[e * m2..(e + 1) * m2]);
            fft.process(&mut buf);
            block[e * m2..(e + 1) * m2].copy_from_slice(&buf);
        }
        for (n, o) in out.iter_mut().enumerate() {
            let tw = Complex64::from_polar(1.0, -tau * ((n * j1) % mm) as f64 / mm as f64);
            let rr = n % m2;
            for (e, x) in o.data.iter_mut().enumerate() {
                *x += tw * block[e * m2 + rr];
            }
        }
    }
    for (n, o) in out.iter_mut().enumerate() {
        let scale = 1.0 / (mm as f64 * radius.powi(n as i32));
        o.data.iter_mut().for_each(|x| *x *= scale);
    }
    Ok(out)
}

/// `T̂_{k,n}` from `(I - R̃_k(ω))^{-1}` on the grid `ω_j = 2πj/omega_count`.
///
/// For `k = 0` the unit circle passes through the singular point `ω = 0`,
/// so the resolvent is sampled on the circle of radius `1 - 16/omega_count`
/// instead and the coefficients are rescaled; the aliasing error is then of
/// order `e^{-16}` relative to the coefficients.
pub fn renewal_via_fourier(set: &TwistedOperatorSet, horizon: usize, omega_count: usize) -> Result<FourierRenewal> {
    if omega_count < 4 * horizon.max(1) {
        return Err(Error::InvalidParameter(format!(
            "omega_count {omega_count} must be at least 4 × horizon {horizon}"
        )));
    }
    let m = set.grid.m;
    let untwisted = set.k.iter().all(|&x| x == 0);
    let radius = if untwisted { 1.0 - 16.0 / omega_count as f64 } else { 1.0 };
    let limit = if set.row_deficit > 0.0 && !untwisted { 0.5 / set.row_deficit } else { f64::INFINITY };
    let mut max_condition = 0.0f64;
    let id = DMatrix::<Complex64>::identity(m, m);
    let mut sample = |z: Complex64| -> Result<DMatrix<Complex64>> {
        let a = &id - assemble_r_at(set, z).to_nalgebra();
        let omega = z.arg().rem_euclid(std::f64::consts::TAU);
        let inv = a.clone().try_inverse().ok_or(Error::Singular { omega, condition: f64::INFINITY })?;
        let inv_sup = row_sup(&inv);
        let cond = row_sup(&a) * inv_sup;
        if !cond.is_finite() || cond > SINGULAR_CONDITION || inv_sup >= limit {
            return Err(Error::Singular { omega, condition: cond });
        }
        max_condition = max_condition.max(cond);
        Ok(inv)
    };
    let values = fourier_invert(m, horizon, omega_count, radius, &mut sample)?;
    Ok(FourierRenewal { k: set.k.clone(), omega_count, radius, values, max_condition })
}

fn row_sup(a: &DMatrix<Complex64>) -> f64 {
    a.row_iter().map(|r| r.iter().map(|v| v.norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// `Σ_n R̃_{k,n} z^n` for complex `z`.
pub fn assemble_r_at(set: &TwistedOperatorSet, z: Complex64) -> DenseMatrix {
    let m = set.grid.m;
    let (r, th) = (z.norm(), z.arg());
    let mut out = DenseMatrix::zeros(m, m);
    for (idx, piece) in set.pieces.iter().enumerate() {
        let n = (idx + 1) as f64;
        let e = Complex64::from_polar(r.powf(n), n * th);
        for row in 0..m {
            let dst = out.row_mut(row);
            for (c, v) in piece.row(row) {
                dst[c] += v * e;
            }
        }
    }
    out
}

/// Relative discrepancy `‖T̂_n - T_n‖ / max(1, ‖T_n‖)` (sup norms) for `n ≤ upto`.
pub fn renewal_agreement(rec: &RenewalSequence, four: &FourierRenewal, upto: usize) -> Result<Vec<f64>> {
    (0..=upto)
        .map(|n| {
            let t = rec.matrix(n).ok_or(Error::HorizonExceeded { requested: n, available: rec.horizon })?;
            let f = four.values.get(n).ok_or(Error::HorizonExceeded { requested: n, available: four.values.len() - 1 })?;
            let mut d = t.clone();
            d.data.iter_mut().zip(&f.data).for_each(|(a, b)| *a -= b);
            Ok(d.sup_norm() / t.sup_norm().max(1.0))
        })
        .collect()
}

/// One state of the discrete tower: a base cell, or level `ℓ ≥ 1` above a class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerState {
    pub class: Option<usize>,
    pub cell: usize,
    pub level: usize,
}

/// Truncated tower over the grid: base states are the cells of `Z`; a class
/// with return time `n` contributes states at levels `1..n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tower {
    pub m: usize,
    pub classes: Vec<TowerClass>,
    pub states: Vec<TowerState>,
    /// `μ_Δ` of each state.
    pub weights: Vec<f64>,
    offsets: Vec<usize>,
}

impl Tower {
    pub fn build(set: &TwistedOperatorSet) -> Self {
        let m = set.grid.m;
        let mut states: Vec<TowerState> = (0..m).map(|j| TowerState { class: None, cell: j, level: 0 }).collect();
        let mut weights: Vec<f64> = set.stationary.clone();
        let mut offsets = Vec::with_capacity(set.classes.len());
        for (c, cl) in set.classes.iter().enumerate() {
            offsets.push(states.len());
            for level in 1..cl.phi {
                states.push(TowerState { class: Some(c), cell: cl.cell, level });
                weights.push(set.stationary[cl.cell] * cl.fraction);
            }
        }
        Self { m, classes: set.classes.clone(), states, weights, offsets }
    }

    pub fn size(&self) -> usize {
        self.states.len()
    }

    /// Index of `(class, level)` for `1 ≤ level < φ(class)`.
    pub fn state_of(&self, class: usize, level: usize) -> usize {
        debug_assert!(level >= 1 && level < self.classes[class].phi);
        self.offsets[class] + level - 1
    }

    /// `Ŷ = π^{-1}(Y)`; with the return set equal to `Y` this is the base.
    pub fn in_y_hat(&self, s: usize) -> bool {
        self.states[s].level == 0
    }

    /// `μ_Δ(Δ_n)`: measure of level `n`.
    pub fn level_measure(&self, n: usize) -> f64 {
        if n == 0 {
            return self.weights[..self.m].iter().sum();
        }
        self.states.iter().zip(&self.weights).filter(|(s, _)| s.level == n).map(|(_, w)| w).sum()
    }

    /// `μ_Δ(D_n)`, `n ≥ 1`: states `n` steps below the top of their column.
    pub fn diagonal_measure(&self, n: usize) -> f64 {
        self.states
            .iter()
            .zip(&self.weights)
            .filter(|(s, _)| s.class.is_some_and(|c| self.classes[c].phi - s.level == n))
            .map(|(_, w)| w)
            .sum()
    }

    pub fn max_level(&self) -> usize {
        self.states.iter().map(|s| s.level).max().unwrap_or(0)
    }
}

/// Transposed view of each piece: `columns[n-1][j]` lists `(i, R̃_{k,n}[i][j])`.
fn piece_columns(set: &TwistedOperatorSet) -> PieceColumns {
    set.pieces
        .iter()
        .map(|p| {
            let mut cols: BTreeMap<usize, Vec<(usize, Complex64)>> = BTreeMap::new();
            for i in 0..p.nrows {
                for (j, v) in p.row(i) {
                    cols.entry(j).or_default().push((i, v));
                }
            }
            cols
        })
        .collect()
}

// cum[c][ℓ] = k · Σ_{t<ℓ} h(f^t z_c), ℓ = 0..φ(c)-1.
fn class_phases(set: &TwistedOperatorSet, tower: &Tower, scheme: &InducingScheme, h: &ToralCocycle) -> Vec<Vec<f64>> {
    tower
        .classes
        .iter()
        .map(|cl| {
            let itin = &scheme.alpha[cl.cylinder].itinerary;
            let mut x = cl.representative;
            let mut acc = 0.0;
            let mut out = Vec::with_capacity(cl.phi);
            for l in 0..cl.phi {
                out.push(acc);
                if l + 1 < cl.phi {
                    acc += h.dot(&set.k, x);
                    x = scheme.map.branches[itin[l] as usize].forward(x);
                }
            }
            out
        })
        .collect()
}

type PieceColumns = Vec<BTreeMap<usize, Vec<(usize, Complex64)>>>;

fn generator_from(tower: &Tower, cum: &[Vec<f64>], cols: &PieceColumns) -> CsrMatrix {
    let size = tower.size();
    let cis = |t: f64| Complex64::from_polar(1.0, t);
    let empty = Vec::new();
    let mut tg = Vec::new();
    for (c, cl) in tower.classes.iter().enumerate() {
        let col = cols[cl.phi - 1].get(&cl.cell).unwrap_or(&empty);
        if cl.phi == 1 {
            for &(i, v) in col {
                tg.push((i, cl.cell, v));
            }
            continue;
        }
        tg.push((tower.state_of(c, 1), cl.cell, cis(cum[c][1])));
        for l in 1..cl.phi - 1 {
            tg.push((tower.state_of(c, l + 1), tower.state_of(c, l), cis(cum[c][l + 1] - cum[c][l])));
        }
        let top = tower.state_of(c, cl.phi - 1);
        for &(i, v) in col {
            tg.push((i, top, v * cis(-cum[c][cl.phi - 1])));
        }
    }
    CsrMatrix::from_triplets(size, size, tg)
}

/// One-step generator of the twisted tower dynamics, in the same function
/// convention as the pieces.
pub fn tower_generator(set: &TwistedOperatorSet, tower: &Tower, scheme: &InducingScheme, h: &ToralCocycle) -> Result<CsrMatrix> {
    if h.dim() != set.k.len() {
        return Err(Error::InvalidParameter("cocycle dimension does not match k".into()));
    }
    Ok(generator_from(tower, &class_phases(set, tower, scheme, h), &piece_columns(set)))
}

/// A point of `X` standing for each tower state: the cell centre on the base
/// and the forward orbit of the class representative above it.
pub fn tower_points(tower: &Tower, set: &TwistedOperatorSet, scheme: &InducingScheme) -> Vec<f64> {
    let mut pts: Vec<f64> = set.grid.centers();
    for cl in &tower.classes {
        let itin = &scheme.alpha[cl.cylinder].itinerary;
        let mut x = cl.representative;
        for l in 1..cl.phi {
            x = scheme.map.branches[itin[l - 1] as usize].forward(x);
            pts.push(x);
        }
    }
    pts
}

/// The operators `A_{k,n}`, `B_{k,n}`, `E_{k,n}` of the first/last-return
/// decomposition, for `n ≤ horizon`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TowerOperators {
    pub k: Vec<i32>,
    pub horizon: usize,
    /// Tower × base.
    pub a: Vec<CsrMatrix>,
    /// Base × tower.
    pub b: Vec<CsrMatrix>,
    /// Tower × tower.
    pub e: Vec<CsrMatrix>,
    /// One-step generator of the twisted tower dynamics.
    pub generator: CsrMatrix,
    pub warnings: Vec<String>,
}

/// Builds the tower operators. Phases on the upper levels are `e^{ik·h}`
/// evaluated along the orbit of each class representative; the final step
/// back to the base carries the piece entry divided by the accumulated
/// phase, so every base-to-base path reproduces `R̃_{k,n}` exactly.
pub fn build_tower_operators(
    set: &TwistedOperatorSet,
    tower: &Tower,
    scheme: &InducingScheme,
    h: &ToralCocycle,
    horizon: usize,
) -> Result<TowerOperators> {
    if h.dim() != set.k.len() {
        return Err(Error::InvalidParameter("cocycle dimension does not match k".into()));
    }
    let m = tower.m;
    let size = tower.size();
    let cum = class_phases(set, tower, scheme, h);
    let cols = piece_columns(set);
    let empty = Vec::new();
    let col_of = |c: usize| -> &Vec<(usize, Complex64)> {
        let cl = &tower.classes[c];
        cols[cl.phi - 1].get(&cl.cell).unwrap_or(&empty)
    };
    let cis = |t: f64| Complex64::from_polar(1.0, t);

    let mut a = Vec::with_capacity(horizon + 1);
    let mut b = Vec::with_capacity(horizon + 1);
    let mut e = Vec::with_capacity(horizon + 1);
    a.push(CsrMatrix::from_triplets(size, m, (0..m).map(|j| (j, j, ONE))));
    b.push(CsrMatrix::from_triplets(m, size, (0..m).map(|j| (j, j, ONE))));
    e.push(CsrMatrix::from_triplets(size, size, (m..size).map(|s| (s, s, ONE))));
    for n in 1..=horizon {
        let mut ta = Vec::new();
        let mut tb = Vec::new();
        let mut te = Vec::new();
        for (c, cl) in tower.classes.iter().enumerate() {
            if cl.phi <= n {
                continue;
            }
            ta.push((tower.state_of(c, n), cl.cell, cis(cum[c][n])));
            let l = cl.phi - n;
            let s = tower.state_of(c, l);
            for &(i, v) in col_of(c) {
                tb.push((i, s, v * cis(-cum[c][l])));
            }
            for l in 1..(cl.phi - n) {
                te.push((tower.state_of(c, l + n), tower.state_of(c, l), cis(cum[c][l + n] - cum[c][l])));
            }
        }
        a.push(CsrMatrix::from_triplets(size, m, ta));
        b.push(CsrMatrix::from_triplets(m, size, tb));
        e.push(CsrMatrix::from_triplets(size, size, te));
    }

    let generator = generator_from(tower, &cum, &cols);
    let mut warnings = Vec::new();
    if horizon > set.phi_max {
        warnings.push(format!(
            "horizon {horizon} exceeds the truncation {}; columns above it are missing from E",
            set.phi_max
        ));
    }
    Ok(TowerOperators { k: set.k.clone(), horizon, a, b, e, generator, warnings })
}

/// Assembles `L_k^n = Σ_{n1+n2+n3=n} A_{n1} T_{n2} B_{n3} + E_n`, caching the
/// inner sums `U_p = Σ_{n2+n3=p} T_{n2} B_{n3}`.
pub struct TowerAssembler<'a> {
    ops: &'a TowerOperators,
    ren: &'a RenewalSequence,
    u: Vec<DenseMatrix>,
}

impl<'a> TowerAssembler<'a> {
    pub fn new(ops: &'a TowerOperators, ren: &'a RenewalSequence) -> Result<Self> {
        if ren.matrix(0).is_none() {
            return Err(Error::InvalidParameter("tower assembly needs a matrix-mode renewal sequence".into()));
        }
        Ok(Self { ops, ren, u: Vec::new() })
    }

    fn u(&mut self, p: usize) -> Result<&DenseMatrix> {
        while self.u.len() <= p {
            let q = self.u.len();
            let size = self.ops.generator.nrows;
            let m = self.ops.b[0].nrows;
            let mut acc = DenseMatrix::zeros(m, size);
            for n2 in 0..=q {
                let t = self.ren.matrix(n2).ok_or(Error::HorizonExceeded { requested: n2, available: self.ren.horizon })?;
                acc.add_dense_sparse(t, &self.ops.b[q - n2]);
            }
            self.u.push(acc);
        }
        Ok(&self.u[p])
    }

    pub fn l_k_n(&mut self, n: usize) -> Result<DenseMatrix> {
        if n > self.ops.horizon {
            return Err(Error::HorizonExceeded { requested: n, available: self.ops.horizon });
        }
        self.u(n)?;
        let mut g = DenseMatrix::from_csr(&self.ops.e[n]);
        for n1 in 0..=n {
            g.add_sparse_dense(&self.ops.a[n1], &self.u[n - n1]);
        }
        Ok(g)
    }
}

/// One-off assembly of `L_k^n`.
pub fn assemble_l_k_n(ops: &TowerOperators, ren: &RenewalSequence, n: usize) -> Result<DenseMatrix> {
    TowerAssembler::new(ops, ren)?.l_k_n(n)
}

/// Result of comparing the assembled `L_k^n` with direct powers of the
/// tower generator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TowerIdentityReport {
    pub k: Vec<i32>,
    pub tower_size: usize,
    /// `max_{entries} |assembled - direct|` for each `n ≤ horizon`.
    pub errors: Vec<f64>,
    pub max_abs_error: f64,
    /// `max_n max |base block of L_k^n - T_{k,n}|`.
    pub base_block_error: f64,
}

/// Checks the decomposition identity for `n ≤ horizon`.
pub fn tower_identity_check(
    set: &TwistedOperatorSet,
    scheme: &InducingScheme,
    h: &ToralCocycle,
    horizon: usize,
) -> Result<TowerIdentityReport> {
    let tower = Tower::build(set);
    let ops = build_tower_operators(set, &tower, scheme, h, horizon)?;
    let ren = renewal_recursion(set, horizon, RenewalMode::Matrix)?;
    let mut asm = TowerAssembler::new(&ops, &ren)?;
    let size = tower.size();
    let m = tower.m;
    let mut power = DenseMatrix::identity(size);
    let mut errors = Vec::with_capacity(horizon + 1);
    let mut base_block_error = 0.0f64;
    for n in 0..=horizon {
        if n > 0 {
            let mut next = DenseMatrix::zeros(size, size);
            next.add_sparse_dense(&ops.generator, &power);
            power = next;
        }
        let g = asm.l_k_n(n)?;
        errors.push(g.max_abs_diff(&power));
        let t = ren.matrix(n).expect("matrix mode");
        for r in 0..m {
            for c in 0..m {
                base_block_error = base_block_error.max((g.get(r, c) - t.get(r, c)).norm());
            }
        }
    }
    let max_abs_error = errors.iter().copied().fold(0.0, f64::max);
    Ok(TowerIdentityReport { k: set.k.clone(), tower_size: size, errors, max_abs_error, base_block_error })
}

/// `‖1_Ŷ A_{k,n}‖` as an operator `L^∞(Z) → L^1(Ŷ)` for each `n`:
/// `Σ_{s ∈ Ŷ} μ_Δ(s) max_j |A[s][j]|`, an upper bound attained for unimodular data.
pub fn restricted_a_norms(ops: &TowerOperators, tower: &Tower) -> Vec<f64> {
    ops.a
        .iter()
        .map(|a| {
            (0..a.nrows)
                .filter(|&s| tower.in_y_hat(s))
                .map(|s| tower.weights[s] * a.row(s).map(|(_, v)| v.norm()).sum::<f64>())
                .sum()
        })
        .collect()
}

/// `‖B_{k,n} 1_Ŷ‖` in the sup norm: largest row sum over columns in `Ŷ`.
pub fn restricted_b_norms(ops: &TowerOperators, tower: &Tower) -> Vec<f64> {
    ops.b
        .iter()
        .map(|b| {
            (0..b.nrows)
                .map(|i| b.row(i).filter(|(s, _)| tower.in_y_hat(*s)).map(|(_, v)| v.norm()).sum::<f64>())
                .fold(0.0, f64::max)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_geometric_toy() {
        let rho = 0.5;
        let mut sample = |z: Complex64| -> Result<DMatrix<Complex64>> {
            Ok(DMatrix::from_element(1, 1, ONE / (ONE - rho * z)))
        };
        let t = fourier_invert(1, 32, 256, 1.0, &mut sample).unwrap();
        for (n, tn) in t.iter().enumerate() {
            assert!((tn.data[0] - Complex64::new(0.5f64.powi(n as i32), 0.0)).norm() < 1e-14, "n={n}");
        }
    }

    #[test]
    fn non_square_block_split() {
        // 2^11 splits into 32 × 64.
        let mut sample = |z: Complex64| -> Result<DMatrix<Complex64>> {
            Ok(DMatrix::from_element(1, 1, ONE / (ONE - 0.25 * z) + z * z))
        };
        let t = fourier_invert(1, 8, 2048, 1.0, &mut sample).unwrap();
        for (n, tn) in t.iter().enumerate() {
            let expect = 0.25f64.powi(n as i32) + if n == 2 { 1.0 } else { 0.0 };
            assert!((tn.data[0].re - expect).abs() < 1e-13 && tn.data[0].im.abs() < 1e-13);
        }
    }
}
