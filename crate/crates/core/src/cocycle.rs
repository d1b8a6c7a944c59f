//! Torus-valued cocycles, their Birkhoff sums along orbits, the induced
//! cocycle on the return set, and observables on `X × T^d` written as finite
//! families of Fourier modes in the fiber variable.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inducing::InducingScheme;
use crate::maps::IntermittentMap;

/// Reduces an angle to `[0, 2π)`.
pub fn wrap(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Circular distance between two angles, in `[0, π]`.
pub fn circ_dist(a: f64, b: f64) -> f64 {
    let d = wrap(a - b);
    d.min(TAU - d)
}

/// Distance on `T^d`: the largest coordinate-wise circular distance.
pub fn torus_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| circ_dist(*x, *y)).fold(0.0, f64::max)
}

/// `amplitude * cos(2π freq x + phase)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrigTerm {
    pub freq: i32,
    pub amplitude: f64,
    pub phase: f64,
}

/// One coordinate of a cocycle: `linear * x + Σ terms`. A nonzero `linear`
/// coefficient should be an integer multiple of `2π` for the value to be
/// continuous on the circle.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CocycleComponent {
    pub linear: f64,
    pub terms: Vec<TrigTerm>,
}

impl CocycleComponent {
    pub fn value(&self, x: f64) -> f64 {
        self.linear * x
            + self
                .terms
                .iter()
                .map(|t| t.amplitude * (TAU * t.freq as f64 * x + t.phase).cos())
                .sum::<f64>()
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.linear
            - self
                .terms
                .iter()
                .map(|t| t.amplitude * TAU * t.freq as f64 * (TAU * t.freq as f64 * x + t.phase).sin())
                .sum::<f64>()
    }

    /// `value(x + e) - value(x)` via sum-to-product, accurate for tiny `e`.
    pub fn diff(&self, x: f64, e: f64) -> f64 {
        self.linear * e
            + self
                .terms
                .iter()
                .map(|t| {
                    let w = TAU * t.freq as f64;
                    -2.0 * t.amplitude * (w * (x + 0.5 * e) + t.phase).sin() * (0.5 * w * e).sin()
                })
                .sum::<f64>()
    }
}

/// A Hölder cocycle `h : [0,1) → T^d` given by trigonometric polynomials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToralCocycle {
    pub eta: f64,
    pub components: Vec<CocycleComponent>,
}

impl ToralCocycle {
    pub fn new(eta: f64, components: Vec<CocycleComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidParameter("a cocycle needs at least one component".into()));
        }
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::InvalidParameter(format!("Hölder exponent must lie in (0,1], got {eta}")));
        }
        Ok(Self { eta, components })
    }

    /// The zero cocycle on `T^d`.
    pub fn zero(d: usize) -> Self {
        Self { eta: 1.0, components: vec![CocycleComponent::default(); d.max(1)] }
    }

    /// `h ≡ c` on `T^1`.
    pub fn constant(c: f64) -> Self {
        Self {
            eta: 1.0,
            components: vec![CocycleComponent {
                linear: 0.0,
                terms: vec![TrigTerm { freq: 0, amplitude: c, phase: 0.0 }],
            }],
        }
    }

    /// `h(x) = ε cos(2πx)` on `T^1`.
    pub fn cosine(eps: f64) -> Self {
        Self {
            eta: 1.0,
            components: vec![CocycleComponent {
                linear: 0.0,
                terms: vec![TrigTerm { freq: 1, amplitude: eps, phase: 0.0 }],
            }],
        }
    }

    /// `h(x) = (ε1 cos 2πx, ε2 sin 4πx)` on `T^2`.
    pub fn planar(eps1: f64, eps2: f64) -> Self {
        Self {
            eta: 1.0,
            components: vec![
                CocycleComponent { linear: 0.0, terms: vec![TrigTerm { freq: 1, amplitude: eps1, phase: 0.0 }] },
                CocycleComponent {
                    linear: 0.0,
                    terms: vec![TrigTerm { freq: 2, amplitude: eps2, phase: -PI / 2.0 }],
                },
            ],
        }
    }

    /// `h(x) = 2π x` on `T^1`, the rotation-by-position cocycle.
    pub fn identity_angle() -> Self {
        Self { eta: 1.0, components: vec![CocycleComponent { linear: TAU, terms: vec![] }] }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn is_zero(&self) -> bool {
        self.components
            .iter()
            .all(|c| c.linear == 0.0 && c.terms.iter().all(|t| t.amplitude == 0.0))
    }

    /// Real-valued lift of `h(x)`.
    pub fn lifted(&self, x: f64) -> Vec<f64> {
        self.components.iter().map(|c| c.value(x)).collect()
    }

    /// Adds the lifted value of `h(x)` into `acc`.
    #[inline]
    pub fn accumulate(&self, x: f64, acc: &mut [f64]) {
        for (a, c) in acc.iter_mut().zip(&self.components) {
            *a += c.value(x);
        }
    }

    /// `k · h(x)` on the lift.
    #[inline]
    pub fn dot(&self, k: &[i32], x: f64) -> f64 {
        k.iter().zip(&self.components).map(|(&ki, c)| ki as f64 * c.value(x)).sum()
    }

    /// Hölder seminorm `sup |h(x) - h(y)| / |x - y|^η` estimated on a grid,
    /// using the circle distance on values and the max over coordinates.
    pub fn holder_seminorm(&self) -> f64 {
        if self.eta == 1.0 {
            let g = 4096;
            return (0..g)
                .map(|i| {
                    let x = (i as f64 + 0.5) / g as f64;
                    self.components.iter().map(|c| c.derivative(x).abs()).fold(0.0, f64::max)
                })
                .fold(0.0, f64::max);
        }
        let g = 512;
        let pts: Vec<f64> = (0..g).map(|i| i as f64 / g as f64).collect();
        let vals: Vec<Vec<f64>> = pts.iter().map(|&x| self.lifted(x)).collect();
        let mut best = 0.0f64;
        for i in 0..g {
            for j in (i + 1)..g {
                let dx = (pts[j] - pts[i]).min(1.0 - (pts[j] - pts[i]));
                let dv = torus_dist(&vals[i], &vals[j]);
                best = best.max(dv / dx.powf(self.eta));
            }
        }
        best
    }
}

/// `h_n(x) = Σ_{j<n} h(f^j x)`, lifted to `R^d`.
pub fn birkhoff_sum_lifted(h: &ToralCocycle, map: &IntermittentMap, x: f64, n: usize) -> Result<Vec<f64>> {
    let mut acc = vec![0.0; h.dim()];
    let mut y = x;
    if !(0.0..1.0).contains(&y) {
        return Err(Error::Domain { x: y });
    }
    for j in 0..n {
        h.accumulate(y, &mut acc);
        if j + 1 < n {
            y = map.evaluate(y)?;
        }
    }
    Ok(acc)
}

/// `h_n(x)` reduced mod `2π` componentwise.
pub fn birkhoff_sum(h: &ToralCocycle, map: &IntermittentMap, x: f64, n: usize) -> Result<Vec<f64>> {
    Ok(birkhoff_sum_lifted(h, map, x, n)?.into_iter().map(wrap).collect())
}

/// `H(z)` together with the return time `φ(z)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InducedCocycleValue {
    /// Reduced mod `2π`.
    pub h: Vec<f64>,
    /// Real-valued lift.
    pub h_lifted: Vec<f64>,
    pub phi: usize,
}

/// `H(z) = h_{φ(z)}(z)` for `z` in the return set.
pub fn induced_cocycle(h: &ToralCocycle, scheme: &InducingScheme, z: f64, cap: usize) -> Result<InducedCocycleValue> {
    let (phi, _) = scheme.first_return(z, cap)?;
    let lifted = birkhoff_sum_lifted(h, &scheme.map, z, phi)?;
    Ok(InducedCocycleValue { h: lifted.iter().map(|a| wrap(*a)).collect(), h_lifted: lifted, phi })
}

/// Orbit of the skew product `(x, ψ) ↦ (f x, ψ + h(x))`, angles in `[0, 2π)`.
pub fn extension_orbit(
    h: &ToralCocycle,
    map: &IntermittentMap,
    x0: f64,
    psi0: &[f64],
    n: usize,
) -> Result<Vec<(f64, Vec<f64>)>> {
    if psi0.len() != h.dim() {
        return Err(Error::InvalidParameter(format!("fiber angle has dimension {}, cocycle {}", psi0.len(), h.dim())));
    }
    let xs = map.orbit(x0, n)?;
    let mut psi: Vec<f64> = psi0.to_vec();
    let mut out = Vec::with_capacity(n + 1);
    for (j, &x) in xs.iter().enumerate() {
        out.push((x, psi.iter().map(|a| wrap(*a)).collect()));
        if j < n {
            h.accumulate(x, &mut psi);
        }
    }
    Ok(out)
}

/// A complex-valued function of `x`: a polynomial part plus a trigonometric
/// part, `Σ_p a_p x^p + Σ_ν c_ν e^{2πiνx}`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ModeFunction {
    pub poly: Vec<Complex64>,
    pub trig: Vec<(i32, Complex64)>,
}

impl ModeFunction {
    pub fn constant(c: Complex64) -> Self {
        Self { poly: vec![c], trig: vec![] }
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.poly.iter().rev() {
            acc = acc * x + c;
        }
        for (nu, c) in &self.trig {
            acc += c * Complex64::from_polar(1.0, TAU * *nu as f64 * x);
        }
        acc
    }

    /// Pointwise complex conjugate as a mode function.
    pub fn conj(&self) -> Self {
        Self {
            poly: self.poly.iter().map(|c| c.conj()).collect(),
            trig: self.trig.iter().map(|(nu, c)| (-nu, c.conj())).collect(),
        }
    }

    pub fn sup_norm_estimate(&self) -> f64 {
        (0..=256).map(|i| self.eval(i as f64 / 256.0).norm()).fold(0.0, f64::max)
    }
}

/// One Fourier mode `v_k(x) e^{ik·ψ}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableMode {
    pub k: Vec<i32>,
    pub v: ModeFunction,
}

/// A real observable on `X × T^d`, `v(x, ψ) = Σ_k v_k(x) e^{ik·ψ}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToralObservable {
    pub d: usize,
    pub modes: Vec<ObservableMode>,
    /// Declared smoothness budget for mode decay.
    pub p: u32,
}

impl ToralObservable {
    /// Builds an observable and checks conjugate symmetry `v_{-k} = conj(v_k)`.
    pub fn new(d: usize, modes: Vec<ObservableMode>, p: u32) -> Result<Self> {
        for m in &modes {
            if m.k.len() != d {
                return Err(Error::InvalidParameter(format!("mode {:?} does not have dimension {d}", m.k)));
            }
        }
        let obs = Self { d, modes, p };
        obs.check_symmetry()?;
        Ok(obs)
    }

    /// `v ≡ c` (only the zero mode).
    pub fn constant(d: usize, c: f64) -> Self {
        Self {
            d,
            modes: vec![ObservableMode { k: vec![0; d], v: ModeFunction::constant(Complex64::new(c, 0.0)) }],
            p: 0,
        }
    }

    /// `cos ψ_1`.
    pub fn cos_psi(d: usize) -> Self {
        let mut kp = vec![0; d];
        kp[0] = 1;
        let km: Vec<i32> = kp.iter().map(|k| -k).collect();
        let half = ModeFunction::constant(Complex64::new(0.5, 0.0));
        Self { d, modes: vec![ObservableMode { k: kp, v: half.clone() }, ObservableMode { k: km, v: half }], p: 0 }
    }

    /// `Σ_p a_p x^p + amp · cos ψ_1`.
    pub fn poly_plus_cos(d: usize, poly: &[f64], amp: f64) -> Self {
        let zero = vec![0; d];
        let mut modes = vec![ObservableMode {
            k: zero,
            v: ModeFunction { poly: poly.iter().map(|&a| Complex64::new(a, 0.0)).collect(), trig: vec![] },
        }];
        if amp != 0.0 {
            let mut cos = Self::cos_psi(d).modes;
            for m in &mut cos {
                m.v = ModeFunction::constant(Complex64::new(0.5 * amp, 0.0));
            }
            modes.extend(cos);
        }
        Self { d, modes, p: 0 }
    }

    pub fn mode(&self, k: &[i32]) -> Option<&ModeFunction> {
        self.modes.iter().find(|m| m.k == k).map(|m| &m.v)
    }

    pub fn check_symmetry(&self) -> Result<()> {
        for m in &self.modes {
            let neg: Vec<i32> = m.k.iter().map(|k| -k).collect();
            let partner = self.mode(&neg).ok_or_else(|| Error::SymmetryViolation(m.k.clone()))?;
            for i in 0..=16 {
                let x = i as f64 / 16.0;
                if (partner.eval(x) - m.v.eval(x).conj()).norm() > 1e-12 {
                    return Err(Error::SymmetryViolation(m.k.clone()));
                }
            }
        }
        Ok(())
    }

    /// `v(x, ψ)`; the imaginary residue is checked and discarded.
    pub fn evaluate(&self, x: f64, psi: &[f64]) -> Result<f64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for m in &self.modes {
            let phase: f64 = m.k.iter().zip(psi).map(|(k, p)| *k as f64 * p).sum();
            acc += m.v.eval(x) * Complex64::from_polar(1.0, phase);
        }
        let scale = 1.0 + acc.re.abs();
        if acc.im.abs() > 1e-12 * scale {
            return Err(Error::SymmetryViolation(vec![]));
        }
        Ok(acc.re)
    }

    /// Frequencies present, sorted.
    pub fn frequencies(&self) -> Vec<Vec<i32>> {
        let mut ks: Vec<Vec<i32>> = self.modes.iter().map(|m| m.k.clone()).collect();
        ks.sort();
        ks.dedup();
        ks
    }

    /// `Σ_{|j| ≤ p}`-type norm proxy: sum over modes of `sup |v_k|`.
    pub fn mode_norm_sum(&self) -> f64 {
        self.modes.iter().map(|m| m.v.sup_norm_estimate()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn birkhoff_examples() {
        let d = IntermittentMap::doubling();
        let h = ToralCocycle::identity_angle();
        assert_eq!(birkhoff_sum(&h, &d, 0.3, 0).unwrap(), vec![0.0]);
        let s = birkhoff_sum(&h, &d, 0.25, 2).unwrap();
        assert!((s[0] - 1.5 * PI).abs() < 1e-12);
        let c = ToralCocycle::constant(1.3);
        let lsv = IntermittentMap::lsv(0.5, 2.0).unwrap();
        let s = birkhoff_sum(&c, &lsv, 0.37, 5).unwrap();
        assert!((s[0] - wrap(6.5)).abs() < 1e-12);
    }

    #[test]
    fn extension_orbit_examples() {
        let d = IntermittentMap::doubling();
        let h = ToralCocycle::identity_angle();
        let o = extension_orbit(&h, &d, 1.0 / 3.0, &[0.0], 3).unwrap();
        assert!(circ_dist(o[3].1[0], TAU / 3.0) < 1e-12);
        let z = ToralCocycle::zero(1);
        let o = extension_orbit(&z, &d, 0.2, &[1.0], 4).unwrap();
        assert!(o.iter().all(|(_, p)| (p[0] - 1.0).abs() < 1e-15));
        let o = extension_orbit(&h, &d, 0.2, &[0.5], 1).unwrap();
        assert!((o[1].0 - 0.4).abs() < 1e-15 && (o[1].1[0] - (0.5 + TAU * 0.2)).abs() < 1e-12);
    }

    #[test]
    fn observable_examples() {
        let one = ToralObservable::constant(1, 1.0);
        assert_eq!(one.evaluate(0.3, &[2.0]).unwrap(), 1.0);
        let c = ToralObservable::cos_psi(1);
        assert!((c.evaluate(0.3, &[0.7]).unwrap() - 0.7f64.cos()).abs() < 1e-15);
        let half_x = ModeFunction { poly: vec![Complex64::new(0.0, 0.0), Complex64::new(0.5, 0.0)], trig: vec![] };
        let xv = ToralObservable::new(
            1,
            vec![ObservableMode { k: vec![1], v: half_x.clone() }, ObservableMode { k: vec![-1], v: half_x }],
            0,
        )
        .unwrap();
        assert!((xv.evaluate(0.3, &[0.7]).unwrap() - 0.3 * 0.7f64.cos()).abs() < 1e-15);
    }

    #[test]
    fn asymmetric_observable_rejected() {
        let bad = ToralObservable::new(
            1,
            vec![ObservableMode { k: vec![1], v: ModeFunction::constant(Complex64::new(0.5, 0.0)) }],
            0,
        );
        assert!(matches!(bad, Err(Error::SymmetryViolation(_))));
    }

    #[test]
    fn component_difference_is_accurate() {
        let h = ToralCocycle::cosine(0.3);
        let c = &h.components[0];
        let x = 0.61;
        let e = 1e-13;
        let approx = c.derivative(x) * e;
        assert!(((c.diff(x, e) - approx) / approx).abs() < 1e-6);
    }

    #[test]
    fn holder_seminorm_of_cosine() {
        let h = ToralCocycle::cosine(0.3);
        assert!((h.holder_seminorm() - 0.3 * TAU).abs() < 1e-4);
    }
}
