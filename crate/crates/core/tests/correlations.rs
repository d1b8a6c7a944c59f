use num_complex::Complex64;
use proptest::prelude::*;
use skewlab_core::cocycle::{ModeFunction, ObservableMode, ToralCocycle, ToralObservable};
use skewlab_core::correlations::*;
use skewlab_core::fit::Window;
use skewlab_core::inducing::{InducingScheme, SchemeConfig};
use skewlab_core::maps::IntermittentMap;
use skewlab_core::quad;
use skewlab_core::renewal::{renewal_recursion, RenewalMode};
use skewlab_core::Error;

fn lsv(gamma: f64, phi_max: usize) -> InducingScheme {
    InducingScheme::new(IntermittentMap::lsv(gamma, 2.0).unwrap(), &SchemeConfig { phi_max, ..Default::default() })
        .unwrap()
}

fn doubling() -> InducingScheme {
    InducingScheme::new(IntermittentMap::doubling(), &SchemeConfig { phi_max: 60, ..Default::default() }).unwrap()
}

#[test]
fn doubling_tail_is_geometric() {
    let s = doubling();
    let h = ToralCocycle::zero(1);
    let b = OperatorBundle::new(&s, &h, 16, 60, &[]).unwrap();
    // From Y = [1/2, 1) each step outside Y lands back in Y with probability 1/2.
    assert!((b.tail.mu_y - 0.5).abs() < 1e-12, "{}", b.tail.mu_y);
    assert!((b.tail.mean_return.unwrap() - 2.0).abs() < 1e-12);
    for n in 0..30 {
        let exact = 0.5 * 0.5f64.powi(n as i32);
        assert!((b.tail.leading_sum(n).unwrap() - exact).abs() < 1e-12, "n={n}");
        assert!((b.tail.tau_tail(n) - 0.5 * 0.5f64.powi(n as i32)).abs() < 1e-12);
    }
}

#[test]
fn mu_y_matches_orbit_frequency() {
    let s = lsv(0.3, 1024);
    let h = ToralCocycle::zero(1);
    let b = OperatorBundle::new(&s, &h, 64, 1024, &[]).unwrap();
    let mut x = 0.123456789;
    let mut hits = 0usize;
    let total = 2_000_000;
    for _ in 0..10_000 {
        x = s.map.evaluate(x).unwrap();
    }
    for _ in 0..total {
        hits += usize::from(s.in_y(x));
        x = s.map.evaluate(x).unwrap();
    }
    let freq = hits as f64 / total as f64;
    assert!((freq - b.tail.mu_y).abs() < 5e-3, "orbit {freq} vs Kac {}", b.tail.mu_y);
}

#[test]
fn leading_term_is_monotone() {
    let s = lsv(0.5, 512);
    let h = ToralCocycle::zero(1);
    let b = OperatorBundle::new(&s, &h, 32, 512, &[]).unwrap();
    let mut prev = f64::INFINITY;
    for n in 0..2000 {
        let l = b.tail.leading_sum(n).unwrap();
        assert!(l <= prev && l >= 0.0, "n={n}");
        prev = l;
    }
}

#[test]
fn n_zero_is_plain_integral() {
    let s = lsv(0.5, 256);
    let h = ToralCocycle::cosine(0.3);
    let v = ToralObservable::poly_plus_cos(1, &[1.0, 2.0], 1.0);
    let w = ToralObservable::poly_plus_cos(1, &[0.0, 0.0, 1.0], 0.5);
    let b = OperatorBundle::for_observables(&s, &h, 64, 256, &[&v, &w]).unwrap();
    let ser = operator_series(&v, &w, &b, 4).unwrap();
    // ∫_Y v w dm over ψ: zero modes multiply, cos ψ · cos ψ averages to 1/2.
    let (x, wt) = quad::gauss_legendre(6);
    let p = b.weights();
    let mut exact = 0.0;
    for j in 0..b.grid.m {
        let (lo, hi) = b.grid.cell_bounds(j);
        let (px, pw) = quad::mapped(&x, &wt, lo, hi);
        let dens = p[j] / b.grid.width();
        exact += px.iter().zip(&pw).map(|(&x, &q)| q * dens * ((1.0 + 2.0 * x) * x * x + 0.5 * 0.5)).sum::<f64>();
    }
    exact *= b.tail.mu_y;
    // The Ulam projection replaces v·w by the product of cell averages.
    assert!((ser.rho[0] - exact).abs() < 1e-4, "{} vs {exact}", ser.rho[0]);
}

#[test]
fn n_one_matches_quadrature() {
    // v = w = cos ψ on Y: ρ(1) = ½ μ(Y) ∫_{Y ∩ f^{-1}Y} cos h dμ_Z, and
    // f^{-1}Y ∩ Y = [3/4, 1).
    let s = lsv(0.5, 512);
    let h = ToralCocycle::cosine(0.3);
    let cp = ToralObservable::cos_psi(1);
    let b = OperatorBundle::for_observables(&s, &h, 128, 512, &[&cp]).unwrap();
    let ser = operator_series(&cp, &cp, &b, 2).unwrap();
    let p = b.weights();
    let (x, wt) = quad::gauss_legendre(8);
    let mut integral = 0.0;
    for j in 0..b.grid.m {
        let (lo, hi) = b.grid.cell_bounds(j);
        let (lo, hi) = (lo.max(0.75), hi);
        if hi <= lo {
            continue;
        }
        let (px, pw) = quad::mapped(&x, &wt, lo, hi);
        let dens = p[j] / b.grid.width();
        integral += px.iter().zip(&pw).map(|(&x, &q)| q * dens * h.lifted(x)[0].cos()).sum::<f64>();
    }
    let exact = 0.5 * b.tail.mu_y * integral;
    assert!((ser.rho[1] - exact).abs() < 1e-6, "{} vs {exact}", ser.rho[1]);
}

#[test]
fn mode_additivity_and_realness() {
    let s = lsv(0.5, 256);
    let h = ToralCocycle::cosine(0.3);
    let v = ToralObservable::poly_plus_cos(1, &[0.2, 1.0], 0.7);
    let w = ToralObservable::poly_plus_cos(1, &[1.0, -0.5], 1.3);
    let b = OperatorBundle::for_observables(&s, &h, 64, 256, &[&v, &w]).unwrap();
    let ser = operator_series(&v, &w, &b, 200).unwrap();
    assert_eq!(ser.mode_terms.len(), 3);
    for n in 0..=200 {
        let sum: f64 = ser.mode_terms.iter().map(|t| t.values[n].re).sum();
        assert!((ser.rho[n] - sum).abs() < 1e-12);
    }
    assert!(ser.rho_imag_max < 1e-10, "{}", ser.rho_imag_max);
    // The ±1 terms are complex conjugates of each other.
    let plus = &ser.mode_terms.iter().find(|t| t.k == [1]).unwrap().values;
    let minus = &ser.mode_terms.iter().find(|t| t.k == [-1]).unwrap().values;
    for (a, b) in plus.iter().zip(minus) {
        assert!((a - b.conj()).norm() < 1e-12);
    }
}

#[test]
fn mode_correlation_matrix_and_vector_modes_agree() {
    let s = lsv(0.5, 128);
    let h = ToralCocycle::cosine(0.3);
    let b = OperatorBundle::new(&s, &h, 32, 128, &[vec![1]]).unwrap();
    let set = b.set(&[1]).unwrap();
    let v: Vec<Complex64> = (0..32).map(|i| Complex64::new(1.0 + i as f64 * 0.01, 0.1)).collect();
    let w: Vec<Complex64> = (0..32).map(|i| Complex64::new((i as f64).sin(), 0.0)).collect();
    let mat = renewal_recursion(set, 40, RenewalMode::Matrix).unwrap();
    let vec = renewal_recursion(set, 40, RenewalMode::Vector(v.clone())).unwrap();
    let p = b.weights();
    // n = 0: T_0 = I.
    let direct: Complex64 = p.iter().zip(&w).zip(&v).map(|((p, w), v)| *p * w * v).sum::<Complex64>() * 0.4;
    assert!((mode_correlation(&mat, p, &v, &w, 0.4, 0).unwrap() - direct).norm() < 1e-14);
    for n in [1, 7, 40] {
        let a = mode_correlation(&mat, p, &v, &w, 0.4, n).unwrap();
        let c = mode_correlation(&vec, p, &v, &w, 0.4, n).unwrap();
        assert!((a - c).norm() < 1e-12);
    }
    assert!(matches!(mode_correlation(&vec, p, &v, &w, 0.4, 41), Err(Error::HorizonExceeded { .. })));
    let other: Vec<Complex64> = v.iter().map(|x| x * 2.0).collect();
    assert!(mode_correlation(&vec, p, &other, &w, 0.4, 3).is_err());
}

#[test]
fn zero_cocycle_is_flagged_non_mixing() {
    let s = lsv(0.3, 256);
    let h = ToralCocycle::zero(1);
    let cp = ToralObservable::cos_psi(1);
    let b = OperatorBundle::for_observables(&s, &h, 64, 256, &[&cp]).unwrap();
    let ser = operator_series(&cp, &cp, &b, 256).unwrap();
    assert!(ser.non_mixing);
    // With no twist each fibre mode renews like the base: ρ(n) → ½ μ(Y)².
    let limit = 0.5 * b.tail.mu_y * b.tail.mu_y;
    assert!((ser.rho[256] - limit).abs() < 1e-5, "{} vs {limit}", ser.rho[256]);
    assert!(matches!(upper_bound_check(&ser, Window::new(16, 128)), Err(Error::Regime(_))));
    let twisted = ToralCocycle::cosine(0.3);
    let b = OperatorBundle::for_observables(&s, &twisted, 64, 256, &[&cp]).unwrap();
    assert!(!operator_series(&cp, &cp, &b, 8).unwrap().non_mixing);
}

#[test]
fn operator_and_monte_carlo_agree() {
    let s = lsv(0.3, 1024);
    let h = ToralCocycle::cosine(0.3);
    let v = ToralObservable::poly_plus_cos(1, &[1.0, 1.0], 1.0);
    let w = ToralObservable::poly_plus_cos(1, &[0.0, 0.0, 1.0], 0.5);
    let b = OperatorBundle::for_observables(&s, &h, 128, 1024, &[&v, &w]).unwrap();
    let op = operator_series(&v, &w, &b, 10).unwrap();
    let cfg = MonteCarloConfig { samples: 200_000, seed: 11, ..Default::default() };
    let mc = monte_carlo_series(&v, &w, &s, &h, 10, &cfg).unwrap();
    let se = mc.stderr.as_ref().unwrap();
    for n in 0..=10 {
        assert!((op.rho[n] - mc.rho[n]).abs() < 3.0 * se[n], "n={n}: {} vs {} ± {}", op.rho[n], mc.rho[n], se[n]);
    }
    assert!((op.vbar - mc.vbar).abs() < 0.01, "{} vs {}", op.vbar, mc.vbar);
}

#[test]
fn monte_carlo_is_reproducible_and_regime_checked() {
    let s = lsv(0.3, 64);
    let h = ToralCocycle::cosine(0.3);
    let cp = ToralObservable::cos_psi(1);
    let cfg = MonteCarloConfig { samples: 5_000, burn_in: 100, batches: 10, ..Default::default() };
    let a = monte_carlo_series(&cp, &cp, &s, &h, 3, &cfg).unwrap();
    let b = monte_carlo_series(&cp, &cp, &s, &h, 3, &cfg).unwrap();
    assert_eq!(a.rho, b.rho);
    let inf = lsv(1.5, 64);
    assert!(matches!(monte_carlo_series(&cp, &cp, &inf, &h, 3, &cfg), Err(Error::Regime(_))));
}

#[test]
fn finite_law_leading_term_and_mean_zero_residual() {
    let s = lsv(0.3, 2048);
    let h = ToralCocycle::cosine(0.3);
    let v = ToralObservable::poly_plus_cos(1, &[1.0, 1.0], 1.0);
    let w = ToralObservable::poly_plus_cos(1, &[0.0, 0.0, 1.0], 0.5);
    let b = OperatorBundle::for_observables(&s, &h, 64, 2048, &[&v, &w]).unwrap();
    let ser = operator_series(&v, &w, &b, 2048).unwrap();
    // The fibre modes are still visible at n ≈ 200 on this grid.
    let window = Window::new(512, 2048);
    let rep = theorem_check_finite(&ser, &b.tail, window).unwrap();
    let beta = 1.0 / 0.3;
    let lead = rep.leading_fit.as_ref().unwrap().slope;
    assert!((lead + beta - 1.0).abs() < 0.3, "leading slope {lead}");
    assert!(rep.ratio_within(0.2), "{:?}", rep.ratio_range);
    assert_eq!(rep.q_rule, "β − ε");

    // Mean zero with respect to the discrete invariant measure.
    let p = b.weights();
    let x = grid_values(&ModeFunction { poly: vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)], trig: vec![] }, &b.grid);
    let mean: f64 = x.iter().zip(p).map(|(x, p)| x.re * p).sum();
    let v0 = ToralObservable::poly_plus_cos(1, &[-mean, 1.0], 0.0);
    let ser0 = operator_series(&v0, &w, &b, 2048).unwrap();
    let rep0 = theorem_check_finite(&ser0, &b.tail, window).unwrap();
    assert!(rep0.mean_zero && rep0.ratio_range.is_none());
    let slope = rep0.residual_fit.as_ref().unwrap().slope;
    assert!(slope <= -(beta - 0.5), "mean-zero residual slope {slope}");
}

#[test]
fn synthetic_leading_term_is_below_noise_floor() {
    let s = lsv(0.3, 512);
    let h = ToralCocycle::zero(1);
    let b = OperatorBundle::new(&s, &h, 32, 512, &[]).unwrap();
    let v = ToralObservable::constant(1, 1.0);
    let mut ser = operator_series(&v, &v, &b, 512).unwrap();
    let vw = ser.vbar * ser.wbar;
    for n in 0..=512 {
        ser.rho[n] = vw + b.tail.leading_sum(n).unwrap() * vw;
    }
    let rep = theorem_check_finite(&ser, &b.tail, last_decade(512)).unwrap();
    assert!(rep.below_noise_floor);
    assert!(rep.residual_fit.is_none());
    assert!(rep.ratio_within(1e-9));
}

#[test]
fn infinite_law_small_instance() {
    let s = lsv(1.5, 1024);
    let h = ToralCocycle::cosine(0.3);
    let v = ToralObservable::poly_plus_cos(1, &[1.0, 1.0], 1.0);
    let w = ToralObservable::poly_plus_cos(1, &[0.0, 0.0, 1.0], 0.5);
    let b = OperatorBundle::for_observables(&s, &h, 32, 1024, &[&v, &w]).unwrap();
    assert_eq!(b.tail.regime, MeasureRegime::Infinite);
    assert_eq!(b.tail.mu_y, 1.0);
    let ser = operator_series(&v, &w, &b, 1024).unwrap();
    let rep = theorem_check_infinite(&ser, last_decade(1024)).unwrap();
    assert!((rep.d_beta - (2.0 * std::f64::consts::PI / 3.0).sin() / std::f64::consts::PI).abs() < 1e-15);
    assert!(rep.gap_at_horizon.unwrap() < 0.15, "{:?}", rep.gaps);
    assert!(matches!(theorem_check_finite(&ser, &b.tail, last_decade(1024)), Err(Error::Regime(_))));

    // Mean-zero zero mode: the scaled quantity decays.
    let p = b.weights();
    let x = grid_values(&ModeFunction { poly: vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)], trig: vec![] }, &b.grid);
    let mean: f64 = x.iter().zip(p).map(|(x, p)| x.re * p).sum();
    let v0 = ToralObservable::poly_plus_cos(1, &[-mean, 1.0], 0.0);
    let ser0 = operator_series(&v0, &w, &b, 1024).unwrap();
    let rep0 = theorem_check_infinite(&ser0, last_decade(1024)).unwrap();
    let slope = rep0.decay_fit.as_ref().unwrap().slope;
    assert!(slope <= -(2.0 / 3.0 - 0.5), "scaled mean-zero slope {slope}");
}

#[test]
fn upper_bound_on_full_space() {
    let s = lsv(0.3, 256);
    let h = ToralCocycle::cosine(0.3);
    let v = ToralObservable::poly_plus_cos(1, &[1.0, 1.0], 1.0);
    let w = ToralObservable::poly_plus_cos(1, &[0.0, 0.0, 1.0], 0.5);
    let b = OperatorBundle::for_observables(&s, &h, 32, 256, &[&v, &w]).unwrap();
    let ser = tower_series(&v, &w, &b, 512).unwrap();
    // Tower measure of the base is μ(Y) up to the truncation.
    assert!((ser.mu_y - b.tail.mu_y).abs() < 1e-4, "{} vs {}", ser.mu_y, b.tail.mu_y);
    let rep = upper_bound_check(&ser, Window::new(16, 256)).unwrap();
    assert!(rep.within(0.4), "slope {}", rep.fit.slope);
}

fn mode_obs(a: f64, b: f64) -> ToralObservable {
    let m = |c: f64| ModeFunction::constant(Complex64::new(c, 0.0));
    ToralObservable::new(
        1,
        vec![
            ObservableMode { k: vec![0], v: m(a) },
            ObservableMode { k: vec![1], v: m(b) },
            ObservableMode { k: vec![-1], v: m(b) },
        ],
        0,
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn series_is_bilinear(a in -2.0f64..2.0, b in -2.0f64..2.0, c in -2.0f64..2.0, t in -3.0f64..3.0) {
        use std::sync::OnceLock;
        static SCHEME: OnceLock<InducingScheme> = OnceLock::new();
        static H: OnceLock<ToralCocycle> = OnceLock::new();
        let s = SCHEME.get_or_init(|| lsv(0.5, 64));
        let h = H.get_or_init(|| ToralCocycle::cosine(0.3));
        let bundle = OperatorBundle::new(s, h, 16, 64, &[vec![1], vec![-1]]).unwrap();
        let w = mode_obs(c, 0.4);
        let r1 = operator_series(&mode_obs(a, b), &w, &bundle, 20).unwrap();
        let r2 = operator_series(&mode_obs(t * a, t * b), &w, &bundle, 20).unwrap();
        for n in 0..=20 {
            prop_assert!((r2.rho[n] - t * r1.rho[n]).abs() < 1e-12 * (1.0 + r1.rho[n].abs()));
        }
    }

    #[test]
    fn grid_values_of_constants(c in -5.0f64..5.0, m in 1usize..64) {
        let grid = skewlab_core::operators::UlamGrid::new(0.5, 1.0, m).unwrap();
        for x in grid_values(&ModeFunction::constant(Complex64::new(c, -c)), &grid) {
            prop_assert!((x - Complex64::new(c, -c)).norm() < 1e-12);
        }
    }
}
