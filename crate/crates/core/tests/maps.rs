use num_complex::Complex64;
use proptest::prelude::*;
use skewlab_core::cocycle::*;
use skewlab_core::inducing::{InducingScheme, SchemeConfig};
use skewlab_core::maps::IntermittentMap;

fn any_map() -> impl Strategy<Value = IntermittentMap> {
    prop_oneof![
        (0.1f64..2.5, 0.5f64..=2.0).prop_map(|(g, c)| IntermittentMap::lsv(g, c).unwrap()),
        (0.1f64..2.5, 0.5f64..4.0).prop_map(|(g, c)| IntermittentMap::thaler(g, c).unwrap()),
        Just(IntermittentMap::doubling()),
    ]
}

fn any_cocycle() -> impl Strategy<Value = ToralCocycle> {
    prop_oneof![
        (-1.0f64..1.0).prop_map(ToralCocycle::cosine),
        (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| ToralCocycle::planar(a, b)),
        Just(ToralCocycle::identity_angle()),
    ]
}

#[test]
fn parameter_validation() {
    assert!(IntermittentMap::lsv(0.0, 2.0).is_err());
    assert!(IntermittentMap::lsv(0.5, 2.5).is_err());
    assert!(IntermittentMap::thaler(0.5, -1.0).is_err());
    assert!(IntermittentMap::lsv(0.5, 2.0).unwrap().is_markov());
    assert!(!IntermittentMap::lsv(0.5, 1.5).unwrap().is_markov());
    assert!(IntermittentMap::thaler(0.5, 2.0).unwrap().is_markov());
    let d = IntermittentMap::doubling();
    assert!(d.evaluate(1.0).is_err() && d.evaluate(-0.1).is_err());
    assert!(d.derivative(0.5).is_err());
    assert_eq!(d.beta(), None);
}

proptest! {
    #[test]
    fn branch_inverse_roundtrip(map in any_map(), t in 0.0f64..1.0) {
        for b in &map.branches {
            let (lo, hi) = b.image();
            let y = lo + t * (hi - lo);
            let x = map.branch_inverse(b.id, y).unwrap();
            prop_assert!(x >= b.lo && x <= b.hi);
            prop_assert!((b.forward(x) - y).abs() <= 1e-13, "branch {} y {} x {}", b.id, y, x);
        }
    }

    #[test]
    fn branches_are_increasing_and_expanding(map in any_map(), s in 0.0f64..1.0, t in 0.0f64..1.0) {
        for b in &map.branches {
            let (u, v) = (s.min(t), s.max(t));
            let (x1, x2) = (b.lo + u * (b.hi - b.lo), b.lo + v * (b.hi - b.lo));
            prop_assert!(b.forward(x1) <= b.forward(x2));
            prop_assert!(b.derivative(x1) >= 1.0);
            // Cancellation-free increments agree with the naive difference.
            let naive = b.forward(x2) - b.forward(x1);
            prop_assert!((b.forward_diff(x1, x2 - x1) - naive).abs() <= 1e-13 * (1.0 + naive.abs()));
        }
    }

    #[test]
    fn inverse_diff_inverts_forward_diff(gamma in 0.1f64..2.5, x in 1e-6f64..0.4, e in 1e-12f64..1e-2) {
        let map = IntermittentMap::lsv(gamma, 2.0).unwrap();
        let b = &map.branches[0];
        let d = b.forward_diff(x, e);
        let back = b.inverse_diff(x, d);
        prop_assert!((back - e).abs() <= 1e-12 * e, "{} vs {}", back, e);
    }

    #[test]
    fn birkhoff_cocycle_identity(map in any_map(), h in any_cocycle(), x in 0.0f64..1.0, m in 0usize..20, n in 0usize..20) {
        let whole = birkhoff_sum_lifted(&h, &map, x, m + n).unwrap();
        let first = birkhoff_sum_lifted(&h, &map, x, m).unwrap();
        let xm = *map.orbit(x, m).unwrap().last().unwrap();
        let rest = birkhoff_sum_lifted(&h, &map, xm, n).unwrap();
        for i in 0..h.dim() {
            prop_assert!((whole[i] - first[i] - rest[i]).abs() <= 1e-12 * (1.0 + whole[i].abs()));
        }
        let wrapped = birkhoff_sum(&h, &map, x, m + n).unwrap();
        for i in 0..h.dim() {
            prop_assert!(circ_dist(wrapped[i], whole[i]) <= 1e-12 * (1.0 + whole[i].abs()));
            prop_assert!((0.0..std::f64::consts::TAU).contains(&wrapped[i]));
        }
    }

    #[test]
    fn extension_orbit_tracks_birkhoff_sums(h in any_cocycle(), x in 0.0f64..1.0, psi in 0.0f64..std::f64::consts::TAU, n in 1usize..30) {
        let map = IntermittentMap::lsv(0.5, 2.0).unwrap();
        let psi0 = vec![psi; h.dim()];
        let orbit = extension_orbit(&h, &map, x, &psi0, n).unwrap();
        let s = birkhoff_sum_lifted(&h, &map, x, n).unwrap();
        for i in 0..h.dim() {
            prop_assert!(circ_dist(orbit[n].1[i], psi + s[i]) <= 1e-11);
        }
    }

    #[test]
    fn induced_cocycle_is_a_birkhoff_sum_over_the_return(gamma in 0.2f64..1.5, t in 0.0f64..1.0, eps in -1.0f64..1.0) {
        let scheme = InducingScheme::new(IntermittentMap::lsv(gamma, 2.0).unwrap(), &SchemeConfig::default()).unwrap();
        let z = 0.5 + 0.5 * t;
        let h = ToralCocycle::cosine(eps);
        if let Ok(v) = induced_cocycle(&h, &scheme, z, 1 << 16) {
            // Brute-force return along the raw orbit.
            let orbit = scheme.map.orbit(z, v.phi).unwrap();
            prop_assert!(orbit[1..v.phi].iter().all(|&x| !scheme.in_y(x)));
            prop_assert!(scheme.in_y(orbit[v.phi]));
            let direct: f64 = orbit[..v.phi].iter().map(|&x| h.lifted(x)[0]).sum();
            prop_assert!((v.h_lifted[0] - direct).abs() <= 1e-12 * (1.0 + direct.abs()));
            prop_assert!(circ_dist(v.h[0], direct) <= 1e-11);
        }
    }

    #[test]
    fn symmetric_observables_are_real(
        a0 in -2.0f64..2.0, a1 in -2.0f64..2.0, amp in -2.0f64..2.0,
        re in -1.0f64..1.0, im in -1.0f64..1.0, x in 0.0f64..1.0, psi in 0.0f64..std::f64::consts::TAU,
    ) {
        let obs = ToralObservable::poly_plus_cos(1, &[a0, a1], amp);
        let v = obs.evaluate(x, &[psi]).unwrap();
        prop_assert!((v - (a0 + a1 * x + amp * psi.cos())).abs() <= 1e-12);

        let f = ModeFunction { poly: vec![Complex64::new(re, im)], trig: vec![(2, Complex64::new(im, re))] };
        let obs = ToralObservable::new(1, vec![
            ObservableMode { k: vec![3], v: f.clone() },
            ObservableMode { k: vec![-3], v: f.conj() },
        ], 1).unwrap();
        let v = obs.evaluate(x, &[psi]).unwrap();
        let direct = 2.0 * (f.eval(x) * Complex64::from_polar(1.0, 3.0 * psi)).re;
        prop_assert!((v - direct).abs() <= 1e-12);
        if re.abs() + im.abs() > 1e-3 {
            let broken = vec![
                ObservableMode { k: vec![3], v: f.clone() },
                ObservableMode { k: vec![-3], v: f },
            ];
            prop_assert!(ToralObservable::new(1, broken, 1).is_err());
        }
    }
}
