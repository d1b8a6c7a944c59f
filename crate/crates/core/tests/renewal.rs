use num_complex::Complex64;
use skewlab_core::cocycle::ToralCocycle;
use skewlab_core::fit::Window;
use skewlab_core::inducing::{InducingScheme, SchemeConfig};
use skewlab_core::maps::IntermittentMap;
use skewlab_core::operators::{build_twisted_set, TwistedOperatorSet, UlamGrid};
use skewlab_core::renewal::*;
use skewlab_core::sparse::{CsrMatrix, DenseMatrix};

fn lsv_set(gamma: f64, m: usize, phi_max: usize, k: i32, h: &ToralCocycle) -> (InducingScheme, TwistedOperatorSet) {
    let scheme =
        InducingScheme::new(IntermittentMap::lsv(gamma, 2.0).unwrap(), &SchemeConfig { phi_max, ..Default::default() })
            .unwrap();
    let grid = UlamGrid::for_scheme(&scheme, m).unwrap();
    let set = build_twisted_set(&scheme, h, &[k], &grid, phi_max).unwrap();
    (scheme, set)
}

fn dense(a: &CsrMatrix) -> DenseMatrix {
    DenseMatrix::from_csr(a)
}

/// Plain triple-loop product, independent of the crate's sparse kernels.
fn matmul(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    let mut out = DenseMatrix::zeros(a.nrows, b.ncols);
    for i in 0..a.nrows {
        for j in 0..b.ncols {
            let mut s = Complex64::new(0.0, 0.0);
            for l in 0..a.ncols {
                s += a.get(i, l) * b.get(l, j);
            }
            out.data[i * b.ncols + j] = s;
        }
    }
    out
}

fn add(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    let mut out = a.clone();
    out.data.iter_mut().zip(&b.data).for_each(|(x, y)| *x += y);
    out
}

#[test]
fn recursion_expands_to_piece_products() {
    let (_, set) = lsv_set(0.5, 16, 32, 1, &ToralCocycle::cosine(0.3));
    let ren = renewal_recursion(&set, 3, RenewalMode::Matrix).unwrap();
    assert_eq!(ren.matrix(0).unwrap().max_abs_diff(&DenseMatrix::identity(16)), 0.0);
    let r1 = dense(&set.pieces[0]);
    let r2 = dense(&set.pieces[1]);
    let r3 = dense(&set.pieces[2]);
    assert!(ren.matrix(1).unwrap().max_abs_diff(&r1) < 1e-15);
    let t2 = add(&r2, &matmul(&r1, &r1));
    assert!(ren.matrix(2).unwrap().max_abs_diff(&t2) < 1e-14);
    let t3 = add(&add(&r3, &matmul(&r1, &r2)), &add(&matmul(&r2, &r1), &matmul(&r1, &matmul(&r1, &r1))));
    assert!(ren.matrix(3).unwrap().max_abs_diff(&t3) < 1e-14);
    assert!(ren.matrix(4).is_none() && ren.vector(0).is_none());
}

#[test]
fn vector_mode_matches_matrix_mode() {
    let (_, set) = lsv_set(0.5, 16, 64, 1, &ToralCocycle::cosine(0.3));
    let v: Vec<Complex64> = (0..16).map(|j| Complex64::from_polar(1.0, 0.4 * j as f64)).collect();
    let mat = renewal_recursion(&set, 40, RenewalMode::Matrix).unwrap();
    let vec = renewal_recursion(&set, 40, RenewalMode::Vector(v.clone())).unwrap();
    assert_eq!(vec.vector(0).unwrap(), v.as_slice());
    for n in 0..=40 {
        let t = mat.matrix(n).unwrap();
        for (i, x) in vec.vector(n).unwrap().iter().enumerate() {
            let y: Complex64 = (0..16).map(|j| t.get(i, j) * v[j]).sum();
            assert!((x - y).norm() < 1e-13, "n={n}");
        }
    }
    assert!(renewal_recursion(&set, 4, RenewalMode::Vector(vec![Complex64::new(1.0, 0.0); 3])).is_err());
}

#[test]
fn untwisted_renewal_mass_is_bounded() {
    let (_, set) = lsv_set(0.5, 16, 128, 0, &ToralCocycle::cosine(0.3));
    let ren = renewal_recursion(&set, 128, RenewalMode::Matrix).unwrap();
    let p = &set.stationary;
    for n in 0..=128 {
        let t = ren.matrix(n).unwrap();
        // Applied to the constant function, every entry is a renewal probability.
        let mut integral = 0.0;
        for i in 0..16 {
            let row: Complex64 = (0..16).map(|j| t.get(i, j)).sum();
            assert!(row.re <= 1.0 + 1e-9 && row.re >= -1e-12 && row.im.abs() < 1e-14, "n={n}");
            integral += p[i] * row.re;
        }
        assert!(integral <= 1.0 + 1e-9);
        // Column masses against μ_Z: ∫ T_n (1_{cell j}) dμ_Z ≤ μ_Z(cell j).
        for j in 0..16 {
            let col: f64 = (0..16).map(|i| p[i] * t.get(i, j).re).sum();
            assert!(col <= p[j] * (1.0 + 1e-9), "n={n} j={j}");
        }
    }
}

#[test]
fn fourier_inversion_agrees_and_aliases() {
    let (_, set) = lsv_set(0.5, 64, 256, 1, &ToralCocycle::cosine(0.3));
    let horizon = 32;
    let rec = renewal_recursion(&set, horizon, RenewalMode::Matrix).unwrap();
    let four = renewal_via_fourier(&set, horizon, 2048).unwrap();
    let agree = renewal_agreement(&rec, &four, horizon / 4).unwrap();
    assert!(agree.iter().all(|&e| e <= 1e-6), "{agree:?}");

    let coarse = renewal_via_fourier(&set, horizon, 1024).unwrap();
    let coarse_agree = renewal_agreement(&rec, &coarse, horizon / 4).unwrap();
    let fine_max = agree.iter().copied().fold(0.0, f64::max);
    let coarse_max = coarse_agree.iter().copied().fold(0.0, f64::max);
    assert!(coarse_max > fine_max, "{coarse_max} vs {fine_max}");

    assert!(renewal_via_fourier(&set, horizon, 96).is_err());
    assert!(renewal_via_fourier(&set, horizon, 64).is_err());
}

#[test]
fn untwisted_fourier_uses_inner_circle() {
    let (_, set) = lsv_set(0.5, 32, 256, 0, &ToralCocycle::zero(1));
    let rec = renewal_recursion(&set, 16, RenewalMode::Matrix).unwrap();
    let four = renewal_via_fourier(&set, 16, 256).unwrap();
    assert!(four.radius < 1.0);
    let agree = renewal_agreement(&rec, &four, 4).unwrap();
    assert!(agree.iter().all(|&e| e <= 1e-6), "{agree:?}");
}

#[test]
fn tower_levels_and_diagonals_carry_the_return_tail() {
    let (_, set) = lsv_set(0.5, 32, 128, 1, &ToralCocycle::cosine(0.3));
    let tower = Tower::build(&set);
    let total: f64 = tower.weights.iter().sum();
    let base: f64 = set.stationary.iter().sum();
    assert!((tower.level_measure(0) - base).abs() < 1e-14);
    for n in 1..128 {
        let resolved: f64 = set.mass_by_phi.iter().skip(n + 1).sum();
        let level = tower.level_measure(n);
        assert!((level - resolved).abs() < 1e-10, "n={n}: {level} vs {resolved}");
        assert!((tower.diagonal_measure(n) - level).abs() < 1e-12, "n={n}");
    }
    // Kac: the base plus φ - 1 upper levels for each resolved return time.
    let upper: f64 = set.mass_by_phi.iter().enumerate().skip(1).map(|(n, w)| (n - 1) as f64 * w).sum();
    assert!((total - base - upper).abs() < 1e-9);
    assert_eq!(tower.max_level(), 127);
    for s in 0..tower.size() {
        assert_eq!(tower.in_y_hat(s), s < tower.m);
    }
}

#[test]
fn tower_operators_at_zero_and_supports() {
    let h = ToralCocycle::cosine(0.3);
    let (scheme, set) = lsv_set(0.5, 16, 24, 1, &h);
    let tower = Tower::build(&set);
    let ops = build_tower_operators(&set, &tower, &scheme, &h, 24).unwrap();
    let (m, size) = (tower.m, tower.size());
    let a0 = dense(&ops.a[0]);
    let b0 = dense(&ops.b[0]);
    let e0 = dense(&ops.e[0]);
    for s in 0..size {
        for j in 0..m {
            let expect = if s == j { 1.0 } else { 0.0 };
            assert_eq!(a0.get(s, j), Complex64::new(expect, 0.0));
            assert_eq!(b0.get(j, s), Complex64::new(expect, 0.0));
        }
        for t in 0..size {
            let expect = if s == t && s >= m { 1.0 } else { 0.0 };
            assert_eq!(e0.get(s, t), Complex64::new(expect, 0.0));
        }
    }
    for n in 1..=24 {
        for s in 0..size {
            // A lands on level n; B reads from the diagonal D_n; E never touches the base.
            if ops.a[n].row(s).next().is_some() {
                assert_eq!(tower.states[s].level, n);
            }
            if ops.e[n].row(s).next().is_some() {
                assert!(s >= m);
            }
        }
        for i in 0..m {
            for (s, v) in ops.b[n].row(i) {
                let st = tower.states[s];
                assert!(v.norm() > 0.0);
                assert_eq!(tower.classes[st.class.unwrap()].phi - st.level, n);
            }
        }
        for s in 0..size {
            for (t, _) in ops.e[n].row(s) {
                assert!(t >= m);
            }
        }
    }
    // First-return scheme: Ŷ is the base, so both restricted tails vanish.
    let an = restricted_a_norms(&ops, &tower);
    let bn = restricted_b_norms(&ops, &tower);
    assert!((an[0] - tower.level_measure(0)).abs() < 1e-14);
    assert!(an[1..].iter().all(|&x| x == 0.0));
    assert!(bn[1..].iter().all(|&x| x == 0.0));
    assert!(ops.warnings.is_empty());
    let over = build_tower_operators(&set, &tower, &scheme, &h, 30).unwrap();
    assert_eq!(over.warnings.len(), 1);
}

#[test]
fn small_tower_identity() {
    let h = ToralCocycle::cosine(0.3);
    let (scheme, set) = lsv_set(0.5, 16, 32, 1, &h);
    let rep = tower_identity_check(&set, &scheme, &h, 32).unwrap();
    assert_eq!(rep.errors[0], 0.0);
    assert!(rep.max_abs_error <= 1e-12, "{}", rep.max_abs_error);
    assert!(rep.base_block_error <= 1e-12);

    let (scheme2, set2) = lsv_set(1.5, 16, 32, 2, &h);
    let rep2 = tower_identity_check(&set2, &scheme2, &h, 32).unwrap();
    assert!(rep2.max_abs_error <= 1e-12);
}

#[test]
fn decay_fit_synthetic() {
    let pure: Vec<f64> = (0..=200).map(|n| if n == 0 { 1.0 } else { (n as f64).powi(-2) }).collect();
    let f = decay_fit(&pure, Window::new(8, 200)).unwrap();
    assert!((f.slope + 2.0).abs() < 1e-10);

    let wobbly: Vec<f64> = (0..=4096)
        .map(|n| {
            let x = (n.max(1)) as f64;
            x.powi(-2) * (1.0 + 0.1 * x.ln().sin())
        })
        .collect();
    let f = decay_fit(&wobbly, Window::new(16, 4096)).unwrap();
    assert!(f.slope > -2.1 && f.slope < -1.9, "{}", f.slope);

    let mut bad = pure.clone();
    bad[50] = 0.0;
    assert!(decay_fit(&bad, Window::new(8, 200)).is_err());
    assert!(decay_fit(&pure, Window::new(8, 12)).is_err());
}
