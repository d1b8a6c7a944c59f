use num_complex::Complex64;
use skewlab_core::cocycle::{birkhoff_sum_lifted, ToralCocycle};
use skewlab_core::inducing::{InducingScheme, SchemeConfig};
use skewlab_core::maps::IntermittentMap;
use skewlab_core::operators::*;

fn lsv(gamma: f64, phi_max: usize) -> InducingScheme {
    InducingScheme::new(IntermittentMap::lsv(gamma, 2.0).unwrap(), &SchemeConfig { phi_max, ..Default::default() })
        .unwrap()
}

/// Lebesgue piece recovered from the function-convention storage.
fn lebesgue_entry(set: &TwistedOperatorSet, n: usize, i: usize, j: usize) -> Complex64 {
    let p = &set.stationary;
    let v = set.pieces[n - 1].row(i).find(|(c, _)| *c == j).map_or(Complex64::new(0.0, 0.0), |(_, v)| v);
    v * set.grid.width() * p[i] / p[j]
}

#[test]
fn doubling_two_cells_brute_force() {
    let s = InducingScheme::new(IntermittentMap::doubling(), &SchemeConfig { phi_max: 50, ..Default::default() })
        .unwrap();
    let grid = UlamGrid::for_scheme(&s, 2).unwrap();
    let set = build_twisted_set(&s, &ToralCocycle::zero(1), &[0], &grid, 50).unwrap();
    // Every cylinder maps linearly onto Y, so each cell sends half its mass to each cell.
    for v in &set.transfer {
        assert!((v - 0.5).abs() < 1e-12);
    }
    assert!((set.stationary[0] - 0.5).abs() < 1e-12 && (set.stationary[1] - 0.5).abs() < 1e-12);
    let r = assemble_r_omega(&set, 0.0);
    let ones = vec![Complex64::new(1.0, 0.0); 2];
    for i in 0..2 {
        let s: Complex64 = r.row(i).iter().zip(&ones).map(|(a, b)| a * b).sum();
        assert!((s.re - 1.0).abs() < 1e-12);
    }
    let g = spectral_gap(&set).unwrap();
    assert!((g.perron - 1.0).abs() < 1e-12);
    assert!(g.lambda2 < 1e-10);
}

#[test]
fn twisted_pieces_match_fine_sampling() {
    let s = lsv(0.5, 512);
    let h = ToralCocycle::cosine(0.3);
    let m = 32;
    let grid = UlamGrid::for_scheme(&s, m).unwrap();
    let sets = build_twisted_sets(&s, &h, &[vec![0], vec![1]], &grid, 512).unwrap();
    // Oracle: midpoint sampling of z with direct first-return iteration.
    let samples = 2_000_000;
    let dz = s.y_length() / samples as f64;
    let nmax = 3;
    let mut brute = vec![vec![vec![Complex64::new(0.0, 0.0); m * m]; nmax + 1]; 2];
    let mut total = vec![vec![Complex64::new(0.0, 0.0); m * m]; 2];
    for t in 0..samples {
        let z = s.y_lo + (t as f64 + 0.5) * dz;
        let (phi, y) = match s.first_return(z, 512) {
            Ok(r) => r,
            Err(_) => continue,
        };
        let hz = birkhoff_sum_lifted(&h, &s.map, z, phi).unwrap()[0];
        let (i, j) = (grid.cell_of(y), grid.cell_of(z));
        for (kk, kf) in [0.0, 1.0].iter().enumerate() {
            let v = Complex64::from_polar(dz, kf * hz);
            total[kk][i * m + j] += v;
            if phi <= nmax {
                brute[kk][phi][i * m + j] += v;
            }
        }
    }
    for (kk, set) in sets.iter().enumerate() {
        let mut worst = 0.0f64;
        for i in 0..m {
            for j in 0..m {
                let mut sum = Complex64::new(0.0, 0.0);
                for n in 1..=512 {
                    sum += lebesgue_entry(set, n, i, j);
                }
                worst = worst.max((sum - total[kk][i * m + j]).norm());
                for n in 1..=nmax {
                    let d = (lebesgue_entry(set, n, i, j) - brute[kk][n][i * m + j]).norm();
                    assert!(d < 2e-5, "k={kk} n={n} ({i},{j}) diff {d}");
                }
            }
        }
        assert!(worst < 2e-5, "k={kk} total worst {worst}");
    }
}

#[test]
fn stationary_and_gap_lsv() {
    let s = lsv(0.5, 1024);
    let h = ToralCocycle::zero(1);
    let g256 = {
        let set = build_twisted_set(&s, &h, &[0], &UlamGrid::for_scheme(&s, 256).unwrap(), 1024).unwrap();
        let p = &set.stationary;
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(p.iter().all(|&x| x > 0.0));
        let (mn, mx) = p.iter().fold((f64::MAX, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
        assert!(mn / mx > 0.1 && mx / mn < 10.0);
        assert!(set.stationary_residual < 1e-8);
        let again = stationary_density(&set).unwrap();
        assert!(again.iter().zip(p).all(|(a, b)| (a - b).abs() < 1e-12));
        let g = spectral_gap(&set).unwrap();
        assert!((g.perron - 1.0).abs() < 1e-8);
        assert!(g.lambda2 < 0.99);
        g.lambda2
    };
    let set = build_twisted_set(&s, &h, &[0], &UlamGrid::for_scheme(&s, 512).unwrap(), 1024).unwrap();
    let g512 = spectral_gap(&set).unwrap().lambda2;
    assert!((g512 - g256).abs() < 0.05, "{g256} vs {g512}");
}

#[test]
fn modulus_symmetry_and_support() {
    let s = lsv(0.5, 256);
    let h = ToralCocycle::cosine(0.3);
    let grid = UlamGrid::for_scheme(&s, 64).unwrap();
    let sets = build_twisted_sets(&s, &h, &[vec![0], vec![2], vec![-2]], &grid, 256).unwrap();
    let (s0, sp, sm) = (&sets[0], &sets[1], &sets[2]);
    for n in 0..256 {
        let (a, b) = (s0.pieces[n].to_dense(), sp.pieces[n].to_dense());
        for (x, y) in a.iter().zip(&b) {
            assert!(x.im == 0.0 && x.re >= 0.0);
            assert!(y.norm() <= x.re + 1e-6);
        }
    }
    for omega in [0.0, 0.3, 1.7, 3.0] {
        let a = assemble_r_omega(sp, omega);
        let b = assemble_r_omega(sm, std::f64::consts::TAU - omega);
        for (x, y) in a.data.iter().zip(&b.data) {
            assert!((x - y.conj()).norm() < 1e-12);
        }
        assert!(a.sup_norm() <= 1.0 + 1e-8);
        assert!(assemble_r_omega(s0, omega).sup_norm() <= 1.0 + 1e-8);
    }
    let at0 = assemble_r_omega(s0, 0.0);
    let mut sum = skewlab_core::sparse::DenseMatrix::zeros(64, 64);
    for p in &s0.pieces {
        for (x, y) in sum.data.iter_mut().zip(p.to_dense()) {
            *x += y;
        }
    }
    assert!(at0.max_abs_diff(&sum) < 1e-14);
    // Total mass per return time equals the density-weighted cylinder mass.
    let density: Vec<f64> = s0.stationary.iter().map(|p| p / grid.width()).collect();
    for n in [1usize, 2, 5, 40] {
        let direct: f64 = s
            .alpha
            .iter()
            .filter(|c| c.phi == n)
            .map(|c| {
                let (ja, jb) = grid.cell_range(c.lo, c.hi);
                (ja..=jb)
                    .map(|j| {
                        let (a, b) = grid.cell_bounds(j);
                        let ov = if ja == jb { c.length } else { c.hi.min(b) - c.lo.max(a) };
                        density[j] * ov
                    })
                    .sum::<f64>()
            })
            .sum();
        assert!((direct - s0.mass_by_phi[n]).abs() < 1e-6 * direct.max(1e-12) + 1e-14, "n={n}");
    }
    // Piece norms are bounded by a constant times the mass.
    let norms = piece_norms(sp);
    let c = norms.iter().zip(&s0.mass_by_phi[1..]).map(|(a, b)| a / b).fold(0.0, f64::max);
    assert!(c < 3.0, "{c}");
}

#[test]
fn resolvent_controls() {
    let s = lsv(0.5, 1024);
    let grid = UlamGrid::for_scheme(&s, 64).unwrap();
    let zero = build_twisted_sets(&s, &ToralCocycle::zero(1), &[vec![0], vec![1]], &grid, 1024).unwrap();
    assert!(resolvent_at(&zero[0], 0.0, NormKind::Sup).singular);
    assert!(resolvent_at(&zero[1], 0.0, NormKind::Sup).singular);
    let generic = build_twisted_set(&s, &ToralCocycle::cosine(0.3), &[1], &grid, 1024).unwrap();
    let scan = resolvent_diagnostic(&generic, 64, NormKind::Sup).unwrap();
    assert!(!scan.is_singular());
    assert!(scan.sup_norm.is_finite() && scan.sup_norm > 1.0);
    let spec = resolvent_diagnostic(&generic, 8, NormKind::Spectral).unwrap();
    assert!(spec.sup_norm.is_finite());
}
