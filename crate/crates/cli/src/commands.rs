//! One function per subcommand. Each writes its CSV files and checks into
//! a [`Run`] and returns the finished manifest.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use skewlab_core::cocycle::{ModeFunction, ToralCocycle, ToralObservable};
use skewlab_core::correlations::*;
use skewlab_core::fit::Window;
use skewlab_core::inducing::*;
use skewlab_core::operators::*;
use skewlab_core::probes::*;
use skewlab_core::renewal::*;

use crate::acceptance;
use crate::cache::{CacheOutcome, OperatorCache};
use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};
use crate::output::{f, CheckRecord, ExperimentManifest, Run};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Command {
    Tails,
    Spectrum,
    Resolvent,
    Renewal,
    TowerIdentity,
    Correlate,
    CheckFinite,
    CheckInfinite,
    EigenProbe,
    GoodAsymptotics,
    Verify,
}

impl Command {
    pub const ALL: [Command; 11] = [
        Command::Tails,
        Command::Spectrum,
        Command::Resolvent,
        Command::Renewal,
        Command::TowerIdentity,
        Command::Correlate,
        Command::CheckFinite,
        Command::CheckInfinite,
        Command::EigenProbe,
        Command::GoodAsymptotics,
        Command::Verify,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Tails => "tails",
            Command::Spectrum => "spectrum",
            Command::Resolvent => "resolvent",
            Command::Renewal => "renewal",
            Command::TowerIdentity => "tower-identity",
            Command::Correlate => "correlate",
            Command::CheckFinite => "check-finite",
            Command::CheckInfinite => "check-infinite",
            Command::EigenProbe => "eigen-probe",
            Command::GoodAsymptotics => "good-asymptotics",
            Command::Verify => "verify",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|c| c.name() == name)
    }
}

/// Runs `f` over `items` on up to `threads` scoped worker threads,
/// preserving order.
fn par_map<T: Sync, R: Send>(items: &[T], threads: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let threads = threads.clamp(1, items.len().max(1));
    if threads == 1 {
        return items.iter().map(&f).collect();
    }
    let chunk = items.len().div_ceil(threads);
    std::thread::scope(|scope| {
        let handles: Vec<_> = items.chunks(chunk).map(|c| scope.spawn(|| c.iter().map(&f).collect::<Vec<R>>())).collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker thread panicked")).collect()
    })
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    scheme: InducingScheme,
    h: ToralCocycle,
    cache: OperatorCache,
}

impl<'a> Ctx<'a> {
    fn new(cfg: &'a ExperimentConfig, run: &mut Run) -> Result<Self> {
        let scheme = cfg.build_scheme()?;
        run.truncation("scheme: unresolved fraction of Y", scheme.truncation_mass());
        let cache_dir = Path::new(&cfg.output.dir).join("cache");
        let cache = OperatorCache::new(cfg.output.cache.then_some(cache_dir.as_path()));
        Ok(Self { cfg, scheme, h: cfg.build_cocycle(), cache })
    }

    fn phi_max(&self) -> usize {
        self.cfg.scheme.phi_max
    }

    /// Operator sets for `ks` (through the cache) with warnings and
    /// truncation recorded.
    fn sets(&self, run: &mut Run, ks: &[Vec<i32>], m: usize) -> Result<Vec<TwistedOperatorSet>> {
        let key = OperatorCache::key(&self.cfg.map, &self.cfg.scheme, &self.scheme, &self.cfg.cocycle, m, self.phi_max(), ks)?;
        let (sets, outcome) = self.cache.get_or_build(&key, &self.scheme, &self.h, ks, m, self.phi_max())?;
        if outcome == CacheOutcome::Hit {
            run.warn(format!("operator sets loaded from cache entry {key}"));
        }
        if let Some(first) = sets.first() {
            run.truncation(format!("operators m={m}: truncation measure"), first.truncation_measure);
            run.truncation(format!("operators m={m}: row deficit"), first.row_deficit);
        }
        for s in &sets {
            run.warn_all(&s.warnings);
        }
        Ok(sets)
    }

    fn bundle(&self, run: &mut Run, observables: &[&ToralObservable]) -> Result<OperatorBundle<'_>> {
        let ks = OperatorBundle::frequencies_of(self.h.dim(), observables);
        let sets = self.sets(run, &ks, self.cfg.grid.m)?;
        Ok(OperatorBundle::from_sets(&self.scheme, &self.h, sets)?)
    }

    fn observables(&self) -> (ToralObservable, ToralObservable) {
        let d = self.h.dim();
        (self.cfg.observable(&self.cfg.observables.v, d), self.cfg.observable(&self.cfg.observables.w, d))
    }
}

fn fit_window(hi: usize) -> Window {
    Window::new(8.min(hi / 2).max(1), hi)
}

fn tails(ctx: &Ctx, run: &mut Run) -> Result<()> {
    let n_max = (ctx.phi_max() / 2).max(16);
    let tail = tail_distribution(&ctx.scheme, Weighting::Lebesgue, n_max);
    let rows: Vec<Vec<String>> =
        (0..=n_max).map(|n| vec![n.to_string(), f(tail.tail[n]), f(tail.point[n])]).collect();
    run.csv("tails", &["n", "tail", "point"], &rows)?;
    run.truncation("tails: unresolved measure", tail.unresolved);
    if let Some(beta) = ctx.scheme.map.beta() {
        let fit = fit_tail_exponent(&tail.tail, fit_window(n_max))?;
        let tol = ctx.cfg.tolerances.tail_beta * beta;
        run.check(
            CheckRecord::new("tail exponent", (fit.beta_hat - beta).abs() <= tol, format!("beta_hat={:.6}", fit.beta_hat), format!("|beta_hat - {beta:.4}| <= {tol:.4}"))
                .with_detail(format!("r2={:.6}, curvature={:.4}, power_law={}", fit.r2, fit.curvature, fit.power_law)),
        );
    }
    Ok(())
}

fn spectrum(ctx: &Ctx, run: &mut Run) -> Result<()> {
    let d = ctx.h.dim();
    let sets = ctx.sets(run, &[vec![0; d]], ctx.cfg.grid.m)?;
    let set = &sets[0];
    let g = spectral_gap(set)?;
    let width = set.grid.width();
    let rows: Vec<Vec<String>> = (0..set.grid.m)
        .map(|j| {
            let (a, b) = set.grid.cell_bounds(j);
            vec![j.to_string(), f(a), f(b), f(set.stationary[j] / width)]
        })
        .collect();
    run.csv("stationary_density", &["cell", "x_lo", "x_hi", "density"], &rows)?;
    let norms = piece_norms(set);
    let rows: Vec<Vec<String>> =
        norms.iter().enumerate().map(|(i, x)| vec![(i + 1).to_string(), f(*x), f(set.mass_by_phi[i + 1])]).collect();
    run.csv("piece_norms", &["n", "norm", "mass"], &rows)?;
    let t = &ctx.cfg.tolerances;
    run.check(CheckRecord::new("Perron eigenvalue", (g.perron - 1.0).abs() <= t.perron, f(g.perron), format!("|x - 1| <= {:e}", t.perron)));
    run.check(CheckRecord::new("second eigenvalue modulus", g.lambda2 < t.lambda2, f(g.lambda2), format!("< {}", t.lambda2)));
    run.check(CheckRecord::new("stationary residual", set.stationary_residual <= 1e-8, f(set.stationary_residual), "<= 1e-8"));
    Ok(())
}

fn resolvent(ctx: &Ctx, run: &mut Run) -> Result<()> {
    let ks: Vec<Vec<i32>> = (1..=ctx.cfg.run.k_max).map(|k| vec![k]).collect();
    let sets = ctx.sets(run, &ks, ctx.cfg.grid.m)?;
    let count = ctx.cfg.run.omega_count.min(1024);
    let scans = par_map(&sets, ctx.cfg.run.threads, |s| resolvent_diagnostic(s, count, NormKind::Sup));
    let mut rows = Vec::new();
    for scan in scans {
        let scan = scan?;
        let k = scan.k[0];
        for p in &scan.points {
            rows.push(vec![k.to_string(), f(p.omega), f(p.norm), f(p.condition), p.singular.to_string()]);
        }
        run.check(CheckRecord::new(
            format!("resolvent k={k}"),
            !scan.is_singular() && scan.sup_norm.is_finite(),
            format!("sup norm {:e} at omega={:.4}", scan.sup_norm, scan.argmax_omega),
            "finite, no singular point",
        ));
    }
    run.csv("resolvent", &["k", "omega", "norm", "condition", "singular"], &rows)?;
    Ok(())
}

fn renewal(ctx: &Ctx, run: &mut Run) -> Result<()> {
    let cfg = ctx.cfg;
    let sets = ctx.sets(run, &[vec![1]], cfg.grid.m)?;
    let set = &sets[0];
    let horizon = cfg.run.horizon;
    let probe = grid_values(&ModeFunction { poly: vec![], trig: vec![(1, Complex64::new(1.0, 0.0))] }, &set.grid);
    let sup = probe.iter().fold(0.0f64, |a, z| a.max(z.norm()));
    let probe: Vec<Complex64> = probe.into_iter().map(|z| z / sup).collect();
    let ren = renewal_recursion(set, horizon, RenewalMode::Vector(probe))?;
    let rows: Vec<Vec<String>> = ren.norms.iter().enumerate().map(|(n, x)| vec![n.to_string(), f(*x)]).collect();
    run.csv("renewal_norms", &["n", "norm"], &rows)?;
    if horizon > cfg.scheme.phi_max {
        run.warn(format!("renewal horizon {horizon} exceeds phi_max {}; later terms miss long returns", cfg.scheme.phi_max));
    }
    if let Some(beta) = ctx.scheme.map.beta() {
        let hi = horizon.clamp(24, 512);
        if hi <= horizon {
            let fit = decay_fit(&decay_envelope(&ren.norms), Window::new(16, hi))?;
            let tol = cfg.tolerances.decay_slope;
            run.check(CheckRecord::new(
                "renewal decay slope",
                (fit.slope + beta).abs() <= tol,
                format!("{:.4}", fit.slope),
                format!("within {tol} of {:.4} over n in [16,{hi}]", -beta),
            ));
        }
    }
    // Fourier cross-check at the largest horizon the frequency grid supports.
    let fh = (cfg.run.omega_count / 16).min(horizon).max(1);
    let rec = renewal_recursion(set, fh, RenewalMode::Matrix)?;
    let four = renewal_via_fourier(set, fh, cfg.run.omega_count)?;
    let agree = renewal_agreement(&rec, &four, fh)?;
    let rows: Vec<Vec<String>> = agree.iter().enumerate().map(|(n, x)| vec![n.to_string(), f(*x)]).collect();
    run.csv("fourier_agreement", &["n", "relative_discrepancy"], &rows)?;
    let worst = agree.iter().copied().fold(0.0, f64::max);
    run.check(CheckRecord::new(
        "renewal/Fourier agreement",
        worst <= cfg.tolerances.fourier,
        format!("{worst:e}"),
        format!("<= {:e} for n <= {fh} with {} frequencies", cfg.tolerances.fourier, cfg.run.omega_count),
    ));
    Ok(())
}

/// The identity is checked with dense tower matrices, whose size grows like
/// `m * phi_max`; larger settings are reduced to these caps.
const TOWER_PHI_CAP: usize = 64;
const TOWER_M_CAP: usize = 64;

fn tower_identity(ctx: &Ctx, run: &mut Run) -> Result<()> {
    let cfg = ctx.cfg;
    let phi_max = cfg.scheme.phi_max.min(TOWER_PHI_CAP);
    let m = cfg.grid.m.min(TOWER_M_CAP);
    if phi_max < cfg.scheme.phi_max || m < cfg.grid.m {
        run.warn(format!("tower identity uses phi_max={phi_max}, m={m} (dense tower matrices)"));
    }
    let scheme = InducingScheme::new(cfg.build_map()?, &SchemeConfig { phi_max, ..cfg.scheme_config() })?;
    let grid = UlamGrid::for_scheme(&scheme, m)?;
    let horizon = cfg.run.horizon.min(phi_max);
    let ks: Vec<Vec<i32>> = (0..=2).map(|k| vec![k]).collect();
    let sets = build_twisted_sets(&scheme, &ctx.h, &ks, &grid, phi_max)?;
    let reports = par_map(&sets, cfg.run.threads, |s| tower_identity_check(s, &scheme, &ctx.h, horizon));
    let mut rows = Vec::new();
    for rep in reports {
        let rep = rep?;
        let k = rep.k[0];
        for (n, e) in rep.errors.iter().enumerate() {
            rows.push(vec![k.to_string(), n.to_string(), f(*e)]);
        }
        run.check(CheckRecord::new(
            format!("tower identity k={k}"),
            rep.max_abs_error <= cfg.tolerances.tower,
            format!("{:e}", rep.max_abs_error),
            format!("<= {:e} for n <= {horizon}", cfg.tolerances.tower),
        ));
        run.check(CheckRecord::new(format!("base block k={k}"), rep.base_block_error <= cfg.tolerances.tower, format!("{:e}", rep.base_block_error), format!("<= {:e}", cfg.tolerances.tower)));
    }
    run.csv("tower_identity", &["k", "n", "max_abs_error"], &rows)?;
    Ok(())
}

fn series_csv(run: &mut Run, name: &str, s: &CorrelationSeries) -> Result<()> {
    let rows: Vec<Vec<String>> = s
        .ns
        .iter()
        .enumerate()
        .map(|(i, n)| {
            let se = s.stderr.as_ref().map_or(String::new(), |e| f(e[i]));
            vec![n.to_string(), f(s.rho[i]), f(s.rho[i] - s.vbar * s.wbar), se]
        })
        .collect();
    run.csv(name, &["n", "rho", "rho_minus_vbar_wbar", "stderr"], &rows)
}

fn correlate(ctx: &Ctx, run: &mut Run) -> Result<()> {
    let cfg = ctx.cfg;
    let (v, w) = ctx.observables();
    let series = match cfg.run.estimator.as_str() {
        "monte-carlo" => {
            let mc = MonteCarloConfig {
                samples: cfg.run.mc_samples,
                burn_in: cfg.run.mc_burn_in,
                seed: cfg.run.seed,
                batches: cfg.run.mc_batches,
                ..MonteCarloConfig::default()
            };
            monte_carlo_series(&v, &w, &ctx.scheme, &ctx.h, cfg.run.horizon, &mc)?
        }
        "tower" => tower_series(&v, &w, &ctx.bundle(run, &[&v, &w])?, cfg.run.horizon)?,
        _ => operator_series(&v, &w, &ctx.bundle(run, &[&v, &w])?, cfg.run.horizon)?,
    };
    run.warn_all(&series.warnings);
    series_csv(run, "correlation", &series)?;
    if series.non_mixing {
        run.warn("the cocycle leaves fibre modes undamped; the extension is not mixing");
    }
    if series.estimator == EstimatorKind::Operator && series.horizon() >= 24 {
        let mut modes = Vec::new();
        for t in &series.mode_terms {
            for (n, x) in t.values.iter().enumerate() {
                modes.push(vec![format!("{:?}", t.k), n.to_string(), f(x.re), f(x.im)]);
            }
        }
        run.csv("mode_terms", &["k", "n", "re", "im"], &modes)?;
        if cfg.regime() == skewlab_core::correlations::MeasureRegime::Finite && !series.non_mixing {
            let rep = upper_bound_check(&series, Window::new(16, series.horizon() / 2))?;
            run.check(CheckRecord::new("upper bound", rep.within(cfg.tolerances.eps_loss), format!("slope {:.4}", rep.fit.slope), format!("<= {:.4}", rep.bound_slope + cfg.tolerances.eps_loss)));
        }
    }
    Ok(())
}

fn check_finite(ctx: &Ctx, run: &mut Run) -> Result<()> {
    let cfg = ctx.cfg;
    cfg.require_finite("check-finite")?;
    let (v, w) = ctx.observables();
    let bundle = ctx.bundle(run, &[&v, &w])?;
    let series = operator_series(&v, &w, &bundle, cfg.run.horizon)?;
    run.warn_all(&series.warnings);
    let window = last_decade(cfg.run.horizon);
    let rep = theorem_check_finite(&series, &bundle.tail, window)?;
    let vw = series.vbar * series.wbar;
    let rows: Vec<Vec<String>> = (0..=series.horizon())
        .map(|n| vec![n.to_string(), f(series.rho[n]), f(series.rho[n] - vw), f(rep.leading[n]), f(rep.residual[n])])
        .collect();
    run.csv("finite_law", &["n", "rho", "deviation", "leading", "residual"], &rows)?;
    if let Some(e) = bundle.tail.mean_return {
        run.truncation("tail: mean return time", e);
    }
    let tol = cfg.tolerances.finite_ratio;
    if let Some((lo, hi)) = rep.ratio_range {
        run.check(CheckRecord::new(
            "deviation / leading term",
            rep.ratio_within(tol),
            format!("[{lo:.4}, {hi:.4}] over n in [{}, {}]", window.lo, window.hi),
            format!("within 1 +/- {tol}"),
        ));
    }
    let bound = -(rep.q - cfg.tolerances.eps_loss);
    let (ok, text) = match (&rep.residual_fit, rep.below_noise_floor) {
        (_, true) => (true, "below round-off".to_string()),
        (Some(fit), _) => (fit.slope <= bound, format!("{:.4}", fit.slope)),
        (None, _) => (false, "fit failed".to_string()),
    };
    run.check(CheckRecord::new("residual decay", ok, text, format!("<= {bound:.4} (q = {})", rep.q_rule)));
    Ok(())
}

fn check_infinite(ctx: &Ctx, run: &mut Run) -> Result<()> {
    let cfg = ctx.cfg;
    cfg.require_infinite("check-infinite")?;
    let (v, w) = ctx.observables();
    let bundle = ctx.bundle(run, &[&v, &w])?;
    let series = operator_series(&v, &w, &bundle, cfg.run.horizon)?;
    run.warn_all(&series.warnings);
    let rep = theorem_check_infinite(&series, last_decade(cfg.run.horizon))?;
    let rows: Vec<Vec<String>> = rep
        .scaled
        .iter()
        .enumerate()
        .map(|(i, (n, s))| vec![n.to_string(), f(*s), rep.gaps.get(i).map_or(String::new(), |g| f(*g))])
        .collect();
    run.csv("infinite_law", &["n", "scaled", "relative_gap"], &rows)?;
    if let Some(gap) = rep.gap_at_horizon {
        let tol = cfg.tolerances.infinite_gap;
        run.check(CheckRecord::new("gap at horizon", gap <= tol, format!("{gap:.4}"), format!("<= {tol}")));
        run.check(CheckRecord::new(
            "gap trend",
            rep.trend_decreasing(),
            format!("{:.4}", rep.gap_trend.unwrap_or(f64::NAN)),
            "decreasing over the last decade",
        ));
    }
    if let Some(fit) = &rep.decay_fit {
        run.check(CheckRecord::new("scaled decay", fit.slope < 0.0, format!("{:.4}", fit.slope), "< 0"));
    }
    Ok(())
}

fn eigen_probe(ctx: &Ctx, run: &mut Run) -> Result<()> {
    let cfg = ctx.cfg;
    let cap = cfg.run.fixed_point_cap.min(cfg.scheme.phi_max);
    let fps = fixed_points(&ctx.scheme, &ctx.h, cap)?;
    let rows: Vec<Vec<String>> = fps
        .iter()
        .map(|p| vec![p.cylinder.to_string(), p.phi.to_string(), f(p.point), p.boundary.to_string(), f(p.contraction), f(p.h_value[0])])
        .collect();
    run.csv("fixed_points", &["cylinder", "phi", "point", "boundary", "contraction", "h"], &rows)?;
    let (a, b) = deepest_interior_pair(&fps).ok_or_else(|| CliError::Probe("fewer than two interior fixed points".into()))?;
    let (defect, best) = resonance_defect(&a, &b, 5)?;
    run.check(
        CheckRecord::new("resonance defect", defect > cfg.tolerances.resonance, format!("{defect:.6}"), format!("> {}", cfg.tolerances.resonance))
            .with_detail(format!("pair phi=({}, {}), minimizing k={best:?}", a.phi, b.phi)),
    );
    let z0: Vec<usize> = [2usize, 3, 4].iter().filter_map(|&p| ctx.scheme.alpha.iter().position(|c| c.phi == p)).collect();
    let mut rows = Vec::new();
    for k in 1..=cfg.run.k_max {
        let n = (3.0 * f64::from(k).ln()).floor().max(1.0) as usize;
        for j in 0..8 {
            let omega = j as f64 * std::f64::consts::TAU / 8.0;
            let d = approx_eigen_defect(&ctx.scheme, &ctx.h, &[k], omega, n, &z0, cfg.run.probe_trials, cfg.run.seed)?;
            rows.push(vec![k.to_string(), f(omega), n.to_string(), f(d.defect), d.best_trial.to_string(), f(d.isometry_error)]);
        }
    }
    run.csv("eigen_defects", &["k", "omega", "n", "defect", "best_trial", "isometry_error"], &rows)?;
    Ok(())
}

fn good_asymptotics(ctx: &Ctx, run: &mut Run) -> Result<()> {
    let cfg = ctx.cfg;
    let find = |phi: usize| ctx.scheme.alpha.iter().position(|c| c.phi == phi);
    let (Some(base), Some(exc)) = (find(2), find(3)) else {
        return Err(crate::error::CliError::Config { field: "scheme.phi_max".into(), message: "needs cylinders with phi = 2 and 3".into() });
    };
    let fit = good_asymptotics_fit(&ctx.scheme, &ctx.h, base, exc, cfg.run.asymptotics_depth)?;
    let rows: Vec<Vec<String>> = fit
        .ns
        .iter()
        .enumerate()
        .map(|(i, n)| {
            vec![n.to_string(), fit.kappa_prime[i].to_string(), f(fit.offsets[i][0]), fit.residuals.get(i).map_or(String::new(), |r| f(r[0]))]
        })
        .collect();
    run.csv("good_asymptotics", &["N", "kappa_prime", "offset", "residual"], &rows)?;
    let r2 = fit.fit.as_ref().map_or(f64::NAN, |x| x.r2);
    run.check(CheckRecord::new("geometric fit", r2 >= cfg.tolerances.asymptotics_r2, format!("R2={r2:.6}, gamma_hat={:.6}", fit.gamma_hat), format!("R2 >= {}", cfg.tolerances.asymptotics_r2)));
    run.check(CheckRecord::new("integer constancy of kappa'", fit.kappa_prime_constant, fit.kappa_prime_constant.to_string(), "exact"));
    run.check(CheckRecord::new("non-degenerate amplitudes", fit.is_good(), format!("liminf proxy {:?}", fit.liminf_proxy), "bounded away from zero"));
    Ok(())
}

fn verify(run: &mut Run, ids: &[u8], report: &mut dyn FnMut(&acceptance::CriterionResult)) -> Result<()> {
    let results = acceptance::run_all(ids, report);
    let rows: Vec<Vec<String>> = results
        .iter()
        .map(|r| vec![r.id.to_string(), r.title.clone(), r.passed.to_string(), r.measured.clone(), r.required.clone()])
        .collect();
    run.csv("acceptance", &["criterion", "title", "passed", "measured", "required"], &rows)?;
    for r in results {
        run.check(CheckRecord::new(format!("criterion {} {}", r.id, r.title), r.passed, r.measured, r.required));
    }
    Ok(())
}

/// Runs `cmd` and writes the manifest. `report` receives acceptance lines as
/// they complete (only used by `verify`).
pub fn run_command(
    cmd: Command,
    cfg: &ExperimentConfig,
    report: &mut dyn FnMut(&acceptance::CriterionResult),
) -> Result<ExperimentManifest> {
    let mut run = Run::new(cmd.name(), cfg)?;
    if cmd == Command::Verify {
        let ids: Vec<u8> = (1..=12).collect();
        verify(&mut run, &ids, report)?;
        return run.finish();
    }
    let ctx = Ctx::new(cfg, &mut run)?;
    match cmd {
        Command::Tails => tails(&ctx, &mut run)?,
        Command::Spectrum => spectrum(&ctx, &mut run)?,
        Command::Resolvent => resolvent(&ctx, &mut run)?,
        Command::Renewal => renewal(&ctx, &mut run)?,
        Command::TowerIdentity => tower_identity(&ctx, &mut run)?,
        Command::Correlate => correlate(&ctx, &mut run)?,
        Command::CheckFinite => check_finite(&ctx, &mut run)?,
        Command::CheckInfinite => check_infinite(&ctx, &mut run)?,
        Command::EigenProbe => eigen_probe(&ctx, &mut run)?,
        Command::GoodAsymptotics => good_asymptotics(&ctx, &mut run)?,
        Command::Verify => unreachable!("handled above"),
    }
    run.finish()
}
