//! Verification experiments. Each returns named checks and CSV artifacts; the
//! CLI subcommands and the acceptance suite are thin compositions of these.

use rayon::prelude::*;

use crate::asymptotics::{self, fit_slope, scaled_trend, CurvePair, RateStudy, TV_FLOOR};
use crate::compensator::{
    compensator_at, cycle_hazards_pooled, rootzen_uniform_error, scaled_compensator_sup, scaled_recurrence_sup,
    simulate_path, DelayMode, MaxStatistic, RenewalPath,
};
use crate::coupling::{
    coupling_moment, find_common_component, CommonComponent, Coupler, CouplingTrace, MaximalCoupling,
};
use crate::distribution::{Distribution, DistributionSpec};
use crate::error::Result;
use crate::grid::{Grid, GridMeasure};
use crate::renewal::{default_grid, linear_forcing, renewal_measure, solve_renewal_equation, RenewalModel};
use crate::report::{Artifact, Check, Outcome};
use crate::rng::{derive, stream};
use crate::stats::{binomial_sd, chi_square_gof, ks_critical, ks_statistic, mean_sd, proportion};
use crate::stone::stone_decompose;

/// At most about `max_rows` evenly strided indices of `0..n`.
fn strided(n: usize, max_rows: usize) -> impl Iterator<Item = usize> {
    let stride = n.div_ceil(max_rows).max(1);
    (0..n).step_by(stride)
}

/// Renewal function `Φ([0,t])`, with closed forms where they exist and the
/// second-moment asymptote `mt + m²E[τ²]/2` otherwise.
pub fn phi_experiment(d: &Distribution, grid: Grid) -> Result<Outcome> {
    let phi = renewal_measure(d, grid)?;
    let cum = phi.cumulative();
    let h = grid.step();
    let m = d.rate();
    let mut out = Outcome::default();
    let closed: Option<Box<dyn Fn(f64) -> f64>> = match d.spec() {
        DistributionSpec::Exponential { rate } => Some(Box::new(move |t| 1.0 + rate * t)),
        DistributionSpec::Gamma { shape: 2.0, rate } => Some(Box::new(move |t| {
            1.0 + rate * t / 2.0 - (1.0 - (-2.0 * rate * t).exp()) / 4.0
        })),
        _ => None,
    };
    if let Some(exact) = closed {
        let err = cum
            .iter()
            .enumerate()
            .map(|(k, v)| (v - exact(grid.x(k))).abs())
            .fold(0.0, f64::max);
        out.checks
            .push(Check::at_most("phi-closed-form", err, 5.0 * h).note("max |Phi([0,t]) - exact|"));
    }
    let second = d.moment(2.0);
    if !second.is_infinite() && grid.horizon() >= 50.0 * d.mean() {
        let t = grid.horizon();
        let gap = (cum[cum.len() - 1] - m * t - m * m * second.value / 2.0).abs();
        out.checks
            .push(Check::at_most("phi-asymptote", gap, 1e-2).note("|Phi([0,T]) - mT - m^2 E[tau^2]/2|"));
    }
    let dens = phi.density();
    out.artifacts.push(Artifact::table(
        "phi",
        &["t", "phi_cumulative", "phi_density"],
        strided(cum.len(), 2000).map(|k| vec![grid.x(k), cum[k], dens[k]]),
    ));
    Ok(out)
}

/// Tolerance `10·(h/mean)²·100` for the linear solution of the renewal equation.
pub fn linear_solution_tolerance(d: &Distribution, h: f64) -> f64 {
    let hs = h / d.mean();
    10.0 * hs * hs * 100.0
}

/// Relative to the solution's scale `m·horizon`, errors below this are roundoff
/// and the halving ratio carries no information.
pub const ROUNDOFF_ERROR: f64 = 1e-12;

fn linear_solution_error(d: &Distribution, grid: Grid) -> Result<(f64, f64, Vec<f64>)> {
    let sol = solve_renewal_equation(d, &linear_forcing(d, grid))?;
    let m = d.rate();
    let err = sol
        .solution
        .values()
        .iter()
        .enumerate()
        .map(|(k, v)| (v - m * grid.x(k)).abs())
        .fold(0.0, f64::max);
    Ok((err, sol.residual, sol.solution.into_values()))
}

/// Renewal equation with forcing `m∫₀^t F̄`, whose solution is `mt`, at `h` and `h/2`.
pub fn solve_experiment(d: &Distribution, grid: Grid) -> Result<Outcome> {
    let (coarse, residual, values) = linear_solution_error(d, grid)?;
    let (fine, _, _) = linear_solution_error(d, grid.refined())?;
    let tol = linear_solution_tolerance(d, grid.step());
    let ratio = coarse / fine;
    let roundoff = ROUNDOFF_ERROR * (d.rate() * grid.horizon()).max(1.0);
    let ratio_check = if coarse <= roundoff {
        Check::flag(
            "halving-ratio",
            true,
            format!("errors at roundoff ({coarse:.3e}, {fine:.3e})"),
        )
    } else {
        Check::at_least("halving-ratio", ratio, 3.0)
    };
    let mut out = Outcome::default();
    out.checks.push(Check::all(
        format!("linear-solution {d}"),
        vec![
            Check::at_most("max-error", coarse, tol),
            ratio_check,
            Check::at_most("equation-residual", residual, 1e-8),
        ],
    ));
    let m = d.rate();
    out.artifacts.push(Artifact::table(
        "solve",
        &["t", "z_solution", "mt"],
        strided(values.len(), 2000).map(|k| vec![grid.x(k), values[k], m * grid.x(k)]),
    ));
    Ok(out)
}

/// Draws of `B_t` from independent zero-delayed paths.
pub fn simulate_residuals(d: &Distribution, t: f64, n: usize, seed: u64) -> Result<Vec<f64>> {
    (0..n)
        .into_par_iter()
        .map(|i| {
            let path = simulate_path(d, t, DelayMode::Zero, &mut stream(seed, i as u64))?;
            Ok(path.recurrence_times(t).1)
        })
        .collect()
}

/// Law of `B_t` from the grid solver against simulated draws, with the total
/// variation to `Π` at each time.
pub fn bt_experiment(d: &Distribution, grid: Grid, ts: &[f64], n_paths: usize, seed: u64) -> Result<Outcome> {
    let model = RenewalModel::new(d, grid)?;
    let xg = model.default_x_grid();
    let tol_extra = 2.0 * grid.step() / d.mean();
    let mut parts = Vec::new();
    let mut ks_rows = Vec::new();
    let mut cdf_rows = Vec::new();
    for &t in ts {
        let law = model.forward_recurrence_cdf(t, xg)?;
        let draws = simulate_residuals(d, t, n_paths, derive(seed, &format!("bt {t}")))?;
        let xmax = xg.horizon();
        let ks = ks_statistic(&draws, |x| law.cdf.interpolate(x.min(xmax)));
        let crit = ks_critical(n_paths) + tol_extra;
        let tv = model.tv_to_stationary(t, xg)?.tv;
        parts.push(Check::at_most(format!("ks t={t}"), ks, crit));
        ks_rows.push(vec![t, ks, crit, tv]);
        for k in strided(xg.len(), 400) {
            let x = xg.x(k);
            cdf_rows.push(vec![t, x, law.cdf.value(k), d.stationary_delay_cdf(x)]);
        }
    }
    let mut out = Outcome::default();
    out.checks
        .push(Check::all(format!("recurrence-law-vs-simulation {d}"), parts));
    out.artifacts
        .push(Artifact::table("bt_ks", &["t", "ks", "critical", "tv"], ks_rows));
    out.artifacts.push(Artifact::table(
        "bt_cdf",
        &["t", "x", "cdf", "stationary_cdf"],
        cdf_rows,
    ));
    Ok(out)
}

/// Stone decomposition checks: reconstruction, `‖Φ₂‖`, the limit of `φ₁` and its bound.
pub fn stone_experiment(d: &Distribution, grid: Grid) -> Result<Outcome> {
    let dec = stone_decompose(d, grid)?;
    let m = d.rate();
    let mut parts = vec![Check::at_most("reconstruction", dec.reconstruction_error(), 1e-6)];
    let norm_gap = (dec.phi2_in_horizon() - dec.phi2_norm()).abs();
    let truncation = dec.truncation_bound();
    parts.push(if truncation <= 1e-6 {
        Check::at_most("phi2-norm", norm_gap, 1e-6)
    } else {
        // Heavy tail: part of Φ₂ lies beyond the horizon, so only the in-horizon mass can be bounded.
        Check::at_most("phi2-norm", dec.phi2_in_horizon() - dec.phi2_norm(), 1e-6)
            .note(format!("mass beyond horizon {truncation:.3e}"))
    });
    let start = 50.0 * d.mean();
    let limit = dec
        .phi1
        .values()
        .iter()
        .enumerate()
        .filter(|(k, _)| grid.x(*k) >= start)
        .map(|(_, v)| (v - m).abs())
        .fold(f64::NAN, f64::max);
    parts.push(if limit.is_nan() {
        Check::flag(
            "phi1-limit",
            false,
            format!("horizon {} below 50 means", grid.horizon()),
        )
    } else {
        Check::at_most("phi1-limit", limit, 0.02 * m).note("sup over x >= 50 mean of |phi1 - m|")
    });
    parts.push(Check::at_most(
        "phi1-bounded",
        dec.phi1_sup(),
        dec.phi1_bound() * (1.0 + 1e-9),
    ));
    let mut out = Outcome::default();
    out.checks.push(Check::all(format!("stone-decomposition {d}"), parts));
    let c = dec.component;
    let h = grid.step();
    let p1 = crate::grid::cumulative_trapezoid(dec.phi1.values(), h);
    let p2 = dec.phi2.cumulative();
    out.artifacts.push(Artifact::table(
        "stone",
        &["x", "phi1_density", "phi1_cumulative", "phi2_cumulative"],
        strided(grid.len(), 2000).map(|k| vec![grid.x(k), dec.phi1.value(k), p1[k], p2[k]]),
    ));
    out.artifacts.push(Artifact::table(
        "stone_component",
        &["n0", "a", "b", "mass", "phi2_norm", "truncation"],
        [vec![c.n0 as f64, c.a, c.b, c.mass, dec.phi2_norm(), truncation]],
    ));
    Ok(out)
}

/// Maximal coupling of gridded `Exp(1)` and `Exp(2)`: the uncoupled fraction
/// against half their total variation.
pub fn maximal_coupling_experiment(n: usize, seed: u64) -> Result<Outcome> {
    let g = Grid::new(0.005, 6000)?;
    let norm = |m: GridMeasure| {
        let mass = m.mass();
        m.scaled(1.0 / mass)
    };
    let p = norm(GridMeasure::from_density(g, |x| (-x).exp())?);
    let q = norm(GridMeasure::from_density(g, |x| 2.0 * (-2.0 * x).exp())?);
    let half_tv = 0.5 * p.tv_distance(&q)?;
    let mc = MaximalCoupling::new(&p, &q)?;
    let misses = (0..n)
        .into_par_iter()
        .filter(|i| !mc.sample(&mut stream(seed, *i as u64)).coupled)
        .count();
    let rate = misses as f64 / n as f64;
    let sd = binomial_sd(half_tv, n);
    let mut out = Outcome::default();
    out.checks.push(
        Check::at_most("maximal-coupling-rate", (rate - half_tv).abs(), 3.0 * sd)
            .note(format!("P(X != Y) = {rate:.5}, tv/2 = {half_tv:.5}")),
    );
    out.artifacts.push(Artifact::table(
        "maximal_coupling",
        &["n", "uncoupled_rate", "half_tv", "sd"],
        [vec![n as f64, rate, half_tv, sd]],
    ));
    Ok(out)
}

/// Common component and `n` coupling traces.
pub fn coupling_traces(d: &Distribution, n: usize, seed: u64) -> Result<(CommonComponent, Vec<CouplingTrace>)> {
    let comp = find_common_component(d, default_grid(d))?;
    let traces = Coupler::new(d, comp.params)?.simulate_many(n, seed)?;
    Ok((comp, traces))
}

/// Chi-square of the trial count `σ` against `Geometric(δ²)` on `{0, 1, …}`.
pub fn sigma_check(traces: &[CouplingTrace], delta: f64) -> (Check, Artifact) {
    let n = traces.len();
    let p = delta * delta;
    let max = traces.iter().map(|t| t.sigma).max().unwrap_or(0);
    let mut observed = vec![0.0; max + 2];
    for t in traces {
        observed[t.sigma] += 1.0;
    }
    // Cells 0..=max, then the tail beyond max.
    let mut expected: Vec<f64> = (0..=max).map(|k| n as f64 * p * (1.0 - p).powi(k as i32)).collect();
    expected.push(n as f64 * (1.0 - p).powi(max as i32 + 1));
    let chi = chi_square_gof(&observed, &expected, 0);
    let check = Check::at_least("sigma-geometric", chi.p_value, 0.05)
        .note(format!("chi2 = {:.2}, dof = {}", chi.statistic, chi.dof));
    let rows = (0..observed.len()).map(|k| vec![k as f64, observed[k], expected[k]]);
    (
        check,
        Artifact::table("couple_sigma", &["sigma", "observed", "expected"], rows),
    )
}

/// The pure and switched stationary sequences agree exactly from `𝒯` on.
pub fn post_coupling_check(traces: &[CouplingTrace]) -> Check {
    let capped = traces.iter().filter(|t| t.capped).count();
    let mismatched = traces
        .iter()
        .filter(|tr| {
            let after = |v: Vec<f64>| v.into_iter().filter(|x| *x >= tr.coupling_time).collect::<Vec<_>>();
            after(tr.pure_sequence()) != after(tr.stationary_sequence())
        })
        .count();
    Check::flag(
        "post-coupling-identical",
        capped == 0 && mismatched == 0,
        format!("{mismatched} mismatched, {capped} capped of {}", traces.len()),
    )
}

/// `2P̂(𝒯 > t) + 3σ ≥ ‖P(B_t ∈ ·) − Π‖` with `σ` the standard error of `2P̂`.
pub fn coupling_inequality_check(d: &Distribution, traces: &[CouplingTrace], ts: &[f64]) -> Result<(Check, Artifact)> {
    let model = RenewalModel::extrapolated(d, default_grid(d))?;
    let xg = model.default_x_grid();
    let mut parts = Vec::new();
    let mut rows = Vec::new();
    for &t in ts {
        let k = traces.iter().filter(|tr| tr.coupling_time > t).count();
        let p = proportion(k, traces.len());
        let tv = model.tv_to_stationary(t, xg)?.tv;
        let lhs = 2.0 * p.estimate + 3.0 * 2.0 * p.se;
        parts.push(Check::at_least(format!("t={t}"), lhs, tv).note(format!("P(T>t) = {:.4}", p.estimate)));
        rows.push(vec![t, p.estimate, p.se, tv]);
    }
    Ok((
        Check::all("coupling-inequality", parts),
        Artifact::table("couple_tail", &["t", "p_exceed", "se", "tv"], rows),
    ))
}

/// `E[𝒯^q]` from the first quarter of the traces against all of them.
pub fn moment_stability_check(traces: &[CouplingTrace], qs: &[f64]) -> Result<(Check, Artifact)> {
    let quarter = traces.len() / 4;
    let mut parts = Vec::new();
    let mut rows = Vec::new();
    for &q in qs {
        let small = coupling_moment(&traces[..quarter], q)?;
        let all = coupling_moment(traces, q)?;
        let rel = (small.mean - all.mean).abs() / all.mean;
        parts.push(Check::at_most(format!("q={q}"), rel, 0.2).note(format!(
            "n={} {:.4} vs n={} {:.4}",
            small.n, small.mean, all.n, all.mean
        )));
        rows.push(vec![
            q,
            small.n as f64,
            small.mean,
            small.se,
            all.n as f64,
            all.mean,
            all.se,
        ]);
    }
    Ok((
        Check::all("moment-stability", parts),
        Artifact::table(
            "couple_moments",
            &["q", "n_small", "mean_small", "se_small", "n_all", "mean_all", "se_all"],
            rows,
        ),
    ))
}

/// Full coupling run: component, trial-count law, post-coupling agreement,
/// coupling inequality at `ts` and moment stability for `qs`.
pub fn couple_experiment(d: &Distribution, n_traces: usize, ts: &[f64], qs: &[f64], seed: u64) -> Result<Outcome> {
    let (comp, traces) = coupling_traces(d, n_traces, derive(seed, "couple"))?;
    let mut out = Outcome::default();
    let p = comp.params;
    out.checks.push(Check::flag(
        "common-component",
        comp.verified && comp.stabilized,
        format!(
            "b = {}, d = {}, delta = {:.4}, verified = {}, stabilized = {}",
            p.b, p.d, p.delta, comp.verified, comp.stabilized
        ),
    ));
    let (sigma, sigma_csv) = sigma_check(&traces, p.delta);
    out.checks.push(sigma);
    out.checks.push(post_coupling_check(&traces));
    if !ts.is_empty() {
        let (ineq, csv) = coupling_inequality_check(d, &traces, ts)?;
        out.checks.push(ineq);
        out.artifacts.push(csv);
    }
    if !qs.is_empty() {
        let (mom, csv) = moment_stability_check(&traces, qs)?;
        out.checks.push(mom);
        out.artifacts.push(csv);
    }
    out.artifacts.push(sigma_csv);
    out.artifacts.push(Artifact::table(
        "couple_params",
        &["b", "d", "delta", "raw_delta", "best_delta"],
        [vec![p.b, p.d, p.delta, comp.raw_delta, comp.best_delta]],
    ));
    out.artifacts.push(Artifact::table(
        "couple_times",
        &["trace", "sigma", "coupling_time"],
        traces
            .iter()
            .enumerate()
            .take(2000)
            .map(|(i, t)| vec![i as f64, t.sigma as f64, t.coupling_time]),
    ));
    Ok(out)
}

fn zero_delayed_paths(d: &Distribution, horizon: f64, n: usize, seed: u64) -> Result<Vec<RenewalPath>> {
    (0..n)
        .into_par_iter()
        .map(|i| simulate_path(d, horizon, DelayMode::Zero, &mut stream(seed, i as u64)))
        .collect()
}

/// Cycle hazards against `Exp(1)` and the martingale `N(t) − 1 − Λ(t)`.
///
/// Hazards are pooled with [`cycle_hazards_pooled`], which keeps the cycle
/// straddling the horizon.
pub fn compensator_experiment(d: &Distribution, ts: &[f64], n_paths: usize, seed: u64) -> Result<Outcome> {
    let horizon = ts.iter().copied().fold(0.0, f64::max);
    let paths = zero_delayed_paths(d, horizon, n_paths, derive(seed, "compensator"))?;
    let mut xi = Vec::new();
    for p in &paths {
        xi.extend(cycle_hazards_pooled(p, d)?.xi);
    }
    let ks = ks_statistic(&xi, |x| 1.0 - (-x).exp());
    let mut out = Outcome::default();
    out.checks.push(Check::all(
        format!("cycle-hazards-exponential {d}"),
        vec![
            Check::at_least("cycles", xi.len() as f64, 1e4),
            Check::at_most("ks", ks, ks_critical(xi.len())),
        ],
    ));
    let mut parts = Vec::new();
    let mut rows = Vec::new();
    for &t in ts {
        let m: Vec<f64> = paths
            .iter()
            .map(|p| Ok(p.count(t) as f64 - 1.0 - compensator_at(p, d, t)?))
            .collect::<Result<_>>()?;
        let (mean, sd) = mean_sd(&m);
        let tol = 3.0 * sd / (m.len() as f64).sqrt();
        parts.push(Check::at_most(format!("t={t}"), mean.abs(), tol));
        rows.push(vec![t, mean, sd, m.len() as f64]);
    }
    out.checks
        .push(Check::all(format!("compensator-martingale {d}"), parts));
    out.artifacts.push(Artifact::table(
        "compensator_martingale",
        &["t", "mean", "sd", "n"],
        rows,
    ));
    let mut sorted = xi.clone();
    sorted.sort_by(f64::total_cmp);
    out.artifacts.push(Artifact::table(
        "compensator_xi_quantiles",
        &["u", "empirical", "exponential"],
        (1..100).map(|j| {
            let u = j as f64 / 100.0;
            let idx = ((u * sorted.len() as f64) as usize).min(sorted.len() - 1);
            vec![u, sorted[idx], -(1.0 - u).ln()]
        }),
    ));
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SupKind {
    /// Running-cycle hazard scaled by `T^p`.
    Compensator,
    /// Forward recurrence time scaled by `T^{1/p}`.
    Recurrence,
}

impl SupKind {
    fn label(self) -> &'static str {
        match self {
            SupKind::Compensator => "compensator-sup",
            SupKind::Recurrence => "recurrence-sup",
        }
    }
}

/// `P̂(scaled sup > ε)` across horizons, which should fall strictly, and the
/// pathwise domination by the scaled cycle maximum.
pub fn sweep_experiment(
    d: &Distribution,
    kind: SupKind,
    horizons: &[f64],
    n_paths: usize,
    p: f64,
    eps: f64,
    seed: u64,
) -> Result<Outcome> {
    let mut rows = Vec::new();
    let mut violations = 0usize;
    let mut estimates = Vec::new();
    for &t in horizons {
        let paths = zero_delayed_paths(d, t, n_paths, derive(seed, &format!("{} {t}", kind.label())))?;
        let mut exceed = 0usize;
        for path in &paths {
            let (value, ok) = match kind {
                SupKind::Compensator => {
                    let s = scaled_compensator_sup(path, d, t, p)?;
                    (s.value, s.value <= s.bound)
                }
                SupKind::Recurrence => {
                    let s = scaled_recurrence_sup(path, t, p)?;
                    (s.sup_b, s.sup_a <= s.bound && s.sup_b <= s.bound)
                }
            };
            exceed += usize::from(value > eps);
            violations += usize::from(!ok);
        }
        let pr = proportion(exceed, n_paths);
        estimates.push(pr.estimate);
        rows.push(vec![t, pr.estimate, pr.se]);
    }
    let decreasing = estimates.windows(2).all(|w| w[1] < w[0]);
    let listing: Vec<String> = horizons
        .iter()
        .zip(&estimates)
        .map(|(t, e)| format!("T={t}: {e:.3}"))
        .collect();
    let mut out = Outcome::default();
    out.checks.push(Check::all(
        format!("{} {d} p={p}", kind.label()),
        vec![
            Check::flag("exceedance-decreasing", decreasing, listing.join(", ")),
            Check::flag("domination", violations == 0, format!("{violations} violating paths")),
        ],
    ));
    out.artifacts.push(Artifact::table(
        format!("sweep_{}", kind.label().replace('-', "_")),
        &["horizon", "p_exceed", "se"],
        rows,
    ));
    Ok(out)
}

fn curve_rows(pair: &CurvePair) -> Vec<Vec<f64>> {
    pair.coarse
        .points
        .iter()
        .zip(&pair.fine.points)
        .zip(&pair.coarse.resolution)
        .map(|(((x, a), (_, b)), r)| vec![*x, *a, *b, *r])
        .collect()
}

/// Slope of `|Φ*z(x) − m∫z|` for `z = (1+y)^{−r}` over the span of `xs` against
/// `max(1−r, −q) + 0.3`, at `h` and `h/2`.
pub fn krt_experiment(study: &RateStudy, xs: &[f64], rs: &[f64], q: f64) -> Result<Outcome> {
    let d = *study.distribution();
    let window = (xs[0], xs[xs.len() - 1]);
    let mut out = Outcome::default();
    for &r in rs {
        let pair = study.krt(r, xs)?;
        let bound = (1.0 - r).max(-q) + 0.3;
        let fit = |c| fit_slope(c, window, 0.0);
        let part = |label: &str, c| match fit(c) {
            Ok(f) => Check::at_most(label, f.slope, bound).note(format!("{} points, r2 = {:.4}", f.used, f.r2)),
            Err(e) => Check::error(label, &e),
        };
        let coarse = part("slope h", &pair.coarse);
        let fine = part("slope h/2", &pair.fine);
        let stable = Check::flag("stable", coarse.passed == fine.passed, "same verdict at h and h/2");
        out.checks.push(Check::all(
            format!("key-renewal-rate {d} r={r} q={q}"),
            vec![coarse, fine, stable],
        ));
        out.artifacts.push(Artifact::table(
            format!("krt_r{r}"),
            &["x", "err_h", "err_h2", "resolution"],
            curve_rows(&pair),
        ));
    }
    Ok(out)
}

/// Default abscissae of the rate fits: 13 geometric points on `[20, 80]·mean`.
pub fn rate_window(d: &Distribution) -> Vec<f64> {
    let mean = d.mean();
    asymptotics::geometric_lattice(20.0 * mean, 80.0 * mean, 13)
}

/// Default times of the TV trend: steps of `mean/4` on `[5, 8]·mean`, where the
/// light-tailed curves are still above the floor, then `2·mean` up to `40·mean`.
pub fn trend_times(d: &Distribution) -> Vec<f64> {
    let mean = d.mean();
    let mut ts = asymptotics::linear_lattice(5.0, 8.0, 0.25);
    ts.extend(asymptotics::linear_lattice(10.0, 40.0, 2.0));
    ts.iter().map(|t| t * mean).collect()
}

/// Decay checks on `‖P(B_t ∈ ·) − Π‖`.
#[derive(Debug, Clone, PartialEq)]
pub enum TvRate {
    /// `t^q · TV` decreasing over the resolved points of `ts`, for each `q`.
    Trend { ts: Vec<f64>, qs: Vec<f64> },
    /// Fitted slope over `[20, 80]·mean` at most `−q + 0.3`.
    Slope { q: f64 },
}

pub fn tv_rate_experiment(study: &RateStudy, rate: &TvRate) -> Result<Outcome> {
    let d = *study.distribution();
    let mut out = Outcome::default();
    match rate {
        TvRate::Trend { ts, qs } => {
            let pair = study.tv(ts)?;
            let window = (ts[0], ts[ts.len() - 1]);
            let parts = qs
                .iter()
                .flat_map(|&q| {
                    [(&pair.coarse, "h"), (&pair.fine, "h/2")].map(|(c, label)| {
                        let tr = scaled_trend(c, q, window, TV_FLOOR);
                        Check::flag(
                            format!("q={q} {label}"),
                            tr.decreasing,
                            format!("{} resolved points up to t = {}", tr.used, tr.resolved_to),
                        )
                    })
                })
                .collect();
            out.checks.push(Check::all(format!("tv-decay-trend {d}"), parts));
            out.artifacts.push(Artifact::table(
                "tv_trend",
                &["t", "tv_h", "tv_h2", "resolution"],
                curve_rows(&pair),
            ));
        }
        TvRate::Slope { q } => {
            let ts = rate_window(&d);
            let window = (ts[0], ts[ts.len() - 1]);
            let pair = study.tv(&ts)?;
            let parts = [(&pair.coarse, "h"), (&pair.fine, "h/2")]
                .map(|(c, label)| match fit_slope(c, window, TV_FLOOR) {
                    Ok(f) => Check::at_most(format!("slope {label}"), f.slope, -q + 0.3)
                        .note(format!("{} points, r2 = {:.4}", f.used, f.r2)),
                    Err(e) => Check::error(format!("slope {label}"), &e),
                })
                .to_vec();
            out.checks.push(Check::all(format!("tv-decay-slope {d} q={q}"), parts));
            out.artifacts.push(Artifact::table(
                "tv_slope",
                &["t", "tv_h", "tv_h2", "resolution"],
                curve_rows(&pair),
            ));
        }
    }
    Ok(out)
}

/// Uniform error of the cycle-maximum approximation at each horizon; the last
/// must be below the first.
pub fn rootzen_experiment(
    d: &Distribution,
    horizons: &[f64],
    n_paths: usize,
    stat: MaxStatistic,
    seed: u64,
) -> Result<Outcome> {
    let mut rows = Vec::new();
    for &t in horizons {
        let rep = rootzen_uniform_error(d, t, n_paths, stat, derive(seed, &format!("rootzen {t}")))?;
        rows.push(vec![t, rep.error, n_paths as f64]);
    }
    let first = rows[0][1];
    let last = rows[rows.len() - 1][1];
    let listing: Vec<String> = rows.iter().map(|r| format!("T={}: {:.4}", r[0], r[1])).collect();
    let mut out = Outcome::default();
    out.checks.push(
        Check::at_most(format!("cycle-maximum-error {d}"), last, first)
            .with_detail(format!("{} (last must be below first)", listing.join(", "))),
    );
    out.artifacts.push(Artifact::table(
        "rootzen",
        &["horizon", "uniform_error", "n_paths"],
        rows,
    ));
    Ok(out)
}
