//! Maximal coupling of two gridded laws, the common uniform component of the
//! forward recurrence times, and the pure/stationary coupling chain with its
//! geometric trial count `σ` and coupling time `𝒯`.

use rand::distr::Open01;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distribution::Distribution;
use crate::error::{Error, Result};
use crate::grid::{Grid, GridMeasure};
use crate::renewal::{default_grid, RenewalModel};
use crate::rng;
use crate::stats::{proportion, Proportion};

/// Inverse-CDF sampler for a gridded law: an atom at 0 plus a density that is
/// linear between nodes.
#[derive(Debug, Clone)]
pub struct GridSampler {
    step: f64,
    atom: f64,
    values: Vec<f64>,
    cumulative: Vec<f64>,
}

impl GridSampler {
    pub fn new(step: f64, atom: f64, values: Vec<f64>) -> Self {
        let mut cumulative = Vec::with_capacity(values.len());
        let mut acc = atom;
        cumulative.push(acc);
        for w in values.windows(2) {
            acc += 0.5 * step * (w[0] + w[1]);
            cumulative.push(acc);
        }
        Self {
            step,
            atom,
            values,
            cumulative,
        }
    }

    pub fn mass(&self) -> f64 {
        *self.cumulative.last().expect("nonempty")
    }

    /// Point of cumulative mass `u·mass`.
    pub fn quantile(&self, u: f64) -> f64 {
        let r = u * self.mass();
        if r <= self.atom {
            return 0.0;
        }
        let k = (self.cumulative.partition_point(|c| *c < r) - 1).min(self.values.len() - 2);
        let rest = (r - self.cumulative[k]) / self.step;
        let (a, b) = (self.values[k], self.values[k + 1]);
        // Solve a·s + (b − a)s²/2 = rest on [0, 1], in the cancellation-free form.
        let disc = (a * a + 2.0 * (b - a) * rest).max(0.0);
        let denom = a + disc.sqrt();
        let s = if denom > 0.0 {
            (2.0 * rest / denom).clamp(0.0, 1.0)
        } else {
            0.0
        };
        (k as f64 + s) * self.step
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.quantile(rng.sample(Open01))
    }
}

/// Outcome of one draw of the maximal coupling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoupledPair {
    pub x: f64,
    pub y: f64,
    pub coupled: bool,
}

/// Maximal coupling of two probability laws on a grid: with probability
/// `δ = ‖p ∧ q‖` both coordinates take one draw from `(p ∧ q)/δ`, otherwise they
/// are drawn independently from `(p − p ∧ q)/(1 − δ)` and `(q − p ∧ q)/(1 − δ)`.
#[derive(Debug, Clone)]
pub struct MaximalCoupling {
    overlap: f64,
    common: Option<GridSampler>,
    left: Option<GridSampler>,
    right: Option<GridSampler>,
}

impl MaximalCoupling {
    pub fn new(p: &GridMeasure, q: &GridMeasure) -> Result<Self> {
        // Validates grids and normalization.
        p.tv_distance(q)?;
        let h = p.grid().step();
        let min: Vec<f64> = p.density().iter().zip(q.density()).map(|(a, b)| a.min(*b)).collect();
        let atom = p.atom0().min(q.atom0());
        let common = GridSampler::new(h, atom, min.clone());
        let overlap = common.mass().min(1.0);
        let excess = |m: &GridMeasure| {
            GridSampler::new(
                h,
                m.atom0() - atom,
                m.density().iter().zip(&min).map(|(a, b)| (a - b).max(0.0)).collect(),
            )
        };
        let nonempty = |s: GridSampler| (s.mass() > 0.0).then_some(s);
        Ok(Self {
            overlap,
            common: nonempty(common),
            left: nonempty(excess(p)),
            right: nonempty(excess(q)),
        })
    }

    /// `‖p ∧ q‖`.
    pub fn overlap(&self) -> f64 {
        self.overlap
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> CoupledPair {
        let u: f64 = rng.sample(Open01);
        match (&self.common, &self.left, &self.right) {
            (Some(c), _, _) if u < self.overlap => {
                let x = c.sample(rng);
                CoupledPair { x, y: x, coupled: true }
            }
            (_, Some(l), Some(r)) => CoupledPair {
                x: l.sample(rng),
                y: r.sample(rng),
                coupled: false,
            },
            (Some(c), _, _) => {
                let x = c.sample(rng);
                CoupledPair { x, y: x, coupled: true }
            }
            _ => unreachable!("normalized measures have positive mass"),
        }
    }
}

/// One draw of the maximal coupling of `p` and `q`.
pub fn maximal_coupling_sample<R: Rng + ?Sized>(p: &GridMeasure, q: &GridMeasure, rng: &mut R) -> Result<CoupledPair> {
    Ok(MaximalCoupling::new(p, q)?.sample(rng))
}

/// `(b, d, δ)`: for `t ≥ d` the law of `B_{t−}` has density at least `δ/b` on `(0, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingParams {
    pub b: f64,
    pub d: f64,
    pub delta: f64,
}

/// Parameters with the diagnostics of their numerical justification.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommonComponent {
    pub params: CouplingParams,
    /// `b · min p_t(x)` over the search lattice, before the 0.95 margin.
    pub raw_delta: f64,
    /// Largest margin-reduced `δ` over all candidates.
    pub best_delta: f64,
    /// The bound holds on a lattice of half the spacing.
    pub verified: bool,
    /// `sup_x |p_t − π|` on `(0, b)` is nonincreasing over the last quarter of the
    /// lattice, the limit `π` satisfies the bound, and the remaining deviation
    /// fits inside the margin.
    pub stabilized: bool,
}

const B_FRACTIONS: [f64; 3] = [0.25, 0.5, 1.0];
const D_FRACTIONS: [f64; 5] = [0.5, 1.0, 2.0, 3.0, 5.0];
const LATTICE_SPAN: f64 = 20.0;
const LATTICE_STEP: f64 = 0.25;
const DELTA_MARGIN: f64 = 0.95;

/// Scans `b ∈ {0.25, 0.5, 1}·mean`, `d ∈ {0.5, 1, 2, 3, 5}·mean` with `B_t`
/// densities on the lattice `t ∈ {d, d + mean/4, …, d + 20·mean}`, and returns
/// the smallest `d` whose `δ` is within 1% of the best found.
pub fn find_common_component(d: &Distribution, grid: Grid) -> Result<CommonComponent> {
    let model = RenewalModel::new(d, grid)?;
    find_common_component_with(&model)
}

pub fn find_common_component_with(model: &RenewalModel) -> Result<CommonComponent> {
    let d = *model.distribution();
    let grid = model.grid();
    let h = grid.step();
    let mean = d.mean();
    let node = |x: f64| (x / h).round() as usize;
    let nb_max = node(mean);
    let lattice = |start: f64, spacing: f64| -> Vec<usize> {
        let (s, step, end) = (node(start), node(spacing).max(1), node(start + LATTICE_SPAN * mean));
        (s..=end).step_by(step).collect()
    };
    let end_node = node((D_FRACTIONS[4] + LATTICE_SPAN) * mean);
    if end_node > grid.count() {
        return Err(Error::HorizonExceeded {
            t: end_node as f64 * h,
            horizon: grid.horizon(),
        });
    }
    // Running minimum over x ∈ [0, b] for each lattice time, for each b.
    let min_at = |i: usize| -> Result<Vec<f64>> {
        let dens = model.recurrence_density_nodes(i as f64 * h, nb_max)?;
        Ok(B_FRACTIONS
            .iter()
            .map(|f| dens[..=node(f * mean)].iter().copied().fold(f64::INFINITY, f64::min))
            .collect())
    };
    let step = node(LATTICE_STEP * mean).max(1);
    let first = node(D_FRACTIONS[0] * mean);
    let times: Vec<usize> = (first..=end_node).step_by(step).collect();
    let mins: Vec<Vec<f64>> = times.iter().map(|&i| min_at(i)).collect::<Result<_>>()?;

    let mut candidates = Vec::new();
    for (bi, bf) in B_FRACTIONS.iter().enumerate() {
        let b = node(bf * mean) as f64 * h;
        for df in D_FRACTIONS {
            let dn = node(df * mean);
            let stop = dn + node(LATTICE_SPAN * mean);
            let lo = times
                .iter()
                .zip(&mins)
                .filter(|(t, _)| **t >= dn && **t <= stop)
                .map(|(_, m)| m[bi])
                .fold(f64::INFINITY, f64::min);
            candidates.push((dn as f64 * h, b, b * lo));
        }
    }
    let best = candidates.iter().map(|c| c.2).fold(0.0f64, f64::max) * DELTA_MARGIN;
    if best < 0.01 {
        return Err(Error::NoCommonComponent { delta: best });
    }
    let (dd, b, raw) = candidates
        .iter()
        .filter(|c| c.2 * DELTA_MARGIN >= 0.99 * best)
        .min_by(|x, y| x.0.total_cmp(&y.0).then(y.2.total_cmp(&x.2)))
        .copied()
        .expect("best is attained");
    let params = CouplingParams {
        b,
        d: dd,
        delta: DELTA_MARGIN * raw,
    };

    let nb = node(b);
    let level = params.delta / b;
    let mut verified = true;
    for i in lattice(dd, 0.5 * LATTICE_STEP * mean) {
        let dens = model.recurrence_density_nodes(i as f64 * h, nb)?;
        if dens.iter().any(|v| *v < level) {
            verified = false;
        }
    }

    let tail: Vec<usize> = lattice(dd, LATTICE_STEP * mean);
    let last_quarter = &tail[tail.len() * 3 / 4..];
    let mut devs = Vec::with_capacity(last_quarter.len());
    for &i in last_quarter {
        let dens = model.recurrence_density_nodes(i as f64 * h, nb)?;
        let dev = dens
            .iter()
            .enumerate()
            .map(|(l, v)| (v - d.stationary_delay_density(l as f64 * h)).abs())
            .fold(0.0, f64::max);
        devs.push(dev);
    }
    let pi_min = (0..=nb)
        .map(|l| d.stationary_delay_density(l as f64 * h))
        .fold(f64::INFINITY, f64::min);
    let last_min = model
        .recurrence_density_nodes(*tail.last().expect("nonempty") as f64 * h, nb)?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    let monotone = devs.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9) + 1e-12);
    let stabilized = monotone && pi_min >= level && *devs.last().expect("nonempty") <= last_min - level;

    Ok(CommonComponent {
        params,
        raw_delta: raw,
        best_delta: best,
        verified,
        stabilized,
    })
}

/// One run of the coupling chain.
///
/// Index `k` of `eta`, `indicators` and `l` refers to `(η_k, η̂_k)`, `I_k` and
/// `L_k`; `beta[k]` holds `(β_{k+1}, β̂_{k+1})`. On acceptance the stationary
/// side's draw is replaced by the shared renewal, so `beta[σ] = (U, U)`; the
/// drawn pair is kept in `accepted_pair`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingTrace {
    pub eta: Vec<(f64, f64)>,
    pub beta: Vec<(f64, f64)>,
    pub indicators: Vec<u8>,
    pub l: Vec<f64>,
    pub sigma: usize,
    pub coupling_time: f64,
    pub final_uniform: f64,
    pub accepted_pair: (f64, f64),
    /// Renewals of the pure process up to and including `𝒯`.
    pub pure_events: Vec<f64>,
    /// Renewals of the stationary process before `𝒯`, then `𝒯`.
    pub stationary_events: Vec<f64>,
    /// Common renewals after `𝒯`.
    pub common_events: Vec<f64>,
    /// The iteration cap was hit without acceptance.
    pub capped: bool,
}

impl CouplingTrace {
    /// `T_n = η̂₀ + d + Σ_{i≤n}(β_i ∨ β̂_i + d) + U`.
    pub fn t_n(&self, n: usize, d: f64) -> f64 {
        let mut s = self.eta[0].1 + d;
        for (b, bh) in self.beta.iter().take(n) {
            s += b.max(*bh) + d;
        }
        s + self.final_uniform
    }

    /// Full pure sequence: pre-`𝒯` renewals then the common ones.
    pub fn pure_sequence(&self) -> Vec<f64> {
        let mut v = self.pure_events.clone();
        v.extend(&self.common_events);
        v
    }

    /// Stationary sequence switched onto the pure one at `𝒯`.
    pub fn stationary_sequence(&self) -> Vec<f64> {
        let mut v = self.stationary_events.clone();
        v.extend(&self.common_events);
        v
    }
}

/// Iteration cap of the coupling chain.
pub const MAX_ITERATIONS: usize = 10_000;

/// Runs the coupling chain for one distribution; holds the renewal model used
/// for the exact `B_s` densities in the thinning ratio.
#[derive(Debug, Clone)]
pub struct Coupler {
    dist: Distribution,
    params: CouplingParams,
    model: RenewalModel,
    /// Length of the common continuation after `𝒯`.
    pub continuation: f64,
}

impl Coupler {
    pub fn new(d: &Distribution, params: CouplingParams) -> Result<Self> {
        Self::with_model(RenewalModel::new(d, default_grid(d))?, params)
    }

    pub fn with_model(model: RenewalModel, params: CouplingParams) -> Result<Self> {
        if !(params.b > 0.0 && params.d > 0.0 && params.delta > 0.0 && params.delta < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "invalid coupling parameters {params:?}"
            )));
        }
        let dist = *model.distribution();
        Ok(Self {
            continuation: 10.0 * dist.mean(),
            dist,
            params,
            model,
        })
    }

    pub fn params(&self) -> CouplingParams {
        self.params
    }

    pub fn distribution(&self) -> &Distribution {
        &self.dist
    }

    /// Renewals of a zero-delayed process started at `origin` strictly inside
    /// `(origin, origin + s]`, and the residual `B_s`.
    fn residual<R: Rng + ?Sized>(&self, origin: f64, s: f64, rng: &mut R, events: &mut Vec<f64>) -> f64 {
        let mut x = 0.0;
        loop {
            x += self.dist.sample(rng);
            if x > s {
                return x - s;
            }
            events.push(origin + x);
        }
    }

    pub fn simulate<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<CouplingTrace> {
        let CouplingParams { b, d, delta } = self.params;
        let target = delta * delta / (b * b);
        let mut eta: f64 = 0.0;
        let mut eta_hat = self.dist.sample_stationary_delay(rng);
        let mut pure_events = vec![eta];
        let mut stationary_events = vec![eta_hat];
        let mut trace = CouplingTrace {
            eta: Vec::new(),
            beta: Vec::new(),
            indicators: Vec::new(),
            l: Vec::new(),
            sigma: 0,
            coupling_time: f64::NAN,
            final_uniform: f64::NAN,
            accepted_pair: (f64::NAN, f64::NAN),
            pure_events: Vec::new(),
            stationary_events: Vec::new(),
            common_events: Vec::new(),
            capped: false,
        };
        for k in 0..MAX_ITERATIONS {
            let l = eta.max(eta_hat) + d;
            let s = l - eta;
            let s_hat = l - eta_hat;
            let beta = self.residual(eta, s, rng, &mut pure_events);
            let beta_hat = self.residual(eta_hat, s_hat, rng, &mut stationary_events);
            let accept = if beta < b && beta_hat < b {
                let p = self.model.recurrence_density(s, beta);
                let p_hat = self.model.recurrence_density(s_hat, beta_hat);
                let a = target / (p * p_hat);
                if !(a <= 1.0 + 1e-9) {
                    return Err(Error::ThinningProbabilityExceedsOne {
                        probability: a,
                        beta,
                        beta_hat,
                    });
                }
                rng.sample::<f64, _>(Open01) < a
            } else {
                false
            };
            trace.eta.push((eta, eta_hat));
            trace.l.push(l);
            trace.indicators.push(u8::from(accept));
            if accept {
                // The pure side's accepted draw becomes the shared renewal, so the
                // pure path is untouched and the stationary side switches onto it.
                let u = beta;
                trace.sigma = k;
                trace.final_uniform = u;
                trace.accepted_pair = (beta, beta_hat);
                trace.beta.push((u, u));
                trace.coupling_time = l + u;
                pure_events.push(l + u);
                stationary_events.push(l + u);
                let mut x = l + u;
                let end = x + self.continuation;
                while x <= end {
                    x += self.dist.sample(rng);
                    trace.common_events.push(x);
                }
                trace.pure_events = pure_events;
                trace.stationary_events = stationary_events;
                return Ok(trace);
            }
            trace.beta.push((beta, beta_hat));
            eta = l + beta;
            eta_hat = l + beta_hat;
            pure_events.push(eta);
            stationary_events.push(eta_hat);
        }
        trace.capped = true;
        trace.sigma = MAX_ITERATIONS;
        trace.coupling_time = f64::INFINITY;
        trace.pure_events = pure_events;
        trace.stationary_events = stationary_events;
        Ok(trace)
    }

    /// `n` traces, trace `i` on stream `i` of `seed`.
    pub fn simulate_many(&self, n: usize, seed: u64) -> Result<Vec<CouplingTrace>> {
        (0..n)
            .into_par_iter()
            .map(|i| self.simulate(&mut rng::stream(seed, i as u64)))
            .collect()
    }
}

/// One coupling trace; builds the renewal model on the default grid.
pub fn simulate_coupling<R: Rng + ?Sized>(
    d: &Distribution,
    params: CouplingParams,
    rng: &mut R,
) -> Result<CouplingTrace> {
    Coupler::new(d, params)?.simulate(rng)
}

/// Empirical `P(𝒯 > t)` with a binomial 95% interval.
pub fn coupling_tail(traces: &[CouplingTrace], t: f64) -> Result<Proportion> {
    if traces.len() < 1000 {
        return Err(Error::InvalidArgument(format!(
            "coupling_tail needs at least 1000 traces, got {}",
            traces.len()
        )));
    }
    let k = traces.iter().filter(|tr| tr.coupling_time > t).count();
    Ok(proportion(k, traces.len()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentEstimate {
    pub q: f64,
    pub mean: f64,
    pub se: f64,
    pub n: usize,
}

/// Empirical `E[𝒯^q]` with its standard error.
pub fn coupling_moment(traces: &[CouplingTrace], q: f64) -> Result<MomentEstimate> {
    if !(q > 0.0) || traces.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "coupling_moment needs q > 0 and two traces, got q = {q}, n = {}",
            traces.len()
        )));
    }
    let v: Vec<f64> = traces.iter().map(|t| t.coupling_time.powf(q)).collect();
    let (mean, sd) = crate::stats::mean_sd(&v);
    Ok(MomentEstimate {
        q,
        mean,
        se: sd / (v.len() as f64).sqrt(),
        n: v.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use crate::stats::{binomial_sd, ks_critical, ks_statistic};

    #[test]
    fn sampler_inverts_linear_density() {
        // Density 2x on [0,1]: CDF x², quantile √u.
        let g = Grid::new(0.5, 2).unwrap();
        let s = GridSampler::new(g.step(), 0.0, vec![0.0, 1.0, 2.0]);
        for u in [0.01, 0.2, 0.5, 0.9] {
            assert!((s.quantile(u) - u.sqrt()).abs() < 1e-12);
        }
        let a = GridSampler::new(0.5, 0.5, vec![1.0, 1.0, 0.0]);
        assert_eq!(a.quantile(0.3), 0.0);
    }

    #[test]
    fn identical_laws_always_couple() {
        let g = Grid::new(0.01, 2000).unwrap();
        let p = GridMeasure::from_density(g, |x| (-x).exp()).unwrap();
        let p = p.scaled(1.0 / p.mass());
        let mc = MaximalCoupling::new(&p, &p).unwrap();
        let mut r = stream(1, 0);
        assert!((0..1000).all(|_| mc.sample(&mut r).coupled));
    }

    #[test]
    fn disjoint_laws_never_couple() {
        let g = Grid::new(0.01, 400).unwrap();
        let p = GridMeasure::from_density(g, |x| if (0.5..=1.5).contains(&x) { 1.0 } else { 0.0 }).unwrap();
        let q = GridMeasure::from_density(g, |x| if (2.5..=3.5).contains(&x) { 1.0 } else { 0.0 }).unwrap();
        let (p, q) = (p.scaled(1.0 / p.mass()), q.scaled(1.0 / q.mass()));
        let mc = MaximalCoupling::new(&p, &q).unwrap();
        let mut r = stream(2, 0);
        assert!((0..1000).all(|_| !mc.sample(&mut r).coupled));
    }

    #[test]
    fn maximal_coupling_marginals_and_rate() {
        let g = Grid::new(0.005, 4000).unwrap();
        let p = GridMeasure::from_density(g, |x| (-x).exp()).unwrap();
        let q = GridMeasure::from_density(g, |x| 2.0 * (-2.0 * x).exp()).unwrap();
        let (p, q) = (p.scaled(1.0 / p.mass()), q.scaled(1.0 / q.mass()));
        let mc = MaximalCoupling::new(&p, &q).unwrap();
        let n = 20_000;
        let mut r = stream(3, 0);
        let draws: Vec<CoupledPair> = (0..n).map(|_| mc.sample(&mut r)).collect();
        let miss = draws.iter().filter(|d| !d.coupled).count() as f64 / n as f64;
        let half_tv = 0.5 * p.tv_distance(&q).unwrap();
        assert!((miss - half_tv).abs() <= 3.0 * binomial_sd(half_tv, n));
        let xs: Vec<f64> = draws.iter().map(|d| d.x).collect();
        let ys: Vec<f64> = draws.iter().map(|d| d.y).collect();
        assert!(ks_statistic(&xs, |x| 1.0 - (-x).exp()) < ks_critical(n));
        assert!(ks_statistic(&ys, |x| 1.0 - (-2.0 * x).exp()) < ks_critical(n));
    }

    #[test]
    fn unnormalized_rejected() {
        let g = Grid::new(0.01, 100).unwrap();
        let p = GridMeasure::from_density(g, |_| 2.0).unwrap();
        assert!(matches!(MaximalCoupling::new(&p, &p), Err(Error::NotNormalized { .. })));
    }

    #[test]
    fn exponential_common_component() {
        let d = Distribution::exponential(1.0).unwrap();
        let c = find_common_component(&d, default_grid(&d)).unwrap();
        assert!((c.params.b - 1.0).abs() < 1e-12);
        assert!((c.params.delta - 0.95 * (-1.0f64).exp()).abs() < 1e-4, "{c:?}");
        assert!(c.verified && c.stabilized);
    }

    #[test]
    fn uniform_common_component() {
        let d = Distribution::uniform(0.0, 2.0).unwrap();
        let c = find_common_component(&d, default_grid(&d)).unwrap();
        assert!(c.params.b <= 1.0 + 1e-12 && c.params.delta >= 0.01);
        assert!(c.verified, "{c:?}");
    }

    #[test]
    fn coupling_trace_invariants() {
        let d = Distribution::gamma(2.0, 1.0).unwrap();
        let c = find_common_component(&d, default_grid(&d)).unwrap();
        let coupler = Coupler::new(&d, c.params).unwrap();
        let p = c.params;
        for i in 0..200 {
            let tr = coupler.simulate(&mut stream(4, i)).unwrap();
            assert!(!tr.capped);
            assert_eq!(tr.eta[0].0, 0.0);
            assert!(tr.l.windows(2).all(|w| w[1] > w[0]));
            assert_eq!(tr.indicators[tr.sigma], 1);
            assert!(tr.indicators[..tr.sigma].iter().all(|i| *i == 0));
            assert!(tr.final_uniform > 0.0 && tr.final_uniform < p.b);
            assert_eq!(tr.beta[tr.sigma], (tr.final_uniform, tr.final_uniform));
            assert_eq!(tr.coupling_time, tr.l[tr.sigma] + tr.final_uniform);
            assert!((tr.t_n(tr.sigma, p.d) - tr.coupling_time).abs() < 1e-9 * tr.coupling_time);
            let (a, b) = (tr.pure_sequence(), tr.stationary_sequence());
            let after = |v: &[f64]| v.iter().copied().filter(|x| *x >= tr.coupling_time).collect::<Vec<_>>();
            assert_eq!(after(&a), after(&b));
            assert!(a.windows(2).all(|w| w[1] > w[0]) && b.windows(2).all(|w| w[1] > w[0]));
        }
    }

    #[test]
    fn pure_side_residuals_follow_renewal_law() {
        // β₁ is B_s of the pure process at s = L₀; the pure draw is never replaced,
        // so its probability integral transform under the exact law is uniform.
        let d = Distribution::uniform(0.0, 2.0).unwrap();
        let c = find_common_component(&d, default_grid(&d)).unwrap();
        let coupler = Coupler::new(&d, c.params).unwrap();
        let n = 1500;
        let traces = coupler.simulate_many(n, 5).unwrap();
        let model = RenewalModel::new(&d, default_grid(&d)).unwrap();
        let xg = Grid::new(0.005, 500).unwrap();
        let u: Vec<f64> = traces
            .iter()
            .map(|t| {
                let law = model.forward_recurrence_cdf(t.l[0], xg).unwrap();
                law.cdf.interpolate(t.beta[0].0)
            })
            .collect();
        assert!(ks_statistic(&u, |x| x.clamp(0.0, 1.0)) < ks_critical(n));
    }

    #[test]
    fn tail_and_moment_helpers() {
        let d = Distribution::exponential(1.0).unwrap();
        let c = find_common_component(&d, default_grid(&d)).unwrap();
        let traces = Coupler::new(&d, c.params).unwrap().simulate_many(1000, 6).unwrap();
        assert_eq!(coupling_tail(&traces, 0.0).unwrap().estimate, 1.0);
        assert!(coupling_tail(&traces[..10], 0.0).is_err());
        let small = coupling_moment(&traces, 1e-9).unwrap();
        assert!((small.mean - 1.0).abs() < 1e-6);
        let mut prev = 1.0;
        for t in [1.0, 2.0, 5.0, 10.0, 20.0] {
            let p = coupling_tail(&traces, t).unwrap().estimate;
            assert!(p <= prev);
            prev = p;
        }
    }
}
