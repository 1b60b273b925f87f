//! Renewal path simulation, recurrence times, the hazard compensator `Λ`, the
//! cycle hazards `ξ_i`, and the scaled-supremum and cycle-maximum statistics.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distribution::Distribution;
use crate::error::{Error, Result};
use crate::rng;
use crate::stats::Ecdf;

/// How the first epoch `Ŝ₀ = τ₀` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum DelayMode {
    /// `τ₀ = 0`: the pure process with an epoch at the origin.
    Zero,
    /// `τ₀ ~ Π`.
    Stationary,
    /// `τ₀ = t0`.
    Fixed(f64),
}

/// One realization: epochs `Ŝ₀ < Ŝ₁ < …`, the first of which is the delay,
/// simulated until the first epoch beyond the horizon.
///
/// `N(t) = #{n ≥ 0 : Ŝ_n ≤ t}` counts `Ŝ₀`, so for a zero-delayed path `N(0) = 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RenewalPath {
    pub delay: f64,
    pub events: Vec<f64>,
    pub horizon: f64,
}

impl RenewalPath {
    pub fn new(events: Vec<f64>, horizon: f64) -> Result<Self> {
        if events.is_empty() || events[0] < 0.0 {
            return Err(Error::InvalidArgument(
                "a path needs a first epoch at or after 0".into(),
            ));
        }
        if events.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("epochs must be strictly increasing".into()));
        }
        if *events.last().expect("nonempty") <= horizon {
            return Err(Error::InvalidArgument(format!(
                "last epoch must exceed the horizon {horizon}"
            )));
        }
        Ok(Self {
            delay: events[0],
            events,
            horizon,
        })
    }

    pub fn is_zero_delayed(&self) -> bool {
        self.delay == 0.0
    }

    /// `N(t)`.
    pub fn count(&self, t: f64) -> usize {
        self.events.partition_point(|s| *s <= t)
    }

    /// Interarrival `τ_k = Ŝ_k − Ŝ_{k−1}` for `k ≥ 1`.
    pub fn interarrival(&self, k: usize) -> f64 {
        self.events[k] - self.events[k - 1]
    }

    /// `(A_t, B_t) = (t − Ŝ_{N(t)−1}, Ŝ_{N(t)} − t)`. Before the first epoch the
    /// age is measured from the origin.
    pub fn recurrence_times(&self, t: f64) -> (f64, f64) {
        let n = self.count(t);
        let a = if n == 0 { t } else { t - self.events[n - 1] };
        (a, self.events[n] - t)
    }

    fn require_zero_delay(&self) -> Result<()> {
        if self.is_zero_delayed() {
            Ok(())
        } else {
            Err(Error::NotZeroDelayed { delay: self.delay })
        }
    }
}

/// Simulates epochs until the first one beyond `horizon`.
pub fn simulate_path<R: Rng + ?Sized>(
    d: &Distribution,
    horizon: f64,
    mode: DelayMode,
    rng: &mut R,
) -> Result<RenewalPath> {
    if !(horizon > 0.0) {
        return Err(Error::InvalidArgument(format!("horizon must be > 0, got {horizon}")));
    }
    let delay = match mode {
        DelayMode::Zero => 0.0,
        DelayMode::Stationary => d.sample_stationary_delay(rng),
        DelayMode::Fixed(t0) if t0 >= 0.0 => t0,
        DelayMode::Fixed(t0) => return Err(Error::InvalidArgument(format!("fixed delay must be >= 0, got {t0}"))),
    };
    let mut events = Vec::with_capacity((horizon / d.mean() * 1.2) as usize + 4);
    let mut s = delay;
    events.push(s);
    while s <= horizon {
        s += d.sample(rng);
        events.push(s);
    }
    Ok(RenewalPath { delay, events, horizon })
}

/// `Λ(t) = Σ_{completed cycles} ξ_i + ∫₀^{A_t} μ` on a zero-delayed path.
pub fn compensator_at(path: &RenewalPath, d: &Distribution, t: f64) -> Result<f64> {
    path.require_zero_delay()?;
    if t <= 0.0 {
        return Ok(0.0);
    }
    let n = path.count(t);
    let mut total = 0.0;
    for k in 1..n {
        total += d.cumulative_hazard(path.interarrival(k))?;
    }
    Ok(total + d.cumulative_hazard(t - path.events[n - 1])?)
}

/// `ξ_i = −log(1 − F(τ_i))` for cycles completed within the horizon.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CycleHazards {
    pub xi: Vec<f64>,
}

pub fn cycle_hazards(path: &RenewalPath, d: &Distribution) -> Result<CycleHazards> {
    path.require_zero_delay()?;
    let n = path.count(path.horizon);
    let xi = (1..n)
        .map(|k| d.cumulative_hazard(path.interarrival(k)))
        .collect::<Result<Vec<_>>>()?;
    Ok(CycleHazards { xi })
}

/// Cycle hazards of every cycle that starts within the horizon, including the
/// one straddling it.
///
/// The number of cycles is a stopping time, so hazards pooled over many paths
/// follow `Exp(1)`. Restricting to completed cycles, as [`cycle_hazards`] does,
/// favours short cycles and biases the pooled law.
pub fn cycle_hazards_pooled(path: &RenewalPath, d: &Distribution) -> Result<CycleHazards> {
    path.require_zero_delay()?;
    let xi = (1..path.events.len())
        .map(|k| d.cumulative_hazard(path.interarrival(k)))
        .collect::<Result<Vec<_>>>()?;
    Ok(CycleHazards { xi })
}

/// A scaled supremum together with the pathwise bound it must respect.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaledSup {
    pub value: f64,
    pub bound: f64,
}

/// `sup_{v∈[0,1]} T^{−p}[Λ(Tv) − Λ(Ŝ_{N(Tv)−1})]` and its bound `T^{−p} max_{k≤N(T)} ξ_k`.
///
/// The running-cycle hazard increases within a cycle, so the supremum is the
/// largest of the cycle hazards approached from the left, with the cycle that
/// straddles `T` cut at `T`.
pub fn scaled_compensator_sup(path: &RenewalPath, d: &Distribution, t: f64, p: f64) -> Result<ScaledSup> {
    path.require_zero_delay()?;
    check_scaling(t, p)?;
    let n = path.count(t);
    let (mut value, mut bound) = (0.0f64, 0.0f64);
    for k in 1..=n {
        let start = path.events[k - 1];
        let tau = path.interarrival(k);
        value = value.max(d.cumulative_hazard(tau.min(t - start))?);
        bound = bound.max(d.cumulative_hazard(tau)?);
    }
    let scale = t.powf(p);
    Ok(ScaledSup {
        value: value / scale,
        bound: bound / scale,
    })
}

/// Suprema of `T^{−1/p}(A_{Tv}, B_{Tv})` over `v ∈ [0,1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RecurrenceSup {
    pub sup_a: f64,
    pub sup_b: f64,
    /// `T^{−1/p}` times the largest interarrival among cycles touching `[0,T]`,
    /// or the delay if larger.
    pub bound: f64,
}

/// Exact suprema from the cycle structure: the age peaks just before each epoch
/// (or at `T` in the last cycle), the residual peaks at each epoch (and at `v = 0`).
pub fn scaled_recurrence_sup(path: &RenewalPath, t: f64, p: f64) -> Result<RecurrenceSup> {
    check_scaling(t, p)?;
    let n = path.count(t);
    let first = path.events[0];
    let mut sup_a = first.min(t);
    let mut sup_b = first;
    let mut bound = first;
    for k in 1..=n {
        let start = path.events[k - 1];
        let tau = path.interarrival(k);
        sup_a = sup_a.max(tau.min(t - start));
        sup_b = sup_b.max(tau);
        bound = bound.max(tau);
    }
    let scale = t.powf(1.0 / p);
    Ok(RecurrenceSup {
        sup_a: sup_a / scale,
        sup_b: sup_b / scale,
        bound: bound / scale,
    })
}

fn check_scaling(t: f64, p: f64) -> Result<()> {
    if !(t > 0.0 && p > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "scaling needs T > 0 and p > 0, got T = {t}, p = {p}"
        )));
    }
    Ok(())
}

/// Per-cycle quantity whose running maximum is compared with `G^{mT}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MaxStatistic {
    /// Cycle hazards `ξ_k`, with `G(x) = 1 − e^{−x}`.
    MaxXi,
    /// Interarrivals `τ_k`, with `G = F`.
    MaxTau,
}

/// `max_{k≤N(T)}` of the chosen cycle statistic on a zero-delayed path.
pub fn cycle_maximum(path: &RenewalPath, d: &Distribution, t: f64, stat: MaxStatistic) -> Result<f64> {
    path.require_zero_delay()?;
    let n = path.count(t);
    let mut best = 0.0f64;
    for k in 1..=n {
        let tau = path.interarrival(k);
        let v = match stat {
            MaxStatistic::MaxXi => d.cumulative_hazard(tau)?,
            MaxStatistic::MaxTau => tau,
        };
        best = best.max(v);
    }
    Ok(best)
}

/// `ln G(x)^{mT}` for the statistic's cycle law.
fn log_g_power(d: &Distribution, t: f64, stat: MaxStatistic, x: f64) -> f64 {
    let tail = match stat {
        MaxStatistic::MaxXi => (-x).exp(),
        MaxStatistic::MaxTau => d.survival(x),
    };
    d.rate() * t * (-tail).ln_1p()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootzenReport {
    pub t: f64,
    pub n_paths: usize,
    pub statistic: MaxStatistic,
    /// `sup_x |F̂_T(x) − G(x)^{mT}|`.
    pub error: f64,
    pub maxima: Vec<f64>,
}

/// Uniform distance between the empirical law of the cycle maximum over `[0,T]`
/// and `G(x)^{mT}`, on the pooled sample points and a 1000-point quantile lattice of `G^{mT}`.
pub fn rootzen_uniform_error(
    d: &Distribution,
    t: f64,
    n_paths: usize,
    stat: MaxStatistic,
    seed: u64,
) -> Result<RootzenReport> {
    if stat == MaxStatistic::MaxTau && d.support_end().is_some() {
        return Err(Error::FiniteSupport(d.to_string()));
    }
    if n_paths == 0 {
        return Err(Error::InvalidArgument("n_paths must be positive".into()));
    }
    let maxima = (0..n_paths)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::stream(seed, i as u64);
            let path = simulate_path(d, t, DelayMode::Zero, &mut r)?;
            cycle_maximum(&path, d, t, stat)
        })
        .collect::<Result<Vec<_>>>()?;
    let ecdf = Ecdf::new(&maxima);
    let approx = |x: f64| log_g_power(d, t, stat, x).exp();
    let mut error = 0.0f64;
    for &x in ecdf.sorted() {
        let g = approx(x);
        error = error.max((ecdf.at(x) - g).abs()).max((ecdf.left_limit(x) - g).abs());
    }
    let power = d.rate() * t;
    for j in 1..=1000 {
        // G(x)^{mT} = u  ⇔  G(x) = u^{1/(mT)}.
        let g = (j as f64 / 1001.0).powf(1.0 / power);
        let x = match stat {
            MaxStatistic::MaxXi => -(-g).ln_1p(),
            MaxStatistic::MaxTau => d.quantile(g),
        };
        let u = approx(x);
        error = error.max((ecdf.at(x) - u).abs()).max((ecdf.left_limit(x) - u).abs());
    }
    Ok(RootzenReport {
        t,
        n_paths,
        statistic: stat,
        error,
        maxima,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use crate::stats::{ks_critical, ks_statistic, mean_sd};

    fn kinds() -> Vec<Distribution> {
        vec![
            Distribution::exponential(1.0).unwrap(),
            Distribution::gamma(2.0, 1.0).unwrap(),
            Distribution::uniform(0.0, 2.0).unwrap(),
            Distribution::shifted_pareto(3.5, 2.5).unwrap(),
        ]
    }

    #[test]
    fn recurrence_times_by_hand() {
        let p = RenewalPath::new(vec![0.0, 2.0, 5.0], 4.0).unwrap();
        assert_eq!(p.recurrence_times(3.0), (1.0, 2.0));
        assert_eq!(p.recurrence_times(2.0), (0.0, 3.0));
        assert_eq!(p.count(0.0), 1);
        assert_eq!(p.count(2.0), 2);
        assert!(RenewalPath::new(vec![0.0, 1.0, 1.0, 5.0], 4.0).is_err());
        assert!(RenewalPath::new(vec![0.0, 1.0], 4.0).is_err());
    }

    #[test]
    fn path_invariants() {
        let d = Distribution::gamma(2.0, 1.0).unwrap();
        let mut r = stream(1, 0);
        let p = simulate_path(&d, 50.0, DelayMode::Zero, &mut r).unwrap();
        assert_eq!(p.events[0], 0.0);
        assert!(p.events[1] > 0.0);
        assert!(p.events.windows(2).all(|w| w[1] > w[0]));
        assert!(*p.events.last().unwrap() > 50.0);
        assert!(p.events[p.events.len() - 2] <= 50.0);
        let q = simulate_path(&d, 50.0, DelayMode::Fixed(3.0), &mut r).unwrap();
        assert_eq!(q.delay, 3.0);
        assert!(matches!(compensator_at(&q, &d, 5.0), Err(Error::NotZeroDelayed { .. })));
    }

    #[test]
    fn poisson_mean_count() {
        let d = Distribution::exponential(2.0).unwrap();
        let n = 10_000;
        let counts: Vec<f64> = (0..n)
            .map(|i| {
                let p = simulate_path(&d, 5.0, DelayMode::Zero, &mut stream(2, i)).unwrap();
                p.count(5.0) as f64
            })
            .collect();
        let (m, sd) = mean_sd(&counts);
        assert!((m - 11.0).abs() <= 3.0 * sd / (n as f64).sqrt(), "{m}");
    }

    #[test]
    fn stationary_increments_do_not_depend_on_time() {
        let d = Distribution::uniform(0.0, 2.0).unwrap();
        let n = 10_000;
        let paths: Vec<RenewalPath> = (0..n)
            .map(|i| simulate_path(&d, 12.0, DelayMode::Stationary, &mut stream(3, i)).unwrap())
            .collect();
        for &t in &[0.0, 1.0, 2.5, 7.0, 10.0] {
            let inc: Vec<f64> = paths.iter().map(|p| (p.count(t + 2.0) - p.count(t)) as f64).collect();
            let (m, sd) = mean_sd(&inc);
            // E[N(t+s) − N(t)] = m·s = 2.
            assert!((m - 2.0).abs() <= 3.0 * sd / (n as f64).sqrt(), "t={t}: {m}");
        }
    }

    #[test]
    fn exponential_compensator_is_linear() {
        let d = Distribution::exponential(1.5).unwrap();
        let p = simulate_path(&d, 20.0, DelayMode::Zero, &mut stream(4, 0)).unwrap();
        assert_eq!(compensator_at(&p, &d, 0.0).unwrap(), 0.0);
        for &t in &[0.3, 1.0, 7.7, 19.0] {
            assert!((compensator_at(&p, &d, t).unwrap() - 1.5 * t).abs() < 1e-12);
        }
        let xi = cycle_hazards(&p, &d).unwrap().xi;
        for (k, x) in xi.iter().enumerate() {
            assert!((x - 1.5 * p.interarrival(k + 1)).abs() < 1e-12);
        }
    }

    #[test]
    fn compensator_monotone_and_telescoping() {
        for d in kinds() {
            let p = simulate_path(&d, 30.0 * d.mean(), DelayMode::Zero, &mut stream(5, 0)).unwrap();
            let mut prev = 0.0;
            for j in 0..=3000 {
                let t = j as f64 * 0.01 * d.mean();
                let l = compensator_at(&p, &d, t).unwrap();
                assert!(l >= prev - 1e-12, "{d}");
                prev = l;
            }
            let xi = cycle_hazards(&p, &d).unwrap().xi;
            for k in 1..xi.len() {
                let jump =
                    compensator_at(&p, &d, p.events[k]).unwrap() - compensator_at(&p, &d, p.events[k - 1]).unwrap();
                assert!((jump - xi[k - 1]).abs() < 1e-10, "{d}");
            }
        }
    }

    #[test]
    fn cycle_hazards_are_standard_exponential() {
        for d in kinds() {
            let mut xi = Vec::new();
            let mut i = 0;
            while xi.len() < 10_000 {
                let p = simulate_path(&d, 50.0 * d.mean(), DelayMode::Zero, &mut stream(6, i)).unwrap();
                xi.extend(cycle_hazards(&p, &d).unwrap().xi);
                i += 1;
            }
            let ks = ks_statistic(&xi, |x| 1.0 - (-x).exp());
            assert!(ks < ks_critical(xi.len()), "{d}: {ks}");
            let (m, sd) = mean_sd(&xi);
            assert!((m - 1.0).abs() <= 3.0 * sd / (xi.len() as f64).sqrt(), "{d}: {m}");
        }
    }

    #[test]
    fn suprema_match_dense_evaluation() {
        let d = Distribution::gamma(2.0, 1.0).unwrap();
        let t = 40.0;
        for i in 0..100 {
            let p = simulate_path(&d, t, DelayMode::Zero, &mut stream(7, i)).unwrap();
            let c = scaled_compensator_sup(&p, &d, t, 0.5).unwrap();
            let r = scaled_recurrence_sup(&p, t, 2.0).unwrap();
            assert!(c.value <= c.bound && r.sup_a <= r.bound && r.sup_b <= r.bound);
            let (mut dc, mut da, mut db) = (0.0f64, 0.0f64, 0.0f64);
            for j in 0..=20_000 {
                let s = t * j as f64 / 20_000.0;
                let n = p.count(s);
                let run = compensator_at(&p, &d, s).unwrap() - compensator_at(&p, &d, p.events[n - 1]).unwrap();
                dc = dc.max(run);
                let (a, b) = p.recurrence_times(s);
                da = da.max(a);
                db = db.max(b);
            }
            // Dense evaluation never exceeds the exact supremum and comes within one step of it.
            assert!(dc / t.sqrt() <= c.value + 1e-12);
            assert!(c.value - dc / t.sqrt() < 0.02);
            assert!(da / t.sqrt() <= r.sup_a + 1e-12 && r.sup_a - da / t.sqrt() < 0.002 / t.sqrt() * 2.0);
            assert!(db / t.sqrt() <= r.sup_b + 1e-12 && r.sup_b - db / t.sqrt() < 0.002 / t.sqrt() * 2.0);
        }
    }

    #[test]
    fn rootzen_lattice_limit() {
        // G(εT)^{mT} at ε = 0.5, T = 100, m = 1.
        let d = Distribution::exponential(1.0).unwrap();
        let v = log_g_power(&d, 100.0, MaxStatistic::MaxXi, 0.5 * 100.0).exp();
        assert!((v - 1.0).abs() < 1e-6);
    }

    #[test]
    fn rootzen_finite_support_rejected() {
        let d = Distribution::uniform(0.0, 2.0).unwrap();
        assert!(matches!(
            rootzen_uniform_error(&d, 20.0, 10, MaxStatistic::MaxTau, 1),
            Err(Error::FiniteSupport(_))
        ));
        assert!(rootzen_uniform_error(&d, 20.0, 10, MaxStatistic::MaxXi, 1).is_ok());
    }

    #[test]
    fn rootzen_error_is_small_and_reproducible() {
        let d = Distribution::exponential(1.0).unwrap();
        let a = rootzen_uniform_error(&d, 50.0, 2000, MaxStatistic::MaxTau, 9).unwrap();
        let b = rootzen_uniform_error(&d, 50.0, 2000, MaxStatistic::MaxTau, 9).unwrap();
        assert_eq!(a, b);
        assert!(a.error < 0.1, "{}", a.error);
    }
}
