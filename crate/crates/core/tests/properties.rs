use proptest::prelude::*;
use rand::Rng as _;
use renewal_lab::asymptotics::{fit_slope, DecayCurve};
use renewal_lab::compensator::{compensator_at, cycle_hazards, simulate_path, DelayMode};
use renewal_lab::config::{ExperimentConfig, GridConfig};
use renewal_lab::grid::convolve_measures;
use renewal_lab::rng::stream;
use renewal_lab::{Distribution, Grid, GridMeasure};

fn distribution() -> impl Strategy<Value = Distribution> {
    prop_oneof![
        (0.2f64..5.0).prop_map(|r| Distribution::exponential(r).unwrap()),
        (1.0f64..6.0, 0.2f64..5.0).prop_map(|(k, r)| Distribution::gamma(k, r).unwrap()),
        (0.0f64..2.0, 0.1f64..3.0).prop_map(|(lo, w)| Distribution::uniform(lo, lo + w).unwrap()),
        (1.2f64..6.0, 0.2f64..5.0).prop_map(|(r, c)| Distribution::shifted_pareto(r, c).unwrap()),
    ]
}

const N: usize = 40;

fn measure(support: usize) -> impl Strategy<Value = GridMeasure> {
    (0.0f64..1.0, prop::collection::vec(0.0f64..2.0, support)).prop_map(|(atom, mut dens)| {
        dens.resize(N + 1, 0.0);
        GridMeasure::new(Grid::new(0.05, N).unwrap(), atom, dens).unwrap()
    })
}

fn probability(support: usize) -> impl Strategy<Value = GridMeasure> {
    measure(support).prop_filter_map("zero mass", |m| {
        let mass = m.mass();
        (mass > 1e-6).then(|| m.scaled(1.0 / mass))
    })
}

fn sup_diff(a: &GridMeasure, b: &GridMeasure) -> f64 {
    let d = a
        .density()
        .iter()
        .zip(b.density())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    d.max((a.atom0() - b.atom0()).abs())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn convolution_is_associative(a in measure(N + 1), b in measure(N + 1), c in measure(N + 1)) {
        let ab_c = convolve_measures(&convolve_measures(&a, &b).unwrap().measure, &c).unwrap().measure;
        let a_bc = convolve_measures(&a, &convolve_measures(&b, &c).unwrap().measure).unwrap().measure;
        prop_assert!(sup_diff(&ab_c, &a_bc) <= 1e-8);
    }

    #[test]
    fn dirac_is_the_identity(a in measure(N + 1)) {
        let delta = GridMeasure::dirac(a.grid(), 1.0);
        let c = convolve_measures(&delta, &a).unwrap().measure;
        prop_assert_eq!(c.atom0(), a.atom0());
        prop_assert_eq!(c.density(), a.density());
    }

    #[test]
    fn mass_is_multiplicative_within_horizon(a in measure(N / 2), b in measure(N / 2)) {
        let c = convolve_measures(&a, &b).unwrap();
        prop_assert!((c.in_horizon_mass - a.mass() * b.mass()).abs() <= 1e-10);
        prop_assert!(c.truncated_mass.abs() <= 1e-10);
    }

    #[test]
    fn tv_is_a_metric(p in probability(N + 1), q in probability(N + 1), r in probability(N + 1)) {
        let pq = p.tv_distance(&q).unwrap();
        prop_assert_eq!(pq, q.tv_distance(&p).unwrap());
        prop_assert!(p.tv_distance(&p).unwrap().abs() <= 1e-12);
        prop_assert!((0.0..=2.0 + 1e-10).contains(&pq));
        prop_assert!(pq <= p.tv_distance(&r).unwrap() + r.tv_distance(&q).unwrap() + 1e-10);
    }

    #[test]
    fn hazard_identities(d in distribution(), u in 0.001f64..0.99) {
        let x = d.quantile(u);
        let s = d.survival(x);
        let f = d.density(x);
        let haz = d.hazard(x).unwrap();
        prop_assert!((haz * s - f).abs() <= 1e-12 * f.max(1.0), "h S = {} vs f = {}", haz * s, f);
        let lam = d.cumulative_hazard(x).unwrap();
        prop_assert!(((-lam).exp() - s).abs() <= 1e-12);
        prop_assert!((d.cdf(x) - u).abs() <= 1e-9);
    }

    #[test]
    fn cumulative_hazard_is_nondecreasing(d in distribution(), u in 0.0f64..0.98, du in 0.0f64..0.01) {
        let a = d.cumulative_hazard(d.quantile(u)).unwrap();
        let b = d.cumulative_hazard(d.quantile(u + du)).unwrap();
        prop_assert!(b >= a);
    }

    #[test]
    fn moments_dominate_powers_of_the_mean(d in distribution(), s in 1.0f64..4.0) {
        let m = d.moment(s);
        prop_assert!(m.value >= d.mean().powf(s) * (1.0 - 1e-9));
        if let renewal_lab::DistributionSpec::ShiftedPareto { tail, .. } = d.spec() {
            prop_assert_eq!(m.is_infinite(), s >= tail);
        }
    }

    #[test]
    fn streams_are_reproducible(seed in any::<u64>(), idx in 0u64..1000) {
        let draws = |mut r: renewal_lab::rng::Rng| -> Vec<u64> { (0..4).map(|_| r.random()).collect() };
        prop_assert_eq!(draws(stream(seed, idx)), draws(stream(seed, idx)));
        prop_assert_ne!(draws(stream(seed, idx)), draws(stream(seed, idx + 1)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn compensator_telescopes_over_cycles(d in distribution(), seed in any::<u64>()) {
        let horizon = 30.0 * d.mean();
        let path = simulate_path(&d, horizon, DelayMode::Zero, &mut stream(seed, 0)).unwrap();
        prop_assert!(path.events.windows(2).all(|w| w[1] > w[0]));
        prop_assert!(*path.events.last().unwrap() >= horizon);
        let xi = cycle_hazards(&path, &d).unwrap().xi;
        prop_assert!(xi.iter().all(|x| *x > 0.0));
        // At a renewal the compensator is the sum of the completed cycle hazards.
        let mut acc = 0.0;
        for (k, w) in path.events.windows(2).enumerate() {
            if w[1] > horizon {
                break;
            }
            acc += xi[k];
            let lam = compensator_at(&path, &d, w[1]).unwrap();
            prop_assert!((lam - acc).abs() <= 1e-10 * acc.max(1.0));
        }
    }

    #[test]
    fn slope_fit_recovers_power_laws(c in 0.1f64..10.0, slope in -4.0f64..-0.5) {
        let pts: Vec<(f64, f64)> = (0..10).map(|i| {
            let x = 10.0 * 1.2f64.powi(i);
            (x, c * x.powf(slope))
        }).collect();
        let curve = DecayCurve::exact("power", pts).unwrap();
        let fit = fit_slope(&curve, (1.0, 1e3), 0.0).unwrap();
        prop_assert!((fit.slope - slope).abs() <= 1e-9);
        prop_assert!(fit.r2 > 1.0 - 1e-9);
    }

    #[test]
    fn config_round_trips(seed in any::<u64>(), d in distribution(), h in 0.001f64..0.1, n in 1usize..100_000, ts in prop::collection::vec(0.01f64..1e4, 1..6)) {
        let mut cfg = ExperimentConfig::new(Some(d.spec()), seed);
        cfg.grid = Some(GridConfig { h, horizon: 1000.0 * h });
        cfg.n_paths = Some(n);
        cfg.ts = Some(ts);
        prop_assert_eq!(ExperimentConfig::from_json(&cfg.to_json()).unwrap(), cfg);
    }
}

#[test]
fn random_paths_match_the_mean_count() {
    let d = Distribution::exponential(2.0).unwrap();
    let mut rng = stream(5, 0);
    let n = 2000;
    let total: usize = (0..n)
        .map(|_| simulate_path(&d, 10.0, DelayMode::Zero, &mut rng).unwrap().count(10.0))
        .sum();
    let mean = total as f64 / n as f64;
    // N(t) counts the renewal at zero, so E N(10) = 1 + 20.
    assert!((mean - 21.0).abs() < 4.0 * (20.0f64 / n as f64).sqrt(), "{mean}");
}
