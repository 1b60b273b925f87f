//! The twelve acceptance criteria, each a named conjunction of experiment checks.

use std::sync::OnceLock;
use std::time::Instant;

use crate::asymptotics::RateStudy;
use crate::compensator::MaxStatistic;
use crate::distribution::Distribution;
use crate::error::Result;
use crate::experiments::{self as ex, SupKind, TvRate};
use crate::grid::Grid;
use crate::renewal::default_grid;
use crate::report::{Check, Outcome};
use crate::rng::derive;

pub const CRITERIA: [&str; 12] = [
    "renewal-function-closed-form",
    "linear-forcing-round-trip",
    "recurrence-law-vs-simulation",
    "stone-decomposition",
    "maximal-coupling-rate",
    "coupling-construction",
    "coupling-moment-stability",
    "key-renewal-rates",
    "recurrence-tv-rates",
    "compensator-martingale",
    "scaled-suprema",
    "cycle-maximum-approximation",
];

/// One evaluated criterion.
#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub id: usize,
    pub check: Check,
    pub wall_time_s: f64,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        let status = if self.check.passed { "PASS" } else { "FAIL" };
        format!(
            "{status} {:>2} {} ({:.1} s)",
            self.id, self.check.name, self.wall_time_s
        )
    }
}

/// The four interarrival laws, all with unit mean.
pub fn four_kinds() -> [Distribution; 4] {
    [
        Distribution::exponential(1.0).expect("valid"),
        Distribution::gamma(2.0, 2.0).expect("valid"),
        Distribution::uniform(0.0, 2.0).expect("valid"),
        Distribution::shifted_pareto(3.5, 2.5).expect("valid"),
    ]
}

pub fn gamma21() -> Distribution {
    Distribution::gamma(2.0, 1.0).expect("valid")
}

pub fn pareto() -> Distribution {
    Distribution::shifted_pareto(3.5, 2.5).expect("valid")
}

fn scaled(d: &Distribution, multiples: &[f64]) -> Vec<f64> {
    multiples.iter().map(|k| k * d.mean()).collect()
}

/// Rate studies shared by the key renewal and TV criteria.
#[derive(Default)]
pub struct Studies {
    exponential: OnceLock<Result<RateStudy>>,
    gamma: OnceLock<Result<RateStudy>>,
    pareto: OnceLock<Result<RateStudy>>,
}

impl Studies {
    fn get(cell: &OnceLock<Result<RateStudy>>, d: Distribution) -> Result<&RateStudy> {
        cell.get_or_init(|| RateStudy::for_distribution(&d))
            .as_ref()
            .map_err(|e| crate::Error::InvalidArgument(format!("rate study for {d}: {e}")))
    }
    pub fn exponential(&self) -> Result<&RateStudy> {
        Self::get(&self.exponential, Distribution::exponential(1.0)?)
    }
    pub fn gamma(&self) -> Result<&RateStudy> {
        Self::get(&self.gamma, gamma21())
    }
    pub fn pareto(&self) -> Result<&RateStudy> {
        Self::get(&self.pareto, pareto())
    }
}

/// Conjunction of the outcome's checks, or a failing check naming the error.
fn settle(name: &str, outcome: Result<Outcome>) -> Check {
    match outcome {
        Ok(o) => Check::all(name, o.checks),
        Err(e) => Check::error(name, &e),
    }
}

fn collect(parts: impl IntoIterator<Item = Result<Outcome>>) -> Result<Outcome> {
    let mut out = Outcome::default();
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

fn timed(limit_s: f64, start: Instant, mut outcome: Outcome) -> Outcome {
    let elapsed = start.elapsed().as_secs_f64();
    outcome.checks.push(Check::at_most("runtime-s", elapsed, limit_s));
    outcome
}

fn outcome(id: usize, seed: u64, studies: &Studies) -> Result<Outcome> {
    let seed = derive(seed, &format!("criterion {id}"));
    match id {
        1 => {
            let start = Instant::now();
            let d = Distribution::exponential(1.0)?;
            let out = ex::phi_experiment(&d, Grid::new(0.005, 20_000)?)?;
            Ok(timed(30.0, start, out))
        }
        2 => collect(four_kinds().map(|d| {
            let mean = d.mean();
            ex::solve_experiment(&d, Grid::new(mean / 100.0, 5_000)?)
        })),
        3 => collect(four_kinds().map(|d| {
            let ts = scaled(&d, &[2.0, 10.0, 50.0]);
            ex::bt_experiment(&d, default_grid(&d), &ts, 100_000, derive(seed, &d.to_string()))
        })),
        4 => {
            let d = gamma21();
            ex::stone_experiment(&d, default_grid(&d))
        }
        5 => ex::maximal_coupling_experiment(100_000, seed),
        6 => {
            let d = gamma21();
            ex::couple_experiment(&d, 10_000, &scaled(&d, &[5.0, 10.0, 20.0]), &[], seed)
        }
        7 => {
            let (_, traces) = ex::coupling_traces(&pareto(), 40_000, seed)?;
            let (check, artifact) = ex::moment_stability_check(&traces, &[2.0])?;
            Ok(Outcome {
                checks: vec![check],
                artifacts: vec![artifact],
            })
        }
        8 => {
            let light = [studies.exponential()?, studies.gamma()?];
            let mut out = Outcome::default();
            for s in light {
                out.extend(ex::krt_experiment(
                    s,
                    &ex::rate_window(s.distribution()),
                    &[2.0, 4.0],
                    2.0,
                )?);
            }
            let p = studies.pareto()?;
            out.extend(ex::krt_experiment(p, &ex::rate_window(p.distribution()), &[4.0], 2.0)?);
            Ok(out)
        }
        9 => {
            let g = studies.gamma()?;
            let trend = TvRate::Trend {
                ts: ex::trend_times(g.distribution()),
                qs: vec![1.0, 2.0, 3.0],
            };
            collect([
                ex::tv_rate_experiment(g, &trend),
                ex::tv_rate_experiment(studies.pareto()?, &TvRate::Slope { q: 2.0 }),
            ])
        }
        10 => collect(four_kinds().map(|d| {
            let ts = scaled(&d, &[5.0, 20.0, 50.0]);
            ex::compensator_experiment(&d, &ts, 10_000, derive(seed, &d.to_string()))
        })),
        11 => {
            let horizons = [1e2, 1e3, 1e4];
            collect([
                ex::sweep_experiment(&gamma21(), SupKind::Compensator, &horizons, 1_000, 0.5, 0.1, seed),
                ex::sweep_experiment(&pareto(), SupKind::Recurrence, &horizons, 1_000, 3.0, 0.1, seed),
            ])
        }
        12 => {
            let start = Instant::now();
            let out = ex::rootzen_experiment(&gamma21(), &[20.0, 200.0], 5_000, MaxStatistic::MaxXi, seed)?;
            Ok(timed(120.0, start, out))
        }
        _ => Err(crate::Error::InvalidArgument(format!("no criterion {id}"))),
    }
}

/// Evaluates criterion `id` (1-based).
pub fn criterion_with(id: usize, seed: u64, studies: &Studies) -> CriterionResult {
    let start = Instant::now();
    let name = CRITERIA.get(id.wrapping_sub(1)).copied().unwrap_or("unknown");
    let check = settle(name, outcome(id, seed, studies));
    CriterionResult {
        id,
        check,
        wall_time_s: start.elapsed().as_secs_f64(),
    }
}

pub fn criterion(id: usize, seed: u64) -> CriterionResult {
    criterion_with(id, seed, &Studies::default())
}

/// All criteria in order, sharing the rate studies.
pub fn run_all(seed: u64) -> Vec<CriterionResult> {
    run_all_with(seed, |_| {})
}

/// As `run_all`, calling `progress` after each criterion.
pub fn run_all_with(seed: u64, mut progress: impl FnMut(&CriterionResult)) -> Vec<CriterionResult> {
    let studies = Studies::default();
    (1..=CRITERIA.len())
        .map(|id| {
            let r = criterion_with(id, seed, &studies);
            progress(&r);
            r
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kinds_have_unit_mean() {
        for d in four_kinds() {
            assert!((d.mean() - 1.0).abs() < 1e-12, "{d}");
        }
    }

    #[test]
    fn unknown_criterion_fails() {
        let r = criterion(13, 0);
        assert!(!r.check.passed);
        assert!(r.line().starts_with("FAIL 13"));
    }

    #[test]
    fn cheap_criteria_pass() {
        for id in [4, 5] {
            let r = criterion(id, 1);
            assert!(r.check.passed, "{}", r.check.render());
        }
    }
}
