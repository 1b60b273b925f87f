//! Subcommand dispatch: resolves a config against mean-scaled defaults and runs
//! the matching experiments.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::acceptance;
use crate::asymptotics::RateStudy;
use crate::compensator::MaxStatistic;
use crate::config::{required, ExperimentConfig, GridConfig};
use crate::distribution::Distribution;
use crate::error::{Error, Result};
use crate::experiments::{self as ex, SupKind, TvRate};
use crate::report::{Outcome, RunReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    Solve,
    Phi,
    Stone,
    Bt,
    Couple,
    Compensator,
    Krt,
    Rootzen,
    All,
}

impl Subcommand {
    pub const ALL: [Subcommand; 9] = [
        Subcommand::Solve,
        Subcommand::Phi,
        Subcommand::Stone,
        Subcommand::Bt,
        Subcommand::Couple,
        Subcommand::Compensator,
        Subcommand::Krt,
        Subcommand::Rootzen,
        Subcommand::All,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Solve => "solve",
            Subcommand::Phi => "phi",
            Subcommand::Stone => "stone",
            Subcommand::Bt => "bt",
            Subcommand::Couple => "couple",
            Subcommand::Compensator => "compensator",
            Subcommand::Krt => "krt",
            Subcommand::Rootzen => "rootzen",
            Subcommand::All => "all",
        }
    }
}

impl fmt::Display for Subcommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Subcommand {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown subcommand `{s}`")))
    }
}

fn scaled(d: &Distribution, multiples: &[f64]) -> Vec<f64> {
    multiples.iter().map(|k| k * d.mean()).collect()
}

fn grid_config(d: &Distribution, per_mean: f64, horizon_means: f64) -> GridConfig {
    let mean = d.mean();
    GridConfig {
        h: mean / per_mean,
        horizon: horizon_means * mean,
    }
}

/// Fills every field the subcommand reads, so that the echoed config alone
/// reproduces the run.
pub fn resolve(cmd: Subcommand, cfg: &ExperimentConfig) -> Result<ExperimentConfig> {
    let mut c = cfg.clone();
    if cmd == Subcommand::All {
        return Ok(c);
    }
    let d = cfg.distribution()?;
    let default_grid = grid_config(&d, 200.0, 100.0);
    match cmd {
        Subcommand::Solve => {
            c.grid.get_or_insert(grid_config(&d, 100.0, 50.0));
        }
        Subcommand::Phi | Subcommand::Stone => {
            c.grid.get_or_insert(default_grid);
        }
        Subcommand::Bt => {
            c.grid.get_or_insert(default_grid);
            c.ts.get_or_insert_with(|| scaled(&d, &[2.0, 10.0, 50.0]));
            c.n_paths.get_or_insert(100_000);
        }
        Subcommand::Couple => {
            c.n_traces.get_or_insert(10_000);
            c.ts.get_or_insert_with(|| scaled(&d, &[5.0, 10.0, 20.0]));
            c.q.get_or_insert_with(|| vec![2.0]);
        }
        Subcommand::Compensator => {
            c.ts.get_or_insert_with(|| scaled(&d, &[5.0, 20.0, 50.0]));
            c.n_paths.get_or_insert(10_000);
            c.horizons.get_or_insert_with(|| vec![1e2, 1e3, 1e4]);
            c.p.get_or_insert(0.5);
            let third_moment = !d.moment(3.0).is_infinite();
            c.p_recurrence.get_or_insert(if third_moment { 3.0 } else { 1.0 });
        }
        Subcommand::Krt => {
            c.grid.get_or_insert(grid_config(&d, 200.0, 80.0));
            c.xs.get_or_insert_with(|| ex::rate_window(&d));
            c.r.get_or_insert_with(|| vec![2.0, 4.0]);
            c.q.get_or_insert_with(|| vec![2.0]);
            if !heavy_tailed(&d) {
                c.ts.get_or_insert_with(|| ex::trend_times(&d));
            }
        }
        Subcommand::Rootzen => {
            c.horizons.get_or_insert_with(|| scaled(&d, &[10.0, 100.0]));
            c.n_paths.get_or_insert(5_000);
            c.statistic.get_or_insert(MaxStatistic::MaxXi);
        }
        Subcommand::All => unreachable!(),
    }
    Ok(c)
}

/// Some moment of order below 64 diverges.
fn heavy_tailed(d: &Distribution) -> bool {
    d.moment(64.0).is_infinite()
}

fn sorted_list(v: &[f64], name: &str) -> Result<Vec<f64>> {
    if v.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Config {
            path: name.into(),
            message: "values must be strictly increasing".into(),
        });
    }
    Ok(v.to_vec())
}

/// Runs `cmd` on the resolved `cfg`.
pub fn run(cmd: Subcommand, cfg: &ExperimentConfig) -> Result<RunReport> {
    let start = Instant::now();
    let c = resolve(cmd, cfg)?;
    let seed = c.seed;
    let outcome = match cmd {
        Subcommand::All => {
            let mut out = Outcome::default();
            for r in acceptance::run_all(seed) {
                out.checks.push(r.check);
            }
            out
        }
        _ => {
            let d = c.distribution()?;
            run_one(cmd, &c, &d, seed)?
        }
    };
    Ok(RunReport::new(cmd.name(), c, outcome, start.elapsed().as_secs_f64()))
}

fn run_one(cmd: Subcommand, c: &ExperimentConfig, d: &Distribution, seed: u64) -> Result<Outcome> {
    let grid = || -> Result<_> { required(&c.grid, "grid")?.grid() };
    match cmd {
        Subcommand::Solve => ex::solve_experiment(d, grid()?),
        Subcommand::Phi => ex::phi_experiment(d, grid()?),
        Subcommand::Stone => ex::stone_experiment(d, grid()?),
        Subcommand::Bt => ex::bt_experiment(
            d,
            grid()?,
            required(&c.ts, "ts")?,
            *required(&c.n_paths, "n_paths")?,
            seed,
        ),
        Subcommand::Couple => {
            let ts = sorted_list(required(&c.ts, "ts")?, "ts")?;
            ex::couple_experiment(d, *required(&c.n_traces, "n_traces")?, &ts, required(&c.q, "q")?, seed)
        }
        Subcommand::Compensator => {
            let ts = required(&c.ts, "ts")?;
            let n = *required(&c.n_paths, "n_paths")?;
            let horizons = sorted_list(required(&c.horizons, "horizons")?, "horizons")?;
            let mut out = ex::compensator_experiment(d, ts, n, seed)?;
            // The suprema sweeps simulate up to T = 10^4 per path, so they use at most 10^3 paths.
            let n_sweep = n.min(1_000);
            out.extend(ex::sweep_experiment(
                d,
                SupKind::Compensator,
                &horizons,
                n_sweep,
                *required(&c.p, "p")?,
                0.1,
                seed,
            )?);
            let p_rec = *required(&c.p_recurrence, "p_recurrence")?;
            out.extend(ex::sweep_experiment(
                d,
                SupKind::Recurrence,
                &horizons,
                n_sweep,
                p_rec,
                0.1,
                seed,
            )?);
            Ok(out)
        }
        Subcommand::Krt => {
            let study = RateStudy::new(d, grid()?)?;
            let xs = sorted_list(required(&c.xs, "xs")?, "xs")?;
            let qs = required(&c.q, "q")?;
            let q_max = qs.iter().copied().fold(0.0, f64::max);
            let mut out = ex::krt_experiment(&study, &xs, required(&c.r, "r")?, q_max)?;
            let rate = match &c.ts {
                Some(ts) if !heavy_tailed(d) => TvRate::Trend {
                    ts: sorted_list(ts, "ts")?,
                    qs: qs.clone(),
                },
                _ => TvRate::Slope { q: q_max },
            };
            out.extend(ex::tv_rate_experiment(&study, &rate)?);
            Ok(out)
        }
        Subcommand::Rootzen => {
            let horizons = sorted_list(required(&c.horizons, "horizons")?, "horizons")?;
            let stat = *required(&c.statistic, "statistic")?;
            ex::rootzen_experiment(d, &horizons, *required(&c.n_paths, "n_paths")?, stat, seed)
        }
        Subcommand::All => unreachable!(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(d: Distribution) -> ExperimentConfig {
        ExperimentConfig::new(Some(d.spec()), 11)
    }

    #[test]
    fn names_round_trip() {
        for c in Subcommand::ALL {
            assert_eq!(c.name().parse::<Subcommand>().unwrap(), c);
        }
        assert!("nope".parse::<Subcommand>().is_err());
    }

    #[test]
    fn resolution_is_idempotent_and_round_trips() {
        let d = Distribution::gamma(2.0, 1.0).unwrap();
        for cmd in Subcommand::ALL {
            let r = resolve(cmd, &cfg(d)).unwrap();
            assert_eq!(resolve(cmd, &r).unwrap(), r);
            assert_eq!(ExperimentConfig::from_json(&r.to_json()).unwrap(), r, "{cmd}");
        }
    }

    #[test]
    fn missing_distribution_is_a_config_error() {
        let c = ExperimentConfig::new(None, 1);
        assert!(matches!(run(Subcommand::Phi, &c), Err(Error::Config { .. })));
    }

    #[test]
    fn solve_exponential_passes() {
        let mut c = cfg(Distribution::exponential(1.0).unwrap());
        c.grid = Some(GridConfig { h: 0.02, horizon: 20.0 });
        let rep = run(Subcommand::Solve, &c).unwrap();
        assert!(rep.passed, "{}", rep.render());
        assert_eq!(rep.artifacts[0].name, "solve");
    }

    #[test]
    fn same_seed_same_artifacts() {
        let mut c = cfg(Distribution::gamma(2.0, 1.0).unwrap());
        c.n_paths = Some(300);
        c.ts = Some(vec![1.0, 3.0]);
        c.horizons = Some(vec![10.0, 40.0]);
        let a = run(Subcommand::Compensator, &c).unwrap();
        let b = run(Subcommand::Compensator, &c).unwrap();
        assert_eq!(a.artifacts, b.artifacts);
        assert!(a.artifacts.iter().all(|x| !x.csv.is_empty()));
        c.seed = 12;
        let e = run(Subcommand::Compensator, &c).unwrap();
        assert_ne!(a.artifacts, e.artifacts);
    }

    #[test]
    fn unsorted_horizons_rejected() {
        let mut c = cfg(Distribution::exponential(1.0).unwrap());
        c.horizons = Some(vec![10.0, 5.0]);
        assert!(matches!(run(Subcommand::Rootzen, &c), Err(Error::Config { .. })));
    }
}
