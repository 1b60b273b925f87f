//! One flat JSON file per run. Fields a subcommand does not need may be omitted;
//! `resolve` fills them with defaults scaled to the distribution's mean, and the
//! resolved config is echoed into every report so a run can be repeated from it.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::compensator::MaxStatistic;
use crate::distribution::{Distribution, DistributionSpec};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::renewal::default_grid;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub h: f64,
    pub horizon: f64,
}

impl GridConfig {
    pub fn grid(&self) -> Result<Grid> {
        Grid::with_horizon(self.h, self.horizon)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distribution: Option<DistributionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    pub seed: u64,
    /// Evaluation times.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ts: Option<Vec<f64>>,
    /// Evaluation points of the key renewal theorem error.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xs: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_paths: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_traces: Option<usize>,
    /// Scaling exponent of the compensator supremum.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    /// Scaling exponent of the recurrence-time supremum.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_recurrence: Option<f64>,
    /// Moment orders and rate exponents.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<f64>>,
    /// Tail exponents of the forcing `z(y) = (1+y)^{−r}`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<Vec<f64>>,
    /// Observation horizons `T`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizons: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub statistic: Option<MaxStatistic>,
}

impl ExperimentConfig {
    /// Minimal config: a distribution and a seed.
    pub fn new(distribution: Option<DistributionSpec>, seed: u64) -> Self {
        Self {
            distribution,
            grid: None,
            seed,
            ts: None,
            xs: None,
            n_paths: None,
            n_traces: None,
            p: None,
            p_recurrence: None,
            q: None,
            r: None,
            horizons: None,
            statistic: None,
        }
    }

    /// Parses JSON, reporting the path of the offending field on failure.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| Error::Config {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Applies `RENEWAL_LAB_SEED` if it is set.
    pub fn with_env_seed(mut self) -> Self {
        self.seed = rng::seed_from_env(self.seed);
        self
    }

    fn validate(&self) -> Result<()> {
        let err = |path: &str, message: String| {
            Err(Error::Config {
                path: path.into(),
                message,
            })
        };
        if let Some(spec) = self.distribution {
            if let Err(e) = Distribution::new(spec) {
                return err("distribution", e.to_string());
            }
        }
        if let Some(g) = self.grid {
            if let Err(e) = g.grid() {
                return err("grid", e.to_string());
            }
        }
        for (name, list) in [("ts", &self.ts), ("xs", &self.xs), ("horizons", &self.horizons)] {
            if let Some(v) = list {
                if v.is_empty() || v.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
                    return err(name, "expected a nonempty list of positive numbers".into());
                }
            }
        }
        for (name, list) in [("q", &self.q), ("r", &self.r)] {
            if let Some(v) = list {
                if v.is_empty() || v.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
                    return err(name, "expected a nonempty list of positive numbers".into());
                }
            }
        }
        if let Some(r) = &self.r {
            if r.iter().any(|r| *r <= 1.0) {
                return err("r", "forcing exponents must exceed 1".into());
            }
        }
        for (name, p) in [("p", self.p), ("p_recurrence", self.p_recurrence)] {
            if let Some(p) = p {
                if !(p.is_finite() && p > 0.0) {
                    return err(name, format!("expected a positive exponent, got {p}"));
                }
            }
        }
        for (name, n) in [("n_paths", self.n_paths), ("n_traces", self.n_traces)] {
            if n == Some(0) {
                return err(name, "must be positive".into());
            }
        }
        Ok(())
    }

    pub fn distribution(&self) -> Result<Distribution> {
        match self.distribution {
            Some(spec) => Distribution::new(spec),
            None => Err(Error::Config {
                path: "distribution".into(),
                message: "missing field `distribution`".into(),
            }),
        }
    }

    pub fn grid_for(&self, d: &Distribution) -> Result<Grid> {
        match self.grid {
            Some(g) => g.grid(),
            None => Ok(default_grid(d)),
        }
    }
}

/// A config field that must have been resolved.
pub fn required<'a, T>(v: &'a Option<T>, name: &str) -> Result<&'a T> {
    v.as_ref().ok_or_else(|| Error::Config {
        path: name.into(),
        message: format!("missing field `{name}`"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_config() {
        let cfg = ExperimentConfig::from_json(r#"{"distribution": {"kind": "exponential", "rate": 1.0}, "seed": 7}"#)
            .unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.distribution().unwrap(), Distribution::exponential(1.0).unwrap());
    }

    #[test]
    fn seed_is_mandatory() {
        let e = ExperimentConfig::from_json(r#"{"distribution": {"kind": "exponential", "rate": 1.0}}"#).unwrap_err();
        assert!(
            matches!(e, Error::Config { ref message, .. } if message.contains("seed")),
            "{e}"
        );
    }

    #[test]
    fn unknown_fields_report_their_path() {
        let e =
            ExperimentConfig::from_json(r#"{"seed": 1, "grid": {"h": 0.1, "horizon": 5, "bogus": 1}}"#).unwrap_err();
        match e {
            Error::Config { path, message } => {
                assert_eq!(path, "grid.bogus");
                assert!(message.contains("bogus"));
            }
            other => panic!("{other}"),
        }
        let e =
            ExperimentConfig::from_json(r#"{"seed": 1, "distribution": {"kind": "gamma", "shape": "two", "rate": 1}}"#)
                .unwrap_err();
        assert!(
            matches!(e, Error::Config { ref path, .. } if path.starts_with("distribution")),
            "{e}"
        );
    }

    #[test]
    fn invalid_values_are_config_errors() {
        for text in [
            r#"{"seed": 1, "distribution": {"kind": "exponential", "rate": -1}}"#,
            r#"{"seed": 1, "ts": []}"#,
            r#"{"seed": 1, "r": [1.0]}"#,
            r#"{"seed": 1, "p": 0}"#,
            r#"{"seed": 1, "n_paths": 0}"#,
            r#"{"seed": 1, "grid": {"h": 0, "horizon": 1}}"#,
        ] {
            assert!(
                matches!(ExperimentConfig::from_json(text), Err(Error::Config { .. })),
                "{text}"
            );
        }
    }

    #[test]
    fn round_trips_through_json() {
        let mut cfg = ExperimentConfig::new(Some(Distribution::gamma(2.0, 1.0).unwrap().spec()), 3);
        cfg.ts = Some(vec![1.0, 2.5]);
        cfg.statistic = Some(MaxStatistic::MaxXi);
        cfg.grid = Some(GridConfig { h: 0.01, horizon: 20.0 });
        assert_eq!(ExperimentConfig::from_json(&cfg.to_json()).unwrap(), cfg);
    }
}
