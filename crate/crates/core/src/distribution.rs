//! Parametric interarrival laws.
//!
//! Every kind has a density on `(0, ∞)`, no atom at zero and a finite mean.
//! Values are validated at construction and immutable afterwards.

use rand::distr::Open01;
use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma_lr, gamma_ur, ln_gamma};

use crate::error::{Error, Result};

/// Serialized form of a [`Distribution`], e.g. `{"kind": "gamma", "shape": 2.0, "rate": 1.0}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DistributionSpec {
    Exponential { rate: f64 },
    Gamma { shape: f64, rate: f64 },
    Uniform { lo: f64, hi: f64 },
    ShiftedPareto { tail: f64, scale: f64 },
}

/// A validated interarrival law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DistributionSpec", into = "DistributionSpec")]
pub struct Distribution {
    spec: DistributionSpec,
}

/// Moment `E[τ^s]`; `value` is `+∞` when the moment diverges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentReport {
    pub order: f64,
    pub value: f64,
}

impl MomentReport {
    pub fn is_infinite(&self) -> bool {
        self.value.is_infinite()
    }
}

impl TryFrom<DistributionSpec> for Distribution {
    type Error = Error;

    fn try_from(spec: DistributionSpec) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidParameters(msg));
        let finite = |v: f64| v.is_finite();
        match spec {
            DistributionSpec::Exponential { rate } => {
                if !(finite(rate) && rate > 0.0) {
                    return bad(format!("exponential rate must be > 0, got {rate}"));
                }
            }
            DistributionSpec::Gamma { shape, rate } => {
                if !(finite(shape) && shape >= 1.0) {
                    return bad(format!("gamma shape must be >= 1, got {shape}"));
                }
                if !(finite(rate) && rate > 0.0) {
                    return bad(format!("gamma rate must be > 0, got {rate}"));
                }
            }
            DistributionSpec::Uniform { lo, hi } => {
                if !(finite(lo) && finite(hi) && lo >= 0.0 && hi > lo) {
                    return bad(format!("uniform needs 0 <= lo < hi, got ({lo}, {hi})"));
                }
            }
            DistributionSpec::ShiftedPareto { tail, scale } => {
                if !(finite(tail) && tail > 1.0) {
                    return bad(format!("shifted-pareto tail index must be > 1, got {tail}"));
                }
                if !(finite(scale) && scale > 0.0) {
                    return bad(format!("shifted-pareto scale must be > 0, got {scale}"));
                }
            }
        }
        Ok(Self { spec })
    }
}

impl From<Distribution> for DistributionSpec {
    fn from(d: Distribution) -> Self {
        d.spec
    }
}

impl std::fmt::Display for Distribution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.spec {
            DistributionSpec::Exponential { rate } => write!(f, "exponential({rate})"),
            DistributionSpec::Gamma { shape, rate } => write!(f, "gamma({shape},{rate})"),
            DistributionSpec::Uniform { lo, hi } => write!(f, "uniform({lo},{hi})"),
            DistributionSpec::ShiftedPareto { tail, scale } => {
                write!(f, "shifted-pareto({tail},{scale})")
            }
        }
    }
}

impl Distribution {
    pub fn new(spec: DistributionSpec) -> Result<Self> {
        Self::try_from(spec)
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        Self::new(DistributionSpec::Exponential { rate })
    }

    pub fn gamma(shape: f64, rate: f64) -> Result<Self> {
        Self::new(DistributionSpec::Gamma { shape, rate })
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        Self::new(DistributionSpec::Uniform { lo, hi })
    }

    pub fn shifted_pareto(tail: f64, scale: f64) -> Result<Self> {
        Self::new(DistributionSpec::ShiftedPareto { tail, scale })
    }

    pub fn spec(&self) -> DistributionSpec {
        self.spec
    }

    /// Upper end of the support, `None` when unbounded.
    pub fn support_end(&self) -> Option<f64> {
        match self.spec {
            DistributionSpec::Uniform { hi, .. } => Some(hi),
            _ => None,
        }
    }

    /// Points where the density jumps, excluding the origin.
    pub fn density_jumps(&self) -> Vec<f64> {
        match self.spec {
            DistributionSpec::Uniform { lo, hi } if lo > 0.0 => vec![lo, hi],
            DistributionSpec::Uniform { hi, .. } => vec![hi],
            _ => Vec::new(),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        match self.spec {
            DistributionSpec::Exponential { rate } => -(-rate * x).exp_m1(),
            DistributionSpec::Gamma { shape, rate } => gamma_lr(shape, rate * x),
            DistributionSpec::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
            DistributionSpec::ShiftedPareto { .. } => 1.0 - self.survival(x),
        }
    }

    /// `1 − F(x)`, evaluated without cancellation in the tail.
    pub fn survival(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        match self.spec {
            DistributionSpec::Exponential { rate } => (-rate * x).exp(),
            DistributionSpec::Gamma { shape, rate } => gamma_ur(shape, rate * x),
            DistributionSpec::Uniform { lo, hi } => ((hi - x) / (hi - lo)).clamp(0.0, 1.0),
            DistributionSpec::ShiftedPareto { tail, scale } => (scale / (scale + x)).powf(tail),
        }
    }

    /// Density, right-continuous at jump points; `f(0)` is the limit from the right.
    pub fn density(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        match self.spec {
            DistributionSpec::Exponential { rate } => rate * (-rate * x).exp(),
            DistributionSpec::Gamma { shape, rate } => {
                if x == 0.0 {
                    return if shape == 1.0 { rate } else { 0.0 };
                }
                (shape * rate.ln() + (shape - 1.0) * x.ln() - rate * x - ln_gamma(shape)).exp()
            }
            DistributionSpec::Uniform { lo, hi } => {
                if x >= lo && x < hi {
                    1.0 / (hi - lo)
                } else {
                    0.0
                }
            }
            DistributionSpec::ShiftedPareto { tail, scale } => tail / scale * (scale / (scale + x)).powf(tail + 1.0),
        }
    }

    pub fn hazard(&self, x: f64) -> Result<f64> {
        let x = x.max(0.0);
        match self.spec {
            DistributionSpec::Exponential { rate } => Ok(rate),
            DistributionSpec::ShiftedPareto { tail, scale } => Ok(tail / (scale + x)),
            DistributionSpec::Uniform { lo, hi } => {
                if x >= hi {
                    Err(Error::SupportExhausted { x })
                } else if x < lo {
                    Ok(0.0)
                } else {
                    Ok(1.0 / (hi - x))
                }
            }
            DistributionSpec::Gamma { .. } => {
                let s = self.survival(x);
                if s <= 0.0 {
                    return Err(Error::SupportExhausted { x });
                }
                Ok(self.density(x) / s)
            }
        }
    }

    /// `−log(1 − F(x))`.
    pub fn cumulative_hazard(&self, x: f64) -> Result<f64> {
        if x <= 0.0 {
            return Ok(0.0);
        }
        match self.spec {
            DistributionSpec::Exponential { rate } => Ok(rate * x),
            DistributionSpec::ShiftedPareto { tail, scale } => Ok(tail * (x / scale).ln_1p()),
            DistributionSpec::Uniform { lo, hi } => {
                if x >= hi {
                    Err(Error::SupportExhausted { x })
                } else if x <= lo {
                    Ok(0.0)
                } else {
                    Ok(-((hi - x) / (hi - lo)).ln())
                }
            }
            DistributionSpec::Gamma { .. } => {
                let s = self.survival(x);
                if s <= 0.0 {
                    return Err(Error::SupportExhausted { x });
                }
                if s > 0.5 {
                    Ok(-(-self.cdf(x)).ln_1p())
                } else {
                    Ok(-s.ln())
                }
            }
        }
    }

    /// Inverse CDF on `(0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        match self.spec {
            DistributionSpec::Exponential { rate } => -(-u).ln_1p() / rate,
            DistributionSpec::Uniform { lo, hi } => lo + u.min(1.0) * (hi - lo),
            DistributionSpec::ShiftedPareto { tail, scale } => {
                if u >= 1.0 {
                    return f64::INFINITY;
                }
                scale * (((-u).ln_1p() * (-1.0 / tail)).exp_m1())
            }
            DistributionSpec::Gamma { shape, rate } => {
                if u >= 1.0 {
                    return f64::INFINITY;
                }
                gamma_quantile(shape, u) / rate
            }
        }
    }

    /// One draw by inverse-CDF transform of an open-interval uniform.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.sample(Open01);
        self.quantile(u).max(f64::MIN_POSITIVE)
    }

    pub fn mean(&self) -> f64 {
        match self.spec {
            DistributionSpec::Exponential { rate } => 1.0 / rate,
            DistributionSpec::Gamma { shape, rate } => shape / rate,
            DistributionSpec::Uniform { lo, hi } => 0.5 * (lo + hi),
            DistributionSpec::ShiftedPareto { tail, scale } => scale / (tail - 1.0),
        }
    }

    /// Renewal rate `m = 1 / E[τ]`.
    pub fn rate(&self) -> f64 {
        1.0 / self.mean()
    }

    pub fn moment(&self, s: f64) -> MomentReport {
        let value = match self.spec {
            DistributionSpec::Exponential { rate } => (ln_gamma(s + 1.0) - s * rate.ln()).exp(),
            DistributionSpec::Gamma { shape, rate } => (ln_gamma(shape + s) - ln_gamma(shape) - s * rate.ln()).exp(),
            DistributionSpec::Uniform { lo, hi } => (hi.powf(s + 1.0) - lo.powf(s + 1.0)) / ((s + 1.0) * (hi - lo)),
            DistributionSpec::ShiftedPareto { tail, scale } => {
                if s >= tail {
                    f64::INFINITY
                } else {
                    (s * scale.ln() + ln_gamma(s + 1.0) + ln_gamma(tail - s) - ln_gamma(tail)).exp()
                }
            }
        };
        MomentReport { order: s, value }
    }

    /// `∫₀^x (1 − F)`.
    pub fn integrated_survival(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        match self.spec {
            DistributionSpec::Exponential { rate } => -(-rate * x).exp_m1() / rate,
            DistributionSpec::Gamma { shape, rate } => {
                x * gamma_ur(shape, rate * x) + shape / rate * gamma_lr(shape + 1.0, rate * x)
            }
            DistributionSpec::Uniform { lo, hi } => {
                if x <= lo {
                    x
                } else if x < hi {
                    lo + ((hi - lo).powi(2) - (hi - x).powi(2)) / (2.0 * (hi - lo))
                } else {
                    0.5 * (lo + hi)
                }
            }
            DistributionSpec::ShiftedPareto { tail, scale } => {
                scale / (tail - 1.0) * -((tail - 1.0) * (scale / (scale + x)).ln()).exp_m1()
            }
        }
    }

    /// `∫ₓ^∞ (1 − F)`.
    pub fn integrated_survival_tail(&self, x: f64) -> f64 {
        let x = x.max(0.0);
        match self.spec {
            DistributionSpec::Exponential { rate } => (-rate * x).exp() / rate,
            DistributionSpec::Gamma { shape, rate } => {
                if x == 0.0 {
                    return shape / rate;
                }
                let v = shape / rate * gamma_ur(shape + 1.0, rate * x) - x * gamma_ur(shape, rate * x);
                v.max(0.0)
            }
            DistributionSpec::Uniform { lo, hi } => {
                if x <= lo {
                    0.5 * (lo + hi) - x
                } else if x < hi {
                    (hi - x).powi(2) / (2.0 * (hi - lo))
                } else {
                    0.0
                }
            }
            DistributionSpec::ShiftedPareto { tail, scale } => {
                scale / (tail - 1.0) * (scale / (scale + x)).powf(tail - 1.0)
            }
        }
    }

    /// Stationary delay density `π(x) = m(1 − F(x))`.
    pub fn stationary_delay_density(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        self.rate() * self.survival(x)
    }

    /// `Π(x) = m ∫₀^x (1 − F)`.
    pub fn stationary_delay_cdf(&self, x: f64) -> f64 {
        (self.rate() * self.integrated_survival(x)).min(1.0)
    }

    /// `1 − Π(x)`.
    pub fn stationary_delay_survival(&self, x: f64) -> f64 {
        (self.rate() * self.integrated_survival_tail(x)).min(1.0)
    }

    /// Inverse of `Π` by bisection to absolute width `1e-10 · max(1, x)`.
    pub fn stationary_delay_quantile(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        if u >= 1.0 {
            return self.support_end().unwrap_or(f64::INFINITY);
        }
        // Work on the side of the law where the target is not close to 1.
        let upper = u > 0.5;
        let target = if upper { 1.0 - u } else { u };
        let g = |x: f64| {
            if upper {
                target - self.stationary_delay_survival(x)
            } else {
                self.stationary_delay_cdf(x) - target
            }
        };
        let mut lo = 0.0;
        let mut hi = self.mean().max(1e-300);
        while g(hi) < 0.0 {
            lo = hi;
            hi *= 2.0;
        }
        while hi - lo > 1e-10 * hi.max(1.0) {
            let mid = 0.5 * (lo + hi);
            if g(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    pub fn sample_stationary_delay<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.sample(Open01);
        self.stationary_delay_quantile(u)
    }

    /// Quantile at `1 − eps`, computed from the survival side.
    pub fn upper_quantile(&self, eps: f64) -> f64 {
        match self.spec {
            DistributionSpec::Exponential { rate } => -eps.ln() / rate,
            DistributionSpec::Uniform { lo, hi } => hi - eps * (hi - lo),
            DistributionSpec::ShiftedPareto { tail, scale } => scale * ((-eps.ln() / tail).exp() - 1.0),
            DistributionSpec::Gamma { shape, rate } => gamma_upper_quantile(shape, eps) / rate,
        }
    }
}

/// Unit-rate gamma quantile; safeguarded Newton on the better-conditioned tail.
fn gamma_quantile(shape: f64, u: f64) -> f64 {
    if u > 0.5 {
        return gamma_upper_quantile(shape, 1.0 - u);
    }
    solve_monotone(shape, |x| gamma_lr(shape, x) - u)
}

fn gamma_upper_quantile(shape: f64, eps: f64) -> f64 {
    solve_monotone(shape, |x| eps - gamma_ur(shape, x))
}

/// Root of an increasing `g` on `(0, ∞)` using Newton steps on the unit-rate gamma
/// density, falling back to bisection whenever a step leaves the bracket.
fn solve_monotone(shape: f64, g: impl Fn(f64) -> f64) -> f64 {
    let dens = |x: f64| ((shape - 1.0) * x.ln() - x - ln_gamma(shape)).exp();
    let mut lo = 0.0;
    let mut hi = shape.max(1.0);
    while g(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let gx = g(x);
        if gx == 0.0 {
            return x;
        }
        if gx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let d = dens(x);
        let mut next = if d > 0.0 { x - gx / d } else { f64::NAN };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 1e-15 * x.max(1e-300) || hi - lo <= 1e-15 * hi {
            return next;
        }
        x = next;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn kinds() -> Vec<Distribution> {
        vec![
            Distribution::exponential(1.3).unwrap(),
            Distribution::gamma(2.0, 1.0).unwrap(),
            Distribution::gamma(2.7, 0.8).unwrap(),
            Distribution::uniform(0.0, 2.0).unwrap(),
            Distribution::uniform(1.0, 2.5).unwrap(),
            Distribution::shifted_pareto(3.5, 2.5).unwrap(),
        ]
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(Distribution::exponential(0.0).is_err());
        assert!(Distribution::gamma(0.5, 1.0).is_err());
        assert!(Distribution::uniform(2.0, 1.0).is_err());
        assert!(Distribution::uniform(-1.0, 1.0).is_err());
        assert!(Distribution::shifted_pareto(1.0, 1.0).is_err());
        assert!(Distribution::shifted_pareto(2.0, f64::NAN).is_err());
    }

    #[test]
    fn json_shape() {
        let d: Distribution = serde_json::from_str(r#"{"kind": "gamma", "shape": 2.0, "rate": 1.0}"#).unwrap();
        assert_eq!(d, Distribution::gamma(2.0, 1.0).unwrap());
        let p: Distribution = serde_json::from_str(r#"{"kind":"shifted-pareto","tail":3.5,"scale":2.5}"#).unwrap();
        assert!((p.mean() - 1.0).abs() < 1e-15);
        let back = serde_json::to_string(&p).unwrap();
        assert_eq!(back, r#"{"kind":"shifted-pareto","tail":3.5,"scale":2.5}"#);
        assert!(serde_json::from_str::<Distribution>(r#"{"kind":"exponential","rate":-1}"#).is_err());
    }

    #[test]
    fn cdf_examples() {
        let e1 = Distribution::exponential(1.0).unwrap();
        assert_eq!(e1.cdf(0.0), 0.0);
        let e2 = Distribution::exponential(2.0).unwrap();
        assert!((e2.cdf(std::f64::consts::LN_2 / 2.0) - 0.5).abs() < 1e-15);
        let u = Distribution::uniform(0.0, 2.0).unwrap();
        assert_eq!(u.cdf(3.0), 1.0);
    }

    #[test]
    fn gamma_cdf_matches_closed_form_for_integer_shape() {
        let g = Distribution::gamma(2.0, 1.0).unwrap();
        for &x in &[1e-6f64, 0.1, 1.0, 3.0, 10.0, 40.0] {
            let exact_sf = (1.0 + x) * (-x).exp();
            assert!((g.survival(x) - exact_sf).abs() <= 1e-13 * exact_sf, "x={x}");
            assert!((g.density(x) - x * (-x).exp()).abs() < 1e-15);
        }
    }

    #[test]
    fn hazard_examples() {
        let e = Distribution::exponential(1.7).unwrap();
        assert_eq!(e.hazard(3.0).unwrap(), 1.7);
        let u = Distribution::uniform(0.0, 1.0).unwrap();
        assert!((u.hazard(0.5).unwrap() - 2.0).abs() < 1e-15);
        assert!(matches!(u.hazard(1.0), Err(Error::SupportExhausted { .. })));
        let p = Distribution::shifted_pareto(3.5, 2.5).unwrap();
        assert!((p.hazard(0.0).unwrap() - 3.5 / 2.5).abs() < 1e-15);
    }

    #[test]
    fn cumulative_hazard_examples() {
        let e = Distribution::exponential(0.7).unwrap();
        assert!((e.cumulative_hazard(3.0).unwrap() - 2.1).abs() < 1e-15);
        for d in kinds() {
            assert_eq!(d.cumulative_hazard(0.0).unwrap(), 0.0);
        }
        let u = Distribution::uniform(0.0, 1.0).unwrap();
        assert!((u.cumulative_hazard(0.9).unwrap() - std::f64::consts::LN_10).abs() < 1e-12);
        assert!(u.cumulative_hazard(1.0).is_err());
    }

    #[test]
    fn analytic_identities() {
        for d in kinds() {
            let end = d.support_end().unwrap_or(30.0 * d.mean());
            let mut prev = 0.0;
            for i in 1..400 {
                let x = end * i as f64 / 400.0;
                let sf = d.survival(x);
                let h = d.hazard(x).unwrap();
                assert!(
                    (h * sf - d.density(x)).abs() <= 1e-12 * d.density(x).max(1e-300),
                    "{d} x={x}"
                );
                let ch = d.cumulative_hazard(x).unwrap();
                assert!(ch >= prev);
                prev = ch;
                assert!(((-ch).exp() - sf).abs() <= 1e-12, "{d} x={x}");
            }
        }
    }

    #[test]
    fn derivative_of_cdf_is_density() {
        for d in kinds() {
            let end = d.support_end().unwrap_or(20.0 * d.mean());
            let jumps = d.density_jumps();
            let e = 1e-5;
            for i in 1..200 {
                let x = end * i as f64 / 200.0;
                if jumps.iter().any(|j| (j - x).abs() < 2.0 * e) {
                    continue;
                }
                let fd = (d.cdf(x + e) - d.cdf(x - e)) / (2.0 * e);
                assert!((fd - d.density(x)).abs() < 1e-6, "{d} x={x}");
            }
        }
    }

    #[test]
    fn quantile_inverts_cdf() {
        for d in kinds() {
            for &u in &[1e-9, 1e-4, 0.1, 0.5, 0.9, 0.999, 1.0 - 1e-9] {
                let x = d.quantile(u);
                let back = if u > 0.5 { 1.0 - d.survival(x) } else { d.cdf(x) };
                assert!((back - u).abs() < 1e-12 * u.max(1e-3), "{d} u={u}");
            }
            let x = d.upper_quantile(1e-6);
            assert!((d.survival(x) - 1e-6).abs() < 1e-15, "{d}");
        }
    }

    #[test]
    fn sample_examples() {
        let e = Distribution::exponential(1.0).unwrap();
        assert!((e.quantile(0.5) - std::f64::consts::LN_2).abs() < 1e-15);
        let u = Distribution::uniform(2.0, 4.0).unwrap();
        assert!((u.quantile(0.25) - 2.5).abs() < 1e-15);
        let g = Distribution::gamma(2.0, 1.0).unwrap();
        let a: Vec<f64> = {
            let mut r = ChaCha8Rng::seed_from_u64(9);
            (0..50).map(|_| g.sample(&mut r)).collect()
        };
        let b: Vec<f64> = {
            let mut r = ChaCha8Rng::seed_from_u64(9);
            (0..50).map(|_| g.sample(&mut r)).collect()
        };
        assert_eq!(a, b);
        assert!(a.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn moment_examples() {
        let e = Distribution::exponential(1.0).unwrap();
        assert!((e.moment(1.0).value - 1.0).abs() < 1e-14);
        let p = Distribution::shifted_pareto(2.5, 1.0).unwrap();
        assert!(p.moment(3.0).is_infinite());
        assert!(p.moment(2.5).is_infinite());
        assert!(!p.moment(2.0).is_infinite());
        let u = Distribution::uniform(0.0, 2.0).unwrap();
        assert!((u.moment(2.0).value - 4.0 / 3.0).abs() < 1e-14);
    }

    /// Moments against composite Simpson quadrature of `x^s f(x)`.
    #[test]
    fn moments_match_quadrature() {
        for d in kinds() {
            for &s in &[1.0, 1.5, 2.0, 3.0] {
                let m = d.moment(s);
                if m.is_infinite() {
                    continue;
                }
                let end = d.support_end().unwrap_or(1e4);
                // x = y² removes the x^s singularity at the origin.
                let q = simpson(
                    |y| 2.0 * y * (y * y).powf(s) * d.density(y * y),
                    0.0,
                    end.sqrt() * (1.0 - 1e-15),
                    400_000,
                ) + if d.support_end().is_none() {
                    tail_moment(&d, s, end)
                } else {
                    0.0
                };
                assert!((q - m.value).abs() < 1e-6 * m.value, "{d} s={s}: {q} vs {}", m.value);
            }
        }
    }

    fn tail_moment(d: &Distribution, s: f64, end: f64) -> f64 {
        match d.spec() {
            DistributionSpec::ShiftedPareto { tail, scale } => {
                // x^s f(x) = r c^r x^{s-r-1} (1 - (r+1)c/x + O(x^-2)) far in the tail
                tail * scale.powf(tail)
                    * (end.powf(s - tail) / (tail - s)
                        - (tail + 1.0) * scale * end.powf(s - tail - 1.0) / (tail + 1.0 - s))
            }
            _ => 0.0,
        }
    }

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let n = n + n % 2;
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn stationary_delay_examples() {
        let e = Distribution::exponential(1.5).unwrap();
        for &x in &[0.0, 0.3, 2.0] {
            assert!((e.stationary_delay_density(x) - e.density(x)).abs() < 1e-15);
        }
        let u = Distribution::uniform(0.0, 2.0).unwrap();
        assert_eq!(u.stationary_delay_density(0.0), 1.0);
        assert!(u.stationary_delay_quantile(1e-14) < 1e-9);
    }

    #[test]
    fn stationary_delay_integrates_to_one() {
        for d in kinds() {
            let end = d
                .support_end()
                .unwrap_or_else(|| d.stationary_delay_quantile(1.0 - 1e-4));
            let q = simpson(|x| d.stationary_delay_density(x), 0.0, end, 200_000);
            let covered = d.stationary_delay_cdf(end);
            assert!(covered >= 0.9999 - 1e-9);
            assert!((q - covered).abs() < 1e-6, "{d}: {q} vs {covered}");
            assert!((d.stationary_delay_cdf(end) + d.stationary_delay_survival(end) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn integrated_survival_matches_quadrature() {
        for d in kinds() {
            for &x in &[0.3, 1.0, 2.2, 7.0] {
                let mut cuts = vec![0.0];
                cuts.extend(d.density_jumps().into_iter().filter(|j| *j < x));
                cuts.push(x);
                let q: f64 = cuts
                    .windows(2)
                    .map(|w| simpson(|y| d.survival(y), w[0], w[1], 20_000))
                    .sum();
                assert!((d.integrated_survival(x) - q).abs() < 1e-10, "{d} x={x}");
                let total = d.integrated_survival(x) + d.integrated_survival_tail(x);
                assert!((total - d.mean()).abs() < 1e-12, "{d} x={x}");
            }
        }
    }

    #[test]
    fn stationary_quantile_inverts() {
        for d in kinds() {
            for &u in &[1e-6, 0.2, 0.5, 0.8, 1.0 - 1e-7] {
                let x = d.stationary_delay_quantile(u);
                let back = d.stationary_delay_cdf(x);
                assert!((back - u).abs() < 1e-9, "{d} u={u}");
            }
        }
    }
}
