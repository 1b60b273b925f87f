//! Decay curves for the key renewal theorem and for the total variation between
//! `B_t` and `Π`, with log-log slope fits.
//!
//! Every curve is evaluated with two extrapolated renewal models, at steps `h`
//! and `h/2`. Their difference is the resolution of each point; points whose
//! error is within ten resolutions of zero are numerical floor and are excluded
//! from fits and trend checks.

use rayon::prelude::*;
use serde::Serialize;

use crate::distribution::Distribution;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::renewal::RenewalModel;

/// Points closer to zero than this many resolutions are treated as floor.
pub const RESOLUTION_FACTOR: f64 = 10.0;
/// Absolute floor for total variation curves. The closed-form distribution
/// functions are accurate to about `1e-13`, where TV curves level off whatever the step.
pub const TV_FLOOR: f64 = 1e-11;
/// Fewest usable points for a slope fit.
pub const MIN_FIT_POINTS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayCurve {
    pub label: String,
    /// `(x, err)` with `x` strictly increasing.
    pub points: Vec<(f64, f64)>,
    /// Difference between the two step sizes at each point.
    pub resolution: Vec<f64>,
}

impl DecayCurve {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>, resolution: Vec<f64>) -> Result<Self> {
        if points.len() != resolution.len() {
            return Err(Error::InvalidArgument("points and resolution differ in length".into()));
        }
        if points.windows(2).any(|w| !(w[1].0 > w[0].0)) || points.iter().any(|p| !(p.0 > 0.0)) {
            return Err(Error::InvalidArgument(
                "curve abscissae must be positive and increasing".into(),
            ));
        }
        if points.iter().any(|p| !p.1.is_finite() || p.1 < 0.0) || resolution.iter().any(|r| !(*r >= 0.0)) {
            return Err(Error::InvalidArgument(
                "curve errors must be finite and nonnegative".into(),
            ));
        }
        Ok(Self {
            label: label.into(),
            points,
            resolution,
        })
    }

    /// Curve without a resolution estimate.
    pub fn exact(label: impl Into<String>, points: Vec<(f64, f64)>) -> Result<Self> {
        let n = points.len();
        Self::new(label, points, vec![0.0; n])
    }

    /// Whether point `i` clears both the caller's floor and the resolution floor.
    pub fn resolved(&self, i: usize, floor: f64) -> bool {
        let e = self.points[i].1;
        e > floor && e > RESOLUTION_FACTOR * self.resolution[i]
    }

    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x,err,resolution")?;
        for ((x, e), r) in self.points.iter().zip(&self.resolution) {
            writeln!(w, "{x},{e},{r}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub window: (f64, f64),
    pub used: usize,
    /// Abscissae inside the window dropped as floor.
    pub excluded: Vec<f64>,
}

/// Ordinary least squares of `log err` on `log x` over the points of `window`
/// that clear `floor` and the resolution floor.
pub fn fit_slope(curve: &DecayCurve, window: (f64, f64), floor: f64) -> Result<SlopeFit> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut excluded = Vec::new();
    for (i, (x, e)) in curve.points.iter().enumerate() {
        if *x < window.0 || *x > window.1 {
            continue;
        }
        if curve.resolved(i, floor) {
            xs.push(x.ln());
            ys.push(e.ln());
        } else {
            excluded.push(*x);
        }
    }
    let n = xs.len();
    if n < MIN_FIT_POINTS {
        return Err(Error::InsufficientPoints { usable: n });
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy > 0.0 {
        (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(SlopeFit {
        slope,
        intercept,
        r2,
        window,
        used: n,
        excluded,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScaledTrend {
    pub q: f64,
    /// `x^q · err` nonincreasing over the resolved points.
    pub decreasing: bool,
    pub used: usize,
    /// Last resolved abscissa.
    pub resolved_to: f64,
}

/// Checks that `x^q · err(x)` is decreasing over the resolved points of the
/// window; with fewer than three such points the check fails.
pub fn scaled_trend(curve: &DecayCurve, q: f64, window: (f64, f64), floor: f64) -> ScaledTrend {
    let vals: Vec<(f64, f64)> = curve
        .points
        .iter()
        .enumerate()
        .filter(|(i, (x, _))| *x >= window.0 && *x <= window.1 && curve.resolved(*i, floor))
        .map(|(_, (x, e))| (*x, x.powf(q) * e))
        .collect();
    let decreasing = vals.len() >= 3 && vals.windows(2).all(|w| w[1].1 < w[0].1);
    ScaledTrend {
        q,
        decreasing,
        used: vals.len(),
        resolved_to: vals.last().map_or(f64::NAN, |v| v.0),
    }
}

/// `∫₀^∞ (1+y)^{−r} dy`.
fn power_tail_integral(r: f64) -> f64 {
    1.0 / (r - 1.0)
}

/// A distribution with extrapolated renewal models at `h` and `h/2`.
#[derive(Debug, Clone)]
pub struct RateStudy {
    coarse: RenewalModel,
    fine: RenewalModel,
}

/// Pair of curves at `h` and `h/2`, both carrying the resolution `|err_h − err_{h/2}|`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePair {
    pub coarse: DecayCurve,
    pub fine: DecayCurve,
}

impl CurvePair {
    fn build(label: String, xs: &[f64], coarse: Vec<f64>, fine: Vec<f64>) -> Result<Self> {
        let res: Vec<f64> = coarse.iter().zip(&fine).map(|(a, b)| (a - b).abs()).collect();
        let pts = |v: &[f64]| xs.iter().copied().zip(v.iter().copied()).collect::<Vec<_>>();
        Ok(Self {
            coarse: DecayCurve::new(format!("{label} h"), pts(&coarse), res.clone())?,
            fine: DecayCurve::new(format!("{label} h/2"), pts(&fine), res)?,
        })
    }
}

/// Horizon used by `RateStudy::for_distribution`, in means.
pub const STUDY_HORIZON: f64 = 80.0;

impl RateStudy {
    pub fn new(d: &Distribution, grid: Grid) -> Result<Self> {
        let (coarse, fine) = rayon::join(
            || RenewalModel::extrapolated(d, grid),
            || RenewalModel::extrapolated(d, grid.refined()),
        );
        Ok(Self {
            coarse: coarse?,
            fine: fine?,
        })
    }

    /// Step `mean/200` up to `80·mean`.
    pub fn for_distribution(d: &Distribution) -> Result<Self> {
        let mean = d.mean();
        Self::new(d, Grid::new(mean / 200.0, (200.0 * STUDY_HORIZON) as usize)?)
    }

    pub fn distribution(&self) -> &Distribution {
        self.coarse.distribution()
    }

    pub fn grid(&self) -> Grid {
        self.coarse.grid()
    }

    /// `|Φ*z(x) − m∫z|` for `z(y) = (1+y)^{−r}`, `r > 1`.
    pub fn krt(&self, r: f64, xs: &[f64]) -> Result<CurvePair> {
        if !(r > 1.0) {
            return Err(Error::InvalidArgument(format!("z = (1+y)^(-r) needs r > 1, got {r}")));
        }
        let horizon = self.grid().horizon();
        if let Some(x) = xs.iter().find(|x| !(**x > 0.0 && **x <= horizon)) {
            return Err(Error::HorizonExceeded { t: *x, horizon });
        }
        let limit = self.distribution().rate() * power_tail_integral(r);
        let z = move |y: f64| (1.0 + y).powf(-r);
        let eval = |m: &RenewalModel| -> Vec<f64> {
            let v = m.apply(&z);
            xs.iter().map(|x| (v.interpolate(*x) - limit).abs()).collect()
        };
        let (c, f) = rayon::join(|| eval(&self.coarse), || eval(&self.fine));
        CurvePair::build(format!("krt {} r={r}", self.distribution()), xs, c, f)
    }

    /// `‖P(B_t ∈ ·) − Π‖` at each `t`.
    pub fn tv(&self, ts: &[f64]) -> Result<CurvePair> {
        let xg = self.coarse.default_x_grid();
        let eval = |m: &RenewalModel| -> Result<Vec<f64>> {
            ts.par_iter().map(|t| Ok(m.tv_to_stationary(*t, xg)?.tv)).collect()
        };
        let (c, f) = rayon::join(|| eval(&self.coarse), || eval(&self.fine));
        CurvePair::build(format!("tv {}", self.distribution()), ts, c?, f?)
    }
}

/// Key renewal theorem error curve for `z(y) = (1+y)^{−r}` on the study grid.
pub fn krt_error_curve(d: &Distribution, r: f64, xs: &[f64]) -> Result<DecayCurve> {
    Ok(RateStudy::for_distribution(d)?.krt(r, xs)?.coarse)
}

/// Total variation decay curve on the study grid.
pub fn tv_decay_curve(d: &Distribution, ts: &[f64]) -> Result<DecayCurve> {
    Ok(RateStudy::for_distribution(d)?.tv(ts)?.coarse)
}

/// `n` geometrically spaced points on `[lo, hi]`.
pub fn geometric_lattice(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let r = (hi / lo).ln() / (n - 1) as f64;
    let mut v: Vec<f64> = (0..n).map(|i| lo * (r * i as f64).exp()).collect();
    v[n - 1] = hi;
    v
}

/// Points `lo, lo + step, …` up to `hi`.
pub fn linear_lattice(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| lo + step * i as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(f: impl Fn(f64) -> f64) -> DecayCurve {
        let xs = geometric_lattice(1.0, 100.0, 20);
        DecayCurve::exact("synthetic", xs.iter().map(|x| (*x, f(*x))).collect()).unwrap()
    }

    #[test]
    fn exact_power_law_slope() {
        let fit = fit_slope(&synthetic(|x| x.powi(-2)), (1.0, 100.0), 0.0).unwrap();
        assert!((fit.slope + 2.0).abs() < 1e-10);
        assert!((fit.r2 - 1.0).abs() < 1e-12);
        let fit = fit_slope(&synthetic(|x| 7.0 * x.powf(-0.75)), (1.0, 100.0), 0.0).unwrap();
        assert!((fit.slope + 0.75).abs() < 1e-10);
        assert!((fit.intercept - 7f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn perturbed_power_law_slope() {
        let fit = fit_slope(
            &synthetic(|x| 3.0 * x.powf(-1.5) * (1.0 + 0.01 * x.sin())),
            (1.0, 100.0),
            0.0,
        )
        .unwrap();
        assert!(fit.slope > -1.6 && fit.slope < -1.4, "{fit:?}");
    }

    #[test]
    fn all_below_floor_is_an_error() {
        let c = synthetic(|x| 1e-3 * x.powi(-2));
        assert!(matches!(
            fit_slope(&c, (1.0, 100.0), 1.0),
            Err(Error::InsufficientPoints { usable: 0 })
        ));
    }

    #[test]
    fn unresolved_points_are_excluded() {
        let xs = geometric_lattice(1.0, 100.0, 10);
        let pts: Vec<(f64, f64)> = xs.iter().map(|x| (*x, x.powi(-2))).collect();
        let res: Vec<f64> = xs.iter().map(|x| if *x > 50.0 { 1.0 } else { 0.0 }).collect();
        let c = DecayCurve::new("t", pts, res).unwrap();
        let fit = fit_slope(&c, (1.0, 100.0), 0.0).unwrap();
        assert_eq!(fit.used + fit.excluded.len(), 10);
        assert!(fit.excluded.iter().all(|x| *x > 50.0));
    }

    #[test]
    fn curve_validation() {
        assert!(DecayCurve::exact("bad", vec![(2.0, 1.0), (1.0, 1.0)]).is_err());
        assert!(DecayCurve::exact("bad", vec![(1.0, f64::NAN)]).is_err());
    }

    #[test]
    fn scaled_trend_detects_rates() {
        let c = synthetic(|x| x.powi(-3));
        assert!(scaled_trend(&c, 2.0, (1.0, 100.0), 0.0).decreasing);
        assert!(!scaled_trend(&c, 4.0, (1.0, 100.0), 0.0).decreasing);
    }

    #[test]
    fn exponential_krt_matches_closed_form() {
        // Poisson renewal measure: Φ*z(x) = z(x) + ∫₀^x z, so err(x) = |z(x) − ∫_x^∞ z|.
        let d = Distribution::exponential(1.0).unwrap();
        let study = RateStudy::new(&d, Grid::new(0.02, 1500).unwrap()).unwrap();
        let xs = geometric_lattice(2.0, 30.0, 8);
        for r in [2.0, 4.0] {
            let pair = study.krt(r, &xs).unwrap();
            for (x, e) in &pair.fine.points {
                let exact = ((1.0 + x).powf(-r) - (1.0 + x).powf(1.0 - r) / (r - 1.0)).abs();
                assert!((e - exact).abs() < 1e-8 * (1.0 + exact) + 1e-3 * exact, "r={r} x={x}");
            }
        }
    }

    #[test]
    fn gamma_tv_curve_decays() {
        let d = Distribution::gamma(2.0, 1.0).unwrap();
        let study = RateStudy::new(&d, Grid::new(0.02, 1000).unwrap()).unwrap();
        let ts = linear_lattice(2.0, 8.0, 1.0);
        let pair = study.tv(&ts).unwrap();
        for (t, v) in &pair.fine.points {
            let exact = (-2.0 * t - 1.0f64).exp();
            assert!((v - exact).abs() < 2e-2 * exact, "t={t} {v} {exact}");
        }
        assert!(scaled_trend(&pair.fine, 3.0, (2.0, 8.0), 0.0).decreasing);
    }

    #[test]
    fn horizon_is_checked() {
        let d = Distribution::exponential(1.0).unwrap();
        let study = RateStudy::new(&d, Grid::new(0.05, 100).unwrap()).unwrap();
        assert!(matches!(
            study.krt(2.0, &[1.0, 10.0]),
            Err(Error::HorizonExceeded { .. })
        ));
        assert!(study.krt(1.0, &[1.0]).is_err());
    }
}
