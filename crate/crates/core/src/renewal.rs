//! Grid solvers for the renewal measure, the renewal equation and the law of the
//! forward recurrence time.

use crate::distribution::Distribution;
use crate::error::{Error, Result};
use crate::grid::{
    convolve_density_values, convolve_measure_function, cumulative_trapezoid, interpolate, solve_measure_renewal,
    trapezoid, Grid, GridFunction, GridMeasure,
};

/// Default grid: step `mean/200`, horizon `100·mean`.
pub fn default_grid(d: &Distribution) -> Grid {
    let mean = d.mean();
    Grid::new(mean / 200.0, 20_000).expect("positive mean")
}

/// `Φ = Σ F^{*n}` on the grid, solved from `Φ = δ₀ + F*Φ` by forward substitution.
pub fn renewal_measure(d: &Distribution, grid: Grid) -> Result<GridMeasure> {
    check_step(d, grid)?;
    solve_measure_renewal(&GridMeasure::from_distribution(d, grid))
}

fn check_step(d: &Distribution, grid: Grid) -> Result<()> {
    let diagonal = 1.0 - 0.5 * grid.step() * d.density(0.0);
    if diagonal <= 0.0 {
        return Err(Error::StepTooCoarse { diagonal });
    }
    Ok(())
}

/// Forcing `z(t) = m ∫₀^t (1 − F)`, by trapezoidal cumulative integration.
pub fn linear_forcing(d: &Distribution, grid: Grid) -> GridFunction {
    let m = d.rate();
    let sf: Vec<f64> = grid.nodes().map(|x| m * d.survival(x)).collect();
    GridFunction::new(grid, cumulative_trapezoid(&sf, grid.step())).expect("finite forcing")
}

#[derive(Debug, Clone)]
pub struct RenewalSolution {
    pub solution: GridFunction,
    pub forcing: GridFunction,
    pub renewal_measure: GridMeasure,
    /// `sup |Z − z − F*Z|` on the grid.
    pub residual: f64,
}

/// Solves `Z = z + F*Z` with the trapezoidal rule, implicit in the diagonal term.
pub fn solve_renewal_equation(d: &Distribution, z: &GridFunction) -> Result<RenewalSolution> {
    let grid = z.grid();
    check_step(d, grid)?;
    let kernel = GridMeasure::from_distribution(d, grid);
    let values = volterra_trapezoid(kernel.density(), z.values(), grid.step())?;
    let solution = GridFunction::new(grid, values)?;
    let fz = convolve_measure_function(&kernel, &solution)?;
    let residual = solution
        .values()
        .iter()
        .zip(z.values())
        .zip(fz.values())
        .map(|((zz, f), c)| (zz - f - c).abs())
        .fold(0.0, f64::max);
    Ok(RenewalSolution {
        solution,
        forcing: z.clone(),
        renewal_measure: solve_measure_renewal(&kernel)?,
        residual,
    })
}

/// `Z_k (1 − h f₀/2) = z_k + h (f_k Z₀/2 + Σ_{j=1}^{k−1} f_j Z_{k−j})`, `Z₀ = z₀`.
fn volterra_trapezoid(f: &[f64], z: &[f64], h: f64) -> Result<Vec<f64>> {
    let diagonal = 1.0 - 0.5 * h * f[0];
    if diagonal <= 0.0 {
        return Err(Error::StepTooCoarse { diagonal });
    }
    let n = z.len();
    let mut out = vec![0.0; n];
    out[0] = z[0];
    for k in 1..n {
        let mut s = 0.5 * f[k] * out[0];
        for j in 1..k {
            s += f[j] * out[k - j];
        }
        out[k] = (z[k] + h * s) / diagonal;
    }
    Ok(out)
}

/// Renewal measure together with the deviation `ψ = φ − m` of its density from
/// the renewal rate, the quantity the recurrence-time formulas are written in.
///
/// An extrapolated model also carries the solve at `h/2`; every derived quantity
/// `Q` is then returned as `(4Q_{h/2} − Q_h)/3`, which removes the `O(h²)` term
/// of both the Volterra solve and the trapezoidal quadratures built on it.
#[derive(Debug, Clone)]
pub struct RenewalModel {
    dist: Distribution,
    grid: Grid,
    phi: GridMeasure,
    psi: Vec<f64>,
    fine: Option<Box<RenewalModel>>,
}

fn richardson(coarse: f64, fine: f64) -> f64 {
    (4.0 * fine - coarse) / 3.0
}

impl RenewalModel {
    pub fn new(d: &Distribution, grid: Grid) -> Result<Self> {
        let phi = renewal_measure(d, grid)?;
        let m = d.rate();
        let mut psi: Vec<f64> = phi.density().iter().map(|v| v - m).collect();
        // The weighted convolution puts an O(h) artefact on node 0 only; φ(0) = f(0) exactly.
        psi[0] = d.density(0.0) - m;
        Ok(Self {
            dist: *d,
            grid,
            phi,
            psi,
            fine: None,
        })
    }

    /// Model on `grid` paired with the solve on `grid.refined()` for Richardson extrapolation.
    pub fn extrapolated(d: &Distribution, grid: Grid) -> Result<Self> {
        let mut coarse = Self::new(d, grid)?;
        coarse.fine = Some(Box::new(Self::new(d, grid.refined())?));
        Ok(coarse)
    }

    pub fn distribution(&self) -> &Distribution {
        &self.dist
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    /// Renewal measure on this model's grid (not extrapolated).
    pub fn measure(&self) -> &GridMeasure {
        &self.phi
    }

    pub fn is_extrapolated(&self) -> bool {
        self.fine.is_some()
    }

    fn combine(&self, coarse: Vec<f64>, fine: impl FnOnce(&RenewalModel) -> Vec<f64>) -> Vec<f64> {
        match &self.fine {
            None => coarse,
            Some(f) => coarse.iter().zip(fine(f)).map(|(c, v)| richardson(*c, v)).collect(),
        }
    }

    /// As `combine`, also returning `|Q_h − Q_{h/2}|` per value, an a-posteriori
    /// bound on the error of the extrapolated value (zero without a fine solve).
    fn combine_resolved(&self, coarse: Vec<f64>, fine: impl FnOnce(&RenewalModel) -> Vec<f64>) -> (Vec<f64>, Vec<f64>) {
        match &self.fine {
            None => {
                let zeros = vec![0.0; coarse.len()];
                (coarse, zeros)
            }
            Some(f) => coarse
                .iter()
                .zip(fine(f))
                .map(|(c, v)| (richardson(*c, v), (c - v).abs()))
                .unzip(),
        }
    }

    /// `ψ = φ − m` at the nodes.
    pub fn deviation(&self) -> Vec<f64> {
        self.combine(self.psi.clone(), |f| {
            (0..self.grid.len()).map(|k| f.psi[2 * k]).collect()
        })
    }

    /// Renewal density `m + ψ`.
    pub fn density(&self) -> GridFunction {
        let m = self.dist.rate();
        GridFunction::new(self.grid, self.deviation().iter().map(|v| v + m).collect()).expect("finite")
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !(t >= 0.0) || t > self.grid.horizon() * (1.0 + 1e-12) {
            return Err(Error::HorizonExceeded {
                t,
                horizon: self.grid.horizon(),
            });
        }
        Ok(())
    }

    /// Default x-grid for the law of `B_t`: covers `[0, x_q]` with `x_q` the
    /// `1 − 10⁻⁶` quantile of `F`, in multiples of the solver step, at most about
    /// 2000 intervals.
    pub fn default_x_grid(&self) -> Grid {
        let h = self.grid.step();
        let xq = self.dist.upper_quantile(1e-6);
        let stride = (xq / h / 2000.0).ceil().max(1.0);
        let step = stride * h;
        Grid::new(step, (xq / step).ceil().max(1.0) as usize).expect("positive step")
    }

    /// `P(B_t ≤ x)` from `∫₀^t F((t−u, t+x−u]) Φ(du)`.
    ///
    /// Evaluated as `Π(x) + D(x)` with
    /// `D(x) = [F̄(t) − F̄(t+x)] − m ∫_t^{t+x} F̄ + ∫₀^t [F̄(t−u) − F̄(t+x−u)] ψ(u) du`,
    /// which stays accurate when `B_t` is already close to stationary.
    pub fn forward_recurrence_cdf(&self, t: f64, xgrid: Grid) -> Result<RecurrenceLaw> {
        self.check_time(t)?;
        let dev = self.stationary_deviation(t, xgrid);
        let cdf: Vec<f64> = xgrid
            .nodes()
            .zip(&dev)
            .map(|(x, dv)| (self.dist.stationary_delay_cdf(x) + dv).clamp(0.0, 1.0))
            .collect();
        let tail_mass = 1.0 - cdf[cdf.len() - 1];
        Ok(RecurrenceLaw {
            t,
            cdf: GridFunction::new(xgrid, cdf)?,
            deviation: GridFunction::new(xgrid, dev)?,
            tail_mass,
        })
    }

    /// `D(x) = P(B_t ≤ x) − Π(x)` on `xgrid`.
    fn stationary_deviation(&self, t: f64, xgrid: Grid) -> Vec<f64> {
        let coarse = self.raw_deviation(t, xgrid);
        self.combine(coarse, |f| f.raw_deviation(t, xgrid))
    }

    fn raw_deviation(&self, t: f64, xgrid: Grid) -> Vec<f64> {
        let d = &self.dist;
        let m = d.rate();
        let h = self.grid.step();
        let tail_int = |a: f64| d.integrated_survival_tail(a);
        let direct: Vec<f64> = xgrid
            .nodes()
            .map(|x| (d.survival(t) - d.survival(t + x)) - m * (tail_int(t) - tail_int(t + x)))
            .collect();

        let aligned_t = self.grid.node_of(t);
        let stride = {
            let r = xgrid.step() / h;
            let k = r.round();
            ((r - k).abs() <= 1e-9 * k.max(1.0) && k >= 1.0).then_some(k as usize)
        };
        let integral: Vec<f64> = match (aligned_t, stride) {
            (Some(i), Some(stride)) => {
                let max_idx = i + stride * xgrid.count();
                let sf: Vec<f64> = (0..=max_idx).map(|k| d.survival(k as f64 * h)).collect();
                (0..xgrid.len())
                    .map(|l| {
                        if i == 0 {
                            return 0.0;
                        }
                        let shift = l * stride;
                        let w = |j: usize| (sf[i - j] - sf[i - j + shift]) * self.psi[j];
                        let mut s = 0.5 * (w(0) + w(i));
                        for j in 1..i {
                            s += w(j);
                        }
                        h * s
                    })
                    .collect()
            }
            _ => xgrid
                .nodes()
                .map(|x| self.integrate_to(t, |u| d.survival(t - u) - d.survival(t + x - u)))
                .collect(),
        };
        direct.iter().zip(&integral).map(|(a, b)| a + b).collect()
    }

    /// Trapezoidal `∫₀^{min(t,T)} g(u) ψ(u) du` on the solver nodes plus the partial last interval.
    fn integrate_to(&self, t: f64, g: impl Fn(f64) -> f64) -> f64 {
        let h = self.grid.step();
        let tt = t.min(self.grid.horizon());
        if tt <= 0.0 {
            return 0.0;
        }
        let full = ((tt / h).floor() as usize).min(self.grid.count());
        let mut s = 0.0;
        let mut prev = g(0.0) * self.psi[0];
        for j in 1..=full {
            let cur = g(j as f64 * h) * self.psi[j];
            s += 0.5 * h * (prev + cur);
            prev = cur;
        }
        let rest = tt - full as f64 * h;
        if rest > 1e-14 * h {
            let cur = g(tt) * interpolate(&self.psi, h, tt);
            s += 0.5 * rest * (prev + cur);
        }
        s
    }

    /// Density of `B_s` at `x`:
    /// `π(x) + f(s+x) − m F̄(s+x) + ∫₀^s f(s+x−u) ψ(u) du`, with `ψ = 0` past the horizon.
    pub fn recurrence_density(&self, s: f64, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        let coarse = self.raw_recurrence_density(s, x);
        match &self.fine {
            None => coarse,
            Some(f) => richardson(coarse, f.raw_recurrence_density(s, x)),
        }
    }

    fn raw_recurrence_density(&self, s: f64, x: f64) -> f64 {
        let d = &self.dist;
        let m = d.rate();
        let base = d.stationary_delay_density(x) + d.density(s + x) - m * d.survival(s + x);
        base + self.integrate_to(s, |u| d.density(s + x - u))
    }

    /// Densities of `B_t` at the solver nodes `x = 0, h, …, nx·h`, for node-aligned `t`.
    pub fn recurrence_density_nodes(&self, t: f64, nx: usize) -> Result<Vec<f64>> {
        self.check_time(t)?;
        let coarse = self.raw_density_nodes(t, nx, 1)?;
        match &self.fine {
            None => Ok(coarse),
            Some(f) => {
                let fine = f.raw_density_nodes(t, nx, 2)?;
                Ok(coarse.iter().zip(&fine).map(|(c, v)| richardson(*c, *v)).collect())
            }
        }
    }

    /// Densities at `x = l·stride·h` for `l = 0..=nx`.
    fn raw_density_nodes(&self, t: f64, nx: usize, stride: usize) -> Result<Vec<f64>> {
        let i = self
            .grid
            .node_of(t)
            .ok_or_else(|| Error::InvalidArgument(format!("t = {t} is not a node of the solver grid")))?;
        let d = &self.dist;
        let m = d.rate();
        let h = self.grid.step();
        let f: Vec<f64> = (0..=i + nx * stride).map(|k| d.density(k as f64 * h)).collect();
        Ok((0..=nx)
            .map(|l| {
                let off = l * stride;
                let x = off as f64 * h;
                let base = d.stationary_delay_density(x) + f[i + off] - m * d.survival(t + x);
                if i == 0 {
                    return base;
                }
                let w = |j: usize| f[i + off - j] * self.psi[j];
                let mut s = 0.5 * (w(0) + w(i));
                for j in 1..i {
                    s += w(j);
                }
                base + h * s
            })
            .collect())
    }

    /// Total variation between the law of `B_t` and `Π`.
    pub fn tv_to_stationary(&self, t: f64, xgrid: Grid) -> Result<TvReport> {
        self.check_time(t)?;
        let dev = self.stationary_deviation(t, xgrid);
        Ok(tv_from_deviation(&self.dist, &dev, xgrid))
    }

    /// Total variation together with `|TV_h − TV_{h/2}|` of the unextrapolated solves.
    pub fn tv_resolved(&self, t: f64, xgrid: Grid) -> Result<(TvReport, f64)> {
        let report = self.tv_to_stationary(t, xgrid)?;
        let resolution = match &self.fine {
            None => 0.0,
            Some(f) => {
                let coarse = tv_from_deviation(&self.dist, &self.raw_deviation(t, xgrid), xgrid);
                let fine = tv_from_deviation(&self.dist, &f.raw_deviation(t, xgrid), xgrid);
                (coarse.tv - fine.tv).abs()
            }
        };
        Ok((report, resolution))
    }

    /// `Φ*z` at the nodes in the split form `z(x) + m∫₀^x z + ∫₀^x z(x−u) ψ(u) du`.
    pub fn apply(&self, z: &dyn Fn(f64) -> f64) -> GridFunction {
        self.apply_resolved(z).0
    }

    /// `Φ*z` with the per-node difference between the `h` and `h/2` solves.
    pub fn apply_resolved(&self, z: &dyn Fn(f64) -> f64) -> (GridFunction, Vec<f64>) {
        let coarse = self.raw_apply(z);
        let (values, resolution) = self.combine_resolved(coarse, |f| {
            let v = f.raw_apply(z);
            (0..self.grid.len()).map(|k| v[2 * k]).collect()
        });
        (
            GridFunction::new(self.grid, values).expect("finite forcing"),
            resolution,
        )
    }

    fn raw_apply(&self, z: &dyn Fn(f64) -> f64) -> Vec<f64> {
        let m = self.dist.rate();
        let h = self.grid.step();
        let zv: Vec<f64> = self.grid.nodes().map(z).collect();
        let cum = cumulative_trapezoid(&zv, h);
        let conv = convolve_density_values(&self.psi, &zv, h);
        zv.iter()
            .zip(&cum)
            .zip(&conv)
            .map(|((a, c), p)| a + m * c + p)
            .collect()
    }

    /// `sup_x Φ((x−a−b, x−a]) − Φ([0,b])` over the grid; nonpositive up to discretization.
    pub fn subadditivity_excess(&self, a: f64, b: f64) -> f64 {
        let cum = self.phi.cumulative();
        let h = self.grid.step();
        let phi_b = self.phi.cumulative_at(b);
        let at = |x: f64| interpolate(&cum, h, x);
        self.grid
            .nodes()
            .map(|x| {
                let hi = x - a;
                let lo = hi - b;
                if hi < 0.0 {
                    return f64::NEG_INFINITY;
                }
                // Φ((lo, hi]) with Φ([0, y]) = 0 for y < 0.
                let lower = if lo < 0.0 { 0.0 } else { at(lo) };
                at(hi) - lower - phi_b
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Debug, Clone)]
pub struct RecurrenceLaw {
    pub t: f64,
    pub cdf: GridFunction,
    /// `P(B_t ≤ x) − Π(x)`.
    pub deviation: GridFunction,
    /// `P(B_t > x_q)`, lumped into the last node.
    pub tail_mass: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TvReport {
    pub tv: f64,
    /// Contribution of mass beyond the x-grid, `|D(x_q)|`.
    pub tail: f64,
    /// Mass of the negative part of the differentiated `B_t` density, a discretization diagnostic.
    pub negative_mass: f64,
}

/// `∫|D'| + |D(x_q)|` with `D'` by central differences (one-sided at the ends).
fn tv_from_deviation(d: &Distribution, dev: &[f64], xgrid: Grid) -> TvReport {
    let hx = xgrid.step();
    let n = dev.len();
    let deriv: Vec<f64> = (0..n)
        .map(|j| {
            if j == 0 {
                (dev[1] - dev[0]) / hx
            } else if j == n - 1 {
                (dev[n - 1] - dev[n - 2]) / hx
            } else {
                (dev[j + 1] - dev[j - 1]) / (2.0 * hx)
            }
        })
        .collect();
    let abs: Vec<f64> = deriv.iter().map(|v| v.abs()).collect();
    let neg: Vec<f64> = xgrid
        .nodes()
        .zip(&deriv)
        .map(|(x, dv)| (-(d.stationary_delay_density(x) + dv)).max(0.0))
        .collect();
    let tail = dev[n - 1].abs();
    TvReport {
        tv: trapezoid(&abs, hx) + tail,
        tail,
        negative_mass: trapezoid(&neg, hx),
    }
}

/// Convenience wrapper on the default grid.
pub fn forward_recurrence_cdf(d: &Distribution, t: f64, xgrid: Grid) -> Result<RecurrenceLaw> {
    RenewalModel::new(d, default_grid(d))?.forward_recurrence_cdf(t, xgrid)
}

/// Convenience wrapper on the default grid with Richardson extrapolation.
pub fn tv_to_stationary(d: &Distribution, t: f64, xgrid: Grid) -> Result<f64> {
    Ok(RenewalModel::extrapolated(d, default_grid(d))?
        .tv_to_stationary(t, xgrid)?
        .tv)
}

/// `Φ*z` on the grid from the renewal measure (plain trapezoidal convolution).
pub fn apply_renewal_measure(phi: &GridMeasure, z: &GridFunction) -> Result<GridFunction> {
    convolve_measure_function(phi, z)
}
