//! Uniform grids on `[0, T]` and the functions and measures that live on them.
//!
//! A [`GridMeasure`] is an atom at the origin plus a density sampled at the
//! nodes. Measure–measure convolution is carried out in the weighted sequence
//! `w₀ = h·a₀/2, w_k = h·a_k` so that products of masses are exact (up to the
//! horizon) and Volterra solves such as `Ψ = δ₀ + K*Ψ` reproduce geometric-series
//! masses to roundoff. Measure–function convolution is the plain trapezoidal rule.

use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::distribution::Distribution;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    step: f64,
    count: usize,
}

impl Grid {
    pub fn new(step: f64, count: usize) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::InvalidGrid(format!("step must be > 0, got {step}")));
        }
        if count == 0 {
            return Err(Error::InvalidGrid("count must be >= 1".into()));
        }
        Ok(Self { step, count })
    }

    /// Grid with the given step whose horizon is `horizon` rounded to a whole number of steps.
    pub fn with_horizon(step: f64, horizon: f64) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::InvalidGrid(format!("horizon must be > 0, got {horizon}")));
        }
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::InvalidGrid(format!("step must be > 0, got {step}")));
        }
        Self::new(step, (horizon / step).round().max(1.0) as usize)
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Number of nodes, `count + 1`.
    pub fn len(&self) -> usize {
        self.count + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn horizon(&self) -> f64 {
        self.step * self.count as f64
    }

    pub fn x(&self, k: usize) -> f64 {
        k as f64 * self.step
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |k| self.x(k))
    }

    /// Node index of `x` when `x` lies on the grid to relative precision 1e-9.
    pub fn node_of(&self, x: f64) -> Option<usize> {
        let r = x / self.step;
        let k = r.round();
        if k >= 0.0 && (r - k).abs() <= 1e-9 * k.max(1.0) && (k as usize) <= self.count {
            Some(k as usize)
        } else {
            None
        }
    }

    /// Grid with half the step over the same horizon.
    pub fn refined(&self) -> Self {
        Self {
            step: 0.5 * self.step,
            count: 2 * self.count,
        }
    }

    /// Same step, truncated or extended to `count` intervals.
    pub fn with_count(&self, count: usize) -> Result<Self> {
        Self::new(self.step, count)
    }

    pub fn same_as(&self, other: &Grid) -> bool {
        self.count == other.count && (self.step - other.step).abs() <= 1e-12 * self.step
    }

    fn check(&self, other: &Grid) -> Result<()> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(Error::IncompatibleGrids {
                left_step: self.step,
                left_count: self.count,
                right_step: other.step,
                right_count: other.count,
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid(format!("non-finite value at node {k}")));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.nodes().map(f).collect())
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn value(&self, k: usize) -> f64 {
        self.values[k]
    }

    pub fn last(&self) -> f64 {
        self.values[self.grid.count]
    }

    /// Linear interpolation; clamps to the end values outside `[0, T]`.
    pub fn interpolate(&self, x: f64) -> f64 {
        interpolate(&self.values, self.grid.step, x)
    }

    /// Trapezoidal `∫₀^T`.
    pub fn integral(&self) -> f64 {
        trapezoid(&self.values, self.grid.step)
    }

    /// Running trapezoidal integral `x ↦ ∫₀^x`.
    pub fn cumulative_integral(&self) -> GridFunction {
        GridFunction {
            grid: self.grid,
            values: cumulative_trapezoid(&self.values, self.grid.step),
        }
    }

    pub fn sup_distance(&self, other: &GridFunction) -> Result<f64> {
        self.grid.check(&other.grid)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x,value")?;
        for (k, v) in self.values.iter().enumerate() {
            writeln!(w, "{},{}", self.grid.x(k), v)?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_csv(f)
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let (_, xs, vs) = read_columns(r, "x,value")?;
        let grid = grid_from_nodes(&xs)?;
        Self::new(grid, vs)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridMeasure {
    grid: Grid,
    atom0: f64,
    density: Vec<f64>,
}

/// Result of a truncated convolution together with its mass bookkeeping.
#[derive(Debug, Clone)]
pub struct Convolution {
    pub measure: GridMeasure,
    /// Mass of the result inside `[0, T]`.
    pub in_horizon_mass: f64,
    /// Product of input masses minus the in-horizon mass.
    pub truncated_mass: f64,
}

impl GridMeasure {
    /// Nonnegative measure; rejects negative or non-finite entries.
    pub fn new(grid: Grid, atom0: f64, density: Vec<f64>) -> Result<Self> {
        if density.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} density values, got {}",
                grid.len(),
                density.len()
            )));
        }
        if !(atom0.is_finite() && atom0 >= 0.0) {
            return Err(Error::InvalidGrid(format!("atom0 must be >= 0, got {atom0}")));
        }
        if let Some(k) = density.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidGrid(format!(
                "density must be finite and >= 0, node {k} has {}",
                density[k]
            )));
        }
        Ok(Self { grid, atom0, density })
    }

    /// Signed intermediate results; callers guarantee finiteness.
    pub(crate) fn from_parts(grid: Grid, atom0: f64, density: Vec<f64>) -> Self {
        debug_assert_eq!(density.len(), grid.len());
        Self { grid, atom0, density }
    }

    pub fn dirac(grid: Grid, mass: f64) -> Self {
        Self::from_parts(grid, mass, vec![0.0; grid.len()])
    }

    pub fn from_density(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, 0.0, grid.nodes().map(f).collect())
    }

    /// Gridded law of `d`: density sampled at the nodes, with the two one-sided
    /// limits averaged at jump nodes, then reweighted by `a + b·e^{−x/mean}` so
    /// that its convolution-weight mass and first moment equal `F(T)` and
    /// `∫₀^T x F(dx)` exactly, up to the half cell beyond `T` that the full weight
    /// of the last node stands for. Matching both keeps the discrete renewal
    /// density converging to the exact rate instead of an `O(h²)`-shifted one.
    pub fn from_distribution(d: &Distribution, grid: Grid) -> Self {
        let h = grid.step;
        let mut density: Vec<f64> = grid.nodes().map(|x| d.density(x)).collect();
        for j in d.density_jumps() {
            if let Some(k) = grid.node_of(j) {
                if k > 0 {
                    let left = d.density(j - 1e-9 * j.max(1.0));
                    density[k] = 0.5 * (left + d.density(j));
                }
            }
        }
        let t = grid.horizon();
        // The last node carries a full weight h, so the targets include its half-cell
        // `h f(T)/2`; this keeps the remaining discretization error a clean O(h²).
        let edge = 0.5 * h * density[grid.count()];
        let target0 = d.cdf(t) + edge;
        let target1 = d.integrated_survival(t) - t * d.survival(t) + t * edge;
        let scale = d.mean();
        let (mut s0, mut s0g, mut s1, mut s1g) = (0.0, 0.0, 0.0, 0.0);
        for (k, f) in density.iter().enumerate() {
            let w = if k == 0 { 0.5 * h } else { h } * f;
            let x = grid.x(k);
            let g = (-x / scale).exp();
            s0 += w;
            s0g += w * g;
            s1 += w * x;
            s1g += w * x * g;
        }
        let det = s0 * s1g - s0g * s1;
        let (a, b) = if s0 <= 0.0 {
            // Nothing on the grid to reweight.
            (1.0, 0.0)
        } else if det.abs() > 1e-14 * (s0 * s1g).abs() {
            (
                (target0 * s1g - s0g * target1) / det,
                (s0 * target1 - s1 * target0) / det,
            )
        } else {
            (target0 / s0, 0.0)
        };
        for (k, v) in density.iter_mut().enumerate() {
            *v *= a + b * (-grid.x(k) / scale).exp();
        }
        Self::from_parts(grid, 0.0, density)
    }

    /// Stationary delay law `π = m(1 − F)` on the grid, rescaled to mass `Π(T)`.
    pub fn stationary_from_distribution(d: &Distribution, grid: Grid) -> Self {
        let mut density: Vec<f64> = grid.nodes().map(|x| d.stationary_delay_density(x)).collect();
        let mass = trapezoid(&density, grid.step);
        let s = d.stationary_delay_cdf(grid.horizon()) / mass;
        density.iter_mut().for_each(|v| *v *= s);
        Self::from_parts(grid, 0.0, density)
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn atom0(&self) -> f64 {
        self.atom0
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn density_function(&self) -> GridFunction {
        GridFunction {
            grid: self.grid,
            values: self.density.clone(),
        }
    }

    /// `atom0 + ∫₀^T density` (trapezoidal).
    pub fn mass(&self) -> f64 {
        self.atom0 + trapezoid(&self.density, self.grid.step)
    }

    /// `k ↦ μ([0, x_k])`.
    pub fn cumulative(&self) -> Vec<f64> {
        let mut c = cumulative_trapezoid(&self.density, self.grid.step);
        c.iter_mut().for_each(|v| *v += self.atom0);
        c
    }

    /// `μ([0, x])` with linear interpolation between nodes.
    pub fn cumulative_at(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        interpolate(&self.cumulative(), self.grid.step, x)
    }

    /// Mass in `[x_k, T]`, excluding the atom unless `k = 0`.
    pub fn tail_from(&self, k: usize) -> f64 {
        let h = self.grid.step;
        let n = self.grid.count;
        if k > n {
            return 0.0;
        }
        let mut s = 0.0;
        for j in k..n {
            s += 0.5 * h * (self.density[j] + self.density[j + 1]);
        }
        if k == 0 {
            s += self.atom0;
        }
        s
    }

    pub fn is_nonnegative(&self) -> bool {
        self.atom0 >= 0.0 && self.density.iter().all(|v| *v >= 0.0)
    }

    pub fn scaled(&self, c: f64) -> GridMeasure {
        Self::from_parts(self.grid, c * self.atom0, self.density.iter().map(|v| c * v).collect())
    }

    pub fn add(&self, other: &GridMeasure) -> Result<GridMeasure> {
        self.grid.check(&other.grid)?;
        Ok(Self::from_parts(
            self.grid,
            self.atom0 + other.atom0,
            self.density.iter().zip(&other.density).map(|(a, b)| a + b).collect(),
        ))
    }

    pub fn sub(&self, other: &GridMeasure) -> Result<GridMeasure> {
        self.grid.check(&other.grid)?;
        Ok(Self::from_parts(
            self.grid,
            self.atom0 - other.atom0,
            self.density.iter().zip(&other.density).map(|(a, b)| a - b).collect(),
        ))
    }

    /// Trapezoidal total variation `|Δatom| + ∫|Δdensity|`, for probability measures.
    pub fn tv_distance(&self, other: &GridMeasure) -> Result<f64> {
        self.grid.check(&other.grid)?;
        for m in [self.mass(), other.mass()] {
            if (m - 1.0).abs() > 1e-6 {
                return Err(Error::NotNormalized { mass: m });
            }
        }
        let diff: Vec<f64> = self
            .density
            .iter()
            .zip(&other.density)
            .map(|(a, b)| (a - b).abs())
            .collect();
        Ok((self.atom0 - other.atom0).abs() + trapezoid(&diff, self.grid.step))
    }

    /// `‖μ ∧ ν‖`, the mass of the pointwise minimum.
    pub fn overlap(&self, other: &GridMeasure) -> Result<f64> {
        self.grid.check(&other.grid)?;
        let m: Vec<f64> = self
            .density
            .iter()
            .zip(&other.density)
            .map(|(a, b)| a.min(*b))
            .collect();
        Ok(self.atom0.min(other.atom0) + trapezoid(&m, self.grid.step))
    }

    /// Sum of the convolution weights; equals `mass()` up to the half weight
    /// trapezoid puts on the last node.
    pub fn weight_mass(&self) -> f64 {
        let h = self.grid.step;
        self.atom0 + h * (self.density.iter().sum::<f64>() - 0.5 * self.density[0])
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# atom0={}", self.atom0)?;
        writeln!(w, "x,density")?;
        for (k, v) in self.density.iter().enumerate() {
            writeln!(w, "{},{}", self.grid.x(k), v)?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_csv(f)
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let (atom, xs, vs) = read_columns(r, "x,density")?;
        let atom = atom.ok_or_else(|| Error::InvalidGrid("missing `# atom0=` header".into()))?;
        let grid = grid_from_nodes(&xs)?;
        Self::new(grid, atom, vs)
    }
}

/// `μ * ν` truncated at the horizon.
///
/// Atom `αβ`; density `αb + βa + h Σ ã_i b̃_{k−i}` with `ã₀ = a₀/2`, which is the
/// trapezoidal convolution at every node `k ≥ 1` and `h a₀ b₀ / 2` at `k = 0`.
pub fn convolve_measures(mu: &GridMeasure, nu: &GridMeasure) -> Result<Convolution> {
    mu.grid.check(&nu.grid)?;
    let h = mu.grid.step;
    let n = mu.grid.len();
    let a = &mu.density;
    let b = &nu.density;
    let mut aw = a.clone();
    let mut bw = b.clone();
    aw[0] *= 0.5;
    bw[0] *= 0.5;
    let mut out = vec![0.0; n];
    for k in 0..n {
        let mut s = 0.0;
        for i in 0..=k {
            s += aw[i] * bw[k - i];
        }
        out[k] = mu.atom0 * b[k] + nu.atom0 * a[k] + h * s;
    }
    out[0] = mu.atom0 * b[0] + nu.atom0 * a[0] + 2.0 * h * aw[0] * bw[0];
    let measure = GridMeasure::from_parts(mu.grid, mu.atom0 * nu.atom0, out);
    let in_horizon_mass = measure.mass();
    Ok(Convolution {
        truncated_mass: mu.mass() * nu.mass() - in_horizon_mass,
        in_horizon_mass,
        measure,
    })
}

/// `(Φ*z)(x_k) = atom0·z_k + trapezoid over u ∈ [0, x_k] of z(x_k − u)·φ(u)`.
pub fn convolve_measure_function(phi: &GridMeasure, z: &GridFunction) -> Result<GridFunction> {
    phi.grid.check(&z.grid)?;
    let values = convolve_density_values(&phi.density, &z.values, phi.grid.step)
        .into_iter()
        .zip(&z.values)
        .map(|(c, zk)| c + phi.atom0 * zk)
        .collect();
    Ok(GridFunction { grid: z.grid, values })
}

/// Trapezoidal `∫₀^{x_k} a(u) b(x_k − u) du` for every node.
pub(crate) fn convolve_density_values(a: &[f64], b: &[f64], h: f64) -> Vec<f64> {
    let n = a.len().min(b.len());
    let mut out = vec![0.0; n];
    for k in 1..n {
        let mut s = 0.5 * (a[0] * b[k] + a[k] * b[0]);
        for j in 1..k {
            s += a[j] * b[k - j];
        }
        out[k] = h * s;
    }
    out
}

/// Solves `Ψ = δ₀ + K*Ψ` in the weighted convolution of [`convolve_measures`],
/// so that the result is the truncated series `Σ K^{*n}`.
pub fn solve_measure_renewal(kernel: &GridMeasure) -> Result<GridMeasure> {
    let h = kernel.grid.step;
    let n = kernel.grid.len();
    let kap = kernel.atom0;
    if kap >= 1.0 {
        return Err(Error::StepTooCoarse { diagonal: 1.0 - kap });
    }
    let k = &kernel.density;
    let diagonal = 1.0 - kap - 0.5 * h * k[0];
    if diagonal <= 0.0 {
        return Err(Error::StepTooCoarse { diagonal });
    }
    let atom = 1.0 / (1.0 - kap);
    let mut psi = vec![0.0; n];
    // Weighted convolution at node 0 contributes h·k₀ψ₀/2.
    psi[0] = atom * k[0] / diagonal;
    for m in 1..n {
        let mut s = 0.5 * k[m] * psi[0];
        for j in 1..m {
            s += k[j] * psi[m - j];
        }
        psi[m] = (atom * k[m] + h * s) / diagonal;
    }
    Ok(GridMeasure::from_parts(kernel.grid, atom, psi))
}

pub fn trapezoid(v: &[f64], h: f64) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    h * (v.iter().sum::<f64>() - 0.5 * (v[0] + v[v.len() - 1]))
}

pub fn cumulative_trapezoid(v: &[f64], h: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(v.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in v.windows(2) {
        acc += 0.5 * h * (w[0] + w[1]);
        out.push(acc);
    }
    out.truncate(v.len());
    out
}

pub(crate) fn interpolate(v: &[f64], h: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return v[0];
    }
    let r = x / h;
    let k = r.floor() as usize;
    if k + 1 >= v.len() {
        return v[v.len() - 1];
    }
    let t = r - k as f64;
    v[k] * (1.0 - t) + v[k + 1] * t
}

fn read_columns<R: BufRead>(r: R, header: &str) -> Result<(Option<f64>, Vec<f64>, Vec<f64>)> {
    let mut atom = None;
    let mut xs = Vec::new();
    let mut vs = Vec::new();
    let mut seen_header = false;
    for line in r.lines() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if let Some(v) = rest.trim().strip_prefix("atom0=") {
                atom = Some(
                    v.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::InvalidGrid(format!("bad atom0 header: {e}")))?,
                );
            }
            continue;
        }
        if !seen_header {
            if line != header {
                return Err(Error::InvalidGrid(format!("expected header `{header}`, got `{line}`")));
            }
            seen_header = true;
            continue;
        }
        let mut it = line.split(',');
        let parse = |s: Option<&str>| -> Result<f64> {
            s.ok_or_else(|| Error::InvalidGrid(format!("short row `{line}`")))?
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::InvalidGrid(format!("bad number in `{line}`: {e}")))
        };
        xs.push(parse(it.next())?);
        vs.push(parse(it.next())?);
    }
    Ok((atom, xs, vs))
}

fn grid_from_nodes(xs: &[f64]) -> Result<Grid> {
    if xs.len() < 2 || xs[0] != 0.0 {
        return Err(Error::InvalidGrid("need at least two nodes starting at 0".into()));
    }
    let grid = Grid::new(xs[1], xs.len() - 1)?;
    for (k, x) in xs.iter().enumerate() {
        if (x - grid.x(k)).abs() > 1e-9 * grid.x(k).max(grid.step) {
            return Err(Error::InvalidGrid(format!("node {k} at {x} is off the uniform grid")));
        }
    }
    Ok(grid)
}
