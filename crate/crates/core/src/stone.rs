//! Constructive Stone decomposition `Φ = Φ₁ + Φ₂` from a uniform component of
//! a convolution power of `F`.

use serde::Serialize;

use crate::distribution::Distribution;
use crate::error::{Error, Result};
use crate::grid::{convolve_measures, solve_measure_renewal, Grid, GridFunction, GridMeasure};
use crate::renewal::renewal_measure;

/// Safety factor applied to the scanned `b·min f^{*n}` so that `G₀ ≤ F^{*n₀}` strictly.
pub const MASS_MARGIN: f64 = 0.9;
/// Smallest acceptable component mass.
pub const MIN_MASS: f64 = 0.05;
/// Convolution powers tried by [`stone_decompose`].
pub const DEFAULT_N_MAX: usize = 8;

/// `G₀(dx) = (mass/b)·1_{(a,a+b)}(x) dx` dominated by `F^{*n0}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UniformComponent {
    pub n0: usize,
    pub a: f64,
    pub b: f64,
    pub mass: f64,
}

impl UniformComponent {
    /// Density level `mass/b` of `G₀`.
    pub fn level(&self) -> f64 {
        self.mass / self.b
    }

    /// `G₀` on the grid. Interior nodes carry the level, window ends half of it
    /// (the average of the one-sided limits), except node 0 whose half weight is
    /// already in the convolution weights. The weight mass is exactly `mass`.
    pub fn to_measure(&self, grid: Grid) -> Result<GridMeasure> {
        let (i0, i1) = self.window_nodes(grid)?;
        let g = self.level();
        let mut density = vec![0.0; grid.len()];
        for (k, v) in density.iter_mut().enumerate().take(i1 + 1).skip(i0) {
            *v = if (k == i0 && k > 0) || k == i1 { 0.5 * g } else { g };
        }
        GridMeasure::new(grid, 0.0, density)
    }

    fn window_nodes(&self, grid: Grid) -> Result<(usize, usize)> {
        match (grid.node_of(self.a), grid.node_of(self.a + self.b)) {
            (Some(i0), Some(i1)) if i1 > i0 => Ok((i0, i1)),
            _ => Err(Error::InvalidArgument(format!(
                "component window ({}, {}) is not aligned with the grid",
                self.a,
                self.a + self.b
            ))),
        }
    }
}

/// `Φ = Φ₁ + Φ₂` on a grid, with `Φ₂ = Σ_{k<n₀} F^{*k} * Φ₀^{(2)}` and
/// `Φ₀^{(2)} = Σ_n H^{*n}`, `H = F^{*n₀} − G₀`.
#[derive(Debug, Clone)]
pub struct StoneDecomposition {
    pub component: UniformComponent,
    /// `Φ₂`, a finite measure.
    pub phi2: GridMeasure,
    /// Density of `Φ − Φ₂`.
    pub phi1: GridFunction,
    /// `Φ₀^{(2)}`.
    pub phi0_2: GridMeasure,
    /// `Φ₀^{(2)} * (Φ * g₀)`, the independent closed form of `φ₁`.
    pub phi1_closed: GridFunction,
    /// The renewal measure being decomposed.
    pub phi: GridMeasure,
    /// `‖H‖` on the grid.
    pub h_norm: f64,
}

/// Scan `F^{*n}`, `n = 1..=n_max`, for the window `(a, a+b)` with the largest
/// `b·min f^{*n}` over `a ∈ {0, 0.1, …}·mean`, `b ∈ {0.25, 0.5, 1}·mean`; return
/// the first `n` whose margin-reduced mass reaches [`MIN_MASS`].
pub fn find_uniform_component(d: &Distribution, grid: Grid, n_max: usize) -> Result<UniformComponent> {
    if n_max == 0 {
        return Err(Error::InvalidArgument("n_max must be at least 1".into()));
    }
    let kernel = GridMeasure::from_distribution(d, grid);
    let mut power = kernel.clone();
    for n in 1..=n_max {
        if n > 1 {
            power = convolve_measures(&power, &kernel)?.measure;
        }
        if let Some(c) = best_window(&power, grid, d.mean(), n) {
            if c.mass >= MIN_MASS {
                return Ok(c);
            }
        }
    }
    Err(Error::NoComponentFound { n_max })
}

fn best_window(power: &GridMeasure, grid: Grid, mean: f64, n0: usize) -> Option<UniformComponent> {
    let h = grid.step();
    let f = power.density();
    let a_step = ((0.1 * mean / h).round() as usize).max(1);
    let mut best: Option<UniformComponent> = None;
    for frac in [0.25, 0.5, 1.0] {
        let nb = (frac * mean / h).round() as usize;
        if nb == 0 {
            continue;
        }
        let mut i0 = 0;
        while i0 + nb <= grid.count() {
            let lo = f[i0..=i0 + nb].iter().copied().fold(f64::INFINITY, f64::min);
            let raw = nb as f64 * h * lo;
            if lo > 0.0 && best.is_none_or(|b| MASS_MARGIN * raw > b.mass) {
                best = Some(UniformComponent {
                    n0,
                    a: grid.x(i0),
                    b: nb as f64 * h,
                    mass: MASS_MARGIN * raw,
                });
            }
            i0 += a_step;
        }
    }
    best
}

/// Decomposition with the component found by [`find_uniform_component`].
pub fn stone_decompose(d: &Distribution, grid: Grid) -> Result<StoneDecomposition> {
    let c = find_uniform_component(d, grid, DEFAULT_N_MAX)?;
    stone_decompose_with(d, grid, c)
}

/// Decomposition with a caller-supplied component.
pub fn stone_decompose_with(d: &Distribution, grid: Grid, component: UniformComponent) -> Result<StoneDecomposition> {
    let kernel = GridMeasure::from_distribution(d, grid);
    let mut powers = vec![GridMeasure::dirac(grid, 1.0)];
    for _ in 0..component.n0 {
        let next = convolve_measures(powers.last().expect("nonempty"), &kernel)?.measure;
        powers.push(next);
    }
    let f_n0 = powers.pop().expect("n0 >= 1");
    let g0 = component.to_measure(grid)?;
    let raw_h = f_n0.sub(&g0)?;
    if let Some((k, v)) = raw_h.density().iter().enumerate().find(|(_, v)| **v < -1e-8) {
        return Err(Error::NegativeH {
            x: grid.x(k),
            value: *v,
        });
    }
    let h_density: Vec<f64> = raw_h.density().iter().map(|v| v.max(0.0)).collect();
    let h = GridMeasure::new(grid, 0.0, h_density)?;
    let h_norm = h.weight_mass();
    let phi0_2 = solve_measure_renewal(&h)?;

    let mut phi2 = GridMeasure::dirac(grid, 0.0);
    for p in &powers {
        phi2 = phi2.add(&convolve_measures(p, &phi0_2)?.measure)?;
    }

    let phi = renewal_measure(d, grid)?;
    let phi1: Vec<f64> = phi.density().iter().zip(phi2.density()).map(|(a, b)| a - b).collect();
    let phi_g0 = convolve_measures(&phi, &g0)?.measure;
    let closed = convolve_measures(&phi0_2, &phi_g0)?.measure;

    Ok(StoneDecomposition {
        component,
        phi1: GridFunction::new(grid, phi1)?,
        phi1_closed: closed.density_function(),
        phi2,
        phi0_2,
        phi,
        h_norm,
    })
}

impl StoneDecomposition {
    pub fn grid(&self) -> Grid {
        self.phi.grid()
    }

    /// Full-line `‖Φ₂‖ = n₀/‖G₀‖`.
    pub fn phi2_norm(&self) -> f64 {
        self.component.n0 as f64 / self.component.mass
    }

    /// In-horizon mass of `Φ₂` (convolution weights).
    pub fn phi2_in_horizon(&self) -> f64 {
        self.phi2.weight_mass()
    }

    /// Mass of `Φ₂` beyond the horizon, `‖Φ₂‖` minus the in-horizon mass.
    pub fn truncation_bound(&self) -> f64 {
        (self.phi2_norm() - self.phi2.mass()).max(0.0)
    }

    /// `sup_k |Φ₁([0,x_k]) + Φ₂([0,x_k]) − Φ([0,x_k])| / Φ([0,x_k])` with `Φ₁`
    /// taken from the closed form `Φ₀^{(2)} * Φ * G₀`.
    pub fn reconstruction_error(&self) -> f64 {
        let h = self.grid().step();
        let p1 = crate::grid::cumulative_trapezoid(self.phi1_closed.values(), h);
        let p2 = self.phi2.cumulative();
        let p = self.phi.cumulative();
        p1.iter()
            .zip(&p2)
            .zip(&p)
            .map(|((a, b), c)| (a + b - c).abs() / c)
            .fold(0.0, f64::max)
    }

    /// `sup|φ₁ − φ₁^{closed}| / sup|φ₁|`.
    pub fn closed_form_deviation(&self) -> f64 {
        let scale = self.phi1.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let diff = self.phi1.sup_distance(&self.phi1_closed).expect("same grid");
        diff / scale
    }

    /// `(mass/b)·Φ([0,b])·‖Φ₀^{(2)}‖`, the boundedness bound for `φ₁` (times `n₀`
    /// for the `F^{*k}` shifts, each of mass at most one).
    pub fn phi1_bound(&self) -> f64 {
        let c = &self.component;
        c.level() * self.phi.cumulative_at(c.b) * c.n0 as f64 / c.mass
    }

    pub fn phi1_sup(&self) -> f64 {
        self.phi1.values().iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// `Φ₂([x, ∞))`: in-horizon mass beyond `x` plus the truncation bound.
pub fn phi2_tail(dec: &StoneDecomposition, x: f64) -> f64 {
    let grid = dec.grid();
    let trunc = dec.truncation_bound();
    if x >= grid.horizon() {
        return trunc;
    }
    if x <= 0.0 {
        return dec.phi2.mass() + trunc;
    }
    (dec.phi2.mass() - dec.phi2.cumulative_at(x)).max(0.0) + trunc
}
