//! Solves the renewal equation with the forcing `m∫₀^t F̄`, whose solution is `mt`,
//! and shows the second-order error under step halving.

use renewal_lab::renewal::{linear_forcing, solve_renewal_equation};
use renewal_lab::{Distribution, Grid};

fn main() -> renewal_lab::Result<()> {
    for d in [Distribution::gamma(3.0, 1.5)?, Distribution::shifted_pareto(3.5, 2.5)?] {
        println!("{d}");
        for h in [0.04, 0.02, 0.01] {
            let grid = Grid::with_horizon(h, 40.0)?;
            let sol = solve_renewal_equation(&d, &linear_forcing(&d, grid))?;
            let err = sol
                .solution
                .values()
                .iter()
                .enumerate()
                .map(|(k, z)| (z - d.rate() * grid.x(k)).abs())
                .fold(0.0, f64::max);
            println!(
                "  h = {h:<5} max|Z(t) - mt| = {err:.3e}  residual = {:.1e}",
                sol.residual
            );
        }
    }
    Ok(())
}
