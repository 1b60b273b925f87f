//! Renewal function of gamma(2,1) against its closed form and the two-moment asymptote.

use renewal_lab::renewal::{default_grid, renewal_measure};
use renewal_lab::Distribution;

fn main() -> renewal_lab::Result<()> {
    let d = Distribution::gamma(2.0, 1.0)?;
    let grid = default_grid(&d);
    let phi = renewal_measure(&d, grid)?;
    let m = d.rate();
    let second = d.moment(2.0).value;
    println!("{:>8} {:>12} {:>12} {:>12}", "t", "Phi([0,t])", "exact", "asymptote");
    for t in [0.5f64, 1.0, 2.0, 5.0, 10.0, 50.0, 90.0] {
        let exact = 1.0 + t / 2.0 - (1.0 - (-2.0 * t).exp()) / 4.0;
        let asym = m * t + m * m * second / 2.0;
        println!("{t:>8} {:>12.6} {exact:>12.6} {asym:>12.6}", phi.cumulative_at(t));
    }
    Ok(())
}
