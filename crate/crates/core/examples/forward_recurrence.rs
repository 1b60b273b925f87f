//! Law of the forward recurrence time `B_t` from the grid solver against simulation,
//! and its total variation distance to the stationary delay law.

use renewal_lab::experiments::simulate_residuals;
use renewal_lab::renewal::{default_grid, RenewalModel};
use renewal_lab::stats::{ks_critical, ks_statistic};
use renewal_lab::Distribution;

fn main() -> renewal_lab::Result<()> {
    let d = Distribution::uniform(0.5, 1.5)?;
    let model = RenewalModel::extrapolated(&d, default_grid(&d))?;
    let xg = model.default_x_grid();
    let n = 20_000;
    for t in [0.7, 2.0, 5.0, 10.0] {
        let law = model.forward_recurrence_cdf(t, xg)?;
        let draws = simulate_residuals(&d, t, n, 3)?;
        let ks = ks_statistic(&draws, |x| law.cdf.interpolate(x));
        let tv = model.tv_to_stationary(t, xg)?.tv;
        println!(
            "t = {t:>4}: KS = {ks:.4} (critical {:.4}), TV to stationary = {tv:.3e}",
            ks_critical(n)
        );
    }
    Ok(())
}
