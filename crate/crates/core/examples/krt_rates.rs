//! Decay of the key renewal error `|Φ*z(x) − m∫z|` for `z(y) = (1+y)^{−r}`.

use renewal_lab::asymptotics::{fit_slope, RateStudy};
use renewal_lab::experiments::rate_window;
use renewal_lab::{Distribution, Grid};

fn main() -> renewal_lab::Result<()> {
    let d = Distribution::exponential(1.0)?;
    let study = RateStudy::new(&d, Grid::with_horizon(0.01, 80.0)?)?;
    let xs = rate_window(&d);
    for r in [2.0, 4.0] {
        let pair = study.krt(r, &xs)?;
        let fit = fit_slope(&pair.fine, (xs[0], xs[xs.len() - 1]), 0.0)?;
        println!(
            "r = {r}: slope {:.3} (predicted {}), r2 = {:.5}",
            fit.slope,
            1.0 - r,
            fit.r2
        );
    }
    Ok(())
}
