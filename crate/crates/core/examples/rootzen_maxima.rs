//! Maximum cycle hazard over `[0,T]` against `G(x)^{mT}` with `G` standard exponential.

use renewal_lab::compensator::{rootzen_uniform_error, MaxStatistic};
use renewal_lab::Distribution;

fn main() -> renewal_lab::Result<()> {
    let d = Distribution::gamma(2.0, 1.0)?;
    for t in [10.0, 40.0, 160.0] {
        let rep = rootzen_uniform_error(&d, t, 3000, MaxStatistic::MaxXi, 5)?;
        println!("T = {t:>5}: sup_x |F_T(x) - G(x)^(mT)| = {:.4}", rep.error);
    }
    Ok(())
}
