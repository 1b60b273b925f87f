//! Compensator of a renewal process: cycle hazards are standard exponential and
//! `N(t) - 1 - Λ(t)` is centred.

use renewal_lab::compensator::{compensator_at, cycle_hazards_pooled, simulate_path, DelayMode};
use renewal_lab::rng::stream;
use renewal_lab::stats::{ks_critical, ks_statistic, mean_sd};
use renewal_lab::Distribution;

fn main() -> renewal_lab::Result<()> {
    let d = Distribution::shifted_pareto(3.5, 2.5)?;
    let t = 20.0;
    let mut xi = Vec::new();
    let mut centred = Vec::new();
    for i in 0..5000 {
        let path = simulate_path(&d, t, DelayMode::Zero, &mut stream(4, i))?;
        xi.extend(cycle_hazards_pooled(&path, &d)?.xi);
        centred.push(path.count(t) as f64 - 1.0 - compensator_at(&path, &d, t)?);
    }
    let ks = ks_statistic(&xi, |x| 1.0 - (-x).exp());
    println!(
        "{} cycle hazards: KS vs Exp(1) = {ks:.4} (critical {:.4})",
        xi.len(),
        ks_critical(xi.len())
    );
    let (mean, sd) = mean_sd(&centred);
    println!("N(t) - 1 - Lambda(t) at t = {t}: mean {mean:.4}, sd {sd:.3}");
    Ok(())
}
