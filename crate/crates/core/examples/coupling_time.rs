//! Couples a pure and a stationary renewal process and reports the coupling time.

use renewal_lab::coupling::{coupling_moment, coupling_tail, find_common_component, Coupler};
use renewal_lab::renewal::default_grid;
use renewal_lab::Distribution;

fn main() -> renewal_lab::Result<()> {
    let d = Distribution::gamma(2.0, 1.0)?;
    let comp = find_common_component(&d, default_grid(&d))?;
    let p = comp.params;
    println!("common component: b = {}, d = {}, delta = {:.4}", p.b, p.d, p.delta);
    let traces = Coupler::new(&d, p)?.simulate_many(4000, 9)?;
    let first = &traces[0];
    println!(
        "first trace: sigma = {}, coupling time = {:.3}",
        first.sigma, first.coupling_time
    );
    for t in [5.0, 10.0, 20.0, 40.0] {
        let tail = coupling_tail(&traces, t)?;
        println!("  P(T > {t:>4}) = {:.4} +- {:.4}", tail.estimate, tail.se);
    }
    for q in [1.0, 2.0] {
        let m = coupling_moment(&traces, q)?;
        println!("  E[T^{q}] = {:.3} +- {:.3}", m.mean, m.se);
    }
    Ok(())
}
