//! Splits the renewal measure into a part with a bounded density and a finite part.

use renewal_lab::renewal::default_grid;
use renewal_lab::stone::{phi2_tail, stone_decompose};
use renewal_lab::Distribution;

fn main() -> renewal_lab::Result<()> {
    let d = Distribution::gamma(2.0, 1.0)?;
    let dec = stone_decompose(&d, default_grid(&d))?;
    let c = &dec.component;
    println!(
        "uniform component of F^*{}: level {:.4} on ({:.3}, {:.3}), mass {:.4}",
        c.n0,
        c.level(),
        c.a,
        c.a + c.b,
        c.mass
    );
    println!("||Phi2|| = n0/mass = {:.6}", dec.phi2_norm());
    println!("reconstruction error {:.2e}", dec.reconstruction_error());
    println!("sup phi1 = {:.4} <= bound {:.4}", dec.phi1_sup(), dec.phi1_bound());
    for x in [1.0, 5.0, 20.0, 50.0] {
        let k = dec.grid().node_of(x).expect("on grid");
        println!(
            "  x = {x:>4}: phi1 = {:.5} (m = {}), Phi2 tail = {:.3e}",
            dec.phi1.value(k),
            d.rate(),
            phi2_tail(&dec, x)
        );
    }
    Ok(())
}
