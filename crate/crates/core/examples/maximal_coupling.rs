//! Maximal coupling of two gridded laws: the pair disagrees with probability tv/2.

use renewal_lab::coupling::MaximalCoupling;
use renewal_lab::rng::stream;
use renewal_lab::{Grid, GridMeasure};

fn main() -> renewal_lab::Result<()> {
    let g = Grid::new(0.01, 2000)?;
    let normalized = |m: GridMeasure| {
        let mass = m.mass();
        m.scaled(1.0 / mass)
    };
    let p = normalized(GridMeasure::from_density(g, |x| x * (-x).exp())?);
    let q = normalized(GridMeasure::from_density(g, |x| 0.5 * (-0.5 * x).exp())?);
    let mc = MaximalCoupling::new(&p, &q)?;
    let n = 50_000;
    let mut rng = stream(1, 0);
    let misses = (0..n).filter(|_| !mc.sample(&mut rng).coupled).count();
    println!("tv/2 = {:.4}, overlap = {:.4}", 0.5 * p.tv_distance(&q)?, mc.overlap());
    println!("P(X != Y) over {n} draws = {:.4}", misses as f64 / n as f64);
    Ok(())
}
