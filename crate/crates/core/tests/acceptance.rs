//! Runs the twelve acceptance criteria and prints one PASS/FAIL line for each.
//! Set `RENEWAL_LAB_SEED` to change the base seed.

use renewal_lab::acceptance::run_all_with;
use renewal_lab::rng::seed_from_env;

#[test]
fn acceptance_suite() {
    let seed = seed_from_env(0);
    let results = run_all_with(seed, |r| {
        println!("{}", r.line());
        if !r.check.passed {
            print!("{}", r.check.render());
        }
    });
    let failed: Vec<String> = results
        .iter()
        .filter(|r| !r.check.passed)
        .map(|r| format!("{} {}", r.id, r.check.name))
        .collect();
    println!(
        "{} of {} criteria passed (seed {seed})",
        results.len() - failed.len(),
        results.len()
    );
    assert!(failed.is_empty(), "failed criteria: {}", failed.join(", "));
}
