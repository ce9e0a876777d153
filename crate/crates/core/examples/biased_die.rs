// The classical warm-up: a die whose faces average to 2.5 instead of 3.5.
//
// Run with `cargo run --example biased_die`.

use lazy_ensemble::die::{solve_beta, MeanConstraint, DEFAULT_MEAN_TOL};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let faces = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
    for mean in [2.5, 3.5, 4.5] {
        let die = solve_beta(&faces, MeanConstraint::new(mean, &faces)?, DEFAULT_MEAN_TOL)?;
        println!(
            "mean {mean}: beta = {:.10}, entropy = {:.10} nats",
            die.beta,
            die.entropy()
        );
        let probs: Vec<String> = die.probs.iter().map(|p| format!("{p:.6}")).collect();
        println!("  p = [{}]", probs.join(", "));
    }

    // Means at or beyond the extreme faces have no Gibbs solution.
    match MeanConstraint::new(6.0, &faces) {
        Err(e) => println!("mean 6: {e}"),
        Ok(_) => unreachable!("6 is the largest face"),
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
