// Draw states from a solved ensemble and compare their average projector
// with the target, entry by entry.
//
// Run with `cargo run --release --example sample_and_verify`.

use lazy_ensemble::hermitian::{validate_density, ComplexMatrix, DENSITY_TOL};
use lazy_ensemble::sampler::{estimate_kl, sample_with, SampleOptions};
use lazy_ensemble::solver::{kl_from_uniform, solve, DEFAULT_MAX_ITER, DEFAULT_TOL};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let rho = validate_density(ComplexMatrix::from_real_diagonal(&[0.5, 0.3, 0.2])?, DENSITY_TOL)?;
    let ens = solve(&rho, DEFAULT_TOL, DEFAULT_MAX_ITER)?.ensemble;

    let batch = sample_with(&ens, 200_000, 42, SampleOptions::default())?;
    println!(
        "accepted {} of {} proposals ({:.4})",
        batch.count, batch.proposals, batch.accept_rate
    );

    let z = batch.z_scores(rho.matrix())?;
    for e in &z.entries {
        println!("  ({},{}) {:?}: z = {:+.3}", e.row, e.col, e.part, e.z);
    }
    println!(
        "max |z| = {:.3} ({})",
        z.max_abs,
        if z.max_abs <= 4.0 { "pass" } else { "fail" }
    );

    let kl = kl_from_uniform(&ens, &rho)?.kl;
    let est = estimate_kl(&ens, &batch)?;
    println!("KL = {kl:.6}, Monte Carlo {:.6} +- {:.6}", est.estimate, est.std_error);
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
