// Find the ensemble parameter `B` for a qubit and a random qutrit, check the
// round trip and report the divergence from the uniform ensemble.
//
// Run with `cargo run --example solve_density`.

use lazy_ensemble::hermitian::{validate_density, ComplexMatrix, HermitianMatrix, DENSITY_TOL};
use lazy_ensemble::sampler::{haar_unitary, stream_rng};
use lazy_ensemble::solver::{ensemble_average, kl_from_uniform, solve, DEFAULT_MAX_ITER, DEFAULT_TOL};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let qubit = validate_density(ComplexMatrix::from_real_diagonal(&[0.7, 0.3])?, DENSITY_TOL)?;

    let u = haar_unitary(3, &mut stream_rng(7, 0));
    let qutrit = HermitianMatrix::from_spectrum(&[0.6, 0.3, 0.1], &u);
    let qutrit = validate_density(qutrit.into_complex(), DENSITY_TOL)?;

    for (name, rho) in [("qubit", qubit), ("qutrit", qutrit)] {
        let sol = solve(&rho, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
        let ens = &sol.ensemble;
        let back = ensemble_average(ens);
        let err = back
            .matrix()
            .as_complex()
            .sub(rho.matrix().as_complex())
            .frobenius_norm();
        let kl = kl_from_uniform(ens, &rho)?.kl;
        println!("{name}: {} Newton iterations", sol.report.iterations);
        println!("  eigenvalues of B = {:?}", ens.eigenvalues());
        println!("  log Z = {:.3e}, KL = {kl:.12}", ens.log_z());
        println!("  |average - rho|_F = {err:.3e}");
        let bounds = sol.report.bounds;
        println!(
            "  spread of -B = {:.6} <= 2 / lambda_min = {:.6}",
            bounds.y_max - bounds.y_min,
            2.0 / bounds.lambda_min
        );
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
