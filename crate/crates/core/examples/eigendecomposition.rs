// Hermitian eigendecomposition and density-matrix validation.
//
// Run with `cargo run --example eigendecomposition`.

use lazy_ensemble::hermitian::{validate_density, ComplexMatrix, HermitianMatrix, DENSITY_TOL};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    // A qubit with a complex coherence.
    let m = ComplexMatrix::from_parts(&[vec![0.6, 0.1], vec![0.1, 0.4]], &[vec![0.0, -0.2], vec![0.2, 0.0]])?;
    let h = HermitianMatrix::new(m.clone())?;
    let spec = h.eigh()?;
    println!("eigenvalues = {:?}", spec.eigenvalues);
    let err = spec.reconstruct().as_complex().sub(h.as_complex()).frobenius_norm();
    println!("|U diag U^H - H|_F = {err:.3e}");
    println!("U unitary to {:.3e}", spec.eigenvectors.unitary_deviation());

    let rho = validate_density(m, DENSITY_TOL)?;
    println!("valid density matrix, lambda_min = {:.6}", rho.min_eigenvalue());

    // Each failure mode is reported separately.
    for (name, diag) in [("pure", [1.0, 0.0]), ("negative", [1.1, -0.1]), ("trace", [0.5, 0.6])] {
        let err = validate_density(ComplexMatrix::from_real_diagonal(&diag)?, DENSITY_TOL).unwrap_err();
        println!("{name}: {err}");
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
