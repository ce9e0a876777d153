// `log Z`, the ensemble average and the Hessian for a few spectra of `B`,
// including coincident eigenvalues.
//
// Run with `cargo run --example partition_function`.

use lazy_ensemble::partition::{divided_diff_exp, evaluate, EigenvalueVector};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    for b in [
        vec![0.0, 0.0],
        vec![0.0, 1.0],
        vec![1.0, 2.0, 5.0],
        vec![2.0, 2.0, 2.0 + 1e-12, -1.0],
    ] {
        let value = evaluate(&EigenvalueVector::new(b.clone())?, true);
        println!("b = {b:?}");
        println!("  log Z   = {:.15}", value.log_z);
        println!("  average = {:?}", value.average);
        if let Some(h) = value.hessian {
            println!("  hessian diagonal = {:?}", h.diagonal().as_slice());
        }
    }

    // Z(0, c) = (1 - e^{-c}) / c, the n = 2 closed form.
    let c = 1.0f64;
    let closed = -(-c).exp_m1() / c;
    let exact = evaluate(&EigenvalueVector::new(vec![0.0, c])?, false).log_z.exp();
    println!("Z(0, 1) = {exact:.15} (closed form {closed:.15})");

    // Divided differences are continuous through coincident nodes.
    for eps in [1e-2, 1e-6, 1e-12, 0.0] {
        println!("exp[0, {eps:e}] = {:.15}", divided_diff_exp(&[0.0, eps]));
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
