// Write sampled states to the CSV dump format and read them back.
//
// Run with `cargo run --example state_dump`.

use lazy_ensemble::hermitian::HermitianMatrix;
use lazy_ensemble::io::{read_state_dump, write_state_dump};
use lazy_ensemble::sampler::sample;
use lazy_ensemble::solver::LazyEnsemble;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let ens = LazyEnsemble::new(HermitianMatrix::from_real_diagonal(&[0.0, 1.5])?)?;
    let batch = sample(&ens, 5, 3)?;
    let states = batch.states.as_deref().unwrap_or_default();

    let mut buf = Vec::new();
    write_state_dump(&mut buf, batch.seed, states)?;
    print!("{}", String::from_utf8(buf.clone())?);

    let dump = read_state_dump(&buf[..])?;
    assert_eq!(dump.states, states);
    println!(
        "read back {} states of dimension {} (seed {})",
        dump.count, dump.n, dump.seed
    );
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
