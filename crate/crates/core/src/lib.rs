//! Maximum-entropy ("lazy") ensembles of pure quantum states.
//!
//! Given a density matrix `rho` on `C^n`, [`solver::solve`] finds the
//! Hermitian parameter `B` of the Gibbs ensemble
//!
//! ```text
//! mu(phi) = exp(-<phi|B|phi>) / Z(B),    Z(B) = \int exp(-<phi|B|phi>) dphi
//! ```
//!
//! whose average `\int mu(phi) |phi><phi| dphi` equals `rho`, with `dphi` the
//! unitary-invariant measure on the unit sphere normalized to total mass 1.
//! Among all ensembles averaging to `rho` this one has the smallest
//! Kullback-Leibler divergence from the uniform ensemble.
//!
//! Modules:
//!
//! - [`hermitian`]: complex matrices, Jacobi eigensolver, density-matrix validation
//! - [`partition`]: exact `log Z`, its gradient and Hessian via divided differences of `exp`
//! - [`solver`]: Newton minimization of the convex dual, ensemble average, KL divergence
//! - [`sampler`]: exact sampling, Monte Carlo estimators and oracles
//! - [`die`]: the classical counterpart, a maximum-entropy die with a fixed mean
//! - [`io`]: matrix JSON and CSV state dumps
//! - [`cli`]: the `lazyens` command line
//!
//! ```
//! use lazy_ensemble::hermitian::{validate_density, ComplexMatrix, DENSITY_TOL};
//! use lazy_ensemble::solver::{ensemble_average, solve, DEFAULT_MAX_ITER, DEFAULT_TOL};
//!
//! let m = ComplexMatrix::from_real_diagonal(&[0.7, 0.3]).unwrap();
//! let rho = validate_density(m, DENSITY_TOL).unwrap();
//! let sol = solve(&rho, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
//! let back = ensemble_average(&sol.ensemble);
//! assert!((back.matrix().get(0, 0).re - 0.7).abs() < 1e-9);
//! ```

pub mod cli;
pub mod die;
pub mod error;
pub mod hermitian;
pub mod io;
pub mod partition;
pub mod sampler;
pub mod solver;

pub use error::{Error, Result};
