//! The inverse problem: given a density matrix `rho`, find the Hermitian `B`
//! whose Gibbs ensemble `mu(phi) = exp(-<phi|B|phi>) / Z(B)` averages to `rho`.
//!
//! The ensemble-average map commutes with unitary conjugation, so the
//! optimizer shares an eigenbasis with `rho` and only the eigenvalues need to
//! be found. Those come from minimizing the dual in `Y = -B`
//!
//! ```text
//! F(y) = Z(-y) - sum_k y_k lambda_k
//! ```
//!
//! whose stationarity condition is exactly `g(-y) = lambda` together with
//! `Z(-y) = 1`. Newton iterations run on the equivalent log form
//! `log Z(-y) - y.lambda`, which has the same minimizer up to a shift along
//! `(1, ..., 1)`; that shift is fixed at the end so `Z = 1`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::hermitian::{ComplexMatrix, DensityMatrix, HermitianMatrix, SpectralDecomposition};
use crate::partition::{evaluate, log_partition, EigenvalueVector};

/// Default convergence threshold on `max_k |g_k - lambda_k|`.
pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 200;
/// Slack used when checking the eigenvalue bounds of `Y`.
pub const BOUNDS_SLACK: f64 = 1e-9;
/// `kl_from_uniform` rejects states further than this (Frobenius) from the ensemble average.
pub const STATE_MATCH_TOL: f64 = 1e-6;

const ARMIJO: f64 = 1e-4;
const BACKTRACK: f64 = 0.5;
const MAX_BACKTRACKS: usize = 60;

/// The maximum-entropy ensemble with parameter `B`.
#[derive(Clone, Debug, PartialEq)]
pub struct LazyEnsemble {
    parameter: HermitianMatrix,
    spectral: SpectralDecomposition,
    log_z: f64,
    absorbed: HermitianMatrix,
}

impl LazyEnsemble {
    pub fn new(parameter: HermitianMatrix) -> Result<Self> {
        let spectral = parameter.eigh()?;
        Ok(Self::from_parts(parameter, spectral))
    }

    /// The uniform ensemble, `B = 0`.
    pub fn uniform(n: usize) -> Self {
        Self::from_spectrum(&vec![0.0; n], &ComplexMatrix::identity(n))
    }

    /// Builds `B = u diag(values) u^H` from eigenvalues listed in the column
    /// order of `basis`, which must be unitary.
    pub fn from_spectrum(values: &[f64], basis: &ComplexMatrix) -> Self {
        let n = values.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let eigenvalues: Vec<f64> = order.iter().map(|&k| values[k]).collect();
        let src = basis.as_dmatrix();
        let eigenvectors = ComplexMatrix::from_dmatrix(DMatrix::from_fn(n, n, |i, j| src[(i, order[j])]))
            .expect("basis columns are finite");
        let spectral = SpectralDecomposition {
            eigenvalues,
            eigenvectors,
        };
        Self::from_parts(spectral.reconstruct(), spectral)
    }

    fn from_parts(parameter: HermitianMatrix, spectral: SpectralDecomposition) -> Self {
        let b = EigenvalueVector::new(spectral.eigenvalues.clone()).expect("finite spectrum");
        let log_z = log_partition(&b);
        let absorbed = parameter.shifted(log_z);
        Self {
            parameter,
            spectral,
            log_z,
            absorbed,
        }
    }

    pub fn dim(&self) -> usize {
        self.parameter.dim()
    }

    /// `B`.
    pub fn parameter(&self) -> &HermitianMatrix {
        &self.parameter
    }

    pub fn spectral(&self) -> &SpectralDecomposition {
        &self.spectral
    }

    /// Ascending eigenvalues of `B`.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.spectral.eigenvalues
    }

    pub fn log_z(&self) -> f64 {
        self.log_z
    }

    /// `B + log Z(B) I`, the parameter with the normalizer folded in.
    pub fn absorbed(&self) -> &HermitianMatrix {
        &self.absorbed
    }

    /// `ln mu(phi) = -<phi|B|phi> - log Z(B)` for a unit vector `phi`.
    pub fn log_density(&self, amplitudes: &[crate::hermitian::Complex64]) -> f64 {
        let b = self.parameter.as_complex().as_dmatrix();
        let n = self.dim();
        let mut energy = 0.0;
        for i in 0..n {
            for j in 0..n {
                energy += (amplitudes[i].conj() * b[(i, j)] * amplitudes[j]).re;
            }
        }
        -energy - self.log_z
    }
}

/// Eigenvalue bounds on `Y = -B` at a solution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundsCheck {
    pub y_min: f64,
    pub y_max: f64,
    pub lambda_min: f64,
    /// `y_min <= 0 <= y_max`.
    pub sign_ok: bool,
    /// `y_max - y_min <= 2 / lambda_min`.
    pub spread_ok: bool,
}

impl BoundsCheck {
    pub fn evaluate(y: &[f64], lambda_min: f64) -> Self {
        let y_min = y.iter().copied().fold(f64::INFINITY, f64::min);
        let y_max = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self {
            y_min,
            y_max,
            lambda_min,
            sign_ok: y_min <= BOUNDS_SLACK && y_max >= -BOUNDS_SLACK,
            spread_ok: y_max - y_min <= 2.0 / lambda_min + BOUNDS_SLACK,
        }
    }

    pub fn passed(&self) -> bool {
        self.sign_ok && self.spread_ok
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    /// `max_k |g_k - lambda_k|` at the returned iterate.
    pub gradient_norm: f64,
    /// `Z(-y) - y.lambda` at the returned iterate.
    pub dual_objective: f64,
    pub bounds: BoundsCheck,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub ensemble: LazyEnsemble,
    pub report: SolveReport,
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Starting `y`, listed in the ascending eigenvalue order of `rho`. Zero when `None`.
    pub initial: Option<Vec<f64>>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            initial: None,
        }
    }
}

/// Kullback-Leibler divergence of an ensemble from the uniform one, in nats.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KlValue {
    pub kl: f64,
}

pub fn solve(rho: &DensityMatrix, tol: f64, max_iter: usize) -> Result<Solution> {
    solve_with(
        rho,
        &SolveOptions {
            tol,
            max_iter,
            initial: None,
        },
    )
}

pub fn solve_with(rho: &DensityMatrix, opts: &SolveOptions) -> Result<Solution> {
    if opts.tol.is_nan() || opts.tol <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {}",
            opts.tol
        )));
    }
    let lambda = rho.eigenvalues();
    let n = lambda.len();
    let lambda_min = lambda[0];
    if lambda_min <= 0.0 {
        return Err(Error::Degenerate {
            min_eigenvalue: lambda_min,
        });
    }
    let mut y = match &opts.initial {
        Some(init) if init.len() != n => {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: init.len(),
            })
        }
        Some(init) => init.clone(),
        None => vec![0.0; n],
    };
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }

    let objective = |y: &[f64]| -> f64 {
        let b = EigenvalueVector::new(y.iter().map(|v| -v).collect()).expect("finite iterate");
        log_partition(&b) - dot(y, lambda)
    };

    let ones = DMatrix::<f64>::from_element(n, n, 1.0 / n as f64);
    let mut iterations = 0;
    let mut gradient_norm;
    let mut converged = false;
    loop {
        let b = EigenvalueVector::new(y.iter().map(|v| -v).collect()).expect("finite iterate");
        let value = evaluate(&b, true);
        let grad: Vec<f64> = value.average.iter().zip(lambda).map(|(g, l)| g - l).collect();
        gradient_norm = grad.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        if gradient_norm <= opts.tol {
            converged = true;
            break;
        }
        if iterations == opts.max_iter {
            break;
        }
        iterations += 1;

        // The Hessian annihilates (1,...,1) and the gradient is orthogonal to
        // it, so adding the projector onto that direction leaves the Newton
        // step unchanged while making the system definite.
        let hessian = value.hessian.expect("requested") + &ones;
        let rhs = DVector::from_iterator(n, grad.iter().map(|g| -g));
        let mut step: Vec<f64> = match hessian.cholesky() {
            Some(chol) => chol.solve(&rhs).iter().copied().collect(),
            None => rhs.iter().copied().collect(),
        };
        let mut slope = dot(&grad, &step);
        if slope.is_nan() || slope >= 0.0 || step.iter().any(|v| !v.is_finite()) {
            step = grad.iter().map(|g| -g).collect();
            slope = dot(&grad, &step);
        }

        let current = value.log_z - dot(&y, lambda);
        let slack = 8.0 * f64::EPSILON * current.abs().max(1.0);
        let mut t = 1.0;
        let mut candidate: Vec<f64> = y.iter().zip(&step).map(|(a, d)| a + d).collect();
        for _ in 0..MAX_BACKTRACKS {
            let trial = objective(&candidate);
            if trial.is_finite() && trial <= current + ARMIJO * t * slope + slack {
                break;
            }
            t *= BACKTRACK;
            candidate = y.iter().zip(&step).map(|(a, d)| a + t * d).collect();
        }
        y = candidate;
    }

    // Fix the shift so that Z(-y) = 1, the stationary point of the raw dual.
    let b = EigenvalueVector::new(y.iter().map(|v| -v).collect()).expect("finite iterate");
    let shift = log_partition(&b);
    for v in y.iter_mut() {
        *v -= shift;
    }
    let b_values: Vec<f64> = y.iter().map(|v| -v).collect();
    let ensemble = LazyEnsemble::from_spectrum(&b_values, &rho.spectral().eigenvectors);
    let y_vec = EigenvalueVector::new(y.clone()).expect("finite iterate");
    let report = SolveReport {
        iterations,
        gradient_norm,
        dual_objective: dual_objective(&y_vec, lambda),
        bounds: BoundsCheck::evaluate(&y, lambda_min),
        converged,
    };
    let solution = Solution { ensemble, report };
    if converged {
        Ok(solution)
    } else {
        Err(Error::NoConvergence {
            iterations,
            gradient_norm,
            partial: Box::new(solution),
        })
    }
}

/// `U diag(g(b)) U^H`, the density matrix the ensemble averages to.
pub fn ensemble_average(ens: &LazyEnsemble) -> DensityMatrix {
    let b = EigenvalueVector::new(ens.eigenvalues().to_vec()).expect("finite spectrum");
    let g = crate::partition::partition_gradient(&b);
    DensityMatrix::from_spectrum_unchecked(&g, &ens.spectral().eigenvectors)
}

/// `KL(mu || uniform) = -Tr(B rho) - log Z(B)`.
pub fn kl_from_uniform(ens: &LazyEnsemble, rho: &DensityMatrix) -> Result<KlValue> {
    if rho.dim() != ens.dim() {
        return Err(Error::DimensionMismatch {
            expected: ens.dim(),
            got: rho.dim(),
        });
    }
    let average = ensemble_average(ens);
    let deviation = average
        .matrix()
        .as_complex()
        .sub(rho.matrix().as_complex())
        .frobenius_norm();
    if deviation > STATE_MATCH_TOL {
        return Err(Error::MismatchedState { deviation });
    }
    let b = ens.parameter().as_complex().as_dmatrix();
    let r = rho.matrix().as_complex().as_dmatrix();
    let trace_b_rho = (b * r).trace().re;
    Ok(KlValue {
        kl: -trace_b_rho - ens.log_z(),
    })
}

/// `Z(-y) - sum_k y_k lambda_k`.
pub fn dual_objective(y: &EigenvalueVector, lambda: &[f64]) -> f64 {
    let b = EigenvalueVector::new(y.as_slice().iter().map(|v| -v).collect()).expect("finite");
    log_partition(&b).exp() - dot(y.as_slice(), lambda)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
