//! Classical maximum-entropy distribution over a finite set of values with a
//! prescribed mean: `p_k = exp(-beta A_k) / Z`, with `beta` solving
//! `sum_k A_k p_k = M`.

use crate::error::{Error, Result};

/// Default tolerance on the reproduced mean.
pub const DEFAULT_MEAN_TOL: f64 = 1e-13;

const MAX_BRACKET_DOUBLINGS: usize = 1100;
const MAX_ITER: usize = 500;

#[derive(Clone, Debug, PartialEq)]
pub struct GibbsDie {
    pub values: Vec<f64>,
    pub beta: f64,
    pub probs: Vec<f64>,
}

impl GibbsDie {
    pub fn mean(&self) -> f64 {
        self.values.iter().zip(&self.probs).map(|(a, p)| a * p).sum()
    }

    pub fn entropy(&self) -> f64 {
        shannon_entropy(&self.probs)
    }
}

/// A target mean, strictly inside the range of the values.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeanConstraint(f64);

impl MeanConstraint {
    pub fn new(mean: f64, values: &[f64]) -> Result<Self> {
        let (min, max) = range(values)?;
        if !mean.is_finite() || mean <= min || mean >= max {
            return Err(Error::InfeasibleMean { mean, min, max });
        }
        Ok(Self(mean))
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

fn range(values: &[f64]) -> Result<(f64, f64)> {
    if values.len() < 2 {
        return Err(Error::TooFewValues {
            required: 2,
            got: values.len(),
        });
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if min == max {
        return Err(Error::DegenerateValues);
    }
    Ok((min, max))
}

/// Gibbs probabilities `exp(-beta A_k) / sum_j exp(-beta A_j)`.
pub fn gibbs_probs(values: &[f64], beta: f64) -> Vec<f64> {
    let exponents: Vec<f64> = values.iter().map(|a| -beta * a).collect();
    let top = exponents.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = exponents.iter().map(|e| (e - top).exp()).collect();
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

/// Mean and variance of the values under the Gibbs law at `beta`.
fn moments(values: &[f64], beta: f64) -> (f64, f64) {
    let p = gibbs_probs(values, beta);
    let mean: f64 = values.iter().zip(&p).map(|(a, q)| a * q).sum();
    let var: f64 = values.iter().zip(&p).map(|(a, q)| q * (a - mean).powi(2)).sum();
    (mean, var)
}

/// Solves `sum_k A_k p_k(beta) = M` for `beta`.
///
/// The mean is strictly decreasing in `beta`, so a bracket grown from
/// `[-1, 1]` always exists for a feasible `M`. Inside the bracket Newton steps
/// are taken when they stay in it, bisection otherwise.
pub fn solve_beta(values: &[f64], target: MeanConstraint, tol: f64) -> Result<GibbsDie> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let (min, max) = range(values)?;
    let m = target.value();
    if m <= min || m >= max {
        return Err(Error::InfeasibleMean { mean: m, min, max });
    }

    let mut lo = -1.0;
    let mut hi = 1.0;
    let mut grown = 0;
    while moments(values, lo).0 < m || moments(values, hi).0 > m {
        if moments(values, lo).0 < m {
            lo *= 2.0;
        }
        if moments(values, hi).0 > m {
            hi *= 2.0;
        }
        grown += 1;
        if grown > MAX_BRACKET_DOUBLINGS {
            return Err(Error::InvalidArgument(format!("could not bracket beta for mean {m}")));
        }
    }

    let mut beta = 0.5 * (lo + hi);
    for _ in 0..MAX_ITER {
        let (mean, var) = moments(values, beta);
        let residual = mean - m;
        if residual.abs() <= tol {
            break;
        }
        if residual > 0.0 {
            lo = beta;
        } else {
            hi = beta;
        }
        // d mean / d beta = -var
        let newton = if var > 0.0 { beta + residual / var } else { f64::NAN };
        beta = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= f64::EPSILON * beta.abs().max(1.0) {
            break;
        }
    }
    let probs = gibbs_probs(values, beta);
    Ok(GibbsDie {
        values: values.to_vec(),
        beta,
        probs,
    })
}

/// `-sum p log p` in nats, with `0 log 0 = 0`.
pub fn shannon_entropy(p: &[f64]) -> f64 {
    -p.iter().filter(|&&q| q > 0.0).map(|q| q * q.ln()).sum::<f64>()
}
