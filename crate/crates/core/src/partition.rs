//! Partition function of the Gibbs ensemble and its derivatives.
//!
//! For `B` with eigenvalues `b`, the normalized unitary-invariant measure on
//! the unit sphere pushes forward to the uniform law on the probability
//! simplex through `t_k = |<e_k|phi>|^2`, so
//!
//! ```text
//! Z(b) = E[exp(-b.t)],  t ~ Uniform(simplex)
//! ```
//!
//! By the Hermite-Genocchi formula every moment `E[prod t_k^a_k exp(x.t)]`
//! is `(n-1)! prod(a_k!)` times the divided difference of `exp` at the nodes
//! `x`, with node `k` repeated `1 + a_k` times. Those divided differences are
//! read off the corner of the exponential of a bidiagonal matrix, computed by
//! scaling and squaring. All entries involved are positive, so the squaring
//! phase has no cancellation and clustered or repeated nodes need no special
//! casing.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Eigenvalues of a Hermitian parameter; finite, at least one entry.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenvalueVector(Vec<f64>);

impl EigenvalueVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::TooFewValues { required: 1, got: 0 });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self(values))
    }

    /// Zero vector of length `n`.
    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1);
        Self(vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// `b + c (1, ..., 1)`.
    pub fn shifted(&self, c: f64) -> Self {
        Self(self.0.iter().map(|v| v + c).collect())
    }
}

impl TryFrom<Vec<f64>> for EigenvalueVector {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl TryFrom<&[f64]> for EigenvalueVector {
    type Error = Error;

    fn try_from(values: &[f64]) -> Result<Self> {
        Self::new(values.to_vec())
    }
}

/// `log Z(b)`, the ensemble-average eigenvalues `g = -grad_b log Z`, and
/// optionally the Hessian of `log Z`.
#[derive(Clone, Debug)]
pub struct PartitionValue {
    pub log_z: f64,
    /// `g_k = E[t_k exp(-b.t)] / Z(b)`, a probability vector.
    pub average: Vec<f64>,
    /// `d^2 log Z / db_i db_j`, the covariance of `t` under the tilted law.
    pub hessian: Option<DMatrix<f64>>,
}

impl PartitionValue {
    /// `d log Z / db_k = -g_k`.
    pub fn gradient(&self) -> Vec<f64> {
        self.average.iter().map(|g| -g).collect()
    }
}

/// A moment `E[prod_k t_k^{a_k} exp(x.t)]` of the uniform law on the simplex.
///
/// The multiset of divided-difference nodes has `n + order` entries: node
/// `x_k` appears `1 + a_k` times.
#[derive(Clone, Debug)]
pub struct SimplexMoment {
    exponents: Vec<f64>,
    powers: Vec<u32>,
}

impl SimplexMoment {
    pub fn new(exponents: Vec<f64>, powers: Vec<u32>) -> Result<Self> {
        if exponents.is_empty() {
            return Err(Error::TooFewValues { required: 1, got: 0 });
        }
        if powers.len() != exponents.len() {
            return Err(Error::DimensionMismatch {
                expected: exponents.len(),
                got: powers.len(),
            });
        }
        if exponents.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { exponents, powers })
    }

    pub fn order(&self) -> u32 {
        self.powers.iter().sum()
    }

    pub fn nodes(&self) -> Vec<f64> {
        let mut nodes = self.exponents.clone();
        for (k, &a) in self.powers.iter().enumerate() {
            nodes.extend(std::iter::repeat_n(self.exponents[k], a as usize));
        }
        nodes
    }

    /// Natural log of the moment.
    pub fn ln_value(&self) -> f64 {
        let n = self.exponents.len();
        let constant = ln_factorial(n as u32 - 1) + self.powers.iter().map(|&a| ln_factorial(a)).sum::<f64>();
        let (mantissa, shift) = scaled_divided_diff_exp(&self.nodes());
        constant + mantissa.ln() + shift
    }

    pub fn value(&self) -> f64 {
        self.ln_value().exp()
    }
}

fn ln_factorial(k: u32) -> f64 {
    (2..=k).map(|j| (j as f64).ln()).sum()
}

/// Divided difference `exp[x_1, ..., x_m]`; repeated nodes give the confluent
/// (derivative) limit.
///
/// # Panics
///
/// If `nodes` is empty.
pub fn divided_diff_exp(nodes: &[f64]) -> f64 {
    let (mantissa, shift) = scaled_divided_diff_exp(nodes);
    mantissa * shift.exp()
}

/// The textbook recursion, valid only for pairwise distinct nodes. Loses
/// accuracy quickly as nodes cluster; kept for cross-checking.
pub fn divided_diff_exp_naive(nodes: &[f64]) -> Option<f64> {
    let m = nodes.len();
    assert!(m >= 1, "divided difference needs at least one node");
    let mut table: Vec<f64> = nodes.iter().map(|x| x.exp()).collect();
    for level in 1..m {
        for i in 0..(m - level) {
            let gap = nodes[i + level] - nodes[i];
            if gap == 0.0 {
                return None;
            }
            table[i] = (table[i + 1] - table[i]) / gap;
        }
    }
    Some(table[0])
}

/// Returns `(mantissa, shift)` with `exp[nodes] = mantissa * e^shift`, where
/// `shift = max(nodes)`. The mantissa lies in `(0, 1/(m-1)!]`.
pub(crate) fn scaled_divided_diff_exp(nodes: &[f64]) -> (f64, f64) {
    assert!(!nodes.is_empty(), "divided difference needs at least one node");
    let shift = nodes.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let shifted: Vec<f64> = nodes.iter().map(|x| x - shift).collect();
    (bidiagonal_exp_corner(&shifted), shift)
}

/// Corner entry `(0, m-1)` of `exp(J)` where `J` has `nodes` on the diagonal
/// and ones on the superdiagonal. Nodes are expected to be `<= 0`.
fn bidiagonal_exp_corner(nodes: &[f64]) -> f64 {
    let m = nodes.len();
    if m == 1 {
        return nodes[0].exp();
    }
    let norm = nodes.iter().fold(0.0f64, |acc, x| acc.max(x.abs())) + 1.0;
    let squarings = if norm <= 0.5 {
        0
    } else {
        (norm / 0.5).log2().ceil() as i32
    };
    let h = 0.5f64.powi(squarings);

    // Taylor series of exp(hJ); each term multiplies the previous one by hJ,
    // which touches only two entries per row since J is bidiagonal.
    let mut sum = DMatrix::<f64>::identity(m, m);
    let mut term = DMatrix::<f64>::identity(m, m);
    for k in 1..=40 {
        let scale = h / k as f64;
        let mut next = DMatrix::<f64>::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let mut v = term[(i, j)] * nodes[j];
                if j > i {
                    v += term[(i, j - 1)];
                }
                next[(i, j)] = v * scale;
            }
        }
        term = next;
        let mut largest = 0.0f64;
        for i in 0..m {
            for j in i..m {
                sum[(i, j)] += term[(i, j)];
                if sum[(i, j)] != 0.0 {
                    largest = largest.max((term[(i, j)] / sum[(i, j)]).abs());
                }
            }
        }
        if largest < 1e-18 {
            break;
        }
    }

    for _ in 0..squarings {
        sum = upper_triangular_square(&sum);
    }
    sum[(0, m - 1)]
}

fn upper_triangular_square(a: &DMatrix<f64>) -> DMatrix<f64> {
    let m = a.nrows();
    let mut out = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let mut acc = 0.0;
            for k in i..=j {
                acc += a[(i, k)] * a[(k, j)];
            }
            out[(i, j)] = acc;
        }
    }
    out
}

/// `log Z(b)`.
pub fn log_partition(b: &EigenvalueVector) -> f64 {
    let x: Vec<f64> = b.as_slice().iter().map(|v| -v).collect();
    let n = x.len();
    let (mantissa, shift) = scaled_divided_diff_exp(&x);
    ln_factorial(n as u32 - 1) + mantissa.ln() + shift
}

/// Ensemble-average eigenvalues `g_k = E[t_k e^{-b.t}] / Z(b)`, which equal
/// `-d log Z / db_k`.
pub fn partition_gradient(b: &EigenvalueVector) -> Vec<f64> {
    evaluate(b, false).average
}

/// Hessian of `log Z` in `b`. Positive semidefinite with the all-ones vector
/// in its kernel.
pub fn partition_hessian(b: &EigenvalueVector) -> DMatrix<f64> {
    evaluate(b, true).hessian.expect("hessian requested")
}

/// Evaluates `log Z`, the average and optionally the Hessian with one shared
/// exponent shift.
pub fn evaluate(b: &EigenvalueVector, with_hessian: bool) -> PartitionValue {
    let x: Vec<f64> = b.as_slice().iter().map(|v| -v).collect();
    let n = x.len();
    let shift = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let y: Vec<f64> = x.iter().map(|v| v - shift).collect();

    let base = bidiagonal_exp_corner(&y);
    let log_z = ln_factorial(n as u32 - 1) + base.ln() + shift;

    let mut nodes = Vec::with_capacity(n + 2);
    let average: Vec<f64> = (0..n)
        .map(|k| {
            nodes.clear();
            nodes.extend_from_slice(&y);
            nodes.push(y[k]);
            bidiagonal_exp_corner(&nodes) / base
        })
        .collect();

    let hessian = with_hessian.then(|| {
        let mut h = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                nodes.clear();
                nodes.extend_from_slice(&y);
                nodes.push(y[i]);
                nodes.push(y[j]);
                let factor = if i == j { 2.0 } else { 1.0 };
                let second = factor * bidiagonal_exp_corner(&nodes) / base;
                let cov = second - average[i] * average[j];
                h[(i, j)] = cov;
                h[(j, i)] = cov;
            }
        }
        h
    });

    PartitionValue {
        log_z,
        average,
        hessian,
    }
}
