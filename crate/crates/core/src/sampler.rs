//! Exact sampling from a [`LazyEnsemble`] and Monte Carlo estimators built on it.
//!
//! A draw is assembled in the eigenbasis of `B`: simplex coordinates `t` are
//! proposed uniformly (normalized exponentials) and accepted with probability
//! `exp(-(b - min b).t)`; independent uniform phases are attached to the
//! amplitudes `sqrt(t_k)`; the vector is rotated by the eigenvector matrix.
//! The result is an exact draw from `exp(-<phi|B|phi>) / Z(B)`.
//!
//! # Random streams
//!
//! Work is cut into chunks of [`CHUNK_SIZE`] accepted draws. Chunk `i` uses a
//! ChaCha8 generator seeded from the 64-bit user seed with stream id `i`, so
//! a batch depends only on `(seed, count, ensemble)` and not on how many
//! threads process the chunks. Chunk results are merged in chunk order.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hermitian::{Complex64, ComplexMatrix, HermitianMatrix};
use crate::partition::EigenvalueVector;
use crate::solver::LazyEnsemble;

/// Accepted draws per independent random stream.
pub const CHUNK_SIZE: usize = 1 << 14;
/// Tolerance on `sum |a_k|^2 = 1` for [`PureState::new`].
pub const NORM_TOL: f64 = 1e-12;

/// The generator for stream `stream` of a batch seeded with `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// A unit vector in `C^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amplitudes: Vec<Complex64>,
}

impl PureState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::EmptyMatrix);
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if !norm.is_finite() {
            return Err(Error::NonFinite);
        }
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidArgument(format!(
                "state has squared norm {norm}, expected 1"
            )));
        }
        Ok(Self { amplitudes })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// `|phi><phi|`.
    pub fn projector(&self) -> HermitianMatrix {
        let n = self.dim();
        let data = DMatrix::from_fn(n, n, |i, j| self.amplitudes[i] * self.amplitudes[j].conj());
        HermitianMatrix::new(ComplexMatrix::from_dmatrix(data).expect("finite")).expect("rank one projector")
    }
}

/// Haar-uniform unit vector: a standard complex Gaussian vector, normalized.
pub fn sample_uniform_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> PureState {
    assert!(n >= 1, "dimension must be at least 1");
    loop {
        let raw: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let norm = raw.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            let amplitudes = raw.into_iter().map(|a| a / norm).collect();
            return PureState { amplitudes };
        }
    }
}

/// Haar-random unitary via QR of a complex Gaussian matrix with the phases of
/// `diag(R)` moved into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    let g = DMatrix::from_fn(n, n, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    ComplexMatrix::from_dmatrix(q).expect("finite")
}

/// Uniform point on the probability simplex from normalized exponentials.
fn uniform_simplex<R: Rng + ?Sized>(t: &mut [f64], rng: &mut R) {
    let mut total = 0.0;
    for v in t.iter_mut() {
        let e: f64 = rng.sample(Exp1);
        *v = e;
        total += e;
    }
    for v in t.iter_mut() {
        *v /= total;
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SampleOptions {
    /// Keep every drawn state in the batch (`2n` doubles each). Summary
    /// statistics are always kept.
    pub keep_states: bool,
}

/// A seeded batch of draws with its empirical projector average.
#[derive(Clone, Debug)]
pub struct SampleBatch {
    pub seed: u64,
    pub count: usize,
    pub states: Option<Vec<PureState>>,
    /// `(1/count) sum |phi><phi|`.
    pub empirical_mean: HermitianMatrix,
    /// Accepted draws over proposals.
    pub accept_rate: f64,
    pub proposals: u64,
    /// Per-entry mean of `Re(phi_i conj(phi_j))^2`.
    second_re: DMatrix<f64>,
    /// Per-entry mean of `Im(phi_i conj(phi_j))^2`.
    second_im: DMatrix<f64>,
    /// Mean and mean square of `<phi|B|phi>` over the batch.
    energy_mean: f64,
    energy_sq_mean: f64,
}

impl SampleBatch {
    pub fn dim(&self) -> usize {
        self.empirical_mean.dim()
    }

    /// Standard errors of the real and imaginary parts of each entry of
    /// [`Self::empirical_mean`].
    pub fn standard_errors(&self) -> (DMatrix<f64>, DMatrix<f64>) {
        let n = self.dim();
        let count = self.count as f64;
        let correction = if self.count > 1 { count / (count - 1.0) } else { 0.0 };
        let se = |second: f64, first: f64| ((second - first * first).max(0.0) * correction / count).sqrt();
        let re = DMatrix::from_fn(n, n, |i, j| {
            se(self.second_re[(i, j)], self.empirical_mean.get(i, j).re)
        });
        let im = DMatrix::from_fn(n, n, |i, j| {
            se(self.second_im[(i, j)], self.empirical_mean.get(i, j).im)
        });
        (re, im)
    }

    /// Statistical scale of `||empirical_mean - E[mean]||_F`: the square root of
    /// the summed squared standard errors.
    pub fn frobenius_standard_error(&self) -> f64 {
        let (re, im) = self.standard_errors();
        (re.iter().map(|v| v * v).sum::<f64>() + im.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }

    /// Entrywise z-scores of the empirical mean against `expected`, over the
    /// upper triangle (real parts, and imaginary parts off the diagonal).
    pub fn z_scores(&self, expected: &HermitianMatrix) -> Result<ZScores> {
        let n = self.dim();
        if expected.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: expected.dim(),
            });
        }
        let (se_re, se_im) = self.standard_errors();
        let mut entries = Vec::new();
        for i in 0..n {
            for j in i..n {
                let diff = self.empirical_mean.get(i, j) - expected.get(i, j);
                entries.push(EntryZ {
                    row: i,
                    col: j,
                    part: Part::Re,
                    z: z_score(diff.re, se_re[(i, j)]),
                });
                if i != j {
                    entries.push(EntryZ {
                        row: i,
                        col: j,
                        part: Part::Im,
                        z: z_score(diff.im, se_im[(i, j)]),
                    });
                }
            }
        }
        let max_abs = entries.iter().fold(0.0f64, |acc, e| acc.max(e.z.abs()));
        Ok(ZScores { entries, max_abs })
    }
}

fn z_score(diff: f64, se: f64) -> f64 {
    if se > 0.0 {
        diff / se
    } else if diff.abs() <= 1e-12 {
        0.0
    } else {
        f64::INFINITY.copysign(diff)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Part {
    Re,
    Im,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EntryZ {
    pub row: usize,
    pub col: usize,
    pub part: Part,
    pub z: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ZScores {
    pub entries: Vec<EntryZ>,
    pub max_abs: f64,
}

/// A Monte Carlo estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub estimate: f64,
    pub std_error: f64,
}

struct ChunkStats {
    sum: DMatrix<Complex64>,
    sum_re2: DMatrix<f64>,
    sum_im2: DMatrix<f64>,
    energy: f64,
    energy_sq: f64,
    proposals: u64,
    states: Vec<PureState>,
}

/// Draws `count` states and keeps them.
pub fn sample(ens: &LazyEnsemble, count: usize, seed: u64) -> Result<SampleBatch> {
    sample_with(ens, count, seed, SampleOptions { keep_states: true })
}

pub fn sample_with(ens: &LazyEnsemble, count: usize, seed: u64, opts: SampleOptions) -> Result<SampleBatch> {
    if count == 0 {
        return Err(Error::InvalidArgument("sample count must be at least 1".into()));
    }
    let n = ens.dim();
    let chunks = count.div_ceil(CHUNK_SIZE);
    let stats: Vec<ChunkStats> = (0..chunks)
        .into_par_iter()
        .map(|i| {
            let len = CHUNK_SIZE.min(count - i * CHUNK_SIZE);
            sample_chunk(ens, len, seed, i as u64, opts.keep_states)
        })
        .collect();

    let mut sum = DMatrix::<Complex64>::zeros(n, n);
    let mut sum_re2 = DMatrix::<f64>::zeros(n, n);
    let mut sum_im2 = DMatrix::<f64>::zeros(n, n);
    let mut energy = 0.0;
    let mut energy_sq = 0.0;
    let mut proposals = 0u64;
    let mut states = opts.keep_states.then(|| Vec::with_capacity(count));
    for chunk in stats {
        sum += &chunk.sum;
        sum_re2 += &chunk.sum_re2;
        sum_im2 += &chunk.sum_im2;
        energy += chunk.energy;
        energy_sq += chunk.energy_sq;
        proposals += chunk.proposals;
        if let Some(all) = states.as_mut() {
            all.extend(chunk.states);
        }
    }
    let c = count as f64;
    let mean = ComplexMatrix::from_dmatrix(sum / Complex64::new(c, 0.0)).expect("finite");
    Ok(SampleBatch {
        seed,
        count,
        states,
        empirical_mean: HermitianMatrix::symmetrized(mean),
        accept_rate: c / proposals as f64,
        proposals,
        second_re: sum_re2 / c,
        second_im: sum_im2 / c,
        energy_mean: energy / c,
        energy_sq_mean: energy_sq / c,
    })
}

fn sample_chunk(ens: &LazyEnsemble, len: usize, seed: u64, stream: u64, keep: bool) -> ChunkStats {
    let n = ens.dim();
    let b = ens.eigenvalues();
    let b_min = b[0];
    let u = ens.spectral().eigenvectors.as_dmatrix();
    let mut rng = stream_rng(seed, stream);

    let mut stats = ChunkStats {
        sum: DMatrix::zeros(n, n),
        sum_re2: DMatrix::zeros(n, n),
        sum_im2: DMatrix::zeros(n, n),
        energy: 0.0,
        energy_sq: 0.0,
        proposals: 0,
        states: if keep { Vec::with_capacity(len) } else { Vec::new() },
    };
    let mut t = vec![0.0; n];
    let mut v = vec![Complex64::new(0.0, 0.0); n];
    let mut phi = vec![Complex64::new(0.0, 0.0); n];
    let mut accepted = 0;
    while accepted < len {
        stats.proposals += 1;
        uniform_simplex(&mut t, &mut rng);
        let tilt: f64 = b.iter().zip(&t).map(|(bk, tk)| (bk - b_min) * tk).sum();
        let threshold: f64 = rng.gen();
        if threshold >= (-tilt).exp() {
            continue;
        }
        accepted += 1;
        for k in 0..n {
            let theta = TAU * rng.gen::<f64>();
            v[k] = Complex64::from_polar(t[k].sqrt(), theta);
        }
        for i in 0..n {
            phi[i] = (0..n).map(|k| u[(i, k)] * v[k]).sum();
        }
        let energy = tilt + b_min;
        stats.energy += energy;
        stats.energy_sq += energy * energy;
        for i in 0..n {
            for j in 0..n {
                let z = phi[i] * phi[j].conj();
                stats.sum[(i, j)] += z;
                stats.sum_re2[(i, j)] += z.re * z.re;
                stats.sum_im2[(i, j)] += z.im * z.im;
            }
        }
        if keep {
            stats.states.push(PureState {
                amplitudes: phi.clone(),
            });
        }
    }
    stats
}

/// Mean and standard error of `ln mu(phi) = -<phi|B|phi> - log Z(B)` over the
/// batch. Uses the stored states when present, the energy moments recorded at
/// sampling time otherwise.
pub fn estimate_kl(ens: &LazyEnsemble, batch: &SampleBatch) -> Result<Estimate> {
    if batch.dim() != ens.dim() {
        return Err(Error::DimensionMismatch {
            expected: ens.dim(),
            got: batch.dim(),
        });
    }
    let count = batch.count as f64;
    let (mean, mean_sq) = match &batch.states {
        Some(states) => {
            let (s, s2) = states.iter().fold((0.0, 0.0), |(s, s2), st| {
                let l = ens.log_density(st.amplitudes());
                (s + l, s2 + l * l)
            });
            (s / count, s2 / count)
        }
        None => {
            let m = -batch.energy_mean - ens.log_z();
            // Var(-E - c) = Var(E)
            let var = batch.energy_sq_mean - batch.energy_mean * batch.energy_mean;
            (m, var + m * m)
        }
    };
    Ok(Estimate {
        estimate: mean,
        std_error: standard_error(mean, mean_sq, batch.count),
    })
}

fn standard_error(mean: f64, mean_sq: f64, count: usize) -> f64 {
    if count < 2 {
        return 0.0;
    }
    let c = count as f64;
    ((mean_sq - mean * mean).max(0.0) * c / (c - 1.0) / c).sqrt()
}

/// Monte Carlo estimate of `Z(b) = E[exp(-b.t)]` with `t_k = |phi_k|^2` and
/// `phi` Haar-uniform. Independent of the divided-difference route.
pub fn mc_partition_oracle(b: &EigenvalueVector, count: usize, seed: u64) -> Result<Estimate> {
    if count == 0 {
        return Err(Error::InvalidArgument("sample count must be at least 1".into()));
    }
    let b = b.as_slice();
    let n = b.len();
    let b_min = b.iter().copied().fold(f64::INFINITY, f64::min);
    let chunks = count.div_ceil(CHUNK_SIZE);
    let sums: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|i| {
            let len = CHUNK_SIZE.min(count - i * CHUNK_SIZE);
            let mut rng = stream_rng(seed, i as u64);
            let mut s = 0.0;
            let mut s2 = 0.0;
            for _ in 0..len {
                let state = sample_uniform_state(n, &mut rng);
                let tilt: f64 = state
                    .amplitudes()
                    .iter()
                    .zip(b)
                    .map(|(a, bk)| (bk - b_min) * a.norm_sqr())
                    .sum();
                let w = (-tilt).exp();
                s += w;
                s2 += w * w;
            }
            (s, s2)
        })
        .collect();
    let (s, s2) = sums.iter().fold((0.0, 0.0), |acc, x| (acc.0 + x.0, acc.1 + x.1));
    let c = count as f64;
    let mean = s / c;
    let se = standard_error(mean, s2 / c, count);
    let scale = (-b_min).exp();
    Ok(Estimate {
        estimate: mean * scale,
        std_error: se * scale,
    })
}
