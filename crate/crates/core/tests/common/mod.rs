//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use lazy_ensemble::hermitian::{validate_density, ComplexMatrix, DensityMatrix, HermitianMatrix, DENSITY_TOL};
use lazy_ensemble::sampler::haar_unitary;
use rand::Rng;

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on P_m.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(m, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(m, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[m - 1 - i] = x;
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    (nodes, weights)
}

/// `(P_m(x), P_m'(x))` by the three-term recurrence.
fn legendre(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=m {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// `int_a^b f` with an `m`-point Gauss-Legendre rule.
pub fn quad_1d(f: impl Fn(f64) -> f64, a: f64, b: f64, m: usize) -> f64 {
    let (x, w) = gauss_legendre(m);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    x.iter().zip(&w).map(|(xi, wi)| wi * f(mid + half * xi)).sum::<f64>() * half
}

/// `E[f(t)]` for `t` uniform on the 2-simplex, by a collapsed tensor
/// Gauss-Legendre rule: `t1 = u`, `t2 = (1 - u) v`, Jacobian `1 - u`, and the
/// uniform density is 2.
pub fn simplex3_mean(f: impl Fn([f64; 3]) -> f64, m: usize) -> f64 {
    let (x, w) = gauss_legendre(m);
    let mut total = 0.0;
    for (xu, wu) in x.iter().zip(&w) {
        let u = 0.5 * (xu + 1.0);
        for (xv, wv) in x.iter().zip(&w) {
            let v = 0.5 * (xv + 1.0);
            let t1 = u;
            let t2 = (1.0 - u) * v;
            let t3 = 1.0 - t1 - t2;
            total += wu * wv * (1.0 - u) * f([t1, t2, t3]);
        }
    }
    2.0 * 0.25 * total
}

/// `E[f(t)]` for `t` uniform on the 2-simplex, refined until two successive
/// rules agree to `rel`.
pub fn simplex3_mean_converged(f: impl Fn([f64; 3]) -> f64, rel: f64) -> f64 {
    let mut m = 16;
    let mut prev = simplex3_mean(&f, m);
    loop {
        m *= 2;
        let next = simplex3_mean(&f, m);
        if (next - prev).abs() <= rel * next.abs() || m >= 512 {
            return next;
        }
        prev = next;
    }
}

/// `Z(b1, b2) = int_0^1 exp(-b1 t - b2 (1 - t)) dt`, free of cancellation.
pub fn z_two_level(b1: f64, b2: f64) -> f64 {
    let (lo, hi) = if b1 <= b2 { (b1, b2) } else { (b2, b1) };
    let gap = hi - lo;
    if gap == 0.0 {
        return (-lo).exp();
    }
    (-lo).exp() * -(-gap).exp_m1() / gap
}

/// Average `g_1` for `b = (0, c)`: `int t e^{-c(1-t)} dt / int e^{-c(1-t)} dt`.
pub fn g1_two_level(c: f64) -> f64 {
    if c.abs() < 1e-8 {
        return 0.5 + c / 12.0;
    }
    // int_0^1 t e^{-c(1-t)} dt = 1/c - (1 - e^{-c})/c^2
    let z = -(-c).exp_m1() / c;
    (1.0 / c - z / c) / z
}

/// Random real vector with entries uniform in `[lo, hi)`.
pub fn uniform_vec<R: Rng>(rng: &mut R, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(lo..hi)).collect()
}

/// Random nondegenerate density matrix with spectrum bounded below by
/// `lambda_min` and a Haar-random eigenbasis.
pub fn random_density<R: Rng>(rng: &mut R, n: usize, lambda_min: f64) -> DensityMatrix {
    let raw: Vec<f64> = (0..n).map(|_| -rng.gen::<f64>().max(1e-300).ln()).collect();
    let total: f64 = raw.iter().sum();
    let free = 1.0 - n as f64 * lambda_min;
    let values: Vec<f64> = raw.iter().map(|r| lambda_min + free * r / total).collect();
    let u = haar_unitary(n, rng);
    density_from_spectrum(&values, &u)
}

pub fn density_from_spectrum(values: &[f64], u: &ComplexMatrix) -> DensityMatrix {
    let m = HermitianMatrix::from_spectrum(values, u);
    validate_density(m.into_complex(), DENSITY_TOL).expect("valid density matrix")
}

pub fn diag_density(values: &[f64]) -> DensityMatrix {
    validate_density(ComplexMatrix::from_real_diagonal(values).unwrap(), DENSITY_TOL).unwrap()
}

/// Two-sided Kolmogorov-Smirnov statistic of `sample` against `cdf`.
pub fn ks_statistic(sample: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    sample.sort_by(f64::total_cmp);
    let n = sample.len() as f64;
    sample.iter().enumerate().fold(0.0f64, |d, (i, &x)| {
        let f = cdf(x);
        d.max(f - i as f64 / n).max((i as f64 + 1.0) / n - f)
    })
}

/// `max |a_ij - b_ij|` over complex entries.
pub fn max_entry_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let n = a.dim();
    let mut d = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            d = d.max((a.get(i, j) - b.get(i, j)).norm());
        }
    }
    d
}
