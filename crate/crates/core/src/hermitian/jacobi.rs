//! Cyclic Jacobi eigensolver for complex Hermitian matrices.
//!
//! Each rotation first removes the phase of the pivot `a_pq` with a diagonal
//! unitary and then applies the classical real Jacobi rotation, so the pivot
//! is annihilated exactly. Rotations accumulate into the eigenvector matrix.

use nalgebra::DMatrix;

use super::{Complex64, ComplexMatrix, HermitianMatrix, SpectralDecomposition};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Eigendecomposition with the default stopping threshold.
pub fn eigh(m: &HermitianMatrix) -> Result<SpectralDecomposition> {
    eigh_with_tolerance(m, 4.0 * f64::EPSILON, MAX_SWEEPS)
}

/// Sweeps until the off-diagonal Frobenius norm drops below `rel_tol * ||m||_F`.
pub fn eigh_with_tolerance(m: &HermitianMatrix, rel_tol: f64, max_sweeps: usize) -> Result<SpectralDecomposition> {
    let n = m.dim();
    let mut a = m.as_complex().as_dmatrix().clone();
    let mut v = DMatrix::<Complex64>::identity(n, n);
    let scale = m.frobenius_norm();
    let threshold = rel_tol * scale;

    let mut converged = scale == 0.0;
    let mut sweeps = 0;
    while !converged {
        if off_diagonal_norm(&a) <= threshold {
            converged = true;
            break;
        }
        if sweeps == max_sweeps {
            break;
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }
    if !converged {
        return Err(Error::EighNoConvergence {
            sweeps,
            off_norm: off_diagonal_norm(&a),
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let eigenvalues = order.iter().map(|&k| a[(k, k)].re).collect();
    let vectors = DMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors: ComplexMatrix { data: vectors },
    })
}

fn off_diagonal_norm(a: &DMatrix<Complex64>) -> f64 {
    let n = a.nrows();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += a[(i, j)].norm_sqr();
            }
        }
    }
    sum.sqrt()
}

fn rotate(a: &mut DMatrix<Complex64>, v: &mut DMatrix<Complex64>, p: usize, q: usize) {
    let apq = a[(p, q)];
    let magnitude = apq.norm();
    if magnitude == 0.0 {
        return;
    }
    let phase = apq / magnitude;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;

    let theta = (aqq - app) / (2.0 * magnitude);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    // U = D R with D = diag(1, conj(phase)) on (p, q) and R the real rotation.
    let u_pp = Complex64::new(c, 0.0);
    let u_pq = Complex64::new(s, 0.0);
    let u_qp = -phase.conj() * s;
    let u_qq = phase.conj() * c;

    let n = a.nrows();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * u_pp + akq * u_qp;
        a[(k, q)] = akp * u_pq + akq * u_qq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = u_pp.conj() * apk + u_qp.conj() * aqk;
        a[(q, k)] = u_pq.conj() * apk + u_qq.conj() * aqk;
    }
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);
    a[(p, p)].im = 0.0;
    a[(q, q)].im = 0.0;

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * u_pp + vkq * u_qp;
        v[(k, q)] = vkp * u_pq + vkq * u_qq;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermitian::conjugate;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, rng: &mut impl Rng) -> HermitianMatrix {
        let data = DMatrix::from_fn(n, n, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        HermitianMatrix::symmetrized(ComplexMatrix { data })
    }

    fn random_unitary(n: usize, rng: &mut impl Rng) -> ComplexMatrix {
        let g = DMatrix::from_fn(n, n, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        ComplexMatrix { data: g.qr().q() }
    }

    fn residual(m: &HermitianMatrix, s: &SpectralDecomposition) -> f64 {
        m.as_complex().sub(s.reconstruct().as_complex()).frobenius_norm()
    }

    #[test]
    fn diagonal_input_is_sorted() {
        let m = HermitianMatrix::from_real_diagonal(&[3.0, 1.0]).unwrap();
        let s = eigh(&m).unwrap();
        assert_eq!(s.eigenvalues, vec![1.0, 3.0]);
        let u = s.eigenvectors.as_dmatrix();
        assert_eq!(u[(0, 0)].norm(), 0.0);
        assert_eq!(u[(1, 0)].norm(), 1.0);
        assert_eq!(u[(0, 1)].norm(), 1.0);
    }

    #[test]
    fn identity_has_flat_spectrum() {
        for n in 1..6 {
            let m = HermitianMatrix::from_real_diagonal(&vec![1.0; n]).unwrap();
            let s = eigh(&m).unwrap();
            assert!(s.eigenvalues.iter().all(|&l| l == 1.0));
            assert!(residual(&m, &s) <= 1e-12);
        }
    }

    #[test]
    fn random_reconstruction_and_orthonormality() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in [1, 2, 5, 8, 16] {
            for _ in 0..10 {
                let m = random_hermitian(n, &mut rng);
                let s = eigh(&m).unwrap();
                let scale = m.frobenius_norm().max(1.0);
                assert!(residual(&m, &s) <= 1e-10 * scale);
                assert!(s.eigenvectors.unitary_deviation() <= 1e-10);
                assert!(s.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
            }
        }
    }

    // Roots of the characteristic polynomial, computed independently.
    fn char_poly_roots(m: &HermitianMatrix) -> Vec<f64> {
        let n = m.dim();
        let a = |i: usize, j: usize| m.get(i, j);
        let mut roots = match n {
            1 => vec![a(0, 0).re],
            2 => {
                let tr = a(0, 0).re + a(1, 1).re;
                let det = a(0, 0).re * a(1, 1).re - a(0, 1).norm_sqr();
                let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
                vec![tr / 2.0 - disc, tr / 2.0 + disc]
            }
            3 => {
                // x^3 - c2 x^2 + c1 x - c0 with trigonometric solution
                let c2 = (0..3).map(|i| a(i, i).re).sum::<f64>();
                let c1 = a(0, 0).re * a(1, 1).re + a(0, 0).re * a(2, 2).re + a(1, 1).re * a(2, 2).re
                    - a(0, 1).norm_sqr()
                    - a(0, 2).norm_sqr()
                    - a(1, 2).norm_sqr();
                let c0 = (a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1))
                    - a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0))
                    + a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0)))
                .re;
                let shift = c2 / 3.0;
                let p = c1 - c2 * c2 / 3.0;
                let q = -2.0 * c2.powi(3) / 27.0 + c2 * c1 / 3.0 - c0;
                let r = (-p / 3.0).max(0.0).sqrt();
                let arg = if r == 0.0 {
                    0.0
                } else {
                    (3.0 * q / (2.0 * p * r)).clamp(-1.0, 1.0)
                };
                let phi = arg.acos() / 3.0;
                (0..3)
                    .map(|k| shift + 2.0 * r * (phi - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos())
                    .collect()
            }
            _ => unreachable!(),
        };
        roots.sort_by(f64::total_cmp);
        roots
    }

    #[test]
    fn matches_characteristic_polynomial_small_n() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..=3 {
            for _ in 0..50 {
                let m = random_hermitian(n, &mut rng);
                let s = eigh(&m).unwrap();
                let roots = char_poly_roots(&m);
                for (x, y) in s.eigenvalues.iter().zip(&roots) {
                    assert!((x - y).abs() < 1e-9, "n={n}: {:?} vs {:?}", s.eigenvalues, roots);
                }
            }
        }
    }

    #[test]
    fn spectrum_invariant_under_conjugation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let m = random_hermitian(4, &mut rng);
            let u = random_unitary(4, &mut rng);
            let before = eigh(&m).unwrap().eigenvalues;
            let after = eigh(&conjugate(&m, &u).unwrap()).unwrap().eigenvalues;
            for (x, y) in before.iter().zip(&after) {
                assert!((x - y).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn iteration_cap_reports_no_convergence() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = random_hermitian(6, &mut rng);
        let err = eigh_with_tolerance(&m, 1e-14, 0).unwrap_err();
        assert!(matches!(err, Error::EighNoConvergence { .. }));
    }
}
