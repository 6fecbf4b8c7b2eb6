//! Cyclic Jacobi eigensolver for small Hermitian matrices.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;

/// Hermiticity tolerance accepted on input.
pub const HERMITIAN_TOL: f64 = 1e-10;
const OFF_DIAGONAL_TOL: f64 = 1e-14;
const MAX_SWEEPS: usize = 64;

/// Spectral decomposition `m = V diag(values) V^dagger`.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, in the order of `values`.
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let d = ComplexMatrix::from_real_diag(&self.values);
        &(&self.vectors * &d) * &self.vectors.dagger()
    }
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.rows();
    let mut acc = 0.0;
    for p in 0..n {
        for q in 0..n {
            if p != q {
                acc += a[(p, q)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// Eigen-decomposition of a Hermitian matrix.
pub fn hermitian_eig(m: &ComplexMatrix) -> Result<HermitianEigen> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigensolver needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    if !m.is_finite() {
        return Err(Error::NonFinite("eigensolver input".into()));
    }
    let herm_err = m.hermiticity_error();
    if herm_err > HERMITIAN_TOL {
        return Err(Error::NotHermitian(herm_err));
    }

    let n = m.rows();
    // Symmetrize so that round-off in the input cannot leak into the rotations.
    let mut a = ComplexMatrix::from_fn(n, n, |r, c| {
        if r == c {
            C64::new(m[(r, r)].re, 0.0)
        } else {
            (m[(r, c)] + m[(c, r)].conj()) * 0.5
        }
    });
    let mut v = ComplexMatrix::identity(n);
    let scale = a.data().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(1.0);

    let mut converged = n <= 1;
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) < OFF_DIAGONAL_TOL * scale {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }
    if !converged && off_diagonal_norm(&a) >= OFF_DIAGONAL_TOL * scale {
        return Err(Error::NoConvergence(MAX_SWEEPS));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(HermitianEigen { values, vectors })
}

/// Eigenvalues only.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    Ok(hermitian_eig(m)?.values)
}

// Annihilates a[p][q] with the unitary J = diag(1, conj(e)) * [[c, s], [-s, c]]
// acting on the (p, q) plane, where e is the phase of a[p][q].
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    // Skip rotations that cannot change the diagonal at working precision.
    if mag < f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
        a[(p, q)] = C64::new(0.0, 0.0);
        a[(q, p)] = C64::new(0.0, 0.0);
        return;
    }
    let e = apq / mag;
    let tau = (aqq - app) / (2.0 * mag);
    let t = if tau == 0.0 {
        1.0
    } else {
        tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let ec = e.conj();
    let n = a.rows();

    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * c - akq * ec * s;
        a[(k, q)] = akp * s + akq * ec * c;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = apk * c - aqk * e * s;
        a[(q, k)] = apk * s + aqk * e * c;
    }
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c - vkq * ec * s;
        v[(k, q)] = vkp * s + vkq * ec * c;
    }
    a[(p, q)] = C64::new(0.0, 0.0);
    a[(q, p)] = C64::new(0.0, 0.0);
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
}

/// Closed-form eigenvalues (ascending) of a 2x2 Hermitian matrix given by its
/// diagonal and upper off-diagonal entry.
#[inline]
pub fn hermitian2_eigenvalues(a: f64, d: f64, b: C64) -> [f64; 2] {
    let mean = 0.5 * (a + d);
    let half_gap = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
    [mean - half_gap, mean + half_gap]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{ONE, ZERO};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, rng: &mut impl Rng) -> ComplexMatrix {
        let g = ComplexMatrix::from_fn(n, n, |_, _| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        (&g + &g.dagger()).scale_real(0.5)
    }

    #[test]
    fn diagonal_input() {
        let e = hermitian_eig(&ComplexMatrix::from_real_diag(&[0.75, 0.25])).unwrap();
        assert_eq!(e.values, vec![0.25, 0.75]);
        assert!((e.vectors[(1, 0)].norm() - 1.0).abs() < 1e-15);
        assert!((e.vectors[(0, 1)].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pauli_x_spectrum() {
        let x = ComplexMatrix::from_vec(2, 2, vec![ZERO, ONE, ONE, ZERO]).unwrap();
        let e = hermitian_eig(&x).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-14);
        assert!((e.values[1] - 1.0).abs() < 1e-14);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        // (|0> - |1>)/sqrt2 up to a global phase.
        let v0 = e.vectors.column(0);
        let overlap = (v0[0] * h - v0[1] * h).norm();
        assert!((overlap - 1.0).abs() < 1e-12);
        let v1 = e.vectors.column(1);
        let overlap = (v1[0] * h + v1[1] * h).norm();
        assert!((overlap - 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_hermitian_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [2, 3, 4, 8] {
            for _ in 0..20 {
                let h = random_hermitian(n, &mut rng);
                let e = hermitian_eig(&h).unwrap();
                assert!(e.reconstruct().max_abs_diff(&h) <= 1e-9);
                let vv = &e.vectors.dagger() * &e.vectors;
                assert!(vv.max_abs_diff(&ComplexMatrix::identity(n)) <= 1e-9);
                assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
            }
        }
    }

    #[test]
    fn degenerate_spectrum() {
        let e = hermitian_eig(&ComplexMatrix::identity(8).scale_real(0.125)).unwrap();
        assert!(e.values.iter().all(|&x| (x - 0.125).abs() < 1e-16));
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = ComplexMatrix::from_vec(2, 2, vec![ZERO, ONE, ZERO, ZERO]).unwrap();
        assert!(matches!(hermitian_eig(&m), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn closed_form_two_by_two_matches_jacobi() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let h = random_hermitian(2, &mut rng);
            let closed = hermitian2_eigenvalues(h[(0, 0)].re, h[(1, 1)].re, h[(0, 1)]);
            let jac = hermitian_eigenvalues(&h).unwrap();
            assert!((closed[0] - jac[0]).abs() < 1e-13);
            assert!((closed[1] - jac[1]).abs() < 1e-13);
        }
    }
}
