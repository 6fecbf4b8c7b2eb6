//! Rank-1 projective measurements on one or two qubits.

use num_complex::Complex64 as C64;

use crate::density::{normalize_subsystems, project_and_normalize, DensityMatrix, PROJECTOR_TOL};
use crate::entropy::{vn_entropy, Bits};
use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, ZERO};

/// Number of real parameters of [`two_qubit_basis`].
pub const TWO_QUBIT_PARAMS: usize = 8;

/// A complete set of orthogonal rank-1 projectors on `subsystems`.
#[derive(Clone, Debug)]
pub struct MeasurementBasis {
    subsystems: Vec<usize>,
    vectors: Vec<Vec<C64>>,
    projectors: Vec<ComplexMatrix>,
    params: Vec<f64>,
}

impl MeasurementBasis {
    /// Builds a basis from orthonormal vectors, checking the projector invariants.
    pub fn from_vectors(subsystems: Vec<usize>, vectors: Vec<Vec<C64>>, params: Vec<f64>) -> Result<Self> {
        let d = vectors.len();
        if d == 0 || vectors.iter().any(|v| v.len() != d) {
            return Err(Error::DimensionMismatch("basis must be d vectors of length d".into()));
        }
        let projectors = vectors.iter().map(|v| ComplexMatrix::outer(v)).collect();
        let basis = Self {
            subsystems,
            vectors,
            projectors,
            params,
        };
        basis.check()?;
        Ok(basis)
    }

    fn check(&self) -> Result<()> {
        let d = self.vectors.len();
        let mut sum = ComplexMatrix::zeros(d, d);
        for (i, p) in self.projectors.iter().enumerate() {
            if (p * p).max_abs_diff(p) > PROJECTOR_TOL {
                return Err(Error::DimensionMismatch(format!("projector {i} is not idempotent")));
            }
            for q in &self.projectors[i + 1..] {
                if (p * q).max_abs() > PROJECTOR_TOL {
                    return Err(Error::DimensionMismatch("projectors are not orthogonal".into()));
                }
            }
            sum = &sum + p;
        }
        if sum.max_abs_diff(&ComplexMatrix::identity(d)) > PROJECTOR_TOL {
            return Err(Error::DimensionMismatch("projectors do not sum to identity".into()));
        }
        Ok(())
    }

    pub fn subsystems(&self) -> &[usize] {
        &self.subsystems
    }

    pub fn projectors(&self) -> &[ComplexMatrix] {
        &self.projectors
    }

    pub fn vectors(&self) -> &[Vec<C64>] {
        &self.vectors
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }
}

/// `cos(θ/2)|0> + e^{iφ} sin(θ/2)|1>` and its orthocomplement.
#[inline]
pub fn qubit_basis_vectors(theta: f64, phi: f64) -> [[C64; 2]; 2] {
    let (s, c) = (0.5 * theta).sin_cos();
    let e = C64::from_polar(1.0, phi);
    [
        [C64::new(c, 0.0), e * s],
        [-e.conj() * s, C64::new(c, 0.0)],
    ]
}

pub fn qubit_basis(subsystem: usize, theta: f64, phi: f64) -> MeasurementBasis {
    let v = qubit_basis_vectors(theta, phi);
    MeasurementBasis::from_vectors(
        vec![subsystem],
        v.iter().map(|x| x.to_vec()).collect(),
        vec![theta, phi],
    )
    .expect("single-qubit basis is orthonormal by construction")
}

#[inline]
pub(crate) fn local_unitary(theta: f64, phi: f64, lambda: f64) -> [[C64; 2]; 2] {
    let (s, c) = (0.5 * theta).sin_cos();
    let ep = C64::from_polar(1.0, phi);
    let el = C64::from_polar(1.0, lambda);
    [[C64::new(c, 0.0), -el * s], [ep * s, ep * el * c]]
}

/// Columns of `(U(θ1,φ1,λ1) ⊗ U(θ2,φ2,λ2)) E(γ, δ)`, where `E` rotates the
/// `{|00>,|11>}` plane by `γ` and the `{|01>,|10>}` plane by `δ`.
///
/// Parameter order: `[θ1, φ1, λ1, θ2, φ2, λ2, γ, δ]`.
#[inline]
pub fn two_qubit_basis_vectors(params: &[f64; TWO_QUBIT_PARAMS]) -> [[C64; 4]; 4] {
    compose_two_qubit_basis(
        &local_unitary(params[0], params[1], params[2]),
        &local_unitary(params[3], params[4], params[5]),
        params[6].sin_cos(),
        params[7].sin_cos(),
    )
}

/// Basis vectors from precomputed local unitaries and `(sin, cos)` of the
/// entangler angles.
#[inline]
pub(crate) fn compose_two_qubit_basis(
    u1: &[[C64; 2]; 2],
    u2: &[[C64; 2]; 2],
    (sg, cg): (f64, f64),
    (sd, cd): (f64, f64),
) -> [[C64; 4]; 4] {
    // Entangler column k has weight w0 on basis index i0 and w1 on i1.
    let ent = [(0, cg, 3, sg), (1, cd, 2, sd), (1, -sd, 2, cd), (0, -sg, 3, cg)];
    let mut out = [[ZERO; 4]; 4];
    for (k, &(i0, w0, i1, w1)) in ent.iter().enumerate() {
        for r in 0..4 {
            let (r1, r2) = (r >> 1, r & 1);
            out[k][r] = u1[r1][i0 >> 1] * u2[r2][i0 & 1] * w0 + u1[r1][i1 >> 1] * u2[r2][i1 & 1] * w1;
        }
    }
    out
}

pub fn two_qubit_basis(subsystems: [usize; 2], params: &[f64; TWO_QUBIT_PARAMS]) -> MeasurementBasis {
    let v = two_qubit_basis_vectors(params);
    MeasurementBasis::from_vectors(
        subsystems.to_vec(),
        v.iter().map(|x| x.to_vec()).collect(),
        params.to_vec(),
    )
    .expect("two-qubit basis is orthonormal by construction")
}

/// `sum_i p_i S(rho_{rest|i})` for one fixed basis on `basis.subsystems()`.
pub fn measured_conditional_entropy(rho: &DensityMatrix, basis: &MeasurementBasis) -> Result<Bits> {
    normalize_subsystems(basis.subsystems(), rho.num_subsystems())?;
    let mut total = 0.0;
    for proj in basis.projectors() {
        let branch = project_and_normalize(rho, proj, basis.subsystems())?;
        if let Some(post) = branch.post_state {
            total += branch.probability * vn_entropy(&post)?.0;
        }
    }
    Ok(Bits(total.max(0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{validate_density, StateVector};
    use crate::matrix::kron;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4};

    fn approx_proj(p: &ComplexMatrix, v: &[C64]) -> bool {
        p.max_abs_diff(&ComplexMatrix::outer(v)) < 1e-12
    }

    #[test]
    fn computational_qubit_basis() {
        let b = qubit_basis(0, 0.0, 0.0);
        assert!(approx_proj(&b.projectors()[0], &[C64::new(1.0, 0.0), ZERO]));
        assert!(approx_proj(&b.projectors()[1], &[ZERO, C64::new(1.0, 0.0)]));
    }

    #[test]
    fn x_qubit_basis() {
        let b = qubit_basis(0, FRAC_PI_2, 0.0);
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        assert!(approx_proj(&b.projectors()[0], &[h, h]));
        assert!(approx_proj(&b.projectors()[1], &[h, -h]));
    }

    #[test]
    fn trivial_two_qubit_basis_is_computational() {
        let b = two_qubit_basis([1, 2], &[0.0; 8]);
        for (k, v) in b.vectors().iter().enumerate() {
            let idx = [0, 1, 2, 3][k];
            for (r, z) in v.iter().enumerate() {
                let expect = if r == idx { 1.0 } else { 0.0 };
                assert!((z - C64::new(expect, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn canonical_entangler_gives_bell_basis() {
        let mut params = [0.0; 8];
        params[6] = FRAC_PI_4;
        params[7] = FRAC_PI_4;
        let b = two_qubit_basis([0, 1], &params);
        for v in b.vectors() {
            let rho = validate_density(ComplexMatrix::outer(v), &[2, 2]).unwrap();
            let s = vn_entropy(&rho.partial_trace(&[0]).unwrap()).unwrap().0;
            assert!((s - 1.0).abs() < 1e-12, "marginal entropy {s}");
        }
    }

    #[test]
    fn measured_entropy_product_state() {
        let ra = ComplexMatrix::from_real_diag(&[0.8, 0.2]);
        let rb = ComplexMatrix::from_vec(
            2,
            2,
            vec![C64::new(0.5, 0.0), C64::new(0.2, 0.1), C64::new(0.2, -0.1), C64::new(0.5, 0.0)],
        )
        .unwrap();
        let rho = validate_density(kron(&ra, &rb), &[2, 2]).unwrap();
        let sa = vn_entropy(&rho.partial_trace(&[0]).unwrap()).unwrap().0;
        for (t, p) in [(0.0, 0.0), (1.0, 2.0), (2.5, -0.7)] {
            let s = measured_conditional_entropy(&rho, &qubit_basis(1, t, p)).unwrap().0;
            assert!((s - sa).abs() < 1e-12);
        }
    }

    #[test]
    fn measured_entropy_bell_and_classical() {
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        let bell = StateVector::new(vec![h, ZERO, ZERO, h], &[2, 2]).unwrap().to_density();
        let s = measured_conditional_entropy(&bell, &qubit_basis(1, 0.0, 0.0)).unwrap().0;
        assert!(s.abs() < 1e-12);
        let classical = validate_density(ComplexMatrix::from_real_diag(&[0.5, 0.0, 0.0, 0.5]), &[2, 2]).unwrap();
        let s = measured_conditional_entropy(&classical, &qubit_basis(1, FRAC_PI_2, 0.0)).unwrap().0;
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn basis_outside_state_is_rejected() {
        let rho = DensityMatrix::maximally_mixed(&[2, 2]);
        assert!(measured_conditional_entropy(&rho, &qubit_basis(3, 0.0, 0.0)).is_err());
    }

    #[test]
    fn from_vectors_rejects_non_orthogonal() {
        let v = vec![vec![C64::new(1.0, 0.0), ZERO], vec![C64::new(1.0, 0.0), ZERO]];
        assert!(MeasurementBasis::from_vectors(vec![0], v, vec![]).is_err());
    }
}
