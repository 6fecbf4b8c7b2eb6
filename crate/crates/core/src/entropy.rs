//! Measurement-free information quantities. All logarithms are base 2.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::density::{normalize_subsystems, DensityMatrix};
use crate::eigen::hermitian_eigenvalues;
use crate::error::{Error, Result};

/// Eigenvalues below this are exact zeros inside entropy sums.
pub const EIGEN_ZERO: f64 = 1e-14;

/// An information quantity in bits.
#[derive(Clone, Copy, Debug, Default, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Bits(pub f64);

impl Bits {
    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} bits", self.0)
    }
}

impl Add for Bits {
    type Output = Bits;
    fn add(self, rhs: Bits) -> Bits {
        Bits(self.0 + rhs.0)
    }
}

impl Sub for Bits {
    type Output = Bits;
    fn sub(self, rhs: Bits) -> Bits {
        Bits(self.0 - rhs.0)
    }
}

impl Neg for Bits {
    type Output = Bits;
    fn neg(self) -> Bits {
        Bits(-self.0)
    }
}

/// `-sum p log2 p` over a spectrum, with `0 log 0 = 0`.
pub fn shannon_bits(spectrum: &[f64]) -> f64 {
    spectrum
        .iter()
        .filter(|&&p| p > EIGEN_ZERO)
        .map(|&p| -p * p.log2())
        .sum()
}

/// Von Neumann entropy `S(rho) = -tr(rho log2 rho)`.
pub fn vn_entropy(rho: &DensityMatrix) -> Result<Bits> {
    let spectrum = hermitian_eigenvalues(rho.matrix())?;
    Ok(Bits(shannon_bits(&spectrum).max(0.0)))
}

/// Entropy of the reduced state on `subsystems`.
pub fn marginal_entropy(rho: &DensityMatrix, subsystems: &[usize]) -> Result<Bits> {
    vn_entropy(&rho.partial_trace(subsystems)?)
}

fn disjoint_union(a: &[usize], b: &[usize], n: usize) -> Result<Vec<usize>> {
    let a = normalize_subsystems(a, n)?;
    let b = normalize_subsystems(b, n)?;
    if a.iter().any(|i| b.contains(i)) {
        return Err(Error::InvalidSubsystem(format!("{a:?} and {b:?} overlap")));
    }
    let mut u: Vec<usize> = a.into_iter().chain(b).collect();
    u.sort_unstable();
    Ok(u)
}

/// `S(target ∪ condition) - S(condition)`; negative for entangled states.
pub fn unmeasured_conditional_entropy(
    rho: &DensityMatrix,
    target: &[usize],
    condition: &[usize],
) -> Result<Bits> {
    let joint = disjoint_union(target, condition, rho.num_subsystems())?;
    Ok(marginal_entropy(rho, &joint)? - marginal_entropy(rho, condition)?)
}

/// Quantum mutual information `S(A) + S(B) - S(AB)` between two disjoint parts.
pub fn quantum_mutual_information(
    rho: &DensityMatrix,
    part_a: &[usize],
    part_b: &[usize],
) -> Result<Bits> {
    let joint = disjoint_union(part_a, part_b, rho.num_subsystems())?;
    Ok(marginal_entropy(rho, part_a)? + marginal_entropy(rho, part_b)? - marginal_entropy(rho, &joint)?)
}

/// Unmeasured conditional mutual information `S~(a|c) - S~(a|bc)`.
pub fn unmeasured_cond_mutual_info(rho: &DensityMatrix, a: usize, b: usize, c: usize) -> Result<Bits> {
    if a == b || b == c || a == c {
        return Err(Error::InvalidSubsystem(format!("parties {a}, {b}, {c} must be distinct")));
    }
    Ok(unmeasured_conditional_entropy(rho, &[a], &[c])?
        - unmeasured_conditional_entropy(rho, &[a], &[b, c])?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{validate_density, StateVector};
    use crate::matrix::{kron, ComplexMatrix, ZERO};
    use num_complex::Complex64 as C64;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn bell() -> DensityMatrix {
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        StateVector::new(vec![h, ZERO, ZERO, h], &[2, 2]).unwrap().to_density()
    }

    fn ghz() -> DensityMatrix {
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        let mut amps = vec![ZERO; 8];
        amps[0] = h;
        amps[7] = h;
        StateVector::new(amps, &[2, 2, 2]).unwrap().to_density()
    }

    fn product_ab() -> DensityMatrix {
        let ra = ComplexMatrix::from_real_diag(&[0.8, 0.2]);
        let rb = ComplexMatrix::from_real_diag(&[0.3, 0.7]);
        validate_density(kron(&ra, &rb), &[2, 2]).unwrap()
    }

    fn h2(p: f64) -> f64 {
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }

    #[test]
    fn entropy_known_values() {
        let pure = StateVector::basis(&[0], &[2]).unwrap().to_density();
        assert!(vn_entropy(&pure).unwrap().0.abs() <= 1e-10);
        let mixed = DensityMatrix::maximally_mixed(&[2]);
        assert!((vn_entropy(&mixed).unwrap().0 - 1.0).abs() <= 1e-10);
        let d = validate_density(ComplexMatrix::from_real_diag(&[0.5, 0.25, 0.25, 0.0]), &[2, 2]).unwrap();
        assert!((vn_entropy(&d).unwrap().0 - 1.5).abs() <= 1e-12);
    }

    #[test]
    fn conditional_entropies() {
        let rho = product_ab();
        let s = unmeasured_conditional_entropy(&rho, &[0], &[1]).unwrap().0;
        assert!((s - h2(0.8)).abs() < 1e-12);
        assert!((unmeasured_conditional_entropy(&bell(), &[0], &[1]).unwrap().0 + 1.0).abs() < 1e-12);
        assert!((unmeasured_conditional_entropy(&ghz(), &[0], &[1, 2]).unwrap().0 + 1.0).abs() < 1e-12);
        assert!(unmeasured_conditional_entropy(&ghz(), &[0], &[0, 1]).is_err());
    }

    #[test]
    fn mutual_information_values() {
        assert!(quantum_mutual_information(&product_ab(), &[0], &[1]).unwrap().0.abs() < 1e-12);
        assert!((quantum_mutual_information(&bell(), &[0], &[1]).unwrap().0 - 2.0).abs() < 1e-12);
        let classical = validate_density(ComplexMatrix::from_real_diag(&[0.5, 0.0, 0.0, 0.5]), &[2, 2]).unwrap();
        assert!((quantum_mutual_information(&classical, &[0], &[1]).unwrap().0 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn conditional_mutual_information_values() {
        let c = ComplexMatrix::from_real_diag(&[0.6, 0.4]);
        let product = validate_density(
            kron(&kron(&ComplexMatrix::from_real_diag(&[0.9, 0.1]), &ComplexMatrix::from_real_diag(&[0.2, 0.8])), &c),
            &[2, 2, 2],
        )
        .unwrap();
        assert!(unmeasured_cond_mutual_info(&product, 0, 1, 2).unwrap().0.abs() < 1e-12);
        assert!((unmeasured_cond_mutual_info(&ghz(), 0, 1, 2).unwrap().0 - 1.0).abs() < 1e-12);
        let bell_c = validate_density(kron(bell().matrix(), &c), &[2, 2, 2]).unwrap();
        assert!((unmeasured_cond_mutual_info(&bell_c, 0, 1, 2).unwrap().0 - 2.0).abs() < 1e-12);
        assert!(unmeasured_cond_mutual_info(&ghz(), 0, 0, 2).is_err());
    }
}
