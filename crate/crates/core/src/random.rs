//! Random states and unitaries for sampling and property checks.

use std::f64::consts::TAU;

use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::density::{DensityMatrix, StateVector};
use crate::matrix::ComplexMatrix;

fn gaussian(rng: &mut impl Rng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random pure state on the given layout.
pub fn random_pure_state(dims: &[usize], rng: &mut impl Rng) -> StateVector {
    let n: usize = dims.iter().product();
    loop {
        let amps: Vec<C64> = (0..n).map(|_| gaussian(rng)).collect();
        if let Ok(psi) = StateVector::normalized(amps, dims, 1e-8) {
            return psi;
        }
    }
}

/// Full-rank mixed state from the Hilbert–Schmidt ensemble, `G G^dagger / tr`.
pub fn random_mixed_state(dims: &[usize], rng: &mut impl Rng) -> DensityMatrix {
    let n: usize = dims.iter().product();
    let g = ComplexMatrix::from_fn(n, n, |_, _| gaussian(rng));
    let w = &g * &g.dagger();
    let tr = w.trace().re;
    let mut m = w.scale_real(1.0 / tr);
    // Exact Hermiticity for downstream checks.
    for r in 0..n {
        m[(r, r)] = C64::new(m[(r, r)].re, 0.0);
        for c in (r + 1)..n {
            m[(c, r)] = m[(r, c)].conj();
        }
    }
    DensityMatrix::from_parts_unchecked(m, dims.to_vec())
}

/// Haar-random unitary via Gram–Schmidt on a complex Ginibre matrix.
pub fn random_unitary(n: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v: Vec<C64> = (0..n).map(|_| gaussian(rng)).collect();
        for _ in 0..2 {
            for q in &cols {
                let overlap: C64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (x, y) in v.iter_mut().zip(q) {
                    *x -= overlap * y;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-8 {
            cols.push(v.into_iter().map(|z| z / norm).collect());
        }
    }
    ComplexMatrix::from_fn(n, n, |r, c| cols[c][r])
}

/// Haar-uniform single-qubit state `(α, β)`: polar angle with uniform cosine,
/// uniform azimuth.
pub fn haar_qubit(rng: &mut impl Rng) -> (C64, C64) {
    let cos_polar: f64 = rng.gen_range(-1.0..=1.0);
    let azimuth: f64 = rng.gen_range(0.0..TAU);
    let half = 0.5 * cos_polar.clamp(-1.0, 1.0).acos();
    (C64::new(half.cos(), 0.0), C64::from_polar(half.sin(), azimuth))
}
