//! Minimization of the measured conditional entropy over projective
//! measurements: a deterministic coarse grid followed by simplex refinement.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8, PI, TAU};
use std::path::Path;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::{complement, normalize_subsystems, DensityMatrix, MIN_PROBABILITY};
use crate::eigen::{hermitian2_eigenvalues, hermitian_eigenvalues};
use crate::entropy::{shannon_bits, Bits};
use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, ZERO};
use crate::measurement::{
    compose_two_qubit_basis, local_unitary, qubit_basis_vectors, two_qubit_basis_vectors, TWO_QUBIT_PARAMS,
};
use crate::simplex::nelder_mead;

/// Values at or below this are the global minimum of a nonnegative objective.
const ZERO_FLOOR: f64 = 1e-13;

/// Search settings shared by every discord evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    /// Points per axis of the one-qubit (θ, φ) grid.
    pub grid_1q: usize,
    /// Points per parameter of the eight-parameter two-qubit grid.
    pub grid_2q: usize,
    /// Simplex diameter at which refinement stops.
    pub refine_tol: f64,
    /// Evaluation cap per simplex run.
    pub max_evals: usize,
    /// Extra randomly seeded simplex runs for two-qubit searches.
    pub restarts: usize,
    pub seed: u64,
    /// Disable to return the grid minimum as-is.
    pub refine: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            grid_1q: 31,
            grid_2q: 5,
            refine_tol: 1e-7,
            max_evals: 2000,
            restarts: 32,
            seed: 0,
            refine: true,
        }
    }
}

impl OptimizerConfig {
    /// Parses `key = value` lines (TOML syntax); missing keys keep their defaults.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_1q < 2 || self.grid_2q < 2 {
            return Err(Error::Range("grid resolutions must be at least 2".into()));
        }
        if !(self.refine_tol > 0.0 && self.refine_tol.is_finite()) {
            return Err(Error::Range("refine_tol must be positive".into()));
        }
        Ok(())
    }
}

/// Result of a conditional-entropy minimization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinEntropy {
    pub value: Bits,
    /// Basis parameters (radians) of the best measurement found.
    pub params: Vec<f64>,
    pub evals: usize,
    pub converged: bool,
}

/// Fast evaluator of `sum_i p_i S(rho_{U|i})` for bases on a fixed set of
/// measured qubits. The state is reordered as (unmeasured ⊗ measured).
pub(crate) struct ConditionalEntropyKernel {
    rho: ComplexMatrix,
    unmeasured_dim: usize,
    measured_dim: usize,
}

impl ConditionalEntropyKernel {
    pub(crate) fn new(rho: &DensityMatrix, measured: &[usize]) -> Result<Self> {
        let n = rho.num_subsystems();
        let measured = normalize_subsystems(measured, n)?;
        let unmeasured = complement(&measured, n);
        if unmeasured.is_empty() {
            return Err(Error::InvalidSubsystem("nothing left unmeasured".into()));
        }
        let order: Vec<usize> = unmeasured.iter().chain(&measured).copied().collect();
        let permuted = rho.permuted(&order)?;
        let measured_dim = measured.iter().map(|&k| rho.dims()[k]).product();
        Ok(Self {
            unmeasured_dim: rho.dim() / measured_dim,
            measured_dim,
            rho: permuted.matrix().clone(),
        })
    }

    // v^dagger B_{u,u'} v for the (u, u') block.
    #[inline]
    fn block_form(&self, u: usize, up: usize, v: &[C64]) -> C64 {
        let d = self.measured_dim;
        let mut acc = ZERO;
        for (m, vm) in v.iter().enumerate() {
            let row = (u * d + m) * self.rho.cols() + up * d;
            let data = &self.rho.data()[row..row + d];
            let mut inner = ZERO;
            for (x, vx) in data.iter().zip(v) {
                inner += x * vx;
            }
            acc += vm.conj() * inner;
        }
        acc
    }

    /// `p S(rho_{U|v})` for one outcome vector.
    #[inline]
    fn outcome_term(&self, v: &[C64]) -> f64 {
        if self.unmeasured_dim == 2 {
            let a = self.block_form(0, 0, v).re;
            let d = self.block_form(1, 1, v).re;
            let p = a + d;
            if p < MIN_PROBABILITY {
                return 0.0;
            }
            let b = self.block_form(0, 1, v);
            let [l0, l1] = hermitian2_eigenvalues(a / p, d / p, b / p);
            return p * shannon_bits(&[l0, l1]);
        }
        let du = self.unmeasured_dim;
        let sigma = ComplexMatrix::from_fn(du, du, |r, c| self.block_form(r, c, v));
        let p = sigma.trace().re;
        if p < MIN_PROBABILITY {
            return 0.0;
        }
        match hermitian_eigenvalues(&sigma.scale_real(1.0 / p)) {
            Ok(spec) => p * shannon_bits(&spec),
            Err(_) => f64::INFINITY,
        }
    }

    pub(crate) fn eval<const D: usize>(&self, basis: &[[C64; D]; D]) -> f64 {
        debug_assert_eq!(D, self.measured_dim);
        basis.iter().map(|v| self.outcome_term(v)).sum::<f64>().max(0.0)
    }
}

#[derive(Clone, Copy)]
struct Candidate {
    value: f64,
    index: usize,
}

fn better(a: Candidate, b: Candidate) -> Candidate {
    match a.value.total_cmp(&b.value) {
        std::cmp::Ordering::Less => a,
        std::cmp::Ordering::Greater => b,
        std::cmp::Ordering::Equal => {
            if a.index <= b.index {
                a
            } else {
                b
            }
        }
    }
}

const GRID_CHUNK: usize = 4096;

/// Argmin over `0..count`, first index wins ties; independent of evaluation
/// order. Chunks are scanned in index order and the scan stops after a chunk
/// whose best value is already at the zero floor.
fn grid_argmin(count: usize, f: impl Fn(usize) -> f64 + Sync) -> (Candidate, usize) {
    let mut best = Candidate {
        value: f64::INFINITY,
        index: usize::MAX,
    };
    let mut evaluated = 0;
    for start in (0..count).step_by(GRID_CHUNK) {
        let end = (start + GRID_CHUNK).min(count);
        let chunk = (start..end)
            .into_par_iter()
            .map(|index| {
                let v = f(index);
                Candidate {
                    value: if v.is_nan() { f64::INFINITY } else { v },
                    index,
                }
            })
            .reduce(|| best, better);
        best = better(best, chunk);
        evaluated = end;
        if best.value <= ZERO_FLOOR {
            break;
        }
    }
    (best, evaluated)
}

fn closed_linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn periodic_linspace(period: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| period * i as f64 / n as f64).collect()
}

/// Entangler angles: `n` points on `[0, π/2]`, always containing 0, π/8 and π/4.
pub(crate) fn entangler_grid(n: usize) -> Vec<f64> {
    let mut v = closed_linspace(0.0, FRAC_PI_2, n);
    for must in [0.0, FRAC_PI_8, FRAC_PI_4] {
        if !v.iter().any(|x| (x - must).abs() < 1e-12) {
            v.push(must);
        }
    }
    v.sort_by(f64::total_cmp);
    v
}

/// Minimum over projective measurements on `measured` (one or two qubits) of
/// the measured conditional entropy of the remaining subsystems.
pub fn min_conditional_entropy(rho: &DensityMatrix, measured: &[usize], cfg: &OptimizerConfig) -> Result<MinEntropy> {
    cfg.validate()?;
    let sorted = normalize_subsystems(measured, rho.num_subsystems())?;
    if sorted.len() > 2 {
        return Err(Error::UnsupportedSubsystemSize(sorted.len()));
    }
    if sorted.iter().any(|&k| rho.dims()[k] != 2) {
        return Err(Error::DimensionMismatch("measured subsystems must be qubits".into()));
    }
    let kernel = ConditionalEntropyKernel::new(rho, &sorted)?;
    match sorted.len() {
        1 => Ok(search_one_qubit(&kernel, cfg)),
        _ => Ok(search_two_qubit(&kernel, cfg)),
    }
}

fn search_one_qubit(kernel: &ConditionalEntropyKernel, cfg: &OptimizerConfig) -> MinEntropy {
    let n = cfg.grid_1q;
    let thetas = closed_linspace(0.0, PI, n);
    let phis = periodic_linspace(TAU, n);
    let f = |x: &[f64]| kernel.eval(&qubit_basis_vectors(x[0], x[1]));
    let (best, mut evals) = grid_argmin(n * n, |i| f(&[thetas[i / n], phis[i % n]]));
    let mut params = vec![thetas[best.index / n], phis[best.index % n]];
    let mut value = best.value;
    let mut converged = value <= ZERO_FLOOR;

    if cfg.refine && !converged {
        let steps = [0.5 * PI / (n - 1) as f64, 0.5 * TAU / n as f64];
        let r = nelder_mead(f, &params, &steps, cfg.refine_tol, cfg.max_evals);
        evals += r.evals;
        converged = r.converged;
        if r.value < value {
            value = r.value;
            params = r.x;
        }
    }
    MinEntropy {
        value: Bits(value),
        params,
        evals,
        converged,
    }
}

fn to_params(x: &[f64]) -> [f64; TWO_QUBIT_PARAMS] {
    let mut p = [0.0; TWO_QUBIT_PARAMS];
    p.copy_from_slice(x);
    p
}

fn search_two_qubit(kernel: &ConditionalEntropyKernel, cfg: &OptimizerConfig) -> MinEntropy {
    let n = cfg.grid_2q;
    let thetas = closed_linspace(0.0, PI, n);
    let phases = periodic_linspace(TAU, n);
    let ent = entangler_grid(n);
    let axes: [&[f64]; TWO_QUBIT_PARAMS] = [&thetas, &phases, &phases, &thetas, &phases, &phases, &ent, &ent];
    // Grid index = ((u1 * n^3 + u2) * m + g) * m + d, with u = (θ, φ, λ) row-major.
    let mut locals: Vec<[[C64; 2]; 2]> = Vec::with_capacity(n * n * n);
    for &t in &thetas {
        for &p in &phases {
            for &l in &phases {
                locals.push(local_unitary(t, p, l));
            }
        }
    }
    let ent_sc: Vec<(f64, f64)> = ent.iter().map(|a| a.sin_cos()).collect();
    let (nl, m) = (locals.len(), ent.len());
    let count = nl * nl * m * m;
    let decode = |mut index: usize| {
        let mut p = [0.0; TWO_QUBIT_PARAMS];
        for k in (0..TWO_QUBIT_PARAMS).rev() {
            let len = axes[k].len();
            p[k] = axes[k][index % len];
            index /= len;
        }
        p
    };
    let f = |x: &[f64]| kernel.eval(&two_qubit_basis_vectors(&to_params(x)));

    let (best, mut evals) = grid_argmin(count, |i| {
        let (d, rest) = (i % m, i / m);
        let (g, rest) = (rest % m, rest / m);
        let (u2, u1) = (rest % nl, rest / nl);
        kernel.eval(&compose_two_qubit_basis(&locals[u1], &locals[u2], ent_sc[g], ent_sc[d]))
    });
    let mut params = decode(best.index).to_vec();
    let mut value = best.value;
    let mut converged = value <= ZERO_FLOOR;

    if cfg.refine && !converged {
        let steps: Vec<f64> = axes
            .iter()
            .enumerate()
            .map(|(k, _)| match k {
                0 | 3 => 0.5 * PI / (n - 1) as f64,
                6 | 7 => 0.5 * FRAC_PI_2 / (n - 1) as f64,
                _ => 0.5 * TAU / n as f64,
            })
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut starts = vec![params.clone()];
        for _ in 0..cfg.restarts {
            starts.push(
                (0..TWO_QUBIT_PARAMS)
                    .map(|k| match k {
                        0 | 3 => rng.gen_range(0.0..PI),
                        6 | 7 => rng.gen_range(0.0..FRAC_PI_2),
                        _ => rng.gen_range(0.0..TAU),
                    })
                    .collect(),
            );
        }
        let runs: Vec<_> = starts
            .par_iter()
            .map(|x0| nelder_mead(f, x0, &steps, cfg.refine_tol, cfg.max_evals))
            .collect();
        // The grid-seeded run decides convergence; restarts only offer better points.
        converged = runs[0].converged;
        for r in runs {
            evals += r.evals;
            if r.value < value {
                value = r.value;
                params = r.x;
            }
        }
    }
    MinEntropy {
        value: Bits(value),
        params,
        evals,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{validate_density, StateVector};
    use crate::measurement::{measured_conditional_entropy, qubit_basis, two_qubit_basis};
    use crate::random::{random_mixed_state, random_pure_state};
    use rand::SeedableRng;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn kernel_matches_general_projection_path() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rho = random_mixed_state(&[2, 2, 2], &mut rng);
        for measured in [vec![0usize], vec![1], vec![2]] {
            let kernel = ConditionalEntropyKernel::new(&rho, &measured).unwrap();
            for _ in 0..5 {
                let (t, p) = (rng.gen_range(0.0..PI), rng.gen_range(0.0..TAU));
                let fast = kernel.eval(&qubit_basis_vectors(t, p));
                let slow = measured_conditional_entropy(&rho, &qubit_basis(measured[0], t, p)).unwrap().0;
                assert!((fast - slow).abs() < 1e-12, "{fast} vs {slow}");
            }
        }
        for measured in [[1usize, 2], [0, 2], [0, 1]] {
            let kernel = ConditionalEntropyKernel::new(&rho, &measured).unwrap();
            for _ in 0..5 {
                let params: [f64; 8] = std::array::from_fn(|_| rng.gen_range(0.0..TAU));
                let fast = kernel.eval(&two_qubit_basis_vectors(&params));
                let slow = measured_conditional_entropy(&rho, &two_qubit_basis(measured, &params)).unwrap().0;
                assert!((fast - slow).abs() < 1e-12, "{fast} vs {slow}");
            }
        }
    }

    #[test]
    fn kernel_handles_larger_unmeasured_part() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let rho = random_mixed_state(&[2, 2, 2], &mut rng);
        let kernel = ConditionalEntropyKernel::new(&rho, &[1]).unwrap();
        let fast = kernel.eval(&qubit_basis_vectors(0.4, 1.1));
        let slow = measured_conditional_entropy(&rho, &qubit_basis(1, 0.4, 1.1)).unwrap().0;
        assert!((fast - slow).abs() < 1e-12);
    }

    #[test]
    fn bell_state_reaches_zero() {
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        let bell = StateVector::new(vec![h, ZERO, ZERO, h], &[2, 2]).unwrap().to_density();
        let r = min_conditional_entropy(&bell, &[1], &OptimizerConfig::default()).unwrap();
        assert!(r.value.0.abs() < 1e-6);
    }

    #[test]
    fn product_state_gives_marginal_entropy() {
        let rho = validate_density(
            crate::matrix::kron(
                &ComplexMatrix::from_real_diag(&[0.7, 0.3]),
                &ComplexMatrix::from_real_diag(&[0.5, 0.5]),
            ),
            &[2, 2],
        )
        .unwrap();
        let r = min_conditional_entropy(&rho, &[1], &OptimizerConfig::default()).unwrap();
        let sa = -(0.7f64 * 0.7f64.log2() + 0.3 * 0.3f64.log2());
        assert!((r.value.0 - sa).abs() < 1e-6);
    }

    #[test]
    fn pure_tripartite_two_qubit_measurement_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let psi = random_pure_state(&[2, 2, 2], &mut rng).to_density();
        let cfg = OptimizerConfig {
            grid_2q: 3,
            ..Default::default()
        };
        let r = min_conditional_entropy(&psi, &[1, 2], &cfg).unwrap();
        assert!(r.value.0.abs() < 1e-5);
    }

    #[test]
    fn unsupported_sizes() {
        let rho = DensityMatrix::maximally_mixed(&[2, 2, 2, 2]);
        assert!(matches!(
            min_conditional_entropy(&rho, &[1, 2, 3], &OptimizerConfig::default()),
            Err(Error::UnsupportedSubsystemSize(3))
        ));
        let qutrit = DensityMatrix::maximally_mixed(&[2, 3]);
        assert!(min_conditional_entropy(&qutrit, &[1], &OptimizerConfig::default()).is_err());
    }

    #[test]
    fn result_never_exceeds_random_probes() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let rho = random_mixed_state(&[2, 2], &mut rng);
        let best = min_conditional_entropy(&rho, &[1], &OptimizerConfig::default()).unwrap().value.0;
        for _ in 0..200 {
            let b = qubit_basis(1, rng.gen_range(0.0..PI), rng.gen_range(0.0..TAU));
            assert!(best <= measured_conditional_entropy(&rho, &b).unwrap().0 + 1e-12);
        }
    }

    #[test]
    fn refinement_never_increases_minimum() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..5 {
            let rho = random_mixed_state(&[2, 2, 2], &mut rng);
            for measured in [vec![1usize], vec![1, 2]] {
                let coarse = OptimizerConfig {
                    grid_2q: 3,
                    refine: false,
                    ..Default::default()
                };
                let refined = OptimizerConfig { refine: true, ..coarse.clone() };
                let a = min_conditional_entropy(&rho, &measured, &coarse).unwrap().value.0;
                let b = min_conditional_entropy(&rho, &measured, &refined).unwrap().value.0;
                assert!(b <= a);
            }
        }
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let rho = random_mixed_state(&[2, 2, 2], &mut rng);
        let cfg = OptimizerConfig {
            grid_2q: 3,
            seed: 77,
            ..Default::default()
        };
        let a = min_conditional_entropy(&rho, &[0, 2], &cfg).unwrap();
        let b = min_conditional_entropy(&rho, &[0, 2], &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn entangler_grid_contains_canonical_angles() {
        for n in [2, 3, 5, 7] {
            let g = entangler_grid(n);
            for must in [0.0, FRAC_PI_8, FRAC_PI_4] {
                assert!(g.iter().any(|x| (x - must).abs() < 1e-12), "n={n}");
            }
        }
        assert_eq!(entangler_grid(5).len(), 5);
    }

    #[test]
    fn config_parsing() {
        let cfg = OptimizerConfig::from_toml_str("grid_1q = 41\nrestarts = 0\nseed = 5\n").unwrap();
        assert_eq!(cfg.grid_1q, 41);
        assert_eq!(cfg.restarts, 0);
        assert_eq!(cfg.seed, 5);
        assert_eq!(cfg.grid_2q, 5);
        assert!(OptimizerConfig::from_toml_str("grid_1q = 1").is_err());
        assert!(OptimizerConfig::from_toml_str("bogus = 1").is_err());
    }
}
