//! Density matrices, pure states and the subsystem algebra on top of them.
//!
//! Subsystem 0 is the most significant tensor factor: for three qubits the
//! basis label `|abc>` sits at row `4a + 2b + c`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::eigen::{hermitian_eig, HERMITIAN_TOL};
use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, ZERO};

pub const TRACE_TOL: f64 = 1e-10;
pub const POSITIVITY_TOL: f64 = 1e-10;
pub const NORM_TOL: f64 = 1e-10;
pub const PROJECTOR_TOL: f64 = 1e-9;
/// Outcomes below this probability are treated as impossible.
pub const MIN_PROBABILITY: f64 = 1e-12;

/// Valid (Hermitian, unit-trace, positive semidefinite) density matrix with
/// an explicit subsystem layout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DensityMatrixJson", into = "DensityMatrixJson")]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    dims: Vec<usize>,
}

/// Normalized pure state.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<C64>,
    dims: Vec<usize>,
}

fn check_dims(order: usize, dims: &[usize]) -> Result<()> {
    if dims.is_empty() || dims.iter().any(|&d| d == 0) {
        return Err(Error::DimensionMismatch(format!("bad subsystem dims {dims:?}")));
    }
    let prod: usize = dims.iter().product();
    if prod != order {
        return Err(Error::DimensionMismatch(format!(
            "subsystem dims {dims:?} multiply to {prod}, matrix order is {order}"
        )));
    }
    Ok(())
}

/// Validates a subsystem selection against `n` subsystems and returns it sorted.
pub fn normalize_subsystems(set: &[usize], n: usize) -> Result<Vec<usize>> {
    if set.is_empty() {
        return Err(Error::InvalidSubsystem("empty subsystem set".into()));
    }
    let mut sorted = set.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidSubsystem(format!("repeated index in {set:?}")));
    }
    if let Some(&bad) = sorted.iter().find(|&&i| i >= n) {
        return Err(Error::InvalidSubsystem(format!(
            "index {bad} out of range for {n} subsystems"
        )));
    }
    Ok(sorted)
}

pub(crate) fn complement(set: &[usize], n: usize) -> Vec<usize> {
    (0..n).filter(|i| !set.contains(i)).collect()
}

/// For every flat index over the listed subsystems (row-major in list order),
/// the matching offset into the full index space.
pub(crate) fn subsystem_offsets(dims: &[usize], subsystems: &[usize]) -> Vec<usize> {
    let mut strides = vec![1usize; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    let mut offsets = vec![0usize];
    for &s in subsystems {
        let mut next = Vec::with_capacity(offsets.len() * dims[s]);
        for &base in &offsets {
            for digit in 0..dims[s] {
                next.push(base + digit * strides[s]);
            }
        }
        offsets = next;
    }
    offsets
}

/// Partial trace of an arbitrary square operator, keeping `keep` (sorted).
pub(crate) fn partial_trace_matrix(m: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> ComplexMatrix {
    let traced = complement(keep, dims.len());
    let keep_off = subsystem_offsets(dims, keep);
    let trace_off = subsystem_offsets(dims, &traced);
    ComplexMatrix::from_fn(keep_off.len(), keep_off.len(), |r, c| {
        trace_off
            .iter()
            .map(|&t| m[(keep_off[r] + t, keep_off[c] + t)])
            .sum()
    })
}

/// Reorders tensor factors so that `order[0]` becomes the most significant.
pub(crate) fn permute_matrix(m: &ComplexMatrix, dims: &[usize], order: &[usize]) -> ComplexMatrix {
    let off = subsystem_offsets(dims, order);
    ComplexMatrix::from_fn(off.len(), off.len(), |r, c| m[(off[r], off[c])])
}

/// Lifts `op` acting on `targets` (in the listed order) to the full space.
pub fn embed_operator(op: &ComplexMatrix, dims: &[usize], targets: &[usize]) -> Result<ComplexMatrix> {
    let targets_sorted = normalize_subsystems(targets, dims.len())?;
    let tdim: usize = targets.iter().map(|&t| dims[t]).product();
    if !op.is_square() || op.rows() != tdim {
        return Err(Error::DimensionMismatch(format!(
            "operator of size {}x{} on subsystems {targets:?} of dimension {tdim}",
            op.rows(),
            op.cols()
        )));
    }
    let n: usize = dims.iter().product();
    let tgt_off = subsystem_offsets(dims, targets);
    let rest_off = subsystem_offsets(dims, &complement(&targets_sorted, dims.len()));
    let mut full = ComplexMatrix::zeros(n, n);
    for &k in &rest_off {
        for (rt, &ro) in tgt_off.iter().enumerate() {
            for (ct, &co) in tgt_off.iter().enumerate() {
                full[(ro + k, co + k)] = op[(rt, ct)];
            }
        }
    }
    Ok(full)
}

impl DensityMatrix {
    /// Wraps a matrix already known to be a valid state.
    pub(crate) fn from_parts_unchecked(matrix: ComplexMatrix, dims: Vec<usize>) -> Self {
        debug_assert_eq!(matrix.rows(), dims.iter().product::<usize>());
        Self { matrix, dims }
    }

    pub fn maximally_mixed(dims: &[usize]) -> Self {
        let n: usize = dims.iter().product();
        Self::from_parts_unchecked(ComplexMatrix::identity(n).scale_real(1.0 / n as f64), dims.to_vec())
    }

    pub fn from_pure(psi: &StateVector) -> Self {
        Self::from_parts_unchecked(ComplexMatrix::outer(&psi.amplitudes), psi.dims.clone())
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn num_subsystems(&self) -> usize {
        self.dims.len()
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// Reduced state on `keep`; the result lists kept subsystems in their original order.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let keep = normalize_subsystems(keep, self.dims.len())?;
        if keep.len() == self.dims.len() {
            return Ok(self.clone());
        }
        let dims = keep.iter().map(|&k| self.dims[k]).collect();
        Ok(Self::from_parts_unchecked(
            partial_trace_matrix(&self.matrix, &self.dims, &keep),
            dims,
        ))
    }

    /// Same state with tensor factors reordered; `order` must be a permutation.
    pub fn permuted(&self, order: &[usize]) -> Result<DensityMatrix> {
        let sorted = normalize_subsystems(order, self.dims.len())?;
        if sorted.len() != self.dims.len() {
            return Err(Error::InvalidSubsystem(format!("{order:?} is not a permutation")));
        }
        let dims = order.iter().map(|&k| self.dims[k]).collect();
        Ok(Self::from_parts_unchecked(
            permute_matrix(&self.matrix, &self.dims, order),
            dims,
        ))
    }

    /// `U rho U^dagger` for a unitary on the full space.
    pub fn conjugated(&self, u: &ComplexMatrix) -> Result<DensityMatrix> {
        if u.rows() != self.dim() || !u.is_square() {
            return Err(Error::DimensionMismatch("unitary size".into()));
        }
        let m = &(u * &self.matrix) * &u.dagger();
        Ok(Self::from_parts_unchecked(m, self.dims.clone()))
    }

    /// Convex mixture `(1 - w) self + w other`.
    pub fn mix(&self, other: &DensityMatrix, w: f64) -> Result<DensityMatrix> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch("mixing states with different layouts".into()));
        }
        if !(0.0..=1.0).contains(&w) {
            return Err(Error::Range(format!("mixing weight {w} outside [0, 1]")));
        }
        let m = &self.matrix.scale_real(1.0 - w) + &other.matrix.scale_real(w);
        Ok(Self::from_parts_unchecked(m, self.dims.clone()))
    }
}

/// Validates `m` as a density matrix on the given layout.
///
/// Eigenvalues inside the round-off window `[-1e-10, 0)` or `(1, 1 + 1e-10]`
/// are clipped into `[0, 1]` and the spectrum is renormalized.
pub fn validate_density(m: ComplexMatrix, dims: &[usize]) -> Result<DensityMatrix> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!("{}x{} is not square", m.rows(), m.cols())));
    }
    check_dims(m.rows(), dims)?;
    if !m.is_finite() {
        return Err(Error::NonFinite("density matrix entry".into()));
    }
    let herm = m.hermiticity_error();
    if herm > HERMITIAN_TOL {
        return Err(Error::NotHermitian(herm));
    }
    let tr = m.trace();
    if (tr - C64::new(1.0, 0.0)).norm() > TRACE_TOL {
        return Err(Error::NotUnitTrace(tr.re));
    }
    let eig = hermitian_eig(&m)?;
    let min = eig.values[0];
    let max = *eig.values.last().unwrap();
    if min < -POSITIVITY_TOL {
        return Err(Error::NotPositive(min));
    }
    if max > 1.0 + POSITIVITY_TOL {
        return Err(Error::NotPositive(1.0 - max));
    }
    if min >= 0.0 && max <= 1.0 {
        return Ok(DensityMatrix::from_parts_unchecked(m, dims.to_vec()));
    }
    let clipped: Vec<f64> = eig.values.iter().map(|v| v.clamp(0.0, 1.0)).collect();
    let total: f64 = clipped.iter().sum();
    let values: Vec<f64> = clipped.iter().map(|v| v / total).collect();
    let fixed = crate::eigen::HermitianEigen {
        values,
        vectors: eig.vectors,
    }
    .reconstruct();
    Ok(DensityMatrix::from_parts_unchecked(fixed, dims.to_vec()))
}

/// Outcome of a projective measurement branch.
#[derive(Clone, Debug)]
pub struct Projection {
    pub probability: f64,
    /// Normalized state of the unmeasured subsystems; `None` for impossible outcomes.
    pub post_state: Option<DensityMatrix>,
}

/// Applies `I ⊗ projector` (projector on `on`), returning the outcome
/// probability and the normalized state of the remaining subsystems.
pub fn project_and_normalize(
    rho: &DensityMatrix,
    projector: &ComplexMatrix,
    on: &[usize],
) -> Result<Projection> {
    let on_sorted = normalize_subsystems(on, rho.num_subsystems())?;
    let rest = complement(&on_sorted, rho.num_subsystems());
    if rest.is_empty() {
        return Err(Error::InvalidSubsystem(
            "projection must leave at least one subsystem unmeasured".into(),
        ));
    }
    let full = embed_operator(projector, rho.dims(), on)?;
    if projector.hermiticity_error() > PROJECTOR_TOL
        || (projector * projector).max_abs_diff(projector) > PROJECTOR_TOL
    {
        return Err(Error::DimensionMismatch("operator is not an orthogonal projector".into()));
    }
    let branch = &(&full * rho.matrix()) * &full;
    let probability = branch.trace().re.clamp(0.0, 1.0);
    if probability < MIN_PROBABILITY {
        return Ok(Projection {
            probability,
            post_state: None,
        });
    }
    let reduced = partial_trace_matrix(&branch, rho.dims(), &rest).scale_real(1.0 / probability);
    let dims = rest.iter().map(|&k| rho.dims()[k]).collect();
    Ok(Projection {
        probability,
        post_state: Some(DensityMatrix::from_parts_unchecked(reduced, dims)),
    })
}

impl StateVector {
    /// Accepts amplitudes whose squared norm is within 1e-10 of one.
    pub fn new(amplitudes: Vec<C64>, dims: &[usize]) -> Result<Self> {
        check_dims(amplitudes.len(), dims)?;
        let norm2: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if !norm2.is_finite() {
            return Err(Error::NonFinite("amplitude".into()));
        }
        if (norm2 - 1.0).abs() > NORM_TOL {
            return Err(Error::Range(format!("state norm^2 {norm2} is not 1")));
        }
        Ok(Self {
            amplitudes,
            dims: dims.to_vec(),
        })
    }

    /// Normalizes arbitrary amplitudes; fails when the norm is below `min_norm`.
    pub fn normalized(amplitudes: Vec<C64>, dims: &[usize], min_norm: f64) -> Result<Self> {
        check_dims(amplitudes.len(), dims)?;
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !norm.is_finite() {
            return Err(Error::NonFinite("amplitude".into()));
        }
        if norm < min_norm {
            return Err(Error::DegenerateState(norm));
        }
        Ok(Self {
            amplitudes: amplitudes.into_iter().map(|a| a / norm).collect(),
            dims: dims.to_vec(),
        })
    }

    /// Computational basis state with the given per-subsystem labels.
    pub fn basis(labels: &[usize], dims: &[usize]) -> Result<Self> {
        if labels.len() != dims.len() || labels.iter().zip(dims).any(|(l, d)| l >= d) {
            return Err(Error::DimensionMismatch(format!("label {labels:?} for dims {dims:?}")));
        }
        let n: usize = dims.iter().product();
        let idx = labels.iter().zip(dims).fold(0, |acc, (l, d)| acc * d + l);
        let mut amps = vec![ZERO; n];
        amps[idx] = C64::new(1.0, 0.0);
        Self::new(amps, dims)
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix::from_pure(self)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }
}

/// Wire format: `{"dims": [..], "re": [[..]], "im": [[..]]}`, row-major.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DensityMatrixJson {
    pub dims: Vec<usize>,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl TryFrom<DensityMatrixJson> for DensityMatrix {
    type Error = Error;

    fn try_from(j: DensityMatrixJson) -> Result<Self> {
        let n = j.re.len();
        if j.im.len() != n || j.re.iter().chain(&j.im).any(|row| row.len() != n) {
            return Err(Error::DimensionMismatch(
                "re and im must be square arrays of equal size".into(),
            ));
        }
        let data = j
            .re
            .iter()
            .zip(&j.im)
            .flat_map(|(rr, ir)| rr.iter().zip(ir).map(|(&a, &b)| C64::new(a, b)))
            .collect();
        validate_density(ComplexMatrix::from_vec(n, n, data)?, &j.dims)
    }
}

impl From<DensityMatrix> for DensityMatrixJson {
    fn from(rho: DensityMatrix) -> Self {
        let n = rho.dim();
        let m = rho.matrix();
        Self {
            dims: rho.dims.clone(),
            re: (0..n).map(|r| (0..n).map(|c| m[(r, c)].re).collect()).collect(),
            im: (0..n).map(|r| (0..n).map(|c| m[(r, c)].im).collect()).collect(),
        }
    }
}
