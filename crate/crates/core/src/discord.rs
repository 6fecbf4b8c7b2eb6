//! Quantum discord and classical correlations with the measurement on the
//! second-listed party.

use serde::{Deserialize, Serialize};

use crate::density::{normalize_subsystems, DensityMatrix};
use crate::entropy::{marginal_entropy, vn_entropy, Bits};
use crate::error::{Error, Result};
use crate::optimize::{min_conditional_entropy, OptimizerConfig};

/// Optimized discord together with the pieces it was assembled from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscordResult {
    pub value: Bits,
    /// Minimized measured conditional entropy `S(U|M)`.
    pub measured_conditional_entropy: Bits,
    /// `S(UM) - S(M)`.
    pub unmeasured_conditional_entropy: Bits,
    /// `S(U)`.
    pub unmeasured_entropy: Bits,
    pub optimal_params: Vec<f64>,
    pub optimizer_evals: usize,
    pub converged: bool,
}

impl DiscordResult {
    /// `S(U) - S(U|M)`, the classical part of the mutual information.
    pub fn classical_correlation(&self) -> Bits {
        self.unmeasured_entropy - self.measured_conditional_entropy
    }

    /// `S(U) - S~(U|M)`.
    pub fn mutual_information(&self) -> Bits {
        self.unmeasured_entropy - self.unmeasured_conditional_entropy
    }
}

/// Discord `D(U:M) = min S(U|M) - S~(U|M)` of the reduced state on `U ∪ M`,
/// measuring `M` (one or two qubits).
pub fn discord(
    rho: &DensityMatrix,
    unmeasured: &[usize],
    measured: &[usize],
    cfg: &OptimizerConfig,
) -> Result<DiscordResult> {
    let n = rho.num_subsystems();
    let u = normalize_subsystems(unmeasured, n)?;
    let m = normalize_subsystems(measured, n)?;
    if u.iter().any(|i| m.contains(i)) {
        return Err(Error::InvalidSubsystem(format!("{u:?} and {m:?} overlap")));
    }
    let mut joint: Vec<usize> = u.iter().chain(&m).copied().collect();
    joint.sort_unstable();
    let reduced = rho.partial_trace(&joint)?;
    let local = |set: &[usize]| -> Vec<usize> {
        set.iter()
            .map(|i| joint.iter().position(|j| j == i).expect("index in joint set"))
            .collect()
    };
    let (u_local, m_local) = (local(&u), local(&m));

    let min = min_conditional_entropy(&reduced, &m_local, cfg)?;
    let s_joint = vn_entropy(&reduced)?;
    let s_measured = marginal_entropy(&reduced, &m_local)?;
    let s_unmeasured = marginal_entropy(&reduced, &u_local)?;
    let unmeasured_ce = s_joint - s_measured;
    Ok(DiscordResult {
        value: min.value - unmeasured_ce,
        measured_conditional_entropy: min.value,
        unmeasured_conditional_entropy: unmeasured_ce,
        unmeasured_entropy: s_unmeasured,
        optimal_params: min.params,
        optimizer_evals: min.evals,
        converged: min.converged,
    })
}

/// Classical correlation `S(U) - min S(U|M)`.
pub fn classical_correlation(
    rho: &DensityMatrix,
    unmeasured: &[usize],
    measured: &[usize],
    cfg: &OptimizerConfig,
) -> Result<Bits> {
    Ok(discord(rho, unmeasured, measured, cfg)?.classical_correlation())
}
