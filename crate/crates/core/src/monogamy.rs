//! Interaction information and the discord monogamy deficit of three-party states.
//!
//! For a node `n` with partners `j < k`, the deficit is
//! `δ_M = D(n:j) + D(n:k) - D(n:jk)`; `δ_M <= 0` is monogamous. The
//! interrogated interaction information anchored at `n` is
//! `min S(n|k) + min S(n|j) - min S(n|jk) - S(n)`, each minimum taken
//! independently, and `δ_M` equals its excess over the unmeasured
//! interaction information.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::density::DensityMatrix;
use crate::discord::{discord, DiscordResult};
use crate::entropy::{marginal_entropy, unmeasured_conditional_entropy, vn_entropy, Bits};
use crate::error::{Error, Result};
use crate::optimize::{min_conditional_entropy, MinEntropy, OptimizerConfig};

/// `δ_M` at or below this counts as monogamous (absorbs optimizer slack).
pub const MONOGAMY_TOL: f64 = 1e-6;
/// Half-width of the band around zero where sign comparisons are not asserted.
pub const DEAD_BAND: f64 = 1e-5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Party {
    A,
    B,
    C,
}

impl Party {
    pub fn index(self) -> usize {
        match self {
            Party::A => 0,
            Party::B => 1,
            Party::C => 2,
        }
    }

    /// The other two parties in ascending order.
    pub fn partners(self) -> (usize, usize) {
        match self {
            Party::A => (1, 2),
            Party::B => (0, 2),
            Party::C => (0, 1),
        }
    }
}

impl FromStr for Party {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A" | "0" => Ok(Party::A),
            "B" | "1" => Ok(Party::B),
            "C" | "2" => Ok(Party::C),
            other => Err(Error::Parse(format!("unknown party {other:?}; expected A, B or C"))),
        }
    }
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Party::A => "A",
            Party::B => "B",
            Party::C => "C",
        };
        f.write_str(s)
    }
}

/// Outcome of comparing two signs with a dead-band around zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Agreement {
    Agree,
    Disagree,
    DeadBand,
}

impl Agreement {
    /// Compares `sign(x) == sign(y)` treating `<= 0` as one side, unless
    /// either value lies within [`DEAD_BAND`] of zero.
    pub fn of(x: f64, y: f64) -> Self {
        if x.abs() <= DEAD_BAND || y.abs() <= DEAD_BAND {
            Agreement::DeadBand
        } else if (x > 0.0) == (y > 0.0) {
            Agreement::Agree
        } else {
            Agreement::Disagree
        }
    }

    pub fn is_consistent(self) -> bool {
        self != Agreement::Disagree
    }
}

/// Everything the monogamy relation needs for one state and node.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonogamyReport {
    pub node: Party,
    /// `D(n:j)`, measured on `j`.
    pub d_ab: Bits,
    /// `D(n:k)`, measured on `k`.
    pub d_ac: Bits,
    /// `D(n:jk)`, measured on `jk`.
    pub d_a_bc: Bits,
    pub delta_m: Bits,
    pub unmeasured_ii: Bits,
    pub interrogated_ii: Bits,
    pub monogamous: bool,
    pub theorem1_consistent: bool,
}

impl MonogamyReport {
    /// Column names matching [`MonogamyReport::csv_values`].
    pub const CSV_COLUMNS: [&'static str; 9] = [
        "node",
        "d_ab",
        "d_ac",
        "d_a_bc",
        "delta_m",
        "unmeasured_ii",
        "interrogated_ii",
        "monogamous",
        "theorem1_consistent",
    ];

    pub fn csv_values(&self) -> Vec<String> {
        use crate::experiments::fmt_sig;
        vec![
            self.node.to_string(),
            fmt_sig(self.d_ab.0),
            fmt_sig(self.d_ac.0),
            fmt_sig(self.d_a_bc.0),
            fmt_sig(self.delta_m.0),
            fmt_sig(self.unmeasured_ii.0),
            fmt_sig(self.interrogated_ii.0),
            self.monogamous.to_string(),
            self.theorem1_consistent.to_string(),
        ]
    }
}

fn require_tripartite(rho: &DensityMatrix) -> Result<()> {
    if rho.num_subsystems() != 3 {
        return Err(Error::InvalidSubsystem(format!(
            "expected a three-party state, got {} subsystems",
            rho.num_subsystems()
        )));
    }
    Ok(())
}

/// `min S(target | measured)` on the reduced state of `target ∪ measured`.
fn reduced_min_entropy(
    rho: &DensityMatrix,
    target: usize,
    measured: &[usize],
    cfg: &OptimizerConfig,
) -> Result<MinEntropy> {
    let mut joint: Vec<usize> = measured.to_vec();
    joint.push(target);
    joint.sort_unstable();
    let reduced = rho.partial_trace(&joint)?;
    let local: Vec<usize> = measured
        .iter()
        .map(|m| joint.iter().position(|j| j == m).expect("measured index in joint set"))
        .collect();
    min_conditional_entropy(&reduced, &local, cfg)
}

/// `S(AB) + S(BC) + S(AC) - S(A) - S(B) - S(C) - S(ABC)`.
pub fn unmeasured_interaction_info(rho: &DensityMatrix) -> Result<Bits> {
    require_tripartite(rho)?;
    let s = |set: &[usize]| marginal_entropy(rho, set);
    Ok(s(&[0, 1])? + s(&[1, 2])? + s(&[0, 2])? - s(&[0])? - s(&[1])? - s(&[2])? - vn_entropy(rho)?)
}

/// Interrogated interaction information anchored at `node`, with every
/// measured conditional entropy minimized on its own.
pub fn interrogated_interaction_info(rho: &DensityMatrix, node: Party, cfg: &OptimizerConfig) -> Result<Bits> {
    require_tripartite(rho)?;
    let n = node.index();
    let (j, k) = node.partners();
    let given_k = reduced_min_entropy(rho, n, &[k], cfg)?;
    let given_j = reduced_min_entropy(rho, n, &[j], cfg)?;
    let given_jk = reduced_min_entropy(rho, n, &[j, k], cfg)?;
    let s_n = marginal_entropy(rho, &[n])?;
    Ok(given_k.value + given_j.value - given_jk.value - s_n)
}

/// Both sides of the cyclic identity
/// `I_cyc - I~_cyc = D(A:B) + D(B:C) + D(C:A)`, computed independently.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CyclicIdentity {
    /// Optimized cyclic interrogated form minus the cyclic unmeasured form.
    pub lhs: Bits,
    /// Sum of the three one-qubit-measured discords.
    pub rhs: Bits,
    pub interrogated: Bits,
    pub unmeasured: Bits,
}

const CYCLE: [(usize, usize); 3] = [(0, 1), (1, 2), (2, 0)];

pub fn cyclic_interaction_identity_gap(rho: &DensityMatrix, cfg: &OptimizerConfig) -> Result<CyclicIdentity> {
    require_tripartite(rho)?;
    let s_abc = vn_entropy(rho)?;
    let mut interrogated = -s_abc;
    let mut unmeasured = -s_abc;
    for (target, measured) in CYCLE {
        interrogated = interrogated + reduced_min_entropy(rho, target, &[measured], cfg)?.value;
        unmeasured = unmeasured + unmeasured_conditional_entropy(rho, &[target], &[measured])?;
    }
    let mut rhs = Bits(0.0);
    for (target, measured) in CYCLE {
        rhs = rhs + discord(rho, &[target], &[measured], cfg)?.value;
    }
    Ok(CyclicIdentity {
        lhs: interrogated - unmeasured,
        rhs,
        interrogated,
        unmeasured,
    })
}

/// The three discords of the monogamy relation for `node`.
#[derive(Clone, Debug)]
pub struct NodeDiscords {
    pub with_first: DiscordResult,
    pub with_second: DiscordResult,
    pub with_both: DiscordResult,
}

pub fn node_discords(rho: &DensityMatrix, node: Party, cfg: &OptimizerConfig) -> Result<NodeDiscords> {
    require_tripartite(rho)?;
    let n = node.index();
    let (j, k) = node.partners();
    let ((first, second), both) = rayon::join(
        || rayon::join(|| discord(rho, &[n], &[j], cfg), || discord(rho, &[n], &[k], cfg)),
        || discord(rho, &[n], &[j, k], cfg),
    );
    Ok(NodeDiscords {
        with_first: first?,
        with_second: second?,
        with_both: both?,
    })
}

/// Monogamy deficit, both interaction informations and the sign check between them.
pub fn monogamy_deficit(rho: &DensityMatrix, node: Party, cfg: &OptimizerConfig) -> Result<MonogamyReport> {
    let d = node_discords(rho, node, cfg)?;
    let unmeasured_ii = unmeasured_interaction_info(rho)?;
    let delta_m = d.with_first.value + d.with_second.value - d.with_both.value;
    let interrogated_ii = d.with_second.measured_conditional_entropy + d.with_first.measured_conditional_entropy
        - d.with_both.measured_conditional_entropy
        - d.with_first.unmeasured_entropy;
    let verdict = Agreement::of(delta_m.0, (interrogated_ii - unmeasured_ii).0);
    Ok(MonogamyReport {
        node,
        d_ab: d.with_first.value,
        d_ac: d.with_second.value,
        d_a_bc: d.with_both.value,
        delta_m,
        unmeasured_ii,
        interrogated_ii,
        monogamous: delta_m.0 <= MONOGAMY_TOL,
        theorem1_consistent: verdict.is_consistent(),
    })
}

/// Sign comparison between `δ_M` and `interrogated - unmeasured`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Check {
    pub delta_m: Bits,
    pub interrogated_ii: Bits,
    pub unmeasured_ii: Bits,
    /// `interrogated_ii - unmeasured_ii`.
    pub gap: Bits,
    pub agreement: Agreement,
}

/// Recomputes the interrogated interaction information independently of the
/// discords in the report, with a shifted restart seed, and compares signs.
pub fn theorem1_check(rho: &DensityMatrix, node: Party, cfg: &OptimizerConfig) -> Result<Theorem1Check> {
    let report = monogamy_deficit(rho, node, cfg)?;
    let shifted = OptimizerConfig {
        seed: cfg.seed.wrapping_add(1),
        ..cfg.clone()
    };
    let interrogated_ii = interrogated_interaction_info(rho, node, &shifted)?;
    let gap = interrogated_ii - report.unmeasured_ii;
    Ok(Theorem1Check {
        delta_m: report.delta_m,
        interrogated_ii,
        unmeasured_ii: report.unmeasured_ii,
        gap,
        agreement: Agreement::of(report.delta_m.0, gap.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::validate_density;
    use crate::matrix::{kron, ComplexMatrix};
    use crate::states::{gen_ghz, gen_w};
    use std::f64::consts::FRAC_PI_4;

    fn quick() -> OptimizerConfig {
        OptimizerConfig {
            grid_2q: 3,
            ..Default::default()
        }
    }

    fn product3() -> DensityMatrix {
        let a = ComplexMatrix::from_real_diag(&[0.9, 0.1]);
        let b = ComplexMatrix::from_real_diag(&[0.3, 0.7]);
        let c = ComplexMatrix::from_real_diag(&[0.5, 0.5]);
        validate_density(kron(&kron(&a, &b), &c), &[2, 2, 2]).unwrap()
    }

    #[test]
    fn party_parsing() {
        assert_eq!("b".parse::<Party>().unwrap(), Party::B);
        assert!("D".parse::<Party>().is_err());
        assert_eq!(Party::B.partners(), (0, 2));
    }

    #[test]
    fn agreement_dead_band() {
        assert_eq!(Agreement::of(1e-6, 0.3), Agreement::DeadBand);
        assert_eq!(Agreement::of(0.1, 0.3), Agreement::Agree);
        assert_eq!(Agreement::of(-0.1, -0.3), Agreement::Agree);
        assert_eq!(Agreement::of(-0.1, 0.3), Agreement::Disagree);
    }

    #[test]
    fn unmeasured_ii_known_values() {
        assert!(unmeasured_interaction_info(&product3()).unwrap().0.abs() < 1e-12);
        let classical_ghz =
            validate_density(ComplexMatrix::from_real_diag(&[0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.5]), &[2, 2, 2])
                .unwrap();
        assert!((unmeasured_interaction_info(&classical_ghz).unwrap().0 + 1.0).abs() < 1e-12);
        let w = gen_w((1.0f64 / 3.0).sqrt().acos(), FRAC_PI_4).to_density();
        assert!(unmeasured_interaction_info(&w).unwrap().0.abs() < 1e-9);
    }

    #[test]
    fn product_state_report() {
        let r = monogamy_deficit(&product3(), Party::A, &quick()).unwrap();
        assert!(r.delta_m.0.abs() < 1e-6);
        assert!(r.interrogated_ii.0.abs() < 1e-5);
        assert!(r.monogamous);
    }

    #[test]
    fn ghz_is_monogamous_and_w_is_not() {
        let g = monogamy_deficit(&gen_ghz(FRAC_PI_4).to_density(), Party::A, &quick()).unwrap();
        assert!(g.d_ab.0.abs() < 1e-6 && g.d_ac.0.abs() < 1e-6);
        assert!((g.delta_m.0 + 1.0).abs() < 1e-6);
        assert!(g.monogamous && g.theorem1_consistent);
        assert!(g.interrogated_ii.0 <= 1e-5);

        let w = monogamy_deficit(&gen_w((1.0f64 / 3.0).sqrt().acos(), FRAC_PI_4).to_density(), Party::A, &quick())
            .unwrap();
        assert!(w.delta_m.0 > 1e-5, "delta_m {}", w.delta_m.0);
        assert!(!w.monogamous && w.theorem1_consistent);
        assert!(w.interrogated_ii.0 > 0.0);
    }

    #[test]
    fn standalone_interrogated_matches_report() {
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(31);
        let rho = crate::random::random_mixed_state(&[2, 2, 2], &mut rng);
        let cfg = quick();
        for node in [Party::A, Party::B, Party::C] {
            let report = monogamy_deficit(&rho, node, &cfg).unwrap();
            let check = theorem1_check(&rho, node, &cfg).unwrap();
            assert!((check.interrogated_ii.0 - report.interrogated_ii.0).abs() < 1e-12);
            assert!((check.gap.0 - report.delta_m.0).abs() < 1e-9);
        }
    }

    #[test]
    fn maximally_mixed_cyclic_identity() {
        let id = cyclic_interaction_identity_gap(&DensityMatrix::maximally_mixed(&[2, 2, 2]), &quick()).unwrap();
        assert!(id.lhs.0.abs() < 1e-9 && id.rhs.0.abs() < 1e-9);
    }

    #[test]
    fn rejects_non_tripartite() {
        let rho = DensityMatrix::maximally_mixed(&[2, 2]);
        assert!(unmeasured_interaction_info(&rho).is_err());
        assert!(monogamy_deficit(&rho, Party::A, &quick()).is_err());
    }
}
