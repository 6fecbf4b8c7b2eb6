//! Batch experiments: parameter sweeps, noise sweeps and class Monte Carlo.
//!
//! Every run is deterministic given its inputs and seed. Parallel work is
//! collected by index, so output never depends on the worker count.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_6};
use std::fmt::Write as _;
use std::str::FromStr;
use std::time::Duration;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::monogamy::{monogamy_deficit, theorem1_check, MonogamyReport, Party, Theorem1Check};
use crate::optimize::OptimizerConfig;
use crate::states::{random_ghz_class_params, random_w_class_params, ghz_class, w_class, StateSpec};

/// A Monte Carlo sample counts as a violation above this deficit (bits).
pub const VIOLATION_THRESHOLD: f64 = 1e-5;
/// Default number of mixing weights in a noise sweep.
pub const DEFAULT_P_GRID: usize = 41;
/// Default generalized-W grid.
pub const DEFAULT_W_GRID: (usize, usize) = (25, 25);
/// Samples drawn from one derived seed.
pub const MC_CHUNK: usize = 64;
const BISECTION_STEPS: usize = 40;

/// Formats with 12 significant digits, fixed notation for moderate exponents.
pub fn fmt_sig(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

/// Provenance attached to every output file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub command: String,
    pub toolkit_version: String,
    /// SHA-256 over the optimizer config and the command inputs.
    pub config_hash: String,
    pub seed: Option<u64>,
    pub config: OptimizerConfig,
    /// Kept out of files so reruns are byte-identical.
    #[serde(skip)]
    pub wall_time: Duration,
}

impl RunMetadata {
    pub fn new(command: &str, cfg: &OptimizerConfig, seed: Option<u64>, inputs: &serde_json::Value) -> Self {
        let payload = serde_json::json!({ "command": command, "config": cfg, "seed": seed, "inputs": inputs });
        let digest = Sha256::digest(payload.to_string().as_bytes());
        Self {
            command: command.into(),
            toolkit_version: env!("CARGO_PKG_VERSION").into(),
            config_hash: hex::encode(digest),
            seed,
            config: cfg.clone(),
            wall_time: Duration::ZERO,
        }
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// `n` points strictly inside `(0, hi)`: `hi (i + 1) / (n + 1)`.
pub fn interior_grid(hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| hi * (i + 1) as f64 / (n + 1) as f64).collect()
}

/// One point of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    /// Values matching [`SweepResult::param_names`].
    pub params: Vec<f64>,
    pub report: MonogamyReport,
}

/// Mixing weight at which a noisy state turns from monogamous to polygamous.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Crossover {
    pub state: StateSpec,
    pub p_star: f64,
    /// Grid bracket that seeded the bisection.
    pub bracket: (f64, f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axes: Vec<Axis>,
    pub param_names: Vec<String>,
    pub points: Vec<SweepPoint>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub crossovers: Vec<Crossover>,
    pub metadata: RunMetadata,
}

impl SweepResult {
    /// Header plus one row per point. `extra` selects the discord columns.
    fn csv(&self, discords: bool) -> String {
        let mut out = self.param_names.join(",");
        if discords {
            out.push_str(",d_ab,d_ac,d_a_bc");
        }
        out.push_str(",delta_m\n");
        for pt in &self.points {
            let mut row: Vec<String> = pt.params.iter().map(|&x| fmt_sig(x)).collect();
            if discords {
                row.extend([pt.report.d_ab.0, pt.report.d_ac.0, pt.report.d_a_bc.0].map(fmt_sig));
            }
            row.push(fmt_sig(pt.report.delta_m.0));
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }

    /// `theta,phi,d_ab,d_ac,d_a_bc,delta_m` for W sweeps; `p,<state>,delta_m` otherwise.
    pub fn to_csv(&self) -> String {
        self.csv(self.param_names.first().map(String::as_str) != Some("p"))
    }

    pub fn max_delta(&self) -> f64 {
        self.points.iter().map(|p| p.report.delta_m.0).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_delta(&self) -> f64 {
        self.points.iter().map(|p| p.report.delta_m.0).fold(f64::INFINITY, f64::min)
    }
}

fn check_finite(report: &MonogamyReport) -> Result<()> {
    let vals = [report.d_ab, report.d_ac, report.d_a_bc, report.delta_m];
    if vals.iter().any(|b| !b.0.is_finite()) {
        return Err(Error::NonFinite(format!("deficit record {report:?}")));
    }
    Ok(())
}

fn evaluate(rho: &DensityMatrix, node: Party, cfg: &OptimizerConfig) -> Result<MonogamyReport> {
    let report = monogamy_deficit(rho, node, cfg)?;
    check_finite(&report)?;
    Ok(report)
}

/// δ_M over an interior `(θ, φ)` grid of generalized W states, θ-major.
pub fn sweep_w(n_theta: usize, n_phi: usize, node: Party, cfg: &OptimizerConfig) -> Result<SweepResult> {
    cfg.validate()?;
    if n_theta < 2 || n_phi < 2 {
        return Err(Error::Range(format!("grid {n_theta}x{n_phi}: both counts must be at least 2")));
    }
    let thetas = interior_grid(FRAC_PI_2, n_theta);
    let phis = interior_grid(FRAC_PI_2, n_phi);
    let coords: Vec<(f64, f64)> = thetas.iter().flat_map(|&t| phis.iter().map(move |&p| (t, p))).collect();
    let points = coords
        .par_iter()
        .map(|&(theta, phi)| {
            let rho = StateSpec::GenW { theta, phi }.build()?.to_density();
            Ok(SweepPoint {
                params: vec![theta, phi],
                report: evaluate(&rho, node, cfg)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let inputs = serde_json::json!({ "grid": [n_theta, n_phi], "node": node });
    Ok(SweepResult {
        axes: vec![
            Axis { name: "theta".into(), values: thetas },
            Axis { name: "phi".into(), values: phis },
        ],
        param_names: vec!["theta".into(), "phi".into()],
        points,
        crossovers: Vec::new(),
        metadata: RunMetadata::new("sweep-w", cfg, None, &inputs),
    })
}

/// Generalized GHZ states with Φ on 11 points of `[0, π/2]`.
pub fn default_ghz_noise_states() -> Vec<StateSpec> {
    linspace(0.0, FRAC_PI_2, 11).into_iter().map(|phi| StateSpec::GenGhz { phi }).collect()
}

/// Generalized W states at φ = π/4 and θ ∈ {π/6, π/4, arccos(1/√3), π/3}.
pub fn default_w_noise_states() -> Vec<StateSpec> {
    [FRAC_PI_6, FRAC_PI_4, equal_amplitude_w_theta(), std::f64::consts::FRAC_PI_3]
        .into_iter()
        .map(|theta| StateSpec::GenW { theta, phi: FRAC_PI_4 })
        .collect()
}

/// θ at which the generalized W state has three equal amplitudes.
pub fn equal_amplitude_w_theta() -> f64 {
    (1.0f64 / 3.0).sqrt().acos()
}

pub fn equal_amplitude_w() -> StateSpec {
    StateSpec::GenW {
        theta: equal_amplitude_w_theta(),
        phi: FRAC_PI_4,
    }
}

fn noisy(spec: &StateSpec, p: f64) -> Result<DensityMatrix> {
    Ok(StateSpec::PseudoPure {
        p,
        state: Box::new(spec.clone()),
    }
    .build()?
    .to_density())
}

/// δ_M of `(1 - p) I/8 + p |ψ><ψ|` over `n_p` weights in `[0, 1]` for each
/// pure spec. For generalized W states the sign change of δ_M is refined by
/// bisection.
pub fn sweep_noise(specs: &[StateSpec], n_p: usize, node: Party, cfg: &OptimizerConfig) -> Result<SweepResult> {
    cfg.validate()?;
    if n_p < 2 {
        return Err(Error::Range(format!("p-grid {n_p}: need at least 2 points")));
    }
    if specs.is_empty() {
        return Err(Error::Parse("noise sweep needs at least one state".into()));
    }
    let names = specs[0].columns().into_iter().map(|(k, _)| k).collect::<Vec<_>>();
    for s in specs {
        if !matches!(s, StateSpec::GenGhz { .. } | StateSpec::GenW { .. }) {
            return Err(Error::Parse(format!("noise sweeps take gen_ghz or gen_w, got {}", s.family())));
        }
        if s.family() != specs[0].family() {
            return Err(Error::Parse("noise sweep states must share one family".into()));
        }
    }
    let ps = linspace(0.0, 1.0, n_p);
    let jobs: Vec<(usize, f64)> = (0..specs.len()).flat_map(|i| ps.iter().map(move |&p| (i, p))).collect();
    let points = jobs
        .par_iter()
        .map(|&(i, p)| {
            let mut params = vec![p];
            params.extend(specs[i].columns().into_iter().map(|(_, v)| v));
            Ok(SweepPoint {
                params,
                report: evaluate(&noisy(&specs[i], p)?, node, cfg)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut crossovers = Vec::new();
    for (i, spec) in specs.iter().enumerate() {
        if !matches!(spec, StateSpec::GenW { .. }) {
            continue;
        }
        let deltas: Vec<f64> = points[i * n_p..(i + 1) * n_p].iter().map(|pt| pt.report.delta_m.0).collect();
        if let Some(c) = crossover(spec, &ps, &deltas, node, cfg)? {
            crossovers.push(c);
        }
    }
    let mut param_names = vec!["p".to_string()];
    param_names.extend(names);
    let inputs = serde_json::json!({ "states": specs, "p_grid": n_p, "node": node });
    Ok(SweepResult {
        axes: vec![Axis { name: "p".into(), values: ps }],
        param_names,
        points,
        crossovers,
        metadata: RunMetadata::new("sweep-noise", cfg, None, &inputs),
    })
}

/// Bisects the last sign change of δ_M from `≤ 0` to `> 0` on the grid.
fn crossover(
    spec: &StateSpec,
    ps: &[f64],
    deltas: &[f64],
    node: Party,
    cfg: &OptimizerConfig,
) -> Result<Option<Crossover>> {
    let Some(last_mono) = deltas.iter().rposition(|&d| d <= 0.0) else {
        return Ok(None);
    };
    if last_mono + 1 >= deltas.len() {
        return Ok(None);
    }
    let (mut lo, mut hi) = (ps[last_mono], ps[last_mono + 1]);
    let bracket = (lo, hi);
    for _ in 0..BISECTION_STEPS {
        if hi - lo < 1e-9 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if evaluate(&noisy(spec, mid)?, node, cfg)?.delta_m.0 > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(Crossover {
        state: spec.clone(),
        p_star: 0.5 * (lo + hi),
        bracket,
    }))
}

/// Pure-state classes sampled by [`montecarlo`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    GhzClass,
    WClass,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::GhzClass => "ghz_class",
            Family::WClass => "w_class",
        }
    }

    /// Draws one explicit spec.
    fn draw(self, rng: &mut ChaCha8Rng) -> StateSpec {
        match self {
            Family::GhzClass => loop {
                let (theta, locals) = random_ghz_class_params(rng);
                if ghz_class(theta, &locals).is_ok() {
                    break StateSpec::GhzClass {
                        theta: Some(theta),
                        locals: Some(locals),
                        seed: None,
                    };
                }
            },
            Family::WClass => loop {
                let a = random_w_class_params(rng);
                if w_class(a[0], a[1], a[2], a[3]).is_ok() {
                    break StateSpec::WClass {
                        amplitudes: Some(a),
                        seed: None,
                    };
                }
            },
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "ghz_class" | "ghz" => Ok(Family::GhzClass),
            "w_class" | "w" => Ok(Family::WClass),
            other => Err(Error::Parse(format!("unknown family {other:?}; expected ghz_class or w_class"))),
        }
    }
}

/// One Monte Carlo draw.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub index: usize,
    pub state: StateSpec,
    pub delta_m: f64,
    pub violation: bool,
}

impl Sample {
    pub fn csv_header(family: Family) -> String {
        let probe = match family {
            Family::GhzClass => StateSpec::GhzClass {
                theta: Some(0.0),
                locals: Some([crate::states::LocalQubit::zero(); 3]),
                seed: None,
            },
            Family::WClass => StateSpec::WClass {
                amplitudes: Some([0.0; 4]),
                seed: None,
            },
        };
        let mut cols = vec!["index".to_string()];
        cols.extend(probe.columns().into_iter().map(|(k, _)| k));
        cols.extend(["delta_m".into(), "violation".into()]);
        cols.join(",")
    }

    pub fn csv_row(&self) -> String {
        let mut cols = vec![self.index.to_string()];
        cols.extend(self.state.columns().into_iter().map(|(_, v)| fmt_sig(v)));
        cols.push(fmt_sig(self.delta_m));
        cols.push(self.violation.to_string());
        cols.join(",")
    }
}

/// Violation statistics for one class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloResult {
    pub family: Family,
    pub samples: usize,
    pub violations: usize,
    pub fraction: f64,
    pub seed: u64,
    pub threshold: f64,
    pub delta_min: f64,
    pub delta_max: f64,
    pub delta_mean: f64,
}

impl MonteCarloResult {
    fn from_samples(family: Family, seed: u64, samples: &[Sample]) -> Self {
        let n = samples.len();
        let violations = samples.iter().filter(|s| s.violation).count();
        let deltas = samples.iter().map(|s| s.delta_m);
        Self {
            family,
            samples: n,
            violations,
            fraction: violations as f64 / n as f64,
            seed,
            threshold: VIOLATION_THRESHOLD,
            delta_min: deltas.clone().fold(f64::INFINITY, f64::min),
            delta_max: deltas.clone().fold(f64::NEG_INFINITY, f64::max),
            delta_mean: deltas.sum::<f64>() / n as f64,
        }
    }

    /// Pools two runs of the same family by count. The seed of `self` is kept.
    pub fn merge(&self, other: &Self) -> Result<Self> {
        if self.family != other.family || self.threshold != other.threshold {
            return Err(Error::Parse("cannot merge runs of different families or thresholds".into()));
        }
        let samples = self.samples + other.samples;
        let violations = self.violations + other.violations;
        Ok(Self {
            family: self.family,
            samples,
            violations,
            fraction: violations as f64 / samples as f64,
            seed: self.seed,
            threshold: self.threshold,
            delta_min: self.delta_min.min(other.delta_min),
            delta_max: self.delta_max.max(other.delta_max),
            delta_mean: (self.delta_mean * self.samples as f64 + other.delta_mean * other.samples as f64)
                / samples as f64,
        })
    }
}

/// Samples `n` states of `family` and counts `δ_M > VIOLATION_THRESHOLD`.
///
/// Sample `i` belongs to chunk `i / MC_CHUNK`, drawn from a generator seeded
/// with `seed + chunk`, so results do not depend on the worker count.
pub fn montecarlo(
    family: Family,
    n: usize,
    seed: u64,
    node: Party,
    cfg: &OptimizerConfig,
) -> Result<(MonteCarloResult, Vec<Sample>)> {
    cfg.validate()?;
    if n == 0 {
        return Err(Error::Range("Monte Carlo needs at least one sample".into()));
    }
    let chunks = n.div_ceil(MC_CHUNK);
    let samples: Vec<Sample> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(k as u64));
            let count = MC_CHUNK.min(n - k * MC_CHUNK);
            (0..count)
                .map(|j| {
                    let state = family.draw(&mut rng);
                    let rho = state.build()?.to_density();
                    let delta_m = evaluate(&rho, node, cfg)?.delta_m.0;
                    Ok(Sample {
                        index: k * MC_CHUNK + j,
                        state,
                        delta_m,
                        violation: delta_m > VIOLATION_THRESHOLD,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    Ok((MonteCarloResult::from_samples(family, seed, &samples), samples))
}

/// Single-state analysis: the monogamy report plus the independent sign check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<StateSpec>,
    pub report: MonogamyReport,
    pub theorem1: Theorem1Check,
}

pub fn analyze(rho: &DensityMatrix, state: Option<StateSpec>, node: Party, cfg: &OptimizerConfig) -> Result<Analysis> {
    cfg.validate()?;
    let report = evaluate(rho, node, cfg)?;
    let theorem1 = theorem1_check(rho, node, cfg)?;
    Ok(Analysis { state, report, theorem1 })
}
