//! Three-qubit state families: generalized GHZ and W states, the GHZ and W
//! SLOCC classes, and white-noise (pseudo-pure) mixtures.
//!
//! Amplitude naming: the generalized GHZ angle is `phi` (`Φ`); its two-party
//! marginal is written elsewhere as `α²|00><00| + β²|11><11|` with
//! `α = cos Φ`, `β = sin Φ`. The generalized W state uses `(theta, phi)`,
//! which replaces the `{α_W, β_W}` amplitude pair.

use std::f64::consts::PI;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::density::{DensityMatrix, StateVector, NORM_TOL};
use crate::error::{Error, Result};
use crate::matrix::ZERO;
use crate::random::haar_qubit;

pub const QUBITS3: [usize; 3] = [2, 2, 2];
/// Below this norm the GHZ-class superposition is rejected as degenerate.
pub const MIN_GHZ_CLASS_NORM: f64 = 1e-8;
/// Lower bound on |a|, |b|, |c| for sampled W-class states.
pub const MIN_W_AMPLITUDE: f64 = 1e-3;

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// `cos Φ |000> + sin Φ |111>`.
pub fn gen_ghz(phi: f64) -> StateVector {
    let mut amps = vec![ZERO; 8];
    amps[0] = real(phi.cos());
    amps[7] = real(phi.sin());
    StateVector::new(amps, &QUBITS3).expect("unit norm by construction")
}

/// `sinθ cosφ |011> + sinθ sinφ |101> + cosθ |110>`.
pub fn gen_w(theta: f64, phi: f64) -> StateVector {
    let mut amps = vec![ZERO; 8];
    amps[0b011] = real(theta.sin() * phi.cos());
    amps[0b101] = real(theta.sin() * phi.sin());
    amps[0b110] = real(theta.cos());
    StateVector::new(amps, &QUBITS3).expect("unit norm by construction")
}

/// Single-qubit state `α|0> + β|1>`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalQubit {
    pub alpha: C64,
    pub beta: C64,
}

impl LocalQubit {
    pub fn new(alpha: C64, beta: C64) -> Result<Self> {
        let n = alpha.norm_sqr() + beta.norm_sqr();
        if (n - 1.0).abs() > NORM_TOL {
            return Err(Error::Range(format!("|alpha|^2 + |beta|^2 = {n}, expected 1")));
        }
        Ok(Self { alpha, beta })
    }

    pub fn zero() -> Self {
        Self {
            alpha: real(1.0),
            beta: ZERO,
        }
    }

    pub fn one() -> Self {
        Self {
            alpha: ZERO,
            beta: real(1.0),
        }
    }

    fn amp(&self, bit: usize) -> C64 {
        if bit == 0 {
            self.alpha
        } else {
            self.beta
        }
    }
}

/// Normalized `cos(θ/2)|000> + |ψ1>|ψ2>|ψ3>`.
pub fn ghz_class(theta: f64, locals: &[LocalQubit; 3]) -> Result<StateVector> {
    for q in locals {
        LocalQubit::new(q.alpha, q.beta)?;
    }
    let mut amps: Vec<C64> = (0..8)
        .map(|i| locals[0].amp(i >> 2) * locals[1].amp((i >> 1) & 1) * locals[2].amp(i & 1))
        .collect();
    amps[0] += real((0.5 * theta).cos());
    StateVector::normalized(amps, &QUBITS3, MIN_GHZ_CLASS_NORM)
}

/// Normalized `a|001> + b|010> + c|100> + d|000>`.
pub fn w_class(a: f64, b: f64, c: f64, d: f64) -> Result<StateVector> {
    let mut amps = vec![ZERO; 8];
    amps[0b001] = real(a);
    amps[0b010] = real(b);
    amps[0b100] = real(c);
    amps[0b000] = real(d);
    StateVector::normalized(amps, &QUBITS3, 1e-8)
}

/// `(1 - p) I/d + p |ψ><ψ|`.
pub fn pseudo_pure(psi: &StateVector, p: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Range(format!("mixing parameter p = {p} outside [0, 1]")));
    }
    DensityMatrix::maximally_mixed(psi.dims()).mix(&psi.to_density(), p)
}

/// Draws θ ~ U[0, π] and three Haar-uniform local qubits.
pub fn random_ghz_class_params(rng: &mut impl Rng) -> (f64, [LocalQubit; 3]) {
    let theta = rng.gen_range(0.0..=PI);
    let locals = std::array::from_fn(|_| {
        let (alpha, beta) = haar_qubit(rng);
        LocalQubit { alpha, beta }
    });
    (theta, locals)
}

/// Random GHZ-class state; degenerate draws are redrawn.
pub fn ghz_class_random(rng: &mut impl Rng) -> StateVector {
    loop {
        let (theta, locals) = random_ghz_class_params(rng);
        if let Ok(psi) = ghz_class(theta, &locals) {
            return psi;
        }
    }
}

/// Real amplitudes uniform on the unit 3-sphere with |a|, |b|, |c| >= 1e-3.
pub fn random_w_class_params(rng: &mut impl Rng) -> [f64; 4] {
    loop {
        let g: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
        let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-12 {
            continue;
        }
        let v = g.map(|x| x / norm);
        if v[..3].iter().all(|x| x.abs() >= MIN_W_AMPLITUDE) {
            return v;
        }
    }
}

pub fn w_class_random(rng: &mut impl Rng) -> StateVector {
    let [a, b, c, d] = random_w_class_params(rng);
    w_class(a, b, c, d).expect("amplitudes are on the unit sphere")
}

/// A member of one of the supported state families.
///
/// JSON form: `{"family": "gen_w", "theta": 0.955, "phi": 0.785}`. The GHZ
/// and W classes accept either explicit parameters or a `seed` for a random
/// draw. `pseudo_pure` wraps another spec: `{"family": "pseudo_pure", "p":
/// 0.5, "state": {...}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    GenGhz {
        #[serde(alias = "Phi")]
        phi: f64,
    },
    GenW {
        theta: f64,
        phi: f64,
    },
    GhzClass {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        theta: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        locals: Option<[LocalQubit; 3]>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    WClass {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        amplitudes: Option<[f64; 4]>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    PseudoPure {
        p: f64,
        state: Box<StateSpec>,
    },
}

/// A built state.
#[derive(Clone, Debug)]
pub enum State {
    Pure(StateVector),
    Mixed(DensityMatrix),
}

impl State {
    pub fn to_density(&self) -> DensityMatrix {
        match self {
            State::Pure(psi) => psi.to_density(),
            State::Mixed(rho) => rho.clone(),
        }
    }
}

impl StateSpec {
    pub fn family(&self) -> &'static str {
        match self {
            StateSpec::GenGhz { .. } => "gen_ghz",
            StateSpec::GenW { .. } => "gen_w",
            StateSpec::GhzClass { .. } => "ghz_class",
            StateSpec::WClass { .. } => "w_class",
            StateSpec::PseudoPure { .. } => "pseudo_pure",
        }
    }

    /// Resolves random draws into explicit parameters.
    pub fn resolved(&self) -> Result<StateSpec> {
        Ok(match self {
            StateSpec::GhzClass {
                theta: Some(t),
                locals: Some(l),
                ..
            } => StateSpec::GhzClass {
                theta: Some(*t),
                locals: Some(*l),
                seed: None,
            },
            StateSpec::GhzClass { seed: Some(s), .. } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*s);
                loop {
                    let (theta, locals) = random_ghz_class_params(&mut rng);
                    if ghz_class(theta, &locals).is_ok() {
                        break StateSpec::GhzClass {
                            theta: Some(theta),
                            locals: Some(locals),
                            seed: None,
                        };
                    }
                }
            }
            StateSpec::GhzClass { .. } => {
                return Err(Error::Parse("ghz_class needs theta and locals, or a seed".into()))
            }
            StateSpec::WClass {
                amplitudes: Some(a), ..
            } => StateSpec::WClass {
                amplitudes: Some(*a),
                seed: None,
            },
            StateSpec::WClass { seed: Some(s), .. } => StateSpec::WClass {
                amplitudes: Some(random_w_class_params(&mut ChaCha8Rng::seed_from_u64(*s))),
                seed: None,
            },
            StateSpec::WClass { .. } => {
                return Err(Error::Parse("w_class needs amplitudes or a seed".into()))
            }
            StateSpec::PseudoPure { p, state } => StateSpec::PseudoPure {
                p: *p,
                state: Box::new(state.resolved()?),
            },
            other => other.clone(),
        })
    }

    pub fn build(&self) -> Result<State> {
        Ok(match self.resolved()? {
            StateSpec::GenGhz { phi } => State::Pure(gen_ghz(phi)),
            StateSpec::GenW { theta, phi } => State::Pure(gen_w(theta, phi)),
            StateSpec::GhzClass {
                theta: Some(t),
                locals: Some(l),
                ..
            } => State::Pure(ghz_class(t, &l)?),
            StateSpec::WClass {
                amplitudes: Some([a, b, c, d]),
                ..
            } => State::Pure(w_class(a, b, c, d)?),
            StateSpec::PseudoPure { p, state } => match state.build()? {
                State::Pure(psi) => State::Mixed(pseudo_pure(&psi, p)?),
                State::Mixed(_) => {
                    return Err(Error::Parse("pseudo_pure must wrap a pure-state family".into()))
                }
            },
            _ => unreachable!("resolved specs carry explicit parameters"),
        })
    }

    /// Named real parameters, used as CSV columns.
    pub fn columns(&self) -> Vec<(String, f64)> {
        match self {
            StateSpec::GenGhz { phi } => vec![("phi".into(), *phi)],
            StateSpec::GenW { theta, phi } => vec![("theta".into(), *theta), ("phi".into(), *phi)],
            StateSpec::GhzClass { theta, locals, .. } => {
                let mut v = vec![("theta".into(), theta.unwrap_or(f64::NAN))];
                if let Some(l) = locals {
                    for (i, q) in l.iter().enumerate() {
                        v.push((format!("alpha{}_re", i + 1), q.alpha.re));
                        v.push((format!("alpha{}_im", i + 1), q.alpha.im));
                        v.push((format!("beta{}_re", i + 1), q.beta.re));
                        v.push((format!("beta{}_im", i + 1), q.beta.im));
                    }
                }
                v
            }
            StateSpec::WClass { amplitudes, .. } => {
                let a = amplitudes.unwrap_or([f64::NAN; 4]);
                ["a", "b", "c", "d"]
                    .iter()
                    .zip(a)
                    .map(|(k, x)| (k.to_string(), x))
                    .collect()
            }
            StateSpec::PseudoPure { p, state } => {
                let mut v = vec![("p".to_string(), *p)];
                v.extend(state.columns());
                v
            }
        }
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.trim()
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("{key}={v} is not a number")))
}

/// Parses either JSON or `family:key=value,...`, e.g. `gen_w:theta=0.955,phi=0.785`.
/// Any pure family accepts `p=<weight>` to request the pseudo-pure mixture.
impl FromStr for StateSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.starts_with('{') {
            return serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()));
        }
        let (family, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut kv = std::collections::BTreeMap::new();
        for item in rest.split(',').filter(|x| !x.trim().is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got {item:?}")))?;
            kv.insert(k.trim().to_string(), v.trim().to_string());
        }
        let mut take = |key: &str| kv.remove(key);
        let need = |key: &str, v: Option<String>| -> Result<f64> {
            let v = v.ok_or_else(|| Error::Parse(format!("{family} needs {key}")))?;
            parse_f64(key, &v)
        };
        let p = take("p").map(|v| parse_f64("p", &v)).transpose()?;
        let seed = take("seed")
            .map(|v| v.parse::<u64>().map_err(|_| Error::Parse(format!("seed={v} is not an integer"))))
            .transpose()?;
        let spec = match family.trim() {
            "gen_ghz" => {
                let v = take("phi").or_else(|| take("Phi"));
                StateSpec::GenGhz { phi: need("phi", v)? }
            }
            "gen_w" => StateSpec::GenW {
                theta: need("theta", take("theta"))?,
                phi: need("phi", take("phi"))?,
            },
            "ghz_class" => StateSpec::GhzClass {
                theta: None,
                locals: None,
                seed,
            },
            "w_class" => {
                let keys = ["a", "b", "c", "d"];
                let given: Vec<Option<String>> = keys.iter().map(|k| take(k)).collect();
                let amplitudes = if given.iter().all(Option::is_some) {
                    let mut a = [0.0; 4];
                    for (i, (k, v)) in keys.iter().zip(given).enumerate() {
                        a[i] = need(k, v)?;
                    }
                    Some(a)
                } else {
                    None
                };
                StateSpec::WClass { amplitudes, seed }
            }
            other => return Err(Error::Parse(format!("unknown state family {other:?}"))),
        };
        if let Some(extra) = kv.keys().next() {
            return Err(Error::Parse(format!("unexpected parameter {extra:?} for {family}")));
        }
        Ok(match p {
            Some(p) => StateSpec::PseudoPure {
                p,
                state: Box::new(spec),
            },
            None => spec,
        })
    }
}
