//! Quantum discord, interaction information and the discord monogamy deficit
//! for three-qubit (and small multi-qudit) states.

pub mod density;
pub mod discord;
pub mod eigen;
pub mod entropy;
pub mod error;
pub mod experiments;
pub mod matrix;
pub mod measurement;
pub mod monogamy;
pub mod optimize;
pub mod random;
pub mod simplex;
pub mod states;

pub use density::{project_and_normalize, validate_density, DensityMatrix, Projection, StateVector};
pub use discord::{classical_correlation, discord, DiscordResult};
pub use eigen::{hermitian_eig, HermitianEigen};
pub use entropy::{
    quantum_mutual_information, unmeasured_cond_mutual_info, unmeasured_conditional_entropy, vn_entropy, Bits,
};
pub use error::{Error, Result};
pub use matrix::{kron, ComplexMatrix};
pub use measurement::{measured_conditional_entropy, qubit_basis, two_qubit_basis, MeasurementBasis};
pub use monogamy::{
    cyclic_interaction_identity_gap, interrogated_interaction_info, monogamy_deficit, theorem1_check,
    unmeasured_interaction_info, Agreement, MonogamyReport, Party,
};
pub use optimize::{min_conditional_entropy, MinEntropy, OptimizerConfig};
pub use states::{StateSpec, State};
