//! Quantum Fisher information for estimating the damping rate and thermal
//! occupation of a bosonic thermal-loss channel.
//!
//! - [`gaussian`]: moment-level Gaussian states, probes and the channel map.
//! - [`yields`]: closed-form yields, expansions, thresholds and the weighted
//!   Cramér–Rao cost.
//! - [`sld`]: numerical symmetric logarithmic derivatives, the QFI matrix and
//!   the commutator compatibility test.
//! - [`fock`]: truncated Fock-space damping QFI for non-Gaussian probes.
//!
//! Units: `hbar = 1`, vacuum covariance `I/2`, quadrature order
//! `(Q1, P1, Q2, P2)`.
//!
//! ```
//! use qfi_channel::{qfi, ChannelParamsF64, Parameter, ProbeClass};
//!
//! let theta = ChannelParamsF64::new(std::f64::consts::LN_2, 0.0).unwrap();
//! let j = qfi(Parameter::Gamma, ProbeClass::TwoModeSqueezedVacuum, 1.0, &theta).unwrap();
//! assert!((j - 1.0).abs() < 1e-12);
//! ```

pub mod error;
pub mod fock;
pub mod gaussian;
pub mod scalar;
pub mod sld;
pub mod yields;

pub use error::{Error, Result};
pub use gaussian::{
    apply_channel, make_probe, mean_photon_number, phase_rotate, symplectic_eigenvalues, validate_state, ChannelParams,
    GaussianState, ProbeClass, StateDiagnostics,
};
pub use scalar::Scalar;
pub use yields::{
    dominance_report, high_energy_expansion, improvement_thresholds, low_energy_expansion, qfi, qfi_zero_temperature,
    single_mode_output_yields, weighted_cr_bound, DominanceReport, Parameter, Regime, RegimeCoefficients, Thresholds,
    WeightMatrix,
};

pub type ChannelParamsF64 = ChannelParams<f64>;
pub type ChannelParamsF32 = ChannelParams<f32>;
pub type GaussianStateF64 = GaussianState<f64>;
pub type GaussianStateF32 = GaussianState<f32>;
pub type RegimeCoefficientsF64 = RegimeCoefficients<f64>;
pub type ThresholdsF64 = Thresholds<f64>;
pub type WeightMatrixF64 = WeightMatrix<f64>;
pub type DominanceReportF64 = DominanceReport<f64>;
