//! Metrological analysis of collective-spin probes near Dicke states.
//!
//! An ensemble of N spin-1/2 particles prepared close to the equatorial
//! Dicke state, rotated by an angle θ and read out through the second moment
//! ⟨J_z²⟩, estimates θ with a variance that can beat the shot-noise limit of
//! every separable probe. This crate computes that sensitivity:
//!
//! * collective spin operators and states in the symmetric (N+1)-dimensional
//!   subspace, with a full 2^N product-space mode for brute-force checks
//!   ([`spinops`], [`states`]);
//! * closed-form angle-resolved variance, optimal angle, optimal variance,
//!   quantum Fisher information, and the entanglement depth certified by the
//!   metrological gain ([`metrology`]);
//! * the same certificates computed from experimentally measured moments
//!   with bootstrap uncertainty propagation and gain maps over moment space
//!   ([`expdata`]).
//!
//! Numerical kernels are generic over the floating-point scalar through
//! [`Scalar`] (`f64` for production accuracy, `f32` available for
//! memory-bound scans); concrete aliases like [`QuantumState64`] pick the
//! scalar at the crate root.
//!
//! # Example
//!
//! ```
//! use dicke_metrology::{dicke, moments_of, optimal_variance, SpinSystem};
//!
//! let system = SpinSystem::symmetric(100).unwrap();
//! let probe = dicke::<f64>(system, 50).unwrap();
//! let result = optimal_variance(&moments_of(&probe)).unwrap();
//! assert!((result.gain - 51.0).abs() < 1e-9);
//! assert_eq!(result.depth_certified, 51);
//! ```

pub mod error;
pub mod expdata;
pub mod metrology;
pub mod scalar;
pub mod spinops;
pub mod states;

pub use error::{Error, Result};
pub use scalar::{CMatrix, CVector, Scalar};

pub use spinops::{
    collective, eigh, expectation, expectation_complex, rotate, symmetric_embedding, Axis, Basis,
    CollectiveOperator, Eigh, SpinSystem, FULL_SPACE_MAX_PARTICLES,
};

pub use states::{
    dicke, phase_average, polarized, random_pure, squeezed_ground_state, symmetrize_z,
    thermal_dicke, QuantumState,
};

pub use metrology::{
    check_even_symmetry, depth_from_gain, moment_dynamics, moments_of, optimal_angle,
    optimal_variance, qfi, variance_at, MomentSet, OddMoments, RotatedMoments, SensitivityResult,
};

pub use expdata::{
    approx_jx4, approx_jz4, bootstrap_gain, experimental_bound, moment_set_from_measured,
    region_map, z_bound, BootstrapConfig, BootstrapSummary, MeasuredMoments, RegionCell,
    RegionMapSpec, ResamplingModel, MIN_RESAMPLES,
};

/// Double-precision aliases (the default choice).
pub type QuantumState64 = QuantumState<f64>;
pub type CollectiveOperator64 = CollectiveOperator<f64>;
pub type MomentSet64 = MomentSet<f64>;
pub type SensitivityResult64 = SensitivityResult<f64>;
pub type MeasuredMoments64 = MeasuredMoments<f64>;

/// Single-precision aliases for memory-bound sweeps.
pub type QuantumState32 = QuantumState<f32>;
pub type CollectiveOperator32 = CollectiveOperator<f32>;
pub type MomentSet32 = MomentSet<f32>;
pub type SensitivityResult32 = SensitivityResult<f32>;
pub type MeasuredMoments32 = MeasuredMoments<f32>;
