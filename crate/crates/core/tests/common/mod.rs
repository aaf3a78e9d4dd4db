//! Shared helpers for the integration suites: a brute-force error-propagation
//! oracle built from explicit rotations, and embedding of symmetric-subspace
//! states into the full 2^N product space for cross-basis checks.

#![allow(dead_code)] // each test binary uses a subset

use dicke_metrology::{
    collective, expectation, moments_of, phase_average, random_pure, rotate, symmetric_embedding,
    Axis, MomentSet, QuantumState, SpinSystem,
};

/// ⟨J_z²⟩ of the probe after the physical rotation by `theta` (the frame in
/// which the closed-form moment expressions are stated).
pub fn measured_jz2(state: &QuantumState<f64>, theta: f64) -> f64 {
    let rotated = rotate(state, Axis::Y, -theta).expect("rotation of a valid state");
    let jz2 = collective::<f64>(state.system(), Axis::Z).squared();
    expectation(&rotated, &jz2).expect("matching system")
}

/// ⟨J_z⁴⟩ of the rotated probe.
pub fn measured_jz4(state: &QuantumState<f64>, theta: f64) -> f64 {
    let rotated = rotate(state, Axis::Y, -theta).expect("rotation of a valid state");
    let jz4 = collective::<f64>(state.system(), Axis::Z).squared().squared();
    expectation(&rotated, &jz4).expect("matching system")
}

/// Brute-force (Δθ)² = Var(J_z²)(θ) / (∂_θ⟨J_z²⟩)², with the derivative taken
/// by central difference of step `h` on explicitly rotated states. This is the
/// definition the closed forms must reproduce; it shares no algebra with them.
pub fn propagation_oracle(state: &QuantumState<f64>, theta: f64, h: f64) -> f64 {
    let second = measured_jz2(state, theta);
    let fourth = measured_jz4(state, theta);
    let variance = fourth - second * second;
    let derivative = (measured_jz2(state, theta + h) - measured_jz2(state, theta - h)) / (2.0 * h);
    variance / (derivative * derivative)
}

/// The same moments as `moments_of`, but computed after embedding the
/// symmetric-subspace state into the full 2^N product basis, where every
/// collective operator is a sum of single-particle Paulis. Agreement checks
/// that the (N+1)-dimensional restriction loses nothing.
pub fn full_space_moments(state: &QuantumState<f64>) -> MomentSet<f64> {
    moments_of(&embed_full(state))
}

/// Isometric embedding of a symmetric-subspace state into the product basis.
pub fn embed_full(state: &QuantumState<f64>) -> QuantumState<f64> {
    let n = state.system().particles();
    let full = SpinSystem::full(n).expect("embedding limited to small N");
    let e = symmetric_embedding::<f64>(n).expect("embedding limited to small N");
    let embedded = if let Some(v) = state.pure_vector() {
        QuantumState::pure(full, &e * v).expect("isometry preserves the norm")
    } else {
        let rho = state.density_matrix();
        QuantumState::density(full, &e * rho * e.adjoint()).expect("isometry preserves the trace")
    };
    if state.is_phase_averaged() {
        phase_average(&embedded)
    } else {
        embedded
    }
}

/// Deterministic phase-averaged random probe.
pub fn random_phase_averaged(n: u32, seed: u64) -> QuantumState<f64> {
    let sys = SpinSystem::symmetric(n).expect("n >= 1");
    phase_average(&random_pure::<f64>(sys, seed))
}

/// `count` points evenly spaced in [lo, hi], endpoints included.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(count >= 2);
    (0..count)
        .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
        .collect()
}

/// `count` points log-evenly spaced in [lo, hi], endpoints included.
pub fn logspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(count >= 2 && lo > 0.0 && hi > lo);
    let (llo, lhi) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (llo + (lhi - llo) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

/// Relative deviation with an absolute floor for near-zero references.
pub fn rel_dev(value: f64, reference: f64) -> f64 {
    (value - reference).abs() / reference.abs().max(1e-300)
}
