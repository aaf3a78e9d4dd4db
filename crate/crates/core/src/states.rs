//! Quantum states of the collective-spin system: Dicke basis states, thermal
//! Dicke mixtures, spin-squeezed ground states, product (coherent) states,
//! and the two symmetrization maps used to remove coherences between J_z
//! eigenspaces — exact phase averaging and discrete parity symmetrization.
//!
//! States are stored either as a normalized pure vector or as a density
//! matrix, and carry a `phase_averaged` tag recording (and guaranteeing, for
//! states built here) invariance under z-rotations.

use nalgebra::ComplexField;
use num_complex::Complex;
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::scalar::{cx, tol, CMatrix, CVector, Scalar};
use crate::spinops::{collective, eigh, rotate, Axis, Basis, SpinSystem};

#[derive(Debug, Clone)]
enum StateData<T: Scalar> {
    Pure(CVector<T>),
    Density(CMatrix<T>),
}

/// A normalized state of a [`SpinSystem`], pure or mixed.
#[derive(Debug, Clone)]
pub struct QuantumState<T: Scalar> {
    system: SpinSystem,
    data: StateData<T>,
    phase_averaged: bool,
}

impl<T: Scalar> QuantumState<T> {
    /// Validate and wrap a pure state vector. The norm must be 1 within a
    /// small tolerance; the vector is then renormalized exactly.
    pub fn pure(system: SpinSystem, vector: CVector<T>) -> Result<Self> {
        if vector.len() != system.dim() {
            return Err(Error::SystemMismatch {
                left: system.to_string(),
                right: format!("vector of length {}", vector.len()),
            });
        }
        let norm = vector.norm();
        let dev = nalgebra::ComplexField::abs(norm - T::one());
        if dev > tol::<T>(1.0e-8) {
            return Err(Error::NotUnitNorm {
                deviation: dev.to_f64_lossy(),
            });
        }
        let vector = vector.unscale(norm);
        Ok(QuantumState {
            system,
            data: StateData::Pure(vector),
            phase_averaged: false,
        })
    }

    /// Validate and wrap a density matrix: Hermitian, unit trace, positive
    /// semidefinite (within small tolerances).
    pub fn density(system: SpinSystem, matrix: CMatrix<T>) -> Result<Self> {
        if matrix.nrows() != system.dim() || matrix.ncols() != system.dim() {
            return Err(Error::SystemMismatch {
                left: system.to_string(),
                right: format!("{}×{} matrix", matrix.nrows(), matrix.ncols()),
            });
        }
        let mut herm_dev = T::zero();
        for i in 0..matrix.nrows() {
            for j in i..matrix.ncols() {
                let d = (matrix[(i, j)] - matrix[(j, i)].conj()).norm_sqr();
                herm_dev = nalgebra::RealField::max(herm_dev, d);
            }
        }
        let herm_dev = nalgebra::ComplexField::sqrt(herm_dev);
        if herm_dev > tol::<T>(1.0e-10) {
            return Err(Error::NotHermitian {
                deviation: herm_dev.to_f64_lossy(),
            });
        }
        let trace_dev = nalgebra::ComplexField::abs(matrix.trace().re - T::one());
        if trace_dev > tol::<T>(1.0e-8) {
            return Err(Error::NotUnitTrace {
                deviation: trace_dev.to_f64_lossy(),
            });
        }
        let spectrum = eigh(&matrix)?;
        let min_eig = spectrum.eigenvalues[0];
        if min_eig < -tol::<T>(1.0e-8) {
            return Err(Error::NotPositiveSemidefinite {
                min_eigenvalue: min_eig.to_f64_lossy(),
            });
        }
        Ok(QuantumState {
            system,
            data: StateData::Density(matrix),
            phase_averaged: false,
        })
    }

    pub(crate) fn replaced_pure(&self, vector: CVector<T>, keep_phase_tag: bool) -> Self {
        QuantumState {
            system: self.system,
            data: StateData::Pure(vector),
            phase_averaged: self.phase_averaged && keep_phase_tag,
        }
    }

    pub(crate) fn replaced_density(&self, matrix: CMatrix<T>, keep_phase_tag: bool) -> Self {
        QuantumState {
            system: self.system,
            data: StateData::Density(matrix),
            phase_averaged: self.phase_averaged && keep_phase_tag,
        }
    }

    pub fn system(&self) -> SpinSystem {
        self.system
    }

    pub fn is_pure(&self) -> bool {
        matches!(self.data, StateData::Pure(_))
    }

    /// Whether this state is (tagged as) invariant under z-rotations.
    pub fn is_phase_averaged(&self) -> bool {
        self.phase_averaged
    }

    /// The state vector, if the state is stored pure.
    pub fn pure_vector(&self) -> Option<&CVector<T>> {
        match &self.data {
            StateData::Pure(v) => Some(v),
            StateData::Density(_) => None,
        }
    }

    /// Direct reference to the stored density matrix; only meaningful after
    /// [`QuantumState::pure_vector`] returned `None`.
    pub(crate) fn density_ref(&self) -> &CMatrix<T> {
        match &self.data {
            StateData::Density(m) => m,
            StateData::Pure(_) => unreachable!("caller must take the pure branch first"),
        }
    }

    /// Density matrix of the state (|ψ⟩⟨ψ| for pure states).
    pub fn density_matrix(&self) -> CMatrix<T> {
        match &self.data {
            StateData::Density(m) => m.clone(),
            StateData::Pure(v) => {
                let n = v.len();
                let mut m = CMatrix::<T>::zeros(n, n);
                for i in 0..n {
                    for j in 0..n {
                        m[(i, j)] = v[i] * v[j].conj();
                    }
                }
                m
            }
        }
    }

    /// Tr ρ² — 1 for pure states, 1/d for the maximally mixed state.
    pub fn purity(&self) -> T {
        match &self.data {
            StateData::Pure(_) => T::one(),
            StateData::Density(m) => {
                let mut acc = T::zero();
                for i in 0..m.nrows() {
                    for j in 0..m.ncols() {
                        acc += (m[(i, j)] * m[(j, i)]).re;
                    }
                }
                acc
            }
        }
    }

    /// Verify invariance under z-rotations: no support across distinct J_z
    /// eigenvalues (pure) / no coherence between them (density).
    pub fn verify_phase_invariant(&self) -> Result<()> {
        let mut dev = T::zero();
        match &self.data {
            StateData::Pure(v) => {
                // amplitude outside the dominant eigenvalue block
                let mut best_block = 0i64;
                let mut best_weight = T::zero();
                for mz in block_values(self.system) {
                    let mut w = T::zero();
                    for i in 0..v.len() {
                        if self.system.mz_of_index(i) == mz {
                            w += v[i].norm_sqr();
                        }
                    }
                    if w > best_weight {
                        best_weight = w;
                        best_block = mz;
                    }
                }
                for i in 0..v.len() {
                    if self.system.mz_of_index(i) != best_block {
                        dev = nalgebra::RealField::max(dev, v[i].norm_sqr());
                    }
                }
                dev = nalgebra::ComplexField::sqrt(dev);
            }
            StateData::Density(m) => {
                for i in 0..m.nrows() {
                    for j in 0..m.ncols() {
                        if self.system.mz_of_index(i) != self.system.mz_of_index(j) {
                            dev = nalgebra::RealField::max(dev, m[(i, j)].norm_sqr());
                        }
                    }
                }
                dev = nalgebra::ComplexField::sqrt(dev);
            }
        }
        if dev > tol::<T>(1.0e-10) {
            return Err(Error::NotPhaseInvariant {
                deviation: dev.to_f64_lossy(),
            });
        }
        Ok(())
    }
}

/// Distinct doubled J_z eigenvalues (2m) present in the basis.
fn block_values(system: SpinSystem) -> Vec<i64> {
    let n = i64::from(system.particles());
    (0..=n).map(|k| 2 * k - n).collect()
}

/// Dicke state |N, m⟩ with `excitations` spins up: basis vector in the
/// symmetric subspace, equal-weight superposition of bitstrings in the full
/// product space. Phase-invariant by construction.
pub fn dicke<T: Scalar>(system: SpinSystem, excitations: u32) -> Result<QuantumState<T>> {
    let n = system.particles();
    if excitations > n {
        return Err(Error::ExcitationOutOfRange {
            m: excitations,
            n,
        });
    }
    let dim = system.dim();
    let mut v = CVector::<T>::zeros(dim);
    match system.basis() {
        Basis::SymmetricSubspace => {
            v[excitations as usize] = cx(T::one());
        }
        Basis::FullProductSpace => {
            let mut count = 0usize;
            for i in 0..dim {
                if (i as u32).count_ones() == excitations {
                    count += 1;
                }
            }
            let amp = cx(T::of(1.0 / (count as f64).sqrt()));
            for (i, e) in v.iter_mut().enumerate() {
                if (i as u32).count_ones() == excitations {
                    *e = amp;
                }
            }
        }
    }
    Ok(QuantumState {
        system,
        data: StateData::Pure(v),
        phase_averaged: true,
    })
}

/// Product state of N spins all pointing along the positive `axis` — the
/// shot-noise reference (coherent spin state).
pub fn polarized<T: Scalar>(system: SpinSystem, axis: Axis) -> Result<QuantumState<T>> {
    let top = dicke::<T>(system, system.particles())?;
    let half_pi = T::of(std::f64::consts::FRAC_PI_2);
    match axis {
        Axis::Z => Ok(top),
        // e^{−iJ_y π/2} maps ⟨J_z⟩ = N/2 onto ⟨J_x⟩ = N/2
        Axis::X => rotate(&top, Axis::Y, half_pi),
        Axis::Y => rotate(&top, Axis::X, -half_pi),
    }
}

/// Thermal mixture of Dicke states around the equator: weights
/// w_μ ∝ e^{−μ²/T} on |N/2 + μ⟩ excitations, μ = −N/2 … N/2. Requires an
/// even particle number (so μ is integral) and the symmetric basis.
/// `temperature` ≤ 1e−12 collapses to the pure central Dicke state.
pub fn thermal_dicke<T: Scalar>(n: u32, temperature: T) -> Result<QuantumState<T>> {
    if !n.is_multiple_of(2) {
        return Err(Error::OddParticleCount(n));
    }
    let system = SpinSystem::symmetric(n)?;
    if temperature < T::zero() {
        return Err(Error::NonPositiveParameter {
            what: "temperature",
            value: temperature.to_f64_lossy(),
        });
    }
    if temperature <= tol::<T>(1.0e-12) {
        return dicke(system, n / 2);
    }
    let dim = system.dim();
    let half = f64::from(n) / 2.0;
    let mut weights = vec![T::zero(); dim];
    let mut norm = T::zero();
    for (i, w) in weights.iter_mut().enumerate() {
        let mu = T::of(i as f64 - half);
        *w = nalgebra::ComplexField::exp(-mu * mu / temperature);
        norm += *w;
    }
    let mut rho = CMatrix::<T>::zeros(dim, dim);
    for (i, w) in weights.iter().enumerate() {
        rho[(i, i)] = cx(*w / norm);
    }
    Ok(QuantumState {
        system,
        data: StateData::Density(rho),
        phase_averaged: true,
    })
}

/// Ground state of the squeezing Hamiltonian H(λ) = J_z² − λ J_x in the
/// symmetric basis. λ → 0 approaches the central Dicke state; λ → ∞
/// approaches the x-polarized coherent state. The global phase is fixed by
/// making the largest-magnitude amplitude real positive, so results are
/// deterministic.
pub fn squeezed_ground_state<T: Scalar>(n: u32, lambda: T) -> Result<QuantumState<T>> {
    let system = SpinSystem::symmetric(n)?;
    if lambda <= T::zero() {
        return Err(Error::NonPositiveParameter {
            what: "squeezing strength",
            value: lambda.to_f64_lossy(),
        });
    }
    let jz = collective::<T>(system, Axis::Z);
    let jx = collective::<T>(system, Axis::X);
    let h = jz.squared().sub(&jx.scaled(lambda))?;
    let e = eigh(h.matrix())?;
    let mut ground: CVector<T> = e.vectors.column(0).into_owned();
    let mut k_best = 0usize;
    let mut best = T::zero();
    for (k, a) in ground.iter().enumerate() {
        if a.norm_sqr() > best {
            best = a.norm_sqr();
            k_best = k;
        }
    }
    let a = ground[k_best];
    let phase = a.unscale(nalgebra::ComplexField::sqrt(a.norm_sqr()));
    for c in ground.iter_mut() {
        *c *= phase.conj();
    }
    let norm = ground.norm();
    let ground = ground.unscale(norm);
    Ok(QuantumState {
        system,
        data: StateData::Pure(ground),
        phase_averaged: false,
    })
}

/// Haar-ish random pure state (i.i.d. complex Gaussian amplitudes,
/// normalized), deterministic in `seed`.
pub fn random_pure<T: Scalar>(system: SpinSystem, seed: u64) -> QuantumState<T> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let dim = system.dim();
    let mut v = CVector::<T>::zeros(dim);
    for e in v.iter_mut() {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        *e = Complex::new(T::of(re), T::of(im));
    }
    let norm = v.norm();
    let v = v.unscale(norm);
    QuantumState {
        system,
        data: StateData::Pure(v),
        phase_averaged: false,
    }
}

/// Exact average over all z-rotations e^{−iJ_z φ}, φ uniform on [0, 2π):
/// coherences between distinct J_z eigenvalues are removed exactly (the
/// eigenvalue gaps are integers, so the average is a hard projection).
/// A pure state supported on a single eigenvalue block stays pure.
pub fn phase_average<T: Scalar>(state: &QuantumState<T>) -> QuantumState<T> {
    let system = state.system();
    if let Some(v) = state.pure_vector() {
        let mut blocks_hit = 0usize;
        let mut last_block = i64::MIN;
        for i in 0..v.len() {
            if v[i].norm_sqr() > T::zero() {
                let b = system.mz_of_index(i);
                if b != last_block {
                    blocks_hit += 1;
                    last_block = b;
                }
            }
        }
        if blocks_hit <= 1 {
            return state.replaced_pure(v.clone(), true).tagged_phase_averaged();
        }
        let dim = v.len();
        let mut rho = CMatrix::<T>::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                if system.mz_of_index(i) == system.mz_of_index(j) {
                    rho[(i, j)] = v[i] * v[j].conj();
                }
            }
        }
        return QuantumState {
            system,
            data: StateData::Density(rho),
            phase_averaged: true,
        };
    }
    let m = state.density_ref();
    let mut rho = m.clone();
    for i in 0..rho.nrows() {
        for j in 0..rho.ncols() {
            if system.mz_of_index(i) != system.mz_of_index(j) {
                rho[(i, j)] = Complex::new(T::zero(), T::zero());
            }
        }
    }
    QuantumState {
        system,
        data: StateData::Density(rho),
        phase_averaged: true,
    }
}

impl<T: Scalar> QuantumState<T> {
    fn tagged_phase_averaged(mut self) -> Self {
        self.phase_averaged = true;
        self
    }
}

/// Symmetrize under the z-parity P = e^{iπ(J_z + N/2)}: ρ → (ρ + PρP)/2.
/// Removes coherences between J_z eigenvalues of different parity, which
/// makes every moment odd in (J_x, J_y) vanish. A parity eigenstate stays
/// pure; phase invariance, if already present, is preserved.
pub fn symmetrize_z<T: Scalar>(state: &QuantumState<T>) -> QuantumState<T> {
    let system = state.system();
    // P in the computational basis: diag(±1) with sign (−1)^(excitations)
    let sign = |i: usize| -> bool {
        match system.basis() {
            Basis::SymmetricSubspace => i % 2 == 1,
            Basis::FullProductSpace => (i as u32).count_ones() % 2 == 1,
        }
    };
    if let Some(v) = state.pure_vector() {
        let mut flipped = v.clone();
        for (i, c) in flipped.iter_mut().enumerate() {
            if sign(i) {
                *c = -*c;
            }
        }
        let overlap = v.dotc(&flipped);
        let overlap_mag = nalgebra::ComplexField::sqrt(overlap.norm_sqr());
        if nalgebra::ComplexField::abs(overlap_mag - T::one()) <= tol::<T>(1.0e-10) {
            // parity eigenstate: symmetrization is a no-op
            return state.clone();
        }
        let dim = v.len();
        let mut rho = CMatrix::<T>::zeros(dim, dim);
        let half = T::of(0.5);
        for i in 0..dim {
            for j in 0..dim {
                rho[(i, j)] =
                    (v[i] * v[j].conj() + flipped[i] * flipped[j].conj()) * cx(half);
            }
        }
        return QuantumState {
            system,
            data: StateData::Density(rho),
            phase_averaged: state.phase_averaged,
        };
    }
    let m = state.density_ref();
    let mut rho = m.clone();
    for i in 0..rho.nrows() {
        for j in 0..rho.ncols() {
            if sign(i) != sign(j) {
                rho[(i, j)] = Complex::new(T::zero(), T::zero());
            }
        }
    }
    QuantumState {
        system,
        data: StateData::Density(rho),
        phase_averaged: state.phase_averaged,
    }
}
