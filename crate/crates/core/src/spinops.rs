//! Collective spin operators J_x, J_y, J_z = Σ_l σ_l/2 for an ensemble of N
//! spin-1/2 particles, in two bases:
//!
//! * the symmetric (maximal-spin, J = N/2) subspace of dimension N+1, indexed
//!   by the excitation number so that J_z is diagonal with entries
//!   m = −N/2 … N/2, built from the ladder coefficients
//!   √(J(J+1) − m(m±1));
//! * the full 2^N product space, for brute-force cross-checks at small N.
//!
//! Also provides the Hermitian eigendecomposition used by rotations (cached
//! per generator), unitary rotations e^{−iJ_a θ} of states, and composite
//! (product/anticommutator) operators for higher moments.

use std::any::{Any, TypeId};
use std::fmt;
use std::sync::Arc;

use dashmap::DashMap;
use nalgebra::DVector;
use num_complex::Complex;
use once_cell::sync::Lazy;

use crate::error::{Error, Result};
use crate::scalar::{cx, tol, CMatrix, CVector, Scalar};
use crate::states::QuantumState;

/// Basis a [`SpinSystem`] is represented in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Basis {
    /// Symmetric J = N/2 subspace, dimension N+1.
    SymmetricSubspace,
    /// Full 2^N product basis (site k up ⇔ bit k set). Guarded to N ≤ 14.
    FullProductSpace,
}

/// Rotation / quantization axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axis::X => write!(f, "x"),
            Axis::Y => write!(f, "y"),
            Axis::Z => write!(f, "z"),
        }
    }
}

/// An ensemble of N spin-1/2 particles together with the basis its states and
/// operators are expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SpinSystem {
    n: u32,
    basis: Basis,
}

/// Largest particle number admitted in the full product basis; 2^14 = 16384
/// basis states is already a 4 GiB dense matrix.
pub const FULL_SPACE_MAX_PARTICLES: u32 = 14;

impl SpinSystem {
    /// System of `n` particles in the symmetric subspace (dimension n+1).
    pub fn symmetric(n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::NoParticles(n));
        }
        Ok(SpinSystem {
            n,
            basis: Basis::SymmetricSubspace,
        })
    }

    /// System of `n` particles in the full 2^n product basis. Rejected for
    /// n > [`FULL_SPACE_MAX_PARTICLES`].
    pub fn full(n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::NoParticles(n));
        }
        if n > FULL_SPACE_MAX_PARTICLES {
            return Err(Error::FullSpaceTooLarge(n));
        }
        Ok(SpinSystem {
            n,
            basis: Basis::FullProductSpace,
        })
    }

    pub fn particles(&self) -> u32 {
        self.n
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    /// Hilbert-space dimension: n+1 (symmetric) or 2^n (full).
    pub fn dim(&self) -> usize {
        match self.basis {
            Basis::SymmetricSubspace => self.n as usize + 1,
            Basis::FullProductSpace => 1usize << self.n,
        }
    }

    /// Total spin quantum number J = N/2.
    pub fn spin(&self) -> f64 {
        f64::from(self.n) / 2.0
    }

    /// Casimir eigenvalue J(J+1) of the maximal-spin multiplet.
    pub fn casimir(&self) -> f64 {
        let j = self.spin();
        j * (j + 1.0)
    }

    /// ⟨J_z| eigenvalue attached to basis index `i`: m = i − N/2 in the
    /// symmetric basis, popcount(i) − N/2 in the product basis. Exact by
    /// construction, so index grouping by eigenvalue is exact too.
    pub(crate) fn mz_of_index(&self, i: usize) -> i64 {
        let twice = match self.basis {
            Basis::SymmetricSubspace => 2 * i as i64 - i64::from(self.n),
            Basis::FullProductSpace => 2 * (i as u32).count_ones() as i64 - i64::from(self.n),
        };
        // stored as twice the eigenvalue to stay integral for odd N
        twice
    }
}

impl fmt::Display for SpinSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.basis {
            Basis::SymmetricSubspace => {
                write!(f, "N={} symmetric subspace (dim {})", self.n, self.dim())
            }
            Basis::FullProductSpace => {
                write!(f, "N={} full product space (dim {})", self.n, self.dim())
            }
        }
    }
}

/// A (generally composite) collective operator on a [`SpinSystem`], stored as
/// a dense complex matrix.
#[derive(Debug, Clone)]
pub struct CollectiveOperator<T: Scalar> {
    system: SpinSystem,
    matrix: CMatrix<T>,
}

/// Collective spin component J_a = Σ_l σ_a^(l)/2 on the given system.
pub fn collective<T: Scalar>(system: SpinSystem, axis: Axis) -> CollectiveOperator<T> {
    let matrix = match system.basis {
        Basis::SymmetricSubspace => symmetric_component(system.n, axis),
        Basis::FullProductSpace => full_component(system.n, axis),
    };
    CollectiveOperator { system, matrix }
}

/// J_a in the symmetric basis: J_z diagonal, J_± tridiagonal with the ladder
/// coefficients √(J(J+1) − m(m+1)).
fn symmetric_component<T: Scalar>(n: u32, axis: Axis) -> CMatrix<T> {
    let dim = n as usize + 1;
    let j = f64::from(n) / 2.0;
    let s = j * (j + 1.0);
    let mut m = CMatrix::<T>::zeros(dim, dim);
    match axis {
        Axis::Z => {
            for i in 0..dim {
                m[(i, i)] = cx(T::of(i as f64 - j));
            }
        }
        Axis::X | Axis::Y => {
            for i in 0..dim - 1 {
                let mz = i as f64 - j;
                let c = T::of((s - mz * (mz + 1.0)).sqrt() / 2.0);
                match axis {
                    Axis::X => {
                        m[(i + 1, i)] = cx(c);
                        m[(i, i + 1)] = cx(c);
                    }
                    Axis::Y => {
                        // (J_+ − J_−)/(2i)
                        m[(i + 1, i)] = Complex::new(T::zero(), -c);
                        m[(i, i + 1)] = Complex::new(T::zero(), c);
                    }
                    Axis::Z => unreachable!(),
                }
            }
        }
    }
    m
}

/// J_a in the product basis, built site by site from the single-spin matrices
/// (basis convention: bit set ⇔ spin up, σ_z eigenvalue +1).
fn full_component<T: Scalar>(n: u32, axis: Axis) -> CMatrix<T> {
    let dim = 1usize << n;
    let half = T::of(0.5);
    let mut m = CMatrix::<T>::zeros(dim, dim);
    match axis {
        Axis::Z => {
            for i in 0..dim {
                let mz = (i as u32).count_ones() as f64 - f64::from(n) / 2.0;
                m[(i, i)] = cx(T::of(mz));
            }
        }
        Axis::X => {
            for i in 0..dim {
                for k in 0..n {
                    m[(i ^ (1usize << k), i)] += cx(half);
                }
            }
        }
        Axis::Y => {
            for i in 0..dim {
                for k in 0..n {
                    let bit = 1usize << k;
                    if i & bit == 0 {
                        // raise: ⟨…1…|j_y|…0…⟩ = −i/2
                        m[(i | bit, i)] += Complex::new(T::zero(), -half);
                    } else {
                        m[(i & !bit, i)] += Complex::new(T::zero(), half);
                    }
                }
            }
        }
    }
    m
}

/// Isometry from the symmetric subspace into the product space: column m is
/// the equal-weight superposition of all bitstrings with m excitations.
pub fn symmetric_embedding<T: Scalar>(n: u32) -> Result<CMatrix<T>> {
    if n == 0 {
        return Err(Error::NoParticles(n));
    }
    if n > FULL_SPACE_MAX_PARTICLES {
        return Err(Error::FullSpaceTooLarge(n));
    }
    let dim = 1usize << n;
    let mut binom = vec![0.0f64; n as usize + 1];
    for (m, b) in binom.iter_mut().enumerate() {
        let mut v = 1.0;
        for k in 0..m {
            v = v * (n as usize - k) as f64 / (k + 1) as f64;
        }
        *b = v;
    }
    let mut iso = CMatrix::<T>::zeros(dim, n as usize + 1);
    for i in 0..dim {
        let m = (i as u32).count_ones() as usize;
        iso[(i, m)] = cx(T::of(1.0 / binom[m].sqrt()));
    }
    Ok(iso)
}

impl<T: Scalar> CollectiveOperator<T> {
    /// Wrap an explicit matrix as an operator on `system`. The matrix must
    /// match the system dimension; Hermiticity is *not* required (composite
    /// products are not Hermitian in general).
    pub fn from_matrix(system: SpinSystem, matrix: CMatrix<T>) -> Result<Self> {
        if matrix.nrows() != system.dim() || matrix.ncols() != system.dim() {
            return Err(Error::SystemMismatch {
                left: system.to_string(),
                right: format!("{}×{} matrix", matrix.nrows(), matrix.ncols()),
            });
        }
        Ok(CollectiveOperator { system, matrix })
    }

    pub fn identity(system: SpinSystem) -> Self {
        CollectiveOperator {
            system,
            matrix: CMatrix::<T>::identity(system.dim(), system.dim()),
        }
    }

    pub fn system(&self) -> SpinSystem {
        self.system
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    /// Largest entrywise deviation from Hermiticity, |A − A†|_∞.
    pub fn max_nonhermiticity(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.matrix.nrows() {
            for j in i..self.matrix.ncols() {
                let d = (self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm_sqr();
                worst = nalgebra::RealField::max(worst, d);
            }
        }
        nalgebra::ComplexField::sqrt(worst)
    }

    pub fn is_hermitian(&self) -> bool {
        self.max_nonhermiticity() <= tol::<T>(1.0e-12) * self.scale()
    }

    /// Magnitude scale of the operator (largest |entry|, floored at 1) used
    /// to make tolerance checks size-independent.
    fn scale(&self) -> T {
        let mut s = T::one();
        for e in self.matrix.iter() {
            s = nalgebra::RealField::max(s, e.norm_sqr());
        }
        nalgebra::RealField::max(nalgebra::ComplexField::sqrt(s), T::one())
    }

    fn check_same_system(&self, other: &Self) -> Result<()> {
        if self.system != other.system {
            return Err(Error::SystemMismatch {
                left: self.system.to_string(),
                right: other.system.to_string(),
            });
        }
        Ok(())
    }

    /// Matrix product `self · rhs` (not Hermitian in general; see
    /// [`CollectiveOperator::hermitized`]).
    pub fn compose(&self, rhs: &Self) -> Result<Self> {
        self.check_same_system(rhs)?;
        Ok(CollectiveOperator {
            system: self.system,
            matrix: &self.matrix * &rhs.matrix,
        })
    }

    /// (A + A†)/2 — used after composite products to pin down Hermiticity
    /// against floating-point drift in fourth-moment expressions.
    pub fn hermitized(&self) -> Self {
        let herm = (&self.matrix + self.matrix.adjoint()).scale(T::of(0.5));
        CollectiveOperator {
            system: self.system,
            matrix: herm,
        }
    }

    /// A², hermitized.
    pub fn squared(&self) -> Self {
        CollectiveOperator {
            system: self.system,
            matrix: &self.matrix * &self.matrix,
        }
        .hermitized()
    }

    /// Anticommutator AB + BA, hermitized (Hermitian whenever A, B are).
    pub fn anticommutator(&self, rhs: &Self) -> Result<Self> {
        self.check_same_system(rhs)?;
        let m = &self.matrix * &rhs.matrix + &rhs.matrix * &self.matrix;
        Ok(CollectiveOperator {
            system: self.system,
            matrix: m,
        }
        .hermitized())
    }

    pub fn scaled(&self, factor: T) -> Self {
        CollectiveOperator {
            system: self.system,
            matrix: self.matrix.scale(factor),
        }
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.check_same_system(rhs)?;
        Ok(CollectiveOperator {
            system: self.system,
            matrix: &self.matrix + &rhs.matrix,
        })
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.check_same_system(rhs)?;
        Ok(CollectiveOperator {
            system: self.system,
            matrix: &self.matrix - &rhs.matrix,
        })
    }
}

/// ⟨O⟩ = Tr(ρO) or ⟨ψ|O|ψ⟩ as a complex number, for operators that need not
/// be Hermitian.
pub fn expectation_complex<T: Scalar>(
    state: &QuantumState<T>,
    op: &CollectiveOperator<T>,
) -> Result<Complex<T>> {
    if state.system() != op.system {
        return Err(Error::SystemMismatch {
            left: state.system().to_string(),
            right: op.system.to_string(),
        });
    }
    Ok(match state.pure_vector() {
        Some(v) => v.dotc(&(&op.matrix * v)),
        None => trace_product(state.density_ref(), &op.matrix),
    })
}

/// ⟨O⟩ for a Hermitian observable: the imaginary part is asserted negligible
/// and dropped.
pub fn expectation<T: Scalar>(state: &QuantumState<T>, op: &CollectiveOperator<T>) -> Result<T> {
    let v = expectation_complex(state, op)?;
    let scale = nalgebra::RealField::max(nalgebra::ComplexField::abs(v.re), T::one());
    debug_assert!(
        nalgebra::ComplexField::abs(v.im) <= tol::<T>(1.0e-10) * scale,
        "expectation of supposedly Hermitian operator has imaginary part {:?}",
        v.im.to_f64_lossy(),
    );
    Ok(v.re)
}

/// Tr(A·B) without forming the product: Σ_ij A_ij B_ji.
pub(crate) fn trace_product<T: Scalar>(a: &CMatrix<T>, b: &CMatrix<T>) -> Complex<T> {
    let n = a.nrows();
    let mut acc = Complex::new(T::zero(), T::zero());
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// Eigendecomposition A = V diag(λ) V† of a Hermitian matrix, eigenvalues
/// ascending, eigenvectors orthonormal in the columns of `vectors`.
#[derive(Debug, Clone)]
pub struct Eigh<T: Scalar> {
    pub eigenvalues: DVector<T>,
    pub vectors: CMatrix<T>,
}

/// Hermitian eigendecomposition. Fails on non-Hermitian input and reports —
/// rather than silently accepting — iterative non-convergence.
pub fn eigh<T: Scalar>(matrix: &CMatrix<T>) -> Result<Eigh<T>> {
    let dim = matrix.nrows();
    let mut scale = T::one();
    let mut dev = T::zero();
    for i in 0..dim {
        for j in i..dim {
            let d = (matrix[(i, j)] - matrix[(j, i)].conj()).norm_sqr();
            dev = nalgebra::RealField::max(dev, d);
            scale = nalgebra::RealField::max(scale, matrix[(i, j)].norm_sqr());
        }
    }
    let dev = nalgebra::ComplexField::sqrt(dev);
    let scale = nalgebra::RealField::max(nalgebra::ComplexField::sqrt(scale), T::one());
    if dev > tol::<T>(1.0e-10) * scale {
        return Err(Error::NotHermitian {
            deviation: dev.to_f64_lossy(),
        });
    }

    let max_iterations = 50 * dim + 100;
    let se = matrix
        .clone()
        .try_symmetric_eigen(T::machine_epsilon(), max_iterations)
        .ok_or(Error::EighNoConvergence {
            dim,
            max_iterations,
        })?;

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| {
        se.eigenvalues[a]
            .partial_cmp(&se.eigenvalues[b])
            .expect("Hermitian eigenvalues are finite")
    });
    let eigenvalues = DVector::from_iterator(dim, order.iter().map(|&k| se.eigenvalues[k]));
    let mut vectors = CMatrix::<T>::zeros(dim, dim);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &se.eigenvectors.column(src));
    }
    Ok(Eigh {
        eigenvalues,
        vectors,
    })
}

/// Cache of generator eigendecompositions keyed by scalar type, system and
/// axis: rotation scans evaluate many angles against the same generator, and
/// concurrent lookup-or-insert must be safe (scans run under rayon).
type CachedEigh = Arc<dyn Any + Send + Sync>;
static GENERATOR_EIGH_CACHE: Lazy<DashMap<(TypeId, SpinSystem, Axis), CachedEigh>> =
    Lazy::new(DashMap::new);

pub(crate) fn generator_eigh<T: Scalar>(system: SpinSystem, axis: Axis) -> Result<Arc<Eigh<T>>> {
    let key = (TypeId::of::<T>(), system, axis);
    if let Some(hit) = GENERATOR_EIGH_CACHE.get(&key) {
        return Ok(hit
            .value()
            .clone()
            .downcast::<Eigh<T>>()
            .expect("cache entry type is fixed by the TypeId key"));
    }
    // compute outside the map lock; a racing duplicate insert is benign
    let decomposition = Arc::new(eigh(collective::<T>(system, axis).matrix())?);
    GENERATOR_EIGH_CACHE.insert(key, decomposition.clone());
    Ok(decomposition)
}

/// Rotated state e^{−iJ_a θ} ρ e^{+iJ_a θ}, via the cached eigendecomposition
/// of the generator. Purity is preserved; the phase-averaged tag survives
/// only z-rotations (which commute with J_z).
pub fn rotate<T: Scalar>(state: &QuantumState<T>, axis: Axis, theta: T) -> Result<QuantumState<T>> {
    let system = state.system();
    let e = generator_eigh::<T>(system, axis)?;
    let phases: CVector<T> = CVector::from_iterator(
        system.dim(),
        e.eigenvalues.iter().map(|&lambda| {
            let phi = -lambda * theta;
            Complex::new(nalgebra::ComplexField::cos(phi), nalgebra::ComplexField::sin(phi))
        }),
    );
    let keep_phase_tag = axis == Axis::Z;
    Ok(match state.pure_vector() {
        Some(v) => {
            let mut w = e.vectors.adjoint() * v;
            for (c, p) in w.iter_mut().zip(phases.iter()) {
                *c *= *p;
            }
            let rotated = &e.vectors * w;
            state.replaced_pure(rotated, keep_phase_tag)
        }
        None => {
            let mut u = e.vectors.clone();
            for (mut col, p) in u.column_iter_mut().zip(phases.iter()) {
                for c in col.iter_mut() {
                    *c *= *p;
                }
            }
            let u = u * e.vectors.adjoint();
            let rotated = &u * state.density_ref() * u.adjoint();
            state.replaced_density(rotated, keep_phase_tag)
        }
    })
}
