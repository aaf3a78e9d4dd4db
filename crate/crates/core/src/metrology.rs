//! Sensitivity of rotation-angle estimation with a collective-spin probe read
//! out through ⟨J_z²⟩.
//!
//! The estimation scheme rotates the probe by e^{+iJ_y θ} and measures J_z²;
//! error propagation gives (Δθ)² = Var(J_z²)(θ) / |∂_θ⟨J_z²(θ)⟩|². For
//! probes whose rotated moments are even in θ (J_z eigenstates, thermal
//! mixtures, phase-averaged states) everything reduces to closed forms in six
//! static moments; this module evaluates those forms, the optimal angle, the
//! resulting optimal variance, the quantum Fisher information bound, and the
//! entanglement-depth certificate implied by the metrological gain.

use crate::error::{Error, Result};
use crate::scalar::{tol, Scalar};
use crate::spinops::{collective, eigh, expectation, rotate, Axis, CollectiveOperator};
use crate::states::QuantumState;

/// Odd-order correlations that vanish for probes with even rotation dynamics
/// but enter the general fourth-moment expansion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OddMoments<T: Scalar> {
    /// ⟨{J_z, J_x}⟩
    pub anticomm_zx: T,
    /// ⟨{J_z², J_xJ_z + J_zJ_x}⟩ — multiplies cos³θ sinθ
    pub a_term: T,
    /// ⟨{J_x², J_xJ_z + J_zJ_x}⟩ — multiplies cosθ sin³θ
    pub b_term: T,
}

impl<T: Scalar> OddMoments<T> {
    pub fn max_abs(&self) -> T {
        let mut worst = nalgebra::ComplexField::abs(self.anticomm_zx);
        worst = nalgebra::RealField::max(worst, nalgebra::ComplexField::abs(self.a_term));
        nalgebra::RealField::max(worst, nalgebra::ComplexField::abs(self.b_term))
    }
}

/// The static collective moments the sensitivity formulas consume.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSet<T: Scalar> {
    /// Particle number the moments were taken at (sets the shot-noise
    /// reference and the degeneracy tolerance scale).
    pub n_particles: u32,
    /// ⟨J_x²⟩
    pub jx2: T,
    /// ⟨J_y²⟩
    pub jy2: T,
    /// ⟨J_z²⟩
    pub jz2: T,
    /// ⟨J_x⁴⟩
    pub jx4: T,
    /// ⟨J_z⁴⟩
    pub jz4: T,
    /// ⟨J_z J_x² J_z⟩
    pub jz_jx2_jz: T,
    /// Odd correlations; `None` asserts the even-dynamics protocol (measured
    /// data, phase-averaged probes).
    pub odd_terms: Option<OddMoments<T>>,
}

impl<T: Scalar> MomentSet<T> {
    /// Check the positivity constraints every physical state satisfies:
    /// all stored moments are expectations of positive-semidefinite
    /// operators, and Var(J_z²), Var(J_x²) are nonnegative. Tolerances are
    /// absolute 1e-9 floors scaled up with the natural moment magnitude
    /// (J(J+1))² so large-N sets are not rejected for rounding noise.
    pub fn validate(&self) -> Result<()> {
        let slack = self.moment_slack();
        for (what, v) in [
            ("<J_x^2>", self.jx2),
            ("<J_y^2>", self.jy2),
            ("<J_z^2>", self.jz2),
            ("<J_x^4>", self.jx4),
            ("<J_z^4>", self.jz4),
            ("<J_z J_x^2 J_z>", self.jz_jx2_jz),
        ] {
            if v < -slack {
                return Err(Error::NegativeSquaredVariance {
                    what,
                    value: v.to_f64_lossy(),
                });
            }
        }
        if self.jz4 - self.jz2 * self.jz2 < -slack {
            return Err(Error::NegativeSquaredVariance {
                what: "Var(J_z^2)",
                value: (self.jz4 - self.jz2 * self.jz2).to_f64_lossy(),
            });
        }
        if self.jx4 - self.jx2 * self.jx2 < -slack {
            return Err(Error::NegativeSquaredVariance {
                what: "Var(J_x^2)",
                value: (self.jx4 - self.jx2 * self.jx2).to_f64_lossy(),
            });
        }
        Ok(())
    }

    /// Copy with the odd correlations dropped, asserting the even-dynamics
    /// protocol (e.g. after parity symmetrization of the probe, which leaves
    /// every even moment unchanged).
    pub fn assuming_even_symmetry(mut self) -> Self {
        self.odd_terms = None;
        self
    }

    /// (Var(J_z²), Var(J_x²)), clamping rounding-level negatives to zero and
    /// rejecting genuinely negative inputs.
    pub fn squared_variances(&self) -> Result<(T, T)> {
        let slack = self.moment_slack();
        let vz = self.jz4 - self.jz2 * self.jz2;
        let vx = self.jx4 - self.jx2 * self.jx2;
        if vz < -slack {
            return Err(Error::NegativeSquaredVariance {
                what: "Var(J_z^2)",
                value: vz.to_f64_lossy(),
            });
        }
        if vx < -slack {
            return Err(Error::NegativeSquaredVariance {
                what: "Var(J_x^2)",
                value: vx.to_f64_lossy(),
            });
        }
        Ok((
            nalgebra::RealField::max(vz, T::zero()),
            nalgebra::RealField::max(vx, T::zero()),
        ))
    }

    /// Absolute tolerance matched to the size of fourth moments, (J(J+1))².
    fn moment_slack(&self) -> T {
        let s = self.casimir_f64();
        tol::<T>(1.0e-9) * T::of((s * s).max(1.0))
    }

    fn casimir_f64(&self) -> f64 {
        let n = f64::from(self.n_particles);
        n * (n + 2.0) / 4.0
    }

    /// Constant term of the angle-resolved variance numerator:
    /// 4⟨J_x²⟩ − 3⟨J_y²⟩ − 2⟨J_z²⟩(1 + ⟨J_x²⟩) + 6⟨J_zJ_x²J_z⟩.
    fn variance_constant(&self) -> T {
        T::of(4.0) * self.jx2 - T::of(3.0) * self.jy2
            - T::of(2.0) * self.jz2 * (T::one() + self.jx2)
            + T::of(6.0) * self.jz_jx2_jz
    }

    /// Degeneracy guard for the denominator ⟨J_x²⟩ − ⟨J_z²⟩, at tolerance
    /// 1e-12·N² (second moments scale as N²).
    fn ensure_nondegenerate(&self) -> Result<T> {
        let diff = self.jx2 - self.jz2;
        let n = f64::from(self.n_particles);
        let scale = T::of((n * n).max(1.0));
        if nalgebra::ComplexField::abs(diff) < tol::<T>(1.0e-12) * scale {
            return Err(Error::DegenerateMoments {
                detail: format!(
                    "<J_x^2> = {:.6e} and <J_z^2> = {:.6e} coincide; the <J_z^2> signal \
                     has no first-order response to the rotation",
                    self.jx2.to_f64_lossy(),
                    self.jz2.to_f64_lossy()
                ),
            });
        }
        Ok(diff)
    }

    /// Reject use of the even-dynamics closed forms when the set carries odd
    /// correlations beyond rounding noise.
    fn ensure_even(&self) -> Result<()> {
        if let Some(odd) = &self.odd_terms {
            let worst = odd.max_abs();
            if worst > self.moment_slack() {
                return Err(Error::OddMomentsPresent {
                    max_abs: worst.to_f64_lossy(),
                });
            }
        }
        Ok(())
    }
}

/// Second and fourth z-moments of the rotated probe and the slope of the
/// signal, as functions of the rotation angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotatedMoments<T: Scalar> {
    /// ⟨J_z²(θ)⟩
    pub jz2: T,
    /// ⟨J_z⁴(θ)⟩
    pub jz4: T,
    /// ∂_θ ⟨J_z²(θ)⟩
    pub jz2_derivative: T,
}

/// Outcome of the optimal-angle sensitivity analysis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensitivityResult<T: Scalar> {
    /// Angle minimizing (Δθ)².
    pub theta_opt: T,
    /// (Δθ)² at the optimum.
    pub var_opt: T,
    /// 1/var_opt.
    pub inv_var_opt: T,
    /// inv_var_opt / N — values above 1 beat every separable probe.
    pub gain: T,
    /// Certified entanglement depth k+1 (0 when gain ≤ 1 certifies nothing).
    pub depth_certified: u32,
    /// Set when the certified depth is neither a divisor of N nor small
    /// against N, where the integer-depth criterion is on weaker footing.
    pub depth_divisor_warning: bool,
}

/// All static moments of `state` entering the sensitivity analysis, odd
/// correlations included (they are cheap and feed the generality checks).
pub fn moments_of<T: Scalar>(state: &QuantumState<T>) -> MomentSet<T> {
    let system = state.system();
    let jx = collective::<T>(system, Axis::X);
    let jy = collective::<T>(system, Axis::Y);
    let jz = collective::<T>(system, Axis::Z);

    if let Some(psi) = state.pure_vector() {
        // matvec chains: ⟨O†O⟩ = ‖Oψ‖², products via inner products
        let x1 = jx.matrix() * psi;
        let y1 = jy.matrix() * psi;
        let z1 = jz.matrix() * psi;
        let x2 = jx.matrix() * &x1;
        let z2 = jz.matrix() * &z1;
        let xz = jx.matrix() * &z1;
        let zx = jz.matrix() * &x1;
        let w_psi = &xz + &zx;
        let two = T::of(2.0);
        return MomentSet {
            n_particles: system.particles(),
            jx2: x1.norm_squared(),
            jy2: y1.norm_squared(),
            jz2: z1.norm_squared(),
            jx4: x2.norm_squared(),
            jz4: z2.norm_squared(),
            jz_jx2_jz: xz.norm_squared(),
            odd_terms: Some(OddMoments {
                anticomm_zx: two * z1.dotc(&x1).re,
                a_term: two * z2.dotc(&w_psi).re,
                b_term: two * x2.dotc(&w_psi).re,
            }),
        };
    }

    let rho = state.density_matrix();
    let jxm = jx.matrix();
    let jzm = jz.matrix();
    let jx2m = jxm * jxm;
    let jy2m = jy.matrix() * jy.matrix();
    let jz2m = jzm * jzm;
    let jx4m = &jx2m * &jx2m;
    let jz4m = &jz2m * &jz2m;
    let zxzm = jzm * &jx2m * jzm;
    let w = jzm * jxm + jxm * jzm;
    let a_op = &jz2m * &w + &w * &jz2m;
    let b_op = &jx2m * &w + &w * &jx2m;
    let tr = |m: &crate::scalar::CMatrix<T>| -> T {
        let v = crate::spinops::trace_product(&rho, m);
        debug_assert!(
            nalgebra::ComplexField::abs(v.im)
                <= tol::<T>(1.0e-9) * nalgebra::RealField::max(T::one(), nalgebra::ComplexField::abs(v.re)),
            "Hermitian moment came out complex"
        );
        v.re
    };
    MomentSet {
        n_particles: system.particles(),
        jx2: tr(&jx2m),
        jy2: tr(&jy2m),
        jz2: tr(&jz2m),
        jx4: tr(&jx4m),
        jz4: tr(&jz4m),
        jz_jx2_jz: tr(&zxzm),
        odd_terms: Some(OddMoments {
            anticomm_zx: tr(&w),
            a_term: tr(&a_op),
            b_term: tr(&b_op),
        }),
    }
}

/// Fold θ into the canonical domain [0, π/2] using the period and evenness of
/// the variance formulas.
fn canonical_theta(theta: f64) -> f64 {
    use std::f64::consts::{FRAC_PI_2, PI};
    let mut t = theta.abs() % PI;
    if t > FRAC_PI_2 {
        t = PI - t;
    }
    t
}

/// Angle-resolved estimation variance (Δθ)²(θ) from even-dynamics moments.
///
/// Both equivalent algebraic forms — the cos⁴/sin⁴ fraction and the
/// tan²-collected form — are evaluated and checked against each other in
/// debug builds; the fraction form is returned. Moment sets carrying nonzero
/// odd correlations are refused: the closed forms presume even dynamics.
pub fn variance_at<T: Scalar>(moments: &MomentSet<T>, theta: T) -> Result<T> {
    moments.ensure_even()?;
    let diff = moments.ensure_nondegenerate()?;
    let (vz, vx) = moments.squared_variances()?;

    let theta_raw = theta.to_f64_lossy();
    let t = T::of(canonical_theta(theta_raw));
    let (s, c) = nalgebra::ComplexField::sin_cos(t);
    if s * c == T::zero() {
        return Err(Error::AngleSingularity { theta: theta_raw });
    }
    let (s2, c2) = (s * s, c * c);
    // the same constant closes both algebraic forms
    let k = moments.variance_constant();
    let numerator = vz * c2 * c2 + vx * s2 * s2 + k * c2 * s2;
    let denominator = T::of(4.0) * diff * diff * c2 * s2;
    let fraction_form = numerator / denominator;

    let tan2 = s2 / c2;
    let cot2 = c2 / s2;
    let collected_form = (vz * cot2 + vx * tan2 + k) / (T::of(4.0) * diff * diff);
    debug_assert!(
        nalgebra::ComplexField::abs(fraction_form - collected_form)
            <= tol::<T>(1.0e-10)
                * nalgebra::RealField::max(nalgebra::ComplexField::abs(fraction_form), T::one()),
        "the two algebraic forms of (dtheta)^2 disagree: {:?} vs {:?}",
        fraction_form.to_f64_lossy(),
        collected_form.to_f64_lossy(),
    );

    if fraction_form <= T::zero() {
        return Err(Error::NonPositiveVariance {
            value: fraction_form.to_f64_lossy(),
        });
    }
    Ok(fraction_form)
}

/// Angle minimizing (Δθ)²: tan²θ_opt = √(Var(J_z²)/Var(J_x²)). Returns 0
/// when Var(J_z²) = 0 (the optimum sits at the θ → 0 boundary).
pub fn optimal_angle<T: Scalar>(moments: &MomentSet<T>) -> Result<T> {
    let (vz, vx) = moments.squared_variances()?;
    if vz == T::zero() {
        return Ok(T::zero());
    }
    if vx <= T::zero() {
        return Err(Error::DegenerateMoments {
            detail: format!(
                "Var(J_x^2) = {:.6e} vanishes while Var(J_z^2) = {:.6e} > 0; \
                 (dtheta)^2 has no interior minimum",
                vx.to_f64_lossy(),
                vz.to_f64_lossy()
            ),
        });
    }
    let ratio = vz / vx;
    Ok(nalgebra::ComplexField::atan(nalgebra::ComplexField::sqrt(
        nalgebra::ComplexField::sqrt(ratio),
    )))
}

/// Minimal estimation variance over the angle, with the gain over shot noise
/// and the entanglement depth it certifies.
///
/// Evaluates the closed form [2√(Var(J_z²)Var(J_x²)) + const] / [2(⟨J_x²⟩ −
/// ⟨J_z²⟩)]², which remains finite at the θ_opt = 0 boundary where
/// [`variance_at`] itself is singular; away from the boundary the two are
/// asserted consistent in debug builds.
pub fn optimal_variance<T: Scalar>(moments: &MomentSet<T>) -> Result<SensitivityResult<T>> {
    moments.ensure_even()?;
    let diff = moments.ensure_nondegenerate()?;
    let (vz, vx) = moments.squared_variances()?;
    let theta_opt = optimal_angle(moments)?;

    let numerator =
        T::of(2.0) * nalgebra::ComplexField::sqrt(vz * vx) + moments.variance_constant();
    let denominator = T::of(4.0) * diff * diff;
    if numerator <= T::zero() {
        return Err(Error::NonPositiveVariance {
            value: (numerator / denominator).to_f64_lossy(),
        });
    }
    let var_opt = numerator / denominator;

    if vz > T::zero() && vx > T::zero() {
        debug_assert!(
            {
                let at_angle = variance_at(moments, theta_opt)?;
                nalgebra::ComplexField::abs(var_opt - at_angle)
                    <= tol::<T>(1.0e-10)
                        * nalgebra::RealField::max(nalgebra::ComplexField::abs(var_opt), T::one())
            },
            "closed-form optimum disagrees with variance_at(theta_opt)"
        );
    }

    let inv_var_opt = T::one() / var_opt;
    let gain = inv_var_opt / T::of(f64::from(moments.n_particles));
    let (depth_certified, depth_divisor_warning) = depth_from_gain(gain, moments.n_particles);
    Ok(SensitivityResult {
        theta_opt,
        var_opt,
        inv_var_opt,
        gain,
        depth_certified,
        depth_divisor_warning,
    })
}

/// ⟨J_z²(θ)⟩, ⟨J_z⁴(θ)⟩ and ∂_θ⟨J_z²(θ)⟩ for the rotated probe, including
/// the odd correlations when present (absent odd terms give the even forms).
pub fn moment_dynamics<T: Scalar>(moments: &MomentSet<T>, theta: T) -> RotatedMoments<T> {
    let (azx, a, b) = match &moments.odd_terms {
        Some(o) => (o.anticomm_zx, o.a_term, o.b_term),
        None => (T::zero(), T::zero(), T::zero()),
    };
    let (s, c) = nalgebra::ComplexField::sin_cos(theta);
    let (s2, c2) = (s * s, c * c);
    // cross coefficient of the raw fourth moment (no second-moment square
    // subtracted here): 4⟨J_x²⟩ − 3⟨J_y²⟩ − 2⟨J_z²⟩ + 6⟨J_zJ_x²J_z⟩
    let cross = T::of(4.0) * moments.jx2 - T::of(3.0) * moments.jy2
        - T::of(2.0) * moments.jz2
        + T::of(6.0) * moments.jz_jx2_jz;
    RotatedMoments {
        jz2: moments.jz2 * c2 + moments.jx2 * s2 + azx * s * c,
        jz4: moments.jz4 * c2 * c2
            + moments.jx4 * s2 * s2
            + cross * c2 * s2
            + a * c2 * c * s
            + b * c * s2 * s,
        jz2_derivative: T::of(2.0) * (moments.jx2 - moments.jz2) * s * c + azx * (c2 - s2),
    }
}

/// Whether the rotated moments ⟨J_z^{2,4}(θ)⟩ of `state` are even in θ at
/// every sampled angle (relative tolerance 1e-9). States tagged
/// phase-averaged are required to pass — a failure there is a bug, and
/// asserted as such.
pub fn check_even_symmetry<T: Scalar>(state: &QuantumState<T>, theta_samples: &[T]) -> bool {
    debug_assert!(!theta_samples.is_empty(), "need at least one sample angle");
    let system = state.system();
    let jz2_op = collective::<T>(system, Axis::Z).squared();
    let jz4_op = jz2_op.squared();
    let mut even = true;
    for &theta in theta_samples {
        let plus = rotate(state, Axis::Y, -theta).expect("generator decomposition failed");
        let minus = rotate(state, Axis::Y, theta).expect("generator decomposition failed");
        for op in [&jz2_op, &jz4_op] {
            let a = expectation(&plus, op).expect("same-system expectation cannot fail");
            let b = expectation(&minus, op).expect("same-system expectation cannot fail");
            let scale = nalgebra::RealField::max(
                T::one(),
                nalgebra::RealField::max(
                    nalgebra::ComplexField::abs(a),
                    nalgebra::ComplexField::abs(b),
                ),
            );
            if nalgebra::ComplexField::abs(a - b) > tol::<T>(1.0e-9) * scale {
                even = false;
            }
        }
    }
    if state.is_phase_averaged() {
        assert!(
            even,
            "state tagged phase-averaged produced θ-odd moments; tagging or rotation is broken"
        );
    }
    even
}

/// Quantum Fisher information of `state` for rotations generated by
/// `generator`: 4·Var(generator) for pure states, and the spectral form
/// 2·Σ_{λ_i+λ_j > ε} (λ_i−λ_j)²/(λ_i+λ_j)·|⟨i|A|j⟩|² (ε = 1e-12) for mixed
/// ones.
pub fn qfi<T: Scalar>(state: &QuantumState<T>, generator: &CollectiveOperator<T>) -> Result<T> {
    if state.system() != generator.system() {
        return Err(Error::SystemMismatch {
            left: state.system().to_string(),
            right: generator.system().to_string(),
        });
    }
    if let Some(psi) = state.pure_vector() {
        let a1 = generator.matrix() * psi;
        let mean = psi.dotc(&a1).re;
        return Ok(T::of(4.0) * (a1.norm_squared() - mean * mean));
    }
    let spectrum = eigh(state.density_ref())?;
    let b = spectrum.vectors.adjoint() * generator.matrix() * &spectrum.vectors;
    let cutoff = T::of(1.0e-12);
    let dim = spectrum.eigenvalues.len();
    let mut total = T::zero();
    for i in 0..dim {
        let li = nalgebra::RealField::max(spectrum.eigenvalues[i], T::zero());
        for j in 0..dim {
            let lj = nalgebra::RealField::max(spectrum.eigenvalues[j], T::zero());
            if li + lj > cutoff {
                let d = li - lj;
                total += d * d / (li + lj) * b[(i, j)].norm_sqr();
            }
        }
    }
    Ok(T::of(2.0) * total)
}

/// Entanglement depth certified by a metrological gain at particle number N:
/// returns k+1 for the largest integer k with gain > k, and 0 when gain ≤ 1
/// (strict inequalities; gains within 1e-9 of an integer are snapped to it
/// first). The second value flags certificates where the certified depth
/// neither divides N nor is small against it (≤ N/10) — there the integer
/// criterion rests on a divisibility assumption and should be read with
/// care. The flag never alters the number.
pub fn depth_from_gain<T: Scalar>(gain: T, n_particles: u32) -> (u32, bool) {
    let g_raw = gain.to_f64_lossy();
    let g = if (g_raw - g_raw.round()).abs() < 1.0e-9 {
        g_raw.round()
    } else {
        g_raw
    };
    if g <= 1.0 {
        return (0, false);
    }
    let k = if g.fract() == 0.0 {
        g as u64 - 1
    } else {
        g.floor() as u64
    };
    let depth = (k + 1).min(u64::from(u32::MAX)) as u32;
    let divides = n_particles.is_multiple_of(depth);
    let small = f64::from(depth) <= f64::from(n_particles) / 10.0;
    (depth, !divides && !small)
}
