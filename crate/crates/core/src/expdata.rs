//! Sensitivity bounds from experimentally measured collective moments.
//!
//! Experiments near Dicke states typically report N, ⟨J_z²⟩, ⟨J_z⁴⟩, ⟨J_x²⟩
//! and ⟨J_x⁴⟩ with 1σ uncertainties. Under the phase-averaged probe
//! assumption (z-rotation invariance), the two moments the closed forms still
//! miss are fixed without further measurement:
//!
//! * ⟨J_y²⟩ = ⟨J_x²⟩ exactly (x/y symmetry of phase-averaged states);
//! * ⟨J_zJ_x²J_z⟩ = N(N+2)/8·⟨J_z²⟩ − ⟨J_z⁴⟩/2 exactly for states diagonal
//!   in the symmetric J_z basis ([`z_bound`]).
//!
//! On top of the central-value bound this module propagates the reported
//! uncertainties by parametric bootstrap, and maps the certified gain over a
//! (⟨J_x²⟩, ⟨J_z²⟩) region using conservative fourth-moment estimates.

use rand::SeedableRng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::metrology::{optimal_variance, MomentSet, SensitivityResult};
use crate::scalar::Scalar;

/// Collective moments, with 1σ uncertainties, as reported by an experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasuredMoments<T: Scalar> {
    pub n_particles: u32,
    pub jz2: T,
    pub jz2_err: T,
    pub jz4: T,
    pub jz4_err: T,
    pub jx2: T,
    pub jx2_err: T,
    pub jx4: T,
    pub jx4_err: T,
}

const MOMENT_KEYS: [&str; 9] = [
    "N", "jz2", "jz2_err", "jz4", "jz4_err", "jx2", "jx2_err", "jx4", "jx4_err",
];

impl<T: Scalar> MeasuredMoments<T> {
    /// Parse the flat key–value moments format: one `key = value` per line,
    /// `#` starts a comment, scientific notation accepted. Required keys:
    /// `N, jz2, jz2_err, jz4, jz4_err, jx2, jx2_err, jx4, jx4_err`.
    /// Errors carry the offending line number.
    pub fn parse(text: &str) -> Result<Self> {
        let mut seen: std::collections::HashMap<&'static str, f64> =
            std::collections::HashMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::MomentsFileLine {
                    line: line_no,
                    message: format!("expected `key = value`, got `{line}`"),
                });
            };
            let key = key.trim();
            let Some(&canonical) = MOMENT_KEYS.iter().find(|&&k| k == key) else {
                return Err(Error::MomentsFileLine {
                    line: line_no,
                    message: format!("unknown key `{key}`"),
                });
            };
            if seen.contains_key(canonical) {
                return Err(Error::MomentsFileLine {
                    line: line_no,
                    message: format!("duplicate key `{key}`"),
                });
            }
            let value = value.trim();
            let parsed: f64 = value.parse().map_err(|_| Error::MomentsFileLine {
                line: line_no,
                message: format!("`{value}` is not a number"),
            })?;
            if !parsed.is_finite() {
                return Err(Error::MomentsFileLine {
                    line: line_no,
                    message: format!("`{value}` is not finite"),
                });
            }
            if canonical == "N" {
                if parsed < 1.0 || parsed.fract() != 0.0 || parsed > f64::from(u32::MAX) {
                    return Err(Error::MomentsFileLine {
                        line: line_no,
                        message: format!("N must be a positive integer, got `{value}`"),
                    });
                }
            } else if parsed < 0.0 {
                let what = if canonical.ends_with("_err") {
                    "uncertainties"
                } else {
                    "moments of positive-semidefinite operators"
                };
                return Err(Error::MomentsFileLine {
                    line: line_no,
                    message: format!("{what} must be nonnegative, got `{value}`"),
                });
            }
            seen.insert(canonical, parsed);
        }
        let missing: Vec<&str> = MOMENT_KEYS
            .iter()
            .copied()
            .filter(|k| !seen.contains_key(k))
            .collect();
        if !missing.is_empty() {
            return Err(Error::MomentsFileMissingKeys(missing.join(", ")));
        }
        let get = |k: &str| T::of(seen[k]);
        let parsed = MeasuredMoments {
            n_particles: seen["N"] as u32,
            jz2: get("jz2"),
            jz2_err: get("jz2_err"),
            jz4: get("jz4"),
            jz4_err: get("jz4_err"),
            jx2: get("jx2"),
            jx2_err: get("jx2_err"),
            jx4: get("jx4"),
            jx4_err: get("jx4_err"),
        };
        // Var(J_z²) = jz4 − jz2² should not be negative beyond what the
        // reported uncertainties explain; warn (never reject) when it is.
        let (jz2, jz4) = (seen["jz2"], seen["jz4"]);
        let combined_err = seen["jz4_err"] + 2.0 * jz2 * seen["jz2_err"];
        if jz4 < jz2 * jz2 - 3.0 * combined_err {
            log::warn!(
                "measured <J_z^4> = {jz4:.3e} sits more than 3σ below <J_z^2>^2 = {:.3e}; \
                 the implied Var(J_z^2) is negative beyond the stated uncertainties",
                jz2 * jz2
            );
        }
        Ok(parsed)
    }

    /// Serialize back into the key–value format accepted by
    /// [`MeasuredMoments::parse`] (lossless round trip).
    pub fn render(&self) -> String {
        let mut out = String::from("# measured collective-spin moments (1-sigma uncertainties)\n");
        out.push_str(&format!("N = {}\n", self.n_particles));
        for (key, v) in [
            ("jz2", self.jz2),
            ("jz2_err", self.jz2_err),
            ("jz4", self.jz4),
            ("jz4_err", self.jz4_err),
            ("jx2", self.jx2),
            ("jx2_err", self.jx2_err),
            ("jx4", self.jx4),
            ("jx4_err", self.jx4_err),
        ] {
            out.push_str(&format!("{key} = {:e}\n", v.to_f64_lossy()));
        }
        out
    }
}

/// ⟨J_zJ_x²J_z⟩ reconstructed from z-moments:
/// N(N+2)/8·⟨J_z²⟩ − ⟨J_z⁴⟩/2. Exact for symmetric-subspace states diagonal
/// in the J_z basis (in particular phase-averaged ones); an upper estimate
/// for states whose x- and y-moments agree.
pub fn z_bound<T: Scalar>(jz2: T, jz4: T, n_particles: u32) -> T {
    let n = f64::from(n_particles);
    T::of(n * (n + 2.0) / 8.0) * jz2 - jz4 / T::of(2.0)
}

/// Upper estimate ⟨J_x⁴⟩ ≤ (N²/4)·⟨J_x²⟩, from the operator bound
/// J_x² ≤ (N/2)² (largest eigenvalue of J_x is N/2).
pub fn approx_jx4<T: Scalar>(n_particles: u32, jx2: T) -> T {
    let n = f64::from(n_particles);
    T::of(n * n / 4.0) * jx2
}

/// Fourth-moment estimate ⟨J_z⁴⟩ ≈ β·⟨J_z²⟩², with β the kurtosis-like
/// shape ratio of the J_z distribution (β = 3 for a Gaussian profile).
pub fn approx_jz4<T: Scalar>(jz2: T, beta: T) -> T {
    beta * jz2 * jz2
}

/// Even-protocol [`MomentSet`] implied by measured moments under the
/// phase-averaged assumption (⟨J_y²⟩ = ⟨J_x²⟩, ⟨J_zJ_x²J_z⟩ from
/// [`z_bound`]).
pub fn moment_set_from_measured<T: Scalar>(m: &MeasuredMoments<T>) -> MomentSet<T> {
    MomentSet {
        n_particles: m.n_particles,
        jx2: m.jx2,
        jy2: m.jx2,
        jz2: m.jz2,
        jx4: m.jx4,
        jz4: m.jz4,
        jz_jx2_jz: z_bound(m.jz2, m.jz4, m.n_particles),
        odd_terms: None,
    }
}

/// Sensitivity certified by the central measured values. Logs a warning when
/// the reconstructed ⟨J_zJ_x²J_z⟩ comes out negative (possible for noisy
/// moment combinations; the certificate remains a valid lower bound).
pub fn experimental_bound<T: Scalar>(m: &MeasuredMoments<T>) -> Result<SensitivityResult<T>> {
    let set = moment_set_from_measured(m);
    if set.jz_jx2_jz < T::zero() {
        log::warn!(
            "reconstructed <J_z J_x^2 J_z> is negative ({:.3e}); \
             measured z-moments are mutually inconsistent at this precision",
            set.jz_jx2_jz.to_f64_lossy()
        );
    }
    optimal_variance(&set)
}

/// How one bootstrap resample of the measured moments is drawn.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum ResamplingModel {
    /// Each of the four moments drawn independently from a normal
    /// distribution (central value, reported 1σ), clipped at zero. The
    /// experiment's raw shot record (and any cross-moment correlation) is
    /// unavailable, so independence is the documented assumption.
    #[default]
    IndependentGaussian,
}

/// Fewest resamples for which a bootstrap standard deviation is reported.
pub const MIN_RESAMPLES: usize = 100;

/// Parametric-bootstrap settings for uncertainty propagation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BootstrapConfig {
    /// Number of synthetic moment sets to draw (at least [`MIN_RESAMPLES`]).
    pub resamples: usize,
    /// Seed of the deterministic generator; resample i uses stream i.
    pub seed: u64,
    /// Distributional model for the synthetic draws.
    pub model: ResamplingModel,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig {
            resamples: 10_000,
            seed: 1234,
            model: ResamplingModel::IndependentGaussian,
        }
    }
}

/// Bootstrap distribution summary of the certified gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapSummary<T: Scalar> {
    pub mean_gain: T,
    pub std_gain: T,
    /// Resamples requested.
    pub resamples: usize,
    /// Resamples rejected as unphysical (negative Var(J_z²) or Var(J_x²),
    /// degenerate ⟨J_x²⟩ ≈ ⟨J_z²⟩, or a non-positive variance numerator).
    pub discarded: usize,
    pub seed: u64,
}

/// Gain from one concrete draw of (jz2, jz4, jx2, jx4); `None` marks an
/// unphysical draw. Strict checks, no rounding-slack clamping: a resample
/// with Var < 0 is evidence about the error model and must be counted, not
/// repaired.
fn gain_of_draw(n_particles: u32, jz2: f64, jz4: f64, jx2: f64, jx4: f64) -> Option<f64> {
    let n = f64::from(n_particles);
    let vz = jz4 - jz2 * jz2;
    let vx = jx4 - jx2 * jx2;
    if vz < 0.0 || vx < 0.0 {
        return None;
    }
    if (jx2 - jz2).abs() < 1.0e-12 * (n * n).max(1.0) {
        return None;
    }
    let z = z_bound(jz2, jz4, n_particles);
    let numerator = 2.0 * (vz * vx).sqrt() + jx2 - 2.0 * jz2 * (1.0 + jx2) + 6.0 * z;
    if numerator <= 0.0 {
        return None;
    }
    let denominator = 4.0 * (jx2 - jz2).powi(2);
    Some(denominator / numerator / n)
}

/// Propagate the reported 1σ uncertainties through the bound by parametric
/// bootstrap: each resample draws the four moments independently from
/// clipped normal distributions (draw order jz2, jz4, jx2, jx4, each clipped
/// at 0), evaluates the certified gain, and unphysical draws are discarded
/// (and counted). Deterministic in `seed`; resamples run in parallel on
/// independent generator streams.
pub fn bootstrap_gain<T: Scalar>(
    m: &MeasuredMoments<T>,
    config: &BootstrapConfig,
) -> Result<BootstrapSummary<T>> {
    if config.resamples < MIN_RESAMPLES {
        return Err(Error::TooFewResamples {
            requested: config.resamples,
            minimum: MIN_RESAMPLES,
        });
    }
    let ResamplingModel::IndependentGaussian = config.model;
    let centers = [
        (m.jz2.to_f64_lossy(), m.jz2_err.to_f64_lossy()),
        (m.jz4.to_f64_lossy(), m.jz4_err.to_f64_lossy()),
        (m.jx2.to_f64_lossy(), m.jx2_err.to_f64_lossy()),
        (m.jx4.to_f64_lossy(), m.jx4_err.to_f64_lossy()),
    ];
    for (_, err) in centers {
        if err < 0.0 {
            return Err(Error::NonPositiveParameter {
                what: "moment uncertainty",
                value: err,
            });
        }
    }
    let n_particles = m.n_particles;
    let seed = config.seed;
    let gains: Vec<Option<f64>> = (0..config.resamples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            let mut draw = [0.0f64; 4];
            for (slot, (center, err)) in draw.iter_mut().zip(centers) {
                let dist =
                    Normal::new(center, err).expect("uncertainties checked nonnegative");
                *slot = dist.sample(&mut rng).max(0.0);
            }
            gain_of_draw(n_particles, draw[0], draw[1], draw[2], draw[3])
        })
        .collect();

    let kept: Vec<f64> = gains.iter().filter_map(|g| *g).collect();
    let discarded = config.resamples - kept.len();
    if discarded * 2 > config.resamples || kept.len() < 2 {
        return Err(Error::TooFewValidResamples {
            kept: kept.len(),
            total: config.resamples,
        });
    }
    let mean = kept.iter().sum::<f64>() / kept.len() as f64;
    let var = kept.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / (kept.len() - 1) as f64;
    Ok(BootstrapSummary {
        mean_gain: T::of(mean),
        std_gain: T::of(var.sqrt()),
        resamples: config.resamples,
        discarded,
        seed,
    })
}

/// Grid specification for mapping the certified gain over second moments.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionMapSpec<T: Scalar> {
    pub n_particles: u32,
    /// ⟨J_x²⟩ expressed as fractions of its maximum N(N+2)/8.
    pub jx2_fractions: Vec<T>,
    /// Absolute ⟨J_z²⟩ values.
    pub jz2_values: Vec<T>,
    /// Fourth-moment shape ratio for ⟨J_z⁴⟩ ≈ β⟨J_z²⟩² (3 = Gaussian).
    pub beta: T,
}

/// One cell of the gain map; `None` marks cells where the bound is undefined
/// (degenerate or unphysical moment combinations).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionCell<T: Scalar> {
    pub jx2_fraction: T,
    pub jz2: T,
    pub gain: Option<T>,
    pub depth: Option<u32>,
}

/// Certified gain and depth over a (⟨J_x²⟩/J_max², ⟨J_z²⟩) grid, using the
/// fourth-moment estimates [`approx_jx4`] and [`approx_jz4`]. Rows iterate
/// ⟨J_z²⟩ fastest (fraction-major order).
pub fn region_map<T: Scalar>(spec: &RegionMapSpec<T>) -> Result<Vec<RegionCell<T>>> {
    if spec.n_particles == 0 {
        return Err(Error::NoParticles(0));
    }
    if spec.jx2_fractions.is_empty() {
        return Err(Error::InvalidGrid("empty <J_x^2> fraction grid".into()));
    }
    if spec.jz2_values.is_empty() {
        return Err(Error::InvalidGrid("empty <J_z^2> grid".into()));
    }
    if spec.jx2_fractions.iter().any(|&f| f < T::zero())
        || spec.jz2_values.iter().any(|&z| z < T::zero())
    {
        return Err(Error::InvalidGrid(
            "moment grids must be nonnegative (expectations of positive operators)".into(),
        ));
    }
    if spec.beta <= T::zero() {
        return Err(Error::NonPositiveParameter {
            what: "fourth-moment shape ratio beta",
            value: spec.beta.to_f64_lossy(),
        });
    }
    let n = f64::from(spec.n_particles);
    let jmax2 = T::of(n * (n + 2.0) / 8.0);
    let mut cells = Vec::with_capacity(spec.jx2_fractions.len() * spec.jz2_values.len());
    for &fraction in &spec.jx2_fractions {
        for &jz2 in &spec.jz2_values {
            let jx2 = fraction * jmax2;
            let jz4 = approx_jz4(jz2, spec.beta);
            let set = MomentSet {
                n_particles: spec.n_particles,
                jx2,
                jy2: jx2,
                jz2,
                jx4: approx_jx4(spec.n_particles, jx2),
                jz4,
                jz_jx2_jz: z_bound(jz2, jz4, spec.n_particles),
                odd_terms: None,
            };
            let (gain, depth) = match optimal_variance(&set) {
                Ok(r) => (Some(r.gain), Some(r.depth_certified)),
                Err(_) => (None, None),
            };
            cells.push(RegionCell {
                jx2_fraction: fraction,
                jz2,
                gain,
                depth,
            });
        }
    }
    Ok(cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spinops::SpinSystem;
    use crate::states::{phase_average, random_pure};
    use approx::assert_relative_eq;

    fn reference_file() -> String {
        "\
# measured collective-spin moments
N = 7900
jz2 = 112          # central value
jz2_err = 31
jz4 = 4.0e4
jz4_err = 2.2e4
jx2 = 6.0e6
jx2_err = 6.0e5
jx4 = 6.2e13
jx4_err = 8.0e12
"
        .to_string()
    }

    fn reference_moments() -> MeasuredMoments<f64> {
        MeasuredMoments::parse(&reference_file()).unwrap()
    }

    #[test]
    fn parse_handles_comments_whitespace_and_scientific_notation() {
        let m = reference_moments();
        assert_eq!(m.n_particles, 7900);
        assert_eq!(m.jz2, 112.0);
        assert_eq!(m.jz4, 4.0e4);
        assert_eq!(m.jx4_err, 8.0e12);
    }

    #[test]
    fn parse_reports_line_numbers_for_bad_input() {
        let text = "N = 100\njz2 = 1.0\njz2_err = not_a_number\n";
        match MeasuredMoments::<f64>::parse(text) {
            Err(Error::MomentsFileLine { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected line error, got {other:?}"),
        }
        let text = "N = 100\nbogus_key = 1\n";
        match MeasuredMoments::<f64>::parse(text) {
            Err(Error::MomentsFileLine { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected line error, got {other:?}"),
        }
        let text = "N = 100\njz2 = 1\njz2 = 2\n";
        match MeasuredMoments::<f64>::parse(text) {
            Err(Error::MomentsFileLine { line, message }) => {
                assert_eq!(line, 3);
                assert!(message.contains("duplicate"));
            }
            other => panic!("expected duplicate-key error, got {other:?}"),
        }
    }

    #[test]
    fn parse_lists_missing_keys() {
        match MeasuredMoments::<f64>::parse("N = 10\njz2 = 1\n") {
            Err(Error::MomentsFileMissingKeys(keys)) => {
                assert!(keys.contains("jz2_err"));
                assert!(keys.contains("jx4"));
                assert!(!keys.contains("N,"));
            }
            other => panic!("expected missing-keys error, got {other:?}"),
        }
    }

    #[test]
    fn parse_rejects_unphysical_values() {
        assert!(matches!(
            MeasuredMoments::<f64>::parse("N = 2.5\n"),
            Err(Error::MomentsFileLine { line: 1, .. })
        ));
        assert!(matches!(
            MeasuredMoments::<f64>::parse("jz2_err = -3\n"),
            Err(Error::MomentsFileLine { line: 1, .. })
        ));
        assert!(matches!(
            MeasuredMoments::<f64>::parse("jx2 = -1e3\n"),
            Err(Error::MomentsFileLine { line: 1, .. })
        ));
    }

    #[test]
    fn render_round_trips() {
        let m = reference_moments();
        let again = MeasuredMoments::<f64>::parse(&m.render()).unwrap();
        assert_eq!(m, again);
    }

    #[test]
    fn z_reconstruction_is_exact_for_phase_averaged_states() {
        for (n, seed) in [(5u32, 1u64), (8, 2), (13, 3)] {
            let sys = SpinSystem::symmetric(n).unwrap();
            let state = phase_average(&random_pure::<f64>(sys, seed));
            let m = crate::metrology::moments_of(&state);
            let z = z_bound(m.jz2, m.jz4, n);
            assert_relative_eq!(z, m.jz_jx2_jz, max_relative = 1e-10, epsilon = 1e-10);
        }
    }

    #[test]
    fn fourth_moment_estimate_dominates_the_true_moment() {
        for seed in [4u64, 5, 6] {
            let sys = SpinSystem::symmetric(9).unwrap();
            let m = crate::metrology::moments_of(&random_pure::<f64>(sys, seed));
            assert!(approx_jx4(9, m.jx2) >= m.jx4 * (1.0 - 1e-12));
        }
        assert_eq!(approx_jz4(2.0, 3.0), 12.0);
    }

    #[test]
    fn central_values_reproduce_reference_bound() {
        let r = experimental_bound(&reference_moments()).unwrap();
        assert_relative_eq!(r.gain, 3.2575, max_relative = 1e-3);
        assert_relative_eq!(r.theta_opt, 5.7005e-3, max_relative = 1e-3);
        assert_eq!(r.depth_certified, 4);
        assert!(!r.depth_divisor_warning, "4 divides 7900");
        assert_relative_eq!(r.inv_var_opt * r.var_opt, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn bootstrap_is_deterministic_and_counts_unphysical_draws() {
        let m = reference_moments();
        let cfg = BootstrapConfig {
            resamples: 400,
            seed: 42,
            ..BootstrapConfig::default()
        };
        let a = bootstrap_gain(&m, &cfg).unwrap();
        let b = bootstrap_gain(&m, &cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.discarded > 0, "these uncertainties reject some draws");
        assert!(a.discarded * 2 < cfg.resamples);
        assert!(a.mean_gain > 2.5 && a.mean_gain < 5.0, "mean {}", a.mean_gain);
        assert!(a.std_gain > 0.3 && a.std_gain < 3.0, "std {}", a.std_gain);
        let c = bootstrap_gain(
            &m,
            &BootstrapConfig {
                resamples: 400,
                seed: 43,
                ..BootstrapConfig::default()
            },
        )
        .unwrap();
        assert_ne!(a.mean_gain, c.mean_gain);
    }

    #[test]
    fn bootstrap_with_zero_uncertainties_is_a_point_mass() {
        let mut m = reference_moments();
        m.jz2_err = 0.0;
        m.jz4_err = 0.0;
        m.jx2_err = 0.0;
        m.jx4_err = 0.0;
        let summary = bootstrap_gain(
            &m,
            &BootstrapConfig {
                resamples: 200,
                seed: 5,
                ..BootstrapConfig::default()
            },
        )
        .unwrap();
        let central = experimental_bound(&m).unwrap();
        // mean equals the central-value gain up to rounding: the bootstrap
        // path and the bound path evaluate the same algebra independently
        assert_relative_eq!(summary.mean_gain, central.gain, max_relative = 1e-14);
        assert!(summary.std_gain.abs() <= 1e-12, "std {}", summary.std_gain);
        assert_eq!(summary.discarded, 0);
    }

    #[test]
    fn gaussian_fourth_moment_ratio_approaches_three() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        let dist = Normal::new(0.0f64, 5.0).unwrap();
        let (mut m2, mut m4) = (0.0f64, 0.0f64);
        let samples = 1_000_000;
        for _ in 0..samples {
            let x: f64 = dist.sample(&mut rng);
            m2 += x * x;
            m4 += x.powi(4);
        }
        m2 /= samples as f64;
        m4 /= samples as f64;
        let beta = m4 / (m2 * m2);
        assert!((beta - 3.0).abs() < 0.06, "empirical shape ratio {beta}");
        assert_relative_eq!(approx_jz4(m2, 3.0), m4, max_relative = 0.02);
    }

    #[test]
    fn bootstrap_rejects_overwhelmingly_unphysical_input() {
        let mut m = reference_moments();
        // central Var(J_z²) < 0: most draws are discarded
        m.jz4 = 1.0e4;
        m.jz4_err = 1.0e3;
        match bootstrap_gain(
            &m,
            &BootstrapConfig {
                resamples: 100,
                seed: 7,
                ..BootstrapConfig::default()
            },
        ) {
            Err(Error::TooFewValidResamples { kept, total }) => {
                assert_eq!(total, 100);
                assert!(kept < 50);
            }
            other => panic!("expected TooFewValidResamples, got {other:?}"),
        }
    }

    #[test]
    fn bootstrap_enforces_minimum_resamples() {
        let m = reference_moments();
        let cfg = BootstrapConfig {
            resamples: 99,
            seed: 1,
            ..BootstrapConfig::default()
        };
        assert!(matches!(
            bootstrap_gain(&m, &cfg),
            Err(Error::TooFewResamples {
                requested: 99,
                minimum: MIN_RESAMPLES
            })
        ));
    }

    #[test]
    fn region_map_reproduces_the_ideal_corner() {
        let spec = RegionMapSpec {
            n_particles: 100,
            jx2_fractions: vec![0.0, 0.5, 1.0],
            jz2_values: vec![0.0, 510.0],
            beta: 3.0,
        };
        let cells = region_map(&spec).unwrap();
        assert_eq!(cells.len(), 6);
        // (fraction 1, jz2 0) is the ideal Dicke point: gain (N+2)/2
        let corner = cells
            .iter()
            .find(|c| c.jx2_fraction == 1.0 && c.jz2 == 0.0)
            .unwrap();
        assert_relative_eq!(corner.gain.unwrap(), 51.0, max_relative = 1e-10);
        assert_eq!(corner.depth, Some(51));
        // (0, 0) is doubly degenerate: undefined sentinels
        let origin = cells
            .iter()
            .find(|c| c.jx2_fraction == 0.0 && c.jz2 == 0.0)
            .unwrap();
        assert!(origin.gain.is_none() && origin.depth.is_none());
        // jz2 = 510 = 0.4·jmax2 collides with jx2 at fraction 0.4 — but at
        // fraction 0.5 it is fine and certifies nothing special
        let off = cells
            .iter()
            .find(|c| c.jx2_fraction == 0.5 && c.jz2 == 510.0)
            .unwrap();
        assert!(off.gain.is_some());
    }

    #[test]
    fn region_map_marks_degenerate_cells_undefined() {
        let spec = RegionMapSpec {
            n_particles: 100,
            jx2_fractions: vec![0.4],
            jz2_values: vec![510.0], // = 0.4 · N(N+2)/8 exactly
            beta: 3.0,
        };
        let cells = region_map(&spec).unwrap();
        assert!(cells[0].gain.is_none());
        assert!(cells[0].depth.is_none());
    }

    #[test]
    fn region_map_validates_grids() {
        let bad = RegionMapSpec {
            n_particles: 100,
            jx2_fractions: vec![],
            jz2_values: vec![0.0],
            beta: 3.0,
        };
        assert!(matches!(region_map(&bad), Err(Error::InvalidGrid(_))));
        let negative = RegionMapSpec {
            n_particles: 100,
            jx2_fractions: vec![0.5],
            jz2_values: vec![-1.0],
            beta: 3.0,
        };
        assert!(matches!(region_map(&negative), Err(Error::InvalidGrid(_))));
    }

    #[test]
    fn experimental_point_in_region_map_shows_entanglement() {
        let spec = RegionMapSpec {
            n_particles: 7900,
            jx2_fractions: vec![0.769],
            jz2_values: vec![112.0],
            beta: 3.0,
        };
        let cells = region_map(&spec).unwrap();
        let gain = cells[0].gain.unwrap();
        assert_relative_eq!(gain, 2.888, max_relative = 2e-3);
        assert!(gain > 1.0);
        assert_eq!(cells[0].depth, Some(3));
    }
}
