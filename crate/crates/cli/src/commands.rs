//! One function per subcommand. Each builds its artifact as a string (CSV
//! with a `#` metadata header, or pretty JSON) and hands it to the output
//! sink, so every command stays trivially testable end to end.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::json;

use dicke_metrology::{
    bootstrap_gain, collective, dicke, experimental_bound, moment_set_from_measured, moments_of,
    optimal_variance, qfi, region_map, squeezed_ground_state, thermal_dicke, variance_at, Axis,
    BootstrapConfig, Error, MeasuredMoments, RegionCell, RegionMapSpec, SensitivityResult,
    SpinSystem,
};

use crate::grid::GridSpec;

/// Failure modes of a subcommand, mapped onto process exit codes by `main`.
#[derive(Debug)]
pub enum CommandError {
    /// Arguments that clap cannot rule out but the command must (exit 2).
    Usage(String),
    /// Input data or numerics rejected the request (exit 1).
    Failed(String),
}

impl std::fmt::Display for CommandError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CommandError::Usage(m) | CommandError::Failed(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CommandError {
    fn from(e: Error) -> Self {
        CommandError::Failed(e.to_string())
    }
}

impl From<std::io::Error> for CommandError {
    fn from(e: std::io::Error) -> Self {
        CommandError::Failed(e.to_string())
    }
}

type CmdResult = Result<(), CommandError>;

fn emit(out: Option<&Path>, content: &str) -> CmdResult {
    match out {
        Some(path) => fs::write(path, content)
            .map_err(|e| CommandError::Failed(format!("{}: {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

/// `# key = value` preamble carried by every text artifact (CSV and the
/// moments file format both treat `#` lines as comments).
fn metadata_header(command: &str, params: &[(&str, String)]) -> String {
    let mut head = format!(
        "# dicke-metrology {}\n# command = {command}\n",
        env!("CARGO_PKG_VERSION")
    );
    for (key, value) in params {
        let _ = writeln!(head, "# {key} = {value}");
    }
    head
}

fn read_moments(path: &Path) -> Result<MeasuredMoments<f64>, CommandError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CommandError::Failed(format!("{}: {e}", path.display())))?;
    MeasuredMoments::parse(&text)
        .map_err(|e| CommandError::Failed(format!("{}: {e}", path.display())))
}

/// Error text embedded in a CSV status cell; keeps the row machine-splittable.
fn status_cell(e: &Error) -> String {
    e.to_string().replace(',', ";")
}

fn depth_json(result: &SensitivityResult<f64>) -> serde_json::Value {
    json!({
        "certified": result.depth_certified,
        "divisor_warning": result.depth_divisor_warning,
    })
}

pub fn ideal_dicke(n: u32, out: Option<&Path>, write_moments: Option<&Path>) -> CmdResult {
    if n == 0 || !n.is_multiple_of(2) {
        return Err(CommandError::Usage(format!(
            "--n must be a positive even particle number (the balanced Dicke state has N/2 excitations), got {n}"
        )));
    }
    let sys = SpinSystem::symmetric(n)?;
    let state = dicke::<f64>(sys, n / 2)?;
    let moments = moments_of(&state);
    let result = optimal_variance(&moments)?;
    let fisher = qfi(&state, &collective(sys, Axis::Y))?;
    if let Some(path) = write_moments {
        let measured = MeasuredMoments {
            n_particles: n,
            jz2: moments.jz2,
            jz2_err: 0.0,
            jz4: moments.jz4,
            jz4_err: 0.0,
            jx2: moments.jx2,
            jx2_err: 0.0,
            jx4: moments.jx4,
            jx4_err: 0.0,
        };
        let file = format!(
            "{}{}",
            metadata_header("ideal-dicke", &[("n", n.to_string())]),
            measured.render()
        );
        emit(Some(path), &file)?;
    }
    let report = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "command": "ideal-dicke",
        "n": n,
        "moments": {
            "jx2": moments.jx2,
            "jy2": moments.jy2,
            "jz2": moments.jz2,
            "jx4": moments.jx4,
            "jz4": moments.jz4,
            "jz_jx2_jz": moments.jz_jx2_jz,
        },
        "theta_opt": result.theta_opt,
        "var_opt": result.var_opt,
        "inv_var_opt": result.inv_var_opt,
        "gain": result.gain,
        "qfi": fisher,
        "depth": depth_json(&result),
    });
    emit(out, &format!("{:#}\n", report))
}

/// Shared body of the two parameter scans: CSV of the certified inverse
/// variance against the Fisher information, raw and per particle.
fn scan(
    command: &str,
    parameter: &str,
    n: u32,
    grid: &GridSpec,
    out: Option<&Path>,
    state_at: impl Fn(f64) -> dicke_metrology::Result<dicke_metrology::QuantumState<f64>>,
) -> CmdResult {
    let sys = SpinSystem::symmetric(n)?;
    let generator = collective::<f64>(sys, Axis::Y);
    let mut csv = metadata_header(
        command,
        &[("n", n.to_string()), ("grid", grid.to_string())],
    );
    let _ = writeln!(
        csv,
        "{parameter},inv_var_opt,qfi,gain,qfi_over_n,status"
    );
    for value in grid.points() {
        let row = state_at(value).and_then(|state| {
            let result = optimal_variance(&moments_of(&state))?;
            let fisher = qfi(&state, &generator)?;
            Ok((result, fisher))
        });
        match row {
            Ok((result, fisher)) => {
                let _ = writeln!(
                    csv,
                    "{value},{},{fisher},{},{},ok",
                    result.inv_var_opt,
                    result.gain,
                    fisher / f64::from(n)
                );
            }
            Err(e) => {
                let _ = writeln!(csv, "{value},,,,,{}", status_cell(&e));
            }
        }
    }
    emit(out, &csv)
}

pub fn scan_squeezing(n: u32, grid: &GridSpec, out: Option<&Path>) -> CmdResult {
    if n == 0 {
        return Err(CommandError::Usage("--n must be positive".into()));
    }
    scan("scan-squeezing", "lambda", n, grid, out, |lambda| {
        squeezed_ground_state(n, lambda)
    })
}

pub fn scan_thermal(n: u32, grid: &GridSpec, out: Option<&Path>) -> CmdResult {
    if n == 0 || !n.is_multiple_of(2) {
        return Err(CommandError::Usage(format!(
            "--n must be a positive even particle number (thermal mixtures are centred on the balanced Dicke state), got {n}"
        )));
    }
    scan("scan-thermal", "temperature", n, grid, out, |temperature| {
        thermal_dicke(n, temperature)
    })
}

pub fn sensitivity_curve(moments_path: &Path, grid: &GridSpec, out: Option<&Path>) -> CmdResult {
    let measured = read_moments(moments_path)?;
    let set = moment_set_from_measured(&measured);
    let central = optimal_variance(&set)?;
    let n = f64::from(measured.n_particles);
    let mut csv = metadata_header(
        "sensitivity-curve",
        &[
            ("moments_file", moments_path.display().to_string()),
            ("n", measured.n_particles.to_string()),
            ("grid", grid.to_string()),
            ("theta_opt", central.theta_opt.to_string()),
            ("gain", central.gain.to_string()),
        ],
    );
    let _ = writeln!(csv, "theta,inv_var_over_n,marker");
    for theta in grid.points() {
        match variance_at(&set, theta) {
            Ok(variance) => {
                let _ = writeln!(csv, "{theta},{},", 1.0 / (variance * n));
            }
            Err(Error::AngleSingularity { .. }) => {
                let _ = writeln!(csv, "{theta},,singular");
            }
            Err(e) => {
                let _ = writeln!(csv, "{theta},,{}", status_cell(&e));
            }
        }
    }
    let _ = writeln!(csv, "{},{},theta_opt", central.theta_opt, central.gain);
    let _ = writeln!(csv, ",1,shot_noise");
    emit(out, &csv)
}

pub fn exp_bound(
    moments_path: &Path,
    resamples: usize,
    seed: u64,
    out: Option<&Path>,
) -> CmdResult {
    let measured = read_moments(moments_path)?;
    let central = experimental_bound(&measured)?;
    let config = BootstrapConfig {
        resamples,
        seed,
        ..BootstrapConfig::default()
    };
    let bootstrap = bootstrap_gain(&measured, &config)?;
    let report = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "command": "exp-bound",
        "moments": {
            "n": measured.n_particles,
            "jz2": measured.jz2,
            "jz2_err": measured.jz2_err,
            "jz4": measured.jz4,
            "jz4_err": measured.jz4_err,
            "jx2": measured.jx2,
            "jx2_err": measured.jx2_err,
            "jx4": measured.jx4,
            "jx4_err": measured.jx4_err,
        },
        "theta_opt": central.theta_opt,
        "var_opt": central.var_opt,
        "inv_var_opt": central.inv_var_opt,
        "gain": central.gain,
        "depth": depth_json(&central),
        "bootstrap": {
            "resamples": bootstrap.resamples,
            "seed": bootstrap.seed,
            "mean_gain": bootstrap.mean_gain,
            "std_gain": bootstrap.std_gain,
            "discarded": bootstrap.discarded,
        },
    });
    emit(out, &format!("{:#}\n", report))
}

fn region_cell_row(cell: &RegionCell<f64>, with_fraction: bool) -> String {
    let gain = cell
        .gain
        .map_or_else(|| "undefined".into(), |g| g.to_string());
    let depth = cell
        .depth
        .map_or_else(|| "undefined".into(), |d| d.to_string());
    if with_fraction {
        format!("{},{},{gain},{depth}\n", cell.jx2_fraction, cell.jz2)
    } else {
        format!("{},{gain},{depth}\n", cell.jz2)
    }
}

/// Cross-section path derived from the grid path when not given explicitly.
fn derived_cross_section_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().unwrap_or_default().to_string_lossy();
    let name = match out.extension() {
        Some(ext) => format!("{stem}-cross-section.{}", ext.to_string_lossy()),
        None => format!("{stem}-cross-section"),
    };
    out.with_file_name(name)
}

#[allow(clippy::too_many_arguments)]
pub fn region_map_cmd(
    n: u32,
    beta: f64,
    fraction_grid: &GridSpec,
    jz2_grid: &GridSpec,
    cross_section_at: f64,
    out: Option<&Path>,
    cross_section_out: Option<&Path>,
) -> CmdResult {
    if n == 0 {
        return Err(CommandError::Usage("--n must be positive".into()));
    }
    if beta.is_nan() || beta <= 0.0 {
        return Err(CommandError::Usage(format!(
            "--beta must be positive, got {beta}"
        )));
    }
    if !(0.0..=1.0).contains(&cross_section_at) {
        return Err(CommandError::Usage(format!(
            "--cross-section-at is a fraction of the maximal <Jx^2> and must lie in [0, 1], got {cross_section_at}"
        )));
    }
    if fraction_grid.min < 0.0 || fraction_grid.max > 1.0 {
        return Err(CommandError::Usage(format!(
            "--fraction-grid must stay within [0, 1], got {fraction_grid}"
        )));
    }
    if jz2_grid.min < 0.0 {
        return Err(CommandError::Usage(format!(
            "--jz2-grid must be nonnegative, got {jz2_grid}"
        )));
    }

    let cells = region_map(&RegionMapSpec {
        n_particles: n,
        jx2_fractions: fraction_grid.points(),
        jz2_values: jz2_grid.points(),
        beta,
    })?;
    let mut grid_csv = metadata_header(
        "region-map",
        &[
            ("n", n.to_string()),
            ("beta", beta.to_string()),
            ("fraction_grid", fraction_grid.to_string()),
            ("jz2_grid", jz2_grid.to_string()),
        ],
    );
    grid_csv.push_str("jx2_over_jmax2,jz2,gain,depth\n");
    for cell in &cells {
        grid_csv.push_str(&region_cell_row(cell, true));
    }

    let section = region_map(&RegionMapSpec {
        n_particles: n,
        jx2_fractions: vec![cross_section_at],
        jz2_values: jz2_grid.points(),
        beta,
    })?;
    let mut section_csv = metadata_header(
        "region-map cross-section",
        &[
            ("n", n.to_string()),
            ("beta", beta.to_string()),
            ("jx2_over_jmax2", cross_section_at.to_string()),
            ("jz2_grid", jz2_grid.to_string()),
        ],
    );
    section_csv.push_str("jz2,gain,depth\n");
    for cell in &section {
        section_csv.push_str(&region_cell_row(cell, false));
    }

    match (out, cross_section_out) {
        (Some(grid_path), section_out) => {
            emit(Some(grid_path), &grid_csv)?;
            let section_path = section_out
                .map(Path::to_path_buf)
                .unwrap_or_else(|| derived_cross_section_path(grid_path));
            emit(Some(&section_path), &section_csv)
        }
        (None, Some(section_path)) => {
            emit(None, &grid_csv)?;
            emit(Some(section_path), &section_csv)
        }
        (None, None) => {
            emit(None, &grid_csv)?;
            println!();
            emit(None, &section_csv)
        }
    }
}
