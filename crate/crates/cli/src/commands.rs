//! Command execution and report emission.

use std::fs;
use std::io::Write;
use std::path::Path;

use foliation_core::basic_calculus::LeafVolumeDensity;
use foliation_core::bounds::{s3_bounds, write_bounds_csv};
use foliation_core::operators::{
    assemble_basic_dirac_forms, assemble_basic_dirac_spinor, assemble_basic_laplacian,
};
use foliation_core::report::{fmt_num, write_atomic};
use foliation_core::spectral::eigenvalues_weighted;
use foliation_core::verify::{
    conjugation_residual, invariance_check, kappa_transform_residual, laplacian_dependence,
    lichnerowicz_residual, random_profile_pairs, run_all, scal_relation_residual, seed_from_env,
    DEFAULT_SEED, SEED_ENV_VAR,
};
use foliation_core::{
    BoundReport, FormDegree, GridSpec, LabError, MetricProfile, SpectrumReport, VerificationBundle,
    VerificationReport, WeightedOperator,
};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{CheckName, CommandKind, Format, Model, OperatorKind, RunConfig};

/// Why a run stopped early.
#[derive(Debug)]
pub enum RunError {
    /// Bad input: exit code 2.
    Config(String),
    /// Numerical or I/O failure while computing: exit code 1.
    Compute(String),
}

impl From<LabError> for RunError {
    fn from(e: LabError) -> Self {
        match e {
            LabError::InvalidProfile { .. }
            | LabError::NonPositiveMetric { .. }
            | LabError::InvalidGrid(_)
            | LabError::Domain(_)
            | LabError::WindowNotCovered { .. }
            | LabError::UnresolvedDensity { .. }
            | LabError::NonBasicMeanCurvature { .. }
            | LabError::Json(_) => RunError::Config(e.to_string()),
            _ => RunError::Compute(e.to_string()),
        }
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Compute(format!("writing report: {e}"))
    }
}

/// Whether every verification in the run passed.
pub type Verdict = bool;

pub fn execute(config: &RunConfig) -> Result<Verdict, RunError> {
    match (config.command, config.model) {
        (CommandKind::Spectrum, _) => spectrum(config),
        (CommandKind::Invariance, _) => invariance(config),
        (CommandKind::Bounds, _) => bounds(config),
        (CommandKind::Verify, _) => verify(config),
        (CommandKind::Sweep, Model::S3) => sweep_s3(config),
        (CommandKind::Sweep, Model::Torus) => sweep_torus(config),
    }
}

pub fn load_profile(path: &Path) -> Result<MetricProfile, RunError> {
    let text = fs::read_to_string(path)
        .map_err(|e| RunError::Config(format!("cannot read profile {}: {e}", path.display())))?;
    MetricProfile::from_json(&text)
        .map_err(|e| RunError::Config(format!("{}: {e}", path.display())))
}

fn load_profiles(config: &RunConfig) -> Result<Vec<MetricProfile>, RunError> {
    config
        .profile_paths
        .iter()
        .map(|p| load_profile(p))
        .collect()
}

fn emit(config: &RunConfig, file_name: &str, contents: &[u8]) -> Result<(), RunError> {
    emit_to(config.output_dir.as_deref(), file_name, contents)
}

fn emit_to(dir: Option<&Path>, file_name: &str, contents: &[u8]) -> Result<(), RunError> {
    match dir {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            write_atomic(&dir.join(file_name), contents)?;
        }
        None => std::io::stdout().lock().write_all(contents)?,
    }
    Ok(())
}

fn assemble(
    kind: OperatorKind,
    density: &LeafVolumeDensity,
    grid: &GridSpec,
) -> Result<WeightedOperator, RunError> {
    Ok(match kind {
        OperatorKind::Spinor => assemble_basic_dirac_spinor(density, grid)?,
        OperatorKind::Forms => assemble_basic_dirac_forms(density, grid)?,
        OperatorKind::FormsSquared => assemble_basic_dirac_forms(density, grid)?.square(),
        OperatorKind::Laplacian => assemble_basic_laplacian(density, grid, FormDegree::Function)?,
        OperatorKind::LaplacianOneForms => {
            assemble_basic_laplacian(density, grid, FormDegree::OneForm)?
        }
    })
}

fn compute_spectrum(
    config: &RunConfig,
    profile: &MetricProfile,
    n: usize,
) -> Result<SpectrumReport, RunError> {
    let grid = GridSpec::new(n, config.spin)?;
    let density = LeafVolumeDensity::from_profile(profile, &grid);
    let mut spec = eigenvalues_weighted(&assemble(config.operator, &density, &grid)?)?;
    spec.window = config.trusted_window(n);
    Ok(spec)
}

fn render_spectrum(
    spec: &SpectrumReport,
    window: f64,
    format: Format,
) -> Result<Vec<u8>, RunError> {
    let mut out = Vec::new();
    match format {
        Format::Csv => spec.write_csv(&mut out, Some(window))?,
        Format::Json => {
            let body = json!({
                "operator": spec.operator_label,
                "grid_size": spec.grid_size,
                "window": window,
                "eigenvalues": spec.in_window(window),
            });
            out = pretty(&body)?;
        }
    }
    Ok(out)
}

fn pretty(value: &impl serde::Serialize) -> Result<Vec<u8>, RunError> {
    let mut out = serde_json::to_vec_pretty(value).map_err(|e| RunError::Compute(e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}

fn spectrum(config: &RunConfig) -> Result<Verdict, RunError> {
    let profile = load_profile(&config.profile_paths[0])?;
    let spec = compute_spectrum(config, &profile, config.grid_size)?;
    let body = render_spectrum(&spec, config.window, config.format)?;
    let name = format!(
        "spectrum_{}_N{}.{}",
        config.operator.name(),
        config.grid_size,
        config.format.extension()
    );
    emit(config, &name, &body)?;
    Ok(true)
}

fn render_verification(
    reports: &[VerificationReport],
    format: Format,
) -> Result<Vec<u8>, RunError> {
    match format {
        Format::Json => pretty(&reports),
        Format::Csv => {
            let mut out = Vec::new();
            writeln!(out, "check,tag,residual,threshold,passed")?;
            for r in reports {
                let residual = if r.residual.is_finite() {
                    fmt_num(r.residual)
                } else {
                    "inf".into()
                };
                writeln!(
                    out,
                    "{},{},{},{},{}",
                    r.check_name,
                    r.tag,
                    residual,
                    fmt_num(r.threshold),
                    r.passed
                )?;
            }
            Ok(out)
        }
    }
}

fn grid_for(config: &RunConfig) -> Result<GridSpec, RunError> {
    Ok(GridSpec::new(config.grid_size, config.spin)?)
}

fn invariance(config: &RunConfig) -> Result<Verdict, RunError> {
    let profiles = load_profiles(config)?;
    let grid = grid_for(config)?;
    let report = invariance_check(&profiles[0], &profiles[1], &grid, config.window)?;
    let body = render_verification(std::slice::from_ref(&report), config.format)?;
    emit(
        config,
        &format!("invariance.{}", config.format.extension()),
        &body,
    )?;
    Ok(report.passed)
}

fn render_bounds(reports: &[BoundReport], format: Format) -> Result<Vec<u8>, RunError> {
    match format {
        Format::Json => pretty(&reports),
        Format::Csv => {
            let mut out = Vec::new();
            write_bounds_csv(reports, &mut out)?;
            Ok(out)
        }
    }
}

fn bounds(config: &RunConfig) -> Result<Verdict, RunError> {
    let mut reports = Vec::new();
    for &r in &config.r_values {
        reports.extend(s3_bounds(r, config.resolution)?);
    }
    let body = render_bounds(&reports, config.format)?;
    emit(
        config,
        &format!("bounds.{}", config.format.extension()),
        &body,
    )?;
    Ok(true)
}

fn environment(
    config: &RunConfig,
    extra: &[(&str, Value)],
) -> std::collections::BTreeMap<String, Value> {
    let mut env = std::collections::BTreeMap::new();
    env.insert("tool_version".into(), json!(env!("CARGO_PKG_VERSION")));
    env.insert("grid_size".into(), json!(config.grid_size));
    env.insert("spin_structure".into(), json!(config.spin));
    env.insert("window".into(), json!(config.window));
    env.insert(
        "profiles".into(),
        json!(config
            .profile_paths
            .iter()
            .map(|p| p.display().to_string())
            .collect::<Vec<_>>()),
    );
    for (k, v) in extra {
        env.insert((*k).into(), v.clone());
    }
    env
}

fn verify(config: &RunConfig) -> Result<Verdict, RunError> {
    let profiles = load_profiles(config)?;
    let grid = grid_for(config)?;
    let all = config.checks.len() == 6 && profiles.len() == 2;
    let (reports, skipped) = if all {
        run_all(&profiles[0], &profiles[1], &grid, config.window)?
    } else {
        selected_checks(config, &profiles, &grid)?
    };
    let bundle = VerificationBundle {
        environment: environment(
            config,
            &[(
                "checks",
                json!(config
                    .checks
                    .iter()
                    .map(|c| format!("{c:?}").to_lowercase())
                    .collect::<Vec<_>>()),
            )],
        ),
        reports,
        skipped,
    };
    let body = match config.format {
        Format::Json => pretty(&bundle)?,
        Format::Csv => render_verification(&bundle.reports, Format::Csv)?,
    };
    emit(
        config,
        &format!("verify.{}", config.format.extension()),
        &body,
    )?;
    Ok(bundle.all_passed())
}

fn selected_checks(
    config: &RunConfig,
    profiles: &[MetricProfile],
    grid: &GridSpec,
) -> Result<(Vec<VerificationReport>, Vec<String>), RunError> {
    let mut reports = Vec::new();
    let mut skipped = Vec::new();
    for &check in &config.checks {
        match check {
            CheckName::Invariance => reports.push(invariance_check(
                &profiles[0],
                &profiles[1],
                grid,
                config.window,
            )?),
            CheckName::Kappa => {
                reports.push(kappa_transform_residual(&profiles[0], &profiles[1], grid)?)
            }
            CheckName::Conjugation => {
                reports.push(conjugation_residual(&profiles[0], &profiles[1], grid)?)
            }
            CheckName::Laplacian => reports.push(laplacian_dependence(
                &profiles[0],
                &profiles[1],
                grid,
                config.window,
            )?),
            CheckName::Scal => {
                for p in profiles {
                    reports.push(scal_relation_residual(p, grid)?);
                }
            }
            CheckName::Lichnerowicz => {
                for (i, p) in profiles.iter().enumerate() {
                    match lichnerowicz_residual(p, grid) {
                        Ok(r) => reports.push(r),
                        Err(e @ LabError::NonBasicMeanCurvature { .. }) if profiles.len() > 1 => {
                            skipped.push(format!("lichnerowicz[profile {i}]: {e}"))
                        }
                        Err(e) => return Err(e.into()),
                    }
                }
            }
        }
    }
    Ok((reports, skipped))
}

fn sweep_s3(config: &RunConfig) -> Result<Verdict, RunError> {
    let dir = config.output_dir.as_deref();
    let per_r: Vec<Vec<BoundReport>> = config
        .r_values
        .par_iter()
        .enumerate()
        .map(|(i, &r)| -> Result<_, RunError> {
            let reports = s3_bounds(r, config.resolution)?;
            let name = format!("bounds_r{i:03}.{}", config.format.extension());
            emit_to(dir, &name, &render_bounds(&reports, config.format)?)?;
            Ok(reports)
        })
        .collect::<Result<_, _>>()?;
    let all: Vec<BoundReport> = per_r.into_iter().flatten().collect();
    emit(
        config,
        &format!("bounds.{}", config.format.extension()),
        &render_bounds(&all, config.format)?,
    )?;
    Ok(true)
}

struct SweepRow {
    element: String,
    file: String,
    passed: bool,
}

fn sweep_torus(config: &RunConfig) -> Result<Verdict, RunError> {
    let dir = config.output_dir.as_deref();
    let profiles = load_profiles(config)?;
    let ext = config.format.extension();

    let spectrum_jobs: Vec<(usize, usize)> = (0..profiles.len())
        .flat_map(|i| config.grid_sizes.iter().map(move |&n| (i, n)))
        .collect();
    let mut rows: Vec<SweepRow> = spectrum_jobs
        .par_iter()
        .map(|&(i, n)| -> Result<_, RunError> {
            let spec = compute_spectrum(config, &profiles[i], n)?;
            let file = format!(
                "spectrum_{i:02}_{}_N{n}.{ext}",
                stem(&config.profile_paths[i])
            );
            emit_to(
                dir,
                &file,
                &render_spectrum(&spec, config.window, config.format)?,
            )?;
            Ok(SweepRow {
                element: format!("spectrum {} N={n}", config.profile_paths[i].display()),
                file,
                passed: true,
            })
        })
        .collect::<Result<_, _>>()?;

    if config.random_pairs > 0 {
        let seed = config.seed.unwrap_or_else(|| seed_from_env(DEFAULT_SEED));
        let pairs = random_profile_pairs(seed, config.random_pairs);
        let jobs: Vec<(usize, usize)> = (0..pairs.len())
            .flat_map(|i| config.grid_sizes.iter().map(move |&n| (i, n)))
            .collect();
        let pair_rows: Vec<SweepRow> = jobs
            .par_iter()
            .map(|&(i, n)| -> Result<_, RunError> {
                let (p1, p2) = &pairs[i];
                let grid = GridSpec::new(n, config.spin)?;
                let reports = vec![
                    invariance_check(p1, p2, &grid, config.window)?,
                    kappa_transform_residual(p1, p2, &grid)?,
                    conjugation_residual(p1, p2, &grid)?,
                ];
                let passed = reports.iter().all(|r| r.passed);
                let file = format!("random_pair_{i:02}_N{n}.{ext}");
                let body = match config.format {
                    Format::Json => pretty(&VerificationBundle {
                        environment: environment(
                            config,
                            &[
                                ("seed", json!(seed)),
                                ("seed_env_var", json!(SEED_ENV_VAR)),
                                ("pair_index", json!(i)),
                                ("grid_size", json!(n)),
                            ],
                        ),
                        reports,
                        skipped: Vec::new(),
                    })?,
                    Format::Csv => render_verification(&reports, Format::Csv)?,
                };
                emit_to(dir, &file, &body)?;
                Ok(SweepRow {
                    element: format!("random pair {i} seed={seed} N={n}"),
                    file,
                    passed,
                })
            })
            .collect::<Result<_, _>>()?;
        rows.extend(pair_rows);
    }

    let mut summary = Vec::new();
    writeln!(summary, "element,file,passed")?;
    for row in &rows {
        writeln!(summary, "{},{},{}", row.element, row.file, row.passed)?;
    }
    emit(config, "sweep_summary.csv", &summary)?;
    Ok(rows.iter().all(|r| r.passed))
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "profile".into())
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}
