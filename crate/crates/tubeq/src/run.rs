//! Task dispatch.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use tubeq_core::frames::{build_frames, connection_coefficients, curvature_data, CurvatureData};
use tubeq_core::geometry::{Embedding, SampleGrid};
use tubeq_core::operators::submanifold_hamiltonian;
use tubeq_core::spectra::eigen_lowest;
use tubeq_core::squeeze::{
    default_epsilons, squeeze_extrapolate, tube_dirichlet_spectrum, SqueezeRun, TubeResolution,
};
use tubeq_core::tubular::effective_potential;
use tubeq_core::verify::run_checks;

use crate::config::{RunConfig, Task};
use crate::error::{CliError, Stage};
use crate::output::{float, write_csv, write_matrix_market};

pub const DEFAULT_EIGENCOUNT: usize = 5;
pub const DEFAULT_LEVELS: usize = 3;

/// Where a run reads from and writes to.
#[derive(Clone, Debug)]
pub struct RunContext {
    /// Directory relative sample files resolve against.
    pub base: PathBuf,
    pub out: PathBuf,
    pub dump_matrix: bool,
}

/// Runs `task` and returns the paths written.
pub fn run(task: Task, config: &RunConfig, ctx: &RunContext) -> Result<Vec<PathBuf>, CliError> {
    if let Some(declared) = config.task {
        if declared != task {
            return Err(CliError::config(
                "task",
                format!("config declares `{}` but `{}` was requested", declared.name(), task.name()),
            ));
        }
    }
    std::fs::create_dir_all(&ctx.out).map_err(|e| CliError::io(&ctx.out, e))?;
    let target = ctx
        .out
        .join(config.options.output.clone().unwrap_or_else(|| PathBuf::from(format!("{}.csv", task.name()))));
    if task == Task::Verify {
        return verify(&target);
    }
    let embedding = config.embedding(&ctx.base)?;
    match task {
        Task::Curvature => curvature(&embedding, &config.sample_grid(&embedding)?, &target),
        Task::Potential => potential(&embedding, &config.sample_grid(&embedding)?, &target),
        Task::Spectrum => spectrum(&embedding, &config.sample_grid(&embedding)?, config, ctx, &target),
        Task::Squeeze => squeeze(&embedding, config, &target),
        Task::Verify => unreachable!(),
    }
}

fn param_header(grid: &SampleGrid) -> Vec<&'static str> {
    if grid.dim() == 1 {
        vec!["node", "s"]
    } else {
        vec!["node", "u", "v"]
    }
}

fn param_cells(grid: &SampleGrid, node: usize) -> Vec<String> {
    let mut row = vec![node.to_string()];
    row.extend(grid.params(node).into_iter().map(float));
    row
}

fn curvature(embedding: &Embedding, grid: &SampleGrid, target: &Path) -> Result<Vec<PathBuf>, CliError> {
    let frames = build_frames(embedding, grid).stage("frames::build_frames")?;
    let coeffs = connection_coefficients(embedding, &frames).stage("frames::connection_coefficients")?;
    let data = curvature_data(embedding, &frames, &coeffs).stage("frames::curvature_data")?;
    let mut header = param_header(grid);
    let rows: Vec<Vec<String>> = match &data {
        CurvatureData::Curve(c) => {
            header.extend(["kappa", "torsion", "kappa_c_re", "kappa_c_im", "kappa_c_abs"]);
            (0..grid.len())
                .map(|i| {
                    let mut row = param_cells(grid, i);
                    let z = c.kappa_c[i];
                    row.extend([c.kappa[i], c.torsion[i], z.re, z.im, z.norm()].map(float));
                    row
                })
                .collect()
        }
        CurvatureData::Surface(s) => {
            header.extend(["mean", "gauss"]);
            (0..grid.len())
                .map(|i| {
                    let mut row = param_cells(grid, i);
                    row.extend([s.mean[i], s.gauss[i]].map(float));
                    row
                })
                .collect()
        }
    };
    write_csv(target, &header, &rows)?;
    Ok(vec![target.to_path_buf()])
}

fn potential(embedding: &Embedding, grid: &SampleGrid, target: &Path) -> Result<Vec<PathBuf>, CliError> {
    let frames = build_frames(embedding, grid).stage("frames::build_frames")?;
    let coeffs = connection_coefficients(embedding, &frames).stage("frames::connection_coefficients")?;
    let v = effective_potential(&coeffs);
    let mut header = param_header(grid);
    header.push("v_eff");
    let rows: Vec<Vec<String>> = (0..grid.len())
        .map(|i| {
            let mut row = param_cells(grid, i);
            row.push(float(v[i]));
            row
        })
        .collect();
    write_csv(target, &header, &rows)?;
    Ok(vec![target.to_path_buf()])
}

fn spectrum(
    embedding: &Embedding,
    grid: &SampleGrid,
    config: &RunConfig,
    ctx: &RunContext,
    target: &Path,
) -> Result<Vec<PathBuf>, CliError> {
    let count = config.options.eigencount.unwrap_or(DEFAULT_EIGENCOUNT);
    if count == 0 {
        return Err(CliError::config("options.eigencount", "must be at least 1"));
    }
    let op = submanifold_hamiltonian(embedding, grid).stage("operators::submanifold_hamiltonian")?;
    let mut written = Vec::new();
    if ctx.dump_matrix {
        let path = ctx.out.join("hamiltonian.mtx");
        write_matrix_market(&path, op.matrix())?;
        written.push(path);
    }
    let spectrum = eigen_lowest(&op, count).stage("spectra::eigen_lowest")?;
    let rows: Vec<Vec<String>> = spectrum
        .eigenvalues()
        .iter()
        .zip(spectrum.residuals())
        .enumerate()
        .map(|(i, (e, r))| vec![i.to_string(), float(*e), float(*r)])
        .collect();
    write_csv(target, &["level", "eigenvalue", "residual"], &rows)?;
    written.insert(0, target.to_path_buf());
    Ok(written)
}

fn squeeze(embedding: &Embedding, config: &RunConfig, target: &Path) -> Result<Vec<PathBuf>, CliError> {
    let defaults = TubeResolution::default();
    let along = match config.grid.as_slice() {
        [] => defaults.along,
        [n] => *n,
        _ => return Err(CliError::config("grid", "squeeze takes one node count along the curve")),
    };
    let resolution = TubeResolution {
        along,
        across: config.options.across.unwrap_or(defaults.across),
        levels: config.options.eigencount.unwrap_or(DEFAULT_LEVELS),
    };
    let epsilons = match &config.options.epsilons {
        Some(e) => {
            if let Some(i) = e.iter().position(|x| !(*x > 0.0 && x.is_finite())) {
                return Err(CliError::config(format!("options.epsilons[{i}]"), "must be positive"));
            }
            e.clone()
        }
        None => default_epsilons(embedding, along).stage("squeeze::default_epsilons")?,
    };
    let spectra = epsilons
        .par_iter()
        .map(|&eps| tube_dirichlet_spectrum(embedding, eps, resolution))
        .collect::<Result<Vec<_>, _>>()
        .stage("squeeze::tube_dirichlet_spectrum")?;
    let run = SqueezeRun::new(spectra);
    let limits = squeeze_extrapolate(&run).stage("squeeze::squeeze_extrapolate")?;
    let mut rows = Vec::new();
    for tube in &run.spectra {
        let subtracted = tube.subtracted();
        for (level, limit) in limits.iter().enumerate() {
            rows.push(vec![
                float(tube.epsilon),
                level.to_string(),
                float(tube.eigenvalues[level]),
                float(tube.transverse),
                float(subtracted[level]),
                float(limit.limit),
            ]);
        }
    }
    write_csv(target, &["epsilon", "level", "raw", "transverse", "subtracted", "extrapolated"], &rows)?;
    let summary = target.with_file_name(format!(
        "{}_limits.csv",
        target.file_stem().and_then(|s| s.to_str()).unwrap_or("squeeze")
    ));
    let rows: Vec<Vec<String>> = limits
        .iter()
        .map(|x| {
            vec![
                x.level.to_string(),
                float(x.limit),
                float(x.slope),
                float(x.error_estimate),
                x.refused.to_string(),
            ]
        })
        .collect();
    write_csv(&summary, &["level", "limit", "slope", "error_estimate", "refused"], &rows)?;
    for x in limits.iter().filter(|x| x.refused) {
        eprintln!("warning: level {} is not monotone in epsilon; reporting the narrowest tube", x.level);
    }
    Ok(vec![target.to_path_buf(), summary])
}

fn verify(target: &Path) -> Result<Vec<PathBuf>, CliError> {
    let checks = run_checks();
    let rows: Vec<Vec<String>> = checks
        .iter()
        .map(|c| {
            vec![
                c.module.to_string(),
                c.name.to_string(),
                float(c.value),
                float(c.lower),
                float(c.upper),
                if c.passed { "pass" } else { "FAIL" }.to_string(),
            ]
        })
        .collect();
    write_csv(target, &["module", "check", "value", "lower", "upper", "result"], &rows)?;
    for c in &checks {
        let status = if c.passed { "pass" } else { "FAIL" };
        match &c.failure {
            Some(msg) => println!("{status:4}  {:10} {}: {msg}", c.module, c.name),
            None => println!("{status:4}  {:10} {} = {:.3e}", c.module, c.name, c.value),
        }
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    if failed > 0 {
        return Err(CliError::VerifyFailed {
            failed,
            total: checks.len(),
        });
    }
    Ok(vec![target.to_path_buf()])
}
