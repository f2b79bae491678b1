//! JSON run configuration.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use tubeq_core::geometry::{catalog_shape, Boundary, Embedding, SampleGrid, SHAPE_NAMES};
use tubeq_core::Error;

use crate::error::CliError;
use crate::samples::load_curve;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Curvature,
    Potential,
    Spectrum,
    Squeeze,
    Verify,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Curvature => "curvature",
            Task::Potential => "potential",
            Task::Spectrum => "spectrum",
            Task::Squeeze => "squeeze",
            Task::Verify => "verify",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryKind {
    Periodic,
    Dirichlet,
}

/// Either a catalog shape or a CSV of samples.
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeConfig {
    pub name: Option<String>,
    #[serde(default)]
    pub params: Vec<f64>,
    pub file: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    /// Number of eigenvalues (spectrum) or levels per tube (squeeze).
    pub eigencount: Option<usize>,
    /// Tube half-widths for squeeze.
    pub epsilons: Option<Vec<f64>>,
    /// Transverse nodes per direction for squeeze.
    pub across: Option<usize>,
    /// Output file name inside the output directory.
    pub output: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub shape: Option<ShapeConfig>,
    #[serde(default)]
    pub grid: Vec<usize>,
    pub boundary: Option<BoundaryKind>,
    pub task: Option<Task>,
    #[serde(default)]
    pub options: Options,
}

impl RunConfig {
    /// Parses JSON, reporting the offending field path.
    pub fn from_json(text: &str) -> Result<RunConfig, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            CliError::config(if path == "." { "<root>".to_string() } else { path }, e.into_inner())
        })
    }

    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::config("<file>", format!("{}: {e}", path.display())))?;
        RunConfig::from_json(&text)
    }

    /// Builds the embedding; relative sample files resolve against `base`.
    pub fn embedding(&self, base: &Path) -> Result<Embedding, CliError> {
        let shape = self.shape.as_ref().ok_or_else(|| CliError::config("shape", "missing"))?;
        match (&shape.name, &shape.file) {
            (Some(_), Some(_)) => Err(CliError::config("shape", "give either `name` or `file`, not both")),
            (None, None) => Err(CliError::config("shape", "needs `name` or `file`")),
            (None, Some(file)) => {
                if !shape.params.is_empty() {
                    return Err(CliError::config("shape.params", "not used with `file`"));
                }
                load_curve(&base.join(file))
            }
            (Some(name), None) => catalog_shape(name, &shape.params).map_err(|e| match e {
                Error::UnknownShape(_) => {
                    CliError::config("shape.name", format!("unknown shape `{name}`, expected one of {}", SHAPE_NAMES.join(", ")))
                }
                Error::InvalidParameter { index, reason } => CliError::config(format!("shape.params[{index}]"), reason),
                other => CliError::config("shape.params", other),
            }),
        }
    }

    /// Sample grid on the embedding's domain.
    pub fn sample_grid(&self, embedding: &Embedding) -> Result<SampleGrid, CliError> {
        let k = embedding.intrinsic_dim();
        if self.grid.len() != k {
            return Err(CliError::config("grid", format!("expected {k} node count(s), got {}", self.grid.len())));
        }
        let boundary = match self.boundary {
            Some(BoundaryKind::Periodic) => Boundary::Periodic,
            Some(BoundaryKind::Dirichlet) => Boundary::Dirichlet,
            None if embedding.domain().iter().any(|d| d.periodic) => Boundary::Periodic,
            None => Boundary::Dirichlet,
        };
        SampleGrid::on_domain(embedding.domain(), &self.grid, boundary).map_err(|e| {
            let path = if self.boundary.is_some() && e.to_string().contains("periodic") { "boundary" } else { "grid" };
            CliError::config(path, e)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_fields_name_their_path() {
        let err = RunConfig::from_json(r#"{"shape": {"name": "circle", "radius": 1}}"#).unwrap_err();
        match err {
            CliError::Config { path, .. } => assert_eq!(path, "shape.radius"),
            other => panic!("{other}"),
        }
        let err = RunConfig::from_json(r#"{"options": {"eigencount": -1}}"#).unwrap_err();
        assert!(matches!(err, CliError::Config { ref path, .. } if path == "options.eigencount"));
    }

    #[test]
    fn bad_parameter_is_indexed() {
        let cfg = RunConfig::from_json(r#"{"shape": {"name": "helix", "params": [3, -4]}, "grid": [64]}"#).unwrap();
        let err = cfg.embedding(Path::new(".")).unwrap_err();
        assert!(matches!(err, CliError::Config { ref path, .. } if path == "shape.params[1]"), "{err}");
    }

    #[test]
    fn grid_must_match_dimension() {
        let cfg = RunConfig::from_json(r#"{"shape": {"name": "sphere", "params": [1]}, "grid": [64]}"#).unwrap();
        let e = cfg.embedding(Path::new(".")).unwrap();
        assert!(matches!(cfg.sample_grid(&e), Err(CliError::Config { ref path, .. }) if path == "grid"));
    }
}
