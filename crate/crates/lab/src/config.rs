//! Experiment configuration: JSON on disk, validated into core types.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use proxgeo_core::manifold::SurfaceOfRevolution;
use proxgeo_core::sets::Region;
use proxgeo_core::{ConvexSet, Manifold, Point, ScalarField, ToleranceProfile};
use serde::{Deserialize, Serialize};

/// Configuration problems, with a location when one is known.
#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: cannot read config: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{origin}:{line}:{column}: {message} (at `{field}`)")]
    Parse { origin: String, line: usize, column: usize, field: String, message: String },
    #[error("`{field}`: {message}")]
    Invalid { field: String, message: String },
    #[error("unknown scenario `{0}` (see `lab list`)")]
    UnknownScenario(String),
}

impl ConfigError {
    pub fn invalid(field: &str, message: impl Into<String>) -> Self {
        ConfigError::Invalid { field: field.into(), message: message.into() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub scenario: Option<String>,
    #[serde(default)]
    pub manifold: Option<ManifoldConfig>,
    #[serde(default)]
    pub set: Option<SetConfig>,
    /// Partial override of the tolerance profile.
    #[serde(default)]
    pub tolerances: Option<ToleranceProfile>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub samples: SampleCounts,
}

/// Sample sizes; unset entries take the scenario defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleCounts {
    pub cone_pairs: Option<usize>,
    pub tube_points: Option<usize>,
    pub support_samples: Option<usize>,
    pub geodesics: Option<usize>,
    pub boundary_points: Option<usize>,
    pub hessian_points: Option<usize>,
    pub triangles: Option<usize>,
    pub jet_points: Option<usize>,
    pub backbone_cases: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ManifoldConfig {
    Sphere,
    Hyperbolic,
    Paraboloid,
    Euclidean { dim: usize },
    /// `z = Σ c_k s^k` in polar coordinates.
    SurfaceOfRevolution { profile: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum PointConfig {
    Chart { chart: usize, coords: Vec<f64> },
    Embedding { embedding: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionConfig {
    pub center: PointConfig,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldConfig {
    EmbeddingCoordinate { index: usize },
    ChartCoordinate { chart: usize, index: usize },
    /// `½ xᵀQx + bᵀx + c`; `q` row-major.
    ChartQuadratic { chart: usize, q: Vec<f64>, b: Vec<f64>, c: f64 },
    Distance { center: PointConfig },
    SquaredDistance { center: PointConfig },
    Scaled { factor: f64, field: Box<FieldConfig> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SetConfig {
    Ball { center: PointConfig, radius: f64 },
    Segment { from: PointConfig, to: PointConfig },
    Sublevel { field: FieldConfig, level: f64, region: RegionConfig },
}

/// Parses a config, mapping serde failures to line/column diagnostics.
pub fn parse_config(text: &str, origin: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let cfg: ExperimentConfig = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let field = e.path().to_string();
        let inner = e.into_inner();
        ConfigError::Parse {
            origin: origin.into(),
            line: inner.line(),
            column: inner.column(),
            field,
            message: strip_position(&inner.to_string()),
        }
    })?;
    de.end().map_err(|e| ConfigError::Parse {
        origin: origin.into(),
        line: e.line(),
        column: e.column(),
        field: ".".into(),
        message: strip_position(&e.to_string()),
    })?;
    Ok(cfg)
}

fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
    parse_config(&text, &path.display().to_string())
}

impl ManifoldConfig {
    pub fn build(&self, tol: &ToleranceProfile) -> Result<Manifold, ConfigError> {
        let m = match self {
            ManifoldConfig::Sphere => Manifold::sphere(),
            ManifoldConfig::Hyperbolic => Manifold::hyperbolic(),
            ManifoldConfig::Paraboloid => Manifold::paraboloid(),
            ManifoldConfig::Euclidean { dim } => {
                if *dim == 0 || *dim > 8 {
                    return Err(ConfigError::invalid("manifold.dim", "must lie in 1..=8"));
                }
                Manifold::euclidean(*dim)
            }
            ManifoldConfig::SurfaceOfRevolution { profile } => {
                if profile.len() < 2 || profile.iter().any(|c| !c.is_finite()) {
                    return Err(ConfigError::invalid("manifold.profile", "needs at least two finite coefficients"));
                }
                Manifold::new(SurfaceOfRevolution::new(profile.clone()))
            }
        };
        Ok(m.with_tolerances(tol.clone()))
    }
}

impl PointConfig {
    pub fn build(&self, m: &Manifold, field: &str) -> Result<Point, ConfigError> {
        let p = match self {
            PointConfig::Chart { chart, coords } => {
                if coords.len() != m.dim() {
                    return Err(ConfigError::invalid(field, format!("expected {} coordinates", m.dim())));
                }
                Point::new(*chart, coords)
            }
            PointConfig::Embedding { embedding } => m
                .point_from_embedding(embedding)
                .map_err(|e| ConfigError::invalid(field, e.to_string()))?,
        };
        m.check_point(&p).map_err(|e| ConfigError::invalid(field, e.to_string()))?;
        Ok(p)
    }
}

impl FieldConfig {
    pub fn build(&self, m: &Manifold, field: &str) -> Result<ScalarField, ConfigError> {
        Ok(match self {
            FieldConfig::EmbeddingCoordinate { index } => ScalarField::EmbeddingCoordinate(*index),
            FieldConfig::ChartCoordinate { chart, index } => {
                if *index >= m.dim() {
                    return Err(ConfigError::invalid(&format!("{field}.index"), "out of range"));
                }
                ScalarField::ChartCoordinate { chart: *chart, index: *index }
            }
            FieldConfig::ChartQuadratic { chart, q, b, c } => {
                let n = m.dim();
                if q.len() != n * n || b.len() != n {
                    return Err(ConfigError::invalid(field, format!("q needs {} and b {} entries", n * n, n)));
                }
                ScalarField::ChartQuadratic {
                    chart: *chart,
                    q: DMatrix::from_row_slice(n, n, q),
                    b: DVector::from_column_slice(b),
                    c: *c,
                }
            }
            FieldConfig::Distance { center } => ScalarField::Distance(center.build(m, &format!("{field}.center"))?),
            FieldConfig::SquaredDistance { center } => {
                ScalarField::SquaredDistance(center.build(m, &format!("{field}.center"))?)
            }
            FieldConfig::Scaled { factor, field: inner } => {
                inner.build(m, &format!("{field}.field"))?.scaled(*factor)
            }
        })
    }
}

impl SetConfig {
    pub fn build(&self, m: &Manifold) -> Result<Arc<ConvexSet>, ConfigError> {
        let err = |e: proxgeo_core::GeoError| ConfigError::invalid("set", e.to_string());
        let set = match self {
            SetConfig::Ball { center, radius } => {
                if !(*radius > 0.0) {
                    return Err(ConfigError::invalid("set.radius", "must be positive"));
                }
                ConvexSet::ball(m, center.build(m, "set.center")?, *radius).map_err(err)?
            }
            SetConfig::Segment { from, to } => {
                ConvexSet::segment(m, from.build(m, "set.from")?, to.build(m, "set.to")?).map_err(err)?
            }
            SetConfig::Sublevel { field, level, region } => {
                if !(region.radius > 0.0) {
                    return Err(ConfigError::invalid("set.region.radius", "must be positive"));
                }
                let region = Region { center: region.center.build(m, "set.region.center")?, radius: region.radius };
                ConvexSet::sublevel(m, field.build(m, "set.field")?, *level, region).map_err(err)?
            }
        };
        Ok(Arc::new(set))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_errors_carry_line_column_and_field() {
        let text = "{\n  \"seed\": 3,\n  \"manifold\": {\"kind\": \"torus\"}\n}";
        match parse_config(text, "cfg.json") {
            Err(ConfigError::Parse { line, field, .. }) => {
                assert_eq!(line, 3);
                assert_eq!(field, "manifold.kind");
            }
            other => panic!("{other:?}"),
        }
        let text = "{\"samples\": {\"geodesics\": -1}}";
        match parse_config(text, "cfg.json") {
            Err(ConfigError::Parse { field, column, .. }) => {
                assert_eq!(field, "samples.geodesics");
                assert!(column > 0);
            }
            other => panic!("{other:?}"),
        }
        assert!(parse_config("{\"sed\": 1}", "x").is_err());
    }

    #[test]
    fn builds_core_objects() {
        let text = r#"{
            "manifold": {"kind": "sphere"},
            "set": {"kind": "ball", "center": {"embedding": [0, 0, 1]}, "radius": 1.0},
            "tolerances": {"jet_tol": 1e-8}
        }"#;
        let cfg = parse_config(text, "x").unwrap();
        let tol = cfg.tolerances.clone().unwrap();
        assert_eq!(tol.jet_tol, 1e-8);
        assert_eq!(tol.ode_tol, ToleranceProfile::default().ode_tol);
        let m = cfg.manifold.unwrap().build(&tol).unwrap();
        let s = cfg.set.unwrap().build(&m).unwrap();
        assert!(s.contains(&m, &m.point_from_embedding(&[0.0, 0.1, 1.0]).unwrap()).unwrap());

        let bad = SetConfig::Ball { center: PointConfig::Chart { chart: 0, coords: vec![0.0] }, radius: 1.0 };
        assert!(matches!(bad.build(&m), Err(ConfigError::Invalid { .. })));
    }
}
