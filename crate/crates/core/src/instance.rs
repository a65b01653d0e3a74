//! Problem instances, the three-valued membership test, and the JSON instance file.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::catalog;
use crate::config::NumericConfig;
use crate::error::{InstanceError, OracleError};
use crate::expr::Expression;
use crate::oracle::{FunctionOracle, SharedOracle};
use crate::space::{dot, NormedSpace, Point};

/// Classification of a point against `M = {f <= 0}` with a tolerance band.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    Inside,
    BoundaryBand,
    Outside,
}

/// `inside` iff `f(y) <= -tol_value`, `outside` iff `f(y) >= tol_value`.
pub fn membership(f: &dyn FunctionOracle, y: &[f64], tol_value: f64) -> Result<Membership, OracleError> {
    let v = f.eval(y)?;
    Ok(if v <= -tol_value {
        Membership::Inside
    } else if v >= tol_value {
        Membership::Outside
    } else {
        Membership::BoundaryBand
    })
}

/// Closed-form level-set shapes from which the ray-infimum
/// `inf{t : y + t v in M}` can be computed exactly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExactLambda {
    /// `M = {y : max_i <a_i, y> - b_i <= 0}`
    MaxAffine { normals: Vec<Vec<f64>>, offsets: Vec<f64> },
    /// `M = {y : |y - center|_2 <= radius}`
    Ball { center: Vec<f64>, radius: f64 },
    /// `M = {y : sum_j w_j y_j^2 - y[t_index] <= 0}`
    WeightedParabola { weights: Vec<f64>, t_index: usize },
}

impl ExactLambda {
    /// The smallest `t` with `y + t v` in `M`, if the ray meets `M`.
    pub fn eval(&self, y: &[f64], v: &[f64]) -> Option<f64> {
        match self {
            ExactLambda::MaxAffine { normals, offsets } => {
                let mut lower = f64::NEG_INFINITY;
                let mut upper = f64::INFINITY;
                for (a, b) in normals.iter().zip(offsets) {
                    let level = dot(a, y) - b;
                    let slope = dot(a, v);
                    if slope < 0.0 {
                        lower = lower.max(level / -slope);
                    } else if slope > 0.0 {
                        upper = upper.min(-level / slope);
                    } else if level > 0.0 {
                        return None;
                    }
                }
                (lower <= upper && lower.is_finite()).then_some(lower)
            }
            ExactLambda::Ball { center, radius } => {
                let d: Vec<f64> = y.iter().zip(center).map(|(a, c)| a - c).collect();
                let a = dot(v, v);
                let b = 2.0 * dot(&d, v);
                let c = dot(&d, &d) - radius * radius;
                smaller_root(a, b, c)
            }
            ExactLambda::WeightedParabola { weights, t_index } => {
                let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
                for (j, w) in weights.iter().enumerate() {
                    a += w * v[j] * v[j];
                    b += 2.0 * w * y[j] * v[j];
                    c += w * y[j] * y[j];
                }
                b -= v[*t_index];
                c -= y[*t_index];
                if a == 0.0 {
                    return (b < 0.0).then(|| -c / b);
                }
                smaller_root(a, b, c)
            }
        }
    }
}

fn smaller_root(a: f64, b: f64, c: f64) -> Option<f64> {
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return None;
    }
    // numerically stable form of (-b - sqrt(disc)) / (2a) for a > 0
    let s = disc.sqrt();
    if b >= 0.0 {
        Some((-b - s) / (2.0 * a))
    } else {
        Some(2.0 * c / (-b + s))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubdifferentialRef {
    pub point: Point,
    /// Vertices of the polytope `∂f(point)`.
    pub vertices: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivativeRef {
    pub point: Point,
    pub direction: Vec<f64>,
    /// Exact generalized directional derivative `f⁰(point, direction)`.
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaRef {
    pub point: Point,
    pub shape: ExactLambda,
}

/// Optional analytic data used by oracle tests.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Reference {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub subdifferentials: Vec<SubdifferentialRef>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub derivatives: Vec<DerivativeRef>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub lambda: Vec<LambdaRef>,
}

impl Reference {
    pub fn subdifferential_at(&self, x: &[f64]) -> Option<&SubdifferentialRef> {
        self.subdifferentials.iter().find(|s| s.point.0 == x)
    }

    pub fn lambda_at(&self, x: &[f64]) -> Option<&ExactLambda> {
        self.lambda.iter().find(|l| l.point.0 == x).map(|l| &l.shape)
    }
}

/// A set `M = {f <= 0}` in a normed space, with points claimed to lie on its boundary.
#[derive(Clone)]
pub struct ProblemInstance {
    /// Catalog id, file path or expression descriptor.
    pub id: String,
    pub space: NormedSpace,
    pub f: SharedOracle,
    pub boundary_points: Vec<Point>,
    pub reference: Option<Reference>,
    /// Configuration carried by an instance file, if any.
    pub config: Option<NumericConfig>,
}

impl fmt::Debug for ProblemInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemInstance")
            .field("id", &self.id)
            .field("space", &self.space)
            .field("f", &self.f.descriptor())
            .field("boundary_points", &self.boundary_points)
            .finish()
    }
}

impl ProblemInstance {
    pub fn new(id: impl Into<String>, space: NormedSpace, f: SharedOracle, boundary_points: Vec<Point>) -> Self {
        Self { id: id.into(), space, f, boundary_points, reference: None, config: None }
    }

    pub fn with_reference(mut self, reference: Reference) -> Self {
        self.reference = Some(reference);
        self
    }

    pub fn membership(&self, y: &[f64], cfg: &NumericConfig) -> Result<Membership, OracleError> {
        membership(self.f.as_ref(), y, cfg.tol_value)
    }

    /// Checks dimensions and that every declared boundary point has `|f(x)| <= tol_value`.
    pub fn validate(&self, cfg: &NumericConfig) -> Result<(), InstanceError> {
        for x in &self.boundary_points {
            if x.len() != self.space.dim {
                return Err(InstanceError::Invalid(format!(
                    "boundary point {:?} has dimension {}, space has {}",
                    x.0,
                    x.len(),
                    self.space.dim
                )));
            }
            let v = self.f.eval(x).map_err(|e| InstanceError::Invalid(e.to_string()))?;
            if v.abs() > cfg.tol_value {
                return Err(InstanceError::Invalid(format!(
                    "declared boundary point {:?} has f = {v:e}, outside the tolerance band",
                    x.0
                )));
            }
        }
        Ok(())
    }

    /// The configuration to run with: the file's, if present, else `fallback`.
    pub fn effective_config(&self, fallback: &NumericConfig) -> NumericConfig {
        self.config.clone().unwrap_or_else(|| fallback.clone())
    }

    pub fn from_json_str(json: &str, id: impl Into<String>) -> Result<Self, InstanceError> {
        let file: InstanceFile = serde_json::from_str(json)?;
        file.into_instance(id.into())
    }

    pub fn from_path(path: &Path) -> Result<Self, InstanceError> {
        let json = std::fs::read_to_string(path)?;
        Self::from_json_str(&json, path.display().to_string())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpaceSpec {
    pub dim: usize,
    pub norm: crate::space::NormKind,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionSpec {
    CatalogId(String),
    Expression(String),
}

/// On-disk instance document.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InstanceFile {
    pub space: SpaceSpec,
    pub function: FunctionSpec,
    #[serde(default)]
    pub boundary_points: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<Reference>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<NumericConfig>,
}

impl InstanceFile {
    pub fn into_instance(self, id: String) -> Result<ProblemInstance, InstanceError> {
        if self.space.dim == 0 {
            return Err(InstanceError::Invalid("space.dim must be at least 1".into()));
        }
        let space = NormedSpace::new(self.space.dim, self.space.norm);
        if let Some(cfg) = &self.config {
            cfg.validate()?;
        }
        let (f, id, default_points, default_reference): (SharedOracle, String, Vec<Point>, Option<Reference>) =
            match self.function {
                FunctionSpec::Expression(src) => {
                    let e = Expression::parse(&src, space.dim)?;
                    (Arc::new(e), id, Vec::new(), None)
                }
                FunctionSpec::CatalogId(cid) => {
                    let entry = catalog::load_in(&cid, space)?;
                    (entry.instance.f.clone(), cid, entry.instance.boundary_points, entry.instance.reference)
                }
            };
        let boundary_points = if self.boundary_points.is_empty() {
            default_points
        } else {
            self.boundary_points.into_iter().map(Point).collect()
        };
        Ok(ProblemInstance {
            id,
            space,
            f,
            boundary_points,
            reference: self.reference.or(default_reference),
            config: self.config,
        })
    }
}
