//! Built-in problem instances with analytic reference data.
//!
//! Each entry records where it should certify and where it is degenerate. The
//! `rockafellar_<d>` family truncates the convex set `{(ξ, t) : Σ_j j ξ_j² <= t}`
//! of `l² × R` to `R^{d+1}`. Every truncation is epi-Lipschitzian, but the local
//! Lipschitz constant at the origin grows linearly in `d`, so the certified
//! neighborhood shrinks to nothing as `d → ∞`, while the normal cone at the
//! origin stays `{0} × R⁻` (pointed) for every `d`.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{InstanceError, OracleError};
use crate::instance::{DerivativeRef, ExactLambda, LambdaRef, ProblemInstance, Reference, SubdifferentialRef};
use crate::oracle::{check_dim, finite, FunctionOracle};
use crate::space::{NormKind, NormedSpace, Point};

const UNION_OFFSET: f64 = 1.5;

/// Native closed-form functions behind the catalog.
#[derive(Clone, Debug, PartialEq)]
pub enum CatalogFunction {
    /// `y₁`
    Halfspace { dim: usize },
    /// `|y|₂ - 1`
    UnitBall { dim: usize },
    /// `|y|∞ - 1`
    BoxSup { dim: usize },
    /// `max(y₁, y₂)`
    MaxTwoPlanes { dim: usize },
    /// `min(|y - a|₂, |y + a|₂) - 1` with `a = 1.5 e₁`
    UnionBalls { dim: usize },
    /// `|y|₂²`
    SingletonSq { dim: usize },
    /// `|y₁|`
    AbsWall { dim: usize },
    /// `Σ_{j=1}^d j y_j² - y_{d+1}`
    Rockafellar { d: usize },
}

impl CatalogFunction {
    pub fn dim(&self) -> usize {
        match *self {
            CatalogFunction::Halfspace { dim }
            | CatalogFunction::UnitBall { dim }
            | CatalogFunction::BoxSup { dim }
            | CatalogFunction::MaxTwoPlanes { dim }
            | CatalogFunction::UnionBalls { dim }
            | CatalogFunction::SingletonSq { dim }
            | CatalogFunction::AbsWall { dim } => dim,
            CatalogFunction::Rockafellar { d } => d + 1,
        }
    }

    fn value(&self, y: &[f64]) -> f64 {
        match self {
            CatalogFunction::Halfspace { .. } => y[0],
            CatalogFunction::UnitBall { .. } => l2(y) - 1.0,
            CatalogFunction::BoxSup { .. } => y.iter().fold(0.0f64, |m, c| m.max(c.abs())) - 1.0,
            CatalogFunction::MaxTwoPlanes { .. } => y[0].max(y[1]),
            CatalogFunction::UnionBalls { .. } => {
                let (right, left) = union_distances(y);
                right.min(left) - 1.0
            }
            CatalogFunction::SingletonSq { .. } => y.iter().map(|c| c * c).sum(),
            CatalogFunction::AbsWall { .. } => y[0].abs(),
            CatalogFunction::Rockafellar { d } => {
                (0..*d).map(|j| (j + 1) as f64 * y[j] * y[j]).sum::<f64>() - y[*d]
            }
        }
    }

    fn gradient(&self, y: &[f64]) -> Option<Vec<f64>> {
        let n = y.len();
        let unit = |i: usize, s: f64| {
            let mut g = vec![0.0; n];
            g[i] = s;
            g
        };
        match self {
            CatalogFunction::Halfspace { .. } => Some(unit(0, 1.0)),
            CatalogFunction::UnitBall { .. } => {
                let r = l2(y);
                (r > 0.0).then(|| y.iter().map(|c| c / r).collect())
            }
            CatalogFunction::BoxSup { .. } => {
                let m = y.iter().fold(0.0f64, |m, c| m.max(c.abs()));
                let hits: Vec<usize> = (0..n).filter(|&i| y[i].abs() == m).collect();
                (m > 0.0 && hits.len() == 1).then(|| unit(hits[0], y[hits[0]].signum()))
            }
            CatalogFunction::MaxTwoPlanes { .. } => match y[0].partial_cmp(&y[1])? {
                std::cmp::Ordering::Greater => Some(unit(0, 1.0)),
                std::cmp::Ordering::Less => Some(unit(1, 1.0)),
                std::cmp::Ordering::Equal => None,
            },
            CatalogFunction::UnionBalls { .. } => {
                let (right, left) = union_distances(y);
                let (c, r) = match right.partial_cmp(&left)? {
                    std::cmp::Ordering::Less => (UNION_OFFSET, right),
                    std::cmp::Ordering::Greater => (-UNION_OFFSET, left),
                    std::cmp::Ordering::Equal => return None,
                };
                if r == 0.0 {
                    return None;
                }
                let mut g: Vec<f64> = y.iter().map(|v| v / r).collect();
                g[0] = (y[0] - c) / r;
                Some(g)
            }
            CatalogFunction::SingletonSq { .. } => Some(y.iter().map(|c| 2.0 * c).collect()),
            CatalogFunction::AbsWall { .. } => (y[0] != 0.0).then(|| unit(0, y[0].signum())),
            CatalogFunction::Rockafellar { d } => {
                let mut g: Vec<f64> = (0..*d).map(|j| 2.0 * (j + 1) as f64 * y[j]).collect();
                g.push(-1.0);
                Some(g)
            }
        }
    }

    fn name(&self) -> String {
        match self {
            CatalogFunction::Halfspace { .. } => "halfspace".into(),
            CatalogFunction::UnitBall { .. } => "unit_ball_euclid".into(),
            CatalogFunction::BoxSup { .. } => "box_sup".into(),
            CatalogFunction::MaxTwoPlanes { .. } => "max_two_planes".into(),
            CatalogFunction::UnionBalls { .. } => "union_balls".into(),
            CatalogFunction::SingletonSq { .. } => "singleton_sq".into(),
            CatalogFunction::AbsWall { .. } => "abs_wall".into(),
            CatalogFunction::Rockafellar { d } => format!("rockafellar_{d}"),
        }
    }
}

fn l2(y: &[f64]) -> f64 {
    y.iter().map(|c| c * c).sum::<f64>().sqrt()
}

fn union_distances(y: &[f64]) -> (f64, f64) {
    let rest: f64 = y[1..].iter().map(|c| c * c).sum();
    let right = ((y[0] - UNION_OFFSET).powi(2) + rest).sqrt();
    let left = ((y[0] + UNION_OFFSET).powi(2) + rest).sqrt();
    (right, left)
}

impl FunctionOracle for CatalogFunction {
    fn eval(&self, y: &[f64]) -> Result<f64, OracleError> {
        check_dim(self.dim(), y)?;
        finite(y, self.value(y))
    }

    fn grad(&self, y: &[f64]) -> Option<Vec<f64>> {
        if y.len() != self.dim() {
            return None;
        }
        self.gradient(y)
    }

    fn descriptor(&self) -> String {
        format!("catalog:{}", self.name())
    }
}

/// Expected behavior of a catalog entry.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Expected {
    pub certifiable_at: Vec<Point>,
    pub degenerate_at: Vec<Point>,
    /// Generators of the Clarke normal cone at the first boundary point, when known.
    pub normal_cone_generators: Vec<Vec<f64>>,
}

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub id: String,
    pub instance: ProblemInstance,
    pub expected: Expected,
}

impl CatalogEntry {
    pub fn exact_lambda(&self, x: &[f64]) -> Option<&ExactLambda> {
        self.instance.reference.as_ref()?.lambda_at(x)
    }

    pub fn exact_subdifferential(&self, x: &[f64]) -> Option<&SubdifferentialRef> {
        self.instance.reference.as_ref()?.subdifferential_at(x)
    }
}

/// Fixed catalog ids; the Rockafellar family is addressed as `rockafellar_<d>`.
pub const FIXED_IDS: [&str; 7] =
    ["halfspace", "unit_ball_euclid", "box_sup", "max_two_planes", "union_balls", "singleton_sq", "abs_wall"];

pub fn ids() -> Vec<String> {
    let mut v: Vec<String> = FIXED_IDS.iter().map(|s| s.to_string()).collect();
    v.push("rockafellar_<d>".into());
    v
}

/// Loads an entry in its default space.
pub fn load(id: &str) -> Result<CatalogEntry, InstanceError> {
    if let Some(d) = parse_rockafellar(id)? {
        return Ok(rockafellar_truncation(d));
    }
    let space = match id {
        "box_sup" => NormedSpace::new(2, NormKind::Sup),
        _ if FIXED_IDS.contains(&id) => NormedSpace::euclidean(2),
        _ => return Err(InstanceError::UnknownCatalogId(id.to_string())),
    };
    load_in(id, space)
}

fn parse_rockafellar(id: &str) -> Result<Option<usize>, InstanceError> {
    let Some(rest) = id.strip_prefix("rockafellar_") else {
        return Ok(None);
    };
    match rest.parse::<usize>() {
        Ok(d) if d >= 1 => Ok(Some(d)),
        _ => Err(InstanceError::UnknownCatalogId(id.to_string())),
    }
}

/// Loads an entry in a caller-chosen space (used by instance files).
pub fn load_in(id: &str, space: NormedSpace) -> Result<CatalogEntry, InstanceError> {
    let n = space.dim;
    let e = |i: usize, s: f64| {
        let mut v = vec![0.0; n];
        v[i] = s;
        v
    };
    let origin = vec![0.0; n];
    let need = |min: usize| {
        if n < min {
            Err(InstanceError::Invalid(format!("catalog `{id}` needs dim >= {min}, got {n}")))
        } else {
            Ok(())
        }
    };
    let (func, boundary, certifiable, degenerate, reference, cone) = match id {
        "halfspace" => {
            let r = Reference {
                subdifferentials: vec![sub(&origin, vec![e(0, 1.0)])],
                derivatives: vec![der(&origin, e(0, -1.0), -1.0), der(&origin, e(0, 1.0), 1.0)],
                lambda: vec![lam(&origin, ExactLambda::MaxAffine { normals: vec![e(0, 1.0)], offsets: vec![0.0] })],
            };
            (CatalogFunction::Halfspace { dim: n }, vec![origin.clone()], vec![origin.clone()], vec![], r, vec![e(0, 1.0)])
        }
        "unit_ball_euclid" => {
            let mut pts = vec![e(0, 1.0)];
            if n >= 2 {
                pts.push(e(1, -1.0));
            }
            let ball = ExactLambda::Ball { center: origin.clone(), radius: 1.0 };
            let r = Reference {
                subdifferentials: pts.iter().map(|p| sub(p, vec![p.clone()])).collect(),
                derivatives: vec![der(&e(0, 1.0), e(0, -1.0), -1.0)],
                lambda: pts.iter().map(|p| lam(p, ball.clone())).collect(),
            };
            (CatalogFunction::UnitBall { dim: n }, pts.clone(), pts, vec![], r, vec![e(0, 1.0)])
        }
        "box_sup" => {
            let corner = vec![1.0; n];
            let mut pts = vec![e(0, 1.0)];
            if n >= 2 {
                pts.push(corner.clone());
            }
            let mut normals = Vec::new();
            for i in 0..n {
                normals.push(e(i, 1.0));
                normals.push(e(i, -1.0));
            }
            let shape = ExactLambda::MaxAffine { offsets: vec![1.0; normals.len()], normals };
            let mut subs = vec![sub(&e(0, 1.0), vec![e(0, 1.0)])];
            if n >= 2 {
                subs.push(sub(&corner, (0..n).map(|i| e(i, 1.0)).collect()));
            }
            let r = Reference {
                subdifferentials: subs,
                derivatives: vec![der(&e(0, 1.0), e(0, -1.0), -1.0)],
                lambda: pts.iter().map(|p| lam(p, shape.clone())).collect(),
            };
            (CatalogFunction::BoxSup { dim: n }, pts.clone(), pts, vec![], r, vec![e(0, 1.0)])
        }
        "max_two_planes" => {
            need(2)?;
            let s = std::f64::consts::FRAC_1_SQRT_2;
            let mut diag = vec![0.0; n];
            diag[0] = -s;
            diag[1] = -s;
            let r = Reference {
                subdifferentials: vec![sub(&origin, vec![e(0, 1.0), e(1, 1.0)])],
                derivatives: vec![der(&origin, diag, -s), der(&origin, e(0, 1.0), 1.0)],
                lambda: vec![lam(
                    &origin,
                    ExactLambda::MaxAffine { normals: vec![e(0, 1.0), e(1, 1.0)], offsets: vec![0.0, 0.0] },
                )],
            };
            (
                CatalogFunction::MaxTwoPlanes { dim: n },
                vec![origin.clone()],
                vec![origin.clone()],
                vec![],
                r,
                vec![e(0, 1.0), e(1, 1.0)],
            )
        }
        "union_balls" => {
            let near = e(0, UNION_OFFSET - 1.0);
            let far = e(0, UNION_OFFSET + 1.0);
            let mut pts = vec![near.clone(), far.clone()];
            let right = ExactLambda::Ball { center: e(0, UNION_OFFSET), radius: 1.0 };
            let left = ExactLambda::Ball { center: e(0, -UNION_OFFSET), radius: 1.0 };
            let mut lambdas = vec![lam(&near, right.clone()), lam(&far, right)];
            if n >= 2 {
                let mut top = e(0, -UNION_OFFSET);
                top[1] = 1.0;
                lambdas.push(lam(&top, left));
                pts.push(top);
            }
            let r = Reference {
                subdifferentials: vec![sub(&near, vec![e(0, -1.0)]), sub(&far, vec![e(0, 1.0)])],
                derivatives: vec![der(&near, e(0, 1.0), -1.0), der(&far, e(0, -1.0), -1.0)],
                lambda: lambdas,
            };
            (CatalogFunction::UnionBalls { dim: n }, pts.clone(), pts, vec![], r, vec![e(0, -1.0)])
        }
        "singleton_sq" => {
            let r = Reference {
                subdifferentials: vec![sub(&origin, vec![origin.clone()])],
                derivatives: vec![der(&origin, e(0, 1.0), 0.0), der(&origin, e(0, -1.0), 0.0)],
                lambda: vec![],
            };
            (CatalogFunction::SingletonSq { dim: n }, vec![origin.clone()], vec![], vec![origin.clone()], r, vec![])
        }
        "abs_wall" => {
            let mut ders = vec![der(&origin, e(0, 1.0), 1.0), der(&origin, e(0, -1.0), 1.0)];
            if n >= 2 {
                ders.push(der(&origin, e(1, 1.0), 0.0));
            }
            let r = Reference {
                subdifferentials: vec![sub(&origin, vec![e(0, 1.0), e(0, -1.0)])],
                derivatives: ders,
                lambda: vec![],
            };
            (
                CatalogFunction::AbsWall { dim: n },
                vec![origin.clone()],
                vec![],
                vec![origin.clone()],
                r,
                vec![e(0, 1.0), e(0, -1.0)],
            )
        }
        other => {
            if let Some(d) = parse_rockafellar(other)? {
                if n != d + 1 {
                    return Err(InstanceError::Invalid(format!("`{other}` lives in dimension {}, got {n}", d + 1)));
                }
                return Ok(rockafellar_in(d, space));
            }
            return Err(InstanceError::UnknownCatalogId(other.to_string()));
        }
    };
    let id = func.name();
    let instance = ProblemInstance::new(
        id.clone(),
        space,
        Arc::new(func),
        boundary.into_iter().map(Point).collect(),
    )
    .with_reference(reference);
    Ok(CatalogEntry {
        id,
        instance,
        expected: Expected {
            certifiable_at: certifiable.into_iter().map(Point).collect(),
            degenerate_at: degenerate.into_iter().map(Point).collect(),
            normal_cone_generators: cone,
        },
    })
}

/// The truncation `f(ξ, t) = Σ_{j=1}^d j ξ_j² - t` on Euclidean `R^{d+1}`.
pub fn rockafellar_truncation(d: usize) -> CatalogEntry {
    rockafellar_in(d, NormedSpace::euclidean(d + 1))
}

fn rockafellar_in(d: usize, space: NormedSpace) -> CatalogEntry {
    assert!(d >= 1, "rockafellar truncation needs d >= 1");
    let n = d + 1;
    let origin = vec![0.0; n];
    let mut t_axis = vec![0.0; n];
    t_axis[d] = 1.0;
    let mut grad0 = vec![0.0; n];
    grad0[d] = -1.0;
    let reference = Reference {
        subdifferentials: vec![sub(&origin, vec![grad0.clone()])],
        derivatives: vec![der(&origin, t_axis, -1.0)],
        lambda: vec![lam(
            &origin,
            ExactLambda::WeightedParabola { weights: (1..=d).map(|j| j as f64).collect(), t_index: d },
        )],
    };
    let func = CatalogFunction::Rockafellar { d };
    let id = func.name();
    let instance =
        ProblemInstance::new(id.clone(), space, Arc::new(func), vec![Point(origin.clone())]).with_reference(reference);
    CatalogEntry {
        id,
        instance,
        expected: Expected {
            certifiable_at: vec![Point(origin)],
            degenerate_at: vec![],
            // N_M(0) = {0} × R⁻, generated by the gradient at the origin
            normal_cone_generators: vec![grad0],
        },
    }
}

/// Exact Lipschitz constant of the `d`-th truncation on the open ball `B(0, r)`:
/// the supremum over the ball of the dual norm of `∇f = (2ξ₁, …, 2dξ_d, -1)`.
pub fn rockafellar_lipschitz(d: usize, r: f64, norm: NormKind) -> f64 {
    let d = d as f64;
    match norm {
        // Σ 4j²ξ_j² under Σ ξ_j² < r² peaks on the last axis
        NormKind::Euclidean => ((2.0 * d * r).powi(2) + 1.0).sqrt(),
        // dual l1: Σ 2j|ξ_j| + 1 with every |ξ_j| < r
        NormKind::Sup => r * d * (d + 1.0) + 1.0,
        // dual l∞: max(2d|ξ_d|, 1) with Σ|ξ_j| + |t| < r
        NormKind::One => (2.0 * d * r).max(1.0),
    }
}

/// `min(r/4, α r / (4 k))`.
pub fn epsilon_formula(r: f64, alpha: f64, k: f64) -> f64 {
    (r / 4.0).min(alpha * r / (4.0 * k))
}

fn sub(point: &[f64], vertices: Vec<Vec<f64>>) -> SubdifferentialRef {
    SubdifferentialRef { point: Point(point.to_vec()), vertices }
}

fn der(point: &[f64], direction: Vec<f64>, value: f64) -> DerivativeRef {
    DerivativeRef { point: Point(point.to_vec()), direction, value }
}

fn lam(point: &[f64], shape: ExactLambda) -> LambdaRef {
    LambdaRef { point: Point(point.to_vec()), shape }
}
