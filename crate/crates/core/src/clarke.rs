//! Sampled estimators for the generalized directional derivative `f⁰(x, v)`,
//! the generalized gradient `∂f(x)`, descent-direction search and local
//! Lipschitz constants.
//!
//! Every estimator is a maximum over finitely many samples and therefore a lower
//! bound on the quantity it targets. Results built on them are labeled
//! sampling-probabilistic downstream.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{derive_seed, NumericConfig};
use crate::error::OracleError;
use crate::minnorm::min_norm_point;
use crate::oracle::{central_difference_gradient, FunctionOracle};
use crate::space::{axpy, open_unit, sample_ball, Direction, NormedSpace, Point};

/// Quotient samples per refinement level.
const LEVEL_SAMPLES: usize = 128;
/// Neighborhood scale of the first refinement level.
const INITIAL_SCALE: f64 = 1e-2;
/// Smallest neighborhood scale for exact oracles; noisy oracles stop at
/// `NOISE_SCALE_RATIO * noise_floor`.
const SCALE_FLOOR: f64 = 1e-8;
const NOISE_SCALE_RATIO: f64 = 1e3;
/// Gradients sampled for the hull surrogate.
const HULL_SAMPLES: usize = 64;
/// Hull minimum norms at or below this are treated as "0 ∈ ∂f".
pub const HULL_ZERO_TOL: f64 = 1e-3;
/// Random unit directions tried after the hull and coordinate candidates.
const RANDOM_DIRECTIONS: usize = 16;
pub const LIPSCHITZ_SAFETY: f64 = 1.25;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClarkeError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("direction must have unit norm")]
    NotUnit,
    #[error("point is not in the boundary band: f(x) = {0:e}")]
    NotOnBoundary(f64),
    #[error("radius must be positive, got {0}")]
    BadRadius(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionalDerivativeEstimate {
    /// Maximum quotient over the last refinement level.
    pub value: f64,
    /// Largest quotient seen at any level.
    pub upper_bound_confidence: f64,
    pub samples_used: usize,
    pub delta_final: f64,
    /// Two consecutive levels agreed; `false` means the budget or the scale
    /// floor ran out first and the estimate is low-confidence.
    pub stabilized: bool,
}

/// Estimate of `f⁰(x, v)` for a unit direction `v`.
pub fn directional_derivative(
    f: &dyn FunctionOracle,
    space: &NormedSpace,
    x: &[f64],
    v: &Direction,
    cfg: &NumericConfig,
) -> Result<DirectionalDerivativeEstimate, ClarkeError> {
    if !v.unit_norm() {
        return Err(ClarkeError::NotUnit);
    }
    derivative_along(f, space, x, v, cfg)
}

/// Estimate of `f⁰(x, v)` for an arbitrary `v`; positively homogeneous in `v`
/// because the quotient samples are drawn for the unit direction and rescaled.
pub fn derivative_along(
    f: &dyn FunctionOracle,
    space: &NormedSpace,
    x: &[f64],
    v: &[f64],
    cfg: &NumericConfig,
) -> Result<DirectionalDerivativeEstimate, ClarkeError> {
    let scale = space.norm(v);
    let Some(u) = space.normalize(v) else {
        return Ok(DirectionalDerivativeEstimate {
            value: 0.0,
            upper_bound_confidence: 0.0,
            samples_used: 0,
            delta_final: 0.0,
            stabilized: true,
        });
    };
    let noise = f.noise_floor();
    let floor = SCALE_FLOOR.max(NOISE_SCALE_RATIO * noise);
    let delta0 = INITIAL_SCALE.max(10.0 * floor);
    let per_level = LEVEL_SAMPLES.min(cfg.sample_budget);
    let max_levels = (cfg.sample_budget / per_level).max(2);

    let mut prev: Option<f64> = None;
    let mut overall = f64::NEG_INFINITY;
    let mut used = 0;
    let mut delta = delta0;
    let mut last = f64::NEG_INFINITY;
    let mut stabilized = false;
    for level in 0..max_levels {
        if level > 0 && delta < floor {
            break;
        }
        let ys = sample_ball(space, x, delta, per_level, derive_seed(cfg.rng_seed, "dirderiv", level as u64));
        let mut rng = cfg.rng("dirderiv_t", level as u64);
        let mut level_max = f64::NEG_INFINITY;
        for (i, y) in ys.iter().enumerate() {
            let t = if i == 0 { delta } else { delta * (0.5 + 0.5 * open_unit(&mut rng)) };
            let fy = f.eval(y)?;
            let moved = axpy(y, t, &u);
            let q = (f.eval(&moved)? - fy) / t * scale;
            level_max = level_max.max(q);
        }
        used += ys.len();
        overall = overall.max(level_max);
        last = level_max;
        let band = cfg.tol_value.max(4.0 * noise / delta * scale);
        if let Some(p) = prev {
            if (level_max - p).abs() <= band {
                stabilized = true;
                break;
            }
        }
        prev = Some(level_max);
        delta *= cfg.shrink_factor;
    }
    Ok(DirectionalDerivativeEstimate {
        value: last,
        upper_bound_confidence: overall,
        samples_used: used,
        delta_final: if stabilized { delta } else { delta / cfg.shrink_factor },
        stabilized,
    })
}

/// Sampled surrogate of `∂f(x)`: the convex hull of gradients at nearby points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradientHull {
    pub generators: Vec<Vec<f64>>,
    /// Convex weights expressing `min_norm_point` over `generators`.
    pub weights: Vec<f64>,
    pub min_norm_point: Vec<f64>,
    /// Euclidean norm of `min_norm_point`.
    pub min_norm_value: f64,
}

impl GradientHull {
    pub fn from_generators(mut generators: Vec<Vec<f64>>) -> Self {
        assert!(!generators.is_empty(), "a gradient hull needs at least one generator");
        dedup_exact(&mut generators);
        let mnp = min_norm_point(&generators, 1e-10, 10_000);
        let min_norm_value = mnp.point.iter().map(|c| c * c).sum::<f64>().sqrt();
        Self { generators, weights: mnp.weights, min_norm_point: mnp.point, min_norm_value }
    }

    /// Whether the hull contains a point within `tol` (Euclidean) of `p`.
    pub fn approximately_contains(&self, p: &[f64], tol: f64) -> bool {
        let shifted: Vec<Vec<f64>> =
            self.generators.iter().map(|g| g.iter().zip(p).map(|(a, b)| a - b).collect()).collect();
        let mnp = min_norm_point(&shifted, 1e-12, 10_000);
        mnp.point.iter().map(|c| c * c).sum::<f64>().sqrt() <= tol
    }
}

fn dedup_exact(v: &mut Vec<Vec<f64>>) {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(v.len());
    for g in v.drain(..) {
        if !out.iter().any(|o| *o == g) {
            out.push(g);
        }
    }
    *v = out;
}

/// Gradient at `y` from the oracle, or by central differences where the oracle has none.
fn gradient_or_fd(f: &dyn FunctionOracle, y: &[f64], h: f64) -> Result<Vec<f64>, OracleError> {
    match f.grad(y) {
        Some(g) => Ok(g),
        None => central_difference_gradient(f, y, h),
    }
}

fn fd_step(f: &dyn FunctionOracle, x: &[f64]) -> f64 {
    let size = x.iter().fold(1.0f64, |m, c| m.max(c.abs()));
    (1e-8 * size).max(NOISE_SCALE_RATIO * f.noise_floor())
}

pub fn gradient_hull(
    f: &dyn FunctionOracle,
    space: &NormedSpace,
    x: &[f64],
    cfg: &NumericConfig,
) -> Result<GradientHull, ClarkeError> {
    let h = fd_step(f, x);
    let size = x.iter().fold(1.0f64, |m, c| m.max(c.abs()));
    let radius = (1e-6 * size).max(10.0 * h);
    let pts = sample_ball(space, x, radius, HULL_SAMPLES, derive_seed(cfg.rng_seed, "hull", 0));
    let mut gens = Vec::with_capacity(pts.len());
    for p in &pts {
        gens.push(gradient_or_fd(f, p, h)?);
    }
    Ok(GradientHull::from_generators(gens))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DescentWitnessCandidate {
    pub v: Direction,
    pub alpha: f64,
    pub estimate: DirectionalDerivativeEstimate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoWitnessReason {
    /// The hull test also finds `0 ∈ ∂f(x)`.
    Degenerate,
    /// The hull stays away from 0 but no sampled direction had `f⁰ < 0`.
    BudgetExhausted,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NondegeneracyResult {
    pub witness: Option<DescentWitnessCandidate>,
    pub hull: GradientHull,
    /// Witness presence agrees with `min_norm_value > HULL_ZERO_TOL`.
    pub consistent: bool,
    pub reason: Option<NoWitnessReason>,
    pub directions_tried: usize,
}

impl NondegeneracyResult {
    pub fn is_nondegenerate(&self) -> bool {
        self.witness.is_some()
    }
}

/// Searches for a unit `v` with `f⁰(x, v) < 0` and cross-checks against the
/// gradient hull. Candidate order: the negated hull minimum-norm point, then
/// `±e_i`, then random unit directions.
pub fn is_nondegenerate(
    f: &dyn FunctionOracle,
    space: &NormedSpace,
    x: &[f64],
    cfg: &NumericConfig,
) -> Result<NondegeneracyResult, ClarkeError> {
    let fx = f.eval(x)?;
    if fx.abs() >= cfg.tol_value {
        return Err(ClarkeError::NotOnBoundary(fx));
    }
    let hull = gradient_hull(f, space, x, cfg)?;

    let mut candidates: Vec<Vec<f64>> = Vec::new();
    if hull.min_norm_value > 1e-12 {
        candidates.push(hull.min_norm_point.iter().map(|c| -c).collect());
    }
    for i in 0..space.dim {
        let e = space.basis(i);
        candidates.push(e.iter().map(|c| -c).collect());
        candidates.push(e);
    }
    let mut rng = cfg.rng("descent_search", 0);
    for _ in 0..RANDOM_DIRECTIONS {
        candidates.push(space.random_unit(&mut rng));
    }

    let mut witness = None;
    let mut tried = 0;
    for c in candidates {
        let Some(v) = Direction::unit(space, &c) else { continue };
        tried += 1;
        let est = directional_derivative(f, space, x, &v, cfg)?;
        if est.value < 0.0 {
            witness = Some(DescentWitnessCandidate { alpha: -est.value / 2.0, v, estimate: est });
            break;
        }
    }
    let hull_clear = hull.min_norm_value > HULL_ZERO_TOL;
    let reason = match (&witness, hull_clear) {
        (Some(_), _) => None,
        (None, false) => Some(NoWitnessReason::Degenerate),
        (None, true) => Some(NoWitnessReason::BudgetExhausted),
    };
    Ok(NondegeneracyResult { consistent: witness.is_some() == hull_clear, witness, hull, reason, directions_tried: tried })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LipschitzEstimate {
    /// The constant to use downstream.
    pub k: f64,
    /// Largest sampled difference quotient.
    pub sampled: f64,
    /// The oracle's hint was below the sampled quotient.
    pub hint_inconsistent: bool,
    pub pairs: usize,
}

/// Local Lipschitz constant of `f` on `B(center, radius)` from sampled pairs,
/// inflated by [`LIPSCHITZ_SAFETY`].
///
/// Pairs come from three sources: random pairs of ball samples; short pairs
/// along the steepest direction at each sample and at the axis points
/// `center ± 0.999 radius e_i`; and a random-search climb of that steepest
/// slope starting from the best point found.
pub fn local_lipschitz_constant(
    f: &dyn FunctionOracle,
    space: &NormedSpace,
    center: &[f64],
    radius: f64,
    cfg: &NumericConfig,
) -> Result<LipschitzEstimate, ClarkeError> {
    if !(radius > 0.0) {
        return Err(ClarkeError::BadRadius(radius));
    }
    let n = (cfg.sample_budget / 8).clamp(16, 512);
    let mut pts = sample_ball(space, center, radius, n, derive_seed(cfg.rng_seed, "lipschitz", 0));
    for i in 0..space.dim {
        let e = space.basis(i);
        pts.push(Point(axpy(center, 0.999 * radius, &e)));
        pts.push(Point(axpy(center, -0.999 * radius, &e)));
    }
    let values: Vec<f64> = pts.iter().map(|p| f.eval(p)).collect::<Result<_, _>>()?;

    let mut best = 0.0f64;
    let mut pairs = 0;
    let mut rng = cfg.rng("lipschitz_pairs", 0);
    for _ in 0..cfg.sample_budget / 2 {
        let i = rng.random_range(0..pts.len());
        let j = rng.random_range(0..pts.len());
        let d = space.distance(&pts[i], &pts[j]);
        if d > 0.0 {
            best = best.max((values[i] - values[j]).abs() / d);
            pairs += 1;
        }
    }

    let h = 1e-4 * radius;
    let fd = fd_step(f, center);
    let slope_at = |p: &[f64]| -> Result<Option<f64>, OracleError> {
        let g = gradient_or_fd(f, p, fd)?;
        let Some(u) = space.steepest_unit(&g) else { return Ok(None) };
        let mut q = axpy(p, h, &u);
        if space.distance(&q, center) >= radius {
            q = axpy(p, -h, &u);
            if space.distance(&q, center) >= radius {
                return Ok(None);
            }
        }
        let d = space.distance(&q, p);
        Ok((d > 0.0).then_some((f.eval(&q)? - f.eval(p)?).abs() / d))
    };
    let mut climb_start = pts[0].0.clone();
    let mut climb_best = 0.0f64;
    for p in &pts {
        if let Some(s) = slope_at(p)? {
            pairs += 1;
            if s > climb_best {
                climb_best = s;
                climb_start = p.0.clone();
            }
        }
    }

    let mut sigma = 0.1 * radius;
    let mut p = climb_start;
    let mut steps = 0;
    while sigma > 1e-6 * radius && steps < 200 {
        steps += 1;
        let dir = space.random_unit(&mut rng);
        let mut cand = axpy(&p, sigma, &dir);
        let dist = space.distance(&cand, center);
        if dist >= 0.999 * radius {
            let off: Vec<f64> = cand.iter().zip(center).map(|(a, c)| (a - c) * 0.999 * radius / dist).collect();
            cand = axpy(center, 1.0, &off);
        }
        match slope_at(&cand)? {
            Some(s) if s > climb_best => {
                climb_best = s;
                p = cand;
            }
            _ => sigma *= 0.7,
        }
        pairs += 1;
    }
    best = best.max(climb_best);

    let inflated = LIPSCHITZ_SAFETY * best;
    let (k, hint_inconsistent) = match f.lipschitz_hint() {
        Some(hint) if hint >= best => (hint.min(inflated), false),
        Some(_) => (inflated, true),
        None => (inflated, false),
    };
    Ok(LipschitzEstimate { k, sampled: best, hint_inconsistent, pairs })
}
