//! Signed distance `Δ(y) = d_M(y) − d_{E∖M}(y)` estimated from membership alone.
//!
//! Each query marches a fixed set of rays from `y` until the membership class
//! changes, bisects the crossing, and then refines the best ray by a pattern
//! search over nearby directions. The direction set is drawn once at
//! construction so `Δ` is a deterministic function of `y`.

use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};

use crate::clarke::{is_nondegenerate, ClarkeError, NondegeneracyResult};
use crate::config::NumericConfig;
use crate::error::OracleError;
use crate::instance::{membership, Membership, ProblemInstance};
use crate::oracle::{check_dim, FunctionOracle};
use crate::space::axpy;

pub const DEFAULT_SEARCH_RADIUS: f64 = 4.0;
pub const DEFAULT_RESOLUTION: usize = 256;
const RANDOM_RAYS: usize = 16;
const BISECT_TOL: f64 = 1e-11;
const REFINE_START: f64 = 0.1;
const REFINE_STOP: f64 = 1e-7;
const REFINE_MARCH: usize = 8;
const REFINE_MAX_STEPS: usize = 400;

pub struct SignedDistanceOracle {
    pub base: ProblemInstance,
    pub search_radius: f64,
    /// March steps per ray.
    pub resolution: usize,
    tol_value: f64,
    directions: Vec<Vec<f64>>,
    exhausted: AtomicUsize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignedDistance {
    pub value: f64,
    /// Upper bound on the overestimate of `|value|`.
    pub probe_resolution: f64,
    /// No class change within `search_radius`; `value` is `±search_radius`.
    pub exhausted: bool,
}

impl SignedDistanceOracle {
    pub fn new(base: ProblemInstance, cfg: &NumericConfig) -> Self {
        Self::with_params(base, cfg, DEFAULT_SEARCH_RADIUS, DEFAULT_RESOLUTION)
    }

    pub fn with_params(base: ProblemInstance, cfg: &NumericConfig, search_radius: f64, resolution: usize) -> Self {
        let space = base.space;
        let mut directions = Vec::with_capacity(2 * space.dim + RANDOM_RAYS);
        for i in 0..space.dim {
            let e = space.basis(i);
            directions.push(e.iter().map(|c| -c).collect());
            directions.push(e);
        }
        let mut rng = cfg.rng("signed_distance_rays", 0);
        for _ in 0..RANDOM_RAYS {
            directions.push(space.random_unit(&mut rng));
        }
        Self {
            base,
            search_radius,
            resolution: resolution.max(1),
            tol_value: cfg.tol_value,
            directions,
            exhausted: AtomicUsize::new(0),
        }
    }

    pub fn probe_resolution(&self) -> f64 {
        1e-10 + 2.0 * self.tol_value
    }

    /// Number of queries so far that hit the search-radius limit.
    pub fn exhausted_queries(&self) -> usize {
        self.exhausted.load(Ordering::Relaxed)
    }

    fn class(&self, y: &[f64]) -> Result<Membership, OracleError> {
        membership(self.base.f.as_ref(), y, self.tol_value)
    }

    pub fn signed_distance(&self, y: &[f64]) -> Result<SignedDistance, OracleError> {
        check_dim(self.base.space.dim, y)?;
        let start = self.class(y)?;
        let sign = match start {
            Membership::BoundaryBand => {
                return Ok(SignedDistance { value: 0.0, probe_resolution: self.probe_resolution(), exhausted: false })
            }
            Membership::Outside => 1.0,
            Membership::Inside => -1.0,
        };
        let hit = |p: &[f64]| -> Result<bool, OracleError> { Ok(self.class(p)? != start) };

        let space = &self.base.space;
        let mut rays: Vec<Vec<f64>> = Vec::with_capacity(self.directions.len() + 2);
        if let Some(g) = self.base.f.grad(y) {
            if let Some(u) = space.steepest_unit(&g) {
                rays.push(u.iter().map(|c| -sign * c).collect());
            }
        }
        rays.extend(self.directions.iter().cloned());

        let mut best: Option<(f64, Vec<f64>)> = None;
        for u in &rays {
            let limit = best.as_ref().map_or(self.search_radius, |b| b.0);
            if let Some(t) = self.probe_ray(y, u, limit, self.resolution, &hit)? {
                if best.as_ref().is_none_or(|b| t < b.0) {
                    best = Some((t, u.clone()));
                }
            }
        }
        let Some((mut t_best, mut u_best)) = best else {
            self.exhausted.fetch_add(1, Ordering::Relaxed);
            return Ok(SignedDistance {
                value: sign * self.search_radius,
                probe_resolution: self.probe_resolution(),
                exhausted: true,
            });
        };

        let mut sigma = REFINE_START;
        let mut steps = 0;
        while sigma >= REFINE_STOP && steps < REFINE_MAX_STEPS {
            steps += 1;
            let mut improved = false;
            'axes: for i in 0..space.dim {
                for s in [sigma, -sigma] {
                    let mut trial = u_best.clone();
                    trial[i] += s;
                    let Some(cand) = space.normalize(&trial) else { continue };
                    if let Some(t) = self.probe_ray(y, &cand, t_best, REFINE_MARCH, &hit)? {
                        if t < t_best {
                            t_best = t;
                            u_best = cand;
                            improved = true;
                            break 'axes;
                        }
                    }
                }
            }
            if !improved {
                sigma *= 0.5;
            }
        }
        Ok(SignedDistance { value: sign * t_best, probe_resolution: self.probe_resolution(), exhausted: false })
    }

    /// First crossing along `y + t u`, `t ∈ (0, limit]`, found by marching
    /// `steps` equal steps and bisecting the bracketing step. Returns the
    /// hit-side end of the final bracket.
    fn probe_ray(
        &self,
        y: &[f64],
        u: &[f64],
        limit: f64,
        steps: usize,
        hit: &dyn Fn(&[f64]) -> Result<bool, OracleError>,
    ) -> Result<Option<f64>, OracleError> {
        let h = limit / steps as f64;
        let mut lo = 0.0;
        let mut hi = None;
        for j in 1..=steps {
            let t = if j == steps { limit } else { h * j as f64 };
            if hit(&axpy(y, t, u))? {
                hi = Some(t);
                break;
            }
            lo = t;
        }
        let Some(mut hi) = hi else { return Ok(None) };
        while hi - lo > BISECT_TOL {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if hit(&axpy(y, mid, u))? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(Some(hi))
    }
}

impl FunctionOracle for SignedDistanceOracle {
    fn eval(&self, y: &[f64]) -> Result<f64, OracleError> {
        Ok(self.signed_distance(y)?.value)
    }

    fn lipschitz_hint(&self) -> Option<f64> {
        Some(1.0)
    }

    fn noise_floor(&self) -> f64 {
        self.probe_resolution()
    }

    fn descriptor(&self) -> String {
        format!("signed_distance({})", self.base.f.descriptor())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Theorem2Check {
    pub nondegenerate: bool,
    pub probe_resolution: f64,
    pub exhausted_queries: usize,
    pub result: NondegeneracyResult,
}

/// Runs the nondegeneracy test on the signed distance of `inst` at `x`.
pub fn check_theorem2(inst: &ProblemInstance, x: &[f64], cfg: &NumericConfig) -> Result<Theorem2Check, ClarkeError> {
    let fx = inst.f.eval(x)?;
    if fx.abs() >= cfg.tol_value {
        return Err(ClarkeError::NotOnBoundary(fx));
    }
    let sd = SignedDistanceOracle::new(inst.clone(), cfg);
    let result = is_nondegenerate(&sd, &inst.space, x, cfg)?;
    Ok(Theorem2Check {
        nondegenerate: result.is_nondegenerate(),
        probe_resolution: sd.probe_resolution(),
        exhausted_queries: sd.exhausted_queries(),
        result,
    })
}
