//! Local epigraph representation of `M = {f <= 0}` around a nondegenerate
//! boundary point.
//!
//! Given a descent direction `v` with `f⁰(x, v) < -α`, a radius `r` on which the
//! difference quotients along `v` stay below `-α`, and a Lipschitz constant `k`
//! of `f` on `B(x, r)`, the set near `x` is the epigraph of
//! `λ(y) = inf{t : y + t v ∈ M}` over the hyperplane `ker φ`, where `φ` is a
//! norming functional of `v`.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::epsilon_formula;
use crate::clarke::{is_nondegenerate, local_lipschitz_constant, ClarkeError, NoWitnessReason};
use crate::config::{derive_seed, NumericConfig};
use crate::error::{ConfigError, OracleError};
use crate::instance::ProblemInstance;
use crate::oracle::FunctionOracle;
use crate::space::{axpy, dot, open_unit, sample_ball, Direction, NormKind, NormedSpace, Point};
use crate::verify::{run_suite, LemmaId, SuiteOptions, VerificationReport};

/// Starting radius of the geometric radius grid.
pub const R0: f64 = 1.0;
/// Cylinder points whose `λ` values are stored on a certificate.
const STORED_LAMBDA_SAMPLES: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EpirepError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("point {0:?} is outside the cylinder around the certified point")]
    NotInCylinder(Vec<f64>),
    #[error("bisection bracket violated at {point:?}: f(lower) = {f_lower:e}, f(upper) = {f_upper:e}")]
    BracketViolation { point: Vec<f64>, f_lower: f64, f_upper: f64 },
    #[error("radius fell below {floor:e} without satisfying the descent bound")]
    RadiusUnderflow { floor: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DescentWitness {
    pub x: Point,
    pub v: Direction,
    pub alpha: f64,
    pub r: f64,
    pub k: f64,
    pub epsilon: f64,
}

impl DescentWitness {
    pub fn new(x: Point, v: Direction, alpha: f64, r: f64, k: f64) -> Self {
        let epsilon = epsilon_formula(r, alpha, k);
        Self { x, v, alpha, r, k, epsilon }
    }

    pub fn lipschitz_bound(&self) -> f64 {
        1.0 + 2.0 * self.k / self.alpha
    }
}

/// A linear functional `y ↦ <weights, y>` with `φ(v) = 1` and dual norm one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormingFunctional {
    pub weights: Vec<f64>,
    pub dual_norm: f64,
}

impl NormingFunctional {
    pub fn apply(&self, y: &[f64]) -> f64 {
        dot(&self.weights, y)
    }
}

/// Norming functional of a unit `v`. Ties between maximizing coordinates go to
/// the lowest index.
pub fn norming_functional(space: &NormedSpace, v: &Direction) -> NormingFunctional {
    let c = v.coords();
    let weights: Vec<f64> = match space.norm_kind {
        NormKind::Euclidean => c.to_vec(),
        NormKind::Sup => {
            let j = (0..c.len()).fold(0, |best, i| if c[i].abs() > c[best].abs() { i } else { best });
            let mut w = vec![0.0; c.len()];
            w[j] = c[j].signum();
            w
        }
        NormKind::One => c.iter().map(|&a| if a > 0.0 { 1.0 } else if a < 0.0 { -1.0 } else { 0.0 }).collect(),
    };
    let dual_norm = space.dual_norm(&weights);
    NormingFunctional { weights, dual_norm }
}

/// Largest `r = R0 · shrink_factorʲ` for which no sampled `y ∈ B(x, 2r)`,
/// `t ∈ (-2r, 2r) \ {0}` has `(f(y + t v) - f(y)) / t >= -α`.
pub fn find_descent_radius(
    f: &dyn FunctionOracle,
    space: &NormedSpace,
    x: &[f64],
    v: &Direction,
    alpha: f64,
    cfg: &NumericConfig,
) -> Result<f64, EpirepError> {
    let floor = 1e-8 * R0;
    let n = (cfg.sample_budget / 2).max(16);
    let mut r = R0;
    let mut level = 0u64;
    while r >= floor {
        let ys = sample_ball(space, x, 2.0 * r, n, derive_seed(cfg.rng_seed, "descent_radius", level));
        let mut rng = cfg.rng("descent_radius_t", level);
        let mut ok = true;
        for (i, y) in ys.iter().enumerate() {
            let magnitude = if i % 2 == 0 { 2.0 * r * (0.9 + 0.1 * open_unit(&mut rng)) } else { 2.0 * r * open_unit(&mut rng) };
            let t = if rng.random_bool(0.5) { magnitude } else { -magnitude };
            let q = (f.eval(&axpy(y, t, v))? - f.eval(y)?) / t;
            if !(q < -alpha) {
                ok = false;
                break;
            }
        }
        if ok {
            return Ok(r);
        }
        r *= cfg.shrink_factor;
        level += 1;
    }
    Err(EpirepError::RadiusUnderflow { floor })
}

/// The coordinate maps of a certificate: `φ`, `π(y) = y − φ(y) v`,
/// `A(y) = (π(y), φ(y))` with inverse `A⁻¹(ξ, t) = ξ + t v`, and `λ` on the
/// cylinder `{y : ‖π(y) − π(x)‖ < ε}`.
#[derive(Clone, Copy)]
pub struct Chart<'a> {
    pub f: &'a dyn FunctionOracle,
    pub space: &'a NormedSpace,
    pub witness: &'a DescentWitness,
    pub phi: &'a NormingFunctional,
    pub tol_bisect: f64,
}

impl<'a> Chart<'a> {
    pub fn project(&self, y: &[f64]) -> Vec<f64> {
        axpy(y, -self.phi.apply(y), &self.witness.v)
    }

    pub fn a_map(&self, y: &[f64]) -> (Vec<f64>, f64) {
        (self.project(y), self.phi.apply(y))
    }

    pub fn a_inverse(&self, xi: &[f64], t: f64) -> Vec<f64> {
        axpy(xi, t, &self.witness.v)
    }

    pub fn cylinder_offset(&self, y: &[f64]) -> f64 {
        self.space.distance(&self.project(y), &self.project(&self.witness.x))
    }

    pub fn in_cylinder(&self, y: &[f64]) -> bool {
        self.cylinder_offset(y) < self.witness.epsilon
    }

    /// `λ(y)` on the cylinder and on `B(x, ε)`. Cylinder points are shifted
    /// along `v` onto the slice `φ = φ(x)`; other points of `B(x, ε)` (possible
    /// for non-Euclidean norms) are used as they are. The sign change of `f` is
    /// then bisected on `[-r/4, r/4]` and the shift undone.
    pub fn lambda(&self, y: &[f64]) -> Result<f64, EpirepError> {
        let w = self.witness;
        let shift = if self.in_cylinder(y) {
            self.phi.apply(&w.x) - self.phi.apply(y)
        } else if self.space.distance(y, &w.x) < w.epsilon {
            0.0
        } else {
            return Err(EpirepError::NotInCylinder(y.to_vec()));
        };
        let base = axpy(y, shift, &w.v);
        let quarter = w.r / 4.0;
        let f_lower = self.f.eval(&axpy(&base, -quarter, &w.v))?;
        let f_upper = self.f.eval(&axpy(&base, quarter, &w.v))?;
        if !(f_lower > 0.0 && f_upper < 0.0) {
            return Err(EpirepError::BracketViolation { point: y.to_vec(), f_lower, f_upper });
        }
        let (mut lo, mut hi) = (-quarter, quarter);
        while hi - lo > self.tol_bisect {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.f.eval(&axpy(&base, mid, &w.v))? <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(0.5 * (lo + hi) + shift)
    }

    /// `n` cylinder points `b + s v` with `b ∈ B(x, ε/2)` and `s ∈ (-r/2, r/2)`.
    pub fn sample_cylinder(&self, n: usize, seed: u64) -> Vec<Point> {
        let w = self.witness;
        let bases = sample_ball(self.space, &w.x, 0.5 * w.epsilon, n, seed);
        let mut rng = rand_chacha_from(seed);
        bases
            .into_iter()
            .map(|b| {
                let s = w.r * (rng.random::<f64>() - 0.5);
                Point(axpy(&b, s, &w.v))
            })
            .collect()
    }
}

fn rand_chacha_from(seed: u64) -> rand_chacha::ChaCha8Rng {
    <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(derive_seed(seed, "cylinder_shift", 0))
}

/// `λ(y)` for the certificate data `(w, φ)`.
pub fn lambda_eval(
    f: &dyn FunctionOracle,
    space: &NormedSpace,
    w: &DescentWitness,
    phi: &NormingFunctional,
    y: &[f64],
    cfg: &NumericConfig,
) -> Result<f64, EpirepError> {
    Chart { f, space, witness: w, phi, tol_bisect: cfg.tol_bisect }.lambda(y)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Confidence {
    SamplingProbabilistic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaSample {
    pub point: Point,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpigraphCertificate {
    pub instance: String,
    pub norm: NormKind,
    #[serde(flatten)]
    pub witness: DescentWitness,
    pub phi_weights: Vec<f64>,
    pub phi_dual_norm: f64,
    pub lipschitz_bound: f64,
    pub measured_lipschitz: f64,
    pub lambda_samples: Vec<LambdaSample>,
    pub lemma_report: VerificationReport,
    pub confidence: Confidence,
    /// Seed the certificate was built with; verification must use another.
    pub seed: u64,
}

impl EpigraphCertificate {
    pub fn phi(&self) -> NormingFunctional {
        NormingFunctional { weights: self.phi_weights.clone(), dual_norm: self.phi_dual_norm }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate fields are finite")
    }

    pub fn from_json(json: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(json)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CertifyFailure {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("point is not in the boundary band: f(x) = {0:e}")]
    NotOnBoundary(f64),
    #[error("degenerate point: gradient hull minimum norm {min_norm_value:e} ({reason:?})")]
    DegeneratePoint { min_norm_value: f64, reason: NoWitnessReason },
    #[error("radius fell below {floor:e} without satisfying the descent bound")]
    RadiusUnderflow { floor: f64 },
    #[error("bisection bracket violated at {point:?} while sampling λ")]
    BracketViolation { point: Vec<f64>, f_lower: f64, f_upper: f64 },
    #[error("lemma check {lemma} failed with margin {margin:e}")]
    LemmaCheckFailure { lemma: LemmaId, margin: f64, certificate: Box<EpigraphCertificate> },
}

impl CertifyFailure {
    pub fn stage(&self) -> &'static str {
        match self {
            CertifyFailure::Config(_) => "config",
            CertifyFailure::Oracle(_) => "oracle",
            CertifyFailure::NotOnBoundary(_) => "boundary",
            CertifyFailure::DegeneratePoint { .. } => "degenerate-point",
            CertifyFailure::RadiusUnderflow { .. } => "radius-underflow",
            CertifyFailure::BracketViolation { .. } => "bracket-violation",
            CertifyFailure::LemmaCheckFailure { .. } => "lemma-check-failure",
        }
    }
}

impl From<ClarkeError> for CertifyFailure {
    fn from(e: ClarkeError) -> Self {
        match e {
            ClarkeError::Oracle(o) => CertifyFailure::Oracle(o),
            ClarkeError::NotOnBoundary(v) => CertifyFailure::NotOnBoundary(v),
            other => CertifyFailure::Oracle(OracleError::Evaluation(other.to_string())),
        }
    }
}

impl From<EpirepError> for CertifyFailure {
    fn from(e: EpirepError) -> Self {
        match e {
            EpirepError::Oracle(o) => CertifyFailure::Oracle(o),
            EpirepError::RadiusUnderflow { floor } => CertifyFailure::RadiusUnderflow { floor },
            EpirepError::BracketViolation { point, f_lower, f_upper } => {
                CertifyFailure::BracketViolation { point, f_lower, f_upper }
            }
            EpirepError::NotInCylinder(p) => {
                CertifyFailure::Oracle(OracleError::Evaluation(format!("cylinder sample {p:?} out of range")))
            }
        }
    }
}

/// Seed for the verification run embedded in a certificate.
pub fn embedded_suite_seed(seed: u64) -> u64 {
    let s = derive_seed(seed, "certify_suite", 0);
    if s == seed {
        s.wrapping_add(1)
    } else {
        s
    }
}

/// Full pipeline at `x`: nondegeneracy witness, descent radius, Lipschitz
/// constant, `ε`, norming functional, `λ` samples and the lemma suite.
pub fn certify(inst: &ProblemInstance, x: &[f64], cfg: &NumericConfig) -> Result<EpigraphCertificate, CertifyFailure> {
    cfg.validate()?;
    let f = inst.f.as_ref();
    let space = &inst.space;
    if x.len() != space.dim {
        return Err(OracleError::Dimension { expected: space.dim, got: x.len() }.into());
    }
    let nd = is_nondegenerate(f, space, x, cfg)?;
    let Some(cand) = nd.witness else {
        return Err(CertifyFailure::DegeneratePoint {
            min_norm_value: nd.hull.min_norm_value,
            reason: nd.reason.unwrap_or(NoWitnessReason::Degenerate),
        });
    };
    let r = find_descent_radius(f, space, x, &cand.v, cand.alpha, cfg)?;
    let k = local_lipschitz_constant(f, space, x, r, cfg)?.k;
    let witness = DescentWitness::new(Point(x.to_vec()), cand.v, cand.alpha, r, k);
    let phi = norming_functional(space, &witness.v);

    let chart = Chart { f, space, witness: &witness, phi: &phi, tol_bisect: cfg.tol_bisect };
    let mut lambda_samples = Vec::with_capacity(STORED_LAMBDA_SAMPLES);
    for p in chart.sample_cylinder(STORED_LAMBDA_SAMPLES, derive_seed(cfg.rng_seed, "lambda_samples", 0)) {
        let value = chart.lambda(&p)?;
        lambda_samples.push(LambdaSample { point: p, value });
    }

    let mut cert = EpigraphCertificate {
        instance: inst.id.clone(),
        norm: space.norm_kind,
        lipschitz_bound: witness.lipschitz_bound(),
        measured_lipschitz: 0.0,
        witness,
        phi_weights: phi.weights,
        phi_dual_norm: phi.dual_norm,
        lambda_samples,
        lemma_report: VerificationReport::default(),
        confidence: Confidence::SamplingProbabilistic,
        seed: cfg.rng_seed,
    };
    let suite_cfg = cfg.clone().with_seed(embedded_suite_seed(cfg.rng_seed));
    let report = run_suite(inst, &cert, &suite_cfg, &SuiteOptions::default())
        .expect("embedded suite seed differs from the certificate seed");
    cert.measured_lipschitz = report.measured_lipschitz;
    let first_failure = report.first_failure();
    cert.lemma_report = report;
    if let Some((lemma, margin)) = first_failure {
        return Err(CertifyFailure::LemmaCheckFailure { lemma, margin, certificate: Box::new(cert) });
    }
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::oracle::FnOracle;
    use proptest::prelude::*;

    fn cfg() -> NumericConfig {
        NumericConfig::default()
    }

    fn e1_neg(space: &NormedSpace) -> Direction {
        let mut c = vec![0.0; space.dim];
        c[0] = -1.0;
        Direction::unit(space, &c).unwrap()
    }

    #[test]
    fn epsilon_invariants() {
        let w = DescentWitness::new(Point(vec![0.0]), Direction::assume_unit(vec![1.0]), 0.5, 1.0, 1.25);
        assert_eq!(w.epsilon, (1.0f64 / 4.0).min(0.5 / (4.0 * 1.25)));
        assert!(w.epsilon <= w.r / 4.0);
        let tiny_k = DescentWitness::new(Point(vec![0.0]), Direction::assume_unit(vec![1.0]), 0.5, 1.0, 0.1);
        assert_eq!(tiny_k.epsilon, 0.25);
    }

    #[test]
    fn descent_radius_examples() {
        let sp = NormedSpace::euclidean(2);
        let v = e1_neg(&sp);
        let cases: Vec<FnOracle> = vec![
            FnOracle::new("y1", |y| y[0]),
            FnOracle::new("max(y1,2y1)", |y| y[0].max(2.0 * y[0])),
            FnOracle::new("y1+y2^2", |y| y[0] + y[1] * y[1]),
        ];
        for f in &cases {
            assert_eq!(find_descent_radius(f, &sp, &[0.0, 0.0], &v, 0.5, &cfg()).unwrap(), R0);
        }
    }

    #[test]
    fn descent_radius_shrinks_for_curved_sets() {
        let e = catalog::load("unit_ball_euclid").unwrap();
        let sp = e.instance.space;
        let r = find_descent_radius(e.instance.f.as_ref(), &sp, &[1.0, 0.0], &e1_neg(&sp), 0.5, &cfg()).unwrap();
        assert!(r < R0 && r > 1e-3, "{r}");
    }

    #[test]
    fn descent_radius_underflow() {
        let sp = NormedSpace::euclidean(1);
        let f = FnOracle::new("|y|", |y| y[0].abs());
        let v = Direction::unit(&sp, &[1.0]).unwrap();
        assert!(matches!(
            find_descent_radius(&f, &sp, &[0.0], &v, 0.5, &cfg()),
            Err(EpirepError::RadiusUnderflow { .. })
        ));
    }

    #[test]
    fn norming_functional_examples() {
        let sp = NormedSpace::euclidean(2);
        let n = norming_functional(&sp, &Direction::unit(&sp, &[1.0, 0.0]).unwrap());
        assert_eq!(n.weights, vec![1.0, 0.0]);
        assert_eq!(n.dual_norm, 1.0);
        let n = norming_functional(&sp, &Direction::assume_unit(vec![0.6, 0.8]));
        assert_eq!(n.weights, vec![0.6, 0.8]);
        let sup = NormedSpace::new(2, NormKind::Sup);
        let v = Direction::unit(&sup, &[1.0, 0.2]).unwrap();
        let n = norming_functional(&sup, &v);
        assert_eq!(n.weights, vec![1.0, 0.0]);
        assert_eq!(n.apply(v.coords()), 1.0);
        assert_eq!(n.dual_norm, 1.0);
    }

    #[test]
    fn norming_functional_ties_take_lowest_index() {
        let sup = NormedSpace::new(3, NormKind::Sup);
        let n = norming_functional(&sup, &Direction::unit(&sup, &[-1.0, 1.0, 0.3]).unwrap());
        assert_eq!(n.weights, vec![-1.0, 0.0, 0.0]);
    }

    proptest! {
        #[test]
        fn norming_functional_norms_v(
            coords in prop::collection::vec(-2.0f64..2.0, 1..6),
            kind in prop::sample::select(vec![NormKind::Euclidean, NormKind::Sup, NormKind::One]),
        ) {
            let sp = NormedSpace::new(coords.len(), kind);
            prop_assume!(sp.norm(&coords) > 1e-6);
            let v = Direction::unit(&sp, &coords).unwrap();
            let n = norming_functional(&sp, &v);
            prop_assert!((n.apply(v.coords()) - 1.0).abs() <= 1e-12);
            prop_assert!((n.dual_norm - 1.0).abs() <= 1e-10);
        }
    }

    fn linear_chart_data() -> (FnOracle, NormedSpace, DescentWitness, NormingFunctional) {
        let sp = NormedSpace::euclidean(2);
        let f = FnOracle::new("y1", |y| y[0]);
        // r = 8 makes ε = 1, wide enough for the cylinder point (0.1, 0.9)
        let w = DescentWitness::new(Point(vec![0.0, 0.0]), e1_neg(&sp), 0.5, 8.0, 1.0);
        let phi = norming_functional(&sp, &w.v);
        (f, sp, w, phi)
    }

    #[test]
    fn lambda_linear_example() {
        let (f, sp, w, phi) = linear_chart_data();
        let l = lambda_eval(&f, &sp, &w, &phi, &[0.1, 0.9], &cfg()).unwrap();
        assert!((l - 0.1).abs() <= 1e-10);
    }

    #[test]
    fn lambda_rejects_points_off_the_cylinder() {
        let (f, sp, w, phi) = linear_chart_data();
        assert!(matches!(lambda_eval(&f, &sp, &w, &phi, &[0.0, 1.5], &cfg()), Err(EpirepError::NotInCylinder(_))));
    }

    #[test]
    fn lambda_bracket_violation_is_reported() {
        let (_, sp, mut w, phi) = linear_chart_data();
        let f = FnOracle::new("y1+y2", |y| y[0] + y[1]);
        w.r = 1e-3;
        assert!(matches!(
            lambda_eval(&f, &sp, &w, &phi, &[0.1, 0.1], &cfg()),
            Err(EpirepError::BracketViolation { .. })
        ));
    }

    #[test]
    fn lambda_translation_identity() {
        let (f, sp, w, phi) = linear_chart_data();
        let c = cfg();
        for y in [[0.03, 0.0], [-0.05, 0.02], [0.2, -0.01]] {
            let shifted = axpy(&y, 0.01, &w.v);
            let a = lambda_eval(&f, &sp, &w, &phi, &shifted, &c).unwrap();
            let b = lambda_eval(&f, &sp, &w, &phi, &y, &c).unwrap();
            assert!((a - (b - 0.01)).abs() <= 2.0 * c.tol_bisect);
        }
    }

    #[test]
    fn lambda_unit_ball_closed_form() {
        let e = catalog::load("unit_ball_euclid").unwrap();
        let sp = e.instance.space;
        let c = cfg();
        let cert = certify(&e.instance, &[1.0, 0.0], &c).unwrap();
        let phi = cert.phi();
        let chart = Chart { f: e.instance.f.as_ref(), space: &sp, witness: &cert.witness, phi: &phi, tol_bisect: c.tol_bisect };
        for p in chart.sample_cylinder(50, 3) {
            // the first crossing of y + t(-e1) with the circle is y1 - sqrt(1 - y2²)
            let want = p[0] - (1.0 - p[1] * p[1]).sqrt();
            assert!((chart.lambda(&p).unwrap() - want).abs() <= 1e-6);
        }
    }

    #[test]
    fn a_map_round_trip() {
        let (f, sp, w, phi) = linear_chart_data();
        let chart = Chart { f: &f, space: &sp, witness: &w, phi: &phi, tol_bisect: 1e-10 };
        for y in [[0.3, -1.2], [5.0, 2.0]] {
            let (xi, t) = chart.a_map(&y);
            assert!(phi.apply(&xi).abs() < 1e-15);
            let back = chart.a_inverse(&xi, t);
            assert!(sp.distance(&back, &y) <= 1e-12);
        }
    }

    #[test]
    fn certify_halfspace() {
        let e = catalog::load("halfspace").unwrap();
        let cert = certify(&e.instance, &[0.0, 0.0], &cfg()).unwrap();
        assert!(cert.witness.k >= 1.0 && cert.witness.k <= 1.25);
        assert!((cert.lipschitz_bound - (1.0 + 2.0 * cert.witness.k / cert.witness.alpha)).abs() < 1e-12);
        assert!((cert.measured_lipschitz - 1.0).abs() < 0.01);
        assert!(cert.lemma_report.overall);
        for s in &cert.lambda_samples {
            assert!((s.value - s.point[0]).abs() <= 1e-8);
        }
    }

    #[test]
    fn certify_singleton_is_degenerate() {
        let e = catalog::load("singleton_sq").unwrap();
        assert!(matches!(certify(&e.instance, &[0.0, 0.0], &cfg()), Err(CertifyFailure::DegeneratePoint { .. })));
    }

    #[test]
    fn certify_rockafellar_8() {
        let e = catalog::rockafellar_truncation(8);
        let x = vec![0.0; 9];
        let cert = certify(&e.instance, &x, &cfg()).unwrap();
        let w = &cert.witness;
        let exact_k = catalog::rockafellar_lipschitz(8, w.r, NormKind::Euclidean);
        assert!(w.k >= 0.95 * exact_k && w.k <= 1.25 * exact_k, "{} vs {exact_k}", w.k);
        assert_eq!(w.epsilon, w.alpha * w.r / (4.0 * w.k));
    }

    #[test]
    fn certificate_json_round_trip() {
        let e = catalog::load("halfspace").unwrap();
        let cert = certify(&e.instance, &[0.0, 0.0], &cfg()).unwrap();
        let json = cert.to_json();
        let value: serde_json::Value = serde_json::from_str(&json).unwrap();
        for key in ["x", "v", "alpha", "r", "k", "epsilon", "phi_weights", "lipschitz_bound", "measured_lipschitz", "lemma_report", "confidence"] {
            assert!(value.get(key).is_some(), "missing {key}");
        }
        assert_eq!(value["confidence"], "sampling_probabilistic");
        assert_eq!(EpigraphCertificate::from_json(&json).unwrap(), cert);
    }
}
