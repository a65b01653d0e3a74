//! Randomized checks of the properties an epigraph certificate claims, plus the
//! pointedness diagnostic.
//!
//! Each check records a margin: the signed distance to the asserted bound,
//! positive when there is slack. Failures are data; the only refusal is a
//! verification seed equal to the certificate's own seed.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::epsilon_formula;
use crate::clarke::{gradient_hull, GradientHull};
use crate::config::{derive_seed, NumericConfig};
use crate::epirep::{Chart, EpigraphCertificate, EpirepError};
use crate::instance::ProblemInstance;
use crate::signed_distance::check_theorem2;
use crate::space::{axpy, sample_ball};

const L1_SAMPLES: usize = 200;
const L2_SAMPLES: usize = 200;
const L3_SAMPLES: usize = 200;
const L4_PAIRS: usize = 500;
const L5_SAMPLES: usize = 1000;
const L6_SAMPLES: usize = 1000;
const A_SAMPLES: usize = 100;
const L4_SLACK: f64 = 1.01;
const A_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LemmaId {
    L1,
    L2,
    L3,
    L4,
    L5,
    L6,
    T2,
    #[serde(rename = "pointedness")]
    Pointedness,
}

impl LemmaId {
    pub const GATING: [LemmaId; 6] = [LemmaId::L1, LemmaId::L2, LemmaId::L3, LemmaId::L4, LemmaId::L5, LemmaId::L6];

    pub fn gates(self) -> bool {
        Self::GATING.contains(&self)
    }
}

impl fmt::Display for LemmaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            LemmaId::L1 => "L1",
            LemmaId::L2 => "L2",
            LemmaId::L3 => "L3",
            LemmaId::L4 => "L4",
            LemmaId::L5 => "L5",
            LemmaId::L6 => "L6",
            LemmaId::T2 => "T2",
            LemmaId::Pointedness => "pointedness",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaResult {
    pub pass: bool,
    pub margin: f64,
    pub samples: usize,
    pub tolerance: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    #[serde(flatten)]
    pub per_lemma: BTreeMap<LemmaId, LemmaResult>,
    pub overall: bool,
    pub seed: u64,
    /// Largest sampled difference quotient of `λ` (the L4 statistic).
    pub measured_lipschitz: f64,
}

impl VerificationReport {
    /// First failing gating lemma, in `L1..L6` order.
    pub fn first_failure(&self) -> Option<(LemmaId, f64)> {
        LemmaId::GATING
            .iter()
            .find_map(|id| self.per_lemma.get(id).filter(|r| !r.pass).map(|r| (*id, r.margin)))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report fields are finite")
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<12} {:<5} {:>14} {:>8} {:>12}", "check", "pass", "margin", "samples", "tolerance")?;
        for (id, r) in &self.per_lemma {
            let tag = if id.gates() { "" } else { " (info)" };
            writeln!(
                f,
                "{:<12} {:<5} {:>14.6e} {:>8} {:>12.3e}",
                format!("{id}{tag}"),
                if r.pass { "yes" } else { "NO" },
                r.margin,
                r.samples,
                r.tolerance
            )?;
        }
        writeln!(f, "measured_lipschitz {:.6}", self.measured_lipschitz)?;
        write!(f, "overall {}", if self.overall { "PASS" } else { "FAIL" })
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VerifyError {
    #[error("verification seed {0} equals the certificate seed; choose a fresh seed")]
    SeedReuse(u64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SuiteOptions {
    /// Run the signed-distance nondegeneracy check (informational).
    pub theorem2: bool,
    /// Compute the pointedness diagnostic (informational).
    pub pointedness: bool,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self { theorem2: false, pointedness: true }
    }
}

/// Running minimum of margins with a pass flag.
struct Tally {
    margin: f64,
    pass: bool,
    samples: usize,
}

impl Tally {
    fn new() -> Self {
        Self { margin: f64::INFINITY, pass: true, samples: 0 }
    }

    fn check(&mut self, margin: f64, ok: bool) {
        self.samples += 1;
        self.margin = self.margin.min(margin);
        self.pass &= ok;
    }

    /// A side condition: affects the margin only when it fails.
    fn require(&mut self, ok: bool, err: f64) {
        if !ok {
            self.margin = self.margin.min(-err.abs().max(f64::MIN_POSITIVE));
            self.pass = false;
        }
    }

    /// A λ evaluation that failed: the bracket slack (or zero) becomes the margin.
    fn error(&mut self, e: &EpirepError) {
        let m = match e {
            EpirepError::BracketViolation { f_lower, f_upper, .. } => f_lower.min(-f_upper).min(0.0),
            _ => 0.0,
        };
        self.check(if m.is_finite() { m } else { f64::MIN }, false);
    }

    fn finish(self, tolerance: f64) -> LemmaResult {
        let margin = if self.margin.is_finite() { self.margin } else if self.margin > 0.0 { f64::MAX } else { f64::MIN };
        LemmaResult { pass: self.pass && self.samples > 0, margin, samples: self.samples, tolerance }
    }
}

/// Checks the certificate's claims on `inst` with seeds derived from `cfg.rng_seed`.
pub fn run_suite(
    inst: &ProblemInstance,
    cert: &EpigraphCertificate,
    cfg: &NumericConfig,
    opts: &SuiteOptions,
) -> Result<VerificationReport, VerifyError> {
    if cfg.rng_seed == cert.seed {
        return Err(VerifyError::SeedReuse(cfg.rng_seed));
    }
    let seed = cfg.rng_seed;
    let phi = cert.phi();
    let w = &cert.witness;
    let space = &inst.space;
    let f = inst.f.as_ref();
    let chart = Chart { f, space, witness: w, phi: &phi, tol_bisect: cfg.tol_bisect };
    let tb = cfg.tol_bisect;
    let mut per = BTreeMap::new();

    // L1: parameter identities, then |λ| <= r/4 on B(x, ε)
    let mut t = Tally::new();
    let eps_exact = epsilon_formula(w.r, w.alpha, w.k);
    t.require(w.epsilon == eps_exact && w.epsilon <= w.r / 4.0, w.epsilon - eps_exact);
    let bound = 1.0 + 2.0 * w.k / w.alpha;
    let bound_err = (cert.lipschitz_bound - bound).abs();
    t.require(bound_err <= 1e-12 * bound, bound_err);
    let phi_v = (phi.apply(&w.v) - 1.0).abs();
    let dual = (space.dual_norm(&phi.weights) - 1.0).abs();
    t.require(phi_v <= 1e-12 && dual <= 1e-10, phi_v.max(dual));
    for y in sample_ball(space, &w.x, w.epsilon, L1_SAMPLES, derive_seed(seed, "L1", 0)) {
        match chart.lambda(&y) {
            Ok(l) => {
                let m = w.r / 4.0 + tb - l.abs();
                t.check(m, m >= 0.0);
            }
            Err(e) => t.error(&e),
        }
    }
    per.insert(LemmaId::L1, t.finish(tb));

    // L2: λ(y + s v) = λ(y) − s
    let mut t = Tally::new();
    let mut rng = cfg.rng("L2_shift", 0);
    for y in chart.sample_cylinder(L2_SAMPLES, derive_seed(seed, "L2", 0)) {
        let s = w.r * (rng.random::<f64>() - 0.5);
        match (chart.lambda(&y), chart.lambda(&axpy(&y, s, &w.v))) {
            (Ok(a), Ok(b)) => {
                let m = 2.0 * tb - (b - (a - s)).abs();
                t.check(m, m >= 0.0);
            }
            (Err(e), _) | (_, Err(e)) => t.error(&e),
        }
    }
    per.insert(LemmaId::L2, t.finish(2.0 * tb));

    // L3: y + λ(y) v lies on the boundary inside B(x, r/2)
    let mut t = Tally::new();
    let level_tol = w.k * tb;
    for y in chart.sample_cylinder(L3_SAMPLES, derive_seed(seed, "L3", 0)) {
        match chart.lambda(&y) {
            Ok(l) => {
                let z = axpy(&y, l, &w.v);
                let fz = match f.eval(&z) {
                    Ok(v) => v,
                    Err(_) => {
                        t.check(0.0, false);
                        continue;
                    }
                };
                let m_ball = w.r / 2.0 + tb - space.distance(&z, &w.x);
                let m_level = level_tol - fz.abs();
                t.check(m_ball.min(m_level), m_ball > 0.0 && m_level >= 0.0);
            }
            Err(e) => t.error(&e),
        }
    }
    per.insert(LemmaId::L3, t.finish(level_tol));

    // L4: Lipschitz quotient of λ on the cylinder, far and near pairs
    let mut t = Tally::new();
    let cap = L4_SLACK * cert.lipschitz_bound;
    let mut measured = 0.0f64;
    let far = chart.sample_cylinder(L4_PAIRS, derive_seed(seed, "L4_far", 0));
    let near_base = sample_ball(space, &w.x, 0.4 * w.epsilon, L4_PAIRS / 2, derive_seed(seed, "L4_near", 0));
    let mut rng = cfg.rng("L4_near_offset", 0);
    let mut pairs: Vec<(Vec<f64>, Vec<f64>)> = Vec::with_capacity(L4_PAIRS);
    for i in 0..L4_PAIRS / 2 {
        pairs.push((far[2 * i].0.clone(), far[2 * i + 1].0.clone()));
    }
    for b in near_base {
        let s = w.r * (rng.random::<f64>() - 0.5);
        let y = axpy(&b, s, &w.v);
        let u = space.random_unit(&mut rng);
        let z = axpy(&y, 0.05 * w.epsilon, &u);
        pairs.push((y, z));
    }
    for (y, z) in &pairs {
        let d = space.distance(y, z);
        if d == 0.0 {
            continue;
        }
        match (chart.lambda(y), chart.lambda(z)) {
            (Ok(a), Ok(b)) => {
                let q = (a - b).abs() / d;
                measured = measured.max(q);
                t.check(cap - q, q <= cap);
            }
            (Err(e), _) | (_, Err(e)) => t.error(&e),
        }
    }
    per.insert(LemmaId::L4, t.finish(cap));

    // L5: inside ⇔ λ(y) <= 0 on B(x, ε) away from the boundary band
    let mut t = Tally::new();
    for y in sample_ball(space, &w.x, w.epsilon, L5_SAMPLES, derive_seed(seed, "L5", 0)) {
        let Ok(fy) = f.eval(&y) else {
            t.check(0.0, false);
            continue;
        };
        if fy.abs() <= cfg.tol_value {
            continue;
        }
        match chart.lambda(&y) {
            Ok(l) => {
                let agree = (fy <= 0.0) == (l <= 0.0);
                t.check(if agree { l.abs() } else { -l.abs() }, agree);
            }
            Err(e) => t.error(&e),
        }
    }
    per.insert(LemmaId::L5, t.finish(cfg.tol_value));

    // L6: inside ⇔ A(y) ∈ epi λ on B(x, ε/2), plus A⁻¹ ∘ A = id
    let mut t = Tally::new();
    for y in sample_ball(space, &w.x, 0.5 * w.epsilon, L6_SAMPLES, derive_seed(seed, "L6", 0)) {
        let Ok(fy) = f.eval(&y) else {
            t.check(0.0, false);
            continue;
        };
        if fy.abs() <= cfg.tol_value {
            continue;
        }
        let (xi, height) = chart.a_map(&y);
        match chart.lambda(&xi) {
            Ok(l) => {
                let in_epi = l <= height;
                let agree = (fy <= 0.0) == in_epi;
                let gap = (height - l).abs();
                t.check(if agree { gap } else { -gap }, agree);
            }
            Err(e) => t.error(&e),
        }
    }
    let mut rng = cfg.rng("L6_inverse", 0);
    for _ in 0..A_SAMPLES {
        let y: Vec<f64> = w.x.iter().map(|c| c + w.r * (2.0 * rng.random::<f64>() - 1.0)).collect();
        let (xi, height) = chart.a_map(&y);
        let err = space.distance(&chart.a_inverse(&xi, height), &y);
        t.require(err <= A_TOL, err);
    }
    per.insert(LemmaId::L6, t.finish(cfg.tol_value));

    if opts.pointedness {
        let tally = match gradient_hull(f, space, &w.x, cfg) {
            Ok(hull) => {
                let (m, zero) = pointedness_margin(&hull);
                LemmaResult { pass: !zero && m > 1e-6, margin: m, samples: hull.generators.len(), tolerance: 1e-6 }
            }
            Err(_) => LemmaResult { pass: false, margin: 0.0, samples: 0, tolerance: 1e-6 },
        };
        per.insert(LemmaId::Pointedness, tally);
    }
    if opts.theorem2 {
        let res = match check_theorem2(inst, &w.x, cfg) {
            Ok(c) => {
                let alpha = c.result.witness.as_ref().map_or(0.0, |w| w.alpha);
                LemmaResult { pass: c.nondegenerate, margin: alpha, samples: c.result.directions_tried, tolerance: 0.0 }
            }
            Err(_) => LemmaResult { pass: false, margin: 0.0, samples: 0, tolerance: 0.0 },
        };
        per.insert(LemmaId::T2, res);
    }

    let overall = LemmaId::GATING.iter().all(|id| per.get(id).is_some_and(|r| r.pass));
    Ok(VerificationReport { per_lemma: per, overall, seed, measured_lipschitz: measured })
}

/// Smallest `‖g/‖g‖ + h/‖h‖‖₂` over generator pairs, self-pairs included.
/// Returns `(0, true)` when some generator is numerically zero.
pub fn pointedness_margin(hull: &GradientHull) -> (f64, bool) {
    let mut units = Vec::with_capacity(hull.generators.len());
    for g in &hull.generators {
        let n = g.iter().map(|c| c * c).sum::<f64>().sqrt();
        if n <= 1e-14 {
            return (0.0, true);
        }
        units.push(g.iter().map(|c| c / n).collect::<Vec<f64>>());
    }
    let mut best = f64::INFINITY;
    for i in 0..units.len() {
        for j in i..units.len() {
            let s = units[i].iter().zip(&units[j]).map(|(a, b)| (a + b) * (a + b)).sum::<f64>().sqrt();
            best = best.min(s);
        }
    }
    (best, false)
}
