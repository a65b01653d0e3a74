//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use std::time::{Duration, Instant};

use epilip::catalog::{self, CatalogEntry};
use epilip::clarke::{derivative_along, directional_derivative, is_nondegenerate};
use epilip::epirep::{certify, CertifyFailure, Chart, EpigraphCertificate};
use epilip::signed_distance::{check_theorem2, SignedDistanceOracle};
use epilip::verify::{run_suite, LemmaId, SuiteOptions};
use epilip::{Direction, FunctionOracle, NormedSpace, NumericConfig, Point};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn cfg() -> NumericConfig {
    NumericConfig::default().with_seed(42)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Uniform point of the open ball, drawn independently of the library samplers.
fn ball_point(rng: &mut ChaCha8Rng, space: &NormedSpace, center: &[f64], radius: f64) -> Vec<f64> {
    loop {
        let p: Vec<f64> = center.iter().map(|c| c + radius * (2.0 * rng.random::<f64>() - 1.0)).collect();
        if space.distance(&p, center) < radius {
            return p;
        }
        if space.dim > 6 {
            // rejection from the cube is hopeless in high dimension; shrink a Gaussian direction instead
            let g: Vec<f64> = (0..space.dim).map(|_| gaussian(rng)).collect();
            let n = space.norm(&g);
            let s = radius * rng.random::<f64>().powf(1.0 / space.dim as f64) * 0.999;
            return center.iter().zip(&g).map(|(c, gi)| c + s * gi / n).collect();
        }
    }
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Every (entry, point) pair the catalog lists as certifiable, plus two low-dimensional truncations.
fn certifiable() -> Vec<(CatalogEntry, Point)> {
    let mut out = Vec::new();
    for id in catalog::FIXED_IDS {
        let e = catalog::load(id).unwrap();
        for p in e.expected.certifiable_at.clone() {
            out.push((e.clone(), p));
        }
    }
    for d in [1, 2] {
        let e = catalog::rockafellar_truncation(d);
        out.push((e.clone(), e.expected.certifiable_at[0].clone()));
    }
    out
}

fn certify_entry(e: &CatalogEntry, x: &[f64]) -> Result<EpigraphCertificate, String> {
    certify(&e.instance, x, &cfg()).map_err(|f| format!("{} at {x:?}: {f}", e.id))
}

fn criterion_1() -> Outcome {
    let e = catalog::load("halfspace").unwrap();
    let cert = certify_entry(&e, &[0.0, 0.0])?;
    let w = &cert.witness;
    let phi = cert.phi();
    let chart = Chart { f: e.instance.f.as_ref(), space: &e.instance.space, witness: w, phi: &phi, tol_bisect: 1e-10 };
    let mut rng = ChaCha8Rng::seed_from_u64(1001);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let b = ball_point(&mut rng, &e.instance.space, &w.x, 0.5 * w.epsilon);
        let s = w.r * (rng.random::<f64>() - 0.5);
        let y: Vec<f64> = b.iter().zip(w.v.coords()).map(|(bi, vi)| bi + s * vi).collect();
        // y + t v leaves {y₁ > 0} at t = -y₁ / v₁
        let exact = -y[0] / w.v.coords()[0];
        worst = worst.max((chart.lambda(&y).map_err(|e| e.to_string())? - exact).abs());
    }
    ensure(worst <= 1e-8, || format!("λ deviates from y₁ by {worst:e}"))?;
    let m = cert.measured_lipschitz;
    ensure((0.99..=1.01).contains(&m), || format!("measured_lipschitz {m}"))?;
    ensure((1.0..=1.25).contains(&w.k), || format!("k = {}", w.k))?;
    ensure((0.4..=0.5).contains(&w.alpha), || format!("alpha = {}", w.alpha))?;
    let bound = 1.0 + 2.0 * w.k / w.alpha;
    ensure((cert.lipschitz_bound - bound).abs() <= 1e-12 * bound, || format!("bound {}", cert.lipschitz_bound))?;
    Ok(format!("max |λ - y₁| = {worst:.1e}, measured {m:.4}, k = {:.4}, α = {:.4}", w.k, w.alpha))
}

fn criterion_2() -> Outcome {
    let tol = 2.0 * cfg().tol_bisect;
    let mut worst = 0.0f64;
    for (id, x) in [
        ("halfspace", vec![0.0, 0.0]),
        ("unit_ball_euclid", vec![1.0, 0.0]),
        ("max_two_planes", vec![0.0, 0.0]),
        ("union_balls", vec![0.5, 0.0]),
    ] {
        let e = catalog::load(id).unwrap();
        let cert = certify_entry(&e, &x)?;
        let w = &cert.witness;
        let phi = cert.phi();
        let chart = Chart { f: e.instance.f.as_ref(), space: &e.instance.space, witness: w, phi: &phi, tol_bisect: 1e-10 };
        let mut rng = ChaCha8Rng::seed_from_u64(2002);
        for _ in 0..200 {
            let b = ball_point(&mut rng, &e.instance.space, &w.x, 0.5 * w.epsilon);
            let shift = w.r * (rng.random::<f64>() - 0.5);
            let y: Vec<f64> = b.iter().zip(w.v.coords()).map(|(bi, vi)| bi + shift * vi).collect();
            let s = w.r * (rng.random::<f64>() - 0.5);
            let ys: Vec<f64> = y.iter().zip(w.v.coords()).map(|(a, vi)| a + s * vi).collect();
            let a = chart.lambda(&y).map_err(|e| format!("{id}: {e}"))?;
            let b = chart.lambda(&ys).map_err(|e| format!("{id}: {e}"))?;
            let err = (b - (a - s)).abs();
            worst = worst.max(err);
            ensure(err <= tol, || format!("{id}: |λ(y+sv) - (λ(y) - s)| = {err:e}"))?;
        }
    }
    Ok(format!("worst identity error {worst:.1e} <= {tol:.0e}"))
}

fn criterion_3() -> Outcome {
    let mut worst_ratio = 0.0f64;
    let mut entries = certifiable();
    let r8 = catalog::rockafellar_truncation(8);
    entries.push((r8.clone(), r8.expected.certifiable_at[0].clone()));
    for (e, x) in &entries {
        let cert = certify_entry(e, x)?;
        let rep = run_suite(&e.instance, &cert, &cfg().with_seed(4343), &SuiteOptions::default()).unwrap();
        let l4 = &rep.per_lemma[&LemmaId::L4];
        ensure(l4.samples == 500, || format!("{}: {} pairs", e.id, l4.samples))?;
        let cap = 1.01 * (1.0 + 2.0 * cert.witness.k / cert.witness.alpha);
        ensure(rep.measured_lipschitz <= cap, || format!("{} at {x:?}: quotient {} > {cap}", e.id, rep.measured_lipschitz))?;
        worst_ratio = worst_ratio.max(rep.measured_lipschitz / cap);
    }
    Ok(format!("{} certificates, max quotient / cap = {worst_ratio:.3}", entries.len()))
}

fn criterion_4() -> Outcome {
    let c = cfg();
    let mut checked = 0;
    let entries = certifiable();
    for (e, x) in &entries {
        let cert = certify_entry(e, x)?;
        let w = &cert.witness;
        let phi = cert.phi();
        let space = &e.instance.space;
        let chart = Chart { f: e.instance.f.as_ref(), space, witness: w, phi: &phi, tol_bisect: c.tol_bisect };
        let mut rng = ChaCha8Rng::seed_from_u64(4004);
        let mut disagreements = 0;
        for _ in 0..1000 {
            let y = ball_point(&mut rng, space, &w.x, 0.5 * w.epsilon);
            let fy = e.instance.f.eval(&y).unwrap();
            if fy.abs() <= c.tol_value {
                continue;
            }
            let height: f64 = phi.weights.iter().zip(&y).map(|(a, b)| a * b).sum();
            let xi: Vec<f64> = y.iter().zip(w.v.coords()).map(|(a, vi)| a - height * vi).collect();
            let in_epi = chart.lambda(&xi).map_err(|err| format!("{}: {err}", e.id))? <= height;
            if (fy <= 0.0) != in_epi {
                disagreements += 1;
            }
            checked += 1;
        }
        ensure(disagreements == 0, || format!("{} at {x:?}: {disagreements} disagreements", e.id))?;
    }
    Ok(format!("{} entries, {checked} samples, 0 disagreements", entries.len()))
}

fn criterion_5() -> Outcome {
    let c = cfg();
    for id in ["singleton_sq", "abs_wall"] {
        let e = catalog::load(id).unwrap();
        match certify(&e.instance, &[0.0, 0.0], &c) {
            Err(CertifyFailure::DegeneratePoint { .. }) => {}
            other => return Err(format!("{id}: expected degenerate-point, got {other:?}")),
        }
        let nd = is_nondegenerate(e.instance.f.as_ref(), &e.instance.space, &[0.0, 0.0], &c).unwrap();
        ensure(nd.hull.min_norm_value <= 1e-3, || format!("{id}: hull min norm {}", nd.hull.min_norm_value))?;
        if id == "abs_wall" {
            for target in [[1.0, 0.0], [-1.0, 0.0]] {
                ensure(nd.hull.approximately_contains(&target, 1e-6), || format!("abs_wall hull misses {target:?}"))?;
            }
        }
    }
    Ok("both degenerate, hull min norm <= 1e-3, abs_wall hull reaches ±e₁".into())
}

fn criterion_6() -> Outcome {
    let c = cfg();
    let mut min_alpha = f64::INFINITY;
    let entries = certifiable();
    for (e, x) in &entries {
        let t2 = check_theorem2(&e.instance, x, &c).map_err(|err| format!("{}: {err}", e.id))?;
        let alpha = t2.result.witness.as_ref().map_or(0.0, |w| w.alpha);
        ensure(t2.nondegenerate && alpha >= 0.2, || format!("{} at {x:?}: nondegenerate={} α={alpha}", e.id, t2.nondegenerate))?;
        min_alpha = min_alpha.min(alpha);

        let sd = SignedDistanceOracle::new(e.instance.clone(), &c);
        let pr = sd.probe_resolution();
        let mut rng = ChaCha8Rng::seed_from_u64(6006);
        let pts: Vec<Vec<f64>> = (0..40).map(|_| ball_point(&mut rng, &e.instance.space, x, 0.5)).collect();
        let vals: Vec<f64> = pts.iter().map(|p| sd.eval(p).unwrap()).collect();
        for i in 0..pts.len() {
            for j in (i + 1)..pts.len() {
                let lhs = (vals[i] - vals[j]).abs();
                let rhs = 1.02 * e.instance.space.distance(&pts[i], &pts[j]) + 2.0 * pr;
                ensure(lhs <= rhs, || format!("{}: Δ quotient violates the 1-Lipschitz bound ({lhs} > {rhs})", e.id))?;
            }
        }
    }
    let s = catalog::load("singleton_sq").unwrap();
    let t2 = check_theorem2(&s.instance, &[0.0, 0.0], &c).map_err(|e| e.to_string())?;
    ensure(!t2.nondegenerate, || "singleton_sq reported nondegenerate".into())?;
    Ok(format!("{} boundary points nondegenerate (min α = {min_alpha:.3}), singleton degenerate", entries.len()))
}

fn criterion_7() -> Outcome {
    let mut rows = Vec::new();
    for d in [1usize, 2, 4, 8, 16, 32, 64] {
        let e = catalog::rockafellar_truncation(d);
        let cert = certify_entry(&e, &vec![0.0; d + 1])?;
        let w = &cert.witness;
        // gradient (2ξ₁, …, 2dξ_d, −1) has its largest Euclidean norm on B(0, r) towards ±r e_d
        let exact_k = ((2.0 * d as f64 * w.r).powi(2) + 1.0).sqrt();
        let rel = (w.k - exact_k).abs() / exact_k;
        ensure(rel <= 0.25, || format!("d={d}: k={} vs closed form {exact_k}", w.k))?;
        ensure((w.alpha - 0.5).abs() <= 1e-6, || format!("d={d}: α={}", w.alpha))?;
        rows.push((d, w.epsilon));
    }
    for pair in rows.windows(2) {
        ensure(pair[1].1 < pair[0].1, || format!("ε not decreasing: {pair:?}"))?;
    }
    let eps = |d: usize| rows.iter().find(|r| r.0 == d).unwrap().1;
    let ratio = eps(64) / eps(4);
    ensure(ratio <= 0.2, || format!("ε(64)/ε(4) = {ratio}"))?;
    Ok(format!("ε strictly decreasing, ε(64)/ε(4) = {ratio:.4}"))
}

/// Maximum difference quotient of `|y₁|` along `±e₁` over a dense grid around 0.
fn abs_grid_quotient(sign: f64) -> f64 {
    let h = 1e-3;
    let mut best = f64::NEG_INFINITY;
    for i in 0..=200 {
        let y = -h + 2.0 * h * i as f64 / 200.0;
        for j in 1..=100 {
            let t = h * j as f64 / 100.0;
            best = best.max(((y + sign * t).abs() - y.abs()) / t);
        }
    }
    best
}

fn criterion_8() -> Outcome {
    let c = cfg();
    let norm2 = |y: &[f64]| y.iter().map(|a| a * a).sum::<f64>().sqrt();
    type Grad = Box<dyn Fn(&[f64]) -> Vec<f64>>;
    let cases: Vec<(CatalogEntry, Vec<f64>, Grad)> = vec![
        (catalog::load("halfspace").unwrap(), vec![0.0, 0.0], Box::new(|_: &[f64]| vec![1.0, 0.0])),
        (catalog::load("unit_ball_euclid").unwrap(), vec![1.0, 0.0], Box::new(move |y: &[f64]| y.iter().map(|a| a / norm2(y)).collect())),
        (catalog::load("unit_ball_euclid").unwrap(), vec![0.0, -1.0], Box::new(move |y: &[f64]| y.iter().map(|a| a / norm2(y)).collect())),
        (catalog::load("union_balls").unwrap(), vec![2.5, 0.0], Box::new(|_: &[f64]| vec![1.0, 0.0])),
        (catalog::load("union_balls").unwrap(), vec![-1.5, 1.0], Box::new(|_: &[f64]| vec![0.0, 1.0])),
        (
            catalog::rockafellar_truncation(4),
            vec![0.1, -0.2, 0.05, 0.0, 0.3],
            Box::new(|y: &[f64]| {
                let mut g: Vec<f64> = (0..4).map(|j| 2.0 * (j + 1) as f64 * y[j]).collect();
                g.push(-1.0);
                g
            }),
        ),
    ];
    let mut worst = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(8008);
    for (e, x, grad) in &cases {
        let space = &e.instance.space;
        let g = grad(x);
        for k in 0..10 {
            let raw: Vec<f64> = if k < space.dim { space.basis(k) } else { (0..space.dim).map(|_| gaussian(&mut rng)).collect() };
            let v = Direction::unit(space, &raw).unwrap();
            let want: f64 = g.iter().zip(v.coords()).map(|(a, b)| a * b).sum();
            let got = directional_derivative(e.instance.f.as_ref(), space, x, &v, &c).unwrap().value;
            worst = worst.max((got - want).abs());
            ensure((got - want).abs() <= 1e-5, || format!("{} at {x:?}: f⁰ = {got}, <∇f, v> = {want}", e.id))?;
        }
    }
    let wall = catalog::load("abs_wall").unwrap();
    for sign in [1.0, -1.0] {
        let oracle = abs_grid_quotient(sign);
        let got = derivative_along(wall.instance.f.as_ref(), &wall.instance.space, &[0.0, 0.0], &[sign, 0.0], &c).unwrap().value;
        ensure((got - oracle).abs() <= 1e-3 && (oracle - 1.0).abs() < 1e-12, || format!("abs_wall f⁰(0, {sign}e₁) = {got}"))?;
    }
    Ok(format!("smooth points within {worst:.1e}, abs_wall ±e₁ ≈ 1"))
}

fn criterion_9() -> Outcome {
    let c = cfg();
    let mut compared = 0;
    for (id, x) in [("halfspace", vec![0.0, 0.0]), ("unit_ball_euclid", vec![1.0, 0.0]), ("box_sup", vec![1.0, 1.0])] {
        let e = catalog::load(id).unwrap();
        let a = certify(&e.instance, &x, &c).map_err(|e| e.to_string())?.to_json();
        let b = certify(&e.instance, &x, &c).map_err(|e| e.to_string())?.to_json();
        ensure(a == b, || format!("{id}: certificate JSON differs between runs"))?;
        let cert = EpigraphCertificate::from_json(&a).map_err(|e| e.to_string())?;
        let r1 = run_suite(&e.instance, &cert, &c.clone().with_seed(43), &SuiteOptions::default()).unwrap().to_json();
        let r2 = run_suite(&e.instance, &cert, &c.clone().with_seed(43), &SuiteOptions::default()).unwrap().to_json();
        ensure(r1 == r2, || format!("{id}: report JSON differs between runs"))?;
        compared += 2;
    }
    let e = catalog::rockafellar_truncation(8);
    let a = certify(&e.instance, &[0.0; 9], &c).map_err(|e| e.to_string())?.to_json();
    let b = certify(&e.instance, &[0.0; 9], &c).map_err(|e| e.to_string())?.to_json();
    ensure(a == b, || "rockafellar_8 certificate differs".into())?;
    let h = catalog::load("halfspace").unwrap();
    let t1 = serde_json::to_string(&check_theorem2(&h.instance, &[0.0, 0.0], &c).unwrap()).unwrap();
    let t2 = serde_json::to_string(&check_theorem2(&h.instance, &[0.0, 0.0], &c).unwrap()).unwrap();
    ensure(t1 == t2, || "theorem2 JSON differs".into())?;
    Ok(format!("{} JSON documents byte-identical across reruns", compared + 2))
}

fn main() {
    let criteria: [(u32, &str, f64, fn() -> Outcome); 9] = [
        (1, "half-space end-to-end", 2.0, criterion_1),
        (2, "translation identity of λ", 5.0, criterion_2),
        (3, "Lipschitz bound of λ", 10.0, criterion_3),
        (4, "epigraph set equality", f64::INFINITY, criterion_4),
        (5, "degeneracy detection", 2.0, criterion_5),
        (6, "signed-distance nondegeneracy", 20.0, criterion_6),
        (7, "truncation collapse", 30.0, criterion_7),
        (8, "generalized derivative oracles", 5.0, criterion_8),
        (9, "determinism", f64::INFINITY, criterion_9),
    ];
    let mut failed = 0;
    for (n, name, limit, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let over = elapsed > Duration::from_secs_f64(limit.min(1e9));
        let (status, detail) = match (&outcome, over) {
            (Ok(d), false) => ("PASS", d.clone()),
            (Ok(d), true) => ("FAIL", format!("{d}; runtime {:.2}s exceeds {limit}s", elapsed.as_secs_f64())),
            (Err(d), _) => ("FAIL", d.clone()),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!("criterion {n} [{status}] {name} ({:.2}s): {detail}", elapsed.as_secs_f64());
    }
    println!("acceptance: {} of 9 criteria passed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
