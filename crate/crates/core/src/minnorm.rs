//! Minimum-norm point of the convex hull of finitely many points (Wolfe's algorithm).
//!
//! The active set `S` is kept affinely independent; each minor cycle moves the
//! current point towards the affine minimizer of `S` and drops the points whose
//! weight reaches zero.

use nalgebra::{DMatrix, DVector};

use crate::space::dot;

#[derive(Clone, Debug, PartialEq)]
pub struct MinNormPoint {
    pub point: Vec<f64>,
    /// Convex weights over the input points (same order as the input).
    pub weights: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

const WEIGHT_EPS: f64 = 1e-12;

/// Euclidean minimum-norm point of `conv(points)`. Panics on an empty input.
pub fn min_norm_point(points: &[Vec<f64>], tol: f64, max_iter: usize) -> MinNormPoint {
    assert!(!points.is_empty(), "min_norm_point needs at least one point");
    let m = points.len();
    let dim = points[0].len();
    let sq: Vec<f64> = points.iter().map(|p| dot(p, p)).collect();
    let start = (0..m).min_by(|&a, &b| sq[a].total_cmp(&sq[b])).unwrap();

    let mut active: Vec<usize> = vec![start];
    let mut w: Vec<f64> = vec![1.0];
    let mut x = points[start].clone();
    let mut iterations = 0;
    let mut converged = false;
    let scale = sq.iter().cloned().fold(0.0, f64::max).max(f64::MIN_POSITIVE);

    while iterations < max_iter {
        iterations += 1;
        let xx = dot(&x, &x);
        let (j, xpj) = (0..m)
            .map(|i| (i, dot(&x, &points[i])))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        // optimality: <x, p> >= |x|^2 for every p
        if xx - xpj <= tol * scale || active.contains(&j) {
            converged = true;
            break;
        }
        active.push(j);
        w.push(0.0);

        loop {
            iterations += 1;
            let Some(mu) = affine_minimizer(points, &active) else {
                // affinely dependent active set: drop the newest point and stop
                active.pop();
                w.pop();
                converged = true;
                break;
            };
            if mu.iter().all(|&c| c > WEIGHT_EPS) {
                w = mu;
                break;
            }
            let mut theta = 1.0f64;
            for (wi, mi) in w.iter().zip(&mu) {
                if *mi <= WEIGHT_EPS {
                    let denom = wi - mi;
                    if denom > 0.0 {
                        theta = theta.min(wi / denom);
                    }
                }
            }
            for (wi, mi) in w.iter_mut().zip(&mu) {
                *wi = theta * mi + (1.0 - theta) * *wi;
            }
            let mut keep_a = Vec::with_capacity(active.len());
            let mut keep_w = Vec::with_capacity(active.len());
            for (&a, &wi) in active.iter().zip(&w) {
                if wi > WEIGHT_EPS {
                    keep_a.push(a);
                    keep_w.push(wi);
                }
            }
            if keep_a.is_empty() {
                // cannot happen in exact arithmetic; keep the heaviest point
                let best = (0..w.len()).max_by(|&a, &b| w[a].total_cmp(&w[b])).unwrap();
                keep_a.push(active[best]);
                keep_w.push(1.0);
            }
            let total: f64 = keep_w.iter().sum();
            active = keep_a;
            w = keep_w.into_iter().map(|c| c / total).collect();
            if iterations >= max_iter {
                break;
            }
        }
        x = combine(points, &active, &w, dim);
        if converged {
            break;
        }
    }

    let mut weights = vec![0.0; m];
    for (&a, &wi) in active.iter().zip(&w) {
        weights[a] += wi;
    }
    MinNormPoint { point: combine(points, &active, &w, dim), weights, iterations, converged }
}

fn combine(points: &[Vec<f64>], active: &[usize], w: &[f64], dim: usize) -> Vec<f64> {
    let mut x = vec![0.0; dim];
    for (&a, &wi) in active.iter().zip(w) {
        for (xc, pc) in x.iter_mut().zip(&points[a]) {
            *xc += wi * pc;
        }
    }
    x
}

/// Coefficients (summing to one) of the minimum-norm point of the affine hull of
/// `points[active]`, or `None` if the KKT system is singular.
fn affine_minimizer(points: &[Vec<f64>], active: &[usize]) -> Option<Vec<f64>> {
    let k = active.len();
    let mut kkt = DMatrix::<f64>::zeros(k + 1, k + 1);
    for (r, &a) in active.iter().enumerate() {
        for (c, &b) in active.iter().enumerate() {
            kkt[(r, c)] = dot(&points[a], &points[b]);
        }
        kkt[(r, k)] = 1.0;
        kkt[(k, r)] = 1.0;
    }
    let mut rhs = DVector::<f64>::zeros(k + 1);
    rhs[k] = 1.0;
    let sol = kkt.lu().solve(&rhs)?;
    let mu: Vec<f64> = sol.iter().take(k).copied().collect();
    if mu.iter().any(|c| !c.is_finite()) {
        return None;
    }
    Some(mu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn norm(x: &[f64]) -> f64 {
        dot(x, x).sqrt()
    }

    #[test]
    fn single_point() {
        let r = min_norm_point(&[vec![3.0, 4.0]], 1e-10, 10_000);
        assert_eq!(r.point, vec![3.0, 4.0]);
        assert_eq!(r.weights, vec![1.0]);
    }

    #[test]
    fn segment_through_origin() {
        let r = min_norm_point(&[vec![1.0, 0.0], vec![-1.0, 0.0]], 1e-10, 10_000);
        assert!(norm(&r.point) < 1e-12);
        assert!((r.weights[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn two_unit_vectors() {
        let r = min_norm_point(&[vec![1.0, 0.0], vec![0.0, 1.0]], 1e-10, 10_000);
        assert!((r.point[0] - 0.5).abs() < 1e-12 && (r.point[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn triangle_with_far_vertex() {
        // hull of (1,1), (1,-1), (3,0): closest point is (1,0)
        let r = min_norm_point(&[vec![3.0, 0.0], vec![1.0, 1.0], vec![1.0, -1.0]], 1e-10, 10_000);
        assert!((r.point[0] - 1.0).abs() < 1e-12 && r.point[1].abs() < 1e-12);
        assert!(r.weights[0].abs() < 1e-12);
    }

    #[test]
    fn duplicates_are_harmless() {
        let pts = vec![vec![1.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 1.0]];
        let r = min_norm_point(&pts, 1e-10, 10_000);
        assert!((norm(&r.point) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    /// Brute-force oracle: projected-gradient descent on the simplex weights,
    /// run long enough to be accurate to ~1e-7 on small instances.
    fn simplex_descent(points: &[Vec<f64>]) -> f64 {
        let m = points.len();
        let mut w = vec![1.0 / m as f64; m];
        let dim = points[0].len();
        let lip: f64 = points.iter().map(|p| dot(p, p)).sum::<f64>().max(1e-12);
        for _ in 0..20_000 {
            let x = combine(points, &(0..m).collect::<Vec<_>>(), &w, dim);
            let g: Vec<f64> = points.iter().map(|p| dot(p, &x)).collect();
            let y: Vec<f64> = w.iter().zip(&g).map(|(wi, gi)| wi - gi / lip).collect();
            w = project_simplex(&y);
        }
        norm(&combine(points, &(0..m).collect::<Vec<_>>(), &w, dim))
    }

    fn project_simplex(y: &[f64]) -> Vec<f64> {
        let mut u = y.to_vec();
        u.sort_by(|a, b| b.total_cmp(a));
        let mut css = 0.0;
        let mut theta = 0.0;
        for (i, ui) in u.iter().enumerate() {
            css += ui;
            let t = (css - 1.0) / (i + 1) as f64;
            if ui - t > 0.0 {
                theta = t;
            }
        }
        y.iter().map(|v| (v - theta).max(0.0)).collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn matches_simplex_descent_and_weights_are_convex(
            pts in prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 3), 1..7)
        ) {
            let r = min_norm_point(&pts, 1e-10, 10_000);
            let total: f64 = r.weights.iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-9);
            prop_assert!(r.weights.iter().all(|&c| c >= -1e-12));
            let recon = combine(&pts, &(0..pts.len()).collect::<Vec<_>>(), &r.weights, 3);
            for (a, b) in recon.iter().zip(&r.point) {
                prop_assert!((a - b).abs() < 1e-9);
            }
            let oracle = simplex_descent(&pts);
            prop_assert!(norm(&r.point) <= oracle + 1e-6, "wolfe {} vs oracle {}", norm(&r.point), oracle);
            prop_assert!(norm(&r.point) >= oracle - 1e-6);
        }
    }
}
