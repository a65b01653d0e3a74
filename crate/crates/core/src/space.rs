//! Finite-dimensional normed spaces, points, unit directions and ball sampling.

use std::ops::Deref;

use rand::Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::config::derive_seed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormKind {
    #[serde(alias = "l2")]
    Euclidean,
    #[serde(alias = "linf", alias = "max")]
    Sup,
    #[serde(alias = "l1")]
    One,
}

/// `R^dim` equipped with one of the supported norms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormedSpace {
    pub dim: usize,
    #[serde(rename = "norm")]
    pub norm_kind: NormKind,
}

impl NormedSpace {
    /// Panics if `dim == 0`.
    pub fn new(dim: usize, norm_kind: NormKind) -> Self {
        assert!(dim >= 1, "a normed space needs dim >= 1");
        Self { dim, norm_kind }
    }

    pub fn euclidean(dim: usize) -> Self {
        Self::new(dim, NormKind::Euclidean)
    }

    pub fn norm(&self, x: &[f64]) -> f64 {
        norm_of(self.norm_kind, x)
    }

    /// Norm of a linear functional given by its coordinate weights.
    pub fn dual_norm(&self, w: &[f64]) -> f64 {
        let dual = match self.norm_kind {
            NormKind::Euclidean => NormKind::Euclidean,
            NormKind::Sup => NormKind::One,
            NormKind::One => NormKind::Sup,
        };
        norm_of(dual, w)
    }

    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        self.norm(&sub(a, b))
    }

    /// A unit vector `u` with `<g, u> = dual_norm(g)`: the direction of steepest
    /// increase of the linear form `g`. Returns `None` for `g = 0`.
    pub fn steepest_unit(&self, g: &[f64]) -> Option<Vec<f64>> {
        let gmax = g.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        if gmax == 0.0 || !gmax.is_finite() {
            return None;
        }
        let u = match self.norm_kind {
            NormKind::Euclidean => {
                let n = norm_of(NormKind::Euclidean, g);
                g.iter().map(|c| c / n).collect()
            }
            NormKind::Sup => g
                .iter()
                .map(|&c| if c > 0.0 { 1.0 } else if c < 0.0 { -1.0 } else { 0.0 })
                .collect(),
            NormKind::One => {
                let j = argmax_abs(g);
                let mut u = vec![0.0; g.len()];
                u[j] = g[j].signum();
                u
            }
        };
        Some(u)
    }

    /// `x / norm(x)`, or `None` when `x` vanishes.
    pub fn normalize(&self, x: &[f64]) -> Option<Vec<f64>> {
        let n = self.norm(x);
        if n > 0.0 && n.is_finite() {
            Some(x.iter().map(|c| c / n).collect())
        } else {
            None
        }
    }

    pub fn basis(&self, i: usize) -> Vec<f64> {
        let mut e = vec![0.0; self.dim];
        e[i] = 1.0;
        e
    }

    /// Point at `radius * factor` in a random direction, `factor` in [0.901, 0.999].
    fn shell_offset<R: Rng>(&self, rng: &mut R, radius: f64) -> Vec<f64> {
        let factor = 0.9 + 0.1 * (0.01 + 0.98 * rng.random::<f64>());
        let dir = self.random_unit(rng);
        dir.into_iter().map(|c| c * factor * radius).collect()
    }

    /// Uniformly distributed offset strictly inside the ball of the given radius.
    fn interior_offset<R: Rng>(&self, rng: &mut R, radius: f64) -> Vec<f64> {
        let n = self.dim;
        match self.norm_kind {
            NormKind::Euclidean => {
                let dir = self.random_unit(rng);
                let scale = radius * open_unit(rng).powf(1.0 / n as f64);
                dir.into_iter().map(|c| c * scale).collect()
            }
            NormKind::Sup => (0..n).map(|_| radius * (2.0 * open_unit(rng) - 1.0)).collect(),
            NormKind::One => {
                let e: Vec<f64> = (0..=n).map(|_| rng.sample::<f64, _>(Exp1) + f64::MIN_POSITIVE).collect();
                let total: f64 = e.iter().sum();
                (0..n)
                    .map(|i| {
                        let s = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                        s * radius * e[i] / total
                    })
                    .collect()
            }
        }
    }

    /// Random vector of unit norm (in this space's norm).
    pub fn random_unit<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        let n = self.dim;
        loop {
            let raw: Vec<f64> = match self.norm_kind {
                NormKind::Euclidean => (0..n).map(|_| rng.sample(StandardNormal)).collect(),
                NormKind::Sup => {
                    let j = rng.random_range(0..n);
                    (0..n)
                        .map(|i| {
                            if i == j {
                                if rng.random_bool(0.5) { 1.0 } else { -1.0 }
                            } else {
                                2.0 * rng.random::<f64>() - 1.0
                            }
                        })
                        .collect()
                }
                NormKind::One => (0..n)
                    .map(|_| {
                        let s = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                        s * rng.sample::<f64, _>(Exp1)
                    })
                    .collect(),
            };
            if let Some(u) = self.normalize(&raw) {
                return u;
            }
        }
    }
}

fn norm_of(kind: NormKind, x: &[f64]) -> f64 {
    match kind {
        NormKind::Euclidean => {
            // scaled to avoid overflow/underflow
            let m = x.iter().fold(0.0f64, |m, c| m.max(c.abs()));
            if m == 0.0 || !m.is_finite() {
                return m;
            }
            m * x.iter().map(|c| (c / m) * (c / m)).sum::<f64>().sqrt()
        }
        NormKind::Sup => x.iter().fold(0.0f64, |m, c| m.max(c.abs())),
        NormKind::One => x.iter().map(|c| c.abs()).sum(),
    }
}

fn argmax_abs(x: &[f64]) -> usize {
    let mut best = 0;
    for (i, c) in x.iter().enumerate() {
        if c.abs() > x[best].abs() {
            best = i;
        }
    }
    best
}

/// Uniform draw from the open interval (0, 1).
pub(crate) fn open_unit<R: Rng>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

/// A point of the ambient space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(pub Vec<f64>);

impl Point {
    pub fn origin(dim: usize) -> Self {
        Point(vec![0.0; dim])
    }
}

impl Deref for Point {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Point(v)
    }
}

impl From<&[f64]> for Point {
    fn from(v: &[f64]) -> Self {
        Point(v.to_vec())
    }
}

/// A direction vector. `unit_norm` records that the coordinates were normalized
/// in the norm of the space they were built for.
#[derive(Clone, Debug, PartialEq)]
pub struct Direction {
    coords: Vec<f64>,
    unit_norm: bool,
}

impl Direction {
    /// Normalizes `coords` in the norm of `space`. `None` for the zero vector.
    pub fn unit(space: &NormedSpace, coords: &[f64]) -> Option<Self> {
        space.normalize(coords).map(|coords| Self { coords, unit_norm: true })
    }

    pub fn raw(coords: Vec<f64>) -> Self {
        Self { coords, unit_norm: false }
    }

    /// Trusts the caller that `coords` already has unit norm; used when reading
    /// certificates back from disk. Checked by [`Direction::is_unit_in`].
    pub fn assume_unit(coords: Vec<f64>) -> Self {
        Self { coords, unit_norm: true }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn unit_norm(&self) -> bool {
        self.unit_norm
    }

    pub fn is_unit_in(&self, space: &NormedSpace) -> bool {
        (space.norm(&self.coords) - 1.0).abs() <= 1e-12
    }

    pub fn negated(&self) -> Self {
        Self { coords: self.coords.iter().map(|c| -c).collect(), unit_norm: self.unit_norm }
    }
}

impl Deref for Direction {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.coords
    }
}

impl Serialize for Direction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.coords.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Direction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Vec::<f64>::deserialize(d).map(Direction::assume_unit)
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// `a + s * b`
pub fn axpy(a: &[f64], s: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

/// Deterministic sample of `n` points strictly inside `B(center, radius)`.
///
/// The first point is the center itself; the next `ceil(n/8)` lie in the shell
/// `0.9 * radius < norm(p - center) < radius`; the rest are uniform in the ball.
/// With `n == 1` only the center is returned.
pub fn sample_ball(space: &NormedSpace, center: &[f64], radius: f64, n: usize, seed: u64) -> Vec<Point> {
    assert!(radius > 0.0, "sample_ball needs a positive radius");
    assert!(n >= 1, "sample_ball needs n >= 1");
    assert_eq!(center.len(), space.dim, "center has the wrong dimension");
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(derive_seed(seed, "sample_ball", n as u64));
    let shell = n.div_ceil(8).min(n - 1);
    let mut out = Vec::with_capacity(n);
    out.push(Point(center.to_vec()));
    for _ in 0..shell {
        let off = space.shell_offset(&mut rng, radius);
        out.push(Point(axpy(center, 1.0, &off)));
    }
    while out.len() < n {
        let off = space.interior_offset(&mut rng, radius);
        out.push(Point(axpy(center, 1.0, &off)));
    }
    out
}
