//! The function-oracle interface through which every algorithm sees `f`.

use std::fmt;
use std::sync::Arc;

use crate::error::OracleError;

/// A deterministic, pure evaluator of a locally Lipschitz function `f: R^n -> R`.
pub trait FunctionOracle: Send + Sync {
    fn eval(&self, y: &[f64]) -> Result<f64, OracleError>;

    /// Gradient at `y`, if `f` is differentiable there.
    fn grad(&self, _y: &[f64]) -> Option<Vec<f64>> {
        None
    }

    fn lipschitz_hint(&self) -> Option<f64> {
        None
    }

    /// Absolute accuracy of `eval` when it is itself an approximation
    /// (zero for exact closed forms).
    fn noise_floor(&self) -> f64 {
        0.0
    }

    fn descriptor(&self) -> String;
}

pub type SharedOracle = Arc<dyn FunctionOracle>;

type EvalFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type GradFn = dyn Fn(&[f64]) -> Option<Vec<f64>> + Send + Sync;

/// Closure-backed oracle.
pub struct FnOracle {
    descriptor: String,
    dim: Option<usize>,
    eval: Box<EvalFn>,
    grad: Option<Box<GradFn>>,
    lipschitz_hint: Option<f64>,
}

impl FnOracle {
    pub fn new(descriptor: impl Into<String>, eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self { descriptor: descriptor.into(), dim: None, eval: Box::new(eval), grad: None, lipschitz_hint: None }
    }

    pub fn with_grad(mut self, grad: impl Fn(&[f64]) -> Option<Vec<f64>> + Send + Sync + 'static) -> Self {
        self.grad = Some(Box::new(grad));
        self
    }

    pub fn with_lipschitz_hint(mut self, k: f64) -> Self {
        self.lipschitz_hint = Some(k);
        self
    }

    pub fn with_dim(mut self, dim: usize) -> Self {
        self.dim = Some(dim);
        self
    }

    pub fn shared(self) -> SharedOracle {
        Arc::new(self)
    }
}

impl fmt::Debug for FnOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnOracle").field("descriptor", &self.descriptor).finish()
    }
}

impl FunctionOracle for FnOracle {
    fn eval(&self, y: &[f64]) -> Result<f64, OracleError> {
        if let Some(dim) = self.dim {
            check_dim(dim, y)?;
        }
        finite(y, (self.eval)(y))
    }

    fn grad(&self, y: &[f64]) -> Option<Vec<f64>> {
        self.grad.as_ref().and_then(|g| g(y))
    }

    fn lipschitz_hint(&self) -> Option<f64> {
        self.lipschitz_hint
    }

    fn descriptor(&self) -> String {
        self.descriptor.clone()
    }
}

/// `scale * f`, used to check that classifications only depend on sign.
pub struct Scaled {
    pub inner: SharedOracle,
    pub scale: f64,
}

impl FunctionOracle for Scaled {
    fn eval(&self, y: &[f64]) -> Result<f64, OracleError> {
        Ok(self.scale * self.inner.eval(y)?)
    }

    fn grad(&self, y: &[f64]) -> Option<Vec<f64>> {
        self.inner.grad(y).map(|g| g.into_iter().map(|c| c * self.scale).collect())
    }

    fn lipschitz_hint(&self) -> Option<f64> {
        self.inner.lipschitz_hint().map(|k| k * self.scale.abs())
    }

    fn noise_floor(&self) -> f64 {
        self.inner.noise_floor() * self.scale.abs()
    }

    fn descriptor(&self) -> String {
        format!("{} * {}", self.scale, self.inner.descriptor())
    }
}

pub(crate) fn check_dim(expected: usize, y: &[f64]) -> Result<(), OracleError> {
    if y.len() == expected {
        Ok(())
    } else {
        Err(OracleError::Dimension { expected, got: y.len() })
    }
}

pub(crate) fn finite(y: &[f64], v: f64) -> Result<f64, OracleError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(OracleError::NonFinite(y.to_vec()))
    }
}

/// Central finite-difference gradient with step `h`.
pub fn central_difference_gradient(f: &dyn FunctionOracle, y: &[f64], h: f64) -> Result<Vec<f64>, OracleError> {
    let mut g = Vec::with_capacity(y.len());
    let mut p = y.to_vec();
    for i in 0..y.len() {
        p[i] = y[i] + h;
        let up = f.eval(&p)?;
        p[i] = y[i] - h;
        let down = f.eval(&p)?;
        p[i] = y[i];
        g.push((up - down) / (2.0 * h));
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fn_oracle_checks_dimension_and_finiteness() {
        let f = FnOracle::new("sum", |y| y.iter().sum()).with_dim(2);
        assert_eq!(f.eval(&[1.0, 2.0]).unwrap(), 3.0);
        assert!(matches!(f.eval(&[1.0]), Err(OracleError::Dimension { .. })));
        let g = FnOracle::new("inf", |_| f64::INFINITY);
        assert!(matches!(g.eval(&[0.0]), Err(OracleError::NonFinite(_))));
    }

    #[test]
    fn finite_differences_match_quadratic_gradient() {
        let f = FnOracle::new("q", |y| y[0] * y[0] + 3.0 * y[0] * y[1]);
        let g = central_difference_gradient(&f, &[1.0, 2.0], 1e-5).unwrap();
        assert!((g[0] - 8.0).abs() < 1e-8);
        assert!((g[1] - 3.0).abs() < 1e-8);
    }
}
