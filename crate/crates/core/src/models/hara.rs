//! Utilities with hyperbolic absolute risk aversion `−u''/u' = 1/(a c + b)`.

use crate::error::{Error, Result};

/// HARA utility with parameters `(a, b)`, defined where `a c + b > 0`.
///
/// Normalized so that `u'(c) = (a c + b)^{−1/a}` (and `u'(c) = e^{−c/b}` when `a = 0`).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Hara {
    pub a: f64,
    pub b: f64,
}

impl Hara {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidModel("HARA parameters must be finite".into()));
        }
        if a == 0.0 && b <= 0.0 {
            return Err(Error::InvalidModel("exponential utility needs b > 0".into()));
        }
        Ok(Self { a, b })
    }

    /// Constant relative risk aversion `sigma`: `a = 1/σ`, `b = 0`.
    pub fn crra(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(Error::InvalidModel("relative risk aversion must be positive".into()));
        }
        Self::new(1.0 / sigma, 0.0)
    }

    /// Constant absolute risk aversion `alpha`: `a = 0`, `b = 1/α`.
    pub fn cara(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(Error::InvalidModel("absolute risk aversion must be positive".into()));
        }
        Self::new(0.0, 1.0 / alpha)
    }

    /// Quadratic utility with bliss point `bliss`: `a = −1`, `b = bliss`.
    pub fn quadratic(bliss: f64) -> Result<Self> {
        Self::new(-1.0, bliss)
    }

    pub fn in_domain(&self, c: f64) -> bool {
        self.a * c + self.b > 0.0
    }

    /// `u(c)`, or `None` outside the domain.
    pub fn utility(&self, c: f64) -> Option<f64> {
        let (a, b) = (self.a, self.b);
        if a == 0.0 {
            return Some(-b * libm::exp(-c / b));
        }
        let z = a * c + b;
        if !(z > 0.0) {
            return None;
        }
        if a == 1.0 {
            return Some(libm::log(z));
        }
        Some(libm::pow(z, 1.0 - 1.0 / a) / (a - 1.0))
    }

    pub fn marginal(&self, c: f64) -> Option<f64> {
        let (a, b) = (self.a, self.b);
        if a == 0.0 {
            return Some(libm::exp(-c / b));
        }
        let z = a * c + b;
        (z > 0.0).then(|| libm::pow(z, -1.0 / a))
    }

    /// `u'` is convex on the domain (prudence).
    pub fn marginal_convex(&self) -> bool {
        self.a == 0.0 || self.a > 0.0 || self.a <= -1.0
    }
}
