//! Named parametric functions used to fill reward, cost and demand tables.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// A function of one ordered variable.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields))]
pub enum Family1 {
    /// One value per grid point.
    Table { values: Vec<f64> },
    /// `intercept + slope·x`.
    Linear { slope: f64, #[cfg_attr(feature = "serde", serde(default))] intercept: f64 },
    /// `c0 + c1·x + c2·x²`.
    Quadratic { c0: f64, c1: f64, c2: f64 },
    /// `scale·(x + shift)^exponent`; needs `x + shift ≥ 0`.
    Power { scale: f64, exponent: f64, #[cfg_attr(feature = "serde", serde(default))] shift: f64 },
    /// `scale·exp(rate·x)`.
    Exponential { scale: f64, rate: f64 },
}

impl Family1 {
    pub fn at(&self, x: f64) -> Result<f64> {
        let v = match *self {
            Family1::Table { .. } => {
                return Err(Error::Unsupported("tables are evaluated on their grid only".into()));
            }
            Family1::Linear { slope, intercept } => intercept + slope * x,
            Family1::Quadratic { c0, c1, c2 } => c0 + c1 * x + c2 * x * x,
            Family1::Power { scale, exponent, shift } => {
                let z = x + shift;
                if z < 0.0 {
                    return Err(Error::InvalidModel(format!("power family evaluated at negative base {z}")));
                }
                scale * libm::pow(z, exponent)
            }
            Family1::Exponential { scale, rate } => scale * libm::exp(rate * x),
        };
        Ok(v)
    }

    pub fn evaluate(&self, points: &[f64]) -> Result<Vec<f64>> {
        if let Family1::Table { values } = self {
            if values.len() != points.len() {
                return Err(Error::GridMismatch(format!(
                    "table has {} values for {} grid points",
                    values.len(),
                    points.len()
                )));
            }
            return Ok(values.clone());
        }
        points.iter().map(|&x| self.at(x)).collect()
    }
}

/// A function of two ordered variables `(x, y)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields))]
pub enum Family2 {
    /// Values laid out `[i·|y| + j]`.
    Table { values: Vec<f64> },
    /// `c0 + cx·x + cy·y + cxy·x·y`.
    Bilinear { #[cfg_attr(feature = "serde", serde(default))] c0: f64, cx: f64, cy: f64, cxy: f64 },
    /// Demand `d0 + ds·s − da·a` in the reference price `s` and the charged price `a`.
    LinearDemand { d0: f64, ds: f64, da: f64 },
    /// Adjustment cost `scale·|y − x|`.
    AbsAdjustment { scale: f64 },
    /// Adjustment cost `scale·(y − x)²`.
    QuadraticAdjustment { scale: f64 },
    /// Revenue `scale·x^alpha·y^beta` on nonnegative grids.
    PowerRevenue { scale: f64, alpha: f64, beta: f64 },
}

impl Family2 {
    pub fn at(&self, x: f64, y: f64) -> Result<f64> {
        let v = match *self {
            Family2::Table { .. } => {
                return Err(Error::Unsupported("tables are evaluated on their grid only".into()));
            }
            Family2::Bilinear { c0, cx, cy, cxy } => c0 + cx * x + cy * y + cxy * x * y,
            Family2::LinearDemand { d0, ds, da } => d0 + ds * x - da * y,
            Family2::AbsAdjustment { scale } => scale * (y - x).abs(),
            Family2::QuadraticAdjustment { scale } => scale * (y - x) * (y - x),
            Family2::PowerRevenue { scale, alpha, beta } => {
                if x < 0.0 || y < 0.0 {
                    return Err(Error::InvalidModel("power revenue needs nonnegative arguments".into()));
                }
                scale * libm::pow(x, alpha) * libm::pow(y, beta)
            }
        };
        Ok(v)
    }

    pub fn evaluate(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        if let Family2::Table { values } = self {
            if values.len() != x.len() * y.len() {
                return Err(Error::GridMismatch(format!(
                    "table has {} values for a {}x{} grid",
                    values.len(),
                    x.len(),
                    y.len()
                )));
            }
            return Ok(values.clone());
        }
        let mut out = Vec::with_capacity(x.len() * y.len());
        for &a in x {
            for &b in y {
                out.push(self.at(a, b)?);
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn one_variable_families() {
        let pts = [0.0, 1.0, 2.0];
        assert_eq!(Family1::Linear { slope: 2.0, intercept: 1.0 }.evaluate(&pts).unwrap(), vec![1.0, 3.0, 5.0]);
        assert_eq!(Family1::Quadratic { c0: 0.0, c1: 0.0, c2: 1.0 }.evaluate(&pts).unwrap(), vec![0.0, 1.0, 4.0]);
        assert_eq!(Family1::Power { scale: 1.0, exponent: 0.5, shift: 0.0 }.at(4.0).unwrap(), 2.0);
        assert!(Family1::Power { scale: 1.0, exponent: 0.5, shift: 0.0 }.at(-1.0).is_err());
        assert!(Family1::Table { values: vec![1.0] }.evaluate(&pts).is_err());
    }

    #[test]
    fn two_variable_families() {
        let (x, y) = ([0.0, 1.0], [0.0, 2.0]);
        let v = Family2::Bilinear { c0: 0.0, cx: 0.0, cy: 0.0, cxy: 1.0 }.evaluate(&x, &y).unwrap();
        assert_eq!(v, vec![0.0, 0.0, 0.0, 2.0]);
        assert_eq!(Family2::AbsAdjustment { scale: 2.0 }.at(3.0, 1.0).unwrap(), 4.0);
        assert_eq!(Family2::LinearDemand { d0: 1.0, ds: 0.5, da: 1.0 }.at(1.0, 0.5).unwrap(), 1.0);
        assert!(Family2::PowerRevenue { scale: 1.0, alpha: 0.5, beta: 0.5 }.at(-1.0, 1.0).is_err());
    }
}
