use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::{Error, Result, TWO_PI};

/// Reduces an angle to [-pi, pi).
pub fn reduce_y(y: f64) -> Result<f64> {
    if !y.is_finite() {
        return Err(Error::domain(format!("reduce_y: non-finite input {y}")));
    }
    Ok(wrap(y))
}

#[inline]
pub(crate) fn wrap(y: f64) -> f64 {
    if (-PI..PI).contains(&y) {
        return y;
    }
    let mut r = y - TWO_PI * ((y + PI) / TWO_PI).floor();
    if r >= PI {
        r -= TWO_PI;
    }
    if r < -PI {
        r += TWO_PI;
    }
    r
}

/// A point of the strip; `y` is kept in [-pi, pi).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct StripPoint {
    pub x: f64,
    y: f64,
}

impl StripPoint {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !x.is_finite() {
            return Err(Error::domain(format!("non-finite x coordinate {x}")));
        }
        Ok(Self { x, y: reduce_y(y)? })
    }

    pub fn y(&self) -> f64 {
        self.y
    }
}

impl TryFrom<[f64; 2]> for StripPoint {
    type Error = Error;

    fn try_from(v: [f64; 2]) -> Result<Self> {
        StripPoint::new(v[0], v[1])
    }
}

impl From<StripPoint> for [f64; 2] {
    fn from(p: StripPoint) -> Self {
        [p.x, p.y]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduce_examples() {
        assert!((reduce_y(1.5 * PI).unwrap() + 0.5 * PI).abs() < 1e-15);
        assert_eq!(reduce_y(0.0).unwrap(), 0.0);
        assert_eq!(reduce_y(-PI).unwrap(), -PI);
        assert!(reduce_y(PI).unwrap() == -PI);
        assert!(reduce_y(f64::NAN).is_err());
        assert!(reduce_y(f64::INFINITY).is_err());
    }
}
