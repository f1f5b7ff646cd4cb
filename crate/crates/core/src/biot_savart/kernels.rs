use serde::{Deserialize, Serialize};
use std::f64::consts::LN_2;

use crate::numeric::integrate;
use crate::{Error, Result, TWO_PI};

/// A velocity vector (u1, u2).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct KernelValue {
    pub u1: f64,
    pub u2: f64,
}

impl KernelValue {
    pub fn new(u1: f64, u2: f64) -> Self {
        Self { u1, u2 }
    }

    pub fn norm(&self) -> f64 {
        self.u1.hypot(self.u2)
    }

    pub fn is_finite(&self) -> bool {
        self.u1.is_finite() && self.u2.is_finite()
    }
}

impl std::ops::Add for KernelValue {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.u1 + o.u1, self.u2 + o.u2)
    }
}

impl std::ops::Sub for KernelValue {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.u1 - o.u1, self.u2 - o.u2)
    }
}

impl std::ops::Mul<f64> for KernelValue {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self::new(self.u1 * s, self.u2 * s)
    }
}

/// Returns (q, D) with q = e^{-|x|} and
/// D = (1 - q)^2 + 4 q sin^2(y/2) = 2 e^{-|x|} (cosh x - cos y).
#[inline]
pub fn d_factor(x: f64, y: f64) -> (f64, f64) {
    let ax = x.abs();
    let q = (-ax).exp();
    let m = (-ax).exp_m1();
    let s = (0.5 * crate::geometry::wrap_angle(y)).sin();
    (q, m * m + 4.0 * q * s * s)
}

/// log D(x, y) = log(cosh x - cos y) - |x| + log 2. This is the kernel K.
#[inline]
pub fn log_d(x: f64, y: f64) -> f64 {
    d_factor(x, y).1.ln()
}

/// Gamma(x, y) = 1/2 log(cosh x - cos y), evaluated as
/// 1/2 (|x| - log 2 + log D); -inf at the lattice singularity.
#[inline]
pub fn gamma(x: f64, y: f64) -> f64 {
    0.5 * (x.abs() - LN_2 + log_d(x, y))
}

/// k = grad-perp Gamma = (-sin y, sinh x) / (2 (cosh x - cos y)).
pub fn kernel_k(x: f64, y: f64) -> Result<KernelValue> {
    let (q, d) = d_factor(x, y);
    if d == 0.0 || !d.is_finite() {
        return Err(Error::Singular { x, y });
    }
    let one_m_q2 = -(-2.0 * x.abs()).exp_m1();
    Ok(KernelValue::new(
        -q * y.sin() / d,
        x.signum() * one_m_q2 / (2.0 * d),
    ))
}

/// k1 = k - (0, sgn(x)/2), the integrable part of the kernel:
/// (-q sin y, sgn(x) q (cos y - q)) / D.
pub fn kernel_k1(x: f64, y: f64) -> Result<KernelValue> {
    let (q, d) = d_factor(x, y);
    if d == 0.0 {
        return Err(Error::Singular { x, y });
    }
    let sgn = if x == 0.0 { 0.0 } else { x.signum() };
    Ok(KernelValue::new(-q * y.sin() / d, sgn * q * (y.cos() - q) / d))
}

/// K(dx, dy) = log(cosh dx - cos dy) - |dx| + log 2; -inf at the
/// singularity.
#[allow(non_snake_case)]
pub fn kernel_K(dx: f64, dy: f64) -> f64 {
    log_d(dx, dy)
}

/// Integral of K(z - xi) over xi in [-L, L] x T by iterated adaptive
/// quadrature (inner over the angle, split at the singular angle).
pub fn rectangle_kernel_integral(z: (f64, f64), l: f64, tol: f64) -> f64 {
    let (zx, zy) = z;
    let y_lo = zy - std::f64::consts::PI;
    let y_hi = y_lo + TWO_PI;
    let inner = |xi: f64| {
        let dx = zx - xi;
        integrate(|eta| log_d(dx, zy - eta), y_lo, y_hi, &[zy], 0.01 * tol, 1e-15).value
    };
    let breaks = [zx];
    integrate(inner, -l, l, &breaks, tol, 1e-15).value
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn frozen_values() {
        // 40-digit reference evaluations
        assert!((gamma(0.0, PI) - 0.34657359027997264).abs() < 1e-15);
        assert!((gamma(50.0, 0.0) - 24.653426409720027).abs() < 1e-12);
        assert!((kernel_K(10.0, 0.0) + 9.080192074097842e-5).abs() < 1e-15);
        assert!((kernel_K(0.0, PI) - 1.3862943611198906).abs() < 1e-15);
        let k = kernel_k(1.0, 0.0).unwrap();
        assert_eq!(k.u1, 0.0);
        assert!((k.u2 - 1.0819767068693264).abs() < 1e-14);
    }

    #[test]
    fn moderate_x_matches_direct_formula() {
        for &(x, y) in &[(0.3, 1.0), (2.0, -2.5), (-7.0, 0.1), (20.0, 3.0)] {
            let direct = 0.5 * (f64::cosh(x) - f64::cos(y)).ln();
            assert!((gamma(x, y) - direct).abs() < 1e-13 * (1.0 + direct.abs()));
        }
    }

    #[test]
    fn k_on_axis() {
        let k = kernel_k(0.0, PI).unwrap();
        assert!(k.u1.abs() < 1e-16 && k.u2 == 0.0);
        let y = 0.7;
        let k = kernel_k(0.0, y).unwrap();
        let expect = -y.sin() / (2.0 * (1.0 - y.cos()));
        assert!((k.u1 - expect).abs() < 1e-14);
    }

    #[test]
    fn singular_points_are_flagged() {
        assert!(matches!(kernel_k(0.0, 0.0), Err(Error::Singular { .. })));
        assert!(matches!(kernel_k(0.0, TWO_PI), Err(Error::Singular { .. })));
        assert_eq!(gamma(0.0, 0.0), f64::NEG_INFINITY);
        assert_eq!(kernel_K(0.0, 0.0), f64::NEG_INFINITY);
    }

    #[test]
    fn k_is_grad_perp_of_gamma() {
        let h = 1e-5;
        for &(x, y) in &[(0.4, 0.9), (-1.3, 2.2), (3.0, -0.5)] {
            let k = kernel_k(x, y).unwrap();
            let gy = (gamma(x, y + h) - gamma(x, y - h)) / (2.0 * h);
            let gx = (gamma(x + h, y) - gamma(x - h, y)) / (2.0 * h);
            assert!((k.u1 + gy).abs() < 1e-8);
            assert!((k.u2 - gx).abs() < 1e-8);
        }
    }

    #[test]
    fn k1_is_k_minus_half_sign() {
        for &(x, y) in &[(0.4, 0.9), (-1.3, 2.2), (3.0, -0.5)] {
            let k = kernel_k(x, y).unwrap();
            let k1 = kernel_k1(x, y).unwrap();
            assert!((k.u1 - k1.u1).abs() < 1e-15);
            assert!((k.u2 - 0.5 * f64::signum(x) - k1.u2).abs() < 1e-14);
        }
    }

    #[test]
    fn big_k_decay_bound() {
        // |K(z)| <= C e^{-0.1 |z|} for |z| > 1, C fitted on a sample and frozen
        const C: f64 = 6.0;
        for i in 0..200 {
            let x = -30.0 + 0.3 * i as f64;
            for j in 0..16 {
                let y = -PI + j as f64 * TWO_PI / 16.0;
                let r = x.hypot(y);
                if r > 1.0 {
                    assert!(kernel_K(x, y).abs() <= C * (-0.1 * r).exp(), "x={x} y={y}");
                }
            }
        }
    }
}
