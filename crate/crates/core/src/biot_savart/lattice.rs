use std::f64::consts::{LN_2, PI};

use super::kernels::KernelValue;
use crate::numeric::NeumaierSum;
use crate::{Error, Result, TWO_PI};

/// Truncated lattice sum and its tail bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeSum {
    pub value: KernelValue,
    pub tail_bound: f64,
}

/// Partial sum over |k| <= K of (-(b - 2 pi k), a) / (a^2 + (b - 2 pi k)^2),
/// the planar kernel summed over the periodic images.
pub fn lattice_sum_oracle(a: f64, b: f64, k_trunc: u64) -> Result<LatticeSum> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::domain("lattice_sum_oracle: non-finite argument"));
    }
    if k_trunc < 1 {
        return Err(Error::domain("lattice_sum_oracle: K_trunc must be >= 1"));
    }
    if a == 0.0 {
        if (b / TWO_PI).fract() == 0.0 {
            return Err(Error::Singular { x: a, y: b });
        }
        return Err(Error::domain("lattice_sum_oracle: a must be nonzero"));
    }
    let term = |k: f64| {
        let t = b - TWO_PI * k;
        let d = a * a + t * t;
        (-t / d, a / d)
    };
    let (mut s1, mut s2) = (NeumaierSum::new(), NeumaierSum::new());
    // outermost images first, each +-k pair added together
    for k in (1..=k_trunc).rev() {
        let (p1, p2) = term(k as f64);
        let (m1, m2) = term(-(k as f64));
        s1.add(p1 + m1);
        s2.add(p2 + m2);
    }
    let (c1, c2) = term(0.0);
    s1.add(c1);
    s2.add(c2);
    // The k-th pair is O(1/k^2); comparing the tail with the integral of
    // dk/k^2 gives this bound.
    let tail_bound = 2.0 * a.abs().max((b - PI).abs()).max(1.0) / (PI * k_trunc as f64);
    Ok(LatticeSum { value: KernelValue::new(s1.value(), s2.value()), tail_bound })
}

/// Integral over one period of log(cosh a - cos b) db = 2 pi (|a| - log 2).
pub fn fiber_log_integral(a: f64) -> f64 {
    TWO_PI * (a.abs() - LN_2)
}
