use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::numeric::NeumaierSum;
use crate::{Error, Result};

/// Finite union of sorted, disjoint closed intervals of positive length.
/// Touching intervals are merged on construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct IntervalSet {
    intervals: Vec<(f64, f64)>,
}

impl TryFrom<Vec<(f64, f64)>> for IntervalSet {
    type Error = Error;
    fn try_from(v: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<IntervalSet> for Vec<(f64, f64)> {
    fn from(s: IntervalSet) -> Self {
        s.intervals
    }
}

impl IntervalSet {
    pub fn new(mut v: Vec<(f64, f64)>) -> Result<Self> {
        for &(a, b) in &v {
            if !(a.is_finite() && b.is_finite() && a < b) {
                return Err(Error::domain(format!("interval [{a}, {b}] is not a finite positive-length interval")));
            }
        }
        v.sort_by(|p, q| p.0.total_cmp(&q.0));
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(v.len());
        for (a, b) in v {
            if let Some(last) = out.last_mut() {
                if a < last.1 {
                    return Err(Error::domain(format!(
                        "intervals [{}, {}] and [{a}, {b}] overlap",
                        last.0, last.1
                    )));
                }
                if a == last.1 {
                    last.1 = b;
                    continue;
                }
            }
            out.push((a, b));
        }
        Ok(Self { intervals: out })
    }

    pub fn empty() -> Self {
        Self { intervals: Vec::new() }
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Total length.
    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(|(a, b)| b - a).collect::<NeumaierSum>().value()
    }

    /// Lengths on (-inf, 0] and [0, inf).
    pub fn half_line_masses(&self) -> (f64, f64) {
        let mut neg = NeumaierSum::new();
        let mut pos = NeumaierSum::new();
        for &(a, b) in &self.intervals {
            if a < 0.0 {
                neg.add(b.min(0.0) - a);
            }
            if b > 0.0 {
                pos.add(b - a.max(0.0));
            }
        }
        (neg.value(), pos.value())
    }

    /// Equal mass on both half-lines, up to `tol`.
    pub fn is_centered(&self, tol: f64) -> bool {
        let (n, p) = self.half_line_masses();
        (n - p).abs() <= tol
    }

    pub fn reflect(&self) -> Self {
        Self {
            intervals: self.intervals.iter().rev().map(|&(a, b)| (-b, -a)).collect(),
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|&(a, b)| a <= x && x <= b)
    }

    /// Random centered set with `n_pos` and `n_neg` intervals on each side
    /// and total length 2L. With probability 1/4 the innermost intervals
    /// touch 0 and merge into one interval across the origin.
    pub fn random_centered<R: Rng>(rng: &mut R, l: f64, n_pos: usize, n_neg: usize) -> Self {
        let side = |rng: &mut R, n: usize, touch: bool| -> Vec<(f64, f64)> {
            let n = n.max(1);
            let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
            let tot: f64 = w.iter().sum();
            let mut x = if touch { 0.0 } else { rng.gen_range(0.0..l) };
            let mut out = Vec::with_capacity(n);
            for (k, wk) in w.iter().enumerate() {
                if k > 0 {
                    x += rng.gen_range(0.01..0.6) * l;
                }
                let len = l * wk / tot;
                out.push((x, x + len));
                x += len;
            }
            out
        };
        let touch = rng.gen_bool(0.25);
        let pos = side(rng, n_pos, touch);
        let neg = side(rng, n_neg, touch);
        let mut all: Vec<(f64, f64)> = neg.into_iter().map(|(a, b)| (-b, -a)).collect();
        all.extend(pos);
        Self::new(all).expect("generated intervals are disjoint")
    }
}

/// Phi of a sorted list of non-overlapping intervals (touching allowed):
/// sum of l^3/3 plus 2 l_i l_j (m_j - m_i) over ordered pairs.
pub(crate) fn phi_raw(v: &[(f64, f64)]) -> f64 {
    let mut s = NeumaierSum::new();
    let (mut s0, mut s1) = (NeumaierSum::new(), NeumaierSum::new());
    for &(a, b) in v {
        let l = b - a;
        let m = 0.5 * (a + b);
        s.add(l * l * l / 3.0);
        s.add(2.0 * l * m * s0.value());
        s.add(-2.0 * l * s1.value());
        s0.add(l);
        s1.add(l * m);
    }
    s.value()
}

/// Phi(chi_J) = double integral of |x1 - x2| over J x J, in closed form.
pub fn phi_intervals(j: &IntervalSet) -> f64 {
    phi_raw(&j.intervals)
}

/// Integral of ||x| - L| over [a, b], exact (the weight is linear between
/// the breakpoints -L, 0, L).
pub(crate) fn abs_weight_integral(a: f64, b: f64, l: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let w = |x: f64| (x.abs() - l).abs();
    let mut pts = vec![a];
    pts.extend([-l, 0.0, l].into_iter().filter(|&t| t > a && t < b));
    pts.push(b);
    pts.windows(2)
        .map(|p| 0.5 * (p[1] - p[0]) * (w(p[0]) + w(p[1])))
        .collect::<NeumaierSum>()
        .value()
}
