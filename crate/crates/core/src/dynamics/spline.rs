//! Periodic cubic interpolation on non-uniform knots.

use crate::numeric::gauss_legendre;

/// Periodic C2 cubic spline through (t_i, f_i), i = 0..n, period `period`.
#[derive(Debug, Clone)]
pub struct PeriodicSpline {
    t: Vec<f64>,
    f: Vec<f64>,
    m: Vec<f64>,
    period: f64,
}

impl PeriodicSpline {
    /// Knots must be strictly increasing with t_n - t_0 < period.
    pub fn new(t: &[f64], f: &[f64], period: f64) -> Self {
        let n = t.len();
        let hs: Vec<f64> = (0..n)
            .map(|i| if i + 1 < n { t[i + 1] - t[i] } else { t[0] + period - t[n - 1] })
            .collect();
        let fi = |i: usize| f[i % n];
        // cyclic tridiagonal system for the second derivatives
        let mut a = vec![0.0; n];
        let mut b = vec![0.0; n];
        let mut c = vec![0.0; n];
        let mut r = vec![0.0; n];
        for i in 0..n {
            let hp = hs[(i + n - 1) % n];
            let hn = hs[i];
            a[i] = hp / 6.0;
            b[i] = (hp + hn) / 3.0;
            c[i] = hn / 6.0;
            r[i] = (fi(i + 1) - f[i]) / hn - (f[i] - f[(i + n - 1) % n]) / hp;
        }
        let m = solve_cyclic(&a, &b, &c, &r);
        Self { t: t.to_vec(), f: f.to_vec(), m, period }
    }

    fn locate(&self, x: f64) -> (usize, f64, f64) {
        let n = self.t.len();
        let t0 = self.t[0];
        let xr = t0 + (x - t0).rem_euclid(self.period);
        let i = match self.t.binary_search_by(|v| v.total_cmp(&xr)) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        let h = if i + 1 < n { self.t[i + 1] - self.t[i] } else { t0 + self.period - self.t[i] };
        (i, (xr - self.t[i]) / h, h)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.t.len();
        let (i, u, h) = self.locate(x);
        let j = (i + 1) % n;
        let (f0, f1, m0, m1) = (self.f[i], self.f[j], self.m[i], self.m[j]);
        // linear part first so constant data stay exactly constant
        f0 + u * (f1 - f0) - h * h / 6.0 * u * (1.0 - u) * ((2.0 - u) * m0 + (1.0 + u) * m1)
    }

    pub fn deriv(&self, x: f64) -> f64 {
        let n = self.t.len();
        let (i, u, h) = self.locate(x);
        let j = (i + 1) % n;
        let (f0, f1, m0, m1) = (self.f[i], self.f[j], self.m[i], self.m[j]);
        (f1 - f0) / h - h / 6.0 * ((2.0 - 6.0 * u + 3.0 * u * u) * m0 + (1.0 - 3.0 * u * u) * m1)
    }
}

/// Solves the cyclic tridiagonal system a_i x_{i-1} + b_i x_i + c_i x_{i+1}
/// = r_i (indices mod n) by Sherman-Morrison.
fn solve_cyclic(a: &[f64], b: &[f64], c: &[f64], r: &[f64]) -> Vec<f64> {
    let n = b.len();
    if n == 1 {
        return vec![r[0] / (a[0] + b[0] + c[0])];
    }
    if n == 2 {
        let (p, q) = (b[0], a[0] + c[0]);
        let (s, u) = (a[1] + c[1], b[1]);
        let det = p * u - q * s;
        return vec![(r[0] * u - q * r[1]) / det, (p * r[1] - s * r[0]) / det];
    }
    let gamma = -b[0];
    let mut bb = b.to_vec();
    bb[0] -= gamma;
    bb[n - 1] -= a[0] * c[n - 1] / gamma;
    let x = thomas(a, &bb, c, r);
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = c[n - 1];
    let z = thomas(a, &bb, c, &u);
    let fact = (x[0] + a[0] * x[n - 1] / gamma) / (1.0 + z[0] + a[0] * z[n - 1] / gamma);
    x.iter().zip(&z).map(|(xi, zi)| xi - fact * zi).collect()
}

fn thomas(a: &[f64], b: &[f64], c: &[f64], r: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut cp = vec![0.0; n];
    let mut dp = vec![0.0; n];
    cp[0] = c[0] / b[0];
    dp[0] = r[0] / b[0];
    for i in 1..n {
        let den = b[i] - a[i] * cp[i - 1];
        cp[i] = c[i] / den;
        dp[i] = (r[i] - a[i] * dp[i - 1]) / den;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = dp[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = dp[i] - cp[i] * x[i + 1];
    }
    x
}

/// Arc length of the planar curve (X(s), Y(s)) over one knot interval,
/// 8-point Gauss.
pub(crate) fn arc_length(x: &PeriodicSpline, y: &PeriodicSpline, s0: f64, s1: f64) -> f64 {
    gauss_legendre(8).apply(s0, s1, |s| x.deriv(s).hypot(y.deriv(s)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    #[test]
    fn reproduces_trig_data() {
        let n = 40;
        let t: Vec<f64> = (0..n).map(|i| TAU * (i as f64 + 0.3 * (i % 3) as f64) / n as f64).collect();
        let f: Vec<f64> = t.iter().map(|x| x.sin() + 0.5 * (2.0 * x).cos()).collect();
        let s = PeriodicSpline::new(&t, &f, TAU);
        for k in 0..200 {
            let x = TAU * k as f64 / 200.0 - 1.0;
            let e = x.sin() + 0.5 * (2.0 * x).cos();
            assert!((s.eval(x) - e).abs() < 2e-4, "{x}");
            let d = x.cos() - (2.0 * x).sin();
            assert!((s.deriv(x) - d).abs() < 5e-3);
        }
        for (ti, fi) in t.iter().zip(&f) {
            assert!((s.eval(*ti) - fi).abs() < 1e-14);
        }
    }

    #[test]
    fn constant_data_stay_exact() {
        let t = [0.0, 0.7, 1.1, 2.9, 4.0];
        let s = PeriodicSpline::new(&t, &[8.0; 5], 6.0);
        for k in 0..50 {
            assert_eq!(s.eval(k as f64 * 0.13), 8.0);
        }
    }
}
