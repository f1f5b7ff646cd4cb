use std::f64::consts::{LN_2, PI};
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use super::kernels::{d_factor, gamma, KernelValue};
use crate::geometry::{Patch, StripPoint};
use crate::numeric::{gauss_legendre, integrate, NeumaierSum};
use crate::{par, Error, Result};

use crate::geometry::wrap_angle as wrap;

/// x-antiderivative of the first kernel component's y-derivative of Gamma:
/// d/ds atan(tanh(s/2) / tan(w/2)) = sin w / (2 (cosh s - cos w)).
#[inline]
fn atan_kernel(s: f64, w: f64) -> f64 {
    let t = (0.5 * w).tan();
    if t == 0.0 {
        return 0.0;
    }
    ((0.5 * s).tanh() / t).atan()
}

/// Integrands (per unit angle) of u1 and u2 along one horizontal line:
/// the x-integrals over the fibre spans are exact.
#[inline]
fn line_terms(z1: f64, w: f64, spans: &[(f64, f64)]) -> (f64, f64) {
    let (mut u1, mut u2) = (0.0, 0.0);
    for &(a, b) in spans {
        u1 -= atan_kernel(z1 - a, w) - atan_kernel(z1 - b, w);
        u2 += gamma(z1 - a, w) - gamma(z1 - b, w);
    }
    (u1, u2)
}

/// Velocity u = k * chi_E at z by quadrature on the patch mask.
///
/// Along each horizontal line the x-integral of k over the patch fibre is
/// done in closed form (Gamma differences for u2, an arctangent
/// antiderivative for u1). The angle integral is the midpoint rule over
/// mask rows, except for the rows within 2.5 cells of z, which are
/// integrated adaptively with the fibre recomputed from the contours.
pub fn velocity_quadrature(p: &Patch, z: StripPoint) -> Result<KernelValue> {
    let (z1, z2) = (z.x, z.y());
    if !(z1.is_finite() && z2.is_finite()) {
        return Err(Error::domain("velocity_quadrature: non-finite evaluation point"));
    }
    let mask = p.mask()?;
    let g = *mask.grid();
    let rz = mask.row_of(z2);
    let near_rows = 3usize.min(g.ny / 2);
    let is_near = |r: usize| {
        let d = r.abs_diff(rz);
        d.min(g.ny - d) < near_rows
    };
    let (mut s1, mut s2) = (NeumaierSum::new(), NeumaierSum::new());
    for r in 0..g.ny {
        let spans = mask.spans(r);
        if is_near(r) {
            continue;
        }
        if spans.is_empty() {
            continue;
        }
        let w = wrap(z2 - g.y_center(r));
        let (a, b) = line_terms(z1, w, spans);
        s1.add(a * g.hy);
        s2.add(b * g.hy);
    }
    for r in (0..g.ny).filter(|&r| is_near(r)) {
        let yb = g.y_bottom(r);
        let yt = yb + g.hy;
        // image of z2 closest to this row
        let zr = yb + 0.5 * g.hy + wrap(z2 - (yb + 0.5 * g.hy));
        let breaks = [zr];
        let f1 = |eta: f64| line_terms(z1, zr - eta, &mask.spans_at(r, eta)).0;
        let f2 = |eta: f64| line_terms(z1, zr - eta, &mask.spans_at(r, eta)).1;
        s1.add(integrate(f1, yb, yt, &breaks, 1e-12 * g.hy, 1e-12).value);
        s2.add(integrate(f2, yb, yt, &breaks, 1e-12 * g.hy, 1e-12).value);
    }
    Ok(KernelValue::new(s1.value(), s2.value()))
}

/// Smooth part of Gamma: Gamma(w) - 1/2 log |w|^2, valid near w = 0.
#[inline]
fn gamma_smooth(x: f64, y: f64) -> f64 {
    let r2 = x * x + y * y;
    if r2 == 0.0 {
        return -0.5 * LN_2;
    }
    let (_, d) = d_factor(x, y);
    0.5 * (x.abs() - LN_2 + (d / r2).ln())
}

/// Integral of 1/2 log(s^2 + a^2) over s in [s0, s1].
#[inline]
fn log_segment_integral(s0: f64, s1: f64, a: f64) -> f64 {
    let f = |s: f64| {
        let r2 = s * s + a * a;
        let l = if r2 > 0.0 { s * r2.ln() } else { 0.0 };
        let t = if a != 0.0 { 2.0 * a * (s / a).atan() } else { 0.0 };
        0.5 * (l - 2.0 * s + t)
    };
    f(s1) - f(s0)
}

/// Velocity at z from the boundary integral u(z) = -sum over contours of
/// the integral of Gamma(z - xi) d xi, traversed with the patch on the
/// left. Segments close to z use the exact logarithmic integral plus
/// Gauss quadrature of the smooth remainder.
pub fn velocity_contour(p: &Patch, z: StripPoint) -> Result<KernelValue> {
    ContourSegments::new(p).velocity(z)
}

/// Boundary segments of a patch prepared for repeated contour-method
/// evaluation.
#[derive(Debug, Clone)]
pub struct ContourSegments {
    // (x0, y0, x1, y1, orientation)
    segs: Vec<(f64, f64, f64, f64, f64)>,
    net: i32,
    bounding_x: f64,
}

impl ContourSegments {
    pub fn new(p: &Patch) -> Self {
        let mut segs = Vec::new();
        for c in p.contours() {
            let o = c.orientation() as f64;
            segs.extend(c.segments().iter().map(|s| (s.x0, s.y0, s.x1, s.y1, o)));
        }
        let net = p.contours().iter().map(|c| c.effective_winding()).sum();
        Self { segs, net, bounding_x: p.bounding_x() }
    }

    pub fn velocity(&self, z: StripPoint) -> Result<KernelValue> {
        let (z1, z2) = (z.x, z.y());
        let (mut s1, mut s2) = (NeumaierSum::new(), NeumaierSum::new());
        let g3 = gauss_legendre(3);
        let g6 = gauss_legendre(6);
        let g8 = gauss_legendre(8);
        for &(x0, y0, x1, y1, o) in &self.segs {
            let (dx, dy) = (x1 - x0, y1 - y0);
            let len = dx.hypot(dy);
            if len == 0.0 {
                continue;
            }
            let (mx, my) = (0.5 * (x0 + x1), 0.5 * (y0 + y1));
            // z relative to the segment midpoint, nearest periodic image
            let (wx, wy) = (z1 - mx, wrap(z2 - my));
            let dist = wx.hypot(wy);
            let (tx, ty) = (dx / len, dy / len);
            let integral = if dist < 2.0 * len {
                // w(s) = (z - M) - s t for s in [-len/2, len/2]
                let s0 = wx * tx + wy * ty;
                let a = wx * ty - wy * tx;
                let log_part = log_segment_integral(-0.5 * len - s0, 0.5 * len - s0, a);
                let smooth = g8.apply(-0.5 * len, 0.5 * len, |s| {
                    gamma_smooth(wx - s * tx, wy - s * ty)
                });
                log_part + smooth
            } else {
                let rule = if dist < 8.0 * len { g6 } else { g3 };
                rule.apply(-0.5 * len, 0.5 * len, |s| gamma(wx - s * tx, wy - s * ty))
            };
            s1.add(-o * integral * tx);
            s2.add(-o * integral * ty);
        }
        if self.net != 0 {
            let n = self.net as f64;
            let xv = -self.bounding_x * n;
            s2.add(n * PI * ((z1 - xv).abs() - LN_2));
        }
        let u = KernelValue::new(s1.value(), s2.value());
        if !u.is_finite() {
            return Err(Error::Velocity(format!("non-finite contour velocity at ({z1}, {z2})")));
        }
        Ok(u)
    }
}

/// Relative tolerance of the contour-method validation gate.
pub const CONTOUR_GATE_TOL: f64 = 1e-3;

/// Runs the validation suite comparing `velocity_contour` with
/// `velocity_quadrature`. Returns the worst scaled discrepancy
/// |u_c - u_q| / max(|u_q|, 1).
pub fn validate_contour_method() -> Result<f64> {
    let cases: Vec<(Patch, Vec<(f64, f64)>)> = vec![
        (
            Patch::rectangle(-1.0, 1.0, 64)?,
            vec![(0.0, 0.0), (0.5, 0.0), (0.9, 2.0), (1.7, -1.0), (-3.0, 0.4)],
        ),
        (
            Patch::disc(0.0, 0.0, 1.0, 128)?.with_cell_size(0.005)?,
            vec![(10.0, 0.0), (0.3, 0.2), (1.5, -0.7), (0.0, 2.5)],
        ),
        (
            Patch::sinusoidal(1.0, 0.2, 96)?,
            vec![(0.5, 1.0), (1.4, -2.0), (-0.2, 3.0)],
        ),
    ];
    let mut worst = 0.0f64;
    for (p, pts) in &cases {
        let p = p.with_bounding_x(p.bounding_x().max(11.0))?;
        for &(x, y) in pts {
            let z = StripPoint::new(x, y)?;
            let q = velocity_quadrature(&p, z)?;
            let c = velocity_contour(&p, z)?;
            worst = worst.max((c - q).norm() / q.norm().max(1.0));
        }
    }
    Ok(worst)
}

/// Whether the contour method passed its validation gate (evaluated once
/// per process).
pub fn contour_method_validated() -> bool {
    static GATE: OnceLock<bool> = OnceLock::new();
    *GATE.get_or_init(|| matches!(validate_contour_method(), Ok(w) if w <= CONTOUR_GATE_TOL))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VelocityMethod {
    Quadrature,
    Contour,
}

/// Velocity induced by a patch with a chosen evaluator.
#[derive(Debug, Clone)]
pub struct VelocityField {
    pub source: Arc<Patch>,
    pub method: VelocityMethod,
    pub h: f64,
}

impl VelocityField {
    /// Uses the contour method only if requested and validated.
    pub fn new(source: Patch, requested: VelocityMethod) -> Self {
        let method = match requested {
            VelocityMethod::Contour if contour_method_validated() => VelocityMethod::Contour,
            _ => VelocityMethod::Quadrature,
        };
        let h = source.cell_size();
        Self { source: Arc::new(source), method, h }
    }

    pub fn eval(&self, z: StripPoint) -> Result<KernelValue> {
        match self.method {
            VelocityMethod::Quadrature => velocity_quadrature(&self.source, z),
            VelocityMethod::Contour => velocity_contour(&self.source, z),
        }
    }

    pub fn eval_many(&self, zs: &[StripPoint]) -> Result<Vec<KernelValue>> {
        match self.method {
            VelocityMethod::Quadrature => {
                self.source.mask()?;
                par::map_slice(zs, |&z| self.eval(z)).into_iter().collect()
            }
            VelocityMethod::Contour => {
                let segs = ContourSegments::new(&self.source);
                par::map_slice(zs, |&z| segs.velocity(z)).into_iter().collect()
            }
        }
    }

    /// Circulation around the axis-aligned square of side `s` centred at
    /// (cx, cy), by Gauss quadrature on each edge.
    pub fn circulation_square(&self, cx: f64, cy: f64, s: f64) -> Result<f64> {
        let rule = gauss_legendre(16);
        let hs = 0.5 * s;
        let mut total = 0.0;
        let edges = [
            ((cx - hs, cy - hs), (1.0, 0.0)),
            ((cx + hs, cy - hs), (0.0, 1.0)),
            ((cx + hs, cy + hs), (-1.0, 0.0)),
            ((cx - hs, cy + hs), (0.0, -1.0)),
        ];
        for ((x0, y0), (tx, ty)) in edges {
            for (t, w) in rule.mapped(0.0, s) {
                let z = StripPoint::new(x0 + t * tx, y0 + t * ty)?;
                let u = self.eval(z)?;
                total += w * (u.u1 * tx + u.u2 * ty);
            }
        }
        Ok(total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::TWO_PI;

    fn pt(x: f64, y: f64) -> StripPoint {
        StripPoint::new(x, y).unwrap()
    }

    #[test]
    fn log_segment_integral_matches_quadrature() {
        for &(s0, s1, a) in &[(-0.3, 0.4, 0.1), (0.2, 1.0, 0.0), (-1.0, 0.5, -0.7)] {
            let q = integrate(|s| 0.5 * (s * s + a * a).ln(), s0, s1, &[0.0], 1e-14, 1e-14);
            assert!((log_segment_integral(s0, s1, a) - q.value).abs() < 1e-12);
        }
    }

    #[test]
    fn rectangle_steady_velocity() {
        let l = 1.0;
        let p = Patch::rectangle(-l, l, 32).unwrap();
        for &(x, y) in &[(0.0, 0.3), (0.5, -2.0), (-0.8, 3.0), (2.0, 0.0), (-3.0, 1.0)] {
            let u = velocity_quadrature(&p, pt(x, y)).unwrap();
            let expect = TWO_PI * x.clamp(-l, l);
            assert!(u.u1.abs() < 1e-6, "u1={} at ({x},{y})", u.u1);
            assert!((u.u2 - expect).abs() < 2e-6 * expect.abs().max(1.0), "{} vs {expect}", u.u2);
            let c = velocity_contour(&p, pt(x, y)).unwrap();
            assert!(c.u1.abs() < 1e-12);
            assert!((c.u2 - expect).abs() < 1e-9 * expect.abs().max(1.0), "{} vs {expect}", c.u2);
        }
    }

    #[test]
    fn centre_of_rectangle_is_at_rest() {
        let p = Patch::rectangle(-1.0, 1.0, 16).unwrap();
        let u = velocity_quadrature(&p, pt(0.0, 0.7)).unwrap();
        assert!(u.norm() < 1e-9, "{u:?}");
    }

    #[test]
    fn gate_passes() {
        let w = validate_contour_method().unwrap();
        assert!(w <= CONTOUR_GATE_TOL, "worst discrepancy {w}");
        assert!(contour_method_validated());
    }

    #[test]
    fn circulation_equals_two_pi_enclosed_area() {
        let p = Patch::disc(0.0, 0.0, 0.5, 64).unwrap();
        let f = VelocityField::new(p, VelocityMethod::Contour);
        // square of side 0.4 inside the disc
        let c = f.circulation_square(0.1, 0.0, 0.4).unwrap();
        assert!((c - TWO_PI * 0.16).abs() < 1e-6, "{c}");
        // square outside the patch
        let c = f.circulation_square(2.0, 0.0, 0.4).unwrap();
        assert!(c.abs() < 1e-8, "{c}");
    }
}
