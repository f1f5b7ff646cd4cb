use super::spline::{arc_length, PeriodicSpline};
use crate::geometry::{wrap_angle, Contour};
use crate::{Error, Result, TWO_PI};

/// Redistributes the nodes of `c` at arc-length spacing close to `target`
/// along a periodic cubic spline through the old nodes. The first node is
/// kept.
pub fn remesh(c: &Contour, target: f64) -> Result<Contour> {
    let n = c.len();
    if n < 3 {
        return Err(Error::geometry(format!("contour with {n} nodes cannot be remeshed")));
    }
    if !(target > 0.0 && target.is_finite()) {
        return Err(Error::domain(format!("node spacing {target} must be positive")));
    }
    let pts = c.unwrapped();
    let w = c.winding() as f64;
    // chord-length parameter over one period
    let mut s = Vec::with_capacity(n + 1);
    s.push(0.0);
    for k in 0..n {
        let (a, b) = (pts[k], pts[k + 1]);
        s.push(s[k] + (b.0 - a.0).hypot(b.1 - a.1));
    }
    let period = s[n];
    let knots = &s[..n];
    let xs: Vec<f64> = pts[..n].iter().map(|p| p.0).collect();
    // y minus its winding trend is periodic in s
    let trend = |t: f64| TWO_PI * w * t / period;
    let ys: Vec<f64> = pts[..n].iter().zip(knots).map(|(p, &t)| p.1 - trend(t)).collect();
    let sx = PeriodicSpline::new(knots, &xs, period);
    let sy_per = PeriodicSpline::new(knots, &ys, period);
    let dy = TWO_PI * w / period;
    // arc length of the spline curve: integrand uses y' = per' + trend'
    let y_full = TrendSpline { per: &sy_per, slope: dy };
    let mut cum = Vec::with_capacity(n + 1);
    cum.push(0.0);
    for k in 0..n {
        let (a, b) = (s[k], s[k + 1]);
        cum.push(cum[k] + y_full.arc(&sx, a, b));
    }
    let total = cum[n];
    let m = ((total / target).round() as usize).max(3);
    let mut xy = Vec::with_capacity(m);
    for j in 0..m {
        let goal = total * j as f64 / m as f64;
        let k = match cum.binary_search_by(|v| v.total_cmp(&goal)) {
            Ok(k) => k.min(n - 1),
            Err(k) => k - 1,
        };
        // invert arc length on [s_k, s_k+1] by Newton with bisection guard
        let (mut lo, mut hi) = (s[k], s[k + 1]);
        let mut t = lo + (hi - lo) * (goal - cum[k]) / (cum[k + 1] - cum[k]).max(f64::MIN_POSITIVE);
        for _ in 0..50 {
            let f = cum[k] + y_full.arc(&sx, s[k], t) - goal;
            if f.abs() <= 1e-14 * total {
                break;
            }
            if f > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let speed = sx.deriv(t).hypot(y_full.deriv(t));
            let next = t - f / speed;
            t = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
        }
        if j == 0 {
            t = 0.0;
        }
        xy.push((sx.eval(t), wrap_angle(sy_per.eval(t) + trend(t))));
    }
    Contour::from_xy(&xy, c.winding(), c.orientation())
}

struct TrendSpline<'a> {
    per: &'a PeriodicSpline,
    slope: f64,
}

impl TrendSpline<'_> {
    fn deriv(&self, t: f64) -> f64 {
        self.per.deriv(t) + self.slope
    }

    fn arc(&self, sx: &PeriodicSpline, a: f64, b: f64) -> f64 {
        if self.slope == 0.0 {
            return arc_length(sx, self.per, a, b);
        }
        crate::numeric::gauss_legendre(8).apply(a, b, |t| sx.deriv(t).hypot(self.deriv(t)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Patch;
    use std::f64::consts::PI;

    fn circle(n: usize, warp: f64) -> Contour {
        let xy: Vec<(f64, f64)> = (0..n)
            .map(|k| {
                let u = TWO_PI * k as f64 / n as f64;
                let t = u + warp * u.sin();
                (t.cos(), t.sin())
            })
            .collect();
        Contour::from_xy(&xy, 0, 1).unwrap()
    }

    #[test]
    fn uniform_circle_is_fixed() {
        let c = circle(64, 0.0);
        let chord = 2.0 * (PI / 64.0).sin();
        let r = remesh(&c, chord).unwrap();
        assert_eq!(r.len(), 64);
        for (a, b) in c.nodes().iter().zip(r.nodes()) {
            assert!((a.x - b.x).abs() < 1e-9 && wrap_angle(a.y() - b.y()).abs() < 1e-9);
        }
    }

    #[test]
    fn nonuniform_circle_becomes_uniform() {
        // spacing varies 2:1 around the circle
        let c = circle(120, 1.0 / 3.0);
        let r = remesh(&c, TWO_PI / 100.0).unwrap();
        let segs = r.segments();
        let lens: Vec<f64> = segs.iter().map(|s| s.length()).collect();
        let mean = lens.iter().sum::<f64>() / lens.len() as f64;
        for l in &lens {
            assert!((l - mean).abs() < 0.01 * mean);
        }
        // chord sagitta bound: n c^3 kappa / 12 below the circle area
        let c3: f64 = lens.iter().map(|l| l * l * l).sum();
        assert!((r.signed_area() - PI).abs() <= 1.1 * c3 / 12.0);
    }

    #[test]
    fn straight_winding_contour_stays_straight() {
        let p = Patch::rectangle(-2.5, 2.5, 17).unwrap();
        for c in p.contours() {
            let r = remesh(c, 0.1).unwrap();
            let x0 = c.nodes()[0].x;
            assert!(r.nodes().iter().all(|q| q.x == x0));
            assert_eq!(r.winding(), c.winding());
            assert!((r.length() - TWO_PI).abs() < 1e-12);
        }
    }

    #[test]
    fn triangle_remeshes() {
        let c = Contour::from_xy(&[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)], 0, 1).unwrap();
        let r = remesh(&c, 0.1).unwrap();
        assert!(r.len() > 30);
        assert!(remesh(&c, 0.0).is_err());
    }
}
