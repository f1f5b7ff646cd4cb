use std::f64::consts::PI;

use super::point::{wrap, StripPoint};
use crate::{Error, Result, TWO_PI};

/// Straight piece of a contour in unwrapped coordinates: `y0` is the
/// reduced start angle and `y1 = y0 + dy` with |dy| < pi.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Segment {
    pub fn length(&self) -> f64 {
        (self.x1 - self.x0).hypot(self.y1 - self.y0)
    }
}

/// Closed polygonal contour on the strip. The patch lies to the left of
/// the node order when `orientation` is +1 and to the right when -1.
#[derive(Debug, Clone, PartialEq)]
pub struct Contour {
    nodes: Vec<StripPoint>,
    winding: i32,
    orientation: i32,
}

impl Contour {
    pub fn new(nodes: Vec<StripPoint>, winding: i32, orientation: i32) -> Result<Self> {
        if nodes.len() < 3 {
            return Err(Error::geometry(format!(
                "contour needs at least 3 nodes, got {}",
                nodes.len()
            )));
        }
        if !(-1..=1).contains(&winding) {
            return Err(Error::geometry(format!("winding {winding} not in {{-1, 0, 1}}")));
        }
        if orientation != 1 && orientation != -1 {
            return Err(Error::geometry(format!("orientation {orientation} not +1 or -1")));
        }
        let n = nodes.len();
        let mut total = 0.0;
        for i in 0..n {
            let dy = wrap(nodes[(i + 1) % n].y() - nodes[i].y());
            if dy.abs() >= PI * (1.0 - 1e-12) {
                return Err(Error::geometry(format!(
                    "nodes {i} and {} are half a period apart in y",
                    (i + 1) % n
                )));
            }
            total += dy;
        }
        let expect = TWO_PI * winding as f64;
        if (total - expect).abs() > 1e-6 {
            return Err(Error::geometry(format!(
                "y-increment {total} does not match winding {winding}"
            )));
        }
        Ok(Self { nodes, winding, orientation })
    }

    pub fn from_xy(xy: &[(f64, f64)], winding: i32, orientation: i32) -> Result<Self> {
        let nodes = xy
            .iter()
            .map(|&(x, y)| StripPoint::new(x, y))
            .collect::<Result<Vec<_>>>()?;
        Self::new(nodes, winding, orientation)
    }

    pub fn nodes(&self) -> &[StripPoint] {
        &self.nodes
    }

    pub fn winding(&self) -> i32 {
        self.winding
    }

    pub fn orientation(&self) -> i32 {
        self.orientation
    }

    /// Winding of the traversal with the patch on the left.
    pub fn effective_winding(&self) -> i32 {
        self.winding * self.orientation
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Unwrapped node coordinates starting at node 0, closing point
    /// included (shifted by 2 pi winding).
    pub fn unwrapped(&self) -> Vec<(f64, f64)> {
        let n = self.nodes.len();
        let mut out = Vec::with_capacity(n + 1);
        let mut y = self.nodes[0].y();
        out.push((self.nodes[0].x, y));
        for i in 0..n {
            let next = &self.nodes[(i + 1) % n];
            y += wrap(next.y() - self.nodes[i].y());
            out.push((next.x, y));
        }
        out
    }

    pub fn segments(&self) -> Vec<Segment> {
        let n = self.nodes.len();
        (0..n)
            .map(|i| {
                let a = &self.nodes[i];
                let b = &self.nodes[(i + 1) % n];
                Segment {
                    x0: a.x,
                    y0: a.y(),
                    x1: b.x,
                    y1: a.y() + wrap(b.y() - a.y()),
                }
            })
            .collect()
    }

    pub fn length(&self) -> f64 {
        self.segments().iter().map(Segment::length).sum()
    }

    /// Orientation-weighted integral of x dy along the contour.
    pub fn signed_area(&self) -> f64 {
        let s: f64 = self
            .segments()
            .iter()
            .map(|s| 0.5 * (s.x0 + s.x1) * (s.y1 - s.y0))
            .sum();
        self.orientation as f64 * s
    }

    /// Orientation-weighted integral of x^2/2 dy (the first x-moment).
    pub fn signed_moment_x(&self) -> f64 {
        let s: f64 = self
            .segments()
            .iter()
            .map(|s| (s.x0 * s.x0 + s.x0 * s.x1 + s.x1 * s.x1) * (s.y1 - s.y0) / 6.0)
            .sum();
        self.orientation as f64 * s
    }

    /// Orientation-weighted integral of x|x|/2 dy, so that the patch sum is
    /// the integral of |x| over the patch.
    pub fn signed_abs_moment_x(&self) -> f64 {
        let s: f64 = self
            .segments()
            .iter()
            .map(|s| {
                let dy = s.y1 - s.y0;
                if s.x0 * s.x1 >= 0.0 {
                    let sg = if s.x0 + s.x1 >= 0.0 { 1.0 } else { -1.0 };
                    sg * (s.x0 * s.x0 + s.x0 * s.x1 + s.x1 * s.x1) * dy / 6.0
                } else {
                    let t = s.x0 / (s.x0 - s.x1);
                    (s.x0 * s.x0.abs() * t + s.x1 * s.x1.abs() * (1.0 - t)) * dy / 6.0
                }
            })
            .sum();
        self.orientation as f64 * s
    }

    /// Orientation-weighted integral of min(x, t) dy, so that the patch sum
    /// is the area of the part with x < t.
    pub fn signed_clipped_area(&self, t: f64) -> f64 {
        let s: f64 = self
            .segments()
            .iter()
            .map(|s| {
                let dy = s.y1 - s.y0;
                let (a, b) = (s.x0.min(t), s.x1.min(t));
                if (s.x0 - t) * (s.x1 - t) >= 0.0 {
                    0.5 * (a + b) * dy
                } else {
                    // part below t has the mean (x_low + t) / 2
                    let tau = (t - s.x0) / (s.x1 - s.x0);
                    let (below, xl) = if s.x0 < t { (tau, s.x0) } else { (1.0 - tau, s.x1) };
                    (below * 0.5 * (xl + t) + (1.0 - below) * t) * dy
                }
            })
            .sum();
        self.orientation as f64 * s
    }

    /// Same contour with every node mapped by `f`; winding and orientation
    /// are unchanged.
    pub fn map_nodes(&self, f: impl Fn(f64, f64) -> (f64, f64)) -> Result<Self> {
        let xy: Vec<(f64, f64)> = self.nodes.iter().map(|p| f(p.x, p.y())).collect();
        Self::from_xy(&xy, self.winding, self.orientation)
    }

    /// Mirror image under x -> -x. Node order is reversed so the patch stays
    /// on the same side of the traversal.
    pub fn reflect_x(&self) -> Result<Self> {
        let xy: Vec<(f64, f64)> = self.nodes.iter().rev().map(|p| (-p.x, p.y())).collect();
        Self::from_xy(&xy, -self.winding, self.orientation)
    }

    pub fn max_abs_x(&self) -> f64 {
        self.nodes.iter().fold(0.0, |m, p| m.max(p.x.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_half_period_jump() {
        let r = Contour::from_xy(&[(0.0, -3.0), (0.0, 0.1415926), (1.0, 0.0)], 0, 1);
        assert!(r.is_ok());
        let r = Contour::from_xy(&[(0.0, 0.0), (0.0, PI), (1.0, 0.0)], 0, 1);
        assert!(r.is_err());
    }

    #[test]
    fn winding_must_match_increment() {
        let up: Vec<(f64, f64)> = (0..8).map(|k| (1.0, -PI + k as f64 * PI / 4.0)).collect();
        assert!(Contour::from_xy(&up, 1, 1).is_ok());
        assert!(Contour::from_xy(&up, 0, 1).is_err());
        assert!(Contour::from_xy(&up, -1, 1).is_err());
    }

    #[test]
    fn square_area_and_moment() {
        let sq = [(1.0, 0.0), (2.0, 0.0), (2.0, 1.0), (1.0, 1.0)];
        let c = Contour::from_xy(&sq, 0, 1).unwrap();
        assert!((c.signed_area() - 1.0).abs() < 1e-15);
        assert!((c.signed_moment_x() - 1.5).abs() < 1e-15);
        assert!((c.reflect_x().unwrap().signed_area() - 1.0).abs() < 1e-15);
    }
}
