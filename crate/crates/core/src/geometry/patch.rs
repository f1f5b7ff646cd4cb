use std::f64::consts::PI;
use std::sync::OnceLock;

use super::contour::Contour;
use super::density::{Density1D, UniformGrid};
use super::intersect::find_self_intersection;
use super::mask::Mask;
use super::point::StripPoint;
use crate::{Error, Result, TWO_PI};

/// Default mask cell size.
pub const DEFAULT_CELL: f64 = 0.01;

/// A vortex patch: closed contours on the strip inside the band
/// |x| <= bounding_x, with a lazily rasterized mask of cell size `h`.
#[derive(Debug)]
pub struct Patch {
    contours: Vec<Contour>,
    bounding_x: f64,
    h: f64,
    mask: OnceLock<Mask>,
}

impl Clone for Patch {
    fn clone(&self) -> Self {
        let mask = OnceLock::new();
        if let Some(m) = self.mask.get() {
            let _ = mask.set(m.clone());
        }
        Self { contours: self.contours.clone(), bounding_x: self.bounding_x, h: self.h, mask }
    }
}

impl Patch {
    pub fn new(contours: Vec<Contour>, bounding_x: f64) -> Result<Self> {
        Self::with_cell(contours, bounding_x, DEFAULT_CELL)
    }

    pub fn with_cell(contours: Vec<Contour>, bounding_x: f64, h: f64) -> Result<Self> {
        if !(bounding_x > 0.0 && bounding_x.is_finite()) {
            return Err(Error::domain(format!("bounding_x {bounding_x} must be positive")));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::domain(format!("cell size {h} must be positive")));
        }
        for (k, c) in contours.iter().enumerate() {
            if c.max_abs_x() > bounding_x {
                return Err(Error::domain(format!(
                    "contour {k} reaches |x| = {} beyond bounding_x = {bounding_x}",
                    c.max_abs_x()
                )));
            }
        }
        let net: i32 = contours.iter().map(Contour::effective_winding).sum();
        if net.abs() > 1 {
            return Err(Error::geometry(format!("net winding {net} is not in {{-1, 0, 1}}")));
        }
        Ok(Self { contours, bounding_x, h, mask: OnceLock::new() })
    }

    pub fn empty(bounding_x: f64) -> Result<Self> {
        Self::new(Vec::new(), bounding_x)
    }

    pub fn contours(&self) -> &[Contour] {
        &self.contours
    }

    pub fn bounding_x(&self) -> f64 {
        self.bounding_x
    }

    pub fn cell_size(&self) -> f64 {
        self.h
    }

    /// Same contours with a different mask cell size.
    pub fn with_cell_size(&self, h: f64) -> Result<Self> {
        Self::with_cell(self.contours.clone(), self.bounding_x, h)
    }

    /// Same contours inside a different bounding band.
    pub fn with_bounding_x(&self, bounding_x: f64) -> Result<Self> {
        Self::with_cell(self.contours.clone(), bounding_x, self.h)
    }

    /// Replaces the contours, keeping band and cell size.
    pub fn with_contours(&self, contours: Vec<Contour>) -> Result<Self> {
        Self::with_cell(contours, self.bounding_x, self.h)
    }

    /// Rasterized mask, built on first use. Self-intersecting contours are
    /// rejected here.
    pub fn mask(&self) -> Result<&Mask> {
        if let Some(m) = self.mask.get() {
            return Ok(m);
        }
        self.check_simple()?;
        let m = Mask::build(&self.contours, self.bounding_x, self.h)?;
        Ok(self.mask.get_or_init(|| m))
    }

    pub fn check_simple(&self) -> Result<()> {
        if let Some((c1, s1, c2, s2)) = find_self_intersection(&self.contours) {
            return Err(Error::geometry(format!(
                "segment {s1} of contour {c1} crosses segment {s2} of contour {c2}"
            )));
        }
        Ok(())
    }

    pub(crate) fn net_winding(&self) -> i32 {
        self.contours.iter().map(Contour::effective_winding).sum()
    }

    /// Exact area of the polygonal patch (shoelace on the unwrapped
    /// contours, plus the virtual closure through x = -+bounding_x for a
    /// net winding).
    pub fn contour_area(&self) -> f64 {
        let net = self.net_winding() as f64;
        let xv = -self.bounding_x * net;
        let closure = xv * (-TWO_PI * net);
        self.contours.iter().map(Contour::signed_area).sum::<f64>() + closure
    }

    /// Exact first x-moment of the polygonal patch.
    pub fn contour_moment_x(&self) -> f64 {
        let net = self.net_winding() as f64;
        let xv = -self.bounding_x * net;
        let closure = 0.5 * xv * xv * (-TWO_PI * net);
        self.contours.iter().map(Contour::signed_moment_x).sum::<f64>() + closure
    }

    /// Exact integral of |x| over the polygonal patch.
    pub fn contour_abs_moment_x(&self) -> f64 {
        let net = self.net_winding() as f64;
        let xv = -self.bounding_x * net;
        let closure = 0.5 * xv * xv.abs() * (-TWO_PI * net);
        self.contours.iter().map(Contour::signed_abs_moment_x).sum::<f64>() + closure
    }

    /// Exact area of the part of the polygonal patch with x < t.
    pub fn contour_area_below(&self, t: f64) -> f64 {
        let net = self.net_winding() as f64;
        let xv = -self.bounding_x * net;
        let closure = xv.min(t) * (-TWO_PI * net);
        self.contours.iter().map(|c| c.signed_clipped_area(t)).sum::<f64>() + closure
    }

    pub fn perimeter(&self) -> f64 {
        self.contours.iter().map(Contour::length).sum()
    }

    /// Vertical average on the mask's own grid.
    pub fn span_density(&self) -> Result<Density1D> {
        let g = *self.mask()?.grid();
        super::density::vertical_average(self, &UniformGrid::new(g.x_min(), g.h, g.nx)?)
    }

    /// Shift by (a, 0).
    pub fn translate(&self, a: f64) -> Result<Self> {
        let contours = self
            .contours
            .iter()
            .map(|c| c.map_nodes(|x, y| (x + a, y)))
            .collect::<Result<Vec<_>>>()?;
        Self::with_cell(contours, self.bounding_x + a.abs(), self.h)
    }

    /// Mirror x -> -x.
    pub fn reflect_x(&self) -> Result<Self> {
        let contours = self
            .contours
            .iter()
            .map(Contour::reflect_x)
            .collect::<Result<Vec<_>>>()?;
        Self::with_cell(contours, self.bounding_x, self.h)
    }

    /// Union of patches with disjoint interiors.
    pub fn union(parts: &[Patch]) -> Result<Self> {
        let bx = parts.iter().fold(0.0f64, |m, p| m.max(p.bounding_x));
        let h = parts.iter().map(|p| p.h).fold(f64::INFINITY, f64::min);
        let contours = parts.iter().flat_map(|p| p.contours.iter().cloned()).collect();
        Self::with_cell(contours, bx, if h.is_finite() { h } else { DEFAULT_CELL })
    }

    /// [a, b] x T as two winding contours with `n` nodes each.
    pub fn rectangle(a: f64, b: f64, n: usize) -> Result<Self> {
        Self::from_profiles(|_| b, |_| a, n, default_band(a, b))
    }

    /// The region between two graphs x = left(y) < right(y) over T, as two
    /// winding contours sampled at `n` equally spaced angles.
    pub fn from_profiles(
        right: impl Fn(f64) -> f64,
        left: impl Fn(f64) -> f64,
        n: usize,
        bounding_x: f64,
    ) -> Result<Self> {
        let n = n.max(3);
        let ys: Vec<f64> = (0..n).map(|k| -PI + TWO_PI * k as f64 / n as f64).collect();
        let r: Vec<(f64, f64)> = ys.iter().map(|&y| (right(y), y)).collect();
        let l: Vec<(f64, f64)> = ys.iter().rev().map(|&y| (left(y), y)).collect();
        let contours = vec![Contour::from_xy(&r, 1, 1)?, Contour::from_xy(&l, -1, 1)?];
        Self::new(contours, bounding_x)
    }

    /// Rectangle [-L, L] x T with boundaries x = L + eps sin y and
    /// x = -L - eps cos y, rescaled in x so the polygon area is 4 pi L.
    pub fn sinusoidal(l: f64, eps: f64, n: usize) -> Result<Self> {
        let raw = Self::from_profiles(
            |y| l + eps * y.sin(),
            |y| -l - eps * y.cos(),
            n,
            default_band(-l - eps.abs(), l + eps.abs()),
        )?;
        let s = 4.0 * PI * l / raw.contour_area();
        let contours = raw
            .contours
            .iter()
            .map(|c| c.map_nodes(|x, y| (s * x, y)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(contours, default_band(-s * (l + eps.abs()), s * (l + eps.abs())))
    }

    /// Disc of radius `r` centred at (cx, cy): a regular `n`-gon whose
    /// area equals pi r^2.
    pub fn disc(cx: f64, cy: f64, r: f64, n: usize) -> Result<Self> {
        if !(r > 0.0 && r < 0.5 * PI) {
            return Err(Error::domain(format!("disc radius {r} must be in (0, pi/2)")));
        }
        let n = n.max(3);
        let nf = n as f64;
        let rp = r * (PI / (0.5 * nf * (TWO_PI / nf).sin())).sqrt();
        let xy: Vec<(f64, f64)> = (0..n)
            .map(|k| {
                let t = TWO_PI * k as f64 / nf;
                (cx + rp * t.cos(), cy + rp * t.sin())
            })
            .collect();
        Self::new(vec![Contour::from_xy(&xy, 0, 1)?], default_band(cx - r, cx + r))
    }

    /// Axis-aligned box [x0, x1] x [y0, y1] with y1 - y0 < 2 pi, edges
    /// subdivided so every edge piece is shorter than `spacing`.
    pub fn box_patch(x0: f64, x1: f64, y0: f64, y1: f64, spacing: f64) -> Result<Self> {
        if !(x1 > x0 && y1 > y0 && y1 - y0 < TWO_PI) {
            return Err(Error::domain("box needs x0 < x1 and 0 < y1 - y0 < 2 pi"));
        }
        let corners = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)];
        let mut xy = Vec::new();
        for k in 0..4 {
            let (ax, ay) = corners[k];
            let (bx, by) = corners[(k + 1) % 4];
            let len = (bx - ax).hypot(by - ay);
            let m = ((len / spacing).ceil() as usize).max(1);
            for j in 0..m {
                let t = j as f64 / m as f64;
                xy.push((ax + t * (bx - ax), ay + t * (by - ay)));
            }
        }
        Self::new(vec![Contour::from_xy(&xy, 0, 1)?], default_band(x0, x1))
    }

    /// Signed area from the contours; errors on self-intersection.
    pub fn area(&self) -> Result<f64> {
        self.check_simple()?;
        let a = self.contour_area();
        if a < -1e-12 * (1.0 + self.bounding_x) {
            return Err(Error::geometry(format!(
                "negative area {a}: inconsistent contour orientation"
            )));
        }
        Ok(a.max(0.0))
    }

    /// Nodes of all contours, flattened.
    pub fn nodes(&self) -> impl Iterator<Item = &StripPoint> {
        self.contours.iter().flat_map(|c| c.nodes().iter())
    }
}

/// Band |x| <= X used by the builders: the extent plus a margin of 1.
/// Default mask cell size for a patch of half-width L: min(0.01, L/400).
pub fn default_cell_size(l: f64) -> f64 {
    DEFAULT_CELL.min(l / 400.0)
}

pub(crate) fn default_band(a: f64, b: f64) -> f64 {
    a.abs().max(b.abs()) + 1.0
}

/// Signed patch area from the contours.
pub fn patch_area(p: &Patch) -> Result<f64> {
    p.area()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rectangle_area() {
        let p = Patch::rectangle(-2.0, 2.0, 32).unwrap();
        assert!((patch_area(&p).unwrap() - 8.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn empty_area_zero() {
        assert_eq!(patch_area(&Patch::empty(1.0).unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn disc_area_polygon() {
        let p = Patch::disc(0.0, 0.0, 1.0, 100).unwrap();
        let a = patch_area(&p).unwrap();
        assert!((a - PI).abs() < 1e-12);
        let shoelace = |xy: &[(f64, f64)]| {
            let n = xy.len();
            (0..n)
                .map(|i| {
                    let (a, b) = (xy[i], xy[(i + 1) % n]);
                    0.5 * (a.0 * b.1 - b.0 * a.1)
                })
                .sum::<f64>()
        };
        let xy: Vec<(f64, f64)> = p.contours()[0].nodes().iter().map(|q| (q.x, q.y())).collect();
        assert!((shoelace(&xy) - a).abs() < 1e-12);
    }

    #[test]
    fn single_winding_contour_closes_virtually() {
        let ys: Vec<(f64, f64)> = (0..16).map(|k| (1.0, -PI + k as f64 * TWO_PI / 16.0)).collect();
        let c = Contour::from_xy(&ys, 1, 1).unwrap();
        let p = Patch::new(vec![c], 3.0).unwrap();
        assert!((p.contour_area() - TWO_PI * 4.0).abs() < 1e-12);
        let m = p.mask().unwrap();
        assert!((m.span_area() - TWO_PI * 4.0).abs() < 1e-9);
    }

    #[test]
    fn self_intersection_is_geometry_error() {
        let c = Contour::from_xy(&[(0.0, 0.0), (1.0, 1.0), (1.0, 0.0), (0.0, 1.0)], 0, 1).unwrap();
        let p = Patch::new(vec![c], 2.0).unwrap();
        assert!(matches!(p.area(), Err(Error::Geometry(_))));
        assert!(matches!(p.mask(), Err(Error::Geometry(_))));
    }

    #[test]
    fn sinusoidal_area_corrected() {
        let p = Patch::sinusoidal(8.0, 0.1, 256).unwrap();
        assert!((p.contour_area() - 32.0 * PI).abs() < 1e-10);
    }

    #[test]
    fn area_below_line() {
        let p = Patch::rectangle(-2.0, 2.0, 16).unwrap();
        for t in [-3.0f64, -2.0, -0.5, 0.0, 1.7, 2.0, 5.0] {
            let want = TWO_PI * (t.clamp(-2.0, 2.0) + 2.0);
            assert!((p.contour_area_below(t) - want).abs() < 1e-12, "t = {t}");
        }
        // disc: half the area left of its centre
        let d = Patch::disc(0.7, 1.0, 0.5, 64).unwrap();
        assert!((d.contour_area_below(0.7) - 0.5 * d.contour_area()).abs() < 1e-13);
        assert_eq!(d.contour_area_below(-1.0), 0.0);
        assert!((d.contour_area_below(2.0) - d.contour_area()).abs() < 1e-13);
    }
}
