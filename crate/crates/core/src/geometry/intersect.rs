use super::contour::{Contour, Segment};
use crate::TWO_PI;

#[inline]
fn orient(ax: f64, ay: f64, bx: f64, by: f64, cx: f64, cy: f64) -> f64 {
    (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
}

fn proper_cross(s: &Segment, t: &Segment, shift: f64) -> bool {
    let (tx0, ty0, tx1, ty1) = (t.x0, t.y0 + shift, t.x1, t.y1 + shift);
    let (s_lo, s_hi) = (s.y0.min(s.y1), s.y0.max(s.y1));
    if ty0.max(ty1) < s_lo || ty0.min(ty1) > s_hi {
        return false;
    }
    let o1 = orient(s.x0, s.y0, s.x1, s.y1, tx0, ty0);
    let o2 = orient(s.x0, s.y0, s.x1, s.y1, tx1, ty1);
    let o3 = orient(tx0, ty0, tx1, ty1, s.x0, s.y0);
    let o4 = orient(tx0, ty0, tx1, ty1, s.x1, s.y1);
    o1 * o2 < 0.0 && o3 * o4 < 0.0
}

/// Returns `(contour_a, segment_a, contour_b, segment_b)` for the first
/// proper crossing found between two non-adjacent segments, or `None`.
/// Touching and collinear overlap are not reported.
pub fn find_self_intersection(contours: &[Contour]) -> Option<(usize, usize, usize, usize)> {
    struct Item {
        c: usize,
        k: usize,
        n: usize,
        s: Segment,
        xmin: f64,
        xmax: f64,
    }
    let mut items = Vec::new();
    for (c, contour) in contours.iter().enumerate() {
        let segs = contour.segments();
        let n = segs.len();
        for (k, s) in segs.into_iter().enumerate() {
            items.push(Item { c, k, n, xmin: s.x0.min(s.x1), xmax: s.x0.max(s.x1), s });
        }
    }
    items.sort_by(|a, b| a.xmin.total_cmp(&b.xmin));
    for i in 0..items.len() {
        let a = &items[i];
        for b in &items[i + 1..] {
            if b.xmin > a.xmax {
                break;
            }
            if a.c == b.c {
                let d = a.k.abs_diff(b.k);
                if d <= 1 || d == a.n - 1 {
                    continue;
                }
            }
            for m in -2..=2 {
                if proper_cross(&a.s, &b.s, m as f64 * TWO_PI) {
                    let (p, q) = if (a.c, a.k) < (b.c, b.k) { (a, b) } else { (b, a) };
                    return Some((p.c, p.k, q.c, q.k));
                }
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bow_tie_is_detected() {
        let c = Contour::from_xy(&[(0.0, 0.0), (1.0, 1.0), (1.0, 0.0), (0.0, 1.0)], 0, 1).unwrap();
        assert!(find_self_intersection(&[c]).is_some());
    }

    #[test]
    fn square_is_clean() {
        let c = Contour::from_xy(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)], 0, 1).unwrap();
        assert!(find_self_intersection(&[c]).is_none());
    }

    #[test]
    fn crossing_across_the_seam() {
        use std::f64::consts::PI;
        let a = Contour::from_xy(&[(0.0, 3.0), (1.0, 3.0), (1.0, -3.0), (0.0, -3.0)], 0, 1).unwrap();
        let b = Contour::from_xy(&[(0.5, -PI + 0.1), (2.0, -PI + 0.1), (2.0, -PI + 0.5)], 0, 1).unwrap();
        assert!(find_self_intersection(&[a.clone(), b]).is_some());
        let far = Contour::from_xy(&[(5.0, 0.0), (6.0, 0.0), (6.0, 1.0)], 0, 1).unwrap();
        assert!(find_self_intersection(&[a, far]).is_none());
    }
}
