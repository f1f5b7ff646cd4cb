use serde::Serialize;

use super::patch::Patch;
use crate::numeric::NeumaierSum;
use crate::{Error, Result};

/// Interval [x_lo, x_hi] of points splitting the patch mass in half,
/// from the exact area of the polygon left of a vertical line.
pub fn point_of_centering(p: &Patch) -> Result<(f64, f64)> {
    let total = p.contour_area();
    if !(total > 0.0) {
        return Err(Error::domain("point_of_centering: patch has zero area"));
    }
    let (xmin, xmax) = p
        .nodes()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), n| (a.min(n.x), b.max(n.x)));
    let (xmin, xmax) = if p.net_winding() != 0 { (-p.bounding_x(), p.bounding_x()) } else { (xmin, xmax) };
    let half = 0.5 * total;
    let tol = 1e-12 * total;
    // inf { t : A(t) >= half - tol } and sup { t : A(t) <= half + tol }
    let lo = bisect(xmin, xmax, |t| p.contour_area_below(t) >= half - tol);
    let hi = bisect(xmin, xmax, |t| p.contour_area_below(t) > half + tol);
    if hi - lo <= 1e-9 * (1.0 + lo.abs()) {
        let m = 0.5 * (lo + hi);
        return Ok((m, m));
    }
    Ok((lo, hi))
}

/// Smallest t in [a, b] with `pred(t)`, for a monotone predicate.
fn bisect(mut a: f64, mut b: f64, pred: impl Fn(f64) -> bool) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if pred(m) {
            b = m;
        } else {
            a = m;
        }
    }
    0.5 * (a + b)
}

/// Piece of E delta E0 on [a, b] with y-measure `fiber` at each x, lying
/// entirely inside one linear piece of the weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymDiffPiece {
    pub a: f64,
    pub b: f64,
    pub fiber: f64,
}

/// Weighted symmetric difference against E0 = [x_c - L, x_c + L] x T.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightedSymDiff {
    pub value: f64,
    pub x_c: f64,
    pub l: f64,
    pub pieces: Vec<SymDiffPiece>,
}

impl WeightedSymDiff {
    #[inline]
    fn weight(&self, x: f64) -> f64 {
        ((x - self.x_c).abs() - self.l).abs()
    }

    /// |(E delta E0) cap { ||x - x_c| - L| > mu }|.
    pub fn tail(&self, mu: f64) -> f64 {
        let mut s = NeumaierSum::new();
        for p in &self.pieces {
            let (wa, wb) = (self.weight(p.a), self.weight(p.b));
            let len = p.b - p.a;
            let frac = if wa > mu && wb > mu {
                1.0
            } else if wa <= mu && wb <= mu {
                0.0
            } else {
                // the weight is linear on the piece
                let t = (mu - wa) / (wb - wa);
                if wb > wa {
                    1.0 - t
                } else {
                    t
                }
            };
            s.add(p.fiber * len * frac.clamp(0.0, 1.0));
        }
        s.value()
    }

    /// Measure of E delta E0.
    pub fn measure(&self) -> f64 {
        self.tail(-1.0)
    }
}

/// Computes the weighted symmetric difference of the patch with
/// E0 = [x_c - L, x_c + L] x T, row by row from exact fibre spans.
pub fn weighted_sym_diff(p: &Patch, x_c: f64, l: f64) -> Result<WeightedSymDiff> {
    if !(l > 0.0 && l.is_finite() && x_c.is_finite()) {
        return Err(Error::domain(format!("weighted_sym_diff needs L > 0, got {l}")));
    }
    let mask = p.mask()?;
    let g = *mask.grid();
    let (e0a, e0b) = (x_c - l, x_c + l);
    let kinks = [e0a, x_c, e0b];
    let mut pieces = Vec::new();
    let push = |pieces: &mut Vec<SymDiffPiece>, a: f64, b: f64| {
        let mut cuts = vec![a];
        cuts.extend(kinks.iter().copied().filter(|&k| k > a && k < b));
        cuts.push(b);
        for w in cuts.windows(2) {
            if w[1] > w[0] {
                pieces.push(SymDiffPiece { a: w[0], b: w[1], fiber: g.hy });
            }
        }
    };
    for r in 0..g.ny {
        let spans = mask.spans(r);
        // E minus E0
        for &(a, b) in spans {
            if a < e0a {
                push(&mut pieces, a, b.min(e0a));
            }
            if b > e0b {
                push(&mut pieces, a.max(e0b), b);
            }
        }
        // E0 minus E
        let mut cur = e0a;
        for &(a, b) in spans {
            if b <= cur {
                continue;
            }
            if a >= e0b {
                break;
            }
            if a > cur {
                push(&mut pieces, cur, a.min(e0b));
            }
            cur = cur.max(b);
            if cur >= e0b {
                break;
            }
        }
        if cur < e0b {
            push(&mut pieces, cur, e0b);
        }
    }
    let mut out = WeightedSymDiff { value: 0.0, x_c, l, pieces };
    let mut s = NeumaierSum::new();
    for pc in &out.pieces {
        s.add(pc.fiber * (pc.b - pc.a) * out.weight(0.5 * (pc.a + pc.b)));
    }
    out.value = s.value();
    Ok(out)
}

