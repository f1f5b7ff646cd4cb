use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::functionals::pair_table::{
    coverage_pair_sum, covered_columns, far_weight_with, near_weight_abs_log, PairTable,
};
use crate::geometry::{default_band, wrap_angle, Contour, Patch};
use crate::{par, Error, Result, TWO_PI};

fn star(rng: &mut ChaCha8Rng, area: f64, xmax: f64) -> Option<Result<Patch>> {
    let n = 96;
    let modes: Vec<(f64, f64)> = (2..=4)
        .map(|_| (rng.gen_range(-0.15..0.15), rng.gen_range(0.0..TWO_PI)))
        .collect();
    let unit: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let t = TWO_PI * k as f64 / n as f64;
            let r = 1.0 + modes.iter().enumerate().map(|(i, (a, p))| a * ((i + 2) as f64 * t + p).cos()).sum::<f64>();
            (r * t.cos(), r * t.sin())
        })
        .collect();
    let a0: f64 = (0..n)
        .map(|i| {
            let (p, q) = (unit[i], unit[(i + 1) % n]);
            0.5 * (p.0 * q.1 - q.0 * p.1)
        })
        .sum();
    let k = (area / a0).sqrt();
    let ext = |f: fn(&(f64, f64)) -> f64| {
        let lo = unit.iter().map(f).fold(f64::INFINITY, f64::min) * k;
        let hi = unit.iter().map(f).fold(f64::NEG_INFINITY, f64::max) * k;
        (lo, hi)
    };
    let (ylo, yhi) = ext(|p| p.1);
    let (xlo, xhi) = ext(|p| p.0);
    if yhi - ylo > TWO_PI - 0.1 || xhi - xlo > 2.0 * xmax {
        return None;
    }
    let cx = rng.gen_range((-xmax - xlo)..=(xmax - xhi));
    let cy = rng.gen_range(-PI..PI);
    let xy: Vec<(f64, f64)> = unit.iter().map(|&(x, y)| (cx + k * x, wrap_angle(cy + k * y))).collect();
    Some(Contour::from_xy(&xy, 0, 1).and_then(|c| Patch::new(vec![c], default_band(cx + xlo, cx + xhi))))
}

fn band(rng: &mut ChaCha8Rng, area: f64, xmax: f64) -> Option<Result<Patch>> {
    let w = area / TWO_PI;
    if 0.7 * w > xmax {
        return None;
    }
    let mut modes = || -> Vec<(f64, f64)> {
        (1..=3).map(|_| (rng.gen_range(-0.1..0.1) * w, rng.gen_range(0.0..TWO_PI))).collect()
    };
    let (mf, mg) = (modes(), modes());
    let c = rng.gen_range((-xmax + 0.7 * w)..=(xmax - 0.7 * w));
    let prof = |m: &[(f64, f64)], y: f64| m.iter().enumerate().map(|(i, (a, p))| a * ((i + 1) as f64 * y + p).sin()).sum::<f64>();
    let n = 128;
    let right = |y: f64| c + 0.5 * w + prof(&mg, y);
    let left = |y: f64| c - 0.5 * w + prof(&mf, y);
    let raw = match Patch::from_profiles(right, left, n, default_band(c - w, c + w)) {
        Ok(p) => p,
        Err(e) => return Some(Err(e)),
    };
    let k = area / raw.contour_area();
    Some(Patch::from_profiles(
        |y| c + k * (right(y) - c),
        |y| c + k * (left(y) - c),
        n,
        default_band(c - w, c + w),
    ))
}

fn boxes(rng: &mut ChaCha8Rng, area: f64, xmax: f64) -> Option<Result<Patch>> {
    let t = rng.gen_range(0.2..0.8);
    let parts = [t * area, (1.0 - t) * area];
    let mut widths = [0.0; 2];
    let mut heights = [0.0; 2];
    for i in 0..2 {
        heights[i] = rng.gen_range(0.3..6.0);
        widths[i] = parts[i] / heights[i];
    }
    let gap = 0.05;
    let span = widths[0] + widths[1] + gap;
    if span > 2.0 * xmax {
        return None;
    }
    let mut x = rng.gen_range(-xmax..=(xmax - span));
    let mut out = Vec::new();
    for i in 0..2 {
        let y0 = rng.gen_range(-PI..PI);
        match Patch::box_patch(x, x + widths[i], y0, y0 + heights[i], 0.25) {
            Ok(p) => out.push(p),
            Err(e) => return Some(Err(e)),
        }
        x += widths[i] + gap;
    }
    Some(Patch::union(&out))
}

/// Random simple patch of the given area inside |x| <= xmax: a smooth star
/// polygon, a wavy band, or two disjoint boxes.
pub fn random_shape(rng: &mut ChaCha8Rng, area: f64, xmax: f64) -> Result<Patch> {
    let first = rng.gen_range(0..3);
    for k in 0..3 {
        let made = match (first + k) % 3 {
            0 => star(rng, area, xmax),
            1 => band(rng, area, xmax),
            _ => boxes(rng, area, xmax),
        };
        if let Some(p) = made {
            return p;
        }
    }
    Err(Error::domain(format!("no shape family fits area {area} in |x| <= {xmax}")))
}

fn instance_rng(seed: u64, i: usize) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(i as u64 + 1);
    r
}

/// Integral of |x| over the whole strip for a patch: exact for polygons.
pub fn abs_x_moment(p: &Patch) -> f64 {
    p.contour_abs_moment_x()
}

/// s^2 / (8 pi) and the smallest integral of |x| found over `n_shapes`
/// random shapes of area s.
pub fn bound_probe_petal_with(s: f64, seed: u64, n_shapes: usize) -> Result<(f64, f64)> {
    if !(s > 0.0 && s <= 4.0 * PI) {
        return Err(Error::domain(format!("area s = {s} must lie in (0, 4 pi]")));
    }
    let analytic = s * s / (8.0 * PI);
    let vals = par::map_indexed(n_shapes, |i| {
        let mut rng = instance_rng(seed, i);
        random_shape(&mut rng, s, 4.0).map(|p| abs_x_moment(&p))
    });
    let mut m = f64::INFINITY;
    for v in vals {
        m = m.min(v?);
    }
    Ok((analytic, m))
}

pub fn bound_probe_petal(s: f64) -> Result<(f64, f64)> {
    bound_probe_petal_with(s, 0x5eed, 200)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogProbe {
    /// Integral of |log|z - xi|| over A x A.
    pub lhs: f64,
    /// Integral of |x| over A.
    pub rhs: f64,
    /// lhs / rhs, +inf when both vanish.
    pub ratio: f64,
}

/// Both sides of the log-moment bound for A inside [-1, 1] x T. The
/// double integral uses exact cell-pair weights on A's fractional cell
/// coverage.
pub fn bound_probe_log(a: &Patch) -> Result<LogProbe> {
    let xmax = a.contours().iter().map(Contour::max_abs_x).fold(0.0, f64::max);
    if xmax > 1.0 + 1e-12 {
        return Err(Error::domain(format!("patch reaches |x| = {xmax} > 1")));
    }
    let h = a.cell_size();
    if h > 0.1 {
        return Err(Error::domain(format!("cell size {h} too coarse for the log probe")));
    }
    let rhs = abs_x_moment(a);
    let mask = a.mask()?;
    let deltas = mask.boundary_deltas();
    let (c0, c1) = covered_columns(mask, &deltas);
    if c1 == c0 {
        return Ok(LogProbe { lhs: 0.0, rhs, ratio: if rhs == 0.0 { f64::INFINITY } else { 0.0 } });
    }
    let g = *mask.grid();
    let hy = g.hy;
    let kernel = |u: f64, v: f64| {
        let v = wrap_angle(v);
        0.5 * (u * u + v * v).ln().abs()
    };
    let table = PairTable::from_weights(h, g.ny, c1 - c0, |i, j| {
        let (dx, dy) = (i as f64 * h, j as f64 * hy);
        if i <= 2 && j <= 2 {
            near_weight_abs_log(dx, dy, h, hy)
        } else if i.max(j) <= 6 {
            far_weight_with(kernel, dx, dy, h, hy, 6)
        } else {
            far_weight_with(kernel, dx, dy, h, hy, 3)
        }
    });
    let lhs = coverage_pair_sum(mask, &table, &deltas);
    Ok(LogProbe { lhs, rhs, ratio: if rhs == 0.0 { f64::INFINITY } else { lhs / rhs } })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogProbeSummary {
    pub ratios: Vec<f64>,
    pub min_ratio: f64,
    pub max_ratio: f64,
}

/// Log probe over `n` random sets A inside [-1, 1] x T with |A| <= 1.
pub fn bound_probe_log_suite(seed: u64, n: usize, h: f64) -> Result<LogProbeSummary> {
    let res = par::map_indexed(n, |i| {
        let mut rng = instance_rng(seed, i);
        let area = rng.gen_range(0.05..1.0);
        random_shape(&mut rng, area, 1.0)
            .and_then(|p| p.with_cell_size(h))
            .and_then(|p| bound_probe_log(&p))
    });
    let mut ratios = Vec::with_capacity(n);
    for r in res {
        ratios.push(r?.ratio);
    }
    let min_ratio = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
    Ok(LogProbeSummary { ratios, min_ratio, max_ratio })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::integrate;

    #[test]
    fn abs_moment_of_centered_band() {
        let a = 0.7;
        let p = Patch::rectangle(-a, a, 8).unwrap();
        assert!((abs_x_moment(&p) - TWO_PI * a * a).abs() < 1e-13);
        let q = Patch::rectangle(0.5, 1.5, 8).unwrap();
        assert!((abs_x_moment(&q) - TWO_PI).abs() < 1e-13);
        let r = Patch::box_patch(-0.5, 1.0, 0.0, 2.0, 0.3).unwrap();
        assert!((abs_x_moment(&r) - 2.0 * (0.125 + 0.5)).abs() < 1e-13);
    }

    #[test]
    fn petal_values() {
        let (a, m) = bound_probe_petal(4.0 * PI).unwrap();
        assert!((a - TWO_PI).abs() < 1e-14);
        assert!(m >= a - 1e-6);
        let (a, m) = bound_probe_petal_with(1e-3, 1, 20).unwrap();
        assert!(a < 1e-7 && m >= a - 1e-12);
        assert!(bound_probe_petal(13.0).is_err());
    }

    #[test]
    fn random_shapes_have_requested_area() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..60 {
            let area = rng.gen_range(0.1..1.0);
            let p = random_shape(&mut rng, area, 1.0).unwrap();
            assert!((p.area().unwrap() - area).abs() < 1e-10 * area.max(1.0));
            assert!(p.contours().iter().all(|c| c.max_abs_x() <= 1.0 + 1e-12));
        }
    }

    #[test]
    fn slab_log_probe_matches_direct_integral() {
        let w = 0.1;
        let p = Patch::rectangle(-w, w, 8).unwrap().with_cell_size(0.01).unwrap();
        let r = bound_probe_log(&p).unwrap();
        assert!((r.rhs - TWO_PI * w * w).abs() < 1e-14);
        // for a band, the y-integral reduces to one variable: 2 pi times the
        // integral of (2w - |s|) |log| over |s| < 2w, in each dy
        let inner = |s: f64| {
            integrate(
                |t: f64| 0.5 * (s * s + t * t).ln().abs(),
                -PI,
                PI,
                &[0.0, -(1.0 - s * s).max(0.0).sqrt(), (1.0 - s * s).max(0.0).sqrt()],
                1e-13,
                1e-11,
            )
            .value
        };
        let direct = TWO_PI
            * 2.0
            * integrate(|s| (2.0 * w - s) * inner(s), 0.0, 2.0 * w, &[], 1e-12, 1e-10).value;
        assert!((r.lhs - direct).abs() < 1e-3 * direct, "{} vs {direct}", r.lhs);
        assert!(r.ratio.is_finite());
    }

    #[test]
    fn log_probe_edge_cases() {
        let e = Patch::empty(1.0).unwrap();
        let r = bound_probe_log(&e).unwrap();
        assert_eq!((r.lhs, r.rhs), (0.0, 0.0));
        assert!(r.ratio.is_infinite());
        let wide = Patch::rectangle(-1.5, 1.5, 8).unwrap();
        assert!(bound_probe_log(&wide).is_err());
    }
}
