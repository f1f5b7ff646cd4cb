//! Exact cell-pair integrals of G(x, y) = log(cosh x - cos y) on a uniform
//! grid, with prefix sums for O(1) evaluation over pairs of column runs.

use std::f64::consts::LN_2;
use std::sync::{Arc, Mutex};

use crate::biot_savart::d_factor;
use crate::geometry::Mask;
use crate::numeric::{gauss_legendre, NeumaierSum};
use crate::par;

/// G(u, v) = |u| - log 2 + log D(u, v).
#[inline]
fn g_kernel(u: f64, v: f64) -> f64 {
    let (_, d) = d_factor(u, v);
    u.abs() - LN_2 + d.ln()
}

/// G(u, v) - log(u^2 + v^2), smooth near the origin.
#[inline]
fn g_smooth(u: f64, v: f64) -> f64 {
    let r2 = u * u + v * v;
    if r2 == 0.0 {
        return -LN_2;
    }
    let (_, d) = d_factor(u, v);
    u.abs() - LN_2 + (d / r2).ln()
}

#[inline]
fn xlog(p: f64, r2: f64) -> f64 {
    if p == 0.0 {
        0.0
    } else {
        p * r2.ln()
    }
}

/// Antiderivatives A_mn with d^2/du dv A_mn = u^m v^n log(u^2 + v^2),
/// continuous on the closed first quadrant.
#[inline]
fn moment_antiderivatives(u: f64, v: f64) -> [f64; 4] {
    let r2 = u * u + v * v;
    let at_uv = u.atan2(v); // atan(u/v)
    let at_vu = v.atan2(u); // atan(v/u)
    let a00 = u * u * at_uv - u * v + 2.0 * u * u * at_vu + xlog(u * v, r2) - 2.0 * u * v
        + v * v * at_uv;
    let a01 = xlog(u * u * u, r2) / 6.0 + xlog(u * v * v, r2) / 2.0 - 7.0 * u * v * v / 6.0
        + 2.0 * v * v * v * at_uv / 3.0;
    let a10 = 2.0 * u * u * u * at_vu / 3.0 - 7.0 * u * u * v / 6.0 - v * v * v / 9.0
        + xlog(v * (3.0 * u * u + v * v), r2) / 6.0;
    let a11 = xlog(u * u * u * u, r2) / 8.0 - 3.0 * u * u * v * v / 8.0 - v * v * v * v / 16.0
        + xlog(v * v * (2.0 * u * u + v * v), r2) / 8.0;
    [a00, a01, a10, a11]
}

/// Integral over [u0, u1] x [v0, v1] (closed first quadrant) of
/// (a1 + b1 u)(a2 + b2 v) log(u^2 + v^2).
fn log_bilinear_q1(u0: f64, u1: f64, v0: f64, v1: f64, w1: (f64, f64), w2: (f64, f64)) -> f64 {
    let c = |u, v| moment_antiderivatives(u, v);
    let (p, q, r, s) = (c(u1, v1), c(u0, v1), c(u1, v0), c(u0, v0));
    let i: Vec<f64> = (0..4).map(|k| p[k] - q[k] - r[k] + s[k]).collect();
    let (a1, b1) = w1;
    let (a2, b2) = w2;
    a1 * a2 * i[0] + a1 * b2 * i[1] + b1 * a2 * i[2] + b1 * b2 * i[3]
}

/// Linear pieces of the tent weight h - |t - c| on [c - h, c + h], split
/// additionally at 0. Each piece is (t0, t1, alpha, beta) with weight
/// alpha + beta t.
fn tent_pieces(c: f64, h: f64) -> Vec<(f64, f64, f64, f64)> {
    let mut out = Vec::with_capacity(3);
    for (t0, t1, a, b) in [(c - h, c, h - c, 1.0), (c, c + h, h + c, -1.0)] {
        if t0 < 0.0 && t1 > 0.0 {
            out.push((t0, 0.0, a, b));
            out.push((0.0, t1, a, b));
        } else {
            out.push((t0, t1, a, b));
        }
    }
    out
}

/// Tent-weighted integral of f around (dx, dy), written as
/// c_log * log(u^2 + v^2) (exact) plus `smooth` by 8x8 Gauss per piece.
fn near_split(
    dx: f64,
    dy: f64,
    h: f64,
    hy: f64,
    c_log: f64,
    smooth: impl Fn(f64, f64) -> f64,
) -> f64 {
    let g8 = gauss_legendre(8);
    let mut total = 0.0;
    for &(u0, u1, a1, b1) in &tent_pieces(dx, h) {
        for &(v0, v1, a2, b2) in &tent_pieces(dy, hy) {
            // reflect into the first quadrant (log |z|^2 is even in each axis)
            let (p0, p1, pa, pb) = if u1 <= 0.0 { (-u1, -u0, a1, -b1) } else { (u0, u1, a1, b1) };
            let (q0, q1, qa, qb) = if v1 <= 0.0 { (-v1, -v0, a2, -b2) } else { (v0, v1, a2, b2) };
            if c_log != 0.0 {
                total += c_log * log_bilinear_q1(p0, p1, q0, q1, (pa, pb), (qa, qb));
            }
            let mut s = 0.0;
            for (u, wu) in g8.mapped(u0, u1) {
                let tu = a1 + b1 * u;
                for (v, wv) in g8.mapped(v0, v1) {
                    s += wu * wv * tu * (a2 + b2 * v) * smooth(u, v);
                }
            }
            total += s;
        }
    }
    total
}

/// Exact tent-weighted integral of G around (dx, dy): the integral of G
/// over all pairs of points from two h x hy cells offset by (dx, dy).
pub(crate) fn near_weight(dx: f64, dy: f64, h: f64, hy: f64) -> f64 {
    near_split(dx, dy, h, hy, 1.0, g_smooth)
}

/// Tent-weighted integral of |log r| for a cell pair whose points all lie
/// within distance 1 of each other.
pub(crate) fn near_weight_abs_log(dx: f64, dy: f64, h: f64, hy: f64) -> f64 {
    near_split(dx, dy, h, hy, -0.5, |_, _| 0.0)
}

/// Same integral by tensor Gauss quadrature on the four tent pieces; for
/// offsets away from the singular cell.
pub(crate) fn far_weight(dx: f64, dy: f64, h: f64, hy: f64, n: usize) -> f64 {
    far_weight_with(g_kernel, dx, dy, h, hy, n)
}

/// Tent-weighted tensor Gauss integral of an arbitrary kernel.
pub(crate) fn far_weight_with(
    f: impl Fn(f64, f64) -> f64,
    dx: f64,
    dy: f64,
    h: f64,
    hy: f64,
    n: usize,
) -> f64 {
    let rule = gauss_legendre(n);
    let mut total = 0.0;
    for (u0, u1, a1, b1) in [(dx - h, dx, h - dx, 1.0), (dx, dx + h, h + dx, -1.0)] {
        for (v0, v1, a2, b2) in [(dy - hy, dy, hy - dy, 1.0), (dy, dy + hy, hy + dy, -1.0)] {
            for (u, wu) in rule.mapped(u0, u1) {
                let tu = a1 + b1 * u;
                for (v, wv) in rule.mapped(v0, v1) {
                    total += wu * wv * tu * (a2 + b2 * v) * f(u, v);
                }
            }
        }
    }
    total
}

/// Cell-pair weights W(i, j) for column offsets 0..ncols and all row
/// offsets, stored as mean-removed double prefix sums per column offset.
#[derive(Debug)]
pub(crate) struct PairTable {
    pub h: f64,
    pub ny: usize,
    pub ncols: usize,
    mean: Vec<f64>,
    q: Vec<f64>,
}

impl PairTable {
    fn build(h: f64, hy: f64, ny: usize, ncols: usize) -> Self {
        Self::from_weights(h, ny, ncols, |i, j| {
            let (dx, dy) = (i as f64 * h, j as f64 * hy);
            if i <= 2 && j <= 2 {
                near_weight(dx, dy, h, hy)
            } else if i.max(j) <= 6 {
                far_weight(dx, dy, h, hy, 6)
            } else {
                far_weight(dx, dy, h, hy, 3)
            }
        })
    }

    /// Table from a weight function w(i, j) of the column offset and the
    /// reduced row offset j in 0..=ny/2.
    pub fn from_weights(
        h: f64,
        ny: usize,
        ncols: usize,
        weight: impl Fn(usize, usize) -> f64 + Sync,
    ) -> Self {
        let half = ny / 2;
        let stride = 2 * ny + 1;
        let rows = par::map_indexed(ncols, |i| {
            let w: Vec<f64> = (0..=half).map(|j| weight(i, j)).collect();
            let f = |j: i64| {
                let jm = j.rem_euclid(ny as i64) as usize;
                w[jm.min(ny - jm)]
            };
            let mean = (0..ny as i64).map(f).sum::<f64>() / ny as f64;
            // P(m) = sum_{s=-ny}^{m} g(s), Q(m) = sum_{t<=m} P(t), m >= -ny-1
            let mut q = vec![0.0; stride];
            let (mut p, mut acc) = (0.0, 0.0);
            for (k, slot) in q.iter_mut().enumerate().skip(1) {
                let m = k as i64 - ny as i64 - 1;
                p += f(m) - mean;
                acc += p;
                *slot = acc;
            }
            (mean, q)
        });
        let mut mean = Vec::with_capacity(ncols);
        let mut q = Vec::with_capacity(ncols * stride);
        for (m, row) in rows {
            mean.push(m);
            q.extend(row);
        }
        Self { h, ny, ncols, mean, q }
    }

    #[inline]
    fn qv(&self, i: usize, m: i64) -> f64 {
        self.q[i * (2 * self.ny + 1) + (m + self.ny as i64 + 1) as usize]
    }

    /// Sum of W over row pairs (ra in [s1, e1), rb in [s2, e2)) at column
    /// offset `i`.
    #[inline]
    pub fn run_pair(&self, i: usize, (s1, e1): (u32, u32), (s2, e2): (u32, u32)) -> f64 {
        let (s1, e1, s2, e2) = (s1 as i64, e1 as i64, s2 as i64, e2 as i64);
        let len = ((e1 - s1) * (e2 - s2)) as f64;
        let c2 = e2 - 1;
        let c1 = s2 - 1;
        let g = (self.qv(i, c2 - s1) - self.qv(i, c2 - e1)) - (self.qv(i, c1 - s1) - self.qv(i, c1 - e1));
        len * self.mean[i] + g
    }
}

/// Sum of W over ordered pairs of cells weighted by the fractional
/// coverage: the centre-sampled cell sum plus first- and second-order
/// corrections from the boundary cells.
pub(crate) fn coverage_pair_sum(mask: &Mask, table: &PairTable, deltas: &[(u32, u32, f64)]) -> f64 {
    let base = mask_pair_sum(mask, table);
    if deltas.is_empty() {
        return base;
    }
    let (c0, c1) = mask.column_range();
    let first = par::sum_indexed(deltas.len(), 16, |k| {
        let (ib, rb, d) = deltas[k];
        let ib = ib as usize;
        let mut v = NeumaierSum::new();
        for c in c0..c1 {
            let i = c.abs_diff(ib);
            for &run in mask.col_runs(c) {
                v.add(table.run_pair(i, (rb, rb + 1), run));
            }
        }
        2.0 * d * v.value()
    });
    let second = par::sum_indexed(deltas.len(), 16, |k| {
        let (ib, rb, d) = deltas[k];
        let mut v = NeumaierSum::new();
        for &(jb, sb, e) in deltas {
            let i = (ib as usize).abs_diff(jb as usize);
            v.add(e * table.run_pair(i, (rb, rb + 1), (sb, sb + 1)));
        }
        d * v.value()
    });
    base + first + second
}

/// Column span [lo, hi) covering the filled cells and the boundary cells.
pub(crate) fn covered_columns(mask: &Mask, deltas: &[(u32, u32, f64)]) -> (usize, usize) {
    let (mut lo, mut hi) = mask.column_range();
    if lo == hi {
        lo = usize::MAX;
        hi = 0;
    }
    for &(i, _, _) in deltas {
        lo = lo.min(i as usize);
        hi = hi.max(i as usize + 1);
    }
    if lo >= hi {
        (0, 0)
    } else {
        (lo, hi)
    }
}

/// Sum of W over all ordered pairs of mask cells.
pub(crate) fn mask_pair_sum(mask: &Mask, table: &PairTable) -> f64 {
    let (c0, c1) = mask.column_range();
    par::sum_indexed(c1 - c0, 4, |ka| {
        let a = c0 + ka;
        let ra = mask.col_runs(a);
        if ra.is_empty() {
            return 0.0;
        }
        let mut s = NeumaierSum::new();
        for b in a..c1 {
            let rb = mask.col_runs(b);
            let i = b - a;
            let mut pair = 0.0;
            for &x in ra {
                for &y in rb {
                    pair += table.run_pair(i, x, y);
                }
            }
            s.add(if i == 0 { pair } else { 2.0 * pair });
        }
        s.value()
    })
}

/// Shared table for (h, hy, ny) covering at least `ncols` column offsets.
pub(crate) fn pair_table(h: f64, hy: f64, ny: usize, ncols: usize) -> Arc<PairTable> {
    static CACHE: Mutex<Vec<Arc<PairTable>>> = Mutex::new(Vec::new());
    {
        let cache = CACHE.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(t) = cache
            .iter()
            .find(|t| t.h == h && t.ny == ny && t.ncols >= ncols)
        {
            return Arc::clone(t);
        }
    }
    let t = Arc::new(PairTable::build(h, hy, ny, ncols));
    let mut cache = CACHE.lock().unwrap_or_else(|e| e.into_inner());
    cache.retain(|c| !(c.h == h && c.ny == ny));
    if cache.len() >= 4 {
        cache.remove(0);
    }
    cache.push(Arc::clone(&t));
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::integrate;

    /// Brute-force tent integral with the singular point split out.
    fn brute(dx: f64, dy: f64, h: f64, hy: f64) -> f64 {
        integrate(
            |u| {
                let tu = h - (u - dx).abs();
                integrate(
                    |v| (hy - (v - dy).abs()) * g_kernel(u, v),
                    dy - hy,
                    dy + hy,
                    &[0.0, dy],
                    1e-15,
                    1e-13,
                )
                .value
                    * tu
            },
            dx - h,
            dx + h,
            &[0.0, dx],
            1e-15,
            1e-13,
        )
        .value
    }

    #[test]
    fn near_weights_match_brute_force() {
        let (h, hy) = (0.1, 0.09);
        for (i, j) in [(0, 0), (1, 0), (0, 1), (1, 1), (2, 1), (2, 2), (0, 2)] {
            let (dx, dy) = (i as f64 * h, j as f64 * hy);
            let a = near_weight(dx, dy, h, hy);
            let b = brute(dx, dy, h, hy);
            assert!((a - b).abs() < 1e-10 * b.abs().max(1e-6), "({i},{j}): {a} vs {b}");
        }
    }

    #[test]
    fn far_weights_match_brute_force() {
        let (h, hy) = (0.05, 0.05);
        for (i, j) in [(3, 0), (0, 3), (4, 5), (7, 1), (20, 30)] {
            let (dx, dy) = (i as f64 * h, j as f64 * hy);
            let n = if i.max(j) <= 6 { 6 } else { 3 };
            let a = far_weight(dx, dy, h, hy, n);
            let b = near_weight(dx, dy, h, hy);
            let c = brute(dx, dy, h, hy);
            let scale = h * h * hy * hy;
            assert!((a - c).abs() < 1e-9 * scale, "({i},{j}): {a} vs {c}");
            if i.max(j) <= 7 {
                assert!((a - b).abs() < 1e-9 * scale, "({i},{j}): {a} vs {b}");
            }
        }
    }

    #[test]
    fn run_pairs_match_direct_sums() {
        let (h, ny) = (0.3, 21);
        let hy = std::f64::consts::TAU / ny as f64;
        let t = PairTable::build(h, hy, ny, 3);
        let w = |i: usize, j: i64| {
            let jm = j.rem_euclid(ny as i64) as usize;
            let jr = jm.min(ny - jm);
            let (dx, dy) = (i as f64 * h, jr as f64 * hy);
            if i <= 2 && jr <= 2 {
                near_weight(dx, dy, h, hy)
            } else if i.max(jr) <= 6 {
                far_weight(dx, dy, h, hy, 6)
            } else {
                far_weight(dx, dy, h, hy, 3)
            }
        };
        for &(i, r1, r2) in &[(0usize, (0u32, 21u32), (0u32, 21u32)), (1, (3, 9), (15, 21)), (2, (0, 1), (20, 21)), (1, (5, 6), (5, 6))] {
            let mut direct = 0.0;
            for ra in r1.0..r1.1 {
                for rb in r2.0..r2.1 {
                    direct += w(i, rb as i64 - ra as i64);
                }
            }
            let fast = t.run_pair(i, r1, r2);
            assert!((fast - direct).abs() < 1e-12 * direct.abs().max(1e-3), "{fast} vs {direct}");
        }
    }
}
