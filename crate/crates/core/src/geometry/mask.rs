use std::f64::consts::PI;

use super::contour::Contour;
use super::density::Density1D;
use crate::{par, Error, Result, TWO_PI};

/// Uniform cell grid on [i0 h, (i0 + nx) h) x [-pi, pi).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub h: f64,
    pub hy: f64,
    pub i0: i64,
    pub nx: usize,
    pub ny: usize,
}

impl Grid {
    pub fn new(h: f64, bounding_x: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::domain(format!("cell size {h} must be positive")));
        }
        if !(bounding_x > 0.0 && bounding_x.is_finite()) {
            return Err(Error::domain(format!("bounding_x {bounding_x} must be positive")));
        }
        let i0 = (-bounding_x / h).floor() as i64;
        let i1 = (bounding_x / h).ceil() as i64;
        let ny = (TWO_PI / h).ceil() as usize;
        Ok(Self { h, hy: TWO_PI / ny as f64, i0, nx: (i1 - i0) as usize, ny })
    }

    #[inline]
    pub fn x_left(&self, i: usize) -> f64 {
        (self.i0 + i as i64) as f64 * self.h
    }

    #[inline]
    pub fn x_center(&self, i: usize) -> f64 {
        ((self.i0 + i as i64) as f64 + 0.5) * self.h
    }

    #[inline]
    pub fn y_bottom(&self, r: usize) -> f64 {
        -PI + r as f64 * self.hy
    }

    #[inline]
    pub fn y_center(&self, r: usize) -> f64 {
        -PI + (r as f64 + 0.5) * self.hy
    }

    pub fn x_min(&self) -> f64 {
        self.x_left(0)
    }

    pub fn x_max(&self) -> f64 {
        self.x_left(self.nx)
    }

    pub fn cell_area(&self) -> f64 {
        self.h * self.hy
    }
}

/// Raster of a patch: per-row exact crossing spans at the row centres and
/// the cell-centre sampled 0/1 mask derived from them.
#[derive(Debug, Clone)]
pub struct Mask {
    grid: Grid,
    cells: Vec<u8>,
    spans: Vec<Vec<(f64, f64)>>,
    row_runs: Vec<Vec<(u32, u32)>>,
    col_runs: Vec<Vec<(u32, u32)>>,
    col_count: Vec<u32>,
    row_segs: Vec<Vec<[f64; 4]>>,
    virtual_x: Option<f64>,
}

impl Mask {
    pub(crate) fn build(contours: &[Contour], bounding_x: f64, h: f64) -> Result<Self> {
        let grid = Grid::new(h, bounding_x)?;
        let ny = grid.ny;
        let mut crossings: Vec<Vec<f64>> = vec![Vec::new(); ny];
        let mut row_segs: Vec<Vec<[f64; 4]>> = vec![Vec::new(); ny];
        for contour in contours {
            for s in contour.segments() {
                let dy = s.y1 - s.y0;
                if dy == 0.0 {
                    continue;
                }
                let (lo, hi) = if dy > 0.0 { (s.y0, s.y1) } else { (s.y1, s.y0) };
                for k in -2i32..=2 {
                    let shift = TWO_PI * k as f64;
                    // rows whose centre + shift lies in [lo, hi)
                    let a = ((lo - shift + PI) / grid.hy - 0.5).ceil();
                    let b = ((hi - shift + PI) / grid.hy - 0.5).ceil();
                    let a = a.max(0.0) as usize;
                    let b = (b.max(0.0) as usize).min(ny);
                    for (r, row) in crossings.iter_mut().enumerate().take(b).skip(a) {
                        let y = grid.y_center(r) + shift;
                        let x = s.x0 + (y - s.y0) * (s.x1 - s.x0) / dy;
                        row.push(x);
                    }
                    // rows whose band [y_b, y_b + hy) + shift meets [lo, hi]
                    let a = ((lo - shift + PI) / grid.hy - 1.0).floor().max(0.0) as usize;
                    let b = (((hi - shift + PI) / grid.hy + 1.0).ceil().max(0.0) as usize).min(ny);
                    for (r, segs) in row_segs.iter_mut().enumerate().take(b).skip(a) {
                        let yb = grid.y_bottom(r) + shift;
                        if hi >= yb && lo <= yb + grid.hy {
                            segs.push([s.x0, s.y0 - shift, s.x1, s.y1 - shift]);
                        }
                    }
                }
            }
        }
        let net: i32 = contours.iter().map(Contour::effective_winding).sum();
        if net.abs() > 1 {
            return Err(Error::geometry(format!("net winding {net} is not in {{-1, 0, 1}}")));
        }
        let virtual_x = -bounding_x * net as f64;
        let rows = par::map_indexed(ny, |r| -> Result<(Vec<(f64, f64)>, Vec<(u32, u32)>)> {
            let mut xs = crossings[r].clone();
            if net != 0 {
                xs.push(virtual_x);
            }
            xs.sort_by(f64::total_cmp);
            if xs.len() % 2 == 1 {
                return Err(Error::geometry(format!(
                    "row {r} has an odd number ({}) of boundary crossings",
                    xs.len()
                )));
            }
            let mut spans = Vec::with_capacity(xs.len() / 2);
            let mut runs = Vec::with_capacity(xs.len() / 2);
            for p in xs.chunks(2) {
                let (xa, xb) = (p[0], p[1]);
                if xa < grid.x_min() - 1e-9 || xb > grid.x_max() + 1e-9 {
                    return Err(Error::domain(format!(
                        "row {r}: span [{xa}, {xb}] leaves the bounding band"
                    )));
                }
                if xb > xa {
                    spans.push((xa, xb));
                }
                let ia = ((xa / grid.h - 0.5).ceil() as i64 - grid.i0).clamp(0, grid.nx as i64);
                let ib = ((xb / grid.h - 0.5).ceil() as i64 - grid.i0).clamp(0, grid.nx as i64);
                if ib > ia {
                    runs.push((ia as u32, ib as u32));
                }
            }
            Ok((spans, runs))
        });
        let mut spans = Vec::with_capacity(ny);
        let mut row_runs = Vec::with_capacity(ny);
        for row in rows {
            let (s, r) = row?;
            spans.push(s);
            row_runs.push(r);
        }
        let nx = grid.nx;
        let mut cells = vec![0u8; nx * ny];
        for (r, runs) in row_runs.iter().enumerate() {
            for &(a, b) in runs {
                cells[r * nx + a as usize..r * nx + b as usize].fill(1);
            }
        }
        let mut col_runs = vec![Vec::new(); nx];
        let mut col_count = vec![0u32; nx];
        for i in 0..nx {
            let mut start: Option<u32> = None;
            for r in 0..ny {
                let on = cells[r * nx + i] == 1;
                match (on, start) {
                    (true, None) => start = Some(r as u32),
                    (false, Some(s)) => {
                        col_runs[i].push((s, r as u32));
                        col_count[i] += r as u32 - s;
                        start = None;
                    }
                    _ => {}
                }
            }
            if let Some(s) = start {
                col_runs[i].push((s, ny as u32));
                col_count[i] += ny as u32 - s;
            }
        }
        Ok(Self {
            grid,
            cells,
            spans,
            row_runs,
            col_runs,
            col_count,
            row_segs,
            virtual_x: (net != 0).then_some(virtual_x),
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn cell(&self, i: usize, r: usize) -> u8 {
        self.cells[r * self.grid.nx + i]
    }

    /// Exact x-extent of the patch fibre along each row centre.
    pub fn spans(&self, r: usize) -> &[(f64, f64)] {
        &self.spans[r]
    }

    /// Exact fibre spans along the horizontal line at angle `y`, which must
    /// lie in row `r`'s band. Falls back to the row-centre spans if the
    /// crossing parity is inconsistent.
    pub fn spans_at(&self, r: usize, y: f64) -> Vec<(f64, f64)> {
        let mut xs: Vec<f64> = Vec::with_capacity(8);
        for &[x0, y0, x1, y1] in &self.row_segs[r] {
            let (lo, hi) = if y1 > y0 { (y0, y1) } else { (y1, y0) };
            if y >= lo && y < hi {
                xs.push(x0 + (y - y0) * (x1 - x0) / (y1 - y0));
            }
        }
        if let Some(v) = self.virtual_x {
            xs.push(v);
        }
        if xs.len() % 2 == 1 {
            return self.spans[r].clone();
        }
        xs.sort_by(f64::total_cmp);
        xs.chunks(2).filter(|p| p[1] > p[0]).map(|p| (p[0], p[1])).collect()
    }

    /// Row containing angle `y` (any real).
    pub fn row_of(&self, y: f64) -> usize {
        let t = (super::point::wrap(y) + PI) / self.grid.hy;
        (t.floor().max(0.0) as usize).min(self.grid.ny - 1)
    }

    /// Runs `[a, b)` of filled cells along row `r`.
    pub fn row_runs(&self, r: usize) -> &[(u32, u32)] {
        &self.row_runs[r]
    }

    /// Runs `[a, b)` of filled rows along column `i` (split at the seam).
    pub fn col_runs(&self, i: usize) -> &[(u32, u32)] {
        &self.col_runs[i]
    }

    pub fn col_count(&self, i: usize) -> u32 {
        self.col_count[i]
    }

    pub fn cell_count(&self) -> u64 {
        self.col_count.iter().map(|&c| c as u64).sum()
    }

    /// Area of the filled cells.
    pub fn cell_area(&self) -> f64 {
        self.cell_count() as f64 * self.grid.cell_area()
    }

    /// Area from the row spans (exact in x, midpoint rule in y).
    pub fn span_area(&self) -> f64 {
        let hy = self.grid.hy;
        crate::numeric::sum_compensated(
            self.spans.iter().flatten().map(|&(a, b)| (b - a) * hy),
        )
    }

    /// Vertical average of the filled cells on the mask's own columns.
    pub fn cell_density(&self) -> Density1D {
        let g = &self.grid;
        let values = self
            .col_count
            .iter()
            .map(|&c| (c as f64 * g.hy / TWO_PI).min(1.0))
            .collect();
        Density1D { x0: g.x_min(), width: g.h, values }
    }

    /// Cells where the exact covered fraction of the cell (row-centre spans,
    /// exact in x) differs from the centre-sampled indicator, as
    /// (column, row, fraction - indicator).
    pub fn boundary_deltas(&self) -> Vec<(u32, u32, f64)> {
        let g = &self.grid;
        let x0 = g.x_min();
        let cell_of = |x: f64| (((x - x0) / g.h).floor().max(0.0) as usize).min(g.nx - 1);
        let mut out = Vec::new();
        let mut cover: Vec<(usize, f64)> = Vec::new();
        for r in 0..g.ny {
            cover.clear();
            for &(a, b) in &self.spans[r] {
                let (ia, ib) = (cell_of(a), cell_of(b));
                if ia == ib {
                    cover.push((ia, (b - a) / g.h));
                } else {
                    cover.push((ia, (g.x_left(ia + 1) - a) / g.h));
                    cover.push((ib, (b - g.x_left(ib)) / g.h));
                }
            }
            cover.sort_by_key(|c| c.0);
            let mut k = 0;
            while k < cover.len() {
                let i = cover[k].0;
                let mut f = 0.0;
                while k < cover.len() && cover[k].0 == i {
                    f += cover[k].1;
                    k += 1;
                }
                let d = f.min(1.0) - self.cell(i, r) as f64;
                if d != 0.0 {
                    out.push((i as u32, r as u32, d));
                }
            }
        }
        out
    }

    /// Vertical average of the fractional cell coverage on the mask's own
    /// columns.
    pub fn coverage_density(&self) -> Density1D {
        let mut d = self.cell_density();
        let s = self.grid.hy / TWO_PI;
        for (i, _, delta) in self.boundary_deltas() {
            d.values[i as usize] += delta * s;
        }
        for v in &mut d.values {
            *v = v.clamp(0.0, 1.0);
        }
        d
    }

    /// Indices of the first and one-past-last non-empty columns.
    pub fn column_range(&self) -> (usize, usize) {
        let first = self.col_count.iter().position(|&c| c > 0);
        let last = self.col_count.iter().rposition(|&c| c > 0);
        match (first, last) {
            (Some(a), Some(b)) => (a, b + 1),
            _ => (0, 0),
        }
    }
}
