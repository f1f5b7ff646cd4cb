use serde::{Deserialize, Serialize};

use super::patch::Patch;
use crate::numeric::NeumaierSum;
use crate::{Error, Result, TWO_PI};

/// Uniform x-grid: `n` bins of `width` starting at `x0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformGrid {
    pub x0: f64,
    pub width: f64,
    pub n: usize,
}

impl UniformGrid {
    pub fn new(x0: f64, width: f64, n: usize) -> Result<Self> {
        if !(width > 0.0 && width.is_finite() && x0.is_finite()) {
            return Err(Error::domain(format!("bad grid x0={x0} width={width}")));
        }
        Ok(Self { x0, width, n })
    }

    /// Grid of bins of `width` covering [a, b], anchored at multiples of width.
    pub fn covering(a: f64, b: f64, width: f64) -> Result<Self> {
        let i0 = (a / width).floor();
        let i1 = (b / width).ceil();
        Self::new(i0 * width, width, (i1 - i0).max(1.0) as usize)
    }

    pub fn x_end(&self) -> f64 {
        self.x0 + self.n as f64 * self.width
    }
}

/// Binned density on a uniform grid, values in [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Density1D {
    pub x0: f64,
    pub width: f64,
    pub values: Vec<f64>,
}

impl Density1D {
    pub fn new(x0: f64, width: f64, values: Vec<f64>) -> Result<Self> {
        if !(width > 0.0 && width.is_finite() && x0.is_finite()) {
            return Err(Error::domain(format!("bad density grid x0={x0} width={width}")));
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(**v >= -1e-12 && **v <= 1.0 + 1e-12))
        {
            return Err(Error::domain(format!("density value {v} at bin {i} outside [0, 1]")));
        }
        Ok(Self { x0, width, values })
    }

    pub fn zeros(grid: UniformGrid) -> Self {
        Self { x0: grid.x0, width: grid.width, values: vec![0.0; grid.n] }
    }

    pub fn grid(&self) -> UniformGrid {
        UniformGrid { x0: self.x0, width: self.width, n: self.values.len() }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn bin_left(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.width
    }

    /// Total of value x width.
    pub fn mass(&self) -> f64 {
        self.values
            .iter()
            .map(|v| v * self.width)
            .collect::<NeumaierSum>()
            .value()
    }

    /// Cumulative mass at the left edge of each bin and at the right end
    /// (length n + 1).
    pub fn prefix(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.values.len() + 1);
        let mut s = NeumaierSum::new();
        out.push(0.0);
        for v in &self.values {
            s.add(v * self.width);
            out.push(s.value());
        }
        out
    }

    /// Mass of the density on (-inf, x).
    pub fn mass_below(&self, x: f64) -> f64 {
        let mut s = NeumaierSum::new();
        for (i, v) in self.values.iter().enumerate() {
            let a = self.bin_left(i);
            let b = a + self.width;
            if x <= a {
                break;
            }
            s.add(v * (x.min(b) - a));
        }
        s.value()
    }

    /// Masses on (-inf, 0] and [0, inf).
    pub fn half_line_masses(&self) -> (f64, f64) {
        let neg = self.mass_below(0.0);
        (neg, self.mass() - neg)
    }

    /// First moment of the density.
    pub fn moment(&self) -> f64 {
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| v * self.width * (self.bin_left(i) + 0.5 * self.width))
            .collect::<NeumaierSum>()
            .value()
    }

    /// Density value at x (0 outside the grid).
    pub fn value_at(&self, x: f64) -> f64 {
        let t = (x - self.x0) / self.width;
        if t < 0.0 {
            return 0.0;
        }
        self.values.get(t as usize).copied().unwrap_or(0.0)
    }
}

/// Vertical average rho(x) = (1/2pi) |{y : (x, y) in E}| binned on `grid`.
/// Row fibres are exact in x; the y-integral is the midpoint rule on the
/// patch's mask rows.
pub fn vertical_average(p: &Patch, grid: &UniformGrid) -> Result<Density1D> {
    let mask = p.mask()?;
    let g = mask.grid();
    let (lo, hi) = (grid.x0, grid.x_end());
    let tol = 1e-9 * (1.0 + lo.abs().max(hi.abs()));
    if grid.n == 0 {
        if (0..g.ny).any(|r| !mask.spans(r).is_empty()) {
            return Err(Error::domain("empty grid does not cover a non-empty patch"));
        }
        return Ok(Density1D::zeros(*grid));
    }
    let mut acc = vec![NeumaierSum::new(); grid.n];
    for r in 0..g.ny {
        for &(a, b) in mask.spans(r) {
            if a < lo - tol || b > hi + tol {
                return Err(Error::domain(format!(
                    "grid [{lo}, {hi}] does not cover patch fibre [{a}, {b}]"
                )));
            }
            let ia = (((a - lo) / grid.width).floor().max(0.0) as usize).min(grid.n - 1);
            let ib = (((b - lo) / grid.width).ceil().max(0.0) as usize).min(grid.n);
            for (i, slot) in acc.iter_mut().enumerate().take(ib).skip(ia) {
                let bl = lo + i as f64 * grid.width;
                let ov = b.min(bl + grid.width) - a.max(bl);
                if ov > 0.0 {
                    slot.add(ov);
                }
            }
        }
    }
    let scale = g.hy / (TWO_PI * grid.width);
    let values = acc.iter().map(|s| (s.value() * scale).clamp(0.0, 1.0)).collect();
    Ok(Density1D { x0: grid.x0, width: grid.width, values })
}
