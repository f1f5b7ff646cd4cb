use rand::Rng;
use serde::{Deserialize, Serialize};

use super::intervals::{phi_raw, IntervalSet};
use crate::functionals::phi_of_density;
use crate::geometry::Density1D;
use crate::{Error, Result};

/// Bin-mass constraints: rho_plus[j] is the mass on [j delta, (j+1) delta],
/// rho_minus[j] the mass on [-(j+1) delta, -j delta].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinConstraints {
    pub delta: f64,
    pub rho_plus: Vec<f64>,
    pub rho_minus: Vec<f64>,
}

/// Largest number of bins per side `minimize_binned` will search.
pub const MAX_ACTIVE_BINS: usize = 10;

impl BinConstraints {
    pub fn new(delta: f64, rho_plus: Vec<f64>, rho_minus: Vec<f64>) -> Result<Self> {
        let c = Self { delta, rho_plus, rho_minus };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::domain(format!("bin width {} must be positive", self.delta)));
        }
        let tol = 1e-12 * self.delta;
        for (side, v) in [('+', &self.rho_plus), ('-', &self.rho_minus)] {
            for (j, &m) in v.iter().enumerate() {
                if !(m >= -tol && m <= self.delta + tol) {
                    return Err(Error::Constraint {
                        bin: j,
                        side,
                        detail: format!("bin mass {m} outside [0, {}]", self.delta),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn total_mass(&self) -> f64 {
        self.rho_plus.iter().chain(&self.rho_minus).sum()
    }

    /// [lo, hi] of bin j on the given side.
    pub fn bin(&self, side: char, j: usize) -> (f64, f64) {
        let d = self.delta;
        if side == '+' {
            (j as f64 * d, (j + 1) as f64 * d)
        } else {
            (-((j + 1) as f64) * d, -(j as f64) * d)
        }
    }

    fn bins(&self) -> impl Iterator<Item = (char, usize, f64)> + '_ {
        let p = self.rho_plus.iter().enumerate().map(|(j, &m)| ('+', j, m));
        let n = self.rho_minus.iter().enumerate().map(|(j, &m)| ('-', j, m));
        n.chain(p)
    }

    /// Random constraints with 1..=max_bins bins per side; roughly a
    /// quarter of the bins are full or empty.
    pub fn random<R: Rng>(rng: &mut R, max_bins: usize) -> Self {
        let delta = rng.gen_range(0.2..1.0);
        let side = |rng: &mut R| -> Vec<f64> {
            let n = rng.gen_range(1..=max_bins);
            (0..n)
                .map(|_| match rng.gen_range(0..8) {
                    0 => 0.0,
                    1 => delta,
                    _ => rng.gen_range(0.0..1.0) * delta,
                })
                .collect()
        };
        let rho_plus = side(rng);
        let rho_minus = side(rng);
        Self { delta, rho_plus, rho_minus }
    }

    /// Grid spanning all bins with `cells_per_bin` cells per bin.
    pub fn grid(&self, cells_per_bin: usize) -> (f64, f64, usize) {
        let w = self.delta / cells_per_bin as f64;
        let x0 = -(self.rho_minus.len() as f64) * self.delta;
        (x0, w, (self.rho_minus.len() + self.rho_plus.len()) * cells_per_bin)
    }

    /// Random feasible density on the bin grid: per bin, values t u_i
    /// clipped to 1 with t chosen so the bin mass matches.
    pub fn random_feasible<R: Rng>(&self, rng: &mut R, cells_per_bin: usize) -> Density1D {
        let (x0, w, n) = self.grid(cells_per_bin);
        let mut values = vec![0.0; n];
        let nm = self.rho_minus.len();
        for (side, j, m) in self.bins().collect::<Vec<_>>() {
            let b = if side == '-' { nm - 1 - j } else { nm + j };
            let cells = &mut values[b * cells_per_bin..(b + 1) * cells_per_bin];
            fill_bin(cells, m / w, rng);
        }
        Density1D { x0, width: w, values }
    }
}

/// Fills `cells` with values in [0, 1] summing to `target` cell units.
fn fill_bin<R: Rng>(cells: &mut [f64], target: f64, rng: &mut R) {
    let n = cells.len() as f64;
    if target >= n {
        cells.iter_mut().for_each(|c| *c = 1.0);
        return;
    }
    if target <= 0.0 {
        return;
    }
    let u: Vec<f64> = cells.iter().map(|_| rng.gen_range(0.0..1.0f64).powi(2) + 1e-3).collect();
    let sum_at = |t: f64| u.iter().map(|&x| (t * x).min(1.0)).sum::<f64>();
    let (mut lo, mut hi) = (0.0, 1.0);
    while sum_at(hi) < target {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if sum_at(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    for (c, &x) in cells.iter_mut().zip(&u) {
        *c = (hi * x).min(1.0);
    }
    // absorb the bisection residue in the least saturated cell
    let r = target - cells.iter().sum::<f64>();
    if let Some(c) = cells.iter_mut().min_by(|a, b| a.total_cmp(b)) {
        *c = (*c + r).clamp(0.0, 1.0);
    }
}

/// Phi of a density that satisfies the bin constraints.
pub fn phi_binned(c: &BinConstraints, rho: &Density1D) -> Result<f64> {
    c.validate()?;
    let tol = 1e-9 * c.delta;
    for (side, j, m) in c.bins() {
        let (lo, hi) = c.bin(side, j);
        let got = rho.mass_below(hi) - rho.mass_below(lo);
        if (got - m).abs() > tol {
            return Err(Error::Constraint {
                bin: j,
                side,
                detail: format!("density mass {got} differs from constraint {m}"),
            });
        }
    }
    let lo = c.bin('-', c.rho_minus.len().saturating_sub(1)).0.min(0.0);
    let hi = c.bin('+', c.rho_plus.len().saturating_sub(1)).1.max(0.0);
    let below = rho.mass_below(lo);
    let above = rho.mass() - rho.mass_below(hi);
    if below > tol || above > tol {
        let (bin, side) = if above > tol { (c.rho_plus.len(), '+') } else { (c.rho_minus.len(), '-') };
        return Err(Error::Constraint { bin, side, detail: "mass outside the constrained bins".into() });
    }
    for (i, &v) in rho.values.iter().enumerate() {
        if !(-1e-12..=1.0 + 1e-12).contains(&v) {
            let x = rho.bin_left(i) + 0.5 * rho.width;
            let (side, bin) = if x >= 0.0 { ('+', (x / c.delta) as usize) } else { ('-', (-x / c.delta) as usize) };
            return Err(Error::Constraint { bin, side, detail: format!("density value {v} outside [0, 1]") });
        }
    }
    phi_of_density(rho)
}

/// Intervals of a placement: one sub-interval of length m per bin, at
/// offset `pos` from the bin's left edge.
fn placement(c: &BinConstraints, pos: &[f64]) -> Vec<(f64, f64)> {
    let mut v: Vec<(f64, f64)> = c
        .bins()
        .zip(pos)
        .filter(|((_, _, m), _)| *m > 0.0)
        .map(|((side, j, m), &p)| {
            let (lo, hi) = c.bin(side, j);
            if p >= hi - lo - m {
                (hi - m, hi)
            } else {
                (lo + p, lo + p + m)
            }
        })
        .collect();
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    // adjacent bin edges computed separately can disagree in the last bit
    for k in 1..v.len() {
        if v[k].0 < v[k - 1].1 {
            v[k].0 = v[k - 1].1;
        }
    }
    v
}

/// Minimizer of Phi over the constraint set, as an interval set (one
/// interval per nonempty bin, anchored at a bin edge), with its Phi.
pub fn minimize_binned_intervals(c: &BinConstraints, n_bins_active: usize) -> Result<(IntervalSet, f64)> {
    c.validate()?;
    if n_bins_active > MAX_ACTIVE_BINS {
        return Err(Error::domain(format!(
            "{n_bins_active} active bins requested; exhaustive search is limited to {MAX_ACTIVE_BINS} per side"
        )));
    }
    for (side, v) in [('+', &c.rho_plus), ('-', &c.rho_minus)] {
        let active = v.iter().filter(|&&m| m > 0.0).count();
        if active > n_bins_active {
            return Err(Error::domain(format!(
                "{active} nonempty bins on side {side} exceed n_bins_active = {n_bins_active}"
            )));
        }
    }
    let bins: Vec<(char, usize, f64)> = c.bins().collect();
    let slack: Vec<f64> = bins.iter().map(|&(_, _, m)| (c.delta - m).max(0.0)).collect();
    let free: Vec<usize> = (0..bins.len()).filter(|&k| slack[k] > 0.0 && bins[k].2 > 0.0).collect();
    let mut best_pos = vec![0.0; bins.len()];
    let mut best = f64::INFINITY;
    let mut pos = vec![0.0; bins.len()];
    for mask in 0u32..(1u32 << free.len()) {
        for (b, &k) in free.iter().enumerate() {
            pos[k] = if mask >> b & 1 == 1 { slack[k] } else { 0.0 };
        }
        let phi = phi_raw(&placement(c, &pos));
        if phi < best {
            best = phi;
            best_pos.clone_from(&pos);
        }
    }
    // coordinate refinement of the anchor positions
    let samples = 16;
    loop {
        let mut improved = false;
        for &k in &free {
            let keep = best_pos[k];
            let mut pos = best_pos.clone();
            for s in 0..=samples {
                pos[k] = slack[k] * s as f64 / samples as f64;
                let phi = phi_raw(&placement(c, &pos));
                if phi < best - 1e-15 * best.abs() {
                    best = phi;
                    best_pos[k] = pos[k];
                    improved = true;
                }
            }
            if !improved {
                best_pos[k] = keep;
            }
        }
        if !improved {
            break;
        }
    }
    let v = placement(c, &best_pos);
    Ok((IntervalSet::new(v)?, best))
}

/// Minimizer of Phi over the constraint set as a density on a grid with
/// `cells_per_bin` cells per bin; cells cut by an interval end carry the
/// covered fraction.
pub fn minimize_binned_on_grid(c: &BinConstraints, n_bins_active: usize, cells_per_bin: usize) -> Result<Density1D> {
    let (set, _) = minimize_binned_intervals(c, n_bins_active)?;
    let (x0, w, n) = c.grid(cells_per_bin);
    let mut values = vec![0.0; n];
    for &(a, b) in set.intervals() {
        let i0 = (((a - x0) / w).floor().max(0.0)) as usize;
        let i1 = (((b - x0) / w).ceil() as usize).min(n);
        for (i, v) in values.iter_mut().enumerate().take(i1).skip(i0) {
            let cl = x0 + i as f64 * w;
            let cover = (b.min(cl + w) - a.max(cl)).max(0.0) / w;
            *v = (*v + cover).min(1.0);
        }
    }
    Density1D::new(x0, w, values)
}

/// `minimize_binned_on_grid` with 64 cells per bin.
pub fn minimize_binned(c: &BinConstraints, n_bins_active: usize) -> Result<Density1D> {
    minimize_binned_on_grid(c, n_bins_active, 64)
}
