//! Fourier-mode evaluation of F1 = integral of chi chi K with
//! K(x, y) = -2 sum_{n>=1} e^{-n|x|} cos(n y) / n, integrated exactly over
//! the cells of a mask.

use num_complex::Complex64;

use crate::geometry::Mask;
use crate::numeric::NeumaierSum;
use crate::par;

/// Mode count used by `f1_spectral` for a mask with `ny` rows.
pub fn default_modes(ny: usize) -> usize {
    8 * ny
}

/// F1 of the mask's fractional cell coverage from the first `n_modes`
/// Fourier modes.
pub fn f1_spectral(mask: &Mask, n_modes: usize) -> f64 {
    let g = *mask.grid();
    let deltas = mask.boundary_deltas();
    let (c0, c1) = super::pair_table::covered_columns(mask, &deltas);
    let cols: Vec<usize> = (c0..c1).collect();
    let mut by_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); c1 - c0];
    for &(i, r, d) in &deltas {
        by_col[i as usize - c0].push((r as usize, d));
    }
    let h = g.h;
    let per_mode = par::map_indexed(n_modes, |k| {
        let n = (k + 1) as f64;
        // c_n for each column; full and empty columns give 0
        // integral of e^{-i n y} over [yb, yt]
        let e = |y: f64| Complex64::new((n * y).cos(), -(n * y).sin());
        let seg = |yb: f64, yt: f64| (e(yb) - e(yt)) / Complex64::new(0.0, n);
        let coef = |i: usize| -> Complex64 {
            let cnt = mask.col_count(i) as usize;
            let mut s = Complex64::new(0.0, 0.0);
            if cnt != 0 && cnt != g.ny {
                for &(a, b) in mask.col_runs(i) {
                    s += seg(g.y_bottom(a as usize), g.y_bottom(b as usize));
                }
            }
            for &(r, d) in &by_col[i - c0] {
                s += seg(g.y_bottom(r), g.y_bottom(r + 1)) * d;
            }
            s
        };
        let enh = (-n * h).exp();
        let same = 2.0 * (n * h - 1.0 + enh) / (n * n);
        let apart = (-n * h).exp_m1().powi(2) / (n * n);
        let mut acc = Complex64::new(0.0, 0.0);
        let mut diag = NeumaierSum::new();
        let mut cross = NeumaierSum::new();
        for &i in &cols {
            let c = coef(i);
            diag.add(c.norm_sqr());
            cross.add((acc * c.conj()).re);
            acc = acc * enh + c;
        }
        -2.0 / n * (same * diag.value() + 2.0 * apart * cross.value())
    });
    // smallest terms first
    per_mode.into_iter().rev().collect::<NeumaierSum>().value()
}
