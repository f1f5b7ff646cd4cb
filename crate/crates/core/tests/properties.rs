use std::f64::consts::PI;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use strip_euler::biot_savart::{gamma, kernel_k};
use strip_euler::functionals::{energy_decomposition, rectangle_energy, regularized_energy};
use strip_euler::geometry::{point_of_centering, weighted_sym_diff, Contour, Patch};
use strip_euler::variational::{gap_close, phi_binned, phi_intervals, BinConstraints, IntervalSet};
use strip_euler::{phi_of_density, Density1D};

/// Band [-L, L] x T with boundary modes, rescaled in x to area 4 pi L.
fn perturbed_band(l: f64, right: [f64; 3], left: [f64; 3], h: f64) -> Patch {
    let prof = |m: [f64; 3], y: f64| m[0] * y.sin() + m[1] * (2.0 * y).cos() + m[2] * (3.0 * y).sin();
    let raw = Patch::from_profiles(|y| l + prof(right, y), |y| -l + prof(left, y), 256, l + 2.0).unwrap();
    let s = 4.0 * PI * l / raw.contour_area();
    let contours: Vec<Contour> =
        raw.contours().iter().map(|c| c.map_nodes(|x, y| (s * x, y)).unwrap()).collect();
    raw.with_contours(contours).unwrap().with_cell_size(h).unwrap()
}

fn modes(amp: f64) -> impl Strategy<Value = [f64; 3]> {
    [-amp..amp, -amp..amp, -amp..amp]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn kernel_is_odd(x in -6.0f64..6.0, y in -3.0f64..3.0) {
        prop_assume!(x.abs() > 1e-3 || y.abs() > 1e-3);
        let a = kernel_k(x, y).unwrap();
        let b = kernel_k(-x, -y).unwrap();
        prop_assert!((a.u1 + b.u1).abs() <= 1e-13 * a.norm().max(1.0));
        prop_assert!((a.u2 + b.u2).abs() <= 1e-13 * a.norm().max(1.0));
    }

    #[test]
    fn kernel_is_perp_gradient_of_gamma(x in 0.2f64..5.0, y in -3.0f64..3.0) {
        let e = 1e-5;
        let gx = (gamma(x + e, y) - gamma(x - e, y)) / (2.0 * e);
        let gy = (gamma(x, y + e) - gamma(x, y - e)) / (2.0 * e);
        let k = kernel_k(x, y).unwrap();
        prop_assert!((k.u1 + gy).abs() < 1e-8 * k.norm().max(1.0));
        prop_assert!((k.u2 - gx).abs() < 1e-8 * k.norm().max(1.0));
    }

    #[test]
    fn energy_translation_and_reflection(a in -2.0f64..2.0, r in 0.3f64..1.2, cy in -3.0f64..3.0) {
        let p = Patch::disc(0.3, cy, r, 200).unwrap().with_cell_size(0.02).unwrap();
        let f = regularized_energy(&p).unwrap();
        let ft = regularized_energy(&p.translate(a).unwrap()).unwrap();
        let fr = regularized_energy(&p.reflect_x().unwrap()).unwrap();
        prop_assert!((ft - f).abs() <= 1e-4 * f.abs(), "F {f} translated {ft}");
        prop_assert!((fr - f).abs() <= 1e-4 * f.abs(), "F {f} reflected {fr}");
    }

    #[test]
    fn centering_is_translation_covariant(a in -1.5f64..1.5, r in modes(0.1), le in modes(0.1)) {
        let p = perturbed_band(1.0, r, le, 0.01);
        let (lo, hi) = point_of_centering(&p).unwrap();
        let (lo2, hi2) = point_of_centering(&p.translate(a).unwrap()).unwrap();
        prop_assert!((lo2 - lo - a).abs() < 1e-9 && (hi2 - hi - a).abs() < 1e-9);
        let (rl, rh) = point_of_centering(&p.reflect_x().unwrap()).unwrap();
        prop_assert!((rl + hi).abs() < 1e-9 && (rh + lo).abs() < 1e-9);
    }

    #[test]
    fn chebyshev_tail_bound(r in modes(0.2), le in modes(0.2), xc in -0.1f64..0.1, mu in 0.0f64..0.3) {
        let p = perturbed_band(1.0, r, le, 0.01);
        let w = weighted_sym_diff(&p, xc, 1.0).unwrap();
        prop_assert!(w.value >= mu * w.tail(mu) - 1e-12);
        prop_assert!(w.tail(mu) <= w.measure() + 1e-12);
    }

    #[test]
    fn decomposition_identity(r in modes(0.15), le in modes(0.15)) {
        let p = perturbed_band(1.0, r, le, 0.02);
        let rep = energy_decomposition(&p, 1.0).unwrap();
        prop_assert!(rep.identity_residual().abs() <= 1e-4 * rep.F.abs(), "{rep:?}");
    }

    #[test]
    fn rectangle_minimizes_energy(r in modes(0.1), le in modes(0.1)) {
        let p = perturbed_band(1.0, r, le, 0.01);
        let f = regularized_energy(&p).unwrap();
        let f0 = rectangle_energy(1.0);
        prop_assert!(f >= f0 - 1e-6 * f0.abs(), "F {f} below F(E0) {f0}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn gap_closing_moves_are_exact(seed in any::<u64>(), l in 0.2f64..4.0, np in 1usize..6, nn in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let j = IntervalSet::random_centered(&mut rng, l, np, nn);
        let (fin, trace) = gap_close(&j, l).unwrap();
        let scale = trace.phi_initial.abs().max(1.0);
        for m in &trace.moves {
            prop_assert!(m.delta_phi_exact >= -1e-13 * scale);
            prop_assert!((m.delta_phi_exact - m.delta_phi_formula).abs() <= 1e-12 * scale);
            if m.jprime_mass >= l {
                prop_assert!(m.delta_phi_exact >= m.delta_phi_lower_bound - 1e-12 * scale);
            }
        }
        prop_assert!((trace.total_delta() - (trace.phi_initial - trace.phi_final)).abs() <= 1e-10 * scale);
        prop_assert_eq!(fin.intervals().len(), 1);
        let (a, b) = fin.intervals()[0];
        prop_assert!((a + l).abs() < 1e-9 * l.max(1.0) && (b - l).abs() < 1e-9 * l.max(1.0));
    }

    #[test]
    fn phi_density_matches_intervals(seed in any::<u64>(), l in 0.5f64..2.0) {
        // intervals on grid points: the density route is exact there
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let j = IntervalSet::random_centered(&mut rng, l, 3, 3);
        let w = 1.0 / 64.0;
        let snapped: Vec<(f64, f64)> = j
            .intervals()
            .iter()
            .map(|&(a, b)| ((a / w).round() * w, (b / w).round() * w))
            .filter(|(a, b)| b > a)
            .collect();
        prop_assume!(!snapped.is_empty());
        let set = IntervalSet::new(snapped).unwrap();
        let (x0, x1) = (set.intervals()[0].0, set.intervals().last().unwrap().1);
        let n = ((x1 - x0) / w).round() as usize;
        let values: Vec<f64> = (0..n).map(|i| if set.contains(x0 + (i as f64 + 0.5) * w) { 1.0 } else { 0.0 }).collect();
        let rho = Density1D::new(x0, w, values).unwrap();
        let a = phi_of_density(&rho).unwrap();
        let b = phi_intervals(&set);
        prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0), "{a} vs {b}");
    }

    #[test]
    fn phi_is_concave_on_constraint_sets(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = BinConstraints::random(&mut rng, 4);
        let r0 = c.random_feasible(&mut rng, 16);
        let r1 = c.random_feasible(&mut rng, 16);
        let mut mid = r0.clone();
        for (m, v) in mid.values.iter_mut().zip(&r1.values) {
            *m = 0.5 * (*m + v);
        }
        let (p0, p1, pm) = (phi_binned(&c, &r0).unwrap(), phi_binned(&c, &r1).unwrap(), phi_binned(&c, &mid).unwrap());
        prop_assert!(p0 + p1 - 2.0 * pm <= 1e-12 * pm.abs().max(1.0));
    }
}
