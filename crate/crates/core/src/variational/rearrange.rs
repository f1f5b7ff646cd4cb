use serde::{Deserialize, Serialize};

use super::intervals::{abs_weight_integral, phi_intervals, phi_raw, IntervalSet};
use crate::numeric::NeumaierSum;
use crate::{Error, Result};

/// One elementary slide: the block of intervals right of the gap moves
/// inward by the gap length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RearrangeMove {
    /// '+' for the right half-line, '-' for the left.
    pub side: char,
    pub gap: (f64, f64),
    pub q_len: f64,
    pub i_len: f64,
    pub jprime_mass: f64,
    pub delta_phi_exact: f64,
    /// 2 |Q| |I| |J'|.
    pub delta_phi_formula: f64,
    /// 2 L |Q| |I|.
    pub delta_phi_lower_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RearrangeTrace {
    pub l: f64,
    pub phi_initial: f64,
    pub phi_final: f64,
    pub moves: Vec<RearrangeMove>,
}

impl RearrangeTrace {
    pub fn total_delta(&self) -> f64 {
        self.moves.iter().map(|m| m.delta_phi_exact).collect::<NeumaierSum>().value()
    }
}

fn check_centered(j: &IntervalSet, l: f64) -> Result<()> {
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::domain(format!("L = {l} must be positive")));
    }
    let tol = 1e-9 * l.max(1.0);
    let (neg, pos) = j.half_line_masses();
    if (neg - pos).abs() > tol {
        return Err(Error::domain(format!(
            "set is not centered: mass {neg} on the left, {pos} on the right"
        )));
    }
    if (neg + pos - 2.0 * l).abs() > tol {
        return Err(Error::domain(format!("|J| = {} differs from 2L = {}", neg + pos, 2.0 * l)));
    }
    Ok(())
}

/// Closes the gaps on [0, inf) from the right; `v` is sorted and already
/// split at 0.
fn close_right(v: &mut Vec<(f64, f64)>, l: f64, side: char, moves: &mut Vec<RearrangeMove>) {
    let p = v.iter().position(|&(a, _)| a >= 0.0).unwrap_or(v.len());
    let total: f64 = v.iter().map(|(a, b)| b - a).sum();
    while v.len() > p {
        let last = v.len() - 1;
        let prev_end = if last > p { v[last - 1].1 } else { 0.0 };
        let gap = v[last].0 - prev_end;
        if gap > 0.0 {
            let before = phi_raw(v);
            let i_len = v[last].1 - v[last].0;
            v[last] = (v[last].0 - gap, v[last].1 - gap);
            let after = phi_raw(v);
            let jprime = total - i_len;
            moves.push(RearrangeMove {
                side,
                gap: (prev_end, prev_end + gap),
                q_len: gap,
                i_len,
                jprime_mass: jprime,
                delta_phi_exact: before - after,
                delta_phi_formula: 2.0 * gap * i_len * jprime,
                delta_phi_lower_bound: 2.0 * l * gap * i_len,
            });
        }
        if last == p {
            break;
        }
        v[last - 1].1 = v[last].1;
        v.pop();
    }
}

fn split_at_zero(v: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(v.len() + 1);
    for &(a, b) in v {
        if a < 0.0 && b > 0.0 {
            out.push((a, 0.0));
            out.push((0.0, b));
        } else {
            out.push((a, b));
        }
    }
    out
}

fn reflect(v: &[(f64, f64)]) -> Vec<(f64, f64)> {
    v.iter().rev().map(|&(a, b)| (-b, -a)).collect()
}

/// Gap-closing rearrangement of a centered set with |J| = 2L onto
/// approximately [-L, L]: right half-line first, outermost gap first, then
/// the left half-line by reflection.
pub fn gap_close(j: &IntervalSet, l: f64) -> Result<(IntervalSet, RearrangeTrace)> {
    check_centered(j, l)?;
    let phi_initial = phi_intervals(j);
    let mut moves = Vec::new();
    let mut v = split_at_zero(j.intervals());
    close_right(&mut v, l, '+', &mut moves);
    let mut r = reflect(&v);
    let first_left = moves.len();
    close_right(&mut r, l, '-', &mut moves);
    for m in &mut moves[first_left..] {
        m.gap = (-m.gap.1, -m.gap.0);
    }
    let v = reflect(&r);
    let fin = IntervalSet::new(v)?;
    let trace = RearrangeTrace { l, phi_initial, phi_final: phi_intervals(&fin), moves };
    Ok((fin, trace))
}

/// Result of the one-dimensional inequality check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaCertificate {
    /// Phi(chi_J) - Phi(chi_[-L, L]).
    pub lhs: f64,
    /// Integral of ||x| - L| over J delta [-L, L].
    pub rhs_integral: f64,
    /// lhs / (L rhs), +inf when rhs = 0.
    pub ratio: f64,
}

/// Integral of ||x| - L| over the symmetric difference of J and [-L, L].
pub fn sym_diff_weight(j: &IntervalSet, l: f64) -> f64 {
    let mut s = NeumaierSum::new();
    let mut cursor = -l;
    for &(a, b) in j.intervals() {
        // parts of J outside [-L, L]
        s.add(abs_weight_integral(a, b.min(-l), l));
        s.add(abs_weight_integral(a.max(l), b, l));
        // holes of J inside [-L, L]
        let lo = a.max(-l).min(l);
        if lo > cursor {
            s.add(abs_weight_integral(cursor, lo, l));
        }
        cursor = cursor.max(b.min(l));
    }
    if cursor < l {
        s.add(abs_weight_integral(cursor, l, l));
    }
    s.value()
}

pub fn lemma_oned_certify(j: &IntervalSet, l: f64) -> Result<LemmaCertificate> {
    check_centered(j, l)?;
    let lhs = phi_intervals(j) - 8.0 * l * l * l / 3.0;
    let rhs = sym_diff_weight(j, l);
    let ratio = if rhs == 0.0 { f64::INFINITY } else { lhs / (l * rhs) };
    Ok(LemmaCertificate { lhs, rhs_integral: rhs, ratio })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn two_blocks() -> IntervalSet {
        IntervalSet::new(vec![(-1.0, 0.0), (0.5, 1.5)]).unwrap()
    }

    #[test]
    fn two_block_example() {
        let (fin, t) = gap_close(&two_blocks(), 1.0).unwrap();
        assert_eq!(fin.intervals(), &[(-1.0, 1.0)]);
        assert_eq!(t.moves.len(), 1);
        let m = &t.moves[0];
        assert!((m.delta_phi_exact - 1.0).abs() < 1e-14);
        assert_eq!(m.delta_phi_formula, 1.0);
        assert!((t.phi_initial - 11.0 / 3.0).abs() < 1e-14);
        assert!((t.phi_final - 8.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn rectangle_has_empty_trace() {
        let j = IntervalSet::new(vec![(-2.0, 2.0)]).unwrap();
        let (fin, t) = gap_close(&j, 2.0).unwrap();
        assert!(t.moves.is_empty());
        assert_eq!(fin, j);
    }

    #[test]
    fn uncentered_is_rejected() {
        let j = IntervalSet::new(vec![(0.0, 2.0)]).unwrap();
        assert!(gap_close(&j, 1.0).is_err());
        assert!(lemma_oned_certify(&j, 1.0).is_err());
    }

    #[test]
    fn left_side_moves_are_mirrored() {
        let j = IntervalSet::new(vec![(-2.0, -1.5), (-1.0, -0.5), (0.0, 1.0)]).unwrap();
        let (fin, t) = gap_close(&j, 1.0).unwrap();
        assert_eq!(fin.intervals(), &[(-1.0, 1.0)]);
        assert_eq!(t.moves.len(), 2);
        assert!(t.moves.iter().all(|m| m.side == '-'));
        assert_eq!(t.moves[0].gap, (-1.5, -1.0));
        assert_eq!(t.moves[1].gap, (-0.5, 0.0));
    }

    #[test]
    fn random_six_interval_sets() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let l = 2.0;
            let j = IntervalSet::random_centered(&mut rng, l, 3, 3);
            let (_, t) = gap_close(&j, l).unwrap();
            let target = phi_intervals(&j) - 8.0 * l * l * l / 3.0;
            assert!((t.total_delta() - target).abs() < 1e-10);
            for m in &t.moves {
                assert!((m.delta_phi_exact - m.delta_phi_formula).abs() < 1e-12);
                assert!(m.jprime_mass >= l - 1e-12);
                assert!(m.delta_phi_exact >= m.delta_phi_lower_bound - 1e-12);
            }
        }
    }

    #[test]
    fn lemma_example() {
        let c = lemma_oned_certify(&two_blocks(), 1.0).unwrap();
        assert!((c.lhs - 1.0).abs() < 1e-14);
        assert!((c.rhs_integral - 0.5).abs() < 1e-15);
        assert!((c.ratio - 2.0).abs() < 1e-13);
        let e = lemma_oned_certify(&IntervalSet::new(vec![(-1.0, 1.0)]).unwrap(), 1.0).unwrap();
        assert_eq!(e.rhs_integral, 0.0);
        assert!(e.ratio.is_infinite());
    }

    #[test]
    fn sym_diff_weight_matches_riemann_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let l = rng.gen_range(0.5..2.0);
            let j = IntervalSet::random_centered(&mut rng, l, 4, 3);
            // Riemann sum on a partition refined at every discontinuity
            let mut pts = vec![-4.0 * l, -l, 0.0, l, 4.0 * l];
            for &(a, b) in j.intervals() {
                pts.extend([a, b]);
            }
            pts.sort_by(f64::total_cmp);
            let mut s = 0.0;
            for w in pts.windows(2) {
                let n = 1000;
                let dx = (w[1] - w[0]) / n as f64;
                for k in 0..n {
                    let x = w[0] + (k as f64 + 0.5) * dx;
                    if j.contains(x) != (x.abs() <= l) {
                        s += (x.abs() - l).abs() * dx;
                    }
                }
            }
            let exact = sym_diff_weight(&j, l);
            assert!((s - exact).abs() < 1e-8, "{s} vs {exact}");
        }
    }
}
