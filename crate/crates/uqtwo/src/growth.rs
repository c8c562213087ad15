//! Highest-weight growth machinery: norms of the e^gamma line, the growth
//! graph on Gamma, the length function, the multiplicity profile of the
//! operator L, and the spectral-dimension estimate.
//!
//! One correction to an intermediate display: with the norm
//! `||e^gamma|| = |q|^{gamma_3} / sqrt(|2 gamma_1 + 1|_{|q|})`, the
//! eps_1 - eps_3 step ratio is
//!
//! ```text
//! ||e^gamma|| / ||e^{gamma+eps_1-eps_3}|| = sqrt(S'/S) <= sqrt(1 + |q|^2)
//! ```
//!
//! (S, S' the geometric sums of the adjacent q-integers), not sqrt(2|q|):
//! at gamma = 0 the ratio is sqrt(1+|q|^2) > sqrt(2|q|) whenever |q| < 1.
//! The b-edge bound sqrt(1+|q|^2)/|q| <= sqrt(2)/|q| is as displayed. The
//! corrected bounds are what the edge-admission constant enforces.

use std::collections::{BTreeMap, VecDeque};

use crate::qnum::{q_integer, QParam};

/// Highest-weight label (doubled where half-integral): gamma_1 >= 0,
/// gamma_2 in Z, |gamma_3| <= gamma_1 with matching parity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GammaIndex {
    pub g1_2: u32,
    pub g2: i32,
    pub g3_2: i32,
}

impl GammaIndex {
    pub fn new(g1_2: u32, g2: i32, g3_2: i32) -> Option<GammaIndex> {
        let idx = GammaIndex { g1_2, g2, g3_2 };
        idx.is_valid().then_some(idx)
    }

    pub fn is_valid(&self) -> bool {
        let g1 = self.g1_2 as i32;
        self.g3_2.abs() <= g1 && (self.g3_2 - g1).rem_euclid(2) == 0
    }

    pub const ROOT: GammaIndex = GammaIndex { g1_2: 0, g2: 0, g3_2: 0 };
}

/// `||e^gamma|| = |q|^{gamma_3} / sqrt(|2 gamma_1 + 1|_{|q|})`.
pub fn e_gamma_norm(qp: &QParam, gamma: GammaIndex) -> f64 {
    assert!(gamma.is_valid(), "invalid highest-weight label");
    let qint = q_integer(gamma.g1_2 + 1, qp.abs_q).expect("|q| in (0,1)");
    qp.abs_q.powf(gamma.g3_2 as f64 / 2.0) / qint.sqrt()
}

/// Norm-ratio bounds of the three step families (exact suprema).
pub struct StepBounds {
    pub d_step: f64,
    pub a_step: f64,
    pub b_step: f64,
}

pub fn step_bounds(qp: &QParam) -> StepBounds {
    let s = (1.0 + qp.abs_q * qp.abs_q).sqrt();
    StepBounds { d_step: 1.0, a_step: s, b_step: s / qp.abs_q }
}

/// Edge-admission constant: max of the three suprema plus a 10% margin.
pub fn edge_constant(qp: &QParam) -> f64 {
    let b = step_bounds(qp);
    1.1 * b.d_step.max(b.a_step).max(b.b_step)
}

/// Out-edges of the growth graph at gamma: gamma +- eps_2 (D, D*),
/// gamma + eps_1 - eps_3 (a), and gamma + eps_1 + eps_3 (b, only when
/// gamma_1 = gamma_3). Each emitted edge's norm ratio is checked against
/// the admission constant.
pub fn growth_edges(qp: &QParam, gamma: GammaIndex) -> Vec<GammaIndex> {
    let c = edge_constant(qp);
    let n0 = e_gamma_norm(qp, gamma);
    let mut out = Vec::with_capacity(4);
    let mut push = |idx: Option<GammaIndex>| {
        if let Some(idx) = idx {
            let ratio = n0 / e_gamma_norm(qp, idx);
            assert!(ratio < c, "edge ratio {ratio} exceeds admission constant {c}");
            out.push(idx);
        }
    };
    push(GammaIndex::new(gamma.g1_2, gamma.g2 + 1, gamma.g3_2));
    push(GammaIndex::new(gamma.g1_2, gamma.g2 - 1, gamma.g3_2));
    push(GammaIndex::new(gamma.g1_2 + 1, gamma.g2, gamma.g3_2 - 1));
    if gamma.g3_2 >= 0 && gamma.g1_2 == gamma.g3_2 as u32 {
        push(GammaIndex::new(gamma.g1_2 + 1, gamma.g2, gamma.g3_2 + 1));
    }
    out
}

/// BFS distance from the root (0,0,0) in the growth graph.
///
/// Every edge raises gamma_1 by 0 or 1/2 and moves gamma_2 by at most 1, so
/// shortest paths never leave the region gamma_1 <= gamma_1(target),
/// |gamma_2| <= |gamma_2(target)| + 2 gamma_1(target) + 2.
pub fn path_length(qp: &QParam, target: GammaIndex) -> u32 {
    assert!(target.is_valid());
    if target == GammaIndex::ROOT {
        return 0;
    }
    let g1_cap = target.g1_2;
    let g2_cap = target.g2.abs() + target.g1_2 as i32 + 2;
    let mut dist: BTreeMap<GammaIndex, u32> = BTreeMap::new();
    let mut queue = VecDeque::new();
    dist.insert(GammaIndex::ROOT, 0);
    queue.push_back(GammaIndex::ROOT);
    while let Some(v) = queue.pop_front() {
        let d = dist[&v];
        if v == target {
            return d;
        }
        for w in growth_edges(qp, v) {
            if w.g1_2 > g1_cap || w.g2.abs() > g2_cap {
                continue;
            }
            dist.entry(w).or_insert_with(|| {
                queue.push_back(w);
                d + 1
            });
        }
    }
    unreachable!("growth graph is rooted at (0,0,0)")
}

/// Multiplicity of the L-eigenvalue n: the count of basis vectors e^{(gamma,j)}
/// with 2 gamma_1 + |gamma_2| = n, i.e. sum over admissible (gamma_1, gamma_2)
/// of (2 gamma_1 + 1)^2 (gamma_3 and the column index j each range freely).
pub fn l_multiplicity(n: u64) -> u64 {
    if n == 0 {
        return 1;
    }
    // 2 gamma_1 = g runs over 0..=n; |gamma_2| = n - g contributes twice unless 0
    let mut total = 0u64;
    for g in 0..=n {
        let weight = if g == n { 1 } else { 2 };
        total += weight * (g + 1) * (g + 1);
    }
    total
}

/// Convergence classification of sum_n L_multiplicity(n) n^{-p}.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceClass {
    Convergent,
    Divergent,
}

/// Classify one exponent by the scale-free dyadic-block ratio (the absolute
/// Cauchy test alone cannot resolve exponents near the critical one at any
/// fixed truncation: the increments decay only polynomially).
///
/// Block sums over [N/4, N/2) and [N/2, N) have ratio ~ 2^{4-p}; p is
/// convergent iff the ratio falls below 1, with a small-increment shortcut
/// for strongly convergent exponents.
pub fn classify_exponent(p: f64, n_max: u64) -> TraceClass {
    assert!(n_max >= 200);
    let mut block1 = 0.0f64; // [n_max/4, n_max/2)
    let mut block2 = 0.0f64; // [n_max/2, n_max)
    for n in (n_max / 4)..n_max {
        let term = l_multiplicity(n) as f64 * (n as f64).powf(-p);
        if n < n_max / 2 {
            block1 += term;
        } else {
            block2 += term;
        }
    }
    if block2 < 1e-6 {
        return TraceClass::Convergent;
    }
    if block2 < block1 {
        TraceClass::Convergent
    } else {
        TraceClass::Divergent
    }
}

/// Outcome of the spectral-dimension sweep over a grid of exponents.
#[derive(Debug, Clone)]
pub struct SpectralDimensionEstimate {
    /// largest divergent exponent found in the grid
    pub lower: f64,
    /// smallest convergent exponent found in the grid
    pub upper: f64,
    /// midpoint of the bracket: the classified threshold
    pub threshold: f64,
    pub classifications: Vec<(f64, TraceClass)>,
}

/// Sweep the grid (inside (3,5), straddling the expected threshold) and
/// bracket the abscissa of convergence of Tr(L^{-p}).
pub fn spectral_dimension_estimate(p_grid: &[f64], n_max: u64) -> SpectralDimensionEstimate {
    assert!(p_grid.iter().all(|p| *p > 3.0 && *p < 5.0), "exponent grid must lie in (3,5)");
    assert!(n_max >= 200);
    let classifications: Vec<(f64, TraceClass)> =
        p_grid.iter().map(|&p| (p, classify_exponent(p, n_max))).collect();
    let lower = classifications
        .iter()
        .filter(|(_, c)| *c == TraceClass::Divergent)
        .map(|(p, _)| *p)
        .fold(f64::NEG_INFINITY, f64::max);
    let upper = classifications
        .iter()
        .filter(|(_, c)| *c == TraceClass::Convergent)
        .map(|(p, _)| *p)
        .fold(f64::INFINITY, f64::min);
    SpectralDimensionEstimate { lower, upper, threshold: 0.5 * (lower + upper), classifications }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::THETA_DEFAULT;

    fn qp() -> QParam {
        QParam::new(0.5, THETA_DEFAULT).unwrap()
    }

    #[test]
    fn norm_examples_and_ratios() {
        let qp = qp();
        assert!((e_gamma_norm(&qp, GammaIndex::ROOT) - 1.0).abs() < 1e-15);
        // eps_2 steps never change the norm
        for g1_2 in 0..=40u32 {
            for g2 in [-20, -3, 0, 7, 20] {
                for g3_2 in (-(g1_2 as i32)..=g1_2 as i32).step_by(2) {
                    let g = GammaIndex::new(g1_2, g2, g3_2).unwrap();
                    let g_up = GammaIndex::new(g1_2, g2 + 1, g3_2).unwrap();
                    let r = e_gamma_norm(&qp, g) / e_gamma_norm(&qp, g_up);
                    assert!((r - 1.0).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn step_ratio_bounds_hold_on_lattice() {
        let qp = qp();
        let b = step_bounds(&qp);
        for g1_2 in 0..=40u32 {
            for g3_2 in (-(g1_2 as i32)..=g1_2 as i32).step_by(2) {
                let g = GammaIndex::new(g1_2, 0, g3_2).unwrap();
                let n0 = e_gamma_norm(&qp, g);
                let a_tgt = GammaIndex::new(g1_2 + 1, 0, g3_2 - 1).unwrap();
                let ra = n0 / e_gamma_norm(&qp, a_tgt);
                assert!(ra <= b.a_step + 1e-13, "a-step ratio {ra}");
                if g3_2 >= 0 && g1_2 == g3_2 as u32 {
                    let b_tgt = GammaIndex::new(g1_2 + 1, 0, g3_2 + 1).unwrap();
                    let rb = n0 / e_gamma_norm(&qp, b_tgt);
                    assert!(rb <= b.b_step + 1e-13, "b-step ratio {rb}");
                }
            }
        }
        // the corrected a-step bound is attained at the root
        let r0 = e_gamma_norm(&qp, GammaIndex::ROOT)
            / e_gamma_norm(&qp, GammaIndex::new(1, 0, -1).unwrap());
        assert!((r0 - (1.0 + qp.abs_q * qp.abs_q).sqrt()).abs() < 1e-13);
    }

    #[test]
    fn edges_at_root_and_b_condition() {
        let qp = qp();
        let edges = growth_edges(&qp, GammaIndex::ROOT);
        assert_eq!(edges.len(), 4);
        assert!(edges.contains(&GammaIndex::new(0, 1, 0).unwrap()));
        assert!(edges.contains(&GammaIndex::new(0, -1, 0).unwrap()));
        assert!(edges.contains(&GammaIndex::new(1, 0, -1).unwrap()));
        assert!(edges.contains(&GammaIndex::new(1, 0, 1).unwrap()));
        // no b-edge away from the diagonal
        let e2 = growth_edges(&qp, GammaIndex::new(1, 0, -1).unwrap());
        assert_eq!(e2.len(), 3);
        assert!(!e2.contains(&GammaIndex::new(2, 0, 0).unwrap()));
    }

    #[test]
    fn path_length_examples_and_bound() {
        let qp = qp();
        assert_eq!(path_length(&qp, GammaIndex::ROOT), 0);
        // (gamma_1, 0, gamma_3): length 2 gamma_1 via b-chain then a-chain
        for (g1_2, g3_2) in [(2, 0), (3, 1), (4, -2), (5, 5)] {
            let g = GammaIndex::new(g1_2, 0, g3_2).unwrap();
            assert_eq!(path_length(&qp, g), g1_2);
        }
        // (1, 3, 0) within the bound 2 gamma_1 + |gamma_2| = 5
        assert!(path_length(&qp, GammaIndex::new(2, 3, 0).unwrap()) <= 5);
    }

    #[test]
    fn path_length_exhaustive_bound() {
        // BFS distance <= 2 gamma_1 + |gamma_2| whenever that is <= 12, with
        // equality on the axis gamma_3 = gamma_1, gamma_2 >= 0
        let qp = qp();
        for g1_2 in 0..=12u32 {
            for g2 in -(12 - g1_2 as i32)..=(12 - g1_2 as i32) {
                let bound = g1_2 + g2.unsigned_abs();
                for g3_2 in (-(g1_2 as i32)..=g1_2 as i32).step_by(2) {
                    let g = GammaIndex::new(g1_2, g2, g3_2).unwrap();
                    let d = path_length(&qp, g);
                    assert!(d <= bound, "{g:?}: {d} > {bound}");
                    if g3_2 == g1_2 as i32 && g2 >= 0 {
                        assert_eq!(d, bound, "{g:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn multiplicity_profile() {
        assert_eq!(l_multiplicity(0), 1);
        assert_eq!(l_multiplicity(1), 6);
        // cubic growth: L(2n)/L(n) -> 8 within 15% for n >= 16
        for n in [16u64, 24, 32, 64] {
            let r = l_multiplicity(2 * n) as f64 / l_multiplicity(n) as f64;
            assert!((r - 8.0).abs() / 8.0 < 0.15, "n={n}: {r}");
        }
        // partial sums grow like N^4
        let s: u64 = (0..=100).map(l_multiplicity).sum();
        let s2: u64 = (0..=200).map(l_multiplicity).sum();
        let ratio = s2 as f64 / s as f64;
        assert!((ratio - 16.0).abs() < 2.0, "{ratio}");
    }

    #[test]
    fn spectral_dimension_bracket() {
        let grid = [3.5, 3.7, 3.8, 3.9, 3.95, 4.05, 4.1, 4.2, 4.3, 4.5];
        let est = spectral_dimension_estimate(&grid, 10_000);
        assert!(est.lower >= 3.8 && est.upper <= 4.2, "{:?}", (est.lower, est.upper));
        assert!(est.lower < est.upper);
        assert_eq!(classify_exponent(4.5, 10_000), TraceClass::Convergent);
        assert_eq!(classify_exponent(3.5, 10_000), TraceClass::Divergent);
    }
}
