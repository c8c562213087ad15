//! The faithful Heisenberg-type representation on l2(N) (x) l2(Z) (x) l2(Z),
//! the auxiliary generators a0, b0, D_theta, and the rank-one slice
//! projection P = 1_{bb*=1}.
//!
//! Everything here is a closed-form shift-with-weight operator:
//!
//! ```text
//! pi(a) = sqrt(1-|q|^{2N}) V (x) 1 (x) 1      a0 = V (x) 1 (x) 1
//! pi(b) = q^N (x) U (x) 1                     b0 = p (x) U (x) 1
//! pi(D) = 1 (x) e^{-2 i pi theta N} (x) U     P  = p (x) 1 (x) 1
//! ```
//!
//! so the defining relations hold identically per basis vector and the
//! residual suite just confirms rounding-level bookkeeping.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::pw::SparseOp;
use crate::qnum::QParam;

/// Basis label of l2(N) (x) l2(Z) (x) l2(Z).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HeisIndex {
    pub n: u32,
    pub k: i32,
    pub l: i32,
}

impl HeisIndex {
    pub fn new(n: u32, k: i32, l: i32) -> HeisIndex {
        HeisIndex { n, k, l }
    }
}

/// Finite window of Heisenberg labels.
#[derive(Debug, Clone, Copy)]
pub struct HeisWindow {
    pub n_max: u32,
    pub k_min: i32,
    pub k_max: i32,
    pub l_min: i32,
    pub l_max: i32,
}

impl HeisWindow {
    pub fn new(n_max: u32, k_min: i32, k_max: i32, l_min: i32, l_max: i32) -> HeisWindow {
        assert!(k_min <= k_max && l_min <= l_max);
        HeisWindow { n_max, k_min, k_max, l_min, l_max }
    }

    pub fn contains(&self, idx: HeisIndex) -> bool {
        idx.n <= self.n_max
            && (self.k_min..=self.k_max).contains(&idx.k)
            && (self.l_min..=self.l_max).contains(&idx.l)
    }

    pub fn is_interior(&self, idx: HeisIndex) -> bool {
        self.contains(idx)
            && idx.n + 1 <= self.n_max
            && idx.k > self.k_min
            && idx.k < self.k_max
            && idx.l > self.l_min
            && idx.l < self.l_max
    }

    pub fn iter(&self) -> impl Iterator<Item = HeisIndex> + '_ {
        (0..=self.n_max).flat_map(move |n| {
            (self.k_min..=self.k_max).flat_map(move |k| {
                (self.l_min..=self.l_max).map(move |l| HeisIndex::new(n, k, l))
            })
        })
    }
}

/// Generator tags for [`heis_generator`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeisGen {
    A,
    AStar,
    B,
    BStar,
    D,
    DStar,
    A0,
    A0Star,
    B0,
    B0Star,
    DTheta,
    /// The spectral projection 1_{bb* = 1} = p (x) 1 (x) 1.
    P,
}

/// One-term action of a Heisenberg generator on a basis label.
pub fn heis_action(qp: &QParam, g: HeisGen, idx: HeisIndex) -> Option<(HeisIndex, Complex64)> {
    let HeisIndex { n, k, l } = idx;
    let phase = |s: i64| {
        // e^{-2 i pi theta s} from the stored unit phase
        qp.half_pow(-2 * s).to_c64()
    };
    match g {
        HeisGen::A => {
            let w = (1.0 - qp.abs_q.powi(2 * (n as i32 + 1))).sqrt();
            Some((HeisIndex::new(n + 1, k, l), w.into()))
        }
        HeisGen::AStar => {
            if n == 0 {
                return None;
            }
            let w = (1.0 - qp.abs_q.powi(2 * n as i32)).sqrt();
            Some((HeisIndex::new(n - 1, k, l), w.into()))
        }
        HeisGen::B => {
            let w = qp.q_pow(n as i64).to_c64();
            Some((HeisIndex::new(n, k + 1, l), w))
        }
        HeisGen::BStar => {
            let w = qp.qbar_pow(n as i64).to_c64();
            Some((HeisIndex::new(n, k - 1, l), w))
        }
        HeisGen::D | HeisGen::DTheta => Some((HeisIndex::new(n, k, l + 1), phase(k as i64))),
        HeisGen::DStar => Some((HeisIndex::new(n, k, l - 1), phase(-(k as i64)))),
        HeisGen::A0 => Some((HeisIndex::new(n + 1, k, l), 1.0.into())),
        HeisGen::A0Star => (n > 0).then(|| (HeisIndex::new(n - 1, k, l), 1.0.into())),
        HeisGen::B0 => (n == 0).then(|| (HeisIndex::new(0, k + 1, l), 1.0.into())),
        HeisGen::B0Star => (n == 0).then(|| (HeisIndex::new(0, k - 1, l), 1.0.into())),
        HeisGen::P => (n == 0).then(|| (idx, 1.0.into())),
    }
}

/// Build the window-truncated operator of a generator.
pub fn heis_generator(qp: &QParam, g: HeisGen, w: &HeisWindow) -> SparseOp<HeisIndex> {
    let mut op = SparseOp::new();
    for idx in w.iter() {
        let col = match heis_action(qp, g, idx) {
            Some((dst, c)) if w.contains(dst) => vec![(dst, c)],
            _ => Vec::new(),
        };
        op.cols.insert(idx, col);
    }
    op
}

fn apply_word(qp: &QParam, word: &[HeisGen], src: HeisIndex) -> BTreeMap<HeisIndex, Complex64> {
    let mut v: BTreeMap<HeisIndex, Complex64> = BTreeMap::new();
    v.insert(src, Complex64::new(1.0, 0.0));
    for g in word.iter().rev() {
        let mut out = BTreeMap::new();
        for (idx, amp) in &v {
            if let Some((dst, c)) = heis_action(qp, *g, *idx) {
                *out.entry(dst).or_insert(Complex64::new(0.0, 0.0)) += c * amp;
            }
        }
        v = out;
    }
    v
}

/// Per-relation max residual over interior labels of the window.
pub fn relation_residuals_heis(qp: &QParam, w: &HeisWindow) -> Vec<(&'static str, f64)> {
    use HeisGen::*;
    let one = Complex64::new(1.0, 0.0);
    let abs2: Complex64 = (qp.abs_q * qp.abs_q).into();
    let relations: Vec<(&'static str, Vec<(Complex64, Vec<HeisGen>)>, Complex64)> = vec![
        ("ba = q ab", vec![(one, vec![B, A]), (-qp.q, vec![A, B])], 0.0.into()),
        ("a*b = q b a*", vec![(one, vec![AStar, B]), (-qp.q, vec![B, AStar])], 0.0.into()),
        ("bb* = b*b", vec![(one, vec![B, BStar]), (-one, vec![BStar, B])], 0.0.into()),
        ("aa* + bb* = 1", vec![(one, vec![A, AStar]), (one, vec![B, BStar])], one),
        ("a*a + |q|^2 b*b = 1", vec![(one, vec![AStar, A]), (abs2, vec![BStar, B])], one),
        ("aD = Da", vec![(one, vec![A, D]), (-one, vec![D, A])], 0.0.into()),
        ("bD = q^2|q|^-2 Db", vec![(one, vec![B, D]), (-qp.phi(), vec![D, B])], 0.0.into()),
        (
            "DD* = D*D = 1",
            vec![
                (Complex64::new(0.5, 0.0), vec![D, DStar]),
                (Complex64::new(0.5, 0.0), vec![DStar, D]),
            ],
            one,
        ),
    ];
    let mut out = Vec::with_capacity(relations.len());
    for (name, terms, rhs) in &relations {
        let mut worst = 0.0f64;
        for idx in w.iter().filter(|i| w.is_interior(*i)) {
            let mut acc: BTreeMap<HeisIndex, Complex64> = BTreeMap::new();
            for (coeff, word) in terms {
                for (dst, amp) in apply_word(qp, word, idx) {
                    *acc.entry(dst).or_insert(Complex64::new(0.0, 0.0)) += coeff * amp;
                }
            }
            *acc.entry(idx).or_insert(Complex64::new(0.0, 0.0)) -= rhs;
            let nrm: f64 = acc.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            worst = worst.max(nrm);
        }
        out.push((*name, worst));
    }
    out
}

/// `sup_{n >= n0} |sqrt(1 - |q|^{2(n+1)}) - 1|`: the tail norm of a - a0.
///
/// The supremand is decreasing in n, so the sup is attained at n0.
pub fn compact_difference_profile(qp: &QParam, n0: u32) -> f64 {
    1.0 - (1.0 - qp.abs_q.powi(2 * (n0 as i32 + 1))).sqrt()
}

/// Eigenvalues of pi(bb*) on the window, sorted descending.
///
/// pi(bb*) is exactly diagonal with entry |q|^{2n}, each repeated over the
/// k- and l-ranges.
pub fn spectrum_bbstar_heis(qp: &QParam, w: &HeisWindow) -> Vec<f64> {
    let mult = ((w.k_max - w.k_min + 1) * (w.l_max - w.l_min + 1)) as usize;
    let mut out = Vec::with_capacity(mult * (w.n_max as usize + 1));
    for n in 0..=w.n_max {
        let v = qp.abs_q.powi(2 * n as i32);
        out.extend(std::iter::repeat(v).take(mult));
    }
    out
}

/// Off-diagonal residual of pi(bb*) computed by operator composition; the
/// diagonality assertion behind the spectrum claim.
pub fn bbstar_offdiagonal_residual(qp: &QParam, w: &HeisWindow) -> f64 {
    let mut worst = 0.0f64;
    for idx in w.iter() {
        let v = apply_word(qp, &[HeisGen::B, HeisGen::BStar], idx);
        for (dst, amp) in v {
            if dst != idx {
                worst = worst.max(amp.norm());
            } else {
                worst =
                    worst.max((amp.re - qp.abs_q.powi(2 * idx.n as i32)).abs().max(amp.im.abs()));
            }
        }
    }
    worst
}

/// Residuals of the compressed pair (Pb, PD) on the range of P.
#[derive(Debug, Clone, Copy)]
pub struct TorusOnP {
    /// max residual of (Pb)(PD) - e^{2 i pi theta} (PD)(Pb) on interior labels
    pub rotation_residual: f64,
    /// max | ||Pb v|| - 1 | and | ||PD v|| - 1 | over interior slice labels
    pub unitarity_residual: f64,
    /// max residual of (Pb)(Pb)* = P on interior slice labels
    pub pbbp_residual: f64,
}

/// Compressions Pb, PD to the n = 0 slice, with the rotation-relation and
/// unitarity residuals.
pub fn torus_generators_on_p(
    qp: &QParam,
    w: &HeisWindow,
) -> (SparseOp<HeisIndex>, SparseOp<HeisIndex>, TorusOnP) {
    use HeisGen::*;
    let mut pb = SparseOp::new();
    let mut pd = SparseOp::new();
    for idx in w.iter().filter(|i| i.n == 0) {
        for (op, word) in [(&mut pb, [P, B]), (&mut pd, [P, D])] {
            let col: Vec<_> = apply_word(qp, &word, idx)
                .into_iter()
                .filter(|(dst, _)| w.contains(*dst))
                .collect();
            op.cols.insert(idx, col);
        }
    }
    let mut rot = 0.0f64;
    let mut uni = 0.0f64;
    let mut pbb = 0.0f64;
    let phase = qp.phi();
    for idx in w.iter().filter(|i| i.n == 0 && w.is_interior(*i)) {
        // (Pb)(PD) - e^{2 i pi theta}(PD)(Pb)
        let mut acc: BTreeMap<HeisIndex, Complex64> = BTreeMap::new();
        for (mid, c1) in pd.column(&idx) {
            for (dst, c2) in pb.column(mid) {
                *acc.entry(*dst).or_insert(Complex64::new(0.0, 0.0)) += c1 * c2;
            }
        }
        for (mid, c1) in pb.column(&idx) {
            for (dst, c2) in pd.column(mid) {
                *acc.entry(*dst).or_insert(Complex64::new(0.0, 0.0)) -= phase * c1 * c2;
            }
        }
        rot = rot.max(acc.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt());
        for op in [&pb, &pd] {
            let nrm: f64 = op.column(&idx).iter().map(|(_, c)| c.norm_sqr()).sum::<f64>().sqrt();
            uni = uni.max((nrm - 1.0).abs());
        }
        // (Pb)(Pb)* = P on the slice
        let mut acc: BTreeMap<HeisIndex, Complex64> = BTreeMap::new();
        for (dst, amp) in apply_word(qp, &[P, B, P, BStar], idx) {
            *acc.entry(dst).or_insert(Complex64::new(0.0, 0.0)) += amp;
        }
        *acc.entry(idx).or_insert(Complex64::new(0.0, 0.0)) -= Complex64::new(1.0, 0.0);
        pbb = pbb.max(acc.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt());
    }
    (pb, pd, TorusOnP { rotation_residual: rot, unitarity_residual: uni, pbbp_residual: pbb })
}
