//! Peter-Weyl basis indexing and the generator actions as sparse truncated
//! operators on L^2(h).
//!
//! Half-integers are stored doubled (`l2 = 2l`, `i2 = 2i`, `j2 = 2j`) so all
//! index arithmetic is exact. Vanishing-factor detection is symbolic: a
//! down-level term is emitted only when its target is a valid label, which
//! coincides exactly with all its `1 - |q|^{2s}` factors being nonzero.
//!
//! One transcription note: in the displayed coefficient list the phase
//! prefixes of the two a-family down/up terms (`alpha_-` and `alpha_+^+`)
//! must be swapped relative to each other (`alpha_- = q^{l-j} qbar^{l-i+1}
//! sqrt(q/qbar) * [...]`, and symmetrically for `alpha_+^+`); with the
//! printed assignment the action contradicts the normal-ordering engine and
//! adjointness, with the swap every cross-check closes to machine precision.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::algebra::Gen;
use crate::dd::{Cdd, Dd};
use crate::qnum::QParam;

/// Peter-Weyl basis label (doubled half-integers plus the D-power).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PWIndex {
    pub l2: u32,
    pub i2: i32,
    pub j2: i32,
    pub k: i32,
}

impl PWIndex {
    pub fn new(l2: u32, i2: i32, j2: i32, k: i32) -> PWIndex {
        PWIndex { l2, i2, j2, k }
    }

    pub fn is_valid(&self) -> bool {
        let l = self.l2 as i32;
        self.i2.abs() <= l
            && self.j2.abs() <= l
            && (self.i2 - l).rem_euclid(2) == 0
            && (self.j2 - l).rem_euclid(2) == 0
    }
}

/// Index shift of a one-generator action term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Shift {
    pub dl2: i32,
    pub di2: i32,
    pub dj2: i32,
    pub dk: i32,
}

impl Shift {
    pub fn apply(&self, idx: PWIndex) -> Option<PWIndex> {
        let l2 = idx.l2 as i32 + self.dl2;
        if l2 < 0 {
            return None;
        }
        let out = PWIndex::new(l2 as u32, idx.i2 + self.di2, idx.j2 + self.dj2, idx.k + self.dk);
        out.is_valid().then_some(out)
    }
}

/// Finite index window: every valid label with l2 <= l2_max, k in [k_min, k_max].
#[derive(Debug, Clone, Copy)]
pub struct TruncationWindow {
    pub l2_max: u32,
    pub k_min: i32,
    pub k_max: i32,
}

impl TruncationWindow {
    pub fn new(l2_max: u32, k_min: i32, k_max: i32) -> TruncationWindow {
        assert!(k_min <= k_max);
        TruncationWindow { l2_max, k_min, k_max }
    }

    pub fn contains(&self, idx: PWIndex) -> bool {
        idx.is_valid() && idx.l2 <= self.l2_max && (self.k_min..=self.k_max).contains(&idx.k)
    }

    /// Labels whose every one-step image under any generator stays inside.
    pub fn is_interior(&self, idx: PWIndex) -> bool {
        self.contains(idx) && idx.l2 + 1 <= self.l2_max && idx.k > self.k_min && idx.k < self.k_max
    }

    pub fn iter(&self) -> impl Iterator<Item = PWIndex> + '_ {
        (0..=self.l2_max).flat_map(move |l2| {
            let l = l2 as i32;
            (-l..=l).step_by(2).flat_map(move |i2| {
                (-l..=l).step_by(2).flat_map(move |j2| {
                    (self.k_min..=self.k_max).map(move |k| PWIndex::new(l2, i2, j2, k))
                })
            })
        })
    }

    pub fn len(&self) -> usize {
        let labels: usize = (0..=self.l2_max).map(|l2| ((l2 + 1) * (l2 + 1)) as usize).sum();
        labels * (self.k_max - self.k_min + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Sparse column-major operator between window labels.
#[derive(Debug, Clone, Default)]
pub struct SparseOp<I: Ord + Copy> {
    pub cols: BTreeMap<I, Vec<(I, Complex64)>>,
}

impl<I: Ord + Copy> SparseOp<I> {
    pub fn new() -> SparseOp<I> {
        SparseOp { cols: BTreeMap::new() }
    }

    pub fn push(&mut self, src: I, dst: I, c: Complex64) {
        self.cols.entry(src).or_default().push((dst, c));
    }

    pub fn column(&self, src: &I) -> &[(I, Complex64)] {
        self.cols.get(src).map_or(&[], |v| v.as_slice())
    }

    pub fn apply(&self, vec: &BTreeMap<I, Complex64>) -> BTreeMap<I, Complex64> {
        let mut out = BTreeMap::new();
        for (idx, amp) in vec {
            for (dst, c) in self.column(idx) {
                *out.entry(*dst).or_insert(Complex64::new(0.0, 0.0)) += c * amp;
            }
        }
        out
    }

    pub fn apply_basis(&self, src: I) -> BTreeMap<I, Complex64> {
        let mut v = BTreeMap::new();
        v.insert(src, Complex64::new(1.0, 0.0));
        self.apply(&v)
    }

    /// Entrywise conjugate transpose restricted to the stored columns.
    pub fn adjoint(&self) -> SparseOp<I> {
        let mut out = SparseOp::new();
        for (src, col) in &self.cols {
            for (dst, c) in col {
                out.push(*dst, *src, c.conj());
            }
        }
        out
    }
}

/// Coefficients of the one-generator action, in double-double carry.
///
/// Returns the one or two nonzero `(shift, coefficient)` terms. Down-level
/// terms whose target label is invalid are omitted; this is exactly the set
/// of terms containing a vanishing `1 - |q|^{2 * 0}` factor.
pub fn action_coefficients_dd(qp: &QParam, g: Gen, l2: u32, i2: i32, j2: i32) -> Vec<(Shift, Cdd)> {
    let l2i = l2 as i64;
    let lj = (l2i - j2 as i64) / 2;
    let li = (l2i - i2 as i64) / 2;
    let lpj = (l2i + j2 as i64) / 2;
    let lpi = (l2i + i2 as i64) / 2;
    let f = |s: i64| qp.one_minus_q2(s);
    let up_mag = |x: i64, y: i64| f(x).mul(f(y)).div(f(l2i + 1).mul(f(l2i + 2))).sqrt();
    let dn_mag = |x: i64, y: i64| f(x).mul(f(y)).div(f(l2i).mul(f(l2i + 1))).sqrt();
    let ij = (i2 as i64 - j2 as i64) / 2;
    let mut terms = Vec::with_capacity(2);
    match g {
        Gen::D => {
            terms.push((Shift { dl2: 0, di2: 0, dj2: 0, dk: -1 }, qp.half_pow(2 * ij)));
        }
        Gen::DStar => {
            terms.push((Shift { dl2: 0, di2: 0, dj2: 0, dk: 1 }, qp.half_pow(-2 * ij)));
        }
        Gen::B => {
            // beta_+ = q^{l-j} sqrt(f(l+j+1) f(l-i+1) / (f(2l+1) f(2l+2)))
            let c = qp.q_pow(lj).mul_dd(up_mag(lpj + 1, li + 1));
            terms.push((Shift { dl2: 1, di2: -1, dj2: 1, dk: 0 }, c));
            if lj >= 1 && lpi >= 1 {
                // beta_- = -q^{l-j-1} qbar^{j-i+1} sqrt(q/qbar) sqrt(f(l-j) f(l+i) / (f(2l) f(2l+1)))
                let c = qp
                    .q_pow(lj - 1)
                    .mul(qp.qbar_pow(-ij + 1))
                    .mul(qp.half_pow(1))
                    .mul_dd(dn_mag(lj, lpi))
                    .neg();
                terms.push((Shift { dl2: -1, di2: -1, dj2: 1, dk: -1 }, c));
            }
        }
        Gen::BStar => {
            // beta_+^+ = -q^{j-i-1} qbar^{l-j+1} sqrt(q/qbar) sqrt(f(l-j+1) f(l+i+1) / ...)
            let c = qp
                .q_pow(-ij - 1)
                .mul(qp.qbar_pow(lj + 1))
                .mul(qp.half_pow(1))
                .mul_dd(up_mag(lj + 1, lpi + 1))
                .neg();
            terms.push((Shift { dl2: 1, di2: 1, dj2: -1, dk: 1 }, c));
            if lpj >= 1 && li >= 1 {
                // beta_-^+ = qbar^{l-j} sqrt(f(l+j) f(l-i) / ...)
                let c = qp.qbar_pow(lj).mul_dd(dn_mag(lpj, li));
                terms.push((Shift { dl2: -1, di2: 1, dj2: -1, dk: 0 }, c));
            }
        }
        Gen::A => {
            // alpha_+ = sqrt(f(l-j+1) f(l-i+1) / ...)
            let c = Cdd { re: up_mag(lj + 1, li + 1), im: Dd::ZERO };
            terms.push((Shift { dl2: 1, di2: -1, dj2: -1, dk: 0 }, c));
            if lpj >= 1 && lpi >= 1 {
                // alpha_- = q^{l-j} qbar^{l-i+1} sqrt(q/qbar) sqrt(f(l+j) f(l+i) / ...)
                let c = qp
                    .q_pow(lj)
                    .mul(qp.qbar_pow(li + 1))
                    .mul(qp.half_pow(1))
                    .mul_dd(dn_mag(lpj, lpi));
                terms.push((Shift { dl2: -1, di2: -1, dj2: -1, dk: -1 }, c));
            }
        }
        Gen::AStar => {
            // alpha_+^+ = q^{l-i} qbar^{l-j+1} sqrt(q/qbar) sqrt(f(l+j+1) f(l+i+1) / ...)
            let c = qp
                .q_pow(li)
                .mul(qp.qbar_pow(lj + 1))
                .mul(qp.half_pow(1))
                .mul_dd(up_mag(lpj + 1, lpi + 1));
            terms.push((Shift { dl2: 1, di2: 1, dj2: 1, dk: 1 }, c));
            if lj >= 1 && li >= 1 {
                // alpha_-^+ = sqrt(f(l-j) f(l-i) / ...)
                let c = Cdd { re: dn_mag(lj, li), im: Dd::ZERO };
                terms.push((Shift { dl2: -1, di2: 1, dj2: 1, dk: 0 }, c));
            }
        }
    }
    terms
}

/// Same table in plain f64 coefficients.
pub fn action_coefficients(
    qp: &QParam,
    g: Gen,
    l2: u32,
    i2: i32,
    j2: i32,
) -> Vec<(Shift, Complex64)> {
    action_coefficients_dd(qp, g, l2, i2, j2)
        .into_iter()
        .map(|(s, c)| (s, c.to_c64()))
        .collect()
}

/// Matrix of the generator action restricted to a window.
pub fn build_operator(qp: &QParam, g: Gen, w: &TruncationWindow) -> SparseOp<PWIndex> {
    let mut op = SparseOp::new();
    for idx in w.iter() {
        let mut col = Vec::new();
        for (shift, c) in action_coefficients(qp, g, idx.l2, idx.i2, idx.j2) {
            if let Some(dst) = shift.apply(idx) {
                if w.contains(dst) {
                    col.push((dst, c));
                }
            }
        }
        op.cols.insert(idx, col);
    }
    op
}

/// Apply a generator to a sparse vector without materializing the matrix.
pub fn apply_generator(
    qp: &QParam,
    g: Gen,
    vec: &BTreeMap<PWIndex, Complex64>,
    l2_cap: u32,
) -> BTreeMap<PWIndex, Complex64> {
    let mut out = BTreeMap::new();
    for (idx, amp) in vec {
        for (shift, c) in action_coefficients(qp, g, idx.l2, idx.i2, idx.j2) {
            if let Some(dst) = shift.apply(*idx) {
                if dst.l2 <= l2_cap {
                    *out.entry(dst).or_insert(Complex64::new(0.0, 0.0)) += c * amp;
                }
            }
        }
    }
    out
}

/// One defining relation, as two generator words and a scalar:
/// `sum_i coeff_i * word_i = rhs_unit * 1`.
pub struct Relation {
    pub name: &'static str,
    pub terms: Vec<(Complex64, Vec<Gen>)>,
    pub rhs_unit: Complex64,
}

/// The eight defining relations (`DD* = D*D = 1` counted once each way).
pub fn defining_relations(qp: &QParam) -> Vec<Relation> {
    let one = Complex64::new(1.0, 0.0);
    vec![
        Relation {
            name: "ba = q ab",
            terms: vec![(one, vec![Gen::B, Gen::A]), (-qp.q, vec![Gen::A, Gen::B])],
            rhs_unit: 0.0.into(),
        },
        Relation {
            name: "a*b = q b a*",
            terms: vec![(one, vec![Gen::AStar, Gen::B]), (-qp.q, vec![Gen::B, Gen::AStar])],
            rhs_unit: 0.0.into(),
        },
        Relation {
            name: "bb* = b*b",
            terms: vec![(one, vec![Gen::B, Gen::BStar]), (-one, vec![Gen::BStar, Gen::B])],
            rhs_unit: 0.0.into(),
        },
        Relation {
            name: "aa* + bb* = 1",
            terms: vec![(one, vec![Gen::A, Gen::AStar]), (one, vec![Gen::B, Gen::BStar])],
            rhs_unit: one,
        },
        Relation {
            name: "a*a + |q|^2 b*b = 1",
            terms: vec![
                (one, vec![Gen::AStar, Gen::A]),
                ((qp.abs_q * qp.abs_q).into(), vec![Gen::BStar, Gen::B]),
            ],
            rhs_unit: one,
        },
        Relation {
            name: "aD = Da",
            terms: vec![(one, vec![Gen::A, Gen::D]), (-one, vec![Gen::D, Gen::A])],
            rhs_unit: 0.0.into(),
        },
        Relation {
            name: "bD = q^2|q|^-2 Db",
            terms: vec![(one, vec![Gen::B, Gen::D]), (-qp.phi(), vec![Gen::D, Gen::B])],
            rhs_unit: 0.0.into(),
        },
        Relation {
            name: "DD* = D*D = 1",
            terms: vec![
                (0.5.into(), vec![Gen::D, Gen::DStar]),
                (0.5.into(), vec![Gen::DStar, Gen::D]),
            ],
            rhs_unit: one,
        },
    ]
}

/// Per-relation worst residual over the interior labels of a window.
#[derive(Debug, Clone)]
pub struct RelationReport {
    pub residuals: Vec<(&'static str, f64)>,
}

impl RelationReport {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().map(|(_, r)| *r).fold(0.0, f64::max)
    }
}

/// Evaluate all defining relations as operator identities on every interior
/// basis vector. (Truncation cannot corrupt interior residuals: out-of-window
/// targets are dropped coherently from every term of a relation.)
pub fn verify_relations_pw(qp: &QParam, w: &TruncationWindow) -> RelationReport {
    // apply generator words; word rightmost acts first
    let apply_word = |word: &[Gen], src: PWIndex| {
        let mut v = BTreeMap::new();
        v.insert(src, Complex64::new(1.0, 0.0));
        for g in word.iter().rev() {
            v = apply_generator(qp, *g, &v, u32::MAX);
        }
        v
    };
    let relations = defining_relations(qp);
    let mut residuals = Vec::with_capacity(relations.len());
    for rel in &relations {
        let mut worst = 0.0f64;
        for idx in w.iter().filter(|i| w.is_interior(*i)) {
            let mut acc: BTreeMap<PWIndex, Complex64> = BTreeMap::new();
            for (coeff, word) in &rel.terms {
                for (dst, amp) in apply_word(word, idx) {
                    if w.contains(dst) {
                        *acc.entry(dst).or_insert(Complex64::new(0.0, 0.0)) += coeff * amp;
                    }
                }
            }
            *acc.entry(idx).or_insert(Complex64::new(0.0, 0.0)) -= rel.rhs_unit;
            let norm_sq: f64 = acc.values().map(|c| c.norm_sqr()).sum();
            worst = worst.max(norm_sq.sqrt());
        }
        residuals.push((rel.name, worst));
    }
    RelationReport { residuals }
}

/// Jacobi-matrix data of bb* on the invariant block A(i,j,k).
///
/// `sub[m]` couples level m up to m+1 (`gamma_+(w+m)`), `sup[m]` couples
/// m+1 down to m (`gamma_-(w+m+1)`), `diag[m] = gamma(w+m)`. The level-0
/// down-coefficient `gamma_-` at l = w is structurally zero and not stored.
#[derive(Debug, Clone)]
pub struct TridiagonalData {
    pub diag: Vec<f64>,
    pub sub: Vec<Complex64>,
    pub sup: Vec<Complex64>,
}

/// `gamma_+(l, i, j)`: coefficient of `e^{l+1}_{i,j,k+1}` in `bb* e^l_{ijk}`.
pub fn gamma_plus(qp: &QParam, l2: u32, i2: i32, j2: i32) -> Complex64 {
    let l2i = l2 as i64;
    let (li, lj) = ((l2i - i2 as i64) / 2, (l2i - j2 as i64) / 2);
    let f = |s: i64| qp.one_minus_q2(s);
    let mag = f((l2i + 2 + j2 as i64) / 2)
        .mul(f((l2i + 2 - j2 as i64) / 2))
        .mul(f((l2i + 2 + i2 as i64) / 2))
        .mul(f((l2i + 2 - i2 as i64) / 2))
        .div(f(l2i + 1).mul(f(l2i + 3)))
        .sqrt()
        .div(f(l2i + 2));
    qp.q_pow(li).mul(qp.qbar_pow(lj + 1)).mul(qp.half_pow(1)).mul_dd(mag).neg().to_c64()
}

/// `gamma(l, i, j)`: the diagonal coefficient; the down-route summand is
/// dropped when the down-level target is invalid (its factors vanish).
pub fn gamma_diag(qp: &QParam, l2: u32, i2: i32, j2: i32) -> f64 {
    let l2i = l2 as i64;
    let (li, lj) = ((l2i - i2 as i64) / 2, (l2i - j2 as i64) / 2);
    let (lpi, lpj) = ((l2i + i2 as i64) / 2, (l2i + j2 as i64) / 2);
    let f = |s: i64| qp.one_minus_q2(s);
    let s1 = qp
        .abs_pow(2 * li)
        .mul(f(lj + 1))
        .mul(f(lpi + 1))
        .div(f(l2i + 1).mul(f(l2i + 2)));
    let s2 = if lpj >= 1 && li >= 1 {
        qp.abs_pow(2 * lj).mul(f(lpj)).mul(f(li)).div(f(l2i).mul(f(l2i + 1)))
    } else {
        Dd::ZERO
    };
    s1.add(s2).to_f64()
}

/// `gamma_-(l, i, j)`: structurally zero at `l = w_ij`.
pub fn gamma_minus(qp: &QParam, l2: u32, i2: i32, j2: i32) -> Complex64 {
    let w2 = i2.abs().max(j2.abs());
    if (l2 as i32) <= w2 {
        return Complex64::new(0.0, 0.0);
    }
    let l2i = l2 as i64;
    let (li, lj) = ((l2i - i2 as i64) / 2, (l2i - j2 as i64) / 2);
    let f = |s: i64| qp.one_minus_q2(s);
    let mag = f((l2i + j2 as i64) / 2)
        .mul(f((l2i - j2 as i64) / 2))
        .mul(f((l2i + i2 as i64) / 2))
        .mul(f((l2i - i2 as i64) / 2))
        .div(f(l2i - 1).mul(f(l2i + 1)))
        .sqrt()
        .div(f(l2i));
    qp.q_pow(lj - 1).mul(qp.qbar_pow(li)).mul(qp.half_pow(1)).mul_dd(mag).neg().to_c64()
}

/// Tridiagonal data of bb* on A(i,j,k), levels m = 0..m_max.
pub fn bbstar_tridiagonal(qp: &QParam, i2: i32, j2: i32, m_max: usize) -> TridiagonalData {
    let w2 = i2.abs().max(j2.abs()) as u32;
    let mut diag = Vec::with_capacity(m_max + 1);
    let mut sub = Vec::with_capacity(m_max);
    let mut sup = Vec::with_capacity(m_max);
    for m in 0..=m_max {
        let l2 = w2 + 2 * m as u32;
        diag.push(gamma_diag(qp, l2, i2, j2));
        if m < m_max {
            sub.push(gamma_plus(qp, l2, i2, j2));
            sup.push(gamma_minus(qp, l2 + 2, i2, j2));
        }
    }
    TridiagonalData { diag, sub, sup }
}
