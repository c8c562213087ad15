//! Fixed-point analysis of bb*: the three-term recurrences on the invariant
//! blocks A(i,j,k), the closed-form eigenvector at eigenvalue 1, detection of
//! the level set Omega, and the E_1 orthonormal family |i,j,k> with its
//! unitary generator actions.
//!
//! Numerical notes.
//!
//! - Eigenpairs of truncated blocks come from Sturm bisection plus inverse
//!   iteration on the phase-gauged real symmetric Jacobi matrix; the gauge
//!   diagonal is recorded so vectors are returned in the ungauged basis.
//! - The spec'd forward recurrence loses the minimal (l^2) solution to
//!   rounding near m ~ 7 at |q| = 0.5: the dominant solution grows like
//!   |q|^{-m^2}. Classification therefore runs the backward (Miller)
//!   recursion, which is stable for the minimal solution, and accepts iff
//!   the seed equation closes and the tail ratios stay below 1. The forward
//!   recursion is kept for the zero-propagation law and for fast rejection
//!   of clearly divergent spectral parameters.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::numeric;
use crate::pw::{self, PWIndex, TridiagonalData};
use crate::qnum::QParam;
use crate::algebra::Gen;

/// Errors from level bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixedPtError {
    /// Requested level n_r was not detected in the truncated block.
    LevelNotDetected { level: u32 },
    /// Label does not satisfy i + j = n_r.
    LabelOffLevel { i2: i32, j2: i32, level: u32 },
}

impl std::fmt::Display for FixedPtError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FixedPtError::LevelNotDetected { level } => {
                write!(f, "eigenvalue level n_r = {level} not detected at this truncation")
            }
            FixedPtError::LabelOffLevel { i2, j2, level } => {
                write!(f, "label (i2={i2}, j2={j2}) does not lie on level {level}")
            }
        }
    }
}

impl std::error::Error for FixedPtError {}

/// Closed form of the eigenvalue-1 coefficients on A(0,0,0):
/// c_m = (-1)^m |q|^{m^2} sqrt((1-|q|^{4m+2})/(1-|q|^2)).
pub fn closed_form_c(qp: &QParam, m: u32) -> f64 {
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    let mag = qp.abs_q.powi((m * m) as i32)
        * ((1.0 - qp.abs_q.powi(4 * m as i32 + 2)) / (1.0 - qp.abs_q * qp.abs_q)).sqrt();
    sign * mag
}

/// The (0,0)-block coefficients Upsilon of bb* e^m_{0,0,m}.
pub fn upsilon0(qp: &QParam, m: u32) -> f64 {
    pw::gamma_diag(qp, 2 * m, 0, 0)
}

pub fn upsilon1(qp: &QParam, m: u32) -> f64 {
    pw::gamma_plus(qp, 2 * m, 0, 0).re
}

pub fn upsilon_m1(qp: &QParam, m: u32) -> f64 {
    pw::gamma_minus(qp, 2 * m, 0, 0).re
}

/// Relative residual of the closed form against the three-term recurrence.
pub fn closed_form_recurrence_residual(qp: &QParam, m_max: u32) -> f64 {
    let mut worst = 0.0f64;
    for m in 0..=m_max {
        let c = closed_form_c(qp, m);
        let mut rhs = upsilon0(qp, m) * c + upsilon1(qp, m) * closed_form_c(qp, m + 1);
        if m >= 1 {
            // Upsilon_1(m-1) = Upsilon_{-1}(m)
            rhs += upsilon1(qp, m - 1) * closed_form_c(qp, m - 1);
        }
        worst = worst.max((c - rhs).abs() / c.abs());
    }
    worst
}

/// Outcome of [`solve_recurrence`].
#[derive(Debug, Clone)]
pub enum RecurrenceSolution {
    /// l^2-summable candidate: normalized block coefficients, seed residual.
    Summable { coeffs: Vec<Complex64>, seed_residual: f64 },
    /// No square-summable solution at this lambda.
    Divergent { seed_residual: f64, max_tail_ratio: f64 },
}

/// Forward recurrence from c_0 (exact-zero propagating). Unstable for the
/// minimal solution; exposed for the leading-coefficient law and rejection
/// of non-spectral lambda.
pub fn forward_recurrence(qp: &QParam, lambda: f64, i2: i32, j2: i32, c0: f64, m_max: usize) -> Vec<Complex64> {
    let w2 = i2.abs().max(j2.abs()) as u32;
    let mut c = Vec::with_capacity(m_max + 1);
    c.push(Complex64::new(c0, 0.0));
    if m_max == 0 {
        return c;
    }
    let gm1 = pw::gamma_minus(qp, w2 + 2, i2, j2);
    c.push((lambda - pw::gamma_diag(qp, w2, i2, j2)) * c[0] / gm1);
    for m in 1..m_max {
        let l2 = w2 + 2 * m as u32;
        let num = (lambda - pw::gamma_diag(qp, l2, i2, j2)) * c[m]
            - pw::gamma_plus(qp, l2 - 2, i2, j2) * c[m - 1];
        c.push(num / pw::gamma_minus(qp, l2 + 2, i2, j2));
    }
    c
}

/// Classify lambda as a square-summable eigenvalue of the A(i,j,k) block.
///
/// Backward (Miller) recursion from the truncation edge produces the minimal
/// solution stably; lambda is accepted iff the seed equation
/// `lambda c_0 = gamma(w) c_0 + gamma_-(w+1) c_1` closes to `seed_tol` after
/// normalizing c_0 = 1, and the last-quartile tail ratios stay below 1.
pub fn solve_recurrence(
    qp: &QParam,
    lambda: f64,
    i2: i32,
    j2: i32,
    m_max: usize,
) -> RecurrenceSolution {
    assert!(m_max >= 8, "recurrence window too small");
    let w2 = i2.abs().max(j2.abs()) as u32;
    let seed_tol = 1e-6;
    // backward pass
    let mut c = vec![Complex64::new(0.0, 0.0); m_max + 1];
    c[m_max] = Complex64::new(1.0, 0.0);
    for m in (1..m_max).rev() {
        let l2 = w2 + 2 * m as u32;
        // lambda c_m = c_{m+1} gamma_-(w+m+1) + c_m gamma(w+m) + c_{m-1} gamma_+(w+m-1)
        let num = (lambda - pw::gamma_diag(qp, l2, i2, j2)) * c[m]
            - pw::gamma_minus(qp, l2 + 2, i2, j2) * c[m + 1];
        c[m - 1] = num / pw::gamma_plus(qp, l2 - 2, i2, j2);
        // rescale to dodge overflow; only ratios matter until normalization
        let scale = c[m - 1].norm();
        if scale > 1e100 {
            for x in c[m - 1..].iter_mut() {
                *x /= scale;
            }
        }
    }
    if c[0].norm() == 0.0 {
        return RecurrenceSolution::Divergent { seed_residual: f64::INFINITY, max_tail_ratio: f64::INFINITY };
    }
    let c0 = c[0];
    for x in c.iter_mut() {
        *x /= c0;
    }
    let seed_residual = ((lambda - pw::gamma_diag(qp, w2, i2, j2)) * c[0]
        - pw::gamma_minus(qp, w2 + 2, i2, j2) * c[1])
        .norm();
    let mut max_ratio = 0.0f64;
    for m in (3 * m_max / 4)..m_max {
        if c[m].norm() > 0.0 {
            max_ratio = max_ratio.max(c[m + 1].norm() / c[m].norm());
        }
    }
    if seed_residual < seed_tol && max_ratio < 1.0 {
        let norm: f64 = c.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        let coeffs = c.into_iter().map(|x| x / norm).collect();
        RecurrenceSolution::Summable { coeffs, seed_residual }
    } else {
        RecurrenceSolution::Divergent { seed_residual, max_tail_ratio: max_ratio }
    }
}

/// Detected eigenvalue levels of the (0,0,0) block.
#[derive(Debug, Clone)]
pub struct OmegaSet {
    /// levels n with eigenvalue |q|^{2n} certified at this truncation
    pub levels: Vec<u32>,
    /// truncated-block eigenvalues that matched no level
    pub unmatched: Vec<f64>,
}

/// Gauge the complex Hermitian Jacobi data to a real symmetric tridiagonal.
///
/// Returns (diag, off, gauge) with gauge[m] unimodular, such that the
/// ungauged eigenvector is gauge[m] * v[m].
fn gauge_real(data: &TridiagonalData) -> (Vec<f64>, Vec<f64>, Vec<Complex64>) {
    let n = data.diag.len();
    let mut gauge = Vec::with_capacity(n);
    gauge.push(Complex64::new(1.0, 0.0));
    let mut off = Vec::with_capacity(n - 1);
    for m in 0..n - 1 {
        let g = data.sub[m];
        let mag = g.norm();
        off.push(mag);
        // phase(sub[m]) carried into the next gauge entry
        let phase = if mag > 0.0 { g / mag } else { Complex64::new(1.0, 0.0) };
        let prev = gauge[m];
        gauge.push(prev * phase);
    }
    (data.diag.clone(), off, gauge)
}

/// Eigenvalues of the truncated bb* block on A(i,j,k).
pub fn block_eigenvalues(qp: &QParam, i2: i32, j2: i32, m_max: usize) -> Vec<f64> {
    let data = pw::bbstar_tridiagonal(qp, i2, j2, m_max);
    let (diag, off, _) = gauge_real(&data);
    numeric::tridiag_eigenvalues(&diag, &off)
}

/// Eigenvector of the truncated (i2, j2) block at an isolated eigenvalue,
/// returned in the ungauged (paper) basis with a deterministic sign.
pub fn block_eigenvector(qp: &QParam, i2: i32, j2: i32, m_max: usize, lambda: f64) -> Vec<Complex64> {
    let data = pw::bbstar_tridiagonal(qp, i2, j2, m_max);
    let (diag, off, gauge) = gauge_real(&data);
    let v = numeric::tridiag_eigenvector(&diag, &off, lambda);
    let mut out: Vec<Complex64> = v.iter().zip(gauge.iter()).map(|(x, g)| g * x).collect();
    // fix global phase: leading coefficient positive real
    if out[0].norm() > 0.0 {
        let ph = out[0] / out[0].norm();
        for x in out.iter_mut() {
            *x /= ph;
        }
    }
    out
}

/// Match truncated (0,0,0)-block eigenvalues against {|q|^{2n}}.
///
/// A level is certified when the relative eigenvalue distance is below `tol`
/// and the Rayleigh residual of its inverse-iteration eigenvector is below
/// 1e-8 (screens truncation-edge eigenvalues).
pub fn omega_detect(qp: &QParam, n_max: u32, m_max: usize, tol: f64) -> OmegaSet {
    let data = pw::bbstar_tridiagonal(qp, 0, 0, m_max);
    let (diag, off, _) = gauge_real(&data);
    let evals = numeric::tridiag_eigenvalues(&diag, &off);
    let mut levels = Vec::new();
    let mut matched = vec![false; evals.len()];
    for n in 0..=n_max {
        let target = qp.abs_q.powi(2 * n as i32);
        let (idx, ev) = evals
            .iter()
            .enumerate()
            .min_by(|a, b| {
                let da = (a.1 - target).abs();
                let db = (b.1 - target).abs();
                da.partial_cmp(&db).unwrap()
            })
            .map(|(i, v)| (i, *v))
            .unwrap();
        if (ev - target).abs() / target > tol {
            continue;
        }
        // Rayleigh residual of the eigenvector
        let v = numeric::tridiag_eigenvector(&diag, &off, ev);
        let mut resid = 0.0f64;
        for i in 0..diag.len() {
            let mut acc = (diag[i] - ev) * v[i];
            if i > 0 {
                acc += off[i - 1] * v[i - 1];
            }
            if i < diag.len() - 1 {
                acc += off[i] * v[i + 1];
            }
            resid += acc * acc;
        }
        if resid.sqrt() < 1e-8 {
            levels.push(n);
            matched[idx] = true;
        }
    }
    let unmatched = evals
        .iter()
        .zip(matched.iter())
        .filter(|(_, m)| !**m)
        .map(|(v, _)| *v)
        .collect();
    OmegaSet { levels, unmatched }
}

/// Sparse vector over Peter-Weyl labels.
pub type PwVec = BTreeMap<PWIndex, Complex64>;

pub fn vec_norm(v: &PwVec) -> f64 {
    v.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

pub fn vec_dot(x: &PwVec, y: &PwVec) -> Complex64 {
    x.iter()
        .filter_map(|(k, c)| y.get(k).map(|d| c.conj() * d))
        .sum()
}

fn vec_scale(v: &mut PwVec, s: Complex64) {
    v.values_mut().for_each(|c| *c *= s);
}

/// E_1 basis vector with its block label and expansion coefficients.
#[derive(Debug, Clone)]
pub struct FixedVector {
    /// block label (i2, j2, k): the vector lives in A(i, j, i+j+k)
    pub i2: i32,
    pub j2: i32,
    pub k: i32,
    /// sparse Peter-Weyl expansion
    pub components: PwVec,
}

impl FixedVector {
    /// Coefficients c_m of the A-block expansion, m = 0..:
    /// component at e^{w+m}_{i,j,i+j+k+m}.
    pub fn block_coefficients(&self, m_max: usize) -> Vec<Complex64> {
        let w2 = self.i2.abs().max(self.j2.abs());
        let base_k = (self.i2 + self.j2) / 2 + self.k;
        (0..=m_max)
            .map(|m| {
                let idx = PWIndex::new((w2 + 2 * m as i32) as u32, self.i2, self.j2, base_k + m as i32);
                self.components.get(&idx).copied().unwrap_or(Complex64::new(0.0, 0.0))
            })
            .collect()
    }

    /// sum_{m >= 1} |c_m|^2, the tail weight of the expansion.
    pub fn tail_weight(&self, m_max: usize) -> f64 {
        self.block_coefficients(m_max)[1..].iter().map(|c| c.norm_sqr()).sum()
    }
}

/// Seed |n_r/2, n_r/2, 0> built by raising the A(0,0,0) eigenvector of
/// eigenvalue |q|^{2 n_r} with (a*)^{n_r}, renormalizing at each step.
pub fn seed_vector(qp: &QParam, level: u32, m_max: usize) -> Result<PwVec, FixedPtError> {
    let target = qp.abs_q.powi(2 * level as i32);
    let evals = block_eigenvalues(qp, 0, 0, m_max);
    let ev = evals
        .iter()
        .copied()
        .min_by(|a, b| (a - target).abs().partial_cmp(&(b - target).abs()).unwrap())
        .unwrap();
    if (ev - target).abs() / target > 1e-6 {
        return Err(FixedPtError::LevelNotDetected { level });
    }
    let coeffs = block_eigenvector(qp, 0, 0, m_max, ev);
    let mut v: PwVec = coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| c.norm() > 1e-300)
        .map(|(m, c)| (PWIndex::new(2 * m as u32, 0, 0, m as i32), *c))
        .collect();
    let l2_cap = 2 * (m_max as u32 + level) + 2;
    for _ in 0..level {
        v = pw::apply_generator(qp, Gen::AStar, &v, l2_cap);
        let n = vec_norm(&v);
        vec_scale(&mut v, Complex64::new(1.0 / n, 0.0));
    }
    Ok(v)
}

/// Build |i,j,k> on a detected level by the generator word
/// `(b*)^{2i-n_r} (D*)^{n_r-2i+k}` (i >= n_r/2) or `b^{n_r-2i} (D*)^k`
/// (i < n_r/2), applied to the seed; rightmost letters act first.
pub fn e1_vector(
    qp: &QParam,
    level: u32,
    seed: &PwVec,
    i2: i32,
    k: i32,
    l2_cap: u32,
) -> Result<FixedVector, FixedPtError> {
    let nr = level as i32;
    let j2 = 2 * nr - i2;
    let mut v = seed.clone();
    let apply_pow = |v: &mut PwVec, g: Gen, count: i32| {
        for _ in 0..count {
            *v = pw::apply_generator(qp, g, v, l2_cap);
        }
    };
    if i2 >= nr {
        let e = nr - i2 + k;
        apply_pow(&mut v, if e >= 0 { Gen::DStar } else { Gen::D }, e.abs());
        apply_pow(&mut v, Gen::BStar, i2 - nr);
    } else {
        apply_pow(&mut v, if k >= 0 { Gen::DStar } else { Gen::D }, k.abs());
        apply_pow(&mut v, Gen::B, nr - i2);
    }
    let n = vec_norm(&v);
    if n == 0.0 {
        return Err(FixedPtError::LevelNotDetected { level });
    }
    vec_scale(&mut v, Complex64::new(1.0 / n, 0.0));
    Ok(FixedVector { i2, j2, k, components: v })
}

/// Residual ||bb* v - v|| of a computed E_1 vector.
pub fn fixed_point_residual(qp: &QParam, v: &PwVec, l2_cap: u32) -> f64 {
    let bs = pw::apply_generator(qp, Gen::BStar, v, l2_cap + 2);
    let bbs = pw::apply_generator(qp, Gen::B, &bs, l2_cap + 2);
    let mut diff = bbs;
    for (idx, c) in v {
        *diff.entry(*idx).or_insert(Complex64::new(0.0, 0.0)) -= c;
    }
    vec_norm(&diff)
}

/// Report of [`verify_e1_actions`].
#[derive(Debug, Clone, Copy, Default)]
pub struct E1ActionReport {
    /// worst |1 - overlap| between generator images and the predicted kets
    pub shift_residual: f64,
    /// worst modulus error of the D-action phase e^{2 pi i (2i - n_r) theta}
    pub phase_residual: f64,
    /// worst | ||g v|| - 1 | (unitarity of b, b*, D on E_1)
    pub unitarity_residual: f64,
    /// worst Gram-matrix deviation from identity over the label range
    pub gram_residual: f64,
}

/// Check the shift-with-phase rules of b, b*, D on computed |i,j,k> kets.
pub fn verify_e1_actions(
    qp: &QParam,
    level: u32,
    seed: &PwVec,
    i2_range: i32,
    k_range: i32,
    l2_cap: u32,
) -> Result<E1ActionReport, FixedPtError> {
    let nr = level as i32;
    let mut rep = E1ActionReport::default();
    let mut kets: BTreeMap<(i32, i32), FixedVector> = BTreeMap::new();
    let get = |i2: i32, k: i32, kets: &mut BTreeMap<(i32, i32), FixedVector>| {
        if !kets.contains_key(&(i2, k)) {
            let v = e1_vector(qp, level, seed, i2, k, l2_cap).unwrap();
            kets.insert((i2, k), v);
        }
        kets[&(i2, k)].clone()
    };
    for i2 in (nr - i2_range)..=(nr + i2_range) {
        for k in -k_range..=k_range {
            let ket = get(i2, k, &mut kets);
            // b: to (i-1/2, j+1/2), k-1 if 2i >= n_r+1 else k
            let bket = pw::apply_generator(qp, Gen::B, &ket.components, l2_cap + 2);
            let tk = if i2 >= nr + 1 { k - 1 } else { k };
            let tgt = get(i2 - 1, tk, &mut kets);
            let ov = vec_dot(&tgt.components, &bket).norm();
            rep.shift_residual = rep.shift_residual.max((1.0 - ov).abs());
            let bn = bket.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            rep.unitarity_residual = rep.unitarity_residual.max((bn - 1.0).abs());
            // b*: to (i+1/2, j-1/2), k+1 if 2i >= n_r else k
            let bsket = pw::apply_generator(qp, Gen::BStar, &ket.components, l2_cap + 2);
            let tk = if i2 >= nr { k + 1 } else { k };
            let tgt = get(i2 + 1, tk, &mut kets);
            let ov = vec_dot(&tgt.components, &bsket).norm();
            rep.shift_residual = rep.shift_residual.max((1.0 - ov).abs());
            // D: phase e^{2 pi i (2i - n_r) theta} to (i, j, k-1)
            let dket = pw::apply_generator(qp, Gen::D, &ket.components, l2_cap + 2);
            let tgt = get(i2, k - 1, &mut kets);
            let amp = vec_dot(&tgt.components, &dket);
            let expect = qp.half_pow(2 * (i2 as i64 - nr as i64)).to_c64();
            rep.phase_residual = rep.phase_residual.max((amp - expect).norm());
            let dn = dket.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            rep.unitarity_residual = rep.unitarity_residual.max((dn - 1.0).abs());
        }
    }
    // Gram matrix of the computed family
    let labels: Vec<(i32, i32)> = kets.keys().copied().collect();
    for (a, la) in labels.iter().enumerate() {
        for lb in labels.iter().skip(a) {
            let g = vec_dot(&kets[la].components, &kets[lb].components);
            let expect = if la == lb { 1.0 } else { 0.0 };
            rep.gram_residual = rep.gram_residual.max((g - expect).norm());
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::THETA_DEFAULT;

    fn qp() -> QParam {
        QParam::new(0.5, THETA_DEFAULT).unwrap()
    }

    #[test]
    fn closed_form_values() {
        let qp = qp();
        assert_eq!(closed_form_c(&qp, 0), 1.0);
        let c1 = -qp.abs_q * ((1.0 - qp.abs_q.powi(6)) / (1.0 - qp.abs_q.powi(2))).sqrt();
        assert!((closed_form_c(&qp, 1) - c1).abs() < 1e-15);
        // c_m = o(|q|^m): at m = 10 the ratio is far below 1e-25
        let r = closed_form_c(&qp, 10).abs() / qp.abs_q.powi(10);
        assert!(r < 1e-25, "{r}");
    }

    #[test]
    fn closed_form_satisfies_recurrence() {
        let qp = qp();
        assert!(closed_form_recurrence_residual(&qp, 30) < 1e-11);
        // seed equation c_0 = c_0 Ups_0(0) + c_1 Ups_{-1}(1)
        let lhs = closed_form_c(&qp, 0);
        let rhs = closed_form_c(&qp, 0) * upsilon0(&qp, 0) + closed_form_c(&qp, 1) * upsilon_m1(&qp, 1);
        assert!((lhs - rhs).abs() < 1e-13);
    }

    #[test]
    fn upsilon_symmetry() {
        let qp = qp();
        assert!((upsilon0(&qp, 0) - 0.8).abs() < 1e-14);
        for m in 1..=30u32 {
            assert!((upsilon1(&qp, m - 1) - upsilon_m1(&qp, m)).abs() < 1e-13, "m={m}");
        }
    }

    #[test]
    fn recurrence_classification() {
        let qp = qp();
        // lambda = 1: summable, matches the closed form
        match solve_recurrence(&qp, 1.0, 0, 0, 40) {
            RecurrenceSolution::Summable { coeffs, seed_residual } => {
                assert!(seed_residual < 1e-10);
                let norm: f64 = (0..=40u32).map(|m| closed_form_c(&qp, m).powi(2)).sum::<f64>().sqrt();
                for m in 0..=10usize {
                    let expect = closed_form_c(&qp, m as u32) / norm;
                    assert!((coeffs[m].re - expect).abs() < 1e-12, "m={m}");
                    assert!(coeffs[m].im.abs() < 1e-12);
                }
            }
            other => panic!("lambda=1 should be summable: {other:?}"),
        }
        // lambda = 1/|q|^2 is not in the spectrum
        assert!(matches!(
            solve_recurrence(&qp, 4.0, 0, 0, 40),
            RecurrenceSolution::Divergent { .. }
        ));
        // generic lambda rejected
        assert!(matches!(
            solve_recurrence(&qp, 0.5 / 1.25, 0, 0, 40),
            RecurrenceSolution::Divergent { .. }
        ));
    }

    #[test]
    fn forward_zero_propagation() {
        let qp = qp();
        for lambda in [1.0, 0.25, 0.0625, 0.015625, 0.00390625] {
            let c = forward_recurrence(&qp, lambda, 0, 0, 0.0, 20);
            assert!(c.iter().all(|x| x.norm() == 0.0), "lambda={lambda}");
        }
    }

    #[test]
    fn omega_detection() {
        let qp = qp();
        let omega = omega_detect(&qp, 12, 40, 1e-6);
        assert!(omega.levels.contains(&0));
        assert!(omega.levels.len() >= 2);
        // strictly increasing by construction
        for w in omega.levels.windows(2) {
            assert!(w[0] < w[1]);
        }
        // grows with m_max
        let omega_small = omega_detect(&qp, 12, 12, 1e-6);
        assert!(omega.levels.len() >= omega_small.levels.len());
        // all detected eigenvalues in (0, 1]
        let evs = block_eigenvalues(&qp, 0, 0, 40);
        for n in &omega.levels {
            let t = qp.abs_q.powi(2 * *n as i32);
            assert!(evs.iter().any(|e| (e - t).abs() / t < 1e-6 && *e > 0.0 && *e <= 1.0 + 1e-12));
        }
    }

    #[test]
    fn truncation_convergence_of_top_eigenvalue() {
        let qp = qp();
        let e30 = *block_eigenvalues(&qp, 0, 0, 30).last().unwrap();
        let e60 = *block_eigenvalues(&qp, 0, 0, 60).last().unwrap();
        assert!((e30 - e60).abs() < 1e-10);
        assert!((e60 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn eigenvector_matches_closed_form() {
        let qp = qp();
        let v = block_eigenvector(&qp, 0, 0, 60, 1.0);
        let mut cf: Vec<f64> = (0..=60u32).map(|m| closed_form_c(&qp, m)).collect();
        let n: f64 = cf.iter().map(|x| x * x).sum::<f64>().sqrt();
        cf.iter_mut().for_each(|x| *x /= n);
        let overlap: f64 = v.iter().zip(cf.iter()).map(|(a, b)| (a.conj() * b).re).sum();
        assert!(overlap.abs() > 1.0 - 1e-9, "overlap {overlap}");
    }

    #[test]
    fn seed_vectors_are_fixed_points() {
        let qp = qp();
        for level in 0..=2u32 {
            let seed = seed_vector(&qp, level, 60).unwrap();
            let r = fixed_point_residual(&qp, &seed, 140);
            assert!(r < 1e-8, "level {level}: {r}");
        }
    }

    #[test]
    fn e1_action_rules_level0() {
        let qp = qp();
        let seed = seed_vector(&qp, 0, 60).unwrap();
        let rep = verify_e1_actions(&qp, 0, &seed, 3, 2, 140).unwrap();
        assert!(rep.shift_residual < 1e-7, "{rep:?}");
        assert!(rep.phase_residual < 1e-8, "{rep:?}");
        assert!(rep.unitarity_residual < 1e-8, "{rep:?}");
        assert!(rep.gram_residual < 1e-7, "{rep:?}");
    }

    #[test]
    fn e1_action_rules_level1() {
        let qp = qp();
        let seed = seed_vector(&qp, 1, 60).unwrap();
        let rep = verify_e1_actions(&qp, 1, &seed, 2, 2, 140).unwrap();
        assert!(rep.shift_residual < 1e-7, "{rep:?}");
        assert!(rep.phase_residual < 1e-8, "{rep:?}");
    }

    #[test]
    fn e1_decay_bound_and_k_independence() {
        let qp = qp();
        let level = 1u32;
        let seed = seed_vector(&qp, level, 60).unwrap();
        // decay: |c_m^{(i,j,0)}| <= |q|^{m(n_r - 2i)} / (1-|q|)^2 for i < n_r/2
        let nr = level as i32;
        for i2 in [-2, -1, 0] {
            let v = e1_vector(&qp, level, &seed, i2, 0, 140).unwrap();
            let cs = v.block_coefficients(20);
            for (m, c) in cs.iter().enumerate() {
                let bound = qp.abs_q.powi(m as i32 * (nr - i2)) / (1.0 - qp.abs_q).powi(2);
                assert!(c.norm() <= bound + 1e-12, "i2={i2} m={m}: {} > {bound}", c.norm());
            }
        }
        // C_{i,j,k} independent of k
        let v1 = e1_vector(&qp, level, &seed, 0, 0, 140).unwrap();
        let v2 = e1_vector(&qp, level, &seed, 0, 2, 140).unwrap();
        assert!((v1.tail_weight(30) - v2.tail_weight(30)).abs() < 1e-10);
    }
}
