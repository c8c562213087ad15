//! Self-contained dense-free numerical kernels: Sturm-bisection eigenvalues
//! and inverse-iteration eigenvectors for real symmetric tridiagonal
//! matrices, and a Hermitian Lanczos process with full reorthogonalization.
//!
//! These are deliberately small: the tridiagonal blocks come from Jacobi
//! matrices of bb* (dimension < 100) and Lanczos only needs the bottom edge
//! of well-separated spectra.

use num_complex::Complex64;

/// Number of eigenvalues of the symmetric tridiagonal (diag, off) strictly
/// below `lambda`, via the LDL^T pivot signs (Sturm count).
pub fn sturm_count(diag: &[f64], off: &[f64], lambda: f64) -> usize {
    let n = diag.len();
    if n == 0 {
        return 0;
    }
    let tiny = f64::MIN_POSITIVE;
    let mut count = 0usize;
    let mut d = diag[0] - lambda;
    if d < 0.0 {
        count += 1;
    }
    for i in 1..n {
        if d == 0.0 {
            d = tiny;
        }
        d = diag[i] - lambda - off[i - 1] * off[i - 1] / d;
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// All eigenvalues of the symmetric tridiagonal matrix, ascending, by
/// bisection on the Sturm count.
pub fn tridiag_eigenvalues(diag: &[f64], off: &[f64]) -> Vec<f64> {
    let n = diag.len();
    if n == 0 {
        return Vec::new();
    }
    // Gershgorin bounds
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { off[i - 1].abs() } else { 0.0 } + if i < n - 1 { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    let width = (hi - lo).max(1e-300);
    let (lo, hi) = (lo - 1e-12 * width - 1e-300, hi + 1e-12 * width + 1e-300);
    let mut out = Vec::with_capacity(n);
    for idx in 0..n {
        // bisect for the (idx+1)-th smallest
        let (mut a, mut b) = (lo, hi);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if sturm_count(diag, off, mid) <= idx {
                a = mid;
            } else {
                b = mid;
            }
            if b - a <= f64::EPSILON * (a.abs().max(b.abs())) + 1e-300 {
                break;
            }
        }
        out.push(0.5 * (a + b));
    }
    out
}

/// Eigenvector for an isolated eigenvalue of the symmetric tridiagonal, by
/// inverse iteration with a partially pivoted tridiagonal solve.
pub fn tridiag_eigenvector(diag: &[f64], off: &[f64], lambda: f64) -> Vec<f64> {
    let n = diag.len();
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![1.0];
    }
    // deterministic start with all modes excited
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 / (1.0 + i as f64)).collect();
    normalize(&mut v);
    let shift = lambda + 1e-14 * (1.0 + lambda.abs());
    for _ in 0..4 {
        let mut w = solve_shifted(diag, off, shift, &v);
        normalize(&mut w);
        // fix sign for determinism
        if let Some(m) = w.iter().cloned().reduce(|a, b| if a.abs() >= b.abs() { a } else { b }) {
            if m < 0.0 {
                w.iter_mut().for_each(|x| *x = -*x);
            }
        }
        v = w;
    }
    v
}

fn normalize(v: &mut [f64]) {
    let n: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
}

/// Solve (T - shift) x = b with partial pivoting (LU on the tridiagonal band).
fn solve_shifted(diag: &[f64], off: &[f64], shift: f64, rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    // band storage: d (main), e (super), f (super-super fill-in from pivoting)
    let mut d: Vec<f64> = diag.iter().map(|x| x - shift).collect();
    let mut e: Vec<f64> = off.to_vec();
    let mut f = vec![0.0f64; n.saturating_sub(2)];
    let mut x = rhs.to_vec();
    let mut sub: Vec<f64> = off.to_vec(); // subdiagonal being eliminated
    for i in 0..n - 1 {
        if sub[i].abs() > d[i].abs() {
            // full swap of rows i and i+1 over columns i, i+1, i+2
            let row_i = (d[i], e[i], 0.0);
            let row_j = (sub[i], d[i + 1], if i + 1 < n - 1 { e[i + 1] } else { 0.0 });
            d[i] = row_j.0;
            e[i] = row_j.1;
            if i < n - 2 {
                f[i] = row_j.2;
            }
            sub[i] = row_i.0;
            d[i + 1] = row_i.1;
            if i + 1 < n - 1 {
                e[i + 1] = row_i.2;
            }
            x.swap(i, i + 1);
        }
        if d[i] == 0.0 {
            d[i] = f64::MIN_POSITIVE;
        }
        let m = sub[i] / d[i];
        d[i + 1] -= m * e[i];
        if i < n - 2 {
            e[i + 1] -= m * f[i];
        }
        x[i + 1] -= m * x[i];
    }
    // back substitution
    if d[n - 1] == 0.0 {
        d[n - 1] = f64::MIN_POSITIVE;
    }
    x[n - 1] /= d[n - 1];
    if n >= 2 {
        let i = n - 2;
        x[i] = (x[i] - e[i] * x[i + 1]) / if d[i] == 0.0 { f64::MIN_POSITIVE } else { d[i] };
    }
    for i in (0..n.saturating_sub(2)).rev() {
        let num = x[i] - e[i] * x[i + 1] - f[i] * x[i + 2];
        x[i] = num / if d[i] == 0.0 { f64::MIN_POSITIVE } else { d[i] };
    }
    x
}

/// Result of a Lanczos run: converged bottom Ritz values and vectors.
pub struct LanczosBottom {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<Complex64>>,
}

/// Bottom Ritz pairs of a Hermitian PSD operator given by `apply`, computed
/// with full reorthogonalization from a deterministic seed.
pub fn lanczos_bottom(
    apply: &dyn Fn(&[Complex64]) -> Vec<Complex64>,
    dim: usize,
    iters: usize,
    want: usize,
    seed: u64,
) -> LanczosBottom {
    let iters = iters.min(dim);
    let mut rng = crate::SplitMix64::new(seed);
    let mut v0: Vec<Complex64> = (0..dim).map(|_| rng.next_complex()).collect();
    let n0 = vnorm(&v0);
    v0.iter_mut().for_each(|x| *x /= n0);

    let mut basis: Vec<Vec<Complex64>> = vec![v0];
    let mut alpha = Vec::<f64>::new();
    let mut beta = Vec::<f64>::new();
    let mut prev_bottom: Option<Vec<f64>> = None;
    for j in 0..iters {
        let vj = basis[j].clone();
        let mut w = apply(&vj);
        let a = dot(&vj, &w).re;
        alpha.push(a);
        // full reorthogonalization (two passes)
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &w);
                for (wi, bi) in w.iter_mut().zip(b.iter()) {
                    *wi -= c * bi;
                }
            }
        }
        let nb = vnorm(&w);
        if nb < 1e-13 || j + 1 == iters {
            break;
        }
        // stop once the bottom Ritz values have settled
        if j >= 31 && j % 16 == 15 {
            let evals = tridiag_eigenvalues(&alpha, &beta);
            let bottom: Vec<f64> = evals.iter().take(want).copied().collect();
            if let Some(prev) = &prev_bottom {
                // the bottom value drives the counting threshold and needs
                // more digits than the rest of the tail cluster
                let settled = prev.len() == bottom.len()
                    && prev.iter().zip(bottom.iter()).enumerate().all(|(i, (p, b))| {
                        let tol = if i == 0 { 1e-8 } else { 1e-3 };
                        (p - b).abs() < tol * (1.0 + b.abs())
                    });
                if settled {
                    break;
                }
            }
            prev_bottom = Some(bottom);
        }
        beta.push(nb);
        w.iter_mut().for_each(|x| *x /= nb);
        basis.push(w);
    }
    let m = alpha.len();
    let evals = tridiag_eigenvalues(&alpha, &beta[..m.saturating_sub(1)]);
    let take = want.min(m);
    let mut values = Vec::with_capacity(take);
    let mut vectors = Vec::with_capacity(take);
    for i in 0..take {
        let lam = evals[i];
        let y = tridiag_eigenvector(&alpha, &beta[..m - 1], lam);
        let mut v = vec![Complex64::new(0.0, 0.0); dim];
        for (yj, bj) in y.iter().zip(basis.iter()) {
            for (vi, bi) in v.iter_mut().zip(bj.iter()) {
                *vi += yj * bi;
            }
        }
        let n = vnorm(&v);
        if n > 0.0 {
            v.iter_mut().for_each(|x| *x /= n);
        }
        values.push(lam);
        vectors.push(v);
    }
    LanczosBottom { values, vectors }
}

pub fn vnorm(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub fn dot(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y.iter()).map(|(a, b)| a.conj() * b).sum()
}
