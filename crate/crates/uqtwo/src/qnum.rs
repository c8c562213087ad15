//! q-arithmetic primitives: the deformation parameter, symmetric q-integers,
//! Gaussian binomials, and little q-Jacobi polynomials.
//!
//! Conventions (these are load-bearing and cross-checked by the action suite
//! in [`crate::algebra`]):
//!
//! - `|n|_t = (t^-n - t^n) / (t^-1 - t)`, the symmetric q-integer. This is
//!   the convention that reproduces the norm ratios of the highest-weight
//!   line, `|q|^{2g}(1 + |q|^2 + ... + |q|^{4g+2})`.
//! - Gaussian binomial `(n choose k)_t = prod_{s=1..k} (1-t^{n-k+s})/(1-t^s)`.
//! - Little q-Jacobi `P_n^{(a,b)}(x;t) = 2phi1(t^-n, t^{n+a+b+1}; t^{a+1}; t, tx)`
//!   with `P_n(0;t) = 1`.
//! - `sqrt(q/qbar)` is taken to be `e^{i pi theta}` directly from the stored
//!   phase, never via a principal branch of the quotient (which is wrong at
//!   theta = 1).

use num_complex::Complex64;

use crate::dd::{Cdd, Dd};

/// Errors from q-arithmetic and parameter construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QnumError {
    /// The base `t` of a q-series lies outside (0, 1).
    BaseOutOfRange,
    /// |q| outside (0, 1) or theta outside (-1, 1].
    ParamOutOfRange,
}

impl std::fmt::Display for QnumError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            QnumError::BaseOutOfRange => write!(f, "q-series base must lie in (0, 1)"),
            QnumError::ParamOutOfRange => {
                write!(f, "deformation parameter needs |q| in (0,1) and theta in (-1,1]")
            }
        }
    }
}

impl std::error::Error for QnumError {}

/// The deformation parameter `q = |q| e^{i pi theta}` with 0 < |q| < 1.
///
/// All phases used anywhere in the crate derive from the single stored
/// `half_phase = e^{i pi theta}`, so operator identities hold for the stored
/// floating-point constants themselves, not just in exact arithmetic.
#[derive(Debug, Clone, Copy)]
pub struct QParam {
    pub abs_q: f64,
    pub theta: f64,
    pub q: Complex64,
    pub qbar: Complex64,
    /// The chosen value of sqrt(q/qbar): `e^{i pi theta}`.
    pub half_phase: Complex64,
    /// Unit-modulus carry of the phase: |half_dd|^2 = 1 to dd precision, so
    /// conj and recip agree and adjoint identities close below f64 noise.
    half_dd: Cdd,
}

impl QParam {
    pub fn new(abs_q: f64, theta: f64) -> Result<QParam, QnumError> {
        if !(abs_q > 0.0 && abs_q < 1.0) || !(theta > -1.0 && theta <= 1.0) {
            return Err(QnumError::ParamOutOfRange);
        }
        let raw = Cdd::from_c64(Complex64::new(
            (std::f64::consts::PI * theta).cos(),
            (std::f64::consts::PI * theta).sin(),
        ));
        let norm = raw.re.mul(raw.re).add(raw.im.mul(raw.im)).sqrt();
        let half_dd = Cdd { re: raw.re.div(norm), im: raw.im.div(norm) };
        let half_phase = half_dd.to_c64();
        let q = abs_q * half_phase;
        Ok(QParam { abs_q, theta, q, qbar: q.conj(), half_phase, half_dd })
    }

    /// `e^{2 i pi theta} = q^2 |q|^{-2}`, the phase of the b-D swap.
    #[inline]
    pub fn phi(&self) -> Complex64 {
        self.half_phase * self.half_phase
    }

    /// `half_phase^s` in double-double carry.
    pub fn half_pow(&self, s: i64) -> Cdd {
        if s >= 0 {
            self.half_dd.powi(s)
        } else {
            // unit modulus: the inverse is the conjugate
            self.half_dd.conj().powi(-s)
        }
    }

    /// `|q|^s` for integer s (exact binary exponentiation in dd).
    pub fn abs_pow(&self, s: i64) -> Dd {
        let (mut base, mut e) = if s < 0 {
            (Dd::ONE.div(Dd::from_f64(self.abs_q)), (-s) as u64)
        } else {
            (Dd::from_f64(self.abs_q), s as u64)
        };
        let mut acc = Dd::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(base);
            }
            base = base.mul(base);
            e >>= 1;
        }
        acc
    }

    /// `q^s` as |q|^s e^{i pi theta s}, kept in dd.
    pub fn q_pow(&self, s: i64) -> Cdd {
        self.half_pow(s).mul_dd(self.abs_pow(s))
    }

    /// `qbar^s`.
    pub fn qbar_pow(&self, s: i64) -> Cdd {
        self.half_pow(-s).mul_dd(self.abs_pow(s))
    }

    /// `1 - |q|^{2s}` in dd; the ubiquitous deformation factor.
    pub fn one_minus_q2(&self, s: i64) -> Dd {
        Dd::ONE.sub(self.abs_pow(2 * s))
    }
}

/// Symmetric q-integer `|n|_t = (t^-n - t^n)/(t^-1 - t)`; `|0|_t = 0`.
pub fn q_integer(n: u32, t: f64) -> Result<f64, QnumError> {
    if !(t > 0.0 && t < 1.0) {
        return Err(QnumError::BaseOutOfRange);
    }
    if n == 0 {
        return Ok(0.0);
    }
    // sum form t^{-(n-1)} + t^{-(n-3)} + ... + t^{n-1}: positive terms only
    let mut s = 0.0;
    for j in 0..n {
        s += t.powi(2 * j as i32 + 1 - n as i32);
    }
    Ok(s)
}

/// Gaussian binomial `(n choose k)_t`; 0 outside 0 <= k <= n.
pub fn q_binomial(n: i64, k: i64, t: f64) -> Result<f64, QnumError> {
    if !(t > 0.0 && t < 1.0) {
        return Err(QnumError::BaseOutOfRange);
    }
    if k < 0 || k > n {
        return Ok(0.0);
    }
    let mut p = 1.0;
    for s in 1..=k {
        p *= (1.0 - t.powi((n - k + s) as i32)) / (1.0 - t.powi(s as i32));
    }
    Ok(p)
}

/// Same quantity in dd, for the normal-ordering engine.
pub fn q_binomial_dd(n: i64, k: i64, qp: &QParam, doubled_base: bool) -> Dd {
    // base is |q|^2 when doubled_base, else |q|
    let bp = |s: i64| if doubled_base { qp.abs_pow(2 * s) } else { qp.abs_pow(s) };
    if k < 0 || k > n {
        return Dd::ZERO;
    }
    let mut p = Dd::ONE;
    for s in 1..=k {
        p = p.mul(Dd::ONE.sub(bp(n - k + s))).div(Dd::ONE.sub(bp(s)));
    }
    p
}

/// Coefficient list of `P_n^{(alpha,beta)}(x; t)` in powers of x.
///
/// Terminating basic hypergeometric series: the x^s coefficient is
/// `(t^-n;t)_s (t^{n+alpha+beta+1};t)_s / ((t^{alpha+1};t)_s (t;t)_s) * t^s`.
pub fn little_q_jacobi_coeffs(n: u32, alpha: i64, beta: i64, t: f64) -> Result<Vec<f64>, QnumError> {
    if !(t > 0.0 && t < 1.0) {
        return Err(QnumError::BaseOutOfRange);
    }
    let n = n as i64;
    let mut coeffs = Vec::with_capacity(n as usize + 1);
    let mut num = 1.0; // running (t^-n;t)_s (t^{n+a+b+1};t)_s t^s
    let mut den = 1.0; // running (t^{a+1};t)_s (t;t)_s
    coeffs.push(1.0);
    for s in 0..n {
        num *= (1.0 - t.powi((s - n) as i32)) * (1.0 - t.powi((n + alpha + beta + 1 + s) as i32)) * t;
        den *= (1.0 - t.powi((alpha + 1 + s) as i32)) * (1.0 - t.powi((s + 1) as i32));
        coeffs.push(num / den);
    }
    Ok(coeffs)
}

/// Evaluate the little q-Jacobi polynomial at a real point.
pub fn little_q_jacobi(n: u32, alpha: i64, beta: i64, x: f64, t: f64) -> Result<f64, QnumError> {
    let cs = little_q_jacobi_coeffs(n, alpha, beta, t)?;
    // Horner
    let mut acc = 0.0;
    for &c in cs.iter().rev() {
        acc = acc * x + c;
    }
    Ok(acc)
}
