//! Double-double ("two-float") arithmetic for the normal-ordering engine.
//!
//! Normal-form expansions of Peter-Weyl matrix coefficients carry monomial
//! coefficients as large as |q|^{-O(l^2)} (about 1e6 at l = 3), so residual
//! gates of 1e-9..1e-12 in *absolute* terms sit at or below the f64 noise
//! floor. Carrying coefficients as unevaluated f64 pairs (~31 significant
//! digits) removes that floor. Products use FMA, so this stays cheap.

use num_complex::Complex64;

/// Unevaluated sum `hi + lo` with |lo| <= ulp(hi)/2.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, f64::mul_add(a, b, -p))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    #[inline]
    pub fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let e = e + self.lo + o.lo;
        let (hi, lo) = quick_two_sum(s, e);
        Dd { hi, lo }
    }

    #[inline]
    pub fn sub(self, o: Dd) -> Dd {
        self.add(o.neg())
    }

    #[inline]
    pub fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    #[inline]
    pub fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + self.hi * o.lo + self.lo * o.hi;
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }

    #[inline]
    pub fn mul_f64(self, x: f64) -> Dd {
        let (p, e) = two_prod(self.hi, x);
        let e = e + self.lo * x;
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }

    pub fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self.sub(o.mul_f64(q1));
        let q2 = r.hi / o.hi;
        let r2 = r.sub(o.mul_f64(q2));
        let q3 = r2.hi / o.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo }.add(Dd::from_f64(q3))
    }

    pub fn sqrt(self) -> Dd {
        if self.hi == 0.0 {
            return Dd::ZERO;
        }
        let x = self.hi.sqrt();
        let xd = Dd::from_f64(x);
        // one Newton step in dd: x + (a - x^2)/(2x)
        let e = self.sub(xd.mul(xd)).hi / (2.0 * x);
        let (hi, lo) = quick_two_sum(x, e);
        Dd { hi, lo }
    }

    #[inline]
    pub fn abs(self) -> f64 {
        self.to_f64().abs()
    }
}

/// Complex number with double-double real and imaginary parts.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Cdd {
    pub re: Dd,
    pub im: Dd,
}

impl Cdd {
    pub const ZERO: Cdd = Cdd { re: Dd::ZERO, im: Dd::ZERO };
    pub const ONE: Cdd = Cdd { re: Dd::ONE, im: Dd::ZERO };

    #[inline]
    pub fn from_c64(z: Complex64) -> Cdd {
        Cdd { re: Dd::from_f64(z.re), im: Dd::from_f64(z.im) }
    }

    #[inline]
    pub fn from_f64(x: f64) -> Cdd {
        Cdd { re: Dd::from_f64(x), im: Dd::ZERO }
    }

    #[inline]
    pub fn to_c64(self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    #[inline]
    pub fn add(self, o: Cdd) -> Cdd {
        Cdd { re: self.re.add(o.re), im: self.im.add(o.im) }
    }

    #[inline]
    pub fn sub(self, o: Cdd) -> Cdd {
        Cdd { re: self.re.sub(o.re), im: self.im.sub(o.im) }
    }

    #[inline]
    pub fn neg(self) -> Cdd {
        Cdd { re: self.re.neg(), im: self.im.neg() }
    }

    #[inline]
    pub fn mul(self, o: Cdd) -> Cdd {
        Cdd {
            re: self.re.mul(o.re).sub(self.im.mul(o.im)),
            im: self.re.mul(o.im).add(self.im.mul(o.re)),
        }
    }

    #[inline]
    pub fn mul_dd(self, x: Dd) -> Cdd {
        Cdd { re: self.re.mul(x), im: self.im.mul(x) }
    }

    #[inline]
    pub fn conj(self) -> Cdd {
        Cdd { re: self.re, im: self.im.neg() }
    }

    /// |z| evaluated in f64; used for pruning and residual reports.
    #[inline]
    pub fn abs(self) -> f64 {
        self.to_c64().norm()
    }

    pub fn powi(self, n: i64) -> Cdd {
        if n == 0 {
            return Cdd::ONE;
        }
        let (mut base, mut e) = if n < 0 { (self.recip(), (-n) as u64) } else { (self, n as u64) };
        let mut acc = Cdd::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(base);
            }
            base = base.mul(base);
            e >>= 1;
        }
        acc
    }

    pub fn recip(self) -> Cdd {
        let den = self.re.mul(self.re).add(self.im.mul(self.im));
        Cdd { re: self.re.div(den), im: self.im.neg().div(den) }
    }
}
