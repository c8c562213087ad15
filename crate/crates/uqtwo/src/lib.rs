//! Numerical laboratory for the compact quantum group U_q(2) at complex
//! deformation parameter q = |q| e^{i pi theta}, 0 < |q| < 1.
//!
//! The crate certifies, at finite truncation, the identities behind the
//! representation theory and noncommutative geometry of U_q(2):
//!
//! - [`qnum`]: q-integers, Gaussian binomials, little q-Jacobi polynomials.
//! - [`algebra`]: normal-ordering rewrite engine for O(U_q(2)), matrix
//!   coefficients, the generator-action cross-check, and the Hopf axioms.
//! - [`pw`]: the Peter-Weyl basis actions as sparse truncated operators.
//! - [`heis`]: the Heisenberg-type faithful representation on
//!   l2(N) (x) l2(Z) (x) l2(Z).
//! - [`dirac`]: the equivariant Dirac eigenvalue data, commutator bounds,
//!   growth counting and non-degeneracy witnesses.
//! - [`fixedpt`]: the fixed-point analysis of bb* and the E_1 basis.
//! - [`nctorus`]: the noncommutative torus, Powers-Rieffel projection,
//!   Chern number and truncated Fredholm indices.
//! - [`growth`]: highest-weight growth graph and the spectral dimension.

pub mod algebra;
pub mod dd;
pub mod dirac;
pub mod fixedpt;
pub mod growth;
pub mod heis;
pub mod nctorus;
pub mod numeric;
pub mod pw;
pub mod qnum;
pub mod report;

pub use qnum::QParam;

/// Golden-ratio default for theta: a badly approximable irrational.
pub const THETA_DEFAULT: f64 = 0.618_033_988_749_894_9;

/// Deterministic splittable RNG for sampled checks (SplitMix64).
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> SplitMix64 {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform in [-1, 1).
    pub fn next_sym(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 52) as f64 - 1.0
    }

    pub fn next_complex(&mut self) -> num_complex::Complex64 {
        num_complex::Complex64::new(self.next_sym(), self.next_sym())
    }
}
