//! Complex Gamma, reciprocal Gamma, Pochhammer symbols and sine products.
//!
//! Gamma uses the Lanczos approximation with `g = 7` and nine coefficients
//! (the widely published set), combined with reflection for `Re z < 1/2`.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::f64::consts::PI;
use thiserror::Error;

pub type ComplexValue = Complex64;

/// Distance from a nonpositive integer below which a point counts as a pole.
pub const POLE_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecfunError {
    #[error("Gamma has a pole at {0}")]
    PoleAtNonpositiveInteger(Complex64),
    #[error("Pochhammer ratio Γ({0}+{1})/Γ({0}) is undefined")]
    UndefinedRatio(Complex64, Complex64),
    #[error("sine factor vanishes: sin(π·{0}) = 0")]
    SineZero(Complex64),
    #[error("non-finite value produced")]
    NonFinite,
    #[error("Pochhammer symbol degenerates at {0}")]
    DegenerateRational(BigRational),
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Nearest integer to `z` if `z` is within `tol` of it.
fn near_integer(z: Complex64, tol: f64) -> Option<i64> {
    let r = z.re.round();
    if (z.re - r).abs() <= tol && z.im.abs() <= tol && r.abs() < 9.0e15 {
        Some(r as i64)
    } else {
        None
    }
}

pub fn is_nonpositive_integer(z: Complex64) -> bool {
    near_integer(z, POLE_TOL).is_some_and(|n| n <= 0)
}

/// `sin(πx)` for real `x`, reduced so that zeros at integers are exact.
pub fn sin_pi_real(x: f64) -> f64 {
    let mut r = x - 2.0 * (x / 2.0).round(); // r in [-1, 1]
    if r > 0.5 {
        r = 1.0 - r;
    } else if r < -0.5 {
        r = -1.0 - r;
    }
    (PI * r).sin()
}

pub fn cos_pi_real(x: f64) -> f64 {
    let r = x - 2.0 * (x / 2.0).round();
    sin_pi_real(0.5 - r.abs())
}

/// `sin(πz)` for complex `z`.
pub fn sin_pi(z: Complex64) -> Complex64 {
    let (y, x) = (PI * z.im, z.re);
    Complex64::new(sin_pi_real(x) * y.cosh(), cos_pi_real(x) * y.sinh())
}

/// `exp(πi·x)` with reduced argument.
pub fn exp_pi_i(x: Complex64) -> Complex64 {
    let m = (-PI * x.im).exp();
    Complex64::new(m * cos_pi_real(x.re), m * sin_pi_real(x.re))
}

/// `exp(2πi·x)`.
pub fn exp_2pi_i(x: Complex64) -> Complex64 {
    exp_pi_i(2.0 * x)
}

/// `1 − e^{−2πiα}`.
pub fn one_minus_exp_m2pii(alpha: Complex64) -> Complex64 {
    // 1 − e^{−2πiα} = 2i e^{−πiα} sin(πα), which keeps precision near integers
    Complex64::new(0.0, 2.0) * exp_pi_i(-alpha) * sin_pi(alpha)
}

/// `1 − e^{+2πiα}`.
pub fn one_minus_exp_2pii(alpha: Complex64) -> Complex64 {
    one_minus_exp_m2pii(-alpha)
}

fn lanczos_ln_gamma(z: Complex64) -> Complex64 {
    // valid for Re z >= 1/2
    let z = z - 1.0;
    let mut x = Complex64::new(LANCZOS[0], 0.0);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        x += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    LN_SQRT_2PI + (z + 0.5) * t.ln() - t + x.ln()
}

/// Principal-ish `ln Γ(z)`; only `exp` of the result is meaningful (the
/// imaginary part is not normalised to the principal branch).
pub fn ln_gamma(z: Complex64) -> Result<Complex64, SpecfunError> {
    if is_nonpositive_integer(z) {
        return Err(SpecfunError::PoleAtNonpositiveInteger(z));
    }
    if z.re < 0.5 {
        // Γ(z) = π / (sin(πz) Γ(1−z))
        let s = sin_pi(z);
        Ok(Complex64::new(PI.ln(), 0.0) - s.ln() - lanczos_ln_gamma(1.0 - z))
    } else {
        Ok(lanczos_ln_gamma(z))
    }
}

pub fn gamma(z: Complex64) -> Result<Complex64, SpecfunError> {
    if is_nonpositive_integer(z) {
        return Err(SpecfunError::PoleAtNonpositiveInteger(z));
    }
    // small positive integers exactly
    if let Some(n) = near_integer(z, 0.0) {
        if (1..=20).contains(&n) {
            return Ok(Complex64::new((1..n).map(|k| k as f64).product(), 0.0));
        }
    }
    let v = ln_gamma(z)?.exp();
    if v.is_finite() {
        Ok(v)
    } else {
        Err(SpecfunError::NonFinite)
    }
}

/// `ln(1/Γ(z))`, or `None` when `1/Γ(z) = 0`.
pub fn ln_rgamma(z: Complex64) -> Option<Complex64> {
    if is_nonpositive_integer(z) {
        None
    } else {
        ln_gamma(z).ok().map(|l| -l)
    }
}

/// Reciprocal Gamma, entire; exactly zero at nonpositive integers.
pub fn rgamma(z: Complex64) -> Complex64 {
    if is_nonpositive_integer(z) {
        return Complex64::zero();
    }
    if z.re < 0.5 {
        // 1/Γ(z) = sin(πz) Γ(1−z) / π
        return sin_pi(z) * lanczos_ln_gamma(1.0 - z).exp() / PI;
    }
    (-lanczos_ln_gamma(z)).exp()
}

/// Rising or falling integer product: `(α)_n` for `n ∈ Z`.
fn pochhammer_int(alpha: Complex64, n: i64) -> Result<Complex64, SpecfunError> {
    let mut p = Complex64::one();
    if n >= 0 {
        for i in 0..n {
            p *= alpha + i as f64;
        }
        Ok(p)
    } else {
        // (α)_{−m} = 1 / ((α−1)(α−2)…(α−m))
        for i in 1..=(-n) {
            let f = alpha - i as f64;
            if f.norm() <= POLE_TOL {
                return Err(SpecfunError::UndefinedRatio(alpha, Complex64::new(n as f64, 0.0)));
            }
            p *= f;
        }
        Ok(p.inv())
    }
}

/// `(α)_β = Γ(α+β)/Γ(α)`.
///
/// Integer `β` takes the exact product path, so `α` may sit at a pole of Γ.
pub fn pochhammer(alpha: Complex64, beta: Complex64) -> Result<Complex64, SpecfunError> {
    if let Some(n) = near_integer(beta, POLE_TOL) {
        if n.abs() <= 100_000 {
            return pochhammer_int(alpha, n);
        }
    }
    if is_nonpositive_integer(alpha + beta) {
        return Err(SpecfunError::UndefinedRatio(alpha, beta));
    }
    match ln_rgamma(alpha) {
        None => Ok(Complex64::zero()),
        Some(lr) => {
            let v = (ln_gamma(alpha + beta)? + lr).exp();
            if v.is_finite() {
                Ok(v)
            } else {
                Err(SpecfunError::NonFinite)
            }
        }
    }
}

/// Exact rational `(α)_n` for integer `n` (negative `n` gives the falling inverse).
pub fn pochhammer_rational(alpha: &BigRational, n: i64) -> Result<BigRational, SpecfunError> {
    let mut p = BigRational::one();
    if n >= 0 {
        for i in 0..n {
            p *= alpha + BigRational::from_integer(BigInt::from(i));
        }
        Ok(p)
    } else {
        for i in 1..=(-n) {
            let f = alpha - BigRational::from_integer(BigInt::from(i));
            if f.is_zero() {
                return Err(SpecfunError::DegenerateRational(alpha.clone()));
            }
            p *= f;
        }
        Ok(p.recip())
    }
}

/// `∏ sin(π v_i)`; fails if any factor vanishes.
pub fn sin_pi_product(v: &[Complex64]) -> Result<Complex64, SpecfunError> {
    let mut p = Complex64::one();
    for &x in v {
        if near_integer(x, POLE_TOL).is_some() {
            return Err(SpecfunError::SineZero(x));
        }
        p *= sin_pi(x);
    }
    Ok(p)
}

/// Residual of the identity
/// `(γ)_m = 2πi e^{−πiγ} (−1)^m / (Γ(γ) Γ(1−γ−m) (1−e^{−2πiγ}))`.
pub fn pochhammer_reflection_check(gamma_: Complex64, m: u32) -> Result<f64, SpecfunError> {
    let lhs = pochhammer_int(gamma_, i64::from(m))?;
    let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
    let num = Complex64::new(0.0, 2.0 * PI) * exp_pi_i(-gamma_) * sign;
    let rhs = num * rgamma(gamma_) * rgamma(1.0 - gamma_ - f64::from(m))
        / one_minus_exp_m2pii(gamma_);
    if !rhs.is_finite() {
        return Err(SpecfunError::NonFinite);
    }
    Ok((lhs - rhs).norm() / lhs.norm().max(1.0))
}

/// `ln(n!)` for small `n`, exact-summed.
pub fn ln_factorial(n: u64) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}
