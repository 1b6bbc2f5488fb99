//! Truncated Γ-series `φ_{σ,k}` and their duals, sample points in the common
//! convergence domain `U_T`, and the matrices `T_σ`, `T_σ^∨` expressing
//! integrals over the cycles `Γ_{σ,k̃}` in terms of Γ-series.
//!
//! Terms are computed in log space; each graded shell `|n| = s` is summed
//! with compensated addition and shells are combined in increasing degree, so
//! the result does not depend on how many threads summed the shells.

use crate::config::{is_very_generic, ConfigMatrix, ParameterVector, INTEGRALITY_TOL};
use crate::intlinalg::{self, LinalgError};
use crate::jsonfmt;
use crate::specfun::{self, exp_2pi_i, exp_pi_i, ln_factorial, ln_rgamma, one_minus_exp_2pii, one_minus_exp_m2pii};
use crate::triangulation::{sample_interior_lifting, Simplex, Triangulation, TriangulationError};
use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

/// A tail is trusted when the last nonzero shell is below this fraction of the sum.
pub const TAIL_RATIO: f64 = 1e-3;
/// Number of trailing nonzero shells that must be non-increasing.
pub const TAIL_WINDOW: usize = 3;
/// Bound on `|z_σ^{−A_σ^{-1}a(j)} z_j|` required of sampled points.
pub const DOMAIN_RATIO_BOUND: f64 = 0.1;

#[derive(Debug, Error)]
pub enum SeriesError {
    #[error("parameter is not very generic for simplex {sigma:?} (scan to degree {bound})")]
    NonGenericParameter { sigma: Vec<usize>, bound: usize },
    #[error("γ_{l} = {value} is an integer")]
    IntegralGamma { l: usize, value: Complex64 },
    #[error("series tail does not decay: last shell max {last:e} against |sum| {sum:e}")]
    DivergentTail { last: f64, sum: f64 },
    #[error("coordinate z_{0} vanishes")]
    ZeroCoordinate(usize),
    #[error("{what}: expected length {want}, got {got}")]
    Length { what: &'static str, got: usize, want: usize },
    #[error("scale t = {t} too small: domain ratio {ratio:.3e} ≥ {DOMAIN_RATIO_BOUND}")]
    ScaleTooSmall { t: f64, ratio: f64 },
    #[error(transparent)]
    Specfun(#[from] specfun::SpecfunError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Triangulation(#[from] TriangulationError),
}

/// Which of the two series families is being summed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeriesKind {
    /// `φ_{σ,k}(z;δ)`.
    Primal,
    /// `φ^∨_{σ,k}(z;δ)`.
    Dual,
}

/// A truncated series value `value = exp(log_prefactor)·sum`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeriesValue {
    #[serde(with = "jsonfmt::complex")]
    pub value: Complex64,
    #[serde(with = "jsonfmt::complex")]
    pub log_prefactor: Complex64,
    #[serde(with = "jsonfmt::complex")]
    pub sum: Complex64,
    pub order: usize,
    pub terms_summed: usize,
    pub last_shell_max: f64,
    /// `max |term|` per degree `0..=order`, prefactor excluded.
    pub shell_maxima: Vec<f64>,
}

impl SeriesValue {
    /// Product of two values, with the prefactors combined before exponentiation.
    pub fn product(&self, other: &SeriesValue) -> Complex64 {
        (self.log_prefactor + other.log_prefactor).exp() * self.sum * other.sum
    }
}

/// A point `z ∈ (C^*)^N` together with a note on how it was produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationPoint {
    #[serde(with = "jsonfmt::complex_vec")]
    pub z: Vec<Complex64>,
    pub tag: String,
}

impl EvaluationPoint {
    pub fn new(z: Vec<Complex64>, tag: impl Into<String>) -> Result<Self, SeriesError> {
        if let Some(j) = z.iter().position(|x| x.norm() == 0.0) {
            return Err(SeriesError::ZeroCoordinate(j));
        }
        Ok(Self { z, tag: tag.into() })
    }

    pub fn real(z: &[f64], tag: impl Into<String>) -> Result<Self, SeriesError> {
        Self::new(z.iter().map(|&x| Complex64::new(x, 0.0)).collect(), tag)
    }

    /// Principal logarithms of the coordinates.
    pub fn log_z(&self) -> Vec<Complex64> {
        self.z.iter().map(|x| x.ln()).collect()
    }
}

#[derive(Clone, Copy, Default)]
struct Compensated {
    sum: Complex64,
    carry: Complex64,
}

impl Compensated {
    fn add(&mut self, x: Complex64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }
}

/// Exponents `n ∈ Λ_k` (i.e. `n ≥ 0` with `A_σ̄(n − k) ∈ Z·A_σ`) grouped by
/// total degree `0..=order`, each shell in lexicographic order.
pub fn lattice_shells(sigma: &Simplex, kvec: &[i64], order: usize) -> Vec<Vec<Vec<i64>>> {
    let t = sigma.complement().len();
    (0..=order)
        .map(|deg| {
            intlinalg::compositions(t, deg)
                .into_iter()
                .map(|n| n.into_iter().map(|x| x as i64).collect::<Vec<i64>>())
                .filter(|n| {
                    let m: Vec<i64> = n.iter().zip(kvec).map(|(a, b)| a - b).collect();
                    sigma.in_column_lattice(&m)
                })
                .collect()
        })
        .collect()
}

/// Precomputed data shared by every term of one series.
struct TermData {
    kind: SeriesKind,
    u: Vec<Complex64>,
    b: Vec<Vec<f64>>,
    log_ratio: Vec<Complex64>,
    exp_block: Vec<bool>,
    sigma0: Vec<usize>,
}

impl TermData {
    fn new(sigma: &Simplex, log_z: &[Complex64], delta: &[Complex64], kind: SeriesKind) -> Self {
        let cols = sigma.columns();
        let b = sigma.b_matrix_f64();
        let lz: Vec<Complex64> = cols.iter().map(|&c| log_z[c]).collect();
        let log_ratio = sigma
            .complement()
            .iter()
            .enumerate()
            .map(|(t, &j)| log_z[j] - b.iter().zip(&lz).map(|(row, &l)| l * row[t]).sum::<Complex64>())
            .collect();
        Self {
            kind,
            u: sigma.apply_inverse(delta),
            b,
            log_ratio,
            exp_block: sigma.complement_blocks().iter().map(|&l| l == 0).collect(),
            sigma0: sigma.block_positions(0).to_vec(),
        }
    }

    fn log_prefactor(&self, sigma: &Simplex, log_z: &[Complex64]) -> Complex64 {
        let s: Complex64 = sigma.columns().iter().zip(&self.u).map(|(&c, &u)| u * log_z[c]).sum();
        match self.kind {
            SeriesKind::Primal => -s,
            SeriesKind::Dual => s,
        }
    }

    /// The term for exponent `n`, without the prefactor; `None` when a
    /// reciprocal Gamma factor vanishes.
    fn term(&self, n: &[i64]) -> Option<Complex64> {
        let mut lt: Complex64 = n.iter().zip(&self.log_ratio).map(|(&x, &r)| r * x as f64).sum();
        lt -= n.iter().map(|&x| ln_factorial(x as u64)).sum::<f64>();
        let bn: Vec<f64> = self.b.iter().map(|row| row.iter().zip(n).map(|(b, &x)| b * x as f64).sum()).collect();
        for (&u, &bn) in self.u.iter().zip(&bn) {
            let arg = match self.kind {
                SeriesKind::Primal => 1.0 - u - bn,
                SeriesKind::Dual => 1.0 + u - bn,
            };
            lt += ln_rgamma(arg)?;
        }
        if self.kind == SeriesKind::Dual {
            let n0: i64 = n.iter().zip(&self.exp_block).filter(|(_, &e)| e).map(|(&x, _)| x).sum();
            let phase: f64 = n0 as f64 + self.sigma0.iter().map(|&p| bn[p]).sum::<f64>();
            lt += Complex64::new(0.0, PI * phase);
        }
        Some(lt.exp())
    }
}

fn check_lengths(sigma: &Simplex, kvec: &[i64], log_z: &[Complex64], delta: &[Complex64]) -> Result<(), SeriesError> {
    let d = sigma.labels().len();
    let n = d + sigma.complement().len();
    let pairs = [("z", log_z.len(), n), ("delta", delta.len(), d), ("k", kvec.len(), n - d)];
    for (what, got, want) in pairs {
        if got != want {
            return Err(SeriesError::Length { what, got, want });
        }
    }
    Ok(())
}

fn check_generic(sigma: &Simplex, delta: &[Complex64], kind: SeriesKind, bound: usize) -> Result<(), SeriesError> {
    let d: Vec<Complex64> = match kind {
        SeriesKind::Primal => delta.to_vec(),
        SeriesKind::Dual => delta.iter().map(|x| -x).collect(),
    };
    if is_very_generic(&ParameterVector::from_delta(sigma.k(), &d), sigma, bound) {
        Ok(())
    } else {
        Err(SeriesError::NonGenericParameter { sigma: sigma.labels().to_vec(), bound })
    }
}

/// Individual terms `(n, term)` through degree `order`, prefactor excluded.
pub fn series_terms(
    sigma: &Simplex,
    kvec: &[i64],
    log_z: &[Complex64],
    delta: &[Complex64],
    order: usize,
    kind: SeriesKind,
) -> Result<Vec<(Vec<i64>, Complex64)>, SeriesError> {
    check_lengths(sigma, kvec, log_z, delta)?;
    let data = TermData::new(sigma, log_z, delta, kind);
    Ok(lattice_shells(sigma, kvec, order)
        .into_iter()
        .flatten()
        .map(|n| {
            let t = data.term(&n).unwrap_or_default();
            (n, t)
        })
        .collect())
}

/// Sums a series from principal-branch-free logarithms `log_z`.
pub fn evaluate_series(
    sigma: &Simplex,
    kvec: &[i64],
    log_z: &[Complex64],
    delta: &[Complex64],
    order: usize,
    kind: SeriesKind,
) -> Result<SeriesValue, SeriesError> {
    check_lengths(sigma, kvec, log_z, delta)?;
    check_generic(sigma, delta, kind, order)?;
    let data = TermData::new(sigma, log_z, delta, kind);
    let shells = lattice_shells(sigma, kvec, order);
    let summed: Vec<(Compensated, f64, usize)> = shells
        .par_iter()
        .map(|shell| {
            let mut acc = Compensated::default();
            let mut max = 0.0f64;
            for n in shell {
                if let Some(t) = data.term(n) {
                    acc.add(t);
                    max = max.max(t.norm());
                }
            }
            (acc, max, shell.len())
        })
        .collect();
    let mut total = Compensated::default();
    let mut terms = 0;
    let mut maxima = Vec::with_capacity(summed.len());
    for (acc, max, count) in summed {
        total.add(acc.sum);
        terms += count;
        maxima.push(max);
    }
    let sum = total.sum;
    if !sum.re.is_finite() || !sum.im.is_finite() {
        return Err(specfun::SpecfunError::NonFinite.into());
    }
    check_tail(&maxima, sum.norm())?;
    let log_prefactor = data.log_prefactor(sigma, log_z);
    let last_shell_max = maxima.iter().rev().copied().find(|&m| m > 0.0).unwrap_or(0.0);
    Ok(SeriesValue {
        value: log_prefactor.exp() * sum,
        log_prefactor,
        sum,
        order,
        terms_summed: terms.max(1),
        last_shell_max,
        shell_maxima: maxima,
    })
}

/// Tail policy: the trailing nonzero shells must be non-increasing and the
/// last one small against `|sum|`.
pub fn check_tail(maxima: &[f64], sum_abs: f64) -> Result<(), SeriesError> {
    let nonzero: Vec<f64> = maxima.iter().copied().filter(|&m| m > 0.0).collect();
    if nonzero.len() <= 1 {
        return Ok(());
    }
    let last = *nonzero.last().expect("nonempty");
    let window = &nonzero[nonzero.len().saturating_sub(TAIL_WINDOW)..];
    let decreasing = window.windows(2).all(|w| w[1] <= w[0]);
    if !decreasing || !(last < TAIL_RATIO * sum_abs) {
        return Err(SeriesError::DivergentTail { last, sum: sum_abs });
    }
    Ok(())
}

fn log_point(z: &[Complex64]) -> Result<Vec<Complex64>, SeriesError> {
    if let Some(j) = z.iter().position(|x| x.norm() == 0.0) {
        return Err(SeriesError::ZeroCoordinate(j));
    }
    Ok(z.iter().map(|x| x.ln()).collect())
}

/// `φ_{σ,k}(z;δ)` truncated at total degree `order`.
pub fn gamma_series(
    sigma: &Simplex,
    kvec: &[i64],
    z: &[Complex64],
    delta: &[Complex64],
    order: usize,
) -> Result<SeriesValue, SeriesError> {
    evaluate_series(sigma, kvec, &log_point(z)?, delta, order, SeriesKind::Primal)
}

/// `φ^∨_{σ,k}(z;δ)` truncated at total degree `order`.
pub fn dual_gamma_series(
    sigma: &Simplex,
    kvec: &[i64],
    z: &[Complex64],
    delta: &[Complex64],
    order: usize,
) -> Result<SeriesValue, SeriesError> {
    evaluate_series(sigma, kvec, &log_point(z)?, delta, order, SeriesKind::Dual)
}

/// `max_{σ∈T, j∉σ} |z_σ^{−A_σ^{-1}a(j)} z_j|`.
pub fn domain_ratio(t: &Triangulation, z: &[Complex64]) -> f64 {
    let lz: Vec<f64> = z.iter().map(|x| x.norm().ln()).collect();
    max_log_ratio(t, &lz).exp()
}

fn max_log_ratio(t: &Triangulation, log_abs: &[f64]) -> f64 {
    let mut worst = f64::NEG_INFINITY;
    for s in t.simplices() {
        let cols = s.columns();
        let b = s.b_matrix_f64();
        for (k, &j) in s.complement().iter().enumerate() {
            let e = log_abs[j] - cols.iter().zip(&b).map(|(&c, row)| row[k] * log_abs[c]).sum::<f64>();
            worst = worst.max(e);
        }
    }
    worst
}

/// `z_j = exp(−t·ω'_j)` where `ω'` is a lifting of `T` with its row-space
/// component of `A` replaced by a small seeded one. Row-space shifts leave `T`
/// and every domain ratio unchanged; they only move the overall scale of `z`.
pub fn sample_point_in_ut(
    a: &ConfigMatrix,
    t: &Triangulation,
    scale: f64,
    seed: u64,
) -> Result<EvaluationPoint, SeriesError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let omega: Vec<i64> = if t.omega().is_empty() {
        sample_interior_lifting(a, Some(t), &mut rng)?
    } else {
        t.omega().to_vec()
    };
    let (d, n) = (a.dim(), a.num_cols());
    let am = DMatrix::from_fn(d, n, |r, j| a.matrix().get(r, j).to_f64().unwrap_or(0.0));
    let w = nalgebra::DVector::from_iterator(n, omega.iter().map(|&x| x as f64));
    let gram = &am * am.transpose();
    let coef = gram.lu().solve(&(&am * &w)).ok_or(LinalgError::SingularMatrix)?;
    let shift: Vec<i64> = (0..d).map(|_| rng.gen_range(-2..=2)).collect();
    let rho = nalgebra::DVector::from_iterator(d, shift.iter().map(|&x| x as f64));
    let lifted = w - am.transpose() * (coef - rho);
    let log_abs: Vec<f64> = lifted.iter().map(|x| -scale * x).collect();
    let ratio = max_log_ratio(t, &log_abs).exp();
    if !(ratio < DOMAIN_RATIO_BOUND) {
        return Err(SeriesError::ScaleTooSmall { t: scale, ratio });
    }
    let z: Vec<Complex64> = log_abs.iter().map(|&l| Complex64::new(l.exp(), 0.0)).collect();
    EvaluationPoint::new(z, format!("U_T scale t={scale} lifting={omega:?} row shift={shift:?}"))
}

/// `sgn(A,σ) = (−1)^{k|σ^(0)| + (k−1)|σ^(1)| + … + |σ^(k−1)| + k(k−1)/2}`.
pub fn sgn_a_sigma(sigma: &Simplex) -> f64 {
    let k = sigma.k();
    let mut e = k * sigma.block_positions(0).len() + k * k.saturating_sub(1) / 2;
    for l in 1..=k {
        e += (k - l) * sigma.block_positions(l).len();
    }
    if e.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// `ε_σ(δ,k)`: `1` if `|σ^(0)| ≤ 1`, else `1 − exp(−2πi Σ_{i∈σ^(0)} e_i·A_σ^{-1}(δ + A_σ̄ k))`.
pub fn epsilon_sigma(sigma: &Simplex, delta: &[Complex64], kvec: &[i64]) -> Complex64 {
    let s0 = sigma.block_positions(0);
    if s0.len() <= 1 {
        return Complex64::new(1.0, 0.0);
    }
    let u = sigma.apply_inverse(delta);
    let b = sigma.b_matrix_f64();
    let x: Complex64 = s0
        .iter()
        .map(|&p| u[p] + b[p].iter().zip(kvec).map(|(b, &k)| b * k as f64).sum::<f64>())
        .sum();
    one_minus_exp_m2pii(x)
}

/// Complete systems of representatives: `k̃(i)` for `Z^σ / Z·ᵗA_σ` and
/// `k(j) ∈ Z_{≥0}^σ̄` for `Z^d / Z·A_σ`.
pub fn cycle_representatives(a: &ConfigMatrix, sigma: &Simplex) -> Result<(Vec<Vec<BigInt>>, Vec<Vec<i64>>), SeriesError> {
    let cols = sigma.columns();
    let a_sigma = a.matrix().select_columns(&cols)?;
    let ktilde = intlinalg::lattice_quotient_representatives(&a_sigma.transpose())?;
    let k = intlinalg::coset_representatives(a.matrix(), &cols)?
        .into_iter()
        .map(|v| v.iter().map(|x| x.to_i64().expect("small representative")).collect())
        .collect();
    Ok((ktilde, k))
}

fn gammas(sigma: &Simplex, delta: &[Complex64]) -> Result<Vec<Complex64>, SeriesError> {
    let g = delta[..sigma.k()].to_vec();
    for (l, &value) in g.iter().enumerate() {
        if value.im.abs() < INTEGRALITY_TOL && (value.re - value.re.round()).abs() < INTEGRALITY_TOL {
            return Err(SeriesError::IntegralGamma { l: l + 1, value });
        }
    }
    Ok(g)
}

fn det_f64(sigma: &Simplex) -> f64 {
    sigma.det().to_f64().unwrap_or(f64::NAN)
}

/// Scalar in front of `T_σ`.
pub fn transformation_scalar(sigma: &Simplex, delta: &[Complex64]) -> Result<Complex64, SeriesError> {
    let g = gammas(sigma, delta)?;
    let mut num = Complex64::new(sgn_a_sigma(sigma), 0.0);
    let mut den = Complex64::new(det_f64(sigma), 0.0);
    for (l, &gl) in g.iter().enumerate() {
        let single = sigma.block_positions(l + 1).len() == 1;
        if single {
            num *= exp_pi_i(-gl);
            den *= one_minus_exp_m2pii(gl);
        } else {
            num *= exp_pi_i(-(1.0 - gl));
        }
        // 1/Γ(γ_l) stays finite through the poles
        num *= specfun::rgamma(gl);
    }
    Ok(num / den)
}

/// Scalar in front of `T_σ^∨`, including `e^{−πi Σ_{σ^(0)} e_i·A_σ^{-1}δ}`.
pub fn dual_transformation_scalar(sigma: &Simplex, delta: &[Complex64]) -> Result<Complex64, SeriesError> {
    let g = gammas(sigma, delta)?;
    let u = sigma.apply_inverse(delta);
    let s0: Complex64 = sigma.block_positions(0).iter().map(|&p| u[p]).sum();
    let mut num = exp_pi_i(-s0) * sgn_a_sigma(sigma);
    let mut den = Complex64::new(det_f64(sigma), 0.0);
    for (l, &gl) in g.iter().enumerate() {
        let single = sigma.block_positions(l + 1).len() == 1;
        if single {
            num *= exp_pi_i(gl);
            den *= one_minus_exp_2pii(gl);
        } else {
            num *= exp_pi_i(-(1.0 + gl));
        }
        num *= specfun::rgamma(-gl);
    }
    Ok(num / den)
}

/// Character matrix `exp(2πi·ᵗk̃(i) A_σ^{-1}A_σ̄ k(j))`, reduced exactly mod 1.
pub fn character_matrix(sigma: &Simplex, ktilde: &[Vec<BigInt>], k: &[Vec<i64>]) -> DMatrix<Complex64> {
    let b = sigma.b_matrix();
    DMatrix::from_fn(ktilde.len(), k.len(), |i, j| {
        let mut x = BigRational::zero();
        for (p, kt) in ktilde[i].iter().enumerate() {
            for (t, &kj) in k[j].iter().enumerate() {
                x += &b[p][t] * BigRational::from_integer(kt * BigInt::from(kj));
            }
        }
        let frac = (&x - x.floor()).to_f64().unwrap_or(0.0);
        exp_2pi_i(Complex64::new(frac, 0.0))
    })
}

fn matrix_generic_bound(k: &[Vec<i64>]) -> usize {
    k.iter().map(|v| v.iter().sum::<i64>() as usize).max().unwrap_or(0)
}

fn assemble_transformation(
    a: &ConfigMatrix,
    sigma: &Simplex,
    delta: &[Complex64],
    kind: SeriesKind,
) -> Result<DMatrix<Complex64>, SeriesError> {
    let (ktilde, k) = cycle_representatives(a, sigma)?;
    check_generic(sigma, delta, kind, matrix_generic_bound(&k))?;
    let (scalar, sign, eps_delta): (Complex64, f64, Vec<Complex64>) = match kind {
        SeriesKind::Primal => (transformation_scalar(sigma, delta)?, 1.0, delta.to_vec()),
        SeriesKind::Dual => (dual_transformation_scalar(sigma, delta)?, -1.0, delta.iter().map(|x| -x).collect()),
    };
    let u = sigma.apply_inverse(delta);
    let chars = character_matrix(sigma, &ktilde, &k);
    let r = k.len();
    let left = DMatrix::from_fn(r, r, |i, j| {
        if i != j {
            return Complex64::zero();
        }
        let x: Complex64 = ktilde[i].iter().zip(&u).map(|(kt, &ui)| ui * kt.to_f64().unwrap_or(0.0)).sum();
        exp_2pi_i(x * sign)
    });
    let right = DMatrix::from_fn(r, r, |i, j| if i == j { epsilon_sigma(sigma, &eps_delta, &k[j]) } else { Complex64::zero() });
    Ok(left * chars * right * scalar)
}

/// `T_σ` with rows indexed by `k̃(i)` and columns by `k(j)` as returned by
/// [`cycle_representatives`].
pub fn transformation_matrix(a: &ConfigMatrix, sigma: &Simplex, delta: &[Complex64]) -> Result<DMatrix<Complex64>, SeriesError> {
    assemble_transformation(a, sigma, delta, SeriesKind::Primal)
}

/// `T_σ^∨`, same indexing as [`transformation_matrix`].
pub fn transformation_matrix_dual(a: &ConfigMatrix, sigma: &Simplex, delta: &[Complex64]) -> Result<DMatrix<Complex64>, SeriesError> {
    assemble_transformation(a, sigma, delta, SeriesKind::Dual)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::registry;
    use crate::triangulation::{ladder_triangulation, Candidates};
    use std::collections::BTreeSet;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn cv(v: &[f64]) -> Vec<Complex64> {
        v.iter().map(|&x| c(x)).collect()
    }

    fn binom(n: usize, r: usize) -> usize {
        (0..r).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    fn non_unimodular(a: &ConfigMatrix) -> Vec<Simplex> {
        Candidates::new(a).unwrap().simplices().iter().filter(|s| !s.is_unimodular()).cloned().collect()
    }

    #[test]
    fn unimodular_shells_are_full() {
        let a = registry::h4();
        let s = Simplex::new(&a, &[2, 3, 4]).unwrap();
        assert!(s.is_unimodular());
        let shells = lattice_shells(&s, &[0, 0], 12);
        let count: usize = shells.iter().map(Vec::len).sum();
        assert_eq!(count, binom(12 + 2, 2));
    }

    #[test]
    fn g1_235_keeps_even_class() {
        let a = registry::g1();
        let s = Simplex::new(&a, &[2, 3, 5]).unwrap();
        assert_eq!(s.index(), 2);
        for n in lattice_shells(&s, &[0, 0], 10).into_iter().flatten() {
            // A_σ̄ n ∈ Z·A_σ, checked by exact rational solve
            let v: Vec<BigInt> = (0..a.dim())
                .map(|r| s.complement().iter().zip(&n).map(|(&j, &x)| a.matrix().get(r, j) * BigInt::from(x)).sum())
                .collect();
            assert!(s.contains_lattice_point(&v));
        }
        let all: usize = (0..=10).map(|d| d + 1).sum();
        let kept: usize = lattice_shells(&s, &[0, 0], 10).iter().map(Vec::len).sum();
        assert!(kept < all && kept > 0);
    }

    #[test]
    fn coset_shells_partition_the_orthant() {
        for a in [registry::g1(), registry::h4(), registry::gamma2()] {
            for s in non_unimodular(&a) {
                let (_, reps) = cycle_representatives(&a, &s).unwrap();
                assert_eq!(reps.len(), s.index());
                let mut seen = BTreeSet::new();
                for k in &reps {
                    for n in lattice_shells(&s, k, 20).into_iter().flatten() {
                        assert!(seen.insert(n), "overlapping cosets for σ = {:?}", s.labels());
                    }
                }
                let t = s.complement().len();
                let total: usize = (0..=20).map(|d| intlinalg::compositions(t, d).len()).sum();
                assert_eq!(seen.len(), total);
            }
        }
    }

    fn unchecked_value(s: &Simplex, k: &[i64], lz: &[Complex64], delta: &[Complex64], order: usize) -> Complex64 {
        let terms = series_terms(s, k, lz, delta, order, SeriesKind::Primal).unwrap();
        let pre = TermData::new(s, lz, delta, SeriesKind::Primal).log_prefactor(s, lz).exp();
        pre * terms.iter().map(|(_, t)| t).sum::<Complex64>()
    }

    #[test]
    fn monodromy_multiplies_by_character() {
        let delta = cv(&[0.31, 0.23, 0.17]);
        for a in [registry::h4(), registry::g1()] {
            let z: Vec<Complex64> = (0..a.num_cols()).map(|j| Complex64::new(0.6 + 0.1 * j as f64, 0.2)).collect();
            let lz: Vec<Complex64> = z.iter().map(|x| x.ln()).collect();
            for s in Candidates::new(&a).unwrap().simplices() {
                let (_, reps) = cycle_representatives(&a, s).unwrap();
                let u = s.apply_inverse(&delta);
                let b = s.b_matrix_f64();
                for k in &reps {
                    let base = unchecked_value(s, k, &lz, &delta, 5);
                    for j in 0..a.num_cols() {
                        let mut shifted = lz.clone();
                        shifted[j] += Complex64::new(0.0, 2.0 * PI);
                        let moved = unchecked_value(s, k, &shifted, &delta, 5);
                        let expected = match s.columns().iter().position(|&cj| cj == j) {
                            Some(p) => {
                                let bk: f64 = b[p].iter().zip(k).map(|(x, &y)| x * y as f64).sum();
                                exp_2pi_i(-(u[p] + bk))
                            }
                            None => c(1.0),
                        };
                        let ratio = moved / base;
                        assert!((ratio - expected).norm() < 1e-12, "σ={:?} k={k:?} j={j}", s.labels());
                    }
                }
            }
        }
    }

    fn rising(x: f64, n: usize) -> f64 {
        (0..n).map(|i| x + i as f64).product()
    }

    #[test]
    fn gauss_terms_are_2f1_coefficients() {
        let a = registry::gauss();
        let s = Simplex::new(&a, &[2, 3, 4]).unwrap();
        let (al, be, ga) = (0.21, 0.47, 0.83);
        let delta = cv(&[al, 1.0 + be - ga, 1.0 + al - ga]);
        let x = 0.3;
        let lz: Vec<Complex64> = cv(&[x, 1.0, 1.0, 1.0]).iter().map(|v| v.ln()).collect();
        let terms = series_terms(&s, &[0], &lz, &delta, 10, SeriesKind::Primal).unwrap();
        let t0 = terms[0].1;
        for (n, t) in &terms {
            let n = n[0] as usize;
            let want = rising(al, n) * rising(be, n) / (rising(ga, n) * rising(1.0, n)) * x.powi(n as i32);
            assert!(((t / t0) - want).norm() < 1e-10 * want.abs(), "n={n}");
        }
    }

    /// Direct summation of the displayed quadruple sum for the first E(3,6)
    /// ladder series.
    #[test]
    fn e36_first_ladder_series_by_hand() {
        let a = registry::e36();
        let cell = |i: usize, j: usize| a.cells().unwrap().iter().position(|&p| p == (i, j)).unwrap();
        let s = Simplex::from_columns(&a, &[cell(2, 3), cell(2, 4), cell(2, 5), cell(1, 5), cell(0, 5)]).unwrap();
        let (c1, c2, c3, c4, c5) = (0.13, 0.27, 0.31, 0.44, 0.19);
        let c0 = c3 + c4 + c5 - c1 - c2;
        let delta = cv(&[c3, c4, c5, c1, c2]);
        let mut z = vec![c(1.0); a.num_cols()];
        let vals = [(0, 3, 0.7), (0, 4, 0.9), (0, 5, 1.4), (1, 3, 0.8), (1, 4, 1.1), (1, 5, 1.7), (2, 3, 1.2), (2, 4, 0.6), (2, 5, 1.3)];
        for &(i, j, v) in &vals {
            z[cell(i, j)] = c(v);
        }
        let zz = |i, j| z[cell(i, j)].re;
        let rg = |x: f64| specfun::rgamma(c(x)).re;
        let mut oracle = 0.0;
        for u13 in 0..=2i32 {
            for u14 in 0..=2 - u13 {
                for u03 in 0..=2 - u13 - u14 {
                    for u04 in 0..=2 - u13 - u14 - u03 {
                        let (f13, f14, f03, f04) = (u13 as f64, u14 as f64, u03 as f64, u04 as f64);
                        let g = rg(1.0 - c3 - f13 - f03)
                            * rg(1.0 - c4 - f14 - f04)
                            * rg(1.0 + c0 + c1 - c5 + f13 + f14 + f03 + f04)
                            * rg(1.0 - c1 - f13 - f14)
                            * rg(1.0 - c0 - f03 - f04);
                        let mono = (zz(2, 5) / (zz(2, 3) * zz(1, 5)) * zz(1, 3)).powi(u13)
                            * (zz(2, 5) / (zz(2, 4) * zz(1, 5)) * zz(1, 4)).powi(u14)
                            * (zz(2, 5) / (zz(2, 3) * zz(0, 5)) * zz(0, 3)).powi(u03)
                            * (zz(2, 5) / (zz(2, 4) * zz(0, 5)) * zz(0, 4)).powi(u04);
                        let fact = [u13, u14, u03, u04].iter().map(|&u| rising(1.0, u as usize)).product::<f64>();
                        oracle += g * mono / fact;
                    }
                }
            }
        }
        oracle *= zz(2, 3).powf(-c3) * zz(2, 4).powf(-c4) * zz(2, 5).powf(c0 + c1 - c5) * zz(1, 5).powf(-c1) * zz(0, 5).powf(-c0);
        let lz: Vec<Complex64> = z.iter().map(|x| x.ln()).collect();
        let kz = vec![0; s.complement().len()];
        let terms = series_terms(&s, &kz, &lz, &delta, 2, SeriesKind::Primal).unwrap();
        let sum: Complex64 = terms.iter().map(|(_, t)| t).sum();
        let pre = TermData::new(&s, &lz, &delta, SeriesKind::Primal).log_prefactor(&s, &lz).exp();
        let ours = pre * sum;
        assert!((ours - oracle).norm() < 1e-12 * oracle.abs(), "{ours} vs {oracle}");
    }

    #[test]
    fn pure_euler_dual_is_primal_at_minus_delta() {
        let a = registry::gauss();
        let delta = cv(&[0.21, 0.64, 0.38]);
        let neg: Vec<Complex64> = delta.iter().map(|x| -x).collect();
        let z = cv(&[0.25, 1.0, 0.9, 1.1]);
        for labels in [[1, 2, 3], [2, 3, 4]] {
            let s = Simplex::new(&a, &labels).unwrap();
            assert!(s.block_positions(0).is_empty());
            let d = dual_gamma_series(&s, &[0], &z, &delta, 30).unwrap();
            let p = gamma_series(&s, &[0], &z, &neg, 30).unwrap();
            assert!((d.value - p.value).norm() < 1e-13 * p.value.norm());
        }
    }

    #[test]
    fn dual_leading_term_magnitude() {
        let a = registry::h4();
        let s = Simplex::new(&a, &[1, 2, 5]).unwrap();
        let delta = cv(&[0.31, 0.23, 0.17]);
        let z = cv(&[0.05, 0.07, 1.3, 0.04, 0.9]);
        let lz: Vec<Complex64> = z.iter().map(|x| x.ln()).collect();
        let terms = series_terms(&s, &[0, 0], &lz, &delta, 0, SeriesKind::Dual).unwrap();
        let u = s.apply_inverse(&delta);
        let mut want = c(1.0);
        for (p, &col) in s.columns().iter().enumerate() {
            want *= (u[p] * lz[col]).exp() * specfun::rgamma(1.0 + u[p]);
        }
        let pre = TermData::new(&s, &lz, &delta, SeriesKind::Dual).log_prefactor(&s, &lz).exp();
        assert!(((pre * terms[0].1).norm() - want.norm()).abs() < 1e-13 * want.norm());
    }

    #[test]
    fn doubling_order_is_stable_deep_in_domain() {
        let a = registry::gamma2();
        let t = Candidates::new(&a).unwrap();
        let tri = t.triangulate(&a, &sample_interior_lifting(&a, None, &mut ChaCha8Rng::seed_from_u64(3)).unwrap()).unwrap();
        let p = sample_point_in_ut(&a, &tri, 5.0, 1).unwrap();
        let delta = cv(&[0.31, 0.23]);
        for s in tri.simplices() {
            let k = vec![0; s.complement().len()];
            let lo = gamma_series(s, &k, &p.z, &delta, 12).unwrap();
            let hi = gamma_series(s, &k, &p.z, &delta, 24).unwrap();
            assert!((hi.value - lo.value).norm() <= 10.0 * lo.last_shell_max * lo.log_prefactor.exp().norm());
            let m: Vec<f64> = hi.shell_maxima.iter().copied().filter(|&x| x > 0.0).collect();
            let tail = &m[m.len() - 5..];
            assert!(tail.windows(2).all(|w| w[1] <= w[0]), "{tail:?}");
        }
    }

    #[test]
    fn sampling_gamma2_t2() {
        let a = registry::gamma2();
        let target = Triangulation::from_simplices(
            &a,
            [[1, 4], [2, 3], [3, 4]].iter().map(|l| Simplex::new(&a, l).unwrap()).collect(),
        )
        .unwrap();
        let p = sample_point_in_ut(&a, &target, 3.0, 5).unwrap();
        assert!(p.z.iter().all(|x| x.im == 0.0 && x.re > 0.0));
        let r3 = domain_ratio(&target, &p.z);
        assert!(r3 < DOMAIN_RATIO_BOUND);
        let far = sample_point_in_ut(&a, &target, 12.0, 5).unwrap();
        assert!(domain_ratio(&target, &far.z) < r3);
        assert!(matches!(sample_point_in_ut(&a, &target, 1e-3, 5), Err(SeriesError::ScaleTooSmall { .. })));
    }

    #[test]
    fn signs_and_epsilons() {
        let g2 = registry::gamma2();
        assert_eq!(sgn_a_sigma(&Simplex::new(&g2, &[1, 4]).unwrap()), -1.0);
        let h4 = registry::h4();
        let s = Simplex::new(&h4, &[1, 2, 5]).unwrap();
        assert_eq!(sgn_a_sigma(&s), 1.0);
        assert_eq!(epsilon_sigma(&Simplex::new(&g2, &[2, 3]).unwrap(), &cv(&[0.3, 0.2]), &[0, 0]), c(1.0));
        // A_σ = columns e1, e2, (1,1,1): e_1+e_2 part of A_σ^{-1}δ is c1 + c2 − 2γ
        let delta = cv(&[0.31, 0.23, 0.17]);
        let x = 0.23 + 0.17 - 2.0 * 0.31;
        let want = c(1.0) - exp_2pi_i(c(-x));
        assert!((epsilon_sigma(&s, &delta, &[0, 0]) - want).norm() < 1e-14);
    }

    #[test]
    fn unimodular_matrix_is_scalar() {
        let a = registry::gauss();
        let s = Simplex::new(&a, &[1, 2, 3]).unwrap();
        let delta = cv(&[0.21, 0.64, 0.38]);
        let m = transformation_matrix(&a, &s, &delta).unwrap();
        assert_eq!(m.shape(), (1, 1));
        assert!((m[(0, 0)] - transformation_scalar(&s, &delta).unwrap()).norm() < 1e-15);
        let d = transformation_matrix_dual(&a, &s, &delta).unwrap();
        assert!((d[(0, 0)] - dual_transformation_scalar(&s, &delta).unwrap()).norm() < 1e-15);
    }

    #[test]
    fn index_two_character_matrix() {
        let a = registry::g1();
        let s = Simplex::new(&a, &[2, 3, 5]).unwrap();
        let (kt, k) = cycle_representatives(&a, &s).unwrap();
        let ch = character_matrix(&s, &kt, &k);
        assert_eq!(ch.shape(), (2, 2));
        let target = [[1.0, 1.0], [1.0, -1.0]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((ch[(i, j)] - c(target[i][j])).norm() < 1e-14);
            }
        }
        let delta = cv(&[0.31, 0.47, 0.23]);
        let t = transformation_matrix(&a, &s, &delta).unwrap();
        assert!(t.determinant().norm() > 1e-6);
        let td = transformation_matrix_dual(&a, &s, &delta).unwrap();
        assert!(td.determinant().norm() > 1e-6);
    }

    #[test]
    fn integral_gamma_is_rejected() {
        let a = registry::gauss();
        let s = Simplex::new(&a, &[1, 2, 3]).unwrap();
        assert!(matches!(transformation_scalar(&s, &cv(&[2.0, 0.3, 0.4])), Err(SeriesError::IntegralGamma { l: 1, .. })));
    }

    #[test]
    fn resonant_parameter_is_rejected() {
        let a = registry::gauss();
        let s = Simplex::new(&a, &[1, 2, 3]).unwrap();
        let r = gamma_series(&s, &[0], &cv(&[0.1, 1.0, 1.0, 1.0]), &cv(&[1.0, 0.3, 0.0]), 5);
        assert!(matches!(r, Err(SeriesError::NonGenericParameter { .. })));
    }

    #[test]
    fn tail_policy() {
        assert!(check_tail(&[1.0, 0.1, 0.01, 1e-5], 1.0).is_ok());
        assert!(check_tail(&[1.0, 0.1, 0.2, 1e-5], 1.0).is_err());
        assert!(check_tail(&[1.0, 0.5, 0.4, 0.3], 1.0).is_err());
        assert!(check_tail(&[1.0, 0.0, 0.0], 1.0).is_ok());
    }

    #[test]
    fn ladder_series_converge_at_small_zeta() {
        let a = registry::e36();
        let (tri, _) = ladder_triangulation(&a, 2, 5, 4).unwrap();
        let cell = |i: usize, j: usize| a.cells().unwrap().iter().position(|&p| p == (i, j)).unwrap();
        let zeta = [0.05, 0.05, 0.05, 0.05];
        let mut z = vec![c(1.0); a.num_cols()];
        z[cell(1, 4)] = c(zeta[0]);
        z[cell(1, 5)] = c(zeta[0] * zeta[1]);
        z[cell(2, 4)] = c(zeta[0] * zeta[2]);
        z[cell(2, 5)] = c(zeta.iter().product());
        assert!(domain_ratio(&tri, &z) < DOMAIN_RATIO_BOUND);
        let delta = cv(&[0.31, 0.44, 0.19, 0.13, 0.27]);
        for s in tri.simplices() {
            gamma_series(s, &[0; 4], &z, &delta, 10).unwrap();
        }
    }
}
