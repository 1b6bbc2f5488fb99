//! Intersection numbers and the quadratic relations they induce between
//! Γ-series and their duals.
//!
//! For a unimodular convergent triangulation `T` and cocycles
//! `φ = x^a h^{−b} dx/x`, `ψ = x^{−a′} h^{b′} dx/x`, the cohomology intersection
//! number satisfies
//!
//! ```text
//! ⟨φ,ψ⟩_ch / (2πi)^n
//!   = (−1)^{|b|+|b′|} γ_1⋯γ_k (γ−b)_b (−γ−b′)_{b′}
//!     Σ_σ s_σ π^{n+k} / ∏ sin(π A_σ^{-1}δ) · φ_σ(z; δ_1) φ^∨_σ(z; δ_2)
//! ```
//!
//! with `δ_1 = (γ−b, c+a)`, `δ_2 = (γ+b′, c−a′)` and the sign
//! `s_σ = (−1)^{Σ_{i∈σ^(0)} e_i·A_σ^{-1}(δ_2−δ)}`. [`quadratic_lhs`] evaluates
//! the right-hand side; [`period_matrix`] assembles the same quantity from
//! transformation scalars and homology intersection numbers.

use crate::classical;
use crate::config::{aomoto_gelfand_config, confluent_config, registry, ConfigError, ConfigMatrix, ParameterVector};
use crate::jsonfmt;
use crate::series::{
    dual_gamma_series, gamma_series, sample_point_in_ut, transformation_scalar, dual_transformation_scalar,
    EvaluationPoint, SeriesError, SeriesValue,
};
use crate::specfun::{self, one_minus_exp_2pii, one_minus_exp_m2pii, pochhammer, pochhammer_rational, sin_pi_product, SpecfunError};
use crate::triangulation::{enumerate_ladders, ladder_columns, ladder_triangulation, Simplex, Triangulation, TriangulationError};
use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IntersectionError {
    #[error("simplex {0:?} is not unimodular")]
    NotUnimodular(Vec<usize>),
    #[error("triangulation is not convergent")]
    NotConvergent,
    #[error("triangulation is not unimodular")]
    TriangulationNotUnimodular,
    #[error("zero denominator: {0}")]
    ZeroDenominator(String),
    #[error("invalid index sets: {0}")]
    BadSubsets(String),
    #[error("degenerate parameter: {0}")]
    DegenerateParameter(String),
    #[error("unknown case `{0}`")]
    UnknownCase(String),
    #[error("{what}: expected length {want}, got {got}")]
    Length { what: &'static str, got: usize, want: usize },
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Specfun(#[from] SpecfunError),
    #[error(transparent)]
    Triangulation(#[from] TriangulationError),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

type Result<T, E = IntersectionError> = std::result::Result<T, E>;

/// `⟨P, P̌⟩ = ∏_i (1 − e^{−2πiα_i})` for Pochhammer cycles.
pub fn pochhammer_cycle_intersection(alphas: &[Complex64]) -> Complex64 {
    alphas.iter().map(|&a| one_minus_exp_m2pii(a)).product()
}

/// `1 − e^{−2πiα}` for the Hankel contour against its dual.
pub fn hankel_intersection(alpha: Complex64) -> Complex64 {
    one_minus_exp_m2pii(alpha)
}

/// `⟨Γ_{σ,0}, Γ̌_{σ,0}⟩_h` for unimodular `σ`.
///
/// Each Euler block with `|σ^(l)| > 1` contributes
/// `(1−e^{2πiγ_l}) ∏_{i∈σ^(l)} (1−e^{−2πi u_i})` with `u = A_σ^{-1}δ`. A
/// nonempty exponential block contributes the Hankel factor `1−e^{−2πiγ_0}`,
/// `γ_0 = Σ_{i∈σ^(0)} u_i`, and when `|σ^(0)| ≥ 2` also the Pochhammer factor
/// `(1−e^{2πiγ_0}) ∏_{i∈σ^(0)} (1−e^{−2πi u_i})`.
pub fn homology_intersection(sigma: &Simplex, delta: &[Complex64]) -> Result<Complex64> {
    if !sigma.is_unimodular() {
        return Err(IntersectionError::NotUnimodular(sigma.labels().to_vec()));
    }
    let u = sigma.apply_inverse(delta);
    let mut value = Complex64::one();
    for l in 1..=sigma.k() {
        let pos = sigma.block_positions(l);
        if pos.len() > 1 {
            value *= one_minus_exp_2pii(delta[l - 1]);
            value *= pos.iter().map(|&p| one_minus_exp_m2pii(u[p])).product::<Complex64>();
        }
    }
    let s0 = sigma.block_positions(0);
    if !s0.is_empty() {
        let g0: Complex64 = s0.iter().map(|&p| u[p]).sum();
        value *= hankel_intersection(g0);
        if s0.len() > 1 {
            value *= one_minus_exp_2pii(g0);
            value *= s0.iter().map(|&p| one_minus_exp_m2pii(u[p])).product::<Complex64>();
        }
    }
    Ok(value)
}

/// `x^a h^{−b}` exponents of a cocycle `x^a h^{−b} dx/x` (or of its dual
/// partner `x^{−a′} h^{b′} dx/x`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cocycle {
    pub a: Vec<i64>,
    pub b: Vec<i64>,
}

impl Cocycle {
    pub fn trivial(k: usize, n: usize) -> Self {
        Self { a: vec![0; n], b: vec![0; k] }
    }
}

/// The four exponent vectors `a, a′ ∈ Z^n`, `b, b′ ∈ Z^k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwistVector {
    pub a: Vec<i64>,
    pub ap: Vec<i64>,
    pub b: Vec<i64>,
    pub bp: Vec<i64>,
}

impl TwistVector {
    pub fn zero(k: usize, n: usize) -> Self {
        Self { a: vec![0; n], ap: vec![0; n], b: vec![0; k], bp: vec![0; k] }
    }

    pub fn pair(phi: &Cocycle, psi: &Cocycle) -> Self {
        Self { a: phi.a.clone(), b: phi.b.clone(), ap: psi.a.clone(), bp: psi.b.clone() }
    }

    pub fn check(&self, k: usize, n: usize) -> Result<()> {
        for (what, got, want) in [("a", self.a.len(), n), ("a'", self.ap.len(), n), ("b", self.b.len(), k), ("b'", self.bp.len(), k)] {
            if got != want {
                return Err(IntersectionError::Length { what, got, want });
            }
        }
        Ok(())
    }

    /// `(δ_1, δ_2) = ((γ−b, c+a), (γ+b′, c−a′))`.
    pub fn shifted(&self, p: &ParameterVector) -> (Vec<Complex64>, Vec<Complex64>) {
        let d1 = p.gamma.iter().zip(&self.b).map(|(g, &b)| g - b as f64)
            .chain(p.c.iter().zip(&self.a).map(|(c, &a)| c + a as f64))
            .collect();
        let d2 = p.gamma.iter().zip(&self.bp).map(|(g, &b)| g + b as f64)
            .chain(p.c.iter().zip(&self.ap).map(|(c, &a)| c - a as f64))
            .collect();
        (d1, d2)
    }

    /// `δ_2 − δ = (b′, −a′)`.
    fn dual_shift(&self) -> Vec<BigInt> {
        self.bp.iter().map(|&x| BigInt::from(x)).chain(self.ap.iter().map(|&x| BigInt::from(-x))).collect()
    }
}

fn ensure_unimodular_convergent(t: &Triangulation) -> Result<()> {
    if !t.convergent() {
        return Err(IntersectionError::NotConvergent);
    }
    if !t.unimodular() {
        return Err(IntersectionError::TriangulationNotUnimodular);
    }
    Ok(())
}

/// `(−1)^{|b|+|b′|} γ_1⋯γ_k (γ−b)_b (−γ−b′)_{b′}`.
fn quadratic_prefactor(p: &ParameterVector, tw: &TwistVector) -> Result<Complex64> {
    let parity = tw.b.iter().chain(&tw.bp).sum::<i64>().rem_euclid(2);
    let mut pre = Complex64::new(if parity == 0 { 1.0 } else { -1.0 }, 0.0);
    for ((&g, &b), &bp) in p.gamma.iter().zip(&tw.b).zip(&tw.bp) {
        pre *= g;
        pre *= pochhammer(g - b as f64, Complex64::new(b as f64, 0.0))?;
        pre *= pochhammer(-g - bp as f64, Complex64::new(bp as f64, 0.0))?;
    }
    Ok(pre)
}

/// `s_σ`: parity of `Σ_{i∈σ^(0)} e_i·A_σ^{-1}(δ_2 − δ)` (an integer for unimodular σ).
fn dual_shift_sign(sigma: &Simplex, tw: &TwistVector) -> f64 {
    let v = sigma.inverse().mul_int_vec(&tw.dual_shift());
    let s: BigRational = sigma.block_positions(0).iter().map(|&p| v[p].clone()).fold(BigRational::zero(), |a, b| a + b);
    if (s.to_integer() % BigInt::from(2)).is_zero() {
        1.0
    } else {
        -1.0
    }
}

/// The evaluated sum together with its per-simplex summands.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QuadraticSum {
    #[serde(with = "jsonfmt::complex")]
    pub value: Complex64,
    #[serde(with = "jsonfmt::complex_vec")]
    pub summands: Vec<Complex64>,
    /// Largest trusted `last_shell_max` relative to its series sum.
    pub worst_tail: f64,
}

fn relative_tail(v: &SeriesValue) -> f64 {
    v.last_shell_max / v.sum.norm().max(f64::MIN_POSITIVE)
}

/// Right-hand side of the condensed quadratic relation; it equals
/// `⟨φ,ψ⟩_ch / (2πi)^n`.
pub fn quadratic_lhs(
    a: &ConfigMatrix,
    t: &Triangulation,
    p: &ParameterVector,
    tw: &TwistVector,
    z: &EvaluationPoint,
    order: usize,
) -> Result<QuadraticSum> {
    ensure_unimodular_convergent(t)?;
    p.check(a)?;
    tw.check(a.k(), a.n())?;
    let delta = p.delta();
    let (d1, d2) = tw.shifted(p);
    let pre = quadratic_prefactor(p, tw)?;
    let weight = PI.powi(a.dim() as i32);
    let mut summands = Vec::with_capacity(t.simplices().len());
    let mut worst_tail = 0.0f64;
    for s in t.simplices() {
        let k0 = vec![0; s.complement().len()];
        let u = s.apply_inverse(&delta);
        let w = weight / sin_pi_product(&u)? * dual_shift_sign(s, tw);
        let phi = gamma_series(s, &k0, &z.z, &d1, order)?;
        let phiv = dual_gamma_series(s, &k0, &z.z, &d2, order)?;
        worst_tail = worst_tail.max(relative_tail(&phi)).max(relative_tail(&phiv));
        summands.push(pre * w * phi.product(&phiv));
    }
    Ok(QuadraticSum { value: summands.iter().sum(), summands, worst_tail })
}

/// Period matrix rows `(2πi)^{n+k} T_σ(δ_1) φ_σ(z;δ_1)` for each cocycle and the
/// dual rows for each dual cocycle, both indexed by the simplices of `T`.
fn period_rows(
    t: &Triangulation,
    p: &ParameterVector,
    cocycles: &[Cocycle],
    dual: bool,
    z: &EvaluationPoint,
    order: usize,
) -> Result<Vec<Vec<Complex64>>> {
    let d = p.gamma.len() + p.c.len();
    let tpi = Complex64::new(0.0, 2.0 * PI).powi(d as i32);
    cocycles
        .iter()
        .map(|co| {
            let tw = if dual {
                TwistVector::pair(&Cocycle::trivial(p.gamma.len(), p.c.len()), co)
            } else {
                TwistVector::pair(co, &Cocycle::trivial(p.gamma.len(), p.c.len()))
            };
            let (d1, d2) = tw.shifted(p);
            t.simplices()
                .iter()
                .map(|s| {
                    let k0 = vec![0; s.complement().len()];
                    let v = if dual {
                        let neg: Vec<Complex64> = d2.iter().map(|x| -x).collect();
                        dual_transformation_scalar(s, &d2)?
                            * crate::series::epsilon_sigma(s, &neg, &k0)
                            * dual_gamma_series(s, &k0, &z.z, &d2, order)?.value
                    } else {
                        transformation_scalar(s, &d1)?
                            * crate::series::epsilon_sigma(s, &d1, &k0)
                            * gamma_series(s, &k0, &z.z, &d1, order)?.value
                    };
                    Ok(tpi * v)
                })
                .collect()
        })
        .collect()
}

/// `I_ch/(2πi)^n = P · ᵗI_h^{-1} · ᵗP^∨ / (2πi)^n` with `I_h` diagonal.
pub fn period_matrix(
    a: &ConfigMatrix,
    t: &Triangulation,
    p: &ParameterVector,
    cocycles: &[Cocycle],
    dual_cocycles: &[Cocycle],
    z: &EvaluationPoint,
    order: usize,
) -> Result<DMatrix<Complex64>> {
    ensure_unimodular_convergent(t)?;
    p.check(a)?;
    for co in cocycles.iter().chain(dual_cocycles) {
        TwistVector::pair(co, co).check(a.k(), a.n())?;
    }
    let delta = p.delta();
    let r = t.simplices().len();
    let prim = period_rows(t, p, cocycles, false, z, order)?;
    let dual = period_rows(t, p, dual_cocycles, true, z, order)?;
    let pm = DMatrix::from_fn(cocycles.len(), r, |i, j| prim[i][j]);
    let pv = DMatrix::from_fn(dual_cocycles.len(), r, |i, j| dual[i][j]);
    let mut ih_inv = DMatrix::zeros(r, r);
    for (j, s) in t.simplices().iter().enumerate() {
        let h = homology_intersection(s, &delta)?;
        if h.norm() == 0.0 {
            return Err(IntersectionError::ZeroDenominator(format!("homology intersection of {:?}", s.labels())));
        }
        ih_inv[(j, j)] = Complex64::one() / h;
    }
    let scale = Complex64::new(0.0, 2.0 * PI).powi(a.n() as i32);
    Ok(pm * ih_inv * pv.transpose() / scale)
}

/// `⟨φ,ψ⟩_ch/(2πi)^n` assembled from transformation scalars, Γ-series and
/// homology intersection numbers; equals [`quadratic_lhs`].
pub fn raw_quadratic_lhs(
    a: &ConfigMatrix,
    t: &Triangulation,
    p: &ParameterVector,
    tw: &TwistVector,
    z: &EvaluationPoint,
    order: usize,
) -> Result<Complex64> {
    tw.check(a.k(), a.n())?;
    let phi = Cocycle { a: tw.a.clone(), b: tw.b.clone() };
    let psi = Cocycle { a: tw.ap.clone(), b: tw.bp.clone() };
    Ok(period_matrix(a, t, p, &[phi], &[psi], z, order)?[(0, 0)])
}

/// Maximum of `|L_ij − R_ij| / max(1, |R_ij|)`.
pub fn period_relation_matrix_check(
    a: &ConfigMatrix,
    t: &Triangulation,
    p: &ParameterVector,
    cocycles: &[Cocycle],
    dual_cocycles: &[Cocycle],
    z: &EvaluationPoint,
    order: usize,
    expected: &DMatrix<Complex64>,
) -> Result<f64> {
    let m = period_matrix(a, t, p, cocycles, dual_cocycles, z, order)?;
    if m.shape() != expected.shape() {
        return Err(IntersectionError::Length { what: "expected matrix", got: expected.len(), want: m.len() });
    }
    Ok(m.iter().zip(expected.iter()).map(|(l, r)| (l - r).norm() / r.norm().max(1.0)).fold(0.0, f64::max))
}

fn sorted_subset(s: &[usize], lo: usize, hi: usize, size: usize) -> Result<()> {
    let ok = s.len() == size && s.windows(2).all(|w| w[0] < w[1]) && s.iter().all(|&x| (lo..=hi).contains(&x));
    if ok {
        Ok(())
    } else {
        Err(IntersectionError::BadSubsets(format!("{s:?} is not a sorted {size}-subset of {lo}..={hi}")))
    }
}

/// `(−1)^{p+q}` where removing the `p`-th entry of `jp` and the `q`-th of `j`
/// leaves the same set; `None` if no such pair exists.
pub fn sgn_pair(j: &[usize], jp: &[usize]) -> Option<i32> {
    for p in 0..jp.len() {
        for q in 0..j.len() {
            let a: Vec<usize> = jp.iter().enumerate().filter(|&(i, _)| i != p).map(|(_, &x)| x).collect();
            let b: Vec<usize> = j.iter().enumerate().filter(|&(i, _)| i != q).map(|(_, &x)| x).collect();
            if a == b {
                return Some(if (p + q) % 2 == 0 { 1 } else { -1 });
            }
        }
    }
    None
}

fn product_of(ctilde: &[Complex64], idx: &[usize]) -> Result<Complex64> {
    let p: Complex64 = idx.iter().map(|&j| ctilde[j]).product();
    if p.norm() == 0.0 {
        return Err(IntersectionError::ZeroDenominator(format!("∏ c̃_j over {idx:?}")));
    }
    Ok(p)
}

/// Intersection numbers `⟨ω_J, ω_J′⟩_ch/(2πi)^k` of the logarithmic forms of a
/// hyperplane arrangement in general position; `J, J′` are `(k+1)`-subsets of
/// `0..=n` and `ctilde` holds `c̃_0, …, c̃_n`.
pub fn cohomology_intersection_ag(j: &[usize], jp: &[usize], ctilde: &[Complex64]) -> Result<Complex64> {
    let n = ctilde.len().checked_sub(1).ok_or_else(|| IntersectionError::BadSubsets("empty c̃".into()))?;
    let size = j.len();
    sorted_subset(j, 0, n, size)?;
    sorted_subset(jp, 0, n, size)?;
    if j == jp {
        return Ok(j.iter().map(|&x| ctilde[x]).sum::<Complex64>() / product_of(ctilde, j)?);
    }
    let common: Vec<usize> = j.iter().copied().filter(|x| jp.contains(x)).collect();
    if common.len() + 1 == size {
        let sgn = sgn_pair(jp, j).expect("sets differ by one element");
        return Ok(Complex64::new(sgn as f64, 0.0) / product_of(ctilde, &common)?);
    }
    Ok(Complex64::zero())
}

/// Confluent analogue: `J, J′` are `k`-subsets of `1..=n−1`, the value is
/// `1/∏_{j∈J} c̃_j` on the diagonal and `0` elsewhere.
pub fn cohomology_intersection_confluent(j: &[usize], jp: &[usize], ctilde: &[Complex64]) -> Result<Complex64> {
    let n = ctilde.len().checked_sub(1).ok_or_else(|| IntersectionError::BadSubsets("empty c̃".into()))?;
    let size = j.len();
    sorted_subset(j, 1, n.saturating_sub(1), size)?;
    sorted_subset(jp, 1, n.saturating_sub(1), size)?;
    if j == jp {
        Ok(Complex64::one() / product_of(ctilde, j)?)
    } else {
        Ok(Complex64::zero())
    }
}

/// `c̃ = (Σγ − Σc, c_1, …, c_k, −γ_{k+1}, …, −γ_n)` for an Aomoto–Gelfand
/// parameter with `δ = (γ_{k+1..n}; c_{1..k})`.
pub fn ag_ctilde(p: &ParameterVector) -> Vec<Complex64> {
    let c0 = p.gamma.iter().sum::<Complex64>() - p.c.iter().sum::<Complex64>();
    std::iter::once(c0).chain(p.c.iter().copied()).chain(p.gamma.iter().map(|g| -g)).collect()
}

/// The cocycle `ω_J` as `x^a h^{−b} dx/x`: `a_i = 1 − [i∈J]`, `b_j = −[j∈J]`.
pub fn ag_cocycle(j: &[usize], k: usize, n: usize) -> Cocycle {
    Cocycle {
        a: (1..=k).map(|i| if j.contains(&i) { 0 } else { 1 }).collect(),
        b: (k + 1..=n).map(|x| if j.contains(&x) { -1 } else { 0 }).collect(),
    }
}

/// `det z_J`: columns `e_j` for `j ≤ k` and `(z_{0j}, …, z_{kj})` otherwise.
pub fn ag_zdet(a: &ConfigMatrix, z: &[Complex64], j: &[usize], k: usize) -> Result<Complex64> {
    let cells = a.cells().ok_or_else(|| IntersectionError::BadSubsets("configuration has no cells".into()))?;
    let mut m = DMatrix::<Complex64>::zeros(k + 1, j.len());
    for (col, &jj) in j.iter().enumerate() {
        for i in 0..=k {
            m[(i, col)] = if jj <= k {
                Complex64::new(if i == jj { 1.0 } else { 0.0 }, 0.0)
            } else {
                let idx = cells
                    .iter()
                    .position(|&c| c == (i, jj))
                    .ok_or_else(|| IntersectionError::BadSubsets(format!("cell ({i},{jj}) missing")))?;
                z[idx]
            };
        }
    }
    if m.nrows() != m.ncols() {
        return Err(IntersectionError::BadSubsets(format!("{j:?} has the wrong size")));
    }
    Ok(m.determinant())
}

/// Simplices of the staircase triangulation in ladder order.
pub fn ladder_simplices(a: &ConfigMatrix, k: usize, n: usize) -> Result<Triangulation> {
    let mut s = Vec::new();
    for l in enumerate_ladders(k, n) {
        let cols = ladder_columns(a, &l).ok_or_else(|| TriangulationError::NotATriangulation("ladder misses the configuration".into()))?;
        s.push(Simplex::from_columns(a, &cols)?);
    }
    Ok(Triangulation::from_simplices(a, s)?)
}

/// An independent evaluation of a case identity through classical series.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExplicitCheck {
    #[serde(with = "jsonfmt::complex")]
    pub lhs: Complex64,
    #[serde(with = "jsonfmt::complex")]
    pub rhs: Complex64,
    pub residual: f64,
}

impl From<classical::Sides> for ExplicitCheck {
    fn from(s: classical::Sides) -> Self {
        Self { lhs: s.lhs, rhs: s.rhs, residual: s.residual() }
    }
}

/// Both sides of a verified relation.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RelationReport {
    pub case: String,
    #[serde(with = "jsonfmt::complex")]
    pub lhs: Complex64,
    #[serde(with = "jsonfmt::complex")]
    pub rhs: Complex64,
    pub residual: f64,
    pub order: usize,
    pub params: Vec<f64>,
    pub point: EvaluationPoint,
    #[serde(with = "jsonfmt::complex_vec")]
    pub summands: Vec<Complex64>,
    pub worst_tail: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub explicit: Option<ExplicitCheck>,
}

impl RelationReport {
    pub fn new(case: &str, lhs: Complex64, rhs: Complex64, order: usize, params: Vec<f64>, point: EvaluationPoint) -> Self {
        Self {
            case: case.to_string(),
            residual: (lhs - rhs).norm() / rhs.norm().max(1.0),
            lhs,
            rhs,
            order,
            params,
            point,
            summands: Vec::new(),
            worst_tail: 0.0,
            tolerance: 0.0,
            passed: false,
            explicit: None,
        }
    }

    /// Sets the tolerance and the pass flag from the residual.
    pub fn judge(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self.passed = self.residual < tolerance && self.summands.iter().all(|s| s.is_finite());
        self
    }
}

/// Names accepted by [`verify_case`].
pub const CASES: [&str; 8] = ["gauss", "kummer", "f1", "phi1", "e36", "e36c", "ag", "agc"];

/// Truncation order and residual tolerance used when a case spec leaves them out.
pub fn case_defaults(case: &str) -> (usize, f64) {
    match case {
        "gauss" | "kummer" => (60, 1e-10),
        "f1" | "phi1" => (40, 1e-9),
        _ => (24, 1e-8),
    }
}

fn default_scale() -> f64 {
    1.5
}

/// Input of [`verify_case`]; absent parameters and points are drawn from `seed`.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct CaseSpec {
    pub case: String,
    #[serde(default)]
    pub params: Option<Vec<f64>>,
    #[serde(default)]
    pub point: Option<Vec<f64>>,
    #[serde(default)]
    pub order: Option<usize>,
    #[serde(default)]
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_scale")]
    pub scale: f64,
    /// Arrangement size `(k, n)` for `ag` / `agc`.
    #[serde(default)]
    pub size: Option<(usize, usize)>,
    #[serde(default)]
    pub j: Option<Vec<usize>>,
    #[serde(default)]
    pub jp: Option<Vec<usize>>,
}

impl CaseSpec {
    pub fn named(case: &str) -> Self {
        Self { case: case.to_string(), scale: default_scale(), ..Self::default() }
    }

    pub fn order(&self) -> usize {
        self.order.unwrap_or(case_defaults(&self.case).0)
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance.unwrap_or(case_defaults(&self.case).1)
    }
}

/// Uniform draw in `(0.05, 0.95)` at distance ≥ 10^{-3} from every `p/q`, `q ≤ 12`.
pub fn generic_real(rng: &mut impl Rng) -> f64 {
    loop {
        let x: f64 = rng.gen_range(0.05..0.95);
        let close = (1..=12).any(|q| {
            let qf = q as f64;
            ((x * qf).round() / qf - x).abs() < 1e-3
        });
        if !close {
            return x;
        }
    }
}

fn take(spec: &Option<Vec<f64>>, rng: &mut impl Rng, len: usize, what: &'static str, draw: impl Fn(&mut dyn FnMut() -> f64) -> Vec<f64>) -> Result<Vec<f64>> {
    match spec {
        Some(v) if v.len() == len => Ok(v.clone()),
        Some(v) => Err(IntersectionError::Length { what, got: v.len(), want: len }),
        None => {
            let mut f = || generic_real(rng);
            Ok(draw(&mut f))
        }
    }
}

fn simplices(a: &ConfigMatrix, labels: &[&[usize]]) -> Result<Triangulation> {
    let s = labels.iter().map(|l| Simplex::new(a, l)).collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(Triangulation::from_simplices(a, s)?)
}

/// Point of the ζ-substitution that turns the E(3,6) ladder series into power series.
fn zeta_point(a: &ConfigMatrix, zeta: &[f64]) -> Result<EvaluationPoint> {
    let cells = a.cells().expect("cells");
    let value = |i: usize, j: usize| -> f64 {
        match (i, j) {
            (1, 4) => zeta[0],
            (1, 5) => zeta[0] * zeta[1],
            (2, 4) => zeta[0] * zeta[2],
            (2, 5) => zeta[0] * zeta[1] * zeta[2] * zeta[3],
            _ => 1.0,
        }
    };
    let z: Vec<f64> = cells.iter().map(|&(i, j)| value(i, j)).collect();
    Ok(EvaluationPoint::real(&z, format!("zeta substitution {zeta:?}"))?)
}

fn sampled_point(a: &ConfigMatrix, t: &Triangulation, spec: &CaseSpec) -> Result<EvaluationPoint> {
    let mut scale = spec.scale;
    for _ in 0..6 {
        match sample_point_in_ut(a, t, scale, spec.seed) {
            Ok(p) => return Ok(p),
            Err(SeriesError::ScaleTooSmall { .. }) => scale *= 2.0,
            Err(e) => return Err(e.into()),
        }
    }
    Ok(sample_point_in_ut(a, t, scale, spec.seed)?)
}

fn finish(
    case: &str,
    spec: &CaseSpec,
    params: Vec<f64>,
    point: EvaluationPoint,
    sum: QuadraticSum,
    normalization: Complex64,
    rhs: Complex64,
) -> RelationReport {
    let mut r = RelationReport::new(case, normalization * sum.value, rhs, spec.order(), params, point);
    r.summands = sum.summands;
    r.worst_tail = sum.worst_tail;
    r.judge(spec.tolerance())
}

fn with_explicit(mut r: RelationReport) -> RelationReport {
    if let Some(x) = &r.explicit {
        r.passed &= x.residual < r.tolerance;
    }
    r
}

/// Evaluates one of the named quadratic relations.
///
/// Each case maps its classical parameters onto a Cayley configuration, sums
/// the condensed relation, multiplies by a case normalization and compares
/// with the known closed form.
pub fn verify_case(spec: &CaseSpec) -> Result<RelationReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let m = spec.order();
    let one = Complex64::one();
    match spec.case.as_str() {
        "gauss" => {
            let pr = take(&spec.params, &mut rng, 3, "params", |f| vec![f(), f(), f()])?;
            let x = match &spec.point {
                Some(v) if v.len() == 1 => v[0],
                Some(v) => return Err(IntersectionError::Length { what: "point", got: v.len(), want: 1 }),
                None => 0.1 * f64::from(rng.gen_range(1..=5)),
            };
            let (al, be, ga) = (pr[0], pr[1], pr[2]);
            let a = registry::gauss();
            let t = simplices(&a, &[&[2, 3, 4], &[1, 2, 3]])?;
            let p = ParameterVector::real(&[al, 1.0 + be - ga], &[1.0 + al - ga]);
            let z = EvaluationPoint::real(&[x, 1.0, 1.0, 1.0], format!("x = {x}"))?;
            let sum = quadratic_lhs(&a, &t, &p, &TwistVector::zero(2, 1), &z, m)?;
            let k = Complex64::new((1.0 - ga) * (1.0 + al - ga) * be, 0.0);
            let rhs = one * ((1.0 - ga + al + be) * (1.0 - ga));
            let mut r = finish("gauss", spec, pr, z, sum, k, rhs);
            r.explicit = Some(classical::gauss_identity(al, be, ga, x, m.max(1)).into());
            Ok(with_explicit(r))
        }
        "kummer" => {
            let pr = take(&spec.params, &mut rng, 2, "params", |f| vec![f(), f()])?;
            let x = match &spec.point {
                Some(v) if v.len() == 1 => v[0],
                Some(v) => return Err(IntersectionError::Length { what: "point", got: v.len(), want: 1 }),
                None => 0.1 * f64::from(rng.gen_range(1..=5)),
            };
            let (al, ga) = (pr[0], pr[1]);
            let a = registry::kummer();
            let t = simplices(&a, &[&[1, 3], &[2, 3]])?;
            let p = ParameterVector::real(&[ga - 1.0 - al], &[-al]);
            let z = EvaluationPoint::real(&[x, 1.0, 1.0], format!("x = {x}"))?;
            let sum = quadratic_lhs(&a, &t, &p, &TwistVector::zero(1, 1), &z, m)?;
            let k = Complex64::new(-al * (ga - 1.0), 0.0);
            let mut r = finish("kummer", spec, pr, z, sum, k, one * (ga - 1.0));
            r.explicit = Some(classical::kummer_identity(al, ga, x, m.max(1)).into());
            Ok(with_explicit(r))
        }
        "f1" => {
            let pr = take(&spec.params, &mut rng, 4, "params", |f| vec![f(), f(), f(), f()])?;
            let pt = take(&spec.point, &mut rng, 2, "point", |f| vec![0.3 * f(), 0.3 * f()])?;
            let a = registry::f1();
            let t = simplices(&a, &[&[1, 2, 3, 4], &[2, 3, 4, 6], &[2, 4, 5, 6]])?;
            let p = ParameterVector::real(&pr[..3], &pr[3..]);
            let z = EvaluationPoint::real(&[pt[0], 1.0, 1.0, 1.0, pt[1], 1.0], format!("z1 = {}, z5 = {}", pt[0], pt[1]))?;
            let sum = quadratic_lhs(&a, &t, &p, &TwistVector::zero(3, 1), &z, m)?;
            let s = pr[0] + pr[1] + pr[2];
            let rhs = one * (s / (pr[3] * (s - pr[3])));
            let mut r = finish("f1", spec, pr.clone(), z, sum, one, rhs);
            r.explicit = Some(classical::appell_f1_identity([pr[0], pr[1], pr[2], pr[3]], pt[0], pt[1], m.max(1))?.into());
            Ok(with_explicit(r))
        }
        "phi1" => {
            let pr = take(&spec.params, &mut rng, 3, "params", |f| vec![f(), f(), f()])?;
            let pt = take(&spec.point, &mut rng, 2, "point", |f| vec![0.3 * f(), 0.3 * f()])?;
            let (g1, g2, c) = (pr[0], pr[1], pr[2]);
            let a = registry::phi1();
            let t = simplices(&a, &[&[1, 3, 5], &[2, 3, 4], &[3, 4, 5]])?;
            let p = ParameterVector::real(&[g1, g2], &[c]);
            let z = EvaluationPoint::real(&[pt[0], 1.0, 1.0, 1.0, pt[1]], format!("z = {}, w = {}", pt[0], pt[1]))?;
            let sum = quadratic_lhs(&a, &t, &p, &TwistVector::zero(2, 1), &z, m)?;
            let k = one * (c * (c - g1 - g2) * (g1 - c));
            let rhs = one * ((c - g1 - g2) * (g1 - c));
            let mut r = finish("phi1", spec, pr, z, sum, k, rhs);
            r.explicit = Some(classical::humbert_phi1_identity(g1, g2, c, pt[0], pt[1], m.max(1))?.into());
            Ok(with_explicit(r))
        }
        "e36" => {
            let pr = take(&spec.params, &mut rng, 5, "params", |f| (0..5).map(|_| f()).collect())?;
            let zeta = take(&spec.point, &mut rng, 4, "point", |_| vec![0.05; 4])?;
            let (c1, c2, c3, c4, c5) = (pr[0], pr[1], pr[2], pr[3], pr[4]);
            let c0 = c3 + c4 + c5 - c1 - c2;
            let a = registry::e36();
            let t = ladder_simplices(&a, 2, 5)?;
            let p = ParameterVector::real(&[c3, c4, c5], &[c1, c2]);
            let z = zeta_point(&a, &zeta)?;
            let sum = quadratic_lhs(&a, &t, &p, &TwistVector::zero(3, 2), &z, m)?;
            Ok(finish("e36", spec, pr, z, sum, one * (c0 * c1 * c2), one * (c3 + c4 + c5)))
        }
        "e36c" => {
            let pr = take(&spec.params, &mut rng, 4, "params", |f| (0..4).map(|_| f()).collect())?;
            let zeta = take(&spec.point, &mut rng, 4, "point", |_| vec![0.05; 4])?;
            let (c1, c2, c3, c4) = (pr[0], pr[1], pr[2], pr[3]);
            let a = registry::e36c();
            let t = ladder_simplices(&a, 2, 5)?;
            let p = ParameterVector::real(&[c3, c4], &[c1, c2]);
            let z = zeta_point(&a, &zeta)?;
            let sum = quadratic_lhs(&a, &t, &p, &TwistVector::zero(2, 2), &z, m)?;
            Ok(finish("e36c", spec, pr, z, sum, one * (c1 * c2), one))
        }
        "ag" | "agc" => {
            let confluent = spec.case == "agc";
            let (k, n) = spec.size.unwrap_or(if confluent { (1, 4) } else { (1, 3) });
            if k == 0 || k >= n || (confluent && k + 1 >= n) {
                return Err(IntersectionError::BadSubsets(format!("arrangement size ({k},{n})")));
            }
            let a = if confluent { confluent_config(k, n)? } else { aomoto_gelfand_config(k, n)? };
            let (ng, nc) = (a.k(), a.n());
            let pr = take(&spec.params, &mut rng, ng + nc, "params", |f| (0..ng + nc).map(|_| f()).collect())?;
            let p = ParameterVector::real(&pr[nc..], &pr[..nc]);
            let (t, _) = ladder_triangulation(&a, k, n, spec.seed)?;
            let z = match &spec.point {
                Some(v) => EvaluationPoint::real(v, "given point")?,
                None => sampled_point(&a, &t, spec)?,
            };
            let ct = ag_ctilde(&p);
            let default_j: Vec<usize> = if confluent { (1..=k).collect() } else { (0..=k).collect() };
            let j = spec.j.clone().unwrap_or_else(|| default_j.clone());
            let jp = spec.jp.clone().unwrap_or_else(|| j.clone());
            let (value, zj, zjp) = if confluent {
                let with0 = |s: &[usize]| std::iter::once(0).chain(s.iter().copied()).collect::<Vec<_>>();
                (
                    cohomology_intersection_confluent(&j, &jp, &ct)?,
                    ag_zdet(&a, &z.z, &with0(&j), k)?,
                    ag_zdet(&a, &z.z, &with0(&jp), k)?,
                )
            } else {
                (cohomology_intersection_ag(&j, &jp, &ct)?, ag_zdet(&a, &z.z, &j, k)?, ag_zdet(&a, &z.z, &jp, k)?)
            };
            let (cut_lo, cut_hi) = if confluent { (k + 1, n - 1) } else { (k + 1, n) };
            let cocycle = |s: &[usize]| {
                let mut c = ag_cocycle(s, k, cut_hi);
                c.b.truncate(cut_hi + 1 - cut_lo);
                c
            };
            let tw = TwistVector::pair(&cocycle(&j), &cocycle(&jp));
            let sum = quadratic_lhs(&a, &t, &p, &tw, &z, m)?;
            Ok(finish(&spec.case, spec, pr, z, sum, one, value / (zj * zjp)))
        }
        other => Err(IntersectionError::UnknownCase(other.to_string())),
    }
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn is_integer(q: &BigRational) -> bool {
    q.is_integer()
}

/// Coefficients of `Σ_i (a)_i(b)_i/((c)_i i!) x^i` (with `b = None` for `₁F₁`
/// and `sign = −1` for argument `−x`) through degree `n`.
fn rational_coefficients(
    a: &BigRational,
    b: Option<&BigRational>,
    c: &BigRational,
    sign: i64,
    n: usize,
) -> Result<Vec<BigRational>> {
    let mut out = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let ii = i as i64;
        let mut num = pochhammer_rational(a, ii)?;
        if let Some(b) = b {
            num *= pochhammer_rational(b, ii)?;
        }
        let den = pochhammer_rational(c, ii)? * pochhammer_rational(&rat(1), ii)?;
        if den.is_zero() {
            return Err(IntersectionError::DegenerateParameter(format!("lower parameter {c} hits a pole")));
        }
        let s = if sign < 0 && i % 2 == 1 { -rat(1) } else { rat(1) };
        out.push(num / den * s);
    }
    Ok(out)
}

fn cauchy(u: &[BigRational], v: &[BigRational], n: usize) -> BigRational {
    (0..=n).map(|i| &u[i] * &v[n - i]).fold(BigRational::zero(), |a, b| a + b)
}

/// Exact check of the degree-`n` coefficient of the Gauss (`params = [α,β,γ]`)
/// or Kummer (`params = [α,γ]`) bilinear identity.
pub fn exact_coefficient_identity(case: &str, n: usize, params: &[BigRational]) -> Result<bool> {
    let one = rat(1);
    let two = rat(2);
    match case {
        "gauss" => {
            let [al, be, ga] = params else {
                return Err(IntersectionError::Length { what: "params", got: params.len(), want: 3 });
            };
            if is_integer(ga) {
                return Err(IntersectionError::DegenerateParameter(format!("γ = {ga} is an integer")));
            }
            let f = |a: &BigRational, b: &BigRational, c: &BigRational| rational_coefficients(a, Some(b), c, 1, n);
            let p1 = f(al, be, ga)?;
            let p2 = f(&-al, &-be, &(&two - ga))?;
            let q1 = f(&(ga - al - &one), &(ga - be - &one), ga)?;
            let q2 = f(&(&one - ga + al), &(&one - ga + be), &(&two - ga))?;
            let lhs = (&one - ga + al) * (&one - ga + be) * cauchy(&p1, &p2, n) - al * be * cauchy(&q1, &q2, n);
            let rhs = if n == 0 { (&one - ga + al + be) * (&one - ga) } else { BigRational::zero() };
            Ok(lhs == rhs)
        }
        "kummer" => {
            let [al, ga] = params else {
                return Err(IntersectionError::Length { what: "params", got: params.len(), want: 2 });
            };
            if is_integer(ga) {
                return Err(IntersectionError::DegenerateParameter(format!("γ = {ga} is an integer")));
            }
            let m = |a: &BigRational, c: &BigRational, s: i64| rational_coefficients(a, None, c, s, n);
            let p1 = m(al, ga, 1)?;
            let p2 = m(&-al, &(&two - ga), -1)?;
            let q1 = m(&(&one + al - ga), &(&two - ga), 1)?;
            let q2 = m(&(ga - al - &one), ga, -1)?;
            let lhs = (ga - al - &one) * cauchy(&p1, &p2, n) + al * cauchy(&q1, &q2, n);
            let rhs = if n == 0 { ga - &one } else { BigRational::zero() };
            Ok(lhs == rhs)
        }
        other => Err(IntersectionError::UnknownCase(other.to_string())),
    }
}

/// Homology intersection expressed through sines: each factor
/// `1−e^{−2πix} = 2i e^{−πix} sin πx`.
pub fn homology_intersection_sine_form(sigma: &Simplex, delta: &[Complex64]) -> Result<Complex64> {
    if !sigma.is_unimodular() {
        return Err(IntersectionError::NotUnimodular(sigma.labels().to_vec()));
    }
    let i2 = Complex64::new(0.0, 2.0);
    let f = |x: Complex64| i2 * specfun::exp_pi_i(-x) * specfun::sin_pi(x);
    let u = sigma.apply_inverse(delta);
    let mut value = Complex64::one();
    for l in 1..=sigma.k() {
        let pos = sigma.block_positions(l);
        if pos.len() > 1 {
            value *= f(-delta[l - 1]);
            for &p in pos {
                value *= f(u[p]);
            }
        }
    }
    let s0 = sigma.block_positions(0);
    if !s0.is_empty() {
        let g0: Complex64 = s0.iter().map(|&p| u[p]).sum();
        value *= f(g0);
        if s0.len() > 1 {
            value *= f(-g0);
            for &p in s0 {
                value *= f(u[p]);
            }
        }
    }
    Ok(value)
}
