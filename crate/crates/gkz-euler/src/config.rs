//! Configuration matrices and parameter vectors.
//!
//! A [`ConfigMatrix`] is the `(n+k)×N` integer matrix whose top `k` rows are
//! indicator rows of the blocks `I_1…I_k` and whose bottom `n` rows carry the
//! exponent vectors of `h_0, h_1, …, h_k`. Columns in block 0 belong to the
//! exponential factor `e^{h_0}`.

use crate::intlinalg::{self, IntMatrix, LinalgError};
use crate::jsonfmt;
use crate::triangulation::Simplex;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default graded bound for the very-genericity scan.
pub const VERY_GENERIC_BOUND: usize = 50;
/// Distance to an integer treated as "integral" by the genericity scan.
pub const INTEGRALITY_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("the columns do not generate the full lattice (Smith divisors {0:?})")]
    LatticeNotFull(Vec<String>),
    #[error("bad dimensions: {0}")]
    BadDimensions(String),
    #[error("top {k} rows are not the block-indicator pattern")]
    NotIndicator { k: usize },
    #[error("parameter vector has lengths ({gamma}, {c}) but the configuration needs ({k}, {n})")]
    ParameterLength { gamma: usize, c: usize, k: usize, n: usize },
    #[error("unknown configuration name {0:?}")]
    UnknownName(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
}

/// Exponent blocks `A_0, …, A_k` of the Laurent polynomials. Each block is an
/// `n×N_l` row matrix; `N_0 = 0` is allowed (pure Euler integrals).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockConfig {
    pub k: usize,
    pub n: usize,
    pub blocks: Vec<Vec<Vec<i64>>>,
}

impl BlockConfig {
    pub fn new(n: usize, blocks: Vec<Vec<Vec<i64>>>) -> Result<Self, ConfigError> {
        let bc = Self { k: blocks.len().saturating_sub(1), n, blocks };
        bc.validate()?;
        Ok(bc)
    }

    /// Number of columns of block `l`.
    pub fn width(&self, l: usize) -> usize {
        self.blocks[l].first().map_or(0, Vec::len)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if self.blocks.len() != self.k + 1 {
            return Err(ConfigError::BadDimensions(format!(
                "expected {} blocks, got {}",
                self.k + 1,
                self.blocks.len()
            )));
        }
        for (l, b) in self.blocks.iter().enumerate() {
            let w = self.width(l);
            let empty = b.is_empty() || w == 0;
            if empty {
                if l > 0 {
                    return Err(ConfigError::BadDimensions(format!("block {l} is empty")));
                }
                continue;
            }
            if b.len() != self.n || b.iter().any(|r| r.len() != w) {
                return Err(ConfigError::BadDimensions(format!(
                    "block {l} must be an {}×N matrix",
                    self.n
                )));
            }
        }
        if self.n + self.k == 0 {
            return Err(ConfigError::BadDimensions("n + k must be positive".into()));
        }
        Ok(())
    }

    /// Advisory notes: blocks `l ≥ 1` with a single monomial are legal but
    /// reduce to a change of parameters.
    pub fn warnings(&self) -> Vec<String> {
        (1..=self.k)
            .filter(|&l| self.width(l) < 2)
            .map(|l| format!("block {l} has a single column; h_{l} is a monomial"))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigMatrix {
    k: usize,
    n: usize,
    matrix: IntMatrix,
    block_of: Vec<usize>,
    labels: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cells: Option<Vec<(usize, usize)>>,
}

impl ConfigMatrix {
    /// Assembles a configuration from an explicit matrix and a block label per
    /// column. Columns may appear in any order.
    pub fn from_parts(
        k: usize,
        n: usize,
        matrix: IntMatrix,
        block_of: Vec<usize>,
    ) -> Result<Self, ConfigError> {
        if matrix.rows() != n + k {
            return Err(ConfigError::BadDimensions(format!(
                "matrix has {} rows, expected n+k = {}",
                matrix.rows(),
                n + k
            )));
        }
        if block_of.len() != matrix.cols() || block_of.iter().any(|&l| l > k) {
            return Err(ConfigError::BadDimensions("block labels do not match columns".into()));
        }
        for r in 0..k {
            for (j, &l) in block_of.iter().enumerate() {
                let want = if l == r + 1 { BigInt::one() } else { BigInt::zero() };
                if *matrix.get(r, j) != want {
                    return Err(ConfigError::NotIndicator { k });
                }
            }
        }
        let labels = (1..=matrix.cols()).map(|j| j.to_string()).collect();
        let cm = Self { k, n, matrix, block_of, labels, cells: None };
        if !cm.check_full_lattice() {
            let d = intlinalg::smith_divisors(&cm.matrix);
            return Err(ConfigError::LatticeNotFull(d.iter().map(ToString::to_string).collect()));
        }
        Ok(cm)
    }

    pub fn with_cells(mut self, cells: Vec<(usize, usize)>) -> Self {
        assert_eq!(cells.len(), self.num_cols());
        self.labels = cells.iter().map(|(i, j)| format!("z{i}{j}")).collect();
        self.cells = Some(cells);
        self
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `d = n + k`.
    pub fn dim(&self) -> usize {
        self.n + self.k
    }

    pub fn num_cols(&self) -> usize {
        self.matrix.cols()
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.matrix
    }

    /// Block index (0 = exponential block) of each column.
    pub fn block_of(&self) -> &[usize] {
        &self.block_of
    }

    /// Column indices (0-based) of block `l`.
    pub fn block_columns(&self, l: usize) -> Vec<usize> {
        (0..self.num_cols()).filter(|&j| self.block_of[j] == l).collect()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn cells(&self) -> Option<&[(usize, usize)]> {
        self.cells.as_deref()
    }

    pub fn column(&self, j: usize) -> Vec<BigInt> {
        self.matrix.column(j)
    }

    /// True iff the Smith divisors are all 1, i.e. the columns span `Z^d`.
    pub fn check_full_lattice(&self) -> bool {
        check_full_lattice(&self.matrix)
    }

    /// Splits the matrix back into exponent blocks (drops indicator rows).
    pub fn to_block_config(&self) -> BlockConfig {
        let blocks = (0..=self.k)
            .map(|l| {
                let cols = self.block_columns(l);
                if cols.is_empty() {
                    return Vec::new();
                }
                (self.k..self.dim())
                    .map(|r| {
                        cols.iter()
                            .map(|&j| self.matrix.get(r, j).to_i64().expect("small entries"))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        BlockConfig { k: self.k, n: self.n, blocks }
    }
}

pub fn check_full_lattice(m: &IntMatrix) -> bool {
    intlinalg::rank(m) == m.rows() && intlinalg::smith_divisors(m).iter().all(One::is_one)
}

/// Builds the Cayley matrix: indicator rows over `I_1…I_k`, then `A_0|A_1|…|A_k`.
pub fn build_cayley(bc: &BlockConfig) -> Result<ConfigMatrix, ConfigError> {
    bc.validate()?;
    let (k, n) = (bc.k, bc.n);
    let mut cols: Vec<Vec<BigInt>> = Vec::new();
    let mut block_of = Vec::new();
    for l in 0..=k {
        for j in 0..bc.width(l) {
            let mut col = vec![BigInt::zero(); n + k];
            if l > 0 {
                col[l - 1] = BigInt::one();
            }
            for r in 0..n {
                col[k + r] = BigInt::from(bc.blocks[l][r][j]);
            }
            cols.push(col);
            block_of.push(l);
        }
    }
    if cols.is_empty() {
        return Err(ConfigError::BadDimensions("no columns".into()));
    }
    let m = IntMatrix::from_columns(&cols)?;
    ConfigMatrix::from_parts(k, n, m, block_of)
}

/// Reduced Aomoto–Gelfand configuration for `E(k+1, n+1)`.
///
/// Columns are the cells `(i,j) ∈ [0,k]×[k+1,n]` in row-major order; rows are
/// the indicators of `j = k+1…n` followed by the coordinates `i = 1…k`.
pub fn aomoto_gelfand_config(k: usize, n: usize) -> Result<ConfigMatrix, ConfigError> {
    if k < 1 || k >= n {
        return Err(ConfigError::BadDimensions(format!("need 1 ≤ k < n, got k={k}, n={n}")));
    }
    let cells: Vec<(usize, usize)> =
        (0..=k).flat_map(|i| (k + 1..=n).map(move |j| (i, j))).collect();
    cell_config(n - k, k, &cells, |_| false, k)
}

/// Confluent configuration: cells `(i,j)` with `j ≤ n−1` plus the exponential
/// columns `(i,n)`, `i = 1…k`, whose reduced vectors are `e(i)`.
pub fn confluent_config(k: usize, n: usize) -> Result<ConfigMatrix, ConfigError> {
    if k < 1 || k + 1 >= n {
        return Err(ConfigError::BadDimensions(format!("need 1 ≤ k < n−1, got k={k}, n={n}")));
    }
    let mut cells: Vec<(usize, usize)> =
        (0..=k).flat_map(|i| (k + 1..n).map(move |j| (i, j))).collect();
    cells.extend((1..=k).map(|i| (i, n)));
    cell_config(n - 1 - k, k, &cells, |(_, j)| j == n, k)
}

fn cell_config(
    blocks: usize,
    torus: usize,
    cells: &[(usize, usize)],
    exponential: impl Fn((usize, usize)) -> bool,
    k: usize,
) -> Result<ConfigMatrix, ConfigError> {
    let d = blocks + torus;
    let mut cols = Vec::with_capacity(cells.len());
    let mut block_of = Vec::with_capacity(cells.len());
    for &(i, j) in cells {
        let mut col = vec![BigInt::zero(); d];
        if exponential((i, j)) {
            block_of.push(0);
        } else {
            col[j - k - 1] = BigInt::one();
            block_of.push(j - k);
        }
        if i > 0 {
            col[blocks + i - 1] = BigInt::one();
        }
        cols.push(col);
    }
    let m = IntMatrix::from_columns(&cols)?;
    Ok(ConfigMatrix::from_parts(blocks, torus, m, block_of)?.with_cells(cells.to_vec()))
}

/// `δ = (γ_1…γ_k, c_1…c_n)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParameterVector {
    #[serde(with = "jsonfmt::complex_vec")]
    pub gamma: Vec<Complex64>,
    #[serde(with = "jsonfmt::complex_vec")]
    pub c: Vec<Complex64>,
}

impl ParameterVector {
    pub fn new(gamma: Vec<Complex64>, c: Vec<Complex64>) -> Self {
        Self { gamma, c }
    }

    pub fn real(gamma: &[f64], c: &[f64]) -> Self {
        let f = |v: &[f64]| v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self { gamma: f(gamma), c: f(c) }
    }

    pub fn delta(&self) -> Vec<Complex64> {
        self.gamma.iter().chain(&self.c).copied().collect()
    }

    pub fn from_delta(k: usize, delta: &[Complex64]) -> Self {
        Self { gamma: delta[..k].to_vec(), c: delta[k..].to_vec() }
    }

    pub fn check(&self, a: &ConfigMatrix) -> Result<(), ConfigError> {
        if self.gamma.len() != a.k() || self.c.len() != a.n() {
            return Err(ConfigError::ParameterLength {
                gamma: self.gamma.len(),
                c: self.c.len(),
                k: a.k(),
                n: a.n(),
            });
        }
        Ok(())
    }

    /// Parameter with each entry negated.
    pub fn negated(&self) -> Self {
        Self { gamma: self.gamma.iter().map(|g| -g).collect(), c: self.c.iter().map(|c| -c).collect() }
    }
}

/// JSON problem document: blocks plus optional parameters.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProblemDocument {
    pub k: usize,
    pub n: usize,
    pub blocks: Vec<Vec<Vec<i64>>>,
    #[serde(default, with = "jsonfmt::complex_opt_vec", skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Vec<Complex64>>,
    #[serde(default, with = "jsonfmt::complex_opt_vec", skip_serializing_if = "Option::is_none")]
    pub c: Option<Vec<Complex64>>,
}

impl ProblemDocument {
    pub fn from_json(s: &str) -> Result<Self, ConfigError> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn block_config(&self) -> Result<BlockConfig, ConfigError> {
        let bc = BlockConfig { k: self.k, n: self.n, blocks: self.blocks.clone() };
        bc.validate()?;
        Ok(bc)
    }

    pub fn parameters(&self) -> Option<ParameterVector> {
        match (&self.gamma, &self.c) {
            (Some(g), Some(c)) => Some(ParameterVector::new(g.clone(), c.clone())),
            (None, Some(c)) if self.k == 0 => Some(ParameterVector::new(Vec::new(), c.clone())),
            _ => None,
        }
    }
}

fn near_integer(z: Complex64) -> bool {
    z.im.abs() < INTEGRALITY_TOL && (z.re - z.re.round()).abs() < INTEGRALITY_TOL
}

/// Bounded very-genericity scan: no entry of `A_σ^{-1}(δ + A_σ̄ m)` is within
/// [`INTEGRALITY_TOL`] of an integer for `m ≥ 0`, `|m| ≤ bound`.
///
/// The condition quantifies over all `m`; the scan is a finite certificate only.
pub fn is_very_generic(delta: &ParameterVector, sigma: &Simplex, bound: usize) -> bool {
    let base = sigma.apply_inverse(&delta.delta());
    let b = sigma.b_matrix_f64();
    let t = b.first().map_or(0, Vec::len);
    if t == 0 {
        return !base.iter().any(|&x| near_integer(x));
    }
    // every m with |m| ≤ bound is a leaf of this walk
    fn rec(pos: usize, left: usize, acc: &[Complex64], b: &[Vec<f64>]) -> bool {
        if pos == b[0].len() {
            return !acc.iter().any(|&x| near_integer(x));
        }
        let mut cur = acc.to_vec();
        for step in 0..=left {
            if step > 0 {
                for (c, row) in cur.iter_mut().zip(b) {
                    *c += row[pos];
                }
            }
            if !rec(pos + 1, left - step, &cur, b) {
                return false;
            }
        }
        true
    }
    rec(0, bound, &base, &b)
}

/// Named configurations from the worked examples.
pub mod registry {
    use super::*;

    pub const NAMES: [&str; 9] = ["gauss", "kummer", "f1", "phi1", "g1", "gamma2", "h4", "e36", "e36c"];

    fn cayley(n: usize, blocks: Vec<Vec<Vec<i64>>>) -> ConfigMatrix {
        build_cayley(&BlockConfig::new(n, blocks).expect("registry blocks")).expect("registry config")
    }

    /// Gauss `₂F₁` as an Euler integral with two linear factors.
    pub fn gauss() -> ConfigMatrix {
        cayley(1, vec![vec![vec![]], vec![vec![0, 1]], vec![vec![0, 1]]])
    }

    /// Kummer `₁F₁`: one exponential column and one linear factor.
    pub fn kummer() -> ConfigMatrix {
        cayley(1, vec![vec![vec![1]], vec![vec![0, 1]]])
    }

    /// Appell `F_1`, columns in the order `z_1 … z_6` of the worked example.
    pub fn f1() -> ConfigMatrix {
        let m = IntMatrix::from_rows(&[
            vec![1, 0, 0, 1, 0, 0],
            vec![0, 1, 0, 0, 1, 0],
            vec![0, 0, 1, 0, 0, 1],
            vec![0, 0, 0, 1, 1, 1],
        ]);
        ConfigMatrix::from_parts(3, 1, m, vec![1, 2, 3, 1, 2, 3]).expect("f1 config")
    }

    /// Horn `Φ_1`: `e^{z_1 x}(z_2 + z_3 x)^{−γ_1}(z_4 + z_5 x)^{−γ_2}`.
    pub fn phi1() -> ConfigMatrix {
        cayley(1, vec![vec![vec![1]], vec![vec![0, 1]], vec![vec![0, 1]]])
    }

    /// Horn `G_1`: `(z_1 + z_2 x + z_3/x)^{−γ_1}(z_4 + z_5 x)^{−γ_2}`.
    pub fn g1() -> ConfigMatrix {
        cayley(1, vec![vec![vec![]], vec![vec![0, 1, -1]], vec![vec![0, 1]]])
    }

    /// Horn `Γ_2`: `e^{z_1 x + z_2/x}(z_3 + z_4 x)^{−γ}`.
    pub fn gamma2() -> ConfigMatrix {
        cayley(1, vec![vec![vec![1, -1]], vec![vec![0, 1]]])
    }

    /// Horn `H_4`: `e^{z_1 x + z_2 y}(z_3 + z_4 x + z_5 xy)^{−γ}`.
    pub fn h4() -> ConfigMatrix {
        cayley(2, vec![vec![vec![1, 0], vec![0, 1]], vec![vec![0, 1, 1], vec![0, 0, 1]]])
    }

    pub fn e36() -> ConfigMatrix {
        aomoto_gelfand_config(2, 5).expect("E(3,6)")
    }

    pub fn e36c() -> ConfigMatrix {
        confluent_config(2, 5).expect("confluent E(3,6)")
    }

    pub fn by_name(name: &str) -> Result<ConfigMatrix, ConfigError> {
        Ok(match name {
            "gauss" => gauss(),
            "kummer" => kummer(),
            "f1" => f1(),
            "phi1" => phi1(),
            "g1" => g1(),
            "gamma2" => gamma2(),
            "h4" => h4(),
            "e36" => e36(),
            "e36c" => e36c(),
            other => return Err(ConfigError::UnknownName(other.to_string())),
        })
    }
}
