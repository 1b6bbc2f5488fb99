//! Regular triangulations, their classification, and staircase (ladder)
//! triangulations of Aomoto–Gelfand configurations.
//!
//! A triangulation `T(ω)` consists of the `d`-subsets `σ` for which the unique
//! row vector `m` with `m·a(j) = ω_j` on `σ` satisfies `m·a(j) < ω_j` off `σ`.

use crate::config::ConfigMatrix;
use crate::intlinalg::{self, IntMatrix, LinalgError, RatMatrix};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, VecDeque};
use std::sync::OnceLock;
use std::ops::Add;
use thiserror::Error;

/// Number of random rays used to validate a triangulation.
pub const VALIDATION_RAYS: usize = 200;
/// Attempts made by [`sample_interior_lifting`].
pub const LIFTING_RETRIES: usize = 1000;
const RAY_SEED: u64 = 0x7261_7973;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TriangulationError {
    #[error("lifting has length {got}, expected {want}")]
    OmegaLength { got: usize, want: usize },
    #[error("lifting is not generic: column {column} lies on the face through {sigma:?}")]
    DegenerateLifting { sigma: Vec<usize>, column: usize },
    #[error("not a triangulation: {0}")]
    NotATriangulation(String),
    #[error("no admissible lifting found after {0} attempts")]
    ExhaustedRetries(usize),
    #[error("columns {0:?} do not form a simplex (singular)")]
    Singular(Vec<usize>),
    #[error("invalid column labels {0:?}")]
    BadLabels(Vec<usize>),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// A `d`-subset of columns with its exact inverse and block decomposition.
#[derive(Clone, Debug)]
pub struct Simplex {
    labels: Vec<usize>,
    complement: Vec<usize>,
    det: BigInt,
    inv: RatMatrix,
    b: Vec<Vec<BigRational>>,
    blocks: Vec<Vec<usize>>,
    complement_blocks: Vec<usize>,
    // |det|·A_σ^{-1} and |det|·A_σ^{-1}A_σ̄ as machine integers, for the hot
    // exact comparisons
    abs_det: i128,
    scaled_inv: Vec<Vec<i128>>,
    scaled_b: Vec<Vec<i128>>,
}

fn scale_exact(rows: &[Vec<BigRational>], abs_det: &BigInt) -> Result<Vec<Vec<i128>>, TriangulationError> {
    rows.iter()
        .map(|r| {
            r.iter()
                .map(|x| {
                    let y = x * BigRational::from_integer(abs_det.clone());
                    debug_assert!(y.is_integer());
                    y.to_integer()
                        .to_i128()
                        .ok_or_else(|| TriangulationError::NotATriangulation("entries too large".into()))
                })
                .collect()
        })
        .collect()
}

impl PartialEq for Simplex {
    fn eq(&self, other: &Self) -> bool {
        self.labels == other.labels
    }
}

impl Eq for Simplex {}

impl Simplex {
    /// Builds a simplex from 1-based column labels (any order).
    pub fn new(a: &ConfigMatrix, labels: &[usize]) -> Result<Self, TriangulationError> {
        let mut labels = labels.to_vec();
        labels.sort_unstable();
        labels.dedup();
        if labels.len() != a.dim() || labels.iter().any(|&l| l == 0 || l > a.num_cols()) {
            return Err(TriangulationError::BadLabels(labels));
        }
        let cols: Vec<usize> = labels.iter().map(|l| l - 1).collect();
        Self::from_columns(a, &cols)
    }

    /// Builds a simplex from 0-based column indices.
    pub fn from_columns(a: &ConfigMatrix, cols: &[usize]) -> Result<Self, TriangulationError> {
        let mut cols = cols.to_vec();
        cols.sort_unstable();
        let sub = a.matrix().select_columns(&cols)?;
        let (inv, det) = match intlinalg::rat_inverse(&sub) {
            Ok(x) => x,
            Err(LinalgError::SingularMatrix) => {
                return Err(TriangulationError::Singular(cols.iter().map(|c| c + 1).collect()))
            }
            Err(e) => return Err(e.into()),
        };
        let complement: Vec<usize> = (0..a.num_cols()).filter(|j| !cols.contains(j)).collect();
        let b: Vec<Vec<BigRational>> = if complement.is_empty() {
            vec![Vec::new(); a.dim()]
        } else {
            let rest = a.matrix().select_columns(&complement)?;
            let prod = inv.mul_int(&rest)?;
            (0..prod.rows()).map(|r| prod.row(r)).collect()
        };
        let mut blocks = vec![Vec::new(); a.k() + 1];
        for (pos, &c) in cols.iter().enumerate() {
            blocks[a.block_of()[c]].push(pos);
        }
        if blocks.iter().skip(1).any(Vec::is_empty) {
            // impossible for a nonsingular σ: an indicator row would vanish
            return Err(TriangulationError::Singular(cols.iter().map(|c| c + 1).collect()));
        }
        let complement_blocks = complement.iter().map(|&c| a.block_of()[c]).collect();
        let ad = det.abs();
        let inv_rows: Vec<Vec<BigRational>> = (0..inv.rows()).map(|r| inv.row(r)).collect();
        let scaled_inv = scale_exact(&inv_rows, &ad)?;
        let scaled_b = scale_exact(&b, &ad)?;
        let abs_det = ad.to_i128().ok_or_else(|| TriangulationError::NotATriangulation("det too large".into()))?;
        Ok(Self {
            abs_det,
            scaled_inv,
            scaled_b,
            labels: cols.iter().map(|c| c + 1).collect(),
            complement,
            det,
            inv,
            b,
            blocks,
            complement_blocks,
        })
    }

    /// Sorted 1-based column labels.
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Sorted 0-based column indices.
    pub fn columns(&self) -> Vec<usize> {
        self.labels.iter().map(|l| l - 1).collect()
    }

    /// 0-based indices of the columns outside σ.
    pub fn complement(&self) -> &[usize] {
        &self.complement
    }

    pub fn det(&self) -> &BigInt {
        &self.det
    }

    pub fn is_unimodular(&self) -> bool {
        self.det.abs().is_one()
    }

    /// `|det A_σ|` as a machine integer.
    pub fn index(&self) -> usize {
        self.det.abs().to_usize().expect("index fits in usize")
    }

    pub fn inverse(&self) -> &RatMatrix {
        &self.inv
    }

    /// `A_σ^{-1} A_σ̄` (rows indexed by σ, columns by σ̄).
    pub fn b_matrix(&self) -> &[Vec<BigRational>] {
        &self.b
    }

    pub fn b_matrix_f64(&self) -> Vec<Vec<f64>> {
        self.b.iter().map(|r| r.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect()).collect()
    }

    pub fn inverse_f64(&self) -> Vec<Vec<f64>> {
        self.inv.to_f64_rows()
    }

    /// `A_σ^{-1} v` for a complex vector `v`.
    pub fn apply_inverse(&self, v: &[Complex64]) -> Vec<Complex64> {
        self.inverse_f64()
            .iter()
            .map(|row| row.iter().zip(v).map(|(&a, &x)| a * x).sum())
            .collect()
    }

    /// Positions (within σ) of the columns in block `l`.
    pub fn block_positions(&self, l: usize) -> &[usize] {
        &self.blocks[l]
    }

    /// Block decomposition `σ^(0), …, σ^(k)` as 1-based labels.
    pub fn block_labels(&self) -> Vec<Vec<usize>> {
        self.blocks.iter().map(|b| b.iter().map(|&p| self.labels[p]).collect()).collect()
    }

    /// Block index of each complement column, aligned with [`Self::complement`].
    pub fn complement_blocks(&self) -> &[usize] {
        &self.complement_blocks
    }

    pub fn k(&self) -> usize {
        self.blocks.len() - 1
    }

    /// Signed sum of entries of `A_σ^{-1} a(j)` for each complement column.
    pub fn complement_entry_sums(&self) -> Vec<BigRational> {
        (0..self.complement.len())
            .map(|t| self.b.iter().map(|row| &row[t]).fold(BigRational::zero(), |a, b| a + b))
            .collect()
    }

    /// True iff `A_σ^{-1} A_σ̄ m` is integral, i.e. `A_σ̄ m ∈ Z·A_σ`.
    pub fn in_column_lattice(&self, m: &[i64]) -> bool {
        if self.abs_det == 1 {
            return true;
        }
        self.scaled_b.iter().all(|row| {
            let s: i128 = row.iter().zip(m).map(|(&b, &x)| b * i128::from(x)).sum();
            s % self.abs_det == 0
        })
    }

    /// True iff the rational vector `A_σ^{-1} v` is integral.
    pub fn contains_lattice_point(&self, v: &[BigInt]) -> bool {
        self.inv.mul_int_vec(v).iter().all(|x| x.is_integer())
    }
}

/// `σ^(0), …, σ^(k)` for 1-based labels.
pub fn block_decompose(sigma: &[usize], a: &ConfigMatrix) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new(); a.k() + 1];
    let mut s = sigma.to_vec();
    s.sort_unstable();
    for l in s {
        out[a.block_of()[l - 1]].push(l);
    }
    out
}

#[derive(Clone, Debug)]
pub struct Triangulation {
    simplices: Vec<Simplex>,
    omega: Vec<i64>,
    convergent: bool,
    unimodular: bool,
}

#[derive(Serialize, Deserialize)]
struct TriangulationJson {
    omega: Vec<i64>,
    simplices: Vec<Vec<usize>>,
    convergent: bool,
    unimodular: bool,
}

impl Triangulation {
    fn assemble(mut simplices: Vec<Simplex>, omega: Vec<i64>) -> Self {
        simplices.sort_by(|a, b| a.labels.cmp(&b.labels));
        let convergent = convergent_simplices(&simplices);
        let unimodular = simplices.iter().all(Simplex::is_unimodular);
        Self { simplices, omega, convergent, unimodular }
    }

    /// A triangulation given by its simplices, validated but without a lifting.
    pub fn from_simplices(a: &ConfigMatrix, simplices: Vec<Simplex>) -> Result<Self, TriangulationError> {
        let t = Self::assemble(simplices, Vec::new());
        validate(a, &t)?;
        Ok(t)
    }

    pub fn simplices(&self) -> &[Simplex] {
        &self.simplices
    }

    pub fn omega(&self) -> &[i64] {
        &self.omega
    }

    pub fn convergent(&self) -> bool {
        self.convergent
    }

    pub fn unimodular(&self) -> bool {
        self.unimodular
    }

    /// Simplex labels as a canonical set (for comparisons).
    pub fn label_set(&self) -> BTreeSet<Vec<usize>> {
        self.simplices.iter().map(|s| s.labels.clone()).collect()
    }

    /// Labels joined per simplex, e.g. `["235", "345"]` (single-digit labels only
    /// render unambiguously).
    pub fn label_strings(&self) -> Vec<String> {
        self.simplices
            .iter()
            .map(|s| s.labels.iter().map(ToString::to_string).collect::<Vec<_>>().join(""))
            .collect()
    }

    pub fn volume(&self) -> BigInt {
        self.simplices.iter().map(|s| s.det.abs()).sum()
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(TriangulationJson {
            omega: self.omega.clone(),
            simplices: self.simplices.iter().map(|s| s.labels.clone()).collect(),
            convergent: self.convergent,
            unimodular: self.unimodular,
        })
        .expect("serializable")
    }

    pub fn from_json(a: &ConfigMatrix, s: &str) -> Result<Self, TriangulationError> {
        let j: TriangulationJson = serde_json::from_str(s)
            .map_err(|e| TriangulationError::NotATriangulation(format!("bad JSON: {e}")))?;
        let simplices =
            j.simplices.iter().map(|l| Simplex::new(a, l)).collect::<Result<Vec<_>, _>>()?;
        let mut t = Self::from_simplices(a, simplices)?;
        t.omega = j.omega;
        Ok(t)
    }
}

fn convergent_simplices(simplices: &[Simplex]) -> bool {
    let one = BigRational::one();
    simplices.iter().all(|s| s.complement_entry_sums().iter().all(|x| *x <= one))
}

/// True iff `|A_σ^{-1} a(j)| ≤ 1` (signed entry sum) for all `σ ∈ T`, `j ∉ σ`.
pub fn is_convergent(t: &Triangulation) -> bool {
    t.convergent
}

pub fn is_unimodular(t: &Triangulation) -> bool {
    t.unimodular
}

/// All `r`-subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, r: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if r > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..r).collect();
    loop {
        out.push(idx.clone());
        let Some(p) = (0..r).rev().find(|&p| idx[p] != p + n - r) else { break };
        idx[p] += 1;
        for q in p + 1..r {
            idx[q] = idx[q - 1] + 1;
        }
    }
    out
}

/// All nonsingular `d`-subsets of a configuration, built once and shared by
/// every lifting test.
#[derive(Clone, Debug)]
pub struct Candidates {
    simplices: Vec<Simplex>,
    volume: OnceLock<Result<BigInt, TriangulationError>>,
}

impl Candidates {
    pub fn new(a: &ConfigMatrix) -> Result<Self, TriangulationError> {
        let built: Vec<Option<Result<Simplex, TriangulationError>>> = combinations(a.num_cols(), a.dim())
            .par_iter()
            .map(|cols| match Simplex::from_columns(a, cols) {
                Err(TriangulationError::Singular(_)) => None,
                other => Some(other),
            })
            .collect();
        let simplices = built.into_iter().flatten().collect::<Result<Vec<_>, _>>()?;
        Ok(Self { simplices, volume: OnceLock::new() })
    }

    pub fn simplices(&self) -> &[Simplex] {
        &self.simplices
    }

    /// Normalized volume of `conv({0} ∪ A)`, computed on first use.
    pub fn volume(&self, a: &ConfigMatrix) -> Result<BigInt, TriangulationError> {
        self.volume.get_or_init(|| normalized_volume(a)).clone()
    }

    fn validate(&self, a: &ConfigMatrix, t: &Triangulation) -> Result<(), TriangulationError> {
        ray_check(a, &t.simplices, RAY_SEED)?;
        if t.convergent {
            let vol = self.volume(a)?;
            if t.volume() != vol {
                return Err(TriangulationError::NotATriangulation(format!(
                    "volume sum {} differs from normalized volume {vol}",
                    t.volume()
                )));
            }
        }
        Ok(())
    }

    /// Cells of `T(ω)` without validation.
    pub fn cells(&self, omega: &[i64]) -> Result<Vec<Simplex>, TriangulationError> {
        let mut cells = Vec::new();
        for s in &self.simplices {
            // m·a(j)·|det| = Σ_p ω_{σ_p} (|det| B)_{p,t}, compared with |det|·ω_j
            let cols = s.columns();
            let mut tie = None;
            let mut is_cell = true;
            for (t, &j) in s.complement.iter().enumerate() {
                let lhs: i128 =
                    cols.iter().enumerate().map(|(p, &c)| i128::from(omega[c]) * s.scaled_b[p][t]).sum();
                let rhs = s.abs_det * i128::from(omega[j]);
                match lhs.cmp(&rhs) {
                    std::cmp::Ordering::Less => {}
                    std::cmp::Ordering::Equal => {
                        tie.get_or_insert(j);
                    }
                    std::cmp::Ordering::Greater => {
                        is_cell = false;
                        break;
                    }
                }
            }
            if !is_cell {
                continue;
            }
            if let Some(j) = tie {
                return Err(TriangulationError::DegenerateLifting { sigma: s.labels.clone(), column: j + 1 });
            }
            cells.push(s.clone());
        }
        Ok(cells)
    }

    /// `T(ω)` with full validation.
    pub fn triangulate(&self, a: &ConfigMatrix, omega: &[i64]) -> Result<Triangulation, TriangulationError> {
        if omega.len() != a.num_cols() {
            return Err(TriangulationError::OmegaLength { got: omega.len(), want: a.num_cols() });
        }
        let t = Triangulation::assemble(self.cells(omega)?, omega.to_vec());
        self.validate(a, &t)?;
        Ok(t)
    }
}

/// `T(ω)`, validated by random-ray coverage and (for convergent results) volume.
pub fn triangulate(a: &ConfigMatrix, omega: &[i64]) -> Result<Triangulation, TriangulationError> {
    if omega.len() != a.num_cols() {
        return Err(TriangulationError::OmegaLength { got: omega.len(), want: a.num_cols() });
    }
    Candidates::new(a)?.triangulate(a, omega)
}

/// Every generic ray of `cone(A)` must lie in exactly one `cone(σ)`.
fn ray_check(a: &ConfigMatrix, simplices: &[Simplex], seed: u64) -> Result<(), TriangulationError> {
    if simplices.is_empty() {
        return Err(TriangulationError::NotATriangulation("no cells".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cols: Vec<Vec<i128>> = (0..a.num_cols())
        .map(|j| a.column(j).iter().map(|x| x.to_i128().expect("small entries")).collect())
        .collect();
    let mut accepted = 0;
    let mut attempts = 0;
    while accepted < VALIDATION_RAYS {
        attempts += 1;
        if attempts > 20 * VALIDATION_RAYS {
            return Err(TriangulationError::NotATriangulation("could not draw generic rays".into()));
        }
        let mut ray = vec![0i128; a.dim()];
        for col in &cols {
            let w = i128::from(rng.gen_range(1..=1_000_000i64));
            for (r, x) in ray.iter_mut().zip(col) {
                *r += w * x;
            }
        }
        let mut hits = 0;
        let mut boundary = false;
        for s in simplices {
            let coords: Vec<i128> =
                s.scaled_inv.iter().map(|row| row.iter().zip(&ray).map(|(a, b)| a * b).sum()).collect();
            if coords.contains(&0) {
                boundary = true;
                break;
            }
            if coords.iter().all(|&x| x > 0) {
                hits += 1;
            }
        }
        if boundary {
            continue;
        }
        if hits != 1 {
            return Err(TriangulationError::NotATriangulation(format!(
                "a generic ray lies in {hits} cells"
            )));
        }
        accepted += 1;
    }
    Ok(())
}

fn validate(a: &ConfigMatrix, t: &Triangulation) -> Result<(), TriangulationError> {
    Candidates { simplices: Vec::new(), volume: OnceLock::new() }.validate(a, t)
}

/// Normalized volume of `conv({0} ∪ A)`, computed from a triangulation of the
/// homogenized point set `{(1,0)} ∪ {(1,a(j))}` under a fixed pseudo-random
/// lifting.
pub fn normalized_volume(a: &ConfigMatrix) -> Result<BigInt, TriangulationError> {
    let d = a.dim();
    let mut cols = vec![{
        let mut v = vec![BigInt::zero(); d + 1];
        v[0] = BigInt::one();
        v
    }];
    for j in 0..a.num_cols() {
        let mut v = vec![BigInt::one()];
        v.extend(a.column(j));
        cols.push(v);
    }
    let m = IntMatrix::from_columns(&cols)?;
    let block_of = vec![1; cols.len()];
    // a single block of width N+1 with indicator row 0
    let h = ConfigMatrix::from_parts(1, d, m, block_of)
        .map_err(|e| TriangulationError::NotATriangulation(format!("volume oracle: {e}")))?;
    let cands = Candidates::new(&h)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x766f_6c75);
    for _ in 0..LIFTING_RETRIES {
        let w: Vec<i64> = (0..h.num_cols()).map(|_| rng.gen_range(0..=1_000)).collect();
        let Ok(cells) = cands.cells(&w) else { continue };
        if ray_check(&h, &cells, 0x6f72_6163).is_ok() {
            return Ok(cells.iter().map(|s| s.det.abs()).sum());
        }
    }
    Err(TriangulationError::ExhaustedRetries(LIFTING_RETRIES))
}

/// Linear forms `L` with `L·ω > 0` exactly when every cell of `t` is a cell of `T(ω)`.
fn cone_inequalities(a: &ConfigMatrix, t: &Triangulation) -> Vec<Vec<f64>> {
    let mut rows = Vec::new();
    for s in &t.simplices {
        let cols = s.columns();
        for (tt, &j) in s.complement.iter().enumerate() {
            let mut l = vec![0.0; a.num_cols()];
            l[j] = 1.0;
            for (p, &c) in cols.iter().enumerate() {
                l[c] -= s.b[p][tt].to_f64().unwrap_or(0.0);
            }
            rows.push(l);
        }
    }
    rows
}

/// Random integer lifting `ω` whose triangulation is valid and non-degenerate;
/// with a target, `T(ω)` must equal the target.
pub fn sample_interior_lifting(
    a: &ConfigMatrix,
    target: Option<&Triangulation>,
    rng: &mut impl Rng,
) -> Result<Vec<i64>, TriangulationError> {
    let n = a.num_cols();
    let cands = Candidates::new(a)?;
    let ineq = target.map(|t| cone_inequalities(a, t));
    for _ in 0..LIFTING_RETRIES {
        let mut w: Vec<f64> = (0..n).map(|_| rng.gen_range(-20.0..20.0)).collect();
        if let Some(rows) = &ineq {
            // perceptron towards margins ≥ 1
            let mut done = false;
            for _ in 0..20_000 {
                let mut worst: Option<(usize, f64)> = None;
                for (r, l) in rows.iter().enumerate() {
                    let v: f64 = l.iter().zip(&w).map(|(x, y)| x * y).sum();
                    if v < 1.0 && worst.is_none_or(|(_, m)| v < m) {
                        worst = Some((r, v));
                    }
                }
                let Some((r, _)) = worst else {
                    done = true;
                    break;
                };
                let norm: f64 = rows[r].iter().map(|x| x * x).sum::<f64>().max(1e-12);
                for (wi, li) in w.iter_mut().zip(&rows[r]) {
                    *wi += li * 1.5 / norm;
                }
            }
            if !done {
                continue;
            }
            for x in &mut w {
                *x *= 4.0;
            }
        }
        let omega: Vec<i64> = w.iter().map(|x| x.round() as i64).collect();
        match cands.triangulate(a, &omega) {
            Ok(found) => {
                if target.is_none_or(|t| t.label_set() == found.label_set()) {
                    return Ok(omega);
                }
            }
            Err(_) => continue,
        }
    }
    Err(TriangulationError::ExhaustedRetries(LIFTING_RETRIES))
}

/// Regular triangulations found by sampling `samples` random liftings.
///
/// Sampling is not exhaustive: thin chambers of the secondary fan may be missed.
/// Results are ordered by first discovery and are independent of thread count.
pub fn enumerate_regular_triangulations(
    a: &ConfigMatrix,
    samples: usize,
    seed: u64,
) -> Vec<Triangulation> {
    let Ok(cands) = Candidates::new(a) else { return Vec::new() };
    let raw: Vec<Option<(Vec<i64>, Vec<Simplex>)>> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let omega: Vec<i64> = (0..a.num_cols()).map(|_| rng.gen_range(-60..=60)).collect();
            cands.cells(&omega).ok().filter(|c| !c.is_empty()).map(|c| (omega, c))
        })
        .collect();
    // first occurrence of each cell set, then validate the distinct ones
    let mut seen = BTreeSet::new();
    let mut distinct = Vec::new();
    for (omega, cells) in raw.into_iter().flatten() {
        let key: Vec<Vec<usize>> = cells.iter().map(|s| s.labels.clone()).collect();
        if seen.insert(key) {
            distinct.push((omega, cells));
        }
    }
    let checked: Vec<Option<Triangulation>> = distinct
        .into_par_iter()
        .map(|(omega, cells)| {
            let t = Triangulation::assemble(cells, omega);
            cands.validate(a, &t).ok().map(|()| t)
        })
        .collect();
    checked.into_iter().flatten().collect()
}

/// A monotone staircase path from `(k, k+1)` to `(0, n)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Ladder {
    pub cells: Vec<(usize, usize)>,
}

impl Ladder {
    pub fn is_valid(&self, k: usize, n: usize) -> bool {
        let c = &self.cells;
        c.len() == n
            && c.first() == Some(&(k, k + 1))
            && c.last() == Some(&(0, n))
            && c.windows(2).all(|w| {
                let ((i0, j0), (i1, j1)) = (w[0], w[1]);
                (i1 == i0 && j1 == j0 + 1) || (i1 + 1 == i0 && j1 == j0)
            })
    }
}

/// All ladders, ordered by preferring a step in `j` over a step in `i`.
pub fn enumerate_ladders(k: usize, n: usize) -> Vec<Ladder> {
    fn rec(i: usize, j: usize, n: usize, path: &mut Vec<(usize, usize)>, out: &mut Vec<Ladder>) {
        if (i, j) == (0, n) {
            out.push(Ladder { cells: path.clone() });
            return;
        }
        if j < n {
            path.push((i, j + 1));
            rec(i, j + 1, n, path, out);
            path.pop();
        }
        if i > 0 {
            path.push((i - 1, j));
            rec(i - 1, j, n, path, out);
            path.pop();
        }
    }
    let mut out = Vec::new();
    if k < n {
        rec(k, k + 1, n, &mut vec![(k, k + 1)], &mut out);
    }
    out
}

/// Exponents `v_{ij} = Σ c̃_l` over the vertices of the component containing
/// `j` once the edge `(i,j)` is removed from the ladder tree.
///
/// In the confluent case vertex `n` carries no weight and the cell `(0,n)` is
/// dropped from the output. The result follows the ladder order.
pub fn ladder_exponents<T>(ladder: &Ladder, ctilde: &[T], confluent: bool) -> Vec<((usize, usize), T)>
where
    T: Clone + Zero + Add<Output = T>,
{
    let n = ladder.cells.last().map_or(0, |c| c.1);
    let mut adj = vec![Vec::new(); n + 1];
    for (e, &(i, j)) in ladder.cells.iter().enumerate() {
        adj[i].push((j, e));
        adj[j].push((i, e));
    }
    let weight = |l: usize| -> T {
        if confluent && l == n {
            T::zero()
        } else {
            ctilde[l].clone()
        }
    };
    let mut out = Vec::new();
    for (e, &(i, j)) in ladder.cells.iter().enumerate() {
        if confluent && (i, j) == (0, n) {
            continue;
        }
        let mut seen = vec![false; n + 1];
        seen[j] = true;
        let mut queue = VecDeque::from([j]);
        let mut sum = T::zero();
        while let Some(v) = queue.pop_front() {
            sum = sum + weight(v);
            for &(w, f) in &adj[v] {
                if f != e && !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        out.push(((i, j), sum));
    }
    out
}

/// Column indices (0-based) of a ladder's simplex in a cell-labelled
/// configuration; cells absent from the configuration (e.g. `(0,n)` in the
/// confluent case) are skipped.
pub fn ladder_columns(a: &ConfigMatrix, ladder: &Ladder) -> Option<Vec<usize>> {
    let cells = a.cells()?;
    let mut cols: Vec<usize> = ladder
        .cells
        .iter()
        .filter_map(|c| cells.iter().position(|x| x == c))
        .collect();
    cols.sort_unstable();
    (cols.len() == a.dim()).then_some(cols)
}

/// The staircase triangulation of an (optionally confluent) Aomoto–Gelfand
/// configuration, returned with a lifting that realises it and the simplices
/// listed in ladder order.
pub fn ladder_triangulation(
    a: &ConfigMatrix,
    k: usize,
    n: usize,
    seed: u64,
) -> Result<(Triangulation, Vec<Simplex>), TriangulationError> {
    let mut ordered = Vec::new();
    for l in enumerate_ladders(k, n) {
        let cols = ladder_columns(a, &l)
            .ok_or_else(|| TriangulationError::NotATriangulation("ladder misses the configuration".into()))?;
        ordered.push(Simplex::from_columns(a, &cols)?);
    }
    let candidate = Triangulation::from_simplices(a, ordered.clone())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let omega = sample_interior_lifting(a, Some(&candidate), &mut rng)?;
    let t = triangulate(a, &omega)?;
    Ok((t, ordered))
}
