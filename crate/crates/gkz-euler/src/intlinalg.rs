//! Exact integer and rational linear algebra.
//!
//! Everything here is arbitrary precision. Matrices are small (tens of rows at
//! most) so the algorithms favour clarity: Euclidean row reduction for the
//! Hermite form, alternating row/column reduction for the Smith form, and
//! fraction-free Bareiss elimination for determinants.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("matrix must have at least one row and one column (got {rows}x{cols})")]
    EmptyMatrix { rows: usize, cols: usize },
    #[error("entry count {got} does not match {rows}x{cols}")]
    ShapeMismatch { rows: usize, cols: usize, got: usize },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("coset enumeration did not close after degree {0}")]
    CosetSearchExhausted(usize),
}

/// Dense integer matrix, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

/// Dense rational matrix, row-major, entries in lowest terms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigRational>,
}

impl IntMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<BigInt>) -> Result<Self, LinalgError> {
        if rows == 0 || cols == 0 {
            return Err(LinalgError::EmptyMatrix { rows, cols });
        }
        if data.len() != rows * cols {
            return Err(LinalgError::ShapeMismatch { rows, cols, got: data.len() });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from machine-integer rows. Panics on ragged or empty input;
    /// intended for literals.
    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        Self::try_from_rows(rows).expect("well-formed literal matrix")
    }

    pub fn try_from_rows(rows: &[Vec<i64>]) -> Result<Self, LinalgError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(LinalgError::Dimension("ragged rows".into()));
        }
        let data = rows.iter().flatten().map(|&x| BigInt::from(x)).collect();
        Self::new(r, c, data)
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[Vec<BigInt>]) -> Result<Self, LinalgError> {
        let c = cols.len();
        let r = cols.first().map_or(0, Vec::len);
        if cols.iter().any(|col| col.len() != r) {
            return Err(LinalgError::Dimension("ragged columns".into()));
        }
        let mut data = Vec::with_capacity(r * c);
        for i in 0..r {
            for col in cols {
                data.push(col[i].clone());
            }
        }
        Self::new(r, c, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "IntMatrix dimensions must be positive");
        Self { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = BigInt::one();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &BigInt {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: BigInt) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> Vec<BigInt> {
        self.data[r * self.cols..(r + 1) * self.cols].to_vec()
    }

    pub fn column(&self, c: usize) -> Vec<BigInt> {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows).map(|r| self.row(r)).collect()
    }

    /// Entries as `i64`, if they all fit.
    pub fn to_i64_rows(&self) -> Option<Vec<Vec<i64>>> {
        (0..self.rows)
            .map(|r| self.row(r).iter().map(ToPrimitive::to_i64).collect())
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> Result<IntMatrix, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let idx = i * other.cols + j;
                    out.data[idx] += a * other.get(k, j);
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(v.len(), self.cols, "vector length mismatch");
        (0..self.rows)
            .map(|r| (0..self.cols).map(|c| self.get(r, c) * &v[c]).sum())
            .collect()
    }

    pub fn select_columns(&self, idx: &[usize]) -> Result<IntMatrix, LinalgError> {
        let cols: Vec<Vec<BigInt>> = idx.iter().map(|&c| self.column(c)).collect();
        Self::from_columns(&cols)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for r in 0..self.rows {
            self.data.swap(r * self.cols + a, r * self.cols + b);
        }
    }

    /// row[dst] -= q * row[src]
    fn row_axpy(&mut self, dst: usize, src: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        for c in 0..self.cols {
            let t = self.get(src, c) * q;
            self.data[dst * self.cols + c] -= t;
        }
    }

    /// col[dst] -= q * col[src]
    fn col_axpy(&mut self, dst: usize, src: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        for r in 0..self.rows {
            let t = self.get(r, src) * q;
            self.data[r * self.cols + dst] -= t;
        }
    }

    fn negate_row(&mut self, r: usize) {
        for c in 0..self.cols {
            let idx = r * self.cols + c;
            self.data[idx] = -&self.data[idx];
        }
    }
}

impl Serialize for IntMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<String>> =
            self.to_rows().iter().map(|r| r.iter().map(ToString::to_string).collect()).collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for IntMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows: Vec<Vec<String>> = Vec::deserialize(d)?;
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(D::Error::custom("ragged matrix rows"));
        }
        let mut data = Vec::with_capacity(r * c);
        for s in rows.iter().flatten() {
            data.push(s.parse::<BigInt>().map_err(D::Error::custom)?);
        }
        IntMatrix::new(r, c, data).map_err(D::Error::custom)
    }
}

impl RatMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &BigRational {
        &self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> Vec<BigRational> {
        self.data[r * self.cols..(r + 1) * self.cols].to_vec()
    }

    pub fn from_int(m: &IntMatrix) -> Self {
        Self {
            rows: m.rows,
            cols: m.cols,
            data: m.data.iter().map(|x| BigRational::from_integer(x.clone())).collect(),
        }
    }

    pub fn mul_int(&self, m: &IntMatrix) -> Result<RatMatrix, LinalgError> {
        if self.cols != m.rows() {
            return Err(LinalgError::Dimension("rational * integer shape mismatch".into()));
        }
        let mut data = vec![BigRational::zero(); self.rows * m.cols()];
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..m.cols() {
                    data[i * m.cols() + j] += a * BigRational::from_integer(m.get(k, j).clone());
                }
            }
        }
        Ok(RatMatrix { rows: self.rows, cols: m.cols(), data })
    }

    pub fn mul_rat(&self, m: &RatMatrix) -> Result<RatMatrix, LinalgError> {
        if self.cols != m.rows {
            return Err(LinalgError::Dimension("rational product shape mismatch".into()));
        }
        let mut data = vec![BigRational::zero(); self.rows * m.cols];
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..m.cols {
                    data[i * m.cols + j] += a * m.get(k, j);
                }
            }
        }
        Ok(RatMatrix { rows: self.rows, cols: m.cols, data })
    }

    pub fn mul_int_vec(&self, v: &[BigInt]) -> Vec<BigRational> {
        assert_eq!(v.len(), self.cols, "vector length mismatch");
        (0..self.rows)
            .map(|r| {
                (0..self.cols)
                    .map(|c| self.get(r, c) * BigRational::from_integer(v[c].clone()))
                    .fold(BigRational::zero(), |a, b| a + b)
            })
            .collect()
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|r| {
                (0..self.cols).all(|c| {
                    let e = self.get(r, c);
                    if r == c {
                        e.is_one()
                    } else {
                        e.is_zero()
                    }
                })
            })
    }

    /// Entries as `f64` (rounded).
    pub fn to_f64_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows)
            .map(|r| self.row(r).iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect())
            .collect()
    }
}

/// Row Hermite normal form: returns `(H, U)` with `U` unimodular and `U·M = H`.
///
/// `H` is in row echelon form with positive pivots; entries above a pivot lie in
/// `[0, pivot)`; zero rows come last.
pub fn hermite_normal_form(m: &IntMatrix) -> (IntMatrix, IntMatrix) {
    let mut h = m.clone();
    let mut u = IntMatrix::identity(m.rows());
    let mut pr = 0;
    for c in 0..m.cols() {
        if pr == m.rows() {
            break;
        }
        loop {
            let pivot = (pr..m.rows())
                .filter(|&r| !h.get(r, c).is_zero())
                .min_by(|&a, &b| h.get(a, c).abs().cmp(&h.get(b, c).abs()));
            let Some(p) = pivot else { break };
            h.swap_rows(pr, p);
            u.swap_rows(pr, p);
            let mut done = true;
            for r in pr + 1..m.rows() {
                if h.get(r, c).is_zero() {
                    continue;
                }
                let q = h.get(r, c).div_floor(h.get(pr, c));
                h.row_axpy(r, pr, &q);
                u.row_axpy(r, pr, &q);
                if !h.get(r, c).is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if h.get(pr, c).is_zero() {
            continue;
        }
        if h.get(pr, c).is_negative() {
            h.negate_row(pr);
            u.negate_row(pr);
        }
        for r in 0..pr {
            let q = h.get(r, c).div_floor(h.get(pr, c));
            h.row_axpy(r, pr, &q);
            u.row_axpy(r, pr, &q);
        }
        pr += 1;
    }
    (h, u)
}

/// Smith normal form: returns `(S, U, V)` with `U·M·V = S`, `S` diagonal with
/// nonnegative entries `d_1 | d_2 | …`.
pub fn smith_normal_form(m: &IntMatrix) -> (IntMatrix, IntMatrix, IntMatrix) {
    let (rows, cols) = (m.rows(), m.cols());
    let mut s = m.clone();
    let mut u = IntMatrix::identity(rows);
    let mut v = IntMatrix::identity(cols);
    let mut t = 0;
    while t < rows.min(cols) {
        // smallest nonzero entry in the trailing block
        let mut best: Option<(usize, usize)> = None;
        for r in t..rows {
            for c in t..cols {
                if s.get(r, c).is_zero() {
                    continue;
                }
                if best.is_none_or(|(br, bc)| s.get(r, c).abs() < s.get(br, bc).abs()) {
                    best = Some((r, c));
                }
            }
        }
        let Some((pr, pc)) = best else { break };
        s.swap_rows(t, pr);
        u.swap_rows(t, pr);
        s.swap_cols(t, pc);
        v.swap_cols(t, pc);

        let mut clean = true;
        for r in t + 1..rows {
            if s.get(r, t).is_zero() {
                continue;
            }
            let q = s.get(r, t).div_floor(s.get(t, t));
            s.row_axpy(r, t, &q);
            u.row_axpy(r, t, &q);
            if !s.get(r, t).is_zero() {
                clean = false;
            }
        }
        for c in t + 1..cols {
            if s.get(t, c).is_zero() {
                continue;
            }
            let q = s.get(t, c).div_floor(s.get(t, t));
            s.col_axpy(c, t, &q);
            v.col_axpy(c, t, &q);
            if !s.get(t, c).is_zero() {
                clean = false;
            }
        }
        if !clean {
            continue;
        }
        // divisibility of the remaining block
        let mut fixed = false;
        'outer: for r in t + 1..rows {
            for c in t + 1..cols {
                if !(s.get(r, c) % s.get(t, t)).is_zero() {
                    // add row r into row t and retry
                    let minus_one = -BigInt::one();
                    s.row_axpy(t, r, &minus_one);
                    u.row_axpy(t, r, &minus_one);
                    fixed = true;
                    break 'outer;
                }
            }
        }
        if fixed {
            continue;
        }
        if s.get(t, t).is_negative() {
            s.negate_row(t);
            u.negate_row(t);
        }
        t += 1;
    }
    (s, u, v)
}

/// Diagonal of the Smith form, including zeros, of length `min(rows, cols)`.
pub fn smith_divisors(m: &IntMatrix) -> Vec<BigInt> {
    let (s, _, _) = smith_normal_form(m);
    (0..m.rows().min(m.cols())).map(|i| s.get(i, i).clone()).collect()
}

pub fn rank(m: &IntMatrix) -> usize {
    let (h, _) = hermite_normal_form(m);
    (0..h.rows()).filter(|&r| (0..h.cols()).any(|c| !h.get(r, c).is_zero())).count()
}

/// Z-basis of the integer right kernel, one basis vector per column.
///
/// Returns `None` when the kernel is trivial. The basis is canonicalised by
/// bringing the transposed basis into Hermite normal form.
pub fn integer_kernel(m: &IntMatrix) -> Option<IntMatrix> {
    let (h, u) = hermite_normal_form(&m.transpose());
    let zero_rows: Vec<usize> =
        (0..h.rows()).filter(|&r| (0..h.cols()).all(|c| h.get(r, c).is_zero())).collect();
    if zero_rows.is_empty() {
        return None;
    }
    let basis: Vec<Vec<BigInt>> = zero_rows.iter().map(|&r| u.row(r)).collect();
    let b = IntMatrix::new(
        basis.len(),
        m.cols(),
        basis.into_iter().flatten().collect(),
    )
    .expect("nonempty kernel basis");
    let (canon, _) = hermite_normal_form(&b);
    Some(canon.transpose())
}

/// Exact determinant by fraction-free (Bareiss) elimination.
pub fn determinant(m: &IntMatrix) -> Result<BigInt, LinalgError> {
    let n = m.rows();
    if n != m.cols() {
        return Err(LinalgError::NotSquare { rows: n, cols: m.cols() });
    }
    let mut a = m.clone();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        if a.get(k, k).is_zero() {
            let Some(p) = (k + 1..n).find(|&r| !a.get(r, k).is_zero()) else {
                return Ok(BigInt::zero());
            };
            a.swap_rows(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = a.get(i, j) * a.get(k, k) - a.get(i, k) * a.get(k, j);
                a.set(i, j, num / &prev);
            }
        }
        prev = a.get(k, k).clone();
    }
    Ok(sign * a.get(n - 1, n - 1))
}

/// Exact inverse over Q together with the integer determinant.
pub fn rat_inverse(m: &IntMatrix) -> Result<(RatMatrix, BigInt), LinalgError> {
    let n = m.rows();
    let det = determinant(m)?;
    if det.is_zero() {
        return Err(LinalgError::SingularMatrix);
    }
    let mut a: Vec<Vec<BigRational>> = (0..n)
        .map(|r| {
            let mut row: Vec<BigRational> =
                m.row(r).into_iter().map(BigRational::from_integer).collect();
            row.extend((0..n).map(|c| {
                if c == r {
                    BigRational::one()
                } else {
                    BigRational::zero()
                }
            }));
            row
        })
        .collect();
    for k in 0..n {
        let p = (k..n).find(|&r| !a[r][k].is_zero()).ok_or(LinalgError::SingularMatrix)?;
        a.swap(k, p);
        let inv_pivot = a[k][k].recip();
        for x in a[k].iter_mut() {
            *x *= &inv_pivot;
        }
        let pivot_row = a[k].clone();
        for (r, row) in a.iter_mut().enumerate() {
            if r == k || row[k].is_zero() {
                continue;
            }
            let f = row[k].clone();
            for (x, p) in row.iter_mut().zip(&pivot_row) {
                *x -= &f * p;
            }
        }
    }
    let data = a.into_iter().flat_map(|row| row.into_iter().skip(n)).collect();
    Ok((RatMatrix { rows: n, cols: n, data }, det))
}

/// All vectors in `Z_{≥0}^dim` with coordinate sum `degree`, in lexicographic order.
pub fn compositions(dim: usize, degree: usize) -> Vec<Vec<usize>> {
    fn rec(dim: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() + 1 == dim {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for x in 0..=left {
            cur.push(x);
            rec(dim, left - x, cur, out);
            cur.pop();
        }
    }
    if dim == 0 {
        return if degree == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    let mut out = Vec::new();
    rec(dim, degree, &mut Vec::with_capacity(dim), &mut out);
    out
}

/// Residue class of `v` modulo the lattice spanned by the columns of a square
/// nonsingular `basis`, encoded as the fractional parts of `basis⁻¹·v`.
fn class_key(inv: &RatMatrix, v: &[BigInt]) -> Vec<BigRational> {
    inv.mul_int_vec(v).into_iter().map(|x| x.fract_floor()).collect()
}

trait FractFloor {
    fn fract_floor(&self) -> Self;
}

impl FractFloor for BigRational {
    fn fract_floor(&self) -> Self {
        self - self.floor()
    }
}

/// Representatives `k(i) ∈ Z_{≥0}^{σ̄}` of `Z^d / Z·A_σ` realised through the
/// columns outside σ.
///
/// `sigma` holds 0-based column indices. Enumeration runs over `k` in graded
/// lexicographic order and keeps the first vector of each new class, so the
/// zero vector is always first.
pub fn coset_representatives(
    a: &IntMatrix,
    sigma: &[usize],
) -> Result<Vec<Vec<BigInt>>, LinalgError> {
    let a_sigma = a.select_columns(sigma)?;
    let (inv, det) = rat_inverse(&a_sigma)?;
    let r = det.abs().to_usize().ok_or_else(|| LinalgError::Dimension("index too large".into()))?;
    let comp: Vec<usize> = (0..a.cols()).filter(|j| !sigma.contains(j)).collect();
    let mut seen: Vec<Vec<BigRational>> = Vec::new();
    let mut reps = Vec::new();
    if comp.is_empty() {
        return if r == 1 { Ok(vec![Vec::new()]) } else { Err(LinalgError::CosetSearchExhausted(0)) };
    }
    let max_degree = r * comp.len().max(1) + r;
    for deg in 0..=max_degree {
        for kv in compositions(comp.len(), deg) {
            let mut v = vec![BigInt::zero(); a.rows()];
            for (t, &j) in comp.iter().enumerate() {
                if kv[t] == 0 {
                    continue;
                }
                for (i, vi) in v.iter_mut().enumerate() {
                    *vi += a.get(i, j) * BigInt::from(kv[t]);
                }
            }
            let key = class_key(&inv, &v);
            if !seen.contains(&key) {
                seen.push(key);
                reps.push(kv.into_iter().map(BigInt::from).collect());
                if reps.len() == r {
                    return Ok(reps);
                }
            }
        }
    }
    Err(LinalgError::CosetSearchExhausted(max_degree))
}

/// Representatives of `Z^d / Z·M` for square nonsingular `M`, chosen among
/// nonnegative vectors in graded lexicographic order.
pub fn lattice_quotient_representatives(m: &IntMatrix) -> Result<Vec<Vec<BigInt>>, LinalgError> {
    let (inv, det) = rat_inverse(m)?;
    let r = det.abs().to_usize().ok_or_else(|| LinalgError::Dimension("index too large".into()))?;
    let d = m.rows();
    let mut seen = Vec::new();
    let mut reps = Vec::new();
    for deg in 0..=(r * d) {
        for kv in compositions(d, deg) {
            let v: Vec<BigInt> = kv.into_iter().map(BigInt::from).collect();
            let key = class_key(&inv, &v);
            if !seen.contains(&key) {
                seen.push(key);
                reps.push(v);
                if reps.len() == r {
                    return Ok(reps);
                }
            }
        }
    }
    Err(LinalgError::CosetSearchExhausted(r * d))
}
