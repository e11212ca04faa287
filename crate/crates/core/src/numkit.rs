//! Small dense complex linear algebra used by the trackers.
//!
//! Everything here is sized for sensor arrays of a few dozen elements at
//! most. Matrices are stored row-major; the hot loops in the trackers work
//! column by column, which is cheap enough at these sizes.

use std::fmt;
use std::ops::Index;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Orthonormality tolerance on `‖WᴴW − I‖_F²`.
pub const ORTHO_TOL: f64 = 1e-10;
/// Rank tolerance, relative to the largest column norm.
pub const RANK_TOL_REL: f64 = 1e-12;
/// Span-membership tolerance.
pub const SPAN_TOL: f64 = 1e-8;
/// Norms below this are treated as zero.
pub const NORM_TOL: f64 = 1e-150;

#[derive(Clone, PartialEq)]
pub struct CVector(Vec<C64>);

impl CVector {
    pub fn new(entries: Vec<C64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::dims("CVector::new", "length >= 1", 0));
        }
        if entries.iter().any(|z| !z.is_finite()) {
            return Err(Error::Config("vector entries must be finite".into()));
        }
        Ok(CVector(entries))
    }

    pub fn from_real(entries: &[f64]) -> Result<Self> {
        Self::new(entries.iter().map(|&r| C64::new(r, 0.0)).collect())
    }

    pub fn zeros(n: usize) -> Self {
        CVector(vec![C64::new(0.0, 0.0); n])
    }

    pub(crate) fn from_vec_unchecked(entries: Vec<C64>) -> Self {
        CVector(entries)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, C64> {
        self.0.iter()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.is_finite())
    }

    /// Hermitian inner product `selfᴴ·other`.
    pub fn dot(&self, other: &CVector) -> C64 {
        dot(&self.0, &other.0)
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.0)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, s: C64) -> CVector {
        CVector(self.0.iter().map(|z| z * s).collect())
    }

    pub fn scale_real(&self, s: f64) -> CVector {
        CVector(self.0.iter().map(|z| z * s).collect())
    }

    pub fn add(&self, other: &CVector) -> CVector {
        CVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &CVector) -> CVector {
        CVector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    /// `self + s·other`
    pub fn axpy(&self, s: C64, other: &CVector) -> CVector {
        CVector(self.0.iter().zip(&other.0).map(|(a, b)| a + s * b).collect())
    }
}

impl Index<usize> for CVector {
    type Output = C64;
    fn index(&self, i: usize) -> &C64 {
        &self.0[i]
    }
}

impl fmt::Debug for CVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

/// Dense complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::dims("CMatrix::new", "non-empty shape", format!("{rows}x{cols}")));
        }
        if data.len() != rows * cols {
            return Err(Error::dims("CMatrix::new", rows * cols, data.len()));
        }
        if data.iter().any(|z| !z.is_finite()) {
            return Err(Error::Config("matrix entries must be finite".into()));
        }
        Ok(CMatrix { rows, cols, data })
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::new(rows, cols, data.iter().map(|&r| C64::new(r, 0.0)).collect())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = C64::new(1.0, 0.0);
        }
        m
    }

    /// First `cols` columns of the `n × n` identity.
    pub fn eye_columns(n: usize, cols: usize) -> Self {
        let mut m = Self::zeros(n, cols);
        for i in 0..cols.min(n) {
            m.data[i * cols + i] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_columns(columns: &[CVector]) -> Result<Self> {
        let Some(first) = columns.first() else {
            return Err(Error::dims("CMatrix::from_columns", "at least one column", 0));
        };
        let rows = first.len();
        let cols = columns.len();
        let mut m = Self::zeros(rows, cols);
        for (j, c) in columns.iter().enumerate() {
            if c.len() != rows {
                return Err(Error::dims("CMatrix::from_columns", rows, c.len()));
            }
            for i in 0..rows {
                m.data[i * cols + j] = c[i];
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.data[i * self.cols + j] = v;
    }

    /// Row-major entries.
    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> CVector {
        CVector((0..self.rows).map(|i| self.get(i, j)).collect())
    }

    pub fn columns(&self) -> Vec<CVector> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.is_finite())
    }

    pub fn adjoint(&self) -> CMatrix {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.get(i, j).conj();
            }
        }
        out
    }

    pub fn matmul(&self, other: &CMatrix) -> Result<CMatrix> {
        if self.cols != other.rows {
            return Err(Error::dims(
                "matmul",
                format!("{} rows", self.cols),
                format!("{} rows", other.rows),
            ));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        Ok(out)
    }

    /// `M·v`
    pub fn apply(&self, v: &CVector) -> Result<CVector> {
        if v.len() != self.cols {
            return Err(Error::dims("apply", self.cols, v.len()));
        }
        Ok(CVector(
            (0..self.rows)
                .map(|i| dot_plain(&self.data[i * self.cols..(i + 1) * self.cols], &v.0))
                .collect(),
        ))
    }

    pub fn add(&self, other: &CMatrix) -> Result<CMatrix> {
        self.zip_with(other, "add", |a, b| a + b)
    }

    pub fn sub(&self, other: &CMatrix) -> Result<CMatrix> {
        self.zip_with(other, "sub", |a, b| a - b)
    }

    pub fn scale(&self, s: C64) -> CMatrix {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn frobenius_norm_sqr(&self) -> f64 {
        norm_sqr(&self.data)
    }

    /// `MᴴM`
    pub fn gram(&self) -> CMatrix {
        let cols = self.columns();
        let l = self.cols;
        let mut g = Self::zeros(l, l);
        for i in 0..l {
            for j in 0..l {
                g.data[i * l + j] = cols[i].dot(&cols[j]);
            }
        }
        g
    }

    /// `self + u·vᴴ`
    pub fn rank_one_update(&self, u: &CVector, v: &CVector) -> Result<CMatrix> {
        if u.len() != self.rows || v.len() != self.cols {
            return Err(Error::dims(
                "rank_one_update",
                format!("{}x{}", self.rows, self.cols),
                format!("{}x{}", u.len(), v.len()),
            ));
        }
        let mut out = self.clone();
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[i * self.cols + j] += u[i] * v[j].conj();
            }
        }
        Ok(out)
    }

    /// Columns `[self | other]`.
    pub fn hcat(&self, other: &CMatrix) -> Result<CMatrix> {
        if self.rows != other.rows {
            return Err(Error::dims("hcat", self.rows, other.rows));
        }
        let mut cols = self.columns();
        cols.extend(other.columns());
        Self::from_columns(&cols)
    }

    pub fn select_columns(&self, range: std::ops::Range<usize>) -> Result<CMatrix> {
        if range.end > self.cols || range.is_empty() {
            return Err(Error::dims("select_columns", self.cols, format!("{range:?}")));
        }
        Self::from_columns(&range.map(|j| self.column(j)).collect::<Vec<_>>())
    }

    fn zip_with(&self, other: &CMatrix, op: &'static str, f: impl Fn(C64, C64) -> C64) -> Result<CMatrix> {
        if self.shape() != other.shape() {
            return Err(Error::dims(
                op,
                format!("{}x{}", self.rows, self.cols),
                format!("{}x{}", other.rows, other.cols),
            ));
        }
        Ok(CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", &self.data[i * self.cols..(i + 1) * self.cols])?;
        }
        write!(f, "]")
    }
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn dot_plain(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm_sqr(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

/// `Mᴴ·v`
pub fn hermitian_apply(m: &CMatrix, v: &CVector) -> Result<CVector> {
    if m.rows() != v.len() {
        return Err(Error::dims("hermitian_apply", m.rows(), v.len()));
    }
    let mut out = vec![C64::new(0.0, 0.0); m.cols()];
    for i in 0..m.rows() {
        let vi = v[i];
        for (j, o) in out.iter_mut().enumerate() {
            *o += m.get(i, j).conj() * vi;
        }
    }
    Ok(CVector(out))
}

/// Removes from `v` its components along the (orthonormal) `basis`, twice.
fn project_out(v: &mut [C64], basis: &[Vec<C64>]) {
    for _ in 0..2 {
        for q in basis {
            let c = dot(q, v);
            for (vi, qi) in v.iter_mut().zip(q) {
                *vi -= c * qi;
            }
        }
    }
}

/// Modified Gram–Schmidt QR with one reorthogonalization pass.
///
/// Returns the `Q` factor of `T = QR` where `R` is upper triangular with a
/// real positive diagonal, so column `i` of the result only depends on
/// columns `0..=i` of `t`.
pub fn orthonormalize(t: &CMatrix) -> Result<CMatrix> {
    let cols = t.columns();
    let scale = cols.iter().map(CVector::norm).fold(0.0_f64, f64::max);
    let tol = (RANK_TOL_REL * scale).max(NORM_TOL);
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(cols.len());
    for (j, c) in cols.into_iter().enumerate() {
        let mut v = c.0;
        project_out(&mut v, &basis);
        let nrm = norm_sqr(&v).sqrt();
        if nrm.is_nan() || nrm <= tol {
            return Err(Error::RankDeficient {
                column: j,
                residual: nrm,
                tol,
            });
        }
        for z in v.iter_mut() {
            *z /= nrm;
        }
        basis.push(v);
    }
    CMatrix::from_columns(&basis.into_iter().map(CVector).collect::<Vec<_>>())
}

/// Squared Frobenius distance `‖P_A − P_B‖_F²` between the orthogonal
/// projectors onto `span(A)` and `span(B)`.
///
/// Both inputs are orthonormalized first. The distance is evaluated as
/// `2‖(I − P_A)B‖_F²`, which keeps full relative accuracy when the spans
/// nearly coincide.
pub fn span_distance(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::dims(
            "span_distance",
            format!("{}x{}", a.rows(), a.cols()),
            format!("{}x{}", b.rows(), b.cols()),
        ));
    }
    let qa: Vec<Vec<C64>> = orthonormalize(a)?.columns().into_iter().map(|c| c.0).collect();
    let qb = orthonormalize(b)?;
    let mut total = 0.0;
    for mut v in qb.columns().into_iter().map(|c| c.0) {
        project_out(&mut v, &qa);
        total += norm_sqr(&v);
    }
    Ok(2.0 * total)
}

/// Builds the basis `(y/‖y‖, COM)` of `span(w)`: first column along `y`,
/// remaining columns an orthonormal basis of the part of `span(w)`
/// orthogonal to `y`.
pub fn complete_basis(w: &CMatrix, y: &CVector) -> Result<CMatrix> {
    if w.rows() != y.len() {
        return Err(Error::dims("complete_basis", w.rows(), y.len()));
    }
    let ny = y.norm();
    if ny.is_nan() || ny <= NORM_TOL {
        return Err(Error::Degenerate { what: "y", norm: ny });
    }
    let coords = hermitian_apply(w, y)?;
    let resid = y.sub(&w.apply(&coords)?).norm();
    if resid > SPAN_TOL * ny {
        return Err(Error::NotInSpan {
            relative_residual: resid / ny,
        });
    }

    let mut basis = vec![y.scale_real(1.0 / ny).0];
    let mut candidates: Vec<Vec<C64>> = w.columns().into_iter().map(|c| c.0).collect();
    while basis.len() < w.cols() {
        // Column pivoting: keep the candidate with the largest residual.
        for c in candidates.iter_mut() {
            project_out(c, &basis);
        }
        let (best, nrm) = candidates
            .iter()
            .enumerate()
            .map(|(i, c)| (i, norm_sqr(c).sqrt()))
            .fold((0, -1.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        if nrm.is_nan() || nrm <= NORM_TOL {
            return Err(Error::RankDeficient {
                column: basis.len(),
                residual: nrm,
                tol: NORM_TOL,
            });
        }
        let mut v = candidates.swap_remove(best);
        for z in v.iter_mut() {
            *z /= nrm;
        }
        basis.push(v);
    }
    CMatrix::from_columns(&basis.into_iter().map(CVector).collect::<Vec<_>>())
}

/// Angle between `a` and `b` in the real geometry of `Cⁿ ≅ R²ⁿ`, in `[0, π]`.
///
/// Uses the half-angle form `2·atan2(‖â − b̂‖, ‖â + b̂‖)`, accurate for
/// angles near 0 and π.
pub fn vector_angle(a: &CVector, b: &CVector) -> f64 {
    let ua = a.scale_real(1.0 / a.norm());
    let ub = b.scale_real(1.0 / b.norm());
    2.0 * ua.sub(&ub).norm().atan2(ua.add(&ub).norm())
}
