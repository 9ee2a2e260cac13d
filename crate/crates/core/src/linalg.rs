//! Small dense linear algebra: real matrices, complex square matrices, a
//! cyclic Jacobi eigensolver for symmetric matrices and singular values
//! obtained from it.
//!
//! Everything here targets matrices of side at most a few dozen; no attempt
//! is made at blocking or cache efficiency.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense real matrix stored row-major; serialized as a list of rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl TryFrom<Vec<Vec<f64>>> for Matrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Matrix::from_rows(&rows)
    }
}

impl From<Matrix> for Vec<Vec<f64>> {
    fn from(m: Matrix) -> Self {
        m.to_rows()
    }
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::ShapeMismatch("ragged rows".into()));
        }
        Self::from_row_major(rows.len(), cols, rows.concat())
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    /// Column `j` is sent to `signs[j] * e_{perm[j]}`.
    pub fn signed_permutation(perm: &[usize], signs: &[f64]) -> Result<Self> {
        let n = perm.len();
        if signs.len() != n {
            return Err(Error::LengthMismatch {
                left: n,
                right: signs.len(),
            });
        }
        let mut seen = vec![false; n];
        for &p in perm {
            if p >= n || seen[p] {
                return Err(Error::ShapeMismatch(format!("{perm:?} is not a permutation")));
            }
            seen[p] = true;
        }
        if signs.iter().any(|s| s.abs() != 1.0) {
            return Err(Error::ShapeMismatch("signs must be +1 or -1".into()));
        }
        let mut m = Self::zeros(n, n);
        for (j, (&p, &s)) in perm.iter().zip(signs).enumerate() {
            m[(p, j)] = s;
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "matvec: dimension mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    /// Block matrix `[[a, b], [c, d]]`; blocks must have compatible shapes.
    pub fn block(a: &Matrix, b: &Matrix, c: &Matrix, d: &Matrix) -> Result<Matrix> {
        if a.rows != b.rows || c.rows != d.rows || a.cols != c.cols || b.cols != d.cols {
            return Err(Error::ShapeMismatch("incompatible block shapes".into()));
        }
        let rows = a.rows + c.rows;
        let cols = a.cols + b.cols;
        let mut m = Matrix::zeros(rows, cols);
        for (src, r0, c0) in [(a, 0, 0), (b, 0, a.cols), (c, a.rows, 0), (d, a.rows, a.cols)] {
            for i in 0..src.rows {
                for j in 0..src.cols {
                    m[(r0 + i, c0 + j)] = src[(i, j)];
                }
            }
        }
        Ok(m)
    }

    /// Rows `start..end` as a new matrix.
    pub fn row_range(&self, start: usize, end: usize) -> Matrix {
        Matrix {
            rows: end - start,
            cols: self.cols,
            data: self.data[start * self.cols..end * self.cols].to_vec(),
        }
    }

    pub fn scaled(&self, s: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Dense complex matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_real(m: &Matrix) -> Self {
        Self {
            rows: m.rows,
            cols: m.cols,
            data: m.data.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    fn is_real(&self) -> bool {
        self.data.iter().all(|z| z.im == 0.0)
    }
}

/// Eigenvalues of a real symmetric `n x n` matrix (row-major, consumed) by
/// cyclic Jacobi rotations, returned in nonincreasing order.
pub fn symmetric_eigenvalues(mut a: Vec<f64>, n: usize) -> Vec<f64> {
    assert_eq!(a.len(), n * n);
    const MAX_SWEEPS: usize = 64;
    let idx = |i: usize, j: usize| i * n + j;

    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        let mut diag = 0.0;
        for i in 0..n {
            diag += a[idx(i, i)] * a[idx(i, i)];
            for j in (i + 1)..n {
                off += a[idx(i, j)] * a[idx(i, j)];
            }
        }
        if off == 0.0 || off <= 1e-32 * diag {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[idx(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[idx(q, q)] - a[idx(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for r in 0..n {
                    if r == p || r == q {
                        continue;
                    }
                    let arp = a[idx(r, p)];
                    let arq = a[idx(r, q)];
                    let new_rp = c * arp - s * arq;
                    let new_rq = c * arq + s * arp;
                    a[idx(r, p)] = new_rp;
                    a[idx(p, r)] = new_rp;
                    a[idx(r, q)] = new_rq;
                    a[idx(q, r)] = new_rq;
                }
                a[idx(p, p)] -= t * apq;
                a[idx(q, q)] += t * apq;
                a[idx(p, q)] = 0.0;
                a[idx(q, p)] = 0.0;
            }
        }
    }

    let mut eig: Vec<f64> = (0..n).map(|i| a[idx(i, i)]).collect();
    eig.sort_by(|x, y| y.total_cmp(x));
    eig
}

/// Singular values of a square complex matrix, nonincreasing.
///
/// Computed as square roots of the eigenvalues of the Hermitian product
/// `m* m`. Complex Hermitian matrices are handled through their real
/// symmetric embedding `[[A, -B], [B, A]]`, whose spectrum is the Hermitian
/// spectrum with every eigenvalue doubled. Round-off negatives are clamped
/// to zero.
pub fn singular_values(m: &CMatrix) -> Result<Vec<f64>> {
    if m.rows != m.cols {
        return Err(Error::NotSquare {
            rows: m.rows,
            cols: m.cols,
        });
    }
    let n = m.rows;
    if n == 0 {
        return Ok(Vec::new());
    }

    let eig = if m.is_real() {
        let mut g = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v: f64 = (0..n).map(|k| m.get(k, i).re * m.get(k, j).re).sum();
                g[i * n + j] = v;
                g[j * n + i] = v;
            }
        }
        symmetric_eigenvalues(g, n)
    } else {
        // h = m* m
        let mut h = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in i..n {
                let v: Complex64 = (0..n).map(|k| m.get(k, i).conj() * m.get(k, j)).sum();
                h[i * n + j] = v;
                h[j * n + i] = v.conj();
            }
        }
        let w = 2 * n;
        let mut e = vec![0.0; w * w];
        for i in 0..n {
            for j in 0..n {
                let z = h[i * n + j];
                e[i * w + j] = z.re;
                e[(i + n) * w + (j + n)] = z.re;
                e[i * w + (j + n)] = -z.im;
                e[(i + n) * w + j] = z.im;
            }
        }
        let doubled = symmetric_eigenvalues(e, w);
        doubled.into_iter().step_by(2).collect()
    };

    Ok(eig.into_iter().map(|l| l.max(0.0).sqrt()).collect())
}

/// Orthonormal basis of the column span of `a` (modified Gram-Schmidt with
/// one reorthogonalization pass). Columns whose residual falls below
/// `rank_tol` times their original norm are dropped.
pub fn orthonormal_columns(a: &Matrix, rank_tol: f64) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for j in 0..a.cols() {
        let mut v = a.column(j);
        let norm0 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm0 == 0.0 {
            continue;
        }
        for _ in 0..2 {
            for q in &basis {
                let dot: f64 = q.iter().zip(&v).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(q).for_each(|(x, qi)| *x -= dot * qi);
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > rank_tol * norm0 {
            v.iter_mut().for_each(|x| *x /= norm);
            basis.push(v);
        }
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn matrix_serializes_as_rows() {
        let m = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]]).unwrap();
        let text = serde_json::to_string(&m).unwrap();
        assert_eq!(text, "[[1.0,2.0],[3.0,4.0],[5.0,6.0]]");
        assert_eq!(serde_json::from_str::<Matrix>(&text).unwrap(), m);
        assert!(serde_json::from_str::<Matrix>("[[1.0],[2.0,3.0]]").is_err());
    }

    #[test]
    fn matrix_unit_singular_values() {
        let m = CMatrix::from_row_major(2, 2, vec![c(1., 0.), c(0., 0.), c(0., 0.), c(0., 0.)]).unwrap();
        assert_eq!(singular_values(&m).unwrap(), vec![1.0, 0.0]);
    }

    #[test]
    fn diagonal_singular_values() {
        let m = CMatrix::from_row_major(2, 2, vec![c(1., 0.), c(0., 0.), c(0., 0.), c(0.5, 0.)]).unwrap();
        let s = singular_values(&m).unwrap();
        assert!((s[0] - 1.0).abs() < 1e-15 && (s[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn frobenius_identity_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for complex in [false, true] {
            for _ in 0..50 {
                let data = (0..9)
                    .map(|_| {
                        let im = if complex { rng.random_range(-1.0..1.0) } else { 0.0 };
                        c(rng.random_range(-1.0..1.0), im)
                    })
                    .collect();
                let m = CMatrix::from_row_major(3, 3, data).unwrap();
                let s = singular_values(&m).unwrap();
                let sum: f64 = s.iter().map(|v| v * v).sum();
                let fro = m.frobenius_sq();
                assert!(((sum - fro) / fro).abs() < 1e-10, "{sum} vs {fro}");
                assert!(s.windows(2).all(|w| w[0] >= w[1]));
            }
        }
    }

    #[test]
    fn complex_phase_matrix() {
        // diag(i, -2) has singular values (2, 1)
        let m = CMatrix::from_row_major(2, 2, vec![c(0., 1.), c(0., 0.), c(0., 0.), c(-2., 0.)]).unwrap();
        let s = singular_values(&m).unwrap();
        assert!((s[0] - 2.0).abs() < 1e-14 && (s[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn non_square_rejected() {
        let m = CMatrix::from_row_major(1, 2, vec![c(1., 0.), c(0., 0.)]).unwrap();
        assert_eq!(singular_values(&m), Err(Error::NotSquare { rows: 1, cols: 2 }));
    }

    #[test]
    fn jacobi_known_spectrum() {
        // [[2,1],[1,2]] -> 3, 1
        let e = symmetric_eigenvalues(vec![2., 1., 1., 2.], 2);
        assert!((e[0] - 3.0).abs() < 1e-14 && (e[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn signed_permutation_rejects_duplicates() {
        assert!(Matrix::signed_permutation(&[0, 0], &[1., 1.]).is_err());
        let m = Matrix::signed_permutation(&[1, 0], &[1., -1.]).unwrap();
        assert_eq!(m.matvec(&[2., 3.]), vec![-3., 2.]);
    }

    #[test]
    fn orthonormal_columns_drop_dependent() {
        let a = Matrix::from_rows(&[vec![1., 2., 0.], vec![0., 0., 1.], vec![0., 0., 0.]]).unwrap();
        let q = orthonormal_columns(&a, 1e-12);
        assert_eq!(q.len(), 2);
    }
}
