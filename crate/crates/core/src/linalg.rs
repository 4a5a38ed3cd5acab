//! Dense linear algebra for DPP sampling and the GCN layers.
//!
//! Matrices are row-major `f64`. [`eigh`] reduces to tridiagonal form with
//! Householder reflections and diagonalises with implicit QL; [`eigh_jacobi`]
//! is a cyclic Jacobi solver used to cross-check it.

use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance used to accept a matrix as symmetric.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Eigenvalues below this are treated as numerical zeros of a PSD kernel.
pub const EIGEN_CLAMP: f64 = 1e-10;
/// Sweep budget for the Jacobi iteration.
pub const MAX_JACOBI_SWEEPS: usize = 50;
/// QL iterations allowed per eigenvalue.
pub const MAX_QL_ITERS: usize = 60;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} values for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Builds a matrix from equal-length rows. Panics on ragged input.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend_from_slice(r);
        }
        Matrix {
            rows: rows.len(),
            cols,
            data,
        }
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

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    /// `self · rhs`
    pub fn matmul(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "matmul shape mismatch");
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(rhs.row(k)) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `selfᵀ · rhs`
    pub fn t_matmul(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.rows, rhs.rows, "t_matmul shape mismatch");
        let mut out = Matrix::zeros(self.cols, rhs.cols);
        for k in 0..self.rows {
            let b_row = rhs.row(k);
            for (i, &a) in self.row(k).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (o, &b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `self · rhsᵀ`
    pub fn matmul_t(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.cols, "matmul_t shape mismatch");
        let mut out = Matrix::zeros(self.rows, rhs.rows);
        for i in 0..self.rows {
            let a = self.row(i);
            for j in 0..rhs.rows {
                out[(i, j)] = dot(a, rhs.row(j));
            }
        }
        out
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn sub(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.shape(), rhs.shape());
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Cosine similarity clamped to `[-1, 1]`. A zero-norm argument yields 0.
pub fn cosine(u: &[f64], v: &[f64]) -> f64 {
    let nu = norm(u);
    let nv = norm(v);
    if nu == 0.0 || nv == 0.0 {
        return 0.0;
    }
    (dot(u, v) / (nu * nv)).clamp(-1.0, 1.0)
}

/// A validated real symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix(Matrix);

impl SymMatrix {
    pub fn new(m: Matrix) -> Result<Self> {
        if m.rows() != m.cols() {
            return Err(Error::Shape(format!(
                "symmetric matrix must be square, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        if !m.is_finite() {
            return Err(Error::NonFinite);
        }
        let n = m.rows();
        for i in 0..n {
            for j in (i + 1)..n {
                let diff = (m[(i, j)] - m[(j, i)]).abs();
                if diff > SYMMETRY_TOL {
                    return Err(Error::NotSymmetric { i, j, diff });
                }
            }
        }
        Ok(SymMatrix(m))
    }

    pub fn n(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    /// Principal submatrix on `idx`.
    pub fn submatrix(&self, idx: &[usize]) -> Matrix {
        let mut s = Matrix::zeros(idx.len(), idx.len());
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                s[(a, b)] = self.0[(i, j)];
            }
        }
        s
    }
}

/// Eigenvalues in ascending order with matching orthonormal eigenvectors
/// stored as the columns of `vectors`.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl EigenSystem {
    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// Zeroes eigenvalues below [`EIGEN_CLAMP`] (rounding noise of a PSD
    /// input) and reports how many remain strictly positive.
    pub fn clamp_psd(&mut self) -> usize {
        let mut rank = 0;
        for v in &mut self.values {
            if *v > EIGEN_CLAMP {
                rank += 1;
            } else {
                *v = 0.0;
            }
        }
        rank
    }

    pub fn reconstruct(&self) -> Matrix {
        let n = self.n();
        let mut scaled = self.vectors.clone();
        for i in 0..n {
            for (m, &lambda) in self.values.iter().enumerate() {
                scaled[(i, m)] *= lambda;
            }
        }
        scaled.matmul_t(&self.vectors)
    }
}

/// Full symmetric eigendecomposition: Householder tridiagonalisation
/// followed by the implicit QL method with Wilkinson shifts.
pub fn eigh(m: &SymMatrix) -> Result<EigenSystem> {
    let n = m.n();
    if n == 0 {
        return Err(Error::Shape("empty matrix".into()));
    }
    let mut v = m.matrix().as_slice().to_vec();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(&mut v, &mut d, &mut e, n);
    // Row r of `vt` is eigenvector r.
    let mut vt = Matrix::from_vec(n, n, v).expect("square").transpose().data;
    tridiagonal_ql(&mut d, &mut e, &mut vt, n)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| d[x].total_cmp(&d[y]));
    let values = order.iter().map(|&i| d[i]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (new, &old) in order.iter().enumerate() {
        for i in 0..n {
            vectors[(i, new)] = vt[old * n + i];
        }
    }
    Ok(EigenSystem { values, vectors })
}

/// Householder reduction of the row-major symmetric `v` to tridiagonal form.
/// On return `d` holds the diagonal, `e[1..]` the subdiagonal and `v` the
/// accumulated orthogonal transform.
fn tridiagonalize(v: &mut [f64], d: &mut [f64], e: &mut [f64], n: usize) {
    let at = |i: usize, j: usize| i * n + j;
    for j in 0..n {
        d[j] = v[at(n - 1, j)];
    }
    for i in (1..n).rev() {
        let scale: f64 = d[..i].iter().map(|x| x.abs()).sum();
        let mut h = 0.0;
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[at(i - 1, j)];
                v[at(i, j)] = 0.0;
                v[at(j, i)] = 0.0;
            }
        } else {
            for x in &mut d[..i] {
                *x /= scale;
                h += *x * *x;
            }
            let f = d[i - 1];
            let g = if f > 0.0 { -h.sqrt() } else { h.sqrt() };
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            e[..i].iter_mut().for_each(|x| *x = 0.0);
            for j in 0..i {
                let f = d[j];
                v[at(j, i)] = f;
                let mut g = e[j] + v[at(j, j)] * f;
                for k in (j + 1)..i {
                    g += v[at(k, j)] * d[k];
                    e[k] += v[at(k, j)] * f;
                }
                e[j] = g;
            }
            let mut f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                let (f, g) = (d[j], e[j]);
                for k in j..i {
                    v[at(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[at(i - 1, j)];
                v[at(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }
    for i in 0..n - 1 {
        v[at(n - 1, i)] = v[at(i, i)];
        v[at(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[at(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[at(k, i + 1)] * v[at(k, j)];
                }
                for k in 0..=i {
                    v[at(k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[at(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[at(n - 1, j)];
        v[at(n - 1, j)] = 0.0;
    }
    v[at(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

/// Implicit QL on the tridiagonal `(d, e)`, rotating the rows of `vt`.
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64], vt: &mut [f64], n: usize) -> Result<()> {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > f64::EPSILON * tst1 {
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > MAX_QL_ITERS {
                    return Err(Error::NoConvergence(MAX_QL_ITERS));
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let h = g - d[l];
                for x in &mut d[(l + 2)..n] {
                    *x -= h;
                }
                f += h;

                p = d[m];
                let (mut c, mut c2, mut c3) = (1.0, 1.0, 1.0);
                let el1 = e[l + 1];
                let (mut s, mut s2) = (0.0, 0.0);
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    let h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    let (head, tail) = vt.split_at_mut((i + 1) * n);
                    let vi = &mut head[i * n..];
                    let vi1 = &mut tail[..n];
                    for (a, b) in vi.iter_mut().zip(vi1.iter_mut()) {
                        let hb = *b;
                        *b = s * *a + c * hb;
                        *a = c * *a - s * hb;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= f64::EPSILON * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// Full symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Slower than [`eigh`] by a constant factor; kept as an independent
/// cross-check.
pub fn eigh_jacobi(m: &SymMatrix) -> Result<EigenSystem> {
    let n = m.n();
    if n == 0 {
        return Err(Error::Shape("empty matrix".into()));
    }
    let mut a = m.matrix().as_slice().to_vec();
    // Row r of `vt` is eigenvector r.
    let mut vt = Matrix::identity(n).data;
    let scale = m.matrix().frobenius();
    let target = 1e-14 * scale;

    let mut sweeps = 0;
    loop {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[p * n + q] * a[p * n + q];
            }
        }
        if (2.0 * off).sqrt() <= target || scale == 0.0 {
            break;
        }
        if sweeps == MAX_JACOBI_SWEEPS {
            return Err(Error::NoConvergence(MAX_JACOBI_SWEEPS));
        }
        sweeps += 1;
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                // Skip rotations that cannot change the diagonal in floating point.
                if apq.abs() < f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()).max(f64::MIN_POSITIVE)
                {
                    a[p * n + q] = 0.0;
                    a[q * n + p] = 0.0;
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                rotate(&mut a, n, p, q, c, s);
                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                let (head, tail) = vt.split_at_mut(q * n);
                let vp = &mut head[p * n..(p + 1) * n];
                let vq = &mut tail[..n];
                for (x, y) in vp.iter_mut().zip(vq.iter_mut()) {
                    let (xp, xq) = (*x, *y);
                    *x = c * xp - s * xq;
                    *y = s * xp + c * xq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[x * n + x].total_cmp(&a[y * n + y]));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (new, &old) in order.iter().enumerate() {
        for i in 0..n {
            vectors[(i, new)] = vt[old * n + i];
        }
    }
    Ok(EigenSystem { values, vectors })
}

/// Applies the rotation in the `(p, q)` plane to rows and columns `p`, `q`
/// of the symmetric row-major `a`, outside the `2×2` diagonal block.
fn rotate(a: &mut [f64], n: usize, p: usize, q: usize, c: f64, s: f64) {
    for k in (0..n).filter(|&k| k != p && k != q) {
        let x = a[k * n + p];
        let y = a[k * n + q];
        let nx = c * x - s * y;
        let ny = s * x + c * y;
        a[k * n + p] = nx;
        a[k * n + q] = ny;
        a[p * n + k] = nx;
        a[q * n + k] = ny;
    }
}

/// Determinant by LU factorisation with partial pivoting.
pub fn det(m: &Matrix) -> Result<f64> {
    if m.rows() != m.cols() {
        return Err(Error::Shape(format!(
            "determinant of a {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let n = m.rows();
    let mut lu = m.clone();
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| lu[(x, col)].abs().total_cmp(&lu[(y, col)].abs()))
            .unwrap();
        let pv = lu[(pivot, col)];
        if pv == 0.0 {
            return Ok(0.0);
        }
        if pivot != col {
            for j in 0..n {
                let tmp = lu[(col, j)];
                lu[(col, j)] = lu[(pivot, j)];
                lu[(pivot, j)] = tmp;
            }
            det = -det;
        }
        det *= pv;
        for r in (col + 1)..n {
            let f = lu[(r, col)] / pv;
            if f == 0.0 {
                continue;
            }
            for j in col..n {
                lu[(r, j)] -= f * lu[(col, j)];
            }
        }
    }
    Ok(det)
}

/// Removes from every vector in `basis` its component along `against`
/// and re-orthonormalises. Vectors that collapse below `drop_tol` are dropped.
pub fn gram_schmidt(basis: &mut Vec<Vec<f64>>, drop_tol: f64) {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(basis.len());
    for mut v in basis.drain(..) {
        // Two passes for numerical orthogonality.
        for _ in 0..2 {
            for u in &out {
                let proj = dot(&v, u);
                for (x, y) in v.iter_mut().zip(u) {
                    *x -= proj * y;
                }
            }
        }
        let nv = norm(&v);
        if nv > drop_tol {
            v.iter_mut().for_each(|x| *x /= nv);
            out.push(v);
        }
    }
    *basis = out;
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn sym(rows: &[&[f64]]) -> SymMatrix {
        SymMatrix::new(Matrix::from_rows(rows)).unwrap()
    }

    fn random_symmetric(n: usize, rng: &mut impl Rng) -> SymMatrix {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let x = rng.random_range(-1.0..1.0);
                m[(i, j)] = x;
                m[(j, i)] = x;
            }
        }
        SymMatrix::new(m).unwrap()
    }

    #[test]
    fn identity_spectrum() {
        let e = eigh(&SymMatrix::new(Matrix::identity(3)).unwrap()).unwrap();
        assert_eq!(e.values, vec![1.0, 1.0, 1.0]);
        let vtv = e.vectors.t_matmul(&e.vectors);
        assert!(vtv.sub(&Matrix::identity(3)).frobenius() < 1e-14);
    }

    #[test]
    fn two_by_two_spectrum() {
        let e = eigh(&sym(&[&[2.0, 1.0], &[1.0, 2.0]])).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14);
        assert!((e.values[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn all_ones_rank_one() {
        let e = eigh(&sym(&[&[1.0; 3], &[1.0; 3], &[1.0; 3]])).unwrap();
        assert!(e.values[0].abs() < 1e-14);
        assert!(e.values[1].abs() < 1e-14);
        assert!((e.values[2] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_asymmetric_and_nonfinite() {
        let m = Matrix::from_rows(&[&[1.0, 2.0], &[2.1, 1.0]]);
        assert!(matches!(SymMatrix::new(m), Err(Error::NotSymmetric { .. })));
        let m = Matrix::from_rows(&[&[f64::NAN, 0.0], &[0.0, 1.0]]);
        assert!(matches!(SymMatrix::new(m), Err(Error::NonFinite)));
    }

    #[test]
    fn deterministic() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let m = random_symmetric(12, &mut rng);
        let a = eigh(&m).unwrap();
        let b = eigh(&m).unwrap();
        assert_eq!(a.values, b.values);
        assert_eq!(a.vectors, b.vectors);
    }

    #[test]
    fn determinants() {
        assert_eq!(det(&Matrix::identity(4)).unwrap(), 1.0);
        assert_eq!(
            det(&Matrix::from_rows(&[&[2.0, 0.0], &[0.0, 3.0]])).unwrap(),
            6.0
        );
        let e1 = (-1.0f64).exp();
        let d = det(&Matrix::from_rows(&[&[1.0, e1], &[e1, 1.0]])).unwrap();
        assert!((d - 0.864_664_716_763_387_3).abs() < 1e-12);
        let m = Matrix::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        assert_eq!(det(&m).unwrap(), -1.0);
        assert!(det(&Matrix::from_rows(&[&[f64::INFINITY]])).is_err());
    }

    #[test]
    fn cosine_cases() {
        let u = [1.0, 2.0, -0.5];
        let neg: Vec<f64> = u.iter().map(|x| -x).collect();
        assert!((cosine(&u, &u) - 1.0).abs() < 1e-15);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 3.0]), 0.0);
        assert!((cosine(&u, &neg) + 1.0).abs() < 1e-15);
        assert_eq!(cosine(&[0.0, 0.0], &[1.0, 1.0]), 0.0);
    }

    #[test]
    fn gram_schmidt_orthonormalises() {
        let mut b = vec![
            vec![1.0, 1.0, 0.0],
            vec![1.0, 0.0, 0.0],
            vec![2.0, 1.0, 0.0],
        ];
        gram_schmidt(&mut b, 1e-10);
        assert_eq!(b.len(), 2);
        assert!(dot(&b[0], &b[1]).abs() < 1e-14);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn eigh_round_trip(n in 1usize..=24, seed in any::<u64>()) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let m = random_symmetric(n, &mut rng);
            for e in [eigh(&m).unwrap(), eigh_jacobi(&m).unwrap()] {
                let scale = m.matrix().frobenius().max(1.0);
                prop_assert!(e.reconstruct().sub(m.matrix()).frobenius() <= 1e-8 * scale);
                let vtv = e.vectors.t_matmul(&e.vectors);
                prop_assert!(vtv.sub(&Matrix::identity(n)).frobenius() <= 1e-8);
                prop_assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
            }
        }

        #[test]
        fn solvers_agree_on_eigenvalues(n in 1usize..=32, seed in any::<u64>()) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let m = random_symmetric(n, &mut rng);
            let a = eigh(&m).unwrap();
            let b = eigh_jacobi(&m).unwrap();
            for (x, y) in a.values.iter().zip(&b.values) {
                prop_assert!((x - y).abs() <= 1e-10 * (1.0 + x.abs()));
            }
        }

        #[test]
        fn det_matches_eigen_product_on_psd(n in 1usize..=10, seed in any::<u64>()) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let g = random_symmetric(n, &mut rng).into_matrix();
            let mut psd = g.matmul_t(&g);
            for i in 0..n { psd[(i, i)] += 0.1; }
            let psd = SymMatrix::new(psd).unwrap();
            let e = eigh(&psd).unwrap();
            let prod: f64 = e.values.iter().product();
            let d = det(psd.matrix()).unwrap();
            prop_assert!((d - prod).abs() <= 1e-8 * prod.abs().max(1e-300));
        }

        #[test]
        fn exp_cosine_entries_bounded(
            u in proptest::collection::vec(-1.0f64..1.0, 5),
            v in proptest::collection::vec(-1.0f64..1.0, 5),
        ) {
            let entry = (cosine(&u, &v) - 1.0).exp();
            let lo = (-2.0f64).exp();
            prop_assert!(entry >= lo - 1e-15 && entry <= 1.0);
        }
    }
}
