//! Dense vectors and matrices over working-precision reals.

use std::ops::{Index, IndexMut};

use rug::{Assign, Float};

use super::precision::{PrecisionContext, Real};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct DenseVector(pub Vec<Real>);

impl DenseVector {
    pub fn zeros(ctx: &PrecisionContext, n: usize) -> Self {
        Self(vec![ctx.zero(); n])
    }

    /// Unit vector `e_k` of length `n`.
    pub fn unit(ctx: &PrecisionContext, n: usize, k: usize) -> Self {
        let mut v = Self::zeros(ctx, n);
        v.0[k] = ctx.one();
        v
    }

    pub fn from_f64(ctx: &PrecisionContext, xs: &[f64]) -> Self {
        Self(xs.iter().map(|&x| ctx.f64(x)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Real> {
        self.0.iter()
    }

    pub fn dot(&self, other: &Self) -> Real {
        assert_eq!(self.len(), other.len(), "dot: length mismatch");
        let prec = self.0.first().map_or(64, |x| x.prec());
        let mut acc = Float::new(prec);
        for (a, b) in self.0.iter().zip(&other.0) {
            acc += a * b;
        }
        acc
    }

    /// `self += c * other`
    pub fn axpy(&mut self, c: &Real, other: &Self) {
        assert_eq!(self.len(), other.len(), "axpy: length mismatch");
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += c * b;
        }
    }

    pub fn scale(&mut self, c: &Real) {
        for a in &mut self.0 {
            *a *= c;
        }
    }

    /// Maximum absolute entry.
    pub fn max_abs(&self) -> Real {
        let prec = self.0.first().map_or(64, |x| x.prec());
        let mut m = Float::new(prec);
        for a in &self.0 {
            if a.cmp_abs(&m) == Some(std::cmp::Ordering::Greater) {
                m = Float::with_val(prec, a.abs_ref());
            }
        }
        m
    }

    /// Euclidean norm.
    pub fn norm(&self) -> Real {
        self.dot(self).sqrt()
    }
}

impl Index<usize> for DenseVector {
    type Output = Real;
    fn index(&self, i: usize) -> &Real {
        &self.0[i]
    }
}

impl IndexMut<usize> for DenseVector {
    fn index_mut(&mut self, i: usize) -> &mut Real {
        &mut self.0[i]
    }
}

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Real>,
}

impl DenseMatrix {
    pub fn zeros(ctx: &PrecisionContext, rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![ctx.zero(); rows * cols] }
    }

    pub fn identity(ctx: &PrecisionContext, n: usize) -> Self {
        let mut m = Self::zeros(ctx, n, n);
        for i in 0..n {
            m[(i, i)] = ctx.one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Real) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a symmetric matrix from its upper triangle; the lower triangle
    /// is an exact copy, so `a_ij == a_ji` bit for bit.
    pub fn symmetric_from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Real) -> Self {
        let mut data: Vec<Option<Real>> = vec![None; n * n];
        for i in 0..n {
            for j in i..n {
                data[i * n + j] = Some(f(i, j));
            }
        }
        for i in 0..n {
            for j in 0..i {
                data[i * n + j] = data[j * n + i].clone();
            }
        }
        Self { rows: n, cols: n, data: data.into_iter().map(Option::unwrap).collect() }
    }

    pub fn from_rows(rows: Vec<Vec<Real>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Ok(Self { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    pub fn from_f64(ctx: &PrecisionContext, rows: &[&[f64]]) -> Result<Self> {
        Self::from_rows(rows.iter().map(|r| r.iter().map(|&x| ctx.f64(x)).collect()).collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[Real] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vector(&self, i: usize) -> DenseVector {
        DenseVector(self.row(i).to_vec())
    }

    pub fn matvec(&self, x: &DenseVector) -> DenseVector {
        assert_eq!(self.cols, x.len(), "matvec: dimension mismatch");
        let prec = x.0.first().map_or(64, |v| v.prec());
        let out = (0..self.rows)
            .map(|i| {
                let mut acc = Float::new(prec);
                for (a, b) in self.row(i).iter().zip(&x.0) {
                    acc += a * b;
                }
                acc
            })
            .collect();
        DenseVector(out)
    }

    /// `self^T x`
    pub fn tr_matvec(&self, x: &DenseVector) -> DenseVector {
        assert_eq!(self.rows, x.len(), "tr_matvec: dimension mismatch");
        let prec = x.0.first().map_or(64, |v| v.prec());
        let mut out = vec![Float::new(prec); self.cols];
        for i in 0..self.rows {
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a * &x.0[i];
            }
        }
        DenseVector(out)
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul: dimension mismatch");
        let prec = self.data.first().map_or(64, |v| v.prec());
        let mut out = vec![Float::new(prec); self.rows * other.cols];
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self.data[i * self.cols + k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[i * other.cols + j] += a * &other.data[k * other.cols + j];
                }
            }
        }
        Self { rows: self.rows, cols: other.cols, data: out }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    /// `a_ij == a_ji` exactly for every pair.
    pub fn is_symmetric(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    /// Largest `|a_ij - b_ij|`.
    pub fn max_abs_diff(&self, other: &Self) -> Real {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let prec = self.data.first().map_or(64, |v| v.prec());
        let mut m = Float::new(prec);
        for (a, b) in self.data.iter().zip(&other.data) {
            let d = Float::with_val(prec, a - b).abs();
            if d > m {
                m = d;
            }
        }
        m
    }

    /// Linear combination `a*self + b*other`.
    pub fn combine(&self, a: &Real, other: &Self, b: &Real) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(x, y)| {
                let mut v = Float::with_val(x.prec(), x * a);
                v += y * b;
                v
            })
            .collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    /// Conjugation by an index permutation: `out[i][j] = self[p[i]][p[j]]`,
    /// i.e. `P^T A P` for the permutation matrix with `P e_j = e_{p[j]}`.
    pub fn permuted(&self, p: &[usize]) -> Self {
        assert!(self.is_square() && p.len() == self.rows);
        Self::from_fn(self.rows, self.cols, |i, j| self[(p[i], p[j])].clone())
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = Real;
    fn index(&self, (i, j): (usize, usize)) -> &Real {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Real {
        &mut self.data[i * self.cols + j]
    }
}

/// LU factorization with scaled partial pivoting, `P A = L U`.
#[derive(Clone, Debug)]
pub struct LuDecomposition {
    lu: DenseMatrix,
    perm: Vec<usize>,
}

impl LuDecomposition {
    /// Factors a square matrix. A pivot smaller than `10^(-digits+5)` relative
    /// to the original row scale is reported as singular.
    pub fn factor(ctx: &PrecisionContext, a: &DenseMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Dimension(format!("LU of a {}x{} matrix", a.rows, a.cols)));
        }
        let n = a.rows;
        let prec = ctx.bits();
        let threshold = ctx.tolerance(5);
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut scale: Vec<Real> = (0..n)
            .map(|i| {
                let mut s = Float::new(prec);
                for x in a.row(i) {
                    if x.cmp_abs(&s) == Some(std::cmp::Ordering::Greater) {
                        s = Float::with_val(prec, x.abs_ref());
                    }
                }
                s
            })
            .collect();

        let mut rel = Float::new(prec);
        for k in 0..n {
            let mut best = k;
            let mut best_val = Float::new(prec);
            for i in k..n {
                if scale[i].is_zero() {
                    continue;
                }
                rel.assign(lu[(i, k)].abs_ref());
                rel /= &scale[i];
                if rel > best_val {
                    best_val.clone_from(&rel);
                    best = i;
                }
            }
            if best_val < threshold {
                return Err(Error::Singular { step: k, pivot: best_val.to_f64() });
            }
            if best != k {
                for j in 0..n {
                    lu.data.swap(k * n + j, best * n + j);
                }
                perm.swap(k, best);
                scale.swap(k, best);
            }
            let pivot = lu[(k, k)].clone();
            for i in (k + 1)..n {
                if lu[(i, k)].is_zero() {
                    continue;
                }
                let mut factor = Float::with_val(prec, &lu[(i, k)] / &pivot);
                lu[(i, k)].clone_from(&factor);
                factor = -factor;
                let (upper, lower) = lu.data.split_at_mut(i * n);
                let row_k = &upper[k * n..(k + 1) * n];
                let row_i = &mut lower[..n];
                for j in (k + 1)..n {
                    row_i[j] += &factor * &row_k[j];
                }
            }
        }
        Ok(Self { lu, perm })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    pub fn solve(&self, b: &DenseVector) -> DenseVector {
        let n = self.dim();
        assert_eq!(b.len(), n, "LU solve: dimension mismatch");
        let mut x: Vec<Real> = self.perm.iter().map(|&p| b.0[p].clone()).collect();
        for i in 0..n {
            let (done, rest) = x.split_at_mut(i);
            let xi = &mut rest[0];
            for (j, xj) in done.iter().enumerate() {
                *xi -= &self.lu[(i, j)] * xj;
            }
        }
        for i in (0..n).rev() {
            let (head, tail) = x.split_at_mut(i + 1);
            let xi = &mut head[i];
            for (off, xj) in tail.iter().enumerate() {
                *xi -= &self.lu[(i, i + 1 + off)] * xj;
            }
            *xi /= &self.lu[(i, i)];
        }
        DenseVector(x)
    }
}

/// Solves `A x = b` by LU factorization with partial pivoting.
pub fn solve_dense(ctx: &PrecisionContext, a: &DenseMatrix, b: &DenseVector) -> Result<DenseVector> {
    if a.rows != b.len() {
        return Err(Error::Dimension(format!("{}x{} system with rhs of length {}", a.rows, a.cols, b.len())));
    }
    Ok(LuDecomposition::factor(ctx, a)?.solve(b))
}

/// Outcome of a linear least-squares solve.
#[derive(Clone, Debug)]
pub struct LeastSquares {
    pub x: DenseVector,
    /// Residual vector `b - A x`.
    pub residual: DenseVector,
    /// Ratio of the largest to the smallest `|R_kk|` after column scaling.
    pub condition: f64,
}

/// Minimizes `||A x - b||_2` by Householder QR after scaling every column of
/// `A` to unit Euclidean norm.
pub fn least_squares(ctx: &PrecisionContext, a: &DenseMatrix, b: &DenseVector) -> Result<LeastSquares> {
    let (m, n) = (a.rows, a.cols);
    if b.len() != m {
        return Err(Error::Dimension(format!("{m}x{n} design with {} observations", b.len())));
    }
    if m < n {
        return Err(Error::Dimension(format!("underdetermined {m}x{n} least squares")));
    }
    let prec = ctx.bits();
    let col_scale: Vec<Real> = (0..n)
        .map(|j| {
            let mut s = Float::new(prec);
            for i in 0..m {
                s += &a[(i, j)] * &a[(i, j)];
            }
            s.sqrt()
        })
        .collect();
    for (j, s) in col_scale.iter().enumerate() {
        if s.is_zero() {
            return Err(Error::RankDeficient { column: j, ratio: 0.0 });
        }
    }
    let mut r = DenseMatrix::from_fn(m, n, |i, j| Float::with_val(prec, &a[(i, j)] / &col_scale[j]));
    let mut y = b.clone();

    for k in 0..n {
        let mut norm = Float::new(prec);
        for i in k..m {
            norm += &r[(i, k)] * &r[(i, k)];
        }
        let norm = norm.sqrt();
        if norm.is_zero() {
            return Err(Error::RankDeficient { column: k, ratio: 0.0 });
        }
        // v = x - alpha e_1 with alpha = -sign(x_0) ||x||
        let alpha = if r[(k, k)].is_sign_negative() { norm } else { -norm };
        let mut v: Vec<Real> = (k..m).map(|i| r[(i, k)].clone()).collect();
        v[0] -= &alpha;
        let mut vnorm2 = Float::new(prec);
        for vi in &v {
            vnorm2 += vi * vi;
        }
        if vnorm2.is_zero() {
            continue;
        }
        for j in k..n {
            let mut s = Float::new(prec);
            for (off, vi) in v.iter().enumerate() {
                s += vi * &r[(k + off, j)];
            }
            s *= 2;
            s /= &vnorm2;
            for (off, vi) in v.iter().enumerate() {
                r[(k + off, j)] -= &s * vi;
            }
        }
        let mut s = Float::new(prec);
        for (off, vi) in v.iter().enumerate() {
            s += vi * &y.0[k + off];
        }
        s *= 2;
        s /= &vnorm2;
        for (off, vi) in v.iter().enumerate() {
            y.0[k + off] -= &s * vi;
        }
    }

    let mut dmax = Float::new(prec);
    let mut dmin = Float::with_val(prec, f64::INFINITY);
    for k in 0..n {
        let d = Float::with_val(prec, r[(k, k)].abs_ref());
        if d > dmax {
            dmax.clone_from(&d);
        }
        if d < dmin {
            dmin.clone_from(&d);
        }
    }
    let threshold = Float::with_val(prec, &dmax * &ctx.tolerance(5));
    for k in 0..n {
        let d = Float::with_val(prec, r[(k, k)].abs_ref());
        if d < threshold {
            let ratio = Float::with_val(prec, &d / &dmax).to_f64();
            return Err(Error::RankDeficient { column: k, ratio });
        }
    }

    let mut z = vec![Float::new(prec); n];
    for k in (0..n).rev() {
        let mut s = y.0[k].clone();
        for j in (k + 1)..n {
            s -= &r[(k, j)] * &z[j];
        }
        s /= &r[(k, k)];
        z[k] = s;
    }
    let x = DenseVector(z.into_iter().zip(&col_scale).map(|(zk, s)| zk / s).collect());
    let ax = a.matvec(&x);
    let residual = DenseVector(b.0.iter().zip(&ax.0).map(|(bi, ai)| Float::with_val(prec, bi - ai)).collect());
    let condition = Float::with_val(prec, &dmax / &dmin).to_f64();
    Ok(LeastSquares { x, residual, condition })
}
