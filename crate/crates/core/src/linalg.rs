//! Dense row-major matrices over a generic [`Scalar`].
//!
//! Ring operations are available for every scalar. Gaussian elimination,
//! kernels, determinants and congruence diagonalization need a [`Field`];
//! over [`Rational`](crate::Rational) they are exact.

use std::fmt;
use std::ops::{Index, IndexMut, Mul};

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::scalar::{Field, Scalar};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

/// Sylvester inertia of a symmetric matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Inertia {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", &self.data[r * self.cols..(r + 1) * self.cols])?;
        }
        write!(f, "]")
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    fn index(&self, (r, c): (usize, usize)) -> &T {
        &self.data[r * self.cols + c]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut T {
        &mut self.data[r * self.cols + c]
    }
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    /// Builds a matrix from rows; `None` if the rows are ragged.
    pub fn from_rows(rows: Vec<Vec<T>>) -> Option<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return None;
        }
        Some(Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    /// Builds a matrix whose columns are the given vectors (all of length `rows`).
    pub fn from_columns(rows: usize, columns: &[Vec<T>]) -> Self {
        let mut m = Self::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows, "column length mismatch");
            for (i, v) in col.iter().enumerate() {
                m[(i, j)] = v.clone();
            }
        }
        m
    }

    pub fn from_diagonal(entries: &[T]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, e) in entries.iter().enumerate() {
            m[(i, i)] = e.clone();
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<T> {
        (0..self.rows).map(|r| self[(r, c)].clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t[(c, r)] = self[(r, c)].clone();
            }
        }
        t
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Matrix<U> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|r| (r + 1..self.cols).all(|c| self[(r, c)] == self[(c, r)]))
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|r| {
                (0..self.cols).all(|c| {
                    let v = &self[(r, c)];
                    if r == c {
                        v.is_one()
                    } else {
                        v.is_zero()
                    }
                })
            })
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.cols, "dimension mismatch in mul_vec");
        (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data =
            self.data.iter().zip(&other.data).map(|(a, b)| a.clone() + b.clone()).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data =
            self.data.iter().zip(&other.data).map(|(a, b)| a.clone() - b.clone()).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, s: &T) -> Self {
        self.map(|v| v.clone() * s.clone())
    }

    /// `self - s * I`.
    pub fn shift_diagonal(&self, s: &T) -> Self {
        let mut m = self.clone();
        for i in 0..self.rows.min(self.cols) {
            m[(i, i)] = m[(i, i)].clone() - s.clone();
        }
        m
    }

    pub fn pow(&self, mut exp: u64) -> Self {
        assert!(self.is_square());
        let mut base = self.clone();
        let mut acc = Self::identity(self.rows);
        while exp > 0 {
            if exp & 1 == 1 {
                acc = &acc * &base;
            }
            exp >>= 1;
            if exp > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Block-diagonal sum of square blocks.
    pub fn block_diagonal(blocks: &[Matrix<T>]) -> Self {
        let n = blocks.iter().map(|b| b.rows).sum();
        let mut m = Self::zeros(n, n);
        let mut off = 0;
        for b in blocks {
            assert!(b.is_square());
            for r in 0..b.rows {
                for c in 0..b.cols {
                    m[(off + r, off + c)] = b[(r, c)].clone();
                }
            }
            off += b.rows;
        }
        m
    }

    /// `uᵀ · self · v`.
    pub fn bilinear(&self, u: &[T], v: &[T]) -> T {
        let mv = self.mul_vec(v);
        u.iter().zip(&mv).fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
    }

    /// `Bᵀ · self · B` for `B` given by its columns.
    pub fn restrict_form(&self, basis: &[Vec<T>]) -> Self {
        let b = Self::from_columns(self.rows, basis);
        &(&b.transpose() * self) * &b
    }

    pub fn trace(&self) -> T {
        (0..self.rows.min(self.cols)).fold(T::zero(), |acc, i| acc + self[(i, i)].clone())
    }
}

impl<T: Scalar> Mul for &Matrix<T> {
    type Output = Matrix<T>;

    fn mul(self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch in matrix product");
        let mut out: Matrix<T> = Matrix::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(r, k)];
                if a.is_zero() {
                    continue;
                }
                for c in 0..rhs.cols {
                    let b = &rhs[(k, c)];
                    if b.is_zero() {
                        continue;
                    }
                    out[(r, c)] = out[(r, c)].clone() + a.clone() * b.clone();
                }
            }
        }
        out
    }
}

impl Matrix<i64> {
    pub fn to_field<F: Field>(&self) -> Matrix<F> {
        self.map(|&v| F::from_i64(v))
    }

    pub fn to_rational(&self) -> Matrix<BigRational> {
        self.to_field()
    }
}

impl<T: Field> Matrix<T> {
    fn pivot_row(&self, col: usize, from: usize) -> Option<usize> {
        if T::EXACT {
            (from..self.rows).find(|&r| !self[(r, col)].is_zero())
        } else {
            (from..self.rows)
                .map(|r| (r, self[(r, col)].to_f64().abs()))
                .filter(|(_, a)| *a > T::tolerance())
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .map(|(r, _)| r)
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    /// Reduced row echelon form and the pivot columns.
    pub fn rref(&self) -> (Self, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let Some(p) = m.pivot_row(col, row) else {
                continue;
            };
            m.swap_rows(row, p);
            let inv = T::one() / m[(row, col)].clone();
            for c in col..m.cols {
                m[(row, c)] = m[(row, c)].clone() * inv.clone();
            }
            for r in 0..m.rows {
                if r == row {
                    continue;
                }
                let factor = m[(r, col)].clone();
                if factor.is_negligible() {
                    if !T::EXACT {
                        m[(r, col)] = T::zero();
                    }
                    continue;
                }
                for c in col..m.cols {
                    let v = m[(r, c)].clone() - factor.clone() * m[(row, c)].clone();
                    m[(r, c)] = v;
                }
            }
            pivots.push(col);
            row += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the right kernel `{x : self · x = 0}`.
    pub fn kernel(&self) -> Vec<Vec<T>> {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&fc| {
                let mut v = vec![T::zero(); self.cols];
                v[fc] = T::one();
                for (pr, &pc) in pivots.iter().enumerate() {
                    v[pc] = -r[(pr, fc)].clone();
                }
                v
            })
            .collect()
    }

    pub fn determinant(&self) -> T {
        assert!(self.is_square());
        let mut m = self.clone();
        let mut det = T::one();
        for col in 0..m.cols {
            let Some(p) = m.pivot_row(col, col) else {
                return T::zero();
            };
            if p != col {
                m.swap_rows(p, col);
                det = -det;
            }
            let piv = m[(col, col)].clone();
            det = det * piv.clone();
            for r in col + 1..m.rows {
                let factor = m[(r, col)].clone() / piv.clone();
                if factor.is_zero() {
                    continue;
                }
                for c in col..m.cols {
                    let v = m[(r, c)].clone() - factor.clone() * m[(col, c)].clone();
                    m[(r, c)] = v;
                }
            }
        }
        det
    }

    pub fn inverse(&self) -> Option<Self> {
        assert!(self.is_square());
        let n = self.rows;
        let mut aug = Self::zeros(n, 2 * n);
        for r in 0..n {
            for c in 0..n {
                aug[(r, c)] = self[(r, c)].clone();
            }
            aug[(r, n + r)] = T::one();
        }
        let (red, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        let mut inv = Self::zeros(n, n);
        for r in 0..n {
            for c in 0..n {
                inv[(r, c)] = red[(r, n + c)].clone();
            }
        }
        Some(inv)
    }

    /// Solves `self · X = rhs`, returning `None` when the system is
    /// inconsistent. Free variables are set to zero.
    pub fn solve(&self, rhs: &Self) -> Option<Self> {
        assert_eq!(self.rows, rhs.rows);
        let n = self.cols;
        let mut aug = Self::zeros(self.rows, n + rhs.cols);
        for r in 0..self.rows {
            for c in 0..n {
                aug[(r, c)] = self[(r, c)].clone();
            }
            for c in 0..rhs.cols {
                aug[(r, n + c)] = rhs[(r, c)].clone();
            }
        }
        let (red, pivots) = aug.rref();
        if pivots.iter().any(|&p| p >= n) {
            return None;
        }
        if !T::EXACT {
            // rref skips pivots that are below tolerance; verify residual rows.
            for r in pivots.len()..self.rows {
                if (n..n + rhs.cols).any(|c| !red[(r, c)].is_negligible()) {
                    return None;
                }
            }
        }
        let mut x = Self::zeros(n, rhs.cols);
        for (pr, &pc) in pivots.iter().enumerate() {
            for c in 0..rhs.cols {
                x[(pc, c)] = red[(pr, n + c)].clone();
            }
        }
        Some(x)
    }

    /// Symmetric congruence diagonalization: returns `(P, d)` with
    /// `Pᵀ · self · P = diag(d)` and `P` invertible.
    pub fn congruence_diagonalize(&self) -> (Self, Vec<T>) {
        assert!(self.is_symmetric() || !T::EXACT, "congruence needs a symmetric matrix");
        let n = self.rows;
        let mut a = self.clone();
        let mut p = Self::identity(n);
        // Column operations on P mirror the simultaneous row/column operations on A.
        let add_multiple = |a: &mut Self, p: &mut Self, target: usize, source: usize, s: T| {
            // basis_target += s * basis_source
            for r in 0..n {
                let v = a[(r, target)].clone() + s.clone() * a[(r, source)].clone();
                a[(r, target)] = v;
            }
            for c in 0..n {
                let v = a[(target, c)].clone() + s.clone() * a[(source, c)].clone();
                a[(target, c)] = v;
            }
            for r in 0..n {
                let v = p[(r, target)].clone() + s.clone() * p[(r, source)].clone();
                p[(r, target)] = v;
            }
        };
        let swap = |a: &mut Self, p: &mut Self, i: usize, j: usize| {
            if i == j {
                return;
            }
            a.swap_rows(i, j);
            for r in 0..n {
                a.data.swap(r * n + i, r * n + j);
                p.data.swap(r * n + i, r * n + j);
            }
        };
        for k in 0..n {
            if a[(k, k)].is_negligible() {
                if let Some(j) = (k + 1..n).find(|&j| !a[(j, j)].is_negligible()) {
                    swap(&mut a, &mut p, k, j);
                } else if let Some(j) = (k + 1..n).find(|&j| !a[(k, j)].is_negligible()) {
                    // a_kk' = 2 a_kj + a_jj = 2 a_kj  (a_jj vanishes here)
                    add_multiple(&mut a, &mut p, k, j, T::one());
                } else {
                    continue;
                }
            }
            let piv = a[(k, k)].clone();
            for j in k + 1..n {
                let entry = a[(k, j)].clone();
                if entry.is_negligible() {
                    continue;
                }
                let s = -(entry / piv.clone());
                add_multiple(&mut a, &mut p, j, k, s);
            }
        }
        let d = (0..n)
            .map(|i| if a[(i, i)].is_negligible() { T::zero() } else { a[(i, i)].clone() })
            .collect();
        (p, d)
    }

    pub fn inertia(&self) -> Inertia {
        let (_, d) = self.congruence_diagonalize();
        let mut out = Inertia { positive: 0, negative: 0, zero: 0 };
        for v in d {
            if v.is_negligible() {
                out.zero += 1;
            } else if v > T::zero() {
                out.positive += 1;
            } else {
                out.negative += 1;
            }
        }
        out
    }

    /// All leading principal minors strictly positive.
    pub fn is_positive_definite(&self) -> bool {
        if !self.is_square() {
            return false;
        }
        let n = self.rows;
        (1..=n).all(|k| {
            let mut m = Self::zeros(k, k);
            for r in 0..k {
                for c in 0..k {
                    m[(r, c)] = self[(r, c)].clone();
                }
            }
            let det = m.determinant();
            !det.is_negligible() && det > T::zero()
        })
    }
}

/// Rank of a list of column vectors of common length.
pub fn span_rank<T: Field>(len: usize, vectors: &[Vec<T>]) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    Matrix::from_columns(len, vectors).rank()
}

/// Scales a rational vector to a primitive integer vector with the same
/// direction (first nonzero coordinate kept positive).
pub fn primitive_integer_vector(v: &[BigRational]) -> Vec<num_bigint::BigInt> {
    use num_integer::Integer;
    let lcm = v.iter().fold(num_bigint::BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<num_bigint::BigInt> =
        v.iter().map(|x| (x * BigRational::from_integer(lcm.clone())).to_integer()).collect();
    let g = ints.iter().fold(num_bigint::BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return ints;
    }
    let mut out: Vec<_> = ints.into_iter().map(|x| x / &g).collect();
    if out.iter().find(|x| !x.is_zero()).is_some_and(|x| x < &num_bigint::BigInt::zero()) {
        for x in &mut out {
            *x = -x.clone();
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn q(rows: Vec<Vec<i64>>) -> Matrix<Rational> {
        Matrix::from_rows(rows).unwrap().to_rational()
    }

    #[test]
    fn kernel_of_rank_one() {
        let m = q(vec![vec![1, 2, 3], vec![2, 4, 6]]);
        let k = m.kernel();
        assert_eq!(k.len(), 2);
        for v in &k {
            assert!(m.mul_vec(v).iter().all(Zero::is_zero));
        }
    }

    #[test]
    fn determinant_and_inverse() {
        let m = q(vec![vec![2, 1], vec![7, 4]]);
        assert_eq!(m.determinant(), Rational::from_i64(1));
        let inv = m.inverse().unwrap();
        assert!((&m * &inv).is_identity());
        assert!(q(vec![vec![1, 2], vec![2, 4]]).inverse().is_none());
    }

    #[test]
    fn inertia_of_hyperbolic_plane_needs_off_diagonal_pivot() {
        let h = q(vec![vec![0, 1], vec![1, 0]]);
        let (p, d) = h.congruence_diagonalize();
        let back = &(&p.transpose() * &h) * &p;
        assert_eq!(back, Matrix::from_diagonal(&d));
        assert_eq!(h.inertia(), Inertia { positive: 1, negative: 1, zero: 0 });
    }

    #[test]
    fn inertia_with_degenerate_directions() {
        let m = q(vec![vec![1, 1, 0], vec![1, 1, 0], vec![0, 0, -3]]);
        assert_eq!(m.inertia(), Inertia { positive: 1, negative: 1, zero: 1 });
    }

    #[test]
    fn float_instantiation_matches_exact() {
        let rows = vec![vec![4, 1, 0], vec![1, 3, 1], vec![0, 1, 2]];
        let exact = q(rows.clone());
        let float: Matrix<f64> = Matrix::from_rows(rows.clone()).unwrap().to_field();
        let single: Matrix<f32> = Matrix::from_rows(rows).unwrap().to_field();
        assert_eq!(exact.determinant(), Rational::from_i64(18));
        assert!((float.determinant() - 18.0).abs() < 1e-9);
        assert!((single.determinant() - 18.0).abs() < 1e-3);
        assert!(float.is_positive_definite());
        assert_eq!(float.inertia(), exact.inertia());
    }

    #[test]
    fn solve_detects_inconsistency() {
        let a = q(vec![vec![1, 1], vec![1, 1]]);
        let ok = q(vec![vec![2], vec![2]]);
        let bad = q(vec![vec![2], vec![3]]);
        assert!(a.solve(&ok).is_some());
        assert!(a.solve(&bad).is_none());
    }

    #[test]
    fn pow_by_squaring() {
        let rot = Matrix::from_rows(vec![vec![0i64, -1], vec![1, 0]]).unwrap();
        assert!(rot.pow(4).is_identity());
        assert!(!rot.pow(2).is_identity());
    }

    #[test]
    fn primitive_vector_normalizes() {
        let v = vec![Rational::from_ratio(-2, 3), Rational::from_i64(0), Rational::from_ratio(4, 3)];
        let p = primitive_integer_vector(&v);
        assert_eq!(p, vec![1.into(), 0.into(), (-2).into()]);
    }
}
