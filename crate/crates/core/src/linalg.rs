//! Small dense linear algebra over [`Scalar`].

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{Rational, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![T::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn scaled(&self, c: &T) -> Self {
        Self { n: self.n, data: self.data.iter().map(|x| x.clone() * c.clone()).collect() }
    }

    /// I - z·self.
    pub fn i_minus_scaled(&self, z: &T) -> Self {
        let mut m = self.scaled(&-z.clone());
        for i in 0..self.n {
            m[(i, i)] = m[(i, i)].clone() + T::one();
        }
        m
    }

    /// Removes row and column `v`.
    pub fn delete(&self, v: usize) -> Self {
        self.principal(&(0..self.n).filter(|&i| i != v).collect::<Vec<_>>())
    }

    /// Principal submatrix on `idx` (in the given order).
    pub fn principal(&self, idx: &[usize]) -> Self {
        let mut m = Self::zeros(idx.len());
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                m[(a, b)] = self[(i, j)].clone();
            }
        }
        m
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = &other[(k, j)];
                    if b.is_zero() {
                        continue;
                    }
                    out[(i, j)] = out[(i, j)].clone() + a.clone() * b.clone();
                }
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::identity(self.n);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn trace(&self) -> T {
        (0..self.n).fold(T::zero(), |acc, i| acc + self[(i, i)].clone())
    }

    pub fn det(&self) -> T {
        T::determinant(self)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.to_f64().abs()).fold(0.0, f64::max)
    }

    /// Inverse by Gauss-Jordan elimination.
    pub fn inverse(&self) -> Result<Self> {
        let n = self.n;
        let scale = self.max_abs().max(1.0);
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| a[(i, col)].pivot_score().total_cmp(&a[(j, col)].pivot_score()))
                .ok_or(Error::Singular)?;
            if a[(pivot, col)].is_negligible(scale) {
                return Err(Error::Singular);
            }
            a.swap_rows(pivot, col);
            inv.swap_rows(pivot, col);
            let p = a[(col, col)].clone();
            for j in 0..n {
                a[(col, j)] = a[(col, j)].clone() / p.clone();
                inv[(col, j)] = inv[(col, j)].clone() / p.clone();
            }
            for i in 0..n {
                if i == col || a[(i, col)].is_zero() {
                    continue;
                }
                let f = a[(i, col)].clone();
                for j in 0..n {
                    let aj = a[(col, j)].clone();
                    let ij = inv[(col, j)].clone();
                    a[(i, j)] = a[(i, j)].clone() - f.clone() * aj;
                    inv[(i, j)] = inv[(i, j)].clone() - f.clone() * ij;
                }
            }
        }
        Ok(inv)
    }

    /// Solves self · x = b.
    pub fn solve(&self, b: &[T]) -> Result<Vec<T>> {
        let n = self.n;
        assert_eq!(b.len(), n);
        let scale = self.max_abs().max(1.0);
        let mut a = self.clone();
        let mut rhs = b.to_vec();
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| a[(i, col)].pivot_score().total_cmp(&a[(j, col)].pivot_score()))
                .ok_or(Error::Singular)?;
            if a[(pivot, col)].is_negligible(scale) {
                return Err(Error::Singular);
            }
            a.swap_rows(pivot, col);
            rhs.swap(pivot, col);
            for i in col + 1..n {
                if a[(i, col)].is_zero() {
                    continue;
                }
                let f = a[(i, col)].clone() / a[(col, col)].clone();
                for j in col..n {
                    let v = a[(col, j)].clone();
                    a[(i, j)] = a[(i, j)].clone() - f.clone() * v;
                }
                let r = rhs[col].clone();
                rhs[i] = rhs[i].clone() - f * r;
            }
        }
        let mut x = vec![T::zero(); n];
        for i in (0..n).rev() {
            let mut s = rhs[i].clone();
            for j in i + 1..n {
                s = s - a[(i, j)].clone() * x[j].clone();
            }
            x[i] = s / a[(i, i)].clone();
        }
        Ok(x)
    }

    pub fn swap_rows(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for c in 0..self.n {
            self.data.swap(i * self.n + c, j * self.n + c);
        }
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> DenseMatrix<U> {
        DenseMatrix { n: self.n, data: self.data.iter().map(f).collect() }
    }
}

impl<T> std::ops::Index<(usize, usize)> for DenseMatrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.n + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for DenseMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.n + j]
    }
}

pub fn det_partial_pivot(m: &DenseMatrix<f64>) -> f64 {
    let n = m.order();
    let mut a = m.clone();
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[(i, col)].abs().total_cmp(&a[(j, col)].abs()))
            .unwrap();
        if a[(pivot, col)] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            a.swap_rows(pivot, col);
            det = -det;
        }
        let p = a[(col, col)];
        det *= p;
        for i in col + 1..n {
            let f = a[(i, col)] / p;
            if f == 0.0 {
                continue;
            }
            for j in col..n {
                a[(i, j)] -= f * a[(col, j)];
            }
        }
    }
    det
}

/// Exact determinant: rows are cleared of denominators, then Bareiss
/// fraction-free elimination runs over the integers.
pub fn det_fraction_free(m: &DenseMatrix<Rational>) -> Rational {
    let n = m.order();
    if n == 0 {
        return Rational::one();
    }
    let mut scale = BigInt::one();
    let mut a: Vec<Vec<BigInt>> = Vec::with_capacity(n);
    for i in 0..n {
        let l = m.row(i).iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
        scale *= &l;
        a.push(m.row(i).iter().map(|x| x.numer() * (&l / x.denom())).collect());
    }
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(i, k);
                    sign = -sign;
                }
                None => return Rational::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    let det = sign * &a[n - 1][n - 1];
    Rational::new(det, scale)
}

/// Gaussian-elimination determinant that works for any scalar; kept as an
/// independent route for cross-checks.
pub fn det_gauss<T: Scalar>(m: &DenseMatrix<T>) -> T {
    let n = m.order();
    let mut a = m.clone();
    let mut det = T::one();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[(i, col)].pivot_score().total_cmp(&a[(j, col)].pivot_score()))
            .unwrap();
        if a[(pivot, col)].is_zero() {
            return T::zero();
        }
        if pivot != col {
            a.swap_rows(pivot, col);
            det = -det;
        }
        let p = a[(col, col)].clone();
        det = det * p.clone();
        for i in col + 1..n {
            let f = a[(i, col)].clone() / p.clone();
            if f.is_zero() {
                continue;
            }
            for j in col..n {
                let v = a[(col, j)].clone();
                a[(i, j)] = a[(i, j)].clone() - f.clone() * v;
            }
        }
    }
    det
}
