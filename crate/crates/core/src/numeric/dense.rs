use nalgebra::DMatrix;
use num_complex::Complex;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::scalar::{cabs, cplx, cplx_f, Real, C64};

/// Square complex matrix stored row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CMatrix<T> {
    n: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        CMatrix { n, data: vec![Complex::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = Complex::one();
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        CMatrix { n, data }
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        Self::from_fn(n, |i, j| Complex::new(T::of(rows[i][j]), T::zero()))
    }

    pub fn from_c64(m: &CMatrix<f64>) -> Self {
        Self::from_fn(m.n, |i, j| cplx(m[(i, j)]))
    }

    pub fn to_c64(&self) -> CMatrix<f64> {
        CMatrix::from_fn(self.n, |i, j| cplx_f(self[(i, j)]))
    }

    pub fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_fn(self.n, self.n, |i, j| cplx_f(self[(i, j)]))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[Complex<T>] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn col(&self, j: usize) -> Vec<Complex<T>> {
        (0..self.n).map(|i| self[(i, j)]).collect()
    }

    pub fn matmul(&self, other: &Self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = other.data[k * n + j];
                    out.data[i * n + j] = out.data[i * n + j] + a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        (0..self.n)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(Complex::zero(), |acc, (a, b)| acc + *a * *b)
            })
            .collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Complex<T>, Complex<T>) -> Complex<T>) -> Self {
        CMatrix {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| f(*a, *b)).collect(),
        }
    }

    pub fn scale(&self, c: Complex<T>) -> Self {
        CMatrix { n: self.n, data: self.data.iter().map(|a| *a * c).collect() }
    }

    /// `self - lambda * I`.
    pub fn shift(&self, lambda: Complex<T>) -> Self {
        let mut m = self.clone();
        for i in 0..self.n {
            m.data[i * self.n + i] = m.data[i * self.n + i] - lambda;
        }
        m
    }

    pub fn axpy(&mut self, c: Complex<T>, other: &Self) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a = *a + c * *b;
        }
    }

    /// Induced 1-norm (maximum column sum), evaluated in f64.
    pub fn norm1(&self) -> f64 {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| cabs(self[(i, j)])).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn norm_fro(&self) -> f64 {
        self.data.iter().map(|a| cabs(*a).powi(2)).sum::<f64>().sqrt()
    }

    /// Spectral norm via an f64 SVD.
    pub fn norm2(&self) -> f64 {
        self.singular_values().first().copied().unwrap_or(0.0)
    }

    /// Singular values in decreasing order (f64).
    pub fn singular_values(&self) -> Vec<f64> {
        if self.n == 0 {
            return Vec::new();
        }
        let scale = self.data.iter().map(|a| cabs(*a)).fold(0.0, f64::max);
        if scale == 0.0 {
            return vec![0.0; self.n];
        }
        let m = self.to_nalgebra() / Complex::new(scale, 0.0);
        let mut s: Vec<f64> = m.singular_values().iter().map(|x| x * scale).collect();
        s.sort_by(|a, b| b.partial_cmp(a).unwrap());
        s
    }

    pub fn lu(&self) -> Option<Lu<T>> {
        Lu::factor(self)
    }
}

impl<T> std::ops::Index<(usize, usize)> for CMatrix<T> {
    type Output = Complex<T>;
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.n + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for CMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.n + j]
    }
}

/// LU factorization with partial pivoting.
#[derive(Clone, Debug)]
pub struct Lu<T> {
    lu: CMatrix<T>,
    perm: Vec<usize>,
    /// Smallest pivot modulus relative to the largest.
    pub pivot_ratio: f64,
}

impl<T: Real> Lu<T> {
    fn factor(a: &CMatrix<T>) -> Option<Self> {
        let n = a.n;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let (mut pmin, mut pmax) = (f64::INFINITY, 0.0f64);
        for k in 0..n {
            let (p, mag) = (k..n)
                .map(|i| (i, cabs(lu[(i, k)])))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if mag == 0.0 || !mag.is_finite() {
                return None;
            }
            pmin = pmin.min(mag);
            pmax = pmax.max(mag);
            if p != k {
                for j in 0..n {
                    lu.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let piv = lu[(k, k)];
            for i in k + 1..n {
                let l = lu[(i, k)] / piv;
                lu[(i, k)] = l;
                if l.is_zero() {
                    continue;
                }
                for j in k + 1..n {
                    let u = lu[(k, j)];
                    lu[(i, j)] = lu[(i, j)] - l * u;
                }
            }
        }
        let pivot_ratio = if n == 0 { 1.0 } else { pmin / pmax };
        Some(Lu { lu, perm, pivot_ratio })
    }

    pub fn solve(&self, b: &[Complex<T>]) -> Vec<Complex<T>> {
        let n = self.lu.n;
        let mut x: Vec<Complex<T>> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s = s - self.lu[(i, j)] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s = s - self.lu[(i, j)] * x[j];
            }
            x[i] = s / self.lu[(i, i)];
        }
        x
    }

    pub fn inverse(&self) -> CMatrix<T> {
        let n = self.lu.n;
        let mut inv = CMatrix::zeros(n);
        for j in 0..n {
            let mut e = vec![Complex::zero(); n];
            e[j] = Complex::one();
            let col = self.solve(&e);
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        inv
    }
}

pub fn vec_norm<T: Real>(v: &[Complex<T>]) -> f64 {
    v.iter().map(|a| cabs(*a).powi(2)).sum::<f64>().sqrt()
}
