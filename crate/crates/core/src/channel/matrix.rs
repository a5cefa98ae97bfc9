use std::fmt;

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Dense row-major complex matrix.
///
/// Row vectors (`1×M` channels such as the direct link or the effective
/// gain) are stored as single-row matrices so that every link shares one type.
#[derive(Clone, PartialEq)]
pub struct ChannelMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Scalar> ChannelMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ChannelMatrix {
            rows,
            cols,
            data: vec![Complex::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Complex::new(T::one(), T::zero());
        }
        m
    }

    /// Builds a matrix from row-major entries, rejecting a wrong entry
    /// count or non-finite values.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex<T>>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::shape(
                "ChannelMatrix::from_vec",
                format!("{} entries ({rows}x{cols})", rows * cols),
                format!("{} entries", data.len()),
            ));
        }
        let m = ChannelMatrix { rows, cols, data };
        if !m.is_finite() {
            return Err(Error::InvalidParameter("channel matrix entries must be finite".into()));
        }
        Ok(m)
    }

    pub fn row_vector(data: Vec<Complex<T>>) -> Self {
        ChannelMatrix {
            rows: 1,
            cols: data.len(),
            data,
        }
    }

    pub fn diag(entries: &[Complex<T>]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, e) in entries.iter().enumerate() {
            m.data[i * n + i] = *e;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex<T> {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Complex<T>) {
        self.data[r * self.cols + c] = v;
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [Complex<T>] {
        &mut self.data
    }

    pub fn row(&self, r: usize) -> &[Complex<T>] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|z| z.is_zero())
    }

    /// Squared Frobenius norm (squared Euclidean norm for vectors).
    pub fn norm_sqr(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        ChannelMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| *z * s).collect(),
        }
    }

    pub fn matmul(&self, rhs: &ChannelMatrix<T>) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::shape(
                "matmul",
                format!("{} rows on the right", self.cols),
                format!("{}x{}", rhs.rows, rhs.cols),
            ));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a.is_zero() {
                    continue;
                }
                let rhs_row = rhs.row(k);
                let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (o, b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * *b;
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, rhs: &ChannelMatrix<T>) -> Result<Self> {
        if self.shape() != rhs.shape() {
            return Err(Error::shape(
                "add",
                format!("{}x{}", self.rows, self.cols),
                format!("{}x{}", rhs.rows, rhs.cols),
            ));
        }
        Ok(ChannelMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| *a + *b).collect(),
        })
    }

    /// Matrix-vector product `self · w` with `w` read as a column.
    pub fn apply(&self, w: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        if w.len() != self.cols {
            return Err(Error::shape(
                "apply",
                format!("vector of length {}", self.cols),
                format!("length {}", w.len()),
            ));
        }
        Ok((0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(w)
                    .fold(Complex::zero(), |acc, (a, b)| acc + *a * *b)
            })
            .collect())
    }
}

impl<T: Scalar> fmt::Debug for ChannelMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ChannelMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            if r > 0 {
                write!(f, "; ")?;
            }
            for c in 0..self.cols {
                let z = self.get(r, c);
                if c > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}{:+}j", z.re, z.im)?;
            }
        }
        write!(f, "]")
    }
}
