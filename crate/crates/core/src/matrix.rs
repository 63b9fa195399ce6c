//! Small dense complex matrices for block definitions and unitary checks.

use num_complex::Complex64;

/// Row-major square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl Matrix {
    pub fn zeros(dim: usize) -> Matrix {
        Matrix {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Matrix {
        let mut m = Matrix::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Builds a monomial matrix: column `c` has a single entry `phase` in row
    /// `row` where `(row, phase) = f(c)`.
    pub fn monomial(dim: usize, f: impl Fn(usize) -> (usize, Complex64)) -> Matrix {
        let mut m = Matrix::zeros(dim);
        for col in 0..dim {
            let (row, phase) = f(col);
            m[(row, col)] = phase;
        }
        m
    }

    pub fn diagonal_from(entries: &[Complex64]) -> Matrix {
        Matrix::monomial(entries.len(), |c| (c, entries[c]))
    }

    pub fn from_columns(columns: &[Vec<Complex64>]) -> Matrix {
        let dim = columns.len();
        let mut m = Matrix::zeros(dim);
        for (c, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), dim, "column length must equal column count");
            for (r, &v) in col.iter().enumerate() {
                m[(r, c)] = v;
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mul(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.dim, rhs.dim);
        let n = self.dim;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> Matrix {
        let n = self.dim;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// max |U·U† − I|.
    pub fn unitarity_error(&self) -> f64 {
        self.mul(&self.adjoint()).max_abs_diff(&Matrix::identity(self.dim))
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.dim).map(|i| self[(i, i)]).collect()
    }

    /// Largest off-diagonal magnitude.
    pub fn off_diagonal_norm(&self) -> f64 {
        let n = self.dim;
        (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| self[(i, j)].norm())
            .fold(0.0, f64::max)
    }

    /// `self` times a scalar.
    pub fn scale(&self, s: Complex64) -> Matrix {
        Matrix {
            dim: self.dim,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    /// Distance to `other` after removing the best global phase, taken from
    /// the largest-magnitude entry of `other`.
    pub fn diff_up_to_phase(&self, other: &Matrix) -> f64 {
        let (idx, _) = other
            .data
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .expect("non-empty matrix");
        let mine = self.data[idx];
        if mine.norm() < 1e-12 {
            return f64::INFINITY;
        }
        let phase = other.data[idx] / mine;
        let phase = phase / phase.norm();
        self.scale(phase).max_abs_diff(other)
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = Complex64;

    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.dim + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.dim + c]
    }
}
