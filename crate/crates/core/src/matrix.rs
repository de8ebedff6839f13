use crate::error::{Error, Result};

/// Dense real matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n_rows: usize,
    n_cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Builds a matrix from row-major entries, rejecting non-finite values.
    pub fn new(n_rows: usize, n_cols: usize, data: Vec<f64>) -> Result<Self> {
        if n_rows == 0 || n_cols == 0 {
            return Err(Error::param("dims", "matrix dimensions must be at least 1"));
        }
        if data.len() != n_rows * n_cols {
            return Err(Error::Shape {
                expected: n_rows * n_cols,
                found: data.len(),
            });
        }
        if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::Data(format!(
                "non-finite entry at ({}, {})",
                pos / n_cols,
                pos % n_cols
            )));
        }
        Ok(Self {
            n_rows,
            n_cols,
            data,
        })
    }

    pub(crate) fn from_raw(n_rows: usize, n_cols: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), n_rows * n_cols);
        Self {
            n_rows,
            n_cols,
            data,
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::Data("ragged rows".into()));
        }
        Self::new(n_rows, n_cols, rows.concat())
    }

    pub fn from_fn(n_rows: usize, n_cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for i in 0..n_rows {
            for j in 0..n_cols {
                data.push(f(i, j));
            }
        }
        Self::from_raw(n_rows, n_cols, data)
    }

    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self::from_raw(n_rows, n_cols, vec![0.0; n_rows * n_cols])
    }

    pub fn ones(n_rows: usize, n_cols: usize) -> Self {
        Self::from_raw(n_rows, n_cols, vec![1.0; n_rows * n_cols])
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| if i == j { values[i] } else { 0.0 })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n_cols + j]
    }

    /// Row `i`, the vector `R_i`.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.n_cols)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n_rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n_cols, self.n_rows, |i, j| self.get(j, i))
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self::from_raw(
            self.n_rows,
            self.n_cols,
            self.data.iter().map(|x| c * x).collect(),
        )
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// `out = M x`.
    pub fn mul_vec_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n_cols);
        for (o, row) in out.iter_mut().zip(self.rows()) {
            *o = dot(row, x);
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_rows];
        self.mul_vec_into(x, &mut out);
        out
    }

    /// `out = Mᵀ y`.
    pub fn tmul_vec_into(&self, y: &[f64], out: &mut [f64]) {
        debug_assert_eq!(y.len(), self.n_rows);
        out.iter_mut().for_each(|o| *o = 0.0);
        for (&yi, row) in y.iter().zip(self.rows()) {
            for (o, &m) in out.iter_mut().zip(row) {
                *o += yi * m;
            }
        }
    }

    /// Gram matrix of the smaller side: `MᵀM` when `n_cols <= n_rows`,
    /// otherwise `MMᵀ`. Both share the nonzero spectrum. Returned row-major.
    pub(crate) fn small_gram(&self) -> (usize, Vec<f64>) {
        if self.n_cols <= self.n_rows {
            let n = self.n_cols;
            let mut g = vec![0.0; n * n];
            for row in self.rows() {
                for p in 0..n {
                    let rp = row[p];
                    if rp == 0.0 {
                        continue;
                    }
                    let gp = &mut g[p * n..p * n + n];
                    for q in p..n {
                        gp[q] += rp * row[q];
                    }
                }
            }
            symmetrize_upper(&mut g, n);
            (n, g)
        } else {
            let n = self.n_rows;
            let mut g = vec![0.0; n * n];
            for p in 0..n {
                for q in p..n {
                    g[p * n + q] = dot(self.row(p), self.row(q));
                }
            }
            symmetrize_upper(&mut g, n);
            (n, g)
        }
    }
}

fn symmetrize_upper(g: &mut [f64], n: usize) {
    for p in 0..n {
        for q in 0..p {
            g[p * n + q] = g[q * n + p];
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite() {
        assert!(matches!(
            Matrix::new(1, 2, vec![1.0, f64::NAN]),
            Err(Error::Data(_))
        ));
        assert!(Matrix::new(1, 2, vec![1.0]).is_err());
        assert!(Matrix::new(0, 2, vec![]).is_err());
    }

    #[test]
    fn products_agree_with_transpose() {
        let m = Matrix::from_rows(&[vec![1.0, -2.0, 0.5], vec![3.0, 4.0, -1.0]]).unwrap();
        let y = [0.3, -0.7];
        let mut a = vec![0.0; 3];
        m.tmul_vec_into(&y, &mut a);
        assert_eq!(a, m.transpose().mul_vec(&y));
        let (n, g) = m.small_gram();
        assert_eq!(n, 2);
        assert_eq!(g, vec![1.0 + 4.0 + 0.25, 3.0 - 8.0 - 0.5, 3.0 - 8.0 - 0.5, 9.0 + 16.0 + 1.0]);
    }
}
