//! Dense row-major matrices over `f64`.
//!
//! Every reduction runs in a fixed order (single accumulator, ascending
//! index over the shared dimension), so results are bit-deterministic and
//! batched operations match their per-vector counterparts exactly.

use crate::error::{Error, Result};

/// Dense matrix, row-major storage.
#[derive(Clone, Debug, PartialEq)]
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

    /// Build from a row-major buffer; `data.len()` must equal `rows * cols`.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::shape(
                "Matrix::from_vec",
                format!("{rows}x{cols}"),
                format!("{} elements", data.len()),
            ));
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Build from equal-length rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Error::shape(
                    "Matrix::from_rows",
                    format!("row 0 has {cols} cols"),
                    format!("row {i} has {} cols", r.len()),
                ));
            }
            data.extend_from_slice(r);
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
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

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Standard matrix product. Each output cell accumulates over the shared
    /// dimension in ascending order with a single accumulator.
    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::shape(
                "matmul",
                format!("{}x{}", self.rows, self.cols),
                format!("{}x{}", other.rows, other.cols),
            ));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..other.cols {
                let mut acc = 0.0;
                for j in 0..self.cols {
                    acc += self.data[i * self.cols + j] * other.data[j * other.cols + k];
                }
                out.data[i * other.cols + k] = acc;
            }
        }
        Ok(out)
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        out
    }

    /// `self * x` for a column vector `x`.
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if self.cols != x.len() {
            return Err(Error::shape(
                "matvec",
                format!("{}x{}", self.rows, self.cols),
                format!("vector of len {}", x.len()),
            ));
        }
        let mut out = vec![0.0; self.rows];
        for i in 0..self.rows {
            let mut acc = 0.0;
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            for j in 0..self.cols {
                acc += row[j] * x[j];
            }
            out[i] = acc;
        }
        Ok(out)
    }

    /// `transpose(self) * y` without materializing the transpose.
    /// Accumulation order matches `self.transpose().matvec(y)` bit for bit.
    pub fn matvec_t(&self, y: &[f64]) -> Result<Vec<f64>> {
        if self.rows != y.len() {
            return Err(Error::shape(
                "matvec_t",
                format!("{}x{} transposed", self.rows, self.cols),
                format!("vector of len {}", y.len()),
            ));
        }
        let mut out = vec![0.0; self.cols];
        for j in 0..self.cols {
            let mut acc = 0.0;
            for i in 0..self.rows {
                acc += self.data[i * self.cols + j] * y[i];
            }
            out[j] = acc;
        }
        Ok(out)
    }

    /// `self += s * other`, elementwise.
    pub fn add_scaled(&mut self, other: &Matrix, s: f64) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::shape(
                "add_scaled",
                format!("{}x{}", self.rows, self.cols),
                format!("{}x{}", other.rows, other.cols),
            ));
        }
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
        Ok(())
    }

    pub fn scale(&mut self, s: f64) {
        for v in &mut self.data {
            *v *= s;
        }
    }
}

/// Outer product `a * b^T` as an `a.len() x b.len()` matrix.
pub fn outer(a: &[f64], b: &[f64]) -> Matrix {
    let mut out = Matrix::zeros(a.len(), b.len());
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate() {
            out.set(i, j, ai * bj);
        }
    }
    out
}

/// `a += s * b`, elementwise, for equal-length slices.
pub fn axpy(a: &mut [f64], b: &[f64], s: f64) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::shape(
            "axpy",
            format!("len {}", a.len()),
            format!("len {}", b.len()),
        ));
    }
    for (x, y) in a.iter_mut().zip(b) {
        *x += s * y;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matmul_identity() {
        let m = Matrix::from_rows(&[vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0], vec![7.0, 8.0, 9.0]])
            .unwrap();
        let i3 = Matrix::identity(3);
        assert_eq!(i3.matmul(&m).unwrap(), m);
        assert_eq!(m.matmul(&i3).unwrap(), m);
    }

    #[test]
    fn matmul_hand_case() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let b = Matrix::from_rows(&[vec![1.0], vec![1.0]]).unwrap();
        let c = a.matmul(&b).unwrap();
        assert_eq!(c.shape(), (2, 1));
        assert_eq!(c.data(), &[3.0, 7.0]);
    }

    #[test]
    fn matmul_dim_mismatch_names_shapes() {
        let a = Matrix::zeros(2, 3);
        let b = Matrix::zeros(4, 2);
        let err = a.matmul(&b).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("2x3"), "{msg}");
        assert!(msg.contains("4x2"), "{msg}");
    }

    #[test]
    fn transpose_hand_case() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let t = a.transpose();
        assert_eq!(t.data(), &[1.0, 3.0, 2.0, 4.0]);
    }

    #[test]
    fn transpose_involution() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]]).unwrap();
        assert_eq!(a.transpose().transpose(), a);
    }

    #[test]
    fn transpose_row_to_column() {
        let a = Matrix::from_vec(1, 4, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let t = a.transpose();
        assert_eq!(t.shape(), (4, 1));
        assert_eq!(t.data(), a.data());
    }

    #[test]
    fn matvec_t_matches_explicit_transpose() {
        let a = Matrix::from_rows(&[vec![1.5, -2.0, 0.25], vec![3.0, 4.0, -1.0]]).unwrap();
        let y = [0.5, -0.75];
        let via_t = a.transpose().matvec(&y).unwrap();
        let direct = a.matvec_t(&y).unwrap();
        // bit-exact, not approximate
        assert_eq!(via_t, direct);
    }

    #[test]
    fn from_vec_rejects_bad_length() {
        assert!(Matrix::from_vec(2, 2, vec![1.0, 2.0, 3.0]).is_err());
    }
}
