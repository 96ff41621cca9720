use super::Real;

/// Dense row-major matrix; vectors are `len x 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor<F> {
    rows: usize,
    cols: usize,
    data: Vec<F>,
}

impl<F: Real> Tensor<F> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Tensor {
            rows,
            cols,
            data: vec![F::zero(); rows * cols],
        }
    }

    pub fn vector(len: usize) -> Self {
        Tensor::zeros(len, 1)
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<F>) -> Self {
        assert_eq!(data.len(), rows * cols, "tensor data length mismatch");
        Tensor { rows, cols, data }
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

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> F {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: F) {
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[F] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [F] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[F] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [F] {
        &mut self.data
    }

    pub fn fill(&mut self, v: F) {
        self.data.iter_mut().for_each(|x| *x = v);
    }

    /// `y = A x` for an `rows x cols` matrix and `cols`-vector.
    pub fn matvec(&self, x: &[F]) -> Vec<F> {
        debug_assert_eq!(x.len(), self.cols);
        let mut y = vec![F::zero(); self.rows];
        for (r, y_r) in y.iter_mut().enumerate() {
            let row = self.row(r);
            let mut acc = F::zero();
            for (w, xi) in row.iter().zip(x) {
                acc += *w * *xi;
            }
            *y_r = acc;
        }
        y
    }

    /// `y = A^T x` for an `rows x cols` matrix and `rows`-vector.
    pub fn t_matvec(&self, x: &[F]) -> Vec<F> {
        debug_assert_eq!(x.len(), self.rows);
        let mut y = vec![F::zero(); self.cols];
        for (row, &xr) in (0..self.rows).map(|r| self.row(r)).zip(x) {
            for (yi, w) in y.iter_mut().zip(row) {
                *yi += *w * xr;
            }
        }
        y
    }

    /// Rank-one accumulation `A += scale * u v^T`.
    pub fn add_outer(&mut self, u: &[F], v: &[F], scale: F) {
        debug_assert_eq!(u.len(), self.rows);
        debug_assert_eq!(v.len(), self.cols);
        for (r, ui) in u.iter().enumerate() {
            let ur = *ui * scale;
            let row = self.row_mut(r);
            for (w, vi) in row.iter_mut().zip(v) {
                *w += ur * *vi;
            }
        }
    }

    pub fn add_scaled(&mut self, other: &Tensor<F>, scale: F) {
        debug_assert_eq!(self.shape(), other.shape());
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += *b * scale;
        }
    }
}
