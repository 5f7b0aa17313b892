use rand::Rng;

use crate::Scalar;

/// Dense row-major matrix; vectors are `n x 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueArray<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> ValueArray<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ValueArray { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn vector(len: usize) -> Self {
        Self::zeros(len, 1)
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols, "data length");
        ValueArray { rows, cols, data }
    }

    pub fn uniform<R: Rng>(rows: usize, cols: usize, bound: f64, rng: &mut R) -> Self {
        let data = (0..rows * cols).map(|_| T::of(rng.gen_range(-bound..=bound))).collect();
        ValueArray { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn fill(&mut self, x: T) {
        self.data.iter_mut().for_each(|v| *v = x);
    }

    /// `y += self * x`
    pub fn matvec_acc(&self, x: &[T], y: &mut [T]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(y.len(), self.rows);
        for (r, yr) in y.iter_mut().enumerate() {
            let row = &self.data[r * self.cols..(r + 1) * self.cols];
            let mut acc = T::zero();
            for (w, xv) in row.iter().zip(x) {
                acc += *w * *xv;
            }
            *yr += acc;
        }
    }

    /// `x += self^T * dy`
    pub fn matvec_t_acc(&self, dy: &[T], x: &mut [T]) {
        debug_assert_eq!(dy.len(), self.rows);
        debug_assert_eq!(x.len(), self.cols);
        for (r, &d) in dy.iter().enumerate() {
            if d == T::zero() {
                continue;
            }
            let row = &self.data[r * self.cols..(r + 1) * self.cols];
            for (xv, w) in x.iter_mut().zip(row) {
                *xv += *w * d;
            }
        }
    }

    /// `self += dy * x^T`
    pub fn outer_acc(&mut self, dy: &[T], x: &[T]) {
        debug_assert_eq!(dy.len(), self.rows);
        debug_assert_eq!(x.len(), self.cols);
        for (r, &d) in dy.iter().enumerate() {
            if d == T::zero() {
                continue;
            }
            let row = &mut self.data[r * self.cols..(r + 1) * self.cols];
            for (g, xv) in row.iter_mut().zip(x) {
                *g += d * *xv;
            }
        }
    }

    pub fn add_assign(&mut self, other: &[T]) {
        for (a, b) in self.data.iter_mut().zip(other) {
            *a += *b;
        }
    }

    pub fn sum_squares(&self) -> T {
        self.data.iter().map(|&x| x * x).sum()
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

/// A trainable array with its gradient buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct Param<T> {
    pub name: String,
    pub value: ValueArray<T>,
    pub grad: ValueArray<T>,
    /// Number of equal row blocks (4 for LSTM gate-stacked matrices).
    pub row_blocks: usize,
}

impl<T: Scalar> Param<T> {
    pub fn new(name: impl Into<String>, value: ValueArray<T>) -> Self {
        let grad = ValueArray::zeros(value.rows(), value.cols());
        Param { name: name.into(), value, grad, row_blocks: 1 }
    }

    pub fn gated(mut self) -> Self {
        self.row_blocks = 4;
        self
    }

    pub fn len(&self) -> usize {
        self.value.as_slice().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn zero_grad(&mut self) {
        self.grad.fill(T::zero());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matvec_and_transpose() {
        let w = ValueArray::<f64>::from_vec(2, 3, vec![1., 2., 3., 4., 5., 6.]);
        let mut y = vec![1.0, 0.0];
        w.matvec_acc(&[1., 0., -1.], &mut y);
        assert_eq!(y, vec![-1.0, -2.0]);
        let mut x = vec![0.0; 3];
        w.matvec_t_acc(&[1., 1.], &mut x);
        assert_eq!(x, vec![5., 7., 9.]);
        let mut g = ValueArray::<f64>::zeros(2, 3);
        g.outer_acc(&[1., 2.], &[1., 0., 3.]);
        assert_eq!(g.as_slice(), &[1., 0., 3., 2., 0., 6.]);
    }
}
