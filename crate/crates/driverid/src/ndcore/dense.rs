//! Dense (affine) projection applied per timestep row.

use ndarray::linalg::general_mat_mul;
use ndarray::{Array1, Array2, Axis};
use rand::Rng;

use super::NdError;

/// `y = x W^T + b` over rows of `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseParams {
    /// `out_dim x in_dim`
    w: Array2<f64>,
    b: Array1<f64>,
}

#[derive(Debug, Clone)]
pub struct DenseGrads {
    pub w: Array2<f64>,
    pub b: Array1<f64>,
}

impl DenseParams {
    pub fn zeros(in_dim: usize, out_dim: usize) -> Self {
        Self { w: Array2::zeros((out_dim, in_dim)), b: Array1::zeros(out_dim) }
    }

    /// Seeded uniform initialization in `[-bound, +bound]`, zero bias.
    pub fn init<R: Rng>(in_dim: usize, out_dim: usize, bound: f64, rng: &mut R) -> Self {
        let mut p = Self::zeros(in_dim, out_dim);
        p.w.mapv_inplace(|_| rng.random_range(-bound..=bound));
        p
    }

    pub fn from_parts(w: Array2<f64>, b: Array1<f64>) -> Result<Self, NdError> {
        if w.nrows() != b.len() {
            return Err(NdError::Shape(format!(
                "weight rows {} do not match bias length {}",
                w.nrows(),
                b.len()
            )));
        }
        Ok(Self { w, b })
    }

    pub fn in_dim(&self) -> usize {
        self.w.ncols()
    }

    pub fn out_dim(&self) -> usize {
        self.w.nrows()
    }

    pub fn weights(&self) -> &Array2<f64> {
        &self.w
    }

    pub fn bias(&self) -> &Array1<f64> {
        &self.b
    }

    /// `x: n x in_dim` -> `n x out_dim`.
    pub fn forward(&self, x: &Array2<f64>) -> Array2<f64> {
        let mut y = Array2::zeros((x.nrows(), self.out_dim()));
        general_mat_mul(1.0, x, &self.w.t(), 0.0, &mut y);
        y += &self.b;
        y
    }

    /// Gradients from upstream `dy` (`n x out_dim`); returns `(param grads, dx)`.
    pub fn backward(&self, x: &Array2<f64>, dy: &Array2<f64>) -> (DenseGrads, Array2<f64>) {
        let mut w = Array2::zeros(self.w.dim());
        general_mat_mul(1.0, &dy.t(), x, 0.0, &mut w);
        let b = dy.sum_axis(Axis(0));
        let mut dx = Array2::zeros(x.dim());
        general_mat_mul(1.0, dy, &self.w, 0.0, &mut dx);
        (DenseGrads { w, b }, dx)
    }

    pub fn param_slices(&self) -> Vec<&[f64]> {
        vec![
            self.w.as_slice().expect("standard layout"),
            self.b.as_slice().expect("standard layout"),
        ]
    }

    pub fn param_slices_mut(&mut self) -> Vec<&mut [f64]> {
        vec![
            self.w.as_slice_mut().expect("standard layout"),
            self.b.as_slice_mut().expect("standard layout"),
        ]
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.param_slices().concat()
    }

    pub fn assign_from_flat(&mut self, flat: &[f64]) -> Result<(), NdError> {
        let total = self.w.len() + self.b.len();
        if flat.len() != total {
            return Err(NdError::Shape(format!(
                "flat vector has {} entries, parameters need {total}",
                flat.len()
            )));
        }
        let split = self.w.len();
        self.w
            .as_slice_mut()
            .expect("standard layout")
            .copy_from_slice(&flat[..split]);
        self.b
            .as_slice_mut()
            .expect("standard layout")
            .copy_from_slice(&flat[split..]);
        Ok(())
    }
}

impl DenseGrads {
    pub fn param_slices(&self) -> Vec<&[f64]> {
        vec![
            self.w.as_slice().expect("standard layout"),
            self.b.as_slice().expect("standard layout"),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ndcore::finite_diff_grad;
    use ndarray::array;

    #[test]
    fn forward_affine() {
        let p = DenseParams::from_parts(array![[1.0, 2.0], [0.0, -1.0]], array![0.5, 0.0]).unwrap();
        let y = p.forward(&array![[3.0, 4.0]]);
        assert_eq!(y, array![[11.5, -4.0]]);
    }

    #[test]
    fn backward_matches_finite_differences() {
        let p = DenseParams::from_parts(array![[0.3, -0.7], [1.1, 0.2]], array![0.1, -0.4]).unwrap();
        let x = array![[0.5, 2.0], [-1.0, 0.25]];
        // loss = weighted sum of outputs
        let wgt = array![[1.0, -2.0], [0.5, 3.0]];

        let (grads, dx) = p.backward(&x, &wgt);
        let analytic: Vec<f64> = grads.param_slices().concat();

        let numeric = finite_diff_grad(
            |f| {
                let mut q = p.clone();
                q.assign_from_flat(f).unwrap();
                (q.forward(&x) * &wgt).sum()
            },
            &p.flatten(),
            1e-6,
        );
        for (a, n) in analytic.iter().zip(&numeric) {
            assert!((a - n).abs() < 1e-6);
        }

        let numeric_x = finite_diff_grad(
            |f| {
                let xv = Array2::from_shape_vec((2, 2), f.to_vec()).unwrap();
                (p.forward(&xv) * &wgt).sum()
            },
            x.as_slice().unwrap(),
            1e-6,
        );
        for (a, n) in dx.as_slice().unwrap().iter().zip(&numeric_x) {
            assert!((a - n).abs() < 1e-6);
        }
    }
}
