//! Closed-form objectives used as optimizer inputs and test oracles.

use ndarray::{Array1, ArrayView1};

use crate::error::{Error, Result};

use super::{gaussian_moment, MomentObjective};

/// Exact directional moment of a standard gaussian: c_m ||u||^m.
///
/// Its centered counterpart is identically zero, so this models the raw
/// functional only; it exists to pin the optimizer and the estimators to an
/// input whose derivatives are known in closed form.
pub struct AnalyticGaussian {
    dim: usize,
    degree: u32,
}

impl AnalyticGaussian {
    pub fn new(dim: usize, degree: u32) -> Self {
        AnalyticGaussian { dim, degree }
    }
}

impl MomentObjective for AnalyticGaussian {
    fn dim(&self) -> usize {
        self.dim
    }

    fn degree(&self) -> u32 {
        self.degree
    }

    fn value(&self, u: &ArrayView1<f64>) -> Result<f64> {
        let c = gaussian_moment(self.degree);
        if c == 0.0 {
            return Ok(0.0);
        }
        Ok(c * u.dot(u).powi(self.degree as i32 / 2))
    }

    fn gradient(&self, u: &ArrayView1<f64>) -> Result<Array1<f64>> {
        let c = gaussian_moment(self.degree);
        if c == 0.0 {
            return Ok(Array1::zeros(self.dim));
        }
        let m = self.degree as f64;
        let scale = c * m * u.dot(u).powi(self.degree as i32 / 2 - 1);
        Ok(u.mapv(|x| scale * x))
    }

    fn hessian_apply(&self, u: &ArrayView1<f64>, w: &ArrayView1<f64>) -> Result<Array1<f64>> {
        let c = gaussian_moment(self.degree);
        if c == 0.0 {
            return Ok(Array1::zeros(self.dim));
        }
        let m = self.degree;
        let nn2 = u.dot(u);
        let a = if m > 2 {
            c * (m * (m - 2)) as f64 * nn2.powi(m as i32 / 2 - 2) * u.dot(w)
        } else {
            0.0
        };
        let b = c * m as f64 * nn2.powi(m as i32 / 2 - 1);
        Ok(Array1::from_shape_fn(self.dim, |i| a * u[i] + b * w[i]))
    }
}

/// Separable polynomial sum_i a_i u_i^m.
///
/// This is exactly the shape a centered moment functional takes on a product
/// of independent coordinates: each axis contributes its own excess over the
/// gaussian moment. Local maxima on the sphere sit on axes with a_i > 0,
/// which makes this the reference landscape for optimizer tests.
pub struct AxisPolynomial {
    coeffs: Vec<f64>,
    degree: u32,
}

impl AxisPolynomial {
    pub fn new(coeffs: Vec<f64>, degree: u32) -> Result<Self> {
        if degree == 0 {
            return Err(Error::Config("degree must be at least 1".into()));
        }
        if coeffs.is_empty() {
            return Err(Error::Config("need at least one coefficient".into()));
        }
        Ok(AxisPolynomial { coeffs, degree })
    }
}

impl MomentObjective for AxisPolynomial {
    fn dim(&self) -> usize {
        self.coeffs.len()
    }

    fn degree(&self) -> u32 {
        self.degree
    }

    fn value(&self, u: &ArrayView1<f64>) -> Result<f64> {
        let mi = self.degree as i32;
        Ok(self
            .coeffs
            .iter()
            .zip(u.iter())
            .map(|(a, x)| a * x.powi(mi))
            .sum())
    }

    fn gradient(&self, u: &ArrayView1<f64>) -> Result<Array1<f64>> {
        let m = self.degree as f64;
        let mi = self.degree as i32;
        Ok(Array1::from_shape_fn(self.coeffs.len(), |i| {
            m * self.coeffs[i] * u[i].powi(mi - 1)
        }))
    }

    fn hessian_apply(&self, u: &ArrayView1<f64>, w: &ArrayView1<f64>) -> Result<Array1<f64>> {
        if self.degree == 1 {
            return Ok(Array1::zeros(self.coeffs.len()));
        }
        let m = self.degree;
        let mi = m as i32;
        let scale = (m * (m - 1)) as f64;
        Ok(Array1::from_shape_fn(self.coeffs.len(), |i| {
            scale * self.coeffs[i] * u[i].powi(mi - 2) * w[i]
        }))
    }
}

/// Finite-difference oracle: derivatives of any objective computed from its
/// values alone, used to cross-check hand-written gradients and Hessians.
pub struct DiffObjective<F> {
    inner: F,
    step: f64,
}

impl<F: MomentObjective> DiffObjective<F> {
    pub fn new(inner: F, step: f64) -> Self {
        DiffObjective { inner, step }
    }

    fn value_at(&self, base: &ArrayView1<f64>, offsets: &[(usize, f64)]) -> Result<f64> {
        let mut u = base.to_owned();
        for (i, d) in offsets {
            u[*i] += d;
        }
        self.inner.value(&u.view())
    }
}

impl<F: MomentObjective> MomentObjective for DiffObjective<F> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn degree(&self) -> u32 {
        self.inner.degree()
    }

    fn value(&self, u: &ArrayView1<f64>) -> Result<f64> {
        self.inner.value(u)
    }

    fn gradient(&self, u: &ArrayView1<f64>) -> Result<Array1<f64>> {
        let h = self.step;
        let mut g = Array1::zeros(self.dim());
        for i in 0..self.dim() {
            let plus = self.value_at(u, &[(i, h)])?;
            let minus = self.value_at(u, &[(i, -h)])?;
            g[i] = (plus - minus) / (2.0 * h);
        }
        Ok(g)
    }

    fn hessian_apply(&self, u: &ArrayView1<f64>, w: &ArrayView1<f64>) -> Result<Array1<f64>> {
        let h = self.step;
        let d = self.dim();
        let mut out = Array1::zeros(d);
        for i in 0..d {
            let mut acc = 0.0;
            for j in 0..d {
                if w[j] == 0.0 {
                    continue;
                }
                let pp = self.value_at(u, &[(i, h), (j, h)])?;
                let pm = self.value_at(u, &[(i, h), (j, -h)])?;
                let mp = self.value_at(u, &[(i, -h), (j, h)])?;
                let mm = self.value_at(u, &[(i, -h), (j, -h)])?;
                acc += w[j] * (pp - pm - mp + mm) / (4.0 * h * h);
            }
            out[i] = acc;
        }
        Ok(out)
    }
}
