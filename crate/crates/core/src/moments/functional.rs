//! Sample-backed moment functionals.
//!
//! Both functionals here are exact empirical means, and their gradients and
//! Hessian products are the exact derivatives of those means, not
//! approximations; the optimizer's line searches rely on that consistency.

use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::dataset::SampleMatrix;
use crate::error::{Error, Result};

use super::{gaussian_moment, MomentObjective};

// Row block for bulk evaluation: small enough that the block's dot products
// against a few hundred directions stay cache resident, so the sample matrix
// is streamed once per batch instead of once per direction.
const ROW_BLOCK: usize = 1024;

/// Empirical directional moment of degree m, optionally with the gaussian
/// value subtracted:
///
/// raw       f(u) = (1/N) sum_i (x_i . u)^m
/// centered  g(u) = f(u) - c_m ||u||^m
///
/// The centered form vanishes identically when the samples are standard
/// normal, which turns "is this direction interesting" into "is g nonzero".
/// Restricting to a frame C projects the samples once up front, so later
/// evaluations cost the same as in the full space.
pub struct MomentFunctional {
    data: Array2<f64>,
    degree: u32,
    centered: bool,
}

impl MomentFunctional {
    fn build(data: Array2<f64>, degree: u32, centered: bool) -> Result<Self> {
        if degree == 0 {
            return Err(Error::Config("moment degree must be at least 1".into()));
        }
        if data.nrows() == 0 {
            return Err(Error::NoSamples);
        }
        Ok(MomentFunctional {
            data,
            degree,
            centered,
        })
    }

    /// f(u) on the raw sample coordinates.
    pub fn raw(s: &SampleMatrix, degree: u32) -> Result<Self> {
        Self::build(s.data().clone(), degree, false)
    }

    /// g(u) on the raw sample coordinates.
    pub fn centered(s: &SampleMatrix, degree: u32) -> Result<Self> {
        Self::build(s.data().clone(), degree, true)
    }

    /// g on coordinates of an orthonormal frame (n-by-d columns): the domain
    /// becomes R^d and evaluations see only the projected samples.
    pub fn centered_in_frame(
        s: &SampleMatrix,
        degree: u32,
        frame: &ArrayView2<f64>,
    ) -> Result<Self> {
        if frame.nrows() != s.dim() {
            return Err(Error::DimensionMismatch {
                expected: s.dim(),
                got: frame.nrows(),
            });
        }
        Self::build(s.coords(frame), degree, true)
    }

    pub fn samples(&self) -> usize {
        self.data.nrows()
    }
}

impl MomentObjective for MomentFunctional {
    fn dim(&self) -> usize {
        self.data.ncols()
    }

    fn degree(&self) -> u32 {
        self.degree
    }

    fn value(&self, u: &ArrayView1<f64>) -> Result<f64> {
        check_dim(self.dim(), u)?;
        let mi = self.degree as i32;
        let nf = self.data.nrows() as f64;
        let dots = self.data.dot(u);
        let mean = dots.iter().map(|d| d.powi(mi)).sum::<f64>() / nf;
        let c = if self.centered {
            let g = gaussian_moment(self.degree);
            if g == 0.0 {
                0.0
            } else {
                // m is even here, so ||u||^m is an integer power of u.u
                g * u.dot(u).powi(mi / 2)
            }
        } else {
            0.0
        };
        Ok(mean - c)
    }

    fn values(&self, dirs: &ArrayView2<f64>) -> Result<Vec<f64>> {
        if dirs.nrows() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: dirs.nrows(),
            });
        }
        let mi = self.degree as i32;
        let nf = self.data.nrows() as f64;
        let mut sums = vec![0.0f64; dirs.ncols()];
        for chunk in self.data.axis_chunks_iter(Axis(0), ROW_BLOCK) {
            let dots = chunk.dot(dirs);
            for (j, col) in dots.columns().into_iter().enumerate() {
                sums[j] += col.iter().map(|d| d.powi(mi)).sum::<f64>();
            }
        }
        let g = if self.centered {
            gaussian_moment(self.degree)
        } else {
            0.0
        };
        Ok(sums
            .iter()
            .enumerate()
            .map(|(j, s)| {
                let c = if g == 0.0 {
                    0.0
                } else {
                    let col = dirs.column(j);
                    g * col.dot(&col).powi(mi / 2)
                };
                s / nf - c
            })
            .collect())
    }

    fn gradient(&self, u: &ArrayView1<f64>) -> Result<Array1<f64>> {
        check_dim(self.dim(), u)?;
        let m = self.degree;
        let mi = m as i32;
        let nf = self.data.nrows() as f64;
        let dots = self.data.dot(u);
        let pw = dots.mapv(|d| d.powi(mi - 1));
        let mut grad = self.data.t().dot(&pw) * (m as f64 / nf);
        if self.centered {
            let g = gaussian_moment(m);
            if g != 0.0 {
                // d/du of c_m (u.u)^{m/2} = c_m m (u.u)^{m/2-1} u
                let scale = g * m as f64 * u.dot(u).powi(mi / 2 - 1);
                grad.zip_mut_with(u, |gi, ui| *gi -= scale * ui);
            }
        }
        Ok(grad)
    }

    fn hessian_apply(&self, u: &ArrayView1<f64>, w: &ArrayView1<f64>) -> Result<Array1<f64>> {
        check_dim(self.dim(), u)?;
        check_dim(self.dim(), w)?;
        let m = self.degree;
        let mi = m as i32;
        let nf = self.data.nrows() as f64;
        if m == 1 {
            return Ok(Array1::zeros(self.dim()));
        }
        let dots = self.data.dot(u);
        let dw = self.data.dot(w);
        let weights = ndarray::Zip::from(&dots)
            .and(&dw)
            .map_collect(|d, t| d.powi(mi - 2) * t);
        let mut h = self.data.t().dot(&weights) * ((m * (m - 1)) as f64 / nf);
        if self.centered {
            let g = gaussian_moment(m);
            if g != 0.0 {
                let nn2 = u.dot(u);
                let uw = u.dot(w);
                let a = if m > 2 {
                    g * (m * (m - 2)) as f64 * nn2.powi(mi / 2 - 2) * uw
                } else {
                    0.0
                };
                let b = g * m as f64 * nn2.powi(mi / 2 - 1);
                ndarray::Zip::from(&mut h).and(u).and(w).for_each(|hi, ui, wi| {
                    *hi -= a * ui + b * wi;
                });
            }
        }
        Ok(h)
    }
}

/// Empirical cross moment between a free direction and fixed directions:
///
/// g(s) = (1/N) sum_i (y_i . s)^q p_i  -  [(1/N) sum_i (y_i . s)^q] pbar
///
/// where y_i are the samples in the coordinates of a frame, p_i is the
/// product of the sample's dot products with the fixed vectors, and pbar is
/// the mean of p. The subtracted term makes g vanish whenever the free
/// direction is independent of every fixed one, so a nonzero g certifies a
/// dependence that links new directions to an already recovered set. The
/// functional is q-homogeneous in s.
pub struct CrossFunctional {
    proj: Array2<f64>,
    prod: Array1<f64>,
    mean_prod: f64,
    exponent: u32,
    fixed_count: usize,
}

impl CrossFunctional {
    /// `frame` is n-by-d with orthonormal columns; `fixed` are unit vectors
    /// in the ambient space; `exponent` is the power q >= 1 on the free
    /// direction. Total moment order is q + fixed.len().
    pub fn new(
        s: &SampleMatrix,
        frame: &ArrayView2<f64>,
        fixed: &[Array1<f64>],
        exponent: u32,
    ) -> Result<Self> {
        if exponent == 0 {
            return Err(Error::Config("cross moment exponent must be at least 1".into()));
        }
        if fixed.is_empty() {
            return Err(Error::Config(
                "cross moment needs at least one fixed direction".into(),
            ));
        }
        if frame.nrows() != s.dim() {
            return Err(Error::DimensionMismatch {
                expected: s.dim(),
                got: frame.nrows(),
            });
        }
        for v in fixed {
            if v.len() != s.dim() {
                return Err(Error::DimensionMismatch {
                    expected: s.dim(),
                    got: v.len(),
                });
            }
        }
        let proj = s.coords(frame);
        let mut prod = Array1::from_elem(s.len(), 1.0);
        for v in fixed {
            let col = s.data().dot(v);
            prod.zip_mut_with(&col, |p, c| *p *= c);
        }
        let mean_prod = prod.sum() / s.len() as f64;
        Ok(CrossFunctional {
            proj,
            prod,
            mean_prod,
            exponent,
            fixed_count: fixed.len(),
        })
    }

    /// Number of fixed directions multiplied into the product.
    pub fn fixed_count(&self) -> usize {
        self.fixed_count
    }

    /// Total moment order q + l.
    pub fn total_order(&self) -> u32 {
        self.exponent + self.fixed_count as u32
    }
}

impl MomentObjective for CrossFunctional {
    fn dim(&self) -> usize {
        self.proj.ncols()
    }

    fn degree(&self) -> u32 {
        self.exponent
    }

    fn value(&self, u: &ArrayView1<f64>) -> Result<f64> {
        check_dim(self.dim(), u)?;
        let qi = self.exponent as i32;
        let nf = self.proj.nrows() as f64;
        let dots = self.proj.dot(u);
        let mut with_p = 0.0;
        let mut plain = 0.0;
        for (d, p) in dots.iter().zip(self.prod.iter()) {
            let dq = d.powi(qi);
            with_p += dq * p;
            plain += dq;
        }
        Ok((with_p - plain * self.mean_prod) / nf)
    }

    fn values(&self, dirs: &ArrayView2<f64>) -> Result<Vec<f64>> {
        if dirs.nrows() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: dirs.nrows(),
            });
        }
        let qi = self.exponent as i32;
        let nf = self.proj.nrows() as f64;
        let mut with_p = vec![0.0f64; dirs.ncols()];
        let mut plain = vec![0.0f64; dirs.ncols()];
        let mut row = 0;
        for chunk in self.proj.axis_chunks_iter(Axis(0), ROW_BLOCK) {
            let dots = chunk.dot(dirs);
            let prods = self.prod.slice(s![row..row + chunk.nrows()]);
            for (j, col) in dots.columns().into_iter().enumerate() {
                let mut wp = 0.0;
                let mut pl = 0.0;
                for (d, p) in col.iter().zip(prods.iter()) {
                    let dq = d.powi(qi);
                    wp += dq * p;
                    pl += dq;
                }
                with_p[j] += wp;
                plain[j] += pl;
            }
            row += chunk.nrows();
        }
        Ok((0..dirs.ncols())
            .map(|j| (with_p[j] - plain[j] * self.mean_prod) / nf)
            .collect())
    }

    fn gradient(&self, u: &ArrayView1<f64>) -> Result<Array1<f64>> {
        check_dim(self.dim(), u)?;
        let q = self.exponent;
        let qi = q as i32;
        let nf = self.proj.nrows() as f64;
        let dots = self.proj.dot(u);
        let weights = ndarray::Zip::from(&dots)
            .and(&self.prod)
            .map_collect(|d, p| d.powi(qi - 1) * (p - self.mean_prod));
        Ok(self.proj.t().dot(&weights) * (q as f64 / nf))
    }

    fn hessian_apply(&self, u: &ArrayView1<f64>, w: &ArrayView1<f64>) -> Result<Array1<f64>> {
        check_dim(self.dim(), u)?;
        check_dim(self.dim(), w)?;
        let q = self.exponent;
        let qi = q as i32;
        if q == 1 {
            return Ok(Array1::zeros(self.dim()));
        }
        let nf = self.proj.nrows() as f64;
        let dots = self.proj.dot(u);
        let dw = self.proj.dot(w);
        let mut weights = Array1::zeros(self.proj.nrows());
        for i in 0..self.proj.nrows() {
            weights[i] = dots[i].powi(qi - 2) * dw[i] * (self.prod[i] - self.mean_prod);
        }
        Ok(self.proj.t().dot(&weights) * ((q * (q - 1)) as f64 / nf))
    }
}

fn check_dim(dim: usize, u: &ArrayView1<f64>) -> Result<()> {
    if u.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: u.len(),
        });
    }
    Ok(())
}
