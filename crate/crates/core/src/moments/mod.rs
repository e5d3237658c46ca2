//! Moment functionals on the unit sphere and their derivatives.
//!
//! The central object is a degree-m homogeneous functional of a distribution,
//! f(u) = E[(x . u)^m], together with its centered form
//! g(u) = f(u) - c_m ||u||^m where c_m is the same moment under a standard
//! gaussian. For a whitened product distribution, g vanishes on directions
//! that mix the factors generically and is bounded away from zero somewhere
//! inside a hidden factor whenever that factor is not itself gaussian, which
//! is what makes g a usable compass.
//!
//! Everything the optimizer needs is expressed through [`MomentObjective`]:
//! values, gradients, and Hessian-vector products, all exact derivatives of
//! the empirical functional, so consumers can treat sample-backed and
//! analytic objectives identically.

mod analytic;
mod delta;
mod estimate;
mod functional;

pub use analytic::{AnalyticGaussian, AxisPolynomial, DiffObjective};
pub use delta::{delta_score, moment_distance};
pub use estimate::{moment_bound, top_curvature, CurvatureEstimate, MomentBound};
pub use functional::{CrossFunctional, MomentFunctional};

use ndarray::{Array1, ArrayView1, ArrayView2};

use crate::error::Result;

/// E[z^m] for a standard normal z: (m-1)!! for even m, 0 for odd.
pub fn gaussian_moment(m: u32) -> f64 {
    if m % 2 == 1 {
        return 0.0;
    }
    let mut v = 1.0;
    let mut k = 1;
    while k < m {
        v *= k as f64;
        k += 2;
    }
    v
}

/// A smooth, m-homogeneous objective on R^d.
///
/// Implementations promise `value(t u) = t^m value(u)` for t > 0 and exact
/// consistency between `value`, `gradient`, and `hessian_apply`; the
/// optimizer exploits both.
pub trait MomentObjective {
    /// Dimension d of the domain.
    fn dim(&self) -> usize;

    /// Homogeneity degree m.
    fn degree(&self) -> u32;

    fn value(&self, u: &ArrayView1<f64>) -> Result<f64>;

    /// Values at many directions at once, one per column of `dirs`.
    ///
    /// Semantically identical to calling [`Self::value`] per column, which
    /// is what this default does. Sample-backed objectives override it with
    /// blocked matrix products so that bulk probing reads the sample matrix
    /// once per block instead of once per direction.
    fn values(&self, dirs: &ArrayView2<f64>) -> Result<Vec<f64>> {
        dirs.columns()
            .into_iter()
            .map(|c| self.value(&c))
            .collect()
    }

    fn gradient(&self, u: &ArrayView1<f64>) -> Result<Array1<f64>>;

    /// The Hessian at `u` applied to `w`.
    fn hessian_apply(&self, u: &ArrayView1<f64>, w: &ArrayView1<f64>) -> Result<Array1<f64>>;
}

impl<T: MomentObjective + ?Sized> MomentObjective for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn degree(&self) -> u32 {
        (**self).degree()
    }

    fn value(&self, u: &ArrayView1<f64>) -> Result<f64> {
        (**self).value(u)
    }

    fn values(&self, dirs: &ArrayView2<f64>) -> Result<Vec<f64>> {
        (**self).values(dirs)
    }

    fn gradient(&self, u: &ArrayView1<f64>) -> Result<Array1<f64>> {
        (**self).gradient(u)
    }

    fn hessian_apply(&self, u: &ArrayView1<f64>, w: &ArrayView1<f64>) -> Result<Array1<f64>> {
        (**self).hessian_apply(u, w)
    }
}

/// Sign-flipped view of an objective; maximizing it minimizes the original.
pub struct Negated<F>(pub F);

impl<F: MomentObjective> MomentObjective for Negated<F> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn degree(&self) -> u32 {
        self.0.degree()
    }

    fn value(&self, u: &ArrayView1<f64>) -> Result<f64> {
        Ok(-self.0.value(u)?)
    }

    fn values(&self, dirs: &ArrayView2<f64>) -> Result<Vec<f64>> {
        let mut vals = self.0.values(dirs)?;
        for v in &mut vals {
            *v = -*v;
        }
        Ok(vals)
    }

    fn gradient(&self, u: &ArrayView1<f64>) -> Result<Array1<f64>> {
        Ok(-self.0.gradient(u)?)
    }

    fn hessian_apply(&self, u: &ArrayView1<f64>, w: &ArrayView1<f64>) -> Result<Array1<f64>> {
        Ok(-self.0.hessian_apply(u, w)?)
    }
}
