//! Sample matrices, whitening, synthetic generation and ground-truth reports.
//!
//! A dataset is an N-by-n matrix of f64 rows, optionally carrying one binary
//! label per row. Whitening uses the 1/N covariance convention and is exact on
//! the sample: the whitened set has empirical mean 0 and covariance I up to
//! floating point.

mod io;
mod synth;

pub use io::{load_samples, save_samples, Format};
pub use synth::{
    analytic_directional_moment, gen_factorizable, gen_labeled, sample_component, ComponentDist,
    ComponentSpec, Concept,
};

use ndarray::{Array1, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, OrthonormalBasis};

/// N samples in R^n, one row each, with optional binary labels.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix {
    data: Array2<f64>,
    labels: Option<Vec<u8>>,
}

impl SampleMatrix {
    /// Validates finiteness and label length.
    pub fn new(data: Array2<f64>, labels: Option<Vec<u8>>) -> Result<Self> {
        if data.nrows() == 0 {
            return Err(Error::NoSamples);
        }
        for (i, row) in data.outer_iter().enumerate() {
            if let Some(bad) = row.iter().position(|x| !x.is_finite()) {
                return Err(Error::Parse {
                    row: i,
                    msg: format!("non-finite value in column {bad}"),
                });
            }
        }
        if let Some(l) = &labels {
            if l.len() != data.nrows() {
                return Err(Error::Data(format!(
                    "{} labels for {} samples",
                    l.len(),
                    data.nrows()
                )));
            }
            if let Some(bad) = l.iter().position(|&b| b > 1) {
                return Err(Error::Parse {
                    row: bad,
                    msg: format!("label {} is not 0/1", l[bad]),
                });
            }
        }
        Ok(SampleMatrix { data, labels })
    }

    pub fn data(&self) -> &Array2<f64> {
        &self.data
    }

    pub fn labels(&self) -> Option<&[u8]> {
        self.labels.as_deref()
    }

    /// Number of samples N.
    pub fn len(&self) -> usize {
        self.data.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.data.nrows() == 0
    }

    /// Ambient dimension n.
    pub fn dim(&self) -> usize {
        self.data.ncols()
    }

    /// Rows re-expressed in the coordinates of an orthonormal frame
    /// (n-by-d matrix of columns): returns the N-by-d coordinate matrix.
    pub fn coords(&self, frame: &ArrayView2<f64>) -> Array2<f64> {
        self.data.dot(frame)
    }

    /// New matrix holding the selected rows (labels carried along).
    pub fn select_rows(&self, rows: &[usize]) -> SampleMatrix {
        let mut data = Array2::zeros((rows.len(), self.dim()));
        for (out, &r) in rows.iter().enumerate() {
            data.row_mut(out).assign(&self.data.row(r));
        }
        let labels = self
            .labels
            .as_ref()
            .map(|l| rows.iter().map(|&r| l[r]).collect());
        SampleMatrix { data, labels }
    }

    /// Splits into (first `at` rows, rest).
    pub fn split_at(&self, at: usize) -> (SampleMatrix, SampleMatrix) {
        let head: Vec<usize> = (0..at).collect();
        let tail: Vec<usize> = (at..self.len()).collect();
        (self.select_rows(&head), self.select_rows(&tail))
    }

    /// Same data re-expressed in a frame, as a standalone dataset.
    pub fn in_frame(&self, frame: &ArrayView2<f64>) -> SampleMatrix {
        SampleMatrix {
            data: self.coords(frame),
            labels: self.labels.clone(),
        }
    }
}

/// Affine whitening map y = F(x - mean) with its inverse.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WhiteningTransform {
    pub mean: Vec<f64>,
    pub forward: Vec<Vec<f64>>,
    pub inverse: Vec<Vec<f64>>,
    pub eigenvalues: Vec<f64>,
    pub eigen_floor: f64,
}

impl WhiteningTransform {
    pub fn forward_matrix(&self) -> Array2<f64> {
        rows_to_array(&self.forward)
    }

    pub fn inverse_matrix(&self) -> Array2<f64> {
        rows_to_array(&self.inverse)
    }

    /// Applies the stored map to fresh samples.
    pub fn apply(&self, s: &SampleMatrix) -> Result<SampleMatrix> {
        let n = self.mean.len();
        if s.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: s.dim(),
            });
        }
        let mean = Array1::from_vec(self.mean.clone());
        let centered = s.data() - &mean.broadcast((s.len(), n)).unwrap();
        let out = centered.dot(&self.forward_matrix());
        Ok(SampleMatrix {
            data: out,
            labels: s.labels.clone(),
        })
    }
}

fn rows_to_array(rows: &[Vec<f64>]) -> Array2<f64> {
    let n = rows.len();
    let m = if n == 0 { 0 } else { rows[0].len() };
    Array2::from_shape_fn((n, m), |(i, j)| rows[i][j])
}

fn array_to_rows(a: &Array2<f64>) -> Vec<Vec<f64>> {
    a.outer_iter().map(|r| r.to_vec()).collect()
}

pub const DEFAULT_EIGEN_FLOOR: f64 = 1e-8;

/// Centers and whitens with the 1/N sample covariance.
///
/// The forward map is the symmetric inverse square root of the covariance, so
/// whitening twice is a no-op up to floating point. Covariance eigenvalues at
/// or below `eigen_floor` are a hard error: the caller supplied samples that
/// do not span the space, and silently regularizing would fabricate moment
/// structure in the dead directions.
pub fn whiten_with_floor(
    s: &SampleMatrix,
    eigen_floor: f64,
) -> Result<(SampleMatrix, WhiteningTransform)> {
    let n = s.dim();
    let nf = s.len() as f64;
    let mean = s.data.mean_axis(Axis(0)).ok_or(Error::NoSamples)?;
    let centered = &s.data - &mean.broadcast((s.len(), n)).unwrap();
    let cov = centered.t().dot(&centered) / nf;
    let (vals, vecs) = linalg::sym_eigen(&cov.view());
    if let Some(&lo) = vals
        .iter()
        .find(|v| **v < eigen_floor)
    {
        return Err(Error::DegenerateCovariance {
            eigenvalue: lo,
            floor: eigen_floor,
        });
    }
    let mut fwd = Array2::zeros((n, n));
    let mut inv = Array2::zeros((n, n));
    for a in 0..n {
        for b in 0..n {
            let mut f = 0.0;
            let mut g = 0.0;
            for t in 0..n {
                f += vecs[[a, t]] * vecs[[b, t]] / vals[t].sqrt();
                g += vecs[[a, t]] * vecs[[b, t]] * vals[t].sqrt();
            }
            fwd[[a, b]] = f;
            inv[[a, b]] = g;
        }
    }
    let out = centered.dot(&fwd);
    let transform = WhiteningTransform {
        mean: mean.to_vec(),
        forward: array_to_rows(&fwd),
        inverse: array_to_rows(&inv),
        eigenvalues: vals.to_vec(),
        eigen_floor,
    };
    Ok((
        SampleMatrix {
            data: out,
            labels: s.labels.clone(),
        },
        transform,
    ))
}

pub fn whiten(s: &SampleMatrix) -> Result<(SampleMatrix, WhiteningTransform)> {
    whiten_with_floor(s, DEFAULT_EIGEN_FLOOR)
}

/// What a synthetic dataset was generated from: the hidden orthogonal
/// decomposition, the component distributions, and the labeling concept.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroundTruth {
    pub v_basis: OrthonormalBasis,
    pub w_basis: OrthonormalBasis,
    pub spec: ComponentSpec,
    pub concept: Option<Concept>,
}

/// How well a recovered basis matches the ground-truth V subspace.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubspaceReport {
    pub dim_recovered: usize,
    pub dim_true: usize,
    /// Principal angles in degrees, ascending, between span(U) and span(V).
    pub principal_angles_deg: Vec<f64>,
    pub largest_angle_deg: f64,
    /// ||pi_V(u_i)|| for each recovered vector.
    pub v_alignment: Vec<f64>,
}

/// Compares a recovered basis against the generating decomposition.
pub fn subspace_report(u: &OrthonormalBasis, truth: &GroundTruth) -> Result<SubspaceReport> {
    if !u.is_empty() && u.dim() != truth.v_basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: truth.v_basis.dim(),
            got: u.dim(),
        });
    }
    let angles = linalg::principal_angles(u, &truth.v_basis);
    let deg: Vec<f64> = angles.iter().map(|a| a.to_degrees()).collect();
    let largest = deg.iter().cloned().fold(0.0, f64::max);
    let vm = truth.v_basis.as_matrix();
    let v_alignment = u
        .vectors()
        .map(|ui| linalg::norm(&vm.t().dot(&ui).view()))
        .collect();
    Ok(SubspaceReport {
        dim_recovered: u.len(),
        dim_true: truth.v_basis.len(),
        principal_angles_deg: deg,
        largest_angle_deg: largest,
        v_alignment,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::arr2;

    #[test]
    fn whiten_three_point_line() {
        // {-2, 0, 2} has 1/N covariance 8/3; whitened values are ±sqrt(3/2), 0
        let s = SampleMatrix::new(arr2(&[[-2.0], [0.0], [2.0]]), None).unwrap();
        let (w, t) = whiten(&s).unwrap();
        assert!((t.eigenvalues[0] - 8.0 / 3.0).abs() < 1e-12);
        let want = (3.0f64 / 2.0).sqrt();
        assert!((w.data()[[0, 0]] + want).abs() < 1e-12);
        assert!((w.data()[[1, 0]]).abs() < 1e-12);
        assert!((w.data()[[2, 0]] - want).abs() < 1e-12);
    }

    #[test]
    fn whiten_makes_covariance_identity() {
        let mut rng = crate::rng::SeedSplitter::new(5).stream("t");
        let data = Array2::from_shape_fn((500, 4), |_| {
            use rand_distr::{Distribution, StandardNormal};
            let x: f64 = StandardNormal.sample(&mut rng);
            2.0 * x + 0.5
        });
        let s = SampleMatrix::new(data, None).unwrap();
        let (w, t) = whiten(&s).unwrap();
        let nf = w.len() as f64;
        let mean = w.data().mean_axis(Axis(0)).unwrap();
        assert!(mean.iter().all(|m| m.abs() < 1e-10));
        let cov = w.data().t().dot(w.data()) / nf;
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((cov[[i, j]] - want).abs() < 1e-8, "cov[{i},{j}]");
            }
        }
        // forward and inverse compose to the identity
        let prod = t.forward_matrix().dot(&t.inverse_matrix());
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((prod[[i, j]] - want).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn whiten_is_idempotent() {
        let mut rng = crate::rng::SeedSplitter::new(9).stream("t");
        let data = Array2::from_shape_fn((400, 3), |(_, j)| {
            use rand_distr::{Distribution, StandardNormal};
            let x: f64 = StandardNormal.sample(&mut rng);
            x * (j as f64 + 1.0)
        });
        let s = SampleMatrix::new(data, None).unwrap();
        let (w1, _) = whiten(&s).unwrap();
        let (w2, _) = whiten(&w1).unwrap();
        let diff = (w1.data() - w2.data()).iter().fold(0.0f64, |a, x| a.max(x.abs()));
        assert!(diff < 1e-8, "second whitening moved samples by {diff}");
    }

    #[test]
    fn whiten_rejects_degenerate_directions() {
        // second coordinate is constant: covariance eigenvalue 0
        let s = SampleMatrix::new(arr2(&[[1.0, 2.0], [-1.0, 2.0], [0.5, 2.0]]), None).unwrap();
        match whiten(&s) {
            Err(Error::DegenerateCovariance { .. }) => {}
            other => panic!("expected degenerate covariance, got {other:?}"),
        }
    }

    #[test]
    fn select_rows_carries_labels() {
        let s = SampleMatrix::new(
            arr2(&[[1.0], [2.0], [3.0]]),
            Some(vec![1, 0, 1]),
        )
        .unwrap();
        let t = s.select_rows(&[2, 0]);
        assert_eq!(t.labels(), Some(&[1u8, 1u8][..]));
        assert_eq!(t.data()[[0, 0]], 3.0);
    }

    #[test]
    fn non_finite_rejected_with_row() {
        let r = SampleMatrix::new(arr2(&[[1.0], [f64::NAN]]), None);
        match r {
            Err(Error::Parse { row, .. }) => assert_eq!(row, 1),
            other => panic!("expected parse error, got {other:?}"),
        }
    }
}
