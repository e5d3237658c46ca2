//! Small dense linear algebra helpers: orthonormal bases, complements,
//! principal angles, symmetric eigendecompositions.
//!
//! Sample data lives in `ndarray` matrices (row per sample); the small n-by-n
//! factorizations go through `nalgebra`. Everything here is deterministic.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pairwise orthonormality slack tolerated by [`OrthonormalBasis`].
pub const ORTHO_TOL: f64 = 1e-8;

/// A list of orthonormal vectors in R^n.
///
/// Kept as an invariant-checked newtype because every recovery step appends
/// vectors and immediately re-orthonormalizes; a silent loss of orthogonality
/// would corrupt all later restrictions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrthonormalBasis {
    dim: usize,
    vectors: Vec<Vec<f64>>,
}

impl OrthonormalBasis {
    pub fn empty(dim: usize) -> Self {
        OrthonormalBasis {
            dim,
            vectors: Vec::new(),
        }
    }

    /// Builds from columns, checking unit norms and pairwise orthogonality.
    pub fn new(dim: usize, vectors: Vec<Array1<f64>>) -> Result<Self> {
        let mut b = OrthonormalBasis::empty(dim);
        for v in &vectors {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: v.len(),
                });
            }
        }
        for v in vectors {
            let n = norm(&v.view());
            if (n - 1.0).abs() > ORTHO_TOL {
                return Err(Error::Data(format!("basis vector has norm {n:.12}")));
            }
            for w in &b.vectors {
                let d: f64 = v.iter().zip(w.iter()).map(|(a, b)| a * b).sum();
                if d.abs() > ORTHO_TOL {
                    return Err(Error::Data(format!(
                        "basis vectors not orthogonal (dot {d:.3e})"
                    )));
                }
            }
            b.vectors.push(v.to_vec());
        }
        Ok(b)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vector(&self, i: usize) -> Array1<f64> {
        Array1::from_vec(self.vectors[i].clone())
    }

    pub fn vectors(&self) -> impl Iterator<Item = Array1<f64>> + '_ {
        self.vectors.iter().map(|v| Array1::from_vec(v.clone()))
    }

    /// n-by-k matrix with the basis vectors as columns.
    pub fn as_matrix(&self) -> Array2<f64> {
        let mut m = Array2::zeros((self.dim, self.len()));
        for (j, v) in self.vectors.iter().enumerate() {
            for (i, x) in v.iter().enumerate() {
                m[[i, j]] = *x;
            }
        }
        m
    }

    /// Projects `v` orthogonally to the span and renormalizes; `None` when the
    /// residual is numerically zero (v already lies in the span).
    pub fn orthonormalize_against(&self, v: &ArrayView1<f64>) -> Option<Array1<f64>> {
        let mut r = v.to_owned();
        // two Gram-Schmidt passes keep the 1e-8 pairwise invariant at k <= n
        for _ in 0..2 {
            for w in &self.vectors {
                let d: f64 = r.iter().zip(w.iter()).map(|(a, b)| a * b).sum();
                for (ri, wi) in r.iter_mut().zip(w.iter()) {
                    *ri -= d * wi;
                }
            }
        }
        let n = norm(&r.view());
        if n < 1e-10 {
            return None;
        }
        Some(r / n)
    }

    /// Appends after orthonormalizing against the current span.
    pub fn push(&mut self, v: &ArrayView1<f64>) -> Result<()> {
        match self.orthonormalize_against(v) {
            Some(u) => {
                self.vectors.push(u.to_vec());
                Ok(())
            }
            None => Err(Error::Data(
                "vector lies in the span of the basis".to_string(),
            )),
        }
    }

    /// Orthonormal basis of the orthogonal complement, as an n-by-(n-k) matrix.
    ///
    /// Built by Gram-Schmidt over the canonical basis, keeping the n-k
    /// directions with the largest residuals so the result is well conditioned.
    pub fn complement(&self) -> Array2<f64> {
        let n = self.dim;
        let k = self.len();
        let mut cols: Vec<Array1<f64>> = Vec::with_capacity(n - k);
        let mut acc = self.clone();
        // candidate order: canonical axes sorted by residual norm, largest first
        let mut residuals: Vec<(usize, f64)> = (0..n)
            .map(|i| {
                let mut e = Array1::zeros(n);
                e[i] = 1.0;
                let mut r = e.clone();
                for w in &acc.vectors {
                    let d: f64 = r.iter().zip(w.iter()).map(|(a, b)| a * b).sum();
                    for (ri, wi) in r.iter_mut().zip(w.iter()) {
                        *ri -= d * wi;
                    }
                }
                (i, norm(&r.view()))
            })
            .collect();
        residuals.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
        for (i, _) in residuals {
            if cols.len() == n - k {
                break;
            }
            let mut e = Array1::zeros(n);
            e[i] = 1.0;
            if let Some(u) = acc.orthonormalize_against(&e.view()) {
                acc.vectors.push(u.to_vec());
                cols.push(u);
            }
        }
        let mut m = Array2::zeros((n, cols.len()));
        for (j, v) in cols.iter().enumerate() {
            for (i, x) in v.iter().enumerate() {
                m[[i, j]] = *x;
            }
        }
        m
    }

    /// Max |<v_i, v_j>| off the diagonal plus max |1 - ||v_i|||; used by tests.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, v) in self.vectors.iter().enumerate() {
            let n: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            worst = worst.max((n - 1.0).abs());
            for w in self.vectors.iter().skip(i + 1) {
                let d: f64 = v.iter().zip(w.iter()).map(|(a, b)| a * b).sum();
                worst = worst.max(d.abs());
            }
        }
        worst
    }
}

pub fn norm(v: &ArrayView1<f64>) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn normalize(v: &ArrayView1<f64>) -> Array1<f64> {
    let n = norm(v);
    v.to_owned() / n
}

fn to_na(m: &ArrayView2<f64>) -> nalgebra::DMatrix<f64> {
    nalgebra::DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[[i, j]])
}

/// Eigendecomposition of a symmetric matrix; returns (eigenvalues, eigenvectors)
/// with eigenvalues ascending and eigenvectors as columns.
pub fn sym_eigen(m: &ArrayView2<f64>) -> (Array1<f64>, Array2<f64>) {
    let n = m.nrows();
    let se = nalgebra::SymmetricEigen::new(to_na(m));
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| se.eigenvalues[a].partial_cmp(&se.eigenvalues[b]).unwrap());
    let mut vals = Array1::zeros(n);
    let mut vecs = Array2::zeros((n, n));
    for (out, &src) in idx.iter().enumerate() {
        vals[out] = se.eigenvalues[src];
        for i in 0..n {
            vecs[[i, out]] = se.eigenvectors[(i, src)];
        }
    }
    (vals, vecs)
}

/// Principal angles (radians, ascending) between the spans of two bases,
/// via the singular values of A^T B. Empty input gives an empty list.
pub fn principal_angles(a: &OrthonormalBasis, b: &OrthonormalBasis) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let am = a.as_matrix();
    let bm = b.as_matrix();
    let prod = am.t().dot(&bm);
    let svd = to_na(&prod.view()).svd(false, false);
    let mut angles: Vec<f64> = svd
        .singular_values
        .iter()
        .map(|s| s.clamp(-1.0, 1.0).acos())
        .collect();
    angles.sort_by(|x, y| x.partial_cmp(y).unwrap());
    angles
}

/// Random orthogonal n-by-n matrix: QR of a standard normal matrix with the
/// sign convention R_ii >= 0, which makes the distribution Haar and the
/// result a pure function of the generator state.
pub fn random_orthogonal(n: usize, rng: &mut impl rand::Rng) -> Array2<f64> {
    use rand_distr::{Distribution, StandardNormal};
    let g: nalgebra::DMatrix<f64> =
        nalgebra::DMatrix::from_fn(n, n, |_, _| StandardNormal.sample(rng));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            for i in 0..n {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    Array2::from_shape_fn((n, n), |(i, j)| q[(i, j)])
}

/// Uniform random unit vector.
pub fn random_unit(n: usize, rng: &mut impl rand::Rng) -> Array1<f64> {
    use rand_distr::{Distribution, StandardNormal};
    loop {
        let v = Array1::from_shape_fn(n, |_| StandardNormal.sample(rng));
        let nn = norm(&v.view());
        if nn > 1e-12 {
            return v / nn;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn push_orthonormalizes() {
        let mut b = OrthonormalBasis::empty(3);
        b.push(&ndarray::arr1(&[2.0, 0.0, 0.0]).view()).unwrap();
        b.push(&ndarray::arr1(&[1.0, 1.0, 0.0]).view()).unwrap();
        assert!(b.orthonormality_defect() < 1e-12);
        assert!((b.vector(1)[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn push_rejects_spanned_vector() {
        let mut b = OrthonormalBasis::empty(2);
        b.push(&ndarray::arr1(&[1.0, 0.0]).view()).unwrap();
        assert!(b.push(&ndarray::arr1(&[1.0, 1e-13]).view()).is_err());
    }

    #[test]
    fn complement_spans_the_rest() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let q = random_orthogonal(6, &mut rng);
        let mut b = OrthonormalBasis::empty(6);
        b.push(&q.column(0)).unwrap();
        b.push(&q.column(1)).unwrap();
        let c = b.complement();
        assert_eq!(c.shape(), &[6, 4]);
        // complement columns orthonormal and orthogonal to the basis
        let bt = b.as_matrix();
        let cross = bt.t().dot(&c);
        assert!(cross.iter().all(|x| x.abs() < 1e-10));
        let gram = c.t().dot(&c);
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((gram[[i, j]] - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn principal_angles_detect_shared_and_orthogonal_directions() {
        let mut a = OrthonormalBasis::empty(4);
        a.push(&ndarray::arr1(&[1.0, 0.0, 0.0, 0.0]).view()).unwrap();
        a.push(&ndarray::arr1(&[0.0, 1.0, 0.0, 0.0]).view()).unwrap();
        let mut b = OrthonormalBasis::empty(4);
        b.push(&ndarray::arr1(&[1.0, 0.0, 0.0, 0.0]).view()).unwrap();
        b.push(&ndarray::arr1(&[0.0, 0.0, 1.0, 0.0]).view()).unwrap();
        let angles = principal_angles(&a, &b);
        assert!((angles[0] - 0.0).abs() < 1e-12);
        assert!((angles[1] - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn random_orthogonal_is_orthogonal_and_deterministic() {
        let mut r1 = ChaCha8Rng::seed_from_u64(11);
        let mut r2 = ChaCha8Rng::seed_from_u64(11);
        let q1 = random_orthogonal(5, &mut r1);
        let q2 = random_orthogonal(5, &mut r2);
        assert_eq!(q1, q2);
        let g = q1.t().dot(&q1);
        for i in 0..5 {
            for j in 0..5 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((g[[i, j]] - want).abs() < 1e-10);
            }
        }
    }
}
