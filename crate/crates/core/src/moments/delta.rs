//! Product-defect scores over joint moments.
//!
//! A split of R^n into a subspace and its complement is a genuine
//! factorization exactly when every joint moment of the two coordinate
//! blocks splits into a product of block moments. The defect score sums the
//! squared violations over all moments of a fixed total order; comparing two
//! datasets by their worst moment discrepancy uses the same enumeration.
//!
//! Both walks enumerate coordinate multisets once, reusing the shared prefix
//! of the running product column, and weight each multiset by the number of
//! ordered tuples it represents.

use ndarray::{Array1, Array2, ArrayView2};

use crate::dataset::SampleMatrix;
use crate::error::{Error, Result};
use crate::linalg::OrthonormalBasis;

/// Largest absolute difference between same-order joint moments of two
/// sample sets with the same width: max over coordinate multisets of size
/// `degree` of |mean_a(prod x) - mean_b(prod x)|.
pub fn moment_distance(a: &ArrayView2<f64>, b: &ArrayView2<f64>, degree: u32) -> Result<f64> {
    if a.ncols() != b.ncols() {
        return Err(Error::DimensionMismatch {
            expected: a.ncols(),
            got: b.ncols(),
        });
    }
    if a.nrows() == 0 || b.nrows() == 0 {
        return Err(Error::NoSamples);
    }
    if degree == 0 {
        return Ok(0.0);
    }
    let n = a.ncols();
    let mut worst = 0.0f64;
    let col_a = Array1::from_elem(a.nrows(), 1.0);
    let col_b = Array1::from_elem(b.nrows(), 1.0);
    distance_walk(a, b, degree, 0, n, &col_a, &col_b, &mut worst);
    Ok(worst)
}

#[allow(clippy::too_many_arguments)]
fn distance_walk(
    a: &ArrayView2<f64>,
    b: &ArrayView2<f64>,
    remaining: u32,
    start: usize,
    n: usize,
    col_a: &Array1<f64>,
    col_b: &Array1<f64>,
    worst: &mut f64,
) {
    for t in start..n {
        let mut na = col_a.clone();
        let mut nb = col_b.clone();
        mul_col(&mut na, a, t);
        mul_col(&mut nb, b, t);
        if remaining == 1 {
            let ma = na.sum() / na.len() as f64;
            let mb = nb.sum() / nb.len() as f64;
            let d = (ma - mb).abs();
            if d > *worst {
                *worst = d;
            }
        } else {
            distance_walk(a, b, remaining - 1, t, n, &na, &nb, worst);
        }
    }
}

fn mul_col(acc: &mut Array1<f64>, data: &ArrayView2<f64>, t: usize) {
    let col = data.column(t);
    acc.zip_mut_with(&col, |x, c| *x *= c);
}

/// Cap on n^degree; larger enumerations are refused rather than attempted.
pub const DELTA_TUPLE_CAP: u64 = 10_000_000;

/// Product-defect score of a candidate subspace at moment order `degree`.
///
/// Samples are re-expressed in coordinates adapted to the subspace (its
/// basis first, a complement basis after). For every ordered degree-tuple of
/// coordinates, the defect is the joint moment minus the product of the
/// subspace-part and complement-part moments; the score is the sum of
/// squared defects. Zero means the split looks like a product at this order;
/// tuples drawn entirely from one side contribute nothing.
pub fn delta_score(s: &SampleMatrix, subspace: &OrthonormalBasis, degree: u32) -> Result<f64> {
    let n = s.dim();
    if subspace.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: subspace.dim(),
        });
    }
    if degree == 0 {
        return Ok(0.0);
    }
    let tuples = (n as u64).checked_pow(degree).unwrap_or(u64::MAX);
    if tuples > DELTA_TUPLE_CAP {
        return Err(Error::Guard {
            what: format!("delta score tuple count at order {degree}"),
            limit: DELTA_TUPLE_CAP,
            actual: tuples,
        });
    }
    let u_frame = subspace.as_matrix();
    let c_frame = subspace.complement();
    let mut coords = s.coords(&u_frame.view());
    let cc = s.coords(&c_frame.view());
    // adapted coordinates: k subspace columns then n-k complement columns
    coords
        .append(ndarray::Axis(1), cc.view())
        .expect("row counts match");

    let mut factorial = vec![1.0; degree as usize + 1];
    for i in 1..=degree as usize {
        factorial[i] = factorial[i - 1] * i as f64;
    }
    let ones = Array1::from_elem(coords.nrows(), 1.0);
    let mut walk = DefectWalk {
        coords: &coords,
        k: subspace.len(),
        n,
        nrows: coords.nrows() as f64,
        factorial,
        score: 0.0,
        indices: Vec::with_capacity(degree as usize),
    };
    walk.go(degree, 0, &ones, &ones, &ones);
    Ok(walk.score)
}

struct DefectWalk<'a> {
    coords: &'a Array2<f64>,
    k: usize,
    n: usize,
    nrows: f64,
    factorial: Vec<f64>,
    score: f64,
    indices: Vec<usize>,
}

impl DefectWalk<'_> {
    /// Depth-first over nondecreasing index sequences. `full`, `upart`, and
    /// `wpart` are running per-sample products over all chosen columns, the
    /// subspace columns, and the complement columns respectively.
    fn go(
        &mut self,
        remaining: u32,
        start: usize,
        full: &Array1<f64>,
        upart: &Array1<f64>,
        wpart: &Array1<f64>,
    ) {
        for t in start..self.n {
            let mut nf = full.clone();
            mul_col(&mut nf, &self.coords.view(), t);
            let (nu, nw) = if t < self.k {
                let mut c = upart.clone();
                mul_col(&mut c, &self.coords.view(), t);
                (c, wpart.clone())
            } else {
                let mut c = wpart.clone();
                mul_col(&mut c, &self.coords.view(), t);
                (upart.clone(), c)
            };
            self.indices.push(t);
            if remaining == 1 {
                self.score += self.multiplicity() * self.defect_sq(&nf, &nu, &nw);
            } else {
                self.go(remaining - 1, t, &nf, &nu, &nw);
            }
            self.indices.pop();
        }
    }

    /// Ordered tuples represented by the current multiset: l! / prod c_i!.
    fn multiplicity(&self) -> f64 {
        let l = self.indices.len();
        let mut denom = 1.0;
        let mut run = 1usize;
        for i in 1..l {
            if self.indices[i] == self.indices[i - 1] {
                run += 1;
            } else {
                denom *= self.factorial[run];
                run = 1;
            }
        }
        denom *= self.factorial[run];
        self.factorial[l] / denom
    }

    fn defect_sq(&self, full: &Array1<f64>, upart: &Array1<f64>, wpart: &Array1<f64>) -> f64 {
        let ef = full.sum() / self.nrows;
        let eu = upart.sum() / self.nrows;
        let ew = wpart.sum() / self.nrows;
        let d = ef - eu * ew;
        d * d
    }
}
