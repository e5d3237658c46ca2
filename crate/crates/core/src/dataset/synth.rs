//! Synthetic factorizable distributions with known ground truth.
//!
//! A product distribution is assembled from two independent components in
//! latent coordinates, then pushed through a random rotation: the first k
//! latent axes become a hidden subspace V, the rest its complement W. Closed
//! forms for the directional moments of each component double as oracles for
//! the estimators elsewhere in the crate.

use ndarray::{Array2, ArrayView1};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, OrthonormalBasis};
use crate::moments::gaussian_moment;
use crate::rng::SeedSplitter;

use super::{GroundTruth, SampleMatrix};

/// One independent component of a product distribution.
///
/// All variants are mean zero and symmetric. `Gaussian` and `UniformBall`
/// adapt to whatever dimension they are sampled in; `UniformBox` fixes its
/// dimension through the half-length list.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum ComponentDist {
    /// Standard normal in every coordinate.
    Gaussian,
    /// Uniform on the solid ball of the given radius.
    UniformBall { radius: f64 },
    /// Uniform on a centered axis-aligned box; coordinate i ranges over
    /// [-half_lengths[i], half_lengths[i]].
    UniformBox { half_lengths: Vec<f64> },
    /// Convex combination of components, all of the same dimension behavior.
    Mixture {
        weights: Vec<f64>,
        components: Vec<ComponentDist>,
    },
}

impl ComponentDist {
    /// Ball with unit variance per coordinate in dimension k.
    pub fn isotropic_ball(k: usize) -> ComponentDist {
        ComponentDist::UniformBall {
            radius: ((k + 2) as f64).sqrt(),
        }
    }

    /// Cube with unit variance per coordinate.
    pub fn isotropic_box(k: usize) -> ComponentDist {
        ComponentDist::UniformBox {
            half_lengths: vec![3f64.sqrt(); k],
        }
    }

    /// The dimension this component insists on, if any.
    pub fn dim_constraint(&self) -> Option<usize> {
        match self {
            ComponentDist::Gaussian | ComponentDist::UniformBall { .. } => None,
            ComponentDist::UniformBox { half_lengths } => Some(half_lengths.len()),
            ComponentDist::Mixture { components, .. } => {
                components.iter().find_map(|c| c.dim_constraint())
            }
        }
    }

    fn validate(&self, dim: usize) -> Result<()> {
        match self {
            ComponentDist::Gaussian => Ok(()),
            ComponentDist::UniformBall { radius } => {
                if !radius.is_finite() || *radius <= 0.0 {
                    return Err(Error::Config(format!("ball radius {radius} must be positive")));
                }
                Ok(())
            }
            ComponentDist::UniformBox { half_lengths } => {
                if half_lengths.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: half_lengths.len(),
                    });
                }
                if half_lengths.iter().any(|h| !h.is_finite() || *h <= 0.0) {
                    return Err(Error::Config("box half-lengths must be positive".into()));
                }
                Ok(())
            }
            ComponentDist::Mixture { weights, components } => {
                if weights.len() != components.len() || components.is_empty() {
                    return Err(Error::Config(format!(
                        "mixture has {} weights for {} components",
                        weights.len(),
                        components.len()
                    )));
                }
                if weights.iter().any(|w| !w.is_finite() || *w < 0.0)
                    || weights.iter().sum::<f64>() <= 0.0
                {
                    return Err(Error::Config("mixture weights must be nonnegative with positive sum".into()));
                }
                for c in components {
                    if matches!(c, ComponentDist::Mixture { .. }) {
                        return Err(Error::Config("nested mixtures are not supported".into()));
                    }
                    c.validate(dim)?;
                }
                Ok(())
            }
        }
    }
}

/// The two independent factors of a product distribution.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComponentSpec {
    pub v: ComponentDist,
    pub w: ComponentDist,
}

/// A subspace concept used to label synthetic samples, expressed in the
/// latent coordinates of the hidden subspace.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum Concept {
    /// Axis-aligned product of intervals [lo_i, hi_i].
    Box { intervals: Vec<(f64, f64)> },
}

impl Concept {
    pub fn dim(&self) -> usize {
        match self {
            Concept::Box { intervals } => intervals.len(),
        }
    }

    /// Membership in latent V coordinates.
    pub fn contains(&self, v_coords: &ArrayView1<f64>) -> bool {
        match self {
            Concept::Box { intervals } => intervals
                .iter()
                .zip(v_coords.iter())
                .all(|((lo, hi), x)| lo <= x && x <= hi),
        }
    }
}

/// Draws `count` samples of a component in the given dimension, one per row.
pub fn sample_component(
    dist: &ComponentDist,
    dim: usize,
    count: usize,
    rng: &mut impl Rng,
) -> Result<Array2<f64>> {
    dist.validate(dim)?;
    let mut out = Array2::zeros((count, dim));
    for i in 0..count {
        sample_row(dist, rng, &mut out, i);
    }
    Ok(out)
}

fn sample_row(dist: &ComponentDist, rng: &mut impl Rng, out: &mut Array2<f64>, i: usize) {
    use rand_distr::{Distribution, StandardNormal};
    let dim = out.ncols();
    match dist {
        ComponentDist::Gaussian => {
            for j in 0..dim {
                out[[i, j]] = StandardNormal.sample(rng);
            }
        }
        ComponentDist::UniformBall { radius } => {
            // direction from a normalized gaussian, radius via the inverse CDF
            // r = R u^{1/k} of the radial law in k dimensions
            loop {
                let mut s = 0.0;
                for j in 0..dim {
                    let g: f64 = StandardNormal.sample(rng);
                    out[[i, j]] = g;
                    s += g * g;
                }
                if s > 1e-24 {
                    let u: f64 = rng.random();
                    let scale = radius * u.powf(1.0 / dim as f64) / s.sqrt();
                    for j in 0..dim {
                        out[[i, j]] *= scale;
                    }
                    break;
                }
            }
        }
        ComponentDist::UniformBox { half_lengths } => {
            for j in 0..dim {
                let u: f64 = rng.random();
                out[[i, j]] = half_lengths[j] * (2.0 * u - 1.0);
            }
        }
        ComponentDist::Mixture { weights, components } => {
            let total: f64 = weights.iter().sum();
            let mut pick: f64 = rng.random::<f64>() * total;
            let mut chosen = components.len() - 1;
            for (t, w) in weights.iter().enumerate() {
                if pick < *w {
                    chosen = t;
                    break;
                }
                pick -= w;
            }
            sample_row(&components[chosen], rng, out, i);
        }
    }
}

/// E[(x . u)^m] for a component in dimension `dim`, exact.
///
/// Serves as the oracle for every empirical moment estimate: gaussians give
/// the normal moment of the projected variance, balls are rotation invariant
/// with a closed-form radial integral, boxes expand over coordinates by a
/// binomial recurrence, and mixtures average.
pub fn analytic_directional_moment(
    dist: &ComponentDist,
    dim: usize,
    u: &ArrayView1<f64>,
    m: u32,
) -> Result<f64> {
    dist.validate(dim)?;
    if u.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: u.len(),
        });
    }
    Ok(directional_moment_inner(dist, dim, u, m))
}

fn directional_moment_inner(
    dist: &ComponentDist,
    dim: usize,
    u: &ArrayView1<f64>,
    m: u32,
) -> f64 {
    if m == 0 {
        return 1.0;
    }
    if m % 2 == 1 {
        return 0.0;
    }
    match dist {
        ComponentDist::Gaussian => {
            let nn = linalg::norm(u);
            gaussian_moment(m) * nn.powi(m as i32)
        }
        ComponentDist::UniformBall { radius } => {
            // (x . u) has the same law as ||u|| x_1; E[x_1^m] on the unit ball
            // is (m-1)!! / prod_{j=1}^{m/2} (k + 2j)
            let nn = linalg::norm(u);
            let mut v = gaussian_moment(m);
            for j in 1..=(m / 2) {
                v /= dim as f64 + 2.0 * j as f64;
            }
            v * (nn * radius).powi(m as i32)
        }
        ComponentDist::UniformBox { half_lengths } => {
            // running moments of the partial sums S_t = S_{t-1} + u_t x_t
            let m = m as usize;
            let binom = binomial_table(m);
            let mut e = vec![0.0; m + 1];
            e[0] = 1.0;
            for t in 0..dim {
                let ax: Vec<f64> = (0..=m)
                    .map(|j| box_axis_moment(half_lengths[t], j as u32))
                    .collect();
                let mut next = vec![0.0; m + 1];
                for (p, slot) in next.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    for j in 0..=p {
                        if ax[j] != 0.0 {
                            acc += binom[p][j] * e[p - j] * u[t].powi(j as i32) * ax[j];
                        }
                    }
                    *slot = acc;
                }
                e = next;
            }
            e[m]
        }
        ComponentDist::Mixture { weights, components } => {
            let total: f64 = weights.iter().sum();
            weights
                .iter()
                .zip(components.iter())
                .map(|(w, c)| w / total * directional_moment_inner(c, dim, u, m))
                .sum()
        }
    }
}

/// E[x^j] for x uniform on [-h, h].
fn box_axis_moment(h: f64, j: u32) -> f64 {
    if j % 2 == 1 {
        0.0
    } else {
        h.powi(j as i32) / (j as f64 + 1.0)
    }
}

fn binomial_table(m: usize) -> Vec<Vec<f64>> {
    let mut b = vec![vec![0.0; m + 1]; m + 1];
    for (i, row) in b.iter_mut().enumerate() {
        row[0] = 1.0;
        for j in 1..=i {
            row[j] = if j == i { 1.0 } else { 0.0 };
        }
    }
    for i in 2..=m {
        for j in 1..i {
            b[i][j] = b[i - 1][j - 1] + b[i - 1][j];
        }
    }
    b
}

fn check_split(n: usize, k: usize, spec: &ComponentSpec) -> Result<()> {
    if k == 0 || k >= n {
        return Err(Error::Config(format!(
            "need 0 < k < n, got k={k} n={n}"
        )));
    }
    if let Some(d) = spec.v.dim_constraint() {
        if d != k {
            return Err(Error::Config(format!(
                "first component fixes dimension {d} but k={k}"
            )));
        }
    }
    if let Some(d) = spec.w.dim_constraint() {
        if d != n - k {
            return Err(Error::Config(format!(
                "second component fixes dimension {d} but n-k={}",
                n - k
            )));
        }
    }
    Ok(())
}

fn latent_and_rotation(
    spec: &ComponentSpec,
    n: usize,
    k: usize,
    count: usize,
    seed: u64,
) -> Result<(Array2<f64>, Array2<f64>, Array2<f64>)> {
    check_split(n, k, spec)?;
    if count == 0 {
        return Err(Error::NoSamples);
    }
    let splitter = SeedSplitter::new(seed);
    let q = linalg::random_orthogonal(n, &mut splitter.stream("rotation"));
    let xv = sample_component(&spec.v, k, count, &mut splitter.stream("component-v"))?;
    let xw = sample_component(&spec.w, n - k, count, &mut splitter.stream("component-w"))?;
    Ok((xv, xw, q))
}

fn assemble(
    xv: &Array2<f64>,
    xw: &Array2<f64>,
    q: &Array2<f64>,
    labels: Option<Vec<u8>>,
    spec: &ComponentSpec,
    concept: Option<Concept>,
) -> Result<(SampleMatrix, GroundTruth)> {
    let count = xv.nrows();
    let (k, n) = (xv.ncols(), q.nrows());
    let mut latent = Array2::zeros((count, n));
    for i in 0..count {
        for j in 0..k {
            latent[[i, j]] = xv[[i, j]];
        }
        for j in k..n {
            latent[[i, j]] = xw[[i, j - k]];
        }
    }
    // x = Q l per sample, so the row form is L Q^T
    let data = latent.dot(&q.t());
    let v_basis = OrthonormalBasis::new(n, (0..k).map(|j| q.column(j).to_owned()).collect())?;
    let w_basis = OrthonormalBasis::new(n, (k..n).map(|j| q.column(j).to_owned()).collect())?;
    let truth = GroundTruth {
        v_basis,
        w_basis,
        spec: spec.clone(),
        concept,
    };
    Ok((SampleMatrix::new(data, labels)?, truth))
}

/// Samples x = Q (x_V ; x_W) with a seeded random rotation Q: the product of
/// the two components lives on a hidden k-dimensional subspace and its
/// complement. Deterministic in `seed`.
pub fn gen_factorizable(
    spec: &ComponentSpec,
    n: usize,
    k: usize,
    count: usize,
    seed: u64,
) -> Result<(SampleMatrix, GroundTruth)> {
    let (xv, xw, q) = latent_and_rotation(spec, n, k, count, seed)?;
    assemble(&xv, &xw, &q, None, spec, None)
}

/// Like [`gen_factorizable`], with each sample labeled by whether its latent
/// V coordinates fall inside the concept.
pub fn gen_labeled(
    spec: &ComponentSpec,
    n: usize,
    k: usize,
    concept: &Concept,
    count: usize,
    seed: u64,
) -> Result<(SampleMatrix, GroundTruth)> {
    if concept.dim() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            got: concept.dim(),
        });
    }
    let (xv, xw, q) = latent_and_rotation(spec, n, k, count, seed)?;
    let labels: Vec<u8> = (0..count)
        .map(|i| u8::from(concept.contains(&xv.row(i))))
        .collect();
    assemble(&xv, &xw, &q, Some(labels), spec, Some(concept.clone()))
}
