//! Randomized nonzeroness testing for moment functionals.
//!
//! The recovery loop repeatedly asks "is this centered functional nonzero
//! anywhere on the sphere, and if so, where is a decent starting point".
//! Both questions are answered by probing: a low-degree polynomial that is
//! not identically zero misses zero on all of a modest random integer
//! lattice with vanishing probability, so any probe value clearly above the
//! sampling noise certifies nonzeroness and doubles as a starting iterate.
//!
//! Probes have integer coordinates with magnitudes drawn uniformly from
//! {1, ..., c m / 2} and independent random signs, rescaled onto the unit
//! sphere, so reported values are directly comparable to functional values
//! seen by the optimizer. The signs matter for even degrees: an even
//! functional concentrated on a direction whose coordinates mix signs is
//! nearly invisible to probes confined to one orthant, while signed probes
//! align with every direction equally well.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand::Rng;

use crate::error::{Error, Result};
use crate::moments::gaussian_moment;

/// Probe plan for one nonzeroness test.
#[derive(Debug, Clone)]
pub struct SZConfig {
    /// Homogeneity degree of the polynomial under test.
    pub degree: u32,
    /// Number of probes.
    pub repeats: usize,
    /// Detection threshold: the verdict is nonzero iff some |value| exceeds
    /// this.
    pub epsilon: f64,
    /// Lattice range multiplier; coordinate magnitudes are drawn from
    /// 1..=c*degree/2.
    pub lattice_factor: u32,
}

impl SZConfig {
    pub fn new(degree: u32, repeats: usize, epsilon: f64) -> Self {
        SZConfig {
            degree,
            repeats,
            epsilon,
            lattice_factor: 4,
        }
    }

    fn lattice_max(&self) -> u32 {
        (self.lattice_factor * self.degree / 2).max(1)
    }
}

/// Outcome of a nonzeroness test.
#[derive(Debug, Clone)]
pub enum SZVerdict {
    /// Some probe exceeded the threshold; `witness` is the unit probe with
    /// the largest |value| and `value` is the signed value there.
    Nonzero { witness: Array1<f64>, value: f64 },
    /// No probe exceeded the threshold.
    LikelyZero,
}

#[derive(Debug, Clone)]
pub struct SZReport {
    pub verdict: SZVerdict,
    /// Probes actually evaluated.
    pub evaluations: usize,
    /// Largest |value| seen across all probes, threshold or not.
    pub max_abs: f64,
}

/// Standard deviation of an empirical degree-`order` directional moment of N
/// whitened gaussian samples: sqrt((c_{2j} - c_j^2) / N).
///
/// This is the natural noise floor for thresholds: a centered functional
/// estimated from N samples of a distribution with gaussian-like tails
/// fluctuates by about this much even when its true value is zero.
pub fn null_sigma(order: u32, samples: usize) -> f64 {
    let var = gaussian_moment(2 * order) - gaussian_moment(order).powi(2);
    (var / samples as f64).sqrt()
}

/// Probes `eval` at `repeats` random lattice directions in R^dim.
///
/// `eval` is called with unit vectors; a value with magnitude above
/// `cfg.epsilon` makes the verdict nonzero. All probes are evaluated so the
/// witness is the best available, not merely the first hit. Evaluator errors
/// abort the test.
pub fn sz_test(
    mut eval: impl FnMut(&ArrayView1<f64>) -> Result<f64>,
    dim: usize,
    cfg: &SZConfig,
    rng: &mut impl Rng,
) -> Result<SZReport> {
    sz_test_batch(
        |dirs| {
            let mut vals = Vec::with_capacity(dirs.ncols());
            for c in dirs.columns() {
                vals.push(eval(&c)?);
            }
            Ok(vals)
        },
        dim,
        cfg,
        rng,
    )
}

/// Like [`sz_test`] but hands all probes to the evaluator at once, as the
/// columns of a dim-by-repeats matrix.
///
/// Sample-backed functionals answer a whole batch in one pass over the
/// samples, which is the difference between streaming the data once and
/// streaming it once per probe. Probe generation consumes the rng exactly as
/// [`sz_test`] does, so the two variants see identical probes for the same
/// seed and produce identical reports.
pub fn sz_test_batch(
    mut eval_batch: impl FnMut(&ArrayView2<f64>) -> Result<Vec<f64>>,
    dim: usize,
    cfg: &SZConfig,
    rng: &mut impl Rng,
) -> Result<SZReport> {
    let hi = cfg.lattice_max();
    let mut probes = Array2::zeros((dim, cfg.repeats));
    for p in 0..cfg.repeats {
        let mut nn = 0.0;
        for i in 0..dim {
            let mag = rng.random_range(1..=hi) as f64;
            let c = if rng.random::<bool>() { mag } else { -mag };
            probes[[i, p]] = c;
            nn += c * c;
        }
        let nn = nn.sqrt();
        probes.column_mut(p).mapv_inplace(|x| x / nn);
    }
    let vals = eval_batch(&probes.view())?;
    if vals.len() != cfg.repeats {
        return Err(Error::Other(format!(
            "batch evaluator returned {} values for {} probes",
            vals.len(),
            cfg.repeats
        )));
    }
    let mut best: Option<(usize, f64)> = None;
    let mut max_abs = 0.0f64;
    for (p, &v) in vals.iter().enumerate() {
        let a = v.abs();
        if a > max_abs {
            max_abs = a;
        }
        if a > cfg.epsilon {
            let better = match &best {
                None => true,
                Some((_, bv)) => a > bv.abs(),
            };
            if better {
                best = Some((p, v));
            }
        }
    }
    let verdict = match best {
        Some((p, value)) => SZVerdict::Nonzero {
            witness: probes.column(p).to_owned(),
            value,
        },
        None => SZVerdict::LikelyZero,
    };
    Ok(SZReport {
        verdict,
        evaluations: vals.len(),
        max_abs,
    })
}
