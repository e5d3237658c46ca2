//! Scale and curvature estimates for moment objectives.
//!
//! The optimizer needs two numbers it cannot get exactly: a magnitude bound
//! M on the functional over the sphere, and the largest Hessian eigenvalue
//! orthogonal to the current iterate. Both are estimated by probing, and both
//! estimates are deliberately conservative in the direction that keeps the
//! optimizer sound: the bound is inflated, the curvature is converged to a
//! fixed tolerance.

use ndarray::{Array1, ArrayView1};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linalg;

use super::MomentObjective;

/// Estimated bound on |f| over the unit sphere.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MomentBound {
    pub value: f64,
    /// Largest |f| actually observed while probing.
    pub max_observed: f64,
    pub method: String,
}

/// Bounds |f| on the sphere by probing all coordinate axes plus `probes`
/// random unit directions and tripling the largest magnitude seen.
///
/// Tripling covers the gap between a finite max and the true supremum for
/// the low-degree polynomials this crate optimizes; the exact value only
/// steers step sizes, so an overestimate costs iterations, not correctness.
pub fn moment_bound(
    f: &impl MomentObjective,
    probes: usize,
    rng: &mut impl Rng,
) -> Result<MomentBound> {
    let d = f.dim();
    let mut max_observed = 0.0f64;
    for i in 0..d {
        let mut e = Array1::zeros(d);
        e[i] = 1.0;
        max_observed = max_observed.max(f.value(&e.view())?.abs());
    }
    for _ in 0..probes {
        let u = linalg::random_unit(d, rng);
        max_observed = max_observed.max(f.value(&u.view())?.abs());
    }
    Ok(MomentBound {
        value: 3.0 * max_observed,
        max_observed,
        method: format!("3x max |f| over {d} axes and {probes} random directions"),
    })
}

/// Largest curvature of `f` at `u` orthogonal to `u`.
#[derive(Debug, Clone)]
pub struct CurvatureEstimate {
    /// Top eigenvalue of the Hessian restricted to the hyperplane through
    /// the origin orthogonal to `u`; -inf when that hyperplane is empty.
    pub lambda: f64,
    /// Corresponding unit eigenvector (zero when `lambda` is -inf).
    pub direction: Array1<f64>,
}

const CURVATURE_MAX_ITERS: usize = 1000;
const CURVATURE_STREAK: usize = 3;

/// Power iteration for the top eigenvalue of P H(u) P, where P projects out
/// `u`. The operator is made positive by adding a shift estimated from probe
/// applications, so the iteration converges to the algebraically largest
/// eigenvalue rather than the largest in magnitude. Stops when the Rayleigh
/// quotient is stable to `tol` over three consecutive iterations.
pub fn top_curvature(
    f: &impl MomentObjective,
    u: &ArrayView1<f64>,
    tol: f64,
    rng: &mut impl Rng,
) -> Result<CurvatureEstimate> {
    let d = f.dim();
    if d <= 1 {
        return Ok(CurvatureEstimate {
            lambda: f64::NEG_INFINITY,
            direction: Array1::zeros(d),
        });
    }
    let un = linalg::normalize(u);
    let deflate = |w: &mut Array1<f64>| {
        let c = un.dot(&*w);
        w.zip_mut_with(&un, |wi, ui| *wi -= c * ui);
    };
    let apply = |w: &ArrayView1<f64>| -> Result<Array1<f64>> {
        let mut hw = f.hessian_apply(&un.view(), w)?;
        deflate(&mut hw);
        Ok(hw)
    };

    // probe applications give a shift that dominates the spectrum magnitude
    let mut sigma = 0.0f64;
    let mut start: Option<Array1<f64>> = None;
    let mut best_norm = -1.0;
    for _ in 0..4 {
        let mut w = linalg::random_unit(d, rng);
        deflate(&mut w);
        let nn = linalg::norm(&w.view());
        if nn < 1e-12 {
            continue;
        }
        let w = w / nn;
        let aw = apply(&w.view())?;
        let an = linalg::norm(&aw.view());
        sigma = sigma.max(1.5 * an);
        if an > best_norm {
            best_norm = an;
            start = Some(w);
        }
    }
    let mut w = match start {
        Some(w) => w,
        None => {
            // u spans everything numerically; no orthogonal direction found
            return Ok(CurvatureEstimate {
                lambda: f64::NEG_INFINITY,
                direction: Array1::zeros(d),
            });
        }
    };
    if sigma == 0.0 {
        // zero Hessian on the hyperplane
        return Ok(CurvatureEstimate {
            lambda: 0.0,
            direction: w,
        });
    }

    let mut rayleigh = f64::NAN;
    let mut streak = 0;
    for iter in 0..CURVATURE_MAX_ITERS {
        let aw = apply(&w.view())?;
        let r = w.dot(&aw);
        if iter > 0 {
            if (r - rayleigh).abs() <= tol * r.abs().max(1.0) {
                streak += 1;
            } else {
                streak = 0;
            }
        }
        rayleigh = r;
        if streak >= CURVATURE_STREAK {
            return Ok(CurvatureEstimate {
                lambda: r,
                direction: w,
            });
        }
        // shifted step keeps the iteration aimed at the top of the spectrum
        let mut next = aw + &(sigma * &w);
        deflate(&mut next);
        let nn = linalg::norm(&next.view());
        if nn < 1e-300 {
            return Ok(CurvatureEstimate {
                lambda: r,
                direction: w,
            });
        }
        w = next / nn;
    }
    // the Rayleigh quotient approaches the top eigenvalue from below, so an
    // unconverged value is still a sound lower bound for escape decisions
    Ok(CurvatureEstimate {
        lambda: rayleigh,
        direction: w,
    })
}
