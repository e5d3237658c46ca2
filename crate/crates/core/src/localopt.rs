//! Sphere-constrained ascent to a certified local optimum.
//!
//! The optimizer climbs an m-homogeneous objective g on the unit sphere with
//! two kinds of moves. While the gradient has a substantial component
//! tangent to the sphere, it takes small fixed-radius steps along that
//! tangent (first order). When the gradient aligns with the iterate, it asks
//! whether the Hessian still has a large eigenvalue orthogonal to u; if so,
//! stepping along that eigenvector escapes the flat ridge (second order).
//! When neither move applies, u is certified: the gradient is nearly radial
//! and no orthogonal direction carries enough curvature to matter at the
//! current value.
//!
//! Every accepted move strictly increases g; a halving line search backs off
//! steps that overshoot. Degree 1 objectives are linear and solved in closed
//! form; degree 2 objectives are quadratic forms whose sphere optimum is an
//! extreme eigenvector, found by power iteration. Both shortcuts report an
//! analytic termination.

use ndarray::{Array1, ArrayView1};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::moments::{top_curvature, MomentObjective, Negated};

/// Step sizes and thresholds for the ascent.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LocalOptParams {
    /// Tangential-alignment tolerance: first-order moves run while the
    /// radial share of the gradient is below 1 - eps1.
    pub eps1: f64,
    /// First-order step radius.
    pub r1: f64,
    /// Second-order step radius (unused for degree <= 2).
    pub r2: f64,
    /// Iteration cap across both move kinds.
    pub max_iters: usize,
    /// Relative tolerance for the curvature power iteration.
    pub curvature_tol: f64,
    /// Whether eps1 hit its 0.25 ceiling (or an explicit cap) instead of the
    /// scale-derived value.
    pub eps1_clamped: bool,
}

/// Tunables for [`default_params`] beyond the three scale inputs.
#[derive(Debug, Clone)]
pub struct ParamOptions {
    /// Denominator constant in the eps1 formula.
    pub denom: f64,
    /// With exact moment oracles the alignment tolerance may also be bounded
    /// by a second expression that is often tighter at large eta.
    pub exact_moments: bool,
    /// Extra ceiling on eps1 on top of the fixed 0.25.
    pub eps1_cap: Option<f64>,
    pub max_iters: usize,
    pub curvature_tol: f64,
}

impl Default for ParamOptions {
    fn default() -> Self {
        ParamOptions {
            denom: 1048.0,
            exact_moments: false,
            eps1_cap: None,
            max_iters: 20_000,
            curvature_tol: 1e-4,
        }
    }
}

/// Derives step sizes from the degree m, a lower bound eta on |g| at the
/// start, and an upper bound M on |g| over the sphere.
///
/// eps1 = ((81 m (m-1)^2 eta^2) / (denom M))^2, clamped to 0.25;
/// r1 = sqrt(eps1) / (4 m^2 M); r2 = 9 eta / (256 (m-2) M) for m > 2.
/// Smaller eta or larger M shrink every step: a weak signal near a large
/// functional needs finer moves to avoid stepping over its optima.
pub fn default_params(degree: u32, eta: f64, bound: f64, opts: &ParamOptions) -> Result<LocalOptParams> {
    if degree == 0 {
        return Err(Error::Config("degree must be at least 1".into()));
    }
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::Config(format!("eta must be positive, got {eta}")));
    }
    if !(bound > 0.0) || !bound.is_finite() {
        return Err(Error::Config(format!("bound must be positive, got {bound}")));
    }
    let m = degree as f64;
    let raw = (81.0 * m * (m - 1.0).powi(2) * eta * eta) / (opts.denom * bound);
    let mut eps1 = raw * raw;
    if opts.exact_moments && degree > 2 {
        let alt = m * (eta / bound).powf(2.0 / (m - 2.0));
        eps1 = eps1.min(alt);
    }
    let mut clamped = false;
    if eps1 > 0.25 {
        eps1 = 0.25;
        clamped = true;
    }
    if let Some(cap) = opts.eps1_cap {
        if eps1 > cap {
            eps1 = cap;
            clamped = true;
        }
    }
    let r1 = eps1.sqrt() / (4.0 * m * m * bound);
    let r2 = if degree > 2 {
        9.0 * eta / (256.0 * (m - 2.0) * bound)
    } else {
        0.0
    };
    Ok(LocalOptParams {
        eps1,
        r1,
        r2,
        max_iters: opts.max_iters,
        curvature_tol: opts.curvature_tol,
        eps1_clamped: clamped,
    })
}

/// Whether to climb toward large positive or large negative values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OptSense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MoveKind {
    FirstOrder,
    SecondOrder,
}

/// One accepted move.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptStep {
    pub iter: usize,
    pub kind: MoveKind,
    pub value_before: f64,
    pub value_after: f64,
    /// Multiple of the nominal radius accepted by the line search.
    pub step_scale: f64,
}

/// Why the ascent stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    /// Neither move condition fires: the iterate satisfies both optimality
    /// tests at the configured tolerances.
    Certified,
    /// A move condition fired but no step length made progress; the
    /// landscape is rougher than the step sizes assume, typically because
    /// sampling noise dominates at this scale.
    NoiseLimited,
    /// Iteration cap reached before certification.
    MaxIters,
    /// Solved in closed form (degree 1) or as an eigenproblem (degree 2).
    Analytic,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptTrace {
    pub steps: Vec<OptStep>,
    pub termination: Termination,
    pub iterations: usize,
}

/// Result of one ascent.
#[derive(Debug, Clone)]
pub struct OptOutcome {
    /// Final unit iterate.
    pub u: Array1<f64>,
    /// Objective value at `u` in the caller's sense (not negated).
    pub value: f64,
    pub trace: OptTrace,
}

/// Climbs `f` from `u0` to a local optimum on the unit sphere.
pub fn local_opt(
    f: &impl MomentObjective,
    u0: &ArrayView1<f64>,
    sense: OptSense,
    params: &LocalOptParams,
    rng: &mut impl Rng,
) -> Result<OptOutcome> {
    if u0.len() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: u0.len(),
        });
    }
    match sense {
        OptSense::Maximize => maximize(f, u0, params, rng),
        OptSense::Minimize => {
            let mut out = maximize(&Negated(f), u0, params, rng)?;
            out.value = -out.value;
            for s in &mut out.trace.steps {
                s.value_before = -s.value_before;
                s.value_after = -s.value_after;
            }
            Ok(out)
        }
    }
}

fn maximize(
    f: &impl MomentObjective,
    u0: &ArrayView1<f64>,
    params: &LocalOptParams,
    rng: &mut impl Rng,
) -> Result<OptOutcome> {
    let u0 = linalg::normalize(u0);
    match f.degree() {
        1 => return linear_opt(f, &u0),
        2 => return quadratic_opt(f, &u0, rng),
        _ => {}
    }

    let m = f.degree() as f64;
    let mut u = u0;
    let mut g = f.value(&u.view())?;
    let mut steps = Vec::new();
    let mut termination = Termination::MaxIters;
    let mut iterations = 0;
    // last accepted multiple of r1, reused as next search's starting scale
    let mut hint = 1.0f64;

    for iter in 0..params.max_iters {
        iterations = iter + 1;
        let grad = f.gradient(&u.view())?;
        let gnorm = linalg::norm(&grad.view());
        let radial = u.dot(&grad).abs();

        let mut moved = false;
        if radial <= (1.0 - params.eps1) * gnorm {
            // tangential component is substantial: first-order step
            let c = u.dot(&grad);
            let mut v = grad.clone();
            v.zip_mut_with(&u, |vi, ui| *vi -= c * ui);
            let vn = linalg::norm(&v.view());
            if vn > 1e-14 {
                let dir = v / vn;
                if let Some((nu, ng, scale)) =
                    line_search(f, &u, &dir.view(), params.r1, g, hint)?
                {
                    steps.push(OptStep {
                        iter,
                        kind: MoveKind::FirstOrder,
                        value_before: g,
                        value_after: ng,
                        step_scale: scale,
                    });
                    hint = scale;
                    u = nu;
                    g = ng;
                    moved = true;
                }
            }
        }
        if moved {
            continue;
        }

        // second-order test: a large Hessian eigenvalue orthogonal to u
        // relative to the current value means a ridge worth escaping
        let est = top_curvature(f, &u.view(), params.curvature_tol, rng)?;
        let threshold = 3.0 * m * (m - 1.0) * g / 4.0;
        if est.lambda >= threshold && est.lambda.is_finite() {
            for dir_sign in [-1.0, 1.0] {
                let dir = est.direction.mapv(|x| dir_sign * x);
                if let Some((nu, ng, scale)) = line_search(f, &u, &dir.view(), params.r2, g, 1.0)? {
                    steps.push(OptStep {
                        iter,
                        kind: MoveKind::SecondOrder,
                        value_before: g,
                        value_after: ng,
                        step_scale: scale,
                    });
                    u = nu;
                    g = ng;
                    moved = true;
                    break;
                }
            }
            if !moved {
                termination = Termination::NoiseLimited;
                break;
            }
        } else if radial <= (1.0 - params.eps1) * gnorm && gnorm > 0.0 {
            // first-order condition fired but its line search failed and
            // curvature offers no escape either
            termination = Termination::NoiseLimited;
            break;
        } else {
            termination = Termination::Certified;
            break;
        }
    }

    Ok(OptOutcome {
        u,
        value: g,
        trace: OptTrace {
            steps,
            termination,
            iterations,
        },
    })
}

const LINE_SEARCH_HALVINGS: i32 = 20;
const LINE_SEARCH_DOUBLINGS: usize = 24;

fn retract(u: &Array1<f64>, dir: &ArrayView1<f64>, step: f64) -> Array1<f64> {
    let cand = u + &(dir.to_owned() * step);
    linalg::normalize(&cand.view())
}

/// Walks from `u` along `dir` with nominal radius `r`, starting at the
/// multiple `start` and halving until the objective strictly improves on
/// `g0`; every multiple down to 2^-20 of `r` is tried before giving up, so
/// a failure means no step length at this granularity makes progress. Once
/// an improving step is found, the step keeps doubling while that keeps
/// helping: the nominal radius is the guaranteed-progress scale, not a
/// ceiling, and greedy growth cuts the iteration count by orders of
/// magnitude on smooth stretches. Returns the accepted iterate, its value,
/// and the accepted multiple of `r`.
fn line_search(
    f: &impl MomentObjective,
    u: &Array1<f64>,
    dir: &ArrayView1<f64>,
    r: f64,
    g0: f64,
    start: f64,
) -> Result<Option<(Array1<f64>, f64, f64)>> {
    let floor = 2f64.powi(-LINE_SEARCH_HALVINGS);
    let mut scale = start.max(1.0);
    while scale >= floor {
        let cand = retract(u, dir, r * scale);
        let g = f.value(&cand.view())?;
        if g > g0 {
            let mut best = (cand, g, scale);
            for _ in 0..LINE_SEARCH_DOUBLINGS {
                let s2 = best.2 * 2.0;
                let cand2 = retract(u, dir, r * s2);
                let g2 = f.value(&cand2.view())?;
                if g2 > best.1 {
                    best = (cand2, g2, s2);
                } else {
                    break;
                }
            }
            return Ok(Some(best));
        }
        scale *= 0.5;
    }
    Ok(None)
}

/// Degree 1: g(u) = <c, u> with constant gradient c; the sphere maximum is
/// c / ||c||.
fn linear_opt(f: &impl MomentObjective, u0: &Array1<f64>) -> Result<OptOutcome> {
    let c = f.gradient(&u0.view())?;
    let cn = linalg::norm(&c.view());
    let u = if cn > 1e-300 { c / cn } else { u0.clone() };
    let value = f.value(&u.view())?;
    Ok(OptOutcome {
        u,
        value,
        trace: OptTrace {
            steps: Vec::new(),
            termination: Termination::Analytic,
            iterations: 0,
        },
    })
}

const QUADRATIC_MAX_ITERS: usize = 10_000;
const QUADRATIC_STREAK: usize = 3;
// The eigenvector here is the returned answer, not a coarse escape probe,
// and its angular error scales like the square root of the Rayleigh
// tolerance, so this stays tight regardless of `curvature_tol`.
const QUADRATIC_TOL: f64 = 1e-12;

/// Degree 2: g(u) = u^T A u for a constant symmetric A recoverable from
/// Hessian products (H = 2A). The sphere maximum is the top eigenvector,
/// found by shifted power iteration started from u0.
fn quadratic_opt(
    f: &impl MomentObjective,
    u0: &Array1<f64>,
    rng: &mut impl Rng,
) -> Result<OptOutcome> {
    let d = f.dim();
    let apply = |w: &ArrayView1<f64>| -> Result<Array1<f64>> {
        // Hessian is constant; evaluate it at u0
        Ok(f.hessian_apply(&u0.view(), w)? * 0.5)
    };
    // shift estimate from probes so the iteration tracks the top of the
    // spectrum even when A is indefinite
    let mut sigma = 0.0f64;
    for _ in 0..4 {
        let w = linalg::random_unit(d, rng);
        let aw = apply(&w.view())?;
        sigma = sigma.max(1.5 * linalg::norm(&aw.view()));
    }
    let mut w = u0.clone();
    let mut rayleigh = f.value(&w.view())?;
    let mut streak = 0;
    let mut iterations = 0;
    for iter in 0..QUADRATIC_MAX_ITERS {
        iterations = iter + 1;
        let aw = apply(&w.view())?;
        let r = w.dot(&aw);
        if iter > 0 && (r - rayleigh).abs() <= QUADRATIC_TOL * r.abs().max(1.0) {
            streak += 1;
        } else {
            streak = 0;
        }
        rayleigh = r;
        if streak >= QUADRATIC_STREAK {
            break;
        }
        let next = aw + &(sigma * &w);
        let nn = linalg::norm(&next.view());
        if nn < 1e-300 {
            break;
        }
        w = next / nn;
    }
    let value = f.value(&w.view())?;
    Ok(OptOutcome {
        u: w,
        value,
        trace: OptTrace {
            steps: Vec::new(),
            termination: Termination::Analytic,
            iterations,
        },
    })
}
