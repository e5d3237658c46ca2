//! Recovery of an orthonormal basis for the hidden subspace.
//!
//! The driver alternates two phases. Probing: on the orthogonal complement
//! of everything recovered so far, test centered moment functionals of
//! increasing order for nonzeroness; a functional that clears the sampling
//! noise threshold hands over a witness direction. Climbing: ascend (or
//! descend, matching the witness sign) from the witness to a certified local
//! optimum, which is the next basis vector. Every acceptance resets the
//! order to 2, because removing a direction can expose lower-order structure
//! in what remains.
//!
//! Extension works the same way but probes cross moments that multiply the
//! free direction with already accepted vectors, which picks up dependence
//! that pure directional moments miss.

use ndarray::{Array1, ArrayView1, ArrayView2};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::SampleMatrix;
use crate::error::{Error, Result};
use crate::linalg::{self, OrthonormalBasis};
use crate::localopt::{
    default_params, local_opt, OptSense, ParamOptions, Termination,
};
use crate::moments::{
    moment_bound, CrossFunctional, MomentFunctional, MomentObjective,
};
use crate::polytest::{null_sigma, sz_test_batch, SZConfig, SZVerdict};

/// Knobs for basis recovery and extension.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BasisRunConfig {
    /// Highest moment order probed.
    pub m_max: u32,
    /// Stop after recovering this many vectors.
    pub k_cap: Option<usize>,
    /// Probes per nonzeroness test.
    pub sz_repeats: usize,
    /// Threshold multiplier: a probe counts as nonzero when it exceeds
    /// sz_z standard deviations of the order-j sampling noise.
    pub sz_z: f64,
    /// Hard floor added to the noise-scaled threshold.
    pub sz_epsilon: f64,
    /// Lattice range multiplier for probe coordinates.
    pub sz_lattice_factor: u32,
    /// Extra ceiling on the alignment tolerance eps1. The scale-derived
    /// value is far too loose at desk sample sizes; this cap bounds the
    /// termination cone directly (angle about sqrt(2 eps1) radians).
    pub eps1_cap: Option<f64>,
    /// Denominator constant of the eps1 formula.
    pub denom: f64,
    /// Treat the objective as an exact oracle when deriving step sizes.
    pub exact_moments: bool,
    /// Iteration cap per ascent.
    pub max_iters: usize,
    pub curvature_tol: f64,
    /// Random probes used by the magnitude bound (on top of all axes).
    pub moment_probes: usize,
    /// Fresh witnesses tried when an ascent fails to certify.
    pub reprobe_attempts: usize,
    /// Log of the base constant in the eta floor schedule; the default is a
    /// sentinel so large that every floor underflows to zero, disabling the
    /// schedule. See [`EtaSchedule`].
    pub eta_log_eps1: f64,
    /// Cap on cross-moment combinations per extension call.
    pub extension_cap: u64,
}

impl Default for BasisRunConfig {
    fn default() -> Self {
        BasisRunConfig {
            m_max: 6,
            k_cap: None,
            sz_repeats: 768,
            sz_z: 4.0,
            sz_epsilon: 0.0,
            sz_lattice_factor: 4,
            eps1_cap: Some(5e-4),
            denom: 1048.0,
            exact_moments: false,
            max_iters: 20_000,
            curvature_tol: 1e-4,
            moment_probes: 64,
            reprobe_attempts: 3,
            eta_log_eps1: -1e18,
            extension_cap: 100_000,
        }
    }
}

impl BasisRunConfig {
    pub(crate) fn param_options(&self) -> ParamOptions {
        ParamOptions {
            denom: self.denom,
            exact_moments: self.exact_moments,
            eps1_cap: self.eps1_cap,
            max_iters: self.max_iters,
            curvature_tol: self.curvature_tol,
        }
    }

    pub(crate) fn sz_config(&self, order: u32, samples: usize) -> SZConfig {
        let eps = self
            .sz_epsilon
            .max(self.sz_z * null_sigma(order, samples));
        SZConfig {
            degree: order,
            repeats: self.sz_repeats,
            epsilon: eps,
            lattice_factor: self.sz_lattice_factor,
        }
    }
}

/// Minimum admissible witness magnitude for the j-th recovered vector:
/// floor_j = M * exp(b / 16^j) with b = eta_log_eps1.
///
/// With b = log(eps1) the floor rises toward M doubly exponentially, which
/// assumes far more samples than desk runs have; the default sentinel makes
/// every floor underflow to zero so no witness is rejected by schedule.
#[derive(Debug, Clone)]
pub struct EtaSchedule {
    pub log_eps1: f64,
}

impl EtaSchedule {
    pub fn floor(&self, bound: f64, attempt: usize) -> f64 {
        let exponent = self.log_eps1 * (1.0 / 16.0f64).powi(attempt as i32);
        bound * exponent.exp()
    }
}

/// One accepted direction, with everything that went into it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BasisStep {
    /// Index in the output basis.
    pub index: usize,
    /// Total moment order of the detecting functional.
    pub order: u32,
    /// Exponent on the free direction (equals `order` for pure moments).
    pub exponent: u32,
    /// |value| at the witness.
    pub eta: f64,
    /// Magnitude bound used for step sizes.
    pub bound: f64,
    pub sense: OptSense,
    pub termination: Termination,
    pub iterations: usize,
    /// Extra witnesses consumed after failed ascents.
    pub reprobes: usize,
    /// Objective value at the accepted optimum.
    pub value: f64,
}

/// Trace of a recovery run.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct BasisLog {
    pub steps: Vec<BasisStep>,
    /// Skipped orders, rejected witnesses, failed ascents.
    pub notes: Vec<String>,
}

/// Outcome of chasing one nonzero functional to an optimum.
struct Recovery {
    direction: Array1<f64>,
    value: f64,
    eta: f64,
    bound: f64,
    sense: OptSense,
    termination: Termination,
    iterations: usize,
    reprobes: usize,
}

/// Probes `f` for nonzeroness and, on a hit, climbs from the witness to a
/// certified optimum. Retries with fresh witnesses up to the configured
/// limit when an ascent fails; `None` means "nothing recoverable here".
fn probe_and_climb(
    f: &impl MomentObjective,
    total_order: u32,
    samples: usize,
    eta_floor: f64,
    what: &str,
    cfg: &BasisRunConfig,
    notes: &mut Vec<String>,
    rng: &mut impl Rng,
) -> Result<Option<Recovery>> {
    let szc = cfg.sz_config(total_order, samples);
    let mut reprobes = 0;
    for attempt in 0..cfg.reprobe_attempts.max(1) {
        let report = sz_test_batch(|dirs| f.values(dirs), f.dim(), &szc, rng)?;
        let (witness, value) = match report.verdict {
            SZVerdict::LikelyZero => {
                if attempt > 0 {
                    notes.push(format!(
                        "{what}: reprobe found nothing above threshold ({:.3e})",
                        szc.epsilon
                    ));
                }
                return Ok(None);
            }
            SZVerdict::Nonzero { witness, value } => (witness, value),
        };
        let eta = value.abs();
        let bound = moment_bound(f, cfg.moment_probes, rng)?;
        let m_bound = bound.value.max(eta);
        if eta < eta_floor {
            notes.push(format!(
                "{what}: witness {eta:.3e} below eta floor {eta_floor:.3e}, rejected"
            ));
            return Ok(None);
        }
        let sense = if value >= 0.0 {
            OptSense::Maximize
        } else {
            OptSense::Minimize
        };
        let params = default_params(f.degree(), eta, m_bound, &cfg.param_options())?;
        let out = local_opt(f, &witness.view(), sense, &params, rng)?;
        match out.trace.termination {
            Termination::Certified | Termination::Analytic => {
                return Ok(Some(Recovery {
                    direction: out.u,
                    value: out.value,
                    eta,
                    bound: m_bound,
                    sense,
                    termination: out.trace.termination,
                    iterations: out.trace.iterations,
                    reprobes,
                }));
            }
            t => {
                reprobes += 1;
                notes.push(format!(
                    "{what}: ascent from witness ended {t:?} after {} iterations",
                    out.trace.iterations
                ));
            }
        }
    }
    notes.push(format!(
        "{what}: giving up after {} failed ascents",
        cfg.reprobe_attempts
    ));
    Ok(None)
}

/// Maps a direction found in frame coordinates back to the ambient space.
fn lift(frame: &ArrayView2<f64>, s: &ArrayView1<f64>) -> Array1<f64> {
    let u = frame.dot(s);
    linalg::normalize(&u.view())
}

/// Recovers, vector by vector, an orthonormal basis for the subspace where
/// the sample distribution deviates from a standard gaussian.
///
/// Samples should be whitened. Orders run from 2 to `m_max` on the
/// complement of the recovered set; each acceptance restarts at order 2.
/// The result can be empty (nothing distinguishable from gaussian) and is
/// capped by `k_cap` when set.
pub fn find_basis(
    s: &SampleMatrix,
    cfg: &BasisRunConfig,
    rng: &mut impl Rng,
) -> Result<(OrthonormalBasis, BasisLog)> {
    let n = s.dim();
    let mut basis = OrthonormalBasis::empty(n);
    let mut log = BasisLog::default();
    let schedule = EtaSchedule {
        log_eps1: cfg.eta_log_eps1,
    };
    let mut order = 2u32;
    loop {
        if let Some(cap) = cfg.k_cap {
            if basis.len() >= cap {
                break;
            }
        }
        if basis.len() >= n || order > cfg.m_max {
            break;
        }
        let frame = basis.complement();
        let f = MomentFunctional::centered_in_frame(s, order, &frame.view())?;
        let floor = schedule.floor(1.0, basis.len());
        // the schedule scales with the bound; estimate lazily only when the
        // floor can reject anything at all
        let eta_floor = if floor > 0.0 {
            schedule.floor(
                moment_bound(&f, cfg.moment_probes, rng)?.value,
                basis.len(),
            )
        } else {
            0.0
        };
        let what = format!("order {order} on {} remaining dims", n - basis.len());
        match probe_and_climb(
            &f,
            order,
            s.len(),
            eta_floor,
            &what,
            cfg,
            &mut log.notes,
            rng,
        )? {
            Some(rec) => {
                let u = lift(&frame.view(), &rec.direction.view());
                basis.push(&u.view())?;
                log.steps.push(BasisStep {
                    index: basis.len() - 1,
                    order,
                    exponent: order,
                    eta: rec.eta,
                    bound: rec.bound,
                    sense: rec.sense,
                    termination: rec.termination,
                    iterations: rec.iterations,
                    reprobes: rec.reprobes,
                    value: rec.value,
                });
                order = 2;
            }
            None => {
                order += 1;
            }
        }
    }
    Ok((basis, log))
}

/// Nondecreasing index multisets of size `l` over `0..k`, lexicographic.
fn multisets(k: usize, l: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(l);
    fn rec(k: usize, l: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == l {
            out.push(cur.clone());
            return;
        }
        for i in start..k {
            cur.push(i);
            rec(k, l, i, cur, out);
            cur.pop();
        }
    }
    rec(k, l, 0, &mut cur, &mut out);
    out
}

/// Grows `base` with directions linked to it by cross moments, searching
/// the complement of span(base) + span(anchor).
///
/// For orders j = 2..m_max and every way of splitting j into an exponent on
/// the free direction plus a multiset of `base` vectors, the cross
/// functional is probed on the joint complement; any certified optimum
/// joins `base` and restarts the order scan. `anchor` only shrinks the
/// search space; its vectors never enter the products. An empty `base`
/// returns immediately since there is nothing to take products with.
pub fn extend_basis(
    s: &SampleMatrix,
    base: &OrthonormalBasis,
    anchor: &OrthonormalBasis,
    cfg: &BasisRunConfig,
    rng: &mut impl Rng,
) -> Result<(OrthonormalBasis, BasisLog)> {
    let n = s.dim();
    let mut log = BasisLog::default();
    if base.is_empty() {
        log.notes.push("empty base: nothing to extend".into());
        return Ok((base.clone(), log));
    }
    if base.dim() != n || anchor.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: if base.dim() != n {
                base.dim()
            } else {
                anchor.dim()
            },
        });
    }
    let mut grown = base.clone();
    let mut combos: u64 = 0;
    let mut order = 2u32;
    'orders: while order <= cfg.m_max {
        if let Some(cap) = cfg.k_cap {
            if grown.len() >= cap {
                break;
            }
        }
        // joint span of grown and anchor determines the free space
        let mut joint = grown.clone();
        for v in anchor.vectors() {
            // anchor vectors are orthogonal to grown by construction; push
            // re-orthonormalizes to absorb numerical drift
            joint.push(&v.view())?;
        }
        if joint.len() >= n {
            log.notes.push("no free directions left".into());
            break;
        }
        let frame = joint.complement();
        for l in 1..order {
            let q = order - l;
            for combo in multisets(grown.len(), l as usize) {
                combos += 1;
                if combos > cfg.extension_cap {
                    return Err(Error::Guard {
                        what: "cross-moment combinations in extension".into(),
                        limit: cfg.extension_cap,
                        actual: combos,
                    });
                }
                let fixed: Vec<Array1<f64>> =
                    combo.iter().map(|&i| grown.vector(i)).collect();
                let f = CrossFunctional::new(s, &frame.view(), &fixed, q)?;
                let what = format!(
                    "cross order {order} (exponent {q}, product {combo:?})"
                );
                if let Some(rec) = probe_and_climb(
                    &f,
                    order,
                    s.len(),
                    0.0,
                    &what,
                    cfg,
                    &mut log.notes,
                    rng,
                )? {
                    let u = lift(&frame.view(), &rec.direction.view());
                    grown.push(&u.view())?;
                    log.steps.push(BasisStep {
                        index: grown.len() - 1,
                        order,
                        exponent: q,
                        eta: rec.eta,
                        bound: rec.bound,
                        sense: rec.sense,
                        termination: rec.termination,
                        iterations: rec.iterations,
                        reprobes: rec.reprobes,
                        value: rec.value,
                    });
                    order = 2;
                    continue 'orders;
                }
            }
        }
        order += 1;
    }
    Ok((grown, log))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{gen_factorizable, whiten, ComponentDist, ComponentSpec};
    use crate::rng::SeedSplitter;

    #[test]
    fn multiset_enumeration_counts_and_order() {
        assert_eq!(multisets(2, 1), vec![vec![0], vec![1]]);
        assert_eq!(
            multisets(2, 2),
            vec![vec![0, 0], vec![0, 1], vec![1, 1]]
        );
        assert_eq!(multisets(3, 2).len(), 6);
        assert_eq!(multisets(1, 3), vec![vec![0, 0, 0]]);
    }

    #[test]
    fn eta_schedule_sentinel_underflows_to_zero() {
        let s = EtaSchedule { log_eps1: -1e18 };
        for attempt in 0..10 {
            assert_eq!(s.floor(5.0, attempt), 0.0, "attempt {attempt}");
        }
        // a realistic eps1 makes floors bite almost immediately
        let s = EtaSchedule {
            log_eps1: (5e-4f64).ln(),
        };
        assert!(s.floor(1.0, 1) > 0.5);
    }

    #[test]
    fn recovers_box_axis_from_product_with_gaussian() {
        let spec = ComponentSpec {
            v: ComponentDist::isotropic_box(1),
            w: ComponentDist::Gaussian,
        };
        let (raw, truth) = gen_factorizable(&spec, 3, 1, 60_000, 41).unwrap();
        let (s, _) = whiten(&raw).unwrap();
        let cfg = BasisRunConfig {
            m_max: 4,
            ..BasisRunConfig::default()
        };
        let mut rng = SeedSplitter::new(17).stream("find");
        let (basis, log) = find_basis(&s, &cfg, &mut rng).unwrap();
        assert_eq!(basis.len(), 1, "notes: {:?}", log.notes);
        let v = truth.v_basis.vector(0);
        let align = basis.vector(0).dot(&v).abs();
        assert!(align > 0.996, "alignment {align}, notes {:?}", log.notes);
        // detection had to wait for order 4: orders 2 and 3 vanish after
        // whitening a symmetric product
        assert_eq!(log.steps[0].order, 4);
    }

    #[test]
    fn gaussian_data_yields_empty_basis() {
        let spec = ComponentSpec {
            v: ComponentDist::Gaussian,
            w: ComponentDist::Gaussian,
        };
        let (raw, _) = gen_factorizable(&spec, 3, 1, 50_000, 5).unwrap();
        let (s, _) = whiten(&raw).unwrap();
        let cfg = BasisRunConfig {
            m_max: 4,
            ..BasisRunConfig::default()
        };
        let mut rng = SeedSplitter::new(23).stream("find");
        let (basis, log) = find_basis(&s, &cfg, &mut rng).unwrap();
        assert!(basis.is_empty(), "notes: {:?}", log.notes);
    }

    #[test]
    fn extension_completes_a_ball_subspace() {
        // uniform disk in V: rotation symmetric, so pure moments cannot
        // prefer any particular second direction once one is known, but the
        // cross moment with the known vector can
        let spec = ComponentSpec {
            v: ComponentDist::isotropic_ball(2),
            w: ComponentDist::Gaussian,
        };
        let (raw, truth) = gen_factorizable(&spec, 3, 2, 150_000, 7).unwrap();
        let (s, _) = whiten(&raw).unwrap();
        let mut start = OrthonormalBasis::empty(3);
        start.push(&truth.v_basis.vector(0).view()).unwrap();
        let cfg = BasisRunConfig {
            m_max: 4,
            sz_repeats: 256,
            ..BasisRunConfig::default()
        };
        let mut rng = SeedSplitter::new(29).stream("extend");
        let anchor = OrthonormalBasis::empty(3);
        let (grown, log) = extend_basis(&s, &start, &anchor, &cfg, &mut rng).unwrap();
        assert_eq!(grown.len(), 2, "notes: {:?}", log.notes);
        // second vector lies in V: orthogonal to the first by construction,
        // so alignment with the second true axis is the whole story
        let vm = truth.v_basis.as_matrix();
        let proj = vm.t().dot(&grown.vector(1));
        let in_v = linalg::norm(&proj.view());
        assert!(in_v > 0.988, "V-alignment {in_v}, notes: {:?}", log.notes);
        let step = &log.steps[0];
        assert_eq!(step.order, 4);
        assert_eq!(step.exponent, 2);
    }

    #[test]
    fn empty_base_returns_immediately() {
        let spec = ComponentSpec {
            v: ComponentDist::Gaussian,
            w: ComponentDist::Gaussian,
        };
        let (raw, _) = gen_factorizable(&spec, 3, 1, 1_000, 3).unwrap();
        let (s, _) = whiten(&raw).unwrap();
        let base = OrthonormalBasis::empty(3);
        let anchor = OrthonormalBasis::empty(3);
        let mut rng = SeedSplitter::new(31).stream("extend");
        let (out, log) =
            extend_basis(&s, &base, &anchor, &BasisRunConfig::default(), &mut rng).unwrap();
        assert!(out.is_empty());
        assert_eq!(log.notes.len(), 1);
    }
}
