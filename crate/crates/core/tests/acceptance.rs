//! End-to-end acceptance checks, one test per criterion.
//!
//! Each test prints a single summary line; tolerances and sample counts are
//! fixed, seeds are fixed, and statistical margins are chosen so that the
//! asserted bound sits several standard deviations away from the expected
//! value. Runtime budgets are asserted where a criterion carries one.

use std::time::Instant;

use ndarray::{s, Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mfac::basis::{find_basis, BasisRunConfig};
use mfac::dataset::{
    gen_factorizable, gen_labeled, sample_component, subspace_report, whiten, ComponentDist,
    ComponentSpec, Concept, SampleMatrix,
};
use mfac::factor::{factor_general, factor_under_gaussian, FactorConfig};
use mfac::learner::{learn_under_gaussian, InnerLearner, LearnConfig};
use mfac::linalg::{self, OrthonormalBasis};
use mfac::localopt::{default_params, local_opt, OptSense, ParamOptions};
use mfac::moments::{
    delta_score, gaussian_moment, AxisPolynomial, DiffObjective, MomentFunctional,
    MomentObjective,
};
use mfac::polytest::{sz_test, SZConfig, SZVerdict};

fn random_unit(dim: usize, rng: &mut ChaCha8Rng) -> Array1<f64> {
    linalg::random_unit(dim, rng)
}

#[test]
fn a01_gaussian_moment_table_is_exact() {
    let want = [0.0, 1.0, 0.0, 3.0, 0.0, 15.0, 0.0, 105.0];
    for (i, w) in want.iter().enumerate() {
        let m = (i + 1) as u32;
        assert_eq!(gaussian_moment(m), *w, "order {m}");
    }
    println!("A1 PASS: gaussian moments 1..=8 equal (0,1,0,3,0,15,0,105) exactly");
}

#[test]
fn a02_derivatives_match_finite_differences_on_random_instances() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let h = 1e-4;
    let mut worst_grad = 0.0f64;
    let mut worst_hess = 0.0f64;
    let mut worst_euler = 0.0f64;
    for case in 0..200 {
        let n = rng.random_range(2..=6usize);
        let rows = rng.random_range(10..=100usize);
        let m = rng.random_range(2..=6u32);
        let data = Array2::from_shape_fn((rows, n), |_| rng.random_range(-2.0..2.0));
        let s = SampleMatrix::new(data, None).unwrap();
        let f = MomentFunctional::centered(&s, m).unwrap();
        let u = random_unit(n, &mut rng);
        let w = random_unit(n, &mut rng);

        let grad = f.gradient(&u.view()).unwrap();
        let fd = DiffObjective::new(&f, h);
        let grad_fd = fd.gradient(&u.view()).unwrap();
        let gerr = norm(&(&grad - &grad_fd)) / norm(&grad_fd).max(1e-6);
        assert!(gerr <= 1e-5, "case {case}: gradient mismatch {gerr:.3e}");
        worst_grad = worst_grad.max(gerr);

        // directional second derivative from the analytic gradient
        let up = &u + &(h * &w);
        let um = &u - &(h * &w);
        let hv_fd = (f.gradient(&up.view()).unwrap() - f.gradient(&um.view()).unwrap())
            / (2.0 * h);
        let hv = f.hessian_apply(&u.view(), &w.view()).unwrap();
        let herr = norm(&(&hv - &hv_fd)) / norm(&hv_fd).max(1e-6);
        assert!(herr <= 1e-5, "case {case}: hessian mismatch {herr:.3e}");
        worst_hess = worst_hess.max(herr);

        // m-homogeneity ties the gradient to the value along u
        let val = f.value(&u.view()).unwrap();
        let eerr = (grad.dot(&u) - m as f64 * val).abs() / (m as f64 * val).abs().max(1e-6);
        assert!(eerr <= 1e-9, "case {case}: radial identity off by {eerr:.3e}");
        worst_euler = worst_euler.max(eerr);
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 30.0, "derivative sweep took {elapsed:.1}s, budget 30s");
    println!(
        "A2 PASS: 200 instances, worst grad {worst_grad:.2e}, worst hess {worst_hess:.2e}, \
         worst radial identity {worst_euler:.2e}, {elapsed:.1}s"
    );
}

fn norm(v: &Array1<f64>) -> f64 {
    v.dot(v).sqrt()
}

// Degree-4 directional moment of a 2d unit-variance box factor crossed with
// gaussian noise, from the product structure: axis fourth moment 9/5, cross
// terms from pairing second moments (all 1), gaussian block contributing 3
// on its own norm and 6 on the mixed term.
fn box2_gauss_f4(a: f64, b: f64) -> f64 {
    let wv2 = a * a + b * b;
    let ww2 = (1.0 - wv2).max(0.0);
    1.8 * (a.powi(4) + b.powi(4)) + 6.0 * a * a * b * b + 6.0 * wv2 * ww2 + 3.0 * ww2 * ww2
}

#[test]
fn a03_box_fourth_moment_matches_product_prediction() {
    let start = Instant::now();
    let spec = ComponentSpec {
        v: ComponentDist::isotropic_box(2),
        w: ComponentDist::Gaussian,
    };
    let (s, truth) = gen_factorizable(&spec, 8, 2, 200_000, 31).unwrap();
    let f4 = MomentFunctional::raw(&s, 4).unwrap();
    let v1 = truth.v_basis.vector(0);
    let v2 = truth.v_basis.vector(1);
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let u = random_unit(8, &mut rng);
        let a = u.dot(&v1);
        let b = u.dot(&v2);
        let want = box2_gauss_f4(a, b);
        let got = f4.value(&u.view()).unwrap();
        let dev = (got - want).abs();
        worst = worst.max(dev);
        assert!(dev <= 0.08, "deviation {dev:.4} at ||u_V||^2 = {:.3}", a * a + b * b);
    }

    // independent draw validating the prediction itself, not just one dataset
    let (s2, truth2) = gen_factorizable(&spec, 8, 2, 200_000, 33).unwrap();
    let f4b = MomentFunctional::raw(&s2, 4).unwrap();
    let w1 = truth2.v_basis.vector(0);
    let w2 = truth2.v_basis.vector(1);
    for _ in 0..10 {
        let u = random_unit(8, &mut rng);
        let want = box2_gauss_f4(u.dot(&w1), u.dot(&w2));
        let got = f4b.value(&u.view()).unwrap();
        assert!((got - want).abs() <= 0.08, "cross-check draw deviates");
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 120.0, "moment sweep took {elapsed:.1}s, budget 120s");
    println!("A3 PASS: 100 directions within 0.08 (worst {worst:.4}), cross-checked, {elapsed:.1}s");
}

#[test]
fn a04_factoring_recovers_box_plane_against_gaussian_noise() {
    let spec = ComponentSpec {
        v: ComponentDist::isotropic_box(2),
        w: ComponentDist::Gaussian,
    };
    let mut cfg = FactorConfig::default();
    cfg.basis.m_max = 4;
    let mut hits = 0;
    let mut angles = Vec::new();
    for seed in 401..=410u64 {
        let start = Instant::now();
        let (s, truth) = gen_factorizable(&spec, 10, 2, 500_000, seed).unwrap();
        let (ws, _t) = whiten(&s).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8000 + seed);
        let fg = factor_under_gaussian(&ws, &cfg, &mut rng).unwrap();
        let rep = subspace_report(&fg.v, &truth).unwrap();
        let elapsed = start.elapsed().as_secs_f64();
        assert!(elapsed < 300.0, "seed {seed} took {elapsed:.0}s, budget 300s");
        let ok = fg.v.len() == 2 && rep.largest_angle_deg <= 5.0;
        if ok {
            hits += 1;
        }
        angles.push(format!(
            "{:.2}{}",
            rep.largest_angle_deg,
            if ok { "" } else { "!" }
        ));
    }
    assert!(hits >= 9, "only {hits}/10 seeds recovered the plane: {angles:?}");
    println!("A4 PASS: {hits}/10 seeds, dim 2 within 5 degrees (angles {angles:?})");
}

#[test]
fn a05_gaussian_null_rarely_emits_vectors() {
    let spec = ComponentSpec {
        v: ComponentDist::Gaussian,
        w: ComponentDist::Gaussian,
    };
    let cfg = BasisRunConfig::default();
    let mut emitted = 0;
    for i in 0..100u64 {
        let (s, _t) = gen_factorizable(&spec, 10, 3, 200_000, 1000 + i).unwrap();
        let (ws, _w) = whiten(&s).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5000 + i);
        let (basis, _log) = find_basis(&ws, &cfg, &mut rng).unwrap();
        if !basis.is_empty() {
            emitted += 1;
        }
    }
    assert!(
        emitted <= 10,
        "{emitted}/100 null runs produced a direction, allowed 10"
    );
    println!("A5 PASS: {emitted}/100 pure-gaussian runs emitted a direction (allowed 10)");
}

#[test]
fn a06_ball_fourth_moment_sits_at_its_analytic_value() {
    let mut rng = ChaCha8Rng::seed_from_u64(60);
    let data = sample_component(&ComponentDist::isotropic_ball(3), 3, 1_000_000, &mut rng)
        .unwrap();
    let s = SampleMatrix::new(data, None).unwrap();
    let f4 = MomentFunctional::raw(&s, 4).unwrap();
    let want = 15.0 / 7.0;
    let mut worst = 0.0f64;
    let mut dir_rng = ChaCha8Rng::seed_from_u64(61);
    for _ in 0..20 {
        let u = random_unit(3, &mut dir_rng);
        let dev = (f4.value(&u.view()).unwrap() - want).abs();
        worst = worst.max(dev);
        assert!(dev <= 0.02, "deviation {dev:.4} from 15/7");
    }
    // the gap to the gaussian value is a fixed constant, not a vanishing one
    assert!((3.0 - want).abs() > 0.5);
    println!(
        "A6 PASS: 20 directions within 0.02 of 15/7 (worst {worst:.4}), gap to 3 is {:.3}",
        3.0 - want
    );
}

#[test]
fn a07_nonzeroness_probing_separates_zero_from_a_coordinate() {
    // zero polynomial: no probe can exceed a positive threshold
    let zero_cfg = SZConfig::new(4, 20, 0.1);
    let mut zero_hits = 0;
    for i in 0..1000u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(7000 + i);
        let r = sz_test(|_| Ok(0.0), 3, &zero_cfg, &mut rng).unwrap();
        if matches!(r.verdict, SZVerdict::Nonzero { .. }) {
            zero_hits += 1;
        }
    }
    assert_eq!(zero_hits, 0, "zero polynomial flagged nonzero {zero_hits} times");

    // first coordinate: probes have coordinates in {1, 2}, so the smallest
    // possible unit value is 1/3 and every probe clears 0.1
    let coord_cfg = SZConfig::new(1, 20, 0.1);
    let mut coord_hits = 0;
    for i in 0..1000u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(7000 + i);
        let r = sz_test(|u| Ok(u[0]), 3, &coord_cfg, &mut rng).unwrap();
        if matches!(r.verdict, SZVerdict::Nonzero { .. }) {
            coord_hits += 1;
        }
    }
    assert_eq!(coord_hits, 1000, "u1 missed in {} seeds", 1000 - coord_hits);
    println!("A7 PASS: 0/1000 false positives on zero, 1000/1000 detections of u1");
}

#[test]
fn a08_ridge_between_axes_is_always_escaped() {
    // s^4 + t^4 on the circle: the diagonal is a first-order critical point
    // with positive tangential curvature, the axes are the maxima
    let f = AxisPolynomial::new(vec![1.0, 1.0], 4).unwrap();
    let params = default_params(4, 0.5, 1.0, &ParamOptions::default()).unwrap();
    let start_pt = ndarray::arr1(&[std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2]);
    let mut hits = 0;
    for i in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(8000 + i);
        let out = local_opt(&f, &start_pt.view(), OptSense::Maximize, &params, &mut rng)
            .unwrap();
        let axis = out.u[0].abs().max(out.u[1].abs());
        if axis >= 0.99 {
            hits += 1;
        }
    }
    assert_eq!(hits, 100, "only {hits}/100 runs reached an axis");
    println!("A8 PASS: 100/100 runs escaped the diagonal to an axis coordinate >= 0.99");
}

#[test]
fn a09_box_concept_is_learned_through_ball_and_noise() {
    let spec = ComponentSpec {
        v: ComponentDist::isotropic_ball(2),
        w: ComponentDist::Gaussian,
    };
    let concept = Concept::Box {
        intervals: vec![(-1.0, 1.0), (-1.0, 1.0)],
    };
    let mut cfg = LearnConfig::default();
    cfg.k = 2;
    cfg.inner = InnerLearner::Hull;
    cfg.basis.m_max = 4;
    let mut hits = 0;
    let mut rates = Vec::new();
    for seed in 901..=910u64 {
        let start = Instant::now();
        let (s, _truth) = gen_labeled(&spec, 10, 2, &concept, 500_000, seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9000 + seed);
        let out = learn_under_gaussian(&s, &cfg, &mut rng).unwrap();
        let elapsed = start.elapsed().as_secs_f64();
        assert!(elapsed < 600.0, "seed {seed} took {elapsed:.0}s, budget 600s");
        let rate = out.holdout.error_rate;
        let ok = rate <= 0.05;
        if ok {
            hits += 1;
        }
        rates.push(format!("{:.3}{}", rate, if ok { "" } else { "!" }));
    }
    assert!(hits >= 8, "only {hits}/10 seeds under 5% holdout error: {rates:?}");
    println!("A9 PASS: {hits}/10 seeds at holdout error <= 5% (rates {rates:?})");
}

fn axis_pair(n: usize, i: usize, j: usize) -> OrthonormalBasis {
    let mut e1 = Array1::zeros(n);
    e1[i] = 1.0;
    let mut e2 = Array1::zeros(n);
    e2[j] = 1.0;
    OrthonormalBasis::new(n, vec![e1, e2]).unwrap()
}

fn two_factor_samples(
    v: &ComponentDist,
    w: &ComponentDist,
    count: usize,
    rng: &mut ChaCha8Rng,
) -> SampleMatrix {
    let xv = sample_component(v, 2, count, rng).unwrap();
    let xw = sample_component(w, 1, count, rng).unwrap();
    let mut data = Array2::zeros((count, 3));
    data.slice_mut(s![.., 0..2]).assign(&xv);
    data.slice_mut(s![.., 2..3]).assign(&xw);
    SampleMatrix::new(data, None).unwrap()
}

const PAIRS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

fn nearest_pair(v: &OrthonormalBasis) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (idx, (i, j)) in PAIRS.iter().enumerate() {
        let pair = axis_pair(3, *i, *j);
        let worst = linalg::principal_angles(v, &pair)
            .iter()
            .cloned()
            .fold(0.0f64, f64::max)
            .to_degrees();
        if worst < best.1 {
            best = (idx, worst);
        }
    }
    best
}

#[test]
fn a10_general_factoring_agrees_with_exhaustive_defect_scores() {
    let cfg = FactorConfig::default();

    // All coordinates iid box: every axis pair is a valid split, so the
    // order-3 scores all vanish and the check is that the chosen pair ties
    // the exhaustive minimum within estimation noise. The noise scale is the
    // summed monomial variance over the ten degree-3 multisets divided by the
    // sample count, about 1.6e-4 here; observed chosen-vs-min gaps stay below
    // 3e-5 and population-level contrasts (the ball case below) are hundreds
    // of times larger than this tolerance.
    let tie3 = 4e-4;
    let noise_cap = 1e-3;
    for seed in 101..=110u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = two_factor_samples(
            &ComponentDist::isotropic_box(2),
            &ComponentDist::isotropic_box(1),
            150_000,
            &mut rng,
        );
        let mut frng = ChaCha8Rng::seed_from_u64(2000 + seed);
        let gf = factor_general(&s, 2, &cfg, &mut frng).unwrap();
        let (chosen, align) = nearest_pair(&gf.v);
        assert!(align < 15.0, "seed {seed}: split {align:.1} degrees off every axis pair");
        let scores: Vec<f64> = PAIRS
            .iter()
            .map(|(i, j)| delta_score(&s, &axis_pair(3, *i, *j), 3).unwrap())
            .collect();
        let min = scores.iter().cloned().fold(f64::INFINITY, f64::min);
        for (idx, sc) in scores.iter().enumerate() {
            assert!(
                *sc < noise_cap,
                "seed {seed}: pair {idx} scores {sc:.3e}, expected every split near zero"
            );
        }
        assert!(
            scores[chosen] <= min + tie3,
            "seed {seed}: chosen pair scores {:.3e} vs minimum {min:.3e}",
            scores[chosen]
        );
    }

    // Ball plane next to a box axis: still symmetric at order 3, but order 4
    // separates the true plane from both mixed pairs, so the chosen pair
    // must be the exhaustive argmin and the argmin must be the plane.
    let mut ratios = Vec::new();
    for seed in 201..=210u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = two_factor_samples(
            &ComponentDist::isotropic_ball(2),
            &ComponentDist::isotropic_box(1),
            150_000,
            &mut rng,
        );
        let mut frng = ChaCha8Rng::seed_from_u64(3000 + seed);
        let gf = factor_general(&s, 2, &cfg, &mut frng).unwrap();
        let (chosen, align) = nearest_pair(&gf.v);
        assert!(align < 10.0, "seed {seed}: split {align:.1} degrees off the plane");
        let scores: Vec<f64> = PAIRS
            .iter()
            .map(|(i, j)| delta_score(&s, &axis_pair(3, *i, *j), 4).unwrap())
            .collect();
        let wrong = scores[1].min(scores[2]);
        assert_eq!(chosen, 0, "seed {seed}: picked pair {chosen}, scores {scores:?}");
        assert!(
            scores[0] < wrong,
            "seed {seed}: plane does not minimize order-4 defects: {scores:?}"
        );
        ratios.push(format!("{:.0}", wrong / scores[0].max(1e-12)));
    }
    println!(
        "A10 PASS: 10/10 iid-box seeds tie the exhaustive order-3 minimum, 10/10 ball-box \
         seeds pick the plane with order-4 separation x{ratios:?}"
    );
}
