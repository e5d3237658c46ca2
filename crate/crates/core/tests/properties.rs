//! Structural invariants of the public API checked over randomized inputs.
//!
//! These pin the algebra the optimizer depends on: degree-m homogeneity,
//! the Euler identities tying values, gradients, and Hessians together,
//! agreement between frame-restricted functionals and explicitly projected
//! samples, and the contracts of whitening and orthonormal bases.

use mfac::dataset::{whiten, SampleMatrix};
use mfac::linalg::{normalize, principal_angles, OrthonormalBasis};
use mfac::moments::{gaussian_moment, MomentFunctional, MomentObjective};

use ndarray::{Array1, Array2, ArrayView1};
use proptest::prelude::*;

/// Small dense sample matrix with entries in a fixed range.
fn samples_strategy() -> impl Strategy<Value = SampleMatrix> {
    (2usize..=4, 30usize..=60)
        .prop_flat_map(|(dim, rows)| {
            proptest::collection::vec(-3.0f64..3.0, rows * dim)
                .prop_map(move |vals| (dim, rows, vals))
        })
        .prop_map(|(dim, rows, vals)| {
            let data = Array2::from_shape_vec((rows, dim), vals).unwrap();
            SampleMatrix::new(data, None).unwrap()
        })
}

/// Nonzero direction off the unit sphere, so the identities are exercised
/// away from the constraint surface too.
fn scaled_direction(dim: usize, rng: &mut rand_chacha::ChaCha8Rng) -> Array1<f64> {
    let u = mfac::linalg::random_unit(dim, rng);
    let scale = 0.4 + 1.4 * rand::Rng::random::<f64>(rng);
    u.mapv(|x| x * scale)
}

fn grad_dot(f: &dyn MomentObjective, u: &ArrayView1<f64>) -> (f64, Array1<f64>) {
    (f.value(u).unwrap(), f.gradient(u).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn raw_functional_is_homogeneous(
        s in samples_strategy(),
        degree in 2u32..=6,
        scale in 0.5f64..2.0,
        seed in 0u64..1_000,
    ) {
        let f = MomentFunctional::raw(&s, degree).unwrap();
        let mut rng: rand_chacha::ChaCha8Rng = rand::SeedableRng::seed_from_u64(seed);
        let u = mfac::linalg::random_unit(s.dim(), &mut rng);
        let scaled = u.mapv(|x| x * scale);
        let lhs = f.value(&scaled.view()).unwrap();
        let rhs = scale.powi(degree as i32) * f.value(&u.view()).unwrap();
        let tol = 1e-9 * (1.0 + lhs.abs() + rhs.abs());
        prop_assert!((lhs - rhs).abs() <= tol, "{lhs} vs {rhs}");
    }

    #[test]
    fn euler_identity_holds_for_raw_and_centered(
        s in samples_strategy(),
        degree in 2u32..=6,
        seed in 0u64..1_000,
    ) {
        let raw = MomentFunctional::raw(&s, degree).unwrap();
        let cen = MomentFunctional::centered(&s, degree).unwrap();
        let mut rng: rand_chacha::ChaCha8Rng = rand::SeedableRng::seed_from_u64(seed);
        let u = scaled_direction(s.dim(), &mut rng);
        for f in [&raw as &dyn MomentObjective, &cen] {
            let (val, grad) = grad_dot(f, &u.view());
            let dot = grad.dot(&u);
            let tol = 1e-8 * (1.0 + val.abs() + dot.abs());
            prop_assert!(
                (dot - degree as f64 * val).abs() <= tol,
                "grad.u = {dot}, m f = {}",
                degree as f64 * val
            );
        }
    }

    #[test]
    fn hessian_of_homogeneous_functional_scales_the_gradient(
        s in samples_strategy(),
        degree in 2u32..=6,
        seed in 0u64..1_000,
    ) {
        let f = MomentFunctional::raw(&s, degree).unwrap();
        let mut rng: rand_chacha::ChaCha8Rng = rand::SeedableRng::seed_from_u64(seed);
        let u = scaled_direction(s.dim(), &mut rng);
        // Euler applied to the gradient: H(u) u = (m-1) grad(u)
        let hu = f.hessian_apply(&u.view(), &u.view()).unwrap();
        let grad = f.gradient(&u.view()).unwrap();
        let want = grad.mapv(|g| g * (degree as f64 - 1.0));
        let scale = 1.0 + hu.iter().map(|x| x.abs()).fold(0.0, f64::max);
        for (a, b) in hu.iter().zip(want.iter()) {
            prop_assert!((a - b).abs() <= 1e-8 * scale, "{a} vs {b}");
        }
    }

    #[test]
    fn gradient_matches_central_differences(
        s in samples_strategy(),
        degree in 2u32..=5,
        seed in 0u64..1_000,
    ) {
        let dim = s.dim();
        let f = MomentFunctional::centered(&s, degree).unwrap();
        let mut rng: rand_chacha::ChaCha8Rng = rand::SeedableRng::seed_from_u64(seed);
        let u = scaled_direction(dim, &mut rng);
        let grad = f.gradient(&u.view()).unwrap();
        let h = 1e-5;
        for i in 0..dim {
            let mut up = u.clone();
            let mut dn = u.clone();
            up[i] += h;
            dn[i] -= h;
            let fd =
                (f.value(&up.view()).unwrap() - f.value(&dn.view()).unwrap()) / (2.0 * h);
            let tol = 1e-5 * (1.0 + grad[i].abs());
            prop_assert!((grad[i] - fd).abs() <= tol, "coord {i}: {} vs {fd}", grad[i]);
        }
    }

    #[test]
    fn frame_restriction_equals_explicit_projection(
        s in samples_strategy(),
        degree in 2u32..=6,
        seed in 0u64..1_000,
    ) {
        let dim = s.dim();
        let mut rng: rand_chacha::ChaCha8Rng = rand::SeedableRng::seed_from_u64(seed);
        let q = mfac::linalg::random_orthogonal(dim, &mut rng);
        let cols = dim - 1;
        let frame = q.slice(ndarray::s![.., ..cols]).to_owned();

        let restricted =
            MomentFunctional::centered_in_frame(&s, degree, &frame.view()).unwrap();
        let projected = SampleMatrix::new(s.data().dot(&frame), None).unwrap();
        let direct = MomentFunctional::centered(&projected, degree).unwrap();

        let c = mfac::linalg::random_unit(cols, &mut rng);
        let a = restricted.value(&c.view()).unwrap();
        let b = direct.value(&c.view()).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()), "{a} vs {b}");

        let ga = restricted.gradient(&c.view()).unwrap();
        let gb = direct.gradient(&c.view()).unwrap();
        for (x, y) in ga.iter().zip(gb.iter()) {
            prop_assert!((x - y).abs() <= 1e-9 * (1.0 + x.abs()), "{x} vs {y}");
        }
    }

    #[test]
    fn whitening_produces_identity_covariance(
        s in samples_strategy(),
    ) {
        // degenerate draws (rank-deficient covariance) are rejected upstream,
        // so only well-conditioned matrices reach the assertion
        if let Ok((white, _)) = whiten(&s) {
            let n = white.len() as f64;
            let d = white.data();
            let cov = d.t().dot(d) / n;
            for i in 0..white.dim() {
                for j in 0..white.dim() {
                    let want = if i == j { 1.0 } else { 0.0 };
                    prop_assert!(
                        (cov[[i, j]] - want).abs() <= 1e-8,
                        "cov[{i},{j}] = {}",
                        cov[[i, j]]
                    );
                }
            }
        }
    }

    #[test]
    fn basis_push_preserves_orthonormality(
        dim in 3usize..=6,
        seed in 0u64..10_000,
    ) {
        let mut rng: rand_chacha::ChaCha8Rng = rand::SeedableRng::seed_from_u64(seed);
        let mut basis = OrthonormalBasis::empty(dim);
        for _ in 0..dim {
            let v = mfac::linalg::random_unit(dim, &mut rng);
            basis.push(&v.view()).unwrap();
            prop_assert!(basis.orthonormality_defect() <= 1e-9);
        }
        // a full basis rejects any further vector
        let v = mfac::linalg::random_unit(dim, &mut rng);
        prop_assert!(basis.push(&v.view()).is_err());
    }

    #[test]
    fn principal_angles_vanish_for_same_span(
        dim in 3usize..=6,
        seed in 0u64..10_000,
    ) {
        let mut rng: rand_chacha::ChaCha8Rng = rand::SeedableRng::seed_from_u64(seed);
        let a = mfac::linalg::random_unit(dim, &mut rng);
        let b = mfac::linalg::random_unit(dim, &mut rng);
        let basis_a = OrthonormalBasis::new(dim, vec![a.clone(), b.clone()]);
        // b may be near-parallel to a, in which case the span is 1-dimensional
        if let Ok(basis_a) = basis_a {
            if basis_a.len() < 2 {
                return Ok(());
            }
            // same span presented in a rotated generating set
            let u = normalize(&(0.6 * &basis_a.vector(0) + 0.8 * &basis_a.vector(1)).view());
            let w = normalize(&(0.8 * &basis_a.vector(0) - 0.6 * &basis_a.vector(1)).view());
            let basis_b = OrthonormalBasis::new(dim, vec![u, w]).unwrap();
            let angles = principal_angles(&basis_a, &basis_b);
            for ang in angles {
                prop_assert!(ang.abs() <= 1e-6, "angle {ang}");
            }
        }
    }
}

#[test]
fn gaussian_moments_follow_the_double_factorial_recursion() {
    assert_eq!(gaussian_moment(0), 1.0);
    assert_eq!(gaussian_moment(1), 0.0);
    let mut expect = 1.0;
    for m in (2..=20).step_by(2) {
        expect *= (m - 1) as f64;
        assert_eq!(gaussian_moment(m), expect, "m = {m}");
        assert_eq!(gaussian_moment(m + 1), 0.0);
    }
}
