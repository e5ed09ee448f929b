use proptest::prelude::*;

use qgamma::algebra::{
    matrix_power, random_hermitian, random_state, random_state_with_rank, AlgebraShape,
    HermitianElement, State,
};
use qgamma::bregman::{
    fenchel_dual_estimate, representation_index_duality_residual, standard_cosine_residual,
    young_fenchel_residual, FenchelOptions,
};
use qgamma::channels::{
    apply_coarse_graining, apply_markov, choi_min_eigenvalue, random_channel, Channel,
};
use qgamma::divergence::{
    classical_gamma_divergence, gamma_divergence, hasegawa_form, ClassicalWeightVector,
};
use qgamma::embeddings::{dualiser, ell_gamma, ell_gamma_inverse, psi_gamma};
use qgamma::projection::{bregman_project, Constraint, ConstraintSet, ProjectionOptions};
use qgamma::quasientropy::{f_gamma, quasi_entropy_gamma};

fn shape_strategy() -> impl Strategy<Value = AlgebraShape> {
    prop::collection::vec(1usize..=3, 1..=3).prop_map(|b| AlgebraShape::new(b).unwrap())
}

fn gamma_strategy() -> impl Strategy<Value = f64> {
    0.05f64..0.95
}

fn config() -> ProptestConfig {
    ProptestConfig::with_cases(64)
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn spectral_round_trip(shape in shape_strategy(), seed in any::<u64>()) {
        let x = random_hermitian(&shape, seed);
        let s = x.spectral();
        prop_assert!(s.reconstruct().max_abs_diff(&x) <= 1e-10);
        prop_assert!(s.orthonormality_error() <= 1e-10);
    }

    #[test]
    fn power_round_trip(shape in shape_strategy(), seed in any::<u64>(), p in 0.2f64..3.0) {
        let rho = random_state(&shape, seed, true);
        let back = matrix_power(&matrix_power(&rho, p).unwrap(), 1.0 / p).unwrap();
        prop_assert!(back.element().max_abs_diff(rho.element()) <= 1e-9);
    }

    #[test]
    fn support_projection_is_idempotent(shape in shape_strategy(), seed in any::<u64>(), rank in 1usize..3) {
        let rho = random_state_with_rank(&shape, rank, seed, true);
        let p = rho.support_projection();
        let dense = p.to_dense();
        prop_assert!((&dense * &dense - &dense).norm() <= 1e-10);
        let pr = &dense * rho.element().to_dense();
        prop_assert!((pr - rho.element().to_dense()).norm() <= 1e-10);
    }

    #[test]
    fn pairing_is_bilinear(shape in shape_strategy(), seed in any::<u64>(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let x = random_hermitian(&shape, seed);
        let y = random_hermitian(&shape, seed.wrapping_add(1));
        let z = random_hermitian(&shape, seed.wrapping_add(2));
        let lhs = x.lin_comb(a, &y, b).unwrap().inner(&z).unwrap();
        let rhs = a * x.inner(&z).unwrap() + b * y.inner(&z).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
        prop_assert!((x.inner(&z).unwrap() - z.inner(&x).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn embedding_round_trip_and_potential(shape in shape_strategy(), seed in any::<u64>(), g in gamma_strategy()) {
        let w = random_state(&shape, seed, false);
        let x = ell_gamma(&w, g).unwrap();
        let back = ell_gamma_inverse(&x).unwrap();
        prop_assert!(back.element().max_abs_diff(w.element()) <= 1e-9 * (1.0 + w.trace()));
        let psi = psi_gamma(&x).unwrap();
        prop_assert!((psi - w.trace() / (1.0 - g)).abs() <= 1e-10 * (1.0 + psi.abs()));
    }

    #[test]
    fn young_fenchel_gap_is_nonnegative_and_tight(shape in shape_strategy(), seed in any::<u64>(), g in gamma_strategy()) {
        let x = ell_gamma(&random_state(&shape, seed, true), g).unwrap();
        let y = ell_gamma(&random_state(&shape, seed.wrapping_add(9), true), 1.0 - g).unwrap();
        prop_assert!(young_fenchel_residual(&x, &y).unwrap() >= -1e-12);
        let fx = dualiser(&x).unwrap();
        prop_assert!(young_fenchel_residual(&x, &fx).unwrap().abs() <= 1e-10);
    }

    #[test]
    fn divergence_is_nonnegative_and_faithful(shape in shape_strategy(), seed in any::<u64>(), g in gamma_strategy()) {
        let w = random_state(&shape, seed, false);
        let p = random_state(&shape, seed.wrapping_add(3), false);
        prop_assert!(gamma_divergence(&w, &p, g).unwrap().value >= 0.0);
        prop_assert_eq!(gamma_divergence(&w, &w, g).unwrap().value, 0.0);
    }

    #[test]
    fn joint_convexity(shape in shape_strategy(), seed in any::<u64>(), g in gamma_strategy(), lambda in 0.0f64..1.0) {
        let s = |k: u64| random_state(&shape, seed.wrapping_add(k), true);
        let (w1, p1, w2, p2) = (s(0), s(1), s(2), s(3));
        let d = |a: &State, b: &State| gamma_divergence(a, b, g).unwrap().value;
        let lhs = d(&w1.mix(lambda, &w2).unwrap(), &p1.mix(lambda, &p2).unwrap());
        let rhs = lambda * d(&w1, &p1) + (1.0 - lambda) * d(&w2, &p2);
        prop_assert!(lhs <= rhs + 1e-9);
    }

    #[test]
    fn commutative_reduction(weights in prop::collection::vec((0.01f64..1.0, 0.01f64..1.0), 1..6), g in gamma_strategy()) {
        let (p, q): (Vec<f64>, Vec<f64>) = weights.into_iter().unzip();
        let oracle = (g * p.iter().sum::<f64>() + (1.0 - g) * q.iter().sum::<f64>()
            - p.iter().zip(&q).map(|(a, b)| a.powf(g) * b.powf(1.0 - g)).sum::<f64>())
            / (g * (1.0 - g));
        let quantum = gamma_divergence(&State::classical(&p).unwrap(), &State::classical(&q).unwrap(), g).unwrap().value;
        let classical = classical_gamma_divergence(
            &ClassicalWeightVector::new(p).unwrap(),
            &ClassicalWeightVector::new(q).unwrap(),
            g,
        ).unwrap().value;
        prop_assert!((quantum - oracle).abs() <= 1e-12 * (1.0 + oracle.abs()));
        prop_assert!((classical - oracle).abs() <= 1e-12 * (1.0 + oracle.abs()));
    }

    #[test]
    fn trace_density_form_for_unit_trace(shape in shape_strategy(), seed in any::<u64>(), g in gamma_strategy()) {
        let w = random_state(&shape, seed, true);
        let p = random_state(&shape, seed.wrapping_add(5), true);
        let h = hasegawa_form(&w, &p, g).unwrap();
        prop_assert!((h - gamma_divergence(&w, &p, g).unwrap().value).abs() <= 1e-10);
    }

    #[test]
    fn standard_form_identities(shape in shape_strategy(), seed in any::<u64>(), g in gamma_strategy()) {
        let e = |k: u64| ell_gamma(&random_state(&shape, seed.wrapping_add(k), true), g).unwrap();
        let (r1, r2, r3) = (e(0), e(1), e(2));
        prop_assert!(standard_cosine_residual(&r1, &r2, &r3).unwrap().abs() <= 1e-9);
        prop_assert!(representation_index_duality_residual(&r1, &r2).unwrap().abs() <= 1e-9);
    }

    #[test]
    fn quasi_entropy_matches_divergence(shape in shape_strategy(), seed in any::<u64>(), g in gamma_strategy(), rank in 1usize..=3) {
        let w = random_state_with_rank(&shape, rank, seed, true);
        let p = random_state_with_rank(&shape, 4 - rank, seed.wrapping_add(1), true);
        let q = quasi_entropy_gamma(&w, &p, g).unwrap();
        prop_assert!((q - gamma_divergence(&w, &p, g).unwrap().value).abs() <= 1e-9);
    }

    #[test]
    fn f_gamma_is_nonnegative(exponent in -6.0f64..6.0, g in gamma_strategy()) {
        prop_assert!(f_gamma(10f64.powf(exponent), g).unwrap() >= -1e-12);
    }

    #[test]
    fn random_channels_are_cptp(n_in in 1usize..4, n_out in 1usize..4, extra in 0usize..3, seed in any::<u64>()) {
        let k = n_in.div_ceil(n_out) + extra;
        let t = random_channel(n_in, n_out, k, seed).unwrap();
        prop_assert!(t.is_unital());
        prop_assert!(t.is_trace_preserving());
        prop_assert!(choi_min_eigenvalue(&t) >= -1e-10);
    }

    #[test]
    fn unital_iff_trace_preserving(n in 1usize..4, scale in 0.5f64..1.5, seed in any::<u64>()) {
        let base = random_channel(n, n, 2, seed).unwrap();
        let shape = AlgebraShape::full(n);
        let kraus = base.kraus().iter().map(|k| k * qgamma::algebra::C64::new(scale, 0.0)).collect();
        let t = Channel::new(shape.clone(), shape, kraus).unwrap();
        prop_assert_eq!(t.is_unital(), t.is_trace_preserving());
        prop_assert_eq!(t.is_unital(), (scale - 1.0).abs() < 1e-11);
    }

    #[test]
    fn composition_matches_sequential_application(seed in any::<u64>()) {
        let a = random_channel(3, 2, 3, seed).unwrap();
        let b = random_channel(2, 3, 2, seed.wrapping_add(1)).unwrap();
        let ab = a.then(&b).unwrap();
        let rho = random_state(a.in_shape(), seed, true);
        let seq = apply_coarse_graining(&b, &apply_coarse_graining(&a, &rho).unwrap()).unwrap();
        let once = apply_coarse_graining(&ab, &rho).unwrap();
        prop_assert!(seq.element().max_abs_diff(once.element()) <= 1e-12);
        let x = random_hermitian(b.out_shape(), seed);
        let seq_x = apply_markov(&a, &apply_markov(&b, &x).unwrap()).unwrap();
        prop_assert!(seq_x.max_abs_diff(&apply_markov(&ab, &x).unwrap()) <= 1e-12);
    }

    #[test]
    fn fenchel_estimates_are_lower_bounds(n in 1usize..4, seed in any::<u64>(), g in 0.3f64..0.7) {
        let phi = random_state(&AlgebraShape::full(n), seed, false);
        let y = ell_gamma(&phi, 1.0 - g).unwrap();
        let cold = FenchelOptions { warm_start: false, max_iter: 50, ..Default::default() };
        let est = match fenchel_dual_estimate(&y, &cold) {
            Ok(e) => e,
            Err(qgamma::Error::FenchelMaxIterations(e)) => e,
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        prop_assert!(est.value <= phi.trace() / g + 1e-9);
    }
}

/// Classical projection oracle for a single constraint `Σ a_i x_i = c`:
/// stationarity gives `x_i = h(y_i + λ a_i)` with `h` the inverse of the
/// gradient `t ↦ (γt)^{(1−γ)/γ}/(1−γ)` clipped at 0, and `λ ↦ Σ a_i x_i(λ)` is
/// nondecreasing, so bisection on `λ` solves it.
fn classical_projection_oracle(psi: &[f64], a: &[f64], c: f64, g: f64) -> Vec<f64> {
    let y: Vec<f64> = psi.iter().map(|p| p.powf(1.0 - g) / (1.0 - g)).collect();
    let h = |v: f64| {
        if v <= 0.0 {
            0.0
        } else {
            ((1.0 - g) * v).powf(g / (1.0 - g)) / g
        }
    };
    let xs = |lam: f64| -> Vec<f64> { y.iter().zip(a).map(|(yi, ai)| h(yi + lam * ai)).collect() };
    let constraint = |lam: f64| -> f64 { xs(lam).iter().zip(a).map(|(x, ai)| x * ai).sum::<f64>() - c };
    let (mut lo, mut hi) = (-1.0, 1.0);
    while constraint(lo) > 0.0 {
        lo *= 2.0;
    }
    while constraint(hi) < 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if constraint(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // back to states: ω_i = (γ x_i)^{1/γ}
    xs(0.5 * (lo + hi)).iter().map(|x| (g * x).powf(1.0 / g)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn projection_matches_classical_oracle(
        psi in prop::collection::vec(0.05f64..1.0, 2..=6),
        raw_a in prop::collection::vec(-1.0f64..1.0, 6),
        g in 0.2f64..0.8,
        seed in any::<u64>(),
    ) {
        let n = psi.len();
        let mut a: Vec<f64> = raw_a[..n].to_vec();
        // make both signs present so that the set meets the positive cone
        a[0] = a[0].abs() + 0.1;
        a[1] = -(a[1].abs() + 0.1);
        let sigma = ell_gamma(&State::classical(&vec![0.3; n]).unwrap(), g).unwrap();
        let a_el = HermitianElement::classical(&a).unwrap();
        let c = sigma.element().inner(&a_el).unwrap();
        let set = ConstraintSet::new(g, vec![Constraint { a: a_el, c }]).unwrap();
        let psi_state = State::classical(&psi).unwrap();
        let opts = ProjectionOptions { start: qgamma::projection::Start::Seeded(seed), ..Default::default() };
        let res = bregman_project(&psi_state, &set, &opts).unwrap();
        let oracle = classical_projection_oracle(&psi, &a, c, g);
        for (i, o) in oracle.iter().enumerate() {
            let got = res.projected.blocks()[i][(0, 0)].re;
            prop_assert!((got - o).abs() <= 1e-6, "coordinate {i}: {got} vs {o}");
        }
        prop_assert!(res.objective_trace.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        prop_assert!(res.divergence >= -1e-9);
    }
}
