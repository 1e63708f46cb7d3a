use gaudin_core::elliptic::{EllipticCache, Period};
use gaudin_core::flows::{
    action_along_curve, evolve, poisson_bracket, step, EvolveOptions, FlowCurve, Method,
};
use gaudin_core::lie::{self, CMatrix, InvariantPolynomial, LieBasis};
use gaudin_core::model::{GaudinModel, ModelJson, PhaseState, StateJson};
use gaudin_core::sample::{self, random_state};
use gaudin_core::verify::{self, fitted_order, Suite};
use gaudin_core::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn hams(m: usize) -> Vec<(Complex64, u32)> {
    if m == 2 {
        vec![(c(2.0, 0.5), 2), (c(-1.0, 1.0), 2)]
    } else {
        vec![(c(2.0, 0.5), 2), (c(-1.0, 1.0), 3)]
    }
}

fn rational(seed: u64, m: usize) -> (GaudinModel, PhaseState) {
    let mut rng = sample::rng(seed);
    let model = verify::rational_test_model(&mut rng, m, &hams(m)).unwrap();
    let state = random_state(&model, &mut rng).unwrap();
    (model, state)
}

fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).iter().map(|x| x.norm()).fold(0.0, f64::max)
}

fn spectrum(x: &CMatrix) -> Vec<Complex64> {
    let mut e = lie::eigenvalues(x).unwrap();
    e.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    e
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn exp_of_negative_is_inverse(seed in any::<u64>(), m in 2usize..5, scale in 0.01f64..1.5) {
        let mut rng = sample::rng(seed);
        let x = sample::random_traceless(&mut rng, m) * c(scale, 0.0);
        let prod = lie::expm(&x).unwrap() * lie::expm(&-x.clone()).unwrap();
        prop_assert!(max_abs_diff(&prod, &CMatrix::identity(m, m)) < 1e-12);
    }

    #[test]
    fn decompose_compose_round_trip(seed in any::<u64>(), m in 2usize..5) {
        let mut rng = sample::rng(seed);
        let basis = LieBasis::sl(m).unwrap();
        let x = sample::random_traceless(&mut rng, m);
        let back = basis.compose(&basis.decompose(&x).unwrap());
        prop_assert!(max_abs_diff(&back, &x) < 1e-12);
    }

    #[test]
    fn invariant_polynomials_are_conjugation_invariant(seed in any::<u64>(), m in 2usize..5, k in 2u32..5) {
        let mut rng = sample::rng(seed);
        let x = sample::random_traceless(&mut rng, m);
        let g = sample::random_group_element(&mut rng, m, 0.4);
        let y = &g * &x * lie::inverse(&g).unwrap();
        let p = InvariantPolynomial::new(k).unwrap();
        let (a, b) = (p.eval(&x), p.eval(&y));
        prop_assert!((a - b).norm() <= 1e-10 * (1.0 + a.norm()));
    }

    #[test]
    fn char_poly_vanishes_on_eigenvalues(seed in any::<u64>(), m in 2usize..5) {
        let mut rng = sample::rng(seed);
        let x = sample::random_matrix(&mut rng, m);
        let coeffs = lie::char_poly(&x);
        for lam in lie::eigenvalues(&x).unwrap() {
            // leading 1 is implicit
            let v = coeffs.iter().fold(c(1.0, 0.0), |acc, a| acc * lam + a);
            prop_assert!(v.norm() < 1e-9, "p(lambda) = {v}");
        }
    }

    #[test]
    fn weierstrass_parity_and_quasi_periodicity(
        re in -0.45f64..0.45, im in -0.45f64..0.45, tre in -0.5f64..0.5, tim in 0.6f64..2.0,
    ) {
        let cache = EllipticCache::new(c(tre, tim)).unwrap();
        let z = c(re, im) + cache.tau() * c(0.3, 0.0);
        prop_assume!(cache.lattice_distance(z) > 0.05);
        let (w, wm) = (cache.eval(z).unwrap(), cache.eval(-z).unwrap());
        prop_assert!((w.zeta + wm.zeta).norm() < 1e-10 * (1.0 + w.zeta.norm()));
        prop_assert!((w.wp - wm.wp).norm() < 1e-10 * (1.0 + w.wp.norm()));
        for l in [Period::One, Period::Tau] {
            prop_assert!(cache.quasi_periodicity_residual(z, l).unwrap() < 1e-9);
        }
    }

    #[test]
    fn hamiltonians_invariant_under_global_conjugation(seed in any::<u64>(), m in 2usize..4) {
        let (model, state) = rational(seed, m);
        let mut rng = sample::rng(seed.wrapping_add(1));
        let g = sample::random_group_element(&mut rng, m, 0.3);
        let mut moved = state.clone();
        for phi in &mut moved.phis {
            *phi = &g * &*phi;
        }
        let (a, b) = (model.hamiltonians(&state).unwrap(), model.hamiltonians(&moved).unwrap());
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).norm() <= 1e-9 * (1.0 + x.norm()));
        }
    }

    #[test]
    fn poisson_bracket_is_antisymmetric_and_involutive(seed in any::<u64>(), m in 2usize..4) {
        let (model, state) = rational(seed, m);
        let h01 = poisson_bracket(&model, &state, 0, 1).unwrap();
        let h10 = poisson_bracket(&model, &state, 1, 0).unwrap();
        prop_assert!((h01 + h10).norm() < 1e-12 * (1.0 + h01.norm()));
        prop_assert!(h01.norm() < 1e-9);
        prop_assert!(poisson_bracket(&model, &state, 0, 0).unwrap().norm() < 1e-12);
    }

    #[test]
    fn conjugation_step_preserves_orbits(seed in any::<u64>(), h in 0.001f64..0.05) {
        let (model, state) = rational(seed, 3);
        let next = step(&model, &state, 1, h, Method::Conjugation).unwrap();
        let before = model.orbit_elements(&state).unwrap();
        let after = model.orbit_elements(&next).unwrap();
        for (a, b) in before.iter().zip(&after) {
            for (x, y) in spectrum(a).iter().zip(spectrum(b)) {
                prop_assert!((x - y).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn state_json_round_trip(seed in any::<u64>()) {
        let (model, state) = rational(seed, 2);
        let text = serde_json::to_string(&StateJson::from(state.clone())).unwrap();
        let back: PhaseState = serde_json::from_str::<StateJson>(&text).unwrap().try_into().unwrap();
        prop_assert_eq!(&back, &state);
        let mj = ModelJson::from(&model);
        let again: ModelJson = serde_json::from_str(&serde_json::to_string(&mj).unwrap()).unwrap();
        prop_assert_eq!(&again, &mj);
        prop_assert_eq!(ModelJson::from(&again.build().unwrap()), mj);
    }

    #[test]
    fn axis_aligned_curves_round_trip(legs in prop::collection::vec((0usize..3, -2.0f64..2.0), 0..6)) {
        let curve = FlowCurve::from_legs(vec![0.0; 3], &legs).unwrap();
        prop_assert_eq!(curve.legs().len(), legs.len());
        let back: FlowCurve = serde_json::from_str(&serde_json::to_string(&curve).unwrap()).unwrap();
        prop_assert_eq!(back, curve);
    }

    #[test]
    fn diagonal_segments_are_rejected(a in 0.1f64..2.0, b in 0.1f64..2.0) {
        prop_assert!(FlowCurve::new(vec![vec![0.0, 0.0], vec![a, b]]).is_err());
    }

    #[test]
    fn fitted_order_recovers_power_laws(k in 0.5f64..6.0, scale in 1e-6f64..1e3) {
        let hs = [0.2, 0.1, 0.05, 0.025];
        let errs: Vec<f64> = hs.iter().map(|h: &f64| scale * h.powf(k)).collect();
        prop_assert!((fitted_order(&hs, &errs) - k).abs() < 1e-9);
    }
}

#[test]
fn zero_length_curve_gives_one_sample() {
    let (model, state) = rational(3, 2);
    let curve = FlowCurve::new(vec![vec![0.5, -1.0]]).unwrap();
    let traj = evolve(&model, &state, &curve, 0.01, EvolveOptions::default()).unwrap();
    assert_eq!(traj.samples.len(), 1);
    assert_eq!(traj.samples[0].state.t, vec![0.5, -1.0]);
    assert_eq!(action_along_curve(&model, &traj).unwrap(), c(0.0, 0.0));
}

#[test]
fn curve_dimension_must_match_flows() {
    let (model, state) = rational(3, 2);
    let curve = FlowCurve::new(vec![vec![0.0; 3], vec![1.0, 0.0, 0.0]]).unwrap();
    assert!(evolve(&model, &state, &curve, 0.01, EvolveOptions::default()).is_err());
    assert!(FlowCurve::new(vec![]).is_err());
    assert!(FlowCurve::new(vec![vec![0.0], vec![f64::NAN]]).is_err());
}

fn final_state_error(method: Method, hs: &[f64]) -> Vec<f64> {
    let (model, state) = rational(11, 2);
    let curve = FlowCurve::from_legs(vec![0.0, 0.0], &[(0, 0.4)]).unwrap();
    let run = |h: f64| {
        let traj = evolve(&model, &state, &curve, h, EvolveOptions { method, project_residue_sum: false }).unwrap();
        model.orbit_elements(traj.last_state().unwrap()).unwrap()
    };
    let reference = run(hs[hs.len() - 1] / 8.0);
    hs.iter()
        .map(|&h| {
            run(h).iter().zip(&reference).map(|(a, b)| max_abs_diff(a, b)).fold(0.0, f64::max)
        })
        .collect()
}

#[test]
fn integrator_orders() {
    let hs = [0.04, 0.02, 0.01];
    let rk4 = fitted_order(&hs, &final_state_error(Method::Rk4, &hs));
    assert!((rk4 - 4.0).abs() < 0.5, "rk4 order {rk4}");
    let mid = fitted_order(&hs, &final_state_error(Method::Conjugation, &hs));
    assert!((1.5..2.5).contains(&mid), "conjugation order {mid}");
}

#[test]
fn suite_names_parse() {
    for s in [Suite::Weierstrass, Suite::Rational, Suite::Elliptic, Suite::Univar, Suite::Multiform, Suite::All] {
        assert_eq!(s.name().parse::<Suite>().unwrap(), s);
    }
    assert!("bogus".parse::<Suite>().is_err());
}

#[test]
fn verify_is_deterministic() {
    let a = serde_json::to_string(&verify::run(Suite::Multiform, 5)).unwrap();
    let b = serde_json::to_string(&verify::run(Suite::Multiform, 5)).unwrap();
    assert_eq!(a, b);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn elliptic_hamiltonians_are_torus_invariant_and_involutive(seed in any::<u64>(), d in -0.5f64..0.5) {
        let mut rng = sample::rng(seed);
        let model = verify::elliptic_test_model(&mut rng, 2, 2).unwrap();
        let state = random_state(&model, &mut rng).unwrap();
        let g = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(d, 0.3).exp(), c(-d, -0.3).exp()]));
        let mut moved = state.clone();
        for phi in &mut moved.phis {
            *phi = &g * &*phi;
        }
        let a = model.hamiltonians(&state).unwrap();
        let b = model.hamiltonians(&moved).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).norm() <= 1e-9 * (1.0 + x.norm()));
        }
        let pb = poisson_bracket(&model, &state, 0, 1).unwrap();
        prop_assert!(pb.norm() < 1e-8, "{{H0, H1}} = {pb}");
    }
}
