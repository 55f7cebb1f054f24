use nalgebra::DVector;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use underlay_core::admission::{
    equal_power_allocate, equal_rate_allocate, ilp_admit, required_power, AdmissionProblem, Solver,
};
use underlay_core::array::{steering_vector, LinkParams, Position};
use underlay_core::basis::{interference_basis, quadratic_form};
use underlay_core::beamforming::{design_beamformers, nullsteer, NullSpace};
use underlay_core::config::ExperimentConfig;
use underlay_core::estimation::quantize_angle;
use underlay_core::harness::prepare_trial;
use underlay_core::verify::{exhaustive_admission, random_problem};
use underlay_core::C64;

fn phi() -> impl Strategy<Value = f64> {
    -1.0..1.0f64
}

fn complex_vec(n: usize) -> impl Strategy<Value = DVector<C64>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), n)
        .prop_map(|v| DVector::from_iterator(v.len(), v.into_iter().map(|(re, im)| C64::new(re, im))))
}

fn problem(max_k: usize) -> impl Strategy<Value = AdmissionProblem> {
    (any::<u64>(), 1..=max_k).prop_map(|(seed, k)| random_problem(&mut ChaCha8Rng::seed_from_u64(seed), k))
}

proptest! {
    #[test]
    fn steering_vector_has_norm_sqrt_m(m in 1usize..=512, phi in phi()) {
        let a = steering_vector(m, phi).unwrap();
        prop_assert!((a.norm() - (m as f64).sqrt()).abs() <= 1e-12 * (m as f64).sqrt());
        prop_assert_eq!(a[0], C64::new(1.0, 0.0));
    }

    #[test]
    fn attenuation_falls_with_distance(d1 in 0.1..200.0f64, extra in 0.01..100.0f64, gamma in 1.5..5.0f64) {
        let origin = Position::new(0.0, 0.0);
        let near = LinkParams::between(&origin, &Position::new(0.0, d1), gamma, 0.0).unwrap();
        let far = LinkParams::between(&origin, &Position::new(0.0, d1 + extra), gamma, 0.0).unwrap();
        prop_assert!(far.alpha < near.alpha);
        prop_assert!((near.alpha - d1.powf(-gamma / 2.0)).abs() <= 1e-12 * near.alpha);
    }

    #[test]
    fn link_angle_lies_in_range(x in -50.0..50.0f64, y in 0.1..50.0f64) {
        let link = LinkParams::between(&Position::new(0.0, 0.0), &Position::new(x, y), 2.0, 0.0).unwrap();
        prop_assert!((-1.0..=1.0).contains(&link.phi));
        prop_assert!((link.phi - x / (x * x + y * y).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn quantization_is_bounded_and_idempotent(phi in phi(), grid in prop::sample::select(vec![4usize, 16, 64, 128, 256])) {
        let q = quantize_angle(phi, grid);
        prop_assert!((q - phi).abs() <= 1.0 / grid as f64 + 1e-15);
        prop_assert_eq!(quantize_angle(q, grid), q);
        let cell = (q + 1.0) * grid as f64 / 2.0 - 0.5;
        prop_assert!((cell - cell.round()).abs() < 1e-9);
    }

    #[test]
    fn interference_matrix_is_psd(phi in phi(), m in 2usize..64) {
        let f = interference_basis(phi, m).unwrap().matrix;
        let min = f.symmetric_eigenvalues().min();
        prop_assert!(min >= -1e-10 * m as f64, "min eigenvalue {min}");
        prop_assert!((&f - f.adjoint()).norm() == 0.0);
    }

    #[test]
    fn interference_matrix_shift_covariance(phi in -0.5..0.5f64, shift in -0.5..0.5f64, m in 2usize..48) {
        // F(φ + δ) = D F(φ) D^H with D = diag(e^{-jπ m δ})
        let a = interference_basis(phi, m).unwrap().matrix;
        let b = interference_basis(phi + shift, m).unwrap().matrix;
        let d = steering_vector(m, shift).unwrap();
        for r in 0..m {
            for c in 0..m {
                let expected = d[r] * a[(r, c)] * d[c].conj();
                prop_assert!((expected - b[(r, c)]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn quadratic_form_is_non_negative(phi in phi(), v in complex_vec(24)) {
        let basis = interference_basis(phi, 24).unwrap();
        prop_assert!(quadratic_form(&basis, &v).unwrap() >= 0.0);
    }

    #[test]
    fn projector_is_idempotent_hermitian_and_annihilates_nulls(
        a in complex_vec(12), b in complex_vec(12), c in complex_vec(12), x in complex_vec(12)
    ) {
        let nulls = vec![a, b, c];
        let space = NullSpace::new(12, &nulls).unwrap();
        let p = space.projector();
        prop_assert!((&p * &p - &p).norm() < 1e-12);
        prop_assert!((&p - p.adjoint()).norm() < 1e-12);
        for n in &nulls {
            prop_assert!(space.reject(n).norm() < 1e-12 * n.norm().max(1.0));
        }
        prop_assert!((space.reject(&x) - (&x - &p * &x)).norm() < 1e-12);
    }

    #[test]
    fn more_nulls_never_raise_gain(target in complex_vec(16), nulls in prop::collection::vec(complex_vec(16), 1..8)) {
        let mut previous = f64::INFINITY;
        for n in 1..=nulls.len() {
            let w = nullsteer(&target, &nulls[..n]).unwrap();
            let gain = target.dotc(&w).norm();
            prop_assert!(gain <= previous + 1e-10);
            previous = gain;
        }
    }

    #[test]
    fn beams_ignore_attenuation_estimates(seed in any::<u64>(), scale in 0.1..10.0f64) {
        let point = ExperimentConfig::reference().point(64.0);
        let t = prepare_trial(&point, seed).unwrap();
        let mut estimate = t.estimate.clone();
        estimate.sp_alpha_hat = estimate.sp_alpha_hat.map(|a| a * scale);
        let beams = design_beamformers(&t.channels, &estimate, &t.bases, 64, 4).unwrap();
        prop_assert_eq!(&beams.v, &t.beams.v);
        prop_assert_eq!(&beams.u, &t.beams.u);
    }

    #[test]
    fn every_solver_returns_a_feasible_result(p in problem(14)) {
        for result in [equal_power_allocate(&p), equal_rate_allocate(&p), ilp_admit(&p).unwrap()] {
            prop_assert!(result.certify(&p).is_ok(), "{:?}", result.certify(&p));
        }
    }

    #[test]
    fn ilp_dominates_heuristics(p in problem(14)) {
        let best = ilp_admit(&p).unwrap().admitted;
        prop_assert!(best >= equal_power_allocate(&p).admitted);
        prop_assert!(best >= equal_rate_allocate(&p).admitted);
    }

    #[test]
    fn ilp_matches_enumeration(p in problem(10)) {
        let exact = exhaustive_admission(&p);
        prop_assert_eq!(ilp_admit(&p).unwrap().selected, exact);
    }

    #[test]
    fn ilp_monotone_in_budgets(p in problem(12), up in 1.0..100.0f64) {
        let base = ilp_admit(&p).unwrap().admitted;
        let mut more_power = p.clone();
        more_power.constraints.total_power *= up;
        prop_assert!(ilp_admit(&more_power).unwrap().admitted >= base);
        let mut more_room = p.clone();
        more_room.constraints.interference *= up;
        prop_assert!(ilp_admit(&more_room).unwrap().admitted >= base);
    }

    #[test]
    fn equal_rate_survivors_meet_the_rate_exactly(p in problem(14)) {
        let r = equal_rate_allocate(&p);
        for k in (0..p.num_ues()).filter(|&k| r.selected[k]) {
            prop_assert!((r.rates[k] - p.constraints.min_rate).abs() <= 1e-9);
            prop_assert_eq!(r.power[k], required_power(p.gamma[k], &p.constraints));
        }
    }

    #[test]
    fn equal_power_survivors_share_power(p in problem(14)) {
        let r = equal_power_allocate(&p);
        let powers: Vec<f64> = (0..p.num_ues()).filter(|&k| r.selected[k]).map(|k| r.power[k]).collect();
        if let Some(first) = powers.first() {
            prop_assert!(powers.iter().all(|x| (x - first).abs() <= 1e-12 * first.max(1.0)));
        }
    }

    #[test]
    fn solver_names_round_trip(i in 0usize..3) {
        let s = Solver::ALL[i];
        prop_assert_eq!(s.to_string(), s.name());
    }
}
