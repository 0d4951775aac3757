mod common;

use gaugeset::channels::{
    amplitude_damping, apply_error_model, axis_rotation, clifford_gateset, clifford_group_1q, depolarizing,
    unitary_z_error,
};
use gaugeset::gateset::{amplitude_damping_ptm, apply_gauge, circuit_probabilities, ExperimentSpec, GaugeTransform};
use gaugeset::metrics::{delta_d, diamond_distance, mve, Sampler};
use gaugeset::pl::{
    apply_ptm, choi_from_ptm, from_pl, ptm_from_kraus, ptm_from_unitary, to_pl_dual, to_pl_state, Ptm,
};
use gaugeset::protocol::{coarse_grain, empirical_delta_d, simulate_counts, ExperimentSampler, Mode};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pl_round_trip(seed in any::<u64>(), n in 1usize..=2) {
        let mut r = rng(seed);
        let h = common::random_hermitian(&mut r, 1 << n);
        let back = from_pl(&to_pl_state(&h).unwrap());
        prop_assert!((back.matrix() - h.matrix()).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn pairing_is_hilbert_schmidt(seed in any::<u64>(), n in 1usize..=2) {
        let mut r = rng(seed);
        let rho = common::random_density(&mut r, 1 << n);
        let e = common::random_hermitian(&mut r, 1 << n);
        let pl = to_pl_dual(&e).unwrap().pair(&to_pl_state(&rho).unwrap()).unwrap();
        let hs = (e.matrix() * rho.matrix()).trace().re;
        prop_assert!((pl - hs).abs() < 1e-12);
    }

    #[test]
    fn ptm_action_matches_kraus(seed in any::<u64>(), n in 1usize..=2, k in 1usize..=3) {
        let mut r = rng(seed);
        let d = 1 << n;
        let kraus = common::random_kraus(&mut r, d, k);
        let rho = common::random_density(&mut r, d);
        let ptm = ptm_from_kraus(&kraus).unwrap();
        prop_assert!(ptm.is_trace_preserving(1e-10));
        prop_assert!(choi_from_ptm(&ptm).eigenvalues()[0] > -1e-10);
        let out = from_pl(&apply_ptm(&ptm, &to_pl_state(&rho).unwrap()).unwrap());
        prop_assert!((out.matrix() - kraus.apply(rho.matrix())).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn gauge_preserves_probabilities(seed in any::<u64>(), n in 1usize..=2, len in 0usize..=20) {
        let mut r = rng(seed);
        let gs = common::random_gateset(&mut r, n, 3);
        let t = common::well_conditioned_gauge(&mut r, n, 0.5);
        let moved = apply_gauge(&gs, &t).unwrap();
        let spec = ExperimentSpec::new(r.random_range(0..2), (0..len).map(|_| r.random_range(0..3)).collect(), r.random_range(0..2));
        let p = circuit_probabilities(&gs, &spec).unwrap().values;
        let q = circuit_probabilities(&moved, &spec).unwrap().values;
        prop_assert!(p.iter().zip(&q).all(|(a, b)| (a - b).abs() < 1e-10));
    }

    #[test]
    fn gauge_transforms_compose(seed in any::<u64>()) {
        let mut r = rng(seed);
        let gs = common::random_gateset(&mut r, 1, 3);
        let t1 = common::well_conditioned_gauge(&mut r, 1, 0.4);
        let t2 = common::well_conditioned_gauge(&mut r, 1, 0.4);
        let stepwise = apply_gauge(&apply_gauge(&gs, &t1).unwrap(), &t2).unwrap();
        let direct = apply_gauge(&gs, &t1.then(&t2).unwrap()).unwrap();
        for (a, b) in stepwise.gates().iter().zip(direct.gates()) {
            prop_assert!(a.ptm.max_abs_diff(&b.ptm) < 1e-10);
        }
        let undo = GaugeTransform::new(1, t1.inverse().clone()).unwrap();
        let back = apply_gauge(&apply_gauge(&gs, &t1).unwrap(), &undo).unwrap();
        for (a, b) in back.gates().iter().zip(gs.gates()) {
            prop_assert!(a.ptm.max_abs_diff(&b.ptm) < 1e-10);
        }
    }

    #[test]
    fn depolarizing_commutes_with_su2(seed in any::<u64>(), r_err in 0.0f64..0.5) {
        let mut r = rng(seed);
        let u = ptm_from_unitary(&common::random_unitary(&mut r, 2)).unwrap();
        let e = depolarizing(r_err).unwrap();
        let lhs = e.ptm().dot(&u).unwrap();
        let rhs = u.dot(e.ptm()).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }

    #[test]
    fn diagonal_gauge_commutes_with_z_rotations(theta in -3.0f64..3.0, q in 0.1f64..1.0) {
        let b = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, q, q, q]));
        let u = ptm_from_unitary(&axis_rotation(theta, [0.0, 0.0, 1.0])).unwrap();
        prop_assert!((b.clone() * u.matrix() - u.matrix() * b).amax() < 1e-12);
    }

    #[test]
    fn delta_d_bounded(seed in any::<u64>(), gamma in 0.0f64..1.0, m in 0usize..30) {
        let ideal = clifford_gateset(&clifford_group_1q()).unwrap();
        let noisy = apply_error_model(&ideal, &amplitude_damping(gamma).unwrap()).unwrap();
        let spec = ExperimentSampler::new(&ideal, Mode::Generic).unwrap().sample(m, seed, 0).unwrap();
        let d = delta_d(&ideal, &noisy, &spec).unwrap();
        prop_assert!((0.0..=1.0).contains(&d));
        prop_assert_eq!(delta_d(&ideal, &ideal, &spec).unwrap(), 0.0);
    }

    #[test]
    fn coarse_graining_never_increases_error(seed in any::<u64>()) {
        let mut r = rng(seed);
        let gs = common::random_gateset(&mut r, 2, 3);
        let noisy = gs.map_gates(|g| {
            let extra = ptm_from_kraus(&common::random_kraus(&mut r, 4, 2)).unwrap();
            let mix = Ptm::new(2, g.matrix() * 0.9 + extra.dot(g).unwrap().matrix() * 0.1)?;
            Ok(mix)
        }).unwrap();
        let spec = ExperimentSpec::new(0, vec![0, 1, 2], 1);
        let counts = simulate_counts(&noisy, &spec, 500, seed).unwrap();
        let fine = empirical_delta_d(&gs, &spec, &counts).unwrap();
        let mut outcomes: Vec<usize> = (0..4).collect();
        outcomes.shuffle(&mut r);
        let cut = r.random_range(1..4);
        let partition = vec![outcomes[..cut].to_vec(), outcomes[cut..].to_vec()];
        let coarse_counts = coarse_grain(&counts, &partition).unwrap();
        let ideal = circuit_probabilities(&gs, &spec).unwrap().values;
        let coarse_ideal = gaugeset::protocol::coarse_grain_probabilities(&ideal, &partition);
        let coarse = 0.5 * coarse_counts.frequencies().iter().zip(&coarse_ideal).map(|(a, b)| (a - b).abs()).sum::<f64>();
        prop_assert!(coarse <= fine + 1e-15);
    }

    #[test]
    fn diamond_dominates_fixed_inputs(seed in any::<u64>(), gamma in 0.0f64..1.0, q in -1.0f64..1.0, theta in 0.0f64..0.5) {
        let mut r = rng(seed);
        let a = amplitude_damping_ptm(gamma, q).unwrap();
        let b = unitary_z_error(theta).unwrap().ptm().clone();
        let d = diamond_distance(&a, &b).unwrap().value;
        let diff = a.sub(&b).unwrap();
        // Product input: trace norm of (A − B)(ρ) alone.
        let rho = common::random_density(&mut r, 2);
        let out = from_pl(&apply_ptm(&diff, &to_pl_state(&rho).unwrap()).unwrap());
        prop_assert!(d + 1e-12 >= 0.5 * out.trace_norm());
        prop_assert!(d <= 1.0 + 1e-12);
    }
}

#[test]
fn diamond_matches_grid_oracle_across_gamma() {
    let id = Ptm::identity(1);
    for gamma in [0.05, 0.3, 0.6, 0.9] {
        for q in [-0.5, 0.0, 0.5, 1.0] {
            let a = amplitude_damping_ptm(gamma, q).unwrap();
            let fast = diamond_distance(&a, &id).unwrap().value;
            let grid = common::grid_diamond(&a, &id);
            assert!(fast + 1e-12 >= grid, "γ={gamma} q={q}: {fast} < {grid}");
            assert!((fast - grid).abs() < 1e-4, "γ={gamma} q={q}: {fast} vs {grid}");
        }
    }
}

#[test]
fn diamond_ratio_across_gamma_is_reported() {
    // The factor of two between q = 1 and q = 0 degrades at strong damping.
    let id = Ptm::identity(1);
    let ratio = |gamma: f64| {
        diamond_distance(&amplitude_damping_ptm(gamma, 1.0).unwrap(), &id).unwrap().value
            / diamond_distance(&amplitude_damping_ptm(gamma, 0.0).unwrap(), &id).unwrap().value
    };
    let mut prev = 2.0;
    for gamma in [0.01, 0.1, 0.3, 0.5, 0.7, 0.9] {
        let r = ratio(gamma);
        println!("gamma = {gamma}: ratio {r:.4}");
        assert!(r <= prev + 1e-9 && r > 1.0);
        prev = r;
    }
    assert!((ratio(0.9) - 1.588).abs() < 0.01);
}

#[test]
fn z_conjugation_diamond_distance_is_one() {
    let z = ptm_from_unitary(&gaugeset::pl::sigma(3)).unwrap();
    let d = diamond_distance(&z, &Ptm::identity(1)).unwrap().value;
    assert!((d - 1.0).abs() < 1e-6);
}

#[test]
fn depolarizing_survival_closed_form() {
    let ideal = clifford_gateset(&clifford_group_1q()).unwrap();
    let r = 0.01;
    let noisy = apply_error_model(&ideal, &depolarizing(r).unwrap()).unwrap();
    let sampler = ExperimentSampler::new(&ideal, Mode::SelfInverting).unwrap();
    for i in 0..100 {
        let m = 1 + (i as usize % 30);
        let spec = sampler.sample(m, 5, i).unwrap();
        let s = gaugeset::metrics::survival_probability(&ideal, &noisy, &spec).unwrap();
        assert!((s - (1.0 + (1.0 - 2.0 * r).powi(m as i32)) / 2.0).abs() < 1e-12);
        assert!((1.0 - s - delta_d(&ideal, &noisy, &spec).unwrap()).abs() < 1e-12);
    }
}

#[cfg(feature = "parallel")]
#[test]
fn mve_is_thread_count_independent() {
    let ideal = clifford_gateset(&clifford_group_1q()).unwrap();
    let noisy = apply_error_model(&ideal, &unitary_z_error(0.02).unwrap()).unwrap();
    let run = || mve(&ideal, &noisy, 50, &Sampler::MonteCarlo { n_circuits: 300, seed: 8 }, Mode::Generic).unwrap();
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(run);
    let many = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap().install(run);
    assert_eq!(single, many);
    assert_eq!(run(), single);
}

#[test]
fn gauge_equivalent_sets_have_zero_mve() {
    let mut r = rng(3);
    let gs = common::random_gateset(&mut r, 1, 3);
    let t = common::well_conditioned_gauge(&mut r, 1, 0.3);
    let moved = apply_gauge(&gs, &t).unwrap();
    let p = mve(&gs, &moved, 4, &Sampler::enumeration(), Mode::Generic).unwrap();
    assert!(p.mean < 1e-12);
}
