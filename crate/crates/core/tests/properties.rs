use fixcone::channel::ChoiMatrix;
use fixcone::conesim::{run, KickPolicy, SimulationConfig};
use fixcone::engineer::{build_separable_multi, complete_channel, separable_multi_choi, SeparableMultiSpec};
use fixcone::linops::{
    herm_eig, kernel_projector, kron, max_abs, partial_trace, support_projector, trace_distance, CMatrix,
    DensityMatrix, Hermitian, Subsystem,
};
use fixcone::quasireal::{QuasiRealization, PROB_TOL};
use fixcone::random;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn kron_is_associative(seed: u64, a in 1usize..4, b in 1usize..4, c in 1usize..4) {
        let mut r = rng(seed);
        let (x, y, z) = (random::ginibre(a, a, &mut r), random::ginibre(b, b, &mut r), random::ginibre(c, c, &mut r));
        let lhs = kron(&kron(&x, &y), &z);
        let rhs = kron(&x, &kron(&y, &z));
        prop_assert!(max_abs(&(lhs - rhs)) <= 1e-12);
    }

    #[test]
    fn partial_trace_of_product(seed: u64, d1 in 1usize..5, d2 in 1usize..5) {
        let mut r = rng(seed);
        let a = random::ginibre(d1, d1, &mut r);
        let b = random::ginibre(d2, d2, &mut r);
        let out = partial_trace(&kron(&a, &b), (d1, d2), Subsystem::Second).unwrap();
        let expected = &a * b.trace();
        prop_assert!(max_abs(&(out - expected)) <= 1e-4 * (1.0 + max_abs(&a) * max_abs(&b)));
        let out1 = partial_trace(&kron(&a, &b), (d1, d2), Subsystem::First).unwrap();
        prop_assert!((out1.trace() - a.trace() * b.trace()).norm() <= 1e-10 * (1.0 + (a.trace() * b.trace()).norm()));
    }

    #[test]
    fn eigendecomposition_reconstructs(seed: u64, d in 1usize..=16) {
        let a = random::hermitian(d, &mut rng(seed));
        let e = herm_eig(&a);
        prop_assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
        let rebuilt = e.rebuild(|x| x);
        prop_assert!(max_abs(&(rebuilt.matrix() - a.matrix())) <= 1e-10);
        let gram = e.vectors.adjoint() * &e.vectors;
        prop_assert!(max_abs(&(gram - CMatrix::identity(d, d))) <= 1e-8);
    }

    #[test]
    fn support_and_kernel_sum_to_identity(seed: u64, d in 1usize..7, rank in 1usize..7) {
        let rho = random::density(d, rank.min(d), &mut rng(seed));
        let s = support_projector(rho.op(), 1e-7).unwrap();
        let k = kernel_projector(rho.op(), 1e-7).unwrap();
        prop_assert!(max_abs(&(s.matrix() + k.matrix() - CMatrix::identity(d, d))) <= 1e-12);
        prop_assert!(max_abs(&(s.matrix() * s.matrix() - s.matrix())) <= 1e-10);
        prop_assert!(k.inner(rho.op()) <= d as f64 * 1e-7);
    }

    #[test]
    fn trace_distance_is_a_metric(seed: u64, d in 1usize..6) {
        let mut r = rng(seed);
        let (a, b, c) = (random::density(d, d, &mut r), random::density(d, 1, &mut r), random::density(d, 2.min(d), &mut r));
        let ab = trace_distance(&a, &b).unwrap();
        let bc = trace_distance(&b, &c).unwrap();
        let ac = trace_distance(&a, &c).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&ab));
        prop_assert!((ab - trace_distance(&b, &a).unwrap()).abs() <= 1e-12);
        prop_assert!(ac <= ab + bc + 1e-12);
        prop_assert!(trace_distance(&a, &a).unwrap() <= 1e-12);
    }

    #[test]
    fn channel_application_is_linear(seed: u64, d in 1usize..4, k in 1usize..4, t in 0.0f64..1.0) {
        let mut r = rng(seed);
        let ch = random::channel(d, k, &mut r);
        let (a, b) = (random::density(d, d, &mut r), random::density(d, 1, &mut r));
        let mix = DensityMatrix::mixture(&[t, 1.0 - t], &[a.clone(), b.clone()]).unwrap();
        let lhs = ch.apply(&mix).unwrap();
        let rhs = ch.apply(&a).unwrap().matrix() * fixcone::linops::c(t, 0.0)
            + ch.apply(&b).unwrap().matrix() * fixcone::linops::c(1.0 - t, 0.0);
        prop_assert!(max_abs(&(lhs.matrix() - rhs)) <= 1e-12);
        prop_assert!((lhs.op().trace() - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn sdp_style_completion_is_trace_preserving(seed: u64, d in 1usize..4) {
        let mut r = rng(seed);
        let x = Hermitian::hermitize(&{
            let g = random::ginibre(d * d, d * d, &mut r);
            &g * g.adjoint()
        });
        let x = ChoiMatrix::new(d, d, x).unwrap();
        let b = random::density(d, d, &mut r);
        let c = complete_channel(&x, &b).unwrap();
        prop_assert!(c.is_cptp().tp_residual <= 1e-9);
    }

    /// Mixed states supported on disjoint coordinate blocks are fixed by the
    /// separable construction for any B living on the leftover block.
    #[test]
    fn separable_fixed_point_identity(seed: u64, sizes in prop::collection::vec(1usize..3, 2..4)) {
        let mut r = rng(seed);
        let d = sizes.iter().sum::<usize>() + 1;
        let mut offset = 0;
        let mut sigmas = Vec::new();
        for s in &sizes {
            let block = random::density(*s, *s, &mut r);
            let mut m = CMatrix::zeros(d, d);
            m.view_mut((offset, offset), (*s, *s)).copy_from(block.matrix());
            sigmas.push(DensityMatrix::new(Hermitian::hermitize(&m)).unwrap());
            offset += s;
        }
        let spec = SeparableMultiSpec::from_states(sigmas.clone(), DensityMatrix::basis(d, d - 1)).unwrap();
        let ch = build_separable_multi(&spec).unwrap();
        prop_assert!(ch.is_cptp().is_cptp());
        for s in &sigmas {
            let out = ch.apply_operator(s.matrix()).unwrap();
            prop_assert!(max_abs(&(out - s.matrix())) <= 1e-9);
        }
    }

    /// The cross term of the two-state construction equals
    /// `tr[σ₀Π₁]/tr[Π₁σ₁] (σ₁ − B)` for arbitrary positive `Π₁`.
    #[test]
    fn separable_cross_term_identity(seed: u64, eps in 0.0f64..0.5) {
        let mut r = rng(seed);
        let s0 = DensityMatrix::basis(3, 0);
        let s1 = DensityMatrix::basis(3, 1);
        let b = random::density(3, 3, &mut r);
        let p1 = Hermitian::from_real_diagonal(&[eps, 1.0, 0.0]);
        let spec = SeparableMultiSpec::new(vec![s0.clone(), s1.clone()], vec![s0.op().clone(), p1.clone()], b.clone()).unwrap();
        let out = separable_multi_choi(&spec).apply_operator(s0.matrix()).unwrap();
        let t = p1.inner(s0.op()) / p1.inner(s1.op());
        let expected = s0.matrix() + (s1.matrix() - b.matrix()) * fixcone::linops::c(t, 0.0);
        prop_assert!(max_abs(&(out - expected)) <= 1e-12);
    }

    #[test]
    fn stochastic_realizations_normalize(seed: u64, n in 1usize..4, l in 0usize..=8) {
        let q = random_markov(n, seed);
        prop_assert!(q.is_positive_realization(1e-9).all());
        let total = q.word_distribution(l).unwrap().total();
        prop_assert!((total - 1.0).abs() <= 1e-10);
    }

    /// For a stationary realization, `Σ_u p(wu) = p(w) = Σ_u p(uw)`.
    #[test]
    fn stationary_marginals_agree(seed: u64, n in 1usize..4, l in 0usize..=6) {
        let q = random_markov(n, seed);
        let k = q.alphabet().len();
        for w in q.word_distribution(l).unwrap().words {
            let idx: Vec<usize> = w.word.iter().map(|s| q.symbol_index(s).unwrap()).collect();
            let right: f64 = (0..k).map(|u| q.word_probability_indices(&[idx.clone(), vec![u]].concat())).sum();
            let left: f64 = (0..k).map(|u| q.word_probability_indices(&[vec![u], idx.clone()].concat())).sum();
            prop_assert!((right - w.probability).abs() <= 1e-10);
            prop_assert!((left - w.probability).abs() <= 1e-10);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn simulation_is_deterministic_and_conserves_trace(seed: u64, strength in 0.1f64..1.0) {
        let cfg = SimulationConfig::new(ChoiMatrix::dephasing(3), KickPolicy::Depolarizing { strength }, 20, 25, seed);
        let a = run(&cfg).unwrap();
        prop_assert_eq!(&a, &run(&cfg).unwrap());
        for round in &a.rounds {
            for s in [&round.settled_state, &round.post_kick_state] {
                prop_assert!((s.op().trace() - 1.0).abs() <= 1e-9);
                prop_assert!(s.op().min_eigenvalue() >= -1e-9);
            }
        }
        let haar = SimulationConfig::new(ChoiMatrix::dephasing(2), KickPolicy::HaarUnitary, 5, 10, seed);
        prop_assert_eq!(run(&haar).unwrap(), run(&haar).unwrap());
    }

    #[test]
    fn estimated_rows_are_normalized(seed: u64) {
        let cfg = SimulationConfig::new(ChoiMatrix::dephasing(3), KickPolicy::Depolarizing { strength: 0.7 }, 10, 200, seed);
        let t = run(&cfg).unwrap();
        let e = fixcone::conesim::estimate_process(&t).unwrap();
        let transitions: u64 = e.counts.iter().flatten().sum();
        prop_assert_eq!(transitions as usize, t.rounds.len() - 1);
        for (row, counts) in e.transition_estimate.iter().zip(&e.counts) {
            if counts.iter().sum::<u64>() > 0 {
                prop_assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            }
        }
        let q = fixcone::conesim::to_quasi_realization(&e).unwrap();
        prop_assert!(q.is_positive_realization(PROB_TOL).all());
    }
}

fn random_markov(n: usize, seed: u64) -> QuasiRealization {
    use rand::Rng;
    let mut r = rng(seed);
    let mut t = DMatrix::from_fn(n, n, |_, _| r.random::<f64>() + 0.05);
    for mut row in t.row_iter_mut() {
        let s = row.sum();
        row /= s;
    }
    // Stationary vector by power iteration on a primitive chain.
    let mut pi = DVector::from_element(n, 1.0 / n as f64).transpose();
    for _ in 0..2000 {
        pi = &pi * &t;
    }
    QuasiRealization::markov(&t, pi.transpose()).unwrap()
}
