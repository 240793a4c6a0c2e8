//! Property-based invariants over randomly generated inputs.

use proptest::prelude::*;

use coherence_lab::channels::{random_density, random_incoherent_kraus, selective_measure};
use coherence_lab::coherence::{
    coherence_alpha, coherence_l1, coherence_l2, mixedness, ReferenceBasis,
};
use coherence_lab::divergence::{alpha_log, quantum_tsallis, tsallis_classical, AlphaParam, ProbabilityVector};
use coherence_lab::linalg::{eigh, matrix_power, Tolerances};
use coherence_lab::qubit::{qubit_c1, qubit_c2, qubit_eigenvalues, QubitState};
use coherence_lab::C64;

fn tol() -> Tolerances {
    Tolerances::default()
}

fn ap(a: f64) -> AlphaParam {
    AlphaParam::new(a).unwrap()
}

fn alpha_strategy() -> impl Strategy<Value = f64> {
    prop_oneof![
        (0.1f64..3.5).prop_filter("away from 1", |a| (a - 1.0).abs() > 1e-6),
        Just(1.0),
        Just(2.0),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spectrum_is_sorted_and_traces_match(seed in 0u64..1u64 << 48, d in 2usize..=5) {
        let t = tol();
        let rho = random_density(d, d, seed).unwrap();
        let eig = eigh(rho.matrix(), &t).unwrap();
        let sum: f64 = eig.eigenvalues.iter().sum();
        prop_assert!((sum - 1.0).abs() <= 1e-9);
        for w in eig.eigenvalues.windows(2) {
            prop_assert!(w[0] <= w[1] + 1e-14);
        }
    }

    #[test]
    fn power_composition(seed in 0u64..1u64 << 48, d in 2usize..=4) {
        let t = tol();
        let rho = random_density(d, d, seed).unwrap();
        let half = matrix_power(rho.matrix(), 0.5, &t).unwrap();
        prop_assert!(half.mul(&half).sub(rho.matrix()).max_abs() <= 1e-9);
    }

    #[test]
    fn coherence_is_nonnegative_and_bounded(
        seed in 0u64..1u64 << 48,
        d in 2usize..=4,
        a in alpha_strategy(),
    ) {
        let t = tol();
        let rank = 1 + (seed as usize) % d;
        let rho = random_density(d, rank, seed).unwrap();
        let basis = ReferenceBasis::identity(d);
        let c = coherence_alpha(&rho, &basis, ap(a), &t).unwrap().value;
        prop_assert!(c >= 0.0);
        if (a - 1.0).abs() <= 1e-12 {
            prop_assert!(c <= (d as f64).ln() + 1e-9);
        }
        // l1 dominates l2 on unit-normalized off-diagonals
        let l1 = coherence_l1(&rho, &basis, &t).unwrap();
        let l2 = coherence_l2(&rho, &basis, &t).unwrap();
        prop_assert!(l2 <= l1 * l1 + 1e-12);
    }

    #[test]
    fn minimizer_weights_form_a_distribution(
        seed in 0u64..1u64 << 48,
        d in 2usize..=4,
        a in alpha_strategy(),
    ) {
        let t = tol();
        let rho = random_density(d, d, seed).unwrap();
        let basis = ReferenceBasis::identity(d);
        let res = coherence_alpha(&rho, &basis, ap(a), &t).unwrap();
        let sum: f64 = res.minimizer.weights.as_slice().iter().sum();
        prop_assert!((sum - 1.0).abs() <= 1e-9);
        prop_assert!(res.minimizer.weights.as_slice().iter().all(|w| *w >= 0.0));
    }

    #[test]
    fn divergence_is_faithful(seed in 0u64..1u64 << 48, d in 2usize..=4, a in alpha_strategy()) {
        let t = tol();
        let rho = random_density(d, d, seed).unwrap();
        let sigma = random_density(d, d, seed ^ 0xabcd).unwrap();
        let self_div = quantum_tsallis(&rho, &rho, ap(a), &t).unwrap().finite().unwrap();
        prop_assert!(self_div.abs() <= 1e-9);
        let cross = quantum_tsallis(&rho, &sigma, ap(a), &t).unwrap().finite().unwrap();
        prop_assert!(cross >= 0.0);
    }

    #[test]
    fn classical_divergence_matches_alpha_log_on_two_points(
        p in 0.01f64..0.99,
        q in 0.01f64..0.99,
        a in alpha_strategy(),
    ) {
        // pure-vs-mixed shortcut: D_alpha((1,0) || (q, 1-q)) = -ln_alpha(q)
        let _ = p;
        let pv = ProbabilityVector::new(vec![1.0, 0.0]).unwrap();
        let qv = ProbabilityVector::new(vec![q, 1.0 - q]).unwrap();
        let d = tsallis_classical(&pv, &qv, ap(a)).unwrap().finite().unwrap();
        let expect = -alpha_log(q, ap(a)).unwrap();
        prop_assert!((d - expect).abs() <= 1e-9);
    }

    #[test]
    fn selective_probabilities_sum_to_one(seed in 0u64..1u64 << 48, d in 2usize..=4) {
        let t = tol();
        let rho = random_density(d, d, seed).unwrap();
        let kraus = random_incoherent_kraus(d, &[d, d], seed ^ 0xf00d).unwrap();
        let outcomes = selective_measure(&kraus, &rho, &t).unwrap();
        let total: f64 = outcomes.iter().map(|o| o.probability).sum();
        prop_assert!((total - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn qubit_closed_forms_are_consistent(u in 0.0f64..=1.0, frac in 0.0f64..=1.0, phase in 0.0f64..6.28) {
        let t = tol();
        let wmax = (u * (1.0 - u)).sqrt();
        let s = QubitState::new(u, C64::from_polar(frac * wmax, phase)).unwrap();
        let (lp, lm) = qubit_eigenvalues(&s);
        prop_assert!((lp + lm - 1.0).abs() <= 1e-12);
        prop_assert!(qubit_c1(&s) >= 0.0);
        prop_assert!(qubit_c2(&s) >= 0.0);
        let rho = s.to_density(&t).unwrap();
        let m = mixedness(&rho).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&m));
    }
}
