use gnc_core::certify::{verify, DEFAULT_TOL};
use gnc_core::decide::library::random_pure_states;
use gnc_core::decide::{decide, rules, DecideConfig, Tag};
use gnc_core::hermspace::{dual_basis, is_linearly_independent, span_of, HermitianOperator};
use gnc_core::identities::identities_of_multisource;
use gnc_core::processes::{flag_convexify, BipartiteState, MultiSource, Process, SourceBranch};
use gnc_core::standard::bloch_state;
use proptest::prelude::*;

fn bloch() -> impl Strategy<Value = [f64; 3]> {
    (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64).prop_map(|(x, y, z)| {
        let n = (x * x + y * y + z * z).sqrt().max(1.0);
        [x / n, y / n, z / n]
    })
}

fn mixed(seed: u64, d: usize, w: f64) -> HermitianOperator {
    let pure = &random_pure_states(d, 1, seed)[0];
    let id = HermitianOperator::identity(d).scale((1.0 - w) / d as f64);
    &pure.scale(w) + &id
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn dual_basis_is_biorthogonal(seed in any::<u64>(), d in 2usize..4, n in 1usize..5) {
        let frame = random_pure_states(d, n, seed);
        prop_assume!(is_linearly_independent(&frame).unwrap());
        let dual = dual_basis(&frame).unwrap();
        for (i, f) in frame.iter().enumerate() {
            for (j, g) in dual.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((f.product_trace(g).re - want).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn projection_onto_span_is_idempotent(seed in any::<u64>(), n in 1usize..4) {
        let ops = random_pure_states(3, n, seed);
        let span = span_of(&ops).unwrap();
        let x = mixed(seed ^ 1, 3, 0.7);
        let p = span.project(&x).unwrap();
        prop_assert!(span.project(&p).unwrap().max_abs_diff(&p) < 1e-10);
        for o in &ops {
            prop_assert!((&x - &p).product_trace(o).re.abs() < 1e-10);
        }
    }

    #[test]
    fn partial_trace_of_product(a in bloch(), b in bloch()) {
        let (ra, rb) = (bloch_state(a), bloch_state(b));
        let joint = ra.kron(&rb);
        prop_assert!(joint.partial_trace(&[2, 2], &[0]).unwrap().max_abs_diff(&ra) < 1e-12);
        prop_assert!(joint.partial_trace(&[2, 2], &[1]).unwrap().max_abs_diff(&rb) < 1e-12);
    }

    #[test]
    fn identities_annihilate_the_source(seed in any::<u64>(), n in 1usize..8) {
        let states = random_pure_states(2, n, seed);
        let ms = MultiSource::multi_state(states).unwrap();
        let ids = identities_of_multisource(&ms).unwrap();
        prop_assert!(ids.annihilation_residual(&ms.subnormalized_flat()).unwrap() < 1e-9);
        prop_assert_eq!(ids.dim(), n.saturating_sub(span_of(&ms.subnormalized_flat()).unwrap().dim()));
    }

    #[test]
    fn independent_pure_states_are_classical(seed in any::<u64>(), d in 2usize..4, n in 1usize..4) {
        let states = random_pure_states(d, n, seed);
        let p = Process::MultiSource(MultiSource::multi_state(states).unwrap());
        let v = decide(&p, &DecideConfig::default()).unwrap();
        prop_assert_eq!(v.tag, Tag::Classical);
        prop_assert!(verify(&p, v.certificate.as_ref().unwrap(), DEFAULT_TOL).unwrap().passed());
    }

    #[test]
    fn five_pure_qubit_states_are_nonclassical(seed in any::<u64>()) {
        let p = Process::MultiSource(MultiSource::multi_state(random_pure_states(2, 5, seed)).unwrap());
        let v = decide(&p, &DecideConfig::default()).unwrap();
        prop_assert_eq!(v.tag, Tag::Nonclassical);
        prop_assert_eq!(v.rule.as_deref(), Some(rules::PURE_DEPENDENT.id));
    }

    #[test]
    fn classical_verdicts_verify(seed in any::<u64>(), w in 0.0..0.5f64, n in 1usize..6) {
        let branches = (0..n)
            .map(|k| vec![SourceBranch::new(1.0, mixed(seed.wrapping_add(k as u64), 2, w))])
            .collect();
        let p = Process::MultiSource(MultiSource::new(2, branches).unwrap());
        let v = decide(&p, &DecideConfig::default()).unwrap();
        if let Some(c) = &v.certificate {
            prop_assert_eq!(v.tag, Tag::Classical);
            prop_assert!(verify(&p, c, DEFAULT_TOL).unwrap().passed());
        }
    }

    #[test]
    fn flag_convexification_keeps_decisive_verdicts(seed in any::<u64>(), n in 2usize..5) {
        let states = random_pure_states(2, 2 * n, seed);
        let branches = states.chunks(2).map(|c| c.iter().map(|s| SourceBranch::new(0.5, s.clone())).collect()).collect();
        let p = Process::MultiSource(MultiSource::new(2, branches).unwrap());
        let cfg = DecideConfig::default();
        let before = decide(&p, &cfg).unwrap().tag;
        let after = decide(&flag_convexify(&p).unwrap(), &cfg).unwrap().tag;
        if before != Tag::Inconclusive && after != Tag::Inconclusive {
            prop_assert_eq!(before, after);
        }
    }

    #[test]
    fn product_states_are_classical(a in bloch(), b in bloch()) {
        let p = Process::Bipartite(BipartiteState::product(&bloch_state(a), &bloch_state(b)));
        let v = decide(&p, &DecideConfig::default()).unwrap();
        prop_assert_eq!(v.tag, Tag::Classical);
        if let Some(c) = &v.certificate {
            prop_assert!(verify(&p, c, DEFAULT_TOL).unwrap().passed());
        }
    }

    #[test]
    fn json_pairs_round_trip(seed in any::<u64>(), d in 1usize..5) {
        let x = mixed(seed, d, 0.4);
        prop_assert_eq!(HermitianOperator::from_pairs(&x.to_pairs()).unwrap(), x);
    }
}
