use jigsaw_core::metrics::{raw_tvd, tvd};
use jigsaw_core::subsetting::{random_plan, sliding_window_plan, split_trials};
use jigsaw_core::{
    bayesian_reconstruction, bayesian_update, hellinger, Marginal, Outcome, ReconstructionConfig,
    SparsePmf, UpdateWeighting,
};
use proptest::prelude::*;

const WIDTH: usize = 6;

fn pmf_strategy(width: usize) -> impl Strategy<Value = SparsePmf> {
    prop::collection::btree_map(0u64..1 << width, 0.001f64..1.0, 1..24).prop_map(move |m| {
        SparsePmf::from_weights(
            width,
            m.into_iter().map(|(v, w)| (Outcome::from_u64(v, width).unwrap(), w)),
        )
        .unwrap()
    })
}

fn subset_strategy(width: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..width).collect::<Vec<_>>())
        .prop_shuffle()
        .prop_flat_map(move |q| (1..=width).prop_map(move |k| q[..k].to_vec()))
}

fn noisy_marginal(p: &SparsePmf, qubits: &[usize], jitter: &[f64]) -> Marginal {
    let exact = p.marginalize(qubits).unwrap();
    let pmf = SparsePmf::from_weights(
        qubits.len(),
        exact
            .pmf()
            .iter()
            .zip(jitter.iter().cycle())
            .map(|((o, v), j)| (o.clone(), v * j)),
    )
    .unwrap();
    Marginal::new(qubits.to_vec(), pmf).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn distributions_are_normalized(p in pmf_strategy(WIDTH)) {
        let total: f64 = p.probabilities().iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        prop_assert!(p.probabilities().iter().all(|&v| v > 0.0));
        prop_assert!(p.outcomes().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn outcome_text_round_trip(v in 0u64..1 << 20, width in 20usize..90) {
        let o = Outcome::from_u64(v, width).unwrap();
        let text = o.to_string();
        prop_assert_eq!(text.len(), width);
        prop_assert_eq!(Outcome::parse(&text, width).unwrap(), o);
    }

    #[test]
    fn marginalization_composes(p in pmf_strategy(WIDTH), qubits in subset_strategy(WIDTH), cut in 0usize..WIDTH) {
        let outer = p.marginalize(&qubits).unwrap();
        let k = cut % qubits.len() + 1;
        let positions: Vec<usize> = (0..k).map(|j| qubits.len() - 1 - j).collect();
        let twice = outer.pmf().marginalize(&positions).unwrap();
        let direct = p.marginalize(&qubits[..k]).unwrap();
        prop_assert_eq!(twice.pmf().outcomes(), direct.pmf().outcomes());
        for (a, b) in twice.pmf().probabilities().iter().zip(direct.pmf().probabilities()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn canonical_marginal_is_the_same_distribution(p in pmf_strategy(WIDTH), qubits in subset_strategy(WIDTH)) {
        let m = p.marginalize(&qubits).unwrap();
        let c = m.canonical();
        prop_assert!(c.qubits().windows(2).all(|w| w[0] > w[1]));
        let sorted: Vec<usize> = c.qubits().to_vec();
        let direct = p.marginalize(&sorted).unwrap();
        prop_assert_eq!(c.pmf().outcomes(), direct.pmf().outcomes());
    }

    #[test]
    fn distance_axioms(p in pmf_strategy(WIDTH), q in pmf_strategy(WIDTH), r in pmf_strategy(WIDTH)) {
        for d in [hellinger, tvd] {
            let pq = d(&p, &q).unwrap();
            prop_assert!((pq - d(&q, &p).unwrap()).abs() < 1e-15);
            prop_assert!((0.0..=1.0).contains(&pq));
            prop_assert!(d(&p, &p).unwrap() < 1e-7);
            prop_assert!(pq <= d(&p, &r).unwrap() + d(&r, &q).unwrap() + 1e-12);
        }
        prop_assert!((raw_tvd(&p, &q).unwrap() - 2.0 * tvd(&p, &q).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn updates_stay_inside_the_prior_support(p in pmf_strategy(WIDTH), qubits in subset_strategy(WIDTH), jitter in prop::collection::vec(0.2f64..1.0, 1..8)) {
        let m = noisy_marginal(&p, &qubits, &jitter);
        let post = bayesian_update(&p, &m, &ReconstructionConfig::default()).unwrap();
        prop_assert!(post.outcomes().iter().all(|o| p.index_of(o).is_some()));
        let out = bayesian_reconstruction(&p, &[m], &ReconstructionConfig::default()).unwrap();
        prop_assert_eq!(out.pmf.outcomes(), p.outcomes());
        prop_assert!(out.rounds() <= ReconstructionConfig::default().max_rounds);
    }

    #[test]
    fn marginal_order_does_not_matter(
        p in pmf_strategy(WIDTH),
        subsets in prop::collection::vec(subset_strategy(WIDTH), 2..6),
        jitter in prop::collection::vec(0.2f64..1.0, 1..8),
        order in Just((0..6usize).collect::<Vec<_>>()).prop_shuffle(),
    ) {
        let ms: Vec<Marginal> = subsets.iter().map(|q| noisy_marginal(&p, q, &jitter)).collect();
        let shuffled: Vec<Marginal> = order.iter().filter(|&&i| i < ms.len()).map(|&i| ms[i].clone()).collect();
        let cfg = ReconstructionConfig::default();
        let a = bayesian_reconstruction(&p, &ms, &cfg).unwrap().pmf;
        let b = bayesian_reconstruction(&p, &shuffled, &cfg).unwrap().pmf;
        for (x, y) in a.probabilities().iter().zip(b.probabilities()) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn consistent_marginals_leave_the_prior_alone(p in pmf_strategy(WIDTH), subsets in prop::collection::vec(subset_strategy(WIDTH), 1..6)) {
        let cfg = ReconstructionConfig { weighting: UpdateWeighting::Probability, ..Default::default() };
        let ms: Vec<Marginal> = subsets.iter().map(|q| p.marginalize(q).unwrap()).collect();
        let out = bayesian_reconstruction(&p, &ms, &cfg).unwrap();
        prop_assert!(out.rounds() <= 2);
        for (x, y) in out.pmf.probabilities().iter().zip(p.probabilities()) {
            prop_assert!((x - y).abs() <= 1e-9);
        }
    }

    #[test]
    fn trial_split_conserves_the_budget(total in 1000u64..1_000_000, n in 3usize..12, fraction in 0.05f64..0.95) {
        let plan = sliding_window_plan(n, 2).unwrap();
        let b = split_trials(total, &plan, fraction).unwrap();
        prop_assert_eq!(b.global + b.per_cpm.iter().sum::<u64>(), total);
        let (lo, hi) = (b.per_cpm.iter().min().unwrap(), b.per_cpm.iter().max().unwrap());
        prop_assert!(hi - lo <= 1);
    }

    #[test]
    fn random_plans_cover_every_qubit(n in 4usize..12, extra in 0usize..6, seed in any::<u64>()) {
        let count = (n.div_ceil(2) + extra).min(n * (n - 1) / 2);
        let plan = random_plan(n, 2, count, seed).unwrap();
        prop_assert_eq!(plan.cpm_count(), count);
        prop_assert!(plan.uncovered().is_empty());
    }
}
