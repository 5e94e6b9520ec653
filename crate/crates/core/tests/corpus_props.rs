use depfsl_core::corpus::{
    extract_dependency_tuples, extract_window_tuples, subsample_weight, window_weight, DependencyMode,
    DependencyVocab, NoiseDistribution, ParsedSentence, Token, Vocabulary,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sentence_from(forms: &[String], heads: &[u32]) -> ParsedSentence {
    let tokens = forms
        .iter()
        .zip(heads)
        .enumerate()
        .map(|(i, (f, &h))| Token::new(i as u32 + 1, f.clone(), h, "dep"))
        .collect();
    ParsedSentence::new(tokens).unwrap()
}

fn arb_sentence() -> impl Strategy<Value = ParsedSentence> {
    (1usize..12).prop_flat_map(|n| {
        (
            prop::collection::vec("[a-e]", n),
            prop::collection::vec(0..=n as u32, n),
        )
            .prop_map(|(forms, heads)| {
                let heads: Vec<u32> = heads
                    .into_iter()
                    .enumerate()
                    .map(|(i, h)| if h == i as u32 + 1 { 0 } else { h })
                    .collect();
                sentence_from(&forms, &heads)
            })
    })
}

proptest! {
    #[test]
    fn full_window_yields_all_ordered_pairs(s in arb_sentence()) {
        let vocab = Vocabulary::build([&s], 1, true);
        let n = s.len();
        prop_assert_eq!(extract_window_tuples(&s, n, &vocab).len(), n * (n - 1));
    }

    #[test]
    fn dependency_tuples_are_twice_the_in_vocabulary_arcs(s in arb_sentence(), min_count in 1u64..3) {
        let vocab = Vocabulary::build([&s], min_count, true);
        let in_vocab = s
            .arcs()
            .filter(|a| {
                vocab.lookup(&s.token(a.head).unwrap().form).is_some()
                    && vocab.lookup(&s.token(a.dependent).unwrap().form).is_some()
            })
            .count();
        for mode in [DependencyMode::SkipGram, DependencyMode::Matrix] {
            let deps = DependencyVocab::build([&s], &vocab, mode);
            prop_assert_eq!(extract_dependency_tuples(&s, &vocab, &deps).len(), 2 * in_vocab);
        }
    }

    #[test]
    fn weights_are_monotone(a in 1e-9f64..1.0, b in 1e-9f64..1.0, tau in 1e-7f64..1e-2, m1 in 1usize..20, m2 in 1usize..20, n in 1usize..10) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(subsample_weight(hi, tau).unwrap() <= subsample_weight(lo, tau).unwrap());
        let (lo, hi) = if m1 <= m2 { (m1, m2) } else { (m2, m1) };
        prop_assert!(window_weight(hi, n) <= window_weight(lo, n));
    }

    #[test]
    fn vocabulary_is_a_bijection(s in arb_sentence(), min_count in 1u64..3) {
        let vocab = Vocabulary::build([&s], min_count, true);
        for (i, w) in vocab.words().iter().enumerate() {
            prop_assert_eq!(vocab.id(w), Some(i as u32));
            prop_assert!(vocab.count(i as u32) >= min_count);
        }
        prop_assert_eq!(vocab.total(), vocab.counts().iter().sum::<u64>());
    }
}

#[test]
fn noise_sums_to_one_for_large_vocabularies() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for size in [1usize, 17, 1000, 100_000] {
        let counts: Vec<u64> = (0..size).map(|_| rng.random_range(1..1_000_000)).collect();
        let noise = NoiseDistribution::from_counts(&counts).unwrap();
        let sum: f64 = noise.probabilities().iter().sum();
        assert!((sum - 1.0).abs() < 1e-9, "{size}: {sum}");
        assert!(noise.probabilities().iter().all(|&p| p > 0.0));
    }
}
