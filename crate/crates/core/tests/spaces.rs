//! Cosine, rank and neighbor queries against brute force.

use depfsl_core::corpus::Vocabulary;
use depfsl_core::spaces::{cosine, nearest_neighbors, rank_of_gold, EmbeddingSpace};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_space(rng: &mut ChaCha8Rng, words: usize, dim: usize) -> EmbeddingSpace {
    let vocab = Vocabulary::from_ordered(
        (0..words).map(|i| format!("w{i}")).collect(),
        vec![1; words],
        1,
        false,
    )
    .unwrap();
    // Coarse grid values so that exact ties occur.
    let data = (0..words * dim).map(|_| rng.random_range(-3..=3) as f32).collect();
    EmbeddingSpace::new(vocab, dim, data).unwrap()
}

fn brute_cos(u: &[f64], v: &[f32]) -> Option<f64> {
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * *b as f64).sum();
    let nu = u.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nv = v.iter().map(|a| (*a as f64).powi(2)).sum::<f64>().sqrt();
    (nu > 0.0 && nv > 0.0).then(|| dot / (nu * nv))
}

#[test]
fn rank_matches_brute_force_sort() {
    let mut rng = ChaCha8Rng::seed_from_u64(1000);
    for size in [3, 10, 57, 300, 1000] {
        let space = random_space(&mut rng, size, 4);
        for _ in 0..10 {
            let query: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
            let gold = rng.random_range(0..size) as u32;
            let Some(gold_sim) = brute_cos(&query, space.vector(gold)) else { continue };
            let mut sims: Vec<(u32, f64)> = (0..size as u32)
                .filter_map(|i| brute_cos(&query, space.vector(i)).map(|s| (i, s)))
                .collect();
            sims.sort_by(|a, b| b.1.total_cmp(&a.1));
            let expected = 1 + sims.iter().filter(|(i, s)| *i != gold && *s > gold_sim).count();
            let word = space.vocab().word(gold).to_string();
            assert_eq!(rank_of_gold(&space, &query, &word).unwrap(), expected);
        }
    }
}

#[test]
fn full_neighbor_list_is_pairwise_consistent() {
    let mut rng = ChaCha8Rng::seed_from_u64(1001);
    let space = random_space(&mut rng, 200, 5);
    let query = [0.3, -0.1, 0.7, 0.2, -0.5];
    let nn = nearest_neighbors(&space, &query, usize::MAX).unwrap();
    for w in nn.windows(2) {
        assert!(w[0].1 >= w[1].1);
        if w[0].1 == w[1].1 {
            let (a, b) = (space.vocab().id(w[0].0).unwrap(), space.vocab().id(w[1].0).unwrap());
            assert!(a < b);
        }
    }
    for (word, sim) in &nn {
        let v = space.vector(space.vocab().id(word).unwrap());
        assert!((cosine(&query, v).unwrap() - sim).abs() < 1e-12);
    }
}

proptest! {
    #[test]
    fn cosine_symmetric_and_scale_invariant(
        u in prop::collection::vec(-10.0f64..10.0, 6),
        v in prop::collection::vec(-10.0f64..10.0, 6),
        alpha in 0.001f64..1000.0,
    ) {
        if let Ok(c) = cosine(&u, &v) {
            prop_assert!((cosine(&v, &u).unwrap() - c).abs() < 1e-12);
            let scaled: Vec<f64> = u.iter().map(|x| x * alpha).collect();
            prop_assert!((cosine(&scaled, &v).unwrap() - c).abs() < 1e-12);
        }
    }
}
