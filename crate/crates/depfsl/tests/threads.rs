//! Multi-threaded training.

use depfsl::parallel::train;
use depfsl::synthetic::{Language, LanguageSpec};
use depfsl_core::corpus::Vocabulary;
use depfsl_core::training::{ModelKind, Trainer, TrainerConfig};

#[test]
fn threaded_training_covers_the_corpus_and_stays_finite() {
    let lang = Language::new(LanguageSpec::default());
    let corpus = lang.corpus(1500, 4);
    let vocab = Vocabulary::build(&corpus, 1, true);
    for model in ModelKind::ALL {
        let config = TrainerConfig { model, dim: 10, epochs: 2, subsample_tau: 1.0, ..TrainerConfig::default() };
        let trainer = Trainer::new(&corpus, vocab.clone(), config).unwrap();
        let mut single = Vec::new();
        train(&trainer, 1, |s, _| single.push(*s)).unwrap();
        let mut multi = Vec::new();
        let trained = train(&trainer, 4, |s, _| multi.push(*s)).unwrap();
        assert_eq!(multi.len(), 2);
        for (a, b) in single.iter().zip(&multi) {
            assert_eq!(a.tuples, b.tuples, "{model}");
            assert!(b.mean_loss.is_finite());
        }
        assert!(multi[1].mean_loss < multi[0].mean_loss, "{model}: {multi:?}");
        assert!(trained.space.targets().iter().all(|x| x.is_finite()));
        assert_eq!(trained.matrices.is_some(), model == ModelKind::DepMatrix);
    }
}
