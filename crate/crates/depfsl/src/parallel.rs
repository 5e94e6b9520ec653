//! Multi-threaded training over shared parameter tables.
//!
//! Each epoch splits the corpus into one contiguous range per thread; workers
//! update the shared rows without locks. With one thread the result equals
//! [`Trainer::train`] bit for bit.

use std::thread;
use std::time::{Duration, Instant};

use depfsl_core::training::{EpochStats, ShardStats, TrainedModel, Trainer};

use crate::error::Result;

pub fn train<F>(trainer: &Trainer, threads: usize, mut progress: F) -> Result<TrainedModel>
where
    F: FnMut(&EpochStats, Duration),
{
    let threads = threads.max(1);
    let n = trainer.num_sentences();
    let params = trainer.init_params();
    for epoch in 0..trainer.config().epochs {
        let started = Instant::now();
        let stats = if threads == 1 {
            trainer.run_shard(&params, 0..n, epoch, 0)?
        } else {
            let chunk = n.div_ceil(threads).max(1);
            let results: Vec<_> = thread::scope(|scope| {
                let handles: Vec<_> = (0..threads)
                    .map(|shard| {
                        let range = (shard * chunk).min(n)..((shard + 1) * chunk).min(n);
                        let params = &params;
                        scope.spawn(move || trainer.run_shard(params, range, epoch, shard))
                    })
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("training worker panicked"))
                    .collect()
            });
            let mut total = ShardStats::default();
            for r in results {
                total.merge(r?);
            }
            total
        };
        progress(&EpochStats::new(epoch + 1, stats), started.elapsed());
    }
    Ok(trainer.publish(&params)?)
}
