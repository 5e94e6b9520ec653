//! Rank statistics and the three few-shot benchmark protocols.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::fewshot::{FewShotContext, Inferencer};
use crate::rng::derive_rng;
use crate::spaces::{cosine, rank_of_gold};

/// Fractional ranks (1-based), ties receiving the mean of their positions.
pub fn mid_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = alloc::vec![0.0; xs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman's rho: Pearson correlation of mid-ranks.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::ShapeMismatch {
            expected: xs.len(),
            found: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(Error::Undefined("spearman needs at least two pairs"));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("spearman input"));
    }
    let rx = mid_ranks(xs);
    let ry = mid_ranks(ys);
    let n = xs.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Undefined("zero rank variance"));
    }
    Ok((sxy / libm::sqrt(sxx * syy)).clamp(-1.0, 1.0))
}

/// Mean reciprocal rank.
pub fn mrr(ranks: &[usize]) -> Result<f64> {
    if ranks.is_empty() {
        return Err(Error::EmptyInput("ranks"));
    }
    if ranks.contains(&0) {
        return Err(Error::Domain("ranks start at 1"));
    }
    Ok(ranks.iter().map(|&r| 1.0 / r as f64).sum::<f64>() / ranks.len() as f64)
}

pub fn median_rank(ranks: &[usize]) -> Result<f64> {
    if ranks.is_empty() {
        return Err(Error::EmptyInput("ranks"));
    }
    let mut sorted = ranks.to_vec();
    sorted.sort_unstable();
    let mid = sorted.len() / 2;
    Ok(if sorted.len() % 2 == 1 {
        sorted[mid] as f64
    } else {
        (sorted[mid - 1] + sorted[mid]) as f64 / 2.0
    })
}

/// A frequent word and one definition sentence with the word replaced by the slot.
#[derive(Debug, Clone, PartialEq)]
pub struct DnItem {
    pub word: String,
    pub definition: FewShotContext,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChimeraItem {
    pub id: String,
    pub sentences: FewShotContext,
    pub probes: Vec<String>,
    pub human_scores: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrwItem {
    pub rare: String,
    pub frequent: String,
    pub human_score: f64,
    pub sentences: FewShotContext,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Dn,
    Chimera,
    Crw,
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::Dn => "dn",
            Task::Chimera => "chimera",
            Task::Crw => "crw",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Skipped {
    pub item: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub task: Task,
    /// Named metrics in report order.
    pub metrics: Vec<(String, f64)>,
    pub skipped: Vec<Skipped>,
    /// Items that had fewer sentences than requested and used all of them.
    pub short_items: usize,
}

impl EvalReport {
    pub fn new(task: Task) -> Self {
        EvalReport {
            task,
            metrics: Vec::new(),
            skipped: Vec::new(),
            short_items: 0,
        }
    }

    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics.iter().find(|(n, _)| n == name).map(|&(_, v)| v)
    }

    fn skip(&mut self, item: &str, reason: impl fmt::Display) {
        self.skipped.push(Skipped {
            item: item.to_string(),
            reason: reason.to_string(),
        });
    }
}

/// Ranks of the gold words, with skipped items recorded.
pub fn dn_ranks(inferencer: &Inferencer<'_>, items: &[DnItem]) -> (Vec<Option<usize>>, Vec<Skipped>) {
    let mut report = EvalReport::new(Task::Dn);
    let ranks = items
        .iter()
        .map(|item| {
            if inferencer.space().vocab().lookup(&item.word).is_none() {
                report.skip(&item.word, "gold word out of vocabulary");
                return None;
            }
            let rank = inferencer
                .infer(&item.definition)
                .and_then(|v| rank_of_gold(inferencer.space(), &v, &item.word));
            match rank {
                Ok(r) => Some(r),
                Err(e) => {
                    report.skip(&item.word, e);
                    None
                }
            }
        })
        .collect();
    (ranks, report.skipped)
}

/// Definitional Nonce: MRR and median rank of the gold vectors.
pub fn eval_dn(inferencer: &Inferencer<'_>, items: &[DnItem]) -> Result<EvalReport> {
    let (ranks, skipped) = dn_ranks(inferencer, items);
    let ranks: Vec<usize> = ranks.into_iter().flatten().collect();
    if ranks.is_empty() {
        return Err(Error::AllSkipped);
    }
    let mut report = EvalReport::new(Task::Dn);
    report.skipped = skipped;
    report.metrics.push(("MRR".into(), mrr(&ranks)?));
    report.metrics.push(("median_rank".into(), median_rank(&ranks)?));
    report.metrics.push(("items".into(), ranks.len() as f64));
    Ok(report)
}

/// Chimera: per trial size `s`, Spearman between cosine-to-probes and human
/// ratings using the first `s` passages, averaged over items (`L{s}`).
pub fn eval_chimera(inferencer: &Inferencer<'_>, items: &[ChimeraItem], trial_sizes: &[usize]) -> Result<EvalReport> {
    if let Some(s) = trial_sizes.iter().find(|&&s| !(1..=6).contains(&s)) {
        return Err(Error::InvalidConfig(format!("chimera trial size {s} outside 1..=6")));
    }
    let space = inferencer.space();
    let mut report = EvalReport::new(Task::Chimera);
    // Probes surviving the vocabulary filter, per item.
    let mut usable: Vec<Option<(Vec<&[f32]>, Vec<f64>)>> = Vec::with_capacity(items.len());
    for item in items {
        if item.probes.len() != item.human_scores.len() {
            return Err(Error::ShapeMismatch {
                expected: item.probes.len(),
                found: item.human_scores.len(),
            });
        }
        let (vectors, scores): (Vec<&[f32]>, Vec<f64>) = item
            .probes
            .iter()
            .zip(&item.human_scores)
            .filter_map(|(p, &h)| space.lookup(p).map(|v| (v, h)))
            .unzip();
        if vectors.len() < 2 {
            report.skip(&item.id, "fewer than 2 probes in vocabulary");
            usable.push(None);
        } else {
            usable.push(Some((vectors, scores)));
        }
    }
    for &size in trial_sizes {
        let mut rhos = Vec::new();
        for (item, probes) in items.iter().zip(&usable) {
            let Some((vectors, scores)) = probes else { continue };
            if item.sentences.len() < size {
                report.short_items += 1;
            }
            let rho = inferencer.infer(&item.sentences.prefix(size)).and_then(|v| {
                let sims = vectors.iter().map(|p| cosine(&v, p)).collect::<Result<Vec<_>>>()?;
                spearman(&sims, scores)
            });
            match rho {
                Ok(r) => rhos.push(r),
                Err(e) => report.skip(&item.id, format_args!("L{size}: {e}")),
            }
        }
        if rhos.is_empty() {
            report.skip("*", format_args!("L{size}: no item could be scored"));
            continue;
        }
        let mean = rhos.iter().sum::<f64>() / rhos.len() as f64;
        report.metrics.push((format!("L{size}"), mean));
    }
    if report.metrics.is_empty() {
        return Err(Error::AllSkipped);
    }
    Ok(report)
}

/// `count` distinct indices below `n`, uniformly (partial Fisher–Yates).
fn sample_indices<R: Rng + ?Sized>(n: usize, count: usize, rng: &mut R) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..n).collect();
    let count = count.min(n);
    for i in 0..count {
        let j = rng.random_range(i..n);
        pool.swap(i, j);
    }
    pool.truncate(count);
    pool
}

/// Contextual Rare Words: per size `s` and draw, sample `s` sentences per
/// item, correlate cosine(rare, frequent) with the human scores across items,
/// and average over draws (`spearman@{s}`).
pub fn eval_crw(
    inferencer: &Inferencer<'_>,
    items: &[CrwItem],
    sizes: &[usize],
    selections: usize,
    seed: u64,
) -> Result<EvalReport> {
    if sizes.contains(&0) {
        return Err(Error::InvalidConfig("CRW sizes must be positive".into()));
    }
    if selections == 0 {
        return Err(Error::InvalidConfig("selections must be at least 1".into()));
    }
    let space = inferencer.space();
    let mut report = EvalReport::new(Task::Crw);
    let mut usable = Vec::new();
    for (idx, item) in items.iter().enumerate() {
        let name = format!("{}/{}", item.rare, item.frequent);
        match space.lookup(&item.frequent) {
            None => report.skip(&name, "frequent word out of vocabulary"),
            Some(_) if item.sentences.is_empty() => report.skip(&name, "no context sentences"),
            Some(v) => usable.push((idx, item, v, name)),
        }
    }
    for &size in sizes {
        report.short_items += usable.iter().filter(|(_, it, _, _)| it.sentences.len() < size).count();
        let mut rhos = Vec::new();
        for draw in 0..selections {
            let mut sims = Vec::new();
            let mut human = Vec::new();
            for (idx, item, frequent, name) in &usable {
                let mut rng = derive_rng(seed, &[*idx as u64, size as u64, draw as u64]);
                let chosen = sample_indices(item.sentences.len(), size, &mut rng);
                match inferencer
                    .infer(&item.sentences.select(&chosen))
                    .and_then(|v| cosine(&v, frequent))
                {
                    Ok(s) => {
                        sims.push(s);
                        human.push(item.human_score);
                    }
                    Err(e) => report.skip(name, format_args!("size {size}, draw {draw}: {e}")),
                }
            }
            match spearman(&sims, &human) {
                Ok(r) => rhos.push(r),
                Err(e) => report.skip("*", format_args!("size {size}, draw {draw}: {e}")),
            }
        }
        if rhos.is_empty() {
            continue;
        }
        let mean = rhos.iter().sum::<f64>() / rhos.len() as f64;
        report.metrics.push((format!("spearman@{size}"), mean));
    }
    if report.metrics.is_empty() {
        return Err(Error::AllSkipped);
    }
    Ok(report)
}
