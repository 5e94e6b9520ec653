//! Seeded synthetic language with dependency parses.
//!
//! Words belong to semantic classes: each class has nouns, verbs and one
//! adjective, and a class's nouns are always the subjects of its verbs.
//! Some sentences put an oblique phrase from another class on each side of
//! the subject, attached to the verb: linearly they are the subject's nearest
//! neighbors, in the parse they are two or three arcs away.
//!
//! Held-out definitions use that shape with the slot as subject, so the class
//! verb is three tokens away but one arc away.

use std::fs;
use std::path::Path;

use depfsl_core::corpus::{ParsedSentence, Token};
use depfsl_core::rng::derive_rng;
use rand::Rng;

use crate::conllu::{to_conllu_string, write_conllu_file};
use crate::error::{Error, Result};

pub const SLOT: &str = "___";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LanguageSpec {
    pub classes: usize,
    pub nouns_per_class: usize,
    pub verbs_per_class: usize,
}

impl Default for LanguageSpec {
    fn default() -> Self {
        LanguageSpec {
            classes: 28,
            nouns_per_class: 4,
            verbs_per_class: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Language {
    pub nouns: Vec<Vec<String>>,
    pub verbs: Vec<Vec<String>>,
    pub adjectives: Vec<String>,
}

impl Language {
    pub fn new(spec: LanguageSpec) -> Self {
        assert!(spec.classes >= 3, "need at least three classes");
        let per_class = |prefix: &str, n: usize| -> Vec<Vec<String>> {
            (0..spec.classes)
                .map(|c| (0..n).map(|i| format!("{prefix}{c}x{i}")).collect())
                .collect()
        };
        Language {
            nouns: per_class("noun", spec.nouns_per_class),
            verbs: per_class("verb", spec.verbs_per_class),
            adjectives: (0..spec.classes).map(|c| format!("adj{c}")).collect(),
        }
    }

    pub fn classes(&self) -> usize {
        self.nouns.len()
    }

    /// Class of a noun, verb or adjective.
    pub fn class_of(&self, word: &str) -> Option<usize> {
        (0..self.classes()).find(|&c| {
            self.nouns[c].iter().any(|w| w == word) || self.verbs[c].iter().any(|w| w == word) || self.adjectives[c] == word
        })
    }

    fn pick<'a, R: Rng>(rng: &mut R, xs: &'a [String]) -> &'a str {
        &xs[rng.random_range(0..xs.len())]
    }

    fn other_class<R: Rng>(&self, rng: &mut R, class: usize) -> usize {
        (class + 1 + rng.random_range(0..self.classes() - 1)) % self.classes()
    }

    fn sentence(words: &[(&str, u32, &str)]) -> ParsedSentence {
        let tokens = words
            .iter()
            .enumerate()
            .map(|(i, &(form, head, rel))| Token::new(i as u32 + 1, form, head, rel))
            .collect();
        ParsedSentence::new(tokens).expect("generated parses are well formed")
    }

    /// `adjA nounA SUBJECT adjB nounB VERB`, both obliques headed by the verb.
    fn oblique_clause<R: Rng>(&self, rng: &mut R, subject: &str, class: usize) -> ParsedSentence {
        let (a, b) = (self.other_class(rng, class), self.other_class(rng, class));
        let noun_a = Self::pick(rng, &self.nouns[a]);
        let noun_b = Self::pick(rng, &self.nouns[b]);
        let verb = Self::pick(rng, &self.verbs[class]);
        Self::sentence(&[
            (&self.adjectives[a], 2, "amod"),
            (noun_a, 6, "obl"),
            (subject, 6, "nsubj"),
            (&self.adjectives[b], 5, "amod"),
            (noun_b, 6, "obl"),
            (verb, 0, "root"),
        ])
    }

    /// One training sentence.
    pub fn training_sentence<R: Rng>(&self, rng: &mut R) -> ParsedSentence {
        let c = rng.random_range(0..self.classes());
        let noun = Self::pick(rng, &self.nouns[c]).to_string();
        match rng.random_range(0..10) {
            0..=3 => {
                let verb = Self::pick(rng, &self.verbs[c]);
                let oc = rng.random_range(0..self.classes());
                let object = Self::pick(rng, &self.nouns[oc]);
                Self::sentence(&[
                    ("the", 3, "det"),
                    (&self.adjectives[c], 3, "amod"),
                    (&noun, 4, "nsubj"),
                    (verb, 0, "root"),
                    ("the", 6, "det"),
                    (object, 4, "obj"),
                ])
            }
            4..=7 => self.oblique_clause(rng, &noun, c),
            _ => Self::sentence(&[
                ("the", 2, "det"),
                (&noun, 4, "nsubj"),
                ("was", 4, "cop"),
                (&self.adjectives[c], 0, "root"),
            ]),
        }
    }

    pub fn corpus(&self, sentences: usize, seed: u64) -> Vec<ParsedSentence> {
        let mut rng = derive_rng(seed, &[0]);
        (0..sentences).map(|_| self.training_sentence(&mut rng)).collect()
    }

    /// A definition of a word of `class`, with the slot in subject position.
    pub fn definition<R: Rng>(&self, rng: &mut R, class: usize) -> ParsedSentence {
        self.oblique_clause(rng, SLOT, class)
    }

    /// One `(gold noun, definition)` pair per noun, in class order.
    pub fn definitions(&self, seed: u64) -> Vec<(String, ParsedSentence)> {
        let mut rng = derive_rng(seed, &[1]);
        let mut out = Vec::new();
        for c in 0..self.classes() {
            for noun in &self.nouns[c] {
                out.push((noun.clone(), self.definition(&mut rng, c)));
            }
        }
        out
    }
}

/// FNV-1a over the CoNLL-U rendering; used to pin generator output.
pub fn fingerprint(sentences: &[ParsedSentence]) -> u64 {
    to_conllu_string(sentences)
        .bytes()
        .fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

fn mkdir(p: &Path) -> Result<()> {
    fs::create_dir_all(p).map_err(|e| Error::io(p, e))
}

fn write(p: &Path, text: &str) -> Result<()> {
    fs::write(p, text).map_err(|e| Error::io(p, e))
}

/// Writes `corpus.conllu` plus DN, Chimera and CRW datasets under `dir`.
pub fn write_dataset(dir: &Path, lang: &Language, sentences: usize, seed: u64) -> Result<()> {
    mkdir(dir)?;
    write_conllu_file(&dir.join("corpus.conllu"), &lang.corpus(sentences, seed))?;

    let dn_dir = dir.join("dn");
    mkdir(&dn_dir)?;
    let mut manifest = String::new();
    for (i, (gold, def)) in lang.definitions(seed).into_iter().enumerate() {
        let name = format!("{i:04}.conllu");
        write_conllu_file(&dn_dir.join(&name), &[def])?;
        manifest.push_str(&format!("{gold}\tdn/{name}\n"));
    }
    write(&dir.join("dn.tsv"), &manifest)?;

    let mut rng = derive_rng(seed, &[2]);
    let mut chimera = String::new();
    for c in 0..lang.classes() {
        let id = format!("chimera{c}");
        let sub = dir.join("chimera").join(&id);
        mkdir(&sub)?;
        for k in 1..=6 {
            write_conllu_file(&sub.join(format!("sent_{k}.conllu")), &[lang.definition(&mut rng, c)])?;
        }
        let other = lang.other_class(&mut rng, c);
        let probes = [
            lang.nouns[c][0].clone(),
            lang.adjectives[c].clone(),
            lang.nouns[other][0].clone(),
            lang.verbs[other][0].clone(),
        ];
        chimera.push_str(&format!("{id}\t{}\t4,3,1,2\tchimera/{id}\n", probes.join(",")));
    }
    write(&dir.join("chimera.tsv"), &chimera)?;

    let mut crw = String::new();
    for c in 0..lang.classes() {
        for (j, same) in [true, false].into_iter().enumerate() {
            let rare = format!("rare{c}x{j}");
            let sub = dir.join("crw").join(&rare);
            mkdir(&sub)?;
            let n = rng.random_range(3..12);
            for k in 0..n {
                write_conllu_file(&sub.join(format!("{k:03}.conllu")), &[lang.definition(&mut rng, c)])?;
            }
            let target = if same { c } else { lang.other_class(&mut rng, c) };
            let frequent = Language::pick(&mut rng, &lang.nouns[target]);
            let score = if same { rng.random_range(6.0..10.0) } else { rng.random_range(0.0..4.0) };
            crw.push_str(&format!("{rare}\t{frequent}\t{score:.2}\tcrw/{rare}\n"));
        }
    }
    write(&dir.join("crw.tsv"), &crw)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use depfsl_core::fewshot::dependency_distance;

    #[test]
    fn definitions_follow_the_pattern() {
        let lang = Language::new(LanguageSpec::default());
        for (gold, def) in lang.definitions(5) {
            let class = lang.class_of(&gold).unwrap();
            let slot = def.tokens().iter().find(|t| t.form == SLOT).unwrap().index;
            let verb = def.tokens().iter().find(|t| t.deprel == "root").unwrap();
            assert_eq!(lang.class_of(&verb.form), Some(class));
            assert_eq!(verb.index - slot, 3);
            assert_eq!(dependency_distance(&def, slot, verb.index).unwrap(), depfsl_core::fewshot::Distance::Hops(1));
        }
    }

    #[test]
    fn vocabulary_size_is_about_two_hundred() {
        let lang = Language::new(LanguageSpec::default());
        let corpus = lang.corpus(2000, 1);
        let vocab = depfsl_core::corpus::Vocabulary::build(&corpus, 1, true);
        assert!((170..=210).contains(&vocab.len()), "{}", vocab.len());
        assert_eq!(fingerprint(&corpus), fingerprint(&lang.corpus(2000, 1)));
    }
}
