//! Simulated parse errors: a proportion of gold head edges is replaced by
//! random ones.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::corpus::{Corpus, Sentence};

#[derive(Debug, Error, PartialEq)]
pub enum NoiseError {
    #[error("noise rate {0} outside [0, 1]")]
    InvalidRate(f64),
    #[error("document `{0}`: no gold heads")]
    NoGoldHeads(String),
}

#[derive(Clone, Debug)]
pub struct Perturbed {
    pub corpus: Corpus,
    /// Edges that could be replaced: tokens with a head in sentences of at
    /// least three tokens.
    pub eligible: usize,
    pub changed: usize,
}

impl Perturbed {
    pub fn changed_fraction(&self) -> f64 {
        if self.eligible == 0 {
            0.0
        } else {
            self.changed as f64 / self.eligible as f64
        }
    }
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

fn sentence_rng(seed: u64, doc: usize, sent: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix(splitmix(splitmix(seed) ^ doc as u64) ^ sent as u64))
}

fn eligible(sent: &Sentence, t: usize) -> bool {
    sent.len() >= 3 && sent.tokens[t].head.is_some()
}

/// A uniform head other than `t` and its current head.
fn resample(rng: &mut ChaCha8Rng, len: usize, t: usize, head: usize) -> usize {
    let (lo, hi) = if t < head { (t, head) } else { (head, t) };
    let mut k = rng.gen_range(0..len - 2);
    if k >= lo {
        k += 1;
    }
    if k >= hi {
        k += 1;
    }
    k
}

fn check(corpus: &Corpus, rate: f64) -> Result<(), NoiseError> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(NoiseError::InvalidRate(rate));
    }
    match corpus.documents.iter().find(|d| !d.has_heads()) {
        Some(d) => Err(NoiseError::NoGoldHeads(d.id.clone())),
        None => Ok(()),
    }
}

/// Replaces each eligible edge independently with probability `rate`.
pub fn perturb(corpus: &Corpus, rate: f64, seed: u64) -> Result<Perturbed, NoiseError> {
    check(corpus, rate)?;
    let mut out = corpus.clone();
    let counts: Vec<(usize, usize)> = out
        .documents
        .par_iter_mut()
        .enumerate()
        .map(|(d, doc)| {
            let (mut e, mut c) = (0, 0);
            for (s, sent) in doc.sentences.iter_mut().enumerate() {
                let mut rng = sentence_rng(seed, d, s);
                let len = sent.len();
                for t in 0..len {
                    if !eligible(sent, t) {
                        continue;
                    }
                    e += 1;
                    if rng.gen_bool(rate) {
                        let head = sent.tokens[t].head.unwrap_or(0);
                        sent.tokens[t].head = Some(resample(&mut rng, len, t, head));
                        c += 1;
                    }
                }
            }
            (e, c)
        })
        .collect();
    Ok(Perturbed {
        corpus: out,
        eligible: counts.iter().map(|x| x.0).sum(),
        changed: counts.iter().map(|x| x.1).sum(),
    })
}

/// Replaces exactly `⌊rate · E⌋` of the `E` eligible edges, chosen
/// uniformly.
pub fn perturb_exact(corpus: &Corpus, rate: f64, seed: u64) -> Result<Perturbed, NoiseError> {
    check(corpus, rate)?;
    let mut out = corpus.clone();
    let mut sites = Vec::new();
    for (d, doc) in out.documents.iter().enumerate() {
        for (s, sent) in doc.sentences.iter().enumerate() {
            for t in 0..sent.len() {
                if eligible(sent, t) {
                    sites.push((d, s, t));
                }
            }
        }
    }
    let k = (rate * sites.len() as f64).floor() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix(seed));
    let mut chosen: Vec<usize> = index::sample(&mut rng, sites.len(), k).into_vec();
    chosen.sort_unstable();
    let mut current = None;
    let mut srng = sentence_rng(seed, 0, 0);
    for i in chosen {
        let (d, s, t) = sites[i];
        if current != Some((d, s)) {
            current = Some((d, s));
            srng = sentence_rng(seed, d, s);
        }
        let sent = &mut out.documents[d].sentences[s];
        let head = sent.tokens[t].head.unwrap_or(0);
        sent.tokens[t].head = Some(resample(&mut srng, sent.len(), t, head));
    }
    Ok(Perturbed {
        corpus: out,
        eligible: sites.len(),
        changed: k,
    })
}
