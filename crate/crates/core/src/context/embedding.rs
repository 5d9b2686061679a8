//! Word feature vectors by random projection of co-occurrence counts.
//!
//! Every token owns a sparse ternary index vector drawn from a generator
//! seeded by the token text and the global seed. A word's vector is the sum
//! of the index vectors of its neighbours within the window over the whole
//! corpus, scaled to unit length.

use std::collections::{BTreeMap, HashMap};

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::candidates::{window_range, Occurrence, CONTEXT_WINDOW};
use crate::textprep::Token;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddingConfig {
    pub dim: usize,
    pub window: usize,
    pub seed: u64,
    /// Nonzero entries per index vector.
    pub nonzeros: usize,
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        EmbeddingConfig {
            dim: 100,
            window: 5,
            seed: 0,
            nonzeros: 10,
        }
    }
}

/// 64-bit FNV-1a; stable across platforms and toolchains.
pub(crate) fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn index_vector(token: &str, cfg: &EmbeddingConfig) -> Vec<(usize, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ fnv1a(token.as_bytes()));
    let k = cfg.nonzeros.clamp(1, cfg.dim);
    let mut idx = sample(&mut rng, cfg.dim, k).into_vec();
    idx.sort_unstable();
    idx.into_iter()
        .map(|i| (i, if rng.gen::<bool>() { 1.0 } else { -1.0 }))
        .collect()
}

fn l2_normalize(v: &mut [f64]) -> bool {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
        true
    } else {
        false
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordVectorTable {
    dim: usize,
    vectors: BTreeMap<String, Vec<f64>>,
    counts: BTreeMap<String, u64>,
}

impl WordVectorTable {
    pub fn from_vectors(dim: usize, vectors: BTreeMap<String, Vec<f64>>) -> Result<Self> {
        if let Some((t, v)) = vectors.iter().find(|(_, v)| v.len() != dim) {
            return Err(Error::InvalidInput(format!("vector for {t:?} has length {}, expected {dim}", v.len())));
        }
        let counts = vectors.keys().map(|k| (k.clone(), 1)).collect();
        Ok(WordVectorTable { dim, vectors, counts })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.vectors.get(token).map(Vec::as_slice)
    }

    pub fn count(&self, token: &str) -> u64 {
        self.counts.get(token).copied().unwrap_or(0)
    }

    /// Vector of `token`, or the zero vector when it is out of vocabulary.
    pub fn vector(&self, token: &str) -> Vec<f64> {
        self.get(token).map_or_else(|| vec![0.0; self.dim], <[f64]>::to_vec)
    }

    /// Normalised sum of the vectors of `tokens`; all-zero when none is in
    /// vocabulary.
    pub fn aggregate<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<f64> {
        let mut acc = vec![0.0; self.dim];
        for t in tokens {
            if let Some(v) = self.get(t.as_ref()) {
                acc.iter_mut().zip(v).for_each(|(a, x)| *a += x);
            }
        }
        l2_normalize(&mut acc);
        acc
    }
}

pub fn train_wfv<I, S>(corpus: I, cfg: &EmbeddingConfig) -> Result<WordVectorTable>
where
    I: IntoIterator<Item = Vec<S>>,
    S: AsRef<str>,
{
    if cfg.dim < 2 {
        return Err(Error::Config(format!("embedding dimension must be at least 2, got {}", cfg.dim)));
    }
    if cfg.window == 0 {
        return Err(Error::Config("embedding window must be positive".into()));
    }
    let mut index_cache: HashMap<String, Vec<(usize, f64)>> = HashMap::new();
    let mut acc: HashMap<String, Vec<f64>> = HashMap::new();
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();

    for sentence in corpus {
        let toks: Vec<&str> = sentence.iter().map(AsRef::as_ref).collect();
        for t in &toks {
            if !index_cache.contains_key(*t) {
                index_cache.insert((*t).to_owned(), index_vector(t, cfg));
            }
            *counts.entry((*t).to_owned()).or_default() += 1;
        }
        for (i, t) in toks.iter().enumerate() {
            let lo = i.saturating_sub(cfg.window);
            let hi = (i + cfg.window + 1).min(toks.len());
            let row = acc.entry((*t).to_owned()).or_insert_with(|| vec![0.0; cfg.dim]);
            for (j, n) in toks.iter().enumerate().take(hi).skip(lo) {
                if j == i {
                    continue;
                }
                for &(k, s) in &index_cache[*n] {
                    row[k] += s;
                }
            }
        }
    }
    if counts.is_empty() {
        return Err(Error::InvalidInput("embedding corpus is empty".into()));
    }

    let mut vectors = BTreeMap::new();
    for (tok, mut v) in acc {
        if !l2_normalize(&mut v) {
            // Token never had a neighbour; fall back to its own index vector.
            v = vec![0.0; cfg.dim];
            for &(k, s) in &index_cache[&tok] {
                v[k] = s;
            }
            l2_normalize(&mut v);
        }
        vectors.insert(tok, v);
    }
    Ok(WordVectorTable {
        dim: cfg.dim,
        vectors,
        counts,
    })
}

/// L2-normalised sum of the word vectors around an occurrence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextFeatureVector(pub Vec<f64>);

impl ContextFeatureVector {
    pub fn norm(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// Context feature vector of `occurrence` within its channel. The window is
/// up to five tokens each side with the span itself excluded.
pub fn cfv(occurrence: &Occurrence, channel_tokens: &[Token], wfv: &WordVectorTable) -> ContextFeatureVector {
    let (before, after) = window_range(occurrence.start, occurrence.length, channel_tokens.len(), CONTEXT_WINDOW);
    let window: Vec<&str> = channel_tokens[before]
        .iter()
        .chain(&channel_tokens[after])
        .map(|t| t.text.as_str())
        .collect();
    ContextFeatureVector(wfv.aggregate(&window))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textprep::Channel;

    fn cos(a: &[f64], b: &[f64]) -> f64 {
        let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
        let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
        dot / (na * nb)
    }

    fn sents(lines: &[&str]) -> Vec<Vec<String>> {
        lines.iter().map(|l| l.split(' ').map(str::to_owned).collect()).collect()
    }

    fn toks(words: &[&str]) -> Vec<Token> {
        words
            .iter()
            .enumerate()
            .map(|(i, w)| Token {
                text: (*w).into(),
                position: i,
                channel: Channel::BodyRelaxed,
            })
            .collect()
    }

    #[test]
    fn deterministic_given_seed() {
        let corpus = sents(&["the quick brown fox jumps"; 4]);
        let cfg = EmbeddingConfig::default();
        let a = train_wfv(corpus.clone(), &cfg).unwrap();
        let b = train_wfv(corpus.clone(), &cfg).unwrap();
        assert_eq!(a, b);
        let c = train_wfv(corpus, &EmbeddingConfig { seed: 9, ..cfg }).unwrap();
        assert_ne!(a.get("fox"), c.get("fox"));
    }

    #[test]
    fn identical_neighbourhoods_give_parallel_vectors() {
        // "red" and "blue" appear only between the same words.
        let corpus = sents(&["i like red cars a lot", "i like blue cars a lot", "we saw green trees today", "i like red cars a lot", "i like blue cars a lot"]);
        let t = train_wfv(corpus, &EmbeddingConfig { window: 2, ..Default::default() }).unwrap();
        assert!(cos(t.get("red").unwrap(), t.get("blue").unwrap()) >= 0.99);
        assert!(cos(t.get("red").unwrap(), t.get("green").unwrap()) < 0.9);
    }

    #[test]
    fn shape() {
        let corpus: Vec<Vec<String>> = (0..1000).map(|i| vec![format!("w{i}"), format!("w{}", (i + 1) % 1000)]).collect();
        let t = train_wfv(corpus, &EmbeddingConfig::default()).unwrap();
        assert_eq!(t.len(), 1000);
        assert!(t.get("w17").map(<[f64]>::len) == Some(100));
        assert_eq!(t.vector("unknown"), vec![0.0; 100]);
    }

    #[test]
    fn bad_inputs() {
        assert!(train_wfv(Vec::<Vec<String>>::new(), &EmbeddingConfig::default()).is_err());
        assert!(train_wfv(vec![Vec::<String>::new()], &EmbeddingConfig::default()).is_err());
        assert!(train_wfv(sents(&["a b"]), &EmbeddingConfig { dim: 1, ..Default::default() }).is_err());
    }

    #[test]
    fn lone_token_still_has_unit_vector() {
        let t = train_wfv(sents(&["solo", "a b"]), &EmbeddingConfig::default()).unwrap();
        let v = t.get("solo").unwrap();
        assert!((v.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12);
    }

    fn table() -> WordVectorTable {
        let mut m = BTreeMap::new();
        m.insert("a".to_owned(), vec![3.0, 0.0, 4.0]);
        m.insert("b".to_owned(), vec![0.0, 2.0, 0.0]);
        WordVectorTable::from_vectors(3, m).unwrap()
    }

    fn occ(start: usize, length: usize) -> Occurrence {
        Occurrence {
            channel: Channel::BodyRelaxed,
            start,
            length,
            context_window: vec![],
        }
    }

    #[test]
    fn cfv_single_token_window() {
        let tokens = toks(&["a", "city"]);
        let v = cfv(&occ(1, 1), &tokens, &table());
        assert_eq!(v.0, vec![0.6, 0.0, 0.8]);
    }

    #[test]
    fn cfv_all_oov_is_zero() {
        let tokens = toks(&["x", "city", "y"]);
        assert_eq!(cfv(&occ(1, 1), &tokens, &table()).0, vec![0.0; 3]);
    }

    #[test]
    fn cfv_two_token_window_is_parallel_to_sum() {
        // a + b = (3, 2, 4), norm sqrt(29).
        let tokens = toks(&["a", "los", "angeles", "b"]);
        let v = cfv(&occ(1, 2), &tokens, &table());
        let n = 29f64.sqrt();
        let want = [3.0 / n, 2.0 / n, 4.0 / n];
        for (x, y) in v.0.iter().zip(want) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn cfv_ignores_tokens_beyond_five() {
        let tokens = toks(&["a", "x", "x", "x", "x", "x", "city", "x", "x", "x", "x", "x", "b"]);
        assert_eq!(cfv(&occ(6, 1), &tokens, &table()).0, vec![0.0; 3]);
    }
}
