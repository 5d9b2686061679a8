//! Context-window classification of candidate occurrences.

mod embedding;
mod forest;
mod persist;

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::candidates::{window_range, CandidateSet, Occurrence, CONTEXT_WINDOW};
use crate::gazetteer::EntityType;
use crate::textprep::{Channel, PageText, Token};
use crate::{Error, Result};

pub(crate) use embedding::fnv1a;
pub use embedding::{cfv, train_wfv, ContextFeatureVector, EmbeddingConfig, WordVectorTable};
pub use forest::{ContextClassifier, DecisionTree, ForestConfig, TreeNode};

const WFV_MAGIC: &[u8; 8] = b"GTAGWFV\0";
const CLF_MAGIC: &[u8; 8] = b"GTAGCLF\0";

impl WordVectorTable {
    pub fn save(&self, path: &Path) -> Result<()> {
        persist::save(path, WFV_MAGIC, self)
    }

    pub fn load(path: &Path) -> Result<Self> {
        persist::load(path, WFV_MAGIC)
    }
}

impl ContextClassifier {
    pub fn save(&self, path: &Path) -> Result<()> {
        persist::save(path, CLF_MAGIC, self)
    }

    pub fn load(path: &Path) -> Result<Self> {
        persist::load(path, CLF_MAGIC)
    }
}

/// One labelled candidate occurrence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotation {
    pub page_id: String,
    pub surface: String,
    pub semantic_type: EntityType,
    pub channel: Channel,
    pub start: usize,
    pub length: usize,
    pub label: bool,
    /// Window tokens; when absent they are recovered from the page.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context_window: Option<Vec<String>>,
}

/// Train the context classifier on labelled occurrences. `pages` is consulted
/// for annotations that do not carry their own context window.
pub fn train_classifier(
    annotations: &[Annotation],
    pages: &HashMap<String, PageText>,
    wfv: &WordVectorTable,
    cfg: &ForestConfig,
) -> Result<ContextClassifier> {
    let mut xs = Vec::with_capacity(annotations.len());
    let mut ys = Vec::with_capacity(annotations.len());
    for a in annotations {
        let features = match &a.context_window {
            Some(window) => wfv.aggregate(window),
            None => {
                let page = pages
                    .get(&a.page_id)
                    .ok_or_else(|| Error::InvalidInput(format!("annotation refers to unknown page {:?}", a.page_id)))?;
                let tokens = page.channel(a.channel);
                if a.start + a.length > tokens.len() {
                    return Err(Error::InvalidInput(format!(
                        "annotation span {}+{} is outside {:?} of page {:?}",
                        a.start, a.length, a.channel, a.page_id
                    )));
                }
                let (before, after) = window_range(a.start, a.length, tokens.len(), CONTEXT_WINDOW);
                let window: Vec<&str> = tokens[before].iter().chain(&tokens[after]).map(|t| t.text.as_str()).collect();
                wfv.aggregate(&window)
            }
        };
        xs.push(features);
        ys.push(a.label);
    }
    ContextClassifier::train(&xs, &ys, cfg)
}

/// Anything that maps an occurrence in its channel to a probability.
pub trait ContextScorer: Send + Sync {
    fn score(&self, occurrence: &Occurrence, channel_tokens: &[Token]) -> f64;
}

impl<F> ContextScorer for F
where
    F: Fn(&Occurrence, &[Token]) -> f64 + Send + Sync,
{
    fn score(&self, occurrence: &Occurrence, channel_tokens: &[Token]) -> f64 {
        self(occurrence, channel_tokens)
    }
}

/// Word vectors and forest used together as a [`ContextScorer`].
#[derive(Debug, Clone, Copy)]
pub struct ContextModel<'a> {
    pub wfv: &'a WordVectorTable,
    pub classifier: &'a ContextClassifier,
}

impl ContextScorer for ContextModel<'_> {
    fn score(&self, occurrence: &Occurrence, channel_tokens: &[Token]) -> f64 {
        let v = cfv(occurrence, channel_tokens, self.wfv);
        self.classifier.predict_proba(&v.0)
    }
}

pub type ContextProbabilities = BTreeMap<(String, EntityType), f64>;

/// Context probability of each candidate: the maximum over its occurrences.
pub fn score_candidates(cands: &CandidateSet, page: &PageText, scorer: &dyn ContextScorer) -> ContextProbabilities {
    cands
        .iter()
        .map(|c| {
            let p = c
                .occurrences
                .iter()
                .map(|o| scorer.score(o, page.channel(o.channel)).clamp(0.0, 1.0))
                .fold(0.0, f64::max);
            ((c.surface.clone(), c.semantic_type), p)
        })
        .collect()
}
