//! End-to-end tagging, baselines, evaluation and synthetic corpora.

mod eval;
mod io;
mod synth;

use std::fs;
use std::path::Path;

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::candidates::{extract_candidates, CandidateSet};
use crate::context::{fnv1a, score_candidates, ContextProbabilities, ContextScorer};
use crate::gazetteer::{EntityType, Gazetteer, GazetteerRecord};
use crate::ilpmodel::{build_model, to_debug_text, to_lp, IlpModel, ModelConfig};
use crate::selection::{select, Geotag, Place};
use crate::solver::{solve, Assignment, SolverConfig};
use crate::textprep::{preprocess_page_with, Channel, ExtractorConfig};
use crate::{Error, Result};

pub use eval::{evaluate, EvaluationReport, GoldRecord, PageEvaluation};
pub use io::{file_stem_for, read_jsonl, read_pages, write_jsonl, PageInput};
pub use synth::{synth_generate, write_corpus, SynthConfig, SynthCorpus, SynthPage, PERSON_NAMES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TaggerMode {
    Ilp,
    /// The city candidate with the highest context probability.
    TopRanked,
    /// A city candidate drawn uniformly with a per-page seeded generator.
    Random(u64),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TaggerConfig {
    pub model: ModelConfig,
    pub solver: SolverConfig,
    pub extractor: ExtractorConfig,
}

/// Everything computed for one page.
#[derive(Debug, Clone)]
pub struct PageOutcome {
    pub candidates: CandidateSet,
    pub probabilities: ContextProbabilities,
    pub geotag: Geotag,
    /// Present in Ilp mode.
    pub model: Option<IlpModel>,
    pub assignment: Option<Assignment>,
}

/// Most populous city record named by `surface`, ties to the lowest id.
fn canonical_city<'g>(cands: &CandidateSet, surface: &str, gaz: &'g Gazetteer) -> Option<&'g GazetteerRecord> {
    cands
        .get(surface, EntityType::City)?
        .matched_ids
        .iter()
        .filter_map(|id| gaz.get(*id))
        .filter(|r| r.entity_type == EntityType::City)
        .min_by(|a, b| b.population.cmp(&a.population).then(a.geonames_id.cmp(&b.geonames_id)))
}

fn geotag_of_city(city: &GazetteerRecord, gaz: &Gazetteer, surface: &str, objective: f64) -> Geotag {
    Geotag {
        city: Some(Place::from(city)),
        state: city.parent_state_id.and_then(|id| gaz.get(id)).map(Place::from),
        country: city.parent_country_id.and_then(|id| gaz.get(id)).map(Place::from),
        objective,
        chosen_variables: vec![format!("{surface} - {}", EntityType::City)],
    }
}

fn baseline(cands: &CandidateSet, probs: &ContextProbabilities, gaz: &Gazetteer, mode: TaggerMode) -> Geotag {
    let cities: Vec<&str> = cands.cities.keys().map(String::as_str).collect();
    let prob = |s: &str| probs.get(&(s.to_owned(), EntityType::City)).copied().unwrap_or(0.0);
    let pick = match mode {
        TaggerMode::TopRanked => cities.iter().copied().fold(None, |best: Option<&str>, s| match best {
            Some(b) if prob(b) >= prob(s) => Some(b),
            _ => Some(s),
        }),
        TaggerMode::Random(seed) => {
            if cities.is_empty() {
                None
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ fnv1a(cands.page_id.as_bytes()));
                Some(cities[rng.gen_range(0..cities.len())])
            }
        }
        TaggerMode::Ilp => unreachable!("not a baseline"),
    };
    pick.and_then(|s| canonical_city(cands, s, gaz).map(|r| geotag_of_city(r, gaz, s, prob(s))))
        .unwrap_or_default()
}

/// Tag one page and keep the intermediate results.
pub fn run_page(
    page_id: &str,
    html: &str,
    gaz: &Gazetteer,
    scorer: &dyn ContextScorer,
    mode: TaggerMode,
    cfg: &TaggerConfig,
) -> Result<PageOutcome> {
    let page = preprocess_page_with(page_id, html, &cfg.extractor);
    let candidates = extract_candidates(&page, gaz);
    let probabilities = score_candidates(&candidates, &page, scorer);
    let (geotag, model, assignment) = match mode {
        TaggerMode::Ilp => {
            let model = build_model(&candidates, gaz, &probabilities, &cfg.model)?;
            let assignment = solve(&model, &cfg.solver)?;
            let geotag = select(&model, &assignment, gaz)?;
            (geotag, Some(model), Some(assignment))
        }
        _ => (baseline(&candidates, &probabilities, gaz, mode), None, None),
    };
    Ok(PageOutcome {
        candidates,
        probabilities,
        geotag,
        model,
        assignment,
    })
}

pub fn tag_page(
    page_id: &str,
    html: &str,
    gaz: &Gazetteer,
    scorer: &dyn ContextScorer,
    mode: TaggerMode,
    cfg: &TaggerConfig,
) -> Result<Geotag> {
    run_page(page_id, html, gaz, scorer, mode, cfg).map(|o| o.geotag)
}

/// Token sequences for embedding training: the title and the relaxed body
/// of every page.
pub fn embedding_corpus(pages: &[PageInput], cfg: &ExtractorConfig) -> Vec<Vec<String>> {
    pages
        .iter()
        .flat_map(|p| {
            let text = preprocess_page_with(&p.page_id, &p.html, cfg);
            [Channel::Title, Channel::BodyRelaxed].map(|c| text.channel_texts(c))
        })
        .filter(|s| !s.is_empty())
        .collect()
}

/// One line of tagger output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TagRecord {
    pub page_id: String,
    #[serde(flatten)]
    pub geotag: Geotag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Default)]
pub struct BatchOptions {
    /// Worker threads; 0 lets the pool pick.
    pub workers: usize,
    /// Write `<page>.lp` and `<page>.txt` for every Ilp model here.
    pub dump_models: Option<std::path::PathBuf>,
}

fn dump(dir: &Path, model: &IlpModel, gaz: &Gazetteer) -> Result<()> {
    let stem = file_stem_for(&model.page_id);
    let lp = dir.join(format!("{stem}.lp"));
    fs::write(&lp, to_lp(model)).map_err(|e| Error::io(&lp, e))?;
    let txt = dir.join(format!("{stem}.txt"));
    fs::write(&txt, to_debug_text(model, gaz)).map_err(|e| Error::io(&txt, e))
}

/// Tag every page on a worker pool. Results keep the input order; a failing
/// page yields a record with `error` set instead of aborting the batch.
pub fn tag_batch(
    pages: &[PageInput],
    gaz: &Gazetteer,
    scorer: &dyn ContextScorer,
    mode: TaggerMode,
    cfg: &TaggerConfig,
    opts: &BatchOptions,
) -> Result<Vec<TagRecord>> {
    if let Some(dir) = &opts.dump_models {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers)
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    let one = |p: &PageInput| -> TagRecord {
        let result = run_page(&p.page_id, &p.html, gaz, scorer, mode, cfg).and_then(|o| {
            if let (Some(dir), Some(model)) = (&opts.dump_models, &o.model) {
                dump(dir, model, gaz)?;
            }
            Ok(o.geotag)
        });
        match result {
            Ok(geotag) => TagRecord {
                page_id: p.page_id.clone(),
                geotag,
                error: None,
            },
            Err(e) => {
                warn!("page {}: {e}", p.page_id);
                TagRecord {
                    page_id: p.page_id.clone(),
                    geotag: Geotag::default(),
                    error: Some(e.to_string()),
                }
            }
        }
    };
    Ok(pool.install(|| pages.par_iter().map(one).collect()))
}
