#![allow(dead_code)]

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use geotag::context::{train_classifier, train_wfv, ContextClassifier, EmbeddingConfig, ForestConfig, WordVectorTable};
use geotag::gazetteer::{ingest, Gazetteer, GeonamesFiles, IngestOptions};
use geotag::pipeline::{embedding_corpus, synth_generate, PageInput, SynthConfig, SynthCorpus};
use geotag::textprep::ExtractorConfig;

pub const RUNNING_EXAMPLE: &str = "<html> <head> <title> Los Angeles Escort Listing </title> </head><body> <p> My name is Charlotte </p>. I come from Mexico and am new in the city of Los Angeles </body> </html>";

pub fn fixture_dir(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn geonames_files(name: &str) -> GeonamesFiles {
    let dir = fixture_dir(name);
    GeonamesFiles {
        cities: dir.join("cities15000.txt"),
        admin1: dir.join("admin1CodesASCII.txt"),
        countries: dir.join("countryInfo.txt"),
        alternates: Some(dir.join("alternateNames.txt")),
    }
}

pub fn gazetteer(name: &str, alternates: bool) -> Gazetteer {
    let opts = IngestOptions {
        include_alternates: alternates,
        ..Default::default()
    };
    ingest(&geonames_files(name), &opts).expect("fixture gazetteer")
}

pub fn inputs(corpus: &SynthCorpus) -> Vec<PageInput> {
    corpus
        .pages
        .iter()
        .map(|p| PageInput {
            page_id: p.page_id.clone(),
            html: p.html.clone(),
        })
        .collect()
}

/// Word vectors and classifier trained on a seeded synthetic corpus.
pub struct Trained {
    pub wfv: WordVectorTable,
    pub clf: ContextClassifier,
}

pub fn train_on(gaz: &Gazetteer, seed: u64, n_pages: usize) -> Trained {
    let cfg = SynthConfig {
        seed,
        n_pages,
        ..Default::default()
    };
    let corpus = synth_generate(&cfg, gaz).expect("training corpus");
    let emb = EmbeddingConfig {
        seed,
        ..Default::default()
    };
    let wfv = train_wfv(embedding_corpus(&inputs(&corpus), &ExtractorConfig::default()), &emb).expect("word vectors");
    let forest = ForestConfig {
        seed,
        ..Default::default()
    };
    let clf = train_classifier(&corpus.annotations, &HashMap::new(), &wfv, &forest).expect("classifier");
    Trained { wfv, clf }
}
