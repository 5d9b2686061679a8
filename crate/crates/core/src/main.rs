use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use geotag::context::{train_classifier, train_wfv, Annotation, ContextClassifier, ContextModel, EmbeddingConfig, ForestConfig, WordVectorTable};
use geotag::gazetteer::{ingest, load_cache, save_cache, GeonamesFiles, IngestOptions, MIN_CITY_POPULATION};
use geotag::ilpmodel::{ModelConfig, DEFAULT_POPULATION_FACTOR};
use geotag::pipeline::{
    embedding_corpus, evaluate, read_jsonl, read_pages, synth_generate, tag_batch, write_corpus, write_jsonl, BatchOptions,
    GoldRecord, SynthConfig, TagRecord, TaggerConfig, TaggerMode,
};
use geotag::textprep::{preprocess_page, ExtractorConfig};

#[derive(Parser)]
#[command(name = "geotag", version, about = "Resolve one city, state and country per webpage")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Gazetteer cache operations.
    #[command(subcommand)]
    Gazetteer(GazetteerCmd),
    /// Word-vector training.
    #[command(subcommand)]
    Embed(EmbedCmd),
    /// Context classifier training.
    #[command(subcommand)]
    Classifier(ClassifierCmd),
    /// Tag a page corpus.
    Tag(TagArgs),
    /// Score predictions against gold geotags.
    Evaluate(EvaluateArgs),
    /// Synthetic corpus generation.
    #[command(subcommand)]
    Synth(SynthCmd),
}

#[derive(Subcommand)]
enum GazetteerCmd {
    /// Build a gazetteer cache from Geonames dumps.
    Build(GazetteerBuild),
}

#[derive(Args)]
struct GazetteerBuild {
    #[arg(long)]
    cities: PathBuf,
    #[arg(long)]
    admin1: PathBuf,
    #[arg(long)]
    countries: PathBuf,
    #[arg(long)]
    alternates: Option<PathBuf>,
    /// Index canonical and ASCII names only.
    #[arg(long)]
    no_alternates: bool,
    #[arg(long, default_value_t = MIN_CITY_POPULATION)]
    min_population: u64,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Subcommand)]
enum EmbedCmd {
    /// Train word vectors on a directory of HTML pages.
    Train(EmbedTrain),
}

#[derive(Args)]
struct EmbedTrain {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(short = 'd', long, default_value_t = 100)]
    dim: usize,
    #[arg(long, default_value_t = 5)]
    window: usize,
    #[arg(long, default_value_t = 10)]
    nonzeros: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Subcommand)]
enum ClassifierCmd {
    /// Train the random forest on labelled occurrences.
    Train(ClassifierTrain),
}

#[derive(Args)]
struct ClassifierTrain {
    #[arg(long)]
    annotations: PathBuf,
    #[arg(long)]
    wfv: PathBuf,
    #[arg(long, default_value_t = 100)]
    trees: usize,
    #[arg(long, default_value_t = 12)]
    max_depth: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Pages for annotations without a stored context window.
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Ilp,
    TopRanked,
    Random,
}

#[derive(Args)]
struct TagArgs {
    /// Directory of .html files or a JSON-lines file of {page_id, html}.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    gazetteer: PathBuf,
    #[arg(long)]
    wfv: PathBuf,
    #[arg(long)]
    clf: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::Ilp)]
    mode: Mode,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Population factor: city composites weigh population / K.
    #[arg(long, default_value_t = DEFAULT_POPULATION_FACTOR)]
    k: f64,
    #[arg(long, default_value_t = 0)]
    workers: usize,
    #[arg(long)]
    dump_models: Option<PathBuf>,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    pred: PathBuf,
    #[arg(long)]
    gold: PathBuf,
    /// Compare lowercased city names instead of ids.
    #[arg(long)]
    by_name: bool,
    /// Write the full report here as JSON.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum SynthCmd {
    /// Write seeded synthetic pages, gold and annotations.
    Generate(SynthGenerate),
}

#[derive(Args)]
struct SynthGenerate {
    #[arg(long)]
    seed: u64,
    #[arg(short = 'n', long)]
    n_pages: usize,
    #[arg(long)]
    gazetteer: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
}

fn gazetteer_build(a: GazetteerBuild) -> Result<()> {
    let files = GeonamesFiles {
        cities: a.cities,
        admin1: a.admin1,
        countries: a.countries,
        alternates: a.alternates,
    };
    let opts = IngestOptions {
        include_alternates: !a.no_alternates,
        min_city_population: a.min_population,
    };
    let gaz = ingest(&files, &opts)?;
    save_cache(&gaz, &a.output)?;
    eprintln!("{} records, {} warnings -> {}", gaz.len(), gaz.warnings(), a.output.display());
    Ok(())
}

fn embed_train(a: EmbedTrain) -> Result<()> {
    let pages = read_pages(&a.corpus)?;
    let cfg = EmbeddingConfig {
        dim: a.dim,
        window: a.window,
        seed: a.seed,
        nonzeros: a.nonzeros,
    };
    let wfv = train_wfv(embedding_corpus(&pages, &ExtractorConfig::default()), &cfg)?;
    wfv.save(&a.output)?;
    eprintln!("{} words x {} dims -> {}", wfv.len(), wfv.dim(), a.output.display());
    Ok(())
}

fn classifier_train(a: ClassifierTrain) -> Result<()> {
    let annotations: Vec<Annotation> = read_jsonl(&a.annotations)?;
    let wfv = WordVectorTable::load(&a.wfv)?;
    let mut pages = HashMap::new();
    if let Some(dir) = &a.corpus {
        for p in read_pages(dir)? {
            pages.insert(p.page_id.clone(), preprocess_page(&p.page_id, &p.html));
        }
    }
    let cfg = ForestConfig {
        n_trees: a.trees,
        max_depth: a.max_depth,
        seed: a.seed,
        ..Default::default()
    };
    let clf = train_classifier(&annotations, &pages, &wfv, &cfg)?;
    clf.save(&a.output)?;
    eprintln!("{} trees on {} occurrences -> {}", clf.n_trees(), annotations.len(), a.output.display());
    Ok(())
}

fn tag(a: TagArgs) -> Result<()> {
    let gaz = load_cache(&a.gazetteer)?;
    let wfv = WordVectorTable::load(&a.wfv)?;
    let clf = ContextClassifier::load(&a.clf)?;
    if wfv.dim() != clf.dim() {
        bail!("word vectors have {} dimensions but the classifier expects {}", wfv.dim(), clf.dim());
    }
    let pages = read_pages(&a.input)?;
    let mode = match a.mode {
        Mode::Ilp => TaggerMode::Ilp,
        Mode::TopRanked => TaggerMode::TopRanked,
        Mode::Random => TaggerMode::Random(a.seed),
    };
    let cfg = TaggerConfig {
        model: ModelConfig {
            population_factor: a.k,
            ..Default::default()
        },
        ..Default::default()
    };
    cfg.model.validate()?;
    let opts = BatchOptions {
        workers: a.workers,
        dump_models: a.dump_models,
    };
    let scorer = ContextModel { wfv: &wfv, classifier: &clf };
    let records = tag_batch(&pages, &gaz, &scorer, mode, &cfg, &opts)?;
    write_jsonl(&a.output, &records)?;
    let failed = records.iter().filter(|r| r.error.is_some()).count();
    eprintln!("{} pages tagged, {failed} failed -> {}", records.len(), a.output.display());
    Ok(())
}

fn run_evaluate(a: EvaluateArgs) -> Result<()> {
    let preds: Vec<TagRecord> = read_jsonl(&a.pred)?;
    let gold: Vec<GoldRecord> = read_jsonl(&a.gold)?;
    let report = evaluate(&preds, &gold, a.by_name)?;
    println!(
        "precision {:.6} recall {:.6} f1 {:.6} ({} correct, {} predicted, {} gold)",
        report.precision, report.recall, report.f1, report.correct, report.predicted, report.gold
    );
    if let Some(path) = &a.output {
        write_json(path, &report)?;
    }
    Ok(())
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut json = serde_json::to_string_pretty(value)?;
    json.push('\n');
    fs::write(path, json).with_context(|| format!("writing {}", path.display()))
}

fn synth(a: SynthGenerate) -> Result<()> {
    let gaz = load_cache(&a.gazetteer)?;
    let cfg = SynthConfig {
        seed: a.seed,
        n_pages: a.n_pages,
        ..Default::default()
    };
    let corpus = synth_generate(&cfg, &gaz)?;
    write_corpus(&corpus, &a.output)?;
    eprintln!(
        "{} pages, {} annotations -> {}",
        corpus.pages.len(),
        corpus.annotations.len(),
        a.output.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gazetteer(GazetteerCmd::Build(a)) => gazetteer_build(a),
        Command::Embed(EmbedCmd::Train(a)) => embed_train(a),
        Command::Classifier(ClassifierCmd::Train(a)) => classifier_train(a),
        Command::Tag(a) => tag(a),
        Command::Evaluate(a) => run_evaluate(a),
        Command::Synth(SynthCmd::Generate(a)) => synth(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
