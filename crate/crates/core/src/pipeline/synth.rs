use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use log::warn;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::eval::GoldRecord;
use super::io::write_jsonl;
use crate::candidates::extract_candidates;
use crate::context::{fnv1a, Annotation};
use crate::gazetteer::{EntityType, Gazetteer, GazetteerRecord};
use crate::selection::Place;
use crate::textprep::{preprocess_page, tokenize};
use crate::{Error, Result};

/// First names that double as city names.
pub const PERSON_NAMES: &[&str] = &[
    "charlotte",
    "victoria",
    "madison",
    "austin",
    "regina",
    "jackson",
    "lincoln",
    "tyler",
    "eugene",
    "elizabeth",
    "savannah",
    "sydney",
    "aurora",
    "georgia",
    "virginia",
];

pub const PERSON_NAME: &str = "person_name";
pub const ALIAS: &str = "alias";
pub const FOOTER: &str = "footer";
pub const AMBIGUOUS: &str = "ambiguous";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub seed: u64,
    pub n_pages: usize,
    /// Fraction of pages where a city name is used as a person's name.
    pub person_name_ratio: f64,
    /// Fraction of pages with an alias such as "the city".
    pub alias_ratio: f64,
    /// Fraction of pages with a footer listing populous cities.
    pub footer_ratio: f64,
    /// Fraction of pages whose gold city shares its name with a city in
    /// another state; the state is mentioned next to the city.
    pub ambiguous_ratio: f64,
    pub title_probability: f64,
    pub state_mention_probability: f64,
    pub footer_size: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 0,
            n_pages: 200,
            person_name_ratio: 0.3,
            alias_ratio: 0.2,
            footer_ratio: 0.3,
            ambiguous_ratio: 0.3,
            title_probability: 0.6,
            state_mention_probability: 0.3,
            footer_size: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthPage {
    pub page_id: String,
    pub html: String,
    pub gold: GoldRecord,
    pub categories: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config: SynthConfig,
    pub counts: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthCorpus {
    pub pages: Vec<SynthPage>,
    /// Every candidate occurrence, labelled by whether its surface names the
    /// gold city, state or country.
    pub annotations: Vec<Annotation>,
    pub manifest: Manifest,
}

const TAGS: &[&str] = &["Sweet and Discreet", "Upscale Companion", "Available Tonight", "Private Listing", "VIP Service"];
const TITLES_WITH_CITY: &[&str] = &["{city} Escort - {tag}", "{tag} in {city}", "{city} Companion | {tag}", "Outcall {city} - {tag}"];
const TITLES: &[&str] = &["{tag}", "{tag} - Call Now", "Independent Listing - {tag}"];
const LOCATION: &[&str] = &[
    "I am available in {loc} for incall and outcall.",
    "Visiting {loc} this week only, book early.",
    "Located near downtown {loc}, easy parking.",
    "Now seeing gentlemen in {loc} every evening.",
];
const NAMES: &[&str] = &[
    "My name is {name} and I am {age} years old.",
    "Ask for {name} when you call.",
    "Hi, I'm {name}, fun and friendly.",
];
const ALIASES: &[&str] = &["New in {alias} and ready to have fun.", "The best companion in {alias} tonight."];
const FILLER: &[&str] = &[
    "Sweet, friendly and always discreet.",
    "Call or text anytime, no blocked numbers please.",
    "Serious gentlemen only, couples welcome.",
    "Fresh photos, real and recent.",
    "Generous gentlemen preferred, no rush.",
];

fn surface(name: &str) -> String {
    tokenize(name).join(" ")
}

fn pick<'a, T>(rng: &mut ChaCha8Rng, xs: &'a [T]) -> &'a T {
    &xs[rng.gen_range(0..xs.len())]
}

fn capitalize(s: &str) -> String {
    s.split(' ')
        .map(|w| {
            let mut c = w.chars();
            c.next().map_or(String::new(), |f| f.to_uppercase().chain(c).collect())
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn escape(s: &str) -> String {
    html_escape::encode_text(s).into_owned()
}

struct Pools<'g> {
    /// Cities with a unique name and known state and country.
    plain: Vec<&'g GazetteerRecord>,
    /// Same-name city groups across states.
    ambiguous: Vec<Vec<&'g GazetteerRecord>>,
    person_names: Vec<&'static str>,
    aliases: Vec<String>,
    /// Cities by descending population.
    populous: Vec<&'g GazetteerRecord>,
}

fn pools(gaz: &Gazetteer) -> Pools<'_> {
    let non_city: BTreeSet<String> = gaz
        .records()
        .filter(|r| r.entity_type != EntityType::City)
        .flat_map(|r| r.names().map(surface).collect::<Vec<_>>())
        .collect();
    let mut by_name: BTreeMap<String, Vec<&GazetteerRecord>> = BTreeMap::new();
    for r in gaz.records().filter(|r| r.entity_type == EntityType::City) {
        by_name.entry(surface(&r.canonical_name)).or_default().push(r);
    }
    let located = |r: &&GazetteerRecord| r.parent_state_id.is_some_and(|s| gaz.get(s).is_some()) && r.parent_country_id.is_some();
    let mut plain = Vec::new();
    let mut ambiguous = Vec::new();
    for (name, recs) in &by_name {
        if name.is_empty() || non_city.contains(name) || !recs.iter().all(located) {
            continue;
        }
        if recs.len() == 1 {
            plain.push(recs[0]);
        } else {
            let states: BTreeSet<_> = recs.iter().map(|r| r.parent_state_id).collect();
            if states.len() == recs.len() {
                ambiguous.push(recs.clone());
            }
        }
    }
    let person_names = PERSON_NAMES.iter().copied().filter(|n| by_name.contains_key(*n)).collect();
    let aliases: BTreeSet<String> = gaz
        .records()
        .filter(|r| r.entity_type == EntityType::City)
        .flat_map(|r| r.alternate_names.iter().map(|a| surface(a)))
        .filter(|a| a.starts_with("the ") && !by_name.contains_key(a))
        .collect();
    let mut populous: Vec<&GazetteerRecord> = by_name.values().flatten().copied().collect();
    populous.sort_by(|a, b| b.population.cmp(&a.population).then(a.geonames_id.cmp(&b.geonames_id)));
    Pools {
        plain,
        ambiguous,
        person_names,
        aliases: aliases.into_iter().collect(),
        populous,
    }
}

/// Seeded corpus of advert-like pages, one gold geotag each, with confounders
/// assigned to exact page counts.
pub fn synth_generate(cfg: &SynthConfig, gaz: &Gazetteer) -> Result<SynthCorpus> {
    let n = cfg.n_pages;
    if n == 0 {
        return Err(Error::InvalidInput("number of pages must be positive".into()));
    }
    let pools = pools(gaz);
    if pools.plain.is_empty() && pools.ambiguous.is_empty() {
        return Err(Error::InvalidInput("gazetteer has no city with a known state and country".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut flags: BTreeMap<&str, Vec<bool>> = BTreeMap::new();
    let categories = [
        (PERSON_NAME, cfg.person_name_ratio, !pools.person_names.is_empty()),
        (ALIAS, cfg.alias_ratio, !pools.aliases.is_empty()),
        (FOOTER, cfg.footer_ratio, !pools.populous.is_empty()),
        (AMBIGUOUS, cfg.ambiguous_ratio, !pools.ambiguous.is_empty()),
    ];
    for (name, ratio, available) in categories {
        if !(0.0..=1.0).contains(&ratio) {
            return Err(Error::Config(format!("{name} ratio {ratio} is outside [0, 1]")));
        }
        let mut count = (ratio * n as f64).round() as usize;
        if !available && count > 0 {
            warn!("gazetteer offers no material for {name} pages");
            count = 0;
        }
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(&mut rng);
        let mut f = vec![false; n];
        for &i in &idx[..count] {
            f[i] = true;
        }
        flags.insert(name, f);
    }
    if pools.plain.is_empty() {
        flags.insert(AMBIGUOUS, vec![true; n]);
    }

    let width = n.to_string().len().max(5);
    let mut pages = Vec::with_capacity(n);
    let mut annotations = Vec::new();
    #[allow(clippy::needless_range_loop)]
    for i in 0..n {
        let page_id = format!("page-{i:0width$}");
        let mut prng = ChaCha8Rng::seed_from_u64(cfg.seed ^ fnv1a(page_id.as_bytes()));
        let has = |c: &str| flags[c][i];
        let page = make_page(&page_id, &mut prng, cfg, gaz, &pools, has(PERSON_NAME), has(ALIAS), has(FOOTER), has(AMBIGUOUS));
        annotations.extend(annotate(&page, gaz));
        pages.push(page);
    }
    let counts = flags.iter().map(|(k, v)| (k.to_string(), v.iter().filter(|&&b| b).count())).collect();
    Ok(SynthCorpus {
        pages,
        annotations,
        manifest: Manifest {
            config: cfg.clone(),
            counts,
        },
    })
}

#[allow(clippy::too_many_arguments)]
fn make_page(
    page_id: &str,
    rng: &mut ChaCha8Rng,
    cfg: &SynthConfig,
    gaz: &Gazetteer,
    pools: &Pools<'_>,
    person: bool,
    alias: bool,
    footer: bool,
    ambiguous: bool,
) -> SynthPage {
    let city = if ambiguous || pools.plain.is_empty() {
        let group = pick(rng, &pools.ambiguous);
        *pick(rng, group)
    } else {
        *pick(rng, &pools.plain)
    };
    let state = city.parent_state_id.and_then(|id| gaz.get(id)).expect("pooled cities have a state");
    let country = city.parent_country_id.and_then(|id| gaz.get(id));
    let gold_surfaces: BTreeSet<String> = [Some(city), Some(state), country]
        .into_iter()
        .flatten()
        .map(|r| surface(&r.canonical_name))
        .collect();
    let mut categories = Vec::new();

    let tag = pick(rng, TAGS);
    let title = if rng.gen_bool(cfg.title_probability) {
        pick(rng, TITLES_WITH_CITY).replace("{city}", &city.canonical_name)
    } else {
        pick(rng, TITLES).to_string()
    }
    .replace("{tag}", tag);

    let loc = if ambiguous || rng.gen_bool(cfg.state_mention_probability) {
        format!("{}, {}", city.canonical_name, state.canonical_name)
    } else {
        city.canonical_name.clone()
    };
    let mut sentences = vec![pick(rng, LOCATION).replace("{loc}", &loc)];
    if person {
        let names: Vec<&str> = pools
            .person_names
            .iter()
            .copied()
            .filter(|n| !gold_surfaces.contains(*n))
            .collect();
        if !names.is_empty() {
            let name = capitalize(pick(rng, &names));
            let age = rng.gen_range(21..40).to_string();
            sentences.push(pick(rng, NAMES).replace("{name}", &name).replace("{age}", &age));
            categories.push(PERSON_NAME.to_owned());
        }
    }
    if alias {
        let a = pick(rng, &pools.aliases);
        sentences.push(pick(rng, ALIASES).replace("{alias}", a));
        categories.push(ALIAS.to_owned());
    }
    let mut filler: Vec<&str> = FILLER.to_vec();
    filler.shuffle(rng);
    sentences.extend(filler[..2].iter().map(|s| s.to_string()));
    sentences.shuffle(rng);

    let mut html = format!(
        "<html><head><title>{}</title></head><body>\n<div class=\"nav\"><a href=\"/\">Home</a> <a href=\"/ads\">Ads</a> <a href=\"/contact\">Contact</a></div>\n<div class=\"post\"><p>{}</p></div>\n",
        escape(&title),
        escape(&sentences.join(" "))
    );
    if footer {
        let gold_name = surface(&city.canonical_name);
        let mut seen = BTreeSet::new();
        let links: Vec<String> = pools
            .populous
            .iter()
            .filter(|r| surface(&r.canonical_name) != gold_name && seen.insert(surface(&r.canonical_name)))
            .take(cfg.footer_size)
            .map(|r| format!("<a href=\"/city/{}\">{}</a>", surface(&r.canonical_name).replace(' ', "-"), escape(&r.canonical_name)))
            .collect();
        html.push_str(&format!("<div class=\"footer\">Popular cities: {}</div>\n", links.join(" | ")));
        categories.push(FOOTER.to_owned());
    }
    if ambiguous {
        categories.push(AMBIGUOUS.to_owned());
    }
    html.push_str("</body></html>\n");

    SynthPage {
        page_id: page_id.to_owned(),
        html,
        gold: GoldRecord {
            page_id: page_id.to_owned(),
            city: Place::from(city),
            state: Some(Place::from(state)),
            country: country.map(Place::from),
        },
        categories,
    }
}

fn annotate(page: &SynthPage, gaz: &Gazetteer) -> Vec<Annotation> {
    let gold_surface = |p: &Option<Place>| p.as_ref().map(|p| surface(&p.name));
    let gold = [
        (EntityType::City, Some(surface(&page.gold.city.name))),
        (EntityType::State, gold_surface(&page.gold.state)),
        (EntityType::Country, gold_surface(&page.gold.country)),
    ];
    let text = preprocess_page(&page.page_id, &page.html);
    let cands = extract_candidates(&text, gaz);
    let mut out = Vec::new();
    for c in cands.iter() {
        let label = gold
            .iter()
            .any(|(ty, s)| *ty == c.semantic_type && s.as_deref() == Some(c.surface.as_str()));
        for o in &c.occurrences {
            out.push(Annotation {
                page_id: page.page_id.clone(),
                surface: c.surface.clone(),
                semantic_type: c.semantic_type,
                channel: o.channel,
                start: o.start,
                length: o.length,
                label,
                context_window: Some(o.context_window.clone()),
            });
        }
    }
    out
}

/// Write `pages/<id>.html`, `gold.jsonl`, `annotations.jsonl` and
/// `manifest.json` under `dir`.
pub fn write_corpus(corpus: &SynthCorpus, dir: &Path) -> Result<()> {
    let pages = dir.join("pages");
    fs::create_dir_all(&pages).map_err(|e| Error::io(&pages, e))?;
    for p in &corpus.pages {
        let path = pages.join(format!("{}.html", p.page_id));
        fs::write(&path, &p.html).map_err(|e| Error::io(&path, e))?;
    }
    let gold: Vec<&GoldRecord> = corpus.pages.iter().map(|p| &p.gold).collect();
    write_jsonl(&dir.join("gold.jsonl"), &gold)?;
    write_jsonl(&dir.join("annotations.jsonl"), &corpus.annotations)?;
    let path = dir.join("manifest.json");
    let mut json = serde_json::to_string_pretty(&corpus.manifest)?;
    json.push('\n');
    fs::write(&path, json).map_err(|e| Error::io(&path, e))
}
