//! Filtered Geonames gazetteer: cities, first-level administrative divisions
//! (states) and countries, with a token trie over every indexed name and the
//! containment links used as a relational lexicon.

mod cache;
mod ingest;
mod trie;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::textprep::tokenize;

pub use cache::{load_cache, save_cache, CACHE_MAGIC};
pub use ingest::{ingest, GeonamesFiles, IngestOptions, MIN_CITY_POPULATION};
pub use trie::{SpanMatch, TokenTrie};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GeonameId(pub u64);

impl fmt::Display for GeonameId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EntityType {
    City,
    State,
    Country,
}

impl EntityType {
    pub const ALL: [EntityType; 3] = [EntityType::City, EntityType::State, EntityType::Country];
}

impl fmt::Display for EntityType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EntityType::City => "City",
            EntityType::State => "State",
            EntityType::Country => "Country",
        })
    }
}

/// A `(geonames_id, entity_type)` pair carried by accepting trie nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NameMatch {
    pub id: GeonameId,
    pub entity_type: EntityType,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GazetteerRecord {
    pub geonames_id: GeonameId,
    pub canonical_name: String,
    #[serde(default)]
    pub ascii_name: String,
    #[serde(default)]
    pub alternate_names: Vec<String>,
    pub entity_type: EntityType,
    pub population: u64,
    #[serde(default)]
    pub admin1_code: String,
    pub country_code: String,
    pub parent_state_id: Option<GeonameId>,
    pub parent_country_id: Option<GeonameId>,
}

impl GazetteerRecord {
    /// Canonical, ASCII and alternate names, deduplicated.
    pub fn names(&self) -> impl Iterator<Item = &str> {
        let mut seen = BTreeSet::new();
        std::iter::once(self.canonical_name.as_str())
            .chain(std::iter::once(self.ascii_name.as_str()))
            .chain(self.alternate_names.iter().map(String::as_str))
            .filter(move |n| !n.is_empty() && seen.insert(*n))
    }
}

/// Immutable after construction and safe to share across worker threads.
#[derive(Debug, Clone)]
pub struct Gazetteer {
    records: BTreeMap<GeonameId, GazetteerRecord>,
    name_index: BTreeMap<String, BTreeSet<NameMatch>>,
    trie: TokenTrie,
    warnings: usize,
}

impl PartialEq for Gazetteer {
    fn eq(&self, other: &Self) -> bool {
        self.records == other.records && self.name_index == other.name_index && self.warnings == other.warnings
    }
}

impl Gazetteer {
    /// Index the given records. Every name of every record is tokenized with
    /// the page tokenizer and inserted into the trie.
    pub fn from_records(records: impl IntoIterator<Item = GazetteerRecord>, warnings: usize) -> crate::Result<Self> {
        let mut by_id = BTreeMap::new();
        for rec in records {
            let id = rec.geonames_id;
            if by_id.insert(id, rec).is_some() {
                return Err(crate::Error::DuplicateId(id.0));
            }
        }
        let mut name_index: BTreeMap<String, BTreeSet<NameMatch>> = BTreeMap::new();
        let mut trie = TokenTrie::new();
        for rec in by_id.values() {
            let m = NameMatch {
                id: rec.geonames_id,
                entity_type: rec.entity_type,
            };
            for name in rec.names() {
                let tokens = tokenize(name);
                if tokens.is_empty() {
                    continue;
                }
                trie.insert(&tokens, m);
                name_index.entry(tokens.join(" ")).or_default().insert(m);
            }
        }
        Ok(Gazetteer {
            records: by_id,
            name_index,
            trie,
            warnings,
        })
    }

    pub fn get(&self, id: GeonameId) -> Option<&GazetteerRecord> {
        self.records.get(&id)
    }

    pub fn records(&self) -> impl Iterator<Item = &GazetteerRecord> {
        self.records.values()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn count(&self, entity_type: EntityType) -> usize {
        self.records.values().filter(|r| r.entity_type == entity_type).count()
    }

    /// Number of unresolvable parent codes seen during ingestion.
    pub fn warnings(&self) -> usize {
        self.warnings
    }

    pub fn name_index(&self) -> &BTreeMap<String, BTreeSet<NameMatch>> {
        &self.name_index
    }

    pub fn trie(&self) -> &TokenTrie {
        &self.trie
    }

    /// See [`TokenTrie::lookup_spans`]. Tokens must already be lowercased.
    pub fn lookup_spans<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<SpanMatch> {
        self.trie.lookup_spans(tokens)
    }

    /// Records of `entity_type` with a name equal to `name` after tokenization.
    pub fn records_named(&self, name: &str, entity_type: EntityType) -> Vec<&GazetteerRecord> {
        let key = tokenize(name).join(" ");
        self.name_index
            .get(&key)
            .into_iter()
            .flatten()
            .filter(|m| m.entity_type == entity_type)
            .filter_map(|m| self.records.get(&m.id))
            .collect()
    }

    fn parent_pairs(&self, city_name: &str, parent: impl Fn(&GazetteerRecord) -> Option<GeonameId>) -> Vec<(&GazetteerRecord, &GazetteerRecord)> {
        self.records_named(city_name, EntityType::City)
            .into_iter()
            .filter_map(|city| parent(city).and_then(|p| self.records.get(&p)).map(|p| (city, p)))
            .collect()
    }

    /// Every city record named `city_name` paired with its resolved state.
    pub fn states_of_city(&self, city_name: &str) -> Vec<(&GazetteerRecord, &GazetteerRecord)> {
        self.parent_pairs(city_name, |c| c.parent_state_id)
    }

    /// Every city record named `city_name` paired with its resolved country.
    pub fn countries_of_city(&self, city_name: &str) -> Vec<(&GazetteerRecord, &GazetteerRecord)> {
        self.parent_pairs(city_name, |c| c.parent_country_id)
    }

    pub fn country_of_state(&self, state: &GazetteerRecord) -> Option<&GazetteerRecord> {
        state.parent_country_id.and_then(|id| self.records.get(&id))
    }
}
