//! Gazetteer span matching over the three token channels of a page.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::gazetteer::{EntityType, Gazetteer, GeonameId};
use crate::textprep::{Channel, PageText, Token};

/// Tokens taken on each side of a span.
pub const CONTEXT_WINDOW: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Occurrence {
    pub channel: Channel,
    pub start: usize,
    pub length: usize,
    /// Up to [`CONTEXT_WINDOW`] tokens before the span followed by up to as
    /// many after it, never leaving the channel.
    pub context_window: Vec<String>,
}

impl Occurrence {
    pub fn end(&self) -> usize {
        self.start + self.length
    }
}

/// Indices of the context tokens around `[start, start + length)`.
pub fn window_range(start: usize, length: usize, channel_len: usize, width: usize) -> (std::ops::Range<usize>, std::ops::Range<usize>) {
    let before = start.saturating_sub(width)..start;
    let after_start = (start + length).min(channel_len);
    let after = after_start..(after_start + width).min(channel_len);
    (before, after)
}

fn context_of(tokens: &[Token], start: usize, length: usize) -> Vec<String> {
    let (before, after) = window_range(start, length, tokens.len(), CONTEXT_WINDOW);
    tokens[before]
        .iter()
        .chain(&tokens[after])
        .map(|t| t.text.clone())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub surface: String,
    pub semantic_type: EntityType,
    pub occurrences: Vec<Occurrence>,
    pub matched_ids: BTreeSet<GeonameId>,
}

impl Candidate {
    pub fn channels(&self) -> BTreeSet<Channel> {
        self.occurrences.iter().map(|o| o.channel).collect()
    }
}

/// Candidates of one page, partitioned by semantic type and keyed by surface.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateSet {
    pub page_id: String,
    pub cities: BTreeMap<String, Candidate>,
    pub states: BTreeMap<String, Candidate>,
    pub countries: BTreeMap<String, Candidate>,
}

impl CandidateSet {
    pub fn of_type(&self, ty: EntityType) -> &BTreeMap<String, Candidate> {
        match ty {
            EntityType::City => &self.cities,
            EntityType::State => &self.states,
            EntityType::Country => &self.countries,
        }
    }

    fn of_type_mut(&mut self, ty: EntityType) -> &mut BTreeMap<String, Candidate> {
        match ty {
            EntityType::City => &mut self.cities,
            EntityType::State => &mut self.states,
            EntityType::Country => &mut self.countries,
        }
    }

    pub fn get(&self, surface: &str, ty: EntityType) -> Option<&Candidate> {
        self.of_type(ty).get(surface)
    }

    /// All candidates, ordered by `(semantic_type, surface)`.
    pub fn iter(&self) -> impl Iterator<Item = &Candidate> {
        self.cities.values().chain(self.states.values()).chain(self.countries.values())
    }

    pub fn len(&self) -> usize {
        self.cities.len() + self.states.len() + self.countries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Match every channel against the gazetteer and group the spans by
/// `(surface, semantic_type)`. Nested spans are kept.
pub fn extract_candidates(page: &PageText, gaz: &Gazetteer) -> CandidateSet {
    let mut set = CandidateSet {
        page_id: page.page_id.clone(),
        ..Default::default()
    };
    for channel in Channel::ALL {
        let tokens = page.channel(channel);
        let texts: Vec<&str> = tokens.iter().map(|t| t.text.as_str()).collect();
        for span in gaz.lookup_spans(&texts) {
            let surface = texts[span.start..span.start + span.length].join(" ");
            let mut by_type: BTreeMap<EntityType, BTreeSet<GeonameId>> = BTreeMap::new();
            for m in &span.matches {
                by_type.entry(m.entity_type).or_default().insert(m.id);
            }
            for (ty, ids) in by_type {
                let occurrence = Occurrence {
                    channel,
                    start: span.start,
                    length: span.length,
                    context_window: context_of(tokens, span.start, span.length),
                };
                let cand = set
                    .of_type_mut(ty)
                    .entry(surface.clone())
                    .or_insert_with(|| Candidate {
                        surface: surface.clone(),
                        semantic_type: ty,
                        occurrences: vec![],
                        matched_ids: BTreeSet::new(),
                    });
                cand.occurrences.push(occurrence);
                cand.matched_ids.extend(ids);
            }
        }
    }
    set
}
