//! Per-page 0-1 integer linear program: token-semantic-type (TST) variables,
//! composite containment variables, objective weights and constraints.

mod export;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::candidates::CandidateSet;
use crate::context::ContextProbabilities;
use crate::gazetteer::{EntityType, Gazetteer, GazetteerRecord, GeonameId};
use crate::textprep::{tokenize, Channel};
use crate::{Error, Result};

pub use export::{to_debug_text, to_lp};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Relation {
    CityInState,
    CityInCountry,
    StateInCountry,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Origin {
    Extracted,
    RelationallyIntroduced,
}

/// Identity of a variable. The derived order is the model's variable order:
/// simple variables by `(semantic_type, surface)`, then composites by
/// `(relation, child, parent)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TstKind {
    Simple {
        semantic_type: EntityType,
        surface: String,
    },
    /// `anchor` is the surface of the simple variable owning the child side;
    /// two surfaces naming the same record get separate composites.
    Composite {
        relation: Relation,
        child: GeonameId,
        parent: GeonameId,
        anchor: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TstVariable {
    pub kind: TstKind,
    pub weight: f64,
    pub origin: Origin,
    /// Gazetteer records a simple variable stands for; the child record for a
    /// composite.
    pub records: BTreeSet<GeonameId>,
}

impl TstVariable {
    pub fn is_simple(&self) -> bool {
        matches!(self.kind, TstKind::Simple { .. })
    }

    pub fn simple_key(&self) -> Option<(EntityType, &str)> {
        match &self.kind {
            TstKind::Simple { semantic_type, surface } => Some((*semantic_type, surface.as_str())),
            TstKind::Composite { .. } => None,
        }
    }

    /// Human-readable label, e.g. `los angeles - City` or
    /// `Los Angeles[5368361] in California[5332921] (CityInState)`.
    pub fn describe(&self, gaz: &Gazetteer) -> String {
        match &self.kind {
            TstKind::Simple { semantic_type, surface } => format!("{surface} - {semantic_type}"),
            TstKind::Composite { relation, child, parent, .. } => {
                let name = |id: &GeonameId| gaz.get(*id).map_or("?", |r| r.canonical_name.as_str()).to_owned();
                format!("{}[{child}] in {}[{parent}] ({relation:?})", name(child), name(parent))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    LessEq,
    Eq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ConstraintFamily {
    /// One extracted surface is correct for at most one semantic type.
    TypeExclusivity,
    /// At most `max_per_type` simple variables per type.
    TypeCardinality,
    /// Composites with country `j` only when country `j` is chosen.
    CityCountryFeasibility,
    CityStateFeasibility,
    /// A chosen city has exactly one country (state) composite.
    CityCountryPairing,
    CityStatePairing,
    StateCountryFeasibility,
    StateCountryPairing,
    /// The city-state and city-country composites of one city record are
    /// chosen together.
    RecordLinkage,
}

impl fmt::Display for ConstraintFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConstraintFamily::TypeExclusivity => "type_exclusivity",
            ConstraintFamily::TypeCardinality => "type_cardinality",
            ConstraintFamily::CityCountryFeasibility => "city_country_feasibility",
            ConstraintFamily::CityStateFeasibility => "city_state_feasibility",
            ConstraintFamily::CityCountryPairing => "city_country_pairing",
            ConstraintFamily::CityStatePairing => "city_state_pairing",
            ConstraintFamily::StateCountryFeasibility => "state_country_feasibility",
            ConstraintFamily::StateCountryPairing => "state_country_pairing",
            ConstraintFamily::RecordLinkage => "record_linkage",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearConstraint {
    /// `(variable index, coefficient)`, sorted by index.
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub bound: f64,
    pub tag: ConstraintFamily,
    /// What the constraint is about, e.g. a surface or a geonames id.
    pub subject: String,
}

impl LinearConstraint {
    fn new(tag: ConstraintFamily, subject: impl Into<String>, mut terms: Vec<(usize, f64)>, sense: Sense, bound: f64) -> Self {
        terms.sort_by_key(|t| t.0);
        LinearConstraint {
            terms,
            sense,
            bound,
            tag,
            subject: subject.into(),
        }
    }

    pub fn lhs(&self, values: &[u8]) -> f64 {
        self.terms.iter().map(|&(j, a)| a * values[j] as f64).sum()
    }

    pub fn holds(&self, values: &[u8]) -> bool {
        let lhs = self.lhs(values);
        match self.sense {
            Sense::LessEq => lhs <= self.bound + 1e-9,
            Sense::Eq => (lhs - self.bound).abs() <= 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IlpModel {
    pub page_id: String,
    pub variables: Vec<TstVariable>,
    pub constraints: Vec<LinearConstraint>,
}

impl IlpModel {
    pub fn objective(&self) -> Vec<f64> {
        self.variables.iter().map(|v| v.weight).collect()
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn index_of(&self, kind: &TstKind) -> Option<usize> {
        self.variables.iter().position(|v| &v.kind == kind)
    }

    pub fn simple_index(&self, surface: &str, ty: EntityType) -> Option<usize> {
        self.index_of(&TstKind::Simple {
            semantic_type: ty,
            surface: surface.to_owned(),
        })
    }

    pub fn objective_value(&self, values: &[u8]) -> f64 {
        self.variables.iter().zip(values).map(|(v, &x)| v.weight * x as f64).sum()
    }
}

/// Objective factor for the channel a simple candidate came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceWeights {
    pub title: f64,
    pub body_strict: f64,
    pub body_relaxed: f64,
}

impl Default for SourceWeights {
    fn default() -> Self {
        SourceWeights {
            title: 1.0,
            body_strict: 0.5,
            body_relaxed: 0.4,
        }
    }
}

impl SourceWeights {
    pub fn of(&self, channel: Channel) -> f64 {
        match channel {
            Channel::Title => self.title,
            Channel::BodyStrict => self.body_strict,
            Channel::BodyRelaxed => self.body_relaxed,
        }
    }
}

/// Default population factor.
pub const DEFAULT_POPULATION_FACTOR: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    /// Population factor `K`: a city-state or city-country composite weighs
    /// `population / K`.
    pub population_factor: f64,
    pub source_weights: SourceWeights,
    /// Right-hand side of the per-type cardinality constraints.
    pub max_per_type: u32,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            population_factor: DEFAULT_POPULATION_FACTOR,
            source_weights: SourceWeights::default(),
            max_per_type: 1,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.population_factor.is_finite() || self.population_factor <= 0.0 {
            return Err(Error::Config(format!("population factor K must be positive, got {}", self.population_factor)));
        }
        Ok(())
    }
}

fn surface_of(rec: &GazetteerRecord) -> String {
    tokenize(&rec.canonical_name).join(" ")
}

struct VarBuilder<'a> {
    gaz: &'a Gazetteer,
    simples: BTreeMap<(EntityType, String), (Origin, BTreeSet<GeonameId>)>,
    /// Extracted simple surfaces standing for each record.
    by_record: BTreeMap<GeonameId, Vec<String>>,
    composites: BTreeSet<(Relation, GeonameId, GeonameId, String)>,
}

impl VarBuilder<'_> {
    /// Surfaces of the simple variables standing for `rec`, introducing one
    /// named after the record when no extracted candidate covers it.
    fn simples_for(&mut self, rec: &GazetteerRecord) -> Vec<String> {
        if let Some(surfaces) = self.by_record.get(&rec.geonames_id) {
            return surfaces.clone();
        }
        let surface = surface_of(rec);
        let entry = self
            .simples
            .entry((rec.entity_type, surface.clone()))
            .or_insert_with(|| (Origin::RelationallyIntroduced, BTreeSet::new()));
        entry.1.insert(rec.geonames_id);
        vec![surface]
    }

    fn state_links(&mut self, state: &GazetteerRecord, anchors: &[String]) {
        let Some(country) = self.gaz.country_of_state(state) else {
            return;
        };
        for anchor in anchors {
            self.composites
                .insert((Relation::StateInCountry, state.geonames_id, country.geonames_id, anchor.clone()));
        }
        self.simples_for(country);
    }
}

/// Create the simple and composite variables of a page with zero weights.
///
/// Every candidate yields one simple variable. Each gazetteer city record a
/// city candidate names adds a city-state composite (when its state is known)
/// and a city-country composite; states reached this way, and state
/// candidates, add state-country composites. Parents not mentioned on the
/// page enter as relationally introduced simple variables.
pub fn build_variables(cands: &CandidateSet, gaz: &Gazetteer) -> Vec<TstVariable> {
    let mut b = VarBuilder {
        gaz,
        simples: BTreeMap::new(),
        by_record: BTreeMap::new(),
        composites: BTreeSet::new(),
    };
    for c in cands.iter() {
        let ids: BTreeSet<GeonameId> = c
            .matched_ids
            .iter()
            .copied()
            .filter(|id| gaz.get(*id).is_some_and(|r| r.entity_type == c.semantic_type))
            .collect();
        for id in &ids {
            b.by_record.entry(*id).or_default().push(c.surface.clone());
        }
        b.simples.insert((c.semantic_type, c.surface.clone()), (Origin::Extracted, ids));
    }

    for c in cands.cities.values() {
        for id in &b.simples[&(EntityType::City, c.surface.clone())].1.clone() {
            let city = gaz.get(*id).expect("filtered above");
            if let Some(state) = city.parent_state_id.and_then(|s| gaz.get(s)) {
                b.composites
                    .insert((Relation::CityInState, *id, state.geonames_id, c.surface.clone()));
                let anchors = b.simples_for(state);
                b.state_links(state, &anchors);
            }
            if let Some(country) = city.parent_country_id.and_then(|s| gaz.get(s)) {
                b.composites
                    .insert((Relation::CityInCountry, *id, country.geonames_id, c.surface.clone()));
                b.simples_for(country);
            }
        }
    }
    for c in cands.states.values() {
        for id in &b.simples[&(EntityType::State, c.surface.clone())].1.clone() {
            let state = gaz.get(*id).expect("filtered above");
            b.state_links(state, std::slice::from_ref(&c.surface));
        }
    }

    let simples = b.simples.into_iter().map(|((semantic_type, surface), (origin, records))| TstVariable {
        kind: TstKind::Simple { semantic_type, surface },
        weight: 0.0,
        origin,
        records,
    });
    let composites = b.composites.into_iter().map(|(relation, child, parent, anchor)| TstVariable {
        kind: TstKind::Composite {
            relation,
            child,
            parent,
            anchor,
        },
        weight: 0.0,
        origin: Origin::RelationallyIntroduced,
        records: [child].into(),
    });
    let mut vars: Vec<TstVariable> = simples.chain(composites).collect();
    vars.sort_by(|a, b| a.kind.cmp(&b.kind));
    vars
}

/// Weight of a simple variable: the mean of its best source-channel weight
/// and its context probability; zero for introduced variables.
pub fn weigh_simple(var: &TstVariable, cands: &CandidateSet, probs: &ContextProbabilities, weights: &SourceWeights) -> f64 {
    let Some((ty, surface)) = var.simple_key() else {
        return 0.0;
    };
    if var.origin == Origin::RelationallyIntroduced {
        return 0.0;
    }
    let Some(cand) = cands.get(surface, ty) else {
        return 0.0;
    };
    let source = cand
        .occurrences
        .iter()
        .map(|o| weights.of(o.channel))
        .fold(0.0, f64::max);
    let context = probs.get(&(surface.to_owned(), ty)).copied().unwrap_or(0.0).clamp(0.0, 1.0);
    (source + context) / 2.0
}

/// `population / k`.
pub fn population_weight(population: u64, k: f64) -> Result<f64> {
    if k.is_nan() || k <= 0.0 {
        return Err(Error::Config(format!("population factor K must be positive, got {k}")));
    }
    Ok(population as f64 / k)
}

/// City-state and city-country composites weigh the city's population over
/// `k`; state-country composites weigh zero.
pub fn weigh_composite(var: &TstVariable, gaz: &Gazetteer, k: f64) -> Result<f64> {
    match &var.kind {
        TstKind::Composite {
            relation: Relation::CityInState | Relation::CityInCountry,
            child,
            ..
        } => population_weight(gaz.get(*child).map_or(0, |r| r.population), k),
        TstKind::Composite { .. } => {
            population_weight(0, k)?;
            Ok(0.0)
        }
        TstKind::Simple { .. } => Ok(0.0),
    }
}

/// Emit every constraint family over `vars`. All families are satisfied by
/// the all-zero assignment.
pub fn build_constraints(vars: &[TstVariable], gaz: &Gazetteer, max_per_type: u32) -> Vec<LinearConstraint> {
    use ConstraintFamily::*;
    let mut out = Vec::new();
    let mut simple_idx: BTreeMap<(EntityType, &str), usize> = BTreeMap::new();
    let mut record_simples: BTreeMap<GeonameId, Vec<usize>> = BTreeMap::new();
    let mut by_surface: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    let mut by_type: BTreeMap<EntityType, Vec<usize>> = BTreeMap::new();
    for (j, v) in vars.iter().enumerate() {
        if let Some((ty, surface)) = v.simple_key() {
            simple_idx.insert((ty, surface), j);
            if v.origin == Origin::Extracted {
                by_surface.entry(surface).or_default().push(j);
            }
            by_type.entry(ty).or_default().push(j);
            for id in &v.records {
                record_simples.entry(*id).or_default().push(j);
            }
        }
    }

    for (surface, idx) in &by_surface {
        if idx.len() > 1 {
            let terms = idx.iter().map(|&j| (j, 1.0)).collect();
            out.push(LinearConstraint::new(TypeExclusivity, *surface, terms, Sense::LessEq, 1.0));
        }
    }
    for (ty, idx) in &by_type {
        let terms = idx.iter().map(|&j| (j, 1.0)).collect();
        out.push(LinearConstraint::new(TypeCardinality, ty.to_string(), terms, Sense::LessEq, max_per_type as f64));
    }

    // Composite indices grouped by parent record and by anchoring simple.
    let mut by_parent: BTreeMap<(Relation, GeonameId), Vec<usize>> = BTreeMap::new();
    let mut by_anchor: BTreeMap<(Relation, usize), Vec<usize>> = BTreeMap::new();
    let mut city_country: BTreeMap<(&str, GeonameId), usize> = BTreeMap::new();
    for (j, v) in vars.iter().enumerate() {
        if let TstKind::Composite { relation, child, parent, anchor } = &v.kind {
            by_parent.entry((*relation, *parent)).or_default().push(j);
            let anchor_ty = if *relation == Relation::StateInCountry { EntityType::State } else { EntityType::City };
            if let Some(&a) = simple_idx.get(&(anchor_ty, anchor.as_str())) {
                by_anchor.entry((*relation, a)).or_default().push(j);
            }
            if *relation == Relation::CityInCountry {
                city_country.insert((anchor.as_str(), *child), j);
            }
        }
    }

    for ((relation, parent), idx) in &by_parent {
        let family = match relation {
            Relation::CityInCountry => CityCountryFeasibility,
            Relation::CityInState => CityStateFeasibility,
            Relation::StateInCountry => StateCountryFeasibility,
        };
        let mut terms: Vec<(usize, f64)> = idx.iter().map(|&j| (j, 1.0)).collect();
        terms.extend(record_simples.get(parent).into_iter().flatten().map(|&s| (s, -1.0)));
        out.push(LinearConstraint::new(family, parent.to_string(), terms, Sense::LessEq, 0.0));
    }

    for (ty, idx) in &by_type {
        for &s in idx {
            let surface = vars[s].simple_key().expect("simple").1;
            let pairing = |relation| {
                let mut terms: Vec<(usize, f64)> = by_anchor.get(&(relation, s)).into_iter().flatten().map(|&j| (j, 1.0)).collect();
                terms.push((s, -1.0));
                terms
            };
            match ty {
                EntityType::City => {
                    out.push(LinearConstraint::new(CityCountryPairing, surface, pairing(Relation::CityInCountry), Sense::Eq, 0.0));
                    if by_anchor.contains_key(&(Relation::CityInState, s)) {
                        out.push(LinearConstraint::new(CityStatePairing, surface, pairing(Relation::CityInState), Sense::Eq, 0.0));
                    }
                }
                EntityType::State => {
                    out.push(LinearConstraint::new(StateCountryPairing, surface, pairing(Relation::StateInCountry), Sense::Eq, 0.0));
                }
                EntityType::Country => {}
            }
        }
    }

    for (j, v) in vars.iter().enumerate() {
        if let TstKind::Composite {
            relation: Relation::CityInState,
            child,
            anchor,
            ..
        } = &v.kind
        {
            let mut terms = vec![(j, 1.0)];
            let country = gaz.get(*child).and_then(|r| r.parent_country_id);
            if let Some(&k) = country.and_then(|_| city_country.get(&(anchor.as_str(), *child))) {
                terms.push((k, -1.0));
            }
            out.push(LinearConstraint::new(RecordLinkage, format!("{anchor}#{child}"), terms, Sense::Eq, 0.0));
        }
    }
    out
}

/// Build the complete weighted model of one page.
pub fn build_model(cands: &CandidateSet, gaz: &Gazetteer, probs: &ContextProbabilities, cfg: &ModelConfig) -> Result<IlpModel> {
    cfg.validate()?;
    let mut variables = build_variables(cands, gaz);
    for v in &mut variables {
        v.weight = if v.is_simple() {
            weigh_simple(v, cands, probs, &cfg.source_weights)
        } else {
            weigh_composite(v, gaz, cfg.population_factor)?
        };
    }
    let constraints = build_constraints(&variables, gaz, cfg.max_per_type);
    Ok(IlpModel {
        page_id: cands.page_id.clone(),
        variables,
        constraints,
    })
}

#[cfg(test)]
mod tests;
