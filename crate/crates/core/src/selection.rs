//! Turn a solved model into one geotag.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::gazetteer::{EntityType, Gazetteer, GazetteerRecord, GeonameId};
use crate::ilpmodel::{IlpModel, Relation, TstKind};
use crate::solver::Assignment;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Place {
    pub name: String,
    #[serde(rename = "id")]
    pub geonames_id: GeonameId,
}

impl From<&GazetteerRecord> for Place {
    fn from(r: &GazetteerRecord) -> Self {
        Place {
            name: r.canonical_name.clone(),
            geonames_id: r.geonames_id,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Geotag {
    pub city: Option<Place>,
    pub state: Option<Place>,
    pub country: Option<Place>,
    pub objective: f64,
    pub chosen_variables: Vec<String>,
}

impl Geotag {
    pub fn is_empty(&self) -> bool {
        self.city.is_none() && self.state.is_none() && self.country.is_none()
    }
}

/// Highest population first, then lowest id.
fn most_populous<'g>(candidates: impl Iterator<Item = &'g GazetteerRecord>) -> Option<&'g GazetteerRecord> {
    candidates.min_by(|a, b| b.population.cmp(&a.population).then(a.geonames_id.cmp(&b.geonames_id)))
}

fn single(ids: &BTreeSet<GeonameId>, what: &str) -> Result<Option<GeonameId>> {
    match ids.len() {
        0 => Ok(None),
        1 => Ok(ids.first().copied()),
        _ => Err(Error::InconsistentSolution(format!("{} {what} parents chosen", ids.len()))),
    }
}

/// Read the chosen city, state and country off `assignment`.
///
/// Parents come from the chosen composites. The city record is the most
/// populous record of the chosen city surface that lies in the chosen state
/// and country. A lone state or country resolves the same way.
pub fn select(model: &IlpModel, assignment: &Assignment, gaz: &Gazetteer) -> Result<Geotag> {
    if assignment.values.len() != model.len() {
        return Err(Error::InvalidInput(format!(
            "assignment has {} values for {} variables",
            assignment.values.len(),
            model.len()
        )));
    }
    let chosen: Vec<usize> = assignment.chosen().collect();
    let mut simples: [Vec<usize>; 3] = Default::default();
    let mut city_states = BTreeSet::new();
    let mut city_countries = BTreeSet::new();
    let mut state_countries = BTreeSet::new();
    for &j in &chosen {
        match &model.variables[j].kind {
            TstKind::Simple { semantic_type, .. } => simples[*semantic_type as usize].push(j),
            TstKind::Composite { relation, parent, .. } => {
                match relation {
                    Relation::CityInState => city_states.insert(*parent),
                    Relation::CityInCountry => city_countries.insert(*parent),
                    Relation::StateInCountry => state_countries.insert(*parent),
                };
            }
        }
    }
    let one_simple = |ty: EntityType| -> Result<Option<&BTreeSet<GeonameId>>> {
        match simples[ty as usize].as_slice() {
            [] => Ok(None),
            [j] => Ok(Some(&model.variables[*j].records)),
            many => Err(Error::InconsistentSolution(format!("{} {ty} variables chosen", many.len()))),
        }
    };
    let city_ids = one_simple(EntityType::City)?;
    let state_ids = one_simple(EntityType::State)?;
    let country_ids = one_simple(EntityType::Country)?;

    let mut country = single(&city_countries, "country")?;
    if let Some(c) = single(&state_countries, "country")? {
        if country.is_some_and(|x| x != c) {
            return Err(Error::InconsistentSolution("city and state disagree on the country".into()));
        }
        country = Some(c);
    }
    let mut state = single(&city_states, "state")?;

    let city = match city_ids {
        Some(ids) => {
            let rec = most_populous(
                ids.iter()
                    .filter_map(|id| gaz.get(*id))
                    .filter(|r| country.is_none_or(|c| r.parent_country_id == Some(c)))
                    .filter(|r| state.is_none_or(|s| r.parent_state_id == Some(s))),
            )
            .ok_or_else(|| Error::InconsistentSolution("no city record fits the chosen parents".into()))?;
            country = country.or(rec.parent_country_id);
            state = state.or(rec.parent_state_id);
            Some(rec)
        }
        None => None,
    };

    let state_rec = match (state, state_ids) {
        (Some(s), _) => gaz.get(s),
        (None, Some(ids)) => most_populous(
            ids.iter()
                .filter_map(|id| gaz.get(*id))
                .filter(|r| country.is_none_or(|c| r.parent_country_id == Some(c))),
        ),
        (None, None) => None,
    };
    if let (Some(s), Some(ids)) = (state_rec, state_ids) {
        if !ids.contains(&s.geonames_id) {
            return Err(Error::InconsistentSolution(format!("state {} is not the chosen state variable", s.geonames_id)));
        }
    }
    if state_ids.is_some() && state_rec.is_none() {
        return Err(Error::InconsistentSolution("no state record fits the chosen country".into()));
    }
    country = country.or(state_rec.and_then(|s| s.parent_country_id));

    let country_rec = match (country, country_ids) {
        (Some(c), _) => gaz.get(c),
        (None, Some(ids)) => most_populous(ids.iter().filter_map(|id| gaz.get(*id))),
        (None, None) => None,
    };
    if let (Some(c), Some(ids)) = (country_rec, country_ids) {
        if !ids.contains(&c.geonames_id) {
            return Err(Error::InconsistentSolution(format!("country {} is not the chosen country variable", c.geonames_id)));
        }
    }

    Ok(Geotag {
        city: city.map(Place::from),
        state: state_rec.map(Place::from),
        country: country_rec.map(Place::from),
        objective: assignment.objective,
        chosen_variables: chosen.iter().map(|&j| model.variables[j].describe(gaz)).collect(),
    })
}
