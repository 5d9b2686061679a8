use super::*;
use crate::candidates::extract_candidates;
use crate::gazetteer::tests::rec;
use crate::testutil::*;
use crate::textprep::preprocess_page;
use EntityType::*;

fn running() -> (Gazetteer, CandidateSet) {
    let gaz = running_example_gazetteer();
    let page = preprocess_page("p", RUNNING_EXAMPLE);
    let cands = extract_candidates(&page, &gaz);
    (gaz, cands)
}

fn simple_names(vars: &[TstVariable], origin: Origin) -> Vec<String> {
    vars.iter()
        .filter(|v| v.origin == origin)
        .filter_map(|v| v.simple_key().map(|(t, s)| format!("{s}-{t}")))
        .collect()
}

fn composites(vars: &[TstVariable], relation: Relation) -> Vec<(u64, u64)> {
    vars.iter()
        .filter_map(|v| match v.kind {
            TstKind::Composite { relation: r, child, parent, .. } if r == relation => Some((child.0, parent.0)),
            _ => None,
        })
        .collect()
}

#[test]
fn running_example_variables() {
    let (gaz, cands) = running();
    let vars = build_variables(&cands, &gaz);
    assert_eq!(
        simple_names(&vars, Origin::Extracted),
        ["angeles-City", "charlotte-City", "los angeles-City", "mexico-City", "the city-City", "mexico-Country"]
    );
    assert_eq!(
        simple_names(&vars, Origin::RelationallyIntroduced),
        [
            "california-State",
            "england-State",
            "north carolina-State",
            "pampanga-State",
            "texas-State",
            "philippines-Country",
            "united kingdom-Country",
            "united states-Country",
        ]
    );
    let mut cis = composites(&vars, Relation::CityInState);
    cis.sort();
    let mut expected = vec![
        (LA_CA, CALIFORNIA),
        (LA_TX, TEXAS),
        (CHARLOTTE, NORTH_CAROLINA),
        (LONDON, ENGLAND),
        (ANGELES, PAMPANGA),
    ];
    expected.sort();
    assert_eq!(cis, expected);
    let mut sic = composites(&vars, Relation::StateInCountry);
    sic.sort();
    let mut expected = vec![(CALIFORNIA, US), (TEXAS, US), (NORTH_CAROLINA, US), (ENGLAND, UK), (PAMPANGA, PH)];
    expected.sort();
    assert_eq!(sic, expected);
    let mut cic = composites(&vars, Relation::CityInCountry);
    cic.sort();
    let mut expected = vec![(LA_CA, US), (LA_TX, US), (CHARLOTTE, US), (LONDON, UK), (ANGELES, PH), (MEXICO_CITY, PH)];
    expected.sort();
    assert_eq!(cic, expected);
    assert_eq!(vars.len(), 14 + 16);
}

#[test]
fn variable_order_is_canonical() {
    let (gaz, cands) = running();
    let vars = build_variables(&cands, &gaz);
    assert!(vars.windows(2).all(|w| w[0].kind < w[1].kind));
    let first_composite = vars.iter().position(|v| !v.is_simple()).unwrap();
    assert!(vars[first_composite..].iter().all(|v| !v.is_simple()));

    let mut shuffled: Vec<_> = gaz.records().cloned().collect();
    shuffled.reverse();
    let gaz2 = Gazetteer::from_records(shuffled, 0).unwrap();
    assert_eq!(build_variables(&cands, &gaz2), vars);
}

#[test]
fn simple_weights() {
    let (_, cands) = running();
    let mut probs = ContextProbabilities::new();
    probs.insert(("los angeles".into(), City), 0.8);
    probs.insert(("charlotte".into(), City), 0.3);
    let simple = |surface: &str, ty, origin| TstVariable {
        kind: TstKind::Simple {
            semantic_type: ty,
            surface: surface.into(),
        },
        weight: 0.0,
        origin,
        records: BTreeSet::new(),
    };
    let w = SourceWeights::default();
    let la = weigh_simple(&simple("los angeles", City, Origin::Extracted), &cands, &probs, &w);
    assert!((la - 0.9).abs() < 1e-12);
    let ch = weigh_simple(&simple("charlotte", City, Origin::Extracted), &cands, &probs, &w);
    assert!((ch - 0.35).abs() < 1e-12);
    let us = weigh_simple(&simple("united states", Country, Origin::RelationallyIntroduced), &cands, &probs, &w);
    assert_eq!(us, 0.0);
    let mexico = weigh_simple(&simple("mexico", Country, Origin::Extracted), &cands, &probs, &w);
    assert!((mexico - 0.2).abs() < 1e-12);
}

#[test]
fn strict_body_outranks_relaxed_only() {
    let gaz = running_example_gazetteer();
    let body = "Charlotte is a lovely place to spend a weekend with friends, with good food, music and long walks.";
    let page = preprocess_page("p", &format!("<p>{body}</p>"));
    let cands = extract_candidates(&page, &gaz);
    let var = &build_variables(&cands, &gaz)[0];
    let w = weigh_simple(var, &cands, &ContextProbabilities::new(), &SourceWeights::default());
    assert!((w - 0.25).abs() < 1e-12);
}

#[test]
fn composite_weights() {
    let mut big = rec(1, "Big", City, 3_900_000, Some(2), Some(3));
    let small = rec(4, "Small", City, 11_000, Some(2), Some(3));
    big.admin1_code = "A".into();
    let gaz = Gazetteer::from_records(
        vec![
            big,
            small,
            rec(2, "State", State, 0, None, Some(3)),
            rec(3, "Country", Country, 0, None, None),
        ],
        0,
    )
    .unwrap();
    let comp = |relation, child: u64, parent: u64| TstVariable {
        kind: TstKind::Composite {
            relation,
            child: GeonameId(child),
            parent: GeonameId(parent),
            anchor: String::new(),
        },
        weight: 0.0,
        origin: Origin::RelationallyIntroduced,
        records: BTreeSet::new(),
    };
    let w = weigh_composite(&comp(Relation::CityInState, 1, 2), &gaz, 1e7).unwrap();
    assert!((w - 0.39).abs() < 1e-12);
    let w = weigh_composite(&comp(Relation::CityInCountry, 4, 3), &gaz, 1e7).unwrap();
    assert!((w - 0.0011).abs() < 1e-12);
    assert_eq!(weigh_composite(&comp(Relation::StateInCountry, 2, 3), &gaz, 1e7).unwrap(), 0.0);
    assert!(matches!(weigh_composite(&comp(Relation::CityInState, 1, 2), &gaz, 0.0), Err(Error::Config(_))));
    assert!(matches!(weigh_composite(&comp(Relation::StateInCountry, 2, 3), &gaz, -1.0), Err(Error::Config(_))));
    let cfg = ModelConfig {
        population_factor: 0.0,
        ..Default::default()
    };
    assert!(cfg.validate().is_err());
}

fn minimal() -> (Gazetteer, CandidateSet) {
    let gaz = Gazetteer::from_records(
        vec![
            rec(1, "Springfield", City, 100_000, Some(2), Some(3)),
            rec(2, "Illinois", State, 0, None, Some(3)),
            rec(3, "United States", Country, 0, None, None),
        ],
        0,
    )
    .unwrap();
    let page = preprocess_page("p", "<p>springfield illinois united states</p>");
    let cands = extract_candidates(&page, &gaz);
    (gaz, cands)
}

#[test]
fn minimal_constraint_families() {
    let (gaz, cands) = minimal();
    let model = build_model(&cands, &gaz, &ContextProbabilities::new(), &ModelConfig::default()).unwrap();
    assert_eq!(model.variables.len(), 6);
    assert!(model.variables.iter().all(|v| !v.is_simple() || v.origin == Origin::Extracted));
    let families: Vec<ConstraintFamily> = model.constraints.iter().map(|c| c.tag).collect();
    use ConstraintFamily::*;
    assert_eq!(
        families,
        [
            TypeCardinality,
            TypeCardinality,
            TypeCardinality,
            CityStateFeasibility,
            CityCountryFeasibility,
            StateCountryFeasibility,
            CityCountryPairing,
            CityStatePairing,
            StateCountryPairing,
            RecordLinkage,
        ]
    );
    let city = model.simple_index("springfield", City).unwrap();
    let pairing = &model.constraints[6];
    assert_eq!(pairing.sense, Sense::Eq);
    assert!(pairing.terms.contains(&(city, -1.0)));
}

#[test]
fn exclusivity_covers_shared_surfaces() {
    let (gaz, cands) = running();
    let model = build_model(&cands, &gaz, &ContextProbabilities::new(), &ModelConfig::default()).unwrap();
    let excl: Vec<&LinearConstraint> = model
        .constraints
        .iter()
        .filter(|c| c.tag == ConstraintFamily::TypeExclusivity)
        .collect();
    assert_eq!(excl.len(), 1);
    assert_eq!(excl[0].subject, "mexico");
    let expected = vec![
        (model.simple_index("mexico", City).unwrap(), 1.0),
        (model.simple_index("mexico", Country).unwrap(), 1.0),
    ];
    assert_eq!(excl[0].terms, expected);
    assert_eq!(excl[0].bound, 1.0);
}

#[test]
fn zero_assignment_is_feasible() {
    let (gaz, cands) = running();
    let model = build_model(&cands, &gaz, &ContextProbabilities::new(), &ModelConfig::default()).unwrap();
    let zeros = vec![0u8; model.len()];
    assert!(model.constraints.iter().all(|c| c.holds(&zeros)));
    for c in &model.constraints {
        assert!(c.terms.windows(2).all(|w| w[0].0 < w[1].0));
        assert!(c.terms.iter().all(|&(j, a)| j < model.len() && (a == 1.0 || a == -1.0)));
    }
}

#[test]
fn cities_without_state_skip_state_pairing() {
    let (gaz, cands) = running();
    let model = build_model(&cands, &gaz, &ContextProbabilities::new(), &ModelConfig::default()).unwrap();
    let pairing = |family| {
        model
            .constraints
            .iter()
            .filter(|c| c.tag == family)
            .map(|c| c.subject.as_str())
            .collect::<Vec<_>>()
    };
    assert_eq!(
        pairing(ConstraintFamily::CityCountryPairing),
        ["angeles", "charlotte", "los angeles", "mexico", "the city"]
    );
    assert_eq!(pairing(ConstraintFamily::CityStatePairing), ["angeles", "charlotte", "los angeles", "the city"]);
}

#[test]
fn composite_weights_in_model() {
    let (gaz, cands) = running();
    let model = build_model(&cands, &gaz, &ContextProbabilities::new(), &ModelConfig::default()).unwrap();
    for v in &model.variables {
        match &v.kind {
            TstKind::Composite {
                relation: Relation::StateInCountry,
                ..
            } => assert_eq!(v.weight, 0.0),
            TstKind::Composite { child, .. } => {
                assert_eq!(v.weight, gaz.get(*child).unwrap().population as f64 / DEFAULT_POPULATION_FACTOR)
            }
            TstKind::Simple { .. } => assert!((0.0..=1.0).contains(&v.weight)),
        }
    }
}

#[test]
fn two_surfaces_for_one_record_get_separate_composites() {
    let gaz = running_example_gazetteer();
    let page = preprocess_page("p", "<p>london and the city</p>");
    let cands = extract_candidates(&page, &gaz);
    let vars = build_variables(&cands, &gaz);
    let anchors: Vec<&str> = vars
        .iter()
        .filter_map(|v| match &v.kind {
            TstKind::Composite {
                relation: Relation::CityInCountry,
                anchor,
                ..
            } => Some(anchor.as_str()),
            _ => None,
        })
        .collect();
    assert_eq!(anchors, ["london", "the city"]);
}

#[test]
fn empty_candidates_make_empty_model() {
    let gaz = running_example_gazetteer();
    let cands = CandidateSet::default();
    let model = build_model(&cands, &gaz, &ContextProbabilities::new(), &ModelConfig::default()).unwrap();
    assert!(model.is_empty());
    assert!(model.constraints.is_empty());
    assert!(to_lp(&model).contains("obj: 0"));
}

#[test]
fn lp_export() {
    let (gaz, cands) = minimal();
    let model = build_model(&cands, &gaz, &ContextProbabilities::new(), &ModelConfig::default()).unwrap();
    let lp = to_lp(&model);
    assert!(lp.starts_with("\\ page p\nMaximize\n obj: 0.2 x0 + 0.2 x1 + 0.2 x2 + 0.001 x3"));
    assert!(lp.contains("Subject To\n c0_type_cardinality: 1 x0 <= 1\n"));
    assert!(lp.contains(" c6_city_country_pairing: - 1 x0 + 1 x4 = 0\n"));
    assert!(lp.ends_with("Binary\n x0 x1 x2 x3 x4 x5\nEnd\n"));
    let text = to_debug_text(&model, &gaz);
    assert!(text.contains("Springfield[1] in Illinois[2] (CityInState)"));
    assert_eq!(text.lines().count(), 2 + 6 + 1 + 10);
}
