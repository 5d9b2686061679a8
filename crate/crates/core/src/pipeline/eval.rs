use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::TagRecord;
use crate::selection::Place;
use crate::{Error, Result};

/// Canonical gold geotag of one page.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldRecord {
    pub page_id: String,
    pub city: Place,
    pub state: Option<Place>,
    pub country: Option<Place>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PageEvaluation {
    pub page_id: String,
    pub predicted: Option<Place>,
    pub gold: Place,
    pub correct: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub correct: usize,
    /// Gold pages with a nonempty city prediction.
    pub predicted: usize,
    pub gold: usize,
    pub per_page: Vec<PageEvaluation>,
}

/// Score city predictions against gold. A prediction is correct when its
/// city id equals the gold city id, or with `by_name` when the lowercased
/// names agree. Predictions for pages without gold are ignored.
pub fn evaluate(predictions: &[TagRecord], gold: &[GoldRecord], by_name: bool) -> Result<EvaluationReport> {
    if gold.is_empty() {
        return Err(Error::InvalidInput("gold set is empty".into()));
    }
    let mut gold_by_page = BTreeMap::new();
    for g in gold {
        if gold_by_page.insert(g.page_id.as_str(), g).is_some() {
            return Err(Error::InvalidInput(format!("duplicate gold page id {:?}", g.page_id)));
        }
    }
    let mut pred_by_page = BTreeMap::new();
    for p in predictions {
        if pred_by_page.insert(p.page_id.as_str(), p).is_some() {
            return Err(Error::InvalidInput(format!("duplicate predicted page id {:?}", p.page_id)));
        }
    }
    let mut per_page = Vec::with_capacity(gold.len());
    let (mut correct, mut predicted) = (0, 0);
    for g in gold {
        let city = pred_by_page.get(g.page_id.as_str()).and_then(|p| p.geotag.city.clone());
        let ok = city.as_ref().is_some_and(|c| {
            if by_name {
                c.name.to_lowercase() == g.city.name.to_lowercase()
            } else {
                c.geonames_id == g.city.geonames_id
            }
        });
        predicted += city.is_some() as usize;
        correct += ok as usize;
        per_page.push(PageEvaluation {
            page_id: g.page_id.clone(),
            predicted: city,
            gold: g.city.clone(),
            correct: ok,
        });
    }
    let precision = if predicted == 0 { 0.0 } else { correct as f64 / predicted as f64 };
    let recall = correct as f64 / gold.len() as f64;
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(EvaluationReport {
        precision,
        recall,
        f1,
        correct,
        predicted,
        gold: gold.len(),
        per_page,
    })
}
