use std::fmt::Write;

use super::{IlpModel, Origin, Sense};
use crate::gazetteer::Gazetteer;

fn term(out: &mut String, first: bool, coef: f64, var: usize) {
    let sign = if coef < 0.0 { "-" } else if first { "" } else { "+" };
    let sep = if first && sign.is_empty() { "" } else { " " };
    let _ = write!(out, " {sign}{sep}{} x{var}", coef.abs());
}

/// CPLEX LP text of the model. Variable `xj` is model index `j`.
pub fn to_lp(model: &IlpModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "\\ page {}", model.page_id.replace(['\n', '\r'], " "));
    out.push_str("Maximize\n obj:");
    if model.variables.is_empty() {
        out.push_str(" 0");
    }
    for (j, v) in model.variables.iter().enumerate() {
        term(&mut out, j == 0, v.weight, j);
    }
    out.push_str("\nSubject To\n");
    for (i, c) in model.constraints.iter().enumerate() {
        let _ = write!(out, " c{i}_{}:", c.tag);
        if c.terms.is_empty() {
            out.push_str(" 0 x0");
        }
        for (k, &(j, a)) in c.terms.iter().enumerate() {
            term(&mut out, k == 0, a, j);
        }
        let op = match c.sense {
            Sense::LessEq => "<=",
            Sense::Eq => "=",
        };
        let _ = writeln!(out, " {op} {}", c.bound);
    }
    if !model.variables.is_empty() {
        out.push_str("Binary\n");
        for j in 0..model.variables.len() {
            let _ = write!(out, " x{j}");
        }
        out.push('\n');
    }
    out.push_str("End\n");
    out
}

/// One line per variable and per constraint, for inspection.
pub fn to_debug_text(model: &IlpModel, gaz: &Gazetteer) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "page {}", model.page_id);
    let _ = writeln!(out, "variables {}", model.variables.len());
    for (j, v) in model.variables.iter().enumerate() {
        let origin = match v.origin {
            Origin::Extracted => "extracted",
            Origin::RelationallyIntroduced => "introduced",
        };
        let _ = writeln!(out, "  x{j}\t{:.6}\t{origin}\t{}", v.weight, v.describe(gaz));
    }
    let _ = writeln!(out, "constraints {}", model.constraints.len());
    for c in &model.constraints {
        let lhs: Vec<String> = c.terms.iter().map(|&(j, a)| format!("{a:+} x{j}")).collect();
        let op = match c.sense {
            Sense::LessEq => "<=",
            Sense::Eq => "=",
        };
        let _ = writeln!(out, "  {}[{}]\t{} {op} {}", c.tag, c.subject, lhs.join(" "), c.bound);
    }
    out
}
