//! Exact 0-1 solver: depth-first branch and bound with constraint
//! propagation.

use serde::{Deserialize, Serialize};

use crate::ilpmodel::{IlpModel, LinearConstraint, Sense};
use crate::{Error, Result};

const EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub node_budget: u64,
    pub variable_cap: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            node_budget: 1_000_000,
            variable_cap: 10_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    /// The node budget ran out; the assignment is the best one found.
    BudgetExceeded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    pub values: Vec<u8>,
    pub objective: f64,
    pub status: SolveStatus,
    pub nodes: u64,
}

impl Assignment {
    pub fn chosen(&self) -> impl Iterator<Item = usize> + '_ {
        self.values.iter().enumerate().filter(|(_, &x)| x == 1).map(|(j, _)| j)
    }
}

/// Whether `values` satisfies every constraint.
pub fn check_feasible(constraints: &[LinearConstraint], values: &[u8]) -> bool {
    constraints.iter().all(|c| c.holds(values))
}

pub fn solve(model: &IlpModel, cfg: &SolverConfig) -> Result<Assignment> {
    solve_program(&model.objective(), &model.constraints, cfg)
}

/// Maximise `objective · x` over binary `x` subject to `constraints`.
pub fn solve_program(objective: &[f64], constraints: &[LinearConstraint], cfg: &SolverConfig) -> Result<Assignment> {
    let n = objective.len();
    if n > cfg.variable_cap {
        return Err(Error::ModelTooLarge {
            vars: n,
            cap: cfg.variable_cap,
        });
    }
    if let Some(c) = constraints.iter().find(|c| c.terms.iter().any(|&(j, _)| j >= n)) {
        return Err(Error::InvalidInput(format!("constraint {} refers to a variable outside the model", c.tag)));
    }
    let mut search = Search::new(objective, constraints, cfg.node_budget);
    if search.propagate_all() {
        search.branch();
    }
    let status = if search.exhausted {
        SolveStatus::BudgetExceeded
    } else {
        SolveStatus::Optimal
    };
    let values = match search.best.take() {
        Some(v) => v,
        None => {
            let zeros = vec![0u8; n];
            if search.exhausted && check_feasible(constraints, &zeros) {
                zeros
            } else {
                return Err(Error::Infeasible);
            }
        }
    };
    let objective_value = objective.iter().zip(&values).map(|(c, &x)| c * x as f64).sum();
    Ok(Assignment {
        values,
        objective: objective_value,
        status,
        nodes: search.nodes,
    })
}

const FREE: u8 = 2;

struct Row {
    terms: Vec<(usize, f64)>,
    bound: f64,
}

struct Search<'a> {
    objective: &'a [f64],
    rows: Vec<Row>,
    /// `(row, coefficient)` per variable.
    occurs: Vec<Vec<(usize, f64)>>,
    order: Vec<usize>,
    value: Vec<u8>,
    /// Smallest attainable left-hand side of each row.
    min_lhs: Vec<f64>,
    current: f64,
    /// Sum of positive objective coefficients over free variables.
    free_gain: f64,
    trail: Vec<usize>,
    best: Option<Vec<u8>>,
    best_value: f64,
    nodes: u64,
    budget: u64,
    exhausted: bool,
}

impl<'a> Search<'a> {
    fn new(objective: &'a [f64], constraints: &[LinearConstraint], budget: u64) -> Self {
        let n = objective.len();
        let mut rows = Vec::new();
        for c in constraints {
            rows.push(Row {
                terms: c.terms.clone(),
                bound: c.bound,
            });
            if c.sense == Sense::Eq {
                rows.push(Row {
                    terms: c.terms.iter().map(|&(j, a)| (j, -a)).collect(),
                    bound: -c.bound,
                });
            }
        }
        let mut occurs = vec![Vec::new(); n];
        for (r, row) in rows.iter().enumerate() {
            for &(j, a) in &row.terms {
                occurs[j].push((r, a));
            }
        }
        let min_lhs = rows
            .iter()
            .map(|row| row.terms.iter().map(|&(_, a)| a.min(0.0)).sum())
            .collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| objective[b].total_cmp(&objective[a]).then(a.cmp(&b)));
        Search {
            objective,
            rows,
            occurs,
            order,
            value: vec![FREE; n],
            min_lhs,
            current: 0.0,
            free_gain: objective.iter().map(|c| c.max(0.0)).sum(),
            trail: Vec::new(),
            best: None,
            best_value: f64::NEG_INFINITY,
            nodes: 0,
            budget,
            exhausted: false,
        }
    }

    fn assign(&mut self, j: usize, x: u8) {
        self.value[j] = x;
        self.trail.push(j);
        let c = self.objective[j];
        self.free_gain -= c.max(0.0);
        if x == 1 {
            self.current += c;
        }
        for &(r, a) in &self.occurs[j] {
            // A free variable contributes min(a, 0) to the row minimum.
            self.min_lhs[r] += a * x as f64 - a.min(0.0);
        }
    }

    fn undo_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let j = self.trail.pop().expect("non-empty trail");
            let x = self.value[j];
            let c = self.objective[j];
            self.free_gain += c.max(0.0);
            if x == 1 {
                self.current -= c;
            }
            for &(r, a) in &self.occurs[j] {
                self.min_lhs[r] -= a * x as f64 - a.min(0.0);
            }
            self.value[j] = FREE;
        }
    }

    /// Fix every variable forced by a row until nothing changes. Returns
    /// false on a violated row.
    fn propagate(&mut self, mut queue: Vec<usize>) -> bool {
        while let Some(r) = queue.pop() {
            let slack = self.rows[r].bound - self.min_lhs[r];
            if slack < -EPS {
                return false;
            }
            let mut forced = Vec::new();
            for &(j, a) in &self.rows[r].terms {
                if self.value[j] != FREE {
                    continue;
                }
                if a > 0.0 && a > slack + EPS {
                    forced.push((j, 0));
                } else if a < 0.0 && -a > slack + EPS {
                    forced.push((j, 1));
                }
            }
            for (j, x) in forced {
                if self.value[j] != FREE {
                    continue;
                }
                self.assign(j, x);
                queue.extend(self.occurs[j].iter().map(|&(r2, _)| r2));
            }
        }
        true
    }

    fn propagate_all(&mut self) -> bool {
        self.propagate((0..self.rows.len()).collect())
    }

    fn try_value(&mut self, j: usize, x: u8) {
        let mark = self.trail.len();
        self.assign(j, x);
        let queue = self.occurs[j].iter().map(|&(r, _)| r).collect();
        if self.propagate(queue) {
            self.branch();
        }
        self.undo_to(mark);
    }

    fn branch(&mut self) {
        if self.exhausted {
            return;
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            self.exhausted = true;
            return;
        }
        if self.best.is_some() && self.current + self.free_gain <= self.best_value + 1e-12 {
            return;
        }
        let Some(&j) = self.order.iter().find(|&&j| self.value[j] == FREE) else {
            if self.current > self.best_value + 1e-12 || self.best.is_none() {
                self.best_value = self.current;
                self.best = Some(self.value.clone());
            }
            return;
        };
        self.try_value(j, 1);
        self.try_value(j, 0);
    }
}
