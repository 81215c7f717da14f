//! The adaptive greedy policy.
//!
//! At every step the policy evaluates the remaining item with the smallest
//! unit price, `C(F) / Σ_{e uncovered} q_F(e)`, reveals its state and removes
//! the newly covered elements. Each covered element is charged the unit
//! price of the step that covered it. Only marginals, costs and the states
//! of evaluated items are ever consulted.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::instance::{marginals, Instance, ItemId, MarginalTable, Realization};
use crate::rational::Rational;
use crate::subset::ElementSubset;

/// `(A_i, B_i)`: the items not yet evaluated and the elements not yet covered
/// before the `i`-th evaluation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResidualSystem {
    pub remaining_items: BTreeSet<ItemId>,
    pub uncovered: ElementSubset,
    pub step_index: usize,
}

impl ResidualSystem {
    pub fn initial(n_items: usize, ground_size: usize) -> Self {
        ResidualSystem {
            remaining_items: (0..n_items).collect(),
            uncovered: ElementSubset::full(ground_size),
            step_index: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GreedyStep {
    pub item: ItemId,
    pub unitprice: Rational,
    #[serde(rename = "covered")]
    pub newly_covered: ElementSubset,
    pub g_cov: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GreedyTrace {
    pub steps: Vec<GreedyStep>,
    /// Indexed by element; zero for elements never covered.
    pub prices: Vec<Rational>,
    pub total_cost: Rational,
    pub evaluated: BTreeSet<ItemId>,
    pub uncovered: ElementSubset,
}

impl GreedyTrace {
    pub fn evaluated_items(&self) -> Vec<ItemId> {
        self.steps.iter().map(|s| s.item).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GreedyError {
    #[error("stuck at step {step}: elements {uncovered:?} uncovered and no remaining item can cover them")]
    StuckResidual {
        step: usize,
        uncovered: ElementSubset,
        partial: Box<GreedyTrace>,
    },
}

/// Reveals the state of an item on evaluation.
pub trait StateSource {
    fn reveal(&mut self, item: ItemId) -> ElementSubset;
}

impl<F: FnMut(ItemId) -> ElementSubset> StateSource for F {
    fn reveal(&mut self, item: ItemId) -> ElementSubset {
        self(item)
    }
}

/// `C(F) / Σ_{e ∈ B_i} q_F(e)`, or `None` when the denominator is zero.
pub fn unitprice(
    item: ItemId,
    residual: &ResidualSystem,
    q: &MarginalTable,
    costs: &[Rational],
) -> Option<Rational> {
    let mass = q.mass(item, &residual.uncovered);
    if mass.is_zero() {
        None
    } else {
        Some(&costs[item] / mass)
    }
}

/// Remaining item of minimum unit price; ties go to the smallest id.
pub fn select_next(residual: &ResidualSystem, q: &MarginalTable, costs: &[Rational]) -> Option<ItemId> {
    select_with_price(residual, q, costs).map(|(f, _)| f)
}

fn select_with_price(
    residual: &ResidualSystem,
    q: &MarginalTable,
    costs: &[Rational],
) -> Option<(ItemId, Rational)> {
    let mut best: Option<(ItemId, Rational)> = None;
    // remaining_items iterates in ascending id, so strict < keeps the smallest id on ties
    for &f in &residual.remaining_items {
        if let Some(p) = unitprice(f, residual, q, costs) {
            if best.as_ref().is_none_or(|(_, bp)| p < *bp) {
                best = Some((f, p));
            }
        }
    }
    best
}

/// The greedy policy over the information it is allowed to see.
#[derive(Clone, Debug)]
pub struct Greedy {
    ground_size: usize,
    q: MarginalTable,
    costs: Vec<Rational>,
}

impl Greedy {
    pub fn new(ground_size: usize, q: MarginalTable, costs: Vec<Rational>) -> Self {
        assert_eq!(q.n_items(), costs.len(), "one cost per marginal row");
        Greedy { ground_size, q, costs }
    }

    pub fn for_instance(inst: &Instance) -> Self {
        Greedy::new(inst.ground_size, marginals(inst), inst.costs())
    }

    pub fn marginals(&self) -> &MarginalTable {
        &self.q
    }

    pub fn costs(&self) -> &[Rational] {
        &self.costs
    }

    pub fn run<S: StateSource>(&self, source: &mut S) -> Result<GreedyTrace, GreedyError> {
        let mut residual = ResidualSystem::initial(self.costs.len(), self.ground_size);
        let mut trace = GreedyTrace {
            steps: Vec::new(),
            prices: vec![Rational::zero(); self.ground_size],
            total_cost: Rational::zero(),
            evaluated: BTreeSet::new(),
            uncovered: residual.uncovered.clone(),
        };
        while !residual.uncovered.is_empty() {
            let Some((item, price)) = select_with_price(&residual, &self.q, &self.costs) else {
                trace.uncovered = residual.uncovered.clone();
                return Err(GreedyError::StuckResidual {
                    step: residual.step_index,
                    uncovered: residual.uncovered,
                    partial: Box::new(trace),
                });
            };
            let state = source.reveal(item);
            let newly = residual.uncovered.intersection(&state);
            for e in newly.iter() {
                trace.prices[e] = price.clone();
            }
            trace.total_cost += &self.costs[item];
            trace.evaluated.insert(item);
            residual.remaining_items.remove(&item);
            residual.uncovered = residual.uncovered.difference(&newly);
            residual.step_index += 1;
            trace.steps.push(GreedyStep {
                item,
                unitprice: price,
                g_cov: newly.len(),
                newly_covered: newly,
            });
        }
        trace.uncovered = residual.uncovered;
        Ok(trace)
    }
}

/// Runs greedy on a fixed realization.
pub fn run_greedy(inst: &Instance, real: &Realization) -> Result<GreedyTrace, GreedyError> {
    Greedy::for_instance(inst).run(&mut |f: ItemId| real.states[f].clone())
}

pub fn greedy_cost(trace: &GreedyTrace) -> Rational {
    trace.total_cost.clone()
}
