//! Exact ground truth on enumerable instances.
//!
//! The optimal adaptive policy is computed by an expectimin recursion over
//! `(remaining items, uncovered elements)`. That pair is a sufficient
//! statistic: item states are independent, so the states already revealed
//! say nothing about the items still unevaluated, whose posterior is their
//! prior. Greedy's expected cost, evaluation probabilities and expected
//! element prices are computed by running it on every realization and
//! weighting by the realization's probability.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::greedy::{run_greedy, GreedyError, GreedyTrace};
use crate::instance::{enumerate_realizations, is_perfect_coverage, marginals, Instance, TooLarge};
use crate::rational::Rational;
use crate::reduction::reduce_instance;
use crate::subset::ElementSubset;

pub const DEFAULT_REALIZATION_CAP: u128 = 1_000_000;
pub const DEFAULT_DP_STATE_CAP: u128 = 1 << 22;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Caps {
    pub realizations: u128,
    pub dp_states: u128,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            realizations: DEFAULT_REALIZATION_CAP,
            dp_states: DEFAULT_DP_STATE_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error(transparent)]
    TooLarge(#[from] TooLarge),
    #[error("instance does not have perfect coverage")]
    NotPerfect,
    #[error("no item can cover {uncovered:?} with items {remaining:#b} left")]
    Infeasible { remaining: u64, uncovered: ElementSubset },
    #[error(transparent)]
    Greedy(#[from] GreedyError),
}

/// `H(n) = Σ_{k=1..n} 1/k`.
pub fn harmonic(n: usize) -> Rational {
    (1..=n as i64).map(|k| Rational::new(1, k)).sum()
}

/// Information state of an adaptive policy.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PolicyState {
    pub remaining_items: u64,
    pub uncovered: ElementSubset,
}

struct Expectimin<'a> {
    inst: &'a Instance,
    masses: Vec<ElementSubset>,
    memo: HashMap<PolicyState, Rational>,
    evict: Option<ChaCha8Rng>,
}

impl Expectimin<'_> {
    fn value(&mut self, state: PolicyState) -> Result<Rational, OracleError> {
        if state.uncovered.is_empty() {
            return Ok(Rational::zero());
        }
        if let Some(v) = self.memo.get(&state) {
            return Ok(v.clone());
        }
        let mut best: Option<Rational> = None;
        for (f, item) in self.inst.items.iter().enumerate() {
            let bit = 1u64 << f;
            // zero residual mass: the item can never cover anything still needed
            if state.remaining_items & bit == 0 || self.masses[f].intersection(&state.uncovered).is_empty() {
                continue;
            }
            let mut v = item.cost.clone();
            for (s, p) in item.dist.support() {
                let next = PolicyState {
                    remaining_items: state.remaining_items & !bit,
                    uncovered: state.uncovered.difference(s),
                };
                v += p * self.value(next)?;
            }
            if best.as_ref().is_none_or(|b| v < *b) {
                best = Some(v);
            }
        }
        let Some(best) = best else {
            return Err(OracleError::Infeasible {
                remaining: state.remaining_items,
                uncovered: state.uncovered,
            });
        };
        if let Some(rng) = self.evict.as_mut() {
            if !self.memo.is_empty() && rng.gen_bool(0.5) {
                let k = rng.gen_range(0..self.memo.len());
                let key = self.memo.keys().nth(k).cloned().unwrap();
                self.memo.remove(&key);
            }
        }
        self.memo.insert(state, best.clone());
        Ok(best)
    }
}

fn dp_size(inst: &Instance) -> u128 {
    let bits = inst.items.len() + inst.ground_size;
    if bits >= 128 {
        u128::MAX
    } else {
        1u128 << bits
    }
}

fn optimal_cost_inner(inst: &Instance, cap: u128, evict: Option<u64>) -> Result<Rational, OracleError> {
    let size = dp_size(inst);
    if size > cap || inst.items.len() > 64 {
        return Err(TooLarge { what: "policy state space", size, cap }.into());
    }
    if !is_perfect_coverage(inst) {
        return Err(OracleError::NotPerfect);
    }
    let q = marginals(inst);
    let masses = q
        .rows()
        .iter()
        .map(|row| row.iter().enumerate().filter(|(_, m)| m.is_positive()).map(|(e, _)| e).collect())
        .collect();
    let mut dp = Expectimin {
        inst,
        masses,
        memo: HashMap::new(),
        evict: evict.map(ChaCha8Rng::seed_from_u64),
    };
    let all_items = if inst.items.len() == 64 {
        u64::MAX
    } else {
        (1u64 << inst.items.len()) - 1
    };
    dp.value(PolicyState {
        remaining_items: all_items,
        uncovered: ElementSubset::full(inst.ground_size),
    })
}

/// Expected cost of the optimal adaptive policy.
pub fn optimal_adaptive_cost(inst: &Instance, cap: u128) -> Result<Rational, OracleError> {
    optimal_cost_inner(inst, cap, None)
}

/// Which guarantee a report checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportKind {
    /// Greedy on a perfect-coverage instance, bound `H(|B|)`.
    Perfect,
    /// Greedy on the reduced instance, bound `H(|E|)`.
    Reduced,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OracleReport {
    pub kind: ReportKind,
    /// `|B|` for perfect instances, `|E|` for reduced ones.
    pub ground_size: usize,
    pub greedy_expected_cost: Rational,
    pub optimal_expected_cost: Rational,
    pub ratio: Option<Rational>,
    pub bound: Rational,
    pub eval_probs: Vec<Rational>,
    pub price_expectations: Vec<Rational>,
    /// `Σ_F Pr[F ∈ G] C(F)`.
    pub eval_cost_sum: Rational,
    /// `Σ_e E[price(e)]`.
    pub price_sum: Rational,
    pub identity_holds: bool,
    pub bound_holds: bool,
}

impl OracleReport {
    pub fn all_checks_hold(&self) -> bool {
        self.identity_holds && self.bound_holds
    }
}

struct Aggregate {
    expected_cost: Rational,
    eval_probs: Vec<Rational>,
    prices: Vec<Rational>,
}

impl Aggregate {
    fn new(n_items: usize, ground_size: usize) -> Self {
        Aggregate {
            expected_cost: Rational::zero(),
            eval_probs: vec![Rational::zero(); n_items],
            prices: vec![Rational::zero(); ground_size],
        }
    }

    fn add(&mut self, trace: &GreedyTrace, prob: &Rational) {
        self.expected_cost += prob * &trace.total_cost;
        for &f in &trace.evaluated {
            self.eval_probs[f] += prob;
        }
        for (acc, p) in self.prices.iter_mut().zip(&trace.prices) {
            *acc += prob * p;
        }
    }

    fn finish(self, kind: ReportKind, costs: &[Rational], optimal: Rational) -> OracleReport {
        let ground_size = self.prices.len();
        let bound = harmonic(ground_size);
        let eval_cost_sum: Rational = self.eval_probs.iter().zip(costs).map(|(p, c)| p * c).sum();
        let price_sum: Rational = self.prices.iter().sum();
        let ratio = (!optimal.is_zero()).then(|| &self.expected_cost / &optimal);
        OracleReport {
            kind,
            ground_size,
            identity_holds: eval_cost_sum == price_sum,
            bound_holds: self.expected_cost <= &bound * &optimal,
            greedy_expected_cost: self.expected_cost,
            optimal_expected_cost: optimal,
            ratio,
            bound,
            eval_probs: self.eval_probs,
            price_expectations: self.prices,
            eval_cost_sum,
            price_sum,
        }
    }
}

/// Exact greedy statistics and optimum for a perfect-coverage instance.
pub fn exact_greedy_report(inst: &Instance, caps: Caps) -> Result<OracleReport, OracleError> {
    if !is_perfect_coverage(inst) {
        return Err(OracleError::NotPerfect);
    }
    let mut agg = Aggregate::new(inst.n_items(), inst.ground_size);
    for (real, prob) in enumerate_realizations(inst, caps.realizations)? {
        agg.add(&run_greedy(inst, &real)?, &prob);
    }
    let optimal = optimal_adaptive_cost(inst, caps.dp_states)?;
    Ok(agg.finish(ReportKind::Perfect, &inst.costs(), optimal))
}

/// Exact statistics of greedy-through-reduction on any instance; the
/// optimum is taken on the reduced instance.
pub fn exact_imperfect_report(inst: &Instance, caps: Caps) -> Result<OracleReport, OracleError> {
    let reduced = reduce_instance(inst);
    let greedy = reduced.greedy();
    let mut agg = Aggregate::new(inst.n_items(), reduced.graph.len());
    for (real, prob) in enumerate_realizations(inst, caps.realizations)? {
        agg.add(&reduced.solve_with(&greedy, &real)?.trace, &prob);
    }
    let optimal = optimal_adaptive_cost(&reduced.instance, caps.dp_states)?;
    Ok(agg.finish(ReportKind::Reduced, &inst.costs(), optimal))
}
