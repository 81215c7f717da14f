//! Instance families.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::instance::{Instance, Item, StateDistribution};
use crate::rational::Rational;
use crate::subset::ElementSubset;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoverageMode {
    Perfect,
    Imperfect,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenParams {
    pub n_items: usize,
    pub n_elements: usize,
    pub max_support: usize,
    pub cost_lo: Rational,
    pub cost_hi: Rational,
    pub coverage_mode: CoverageMode,
    /// Upper bound on probability denominators.
    pub prob_granularity: usize,
    pub seed: u64,
}

impl GenParams {
    /// Small instances suitable for the exact oracles.
    pub fn small(n_items: usize, n_elements: usize, coverage_mode: CoverageMode, seed: u64) -> Self {
        GenParams {
            n_items,
            n_elements,
            max_support: 3,
            cost_lo: Rational::new(1, 2),
            cost_hi: Rational::from_integer(3),
            coverage_mode,
            prob_granularity: 4,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GenError {
    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),
    #[error("element {0} is in no set")]
    UncoveredElement(usize),
    #[error("{sets} sets but {costs} costs")]
    LengthMismatch { sets: usize, costs: usize },
    #[error("set {set} has element {element} outside ground size {ground_size}")]
    OutOfRange { set: usize, element: usize, ground_size: usize },
}

/// Splits `d` into `k` positive integer parts, uniformly over compositions.
fn composition<R: Rng>(rng: &mut R, d: usize, k: usize) -> Vec<usize> {
    let mut cuts: Vec<usize> = sample(rng, d - 1, k - 1).into_iter().map(|c| c + 1).collect();
    cuts.sort_unstable();
    let mut parts = Vec::with_capacity(k);
    let mut prev = 0;
    for c in cuts.into_iter().chain(std::iter::once(d)) {
        parts.push(c - prev);
        prev = c;
    }
    parts
}

/// Seeded random instance.
///
/// Each item draws a support size `k ≤ max_support`, a denominator
/// `k ≤ d ≤ granularity` and a random composition of `d` into `k` parts as
/// its probabilities. States include each element independently with
/// probability one half. In perfect mode every element gets a guarantor
/// item that has the element in all of its states. States that coincide are
/// merged.
pub fn random_instance(p: &GenParams) -> Result<Instance, GenError> {
    if p.max_support == 0 || p.prob_granularity == 0 {
        return Err(GenError::InvalidParams("max_support and granularity must be at least 1".into()));
    }
    if !p.cost_lo.is_positive() || p.cost_hi < p.cost_lo {
        return Err(GenError::InvalidParams("cost range must satisfy 0 < lo ≤ hi".into()));
    }
    if p.coverage_mode == CoverageMode::Perfect && p.n_items == 0 && p.n_elements > 0 {
        return Err(GenError::InvalidParams("perfect coverage needs at least one item".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut forced = vec![ElementSubset::empty(); p.n_items];
    if p.coverage_mode == CoverageMode::Perfect {
        for e in 0..p.n_elements {
            forced[rng.gen_range(0..p.n_items)].insert(e);
        }
    }
    let g = p.prob_granularity;
    let items = (0..p.n_items)
        .map(|id| {
            let k = rng.gen_range(1..=p.max_support).min(g);
            let d = rng.gen_range(k..=g);
            let parts = composition(&mut rng, d, k);
            let entries: Vec<_> = parts
                .into_iter()
                .map(|part| {
                    let mut state: ElementSubset =
                        (0..p.n_elements).filter(|_| rng.gen_bool(0.5)).collect();
                    state.union_with(&forced[id]);
                    (state, Rational::new(part as i64, d as i64))
                })
                .collect();
            let j = rng.gen_range(0..=g);
            let cost = &p.cost_lo + (&p.cost_hi - &p.cost_lo) * Rational::new(j as i64, g as i64);
            Item { id, cost, dist: StateDistribution::merged(entries) }
        })
        .collect();
    Ok(Instance { ground_size: p.n_elements, items })
}

/// Deterministic set cover as point-mass items.
pub fn point_mass_embedding(
    ground_size: usize,
    sets: &[ElementSubset],
    costs: &[Rational],
    require_cover: bool,
) -> Result<Instance, GenError> {
    if sets.len() != costs.len() {
        return Err(GenError::LengthMismatch { sets: sets.len(), costs: costs.len() });
    }
    let mut union = ElementSubset::empty();
    for (i, s) in sets.iter().enumerate() {
        if let Some(m) = s.max_element().filter(|&m| m >= ground_size) {
            return Err(GenError::OutOfRange { set: i, element: m, ground_size });
        }
        union.union_with(s);
    }
    if require_cover {
        if let Some(e) = (0..ground_size).find(|&e| !union.contains(e)) {
            return Err(GenError::UncoveredElement(e));
        }
    }
    let items = sets
        .iter()
        .zip(costs)
        .enumerate()
        .map(|(id, (s, c))| Item { id, cost: c.clone(), dist: StateDistribution::point_mass(s.clone()) })
        .collect();
    Ok(Instance { ground_size, items })
}

/// Singletons `{e_i}` of cost `1/i` (items `0..n`, element `i-1`) plus one
/// item covering everything at cost `1 + epsilon` (item `n`).
pub fn tight_instance(n: usize, epsilon: &Rational) -> Instance {
    let mut sets: Vec<ElementSubset> = (0..n).map(|i| ElementSubset::from_elements([i])).collect();
    let mut costs: Vec<Rational> = (1..=n).map(|i| Rational::new(1, i as i64)).collect();
    sets.push(ElementSubset::full(n));
    costs.push(Rational::one() + epsilon);
    point_mass_embedding(n, &sets, &costs, true).expect("tight family is a valid cover")
}
