//! Instances, state distributions, marginals and realizations.
//!
//! An instance is a ground set `0..ground_size` plus a list of items. Each
//! item has a positive cost and an explicit finite distribution over subsets
//! of the ground set (its possible states). Item states are mutually
//! independent, so the joint law of a realization is the product of the
//! per-item distributions.

use std::fmt;

use num_bigint::BigInt;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::rational::Rational;
use crate::subset::ElementSubset;

/// Dense item index `0..n_items`.
pub type ItemId = usize;

/// Finite support of `(state, probability)` pairs.
///
/// [`StateDistribution::new`] sorts the support into canonical order
/// (ascending bitset value); it does not check the other invariants, which
/// are reported by [`validate_instance`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateDistribution {
    support: Vec<(ElementSubset, Rational)>,
}

impl StateDistribution {
    pub fn new(mut support: Vec<(ElementSubset, Rational)>) -> Self {
        support.sort_by(|a, b| a.0.cmp(&b.0));
        StateDistribution { support }
    }

    pub fn point_mass(state: ElementSubset) -> Self {
        StateDistribution {
            support: vec![(state, Rational::one())],
        }
    }

    /// Builds a distribution, summing the probabilities of repeated states.
    pub fn merged<I: IntoIterator<Item = (ElementSubset, Rational)>>(entries: I) -> Self {
        let mut map = std::collections::BTreeMap::<ElementSubset, Rational>::new();
        for (s, p) in entries {
            *map.entry(s).or_insert_with(Rational::zero) += p;
        }
        StateDistribution {
            support: map.into_iter().collect(),
        }
    }

    pub fn support(&self) -> &[(ElementSubset, Rational)] {
        &self.support
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    /// `Pr[e ∈ V]`.
    pub fn marginal(&self, e: usize) -> Rational {
        self.support
            .iter()
            .filter(|(s, _)| s.contains(e))
            .map(|(_, p)| p)
            .sum()
    }

    /// Union of all support states: every element this item can ever cover.
    pub fn reach(&self) -> ElementSubset {
        let mut r = ElementSubset::empty();
        for (s, _) in &self.support {
            r.union_with(s);
        }
        r
    }

    pub fn contains_state(&self, state: &ElementSubset) -> bool {
        self.support.binary_search_by(|(s, _)| s.cmp(state)).is_ok()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Item {
    pub id: ItemId,
    pub cost: Rational,
    pub dist: StateDistribution,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    pub ground_size: usize,
    pub items: Vec<Item>,
}

impl Instance {
    /// Assigns dense ids in order and checks every invariant.
    pub fn new(
        ground_size: usize,
        items: Vec<(Rational, StateDistribution)>,
    ) -> Result<Self, ValidationReport> {
        let inst = Instance {
            ground_size,
            items: items
                .into_iter()
                .enumerate()
                .map(|(id, (cost, dist))| Item { id, cost, dist })
                .collect(),
        };
        let report = validate_instance(&inst);
        if report.is_ok() {
            Ok(inst)
        } else {
            Err(report)
        }
    }

    pub fn n_items(&self) -> usize {
        self.items.len()
    }

    pub fn costs(&self) -> Vec<Rational> {
        self.items.iter().map(|it| it.cost.clone()).collect()
    }

    /// Number of joint realizations, saturating at `u128::MAX`.
    pub fn realization_count(&self) -> u128 {
        self.items
            .iter()
            .try_fold(1u128, |acc, it| acc.checked_mul(it.dist.len() as u128))
            .unwrap_or(u128::MAX)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    ProbabilitySum { item: ItemId, sum: Rational },
    NonpositiveProbability { item: ItemId, state: ElementSubset },
    DuplicateState { item: ItemId, state: ElementSubset },
    NonCanonicalOrder { item: ItemId },
    StateOutOfRange { item: ItemId, state: ElementSubset, ground_size: usize },
    NonpositiveCost { item: ItemId, cost: Rational },
    DuplicateItemId { position: usize, id: ItemId },
    NonDenseItemId { position: usize, id: ItemId },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ProbabilitySum { item, sum } => {
                write!(f, "item {item}: probabilities sum to {sum} ≠ 1")
            }
            Violation::NonpositiveProbability { item, state } => {
                write!(f, "item {item}: nonpositive probability for state {state:?}")
            }
            Violation::DuplicateState { item, state } => {
                write!(f, "item {item}: duplicate support state {state:?}")
            }
            Violation::NonCanonicalOrder { item } => {
                write!(f, "item {item}: support is not in ascending state order")
            }
            Violation::StateOutOfRange { item, state, ground_size } => write!(
                f,
                "item {item}: state {state:?} out of range for ground size {ground_size}"
            ),
            Violation::NonpositiveCost { item, cost } => {
                write!(f, "item {item}: nonpositive cost {cost}")
            }
            Violation::DuplicateItemId { position, id } => {
                write!(f, "item at position {position}: duplicate item id {id}")
            }
            Violation::NonDenseItemId { position, id } => {
                write!(f, "item at position {position}: id {id} is not dense")
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return f.write_str("ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("\n")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ValidationReport {}

/// Checks a single item; shared by [`validate_instance`] and the file parser.
pub(crate) fn item_violations(item: &Item, ground_size: Option<usize>) -> Vec<Violation> {
    let id = item.id;
    let mut out = Vec::new();
    if !item.cost.is_positive() {
        out.push(Violation::NonpositiveCost { item: id, cost: item.cost.clone() });
    }
    let support = item.dist.support();
    for (s, p) in support {
        if !p.is_positive() {
            out.push(Violation::NonpositiveProbability { item: id, state: s.clone() });
        }
        if let Some(n) = ground_size {
            if !s.fits_within(n) {
                out.push(Violation::StateOutOfRange { item: id, state: s.clone(), ground_size: n });
            }
        }
    }
    for w in support.windows(2) {
        match w[0].0.cmp(&w[1].0) {
            std::cmp::Ordering::Equal => {
                out.push(Violation::DuplicateState { item: id, state: w[0].0.clone() })
            }
            std::cmp::Ordering::Greater => out.push(Violation::NonCanonicalOrder { item: id }),
            std::cmp::Ordering::Less => {}
        }
    }
    let sum: Rational = support.iter().map(|(_, p)| p).sum();
    if !sum.is_one() {
        out.push(Violation::ProbabilitySum { item: id, sum });
    }
    out
}

pub fn validate_instance(inst: &Instance) -> ValidationReport {
    let mut violations = Vec::new();
    let mut seen = vec![false; inst.items.len()];
    for (pos, item) in inst.items.iter().enumerate() {
        if item.id >= inst.items.len() {
            violations.push(Violation::NonDenseItemId { position: pos, id: item.id });
        } else if std::mem::replace(&mut seen[item.id], true) {
            violations.push(Violation::DuplicateItemId { position: pos, id: item.id });
        } else if item.id != pos {
            violations.push(Violation::NonDenseItemId { position: pos, id: item.id });
        }
        violations.extend(item_violations(item, Some(inst.ground_size)));
    }
    ValidationReport { violations }
}

/// `q[F][e] = Pr[e ∈ V(F)]` for every item and element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarginalTable {
    q: Vec<Vec<Rational>>,
}

impl MarginalTable {
    pub fn from_rows(q: Vec<Vec<Rational>>) -> Self {
        MarginalTable { q }
    }

    pub fn get(&self, item: ItemId, e: usize) -> &Rational {
        &self.q[item][e]
    }

    pub fn row(&self, item: ItemId) -> &[Rational] {
        &self.q[item]
    }

    pub fn rows(&self) -> &[Vec<Rational>] {
        &self.q
    }

    pub fn n_items(&self) -> usize {
        self.q.len()
    }

    /// `Σ_{e ∈ within} q[item][e]`.
    pub fn mass(&self, item: ItemId, within: &ElementSubset) -> Rational {
        within.iter().map(|e| &self.q[item][e]).sum()
    }
}

pub fn marginals(inst: &Instance) -> MarginalTable {
    let q = inst
        .items
        .iter()
        .map(|it| {
            let mut row = vec![Rational::zero(); inst.ground_size];
            for (s, p) in it.dist.support() {
                for e in s.iter() {
                    row[e] += p;
                }
            }
            row
        })
        .collect();
    MarginalTable { q }
}

/// `Pr[e is in no item's state] = Π_F (1 − q_F(e))`, by independence.
pub fn uncovered_probability(q: &MarginalTable, e: usize) -> Rational {
    q.rows()
        .iter()
        .fold(Rational::one(), |acc, row| acc * (Rational::one() - &row[e]))
}

/// Every element lies in some item's state with probability one.
///
/// Since items are independent, `Pr[e uncovered] = Π_F (1 − q_F(e))`, and a
/// product of factors in `[0, 1]` is zero exactly when one factor is zero.
/// So the instance has perfect coverage iff each element has an item with
/// `q_F(e) = 1`, which is what is checked here.
pub fn is_perfect_coverage(inst: &Instance) -> bool {
    let q = marginals(inst);
    (0..inst.ground_size).all(|e| q.rows().iter().any(|row| row[e].is_one()))
}

/// One fixed state per item.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Realization {
    pub states: Vec<ElementSubset>,
}

impl Realization {
    pub fn is_consistent_with(&self, inst: &Instance) -> bool {
        self.states.len() == inst.items.len()
            && inst
                .items
                .iter()
                .zip(&self.states)
                .all(|(it, s)| it.dist.contains_state(s))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{what}: {size} exceeds cap {cap}")]
pub struct TooLarge {
    pub what: &'static str,
    pub size: u128,
    pub cap: u128,
}

/// Iterator over the full product space of item states.
pub struct Realizations<'a> {
    inst: &'a Instance,
    cursor: Option<Vec<usize>>,
}

impl Iterator for Realizations<'_> {
    type Item = (Realization, Rational);

    fn next(&mut self) -> Option<Self::Item> {
        let cursor = self.cursor.as_mut()?;
        let mut prob = Rational::one();
        let mut states = Vec::with_capacity(cursor.len());
        for (it, &k) in self.inst.items.iter().zip(cursor.iter()) {
            let (s, p) = &it.dist.support()[k];
            states.push(s.clone());
            prob = prob * p;
        }
        // odometer, last item fastest
        let mut advanced = false;
        for i in (0..cursor.len()).rev() {
            cursor[i] += 1;
            if cursor[i] < self.inst.items[i].dist.len() {
                advanced = true;
                break;
            }
            cursor[i] = 0;
        }
        if !advanced {
            self.cursor = None;
        }
        Some((Realization { states }, prob))
    }
}

/// Every realization with its product probability, in lexicographic order
/// of support indices.
pub fn enumerate_realizations(inst: &Instance, cap: u128) -> Result<Realizations<'_>, TooLarge> {
    let size = inst.realization_count();
    if size > cap {
        return Err(TooLarge { what: "realization count", size, cap });
    }
    let cursor = if size == 0 {
        None
    } else {
        Some(vec![0; inst.items.len()])
    };
    Ok(Realizations { inst, cursor })
}

/// Draws each item's state independently.
///
/// Item `F` uses a ChaCha8 stream seeded with `seed` on stream number `F`.
/// One 64-bit draw `r` selects the first support entry whose cumulative
/// probability exceeds `r / 2^64`, compared exactly.
pub fn sample_realization(inst: &Instance, seed: u64) -> Realization {
    let scale = BigInt::from(1u8) << 64;
    let states = inst
        .items
        .iter()
        .map(|it| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(it.id as u64);
            let r = BigInt::from(rng.next_u64());
            let mut cum = Rational::zero();
            let support = it.dist.support();
            for (s, p) in support {
                cum += p;
                // r / 2^64 < num / den
                if &r * cum.denom() < cum.numer() * &scale {
                    return s.clone();
                }
            }
            support.last().map(|(s, _)| s.clone()).unwrap_or_default()
        })
        .collect();
    Realization { states }
}

/// Union of the realized states of `items`.
pub fn covered_by<'a, I: IntoIterator<Item = &'a ItemId>>(real: &Realization, items: I) -> ElementSubset {
    let mut u = ElementSubset::empty();
    for &f in items {
        u.union_with(&real.states[f]);
    }
    u
}

/// `∪_{F ∈ chosen} V(F) ⊇ ∪_{F ∈ A} V(F)` on the given realization.
pub fn is_valid_cover(inst: &Instance, chosen: &[ItemId], real: &Realization) -> bool {
    let all: Vec<ItemId> = (0..inst.items.len()).collect();
    covered_by(real, &all).is_subset(&covered_by(real, chosen))
}

/// Validity that a policy can certify after seeing only the states of
/// `chosen`: the cover constraint holds for every possible state of the
/// unchosen items. Since items are independent, this is
/// `reach(F) ⊆ ∪_{chosen} V` for each unchosen `F`.
pub fn is_certified_cover(inst: &Instance, chosen: &[ItemId], real: &Realization) -> bool {
    let got = covered_by(real, chosen);
    inst.items
        .iter()
        .filter(|it| !chosen.contains(&it.id))
        .all(|it| it.dist.reach().is_subset(&got))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(e: &[usize]) -> ElementSubset {
        ElementSubset::from_elements(e.iter().copied())
    }

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn ex1() -> Instance {
        Instance::new(
            2,
            vec![
                (
                    Rational::one(),
                    StateDistribution::new(vec![(set(&[0, 1]), r(1, 2)), (set(&[0]), r(1, 2))]),
                ),
                (Rational::one(), StateDistribution::point_mass(set(&[1]))),
            ],
        )
        .unwrap()
    }

    #[test]
    fn validate_point_mass_ok() {
        let inst = Instance {
            ground_size: 1,
            items: vec![Item { id: 0, cost: Rational::one(), dist: StateDistribution::point_mass(set(&[0])) }],
        };
        assert!(validate_instance(&inst).is_ok());
    }

    #[test]
    fn validate_reports_sum_and_cost() {
        let inst = Instance {
            ground_size: 2,
            items: vec![Item {
                id: 0,
                cost: Rational::zero(),
                dist: StateDistribution::new(vec![(set(&[0]), r(1, 2)), (set(&[1]), r(1, 3))]),
            }],
        };
        let report = validate_instance(&inst);
        let msgs: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
        assert!(msgs.contains(&"item 0: probabilities sum to 5/6 ≠ 1".to_string()), "{msgs:?}");
        assert!(msgs.iter().any(|m| m.contains("nonpositive cost")));
    }

    #[test]
    fn validate_reports_structural_violations() {
        let bad_dist = StateDistribution {
            support: vec![(set(&[1]), r(1, 2)), (set(&[1]), r(0, 1)), (set(&[0]), r(1, 2))],
        };
        let inst = Instance {
            ground_size: 1,
            items: vec![
                Item { id: 0, cost: Rational::one(), dist: bad_dist },
                Item { id: 0, cost: Rational::one(), dist: StateDistribution::point_mass(set(&[0])) },
                Item { id: 9, cost: Rational::one(), dist: StateDistribution::point_mass(set(&[0])) },
            ],
        };
        let v = validate_instance(&inst).violations;
        assert!(v.iter().any(|x| matches!(x, Violation::DuplicateState { item: 0, .. })));
        assert!(v.iter().any(|x| matches!(x, Violation::NonCanonicalOrder { item: 0 })));
        assert!(v.iter().any(|x| matches!(x, Violation::NonpositiveProbability { item: 0, .. })));
        assert!(v.iter().any(|x| matches!(x, Violation::StateOutOfRange { item: 0, .. })));
        assert!(v.iter().any(|x| matches!(x, Violation::DuplicateItemId { position: 1, id: 0 })));
        assert!(v.iter().any(|x| matches!(x, Violation::NonDenseItemId { position: 2, id: 9 })));
    }

    #[test]
    fn marginals_examples() {
        let inst = ex1();
        let q = marginals(&inst);
        assert_eq!(q.row(0), &[Rational::one(), r(1, 2)]);
        assert_eq!(q.row(1), &[Rational::zero(), Rational::one()]);

        let empty = Instance::new(3, vec![(Rational::one(), StateDistribution::point_mass(set(&[])))]).unwrap();
        assert!(marginals(&empty).row(0).iter().all(|x| x.is_zero()));
    }

    #[test]
    fn perfect_coverage_examples() {
        assert!(is_perfect_coverage(&ex1()));
        let half = Instance::new(
            1,
            vec![(
                Rational::one(),
                StateDistribution::new(vec![(set(&[0]), r(1, 2)), (set(&[]), r(1, 2))]),
            )],
        )
        .unwrap();
        assert!(!is_perfect_coverage(&half));
        assert!(is_perfect_coverage(&Instance { ground_size: 0, items: vec![] }));
    }

    #[test]
    fn enumerate_examples() {
        let inst = ex1();
        let all: Vec<_> = enumerate_realizations(&inst, 100).unwrap().collect();
        assert_eq!(all.len(), 2);
        assert!(all.iter().all(|(_, p)| *p == r(1, 2)));

        let pm = Instance::new(
            2,
            vec![
                (Rational::one(), StateDistribution::point_mass(set(&[0]))),
                (Rational::one(), StateDistribution::point_mass(set(&[1]))),
            ],
        )
        .unwrap();
        let all: Vec<_> = enumerate_realizations(&pm, 1).unwrap().collect();
        assert_eq!(all.len(), 1);
        assert!(all[0].1.is_one());

        let dist = |k: usize| {
            StateDistribution::new((0..k).map(|i| (set(&[i]), r(1, k as i64))).collect())
        };
        let big = Instance::new(4, vec![(Rational::one(), dist(3)), (Rational::one(), dist(4))]).unwrap();
        let err = enumerate_realizations(&big, 10).err().unwrap();
        assert_eq!(err.size, 12);
    }

    #[test]
    fn no_items_has_single_empty_realization() {
        let inst = Instance { ground_size: 0, items: vec![] };
        let all: Vec<_> = enumerate_realizations(&inst, 1).unwrap().collect();
        assert_eq!(all.len(), 1);
        assert!(all[0].0.states.is_empty());
    }

    #[test]
    fn sampling_is_deterministic_and_consistent() {
        let inst = ex1();
        let mut hits = 0;
        for seed in 0..10 {
            let a = sample_realization(&inst, seed);
            assert_eq!(a, sample_realization(&inst, seed));
            assert!(a.is_consistent_with(&inst));
            if a.states[0] == set(&[0, 1]) {
                hits += 1;
            }
        }
        assert!((1..=9).contains(&hits), "frequency {hits}/10");
    }

    #[test]
    fn cover_validity_examples() {
        let inst = ex1();
        let real = Realization { states: vec![set(&[0]), set(&[1])] };
        assert!(is_valid_cover(&inst, &[0, 1], &real));
        assert!(!is_valid_cover(&inst, &[0], &real));

        let ex2 = Instance::new(
            1,
            vec![(
                Rational::one(),
                StateDistribution::new(vec![(set(&[0]), r(1, 2)), (set(&[]), r(1, 2))]),
            )],
        )
        .unwrap();
        assert!(!is_valid_cover(&ex2, &[], &Realization { states: vec![set(&[0])] }));
        let empty = Realization { states: vec![set(&[])] };
        assert!(is_valid_cover(&ex2, &[], &empty));
        // Not certifiable without looking at the item.
        assert!(!is_certified_cover(&ex2, &[], &empty));
        assert!(is_certified_cover(&ex2, &[0], &empty));
    }
}
