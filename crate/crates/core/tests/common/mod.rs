//! Brute-force oracles that share no code path with the library
//! algorithms. They only read the raw item supports and costs.

#![allow(dead_code, clippy::needless_range_loop)]

use sscover::generators::{random_instance, CoverageMode, GenParams};
use sscover::{ElementSubset, Instance, Rational, StateDistribution};

pub fn set(e: &[usize]) -> ElementSubset {
    ElementSubset::from_elements(e.iter().copied())
}

pub fn r(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

pub fn ex1() -> Instance {
    Instance::new(
        2,
        vec![
            (Rational::one(), StateDistribution::new(vec![(set(&[0, 1]), r(1, 2)), (set(&[0]), r(1, 2))])),
            (Rational::one(), StateDistribution::point_mass(set(&[1]))),
        ],
    )
    .unwrap()
}

fn half_or_empty() -> StateDistribution {
    StateDistribution::new(vec![(set(&[0]), r(1, 2)), (set(&[]), r(1, 2))])
}

pub fn ex2() -> Instance {
    Instance::new(1, vec![(Rational::one(), half_or_empty())]).unwrap()
}

pub fn ex3() -> Instance {
    Instance::new(
        1,
        vec![(Rational::one(), half_or_empty()), (Rational::one(), StateDistribution::point_mass(set(&[0])))],
    )
    .unwrap()
}

/// Parameters for the `i`-th instance of a sweep: `|A| ≤ 4`, `|B| ≤ 4`,
/// support `≤ 3`, granularity `≤ 4`.
pub fn sweep_params(i: usize, mode: CoverageMode, max_items: usize) -> GenParams {
    GenParams {
        n_items: 1 + i % max_items,
        n_elements: (i / max_items) % 5,
        max_support: 1 + (i / 3) % 3,
        cost_lo: r(1, 4),
        cost_hi: r(3, 1),
        coverage_mode: mode,
        prob_granularity: 1 + (i / 7) % 4,
        seed: 0x5eed_0000 + i as u64,
    }
}

pub fn sweep_instance(i: usize, mode: CoverageMode, max_items: usize) -> Instance {
    random_instance(&sweep_params(i, mode, max_items)).unwrap()
}

/// Raw supports as `(state, prob)` lists.
pub fn supports(inst: &Instance) -> Vec<Vec<(ElementSubset, Rational)>> {
    inst.items.iter().map(|it| it.dist.support().to_vec()).collect()
}

/// Cartesian product of supports by plain recursion.
pub fn all_worlds(inst: &Instance) -> Vec<(Vec<ElementSubset>, Rational)> {
    fn go(
        sup: &[Vec<(ElementSubset, Rational)>],
        k: usize,
        acc: &mut Vec<ElementSubset>,
        p: Rational,
        out: &mut Vec<(Vec<ElementSubset>, Rational)>,
    ) {
        if k == sup.len() {
            out.push((acc.clone(), p));
            return;
        }
        for (s, q) in &sup[k] {
            acc.push(s.clone());
            go(sup, k + 1, acc, &p * q, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    go(&supports(inst), 0, &mut Vec::new(), Rational::one(), &mut out);
    out
}

pub fn brute_marginal(inst: &Instance, item: usize, e: usize) -> Rational {
    let mut q = Rational::zero();
    for (s, p) in inst.items[item].dist.support() {
        if s.to_vec().contains(&e) {
            q += p;
        }
    }
    q
}

/// One greedy run written directly from the definitions: returns
/// (evaluated items, per-element price, cost).
pub fn naive_greedy(inst: &Instance, world: &[ElementSubset]) -> Option<(Vec<usize>, Vec<Rational>, Rational)> {
    let n = inst.items.len();
    let mut uncovered: Vec<usize> = (0..inst.ground_size).collect();
    let mut used = vec![false; n];
    let mut prices = vec![Rational::zero(); inst.ground_size];
    let mut order = Vec::new();
    let mut cost = Rational::zero();
    while !uncovered.is_empty() {
        let mut best: Option<(usize, Rational)> = None;
        for f in 0..n {
            if used[f] {
                continue;
            }
            let mass: Rational = uncovered.iter().map(|&e| brute_marginal(inst, f, e)).sum();
            if mass.is_zero() {
                continue;
            }
            let price = &inst.items[f].cost / mass;
            let better = match &best {
                None => true,
                Some((_, b)) => price < *b,
            };
            if better {
                best = Some((f, price));
            }
        }
        let (f, price) = best?;
        used[f] = true;
        order.push(f);
        cost += &inst.items[f].cost;
        let state = world[f].to_vec();
        uncovered.retain(|e| {
            if state.contains(e) {
                prices[*e] = price.clone();
                false
            } else {
                true
            }
        });
    }
    Some((order, prices, cost))
}

pub struct NaiveReport {
    pub expected_cost: Rational,
    pub eval_probs: Vec<Rational>,
    pub price_expectations: Vec<Rational>,
}

pub fn naive_greedy_report(inst: &Instance) -> NaiveReport {
    let mut rep = NaiveReport {
        expected_cost: Rational::zero(),
        eval_probs: vec![Rational::zero(); inst.items.len()],
        price_expectations: vec![Rational::zero(); inst.ground_size],
    };
    for (world, p) in all_worlds(inst) {
        let (order, prices, cost) = naive_greedy(inst, &world).expect("perfect instance");
        rep.expected_cost += &p * cost;
        for f in order {
            rep.eval_probs[f] += &p;
        }
        for (acc, x) in rep.price_expectations.iter_mut().zip(prices) {
            *acc += &p * x;
        }
    }
    rep
}

fn covers_ground(inst: &Instance, covered: &ElementSubset) -> bool {
    (0..inst.ground_size).all(|e| covered.contains(e))
}

/// Expected cost of every deterministic adaptive policy whose decisions may
/// depend on the full ordered history of evaluations. Policies stop exactly
/// when the ground set is covered; any unevaluated item may be chosen.
pub fn all_policy_costs(inst: &Instance) -> Vec<Rational> {
    fn go(inst: &Instance, evaluated: &mut Vec<usize>, covered: &ElementSubset) -> Vec<Rational> {
        if covers_ground(inst, covered) {
            return vec![Rational::zero()];
        }
        let mut out = Vec::new();
        for f in 0..inst.items.len() {
            if evaluated.contains(&f) {
                continue;
            }
            evaluated.push(f);
            // one list of subtree costs per outcome; a policy picks one from each
            let branches: Vec<(Rational, Vec<Rational>)> = inst.items[f]
                .dist
                .support()
                .iter()
                .map(|(s, p)| (p.clone(), go(inst, evaluated, &covered.union(s))))
                .collect();
            evaluated.pop();
            if branches.iter().any(|(_, l)| l.is_empty()) {
                continue;
            }
            let mut combos = vec![inst.items[f].cost.clone()];
            for (p, costs) in &branches {
                combos = combos.iter().flat_map(|c| costs.iter().map(move |x| c + &(p * x))).collect();
            }
            out.extend(combos);
        }
        out
    }
    go(inst, &mut Vec::new(), &ElementSubset::empty())
}

pub fn exhaustive_optimal(inst: &Instance) -> Rational {
    all_policy_costs(inst).into_iter().min().expect("some feasible policy")
}

/// Expected cost of evaluating items in `order` until the ground set is
/// covered.
pub fn permutation_cost(inst: &Instance, order: &[usize]) -> Rational {
    let mut total = Rational::zero();
    for (world, p) in all_worlds(inst) {
        let mut covered = ElementSubset::empty();
        let mut cost = Rational::zero();
        for &f in order {
            if covers_ground(inst, &covered) {
                break;
            }
            cost += &inst.items[f].cost;
            covered.union_with(&world[f]);
        }
        assert!(covers_ground(inst, &covered), "permutation failed to cover");
        total += p * cost;
    }
    total
}

pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

/// Textbook weighted greedy set cover on deterministic sets: returns the
/// chosen sets in order with their cost-per-new-element.
pub fn classical_greedy(ground_size: usize, sets: &[Vec<usize>], costs: &[Rational]) -> Vec<(usize, Rational)> {
    let mut uncovered: Vec<usize> = (0..ground_size).collect();
    let mut chosen = Vec::new();
    let mut used = vec![false; sets.len()];
    while !uncovered.is_empty() {
        let mut best: Option<(usize, Rational)> = None;
        for (i, s) in sets.iter().enumerate() {
            let fresh = s.iter().filter(|e| uncovered.contains(e)).count();
            if used[i] || fresh == 0 {
                continue;
            }
            let ratio = &costs[i] / Rational::from(fresh);
            if best.as_ref().is_none_or(|(_, b)| ratio < *b) {
                best = Some((i, ratio));
            }
        }
        let (i, ratio) = best.expect("sets cover the ground set");
        used[i] = true;
        uncovered.retain(|e| !sets[i].contains(e));
        chosen.push((i, ratio));
    }
    chosen
}

/// Minimum-cost cover by trying every subset of sets.
pub fn min_cost_cover(ground_size: usize, sets: &[Vec<usize>], costs: &[Rational]) -> Rational {
    let mut best: Option<Rational> = None;
    for mask in 0u32..(1 << sets.len()) {
        let covered: std::collections::BTreeSet<usize> =
            (0..sets.len()).filter(|i| mask >> i & 1 == 1).flat_map(|i| sets[i].iter().copied()).collect();
        if (0..ground_size).all(|e| covered.contains(&e)) {
            let c: Rational = (0..sets.len()).filter(|i| mask >> i & 1 == 1).map(|i| &costs[i]).sum();
            if best.as_ref().is_none_or(|b| c < *b) {
                best = Some(c);
            }
        }
    }
    best.expect("cover exists")
}

pub fn harmonic_direct(n: usize) -> Rational {
    let mut h = Rational::zero();
    for k in 1..=n {
        h += Rational::new(1, k as i64);
    }
    h
}
