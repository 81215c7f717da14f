//! Reduction from imperfect to perfect coverage.
//!
//! The ground set of the reduced instance is the edge set of the bipartite
//! graph with an edge `(F, e)` whenever `q_F(e) > 0`. When item `F` reveals
//! state `V`, its reduced state is every self-edge `(F, ·)` plus every edge
//! `(F1, e)` with `e ∈ V`. Self-edges are covered with probability one, so
//! the reduced instance always has perfect coverage, and a set of items is
//! a certified cover of the source iff it covers every edge.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::greedy::{Greedy, GreedyError, GreedyTrace};
use crate::instance::{marginals, Instance, Item, ItemId, MarginalTable, Realization, StateDistribution};
use crate::rational::Rational;
use crate::subset::ElementSubset;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub item: ItemId,
    pub element: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BipartiteGraph {
    edges: Vec<Edge>,
    index: HashMap<Edge, usize>,
    self_edges: Vec<ElementSubset>,
    by_element: Vec<ElementSubset>,
}

impl BipartiteGraph {
    /// Edges in canonical order: item-major, element-minor.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn index_of(&self, edge: Edge) -> Option<usize> {
        self.index.get(&edge).copied()
    }

    /// Edge indices `(item, ·)`.
    pub fn self_edges(&self, item: ItemId) -> &ElementSubset {
        &self.self_edges[item]
    }

    /// Edge indices `(·, element)`.
    pub fn edges_at(&self, element: usize) -> &ElementSubset {
        &self.by_element[element]
    }
}

/// Serialized edge map: `{"edges": [[item, element], ...]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeMap {
    pub edges: Vec<(ItemId, usize)>,
}

impl From<&BipartiteGraph> for EdgeMap {
    fn from(g: &BipartiteGraph) -> Self {
        EdgeMap {
            edges: g.edges.iter().map(|e| (e.item, e.element)).collect(),
        }
    }
}

pub fn induced_bipartite_graph(inst: &Instance) -> BipartiteGraph {
    graph_from_marginals(&marginals(inst), inst.ground_size)
}

fn graph_from_marginals(q: &MarginalTable, ground_size: usize) -> BipartiteGraph {
    let mut edges = Vec::new();
    let mut self_edges = vec![ElementSubset::empty(); q.n_items()];
    let mut by_element = vec![ElementSubset::empty(); ground_size];
    for (f, row) in q.rows().iter().enumerate() {
        for (e, m) in row.iter().enumerate() {
            if m.is_positive() {
                let idx = edges.len();
                edges.push(Edge { item: f, element: e });
                self_edges[f].insert(idx);
                by_element[e].insert(idx);
            }
        }
    }
    let index = edges.iter().enumerate().map(|(i, e)| (*e, i)).collect();
    BipartiteGraph { edges, index, self_edges, by_element }
}

/// `μ_F(V)`: self-edges of `item` plus every edge whose element is in `state`.
pub fn mu(item: ItemId, state: &ElementSubset, graph: &BipartiteGraph) -> ElementSubset {
    let mut out = graph.self_edges(item).clone();
    for e in state.iter() {
        if let Some(edges) = graph.by_element.get(e) {
            out.union_with(edges);
        }
    }
    out
}

/// `m_F((F1, e)) = 1` if `F1 = F`, else `q_F(e)`.
pub fn formula_marginals(graph: &BipartiteGraph, q: &MarginalTable) -> MarginalTable {
    let rows = (0..q.n_items())
        .map(|f| {
            graph
                .edges
                .iter()
                .map(|edge| {
                    if edge.item == f {
                        Rational::one()
                    } else {
                        q.get(f, edge.element).clone()
                    }
                })
                .collect()
        })
        .collect();
    MarginalTable::from_rows(rows)
}

#[derive(Clone, Debug)]
pub struct ReducedInstance<'a> {
    pub instance: Instance,
    pub graph: BipartiteGraph,
    pub source: &'a Instance,
}

/// Builds the perfect-coverage instance over the edge set.
///
/// Each item's reduced distribution is the pushforward of its source
/// distribution under `μ_F`; states with the same image are merged. Items
/// with no edges get the point mass on `∅`.
pub fn reduce_instance(inst: &Instance) -> ReducedInstance<'_> {
    let graph = induced_bipartite_graph(inst);
    let items = inst
        .items
        .iter()
        .map(|it| Item {
            id: it.id,
            cost: it.cost.clone(),
            dist: StateDistribution::merged(
                it.dist
                    .support()
                    .iter()
                    .map(|(s, p)| (mu(it.id, s, &graph), p.clone())),
            ),
        })
        .collect();
    ReducedInstance {
        instance: Instance { ground_size: graph.len(), items },
        graph,
        source: inst,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImperfectSolution {
    pub chosen: Vec<ItemId>,
    pub cost: Rational,
    pub trace: GreedyTrace,
}

impl ReducedInstance<'_> {
    /// Maps a source realization item-wise through `μ`.
    pub fn map_realization(&self, real: &Realization) -> Realization {
        Realization {
            states: real
                .states
                .iter()
                .enumerate()
                .map(|(f, s)| mu(f, s, &self.graph))
                .collect(),
        }
    }

    /// Greedy for the reduced instance. Its marginals are taken from the
    /// source marginals via the edge formula.
    pub fn greedy(&self) -> Greedy {
        Greedy::new(
            self.graph.len(),
            formula_marginals(&self.graph, &marginals(self.source)),
            self.source.costs(),
        )
    }

    /// Runs greedy on the reduced instance, mapping each revealed source
    /// state through `μ` only when the item is evaluated.
    pub fn solve_with(&self, greedy: &Greedy, real: &Realization) -> Result<ImperfectSolution, GreedyError> {
        let trace = greedy.run(&mut |f: ItemId| mu(f, &real.states[f], &self.graph))?;
        Ok(ImperfectSolution {
            chosen: trace.evaluated_items(),
            cost: trace.total_cost.clone(),
            trace,
        })
    }
}

pub fn solve_imperfect(inst: &Instance, real: &Realization) -> Result<ImperfectSolution, GreedyError> {
    let reduced = reduce_instance(inst);
    let greedy = reduced.greedy();
    reduced.solve_with(&greedy, real)
}
