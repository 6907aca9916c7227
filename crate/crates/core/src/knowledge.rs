//! Knowledge acquisition: derives the optimal algorithm of each instance from
//! a reliability-weighted graph of "beats" relations.
//!
//! Per instance:
//! 1. the optimal-algorithm candidates (OACs) are the reported best algorithms;
//! 2. a direct edge `winner -> loser` is added for every record where both are
//!    candidates, weighted by the most reliable supporting paper's rank;
//! 3. the graph is closed transitively with widest-path (bottleneck) weights;
//! 4. opposing edges are resolved in favour of the strictly heavier one;
//! 5. among the in-degree-0 nodes the one whose reachable set carries the
//!    largest body of comparison evidence is elected.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experience::{rank_papers, ExperienceRecord, ExperienceStore, ReliabilityRank};

/// Default minimum on distinct algorithms; instances at or below it are skipped.
pub const DEFAULT_MIN_ALGORITHMS: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RelationEdge {
    pub winner: String,
    pub loser: String,
    pub weight: usize,
}

/// Directed "performs better than" graph over algorithm names.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PerformanceGraph {
    nodes: BTreeSet<String>,
    edges: BTreeMap<(String, String), usize>,
}

impl PerformanceGraph {
    pub fn new(nodes: impl IntoIterator<Item = String>, edges: impl IntoIterator<Item = RelationEdge>) -> Self {
        let mut g = PerformanceGraph {
            nodes: nodes.into_iter().collect(),
            edges: BTreeMap::new(),
        };
        for e in edges {
            g.add_edge(e);
        }
        g
    }

    /// Inserts an edge, keeping the larger weight if it already exists.
    pub fn add_edge(&mut self, e: RelationEdge) {
        debug_assert_ne!(e.winner, e.loser);
        self.nodes.insert(e.winner.clone());
        self.nodes.insert(e.loser.clone());
        let w = self.edges.entry((e.winner, e.loser)).or_insert(e.weight);
        *w = (*w).max(e.weight);
    }

    pub fn nodes(&self) -> &BTreeSet<String> {
        &self.nodes
    }

    pub fn edges(&self) -> impl Iterator<Item = RelationEdge> + '_ {
        self.edges.iter().map(|((w, l), &weight)| RelationEdge {
            winner: w.clone(),
            loser: l.clone(),
            weight,
        })
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn weight(&self, winner: &str, loser: &str) -> Option<usize> {
        self.edges.get(&(winner.to_string(), loser.to_string())).copied()
    }

    fn successors<'a>(&'a self, node: &'a str) -> impl Iterator<Item = (&'a str, usize)> + 'a {
        self.edges
            .range((node.to_string(), String::new())..)
            .take_while(move |((w, _), _)| w == node)
            .map(|((_, l), &weight)| (l.as_str(), weight))
    }

    pub fn in_degree(&self, node: &str) -> usize {
        self.edges.keys().filter(|(_, l)| l == node).count()
    }

    /// Nodes reachable from `start`, including `start` itself.
    pub fn reachable(&self, start: &str) -> BTreeSet<String> {
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::new();
        seen.insert(start.to_string());
        queue.push_back(start.to_string());
        while let Some(u) = queue.pop_front() {
            for (v, _) in self.successors(&u) {
                if seen.insert(v.to_string()) {
                    queue.push_back(v.to_string());
                }
            }
        }
        seen
    }
}

/// The derived ground truth for one instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnowledgePair {
    pub instance_id: String,
    pub optimal_algorithm: String,
    pub support_count: usize,
}

/// Distinct algorithms named anywhere in `records`.
pub fn distinct_algorithms(records: &[&ExperienceRecord]) -> BTreeSet<String> {
    records.iter().flat_map(|r| r.algorithms()).map(str::to_string).collect()
}

/// Reported best algorithms of an instance.
pub fn candidates(records: &[&ExperienceRecord]) -> BTreeSet<String> {
    records.iter().map(|r| r.best_algorithm.clone()).collect()
}

/// Direct relations among the candidates, each weighted by the highest rank
/// index of the papers asserting it.
pub fn direct_relations(records: &[&ExperienceRecord], rank: &ReliabilityRank) -> Result<Vec<RelationEdge>> {
    let oacs = candidates(records);
    let mut base: BTreeMap<(String, String), usize> = BTreeMap::new();
    for (line, r) in records.iter().enumerate() {
        let weight = rank.rank_of(&r.paper_id).ok_or_else(|| Error::UnknownPaper {
            paper_id: r.paper_id.clone(),
            line: line + 1,
        })?;
        for loser in r.other_algorithms.intersection(&oacs) {
            let w = base.entry((r.best_algorithm.clone(), loser.clone())).or_insert(weight);
            *w = (*w).max(weight);
        }
    }
    Ok(base
        .into_iter()
        .map(|((winner, loser), weight)| RelationEdge { winner, loser, weight })
        .collect())
}

/// Builds the direct-relation graph; every candidate is a node even when isolated.
pub fn direct_graph(records: &[&ExperienceRecord], rank: &ReliabilityRank) -> Result<PerformanceGraph> {
    Ok(PerformanceGraph::new(candidates(records), direct_relations(records, rank)?))
}

/// Adds an edge to every reachable node, weighted by the widest-path bottleneck
/// (the maximum over paths of the minimum edge weight along the path).
pub fn transitive_closure(graph: &PerformanceGraph) -> PerformanceGraph {
    let mut out = PerformanceGraph::new(graph.nodes.iter().cloned(), std::iter::empty());
    for src in &graph.nodes {
        // Modified Dijkstra: settle nodes in decreasing bottleneck order.
        let mut best: BTreeMap<&str, usize> = BTreeMap::new();
        let mut heap: BinaryHeap<(usize, Reverse<&str>)> = BinaryHeap::new();
        for (v, w) in graph.successors(src) {
            heap.push((w, Reverse(v)));
        }
        while let Some((width, Reverse(u))) = heap.pop() {
            if best.contains_key(u) {
                continue;
            }
            best.insert(u, width);
            for (v, w) in graph.successors(u) {
                if !best.contains_key(v) {
                    heap.push((width.min(w), Reverse(v)));
                }
            }
        }
        for (dst, width) in best {
            if dst != src {
                out.add_edge(RelationEdge {
                    winner: src.clone(),
                    loser: dst.to_string(),
                    weight: width,
                });
            }
        }
    }
    out
}

/// Keeps only the strictly heavier edge of each opposing pair; equal weights cancel.
pub fn resolve_conflicts(graph: &PerformanceGraph) -> PerformanceGraph {
    let mut out = PerformanceGraph::new(graph.nodes.iter().cloned(), std::iter::empty());
    for ((a, b), &w) in &graph.edges {
        match graph.weight(b, a) {
            Some(back) if back >= w => {}
            _ => out.add_edge(RelationEdge {
                winner: a.clone(),
                loser: b.clone(),
                weight: w,
            }),
        }
    }
    out
}

/// A candidate's evidence score during election.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CandidateScore {
    pub algorithm: String,
    pub reachable: BTreeSet<String>,
    pub dominated: BTreeSet<String>,
}

impl CandidateScore {
    pub fn score(&self) -> usize {
        self.dominated.len()
    }
}

/// Scores every in-degree-0 node of a conflict-free graph.
pub fn score_sources(graph: &PerformanceGraph, records: &[&ExperienceRecord]) -> Vec<CandidateScore> {
    graph
        .nodes
        .iter()
        .filter(|n| graph.in_degree(n) == 0)
        .map(|n| {
            let reachable = graph.reachable(n);
            let dominated = records
                .iter()
                .filter(|r| reachable.contains(&r.best_algorithm))
                .flat_map(|r| r.other_algorithms.iter().cloned())
                .collect();
            CandidateScore {
                algorithm: n.clone(),
                reachable,
                dominated,
            }
        })
        .collect()
}

/// Elects the optimal algorithm of an instance, or `None` when the records
/// involve too few algorithms to be trusted.
pub fn elect_optimal(
    graph: &PerformanceGraph,
    records: &[&ExperienceRecord],
    min_algorithms: usize,
) -> Result<Option<KnowledgePair>> {
    let Some(first) = records.first() else {
        return Ok(None);
    };
    if distinct_algorithms(records).len() <= min_algorithms {
        return Ok(None);
    }
    if graph.nodes.is_empty() {
        return Err(Error::Empty("performance graph has no nodes"));
    }
    let winner = score_sources(graph, records)
        .into_iter()
        // max by score, then the lexicographically smallest name
        .max_by(|a, b| a.score().cmp(&b.score()).then_with(|| b.algorithm.cmp(&a.algorithm)))
        .ok_or(Error::Empty("no in-degree-0 candidate"))?;
    Ok(Some(KnowledgePair {
        instance_id: first.instance_id.clone(),
        support_count: winner.score(),
        optimal_algorithm: winner.algorithm,
    }))
}

/// Intermediate products of one instance's election, for inspection.
#[derive(Debug, Clone)]
pub struct InstanceTrace {
    pub instance_id: String,
    pub candidates: BTreeSet<String>,
    pub direct: PerformanceGraph,
    pub closure: PerformanceGraph,
    pub resolved: PerformanceGraph,
    pub scores: Vec<CandidateScore>,
    pub pair: Option<KnowledgePair>,
}

/// Runs the full election for the records of one instance.
pub fn acquire_instance(
    records: &[&ExperienceRecord],
    rank: &ReliabilityRank,
    min_algorithms: usize,
) -> Result<InstanceTrace> {
    let instance_id = records.first().map(|r| r.instance_id.clone()).unwrap_or_default();
    let direct = direct_graph(records, rank)?;
    let closure = transitive_closure(&direct);
    let resolved = resolve_conflicts(&closure);
    let scores = score_sources(&resolved, records);
    let pair = elect_optimal(&resolved, records, min_algorithms)?;
    Ok(InstanceTrace {
        instance_id,
        candidates: candidates(records),
        direct,
        closure,
        resolved,
        scores,
        pair,
    })
}

/// Derives one knowledge pair per instance with enough evidence.
pub fn acquire_knowledge(store: &ExperienceStore, min_algorithms: usize) -> Result<Vec<KnowledgePair>> {
    if store.is_empty() {
        return Ok(Vec::new());
    }
    let rank = rank_papers(store.papers())?;
    let mut out = Vec::new();
    for (instance, records) in store.by_instance() {
        if distinct_algorithms(&records).len() <= min_algorithms {
            log::debug!("skipping instance `{instance}`: too few algorithms");
            continue;
        }
        let graph = resolve_conflicts(&transitive_closure(&direct_graph(&records, &rank)?));
        if let Some(pair) = elect_optimal(&graph, &records, min_algorithms)? {
            out.push(pair);
        }
    }
    Ok(out)
}
