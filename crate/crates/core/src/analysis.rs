//! Static analyses: timings, stratification, following a timing, validity.

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use thiserror::Error;

use crate::atomset::{AtomId, AtomSet};
use crate::ground::{body_atom_sets, GroundLaw, GroundTheory};
use crate::process::{build_execution_model, BuildConfig, ExecutionTree, Policy, ProcessError};

/// Time point per atom id. Exogenous atoms conventionally get 0.
pub type Timing = Vec<u64>;

/// Time point per rule id.
pub type EventTiming = Vec<u64>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("the theory does not respect the given timing (law {rule})")]
    TimingNotRespected { rule: usize },
}

fn rule_respects(r: &GroundLaw, lambda: &[u64], strict: bool) -> bool {
    let (_, pos, neg) = body_atom_sets(r);
    r.head.iter().all(|&(h, _)| {
        pos.iter().all(|&b| lambda[h] >= lambda[b]) && neg.iter().all(|&b| lambda[h] > lambda[b] || !strict && lambda[h] >= lambda[b])
    })
}

/// Every head atom happens no earlier than every body atom.
pub fn respects(theory: &GroundTheory, lambda: &[u64]) -> bool {
    theory.rules.iter().all(|r| rule_respects(r, lambda, false))
}

/// As `respects`, but negatively occurring body atoms must be strictly earlier.
pub fn strictly_respects(theory: &GroundTheory, lambda: &[u64]) -> bool {
    theory.rules.iter().all(|r| rule_respects(r, lambda, true))
}

/// The interval of admissible event times of each law: from the latest body
/// atom to the earliest head atom. When the theory strictly respects
/// `lambda`, a law must also happen strictly after its negative body atoms.
pub fn timing_intervals(theory: &GroundTheory, lambda: &[u64]) -> Vec<(u64, u64)> {
    let strict = strictly_respects(theory, lambda);
    theory
        .rules
        .iter()
        .map(|r| {
            let (_, pos, neg) = body_atom_sets(r);
            let lo_pos = pos.iter().map(|&b| lambda[b]).max().unwrap_or(0);
            let lo_neg = neg.iter().map(|&b| lambda[b] + u64::from(strict)).max().unwrap_or(0);
            let hi = r.head.iter().map(|&(h, _)| lambda[h]).min().unwrap_or(u64::MAX);
            (lo_pos.max(lo_neg), hi)
        })
        .collect()
}

/// A timing witnessing stratification, built by layering the strongly
/// connected components of the atom dependency graph; `None` when some
/// component contains a negative dependency.
pub fn find_stratification(theory: &GroundTheory) -> Option<Timing> {
    let n = theory.len();
    let mut g: DiGraph<(), u64> = DiGraph::with_capacity(n, 0);
    let nodes: Vec<NodeIndex> = (0..n).map(|_| g.add_node(())).collect();
    for r in &theory.rules {
        let (_, pos, neg) = body_atom_sets(r);
        for &(h, _) in &r.head {
            for &b in &pos {
                g.add_edge(nodes[b], nodes[h], 0);
            }
            for &b in &neg {
                g.add_edge(nodes[b], nodes[h], 1);
            }
        }
    }
    let mut sccs = tarjan_scc(&g);
    sccs.reverse();
    let mut comp = vec![0usize; n];
    for (ci, c) in sccs.iter().enumerate() {
        for v in c {
            comp[v.index()] = ci;
        }
    }
    let mut level = vec![0u64; sccs.len()];
    for (ci, c) in sccs.iter().enumerate() {
        for &v in c {
            for e in g.edges_directed(v, petgraph::Direction::Incoming) {
                use petgraph::visit::EdgeRef;
                let from = comp[e.source().index()];
                if from == ci {
                    if *e.weight() == 1 {
                        return None;
                    }
                } else {
                    level[ci] = level[ci].max(level[from] + e.weight());
                }
            }
        }
    }
    Some((0..n).map(|a| level[comp[a]]).collect())
}

pub fn layer_count(lambda: &[u64]) -> u64 {
    lambda.iter().max().map_or(0, |m| m + 1)
}

/// Decides whether the laws of `tree` can be assigned times within their
/// intervals that never decrease along a branch. Returns a witness event
/// timing (covering every law) on success.
pub fn follows_timing(
    tree: &ExecutionTree,
    theory: &GroundTheory,
    lambda: &[u64],
) -> Result<Option<EventTiming>, AnalysisError> {
    if let Some(r) = theory.rules.iter().find(|r| !rule_respects(r, lambda, false)) {
        return Err(AnalysisError::TimingNotRespected { rule: r.rule_id });
    }
    let intervals = timing_intervals(theory, lambda);
    let n = theory.rules.len();
    // Difference constraints x_j - x_i <= w as edges i -> j; node n is the zero point.
    let mut edges: Vec<(usize, usize, i128)> = Vec::new();
    for (r, &(lo, hi)) in intervals.iter().enumerate() {
        if lo > hi {
            return Ok(None);
        }
        edges.push((n, r, hi as i128));
        edges.push((r, n, -(lo as i128)));
    }
    tree.visit(|v| {
        if let (Some(&parent), Some(child)) = (v.path.last(), v.node.event) {
            edges.push((child, parent, 0));
        }
    });
    match bellman_ford(n + 1, &edges) {
        Some(dist) => {
            let zero = dist[n];
            Ok(Some((0..n).map(|r| (dist[r] - zero) as u64).collect()))
        }
        None => Ok(None),
    }
}

/// Shortest distances from a virtual source joined to every vertex with
/// weight 0; `None` on a negative cycle.
fn bellman_ford(vertices: usize, edges: &[(usize, usize, i128)]) -> Option<Vec<i128>> {
    let mut dist = vec![0i128; vertices];
    for _ in 0..=vertices {
        let mut changed = false;
        for &(u, v, w) in edges {
            if dist[u] + w < dist[v] {
                dist[v] = dist[u] + w;
                changed = true;
            }
        }
        if !changed {
            return Some(dist);
        }
    }
    None
}

/// All assignments of the exogenous atoms that occur in some law body; other
/// exogenous atoms are false.
pub fn relevant_contexts(theory: &GroundTheory) -> Vec<AtomSet> {
    let ids: Vec<AtomId> = theory.relevant_exogenous();
    assert!(ids.len() < 24, "too many exogenous atoms to enumerate contexts");
    (0u64..1 << ids.len())
        .map(|mask| AtomSet::from_ids(theory.len(), ids.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &a)| a)))
        .collect()
}

pub fn is_valid(theory: &GroundTheory, context: &AtomSet) -> Result<bool, ProcessError> {
    match build_execution_model(theory, context, &Policy::FirstEligible, &BuildConfig::default()) {
        Ok(_) => Ok(true),
        Err(ProcessError::Invalid { .. }) => Ok(false),
        Err(e) => Err(e),
    }
}

/// Validity per relevant context.
pub fn validity_by_context(theory: &GroundTheory) -> Result<Vec<(AtomSet, bool)>, ProcessError> {
    relevant_contexts(theory).into_iter().map(|c| is_valid(theory, &c).map(|v| (c, v))).collect()
}

pub fn is_valid_everywhere(theory: &GroundTheory) -> Result<bool, ProcessError> {
    Ok(validity_by_context(theory)?.iter().all(|(_, v)| *v))
}
