//! Bayesian networks: JSON import, the chain-rule joint, and translation to
//! a CP-theory with one law per node and parent assignment.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};
use serde::Deserialize;
use serde_json::Value as Json;
use thiserror::Error;

use crate::atomset::AtomSet;
use crate::dist::Distribution;
use crate::ground::GroundTheory;
pub use crate::prob::noisy_or;
use crate::prob::{format_literal, parse_prob, Prob};
use crate::syntax::{Atom, CPLaw, CPTheory, Formula, PredDecl, Term, Vocabulary};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BayesError {
    #[error("malformed network file: {0}")]
    Format(String),
    #[error("invalid name {0:?}")]
    BadName(String),
    #[error("duplicate node {0}")]
    DuplicateNode(String),
    #[error("node {node} has unknown parent {parent}")]
    UnknownNode { node: String, parent: String },
    #[error("the parent graph has a cycle through {0}")]
    CyclicGraph(String),
    #[error("node {node}: {msg}")]
    BadRow { node: String, msg: String },
    #[error("node {node}: row {given} sums to {sum}, not 1")]
    RowSumNotOne { node: String, given: String, sum: String },
    #[error("node {node}: no row for parent values {given}")]
    MissingRow { node: String, given: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BnNode {
    pub name: String,
    /// `None` for boolean nodes, whose domain is true, false.
    pub values: Option<Vec<String>>,
    pub parents: Vec<usize>,
    /// Parent value indices to a distribution over the node's domain.
    pub cpt: BTreeMap<Vec<usize>, Vec<Prob>>,
}

impl BnNode {
    pub fn domain_size(&self) -> usize {
        self.values.as_ref().map_or(2, Vec::len)
    }

    pub fn is_boolean(&self) -> bool {
        self.values.is_none()
    }

    pub fn value_name(&self, v: usize) -> String {
        match &self.values {
            Some(vals) => vals[v].clone(),
            None => if v == 0 { "true" } else { "false" }.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BayesNet {
    pub nodes: Vec<BnNode>,
    /// Node indices with parents before children.
    pub order: Vec<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNet {
    nodes: Vec<RawNode>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNode {
    name: String,
    #[serde(default)]
    values: Option<Vec<String>>,
    #[serde(default)]
    parents: Vec<String>,
    cpt: Vec<RawRow>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRow {
    #[serde(default)]
    given: Vec<Json>,
    probs: Vec<Json>,
}

/// Node and value names become predicate and constant names, so they must be
/// identifiers; the first letter is upper-cased.
fn identifier(name: &str) -> Result<String, BayesError> {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() && chars.all(|c| c.is_ascii_alphanumeric() || c == '_') => {
            Ok(c.to_ascii_uppercase().to_string() + &name[1..])
        }
        _ => Err(BayesError::BadName(name.to_string())),
    }
}

fn json_prob(v: &Json) -> Option<Prob> {
    match v {
        Json::String(s) => parse_prob(s.trim()),
        Json::Number(n) => parse_prob(&n.to_string()),
        _ => None,
    }
}

fn value_index(parent: &BnNode, v: &Json) -> Option<usize> {
    match (&parent.values, v) {
        (None, Json::Bool(b)) => Some(usize::from(!b)),
        (None, Json::String(s)) => match s.as_str() {
            "true" => Some(0),
            "false" => Some(1),
            _ => None,
        },
        (Some(vals), Json::String(s)) => identifier(s).ok().and_then(|s| vals.iter().position(|x| *x == s)),
        _ => None,
    }
}

fn describe_given(net: &[BnNode], parents: &[usize], given: &[usize]) -> String {
    let parts: Vec<String> = parents.iter().zip(given).map(|(&p, &v)| format!("{}={}", net[p].name, net[p].value_name(v))).collect();
    format!("[{}]", parts.join(", "))
}

pub fn parse_bn(text: &str) -> Result<BayesNet, BayesError> {
    let raw: RawNet = serde_json::from_str(text).map_err(|e| BayesError::Format(e.to_string()))?;
    let mut nodes: Vec<BnNode> = Vec::new();
    let mut index: BTreeMap<String, usize> = BTreeMap::new();
    for r in &raw.nodes {
        let name = identifier(&r.name)?;
        if index.insert(name.clone(), nodes.len()).is_some() {
            return Err(BayesError::DuplicateNode(name));
        }
        let values = match &r.values {
            Some(vs) => {
                let vs = vs.iter().map(|v| identifier(v)).collect::<Result<Vec<_>, _>>()?;
                if vs.is_empty() || vs.iter().collect::<BTreeSet<_>>().len() != vs.len() {
                    return Err(BayesError::BadRow { node: name, msg: "values must be distinct and non-empty".into() });
                }
                Some(vs)
            }
            None => None,
        };
        nodes.push(BnNode { name, values, parents: Vec::new(), cpt: BTreeMap::new() });
    }
    for (i, r) in raw.nodes.iter().enumerate() {
        for p in &r.parents {
            let pid = identifier(p).ok().and_then(|p| index.get(&p).copied()).ok_or_else(|| BayesError::UnknownNode {
                node: nodes[i].name.clone(),
                parent: p.clone(),
            })?;
            nodes[i].parents.push(pid);
        }
    }
    let order = topological_order(&nodes)?;
    for (i, r) in raw.nodes.iter().enumerate() {
        let node = &nodes[i];
        let mut cpt = BTreeMap::new();
        for row in &r.cpt {
            let bad = |msg: String| BayesError::BadRow { node: node.name.clone(), msg };
            if row.given.len() != node.parents.len() {
                return Err(bad(format!("row has {} parent values, expected {}", row.given.len(), node.parents.len())));
            }
            let given = node
                .parents
                .iter()
                .zip(&row.given)
                .map(|(&p, v)| value_index(&nodes[p], v).ok_or_else(|| bad(format!("{v} is not a value of {}", nodes[p].name))))
                .collect::<Result<Vec<_>, _>>()?;
            if row.probs.len() != node.domain_size() {
                return Err(bad(format!("row has {} probabilities, expected {}", row.probs.len(), node.domain_size())));
            }
            let probs = row
                .probs
                .iter()
                .map(|v| json_prob(v).filter(|p| *p >= Prob::zero()).ok_or_else(|| bad(format!("bad probability {v}"))))
                .collect::<Result<Vec<_>, _>>()?;
            let sum: Prob = probs.iter().sum();
            let label = describe_given(&nodes, &node.parents, &given);
            if !sum.is_one() {
                return Err(BayesError::RowSumNotOne { node: node.name.clone(), given: label, sum: format_literal(&sum) });
            }
            if cpt.insert(given, probs).is_some() {
                return Err(bad(format!("duplicate row {label}")));
            }
        }
        for given in assignments(&node.parents.iter().map(|&p| nodes[p].domain_size()).collect::<Vec<_>>()) {
            if !cpt.contains_key(&given) {
                return Err(BayesError::MissingRow {
                    node: node.name.clone(),
                    given: describe_given(&nodes, &node.parents, &given),
                });
            }
        }
        nodes[i].cpt = cpt;
    }
    Ok(BayesNet { nodes, order })
}

fn topological_order(nodes: &[BnNode]) -> Result<Vec<usize>, BayesError> {
    // 0 unvisited, 1 on stack, 2 done
    fn visit(n: usize, nodes: &[BnNode], mark: &mut [u8], out: &mut Vec<usize>) -> Result<(), BayesError> {
        match mark[n] {
            2 => return Ok(()),
            1 => return Err(BayesError::CyclicGraph(nodes[n].name.clone())),
            _ => {}
        }
        mark[n] = 1;
        for &p in &nodes[n].parents {
            visit(p, nodes, mark, out)?;
        }
        mark[n] = 2;
        out.push(n);
        Ok(())
    }
    let mut mark = vec![0u8; nodes.len()];
    let mut out = Vec::with_capacity(nodes.len());
    for n in 0..nodes.len() {
        visit(n, nodes, &mut mark, &mut out)?;
    }
    Ok(out)
}

/// All tuples in mixed radix, first position most significant.
fn assignments(sizes: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &k in sizes {
        out = out.into_iter().flat_map(|prefix| (0..k).map(move |v| [prefix.clone(), vec![v]].concat())).collect();
    }
    out
}

/// Name of the atom that is true when `node` takes value `v`, if any.
pub fn value_atom(node: &BnNode, v: usize) -> Option<String> {
    match &node.values {
        None => (v == 0).then(|| node.name.clone()),
        Some(vals) => Some(format!("{}({})", node.name, vals[v])),
    }
}

/// Chain-rule probability of every full assignment, indexed by node.
pub fn bn_assignments(bn: &BayesNet) -> Vec<(Vec<usize>, Prob)> {
    let sizes: Vec<usize> = bn.nodes.iter().map(BnNode::domain_size).collect();
    assignments(&sizes)
        .into_iter()
        .map(|a| {
            let p = bn.nodes.iter().enumerate().fold(Prob::one(), |acc, (i, n)| {
                let given: Vec<usize> = n.parents.iter().map(|&q| a[q]).collect();
                acc * &n.cpt[&given][a[i]]
            });
            (a, p)
        })
        .collect()
}

/// The joint as a distribution over interpretations of `atoms`, which must
/// contain every value atom (for instance the grounding of `bn_to_cp(bn)`).
pub fn bn_joint(bn: &BayesNet, atoms: &GroundTheory) -> Distribution {
    let mut d = Distribution::new();
    for (a, p) in bn_assignments(bn) {
        let ids = bn.nodes.iter().zip(&a).filter_map(|(n, &v)| value_atom(n, v)).map(|name| {
            atoms.find(&name).unwrap_or_else(|| panic!("atom {name} missing from vocabulary"))
        });
        d.add(AtomSet::from_ids(atoms.len(), ids), p);
    }
    d
}

fn sort_name(node: &BnNode) -> String {
    node.name.to_ascii_lowercase()
}

fn value_literal(node: &BnNode, v: usize) -> Formula {
    match &node.values {
        None => {
            let a = Formula::atom(Atom::prop(node.name.clone()));
            if v == 0 {
                a
            } else {
                Formula::not(a)
            }
        }
        Some(vals) => Formula::atom(Atom::new(node.name.clone(), vec![Term::Const(vals[v].clone())])),
    }
}

/// One law per node and parent assignment, in topological node order. Zero
/// entries are dropped; boolean nodes become propositions whose false value
/// is the empty outcome.
pub fn bn_to_cp(bn: &BayesNet) -> CPTheory {
    let mut vocab = Vocabulary::default();
    for n in &bn.nodes {
        match &n.values {
            None => vocab.predicates.push(PredDecl { name: n.name.clone(), arity: 0, exogenous: false, arg_sorts: None }),
            Some(vals) => {
                let s = sort_name(n);
                vocab.constants.extend(vals.iter().cloned());
                vocab.sorts.insert(s.clone(), vals.clone());
                vocab.predicates.push(PredDecl { name: n.name.clone(), arity: 1, exogenous: false, arg_sorts: Some(vec![s]) });
            }
        }
    }
    let mut laws = Vec::new();
    for &i in &bn.order {
        let n = &bn.nodes[i];
        for (given, probs) in &n.cpt {
            let head: Vec<(Atom, Prob)> = probs
                .iter()
                .enumerate()
                .filter(|(_, p)| !p.is_zero())
                .filter_map(|(v, p)| {
                    let atom = match &n.values {
                        None => (v == 0).then(|| Atom::prop(n.name.clone())),
                        Some(vals) => Some(Atom::new(n.name.clone(), vec![Term::Const(vals[v].clone())])),
                    };
                    atom.map(|a| (a, p.clone()))
                })
                .collect();
            if head.is_empty() {
                continue;
            }
            let body = n
                .parents
                .iter()
                .zip(given)
                .map(|(&p, &v)| value_literal(&bn.nodes[p], v))
                .reduce(Formula::and);
            laws.push(CPLaw { label: None, vars: Vec::new(), head, body, source_index: laws.len() });
        }
    }
    CPTheory { vocab, laws }
}
