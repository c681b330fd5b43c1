//! Execution-model semantics: potentials, eligible events, construction of
//! execution trees by backtracking search, leaf distributions and a checker
//! for the execution-model conditions.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use fixedbitset::FixedBitSet;
use num_traits::{One, Signed, Zero};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::atomset::{AtomId, AtomSet};
use crate::dist::Distribution;
use crate::ground::{GroundLaw, GroundTheory};
use crate::logic3::{eval3_body, PartialInterp, TruthValue};
use crate::prob::Prob;

pub type RuleSet = FixedBitSet;

pub const DEFAULT_NODE_CAP: usize = 1_000_000;
pub const DEFAULT_TREE_CAP: usize = 10_000;

/// Which outcome of a fired law produced a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Head(usize),
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Universal and sufficient causation only.
    Weak,
    /// Additionally requires the fired law's body to be settled in the potential.
    Full,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Policy {
    FirstEligible,
    SeededRandom(u64),
    /// Prefer laws in the listed order; unlisted laws follow by rule id.
    Priority(Vec<usize>),
}

#[derive(Debug, Clone)]
pub struct BuildConfig {
    pub mode: Mode,
    pub node_cap: usize,
    pub tree_cap: usize,
    /// When set, a law may only fire after laws with no larger value on the
    /// same branch.
    pub event_timing: Option<Vec<u64>>,
}

impl Default for BuildConfig {
    fn default() -> Self {
        BuildConfig { mode: Mode::Full, node_cap: node_cap_from_env(), tree_cap: DEFAULT_TREE_CAP, event_timing: None }
    }
}

impl BuildConfig {
    pub fn with_mode(mode: Mode) -> Self {
        BuildConfig { mode, ..Self::default() }
    }
}

/// Node cap from `CPLOGIC_NODE_CAP`, falling back to the default.
pub fn node_cap_from_env() -> usize {
    std::env::var("CPLOGIC_NODE_CAP").ok().and_then(|v| v.trim().parse().ok()).unwrap_or(DEFAULT_NODE_CAP)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProcessError {
    #[error("no execution model exists in this context")]
    Invalid { context: AtomSet },
    #[error("resource limit exceeded: more than {limit} {what}")]
    ResourceLimit { what: &'static str, limit: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub state: AtomSet,
    pub fired: RuleSet,
    /// Probability on the edge from the parent (1 at the root).
    pub prob: Prob,
    pub outcome: Option<Outcome>,
    pub event: Option<usize>,
    pub children: Vec<Node>,
}

impl Node {
    fn leaf(state: AtomSet, fired: RuleSet) -> Self {
        Node { state, fired, prob: Prob::one(), outcome: None, event: None, children: Vec::new() }
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    pub fn count(&self) -> usize {
        1 + self.children.iter().map(Node::count).sum::<usize>()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecutionTree {
    pub root: Node,
    pub context: AtomSet,
}

/// A node visited in a traversal, with its path data.
pub struct Visit<'a> {
    pub node: &'a Node,
    /// Product of edge probabilities from the root.
    pub path_prob: Prob,
    /// The partial selection made along the path: fired law and its outcome.
    pub selection: &'a [(usize, Outcome)],
    /// Events fired on the path, in order.
    pub path: &'a [usize],
}

impl ExecutionTree {
    pub fn node_count(&self) -> usize {
        self.root.count()
    }

    pub fn visit(&self, mut f: impl FnMut(&Visit<'_>)) {
        fn go(n: &Node, p: Prob, sel: &mut Vec<(usize, Outcome)>, path: &mut Vec<usize>, f: &mut dyn FnMut(&Visit<'_>)) {
            f(&Visit { node: n, path_prob: p.clone(), selection: sel, path });
            if let Some(e) = n.event {
                path.push(e);
                for c in &n.children {
                    sel.push((e, c.outcome.expect("child outcome")));
                    go(c, &p * &c.prob, sel, path, f);
                    sel.pop();
                }
                path.pop();
            }
        }
        go(&self.root, Prob::one(), &mut Vec::new(), &mut Vec::new(), &mut f);
    }

    pub fn leaf_distribution(&self) -> Distribution {
        let mut d = Distribution::new();
        self.visit(|v| {
            if v.node.is_leaf() {
                d.add(v.node.state.clone(), v.path_prob.clone());
            }
        });
        d
    }
}

pub fn leaf_distribution(tree: &ExecutionTree) -> Distribution {
    tree.leaf_distribution()
}

/// The potential of a state: start with every atom outside `state` false and
/// raise to unknown the false head atoms of unfired laws whose body is not
/// false, scanning laws by id until nothing changes.
pub fn potential(theory: &GroundTheory, fired: &RuleSet, state: &AtomSet) -> PartialInterp {
    let mut nu = PartialInterp::from_set(state);
    loop {
        let mut changed = false;
        for r in &theory.rules {
            if fired.contains(r.rule_id) {
                continue;
            }
            if raise_head(r, &mut nu) {
                changed = true;
            }
        }
        if !changed {
            return nu;
        }
    }
}

fn raise_head(r: &GroundLaw, nu: &mut PartialInterp) -> bool {
    if !r.head.iter().any(|(h, _)| nu.get(*h) == TruthValue::F) {
        return false;
    }
    if eval3_body(r.body.as_ref(), nu) == TruthValue::F {
        return false;
    }
    for (h, _) in &r.head {
        if nu.get(*h) == TruthValue::F {
            nu.set(*h, TruthValue::U);
        }
    }
    true
}

/// A terminal hypothetical derivation sequence with randomly chosen steps.
pub fn potential_random<R: Rng>(theory: &GroundTheory, fired: &RuleSet, state: &AtomSet, rng: &mut R) -> PartialInterp {
    let mut nu = PartialInterp::from_set(state);
    loop {
        let open: Vec<&GroundLaw> = theory
            .rules
            .iter()
            .filter(|r| {
                !fired.contains(r.rule_id)
                    && r.head.iter().any(|(h, _)| nu.get(*h) == TruthValue::F)
                    && eval3_body(r.body.as_ref(), &nu) != TruthValue::F
            })
            .collect();
        let Some(r) = open.choose(rng) else {
            return nu;
        };
        raise_head(r, &mut nu);
    }
}

/// Membership in the family of interpretations bounded by the potential:
/// same true atoms as `state`, and every unfired law with a non-false body has
/// no false head atom.
pub fn in_potential_family(theory: &GroundTheory, fired: &RuleSet, state: &AtomSet, nu: &PartialInterp) -> bool {
    if (0..nu.len()).any(|a| (nu.get(a) == TruthValue::T) != state.contains(a)) {
        return false;
    }
    theory.rules.iter().all(|r| {
        fired.contains(r.rule_id)
            || eval3_body(r.body.as_ref(), nu) == TruthValue::F
            || r.head.iter().all(|(h, _)| nu.get(*h) != TruthValue::F)
    })
}

/// Unfired laws whose body is classically satisfied in `state`.
pub fn applicable(theory: &GroundTheory, fired: &RuleSet, state: &AtomSet) -> Vec<usize> {
    theory.rules.iter().filter(|r| !fired.contains(r.rule_id) && r.body_holds(state)).map(|r| r.rule_id).collect()
}

/// Laws that may fire in a node. In full mode an applicable law is eligible
/// only when its body is not unknown in the potential.
pub fn eligible(theory: &GroundTheory, fired: &RuleSet, state: &AtomSet, mode: Mode) -> Vec<usize> {
    let app = applicable(theory, fired, state);
    if mode == Mode::Weak || app.is_empty() {
        return app;
    }
    let nu = potential(theory, fired, state);
    app.into_iter()
        .filter(|&r| eval3_body(theory.rules[r].body.as_ref(), &nu) != TruthValue::U)
        .collect()
}

/// The children a firing of `rule` produces: one per head atom, then the empty
/// outcome when it has positive mass.
pub fn outcomes(rule: &GroundLaw) -> Vec<(Outcome, Option<AtomId>, Prob)> {
    let mut out: Vec<(Outcome, Option<AtomId>, Prob)> =
        rule.head.iter().enumerate().map(|(i, (h, p))| (Outcome::Head(i), Some(*h), p.clone())).collect();
    let rest = rule.empty_mass();
    if rest.is_positive() {
        out.push((Outcome::Empty, None, rest));
    }
    out
}

/// The root interpretation for a context: its exogenous atoms only.
pub fn root_state(theory: &GroundTheory, context: &AtomSet) -> AtomSet {
    AtomSet::from_ids(theory.len(), context.ids().filter(|&a| theory.is_exogenous(a)))
}

type MemoKey = (AtomSet, RuleSet, Option<u64>);

struct Builder<'a> {
    theory: &'a GroundTheory,
    cfg: &'a BuildConfig,
    rng: Option<ChaCha8Rng>,
    rank: Vec<usize>,
    nodes: usize,
    failed: HashSet<MemoKey>,
    enumerated: HashMap<MemoKey, Vec<Node>>,
}

impl<'a> Builder<'a> {
    fn new(theory: &'a GroundTheory, cfg: &'a BuildConfig, policy: &Policy) -> Self {
        let n = theory.rules.len();
        let mut rank: Vec<usize> = (0..n).map(|r| n + r).collect();
        let mut rng = None;
        match policy {
            Policy::FirstEligible => {}
            Policy::SeededRandom(seed) => rng = Some(ChaCha8Rng::seed_from_u64(*seed)),
            Policy::Priority(order) => {
                for (i, &r) in order.iter().enumerate() {
                    if r < n && rank[r] >= n {
                        rank[r] = i;
                    }
                }
            }
        }
        Builder { theory, cfg, rng, rank, nodes: 0, failed: HashSet::new(), enumerated: HashMap::new() }
    }

    fn tick(&mut self) -> Result<(), ProcessError> {
        self.nodes += 1;
        if self.nodes > self.cfg.node_cap {
            return Err(ProcessError::ResourceLimit { what: "tree nodes", limit: self.cfg.node_cap });
        }
        Ok(())
    }

    fn candidates(&mut self, state: &AtomSet, fired: &RuleSet, last: Option<u64>) -> Vec<usize> {
        let mut c = eligible(self.theory, fired, state, self.cfg.mode);
        if let Some(kappa) = &self.cfg.event_timing {
            c.retain(|&r| last.is_none_or(|l| kappa[r] >= l));
        }
        match &mut self.rng {
            Some(rng) => c.shuffle(rng),
            None => c.sort_by_key(|&r| self.rank[r]),
        }
        c
    }

    fn kappa(&self, r: usize) -> Option<u64> {
        self.cfg.event_timing.as_ref().map(|k| k[r])
    }

    fn build(&mut self, state: AtomSet, fired: RuleSet, last: Option<u64>) -> Result<Option<Node>, ProcessError> {
        self.tick()?;
        if applicable(self.theory, &fired, &state).is_empty() {
            return Ok(Some(Node::leaf(state, fired)));
        }
        let key = (state, fired, last);
        if self.failed.contains(&key) {
            return Ok(None);
        }
        let (state, fired, last) = key;
        'rules: for r in self.candidates(&state, &fired, last) {
            let mut next_fired = fired.clone();
            next_fired.insert(r);
            let mut children = Vec::new();
            for (outcome, atom, p) in outcomes(&self.theory.rules[r]) {
                let mut s = state.clone();
                if let Some(a) = atom {
                    s.insert(a);
                }
                match self.build(s, next_fired.clone(), self.kappa(r))? {
                    Some(mut child) => {
                        child.prob = p;
                        child.outcome = Some(outcome);
                        children.push(child);
                    }
                    None => continue 'rules,
                }
            }
            return Ok(Some(Node { state, fired, prob: Prob::one(), outcome: None, event: Some(r), children }));
        }
        self.failed.insert((state, fired, last));
        Ok(None)
    }

    fn enumerate(&mut self, state: AtomSet, fired: RuleSet, last: Option<u64>) -> Result<Vec<Node>, ProcessError> {
        self.tick()?;
        if applicable(self.theory, &fired, &state).is_empty() {
            return Ok(vec![Node::leaf(state, fired)]);
        }
        let key = (state, fired, last);
        if let Some(done) = self.enumerated.get(&key) {
            return Ok(done.clone());
        }
        let (state, fired, last) = key.clone();
        let mut result = Vec::new();
        for r in self.candidates(&state, &fired, last) {
            let mut next_fired = fired.clone();
            next_fired.insert(r);
            let mut options: Vec<Vec<Node>> = Vec::new();
            for (outcome, atom, p) in outcomes(&self.theory.rules[r]) {
                let mut s = state.clone();
                if let Some(a) = atom {
                    s.insert(a);
                }
                let mut subs = self.enumerate(s, next_fired.clone(), self.kappa(r))?;
                for c in &mut subs {
                    c.prob = p.clone();
                    c.outcome = Some(outcome);
                }
                options.push(subs);
            }
            if options.iter().any(Vec::is_empty) {
                continue;
            }
            let mut combos: Vec<Vec<Node>> = vec![Vec::new()];
            for opt in &options {
                if combos.len().saturating_mul(opt.len()) + result.len() > self.cfg.tree_cap {
                    return Err(ProcessError::ResourceLimit { what: "execution trees", limit: self.cfg.tree_cap });
                }
                combos = combos
                    .into_iter()
                    .flat_map(|prefix| {
                        opt.iter().map(move |c| {
                            let mut p = prefix.clone();
                            p.push(c.clone());
                            p
                        })
                    })
                    .collect();
            }
            for children in combos {
                result.push(Node {
                    state: state.clone(),
                    fired: fired.clone(),
                    prob: Prob::one(),
                    outcome: None,
                    event: Some(r),
                    children,
                });
            }
        }
        self.enumerated.insert(key, result.clone());
        Ok(result)
    }
}

/// Builds one execution tree for `context` (a set of true exogenous atoms),
/// backtracking over event choices when some branch reaches a node where
/// applicable laws exist but none may fire.
pub fn build_execution_model(
    theory: &GroundTheory,
    context: &AtomSet,
    policy: &Policy,
    cfg: &BuildConfig,
) -> Result<ExecutionTree, ProcessError> {
    let root = root_state(theory, context);
    let mut b = Builder::new(theory, cfg, policy);
    match b.build(root.clone(), RuleSet::with_capacity(theory.rules.len()), None)? {
        Some(node) => Ok(ExecutionTree { root: node, context: root }),
        None => Err(ProcessError::Invalid { context: root }),
    }
}

/// Every execution tree of the theory in `context`, in rule-id order of the
/// root choices. Intended for small theories.
pub fn enumerate_execution_models(
    theory: &GroundTheory,
    context: &AtomSet,
    cfg: &BuildConfig,
) -> Result<Vec<ExecutionTree>, ProcessError> {
    let root = root_state(theory, context);
    let mut b = Builder::new(theory, cfg, &Policy::FirstEligible);
    let nodes = b.enumerate(root.clone(), RuleSet::with_capacity(theory.rules.len()), None)?;
    Ok(nodes.into_iter().map(|n| ExecutionTree { root: n, context: root.clone() }).collect())
}

/// `π_C^X` computed from an execution tree built with the canonical policy.
pub fn tree_semantics(theory: &GroundTheory, context: &AtomSet) -> Result<Distribution, ProcessError> {
    let cfg = BuildConfig::default();
    Ok(build_execution_model(theory, context, &Policy::FirstEligible, &cfg)?.leaf_distribution())
}

/// The joint distribution induced by a prior over exogenous interpretations.
pub fn conditional_semantics(theory: &GroundTheory, prior: &Distribution) -> Result<Distribution, ProcessError> {
    let mut out = Distribution::new();
    for (ctx, p) in prior.iter() {
        let d = tree_semantics(theory, ctx)?;
        out.merge_scaled(&d, p);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelViolation {
    /// Child indices from the root to the offending node.
    pub path: Vec<usize>,
    pub reason: String,
}

/// Checks the execution-model conditions at every node of `tree`.
pub fn check_execution_model(
    tree: &ExecutionTree,
    theory: &GroundTheory,
    context: &AtomSet,
    mode: Mode,
) -> Result<(), ModelViolation> {
    let root = root_state(theory, context);
    if tree.root.state != root {
        return Err(ModelViolation { path: vec![], reason: "root interpretation differs from the context".into() });
    }
    let fired = RuleSet::with_capacity(theory.rules.len());
    check_node(&tree.root, theory, &fired, mode, &mut Vec::new())
}

fn check_node(
    n: &Node,
    theory: &GroundTheory,
    fired: &RuleSet,
    mode: Mode,
    path: &mut Vec<usize>,
) -> Result<(), ModelViolation> {
    let fail = |path: &Vec<usize>, reason: String| Err(ModelViolation { path: path.clone(), reason });
    let Some(r) = n.event else {
        if !n.children.is_empty() {
            return fail(path, "node has children but no event".into());
        }
        let app = applicable(theory, fired, &n.state);
        if let Some(&r) = app.first() {
            return fail(path, format!("leaf with unfired law {r} whose body holds"));
        }
        return Ok(());
    };
    if r >= theory.rules.len() {
        return fail(path, format!("unknown law {r}"));
    }
    if fired.contains(r) {
        return fail(path, format!("law {r} fires twice on one branch"));
    }
    let rule = &theory.rules[r];
    if !rule.body_holds(&n.state) {
        return fail(path, format!("law {r} fires although its body is false"));
    }
    if mode == Mode::Full {
        let nu = potential(theory, fired, &n.state);
        if eval3_body(rule.body.as_ref(), &nu) == TruthValue::U {
            return fail(path, format!("law {r} fires before its body is settled (unknown in the potential)"));
        }
    }
    let sum: Prob = n.children.iter().map(|c| c.prob.clone()).sum();
    if sum != Prob::one() {
        return fail(path, format!("outgoing probabilities sum to {sum}, not 1"));
    }
    let expected = outcomes(rule);
    if n.children.len() != expected.len() {
        return fail(path, format!("law {r} should have {} children, found {}", expected.len(), n.children.len()));
    }
    let mut seen = HashSet::new();
    let mut next_fired = fired.clone();
    next_fired.insert(r);
    for (i, c) in n.children.iter().enumerate() {
        let Some((outcome, atom, p)) = expected.iter().find(|(o, _, _)| Some(*o) == c.outcome) else {
            return fail(path, format!("child {i} is not an outcome of law {r}"));
        };
        if !seen.insert(*outcome) {
            return fail(path, format!("outcome {outcome:?} of law {r} appears twice"));
        }
        let mut s = n.state.clone();
        if let Some(a) = atom {
            s.insert(*a);
        }
        if c.state != s {
            return fail(path, format!("child {i} has the wrong interpretation"));
        }
        if &c.prob != p || c.prob.is_zero() {
            return fail(path, format!("child {i} has probability {} instead of {p}", c.prob));
        }
        path.push(i);
        check_node(c, theory, &next_fired, mode, path)?;
        path.pop();
    }
    Ok(())
}

/// Graphviz rendering: nodes show their true atoms and event, edges their
/// exact probabilities.
pub fn to_dot(tree: &ExecutionTree, theory: &GroundTheory) -> String {
    fn go(n: &Node, theory: &GroundTheory, next: &mut usize, out: &mut String) -> usize {
        let id = *next;
        *next += 1;
        let mut label = theory.show_set(&n.state);
        if let Some(e) = n.event {
            write!(label, "\\nfires r{e}").unwrap();
        }
        writeln!(out, "  n{id} [label=\"{}\"];", label.replace('"', "\\\"")).unwrap();
        for c in &n.children {
            let cid = go(c, theory, next, out);
            writeln!(out, "  n{id} -> n{cid} [label=\"{}\"];", c.prob).unwrap();
        }
        id
    }
    let mut out = String::from("digraph execution_tree {\n  node [shape=box];\n");
    go(&tree.root, theory, &mut 0, &mut out);
    out.push_str("}\n");
    out
}

pub fn to_json(tree: &ExecutionTree, theory: &GroundTheory) -> serde_json::Value {
    fn go(n: &Node, theory: &GroundTheory) -> serde_json::Value {
        json!({
            "state": theory.set_names(&n.state),
            "prob": n.prob.to_string(),
            "outcome": n.outcome,
            "event": n.event,
            "children": n.children.iter().map(|c| go(c, theory)).collect::<Vec<_>>(),
        })
    }
    json!({ "context": theory.set_names(&tree.context), "root": go(&tree.root, theory) })
}
