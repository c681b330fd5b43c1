//! Well-founded semantics for ground programs whose rule bodies are arbitrary
//! ground formulas, with open (exogenous) atoms fixed by an input
//! interpretation.

use rand::seq::IteratorRandom;
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::atomset::{AtomId, AtomSet};
use crate::ground::GFormula;
use crate::logic3::{eval3_body, PartialInterp, TruthValue};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WfRule {
    pub head: AtomId,
    pub body: Option<GFormula>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub base_len: usize,
    pub rules: Vec<WfRule>,
    pub open: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WfsError {
    #[error("rule {rule} defines open atom {atom}")]
    OpenHead { rule: usize, atom: AtomId },
}

impl Program {
    pub fn new(base_len: usize, rules: Vec<WfRule>, open: Vec<bool>) -> Result<Self, WfsError> {
        assert_eq!(open.len(), base_len, "open flags must cover the base");
        if let Some((rule, r)) = rules.iter().enumerate().find(|(_, r)| open[r.head]) {
            return Err(WfsError::OpenHead { rule, atom: r.head });
        }
        Ok(Program { base_len, rules, open })
    }

    /// The least precise interpretation extending the open interpretation.
    pub fn initial(&self, open_true: &AtomSet) -> PartialInterp {
        let mut nu = PartialInterp::constant(self.base_len, TruthValue::U);
        for a in 0..self.base_len {
            if self.open[a] {
                nu.set(a, TruthValue::from_bool(open_true.contains(a)));
            }
        }
        nu
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WfStep {
    MakeTrue { atom: AtomId, rule: usize },
    MakeFalse { atoms: Vec<AtomId> },
}

fn falsified(nu: &PartialInterp, atoms: &[AtomId]) -> PartialInterp {
    let mut next = nu.clone();
    for &a in atoms {
        next.set(a, TruthValue::F);
    }
    next
}

/// The largest unfounded subset of `candidates` (all of which must be `u` in
/// `nu`), computed as a greatest fixpoint.
pub fn greatest_unfounded_within(program: &Program, nu: &PartialInterp, candidates: &[AtomId]) -> Vec<AtomId> {
    let mut inside = vec![false; program.base_len];
    for &a in candidates {
        inside[a] = true;
    }
    let mut set: Vec<AtomId> = candidates.to_vec();
    loop {
        let trial = falsified(nu, &set);
        let mut supported = false;
        for r in &program.rules {
            if inside[r.head] && eval3_body(r.body.as_ref(), &trial) != TruthValue::F {
                inside[r.head] = false;
                supported = true;
            }
        }
        if !supported {
            return set;
        }
        set.retain(|&a| inside[a]);
    }
}

pub fn greatest_unfounded_set(program: &Program, nu: &PartialInterp) -> Vec<AtomId> {
    let unknown: Vec<AtomId> = (0..program.base_len)
        .filter(|&a| !program.open[a] && nu.get(a) == TruthValue::U)
        .collect();
    greatest_unfounded_within(program, nu, &unknown)
}

/// Computes the well-founded model together with the induction that reached it.
pub fn well_founded_trace(program: &Program, open_true: &AtomSet) -> (PartialInterp, Vec<WfStep>) {
    let mut nu = program.initial(open_true);
    let mut steps = Vec::new();
    loop {
        loop {
            let mut changed = false;
            for (i, r) in program.rules.iter().enumerate() {
                if nu.get(r.head) == TruthValue::U && eval3_body(r.body.as_ref(), &nu) == TruthValue::T {
                    nu.set(r.head, TruthValue::T);
                    steps.push(WfStep::MakeTrue { atom: r.head, rule: i });
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let u = greatest_unfounded_set(program, &nu);
        if u.is_empty() {
            return (nu, steps);
        }
        nu = falsified(&nu, &u);
        steps.push(WfStep::MakeFalse { atoms: u });
    }
}

pub fn well_founded_model(program: &Program, open_true: &AtomSet) -> PartialInterp {
    well_founded_trace(program, open_true).0
}

/// True when no induction step can make `nu` strictly more precise.
pub fn is_terminal(program: &Program, nu: &PartialInterp) -> bool {
    let derivable = program
        .rules
        .iter()
        .any(|r| nu.get(r.head) == TruthValue::U && eval3_body(r.body.as_ref(), nu) == TruthValue::T);
    !derivable && greatest_unfounded_set(program, nu).is_empty()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WfViolation {
    pub index: usize,
    pub reason: String,
}

/// Replays `steps` from the least precise extension of the open
/// interpretation and checks every step against the definition of a
/// well-founded induction. Returns the final interpretation on success.
pub fn check_wf_induction(
    program: &Program,
    open_true: &AtomSet,
    steps: &[WfStep],
) -> Result<PartialInterp, WfViolation> {
    let mut nu = program.initial(open_true);
    for (index, step) in steps.iter().enumerate() {
        let fail = |reason: String| Err(WfViolation { index, reason });
        match step {
            WfStep::MakeTrue { atom, rule } => {
                let Some(r) = program.rules.get(*rule) else {
                    return fail(format!("no rule {rule}"));
                };
                if r.head != *atom {
                    return fail(format!("rule {rule} does not define atom {atom}"));
                }
                if nu.get(*atom) == TruthValue::F {
                    return fail(format!("atom {atom} is already false"));
                }
                if eval3_body(r.body.as_ref(), &nu) != TruthValue::T {
                    return fail(format!("body of rule {rule} is not true"));
                }
                nu.set(*atom, TruthValue::T);
            }
            WfStep::MakeFalse { atoms } => {
                if let Some(a) = atoms.iter().find(|&&a| nu.get(a) != TruthValue::U) {
                    return fail(format!("atom {a} is not unknown"));
                }
                let next = falsified(&nu, atoms);
                for (i, r) in program.rules.iter().enumerate() {
                    if atoms.contains(&r.head) && eval3_body(r.body.as_ref(), &next) != TruthValue::F {
                        return fail(format!("rule {i} still supports atom {}", r.head));
                    }
                }
                nu = next;
            }
        }
    }
    Ok(nu)
}

/// A terminal well-founded induction built from random choices: at each step
/// either a random derivable atom is made true or a randomly seeded
/// unfounded set is falsified.
pub fn random_induction<R: Rng>(program: &Program, open_true: &AtomSet, rng: &mut R) -> (PartialInterp, Vec<WfStep>) {
    let mut nu = program.initial(open_true);
    let mut steps = Vec::new();
    loop {
        let derivable: Vec<usize> = (0..program.rules.len())
            .filter(|&i| {
                let r = &program.rules[i];
                nu.get(r.head) == TruthValue::U && eval3_body(r.body.as_ref(), &nu) == TruthValue::T
            })
            .collect();
        let greatest = greatest_unfounded_set(program, &nu);
        if derivable.is_empty() && greatest.is_empty() {
            return (nu, steps);
        }
        let falsify = derivable.is_empty() || (!greatest.is_empty() && rng.random_bool(0.5));
        if falsify {
            let sample: Vec<AtomId> = greatest.iter().copied().filter(|_| rng.random_bool(0.5)).collect();
            let mut u = greatest_unfounded_within(program, &nu, &sample);
            if u.is_empty() {
                u = vec![*greatest.iter().choose(rng).unwrap()];
                u = greatest_unfounded_within(program, &nu, &u);
                if u.is_empty() {
                    u = greatest;
                }
            }
            nu = falsified(&nu, &u);
            steps.push(WfStep::MakeFalse { atoms: u });
        } else {
            let i = *derivable.iter().choose(rng).unwrap();
            let atom = program.rules[i].head;
            nu.set(atom, TruthValue::T);
            steps.push(WfStep::MakeTrue { atom, rule: i });
        }
    }
}
