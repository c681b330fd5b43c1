//! Instance-based semantics: selections, instance programs and their
//! well-founded models.

use num_traits::One;
use thiserror::Error;

use crate::atomset::AtomSet;
use crate::dist::Distribution;
use crate::ground::GroundTheory;
use crate::logic3::{eval3_body, PartialInterp, TruthValue};
use crate::process::{outcomes, root_state, Outcome};
use crate::prob::Prob;
use crate::wfs::{well_founded_model, Program, WfRule};

pub const DEFAULT_SELECTION_CAP: u128 = 1 << 20;

/// One outcome per law, indexed by rule id.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Selection(pub Vec<Outcome>);

impl Selection {
    pub fn describe(&self, theory: &GroundTheory) -> String {
        let parts: Vec<String> = self
            .0
            .iter()
            .enumerate()
            .map(|(r, o)| match o {
                Outcome::Head(i) => format!("r{r}: {}", theory.atom_name(theory.rules[r].head[*i].0)),
                Outcome::Empty => format!("r{r}: none"),
            })
            .collect();
        format!("{{{}}}", parts.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LpadError {
    #[error("{count} selections exceed the limit of {limit}")]
    ResourceLimit { count: u128, limit: u128 },
    #[error("instance {selection} has no total well-founded model")]
    Unsound { selection: String },
}

/// Available outcomes per law with their masses; laws marked dead get the
/// empty outcome with weight 1.
fn option_table(theory: &GroundTheory, live: &[bool]) -> Vec<Vec<(Outcome, Prob)>> {
    theory
        .rules
        .iter()
        .zip(live)
        .map(|(r, &l)| match l {
            true => outcomes(r).into_iter().map(|(o, _, p)| (o, p)).collect(),
            false => vec![(Outcome::Empty, Prob::one())],
        })
        .collect()
}

fn count_options(table: &[Vec<(Outcome, Prob)>]) -> u128 {
    table.iter().fold(1u128, |acc, o| acc.saturating_mul(o.len() as u128))
}

pub fn selection_count(theory: &GroundTheory) -> u128 {
    count_options(&option_table(theory, &vec![true; theory.rules.len()]))
}

/// Laws whose body can hold in the well-founded model of some instance in
/// `context`. An atom can only become true if some law with it in the head
/// has a body that is not false once every such atom is treated as unknown;
/// the body of any other law is false in every instance, so its choice
/// never changes an instance's model and its masses sum out to 1.
pub fn live_laws(theory: &GroundTheory, context: &AtomSet) -> Vec<bool> {
    let mut nu = PartialInterp::from_set(&root_state(theory, context));
    let mut live = vec![false; theory.rules.len()];
    loop {
        let mut changed = false;
        for (i, r) in theory.rules.iter().enumerate() {
            if live[i] || eval3_body(r.body.as_ref(), &nu) == TruthValue::F {
                continue;
            }
            live[i] = true;
            changed = true;
            for (h, _) in &r.head {
                if nu.get(*h) == TruthValue::F {
                    nu.set(*h, TruthValue::U);
                }
            }
        }
        if !changed {
            return live;
        }
    }
}

/// Streams all selections in lexicographic order (rule 0 most significant;
/// head outcomes in order, then the empty outcome) with their probabilities.
pub struct Selections {
    table: Vec<Vec<(Outcome, Prob)>>,
    digits: Vec<usize>,
    done: bool,
}

impl Iterator for Selections {
    type Item = (Selection, Prob);

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let sel = Selection(self.digits.iter().zip(&self.table).map(|(&d, opts)| opts[d].0).collect());
        let p = self.digits.iter().zip(&self.table).fold(Prob::one(), |acc, (&d, opts)| acc * &opts[d].1);
        let mut k = self.digits.len();
        loop {
            if k == 0 {
                self.done = true;
                break;
            }
            k -= 1;
            self.digits[k] += 1;
            if self.digits[k] < self.table[k].len() {
                break;
            }
            self.digits[k] = 0;
        }
        Some((sel, p))
    }
}

fn selections_from(table: Vec<Vec<(Outcome, Prob)>>, cap: u128) -> Result<Selections, LpadError> {
    let count = count_options(&table);
    if count > cap {
        return Err(LpadError::ResourceLimit { count, limit: cap });
    }
    Ok(Selections { digits: vec![0; table.len()], table, done: false })
}

pub fn enumerate_selections(theory: &GroundTheory, cap: u128) -> Result<Selections, LpadError> {
    selections_from(option_table(theory, &vec![true; theory.rules.len()]), cap)
}

/// Selections over the live laws of `context` only (see [`live_laws`]); the
/// probabilities still sum to 1 and each stands for all selections that
/// agree with it on the live laws.
pub fn enumerate_live_selections(theory: &GroundTheory, context: &AtomSet, cap: u128) -> Result<Selections, LpadError> {
    selections_from(option_table(theory, &live_laws(theory, context)), cap)
}

pub fn selection_probability(theory: &GroundTheory, sel: &Selection) -> Prob {
    sel.0.iter().zip(&theory.rules).fold(Prob::one(), |acc, (o, r)| match o {
        Outcome::Head(i) => acc * &r.head[*i].1,
        Outcome::Empty => acc * r.empty_mass(),
    })
}

/// The logic program keeping, for each law, the selected head atom; exogenous
/// atoms are the program's open atoms.
pub fn instance(theory: &GroundTheory, sel: &Selection) -> Program {
    let rules = theory
        .rules
        .iter()
        .zip(&sel.0)
        .filter_map(|(r, o)| match o {
            Outcome::Head(i) => Some(WfRule { head: r.head[*i].0, body: r.body.clone() }),
            Outcome::Empty => None,
        })
        .collect();
    Program::new(theory.len(), rules, theory.exogenous.clone()).expect("law heads are endogenous")
}

/// `None` when every instance has a total well-founded model in `context`,
/// otherwise the first selection whose instance does not.
pub fn unsound_selection(theory: &GroundTheory, context: &AtomSet, cap: u128) -> Result<Option<Selection>, LpadError> {
    let open = root_state(theory, context);
    for (sel, _) in enumerate_live_selections(theory, context, cap)? {
        if !well_founded_model(&instance(theory, &sel), &open).is_total() {
            return Ok(Some(sel));
        }
    }
    Ok(None)
}

pub fn is_sound(theory: &GroundTheory, context: &AtomSet) -> Result<bool, LpadError> {
    Ok(unsound_selection(theory, context, DEFAULT_SELECTION_CAP)?.is_none())
}

/// `μ_C^X`: each total interpretation receives the mass of the selections
/// whose instance has it as well-founded model.
pub fn instance_semantics_capped(theory: &GroundTheory, context: &AtomSet, cap: u128) -> Result<Distribution, LpadError> {
    let open = root_state(theory, context);
    let mut d = Distribution::new();
    for (sel, p) in enumerate_live_selections(theory, context, cap)? {
        let wfm = well_founded_model(&instance(theory, &sel), &open);
        if !wfm.is_total() {
            return Err(LpadError::Unsound { selection: sel.describe(theory) });
        }
        d.add(wfm.true_set(), p);
    }
    Ok(d)
}

pub fn instance_semantics(theory: &GroundTheory, context: &AtomSet) -> Result<Distribution, LpadError> {
    instance_semantics_capped(theory, context, DEFAULT_SELECTION_CAP)
}
