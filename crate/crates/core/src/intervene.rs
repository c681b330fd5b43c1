//! Rule-level interventions: remove laws and add new ones, before grounding.

use serde::Deserialize;
use thiserror::Error;

use crate::syntax::{parse_law, CPTheory, ParseOptions, SyntaxError};

/// Picks a law by its source index or by its `@label`.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(untagged)]
pub enum RuleSelector {
    Index(usize),
    Label(String),
}

impl std::fmt::Display for RuleSelector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RuleSelector::Index(i) => write!(f, "#{i}"),
            RuleSelector::Label(l) => write!(f, "@{l}"),
        }
    }
}

impl std::str::FromStr for RuleSelector {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        Ok(match s.parse::<usize>() {
            Ok(i) => RuleSelector::Index(i),
            Err(_) => RuleSelector::Label(s.strip_prefix('@').unwrap_or(s).to_string()),
        })
    }
}

/// `{"remove": [0, "label"], "add": ["(Death:0.01) <- Dialysis."]}`
#[derive(Debug, Clone, Default, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterventionScript {
    #[serde(default)]
    pub remove: Vec<RuleSelector>,
    #[serde(default)]
    pub add: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InterventionError {
    #[error("no law matches {0}")]
    UnknownRuleSelector(RuleSelector),
    #[error("{0} matches more than one law")]
    AmbiguousRuleSelector(RuleSelector),
    #[error("added law {index}: {err}")]
    Law { index: usize, err: SyntaxError },
    #[error("malformed intervention script: {0}")]
    Format(String),
}

pub fn parse_script(text: &str) -> Result<InterventionScript, InterventionError> {
    serde_json::from_str(text).map_err(|e| InterventionError::Format(e.to_string()))
}

/// Returns the edited theory. Surviving laws keep their source indices;
/// added laws are numbered after the largest existing index.
pub fn apply_intervention(
    theory: &CPTheory,
    script: &InterventionScript,
    opts: ParseOptions,
) -> Result<CPTheory, InterventionError> {
    let mut drop = vec![false; theory.laws.len()];
    for sel in &script.remove {
        let hits: Vec<usize> = theory
            .laws
            .iter()
            .enumerate()
            .filter(|(_, l)| match sel {
                RuleSelector::Index(i) => l.source_index == *i,
                RuleSelector::Label(s) => l.label.as_deref() == Some(s.as_str()),
            })
            .map(|(k, _)| k)
            .collect();
        match hits.as_slice() {
            [] => return Err(InterventionError::UnknownRuleSelector(sel.clone())),
            [k] => drop[*k] = true,
            _ => return Err(InterventionError::AmbiguousRuleSelector(sel.clone())),
        }
    }
    let mut out = CPTheory {
        vocab: theory.vocab.clone(),
        laws: theory.laws.iter().zip(&drop).filter(|(_, d)| !**d).map(|(l, _)| l.clone()).collect(),
    };
    let first = theory.laws.iter().map(|l| l.source_index + 1).max().unwrap_or(0);
    for (index, text) in script.add.iter().enumerate() {
        let law =
            parse_law(text, &mut out.vocab, first + index, opts).map_err(|err| InterventionError::Law { index, err })?;
        out.laws.push(law);
    }
    Ok(out)
}
