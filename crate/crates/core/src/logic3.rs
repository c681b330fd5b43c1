//! Three-valued (Kleene) logic over partial Herbrand interpretations.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::atomset::{AtomId, AtomSet};
use crate::ground::{compare_values, GFormula};

/// Truth values; the derived ordering is the truth order `f < u < t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum TruthValue {
    #[serde(rename = "f")]
    F,
    #[serde(rename = "u")]
    U,
    #[serde(rename = "t")]
    T,
}

impl TruthValue {
    pub fn from_bool(b: bool) -> Self {
        if b {
            TruthValue::T
        } else {
            TruthValue::F
        }
    }

    pub fn negate(self) -> Self {
        match self {
            TruthValue::T => TruthValue::F,
            TruthValue::F => TruthValue::T,
            TruthValue::U => TruthValue::U,
        }
    }

    pub fn leq_truth(self, other: Self) -> bool {
        self <= other
    }

    /// Precision order: `u` is below both `f` and `t`, which are incomparable.
    pub fn leq_precision(self, other: Self) -> bool {
        self == other || self == TruthValue::U
    }

    pub fn is_exact(self) -> bool {
        self != TruthValue::U
    }
}

impl fmt::Display for TruthValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TruthValue::T => "t",
            TruthValue::F => "f",
            TruthValue::U => "u",
        })
    }
}

/// A total map from the Herbrand base to truth values.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PartialInterp(Vec<TruthValue>);

impl PartialInterp {
    pub fn constant(len: usize, v: TruthValue) -> Self {
        PartialInterp(vec![v; len])
    }

    /// The total interpretation making exactly `set` true.
    pub fn from_set(set: &AtomSet) -> Self {
        PartialInterp((0..set.base_len()).map(|i| TruthValue::from_bool(set.contains(i))).collect())
    }

    pub fn from_values(values: Vec<TruthValue>) -> Self {
        PartialInterp(values)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, a: AtomId) -> TruthValue {
        self.0[a]
    }

    pub fn set(&mut self, a: AtomId, v: TruthValue) {
        self.0[a] = v;
    }

    pub fn values(&self) -> &[TruthValue] {
        &self.0
    }

    pub fn is_total(&self) -> bool {
        self.0.iter().all(|v| v.is_exact())
    }

    pub fn ids_with(&self, v: TruthValue) -> impl Iterator<Item = AtomId> + '_ {
        self.0.iter().enumerate().filter(move |(_, x)| **x == v).map(|(i, _)| i)
    }

    pub fn true_set(&self) -> AtomSet {
        AtomSet::from_ids(self.0.len(), self.ids_with(TruthValue::T))
    }
}

/// The three-valued truth function. An absent body is written as `None` by
/// callers and evaluates to `t`.
pub fn eval3(f: &GFormula, nu: &PartialInterp) -> TruthValue {
    match f {
        GFormula::Atom(a) => nu.get(*a),
        GFormula::Compare(op, l, r) => TruthValue::from_bool(compare_values(*op, l, r)),
        GFormula::Truth(b) => TruthValue::from_bool(*b),
        GFormula::Not(g) => eval3(g, nu).negate(),
        GFormula::And(v) => {
            let mut acc = TruthValue::T;
            for g in v {
                acc = acc.min(eval3(g, nu));
                if acc == TruthValue::F {
                    break;
                }
            }
            acc
        }
        GFormula::Or(v) => {
            let mut acc = TruthValue::F;
            for g in v {
                acc = acc.max(eval3(g, nu));
                if acc == TruthValue::T {
                    break;
                }
            }
            acc
        }
    }
}

pub fn eval3_body(body: Option<&GFormula>, nu: &PartialInterp) -> TruthValue {
    body.map_or(TruthValue::T, |b| eval3(b, nu))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    Precision,
    Truth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    LessOrEqual,
    Greater,
    Incomparable,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Logic3Error {
    #[error("interpretations over different bases ({0} vs {1} atoms)")]
    MismatchedBase(usize, usize),
}

/// Pointwise comparison of two interpretations.
pub fn compare(nu1: &PartialInterp, nu2: &PartialInterp, order: Order) -> Result<Comparison, Logic3Error> {
    if nu1.len() != nu2.len() {
        return Err(Logic3Error::MismatchedBase(nu1.len(), nu2.len()));
    }
    let leq = |a: TruthValue, b: TruthValue| match order {
        Order::Precision => a.leq_precision(b),
        Order::Truth => a.leq_truth(b),
    };
    let le = nu1.0.iter().zip(&nu2.0).all(|(&a, &b)| leq(a, b));
    if le {
        return Ok(Comparison::LessOrEqual);
    }
    let ge = nu1.0.iter().zip(&nu2.0).all(|(&a, &b)| leq(b, a));
    Ok(if ge { Comparison::Greater } else { Comparison::Incomparable })
}
