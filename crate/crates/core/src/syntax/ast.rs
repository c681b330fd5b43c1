use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::prob::Prob;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Const(String),
    Var(String),
    Int(i64),
    Arith(ArithOp, Box<Term>, Box<Term>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArithOp {
    Add,
    Sub,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Atom {
    pub pred: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(pred: impl Into<String>, args: Vec<Term>) -> Self {
        Atom { pred: pred.into(), args }
    }

    pub fn prop(pred: impl Into<String>) -> Self {
        Atom { pred: pred.into(), args: Vec::new() }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Atom(Atom),
    Compare(CmpOp, Term, Term),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Forall(String, Box<Formula>),
    Exists(String, Box<Formula>),
    Truth(bool),
}

impl Formula {
    pub fn atom(a: Atom) -> Self {
        Formula::Atom(a)
    }

    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn forall(v: impl Into<String>, f: Formula) -> Self {
        Formula::Forall(v.into(), Box::new(f))
    }

    pub fn exists(v: impl Into<String>, f: Formula) -> Self {
        Formula::Exists(v.into(), Box::new(f))
    }

    /// Free variables in order of first occurrence.
    pub fn free_vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut bound = Vec::new();
        collect_free(self, &mut bound, &mut out);
        out
    }
}

fn term_vars(t: &Term, bound: &[String], out: &mut Vec<String>) {
    match t {
        Term::Var(v) => {
            if !bound.contains(v) && !out.contains(v) {
                out.push(v.clone());
            }
        }
        Term::Arith(_, a, b) => {
            term_vars(a, bound, out);
            term_vars(b, bound, out);
        }
        Term::Const(_) | Term::Int(_) => {}
    }
}

fn collect_free(f: &Formula, bound: &mut Vec<String>, out: &mut Vec<String>) {
    match f {
        Formula::Atom(a) => a.args.iter().for_each(|t| term_vars(t, bound, out)),
        Formula::Compare(_, l, r) => {
            term_vars(l, bound, out);
            term_vars(r, bound, out);
        }
        Formula::Not(g) => collect_free(g, bound, out),
        Formula::And(a, b) | Formula::Or(a, b) => {
            collect_free(a, bound, out);
            collect_free(b, bound, out);
        }
        Formula::Forall(v, g) | Formula::Exists(v, g) => {
            bound.push(v.clone());
            collect_free(g, bound, out);
            bound.pop();
        }
        Formula::Truth(_) => {}
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CPLaw {
    pub label: Option<String>,
    pub vars: Vec<String>,
    pub head: Vec<(Atom, Prob)>,
    pub body: Option<Formula>,
    pub source_index: usize,
}

impl CPLaw {
    pub fn head_mass(&self) -> Prob {
        self.head.iter().map(|(_, p)| p.clone()).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredDecl {
    pub name: String,
    pub arity: usize,
    pub exogenous: bool,
    /// Sort (or range) name per argument position, when declared typed.
    pub arg_sorts: Option<Vec<String>>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    pub predicates: Vec<PredDecl>,
    pub constants: BTreeSet<String>,
    pub sorts: BTreeMap<String, Vec<String>>,
    pub ranges: BTreeMap<String, (i64, i64)>,
}

impl Vocabulary {
    pub fn predicate(&self, name: &str, arity: usize) -> Option<&PredDecl> {
        self.predicates.iter().find(|p| p.name == name && p.arity == arity)
    }

    pub fn arities_of(&self, name: &str) -> Vec<usize> {
        self.predicates.iter().filter(|p| p.name == name).map(|p| p.arity).collect()
    }

    pub fn is_exogenous(&self, name: &str, arity: usize) -> bool {
        self.predicate(name, arity).is_some_and(|p| p.exogenous)
    }

    pub fn has_sort(&self, name: &str) -> bool {
        self.sorts.contains_key(name) || self.ranges.contains_key(name)
    }

    pub fn int_in_some_range(&self, v: i64) -> bool {
        self.ranges.values().any(|&(lo, hi)| lo <= v && v <= hi)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CPTheory {
    pub vocab: Vocabulary,
    pub laws: Vec<CPLaw>,
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Const(c) | Term::Var(c) => f.write_str(c),
            Term::Int(v) => write!(f, "{v}"),
            Term::Arith(op, a, b) => {
                let sym = match op {
                    ArithOp::Add => "+",
                    ArithOp::Sub => "-",
                };
                write!(f, "{a} {sym} ")?;
                if matches!(**b, Term::Arith(..)) {
                    write!(f, "({b})")
                } else {
                    write!(f, "{b}")
                }
            }
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.pred)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{a}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}
