//! Grounding: expansion of a CP-theory over its Herbrand base.
//!
//! Law-level variables are instantiated to produce one ground law per
//! substitution. Quantifiers inside bodies are expanded into finite
//! conjunctions and disjunctions. Comparison literals stay in the ground body
//! with their arguments evaluated.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use num_traits::One;
use thiserror::Error;

use crate::atomset::{AtomId, AtomSet};
use crate::prob::Prob;
use crate::syntax::{ArithOp, Atom, CPLaw, CPTheory, CmpOp, Formula, Term, Vocabulary};

const MAX_ATOMS: usize = 1 << 20;
const MAX_RULES: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Int(i64),
    Sym(String),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Sym(s) => f.write_str(s),
        }
    }
}

impl Value {
    fn to_term(&self) -> Term {
        match self {
            Value::Int(v) => Term::Int(*v),
            Value::Sym(s) => Term::Const(s.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroundAtom {
    pub pred: String,
    pub args: Vec<Value>,
}

impl fmt::Display for GroundAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.pred)?;
        if !self.args.is_empty() {
            let args: Vec<String> = self.args.iter().map(Value::to_string).collect();
            write!(f, "({})", args.join(","))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum GFormula {
    Atom(AtomId),
    Compare(CmpOp, Value, Value),
    Not(Box<GFormula>),
    And(Vec<GFormula>),
    Or(Vec<GFormula>),
    Truth(bool),
}

impl GFormula {
    /// Conjunction with nested conjunctions flattened and singletons unwrapped.
    pub fn and_of(parts: Vec<GFormula>) -> GFormula {
        let mut flat = Vec::new();
        for p in parts {
            match p {
                GFormula::And(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        if flat.len() == 1 {
            flat.pop().unwrap()
        } else {
            GFormula::And(flat)
        }
    }

    pub fn or_of(parts: Vec<GFormula>) -> GFormula {
        let mut flat = Vec::new();
        for p in parts {
            match p {
                GFormula::Or(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        if flat.len() == 1 {
            flat.pop().unwrap()
        } else {
            GFormula::Or(flat)
        }
    }

    pub fn negate(f: GFormula) -> GFormula {
        GFormula::Not(Box::new(f))
    }

    pub fn atoms(&self) -> BTreeSet<AtomId> {
        self.atom_sets().0
    }

    fn polar_atoms(&self, negated: bool, pos: &mut BTreeSet<AtomId>, neg: &mut BTreeSet<AtomId>) {
        match self {
            GFormula::Atom(a) => {
                if negated {
                    neg.insert(*a);
                } else {
                    pos.insert(*a);
                }
            }
            GFormula::Not(g) => g.polar_atoms(!negated, pos, neg),
            GFormula::And(v) | GFormula::Or(v) => v.iter().for_each(|g| g.polar_atoms(negated, pos, neg)),
            GFormula::Compare(..) | GFormula::Truth(_) => {}
        }
    }

    /// Returns `(At, At+, At-)`: all atoms, atoms with no negative occurrence,
    /// and atoms occurring under an odd number of negations.
    pub fn atom_sets(&self) -> (BTreeSet<AtomId>, BTreeSet<AtomId>, BTreeSet<AtomId>) {
        let mut pos = BTreeSet::new();
        let mut neg = BTreeSet::new();
        self.polar_atoms(false, &mut pos, &mut neg);
        let all: BTreeSet<AtomId> = pos.union(&neg).copied().collect();
        let positive = all.difference(&neg).copied().collect();
        (all, positive, neg)
    }

    pub fn is_positive(&self) -> bool {
        self.atom_sets().2.is_empty()
    }

    /// Classical evaluation against a set of true atoms.
    pub fn holds(&self, state: &AtomSet) -> bool {
        match self {
            GFormula::Atom(a) => state.contains(*a),
            GFormula::Compare(op, l, r) => compare_values(*op, l, r),
            GFormula::Not(g) => !g.holds(state),
            GFormula::And(v) => v.iter().all(|g| g.holds(state)),
            GFormula::Or(v) => v.iter().any(|g| g.holds(state)),
            GFormula::Truth(b) => *b,
        }
    }
}

pub fn compare_values(op: CmpOp, l: &Value, r: &Value) -> bool {
    match op {
        CmpOp::Eq => l == r,
        CmpOp::Ne => l != r,
        CmpOp::Lt => l < r,
        CmpOp::Le => l <= r,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundLaw {
    pub rule_id: usize,
    pub origin: usize,
    pub label: Option<String>,
    pub head: Vec<(AtomId, Prob)>,
    pub body: Option<GFormula>,
}

impl GroundLaw {
    pub fn head_mass(&self) -> Prob {
        self.head.iter().map(|(_, p)| p.clone()).sum()
    }

    /// Mass of the outcome in which no head atom is caused.
    pub fn empty_mass(&self) -> Prob {
        Prob::one() - self.head_mass()
    }

    pub fn body_holds(&self, state: &AtomSet) -> bool {
        self.body.as_ref().is_none_or(|b| b.holds(state))
    }
}

/// `(At, At+, At-)` of a rule body; all empty when the body is absent.
pub fn body_atom_sets(rule: &GroundLaw) -> (BTreeSet<AtomId>, BTreeSet<AtomId>, BTreeSet<AtomId>) {
    match &rule.body {
        Some(b) => b.atom_sets(),
        None => Default::default(),
    }
}

#[derive(Debug, Clone)]
pub struct GroundTheory {
    pub vocab: Vocabulary,
    pub atoms: Vec<GroundAtom>,
    pub exogenous: Vec<bool>,
    pub rules: Vec<GroundLaw>,
    index: HashMap<GroundAtom, AtomId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroundError {
    #[error("law {law}: variable `{var}` has no candidate values")]
    DomainEmpty { law: usize, var: String },
    #[error("law {law}: {msg}")]
    ArithmeticOnNonInteger { law: usize, msg: String },
    #[error("grounding exceeds the limit of {limit} {what}")]
    TooLarge { what: &'static str, limit: usize },
}

impl GroundTheory {
    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atom(&self, id: AtomId) -> &GroundAtom {
        &self.atoms[id]
    }

    pub fn atom_name(&self, id: AtomId) -> String {
        self.atoms[id].to_string()
    }

    pub fn lookup(&self, atom: &GroundAtom) -> Option<AtomId> {
        self.index.get(atom).copied()
    }

    /// Resolves textual atoms such as `Pneumonia(2)` or `Apply(Ann,Engineering)`.
    pub fn find(&self, text: &str) -> Option<AtomId> {
        let text = text.trim();
        let (pred, args) = match text.split_once('(') {
            Some((p, rest)) => {
                let inner = rest.strip_suffix(')')?;
                let args = inner
                    .split(',')
                    .map(|a| {
                        let a = a.trim();
                        match a.parse::<i64>() {
                            Ok(v) => Value::Int(v),
                            Err(_) => Value::Sym(a.to_string()),
                        }
                    })
                    .collect();
                (p.trim(), args)
            }
            None => (text, Vec::new()),
        };
        self.lookup(&GroundAtom { pred: pred.to_string(), args })
    }

    pub fn is_exogenous(&self, id: AtomId) -> bool {
        self.exogenous[id]
    }

    pub fn exogenous_ids(&self) -> Vec<AtomId> {
        (0..self.atoms.len()).filter(|&i| self.exogenous[i]).collect()
    }

    pub fn empty_set(&self) -> AtomSet {
        AtomSet::empty(self.atoms.len())
    }

    pub fn set_names(&self, s: &AtomSet) -> Vec<String> {
        s.ids().map(|i| self.atom_name(i)).collect()
    }

    /// Renders an interpretation as `{A, B}`.
    pub fn show_set(&self, s: &AtomSet) -> String {
        format!("{{{}}}", self.set_names(s).join(", "))
    }

    /// Exogenous atoms that occur in some rule body; the only ones whose truth
    /// value can influence the process.
    pub fn relevant_exogenous(&self) -> Vec<AtomId> {
        let mut used = BTreeSet::new();
        for r in &self.rules {
            if let Some(b) = &r.body {
                used.extend(b.atoms().into_iter().filter(|&a| self.exogenous[a]));
            }
        }
        used.into_iter().collect()
    }

    /// Grounds a closed query formula; atoms outside the Herbrand base are false.
    pub fn ground_formula(&self, f: &Formula) -> Result<GFormula, GroundError> {
        let hu = herbrand_universe(&self.vocab);
        let g = Grounder { vocab: &self.vocab, hu: &hu, index: &self.index, law: 0 };
        Ok(g.formula(f, &mut Vec::new(), true)?.expect("closed formulas never drop"))
    }

    /// The ground theory written back as a (variable-free) CP-theory.
    pub fn to_theory(&self) -> CPTheory {
        let laws = self
            .rules
            .iter()
            .map(|r| CPLaw {
                label: None,
                vars: Vec::new(),
                head: r.head.iter().map(|(a, p)| (self.atom_syntax(*a), p.clone())).collect(),
                body: r.body.as_ref().map(|b| self.formula_syntax(b)),
                source_index: r.rule_id,
            })
            .collect();
        CPTheory { vocab: self.vocab.clone(), laws }
    }

    fn atom_syntax(&self, id: AtomId) -> Atom {
        let a = &self.atoms[id];
        Atom::new(a.pred.clone(), a.args.iter().map(Value::to_term).collect())
    }

    pub fn formula_syntax(&self, f: &GFormula) -> Formula {
        let fold = |v: &[GFormula], unit: bool, and: bool| -> Formula {
            let mut it = v.iter().map(|g| self.formula_syntax(g));
            match it.next() {
                None => Formula::Truth(unit),
                Some(first) => it.fold(first, |acc, g| if and { Formula::and(acc, g) } else { Formula::or(acc, g) }),
            }
        };
        match f {
            GFormula::Atom(a) => Formula::Atom(self.atom_syntax(*a)),
            GFormula::Compare(op, l, r) => Formula::Compare(*op, l.to_term(), r.to_term()),
            GFormula::Not(g) => Formula::not(self.formula_syntax(g)),
            GFormula::And(v) => fold(v, true, true),
            GFormula::Or(v) => fold(v, false, false),
            GFormula::Truth(b) => Formula::Truth(*b),
        }
    }
}

pub fn ground_theory(theory: &CPTheory) -> Result<GroundTheory, GroundError> {
    let vocab = &theory.vocab;
    let hu = herbrand_universe(vocab);
    let mut atoms = Vec::new();
    let mut exo_flags = Vec::new();
    for decl in &vocab.predicates {
        let domains: Vec<Vec<Value>> = (0..decl.arity)
            .map(|i| match &decl.arg_sorts {
                Some(s) => sort_values(vocab, &s[i]),
                None => hu.clone(),
            })
            .collect();
        for args in product(&domains, MAX_ATOMS)? {
            atoms.push((GroundAtom { pred: decl.name.clone(), args }, decl.exogenous));
            if atoms.len() > MAX_ATOMS {
                return Err(GroundError::TooLarge { what: "atoms", limit: MAX_ATOMS });
            }
        }
    }
    atoms.sort();
    atoms.dedup_by(|a, b| a.0 == b.0);
    let mut index = HashMap::new();
    let mut list = Vec::with_capacity(atoms.len());
    for (i, (a, exo)) in atoms.into_iter().enumerate() {
        index.insert(a.clone(), i);
        list.push(a);
        exo_flags.push(exo);
    }
    let mut g = Grounder { vocab, hu: &hu, index: &index, law: 0 };
    let mut rules = Vec::new();
    for law in &theory.laws {
        g.law = law.source_index;
        g.ground_law(law, &mut rules)?;
    }
    Ok(GroundTheory { vocab: vocab.clone(), atoms: list, exogenous: exo_flags, rules, index })
}

fn herbrand_universe(vocab: &Vocabulary) -> Vec<Value> {
    let mut hu: BTreeSet<Value> = vocab.constants.iter().map(|c| Value::Sym(c.clone())).collect();
    for &(lo, hi) in vocab.ranges.values() {
        hu.extend((lo..=hi).map(Value::Int));
    }
    hu.into_iter().collect()
}

fn range_ints(vocab: &Vocabulary) -> Vec<Value> {
    let mut s = BTreeSet::new();
    for &(lo, hi) in vocab.ranges.values() {
        s.extend((lo..=hi).map(Value::Int));
    }
    s.into_iter().collect()
}

fn sort_values(vocab: &Vocabulary, sort: &str) -> Vec<Value> {
    if let Some(&(lo, hi)) = vocab.ranges.get(sort) {
        return (lo..=hi).map(Value::Int).collect();
    }
    let mut v: Vec<Value> = vocab.sorts.get(sort).into_iter().flatten().map(|c| Value::Sym(c.clone())).collect();
    v.sort();
    v.dedup();
    v
}

fn product(domains: &[Vec<Value>], limit: usize) -> Result<Vec<Vec<Value>>, GroundError> {
    let mut out = vec![Vec::new()];
    for d in domains {
        if out.len().saturating_mul(d.len()) > limit {
            return Err(GroundError::TooLarge { what: "instances", limit });
        }
        out = out
            .into_iter()
            .flat_map(|prefix| {
                d.iter().map(move |v| {
                    let mut p = prefix.clone();
                    p.push(v.clone());
                    p
                })
            })
            .collect();
    }
    Ok(out)
}

#[derive(Default)]
struct VarUse {
    sorts: Vec<String>,
    numeric: bool,
}

fn term_use(t: &Term, var: &str, numeric_ctx: bool, u: &mut VarUse) {
    match t {
        Term::Var(v) if v == var => u.numeric |= numeric_ctx,
        Term::Arith(_, a, b) => {
            term_use(a, var, true, u);
            term_use(b, var, true, u);
        }
        _ => {}
    }
}

fn atom_use(a: &Atom, var: &str, vocab: &Vocabulary, u: &mut VarUse) {
    let sorts = vocab.predicate(&a.pred, a.arity()).and_then(|d| d.arg_sorts.as_ref());
    for (i, t) in a.args.iter().enumerate() {
        if let (Term::Var(v), Some(s)) = (t, sorts) {
            if v == var {
                u.sorts.push(s[i].clone());
            }
        }
        term_use(t, var, false, u);
    }
}

fn formula_use(f: &Formula, var: &str, vocab: &Vocabulary, u: &mut VarUse) {
    match f {
        Formula::Atom(a) => atom_use(a, var, vocab, u),
        Formula::Compare(op, l, r) => {
            let ord = matches!(op, CmpOp::Lt | CmpOp::Le);
            term_use(l, var, ord, u);
            term_use(r, var, ord, u);
        }
        Formula::Not(g) => formula_use(g, var, vocab, u),
        Formula::And(a, b) | Formula::Or(a, b) => {
            formula_use(a, var, vocab, u);
            formula_use(b, var, vocab, u);
        }
        Formula::Forall(v, g) | Formula::Exists(v, g) => {
            if v != var {
                formula_use(g, var, vocab, u);
            }
        }
        Formula::Truth(_) => {}
    }
}

struct Grounder<'a> {
    vocab: &'a Vocabulary,
    hu: &'a [Value],
    index: &'a HashMap<GroundAtom, AtomId>,
    law: usize,
}

type Env = Vec<(String, Value)>;

impl Grounder<'_> {
    fn domain(&self, var: &str, u: VarUse) -> Result<Vec<Value>, GroundError> {
        let dom = if let Some((first, rest)) = u.sorts.split_first() {
            let mut d = sort_values(self.vocab, first);
            for s in rest {
                let other = sort_values(self.vocab, s);
                d.retain(|v| other.contains(v));
            }
            d
        } else if u.numeric {
            range_ints(self.vocab)
        } else {
            self.hu.to_vec()
        };
        if dom.is_empty() {
            return Err(GroundError::DomainEmpty { law: self.law, var: var.to_string() });
        }
        Ok(dom)
    }

    fn ground_law(&self, law: &CPLaw, out: &mut Vec<GroundLaw>) -> Result<(), GroundError> {
        let mut domains = Vec::new();
        for v in &law.vars {
            let mut u = VarUse::default();
            for (a, _) in &law.head {
                atom_use(a, v, self.vocab, &mut u);
            }
            if let Some(b) = &law.body {
                formula_use(b, v, self.vocab, &mut u);
            }
            domains.push(self.domain(v, u)?);
        }
        'subst: for vals in product(&domains, MAX_RULES)? {
            let env: Env = law.vars.iter().cloned().zip(vals).collect();
            // head disjuncts outside the Herbrand base leave their mass to the empty outcome
            let mut head = Vec::new();
            for (a, p) in &law.head {
                if let Some(id) = self.atom(a, &env)? {
                    head.push((id, p.clone()));
                }
            }
            if head.is_empty() {
                continue 'subst;
            }
            let body = match &law.body {
                Some(b) => match self.formula(b, &mut env.clone(), false)? {
                    Some(g) => Some(g),
                    None => continue 'subst,
                },
                None => None,
            };
            if out.len() >= MAX_RULES {
                return Err(GroundError::TooLarge { what: "rules", limit: MAX_RULES });
            }
            out.push(GroundLaw { rule_id: out.len(), origin: law.source_index, label: law.label.clone(), head, body });
        }
        Ok(())
    }

    fn term(&self, t: &Term, env: &Env) -> Result<Value, GroundError> {
        Ok(match t {
            Term::Const(c) => Value::Sym(c.clone()),
            Term::Int(v) => Value::Int(*v),
            Term::Var(v) => env
                .iter()
                .rev()
                .find(|(n, _)| n == v)
                .map(|(_, val)| val.clone())
                .expect("parser guarantees bound variables"),
            Term::Arith(op, a, b) => {
                let (x, y) = (self.term(a, env)?, self.term(b, env)?);
                match (&x, &y) {
                    (Value::Int(x), Value::Int(y)) => {
                        let r = match op {
                            ArithOp::Add => x.checked_add(*y),
                            ArithOp::Sub => x.checked_sub(*y),
                        };
                        Value::Int(r.ok_or_else(|| GroundError::ArithmeticOnNonInteger {
                            law: self.law,
                            msg: "integer overflow".to_string(),
                        })?)
                    }
                    _ => {
                        return Err(GroundError::ArithmeticOnNonInteger {
                            law: self.law,
                            msg: format!("arithmetic on non-integer values `{x}` and `{y}`"),
                        })
                    }
                }
            }
        })
    }

    /// `None` when the instantiated atom lies outside the Herbrand base.
    fn atom(&self, a: &Atom, env: &Env) -> Result<Option<AtomId>, GroundError> {
        let args = a.args.iter().map(|t| self.term(t, env)).collect::<Result<Vec<_>, _>>()?;
        Ok(self.index.get(&GroundAtom { pred: a.pred.clone(), args }).copied())
    }

    /// `None` signals that the enclosing rule instance must be dropped. Inside
    /// quantifiers, atoms outside the Herbrand base are simply false.
    fn formula(&self, f: &Formula, env: &mut Env, quantified: bool) -> Result<Option<GFormula>, GroundError> {
        Ok(Some(match f {
            Formula::Atom(a) => match self.atom(a, env)? {
                Some(id) => GFormula::Atom(id),
                None if quantified => GFormula::Truth(false),
                None => return Ok(None),
            },
            Formula::Compare(op, l, r) => {
                let (x, y) = (self.term(l, env)?, self.term(r, env)?);
                if matches!(op, CmpOp::Lt | CmpOp::Le) && !matches!((&x, &y), (Value::Int(_), Value::Int(_))) {
                    return Err(GroundError::ArithmeticOnNonInteger {
                        law: self.law,
                        msg: format!("ordering comparison on non-integer values `{x}` and `{y}`"),
                    });
                }
                GFormula::Compare(*op, x, y)
            }
            Formula::Truth(b) => GFormula::Truth(*b),
            Formula::Not(g) => match self.formula(g, env, quantified)? {
                Some(x) => GFormula::negate(x),
                None => return Ok(None),
            },
            Formula::And(a, b) | Formula::Or(a, b) => {
                let (Some(x), Some(y)) = (self.formula(a, env, quantified)?, self.formula(b, env, quantified)?) else {
                    return Ok(None);
                };
                if matches!(f, Formula::And(..)) {
                    GFormula::and_of(vec![x, y])
                } else {
                    GFormula::or_of(vec![x, y])
                }
            }
            Formula::Forall(v, g) | Formula::Exists(v, g) => {
                let mut u = VarUse::default();
                formula_use(g, v, self.vocab, &mut u);
                let dom = self.domain(v, u)?;
                let mut parts = Vec::with_capacity(dom.len());
                for val in dom {
                    env.push((v.clone(), val));
                    let part = self.formula(g, env, true);
                    env.pop();
                    parts.push(part?.expect("quantified grounding never drops"));
                }
                if matches!(f, Formula::Forall(..)) {
                    GFormula::and_of(parts)
                } else {
                    GFormula::or_of(parts)
                }
            }
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::ratio;
    use crate::syntax::{parse_theory, print_theory};

    #[test]
    fn quantified_law_over_constants() {
        let t = parse_theory("const John, Mary. pred Angina/1, Pneumonia/1. !x (Angina(x):0.2) <- Pneumonia(x).")
            .unwrap();
        let g = ground_theory(&t).unwrap();
        assert_eq!(g.rules.len(), 2);
        let ang = g.find("Angina(John)").unwrap();
        let pn = g.find("Pneumonia(John)").unwrap();
        assert_eq!(g.rules[0].head, vec![(ang, ratio(1, 5))]);
        assert_eq!(g.rules[0].body, Some(GFormula::Atom(pn)));
        assert_eq!(g.atom_name(g.rules[1].head[0].0), "Angina(Mary)");
        assert!(g.rules.iter().all(|r| r.origin == 0));
    }

    #[test]
    fn out_of_range_instances_are_dropped() {
        // Hand enumeration for days 1..3: d=1 and d=2 give Pneumonia(2), Pneumonia(3);
        // d=3 would need Pneumonia(4) and disappears.
        let src = "range day = 1..3. pred Pneumonia(day), Chestpain(day).\n\
                   !d (Pneumonia(d+1):0.1) <- Pneumonia(d).\n\
                   !d (Chestpain(d):0.6) <- Pneumonia(d).";
        let g = ground_theory(&parse_theory(src).unwrap()).unwrap();
        let heads: Vec<String> = g.rules.iter().map(|r| g.atom_name(r.head[0].0)).collect();
        assert_eq!(heads, vec!["Pneumonia(2)", "Pneumonia(3)", "Chestpain(1)", "Chestpain(2)", "Chestpain(3)"]);
        assert_eq!(g.len(), 6);
    }

    #[test]
    fn out_of_range_disjunct_is_dropped() {
        let src = "range t = 1..2. pred Sent(t), Recv(t).\n\
                   !t (Recv(t):0.8) or (Recv(t+1):0.1) <- Sent(t).";
        let g = ground_theory(&parse_theory(src).unwrap()).unwrap();
        assert_eq!(g.rules.len(), 2);
        assert_eq!(g.rules[0].head.len(), 2);
        assert_eq!(g.rules[1].head, vec![(g.find("Recv(2)").unwrap(), ratio(4, 5))]);
        assert_eq!(g.rules[1].empty_mass(), ratio(1, 5));
    }

    #[test]
    fn query_formulas() {
        let src = "range day = 1..2. pred Pneumonia(day).";
        let g = ground_theory(&parse_theory(src).unwrap()).unwrap();
        let f = crate::syntax::parse_formula("?d Pneumonia(d) & ~Pneumonia(1)", &g.vocab).unwrap();
        let gf = g.ground_formula(&f).unwrap();
        assert!(gf.holds(&AtomSet::from_ids(2, [1])));
        assert!(!gf.holds(&g.empty_set()));
    }

    #[test]
    fn ground_theory_is_fixed_by_regrounding() {
        let src = "pred P/0, Q/0. pred R/0 exogenous. (P:0.5) or (Q:1/3) <- R & ~Q. Q <- P.";
        let g = ground_theory(&parse_theory(src).unwrap()).unwrap();
        let again = ground_theory(&g.to_theory()).unwrap();
        assert_eq!(g.rules, again.rules);
        assert_eq!(g.atoms, again.atoms);
    }

    #[test]
    fn atom_sets_follow_polarity() {
        let src = "pred Treatment/0, Pneumonia/0, Fever/0, P/0. \
                   Fever <- ~Treatment & Pneumonia. Fever <- ~~P. Fever <- P & ~P.";
        let g = ground_theory(&parse_theory(src).unwrap()).unwrap();
        let id = |s: &str| g.find(s).unwrap();
        let (all, pos, neg) = body_atom_sets(&g.rules[0]);
        assert_eq!(all, BTreeSet::from([id("Treatment"), id("Pneumonia")]));
        assert_eq!(pos, BTreeSet::from([id("Pneumonia")]));
        assert_eq!(neg, BTreeSet::from([id("Treatment")]));
        let (_, pos, neg) = body_atom_sets(&g.rules[1]);
        assert_eq!(pos, BTreeSet::from([id("P")]));
        assert!(neg.is_empty());
        let (all, pos, neg) = body_atom_sets(&g.rules[2]);
        assert_eq!(all, BTreeSet::from([id("P")]));
        assert!(pos.is_empty());
        assert_eq!(neg, BTreeSet::from([id("P")]));
    }

    #[test]
    fn existential_body_expands_over_universe() {
        let src = "const A, B. pred NextTo/2, Pit/1, Breeze/1. !x Breeze(x) <- ?y (NextTo(x,y) & Pit(y)).";
        let g = ground_theory(&parse_theory(src).unwrap()).unwrap();
        let rule = g.rules.iter().find(|r| g.atom_name(r.head[0].0) == "Breeze(A)").unwrap();
        let (all, pos, neg) = body_atom_sets(rule);
        let names: BTreeSet<String> = all.iter().map(|&i| g.atom_name(i)).collect();
        assert_eq!(
            names,
            ["NextTo(A,A)", "NextTo(A,B)", "Pit(A)", "Pit(B)"].iter().map(|s| s.to_string()).collect()
        );
        assert_eq!(pos, all);
        assert!(neg.is_empty());
    }

    #[test]
    fn comparisons_are_kept_and_typed() {
        let src = "range t = 1..3. pred E(t), F(t). !a E(a) <- ?b (b < a & F(b)).";
        let g = ground_theory(&parse_theory(src).unwrap()).unwrap();
        assert_eq!(g.rules.len(), 3);
        let printed = print_theory(&g.to_theory());
        assert!(printed.contains("1 < 2 & F(1)"), "{printed}");
        let mut s = g.empty_set();
        s.insert(g.find("F(1)").unwrap());
        assert!(!g.rules[0].body_holds(&s));
        assert!(g.rules[1].body_holds(&s));
    }

    #[test]
    fn errors() {
        let src = "pred P/1. !x P(x).";
        assert!(matches!(ground_theory(&parse_theory(src).unwrap()), Err(GroundError::DomainEmpty { .. })));
        let src = "const A. range r = 1..2. pred P/1. !x P(x+1) <- P(x) & x = A.";
        let t = parse_theory(src).unwrap();
        // x ranges over integers because of the arithmetic; comparing with A is fine
        assert!(ground_theory(&t).is_ok());
        let src = "sort s = A, B. pred P(s), Q/1. !x Q(x+1) <- P(x).";
        assert!(matches!(
            ground_theory(&parse_theory(src).unwrap()),
            Err(GroundError::ArithmeticOnNonInteger { .. })
        ));
    }
}
