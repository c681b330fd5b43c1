use std::fmt::Write;

use num_traits::One;

use super::ast::*;
use crate::prob::format_literal;

pub fn print_theory(t: &CPTheory) -> String {
    let mut out = print_vocabulary(&t.vocab);
    if !out.is_empty() && !t.laws.is_empty() {
        out.push('\n');
    }
    for law in &t.laws {
        out.push_str(&print_law(law));
        out.push('\n');
    }
    out
}

pub fn print_vocabulary(v: &Vocabulary) -> String {
    let mut out = String::new();
    for (name, (lo, hi)) in &v.ranges {
        writeln!(out, "range {name} = {lo}..{hi}.").unwrap();
    }
    for (name, members) in &v.sorts {
        writeln!(out, "sort {name} = {}.", members.join(", ")).unwrap();
    }
    let loose: Vec<&str> = v
        .constants
        .iter()
        .filter(|c| !v.sorts.values().any(|m| m.contains(c)))
        .map(String::as_str)
        .collect();
    if !loose.is_empty() {
        writeln!(out, "const {}.", loose.join(", ")).unwrap();
    }
    for p in &v.predicates {
        match &p.arg_sorts {
            Some(s) => write!(out, "pred {}({})", p.name, s.join(", ")).unwrap(),
            None => write!(out, "pred {}/{}", p.name, p.arity).unwrap(),
        }
        out.push_str(if p.exogenous { " exogenous.\n" } else { ".\n" });
    }
    out
}

pub fn print_law(law: &CPLaw) -> String {
    let mut out = String::new();
    if let Some(l) = &law.label {
        write!(out, "@{l} ").unwrap();
    }
    if !law.vars.is_empty() {
        write!(out, "!{} ", law.vars.join(",")).unwrap();
    }
    if law.head.len() == 1 && law.head[0].1.is_one() {
        write!(out, "{}", law.head[0].0).unwrap();
    } else {
        let parts: Vec<String> = law.head.iter().map(|(a, p)| format!("({a}:{})", format_literal(p))).collect();
        out.push_str(&parts.join(" or "));
    }
    if let Some(b) = &law.body {
        write!(out, " <- {}", print_formula(b)).unwrap();
    }
    out.push('.');
    out
}

pub fn print_formula(f: &Formula) -> String {
    let mut out = String::new();
    fmt_formula(f, &mut out);
    out
}

fn is_quant(f: &Formula) -> bool {
    matches!(f, Formula::Forall(..) | Formula::Exists(..))
}

fn wrapped(f: &Formula, parens: bool, out: &mut String) {
    if parens {
        out.push('(');
        fmt_formula(f, out);
        out.push(')');
    } else {
        fmt_formula(f, out);
    }
}

fn fmt_formula(f: &Formula, out: &mut String) {
    match f {
        Formula::Atom(a) => write!(out, "{a}").unwrap(),
        Formula::Compare(op, l, r) => write!(out, "{l} {} {r}", op.symbol()).unwrap(),
        Formula::Truth(b) => out.push_str(if *b { "true" } else { "false" }),
        Formula::Not(g) => {
            out.push('~');
            let p = matches!(**g, Formula::And(..) | Formula::Or(..) | Formula::Compare(..)) || is_quant(g);
            wrapped(g, p, out);
        }
        Formula::And(a, b) => {
            wrapped(a, matches!(**a, Formula::Or(..)) || is_quant(a), out);
            out.push_str(" & ");
            wrapped(b, matches!(**b, Formula::Or(..) | Formula::And(..)) || is_quant(b), out);
        }
        Formula::Or(a, b) => {
            wrapped(a, is_quant(a), out);
            out.push_str(" | ");
            wrapped(b, matches!(**b, Formula::Or(..)) || is_quant(b), out);
        }
        Formula::Forall(v, g) | Formula::Exists(v, g) => {
            out.push(if matches!(f, Formula::Forall(..)) { '!' } else { '?' });
            out.push_str(v);
            out.push(' ');
            wrapped(g, !matches!(**g, Formula::Atom(_) | Formula::Truth(_)), out);
        }
    }
}
