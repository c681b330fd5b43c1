//! Shared helpers for the integration tests: corpus loading and random
//! theories and programs.

#![allow(dead_code)]

use std::path::PathBuf;

use cplogic::atomset::AtomSet;
use cplogic::bayes::{bn_to_cp, parse_bn};
use cplogic::ground::{ground_theory, GFormula, GroundTheory};
use cplogic::syntax::{parse_theory, CPTheory};
use cplogic::wfs::{Program, WfRule};
use rand::seq::IndexedRandom;
use rand::Rng;

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus")
}

pub fn read(name: &str) -> String {
    std::fs::read_to_string(corpus_dir().join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn parse(name: &str) -> CPTheory {
    let text = read(name);
    if name.ends_with(".json") {
        bn_to_cp(&parse_bn(&text).unwrap())
    } else {
        parse_theory(&text).unwrap_or_else(|e| panic!("{name}: {e}"))
    }
}

pub fn load(name: &str) -> GroundTheory {
    ground_theory(&parse(name)).unwrap()
}

/// Every corpus theory that parses, by file name. Intervention scripts are
/// left out.
pub fn corpus_theories() -> Vec<(String, GroundTheory)> {
    let mut names: Vec<String> = std::fs::read_dir(corpus_dir())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".cpl") || (n.ends_with(".json") && n.matches('.').count() == 1))
        .collect();
    names.sort();
    names
        .into_iter()
        .filter_map(|n| {
            let text = read(&n);
            let theory = if n.ends_with(".json") { Some(bn_to_cp(&parse_bn(&text).ok()?)) } else { parse_theory(&text).ok() };
            Some((n, ground_theory(&theory?).ok()?))
        })
        .collect()
}

pub fn set(g: &GroundTheory, names: &[&str]) -> AtomSet {
    AtomSet::from_ids(g.len(), names.iter().map(|n| g.find(n).unwrap_or_else(|| panic!("no atom {n}"))))
}

pub fn atom(g: &GroundTheory, name: &str) -> usize {
    g.find(name).unwrap_or_else(|| panic!("no atom {name}"))
}

/// Rule id of the only ground law with `name` among its head atoms.
pub fn rule_with_head(g: &GroundTheory, name: &str) -> usize {
    let a = atom(g, name);
    let hits: Vec<usize> =
        g.rules.iter().filter(|r| r.head.iter().any(|(h, _)| *h == a)).map(|r| r.rule_id).collect();
    assert_eq!(hits.len(), 1, "laws with head {name}: {hits:?}");
    hits[0]
}

/// The last integer argument of each atom, or 0: the timing of the
/// time-indexed corpus theories.
pub fn last_int_timing(g: &GroundTheory) -> Vec<u64> {
    g.atoms
        .iter()
        .map(|a| {
            a.args
                .iter()
                .rev()
                .find_map(|v| match v {
                    cplogic::ground::Value::Int(i) => Some(*i as u64),
                    _ => None,
                })
                .unwrap_or(0)
        })
        .collect()
}

/// Source text of a random propositional theory over at most six atoms and
/// six laws. With `stratified`, every negative body atom sits on a strictly
/// lower layer than the heads and every positive one on a layer no higher,
/// exogenous atoms counting as lowest.
pub fn random_theory<R: Rng>(rng: &mut R, stratified: bool) -> String {
    let n_exo = rng.random_range(0..=2);
    let n_endo = rng.random_range(1..=6 - n_exo);
    let exo: Vec<String> = (0..n_exo).map(|i| format!("E{i}")).collect();
    let endo: Vec<String> = (0..n_endo).map(|i| format!("A{i}")).collect();
    let layer: Vec<u32> = (0..n_endo).map(|_| rng.random_range(0..3)).collect();
    let mut src = String::new();
    if !exo.is_empty() {
        let decls: Vec<String> = exo.iter().map(|e| format!("{e}/0")).collect();
        src += &format!("pred {} exogenous.\n", decls.join(", "));
    }
    let decls: Vec<String> = endo.iter().map(|a| format!("{a}/0")).collect();
    src += &format!("pred {}.\n", decls.join(", "));

    for _ in 0..rng.random_range(1..=6) {
        let k = rng.random_range(1..=n_endo.min(2));
        let heads: Vec<usize> = rand::seq::index::sample(rng, n_endo, k).into_vec();
        let mut left = 10;
        let mut parts = Vec::new();
        for (i, &h) in heads.iter().enumerate() {
            let reserve = (k - i - 1) as i32;
            let n = if i + 1 == k && rng.random_bool(0.3) { left } else { rng.random_range(1..=left - reserve) };
            left -= n;
            parts.push(format!("({}:{})", endo[h], if n == 10 { "1".to_string() } else { format!("{n}/10") }));
        }
        let low = heads.iter().map(|&h| layer[h]).min().unwrap();
        let mut lits = Vec::new();
        for _ in 0..rng.random_range(0..=3) {
            let pos = rng.random_bool(0.6);
            let pick = rng.random_range(0..n_exo + n_endo);
            let (name, ok) = if pick < n_exo {
                (&exo[pick], true)
            } else {
                let b = pick - n_exo;
                (&endo[b], if pos { layer[b] <= low } else { layer[b] < low })
            };
            if stratified && !ok {
                continue;
            }
            lits.push(if pos { name.clone() } else { format!("~{name}") });
        }
        let body = match lits.len() {
            0 => String::new(),
            3 if rng.random_bool(0.3) => format!(" <- ({} | {}) & {}", lits[0], lits[1], lits[2]),
            _ => format!(" <- {}", lits.join(" & ")),
        };
        src += &format!("{}{body}.\n", parts.join(" or "));
    }
    src
}

pub fn random_ground_theory<R: Rng>(rng: &mut R, stratified: bool) -> (String, GroundTheory) {
    let src = random_theory(rng, stratified);
    let g = ground_theory(&parse_theory(&src).unwrap_or_else(|e| panic!("{e}\n{src}"))).unwrap();
    (src, g)
}

fn random_literal<R: Rng>(rng: &mut R, n: usize) -> GFormula {
    let a = GFormula::Atom(rng.random_range(0..n));
    if rng.random_bool(0.4) {
        GFormula::Not(Box::new(a))
    } else {
        a
    }
}

/// A random normal program over at most eight atoms, some of them open, with
/// a random assignment of the open atoms.
pub fn random_program<R: Rng>(rng: &mut R) -> (Program, AtomSet) {
    let n = rng.random_range(1..=8);
    let open: Vec<bool> = (0..n).map(|_| rng.random_bool(0.2)).collect();
    let defined: Vec<usize> = (0..n).filter(|&a| !open[a]).collect();
    let mut rules = Vec::new();
    if !defined.is_empty() {
        for _ in 0..rng.random_range(0..=2 * n) {
            let head = *defined.choose(rng).unwrap();
            let lits: Vec<GFormula> = (0..rng.random_range(0..=3)).map(|_| random_literal(rng, n)).collect();
            let body = match lits.len() {
                0 => None,
                1 => Some(lits.into_iter().next().unwrap()),
                _ if rng.random_bool(0.2) => Some(GFormula::Or(lits)),
                _ => Some(GFormula::And(lits)),
            };
            rules.push(WfRule { head, body });
        }
    }
    let truth = AtomSet::from_ids(n, (0..n).filter(|&a| open[a] && rng.random_bool(0.5)));
    (Program::new(n, rules, open).unwrap(), truth)
}
