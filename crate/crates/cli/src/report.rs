//! Loading, context handling and the textual renderings shared by commands.

use std::fmt::{self, Write};
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use cplogic::analysis::{find_stratification, layer_count, relevant_contexts};
use cplogic::atomset::AtomSet;
use cplogic::bayes::{bn_to_cp, parse_bn};
use cplogic::dist::Distribution;
use cplogic::ground::{ground_theory, GroundTheory};
use cplogic::lpad::{instance_semantics, LpadError};
use cplogic::prob::{format_decimal, Prob};
use cplogic::process::{tree_semantics, ProcessError};
use cplogic::syntax::{parse_theory_with, CPTheory, ParseOptions};

/// A failure carrying its own exit status: 2 for invalid or unsound
/// theories, 3 when the two semantics disagree.
#[derive(Debug)]
pub struct Verdict {
    pub code: u8,
    pub msg: String,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.msg)
    }
}

impl std::error::Error for Verdict {}

pub fn invalid(msg: String) -> anyhow::Error {
    Verdict { code: 2, msg }.into()
}

pub fn mismatch(msg: String) -> anyhow::Error {
    Verdict { code: 3, msg }.into()
}

/// Reads a theory file; `.json` files are Bayesian networks and are translated.
pub fn load_theory(path: &Path, opts: ParseOptions) -> Result<CPTheory> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    theory_from_text(path, &text, opts)
}

pub fn theory_from_text(path: &Path, text: &str, opts: ParseOptions) -> Result<CPTheory> {
    if path.extension().is_some_and(|e| e == "json") {
        let bn = parse_bn(text).map_err(|e| anyhow!("{}: {e}", path.display()))?;
        return Ok(bn_to_cp(&bn));
    }
    parse_theory_with(text, opts).map_err(|e| anyhow!("{}:{e} [{}]", path.display(), e.code()))
}

pub fn ground(theory: &CPTheory) -> Result<GroundTheory> {
    ground_theory(theory).map_err(|e| anyhow!("grounding failed: {e}"))
}

/// Splits `A, P(x,y), B` at top-level commas.
pub fn split_atoms(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for c in text.chars() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(std::mem::take(&mut cur));
                continue;
            }
            _ => {}
        }
        cur.push(c);
    }
    out.push(cur);
    out.into_iter().map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
}

/// The context named by `--context` values; unnamed exogenous atoms are false.
pub fn parse_context(g: &GroundTheory, specs: &[String]) -> Result<AtomSet> {
    let mut ctx = g.empty_set();
    for spec in specs {
        for name in split_atoms(spec) {
            let id = g.find(&name).ok_or_else(|| anyhow!("unknown atom `{name}` in context"))?;
            if !g.is_exogenous(id) {
                bail!("`{name}` is not exogenous and cannot be part of a context");
            }
            ctx.insert(id);
        }
    }
    Ok(ctx)
}

pub fn contexts(g: &GroundTheory, specs: &[String], all: bool) -> Result<Vec<AtomSet>> {
    if all {
        if g.relevant_exogenous().len() > 16 {
            bail!("too many relevant exogenous atoms to enumerate every context");
        }
        Ok(relevant_contexts(g))
    } else {
        Ok(vec![parse_context(g, specs)?])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Semantics {
    Tree,
    Instances,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Rational,
    Decimal,
    Tsv,
}

pub fn tree_dist(g: &GroundTheory, ctx: &AtomSet) -> Result<Distribution> {
    tree_semantics(g, ctx).map_err(|e| match e {
        ProcessError::Invalid { .. } => invalid(format!("INVALID (no execution model) in context {}", g.show_set(ctx))),
        other => anyhow!("{other}"),
    })
}

pub fn instance_dist(g: &GroundTheory, ctx: &AtomSet) -> Result<Distribution> {
    instance_semantics(g, ctx).map_err(|e| match e {
        LpadError::Unsound { selection } => {
            invalid(format!("UNSOUND in context {}: instance {selection} has no total model", g.show_set(ctx)))
        }
        other => anyhow!("{other}"),
    })
}

/// The distribution in `ctx` under the requested semantics; `Both` insists
/// that the two agree exactly.
pub fn semantics(g: &GroundTheory, ctx: &AtomSet, which: Semantics) -> Result<Distribution> {
    match which {
        Semantics::Tree => tree_dist(g, ctx),
        Semantics::Instances => instance_dist(g, ctx),
        Semantics::Both => {
            let t = tree_dist(g, ctx)?;
            let i = instance_dist(g, ctx)?;
            if let Some((set, a, b)) = t.first_difference(&i) {
                return Err(mismatch(format!(
                    "semantics differ in context {} at {}: tree {a}, instances {b}",
                    g.show_set(ctx),
                    g.show_set(set)
                )));
            }
            Ok(t)
        }
    }
}

fn pad(s: &str, width: usize) -> String {
    format!("{s:<width$}")
}

pub fn render_prob(p: &Prob, format: Format, digits: usize) -> String {
    match format {
        Format::Rational => format!("{p}  ({})", format_decimal(p, digits)),
        Format::Decimal => format_decimal(p, digits),
        Format::Tsv => format!("{p}\t{}", format_decimal(p, digits)),
    }
}

/// Distribution rows, most probable first.
pub fn render_dist(d: &Distribution, g: &GroundTheory, format: Format, digits: usize) -> String {
    let rows = d.rows(g);
    let mut out = String::new();
    let set = |names: &[String]| format!("{{{}}}", names.join(", "));
    match format {
        Format::Tsv => {
            out.push_str("interpretation\tprobability\tdecimal\n");
            for (names, p) in &rows {
                writeln!(out, "{}\t{p}\t{}", set(names), format_decimal(p, digits)).unwrap();
            }
        }
        Format::Rational => {
            let w = rows.iter().map(|(_, p)| p.to_string().len()).max().unwrap_or(0);
            for (names, p) in &rows {
                writeln!(out, "{}  {}  {}", pad(&p.to_string(), w), format_decimal(p, digits), set(names)).unwrap();
            }
        }
        Format::Decimal => {
            for (names, p) in &rows {
                writeln!(out, "{}  {}", format_decimal(p, digits), set(names)).unwrap();
            }
        }
    }
    out
}

/// Stratification summary and witness layers.
pub fn stratification_lines(g: &GroundTheory) -> (bool, String) {
    match find_stratification(g) {
        Some(lambda) => {
            let n = layer_count(&lambda);
            let mut s = String::new();
            for layer in 0..n {
                let names: Vec<String> = (0..g.len()).filter(|&a| lambda[a] == layer).map(|a| g.atom_name(a)).collect();
                writeln!(s, "  layer {layer}: {}", names.join(", ")).unwrap();
            }
            (true, s)
        }
        None => (false, String::new()),
    }
}

pub fn plural(n: u64, word: &str) -> String {
    if n == 1 {
        format!("{n} {word}")
    } else {
        format!("{n} {word}s")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use cplogic::prob::ratio;

    #[test]
    fn atoms_split_at_top_level() {
        assert_eq!(split_atoms("A, P(x,y) ,B"), ["A", "P(x,y)", "B"]);
        assert!(split_atoms(" , ").is_empty());
    }

    #[test]
    fn probability_formats() {
        let p = ratio(19, 25);
        assert_eq!(render_prob(&p, Format::Rational, 6), "19/25  (0.760000)");
        assert_eq!(render_prob(&p, Format::Decimal, 3), "0.760");
        assert_eq!(render_prob(&p, Format::Tsv, 1), "19/25\t0.8");
        assert_eq!(plural(1, "law"), "1 law");
        assert_eq!(plural(0, "law"), "0 laws");
    }
}
