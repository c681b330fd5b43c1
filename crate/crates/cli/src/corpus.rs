//! Golden-file runner over a directory of theories.
//!
//! `name.cpl` and `name.json` (a Bayesian network) are run as they are;
//! `base.tag.json` is an intervention script applied to `base.cpl`. Each
//! entry's report is compared with `<file name>.expected`.

use std::fmt::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use cplogic::analysis::relevant_contexts;
use cplogic::intervene::{apply_intervention, parse_script};
use cplogic::lpad::{instance_semantics, LpadError};
use cplogic::process::{tree_semantics, ProcessError};
use cplogic::syntax::{CPTheory, ParseOptions};

use crate::report::{ground, load_theory, plural, render_dist, stratification_lines, Format};

pub struct Entry {
    pub path: PathBuf,
    pub script_base: Option<PathBuf>,
}

pub fn entries(dir: &Path) -> Result<Vec<Entry>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("cannot read corpus directory {}", dir.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    files.sort();
    let mut out = Vec::new();
    for path in files {
        let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("").to_string();
        match ext {
            "cpl" => out.push(Entry { path, script_base: None }),
            "json" => match stem.split_once('.') {
                Some((base, _)) => {
                    let base = dir.join(format!("{base}.cpl"));
                    out.push(Entry { path, script_base: Some(base) });
                }
                None => out.push(Entry { path, script_base: None }),
            },
            _ => {}
        }
    }
    Ok(out)
}

fn entry_theory(e: &Entry) -> Result<CPTheory> {
    match &e.script_base {
        None => load_theory(&e.path, ParseOptions::default()),
        Some(base) => {
            let t = load_theory(base, ParseOptions::default())?;
            let script = parse_script(&std::fs::read_to_string(&e.path)?)?;
            Ok(apply_intervention(&t, &script, ParseOptions::default())?)
        }
    }
}

/// Deterministic report: stratification, then per relevant context the
/// verdict of both semantics and the distribution.
pub fn report(e: &Entry) -> String {
    match report_inner(e) {
        Ok(s) => s,
        Err(err) => {
            let msg = err.to_string();
            // keep goldens independent of where the corpus lives
            let name = e.path.file_name().unwrap().to_string_lossy().to_string();
            let msg = match &e.script_base {
                None => msg.replace(&e.path.display().to_string(), &name),
                Some(b) => msg.replace(&b.display().to_string(), &b.file_name().unwrap().to_string_lossy()),
            };
            format!("error: {msg}\n")
        }
    }
}

fn report_inner(e: &Entry) -> Result<String> {
    let theory = entry_theory(e)?;
    let g = ground(&theory)?;
    let mut out = String::new();
    writeln!(out, "{} over {}", plural(g.rules.len() as u64, "ground law"), plural(g.len() as u64, "atom")).unwrap();
    let (strat, layers) = stratification_lines(&g);
    if strat {
        writeln!(out, "stratified").unwrap();
        out.push_str(&layers);
    } else {
        writeln!(out, "not stratified").unwrap();
    }
    for ctx in relevant_contexts(&g) {
        let tree = tree_semantics(&g, &ctx);
        let inst = instance_semantics(&g, &ctx);
        let verdict = match (&tree, &inst) {
            (Ok(t), Ok(i)) if t == i => "valid; sound".to_string(),
            (Ok(_), Ok(_)) => "MISMATCH between tree and instance semantics".to_string(),
            (Err(ProcessError::Invalid { .. }), Ok(_)) => "INVALID (no execution model); sound".to_string(),
            (Err(ProcessError::Invalid { .. }), Err(LpadError::Unsound { .. })) => {
                "INVALID (no execution model); unsound".to_string()
            }
            (Ok(_), Err(LpadError::Unsound { .. })) => "MISMATCH: valid but unsound".to_string(),
            (Ok(_), Err(err @ LpadError::ResourceLimit { .. })) => format!("valid; instances not enumerated ({err})"),
            (Err(err), _) => format!("error: {err}"),
        };
        writeln!(out, "context {}: {verdict}", g.show_set(&ctx)).unwrap();
        let shown = tree.ok().or(inst.ok());
        if let Some(d) = shown {
            for line in render_dist(&d, &g, Format::Rational, 6).lines() {
                writeln!(out, "  {line}").unwrap();
            }
        }
    }
    Ok(out)
}

pub fn golden_path(e: &Entry) -> PathBuf {
    let mut name = e.path.file_name().unwrap().to_os_string();
    name.push(".expected");
    e.path.with_file_name(name)
}

pub enum Outcome {
    Ok,
    Blessed,
    Missing,
    Differs { expected: String, actual: String },
}

pub fn run_entry(e: &Entry, bless: bool) -> Result<Outcome> {
    let actual = report(e);
    let golden = golden_path(e);
    if bless {
        std::fs::write(&golden, &actual)?;
        return Ok(Outcome::Blessed);
    }
    match std::fs::read_to_string(&golden) {
        Ok(expected) if expected == actual => Ok(Outcome::Ok),
        Ok(expected) => Ok(Outcome::Differs { expected, actual }),
        Err(_) => Ok(Outcome::Missing),
    }
}
