use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use cplogic::analysis::validity_by_context;
use cplogic::atomset::AtomSet;
use cplogic::bayes::{bn_to_cp, parse_bn};
use cplogic::ground::GroundTheory;
use cplogic::intervene::{apply_intervention, parse_script, InterventionScript, RuleSelector};
use cplogic::lpad::{enumerate_live_selections, instance, is_sound, DEFAULT_SELECTION_CAP};
use cplogic::process::{
    build_execution_model, enumerate_execution_models, root_state, to_dot, to_json, BuildConfig, ExecutionTree, Mode,
    Policy,
};
use cplogic::syntax::{parse_formula, print_theory, ParseOptions};
use cplogic::wfs::{well_founded_trace, WfStep};
use serde_json::json;

mod corpus;
mod report;

use report::{Format, Semantics, Verdict};

#[derive(Parser)]
#[command(name = "cplogic", version, about = "Interpreter and analysis toolkit for CP-logic theories")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct TheoryArgs {
    /// Theory file (`.cpl`), or a Bayesian network (`.json`)
    file: PathBuf,
    /// Declare unknown predicates and constants on first use
    #[arg(long)]
    auto_declare: bool,
}

#[derive(clap::Args)]
struct ContextArgs {
    /// True exogenous atoms, comma separated; the others are false
    #[arg(long, value_name = "ATOMS")]
    context: Vec<String>,
    /// Run every assignment of the exogenous atoms that occur in bodies
    #[arg(long, conflicts_with = "context")]
    all_contexts: bool,
}

#[derive(clap::Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value = "both")]
    semantics: Semantics,
    #[arg(long, value_enum, default_value = "rational")]
    format: Format,
    /// Digits after the decimal point
    #[arg(long, default_value_t = 6)]
    digits: usize,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum DumpFormat {
    Dot,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum ModeArg {
    Weak,
    Full,
}

#[derive(Subcommand)]
enum Command {
    /// Stratification, validity per context and soundness
    Check {
        #[command(flatten)]
        theory: TheoryArgs,
    },
    /// Print the ground theory
    Ground {
        #[command(flatten)]
        theory: TheoryArgs,
    },
    /// Print the distribution over final interpretations
    Dist {
        #[command(flatten)]
        theory: TheoryArgs,
        #[command(flatten)]
        ctx: ContextArgs,
        #[command(flatten)]
        out: OutputArgs,
        /// Print the ground theory to stderr first
        #[arg(long)]
        dump_ground: bool,
        /// Write the well-founded induction of every instance as JSON
        #[arg(long, value_name = "FILE")]
        trace_wfs: Option<PathBuf>,
    },
    /// Probability that a closed formula holds
    Query {
        #[command(flatten)]
        theory: TheoryArgs,
        formula: String,
        #[command(flatten)]
        ctx: ContextArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Build or enumerate execution trees
    Tree {
        #[command(flatten)]
        theory: TheoryArgs,
        #[arg(long, value_name = "ATOMS")]
        context: Vec<String>,
        /// first, seed:<n> or all
        #[arg(long, default_value = "first")]
        policy: String,
        #[arg(long, value_enum, default_value = "full")]
        mode: ModeArg,
        #[arg(long, value_enum)]
        dump_tree: Option<DumpFormat>,
    },
    /// Translate a Bayesian network into a theory
    ImportBn {
        file: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Remove and add laws
    Intervene {
        #[command(flatten)]
        theory: TheoryArgs,
        /// Law to remove: source index (0-based) or label
        #[arg(long, value_name = "SELECTOR")]
        remove: Vec<RuleSelector>,
        /// Law to add, in theory syntax
        #[arg(long, value_name = "LAW")]
        add: Vec<String>,
        /// JSON script with `remove` and `add` lists
        #[arg(long, value_name = "FILE")]
        script: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Golden-file corpus
    Corpus {
        #[command(subcommand)]
        action: CorpusAction,
    },
}

#[derive(Subcommand)]
enum CorpusAction {
    /// Compare every corpus entry with its golden file
    Run {
        dir: PathBuf,
        /// Rewrite the golden files instead of comparing
        #[arg(long)]
        bless: bool,
    },
}

fn opts(t: &TheoryArgs) -> ParseOptions {
    ParseOptions { auto_declare: t.auto_declare }
}

fn load(t: &TheoryArgs) -> Result<GroundTheory> {
    report::ground(&report::load_theory(&t.file, opts(t))?)
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_check(t: &TheoryArgs) -> Result<()> {
    let g = load(t)?;
    let (strat, layers) = report::stratification_lines(&g);
    let validity = validity_by_context(&g).map_err(|e| anyhow!("{e}"))?;
    let bad: Vec<&AtomSet> = validity.iter().filter(|(_, v)| !v).map(|(c, _)| c).collect();
    let verdict = match bad.len() {
        0 => "valid".to_string(),
        n if n == validity.len() => "INVALID (no execution model)".to_string(),
        n => format!("INVALID (no execution model) in {n} of {} contexts", validity.len()),
    };
    let layer_count = layers.lines().count() as u64;
    let strat_text = if strat { format!("stratified ({})", report::plural(layer_count, "layer")) } else { "not stratified".into() };
    println!("{strat_text}; {verdict}");
    println!("{} over {}", report::plural(g.rules.len() as u64, "ground law"), report::plural(g.len() as u64, "atom"));
    print!("{layers}");
    for (ctx, valid) in &validity {
        let sound = is_sound(&g, ctx).map_err(|e| anyhow!("{e}"))?;
        println!(
            "context {}: {}; {}",
            g.show_set(ctx),
            if *valid { "valid" } else { "INVALID" },
            if sound { "sound" } else { "unsound" }
        );
    }
    if bad.is_empty() {
        Ok(())
    } else {
        Err(Verdict { code: 2, msg: verdict }.into())
    }
}

fn trace_json(g: &GroundTheory, ctx: &AtomSet) -> Result<serde_json::Value> {
    let open = root_state(g, ctx);
    let mut runs = Vec::new();
    for (sel, p) in enumerate_live_selections(g, ctx, DEFAULT_SELECTION_CAP).map_err(|e| anyhow!("{e}"))? {
        let (model, steps) = well_founded_trace(&instance(g, &sel), &open);
        let steps: Vec<serde_json::Value> = steps
            .iter()
            .map(|s| match s {
                WfStep::MakeTrue { atom, rule } => json!({"make_true": g.atom_name(*atom), "rule": rule}),
                WfStep::MakeFalse { atoms } => {
                    json!({"make_false": atoms.iter().map(|&a| g.atom_name(a)).collect::<Vec<_>>()})
                }
            })
            .collect();
        let values: serde_json::Map<String, serde_json::Value> =
            (0..g.len()).map(|a| (g.atom_name(a), json!(model.get(a)))).collect();
        runs.push(json!({
            "selection": sel.describe(g),
            "probability": p.to_string(),
            "steps": steps,
            "model": values,
        }));
    }
    Ok(json!({"context": g.set_names(ctx), "instances": runs}))
}

fn cmd_dist(t: &TheoryArgs, c: &ContextArgs, o: &OutputArgs, dump_ground: bool, trace: Option<&Path>) -> Result<()> {
    let g = load(t)?;
    if dump_ground {
        eprint!("{}", print_theory(&g.to_theory()));
    }
    let ctxs = report::contexts(&g, &c.context, c.all_contexts)?;
    if let Some(path) = trace {
        let traces = ctxs.iter().map(|ctx| trace_json(&g, ctx)).collect::<Result<Vec<_>>>()?;
        std::fs::write(path, serde_json::to_string_pretty(&traces)?)
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    for ctx in &ctxs {
        let d = report::semantics(&g, ctx, o.semantics)?;
        if c.all_contexts {
            println!("# context {}", g.show_set(ctx));
        }
        print!("{}", report::render_dist(&d, &g, o.format, o.digits));
    }
    Ok(())
}

fn cmd_query(t: &TheoryArgs, formula: &str, c: &ContextArgs, o: &OutputArgs) -> Result<()> {
    let g = load(t)?;
    let f = parse_formula(formula, &g.vocab).map_err(|e| anyhow!("query {e} [{}]", e.code()))?;
    let gf = g.ground_formula(&f).map_err(|e| anyhow!("{e}"))?;
    let ctxs = report::contexts(&g, &c.context, c.all_contexts)?;
    if o.format == Format::Tsv {
        println!("{}probability\tdecimal", if c.all_contexts { "context\t" } else { "" });
    }
    for ctx in &ctxs {
        let d = report::semantics(&g, ctx, o.semantics)?;
        let p = d.mass_where(|s| gf.holds(s));
        let shown = report::render_prob(&p, o.format, o.digits);
        match (c.all_contexts, o.format) {
            (false, _) => println!("{shown}"),
            (true, Format::Tsv) => println!("{}\t{shown}", g.show_set(ctx)),
            (true, _) => println!("{}  {shown}", g.show_set(ctx)),
        }
    }
    Ok(())
}

fn parse_policy(s: &str) -> Result<Option<Policy>> {
    match s {
        "first" => Ok(Some(Policy::FirstEligible)),
        "all" => Ok(None),
        _ => match s.strip_prefix("seed:").map(str::parse::<u64>) {
            Some(Ok(n)) => Ok(Some(Policy::SeededRandom(n))),
            _ => bail!("unknown policy `{s}`; expected first, seed:<n> or all"),
        },
    }
}

fn cmd_tree(t: &TheoryArgs, context: &[String], policy: &str, mode: ModeArg, dump: Option<DumpFormat>) -> Result<()> {
    let g = load(t)?;
    let ctx = report::parse_context(&g, context)?;
    let mode = if mode == ModeArg::Weak { Mode::Weak } else { Mode::Full };
    let cfg = BuildConfig::with_mode(mode);
    let trees: Vec<ExecutionTree> = match parse_policy(policy)? {
        Some(p) => match build_execution_model(&g, &ctx, &p, &cfg) {
            Ok(tree) => vec![tree],
            Err(cplogic::process::ProcessError::Invalid { .. }) => vec![],
            Err(e) => bail!("{e}"),
        },
        None => enumerate_execution_models(&g, &ctx, &cfg).map_err(|e| anyhow!("{e}"))?,
    };
    if trees.is_empty() {
        return Err(report::invalid(format!("INVALID (no execution model) in context {}", g.show_set(&ctx))));
    }
    let dists: Vec<_> = trees.iter().map(ExecutionTree::leaf_distribution).collect();
    let identical = dists.windows(2).all(|w| w[0] == w[1]);
    let mut summary = String::new();
    writeln!(summary, "{}", report::plural(trees.len() as u64, "execution model")).unwrap();
    for (i, tree) in trees.iter().enumerate() {
        let leaves = {
            let mut n = 0;
            tree.visit(|v| n += usize::from(v.node.is_leaf()));
            n
        };
        writeln!(summary, "tree {}: {} nodes, {} leaves", i + 1, tree.node_count(), leaves).unwrap();
    }
    if trees.len() > 1 {
        writeln!(summary, "distributions identical: {}", if identical { "yes" } else { "no" }).unwrap();
    }
    summary.push_str(&report::render_dist(&dists[0], &g, Format::Rational, 6));
    match dump {
        None => print!("{summary}"),
        Some(DumpFormat::Dot) => {
            eprint!("{summary}");
            for tree in &trees {
                print!("{}", to_dot(tree, &g));
            }
        }
        Some(DumpFormat::Json) => {
            eprint!("{summary}");
            let all: Vec<_> = trees.iter().map(|tree| to_json(tree, &g)).collect();
            println!("{}", serde_json::to_string_pretty(&all)?);
        }
    }
    if !identical && mode == Mode::Full {
        return Err(report::mismatch("execution models disagree on the distribution".into()));
    }
    Ok(())
}

fn cmd_import_bn(file: &Path, output: Option<&Path>) -> Result<()> {
    let text = std::fs::read_to_string(file).with_context(|| format!("cannot read {}", file.display()))?;
    let bn = parse_bn(&text).map_err(|e| anyhow!("{}: {e}", file.display()))?;
    write_out(output, &print_theory(&bn_to_cp(&bn)))
}

fn cmd_intervene(
    t: &TheoryArgs,
    remove: &[RuleSelector],
    add: &[String],
    script: Option<&Path>,
    output: Option<&Path>,
) -> Result<()> {
    let theory = report::load_theory(&t.file, opts(t))?;
    let mut s = match script {
        Some(p) => parse_script(&std::fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))?)?,
        None => InterventionScript::default(),
    };
    s.remove.extend(remove.iter().cloned());
    s.add.extend(add.iter().cloned());
    let out = apply_intervention(&theory, &s, opts(t))?;
    write_out(output, &print_theory(&out))
}

fn cmd_corpus(dir: &Path, bless: bool) -> Result<()> {
    let mut failures = 0;
    for e in corpus::entries(dir)? {
        let name = e.path.file_name().unwrap().to_string_lossy().to_string();
        match corpus::run_entry(&e, bless)? {
            corpus::Outcome::Ok => println!("ok       {name}"),
            corpus::Outcome::Blessed => println!("blessed  {name}"),
            corpus::Outcome::Missing => {
                failures += 1;
                println!("MISSING  {name} (no golden file)");
            }
            corpus::Outcome::Differs { expected, actual } => {
                failures += 1;
                println!("FAIL     {name}");
                println!("--- expected\n{expected}--- actual\n{actual}");
            }
        }
    }
    if failures > 0 {
        return Err(report::mismatch(format!("{failures} of the corpus entries differ from their golden files")));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Check { theory } => cmd_check(&theory),
        Command::Ground { theory } => {
            let g = load(&theory)?;
            print!("{}", print_theory(&g.to_theory()));
            Ok(())
        }
        Command::Dist { theory, ctx, out, dump_ground, trace_wfs } => {
            cmd_dist(&theory, &ctx, &out, dump_ground, trace_wfs.as_deref())
        }
        Command::Query { theory, formula, ctx, out } => cmd_query(&theory, &formula, &ctx, &out),
        Command::Tree { theory, context, policy, mode, dump_tree } => cmd_tree(&theory, &context, &policy, mode, dump_tree),
        Command::ImportBn { file, output } => cmd_import_bn(&file, output.as_deref()),
        Command::Intervene { theory, remove, add, script, output } => {
            cmd_intervene(&theory, &remove, &add, script.as_deref(), output.as_deref())
        }
        Command::Corpus { action: CorpusAction::Run { dir, bless } } => cmd_corpus(&dir, bless),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => match e.downcast_ref::<Verdict>() {
            Some(v) => {
                eprintln!("{v}");
                ExitCode::from(v.code)
            }
            None => {
                eprintln!("error: {e:#}");
                ExitCode::from(1)
            }
        },
    }
}
