mod common;

use common::*;
use cplogic::analysis::{find_stratification, follows_timing, is_valid_everywhere, relevant_contexts, respects, strictly_respects};
use cplogic::atomset::AtomSet;
use cplogic::bayes::{bn_joint, bn_to_cp, noisy_or, parse_bn};
use cplogic::dist::Distribution;
use cplogic::ground::{body_atom_sets, ground_theory, GroundTheory};
use cplogic::intervene::{apply_intervention, InterventionScript, RuleSelector};
use cplogic::logic3::{compare, eval3_body, Comparison, Order, PartialInterp, TruthValue};
use cplogic::lpad::{enumerate_selections, instance_semantics, LpadError, Selection};
use cplogic::process::{
    build_execution_model, check_execution_model, enumerate_execution_models, in_potential_family, outcomes, potential,
    tree_semantics, BuildConfig, Mode, Outcome, Policy, ProcessError, RuleSet,
};
use cplogic::prob::{one, ratio, Prob};
use cplogic::syntax::{parse_theory, print_theory, ParseOptions};
use cplogic::wfs::{is_terminal, well_founded_model};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn project(d: &Distribution, keep: &[usize], g: &GroundTheory) -> Distribution {
    let mut out = Distribution::new();
    for (s, p) in d.iter() {
        let mut t = g.empty_set();
        for &a in keep {
            if s.contains(a) {
                t.insert(a);
            }
        }
        out.add(t, p.clone());
    }
    out
}

/// Atoms whose truth can depend on law `r`: its heads and everything reachable
/// from them through law bodies.
fn downstream(g: &GroundTheory, r: usize) -> Vec<bool> {
    let mut hit = vec![false; g.len()];
    let mut stack: Vec<usize> = g.rules[r].head.iter().map(|(h, _)| *h).collect();
    while let Some(a) = stack.pop() {
        if std::mem::replace(&mut hit[a], true) {
            continue;
        }
        for law in &g.rules {
            let (all, _, _) = body_atom_sets(law);
            if all.contains(&a) {
                stack.extend(law.head.iter().map(|(h, _)| *h));
            }
        }
    }
    hit
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn valid_theories_agree_with_their_instances(seed in any::<u64>()) {
        let (src, g) = random_ground_theory(&mut rng(seed), false);
        for ctx in relevant_contexts(&g) {
            let tree = tree_semantics(&g, &ctx);
            let inst = instance_semantics(&g, &ctx);
            match (tree, inst) {
                (Ok(t), Ok(i)) => prop_assert_eq!(t, i, "{}", src),
                (Ok(_), Err(e)) => prop_assert!(false, "valid but instances fail: {e}\n{src}"),
                (Err(ProcessError::Invalid { .. }), _) => {}
                (Err(e), _) => prop_assert!(false, "{e}"),
            }
        }
    }

    #[test]
    fn unsound_implies_invalid(seed in any::<u64>()) {
        let (src, g) = random_ground_theory(&mut rng(seed), false);
        for ctx in relevant_contexts(&g) {
            if let Err(LpadError::Unsound { .. }) = instance_semantics(&g, &ctx) {
                prop_assert!(matches!(tree_semantics(&g, &ctx), Err(ProcessError::Invalid { .. })), "{}", src);
            }
        }
    }

    #[test]
    fn stratification_witness_is_sound(seed in any::<u64>()) {
        let (src, g) = random_ground_theory(&mut rng(seed), seed % 2 == 0);
        if let Some(lambda) = find_stratification(&g) {
            for law in &g.rules {
                let (_, pos, neg) = body_atom_sets(law);
                for (h, _) in &law.head {
                    prop_assert!(pos.iter().all(|&b| lambda[b] <= lambda[*h]), "{}", src);
                    prop_assert!(neg.iter().all(|&b| lambda[b] < lambda[*h]), "{}", src);
                }
            }
            prop_assert!(strictly_respects(&g, &lambda), "{}", src);
            prop_assert!(is_valid_everywhere(&g).unwrap(), "stratified yet invalid\n{}", src);
        }
    }

    #[test]
    fn execution_models_pass_the_checker_and_agree(seed in any::<u64>()) {
        let (src, g) = random_ground_theory(&mut rng(seed), true);
        let cfg = BuildConfig::default();
        for ctx in relevant_contexts(&g) {
            let base = build_execution_model(&g, &ctx, &Policy::FirstEligible, &cfg).unwrap();
            prop_assert!(check_execution_model(&base, &g, &ctx, Mode::Full).is_ok(), "{}", src);
            let d = base.leaf_distribution();
            for s in 0..3 {
                let other = build_execution_model(&g, &ctx, &Policy::SeededRandom(seed ^ s), &cfg).unwrap();
                prop_assert!(check_execution_model(&other, &g, &ctx, Mode::Full).is_ok());
                prop_assert_eq!(other.leaf_distribution(), d.clone(), "{}", src);
            }
        }
    }

    /// Leaves partition the mass: path probabilities of leaves sum to 1 and
    /// every path probability is the product of the outcomes chosen on it.
    #[test]
    fn leaves_partition_and_paths_follow_selections(seed in any::<u64>()) {
        let (_, g) = random_ground_theory(&mut rng(seed), true);
        for ctx in relevant_contexts(&g) {
            let tree = build_execution_model(&g, &ctx, &Policy::FirstEligible, &BuildConfig::default()).unwrap();
            let mut leaf_mass = Prob::from_integer(0.into());
            let mut ok = true;
            tree.visit(|v| {
                let by_selection = v.selection.iter().fold(one(), |acc, (r, o)| {
                    let p = outcomes(&g.rules[*r]).into_iter().find(|(x, _, _)| x == o).map(|(_, _, p)| p).unwrap();
                    acc * p
                });
                ok &= by_selection == v.path_prob;
                ok &= ctx.is_subset(&v.node.state);
                if v.node.is_leaf() {
                    leaf_mass += &v.path_prob;
                }
            });
            prop_assert!(ok);
            prop_assert_eq!(leaf_mass, one());
            prop_assert_eq!(tree.leaf_distribution().total(), one());
        }
    }

    /// Without negation the potential never leaves a body unknown, so weak
    /// and full trees coincide.
    #[test]
    fn positive_theories_need_no_precedence(seed in any::<u64>()) {
        let src: String = random_theory(&mut rng(seed), false).lines().map(|l| l.replace('~', "")).collect::<Vec<_>>().join("\n");
        let g = ground_theory(&parse_theory(&src).unwrap()).unwrap();
        let weak = BuildConfig::with_mode(Mode::Weak);
        for ctx in relevant_contexts(&g) {
            for policy in [Policy::FirstEligible, Policy::SeededRandom(seed), Policy::SeededRandom(!seed)] {
                let tree = build_execution_model(&g, &ctx, &policy, &weak).unwrap();
                prop_assert!(check_execution_model(&tree, &g, &ctx, Mode::Full).is_ok(), "{}", src);
            }
        }
    }

    #[test]
    fn printing_round_trips(seed in any::<u64>()) {
        let t = parse_theory(&random_theory(&mut rng(seed), false)).unwrap();
        let printed = print_theory(&t);
        prop_assert_eq!(parse_theory(&printed).unwrap(), t, "{}", printed);
    }

    #[test]
    fn grounding_is_idempotent(seed in any::<u64>()) {
        let (_, g) = random_ground_theory(&mut rng(seed), true);
        let again = ground_theory(&g.to_theory()).unwrap();
        prop_assert_eq!(print_theory(&g.to_theory()), print_theory(&again.to_theory()));
    }

    #[test]
    fn bn_translation_matches_the_joint(seed in any::<u64>()) {
        let text = random_bn(&mut rng(seed));
        let bn = parse_bn(&text).unwrap();
        let g = ground_theory(&bn_to_cp(&bn)).unwrap();
        let d = tree_semantics(&g, &g.empty_set()).unwrap();
        prop_assert_eq!(d, bn_joint(&bn, &g), "{}", text);
    }

    #[test]
    fn independent_causes_combine_by_noisy_or(ps in prop::collection::vec(1u32..=10, 1..5)) {
        let alphas: Vec<Prob> = ps.iter().map(|&p| ratio(p as i64, 10)).collect();
        let mut src = String::from("pred H/0.\n");
        let causes: Vec<String> = (0..ps.len()).map(|i| format!("C{i}")).collect();
        src += &format!("pred {} exogenous.\n", causes.iter().map(|c| format!("{c}/0")).collect::<Vec<_>>().join(", "));
        for (c, p) in causes.iter().zip(&ps) {
            src += &format!("(H:{p}/10) <- {c}.\n");
        }
        let g = ground_theory(&parse_theory(&src).unwrap()).unwrap();
        let all = set(&g, &causes.iter().map(String::as_str).collect::<Vec<_>>());
        let d = tree_semantics(&g, &all).unwrap();
        let h = atom(&g, "H");
        prop_assert_eq!(d.mass_where(|s| s.contains(h)), noisy_or(&alphas));
    }

    /// Removing a law leaves the joint of the atoms outside its reach alone.
    #[test]
    fn interventions_do_not_reach_upstream(seed in any::<u64>(), pick in any::<prop::sample::Index>()) {
        let mut r = rng(seed);
        let src = random_theory(&mut r, true);
        let theory = parse_theory(&src).unwrap();
        let g = ground_theory(&theory).unwrap();
        let law = pick.index(theory.laws.len());
        let script = InterventionScript { remove: vec![RuleSelector::Index(theory.laws[law].source_index)], add: vec![] };
        let h = ground_theory(&apply_intervention(&theory, &script, ParseOptions::default()).unwrap()).unwrap();
        prop_assert_eq!(&g.atoms, &h.atoms);
        let gr = g.rules.iter().position(|x| x.origin == law).unwrap();
        let reach = downstream(&g, gr);
        let keep: Vec<usize> = (0..g.len()).filter(|&a| !reach[a]).collect();
        for ctx in relevant_contexts(&g) {
            let before = tree_semantics(&g, &ctx).unwrap();
            let after = tree_semantics(&h, &ctx).unwrap();
            prop_assert_eq!(project(&before, &keep, &g), project(&after, &keep, &h), "{}", src);
        }
    }
}

/// The family of interpretations obtained from `state` by turning false atoms
/// unknown so that no unfired law with a non-false body keeps a false head
/// atom, enumerated by brute force.
fn brute_force_family(g: &GroundTheory, fired: &RuleSet, state: &AtomSet) -> Vec<PartialInterp> {
    let falses: Vec<usize> = (0..g.len()).filter(|&a| !state.contains(a)).collect();
    let mut out = Vec::new();
    for mask in 0u32..1 << falses.len() {
        let mut nu = PartialInterp::from_set(state);
        for (i, &a) in falses.iter().enumerate() {
            if mask & (1 << i) != 0 {
                nu.set(a, TruthValue::U);
            }
        }
        let closed = g.rules.iter().all(|r| {
            fired.contains(r.rule_id)
                || eval3_body(r.body.as_ref(), &nu) == TruthValue::F
                || r.head.iter().all(|(h, _)| nu.get(*h) != TruthValue::F)
        });
        if closed {
            out.push(nu);
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// The potential is the most precise member of its family.
    #[test]
    fn potential_is_the_most_precise_family_member(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (src, g) = random_ground_theory(&mut r, false);
        let mut fired = RuleSet::with_capacity(g.rules.len());
        for i in 0..g.rules.len() {
            if r.random_bool(0.3) {
                fired.insert(i);
            }
        }
        let state = AtomSet::from_ids(g.len(), (0..g.len()).filter(|_| r.random_bool(0.3)));
        let nu_s = potential(&g, &fired, &state);
        let family = brute_force_family(&g, &fired, &state);
        prop_assert!(family.contains(&nu_s), "{}", src);
        for nu in &family {
            prop_assert!(in_potential_family(&g, &fired, &state, nu));
            prop_assert_eq!(compare(nu, &nu_s, Order::Precision).unwrap(), Comparison::LessOrEqual, "{}", src);
        }
    }

    /// Every node's probability is the mass of the selections that agree with
    /// the choices made on its path, and the leaves split the selections into
    /// disjoint classes that cover them all.
    #[test]
    fn nodes_and_leaves_decompose_the_selections(seed in any::<u64>()) {
        let (src, g) = random_ground_theory(&mut rng(seed), true);
        let all: Vec<(Selection, Prob)> = enumerate_selections(&g, 1 << 14).unwrap().collect();
        prop_assert_eq!(all.iter().map(|(_, p)| p.clone()).sum::<Prob>(), one());
        let extends = |sel: &Selection, path: &[(usize, Outcome)]| path.iter().all(|(r, o)| sel.0[*r] == *o);
        for ctx in relevant_contexts(&g) {
            let tree = build_execution_model(&g, &ctx, &Policy::FirstEligible, &BuildConfig::default()).unwrap();
            let mut covered = vec![0usize; all.len()];
            let mut ok = true;
            tree.visit(|v| {
                let mass: Prob = all.iter().filter(|(s, _)| extends(s, v.selection)).map(|(_, p)| p.clone()).sum();
                ok &= mass == v.path_prob;
                if v.node.is_leaf() {
                    for (i, (s, _)) in all.iter().enumerate() {
                        if extends(s, v.selection) {
                            covered[i] += 1;
                        }
                    }
                }
            });
            prop_assert!(ok, "{}", src);
            prop_assert!(covered.iter().all(|&c| c == 1), "{}", src);
        }
    }
}

/// A small random network as JSON: up to four nodes, boolean or three-valued,
/// at most two earlier parents each, probabilities in tenths.
fn random_bn(rng: &mut ChaCha8Rng) -> String {
    let n = rng.random_range(1..=4);
    let mut nodes = Vec::new();
    let mut sizes = Vec::new();
    for i in 0..n {
        let boolean = rng.random_bool(0.6);
        let size = if boolean { 2 } else { 3 };
        let parents: Vec<usize> = (0..i).filter(|_| rng.random_bool(0.5)).take(2).collect();
        let mut rows = Vec::new();
        let combos: usize = parents.iter().map(|&p| sizes[p]).product();
        for c in 0..combos {
            let mut rest = c;
            let given: Vec<serde_json::Value> = parents
                .iter()
                .map(|&p| {
                    let v = rest % sizes[p];
                    rest /= sizes[p];
                    if sizes[p] == 2 { json!(v == 0) } else { json!(["Va", "Vb", "Vc"][v]) }
                })
                .collect();
            let mut left = 10;
            let mut probs = Vec::new();
            for k in 0..size {
                let x = if k + 1 == size { left } else { rng.random_range(0..=left) };
                left -= x;
                probs.push(json!(format!("{x}/10")));
            }
            rows.push(json!({"given": given, "probs": probs}));
        }
        let mut node = json!({"name": format!("N{i}"), "parents": parents.iter().map(|p| format!("N{p}")).collect::<Vec<_>>(), "cpt": rows});
        if !boolean {
            node["values"] = json!(["Va", "Vb", "Vc"]);
        }
        nodes.push(node);
        sizes.push(size);
    }
    json!({ "nodes": nodes }).to_string()
}

#[test]
fn corpus_printing_round_trips() {
    for (name, _) in corpus_theories() {
        if name.ends_with(".json") {
            continue;
        }
        let once = print_theory(&parse(&name));
        let again = parse_theory(&once).unwrap_or_else(|e| panic!("{name}: {e}\n{once}"));
        assert_eq!(print_theory(&again), once, "{name}");
    }
}

/// The causal loop against the network with artificial external-cause nodes:
/// given the external causes the two symptoms are independent, angina has
/// probability 1, 0.2 or 0 and pneumonia 1, 0.3 or 0.
#[test]
fn causal_loop_matches_the_network_encoding() {
    let g = load("cyclic.cpl");
    let (angina, pneumonia) = (atom(&g, "Angina"), atom(&g, "Pneumonia"));
    for (ea, ep) in [(false, false), (true, false), (false, true), (true, true)] {
        let names: Vec<&str> = [(ea, "ExtAngina"), (ep, "ExtPneumonia")].iter().filter(|x| x.0).map(|x| x.1).collect();
        let ctx = set(&g, &names);
        let d = tree_semantics(&g, &ctx).unwrap();
        let pa = if ea { one() } else if ep { ratio(1, 5) } else { ratio(0, 1) };
        let pp = if ep { one() } else if ea { ratio(3, 10) } else { ratio(0, 1) };
        for (a, p) in [(false, false), (true, false), (false, true), (true, true)] {
            let want = (if a { pa.clone() } else { one() - &pa }) * (if p { pp.clone() } else { one() - &pp });
            let got = d.mass_where(|s| s.contains(angina) == a && s.contains(pneumonia) == p);
            assert_eq!(got, want, "context {names:?}, angina {a}, pneumonia {p}");
        }
    }
}

#[test]
fn weak_trees_may_disagree_only_through_negation() {
    let g = load("negation.cpl");
    let ctx = set(&g, &["Pneumonia"]);
    let weak = BuildConfig::with_mode(Mode::Weak);
    let fever = atom(&g, "Fever");
    let mut seen = std::collections::BTreeSet::new();
    for seed in 0..20 {
        let t = build_execution_model(&g, &ctx, &Policy::SeededRandom(seed), &weak).unwrap();
        seen.insert(t.leaf_distribution().mass_where(|s| s.contains(fever)));
    }
    assert_eq!(seen.into_iter().collect::<Vec<_>>(), [ratio(7, 200), ratio(7, 10)]);
}

/// A law whose heads are already true still fires on every branch where its
/// body holds, and changes nothing.
#[test]
fn redundant_laws_still_fire() {
    let g = ground_theory(&parse_theory("pred A/0, B/0. A. (A:1/2) <- A. (B:1/3).").unwrap()).unwrap();
    let tree = build_execution_model(&g, &g.empty_set(), &Policy::FirstEligible, &BuildConfig::default()).unwrap();
    let mut leaves = 0;
    tree.visit(|v| {
        if v.node.is_leaf() {
            leaves += 1;
            let mut path = v.path.to_vec();
            path.sort();
            assert_eq!(path, [0, 1, 2]);
        }
    });
    assert_eq!(leaves, 4);
    let d = tree.leaf_distribution();
    assert_eq!(d.get(&set(&g, &["A"])), ratio(2, 3));
    assert_eq!(d.get(&set(&g, &["A", "B"])), ratio(1, 3));
}

/// Positive corpus theories indexed by time have an execution model that
/// follows the timing.
#[test]
fn positive_timed_theories_have_a_timed_model() {
    let mut checked = 0;
    for (name, g) in corpus_theories() {
        let lambda = last_int_timing(&g);
        let positive = g.rules.iter().all(|r| body_atom_sets(r).2.is_empty());
        if !positive || g.rules.len() > 8 || lambda.iter().all(|&t| t == 0) || !respects(&g, &lambda) {
            continue;
        }
        for ctx in relevant_contexts(&g) {
            let models = enumerate_execution_models(&g, &ctx, &BuildConfig::default()).unwrap();
            assert!(models.iter().any(|m| follows_timing(m, &g, &lambda).unwrap().is_some()), "{name}");
        }
        checked += 1;
    }
    assert!(checked >= 1);
}

/// Dropping a law that never fires in any context leaves every distribution
/// as it was.
#[test]
fn removing_dead_laws_changes_nothing() {
    let mut removed = 0;
    let mut theories: Vec<(String, cplogic::syntax::CPTheory)> = corpus_theories()
        .into_iter()
        .filter(|(n, _)| n.ends_with(".cpl"))
        .map(|(n, _)| (n.clone(), parse(&n)))
        .collect();
    theories.push((
        "constructed".into(),
        parse_theory("pred A/0 exogenous. pred B/0, C/0. (B:1/2) <- A. (C:1/4) <- B & ~B. (B:1/5) <- C.").unwrap(),
    ));
    for (name, theory) in theories {
        let g = ground_theory(&theory).unwrap();
        let contexts = relevant_contexts(&g);
        let mut trees = Vec::new();
        for ctx in &contexts {
            match build_execution_model(&g, ctx, &Policy::FirstEligible, &BuildConfig::default()) {
                Ok(t) => trees.push(t),
                Err(_) => break,
            }
        }
        if trees.len() != contexts.len() {
            continue;
        }
        let mut fired = vec![false; theory.laws.len()];
        for t in &trees {
            t.visit(|v| {
                if let Some(r) = v.node.event {
                    fired[g.rules[r].origin] = true;
                }
            });
        }
        for (law, _) in fired.iter().enumerate().filter(|(_, f)| !**f) {
            let script =
                InterventionScript { remove: vec![RuleSelector::Index(theory.laws[law].source_index)], add: vec![] };
            let h = ground_theory(&apply_intervention(&theory, &script, ParseOptions::default()).unwrap()).unwrap();
            for (ctx, t) in contexts.iter().zip(&trees) {
                assert_eq!(tree_semantics(&h, ctx).unwrap(), t.leaf_distribution(), "{name} without law {law}");
            }
            removed += 1;
        }
    }
    assert!(removed >= 2, "only {removed} dead laws found");
}

proptest! {
    /// The well-founded model is a fixpoint: nothing more can be derived and
    /// no unknown atoms form an unfounded set.
    #[test]
    fn well_founded_model_is_terminal(seed in any::<u64>()) {
        let (program, open) = random_program(&mut rng(seed));
        let model = well_founded_model(&program, &open);
        prop_assert!(is_terminal(&program, &model));
        for r in &program.rules {
            if eval3_body(r.body.as_ref(), &model) == TruthValue::T {
                prop_assert_eq!(model.get(r.head), TruthValue::T);
            }
        }
    }
}
