//! The ten acceptance criteria. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

mod support;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spcheck::budget::Budget;
use spcheck::decision::{decide_sp, replay_certificate, Mode, SpQuery, Verdict};
use spcheck::family::{build_family_member, check_self_similarity, SelfSimilarity};
use spcheck::oracle::{iterated_shuffle_upto, sp_falsify, srf1, OracleCaps};
use spcheck::petri::{
    build_np_v_full, build_npv, decide_alf_pre_finite, decide_alf_zero_finite, explore_product, karp_miller,
    replay_pump, AlfPre, AlfZero, Boundedness, FullState, Marking, NpvFull,
};
use spcheck::representation::{self, build_delta_paren, build_w_delta, parse_delta, ClosureOutcome, T3};
use spcheck::segments::{l_of_segment, partial_powerset, InitialSegment};
use spcheck::{word, CounterVector, Dfa, Letter, ShuffleAutomaton, Step};
use support::{fixture, fixture_text, random_dfa, random_prefix_closed};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn counterexample() -> Outcome {
    let (g, h) = (fixture("g.aut"), fixture("h.aut"));
    let q = SpQuery::new(g.clone(), h.clone(), Mode::General);
    let v = decide_sp(&q).map_err(|e| e.to_string())?;
    let Verdict::Fails(_) = &v else { return Err(format!("verdict {}", v.outcome())) };
    let w = sp_falsify(&g, &h, 4, &OracleCaps::default()).map_err(|e| e.to_string())?.ok_or("oracle found nothing")?;
    ensure(w.w == word("abaa") && w.u == word("aa"), "oracle witness differs")?;
    ensure(replay_certificate(&q, &v).map_err(|e| e.to_string())?, "replay rejected")?;
    Ok("witness (abaa, aa)".into())
}

fn representation_example() -> Outcome {
    let (p, v) = (fixture("pring.aut"), fixture("vring.aut"));
    let npv = build_npv(&p, &v).map_err(|e| e.to_string())?;
    let prod = explore_product(&npv.sa, &npv.v, 1000);
    ensure(prod.complete && prod.states.len() == 4, format!("product has {} states", prod.states.len()))?;
    let listed = parse_delta(&fixture_text("pring.delta"), npv.sa.names()).map_err(|e| e.to_string())?;
    let AlfPre::Finite { delta, .. } = decide_alf_pre_finite(&p, &v, &Budget::default()).map_err(|e| e.to_string())? else {
        return Err("alphabet not finite".into());
    };
    ensure(delta == listed && delta.len() == 5, "Δ differs from pring.delta")?;
    let cols = build_delta_paren(&p, &delta).map_err(|e| e.to_string())?.len();
    let w = build_w_delta(&p, &delta).map_err(|e| e.to_string())?;
    let trans = w.automaton.transition_count();
    ensure(cols == 17 && trans == 17, format!("{cols} columns, {trans} transitions"))?;
    let closure = representation::check_closure_prefix(&p, &v, &delta, true).map_err(|e| e.to_string())?;
    ensure(matches!(closure, ClosureOutcome::Holds { .. }), "closure check fails")?;
    Ok("4 product states, |Δ|=5, 17 columns, 17 transitions".into())
}

fn initial_segment_example() -> Outcome {
    let p = fixture("ptilde.aut");
    let sa = ShuffleAutomaton::new(&p).map_err(|e| e.to_string())?;
    let seg = InitialSegment::parse(&fixture_text("ptilde.seg"), sa.names()).map_err(|e| e.to_string())?;
    let ps = partial_powerset(&p, &seg, 1000).map_err(|e| e.to_string())?;
    ensure(ps.compatible(), "segment not compatible")?;
    let a = &ps.automaton;
    ensure(a.state_count() == 4, format!("{} states", a.state_count()))?;
    ensure(a.isomorphic(&fixture("ltilde.aut")), "edge structure differs")?;
    let l = l_of_segment(&p, &seg, 1000).map_err(|e| e.to_string())?;
    let found = sp_falsify(&p, &l, 6, &OracleCaps::default()).map_err(|e| e.to_string())?;
    ensure(found.is_none(), "falsifier found a witness")?;
    Ok("compatible, 4 states, no witness up to 6".into())
}

/// States 0..n, a counts up, b counts down.
fn chain(n: u32) -> Dfa {
    let mut text = String::from("kind: semiautomaton\nalphabet: a b\nstates:");
    for i in 0..=n {
        text += &format!(" {i}");
    }
    text += "\ninitial: 0\n";
    for i in 0..n {
        text += &format!("trans: {i} a {}\ntrans: {} b {i}\n", i + 1, i + 1);
    }
    spcheck::parse_automaton(&text).unwrap()
}

fn kn_example() -> Outcome {
    let p = fixture("pbar.aut");
    for n in 0..=5 {
        let ps = partial_powerset(&p, &InitialSegment::Kn(n), 1000).map_err(|e| e.to_string())?;
        ensure(ps.compatible(), format!("K({n}) incompatible"))?;
        let l = l_of_segment(&p, &InitialSegment::Kn(n), 1000).map_err(|e| e.to_string())?;
        let c = chain(n);
        let both = Dfa::includes(&l, &c).map_err(|e| e.to_string())?.holds() && Dfa::includes(&c, &l).map_err(|e| e.to_string())?.holds();
        ensure(both && l.state_count() == n as usize + 1, format!("n={n}: language differs from the chain"))?;
    }
    Ok("n = 0..5 match the chains".into())
}

fn grave_example() -> Outcome {
    let (p, v) = (fixture("pbar.aut"), fixture("vbar.aut"));
    let AlfPre::Infinite { pump, .. } = decide_alf_pre_finite(&p, &v, &Budget::default()).map_err(|e| e.to_string())? else {
        return Err("prefix alphabet not infinite".into());
    };
    let npv = build_npv(&p, &v).map_err(|e| e.to_string())?;
    ensure(replay_pump(&npv.net, &npv.net.initial, &pump), "pump does not replay")?;
    let grave = ShuffleAutomaton::new(&p).map_err(|e| e.to_string())?.grave();
    let AlfZero::Finite { delta, .. } = decide_alf_zero_finite(grave.dfa(), &v, &Budget::default()).map_err(|e| e.to_string())? else {
        return Err("zero alphabet not finite".into());
    };
    let allowed: BTreeSet<Step> = ["(0) a (0)", "(0) a (II:1)", "(II:1) a (II:1)", "(II:1) b (0)"]
        .iter()
        .map(|s| grave.parse_step(s).unwrap())
        .collect();
    ensure(delta.is_subset(&allowed), "Δ̀ outside the expected steps")?;
    Ok(format!("pump replays, |Δ̀|={}", delta.len()))
}

fn self_similar_family() -> Outcome {
    let s = fixture("s.aut");
    let q = SpQuery::new(s.clone(), s.clone(), Mode::Prefix);
    let v = decide_sp(&q).map_err(|e| e.to_string())?;
    ensure(matches!(v, Verdict::Holds(_)), format!("verdict {}", v.outcome()))?;
    ensure(replay_certificate(&q, &v).map_err(|e| e.to_string())?, "replay rejected")?;
    let ss = check_self_similarity(&s, &s, 3, 8).map_err(|e| e.to_string())?;
    ensure(matches!(ss, SelfSimilarity::Consistent { .. }), format!("{ss:?}"))?;
    let m = build_family_member(&s, &s, &[1, 2]).map_err(|e| e.to_string())?;
    ensure(m.isomorphic(&fixture("sbar12.aut")), "member differs from the two-server automaton")?;
    Ok(format!("holds via {}", v.route().unwrap().name()))
}

fn all_words(letters: &[Letter], n: usize) -> Vec<Vec<Letter>> {
    let mut out = vec![Vec::new()];
    let mut layer = vec![Vec::new()];
    for _ in 0..n {
        let mut next = Vec::new();
        for w in &layer {
            for a in letters {
                let mut x: Vec<Letter> = w.clone();
                x.push(a.clone());
                next.push(x);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// The S-automaton successors rebuilt from the σ-core by shifting.
fn shifted_core(sa: &ShuffleAutomaton, f: &CounterVector, a: &Letter) -> BTreeSet<Step> {
    sa.sigma_core()
        .iter()
        .filter(|t| &t.letter == a)
        .filter_map(|t| f.sub(&t.source).map(|h| Step::new(f.clone(), a.clone(), h.add(&t.target))))
        .collect()
}

/// Vectors over the elementary states with norm at most `n`.
fn z_vectors(sa: &ShuffleAutomaton, n: u32) -> Vec<CounterVector> {
    let units: Vec<usize> = sa.elementary_vectors().iter().skip(1).map(|f| f.support().next().unwrap()).collect();
    let mut out = BTreeSet::from([CounterVector::zero()]);
    for _ in 0..n {
        let cur: Vec<CounterVector> = out.iter().cloned().collect();
        for f in cur {
            for &q in &units {
                out.insert(f.plus_unit(q));
            }
        }
    }
    out.into_iter().collect()
}

fn oracle_engine_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let caps = OracleCaps::default();
    let mut words_checked = 0;
    for i in 0..100 {
        let letters: &[&str] = if i % 4 == 0 { &["a"] } else { &["a", "b"] };
        let p = random_dfa(&mut rng, 4, letters, 0.6);
        let sa = ShuffleAutomaton::new(&p).map_err(|e| e.to_string())?;
        let star = iterated_shuffle_upto(&p, 8, &caps).map_err(|e| e.to_string())?;
        let pre_p = p.all_final().normalize().unwrap();
        let pre_star = iterated_shuffle_upto(&pre_p, 8, &caps).map_err(|e| e.to_string())?;
        for w in all_words(p.alphabet(), 8) {
            words_checked += 1;
            ensure(sa.member(&w) == star.contains(&w), format!("P#{i}: membership of {}", spcheck::render_word(&w)))?;
            ensure(sa.pre_member(&w) == pre_star.contains(&w), format!("P#{i}: prefix membership of {}", spcheck::render_word(&w)))?;
        }
        for w in star.shortlex(p.alphabet()) {
            for k in 0..=w.len() {
                ensure(pre_star.contains(&w[..k]), format!("P#{i}: prefix of a shuffle word escapes"))?;
            }
        }
        for f in z_vectors(&sa, 3) {
            for (li, a) in sa.alphabet().iter().enumerate() {
                let direct: BTreeSet<Step> = sa.successors_ix(&f, li).iter().map(|t| t.step()).collect();
                ensure(direct == shifted_core(&sa, &f, a), format!("P#{i}: σ-core reconstruction at {f}"))?;
            }
        }
    }
    Ok(format!("100 automata, {words_checked} words"))
}

fn srf_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut computations = 0;
    for i in 0..30 {
        let p = random_dfa(&mut rng, 3, &["a", "b"], 0.6);
        let sa = ShuffleAutomaton::new(&p).map_err(|e| e.to_string())?;
        let zs = z_vectors(&sa, 2);
        let mut delta = BTreeSet::new();
        for f in &zs {
            for li in 0..sa.alphabet().len() {
                for t in sa.successors_ix(f, li) {
                    if t.target.norm() <= 2 {
                        delta.insert(t.step());
                    }
                }
            }
        }
        let w = build_w_delta(&p, &delta).map_err(|e| e.to_string())?;
        let mut layer: Vec<Vec<Step>> = vec![Vec::new()];
        for _ in 0..5 {
            let mut next = Vec::new();
            for c in &layer {
                let cur = c.last().map_or(CounterVector::zero(), |s| s.target.clone());
                for s in delta.iter().filter(|s| s.source == cur) {
                    let mut x = c.clone();
                    x.push(s.clone());
                    next.push(x);
                }
            }
            for c in &next {
                computations += 1;
                let expected = srf1(&p, c).map_err(|e| e.to_string())?;
                ensure(w.factors_of(c) == expected, format!("instance {i}: factors differ on a computation of length {}", c.len()))?;
            }
            layer = next;
        }
    }
    Ok(format!("30 instances, {computations} computations"))
}

fn golden_pairs() -> Vec<(&'static str, &'static str)> {
    vec![
        ("pring.aut", "vring.aut"),
        ("pbar.aut", "vbar.aut"),
        ("ptilde.aut", "ltilde.aut"),
        ("s.aut", "s.aut"),
        ("g.aut", "h.aut"),
        ("pbar.aut", "sigmastar.aut"),
    ]
}

/// Successors of a decoded N_P^V state by the three-track rules, without the net.
fn direct_successors(full: &NpvFull, s: &FullState) -> BTreeSet<FullState> {
    let sa = &full.sa;
    let v = &full.v;
    let evec = match &s.e {
        T3::At(f) => f.clone(),
        T3::Done => CounterVector::zero(),
    };
    let mut out = BTreeSet::new();
    for (li, a) in sa.alphabet().iter().enumerate() {
        let n1 = v.step(s.v1, a).unwrap();
        for y in sa.successors_ix(&s.c2, li) {
            out.insert(FullState {
                v1: n1,
                v2: v.step(s.v2, a).unwrap(),
                c1: y.target.add(&evec),
                c2: y.target.clone(),
                e: s.e.clone(),
            });
        }
        if let T3::At(f) = &s.e {
            for z in sa.sigma_core().iter().filter(|z| &z.letter == a && &z.source == f) {
                let e = match z.kind {
                    spcheck::Kind::End | spcheck::Kind::StartEnd => T3::Done,
                    _ => T3::At(z.target.clone()),
                };
                let c1 = s.c1.sub(&z.source).unwrap().add(&z.target);
                out.insert(FullState { v1: n1, v2: s.v2, c1, c2: s.c2.clone(), e });
            }
        }
    }
    out
}

fn simulation_fidelity() -> Outcome {
    let mut fired = 0usize;
    for (pf, vf) in golden_pairs() {
        let (p, v) = (fixture(pf), fixture(vf));
        let npv = build_npv(&p, &v).map_err(|e| e.to_string())?;
        let tree = karp_miller(&npv.net, &npv.net.initial, 200_000);
        for node in &tree.nodes {
            ensure(npv.decode(&node.marking).is_some(), format!("{pf}/{vf}: undecodable N_PV marking"))?;
        }
        match &tree.verdict {
            Boundedness::Bounded => {
                let prod = explore_product(&npv.sa, &npv.v, 500_000);
                let images: BTreeSet<Marking> = prod.states.iter().map(|(f, r)| npv.iota(f, *r)).collect();
                ensure(images == tree.markings(), format!("{pf}/{vf}: ι-image differs from reachability"))?;
            }
            Boundedness::Unbounded(pump) => ensure(replay_pump(&npv.net, &npv.net.initial, pump), "pump fails")?,
            Boundedness::Unknown => return Err(format!("{pf}/{vf}: coverability tree capped")),
        }

        let full = build_np_v_full(&p, &v).map_err(|e| e.to_string())?;
        let m0 = full.initial_marking();
        let s0 = full.decode(&m0).ok_or("initial marking undecodable")?;
        let mut net_layer = BTreeSet::from([m0]);
        let mut direct_layer = BTreeSet::from([s0]);
        for depth in 1..=5 {
            let mut next = BTreeSet::new();
            for m in &net_layer {
                for t in 0..full.net.transitions.len() {
                    if let Some(n) = full.net.fire(m, t) {
                        fired += 1;
                        ensure(full.token_invariants_hold(&n), format!("{pf}/{vf}: token invariant broken"))?;
                        let d = full.decode(&n).ok_or("undecodable marking")?;
                        ensure(full.iota(&d) == n, "ι does not invert decoding")?;
                        next.insert(n);
                    }
                }
            }
            let dnext: BTreeSet<FullState> = direct_layer.iter().flat_map(|s| direct_successors(&full, s)).collect();
            let decoded: BTreeSet<FullState> = next.iter().map(|m| full.decode(m).unwrap()).collect();
            ensure(decoded == dnext, format!("{pf}/{vf}: depth {depth} differs from the three-track rules"))?;
            net_layer = next;
            direct_layer = dnext;
        }
    }
    Ok(format!("{} golden pairs, {fired} firings", golden_pairs().len()))
}

fn decision_corpus() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let budget = Budget::default();
    let (mut holds, mut fails, mut unknown, mut bounded_unknown) = (0, 0, 0, 0);
    for i in 0..50 {
        let mode = if i % 2 == 0 { Mode::Prefix } else { Mode::General };
        let p = random_dfa(&mut rng, 3, &["a", "b"], 0.6);
        let v = match mode {
            Mode::Prefix => random_prefix_closed(&mut rng, 3, &["a", "b"], 0.7),
            Mode::General => random_dfa(&mut rng, 3, &["a", "b"], 0.7),
        };
        let q = SpQuery::new(p.clone(), v.clone(), mode).with_budget(budget.clone());
        let verdict = decide_sp(&q).map_err(|e| format!("pair {i}: {e}"))?;
        let comp = match mode {
            Mode::Prefix => p.all_final().normalize().unwrap(),
            Mode::General => p.clone(),
        };
        let falsified = sp_falsify(&comp, &v, 6, &OracleCaps::default()).map_err(|e| e.to_string())?;
        match &verdict {
            Verdict::Holds(_) => {
                holds += 1;
                ensure(falsified.is_none(), format!("pair {i}: holds but the falsifier disagrees"))?;
                ensure(replay_certificate(&q, &verdict).unwrap_or(false), format!("pair {i}: holds certificate rejected"))?;
            }
            Verdict::Fails(_) => {
                fails += 1;
                ensure(replay_certificate(&q, &verdict).unwrap_or(false), format!("pair {i}: witness rejected"))?;
            }
            Verdict::Unknown(_) => {
                unknown += 1;
                let full = build_np_v_full(&p, &v).map_err(|e| e.to_string())?;
                let tree = karp_miller(&full.net, &full.net.initial, budget.km_nodes);
                if tree.verdict == Boundedness::Bounded {
                    bounded_unknown += 1;
                }
            }
        }
    }
    ensure(bounded_unknown == 0, format!("{bounded_unknown} unknown verdicts on bounded nets"))?;
    Ok(format!("holds {holds}, fails {fails}, unknown {unknown} ({}%)", unknown * 2))
}

fn main() {
    let criteria: Vec<(&str, fn() -> Outcome, Duration)> = vec![
        ("counterexample reproduction", counterexample, Duration::from_secs(1)),
        ("representation example", representation_example, Duration::from_secs(1)),
        ("initial-segment example", initial_segment_example, Duration::from_secs(1)),
        ("K(n,Q) example", kn_example, Duration::from_secs(1)),
        ("grave-alphabet example", grave_example, Duration::from_secs(5)),
        ("self-similar family", self_similar_family, Duration::from_secs(2)),
        ("oracle/engine equivalence", oracle_engine_equivalence, Duration::from_secs(60)),
        ("SRF equivalence", srf_equivalence, Duration::from_secs(60)),
        ("simulation fidelity", simulation_fidelity, Duration::from_secs(30)),
        ("decision-corpus consistency", decision_corpus, Duration::from_secs(300)),
    ];
    let mut failed = 0;
    for (i, (name, run, limit)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        let took = start.elapsed();
        let result = match result {
            Ok(detail) if took > limit => Err(format!("{detail}; took {took:.2?}, limit {limit:?}")),
            other => other,
        };
        match result {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} ({took:.2?})", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why} ({took:.2?})", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
