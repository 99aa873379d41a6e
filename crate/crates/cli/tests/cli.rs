use std::path::PathBuf;
use std::process::{Command, Output};

use spcheck::petri::PetriNet;
use spcheck::parse_automaton;

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "fixtures", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn spcheck(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spcheck"))
        .args(args)
        .env_remove("SP_BUDGET_PROFILE")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn decide_exit_codes() {
    let g = spcheck(&["decide", &fixture("g.aut"), &fixture("h.aut"), "--mode", "general"]);
    assert_eq!(g.status.code(), Some(1));
    let out = stdout(&g);
    assert!(out.contains("word: abaa") && out.contains("factor: aa"), "{out}");

    let ring = spcheck(&["decide", &fixture("pring.aut"), &fixture("vring.aut"), "--mode", "prefix"]);
    assert_eq!(ring.status.code(), Some(0));
    let s = spcheck(&["decide", &fixture("s.aut"), &fixture("s.aut"), "--mode", "prefix"]);
    assert_eq!(s.status.code(), Some(0));
}

#[test]
fn errors_exit_three() {
    let bad = spcheck(&["decide", &fixture("ex7.aut"), &fixture("ex7.aut"), "--mode", "prefix"]);
    assert_eq!(bad.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("prefix-closed"));
    let missing = spcheck(&["decide", "/nonexistent.aut", &fixture("h.aut")]);
    assert_eq!(missing.status.code(), Some(3));
}

#[test]
fn reports_are_byte_stable() {
    let args = ["decide", &fixture("pbar.aut"), &fixture("vbar.aut"), "--mode", "prefix", "--format", "keyvalue"];
    let (a, b) = (spcheck(&args), spcheck(&args));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.status.code(), b.status.code());
}

#[test]
fn budget_flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("budget.cfg");
    std::fs::write(&cfg, "frontier=123\nfalsify_len = 4\n").unwrap();
    let cfg = cfg.to_string_lossy().into_owned();
    let o = spcheck(&[
        "decide", &fixture("s.aut"), &fixture("s.aut"), "--mode", "prefix", "--config", &cfg, "--budget-falsify-len", "5",
        "--format", "keyvalue",
    ]);
    let out = stdout(&o);
    assert!(out.contains("budget.frontier=123"), "{out}");
    assert!(out.contains("budget.falsify_len=5"), "{out}");
}

#[test]
fn replay_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for (p, v, mode) in [("g.aut", "h.aut", "general"), ("pring.aut", "vring.aut", "prefix")] {
        let rep = dir.path().join("report.txt").to_string_lossy().into_owned();
        spcheck(&["decide", &fixture(p), &fixture(v), "--mode", mode, "--out", &rep]);
        let ok = spcheck(&["replay", &fixture(p), &fixture(v), &rep]);
        assert_eq!(ok.status.code(), Some(0), "{}", stdout(&ok));
        let tampered = std::fs::read_to_string(&rep).unwrap().replace("factor: aa", "factor: ab").replace("(II:1) c (0)", "(II:1) c (II:1)");
        std::fs::write(&rep, tampered).unwrap();
        let bad = spcheck(&["replay", &fixture(p), &fixture(v), &rep]);
        assert_ne!(bad.status.code(), Some(0));
    }
}

#[test]
fn falsify_examples() {
    let g = spcheck(&["falsify", &fixture("g.aut"), &fixture("h.aut"), "--maxlen", "4"]);
    assert!(stdout(&g).contains("word: abaa\nfactor: aa"));
    for (p, v) in [("pbar.aut", "sigmastar.aut"), ("ptilde.aut", "ltilde.aut")] {
        let o = spcheck(&["falsify", &fixture(p), &fixture(v), "--maxlen", "6"]);
        assert!(stdout(&o).starts_with("none"));
    }
}

#[test]
fn wdelta_counts() {
    let o = spcheck(&["wdelta", &fixture("pring.aut"), &fixture("pring.delta")]);
    assert_eq!(stdout(&o), "columns: 17\ntransitions: 17\n");
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.delta");
    std::fs::write(&empty, "").unwrap();
    let o = spcheck(&["wdelta", &fixture("pring.aut"), &empty.to_string_lossy()]);
    assert_eq!(stdout(&o), "columns: 0\ntransitions: 0\n");
}

#[test]
fn wdelta_emits_parseable_automata() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("w.aut");
    spcheck(&["wdelta", &fixture("pring.aut"), &fixture("pring.delta"), "--emit", "aut", "--out", &out.to_string_lossy()]);
    let w = parse_automaton(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(w.transition_count(), 17);
    assert_eq!(parse_automaton(&spcheck::serialize(&w)).unwrap(), w);
}

#[test]
fn petri_analysis() {
    let ring = stdout(&spcheck(&["petri", &fixture("pring.aut"), &fixture("vring.aut"), "--which", "npv", "--analyze", "km"]));
    assert!(ring.contains("bounded") && ring.contains("Finite(5 transitions)"), "{ring}");
    let bar = stdout(&spcheck(&["petri", &fixture("pbar.aut"), &fixture("vbar.aut"), "--which", "npv", "--analyze", "km"]));
    assert!(bar.starts_with("unbounded"), "{bar}");
    let dot = stdout(&spcheck(&["petri", &fixture("eps.aut"), &fixture("eps.aut"), "--emit", "dot"]));
    assert!(dot.starts_with("digraph") && dot.trim_end().ends_with('}'));
}

#[test]
fn petri_pnml_round_trip() {
    for which in ["npv", "npvfull"] {
        let pnml = stdout(&spcheck(&["petri", &fixture("pring.aut"), &fixture("vring.aut"), "--which", which, "--emit", "pnml"]));
        let net = PetriNet::from_pnml(&pnml).unwrap();
        assert_eq!(PetriNet::from_pnml(&net.to_pnml()).unwrap(), net);
        assert!(!net.transitions.is_empty());
    }
}

#[test]
fn family_examples() {
    let member = stdout(&spcheck(&["family", &fixture("s.aut"), &fixture("s.aut"), "--size", "2"]));
    let expected = parse_automaton(&std::fs::read_to_string(fixture("sbar12.aut")).unwrap()).unwrap();
    assert!(parse_automaton(&member).unwrap().isomorphic(&expected));

    let gh = spcheck(&["family", &fixture("g.aut"), &fixture("h.aut"), "--size", "3", "--check"]);
    assert_eq!(gh.status.code(), Some(1));
    assert!(stdout(&gh).contains("I'={2,3}"));

    let eps = spcheck(&["family", &fixture("eps.aut"), &fixture("eps.aut"), "--check"]);
    assert_eq!(eps.status.code(), Some(0));
    assert!(stdout(&eps).starts_with("consistent"));
}

#[test]
fn shuffle_and_segments() {
    let o = stdout(&spcheck(&["shuffle", &fixture("pbar.aut"), "abab", "aab", "ba"]));
    assert_eq!(o, "abab: member=true pre-member=true\naab: member=false pre-member=true\nba: member=false pre-member=false\n");
    let seg = spcheck(&["segments", &fixture("ptilde.aut"), &fixture("ptilde.seg")]);
    assert_eq!(seg.status.code(), Some(0));
    assert!(stdout(&seg).starts_with("compatible: 4 states"));
    let kn = spcheck(&["segments", &fixture("pbar.aut"), "K 2"]);
    assert!(stdout(&kn).starts_with("compatible: 3 states"));
}

#[test]
fn budget_profile_from_env() {
    let o = Command::new(env!("CARGO_BIN_EXE_spcheck"))
        .args(["decide", &fixture("s.aut"), &fixture("s.aut"), "--mode", "prefix", "--format", "keyvalue"])
        .env("SP_BUDGET_PROFILE", "ci")
        .output()
        .unwrap();
    assert!(stdout(&o).contains("budget.frontier=20000"));
}
