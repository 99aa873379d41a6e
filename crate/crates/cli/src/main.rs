use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use spcheck::decision::{parse_report, render_keyvalue, render_report};
use spcheck::family::{build_family_member, check_self_similarity, SelfSimilarity};
use spcheck::oracle::sp_falsify;
use spcheck::petri::{
    build_np_v_full, build_npv, decide_alf_pre_finite, karp_miller, AlfPre, Boundedness, PetriNet,
};
use spcheck::representation::{build_delta_paren, build_w_delta, parse_delta};
use spcheck::segments::{l_of_segment, partial_powerset, InitialSegment, SegmentStatus};
use spcheck::{
    decide_sp, parse_automaton, parse_word, render_word, replay_certificate, serialize, Budget, Dfa, Mode,
    ShuffleAutomaton, SpQuery, Verdict,
};

/// Exit code for parse and validation errors.
const ERROR_EXIT: u8 = 3;

#[derive(Parser)]
#[command(name = "spcheck", version, about = "Closure of regular languages under shuffle projection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether V is closed under shuffle projection w.r.t. P
    Decide(DecideArgs),
    /// Search for a bounded counterexample by enumeration
    Falsify {
        p: PathBuf,
        v: PathBuf,
        #[arg(long, default_value_t = 6)]
        maxlen: usize,
        /// search over pre(P) instead of P
        #[arg(long)]
        prefix: bool,
    },
    /// Build the local-language automaton for a transition set
    Wdelta {
        p: PathBuf,
        delta: PathBuf,
        #[arg(long, value_enum)]
        emit: Option<AutEmit>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check an initial segment for compatibility and extract its language
    Segments {
        p: PathBuf,
        /// a file of counter vectors, or `K n` inline
        segment: String,
        #[arg(long, default_value_t = 10_000)]
        cap: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit or analyze the nets built from (P, V)
    Petri {
        p: PathBuf,
        v: PathBuf,
        #[arg(long, value_enum, default_value = "npv")]
        which: Which,
        #[arg(long, value_enum)]
        emit: Option<NetEmit>,
        #[arg(long, value_enum)]
        analyze: Option<Analysis>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a family member over an indexed alphabet, or check self-similarity
    Family {
        l: PathBuf,
        v: PathBuf,
        #[arg(long, default_value_t = 3)]
        size: u32,
        #[arg(long)]
        check: bool,
        #[arg(long, default_value_t = 8)]
        maxlen: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Membership in the iterated shuffle and in its prefix closure
    Shuffle {
        p: PathBuf,
        /// words such as `abaa` or `a b a`
        words: Vec<String>,
    },
    /// Check a decision report against its query
    Replay { p: PathBuf, v: PathBuf, report: PathBuf },
}

#[derive(Args)]
struct DecideArgs {
    p: PathBuf,
    v: PathBuf,
    #[arg(long, value_enum, default_value = "general")]
    mode: ModeArg,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// key=value budget file; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    budget_markings: Option<usize>,
    #[arg(long)]
    budget_km_nodes: Option<usize>,
    #[arg(long)]
    budget_frontier: Option<usize>,
    #[arg(long)]
    budget_oracle_len: Option<usize>,
    #[arg(long)]
    budget_oracle_card: Option<usize>,
    #[arg(long)]
    budget_falsify_len: Option<usize>,
    #[arg(long)]
    budget_abstraction_k: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Prefix,
    General,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Keyvalue,
}

#[derive(Clone, Copy, ValueEnum)]
enum AutEmit {
    Dot,
    Aut,
}

#[derive(Clone, Copy, ValueEnum)]
enum NetEmit {
    Pnml,
    Dot,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum Which {
    Npv,
    Npvfull,
}

#[derive(Clone, Copy, ValueEnum)]
enum Analysis {
    Km,
}

fn load(path: &Path) -> Result<Dfa> {
    let text = read(path)?;
    parse_automaton(&text).with_context(|| format!("{}", path.display()))
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn apply_config(budget: &mut Budget, text: &str) -> Result<()> {
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, val) = line
            .split_once('=')
            .or_else(|| line.split_once(':'))
            .ok_or_else(|| anyhow!("config line {}: expected key=value", n + 1))?;
        let k = k.trim().trim_start_matches("budget.");
        let val: usize = val.trim().parse().with_context(|| format!("config line {}", n + 1))?;
        if !budget.set(k, val) {
            bail!("config line {}: unknown budget `{k}`", n + 1);
        }
    }
    Ok(())
}

fn budget_of(a: &DecideArgs) -> Result<Budget> {
    let mut b = Budget::from_env();
    if let Some(path) = &a.config {
        apply_config(&mut b, &read(path)?)?;
    }
    let flags = [
        ("markings", a.budget_markings),
        ("km_nodes", a.budget_km_nodes),
        ("frontier", a.budget_frontier),
        ("oracle_len", a.budget_oracle_len),
        ("oracle_card", a.budget_oracle_card),
        ("falsify_len", a.budget_falsify_len),
        ("abstraction_k", a.budget_abstraction_k),
    ];
    for (k, val) in flags {
        if let Some(val) = val {
            b.set(k, val);
        }
    }
    Ok(b)
}

fn decide(a: &DecideArgs) -> Result<u8> {
    let mode = match a.mode {
        ModeArg::Prefix => Mode::Prefix,
        ModeArg::General => Mode::General,
    };
    let q = SpQuery::new(load(&a.p)?, load(&a.v)?, mode).with_budget(budget_of(a)?);
    let verdict = decide_sp(&q)?;
    let text = match a.format {
        Format::Text => render_report(&q, &verdict),
        Format::Keyvalue => render_keyvalue(&q, &verdict),
    };
    emit(a.out.as_deref(), &text)?;
    Ok(verdict.exit_code() as u8)
}

fn falsify(p: &Path, v: &Path, maxlen: usize, prefix: bool) -> Result<u8> {
    let mut p = load(p)?;
    if prefix {
        p = p.all_final().normalize()?;
    }
    let caps = Budget::from_env().oracle_caps();
    match sp_falsify(&p, &load(v)?, maxlen, &caps)? {
        Some(w) => {
            let pos: Vec<String> = w.positions.iter().map(|p| p.to_string()).collect();
            println!("word: {}", render_word(&w.w));
            println!("factor: {}", render_word(&w.u));
            println!("component: {}", render_word(&w.e));
            println!("positions: {}", pos.join(" "));
            Ok(1)
        }
        None => {
            println!("none up to length {maxlen}");
            Ok(0)
        }
    }
}

fn wdelta(p: &Path, delta: &Path, format: Option<AutEmit>, out: Option<&Path>) -> Result<u8> {
    let p = load(p)?;
    let sa = ShuffleAutomaton::new(&p)?;
    let delta = parse_delta(&read(delta)?, sa.names())?;
    let cols = build_delta_paren(&p, &delta)?;
    let w = build_w_delta(&p, &delta)?;
    let letters = w.to_letter_dfa();
    println!("columns: {}", cols.len());
    println!("transitions: {}", w.automaton.transition_count());
    match format {
        Some(AutEmit::Aut) => emit(out, &serialize(&letters))?,
        Some(AutEmit::Dot) => emit(out, &letters.to_dot("W"))?,
        None => {}
    }
    Ok(0)
}

fn segments(p: &Path, seg: &str, cap: usize, out: Option<&Path>) -> Result<u8> {
    let p = load(p)?;
    let sa = ShuffleAutomaton::new(&p)?;
    let text = if seg.trim_start().starts_with('K') { seg.to_string() } else { read(Path::new(seg))? };
    let seg = InitialSegment::parse(&text, sa.names())?;
    let ps = partial_powerset(&p, &seg, cap)?;
    match &ps.status {
        SegmentStatus::Compatible => {
            println!("compatible: {} states", ps.automaton.state_count());
            emit(out, &serialize(&l_of_segment(&p, &seg, cap)?))?;
            Ok(0)
        }
        SegmentStatus::Incompatible { state, letter } => {
            let parts: Vec<String> = state.iter().map(|f| f.render_compact(sa.names())).collect();
            println!("incompatible at {{{}}} on {letter}", parts.join(","));
            Ok(1)
        }
        SegmentStatus::CapExceeded(n) => {
            println!("undetermined: more than {n} subsets");
            Ok(2)
        }
    }
}

fn render_net(net: &PetriNet, format: NetEmit) -> String {
    match format {
        NetEmit::Pnml => net.to_pnml(),
        NetEmit::Dot => net.to_dot(),
    }
}

fn petri(p: &Path, v: &Path, which: Which, format: Option<NetEmit>, analyze: Option<Analysis>, out: Option<&Path>) -> Result<u8> {
    let (p, v) = (load(p)?, load(v)?);
    let budget = Budget::from_env();
    let net = match which {
        Which::Npv => build_npv(&p, &v)?.net,
        Which::Npvfull => build_np_v_full(&p, &v)?.net,
    };
    if let Some(format) = format {
        emit(out, &render_net(&net, format))?;
    }
    if analyze.is_some() {
        let tree = karp_miller(&net, &net.initial, budget.km_nodes);
        match &tree.verdict {
            Boundedness::Bounded => println!("bounded: {} markings", tree.markings().len()),
            Boundedness::Unbounded(pump) => {
                println!("unbounded: pump of {} after {} firings", pump.cycle.len(), pump.prefix.len())
            }
            Boundedness::Unknown => println!("unknown: coverability tree capped at {}", budget.km_nodes),
        }
        if which == Which::Npv {
            match decide_alf_pre_finite(&p, &v, &budget)? {
                AlfPre::Finite { delta, .. } => println!("alphabet: Finite({} transitions)", delta.len()),
                AlfPre::Infinite { .. } => println!("alphabet: Infinite"),
                AlfPre::Unknown(why) => println!("alphabet: Unknown ({why})"),
            }
        }
    }
    Ok(0)
}

fn family(l: &Path, v: &Path, size: u32, check: bool, maxlen: usize, out: Option<&Path>) -> Result<u8> {
    let (l, v) = (load(l)?, load(v)?);
    if !check {
        let index: Vec<u32> = (1..=size).collect();
        emit(out, &serialize(&build_family_member(&l, &v, &index)?))?;
        return Ok(0);
    }
    match check_self_similarity(&l, &v, size, maxlen)? {
        SelfSimilarity::Consistent { pairs_checked } => {
            println!("consistent: {pairs_checked} projections up to length {maxlen}");
            Ok(0)
        }
        SelfSimilarity::Violation { index_set, sub, word, missing } => {
            let set = |s: &[u32]| s.iter().map(u32::to_string).collect::<Vec<_>>().join(",");
            println!("violation: I={{{}}} I'={{{}}}", set(&index_set), set(&sub));
            let kind = if missing { "missing" } else { "escaping" };
            println!("{kind}: {}", render_word(&word));
            Ok(1)
        }
    }
}

fn shuffle(p: &Path, words: &[String]) -> Result<u8> {
    let sa = ShuffleAutomaton::new(&load(p)?)?;
    for w in words {
        let x = parse_word(w).ok_or_else(|| anyhow!("bad word `{w}`"))?;
        println!("{}: member={} pre-member={}", render_word(&x), sa.member(&x), sa.pre_member(&x));
    }
    Ok(0)
}

/// The mode and budgets recorded in a text report.
fn report_context(text: &str) -> Result<(Mode, Budget)> {
    let mut mode = None;
    let mut budget = Budget::default();
    let mut section = "";
    for line in text.lines() {
        if !line.starts_with(' ') {
            section = line.trim();
            continue;
        }
        let Some((k, val)) = line.trim().split_once(':') else { continue };
        match (section, k) {
            ("VERDICT", "mode") => mode = Mode::parse(val.trim()),
            ("BUDGETS", k) => {
                let val = val.trim().parse().with_context(|| format!("budget {k}"))?;
                budget.set(k, val);
            }
            _ => {}
        }
    }
    Ok((mode.ok_or_else(|| anyhow!("report has no mode"))?, budget))
}

fn replay(p: &Path, v: &Path, report: &Path) -> Result<u8> {
    let text = read(report)?;
    let (mode, budget) = report_context(&text)?;
    let q = SpQuery::new(load(p)?, load(v)?, mode).with_budget(budget);
    let verdict = parse_report(&q, &text)?;
    if let Verdict::Unknown(_) = verdict {
        println!("nothing to replay: the verdict is unknown");
        return Ok(2);
    }
    if replay_certificate(&q, &verdict)? {
        println!("valid: {}", verdict.outcome());
        Ok(0)
    } else {
        println!("rejected");
        Ok(1)
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Decide(a) => decide(&a),
        Command::Falsify { p, v, maxlen, prefix } => falsify(&p, &v, maxlen, prefix),
        Command::Wdelta { p, delta, emit, out } => wdelta(&p, &delta, emit, out.as_deref()),
        Command::Segments { p, segment, cap, out } => segments(&p, &segment, cap, out.as_deref()),
        Command::Petri { p, v, which, emit, analyze, out } => petri(&p, &v, which, emit, analyze, out.as_deref()),
        Command::Family { l, v, size, check, maxlen, out } => family(&l, &v, size, check, maxlen, out.as_deref()),
        Command::Shuffle { p, words } => shuffle(&p, &words),
        Command::Replay { p, v, report } => replay(&p, &v, &report),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(ERROR_EXIT)
        }
    }
}
