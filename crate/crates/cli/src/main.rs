use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use plam_core::bigstep::BigStep;
use plam_core::fixtures;
use plam_core::gen::{GenConfig, TermGen};
use plam_core::lab::assign::{self, AssignmentProblem, Solve};
use plam_core::lab::{applicative_compare, refute_bisim, refute_sim, sequences, DistinguishingTrace, GameConfig};
use plam_core::props;
use plam_core::smallstep::{convergence_table, step_tree, Caps, StepTree, Strategy};
use plam_core::syntax::{free_vars, is_hnf};
use plam_core::tree::{prob_tree, tree_eq, TreeVerdict};
use plam_core::{parse, Error, Term};

/// Exact interpreter and equivalence toolkit for the probabilistic λ-calculus.
///
/// Terms use `\x y.M` (or `λ`) for abstraction, juxtaposition for
/// application and `(+)` (or `⊕`) for fair choice. Built-in constants:
/// I, T, F, Delta, Omega, Theta, hid.
#[derive(Parser)]
#[command(name = "plam", version)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Head,
    Spine,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a term and print it back.
    Parse { term: String },
    /// Evaluate with the fuel-bounded big-step semantics.
    Eval {
        term: String,
        #[arg(long, default_value_t = 16)]
        fuel: u32,
    },
    /// Show the reduction tree and cumulative convergence table.
    Trace {
        term: String,
        #[arg(long, value_enum, default_value_t = StrategyArg::Head)]
        strategy: StrategyArg,
        #[arg(long, default_value_t = 8)]
        steps: usize,
        /// Most leaves explored before giving up.
        #[arg(long, default_value_t = 1 << 16)]
        leaves: usize,
    },
    /// Build the probabilistic tree of a term at a level.
    Tree {
        term: String,
        #[arg(long, default_value_t = 2)]
        level: u32,
        #[arg(long, default_value_t = 16)]
        fuel: u32,
    },
    /// Compare the trees of two terms.
    CompareTree {
        left: String,
        right: String,
        #[arg(long, default_value_t = 2)]
        level: u32,
        #[arg(long, default_value_t = 16)]
        fuel: u32,
    },
    /// Search for a trace refuting bisimilarity.
    Bisim(GameArgs),
    /// Search for a trace refuting that LEFT is simulated by RIGHT.
    Sim(GameArgs),
    /// Compare convergence under applicative contexts.
    Appcmp {
        left: String,
        right: String,
        #[arg(long, default_value_t = 16)]
        fuel: u32,
        /// Longest argument sequence.
        #[arg(long, default_value_t = 2)]
        maxlen: usize,
        #[arg(long, default_value = "I,Omega,Delta,T,F")]
        pool: String,
    },
    /// Solve a probabilistic assignment problem read from a JSON file.
    Assign {
        #[arg(long)]
        problem: std::path::PathBuf,
    },
    /// Replay the built-in catalogue of worked examples.
    Fixtures,
    /// Check invariants on randomly generated terms.
    Proptest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        cases: usize,
        /// Size bound for generated terms.
        #[arg(long, default_value_t = 12)]
        size: u32,
    },
}

#[derive(Args)]
struct GameArgs {
    left: String,
    right: String,
    /// Most labels along a trace.
    #[arg(long, default_value_t = 8)]
    depth: usize,
    #[arg(long, default_value_t = 16)]
    fuel: u32,
    /// Comma-separated closed argument terms.
    #[arg(long, default_value = "I,Omega,Delta,T,F")]
    pool: String,
    /// Tree level used to tell head normal forms apart.
    #[arg(long, default_value_t = 1)]
    level: u32,
}

enum Failure {
    Usage(String),
    Resource(String),
    /// A check ran and reported a mismatch.
    Check,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Resource { .. } => Failure::Resource(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

type Run = Result<(), Failure>;

fn term(s: &str) -> Result<Term, Failure> {
    parse(s).map_err(|e| Failure::Usage(format!("cannot parse `{s}`: {e}")))
}

fn pool(s: &str) -> Result<Vec<Term>, Failure> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let t = term(part)?;
        if !t.is_closed() {
            return Err(Failure::Usage(format!("pool term `{part}` is not closed")));
        }
        out.push(t);
    }
    Ok(out)
}

fn emit(format: Format, v: Value, text: impl FnOnce() -> String) {
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&v).expect("values serialize")),
        Format::Text => print!("{}", text()),
    }
}

fn render_tree(t: &StepTree, indent: usize, out: &mut String) {
    out.push_str(&format!("{}{}: {}\n", "  ".repeat(indent), t.prob, t.term));
    for c in &t.children {
        render_tree(c, indent + 1, out);
    }
}

fn render_trace(tr: &DistinguishingTrace) -> String {
    let mut s = String::new();
    for st in &tr.steps {
        s.push_str(&format!("{:>4}  {}  |  {}\n", st.label.to_string(), st.left, st.right));
    }
    let sep = &tr.separation;
    let block = match &sep.block {
        None => "all states".to_string(),
        Some(b) => b.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", "),
    };
    s.push_str(&format!(
        "   τ  into {block}: left [{}, {}] vs right [{}, {}]\n",
        sep.left.lower, sep.left.upper, sep.right.lower, sep.right.upper
    ));
    s
}

fn game(format: Format, a: &GameArgs, bisim: bool) -> Run {
    let (l, r) = (term(&a.left)?, term(&a.right)?);
    let cfg =
        GameConfig { depth: a.depth, fuel: a.fuel, pool: pool(&a.pool)?, tree_level: a.level, ..GameConfig::default() };
    let found = if bisim { refute_bisim(&l, &r, cfg)? } else { refute_sim(&l, &r, cfg)? };
    let v = match &found {
        Some(tr) => json!({"verdict": "refuted", "trace": tr.to_json()}),
        None => json!({"verdict": "inconclusive"}),
    };
    emit(format, v, || match &found {
        Some(tr) => format!("refuted ({})\n{}", tr.relation.name(), render_trace(tr)),
        None => "inconclusive: no distinguishing trace within the bounds\n".to_string(),
    });
    Ok(())
}

fn run(cli: Cli) -> Run {
    let format = cli.format;
    match cli.command {
        Command::Parse { term: src } => {
            let t = term(&src)?;
            let free: Vec<String> = free_vars(&t).iter().map(|n| n.to_string()).collect();
            let v = json!({"term": t.to_string(), "size": t.size(), "free": free, "closed": t.is_closed(), "hnf": is_hnf(&t)});
            emit(format, v, || format!("{t}\n"));
        }
        Command::Eval { term: src, fuel } => {
            let r = BigStep::new().eval_result(&term(&src)?, fuel)?;
            emit(format, r.to_json(), || {
                let mut s = String::new();
                for (text, _, w) in r.distr.sorted_entries() {
                    s.push_str(&format!("{w}  {text}\n"));
                }
                s.push_str(&format!("mass {}, deficit {}\n", r.mass(), r.deficit));
                s
            });
        }
        Command::Trace { term: src, strategy, steps, leaves } => {
            let t = term(&src)?;
            let strategy = match strategy {
                StrategyArg::Head => Strategy::Head,
                StrategyArg::Spine => Strategy::Spine,
            };
            let caps = Caps { leaves, ..Caps::default() };
            let tree = step_tree(&t, steps, strategy, &caps)?;
            let table = convergence_table(&t, steps, strategy, &caps)?;
            let v = json!({"tree": tree.to_json(), "table": table.to_json()});
            emit(format, v, || {
                let mut s = String::new();
                render_tree(&tree, 0, &mut s);
                s.push_str("steps  reached\n");
                for (n, row) in table.rows.iter().enumerate() {
                    s.push_str(&format!("{n:>5}  {row}\n"));
                }
                s
            });
        }
        Command::Tree { term: src, level, fuel } => {
            let pt = prob_tree(&term(&src)?, level, fuel)?;
            emit(format, pt.to_json(), || {
                let mut s = pt.render();
                if !pt.deficit.is_zero() {
                    s.push_str(&format!("deficit {}\n", pt.deficit));
                }
                s
            });
        }
        Command::CompareTree { left, right, level, fuel } => {
            let a = prob_tree(&term(&left)?, level, fuel)?;
            let b = prob_tree(&term(&right)?, level, fuel)?;
            let v = tree_eq(&a, &b)?;
            emit(format, v.to_json(), || match &v {
                TreeVerdict::Equal => "equal\n".into(),
                TreeVerdict::Different(d) => {
                    format!("different at path {:?}, {}: {} vs {}\n", d.path, d.at, d.left, d.right)
                }
                TreeVerdict::Unknown { bound } => format!("unknown: undecided mass up to {bound}\n"),
            });
        }
        Command::Bisim(a) => game(format, &a, true)?,
        Command::Sim(a) => game(format, &a, false)?,
        Command::Appcmp { left, right, fuel, maxlen, pool: p } => {
            let seqs = sequences(&pool(&p)?, maxlen);
            let rep = applicative_compare(&term(&left)?, &term(&right)?, &seqs, fuel)?;
            emit(format, rep.to_json(), || {
                let mut s = String::new();
                for row in &rep.rows {
                    let args: Vec<String> = row.args.iter().map(|a| format!("({a})")).collect();
                    s.push_str(&format!(
                        "[{}, {}] vs [{}, {}]  {}  {}\n",
                        row.left.lower,
                        row.left.upper,
                        row.right.lower,
                        row.right.upper,
                        row.verdict.name(),
                        if args.is_empty() { "(no arguments)".to_string() } else { args.join(" ") }
                    ));
                }
                s
            });
        }
        Command::Assign { problem } => {
            let text = std::fs::read_to_string(&problem)
                .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", problem.display())))?;
            let pb = AssignmentProblem::from_json(&text)?;
            let out = assign::solve(&pb);
            emit(format, out.to_json(), || match &out {
                Solve::Solved(sol) => {
                    let mut s = String::from("feasible\n");
                    for ((k, m), v) in &sol.s {
                        s.push_str(&format!("s[{}, {}] = {v}\n", k + 1, assign::render_subset(*m)));
                    }
                    s
                }
                Solve::Infeasible { witness } => format!("infeasible, witness {}\n", assign::render_subset(*witness)),
            });
        }
        Command::Fixtures => {
            let outcomes = fixtures::run();
            let failed = outcomes.iter().filter(|o| !o.passed).count();
            let v = json!({
                "passed": outcomes.len() - failed,
                "failed": failed,
                "fixtures": outcomes.iter().map(|o| o.to_json()).collect::<Vec<_>>(),
            });
            emit(format, v, || {
                let mut s = String::new();
                for o in &outcomes {
                    let mark = if o.passed { "pass" } else { "FAIL" };
                    s.push_str(&format!("{mark}  {}", o.name));
                    if !o.passed {
                        s.push_str(&format!(": {}", o.detail));
                    }
                    s.push('\n');
                }
                s.push_str(&format!("{} passed, {failed} failed\n", outcomes.len() - failed));
                s
            });
            if failed > 0 {
                return Err(Failure::Check);
            }
        }
        Command::Proptest { seed, cases, size } => proptest(format, seed, cases, size)?,
    }
    Ok(())
}

fn proptest(format: Format, seed: u64, cases: usize, size: u32) -> Run {
    let mut closed = TermGen::new(seed, GenConfig::closed(size));
    let mut open = TermGen::new(seed ^ 0x5bd1_e995, GenConfig::open(size, &["x", "y"]));
    let cfg = GameConfig::default();
    let names = [
        "print/parse round trip",
        "fuel monotonicity",
        "step stochasticity",
        "head and spine agree",
        "big-step/reduction sandwich",
        "evaluation identities",
        "game certificates replay",
        "tree level monotonicity",
    ];
    let mut passed = vec![0usize; names.len()];
    let mut skipped = vec![0usize; names.len()];
    let mut failures: Vec<Value> = Vec::new();
    for _ in 0..cases {
        let (a, b, o) = (closed.term(), closed.term(), open.term());
        let checks = [
            props::print_parse_round_trip(&o),
            props::fuel_monotone(&a, 8),
            props::step_stochastic(&o),
            props::strategies_agree(&a, 8),
            props::sandwich(&a, 8, 24),
            props::eval_identities(&a, 8),
            props::game_certificates_replay(&a, &b, &cfg),
            props::tree_levels_monotone(&a, &b, 3, 8),
        ];
        for (i, c) in checks.into_iter().enumerate() {
            match c {
                Ok(None) => passed[i] += 1,
                Ok(Some(why)) => failures.push(json!({"property": names[i], "terms": [a.to_string(), b.to_string(), o.to_string()], "detail": why})),
                Err(Error::Resource { .. }) => skipped[i] += 1,
                Err(e) => return Err(e.into()),
            }
        }
    }
    let rows: Vec<Value> = names
        .iter()
        .enumerate()
        .map(|(i, n)| json!({"property": n, "passed": passed[i], "skipped": skipped[i]}))
        .collect();
    let ok = failures.is_empty();
    emit(format, json!({"seed": seed, "cases": cases, "properties": rows, "failures": failures}), || {
        let mut s = String::new();
        for (i, n) in names.iter().enumerate() {
            s.push_str(&format!("{:>6} passed, {:>3} skipped  {n}\n", passed[i], skipped[i]));
        }
        for f in &failures {
            s.push_str(&format!("FAIL {f}\n"));
        }
        s
    });
    if ok {
        Ok(())
    } else {
        Err(Failure::Check)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Resource(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Check) => ExitCode::from(3),
    }
}
