use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use program_adverbs::circuit::{
    app_depth, app_num_var, check_properties, embed_reified, parse_circuit, random_reified_term, CircuitLang,
};
use program_adverbs::haxl::{self, Analyzer};
use program_adverbs::netsim::{self, initial_stores, network_model, verify_chain, ServerLang};
use program_adverbs::report::Status;
use program_adverbs::semantics::{powerset_interpret, refinement_witness, trace_sem, Env, OutcomeModel, TraceSet};
use program_adverbs::sexpr::{parse_all, parse_term_file, value_from_sexpr};
use program_adverbs::theory::{prove_bounded, Judgment, Relation, Theory, TheoryId};
use program_adverbs::{EmbedError, ParseError, SemError, Term};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

mod report;

use report::{Report, Verdict};

#[derive(Parser, Debug)]
#[command(name = "adverbs", version, about = "Check program-adverb theories, circuits, fetch costs and server refinements")]
struct Cli {
    /// Print the report as JSON.
    #[arg(long, global = true)]
    json: bool,
    /// Seed for random property runs.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Boolean circuits.
    #[command(subcommand)]
    Circuit(CircuitCmd),
    /// Term equivalence.
    #[command(subcommand)]
    Equiv(CheckCmd),
    /// Term refinement.
    #[command(subcommand)]
    Refine(CheckCmd),
    /// Data-fetch cost analysis.
    #[command(subcommand)]
    Haxl(HaxlCmd),
    /// The event-loop server.
    #[command(subcommand)]
    Server(ServerCmd),
}

#[derive(Subcommand, Debug)]
enum CircuitCmd {
    /// Depth and variable counts of a circuit and of its reified embedding.
    Stats { file: PathBuf },
    /// The four questions about a circuit.
    Check {
        file: PathBuf,
        /// Proof search depth.
        #[arg(long, default_value_t = 4)]
        depth: usize,
        /// Random reified terms checked for the height/variable bound.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
}

#[derive(Subcommand, Debug)]
enum CheckCmd {
    /// Prove the judgment in the chosen theories, else test it on bounded traces.
    Check(CheckArgs),
}

#[derive(Args, Debug)]
struct CheckArgs {
    /// Comma-separated theory names, e.g. `statically,dynamically`.
    #[arg(long)]
    theory: String,
    /// Proof search depth.
    #[arg(long, default_value_t = 5)]
    depth: usize,
    /// Unrolling bound of `kplus` on the left-hand side.
    #[arg(long = "bound-l", default_value_t = 2)]
    bound_l: usize,
    /// Unrolling bound of `kplus` on the right-hand side.
    #[arg(long = "bound-r", default_value_t = 4)]
    bound_r: usize,
    /// Term file of the left-hand side.
    lhs: PathBuf,
    /// Term file of the right-hand side.
    rhs: PathBuf,
}

#[derive(Subcommand, Debug)]
enum HaxlCmd {
    /// Rounds and requests of one run against a database.
    Analyze {
        file: PathBuf,
        /// `(key value)` pairs.
        #[arg(long)]
        db: PathBuf,
        /// Cost `liftA2` like `bind` (no batching).
        #[arg(long)]
        sequential: bool,
    },
}

#[derive(Subcommand, Debug)]
enum ServerCmd {
    /// Checks Impl ⊑ L1 ⊑ L2 ⊑ L3 ⊑ Spec.
    Verify {
        #[arg(long, default_value_t = 2)]
        conns: u32,
        #[arg(long = "bound-l", default_value_t = 2)]
        bound_l: usize,
        #[arg(long = "bound-r", default_value_t = 4)]
        bound_r: usize,
        /// Also check Spec ⊑ Impl, which is expected to be refuted.
        #[arg(long)]
        reverse: bool,
    },
    /// Behaviors of a server program from every initial connection list.
    Trace {
        file: PathBuf,
        #[arg(long, default_value_t = 2)]
        conns: u32,
        #[arg(long, default_value_t = 2)]
        bound: usize,
    },
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse { path: String, source: ParseError },
    #[error(transparent)]
    Sem(#[from] SemError),
    #[error(transparent)]
    Embed(#[from] EmbedError),
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn parsed<T>(path: &Path, r: Result<T, ParseError>) -> Result<T, CliError> {
    r.map_err(|source| CliError::Parse {
        path: path.display().to_string(),
        source,
    })
}

fn theory(names: &str) -> Result<Theory, CliError> {
    let ids = names
        .split(',')
        .map(|n| TheoryId::from_name(n.trim()).ok_or_else(|| CliError::Usage(format!("unknown theory {n:?}"))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Theory::of(&ids))
}

fn check_bounds(l: usize, r: usize) -> Result<(), CliError> {
    if l >= 1 && r >= l {
        Ok(())
    } else {
        Err(CliError::Usage("bounds must satisfy 1 <= --bound-l <= --bound-r".into()))
    }
}

/// The first behavior in exactly one of the two sets.
fn difference(l: &TraceSet, r: &TraceSet) -> Option<String> {
    if let Some(b) = l.iter().find(|b| !r.contains(b)) {
        return Some(format!("only lhs: {b}"));
    }
    r.iter().find(|b| !l.contains(b)).map(|b| format!("only rhs: {b}"))
}

fn relation_check(args: &CheckArgs, rel: Relation, report: &mut Report) -> Result<(), CliError> {
    check_bounds(args.bound_l, args.bound_r)?;
    let th = theory(&args.theory)?;
    let lhs = parsed(&args.lhs, parse_term_file(&read(&args.lhs)?))?;
    let rhs = parsed(&args.rhs, parse_term_file(&read(&args.rhs)?))?;
    let sym = if rel == Relation::Equiv { "≅" } else { "⊑" };
    let name = format!("{} {sym} {}", args.lhs.display(), args.rhs.display());
    let j = Judgment {
        rel,
        lhs: lhs.clone(),
        rhs: rhs.clone(),
    };
    if let Some(d) = prove_bounded(&th, &j, args.depth) {
        report.verdicts.push(Verdict::new(name, Status::Proved).detail(format!("derivation size {}", d.size())));
        return Ok(());
    }
    let model = OutcomeModel::fresh();
    let witness = match rel {
        Relation::Equiv => {
            let interp = if th.ids().contains(&TheoryId::StaticallyInParallel) {
                powerset_interpret
            } else {
                trace_sem
            };
            difference(&interp(&lhs, &model, args.bound_l)?, &interp(&rhs, &model, args.bound_l)?)
        }
        Relation::Refine => refinement_witness(&lhs, &rhs, &model, args.bound_l, args.bound_r)?
            .map(|b| format!("only lhs: {b}")),
    };
    let v = match witness {
        Some(w) => Verdict::new(name, Status::Refuted).witness(w),
        None => Verdict::new(name, Status::Unknown).detail(format!("no derivation within depth {}; oracle agrees", args.depth)),
    };
    report.verdicts.push(v.bounds(args.bound_l, args.bound_r));
    Ok(())
}

fn run(cli: &Cli, report: &mut Report) -> Result<(), CliError> {
    match &cli.cmd {
        Cmd::Circuit(CircuitCmd::Stats { file }) => {
            let c = parsed(file, parse_circuit(&read(file)?))?;
            let lang = CircuitLang::for_circuit(&c);
            let t = embed_reified(&lang, &c);
            let depth = app_depth(&t).map_err(SemError::from)?;
            report.stat("circuit", &c);
            report.stat("depth", c.depth());
            report.stat("num_var", c.num_var());
            report.stat("app_depth", depth);
            report.stat("app_num_var", app_num_var(&t).map_err(SemError::from)?);
            report.stat("bound", 2u64.pow(depth));
        }
        Cmd::Circuit(CircuitCmd::Check { file, depth, samples }) => {
            let c = parsed(file, parse_circuit(&read(file)?))?;
            report.verdicts.extend(check_properties(&c, *depth)?.into_iter().map(Verdict::from));
            if *samples > 0 {
                let lang = CircuitLang::new(&["x", "y", "z"]);
                let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
                let mut violation = None;
                for _ in 0..*samples {
                    let t = random_reified_term(&mut rng, &lang, 8);
                    let (d, n) = (app_depth(&t).map_err(SemError::from)?, app_num_var(&t).map_err(SemError::from)?);
                    if u64::from(n) > 2u64.pow(d) {
                        violation = Some(t);
                        break;
                    }
                }
                let name = format!("4/random-terms (seed {}, {samples} samples)", cli.seed);
                report.verdicts.push(match violation {
                    None => Verdict::new(name, Status::Proved),
                    Some(t) => Verdict::new(name, Status::Refuted).witness(t.to_string()),
                });
            }
        }
        Cmd::Equiv(CheckCmd::Check(args)) => relation_check(args, Relation::Equiv, report)?,
        Cmd::Refine(CheckCmd::Check(args)) => relation_check(args, Relation::Refine, report)?,
        Cmd::Haxl(HaxlCmd::Analyze { file, db, sequential }) => {
            let (lang, t) = parsed(file, haxl::parse_program(&read(file)?))?;
            let env = parsed(db, parse_db(&read(db)?))?;
            let analyzer = if *sequential {
                Analyzer::sequential(&lang)
            } else {
                Analyzer::new(&lang)
            };
            let cost = analyzer.analyze(&t, &env)?;
            report.stat("value", &cost.value);
            report.stat("rounds", cost.rounds);
            report.stat("requests", cost.requests);
        }
        Cmd::Server(ServerCmd::Verify {
            conns,
            bound_l,
            bound_r,
            reverse,
        }) => {
            check_bounds(*bound_l, *bound_r)?;
            let links = verify_chain(*conns, *bound_l, *bound_r).map_err(|e| match e {
                netsim::VerifyError::Embed(e) => CliError::Embed(e),
                netsim::VerifyError::Sem(e) => CliError::Sem(e),
            })?;
            let keep = if *reverse { links.len() } else { 4 };
            for l in links.into_iter().take(keep) {
                let mut v = Verdict::new(l.link.name(), l.verdict())
                    .bounds(l.bounds.0, l.bounds.1)
                    .detail(format!("derivation {}, oracle {}", l.derivation, l.oracle));
                if let Some(w) = l.witness {
                    v = v.witness(w);
                }
                report.verdicts.push(v);
            }
        }
        Cmd::Server(ServerCmd::Trace { file, conns, bound }) => {
            let p = parsed(file, netsim::parse_program(&read(file)?))?;
            let lang = ServerLang::new(*conns, *conns as usize + 2);
            let t: Term = lang.embed(&p.body)?;
            for store in initial_stores(&lang, *conns) {
                let ts = trace_sem(&t, &network_model().with_store(store.clone()), *bound)?;
                for b in ts.iter() {
                    report.traces.push(format!("{} | {b}", store["conns"]));
                }
            }
            report.stat("behaviors", report.traces.len());
        }
    }
    Ok(())
}

/// `(key value)` pairs.
fn parse_db(text: &str) -> Result<Env, ParseError> {
    let mut env = BTreeMap::new();
    for item in parse_all(text)? {
        match item.as_list() {
            Some([k, v]) if k.as_atom().is_some() => {
                env.insert(k.as_atom().expect("atom").to_string(), value_from_sexpr(v)?);
            }
            _ => {
                return Err(ParseError::Malformed {
                    what: "database entry",
                    text: item.to_string(),
                })
            }
        }
    }
    Ok(env)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut report = Report::new(std::env::args().skip(1).collect());
    let start = Instant::now();
    if let Err(e) = run(&cli, &mut report) {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    report.timing.elapsed_ms = start.elapsed().as_secs_f64() * 1000.0;
    if cli.json {
        println!("{}", serde_json::to_string_pretty(&report).expect("serializable"));
    } else {
        print!("{}", report.to_text());
    }
    ExitCode::from(report.exit_code() as u8)
}
