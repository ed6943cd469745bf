use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use stable_control::classic::{irving_stable_matching, tan_stable_partition};
use stable_control::exact::{solve_exact, DEFAULT_CANDIDATE_CAP};
use stable_control::generators::{random_sm, random_sr};
use stable_control::instance::{
    parse_instance, parse_instance_unchecked, parse_matching, serialize_instance, serialize_matching,
};
use stable_control::poly::{has_poly_solver, solve_poly};
use stable_control::reductions::{
    clique_to_csm_addag, is_to_csr_addag_existssm, is_to_csr_addag_ms, parse_graph, ReductionResult,
};
use stable_control::stability::{enumerate_stable_matchings, DEFAULT_ENUMERATION_CAP};
use stable_control::{
    parse_query, serialize_query, AgentId, ControlGoal, ControlQuery, Error, GoalKind, Pair, Problem,
};

const EXIT_PARSE: u8 = 2;
const EXIT_INVALID: u8 = 3;
const EXIT_CAP: u8 = 4;

/// Stable marriage and roommates under control.
#[derive(Parser)]
#[command(name = "stablectl", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check an instance file; prints `ok` or one violation per line.
    Validate { path: PathBuf },
    /// Print a stable matching, or `none`.
    Stable {
        path: PathBuf,
        /// List every stable matching instead.
        #[arg(long)]
        enumerate: bool,
        /// Also print the stable partition.
        #[arg(long)]
        partition: bool,
        /// Most acceptable pairs allowed for --enumerate.
        #[arg(long)]
        cap: Option<usize>,
    },
    /// Solve a control problem.
    Solve(SolveArgs),
    /// Build a control query from a Clique or Independent Set instance.
    Reduce {
        #[arg(long)]
        from: Source,
        #[arg(long)]
        to: Target,
        #[arg(long)]
        k: usize,
        graph: PathBuf,
        /// Instance output; the query goes to `<out>.query`.
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a random instance.
    Gen {
        #[arg(long, conflicts_with_all = ["na", "nb"])]
        n: Option<usize>,
        #[arg(long)]
        na: Option<usize>,
        #[arg(long)]
        nb: Option<usize>,
        #[arg(long, default_value_t = 0.5)]
        density: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Marriage instance; `--n` is split between the sides.
        #[arg(long)]
        bipartite: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(clap::Args)]
struct SolveArgs {
    path: PathBuf,
    /// `<action>-<goal>`, e.g. `delag-mp`.
    #[arg(long, required_unless_present = "query")]
    problem: Option<String>,
    #[arg(long, required_unless_present = "query")]
    budget: Option<usize>,
    /// Agent for `ma` goals.
    #[arg(long)]
    target: Option<String>,
    /// `x,y` for `mp` goals.
    #[arg(long)]
    target_pair: Option<String>,
    /// Matching file for `ms` goals.
    #[arg(long)]
    matching: Option<PathBuf>,
    /// Query descriptor written by `reduce`.
    #[arg(long, conflicts_with_all = ["problem", "budget", "target", "target_pair", "matching"])]
    query: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Method::Auto)]
    method: Method,
    /// Most candidate actions for the exact solver.
    #[arg(long)]
    cap: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Auto,
    Poly,
    Exact,
}

#[derive(Clone, Copy, ValueEnum)]
enum Source {
    Clique,
    Is,
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    CsmAddagMa,
    CsmAddagEpsm,
    CsrAddagMs,
    CsrAddagEsm,
    CsrAddagEpsm,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse { .. } => EXIT_PARSE,
            Error::CapExceeded { .. } => EXIT_CAP,
            _ => EXIT_INVALID,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_INVALID,
        message: message.into(),
    }
}

type Outcome = Result<ExitCode, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate { path } => validate(&path),
        Command::Stable {
            path,
            enumerate,
            partition,
            cap,
        } => stable(&path, enumerate, partition, cap),
        Command::Solve(args) => solve(&args),
        Command::Reduce {
            from,
            to,
            k,
            graph,
            out,
        } => reduce(from, to, k, &graph, &out),
        Command::Gen {
            n,
            na,
            nb,
            density,
            seed,
            bipartite,
            out,
        } => generate(n, na, nb, density, seed, bipartite, out.as_deref()),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

/// Flag value, else `STABLECTL_CAP`, else `default`; warns when raised.
fn cap(flag: Option<usize>, default: usize) -> Result<usize, Failure> {
    let cap = match flag {
        Some(c) => c,
        None => match std::env::var("STABLECTL_CAP") {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| invalid(format!("STABLECTL_CAP is not a number: `{v}`")))?,
            Err(_) => default,
        },
    };
    if cap > default {
        eprintln!("warning: cap raised to {cap} (default {default}); exhaustive search may be slow");
    }
    Ok(cap)
}

fn validate(path: &Path) -> Outcome {
    let inst = parse_instance_unchecked(&read(path)?)?;
    let violations = inst.validate();
    if violations.is_empty() {
        println!("ok");
        return Ok(ExitCode::SUCCESS);
    }
    for v in &violations {
        println!("{v}");
    }
    Ok(ExitCode::from(EXIT_INVALID))
}

fn stable(path: &Path, enumerate: bool, partition: bool, cap_flag: Option<usize>) -> Outcome {
    let inst = parse_instance(&read(path)?)?;
    if enumerate {
        let all = enumerate_stable_matchings(&inst, cap(cap_flag, DEFAULT_ENUMERATION_CAP)?)?;
        println!("count: {}", all.len());
        for (i, m) in all.iter().enumerate() {
            println!("matching {}", i + 1);
            print!("{}", serialize_matching(m));
        }
    } else {
        match irving_stable_matching(&inst) {
            Some(m) if m.is_empty() => println!("empty"),
            Some(m) => print!("{}", serialize_matching(&m)),
            None => println!("none"),
        }
    }
    if partition {
        print!("{}", tan_stable_partition(&inst));
    }
    Ok(ExitCode::SUCCESS)
}

fn build_query(args: &SolveArgs) -> Result<ControlQuery, Failure> {
    let inst = parse_instance(&read(&args.path)?)?;
    if let Some(q) = &args.query {
        return Ok(parse_query(&read(q)?, inst)?);
    }
    let problem: Problem = args.problem.as_deref().unwrap_or_default().parse()?;
    let budget = args.budget.unwrap_or_default();
    let goal = match problem.goal {
        GoalKind::Ma => {
            let t = args.target.as_deref().ok_or_else(|| invalid("ma goals need --target"))?;
            ControlGoal::Ma(t.parse::<AgentId>()?)
        }
        GoalKind::Mp => {
            let t = args
                .target_pair
                .as_deref()
                .ok_or_else(|| invalid("mp goals need --target-pair"))?;
            ControlGoal::Mp(t.parse::<Pair>()?)
        }
        GoalKind::Ms => {
            let path = args.matching.as_deref().ok_or_else(|| invalid("ms goals need --matching"))?;
            ControlGoal::Ms(parse_matching(&read(path)?)?)
        }
        GoalKind::ExistsSm => ControlGoal::ExistsSm,
        GoalKind::ExistsPsm => ControlGoal::ExistsPsm,
    };
    let q = ControlQuery::new(inst, problem.action, goal, budget);
    q.validate()?;
    Ok(q)
}

fn solve(args: &SolveArgs) -> Outcome {
    let q = build_query(args)?;
    let problem = q.problem();
    let poly = match args.method {
        Method::Auto => has_poly_solver(problem),
        Method::Poly if has_poly_solver(problem) => true,
        Method::Poly => return Err(invalid(format!("no polynomial-time solver for {problem}"))),
        Method::Exact => false,
    };
    let out = if poly {
        solve_poly(&q)?
    } else {
        solve_exact(&q, cap(args.cap, DEFAULT_CANDIDATE_CAP)?)?
    };
    println!("problem: {problem}");
    println!("method: {}", if poly { "poly" } else { "exact" });
    println!("budget: {}", q.budget());
    println!("verdict: {}", if out.verdict { "yes" } else { "no" });
    match out.optimum {
        Some(o) => println!("optimum: {o}"),
        None => println!("optimum: unknown"),
    }
    match &out.witness {
        Some(w) if !w.is_empty() => println!("actions: {w}"),
        _ => println!("actions: -"),
    }
    Ok(ExitCode::SUCCESS)
}

fn reduce(from: Source, to: Target, k: usize, graph: &Path, out: &Path) -> Outcome {
    let g = parse_graph(&read(graph)?)?;
    let result: ReductionResult = match (from, to) {
        (Source::Clique, Target::CsmAddagMa) => clique_to_csm_addag(&g, k, GoalKind::Ma)?,
        (Source::Clique, Target::CsmAddagEpsm) => clique_to_csm_addag(&g, k, GoalKind::ExistsPsm)?,
        (Source::Is, Target::CsrAddagMs) => is_to_csr_addag_ms(&g, k)?,
        (Source::Is, Target::CsrAddagEsm) => is_to_csr_addag_existssm(&g, k, GoalKind::ExistsSm)?,
        (Source::Is, Target::CsrAddagEpsm) => is_to_csr_addag_existssm(&g, k, GoalKind::ExistsPsm)?,
        _ => return Err(invalid("this source problem does not reduce to that target")),
    };
    let text = format!("{}{}", result.name_map_comments(), serialize_instance(result.query.instance()));
    write(out, &text)?;
    let mut sidecar = out.as_os_str().to_owned();
    sidecar.push(".query");
    let sidecar = PathBuf::from(sidecar);
    write(&sidecar, &serialize_query(&result.query))?;
    println!("instance: {}", out.display());
    println!("query: {}", sidecar.display());
    println!("problem: {}", result.query.problem());
    println!("budget: {}", result.query.budget());
    Ok(ExitCode::SUCCESS)
}

fn generate(
    n: Option<usize>,
    na: Option<usize>,
    nb: Option<usize>,
    density: f64,
    seed: u64,
    bipartite: bool,
    out: Option<&Path>,
) -> Outcome {
    let inst = match (n, na, nb) {
        (Some(n), None, None) if bipartite => random_sm(n / 2, n - n / 2, density, seed)?,
        (Some(n), None, None) => random_sr(n, density, seed)?,
        (None, Some(na), Some(nb)) => random_sm(na, nb, density, seed)?,
        _ => return Err(invalid("give either --n or both --na and --nb")),
    };
    let text = serialize_instance(&inst);
    match out {
        Some(path) => write(path, &text)?,
        None => print!("{text}"),
    }
    Ok(ExitCode::SUCCESS)
}
