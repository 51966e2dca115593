use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use beliefkit::format::{self, Model};
use beliefkit::netmodel::{validate_hypergraph, validate_network};
use beliefkit::reasoning::measure_table;
use beliefkit::*;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "beliefkit", version, about = "Belief functions over populations: sampling, learning and reasoning")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Seed for stochastic commands (required by those commands).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Significance level of the independence tests.
    #[arg(long, global = true, default_value_t = 0.05)]
    alpha: f64,
    /// Frames with at most this many configurations use full subset lattices.
    #[arg(long, global = true)]
    lattice_cap: Option<usize>,
    /// Numerical tolerance for validity checks.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tolerance: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a population from a model file.
    Generate {
        model: PathBuf,
        /// Cases for a network, passes for a hypergraph model.
        #[arg(short)]
        n: usize,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Run a population through a process given as a bpa file.
    Process {
        population: PathBuf,
        process: PathBuf,
        /// Use analytic expected counts instead of seeded draws.
        #[arg(long)]
        expected: bool,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Learn a skeleton from a population.
    Learn {
        population: PathBuf,
        /// Largest conditioning set.
        #[arg(long, default_value_t = 2)]
        max_cond: usize,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Fit network factors to a population for a given dag file.
    Fit {
        population: PathBuf,
        dag: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Posterior measure tables from a model.
    ReasonModel {
        model: PathBuf,
        #[arg(long)]
        evidence: Option<PathBuf>,
        /// Comma-separated variables; repeat for several tables.
        #[arg(long = "target")]
        targets: Vec<String>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Posterior measure tables from a population.
    ReasonData {
        population: PathBuf,
        #[arg(long)]
        evidence: Option<PathBuf>,
        #[arg(long = "target")]
        targets: Vec<String>,
        /// Draw probabilistic evidence per record (needs --seed).
        #[arg(long)]
        monte_carlo: bool,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Bel distances between two measure-table files.
    Compare {
        left: PathBuf,
        right: PathBuf,
        /// Fail with exit code 2 when a distance exceeds this bound.
        #[arg(long)]
        bound: Option<f64>,
    },
    /// Check a bpa, model or population file.
    Validate {
        file: PathBuf,
        /// Joint bpa the model should reproduce.
        #[arg(long)]
        reference: Option<PathBuf>,
    },
}

struct Failure {
    code: u8,
    msg: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Parse { .. } => 4,
            e if e.is_conflict() => 3,
            _ => 2,
        };
        Failure { code, msg: e.to_string() }
    }
}

fn fail(code: u8, msg: impl Into<String>) -> Failure {
    Failure { code, msg: msg.into() }
}

type Res<T> = std::result::Result<T, Failure>;

fn read(path: &Path) -> Res<String> {
    fs::read_to_string(path).map_err(|e| fail(4, format!("{}: {e}", path.display())))
}

/// Parse errors are prefixed with the file they came from.
fn parsed<T>(path: &Path, r: Result<T>) -> Res<T> {
    r.map_err(|e| {
        let f = Failure::from(e);
        Failure { msg: format!("{}: {}", path.display(), f.msg), ..f }
    })
}

fn emit(out: &Option<PathBuf>, text: &str) -> Res<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| fail(4, format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn seed(g: &Global, cmd: &str) -> Res<u64> {
    g.seed.ok_or_else(|| fail(2, format!("{cmd} is stochastic: pass --seed")))
}

fn limits(g: &Global) -> Limits {
    let mut l = Limits::default();
    if let Some(c) = g.lattice_cap {
        l.lattice_configs = c;
    }
    l
}

fn targets(list: &[String]) -> Vec<Vec<String>> {
    list.iter()
        .map(|t| t.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect())
        .collect()
}

fn evidence(path: &Option<PathBuf>, frame: &std::sync::Arc<Frame>) -> Res<EvidenceSpec64> {
    match path {
        Some(p) => parsed(p, format::parse_evidence(&read(p)?, frame)),
        None => Ok(EvidenceSpec::new()),
    }
}

fn tables(frame: &Frame, marginals: &[Bpa64]) -> Res<String> {
    let ts = marginals.iter().map(|m| measure_table(m, &[])).collect::<Result<Vec<_>>>()?;
    Ok(format::write_tables(frame, &ts))
}

fn generate(g: &Global, model: &Path, n: usize, out: &Option<PathBuf>) -> Res<()> {
    let seed = seed(g, "generate")?;
    let m: Model<f64> = parsed(model, format::parse_model(&read(model)?))?;
    let provenance = format!("generated from {} with seed {seed}", model.display());
    if n == 0 {
        let empty = Population64::new(m.frame()).with_provenance(provenance);
        let stats = SampleStats { seed, ..SampleStats::default() };
        emit(out, &format::write_population(&empty, Some(&stats)))?;
        return Err(fail(3, "warning: n = 0, wrote an empty population"));
    }
    let (pop, stats) = match &m {
        Model::Network(net) => sample_network(net, n, seed)?,
        Model::Hypergraph(h) if h.factors().iter().all(Bpa::is_proper) => sample_hypergraph(h, n, seed)?,
        Model::Hypergraph(h) => sample_signed(h, n, seed, true)?,
    };
    emit(out, &format::write_population(&pop.with_provenance(provenance), Some(&stats)))
}

fn process(g: &Global, population: &Path, process: &Path, expected: bool, out: &Option<PathBuf>) -> Res<()> {
    let (pop, _) = parsed(population, format::parse_population::<f64>(&read(population)?))?;
    let pr: Bpa64 = parsed(process, format::parse_bpa(&read(process)?))?;
    let result = if pr.len() == 1 {
        let (set, _) = pr.focal().next().expect("one focal set");
        pop.apply_deterministic_process(&set)?
    } else if expected {
        pop.expected_counts(&pr)?
    } else {
        pop.apply_random_process(&pr, seed(g, "a random process")?)?
    };
    emit(out, &format::write_population(&result, None))
}

fn learn(g: &Global, population: &Path, max_cond: usize, out: &Option<PathBuf>) -> Res<()> {
    let (pop, _) = parsed(population, format::parse_population::<f64>(&read(population)?))?;
    let opts = CiOptions {
        alpha: g.alpha,
        limits: limits(g),
        tolerance: g.tolerance,
        ..CiOptions::default()
    };
    let sk = learn_skeleton(&pop, &opts, max_cond)?;
    for r in &sk.log {
        if let Err(e) = &r.outcome {
            eprintln!("test {} {}: {e}", sk.names[r.x], sk.names[r.y]);
        }
    }
    emit(out, &format::write_skeleton(&sk))
}

fn fit(g: &Global, population: &Path, dag: &Path, out: &Option<PathBuf>) -> Res<()> {
    let (pop, _) = parsed(population, format::parse_population::<f64>(&read(population)?))?;
    let names = pop.frame().names();
    let dag = parsed(dag, format::parse_dag(&read(dag)?, &names))?;
    let net = beliefkit::learning::fit_factors_with(&pop, &dag, &limits(g), &g.tolerance)?;
    emit(out, &format::write_model(&Model::Network(net)))
}

fn validate(g: &Global, file: &Path, reference: &Option<PathBuf>) -> Res<()> {
    let text = read(file)?;
    let tol = g.tolerance;
    let mut report = String::new();
    let mut ok = true;
    let headers: Vec<&str> = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty() && !l.starts_with("var "))
        .collect();
    let bpa_blocks = headers.iter().filter(|l| l.starts_with("bpa ")).count();
    let is_model = headers.iter().any(|l| *l == "dag" || l.starts_with("edge ")) || bpa_blocks > 1;
    if is_model {
        let m: Model<f64> = parsed(file, format::parse_model(&text))?;
        let refm = match reference {
            Some(p) => Some(parsed(p, format::parse_bpa::<f64>(&read(p)?))?),
            None => None,
        };
        let r = match &m {
            Model::Network(n) => validate_network(n, refm.as_ref(), &limits(g), &tol),
            Model::Hypergraph(h) => validate_hypergraph(h, refm.as_ref(), &limits(g), &tol),
        };
        let kind = if matches!(m, Model::Network(_)) { "network" } else { "hypergraph" };
        let _ = writeln!(report, "{kind} model with {} factors", m.factors().len());
        for issue in &r.issues {
            let _ = writeln!(report, "issue: {issue}");
        }
        if let Some(d) = r.max_deviation {
            let _ = writeln!(report, "max deviation from reference: {d:e}");
        }
        ok = r.ok();
    } else if bpa_blocks == 1 {
        let m: Bpa64 = parsed(file, format::parse_bpa(&text))?;
        let r = m.validate_with(&limits(g), &tol);
        let _ = writeln!(
            report,
            "bpa with {} focal elements: {} (signed sum {}, min Bel {}, min Q {}{})",
            m.len(),
            r.class,
            r.signed_sum,
            r.min_bel,
            r.min_q,
            if r.exhaustive { "" } else { ", focal elements only" }
        );
        ok = r.class != BpaClass::Invalid;
    } else {
        let (pop, stats) = parsed(file, format::parse_population::<f64>(&text))?;
        let _ = writeln!(report, "population of {} objects, total weight {}", pop.len(), pop.total_weight());
        if let Some(s) = stats {
            let _ = writeln!(report, "sampled: yield {:.4}, seed {}", s.yield_rate(), s.seed);
        }
        if let Err(e) = pop.empirical_bpa() {
            let _ = writeln!(report, "issue: {e}");
            ok = false;
        }
    }
    print!("{report}");
    if ok {
        Ok(())
    } else {
        Err(fail(2, format!("{}: validation failed", file.display())))
    }
}

fn compare(g: &Global, left: &Path, right: &Path, bound: Option<f64>) -> Res<()> {
    let (_, a) = parsed(left, format::parse_tables::<f64>(&read(left)?))?;
    let (_, b) = parsed(right, format::parse_tables::<f64>(&read(right)?))?;
    if a.len() != b.len() {
        return Err(fail(2, format!("{} tables against {}", a.len(), b.len())));
    }
    let mut worst: f64 = 0.0;
    for (ta, tb) in a.iter().zip(&b) {
        let (ma, mb) = (format::table_to_bpa(ta)?, format::table_to_bpa(tb)?);
        let c = compare_bels(&ma, &mb, &limits(g))?;
        let set = c.worst.as_ref().map_or("-".to_string(), |s| s.to_string());
        println!(
            "table over {}: max_bel_diff={:e} mean_bel_diff={:e} l1_mass={:e} worst={} sets={}",
            ta.frame.names().join(","),
            c.max_bel_diff,
            c.mean_bel_diff,
            c.l1_mass,
            set,
            c.sets_compared
        );
        worst = worst.max(c.max_bel_diff);
    }
    match bound {
        Some(b) if worst > b => Err(fail(2, format!("max Bel distance {worst:e} exceeds {b:e}"))),
        _ => Ok(()),
    }
}

fn run(cli: Cli) -> Res<()> {
    let g = &cli.global;
    if !(0.0..=1.0).contains(&g.alpha) {
        return Err(fail(2, "--alpha must lie in [0, 1]"));
    }
    match &cli.command {
        Command::Generate { model, n, out } => generate(g, model, *n, out),
        Command::Process { population, process: p, expected, out } => process(g, population, p, *expected, out),
        Command::Learn { population, max_cond, out } => learn(g, population, *max_cond, out),
        Command::Fit { population, dag, out } => fit(g, population, dag, out),
        Command::ReasonModel { model, evidence: ev, targets: t, out } => {
            let m: Model<f64> = parsed(model, format::parse_model(&read(model)?))?;
            let ev = evidence(ev, m.frame())?;
            let marginals = reason_model(&m, &ev, &targets(t))?;
            emit(out, &tables(m.frame(), &marginals)?)
        }
        Command::ReasonData { population, evidence: ev, targets: t, monte_carlo, out } => {
            let (pop, _) = parsed(population, format::parse_population::<f64>(&read(population)?))?;
            let ev = evidence(ev, pop.frame())?;
            let mode = if *monte_carlo {
                DataMode::MonteCarlo { seed: seed(g, "--monte-carlo")? }
            } else {
                DataMode::Analytic
            };
            let marginals = reason_data(&pop, &ev, &targets(t), mode)?;
            emit(out, &tables(pop.frame(), &marginals)?)
        }
        Command::Compare { left, right, bound } => compare(g, left, right, *bound),
        Command::Validate { file, reference } => validate(g, file, reference),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
