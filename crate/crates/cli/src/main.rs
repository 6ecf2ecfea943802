//! Command-line front end: solve, check, decide, reduce, extract, generate
//! and verify-paper over instance and allocation documents.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use lexalloc::algorithms::{self, AlgorithmOutcome, Reason};
use lexalloc::checkers::{self, Removal, Side};
use lexalloc::fixtures::FixtureSet;
use lexalloc::format::{self, ReductionSidecar};
use lexalloc::generate::{self, GeneratorSpec, InstanceKind};
use lexalloc::oracle::{self, SearchBudget};
use lexalloc::reductions::{self, ReductionKind, Source, SourceWitness};
use lexalloc::verify;
use lexalloc::{Allocation, Bundle, Error, Instance, Property, PropertyReport, Violation};
use serde_json::{json, Value};

const OK: u8 = 0;
const FAILS: u8 = 1;
const INPUT: u8 = 2;
const PRECONDITION: u8 = 3;
const BUDGET: u8 = 4;

#[derive(Parser)]
#[command(name = "lexalloc", version, about = "Fair allocation of goods and chores under lexicographic preferences")]
struct Cli {
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Text)]
    format: OutputFormat,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Algorithm {
    EfxPoTopGood,
    EfxPoNoCommonChore,
    MmsMixed,
    EfxPoChores,
    MmsRmChores,
    DoubleRoundRobin,
    RankMaximal,
}

#[derive(Subcommand)]
enum Command {
    /// Run an allocation algorithm on an instance.
    Solve {
        instance: PathBuf,
        #[arg(long, value_enum)]
        algorithm: Algorithm,
        /// Agent priority order, 1-indexed and comma-separated.
        #[arg(long)]
        sigma: Option<String>,
        /// Second priority order for mms-mixed, 1-indexed.
        #[arg(long)]
        tau: Option<String>,
        /// Also write the allocation document here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check properties of an allocation.
    Check {
        instance: PathBuf,
        allocation: PathBuf,
        /// Comma-separated: ef,ef1,efx,efx-g,efx-c,mms,po,po-exhaustive,rm,seq.
        #[arg(long, default_value = "ef,ef1,efx,efx-g,efx-c,mms,po,rm,seq")]
        properties: String,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Decide whether an allocation with all the given properties exists.
    Decide {
        instance: PathBuf,
        #[arg(long)]
        properties: String,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Build a reduced instance from a CNF formula or hypergraph.
    Reduce {
        #[arg(long, value_parser = parse_reduction)]
        from: ReductionKind,
        source: PathBuf,
        /// Instance output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Sidecar output path; defaults to the instance path with `.sidecar.json`.
        #[arg(long)]
        sidecar: Option<PathBuf>,
    },
    /// Translate an allocation of a reduced instance back to a source witness.
    Extract {
        sidecar: PathBuf,
        allocation: PathBuf,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Generate a seeded random instance.
    Generate {
        #[arg(long, value_parser = parse_kind)]
        kind: InstanceKind,
        #[arg(short)]
        n: usize,
        #[arg(short)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run the regression matrix over the bundled fixtures.
    VerifyPaper {
        /// Directory whose files override the bundled fixtures.
        #[arg(long)]
        fixture_dir: Option<PathBuf>,
        #[command(flatten)]
        budget: BudgetArgs,
    },
}

#[derive(clap::Args)]
struct BudgetArgs {
    /// Cap on enumerated allocations or search nodes.
    #[arg(long, default_value_t = SearchBudget::default().max_allocations)]
    budget: u64,
    /// Wall-clock cap in seconds.
    #[arg(long, default_value_t = SearchBudget::default().max_seconds)]
    seconds: f64,
}

impl BudgetArgs {
    fn get(&self) -> SearchBudget {
        SearchBudget { max_allocations: self.budget, max_seconds: self.seconds }
    }
}

fn parse_reduction(s: &str) -> Result<ReductionKind, String> {
    ReductionKind::from_name(s).ok_or_else(|| format!("unknown reduction {s:?}"))
}

fn parse_kind(s: &str) -> Result<InstanceKind, String> {
    InstanceKind::from_name(&s.replace('-', "_")).ok_or_else(|| format!("unknown instance kind {s:?}"))
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::PreconditionViolated(_) | Error::Not223Formula(_) => PRECONDITION,
            Error::BudgetExceeded(_) => BUDGET,
            Error::InvalidWitness(_) => FAILS,
            _ => INPUT,
        };
        Failure { code, message: e.to_string() }
    }
}

fn input_error(message: impl Into<String>) -> Failure {
    Failure { code: INPUT, message: message.into() }
}

type Outcome = Result<u8, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn load_instance(path: &Path) -> Result<Instance, Failure> {
    format::parse_instance(&read(path)?).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn load_allocation(path: &Path, inst: &Instance) -> Result<Allocation, Failure> {
    let a = format::parse_allocation(&read(path)?, inst).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    a.validate(inst).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    Ok(a)
}

fn parse_order(flag: &str, text: Option<&str>, n: usize) -> Result<Vec<usize>, Failure> {
    let Some(text) = text else { return Ok(algorithms::identity(n)) };
    text.split(',')
        .map(|t| match t.trim().parse::<usize>() {
            Ok(v) if v >= 1 => Ok(v - 1),
            _ => Err(input_error(format!("--{flag}: bad agent number {t:?}"))),
        })
        .collect()
}

fn labels(inst: &Instance, b: Bundle) -> Vec<&str> {
    b.iter().map(|it| inst.label(it)).collect()
}

fn bundle_text(inst: &Instance, b: Bundle) -> String {
    format!("{{{}}}", labels(inst, b).join(", "))
}

fn allocation_json(inst: &Instance, a: &Allocation) -> Value {
    json!(a.bundles().iter().map(|&b| labels(inst, b)).collect::<Vec<_>>())
}

fn allocation_text(inst: &Instance, a: &Allocation) -> String {
    a.bundles()
        .iter()
        .enumerate()
        .map(|(i, &b)| format!("  agent {}: {}\n", i + 1, bundle_text(inst, b)))
        .collect()
}

fn describe(inst: &Instance, v: &Violation) -> String {
    match v {
        Violation::Envy { envious, envied, removal, decisive } => {
            let after = match removal {
                None => String::new(),
                Some(Removal { item, side: Side::Envied }) => format!(" after removing {} from agent {}", inst.label(*item), envied + 1),
                Some(Removal { item, side: Side::Envious }) => format!(" after dropping own {}", inst.label(*item)),
            };
            format!("agent {} envies agent {}{after}, decided by {}", envious + 1, envied + 1, inst.label(*decisive))
        }
        Violation::MmsShortfall { agent, share } => {
            format!("agent {} is below its maximin share {}", agent + 1, bundle_text(inst, *share))
        }
        Violation::Dominated { by } => {
            let parts: Vec<String> = by.bundles().iter().map(|&b| bundle_text(inst, b)).collect();
            format!("dominated by ({})", parts.join(", "))
        }
        Violation::BetterSignature { best, actual, .. } => {
            format!("signature {:?} is below the best {:?}", actual.concat(), best.concat())
        }
        Violation::NotSequencible { prefix, remaining } => {
            let turns: Vec<String> = prefix.turns.iter().map(|t| (t + 1).to_string()).collect();
            format!("picking stalls after [{}] with {} left", turns.join(","), bundle_text(inst, *remaining))
        }
    }
}

fn reason_name(r: Reason) -> &'static str {
    match r {
        Reason::TopGood => "top good",
        Reason::CommonChores => "common chores",
        Reason::Remainder => "remainder",
        Reason::SerialPick => "serial pick",
        Reason::RoundRobinPick => "round-robin pick",
    }
}

fn print_json(v: &Value) {
    print!("{}", format::to_canonical_json(v));
}

fn solve(fmt: OutputFormat, path: &Path, alg: Algorithm, sigma: Option<&str>, tau: Option<&str>, out: Option<&Path>) -> Outcome {
    let inst = load_instance(path)?;
    let n = inst.n();
    let outcome: Option<AlgorithmOutcome> = match alg {
        Algorithm::EfxPoTopGood => Some(algorithms::efx_po_top_good(&inst)?),
        Algorithm::EfxPoNoCommonChore => Some(algorithms::efx_po_no_common_chore(&inst)?),
        Algorithm::MmsMixed => Some(algorithms::mms_mixed(&inst, &parse_order("sigma", sigma, n)?, &parse_order("tau", tau, n)?)?),
        Algorithm::EfxPoChores => Some(algorithms::efx_po_chores(&inst, &parse_order("sigma", sigma, n)?)?),
        Algorithm::MmsRmChores => algorithms::mms_rm_chores(&inst)?,
        Algorithm::DoubleRoundRobin => Some(algorithms::double_round_robin(&inst, &parse_order("sigma", sigma, n)?)?),
        Algorithm::RankMaximal => Some(algorithms::rank_maximal(&inst)),
    };
    let Some(outcome) = outcome else {
        match fmt {
            OutputFormat::Text => println!("none exists"),
            OutputFormat::Json => print_json(&json!({ "exists": false })),
        }
        return Ok(FAILS);
    };
    if let Some(out) = out {
        write(out, &format::serialize_allocation(&outcome.allocation, &inst))?;
    }
    match fmt {
        OutputFormat::Text => {
            print!("allocation:\n{}", allocation_text(&inst, &outcome.allocation));
            println!("trace:");
            for s in &outcome.trace {
                println!("  round {} agent {} takes {} ({})", s.round + 1, s.agent + 1, bundle_text(&inst, s.items), reason_name(s.reason));
            }
        }
        OutputFormat::Json => {
            let trace: Vec<Value> = outcome
                .trace
                .iter()
                .map(|s| json!({ "round": s.round + 1, "agent": s.agent + 1, "items": labels(&inst, s.items), "reason": reason_name(s.reason) }))
                .collect();
            print_json(&json!({ "exists": true, "bundles": allocation_json(&inst, &outcome.allocation), "trace": trace }));
        }
    }
    Ok(OK)
}

fn parse_properties(csv: &str) -> Result<Vec<(String, Option<Property>)>, Failure> {
    csv.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| match s {
            "po-exhaustive" => Ok((s.to_string(), None)),
            _ => Property::from_name(s).map(|p| (s.to_string(), Some(p))).ok_or_else(|| input_error(format!("unknown property {s:?}"))),
        })
        .collect()
}

fn check(fmt: OutputFormat, inst_path: &Path, alloc_path: &Path, props: &str, budget: &SearchBudget) -> Outcome {
    let inst = load_instance(inst_path)?;
    let alloc = load_allocation(alloc_path, &inst)?;
    let props = parse_properties(props)?;
    let mut all = true;
    let mut rows = Vec::new();
    for (name, p) in &props {
        let r: PropertyReport = match p {
            None => oracle::check_po_exhaustive(&inst, &alloc, budget)?,
            Some(Property::Po) => checkers::check_po(&inst, &alloc, budget)?,
            Some(p) => checkers::check_property(&inst, &alloc, *p, budget)?,
        };
        all &= r.holds;
        let witness = r.witness().map(|v| describe(&inst, v));
        match fmt {
            OutputFormat::Text => match &witness {
                None => println!("{name}: holds"),
                Some(w) => println!("{name}: fails: {w}"),
            },
            OutputFormat::Json => rows.push(json!({ "property": name, "holds": r.holds, "witness": witness, "violations": r.violations })),
        }
    }
    if fmt == OutputFormat::Json {
        print_json(&json!({ "all_hold": all, "results": rows }));
    }
    Ok(if all { OK } else { FAILS })
}

fn decide(fmt: OutputFormat, path: &Path, props: &str, budget: &SearchBudget) -> Outcome {
    let inst = load_instance(path)?;
    let mut predicate = Vec::new();
    for p in parse_properties(props)?.into_iter().map(|(_, p)| p.unwrap_or(Property::Po)) {
        if !predicate.contains(&p) {
            predicate.push(p);
        }
    }
    let d = oracle::decide_exists(&inst, &predicate, budget)?;
    let names: Vec<&str> = predicate.iter().map(|p| p.name()).collect();
    if let Some(w) = &d.witness {
        match fmt {
            OutputFormat::Text => print!("exists ({}):\n{}", names.join(","), allocation_text(&inst, w)),
            OutputFormat::Json => print_json(&json!({ "exists": true, "properties": names, "bundles": allocation_json(&inst, w), "nodes": d.nodes })),
        }
        return Ok(OK);
    }
    let cert = oracle::verify_counterexample(&path.display().to_string(), &inst, &predicate, budget)?;
    if cert.satisfying > 0 {
        return Err(Failure { code: FAILS, message: "search and enumeration disagree".into() });
    }
    match fmt {
        OutputFormat::Text => {
            println!("none exists ({}): checked {} allocations", names.join(","), cert.checked);
            for (reason, count) in &cert.failure_reasons {
                println!("  {reason}: {count}");
            }
        }
        OutputFormat::Json => print_json(&json!({ "exists": false, "properties": names, "certificate": cert })),
    }
    Ok(FAILS)
}

fn load_source(kind: ReductionKind, path: &Path) -> Result<Source, Failure> {
    let text = read(path)?;
    let parsed = match kind {
        ReductionKind::SatEf | ReductionKind::Sat223EfxRm => format::parse_dimacs(&text).map(Source::Cnf),
        ReductionKind::RainbowEfRm | ReductionKind::RainbowEf1Rm => format::parse_hypergraph(&text).map(Source::Hypergraph),
    };
    parsed.map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn reduce(fmt: OutputFormat, kind: ReductionKind, path: &Path, out: Option<&Path>, sidecar: Option<&Path>) -> Outcome {
    let source = load_source(kind, path)?;
    let red = reductions::reduce(kind, &source)?;
    let doc = format::serialize_instance(&red.instance);
    let side = ReductionSidecar::new(kind, source).serialize();
    let side_path = sidecar.map(Path::to_path_buf).or_else(|| out.map(|o| o.with_extension("sidecar.json")));
    if let Some(p) = &side_path {
        write(p, &side)?;
    }
    match out {
        Some(o) => {
            write(o, &doc)?;
            let (n, m) = (red.instance.n(), red.instance.m());
            match fmt {
                OutputFormat::Text => println!("{kind}: {n} agents, {m} chores written to {}", o.display()),
                OutputFormat::Json => print_json(&json!({
                    "reduction": kind, "agents": n, "items": m,
                    "instance": o.display().to_string(),
                    "sidecar": side_path.map(|p| p.display().to_string()),
                })),
            }
        }
        None => print!("{doc}"),
    }
    Ok(OK)
}

fn extract(fmt: OutputFormat, sidecar: &Path, alloc_path: &Path, budget: &SearchBudget) -> Outcome {
    let side = ReductionSidecar::parse(&read(sidecar)?).map_err(|e| input_error(format!("{}: {e}", sidecar.display())))?;
    let red = reductions::reduce(side.kind, &side.source)?;
    let alloc = load_allocation(alloc_path, &red.instance)?;
    let w = red.extract_witness(&alloc, budget)?;
    match fmt {
        OutputFormat::Text => match &w {
            SourceWitness::Assignment(y) => {
                let lits: Vec<String> = y.iter().enumerate().map(|(i, &v)| format!("{}{}", if v { "" } else { "-" }, i + 1)).collect();
                println!("assignment: {}", lits.join(" "));
            }
            SourceWitness::Coloring(c) => {
                let cols: Vec<String> = c.iter().enumerate().map(|(v, &k)| format!("{}:{}", v + 1, k + 1)).collect();
                println!("coloring: {}", cols.join(" "));
            }
        },
        OutputFormat::Json => print_json(&json!({ "witness": w })),
    }
    Ok(OK)
}

fn generate(kind: InstanceKind, n: usize, m: usize, seed: u64) -> Outcome {
    let inst = generate::generate(&GeneratorSpec::new(kind, n, m, seed)).map_err(|e| Failure { code: PRECONDITION, message: e.to_string() })?;
    if !kind.admits(&inst) {
        return Err(Failure { code: PRECONDITION, message: format!("generated instance is not {kind}") });
    }
    print!("{}", format::serialize_instance(&inst));
    Ok(OK)
}

fn verify_paper(fmt: OutputFormat, dir: Option<&Path>, budget: &SearchBudget) -> Outcome {
    let set = match dir {
        Some(d) => FixtureSet::from_dir(d).map_err(|e| input_error(e.to_string()))?,
        None => FixtureSet::embedded(),
    };
    let report = verify::run_matrix(&set, budget);
    match fmt {
        OutputFormat::Text => {
            for c in &report.checks {
                let verdict = if c.passed { "ok" } else { "MISMATCH" };
                println!("{:<26} {verdict:<8} {:>9.1} ms  {}", c.name, c.millis, c.detail);
            }
            let passed = report.checks.iter().filter(|c| c.passed).count();
            println!("{passed} of {} checks passed", report.checks.len());
        }
        OutputFormat::Json => print_json(&serde_json::to_value(&report).expect("reports serialize")),
    }
    match report.first_failure() {
        None => Ok(OK),
        Some(c) => Err(Failure { code: FAILS, message: format!("first mismatch: {}: {}", c.name, c.detail) }),
    }
}

fn run(cli: Cli) -> Outcome {
    let fmt = cli.format;
    match cli.command {
        Command::Solve { instance, algorithm, sigma, tau, out } => {
            solve(fmt, &instance, algorithm, sigma.as_deref(), tau.as_deref(), out.as_deref())
        }
        Command::Check { instance, allocation, properties, budget } => check(fmt, &instance, &allocation, &properties, &budget.get()),
        Command::Decide { instance, properties, budget } => decide(fmt, &instance, &properties, &budget.get()),
        Command::Reduce { from, source, out, sidecar } => reduce(fmt, from, &source, out.as_deref(), sidecar.as_deref()),
        Command::Extract { sidecar, allocation, budget } => extract(fmt, &sidecar, &allocation, &budget.get()),
        Command::Generate { kind, n, m, seed } => generate(kind, n, m, seed),
        Command::VerifyPaper { fixture_dir, budget } => verify_paper(fmt, fixture_dir.as_deref(), &budget.get()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { INPUT } else { OK });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("lexalloc: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
