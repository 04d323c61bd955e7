//! Batch command-line front end for the hallot verification laboratory.
//!
//! Output is compact JSON by default (one report object per invocation);
//! `--pretty` switches to a human rendering. `--no-meta` strips the
//! version and wall-time fields so identical invocations produce
//! byte-identical output. Exit codes: 0 when every stated expectation is
//! met, 1 when an expectation or the regression matrix fails, 2 on usage
//! or input errors.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use serde_json::{json, Value};

use hallot::axioms::{check_axiom, Axiom, CheckOptions, Witness};
use hallot::characterize::{characterize, Certificate, Family};
use hallot::domain::{
    default_object_names, parse_profile_text, ObjectId, Priority,
    DEFAULT_PROFILE_CAP,
};
use hallot::mechanisms::{
    counterexample, materialize_with_cap, CounterexampleParams, Hierarchy, Mechanism,
    MechanismTable, SequentialDictatorship, SerialDictatorship, COUNTEREXAMPLE_NAMES,
};
use hallot::search::{
    cross_validate, enumerate_mechanisms, SearchMode, SearchSpec, VariableOrder,
};
use hallot::varpop::{
    check_pairwise_consistency, check_pairwise_neutrality, check_sp_all_problems,
    verify_proposition, verify_varpop_corollary, ExtendedSerialDictatorship, MismatchedConstant,
    ObjectFavoringRule, Potentials, SizeSplitDictatorship, VarMechanism,
};
use hallot::Allocation;

#[derive(Parser)]
#[command(name = "hallot", version, about = "Verification laboratory for house allocation mechanisms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Human-readable rendering instead of JSON.
    #[arg(long, global = true)]
    pretty: bool,
    /// Omit version and wall-time metadata (byte-identical reruns).
    #[arg(long, global = true)]
    no_meta: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Check axioms on a built-in mechanism or a table file.
    Check(CheckArgs),
    /// Run the counterexample catalog against its expected axiom matrix.
    Independence,
    /// Enumerate all mechanism tables satisfying a set of axioms.
    Search(SearchArgs),
    /// Decide dictatorship-family membership of a mechanism or table.
    Characterize(MechanismArgs),
    /// Variable-population checks.
    Varpop(VarpopArgs),
    /// Write a mechanism's table as JSON.
    Materialize(MaterializeArgs),
    /// Evaluate a mechanism at a profile read from a text file.
    Eval(EvalArgs),
}

#[derive(Args, Clone)]
struct MechanismArgs {
    /// Built-in mechanism: sd, seq, constant, or a counterexample name
    /// (ex1_sp_violation, ex2_bossy, ex3_constant, pareto_not_gctb,
    /// gctb_not_pareto, neutral_not_gctb, gctb_not_nonbossy).
    #[arg(long)]
    mechanism: Option<String>,
    /// Number of agents/objects (default 3).
    #[arg(long)]
    n: Option<usize>,
    /// Priority as 1-based agent numbers, e.g. 1,2,3.
    #[arg(long)]
    priority: Option<String>,
    /// Alternate priority for the branching counterexamples.
    #[arg(long)]
    priority2: Option<String>,
    /// Fixed allocation, one object per agent, e.g. o1,o2,o3.
    #[arg(long)]
    allocation: Option<String>,
    /// Distinguished object for ex2_bossy, e.g. o2.
    #[arg(long)]
    object: Option<String>,
    /// Hierarchy JSON file (for --mechanism seq).
    #[arg(long)]
    hierarchy_file: Option<PathBuf>,
    /// Table JSON file instead of a built-in mechanism.
    #[arg(long)]
    table: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    mechanism: MechanismArgs,
    /// Comma-separated axiom ids, e.g. sp,gctb,iplb.
    #[arg(long, required = true)]
    axioms: String,
    /// Keep scanning past the first violation and count all of them.
    #[arg(long)]
    full: bool,
    /// Require every listed axiom to hold (or to fail) for exit code 0.
    #[arg(long, value_parser = ["holds", "fails"])]
    expect: Option<String>,
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long)]
    n: usize,
    /// Comma-separated axiom ids constraining the search.
    #[arg(long, default_value = "")]
    axioms: String,
    /// exhaustive (n <= 2) or propagated (n <= 3); default picks by n.
    #[arg(long, value_parser = ["exhaustive", "propagated"])]
    mode: Option<String>,
    /// Variable order for the propagated engine.
    #[arg(long, default_value = "unanimous-bfs", value_parser = ["unanimous-bfs", "canonical"])]
    order: String,
    /// Stop after this many solutions.
    #[arg(long)]
    limit: Option<usize>,
    /// Cross-validate the solution set against a family: serial or sequential.
    #[arg(long, value_parser = ["serial", "sequential"])]
    expect_family: Option<String>,
    /// Require exactly this many solutions for exit code 0.
    #[arg(long)]
    expect_count: Option<usize>,
}

#[derive(Args)]
struct VarpopArgs {
    /// extended-sd, size-split, object-favor, or constant.
    #[arg(long, default_value = "extended-sd")]
    mechanism: String,
    /// Priority over the potential agents, e.g. 1,2,3.
    #[arg(long)]
    priority: Option<String>,
    /// Alternate priority (size-split's two-agent rule).
    #[arg(long)]
    priority2: Option<String>,
    /// Watched object for object-favor.
    #[arg(long)]
    object: Option<String>,
    /// Size of the potential agent/object pools.
    #[arg(long, default_value_t = 3)]
    potential_size: usize,
    /// Comma-separated checks: consistency, neutrality, sp, proposition,
    /// corollary, or all.
    #[arg(long, default_value = "all")]
    verify: String,
    /// Require every requested verdict to be true for exit code 0.
    #[arg(long)]
    expect_true: bool,
}

#[derive(Args)]
struct MaterializeArgs {
    #[command(flatten)]
    mechanism: MechanismArgs,
    /// Output path; stdout when omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    mechanism: MechanismArgs,
    /// Profile text file: one `agent: obj > obj > ...` line per agent.
    #[arg(long)]
    profile: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    match run(&cli, started) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn profile_cap() -> Result<usize> {
    match std::env::var("HALLOT_PROFILE_CAP") {
        Ok(raw) => raw
            .parse::<usize>()
            .map_err(|_| anyhow!("HALLOT_PROFILE_CAP must be a positive integer, got `{raw}`")),
        Err(_) => Ok(DEFAULT_PROFILE_CAP),
    }
}

fn run(cli: &Cli, started: Instant) -> Result<ExitCode> {
    let (command, items, ok) = match &cli.command {
        Command::Check(args) => cmd_check(args, cli.pretty)?,
        Command::Independence => cmd_independence(cli.pretty)?,
        Command::Search(args) => cmd_search(args, cli.pretty)?,
        Command::Characterize(args) => cmd_characterize(args, cli.pretty)?,
        Command::Varpop(args) => cmd_varpop(args, cli.pretty)?,
        Command::Materialize(args) => cmd_materialize(args)?,
        Command::Eval(args) => cmd_eval(args, cli.pretty)?,
    };
    if !cli.pretty {
        let mut report = serde_json::Map::new();
        report.insert("command".into(), Value::String(command.to_string()));
        report.insert("items".into(), Value::Array(items));
        if !cli.no_meta {
            report.insert(
                "version".into(),
                Value::String(env!("CARGO_PKG_VERSION").to_string()),
            );
            report.insert(
                "wall_time_ms".into(),
                json!(started.elapsed().as_millis() as u64),
            );
        }
        println!("{}", Value::Object(report));
    }
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn parse_priority(raw: &str) -> Result<Priority> {
    let numbers: Vec<usize> = raw
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| anyhow!("invalid agent `{}` in priority `{raw}`", t.trim()))
        })
        .collect::<Result<_>>()?;
    Priority::from_one_based(&numbers).map_err(|e| anyhow!("invalid priority `{raw}`: {e}"))
}

fn parse_object_token(token: &str) -> Result<ObjectId> {
    let t = token.trim();
    if let Some(index) = t.strip_prefix('o').unwrap_or(t).parse::<usize>().ok().filter(|&v| v >= 1) {
        return Ok(ObjectId(index - 1));
    }
    let mut chars = t.chars();
    if let (Some(c), None) = (chars.next(), chars.next()) {
        if c.is_ascii_lowercase() {
            return Ok(ObjectId(c as usize - 'a' as usize));
        }
    }
    bail!("invalid object `{t}`; use o1, o2, ..., 1-based numbers, or letters a, b, ...")
}

fn parse_allocation(raw: &str) -> Result<Allocation> {
    let objects: Vec<ObjectId> = raw
        .split(',')
        .map(parse_object_token)
        .collect::<Result<_>>()?;
    Allocation::new(objects).map_err(|e| anyhow!("invalid allocation `{raw}`: {e}"))
}

fn parse_axioms(raw: &str) -> Result<Vec<Axiom>> {
    let mut axioms = Vec::new();
    for token in raw.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let axiom = Axiom::from_id(token).ok_or_else(|| {
            let valid: Vec<&str> = Axiom::TABLE_AXIOMS.iter().map(|a| a.id()).collect();
            anyhow!("unknown axiom `{token}`; valid names: {}", valid.join(", "))
        })?;
        axioms.push(axiom);
    }
    Ok(axioms)
}

// Builds the table (and its object names) selected by the mechanism flags.
fn build_table(args: &MechanismArgs) -> Result<(MechanismTable, Vec<String>)> {
    let cap = profile_cap()?;
    if let Some(path) = &args.table {
        let raw = std::fs::read_to_string(path)
            .with_context(|| format!("reading table file {}", path.display()))?;
        let (table, names) = MechanismTable::from_json(&raw)
            .with_context(|| format!("parsing table file {}", path.display()))?;
        return Ok((table, names));
    }
    let mechanism = build_mechanism(args)?;
    let table = materialize_with_cap(&*mechanism, cap)
        .with_context(|| format!("materializing {}", mechanism.label()))?;
    let names = default_object_names(table.n());
    Ok((table, names))
}

fn build_mechanism(args: &MechanismArgs) -> Result<Box<dyn Mechanism>> {
    let name = args
        .mechanism
        .as_deref()
        .ok_or_else(|| anyhow!("pass --mechanism <name> or --table <file>"))?;
    let priority = args.priority.as_deref().map(parse_priority).transpose()?;
    let priority2 = args.priority2.as_deref().map(parse_priority).transpose()?;
    let allocation = args.allocation.as_deref().map(parse_allocation).transpose()?;
    let object = args.object.as_deref().map(parse_object_token).transpose()?;
    let n = args
        .n
        .or_else(|| priority.as_ref().map(|p| p.n()))
        .or_else(|| allocation.as_ref().map(|a| a.n()))
        .unwrap_or(3);
    match name {
        "sd" => {
            let priority = priority.unwrap_or_else(|| Priority::identity(n));
            Ok(Box::new(SerialDictatorship::new(priority)))
        }
        "seq" => {
            let path = args
                .hierarchy_file
                .as_ref()
                .ok_or_else(|| anyhow!("--mechanism seq needs --hierarchy-file <json>"))?;
            let raw = std::fs::read_to_string(path)
                .with_context(|| format!("reading hierarchy file {}", path.display()))?;
            let hierarchy: Hierarchy = serde_json::from_str(&raw)
                .with_context(|| format!("parsing hierarchy file {}", path.display()))?;
            Ok(Box::new(SequentialDictatorship::new(hierarchy)))
        }
        "constant" => {
            let allocation = allocation
                .unwrap_or_else(|| Allocation::new((0..n).map(ObjectId).collect()).expect("identity"));
            Ok(Box::new(hallot::mechanisms::ConstantMechanism::new(allocation)))
        }
        other => {
            let canonical = match other {
                "ex1" => "ex1_sp_violation",
                "ex2" => "ex2_bossy",
                "ex3" => "ex3_constant",
                o => o,
            };
            let params = CounterexampleParams {
                n: Some(n),
                priority,
                priority_alt: priority2,
                allocation,
                object,
            };
            counterexample(canonical, &params).map_err(|e| {
                anyhow!(
                    "{e}; built-ins are sd, seq, constant, {}",
                    COUNTEREXAMPLE_NAMES.join(", ")
                )
            })
        }
    }
}

fn describe_witness(witness: &Witness) -> String {
    match witness {
        Witness::Manipulation {
            profile,
            agent,
            misreport_pref,
            truthful,
            deviant,
        } => format!(
            "profile {profile}: agent {agent} misreports preference #{misreport_pref} and gets {deviant} over {truthful}"
        ),
        Witness::GroupManipulation {
            profile, coalition, ..
        } => {
            let members: Vec<String> = coalition.iter().map(|a| a.to_string()).collect();
            format!("profile {profile}: coalition {{{}}} jointly misreports and gains", members.join(", "))
        }
        Witness::Bossiness {
            profile,
            agent,
            misreport_pref,
        } => format!(
            "profile {profile}: agent {agent} keeps his allotment via preference #{misreport_pref} but moves others"
        ),
        Witness::NonMonotonic {
            profile,
            transformed_profile,
        } => format!(
            "profiles {profile} -> {transformed_profile}: outcome changes under a monotonic transformation"
        ),
        Witness::ParetoDominated { profile, .. } => {
            format!("profile {profile}: another allocation dominates")
        }
        Witness::SwapImprovement {
            profile,
            first,
            second,
        } => format!("profile {profile}: agents {first} and {second} both prefer to swap"),
        Witness::Envy {
            profile,
            envier,
            envied,
        } => format!("profile {profile}: agent {envier} envies agent {envied}"),
        Witness::PriorityRefutations { refutations, .. } => {
            format!("every candidate priority refuted ({} refutations)", refutations.len())
        }
        Witness::DirectionFlip {
            first,
            second,
            profile_a,
            profile_b,
        } => format!(
            "pair {{{first},{second}}}: envy direction flips between profiles {profile_a} and {profile_b}"
        ),
        Witness::ContextDirectionFlip {
            first,
            second,
            profile_a,
            profile_b,
        } => format!(
            "pair {{{first},{second}}} with fixed context: direction flips between profiles {profile_a} and {profile_b}"
        ),
        Witness::IdenticalLowerBoundViolation {
            profile, agent, ..
        } => format!("profile {profile}: agent {agent} does worse than at his unanimous profile"),
        Witness::NonNeutral { profile, .. } => {
            format!("profile {profile}: allotments do not follow an object relabeling")
        }
        other => serde_json::to_string(other).unwrap_or_else(|_| "unrepresentable".into()),
    }
}

fn cmd_check(args: &CheckArgs, pretty: bool) -> Result<(&'static str, Vec<Value>, bool)> {
    let axioms = parse_axioms(&args.axioms)?;
    if axioms.is_empty() {
        bail!("--axioms needs at least one axiom id");
    }
    let (table, _names) = build_table(&args.mechanism)?;
    let opts = CheckOptions { full: args.full };
    let mut items = Vec::new();
    let mut all_hold = true;
    let mut any_hold = false;
    for &axiom in &axioms {
        let report = check_axiom(&table, axiom, &opts)
            .map_err(|e| anyhow!("{e}"))?;
        all_hold &= report.holds;
        any_hold |= report.holds;
        if pretty {
            let verdict = if report.holds { "holds" } else { "FAILS" };
            let detail = report
                .witness
                .as_ref()
                .map(|w| format!(" — {}", describe_witness(w)))
                .unwrap_or_default();
            println!("{:<22} {:<6} (work {}){}", axiom.id(), verdict, report.work, detail);
        }
        items.push(serde_json::to_value(&report)?);
    }
    let ok = match args.expect.as_deref() {
        Some("holds") => all_hold,
        Some("fails") => !any_hold,
        _ => true,
    };
    Ok(("check", items, ok))
}

#[derive(Deserialize)]
struct FixtureRow {
    mechanism: String,
    expect: BTreeMap<String, bool>,
}

#[derive(Deserialize)]
struct Fixture {
    version: u32,
    rows: Vec<FixtureRow>,
}

const INDEPENDENCE_FIXTURE: &str = include_str!("../fixtures/independence.json");

fn cmd_independence(pretty: bool) -> Result<(&'static str, Vec<Value>, bool)> {
    let fixture: Fixture =
        serde_json::from_str(INDEPENDENCE_FIXTURE).context("parsing embedded fixture")?;
    let mut items = Vec::new();
    let mut all_ok = true;
    for row in &fixture.rows {
        let m = counterexample(&row.mechanism, &CounterexampleParams::default())
            .map_err(|e| anyhow!("{e}"))?;
        let table = materialize_with_cap(&*m, profile_cap()?)?;
        let mut cells = Vec::new();
        for (axiom_id, &expected) in &row.expect {
            let axiom = Axiom::from_id(axiom_id)
                .ok_or_else(|| anyhow!("fixture names unknown axiom `{axiom_id}`"))?;
            let report = check_axiom(&table, axiom, &CheckOptions::default())
                .map_err(|e| anyhow!("{e}"))?;
            let ok = report.holds == expected;
            all_ok &= ok;
            if pretty {
                let mark = if expected { "✓" } else { "✗" };
                let status = if ok { "ok" } else { "MISMATCH" };
                println!("{:<20} {:<22} expected {:<2} {}", row.mechanism, axiom_id, mark, status);
            }
            cells.push(json!({
                "axiom": axiom_id,
                "expected": expected,
                "actual": report.holds,
                "ok": ok,
            }));
        }
        items.push(json!({
            "mechanism": row.mechanism,
            "fixture_version": fixture.version,
            "cells": cells,
        }));
    }
    Ok(("independence", items, all_ok))
}

fn cmd_search(args: &SearchArgs, pretty: bool) -> Result<(&'static str, Vec<Value>, bool)> {
    let axioms = parse_axioms(&args.axioms)?;
    let mode = match args.mode.as_deref() {
        Some("exhaustive") => SearchMode::Exhaustive,
        Some("propagated") => SearchMode::Propagated,
        _ => {
            if args.n <= 2 {
                SearchMode::Exhaustive
            } else {
                SearchMode::Propagated
            }
        }
    };
    let mut spec = SearchSpec::new(args.n, axioms.iter().copied(), mode);
    spec.limit = args.limit;
    spec.order = if args.order == "canonical" {
        VariableOrder::Canonical
    } else {
        VariableOrder::UnanimousBfs
    };
    let result = enumerate_mechanisms(&spec).map_err(|e| anyhow!("{e}"))?;
    let family = match args.expect_family.as_deref() {
        Some("serial") => Some(Family::Serial),
        Some("sequential") => Some(Family::Sequential),
        _ => None,
    };
    let validated = family.map(|f| cross_validate(&result, f));
    let names = default_object_names(args.n);
    let tables: Vec<Value> = result
        .tables
        .iter()
        .map(|t| serde_json::from_str(&t.to_json(&names)).expect("tables serialize cleanly"))
        .collect();
    let count_ok = args.expect_count.is_none_or(|c| result.tables.len() == c);
    let family_ok = validated.unwrap_or(true);
    if pretty {
        println!(
            "search n={} axioms=[{}] mode={:?}: {} solutions, {} nodes, complete={}",
            args.n,
            axioms.iter().map(|a| a.id()).collect::<Vec<_>>().join(","),
            mode,
            result.tables.len(),
            result.nodes,
            result.complete
        );
        if let Some(v) = validated {
            println!(
                "cross-validation against the {} family: {}",
                args.expect_family.as_deref().unwrap_or(""),
                if v { "set-equal" } else { "MISMATCH" }
            );
        }
    }
    let item = json!({
        "spec": {
            "n": args.n,
            "axioms": axioms.iter().map(|a| a.id()).collect::<Vec<_>>(),
            "mode": format!("{mode:?}").to_lowercase(),
            "limit": args.limit,
        },
        "count": result.tables.len(),
        "tables": tables,
        "nodes": result.nodes,
        "complete": result.complete,
        "cross_validated": validated,
    });
    Ok(("search", vec![item], count_ok && family_ok))
}

fn cmd_characterize(args: &MechanismArgs, pretty: bool) -> Result<(&'static str, Vec<Value>, bool)> {
    let (table, _names) = build_table(args)?;
    let result = characterize(&table);
    if pretty {
        let family = match result.family {
            Family::Serial => "serial",
            Family::Sequential => "sequential",
            Family::None => "none",
        };
        println!("family: {family}");
        if let Some(p) = &result.priority {
            println!("priority: {p}");
        }
        if let Some(h) = &result.hierarchy {
            println!("hierarchy: {h}");
        }
        match &result.certificate {
            Certificate::Verified { profiles_compared } => {
                println!("certificate: equal on all {profiles_compared} profiles");
            }
            Certificate::Mismatch { profile_index } => {
                println!("certificate: first mismatch at profile {profile_index}");
            }
            Certificate::NoDictator { path } => {
                println!("certificate: no uniform dictator after {path:?}");
            }
        }
    }
    Ok(("characterize", vec![serde_json::to_value(&result)?], true))
}

fn build_var_mechanism(args: &VarpopArgs) -> Result<Box<dyn VarMechanism>> {
    let k = args.potential_size;
    let priority = args
        .priority
        .as_deref()
        .map(parse_priority)
        .transpose()?
        .unwrap_or_else(|| Priority::identity(k));
    if priority.n() != k {
        bail!("--priority must order all {k} potential agents");
    }
    match args.mechanism.as_str() {
        "extended-sd" => Ok(Box::new(ExtendedSerialDictatorship::new(priority))),
        "size-split" => {
            let second = args
                .priority2
                .as_deref()
                .map(parse_priority)
                .transpose()?
                .unwrap_or_else(|| priority.reversed());
            Ok(Box::new(SizeSplitDictatorship::new(priority, second)))
        }
        "object-favor" => {
            let object = args
                .object
                .as_deref()
                .map(parse_object_token)
                .transpose()?
                .unwrap_or(ObjectId(0));
            Ok(Box::new(ObjectFavoringRule::new(object, priority)))
        }
        "constant" => Ok(Box::new(MismatchedConstant::new(k))),
        other => bail!(
            "unknown varpop mechanism `{other}`; valid names: extended-sd, size-split, object-favor, constant"
        ),
    }
}

fn cmd_varpop(args: &VarpopArgs, pretty: bool) -> Result<(&'static str, Vec<Value>, bool)> {
    let potentials = Potentials::square(args.potential_size);
    let mechanism = build_var_mechanism(args)?;
    let requested: Vec<&str> = if args.verify == "all" {
        vec!["consistency", "neutrality", "sp", "proposition", "corollary"]
    } else {
        args.verify.split(',').map(str::trim).collect()
    };
    let mut items = Vec::new();
    let mut all_true = true;
    for check in requested {
        let (value, verdict) = match check {
            "consistency" => {
                let report = check_pairwise_consistency(&*mechanism, &potentials);
                (serde_json::to_value(&report)?, report.holds)
            }
            "neutrality" => {
                let report = check_pairwise_neutrality(&*mechanism, &potentials);
                (serde_json::to_value(&report)?, report.holds)
            }
            "sp" => {
                let report = check_sp_all_problems(&*mechanism, &potentials);
                (serde_json::to_value(&report)?, report.holds)
            }
            "proposition" => {
                let verdict = verify_proposition(&*mechanism, &potentials);
                let overall = verdict.overall();
                (
                    json!({"check": "proposition", "verdict": verdict, "overall": overall}),
                    overall,
                )
            }
            "corollary" => {
                let verdict = verify_varpop_corollary(&*mechanism, &potentials);
                let overall = verdict.overall();
                (
                    json!({"check": "corollary", "verdict": verdict, "overall": overall}),
                    overall,
                )
            }
            other => bail!(
                "unknown verify target `{other}`; valid: consistency, neutrality, sp, proposition, corollary, all"
            ),
        };
        all_true &= verdict;
        if pretty {
            println!("{:<36} {:<12} {}", mechanism.label(), check, verdict);
        }
        items.push(value);
    }
    let ok = !args.expect_true || all_true;
    Ok(("varpop", items, ok))
}

fn cmd_materialize(args: &MaterializeArgs) -> Result<(&'static str, Vec<Value>, bool)> {
    let (table, names) = build_table(&args.mechanism)?;
    let json = table.to_json(&names);
    match &args.output {
        Some(path) => {
            std::fs::write(path, &json)
                .with_context(|| format!("writing {}", path.display()))?;
        }
        None => println!("{json}"),
    }
    let item = json!({
        "n": table.n(),
        "profiles": table.len(),
        "written": args.output.as_ref().map(|p| p.display().to_string()),
    });
    Ok(("materialize", vec![item], true))
}

fn cmd_eval(args: &EvalArgs, pretty: bool) -> Result<(&'static str, Vec<Value>, bool)> {
    let raw = std::fs::read_to_string(&args.profile)
        .with_context(|| format!("reading profile {}", args.profile.display()))?;
    let parsed = parse_profile_text(&raw)
        .map_err(|e| anyhow!("{}: {e}", args.profile.display()))?;
    let (table, names) = build_table(&args.mechanism)?;
    if table.n() != parsed.profile.n() {
        bail!(
            "profile covers {} agents but the mechanism covers {}",
            parsed.profile.n(),
            table.n()
        );
    }
    let index = parsed.profile.canonical_index();
    let allocation = table.entry(index);
    let by_agent: Vec<String> = allocation
        .assignment()
        .iter()
        .map(|o| parsed.object_names.get(o.index()).cloned().unwrap_or_else(|| names[o.index()].clone()))
        .collect();
    if pretty {
        for (agent, object) in by_agent.iter().enumerate() {
            println!("agent {} -> {}", agent + 1, object);
        }
    }
    let item = json!({
        "profile_index": index,
        "allocation": by_agent,
    });
    Ok(("eval", vec![item], true))
}
