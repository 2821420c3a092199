//! Command-line front end: solve, decompose, audit, attack, compare.
//!
//! Exit codes: 0 ok, 1 usage, 2 unreadable or invalid input, 3 an audit
//! failed, 4 a profitable deviation was found, 5 the search was truncated.

mod render;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use fairflow::axioms::{
    check_consistency, check_ete, check_no_envy, check_ranking, AgentModel, AuditReport, Verdict,
};
use fairflow::edgefair::MechanismOutcome;
use fairflow::fixtures;
use fairflow::flownet::{decompose, extremal_min_cuts, fixed_edges, is_po_star, max_flow_value};
use fairflow::mechanism::{by_id, Mechanism};
use fairflow::problem::Problem;
use fairflow::strategic::{
    check_invariance, check_strong_invariance, grid_with_step, search_manipulation, AgentRef,
    SearchConfig, SearchOutcome,
};
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "fairflow",
    version,
    about = "Fair division of maximum flows in bipartite supply/demand networks",
    after_help = "INPUT is a built-in instance (fig1, fig2-left, fig2-right, fig3, fig4, fig5, \
                  empty-problem) or a path to a problem document."
)]
struct RunConfig {
    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Human)]
    format: Format,
    /// Append approximate decimals to exact values (display only)
    #[arg(long, global = true)]
    approx: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    /// Plain tables
    Human,
    /// A JSON document that parses back into the library's types
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Run a mechanism: flow, allocations, pinned edges, decomposition, trace
    Solve {
        /// Mechanism id: edge-fair, egalitarian, or hybrid
        #[arg(long, default_value = "edge-fair")]
        mech: String,
        input: String,
    },
    /// Rigid/flexible blocks, extremal minimum cuts, and forced edges
    Decompose { input: String },
    /// Check axioms; exits 3 when any selected axiom fails
    Audit {
        /// Mechanism whose rule is audited (consistency, invariance)
        #[arg(long, default_value = "edge-fair")]
        mech: String,
        /// Mechanism whose output flow is audited; defaults to --mech
        #[arg(long)]
        flow_from: Option<String>,
        /// Axiom to check, or all of them
        #[arg(long, value_enum, default_value_t = Axiom::All)]
        axiom: Axiom,
        /// Who the welfare statements quantify over
        #[arg(long, value_enum, default_value_t = Model::NodeAgents)]
        model: Model,
        input: String,
    },
    /// Search misreport coalitions; exits 4 when one profits, 5 on truncation
    Attack {
        /// Mechanism id: edge-fair, egalitarian, or hybrid
        #[arg(long, default_value = "edge-fair")]
        mech: String,
        /// Largest coalition size tried
        #[arg(long, default_value_t = 2)]
        coalition: usize,
        /// Report mesh: candidate reports step by 1/N
        #[arg(long, value_name = "N", default_value_t = 2)]
        resolution: u32,
        /// Stop after this many mechanism evaluations
        #[arg(long)]
        budget: Option<u64>,
        /// Who may misreport
        #[arg(long, value_enum, default_value_t = Model::NodeAgents)]
        model: Model,
        input: String,
    },
    /// Run every mechanism and compare the outcomes
    Compare { input: String },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "kebab-case")]
enum Axiom {
    All,
    Consistency,
    NoEnvy,
    EqualTreatment,
    Ranking,
    PoStar,
    Invariance,
    StrongInvariance,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "kebab-case")]
enum Model {
    NodeAgents,
    EdgeAgents,
}

impl Model {
    fn to_core(self) -> AgentModel {
        match self {
            Model::NodeAgents => AgentModel::Nodes,
            Model::EdgeAgents => AgentModel::Edges,
        }
    }
}

fn main() -> ExitCode {
    let cfg = match RunConfig::try_parse() {
        Ok(cfg) => cfg,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cfg) {
        Ok((text, code)) => {
            // a consumer like `head` may close stdout early; that is not an error
            use std::io::Write;
            if let Err(e) = std::io::stdout().write_all(text.as_bytes()) {
                if e.kind() != std::io::ErrorKind::BrokenPipe {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            }
            ExitCode::from(code)
        }
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn run(cfg: &RunConfig) -> Result<(String, u8), String> {
    match &cfg.command {
        Command::Solve { mech, input } => cmd_solve(cfg, mech, input),
        Command::Decompose { input } => cmd_decompose(cfg, input),
        Command::Audit { mech, flow_from, axiom, model, input } => {
            cmd_audit(cfg, mech, flow_from.as_deref(), *axiom, model.to_core(), input)
        }
        Command::Attack { mech, coalition, resolution, budget, model, input } => {
            cmd_attack(cfg, mech, *coalition, *resolution, *budget, model.to_core(), input)
        }
        Command::Compare { input } => cmd_compare(cfg, input),
    }
}

fn load(input: &str) -> Result<Problem, String> {
    if let Some(p) = fixtures::by_name(input) {
        return Ok(p);
    }
    if input == "empty-problem" {
        return Problem::new(Vec::new(), Vec::new(), Vec::new()).map_err(|e| e.to_string());
    }
    let text = std::fs::read_to_string(input)
        .map_err(|e| format!("cannot read {input}: {e}"))?;
    fairflow::parse_problem(&text).map_err(|e| format!("{input}: {e}"))
}

fn mechanism(id: &str) -> Result<Box<dyn Mechanism>, String> {
    by_id(id).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct SolveDoc<'a> {
    command: &'a str,
    input: &'a str,
    outcome: &'a MechanismOutcome,
}

fn cmd_solve(cfg: &RunConfig, mech: &str, input: &str) -> Result<(String, u8), String> {
    let p = load(input)?;
    let outcome = mechanism(mech)?.solve(&p).map_err(|e| e.to_string())?;
    let text = match cfg.format {
        Format::Json => emit(&SolveDoc { command: "solve", input, outcome: &outcome }),
        Format::Human => render::solve(&p, input, &outcome, cfg.approx),
    };
    Ok((text, 0))
}

#[derive(Serialize)]
struct DecomposeDoc<'a> {
    command: &'a str,
    input: &'a str,
    value: String,
    decomposition: fairflow::flownet::Decomposition,
    cuts: fairflow::flownet::MinCutPair,
    forced_edges: Vec<render::NamedValue>,
}

fn cmd_decompose(cfg: &RunConfig, input: &str) -> Result<(String, u8), String> {
    let p = load(input)?;
    let value = max_flow_value(&p);
    let decomposition = decompose(&p);
    let cuts = extremal_min_cuts(&p);
    let forced = render::name_edges(&p, &fixed_edges(&p));
    let text = match cfg.format {
        Format::Json => emit(&DecomposeDoc {
            command: "decompose",
            input,
            value: fairflow::rational::format_number(&value),
            decomposition,
            cuts,
            forced_edges: forced,
        }),
        Format::Human => {
            render::decompose(input, &value, &decomposition, &cuts, &forced, cfg.approx)
        }
    };
    Ok((text, 0))
}

#[derive(Serialize)]
struct AuditDoc<'a> {
    command: &'a str,
    input: &'a str,
    reports: &'a [AuditReport],
}

fn cmd_audit(
    cfg: &RunConfig,
    mech: &str,
    flow_from: Option<&str>,
    axiom: Axiom,
    model: AgentModel,
    input: &str,
) -> Result<(String, u8), String> {
    let p = load(input)?;
    let rule = mechanism(flow_from.unwrap_or(mech))?;
    let outcome = rule.solve(&p).map_err(|e| e.to_string())?;
    let mut reports = Vec::new();

    let wants = |a: Axiom| axiom == Axiom::All || axiom == a;
    if wants(Axiom::Consistency) {
        reports.push(check_consistency(rule.as_ref(), &p).map_err(|e| e.to_string())?);
    }
    if wants(Axiom::PoStar) {
        reports.push(po_star_report(&p, &outcome, rule.id())?);
    }
    if wants(Axiom::NoEnvy) {
        let mut r = check_no_envy(&p, &outcome.flow, model).map_err(|e| e.to_string())?;
        r.mechanism = Some(rule.id().to_string());
        reports.push(r);
    }
    if wants(Axiom::EqualTreatment) {
        let mut r = check_ete(&p, &outcome.flow, model).map_err(|e| e.to_string())?;
        r.mechanism = Some(rule.id().to_string());
        reports.push(r);
    }
    if wants(Axiom::Ranking) {
        let mut r = check_ranking(&p, &outcome.flow);
        r.mechanism = Some(rule.id().to_string());
        reports.push(r);
    }
    if wants(Axiom::Invariance) {
        reports.push(invariance_sweep(rule.as_ref(), &p, &outcome, false)?);
    }
    if wants(Axiom::StrongInvariance) {
        reports.push(invariance_sweep(rule.as_ref(), &p, &outcome, true)?);
    }

    let text = match cfg.format {
        Format::Json => emit(&AuditDoc { command: "audit", input, reports: &reports }),
        Format::Human => render::audit(input, &reports),
    };
    let code = if reports.iter().any(|r| r.verdict == Verdict::Fail) { 3 } else { 0 };
    Ok((text, code))
}

fn po_star_report(p: &Problem, outcome: &MechanismOutcome, mech: &str) -> Result<AuditReport, String> {
    let r = is_po_star(p, &outcome.flow).map_err(|e| e.to_string())?;
    let (verdict, detail) = if r.holds {
        (Verdict::Pass, "no agent can gain without another losing ground to its peak".to_string())
    } else {
        let w = r.witness.map(|w| w.to_string()).unwrap_or_default();
        (Verdict::Fail, format!("a peak-improving reallocation exists: {w}"))
    };
    Ok(AuditReport {
        axiom: "peak-pareto".to_string(),
        mechanism: Some(mech.to_string()),
        verdict,
        detail,
        witnesses: Vec::new(),
    })
}

/// One aggregated report: the invariance hypothesis checked for every node
/// agent over the default report grid.
fn invariance_sweep(
    rule: &dyn Mechanism,
    p: &Problem,
    outcome: &MechanismOutcome,
    strong: bool,
) -> Result<AuditReport, String> {
    let grid = grid_with_step(p, outcome, 2);
    let mut agents: Vec<AgentRef> = Vec::new();
    for s in &p.suppliers {
        agents.push(AgentRef::Supplier { id: s.id.clone() });
    }
    for d in &p.demanders {
        agents.push(AgentRef::Demander { id: d.id.clone() });
    }
    let axiom = if strong { "strong-invariance" } else { "invariance" };
    for a in &agents {
        let rep = if strong {
            check_strong_invariance(rule, p, a, &grid)
        } else {
            check_invariance(rule, p, a, &grid)
        }
        .map_err(|e| e.to_string())?;
        if rep.verdict == Verdict::Fail {
            return Ok(rep);
        }
    }
    Ok(AuditReport {
        axiom: axiom.to_string(),
        mechanism: Some(rule.id().to_string()),
        verdict: Verdict::Pass,
        detail: format!(
            "{} node agents checked over a grid of {} reports",
            agents.len(),
            grid.len()
        ),
        witnesses: Vec::new(),
    })
}

#[derive(Serialize)]
struct AttackDoc<'a> {
    command: &'a str,
    input: &'a str,
    mechanism: &'a str,
    outcome: &'a SearchOutcome,
}

fn cmd_attack(
    cfg: &RunConfig,
    mech: &str,
    coalition: usize,
    resolution: u32,
    budget: Option<u64>,
    model: AgentModel,
    input: &str,
) -> Result<(String, u8), String> {
    let p = load(input)?;
    let rule = mechanism(mech)?;
    let truthful = rule.solve(&p).map_err(|e| e.to_string())?;
    let search = SearchConfig {
        max_coalition: coalition,
        grid: Some(grid_with_step(&p, &truthful, resolution)),
        budget,
        model,
    };
    let outcome = search_manipulation(rule.as_ref(), &p, &search).map_err(|e| e.to_string())?;
    let text = match cfg.format {
        Format::Json => {
            emit(&AttackDoc { command: "attack", input, mechanism: mech, outcome: &outcome })
        }
        Format::Human => render::attack(input, mech, coalition, &outcome),
    };
    let code = match outcome {
        SearchOutcome::NoDeviation { .. } => 0,
        SearchOutcome::Found { .. } => 4,
        SearchOutcome::Truncated { .. } => 5,
    };
    Ok((text, code))
}

#[derive(Serialize)]
struct CompareDoc<'a> {
    command: &'a str,
    input: &'a str,
    outcomes: Vec<SolveRow<'a>>,
}

#[derive(Serialize)]
struct SolveRow<'a> {
    mechanism: &'a str,
    outcome: MechanismOutcome,
}

fn cmd_compare(cfg: &RunConfig, input: &str) -> Result<(String, u8), String> {
    let p = load(input)?;
    let mut rows = Vec::new();
    for id in fairflow::mechanism::MECHANISMS {
        let outcome = mechanism(id)?.solve(&p).map_err(|e| e.to_string())?;
        rows.push(SolveRow { mechanism: id, outcome });
    }
    let text = match cfg.format {
        Format::Json => emit(&CompareDoc { command: "compare", input, outcomes: rows }),
        Format::Human => render::compare(
            input,
            &rows.iter().map(|r| (r.mechanism, &r.outcome)).collect::<Vec<_>>(),
            cfg.approx,
        ),
    };
    Ok((text, 0))
}

fn emit<T: Serialize>(doc: &T) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("reports serialize");
    s.push('\n');
    s
}
