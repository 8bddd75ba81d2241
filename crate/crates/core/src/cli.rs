//! Command-line front end. `main` only forwards to [`run`] and maps errors
//! to exit codes with [`exit_code`].

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::derived::{hidden_node_alarm, is_derived, local_markov_alarms, redundancy_pairs, Alarm, ObservationMask};
use crate::dot::{paths_to_dot, report_to_dot, DotOptions};
use crate::error::{Error, Result};
use crate::fixtures::{self, FixtureParams};
use crate::flow::{find_orphans, FlowConfig, FlowDetector};
use crate::graph::{EdgeRef, NodeRef};
use crate::joint::exact_joint;
use crate::paths::{enumerate_paths, find_info_paths, PathGraph, Traversal};
use crate::report::FlowReport;
use crate::sampler::{analyze_sampled, sample_trials, SampledConfig};
use crate::system::{Regime, SystemSpec};

#[derive(Parser, Debug)]
#[command(name = "infoflow", version, about = "Information flow analysis of computational systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Decide flow on every edge.
    Analyze(AnalyzeArgs),
    /// Information paths from the inputs to a target node.
    Paths(PathsArgs),
    /// Alarms for nodes left out of the observation.
    Hidden(HiddenArgs),
    /// Derived-information checks and redundant pairs.
    Derived(DerivedArgs),
    /// Draw trials and write them as CSV.
    Simulate(SimulateArgs),
    /// Built-in systems.
    Fixtures {
        #[command(subcommand)]
        action: FixturesAction,
    },
}

#[derive(Subcommand, Debug)]
pub enum FixturesAction {
    List,
    /// Write a fixture as a system spec.
    Build {
        name: String,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args, Debug, Clone)]
pub struct Source {
    /// Built-in system name (see `fixtures list`).
    #[arg(long, conflicts_with = "spec")]
    pub fixture: Option<String>,
    /// System spec JSON file.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Noise variance for the feedback fixture.
    #[arg(long, default_value_t = 1.0)]
    pub noise_variance: f64,
    /// Iterations for the feedback fixture.
    #[arg(long, default_value_t = 3)]
    pub iterations: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Engine {
    /// Exact engine matching the system (discrete or Gaussian).
    Exact,
    Gaussian,
    Sampled,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Dot,
    Text,
}

#[derive(Args, Debug, Clone)]
pub struct EngineArgs {
    #[arg(long, value_enum, default_value_t = Engine::Exact)]
    pub engine: Engine,
    /// Trials (sampled engine).
    #[arg(long)]
    pub n: Option<usize>,
    /// Seed (sampled engine).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Family-wise level per edge (sampled engine).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Permutations per test (sampled engine).
    #[arg(long)]
    pub n_perm: Option<usize>,
    /// Largest conditioning set in the test cascade (sampled engine).
    #[arg(long)]
    pub max_conditioning_size: Option<usize>,
    /// Cap on conditioning candidates per slice (exact engines).
    #[arg(long, default_value_t = 20)]
    pub max_candidates: usize,
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub source: Source,
    #[command(flatten)]
    pub engine: EngineArgs,
    /// Message to track; repeat for several. Defaults to every message.
    #[arg(long)]
    pub message: Vec<String>,
    /// Also compute quantified flow.
    #[arg(long)]
    pub quantify: bool,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub out: Format,
    /// Drop silent edges from DOT output.
    #[arg(long)]
    pub hide_silent: bool,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct PathsArgs {
    #[command(flatten)]
    pub source: Source,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[arg(long, default_value = "M")]
    pub message: String,
    /// Target node label or fixture alias.
    #[arg(long)]
    pub target: String,
    /// Maximum number of explicit paths to list.
    #[arg(long, default_value_t = 1000)]
    pub limit: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub out: Format,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct HiddenArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(long, default_value = "M")]
    pub message: String,
    /// Hidden node names, comma separated. Defaults to the fixture's own.
    #[arg(long, value_delimiter = ',')]
    pub hidden: Option<Vec<String>>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub out: Format,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct DerivedArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(long, default_value = "M")]
    pub message: String,
    /// Edges whose information is tested, comma separated.
    #[arg(long, value_delimiter = ',', requires = "given")]
    pub edges: Option<Vec<String>>,
    /// Edges it may be derived from, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub given: Option<Vec<String>>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub out: Format,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// Exit code for an error: 2 parse, 3 invalid input or query, 4 resource
/// limits, 5 no path, 6 model violation.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_) | Error::Io(_) => 2,
        Error::Validation(_) | Error::Eval(_) | Error::InvalidQuery(_) | Error::UnknownVariable(_) => 3,
        Error::BudgetExceeded { .. } | Error::SearchCapExceeded { .. } => 4,
        Error::NoPathFound(_) => 5,
        Error::ModelViolationAtInput(_) => 6,
    }
}

struct Loaded {
    spec: SystemSpec,
    aliases: std::collections::BTreeMap<String, NodeRef>,
    hidden: Vec<String>,
}

impl Loaded {
    fn node(&self, label: &str) -> Result<NodeRef> {
        match self.aliases.get(label) {
            Some(v) => Ok(v.clone()),
            None => label.parse(),
        }
    }
}

fn load(src: &Source) -> Result<Loaded> {
    match (&src.fixture, &src.spec) {
        (Some(name), None) => {
            let p = FixtureParams { noise_variance: src.noise_variance, iterations: src.iterations, ..Default::default() };
            let f = fixtures::build_with(name, &p)?;
            Ok(Loaded { spec: f.spec, aliases: f.aliases, hidden: f.hidden })
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)?;
            let spec = SystemSpec::from_json_str(&text)?;
            spec.validate()?;
            Ok(Loaded { spec, aliases: Default::default(), hidden: Vec::new() })
        }
        _ => Err(Error::query("give exactly one of --fixture or --spec")),
    }
}

fn emit(output: &Option<PathBuf>, text: &str, out: &mut dyn Write) -> Result<()> {
    match output {
        Some(p) => std::fs::write(p, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn check_engine(a: &EngineArgs, spec: &SystemSpec) -> Result<()> {
    let sampled_flags = a.n.is_some()
        || a.seed.is_some()
        || a.alpha.is_some()
        || a.n_perm.is_some()
        || a.max_conditioning_size.is_some();
    match a.engine {
        Engine::Sampled => {
            if a.n.is_none() {
                return Err(Error::query("the sampled engine needs --n"));
            }
            if spec.regime()? != Regime::Discrete {
                return Err(Error::query("the sampled engine supports finite-alphabet systems only"));
            }
        }
        _ if sampled_flags => {
            return Err(Error::query("--n, --seed, --alpha, --n-perm and --max-conditioning-size need --engine sampled"))
        }
        Engine::Gaussian if spec.regime()? != Regime::Gaussian => {
            return Err(Error::query("the gaussian engine needs a linear-Gaussian system"))
        }
        _ => {}
    }
    Ok(())
}

fn flow_reports(
    spec: &SystemSpec,
    a: &EngineArgs,
    messages: &[String],
    quantify: bool,
) -> Result<Vec<FlowReport>> {
    check_engine(a, spec)?;
    if a.engine == Engine::Sampled {
        let trials = sample_trials(spec, a.n.expect("checked"), a.seed.unwrap_or(0))?;
        let defaults = SampledConfig::default();
        let config = SampledConfig {
            alpha: a.alpha.unwrap_or(defaults.alpha),
            max_subset_size: a.max_conditioning_size.unwrap_or(defaults.max_subset_size),
            n_perm: a.n_perm,
            seed: a.seed.unwrap_or(0),
        };
        return messages
            .iter()
            .map(|m| analyze_sampled(&trials, &spec.graph, m, &config))
            .collect();
    }
    let joint = exact_joint(spec)?;
    let config = FlowConfig { max_candidates: a.max_candidates, quantify };
    messages
        .iter()
        .map(|m| FlowDetector::new(joint.as_ref(), &spec.graph, m, config.clone())?.analyze())
        .collect()
}

fn pick_messages(spec: &SystemSpec, asked: &[String]) -> Result<Vec<String>> {
    let known = spec.message_names();
    if asked.is_empty() {
        return Ok(known);
    }
    for m in asked {
        if !known.contains(m) {
            return Err(Error::UnknownVariable(m.clone()));
        }
    }
    Ok(asked.to_vec())
}

fn report_text(r: &FlowReport, spec: &SystemSpec) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "message {} ({} engine)", r.message, r.engine);
    for p in &r.partitions {
        let _ = writeln!(s, "t={}: {} flowing, {} silent", p.time, p.flowing.len(), p.silent.len());
        for e in &p.flowing {
            let entry = r.entry(e).expect("partition edges are in the report");
            let _ = write!(s, "  {e}");
            if let Some(w) = &entry.witness {
                let w: Vec<String> = w.iter().map(ToString::to_string).collect();
                let _ = write!(s, "  given {{{}}}", w.join(", "));
            }
            if let Some(b) = entry.quantified {
                let _ = write!(s, "  {b:.4} bits");
            }
            if let Some(p) = entry.p_value {
                let _ = write!(s, "  p={p:.3e}");
            }
            s.push('\n');
        }
    }
    let orphans = find_orphans(r, &spec.graph);
    if !orphans.is_empty() {
        let o: Vec<String> = orphans.iter().map(ToString::to_string).collect();
        let _ = writeln!(s, "orphans: {}", o.join(", "));
    }
    for w in &r.warnings {
        let _ = writeln!(s, "warning: {w}");
    }
    s
}

fn analyze(a: &AnalyzeArgs, out: &mut dyn Write) -> Result<()> {
    let l = load(&a.source)?;
    let messages = pick_messages(&l.spec, &a.message)?;
    let reports = flow_reports(&l.spec, &a.engine, &messages, a.quantify)?;
    let text = match a.out {
        Format::Json if reports.len() == 1 => json(&reports[0]),
        Format::Json => json(&reports),
        Format::Dot => {
            let opts = DotOptions { hide_silent: a.hide_silent, weight_by_bits: a.quantify };
            report_to_dot(&l.spec.graph, &reports, &opts)
        }
        Format::Text => reports.iter().map(|r| report_text(r, &l.spec)).collect::<Vec<_>>().join("\n"),
    };
    emit(&a.output, &text, out)
}

#[derive(Serialize)]
struct PathsOutput<'a> {
    message: &'a str,
    graph: &'a PathGraph,
    paths: Vec<Vec<NodeRef>>,
    truncated: bool,
    traversal: Traversal,
}

fn paths(a: &PathsArgs, out: &mut dyn Write) -> Result<()> {
    let l = load(&a.source)?;
    let target = l.node(&a.target)?;
    let message = pick_messages(&l.spec, std::slice::from_ref(&a.message))?;
    let report = flow_reports(&l.spec, &a.engine, &message, false)?.remove(0);
    let joint = exact_joint(&l.spec)?;
    let inputs = FlowDetector::new(joint.as_ref(), &l.spec.graph, &a.message, FlowConfig::default())?.input_nodes()?;
    let (h, traversal) = find_info_paths(&report, &l.spec.graph, &target, &inputs)?;
    let (list, truncated) = enumerate_paths(&h, a.limit);
    let text = match a.out {
        Format::Json => json(&PathsOutput { message: &a.message, graph: &h, paths: list, truncated, traversal }),
        Format::Dot => paths_to_dot(&l.spec.graph, &h),
        Format::Text => {
            let mut s = format!("{} path(s) from {{", list.len());
            let roots: Vec<String> = h.root_inputs.iter().map(ToString::to_string).collect();
            let _ = writeln!(s, "{}}} to {target}", roots.join(", "));
            for p in &list {
                let p: Vec<String> = p.iter().map(ToString::to_string).collect();
                let _ = writeln!(s, "  {}", p.join(" -> "));
            }
            if truncated {
                s.push_str("  ...\n");
            }
            s
        }
    };
    emit(&a.output, &text, out)
}

#[derive(Serialize)]
struct HiddenOutput {
    message: String,
    hidden: Vec<String>,
    alarms: Vec<Alarm>,
    local: Vec<LocalAlarms>,
}

#[derive(Serialize)]
struct LocalAlarms {
    time: usize,
    nodes: Vec<NodeRef>,
}

fn hidden(a: &HiddenArgs, out: &mut dyn Write) -> Result<()> {
    let l = load(&a.source)?;
    let names = a.hidden.clone().unwrap_or_else(|| l.hidden.clone());
    let mask = ObservationMask::new(&names);
    let joint = exact_joint(&l.spec)?;
    let g = &l.spec.graph;
    let mut alarms = Vec::new();
    for t in 0..g.horizon().saturating_sub(1) {
        alarms.push(hidden_node_alarm(joint.as_ref(), g, &a.message, &mask, t)?);
    }
    let mut local = Vec::new();
    for t in 1..g.horizon() {
        local.push(LocalAlarms { time: t, nodes: local_markov_alarms(joint.as_ref(), g, &a.message, &mask, t)? });
    }
    let report = HiddenOutput { message: a.message.clone(), hidden: names, alarms, local };
    let text = match a.out {
        Format::Json | Format::Dot => json(&report),
        Format::Text => {
            let mut s = String::new();
            for x in &report.alarms {
                let state = if x.alarm { "ALARM" } else { "clear" };
                let _ = writeln!(s, "t={} -> t={}: {state} ({:.4} bits)", x.time, x.time + 1, x.bits.unwrap_or(0.0));
            }
            for x in &report.local {
                let n: Vec<String> = x.nodes.iter().map(ToString::to_string).collect();
                let _ = writeln!(s, "local t={}: {}", x.time, if n.is_empty() { "clear".into() } else { n.join(", ") });
            }
            s
        }
    };
    emit(&a.output, &text, out)
}

#[derive(Serialize)]
struct DerivedOutput {
    message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    query: Option<DerivedQuery>,
    redundant_pairs: Vec<(EdgeRef, EdgeRef)>,
}

#[derive(Serialize)]
struct DerivedQuery {
    edges: Vec<EdgeRef>,
    given: Vec<EdgeRef>,
    derived: bool,
}

fn parse_edges(v: &Option<Vec<String>>) -> Result<Vec<EdgeRef>> {
    v.iter().flatten().map(|s| s.trim().parse()).collect()
}

fn derived(a: &DerivedArgs, out: &mut dyn Write) -> Result<()> {
    let l = load(&a.source)?;
    let joint = exact_joint(&l.spec)?;
    let query = match &a.edges {
        Some(_) => {
            let q = parse_edges(&a.edges)?;
            let p = parse_edges(&a.given)?;
            let derived = is_derived(joint.as_ref(), &a.message, &q, &p)?;
            Some(DerivedQuery { edges: q, given: p, derived })
        }
        None => None,
    };
    let report = FlowDetector::new(joint.as_ref(), &l.spec.graph, &a.message, FlowConfig::default())?.analyze()?;
    let flowing: Vec<EdgeRef> = report.flowing().into_iter().collect();
    let redundant_pairs = redundancy_pairs(joint.as_ref(), &a.message, &flowing)?;
    let res = DerivedOutput { message: a.message.clone(), query, redundant_pairs };
    let text = match a.out {
        Format::Json | Format::Dot => json(&res),
        Format::Text => {
            let mut s = String::new();
            if let Some(q) = &res.query {
                let _ = writeln!(s, "derived: {}", q.derived);
            }
            for (x, y) in &res.redundant_pairs {
                let _ = writeln!(s, "redundant: {x} ~ {y}");
            }
            s
        }
    };
    emit(&a.output, &text, out)
}

fn simulate(a: &SimulateArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let l = load(&a.source)?;
    let mut buf = Vec::new();
    match l.spec.regime()? {
        Regime::Discrete => sample_trials(&l.spec, a.n, a.seed)?.write_csv(&mut buf)?,
        Regime::Gaussian => {
            if a.n == 0 {
                return Err(Error::query("need at least one trial"));
            }
            writeln!(err, "warning: Gaussian trials are real-valued; the sampled detector cannot read them")?;
            let g = crate::joint::linear_propagate(&l.spec)?;
            let mut w = csv::Writer::from_writer(&mut buf);
            let header: Vec<String> = g.variables().iter().map(ToString::to_string).collect();
            w.write_record(&header).map_err(|e| Error::Io(e.into()))?;
            for row in g.sample(a.n, a.seed) {
                w.write_record(row.iter().map(|x| format!("{x:.12e}"))).map_err(|e| Error::Io(e.into()))?;
            }
            w.flush()?;
        }
    }
    emit(&a.output, &String::from_utf8(buf).expect("csv is utf-8"), out)
}

fn fixtures_cmd(action: &FixturesAction, out: &mut dyn Write) -> Result<()> {
    match action {
        FixturesAction::List => {
            let mut s = String::new();
            for name in fixtures::NAMES {
                let f = fixtures::build(name)?;
                let _ = writeln!(s, "{name:<20} {}", f.summary);
            }
            emit(&None, &s, out)
        }
        FixturesAction::Build { name, output } => {
            let mut text = fixtures::build(name)?.spec.to_json_string();
            text.push('\n');
            emit(output, &text, out)
        }
    }
}

/// Run one parsed command, writing results to `out` and warnings to `err`.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Analyze(a) => analyze(a, out),
        Command::Paths(a) => paths(a, out),
        Command::Hidden(a) => hidden(a, out),
        Command::Derived(a) => derived(a, out),
        Command::Simulate(a) => simulate(a, out, err),
        Command::Fixtures { action } => fixtures_cmd(action, out),
    }
}
