use std::io::Write;
use std::path::Path;

use flicker_core::coarse::{
    classify_transitions, effective_information, effectiveness, emergence_score, macro_tpm, partition_search,
    MacroScale, SearchMode,
};
use flicker_core::netscale::{label_propagation, network_emergence};
use flicker_core::phiid::{emergence_atoms, phi_heuristic, PhiSolver, Realization};
use flicker_core::prob::excess_entropy;
use flicker_core::walker::{self, flicker_summary, AnnotationContext, Ratio, Start};
use flicker_core::{FactorizedSystem, Partition, PhiAtom, Prior, TransitionMatrix};
use serde::Serialize;
use serde_json::json;

use crate::args::{AnalyzeArgs, Cli, Command, ModeArg, NetworkArgs, PhiidArgs, SearchArgs, TraceFormat, WalkArgs};
use crate::codec::{self, AtomMap, CodecError, LoadedTpm, Num};
use crate::error::CliError;
use crate::report::{value, EmergenceReport, InputDigest, LabelledMatrix, MaybeNum};

type Result<T> = std::result::Result<T, CliError>;

struct Input {
    path: String,
    text: String,
    digest: InputDigest,
}

fn read_input(role: &'static str, path: &Path) -> Result<Input> {
    let shown = path.display().to_string();
    let bytes = std::fs::read(path).map_err(|source| CliError::Read { path: shown.clone(), source })?;
    let digest = InputDigest::new(role, &shown, &bytes);
    let text = String::from_utf8(bytes).map_err(|_| CliError::Input {
        path: shown.clone(),
        source: CodecError::Format("file is not UTF-8 text".into()),
    })?;
    Ok(Input { path: shown, text, digest })
}

impl Input {
    fn parse<T>(&self, f: impl FnOnce(&str) -> codec::Result<T>) -> Result<T> {
        f(&self.text).map_err(|source| CliError::Input { path: self.path.clone(), source })
    }
}

/// Destination for the primary output of a command.
pub struct Sinks<'a> {
    pub stdout: &'a mut dyn Write,
    pub stderr: &'a mut dyn Write,
}

fn emit(cli: &Cli, sinks: &mut Sinks<'_>, content: &str) -> Result<()> {
    match &cli.out {
        Some(path) => {
            std::fs::write(path, content).map_err(|source| CliError::Write { path: path.display().to_string(), source })
        }
        None => sinks
            .stdout
            .write_all(content.as_bytes())
            .map_err(|source| CliError::Write { path: "<stdout>".into(), source }),
    }
}

fn warn_all(sinks: &mut Sinks<'_>, warnings: &[String]) {
    for w in warnings {
        let _ = writeln!(sinks.stderr, "warning: {w}");
    }
}

pub fn run(cli: &Cli, sinks: &mut Sinks<'_>) -> Result<()> {
    match &cli.command {
        Command::Analyze(a) => analyze(cli, a, sinks),
        Command::Phiid(a) => phiid(cli, a, sinks),
        Command::Walk(a) => walk(cli, a, sinks),
        Command::Network(a) => network(cli, a, sinks),
        Command::Search(a) => search(cli, a, sinks),
    }
}

fn prior_or(cli: &Cli, default: Prior) -> Prior {
    cli.prior.map_or(default, Prior::from)
}

fn load_tpm(input: &Input, warnings: &mut Vec<String>) -> Result<TransitionMatrix<f64>> {
    let LoadedTpm { tpm, renormalized } = input.parse(codec::parse_tpm)?;
    if !renormalized.is_empty() {
        warnings.push(format!("{}: renormalized rows {}", input.path, renormalized.join(", ")));
    }
    Ok(tpm)
}

fn fallback_warning(m: &MacroScale<f64>, warnings: &mut Vec<String>) {
    if !m.fallback_groups.is_empty() {
        let names: Vec<&str> = m.fallback_groups.iter().map(|&g| m.partition.macro_labels()[g].as_str()).collect();
        warnings.push(format!("macro states {} have no stationary mass; weighted uniformly", names.join(", ")));
    }
}

fn score_or_warn(w: &TransitionMatrix<f64>, m: &MacroScale<f64>, warnings: &mut Vec<String>) -> Option<f64> {
    match emergence_score(w, m) {
        Ok(s) => Some(s),
        Err(e) => {
            warnings.push(format!("emergence score undefined: {e}"));
            None
        }
    }
}

#[derive(Serialize)]
struct ScaleSummary {
    n_states: usize,
    effective_information: Num,
    effectiveness: Option<Num>,
}

fn scale_summary(w: &TransitionMatrix<f64>) -> ScaleSummary {
    ScaleSummary {
        n_states: w.n(),
        effective_information: Num(effective_information(w)),
        effectiveness: effectiveness(w).ok().map(Num),
    }
}

#[derive(Serialize)]
struct TransitionRow<'a> {
    from: &'a str,
    to: &'a str,
    e_micro: MaybeNum,
    #[serde(skip_serializing_if = "Option::is_none")]
    e_macro: Option<MaybeNum>,
    #[serde(skip_serializing_if = "Option::is_none")]
    class: Option<&'static str>,
}

#[derive(Serialize)]
struct ClassStatistics {
    congruent_informative: usize,
    congruent_misinformative: usize,
    incongruous: usize,
    anti_incongruous: usize,
    zero: usize,
    incongruity_fraction: Num,
    all_zero: bool,
}

fn class_statistics(c: &flicker_core::coarse::TransitionClassification<f64>) -> ClassStatistics {
    ClassStatistics {
        congruent_informative: c.counts.congruent_informative,
        congruent_misinformative: c.counts.congruent_misinformative,
        incongruous: c.counts.incongruous,
        anti_incongruous: c.counts.anti_incongruous,
        zero: c.counts.zero,
        incongruity_fraction: Num(c.incongruity_fraction),
        all_zero: c.all_zero,
    }
}

fn load_partition(
    a_partition: Option<&Path>,
    a_aggregation: Option<&Path>,
    w: &TransitionMatrix<f64>,
    report: &mut EmergenceReport,
) -> Result<Option<Partition>> {
    if let Some(path) = a_partition {
        let input = read_input("partition", path)?;
        let p = input.parse(|t| codec::parse_partition(t, w.labels()))?;
        report.inputs.push(input.digest);
        return Ok(Some(p));
    }
    if let Some(path) = a_aggregation {
        let input = read_input("aggregation", path)?;
        let p = input.parse(|t| codec::parse_aggregation(t)?.build())?;
        if p.n_micro() != w.n() {
            return Err(CliError::Input {
                path: input.path,
                source: CodecError::Format(format!(
                    "aggregation covers {} states but the matrix has {}",
                    p.n_micro(),
                    w.n()
                )),
            });
        }
        report.inputs.push(input.digest);
        // the matrix's own labels name the micro states
        return Ok(Some(p.clone().with_labels(w.labels().to_vec(), p.macro_labels().to_vec())?));
    }
    Ok(None)
}

fn analyze(cli: &Cli, a: &AnalyzeArgs, sinks: &mut Sinks<'_>) -> Result<()> {
    let mut report = EmergenceReport::new("analyze");
    let input = read_input("tpm", &a.tpm)?;
    let w = load_tpm(&input, &mut report.warnings)?;
    report.inputs.push(input.digest);
    let prior = prior_or(cli, Prior::Uniform);
    report.setting("prior", prior.name());

    let partition = load_partition(a.partition.as_deref(), a.aggregation.as_deref(), &w, &mut report)?;
    let p = prior.resolve(&w)?;
    let micro = scale_summary(&w);
    if micro.effectiveness.is_none() {
        report.warnings.push("micro effectiveness undefined for a single state".into());
    }

    match partition {
        None => {
            let table = flicker_core::prob::LocalExcessTable::compute(&w, &p)?;
            let labels = w.labels();
            let rows: Vec<TransitionRow> = (0..w.n())
                .flat_map(|i| (0..w.n()).map(move |j| (i, j)))
                .filter(|&(i, j)| w.get(i, j) > 0.0)
                .map(|(i, j)| TransitionRow {
                    from: &labels[i],
                    to: &labels[j],
                    e_micro: MaybeNum(table.get(i, j)),
                    e_macro: None,
                    class: None,
                })
                .collect();
            report.expected = json!({
                "micro": value(&micro),
                "excess_entropy": value(&Num(excess_entropy(&w, &p)?)),
            });
            report.local = json!({ "transitions": value(&rows) });
        }
        Some(partition) => {
            let weighting = flicker_core::Weighting::from(a.weighting);
            report.setting("weighting", weighting.name());
            let m = macro_tpm(&w, &partition, weighting)?;
            fallback_warning(&m, &mut report.warnings);
            let score = score_or_warn(&w, &m, &mut report.warnings);
            let c = classify_transitions(&w, &m, prior)?;
            let labels = w.labels();
            let rows: Vec<TransitionRow> = c
                .transitions
                .iter()
                .map(|t| TransitionRow {
                    from: &labels[t.from],
                    to: &labels[t.to],
                    e_micro: MaybeNum(t.e_micro),
                    e_macro: Some(MaybeNum(t.e_macro)),
                    class: Some(t.class.name()),
                })
                .collect();
            let groups: Vec<serde_json::Value> = partition
                .micro_labels()
                .iter()
                .enumerate()
                .map(|(i, l)| json!({ "micro": l, "macro": partition.macro_labels()[partition.macro_of(i)] }))
                .collect();
            report.expected = json!({
                "micro": value(&micro),
                "macro": value(&scale_summary(&m.tpm)),
                "emergence_score": value(&score.map(Num)),
                "excess_entropy": value(&Num(excess_entropy(&w, &p)?)),
                "macro_tpm": value(&LabelledMatrix::new(&m.tpm)),
            });
            report.local = json!({ "partition": groups, "transitions": value(&rows) });
            report.statistics = value(&class_statistics(&c));
        }
    }
    warn_all(sinks, &report.warnings);
    emit(cli, sinks, &report.to_json())
}

/// Parses `a1,a2->b1,b2`, tolerating spaces and parentheses.
pub fn parse_realization(s: &str) -> Option<Realization> {
    let clean: String = s.chars().filter(|c| !c.is_whitespace() && *c != '(' && *c != ')').collect();
    let (from, to) = clean.split_once("->")?;
    let pair = |x: &str| -> Option<(usize, usize)> {
        let (a, b) = x.split_once(',')?;
        Some((a.parse().ok()?, b.parse().ok()?))
    };
    Some(Realization::new(pair(from)?, pair(to)?))
}

#[derive(Serialize)]
struct EmergenceExtract {
    causal_decoupling: Num,
    downward_to_first: Num,
    downward_to_second: Num,
    downward_to_redundant: Num,
    incongruous: bool,
}

fn phiid(cli: &Cli, a: &PhiidArgs, sinks: &mut Sinks<'_>) -> Result<()> {
    let mut report = EmergenceReport::new("phiid");
    let input = read_input("system", &a.system)?;
    let file = input.parse(codec::parse_system)?;
    let stored_prior = file.prior.is_some();
    let prior = prior_or(cli, Prior::Stationary);
    let sys = input.parse(|_| file.build(prior))?;
    report.inputs.push(input.digest);
    report.setting("prior", if stored_prior { "file" } else { prior.name() });
    report.setting("redundancy", "shared-exclusions");

    let solver = PhiSolver::new(&sys);
    let expected = solver.expected()?;
    let expected_decoupling = expected.get(&PhiAtom::decoupling()).expect("lattice has the top atom");
    let table = match &a.realization {
        Some(r) => {
            let realization = parse_realization(r)
                .ok_or_else(|| CliError::Usage(format!("cannot parse realization {r:?}; expected a1,a2->b1,b2")))?;
            report.setting("realization", realization.to_string());
            solver.local(&realization)?
        }
        None => expected.clone(),
    };
    report.setting("scope", if a.realization.is_some() { "local" } else { "expected" });
    let e = emergence_atoms(&table, Some(expected_decoupling));
    let extract = EmergenceExtract {
        causal_decoupling: Num(e.causal_decoupling),
        downward_to_first: Num(e.downward.to_first),
        downward_to_second: Num(e.downward.to_second),
        downward_to_redundant: Num(e.downward.to_redundant),
        incongruous: e.incongruous,
    };
    report.expected = json!({
        "excess_entropy": value(&Num(excess_entropy(sys.tpm(), sys.prior())?)),
        "phi_heuristic": value(&Num(phi_heuristic(&sys))),
        "causal_decoupling": value(&Num(expected_decoupling)),
    });
    report.local = json!({
        "atoms": value(&AtomMap::values(&table)),
        "redundancy": value(&AtomMap::redundancy(&table)),
        "total": value(&Num(table.total())),
        "emergence_atoms": value(&extract),
    });
    warn_all(sinks, &report.warnings);
    emit(cli, sinks, &report.to_json())
}

fn resolve_start(spec: Option<&str>, w: &TransitionMatrix<f64>, prior: Prior) -> Result<Start<f64>> {
    match spec {
        None => Ok(Start::Fixed(0)),
        Some("draw") => Ok(Start::Draw(prior.resolve(w)?)),
        Some(label) => w
            .labels()
            .iter()
            .position(|l| l == label)
            .map(Start::Fixed)
            .ok_or_else(|| CliError::Usage(format!("unknown start state {label:?}"))),
    }
}

#[derive(Serialize)]
struct SummaryFile<'a> {
    tool: &'static str,
    version: &'static str,
    inputs: &'a [InputDigest],
    seed: u64,
    prior: &'static str,
    steps: usize,
    count: usize,
    fraction: Num,
    events: &'a [usize],
    flagged_runs: &'a [usize],
    unflagged_runs: &'a [usize],
    flagged_run_lengths: Vec<[usize; 2]>,
    unflagged_run_lengths: Vec<[usize; 2]>,
    undefined_ratios: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    expected_decoupling: Option<Num>,
}

fn walk(cli: &Cli, a: &WalkArgs, sinks: &mut Sinks<'_>) -> Result<()> {
    let mut warnings = Vec::new();
    let mut inputs = Vec::new();
    let prior = prior_or(cli, Prior::Stationary);
    let system: Option<FactorizedSystem<f64>> = match &a.system {
        Some(path) => {
            let input = read_input("system", path)?;
            let sys = input.parse(|t| codec::parse_system(t)?.build(prior))?;
            inputs.push(input.digest);
            Some(sys)
        }
        None => None,
    };
    let w = match (&a.tpm, &system) {
        (Some(path), _) => {
            let input = read_input("tpm", path)?;
            let w = load_tpm(&input, &mut warnings)?;
            inputs.push(input.digest);
            w
        }
        (None, Some(sys)) => sys.tpm().clone(),
        (None, None) => unreachable!("clap requires a matrix or a system"),
    };
    let macro_scale = match &a.partition {
        Some(path) => {
            let input = read_input("partition", path)?;
            let p = input.parse(|t| codec::parse_partition(t, w.labels()))?;
            inputs.push(input.digest);
            let m = macro_tpm(&w, &p, a.weighting.into())?;
            fallback_warning(&m, &mut warnings);
            Some(m)
        }
        None => None,
    };
    let seed = cli.seed.unwrap_or(0);
    let start = resolve_start(a.start.as_deref(), &w, prior)?;
    let ctx = AnnotationContext { macro_scale: macro_scale.as_ref(), factorized: system.as_ref(), prior };
    let steps = usize::try_from(a.steps).map_err(|_| CliError::Usage("too many steps".into()))?;
    let trace = walker::walk(&w, &start, steps, seed, &ctx)?;

    let undefined_ratios = trace.steps.iter().filter(|s| s.ratio == Some(Ratio::Undefined)).count();
    if undefined_ratios > 0 {
        warnings.push(format!("{undefined_ratios} steps have an undefined macro/micro ratio"));
    }
    let rows = codec::trace_rows(&trace, w.labels());
    let body = match a.format {
        TraceFormat::Csv => codec::write_trace_csv(&rows),
        TraceFormat::Json => codec::write_trace_json(&rows, trace.seed, prior.name()),
    };
    warn_all(sinks, &warnings);
    emit(cli, sinks, &body)?;

    let s = flicker_summary(&trace);
    let (flagged_hist, unflagged_hist) = s.run_length_distribution();
    let pairs = |h: Vec<(usize, usize)>| h.into_iter().map(|(a, b)| [a, b]).collect();
    let summary = SummaryFile {
        tool: "flicker",
        version: env!("CARGO_PKG_VERSION"),
        inputs: &inputs,
        seed,
        prior: prior.name(),
        steps: s.steps,
        count: s.count,
        fraction: Num(s.fraction),
        events: &s.events,
        flagged_runs: &s.flagged_runs,
        unflagged_runs: &s.unflagged_runs,
        flagged_run_lengths: pairs(flagged_hist),
        unflagged_run_lengths: pairs(unflagged_hist),
        undefined_ratios,
        expected_decoupling: trace.expected_decoupling.map(Num),
    };
    match &a.summary {
        Some(path) => {
            let mut text = serde_json::to_string_pretty(&summary).expect("summary serializes");
            text.push('\n');
            std::fs::write(path, text).map_err(|source| CliError::Write { path: path.display().to_string(), source })
        }
        None => {
            let _ = writeln!(
                sinks.stderr,
                "flicker summary: {} of {} steps flagged (fraction {}), {} flagged runs, longest {}",
                s.count,
                s.steps,
                codec::fmt_f64(s.fraction),
                s.flagged_runs.len(),
                s.flagged_runs.iter().max().copied().unwrap_or(0)
            );
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct EdgeRow<'a> {
    src: &'a str,
    dst: &'a str,
    value: MaybeNum,
    within: bool,
}

#[derive(Serialize)]
struct EdgeStatistics {
    informative_within: usize,
    informative_between: usize,
    misinformative_within: usize,
    misinformative_between: usize,
    informative_within_fraction: Option<Num>,
    informative_between_fraction: Option<Num>,
    misinformative_within_fraction: Option<Num>,
    misinformative_between_fraction: Option<Num>,
}

fn network(cli: &Cli, a: &NetworkArgs, sinks: &mut Sinks<'_>) -> Result<()> {
    let mut report = EmergenceReport::new("network");
    let input = read_input("edges", &a.edges)?;
    let g = input.parse(|t| codec::parse_edge_list(t, a.directed))?;
    report.inputs.push(input.digest);
    report.setting("directed", a.directed);
    let prior = prior_or(cli, Prior::Uniform);
    report.setting("prior", prior.name());
    let communities = match &a.communities {
        Some(path) => {
            let input = read_input("communities", path)?;
            let c = input.parse(|t| codec::parse_communities(t, g.labels()))?;
            report.inputs.push(input.digest);
            report.setting("communities", "file");
            c
        }
        None => {
            let seed = cli.seed.unwrap_or(0);
            report.setting("communities", "label-propagation");
            report.setting("seed", seed);
            label_propagation(&g, seed)?
        }
    };
    let r = network_emergence(&g, &communities, prior)?;
    let labels = g.labels();
    if !r.dangling.is_empty() {
        let names: Vec<&str> = r.dangling.iter().map(|&i| labels[i].as_str()).collect();
        report.warnings.push(format!("dangling nodes given self-loops: {}", names.join(", ")));
    }
    if r.macro_undefined {
        report.warnings.push("macro-undefined: a single community leaves a one-state macro scale".into());
    } else if r.emergence_score.is_none() {
        report.warnings.push("emergence score undefined: both scales have zero effectiveness".into());
    }
    report.expected = json!({
        "n_nodes": r.n_nodes,
        "n_communities": r.n_communities,
        "micro": { "effective_information": value(&Num(r.micro_ei)), "effectiveness": value(&r.micro_effectiveness.map(Num)) },
        "macro": { "effective_information": value(&Num(r.macro_ei)), "effectiveness": value(&r.macro_effectiveness.map(Num)) },
        "emergence_score": value(&r.emergence_score.map(Num)),
    });
    let edges: Vec<EdgeRow> = r
        .edges
        .edges
        .iter()
        .map(|e| EdgeRow {
            src: &labels[e.src],
            dst: &labels[e.dst],
            value: MaybeNum(e.value),
            within: e.within.expect("communities attached"),
        })
        .collect();
    let nodes: Vec<serde_json::Value> = labels
        .iter()
        .enumerate()
        .map(|(i, l)| json!({ "node": l, "community": communities.community_of(i) }))
        .collect();
    report.local = json!({ "communities": nodes, "edges": value(&edges) });
    let s = &r.edge_classes;
    let edge_stats = EdgeStatistics {
        informative_within: s.informative_within,
        informative_between: s.informative_between,
        misinformative_within: s.misinformative_within,
        misinformative_between: s.misinformative_between,
        informative_within_fraction: s.informative_within_fraction.map(Num),
        informative_between_fraction: s.informative_between_fraction.map(Num),
        misinformative_within_fraction: s.misinformative_within_fraction.map(Num),
        misinformative_between_fraction: s.misinformative_between_fraction.map(Num),
    };
    report.statistics = json!({
        "transitions": value(&class_statistics(&r.classification)),
        "edges": value(&edge_stats),
    });
    warn_all(sinks, &report.warnings);
    emit(cli, sinks, &report.to_json())
}

fn search(cli: &Cli, a: &SearchArgs, sinks: &mut Sinks<'_>) -> Result<()> {
    let mut report = EmergenceReport::new("search");
    let input = read_input("tpm", &a.tpm)?;
    let w = load_tpm(&input, &mut report.warnings)?;
    report.inputs.push(input.digest);
    let mode = match a.mode {
        ModeArg::Exhaustive => SearchMode::Exhaustive,
        ModeArg::Greedy => SearchMode::Greedy,
    };
    report.setting("mode", if mode == SearchMode::Exhaustive { "exhaustive" } else { "greedy" });
    let found = partition_search(&w, mode)?;
    let p = found
        .partition
        .clone()
        .with_labels(w.labels().to_vec(), (0..found.partition.n_macro()).map(|k| k.to_string()).collect())?;
    let m = macro_tpm(&w, &p, flicker_core::Weighting::UniformWithinGroup)?;
    let score = if p.n_macro() < 2 {
        report.warnings.push("best partition is a single group; emergence score undefined".into());
        None
    } else {
        score_or_warn(&w, &m, &mut report.warnings)
    };
    report.expected = json!({
        "micro": value(&scale_summary(&w)),
        "macro_effectiveness": value(&Num(found.effectiveness)),
        "emergence_score": value(&score.map(Num)),
    });
    let groups: Vec<serde_json::Value> = p
        .micro_labels()
        .iter()
        .enumerate()
        .map(|(i, l)| json!({ "micro": l, "macro": p.macro_labels()[p.macro_of(i)] }))
        .collect();
    report.local = json!({ "partition": groups });
    report.statistics = json!({ "evaluated": found.evaluated, "n_macro": p.n_macro() });
    warn_all(sinks, &report.warnings);
    emit(cli, sinks, &report.to_json())
}
