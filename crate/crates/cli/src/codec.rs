//! Readers and writers for the on-disk formats.
//!
//! Every writer emits text its reader accepts, with floats printed in
//! shortest round-trip form so values survive a write/read cycle bit-exactly.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use flicker_core::coarse::{boolean_aggregation, BoolFn, ElementGroup};
use flicker_core::netscale::{CommunityAssignment, CommunitySource};
use flicker_core::phiid::{AtomTable, PhiAtom, PhiLattice};
use flicker_core::walker::{Ratio, WalkTrace};
use flicker_core::{FactorizedSystem, Partition, ProbVector, TransitionMatrix, WeightedGraph};
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CodecError {
    #[error("line {line}: {message}")]
    Line { line: u64, message: String },
    #[error("{0}")]
    Format(String),
    #[error(transparent)]
    Core(#[from] flicker_core::Error),
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, CodecError>;

/// Shortest round-trip decimal form; `inf`, `-inf` and `nan` for non-finite values.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:?}")
    }
}

/// A float that serializes non-finite values as strings rather than `null`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(self.0)
        } else {
            s.serialize_str(&fmt_f64(self.0))
        }
    }
}

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            F(f64),
            S(String),
        }
        match Raw::deserialize(d)? {
            Raw::F(x) => Ok(Num(x)),
            Raw::S(s) => match s.as_str() {
                "inf" => Ok(Num(f64::INFINITY)),
                "-inf" => Ok(Num(f64::NEG_INFINITY)),
                "nan" => Ok(Num(f64::NAN)),
                other => Err(serde::de::Error::custom(format!("not a number: {other:?}"))),
            },
        }
    }
}

struct Record {
    line: u64,
    fields: Vec<String>,
}

fn records(text: &str) -> Result<Vec<Record>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.iter().all(str::is_empty) {
            continue;
        }
        out.push(Record { line, fields: rec.iter().map(str::to_owned).collect() });
    }
    Ok(out)
}

fn parse_number(field: &str, line: u64) -> Result<f64> {
    let x: f64 =
        field.parse().map_err(|_| CodecError::Line { line, message: format!("cannot parse {field:?} as a number") })?;
    if !x.is_finite() {
        return Err(CodecError::Line { line, message: format!("{field:?} is not finite") });
    }
    Ok(x)
}

fn is_numeric_row(fields: &[String]) -> bool {
    fields.iter().all(|f| f.parse::<f64>().is_ok())
}

fn check_unique(labels: &[String], line: u64) -> Result<()> {
    let mut seen = HashMap::new();
    for l in labels {
        if seen.insert(l.as_str(), ()).is_some() {
            return Err(CodecError::Line { line, message: format!("duplicate label {l:?}") });
        }
    }
    Ok(())
}

/// Optional header labels and `(line, values)` rows.
type NumericTable = (Option<Vec<String>>, Vec<(u64, Vec<f64>)>);

/// Splits off an optional header of labels, then parses the numeric rows.
fn numeric_table(text: &str) -> Result<NumericTable> {
    let recs = records(text)?;
    let mut iter = recs.into_iter().peekable();
    let header = match iter.peek() {
        Some(r) if !is_numeric_row(&r.fields) => {
            let r = iter.next().expect("peeked");
            check_unique(&r.fields, r.line)?;
            Some(r.fields)
        }
        _ => None,
    };
    let rows = iter
        .map(|r| {
            let values = r.fields.iter().map(|f| parse_number(f, r.line)).collect::<Result<Vec<_>>>()?;
            Ok((r.line, values))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((header, rows))
}

/// A transition matrix read from CSV, with the labels of rows that were rescaled.
#[derive(Debug, Clone)]
pub struct LoadedTpm {
    pub tpm: TransitionMatrix<f64>,
    pub renormalized: Vec<String>,
}

/// One row per source state; an optional first row of state labels.
pub fn parse_tpm(text: &str) -> Result<LoadedTpm> {
    let (header, rows) = numeric_table(text)?;
    let n = rows.len();
    if n == 0 {
        return Err(CodecError::Format("transition matrix has no rows".into()));
    }
    let labels = header.unwrap_or_else(|| (0..n).map(|i| i.to_string()).collect());
    if labels.len() != n {
        return Err(CodecError::Format(format!("{} labels for {n} rows", labels.len())));
    }
    for (line, r) in &rows {
        if r.len() != n {
            return Err(CodecError::Line { line: *line, message: format!("expected {n} values, found {}", r.len()) });
        }
        if let Some(x) = r.iter().find(|x| !x.is_finite() || **x < 0.0) {
            return Err(CodecError::Line { line: *line, message: format!("entry {x} is not a probability") });
        }
    }
    let lines: Vec<u64> = rows.iter().map(|(l, _)| *l).collect();
    let values: Vec<Vec<f64>> = rows.into_iter().map(|(_, r)| r).collect();
    let (tpm, fixed) = TransitionMatrix::renormalized(values).map_err(|e| match e {
        flicker_core::Error::RowSum { row, sum } => {
            CodecError::Line { line: lines[row], message: format!("row {:?} sums to {sum} (expected 1)", labels[row]) }
        }
        flicker_core::Error::InvalidDistribution(m) => CodecError::Format(m),
        other => other.into(),
    })?;
    let renormalized = fixed.iter().map(|&i| labels[i].clone()).collect();
    Ok(LoadedTpm { tpm: tpm.with_labels(labels)?, renormalized })
}

pub fn write_tpm(w: &TransitionMatrix<f64>) -> String {
    let mut out = w.labels().join(",");
    out.push('\n');
    for row in w.rows() {
        out.push_str(&row.iter().map(|&p| fmt_f64(p)).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    out
}

/// A single row of probabilities, optionally preceded by a row of labels.
pub fn parse_prob_vector(text: &str) -> Result<ProbVector<f64>> {
    let (header, rows) = numeric_table(text)?;
    let [(line, values)] = &rows[..] else {
        return Err(CodecError::Format(format!("expected one row of probabilities, found {}", rows.len())));
    };
    let p = ProbVector::new(values.clone()).map_err(|e| CodecError::Line { line: *line, message: e.to_string() })?;
    match header {
        Some(labels) => Ok(p.with_labels(labels)?),
        None => Ok(p),
    }
}

pub fn write_prob_vector(p: &ProbVector<f64>) -> String {
    let mut out = String::new();
    if let Some(labels) = p.labels() {
        out.push_str(&labels.join(","));
        out.push('\n');
    }
    out.push_str(&p.probs().iter().map(|&x| fmt_f64(x)).collect::<Vec<_>>().join(","));
    out.push('\n');
    out
}

fn two_columns(text: &str, header: [&str; 2]) -> Result<Vec<(u64, String, String)>> {
    let mut recs = records(text)?;
    if recs.first().is_some_and(|r| {
        r.fields.len() == 2
            && r.fields[0].eq_ignore_ascii_case(header[0])
            && r.fields[1].eq_ignore_ascii_case(header[1])
    }) {
        recs.remove(0);
    }
    recs.into_iter()
        .map(|r| match <[String; 2]>::try_from(r.fields) {
            Ok([a, b]) => Ok((r.line, a, b)),
            Err(f) => Err(CodecError::Line { line: r.line, message: format!("expected 2 fields, found {}", f.len()) }),
        })
        .collect()
}

/// Assigns every micro label to a group; macro states are numbered by first
/// appearance in micro-state order.
fn grouping(
    rows: Vec<(u64, String, String)>,
    micro_labels: &[String],
    what: &str,
) -> Result<(Vec<usize>, Vec<String>)> {
    let index: HashMap<&str, usize> = micro_labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    let mut group_of: Vec<Option<String>> = vec![None; micro_labels.len()];
    for (line, micro, group) in rows {
        let Some(&i) = index.get(micro.as_str()) else {
            return Err(CodecError::Line { line, message: format!("unknown {what} {micro:?}") });
        };
        if group_of[i].replace(group).is_some() {
            return Err(CodecError::Line { line, message: format!("{what} {micro:?} assigned twice") });
        }
    }
    let mut names: Vec<String> = Vec::new();
    let mut assignment = Vec::with_capacity(micro_labels.len());
    for (i, g) in group_of.into_iter().enumerate() {
        let g = g.ok_or_else(|| CodecError::Format(format!("{what} {:?} has no assignment", micro_labels[i])))?;
        let id = match names.iter().position(|n| *n == g) {
            Some(k) => k,
            None => {
                names.push(g);
                names.len() - 1
            }
        };
        assignment.push(id);
    }
    Ok((assignment, names))
}

/// `micro_label,macro_label` rows covering every state of the matrix exactly once.
pub fn parse_partition(text: &str, micro_labels: &[String]) -> Result<Partition> {
    let (assignment, names) =
        grouping(two_columns(text, ["micro_label", "macro_label"])?, micro_labels, "micro state")?;
    Ok(Partition::new(assignment)?.with_labels(micro_labels.to_vec(), names)?)
}

pub fn write_partition(p: &Partition) -> String {
    let mut out = String::from("micro_label,macro_label\n");
    for (i, label) in p.micro_labels().iter().enumerate() {
        let _ = writeln!(out, "{label},{}", p.macro_labels()[p.macro_of(i)]);
    }
    out
}

/// `src,dst[,weight]` rows; nodes are numbered by first appearance.
pub fn parse_edge_list(text: &str, directed: bool) -> Result<WeightedGraph<f64>> {
    let mut recs = records(text)?;
    if recs.first().is_some_and(|r| {
        r.fields.len() >= 2 && r.fields[0].eq_ignore_ascii_case("src") && r.fields[1].eq_ignore_ascii_case("dst")
    }) {
        recs.remove(0);
    }
    let mut labels: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut edges = Vec::new();
    for r in recs {
        if !(2..=3).contains(&r.fields.len()) {
            return Err(CodecError::Line {
                line: r.line,
                message: format!("expected 2 or 3 fields, found {}", r.fields.len()),
            });
        }
        let mut node = |name: &str| -> usize {
            *index.entry(name.to_owned()).or_insert_with(|| {
                labels.push(name.to_owned());
                labels.len() - 1
            })
        };
        let (a, b) = (node(&r.fields[0]), node(&r.fields[1]));
        let w = match r.fields.get(2) {
            Some(f) if !f.is_empty() => parse_number(f, r.line)?,
            _ => 1.0,
        };
        if w < 0.0 {
            return Err(CodecError::Line { line: r.line, message: format!("negative weight {w}") });
        }
        edges.push((a, b, w));
    }
    if labels.is_empty() {
        return Err(CodecError::Format("edge list has no edges".into()));
    }
    let mut g = WeightedGraph::new(labels);
    for (a, b, w) in edges {
        if directed {
            g.add_edge(a, b, w)?;
        } else {
            g.add_undirected(a, b, w)?;
        }
    }
    Ok(g)
}

/// Writes every stored directed edge; read back with `directed = true`.
pub fn write_edge_list(g: &WeightedGraph<f64>) -> String {
    let mut out = String::from("src,dst,weight\n");
    for &(a, b, w) in g.edges() {
        let _ = writeln!(out, "{},{},{}", g.labels()[a], g.labels()[b], fmt_f64(w));
    }
    out
}

/// `node,community` rows covering every node of the graph exactly once.
pub fn parse_communities(text: &str, nodes: &[String]) -> Result<CommunityAssignment> {
    let (ids, _) = grouping(two_columns(text, ["node", "community"])?, nodes, "node")?;
    Ok(CommunityAssignment::new(&ids, CommunitySource::File)?)
}

pub fn write_communities(c: &CommunityAssignment, nodes: &[String]) -> String {
    let mut out = String::from("node,community\n");
    for (i, label) in nodes.iter().enumerate() {
        let _ = writeln!(out, "{label},{}", c.community_of(i));
    }
    out
}

/// Joint state index convention: element 1 is the most significant digit.
pub const JOINT_INDEX: &str = "element1_major";

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    pub element_cardinalities: [usize; 2],
    /// Row-major joint matrix over joint states `s1 * n2 + s2`.
    pub tpm: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub joint_index: Option<String>,
}

impl SystemFile {
    pub fn from_system(sys: &FactorizedSystem<f64>) -> Self {
        let (a, b) = sys.cards();
        Self {
            element_cardinalities: [a, b],
            tpm: sys.tpm().rows().map(<[f64]>::to_vec).collect(),
            prior: Some(sys.prior().probs().to_vec()),
            joint_index: Some(JOINT_INDEX.into()),
        }
    }

    /// Builds the system; without a stored prior, `fallback` resolves one from the matrix.
    pub fn build(self, fallback: flicker_core::Prior) -> Result<FactorizedSystem<f64>> {
        if let Some(ix) = &self.joint_index {
            if ix != JOINT_INDEX {
                return Err(CodecError::Format(format!("unsupported joint_index {ix:?} (only {JOINT_INDEX:?})")));
            }
        }
        let [a, b] = self.element_cardinalities;
        let w = TransitionMatrix::new(self.tpm)?;
        let sys = match self.prior {
            Some(p) => FactorizedSystem::new((a, b), w, ProbVector::new(p)?)?,
            None => FactorizedSystem::with_policy((a, b), w, fallback)?,
        };
        Ok(sys)
    }
}

pub fn parse_system(text: &str) -> Result<SystemFile> {
    Ok(serde_json::from_str(text)?)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSpec {
    pub elements: Vec<usize>,
    pub function: String,
}

/// Element-wise Boolean aggregation; elements are numbered from 0, most significant first.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AggregationFile {
    pub n_elements: usize,
    pub groups: Vec<GroupSpec>,
}

impl AggregationFile {
    pub fn build(&self) -> Result<Partition> {
        let groups = self
            .groups
            .iter()
            .map(|g| {
                let function = BoolFn::parse(&g.function).ok_or_else(|| {
                    CodecError::Format(format!("unknown function {:?} (AND, OR, XOR, MAJ)", g.function))
                })?;
                Ok(ElementGroup { elements: g.elements.clone(), function })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(boolean_aggregation(self.n_elements, &groups)?)
    }
}

pub fn parse_aggregation(text: &str) -> Result<AggregationFile> {
    Ok(serde_json::from_str(text)?)
}

/// Atom values keyed by canonical atom strings, in lattice order.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomMap(pub Vec<(String, f64)>);

impl AtomMap {
    pub fn values(table: &AtomTable<f64>) -> Self {
        Self(table.iter().map(|(a, v)| (a.to_string(), v)).collect())
    }

    pub fn redundancy(table: &AtomTable<f64>) -> Self {
        Self(table.atoms().iter().zip(table.redundancy()).map(|(a, &v)| (a.to_string(), v)).collect())
    }
}

impl Serialize for AtomMap {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut m = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            m.serialize_entry(k, &Num(*v))?;
        }
        m.end()
    }
}

/// Parses an atom map, checking every key is a valid atom.
pub fn parse_atom_map(text: &str) -> Result<BTreeMap<PhiAtom, f64>> {
    let raw: BTreeMap<String, Num> = serde_json::from_str(text)?;
    let lattice = PhiLattice::two_element();
    raw.into_iter()
        .map(|(k, v)| {
            let atom = PhiAtom::parse(&k)?;
            if lattice.index_of(&atom).is_none() {
                return Err(CodecError::Format(format!("{k:?} is not a two-element atom")));
            }
            Ok((atom, v.0))
        })
        .collect()
}

pub const TRACE_HEADER: &str = "t,state,e_micro,e_macro,ratio,decoupling,flicker";

/// One cell of a trace: absent context, undefined value, or a number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Absent,
    Undefined,
    Value(f64),
}

impl Cell {
    fn from_opt(present: bool, v: Option<f64>) -> Self {
        match (present, v) {
            (false, _) => Cell::Absent,
            (true, None) => Cell::Undefined,
            (true, Some(x)) => Cell::Value(x),
        }
    }

    fn csv(self) -> String {
        match self {
            Cell::Absent => String::new(),
            Cell::Undefined => "undefined".into(),
            Cell::Value(x) => fmt_f64(x),
        }
    }

    fn json(self) -> serde_json::Value {
        match self {
            Cell::Absent => serde_json::Value::Null,
            Cell::Undefined => "undefined".into(),
            Cell::Value(x) => serde_json::to_value(Num(x)).expect("number serializes"),
        }
    }

    fn parse(field: &str, line: u64) -> Result<Self> {
        match field {
            "" => Ok(Cell::Absent),
            "undefined" => Ok(Cell::Undefined),
            "inf" => Ok(Cell::Value(f64::INFINITY)),
            "-inf" => Ok(Cell::Value(f64::NEG_INFINITY)),
            f => Ok(Cell::Value(parse_number(f, line)?)),
        }
    }
}

/// One trace row; `t = 0` carries only the initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub t: usize,
    pub state: String,
    pub e_micro: Cell,
    pub e_macro: Cell,
    pub ratio: Cell,
    pub decoupling: Cell,
    pub flicker: Option<bool>,
}

pub fn trace_rows(trace: &WalkTrace<f64>, labels: &[String]) -> Vec<TraceRow> {
    let mut rows = vec![TraceRow {
        t: 0,
        state: labels[trace.states[0]].clone(),
        e_micro: Cell::Absent,
        e_macro: Cell::Absent,
        ratio: Cell::Absent,
        decoupling: Cell::Absent,
        flicker: None,
    }];
    for s in &trace.steps {
        let ratio = match s.ratio {
            None => Cell::Absent,
            Some(Ratio::Undefined) => Cell::Undefined,
            Some(Ratio::Value(r)) => Cell::Value(r),
        };
        rows.push(TraceRow {
            t: s.t,
            state: labels[s.to].clone(),
            e_micro: Cell::from_opt(true, s.e_micro),
            e_macro: Cell::from_opt(trace.has_macro, s.e_macro),
            ratio,
            decoupling: Cell::from_opt(trace.has_factorized, s.decoupling),
            flicker: Some(s.flicker()),
        });
    }
    rows
}

pub fn write_trace_csv(rows: &[TraceRow]) -> String {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    for r in rows {
        let flicker = match r.flicker {
            None => "",
            Some(true) => "1",
            Some(false) => "0",
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.t,
            r.state,
            r.e_micro.csv(),
            r.e_macro.csv(),
            r.ratio.csv(),
            r.decoupling.csv(),
            flicker
        );
    }
    out
}

pub fn parse_trace_csv(text: &str) -> Result<Vec<TraceRow>> {
    let recs = records(text)?;
    let mut iter = recs.into_iter();
    match iter.next() {
        Some(h) if h.fields.join(",") == TRACE_HEADER => {}
        _ => return Err(CodecError::Format(format!("trace must start with the header {TRACE_HEADER:?}"))),
    }
    iter.map(|r| {
        let line = r.line;
        let [t, state, e_micro, e_macro, ratio, decoupling, flicker] = <[String; 7]>::try_from(r.fields)
            .map_err(|f| CodecError::Line { line, message: format!("expected 7 fields, found {}", f.len()) })?;
        Ok(TraceRow {
            t: t.parse().map_err(|_| CodecError::Line { line, message: format!("bad step index {t:?}") })?,
            state,
            e_micro: Cell::parse(&e_micro, line)?,
            e_macro: Cell::parse(&e_macro, line)?,
            ratio: Cell::parse(&ratio, line)?,
            decoupling: Cell::parse(&decoupling, line)?,
            flicker: match flicker.as_str() {
                "" => None,
                "1" => Some(true),
                "0" => Some(false),
                other => return Err(CodecError::Line { line, message: format!("bad flicker flag {other:?}") }),
            },
        })
    })
    .collect()
}

pub fn write_trace_json(rows: &[TraceRow], seed: Option<u64>, prior: &str) -> String {
    let steps: Vec<serde_json::Value> = rows
        .iter()
        .map(|r| {
            serde_json::json!({
                "t": r.t,
                "state": r.state,
                "e_micro": r.e_micro.json(),
                "e_macro": r.e_macro.json(),
                "ratio": r.ratio.json(),
                "decoupling": r.decoupling.json(),
                "flicker": r.flicker,
            })
        })
        .collect();
    let doc = serde_json::json!({ "seed": seed, "prior": prior, "steps": steps });
    let mut s = serde_json::to_string_pretty(&doc).expect("trace serializes");
    s.push('\n');
    s
}
