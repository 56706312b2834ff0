//! Scenario files: line-oriented sectioned text.
//!
//! ```text
//! seed = 7
//!
//! [chart]
//! x1 = 0.5, 2
//! samples = 100
//! require = x1 > 0.6
//!
//! [metric]
//! g00 = 1
//! g11 = -1
//! g22 = -x1^2
//! g33 = -1
//!
//! [su2]
//! D1 = 1, 0
//! D2 = 0, 1
//! d1 = 0, 1
//! d2 = -1, 0
//! A0.1 = i*x1, 0
//! A0.2 = 0, -i*x1
//! orthonormal = true
//!
//! [gauge.su2]
//! S1 = cos(x0), -sin(x0)
//! S2 = sin(x0), cos(x0)
//! ```
//!
//! Every value is an expression in the core grammar; list-valued keys
//! separate entries with commas. `#` starts a comment.

use std::fmt;
use std::path::{Path, PathBuf};

use gck_core::bundles::{BundleStructure, GaugeMap, Skew};
use gck_core::expr::{parse_expr, DIM};
use gck_core::geometry::{christoffel, structure_constants, FrameField, GammaField, MetricField};
use gck_core::geometry::{Signature, StructureConstants};
use gck_core::sampling::{
    Comparison, Constraint, SampleBox, SampleSet, SampleSpec, DEFAULT_SAMPLES,
};
use gck_core::tensor::{ConnectionTriple, Potential};
use gck_core::{ExprMatrix, ScalarExpr};
use thiserror::Error;

/// A located problem in a scenario file. Lines and columns are 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Issue {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "line {}, column {}: {}",
            self.line, self.column, self.message
        )
    }
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}", join_issues(.0))]
    Parse(Vec<Issue>),
    #[error("{context}: {source}")]
    Invalid {
        context: String,
        #[source]
        source: gck_core::Error,
    },
}

impl LoadError {
    /// Located issues; empty for I/O and validation errors.
    pub fn issues(&self) -> &[Issue] {
        match self {
            LoadError::Parse(v) => v,
            _ => &[],
        }
    }
}

fn join_issues(issues: &[Issue]) -> String {
    let lines: Vec<String> = issues.iter().map(Issue::to_string).collect();
    lines.join("\n")
}

/// Command-line overrides applied on top of the file.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct BundleSpec {
    pub q: usize,
    /// `hermitian[i][j] = D_{ij̄}`
    pub hermitian: ExprMatrix,
    pub skew: Skew,
    /// `potential[k][i][j] = A^i_kj`
    pub potential: Vec<ExprMatrix>,
    /// Declares the bundle frame orthonormal, which turns the orthonormality
    /// and su(q) checks into verdicts.
    pub orthonormal: bool,
}

#[derive(Debug, Clone)]
pub enum GaugeSpec {
    Phase(ScalarExpr),
    Matrix(ExprMatrix),
}

impl GaugeSpec {
    pub fn q(&self) -> usize {
        match self {
            GaugeSpec::Phase(_) => 1,
            GaugeSpec::Matrix(m) => m.len(),
        }
    }
}

/// The file contents after parsing, before numerical validation.
#[derive(Debug, Clone)]
pub struct ScenarioSpec {
    pub seed: u64,
    pub tolerance: Option<f64>,
    pub names: [String; DIM],
    pub bounds: SampleBox,
    pub samples: usize,
    pub signature: Signature,
    /// Exclusions with their source text.
    pub constraints: Vec<(String, Constraint)>,
    /// `frame[i][s] = Υ^s_i`
    pub frame: [[ScalarExpr; DIM]; DIM],
    /// `metric[i][j] = g_ij`, symmetric.
    pub metric: [[ScalarExpr; DIM]; DIM],
    /// Sorted by rank.
    pub bundles: Vec<BundleSpec>,
    /// Sorted by rank.
    pub gauges: Vec<GaugeSpec>,
}

#[derive(Debug, Clone)]
pub struct Bundle {
    pub structure: BundleStructure,
    pub conn: ConnectionTriple,
    pub orthonormal: bool,
}

/// A validated scenario: sample set, frame, metric, Levi-Civita `Γ`, the
/// bundles with their real connections, and the gauge maps.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub spec: ScenarioSpec,
    /// Effective sampling seed after overrides.
    pub seed: u64,
    /// Override for every check's own threshold.
    pub tolerance: Option<f64>,
    pub samples: SampleSet,
    pub frame: FrameField,
    pub metric: MetricField,
    pub c: StructureConstants,
    pub gamma: GammaField,
    pub bundles: Vec<Bundle>,
    pub gauges: Vec<GaugeMap>,
}

impl Scenario {
    pub fn bundle(&self, q: usize) -> Option<&Bundle> {
        self.bundles.iter().find(|b| b.structure.q() == q)
    }
}

pub fn load_scenario(path: &Path, overrides: &Overrides) -> Result<Scenario, LoadError> {
    let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let spec = parse_scenario(&text)?;
    build(name, spec, overrides)
}

/// Numerical validation of parsed scenario data.
pub fn build(
    name: String,
    spec: ScenarioSpec,
    overrides: &Overrides,
) -> Result<Scenario, LoadError> {
    let invalid = |context: &str| {
        let context = context.to_string();
        move |source| LoadError::Invalid { context, source }
    };
    let seed = overrides.seed.unwrap_or(spec.seed);
    let mut sampling =
        SampleSpec::new(spec.bounds, overrides.samples.unwrap_or(spec.samples), seed);
    for (_, c) in &spec.constraints {
        sampling = sampling.with_constraint(c.clone());
    }
    let samples = sampling.generate().map_err(invalid("chart"))?;
    let frame = FrameField::new(spec.frame.clone(), samples.clone()).map_err(invalid("frame"))?;
    let metric = MetricField::with_signature(spec.metric.clone(), &samples, spec.signature)
        .map_err(invalid("metric"))?;
    let c = structure_constants(&frame);
    let gamma = christoffel(&metric, &frame, &c);

    let mut bundles = Vec::new();
    for b in &spec.bundles {
        let ctx = format!("[{}]", block_name(b.q));
        let structure = BundleStructure::new(b.hermitian.clone(), b.skew.clone(), &samples)
            .map_err(invalid(&ctx))?;
        let a = Potential::from_matrices(b.q, &b.potential).map_err(invalid(&ctx))?;
        bundles.push(Bundle {
            structure,
            conn: ConnectionTriple::real(gamma.clone(), a),
            orthonormal: b.orthonormal,
        });
    }
    let mut gauges = Vec::new();
    for g in &spec.gauges {
        let ctx = format!("[gauge.{}]", block_name(g.q()));
        let map = match g {
            GaugeSpec::Phase(phi) => GaugeMap::phase(phi.clone(), &samples),
            GaugeSpec::Matrix(s) => GaugeMap::matrix(s.clone(), &samples),
        }
        .map_err(invalid(&ctx))?;
        gauges.push(map);
    }
    Ok(Scenario {
        name,
        seed,
        tolerance: overrides.tolerance.or(spec.tolerance),
        spec,
        samples,
        frame,
        metric,
        c,
        gamma,
        bundles,
        gauges,
    })
}

pub fn block_name(q: usize) -> &'static str {
    match q {
        1 => "u1",
        2 => "su2",
        _ => "su3",
    }
}

/// A value with the 1-based column where it starts.
#[derive(Debug, Clone)]
struct Field<'a> {
    text: &'a str,
    column: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Top,
    Chart,
    Frame,
    Metric,
    Bundle(usize),
    Gauge(usize),
}

#[derive(Default)]
struct BundleDraft {
    line: usize,
    rows: Vec<Option<Vec<ScalarExpr>>>,
    skew_rows: Vec<Option<Vec<ScalarExpr>>>,
    d123: Option<ScalarExpr>,
    potential: Vec<Vec<Option<Vec<ScalarExpr>>>>,
    orthonormal: bool,
}

struct GaugeDraft {
    line: usize,
    phi: Option<ScalarExpr>,
    rows: Vec<Option<Vec<ScalarExpr>>>,
}

struct Parser {
    issues: Vec<Issue>,
    line: usize,
}

impl Parser {
    fn issue(&mut self, column: usize, message: impl Into<String>) {
        self.issues.push(Issue {
            line: self.line,
            column,
            message: message.into(),
        });
    }

    fn expr(&mut self, f: &Field) -> Option<ScalarExpr> {
        if f.text.is_empty() {
            self.issue(f.column, "missing expression");
            return None;
        }
        match parse_expr(f.text) {
            Ok(e) => Some(e),
            Err(err) => {
                let offset = f.text[..err.position.min(f.text.len())].chars().count();
                self.issue(f.column + offset, err.to_string());
                None
            }
        }
    }

    fn real(&mut self, f: &Field) -> Option<f64> {
        let e = self.expr(f)?;
        match e.as_constant() {
            Some(c) if c.im == 0.0 && c.re.is_finite() => Some(c.re),
            _ => {
                self.issue(f.column, format!("`{}` is not a real constant", f.text));
                None
            }
        }
    }

    fn list(&mut self, f: &Field, len: usize, what: &str) -> Option<Vec<ScalarExpr>> {
        let parts = split_list(f);
        if parts.len() != len {
            self.issue(
                f.column,
                format!(
                    "rank mismatch: {what} needs {len} entries, found {}",
                    parts.len()
                ),
            );
            return None;
        }
        let out: Vec<Option<ScalarExpr>> = parts.iter().map(|p| self.expr(p)).collect();
        out.into_iter().collect()
    }
}

fn split_list<'a>(f: &Field<'a>) -> Vec<Field<'a>> {
    let mut out = Vec::new();
    let mut start = 0;
    for (idx, ch) in f.text.char_indices().chain([(f.text.len(), ',')]) {
        if ch == ',' {
            let raw = &f.text[start..idx];
            let lead = raw.len() - raw.trim_start().len();
            out.push(Field {
                text: raw.trim(),
                column: f.column + f.text[..start + lead].chars().count(),
            });
            start = idx + 1;
        }
    }
    out
}

/// Parses a 1-based row index suffix in `1..=q`.
fn row_index(s: &str, q: usize) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(r) if (1..=q).contains(&r) => Ok(r - 1),
        Ok(r) => Err(format!("rank mismatch: row {r} outside 1..={q}")),
        Err(_) => Err(format!("bad row index `{s}`")),
    }
}

fn axis_index(s: &str) -> Option<usize> {
    s.parse::<usize>().ok().filter(|a| *a < DIM)
}

pub fn parse_scenario(text: &str) -> Result<ScenarioSpec, LoadError> {
    let mut p = Parser {
        issues: Vec::new(),
        line: 0,
    };
    let identity = |i: usize, j: usize| {
        if i == j {
            ScalarExpr::one()
        } else {
            ScalarExpr::zero()
        }
    };
    let mut seed = 0u64;
    let mut tolerance = None;
    let mut names: [String; DIM] = std::array::from_fn(|a| format!("x{a}"));
    let mut bounds = SampleBox::cube(-1.0, 1.0);
    let mut samples = DEFAULT_SAMPLES;
    let mut signature = Signature::LORENTZ;
    let mut constraints = Vec::new();
    let mut frame: [[ScalarExpr; DIM]; DIM] =
        std::array::from_fn(|i| std::array::from_fn(|s| identity(i, s)));
    let mut metric: [[Option<ScalarExpr>; DIM]; DIM] = Default::default();
    let mut metric_line = None;
    let mut bundles: [Option<BundleDraft>; 3] = Default::default();
    let mut gauges: [Option<GaugeDraft>; 3] = Default::default();

    // `None` while inside an unknown section, whose entries are skipped
    let mut section = Some(Section::Top);
    let mut seen: Vec<(Section, String)> = Vec::new();
    let mut seen_sections: Vec<Section> = Vec::new();

    for (n, raw) in text.lines().enumerate() {
        p.line = n + 1;
        let content = raw.split('#').next().unwrap_or("");
        let trimmed = content.trim();
        if trimmed.is_empty() {
            continue;
        }
        let indent = content.len() - content.trim_start().len();
        let first_col = content[..indent].chars().count() + 1;

        if let Some(rest) = trimmed.strip_prefix('[') {
            let Some(header) = rest.strip_suffix(']') else {
                p.issue(first_col, "unterminated section header");
                continue;
            };
            let next = match header.trim() {
                "chart" => Section::Chart,
                "frame" => Section::Frame,
                "metric" => Section::Metric,
                "u1" => Section::Bundle(1),
                "su2" => Section::Bundle(2),
                "su3" => Section::Bundle(3),
                "gauge.u1" => Section::Gauge(1),
                "gauge.su2" => Section::Gauge(2),
                "gauge.su3" => Section::Gauge(3),
                other => {
                    p.issue(first_col + 1, format!("unknown section `[{other}]`"));
                    section = None;
                    continue;
                }
            };
            if seen_sections.contains(&next) {
                p.issue(
                    first_col,
                    format!("duplicate section `[{}]`", header.trim()),
                );
            }
            seen_sections.push(next);
            section = Some(next);
            match next {
                Section::Metric => metric_line = Some(p.line),
                Section::Bundle(q) => {
                    bundles[q - 1] = Some(BundleDraft {
                        line: p.line,
                        rows: vec![None; q],
                        skew_rows: vec![None; q],
                        potential: vec![vec![None; q]; DIM],
                        ..Default::default()
                    })
                }
                Section::Gauge(q) => {
                    gauges[q - 1] = Some(GaugeDraft {
                        line: p.line,
                        phi: None,
                        rows: vec![None; q],
                    })
                }
                _ => {}
            }
            continue;
        }

        let Some(eq) = content.find('=') else {
            p.issue(first_col, "expected `key = value`");
            continue;
        };
        let key = content[..eq].trim();
        let after = &content[eq + 1..];
        let lead = after.len() - after.trim_start().len();
        let value = Field {
            text: after.trim(),
            column: content[..eq + 1 + lead].chars().count() + 1,
        };
        if key.is_empty() {
            p.issue(first_col, "missing key");
            continue;
        }
        let Some(section) = section else {
            continue;
        };
        if key != "require" {
            if seen.iter().any(|(s, k)| *s == section && k == key) {
                p.issue(first_col, format!("duplicate key `{key}`"));
                continue;
            }
            seen.push((section, key.to_string()));
        }
        match section {
            Section::Top => match key {
                "seed" => match value.text.parse::<u64>() {
                    Ok(s) => seed = s,
                    Err(_) => p.issue(value.column, "seed must be a non-negative integer"),
                },
                "tolerance" => match p.real(&value) {
                    Some(t) if t > 0.0 => tolerance = Some(t),
                    Some(_) => p.issue(value.column, "tolerance must be positive"),
                    None => {}
                },
                _ => p.issue(first_col, format!("unknown top-level key `{key}`")),
            },
            Section::Chart => {
                if let Some(axis) = key.strip_prefix('x').and_then(axis_index) {
                    let parts = split_list(&value);
                    if parts.len() != 2 {
                        p.issue(value.column, "expected `lo, hi`");
                        continue;
                    }
                    if let (Some(lo), Some(hi)) = (p.real(&parts[0]), p.real(&parts[1])) {
                        if lo < hi {
                            bounds.lo[axis] = lo;
                            bounds.hi[axis] = hi;
                        } else {
                            p.issue(value.column, format!("empty range for {key}: {lo} >= {hi}"));
                        }
                    }
                    continue;
                }
                match key {
                    "samples" => match value.text.parse::<usize>() {
                        Ok(n) if n > 0 => samples = n,
                        _ => p.issue(value.column, "samples must be a positive integer"),
                    },
                    "signature" => match value.text.parse::<Signature>() {
                        Ok(s) => signature = s,
                        Err(e) => p.issue(value.column, e),
                    },
                    "names" => {
                        let parts = split_list(&value);
                        if parts.len() != DIM || parts.iter().any(|f| f.text.is_empty()) {
                            p.issue(value.column, "names needs four coordinate names");
                        } else {
                            names = std::array::from_fn(|a| parts[a].text.to_string());
                        }
                    }
                    "require" => {
                        let ops: Vec<(usize, char)> = value
                            .text
                            .char_indices()
                            .filter(|(_, c)| *c == '<' || *c == '>')
                            .collect();
                        let [(at, op)] = ops[..] else {
                            p.issue(value.column, "expected `lhs > rhs` or `lhs < rhs`");
                            continue;
                        };
                        let lhs = Field {
                            text: value.text[..at].trim_end(),
                            column: value.column,
                        };
                        let tail = &value.text[at + 1..];
                        let rhs_lead = tail.len() - tail.trim_start().len();
                        let rhs = Field {
                            text: tail.trim(),
                            column: value.column + value.text[..at + 1 + rhs_lead].chars().count(),
                        };
                        if let (Some(l), Some(r)) = (p.expr(&lhs), p.expr(&rhs)) {
                            let op = if op == '>' {
                                Comparison::Greater
                            } else {
                                Comparison::Less
                            };
                            constraints
                                .push((value.text.to_string(), Constraint { lhs: l, op, rhs: r }));
                        }
                    }
                    _ => p.issue(first_col, format!("unknown key `{key}` in [chart]")),
                }
            }
            Section::Frame => {
                let Some(i) = key.strip_prefix('Y').and_then(axis_index) else {
                    p.issue(
                        first_col,
                        format!("unknown key `{key}` in [frame]; expected Y0..Y3"),
                    );
                    continue;
                };
                if let Some(row) = p.list(&value, DIM, &format!("frame vector {key}")) {
                    frame[i] = row.try_into().expect("length checked");
                }
            }
            Section::Metric => {
                let idx = key
                    .strip_prefix('g')
                    .filter(|r| r.len() == 2)
                    .and_then(|r| Some((axis_index(&r[..1])?, axis_index(&r[1..])?)));
                let Some((i, j)) = idx else {
                    p.issue(
                        first_col,
                        format!("unknown key `{key}` in [metric]; expected gij"),
                    );
                    continue;
                };
                if i > j {
                    p.issue(
                        first_col,
                        format!("give g{j}{i} instead of `{key}`; the metric is symmetric"),
                    );
                    continue;
                }
                if let Some(e) = p.expr(&value) {
                    metric[i][j] = Some(e);
                }
            }
            Section::Bundle(q) => {
                let draft = bundles[q - 1].as_mut().expect("opened with its header");
                let block = block_name(q);
                if key == "orthonormal" {
                    match value.text {
                        "true" => draft.orthonormal = true,
                        "false" => draft.orthonormal = false,
                        _ => p.issue(value.column, "orthonormal must be `true` or `false`"),
                    }
                } else if key == "d123" {
                    if q != 3 {
                        p.issue(
                            first_col,
                            format!("rank mismatch: d123 belongs to [su3], not [{block}]"),
                        );
                    } else if let Some(e) = p.expr(&value) {
                        draft.d123 = Some(e);
                    }
                } else if let Some(rest) = key.strip_prefix('A') {
                    let parsed = rest
                        .split_once('.')
                        .and_then(|(k, r)| Some((axis_index(k)?, r)));
                    let Some((k, r)) = parsed else {
                        p.issue(first_col, format!("expected A<k>.<row>, found `{key}`"));
                        continue;
                    };
                    match row_index(r, q) {
                        Ok(r) => {
                            if let Some(row) = p.list(&value, q, &format!("[{block}] row {key}")) {
                                draft.potential[k][r] = Some(row);
                            }
                        }
                        Err(m) => p.issue(first_col, format!("{m} in [{block}] key `{key}`")),
                    }
                } else if let Some(r) = key.strip_prefix('D') {
                    match row_index(r, q) {
                        Ok(r) => {
                            if let Some(row) = p.list(&value, q, &format!("[{block}] row {key}")) {
                                draft.rows[r] = Some(row);
                            }
                        }
                        Err(m) => p.issue(first_col, format!("{m} in [{block}] key `{key}`")),
                    }
                } else if let Some(r) = key.strip_prefix('d') {
                    if q != 2 {
                        p.issue(
                            first_col,
                            format!(
                                "rank mismatch: skew rows belong to [su2]; [{block}] takes {}",
                                if q == 3 { "d123" } else { "no skew tensor" }
                            ),
                        );
                        continue;
                    }
                    match row_index(r, q) {
                        Ok(r) => {
                            if let Some(row) = p.list(&value, q, &format!("[{block}] row {key}")) {
                                draft.skew_rows[r] = Some(row);
                            }
                        }
                        Err(m) => p.issue(first_col, format!("{m} in [{block}] key `{key}`")),
                    }
                } else {
                    p.issue(first_col, format!("unknown key `{key}` in [{block}]"));
                }
            }
            Section::Gauge(q) => {
                let draft = gauges[q - 1].as_mut().expect("opened with its header");
                let block = block_name(q);
                if q == 1 {
                    if key == "phi" {
                        draft.phi = p.expr(&value);
                    } else {
                        p.issue(
                            first_col,
                            format!("unknown key `{key}` in [gauge.u1]; expected phi"),
                        );
                    }
                    continue;
                }
                let Some(r) = key.strip_prefix('S') else {
                    p.issue(first_col, format!("unknown key `{key}` in [gauge.{block}]"));
                    continue;
                };
                match row_index(r, q) {
                    Ok(r) => {
                        if let Some(row) = p.list(&value, q, &format!("[gauge.{block}] row {key}"))
                        {
                            draft.rows[r] = Some(row);
                        }
                    }
                    Err(m) => p.issue(first_col, format!("{m} in [gauge.{block}] key `{key}`")),
                }
            }
        }
    }

    // completeness
    let mut metric_full: [[ScalarExpr; DIM]; DIM] =
        std::array::from_fn(|_| std::array::from_fn(|_| ScalarExpr::zero()));
    match metric_line {
        None => {
            p.line = text.lines().count().max(1);
            p.issue(1, "missing [metric] section");
        }
        Some(line) => {
            p.line = line;
            for i in 0..DIM {
                let given = seen
                    .iter()
                    .any(|(s, k)| *s == Section::Metric && *k == format!("g{i}{i}"));
                // a present but malformed entry has already been reported
                if metric[i][i].is_none() && !given {
                    p.issue(1, format!("[metric] is missing g{i}{i}"));
                }
                for j in i..DIM {
                    let e = metric[i][j].clone().unwrap_or_else(ScalarExpr::zero);
                    metric_full[i][j] = e.clone();
                    metric_full[j][i] = e;
                }
            }
        }
    }

    let mut bundle_specs = Vec::new();
    for (slot, draft) in bundles.into_iter().enumerate() {
        let Some(d) = draft else { continue };
        let q = slot + 1;
        let block = block_name(q);
        p.line = d.line;
        let missing = |p: &mut Parser, what: String| {
            if !seen
                .iter()
                .any(|(s, k)| *s == Section::Bundle(q) && *k == what)
            {
                p.issue(1, format!("[{block}] is missing {what}"));
            }
        };
        let mut hermitian = Vec::new();
        for (r, row) in d.rows.iter().enumerate() {
            match row {
                Some(row) => hermitian.push(row.clone()),
                None => missing(&mut p, format!("D{}", r + 1)),
            }
        }
        let skew = match q {
            1 => Skew::None,
            2 => {
                let mut rows = Vec::new();
                for (r, row) in d.skew_rows.iter().enumerate() {
                    match row {
                        Some(row) => rows.push(row.clone()),
                        None => missing(&mut p, format!("d{}", r + 1)),
                    }
                }
                Skew::Pair(rows)
            }
            _ => match &d.d123 {
                Some(e) => Skew::Triple(e.clone()),
                None => {
                    missing(&mut p, "d123".into());
                    Skew::None
                }
            },
        };
        let potential = d
            .potential
            .iter()
            .map(|rows| {
                rows.iter()
                    .map(|r| r.clone().unwrap_or_else(|| vec![ScalarExpr::zero(); q]))
                    .collect()
            })
            .collect();
        bundle_specs.push(BundleSpec {
            q,
            hermitian,
            skew,
            potential,
            orthonormal: d.orthonormal,
        });
    }

    let mut gauge_specs = Vec::new();
    for (slot, draft) in gauges.into_iter().enumerate() {
        let Some(g) = draft else { continue };
        let q = slot + 1;
        let block = block_name(q);
        p.line = g.line;
        if !bundle_specs.iter().any(|b| b.q == q) {
            p.issue(
                1,
                format!("rank mismatch: [gauge.{block}] has no [{block}] bundle to act on"),
            );
        }
        if q == 1 {
            match g.phi {
                Some(phi) => gauge_specs.push(GaugeSpec::Phase(phi)),
                None => p.issue(1, "[gauge.u1] is missing phi"),
            }
            continue;
        }
        let mut rows = Vec::new();
        for (r, row) in g.rows.iter().enumerate() {
            let key = format!("S{}", r + 1);
            match row {
                Some(row) => rows.push(row.clone()),
                None if seen
                    .iter()
                    .any(|(s, k)| *s == Section::Gauge(q) && *k == key) => {}
                None => p.issue(1, format!("[gauge.{block}] is missing {key}")),
            }
        }
        gauge_specs.push(GaugeSpec::Matrix(rows));
    }

    if !p.issues.is_empty() {
        return Err(LoadError::Parse(p.issues));
    }
    Ok(ScenarioSpec {
        seed,
        tolerance,
        names,
        bounds,
        samples,
        signature,
        constraints,
        frame,
        metric: metric_full,
        bundles: bundle_specs,
        gauges: gauge_specs,
    })
}
