//! Text formats: the line-oriented circuit and sweep descriptions, CSV/JSON
//! result emission, and CSV inputs for the fitting commands.
//!
//! Grammar (line-oriented, `#` starts a comment, tokens whitespace-separated,
//! floats accept a `pi` multiplier suffix such as `2pi` or `-0.2pi`):
//!
//! ```text
//! circuit "<name>"
//! split
//! attenuate T=<float>            # optional, at most one
//! phase chi1=<float> chi2=<float> # optional, at most one
//! recombine
//! reference eta=<float>          # optional
//! ```
//!
//! Sweep descriptions are `key=value` tokens (`dchi_from`, `dchi_to`,
//! `steps`, `T1`, `T2`, `s1`, `s2`, `C`, `compensated`, `output`); unspecified
//! keys take the defaults of the reference experiment. All emitted floats are
//! rounded to 9 significant digits so CSV and JSON outputs cross-check
//! byte-exactly.

use std::fmt;
use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::fringe::{Interferogram, SweepRow};
use crate::state::{Element, PhaseDecomposition};

/// Exact column header of sweep CSV output.
pub const SWEEP_CSV_HEADER: &str =
    "dchi,phi_ideal,phi_damped,phi_dyn_residual,phi_geometric,omega,amplitude";

/// Exact column header of interferogram CSV output.
pub const FRINGES_CSV_HEADER: &str = "eta,counts";

/// Exact column header of phase-point CSV input for the visibility fit.
pub const POINTS_CSV_HEADER: &str = "dchi,phase";

// ---------------------------------------------------------------------------
// Number formatting and angle parsing
// ---------------------------------------------------------------------------

/// Format a float with 9 significant digits, trailing zeros trimmed.
pub fn sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-4..=8).contains(&exp) {
        return format!("{x:.8e}");
    }
    let decimals = (8 - exp).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Parse a float token, accepting a `pi` multiplier suffix (`2pi`, `-0.2pi`,
/// bare `pi`/`-pi`).
pub fn parse_angle(token: &str) -> std::result::Result<f64, String> {
    let t = token.trim();
    let value = if let Some(prefix) = t.strip_suffix("pi") {
        let mult = match prefix {
            "" | "+" => 1.0,
            "-" => -1.0,
            _ => prefix
                .parse::<f64>()
                .map_err(|_| format!("invalid number `{token}`"))?,
        };
        mult * PI
    } else {
        t.parse::<f64>()
            .map_err(|_| format!("invalid number `{token}`"))?
    };
    if !value.is_finite() {
        return Err(format!("invalid number `{token}`"));
    }
    Ok(value)
}

// ---------------------------------------------------------------------------
// Parse errors
// ---------------------------------------------------------------------------

/// A positioned parse failure; `line` and `column` are 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub snippet: String,
}

impl ParseError {
    fn new(line: usize, column: usize, message: impl Into<String>, snippet: &str) -> Self {
        Self {
            line,
            column,
            message: message.into(),
            snippet: snippet.to_string(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "line {}, column {}: {}\n  | {}",
            self.line, self.column, self.message, self.snippet
        )
    }
}

impl std::error::Error for ParseError {}

// ---------------------------------------------------------------------------
// Tokenizing
// ---------------------------------------------------------------------------

/// Cut a line at the first `#` that is not inside double quotes.
fn strip_comment(line: &str) -> &str {
    let mut in_quotes = false;
    for (i, ch) in line.char_indices() {
        match ch {
            '"' => in_quotes = !in_quotes,
            '#' if !in_quotes => return &line[..i],
            _ => {}
        }
    }
    line
}

/// Whitespace-separated tokens with their 1-based column positions.
fn tokenize(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for (i, ch) in line.char_indices().chain(std::iter::once((line.len(), ' '))) {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((s + 1, &line[s..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    out
}

fn split_kv(token: &str) -> Option<(&str, &str)> {
    token.split_once('=').filter(|(k, v)| !k.is_empty() && !v.is_empty())
}

// ---------------------------------------------------------------------------
// Circuit descriptions
// ---------------------------------------------------------------------------

/// A validated circuit: `split`, optional attenuator and phase shifter,
/// `recombine`, with an optional reference-phase offset.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitSpec {
    pub name: String,
    pub elements: Vec<Element>,
    pub reference_eta: f64,
}

impl CircuitSpec {
    /// Transmissivity of the attenuator, 1 when absent.
    pub fn transmissivity(&self) -> f64 {
        self.elements
            .iter()
            .find_map(|e| match e {
                Element::Attenuate { transmissivity } => Some(*transmissivity),
                _ => None,
            })
            .unwrap_or(1.0)
    }

    /// Phase-shifter settings, (0, 0) when absent.
    pub fn shifts(&self) -> (f64, f64) {
        self.elements
            .iter()
            .find_map(|e| match e {
                Element::PhaseShift { chi1, chi2 } => Some((*chi1, *chi2)),
                _ => None,
            })
            .unwrap_or((0.0, 0.0))
    }
}

/// Parse a circuit description.
pub fn parse_circuit(source: &str) -> std::result::Result<CircuitSpec, ParseError> {
    let lines: Vec<&str> = source.lines().collect();
    let mut name: Option<String> = None;
    let mut elements: Vec<Element> = Vec::new();
    let mut reference_eta = 0.0;
    let mut seen_reference = false;
    let mut last_line = (1usize, "");

    for (idx, raw) in lines.iter().enumerate() {
        let line_no = idx + 1;
        let content = strip_comment(raw);
        let tokens = tokenize(content);
        if tokens.is_empty() {
            continue;
        }
        last_line = (line_no, raw);
        let (col, keyword) = tokens[0];
        let err = |c: usize, msg: String| ParseError::new(line_no, c, msg, raw);

        if name.is_none() {
            if keyword != "circuit" {
                return Err(err(col, "missing circuit header".into()));
            }
            let rest = content[col - 1 + "circuit".len()..].trim();
            let inner = rest
                .strip_prefix('"')
                .and_then(|r| r.strip_suffix('"'))
                .filter(|r| !r.contains('"'));
            match inner {
                Some(n) if !n.is_empty() => name = Some(n.to_string()),
                _ => return Err(err(col, "circuit name must be a non-empty quoted string".into())),
            }
            continue;
        }

        let has_split = elements.first().is_some_and(|e| matches!(e, Element::SplitToQ));
        let has_recombine = elements.iter().any(|e| matches!(e, Element::RecombineQ));
        match keyword {
            "circuit" => return Err(err(col, "duplicate circuit header".into())),
            "split" => {
                if has_split {
                    return Err(err(col, "duplicate `split`".into()));
                }
                if tokens.len() > 1 {
                    return Err(err(tokens[1].0, format!("unexpected token `{}`", tokens[1].1)));
                }
                elements.push(Element::SplitToQ);
            }
            "attenuate" | "phase" => {
                if !has_split {
                    return Err(err(col, "circuit must begin with `split`".into()));
                }
                if has_recombine {
                    return Err(err(col, format!("`{keyword}` after `recombine`")));
                }
                if keyword == "attenuate" {
                    if elements.iter().any(|e| matches!(e, Element::Attenuate { .. })) {
                        return Err(err(col, "duplicate `attenuate`".into()));
                    }
                    let (vcol, t) = expect_keys(&tokens[1..], &["T"], line_no, raw)?[0];
                    if !(0.0..=1.0).contains(&t) {
                        return Err(err(vcol, "T out of range [0,1]".into()));
                    }
                    elements.push(Element::Attenuate { transmissivity: t });
                } else {
                    if elements.iter().any(|e| matches!(e, Element::PhaseShift { .. })) {
                        return Err(err(col, "duplicate `phase`".into()));
                    }
                    let vals = expect_keys(&tokens[1..], &["chi1", "chi2"], line_no, raw)?;
                    elements.push(Element::PhaseShift { chi1: vals[0].1, chi2: vals[1].1 });
                }
            }
            "recombine" => {
                if !has_split {
                    return Err(err(col, "circuit must begin with `split`".into()));
                }
                if has_recombine {
                    return Err(err(col, "duplicate `recombine`".into()));
                }
                if tokens.len() > 1 {
                    return Err(err(tokens[1].0, format!("unexpected token `{}`", tokens[1].1)));
                }
                elements.push(Element::RecombineQ);
            }
            "reference" => {
                if !has_recombine {
                    return Err(err(col, "`reference` must follow `recombine`".into()));
                }
                if seen_reference {
                    return Err(err(col, "duplicate `reference`".into()));
                }
                reference_eta = expect_keys(&tokens[1..], &["eta"], line_no, raw)?[0].1;
                seen_reference = true;
            }
            other => return Err(err(col, format!("unknown keyword `{other}`"))),
        }
    }

    let Some(name) = name else {
        return Err(ParseError::new(1, 1, "missing circuit header", ""));
    };
    if !elements.first().is_some_and(|e| matches!(e, Element::SplitToQ)) {
        return Err(ParseError::new(
            last_line.0,
            1,
            "missing required element `split`",
            last_line.1,
        ));
    }
    if !elements.last().is_some_and(|e| matches!(e, Element::RecombineQ)) {
        return Err(ParseError::new(
            last_line.0,
            1,
            "missing required element `recombine`",
            last_line.1,
        ));
    }
    Ok(CircuitSpec { name, elements, reference_eta })
}

/// Parse `key=value` tokens against an expected key list (in order, all
/// required); returns (value column, value) per key.
fn expect_keys(
    tokens: &[(usize, &str)],
    keys: &[&str],
    line_no: usize,
    raw: &str,
) -> std::result::Result<Vec<(usize, f64)>, ParseError> {
    if tokens.len() != keys.len() {
        return Err(ParseError::new(
            line_no,
            tokens.first().map_or(1, |t| t.0),
            format!("expected exactly {}", keys.join(", ")),
            raw,
        ));
    }
    let mut out = vec![None; keys.len()];
    for &(col, tok) in tokens {
        let Some((k, v)) = split_kv(tok) else {
            return Err(ParseError::new(line_no, col, format!("expected key=value, got `{tok}`"), raw));
        };
        let Some(slot) = keys.iter().position(|&key| key == k) else {
            return Err(ParseError::new(line_no, col, format!("unknown key `{k}`"), raw));
        };
        if out[slot].is_some() {
            return Err(ParseError::new(line_no, col, format!("duplicate key `{k}`"), raw));
        }
        let value = parse_angle(v).map_err(|m| ParseError::new(line_no, col, m, raw))?;
        out[slot] = Some((col, value));
    }
    Ok(out.into_iter().map(|v| v.unwrap()).collect())
}

/// Render a circuit in canonical form: one directive per line, floats at
/// 9 significant digits, `pi` literals expanded.
pub fn render_circuit(spec: &CircuitSpec) -> String {
    let mut out = format!("circuit \"{}\"\n", spec.name);
    for e in &spec.elements {
        match e {
            Element::SplitToQ => out.push_str("split\n"),
            Element::Attenuate { transmissivity } => {
                out.push_str(&format!("attenuate T={}\n", sig9(*transmissivity)));
            }
            Element::PhaseShift { chi1, chi2 } => {
                out.push_str(&format!("phase chi1={} chi2={}\n", sig9(*chi1), sig9(*chi2)));
            }
            Element::RecombineQ => out.push_str("recombine\n"),
        }
    }
    out.push_str(&format!("reference eta={}\n", sig9(spec.reference_eta)));
    out
}

// ---------------------------------------------------------------------------
// Sweep configurations
// ---------------------------------------------------------------------------

/// Sweep parameters; defaults mirror the reference experiment
/// (T1 = 1, T2 = 0.120, s1 = 0.5/4.6, C = 0.57, dchi from −0.2π to 3.0π in
/// 160 steps).
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub dchi_from: f64,
    pub dchi_to: f64,
    pub steps: usize,
    pub t1: f64,
    pub t2: f64,
    pub s1: f64,
    pub s2: f64,
    pub c: f64,
    pub compensated: bool,
    pub output_path: String,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            dchi_from: -0.2 * PI,
            dchi_to: 3.0 * PI,
            steps: 160,
            t1: 1.0,
            t2: 0.120,
            s1: 0.5 / 4.6,
            s2: 4.1 / 4.6,
            c: 0.57,
            compensated: true,
            output_path: String::new(),
        }
    }
}

impl SweepConfig {
    /// The `dchi` grid: `steps` points, half-open `[dchi_from, dchi_to)`,
    /// spacing `(dchi_to - dchi_from)/steps`.
    pub fn grid(&self) -> Vec<f64> {
        let step = (self.dchi_to - self.dchi_from) / self.steps as f64;
        (0..self.steps).map(|i| self.dchi_from + i as f64 * step).collect()
    }
}

/// Parse a sweep description; unspecified keys keep their defaults.
pub fn parse_sweep(source: &str) -> std::result::Result<SweepConfig, ParseError> {
    let mut cfg = SweepConfig::default();
    let mut seen: Vec<String> = Vec::new();
    let mut s2_pos: Option<(usize, usize, String)> = None;
    let mut given_s1: Option<f64> = None;
    let mut given_s2: Option<f64> = None;

    for (idx, raw) in source.lines().enumerate() {
        let line_no = idx + 1;
        let content = strip_comment(raw);
        for (col, tok) in tokenize(content) {
            let err = |msg: String| ParseError::new(line_no, col, msg, raw);
            let Some((k, v)) = split_kv(tok) else {
                return Err(err(format!("expected key=value, got `{tok}`")));
            };
            if seen.iter().any(|s| s == k) {
                return Err(err(format!("duplicate key `{k}`")));
            }
            seen.push(k.to_string());
            let num = || parse_angle(v).map_err(&err);
            match k {
                "dchi_from" => cfg.dchi_from = num()?,
                "dchi_to" => cfg.dchi_to = num()?,
                "steps" => {
                    let n: usize = v
                        .parse()
                        .map_err(|_| err(format!("invalid step count `{v}`")))?;
                    if n < 2 {
                        return Err(err("steps must be at least 2".into()));
                    }
                    cfg.steps = n;
                }
                "T1" => {
                    cfg.t1 = num()?;
                    if !(cfg.t1 > 0.0 && cfg.t1 <= 1.0) {
                        return Err(err("T1 out of range (0,1]".into()));
                    }
                }
                "T2" => {
                    cfg.t2 = num()?;
                    if !(cfg.t2 > 0.0 && cfg.t2 <= 1.0) {
                        return Err(err("T2 out of range (0,1]".into()));
                    }
                }
                "s1" => given_s1 = Some(num()?),
                "s2" => {
                    given_s2 = Some(num()?);
                    s2_pos = Some((line_no, col, raw.to_string()));
                }
                "C" => {
                    cfg.c = num()?;
                    if !(0.0..=1.0).contains(&cfg.c) {
                        return Err(err("C out of range [0,1]".into()));
                    }
                }
                "compensated" => {
                    cfg.compensated = match v {
                        "true" => true,
                        "false" => false,
                        _ => return Err(err(format!("expected true or false, got `{v}`"))),
                    };
                }
                "output" => cfg.output_path = v.to_string(),
                other => return Err(err(format!("unknown key `{other}`"))),
            }
        }
    }

    match (given_s1, given_s2) {
        (Some(s1), Some(s2)) => {
            if (s1 + s2 - 1.0).abs() > 1e-9 {
                let (l, c, snip) = s2_pos.unwrap();
                return Err(ParseError::new(l, c, "s1+s2 must equal 1", &snip));
            }
            cfg.s1 = s1;
            cfg.s2 = s2;
        }
        (Some(s1), None) => {
            cfg.s1 = s1;
            cfg.s2 = 1.0 - s1;
        }
        (None, Some(s2)) => {
            cfg.s1 = 1.0 - s2;
            cfg.s2 = s2;
        }
        (None, None) => {}
    }

    if cfg.dchi_from >= cfg.dchi_to {
        return Err(ParseError::new(
            1,
            1,
            "dchi_from must be less than dchi_to",
            source.lines().next().unwrap_or(""),
        ));
    }
    Ok(cfg)
}

/// Render a sweep configuration in canonical form.
pub fn render_sweep(cfg: &SweepConfig) -> String {
    let mut out = String::new();
    out.push_str(&format!("dchi_from={}\n", sig9(cfg.dchi_from)));
    out.push_str(&format!("dchi_to={}\n", sig9(cfg.dchi_to)));
    out.push_str(&format!("steps={}\n", cfg.steps));
    out.push_str(&format!("T1={}\n", sig9(cfg.t1)));
    out.push_str(&format!("T2={}\n", sig9(cfg.t2)));
    out.push_str(&format!("s1={}\n", sig9(cfg.s1)));
    out.push_str(&format!("s2={}\n", sig9(cfg.s2)));
    out.push_str(&format!("C={}\n", sig9(cfg.c)));
    out.push_str(&format!("compensated={}\n", cfg.compensated));
    if !cfg.output_path.is_empty() {
        out.push_str(&format!("output={}\n", cfg.output_path));
    }
    out
}

// ---------------------------------------------------------------------------
// Result emission
// ---------------------------------------------------------------------------

/// Output format selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Anything the toolkit can emit as a table.
#[derive(Debug, Clone)]
pub enum ResultSet {
    Sweep(Vec<SweepRow>),
    Fringes(Interferogram),
    Decompositions(Vec<PhaseDecomposition>),
}

fn json_object(pairs: &[(&str, f64)]) -> String {
    let body: Vec<String> = pairs
        .iter()
        .map(|(k, v)| format!("\"{k}\":{}", sig9(*v)))
        .collect();
    format!("{{{}}}", body.join(","))
}

/// Render a decomposition as a JSON object.
pub fn decomposition_json(d: &PhaseDecomposition) -> String {
    json_object(&[
        ("pancharatnam", d.pancharatnam),
        ("dynamical", d.dynamical),
        ("geometric", d.geometric),
        ("amplitude", d.amplitude),
    ])
}

fn sweep_row_json(r: &SweepRow) -> String {
    json_object(&[
        ("dchi", r.dchi),
        ("phi_ideal", r.phi_ideal),
        ("phi_damped", r.phi_damped),
        ("phi_dyn_residual", r.phi_dyn_residual),
        ("phi_geometric", r.phi_geometric),
        ("omega", r.omega),
        ("amplitude", r.amplitude),
    ])
}

/// Render results in the requested format. CSV headers and number formatting
/// are byte-exact across formats.
pub fn render_results(rows: &ResultSet, format: OutputFormat) -> Result<String> {
    match rows {
        ResultSet::Sweep(rs) => {
            if rs.is_empty() {
                return Err(Error::EmptyRows);
            }
            Ok(match format {
                OutputFormat::Csv => {
                    let mut out = format!("{SWEEP_CSV_HEADER}\n");
                    for r in rs {
                        out.push_str(&format!(
                            "{},{},{},{},{},{},{}\n",
                            sig9(r.dchi),
                            sig9(r.phi_ideal),
                            sig9(r.phi_damped),
                            sig9(r.phi_dyn_residual),
                            sig9(r.phi_geometric),
                            sig9(r.omega),
                            sig9(r.amplitude)
                        ));
                    }
                    out
                }
                OutputFormat::Json => {
                    let body: Vec<String> = rs.iter().map(sweep_row_json).collect();
                    format!("[{}]\n", body.join(","))
                }
            })
        }
        ResultSet::Fringes(ig) => Ok(match format {
            OutputFormat::Csv => {
                let mut out = format!("{FRINGES_CSV_HEADER}\n");
                for (e, c) in ig.eta_values.iter().zip(&ig.counts) {
                    out.push_str(&format!("{},{}\n", sig9(*e), sig9(*c)));
                }
                out
            }
            OutputFormat::Json => {
                let body: Vec<String> = ig
                    .eta_values
                    .iter()
                    .zip(&ig.counts)
                    .map(|(e, c)| json_object(&[("eta", *e), ("counts", *c)]))
                    .collect();
                format!("[{}]\n", body.join(","))
            }
        }),
        ResultSet::Decompositions(ds) => {
            if ds.is_empty() {
                return Err(Error::EmptyRows);
            }
            Ok(match format {
                OutputFormat::Csv => {
                    let mut out = String::from("pancharatnam,dynamical,geometric,amplitude\n");
                    for d in ds {
                        out.push_str(&format!(
                            "{},{},{},{}\n",
                            sig9(d.pancharatnam),
                            sig9(d.dynamical),
                            sig9(d.geometric),
                            sig9(d.amplitude)
                        ));
                    }
                    out
                }
                OutputFormat::Json => {
                    if ds.len() == 1 {
                        format!("{}\n", decomposition_json(&ds[0]))
                    } else {
                        let body: Vec<String> = ds.iter().map(decomposition_json).collect();
                        format!("[{}]\n", body.join(","))
                    }
                }
            })
        }
    }
}

/// Write rendered results to a file, or to stdout when `destination` is None.
pub fn emit_results(
    rows: &ResultSet,
    format: OutputFormat,
    destination: Option<&Path>,
) -> Result<()> {
    let text = render_results(rows, format)?;
    match destination {
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|source| Error::Io { path: "<stdout>".into(), source }),
        Some(path) => std::fs::write(path, text).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        }),
    }
}

// ---------------------------------------------------------------------------
// CSV inputs
// ---------------------------------------------------------------------------

/// Parse a two-column CSV with the given exact header.
pub fn parse_two_column_csv(
    source: &str,
    header: &str,
) -> std::result::Result<Vec<(f64, f64)>, ParseError> {
    let mut rows = Vec::new();
    let mut saw_header = false;
    for (idx, raw) in source.lines().enumerate() {
        let line_no = idx + 1;
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        if !saw_header {
            if line != header {
                return Err(ParseError::new(
                    line_no,
                    1,
                    format!("expected header `{header}`"),
                    raw,
                ));
            }
            saw_header = true;
            continue;
        }
        let Some((a, b)) = line.split_once(',') else {
            return Err(ParseError::new(line_no, 1, "expected two comma-separated values", raw));
        };
        let x = a.trim().parse::<f64>().map_err(|_| {
            ParseError::new(line_no, 1, format!("invalid number `{}`", a.trim()), raw)
        })?;
        let y = b.trim().parse::<f64>().map_err(|_| {
            ParseError::new(line_no, a.len() + 2, format!("invalid number `{}`", b.trim()), raw)
        })?;
        rows.push((x, y));
    }
    if !saw_header {
        return Err(ParseError::new(1, 1, format!("expected header `{header}`"), ""));
    }
    Ok(rows)
}
