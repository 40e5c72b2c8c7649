//! Text formats: code files (one or more documents per file) and search
//! reports.
//!
//! A code document looks like
//!
//! ```text
//! msrcode 1
//! field 3 1
//! params 4 2
//! form symmetric
//! matrix A 2 4
//! 1 0 0 0
//! 0 1 1 0
//! ...
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_rational::Rational64;
use thiserror::Error;

use crate::galois::Field;
use crate::linalg::FieldMatrix;
use crate::model::{
    permutation_cycles, CodeParameters, ModelError, RegeneratingCode, SymmetricSeed,
};
use crate::search::{SearchMode, SearchReport};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("document starting at line {line}: {source}")]
    Invalid { line: usize, source: ModelError },
    #[error("no code document found")]
    Empty,
    #[error("expected a single code document, found {0}")]
    MultipleDocuments(usize),
}

fn syntax(line: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line,
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CodeDocument {
    Symmetric(SymmetricSeed),
    Explicit(RegeneratingCode),
}

impl CodeDocument {
    pub fn params(&self) -> &CodeParameters {
        match self {
            CodeDocument::Symmetric(s) => s.params(),
            CodeDocument::Explicit(c) => c.params(),
        }
    }

    pub fn field(&self) -> &Field {
        match self {
            CodeDocument::Symmetric(s) => s.field(),
            CodeDocument::Explicit(c) => c.field(),
        }
    }

    pub fn to_explicit(&self) -> RegeneratingCode {
        match self {
            CodeDocument::Symmetric(s) => s.expand(),
            CodeDocument::Explicit(c) => c.clone(),
        }
    }

    pub fn form(&self) -> &'static str {
        match self {
            CodeDocument::Symmetric(_) => "symmetric",
            CodeDocument::Explicit(_) => "explicit",
        }
    }

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        let field = self.field();
        writeln!(out, "msrcode {FORMAT_VERSION}").unwrap();
        write!(out, "field {} {}", field.characteristic(), field.degree()).unwrap();
        if field.degree() > 1 {
            for c in field.modulus() {
                write!(out, " {c}").unwrap();
            }
        }
        out.push('\n');
        let p = self.params();
        writeln!(out, "params {} {}", p.n(), p.k()).unwrap();
        writeln!(out, "form {}", self.form()).unwrap();
        match self {
            CodeDocument::Symmetric(s) => {
                write_matrix(&mut out, "A", s.base());
                if let Some(cycles) = permutation_cycles(s.rotation()) {
                    let parts: Vec<String> = cycles.iter().map(|c| c.to_string()).collect();
                    writeln!(out, "# rotation cycle type {}", parts.join("+")).unwrap();
                }
                write_matrix(&mut out, "R", s.rotation());
                for (t, b) in s.b_vectors().iter().enumerate() {
                    write_matrix(&mut out, &format!("B{}", t + 1), b);
                }
            }
            CodeDocument::Explicit(c) => {
                for (i, a) in c.storage_matrices().iter().enumerate() {
                    write_matrix(&mut out, &format!("A{}", i + 1), a);
                }
                for ((i, j), b) in c.transmissions() {
                    write_matrix(&mut out, &format!("B{i}_{j}"), b);
                }
            }
        }
        out
    }
}

fn write_matrix(out: &mut String, name: &str, m: &FieldMatrix) {
    writeln!(out, "matrix {name} {} {}", m.rows(), m.cols()).unwrap();
    for r in 0..m.rows() {
        let row: Vec<String> = m.row(r).iter().map(|v| v.to_string()).collect();
        writeln!(out, "{}", row.join(" ")).unwrap();
    }
}

pub fn serialize_documents(docs: &[CodeDocument]) -> String {
    docs.iter()
        .map(CodeDocument::serialize)
        .collect::<Vec<_>>()
        .join("\n")
}

/// Non-blank lines with comments removed, paired with 1-based line numbers.
fn content_lines(text: &str) -> Vec<(usize, Vec<&str>)> {
    text.lines()
        .enumerate()
        .filter_map(|(idx, raw)| {
            let body = raw.split('#').next().unwrap_or("");
            let tokens: Vec<&str> = body.split_whitespace().collect();
            (!tokens.is_empty()).then_some((idx + 1, tokens))
        })
        .collect()
}

fn parse_num<T: std::str::FromStr>(line: usize, token: &str) -> Result<T, ParseError> {
    token.parse().map_err(|_| {
        syntax(
            line,
            format!("expected a non-negative integer, found `{token}`"),
        )
    })
}

struct Cursor<'a> {
    lines: Vec<(usize, Vec<&'a str>)>,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<&(usize, Vec<&'a str>)> {
        self.lines.get(self.pos)
    }

    fn next(&mut self, what: &str) -> Result<(usize, Vec<&'a str>), ParseError> {
        let last = self.lines.last().map(|l| l.0).unwrap_or(0);
        let item = self
            .lines
            .get(self.pos)
            .cloned()
            .ok_or_else(|| syntax(last, format!("unexpected end of input, expected {what}")))?;
        self.pos += 1;
        Ok(item)
    }

    fn keyword(
        &mut self,
        key: &str,
        args: Option<usize>,
    ) -> Result<(usize, Vec<&'a str>), ParseError> {
        let (line, tokens) = self.next(&format!("`{key}` line"))?;
        if tokens[0] != key {
            return Err(syntax(
                line,
                format!("expected `{key}`, found `{}`", tokens[0]),
            ));
        }
        if let Some(n) = args {
            if tokens.len() != n + 1 {
                return Err(syntax(line, format!("`{key}` takes {n} arguments")));
            }
        }
        Ok((line, tokens[1..].to_vec()))
    }
}

fn parse_field(line: usize, args: &[&str]) -> Result<Field, ParseError> {
    if args.len() < 2 {
        return Err(syntax(line, "`field` needs a characteristic and a degree"));
    }
    let p: u32 = parse_num(line, args[0])?;
    let m: u32 = parse_num(line, args[1])?;
    let modulus = args[2..]
        .iter()
        .map(|t| parse_num::<u8>(line, t))
        .collect::<Result<Vec<_>, _>>()?;
    let modulus = (!modulus.is_empty()).then_some(modulus.as_slice());
    Field::new(p, m, modulus).map_err(|e| syntax(line, e.to_string()))
}

fn parse_matrix(
    cursor: &mut Cursor<'_>,
    field: &Field,
) -> Result<(String, FieldMatrix, usize), ParseError> {
    let (line, args) = cursor.keyword("matrix", Some(3))?;
    let name = args[0].to_string();
    let rows: usize = parse_num(line, args[1])?;
    let cols: usize = parse_num(line, args[2])?;
    let mut entries = Vec::with_capacity(rows);
    for _ in 0..rows {
        let (row_line, tokens) = cursor.next(&format!("row of matrix {name}"))?;
        if tokens.len() != cols {
            return Err(syntax(
                row_line,
                format!(
                    "matrix {name}: expected {cols} entries, found {}",
                    tokens.len()
                ),
            ));
        }
        let row = tokens
            .iter()
            .map(|t| parse_num::<u32>(row_line, t))
            .collect::<Result<Vec<_>, _>>()?;
        if let Some(bad) = row.iter().find(|&&v| !field.contains(v)) {
            return Err(syntax(
                row_line,
                format!("entry {bad} is not an element of {field}"),
            ));
        }
        entries.push(row);
    }
    let matrix = if rows == 0 {
        FieldMatrix::zeros(field, 0, cols)
    } else {
        FieldMatrix::from_rows(field, &entries).map_err(|e| syntax(line, e.to_string()))?
    };
    Ok((name, matrix, line))
}

fn parse_one(cursor: &mut Cursor<'_>) -> Result<CodeDocument, ParseError> {
    let (start, version) = cursor.keyword("msrcode", Some(1))?;
    let v: u32 = parse_num(start, version[0])?;
    if v != FORMAT_VERSION {
        return Err(syntax(start, format!("unsupported format version {v}")));
    }
    let (fline, fargs) = cursor.keyword("field", None)?;
    let field = parse_field(fline, &fargs)?;
    let (pline, pargs) = cursor.keyword("params", Some(2))?;
    let params = CodeParameters::new(parse_num(pline, pargs[0])?, parse_num(pline, pargs[1])?)
        .map_err(|e| syntax(pline, e.to_string()))?;
    let (form_line, form) = cursor.keyword("form", Some(1))?;
    let symmetric = match form[0] {
        "symmetric" => true,
        "explicit" => false,
        other => return Err(syntax(form_line, format!("unknown form `{other}`"))),
    };

    let mut matrices: BTreeMap<String, (FieldMatrix, usize)> = BTreeMap::new();
    while let Some((_, tokens)) = cursor.peek() {
        if tokens[0] == "msrcode" {
            break;
        }
        let (name, m, line) = parse_matrix(cursor, &field)?;
        if matrices.insert(name.clone(), (m, line)).is_some() {
            return Err(syntax(line, format!("duplicate matrix {name}")));
        }
    }
    let mut take = |name: &str| {
        matrices
            .remove(name)
            .map(|(m, _)| m)
            .ok_or_else(|| syntax(start, format!("missing matrix {name}")))
    };
    let n = params.n();
    let invalid = |source| ParseError::Invalid {
        line: start,
        source,
    };
    let doc = if symmetric {
        let base = take("A")?;
        let rotation = take("R")?;
        let bs = (1..n)
            .map(|t| take(&format!("B{t}")))
            .collect::<Result<Vec<_>, _>>()?;
        CodeDocument::Symmetric(
            SymmetricSeed::new(params, field.clone(), base, rotation, bs).map_err(invalid)?,
        )
    } else {
        let storage = (1..=n)
            .map(|i| take(&format!("A{i}")))
            .collect::<Result<Vec<_>, _>>()?;
        let mut transmissions = BTreeMap::new();
        for i in 1..=n {
            for j in (1..=n).filter(|&j| j != i) {
                transmissions.insert((i, j), take(&format!("B{i}_{j}"))?);
            }
        }
        CodeDocument::Explicit(
            RegeneratingCode::new(params, field.clone(), storage, transmissions)
                .map_err(invalid)?,
        )
    };
    if let Some((name, (_, line))) = matrices.into_iter().next() {
        return Err(syntax(
            line,
            format!("unexpected matrix {name} in {} form", doc.form()),
        ));
    }
    Ok(doc)
}

/// Parses every document in a file.
pub fn parse_documents(text: &str) -> Result<Vec<CodeDocument>, ParseError> {
    let mut cursor = Cursor {
        lines: content_lines(text),
        pos: 0,
    };
    let mut docs = Vec::new();
    while cursor.peek().is_some() {
        docs.push(parse_one(&mut cursor)?);
    }
    if docs.is_empty() {
        return Err(ParseError::Empty);
    }
    Ok(docs)
}

/// Parses a file that must hold exactly one document.
pub fn parse_document(text: &str) -> Result<CodeDocument, ParseError> {
    let mut docs = parse_documents(text)?;
    match docs.len() {
        1 => Ok(docs.remove(0)),
        n => Err(ParseError::MultipleDocuments(n)),
    }
}

fn fraction_text(f: Option<Rational64>) -> String {
    match f {
        None => "n/a".into(),
        Some(r) => {
            let pct = 100.0 * *r.numer() as f64 / *r.denom() as f64;
            format!("{r} ({pct:.2}%)")
        }
    }
}

fn report_fields(report: &SearchReport) -> Vec<(&'static str, String)> {
    let c = &report.counts;
    let (mode, seed) = match report.mode {
        SearchMode::Exhaustive => ("exhaustive".to_string(), "none".to_string()),
        SearchMode::Random {
            seed,
            samples,
            y_draws,
        } => (
            format!("random samples={samples} y_draws={y_draws}"),
            seed.to_string(),
        ),
    };
    vec![
        ("n", report.params.n().to_string()),
        ("k", report.params.k().to_string()),
        ("field", report.field.to_string()),
        ("mode", mode),
        ("seed", seed),
        (
            "general_position",
            report.require_general_position.to_string(),
        ),
        ("a_candidates", c.a_candidates.to_string()),
        ("a_independent", c.a_independent.to_string()),
        ("a_recoverable", c.a_recoverable.to_string()),
        ("y_candidates", c.y_candidates.to_string()),
        ("y_blocked", c.y_blocked.to_string()),
        ("zero_nullity_helpers", c.zero_nullity_helpers.to_string()),
        (
            "min_helper_nullity",
            c.min_helper_nullity
                .map_or("none".into(), |v| v.to_string()),
        ),
        ("codes_found", c.codes_found.to_string()),
        ("gp_codes", c.gp_codes.to_string()),
        (
            "independence_fraction",
            fraction_text(report.independence_fraction()),
        ),
        (
            "recovery_fraction",
            fraction_text(report.recovery_fraction()),
        ),
        (
            "a_recovery_fraction",
            fraction_text(report.a_recovery_fraction()),
        ),
        ("elapsed_ms", report.elapsed.as_millis().to_string()),
        ("emitted", report.emitted.len().to_string()),
    ]
}

/// Aligned `key: value` block for humans.
pub fn render_report_text(report: &SearchReport) -> String {
    let fields = report_fields(report);
    let width = fields.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let mut out = String::new();
    for (k, v) in fields {
        writeln!(out, "{k:<width$}  {v}").unwrap();
    }
    out
}

/// `key=value` records, followed by one `code:` section per emitted seed.
pub fn render_report_records(report: &SearchReport) -> String {
    let mut out = String::new();
    for (k, v) in report_fields(report) {
        writeln!(out, "{k}={v}").unwrap();
    }
    for seed in &report.emitted {
        out.push_str("code:\n");
        out.push_str(&CodeDocument::Symmetric(seed.clone()).serialize());
        out.push_str("end\n");
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportRecords {
    pub values: BTreeMap<String, String>,
    pub codes: Vec<CodeDocument>,
}

pub fn parse_report_records(text: &str) -> Result<ReportRecords, ParseError> {
    let mut values = BTreeMap::new();
    let mut codes = Vec::new();
    let mut lines = text.lines().enumerate();
    while let Some((idx, line)) = lines.next() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line == "code:" {
            let mut body = String::new();
            let mut closed = false;
            for (_, inner) in lines.by_ref() {
                if inner.trim() == "end" {
                    closed = true;
                    break;
                }
                body.push_str(inner);
                body.push('\n');
            }
            if !closed {
                return Err(syntax(idx + 1, "unterminated code section"));
            }
            codes.push(parse_document(&body)?);
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| syntax(idx + 1, "expected key=value"))?;
        values.insert(k.to_string(), v.to_string());
    }
    Ok(ReportRecords { values, codes })
}
