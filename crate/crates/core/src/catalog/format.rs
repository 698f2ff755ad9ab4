//! Reader and writer for the plain-text catalog format.
//!
//! ```text
//! # fiblab-catalog v1
//! # exclude: <label>: <reason>
//!
//! [identity]
//! id = <slug>
//! eq = "<identity>"
//! cond = "n >= 1, m >= 1"
//! params = "k:1..5, m:0..3"
//! year = 1953
//! authors = "..."
//! paper_tag = "..."
//! class = homogeneous-cubic|nonhomogeneous-cubic|general|warmup
//! rediscovered = "Name 1963; Name 1965"
//! ```
//!
//! Records are separated by blank lines; `cond`, `params`, `year`,
//! `authors`, `paper_tag` and `rediscovered` are optional.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use super::{Catalog, CatalogEntry, CatalogError};
use crate::dsl::{parse_with_params, ClaimedClass, DslError, Meta, ParamDecl};

pub const MAGIC: &str = "# fiblab-catalog v1";
const EXCLUDE: &str = "# exclude:";

const KEYS: [&str; 9] = [
    "id",
    "eq",
    "cond",
    "params",
    "year",
    "authors",
    "paper_tag",
    "class",
    "rediscovered",
];

#[derive(Default)]
struct Raw {
    line: usize,
    fields: Vec<(String, String, usize)>,
}

impl Raw {
    fn get(&self, key: &str) -> Option<(&str, usize)> {
        self.fields
            .iter()
            .find(|(k, _, _)| k == key)
            .map(|(_, v, l)| (v.as_str(), *l))
    }
}

fn format_err(line: usize, msg: impl Into<String>) -> CatalogError {
    CatalogError::Format {
        line,
        msg: msg.into(),
    }
}

fn unquote(v: &str, line: usize) -> Result<String, CatalogError> {
    let Some(inner) = v.strip_prefix('"') else {
        return Ok(v.to_string());
    };
    let mut out = String::new();
    let mut chars = inner.chars();
    while let Some(c) = chars.next() {
        match c {
            '\\' => match chars.next() {
                Some(e @ ('"' | '\\')) => out.push(e),
                _ => return Err(format_err(line, "bad escape in string")),
            },
            '"' => {
                return if chars.as_str().trim().is_empty() {
                    Ok(out)
                } else {
                    Err(format_err(line, "text after closing quote"))
                };
            }
            c => out.push(c),
        }
    }
    Err(format_err(line, "unterminated string"))
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Parse `"k:1..5, m:0..3"`.
pub fn parse_params(s: &str, line: usize) -> Result<Vec<ParamDecl>, CatalogError> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| {
            let bad = || format_err(line, format!("bad parameter range `{p}`"));
            let (name, range) = p.split_once(':').ok_or_else(bad)?;
            let (lo, hi) = range.split_once("..").ok_or_else(bad)?;
            Ok(ParamDecl {
                name: name.trim().to_string(),
                lo: lo.trim().parse().map_err(|_| bad())?,
                hi: hi.trim().parse().map_err(|_| bad())?,
            })
        })
        .collect()
}

pub fn render_params(params: &[ParamDecl]) -> String {
    params
        .iter()
        .map(|p| format!("{}:{}..{}", p.name, p.lo, p.hi))
        .collect::<Vec<_>>()
        .join(", ")
}

fn shift_location(e: DslError, line: usize) -> DslError {
    match e {
        DslError::Syntax { line: l, col, msg } => DslError::Syntax {
            line: line + l - 1,
            col,
            msg,
        },
        DslError::UnboundVariable { name, line: l, col } => DslError::UnboundVariable {
            name,
            line: line + l - 1,
            col,
        },
        other => other,
    }
}

fn entry(raw: &Raw) -> Result<CatalogEntry, CatalogError> {
    let (id, _) = raw
        .get("id")
        .ok_or_else(|| format_err(raw.line, "record without `id`"))?;
    let missing = |field: &str| CatalogError::MissingField {
        id: id.to_string(),
        field: field.to_string(),
    };
    let (eq, eq_line) = raw.get("eq").ok_or_else(|| missing("eq"))?;
    let (class, class_line) = raw.get("class").ok_or_else(|| missing("class"))?;
    let class: ClaimedClass = class.parse().map_err(|m: String| format_err(class_line, m))?;
    let cond = raw.get("cond").map(|(c, _)| c.to_string()).unwrap_or_default();
    let params = match raw.get("params") {
        Some((p, l)) => parse_params(p, l)?,
        None => Vec::new(),
    };
    let year = match raw.get("year") {
        Some((y, l)) => Some(
            y.parse()
                .map_err(|_| format_err(l, format!("bad year `{y}`")))?,
        ),
        None => None,
    };
    let text = if cond.is_empty() {
        eq.to_string()
    } else {
        format!("{eq} ; {cond}")
    };
    let mut identity = parse_with_params(&text, &params).map_err(|e| CatalogError::Parse {
        id: id.to_string(),
        source: shift_location(e, eq_line),
    })?;
    let rediscovered: Vec<String> = raw
        .get("rediscovered")
        .map(|(r, _)| r.split(';').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect())
        .unwrap_or_default();
    identity.meta = Meta {
        id: id.to_string(),
        year,
        authors: raw.get("authors").map(|(a, _)| a.to_string()).unwrap_or_default(),
        paper_tag: raw.get("paper_tag").map(|(a, _)| a.to_string()).unwrap_or_default(),
        claimed_class: Some(class),
        rediscovered,
    };
    Ok(CatalogEntry {
        eq: eq.to_string(),
        cond,
        identity,
    })
}

/// Parse catalog text. An empty input is an empty catalog.
pub fn load(text: &str) -> Result<Catalog, CatalogError> {
    let mut header = Vec::new();
    let mut records: Vec<Raw> = Vec::new();
    let mut current: Option<Raw> = None;
    for (i, line) in text.lines().enumerate() {
        let n = i + 1;
        let t = line.trim();
        if t.starts_with('#') {
            if records.is_empty() && current.is_none() {
                header.push(t.to_string());
            }
            continue;
        }
        if t.is_empty() {
            records.extend(current.take());
            continue;
        }
        if t == "[identity]" {
            records.extend(current.take());
            current = Some(Raw {
                line: n,
                ..Raw::default()
            });
            continue;
        }
        let rec = current
            .as_mut()
            .ok_or_else(|| format_err(n, "field outside an `[identity]` record"))?;
        let (k, v) = t
            .split_once('=')
            .ok_or_else(|| format_err(n, "expected `key = value`"))?;
        let k = k.trim();
        if !KEYS.contains(&k) {
            return Err(format_err(n, format!("unknown key `{k}`")));
        }
        if rec.get(k).is_some() {
            return Err(format_err(n, format!("repeated key `{k}`")));
        }
        rec.fields.push((k.to_string(), unquote(v.trim(), n)?, n));
    }
    records.extend(current.take());

    if let Some(first) = header.first() {
        if first.starts_with("# fiblab-catalog") && first != MAGIC {
            return Err(format_err(1, format!("unsupported format `{first}`")));
        }
    }
    let exclusions = header
        .iter()
        .filter_map(|h| h.strip_prefix(EXCLUDE))
        .map(|s| s.trim().to_string())
        .collect();

    let mut seen = BTreeSet::new();
    let mut entries = Vec::with_capacity(records.len());
    for raw in &records {
        let e = entry(raw)?;
        if !seen.insert(e.id().to_string()) {
            return Err(CatalogError::DuplicateId(e.id().to_string()));
        }
        entries.push(e);
    }
    Ok(Catalog {
        header,
        exclusions,
        entries,
    })
}

/// Canonical text of a catalog; `load(render(c))` renders identically.
pub fn render(c: &Catalog) -> String {
    let mut out = String::new();
    if c.header.is_empty() && !c.entries.is_empty() {
        out.push_str(MAGIC);
        out.push('\n');
    }
    for h in &c.header {
        out.push_str(h);
        out.push('\n');
    }
    for e in &c.entries {
        let m = &e.identity.meta;
        if !out.is_empty() {
            out.push('\n');
        }
        out.push_str("[identity]\n");
        let _ = writeln!(out, "id = {}", m.id);
        let _ = writeln!(out, "eq = {}", quote(&e.eq));
        if !e.cond.is_empty() {
            let _ = writeln!(out, "cond = {}", quote(&e.cond));
        }
        if !e.identity.params.is_empty() {
            let _ = writeln!(out, "params = {}", quote(&render_params(&e.identity.params)));
        }
        if let Some(y) = m.year {
            let _ = writeln!(out, "year = {y}");
        }
        if !m.authors.is_empty() {
            let _ = writeln!(out, "authors = {}", quote(&m.authors));
        }
        if !m.paper_tag.is_empty() {
            let _ = writeln!(out, "paper_tag = {}", quote(&m.paper_tag));
        }
        if let Some(class) = m.claimed_class {
            let _ = writeln!(out, "class = {class}");
        }
        if !m.rediscovered.is_empty() {
            let _ = writeln!(out, "rediscovered = {}", quote(&m.rediscovered.join("; ")));
        }
    }
    out
}
