//! The shipped identity corpus: loading, rendering and batch verification.

mod format;

use std::collections::BTreeMap;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::classifier::{classify, Class};
use crate::dsl::{parse_identity, ClaimedClass, DslError, Identity};
use crate::evaluator::{check_identity, CheckStatus, Sweep};
use crate::prover::{prove, summarize, ProofStatus};

pub use format::{load, parse_params, render, render_params, MAGIC};

/// Text of the corpus bundled with the library.
pub const SHIPPED: &str = include_str!("../../data/corpus.fibcat");

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CatalogError {
    #[error("line {line}: {msg}")]
    Format { line: usize, msg: String },
    #[error("entry `{id}` has no `{field}` field")]
    MissingField { id: String, field: String },
    #[error("entry `{id}`: {source}")]
    Parse {
        id: String,
        #[source]
        source: DslError,
    },
    #[error("duplicate entry id `{0}`")]
    DuplicateId(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CatalogEntry {
    /// Identity text as written in the catalog.
    pub eq: String,
    /// Condition text as written in the catalog.
    pub cond: String,
    /// Parsed identity; its `meta` carries id, year, authors and placement.
    pub identity: Identity,
}

impl CatalogEntry {
    pub fn id(&self) -> &str {
        &self.identity.meta.id
    }

    /// Entry whose text fields are the canonical rendering of `identity`.
    pub fn from_identity(identity: Identity) -> CatalogEntry {
        CatalogEntry {
            eq: crate::dsl::render_sides(&identity),
            cond: crate::dsl::render_conditions(&identity.conditions),
            identity,
        }
    }

    pub fn claimed_class(&self) -> ClaimedClass {
        self.identity.meta.claimed_class.unwrap_or(ClaimedClass::Warmup)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Catalog {
    /// Leading comment lines, kept verbatim.
    pub header: Vec<String>,
    /// Labels deliberately left out, with the reason, from `# exclude:` lines.
    pub exclusions: Vec<String>,
    pub entries: Vec<CatalogEntry>,
}

impl Catalog {
    /// The bundled corpus.
    pub fn shipped() -> Catalog {
        load(SHIPPED).expect("bundled corpus is well-formed")
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&CatalogEntry> {
        self.entries.iter().find(|e| e.id() == id)
    }

    pub fn render(&self) -> String {
        render(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Numeric,
    Symbolic,
    Both,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "numeric" => Ok(Mode::Numeric),
            "symbolic" => Ok(Mode::Symbolic),
            "both" => Ok(Mode::Both),
            other => Err(format!("unknown mode `{other}` (numeric, symbolic, both)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NumericResult {
    /// `AllEqual`, `Counterexample` or `Error`.
    pub status: String,
    pub assignments: u64,
    pub counterexample: Option<BTreeMap<String, i64>>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SymbolicResult {
    /// Worst status over all instances: `Proven`, `VerifiedUpTo`, `Falsified`
    /// or `Error`.
    pub status: String,
    pub method: Option<String>,
    pub instances: usize,
    pub counterexample: Option<BTreeMap<String, i64>>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EntryReport {
    pub id: String,
    pub paper_tag: String,
    pub numeric: Option<NumericResult>,
    pub symbolic: Option<SymbolicResult>,
    pub millis: u128,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BatchReport {
    pub mode: Mode,
    pub entries: Vec<EntryReport>,
}

impl BatchReport {
    /// Entry counts keyed by `numeric:<status>` and `symbolic:<status>`.
    pub fn counts(&self) -> BTreeMap<String, usize> {
        let mut out = BTreeMap::new();
        for e in &self.entries {
            if let Some(n) = &e.numeric {
                *out.entry(format!("numeric:{}", n.status)).or_insert(0) += 1;
            }
            if let Some(s) = &e.symbolic {
                *out.entry(format!("symbolic:{}", s.status)).or_insert(0) += 1;
            }
        }
        out
    }

    /// True when nothing was falsified and nothing failed to evaluate.
    pub fn ok(&self) -> bool {
        self.entries.iter().all(|e| {
            e.numeric.as_ref().map_or(true, |n| n.status == "AllEqual")
                && e.symbolic
                    .as_ref()
                    .map_or(true, |s| s.status != "Falsified" && s.status != "Error")
        })
    }
}

fn numeric(id: &Identity, sweep: &Sweep) -> NumericResult {
    match check_identity(id, sweep) {
        Ok(r) => {
            let (status, counterexample) = match r.status {
                CheckStatus::AllEqual => ("AllEqual", None),
                CheckStatus::CounterexampleAt { assignment, .. } => {
                    ("Counterexample", Some(assignment.into_iter().collect()))
                }
            };
            NumericResult {
                status: status.to_string(),
                assignments: r.assignments,
                counterexample,
                error: None,
            }
        }
        Err(e) => NumericResult {
            status: "Error".to_string(),
            assignments: 0,
            counterexample: None,
            error: Some(e.to_string()),
        },
    }
}

fn symbolic(id: &Identity) -> SymbolicResult {
    match prove(id) {
        Ok(outcomes) => {
            let (status, method) = summarize(&outcomes)
                .map(|(s, m)| (s.name().to_string(), Some(m.name().to_string())))
                .unwrap_or(("Proven".to_string(), None));
            let counterexample = outcomes.iter().find_map(|o| match &o.status {
                ProofStatus::Falsified { assignment } => Some(
                    o.bindings
                        .iter()
                        .chain(assignment.iter())
                        .cloned()
                        .collect(),
                ),
                _ => None,
            });
            SymbolicResult {
                status,
                method,
                instances: outcomes.len(),
                counterexample,
                error: None,
            }
        }
        Err(e) => SymbolicResult {
            status: "Error".to_string(),
            method: None,
            instances: 0,
            counterexample: None,
            error: Some(e.to_string()),
        },
    }
}

/// Verify every entry; entries are processed concurrently and reported in
/// catalog order. Failures are recorded per entry, never propagated.
pub fn verify_all(c: &Catalog, mode: Mode) -> BatchReport {
    verify_all_with(c, mode, &Sweep::default())
}

pub fn verify_all_with(c: &Catalog, mode: Mode, sweep: &Sweep) -> BatchReport {
    let entries = c
        .entries
        .par_iter()
        .map(|e| {
            let started = Instant::now();
            let id = &e.identity;
            let numeric = matches!(mode, Mode::Numeric | Mode::Both).then(|| numeric(id, sweep));
            let symbolic = matches!(mode, Mode::Symbolic | Mode::Both).then(|| symbolic(id));
            EntryReport {
                id: e.id().to_string(),
                paper_tag: id.meta.paper_tag.clone(),
                numeric,
                symbolic,
                millis: started.elapsed().as_millis(),
            }
        })
        .collect();
    BatchReport { mode, entries }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassMismatch {
    pub id: String,
    pub claimed: ClaimedClass,
    pub verdict: Class,
}

/// Entries whose stated placement disagrees with the classifier.
pub fn class_mismatches(c: &Catalog) -> Vec<ClassMismatch> {
    c.entries
        .iter()
        .filter_map(|e| {
            let verdict = classify(&e.identity);
            let claimed = e.claimed_class();
            (!verdict.agrees_with(claimed)).then(|| ClassMismatch {
                id: e.id().to_string(),
                claimed,
                verdict,
            })
        })
        .collect()
}

/// Whether text is in catalog format rather than a plain identity list.
pub fn is_catalog_text(text: &str) -> bool {
    text.lines()
        .map(str::trim)
        .any(|l| l == "[identity]" || l.starts_with("# fiblab-catalog"))
}

/// Split an optional `slug:` label off an identity line.
fn split_label(line: &str) -> (Option<&str>, &str) {
    if let Some((label, rest)) = line.split_once(':') {
        let label = label.trim();
        let is_slug = !label.is_empty()
            && label
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_');
        if is_slug {
            return (Some(label), rest);
        }
    }
    (None, line)
}

/// Identities from either a catalog or a plain list with one identity per
/// line (`[label:] identity [; conditions]`, `#` comments). Unlabelled
/// lines get the id `line-<number>`.
pub fn load_identities(text: &str) -> Result<Vec<Identity>, CatalogError> {
    if is_catalog_text(text) {
        return Ok(load(text)?.entries.into_iter().map(|e| e.identity).collect());
    }
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let (label, body) = split_label(t);
        let id = label.map_or_else(|| format!("line-{}", i + 1), str::to_string);
        let mut identity = parse_identity(body).map_err(|e| CatalogError::Parse {
            id: id.clone(),
            source: relocate(e, i + 1),
        })?;
        if !seen.insert(id.clone()) {
            return Err(CatalogError::DuplicateId(id));
        }
        identity.meta.id = id;
        out.push(identity);
    }
    Ok(out)
}

fn relocate(e: DslError, line: usize) -> DslError {
    match e {
        DslError::Syntax { col, msg, .. } => DslError::Syntax { line, col, msg },
        DslError::UnboundVariable { name, col, .. } => DslError::UnboundVariable { name, line, col },
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO: &str = "# fiblab-catalog v1
# exclude: X: not an identity

[identity]
id = a
eq = \"F[n+1] = F[n] + F[n-1]\"
cond = \"n >= 1\"
year = 1202
authors = \"Someone \\\"Quoted\\\"\"
paper_tag = \"tag a\"
class = warmup

[identity]
id = b
eq = \"F[m]^k*F[n] = F[m]^k*F[n]\"
cond = \"n >= 0\"
params = \"k:0..2, m:1..3\"
class = general
rediscovered = \"X 1900; Y 1901\"
";

    #[test]
    fn empty_text_is_empty_catalog() {
        let c = load("").unwrap();
        assert!(c.is_empty());
        assert_eq!(render(&c), "");
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let c = load(TWO).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.exclusions, vec!["X: not an identity".to_string()]);
        assert_eq!(c.entries[0].identity.meta.authors, "Someone \"Quoted\"");
        assert_eq!(c.entries[1].identity.params.len(), 2);
        assert_eq!(c.entries[1].identity.meta.rediscovered, vec!["X 1900", "Y 1901"]);
        assert_eq!(render(&c), TWO);
        assert_eq!(render(&load(&render(&c)).unwrap()), TWO);
    }

    #[test]
    fn duplicate_ids_are_named() {
        let text = format!("{TWO}\n[identity]\nid = a\neq = \"F[n] = F[n]\"\nclass = warmup\n");
        assert_eq!(load(&text), Err(CatalogError::DuplicateId("a".to_string())));
    }

    #[test]
    fn parse_errors_carry_id_and_file_line() {
        let text = "[identity]\nid = broken\nclass = warmup\neq = \"F[n] = F[n\"\n";
        match load(text) {
            Err(CatalogError::Parse { id, source: DslError::Syntax { line, .. } }) => {
                assert_eq!(id, "broken");
                assert_eq!(line, 4);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_keys_and_bad_params_are_rejected() {
        assert!(matches!(
            load("[identity]\nid = a\ncolour = red\n"),
            Err(CatalogError::Format { line: 3, .. })
        ));
        assert!(parse_params("k:1-5", 1).is_err());
        assert_eq!(
            render_params(&parse_params("k:-1..5,m:0..0", 1).unwrap()),
            "k:-1..5, m:0..0"
        );
    }

    #[test]
    fn corrupted_row_is_isolated() {
        let text = TWO.replace("F[n] + F[n-1]", "F[n] + F[n-2]");
        let c = load(&text).unwrap();
        let r = verify_all_with(&c, Mode::Both, &Sweep::with_len(40));
        assert_eq!(r.entries[0].numeric.as_ref().unwrap().status, "Counterexample");
        assert_eq!(r.entries[0].symbolic.as_ref().unwrap().status, "Falsified");
        assert_eq!(r.entries[1].numeric.as_ref().unwrap().status, "AllEqual");
        assert_eq!(r.entries[1].symbolic.as_ref().unwrap().status, "Proven");
        assert!(!r.ok());
    }

    #[test]
    fn shipped_corpus_loads_and_renders_stably() {
        let c = Catalog::shipped();
        assert!(c.len() >= 41);
        assert_eq!(c.render(), SHIPPED);
        assert_eq!(c.exclusions.len(), 3);
    }

    #[test]
    fn shipped_corpus_covers_a_contiguous_label_range() {
        let c = Catalog::shipped();
        let number = |s: &str| -> Option<u32> {
            let start = s.find('(')? + 1;
            let digits: String = s[start..].chars().take_while(char::is_ascii_digit).collect();
            digits.parse().ok()
        };
        let mut seen: Vec<u32> = c
            .entries
            .iter()
            .filter_map(|e| number(&e.identity.meta.paper_tag))
            .chain(c.exclusions.iter().filter_map(|x| number(x)))
            .collect();
        seen.sort_unstable();
        seen.dedup();
        let (lo, hi) = (seen[0], *seen.last().unwrap());
        assert_eq!(seen, (lo..=hi).collect::<Vec<_>>());
    }

    #[test]
    fn shipped_tags_and_ids_are_unique() {
        let c = Catalog::shipped();
        let tags: std::collections::BTreeSet<_> =
            c.entries.iter().map(|e| e.identity.meta.paper_tag.as_str()).collect();
        assert_eq!(tags.len(), c.len());
    }

    #[test]
    fn only_the_alternating_cube_chain_disagrees_with_its_placement() {
        let m = class_mismatches(&Catalog::shipped());
        assert_eq!(m.len(), 1, "{m:?}");
        assert_eq!(m[0].id, "zeitlin-alternating-cubes");
        assert_eq!(m[0].verdict, Class::NonHomogeneousCubic);
    }

    #[test]
    fn plain_identity_list() {
        let ids = load_identities(
            "# warm-up\ncassini: F[n+1]*F[n-1] - F[n]^2 = (-1)^n\n\nF[n+2] = F[n+1] + F[n] ; n >= 0\n",
        )
        .unwrap();
        assert_eq!(ids.len(), 2);
        assert_eq!(ids[0].id(), "cassini");
        assert_eq!(ids[1].id(), "line-4");
        assert!(load_identities("").unwrap().is_empty());
    }

    #[test]
    fn plain_list_error_reports_line() {
        match load_identities("F[n] = F[n]\nF[n = 1\n") {
            Err(CatalogError::Parse {
                id,
                source: DslError::Syntax { line: 2, .. },
            }) => assert_eq!(id, "line-2"),
            other => panic!("{other:?}"),
        }
    }
}
