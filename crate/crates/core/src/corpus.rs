//! Publication corpus: record types, line-delimited JSON parsing, and the
//! document-type filter applied before any counting.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Inclusive year range an analysis covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub start: i32,
    pub end: i32,
}

impl Window {
    pub fn new(start: i32, end: i32) -> Result<Self, CorpusError> {
        if start > end {
            return Err(CorpusError::InvalidWindow { start, end });
        }
        Ok(Window { start, end })
    }

    pub fn contains(&self, year: i32) -> bool {
        self.start <= year && year <= self.end
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.start, self.end)
    }
}

impl FromStr for Window {
    type Err = CorpusError;

    /// Parses "START-END", e.g. "2006-2010".
    fn from_str(s: &str) -> Result<Self, CorpusError> {
        let bad = || CorpusError::BadWindowSyntax(s.to_string());
        let (a, b) = s.split_once('-').ok_or_else(bad)?;
        let start: i32 = a.trim().parse().map_err(|_| bad())?;
        let end: i32 = b.trim().parse().map_err(|_| bad())?;
        Window::new(start, end)
    }
}

/// Case-folded, whitespace-collapsed form used wherever free-text identity
/// matters: byline-author distinctness and organization names without ids.
pub fn normalize(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

/// True for exactly two uppercase ASCII letters (ISO 3166-1 alpha-2).
pub fn valid_country(code: &str) -> bool {
    code.len() == 2 && code.bytes().all(|b| b.is_ascii_uppercase())
}

/// One institutional address on a publication.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Address {
    #[serde(rename = "org")]
    pub org_name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub org_id: Option<String>,
    pub country: String,
}

impl Address {
    /// Stable organization identity: explicit id when present, otherwise the
    /// normalized name.
    pub fn identity(&self) -> String {
        match &self.org_id {
            Some(id) if !id.is_empty() => id.clone(),
            _ => normalize(&self.org_name),
        }
    }
}

/// One author as printed in the byline, with links into the address list
/// (possibly empty: link unknown).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BylineAuthor {
    pub name: String,
    #[serde(rename = "addr")]
    pub address_idxs: Vec<usize>,
}

/// One bibliographic record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Publication {
    #[serde(rename = "id")]
    pub pub_id: String,
    pub year: i32,
    #[serde(rename = "type")]
    pub doc_type: String,
    pub authors: Vec<BylineAuthor>,
    pub addresses: Vec<Address>,
}

impl Publication {
    /// Distinct byline authors after normalization; exact-duplicate names in
    /// one byline collapse to one author.
    pub fn distinct_author_names(&self) -> BTreeSet<String> {
        self.authors.iter().map(|a| normalize(&a.name)).collect()
    }

    pub fn distinct_author_count(&self) -> usize {
        self.distinct_author_names().len()
    }
}

/// Structural error in a single publication record.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RecordError {
    #[error("malformed record: {0}")]
    Malformed(String),
    #[error("publication {pub_id}: duplicate id")]
    DuplicateId { pub_id: String },
    #[error("publication {pub_id}: no authors")]
    NoAuthors { pub_id: String },
    #[error("publication {pub_id}: address index {idx} out of range ({len} addresses)")]
    AddressIndexOutOfRange { pub_id: String, idx: usize, len: usize },
    #[error("publication {pub_id}: author {author:?} repeats address index {idx}")]
    DuplicateAddressIndex { pub_id: String, author: String, idx: usize },
    #[error("publication {pub_id}: year {year} outside window {window}")]
    YearOutsideWindow { pub_id: String, year: i32, window: Window },
    #[error("publication {pub_id}: empty organization name")]
    EmptyOrgName { pub_id: String },
    #[error("publication {pub_id}: country {country:?} is not a two-letter uppercase code")]
    BadCountry { pub_id: String, country: String },
}

/// A rejected input line: 1-based line number plus the reason.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseIssue {
    pub line: usize,
    pub error: RecordError,
}

impl fmt::Display for ParseIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.error)
    }
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("invalid window: start {start} after end {end}")]
    InvalidWindow { start: i32, end: i32 },
    #[error("window must be START-END, got {0:?}")]
    BadWindowSyntax(String),
    #[error("home country {0:?} is not a two-letter uppercase code")]
    BadHomeCountry(String),
    #[error("document-type allowlist is empty")]
    EmptyAllowlist,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Immutable after construction; iteration follows insertion order.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    publications: Vec<Publication>,
    index: BTreeMap<String, usize>,
    window: Window,
    home_country: String,
}

impl Corpus {
    pub fn new(window: Window, home_country: &str) -> Result<Self, CorpusError> {
        if !valid_country(home_country) {
            return Err(CorpusError::BadHomeCountry(home_country.to_string()));
        }
        Ok(Corpus {
            publications: Vec::new(),
            index: BTreeMap::new(),
            window,
            home_country: home_country.to_string(),
        })
    }

    /// Validates and appends one record.
    pub fn push(&mut self, publication: Publication) -> Result<(), RecordError> {
        validate_publication(&publication, self.window)?;
        if self.index.contains_key(&publication.pub_id) {
            return Err(RecordError::DuplicateId { pub_id: publication.pub_id });
        }
        self.index.insert(publication.pub_id.clone(), self.publications.len());
        self.publications.push(publication);
        Ok(())
    }

    pub fn get(&self, pub_id: &str) -> Option<&Publication> {
        self.index.get(pub_id).map(|&i| &self.publications[i])
    }

    pub fn contains(&self, pub_id: &str) -> bool {
        self.index.contains_key(pub_id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Publication> {
        self.publications.iter()
    }

    pub fn len(&self) -> usize {
        self.publications.len()
    }

    pub fn is_empty(&self) -> bool {
        self.publications.is_empty()
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn home_country(&self) -> &str {
        &self.home_country
    }

    /// One JSON object per line, insertion order, trailing newline.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for publication in &self.publications {
            serde_json::to_writer(&mut out, publication)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

fn validate_publication(publication: &Publication, window: Window) -> Result<(), RecordError> {
    let pub_id = publication.pub_id.clone();
    if publication.authors.is_empty() {
        return Err(RecordError::NoAuthors { pub_id });
    }
    if !window.contains(publication.year) {
        return Err(RecordError::YearOutsideWindow { pub_id, year: publication.year, window });
    }
    for author in &publication.authors {
        let mut seen = BTreeSet::new();
        for &idx in &author.address_idxs {
            if idx >= publication.addresses.len() {
                return Err(RecordError::AddressIndexOutOfRange {
                    pub_id,
                    idx,
                    len: publication.addresses.len(),
                });
            }
            if !seen.insert(idx) {
                return Err(RecordError::DuplicateAddressIndex {
                    pub_id,
                    author: author.name.clone(),
                    idx,
                });
            }
        }
    }
    for address in &publication.addresses {
        if address.org_name.trim().is_empty() {
            return Err(RecordError::EmptyOrgName { pub_id });
        }
        if !valid_country(&address.country) {
            return Err(RecordError::BadCountry { pub_id, country: address.country.clone() });
        }
    }
    Ok(())
}

/// Parses line-delimited publication records. Every non-blank line either
/// becomes a publication or produces exactly one issue; blank lines are
/// skipped.
pub fn parse_corpus<R: BufRead>(
    input: R,
    window: Window,
    home_country: &str,
) -> Result<(Corpus, Vec<ParseIssue>), CorpusError> {
    let mut corpus = Corpus::new(window, home_country)?;
    let mut issues = Vec::new();
    for (line_no, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: Publication = match serde_json::from_str(&line) {
            Ok(r) => r,
            Err(e) => {
                issues.push(ParseIssue { line: line_no + 1, error: RecordError::Malformed(e.to_string()) });
                continue;
            }
        };
        if let Err(error) = corpus.push(record) {
            issues.push(ParseIssue { line: line_no + 1, error });
        }
    }
    Ok((corpus, issues))
}

/// Returns the corpus restricted to the allowlisted document types, plus the
/// number of removed records.
pub fn filter_doc_types(
    corpus: &Corpus,
    allowlist: &BTreeSet<String>,
) -> Result<(Corpus, usize), CorpusError> {
    if allowlist.is_empty() {
        return Err(CorpusError::EmptyAllowlist);
    }
    let mut kept = Corpus::new(corpus.window, &corpus.home_country)?;
    let mut removed = 0usize;
    for publication in corpus.iter() {
        if allowlist.contains(&publication.doc_type) {
            kept.push(publication.clone()).expect("already validated");
        } else {
            removed += 1;
        }
    }
    Ok((kept, removed))
}

/// Default retained document types. The exclusion lists in common practice
/// name editorial material, meeting abstracts, and replies; this allowlist is
/// the configurable complement used when none is given.
pub fn default_doc_allowlist() -> BTreeSet<String> {
    ["article", "review", "letter", "proceedings-paper"]
        .iter()
        .map(|s| s.to_string())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn window() -> Window {
        Window::new(2006, 2010).unwrap()
    }

    fn record(id: &str, year: i32, doc_type: &str) -> Publication {
        Publication {
            pub_id: id.to_string(),
            year,
            doc_type: doc_type.to_string(),
            authors: vec![
                BylineAuthor { name: "Rossi, M.".into(), address_idxs: vec![0] },
                BylineAuthor { name: "Bianchi, G.".into(), address_idxs: vec![0] },
            ],
            addresses: vec![Address {
                org_name: "Univ A".into(),
                org_id: Some("UA".into()),
                country: "IT".into(),
            }],
        }
    }

    #[test]
    fn empty_stream_gives_empty_corpus() {
        let (corpus, issues) = parse_corpus(&b""[..], window(), "IT").unwrap();
        assert_eq!(corpus.len(), 0);
        assert!(issues.is_empty());
    }

    #[test]
    fn single_record_parses() {
        let line = r#"{"id":"P1","year":2007,"type":"article","authors":[{"name":"Rossi, M.","addr":[0]},{"name":"Bianchi, G.","addr":[0]}],"addresses":[{"org":"Univ A","org_id":"UA","country":"IT"}]}"#;
        let (corpus, issues) = parse_corpus(line.as_bytes(), window(), "IT").unwrap();
        assert!(issues.is_empty());
        assert_eq!(corpus.len(), 1);
        let p = corpus.get("P1").unwrap();
        assert_eq!(p.year, 2007);
        assert_eq!(p.authors.len(), 2);
        assert_eq!(p.addresses[0].identity(), "UA");
    }

    #[test]
    fn address_index_out_of_range_is_reported_with_pub_id() {
        let line = r#"{"id":"P9","year":2007,"type":"article","authors":[{"name":"Rossi, M.","addr":[3]}],"addresses":[{"org":"A","country":"IT"},{"org":"B","country":"IT"}]}"#;
        let (corpus, issues) = parse_corpus(line.as_bytes(), window(), "IT").unwrap();
        assert_eq!(corpus.len(), 0);
        assert_eq!(issues.len(), 1);
        assert_eq!(
            issues[0].error,
            RecordError::AddressIndexOutOfRange { pub_id: "P9".into(), idx: 3, len: 2 }
        );
    }

    #[test]
    fn duplicate_id_year_window_and_malformed_are_reported() {
        let mut text = String::new();
        text.push_str(&serde_json::to_string(&record("P1", 2007, "article")).unwrap());
        text.push('\n');
        text.push_str(&serde_json::to_string(&record("P1", 2008, "article")).unwrap());
        text.push('\n');
        text.push_str(&serde_json::to_string(&record("P2", 1999, "article")).unwrap());
        text.push('\n');
        text.push_str("{not json\n");
        let (corpus, issues) = parse_corpus(text.as_bytes(), window(), "IT").unwrap();
        assert_eq!(corpus.len(), 1);
        assert_eq!(issues.len(), 3);
        assert_eq!(issues[0].error, RecordError::DuplicateId { pub_id: "P1".into() });
        assert!(matches!(issues[1].error, RecordError::YearOutsideWindow { .. }));
        assert!(matches!(issues[2].error, RecordError::Malformed(_)));
        assert_eq!(issues[2].line, 4);
    }

    #[test]
    fn lines_in_equals_publications_plus_issues() {
        let mut text = String::new();
        for i in 0..7 {
            if i % 3 == 0 {
                text.push_str("garbage\n");
            } else {
                text.push_str(&serde_json::to_string(&record(&format!("P{i}"), 2007, "article")).unwrap());
                text.push('\n');
            }
        }
        let (corpus, issues) = parse_corpus(text.as_bytes(), window(), "IT").unwrap();
        assert_eq!(corpus.len() + issues.len(), 7);
    }

    #[test]
    fn filter_keeps_allowlisted_types_and_counts_removed() {
        let mut corpus = Corpus::new(window(), "IT").unwrap();
        corpus.push(record("P1", 2007, "article")).unwrap();
        corpus.push(record("P2", 2007, "editorial-material")).unwrap();
        let allow: BTreeSet<String> = ["article".to_string()].into_iter().collect();
        let (kept, removed) = filter_doc_types(&corpus, &allow).unwrap();
        assert_eq!(kept.len(), 1);
        assert_eq!(removed, 1);
        assert!(kept.contains("P1"));
    }

    #[test]
    fn filter_with_every_type_present_is_identity() {
        let mut corpus = Corpus::new(window(), "IT").unwrap();
        corpus.push(record("P1", 2007, "article")).unwrap();
        corpus.push(record("P2", 2007, "review")).unwrap();
        let allow: BTreeSet<String> =
            ["article".to_string(), "review".to_string()].into_iter().collect();
        let (kept, removed) = filter_doc_types(&corpus, &allow).unwrap();
        assert_eq!(kept, corpus);
        assert_eq!(removed, 0);
    }

    #[test]
    fn filter_of_only_excluded_types_empties_the_corpus() {
        let mut corpus = Corpus::new(window(), "IT").unwrap();
        corpus.push(record("P1", 2007, "editorial-material")).unwrap();
        corpus.push(record("P2", 2007, "meeting-abstract")).unwrap();
        let allow: BTreeSet<String> = ["article".to_string()].into_iter().collect();
        let (kept, removed) = filter_doc_types(&corpus, &allow).unwrap();
        assert!(kept.is_empty());
        assert_eq!(removed, corpus.len());
    }

    #[test]
    fn filter_is_idempotent() {
        let mut corpus = Corpus::new(window(), "IT").unwrap();
        corpus.push(record("P1", 2007, "article")).unwrap();
        corpus.push(record("P2", 2007, "review")).unwrap();
        corpus.push(record("P3", 2007, "editorial-material")).unwrap();
        let allow: BTreeSet<String> = ["article".to_string()].into_iter().collect();
        let (once, _) = filter_doc_types(&corpus, &allow).unwrap();
        let (twice, removed_again) = filter_doc_types(&once, &allow).unwrap();
        assert_eq!(once, twice);
        assert_eq!(removed_again, 0);
    }

    #[test]
    fn empty_allowlist_is_rejected() {
        let corpus = Corpus::new(window(), "IT").unwrap();
        assert!(matches!(
            filter_doc_types(&corpus, &BTreeSet::new()),
            Err(CorpusError::EmptyAllowlist)
        ));
    }

    #[test]
    fn duplicate_address_index_is_rejected() {
        let mut p = record("P1", 2007, "article");
        p.authors[0].address_idxs = vec![0, 0];
        let mut corpus = Corpus::new(window(), "IT").unwrap();
        assert!(matches!(corpus.push(p), Err(RecordError::DuplicateAddressIndex { .. })));
    }

    #[test]
    fn bad_country_and_empty_org_are_rejected() {
        let mut p = record("P1", 2007, "article");
        p.addresses[0].country = "Italy".into();
        let mut corpus = Corpus::new(window(), "IT").unwrap();
        assert!(matches!(corpus.push(p), Err(RecordError::BadCountry { .. })));
        let mut p = record("P2", 2007, "article");
        p.addresses[0].org_name = "  ".into();
        assert!(matches!(corpus.push(p), Err(RecordError::EmptyOrgName { .. })));
    }

    #[test]
    fn window_parses_and_displays() {
        let w: Window = "2006-2010".parse().unwrap();
        assert_eq!(w, window());
        assert_eq!(w.to_string(), "2006-2010");
        assert!("2010-2006".parse::<Window>().is_err());
        assert!("2006".parse::<Window>().is_err());
    }

    #[test]
    fn identity_falls_back_to_normalized_name() {
        let a = Address { org_name: "  Univ  OF x ".into(), org_id: None, country: "IT".into() };
        assert_eq!(a.identity(), "univ of x");
        let b = Address { org_name: "X".into(), org_id: Some("".into()), country: "IT".into() };
        assert_eq!(b.identity(), "x");
    }

    #[test]
    fn normalize_collapses_whitespace_and_case() {
        assert_eq!(normalize("  Rossi,   M. "), "rossi, m.");
        assert_eq!(normalize("ROSSI, M."), normalize("Rossi,  M."));
    }

    fn arb_publication(id: usize) -> impl Strategy<Value = Publication> {
        let address = (any::<bool>(), 0usize..3).prop_map(|(with_id, n)| Address {
            org_name: format!("Org {n}"),
            org_id: if with_id { Some(format!("O{n}")) } else { None },
            country: if n == 0 { "IT".to_string() } else { "US".to_string() },
        });
        (prop::collection::vec(address, 1..4), 2006i32..=2010, 1usize..4).prop_map(
            move |(addresses, year, n_authors)| {
                let authors = (0..n_authors)
                    .map(|i| BylineAuthor {
                        name: format!("Name{i}, N."),
                        address_idxs: if i < addresses.len() { vec![i] } else { vec![] },
                    })
                    .collect();
                Publication {
                    pub_id: format!("P{id}"),
                    year,
                    doc_type: "article".into(),
                    authors,
                    addresses,
                }
            },
        )
    }

    proptest! {
        #[test]
        fn serialization_round_trips(records in prop::collection::vec((0usize..1).prop_flat_map(|_| arb_publication(0)), 0..8)) {
            let mut corpus = Corpus::new(window(), "IT").unwrap();
            for (i, mut r) in records.into_iter().enumerate() {
                r.pub_id = format!("P{i}");
                corpus.push(r).unwrap();
            }
            let mut bytes = Vec::new();
            corpus.write_jsonl(&mut bytes).unwrap();
            let (reparsed, issues) = parse_corpus(&bytes[..], window(), "IT").unwrap();
            prop_assert!(issues.is_empty());
            prop_assert_eq!(reparsed, corpus);
        }
    }
}
