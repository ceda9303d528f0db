//! Academic registry, publication attribution (the author-publication
//! matrix), and the field-coverage filter that decides which SDS populations
//! enter the analysis.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{BufRead, Write};

use num::rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{normalize, Corpus};

/// Academic rank, the comparison axis of every analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rank {
    Full,
    Associate,
    Assistant,
}

impl Rank {
    pub const ALL: [Rank; 3] = [Rank::Full, Rank::Associate, Rank::Assistant];

    pub fn label(self) -> &'static str {
        match self {
            Rank::Full => "Full",
            Rank::Associate => "Associate",
            Rank::Assistant => "Assistant",
        }
    }
}

impl fmt::Display for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// One roster entry; the unit of analysis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Academic {
    #[serde(rename = "id")]
    pub academic_id: String,
    pub surname: String,
    #[serde(rename = "given")]
    pub given_names: String,
    pub rank: Rank,
    pub sds: String,
    pub uda: String,
    #[serde(rename = "university")]
    pub university_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RosterError {
    #[error("malformed record: {0}")]
    Malformed(String),
    #[error("academic {id}: duplicate id")]
    DuplicateId { id: String },
    #[error("academic {id}: empty {field}")]
    EmptyField { id: String, field: &'static str },
    #[error("inconsistent SDS mapping: {sds} maps to {existing} and {conflicting}")]
    InconsistentSds { sds: String, existing: String, conflicting: String },
}

/// A rejected roster line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RosterIssue {
    pub line: usize,
    pub error: RosterError,
}

impl fmt::Display for RosterIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.error)
    }
}

/// Immutable after load; iteration follows input order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Roster {
    academics: Vec<Academic>,
    index: BTreeMap<String, usize>,
    sds_to_uda: BTreeMap<String, String>,
}

impl Roster {
    pub fn push(&mut self, academic: Academic) -> Result<(), RosterError> {
        let id = academic.academic_id.clone();
        if academic.academic_id.trim().is_empty() {
            return Err(RosterError::EmptyField { id, field: "id" });
        }
        if academic.surname.trim().is_empty() {
            return Err(RosterError::EmptyField { id, field: "surname" });
        }
        if academic.sds.trim().is_empty() {
            return Err(RosterError::EmptyField { id, field: "sds" });
        }
        if academic.uda.trim().is_empty() {
            return Err(RosterError::EmptyField { id, field: "uda" });
        }
        if academic.university_id.trim().is_empty() {
            return Err(RosterError::EmptyField { id, field: "university" });
        }
        if self.index.contains_key(&academic.academic_id) {
            return Err(RosterError::DuplicateId { id });
        }
        if let Some(existing) = self.sds_to_uda.get(&academic.sds) {
            if existing != &academic.uda {
                return Err(RosterError::InconsistentSds {
                    sds: academic.sds.clone(),
                    existing: existing.clone(),
                    conflicting: academic.uda.clone(),
                });
            }
        } else {
            self.sds_to_uda.insert(academic.sds.clone(), academic.uda.clone());
        }
        self.index.insert(academic.academic_id.clone(), self.academics.len());
        self.academics.push(academic);
        Ok(())
    }

    pub fn get(&self, academic_id: &str) -> Option<&Academic> {
        self.index.get(academic_id).map(|&i| &self.academics[i])
    }

    pub fn contains(&self, academic_id: &str) -> bool {
        self.index.contains_key(academic_id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Academic> {
        self.academics.iter()
    }

    pub fn len(&self) -> usize {
        self.academics.len()
    }

    pub fn is_empty(&self) -> bool {
        self.academics.is_empty()
    }

    pub fn sds_to_uda(&self) -> &BTreeMap<String, String> {
        &self.sds_to_uda
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for academic in &self.academics {
            serde_json::to_writer(&mut out, academic)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Parses line-delimited roster records; every non-blank line either becomes
/// an academic or produces exactly one issue.
pub fn load_roster<R: BufRead>(input: R) -> std::io::Result<(Roster, Vec<RosterIssue>)> {
    let mut roster = Roster::default();
    let mut issues = Vec::new();
    for (line_no, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let academic: Academic = match serde_json::from_str(&line) {
            Ok(a) => a,
            Err(e) => {
                issues.push(RosterIssue { line: line_no + 1, error: RosterError::Malformed(e.to_string()) });
                continue;
            }
        };
        if let Err(error) = roster.push(academic) {
            issues.push(RosterIssue { line: line_no + 1, error });
        }
    }
    Ok((roster, issues))
}

/// How a link entered the attribution set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Provenance {
    Explicit,
    Matched,
}

/// The author-publication matrix: which academics wrote which publications.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AttributionSet {
    by_academic: BTreeMap<String, BTreeMap<String, Provenance>>,
    by_pub: BTreeMap<String, BTreeSet<String>>,
    len: usize,
}

impl AttributionSet {
    /// Returns false when the pair was already present (provenance is kept
    /// from the first insertion).
    pub fn insert(&mut self, academic_id: &str, pub_id: &str, provenance: Provenance) -> bool {
        let entry = self.by_academic.entry(academic_id.to_string()).or_default();
        if entry.contains_key(pub_id) {
            return false;
        }
        entry.insert(pub_id.to_string(), provenance);
        self.by_pub.entry(pub_id.to_string()).or_default().insert(academic_id.to_string());
        self.len += 1;
        true
    }

    pub fn contains(&self, academic_id: &str, pub_id: &str) -> bool {
        self.by_academic.get(academic_id).is_some_and(|pubs| pubs.contains_key(pub_id))
    }

    pub fn pubs_of(&self, academic_id: &str) -> impl Iterator<Item = &str> {
        self.by_academic.get(academic_id).into_iter().flat_map(|pubs| pubs.keys().map(String::as_str))
    }

    pub fn academics_on(&self, pub_id: &str) -> impl Iterator<Item = &str> {
        self.by_pub.get(pub_id).into_iter().flatten().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str, Provenance)> {
        self.by_academic
            .iter()
            .flat_map(|(a, pubs)| pubs.iter().map(move |(p, &prov)| (a.as_str(), p.as_str(), prov)))
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Links restricted to publications present in `corpus`.
    pub fn restricted_to(&self, corpus: &Corpus) -> AttributionSet {
        let mut out = AttributionSet::default();
        for (a, p, prov) in self.iter() {
            if corpus.contains(p) {
                out.insert(a, p, prov);
            }
        }
        out
    }

    /// One `{"academic": ..., "pub": ...}` object per line, sorted by
    /// (academic, publication).
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (a, p, _) in self.iter() {
            serde_json::to_writer(&mut out, &AttributionRecord { academic: a.into(), pub_id: p.into() })?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct AttributionRecord {
    academic: String,
    #[serde(rename = "pub")]
    pub_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AttributionError {
    #[error("malformed record: {0}")]
    Malformed(String),
    #[error("unknown academic {academic} (publication {pub_id})")]
    UnknownAcademic { academic: String, pub_id: String },
    #[error("unknown publication {pub_id} (academic {academic})")]
    UnknownPublication { academic: String, pub_id: String },
    #[error("duplicate pair ({academic}, {pub_id})")]
    DuplicatePair { academic: String, pub_id: String },
}

impl AttributionError {
    /// Duplicates are deduplicated and reported, not fatal.
    pub fn is_warning(&self) -> bool {
        matches!(self, AttributionError::DuplicatePair { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributionIssue {
    pub line: usize,
    pub error: AttributionError,
}

impl fmt::Display for AttributionIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.error)
    }
}

/// Loads explicit (academic, publication) pairs, enforcing referential
/// integrity against the corpus and roster.
pub fn attribute_explicit<R: BufRead>(
    corpus: &Corpus,
    roster: &Roster,
    input: R,
) -> std::io::Result<(AttributionSet, Vec<AttributionIssue>)> {
    let mut set = AttributionSet::default();
    let mut issues = Vec::new();
    for (line_no, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: AttributionRecord = match serde_json::from_str(&line) {
            Ok(r) => r,
            Err(e) => {
                issues.push(AttributionIssue {
                    line: line_no + 1,
                    error: AttributionError::Malformed(e.to_string()),
                });
                continue;
            }
        };
        let error = if !roster.contains(&record.academic) {
            Some(AttributionError::UnknownAcademic { academic: record.academic, pub_id: record.pub_id })
        } else if !corpus.contains(&record.pub_id) {
            Some(AttributionError::UnknownPublication { academic: record.academic, pub_id: record.pub_id })
        } else if !set.insert(&record.academic, &record.pub_id, Provenance::Explicit) {
            Some(AttributionError::DuplicatePair { academic: record.academic, pub_id: record.pub_id })
        } else {
            None
        };
        if let Some(error) = error {
            issues.push(AttributionIssue { line: line_no + 1, error });
        }
    }
    Ok((set, issues))
}

/// A byline split into its matchable parts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BylineName {
    /// Normalized surname.
    pub surname: String,
    /// Given-name initials in byline order, lowercased.
    pub initials: Vec<char>,
}

fn first_alpha(segment: &str) -> Option<char> {
    segment.chars().find(|c| c.is_alphabetic()).map(|c| c.to_lowercase().next().unwrap_or(c))
}

fn initials_of(text: &str) -> Vec<char> {
    text.split(|c: char| c.is_whitespace() || c == '.' || c == '-')
        .filter_map(first_alpha)
        .collect()
}

/// True when every character of the token is an initial marker, e.g. "M.",
/// "M.G.", "J-P".
fn looks_like_initials(token: &str) -> bool {
    !token.is_empty()
        && token
            .split(|c: char| c == '.' || c == '-')
            .all(|seg| seg.is_empty() || seg.chars().count() == 1 && seg.chars().all(|c| c.is_alphabetic()))
        && token.chars().any(|c| c.is_alphabetic())
}

/// Splits "Surname, Initials" or "Surname I." byline forms. Without a comma,
/// trailing single-letter tokens are read as initials and the rest as the
/// surname.
pub fn parse_byline(raw: &str) -> BylineName {
    if let Some((surname, rest)) = raw.split_once(',') {
        return BylineName { surname: normalize(surname), initials: initials_of(rest) };
    }
    let tokens: Vec<&str> = raw.split_whitespace().collect();
    let mut split = tokens.len();
    while split > 1 && looks_like_initials(tokens[split - 1]) {
        split -= 1;
    }
    BylineName {
        surname: normalize(&tokens[..split].join(" ")),
        initials: tokens[split..].iter().flat_map(|t| initials_of(t)).collect(),
    }
}

fn academic_initials(academic: &Academic) -> Vec<char> {
    initials_of(&academic.given_names)
}

/// Name-only match: surnames equal and the byline initials are a prefix of
/// the academic's given-name initials.
pub fn byline_matches_name(byline: &BylineName, academic: &Academic) -> bool {
    if byline.surname != normalize(&academic.surname) {
        return false;
    }
    let given = academic_initials(academic);
    byline.initials.len() <= given.len() && byline.initials.iter().zip(&given).all(|(a, b)| a == b)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct HeuristicReport {
    pub linked: usize,
    /// Byline positions dropped because two or more academics matched.
    pub ambiguous: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct MatchedLink {
    academic_id: String,
    pub_id: String,
    byline_idx: usize,
}

/// Deterministic matcher over every (publication, byline position): one link
/// iff exactly one academic satisfies the name rules and the publication's
/// addresses include that academic's university.
fn heuristic_links(corpus: &Corpus, roster: &Roster) -> (Vec<MatchedLink>, usize) {
    let mut by_surname: BTreeMap<String, Vec<&Academic>> = BTreeMap::new();
    for academic in roster.iter() {
        by_surname.entry(normalize(&academic.surname)).or_default().push(academic);
    }
    for list in by_surname.values_mut() {
        list.sort_by(|a, b| a.academic_id.cmp(&b.academic_id));
    }
    let mut links = Vec::new();
    let mut ambiguous = 0usize;
    for publication in corpus.iter() {
        let identities: BTreeSet<String> =
            publication.addresses.iter().map(|a| a.identity()).collect();
        for (byline_idx, author) in publication.authors.iter().enumerate() {
            let byline = parse_byline(&author.name);
            let candidates: Vec<&Academic> = by_surname
                .get(&byline.surname)
                .map(|list| {
                    list.iter()
                        .filter(|a| byline_matches_name(&byline, a))
                        .filter(|a| identities.contains(&a.university_id))
                        .copied()
                        .collect()
                })
                .unwrap_or_default();
            match candidates.as_slice() {
                [single] => links.push(MatchedLink {
                    academic_id: single.academic_id.clone(),
                    pub_id: publication.pub_id.clone(),
                    byline_idx,
                }),
                [] => {}
                _ => ambiguous += 1,
            }
        }
    }
    (links, ambiguous)
}

/// Matcher entry point; output is independent of roster and corpus input
/// order.
pub fn attribute_heuristic(corpus: &Corpus, roster: &Roster) -> (AttributionSet, HeuristicReport) {
    let (links, ambiguous) = heuristic_links(corpus, roster);
    let mut set = AttributionSet::default();
    for link in &links {
        set.insert(&link.academic_id, &link.pub_id, Provenance::Matched);
    }
    let linked = set.len();
    (set, HeuristicReport { linked, ambiguous })
}

/// Union of explicit links and heuristic links; a heuristic link loses when
/// an explicit link claims the same byline position for another academic.
pub fn merge_attributions(
    explicit: &AttributionSet,
    corpus: &Corpus,
    roster: &Roster,
) -> (AttributionSet, HeuristicReport) {
    let (links, ambiguous) = heuristic_links(corpus, roster);
    let mut merged = AttributionSet::default();
    for (a, p, _) in explicit.iter() {
        merged.insert(a, p, Provenance::Explicit);
    }
    let mut kept = 0usize;
    for link in &links {
        let publication = corpus.get(&link.pub_id).expect("matched link points into corpus");
        let byline = parse_byline(&publication.authors[link.byline_idx].name);
        let conflicting = explicit.academics_on(&link.pub_id).any(|other| {
            other != link.academic_id
                && roster.get(other).is_some_and(|academic| byline_matches_name(&byline, academic))
        });
        if !conflicting && merged.insert(&link.academic_id, &link.pub_id, Provenance::Matched) {
            kept += 1;
        }
    }
    (merged, HeuristicReport { linked: kept, ambiguous })
}

/// Coverage of one SDS: how many of its staff have at least one attributed
/// publication.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SdsCoverage {
    pub sds: String,
    pub uda: String,
    pub staff_count: u64,
    pub productive_count: u64,
    pub included: bool,
}

/// Parses a decimal fraction like "0.5" into an exact rational in [0, 1].
pub fn parse_threshold(text: &str) -> Result<Ratio<u64>, RosterError> {
    let bad = || RosterError::Malformed(format!("threshold {text:?} is not a decimal in [0, 1]"));
    let (int_part, frac_part) = match text.split_once('.') {
        Some((i, f)) => (i, f),
        None => (text, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    if frac_part.len() > 9 {
        return Err(bad());
    }
    let scale = 10u64.pow(frac_part.len() as u32);
    let int_val: u64 = if int_part.is_empty() { 0 } else { int_part.parse().map_err(|_| bad())? };
    let frac_val: u64 = if frac_part.is_empty() { 0 } else { frac_part.parse().map_err(|_| bad())? };
    let value = Ratio::new(int_val.checked_mul(scale).ok_or_else(bad)? + frac_val, scale);
    if value > Ratio::from_integer(1) {
        return Err(bad());
    }
    Ok(value)
}

/// Marks each SDS included iff productive/staff >= threshold (inclusive,
/// compared exactly). Returns the included set and the per-SDS report sorted
/// by SDS code. An SDS with zero staff is never included.
pub fn sds_coverage_filter(
    roster: &Roster,
    attributions: &AttributionSet,
    threshold: Ratio<u64>,
) -> (BTreeSet<String>, Vec<SdsCoverage>) {
    let mut staff: BTreeMap<&str, (u64, u64, &str)> = BTreeMap::new();
    for academic in roster.iter() {
        let entry = staff.entry(&academic.sds).or_insert((0, 0, &academic.uda));
        entry.0 += 1;
        if attributions.pubs_of(&academic.academic_id).next().is_some() {
            entry.1 += 1;
        }
    }
    let mut included = BTreeSet::new();
    let mut report = Vec::new();
    for (sds, (staff_count, productive_count, uda)) in staff {
        // productive/staff >= num/den  <=>  productive*den >= staff*num
        let is_included = staff_count > 0
            && productive_count * threshold.denom() >= staff_count * threshold.numer();
        if is_included {
            included.insert(sds.to_string());
        }
        report.push(SdsCoverage {
            sds: sds.to_string(),
            uda: uda.to_string(),
            staff_count,
            productive_count,
            included: is_included,
        });
    }
    (included, report)
}
