//! Table assembly and rendering: the staff/publication summary, the four
//! propensity tables, and byte-stable CSV/Markdown export.

use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

use num::rational::Ratio;
use num::{BigInt, BigRational, Integer, One, Signed};
use thiserror::Error;

use crate::corpus::Corpus;
use crate::indicators::{Form, GroupStats};
use crate::roster::{Academic, AttributionSet, Rank, Roster};
use crate::stats::{stars, RankComparison, Sign, StatsError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Markdown,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReportError {
    #[error("unknown format {0:?} (expected \"csv\" or \"md\")")]
    UnknownFormat(String),
}

impl FromStr for Format {
    type Err = ReportError;

    fn from_str(s: &str) -> Result<Self, ReportError> {
        match s {
            "csv" => Ok(Format::Csv),
            "md" | "markdown" => Ok(Format::Markdown),
            other => Err(ReportError::UnknownFormat(other.to_string())),
        }
    }
}

/// Formats a fraction in [0, 1] as a percentage with exactly one decimal,
/// rounding half to even. Rounding happens only here; upstream values stay
/// exact.
pub fn format_pct(value: &BigRational) -> String {
    // Scale to tenths of a percent, then round half-even to an integer.
    let scaled = value * BigRational::from_integer(BigInt::from(1000));
    let floor = scaled.floor().to_integer();
    let remainder = &scaled - BigRational::from_integer(floor.clone());
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let mut tenths = floor.clone();
    if remainder > half || (remainder == half && floor.is_odd()) {
        tenths += 1;
    }
    let (whole, tenth) = tenths.div_rem(&BigInt::from(10));
    format!("{whole}.{}", tenth.abs())
}

/// Convenience for machine-sized ratios.
pub fn ratio_pct(value: Ratio<u64>) -> String {
    format_pct(&BigRational::new(BigInt::from(*value.numer()), BigInt::from(*value.denom())))
}

/// Whether staff counts cover only academics in included SDSs (the default)
/// or the whole roster.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StaffScope {
    PostFilter,
    PreFilter,
}

/// One row of the staff/publication summary.
#[derive(Debug, Clone, PartialEq)]
pub struct StaffRow {
    /// UDA code, or "Total" for the deduplicated cross-UDA block.
    pub uda: String,
    pub rank: Rank,
    /// Distinct publications with at least one attributed academic of this
    /// rank and UDA.
    pub pubs_count: u64,
    /// Share of the UDA's distinct publications (grand total for Total
    /// rows); None when the base is zero.
    pub pubs_pct: Option<BigRational>,
    pub staff_total: u64,
    pub productive_count: u64,
    pub productive_pct: Option<BigRational>,
    pub collaborative_count: u64,
    pub collaborative_pct: Option<BigRational>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StaffTable {
    pub rows: Vec<StaffRow>,
}

fn pct_of(numer: u64, denom: u64) -> Option<BigRational> {
    (denom > 0).then(|| BigRational::new(BigInt::from(numer), BigInt::from(denom)))
}

/// Builds the staff summary. Publication cells count distinct publications,
/// so Total rows (set unions across UDAs) can fall below the column sums
/// when a publication has authors in several UDAs. `corpus` must already be
/// document-type filtered and `attributions` restricted to it.
pub fn table_staff(
    corpus: &Corpus,
    roster: &Roster,
    attributions: &AttributionSet,
    included_sds: &BTreeSet<String>,
    scope: StaffScope,
) -> StaffTable {
    let in_scope: Vec<&Academic> = roster
        .iter()
        .filter(|a| scope == StaffScope::PreFilter || included_sds.contains(&a.sds))
        .collect();

    let collaborative = |academic: &Academic| {
        attributions
            .pubs_of(&academic.academic_id)
            .any(|p| corpus.get(p).is_some_and(|publication| publication.distinct_author_count() >= 2))
    };

    let mut uda_rank_pubs: BTreeMap<(String, Rank), BTreeSet<&str>> = BTreeMap::new();
    let mut uda_pubs: BTreeMap<String, BTreeSet<&str>> = BTreeMap::new();
    let mut rank_pubs: BTreeMap<Rank, BTreeSet<&str>> = BTreeMap::new();
    let mut grand_pubs: BTreeSet<&str> = BTreeSet::new();
    let mut staff: BTreeMap<(String, Rank), (u64, u64, u64)> = BTreeMap::new();
    let mut total_staff: BTreeMap<Rank, (u64, u64, u64)> = BTreeMap::new();
    let mut udas: BTreeSet<String> = BTreeSet::new();

    for academic in &in_scope {
        udas.insert(academic.uda.clone());
        let pubs: Vec<&str> = attributions.pubs_of(&academic.academic_id).collect();
        let productive = !pubs.is_empty();
        let collab = productive && collaborative(academic);
        for key in [(academic.uda.clone(), academic.rank)] {
            let entry = staff.entry(key).or_insert((0, 0, 0));
            entry.0 += 1;
            entry.1 += u64::from(productive);
            entry.2 += u64::from(collab);
        }
        let entry = total_staff.entry(academic.rank).or_insert((0, 0, 0));
        entry.0 += 1;
        entry.1 += u64::from(productive);
        entry.2 += u64::from(collab);
        for p in pubs {
            uda_rank_pubs.entry((academic.uda.clone(), academic.rank)).or_default().insert(p);
            uda_pubs.entry(academic.uda.clone()).or_default().insert(p);
            rank_pubs.entry(academic.rank).or_default().insert(p);
            grand_pubs.insert(p);
        }
    }

    // UDA blocks by descending total staff, ties by code; Total block last.
    let mut uda_order: Vec<String> = udas.into_iter().collect();
    let staff_of_uda = |uda: &String| -> u64 {
        Rank::ALL.iter().map(|&r| staff.get(&(uda.clone(), r)).map_or(0, |e| e.0)).sum()
    };
    uda_order.sort_by(|a, b| staff_of_uda(b).cmp(&staff_of_uda(a)).then_with(|| a.cmp(b)));

    let mut rows = Vec::new();
    for uda in &uda_order {
        let base = uda_pubs.get(uda).map_or(0, |s| s.len() as u64);
        for rank in Rank::ALL {
            let (staff_total, productive_count, collaborative_count) =
                staff.get(&(uda.clone(), rank)).copied().unwrap_or((0, 0, 0));
            let pubs_count =
                uda_rank_pubs.get(&(uda.clone(), rank)).map_or(0, |s| s.len() as u64);
            rows.push(StaffRow {
                uda: uda.clone(),
                rank,
                pubs_count,
                pubs_pct: pct_of(pubs_count, base),
                staff_total,
                productive_count,
                productive_pct: pct_of(productive_count, staff_total),
                collaborative_count,
                collaborative_pct: pct_of(collaborative_count, staff_total),
            });
        }
    }
    let grand = grand_pubs.len() as u64;
    for rank in Rank::ALL {
        let (staff_total, productive_count, collaborative_count) =
            total_staff.get(&rank).copied().unwrap_or((0, 0, 0));
        let pubs_count = rank_pubs.get(&rank).map_or(0, |s| s.len() as u64);
        rows.push(StaffRow {
            uda: "Total".into(),
            rank,
            pubs_count,
            pubs_pct: pct_of(pubs_count, grand),
            staff_total,
            productive_count,
            productive_pct: pct_of(productive_count, staff_total),
            collaborative_count,
            collaborative_pct: pct_of(collaborative_count, staff_total),
        });
    }
    StaffTable { rows }
}

/// The comparison cell carried by each propensity row: counterpart rank,
/// rank-direction sign (None when not computable), and significance stars.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonCell {
    pub vs: Rank,
    pub sign: Option<Sign>,
    pub stars: String,
}

/// One row of a propensity table; None statistics render as "n/a" (no
/// productive academics in the cohort).
#[derive(Debug, Clone, PartialEq)]
pub struct PropensityRow {
    pub uda: String,
    pub rank: Rank,
    pub n: u64,
    pub mean: Option<BigRational>,
    pub pct_zero: Option<Ratio<u64>>,
    pub pct_full: Option<Ratio<u64>>,
    pub comparison: ComparisonCell,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropensityTable {
    pub form: Form,
    pub rows: Vec<PropensityRow>,
}

/// Statistics and comparisons for one UDA (or the Total block): per-rank
/// group stats in Full/Associate/Assistant order plus the three fixed-order
/// comparisons.
#[derive(Debug, Clone, PartialEq)]
pub struct CohortResults {
    pub uda: String,
    pub stats: [Option<GroupStats>; 3],
    pub comparisons: [RankComparison; 3],
}

/// Assembles one propensity table: UDA blocks ordered by descending
/// Full-rank mean (missing means last, ties by UDA code), Total block last,
/// rows Full/Associate/Assistant each carrying its comparison cell.
pub fn table_propensity(
    form: Form,
    mut blocks: Vec<CohortResults>,
    total: CohortResults,
    star_thresholds: &[f64],
) -> Result<PropensityTable, StatsError> {
    blocks.sort_by(|a, b| {
        let (ma, mb) = (&a.stats[0], &b.stats[0]);
        match (ma, mb) {
            (Some(x), Some(y)) => y.mean.cmp(&x.mean).then_with(|| a.uda.cmp(&b.uda)),
            (Some(_), None) => std::cmp::Ordering::Less,
            (None, Some(_)) => std::cmp::Ordering::Greater,
            (None, None) => a.uda.cmp(&b.uda),
        }
    });
    let mut rows = Vec::new();
    for block in blocks.iter().chain(std::iter::once(&total)) {
        for (i, rank) in Rank::ALL.into_iter().enumerate() {
            let comparison = &block.comparisons[i];
            debug_assert_eq!(comparison.group_a, rank);
            let cell = ComparisonCell {
                vs: comparison.group_b,
                sign: comparison.test.as_ref().map(|t| t.sign),
                stars: match &comparison.test {
                    Some(t) => stars(t.p_value, star_thresholds)?,
                    None => String::new(),
                },
            };
            let stats = &block.stats[i];
            rows.push(PropensityRow {
                uda: block.uda.clone(),
                rank,
                n: stats.as_ref().map_or(0, |s| s.n),
                mean: stats.as_ref().map(|s| s.mean.clone()),
                pct_zero: stats.as_ref().map(|s| s.pct_zero),
                pct_full: stats.as_ref().map(|s| s.pct_full),
                comparison: cell,
            });
        }
    }
    Ok(PropensityTable { form, rows })
}

/// Renderable table: a header plus string rows.
pub trait Render {
    fn header(&self) -> Vec<String>;
    fn cells(&self) -> Vec<Vec<String>>;
}

fn opt_pct(value: &Option<BigRational>) -> String {
    value.as_ref().map_or_else(|| "n/a".into(), format_pct)
}

fn opt_ratio_pct(value: &Option<Ratio<u64>>) -> String {
    value.map_or_else(|| "n/a".into(), ratio_pct)
}

impl Render for StaffTable {
    fn header(&self) -> Vec<String> {
        [
            "uda",
            "rank",
            "publications",
            "publications_pct",
            "staff",
            "productive",
            "productive_pct",
            "collaborative",
            "collaborative_pct",
        ]
        .map(String::from)
        .to_vec()
    }

    fn cells(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                vec![
                    r.uda.clone(),
                    r.rank.label().into(),
                    r.pubs_count.to_string(),
                    opt_pct(&r.pubs_pct),
                    r.staff_total.to_string(),
                    r.productive_count.to_string(),
                    opt_pct(&r.productive_pct),
                    r.collaborative_count.to_string(),
                    opt_pct(&r.collaborative_pct),
                ]
            })
            .collect()
    }
}

impl Render for PropensityTable {
    fn header(&self) -> Vec<String> {
        ["uda", "rank", "n", "mean_pct", "nil_pct", "max_pct", "vs", "sign", "stars"]
            .map(String::from)
            .to_vec()
    }

    fn cells(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                vec![
                    r.uda.clone(),
                    r.rank.label().into(),
                    r.n.to_string(),
                    opt_pct(&r.mean),
                    opt_ratio_pct(&r.pct_zero),
                    opt_ratio_pct(&r.pct_full),
                    r.comparison.vs.label().into(),
                    r.comparison.sign.map_or("n/c".into(), |s| s.label().to_string()),
                    r.comparison.stars.clone(),
                ]
            })
            .collect()
    }
}

/// Renders a table in the chosen format; identical inputs yield identical
/// bytes.
pub fn export<T: Render>(table: &T, format: Format) -> String {
    match format {
        Format::Csv => {
            let mut writer = csv::Writer::from_writer(Vec::new());
            writer.write_record(table.header()).expect("in-memory write");
            for row in table.cells() {
                writer.write_record(row).expect("in-memory write");
            }
            String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("utf-8")
        }
        Format::Markdown => {
            let header = table.header();
            let mut out = String::new();
            out.push_str(&format!("| {} |\n", header.join(" | ")));
            out.push_str(&format!("|{}\n", "---|".repeat(header.len())));
            for row in table.cells() {
                out.push_str(&format!("| {} |\n", row.join(" | ")));
            }
            out
        }
    }
}

/// File name for a table in a given format, e.g. `table2_C.csv`.
pub fn table_file_name(index: usize, label: &str, format: Format) -> String {
    let ext = match format {
        Format::Csv => "csv",
        Format::Markdown => "md",
    };
    format!("table{index}_{label}.{ext}")
}

/// Per-academic profile dump: identity columns, raw counts, and rates to six
/// decimals.
pub fn profiles_csv(profiles: &[(Academic, crate::indicators::CollabProfile)]) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record([
            "academic", "surname", "given", "rank", "sds", "uda", "university", "p", "cp", "cip",
            "cedp", "cefp", "c", "ci", "ced", "cef",
        ])
        .expect("in-memory write");
    for (academic, profile) in profiles {
        let rate = |form| {
            let r = profile.ratio(form);
            format!("{:.6}", *r.numer() as f64 / *r.denom() as f64)
        };
        writer
            .write_record([
                academic.academic_id.clone(),
                academic.surname.clone(),
                academic.given_names.clone(),
                academic.rank.label().into(),
                academic.sds.clone(),
                academic.uda.clone(),
                academic.university_id.clone(),
                profile.p.to_string(),
                profile.cp.to_string(),
                profile.cip.to_string(),
                profile.cedp.to_string(),
                profile.cefp.to_string(),
                rate(Form::C),
                rate(Form::Ci),
                rate(Form::Ced),
                rate(Form::Cef),
            ])
            .expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("utf-8")
}

/// SDS coverage dump, sorted by SDS code.
pub fn coverage_csv(coverage: &[crate::roster::SdsCoverage]) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(["sds", "uda", "staff", "productive", "productive_pct", "included"])
        .expect("in-memory write");
    for c in coverage {
        let pct = pct_of(c.productive_count, c.staff_count);
        writer
            .write_record([
                c.sds.clone(),
                c.uda.clone(),
                c.staff_count.to_string(),
                c.productive_count.to_string(),
                pct.as_ref().map_or_else(|| "n/a".into(), format_pct),
                c.included.to_string(),
            ])
            .expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("utf-8")
}
