//! End-to-end analysis orchestration: document filter, coverage filter,
//! per-academic classification, and table assembly.

use std::collections::{BTreeMap, BTreeSet};

use num::rational::Ratio;
use rayon::prelude::*;
use thiserror::Error;

use crate::classify::{classify, ClassifyError};
use crate::corpus::{filter_doc_types, Corpus, CorpusError};
use crate::indicators::{build_profile, group_stats, ratio_to_f64, CollabProfile, Form};
use crate::report::{
    table_propensity, table_staff, CohortResults, PropensityTable, StaffScope, StaffTable,
};
use crate::roster::{Academic, AttributionSet, Rank, Roster, SdsCoverage};
use crate::stats::{compare_ranks, default_star_thresholds, StatsError};

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisConfig {
    /// Inclusive productive-share threshold an SDS must reach.
    pub sds_threshold: Ratio<u64>,
    pub doc_allowlist: BTreeSet<String>,
    pub star_thresholds: Vec<f64>,
    pub staff_scope: StaffScope,
    /// Rayon thread count; None uses the global pool. Output bytes do not
    /// depend on this.
    pub workers: Option<usize>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            sds_threshold: Ratio::new(1, 2),
            doc_allowlist: crate::corpus::default_doc_allowlist(),
            star_thresholds: default_star_thresholds(),
            staff_scope: StaffScope::PostFilter,
            workers: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("no SDS meets the coverage threshold; nothing to analyze")]
    NoIncludedSds,
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error(transparent)]
    Indicators(#[from] crate::indicators::IndicatorError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("worker pool: {0}")]
    ThreadPool(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisOutput {
    /// Publications dropped by the document-type filter.
    pub dropped_publications: usize,
    pub coverage: Vec<SdsCoverage>,
    pub included_sds: BTreeSet<String>,
    /// Productive academics of included SDSs, in roster order.
    pub profiles: Vec<(Academic, CollabProfile)>,
    pub staff: StaffTable,
    /// Propensity tables in C, CI, CED, CEF order.
    pub tables: Vec<PropensityTable>,
}

fn classify_academic(
    academic: &Academic,
    corpus: &Corpus,
    roster: &Roster,
    attributions: &AttributionSet,
) -> Result<Option<(Academic, CollabProfile)>, PipelineError> {
    let mut flags = Vec::new();
    for pub_id in attributions.pubs_of(&academic.academic_id) {
        let publication = corpus.get(pub_id).expect("attribution restricted to corpus");
        let attributed: Vec<&Academic> = attributions
            .academics_on(pub_id)
            .map(|id| roster.get(id).expect("attributed academics are rostered"))
            .collect();
        flags.push(classify(publication, academic, &attributed, corpus.home_country())?);
    }
    if flags.is_empty() {
        return Ok(None);
    }
    Ok(Some((academic.clone(), build_profile(&academic.academic_id, &flags)?)))
}

/// Runs the full analysis. Deterministic: the result depends only on the
/// inputs and config, never on the worker count.
pub fn analyze(
    corpus: &Corpus,
    roster: &Roster,
    attributions: &AttributionSet,
    config: &AnalysisConfig,
) -> Result<AnalysisOutput, PipelineError> {
    let (filtered, dropped_publications) = filter_doc_types(corpus, &config.doc_allowlist)?;
    let restricted = attributions.restricted_to(&filtered);
    let (included_sds, coverage) =
        crate::roster::sds_coverage_filter(roster, &restricted, config.sds_threshold);
    if included_sds.is_empty() {
        return Err(PipelineError::NoIncludedSds);
    }

    let staff = table_staff(&filtered, roster, &restricted, &included_sds, config.staff_scope);

    let candidates: Vec<&Academic> =
        roster.iter().filter(|a| included_sds.contains(&a.sds)).collect();
    let run = || {
        candidates
            .par_iter()
            .map(|academic| classify_academic(academic, &filtered, roster, &restricted))
            .collect::<Result<Vec<_>, _>>()
    };
    let classified = match config.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| PipelineError::ThreadPool(e.to_string()))?
            .install(run),
        None => run(),
    }?;
    let profiles: Vec<(Academic, CollabProfile)> = classified.into_iter().flatten().collect();

    // Cohorts: per-UDA rank triples plus the cross-UDA total, productive
    // academics only.
    let mut cohorts: BTreeMap<String, [Vec<&CollabProfile>; 3]> = BTreeMap::new();
    let mut total: [Vec<&CollabProfile>; 3] = Default::default();
    for (academic, profile) in &profiles {
        let slot = Rank::ALL.iter().position(|&r| r == academic.rank).expect("three ranks");
        cohorts.entry(academic.uda.clone()).or_default()[slot].push(profile);
        total[slot].push(profile);
    }
    // Zero-productive UDAs of included SDSs still get an all-empty block.
    for academic in roster.iter() {
        if included_sds.contains(&academic.sds) {
            cohorts.entry(academic.uda.clone()).or_default();
        }
    }

    let mut tables = Vec::new();
    for form in Form::ALL {
        let block = |uda: &str, ranks: &[Vec<&CollabProfile>; 3]| -> Result<CohortResults, PipelineError> {
            let stats = [0, 1, 2].map(|i| {
                if ranks[i].is_empty() { None } else { Some(group_stats(&ranks[i], form)) }
            });
            let mut resolved = Vec::new();
            for s in stats {
                resolved.push(s.transpose()?);
            }
            let values = |i: usize| -> Vec<f64> {
                ranks[i].iter().map(|p| ratio_to_f64(p.ratio(form))).collect()
            };
            Ok(CohortResults {
                uda: uda.to_string(),
                stats: [resolved[0].clone(), resolved[1].clone(), resolved[2].clone()],
                comparisons: compare_ranks(&values(0), &values(1), &values(2))?,
            })
        };
        let blocks = cohorts
            .iter()
            .map(|(uda, ranks)| block(uda, ranks))
            .collect::<Result<Vec<_>, _>>()?;
        let total_block = block("Total", &total)?;
        tables.push(table_propensity(form, blocks, total_block, &config.star_thresholds)?);
    }

    Ok(AnalysisOutput { dropped_publications, coverage, included_sds, profiles, staff, tables })
}
