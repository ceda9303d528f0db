//! Collaboration-rate analysis over publication corpora.
//!
//! The pipeline ingests publication, roster, and attribution records,
//! classifies each attributed publication into collaboration forms, builds
//! per-academic rates (C, CI, CED, CEF), and renders rank-by-discipline
//! summary tables with Mann-Whitney comparisons. A seeded synthetic
//! generator and an independent brute-force recount support end-to-end
//! verification.

pub mod classify;
pub mod corpus;
pub mod indicators;
pub mod oracle;
pub mod pipeline;
pub mod report;
pub mod roster;
pub mod stats;
pub mod synth;

pub use classify::{classify, ClassifyError, CollabFlags};
pub use corpus::{
    default_doc_allowlist, filter_doc_types, normalize, parse_corpus, valid_country, Address,
    BylineAuthor, Corpus, CorpusError, ParseIssue, Publication, RecordError, Window,
};
pub use indicators::{
    aggregate_propensity, build_profile, classify_staff, group_stats, ratio_to_f64, CollabProfile,
    Form, GroupStats, IndicatorError, StaffClass,
};
pub use oracle::{oracle_recount, OracleCounts};
pub use pipeline::{analyze, AnalysisConfig, AnalysisOutput, PipelineError};
pub use report::{
    coverage_csv, export, format_pct, profiles_csv, ratio_pct, table_file_name, table_propensity,
    table_staff, CohortResults, ComparisonCell, Format, PropensityRow, PropensityTable, Render,
    ReportError, StaffRow, StaffScope, StaffTable,
};
pub use roster::{
    attribute_explicit, attribute_heuristic, load_roster, merge_attributions, parse_byline,
    parse_threshold, sds_coverage_filter, Academic, AttributionError, AttributionIssue,
    AttributionSet, BylineName, HeuristicReport, Provenance, Rank, Roster, RosterError,
    RosterIssue, SdsCoverage,
};
pub use stats::{
    compare_ranks, default_star_thresholds, mann_whitney, stars, Method, MwTest, RankComparison,
    Sign, StatsError,
};
pub use synth::{
    generate, skew_report, GenConfig, Generated, GroundTruth, GroupConfig, RealizedCounts,
    SkewReport, SynthError,
};
