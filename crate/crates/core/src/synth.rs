//! Seeded synthetic population generator with known ground truth.
//!
//! Each academic owns one counter-mode RNG stream, so output is independent
//! of evaluation order and byte-identical for a given config. Publications
//! are built event-wise: every publication independently fires intramural,
//! extramural-domestic, extramural-foreign, and bare-collaboration events
//! from the academic's personal propensities, and each fired event adds a
//! co-author whose address realizes exactly that collaboration form.

use std::collections::BTreeMap;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF, Normal};
use thiserror::Error;

use crate::corpus::{valid_country, Address, BylineAuthor, Corpus, Publication, Window};
use crate::indicators::{aggregate_propensity, CollabProfile, Form, IndicatorError};
use crate::roster::{Academic, AttributionSet, Provenance, Rank, Roster};

use num::rational::Ratio;
use num::{BigInt, BigRational, Signed, Zero};

/// Productivity and propensity parameters for one (UDA, rank) cohort.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupConfig {
    pub uda: String,
    pub rank: Rank,
    /// Field code for coverage filtering; defaults to `{uda}/01`.
    #[serde(default)]
    pub sds: Option<String>,
    pub staff: u64,
    /// Median of the discretized lognormal publication count.
    pub median_pubs: f64,
    /// Lognormal shape; 0 makes every draw the rounded median.
    pub sigma: f64,
    /// Beta concentration for per-academic propensities; larger is tighter
    /// around the target mean.
    pub kappa: f64,
    /// Target mean collaboration propensities.
    pub c: f64,
    pub ci: f64,
    pub ced: f64,
    pub cef: f64,
}

fn default_universities() -> u64 {
    4
}

fn default_org_pool() -> u64 {
    12
}

/// Full generator configuration; deserializable from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub seed: u64,
    /// Publication year window, e.g. "2006-2010".
    pub window: String,
    pub home_country: String,
    #[serde(default = "default_universities")]
    pub universities: u64,
    /// Domestic non-university organizations available to extramural
    /// domestic events.
    #[serde(default = "default_org_pool")]
    pub domestic_orgs: u64,
    /// Foreign organizations available to extramural international events.
    #[serde(default = "default_org_pool")]
    pub foreign_orgs: u64,
    /// Gaussian-copula correlation between an academic's productivity draw
    /// and their personal C propensity.
    #[serde(default)]
    pub propensity_productivity_rho: f64,
    /// Chance an intramural event co-attributes a roster colleague instead
    /// of adding an unlisted same-university author.
    #[serde(default)]
    pub roster_coauthor_prob: f64,
    /// Chance a single-authored publication carries one extra affiliation
    /// for its only author.
    #[serde(default)]
    pub extra_affiliation_prob: f64,
    /// Chance a publication is an excluded document type (single-authored
    /// editorial material) instead of a countable one.
    #[serde(default)]
    pub excluded_doc_prob: f64,
    pub groups: Vec<GroupConfig>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthError {
    #[error("probability field {field} must lie in [0,1], got {value}")]
    BadProbability { field: String, value: f64 },
    #[error("correlation must lie in [-1,1], got {0}")]
    BadCorrelation(f64),
    #[error("bad window {0:?}: expected \"START-END\" with start <= end")]
    BadWindow(String),
    #[error("home country must be two uppercase ASCII letters, got {0:?}")]
    BadHomeCountry(String),
    #[error("config needs at least one group")]
    NoGroups,
    #[error("duplicate group for uda {uda:?} rank {rank:?}")]
    DuplicateGroup { uda: String, rank: Rank },
    #[error("group {uda}/{rank:?}: sds {sds:?} already belongs to uda {other:?}")]
    SdsUdaConflict { uda: String, rank: Rank, sds: String, other: String },
    #[error("group {uda}/{rank:?}: {form} target {value} exceeds the C target {c}")]
    FormExceedsC { uda: String, rank: Rank, form: String, value: f64, c: f64 },
    #[error("group {uda}/{rank:?}: median_pubs must be positive and finite, got {value}")]
    BadMedian { uda: String, rank: Rank, value: f64 },
    #[error("group {uda}/{rank:?}: sigma must be finite and >= 0, got {value}")]
    BadSigma { uda: String, rank: Rank, value: f64 },
    #[error("group {uda}/{rank:?}: kappa must be positive and finite, got {value}")]
    BadKappa { uda: String, rank: Rank, value: f64 },
    #[error("universities must be >= 1")]
    NoUniversities,
    #[error("extramural domestic events need domestic_orgs >= 1")]
    EmptyDomesticPool,
    #[error("extramural international events need foreign_orgs >= 1")]
    EmptyForeignPool,
    #[error("extra affiliations need domestic_orgs or foreign_orgs >= 1")]
    EmptyAffiliationPool,
    #[error(
        "intramural co-authors drawn from the roster need every university \
         to hold at least 2 academics; {staff} staff over {universities} \
         universities leaves a 1-person university"
    )]
    OnePersonUniversity { staff: u64, universities: u64 },
    #[error("generated record violated a corpus invariant: {0}")]
    BadRecord(String),
    #[error("skew report needs at least 2 productive academics, got {0}")]
    TooFewProductive(usize),
    #[error(transparent)]
    Indicator(#[from] IndicatorError),
}

impl GenConfig {
    pub fn parse_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    fn window(&self) -> Result<Window, SynthError> {
        self.window.parse().map_err(|_| SynthError::BadWindow(self.window.clone()))
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let prob = |field: &str, value: f64| {
            if !(0.0..=1.0).contains(&value) || value.is_nan() {
                Err(SynthError::BadProbability { field: field.into(), value })
            } else {
                Ok(())
            }
        };
        self.window()?;
        if !valid_country(&self.home_country) {
            return Err(SynthError::BadHomeCountry(self.home_country.clone()));
        }
        if self.universities == 0 {
            return Err(SynthError::NoUniversities);
        }
        let rho = self.propensity_productivity_rho;
        if !(-1.0..=1.0).contains(&rho) || rho.is_nan() {
            return Err(SynthError::BadCorrelation(rho));
        }
        prob("roster_coauthor_prob", self.roster_coauthor_prob)?;
        prob("extra_affiliation_prob", self.extra_affiliation_prob)?;
        prob("excluded_doc_prob", self.excluded_doc_prob)?;
        if self.groups.is_empty() {
            return Err(SynthError::NoGroups);
        }
        let mut seen: BTreeMap<(String, Rank), ()> = BTreeMap::new();
        let mut sds_uda: BTreeMap<String, String> = BTreeMap::new();
        for g in &self.groups {
            if seen.insert((g.uda.clone(), g.rank), ()).is_some() {
                return Err(SynthError::DuplicateGroup { uda: g.uda.clone(), rank: g.rank });
            }
            let sds = g.effective_sds();
            if let Some(other) = sds_uda.insert(sds.clone(), g.uda.clone()) {
                if other != g.uda {
                    return Err(SynthError::SdsUdaConflict {
                        uda: g.uda.clone(),
                        rank: g.rank,
                        sds,
                        other,
                    });
                }
            }
            for (name, value) in [("c", g.c), ("ci", g.ci), ("ced", g.ced), ("cef", g.cef)] {
                prob(&format!("{}/{:?}.{name}", g.uda, g.rank), value)?;
            }
            for (form, value) in [("ci", g.ci), ("ced", g.ced), ("cef", g.cef)] {
                if value > g.c {
                    return Err(SynthError::FormExceedsC {
                        uda: g.uda.clone(),
                        rank: g.rank,
                        form: form.into(),
                        value,
                        c: g.c,
                    });
                }
            }
            if !(g.median_pubs.is_finite() && g.median_pubs > 0.0) {
                return Err(SynthError::BadMedian { uda: g.uda.clone(), rank: g.rank, value: g.median_pubs });
            }
            if !(g.sigma.is_finite() && g.sigma >= 0.0) {
                return Err(SynthError::BadSigma { uda: g.uda.clone(), rank: g.rank, value: g.sigma });
            }
            if !(g.kappa.is_finite() && g.kappa > 0.0) {
                return Err(SynthError::BadKappa { uda: g.uda.clone(), rank: g.rank, value: g.kappa });
            }
        }
        if self.groups.iter().any(|g| g.ced > 0.0) && self.domestic_orgs == 0 {
            return Err(SynthError::EmptyDomesticPool);
        }
        if self.groups.iter().any(|g| g.cef > 0.0) && self.foreign_orgs == 0 {
            return Err(SynthError::EmptyForeignPool);
        }
        if self.extra_affiliation_prob > 0.0 && self.domestic_orgs == 0 && self.foreign_orgs == 0 {
            return Err(SynthError::EmptyAffiliationPool);
        }
        let staff: u64 = self.groups.iter().map(|g| g.staff).sum();
        let roster_intramural =
            self.roster_coauthor_prob > 0.0 && self.groups.iter().any(|g| g.ci > 0.0);
        if roster_intramural && staff / self.universities < 2 {
            return Err(SynthError::OnePersonUniversity { staff, universities: self.universities });
        }
        Ok(())
    }
}

impl GroupConfig {
    pub fn effective_sds(&self) -> String {
        self.sds.clone().unwrap_or_else(|| format!("{}/01", self.uda))
    }
}

/// Realized per-academic counts over countable (allowlisted) publications,
/// including increments from co-attributed colleagues' publications.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RealizedCounts {
    pub p: u64,
    pub cp: u64,
    pub cip: u64,
    pub cedp: u64,
    pub cefp: u64,
}

/// What the generator intended and what it actually produced.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    /// Configured propensity targets per (UDA, rank).
    pub targets: BTreeMap<(String, Rank), [f64; 4]>,
    /// Realized counts per academic, recountable from the emitted corpus.
    pub realized: BTreeMap<String, RealizedCounts>,
    /// Academics whose bare-collaboration rate was clamped at zero because
    /// their drawn form propensities already exceeded their C draw.
    pub clamped_bare: u64,
    /// Intramural events that fell back to an unlisted co-author because the
    /// drawn colleague's byline would collide with the focal author's.
    pub coauthor_fallbacks: u64,
}

#[derive(Debug, Clone)]
pub struct Generated {
    pub corpus: Corpus,
    pub roster: Roster,
    pub attributions: AttributionSet,
    pub truth: GroundTruth,
}

const SURNAMES: [&str; 40] = [
    "Rossi", "Russo", "Ferrari", "Esposito", "Bianchi", "Romano", "Colombo", "Ricci", "Marino",
    "Greco", "Bruno", "Gallo", "Conti", "Deluca", "Mancini", "Costa", "Giordano", "Rizzo",
    "Lombardi", "Moretti", "Barbieri", "Fontana", "Santoro", "Mariani", "Rinaldi", "Caruso",
    "Ferrara", "Galli", "Martini", "Leone", "Longo", "Gentile", "Martinelli", "Vitale", "Lombardo",
    "Serra", "Coppola", "Desantis", "Amato", "Marchetti",
];

const GIVEN: [&str; 20] = [
    "Maria", "Giulia", "Luca", "Anna", "Paolo", "Sara", "Elena", "Pietro", "Laura", "Marco",
    "Francesca", "Andrea", "Chiara", "Giovanni", "Valentina", "Stefano", "Silvia", "Roberto",
    "Martina", "Davide",
];

const FOREIGN_COUNTRIES: [&str; 20] = [
    "US", "DE", "FR", "GB", "JP", "CN", "ES", "NL", "SE", "CH", "AU", "CA", "BR", "KR", "AT",
    "BE", "DK", "FI", "NO", "PT",
];

const COUNTABLE_TYPES: [&str; 4] = ["article", "review", "letter", "proceedings-paper"];

fn surname_of(ordinal: usize) -> String {
    let base = SURNAMES[ordinal % SURNAMES.len()];
    let wrap = ordinal / SURNAMES.len();
    if wrap == 0 {
        base.to_string()
    } else {
        format!("{base}{wrap}")
    }
}

fn byline_of(surname: &str, given: &str) -> String {
    let initial = given.chars().next().expect("nonempty given name");
    format!("{surname}, {initial}.")
}

/// Draws on one academic's private stream; all randomness flows through
/// open-unit uniforms so distribution inversion is explicit.
struct Draw {
    rng: ChaCha8Rng,
}

impl Draw {
    fn for_academic(seed: u64, ordinal: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(ordinal);
        Draw { rng }
    }

    /// Uniform on the open interval (0, 1); 53-bit resolution.
    fn unit(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) as f64 + 0.5) / (1u64 << 53) as f64
    }

    fn below(&mut self, p: f64) -> bool {
        self.unit() < p
    }

    fn index(&mut self, n: u64) -> u64 {
        ((self.unit() * n as f64) as u64).min(n - 1)
    }
}

/// Per-academic propensity draw: Beta with the target mean, point masses at
/// the ends so exact 0/1 targets stay exact.
fn draw_propensity(u: f64, mean: f64, kappa: f64) -> f64 {
    if mean <= 0.0 {
        return 0.0;
    }
    if mean >= 1.0 {
        return 1.0;
    }
    let beta = Beta::new(mean * kappa, (1.0 - mean) * kappa).expect("validated parameters");
    beta.inverse_cdf(u)
}

struct Person {
    academic: Academic,
    university_ordinal: u64,
    group_idx: usize,
}

/// Generates a roster, corpus, explicit attributions, and ground truth from
/// a validated config. Deterministic: each academic draws from their own
/// seeded stream, so output is independent of traversal order.
pub fn generate(config: &GenConfig) -> Result<Generated, SynthError> {
    config.validate()?;
    let window = config.window()?;
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let rho = config.propensity_productivity_rho;

    // Universities U01.., domestic pool D01.., foreign pool F01.. with
    // disjoint identifiers so organization identity is unambiguous.
    let university = |i: u64| Address {
        org_name: format!("University {:02}", i + 1),
        org_id: Some(format!("U{:02}", i + 1)),
        country: config.home_country.clone(),
    };
    let domestic = |i: u64| Address {
        org_name: format!("Institute D{:02}", i + 1),
        org_id: Some(format!("D{:02}", i + 1)),
        country: config.home_country.clone(),
    };
    let foreign = |i: u64| {
        let countries: Vec<&str> =
            FOREIGN_COUNTRIES.iter().copied().filter(|c| *c != config.home_country).collect();
        Address {
            org_name: format!("Institute F{:02}", i + 1),
            org_id: Some(format!("F{:02}", i + 1)),
            country: countries[(i % countries.len() as u64) as usize].to_string(),
        }
    };

    // Roster layout: groups in config order, academics round-robin over
    // universities by global ordinal.
    let mut people: Vec<Person> = Vec::new();
    let mut roster = Roster::default();
    let mut targets = BTreeMap::new();
    for (group_idx, group) in config.groups.iter().enumerate() {
        targets.insert((group.uda.clone(), group.rank), [group.c, group.ci, group.ced, group.cef]);
        for _ in 0..group.staff {
            let ordinal = people.len();
            let university_ordinal = ordinal as u64 % config.universities;
            let academic = Academic {
                academic_id: format!("A{:05}", ordinal + 1),
                surname: surname_of(ordinal),
                given_names: GIVEN[ordinal % GIVEN.len()].to_string(),
                rank: group.rank,
                sds: group.effective_sds(),
                uda: group.uda.clone(),
                university_id: format!("U{:02}", university_ordinal + 1),
            };
            roster.push(academic.clone()).map_err(|e| SynthError::BadRecord(e.to_string()))?;
            people.push(Person { academic, university_ordinal, group_idx });
        }
    }

    // Same-university colleague index for roster co-authorship.
    let mut by_university: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    for (idx, person) in people.iter().enumerate() {
        by_university.entry(person.university_ordinal).or_default().push(idx);
    }

    let mut corpus =
        Corpus::new(window, &config.home_country).map_err(|e| SynthError::BadRecord(e.to_string()))?;
    let mut attributions = AttributionSet::default();
    let mut realized: BTreeMap<String, RealizedCounts> =
        people.iter().map(|p| (p.academic.academic_id.clone(), RealizedCounts::default())).collect();
    let mut clamped_bare = 0u64;
    let mut coauthor_fallbacks = 0u64;
    // Deferred colleague increments: (colleague idx, domestic, foreign).
    let mut colleague_hits: Vec<(usize, bool, bool)> = Vec::new();

    let span = (window.end - window.start + 1) as u64;
    for (ordinal, person) in people.iter().enumerate() {
        let group = &config.groups[person.group_idx];
        let mut draw = Draw::for_academic(config.seed, ordinal as u64);

        // Fixed draw order per academic: productivity normal, copula
        // normal, then C/CI/CED/CEF propensities.
        let z1 = normal.inverse_cdf(draw.unit());
        let w = normal.inverse_cdf(draw.unit());
        let z2 = rho * z1 + (1.0 - rho * rho).sqrt() * w;
        let theta_c = draw_propensity(normal.cdf(z2), group.c, group.kappa);
        let theta_ci = draw_propensity(draw.unit(), group.ci, group.kappa);
        let theta_ced = draw_propensity(draw.unit(), group.ced, group.kappa);
        let theta_cef = draw_propensity(draw.unit(), group.cef, group.kappa);

        // Bare-collaboration rate solving P(any event) = theta_c; clamped
        // at zero when the form draws alone already exceed the C draw.
        let none = (1.0 - theta_ci) * (1.0 - theta_ced) * (1.0 - theta_cef);
        let theta_bare = if none <= 0.0 { 0.0 } else { 1.0 - (1.0 - theta_c) / none };
        let theta_bare = if theta_bare < 0.0 {
            clamped_bare += 1;
            0.0
        } else {
            theta_bare.min(1.0)
        };

        // Discretized lognormal publication count; the cap is an overflow
        // guard far beyond any plausible draw.
        let p_raw = (group.median_pubs.ln() + group.sigma * z1).exp();
        let p = p_raw.round().min(1e6) as u64;

        let focal_byline = byline_of(&person.academic.surname, &person.academic.given_names);
        let focal_university = university(person.university_ordinal);
        let colleagues = &by_university[&person.university_ordinal];
        let mut peer_seq = 0u64;

        for j in 0..p {
            let pub_id = format!("{}-{:04}", person.academic.academic_id, j + 1);
            let year = window.start + draw.index(span) as i32;
            let excluded = draw.below(config.excluded_doc_prob);
            let doc_type = if excluded {
                "editorial-material".to_string()
            } else {
                COUNTABLE_TYPES[draw.index(COUNTABLE_TYPES.len() as u64) as usize].to_string()
            };

            let mut addresses = vec![focal_university.clone()];
            let mut focal_addr = vec![0usize];
            let mut authors = Vec::new();
            let mut copub_colleague: Option<usize> = None;
            let (mut fire_ci, mut fire_ced, mut fire_cef, mut fire_bare) =
                (false, false, false, false);

            if !excluded {
                fire_ci = draw.below(theta_ci);
                fire_ced = draw.below(theta_ced);
                fire_cef = draw.below(theta_cef);
                fire_bare = draw.below(theta_bare);
            }

            let mut peer = |addr: Vec<usize>| {
                // Unlisted co-authors use a reserved name family so they can
                // never collide with a roster byline.
                let name = format!("Peer{}x{}, Z.", ordinal + 1, peer_seq);
                peer_seq += 1;
                BylineAuthor { name, address_idxs: addr }
            };

            if fire_ci {
                let mut fallback = true;
                if colleagues.len() > 1 && draw.below(config.roster_coauthor_prob) {
                    // Uniform over colleagues other than the focal academic:
                    // draw among the first len-1 slots and remap a self-hit
                    // to the last slot.
                    let pick = draw.index(colleagues.len() as u64 - 1) as usize;
                    let colleague_idx = if colleagues[pick] == ordinal {
                        colleagues[colleagues.len() - 1]
                    } else {
                        colleagues[pick]
                    };
                    let colleague = &people[colleague_idx].academic;
                    let byline = byline_of(&colleague.surname, &colleague.given_names);
                    if crate::corpus::normalize(&byline) != crate::corpus::normalize(&focal_byline) {
                        authors.push(BylineAuthor { name: byline, address_idxs: vec![0] });
                        copub_colleague = Some(colleague_idx);
                        fallback = false;
                    } else {
                        coauthor_fallbacks += 1;
                    }
                }
                if fallback {
                    let a = peer(vec![0]);
                    authors.push(a);
                }
            }
            if fire_ced {
                addresses.push(domestic(draw.index(config.domestic_orgs)));
                let a = peer(vec![addresses.len() - 1]);
                authors.push(a);
            }
            if fire_cef {
                addresses.push(foreign(draw.index(config.foreign_orgs)));
                let a = peer(vec![addresses.len() - 1]);
                authors.push(a);
            }
            if fire_bare {
                let a = peer(vec![]);
                authors.push(a);
            }

            let collab = fire_ci || fire_ced || fire_cef || fire_bare;
            if !collab && draw.below(config.extra_affiliation_prob) {
                // Multi-affiliation solo publication: extra address on the
                // only author, drawn half domestic, half foreign.
                let org = if config.foreign_orgs > 0
                    && (config.domestic_orgs == 0 || draw.below(0.5))
                {
                    foreign(draw.index(config.foreign_orgs))
                } else {
                    domestic(draw.index(config.domestic_orgs))
                };
                addresses.push(org);
                focal_addr.push(addresses.len() - 1);
            }

            authors.insert(0, BylineAuthor { name: focal_byline.clone(), address_idxs: focal_addr });
            let publication = Publication {
                pub_id: pub_id.clone(),
                year,
                doc_type,
                authors,
                addresses,
            };
            corpus.push(publication).map_err(|e| SynthError::BadRecord(e.to_string()))?;
            attributions.insert(&person.academic.academic_id, &pub_id, Provenance::Explicit);
            if let Some(colleague_idx) = copub_colleague {
                attributions.insert(
                    &people[colleague_idx].academic.academic_id,
                    &pub_id,
                    Provenance::Explicit,
                );
                if !excluded {
                    colleague_hits.push((colleague_idx, fire_ced, fire_cef));
                }
            }

            if !excluded {
                let counts = realized.get_mut(&person.academic.academic_id).expect("rostered");
                counts.p += 1;
                counts.cp += u64::from(collab);
                counts.cip += u64::from(fire_ci);
                counts.cedp += u64::from(fire_ced);
                counts.cefp += u64::from(fire_cef);
            }
        }
    }

    // A co-attributed colleague shares the publication's flags exactly: it
    // is collaborative, intramural for both (the focal author is attributed
    // at the same university), and extramural per its addresses.
    for (colleague_idx, domestic, foreign) in colleague_hits {
        let id = &people[colleague_idx].academic.academic_id;
        let counts = realized.get_mut(id).expect("rostered");
        counts.p += 1;
        counts.cp += 1;
        counts.cip += 1;
        counts.cedp += u64::from(domestic);
        counts.cefp += u64::from(foreign);
    }

    Ok(Generated {
        corpus,
        roster,
        attributions,
        truth: GroundTruth { targets, realized, clamped_bare, coauthor_fallbacks },
    })
}

/// Output-concentration curve plus, per form, the gap between the pooled
/// aggregate rate and the unweighted mean of individual rates.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewReport {
    /// Cumulative (fraction of productive academics, fraction of output),
    /// academics sorted by descending publication count.
    pub curve: Vec<(Ratio<u64>, Ratio<u64>)>,
    /// (aggregate rate, mean rate, |gap|) per form.
    pub gaps: Vec<(Form, BigRational, BigRational, BigRational)>,
}

impl SkewReport {
    /// Output share of the top `fraction` of academics (by count,
    /// rounded up).
    pub fn top_share(&self, fraction: Ratio<u64>) -> Ratio<u64> {
        let n = self.curve.len() as u64;
        let k = (fraction * n).ceil().to_integer().clamp(1, n);
        self.curve[k as usize - 1].1
    }
}

pub fn skew_report(profiles: &[&CollabProfile]) -> Result<SkewReport, SynthError> {
    if profiles.len() < 2 {
        return Err(SynthError::TooFewProductive(profiles.len()));
    }
    let mut by_output: Vec<&CollabProfile> = profiles.to_vec();
    by_output.sort_by(|a, b| b.p.cmp(&a.p).then_with(|| a.academic_id.cmp(&b.academic_id)));
    let total: u64 = by_output.iter().map(|p| p.p).sum();
    let n = by_output.len() as u64;
    let mut cumulative = 0u64;
    let curve = by_output
        .iter()
        .enumerate()
        .map(|(i, profile)| {
            cumulative += profile.p;
            (Ratio::new(i as u64 + 1, n), Ratio::new(cumulative, total))
        })
        .collect();

    let mut gaps = Vec::new();
    for form in Form::ALL {
        let aggregate = aggregate_propensity(profiles, form)?;
        let aggregate =
            BigRational::new(BigInt::from(*aggregate.numer()), BigInt::from(*aggregate.denom()));
        let mut mean = BigRational::zero();
        for profile in profiles {
            let r = profile.ratio(form);
            mean += BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()));
        }
        mean /= BigRational::from_integer(BigInt::from(profiles.len() as u64));
        let gap = (&aggregate - &mean).abs();
        gaps.push((form, aggregate, mean, gap));
    }
    Ok(SkewReport { curve, gaps })
}
