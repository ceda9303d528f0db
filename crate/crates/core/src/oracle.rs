//! Brute-force recount of every per-academic indicator.
//!
//! The counting rules are restated here from scratch, on purpose: this
//! module must not call into the classification, indicator, or name-parsing
//! code it cross-checks, so agreement between the two paths is evidence
//! rather than tautology. Everything is naive nested loops over the full
//! (academic, publication) grid.

use std::collections::{BTreeMap, BTreeSet};

use crate::corpus::{Address, Corpus, Publication};
use crate::roster::{Academic, AttributionSet, Roster};

/// Independent tally for one academic over countable publications.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OracleCounts {
    pub p: u64,
    pub cp: u64,
    pub cip: u64,
    pub cedp: u64,
    pub cefp: u64,
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl OracleCounts {
    /// Reduced (numerator, denominator) rates in C, CI, CED, CEF order;
    /// None for a non-productive academic.
    pub fn rates(&self) -> Option<[(u64, u64); 4]> {
        if self.p == 0 {
            return None;
        }
        Some([self.cp, self.cip, self.cedp, self.cefp].map(|count| {
            let g = gcd(count, self.p).max(1);
            (count / g, self.p / g)
        }))
    }
}

/// Whitespace-collapsed, lowercased text.
fn fold(text: &str) -> String {
    let mut collapsed = String::new();
    let mut pending_space = false;
    for ch in text.chars() {
        if ch.is_whitespace() {
            pending_space = !collapsed.is_empty();
        } else {
            if pending_space {
                collapsed.push(' ');
                pending_space = false;
            }
            collapsed.push(ch);
        }
    }
    collapsed.to_lowercase()
}

/// Organization identity: the id when present and nonempty, otherwise the
/// folded name.
fn org_identity(address: &Address) -> String {
    if let Some(id) = &address.org_id {
        if !id.is_empty() {
            return id.clone();
        }
    }
    fold(&address.org_name)
}

/// True when a token is nothing but initial markers ("M.", "M.G.", "J-P").
fn initials_only(token: &str) -> bool {
    let mut any_alpha = false;
    for segment in token.split(['.', '-']) {
        let mut chars = segment.chars();
        match (chars.next(), chars.next()) {
            (None, _) => {}
            (Some(c), None) if c.is_alphabetic() => any_alpha = true,
            _ => return false,
        }
    }
    any_alpha
}

/// Surname of a byline: the part before the comma, or, without a comma,
/// everything up to the trailing initial tokens.
fn byline_surname(raw: &str) -> String {
    if let Some(pos) = raw.find(',') {
        return fold(&raw[..pos]);
    }
    let tokens: Vec<&str> = raw.split_whitespace().collect();
    let mut keep = tokens.len();
    while keep > 1 && initials_only(tokens[keep - 1]) {
        keep -= 1;
    }
    fold(&tokens[..keep].join(" "))
}

fn distinct_author_name_count(publication: &Publication) -> usize {
    let mut seen: Vec<String> = Vec::new();
    for author in &publication.authors {
        let name = fold(&author.name);
        if !seen.contains(&name) {
            seen.push(name);
        }
    }
    seen.len()
}

/// True when the byline's address links place an author other than the
/// focal academic at the focal university.
fn second_author_at_university(publication: &Publication, focal: &Academic) -> bool {
    let focal_surname = fold(&focal.surname);
    let mut same_surname_links: Vec<String> = Vec::new();
    for author in &publication.authors {
        let linked_here = author
            .address_idxs
            .iter()
            .any(|&i| org_identity(&publication.addresses[i]) == focal.university_id);
        if !linked_here {
            continue;
        }
        if byline_surname(&author.name) != focal_surname {
            return true;
        }
        let name = fold(&author.name);
        if !same_surname_links.contains(&name) {
            same_surname_links.push(name);
        }
    }
    same_surname_links.len() >= 2
}

/// Recomputes p, cp, cip, cedp, cefp for every roster academic by scanning
/// the whole corpus per academic. Only publications whose document type is
/// in `allowlist` count.
pub fn oracle_recount(
    roster: &Roster,
    corpus: &Corpus,
    attributions: &AttributionSet,
    home_country: &str,
    allowlist: &BTreeSet<String>,
) -> BTreeMap<String, OracleCounts> {
    let pairs: BTreeSet<(&str, &str)> =
        attributions.iter().map(|(academic, pub_id, _)| (academic, pub_id)).collect();
    let mut out = BTreeMap::new();
    for academic in roster.iter() {
        let mut counts = OracleCounts::default();
        for publication in corpus.iter() {
            if !allowlist.contains(&publication.doc_type) {
                continue;
            }
            if !pairs.contains(&(academic.academic_id.as_str(), publication.pub_id.as_str())) {
                continue;
            }
            counts.p += 1;
            if distinct_author_name_count(publication) < 2 {
                continue;
            }
            counts.cp += 1;

            let mut colleague_attributed = false;
            for other in roster.iter() {
                if other.academic_id != academic.academic_id
                    && other.university_id == academic.university_id
                    && pairs.contains(&(other.academic_id.as_str(), publication.pub_id.as_str()))
                {
                    colleague_attributed = true;
                    break;
                }
            }
            if colleague_attributed || second_author_at_university(publication, academic) {
                counts.cip += 1;
            }

            let mut domestic = false;
            let mut international = false;
            for address in &publication.addresses {
                if address.country == home_country {
                    if org_identity(address) != academic.university_id {
                        domestic = true;
                    }
                } else {
                    international = true;
                }
            }
            counts.cedp += u64::from(domestic);
            counts.cefp += u64::from(international);
        }
        out.insert(academic.academic_id.clone(), counts);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::classify;
    use crate::corpus::{default_doc_allowlist, parse_corpus, Window};
    use crate::indicators::{build_profile, Form};
    use crate::roster::{attribute_explicit, load_roster, Rank};
    use crate::synth::{generate, GenConfig, GroupConfig};

    #[test]
    fn empty_corpus_leaves_every_academic_non_productive() {
        let roster_lines = concat!(
            r#"{"id":"A1","surname":"Rossi","given":"Maria","rank":"full","sds":"MED/01","uda":"MED","university":"UROM"}"#,
            "\n",
        );
        let (roster, _) = load_roster(roster_lines.as_bytes()).unwrap();
        let corpus = Corpus::new(Window::new(2006, 2010).unwrap(), "IT").unwrap();
        let out = oracle_recount(
            &roster,
            &corpus,
            &AttributionSet::default(),
            "IT",
            &default_doc_allowlist(),
        );
        assert_eq!(out["A1"], OracleCounts::default());
        assert_eq!(out["A1"].rates(), None);
    }

    #[test]
    fn hand_counted_three_publication_scenario() {
        let corpus_lines = concat!(
            // Collaborative, intramural via address links, plus a foreign
            // address.
            r#"{"id":"P1","year":2007,"type":"article","authors":[{"name":"Rossi, M.","addr":[0]},{"name":"Keller, T.","addr":[1]},{"name":"Bruni, F.","addr":[0]}],"addresses":[{"org":"U Rome","org_id":"UROM","country":"IT"},{"org":"ETH","org_id":"ETH","country":"CH"}]}"#, "\n",
            // Solo with two affiliations: not a collaboration.
            r#"{"id":"P2","year":2008,"type":"article","authors":[{"name":"Rossi, M.","addr":[0,1]}],"addresses":[{"org":"U Rome","org_id":"UROM","country":"IT"},{"org":"CNR","org_id":"CNR","country":"IT"}]}"#, "\n",
            // Excluded document type: never counted.
            r#"{"id":"P3","year":2009,"type":"editorial-material","authors":[{"name":"Rossi, M.","addr":[0]},{"name":"Verdi, L.","addr":[0]}],"addresses":[{"org":"U Rome","org_id":"UROM","country":"IT"}]}"#, "\n",
        );
        let roster_lines = concat!(
            r#"{"id":"A1","surname":"Rossi","given":"Maria","rank":"full","sds":"MED/01","uda":"MED","university":"UROM"}"#,
            "\n",
        );
        let pairs = concat!(
            r#"{"academic":"A1","pub":"P1"}"#, "\n",
            r#"{"academic":"A1","pub":"P2"}"#, "\n",
            r#"{"academic":"A1","pub":"P3"}"#, "\n",
        );
        let (corpus, _) =
            parse_corpus(corpus_lines.as_bytes(), Window::new(2006, 2010).unwrap(), "IT").unwrap();
        let (roster, _) = load_roster(roster_lines.as_bytes()).unwrap();
        let (set, issues) = attribute_explicit(&corpus, &roster, pairs.as_bytes()).unwrap();
        assert!(issues.is_empty());
        let out = oracle_recount(&roster, &corpus, &set, "IT", &default_doc_allowlist());
        let counts = out["A1"];
        assert_eq!(counts, OracleCounts { p: 2, cp: 1, cip: 1, cedp: 0, cefp: 1 });
        assert_eq!(
            counts.rates().unwrap(),
            [(1, 2), (1, 2), (0, 1), (1, 2)]
        );
    }

    #[test]
    fn oracle_agrees_with_the_pipeline_path_on_generated_data() {
        let cfg = GenConfig {
            seed: 23,
            window: "2006-2010".into(),
            home_country: "IT".into(),
            universities: 3,
            domestic_orgs: 6,
            foreign_orgs: 6,
            propensity_productivity_rho: 0.4,
            roster_coauthor_prob: 0.5,
            extra_affiliation_prob: 0.1,
            excluded_doc_prob: 0.1,
            groups: vec![
                GroupConfig {
                    uda: "MED".into(),
                    rank: Rank::Full,
                    sds: None,
                    staff: 25,
                    median_pubs: 3.0,
                    sigma: 0.8,
                    kappa: 6.0,
                    c: 0.6,
                    ci: 0.3,
                    ced: 0.25,
                    cef: 0.15,
                },
                GroupConfig {
                    uda: "BIO".into(),
                    rank: Rank::Assistant,
                    sds: None,
                    staff: 25,
                    median_pubs: 2.0,
                    sigma: 0.8,
                    kappa: 6.0,
                    c: 0.4,
                    ci: 0.2,
                    ced: 0.1,
                    cef: 0.05,
                },
            ],
        };
        let out = generate(&cfg).unwrap();
        let allow = default_doc_allowlist();
        let oracle = oracle_recount(&out.roster, &out.corpus, &out.attributions, "IT", &allow);

        for academic in out.roster.iter() {
            // Pipeline path: classify each attributed countable publication,
            // then fold the flags into a profile.
            let mut flags = Vec::new();
            for pub_id in out.attributions.pubs_of(&academic.academic_id) {
                let publication = out.corpus.get(pub_id).unwrap();
                if !allow.contains(&publication.doc_type) {
                    continue;
                }
                let attributed: Vec<&Academic> = out
                    .attributions
                    .academics_on(pub_id)
                    .map(|id| out.roster.get(id).unwrap())
                    .collect();
                flags.push(classify(publication, academic, &attributed, "IT").unwrap());
            }
            let counts = oracle[&academic.academic_id];
            let realized = out.truth.realized[&academic.academic_id];
            if flags.is_empty() {
                assert_eq!(counts, OracleCounts::default());
                assert_eq!(realized.p, 0);
                continue;
            }
            let profile = build_profile(&academic.academic_id, &flags).unwrap();
            assert_eq!(
                (counts.p, counts.cp, counts.cip, counts.cedp, counts.cefp),
                (profile.p, profile.cp, profile.cip, profile.cedp, profile.cefp),
                "oracle vs pipeline for {}",
                academic.academic_id
            );
            assert_eq!(
                (realized.p, realized.cp, realized.cip, realized.cedp, realized.cefp),
                (profile.p, profile.cp, profile.cip, profile.cedp, profile.cefp),
                "ground truth vs pipeline for {}",
                academic.academic_id
            );
            let rates = counts.rates().unwrap();
            for (idx, form) in Form::ALL.into_iter().enumerate() {
                let ratio = profile.ratio(form);
                assert_eq!(rates[idx], (*ratio.numer(), *ratio.denom()));
            }
        }
    }
}
