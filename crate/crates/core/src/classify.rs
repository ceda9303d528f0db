//! Per-(academic, publication) classification into collaboration forms.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::corpus::{normalize, Publication};
use crate::roster::{parse_byline, Academic};

/// Which collaboration forms one publication represents for one academic.
/// The flags are not mutually exclusive; a publication may set several.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CollabFlags {
    pub is_collab: bool,
    pub intramural: bool,
    pub extramural_domestic: bool,
    pub extramural_international: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassifyError {
    #[error("academic {academic} is not attributed to publication {pub_id}")]
    FocalNotAttributed { academic: String, pub_id: String },
}

/// Classifies `publication` from `focal`'s perspective.
///
/// `attributed` must hold every roster academic attributed to the
/// publication, including `focal`.
///
/// Rules:
/// - collaboration iff the byline has >= 2 distinct normalized names
///   (affiliation count is irrelevant, so a single author with several
///   addresses is never a collaboration);
/// - intramural iff another author is associated with focal's university,
///   either (a) another attributed academic with the same university, or
///   (b) the byline's address links place a second author there;
/// - extramural domestic iff some address is in the home country but is not
///   focal's university;
/// - extramural international iff some address is outside the home country.
pub fn classify(
    publication: &Publication,
    focal: &Academic,
    attributed: &[&Academic],
    home_country: &str,
) -> Result<CollabFlags, ClassifyError> {
    if !attributed.iter().any(|a| a.academic_id == focal.academic_id) {
        return Err(ClassifyError::FocalNotAttributed {
            academic: focal.academic_id.clone(),
            pub_id: publication.pub_id.clone(),
        });
    }
    let is_collab = publication.distinct_author_count() >= 2;
    if !is_collab {
        return Ok(CollabFlags::default());
    }

    let focal_university = &focal.university_id;
    let colleague_attributed = attributed.iter().any(|a| {
        a.academic_id != focal.academic_id && a.university_id == *focal_university
    });
    let intramural = colleague_attributed || byline_places_second_author(publication, focal);

    let mut extramural_domestic = false;
    let mut extramural_international = false;
    for address in &publication.addresses {
        if address.country == home_country {
            extramural_domestic |= address.identity() != *focal_university;
        } else {
            extramural_international = true;
        }
    }

    Ok(CollabFlags { is_collab, intramural, extramural_domestic, extramural_international })
}

/// True when the byline's own address links show an author at focal's
/// university who cannot be focal: either two distinct linked names (at most
/// one of them can be focal), or a linked name whose surname differs from
/// focal's.
fn byline_places_second_author(publication: &Publication, focal: &Academic) -> bool {
    let focal_surname = normalize(&focal.surname);
    let mut linked_names = BTreeSet::new();
    for author in &publication.authors {
        let at_focal_university = author
            .address_idxs
            .iter()
            .any(|&i| publication.addresses[i].identity() == focal.university_id);
        if !at_focal_university {
            continue;
        }
        if parse_byline(&author.name).surname != focal_surname {
            return true;
        }
        linked_names.insert(normalize(&author.name));
    }
    linked_names.len() >= 2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Address, BylineAuthor};
    use crate::roster::Rank;

    fn academic(id: &str, surname: &str, univ: &str) -> Academic {
        Academic {
            academic_id: id.into(),
            surname: surname.into(),
            given_names: "Maria".into(),
            rank: Rank::Full,
            sds: "MED/01".into(),
            uda: "MED".into(),
            university_id: univ.into(),
        }
    }

    fn address(org_id: &str, country: &str) -> Address {
        Address { org_name: format!("Org {org_id}"), org_id: Some(org_id.into()), country: country.into() }
    }

    fn publication(authors: Vec<(&str, Vec<usize>)>, addresses: Vec<Address>) -> Publication {
        Publication {
            pub_id: "P1".into(),
            year: 2007,
            doc_type: "article".into(),
            authors: authors
                .into_iter()
                .map(|(name, address_idxs)| BylineAuthor { name: name.into(), address_idxs })
                .collect(),
            addresses,
        }
    }

    #[test]
    fn single_author_with_two_affiliations_is_not_collaboration() {
        let focal = academic("A1", "Rossi", "UA");
        let publication = publication(
            vec![("Rossi, M.", vec![0, 1])],
            vec![address("UA", "IT"), address("UB", "US")],
        );
        let flags = classify(&publication, &focal, &[&focal], "IT").unwrap();
        assert_eq!(flags, CollabFlags::default());
    }

    #[test]
    fn attributed_colleague_at_same_university_is_intramural() {
        let focal = academic("A1", "Rossi", "UA");
        let other = academic("A2", "Bianchi", "UA");
        let publication = publication(
            vec![("Rossi, M.", vec![0]), ("Bianchi, G.", vec![0])],
            vec![address("UA", "IT")],
        );
        let flags = classify(&publication, &focal, &[&focal, &other], "IT").unwrap();
        assert_eq!(
            flags,
            CollabFlags {
                is_collab: true,
                intramural: true,
                extramural_domestic: false,
                extramural_international: false
            }
        );
    }

    #[test]
    fn multi_form_publication_sets_every_matching_flag() {
        let focal = academic("A1", "Rossi", "UA");
        let publication = publication(
            vec![("Rossi, M.", vec![0]), ("Ricci, F.", vec![1]), ("Smith, J.", vec![2])],
            vec![address("UA", "IT"), address("CNR", "IT"), address("MIT", "US")],
        );
        let flags = classify(&publication, &focal, &[&focal], "IT").unwrap();
        assert_eq!(
            flags,
            CollabFlags {
                is_collab: true,
                intramural: false,
                extramural_domestic: true,
                extramural_international: true
            }
        );
    }

    #[test]
    fn two_byline_links_to_focal_university_imply_intramural() {
        // The co-author is not in the roster, but the address links place a
        // second author at focal's university.
        let focal = academic("A1", "Verdi", "UA");
        let publication = publication(
            vec![("Verdi, L.", vec![0]), ("Lombardi, G.", vec![0])],
            vec![address("UA", "IT")],
        );
        let flags = classify(&publication, &focal, &[&focal], "IT").unwrap();
        assert!(flags.intramural);
    }

    #[test]
    fn linked_author_with_other_surname_implies_intramural_even_if_focal_unlinked() {
        let focal = academic("A1", "Verdi", "UA");
        let publication = publication(
            vec![("Verdi, L.", vec![]), ("Lombardi, G.", vec![0])],
            vec![address("UA", "IT")],
        );
        let flags = classify(&publication, &focal, &[&focal], "IT").unwrap();
        assert!(flags.intramural);
    }

    #[test]
    fn lone_link_matching_focal_surname_is_not_intramural() {
        let focal = academic("A1", "Verdi", "UA");
        let publication = publication(
            vec![("Verdi, L.", vec![0]), ("Ricci, F.", vec![1])],
            vec![address("UA", "IT"), address("CNR", "IT")],
        );
        let flags = classify(&publication, &focal, &[&focal], "IT").unwrap();
        assert!(!flags.intramural);
        assert!(flags.extramural_domestic);
    }

    #[test]
    fn focal_university_address_alone_is_not_domestic_extramural() {
        let focal = academic("A1", "Rossi", "UA");
        let publication = publication(
            vec![("Rossi, M.", vec![0]), ("Novak, P.", vec![1])],
            vec![address("UA", "IT"), address("PRG", "CZ")],
        );
        let flags = classify(&publication, &focal, &[&focal], "IT").unwrap();
        assert!(!flags.extramural_domestic);
        assert!(flags.extramural_international);
    }

    #[test]
    fn focal_must_be_attributed() {
        let focal = academic("A1", "Rossi", "UA");
        let other = academic("A2", "Bianchi", "UA");
        let publication = publication(vec![("Bianchi, G.", vec![0])], vec![address("UA", "IT")]);
        let err = classify(&publication, &focal, &[&other], "IT").unwrap_err();
        assert!(matches!(err, ClassifyError::FocalNotAttributed { .. }));
    }

    #[test]
    fn same_university_focals_get_identical_flags() {
        let a = academic("A1", "Rossi", "UA");
        let b = academic("A2", "Bianchi", "UA");
        let publication = publication(
            vec![("Rossi, M.", vec![0]), ("Bianchi, G.", vec![0]), ("Smith, J.", vec![1])],
            vec![address("UA", "IT"), address("MIT", "US")],
        );
        let attributed = [&a, &b];
        let fa = classify(&publication, &a, &attributed, "IT").unwrap();
        let fb = classify(&publication, &b, &attributed, "IT").unwrap();
        assert_eq!(fa, fb);
    }

    #[test]
    fn duplicate_byline_names_collapse_to_one_author() {
        let focal = academic("A1", "Rossi", "UA");
        let publication = publication(
            vec![("Rossi, M.", vec![0]), ("ROSSI,  M.", vec![1])],
            vec![address("UA", "IT"), address("CNR", "IT")],
        );
        let flags = classify(&publication, &focal, &[&focal], "IT").unwrap();
        assert!(!flags.is_collab);
        assert_eq!(flags, CollabFlags::default());
    }

    #[test]
    fn collaboration_depends_only_on_distinct_byline_names() {
        let focal = academic("A1", "Rossi", "UA");
        let base = publication(
            vec![("Rossi, M.", vec![0]), ("Smith, J.", vec![])],
            vec![address("UA", "IT")],
        );
        let mut mutated = base.clone();
        mutated.addresses.push(address("MIT", "US"));
        mutated.addresses.push(address("CNR", "IT"));
        let f1 = classify(&base, &focal, &[&focal], "IT").unwrap();
        let f2 = classify(&mutated, &focal, &[&focal], "IT").unwrap();
        assert_eq!(f1.is_collab, f2.is_collab);
        // Address mutations may add forms but never unset them.
        assert!(f2.extramural_domestic >= f1.extramural_domestic);
        assert!(f2.extramural_international >= f1.extramural_international);
    }
}
