//! Per-academic collaboration profiles and group-level statistics, kept in
//! exact rational arithmetic until render time.

use num::rational::Ratio;
use num::{BigInt, BigRational, Zero};
use thiserror::Error;

use crate::classify::CollabFlags;

/// The four collaboration rates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Form {
    /// Any co-authored publication.
    C,
    /// Co-author at the same university.
    Ci,
    /// Another home-country organization on the byline addresses.
    Ced,
    /// A foreign organization on the byline addresses.
    Cef,
}

impl Form {
    pub const ALL: [Form; 4] = [Form::C, Form::Ci, Form::Ced, Form::Cef];

    pub fn label(self) -> &'static str {
        match self {
            Form::C => "C",
            Form::Ci => "CI",
            Form::Ced => "CED",
            Form::Cef => "CEF",
        }
    }
}

/// Counts and exact rates for one productive academic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CollabProfile {
    pub academic_id: String,
    /// Attributed publications (p >= 1 by construction).
    pub p: u64,
    pub cp: u64,
    pub cip: u64,
    pub cedp: u64,
    pub cefp: u64,
}

impl CollabProfile {
    pub fn count(&self, form: Form) -> u64 {
        match form {
            Form::C => self.cp,
            Form::Ci => self.cip,
            Form::Ced => self.cedp,
            Form::Cef => self.cefp,
        }
    }

    /// count/p in lowest terms; exact zero and one detection falls out.
    pub fn ratio(&self, form: Form) -> Ratio<u64> {
        Ratio::new(self.count(form), self.p)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IndicatorError {
    #[error("academic {0} has no attributed publications")]
    NonProductive(String),
    #[error("empty profile collection")]
    EmptyGroup,
    #[error("zero total publications across the collection")]
    ZeroTotalPublications,
}

/// Tallies classification flags across one academic's publications.
pub fn build_profile(academic_id: &str, flags: &[CollabFlags]) -> Result<CollabProfile, IndicatorError> {
    if flags.is_empty() {
        return Err(IndicatorError::NonProductive(academic_id.to_string()));
    }
    let mut profile = CollabProfile {
        academic_id: academic_id.to_string(),
        p: flags.len() as u64,
        cp: 0,
        cip: 0,
        cedp: 0,
        cefp: 0,
    };
    for f in flags {
        profile.cp += u64::from(f.is_collab);
        profile.cip += u64::from(f.intramural);
        profile.cedp += u64::from(f.extramural_domestic);
        profile.cefp += u64::from(f.extramural_international);
    }
    Ok(profile)
}

/// Group summary of one rate: unweighted mean plus the shares of academics
/// at exactly zero and exactly one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupStats {
    pub n: u64,
    pub mean: BigRational,
    pub pct_zero: Ratio<u64>,
    pub pct_full: Ratio<u64>,
}

pub fn group_stats(profiles: &[&CollabProfile], form: Form) -> Result<GroupStats, IndicatorError> {
    if profiles.is_empty() {
        return Err(IndicatorError::EmptyGroup);
    }
    let n = profiles.len() as u64;
    let mut sum = BigRational::zero();
    let mut zero = 0u64;
    let mut full = 0u64;
    for profile in profiles {
        let count = profile.count(form);
        sum += BigRational::new(BigInt::from(count), BigInt::from(profile.p));
        zero += u64::from(count == 0);
        full += u64::from(count == profile.p);
    }
    Ok(GroupStats {
        n,
        mean: sum / BigRational::from_integer(BigInt::from(n)),
        pct_zero: Ratio::new(zero, n),
        pct_full: Ratio::new(full, n),
    })
}

/// The pooled estimator: total form count over total publications. Exposed
/// for side-by-side comparison with the unweighted mean, which it can
/// distort badly when productivity is skewed.
pub fn aggregate_propensity(profiles: &[&CollabProfile], form: Form) -> Result<Ratio<u64>, IndicatorError> {
    let total_p: u64 = profiles.iter().map(|profile| profile.p).sum();
    if total_p == 0 {
        return Err(IndicatorError::ZeroTotalPublications);
    }
    let total_count: u64 = profiles.iter().map(|profile| profile.count(form)).sum();
    Ok(Ratio::new(total_count, total_p))
}

/// Staff-level flags used by the summary table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StaffClass {
    pub productive: bool,
    pub collaborative: bool,
}

pub fn classify_staff(p: u64, cp: u64) -> StaffClass {
    StaffClass { productive: p >= 1, collaborative: cp >= 1 }
}

/// Reduced rationals convert to f64 exactly enough for rank comparisons:
/// equal rationals share one reduced representation, and distinct rationals
/// with denominators at publication scale stay distinct in f64.
pub fn ratio_to_f64(r: Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flags(c: bool, i: bool, d: bool, f: bool) -> CollabFlags {
        CollabFlags { is_collab: c, intramural: i, extramural_domestic: d, extramural_international: f }
    }

    fn profile(id: &str, p: u64, cp: u64, cip: u64, cedp: u64, cefp: u64) -> CollabProfile {
        CollabProfile { academic_id: id.into(), p, cp, cip, cedp, cefp }
    }

    #[test]
    fn three_collaborations_out_of_four_gives_three_quarters() {
        let flag_list = [
            flags(true, false, true, false),
            flags(true, true, false, false),
            flags(true, false, false, true),
            flags(false, false, false, false),
        ];
        let p = build_profile("A1", &flag_list).unwrap();
        assert_eq!(p.ratio(Form::C), Ratio::new(3, 4));
        assert_eq!(p.ratio(Form::Ci), Ratio::new(1, 4));
        assert_eq!(p.ratio(Form::Ced), Ratio::new(1, 4));
        assert_eq!(p.ratio(Form::Cef), Ratio::new(1, 4));
    }

    #[test]
    fn all_single_authored_gives_zero_everywhere() {
        let flag_list = [flags(false, false, false, false); 2];
        let p = build_profile("A1", &flag_list).unwrap();
        for form in Form::ALL {
            assert_eq!(p.ratio(form), Ratio::from_integer(0));
        }
    }

    #[test]
    fn one_publication_in_every_form_counts_in_every_rate() {
        let p = build_profile("A1", &[flags(true, true, true, true)]).unwrap();
        for form in Form::ALL {
            assert_eq!(p.ratio(form), Ratio::from_integer(1));
        }
    }

    #[test]
    fn empty_flag_list_is_non_productive() {
        assert!(matches!(build_profile("A1", &[]), Err(IndicatorError::NonProductive(_))));
    }

    #[test]
    fn form_counts_never_exceed_collaboration_count() {
        let flag_list = [
            flags(true, true, true, true),
            flags(true, false, true, false),
            flags(false, false, false, false),
        ];
        let p = build_profile("A1", &flag_list).unwrap();
        for form in [Form::Ci, Form::Ced, Form::Cef] {
            assert!(p.count(form) <= p.cp);
            assert!(p.ratio(form) <= p.ratio(Form::C));
        }
        assert!(p.cp <= p.p);
    }

    #[test]
    fn group_stats_match_hand_arithmetic() {
        // Rates 1, 1, 0, 1/2 -> mean 0.625, 25% at zero, 50% at one.
        let profiles = [
            profile("A1", 2, 2, 0, 0, 0),
            profile("A2", 3, 3, 0, 0, 0),
            profile("A3", 4, 0, 0, 0, 0),
            profile("A4", 4, 2, 0, 0, 0),
        ];
        let refs: Vec<&CollabProfile> = profiles.iter().collect();
        let stats = group_stats(&refs, Form::C).unwrap();
        assert_eq!(stats.n, 4);
        assert_eq!(stats.mean, BigRational::new(BigInt::from(5), BigInt::from(8)));
        assert_eq!(stats.pct_zero, Ratio::new(1, 4));
        assert_eq!(stats.pct_full, Ratio::new(1, 2));
    }

    #[test]
    fn group_stats_identity_cases() {
        let profiles = [profile("A1", 2, 2, 0, 0, 0), profile("A2", 5, 5, 0, 0, 0)];
        let refs: Vec<&CollabProfile> = profiles.iter().collect();
        let stats = group_stats(&refs, Form::C).unwrap();
        assert_eq!(stats.mean, BigRational::from_integer(BigInt::from(1)));
        assert_eq!(stats.pct_zero, Ratio::from_integer(0));
        assert_eq!(stats.pct_full, Ratio::from_integer(1));

        let single = [profile("A1", 3, 0, 0, 0, 0)];
        let refs: Vec<&CollabProfile> = single.iter().collect();
        let stats = group_stats(&refs, Form::C).unwrap();
        assert!(stats.mean.is_zero());
        assert_eq!(stats.pct_zero, Ratio::from_integer(1));
        assert_eq!(stats.pct_full, Ratio::from_integer(0));
    }

    #[test]
    fn empty_group_is_an_error() {
        assert!(matches!(group_stats(&[], Form::C), Err(IndicatorError::EmptyGroup)));
    }

    #[test]
    fn aggregate_estimator_distorts_under_skewed_productivity() {
        let profiles = [profile("A", 100, 100, 0, 0, 0), profile("B", 1, 0, 0, 0, 0)];
        let refs: Vec<&CollabProfile> = profiles.iter().collect();
        let aggregate = aggregate_propensity(&refs, Form::C).unwrap();
        assert_eq!(aggregate, Ratio::new(100, 101));
        let mean = group_stats(&refs, Form::C).unwrap().mean;
        assert_eq!(mean, BigRational::new(BigInt::from(1), BigInt::from(2)));
    }

    #[test]
    fn aggregate_equals_mean_when_profiles_share_p() {
        let profiles = [
            profile("A", 4, 1, 0, 0, 0),
            profile("B", 4, 3, 0, 0, 0),
            profile("C", 4, 2, 0, 0, 0),
        ];
        let refs: Vec<&CollabProfile> = profiles.iter().collect();
        let aggregate = aggregate_propensity(&refs, Form::C).unwrap();
        let mean = group_stats(&refs, Form::C).unwrap().mean;
        assert_eq!(
            BigRational::new(BigInt::from(*aggregate.numer()), BigInt::from(*aggregate.denom())),
            mean
        );
    }

    #[test]
    fn aggregate_of_single_profile_is_its_ratio() {
        let profiles = [profile("A", 5, 2, 0, 0, 0)];
        let refs: Vec<&CollabProfile> = profiles.iter().collect();
        assert_eq!(aggregate_propensity(&refs, Form::C).unwrap(), Ratio::new(2, 5));
    }

    #[test]
    fn aggregate_is_the_p_weighted_mean() {
        let profiles = [
            profile("A", 2, 1, 0, 0, 0),
            profile("B", 8, 2, 0, 0, 0),
            profile("C", 5, 5, 0, 0, 0),
        ];
        let refs: Vec<&CollabProfile> = profiles.iter().collect();
        let aggregate = aggregate_propensity(&refs, Form::C).unwrap();
        let mut weighted = BigRational::zero();
        let mut total = BigRational::zero();
        for p in &profiles {
            let w = BigRational::from_integer(BigInt::from(p.p));
            let r = BigRational::new(BigInt::from(p.cp), BigInt::from(p.p));
            weighted += w.clone() * r;
            total += w;
        }
        assert_eq!(
            BigRational::new(BigInt::from(*aggregate.numer()), BigInt::from(*aggregate.denom())),
            weighted / total
        );
    }

    #[test]
    fn staff_classification() {
        assert_eq!(classify_staff(0, 0), StaffClass { productive: false, collaborative: false });
        assert_eq!(classify_staff(2, 0), StaffClass { productive: true, collaborative: false });
        assert_eq!(classify_staff(1, 1), StaffClass { productive: true, collaborative: true });
    }

    #[test]
    fn ratio_conversion_is_stable() {
        assert_eq!(ratio_to_f64(Ratio::new(1, 2)), 0.5);
        assert_eq!(ratio_to_f64(Ratio::new(2, 4)), 0.5);
        assert_eq!(ratio_to_f64(Ratio::from_integer(0)), 0.0);
        assert_eq!(ratio_to_f64(Ratio::from_integer(1)), 1.0);
    }
}
