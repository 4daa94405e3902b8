//! Site states, model variants, and the transition-rate table of the
//! two-line parking process.
//!
//! Cars arrive at rate one per site. A car parks in the first line when the
//! site and both nearest neighbors are free in the first line; a car that
//! cannot reach the first line tries the second line, where it needs a
//! supporting first-line car next to it and no second-line car in the way.
//! In the screening variant a second-line car at a neighbor also blocks
//! access to the first line. Every rate is 0 or 1; the full table is
//! enumerated below so simulator and oracle share one source of truth.

use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// Joint occupation of a single site, coded as a base-4 digit:
/// bit 0 is the first line, bit 1 the second line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum SiteState {
    /// Both lines vacant.
    Empty = 0,
    /// First line occupied only.
    First = 1,
    /// Second line occupied only.
    Second = 2,
    /// Both lines occupied.
    Both = 3,
}

impl SiteState {
    pub const ALL: [SiteState; 4] = [
        SiteState::Empty,
        SiteState::First,
        SiteState::Second,
        SiteState::Both,
    ];

    #[inline]
    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Result<SiteState, Error> {
        match code {
            0 => Ok(SiteState::Empty),
            1 => Ok(SiteState::First),
            2 => Ok(SiteState::Second),
            3 => Ok(SiteState::Both),
            _ => Err(Error::InvalidSiteState(code)),
        }
    }

    /// First-line occupation bit.
    #[inline]
    pub fn first_line(self) -> bool {
        self.code() & 1 != 0
    }

    /// Second-line occupation bit.
    #[inline]
    pub fn second_line(self) -> bool {
        self.code() & 2 != 0
    }

    /// Number of occupied lines at the site.
    #[inline]
    pub fn occupancy(self) -> u32 {
        self.code().count_ones()
    }
}

impl fmt::Display for SiteState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.code())
    }
}

/// The two parking models. They differ only in whether second-line cars
/// obstruct access to the first line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModelVariant {
    NoScreening,
    Screening,
}

impl ModelVariant {
    pub const ALL: [ModelVariant; 2] = [ModelVariant::NoScreening, ModelVariant::Screening];

    #[inline]
    fn table_index(self) -> usize {
        match self {
            ModelVariant::NoScreening => 0,
            ModelVariant::Screening => 1,
        }
    }
}

impl fmt::Display for ModelVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelVariant::NoScreening => write!(f, "noscreening"),
            ModelVariant::Screening => write!(f, "screening"),
        }
    }
}

impl FromStr for ModelVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "noscreening" | "no-screening" => Ok(ModelVariant::NoScreening),
            "screening" => Ok(ModelVariant::Screening),
            _ => Err(Error::UnknownModel(s.to_string())),
        }
    }
}

/// States of a site and its two ring neighbors, the full argument of a rate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NeighborhoodTriple {
    pub left: SiteState,
    pub center: SiteState,
    pub right: SiteState,
}

impl NeighborhoodTriple {
    pub fn new(left: SiteState, center: SiteState, right: SiteState) -> Self {
        Self {
            left,
            center,
            right,
        }
    }

    /// Dense index in 0..64 used by the lookup tables.
    #[inline]
    pub fn index(self) -> usize {
        (self.left.code() as usize) * 16 + (self.center.code() as usize) * 4 + self.right.code() as usize
    }

    pub fn from_index(index: usize) -> Result<Self, Error> {
        if index >= 64 {
            return Err(Error::InvalidSiteState(index as u8));
        }
        Ok(Self {
            left: SiteState::from_code((index / 16) as u8)?,
            center: SiteState::from_code(((index / 4) % 4) as u8)?,
            right: SiteState::from_code((index % 4) as u8)?,
        })
    }
}

/// What an arrival attempt does to the center site.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransitionKind {
    /// Center parks in the first line (0 -> 1).
    FirstLine,
    /// Center parks in the second line above an empty spot (0 -> 2).
    SecondLineFromEmpty,
    /// Center parks in the second line on top of its own car (1 -> 3).
    SecondLineOnTop,
    /// The attempt is discarded; nothing changes.
    Discard,
}

impl TransitionKind {
    /// Resulting center state, or `None` for a discarded attempt.
    pub fn target(self) -> Option<SiteState> {
        match self {
            TransitionKind::FirstLine => Some(SiteState::First),
            TransitionKind::SecondLineFromEmpty => Some(SiteState::Second),
            TransitionKind::SecondLineOnTop => Some(SiteState::Both),
            TransitionKind::Discard => None,
        }
    }
}

/// The nonzero rates of the no-screening model, keyed by the resulting
/// center state: (target, (left, center, right)).
const NO_SCREENING_CASES: [(u8, (u8, u8, u8)); 8] = [
    (1, (0, 0, 0)),
    (1, (2, 0, 0)),
    (1, (0, 0, 2)),
    (1, (2, 0, 2)),
    (2, (1, 0, 0)),
    (2, (0, 0, 1)),
    (2, (1, 0, 1)),
    (3, (0, 1, 0)),
];

/// The nonzero rates of the screening model: first-line parking is blocked
/// by any occupied neighbor, the second-line rates are unchanged.
const SCREENING_CASES: [(u8, (u8, u8, u8)); 5] = [
    (1, (0, 0, 0)),
    (2, (1, 0, 0)),
    (2, (0, 0, 1)),
    (2, (1, 0, 1)),
    (3, (0, 1, 0)),
];

/// `RATES[model][target][triple]`, every unlisted transition is impossible.
const RATES: [[[u8; 64]; 4]; 2] = build_rate_tables();

const fn build_rate_tables() -> [[[u8; 64]; 4]; 2] {
    let mut rates = [[[0u8; 64]; 4]; 2];
    let mut i = 0;
    while i < NO_SCREENING_CASES.len() {
        let (target, (l, c, r)) = NO_SCREENING_CASES[i];
        rates[0][target as usize][(l as usize) * 16 + (c as usize) * 4 + r as usize] = 1;
        i += 1;
    }
    let mut j = 0;
    while j < SCREENING_CASES.len() {
        let (target, (l, c, r)) = SCREENING_CASES[j];
        rates[1][target as usize][(l as usize) * 16 + (c as usize) * 4 + r as usize] = 1;
        j += 1;
    }
    rates
}

/// `OUTCOMES[model][triple]`, the unique enabled transition per attempt.
const OUTCOMES: [[TransitionKind; 64]; 2] = build_outcome_tables();

const fn build_outcome_tables() -> [[TransitionKind; 64]; 2] {
    let mut outcomes = [[TransitionKind::Discard; 64]; 2];
    let mut model = 0;
    while model < 2 {
        let mut idx = 0;
        while idx < 64 {
            let center = (idx / 4) % 4;
            outcomes[model][idx] = if RATES[model][1][idx] == 1 {
                TransitionKind::FirstLine
            } else if center == 0 && RATES[model][2][idx] == 1 {
                TransitionKind::SecondLineFromEmpty
            } else if center == 1 && RATES[model][3][idx] == 1 {
                TransitionKind::SecondLineOnTop
            } else {
                TransitionKind::Discard
            };
            idx += 1;
        }
        model += 1;
    }
    outcomes
}

/// Rate of the transition moving the center of `triple` to `target`.
/// Total over all inputs; returns 0 or 1.
#[inline]
pub fn transition_rate(model: ModelVariant, target: SiteState, triple: NeighborhoodTriple) -> u8 {
    RATES[model.table_index()][target.code() as usize][triple.index()]
}

/// Outcome of an arrival attempt at the center of `triple`.
#[inline]
pub fn attempt_outcome(model: ModelVariant, triple: NeighborhoodTriple) -> TransitionKind {
    OUTCOMES[model.table_index()][triple.index()]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triple(l: u8, c: u8, r: u8) -> NeighborhoodTriple {
        NeighborhoodTriple::new(
            SiteState::from_code(l).unwrap(),
            SiteState::from_code(c).unwrap(),
            SiteState::from_code(r).unwrap(),
        )
    }

    #[test]
    fn listed_rates() {
        use ModelVariant::*;
        assert_eq!(transition_rate(NoScreening, SiteState::First, triple(2, 0, 2)), 1);
        assert_eq!(transition_rate(Screening, SiteState::First, triple(2, 0, 0)), 0);
        assert_eq!(transition_rate(Screening, SiteState::First, triple(0, 0, 0)), 1);
        assert_eq!(transition_rate(NoScreening, SiteState::Second, triple(3, 0, 0)), 0);
        assert_eq!(transition_rate(Screening, SiteState::Both, triple(0, 1, 0)), 1);
        // target Empty is never reachable
        for m in ModelVariant::ALL {
            for idx in 0..64 {
                let t = NeighborhoodTriple::from_index(idx).unwrap();
                assert_eq!(transition_rate(m, SiteState::Empty, t), 0);
            }
        }
    }

    #[test]
    fn attempt_outcomes() {
        use ModelVariant::*;
        assert_eq!(
            attempt_outcome(NoScreening, triple(1, 0, 1)),
            TransitionKind::SecondLineFromEmpty
        );
        assert_eq!(attempt_outcome(NoScreening, triple(1, 0, 2)), TransitionKind::Discard);
        assert_eq!(
            attempt_outcome(Screening, triple(0, 1, 0)),
            TransitionKind::SecondLineOnTop
        );
        assert_eq!(attempt_outcome(NoScreening, triple(0, 0, 0)), TransitionKind::FirstLine);
        assert_eq!(
            attempt_outcome(Screening, triple(2, 0, 0)),
            TransitionKind::Discard
        );
    }

    #[test]
    fn exclusivity() {
        // at most one enabled transition per (model, triple); this is what
        // makes the per-site unit-rate attempt equal to the generator
        for model in ModelVariant::ALL {
            for idx in 0..64 {
                let t = NeighborhoodTriple::from_index(idx).unwrap();
                let enabled: u8 = [SiteState::First, SiteState::Second, SiteState::Both]
                    .iter()
                    .map(|&s| transition_rate(model, s, t))
                    .sum();
                assert!(enabled <= 1, "model {model}, triple {idx}: {enabled} enabled");
            }
        }
    }

    #[test]
    fn screening_dominance() {
        for target in SiteState::ALL {
            for idx in 0..64 {
                let t = NeighborhoodTriple::from_index(idx).unwrap();
                assert!(
                    transition_rate(ModelVariant::Screening, target, t)
                        <= transition_rate(ModelVariant::NoScreening, target, t)
                );
            }
        }
    }

    #[test]
    fn monotone_occupancy() {
        for model in ModelVariant::ALL {
            for target in SiteState::ALL {
                for idx in 0..64 {
                    let t = NeighborhoodTriple::from_index(idx).unwrap();
                    if transition_rate(model, target, t) == 1 {
                        assert!(target.occupancy() == t.center.occupancy() + 1);
                        // existing cars never leave
                        assert_eq!(t.center.code() & target.code(), t.center.code());
                    }
                }
            }
        }
    }

    #[test]
    fn first_line_safety() {
        for model in ModelVariant::ALL {
            for idx in 0..64 {
                let t = NeighborhoodTriple::from_index(idx).unwrap();
                if transition_rate(model, SiteState::First, t) == 1 {
                    assert!(!t.left.first_line() && !t.right.first_line());
                }
            }
        }
    }

    #[test]
    fn outcome_matches_rate_table() {
        for model in ModelVariant::ALL {
            for idx in 0..64 {
                let t = NeighborhoodTriple::from_index(idx).unwrap();
                match attempt_outcome(model, t) {
                    TransitionKind::Discard => {
                        for s in [SiteState::First, SiteState::Second, SiteState::Both] {
                            assert_eq!(transition_rate(model, s, t), 0);
                        }
                    }
                    kind => {
                        let target = kind.target().unwrap();
                        assert_eq!(transition_rate(model, target, t), 1);
                    }
                }
            }
        }
    }

    #[test]
    fn model_parsing() {
        assert_eq!("noscreening".parse::<ModelVariant>().unwrap(), ModelVariant::NoScreening);
        assert_eq!("screening".parse::<ModelVariant>().unwrap(), ModelVariant::Screening);
        assert!("renyi".parse::<ModelVariant>().is_err());
    }

    #[test]
    fn state_codes() {
        for s in SiteState::ALL {
            assert_eq!(SiteState::from_code(s.code()).unwrap(), s);
        }
        assert!(SiteState::from_code(4).is_err());
        assert!(SiteState::First.first_line() && !SiteState::First.second_line());
        assert!(!SiteState::Second.first_line() && SiteState::Second.second_line());
        assert!(SiteState::Both.first_line() && SiteState::Both.second_line());
    }
}
