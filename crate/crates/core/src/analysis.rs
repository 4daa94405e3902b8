//! Replica statistics and structured comparisons between the simulator,
//! the exact oracle, the density ODEs, and the closed-form identities.

use serde::Serialize;

use crate::error::Error;
use crate::model::SiteState;
use crate::ode::Trajectory;

/// Mean and standard error over replicas.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AggregateEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub replicas: usize,
}

/// Mean and standard error (unbiased sample variance over sqrt(n)).
///
/// Values are accumulated in sorted order, so the result is exactly
/// invariant under permutation of the replicas.
pub fn aggregate(values: &[f64]) -> Result<AggregateEstimate, Error> {
    if values.len() < 2 {
        return Err(Error::TooFewReplicas(values.len()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    // constant samples aggregate exactly
    if sorted.first() == sorted.last() {
        return Ok(AggregateEstimate {
            mean: sorted[0],
            stderr: 0.0,
            replicas: values.len(),
        });
    }
    let n = sorted.len() as f64;
    let mean = sorted.iter().sum::<f64>() / n;
    let ss = sorted.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
    let variance = ss / (n - 1.0);
    Ok(AggregateEstimate {
        mean,
        stderr: (variance / n).sqrt(),
        replicas: values.len(),
    })
}

/// Where a reference value comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReferenceSource {
    Ode,
    Oracle,
    ClosedForm,
}

/// Pass thresholds for a comparison: a z-score gate with an absolute floor
/// that absorbs spurious failures at very small variances.
#[derive(Clone, Copy, Debug)]
pub struct CompareThresholds {
    pub z: f64,
    pub floor: f64,
}

impl Default for CompareThresholds {
    fn default() -> Self {
        Self { z: 4.0, floor: 1e-3 }
    }
}

/// One observable compared against a reference value.
#[derive(Clone, Debug, Serialize)]
pub struct ComparisonReport {
    pub observable: String,
    pub time: f64,
    pub reference: f64,
    pub source: ReferenceSource,
    pub estimate: AggregateEstimate,
    pub z_score: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Build a report with the two-tier pass rule: |z| within the threshold or
/// |mean - reference| within the absolute floor.
pub fn compare(
    observable: impl Into<String>,
    time: f64,
    reference: f64,
    source: ReferenceSource,
    estimate: AggregateEstimate,
    thresholds: CompareThresholds,
) -> ComparisonReport {
    let deviation = estimate.mean - reference;
    let z_score = if estimate.stderr > 0.0 {
        deviation / estimate.stderr
    } else if deviation == 0.0 {
        0.0
    } else {
        f64::INFINITY * deviation.signum()
    };
    let pass = z_score.abs() <= thresholds.z || deviation.abs() <= thresholds.floor;
    ComparisonReport {
        observable: observable.into(),
        time,
        reference,
        source,
        estimate,
        z_score,
        pass,
        note: None,
    }
}

/// The (s, s') pairs for which the product form
/// `D(s, 0, s') = f(s) f(s') e^{-t}` holds.
pub const ADMISSIBLE_FACTOR_PAIRS: [(SiteState, SiteState); 5] = [
    (SiteState::Empty, SiteState::Empty),
    (SiteState::Empty, SiteState::First),
    (SiteState::First, SiteState::Empty),
    (SiteState::First, SiteState::First),
    (SiteState::Second, SiteState::Second),
];

/// A simulator estimate of the pattern density `D(s, 0, s')` at one time.
#[derive(Clone, Debug)]
pub struct FactorizationEstimate {
    pub time: f64,
    pub pair: (SiteState, SiteState),
    pub estimate: AggregateEstimate,
}

/// Check the product form of the straddling pattern densities against
/// one-sided densities taken from an ODE trajectory.
///
/// The left side is the plain bulk pattern density (no conditioning); the
/// right side is `f(s) f(s') e^{-t}` read off the trajectory.
pub fn check_factorization(
    estimates: &[FactorizationEstimate],
    trajectory: &Trajectory,
    thresholds: CompareThresholds,
) -> Result<Vec<ComparisonReport>, Error> {
    let mut reports = Vec::with_capacity(estimates.len());
    for est in estimates {
        let (s, sp) = est.pair;
        if !ADMISSIBLE_FACTOR_PAIRS.contains(&est.pair) {
            return Err(Error::InadmissiblePair(s.code(), sp.code()));
        }
        let state = trajectory
            .state_at(est.time)
            .ok_or(Error::TimeNotRecorded(est.time))?;
        let f = [state.f0, state.f1, state.f2];
        let reference = f[s.code() as usize] * f[sp.code() as usize] * (-est.time).exp();
        reports.push(compare(
            format!("D({s},0,{sp})"),
            est.time,
            reference,
            ReferenceSource::Ode,
            est.estimate,
            thresholds,
        ));
    }
    Ok(reports)
}

/// Ratio of second-line to first-line density.
pub fn increase_factor(line1: f64, line2: f64) -> Result<f64, Error> {
    if line1 <= 0.0 {
        return Err(Error::NonpositiveLine(line1));
    }
    Ok(line2 / line1)
}
