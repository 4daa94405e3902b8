//! The closed 9-dimensional density ODE systems for both model variants,
//! a fixed-step RK4 integrator, and jamming-limit extraction.
//!
//! State layout: the four single-site densities `D(0..3)`, the three
//! one-sided densities `f(0..2)` of the neighbor of an arrival-free site,
//! the pair quantity `R = P(m1=1, m2=0 | no arrivals at 0)`, and the
//! pattern density `D(0,1,0)`. The screening system is the no-screening
//! system with every term that lets a car skip a second-line car removed.

use serde::Serialize;

use crate::error::Error;
use crate::model::ModelVariant;

pub const STATE_DIM: usize = 9;

/// Default integration step; small enough that global RK4 error is ~1e-12.
pub const DEFAULT_STEP: f64 = 1e-3;

/// Default horizon; all source terms carry e^{-t}, so the endpoint stands
/// in for the t -> infinity limit to ~1e-13.
pub const DEFAULT_T_MAX: f64 = 30.0;

/// Default recording stride: with the default step this records every 0.25
/// time units, matching the simulator's sampling grid.
pub const DEFAULT_RECORD_STRIDE: usize = 250;

/// One point of the coupled density system.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OdeState {
    pub d0: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    pub f0: f64,
    pub f1: f64,
    pub f2: f64,
    pub r: f64,
    pub d010: f64,
}

impl OdeState {
    /// Initial condition: empty lattice, so `D(0) = f(0) = 1`.
    pub fn initial() -> Self {
        Self {
            d0: 1.0,
            d1: 0.0,
            d2: 0.0,
            d3: 0.0,
            f0: 1.0,
            f1: 0.0,
            f2: 0.0,
            r: 0.0,
            d010: 0.0,
        }
    }

    pub fn to_array(self) -> [f64; STATE_DIM] {
        [
            self.d0, self.d1, self.d2, self.d3, self.f0, self.f1, self.f2, self.r, self.d010,
        ]
    }

    pub fn from_array(a: [f64; STATE_DIM]) -> Self {
        Self {
            d0: a[0],
            d1: a[1],
            d2: a[2],
            d3: a[3],
            f0: a[4],
            f1: a[5],
            f2: a[6],
            r: a[7],
            d010: a[8],
        }
    }

    /// First-line density `D(1) + D(3)`.
    pub fn line1(&self) -> f64 {
        self.d1 + self.d3
    }

    /// Second-line density `D(2) + D(3)`.
    pub fn line2(&self) -> f64 {
        self.d2 + self.d3
    }

    /// One-sided density of a doubly occupied neighbor, the deficit
    /// `f(3) = 1 - f(0) - f(1) - f(2)`.
    pub fn f3(&self) -> f64 {
        1.0 - self.f0 - self.f1 - self.f2
    }

    fn is_finite(&self) -> bool {
        self.to_array().iter().all(|x| x.is_finite())
    }
}

/// Right-hand side of the density system at time `t`.
///
/// Both variants share one implementation: `skip` masks exactly the terms
/// where a car reaches the first line past a second-line car, which the
/// screening model forbids.
pub fn rhs(model: ModelVariant, t: f64, y: &OdeState) -> OdeState {
    let et = (-t).exp();
    let tet2 = t * (-2.0 * t).exp();
    let skip = match model {
        ModelVariant::NoScreening => 1.0,
        ModelVariant::Screening => 0.0,
    };

    // gain of the first line: (f0 + f2)^2 without screening, f0^2 with
    let first_gain = {
        let f = y.f0 + skip * y.f2;
        f * f * et
    };
    // gain of the second line over an empty spot: 2 f0 f1 + f1^2
    let second_gain = (2.0 * y.f0 * y.f1 + y.f1 * y.f1) * et;

    OdeState {
        d0: -first_gain - second_gain,
        d1: first_gain - y.d010,
        d2: second_gain,
        d3: y.d010,
        f0: -(y.f0 + y.f1 + skip * y.f2) * et,
        f1: (y.f0 + skip * y.f2) * et - y.r,
        f2: y.f1 * et,
        r: y.f0 * (et - tet2) - y.f1 * tet2 - y.r,
        d010: y.f0 * y.f0 * et - y.d010 - 2.0 * y.r * (y.f0 + y.f1) * et,
    }
}

/// Closed form for `f(0) + f(2)` in the no-screening model:
/// `exp(e^{-t} - 1)`, the first-line density of a semi-infinite chain.
pub fn closed_form_fsum(t: f64) -> f64 {
    ((-t).exp() - 1.0).exp()
}

/// Integration request.
#[derive(Clone, Debug)]
pub struct OdeSpec {
    pub model: ModelVariant,
    pub t_max: f64,
    pub step: f64,
    pub record_stride: usize,
}

impl OdeSpec {
    pub fn new(model: ModelVariant) -> Self {
        Self {
            model,
            t_max: DEFAULT_T_MAX,
            step: DEFAULT_STEP,
            record_stride: DEFAULT_RECORD_STRIDE,
        }
    }

    fn validate(&self) -> Result<(), Error> {
        if !self.step.is_finite() || self.step <= 0.0 {
            return Err(Error::BadStep(self.step));
        }
        if self.record_stride == 0 {
            return Err(Error::BadRecordStride);
        }
        if !self.t_max.is_finite() || self.t_max < 0.0 {
            return Err(Error::BadHorizon(self.t_max));
        }
        Ok(())
    }
}

/// Recorded solution; always contains t = 0 and t = t_max.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub model: ModelVariant,
    pub times: Vec<f64>,
    pub states: Vec<OdeState>,
}

impl Trajectory {
    pub fn end_time(&self) -> f64 {
        *self.times.last().expect("trajectory is never empty")
    }

    pub fn end_state(&self) -> &OdeState {
        self.states.last().expect("trajectory is never empty")
    }

    /// State recorded at time `t` (within 1e-9), if any.
    pub fn state_at(&self, t: f64) -> Option<&OdeState> {
        let idx = self
            .times
            .binary_search_by(|probe| probe.partial_cmp(&t).unwrap())
            .unwrap_or_else(|i| i);
        for j in idx.saturating_sub(1)..(idx + 2).min(self.times.len()) {
            if (self.times[j] - t).abs() <= 1e-9 {
                return Some(&self.states[j]);
            }
        }
        None
    }
}

fn rk4_step(model: ModelVariant, t: f64, y: [f64; STATE_DIM], h: f64) -> [f64; STATE_DIM] {
    let eval = |t: f64, y: [f64; STATE_DIM]| rhs(model, t, &OdeState::from_array(y)).to_array();
    let axpy = |y: [f64; STATE_DIM], a: f64, k: [f64; STATE_DIM]| {
        let mut out = y;
        for i in 0..STATE_DIM {
            out[i] += a * k[i];
        }
        out
    };
    let k1 = eval(t, y);
    let k2 = eval(t + h / 2.0, axpy(y, h / 2.0, k1));
    let k3 = eval(t + h / 2.0, axpy(y, h / 2.0, k2));
    let k4 = eval(t + h, axpy(y, h, k3));
    let mut out = y;
    for i in 0..STATE_DIM {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// Fixed-step RK4 from the empty initial condition to `t_max`, recording
/// every `record_stride`-th step plus the endpoint.
pub fn integrate(spec: &OdeSpec) -> Result<Trajectory, Error> {
    spec.validate()?;
    let OdeSpec {
        model,
        t_max,
        step,
        record_stride,
    } = *spec;

    // number of whole steps; land exactly on t_max with a shorter last step
    // when it is not a multiple of `step`
    let ratio = t_max / step;
    let (n_full, remainder) = if (ratio.round() * step - t_max).abs() <= 1e-9 * t_max.max(1.0) {
        (ratio.round() as u64, 0.0)
    } else {
        let n = ratio.floor() as u64;
        (n, t_max - n as f64 * step)
    };

    let mut y = OdeState::initial().to_array();
    let mut times = vec![0.0];
    let mut states = vec![OdeState::initial()];

    for i in 0..n_full {
        let t = i as f64 * step;
        y = rk4_step(model, t, y, step);
        let is_last = i + 1 == n_full && remainder == 0.0;
        if (i + 1) % record_stride as u64 == 0 || is_last {
            let t_next = if is_last { t_max } else { (i + 1) as f64 * step };
            let state = OdeState::from_array(y);
            if !state.is_finite() {
                return Err(Error::NonfiniteState(t_next));
            }
            // avoid a duplicate endpoint when the stride already hit it
            if (times.last().unwrap() - t_next).abs() > 1e-12 {
                times.push(t_next);
                states.push(state);
            }
        }
    }
    if remainder > 0.0 {
        y = rk4_step(model, n_full as f64 * step, y, remainder);
        let state = OdeState::from_array(y);
        if !state.is_finite() {
            return Err(Error::NonfiniteState(t_max));
        }
        times.push(t_max);
        states.push(state);
    }

    Ok(Trajectory {
        model,
        times,
        states,
    })
}

/// Endpoint line densities with a stationarity certificate.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct LimitSummary {
    /// First-line density at the endpoint, `D(1) + D(3)`.
    pub line1: f64,
    /// Second-line density at the endpoint, `D(2) + D(3)`.
    pub line2: f64,
    /// `line2 / line1`.
    pub increase_factor: f64,
    /// Max-norm of the right-hand side at the endpoint.
    pub residual_drift: f64,
}

/// Read the jamming limits off the end of a trajectory.
///
/// Requires the horizon to reach t >= 20 and the endpoint drift to be below
/// 1e-4; every source term carries e^{-t}, so a converged run at t_max = 30
/// shows drift around 1e-13.
pub fn extract_limits(trajectory: &Trajectory) -> Result<LimitSummary, Error> {
    let t_end = trajectory.end_time();
    if t_end < 20.0 {
        return Err(Error::HorizonTooShort(t_end));
    }
    let end = trajectory.end_state();
    let drift = rhs(trajectory.model, t_end, end)
        .to_array()
        .iter()
        .fold(0.0f64, |acc, x| acc.max(x.abs()));
    if drift > 1e-4 {
        return Err(Error::NotStationary(drift));
    }
    let line1 = end.line1();
    let line2 = end.line2();
    Ok(LimitSummary {
        line1,
        line2,
        increase_factor: line2 / line1,
        residual_drift: drift,
    })
}
