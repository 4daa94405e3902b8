//! Event-driven exact simulation of the parking jump process on a ring.
//!
//! Each unfrozen site carries a rate-1 Poisson arrival clock. Instead of
//! per-site clocks the simulator draws the total attempt count from
//! Poisson(unfrozen * t_max) and gives every attempt an i.i.d. uniform time
//! and site, which is the same process in law. Attempts are applied in time
//! order; the rate table decides whether a car parks in the first line, the
//! second line, or is discarded. Frozen sites stay empty and receive no
//! arrivals, which realizes the conditioning on an arrival-free site used
//! by the one-sided densities.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;

use crate::analysis::{aggregate, AggregateEstimate};
use crate::error::Error;
use crate::model::{attempt_outcome, ModelVariant, NeighborhoodTriple, SiteState, TransitionKind};

/// A tuple of consecutive site states to count along the ring.
pub type Pattern = Vec<SiteState>;

/// Ring of sites with a frozen mask.
#[derive(Clone, Debug)]
pub struct Lattice {
    states: Vec<SiteState>,
    frozen: Vec<bool>,
}

impl Lattice {
    /// All-empty ring of `size` sites with the given arrival-free sites.
    pub fn new(size: usize, frozen_sites: &[usize]) -> Result<Self, Error> {
        if size < 3 {
            return Err(Error::RingTooSmall(size));
        }
        let mut frozen = vec![false; size];
        for &i in frozen_sites {
            if i >= size {
                return Err(Error::FrozenIndexOutOfRange { index: i, size });
            }
            if frozen[i] {
                return Err(Error::DuplicateFrozenIndex(i));
            }
            frozen[i] = true;
        }
        if frozen.iter().all(|&f| f) {
            return Err(Error::AllSitesFrozen(size));
        }
        Ok(Self {
            states: vec![SiteState::Empty; size],
            frozen,
        })
    }

    pub fn size(&self) -> usize {
        self.states.len()
    }

    pub fn state(&self, site: usize) -> SiteState {
        self.states[site]
    }

    pub fn is_frozen(&self, site: usize) -> bool {
        self.frozen[site]
    }

    pub fn unfrozen_count(&self) -> usize {
        self.frozen.iter().filter(|&&f| !f).count()
    }

    /// States of `site` and its ring neighbors.
    pub fn triple_at(&self, site: usize) -> NeighborhoodTriple {
        let n = self.size();
        NeighborhoodTriple::new(
            self.states[(site + n - 1) % n],
            self.states[site],
            self.states[(site + 1) % n],
        )
    }

    /// Apply one arrival attempt at `site` and report what it did.
    pub fn apply_attempt(&mut self, model: ModelVariant, site: usize) -> TransitionKind {
        debug_assert!(!self.frozen[site], "frozen sites receive no arrivals");
        let outcome = attempt_outcome(model, self.triple_at(site));
        if let Some(target) = outcome.target() {
            self.states[site] = target;
        }
        outcome
    }

    /// No two adjacent sites both hold a first-line car.
    pub fn first_line_exclusion_ok(&self) -> bool {
        let n = self.size();
        (0..n).all(|i| !(self.states[i].first_line() && self.states[(i + 1) % n].first_line()))
    }

    /// No two adjacent sites both hold a second-line car.
    pub fn second_line_exclusion_ok(&self) -> bool {
        let n = self.size();
        (0..n).all(|i| !(self.states[i].second_line() && self.states[(i + 1) % n].second_line()))
    }

    /// Every second-line car rests on a first-line car at its own site or a
    /// neighboring one.
    pub fn support_rule_ok(&self) -> bool {
        let n = self.size();
        (0..n).all(|i| {
            !self.states[i].second_line()
                || self.states[i].first_line()
                || self.states[(i + n - 1) % n].first_line()
                || self.states[(i + 1) % n].first_line()
        })
    }
}

/// One simulation request; a deterministic function of its fields.
#[derive(Clone, Debug)]
pub struct SimConfig {
    pub size: usize,
    pub t_max: f64,
    pub model: ModelVariant,
    pub master_seed: u64,
    pub replicas: usize,
    /// Nondecreasing times in [0, t_max] at which densities are recorded.
    pub sample_times: Vec<f64>,
    pub frozen_sites: Vec<usize>,
    /// Local patterns whose densities are recorded alongside the site
    /// densities.
    pub patterns: Vec<Pattern>,
}

impl SimConfig {
    pub fn new(model: ModelVariant, size: usize, t_max: f64, master_seed: u64, replicas: usize) -> Self {
        Self {
            size,
            t_max,
            model,
            master_seed,
            replicas,
            sample_times: Self::default_sample_times(t_max),
            frozen_sites: Vec::new(),
            patterns: Vec::new(),
        }
    }

    /// 0 to t_max in steps of 0.25, endpoint included.
    pub fn default_sample_times(t_max: f64) -> Vec<f64> {
        let mut times: Vec<f64> = (0..)
            .map(|k| k as f64 * 0.25)
            .take_while(|t| *t <= t_max)
            .collect();
        if times.last().copied() != Some(t_max) {
            times.push(t_max);
        }
        times
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.size < 3 {
            return Err(Error::RingTooSmall(self.size));
        }
        if !self.t_max.is_finite() || self.t_max < 0.0 {
            return Err(Error::BadHorizon(self.t_max));
        }
        if self.replicas == 0 {
            return Err(Error::NoReplicas);
        }
        if self
            .sample_times
            .windows(2)
            .any(|w| w[1] < w[0])
            || self.sample_times.iter().any(|&t| t < 0.0 || t > self.t_max)
        {
            return Err(Error::BadSampleTimes);
        }
        for p in &self.patterns {
            if p.is_empty() {
                return Err(Error::EmptyPattern);
            }
            if p.len() > self.size {
                return Err(Error::PatternTooLong {
                    pattern: p.len(),
                    size: self.size,
                });
            }
        }
        // index and coverage checks
        Lattice::new(self.size, &self.frozen_sites)?;
        Ok(())
    }
}

/// Mix a master seed and a replica index into an independent stream seed.
///
/// SplitMix64 applied to `master + (index + 1) * golden`: the pre-mix values
/// are distinct for distinct indices (odd multiplier), and the finalizer is
/// a bijection, so replica seeds never collide under a fixed master seed.
pub fn derive_replica_seed(master_seed: u64, replica_index: u64) -> u64 {
    let mut z = master_seed
        .wrapping_add(replica_index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One arrival attempt of the event stream.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Attempt {
    pub time: f64,
    pub site: u32,
}

/// The full sorted attempt stream of one replica.
///
/// Draw order is fixed: the Poisson count first, then (time, site) pairs.
/// Ties in time (possible at finite precision) break by site index.
pub fn attempt_stream(config: &SimConfig, replica_index: usize) -> Result<Vec<Attempt>, Error> {
    config.validate()?;
    if replica_index >= config.replicas {
        return Err(Error::ReplicaOutOfRange {
            index: replica_index,
            replicas: config.replicas,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_replica_seed(
        config.master_seed,
        replica_index as u64,
    ));
    let unfrozen: Vec<u32> = (0..config.size)
        .filter(|&i| !config.frozen_sites.contains(&i))
        .map(|i| i as u32)
        .collect();

    let lambda = unfrozen.len() as f64 * config.t_max;
    let count = if lambda > 0.0 {
        let poisson = Poisson::new(lambda).expect("positive finite mean");
        poisson.sample(&mut rng) as usize
    } else {
        0
    };

    let mut attempts = Vec::with_capacity(count);
    for _ in 0..count {
        let time = rng.random::<f64>() * config.t_max;
        let site = unfrozen[rng.random_range(0..unfrozen.len())];
        attempts.push(Attempt { time, site });
    }
    attempts.sort_unstable_by(|a, b| {
        a.time
            .partial_cmp(&b.time)
            .expect("attempt times are finite")
            .then(a.site.cmp(&b.site))
    });
    Ok(attempts)
}

/// Densities measured on one lattice at one time.
#[derive(Clone, Debug, PartialEq)]
pub struct DensitySample {
    pub time: f64,
    /// Fraction of unfrozen sites in each state.
    pub site_density: [f64; 4],
    /// Densities of the requested patterns.
    pub pattern_density: Vec<(Pattern, f64)>,
}

/// What a single replica produces.
#[derive(Clone, Debug)]
pub struct ReplicaOutput {
    pub samples: Vec<DensitySample>,
    pub lattice: Lattice,
}

/// Fraction of ring windows matching `pattern` exactly, counting only
/// windows that contain no frozen site.
pub fn estimate_pattern_density(lattice: &Lattice, pattern: &[SiteState]) -> Result<f64, Error> {
    let n = lattice.size();
    if pattern.is_empty() {
        return Err(Error::EmptyPattern);
    }
    if pattern.len() > n {
        return Err(Error::PatternTooLong {
            pattern: pattern.len(),
            size: n,
        });
    }
    let mut admissible = 0usize;
    let mut matches = 0usize;
    for start in 0..n {
        let mut clean = true;
        let mut matched = true;
        for (j, want) in pattern.iter().enumerate() {
            let site = (start + j) % n;
            if lattice.is_frozen(site) {
                clean = false;
                break;
            }
            if lattice.state(site) != *want {
                matched = false;
            }
        }
        if clean {
            admissible += 1;
            if matched {
                matches += 1;
            }
        }
    }
    if admissible == 0 {
        return Err(Error::NoAdmissibleWindow);
    }
    Ok(matches as f64 / admissible as f64)
}

fn measure(lattice: &Lattice, time: f64, patterns: &[Pattern]) -> Result<DensitySample, Error> {
    let mut counts = [0usize; 4];
    let mut unfrozen = 0usize;
    for i in 0..lattice.size() {
        if !lattice.is_frozen(i) {
            counts[lattice.state(i).code() as usize] += 1;
            unfrozen += 1;
        }
    }
    let site_density = counts.map(|c| c as f64 / unfrozen as f64);
    let mut pattern_density = Vec::with_capacity(patterns.len());
    for p in patterns {
        pattern_density.push((p.clone(), estimate_pattern_density(lattice, p)?));
    }
    Ok(DensitySample {
        time,
        site_density,
        pattern_density,
    })
}

/// Run the attempt stream, invoking `on_sample` with the lattice state at
/// each sample time (all attempts with time <= sample time applied).
fn run_stream<F>(config: &SimConfig, replica_index: usize, mut on_sample: F) -> Result<Lattice, Error>
where
    F: FnMut(f64, &Lattice) -> Result<(), Error>,
{
    let attempts = attempt_stream(config, replica_index)?;
    let mut lattice = Lattice::new(config.size, &config.frozen_sites)?;
    let mut next = 0usize;
    for &sample_time in &config.sample_times {
        while next < attempts.len() && attempts[next].time <= sample_time {
            lattice.apply_attempt(config.model, attempts[next].site as usize);
            next += 1;
        }
        on_sample(sample_time, &lattice)?;
    }
    for attempt in &attempts[next..] {
        lattice.apply_attempt(config.model, attempt.site as usize);
    }
    Ok(lattice)
}

/// Simulate one replica, recording densities at every sample time.
pub fn run_replica(config: &SimConfig, replica_index: usize) -> Result<ReplicaOutput, Error> {
    let mut samples = Vec::with_capacity(config.sample_times.len());
    let lattice = run_stream(config, replica_index, |time, lattice| {
        samples.push(measure(lattice, time, &config.patterns)?);
        Ok(())
    })?;
    Ok(ReplicaOutput { samples, lattice })
}

/// Replica-averaged densities with standard errors at one sample time.
#[derive(Clone, Debug)]
pub struct AggregatedSample {
    pub time: f64,
    pub site_density: [AggregateEstimate; 4],
    /// First-line density `D(1) + D(3)`.
    pub line1: AggregateEstimate,
    /// Second-line density `D(2) + D(3)`.
    pub line2: AggregateEstimate,
    pub patterns: Vec<(Pattern, AggregateEstimate)>,
}

/// Run all replicas (in parallel) and aggregate every observable.
///
/// Replica results are merged in index order, so the output is a
/// deterministic function of the config regardless of scheduling.
pub fn run_aggregated(config: &SimConfig) -> Result<Vec<AggregatedSample>, Error> {
    config.validate()?;
    if config.replicas < 2 {
        return Err(Error::TooFewReplicas(config.replicas));
    }
    let per_replica: Result<Vec<Vec<DensitySample>>, Error> = (0..config.replicas)
        .into_par_iter()
        .map(|k| run_replica(config, k).map(|out| out.samples))
        .collect();
    let per_replica = per_replica?;

    let mut out = Vec::with_capacity(config.sample_times.len());
    for (j, &time) in config.sample_times.iter().enumerate() {
        let column = |f: &dyn Fn(&DensitySample) -> f64| -> Vec<f64> {
            per_replica.iter().map(|samples| f(&samples[j])).collect()
        };
        let site_density = [
            aggregate(&column(&|s| s.site_density[0]))?,
            aggregate(&column(&|s| s.site_density[1]))?,
            aggregate(&column(&|s| s.site_density[2]))?,
            aggregate(&column(&|s| s.site_density[3]))?,
        ];
        let line1 = aggregate(&column(&|s| s.site_density[1] + s.site_density[3]))?;
        let line2 = aggregate(&column(&|s| s.site_density[2] + s.site_density[3]))?;
        let mut patterns = Vec::with_capacity(config.patterns.len());
        for (p_idx, pattern) in config.patterns.iter().enumerate() {
            let values = column(&|s| s.pattern_density[p_idx].1);
            patterns.push((pattern.clone(), aggregate(&values)?));
        }
        out.push(AggregatedSample {
            time,
            site_density,
            line1,
            line2,
            patterns,
        });
    }
    Ok(out)
}

/// One-sided indicators of a single replica: the state of site 1 next to
/// the frozen site 0, and the pair indicator behind `R`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OneSidedSample {
    pub time: f64,
    /// Indicators of `m1 = 0, 1, 2`.
    pub f: [f64; 3],
    /// Indicator of `m1 = 3`.
    pub f3: f64,
    /// Indicator of `m1 = 1 and m2 = 0`.
    pub r: f64,
}

/// Replica-averaged one-sided densities.
#[derive(Clone, Debug)]
pub struct OneSidedAggregate {
    pub time: f64,
    pub f: [AggregateEstimate; 3],
    pub f3: AggregateEstimate,
    pub r: AggregateEstimate,
    /// Estimate of `f(0) + f(2)` (indicator of `m1` having an empty first
    /// line), the combination with a closed form in the no-screening model.
    pub f02: AggregateEstimate,
}

fn validate_one_sided(config: &SimConfig) -> Result<(), Error> {
    config.validate()?;
    let mut frozen = config.frozen_sites.clone();
    frozen.sort_unstable();
    if frozen != [0] && frozen != [0, 2] {
        return Err(Error::BadOneSidedFreeze);
    }
    if config.size < 200 {
        return Err(Error::OneSidedRingTooSmall(config.size));
    }
    Ok(())
}

/// One replica of the frozen-site geometry, reporting the state of site 1.
pub fn run_one_sided_replica(
    config: &SimConfig,
    replica_index: usize,
) -> Result<Vec<OneSidedSample>, Error> {
    validate_one_sided(config)?;
    let mut samples = Vec::with_capacity(config.sample_times.len());
    run_stream(config, replica_index, |time, lattice| {
        let m1 = lattice.state(1);
        let m2 = lattice.state(2);
        let mut f = [0.0; 3];
        let mut f3 = 0.0;
        match m1 {
            SiteState::Both => f3 = 1.0,
            s => f[s.code() as usize] = 1.0,
        }
        let r = if m1 == SiteState::First && m2 == SiteState::Empty {
            1.0
        } else {
            0.0
        };
        samples.push(OneSidedSample { time, f, f3, r });
        Ok(())
    })?;
    Ok(samples)
}

/// Estimate the one-sided densities `f(s)` and `R` by averaging the site-1
/// indicators over all replicas.
pub fn run_one_sided(config: &SimConfig) -> Result<Vec<OneSidedAggregate>, Error> {
    validate_one_sided(config)?;
    if config.replicas < 2 {
        return Err(Error::TooFewReplicas(config.replicas));
    }
    let per_replica: Result<Vec<Vec<OneSidedSample>>, Error> = (0..config.replicas)
        .into_par_iter()
        .map(|k| run_one_sided_replica(config, k))
        .collect();
    let per_replica = per_replica?;

    let mut out = Vec::with_capacity(config.sample_times.len());
    for (j, &time) in config.sample_times.iter().enumerate() {
        let column = |f: &dyn Fn(&OneSidedSample) -> f64| -> Vec<f64> {
            per_replica.iter().map(|samples| f(&samples[j])).collect()
        };
        out.push(OneSidedAggregate {
            time,
            f: [
                aggregate(&column(&|s| s.f[0]))?,
                aggregate(&column(&|s| s.f[1]))?,
                aggregate(&column(&|s| s.f[2]))?,
            ],
            f3: aggregate(&column(&|s| s.f3))?,
            r: aggregate(&column(&|s| s.r))?,
            f02: aggregate(&column(&|s| s.f[0] + s.f[2]))?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pattern(codes: &[u8]) -> Pattern {
        codes.iter().map(|&c| SiteState::from_code(c).unwrap()).collect()
    }

    #[test]
    fn three_ring_jams_with_one_first_line_car() {
        // the first parked car blocks both other sites' first lines forever
        for seed in 0..40 {
            for model in ModelVariant::ALL {
                let config = SimConfig::new(model, 3, 100.0, seed, 1);
                let out = run_replica(&config, 0).unwrap();
                let first_line_cars = (0..3)
                    .filter(|&i| out.lattice.state(i).first_line())
                    .count();
                assert_eq!(first_line_cars, 1, "seed {seed}, model {model}");
                let last = out.samples.last().unwrap();
                assert!((last.site_density[1] + last.site_density[3] - 1.0 / 3.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn lattice_invariants_hold_along_runs() {
        for seed in 0..20 {
            for model in ModelVariant::ALL {
                let mut config = SimConfig::new(model, 64, 6.0, 900 + seed, 1);
                config.frozen_sites = vec![5];
                let attempts = attempt_stream(&config, 0).unwrap();
                let mut lattice = Lattice::new(config.size, &config.frozen_sites).unwrap();
                for a in &attempts {
                    lattice.apply_attempt(model, a.site as usize);
                    assert!(lattice.first_line_exclusion_ok());
                    assert!(lattice.second_line_exclusion_ok());
                    assert!(lattice.support_rule_ok());
                }
                assert_eq!(lattice.state(5), SiteState::Empty);
            }
        }
    }

    #[test]
    fn occupancy_is_monotone_under_replay() {
        let config = SimConfig::new(ModelVariant::NoScreening, 32, 8.0, 7, 1);
        let attempts = attempt_stream(&config, 0).unwrap();
        let mut lattice = Lattice::new(config.size, &[]).unwrap();
        for a in &attempts {
            let before = lattice.state(a.site as usize).occupancy();
            lattice.apply_attempt(config.model, a.site as usize);
            let after = lattice.state(a.site as usize).occupancy();
            assert!(after >= before);
        }
    }

    #[test]
    fn attempt_stream_is_sorted_and_deterministic() {
        let config = SimConfig::new(ModelVariant::NoScreening, 50, 3.0, 99, 2);
        let a = attempt_stream(&config, 1).unwrap();
        let b = attempt_stream(&config, 1).unwrap();
        assert_eq!(a, b);
        assert!(a.windows(2).all(|w| w[0].time <= w[1].time));
        assert!(a.iter().all(|x| (0.0..=3.0).contains(&x.time)));
    }

    #[test]
    fn replicas_differ() {
        let config = SimConfig::new(ModelVariant::NoScreening, 50, 3.0, 99, 2);
        let a = attempt_stream(&config, 0).unwrap();
        let b = attempt_stream(&config, 1).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn aggregated_run_is_deterministic_under_parallelism() {
        let mut config = SimConfig::new(ModelVariant::Screening, 40, 2.0, 4242, 16);
        config.patterns = vec![pattern(&[0, 1, 0])];
        let a = run_aggregated(&config).unwrap();
        let b = run_aggregated(&config).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.time, y.time);
            for s in 0..4 {
                assert_eq!(x.site_density[s].mean, y.site_density[s].mean);
                assert_eq!(x.site_density[s].stderr, y.site_density[s].stderr);
            }
            assert_eq!(x.patterns[0].1.mean, y.patterns[0].1.mean);
        }
    }

    #[test]
    fn replica_seeds_are_distinct() {
        let master = 0xDEAD_BEEF_0BAD_F00D;
        let mut seen = std::collections::HashSet::new();
        for k in 0..10_000u64 {
            assert!(seen.insert(derive_replica_seed(master, k)));
        }
        assert_eq!(derive_replica_seed(master, 0), derive_replica_seed(master, 0));
        assert_ne!(derive_replica_seed(master, 0), derive_replica_seed(master, 1));
    }

    #[test]
    fn attempt_count_matches_poisson_moments() {
        // mean and variance of the total attempt count against N * t_max
        let config = SimConfig::new(ModelVariant::NoScreening, 100, 2.0, 31337, 2000);
        let lambda = 200.0;
        let counts: Vec<f64> = (0..config.replicas)
            .map(|k| attempt_stream(&config, k).unwrap().len() as f64)
            .collect();
        let n = counts.len() as f64;
        let mean = counts.iter().sum::<f64>() / n;
        let var = counts.iter().map(|c| (c - mean) * (c - mean)).sum::<f64>() / (n - 1.0);
        assert!((mean - lambda).abs() < 4.0 * (lambda / n).sqrt());
        assert!((var / lambda - 1.0).abs() < 0.15);
    }

    #[test]
    fn pattern_density_counts_windows() {
        let lattice = Lattice::new(6, &[]).unwrap();
        assert_eq!(estimate_pattern_density(&lattice, &pattern(&[0, 1, 0])).unwrap(), 0.0);
        assert_eq!(estimate_pattern_density(&lattice, &pattern(&[0, 0, 0])).unwrap(), 1.0);

        // alternating 0,1 ring: (0,1,0) matches at windows starting on odd sites
        let mut alternating = Lattice::new(6, &[]).unwrap();
        for i in [1, 3, 5] {
            alternating.apply_attempt(ModelVariant::NoScreening, i);
        }
        assert_eq!(
            estimate_pattern_density(&alternating, &pattern(&[0, 1, 0])).unwrap(),
            0.5
        );
    }

    #[test]
    fn pattern_density_skips_frozen_windows() {
        let lattice = Lattice::new(6, &[0]).unwrap();
        // windows starting at 1,2,3 avoid site 0; all-empty ring matches (0,0,0)
        assert_eq!(estimate_pattern_density(&lattice, &pattern(&[0, 0, 0])).unwrap(), 1.0);
        // a full-ring window always contains the frozen site
        assert!(matches!(
            estimate_pattern_density(&lattice, &pattern(&[0; 6])),
            Err(Error::NoAdmissibleWindow)
        ));
        assert!(matches!(
            estimate_pattern_density(&lattice, &pattern(&[0; 7])),
            Err(Error::PatternTooLong { .. })
        ));
    }

    #[test]
    fn single_site_pattern_completeness() {
        let mut config = SimConfig::new(ModelVariant::NoScreening, 30, 4.0, 5, 1);
        config.frozen_sites = vec![2, 17];
        let out = run_replica(&config, 0).unwrap();
        let lattice = &out.lattice;
        let total: f64 = SiteState::ALL
            .iter()
            .map(|&s| estimate_pattern_density(lattice, &[s]).unwrap())
            .sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let bad_size = SimConfig::new(ModelVariant::NoScreening, 2, 1.0, 0, 1);
        assert!(matches!(bad_size.validate(), Err(Error::RingTooSmall(2))));

        let mut all_frozen = SimConfig::new(ModelVariant::NoScreening, 3, 1.0, 0, 1);
        all_frozen.frozen_sites = vec![0, 1, 2];
        assert!(matches!(all_frozen.validate(), Err(Error::AllSitesFrozen(3))));

        let mut bad_index = SimConfig::new(ModelVariant::NoScreening, 3, 1.0, 0, 1);
        bad_index.frozen_sites = vec![3];
        assert!(matches!(
            bad_index.validate(),
            Err(Error::FrozenIndexOutOfRange { .. })
        ));

        let mut bad_times = SimConfig::new(ModelVariant::NoScreening, 3, 1.0, 0, 1);
        bad_times.sample_times = vec![0.5, 0.25];
        assert!(matches!(bad_times.validate(), Err(Error::BadSampleTimes)));

        let mut late_times = SimConfig::new(ModelVariant::NoScreening, 3, 1.0, 0, 1);
        late_times.sample_times = vec![2.0];
        assert!(matches!(late_times.validate(), Err(Error::BadSampleTimes)));

        let config = SimConfig::new(ModelVariant::NoScreening, 3, 1.0, 0, 2);
        assert!(matches!(
            run_replica(&config, 2),
            Err(Error::ReplicaOutOfRange { .. })
        ));
    }

    #[test]
    fn one_sided_starts_in_vacuum() {
        let mut config = SimConfig::new(ModelVariant::NoScreening, 200, 1.0, 11, 4);
        config.frozen_sites = vec![0];
        config.sample_times = vec![0.0, 1.0];
        let samples = run_one_sided(&config).unwrap();
        assert_eq!(samples[0].f[0].mean, 1.0);
        assert_eq!(samples[0].f[1].mean, 0.0);
        assert_eq!(samples[0].r.mean, 0.0);
        // indicators always partition: f0 + f1 + f2 + f3 = 1
        for s in &samples {
            let total = s.f[0].mean + s.f[1].mean + s.f[2].mean + s.f3.mean;
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn one_sided_geometry_is_checked() {
        let mut config = SimConfig::new(ModelVariant::NoScreening, 200, 1.0, 11, 4);
        config.frozen_sites = vec![1];
        assert!(matches!(run_one_sided(&config), Err(Error::BadOneSidedFreeze)));

        let mut small = SimConfig::new(ModelVariant::NoScreening, 50, 1.0, 11, 4);
        small.frozen_sites = vec![0];
        assert!(matches!(
            run_one_sided(&small),
            Err(Error::OneSidedRingTooSmall(50))
        ));

        let mut both = SimConfig::new(ModelVariant::NoScreening, 200, 1.0, 11, 4);
        both.frozen_sites = vec![0, 2];
        assert!(run_one_sided(&both).is_ok());
    }

    #[test]
    fn zero_horizon_gives_empty_lattice() {
        let mut config = SimConfig::new(ModelVariant::NoScreening, 10, 0.0, 3, 1);
        config.sample_times = vec![0.0];
        let out = run_replica(&config, 0).unwrap();
        assert_eq!(out.samples[0].site_density, [1.0, 0.0, 0.0, 0.0]);
    }
}
