//! Exact evolution of the full configuration distribution on a small ring.
//!
//! A ring of N <= 8 sites has 4^N configurations; the forward equation
//! d p / dt = Q^T p is a linear ODE small enough to integrate directly.
//! This gives ground-truth marginals to validate the simulator against,
//! on exactly the same finite ring. Comparisons against the infinite-lattice
//! density ODEs carry finite-size effects and are not exact.

use crate::error::Error;
use crate::model::{transition_rate, ModelVariant, NeighborhoodTriple, SiteState};

pub const MIN_RING: usize = 3;
pub const MAX_RING: usize = 8;

/// Fixed integration step of the forward equation.
pub const DEFAULT_STEP: f64 = 1e-3;

/// Sparse generator of the finite-ring process: every transition has rate 1
/// and the diagonal is minus the out-degree, so each row sums to zero.
#[derive(Clone, Debug)]
pub struct GeneratorMatrix {
    size: usize,
    n_states: usize,
    /// (from, to) pairs of rate-1 transitions; configurations differ at
    /// exactly one site.
    transitions: Vec<(u32, u32)>,
}

#[inline]
fn site_of(config: usize, site: usize) -> u8 {
    ((config >> (2 * site)) & 3) as u8
}

#[inline]
fn with_site(config: usize, site: usize, state: u8) -> usize {
    (config & !(3 << (2 * site))) | ((state as usize) << (2 * site))
}

/// Enumerate all rate-1 transitions of the `size`-ring.
pub fn build_generator(model: ModelVariant, size: usize) -> Result<GeneratorMatrix, Error> {
    if !(MIN_RING..=MAX_RING).contains(&size) {
        return Err(Error::OracleSizeOutOfRange(size));
    }
    let n_states = 1usize << (2 * size);
    let mut transitions = Vec::new();
    for config in 0..n_states {
        for site in 0..size {
            let triple = NeighborhoodTriple::new(
                SiteState::from_code(site_of(config, (site + size - 1) % size))?,
                SiteState::from_code(site_of(config, site))?,
                SiteState::from_code(site_of(config, (site + 1) % size))?,
            );
            for target in [SiteState::First, SiteState::Second, SiteState::Both] {
                if transition_rate(model, target, triple) == 1 {
                    transitions.push((
                        config as u32,
                        with_site(config, site, target.code()) as u32,
                    ));
                }
            }
        }
    }
    Ok(GeneratorMatrix {
        size,
        n_states,
        transitions,
    })
}

impl GeneratorMatrix {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn transitions(&self) -> &[(u32, u32)] {
        &self.transitions
    }

    /// Out-degree of every configuration; zero means jammed.
    pub fn out_degrees(&self) -> Vec<u32> {
        let mut deg = vec![0u32; self.n_states];
        for &(from, _) in &self.transitions {
            deg[from as usize] += 1;
        }
        deg
    }

    /// Apply the transposed generator: `out = Q^T p`.
    pub fn apply(&self, p: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for &(from, to) in &self.transitions {
            let flow = p[from as usize];
            out[from as usize] -= flow;
            out[to as usize] += flow;
        }
    }
}

/// Probability vector over all configurations of the ring.
#[derive(Clone, Debug)]
pub struct FullDistribution {
    size: usize,
    probs: Vec<f64>,
}

impl FullDistribution {
    /// Point mass on the all-empty configuration.
    pub fn initial(size: usize) -> Result<Self, Error> {
        if !(MIN_RING..=MAX_RING).contains(&size) {
            return Err(Error::OracleSizeOutOfRange(size));
        }
        let mut probs = vec![0.0; 1 << (2 * size)];
        probs[0] = 1.0;
        Ok(Self { size, probs })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn min_entry(&self) -> f64 {
        self.probs.iter().fold(f64::INFINITY, |a, &b| a.min(b))
    }

    /// Advance the forward equation by `dt` with fixed-step RK4.
    pub fn evolve_in_place(&mut self, gen: &GeneratorMatrix, dt: f64) -> Result<(), Error> {
        if gen.size != self.size {
            return Err(Error::OracleSizeOutOfRange(gen.size));
        }
        if !dt.is_finite() || dt < 0.0 {
            return Err(Error::BadHorizon(dt));
        }
        let step = DEFAULT_STEP;
        let ratio = dt / step;
        let (n_full, remainder) = if (ratio.round() * step - dt).abs() <= 1e-9 * dt.max(1.0) {
            (ratio.round() as u64, 0.0)
        } else {
            let n = ratio.floor() as u64;
            (n, dt - n as f64 * step)
        };

        let n = self.probs.len();
        let mut k1 = vec![0.0; n];
        let mut k2 = vec![0.0; n];
        let mut k3 = vec![0.0; n];
        let mut k4 = vec![0.0; n];
        let mut stage = vec![0.0; n];

        let mut do_step = |p: &mut Vec<f64>, h: f64| {
            gen.apply(p, &mut k1);
            for i in 0..n {
                stage[i] = p[i] + h / 2.0 * k1[i];
            }
            gen.apply(&stage, &mut k2);
            for i in 0..n {
                stage[i] = p[i] + h / 2.0 * k2[i];
            }
            gen.apply(&stage, &mut k3);
            for i in 0..n {
                stage[i] = p[i] + h * k3[i];
            }
            gen.apply(&stage, &mut k4);
            for i in 0..n {
                p[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        };

        for _ in 0..n_full {
            do_step(&mut self.probs, step);
        }
        if remainder > 0.0 {
            do_step(&mut self.probs, remainder);
        }
        Ok(())
    }

    /// Exact probability that the window starting at `offset` shows
    /// `pattern`.
    pub fn marginal_at(&self, offset: usize, pattern: &[SiteState]) -> Result<f64, Error> {
        if pattern.is_empty() {
            return Err(Error::EmptyPattern);
        }
        if pattern.len() > self.size {
            return Err(Error::PatternTooLong {
                pattern: pattern.len(),
                size: self.size,
            });
        }
        let mut total = 0.0;
        'config: for (config, &p) in self.probs.iter().enumerate() {
            for (j, want) in pattern.iter().enumerate() {
                if site_of(config, (offset + j) % self.size) != want.code() {
                    continue 'config;
                }
            }
            total += p;
        }
        Ok(total)
    }

    /// Pattern probability at offset 0; by rotation invariance of generator
    /// and initial condition this does not depend on the offset.
    pub fn marginal(&self, pattern: &[SiteState]) -> Result<f64, Error> {
        self.marginal_at(0, pattern)
    }

    /// The four single-site densities.
    pub fn site_density(&self) -> [f64; 4] {
        let mut density = [0.0; 4];
        for (config, &p) in self.probs.iter().enumerate() {
            density[site_of(config, 0) as usize] += p;
        }
        density
    }

    /// Total mass on configurations with no enabled transition.
    pub fn jammed_mass(&self, gen: &GeneratorMatrix) -> f64 {
        let deg = gen.out_degrees();
        self.probs
            .iter()
            .enumerate()
            .filter(|(config, _)| deg[*config] == 0)
            .map(|(_, &p)| p)
            .sum()
    }
}

/// Evolve the point mass on the empty ring to time `t`.
pub fn evolve(gen: &GeneratorMatrix, t: f64) -> Result<FullDistribution, Error> {
    let mut dist = FullDistribution::initial(gen.size)?;
    dist.evolve_in_place(gen, t)?;
    Ok(dist)
}
