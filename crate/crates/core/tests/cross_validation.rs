//! Cross-checks between the three computation routes: the kinetic Monte
//! Carlo simulator against the exact small-ring oracle, the frozen-site
//! geometry against the closed-form identities, and bulk pattern densities
//! against the product form from the ODE trajectory.

use parking_core::analysis::{
    aggregate, check_factorization, compare, CompareThresholds, FactorizationEstimate,
    ReferenceSource,
};
use parking_core::model::{ModelVariant, SiteState};
use parking_core::ode::{integrate, OdeSpec};
use parking_core::oracle::{build_generator, FullDistribution};
use parking_core::simulator::{run_aggregated, run_one_sided, run_replica, SimConfig};

fn pattern(codes: &[u8]) -> Vec<SiteState> {
    codes.iter().map(|&c| SiteState::from_code(c).unwrap()).collect()
}

/// Simulator estimates must agree with the exact finite-ring law: N = 6,
/// both models, all site densities and three length-3 patterns, 1e5
/// replicas, within 4 standard errors.
#[test]
fn simulator_matches_oracle_on_small_ring() {
    let times = [0.5, 1.0, 2.0, 5.0];
    let patterns = [[0u8, 1, 0], [0, 0, 0], [1, 0, 1]];
    for model in ModelVariant::ALL {
        let mut config = SimConfig::new(model, 6, 5.0, 0x5EED_0001, 100_000);
        config.sample_times = times.to_vec();
        config.patterns = patterns.iter().map(|p| pattern(p)).collect();
        let sim = run_aggregated(&config).unwrap();

        let gen = build_generator(model, 6).unwrap();
        let mut dist = FullDistribution::initial(6).unwrap();
        let mut prev = 0.0;
        for (sample, &t) in sim.iter().zip(&times) {
            dist.evolve_in_place(&gen, t - prev).unwrap();
            prev = t;
            let exact = dist.site_density();
            for (s, reference) in exact.iter().enumerate() {
                let report = compare(
                    format!("{model}:D({s})"),
                    t,
                    *reference,
                    ReferenceSource::Oracle,
                    sample.site_density[s],
                    CompareThresholds::default(),
                );
                assert!(
                    report.pass,
                    "{} at t={t}: sim {} vs oracle {} (z={})",
                    report.observable, report.estimate.mean, report.reference, report.z_score
                );
            }
            for (p, (_, est)) in patterns.iter().zip(&sample.patterns) {
                let exact = dist.marginal(&pattern(p)).unwrap();
                let report = compare(
                    format!("{model}:D{p:?}"),
                    t,
                    exact,
                    ReferenceSource::Oracle,
                    *est,
                    CompareThresholds::default(),
                );
                assert!(
                    report.pass,
                    "{} at t={t}: sim {} vs oracle {} (z={})",
                    report.observable, report.estimate.mean, report.reference, report.z_score
                );
            }
        }
    }
}

/// With sites 0 and 2 frozen, site 1 sees exactly a two-jump chain, so
/// P(m1 = 1) = t e^{-t} for both models.
#[test]
fn isolated_site_conditional_law() {
    for model in ModelVariant::ALL {
        let mut config = SimConfig::new(model, 200, 2.0, 0x5EED_0002, 20_000);
        config.frozen_sites = vec![0, 2];
        config.sample_times = vec![0.5, 1.0, 2.0];
        let samples = run_one_sided(&config).unwrap();
        for s in &samples {
            let reference = s.time * (-s.time).exp();
            let report = compare(
                format!("{model}:f1"),
                s.time,
                reference,
                ReferenceSource::ClosedForm,
                s.f[1],
                CompareThresholds::default(),
            );
            assert!(
                report.pass,
                "{} at t={}: {} vs {} (z={})",
                report.observable, s.time, report.estimate.mean, report.reference, report.z_score
            );
        }
    }
}

/// Closed-form check: next to a frozen site, the probability of an empty
/// first line is exp(e^{-t} - 1) in the no-screening model.
#[test]
fn first_line_free_closed_form_matches_frozen_site_run() {
    let mut config = SimConfig::new(ModelVariant::NoScreening, 300, 2.0, 0x5EED_0003, 20_000);
    config.frozen_sites = vec![0];
    config.sample_times = vec![0.5, 1.0, 2.0];
    let samples = run_one_sided(&config).unwrap();
    for s in &samples {
        let reference = ((-s.time).exp() - 1.0).exp();
        let report = compare(
            "f0+f2",
            s.time,
            reference,
            ReferenceSource::ClosedForm,
            s.f02,
            CompareThresholds::default(),
        );
        assert!(
            report.pass,
            "f0+f2 at t={}: {} vs {} (z={})",
            s.time, report.estimate.mean, report.reference, report.z_score
        );
    }
}

/// Bulk pattern densities D(s,0,s') factorize into f(s) f(s') e^{-t}.
#[test]
fn factorization_product_form() {
    let pairs: [(u8, u8); 5] = [(0, 0), (0, 1), (1, 0), (1, 1), (2, 2)];
    let times = [1.0, 2.0];
    let mut config = SimConfig::new(ModelVariant::NoScreening, 2000, 2.0, 0x5EED_0004, 100);
    config.frozen_sites = vec![0];
    config.sample_times = times.to_vec();
    config.patterns = pairs.iter().map(|&(s, sp)| pattern(&[s, 0, sp])).collect();
    let sim = run_aggregated(&config).unwrap();

    let trajectory = integrate(&OdeSpec {
        t_max: 2.0,
        ..OdeSpec::new(ModelVariant::NoScreening)
    })
    .unwrap();

    let mut estimates = Vec::new();
    for sample in &sim {
        for (&(s, sp), (_, est)) in pairs.iter().zip(&sample.patterns) {
            estimates.push(FactorizationEstimate {
                time: sample.time,
                pair: (
                    SiteState::from_code(s).unwrap(),
                    SiteState::from_code(sp).unwrap(),
                ),
                estimate: *est,
            });
        }
    }
    let reports =
        check_factorization(&estimates, &trajectory, CompareThresholds::default()).unwrap();
    assert_eq!(reports.len(), pairs.len() * times.len());
    for r in &reports {
        assert!(
            r.pass,
            "{} at t={}: {} vs {} (z={})",
            r.observable, r.time, r.estimate.mean, r.reference, r.z_score
        );
    }
}

/// The simulator's default bulk geometry reproduces the infinite-lattice
/// first-line density at a moderate size already.
#[test]
fn bulk_first_line_density_tracks_ode() {
    let mut config = SimConfig::new(ModelVariant::NoScreening, 2000, 4.0, 0x5EED_0005, 60);
    config.sample_times = vec![4.0];
    let sim = run_aggregated(&config).unwrap();
    let trajectory = integrate(&OdeSpec {
        t_max: 4.0,
        ..OdeSpec::new(ModelVariant::NoScreening)
    })
    .unwrap();
    let ode = trajectory.end_state();
    let report = compare(
        "line1",
        4.0,
        ode.line1(),
        ReferenceSource::Ode,
        sim[0].line1,
        CompareThresholds::default(),
    );
    assert!(report.pass, "line1: z = {}", report.z_score);
}

/// Replaying a replica's own samples through `aggregate` reproduces the
/// aggregated output: replica merging is order-independent.
#[test]
fn aggregation_matches_manual_merge() {
    let mut config = SimConfig::new(ModelVariant::Screening, 50, 2.0, 17, 8);
    config.sample_times = vec![1.0, 2.0];
    let aggregated = run_aggregated(&config).unwrap();
    for (j, agg) in aggregated.iter().enumerate() {
        let manual: Vec<f64> = (0..config.replicas)
            .map(|k| run_replica(&config, k).unwrap().samples[j].site_density[1])
            .collect();
        let expected = aggregate(&manual).unwrap();
        assert_eq!(agg.site_density[1].mean, expected.mean);
        assert_eq!(agg.site_density[1].stderr, expected.stderr);
    }
}
