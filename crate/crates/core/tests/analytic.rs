use macsim::analytic::{delay_vs_load, delay_vs_throughput, generate_family, throughput_vs_load, AnalyticError};
use macsim::sweep::{make_sweep, SweepSpec};
use macsim::{AccessTechnique, Execution, ScenarioKind, TechniqueParams};

fn params(tech: AccessTechnique) -> TechniqueParams {
    let mut p = TechniqueParams::defaults(tech);
    p.kappa.get_or_insert(2.0);
    p
}

#[test]
fn reference_values() {
    let p = params(AccessTechnique::PureAloha);
    assert!((throughput_vs_load(AccessTechnique::PureAloha, 0.5, &p).unwrap() - 0.183940).abs() < 5e-7);
    assert!((throughput_vs_load(AccessTechnique::SlottedAloha, 1.0, &p).unwrap() - 0.367879).abs() < 5e-7);
    assert!((throughput_vs_load(AccessTechnique::CsmaCa, 1.0, &p).unwrap() - 0.5287).abs() < 1e-4);
    assert!((delay_vs_load(AccessTechnique::PureAloha, 1.0, &p).unwrap() - 3.6218).abs() < 5e-5);
    assert!((delay_vs_throughput(AccessTechnique::Tdma, 0.5, &p).unwrap() - 0.404).abs() < 1e-12);
}

#[test]
fn delays_at_low_throughput() {
    let expected = [
        (AccessTechnique::Tdma, 0.226222),
        (AccessTechnique::Fdma, 0.422222),
        (AccessTechnique::SlottedAloha, 1.669860),
        (AccessTechnique::PureAloha, 1.346532),
        (AccessTechnique::CsmaCa, 1.346532),
    ];
    for (tech, d) in expected {
        let got = delay_vs_throughput(tech, 0.1, &params(tech)).unwrap();
        assert!((got - d).abs() < 5e-7, "{tech}: {got}");
    }
}

#[test]
fn queueing_delay_growth_between_light_and_heavy_load() {
    let ratio = |tech| {
        let p = params(tech);
        delay_vs_load(tech, 0.95, &p).unwrap() / delay_vs_load(tech, 0.1, &p).unwrap()
    };
    assert!((ratio(AccessTechnique::Tdma) - 17.6994).abs() < 5e-5);
    assert!((ratio(AccessTechnique::Fdma) - 9.9474).abs() < 5e-5);
}

#[test]
fn family_has_aligned_rows() {
    let spec: SweepSpec = "0:1:11:lin".parse().unwrap();
    let sweep = make_sweep(&spec).unwrap();
    let jobs: Vec<_> = AccessTechnique::ALL.iter().map(|&t| (t, params(t))).collect();
    let fam = generate_family(&jobs, ScenarioKind::DelayVsLoad, &sweep, Execution::Parallel).unwrap();
    assert_eq!(fam.len(), 5);
    assert!(fam.iter().all(|c| c.len() == 11));
    let seq = generate_family(&jobs, ScenarioKind::DelayVsLoad, &sweep, Execution::Sequential).unwrap();
    assert_eq!(fam, seq);
    // G = 1 saturates the queueing models only
    for (curve, (tech, _)) in fam.iter().zip(&jobs) {
        assert_eq!(curve[10].saturated, !tech.is_contention(), "{tech}");
    }
}

#[test]
fn saturation_is_an_error_for_point_queries() {
    let p = params(AccessTechnique::Fdma);
    assert!(matches!(delay_vs_load(AccessTechnique::Fdma, 1.0, &p), Err(AnalyticError::Saturated { .. })));
}
