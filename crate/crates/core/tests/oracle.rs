use qlink::coincidence::{singles_rate, ArmEfficiency, CoincidenceConfig, DetectionSetup, DetectorSpec, PairFlux};
use qlink::montecarlo::{compare, simulate_channel_pair, simulate_many, ChannelLink, McConfig};
use qlink::scenario::{ScenarioParams, Toggle};
use qlink::units::AttenuationDb;

fn report_failures(link: &ChannelLink, cfg: &McConfig) -> Vec<String> {
    let run = simulate_channel_pair(cfg).unwrap();
    compare(&run.report, &link.analytic().unwrap())
        .into_iter()
        .filter(|c| !c.within(3.0))
        .map(|c| format!("{}: observed {} expected {} sigma {}", c.statistic, c.observed, c.expected, c.sigma))
        .collect()
}

fn lab_link(pump_power_mw: f64) -> ChannelLink {
    let preset = ScenarioParams {
        pump_power_mw,
        ..ScenarioParams::lab()
    }
    .build()
    .unwrap();
    ChannelLink {
        setup: *preset.setup(),
        flux: preset.fluxes(Toggle::Demux)[0],
    }
}

// One-use matching absorbs accidentals that land on an event already in a
// true pair; the additive analytic model holds while that share is small.
#[test]
fn lab_channel_pair_matches_analytic_rates() {
    let link = lab_link(0.05);
    let analytic = link.analytic().unwrap();
    assert!(analytic.car.value() > 100.0);
    let duration = (2e4 / analytic.trues).max(300.0 / analytic.accidentals);
    let cfg = McConfig::new(link, duration, 7, 0).unwrap();
    let failures = report_failures(&link, &cfg);
    assert!(failures.is_empty(), "{failures:#?}");
}

#[test]
fn absorbed_accidentals_explain_high_occupancy_deficit() {
    let link = lab_link(1.0);
    let a = link.analytic().unwrap();
    let duration = 2e4 / a.trues;
    let counts = simulate_channel_pair(&McConfig::new(link, duration, 7, 0).unwrap()).unwrap().report.counts;
    // share of accidentals touching an event already paired as a true coincidence
    let absorbed = 1.0 - (1.0 - a.trues / a.singles_a) * (1.0 - a.trues / a.singles_b);
    let expected = (a.trues - absorbed * a.accidentals) * duration;
    let observed = counts.coincidences as f64 - counts.offset_accidentals as f64;
    let sigma = ((a.trues + 2.0 * a.accidentals) * duration).sqrt();
    assert!(absorbed > 0.3);
    assert!((observed - expected).abs() <= 3.0 * sigma, "{observed} vs {expected} +/- {sigma}");
    assert!(observed < a.trues * duration - 3.0 * sigma);
}

#[test]
fn dead_time_singles_follow_non_paralyzable_law() {
    let det = DetectorSpec::new(0.5, 0.2, 50.0, 1e3).unwrap();
    let arm = ArmEfficiency::new(1.0, 1.0, 1.0, AttenuationDb::zero(), 0.5).unwrap();
    let setup = DetectionSetup::new(arm, arm, det, det, CoincidenceConfig::new(1.0).unwrap(), 0.99).unwrap();
    let link = ChannelLink {
        setup,
        flux: PairFlux::lossless(2e6),
    };
    let cfg = McConfig::new(link, 0.05, 3, 0).unwrap();
    let counts = simulate_channel_pair(&cfg).unwrap().report.counts;
    let expected = singles_rate(2e6, 0.5, &det) * 0.05;
    for n in [counts.singles_a, counts.singles_b] {
        assert!((n as f64 - expected).abs() <= 3.0 * expected.sqrt(), "{n} vs {expected}");
    }
}

#[test]
fn parallel_runs_match_sequential_runs() {
    let preset = ScenarioParams {
        pump_power_mw: 0.05,
        ..ScenarioParams::lab()
    }
    .build()
    .unwrap();
    let fluxes = preset.fluxes(Toggle::Demux);
    let cfgs: Vec<McConfig> = fluxes
        .iter()
        .enumerate()
        .map(|(k, f)| {
            let link = ChannelLink {
                setup: *preset.setup(),
                flux: *f,
            };
            McConfig::new(link, 0.01, 42, k as u64).unwrap()
        })
        .collect();
    let parallel = simulate_many(&cfgs);
    for (cfg, par) in cfgs.iter().zip(parallel) {
        assert_eq!(simulate_channel_pair(cfg).unwrap().report, par.unwrap());
    }
}
