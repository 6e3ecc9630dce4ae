use proptest::prelude::*;

use qlink::coincidence::{
    accidental_rate, analyze, car, qber, visibility_measured, window_acceptance, ArmEfficiency, CoincidenceConfig,
    DetectionSetup, DetectorSpec, PairFlux,
};
use qlink::demux::{band_fraction, build_channel_plan, GridSpec};
use qlink::montecarlo::{count_coincidences, match_events};
use qlink::qkd::{binary_entropy, skr_total, KeyRateParams};
use qlink::units::{integrate_band, AttenuationDb, ShapeKind, SpectralShape, Wavelength};

fn nm(v: f64) -> Wavelength<f64> {
    Wavelength::from_nm(v).unwrap()
}

fn shape() -> impl Strategy<Value = SpectralShape<f64>> {
    (
        prop_oneof![Just(ShapeKind::Gaussian), Just(ShapeKind::SincSquared), Just(ShapeKind::TopHat)],
        0.5f64..20.0,
        0.1f64..1e3,
    )
        .prop_map(|(kind, fwhm, total)| SpectralShape::new(kind, nm(810.44), fwhm, total).unwrap())
}

fn setup(sigma: f64, dark: f64, window: f64, v0: f64) -> DetectionSetup<f64> {
    let det = DetectorSpec::new(0.5, sigma, 0.0, dark).unwrap();
    let arm = ArmEfficiency::new(0.9, 0.5, 1.0, AttenuationDb::zero(), 0.5).unwrap();
    DetectionSetup::new(arm, arm, det, det, CoincidenceConfig::new(window).unwrap(), v0).unwrap()
}

fn sorted_times() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..200.0, 0..40).prop_map(|mut v| {
        v.sort_by(f64::total_cmp);
        v
    })
}

proptest! {
    #[test]
    fn band_integral_is_additive(s in shape(), lo in 800.0f64..810.0, a in 0.01f64..5.0, b in 0.01f64..5.0) {
        let mid = lo + a;
        let hi = mid + b;
        let whole = integrate_band(&s, nm(lo), nm(hi)).unwrap();
        let parts = integrate_band(&s, nm(lo), nm(mid)).unwrap() + integrate_band(&s, nm(mid), nm(hi)).unwrap();
        prop_assert!((whole - parts).abs() <= 1e-8 * s.total());
    }

    #[test]
    fn band_integral_grows_with_width(s in shape(), lo in 800.0f64..810.0, a in 0.01f64..5.0, b in 0.0f64..5.0) {
        let narrow = integrate_band(&s, nm(lo), nm(lo + a)).unwrap();
        let wide = integrate_band(&s, nm(lo), nm(lo + a + b)).unwrap();
        prop_assert!(wide >= narrow - 1e-9 * s.total());
        prop_assert!(wide <= s.total() && narrow >= 0.0);
    }

    #[test]
    fn wavelength_frequency_round_trip(v in 200.0f64..2000.0) {
        let w = nm(v);
        let back = Wavelength::from_frequency_thz(w.frequency_thz()).unwrap();
        prop_assert!((back.nm() - v).abs() <= 1e-12 * v);
    }

    #[test]
    fn qber_tracks_visibility(c in 0.0f64..1e8, a in 1e-3f64..1e8, v0 in 0.5f64..=1.0) {
        let v = visibility_measured(c, a, v0).unwrap();
        let q = qber(c, a, v0).unwrap();
        prop_assert!((q - (1.0 - v) / 2.0).abs() <= 1e-12);
        prop_assert!((0.0..=0.5).contains(&q));
    }

    #[test]
    fn acceptance_rises_with_window(s in 0.0f64..2.0, t in 0.01f64..10.0, dt in 0.0f64..10.0) {
        let det = DetectorSpec::new(0.5, s, 0.0, 0.0).unwrap();
        let narrow = window_acceptance(&CoincidenceConfig::new(t).unwrap(), &det, &det);
        let wide = window_acceptance(&CoincidenceConfig::new(t + dt).unwrap(), &det, &det);
        prop_assert!(wide >= narrow);
        prop_assert!((0.0..=1.0).contains(&narrow));
    }

    #[test]
    fn car_falls_inversely_with_power(rate in 1e3f64..1e8, k in 1.5f64..20.0, w in 0.1f64..5.0) {
        // darks off: CAR(k P) = CAR(P) / k
        let s = setup(0.3, 0.0, w, 0.99);
        let low = analyze(&[PairFlux::lossless(rate)], &s).unwrap().total.car.value();
        let high = analyze(&[PairFlux::lossless(rate * k)], &s).unwrap().total.car.value();
        prop_assert!((low / high - k).abs() <= 1e-9 * k);
    }

    #[test]
    fn rate_report_stays_in_range(rates in prop::collection::vec(0.0f64..1e8, 1..8), dark in 1.0f64..1e4, w in 0.1f64..5.0) {
        let s = setup(0.4, dark, w, 0.97);
        let fluxes: Vec<_> = rates.iter().map(|&r| PairFlux::lossless(r)).collect();
        let report = analyze(&fluxes, &s).unwrap();
        for p in report.pairs.iter().chain(std::iter::once(&report.total)) {
            prop_assert!(p.trues >= 0.0 && p.accidentals >= 0.0);
            prop_assert!(p.trues <= p.detected_pairs * (1.0 + 1e-12));
            prop_assert!((0.0..=0.5).contains(&p.qber));
            prop_assert!((0.0..=1.0).contains(&p.visibility));
        }
    }

    #[test]
    fn accidentals_symmetric_in_arms(sa in 0.0f64..1e7, sb in 0.0f64..1e7, w in 0.01f64..10.0) {
        let cfg = CoincidenceConfig::new(w).unwrap();
        prop_assert_eq!(accidental_rate(sa, sb, &cfg), accidental_rate(sb, sa, &cfg));
        prop_assert!(car(1.0, accidental_rate(sa, sb, &cfg) + 1e-9).is_ok());
    }

    #[test]
    fn entropy_is_symmetric(e in 0.0f64..=1.0) {
        let h = binary_entropy(e).unwrap();
        prop_assert!((h - binary_entropy(1.0 - e).unwrap()).abs() <= 1e-12);
        prop_assert!((0.0..=1.0).contains(&h));
    }

    #[test]
    fn key_total_ignores_order_and_adds_up(rates in prop::collection::vec(1e3f64..1e8, 2..8), seed in any::<u64>()) {
        let s = setup(0.4, 100.0, 1.0, 0.99);
        let p = KeyRateParams::default();
        let stats = analyze(&rates.iter().map(|&r| PairFlux::lossless(r)).collect::<Vec<_>>(), &s).unwrap().pairs;
        let mut shuffled = stats.clone();
        let n = shuffled.len();
        shuffled.rotate_left((seed % n as u64) as usize);
        let total = skr_total(&stats, 0.99, &p).unwrap().skr_total;
        let permuted = skr_total(&shuffled, 0.99, &p).unwrap().skr_total;
        prop_assert!((total - permuted).abs() <= 1e-9 * total.max(1.0));
        let (head, tail) = stats.split_at(1);
        let split = skr_total(head, 0.99, &p).unwrap().skr_total + skr_total(tail, 0.99, &p).unwrap().skr_total;
        prop_assert!((total - split).abs() <= 1e-9 * total.max(1.0));
    }

    #[test]
    fn plan_is_deterministic(m in 0usize..29, bw in 10.0f64..200.0, gap in 10.0f64..500.0) {
        let grid = GridSpec::new(bw, gap, m);
        let a = build_channel_plan(nm(405.22), &grid).unwrap();
        let b = build_channel_plan(nm(405.22), &grid).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(a.validate().is_ok());
    }

    #[test]
    fn wider_spacing_never_captures_more(bw in 20.0f64..200.0, gap in 20.0f64..500.0, extra in 0.0f64..500.0) {
        let spectrum = SpectralShape::new(ShapeKind::Gaussian, nm(810.44), 11.0, 1.0).unwrap();
        let total = |g: f64| {
            let plan = build_channel_plan(nm(405.22), &GridSpec::new(bw, g, 4)).unwrap();
            (0..4).map(|k| band_fraction(&plan, &spectrum, k).unwrap()).sum::<f64>()
        };
        prop_assert!(total(gap + extra) <= total(gap) + 1e-9);
    }

    #[test]
    fn coincidence_count_is_symmetric(a in sorted_times(), b in sorted_times(), w in 0.1f64..5.0) {
        let cfg = CoincidenceConfig::new(w).unwrap();
        let ab = count_coincidences(&a, &b, &cfg, 1e4).unwrap();
        let ba = count_coincidences(&b, &a, &cfg, 1e4).unwrap();
        prop_assert_eq!(ab.coincidences, ba.coincidences);
        prop_assert!(ab.coincidences as usize <= a.len().min(b.len()));
    }

    #[test]
    fn matches_respect_window_and_use_events_once(a in sorted_times(), b in sorted_times(), w in 0.1f64..5.0) {
        let m = match_events(&a, &b, w, 0.0).unwrap();
        let mut seen_b = std::collections::HashSet::new();
        for pair in m.windows(2) {
            prop_assert!(pair[0].0 < pair[1].0);
        }
        for &(i, j) in &m {
            prop_assert!((a[i] - b[j]).abs() <= w / 2.0);
            prop_assert!(seen_b.insert(j));
        }
    }
}
