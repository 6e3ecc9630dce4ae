//! Analytic detection statistics for conjugate detector pairs: singles,
//! true and accidental coincidences, CAR, visibility and QBER.

use std::fmt;

use crate::error::{domain, Error, Result};
use crate::scalar::Real;
use crate::units::AttenuationDb;

const NS: f64 = 1e-9;
// FWHM = 2 sqrt(2 ln 2) sigma
const GAUSS_FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949_4;

fn unit_interval<T: Real>(what: &'static str, v: T) -> Result<T> {
    if v > T::zero() && v <= T::one() {
        Ok(v)
    } else {
        Err(domain(what, format!("{v} must lie in (0, 1]")))
    }
}

fn non_negative<T: Real>(what: &'static str, v: T) -> Result<T> {
    if v.is_finite() && v >= T::zero() {
        Ok(v)
    } else {
        Err(domain(what, format!("{v} must be finite and >= 0")))
    }
}

/// Single-photon detector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorSpec<T> {
    efficiency: T,
    jitter_sigma_ns: T,
    dead_time_ns: T,
    dark_rate: T,
}

impl<T: Real> DetectorSpec<T> {
    pub fn new(efficiency: T, jitter_sigma_ns: T, dead_time_ns: T, dark_rate: T) -> Result<Self> {
        Ok(Self {
            efficiency: unit_interval("detector efficiency", efficiency)?,
            jitter_sigma_ns: non_negative("detector jitter", jitter_sigma_ns)?,
            dead_time_ns: non_negative("detector dead time", dead_time_ns)?,
            dark_rate: non_negative("detector dark rate", dark_rate)?,
        })
    }

    /// Builds a detector whose timing resolution is quoted as a Gaussian FWHM.
    pub fn with_jitter_fwhm(efficiency: T, jitter_fwhm_ns: T, dead_time_ns: T, dark_rate: T) -> Result<Self> {
        Self::new(efficiency, jitter_fwhm_ns / T::lit(GAUSS_FWHM_PER_SIGMA), dead_time_ns, dark_rate)
    }

    pub fn efficiency(&self) -> T {
        self.efficiency
    }

    pub fn jitter_sigma_ns(&self) -> T {
        self.jitter_sigma_ns
    }

    pub fn dead_time_ns(&self) -> T {
        self.dead_time_ns
    }

    pub fn dark_rate(&self) -> T {
        self.dark_rate
    }
}

/// Multiplicative transmission chain of one arm, source to detector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmEfficiency<T> {
    pub optics: T,
    pub fiber_coupling: T,
    pub demux_insertion: T,
    pub link: AttenuationDb<T>,
    pub detector: T,
}

impl<T: Real> ArmEfficiency<T> {
    pub fn new(optics: T, fiber_coupling: T, demux_insertion: T, link: AttenuationDb<T>, detector: T) -> Result<Self> {
        Ok(Self {
            optics: unit_interval("arm optics transmission", optics)?,
            fiber_coupling: unit_interval("arm fiber coupling", fiber_coupling)?,
            demux_insertion: unit_interval("arm demux insertion", demux_insertion)?,
            link,
            detector: unit_interval("arm detector efficiency", detector)?,
        })
    }

    pub fn with_link(mut self, link: AttenuationDb<T>) -> Self {
        self.link = link;
        self
    }

    /// Product of all factors.
    pub fn total(&self) -> T {
        arm_total(self)
    }
}

pub fn arm_total<T: Real>(arm: &ArmEfficiency<T>) -> T {
    arm.optics * arm.fiber_coupling * arm.demux_insertion * arm.link.linear() * arm.detector
}

/// Full coincidence window width; a coincidence needs `|Δt| <= window/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoincidenceConfig<T> {
    window_ns: T,
}

impl<T: Real> CoincidenceConfig<T> {
    pub fn new(window_ns: T) -> Result<Self> {
        if window_ns.is_finite() && window_ns > T::zero() {
            Ok(Self { window_ns })
        } else {
            Err(domain("coincidence window", format!("{window_ns} ns must be > 0")))
        }
    }

    pub fn window_ns(&self) -> T {
        self.window_ns
    }
}

/// Fraction of true pairs whose Gaussian detection-time difference falls in
/// the window: `erf(τ / (2√2 σ_Δ))`, `σ_Δ² = σ_a² + σ_b²`.
pub fn window_acceptance<T: Real>(cfg: &CoincidenceConfig<T>, a: &DetectorSpec<T>, b: &DetectorSpec<T>) -> T {
    let sigma = a.jitter_sigma_ns.hypot(b.jitter_sigma_ns);
    if sigma == T::zero() {
        return T::one();
    }
    (cfg.window_ns / (T::lit(2.0) * T::SQRT_2() * sigma)).erf()
}

/// Detected singles including darks, after non-paralyzable dead time.
pub fn singles_rate<T: Real>(pair_rate: T, arm_total: T, det: &DetectorSpec<T>) -> T {
    let raw = pair_rate * arm_total + det.dark_rate;
    if det.dead_time_ns == T::zero() {
        raw
    } else {
        raw / (T::one() + raw * det.dead_time_ns * T::lit(NS))
    }
}

pub fn true_coincidence_rate<T: Real>(pair_rate: T, arm_a: T, arm_b: T, acceptance: T) -> T {
    pair_rate * arm_a * arm_b * acceptance
}

/// `s_a · s_b · τ`.
pub fn accidental_rate<T: Real>(singles_a: T, singles_b: T, cfg: &CoincidenceConfig<T>) -> T {
    singles_a * singles_b * cfg.window_ns * T::lit(NS)
}

/// Coincidence-to-accidental ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Car<T> {
    Finite(T),
    /// Accidentals vanish while trues do not.
    Unbounded,
}

impl<T: Real> Car<T> {
    /// Finite value, or `+inf` for [`Car::Unbounded`].
    pub fn value(self) -> T {
        match self {
            Car::Finite(v) => v,
            Car::Unbounded => T::infinity(),
        }
    }
}

impl<T: Real> fmt::Display for Car<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Car::Finite(v) => write!(f, "{v}"),
            Car::Unbounded => f.write_str("inf"),
        }
    }
}

pub fn car<T: Real>(trues: T, accidentals: T) -> Result<Car<T>> {
    if trues < T::zero() || accidentals < T::zero() {
        return Err(domain("CAR", format!("negative rates ({trues}, {accidentals})")));
    }
    if accidentals == T::zero() {
        if trues == T::zero() {
            return Err(Error::Undefined("CAR"));
        }
        return Ok(Car::Unbounded);
    }
    Ok(Car::Finite(trues / accidentals))
}

/// `V0 · C / (C + A)`: accidentals carry no polarization correlation.
pub fn visibility_measured<T: Real>(trues: T, accidentals: T, intrinsic_visibility: T) -> Result<T> {
    let sum = trues + accidentals;
    if !(sum > T::zero()) {
        return Err(Error::Undefined("visibility"));
    }
    Ok(intrinsic_visibility * trues / sum)
}

/// Trues err with probability `(1 - V0)/2`, accidentals with 1/2.
pub fn qber<T: Real>(trues: T, accidentals: T, intrinsic_visibility: T) -> Result<T> {
    let sum = trues + accidentals;
    if !(sum > T::zero()) {
        return Err(Error::Undefined("QBER"));
    }
    let half = T::lit(0.5);
    Ok((trues * (T::one() - intrinsic_visibility) * half + accidentals * half) / sum)
}

/// Pair flux reaching one conjugate detector pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairFlux<T> {
    /// Generated pairs per second routed to this detector pair.
    pub pair_rate: T,
    /// Extra per-photon transmission of the signal path (demux channel).
    pub efficiency_a: T,
    pub efficiency_b: T,
    /// Probability that the two photons of a pair reach different detectors.
    pub pairing: T,
}

impl<T: Real> PairFlux<T> {
    pub fn lossless(pair_rate: T) -> Self {
        Self {
            pair_rate,
            efficiency_a: T::one(),
            efficiency_b: T::one(),
            pairing: T::one(),
        }
    }
}

/// Everything downstream of the source that shapes detection statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionSetup<T> {
    arm_a: ArmEfficiency<T>,
    arm_b: ArmEfficiency<T>,
    detector_a: DetectorSpec<T>,
    detector_b: DetectorSpec<T>,
    window: CoincidenceConfig<T>,
    intrinsic_visibility: T,
}

impl<T: Real> DetectionSetup<T> {
    /// The detector factor of each arm must equal the efficiency of the
    /// detector on that arm; it is counted once, inside the arm.
    pub fn new(
        arm_a: ArmEfficiency<T>,
        arm_b: ArmEfficiency<T>,
        detector_a: DetectorSpec<T>,
        detector_b: DetectorSpec<T>,
        window: CoincidenceConfig<T>,
        intrinsic_visibility: T,
    ) -> Result<Self> {
        for (arm, det, name) in [(&arm_a, &detector_a, "a"), (&arm_b, &detector_b, "b")] {
            if (arm.detector - det.efficiency).abs() > T::epsilon() * T::lit(4.0) {
                return Err(domain(
                    "arm detector efficiency",
                    format!("arm {name} uses {} but its detector has {}", arm.detector, det.efficiency),
                ));
            }
        }
        Ok(Self {
            arm_a,
            arm_b,
            detector_a,
            detector_b,
            window,
            intrinsic_visibility: unit_interval("intrinsic visibility", intrinsic_visibility)?,
        })
    }

    pub fn arm_a(&self) -> &ArmEfficiency<T> {
        &self.arm_a
    }

    pub fn arm_b(&self) -> &ArmEfficiency<T> {
        &self.arm_b
    }

    pub fn detector_a(&self) -> &DetectorSpec<T> {
        &self.detector_a
    }

    pub fn detector_b(&self) -> &DetectorSpec<T> {
        &self.detector_b
    }

    pub fn window(&self) -> &CoincidenceConfig<T> {
        &self.window
    }

    pub fn intrinsic_visibility(&self) -> T {
        self.intrinsic_visibility
    }

    pub fn acceptance(&self) -> T {
        window_acceptance(&self.window, &self.detector_a, &self.detector_b)
    }

    /// Statistics of a single detector pair.
    pub fn pair_stats(&self, flux: &PairFlux<T>) -> Result<PairStats<T>> {
        let eta_a = self.arm_a.total() * flux.efficiency_a;
        let eta_b = self.arm_b.total() * flux.efficiency_b;
        let singles_a = singles_rate(flux.pair_rate, eta_a, &self.detector_a);
        let singles_b = singles_rate(flux.pair_rate, eta_b, &self.detector_b);
        let detected_pairs = flux.pair_rate * flux.pairing * eta_a * eta_b;
        let trues = true_coincidence_rate(flux.pair_rate * flux.pairing, eta_a, eta_b, self.acceptance());
        let accidentals = accidental_rate(singles_a, singles_b, &self.window);
        PairStats::from_rates(singles_a, singles_b, detected_pairs, trues, accidentals, self.intrinsic_visibility)
    }
}

/// Rates and derived figures of one detector pair (or an aggregate).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairStats<T> {
    pub singles_a: T,
    pub singles_b: T,
    /// Pairs with both photons detected, before the window cut.
    pub detected_pairs: T,
    pub trues: T,
    pub accidentals: T,
    pub car: Car<T>,
    pub visibility: T,
    pub qber: T,
}

impl<T: Real> PairStats<T> {
    pub fn from_rates(
        singles_a: T,
        singles_b: T,
        detected_pairs: T,
        trues: T,
        accidentals: T,
        intrinsic_visibility: T,
    ) -> Result<Self> {
        Ok(Self {
            singles_a,
            singles_b,
            detected_pairs,
            trues,
            accidentals,
            car: car(trues, accidentals)?,
            visibility: visibility_measured(trues, accidentals, intrinsic_visibility)?,
            qber: qber(trues, accidentals, intrinsic_visibility)?,
        })
    }
}

/// Per-pair statistics plus totals over all detector pairs.
///
/// Total accidentals count conjugate pairs only; coincidences between
/// non-conjugate channels are never used for key.
#[derive(Debug, Clone, PartialEq)]
pub struct RateReport<T> {
    pub pairs: Vec<PairStats<T>>,
    pub total: PairStats<T>,
}

pub fn analyze<T: Real>(fluxes: &[PairFlux<T>], setup: &DetectionSetup<T>) -> Result<RateReport<T>> {
    if fluxes.is_empty() {
        return Err(domain("rate report", "no detector pairs to analyze"));
    }
    let pairs = fluxes.iter().map(|f| setup.pair_stats(f)).collect::<Result<Vec<_>>>()?;
    let sum = |g: fn(&PairStats<T>) -> T| pairs.iter().fold(T::zero(), |s, p| s + g(p));
    let total = PairStats::from_rates(
        sum(|p| p.singles_a),
        sum(|p| p.singles_b),
        sum(|p| p.detected_pairs),
        sum(|p| p.trues),
        sum(|p| p.accidentals),
        setup.intrinsic_visibility,
    )?;
    Ok(RateReport { pairs, total })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn det(jitter: f64, dead: f64, dark: f64) -> DetectorSpec<f64> {
        DetectorSpec::new(0.5, jitter, dead, dark).unwrap()
    }

    fn window(ns: f64) -> CoincidenceConfig<f64> {
        CoincidenceConfig::new(ns).unwrap()
    }

    #[test]
    fn arm_product() {
        let lab = ArmEfficiency::new(0.95, 0.50, 1.0, AttenuationDb::zero(), 0.50).unwrap();
        assert_relative_eq!(lab.total(), 0.2375, max_relative = 1e-15);
        let ideal = ArmEfficiency::new(1.0, 1.0, 1.0, AttenuationDb::zero(), 1.0).unwrap();
        assert_eq!(ideal.total(), 1.0);
        let linked = lab.with_link(AttenuationDb::new(31.5).unwrap());
        // 0.2375 * 10^-3.15
        assert_relative_eq!(linked.total(), 1.681_371_237_912_327_5e-4, max_relative = 1e-13);
        assert!(ArmEfficiency::new(1.1, 1.0, 1.0, AttenuationDb::zero(), 1.0).is_err());
        assert!(ArmEfficiency::new(0.9, 0.0, 1.0, AttenuationDb::zero(), 1.0).is_err());
    }

    #[test]
    fn acceptance_values() {
        assert_eq!(window_acceptance(&window(0.1), &det(0.0, 0.0, 0.0), &det(0.0, 0.0, 0.0)), 1.0);
        let a = det(0.4, 0.0, 0.0);
        assert!((window_acceptance(&window(8.0), &a, &a) - 1.0).abs() < 1e-9);
        // erf(0.625) at 30 digits
        assert_relative_eq!(window_acceptance(&window(1.0), &a, &a), 0.623_240_882_188_418, max_relative = 1e-12);
    }

    #[test]
    fn fwhm_convention() {
        let d = DetectorSpec::with_jitter_fwhm(0.5, 0.4, 0.0, 0.0).unwrap();
        assert_relative_eq!(d.jitter_sigma_ns(), 0.4 / 2.354_820_045_030_949, max_relative = 1e-14);
    }

    #[test]
    fn singles() {
        assert_relative_eq!(singles_rate(1e6, 0.24, &det(0.0, 0.0, 100.0)), 240_100.0, max_relative = 1e-14);
        assert_eq!(singles_rate(0.0, 0.24, &det(0.0, 0.0, 100.0)), 100.0);
        assert_relative_eq!(singles_rate(1e8, 1.0, &det(0.0, 25.0, 0.0)), 1e8 / 3.5, max_relative = 1e-14);
    }

    #[test]
    fn trues_and_accidentals() {
        assert_eq!(true_coincidence_rate(1e6, 1.0, 1.0, 1.0), 1e6);
        assert_relative_eq!(true_coincidence_rate(9.55e7, 0.24, 0.24, 1.0), 5.5e6, max_relative = 1e-3);
        assert_relative_eq!(
            true_coincidence_rate(9.55e7, 0.24, 0.24, 0.623_240_882_188_418),
            3.43e6,
            max_relative = 2e-3
        );
        assert_relative_eq!(accidental_rate(1e6, 1e6, &window(1.0)), 1000.0, max_relative = 1e-14);
        assert_eq!(accidental_rate(0.0, 1e6, &window(1.0)), 0.0);
        assert_relative_eq!(
            accidental_rate(2e6, 2e6, &window(1.0)),
            4.0 * accidental_rate(1e6, 1e6, &window(1.0)),
            max_relative = 1e-15
        );
    }

    #[test]
    fn car_cases() {
        assert_eq!(car(1000.0, 10.0).unwrap(), Car::Finite(100.0));
        assert_eq!(car(5.0, 0.0).unwrap(), Car::Unbounded);
        assert_eq!(car(0.0f64, 0.0), Err(Error::Undefined("CAR")));
        assert_eq!(Car::<f64>::Unbounded.to_string(), "inf");
    }

    #[test]
    fn visibility_and_qber() {
        assert_eq!(visibility_measured(10.0, 0.0, 0.97).unwrap(), 0.97);
        assert_eq!(visibility_measured(5.0, 5.0, 1.0).unwrap(), 0.5);
        assert!(visibility_measured(1.0, 1e12, 1.0).unwrap() < 1e-11);
        assert!(visibility_measured(0.0f64, 0.0, 1.0).is_err());
        assert_eq!(qber(10.0, 0.0, 1.0).unwrap(), 0.0);
        assert_relative_eq!(qber(10.0, 0.0, 0.99).unwrap(), 0.005, max_relative = 1e-12);
        assert!((qber(1.0f64, 1e12, 1.0).unwrap() - 0.5).abs() < 1e-11);
        assert!(qber(0.0f64, 0.0, 1.0).is_err());
    }

    #[test]
    fn demux_quarters_the_accidentals_of_each_pair() {
        let arm = ArmEfficiency::new(0.95, 0.5, 1.0, AttenuationDb::zero(), 0.5).unwrap();
        let d = det(0.4, 0.0, 0.0);
        let setup = DetectionSetup::new(arm, arm, d, d, window(3.0), 0.99).unwrap();
        let mu = 1e7;
        let single = analyze(&[PairFlux::lossless(mu)], &setup).unwrap();
        let split = analyze(&[PairFlux::lossless(mu / 2.0), PairFlux::lossless(mu / 2.0)], &setup).unwrap();
        assert_relative_eq!(split.total.trues, single.total.trues, max_relative = 1e-14);
        assert_relative_eq!(split.total.accidentals, single.total.accidentals / 2.0, max_relative = 1e-14);
        assert_relative_eq!(split.total.car.value() / single.total.car.value(), 2.0, max_relative = 1e-12);
    }

    #[test]
    fn mismatched_detector_factor_is_rejected() {
        let arm = ArmEfficiency::new(0.95, 0.5, 1.0, AttenuationDb::zero(), 0.8).unwrap();
        let d = det(0.4, 0.0, 0.0);
        assert!(DetectionSetup::new(arm, arm, d, d, window(1.0), 0.99).is_err());
    }

    #[test]
    fn empty_flux_list_is_an_error() {
        let arm = ArmEfficiency::new(0.95, 0.5, 1.0, AttenuationDb::zero(), 0.5).unwrap();
        let d = det(0.4, 0.0, 0.0);
        let setup = DetectionSetup::new(arm, arm, d, d, window(1.0), 0.99).unwrap();
        assert!(analyze(&[], &setup).is_err());
    }
}
