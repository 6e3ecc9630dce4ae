//! Volume-Bragg-grating demultiplexer: conjugate channel placement and
//! per-channel capture.
//!
//! Channels sit on a uniform frequency grid symmetric about half the pump
//! frequency, so each signal channel `A_k` and idler channel `B_k` are exact
//! energy-conservation images of each other under a monochromatic pump.

use std::fmt;

use crate::error::{domain, Error, Result};
use crate::scalar::Real;
use crate::units::{integrate_band, nm_interval_to_thz, SpectralShape, Wavelength};

pub const DEFAULT_CHANNEL_BANDWIDTH_PM: f64 = 75.0;
pub const DEFAULT_CHANNEL_SPACING_PM: f64 = 300.0;
pub const DEFAULT_VBG_EFFICIENCY: f64 = 0.98;
pub const DEFAULT_OUTPUT_COUPLING: f64 = 0.84;
/// One-sided detuning range (nm) available for channels.
pub const DEFAULT_SPAN_NM: f64 = 11.0;

const CONJUGACY_TOLERANCE_NM: f64 = 1e-6;

/// Wavelength conjugate to `wavelength` under energy conservation with the
/// pump: `1/λ + 1/λ' = 1/λ_pump`.
pub fn conjugate_wavelength<T: Real>(wavelength: Wavelength<T>, pump: Wavelength<T>) -> Result<Wavelength<T>> {
    if !(wavelength > pump) {
        return Err(domain(
            "conjugate wavelength",
            format!("{} nm is not longer than the pump {} nm", wavelength.nm(), pump.nm()),
        ));
    }
    let (l, p) = (wavelength.nm(), pump.nm());
    Wavelength::from_nm(l * p / (l - p))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    /// Shorter-wavelength member (`A_k`).
    Signal,
    /// Longer-wavelength member (`B_k`).
    Idler,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ChannelId {
    pub pair: usize,
    pub side: Side,
}

impl ChannelId {
    pub fn signal(pair: usize) -> Self {
        Self { pair, side: Side::Signal }
    }

    pub fn idler(pair: usize) -> Self {
        Self { pair, side: Side::Idler }
    }
}

impl fmt::Display for ChannelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let label = match self.side {
            Side::Signal => 'A',
            Side::Idler => 'B',
        };
        write!(f, "{label}{}", self.pair + 1)
    }
}

/// A single passband.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Channel<T> {
    pub center: Wavelength<T>,
    pub lo: Wavelength<T>,
    pub hi: Wavelength<T>,
}

/// Conjugate signal/idler passbands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelPair<T> {
    pub signal: Channel<T>,
    pub idler: Channel<T>,
    /// Passband width, pm (at the degenerate wavelength).
    pub bandwidth_pm: T,
    /// Grating diffraction times output coupling, per photon.
    pub efficiency: T,
}

impl<T: Real> ChannelPair<T> {
    pub fn channel(&self, side: Side) -> &Channel<T> {
        match side {
            Side::Signal => &self.signal,
            Side::Idler => &self.idler,
        }
    }
}

/// Grid parameters for [`build_channel_plan`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec<T> {
    pub bandwidth_pm: T,
    /// Guard band between adjacent passbands, pm.
    pub spacing_pm: T,
    pub num_pairs: usize,
    /// Maximum detuning of any passband edge from degeneracy, nm, on each side.
    pub span_nm: Option<T>,
    pub efficiency: T,
}

impl<T: Real> GridSpec<T> {
    pub fn new(bandwidth_pm: T, spacing_pm: T, num_pairs: usize) -> Self {
        Self {
            bandwidth_pm,
            spacing_pm,
            num_pairs,
            span_nm: None,
            efficiency: T::one(),
        }
    }

    pub fn with_span(mut self, span_nm: T) -> Self {
        self.span_nm = Some(span_nm);
        self
    }

    pub fn with_efficiency(mut self, efficiency: T) -> Self {
        self.efficiency = efficiency;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelPlan<T> {
    pump: Wavelength<T>,
    bandwidth_pm: T,
    spacing_pm: T,
    pairs: Vec<ChannelPair<T>>,
}

/// Number of pairs whose outer passband edge stays within `span_nm` of
/// degeneracy.
pub fn max_pairs<T: Real>(pump: Wavelength<T>, bandwidth_pm: T, spacing_pm: T, span_nm: T) -> usize {
    let degenerate = Wavelength::from_nm(pump.nm() * T::lit(2.0)).expect("valid pump");
    let pm = T::lit(1e-3);
    let pitch = nm_interval_to_thz((bandwidth_pm + spacing_pm) * pm, degenerate);
    let half_band = nm_interval_to_thz(bandwidth_pm * pm, degenerate) * T::lit(0.5);
    let span = nm_interval_to_thz(span_nm, degenerate);
    // (M - 1/2) pitch + bw/2 <= span
    let m = ((span - half_band) / pitch + T::lit(0.5)) * (T::one() + T::lit(1e-12));
    if m <= T::zero() {
        0
    } else {
        m.floor().to_usize().unwrap_or(0)
    }
}

/// Lays out `grid.num_pairs` conjugate channel pairs around the degenerate
/// wavelength. The innermost pair sits half a pitch from degeneracy.
pub fn build_channel_plan<T: Real>(pump: Wavelength<T>, grid: &GridSpec<T>) -> Result<ChannelPlan<T>> {
    let positive = |v: T| v.is_finite() && v > T::zero();
    if !positive(grid.bandwidth_pm) {
        return Err(domain("channel bandwidth", format!("{} pm must be > 0", grid.bandwidth_pm)));
    }
    if !positive(grid.spacing_pm) {
        return Err(domain("channel spacing", format!("{} pm must be > 0", grid.spacing_pm)));
    }
    if !(grid.efficiency > T::zero() && grid.efficiency <= T::one()) {
        return Err(domain("channel efficiency", format!("{} must lie in (0, 1]", grid.efficiency)));
    }
    if let Some(span) = grid.span_nm {
        if !positive(span) {
            return Err(domain("spectral span", format!("{span} nm must be > 0")));
        }
        let max_feasible = max_pairs(pump, grid.bandwidth_pm, grid.spacing_pm, span);
        if grid.num_pairs > max_feasible {
            return Err(Error::PlanTooWide {
                requested: grid.num_pairs,
                max_feasible,
            });
        }
    }

    let degenerate = Wavelength::from_nm(pump.nm() * T::lit(2.0))?;
    let nu0 = pump.frequency_thz() * T::lit(0.5);
    let pm = T::lit(1e-3);
    let pitch = nm_interval_to_thz((grid.bandwidth_pm + grid.spacing_pm) * pm, degenerate);
    let half_band = nm_interval_to_thz(grid.bandwidth_pm * pm, degenerate) * T::lit(0.5);

    let channel_at = |nu: T| -> Result<Channel<T>> {
        Ok(Channel {
            center: Wavelength::from_frequency_thz(nu)?,
            lo: Wavelength::from_frequency_thz(nu + half_band)?,
            hi: Wavelength::from_frequency_thz(nu - half_band)?,
        })
    };

    let pairs = (0..grid.num_pairs)
        .map(|k| {
            let offset = pitch * (T::from_usize(k).unwrap() + T::lit(0.5));
            Ok(ChannelPair {
                signal: channel_at(nu0 + offset)?,
                idler: channel_at(nu0 - offset)?,
                bandwidth_pm: grid.bandwidth_pm,
                efficiency: grid.efficiency,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let plan = ChannelPlan {
        pump,
        bandwidth_pm: grid.bandwidth_pm,
        spacing_pm: grid.spacing_pm,
        pairs,
    };
    plan.validate()?;
    Ok(plan)
}

impl<T: Real> ChannelPlan<T> {
    pub fn pump(&self) -> Wavelength<T> {
        self.pump
    }

    pub fn bandwidth_pm(&self) -> T {
        self.bandwidth_pm
    }

    pub fn spacing_pm(&self) -> T {
        self.spacing_pm
    }

    pub fn pairs(&self) -> &[ChannelPair<T>] {
        &self.pairs
    }

    pub fn num_pairs(&self) -> usize {
        self.pairs.len()
    }

    /// Total channel count `N = 2 * num_pairs`.
    pub fn num_channels(&self) -> usize {
        2 * self.pairs.len()
    }

    pub fn pair(&self, k: usize) -> Result<&ChannelPair<T>> {
        self.pairs
            .get(k)
            .ok_or_else(|| domain("channel pair index", format!("{k} out of range for {} pairs", self.pairs.len())))
    }

    pub fn channel(&self, id: ChannelId) -> Result<&Channel<T>> {
        Ok(self.pair(id.pair)?.channel(id.side))
    }

    /// Same channel grid with a different per-pair efficiency.
    pub fn with_efficiency(&self, efficiency: T) -> Result<Self> {
        if !(efficiency > T::zero() && efficiency <= T::one()) {
            return Err(domain("channel efficiency", format!("{efficiency} must lie in (0, 1]")));
        }
        let mut plan = self.clone();
        for p in &mut plan.pairs {
            p.efficiency = efficiency;
        }
        Ok(plan)
    }

    /// Checks passband disjointness, conjugacy and efficiency bounds.
    pub fn validate(&self) -> Result<()> {
        let mut bands: Vec<(T, T)> = Vec::with_capacity(self.num_channels());
        for (k, pair) in self.pairs.iter().enumerate() {
            if !(pair.efficiency > T::zero() && pair.efficiency <= T::one()) {
                return Err(domain("channel efficiency", format!("pair {k}: {} not in (0, 1]", pair.efficiency)));
            }
            let degenerate = self.pump.nm() * T::lit(2.0);
            if !(pair.signal.center.nm() < degenerate && pair.idler.center.nm() > degenerate) {
                return Err(domain("channel plan", format!("pair {k} does not straddle degeneracy")));
            }
            let image = conjugate_wavelength(pair.signal.center, self.pump)?;
            let residual = (image.nm() - pair.idler.center.nm()).abs();
            if residual > T::lit(CONJUGACY_TOLERANCE_NM) {
                return Err(domain("channel plan", format!("pair {k} conjugacy residual {residual} nm")));
            }
            bands.push((pair.signal.lo.nm(), pair.signal.hi.nm()));
            bands.push((pair.idler.lo.nm(), pair.idler.hi.nm()));
        }
        bands.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite band edges"));
        for w in bands.windows(2) {
            if !(w[0].1 < w[1].0) {
                return Err(domain("channel plan", format!("passbands overlap near {} nm", w[1].0)));
            }
        }
        Ok(())
    }
}

/// Fraction of generated pairs that land in conjugate pair `k`, before
/// channel losses.
///
/// `spectrum` is the single-photon emission spectrum; a pair belongs to
/// pair `k` whenever either of its photons falls in `A_k` or `B_k`, so the
/// fraction is the spectral weight of the union of both passbands.
pub fn band_fraction<T: Real>(plan: &ChannelPlan<T>, spectrum: &SpectralShape<T>, k: usize) -> Result<T> {
    let pair = plan.pair(k)?;
    let unit = spectrum.normalized();
    let (a, b) = (pair.signal, pair.idler);
    let fraction = if a.hi < b.lo {
        integrate_band(&unit, a.lo, a.hi)? + integrate_band(&unit, b.lo, b.hi)?
    } else {
        let lo = if a.lo < b.lo { a.lo } else { b.lo };
        let hi = if a.hi > b.hi { a.hi } else { b.hi };
        integrate_band(&unit, lo, hi)?
    };
    Ok(fraction.min(T::one()))
}

/// Fraction of generated pairs delivered to both detectors of pair `k`:
/// [`band_fraction`] times the per-photon channel efficiency squared.
pub fn pair_capture_fraction<T: Real>(plan: &ChannelPlan<T>, spectrum: &SpectralShape<T>, k: usize) -> Result<T> {
    let eff = plan.pair(k)?.efficiency;
    Ok(band_fraction(plan, spectrum, k)? * eff * eff)
}

/// True-coincidence fraction between two non-conjugate channels.
///
/// Always zero under a monochromatic pump: cross-channel coincidences come
/// only from accidentals.
pub fn crosstalk_fraction<T: Real>(plan: &ChannelPlan<T>, j: ChannelId, k: ChannelId) -> Result<T> {
    plan.channel(j)?;
    plan.channel(k)?;
    if j.pair == k.pair {
        return Err(domain(
            "crosstalk",
            format!("{j} and {k} belong to the same conjugate pair; use pair_capture_fraction"),
        ));
    }
    Ok(T::zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::ShapeKind;
    use approx::assert_relative_eq;

    fn nm(v: f64) -> Wavelength<f64> {
        Wavelength::from_nm(v).unwrap()
    }

    #[test]
    fn degenerate_point_is_fixed() {
        assert_relative_eq!(conjugate_wavelength(nm(810.0), nm(405.0)).unwrap().nm(), 810.0, max_relative = 1e-15);
    }

    #[test]
    fn conjugate_requires_longer_wavelength() {
        assert!(conjugate_wavelength(nm(405.0), nm(405.0)).is_err());
        assert!(conjugate_wavelength(nm(300.0), nm(405.0)).is_err());
    }

    #[test]
    fn four_channel_plan() {
        let plan = build_channel_plan(nm(405.22), &GridSpec::new(75.0, 300.0, 2).with_span(11.0)).unwrap();
        assert_eq!(plan.num_channels(), 4);
        let deg = 810.44;
        let inner = &plan.pairs()[0];
        let outer = &plan.pairs()[1];
        // half a pitch (187.5 pm) and one and a half pitches (562.5 pm) from degeneracy
        assert!((deg - inner.signal.center.nm() - 0.1875).abs() < 2e-4);
        assert!((inner.idler.center.nm() - deg - 0.1875).abs() < 2e-4);
        // the frequency grid bends wavelength offsets at second order
        assert!((deg - outer.signal.center.nm() - 0.5625).abs() < 1e-3);
        // edge-to-edge guard of 300 pm between the inner signal and outer signal bands
        assert!((inner.signal.lo.nm() - outer.signal.hi.nm() - 0.300).abs() < 1e-3);
        assert!((inner.signal.hi.nm() - inner.signal.lo.nm() - 0.075).abs() < 1e-4);
    }

    #[test]
    fn empty_plan() {
        let plan = build_channel_plan(nm(405.22), &GridSpec::new(75.0, 300.0, 0)).unwrap();
        assert_eq!(plan.num_pairs(), 0);
        assert!(plan.validate().is_ok());
    }

    #[test]
    fn span_limits_pair_count() {
        assert_eq!(max_pairs(nm(405.22), 75.0, 300.0, 11.0), 29);
        let err = build_channel_plan(nm(405.22), &GridSpec::new(75.0, 300.0, 30).with_span(11.0)).unwrap_err();
        assert_eq!(err, Error::PlanTooWide { requested: 30, max_feasible: 29 });
        assert!(build_channel_plan(nm(405.22), &GridSpec::new(75.0, 300.0, 29).with_span(11.0)).is_ok());
    }

    #[test]
    fn bad_grid_parameters() {
        assert!(build_channel_plan(nm(405.22), &GridSpec::new(0.0, 300.0, 2)).is_err());
        assert!(build_channel_plan(nm(405.22), &GridSpec::new(75.0, -1.0, 2)).is_err());
        assert!(build_channel_plan(nm(405.22), &GridSpec::new(75.0, 300.0, 2).with_efficiency(0.0)).is_err());
    }

    #[test]
    fn full_coverage_captures_everything() {
        // one very wide pair covering both halves of a top-hat spectrum,
        // less the 1 pm guard straddling degeneracy
        let pump = nm(405.0);
        let plan = build_channel_plan(pump, &GridSpec::new(3000.0, 1.0, 1)).unwrap();
        let spec = SpectralShape::new(ShapeKind::TopHat, nm(810.0), 2.5, 1.0).unwrap();
        assert_relative_eq!(pair_capture_fraction(&plan, &spec, 0).unwrap(), 1.0 - 0.001 / 2.5, max_relative = 1e-5);
    }

    #[test]
    fn outside_support_captures_nothing() {
        let plan = build_channel_plan(nm(405.0), &GridSpec::new(75.0, 300.0, 20)).unwrap();
        let spec = SpectralShape::new(ShapeKind::TopHat, nm(810.0), 1.0, 1.0).unwrap();
        assert_eq!(pair_capture_fraction(&plan, &spec, 19).unwrap(), 0.0);
    }

    #[test]
    fn crosstalk_is_zero_between_non_conjugate_channels() {
        let plan = build_channel_plan(nm(405.22), &GridSpec::new(75.0, 300.0, 2)).unwrap();
        let f: f64 = crosstalk_fraction(&plan, ChannelId::signal(0), ChannelId::signal(1)).unwrap();
        assert_eq!(f, 0.0);
        assert_eq!(crosstalk_fraction(&plan, ChannelId::signal(0), ChannelId::idler(1)).unwrap(), 0.0);
        assert!(crosstalk_fraction(&plan, ChannelId::signal(0), ChannelId::idler(0)).is_err());
        assert!(crosstalk_fraction(&plan, ChannelId::signal(0), ChannelId::idler(5)).is_err());
    }

    #[test]
    fn channel_labels() {
        assert_eq!(ChannelId::signal(0).to_string(), "A1");
        assert_eq!(ChannelId::idler(1).to_string(), "B2");
    }
}
