//! Named presets, parameter sweeps and grid optimization of the key rate.

use rayon::prelude::*;

use crate::coincidence::{analyze, ArmEfficiency, CoincidenceConfig, DetectionSetup, DetectorSpec, PairFlux, RateReport};
use crate::demux::{band_fraction, build_channel_plan, ChannelPlan, GridSpec};
use crate::error::{domain, Error, Result};
use crate::qkd::{skr_total, KeyRateParams, KeyRateReport};
use crate::source::SourceSpec;
use crate::units::{AttenuationDb, ShapeKind, SpectralShape, Wavelength};

/// Names accepted by [`ScenarioParams::named`].
pub const PRESET_NAMES: [&str; 6] = [
    "lab",
    "lab-28",
    "downlink-snspd",
    "downlink-snspd-2",
    "downlink-spad",
    "downlink-spad-2",
];

/// Detected true-pair rate per mW the lab preset is calibrated to.
pub const LAB_DETECTED_PAIRS_PER_MW: f64 = 5.5e6;

/// Demultiplexed or single-detector-pair detection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Toggle {
    Demux,
    NoDemux,
}

impl Toggle {
    pub fn as_str(self) -> &'static str {
        match self {
            Toggle::Demux => "demux",
            Toggle::NoDemux => "nodemux",
        }
    }
}

impl std::fmt::Display for Toggle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How the generated flux is distributed over channel pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum FluxModel {
    /// The whole generated flux is shared equally by the channel pairs.
    #[default]
    EqualSplit,
    /// Each pair receives the spectral weight of its passbands.
    Spectral,
}

impl std::str::FromStr for FluxModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "equal_split" => Ok(FluxModel::EqualSplit),
            "spectral" => Ok(FluxModel::Spectral),
            other => Err(domain("flux model", format!("`{other}` is not one of equal_split, spectral"))),
        }
    }
}

impl std::fmt::Display for FluxModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FluxModel::EqualSplit => "equal_split",
            FluxModel::Spectral => "spectral",
        })
    }
}

/// Flat, untyped-free description of a scenario; [`ScenarioParams::build`]
/// checks every invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioParams {
    pub brightness_per_mw: f64,
    pub pump_power_mw: f64,
    pub pump_wavelength_nm: f64,
    pub spectrum_shape: ShapeKind,
    pub spectrum_fwhm_nm: f64,
    pub intrinsic_visibility: f64,
    pub num_pairs: usize,
    pub bandwidth_pm: f64,
    pub spacing_pm: f64,
    pub span_nm: Option<f64>,
    pub vbg_efficiency: f64,
    pub output_coupling: f64,
    pub flux_model: FluxModel,
    pub optics: f64,
    pub fiber_coupling: f64,
    pub demux_insertion: f64,
    /// Combined attenuation of both arms, split evenly.
    pub dual_db: f64,
    pub detector_efficiency: f64,
    pub jitter_sigma_ns: f64,
    pub dead_time_ns: f64,
    pub dark_rate: f64,
    pub window_ns: f64,
    pub sifting: f64,
    pub ec_inefficiency: f64,
    /// Probability that a pair is split across the two detectors without DEMUX.
    pub nodemux_pairing: f64,
}

impl ScenarioParams {
    /// Lab bench: 1 mW pump, two 75 pm channel pairs, Si-SPADs.
    ///
    /// Arm efficiency 0.95 x 0.5 x 0.5053 = 0.24, so one mW yields
    /// 9.55e7 x 0.24^2 = 5.5e6 detected pairs/s.
    pub fn lab() -> Self {
        Self {
            brightness_per_mw: crate::source::DEFAULT_BRIGHTNESS_PER_MW,
            pump_power_mw: 1.0,
            pump_wavelength_nm: crate::source::DEFAULT_PUMP_WAVELENGTH_NM,
            spectrum_shape: ShapeKind::Gaussian,
            spectrum_fwhm_nm: crate::source::DEFAULT_SPECTRUM_FWHM_NM,
            intrinsic_visibility: crate::source::DEFAULT_INTRINSIC_VISIBILITY,
            num_pairs: 2,
            bandwidth_pm: crate::demux::DEFAULT_CHANNEL_BANDWIDTH_PM,
            spacing_pm: crate::demux::DEFAULT_CHANNEL_SPACING_PM,
            span_nm: Some(crate::demux::DEFAULT_SPAN_NM),
            vbg_efficiency: 1.0,
            output_coupling: 1.0,
            flux_model: FluxModel::EqualSplit,
            optics: 0.95,
            fiber_coupling: 0.5,
            demux_insertion: 1.0,
            dual_db: 0.0,
            detector_efficiency: 0.24 / 0.475,
            jitter_sigma_ns: 0.4,
            dead_time_ns: 0.0,
            dark_rate: 100.0,
            window_ns: 3.0,
            sifting: crate::qkd::DEFAULT_SIFTING,
            ec_inefficiency: crate::qkd::DEFAULT_EC_INEFFICIENCY,
            nodemux_pairing: 1.0,
        }
    }

    fn downlink(detector_efficiency: f64, window_ns: f64, jitter_sigma_ns: f64) -> Self {
        Self {
            pump_power_mw: 30.0,
            num_pairs: 28,
            vbg_efficiency: crate::demux::DEFAULT_VBG_EFFICIENCY,
            output_coupling: crate::demux::DEFAULT_OUTPUT_COUPLING,
            dual_db: 63.0,
            detector_efficiency,
            jitter_sigma_ns,
            window_ns,
            ..Self::lab()
        }
    }

    /// SNSPDs: 80 % efficiency, 100 ps window, 28 pairs.
    pub fn downlink_snspd() -> Self {
        Self::downlink(0.80, 0.1, 0.02)
    }

    /// Si-SPADs: 50 % efficiency, 2.5 ns window, 28 pairs.
    pub fn downlink_spad() -> Self {
        Self::downlink(0.50, 2.5, 0.4)
    }

    pub fn named(name: &str) -> Result<Self> {
        let two = |p: Self| Self { num_pairs: 2, ..p };
        Ok(match name {
            "lab" => Self::lab(),
            "lab-28" => Self {
                num_pairs: 28,
                ..Self::lab()
            },
            "downlink-snspd" => Self::downlink_snspd(),
            "downlink-snspd-2" => two(Self::downlink_snspd()),
            "downlink-spad" => Self::downlink_spad(),
            "downlink-spad-2" => two(Self::downlink_spad()),
            other => {
                return Err(domain(
                    "preset",
                    format!("`{other}` is not one of {}", PRESET_NAMES.join(", ")),
                ))
            }
        })
    }

    pub fn channel_efficiency(&self) -> f64 {
        self.vbg_efficiency * self.output_coupling
    }

    pub fn build(&self) -> Result<ScenarioPreset> {
        let pump = Wavelength::from_nm(self.pump_wavelength_nm)?;
        let degenerate = Wavelength::from_nm(2.0 * self.pump_wavelength_nm)?;
        let spectrum = SpectralShape::new(self.spectrum_shape, degenerate, self.spectrum_fwhm_nm, 1.0)?;
        let source = SourceSpec::new(
            self.brightness_per_mw,
            self.pump_power_mw,
            pump,
            spectrum,
            self.intrinsic_visibility,
        )?;
        if self.num_pairs == 0 {
            return Err(domain("channel_plan.num_pairs", "must be >= 1"));
        }
        let efficiency = self.channel_efficiency();
        if efficiency < 1.0 && self.demux_insertion < 1.0 {
            return Err(domain(
                "arm.demux_insertion",
                "must be 1 when the channel plan carries its own efficiency; demux loss would be counted twice",
            ));
        }
        let mut grid = GridSpec::new(self.bandwidth_pm, self.spacing_pm, self.num_pairs).with_efficiency(efficiency);
        if let Some(span) = self.span_nm {
            grid = grid.with_span(span);
        }
        let plan = build_channel_plan(pump, &grid)?;
        let detector = DetectorSpec::new(
            self.detector_efficiency,
            self.jitter_sigma_ns,
            self.dead_time_ns,
            self.dark_rate,
        )?;
        let arm = ArmEfficiency::new(
            self.optics,
            self.fiber_coupling,
            self.demux_insertion,
            AttenuationDb::new(self.dual_db / 2.0)?,
            self.detector_efficiency,
        )?;
        let setup = DetectionSetup::new(
            arm,
            arm,
            detector,
            detector,
            CoincidenceConfig::new(self.window_ns)?,
            self.intrinsic_visibility,
        )?;
        let key = KeyRateParams::new(self.sifting, self.ec_inefficiency)?;
        if !(self.nodemux_pairing > 0.0 && self.nodemux_pairing <= 1.0) {
            return Err(domain(
                "nodemux.pairing_success",
                format!("{} must lie in (0, 1]", self.nodemux_pairing),
            ));
        }
        ScenarioPreset::new(source, plan, self.flux_model, setup, key, self.nodemux_pairing)
    }
}

/// A validated scenario ready for evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioPreset {
    source: SourceSpec<f64>,
    plan: ChannelPlan<f64>,
    flux_model: FluxModel,
    setup: DetectionSetup<f64>,
    key: KeyRateParams<f64>,
    nodemux_pairing: f64,
    // share of the generated flux routed to each channel pair
    shares: Vec<f64>,
}

impl ScenarioPreset {
    pub fn new(
        source: SourceSpec<f64>,
        plan: ChannelPlan<f64>,
        flux_model: FluxModel,
        setup: DetectionSetup<f64>,
        key: KeyRateParams<f64>,
        nodemux_pairing: f64,
    ) -> Result<Self> {
        let m = plan.num_pairs();
        if m == 0 {
            return Err(domain("channel plan", "needs at least one pair"));
        }
        let shares = match flux_model {
            FluxModel::EqualSplit => vec![1.0 / m as f64; m],
            FluxModel::Spectral => (0..m)
                .map(|k| band_fraction(&plan, source.spectrum(), k))
                .collect::<Result<_>>()?,
        };
        Ok(Self {
            source,
            plan,
            flux_model,
            setup,
            key,
            nodemux_pairing,
            shares,
        })
    }

    pub fn source(&self) -> &SourceSpec<f64> {
        &self.source
    }

    pub fn plan(&self) -> &ChannelPlan<f64> {
        &self.plan
    }

    pub fn flux_model(&self) -> FluxModel {
        self.flux_model
    }

    pub fn setup(&self) -> &DetectionSetup<f64> {
        &self.setup
    }

    pub fn key_params(&self) -> &KeyRateParams<f64> {
        &self.key
    }

    pub fn nodemux_pairing(&self) -> f64 {
        self.nodemux_pairing
    }

    /// Share of the generated flux reaching each channel pair.
    pub fn shares(&self) -> &[f64] {
        &self.shares
    }

    pub fn with_pump_power(&self, mw: f64) -> Result<Self> {
        Ok(Self {
            source: self.source.with_pump_power(mw)?,
            ..self.clone()
        })
    }

    pub fn with_window(&self, window_ns: f64) -> Result<Self> {
        let s = &self.setup;
        Ok(Self {
            setup: DetectionSetup::new(
                *s.arm_a(),
                *s.arm_b(),
                *s.detector_a(),
                *s.detector_b(),
                CoincidenceConfig::new(window_ns)?,
                s.intrinsic_visibility(),
            )?,
            ..self.clone()
        })
    }

    /// Splits `dual_db` evenly over both arms, replacing any previous link loss.
    pub fn with_dual_attenuation(&self, dual_db: f64) -> Result<Self> {
        let half = AttenuationDb::new(dual_db / 2.0)
            .map_err(|_| domain("dual-link attenuation", format!("{dual_db} dB must be finite and >= 0")))?;
        let s = &self.setup;
        Ok(Self {
            setup: DetectionSetup::new(
                s.arm_a().with_link(half),
                s.arm_b().with_link(half),
                *s.detector_a(),
                *s.detector_b(),
                *s.window(),
                s.intrinsic_visibility(),
            )?,
            ..self.clone()
        })
    }

    pub fn with_axis(&self, axis: Axis, value: f64) -> Result<Self> {
        match axis {
            Axis::PumpPower => self.with_pump_power(value),
            Axis::Window => self.with_window(value),
            Axis::Attenuation => self.with_dual_attenuation(value),
        }
    }

    /// Flux on each detector pair for the given detection scheme.
    pub fn fluxes(&self, toggle: Toggle) -> Vec<PairFlux<f64>> {
        let generated = self.source.generated_pair_rate();
        match toggle {
            Toggle::Demux => self
                .plan
                .pairs()
                .iter()
                .zip(&self.shares)
                .map(|(pair, share)| PairFlux {
                    pair_rate: generated * share,
                    efficiency_a: pair.efficiency,
                    efficiency_b: pair.efficiency,
                    pairing: 1.0,
                })
                .collect(),
            Toggle::NoDemux => vec![PairFlux {
                pair_rate: generated,
                efficiency_a: 1.0,
                efficiency_b: 1.0,
                pairing: self.nodemux_pairing,
            }],
        }
    }
}

/// Rates and key of one scenario point.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub rates: RateReport<f64>,
    pub key: KeyRateReport<f64>,
}

pub fn evaluate(preset: &ScenarioPreset, toggle: Toggle) -> Result<Evaluation> {
    let rates = analyze(&preset.fluxes(toggle), &preset.setup)?;
    let key = skr_total(&rates.pairs, preset.setup.intrinsic_visibility(), &preset.key)?;
    Ok(Evaluation { rates, key })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    /// mW
    PumpPower,
    /// ns
    Window,
    /// Dual-link dB
    Attenuation,
}

impl Axis {
    pub fn column(self) -> &'static str {
        match self {
            Axis::PumpPower => "pump_power_mw",
            Axis::Window => "window_ns",
            Axis::Attenuation => "dual_db",
        }
    }
}

impl std::str::FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pump_power" | "pump_power_mw" | "power" => Ok(Axis::PumpPower),
            "coincidence_window" | "window" | "window_ns" => Ok(Axis::Window),
            "attenuation_db" | "attenuation" | "dual_db" => Ok(Axis::Attenuation),
            other => Err(domain("sweep axis", format!("`{other}` is not one of pump_power, window, attenuation"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

/// Grid along one axis, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisRange {
    lo: f64,
    hi: f64,
    steps: usize,
    scale: Scale,
}

impl AxisRange {
    pub fn new(lo: f64, hi: f64, steps: usize, scale: Scale) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(domain("sweep range", format!("need lo < hi, got [{lo}, {hi}]")));
        }
        if steps < 2 {
            return Err(domain("sweep steps", format!("{steps} must be >= 2")));
        }
        if scale == Scale::Log && lo <= 0.0 {
            return Err(domain("sweep range", format!("log scale needs lo > 0, got {lo}")));
        }
        Ok(Self { lo, hi, steps, scale })
    }

    pub fn linear(lo: f64, hi: f64, steps: usize) -> Result<Self> {
        Self::new(lo, hi, steps, Scale::Linear)
    }

    pub fn log(lo: f64, hi: f64, steps: usize) -> Result<Self> {
        Self::new(lo, hi, steps, Scale::Log)
    }

    /// Degenerate one-point grid.
    pub fn point(value: f64) -> Result<Self> {
        if !value.is_finite() {
            return Err(domain("sweep point", format!("{value} must be finite")));
        }
        Ok(Self {
            lo: value,
            hi: value,
            steps: 1,
            scale: Scale::Linear,
        })
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.lo];
        }
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| {
                if i == 0 {
                    return self.lo;
                }
                if i == self.steps - 1 {
                    return self.hi;
                }
                let t = i as f64 / last;
                match self.scale {
                    Scale::Linear => self.lo + (self.hi - self.lo) * t,
                    Scale::Log => (self.lo.ln() + (self.hi.ln() - self.lo.ln()) * t).exp(),
                }
            })
            .collect()
    }
}

/// One or two swept axes, evaluated for every toggle.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axes: Vec<(Axis, AxisRange)>,
    pub toggles: Vec<Toggle>,
}

impl SweepSpec {
    pub fn one(axis: Axis, range: AxisRange) -> Self {
        Self {
            axes: vec![(axis, range)],
            toggles: vec![Toggle::Demux, Toggle::NoDemux],
        }
    }

    pub fn two(outer: Axis, outer_range: AxisRange, inner: Axis, inner_range: AxisRange) -> Result<Self> {
        if outer == inner {
            return Err(domain("sweep axes", "the two axes must differ"));
        }
        Ok(Self {
            axes: vec![(outer, outer_range), (inner, inner_range)],
            toggles: vec![Toggle::Demux, Toggle::NoDemux],
        })
    }

    pub fn with_toggles(mut self, toggles: &[Toggle]) -> Self {
        self.toggles = toggles.to_vec();
        self
    }

    /// Grid coordinates in row-major order (first axis outermost).
    pub fn points(&self) -> Vec<Vec<f64>> {
        let mut points = vec![Vec::new()];
        for (_, range) in &self.axes {
            let values = range.values();
            points = points
                .into_iter()
                .flat_map(|p| {
                    values.iter().map(move |v| {
                        let mut q = p.clone();
                        q.push(*v);
                        q
                    })
                })
                .collect();
        }
        points
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    /// Values of the swept axes, in [`SweepSpec::axes`] order.
    pub coords: Vec<f64>,
    pub toggle: Toggle,
    pub outcome: Result<Evaluation>,
}

impl SweepRow {
    pub fn skr(&self) -> Option<f64> {
        self.outcome.as_ref().ok().map(|e| e.key.skr_total)
    }
}

fn evaluate_at(preset: &ScenarioPreset, axes: &[(Axis, AxisRange)], coords: &[f64], toggle: Toggle) -> Result<Evaluation> {
    let mut p = preset.clone();
    for ((axis, _), v) in axes.iter().zip(coords) {
        p = p.with_axis(*axis, *v)?;
    }
    evaluate(&p, toggle)
}

/// Evaluates every grid point for every toggle; rows come back in grid
/// order, toggles innermost. A failing point yields an error row.
pub fn run_sweep(preset: &ScenarioPreset, sweep: &SweepSpec) -> Vec<SweepRow> {
    let jobs: Vec<(Vec<f64>, Toggle)> = sweep
        .points()
        .into_iter()
        .flat_map(|c| sweep.toggles.iter().map(move |t| (c.clone(), *t)))
        .collect();
    jobs.into_par_iter()
        .map(|(coords, toggle)| {
            let outcome = evaluate_at(preset, &sweep.axes, &coords, toggle);
            SweepRow { coords, toggle, outcome }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimumReport {
    pub toggle: Toggle,
    pub power_mw: f64,
    pub window_ns: f64,
    pub peak_skr: f64,
    /// False when no grid point yields a positive key rate.
    pub positive: bool,
    /// Every grid point, power outermost.
    pub table: Vec<SweepRow>,
}

/// Exhaustive power x window search. Ties go to the lower power, then the
/// lower window.
pub fn optimize(preset: &ScenarioPreset, toggle: Toggle, power: AxisRange, window: AxisRange) -> Result<OptimumReport> {
    let sweep = SweepSpec {
        axes: vec![(Axis::PumpPower, power), (Axis::Window, window)],
        toggles: vec![toggle],
    };
    let table = run_sweep(preset, &sweep);
    let mut best: Option<(&SweepRow, f64)> = None;
    for row in &table {
        let Some(skr) = row.skr() else { continue };
        let better = match best {
            None => true,
            Some((b, best_skr)) => {
                skr > best_skr || (skr == best_skr && (row.coords[0], row.coords[1]) < (b.coords[0], b.coords[1]))
            }
        };
        if better {
            best = Some((row, skr));
        }
    }
    let Some((row, peak)) = best else {
        let first = table.first().map(|r| r.outcome.clone());
        return Err(match first {
            Some(Err(e)) => e,
            _ => domain("optimization grid", "no grid point could be evaluated"),
        });
    };
    let (power_mw, window_ns) = (row.coords[0], row.coords[1]);
    Ok(OptimumReport {
        toggle,
        power_mw,
        window_ns,
        peak_skr: peak,
        positive: peak > 0.0,
        table,
    })
}

/// Published satellite reference, shown next to computed link budgets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferencePoint {
    pub label: &'static str,
    pub dual_db: f64,
    pub skr: f64,
}

/// Micius dual downlink: 0.12 bit/s over a 56-71 dB attenuation band.
pub const MICIUS_REFERENCE: [ReferencePoint; 2] = [
    ReferencePoint {
        label: "micius",
        dual_db: 56.0,
        skr: 0.12,
    },
    ReferencePoint {
        label: "micius",
        dual_db: 71.0,
        skr: 0.12,
    },
];

/// Key rate against dual-link attenuation (split evenly over both arms), DEMUX on.
pub fn link_budget(preset: &ScenarioPreset, attenuation: AxisRange) -> Vec<SweepRow> {
    run_sweep(
        preset,
        &SweepSpec::one(Axis::Attenuation, attenuation).with_toggles(&[Toggle::Demux]),
    )
}
