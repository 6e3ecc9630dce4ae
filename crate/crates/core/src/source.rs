//! Continuous-wave SPDC pair source.

use crate::error::{domain, Result};
use crate::scalar::Real;
use crate::units::{SpectralShape, Wavelength};

/// Generated pairs per second per mW of pump at the crystal output.
///
/// Chosen so that a 24 % per-photon detection chain yields 5.5e6 detected
/// pairs per second per mW.
pub const DEFAULT_BRIGHTNESS_PER_MW: f64 = 9.55e7;
pub const DEFAULT_PUMP_WAVELENGTH_NM: f64 = 405.22;
pub const DEFAULT_SPECTRUM_FWHM_NM: f64 = 11.0;
pub const DEFAULT_INTRINSIC_VISIBILITY: f64 = 0.99;

// allowed mismatch between spectrum center and the degenerate wavelength
const DEGENERACY_TOLERANCE_NM: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceSpec<T> {
    brightness_per_mw: T,
    pump_power_mw: T,
    pump_wavelength: Wavelength<T>,
    spectrum: SpectralShape<T>,
    intrinsic_visibility: T,
}

impl<T: Real> SourceSpec<T> {
    pub fn new(
        brightness_per_mw: T,
        pump_power_mw: T,
        pump_wavelength: Wavelength<T>,
        spectrum: SpectralShape<T>,
        intrinsic_visibility: T,
    ) -> Result<Self> {
        if !(brightness_per_mw.is_finite() && brightness_per_mw > T::zero()) {
            return Err(domain("brightness", format!("{brightness_per_mw} pairs/s/mW must be > 0")));
        }
        if !(pump_power_mw.is_finite() && pump_power_mw >= T::zero()) {
            return Err(domain("pump power", format!("{pump_power_mw} mW must be >= 0")));
        }
        if !(intrinsic_visibility > T::zero() && intrinsic_visibility <= T::one()) {
            return Err(domain("intrinsic visibility", format!("{intrinsic_visibility} must lie in (0, 1]")));
        }
        let degenerate = pump_wavelength.nm() * T::lit(2.0);
        if (spectrum.center().nm() - degenerate).abs() > T::lit(DEGENERACY_TOLERANCE_NM) {
            return Err(domain(
                "spectrum center",
                format!(
                    "{} nm is more than {DEGENERACY_TOLERANCE_NM} nm from the degenerate wavelength {degenerate} nm",
                    spectrum.center().nm()
                ),
            ));
        }
        Ok(Self {
            brightness_per_mw,
            pump_power_mw,
            pump_wavelength,
            spectrum,
            intrinsic_visibility,
        })
    }

    pub fn brightness_per_mw(&self) -> T {
        self.brightness_per_mw
    }

    pub fn pump_power_mw(&self) -> T {
        self.pump_power_mw
    }

    pub fn pump_wavelength(&self) -> Wavelength<T> {
        self.pump_wavelength
    }

    pub fn degenerate_wavelength(&self) -> Wavelength<T> {
        Wavelength::from_nm(self.pump_wavelength.nm() * T::lit(2.0)).expect("twice a valid wavelength")
    }

    pub fn spectrum(&self) -> &SpectralShape<T> {
        &self.spectrum
    }

    pub fn intrinsic_visibility(&self) -> T {
        self.intrinsic_visibility
    }

    pub fn with_pump_power(&self, pump_power_mw: T) -> Result<Self> {
        Self::new(
            self.brightness_per_mw,
            pump_power_mw,
            self.pump_wavelength,
            self.spectrum,
            self.intrinsic_visibility,
        )
    }

    /// Pairs per second over the full bandwidth; linear in pump power.
    pub fn generated_pair_rate(&self) -> T {
        self.brightness_per_mw * self.pump_power_mw
    }

    /// Pairs per second landing in one conjugate channel pair.
    pub fn pair_rate_in_channel_pair(&self, capture_fraction: T) -> Result<T> {
        if !(capture_fraction >= T::zero() && capture_fraction <= T::one()) {
            return Err(domain("capture fraction", format!("{capture_fraction} must lie in [0, 1]")));
        }
        Ok(self.generated_pair_rate() * capture_fraction)
    }
}
