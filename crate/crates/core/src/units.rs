//! Units, conversions and spectral densities.
//!
//! Conventions used throughout the crate: wavelengths in nm, frequencies in
//! THz, times in ns, rates in events per second, attenuation in dB.

use crate::error::{domain, Result};
use crate::quadrature;
use crate::scalar::Real;

/// Speed of light in nm·THz.
pub const SPEED_OF_LIGHT_NM_THZ: f64 = 299_792.458;

/// Vacuum wavelength in nanometres. Always positive and finite.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Wavelength<T>(T);

impl<T: Real> Wavelength<T> {
    pub fn from_nm(nm: T) -> Result<Self> {
        if nm.is_finite() && nm > T::zero() {
            Ok(Self(nm))
        } else {
            Err(domain("wavelength", format!("{nm} nm must be positive and finite")))
        }
    }

    pub fn from_frequency_thz(thz: T) -> Result<Self> {
        if !(thz.is_finite() && thz > T::zero()) {
            return Err(domain("frequency", format!("{thz} THz must be positive and finite")));
        }
        Self::from_nm(T::lit(SPEED_OF_LIGHT_NM_THZ) / thz)
    }

    #[inline]
    pub fn nm(self) -> T {
        self.0
    }

    #[inline]
    pub fn frequency_thz(self) -> T {
        T::lit(SPEED_OF_LIGHT_NM_THZ) / self.0
    }
}

/// `ν = c / λ`, in THz.
pub fn wavelength_to_frequency<T: Real>(wavelength: Wavelength<T>) -> T {
    wavelength.frequency_thz()
}

/// Inverse of [`wavelength_to_frequency`].
pub fn frequency_to_wavelength<T: Real>(thz: T) -> Result<Wavelength<T>> {
    Wavelength::from_frequency_thz(thz)
}

/// Converts a wavelength interval (nm) at `center` into the equivalent
/// frequency interval (THz), to first order.
pub fn nm_interval_to_thz<T: Real>(width_nm: T, center: Wavelength<T>) -> T {
    T::lit(SPEED_OF_LIGHT_NM_THZ) * width_nm / (center.nm() * center.nm())
}

/// A loss in decibels. Gains are not modelled.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct AttenuationDb<T>(T);

impl<T: Real> AttenuationDb<T> {
    pub fn new(db: T) -> Result<Self> {
        if db.is_finite() && db >= T::zero() {
            Ok(Self(db))
        } else {
            Err(domain("attenuation", format!("{db} dB must be finite and >= 0")))
        }
    }

    pub fn zero() -> Self {
        Self(T::zero())
    }

    #[inline]
    pub fn db(self) -> T {
        self.0
    }

    #[inline]
    pub fn linear(self) -> T {
        T::lit(10.0).powf(-self.0 / T::lit(10.0))
    }
}

/// Linear transmittance `10^(-a/10)` in `(0, 1]`.
pub fn db_to_linear<T: Real>(attenuation: AttenuationDb<T>) -> T {
    attenuation.linear()
}

/// Analytic form of the emission spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ShapeKind {
    #[default]
    Gaussian,
    SincSquared,
    TopHat,
}

impl std::fmt::Display for ShapeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ShapeKind::Gaussian => "gaussian",
            ShapeKind::SincSquared => "sinc2",
            ShapeKind::TopHat => "tophat",
        })
    }
}

impl std::str::FromStr for ShapeKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "gaussian" => Ok(ShapeKind::Gaussian),
            "sinc2" | "sinc-squared" => Ok(ShapeKind::SincSquared),
            "tophat" | "top-hat" => Ok(ShapeKind::TopHat),
            other => Err(format!("unknown spectral shape '{other}' (gaussian, sinc2, tophat)")),
        }
    }
}

// Gaussian support half-width in standard deviations; the mass outside is < 1e-32.
const GAUSS_SUPPORT_SIGMAS: f64 = 12.0;
// sinc^2 is truncated at its 16th zero on each side and renormalised.
const SINC_SUPPORT_LOBES: f64 = 16.0;
// x where sinc^2(x) = 1/2
const SINC2_HALF_MAX: f64 = 1.391_557_378_251_510_2;

/// Spectral density of emitted photons over wavelength, normalised so the
/// integral over its support equals `total`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralShape<T> {
    kind: ShapeKind,
    center: Wavelength<T>,
    fwhm_nm: T,
    total: T,
    // density(x) = scale * profile(x)
    scale: T,
}

impl<T: Real> SpectralShape<T> {
    pub fn new(kind: ShapeKind, center: Wavelength<T>, fwhm_nm: T, total: T) -> Result<Self> {
        if !(fwhm_nm.is_finite() && fwhm_nm > T::zero()) {
            return Err(domain("spectral FWHM", format!("{fwhm_nm} nm must be positive")));
        }
        if !(total.is_finite() && total >= T::zero()) {
            return Err(domain("spectral total", format!("{total} must be finite and >= 0")));
        }
        let mut shape = Self {
            kind,
            center,
            fwhm_nm,
            total,
            scale: T::one(),
        };
        let (lo, _) = shape.support();
        if lo <= T::zero() {
            return Err(domain(
                "spectral shape",
                format!("support reaches non-positive wavelength ({lo} nm); FWHM too large for center"),
            ));
        }
        shape.scale = total / shape.profile_mass();
        Ok(shape)
    }

    pub fn kind(&self) -> ShapeKind {
        self.kind
    }

    pub fn center(&self) -> Wavelength<T> {
        self.center
    }

    pub fn fwhm_nm(&self) -> T {
        self.fwhm_nm
    }

    pub fn total(&self) -> T {
        self.total
    }

    /// Same shape with a different normalisation.
    pub fn with_total(&self, total: T) -> Result<Self> {
        Self::new(self.kind, self.center, self.fwhm_nm, total)
    }

    /// Same shape normalised to unit integral.
    pub fn normalized(&self) -> Self {
        Self::new(self.kind, self.center, self.fwhm_nm, T::one()).expect("shape already validated")
    }

    fn sigma(&self) -> T {
        self.fwhm_nm / (T::lit(2.0) * (T::lit(2.0) * T::LN_2()).sqrt())
    }

    // distance between sinc^2 zeros
    fn sinc_width(&self) -> T {
        self.fwhm_nm * T::PI() / (T::lit(2.0) * T::lit(SINC2_HALF_MAX))
    }

    /// Characteristic width used to seed the quadrature subdivision.
    fn feature_width(&self) -> T {
        match self.kind {
            ShapeKind::Gaussian => self.sigma(),
            ShapeKind::SincSquared => self.sinc_width(),
            ShapeKind::TopHat => self.fwhm_nm,
        }
    }

    /// Closed wavelength interval outside of which the density is zero.
    pub fn support(&self) -> (T, T) {
        let half = match self.kind {
            ShapeKind::Gaussian => T::lit(GAUSS_SUPPORT_SIGMAS) * self.sigma(),
            ShapeKind::SincSquared => T::lit(SINC_SUPPORT_LOBES) * self.sinc_width(),
            ShapeKind::TopHat => self.fwhm_nm * T::lit(0.5),
        };
        (self.center.nm() - half, self.center.nm() + half)
    }

    fn profile(&self, nm: T) -> T {
        let (lo, hi) = self.support();
        if nm < lo || nm > hi {
            return T::zero();
        }
        let x = nm - self.center.nm();
        match self.kind {
            ShapeKind::Gaussian => {
                let s = self.sigma();
                (-(x * x) / (T::lit(2.0) * s * s)).exp()
            }
            ShapeKind::SincSquared => {
                let u = T::PI() * x / self.sinc_width();
                if u.abs() < T::lit(1e-6) {
                    T::one() - u * u / T::lit(3.0)
                } else {
                    let s = u.sin() / u;
                    s * s
                }
            }
            ShapeKind::TopHat => T::one(),
        }
    }

    fn profile_mass(&self) -> T {
        match self.kind {
            ShapeKind::Gaussian => {
                let s = self.sigma();
                s * (T::lit(2.0) * T::PI()).sqrt() * (T::lit(GAUSS_SUPPORT_SIGMAS) / T::SQRT_2()).erf()
            }
            ShapeKind::TopHat => self.fwhm_nm,
            ShapeKind::SincSquared => {
                let (lo, hi) = self.support();
                let lobes = (T::lit(2.0 * SINC_SUPPORT_LOBES)).to_usize().unwrap_or(32);
                let rtol = T::lit(T::QUAD_RTOL * 1e-3).max(T::epsilon() * T::lit(16.0));
                quadrature::integrate(|x| self.profile(x), lo, hi, rtol, T::zero(), lobes)
            }
        }
    }

    /// Photon density per nm at `nm`.
    pub fn density(&self, nm: T) -> T {
        self.scale * self.profile(nm)
    }
}

/// Photon flux of `shape` falling in the band `[lo, hi]`.
///
/// Adaptive quadrature with relative tolerance `Real::QUAD_RTOL` (1e-9 for
/// `f64`); the result is clamped to `[0, shape.total()]`.
pub fn integrate_band<T: Real>(shape: &SpectralShape<T>, lo: Wavelength<T>, hi: Wavelength<T>) -> Result<T> {
    if !(lo < hi) {
        return Err(domain(
            "band",
            format!("lower edge {} nm must be below upper edge {} nm", lo.nm(), hi.nm()),
        ));
    }
    let (s_lo, s_hi) = shape.support();
    let a = lo.nm().max(s_lo);
    let b = hi.nm().min(s_hi);
    if !(a < b) || shape.total() == T::zero() {
        return Ok(T::zero());
    }
    let pieces = ((b - a) / shape.feature_width())
        .ceil()
        .to_usize()
        .unwrap_or(1)
        .clamp(1, 128);
    let atol = shape.total() * T::lit(1e-15);
    let value = quadrature::integrate(|x| shape.density(x), a, b, T::lit(T::QUAD_RTOL), atol, pieces);
    Ok(value.max(T::zero()).min(shape.total()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn nm(v: f64) -> Wavelength<f64> {
        Wavelength::from_nm(v).unwrap()
    }

    #[test]
    fn frequency_of_810nm() {
        // 299792.458 / 810, evaluated at 30 digits
        assert_relative_eq!(wavelength_to_frequency(nm(810.0)), 370.114_145_679_012_35, max_relative = 1e-14);
    }

    #[test]
    fn halving_wavelength_doubles_frequency() {
        assert_eq!(wavelength_to_frequency(nm(405.0)), 2.0 * wavelength_to_frequency(nm(810.0)));
    }

    #[test]
    fn rejects_bad_wavelengths() {
        for bad in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert!(Wavelength::from_nm(bad).is_err(), "{bad}");
        }
        assert!(frequency_to_wavelength(0.0f64).is_err());
    }

    #[test]
    fn decibel_conversion() {
        assert_eq!(db_to_linear(AttenuationDb::<f64>::zero()), 1.0);
        assert_relative_eq!(db_to_linear(AttenuationDb::new(3.0).unwrap()), 0.501_187_233_627_272_3, max_relative = 1e-14);
        assert_relative_eq!(db_to_linear(AttenuationDb::new(63.0).unwrap()), 5.011_872_336_272_723e-7, max_relative = 1e-13);
        assert!(AttenuationDb::new(-0.5f64).is_err());
    }

    #[test]
    fn every_shape_integrates_to_total_over_support() {
        for kind in [ShapeKind::Gaussian, ShapeKind::SincSquared, ShapeKind::TopHat] {
            let s = SpectralShape::new(kind, nm(810.44), 11.0, 3.5e8).unwrap();
            let (lo, hi) = s.support();
            let v = integrate_band(&s, nm(lo - 1.0), nm(hi + 1.0)).unwrap();
            assert_relative_eq!(v, 3.5e8, max_relative = 1e-9);
        }
    }

    #[test]
    fn gaussian_peak_band_matches_error_function() {
        let s = SpectralShape::new(ShapeKind::Gaussian, nm(810.0), 11.0, 1.0).unwrap();
        let v = integrate_band(&s, nm(810.0 - 0.0375), nm(810.0 + 0.0375)).unwrap();
        // erf(0.0375 / (sigma sqrt 2)), sigma = 11 / (2 sqrt(2 ln 2)); 30-digit evaluation
        assert_relative_eq!(v, 6.405_185_375_313_442e-3, max_relative = 1e-9);
    }

    #[test]
    fn sinc_squared_has_requested_fwhm() {
        let s = SpectralShape::new(ShapeKind::SincSquared, nm(810.0), 11.0, 1.0).unwrap();
        let peak = s.density(810.0);
        assert_relative_eq!(s.density(810.0 + 5.5), peak / 2.0, max_relative = 1e-12);
        assert_relative_eq!(s.density(810.0 - 5.5), peak / 2.0, max_relative = 1e-12);
    }

    #[test]
    fn disjoint_band_is_empty() {
        let s = SpectralShape::new(ShapeKind::TopHat, nm(810.0), 2.0, 1.0).unwrap();
        assert_eq!(integrate_band(&s, nm(812.0), nm(815.0)).unwrap(), 0.0);
        assert_eq!(integrate_band(&s, nm(800.0), nm(808.99)).unwrap(), 0.0);
    }

    #[test]
    fn inverted_band_is_an_error() {
        let s = SpectralShape::new(ShapeKind::Gaussian, nm(810.0), 11.0, 1.0).unwrap();
        assert!(integrate_band(&s, nm(811.0), nm(811.0)).is_err());
        assert!(integrate_band(&s, nm(812.0), nm(811.0)).is_err());
    }

    #[test]
    fn shape_must_stay_at_positive_wavelengths() {
        assert!(SpectralShape::new(ShapeKind::Gaussian, nm(10.0), 11.0, 1.0).is_err());
        assert!(SpectralShape::new(ShapeKind::Gaussian, nm(810.0), 0.0, 1.0).is_err());
    }

    #[test]
    fn single_precision_band() {
        let s = SpectralShape::<f32>::new(ShapeKind::Gaussian, Wavelength::from_nm(810.0).unwrap(), 11.0, 1.0).unwrap();
        let v = integrate_band(&s, Wavelength::from_nm(809.9625).unwrap(), Wavelength::from_nm(810.0375).unwrap()).unwrap();
        assert!((v - 6.405_185e-3).abs() < 2e-5);
    }
}
