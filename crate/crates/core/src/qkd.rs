//! Asymptotic BBM92 secure key rate.
//!
//! `R = q (C + A) [1 - f_EC h(E) - h(E)]`, clipped at zero, summed over
//! conjugate channel pairs.

use crate::coincidence::{qber, PairStats};
use crate::error::{domain, Result};
use crate::scalar::Real;

pub const DEFAULT_SIFTING: f64 = 0.5;
pub const DEFAULT_EC_INEFFICIENCY: f64 = 1.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeyRateParams<T> {
    sifting: T,
    ec_inefficiency: T,
}

impl<T: Real> KeyRateParams<T> {
    pub fn new(sifting: T, ec_inefficiency: T) -> Result<Self> {
        if !(sifting > T::zero() && sifting <= T::one()) {
            return Err(domain("sifting factor", format!("{sifting} must lie in (0, 1]")));
        }
        if !(ec_inefficiency.is_finite() && ec_inefficiency >= T::one()) {
            return Err(domain("error-correction inefficiency", format!("{ec_inefficiency} must be >= 1")));
        }
        Ok(Self { sifting, ec_inefficiency })
    }

    pub fn sifting(&self) -> T {
        self.sifting
    }

    pub fn ec_inefficiency(&self) -> T {
        self.ec_inefficiency
    }
}

impl<T: Real> Default for KeyRateParams<T> {
    fn default() -> Self {
        Self {
            sifting: T::lit(DEFAULT_SIFTING),
            ec_inefficiency: T::lit(DEFAULT_EC_INEFFICIENCY),
        }
    }
}

/// Shannon entropy of a biased bit, in bits; `h(0) = h(1) = 0`.
pub fn binary_entropy<T: Real>(e: T) -> Result<T> {
    if !(e >= T::zero() && e <= T::one()) {
        return Err(domain("binary entropy argument", format!("{e} must lie in [0, 1]")));
    }
    let term = |p: T| if p == T::zero() { T::zero() } else { -p * p.log2() };
    Ok(term(e) + term(T::one() - e))
}

/// `max(0, 1 - f_EC h(e) - h(e))`.
pub fn secure_fraction<T: Real>(e: T, params: &KeyRateParams<T>) -> Result<T> {
    let h = binary_entropy(e)?;
    Ok((T::one() - params.ec_inefficiency * h - h).max(T::zero()))
}

/// Key from one detector pair, bits/s.
pub fn skr_channel<T: Real>(trues: T, accidentals: T, intrinsic_visibility: T, params: &KeyRateParams<T>) -> Result<T> {
    let e = qber(trues, accidentals, intrinsic_visibility)?;
    Ok(params.sifting * (trues + accidentals) * secure_fraction(e, params)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelKey<T> {
    pub sifted: T,
    pub qber: T,
    pub skr: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KeyRateReport<T> {
    pub pairs: Vec<ChannelKey<T>>,
    pub sifted_total: T,
    pub skr_total: T,
}

/// Sum of per-pair key rates. An empty list gives zero.
pub fn skr_total<T: Real>(pairs: &[PairStats<T>], intrinsic_visibility: T, params: &KeyRateParams<T>) -> Result<KeyRateReport<T>> {
    let keys = pairs
        .iter()
        .map(|p| {
            Ok(ChannelKey {
                sifted: params.sifting * (p.trues + p.accidentals),
                qber: p.qber,
                skr: skr_channel(p.trues, p.accidentals, intrinsic_visibility, params)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(KeyRateReport {
        sifted_total: keys.iter().fold(T::zero(), |s, k| s + k.sifted),
        skr_total: keys.iter().fold(T::zero(), |s, k| s + k.skr),
        pairs: keys,
    })
}
