//! Globally adaptive Gauss–Kronrod (7/15) quadrature.

use crate::scalar::Real;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the odd Kronrod nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

const MAX_INTERVALS: usize = 4000;

#[derive(Debug, Clone, Copy)]
struct Piece<T> {
    a: T,
    b: T,
    value: T,
    error: T,
}

fn kronrod15<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T) -> Piece<T> {
    let half = (b - a) * T::lit(0.5);
    let mid = (a + b) * T::lit(0.5);
    let fc = f(mid);
    let mut kronrod = fc * T::lit(WGK[7]);
    let mut gauss = fc * T::lit(WG[3]);
    for (i, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * T::lit(x);
        let pair = f(mid - dx) + f(mid + dx);
        kronrod = kronrod + pair * T::lit(w);
        if i % 2 == 1 {
            gauss = gauss + pair * T::lit(WG[i / 2]);
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).abs();
    Piece { a, b, value, error }
}

/// Integrates `f` over `[a, b]`.
///
/// The interval is first cut into `initial_pieces` equal parts, then the piece
/// with the largest error estimate is bisected until the summed error falls
/// below `max(atol, rtol * |integral|)` or the subdivision budget runs out.
pub fn integrate<T: Real, F: Fn(T) -> T>(
    f: F,
    a: T,
    b: T,
    rtol: T,
    atol: T,
    initial_pieces: usize,
) -> T {
    if !(b > a) {
        return T::zero();
    }
    let n = initial_pieces.max(1);
    let width = (b - a) / T::from_usize(n).unwrap();
    let mut pieces: Vec<Piece<T>> = (0..n)
        .map(|i| {
            let lo = a + width * T::from_usize(i).unwrap();
            let hi = if i + 1 == n { b } else { lo + width };
            kronrod15(&f, lo, hi)
        })
        .collect();

    loop {
        let total = pieces.iter().fold(T::zero(), |s, p| s + p.value);
        let err = pieces.iter().fold(T::zero(), |s, p| s + p.error);
        if err <= atol.max(rtol * total.abs()) || pieces.len() >= MAX_INTERVALS {
            return total;
        }
        let (worst, _) = pieces
            .iter()
            .enumerate()
            .fold((0, T::neg_infinity()), |(bi, be), (i, p)| {
                if p.error > be {
                    (i, p.error)
                } else {
                    (bi, be)
                }
            });
        let p = pieces.swap_remove(worst);
        let mid = (p.a + p.b) * T::lit(0.5);
        if !(mid > p.a && mid < p.b) {
            // interval cannot be split further in this precision
            return total;
        }
        pieces.push(kronrod15(&f, p.a, mid));
        pieces.push(kronrod15(&f, mid, p.b));
    }
}
