//! Counter-based disorder streams.
//!
//! A value is a keyed hash of `(master_seed, sample_index, t, x)` pushed
//! through the law's quantile function, so any site can be generated on its
//! own and the field never depends on the order sites are visited in.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const TIME_SALT: u64 = 0xD1B5_4A32_D192_ED03;
const COORD_SALT: u64 = 0xAEF1_7502_108E_F2D9;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[inline]
fn absorb(h: u64, v: u64, salt: u64) -> u64 {
    mix64(h.wrapping_add(GOLDEN) ^ v.wrapping_mul(salt))
}

/// Key of one environment sample: `(master_seed, sample_index)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamKey(u64);

impl StreamKey {
    pub fn new(master_seed: u64, sample_index: u64) -> Self {
        let h = mix64(master_seed ^ 0x005E_ED0F_D15C_0DE5);
        StreamKey(absorb(h, sample_index, GOLDEN | 1))
    }

    /// Hash state after absorbing `t` and the first `d − 1` coordinates.
    #[inline]
    pub fn row(self, time: i64, prefix: &[i32]) -> u64 {
        let mut h = absorb(self.0, time as u64, TIME_SALT);
        for &x in prefix {
            h = absorb(h, x as i64 as u64, COORD_SALT);
        }
        h
    }

    /// Final 64 bits for the last coordinate of a row.
    #[inline]
    pub fn site(row: u64, last: i32) -> u64 {
        absorb(row, last as i64 as u64, COORD_SALT)
    }

    pub fn bits(self, time: i64, site: &[i32]) -> u64 {
        let (last, prefix) = site.split_last().expect("sites have at least one coordinate");
        StreamKey::site(self.row(time, prefix), *last)
    }
}

/// Uniform in the open interval `(0, 1)` from the top 52 bits.
#[inline]
pub fn unit_open(bits: u64) -> f64 {
    ((bits >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

/// Standard normal quantile by Wichura's AS 241 (PPND16), accurate to about
/// 1e-16 relative. Uses `libm` so results are identical across platforms.
#[allow(clippy::excessive_precision)]
pub fn standard_normal_quantile(p: f64) -> f64 {
    const A: [f64; 8] = [
        3.387_132_872_796_366_608,
        133.141_667_891_784_377_45,
        1_971.590_950_306_551_442_7,
        13_731.693_765_509_461_125,
        45_921.953_931_549_871_457,
        67_265.770_927_008_700_853,
        33_430.575_583_588_128_105,
        2_509.080_928_730_122_672_7,
    ];
    const B: [f64; 8] = [
        1.0,
        42.313_330_701_600_911_252,
        687.187_007_492_057_908_30,
        5_394.196_021_424_751_107_7,
        21_213.794_301_586_595_867,
        39_307.895_800_092_710_610,
        28_729.085_735_721_942_674,
        5_226.495_278_852_854_561_0,
    ];
    const C: [f64; 8] = [
        1.423_437_110_749_683_577_34,
        4.630_337_846_156_545_295_90,
        5.769_497_221_460_691_405_50,
        3.647_848_324_763_204_605_04,
        1.270_458_252_452_368_382_58,
        0.241_780_725_177_450_611_770,
        0.022_723_844_989_269_184_583_3,
        7.745_450_142_783_414_076_40e-4,
    ];
    const D: [f64; 8] = [
        1.0,
        2.053_191_626_637_758_821_87,
        1.676_384_830_183_803_849_40,
        0.689_767_334_985_100_004_550,
        0.148_103_976_427_480_074_590,
        0.015_198_666_563_616_457_196_6,
        5.475_938_084_995_344_946_00e-4,
        1.050_750_071_644_416_843_24e-9,
    ];
    const E: [f64; 8] = [
        6.657_904_643_501_103_777_20,
        5.463_784_911_164_114_369_90,
        1.784_826_539_917_291_335_80,
        0.296_560_571_828_504_891_230,
        0.026_532_189_526_576_123_093_0,
        0.001_242_660_947_388_078_438_60,
        2.711_555_568_743_487_578_15e-5,
        2.010_334_399_292_288_132_65e-7,
    ];
    const F: [f64; 8] = [
        1.0,
        0.599_832_206_555_887_937_690,
        0.136_929_880_922_735_805_310,
        0.014_875_361_290_850_614_852_5,
        7.868_691_311_456_132_591_00e-4,
        1.846_318_317_510_054_681_80e-5,
        1.421_511_758_316_445_888_70e-7,
        2.044_263_103_389_939_785_64e-15,
    ];

    #[inline]
    fn poly(c: &[f64; 8], x: f64) -> f64 {
        c.iter().rev().fold(0.0, |acc, &k| acc * x + k)
    }

    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180_625 - q * q;
        return q * poly(&A, r) / poly(&B, r);
    }
    let tail = if q < 0.0 { p } else { 1.0 - p };
    let mut r = libm::sqrt(-libm::log(tail));
    let value = if r <= 5.0 {
        r -= 1.6;
        poly(&C, r) / poly(&D, r)
    } else {
        r -= 5.0;
        poly(&E, r) / poly(&F, r)
    };
    if q < 0.0 {
        -value
    } else {
        value
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::erf::erfc;

    fn normal_cdf(x: f64) -> f64 {
        0.5 * erfc(-x / std::f64::consts::SQRT_2)
    }

    #[test]
    fn quantile_reference_points() {
        assert_eq!(standard_normal_quantile(0.5), 0.0);
        assert!((standard_normal_quantile(0.975) - 1.959_963_984_540_054).abs() < 1e-14);
        assert!((standard_normal_quantile(0.001) + 3.090_232_306_167_813_5).abs() < 1e-13);
        assert!((standard_normal_quantile(1e-10) + 6.361_340_902_404_056).abs() < 1e-12);
    }

    #[test]
    fn quantile_inverts_cdf() {
        for i in 1..2000 {
            let p = i as f64 / 2000.0;
            let x = standard_normal_quantile(p);
            assert!(((normal_cdf(x) - p) / p).abs() < 1e-9, "p = {p}");
        }
        for p in [1e-300, 1e-100, 1e-20] {
            let x = standard_normal_quantile(p);
            assert!(((normal_cdf(x) - p) / p).abs() < 1e-9, "p = {p}");
        }
    }

    #[test]
    fn keyed_bits_are_deterministic_and_distinct() {
        let k = StreamKey::new(7, 3);
        assert_eq!(k.bits(2, &[1, -1]), StreamKey::new(7, 3).bits(2, &[1, -1]));
        assert_ne!(k.bits(2, &[1, -1]), k.bits(2, &[-1, 1]));
        assert_ne!(k.bits(2, &[1, -1]), StreamKey::new(7, 4).bits(2, &[1, -1]));
        assert_ne!(k.bits(2, &[1, -1]), k.bits(-2, &[1, -1]));
    }

    #[test]
    fn unit_open_bounds() {
        assert!(unit_open(0) > 0.0);
        assert!(unit_open(u64::MAX) < 1.0);
    }
}
