//! Q1.15 fixed-point complex arithmetic and the packed 32-bit sample word.
//!
//! A sample is two 16-bit two's-complement halves sharing one data word: the
//! real part in bits 15..0 and the imaginary part in bits 31..16. All
//! arithmetic here is bit-exact and shared by the golden model and the
//! cycle-accurate functional units.

use std::fmt;

/// 16-bit signed fixed-point number, value = raw / 2^15.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Fix16(pub i16);

impl Fix16 {
    pub const ZERO: Fix16 = Fix16(0);
    pub const MAX: Fix16 = Fix16(i16::MAX);
    pub const MIN: Fix16 = Fix16(i16::MIN);

    pub fn raw(self) -> i16 {
        self.0
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / 32768.0
    }

    /// Round-to-nearest quantization with saturation.
    pub fn from_f64(x: f64) -> Fix16 {
        Fix16(saturate((x * 32768.0).round() as i64))
    }

    /// Two's-complement negation; -(-32768) saturates to 32767.
    pub fn neg_sat(self) -> Fix16 {
        Fix16(self.0.saturating_neg())
    }
}

#[inline]
pub(crate) fn saturate(v: i64) -> i16 {
    v.clamp(i16::MIN as i64, i16::MAX as i64) as i16
}

/// One packed complex sample.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct DataWord(pub u32);

impl DataWord {
    pub const ZERO: DataWord = DataWord(0);

    pub fn new(re: i16, im: i16) -> DataWord {
        pack(Fix16(re), Fix16(im))
    }

    pub fn re(self) -> i16 {
        self.0 as u16 as i16
    }

    pub fn im(self) -> i16 {
        (self.0 >> 16) as u16 as i16
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn conj(self) -> DataWord {
        DataWord::new(self.re(), self.im().saturating_neg())
    }

    /// (re, im) as floating values in [-1, 1).
    pub fn to_f64(self) -> (f64, f64) {
        (Fix16(self.re()).to_f64(), Fix16(self.im()).to_f64())
    }
}

impl fmt::Debug for DataWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DataWord({}, {})", self.re(), self.im())
    }
}

pub fn pack(re: Fix16, im: Fix16) -> DataWord {
    DataWord(((im.0 as u16 as u32) << 16) | re.0 as u16 as u32)
}

pub fn unpack(w: DataWord) -> (Fix16, Fix16) {
    (Fix16(w.re()), Fix16(w.im()))
}

/// Operation selector of the complex adder: radix-2 flag plus the 2-bit
/// serial counter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CaddSelector {
    pub rx2: bool,
    cnt: u8,
}

impl CaddSelector {
    pub fn new(rx2: bool, cnt: u8) -> CaddSelector {
        CaddSelector { rx2, cnt: cnt & 3 }
    }

    pub fn cnt(self) -> u8 {
        self.cnt
    }

    /// Advance the counter, wrapping modulo 4.
    pub fn advance(&mut self) {
        self.cnt = (self.cnt + 1) & 3;
    }
}

#[derive(Clone, Copy)]
struct Wide {
    re: i64,
    im: i64,
}

impl Wide {
    fn of(w: DataWord) -> Wide {
        Wide { re: w.re() as i64, im: w.im() as i64 }
    }
    fn add(self, o: Wide) -> Wide {
        Wide { re: self.re + o.re, im: self.im + o.im }
    }
    fn sub(self, o: Wide) -> Wide {
        Wide { re: self.re - o.re, im: self.im - o.im }
    }
    // multiplication by +i: (re, im) -> (-im, re)
    fn mul_i(self) -> Wide {
        Wide { re: -self.im, im: self.re }
    }
    fn finish(self, shift: u32) -> DataWord {
        DataWord::new(saturate(self.re >> shift), saturate(self.im >> shift))
    }
}

/// Complex adder: one radix-4 butterfly output (scaled by 1/4) or one of the
/// two radix-2 butterfly outputs (scaled by 1/2), selected by `sel`.
///
/// Sums are formed in wide integers, shifted arithmetically, then clamped.
pub fn cadd(a: DataWord, b: DataWord, c: DataWord, d: DataWord, sel: CaddSelector) -> DataWord {
    let (a, b, c, d) = (Wide::of(a), Wide::of(b), Wide::of(c), Wide::of(d));
    if sel.rx2 {
        let v = match sel.cnt {
            0 => a.add(b),
            1 => a.sub(b),
            2 => c.add(d),
            _ => c.sub(d),
        };
        v.finish(1)
    } else {
        let v = match sel.cnt {
            0 => a.add(b).add(c).add(d),
            // a - ib - c + id
            1 => a.sub(b.mul_i()).sub(c).add(d.mul_i()),
            2 => a.sub(b).add(c).sub(d),
            // a + ib - c - id
            _ => a.add(b.mul_i()).sub(c).sub(d.mul_i()),
        };
        v.finish(2)
    }
}

/// Complex multiplier: (a * w) / 2, each component truncated toward -inf.
pub fn cmul(a: DataWord, w: DataWord) -> DataWord {
    let (ar, ai) = (a.re() as i64, a.im() as i64);
    let (wr, wi) = (w.re() as i64, w.im() as i64);
    let re = ar * wr - ai * wi;
    let im = ar * wi + ai * wr;
    // |w| <= 1 keeps both within i16 after the shift; clamp covers arbitrary w
    DataWord::new(saturate(re >> 16), saturate(im >> 16))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(re: i16, im: i16) -> DataWord {
        DataWord::new(re, im)
    }

    #[test]
    fn pack_layout() {
        assert_eq!(pack(Fix16(0x1234), Fix16(0x5678)).bits(), 0x5678_1234);
        assert_eq!(pack(Fix16(0), Fix16(0)).bits(), 0);
        assert_eq!(pack(Fix16(-1), Fix16(1)).bits(), 0x0001_FFFF);
    }

    #[test]
    fn unpack_layout() {
        assert_eq!(unpack(DataWord(0x5678_1234)), (Fix16(0x1234), Fix16(0x5678)));
        assert_eq!(unpack(DataWord(0x8000_0000)), (Fix16(0), Fix16(-32768)));
        assert_eq!(unpack(DataWord(0x0000_7FFF)), (Fix16(32767), Fix16(0)));
    }

    #[test]
    fn cadd_examples() {
        let x = p(8192, 0);
        assert_eq!(cadd(x, x, x, x, CaddSelector::new(false, 0)), p(8192, 0));
        let z = DataWord::ZERO;
        assert_eq!(cadd(z, p(16384, 0), z, z, CaddSelector::new(false, 1)), p(0, -4096));
        assert_eq!(
            cadd(p(16384, 0), p(8192, 0), z, z, CaddSelector::new(true, 1)),
            p(4096, 0)
        );
    }

    #[test]
    fn cadd_saturating_extreme() {
        // a - b + c - d on the real part, evaluated in i64 then clamped
        let a = p(-32768, 0);
        let m = p(32767, 0);
        let exact: i64 = -32768 - 32767 + 32767 - 32767;
        let want = saturate(exact >> 2);
        assert_eq!(cadd(a, m, m, m, CaddSelector::new(false, 2)).re(), want);
        assert_eq!(want, -16384);
        // full-scale in-phase sum clamps instead of wrapping
        let all = cadd(m, m, m, m, CaddSelector::new(false, 0));
        assert_eq!(all.re(), 32767);
        let neg = p(-32768, -32768);
        let r = cadd(neg, neg, neg, neg, CaddSelector::new(false, 0));
        assert_eq!(r, neg);
    }

    #[test]
    fn cmul_examples() {
        assert_eq!(cmul(p(16384, 0), p(32767, 0)), p(8191, 0));
        assert_eq!(cmul(p(1234, -777), DataWord::ZERO), DataWord::ZERO);
        assert_eq!(cmul(p(16384, 0), p(23170, 23170)), p(5792, 5792));
        // (16384*32767) >> 16 computed independently
        assert_eq!((16384i64 * 32767) >> 16, 8191);
    }

    #[test]
    fn selector_wraps() {
        let mut s = CaddSelector::new(true, 3);
        s.advance();
        assert_eq!(s.cnt(), 0);
        assert!(s.rx2);
    }

    fn word() -> impl Strategy<Value = DataWord> {
        any::<u32>().prop_map(DataWord)
    }

    proptest! {
        #[test]
        fn pack_unpack_roundtrip(w in any::<u32>()) {
            let (re, im) = unpack(DataWord(w));
            prop_assert_eq!(pack(re, im).bits(), w);
        }

        #[test]
        fn cadd_exact_when_divisible(
            v in proptest::collection::vec((-2048i16..2048, -2048i16..2048), 4),
            cnt in 0u8..4,
            rx2 in any::<bool>(),
        ) {
            // multiples of 4 keep every sum divisible by the scale
            let w: Vec<DataWord> = v.iter().map(|&(r, i)| p(r * 4, i * 4)).collect();
            let out = cadd(w[0], w[1], w[2], w[3], CaddSelector::new(rx2, cnt));
            let c: Vec<(i64, i64)> = v.iter().map(|&(r, i)| (r as i64 * 4, i as i64 * 4)).collect();
            let (re, im) = if rx2 {
                let (x, y, s) = match cnt { 0 => (c[0], c[1], 1), 1 => (c[0], c[1], -1), 2 => (c[2], c[3], 1), _ => (c[2], c[3], -1) };
                ((x.0 + s * y.0) / 2, (x.1 + s * y.1) / 2)
            } else {
                // sum_q (-i)^(q*cnt) x_q
                let mut acc = (0i64, 0i64);
                for (q, x) in c.iter().enumerate() {
                    let mut t = *x;
                    for _ in 0..(q * cnt as usize) % 4 { t = (t.1, -t.0); }
                    acc = (acc.0 + t.0, acc.1 + t.1);
                }
                (acc.0 / 4, acc.1 / 4)
            };
            prop_assert_eq!((out.re() as i64, out.im() as i64), (re, im));
        }

        #[test]
        fn cadd_conjugate_symmetry(a in word(), b in word(), c in word(), d in word(), cnt in 0u8..4) {
            // avoid -32768 whose negation saturates
            let fix = |w: DataWord| p(w.re().max(-32767), w.im().max(-32767));
            let (a, b, c, d) = (fix(a), fix(b), fix(c), fix(d));
            let flipped = match cnt { 1 => 3, 3 => 1, x => x };
            let lhs = cadd(a.conj(), b.conj(), c.conj(), d.conj(), CaddSelector::new(false, flipped));
            let rhs = cadd(a, b, c, d, CaddSelector::new(false, cnt));
            // conj of a floor-shifted value differs by at most 1 LSB from the
            // floor-shift of the conjugate; the real part is shared exactly
            prop_assert_eq!(lhs.re(), rhs.re());
            prop_assert!((lhs.im() as i32 + rhs.im() as i32).abs() <= 1);
        }

        #[test]
        fn cmul_matches_wide_oracle(a in word(), w in word()) {
            let re = a.re() as i64 * w.re() as i64 - a.im() as i64 * w.im() as i64;
            let im = a.re() as i64 * w.im() as i64 + a.im() as i64 * w.re() as i64;
            let out = cmul(a, w);
            prop_assert_eq!(out.re() as i64, (re >> 16).clamp(-32768, 32767));
            prop_assert_eq!(out.im() as i64, (im >> 16).clamp(-32768, 32767));
        }

        #[test]
        fn cmul_half_scale_bound(a in word(), k in 0u32..16384) {
            // w on the unit circle: the result magnitude is |a|/2 <= 2^15 * sqrt(2) / 2
            let w = crate::twiddle::TwiddleLut::shared().lookup(k, 16384).unwrap();
            let out = cmul(a, w);
            let mag_in = ((a.re() as f64).powi(2) + (a.im() as f64).powi(2)).sqrt();
            let mag_out = ((out.re() as f64).powi(2) + (out.im() as f64).powi(2)).sqrt();
            prop_assert!(mag_out <= mag_in / 2.0 + 2.0);
            prop_assert!(out.re().unsigned_abs() <= 23171 && out.im().unsigned_abs() <= 23171);
        }
    }
}
