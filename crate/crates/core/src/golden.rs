//! Functional fixed-point FFT and its double-precision reference.
//!
//! `fft_fixed` runs the same arithmetic, addressing and twiddle contracts as
//! the processor, stage by stage, without any notion of time. It is the
//! bit-exact reference for the cycle-accurate machine.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::addrgen::{input_address, permute, FftPlan};
use crate::error::ContractError;
use crate::qformat::{cadd, cmul, CaddSelector, DataWord};
use crate::twiddle::{exponent_unchecked, TwiddleLut};

/// N packed samples in natural order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleVector {
    data: Vec<DataWord>,
}

impl SampleVector {
    pub fn new(data: Vec<DataWord>) -> SampleVector {
        SampleVector { data }
    }

    pub fn zeros(n: usize) -> SampleVector {
        SampleVector { data: vec![DataWord::ZERO; n] }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[DataWord] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<DataWord> {
        self.data
    }

    /// Single nonzero sample at natural index `at`.
    pub fn impulse(n: usize, at: usize, amplitude: i16) -> SampleVector {
        let mut v = SampleVector::zeros(n);
        v.data[at] = DataWord::new(amplitude, 0);
        v
    }

    pub fn dc(n: usize, value: DataWord) -> SampleVector {
        SampleVector { data: vec![value; n] }
    }

    /// Quantized `amplitude * e^{+i 2 pi bin n / N}`.
    pub fn tone(n: usize, bin: usize, amplitude: f64) -> SampleVector {
        let data = (0..n)
            .map(|t| {
                let th = 2.0 * std::f64::consts::PI * ((bin * t) % n) as f64 / n as f64;
                let q = |x: f64| crate::qformat::Fix16::from_f64(amplitude * x).raw();
                DataWord::new(q(th.cos()), q(th.sin()))
            })
            .collect();
        SampleVector { data }
    }

    /// Components uniform over [-16384, 16383], reproducible from `seed`.
    pub fn random(n: usize, seed: u64) -> SampleVector {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..n)
            .map(|_| DataWord::new(rng.gen_range(-16384..16384), rng.gen_range(-16384..16384)))
            .collect();
        SampleVector { data }
    }
}

impl std::ops::Index<usize> for SampleVector {
    type Output = DataWord;
    fn index(&self, i: usize) -> &DataWord {
        &self.data[i]
    }
}

pub type Complex = (f64, f64);

/// Double-precision spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatSpectrum {
    pub bins: Vec<Complex>,
}

/// Lay out natural-order samples in transform memory order.
pub fn to_memory_order(plan: &FftPlan, x: &SampleVector) -> Vec<DataWord> {
    let mut mem = vec![DataWord::ZERO; plan.n_points()];
    for (n, w) in x.as_slice().iter().enumerate() {
        mem[input_address(plan, n)] = *w;
    }
    mem
}

pub fn fft_fixed(plan: &FftPlan, x: &SampleVector) -> Result<SampleVector, ContractError> {
    if x.len() != plan.n_points() {
        return Err(ContractError::LengthMismatch { got: x.len(), want: plan.n_points() });
    }
    let lut = TwiddleLut::shared();
    let mut mem = to_memory_order(plan, x);
    let n = plan.n_points();
    for stage in 0..plan.stage_count() {
        let rx2 = crate::twiddle::rx2_flag(plan, stage)?;
        for base in (0..n).step_by(4) {
            let mut addr = [0usize; 4];
            let mut ops = [DataWord::ZERO; 4];
            for q in 0..4 {
                let c = base + q;
                addr[q] = permute(plan, stage, c);
                let w = lut.lookup(exponent_unchecked(plan, stage, c), n)?;
                ops[q] = cmul(mem[addr[q]], w);
            }
            for q in 0..4 {
                let sel = CaddSelector::new(rx2, q as u8);
                mem[addr[q]] = cadd(ops[0], ops[1], ops[2], ops[3], sel);
            }
        }
    }
    Ok(SampleVector::new(mem))
}

/// Direct O(N^2) DFT of the unpacked Q1.15 values.
pub fn dft_float(x: &SampleVector) -> FloatSpectrum {
    let n = x.len();
    let (cos, sin): (Vec<f64>, Vec<f64>) = (0..n)
        .map(|j| {
            let th = -2.0 * std::f64::consts::PI * j as f64 / n as f64;
            (th.cos(), th.sin())
        })
        .unzip();
    let xs: Vec<Complex> = x.as_slice().iter().map(|w| w.to_f64()).collect();
    let bins = (0..n)
        .map(|k| {
            let mut acc = (0.0, 0.0);
            let mut j = 0;
            for &(re, im) in &xs {
                let (c, s) = (cos[j], sin[j]);
                acc.0 += re * c - im * s;
                acc.1 += re * s + im * c;
                j += k;
                if j >= n {
                    j -= n;
                }
            }
            acc
        })
        .collect();
    FloatSpectrum { bins }
}

/// Scale-compensated SNR of a fixed-point spectrum against the reference.
/// Returns `f64::INFINITY` when the error is exactly zero.
pub fn snr_db(out: &SampleVector, reference: &FloatSpectrum, plan: &FftPlan) -> Result<f64, ContractError> {
    if out.len() != reference.bins.len() {
        return Err(ContractError::LengthMismatch { got: out.len(), want: reference.bins.len() });
    }
    let scale = plan.output_scale();
    let mut sig = 0.0;
    let mut err = 0.0;
    for (w, &(rr, ri)) in out.as_slice().iter().zip(&reference.bins) {
        let (or, oi) = w.to_f64();
        sig += rr * rr + ri * ri;
        let (er, ei) = (rr - or / scale, ri - oi / scale);
        err += er * er + ei * ei;
    }
    if sig == 0.0 {
        return Err(ContractError::ZeroReferenceEnergy);
    }
    if err == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (sig / err).log10())
}

/// Regression floor on `snr_db` for random half-scale inputs: the 1st
/// percentile over the seeds of [`snr_calibration_seeds`], rounded down.
/// The fixed 1/8-per-stage datapath scaling shrinks the signal by 2^21 at
/// N = 16384, so large sizes sit near the quantization floor.
pub fn snr_floor_db(n: usize) -> Option<f64> {
    Some(match n {
        64 => 45.14,
        128 => 35.34,
        256 => 33.60,
        512 => 23.79,
        1024 => 21.86,
        2048 => 12.11,
        4096 => 10.07,
        8192 => 0.67,
        16384 => -1.65,
        _ => return None,
    })
}

/// Seeds of the random batch that defines the SNR floor of size `n`.
pub fn snr_calibration_seeds(n: usize) -> std::ops::Range<u64> {
    if n <= 1024 {
        0..1000
    } else {
        0..100
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent integer oracle for an impulse at natural index 0 of a
    /// power-of-four transform: one nonzero value walks through every stage.
    fn impulse_oracle(amplitude: i64, stages: usize) -> i64 {
        let mut v = amplitude;
        for _ in 0..stages {
            v = (v * 32767) >> 16; // untwiddled operand through the multiplier
            v >>= 2; // radix-4 adder with three zero operands
        }
        v
    }

    #[test]
    fn impulse_is_flat() {
        let plan = FftPlan::new(64).unwrap();
        let out = fft_fixed(&plan, &SampleVector::impulse(64, 0, 16384)).unwrap();
        let want = impulse_oracle(16384, 3);
        assert_eq!(want, 31);
        for w in out.as_slice() {
            assert_eq!(*w, DataWord::new(want as i16, 0));
        }
    }

    #[test]
    fn zeros_stay_zero() {
        let plan = FftPlan::new(64).unwrap();
        let out = fft_fixed(&plan, &SampleVector::zeros(64)).unwrap();
        assert!(out.as_slice().iter().all(|w| *w == DataWord::ZERO));
    }

    #[test]
    fn dc_concentrates_in_bin_zero() {
        let plan = FftPlan::new(1024).unwrap();
        let out = fft_fixed(&plan, &SampleVector::dc(1024, DataWord::new(16384, 0))).unwrap();
        assert!(out[0].re() > 0);
        for w in &out.as_slice()[1..] {
            assert!(w.re().abs() <= 2 && w.im().abs() <= 2, "{w:?}");
        }
    }

    #[test]
    fn length_mismatch() {
        let plan = FftPlan::new(64).unwrap();
        assert!(matches!(
            fft_fixed(&plan, &SampleVector::zeros(128)),
            Err(ContractError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn dft_examples() {
        let x = SampleVector::impulse(64, 0, 16384);
        for &(re, im) in &dft_float(&x).bins {
            assert!((re - 0.5).abs() < 1e-12 && im.abs() < 1e-12);
        }
        let tone = SampleVector::tone(64, 5, 0.9);
        let spec = dft_float(&tone);
        for (k, &(re, im)) in spec.bins.iter().enumerate() {
            let mag = (re * re + im * im).sqrt();
            if k == 5 {
                assert!((mag - 0.9 * 64.0).abs() < 0.01);
            } else {
                assert!(mag < 0.01);
            }
        }
        assert!(dft_float(&SampleVector::zeros(64)).bins.iter().all(|&(r, i)| r == 0.0 && i == 0.0));
    }

    #[test]
    fn snr_edge_cases() {
        let plan = FftPlan::new(64).unwrap();
        let x = SampleVector::impulse(64, 0, 16384);
        let out = fft_fixed(&plan, &x).unwrap();
        // a reference built from the output itself has zero error
        let exact = FloatSpectrum {
            bins: out.as_slice().iter().map(|w| {
                let (r, i) = w.to_f64();
                (r / plan.output_scale(), i / plan.output_scale())
            }).collect(),
        };
        assert_eq!(snr_db(&out, &exact, &plan).unwrap(), f64::INFINITY);
        let zero = SampleVector::zeros(64);
        assert!(snr_db(&zero, &dft_float(&x), &plan).unwrap().abs() < 1e-12);
        assert_eq!(
            snr_db(&out, &dft_float(&zero), &plan),
            Err(ContractError::ZeroReferenceEnergy)
        );
    }

    #[test]
    fn random_is_reproducible_and_half_scale() {
        let a = SampleVector::random(256, 7);
        assert_eq!(a, SampleVector::random(256, 7));
        assert_ne!(a, SampleVector::random(256, 8));
        assert!(a.as_slice().iter().all(|w| (-16384..16384).contains(&w.re()) && (-16384..16384).contains(&w.im())));
    }
}
