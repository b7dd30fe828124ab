//! Twiddle factors from a compressed ROM holding one octant of the circle.
//!
//! The ROM stores `W_M^j = e^{-i 2 pi j / M}` for `M = 16384` and
//! `j = 0..=M/8`. Every other root of unity is rebuilt from a stored entry
//! with component swaps and negations only.

use std::io::{self, Write};
use std::sync::OnceLock;

use crate::addrgen::{FftPlan, Radix};
use crate::error::ContractError;
use crate::qformat::{DataWord, Fix16};

pub const LUT_POINTS: usize = 16384;
pub const LUT_ENTRIES: usize = LUT_POINTS / 8 + 1;

const QUARTER: u32 = (LUT_POINTS / 4) as u32;
const OCTANT: u32 = (LUT_POINTS / 8) as u32;

/// Exponent of a twiddle `W_N^p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TwiddleRequest {
    pub exponent: u32,
    pub n_points: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwiddleLut {
    entries: Vec<DataWord>,
}

/// Direct Q1.15 quantization of `e^{-i 2 pi p / n}`.
pub fn quantize_root(p: u64, n: u64) -> DataWord {
    let theta = -2.0 * std::f64::consts::PI * (p as f64) / (n as f64);
    DataWord::new(Fix16::from_f64(theta.cos()).raw(), Fix16::from_f64(theta.sin()).raw())
}

pub fn build_lut() -> TwiddleLut {
    let entries = (0..LUT_ENTRIES as u64)
        .map(|j| quantize_root(j, LUT_POINTS as u64))
        .collect();
    TwiddleLut { entries }
}

// -i * (re, im) = (im, -re)
fn rot_neg_i(w: DataWord) -> DataWord {
    DataWord::new(w.im(), w.re().saturating_neg())
}

impl TwiddleLut {
    /// Process-wide ROM instance.
    pub fn shared() -> &'static TwiddleLut {
        static LUT: OnceLock<TwiddleLut> = OnceLock::new();
        LUT.get_or_init(build_lut)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entry(&self, j: usize) -> DataWord {
        self.entries[j]
    }

    pub fn entries(&self) -> &[DataWord] {
        &self.entries
    }

    /// `W_N^p` rebuilt from the octant table.
    pub fn lookup(&self, p: u32, n_points: usize) -> Result<DataWord, ContractError> {
        if n_points == 0 || n_points > LUT_POINTS || !LUT_POINTS.is_multiple_of(n_points) {
            return Err(ContractError::UnsupportedSize(n_points));
        }
        if p as usize >= n_points {
            return Err(ContractError::ExponentOutOfRange { p, n: n_points });
        }
        let scaled = p * (LUT_POINTS / n_points) as u32;
        Ok(self.lookup_scaled(scaled))
    }

    pub fn lookup_request(&self, req: TwiddleRequest) -> Result<DataWord, ContractError> {
        self.lookup(req.exponent, req.n_points)
    }

    // `scaled` is an exponent of W_16384
    fn lookup_scaled(&self, scaled: u32) -> DataWord {
        let quadrant = scaled / QUARTER;
        let r = scaled % QUARTER;
        let mut w = if r <= OCTANT {
            self.entries[r as usize]
        } else {
            // W^(M/4 - r') = -i * conj(W^r') = (-im, -re) of the stored entry
            let e = self.entries[(QUARTER - r) as usize];
            DataWord::new(e.im().saturating_neg(), e.re().saturating_neg())
        };
        for _ in 0..quadrant {
            w = rot_neg_i(w);
        }
        w
    }

    /// Write one line per entry: `index re_int im_int`.
    pub fn dump<W: Write>(&self, mut out: W) -> io::Result<()> {
        for (j, e) in self.entries.iter().enumerate() {
            writeln!(out, "{j} {} {}", e.re(), e.im())?;
        }
        Ok(())
    }
}

/// Exponent of the twiddle applied to the operand read at `counter_index`
/// of `stage`.
pub fn twiddle_exponent(plan: &FftPlan, stage: usize, counter_index: usize) -> Result<TwiddleRequest, ContractError> {
    if stage >= plan.stage_count() {
        return Err(ContractError::StageOutOfRange { stage, stages: plan.stage_count() });
    }
    if counter_index >= plan.n_points() {
        return Err(ContractError::IndexOutOfRange { index: counter_index, n: plan.n_points() });
    }
    Ok(TwiddleRequest {
        exponent: exponent_unchecked(plan, stage, counter_index),
        n_points: plan.n_points(),
    })
}

pub(crate) fn exponent_unchecked(plan: &FftPlan, stage: usize, c: usize) -> u32 {
    let n = plan.n_points();
    let p = match plan.radix(stage) {
        Radix::Four => {
            let slot = c & 3;
            let row = (c >> 2) & ((1 << (2 * stage)) - 1);
            slot * row * (n >> (2 * stage + 2))
        }
        // odd counters carry the lower-half partner of each pair
        Radix::Two => (c & 1) * (c >> 1),
    };
    p as u32
}

/// True for the final radix-2 stage of an odd-`log2 N` transform.
pub fn rx2_flag(plan: &FftPlan, stage: usize) -> Result<bool, ContractError> {
    if stage >= plan.stage_count() {
        return Err(ContractError::StageOutOfRange { stage, stages: plan.stage_count() });
    }
    Ok(plan.radix(stage) == Radix::Two)
}
