//! Butterfly operand addressing and parity-based bank selection.
//!
//! The address generator turns a linear counter into an in-place operand
//! address by a bit-pair permutation. For a radix-4 stage `s` the two
//! counter LSBs (the operand slot) are inserted at bit `2s`; the bits they
//! displace move down two places. The final radix-2 stage of an odd-`log2 N`
//! transform instead rotates the counter LSB into the MSB.

use crate::error::ContractError;

pub const MIN_POINTS: usize = 64;
pub const MAX_POINTS: usize = 16384;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Radix {
    Four,
    Two,
}

impl Radix {
    pub fn value(self) -> usize {
        match self {
            Radix::Four => 4,
            Radix::Two => 2,
        }
    }
}

/// Transform size and stage structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FftPlan {
    n_points: usize,
    log2n: u32,
    stages: Vec<Radix>,
}

impl FftPlan {
    pub fn new(n_points: usize) -> Result<FftPlan, ContractError> {
        if !n_points.is_power_of_two() || !(MIN_POINTS..=MAX_POINTS).contains(&n_points) {
            return Err(ContractError::UnsupportedSize(n_points));
        }
        let log2n = n_points.trailing_zeros();
        let mut stages = vec![Radix::Four; (log2n / 2) as usize];
        if log2n % 2 == 1 {
            stages.push(Radix::Two);
        }
        Ok(FftPlan { n_points, log2n, stages })
    }

    /// Every supported size, smallest first.
    pub fn all() -> impl Iterator<Item = FftPlan> {
        (6..=14).map(|k| FftPlan::new(1 << k).expect("supported size"))
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn log2n(&self) -> u32 {
        self.log2n
    }

    pub fn stages(&self) -> &[Radix] {
        &self.stages
    }

    pub fn stage_count(&self) -> usize {
        self.stages.len()
    }

    pub fn butterfly_slots_per_stage(&self) -> usize {
        self.n_points / 4
    }

    pub fn radix(&self, stage: usize) -> Radix {
        self.stages[stage]
    }

    /// Counter values streamed through the datapath: one per operand slot
    /// of every stage.
    pub fn total_slots(&self) -> usize {
        self.n_points * self.stages.len()
    }

    /// Output scale relative to the exact DFT: 1/8 per radix-4 stage and
    /// 1/4 per radix-2 stage (multiplier halves, adder quarters or halves).
    pub fn output_scale(&self) -> f64 {
        self.stages
            .iter()
            .map(|r| match r {
                Radix::Four => 0.125,
                Radix::Two => 0.25,
            })
            .product()
    }

    fn check(&self, stage: usize, index: usize) -> Result<(), ContractError> {
        if stage >= self.stages.len() {
            return Err(ContractError::StageOutOfRange { stage, stages: self.stages.len() });
        }
        if index >= self.n_points {
            return Err(ContractError::IndexOutOfRange { index, n: self.n_points });
        }
        Ok(())
    }
}

/// Memory address of the operand handled at `counter_index` of `stage`.
pub fn operand_address(plan: &FftPlan, stage: usize, counter_index: usize) -> Result<usize, ContractError> {
    plan.check(stage, counter_index)?;
    Ok(permute(plan, stage, counter_index))
}

pub(crate) fn permute(plan: &FftPlan, stage: usize, c: usize) -> usize {
    match plan.stages[stage] {
        Radix::Four => {
            let pos = 2 * stage;
            let high = c & !((1usize << (pos + 2)) - 1);
            let slot = c & 3;
            let low = (c >> 2) & ((1usize << pos) - 1);
            high | (slot << pos) | low
        }
        Radix::Two => (c >> 1) | ((c & 1) << (plan.log2n - 1)),
    }
}

/// Bank holding `addr`: the parity of its set bits.
pub fn bank_of(addr: usize) -> usize {
    (addr.count_ones() & 1) as usize
}

/// Row of `addr` inside its bank.
pub fn bank_offset(addr: usize) -> usize {
    addr >> 1
}

/// Address at which natural-order input sample `n` is loaded so that the
/// in-place transform leaves its spectrum in natural order.
///
/// The address digits (stage 0 least significant) are the mixed-radix
/// digits of `n` in reverse order.
pub fn input_address(plan: &FftPlan, n: usize) -> usize {
    let mut rest = n;
    let mut addr = 0;
    let mut weight = 1;
    // n's least significant digit belongs to the last stage
    let mut digits = Vec::with_capacity(plan.stage_count());
    for r in plan.stages.iter().rev() {
        digits.push(rest % r.value());
        rest /= r.value();
    }
    for (r, d) in plan.stages.iter().zip(digits.iter().rev()) {
        addr += d * weight;
        weight *= r.value();
    }
    addr
}
