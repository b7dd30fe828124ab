use thiserror::Error;

/// Violated preconditions of the pure arithmetic, addressing and twiddle
/// functions.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContractError {
    #[error("unsupported transform size {0} (expected a power of two in 64..=16384)")]
    UnsupportedSize(usize),
    #[error("stage {stage} out of range (plan has {stages} stages)")]
    StageOutOfRange { stage: usize, stages: usize },
    #[error("counter index {index} out of range for {n}-point plan")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("twiddle exponent {p} out of range for {n}-point transform")]
    ExponentOutOfRange { p: u32, n: usize },
    #[error("sample vector has {got} entries, plan expects {want}")]
    LengthMismatch { got: usize, want: usize },
    #[error("reference spectrum has zero energy; SNR undefined")]
    ZeroReferenceEnergy,
}
