//! Cycle-accurate model of a transport-triggered, software-programmable
//! mixed radix-4/2 FFT processor.
//!
//! The crate is layered bottom-up:
//!
//! * [`qformat`]: Q1.15 complex arithmetic of the special function units.
//! * [`addrgen`] and [`twiddle`]: operand addressing and the compressed
//!   twiddle ROM.
//! * [`golden`]: untimed fixed-point reference and floating-point oracle.
//! * [`arch`], [`machine`] and [`program`]: interconnect topology, the
//!   cycle-accurate core and its assembler and program generator.
//! * [`energy`]: activity-based energy and technology normalization.

pub mod addrgen;
pub mod arch;
pub mod energy;
pub mod error;
pub mod golden;
pub mod machine;
pub mod program;
pub mod qformat;
pub mod twiddle;

pub use addrgen::FftPlan;
pub use error::ContractError;
pub use golden::SampleVector;
pub use qformat::DataWord;
