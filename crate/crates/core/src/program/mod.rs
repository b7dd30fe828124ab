//! Move instructions, 51-bit instruction words, the assembler and the FFT
//! program generator.

mod asm;
mod binfile;
mod fftgen;

pub use asm::{assemble, disassemble};
pub use binfile::{read_binary, write_binary, BINARY_MAGIC, BINARY_VERSION};
pub use fftgen::{gen_fft_program, gen_fft_program_with, KernelSchedule, LOOP_START, PROLOGUE_LEN, SETUP_LEN};

use std::fmt;

use thiserror::Error;

use crate::arch::{bus_spec, topology, Bus, Dest, Source, BUS_COUNT, INSTRUCTION_BITS};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProgramError {
    #[error("line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("line {line}: bus {bus} has no connection {src} -> {dst}")]
    Connectivity { line: usize, bus: String, src: String, dst: String },
    #[error("encoding error: {0}")]
    Encoding(String),
    #[error("decoding error: {0}")]
    Decoding(String),
    #[error("unsupported transform size {0}")]
    UnsupportedSize(usize),
    #[error("invalid binary program: {0}")]
    BadBinary(String),
    #[error("schedule error: {0}")]
    Schedule(String),
}

/// One data transport; the bus is the slot it occupies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Move {
    pub src: Source,
    pub dst: Dest,
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.src, self.dst)
    }
}

/// One move slot per bus; `None` is a NOP on that bus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct InstructionWord {
    slots: [Option<Move>; BUS_COUNT],
}

impl InstructionWord {
    pub fn nop() -> InstructionWord {
        InstructionWord::default()
    }

    /// Place a move on `bus`, checking it against the bus connections.
    pub fn set(&mut self, bus: Bus, src: Source, dst: Dest) -> Result<(), ProgramError> {
        let spec = bus_spec(bus);
        if spec.find(src, dst).is_none() {
            return Err(ProgramError::Encoding(format!("bus {bus} has no connection {src} -> {dst}")));
        }
        if let Source::Imm(v) = src {
            if !spec.imm_range().contains(&v) {
                return Err(ProgramError::Encoding(format!("immediate {v} does not fit bus {bus}")));
            }
        }
        if self.slots[bus.index()].is_some() {
            return Err(ProgramError::Encoding(format!("bus {bus} already carries a move")));
        }
        self.slots[bus.index()] = Some(Move { src, dst });
        Ok(())
    }

    pub fn with(mut self, bus: Bus, src: Source, dst: Dest) -> Result<InstructionWord, ProgramError> {
        self.set(bus, src, dst)?;
        Ok(self)
    }

    pub fn slot(&self, bus: Bus) -> Option<Move> {
        self.slots[bus.index()]
    }

    pub fn moves(&self) -> impl Iterator<Item = (Bus, Move)> + '_ {
        Bus::all().filter_map(|b| self.slots[b.index()].map(|m| (b, m)))
    }

    pub fn occupancy(&self) -> usize {
        self.slots.iter().filter(|s| s.is_some()).count()
    }

    pub fn is_nop(&self) -> bool {
        self.occupancy() == 0
    }

    /// Pack into the low 51 bits: B0's slot first, each slot a connection
    /// selector (0 = NOP) followed by its immediate field.
    pub fn encode(&self) -> Result<u64, ProgramError> {
        let mut bits = 0u64;
        let mut offset = 0;
        for spec in topology() {
            let code = match self.slots[spec.bus.index()] {
                None => 0u64,
                Some(m) => {
                    let idx = spec.find(m.src, m.dst).ok_or_else(|| {
                        ProgramError::Encoding(format!("bus {} cannot carry {m}", spec.bus))
                    })?;
                    let mut code = idx as u64 + 1;
                    if let Source::Imm(v) = m.src {
                        if !spec.imm_range().contains(&v) {
                            return Err(ProgramError::Encoding(format!("immediate {v} overflows bus {}", spec.bus)));
                        }
                        let mask = (1u64 << spec.imm_bits) - 1;
                        code |= ((v as i64 as u64) & mask) << spec.select_bits();
                    }
                    code
                }
            };
            bits |= code << offset;
            offset += spec.slot_bits();
        }
        debug_assert!(offset <= INSTRUCTION_BITS);
        Ok(bits)
    }

    pub fn decode(bits: u64) -> Result<InstructionWord, ProgramError> {
        if bits >> INSTRUCTION_BITS != 0 {
            return Err(ProgramError::Decoding(format!("{bits:#x} is wider than {INSTRUCTION_BITS} bits")));
        }
        let mut word = InstructionWord::nop();
        let mut offset = 0;
        for spec in topology() {
            let slot = (bits >> offset) & ((1u64 << spec.slot_bits()) - 1);
            offset += spec.slot_bits();
            let sel = (slot & ((1u64 << spec.select_bits()) - 1)) as usize;
            let imm_raw = slot >> spec.select_bits();
            if sel == 0 {
                if imm_raw != 0 {
                    return Err(ProgramError::Decoding(format!("NOP on bus {} with immediate bits", spec.bus)));
                }
                continue;
            }
            let conn = spec.connections.get(sel - 1).ok_or_else(|| {
                ProgramError::Decoding(format!("selector {sel} out of range on bus {}", spec.bus))
            })?;
            let src = match conn.src {
                crate::arch::SourceSel::Port(u, p) => Source::Port(u, p),
                crate::arch::SourceSel::Rf(i) => Source::Rf(i),
                crate::arch::SourceSel::Imm => {
                    let shift = 64 - spec.imm_bits;
                    Source::Imm((((imm_raw << shift) as i64) >> shift) as i32)
                }
            };
            if !matches!(conn.src, crate::arch::SourceSel::Imm) && imm_raw != 0 {
                return Err(ProgramError::Decoding(format!("stray immediate bits on bus {}", spec.bus)));
            }
            word.slots[spec.bus.index()] = Some(Move { src, dst: conn.dst });
        }
        if bits >> offset != 0 {
            return Err(ProgramError::Decoding("nonzero padding bits".into()));
        }
        Ok(word)
    }
}

impl fmt::Display for InstructionWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_nop() {
            return write!(f, "nop");
        }
        let parts: Vec<String> = self.moves().map(|(b, m)| format!("{b}: {m}")).collect();
        write!(f, "{}", parts.join(" | "))
    }
}

/// Word counts of the program phases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Sections {
    pub setup: usize,
    pub prologue: usize,
    pub kernel: usize,
    pub epilogue: usize,
}

impl Sections {
    pub fn total(&self) -> usize {
        self.setup + self.prologue + self.kernel + self.epilogue
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub words: Vec<InstructionWord>,
    pub sections: Sections,
    /// Number of times the kernel word runs.
    pub kernel_iterations: u32,
}

impl Program {
    /// A program with no phase structure: every word counts as setup.
    pub fn flat(words: Vec<InstructionWord>) -> Program {
        let sections = Sections { setup: words.len(), ..Sections::default() };
        Program { words, sections, kernel_iterations: 0 }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn kernel_words(&self) -> &[InstructionWord] {
        let start = self.sections.setup + self.sections.prologue;
        &self.words[start..start + self.sections.kernel]
    }

    pub fn encode(&self) -> Result<Vec<u64>, ProgramError> {
        self.words.iter().map(InstructionWord::encode).collect()
    }
}
