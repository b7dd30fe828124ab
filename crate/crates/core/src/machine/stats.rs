use crate::arch::{Unit, BUS_COUNT};

use super::memory::{BANKS, BLOCKS};

/// Activity counters of one run; the energy model consumes these.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunStats {
    pub total_cycles: u64,
    pub stall_cycles: u64,
    pub fetches_imem: u64,
    pub fetches_loop_buffer: u64,
    pub loop_fills: u64,
    /// Cycles spent executing the loop body.
    pub kernel_cycles: u64,
    /// Loop-body cycles whose word came from instruction memory.
    pub kernel_imem_fetches: u64,
    pub block_accesses: [[u64; BLOCKS]; BANKS],
    pub memory_reads: u64,
    pub memory_writes: u64,
    pub triggers: [u64; Unit::ALL.len()],
    pub rf_reads: u64,
    pub rf_writes: u64,
    pub bus_moves: [u64; BUS_COUNT],
}

impl RunStats {
    pub fn productive_cycles(&self) -> u64 {
        self.total_cycles - self.stall_cycles
    }

    pub fn triggers_of(&self, unit: Unit) -> u64 {
        self.triggers[unit.index()]
    }

    pub fn total_moves(&self) -> u64 {
        self.bus_moves.iter().sum()
    }

    pub fn total_block_accesses(&self) -> u64 {
        self.block_accesses.iter().flatten().sum()
    }

    /// Accesses to block `b` summed over both banks.
    pub fn block_total(&self, b: usize) -> u64 {
        self.block_accesses.iter().map(|bank| bank[b]).sum()
    }
}
