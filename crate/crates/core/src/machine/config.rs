/// Result latencies in cycles: a unit triggered in cycle `t` exposes its
/// result to moves in cycle `t + latency`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Latencies {
    pub add: u32,
    pub ag: u32,
    pub sh: u32,
    pub lsu: u32,
    pub cmul: u32,
    /// TFG twiddle output.
    pub tfg: u32,
    /// TFG radix-2 flag output, delayed to meet the complex adder.
    pub tfg_rx2: u32,
    /// Depth of the address delay line.
    pub dly: u32,
}

/// Samples the complex adder collects before emitting results.
pub const CADD_FILL: u32 = 4;

impl Default for Latencies {
    fn default() -> Latencies {
        let (ag, lsu, cmul) = (1, 4, 4);
        Latencies {
            add: 1,
            ag,
            sh: 1,
            lsu,
            cmul,
            tfg: ag + lsu,
            tfg_rx2: ag + lsu + cmul,
            dly: lsu + cmul + CADD_FILL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MachineConfig {
    pub latencies: Latencies,
    /// Pair loads and stores so that conflict-free accesses issue together.
    pub scheduler: bool,
    /// Execute the kernel from the loop buffer instead of instruction memory.
    pub loop_buffer: bool,
    /// Record a textual trace of every cycle.
    pub trace: bool,
    /// Abort a run after this many cycles.
    pub cycle_limit: u64,
}

impl Default for MachineConfig {
    fn default() -> MachineConfig {
        MachineConfig {
            latencies: Latencies::default(),
            scheduler: true,
            loop_buffer: true,
            trace: false,
            cycle_limit: 10_000_000,
        }
    }
}
