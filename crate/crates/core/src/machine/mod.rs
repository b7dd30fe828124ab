//! Cycle-accurate model of the transport-triggered core.
//!
//! Every cycle the control unit fetches one instruction word (from
//! instruction memory or the single-entry loop buffer) and performs all of
//! its moves. Within a cycle, results that are due become visible first,
//! then every move reads its source, then operand writes land, and only
//! then do trigger writes start their operations. A same-cycle operand is
//! therefore seen by the trigger. While the data memory resolves a bank
//! conflict the whole core is locked and the pipeline clock stands still.

mod config;
mod memory;
mod stats;
mod units;

pub use config::{Latencies, MachineConfig, CADD_FILL};
pub use memory::{
    block_of, DataMemory, MemOp, MemRequest, MemResponse, ADDRESS_SPACE, BANKS, BANK_ROWS, BLOCKS, BLOCK_ROWS,
};
pub use stats::RunStats;
pub use units::NULL_ADDRESS;

use std::collections::HashSet;

use thiserror::Error;

use crate::addrgen::{input_address, FftPlan};
use crate::arch::{Dest, InPort, OutPort, Source, Unit, RF_SIZE};
use crate::error::ContractError;
use crate::golden::SampleVector;
use crate::program::{gen_fft_program_with, InstructionWord, Program, ProgramError};
use crate::qformat::{cmul, DataWord};

use units::{address_of, twiddle_of, CaddUnit, CounterDecoder, LsuUnit, PendingLoad, Pipe};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MachineError {
    #[error("cycle {cycle}: more than one move writes {dest}")]
    StructuralHazard { cycle: u64, dest: String },
    #[error("data address {addr:#x} outside memory")]
    AddressFault { addr: u64 },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("cycle {cycle}: {unit} triggered before its operand was configured")]
    Unconfigured { cycle: u64, unit: &'static str },
    #[error("cycle {cycle}: load result due before the memory served it")]
    LoadNotServed { cycle: u64 },
    #[error("no halt within {0} cycles")]
    Timeout(u64),
    #[error(transparent)]
    Program(#[from] ProgramError),
    #[error(transparent)]
    Contract(#[from] ContractError),
}

#[derive(Debug, Clone)]
struct LoopState {
    start: usize,
    remaining: u64,
    word: InstructionWord,
}

#[derive(Debug, Clone, Default)]
struct Core {
    add_o: u32,
    add: Pipe,
    ag_cfg: CounterDecoder,
    ag: Pipe,
    tfg_cfg: CounterDecoder,
    tfg: Pipe,
    tfg_rx2: Pipe,
    dly: Pipe,
    cmul_o: u32,
    cmul: Pipe,
    cadd: CaddUnit,
    lsu: [LsuUnit; 2],
    sh_o: u32,
    sh: Pipe,
    gcu_o: u32,
    rf: [u32; RF_SIZE],
    rf_pending: Vec<(u64, u8, u32)>,
}

pub struct Machine {
    cfg: MachineConfig,
    imem: Vec<InstructionWord>,
    pc: usize,
    halted: bool,
    looping: Option<LoopState>,
    core: Core,
    mem: DataMemory,
    stats: RunStats,
    trace: Vec<String>,
    /// Pipeline clock: advances on productive cycles only.
    now: u64,
    next_tag: u64,
}

impl Machine {
    pub fn new(cfg: MachineConfig) -> Machine {
        let mem = DataMemory::new(cfg.scheduler);
        Machine {
            cfg,
            imem: Vec::new(),
            pc: 0,
            halted: false,
            looping: None,
            core: Core::default(),
            mem,
            stats: RunStats::default(),
            trace: Vec::new(),
            now: 0,
            next_tag: 0,
        }
    }

    pub fn config(&self) -> &MachineConfig {
        &self.cfg
    }

    /// Clear registers, pipelines, memory, counters and the program counter.
    /// The loaded program is kept.
    pub fn reset(&mut self) {
        self.pc = 0;
        self.halted = false;
        self.looping = None;
        self.core = Core::default();
        self.mem = DataMemory::new(self.cfg.scheduler);
        self.stats = RunStats::default();
        self.trace.clear();
        self.now = 0;
        self.next_tag = 0;
    }

    pub fn load_program(&mut self, program: &Program) {
        self.imem = program.words.clone();
        self.pc = 0;
        self.halted = false;
        self.looping = None;
    }

    pub fn memory(&self) -> &DataMemory {
        &self.mem
    }

    pub fn memory_mut(&mut self) -> &mut DataMemory {
        &mut self.mem
    }

    /// Issue a batch of requests straight to the banks and drain them.
    pub fn memory_access(&mut self, requests: &[MemRequest]) -> Result<(Vec<MemResponse>, u32), MachineError> {
        self.mem.access(requests)
    }

    pub fn is_halted(&self) -> bool {
        self.halted
    }

    pub fn is_finished(&self) -> bool {
        self.halted && self.mem.is_idle()
    }

    pub fn stats(&self) -> RunStats {
        let mut s = self.stats.clone();
        s.block_accesses = self.mem.block_access;
        s.memory_reads = self.mem.reads;
        s.memory_writes = self.mem.writes;
        s
    }

    pub fn trace(&self) -> &[String] {
        &self.trace
    }

    fn route(&mut self, responses: Vec<MemResponse>) {
        for r in responses {
            if let Some(d) = r.data {
                self.core.lsu[(r.tag & 1) as usize].deliver(r.tag, d);
            }
        }
    }

    fn tick(&mut self) -> Result<(), MachineError> {
        let now = self.now;
        let c = &mut self.core;
        for p in [&mut c.add, &mut c.ag, &mut c.tfg, &mut c.tfg_rx2, &mut c.dly, &mut c.cmul, &mut c.cadd.pipe, &mut c.sh] {
            p.tick(now);
        }
        for lsu in c.lsu.iter_mut() {
            lsu.tick(now).map_err(|_| MachineError::LoadNotServed { cycle: self.stats.total_cycles })?;
        }
        let rf = &mut c.rf;
        c.rf_pending.retain(|&(ready, i, v)| {
            if ready <= now {
                rf[i as usize] = v;
                false
            } else {
                true
            }
        });
        Ok(())
    }

    fn fetch(&mut self) -> Result<Option<InstructionWord>, MachineError> {
        if let Some(lp) = self.looping.as_mut() {
            if self.pc == lp.start {
                self.stats.kernel_cycles += 1;
                let word = if self.cfg.loop_buffer {
                    self.stats.fetches_loop_buffer += 1;
                    lp.word
                } else {
                    self.stats.fetches_imem += 1;
                    self.stats.kernel_imem_fetches += 1;
                    self.imem[self.pc]
                };
                lp.remaining -= 1;
                if lp.remaining == 0 {
                    self.looping = None;
                    self.pc += 1;
                }
                return Ok(Some(word));
            }
        }
        if self.pc >= self.imem.len() {
            return Ok(None);
        }
        let w = self.imem[self.pc];
        self.stats.fetches_imem += 1;
        self.pc += 1;
        Ok(Some(w))
    }

    fn read(&mut self, src: Source) -> u32 {
        let c = &self.core;
        match src {
            Source::Imm(v) => v as u32,
            Source::Rf(i) => {
                self.stats.rf_reads += 1;
                c.rf[i as usize]
            }
            Source::Port(u, OutPort::Rx2) => {
                debug_assert_eq!(u, Unit::Tfg);
                c.tfg_rx2.out
            }
            Source::Port(u, OutPort::R) => match u {
                Unit::Add => c.add.out,
                Unit::Ag => c.ag.out,
                Unit::Tfg => c.tfg.out,
                Unit::Dly => c.dly.out,
                Unit::Cmul => c.cmul.out,
                Unit::Cadd => c.cadd.pipe.out,
                Unit::Lsu0 => c.lsu[0].out,
                Unit::Lsu1 => c.lsu[1].out,
                Unit::Sh => c.sh.out,
                Unit::Gcu => 0,
            },
        }
    }

    fn write_operand(&mut self, dst: Dest, v: u32) {
        let c = &mut self.core;
        match dst {
            Dest::Rf(i) => {
                self.stats.rf_writes += 1;
                c.rf_pending.push((self.now + 1, i, v));
            }
            Dest::Port(u, port) => match (u, port) {
                (Unit::Add, InPort::O) => c.add_o = v,
                (Unit::Ag, InPort::O) => c.ag_cfg.set(v),
                (Unit::Tfg, InPort::O) => c.tfg_cfg.set(v),
                (Unit::Cmul, InPort::O) => c.cmul_o = v,
                (Unit::Cadd, InPort::Rx2) => c.cadd.rx2_in = v & 1 != 0,
                (Unit::Lsu0, InPort::O) => c.lsu[0].o = v,
                (Unit::Lsu1, InPort::O) => c.lsu[1].o = v,
                (Unit::Sh, InPort::O) => c.sh_o = v,
                (Unit::Gcu, InPort::O) => c.gcu_o = v,
                _ => unreachable!("operand port {dst}"),
            },
        }
    }

    fn mem_address(v: u32) -> Result<Option<usize>, MachineError> {
        if v == NULL_ADDRESS {
            return Ok(None);
        }
        if v as usize >= ADDRESS_SPACE {
            return Err(MachineError::AddressFault { addr: v as u64 });
        }
        Ok(Some(v as usize))
    }

    fn trigger(&mut self, unit: Unit, port: InPort, v: u32, requests: &mut Vec<MemRequest>) -> Result<(), MachineError> {
        self.stats.triggers[unit.index()] += 1;
        let now = self.now;
        let lat = self.cfg.latencies;
        let cycle = self.stats.total_cycles;
        let c = &mut self.core;
        match unit {
            Unit::Add => c.add.push(now + lat.add as u64, v.wrapping_add(c.add_o)),
            Unit::Ag => {
                if c.ag_cfg.plan.is_none() {
                    return Err(MachineError::Unconfigured { cycle, unit: "AG" });
                }
                c.ag.push(now + lat.ag as u64, address_of(&c.ag_cfg, v));
            }
            Unit::Tfg => {
                if c.tfg_cfg.plan.is_none() {
                    return Err(MachineError::Unconfigured { cycle, unit: "TFG" });
                }
                let (w, rx2) = twiddle_of(&c.tfg_cfg, v);
                c.tfg.push(now + lat.tfg as u64, w);
                c.tfg_rx2.push(now + lat.tfg_rx2 as u64, rx2 as u32);
            }
            Unit::Dly => c.dly.push(now + lat.dly as u64, v),
            Unit::Cmul => c.cmul.push(now + lat.cmul as u64, cmul(DataWord(v), DataWord(c.cmul_o)).bits()),
            Unit::Cadd => c.cadd.trigger(now, v),
            Unit::Sh => c.sh.push(now + lat.sh as u64, v.checked_shl(c.sh_o).unwrap_or(0)),
            Unit::Lsu0 | Unit::Lsu1 => {
                let which = (unit == Unit::Lsu1) as usize;
                let addr = Self::mem_address(v)?;
                let tag = self.next_tag * 2 + which as u64;
                self.next_tag += 1;
                match port {
                    InPort::T => {
                        let ready = now + lat.lsu as u64;
                        c.lsu[which].loads.push_back(PendingLoad { ready, tag, data: None, null: addr.is_none() });
                        if let Some(a) = addr {
                            requests.push(MemRequest::load(a, tag));
                        }
                    }
                    InPort::St => {
                        if let Some(a) = addr {
                            requests.push(MemRequest::store(a, c.lsu[which].o, tag));
                        }
                    }
                    _ => unreachable!(),
                }
            }
            Unit::Gcu => {
                let start = c.gcu_o as usize;
                if start >= self.imem.len() {
                    return Err(MachineError::Config(format!("loop start {start} beyond program end")));
                }
                if v == 0 {
                    return Ok(());
                }
                if self.cfg.loop_buffer {
                    self.stats.fetches_imem += 1;
                    self.stats.loop_fills += 1;
                }
                self.looping = Some(LoopState { start, remaining: v as u64, word: self.imem[start] });
            }
        }
        Ok(())
    }

    fn stall(&mut self) {
        let resp = self.mem.stall_cycle();
        self.route(resp);
        self.stats.stall_cycles += 1;
        if self.cfg.trace {
            self.trace.push(format!("cycle {} | stall", self.stats.total_cycles));
        }
        self.stats.total_cycles += 1;
    }

    /// Advance one clock cycle.
    pub fn step(&mut self) -> Result<(), MachineError> {
        if self.mem.is_locked() {
            self.stall();
            return Ok(());
        }
        self.tick()?;
        let word = if self.halted { None } else { self.fetch()? };
        let Some(word) = word else {
            self.halted = true;
            let resp = self.mem.cycle(Vec::new())?;
            self.route(resp);
            self.stats.total_cycles += 1;
            self.now += 1;
            return Ok(());
        };
        let cycle = self.stats.total_cycles;
        let moves: Vec<_> = word.moves().collect();
        let mut seen = HashSet::with_capacity(moves.len());
        for (_, m) in &moves {
            if !seen.insert(m.dst) {
                return Err(MachineError::StructuralHazard { cycle, dest: m.dst.to_string() });
            }
        }
        let values: Vec<u32> = moves.iter().map(|(_, m)| self.read(m.src)).collect();
        for ((bus, m), &v) in moves.iter().zip(&values) {
            self.stats.bus_moves[bus.index()] += 1;
            if !m.dst.is_trigger() {
                self.write_operand(m.dst, v);
            }
        }
        let mut requests = Vec::with_capacity(2);
        for ((_, m), &v) in moves.iter().zip(&values) {
            if let Dest::Port(u, p) = m.dst {
                if p.is_trigger() {
                    self.trigger(u, p, v, &mut requests)?;
                }
            }
        }
        requests.sort_by_key(|r| r.tag & 1);
        let resp = self.mem.cycle(requests)?;
        self.route(resp);
        if self.cfg.trace {
            let line = if moves.is_empty() {
                "nop".to_string()
            } else {
                moves.iter().map(|(b, m)| format!("bus {b}: {m}")).collect::<Vec<_>>().join(" | ")
            };
            self.trace.push(format!("cycle {cycle} | {line}"));
        }
        self.stats.total_cycles += 1;
        self.now += 1;
        if self.looping.is_none() && self.pc >= self.imem.len() {
            self.halted = true;
        }
        Ok(())
    }

    /// Step until the program has halted and the memory system is idle.
    pub fn run(&mut self) -> Result<RunStats, MachineError> {
        while !self.is_finished() {
            if self.stats.total_cycles >= self.cfg.cycle_limit {
                return Err(MachineError::Timeout(self.cfg.cycle_limit));
            }
            self.step()?;
        }
        Ok(self.stats())
    }

    /// Place natural-order samples at their transform input addresses.
    pub fn load_samples(&mut self, plan: &FftPlan, x: &SampleVector) -> Result<(), MachineError> {
        if x.len() != plan.n_points() {
            return Err(ContractError::LengthMismatch { got: x.len(), want: plan.n_points() }.into());
        }
        for (n, w) in x.as_slice().iter().enumerate() {
            self.mem.poke(input_address(plan, n), w.bits())?;
        }
        Ok(())
    }

    /// Words at addresses `0..n`, which hold the spectrum in natural order.
    pub fn read_samples(&self, n: usize) -> Result<SampleVector, MachineError> {
        let data = (0..n).map(|a| self.mem.peek(a).map(DataWord)).collect::<Result<_, _>>()?;
        Ok(SampleVector::new(data))
    }

    /// Generate the FFT program for `plan`, run it on `x` and return the
    /// spectrum.
    pub fn run_fft(&mut self, plan: &FftPlan, x: &SampleVector) -> Result<(SampleVector, RunStats), MachineError> {
        let program = gen_fft_program_with(plan, &self.cfg.latencies)?;
        self.run_program_fft(&program, plan, x)
    }

    pub fn run_program_fft(
        &mut self,
        program: &Program,
        plan: &FftPlan,
        x: &SampleVector,
    ) -> Result<(SampleVector, RunStats), MachineError> {
        if program.kernel_iterations as usize != plan.total_slots() {
            return Err(MachineError::Config(format!(
                "program runs {} kernel iterations but a {}-point transform needs {}",
                program.kernel_iterations,
                plan.n_points(),
                plan.total_slots()
            )));
        }
        self.reset();
        self.load_program(program);
        self.load_samples(plan, x)?;
        let stats = self.run()?;
        Ok((self.read_samples(plan.n_points())?, stats))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::golden::fft_fixed;
    use crate::program::assemble;

    #[test]
    fn empty_program_single_step() {
        let mut m = Machine::new(MachineConfig::default());
        m.reset();
        m.step().unwrap();
        let s = m.stats();
        assert_eq!(s, RunStats { total_cycles: 1, ..RunStats::default() });
    }

    #[test]
    fn conflicting_loads_stall_once() {
        let mut m = Machine::new(MachineConfig::default());
        m.load_program(&assemble("B0: #3 -> LSU0.t | B1: #5 -> LSU1.t").unwrap());
        let s = m.run().unwrap();
        assert_eq!(s.stall_cycles, 1);
        assert_eq!(s.memory_reads, 2);
    }

    #[test]
    fn double_write_is_structural_hazard() {
        let mut m = Machine::new(MachineConfig::default());
        m.load_program(&assemble("B1: #1 -> RF.0 | B6: LSU0.r -> RF.0").unwrap());
        assert!(matches!(m.step(), Err(MachineError::StructuralHazard { cycle: 0, .. })));
    }

    #[test]
    fn out_of_range_store_faults() {
        let mut m = Machine::new(MachineConfig::default());
        m.load_program(&assemble("B1: #100 -> RF.0\nnop\nB9: RF.0 -> LSU1.st").unwrap());
        assert!(m.run().is_ok());
        m.reset();
        m.load_program(&assemble("B1: #-2 -> RF.0\nnop\nB9: RF.0 -> LSU1.st").unwrap());
        assert!(matches!(m.run(), Err(MachineError::AddressFault { .. })));
    }

    #[test]
    fn operand_visible_to_same_cycle_trigger() {
        let mut m = Machine::new(MachineConfig::default());
        let p = assemble("B0: #5 -> ADD.o | B1: #2 -> ADD.t\nnop\nB8: LSU1.r -> RF.0").unwrap();
        m.load_program(&p);
        m.run().unwrap();
        assert_eq!(m.core.add.out, 7);
    }

    #[test]
    fn trace_lines() {
        let cfg = MachineConfig { trace: true, ..MachineConfig::default() };
        let mut m = Machine::new(cfg);
        m.load_program(&assemble("B0: #3 -> LSU0.t | B1: #5 -> LSU1.t\nnop").unwrap());
        m.run().unwrap();
        assert_eq!(m.trace()[0], "cycle 0 | bus B0: #3 -> LSU0.t | bus B1: #5 -> LSU1.t");
        assert_eq!(m.trace()[1], "cycle 1 | stall");
        assert_eq!(m.trace()[2], "cycle 2 | nop");
    }

    #[test]
    fn fft_matches_golden_and_cycle_formula() {
        for n in [64, 128, 256] {
            let plan = FftPlan::new(n).unwrap();
            let x = SampleVector::random(n, 11);
            let mut m = Machine::new(MachineConfig::default());
            let (y, s) = m.run_fft(&plan, &x).unwrap();
            assert_eq!(y, fft_fixed(&plan, &x).unwrap(), "N={n}");
            assert_eq!(s.total_cycles, 32 + plan.total_slots() as u64);
            assert_eq!(s.stall_cycles, 0);
            assert_eq!(s.fetches_imem, 33);
            assert_eq!(s.kernel_imem_fetches, 0);
            assert_eq!(s.fetches_loop_buffer, plan.total_slots() as u64);
        }
    }

    #[test]
    fn kernel_iteration_mismatch_rejected() {
        let plan = FftPlan::new(64).unwrap();
        let mut prog = crate::program::gen_fft_program(&plan).unwrap();
        prog.kernel_iterations += 1;
        let mut m = Machine::new(MachineConfig::default());
        assert!(matches!(
            m.run_program_fft(&prog, &plan, &SampleVector::zeros(64)),
            Err(MachineError::Config(_))
        ));
    }
}
