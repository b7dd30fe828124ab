//! Software-pipelined FFT program.
//!
//! The kernel is a single instruction word that streams one butterfly
//! operand per cycle through the chain ADD -> AG/TFG -> LSU0 -> CMUL ->
//! CADD -> LSU1. Each move sits at a fixed offset ("position") from the
//! cycle in which its counter value left the adder, so the prologue and
//! epilogue are the kernel with the not-yet-started and already-finished
//! positions removed.

use crate::addrgen::FftPlan;
use crate::arch::{Bus, Dest, InPort, OutPort, Source, Unit};
use crate::machine::{Latencies, CADD_FILL};

use super::{InstructionWord, Program, ProgramError, Sections};

pub const SETUP_LEN: usize = 6;
/// Prologue (and epilogue) length under the default latencies.
pub const PROLOGUE_LEN: usize = 13;
pub const LOOP_START: usize = SETUP_LEN + PROLOGUE_LEN;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScheduledMove {
    pub position: u32,
    pub bus: Bus,
    pub src: Source,
    pub dst: Dest,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KernelSchedule {
    pub moves: Vec<ScheduledMove>,
    /// Position of the final store; equals the prologue length.
    pub depth: u32,
}

fn bus(i: usize) -> Bus {
    Bus::new(i).expect("bus index")
}

impl KernelSchedule {
    /// Place the chain for the given latencies. The TFG and delay-line
    /// latencies have to line up with the data path they accompany.
    pub fn new(lat: &Latencies) -> Result<KernelSchedule, ProgramError> {
        if lat.add != 1 || lat.sh != 1 {
            return Err(ProgramError::Schedule("the counter loop needs single-cycle ADD and SH".into()));
        }
        if lat.ag == 0 || lat.lsu == 0 || lat.cmul == 0 {
            return Err(ProgramError::Schedule("latencies must be positive".into()));
        }
        let p_ag = lat.ag;
        let p_mul = p_ag + lat.lsu;
        let p_add = p_mul + lat.cmul;
        let p_st = p_add + CADD_FILL;
        let want = [("tfg", lat.tfg, p_mul), ("tfg_rx2", lat.tfg_rx2, p_add), ("dly", lat.dly, p_st - p_ag)];
        for (name, got, need) in want {
            if got != need {
                return Err(ProgramError::Schedule(format!("{name} latency {got} does not match data path ({need})")));
            }
        }
        use InPort::*;
        use OutPort::{Rx2, R};
        use Unit::*;
        let p = |u, o| Source::Port(u, o);
        let d = |u, i| Dest::Port(u, i);
        let m = |position, b, src, dst| ScheduledMove { position, bus: b, src, dst };
        let moves = vec![
            m(0, bus(1), p(Add, R), d(Add, T)),
            m(0, bus(2), p(Add, R), d(Ag, T)),
            m(0, bus(3), p(Add, R), d(Tfg, T)),
            m(p_ag, bus(0), p(Ag, R), d(Lsu0, T)),
            m(p_ag, bus(4), p(Ag, R), d(Dly, T)),
            m(p_mul, bus(5), p(Lsu0, R), d(Cmul, T)),
            m(p_mul, bus(6), p(Tfg, R), d(Cmul, O)),
            m(p_add, bus(7), p(Cmul, R), d(Cadd, T)),
            m(p_add, Bus::ONE_BIT, p(Tfg, Rx2), d(Cadd, InPort::Rx2)),
            m(p_st, bus(8), p(Cadd, R), d(Lsu1, O)),
            m(p_st, bus(9), p(Dly, R), d(Lsu1, St)),
        ];
        Ok(KernelSchedule { moves, depth: p_st })
    }

    fn word(&self, keep: impl Fn(u32) -> bool) -> InstructionWord {
        let mut w = InstructionWord::nop();
        for mv in self.moves.iter().filter(|mv| keep(mv.position)) {
            w.set(mv.bus, mv.src, mv.dst).expect("schedule uses valid connections");
        }
        w
    }
}

pub fn gen_fft_program(plan: &FftPlan) -> Result<Program, ProgramError> {
    gen_fft_program_with(plan, &Latencies::default())
}

pub fn gen_fft_program_with(plan: &FftPlan, lat: &Latencies) -> Result<Program, ProgramError> {
    let sched = KernelSchedule::new(lat)?;
    let depth = sched.depth as usize;
    let loop_start = SETUP_LEN + depth;
    let k = plan.log2n() as i32;
    let stages = plan.stage_count() as i32;

    use InPort::*;
    use Unit::*;
    let d = |u, i| Dest::Port(u, i);
    let e = |r: Result<InstructionWord, ProgramError>| r.expect("setup uses valid connections");
    let nop = InstructionWord::nop();
    let setup = [
        e(nop.with(bus(0), Source::Imm(1), d(Add, O)).and_then(|w| w.with(bus(1), Source::Imm(k), Dest::Rf(0)))),
        e(nop
            .with(bus(1), Source::Imm(stages), Dest::Rf(1))
            .and_then(|w| w.with(bus(2), Source::Rf(0), d(Ag, O)))
            .and_then(|w| w.with(bus(3), Source::Rf(0), d(Tfg, O)))),
        nop.with(bus(0), Source::Imm(loop_start as i32), d(Gcu, O))
            .map_err(|_| ProgramError::Schedule(format!("loop start {loop_start} does not fit the immediate")))?
            .with(bus(4), Source::Rf(0), d(Sh, O))?
            .with(bus(5), Source::Rf(1), d(Sh, T))?,
        // iterations = stages << log2 N
        e(nop.with(bus(5), Source::Port(Sh, OutPort::R), d(Gcu, Lb))),
        nop,
        e(nop.with(bus(1), Source::Imm(-1), d(Add, T))),
    ];
    let mut words: Vec<InstructionWord> = setup.to_vec();
    for j in 0..sched.depth {
        words.push(sched.word(|p| p <= j));
    }
    words.push(sched.word(|_| true));
    for j in 0..sched.depth {
        words.push(sched.word(|p| p > j));
    }
    Ok(Program {
        words,
        sections: Sections { setup: SETUP_LEN, prologue: depth, kernel: 1, epilogue: depth },
        kernel_iterations: plan.total_slots() as u32,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::{assemble, disassemble};

    #[test]
    fn shape_of_default_program() {
        let p = gen_fft_program(&FftPlan::new(1024).unwrap()).unwrap();
        assert_eq!(p.len(), 33);
        assert_eq!(p.kernel_iterations, 5120);
        assert_eq!(p.kernel_words()[0].occupancy(), 11);
        assert_eq!(LOOP_START, 19);
        assert_eq!(p.sections.prologue, PROLOGUE_LEN);
        for w in &p.words {
            let bits = w.encode().unwrap();
            assert_eq!(InstructionWord::decode(bits).unwrap(), *w);
        }
        assert_eq!(assemble(&disassemble(&p)).unwrap(), p);
    }

    #[test]
    fn prologue_and_epilogue_partition_the_kernel() {
        let p = gen_fft_program(&FftPlan::new(64).unwrap()).unwrap();
        for j in 0..PROLOGUE_LEN {
            let pro = p.words[SETUP_LEN + j].occupancy();
            let epi = p.words[LOOP_START + 1 + j].occupancy();
            assert_eq!(pro + epi, 11);
        }
        assert_eq!(p.words.last().unwrap().occupancy(), 2);
    }

    #[test]
    fn inconsistent_latencies_rejected() {
        let lat = Latencies { cmul: 5, ..Latencies::default() };
        assert!(matches!(
            gen_fft_program_with(&FftPlan::new(64).unwrap(), &lat),
            Err(ProgramError::Schedule(_))
        ));
        let lat = Latencies { cmul: 5, tfg_rx2: 10, dly: 13, ..Latencies::default() };
        let p = gen_fft_program_with(&FftPlan::new(64).unwrap(), &lat).unwrap();
        assert_eq!(p.len(), 6 + 14 + 1 + 14);
    }
}
