//! Processor topology: functional units, their ports, the eleven buses and
//! which socket connections exist on each bus.
//!
//! The connection table is the single source of truth for both the
//! assembler (which rejects unconnected moves) and the instruction encoding
//! (whose per-bus field widths are derived from it).

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Unit {
    Add,
    Ag,
    Tfg,
    Dly,
    Cmul,
    Cadd,
    Lsu0,
    Lsu1,
    Sh,
    Gcu,
}

impl Unit {
    pub const ALL: [Unit; 10] = [
        Unit::Add,
        Unit::Ag,
        Unit::Tfg,
        Unit::Dly,
        Unit::Cmul,
        Unit::Cadd,
        Unit::Lsu0,
        Unit::Lsu1,
        Unit::Sh,
        Unit::Gcu,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Unit::Add => "ADD",
            Unit::Ag => "AG",
            Unit::Tfg => "TFG",
            Unit::Dly => "DLY",
            Unit::Cmul => "CMUL",
            Unit::Cadd => "CADD",
            Unit::Lsu0 => "LSU0",
            Unit::Lsu1 => "LSU1",
            Unit::Sh => "SH",
            Unit::Gcu => "GCU",
        }
    }

    pub fn index(self) -> usize {
        Unit::ALL.iter().position(|u| *u == self).unwrap()
    }

    fn from_name(s: &str) -> Option<Unit> {
        Unit::ALL.iter().copied().find(|u| u.name() == s)
    }

    pub fn has_output(self, port: OutPort) -> bool {
        match port {
            OutPort::R => self != Unit::Gcu,
            OutPort::Rx2 => self == Unit::Tfg,
        }
    }

    pub fn has_input(self, port: InPort) -> bool {
        use InPort::*;
        match self {
            Unit::Add | Unit::Ag | Unit::Tfg | Unit::Cmul | Unit::Sh => matches!(port, T | O),
            Unit::Dly => port == T,
            Unit::Cadd => matches!(port, T | Rx2),
            Unit::Lsu0 | Unit::Lsu1 => matches!(port, T | St | O),
            Unit::Gcu => matches!(port, O | Lb),
        }
    }
}

/// Result-side ports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OutPort {
    R,
    Rx2,
}

/// Input-side ports. `T`, `St` and `Lb` trigger; `O` and `Rx2` do not.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InPort {
    T,
    O,
    St,
    Rx2,
    Lb,
}

impl InPort {
    pub fn is_trigger(self) -> bool {
        matches!(self, InPort::T | InPort::St | InPort::Lb)
    }
}

pub const RF_SIZE: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Source {
    Port(Unit, OutPort),
    Rf(u8),
    Imm(i32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dest {
    Port(Unit, InPort),
    Rf(u8),
}

impl Source {
    pub fn width(self) -> u32 {
        match self {
            Source::Port(_, OutPort::Rx2) => 1,
            _ => 32,
        }
    }
}

impl Dest {
    pub fn width(self) -> u32 {
        match self {
            Dest::Port(_, InPort::Rx2) => 1,
            _ => 32,
        }
    }

    pub fn is_trigger(self) -> bool {
        matches!(self, Dest::Port(_, p) if p.is_trigger())
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Port(u, OutPort::R) => write!(f, "{}.r", u.name()),
            Source::Port(u, OutPort::Rx2) => write!(f, "{}.rx2", u.name()),
            Source::Rf(i) => write!(f, "RF.{i}"),
            Source::Imm(v) => write!(f, "#{v}"),
        }
    }
}

impl fmt::Display for Dest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dest::Port(u, p) => {
                let p = match p {
                    InPort::T => "t",
                    InPort::O => "o",
                    InPort::St => "st",
                    InPort::Rx2 => "rx2",
                    InPort::Lb => "lb",
                };
                write!(f, "{}.{p}", u.name())
            }
            Dest::Rf(i) => write!(f, "RF.{i}"),
        }
    }
}

/// Why a socket name failed to resolve.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PortError {
    Malformed(String),
    UnknownUnit(String),
    UnknownPort(String),
}

impl fmt::Display for PortError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PortError::Malformed(s) => write!(f, "malformed socket `{s}`"),
            PortError::UnknownUnit(s) => write!(f, "unknown unit in `{s}`"),
            PortError::UnknownPort(s) => write!(f, "unknown port `{s}`"),
        }
    }
}

fn split_socket(s: &str) -> Result<(&str, &str), PortError> {
    s.split_once('.').ok_or_else(|| PortError::Malformed(s.to_string()))
}

fn parse_rf(idx: &str, whole: &str) -> Result<u8, PortError> {
    match idx.parse::<u8>() {
        Ok(i) if (i as usize) < RF_SIZE => Ok(i),
        _ => Err(PortError::UnknownPort(whole.to_string())),
    }
}

impl FromStr for Source {
    type Err = PortError;
    fn from_str(s: &str) -> Result<Source, PortError> {
        if let Some(v) = s.strip_prefix('#') {
            return v.parse().map(Source::Imm).map_err(|_| PortError::Malformed(s.to_string()));
        }
        let (unit, port) = split_socket(s)?;
        if unit == "RF" {
            return parse_rf(port, s).map(Source::Rf);
        }
        let u = Unit::from_name(unit).ok_or_else(|| PortError::UnknownUnit(s.to_string()))?;
        let p = match port {
            "r" => OutPort::R,
            "rx2" => OutPort::Rx2,
            _ => return Err(PortError::UnknownPort(s.to_string())),
        };
        if !u.has_output(p) {
            return Err(PortError::UnknownPort(s.to_string()));
        }
        Ok(Source::Port(u, p))
    }
}

impl FromStr for Dest {
    type Err = PortError;
    fn from_str(s: &str) -> Result<Dest, PortError> {
        let (unit, port) = split_socket(s)?;
        if unit == "RF" {
            return parse_rf(port, s).map(Dest::Rf);
        }
        let u = Unit::from_name(unit).ok_or_else(|| PortError::UnknownUnit(s.to_string()))?;
        let p = match port {
            "t" => InPort::T,
            "o" => InPort::O,
            "st" => InPort::St,
            "rx2" => InPort::Rx2,
            "lb" => InPort::Lb,
            _ => return Err(PortError::UnknownPort(s.to_string())),
        };
        if !u.has_input(p) {
            return Err(PortError::UnknownPort(s.to_string()));
        }
        Ok(Dest::Port(u, p))
    }
}

pub const BUS_COUNT: usize = 11;

/// B0..B9 are the 32-bit buses, index 10 is the 1-bit bus `b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bus(u8);

impl Bus {
    pub const ONE_BIT: Bus = Bus(10);

    pub fn new(index: usize) -> Option<Bus> {
        (index < BUS_COUNT).then_some(Bus(index as u8))
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn width(self) -> u32 {
        if self == Bus::ONE_BIT {
            1
        } else {
            32
        }
    }

    pub fn all() -> impl Iterator<Item = Bus> {
        (0..BUS_COUNT as u8).map(Bus)
    }
}

impl fmt::Display for Bus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if *self == Bus::ONE_BIT {
            write!(f, "b")
        } else {
            write!(f, "B{}", self.0)
        }
    }
}

impl FromStr for Bus {
    type Err = ();
    fn from_str(s: &str) -> Result<Bus, ()> {
        if s == "b" {
            return Ok(Bus::ONE_BIT);
        }
        let i: usize = s.strip_prefix('B').ok_or(())?.parse().map_err(|_| ())?;
        if i < 10 {
            Ok(Bus(i as u8))
        } else {
            Err(())
        }
    }
}

/// Source side of a socket connection; immediates carry no value here.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceSel {
    Port(Unit, OutPort),
    Rf(u8),
    Imm,
}

impl SourceSel {
    pub fn matches(self, src: Source) -> bool {
        match (self, src) {
            (SourceSel::Port(u, p), Source::Port(v, q)) => u == v && p == q,
            (SourceSel::Rf(i), Source::Rf(j)) => i == j,
            (SourceSel::Imm, Source::Imm(_)) => true,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Connection {
    pub src: SourceSel,
    pub dst: Dest,
}

/// Connections and short-immediate width of one bus.
#[derive(Debug, Clone)]
pub struct BusSpec {
    pub bus: Bus,
    pub connections: Vec<Connection>,
    /// Signed immediate field width, 0 when the bus has no immediate.
    pub imm_bits: u32,
}

impl BusSpec {
    /// Bits selecting one connection or NOP (code 0).
    pub fn select_bits(&self) -> u32 {
        let choices = self.connections.len() as u32 + 1;
        u32::BITS - (choices - 1).leading_zeros()
    }

    pub fn slot_bits(&self) -> u32 {
        self.select_bits() + self.imm_bits
    }

    /// Signed immediate range; empty for buses without an immediate field.
    #[allow(clippy::reversed_empty_ranges)]
    pub fn imm_range(&self) -> std::ops::RangeInclusive<i32> {
        if self.imm_bits == 0 {
            return 0..=-1;
        }
        let half = 1i32 << (self.imm_bits - 1);
        -half..=half - 1
    }

    pub fn find(&self, src: Source, dst: Dest) -> Option<usize> {
        self.connections.iter().position(|c| c.dst == dst && c.src.matches(src))
    }

    pub fn reaches(&self, dst: Dest) -> bool {
        self.connections.iter().any(|c| c.dst == dst)
    }
}

pub const INSTRUCTION_BITS: u32 = 51;

fn port(u: Unit, p: OutPort) -> SourceSel {
    SourceSel::Port(u, p)
}

fn to(u: Unit, p: InPort) -> Dest {
    Dest::Port(u, p)
}

fn build_topology() -> Vec<BusSpec> {
    use InPort::*;
    use OutPort::R;
    use Unit::*;
    let c = |src, dst| Connection { src, dst };
    let rf_reads = |dst: Dest| (0..RF_SIZE as u8).map(move |i| c(SourceSel::Rf(i), dst));
    let rf_writes = |src: SourceSel| (0..RF_SIZE as u8).map(move |i| c(src, Dest::Rf(i)));

    let mut buses = Vec::with_capacity(BUS_COUNT);
    let mut push = |connections: Vec<Connection>, imm_bits| {
        let bus = Bus(buses.len() as u8);
        buses.push(BusSpec { bus, connections, imm_bits });
    };
    // B0
    push(
        vec![
            c(port(Ag, R), to(Lsu0, T)),
            c(SourceSel::Imm, to(Lsu0, T)),
            c(SourceSel::Imm, to(Add, O)),
            c(SourceSel::Imm, to(Gcu, O)),
        ],
        6,
    );
    // B1
    let mut b1 = vec![c(port(Add, R), to(Add, T)), c(SourceSel::Imm, to(Add, T))];
    b1.extend(rf_writes(SourceSel::Imm));
    b1.push(c(SourceSel::Imm, to(Lsu1, T)));
    b1.push(c(SourceSel::Imm, to(Lsu1, O)));
    push(b1, 8);
    // B2..B4
    push(std::iter::once(c(port(Add, R), to(Ag, T))).chain(rf_reads(to(Ag, O))).collect(), 0);
    push(std::iter::once(c(port(Add, R), to(Tfg, T))).chain(rf_reads(to(Tfg, O))).collect(), 0);
    push(std::iter::once(c(port(Ag, R), to(Dly, T))).chain(rf_reads(to(Sh, O))).collect(), 0);
    // B5
    let mut b5: Vec<_> = std::iter::once(c(port(Lsu0, R), to(Cmul, T))).chain(rf_reads(to(Sh, T))).collect();
    b5.push(c(port(Sh, R), to(Gcu, Lb)));
    push(b5, 0);
    // B6..B9
    push(std::iter::once(c(port(Tfg, R), to(Cmul, O))).chain(rf_writes(port(Lsu0, R))).collect(), 0);
    push(vec![c(port(Cmul, R), to(Cadd, T))], 0);
    push(std::iter::once(c(port(Cadd, R), to(Lsu1, O))).chain(rf_writes(port(Lsu1, R))).collect(), 0);
    push(std::iter::once(c(port(Dly, R), to(Lsu1, St))).chain(rf_reads(to(Lsu1, St))).collect(), 0);
    // b
    push(vec![c(port(Tfg, OutPort::Rx2), to(Cadd, Rx2))], 0);
    buses
}

/// Per-bus connection table, B0..B9 then b.
pub fn topology() -> &'static [BusSpec] {
    static TOPO: OnceLock<Vec<BusSpec>> = OnceLock::new();
    TOPO.get_or_init(build_topology)
}

pub fn bus_spec(bus: Bus) -> &'static BusSpec {
    &topology()[bus.index()]
}

/// Sum of all slot widths before padding.
pub fn used_instruction_bits() -> u32 {
    topology().iter().map(BusSpec::slot_bits).sum()
}

/// Human-readable field layout, one line per bus.
pub fn layout_table() -> String {
    let mut out = String::from("bus  select  imm  offset  connections\n");
    let mut offset = 0;
    for spec in topology() {
        out.push_str(&format!(
            "{:<4} {:>6}  {:>3}  {:>6}  {}\n",
            spec.bus.to_string(),
            spec.select_bits(),
            spec.imm_bits,
            offset,
            spec.connections.len()
        ));
        offset += spec.slot_bits();
    }
    out.push_str(&format!("total {offset} bits, padded to {INSTRUCTION_BITS}\n"));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_fits_instruction_width() {
        assert!(used_instruction_bits() <= INSTRUCTION_BITS);
        assert_eq!(topology().len(), BUS_COUNT);
    }

    #[test]
    fn one_bit_bus_only_carries_rx2() {
        let spec = bus_spec(Bus::ONE_BIT);
        for conn in &spec.connections {
            assert_eq!(conn.dst.width(), 1);
        }
        for spec in &topology()[..10] {
            assert!(spec.connections.iter().all(|c| c.dst.width() == 32));
        }
    }

    #[test]
    fn socket_names_roundtrip() {
        for s in ["ADD.r", "TFG.rx2", "RF.7", "#-5"] {
            assert_eq!(s.parse::<Source>().unwrap().to_string(), s);
        }
        for s in ["LSU1.st", "CADD.rx2", "GCU.lb", "RF.0", "AG.o"] {
            assert_eq!(s.parse::<Dest>().unwrap().to_string(), s);
        }
        assert_eq!("NOSUCH.t".parse::<Dest>(), Err(PortError::UnknownUnit("NOSUCH.t".into())));
        assert!(matches!("DLY.o".parse::<Dest>(), Err(PortError::UnknownPort(_))));
        assert!(matches!("RF.8".parse::<Source>(), Err(PortError::UnknownPort(_))));
        assert_eq!("b".parse::<Bus>(), Ok(Bus::ONE_BIT));
        assert_eq!("B9".parse::<Bus>().unwrap().to_string(), "B9");
        assert!("B10".parse::<Bus>().is_err());
    }
}
