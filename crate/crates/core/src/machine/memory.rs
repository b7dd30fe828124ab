//! Two-bank data memory with the load/store pairing scheduler.
//!
//! Each bank serves one access per cycle. A request's bank is the parity of
//! its address popcount and its row is `addr >> 1`. The scheduler queues
//! loads and stores separately and releases one group per cycle: two loads,
//! two stores, or a single request that found no partner in the cycle after
//! it arrived. Stores go first so written results drain as early as possible. The FFT operand order guarantees
//! that paired requests hit different banks. Whatever a bank cannot serve in
//! the issuing cycle locks the core for stall cycles until the bank queues
//! drain.

use std::collections::VecDeque;

use crate::addrgen::{bank_of, bank_offset};

use super::MachineError;

pub const BANKS: usize = 2;
pub const BANK_ROWS: usize = 8192;
pub const ADDRESS_SPACE: usize = BANKS * BANK_ROWS;
/// Rows per physical block of one bank, lowest rows first.
pub const BLOCK_ROWS: [usize; 9] = [32, 32, 64, 128, 256, 512, 1024, 2048, 4096];
pub const BLOCKS: usize = BLOCK_ROWS.len();

pub fn block_of(row: usize) -> usize {
    let mut end = 0;
    for (b, rows) in BLOCK_ROWS.iter().enumerate() {
        end += rows;
        if row < end {
            return b;
        }
    }
    BLOCKS - 1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MemOp {
    Load,
    Store(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MemRequest {
    pub addr: usize,
    pub op: MemOp,
    /// Opaque routing tag handed back in the response.
    pub tag: u64,
}

impl MemRequest {
    pub fn load(addr: usize, tag: u64) -> MemRequest {
        MemRequest { addr, op: MemOp::Load, tag }
    }

    pub fn store(addr: usize, data: u32, tag: u64) -> MemRequest {
        MemRequest { addr, op: MemOp::Store(data), tag }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MemResponse {
    pub tag: u64,
    pub addr: usize,
    /// Loaded word; `None` for stores.
    pub data: Option<u32>,
    /// Cycles after issue at which the bank served the request.
    pub delay: u32,
}

#[derive(Debug, Clone)]
pub struct DataMemory {
    banks: [Vec<u32>; BANKS],
    queues: [VecDeque<(MemRequest, u32)>; BANKS],
    // (request, arrived this cycle)
    load_q: VecDeque<(MemRequest, bool)>,
    store_q: VecDeque<(MemRequest, bool)>,
    scheduler: bool,
    pub(crate) block_access: [[u64; BLOCKS]; BANKS],
    pub(crate) reads: u64,
    pub(crate) writes: u64,
}

impl DataMemory {
    pub fn new(scheduler: bool) -> DataMemory {
        DataMemory {
            banks: [vec![0; BANK_ROWS], vec![0; BANK_ROWS]],
            queues: [VecDeque::new(), VecDeque::new()],
            load_q: VecDeque::new(),
            store_q: VecDeque::new(),
            scheduler,
            block_access: [[0; BLOCKS]; BANKS],
            reads: 0,
            writes: 0,
        }
    }

    fn check(addr: usize) -> Result<(), MachineError> {
        if addr >= ADDRESS_SPACE {
            return Err(MachineError::AddressFault { addr: addr as u64 });
        }
        Ok(())
    }

    /// Untimed, uncounted read for loading and inspecting memory images.
    pub fn peek(&self, addr: usize) -> Result<u32, MachineError> {
        Self::check(addr)?;
        Ok(self.banks[bank_of(addr)][bank_offset(addr)])
    }

    pub fn poke(&mut self, addr: usize, value: u32) -> Result<(), MachineError> {
        Self::check(addr)?;
        self.banks[bank_of(addr)][bank_offset(addr)] = value;
        Ok(())
    }

    pub fn clear_counters(&mut self) {
        self.block_access = [[0; BLOCKS]; BANKS];
        self.reads = 0;
        self.writes = 0;
    }

    /// True while leftover requests lock the core.
    pub fn is_locked(&self) -> bool {
        self.queues.iter().any(|q| !q.is_empty())
    }

    /// True while the scheduler still holds back a request.
    pub fn has_buffered(&self) -> bool {
        !self.load_q.is_empty() || !self.store_q.is_empty()
    }

    pub fn is_idle(&self) -> bool {
        !self.is_locked() && !self.has_buffered()
    }

    fn serve(&mut self, req: MemRequest, delay: u32) -> MemResponse {
        let (bank, row) = (bank_of(req.addr), bank_offset(req.addr));
        self.block_access[bank][block_of(row)] += 1;
        let data = match req.op {
            MemOp::Load => {
                self.reads += 1;
                Some(self.banks[bank][row])
            }
            MemOp::Store(v) => {
                self.writes += 1;
                self.banks[bank][row] = v;
                None
            }
        };
        MemResponse { tag: req.tag, addr: req.addr, data, delay }
    }

    fn serve_heads(&mut self, out: &mut Vec<MemResponse>) {
        for bank in 0..BANKS {
            if let Some((req, delay)) = self.queues[bank].pop_front() {
                out.push(self.serve(req, delay));
            }
            for entry in self.queues[bank].iter_mut() {
                entry.1 += 1;
            }
        }
    }

    /// Size of the releasable group at the head of `q`.
    fn group(q: &VecDeque<(MemRequest, bool)>) -> Option<usize> {
        match q.len() {
            0 => None,
            1 if q[0].1 => None,
            1 => Some(1),
            _ => Some(2),
        }
    }

    fn schedule(&mut self, requests: Vec<MemRequest>) -> Vec<MemRequest> {
        for r in requests {
            let q = if r.op == MemOp::Load { &mut self.load_q } else { &mut self.store_q };
            q.push_back((r, true));
        }
        let pick = match (Self::group(&self.store_q), Self::group(&self.load_q)) {
            (Some(n), _) => Some((&mut self.store_q, n)),
            (None, Some(n)) => Some((&mut self.load_q, n)),
            (None, None) => None,
        };
        let mut issue = Vec::with_capacity(2);
        if let Some((q, n)) = pick {
            issue.extend(q.drain(..n).map(|(r, _)| r));
        }
        for q in [&mut self.load_q, &mut self.store_q] {
            for e in q.iter_mut() {
                e.1 = false;
            }
        }
        issue
    }

    /// One pipeline cycle: accept this cycle's requests, issue what the
    /// scheduler releases and serve one access per bank.
    pub fn cycle(&mut self, requests: Vec<MemRequest>) -> Result<Vec<MemResponse>, MachineError> {
        for r in &requests {
            Self::check(r.addr)?;
        }
        let issue = if self.scheduler { self.schedule(requests) } else { requests };
        for r in issue {
            self.queues[bank_of(r.addr)].push_back((r, 0));
        }
        let mut out = Vec::new();
        self.serve_heads(&mut out);
        Ok(out)
    }

    /// One stall cycle: each bank serves its oldest leftover request.
    pub fn stall_cycle(&mut self) -> Vec<MemResponse> {
        let mut out = Vec::new();
        self.serve_heads(&mut out);
        out
    }

    /// Issue a batch at once, bypassing the scheduler, and drain it.
    /// Returns the responses and the number of stall cycles it cost.
    pub fn access(&mut self, requests: &[MemRequest]) -> Result<(Vec<MemResponse>, u32), MachineError> {
        let saved = self.scheduler;
        self.scheduler = false;
        let first = self.cycle(requests.to_vec());
        self.scheduler = saved;
        let mut out = first?;
        let mut stalls = 0;
        while self.is_locked() {
            out.extend(self.stall_cycle());
            stalls += 1;
        }
        Ok((out, stalls))
    }
}
