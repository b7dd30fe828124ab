use std::collections::VecDeque;

use crate::addrgen::{permute, FftPlan, Radix};
use crate::qformat::{cadd, CaddSelector, DataWord};
use crate::twiddle::{exponent_unchecked, TwiddleLut};

/// Address token that marks a pipeline slot past the end of the transform.
/// Load-store units ignore it.
pub const NULL_ADDRESS: u32 = 0x8000_0000;

/// Fixed-latency result pipeline feeding one output register.
#[derive(Debug, Clone, Default)]
pub(crate) struct Pipe {
    queue: VecDeque<(u64, u32)>,
    pub out: u32,
}

impl Pipe {
    pub fn push(&mut self, ready: u64, value: u32) {
        let at = self.queue.partition_point(|&(r, _)| r <= ready);
        self.queue.insert(at, (ready, value));
    }

    pub fn tick(&mut self, now: u64) {
        while let Some(&(ready, v)) = self.queue.front() {
            if ready > now {
                break;
            }
            self.out = v;
            self.queue.pop_front();
        }
    }
}

/// Counter decoding shared by the address and twiddle generators: the
/// operand register holds log2 N, the trigger carries the global counter
/// `stage * N + index`.
#[derive(Debug, Clone, Default)]
pub(crate) struct CounterDecoder {
    pub plan: Option<FftPlan>,
    pub raw: u32,
}

impl CounterDecoder {
    pub fn set(&mut self, log2n: u32) {
        self.raw = log2n;
        self.plan = (log2n < usize::BITS).then(|| FftPlan::new(1usize << log2n).ok()).flatten();
    }

    /// `(plan, stage, index)`, or `None` past the last slot.
    pub fn decode(&self, counter: u32) -> Option<(&FftPlan, usize, usize)> {
        let plan = self.plan.as_ref()?;
        let c = counter as usize;
        if c >= plan.total_slots() {
            return None;
        }
        Some((plan, c >> plan.log2n(), c & (plan.n_points() - 1)))
    }
}

pub(crate) fn address_of(dec: &CounterDecoder, counter: u32) -> u32 {
    match dec.decode(counter) {
        Some((plan, stage, idx)) => permute(plan, stage, idx) as u32,
        None => NULL_ADDRESS,
    }
}

/// Twiddle word and radix-2 flag for one counter value.
pub(crate) fn twiddle_of(dec: &CounterDecoder, counter: u32) -> (u32, bool) {
    match dec.decode(counter) {
        Some((plan, stage, idx)) => {
            let p = exponent_unchecked(plan, stage, idx);
            let w = TwiddleLut::shared().lookup(p, plan.n_points()).expect("exponent below N");
            (w.bits(), plan.radix(stage) == Radix::Two)
        }
        None => (0, false),
    }
}

/// Serial complex adder: collects four operands, then emits the four
/// butterfly outputs on consecutive cycles while the next group fills.
#[derive(Debug, Clone, Default)]
pub(crate) struct CaddUnit {
    pub rx2_in: bool,
    latched_rx2: bool,
    cnt: usize,
    buf: [DataWord; 4],
    pub pipe: Pipe,
}

impl CaddUnit {
    pub fn trigger(&mut self, now: u64, v: u32) {
        if self.cnt == 0 {
            self.latched_rx2 = self.rx2_in;
        }
        self.buf[self.cnt] = DataWord(v);
        self.cnt += 1;
        if self.cnt == 4 {
            self.cnt = 0;
            let [a, b, c, d] = self.buf;
            for q in 0..4u8 {
                let r = cadd(a, b, c, d, CaddSelector::new(self.latched_rx2, q));
                self.pipe.push(now + 1 + q as u64, r.bits());
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct PendingLoad {
    pub ready: u64,
    pub tag: u64,
    pub data: Option<u32>,
    pub null: bool,
}

#[derive(Debug, Clone, Default)]
pub(crate) struct LsuUnit {
    /// Store data operand.
    pub o: u32,
    pub loads: VecDeque<PendingLoad>,
    pub out: u32,
}

impl LsuUnit {
    pub fn deliver(&mut self, tag: u64, data: u32) {
        if let Some(p) = self.loads.iter_mut().find(|p| p.tag == tag) {
            p.data = Some(data);
        }
    }

    /// Advance to `now`; `Err(tag)` if a due load was never served.
    pub fn tick(&mut self, now: u64) -> Result<(), u64> {
        while let Some(p) = self.loads.front().copied() {
            if p.ready > now {
                break;
            }
            self.out = match (p.null, p.data) {
                (true, _) => 0,
                (false, Some(d)) => d,
                (false, None) => return Err(p.tag),
            };
            self.loads.pop_front();
        }
        Ok(())
    }
}
