//! Frame sources and per-station queues shared by both engines.

use std::collections::VecDeque;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use super::config::{RingConfig, TrafficClass, TrafficModel};

#[derive(Debug, Clone, Copy)]
pub(crate) struct Frame {
    /// `None` for frames drawn from a saturated backlog.
    pub arrival_ns: Option<u64>,
    pub dest: usize,
}

#[derive(Debug, Default)]
pub(crate) struct ClassQueue {
    /// Destination of the infinite backlog, if any.
    pub saturated: Option<usize>,
    pub frames: VecDeque<Frame>,
}

impl ClassQueue {
    pub fn pop(&mut self) -> Option<Frame> {
        self.frames.pop_front().or_else(|| self.saturated.map(|dest| Frame { arrival_ns: None, dest }))
    }
}

#[derive(Debug, Default)]
pub(crate) struct StationQueues {
    pub sync: ClassQueue,
    pub asynch: ClassQueue,
}

impl StationQueues {
    pub fn get_mut(&mut self, class: TrafficClass) -> &mut ClassQueue {
        match class {
            TrafficClass::Sync => &mut self.sync,
            TrafficClass::Async => &mut self.asynch,
        }
    }
}

/// A Poisson source bound to one station.
#[derive(Debug)]
pub(crate) struct Source {
    pub station: usize,
    pub class: TrafficClass,
    pub dest: usize,
    pub next_ns: u64,
    gap: Exp<f64>,
}

impl Source {
    /// Draws the next arrival time after the current one.
    pub fn advance(&mut self, rng: &mut ChaCha8Rng) {
        let gap = self.gap.sample(rng).ceil().max(1.0);
        self.next_ns = self.next_ns.saturating_add(gap as u64);
    }
}

/// Probe arrivals: Poisson in time, uniform over stations.
#[derive(Debug)]
pub(crate) struct ProbeProcess {
    pub next_ns: u64,
    pub station: usize,
    gap: Exp<f64>,
    n: usize,
}

impl ProbeProcess {
    pub fn new(per_ms: f64, n: usize, rng: &mut ChaCha8Rng) -> Option<Self> {
        if per_ms <= 0.0 {
            return None;
        }
        let mut p = ProbeProcess { next_ns: 0, station: 0, gap: Exp::new(per_ms / 1e6).ok()?, n };
        p.advance(rng);
        Some(p)
    }

    pub fn advance(&mut self, rng: &mut ChaCha8Rng) {
        let gap = self.gap.sample(rng).ceil().max(1.0);
        self.next_ns = self.next_ns.saturating_add(gap as u64);
        self.station = rng.random_range(0..self.n);
    }
}

/// Builds per-station queues (with saturated backlogs) and Poisson sources.
pub(crate) fn build(
    cfg: &RingConfig,
    traffic: &TrafficModel,
    rng: &mut ChaCha8Rng,
) -> (Vec<StationQueues>, Vec<Source>) {
    let n = cfg.n_stations;
    let mut queues: Vec<StationQueues> = (0..n).map(|_| StationQueues::default()).collect();
    let mut sources = Vec::new();
    let frame_bits = cfg.frame_bytes as f64 * 8.0;
    for flow in &traffic.flows {
        for station in (0..n).filter(|&s| flow.applies_to(s)) {
            let dest = flow.dest.unwrap_or((station + 1) % n);
            if flow.saturated {
                queues[station].get_mut(flow.class).saturated = Some(dest);
            } else if flow.rate_mbps > 0.0 {
                // frames per ns
                let lambda = flow.rate_mbps * 1e6 / frame_bits / 1e9;
                let Ok(gap) = Exp::new(lambda) else { continue };
                let mut src = Source { station, class: flow.class, dest, next_ns: 0, gap };
                src.advance(rng);
                sources.push(src);
            }
        }
    }
    (queues, sources)
}
