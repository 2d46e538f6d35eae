//! Timed-token engine (source stripping, one token).
//!
//! On each token arrival a station measures the rotation time since its
//! previous arrival. It may send synchronous frames up to its allocation, and
//! asynchronous frames only while the token is early, for at most the
//! earliness (T minus the measured rotation). A late token carries no
//! asynchronous traffic. A station's first visit is treated as late because
//! no rotation has been measured yet. Frames are sent whole: a frame starts
//! only if it fits in the remaining allowance.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::{RingConfig, TrafficClass, TrafficModel};
use super::metrics::{Collector, SimMetrics};
use super::traffic::{self, ProbeProcess};

/// One token visit, recorded when tracing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TokenVisit {
    pub station: usize,
    pub arrival_ns: u64,
    pub release_ns: u64,
    pub sync_frames: u64,
    pub async_frames: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Kind {
    // rank order: arrivals at the same instant are visible to the token
    FrameArrival(usize),
    Probe,
    Token,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Event {
    time: u64,
    station: usize,
    kind: Kind,
    seq: u64,
}

struct Queue {
    heap: BinaryHeap<Reverse<Event>>,
    seq: u64,
}

impl Queue {
    fn push(&mut self, time: u64, station: usize, kind: Kind) {
        self.seq += 1;
        self.heap.push(Reverse(Event { time, station, kind, seq: self.seq }));
    }

    fn pop(&mut self) -> Option<Event> {
        self.heap.pop().map(|Reverse(e)| e)
    }
}

pub(crate) fn us_to_ns(us: f64) -> u64 {
    (us * 1000.0).round().max(0.0) as u64
}

/// Cumulative token-walk position of each station, ns from station 0.
/// Entry `n` is the full ring latency.
pub(crate) fn positions(n: usize, latency_ns: u64) -> Vec<u64> {
    (0..=n).map(|i| (i as u128 * latency_ns as u128 / n as u128) as u64).collect()
}

pub(crate) fn run(
    cfg: &RingConfig,
    traffic: &TrafficModel,
    duration_us: f64,
    seed: u64,
    mut trace: Option<&mut Vec<TokenVisit>>,
) -> SimMetrics {
    let n = cfg.n_stations;
    let duration = us_to_ns(duration_us);
    let ttrt = us_to_ns(cfg.ttrt_us);
    let latency = us_to_ns(cfg.ring_latency_us);
    let ft = cfg.frame_time_ns();
    let fb = cfg.frame_bytes as u64;
    let pos = positions(n, latency);
    let walk = |from: usize, to: usize| -> u64 {
        if to > from {
            pos[to] - pos[from]
        } else {
            latency - pos[from] + pos[to]
        }
    };
    let sync_frames: Vec<u64> = (0..n).map(|i| us_to_ns(cfg.sync_allocation(i)) / ft).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut queues, mut sources) = traffic::build(cfg, traffic, &mut rng);
    let mut probes = ProbeProcess::new(traffic.probe_rate_per_ms, n, &mut rng);
    let mut pending_probes: Vec<Vec<u64>> = vec![Vec::new(); n];

    let mut q = Queue { heap: BinaryHeap::new(), seq: 0 };
    for (i, s) in sources.iter().enumerate() {
        q.push(s.next_ns, s.station, Kind::FrameArrival(i));
    }
    if let Some(p) = &probes {
        q.push(p.next_ns, p.station, Kind::Probe);
    }
    q.push(0, 0, Kind::Token);

    let mut col = Collector::default();
    let mut last_arrival: Vec<Option<u64>> = vec![None; n];
    let mut max_sync_gap: Option<u64> = None;
    let mut busy_ns: u64 = 0;
    let mut visits = 0u64;

    while let Some(ev) = q.pop() {
        if ev.time >= duration {
            break;
        }
        let now = ev.time;
        match ev.kind {
            Kind::FrameArrival(i) => {
                let s = &mut sources[i];
                queues[s.station]
                    .get_mut(s.class)
                    .frames
                    .push_back(traffic::Frame { arrival_ns: Some(now), dest: s.dest });
                s.advance(&mut rng);
                q.push(s.next_ns, s.station, Kind::FrameArrival(i));
            }
            Kind::Probe => {
                let p = probes.as_mut().expect("probe event without process");
                pending_probes[ev.station].push(now);
                p.advance(&mut rng);
                q.push(p.next_ns, p.station, Kind::Probe);
            }
            Kind::Token => {
                let st = ev.station;
                visits += 1;
                for t in pending_probes[st].drain(..) {
                    col.access.push((now - t) as f64 / 1e3);
                }
                let earliness = match last_arrival[st] {
                    Some(prev) => {
                        let trt = now - prev;
                        if cfg.sync_allocation(st) > 0.0 {
                            max_sync_gap = Some(max_sync_gap.map_or(trt, |g| g.max(trt)));
                        }
                        ttrt.saturating_sub(trt)
                    }
                    None => 0,
                };
                last_arrival[st] = Some(now);

                let mut cursor = now;
                let mut send = |class: TrafficClass, limit: u64, cursor: &mut u64, col: &mut Collector| -> u64 {
                    let queue = queues[st].get_mut(class);
                    let mut sent = 0;
                    while sent < limit {
                        let Some(frame) = queue.pop() else { break };
                        if let Some(a) = frame.arrival_ns {
                            col.delay(class, *cursor - a);
                        }
                        let start = *cursor;
                        let end = start + ft;
                        busy_ns += end.min(duration).saturating_sub(start.min(duration));
                        col.sent(class, 1, fb);
                        if end + walk(st, frame.dest) <= duration {
                            col.received(class, fb);
                        }
                        *cursor = end;
                        sent += 1;
                    }
                    sent
                };
                let s_frames = send(TrafficClass::Sync, sync_frames[st], &mut cursor, &mut col);
                let a_frames = send(TrafficClass::Async, earliness / ft, &mut cursor, &mut col);
                if let Some(t) = trace.as_deref_mut() {
                    t.push(TokenVisit {
                        station: st,
                        arrival_ns: now,
                        release_ns: cursor,
                        sync_frames: s_frames,
                        async_frames: a_frames,
                    });
                }
                let next = (st + 1) % n;
                q.push(cursor + walk(st, next), next, Kind::Token);
            }
        }
    }

    let throughput = if duration == 0 { 0.0 } else { busy_ns as f64 / duration as f64 };
    col.finish(duration_us, throughput, max_sync_gap.map(|g| g as f64 / 1e3), visits)
}
