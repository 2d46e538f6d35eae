//! Slotted-ring engine for comparing stripping policies.
//!
//! The ring is a conveyor of fixed slots, each one frame time long, moving
//! one position per step. There are `max(n, round(D / frame_time))`
//! positions, and stations sit evenly spaced among them. A station may fill
//! any empty slot passing it. Under destination stripping the receiver
//! empties the slot, so downstream stations can reuse it. Under source
//! stripping the frame rides the full circle back to its sender, which
//! holds the medium for one transmission per slot, as with a single token.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::{RingConfig, Stripping, TrafficClass, TrafficModel};
use super::metrics::{Collector, SimMetrics};
use super::token::us_to_ns;
use super::traffic::{self, ProbeProcess};

#[derive(Debug, Clone, Copy)]
struct Slot {
    src: usize,
    dest: usize,
    class: TrafficClass,
    delivered: bool,
}

pub(crate) fn run(cfg: &RingConfig, traffic: &TrafficModel, duration_us: f64, seed: u64) -> SimMetrics {
    let n = cfg.n_stations;
    let tau = cfg.frame_time_ns();
    let fb = cfg.frame_bytes as u64;
    let duration = us_to_ns(duration_us);
    let latency = us_to_ns(cfg.ring_latency_us);
    let positions = n.max((latency as f64 / tau as f64).round() as usize);
    let station_pos: Vec<usize> = (0..n).map(|i| i * positions / n).collect();
    let steps = duration / tau;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut queues, mut sources) = traffic::build(cfg, traffic, &mut rng);
    let mut probes = ProbeProcess::new(traffic.probe_rate_per_ms, n, &mut rng);
    let mut pending_probes: Vec<Vec<u64>> = vec![Vec::new(); n];
    let mut slots: Vec<Option<Slot>> = vec![None; positions];
    let mut col = Collector::default();
    let mut frames_sent = 0u64;

    for step in 0..steps {
        let now = step * tau;
        // arrivals up to now, in (time, station) order
        loop {
            let next = sources
                .iter()
                .enumerate()
                .filter(|(_, s)| s.next_ns <= now)
                .min_by_key(|(_, s)| (s.next_ns, s.station));
            let Some((i, _)) = next else { break };
            let s = &mut sources[i];
            let frame = traffic::Frame { arrival_ns: Some(s.next_ns), dest: s.dest };
            queues[s.station].get_mut(s.class).frames.push_back(frame);
            s.advance(&mut rng);
        }
        if let Some(p) = probes.as_mut() {
            while p.next_ns <= now {
                pending_probes[p.station].push(p.next_ns);
                p.advance(&mut rng);
            }
        }

        let shift = (step % positions as u64) as usize;
        for st in 0..n {
            let j = (station_pos[st] + positions - shift) % positions;
            if let Some(slot) = slots[j].as_mut() {
                if slot.dest == st && !slot.delivered {
                    slot.delivered = true;
                    col.received(slot.class, fb);
                    if cfg.stripping == Stripping::Destination {
                        slots[j] = None;
                    }
                } else if slot.src == st && cfg.stripping == Stripping::Source {
                    slots[j] = None;
                }
            }
            if slots[j].is_some() {
                continue;
            }
            for t in pending_probes[st].drain(..) {
                col.access.push((now - t) as f64 / 1e3);
            }
            for class in [TrafficClass::Sync, TrafficClass::Async] {
                if let Some(frame) = queues[st].get_mut(class).pop() {
                    if let Some(a) = frame.arrival_ns {
                        col.delay(class, now - a);
                    }
                    col.sent(class, 1, fb);
                    frames_sent += 1;
                    slots[j] = Some(Slot { src: st, dest: frame.dest, class, delivered: false });
                    break;
                }
            }
        }
    }

    let throughput = if duration == 0 { 0.0 } else { (frames_sent * tau) as f64 / duration as f64 };
    col.finish(duration_us, throughput, None, 0)
}
