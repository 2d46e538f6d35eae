use std::collections::BTreeMap;

use super::config::TrafficClass;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ClassStats {
    pub frames_sent: u64,
    pub bytes_sent: u64,
    pub bytes_received: u64,
    /// Sent before the end of the run but not yet fully received.
    pub bytes_in_flight: u64,
    /// Queueing delay of Poisson frames, arrival to start of transmission.
    pub delay_samples: u64,
    pub mean_delay_us: f64,
    pub max_delay_us: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimMetrics {
    pub duration_us: f64,
    /// Medium (or transmitter) busy time as a fraction of one 100 Mbps link.
    pub throughput: f64,
    pub probes: u64,
    pub mean_access_delay_us: f64,
    pub max_access_delay_us: f64,
    /// Individual probe delays, in arrival order.
    pub access_delays_us: Vec<f64>,
    /// Largest gap between successive token visits at a station holding a
    /// synchronous allocation. `None` when no such station exists or the
    /// model has no token.
    pub max_sync_gap_us: Option<f64>,
    pub token_visits: u64,
    pub per_class: BTreeMap<TrafficClass, ClassStats>,
}

impl SimMetrics {
    pub fn class(&self, class: TrafficClass) -> ClassStats {
        self.per_class.get(&class).cloned().unwrap_or_default()
    }

    /// `(metric, value, unit)` rows in a fixed order.
    pub fn rows(&self) -> Vec<(String, f64, &'static str)> {
        let mut rows = vec![
            ("duration".to_string(), self.duration_us, "us"),
            ("throughput".to_string(), self.throughput, "fraction"),
            ("probes".to_string(), self.probes as f64, "count"),
        ];
        if self.probes > 0 {
            rows.push(("mean_access_delay".to_string(), self.mean_access_delay_us, "us"));
            rows.push(("max_access_delay".to_string(), self.max_access_delay_us, "us"));
        }
        rows.push(("token_visits".to_string(), self.token_visits as f64, "count"));
        if let Some(g) = self.max_sync_gap_us {
            rows.push(("max_sync_gap".to_string(), g, "us"));
        }
        for (class, s) in &self.per_class {
            let c = class.as_str();
            rows.push((format!("{c}_frames_sent"), s.frames_sent as f64, "count"));
            rows.push((format!("{c}_bytes_sent"), s.bytes_sent as f64, "bytes"));
            rows.push((format!("{c}_bytes_received"), s.bytes_received as f64, "bytes"));
            rows.push((format!("{c}_bytes_in_flight"), s.bytes_in_flight as f64, "bytes"));
            if s.delay_samples > 0 {
                rows.push((format!("{c}_mean_delay"), s.mean_delay_us, "us"));
                rows.push((format!("{c}_max_delay"), s.max_delay_us, "us"));
            }
        }
        rows
    }
}

/// Running accumulator used by both engines.
#[derive(Debug, Default)]
pub(crate) struct Collector {
    pub per_class: BTreeMap<TrafficClass, ClassAcc>,
    pub access: Vec<f64>,
}

#[derive(Debug, Default)]
pub(crate) struct ClassAcc {
    pub frames_sent: u64,
    pub bytes_sent: u64,
    pub bytes_received: u64,
    pub delay_sum_ns: u128,
    pub delay_max_ns: u64,
    pub delay_samples: u64,
}

impl Collector {
    pub fn sent(&mut self, class: TrafficClass, frames: u64, frame_bytes: u64) {
        let acc = self.per_class.entry(class).or_default();
        acc.frames_sent += frames;
        acc.bytes_sent += frames * frame_bytes;
    }

    pub fn received(&mut self, class: TrafficClass, bytes: u64) {
        self.per_class.entry(class).or_default().bytes_received += bytes;
    }

    pub fn delay(&mut self, class: TrafficClass, ns: u64) {
        let acc = self.per_class.entry(class).or_default();
        acc.delay_sum_ns += ns as u128;
        acc.delay_max_ns = acc.delay_max_ns.max(ns);
        acc.delay_samples += 1;
    }

    pub fn finish(
        self,
        duration_us: f64,
        throughput: f64,
        max_sync_gap_us: Option<f64>,
        token_visits: u64,
    ) -> SimMetrics {
        let probes = self.access.len() as u64;
        let mean_access = if probes == 0 { 0.0 } else { self.access.iter().sum::<f64>() / probes as f64 };
        let max_access = self.access.iter().copied().fold(0.0, f64::max);
        let per_class = self
            .per_class
            .into_iter()
            .map(|(class, a)| {
                let mean =
                    if a.delay_samples == 0 { 0.0 } else { a.delay_sum_ns as f64 / a.delay_samples as f64 / 1e3 };
                (
                    class,
                    ClassStats {
                        frames_sent: a.frames_sent,
                        bytes_sent: a.bytes_sent,
                        bytes_received: a.bytes_received,
                        bytes_in_flight: a.bytes_sent - a.bytes_received,
                        delay_samples: a.delay_samples,
                        mean_delay_us: mean,
                        max_delay_us: a.delay_max_ns as f64 / 1e3,
                    },
                )
            })
            .collect();
        SimMetrics {
            duration_us,
            throughput,
            probes,
            mean_access_delay_us: mean_access,
            max_access_delay_us: max_access,
            access_delays_us: self.access,
            max_sync_gap_us,
            token_visits,
            per_class,
        }
    }
}
