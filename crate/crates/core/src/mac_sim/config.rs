use std::fmt;

use serde::{Deserialize, Serialize};

/// Ring bit rate, bits per second.
pub const RING_BIT_RATE: u64 = 100_000_000;
/// Nanoseconds to transmit one byte at 100 Mbps.
pub const NS_PER_BYTE: u64 = 8 * 1_000_000_000 / RING_BIT_RATE;
/// Propagation delay assumed by [`latency_from_cable`], us per km of fiber.
pub const PROPAGATION_US_PER_KM: f64 = 5.085;
pub const DEFAULT_FRAME_BYTES: u32 = 64;
pub const MAX_STATIONS: usize = 500;
pub const MAX_CABLE_KM: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stripping {
    #[default]
    Source,
    Destination,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RingConfig {
    pub n_stations: usize,
    /// Zero-load token walk time around the ring, D.
    pub ring_latency_us: f64,
    /// Target token rotation time, T.
    pub ttrt_us: f64,
    /// Synchronous allocation per token visit, one entry per station; empty
    /// means no synchronous allocation anywhere.
    #[serde(default)]
    pub sync_allocation_us: Vec<f64>,
    #[serde(default)]
    pub stripping: Stripping,
    #[serde(default)]
    pub total_cable_km: f64,
    /// Enforce the 500-station / 100 km limits.
    #[serde(default)]
    pub compliance: bool,
    #[serde(default = "default_frame_bytes")]
    pub frame_bytes: u32,
}

fn default_frame_bytes() -> u32 {
    DEFAULT_FRAME_BYTES
}

impl RingConfig {
    pub fn new(n_stations: usize, ring_latency_us: f64, ttrt_us: f64) -> Self {
        RingConfig {
            n_stations,
            ring_latency_us,
            ttrt_us,
            sync_allocation_us: Vec::new(),
            stripping: Stripping::Source,
            total_cable_km: 0.0,
            compliance: false,
            frame_bytes: DEFAULT_FRAME_BYTES,
        }
    }

    pub fn sync_allocation(&self, station: usize) -> f64 {
        self.sync_allocation_us.get(station).copied().unwrap_or(0.0)
    }

    pub fn frame_time_ns(&self) -> u64 {
        self.frame_bytes as u64 * NS_PER_BYTE
    }
}

/// Ring latency from cable length plus a fixed per-station delay.
pub fn latency_from_cable(total_cable_km: f64, n_stations: usize, per_station_us: f64) -> f64 {
    PROPAGATION_US_PER_KM * total_cable_km + n_stations as f64 * per_station_us
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NoStations,
    NonPositiveTtrt { ttrt_us: f64 },
    NegativeLatency { latency_us: f64 },
    TtrtBelowLatency { ttrt_us: f64, latency_us: f64 },
    SyncAllocationLength { expected: usize, found: usize },
    NegativeSyncAllocation { station: usize, allocation_us: f64 },
    SyncOverAllocated { total_us: f64, available_us: f64 },
    StationCount { n_stations: usize, max: usize },
    TotalCable { km: f64, max_km: f64 },
    ZeroFrameSize,
}

impl Violation {
    pub fn code(&self) -> &'static str {
        match self {
            Violation::NoStations => "NoStations",
            Violation::NonPositiveTtrt { .. } => "NonPositiveTtrt",
            Violation::NegativeLatency { .. } => "NegativeLatency",
            Violation::TtrtBelowLatency { .. } => "TtrtBelowLatency",
            Violation::SyncAllocationLength { .. } => "SyncAllocationLength",
            Violation::NegativeSyncAllocation { .. } => "NegativeSyncAllocation",
            Violation::SyncOverAllocated { .. } => "SyncOverAllocated",
            Violation::StationCount { .. } => "StationCount",
            Violation::TotalCable { .. } => "TotalCable",
            Violation::ZeroFrameSize => "ZeroFrameSize",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoStations => write!(f, "ring has no stations"),
            Violation::NonPositiveTtrt { ttrt_us } => write!(f, "TTRT {ttrt_us} us must be positive"),
            Violation::NegativeLatency { latency_us } => write!(f, "ring latency {latency_us} us is negative"),
            Violation::TtrtBelowLatency { ttrt_us, latency_us } => {
                write!(f, "TTRT {ttrt_us} us is below ring latency {latency_us} us")
            }
            Violation::SyncAllocationLength { expected, found } => {
                write!(f, "{found} synchronous allocations for {expected} stations")
            }
            Violation::NegativeSyncAllocation { station, allocation_us } => {
                write!(f, "station {station} synchronous allocation {allocation_us} us is negative")
            }
            Violation::SyncOverAllocated { total_us, available_us } => {
                write!(f, "synchronous allocations total {total_us} us, only {available_us} us available")
            }
            Violation::StationCount { n_stations, max } => write!(f, "{n_stations} stations exceeds {max}"),
            Violation::TotalCable { km, max_km } => write!(f, "{km} km of cable exceeds {max_km} km"),
            Violation::ZeroFrameSize => write!(f, "frame size must be positive"),
        }
    }
}

/// Every violated configuration rule, in a fixed order.
pub fn validate_config(cfg: &RingConfig) -> Vec<Violation> {
    let mut v = Vec::new();
    if cfg.n_stations == 0 {
        v.push(Violation::NoStations);
    }
    if cfg.ttrt_us <= 0.0 {
        v.push(Violation::NonPositiveTtrt { ttrt_us: cfg.ttrt_us });
    }
    if cfg.ring_latency_us < 0.0 {
        v.push(Violation::NegativeLatency { latency_us: cfg.ring_latency_us });
    }
    if cfg.ttrt_us < cfg.ring_latency_us {
        v.push(Violation::TtrtBelowLatency { ttrt_us: cfg.ttrt_us, latency_us: cfg.ring_latency_us });
    }
    if !cfg.sync_allocation_us.is_empty() && cfg.sync_allocation_us.len() != cfg.n_stations {
        v.push(Violation::SyncAllocationLength { expected: cfg.n_stations, found: cfg.sync_allocation_us.len() });
    }
    for (station, &a) in cfg.sync_allocation_us.iter().enumerate() {
        if a < 0.0 {
            v.push(Violation::NegativeSyncAllocation { station, allocation_us: a });
        }
    }
    let total: f64 = cfg.sync_allocation_us.iter().sum();
    let available = cfg.ttrt_us - cfg.ring_latency_us;
    if total > available && total > 0.0 {
        v.push(Violation::SyncOverAllocated { total_us: total, available_us: available });
    }
    if cfg.compliance {
        if cfg.n_stations > MAX_STATIONS {
            v.push(Violation::StationCount { n_stations: cfg.n_stations, max: MAX_STATIONS });
        }
        if cfg.total_cable_km > MAX_CABLE_KM {
            v.push(Violation::TotalCable { km: cfg.total_cable_km, max_km: MAX_CABLE_KM });
        }
    }
    if cfg.frame_bytes == 0 {
        v.push(Violation::ZeroFrameSize);
    }
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrafficClass {
    Sync,
    Async,
}

impl TrafficClass {
    pub fn as_str(self) -> &'static str {
        match self {
            TrafficClass::Sync => "sync",
            TrafficClass::Async => "async",
        }
    }
}

/// One traffic source, applied to each listed station.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Flow {
    /// Stations this flow applies to; absent means every station.
    #[serde(default)]
    pub stations: Option<Vec<usize>>,
    pub class: TrafficClass,
    /// Always backlogged.
    #[serde(default)]
    pub saturated: bool,
    /// Poisson offered load per station when not saturated.
    #[serde(default)]
    pub rate_mbps: f64,
    /// Destination station; defaults to the downstream neighbour.
    #[serde(default)]
    pub dest: Option<usize>,
}

impl Flow {
    pub fn saturated(class: TrafficClass) -> Self {
        Flow { stations: None, class, saturated: true, rate_mbps: 0.0, dest: None }
    }

    pub fn poisson(class: TrafficClass, rate_mbps: f64) -> Self {
        Flow { stations: None, class, saturated: false, rate_mbps, dest: None }
    }

    pub fn at(mut self, stations: Vec<usize>) -> Self {
        self.stations = Some(stations);
        self
    }

    pub fn to(mut self, dest: usize) -> Self {
        self.dest = Some(dest);
        self
    }

    pub fn applies_to(&self, station: usize) -> bool {
        self.stations.as_ref().is_none_or(|s| s.contains(&station))
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrafficModel {
    #[serde(default)]
    pub flows: Vec<Flow>,
    /// Measurement probes per millisecond, spread uniformly over stations.
    /// Probes observe access delay and transmit nothing.
    #[serde(default)]
    pub probe_rate_per_ms: f64,
}

impl TrafficModel {
    pub fn idle() -> Self {
        Self::default()
    }

    pub fn with_flow(mut self, flow: Flow) -> Self {
        self.flows.push(flow);
        self
    }

    pub fn with_probes(mut self, per_ms: f64) -> Self {
        self.probe_rate_per_ms = per_ms;
        self
    }

    /// Checks station indices and rates against a ring of `n` stations.
    pub fn check(&self, n: usize) -> Result<(), String> {
        for (i, f) in self.flows.iter().enumerate() {
            if let Some(st) = &f.stations {
                if let Some(bad) = st.iter().find(|&&s| s >= n) {
                    return Err(format!("flow {i}: station {bad} out of range"));
                }
            }
            if f.dest.is_some_and(|d| d >= n) {
                return Err(format!("flow {i}: destination out of range"));
            }
            if !f.saturated && !(f.rate_mbps >= 0.0 && f.rate_mbps.is_finite()) {
                return Err(format!("flow {i}: rate must be a non-negative number"));
            }
        }
        if !(self.probe_rate_per_ms >= 0.0 && self.probe_rate_per_ms.is_finite()) {
            return Err("probe rate must be a non-negative number".into());
        }
        Ok(())
    }
}

/// Config file document: ring parameters plus traffic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfigFile {
    pub ring: RingConfig,
    #[serde(default)]
    pub traffic: TrafficModel,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equality_boundary_is_ok() {
        assert!(validate_config(&RingConfig::new(4, 100.0, 100.0)).is_empty());
    }

    #[test]
    fn ttrt_below_latency() {
        let v = validate_config(&RingConfig::new(4, 100.0, 99.0));
        assert_eq!(v, vec![Violation::TtrtBelowLatency { ttrt_us: 99.0, latency_us: 100.0 }]);
        assert_eq!(v[0].code(), "TtrtBelowLatency");
    }

    #[test]
    fn compliance_limits() {
        let mut cfg = RingConfig::new(501, 10.0, 100.0);
        assert!(validate_config(&cfg).is_empty());
        cfg.compliance = true;
        cfg.total_cable_km = 101.0;
        let v = validate_config(&cfg);
        assert!(v.contains(&Violation::StationCount { n_stations: 501, max: 500 }));
        assert!(v.contains(&Violation::TotalCable { km: 101.0, max_km: 100.0 }));
        cfg.n_stations = 500;
        cfg.total_cable_km = 100.0;
        assert!(validate_config(&cfg).is_empty());
    }

    #[test]
    fn sync_allocation_rules() {
        let mut cfg = RingConfig::new(2, 10.0, 30.0);
        cfg.sync_allocation_us = vec![10.0, 10.0];
        assert!(validate_config(&cfg).is_empty());
        cfg.sync_allocation_us = vec![15.0, 10.0];
        assert!(matches!(validate_config(&cfg)[..], [Violation::SyncOverAllocated { .. }]));
        cfg.sync_allocation_us = vec![1.0];
        assert!(matches!(validate_config(&cfg)[..], [Violation::SyncAllocationLength { expected: 2, found: 1 }]));
        cfg.sync_allocation_us = vec![-1.0, 1.0];
        assert!(matches!(validate_config(&cfg)[..], [Violation::NegativeSyncAllocation { station: 0, .. }]));
    }

    #[test]
    fn degenerate_configs() {
        let mut cfg = RingConfig::new(0, 0.0, 0.0);
        cfg.frame_bytes = 0;
        let codes: Vec<_> = validate_config(&cfg).iter().map(|v| v.code()).collect();
        assert_eq!(codes, ["NoStations", "NonPositiveTtrt", "ZeroFrameSize"]);
    }

    #[test]
    fn cable_latency_helper() {
        assert!((latency_from_cable(100.0, 500, 0.6) - (508.5 + 300.0)).abs() < 1e-9);
    }

    #[test]
    fn config_document_parses() {
        let doc = r#"{
            "ring": {"n_stations": 3, "ring_latency_us": 10, "ttrt_us": 165,
                     "sync_allocation_us": [5, 5, 5], "stripping": "source"},
            "traffic": {"flows": [{"class": "async", "saturated": true},
                                  {"class": "sync", "rate_mbps": 1.5, "stations": [0]}],
                        "probe_rate_per_ms": 2}
        }"#;
        let f: SimConfigFile = serde_json::from_str(doc).unwrap();
        assert_eq!(f.ring.frame_bytes, DEFAULT_FRAME_BYTES);
        assert_eq!(f.traffic.flows.len(), 2);
        assert!(f.traffic.flows[1].applies_to(0));
        assert!(!f.traffic.flows[1].applies_to(1));
        assert!(f.traffic.check(3).is_ok());
        assert!(f.traffic.check(0).is_err());
    }
}
