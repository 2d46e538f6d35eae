//! FDDI-II hybrid mode: the 125 us cycle, wideband-channel (WBC) allocation
//! and reserved-byte accounting.
//!
//! Cycle byte layout used here, in order: 2 preamble bytes, a 24-byte cycle
//! header, then WBC 0..15 as contiguous 96-byte blocks.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

pub const CYCLE_PERIOD_US: u64 = 125;
pub const PREAMBLE_BYTES: usize = 2;
pub const BODY_BYTES: usize = 1560;
pub const WBC_COUNT: usize = 16;
pub const WBC_BYTES: usize = 96;
pub const HEADER_BYTES: usize = BODY_BYTES - WBC_COUNT * WBC_BYTES;
/// Bits per cycle at 100 Mbps that the byte accounting leaves over
/// (1562.5 bytes fit in 125 us; 1562 are used).
pub const SLACK_BITS: usize = 4;
/// Ring bit rate, bits per cycle.
pub const BITS_PER_CYCLE: usize = 100_000_000 / 1_000_000 * CYCLE_PERIOD_US as usize;
/// One byte per cycle is a 64 kbps channel.
pub const KBPS_PER_BYTE: u64 = 8 * 1000 / CYCLE_PERIOD_US;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Fddi2Error {
    #[error("isochronous requests need {requested} bytes/cycle, {available} available")]
    CapacityExceeded { requested: usize, available: usize },
    #[error("channel {0} requested more than once")]
    DuplicateChannel(ChannelId),
    #[error("invalid mode map: {0}")]
    ModeMap(String),
    #[error("requests line {line}: {reason}")]
    RequestFormat { line: usize, reason: String },
}

/// WBC bandwidth in kbps: 96 bytes x 8 bits per 125 us.
pub fn wbc_bandwidth_kbps() -> u64 {
    WBC_BYTES as u64 * KBPS_PER_BYTE
}

/// WBC bandwidth in Mbps (6.144).
pub fn wbc_bandwidth() -> f64 {
    wbc_bandwidth_kbps() as f64 / 1000.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StationKind {
    Fddi,
    Fddi2,
}

/// The ring may enter hybrid mode only if every station is FDDI-II capable.
pub fn can_enter_hybrid(stations: &[StationKind]) -> bool {
    !stations.is_empty() && stations.iter().all(|&k| k == StationKind::Fddi2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WbcMode {
    Isochronous,
    Packet,
}

impl WbcMode {
    pub fn as_str(self) -> &'static str {
        match self {
            WbcMode::Isochronous => "isochronous",
            WbcMode::Packet => "packet",
        }
    }
}

/// Mode of each of the 16 WBCs, index 0 = WBC 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModeMap(pub [WbcMode; WBC_COUNT]);

impl ModeMap {
    pub fn all(mode: WbcMode) -> Self {
        ModeMap([mode; WBC_COUNT])
    }

    /// Builds a map from the 1-based WBC numbers that run in packet mode.
    pub fn with_packet(wbcs: &[usize]) -> Self {
        let mut m = Self::all(WbcMode::Isochronous);
        for &w in wbcs {
            m.0[w - 1] = WbcMode::Packet;
        }
        m
    }

    pub fn count(&self, mode: WbcMode) -> usize {
        self.0.iter().filter(|&&m| m == mode).count()
    }

    pub fn isochronous_bytes(&self) -> usize {
        self.count(WbcMode::Isochronous) * WBC_BYTES
    }

    pub fn packet_bytes(&self) -> usize {
        self.count(WbcMode::Packet) * WBC_BYTES
    }
}

impl FromStr for ModeMap {
    type Err = Fddi2Error;

    /// Accepts 16 mode letters (`I`/`P`, case-insensitive) either as one word
    /// or separated by commas.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let letters: Vec<char> = s.chars().filter(|c| !matches!(c, ',' | ' ')).collect();
        if letters.len() != WBC_COUNT {
            return Err(Fddi2Error::ModeMap(format!("expected 16 modes, got {}", letters.len())));
        }
        let mut modes = [WbcMode::Isochronous; WBC_COUNT];
        for (slot, c) in modes.iter_mut().zip(letters) {
            *slot = match c.to_ascii_uppercase() {
                'I' => WbcMode::Isochronous,
                'P' => WbcMode::Packet,
                other => return Err(Fddi2Error::ModeMap(format!("unknown mode {other:?}"))),
            };
        }
        Ok(ModeMap(modes))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ChannelId(pub u32);

impl fmt::Display for ChannelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChannelRequest {
    pub channel: ChannelId,
    pub bytes_per_cycle: usize,
}

/// Parses `<channel> <bytes>` lines with `#` comments.
pub fn parse_requests(text: &str) -> Result<Vec<ChannelRequest>, Fddi2Error> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |reason: &str| Fddi2Error::RequestFormat { line: idx + 1, reason: reason.into() };
        let mut fields = line.split_whitespace();
        let (Some(ch), Some(bytes), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(bad("expected <channel> <bytes>"));
        };
        out.push(ChannelRequest {
            channel: ChannelId(ch.parse().map_err(|_| bad("channel must be an integer"))?),
            bytes_per_cycle: bytes.parse().map_err(|_| bad("bytes must be an integer"))?,
        });
    }
    Ok(out)
}

/// Bytes of one WBC owned by one channel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grant {
    pub channel: ChannelId,
    /// 0-based WBC index.
    pub wbc: usize,
    /// Byte offsets within the WBC.
    pub offsets: Vec<usize>,
}

impl Grant {
    pub fn kbps(&self) -> u64 {
        self.offsets.len() as u64 * KBPS_PER_BYTE
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Allocation {
    pub modes: ModeMap,
    pub grants: Vec<Grant>,
}

/// Position of byte `offset` of WBC `wbc` counted from the start of the
/// cycle (preamble included).
pub fn cycle_byte_position(wbc: usize, offset: usize) -> usize {
    PREAMBLE_BYTES + HEADER_BYTES + wbc * WBC_BYTES + offset
}

/// Assigns isochronous bytes first-fit in WBC order. A request may span
/// several WBCs. Packet-mode WBCs are left whole for the packet MAC.
pub fn allocate(modes: ModeMap, requests: &[ChannelRequest]) -> Result<Allocation, Fddi2Error> {
    let mut seen = BTreeSet::new();
    for r in requests {
        if !seen.insert(r.channel) {
            return Err(Fddi2Error::DuplicateChannel(r.channel));
        }
    }
    let requested: usize = requests.iter().map(|r| r.bytes_per_cycle).sum();
    let available = modes.isochronous_bytes();
    if requested > available {
        return Err(Fddi2Error::CapacityExceeded { requested, available });
    }
    let mut free = (0..WBC_COUNT)
        .filter(|&w| modes.0[w] == WbcMode::Isochronous)
        .flat_map(|w| (0..WBC_BYTES).map(move |o| (w, o)));
    let mut grants = Vec::new();
    for r in requests {
        let mut current: Option<Grant> = None;
        for (wbc, offset) in free.by_ref().take(r.bytes_per_cycle) {
            match &mut current {
                Some(g) if g.wbc == wbc => g.offsets.push(offset),
                _ => {
                    grants.extend(current.take());
                    current = Some(Grant { channel: r.channel, wbc, offsets: vec![offset] });
                }
            }
        }
        grants.extend(current);
    }
    Ok(Allocation { modes, grants })
}

impl Allocation {
    pub fn granted_bytes(&self) -> usize {
        self.grants.iter().map(|g| g.offsets.len()).sum()
    }

    pub fn channel_bytes(&self, channel: ChannelId) -> usize {
        self.grants.iter().filter(|g| g.channel == channel).map(|g| g.offsets.len()).sum()
    }

    /// Owner of each WBC byte, indexed `wbc * 96 + offset`.
    pub fn owners(&self) -> Vec<Option<ChannelId>> {
        let mut owners = vec![None; WBC_COUNT * WBC_BYTES];
        for g in &self.grants {
            for &o in &g.offsets {
                owners[g.wbc * WBC_BYTES + o] = Some(g.channel);
            }
        }
        owners
    }

    /// Rows of the allocation table: one per packet WBC, one per grant, and
    /// one for the unallocated remainder of each isochronous WBC.
    pub fn rows(&self) -> Vec<AllocationRow> {
        let mut rows = Vec::new();
        for w in 0..WBC_COUNT {
            let mode = self.modes.0[w];
            if mode == WbcMode::Packet {
                rows.push(AllocationRow { wbc: w + 1, mode, channel: None, bytes: WBC_BYTES });
                continue;
            }
            let mut used = 0;
            for g in self.grants.iter().filter(|g| g.wbc == w) {
                used += g.offsets.len();
                rows.push(AllocationRow { wbc: w + 1, mode, channel: Some(g.channel), bytes: g.offsets.len() });
            }
            if used < WBC_BYTES {
                rows.push(AllocationRow { wbc: w + 1, mode, channel: None, bytes: WBC_BYTES - used });
            }
        }
        rows
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AllocationRow {
    /// 1-based WBC number.
    pub wbc: usize,
    pub mode: WbcMode,
    /// `None` for packet WBCs and unallocated isochronous bytes.
    pub channel: Option<ChannelId>,
    pub bytes: usize,
}

impl AllocationRow {
    pub fn kbps(&self) -> u64 {
        self.bytes as u64 * KBPS_PER_BYTE
    }
}

/// Content of one WBC byte in one cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SlotFill {
    Idle,
    Isochronous(ChannelId),
    Packet,
}

/// The WBC bytes of one transmitted cycle plus the channels that had data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleFill {
    pub active: BTreeSet<ChannelId>,
    /// 1536 entries, indexed `wbc * 96 + offset`.
    pub slots: Vec<SlotFill>,
}

/// Builds the cycle a correct engine would transmit: owned bytes carry their
/// channel when it is active and idle fill otherwise; packet WBCs carry
/// packet data when `packet_busy` is set.
pub fn fill_cycle(alloc: &Allocation, active: &BTreeSet<ChannelId>, packet_busy: bool) -> CycleFill {
    let owners = alloc.owners();
    let slots = (0..WBC_COUNT * WBC_BYTES)
        .map(|i| match (alloc.modes.0[i / WBC_BYTES], owners[i]) {
            (WbcMode::Packet, _) if packet_busy => SlotFill::Packet,
            (WbcMode::Isochronous, Some(c)) if active.contains(&c) => SlotFill::Isochronous(c),
            _ => SlotFill::Idle,
        })
        .collect();
    CycleFill { active: active.clone(), slots }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AuditViolation {
    /// A reserved byte of an idle channel carried something.
    IdleReservedByteUsed {
        cycle: usize,
        wbc: usize,
        offset: usize,
        owner: ChannelId,
        found: SlotFill,
    },
    /// An active channel's byte did not carry that channel's data.
    WrongOccupant {
        cycle: usize,
        wbc: usize,
        offset: usize,
        owner: ChannelId,
        found: SlotFill,
    },
    /// Unowned isochronous byte carried data.
    UnownedByteUsed {
        cycle: usize,
        wbc: usize,
        offset: usize,
        found: SlotFill,
    },
    /// Packet data in an isochronous WBC, or isochronous data in a packet WBC.
    ModeViolation {
        cycle: usize,
        wbc: usize,
        offset: usize,
        found: SlotFill,
    },
    SlotCount {
        cycle: usize,
        found: usize,
    },
}

/// Checks a cycle trace against the allocation. An empty trace yields an
/// empty report.
pub fn reserved_byte_audit(alloc: &Allocation, trace: &[CycleFill]) -> Vec<AuditViolation> {
    let owners = alloc.owners();
    let mut out = Vec::new();
    for (cycle, fill) in trace.iter().enumerate() {
        if fill.slots.len() != owners.len() {
            out.push(AuditViolation::SlotCount { cycle, found: fill.slots.len() });
            continue;
        }
        for (i, (&slot, owner)) in fill.slots.iter().zip(&owners).enumerate() {
            let (wbc, offset) = (i / WBC_BYTES, i % WBC_BYTES);
            let violation = match (alloc.modes.0[wbc], owner, slot) {
                (WbcMode::Packet, _, SlotFill::Isochronous(_)) => {
                    Some(AuditViolation::ModeViolation { cycle, wbc, offset, found: slot })
                }
                (WbcMode::Packet, _, _) => None,
                (WbcMode::Isochronous, _, SlotFill::Packet) => {
                    Some(AuditViolation::ModeViolation { cycle, wbc, offset, found: slot })
                }
                (WbcMode::Isochronous, None, SlotFill::Idle) => None,
                (WbcMode::Isochronous, None, _) => {
                    Some(AuditViolation::UnownedByteUsed { cycle, wbc, offset, found: slot })
                }
                (WbcMode::Isochronous, Some(c), _) if !fill.active.contains(c) => (slot != SlotFill::Idle)
                    .then_some(AuditViolation::IdleReservedByteUsed { cycle, wbc, offset, owner: *c, found: slot }),
                (WbcMode::Isochronous, Some(c), _) => (slot != SlotFill::Isochronous(*c))
                    .then_some(AuditViolation::WrongOccupant { cycle, wbc, offset, owner: *c, found: slot }),
            };
            out.extend(violation);
        }
    }
    out
}

/// Whole cycles contained in a ring of the given latency, plus the leftover
/// fraction of a cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CyclesInFlight {
    pub full: u64,
    pub fraction: f64,
}

pub fn cycles_in_flight(ring_latency_us: f64) -> CyclesInFlight {
    let ratio = ring_latency_us.max(0.0) / CYCLE_PERIOD_US as f64;
    let full = ratio.floor();
    CyclesInFlight { full: full as u64, fraction: ratio - full }
}

/// Byte totals per channel across a trace, for reports.
pub fn delivered_bytes(trace: &[CycleFill]) -> BTreeMap<ChannelId, usize> {
    let mut out = BTreeMap::new();
    for slot in trace.iter().flat_map(|c| &c.slots) {
        if let SlotFill::Isochronous(c) = slot {
            *out.entry(*c).or_default() += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn req(channel: u32, bytes: usize) -> ChannelRequest {
        ChannelRequest { channel: ChannelId(channel), bytes_per_cycle: bytes }
    }

    #[test]
    fn cycle_accounting() {
        assert_eq!(WBC_COUNT * WBC_BYTES + HEADER_BYTES, BODY_BYTES);
        assert_eq!(HEADER_BYTES, 24);
        assert_eq!(PREAMBLE_BYTES + BODY_BYTES, 1562);
        assert_eq!((PREAMBLE_BYTES + BODY_BYTES) * 8 + SLACK_BITS, BITS_PER_CYCLE);
    }

    #[test]
    fn wbc_rates() {
        assert_eq!(wbc_bandwidth_kbps(), 6144);
        assert_eq!(wbc_bandwidth(), 6.144);
        assert_eq!(16 * wbc_bandwidth_kbps(), 98_304);
        assert_eq!(wbc_bandwidth_kbps() / 64, 96);
    }

    #[test]
    fn hybrid_eligibility() {
        use StationKind::*;
        assert!(can_enter_hybrid(&[Fddi2, Fddi2, Fddi2]));
        assert!(!can_enter_hybrid(&[Fddi2, Fddi, Fddi2]));
        assert!(can_enter_hybrid(&[Fddi2]));
        assert!(!can_enter_hybrid(&[]));
    }

    #[test]
    fn mixed_modes_capacity() {
        let modes = ModeMap::with_packet(&[1, 5, 7]);
        assert_eq!(modes.isochronous_bytes(), 13 * 96);
        assert_eq!(modes.isochronous_bytes(), 1248);
        let a = allocate(modes, &[req(1, 1248)]).unwrap();
        assert_eq!(a.granted_bytes(), 1248);
        assert!(matches!(
            allocate(modes, &[req(1, 1249)]),
            Err(Fddi2Error::CapacityExceeded { requested: 1249, available: 1248 })
        ));
    }

    #[test]
    fn all_packet_rejects_isochronous() {
        let modes = ModeMap::all(WbcMode::Packet);
        assert_eq!(modes.isochronous_bytes(), 0);
        assert!(matches!(allocate(modes, &[req(9, 1)]), Err(Fddi2Error::CapacityExceeded { .. })));
        assert!(allocate(modes, &[]).unwrap().grants.is_empty());
    }

    #[test]
    fn two_bytes_is_128_kbps() {
        let a = allocate(ModeMap::all(WbcMode::Isochronous), &[req(3, 2)]).unwrap();
        assert_eq!(a.grants.len(), 1);
        assert_eq!(a.grants[0].kbps(), 128);
    }

    #[test]
    fn grants_are_disjoint_and_skip_packet_wbcs() {
        let modes = ModeMap::with_packet(&[1, 2]);
        let a = allocate(modes, &[req(1, 90), req(2, 20), req(3, 96)]).unwrap();
        let mut seen = BTreeSet::new();
        for g in &a.grants {
            assert_eq!(modes.0[g.wbc], WbcMode::Isochronous);
            for &o in &g.offsets {
                assert!(seen.insert((g.wbc, o)));
            }
        }
        assert_eq!(a.channel_bytes(ChannelId(2)), 20);
        // channel 2 spans WBC 3 and WBC 4
        assert_eq!(a.grants.iter().filter(|g| g.channel == ChannelId(2)).count(), 2);
        assert_eq!(cycle_byte_position(2, 0), 2 + 24 + 192);
    }

    #[test]
    fn duplicate_channel_rejected() {
        let modes = ModeMap::all(WbcMode::Isochronous);
        assert_eq!(allocate(modes, &[req(1, 1), req(1, 2)]), Err(Fddi2Error::DuplicateChannel(ChannelId(1))));
    }

    #[test]
    fn toggling_one_wbc_moves_96_bytes() {
        let mut modes = ModeMap::with_packet(&[3]);
        let before = modes.packet_bytes();
        modes.0[7] = WbcMode::Packet;
        assert_eq!(modes.packet_bytes() - before, 96);
    }

    #[test]
    fn rows_cover_every_byte() {
        let a = allocate(ModeMap::with_packet(&[1, 5, 7]), &[req(10, 2), req(11, 100)]).unwrap();
        let rows = a.rows();
        assert_eq!(rows.iter().map(|r| r.bytes).sum::<usize>(), 16 * 96);
        assert_eq!(rows[0].kbps(), 6144);
    }

    #[test]
    fn parse_modes_and_requests() {
        let m: ModeMap = "PIIIPIPIIIIIIIII".parse().unwrap();
        assert_eq!(m, ModeMap::with_packet(&[1, 5, 7]));
        let m2: ModeMap = "p,i,i,i,p,i,p,i,i,i,i,i,i,i,i,i".parse().unwrap();
        assert_eq!(m, m2);
        assert!("PPP".parse::<ModeMap>().is_err());
        assert!("XIIIIIIIIIIIIIII".parse::<ModeMap>().is_err());
        let r = parse_requests("# voice\n1 2\n2 96 # video\n").unwrap();
        assert_eq!(r, vec![req(1, 2), req(2, 96)]);
        assert!(matches!(parse_requests("1"), Err(Fddi2Error::RequestFormat { line: 1, .. })));
    }

    #[test]
    fn audit_idle_owner_leaves_bytes_unused() {
        let a = allocate(ModeMap::with_packet(&[1]), &[req(1, 2), req(2, 10)]).unwrap();
        let active: BTreeSet<_> = [ChannelId(2)].into();
        let trace: Vec<_> = (0..4).map(|_| fill_cycle(&a, &active, true)).collect();
        assert!(reserved_byte_audit(&a, &trace).is_empty());
        let delivered = delivered_bytes(&trace);
        assert_eq!(delivered.get(&ChannelId(1)), None);
        assert_eq!(delivered[&ChannelId(2)], 40);

        // another station borrowing channel 1's idle bytes is flagged
        let mut bad = trace.clone();
        let g = &a.grants[0];
        bad[2].slots[g.wbc * WBC_BYTES + g.offsets[0]] = SlotFill::Isochronous(ChannelId(2));
        let v = reserved_byte_audit(&a, &bad);
        assert_eq!(v.len(), 1);
        assert!(matches!(v[0], AuditViolation::IdleReservedByteUsed { cycle: 2, owner: ChannelId(1), .. }));
    }

    #[test]
    fn audit_active_owner_and_modes() {
        let a = allocate(ModeMap::with_packet(&[16]), &[req(4, 3)]).unwrap();
        let active: BTreeSet<_> = [ChannelId(4)].into();
        let mut trace = vec![fill_cycle(&a, &active, false)];
        assert!(reserved_byte_audit(&a, &trace).is_empty());
        trace[0].slots[0] = SlotFill::Idle;
        trace[0].slots[50] = SlotFill::Isochronous(ChannelId(4));
        trace[0].slots[15 * 96] = SlotFill::Isochronous(ChannelId(4));
        trace[0].slots[60] = SlotFill::Packet;
        let v = reserved_byte_audit(&a, &trace);
        assert_eq!(v.len(), 4);
        assert!(matches!(v[0], AuditViolation::WrongOccupant { offset: 0, .. }));
        assert!(matches!(v[1], AuditViolation::UnownedByteUsed { offset: 50, .. }));
        assert!(matches!(v[2], AuditViolation::ModeViolation { offset: 60, .. }));
        assert!(matches!(v[3], AuditViolation::ModeViolation { wbc: 15, .. }));
        assert!(reserved_byte_audit(&a, &[]).is_empty());
    }

    #[test]
    fn in_flight_cycles() {
        assert_eq!(cycles_in_flight(500.0), CyclesInFlight { full: 4, fraction: 0.0 });
        let c = cycles_in_flight(100.0);
        assert_eq!(c.full, 0);
        assert!((c.fraction - 0.8).abs() < 1e-12);
        assert_eq!(cycles_in_flight(0.0), CyclesInFlight { full: 0, fraction: 0.0 });
    }
}
