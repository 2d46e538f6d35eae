//! SONET/SDH rate hierarchy and the FDDI-to-STM-1 payload mapping.
//!
//! Rates are held as integer kbps so the published hierarchy reproduces
//! digit for digit.

use std::sync::Arc;

use thiserror::Error;

use crate::exec::Execution;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpmError {
    #[error("STS-{0} is not a published hierarchy level")]
    UnknownLevel(u32),
    #[error("infeasible SPE layout: {0}")]
    InfeasibleLayout(String),
    #[error("frame {frame} does not use the expected SPE layout")]
    LayoutMismatch { frame: usize },
    #[error("malformed mapped stream: {0}")]
    Malformed(String),
}

/// STS-1 line rate in kbps.
pub const STS1_LINE_KBPS: u64 = 51_840;

/// One row of the SONET/SDH signal hierarchy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RateEntry {
    pub sts_level: u32,
    pub line_kbps: u64,
    pub payload_kbps: u64,
    pub stm_level: Option<u32>,
}

impl RateEntry {
    pub fn line_mbps(&self) -> f64 {
        self.line_kbps as f64 / 1000.0
    }

    pub fn payload_mbps(&self) -> f64 {
        self.payload_kbps as f64 / 1000.0
    }

    pub fn sts(&self) -> String {
        format!("STS-{}", self.sts_level)
    }

    pub fn oc(&self) -> String {
        format!("OC-{}", self.sts_level)
    }

    pub fn stm(&self) -> Option<String> {
        self.stm_level.map(|m| format!("STM-{m}"))
    }
}

// Payload rates as published. The STS-96 and STS-192 entries are 576 kbps
// below 96 x 50.112 and 192 x 50.112, so the column is stored rather than
// derived.
const PAYLOAD_KBPS: [(u32, u64); 10] = [
    (1, 50_112),
    (3, 150_336),
    (9, 451_008),
    (12, 601_344),
    (18, 902_016),
    (24, 1_202_688),
    (36, 1_804_032),
    (48, 2_405_376),
    (96, 4_810_176),
    (192, 9_620_928),
];

/// Published STS levels, ascending.
pub fn sts_levels() -> impl Iterator<Item = u32> {
    PAYLOAD_KBPS.iter().map(|&(n, _)| n)
}

pub fn sts_rates(n: u32) -> Result<RateEntry, SpmError> {
    let &(_, payload_kbps) = PAYLOAD_KBPS.iter().find(|&&(level, _)| level == n).ok_or(SpmError::UnknownLevel(n))?;
    Ok(RateEntry {
        sts_level: n,
        line_kbps: n as u64 * STS1_LINE_KBPS,
        payload_kbps,
        stm_level: n.is_multiple_of(3).then_some(n / 3),
    })
}

pub fn rate_table() -> Vec<RateEntry> {
    sts_levels().map(|n| sts_rates(n).expect("published level")).collect()
}

/// Formats integer kbps as Mbps without trailing zeros ("51.84", "155.52").
pub fn format_mbps(kbps: u64) -> String {
    let whole = kbps / 1000;
    let frac = kbps % 1000;
    if frac == 0 {
        whole.to_string()
    } else {
        format!("{whole}.{frac:03}").trim_end_matches('0').to_string()
    }
}

/// SPE geometry.
pub const SPE_ROWS: usize = 9;
pub const SPE_COLUMNS: usize = 261;
pub const SPE_BYTES: usize = SPE_ROWS * SPE_COLUMNS;
/// Frame period in microseconds.
pub const FRAME_PERIOD_US: u64 = 125;
/// FDDI code bits arriving during one 125 us frame at 125 Mbps.
pub const FDDI_BITS_PER_FRAME: usize = 15_625;
/// Bandwidth quoted for the STM-1 SPE available to the FDDI mapping, kbps.
pub const SPE_MAPPING_KBPS: u64 = 139_264;

/// The 139.264 Mbps mapping figure. Use [`spe_bandwidth_check`] for the
/// recomputation from the SPE geometry.
pub fn spe_bandwidth() -> f64 {
    SPE_MAPPING_KBPS as f64 / 1000.0
}

/// Reconciles the quoted SPE bandwidth with the raw SPE geometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpeBandwidthCheck {
    pub quoted_kbps: u64,
    /// 2349 bytes x 8 bits per 125 us.
    pub recomputed_kbps: u64,
    /// Bytes per frame the quoted figure corresponds to.
    pub quoted_bytes_per_frame: u64,
    pub discrepancy_bytes: u64,
}

pub fn spe_bandwidth_check() -> SpeBandwidthCheck {
    let recomputed_kbps = SPE_BYTES as u64 * 8 * 1000 / FRAME_PERIOD_US;
    let quoted_bytes_per_frame = SPE_MAPPING_KBPS * FRAME_PERIOD_US / 8 / 1000;
    SpeBandwidthCheck {
        quoted_kbps: SPE_MAPPING_KBPS,
        recomputed_kbps,
        quoted_bytes_per_frame,
        discrepancy_bytes: SPE_BYTES as u64 - quoted_bytes_per_frame,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ByteClass {
    PathOverhead,
    /// Eight fixed bits.
    FixedStuff,
    /// MSB is a stuff-control bit; the low 7 bits carry user data.
    StuffControl,
    UserData,
}

impl ByteClass {
    pub fn user_bits(self) -> usize {
        match self {
            ByteClass::PathOverhead | ByteClass::FixedStuff => 0,
            ByteClass::StuffControl => 7,
            ByteClass::UserData => 8,
        }
    }

    /// True when user data can influence some bit of the byte.
    pub fn carries_user(self) -> bool {
        self.user_bits() > 0
    }
}

/// Fill value for overhead and fixed-stuff bytes, before scrambling.
pub const FIXED_FILL: u8 = 0x00;
/// Value of the stuff-control bit in the mapping's fixed-rate mode.
pub const STUFF_CONTROL_BIT: bool = false;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpeLayoutParams {
    /// Longest run of user-influenced bytes between fixed-stuff bytes.
    pub max_user_run: usize,
    /// Position of the stuff-control byte within each run.
    pub stuff_control_index: usize,
}

impl Default for SpeLayoutParams {
    fn default() -> Self {
        SpeLayoutParams { max_user_run: 17, stuff_control_index: 0 }
    }
}

impl SpeLayoutParams {
    /// Column stride between fixed-stuff bytes.
    pub fn stride(&self) -> usize {
        self.max_user_run + 1
    }
}

/// Longest run of user-influenced bytes the mapping may produce.
pub const MAX_CONTIGUOUS_USER_BYTES: usize = 17;

/// Per-byte classification of one SPE, in transmission (row-major) order.
///
/// Column 0 of every row is path overhead. The remaining 260 columns repeat
/// a block of one fixed-stuff byte followed by up to `max_user_run`
/// user-influenced bytes, one of which is a stuff-control byte.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpeLayout {
    params: SpeLayoutParams,
    classes: Vec<ByteClass>,
}

pub fn build_spe_layout(params: SpeLayoutParams) -> Result<SpeLayout, SpmError> {
    if params.max_user_run == 0 || params.max_user_run > MAX_CONTIGUOUS_USER_BYTES {
        return Err(SpmError::InfeasibleLayout(format!(
            "user run of {} bytes outside 1..={MAX_CONTIGUOUS_USER_BYTES}",
            params.max_user_run
        )));
    }
    if params.stuff_control_index >= params.max_user_run {
        return Err(SpmError::InfeasibleLayout(format!(
            "stuff-control index {} outside a {}-byte run",
            params.stuff_control_index, params.max_user_run
        )));
    }
    let mut classes = Vec::with_capacity(SPE_BYTES);
    for _ in 0..SPE_ROWS {
        classes.push(ByteClass::PathOverhead);
        for col in 0..SPE_COLUMNS - 1 {
            let k = col % params.stride();
            let run_len = (SPE_COLUMNS - 1 - (col - k + 1)).min(params.max_user_run);
            let class = if k == 0 {
                ByteClass::FixedStuff
            } else if k - 1 == params.stuff_control_index.min(run_len.saturating_sub(1)) {
                ByteClass::StuffControl
            } else {
                ByteClass::UserData
            };
            classes.push(class);
        }
    }
    let layout = SpeLayout { params, classes };
    let n_stuff_control = layout.count(ByteClass::StuffControl);
    // one stuff opportunity per stuff-control bit on top of the nominal rate
    let required = FDDI_BITS_PER_FRAME + n_stuff_control;
    if layout.capacity_bits() < required {
        return Err(SpmError::InfeasibleLayout(format!(
            "capacity {} bits below the {required} required",
            layout.capacity_bits()
        )));
    }
    Ok(layout)
}

impl SpeLayout {
    pub fn params(&self) -> SpeLayoutParams {
        self.params
    }

    pub fn classes(&self) -> &[ByteClass] {
        &self.classes
    }

    pub fn count(&self, class: ByteClass) -> usize {
        self.classes.iter().filter(|&&c| c == class).count()
    }

    /// User data bits carried per frame.
    pub fn capacity_bits(&self) -> usize {
        self.classes.iter().map(|c| c.user_bits()).sum()
    }

    /// Spare user bits beyond the nominal 15625 per frame.
    pub fn stuff_opportunity_bits(&self) -> usize {
        self.capacity_bits().saturating_sub(FDDI_BITS_PER_FRAME)
    }

    /// Maximal runs of user-influenced bytes as `(start, len)`.
    pub fn user_runs(&self) -> Vec<(usize, usize)> {
        let mut runs = Vec::new();
        let mut start = None;
        for (i, c) in self.classes.iter().enumerate() {
            match (c.carries_user(), start) {
                (true, None) => start = Some(i),
                (false, Some(s)) => {
                    runs.push((s, i - s));
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = start {
            runs.push((s, self.classes.len() - s));
        }
        runs
    }

    pub fn max_user_run(&self) -> usize {
        self.user_runs().iter().map(|&(_, l)| l).max().unwrap_or(0)
    }
}

/// One mapped SPE.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpeFrame {
    pub bytes: Vec<u8>,
    pub layout: Arc<SpeLayout>,
    /// User bits in this frame that carry FDDI code bits; the rest is fill.
    pub payload_bits: usize,
}

impl SpeFrame {
    /// Bit positions (byte index, bit-in-byte from MSB) that carry user data,
    /// in transmission order.
    fn user_positions(layout: &SpeLayout) -> impl Iterator<Item = (usize, u8)> + '_ {
        layout.classes.iter().enumerate().flat_map(|(i, c)| {
            let first = 8 - c.user_bits() as u8;
            (first..8).map(move |b| (i, b))
        })
    }
}

fn fill_frame(layout: &Arc<SpeLayout>, chunk: &[bool]) -> SpeFrame {
    let mut bytes = vec![FIXED_FILL; SPE_BYTES];
    for (i, c) in layout.classes.iter().enumerate() {
        if *c == ByteClass::StuffControl {
            bytes[i] = (STUFF_CONTROL_BIT as u8) << 7;
        }
    }
    for ((byte, bit), &value) in SpeFrame::user_positions(layout).zip(chunk) {
        if value {
            bytes[byte] |= 0x80 >> bit;
        }
    }
    SpeFrame { bytes, layout: Arc::clone(layout), payload_bits: chunk.len() }
}

/// Places FDDI code bits into successive SPEs, filling user positions in
/// transmission order. The last frame may be partially filled.
pub fn map_fddi(layout: &Arc<SpeLayout>, code_bits: &[bool], exec: Execution) -> Vec<SpeFrame> {
    let chunks: Vec<&[bool]> = code_bits.chunks(layout.capacity_bits()).collect();
    exec.map(&chunks, |chunk| fill_frame(layout, chunk))
}

/// Recovers the code bits from frames built with `layout`.
pub fn extract_fddi(layout: &SpeLayout, frames: &[SpeFrame]) -> Result<Vec<bool>, SpmError> {
    let mut out = Vec::with_capacity(frames.iter().map(|f| f.payload_bits).sum());
    for (frame_idx, frame) in frames.iter().enumerate() {
        let same = std::ptr::eq(Arc::as_ptr(&frame.layout), layout) || *frame.layout == *layout;
        if !same || frame.bytes.len() != SPE_BYTES || frame.payload_bits > layout.capacity_bits() {
            return Err(SpmError::LayoutMismatch { frame: frame_idx });
        }
        out.extend(
            SpeFrame::user_positions(layout)
                .take(frame.payload_bits)
                .map(|(byte, bit)| frame.bytes[byte] & (0x80 >> bit) != 0),
        );
    }
    Ok(out)
}

/// Magic prefix of the mapped-stream file.
pub const STREAM_MAGIC: &[u8; 4] = b"SPM1";

/// Serializes frames as `SPM1`, the total payload bit count (u64, big
/// endian), then each 2349-byte SPE.
pub fn write_stream(frames: &[SpeFrame]) -> Vec<u8> {
    let total: u64 = frames.iter().map(|f| f.payload_bits as u64).sum();
    let mut out = Vec::with_capacity(12 + frames.len() * SPE_BYTES);
    out.extend_from_slice(STREAM_MAGIC);
    out.extend_from_slice(&total.to_be_bytes());
    for f in frames {
        out.extend_from_slice(&f.bytes);
    }
    out
}

/// Parses a stream written by [`write_stream`] against `layout`.
pub fn read_stream(layout: &Arc<SpeLayout>, data: &[u8]) -> Result<Vec<SpeFrame>, SpmError> {
    if data.len() < 12 || &data[..4] != STREAM_MAGIC {
        return Err(SpmError::Malformed("missing SPM1 header".into()));
    }
    let total = u64::from_be_bytes(data[4..12].try_into().expect("8 bytes")) as usize;
    let body = &data[12..];
    if !body.len().is_multiple_of(SPE_BYTES) {
        return Err(SpmError::Malformed(format!("{} body bytes is not whole frames", body.len())));
    }
    let cap = layout.capacity_bits();
    let n_frames = body.len() / SPE_BYTES;
    if total.div_ceil(cap) != n_frames {
        return Err(SpmError::Malformed(format!("{total} bits do not fit {n_frames} frames")));
    }
    Ok(body
        .chunks(SPE_BYTES)
        .enumerate()
        .map(|(i, b)| SpeFrame {
            bytes: b.to_vec(),
            layout: Arc::clone(layout),
            payload_bits: total.saturating_sub(i * cap).min(cap),
        })
        .collect())
}
