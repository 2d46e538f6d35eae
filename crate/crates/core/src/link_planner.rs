//! Link budgets and distance rules for rings mixing fiber, copper and SONET
//! links.

use std::fmt;
use std::path::Path;

use thiserror::Error;

use crate::exec::Execution;

pub const STANDARD_MEDIA: &str = include_str!("../data/media.v1.tbl");

/// Loss assumed for a mated connector pair when none is given, dB.
pub const DEFAULT_CONNECTOR_LOSS_DB: f64 = 0.3;
pub const MAX_STATIONS: usize = 500;
pub const MAX_TOTAL_CABLE_M: f64 = 100_000.0;
/// Distance up to which LCF and MF devices may be mixed freely, m.
pub const MIXED_ENDS_LIMIT_M: f64 = 500.0;
pub const MIXED_ENDS_WAVELENGTH_NM: u32 = 1300;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinkError {
    #[error("unknown media {0}")]
    UnknownMedia(String),
    #[error("{0} has no optical power specification")]
    NotOptical(String),
    #[error("{0} does not operate at 1300 nm")]
    WavelengthMismatch(String),
    #[error("{media} lacks {field}")]
    MissingParameter { media: String, field: &'static str },
    #[error("media table line {line}: {reason}")]
    TableFormat { line: usize, reason: String },
    #[error("ring file line {line}: {reason}")]
    RingFormat { line: usize, reason: String },
    #[error("i/o: {0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerRange {
    pub min_dbm: f64,
    pub max_dbm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MediaSpec {
    pub name: String,
    pub wavelength_nm: Option<u32>,
    pub tx_power: Option<PowerRange>,
    pub rx_power: Option<PowerRange>,
    pub max_length_m: f64,
    pub attenuation_db_per_km: Option<f64>,
    pub tx_rise_fall_max_ns: Option<f64>,
    pub rx_rise_fall_tolerance_ns: Option<f64>,
    /// Given budget that takes precedence over the power ranges.
    pub budget_db: Option<f64>,
    /// Recorded only; dispersion is not modelled.
    pub bandwidth_mhz_km: Option<f64>,
    pub standard: bool,
}

impl MediaSpec {
    pub fn is_optical(&self) -> bool {
        self.tx_power.is_some() && self.rx_power.is_some()
    }

    /// Worst-case allowed path loss: minimum transmit power minus receiver
    /// sensitivity, unless a budget is given explicitly.
    pub fn power_budget(&self) -> Result<f64, LinkError> {
        if let Some(b) = self.budget_db {
            return Ok(b);
        }
        match (self.tx_power, self.rx_power) {
            (Some(tx), Some(rx)) => Ok(tx.min_dbm - rx.min_dbm),
            _ => Err(LinkError::NotOptical(self.name.clone())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MediaTable {
    media: Vec<MediaSpec>,
}

const COLUMNS: &str = "name wavelength_nm tx_min_dbm tx_max_dbm rx_min_dbm rx_max_dbm max_length_m \
attenuation_db_km tx_rise_fall_ns rx_rise_fall_ns budget_db bandwidth_mhz_km status";

fn opt<T: fmt::Display>(v: Option<T>) -> String {
    v.map_or_else(|| "-".to_string(), |x| x.to_string())
}

impl MediaTable {
    pub fn standard() -> Self {
        Self::parse(STANDARD_MEDIA).expect("shipped media table is well formed")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, LinkError> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| LinkError::Io(e.to_string()))?;
        Self::parse(&text)
    }

    pub fn new(media: Vec<MediaSpec>) -> Self {
        MediaTable { media }
    }

    pub fn parse(text: &str) -> Result<Self, LinkError> {
        let mut media = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |reason: String| LinkError::TableFormat { line: idx + 1, reason };
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 13 {
                return Err(bad(format!("expected 13 fields, found {}", f.len())));
            }
            let num = |i: usize| -> Result<Option<f64>, LinkError> {
                match f[i] {
                    "-" => Ok(None),
                    s => s.parse().map(Some).map_err(|_| bad(format!("field {} is not a number: {s}", i + 1))),
                }
            };
            let range = |lo: Option<f64>, hi: Option<f64>| -> Result<Option<PowerRange>, LinkError> {
                match (lo, hi) {
                    (Some(min_dbm), Some(max_dbm)) if max_dbm >= min_dbm => Ok(Some(PowerRange { min_dbm, max_dbm })),
                    (None, None) => Ok(None),
                    _ => Err(bad("power range needs min <= max".into())),
                }
            };
            let max_length_m = num(6)?.filter(|&l| l > 0.0).ok_or_else(|| bad("max length must be positive".into()))?;
            let standard = match f[12] {
                "standard" => true,
                "nonstandard" => false,
                other => return Err(bad(format!("unknown status {other}"))),
            };
            media.push(MediaSpec {
                name: f[0].to_string(),
                wavelength_nm: num(1)?.map(|w| w as u32),
                tx_power: range(num(2)?, num(3)?)?,
                rx_power: range(num(4)?, num(5)?)?,
                max_length_m,
                attenuation_db_per_km: num(7)?,
                tx_rise_fall_max_ns: num(8)?,
                rx_rise_fall_tolerance_ns: num(9)?,
                budget_db: num(10)?,
                bandwidth_mhz_km: num(11)?,
                standard,
            });
        }
        Ok(MediaTable { media })
    }

    /// Canonical text form; `parse(to_text())` is the identity and the
    /// shipped file is already in this form.
    pub fn to_text(&self) -> String {
        let mut out = String::from("# FDDI media table, format version 1.\n");
        out.push_str(&format!("# Columns: {COLUMNS}\n"));
        out.push_str(
            "# \"-\" marks a field that does not apply. budget_db, when present, overrides tx_min - rx_min.\n",
        );
        for m in &self.media {
            let fields = [
                m.name.clone(),
                opt(m.wavelength_nm),
                opt(m.tx_power.map(|r| r.min_dbm)),
                opt(m.tx_power.map(|r| r.max_dbm)),
                opt(m.rx_power.map(|r| r.min_dbm)),
                opt(m.rx_power.map(|r| r.max_dbm)),
                m.max_length_m.to_string(),
                opt(m.attenuation_db_per_km),
                opt(m.tx_rise_fall_max_ns),
                opt(m.rx_rise_fall_tolerance_ns),
                opt(m.budget_db),
                opt(m.bandwidth_mhz_km),
                if m.standard { "standard" } else { "nonstandard" }.to_string(),
            ];
            out.push_str(&fields.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn get(&self, name: &str) -> Result<&MediaSpec, LinkError> {
        self.media
            .iter()
            .find(|m| m.name.eq_ignore_ascii_case(name))
            .ok_or_else(|| LinkError::UnknownMedia(name.to_string()))
    }

    pub fn iter(&self) -> impl Iterator<Item = &MediaSpec> {
        self.media.iter()
    }

    pub fn power_budget(&self, name: &str) -> Result<f64, LinkError> {
        self.get(name)?.power_budget()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkSpec {
    pub media: String,
    pub length_m: f64,
    pub connector_losses_db: Vec<f64>,
}

impl LinkSpec {
    pub fn new(media: &str, length_m: f64) -> Self {
        LinkSpec { media: media.to_string(), length_m, connector_losses_db: Vec::new() }
    }

    /// `pairs` mated connector pairs at the default loss each.
    pub fn with_connectors(media: &str, length_m: f64, pairs: usize) -> Self {
        LinkSpec { connector_losses_db: vec![DEFAULT_CONNECTOR_LOSS_DB; pairs], ..Self::new(media, length_m) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LinkRule {
    NonPositiveLength { length_m: f64 },
    NegativeConnectorLoss { loss_db: f64 },
    LengthExceeded { length_m: f64, max_m: f64 },
    LossExceeded { loss_db: f64, budget_db: f64 },
}

impl fmt::Display for LinkRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinkRule::NonPositiveLength { length_m } => write!(f, "length {length_m} m is not positive"),
            LinkRule::NegativeConnectorLoss { loss_db } => write!(f, "connector loss {loss_db} dB is negative"),
            LinkRule::LengthExceeded { length_m, max_m } => write!(f, "{length_m} m exceeds {max_m} m"),
            LinkRule::LossExceeded { loss_db, budget_db } => write!(f, "loss {loss_db:.3} dB exceeds {budget_db} dB"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_ok(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BudgetReport {
    pub media: String,
    pub length_m: f64,
    pub max_length_m: f64,
    /// `None` for media without an optical budget.
    pub allowed_loss_db: Option<f64>,
    pub computed_loss_db: Option<f64>,
    pub margin_db: Option<f64>,
    pub verdict: Verdict,
    pub violated: Vec<LinkRule>,
}

pub fn validate_link(table: &MediaTable, link: &LinkSpec) -> Result<BudgetReport, LinkError> {
    let media = table.get(&link.media)?;
    let mut violated = Vec::new();
    if link.length_m <= 0.0 {
        violated.push(LinkRule::NonPositiveLength { length_m: link.length_m });
    }
    for &loss_db in &link.connector_losses_db {
        if loss_db < 0.0 {
            violated.push(LinkRule::NegativeConnectorLoss { loss_db });
        }
    }
    if link.length_m > media.max_length_m {
        violated.push(LinkRule::LengthExceeded { length_m: link.length_m, max_m: media.max_length_m });
    }
    let (allowed, computed) = match (media.power_budget(), media.attenuation_db_per_km) {
        (Ok(budget), Some(att)) => {
            let loss = att * link.length_m / 1000.0 + link.connector_losses_db.iter().sum::<f64>();
            (Some(budget), Some(loss))
        }
        _ => (None, None),
    };
    let margin = allowed.zip(computed).map(|(a, c)| a - c);
    if let (Some(m), Some(budget_db), Some(loss_db)) = (margin, allowed, computed) {
        if m < 0.0 {
            violated.push(LinkRule::LossExceeded { loss_db, budget_db });
        }
    }
    Ok(BudgetReport {
        media: media.name.clone(),
        length_m: link.length_m,
        max_length_m: media.max_length_m,
        allowed_loss_db: allowed,
        computed_loss_db: computed,
        margin_db: margin,
        verdict: Verdict::from_ok(violated.is_empty()),
        violated,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixedEndsReport {
    pub allowed_loss_db: f64,
    pub max_length_m: f64,
    pub length_m: f64,
    pub verdict: Verdict,
}

/// Checks a link whose two ends use different device types on the same
/// 1300 nm fiber.
pub fn mixed_ends_check(
    table: &MediaTable,
    tx_media: &str,
    rx_media: &str,
    length_m: f64,
) -> Result<MixedEndsReport, LinkError> {
    let tx = table.get(tx_media)?;
    let rx = table.get(rx_media)?;
    for m in [tx, rx] {
        if !m.is_optical() {
            return Err(LinkError::NotOptical(m.name.clone()));
        }
        if m.wavelength_nm != Some(MIXED_ENDS_WAVELENGTH_NM) {
            return Err(LinkError::WavelengthMismatch(m.name.clone()));
        }
    }
    let pair_loss = |a: &MediaSpec, b: &MediaSpec| -> f64 {
        a.tx_power.expect("optical").min_dbm - b.rx_power.expect("optical").min_dbm
    };
    let allowed_loss_db = pair_loss(tx, rx).min(pair_loss(rx, tx));
    let is_lcf = |m: &MediaSpec| m.name.eq_ignore_ascii_case("LCF");
    let max_length_m = if is_lcf(tx) || is_lcf(rx) { MIXED_ENDS_LIMIT_M } else { tx.max_length_m.min(rx.max_length_m) };
    Ok(MixedEndsReport {
        allowed_loss_db,
        max_length_m,
        length_m,
        verdict: Verdict::from_ok(length_m > 0.0 && length_m <= max_length_m),
    })
}

/// The transmitter's rise/fall time must not exceed what the receiver
/// tolerates.
pub fn rise_fall_check(tx: &MediaSpec, rx: &MediaSpec) -> Result<Verdict, LinkError> {
    let t = tx
        .tx_rise_fall_max_ns
        .ok_or(LinkError::MissingParameter { media: tx.name.clone(), field: "tx_rise_fall_ns" })?;
    let r = rx
        .rx_rise_fall_tolerance_ns
        .ok_or(LinkError::MissingParameter { media: rx.name.clone(), field: "rx_rise_fall_ns" })?;
    Ok(Verdict::from_ok(t <= r))
}

#[derive(Debug, Clone, PartialEq)]
pub enum RingRule {
    StationCount { stations: usize, max: usize },
    TotalCable { total_m: f64, max_m: f64 },
    LinkFailed { index: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RingReport {
    pub links: Vec<Result<BudgetReport, LinkError>>,
    pub n_stations: usize,
    pub total_cable_m: f64,
    pub violations: Vec<RingRule>,
    pub verdict: Verdict,
}

pub fn validate_ring(table: &MediaTable, links: &[LinkSpec], n_stations: usize, exec: Execution) -> RingReport {
    let reports = exec.map(links, |l| validate_link(table, l));
    let total_cable_m: f64 = links.iter().map(|l| l.length_m).sum();
    let mut violations = Vec::new();
    if n_stations > MAX_STATIONS {
        violations.push(RingRule::StationCount { stations: n_stations, max: MAX_STATIONS });
    }
    if total_cable_m > MAX_TOTAL_CABLE_M {
        violations.push(RingRule::TotalCable { total_m: total_cable_m, max_m: MAX_TOTAL_CABLE_M });
    }
    for (index, r) in reports.iter().enumerate() {
        if !matches!(r, Ok(BudgetReport { verdict: Verdict::Pass, .. })) {
            violations.push(RingRule::LinkFailed { index });
        }
    }
    RingReport {
        links: reports,
        n_stations,
        total_cable_m,
        verdict: Verdict::from_ok(violations.is_empty()),
        violations,
    }
}

impl RingReport {
    /// Report rows `link,rule,verdict,detail`. Links are numbered from 1.
    pub fn rows(&self) -> Vec<[String; 4]> {
        let mut rows = Vec::new();
        for (i, r) in self.links.iter().enumerate() {
            let link = (i + 1).to_string();
            match r {
                Err(e) => rows.push([link, "media".into(), "fail".into(), e.to_string()]),
                Ok(rep) => {
                    let len_ok = rep.length_m <= rep.max_length_m;
                    rows.push([
                        link.clone(),
                        "length".into(),
                        Verdict::from_ok(len_ok).as_str().into(),
                        format!("{} {} m of max {} m", rep.media, rep.length_m, rep.max_length_m),
                    ]);
                    if let (Some(a), Some(c), Some(m)) = (rep.allowed_loss_db, rep.computed_loss_db, rep.margin_db) {
                        rows.push([
                            link.clone(),
                            "loss".into(),
                            Verdict::from_ok(m >= 0.0).as_str().into(),
                            format!("{c:.3} dB of {a} dB budget, margin {m:.3} dB"),
                        ]);
                    }
                    for v in &rep.violated {
                        if matches!(v, LinkRule::NonPositiveLength { .. } | LinkRule::NegativeConnectorLoss { .. }) {
                            rows.push([link.clone(), "input".into(), "fail".into(), v.to_string()]);
                        }
                    }
                }
            }
        }
        rows.push([
            "ring".into(),
            "stations".into(),
            Verdict::from_ok(self.n_stations <= MAX_STATIONS).as_str().into(),
            format!("{} of max {MAX_STATIONS}", self.n_stations),
        ]);
        rows.push([
            "ring".into(),
            "total_cable".into(),
            Verdict::from_ok(self.total_cable_m <= MAX_TOTAL_CABLE_M).as_str().into(),
            format!("{} m of max {MAX_TOTAL_CABLE_M} m", self.total_cable_m),
        ]);
        rows.push(["ring".into(), "verdict".into(), self.verdict.as_str().into(), String::new()]);
        rows
    }
}

/// Ring description: `stations N` plus one `link MEDIA LENGTH_M [connectors=K | losses=a,b,..]`
/// line per link, in ring order. `#` starts a comment.
#[derive(Debug, Clone, PartialEq)]
pub struct RingDescription {
    pub n_stations: usize,
    pub links: Vec<LinkSpec>,
}

pub fn parse_ring(text: &str) -> Result<RingDescription, LinkError> {
    let mut n_stations = None;
    let mut links = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |reason: &str| LinkError::RingFormat { line: idx + 1, reason: reason.into() };
        let f: Vec<&str> = line.split_whitespace().collect();
        match f.as_slice() {
            ["stations", n] => n_stations = Some(n.parse().map_err(|_| bad("station count must be an integer"))?),
            ["link", media, length, rest @ ..] => {
                let length_m: f64 = length.parse().map_err(|_| bad("length must be a number"))?;
                let mut link = LinkSpec::new(media, length_m);
                for opt in rest {
                    if let Some(k) = opt.strip_prefix("connectors=") {
                        let k: usize = k.parse().map_err(|_| bad("connectors must be an integer"))?;
                        link.connector_losses_db.extend(std::iter::repeat_n(DEFAULT_CONNECTOR_LOSS_DB, k));
                    } else if let Some(list) = opt.strip_prefix("losses=") {
                        for v in list.split(',') {
                            link.connector_losses_db.push(v.parse().map_err(|_| bad("losses must be numbers"))?);
                        }
                    } else {
                        return Err(bad("unknown link option"));
                    }
                }
                links.push(link);
            }
            _ => return Err(bad("expected `stations N` or `link MEDIA LENGTH_M ...`")),
        }
    }
    let n_stations = n_stations.ok_or(LinkError::RingFormat { line: 0, reason: "missing stations line".into() })?;
    Ok(RingDescription { n_stations, links })
}
