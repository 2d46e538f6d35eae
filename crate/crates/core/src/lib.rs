//! Quantitative models of the FDDI standards family.
//!
//! The crate is split by layer:
//!
//! * [`phy_codec`]: 4b/5b symbol coding plus the NRZI and MLT-3 line codes.
//! * [`scrambler`]: the SONET frame-synchronous scrambler (1 + x^6 + x^7) and
//!   the worst-case 4b/5b interference analysis.
//! * [`spm`]: the SONET/SDH rate hierarchy and the FDDI-to-STM-1 payload mapping.
//! * [`mac_sim`]: a deterministic discrete-event simulator of the timed-token
//!   MAC, plus a slotted model for destination stripping.
//! * [`fddi2`]: FDDI-II hybrid-mode cycle framing and wideband-channel allocation.
//! * [`link_planner`]: power budgets and distance rules for mixed-media rings.
//! * [`report`]: deterministic CSV/JSON emission shared by the CLI.
//!
//! Data-parallel work (parameter sweeps, the scrambler search, per-frame
//! mapping, per-link validation) goes through [`exec::Execution`]. With the
//! default `parallel` feature it runs on rayon; without it every path is
//! sequential and produces identical results.

pub mod bits;
pub mod exec;
pub mod fddi2;
pub mod link_planner;
pub mod mac_sim;
pub mod phy_codec;
pub mod report;
pub mod scrambler;
pub mod spm;

pub use exec::Execution;
