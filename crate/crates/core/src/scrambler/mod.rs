//! SONET frame-synchronous scrambler, generator polynomial 1 + x^6 + x^7.
//!
//! Seven shift-register stages are loaded with 1111111 at every frame start.
//! Each clock emits stage 7, shifts every stage one place toward stage 7 and
//! feeds stage 6 XOR stage 7 back into stage 1. The output repeats every 127
//! bits.

mod analysis;

pub use analysis::{longest_valid_match, MatchModel, MatchReport, MatchResult, Polarity, WitnessPiece};

/// Sequence length of the maximal-length 7-stage register.
pub const PERIOD: usize = 127;
/// Register contents loaded at frame start.
pub const SEED: u8 = 0b111_1111;

/// Register contents plus bit offset since the last frame start.
///
/// Bit `k` of `registers` holds stage `k + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ScramblerState {
    pub registers: u8,
    pub position: u64,
}

impl Default for ScramblerState {
    fn default() -> Self {
        seed()
    }
}

/// The frame-start state.
pub fn seed() -> ScramblerState {
    ScramblerState { registers: SEED, position: 0 }
}

impl ScramblerState {
    pub fn stage(&self, stage: u8) -> bool {
        debug_assert!((1..=7).contains(&stage));
        (self.registers >> (stage - 1)) & 1 == 1
    }

    /// Emits one scrambler bit and returns the advanced state.
    #[must_use]
    pub fn next_bit(self) -> (bool, ScramblerState) {
        let out = self.stage(7);
        let feedback = self.stage(6) ^ self.stage(7);
        let registers = ((self.registers << 1) | feedback as u8) & 0x7f;
        (out, ScramblerState { registers, position: self.position + 1 })
    }
}

/// Iterator over scrambler output starting from `state`.
#[derive(Debug, Clone)]
pub struct SequenceIter {
    state: ScramblerState,
}

impl Iterator for SequenceIter {
    type Item = bool;

    fn next(&mut self) -> Option<bool> {
        let (bit, next) = self.state.next_bit();
        self.state = next;
        Some(bit)
    }
}

pub fn sequence_from(state: ScramblerState) -> SequenceIter {
    SequenceIter { state }
}

/// One full period of scrambler output from the seed.
pub fn sequence() -> [bool; PERIOD] {
    let mut out = [false; PERIOD];
    for (slot, bit) in out.iter_mut().zip(sequence_from(seed())) {
        *slot = bit;
    }
    out
}

/// Stateful scrambler for a stream of frames.
#[derive(Debug, Clone, Default)]
pub struct Scrambler {
    state: ScramblerState,
}

impl Scrambler {
    pub fn new() -> Self {
        Scrambler { state: seed() }
    }

    pub fn state(&self) -> ScramblerState {
        self.state
    }

    /// XORs `data` with the scrambler sequence. When `frame_start` is set the
    /// register is re-seeded before the first bit.
    pub fn scramble(&mut self, data: &[bool], frame_start: bool) -> Vec<bool> {
        self.scramble_masked(data, frame_start, |_| false)
    }

    /// As [`Scrambler::scramble`], but bits for which `exempt(i)` is true pass
    /// through unchanged. The register still clocks on exempt bits.
    pub fn scramble_masked(&mut self, data: &[bool], frame_start: bool, exempt: impl Fn(usize) -> bool) -> Vec<bool> {
        if frame_start {
            self.state = seed();
        }
        data.iter()
            .enumerate()
            .map(|(i, &d)| {
                let (s, next) = self.state.next_bit();
                self.state = next;
                if exempt(i) {
                    d
                } else {
                    d ^ s
                }
            })
            .collect()
    }

    /// Byte-oriented scrambling, MSB of each byte first.
    pub fn scramble_bytes(&mut self, data: &[u8], frame_start: bool) -> Vec<u8> {
        if frame_start {
            self.state = seed();
        }
        data.iter()
            .map(|&byte| {
                let mut mask = 0u8;
                for _ in 0..8 {
                    let (s, next) = self.state.next_bit();
                    self.state = next;
                    mask = (mask << 1) | s as u8;
                }
                byte ^ mask
            })
            .collect()
    }
}

/// Scrambles one frame from the seed.
pub fn scramble(data: &[bool], frame_start: bool) -> Vec<bool> {
    Scrambler::new().scramble(data, frame_start)
}
