//! Worst-case interference between 4b/5b symbol streams and the scrambler.
//!
//! A user stream that equals a stretch of the scrambler sequence scrambles to
//! all ones; its complement scrambles to all zeros. The search below finds the
//! longest stretch of the periodic sequence (or its complement) that a valid
//! symbol stream can reproduce, at every bit offset and symbol alignment.

use std::fmt;

use super::{sequence, PERIOD};
use crate::exec::Execution;
use crate::phy_codec::CodeTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Polarity {
    /// Match against the sequence itself (scrambles to all ones).
    Direct,
    /// Match against the complement (scrambles to all zeros).
    Complement,
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Polarity::Direct => "direct",
            Polarity::Complement => "complement",
        })
    }
}

/// What counts as a run of "valid symbols".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MatchModel {
    /// Only whole 5-bit symbols; lengths are multiples of 5.
    WholeSymbols,
    /// Whole symbols, optionally preceded by a proper suffix (1..=4 bits) of
    /// a valid symbol and followed by a proper prefix of one.
    Fragments,
}

impl fmt::Display for MatchModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MatchModel::WholeSymbols => "whole-symbols",
            MatchModel::Fragments => "fragments",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WitnessPiece {
    /// Tail end of some valid symbol.
    Leading(Vec<bool>),
    /// A whole symbol, by name.
    Symbol(String),
    /// Head of some valid symbol.
    Trailing(Vec<bool>),
}

impl fmt::Display for WitnessPiece {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bits = |b: &[bool]| crate::bits::format_bit_string(b);
        match self {
            WitnessPiece::Leading(b) => write!(f, "[..{}]", bits(b)),
            WitnessPiece::Symbol(name) => f.write_str(name),
            WitnessPiece::Trailing(b) => write!(f, "[{}..]", bits(b)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchResult {
    pub model: MatchModel,
    pub length_bits: usize,
    /// Start bit of the match within one period of the sequence.
    pub offset: usize,
    pub polarity: Polarity,
    pub lead_bits: usize,
    pub trail_bits: usize,
    pub witness: Vec<WitnessPiece>,
    /// Every symbol window of the sequence is valid, so a matching stream
    /// can be extended indefinitely. `length_bits` is then a lower bound.
    pub unbounded: bool,
}

impl MatchResult {
    pub fn witness_string(&self) -> String {
        self.witness.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(" ")
    }

    pub fn length_bytes(&self) -> f64 {
        self.length_bits as f64 / 8.0
    }
}

/// Both matching models side by side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchReport {
    pub whole_symbols: MatchResult,
    pub fragments: MatchResult,
}

impl MatchReport {
    pub fn get(&self, model: MatchModel) -> &MatchResult {
        match model {
            MatchModel::WholeSymbols => &self.whole_symbols,
            MatchModel::Fragments => &self.fragments,
        }
    }
}

/// Searches both polarities and all 127 offsets for the longest symbol-valid
/// stretch, under both matching models.
pub fn longest_valid_match(table: &CodeTable, exec: Execution) -> MatchReport {
    let searchers = [Searcher::new(table, Polarity::Direct), Searcher::new(table, Polarity::Complement)];
    let run = |model| {
        let jobs: Vec<(usize, usize)> = (0..2).flat_map(|p| (0..PERIOD).map(move |o| (p, o))).collect();
        let candidates = exec.map(&jobs, |&(p, o)| searchers[p].best_at(o, model));
        // first maximum in (polarity, offset, lead) order
        let best = candidates
            .into_iter()
            .fold(None::<Candidate>, |acc, c| match acc {
                Some(a) if a.length >= c.length => Some(a),
                _ => Some(c),
            })
            .expect("non-empty search space");
        let searcher = &searchers[best.polarity as usize];
        searcher.describe(best, model, table)
    };
    MatchReport { whole_symbols: run(MatchModel::WholeSymbols), fragments: run(MatchModel::Fragments) }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    polarity: Polarity,
    offset: usize,
    lead: usize,
    symbols: usize,
    trail: usize,
    length: usize,
}

struct Searcher {
    polarity: Polarity,
    bits: [bool; PERIOD],
    /// Consecutive valid symbols starting at each offset, capped at PERIOD.
    chain: [usize; PERIOD],
    suffix_ok: [[bool; 16]; 5],
    prefix_ok: [[bool; 16]; 5],
}

impl Searcher {
    fn new(table: &CodeTable, polarity: Polarity) -> Self {
        let mut bits = sequence();
        if polarity == Polarity::Complement {
            bits.iter_mut().for_each(|b| *b = !*b);
        }
        let mut suffix_ok = [[false; 16]; 5];
        let mut prefix_ok = [[false; 16]; 5];
        for sym in table.symbols() {
            for len in 1..5 {
                suffix_ok[len][(sym.code & ((1 << len) - 1)) as usize] = true;
                prefix_ok[len][(sym.code >> (5 - len)) as usize] = true;
            }
        }
        let mut s = Searcher { polarity, bits, chain: [0; PERIOD], suffix_ok, prefix_ok };
        let valid: Vec<bool> = (0..PERIOD).map(|o| table.is_valid(s.window(o, 5) as u8)).collect();
        for o in 0..PERIOD {
            let mut k = 0;
            while k < PERIOD && valid[(o + 5 * k) % PERIOD] {
                k += 1;
            }
            s.chain[o] = k;
        }
        s
    }

    /// Bits `offset..offset+len` of the periodic sequence as an integer.
    fn window(&self, offset: usize, len: usize) -> u32 {
        (0..len).fold(0, |acc, i| (acc << 1) | self.bits[(offset + i) % PERIOD] as u32)
    }

    fn best_at(&self, offset: usize, model: MatchModel) -> Candidate {
        let max_lead = match model {
            MatchModel::WholeSymbols => 0,
            MatchModel::Fragments => 4,
        };
        let mut best: Option<Candidate> = None;
        for lead in 0..=max_lead {
            if lead > 0 && !self.suffix_ok[lead][self.window(offset, lead) as usize] {
                continue;
            }
            let start = (offset + lead) % PERIOD;
            let symbols = self.chain[start];
            let trail = if model == MatchModel::Fragments && symbols < PERIOD {
                let at = (start + 5 * symbols) % PERIOD;
                (1..5).rev().find(|&t| self.prefix_ok[t][self.window(at, t) as usize]).unwrap_or(0)
            } else {
                0
            };
            let length = lead + 5 * symbols + trail;
            if best.is_none_or(|b| length > b.length) {
                best = Some(Candidate { polarity: self.polarity, offset, lead, symbols, trail, length });
            }
        }
        best.expect("lead 0 is always admissible")
    }

    fn describe(&self, c: Candidate, model: MatchModel, table: &CodeTable) -> MatchResult {
        let bit_run =
            |from: usize, len: usize| -> Vec<bool> { (0..len).map(|i| self.bits[(from + i) % PERIOD]).collect() };
        let mut witness = Vec::new();
        if c.lead > 0 {
            witness.push(WitnessPiece::Leading(bit_run(c.offset, c.lead)));
        }
        let start = c.offset + c.lead;
        for k in 0..c.symbols {
            let code = self.window((start + 5 * k) % PERIOD, 5) as u8;
            let name = table.lookup(code).map(|s| s.name()).unwrap_or_default();
            witness.push(WitnessPiece::Symbol(name));
        }
        if c.trail > 0 {
            witness.push(WitnessPiece::Trailing(bit_run(start + 5 * c.symbols, c.trail)));
        }
        MatchResult {
            model,
            length_bits: c.length,
            offset: c.offset,
            polarity: c.polarity,
            lead_bits: c.lead,
            trail_bits: c.trail,
            witness,
            unbounded: c.symbols >= PERIOD,
        }
    }
}
