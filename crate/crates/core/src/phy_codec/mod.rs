//! FDDI physical-layer coding: table-driven 4b/5b symbols and the NRZI /
//! MLT-3 line codes.

mod line;
mod table;

pub use line::{
    fundamental_frequency, mlt3_encode, nrzi_encode, Level, LineCode, LineSignal, FDDI_CODE_BIT_RATE,
    FDDI_DATA_BIT_RATE,
};
pub use table::{CodeTable, Symbol4b5b, SymbolKind, STANDARD_TABLE};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodecError {
    #[error("nibble value {0} out of range")]
    NibbleRange(u8),
    #[error("invalid 4b/5b symbol {pattern:05b} at position {position}")]
    InvalidSymbol { position: usize, pattern: u8 },
    #[error("control symbol {name} at position {position}")]
    ControlSymbol { position: usize, name: String },
    #[error("code table has no symbol for nibble {0:X}")]
    Unencodable(u8),
    #[error("code bit count {0} is not a multiple of 5")]
    Misaligned(usize),
    #[error("signal is aperiodic")]
    AperiodicSignal,
    #[error("code table line {line}: {reason}")]
    TableFormat { line: usize, reason: String },
    #[error("code table conflict: {0}")]
    TableConflict(String),
    #[error("i/o: {0}")]
    Io(String),
}

/// A 4-bit data value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Nibble(u8);

impl Nibble {
    pub fn new(value: u8) -> Result<Self, CodecError> {
        if value < 16 {
            Ok(Nibble(value))
        } else {
            Err(CodecError::NibbleRange(value))
        }
    }

    pub fn value(self) -> u8 {
        self.0
    }

    /// Splits bytes into nibbles, high nibble first.
    pub fn from_bytes(bytes: &[u8]) -> Vec<Nibble> {
        bytes.iter().flat_map(|&b| [Nibble(b >> 4), Nibble(b & 0x0f)]).collect()
    }

    /// Inverse of [`Nibble::from_bytes`]. An odd trailing nibble fills the
    /// high half of a final byte.
    pub fn to_bytes(nibbles: &[Nibble]) -> Vec<u8> {
        nibbles.chunks(2).map(|p| (p[0].0 << 4) | p.get(1).map_or(0, |n| n.0)).collect()
    }
}

impl TryFrom<u8> for Nibble {
    type Error = CodecError;

    fn try_from(value: u8) -> Result<Self, Self::Error> {
        Nibble::new(value)
    }
}

pub fn encode_4b5b(table: &CodeTable, data: &[Nibble]) -> Result<Vec<Symbol4b5b>, CodecError> {
    data.iter()
        .map(|&n| table.code_for(n).and_then(|c| table.lookup(c)).cloned().ok_or(CodecError::Unencodable(n.value())))
        .collect()
}

/// Decodes 5-bit patterns back to nibbles. The first control or unknown
/// pattern stops decoding and is reported with its position.
pub fn decode_4b5b(table: &CodeTable, patterns: &[u8]) -> Result<Vec<Nibble>, CodecError> {
    patterns
        .iter()
        .enumerate()
        .map(|(position, &pattern)| match table.lookup(pattern & 0x1f) {
            Some(Symbol4b5b { kind: SymbolKind::Data(n), .. }) if pattern < 32 => Ok(*n),
            Some(Symbol4b5b { kind: SymbolKind::Control(name), .. }) if pattern < 32 => {
                Err(CodecError::ControlSymbol { position, name: name.clone() })
            }
            _ => Err(CodecError::InvalidSymbol { position, pattern }),
        })
        .collect()
}

/// Serializes symbols to code bits, 5 per symbol, MSB first.
pub fn symbols_to_bits(symbols: &[Symbol4b5b]) -> Vec<bool> {
    symbols.iter().flat_map(|s| s.bits()).collect()
}

/// Groups code bits into 5-bit patterns.
pub fn bits_to_patterns(bits: &[bool]) -> Result<Vec<u8>, CodecError> {
    if !bits.len().is_multiple_of(5) {
        return Err(CodecError::Misaligned(bits.len()));
    }
    Ok(bits.chunks(5).map(|c| c.iter().fold(0u8, |acc, &b| (acc << 1) | b as u8)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nibbles(v: &[u8]) -> Vec<Nibble> {
        v.iter().map(|&x| Nibble::new(x).unwrap()).collect()
    }

    #[test]
    fn nibble_range() {
        assert!(Nibble::new(15).is_ok());
        assert_eq!(Nibble::new(16), Err(CodecError::NibbleRange(16)));
    }

    #[test]
    fn eight_nibbles_make_forty_code_bits() {
        let t = CodeTable::standard();
        let syms = encode_4b5b(&t, &nibbles(&[0, 1, 2, 3, 4, 5, 6, 7])).unwrap();
        assert_eq!(syms.len(), 8);
        assert_eq!(symbols_to_bits(&syms).len(), 40);
    }

    #[test]
    fn empty_in_empty_out() {
        let t = CodeTable::standard();
        assert!(encode_4b5b(&t, &[]).unwrap().is_empty());
        assert!(decode_4b5b(&t, &[]).unwrap().is_empty());
    }

    #[test]
    fn all_sixteen_round_trip() {
        let t = CodeTable::standard();
        let data = nibbles(&(0..16).collect::<Vec<_>>());
        let codes: Vec<u8> = encode_4b5b(&t, &data).unwrap().iter().map(|s| s.code).collect();
        assert_eq!(decode_4b5b(&t, &codes).unwrap(), data);
    }

    #[test]
    fn invalid_pattern_reported() {
        let t = CodeTable::standard();
        // 00001 is a violation symbol, absent from the table
        let err = decode_4b5b(&t, &[0b11110, 0b00001]).unwrap_err();
        assert_eq!(err, CodecError::InvalidSymbol { position: 1, pattern: 1 });
        let err = decode_4b5b(&t, &[40]).unwrap_err();
        assert!(matches!(err, CodecError::InvalidSymbol { position: 0, .. }));
    }

    #[test]
    fn control_pattern_reported() {
        let t = CodeTable::standard();
        let ctrl = t.control_symbols().next().unwrap().clone();
        let err = decode_4b5b(&t, &[0b11110, 0b11110, ctrl.code]).unwrap_err();
        assert_eq!(err, CodecError::ControlSymbol { position: 2, name: ctrl.name() });
    }

    #[test]
    fn partial_table_cannot_encode_missing_nibble() {
        let t = CodeTable::parse("11110 data 0").unwrap();
        assert_eq!(encode_4b5b(&t, &nibbles(&[0, 1])), Err(CodecError::Unencodable(1)));
    }

    #[test]
    fn bit_grouping() {
        let bits = symbols_to_bits(&encode_4b5b(&CodeTable::standard(), &nibbles(&[0xA])).unwrap());
        assert_eq!(bits_to_patterns(&bits).unwrap(), vec![0b10110]);
        assert_eq!(bits_to_patterns(&bits[..4]), Err(CodecError::Misaligned(4)));
    }

    #[test]
    fn byte_nibble_split() {
        let n = Nibble::from_bytes(&[0xAB, 0x01]);
        assert_eq!(n, nibbles(&[0xA, 0xB, 0, 1]));
        assert_eq!(Nibble::to_bytes(&n), vec![0xAB, 0x01]);
    }
}
