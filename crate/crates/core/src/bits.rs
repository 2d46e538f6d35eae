//! Bit-sequence helpers. All byte conversions are most-significant bit first,
//! which is the transmission order used throughout the crate.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("invalid bit character {found:?} at position {position}")]
pub struct BitParseError {
    pub position: usize,
    pub found: char,
}

/// Expands bytes into bits, MSB first.
pub fn bytes_to_bits(bytes: &[u8]) -> Vec<bool> {
    bytes.iter().flat_map(|&b| (0..8).rev().map(move |i| (b >> i) & 1 == 1)).collect()
}

/// Packs bits into bytes, MSB first. A trailing partial byte is zero-padded.
pub fn bits_to_bytes(bits: &[bool]) -> Vec<u8> {
    bits.chunks(8)
        .map(|chunk| chunk.iter().enumerate().fold(0u8, |acc, (i, &b)| acc | ((b as u8) << (7 - i))))
        .collect()
}

/// Parses a string of `0`/`1` characters. ASCII whitespace is skipped.
pub fn parse_bit_string(s: &str) -> Result<Vec<bool>, BitParseError> {
    s.chars()
        .enumerate()
        .filter(|(_, c)| !c.is_ascii_whitespace())
        .map(|(position, c)| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            found => Err(BitParseError { position, found }),
        })
        .collect()
}

pub fn format_bit_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

/// Length of the longest run of identical bits.
pub fn longest_run(bits: &[bool]) -> usize {
    let mut best = 0;
    let mut run = 0;
    let mut prev = None;
    for &b in bits {
        run = if Some(b) == prev { run + 1 } else { 1 };
        prev = Some(b);
        best = best.max(run);
    }
    best
}

/// Longest run of `value` bits.
pub fn longest_run_of(bits: &[bool], value: bool) -> usize {
    bits.split(|&b| b != value).map(|s| s.len()).max().unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn msb_first() {
        let bits = bytes_to_bits(&[0x80, 0x01]);
        assert!(bits[0]);
        assert!(bits[15]);
        assert_eq!(bits.iter().filter(|&&b| b).count(), 2);
        assert_eq!(bits_to_bytes(&bits), vec![0x80, 0x01]);
    }

    #[test]
    fn partial_byte_is_padded() {
        assert_eq!(bits_to_bytes(&[true, true, true]), vec![0xE0]);
    }

    #[test]
    fn parse_and_format() {
        let bits = parse_bit_string("10 1\n1").unwrap();
        assert_eq!(format_bit_string(&bits), "1011");
        assert_eq!(parse_bit_string("10x"), Err(BitParseError { position: 2, found: 'x' }));
    }

    #[test]
    fn runs() {
        let bits = parse_bit_string("1100011110").unwrap();
        assert_eq!(longest_run(&bits), 4);
        assert_eq!(longest_run_of(&bits, false), 3);
        assert_eq!(longest_run(&[]), 0);
    }
}
