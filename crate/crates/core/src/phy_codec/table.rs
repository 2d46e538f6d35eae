use std::fmt;
use std::path::Path;

use super::{CodecError, Nibble};

/// The 4b/5b code table shipped with the crate.
pub const STANDARD_TABLE: &str = include_str!("../../data/fddi-4b5b.v1.tbl");

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SymbolKind {
    Data(Nibble),
    Control(String),
}

/// One 4b/5b code group.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Symbol4b5b {
    /// Low five bits hold the code, MSB transmitted first.
    pub code: u8,
    pub kind: SymbolKind,
}

impl Symbol4b5b {
    pub fn bits(&self) -> [bool; 5] {
        code_bits(self.code)
    }

    pub fn is_data(&self) -> bool {
        matches!(self.kind, SymbolKind::Data(_))
    }

    /// Short display name: hex digit for data, control name otherwise.
    pub fn name(&self) -> String {
        match &self.kind {
            SymbolKind::Data(n) => format!("{:X}", n.value()),
            SymbolKind::Control(name) => name.clone(),
        }
    }
}

impl fmt::Display for Symbol4b5b {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:05b}", self.code)
    }
}

pub(crate) fn code_bits(code: u8) -> [bool; 5] {
    std::array::from_fn(|i| (code >> (4 - i)) & 1 == 1)
}

/// Table-driven 4b/5b code book.
///
/// Every one of the 32 code patterns maps to at most one symbol, and each
/// data nibble is carried by at most one pattern. The table may be partial:
/// a missing data nibble makes it unencodable, not invalid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeTable {
    by_code: [Option<Symbol4b5b>; 32],
    by_nibble: [Option<u8>; 16],
}

impl Default for CodeTable {
    fn default() -> Self {
        Self::empty()
    }
}

impl CodeTable {
    pub fn empty() -> Self {
        CodeTable { by_code: std::array::from_fn(|_| None), by_nibble: [None; 16] }
    }

    /// The shipped standard table.
    pub fn standard() -> Self {
        Self::parse(STANDARD_TABLE).expect("shipped 4b/5b table is well formed")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, CodecError> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| CodecError::Io(e.to_string()))?;
        Self::parse(&text)
    }

    /// Parses the line format `<code> <data|control> <meaning>` with `#`
    /// comments and blank lines ignored.
    pub fn parse(text: &str) -> Result<Self, CodecError> {
        let mut table = Self::empty();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |reason: &str| CodecError::TableFormat { line: line_no, reason: reason.to_string() };
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [code, kind, meaning] = fields[..] else {
                return Err(bad("expected three fields"));
            };
            if code.len() != 5 || !code.chars().all(|c| c == '0' || c == '1') {
                return Err(bad("code must be five 0/1 characters"));
            }
            let code = u8::from_str_radix(code, 2).map_err(|_| bad("bad code"))?;
            let kind = match kind {
                "data" => {
                    let v = u8::from_str_radix(meaning, 16)
                        .ok()
                        .and_then(|v| Nibble::new(v).ok())
                        .ok_or_else(|| bad("data meaning must be a hex digit"))?;
                    SymbolKind::Data(v)
                }
                "control" => SymbolKind::Control(meaning.to_string()),
                _ => return Err(bad("kind must be data or control")),
            };
            table.insert(Symbol4b5b { code, kind }).map_err(|e| match e {
                CodecError::TableConflict(msg) => bad(&msg),
                other => other,
            })?;
        }
        Ok(table)
    }

    pub fn insert(&mut self, symbol: Symbol4b5b) -> Result<(), CodecError> {
        let code = symbol.code & 0x1f;
        if self.by_code[code as usize].is_some() {
            return Err(CodecError::TableConflict(format!("duplicate code {code:05b}")));
        }
        if let SymbolKind::Data(n) = symbol.kind {
            if self.by_nibble[n.value() as usize].is_some() {
                return Err(CodecError::TableConflict(format!("nibble {:X} defined twice", n.value())));
            }
            self.by_nibble[n.value() as usize] = Some(code);
        }
        self.by_code[code as usize] = Some(Symbol4b5b { code, ..symbol });
        Ok(())
    }

    pub fn lookup(&self, code: u8) -> Option<&Symbol4b5b> {
        self.by_code.get(code as usize).and_then(Option::as_ref)
    }

    pub fn code_for(&self, nibble: Nibble) -> Option<u8> {
        self.by_nibble[nibble.value() as usize]
    }

    pub fn symbols(&self) -> impl Iterator<Item = &Symbol4b5b> {
        self.by_code.iter().flatten()
    }

    pub fn control_symbols(&self) -> impl Iterator<Item = &Symbol4b5b> {
        self.symbols().filter(|s| !s.is_data())
    }

    pub fn len(&self) -> usize {
        self.symbols().count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// True for a valid (data or control) code pattern.
    pub fn is_valid(&self, code: u8) -> bool {
        self.lookup(code).is_some()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_table_has_all_data_symbols() {
        let t = CodeTable::standard();
        for v in 0..16 {
            assert!(t.code_for(Nibble::new(v).unwrap()).is_some());
        }
        assert!(t.control_symbols().count() > 0);
    }

    #[test]
    fn distinct_codes() {
        let t = CodeTable::standard();
        let mut seen = std::collections::HashSet::new();
        for s in t.symbols() {
            assert!(seen.insert(s.code));
        }
    }

    #[test]
    fn rejects_duplicates() {
        let err = CodeTable::parse("11110 data 0\n11110 data 1\n").unwrap_err();
        assert!(matches!(err, CodecError::TableFormat { line: 2, .. }));
        let err = CodeTable::parse("11110 data 0\n01001 data 0\n").unwrap_err();
        assert!(matches!(err, CodecError::TableFormat { line: 2, .. }));
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(CodeTable::parse("1111 data 0").is_err());
        assert!(CodeTable::parse("11112 data 0").is_err());
        assert!(CodeTable::parse("11110 datum 0").is_err());
        assert!(CodeTable::parse("11110 data G").is_err());
        assert!(CodeTable::parse("11110 data").is_err());
    }

    #[test]
    fn comments_and_blanks() {
        let t = CodeTable::parse("# x\n\n11111 control I # idle\n").unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.lookup(0b11111).unwrap().name(), "I");
    }
}
