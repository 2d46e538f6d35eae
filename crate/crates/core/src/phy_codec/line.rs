use super::CodecError;

/// FDDI data rate before 4b/5b coding, bits/s.
pub const FDDI_DATA_BIT_RATE: u64 = 100_000_000;
/// Code-bit rate on the wire after 4b/5b coding (5/4 of the data rate).
pub const FDDI_CODE_BIT_RATE: u64 = FDDI_DATA_BIT_RATE / 4 * 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LineCode {
    Nrzi,
    Mlt3,
}

/// A line level. NRZI uses `Low`/`High`; MLT-3 uses `Minus`/`Zero`/`Plus`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Level {
    Low,
    High,
    Minus,
    Zero,
    Plus,
}

impl Level {
    pub fn symbol(self) -> char {
        match self {
            Level::Low => 'L',
            Level::High => 'H',
            Level::Minus => '-',
            Level::Zero => '0',
            Level::Plus => '+',
        }
    }

    fn toggled(self) -> Level {
        match self {
            Level::Low => Level::High,
            Level::High => Level::Low,
            other => other,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineSignal {
    pub code: LineCode,
    /// Line level before the first bit.
    pub initial: Level,
    pub levels: Vec<Level>,
    /// Code bits per second.
    pub bit_rate: u64,
}

impl LineSignal {
    /// Level changes, counting the step from `initial` into the first bit.
    pub fn transitions(&self) -> usize {
        std::iter::once(&self.initial).chain(&self.levels).zip(&self.levels).filter(|(a, b)| a != b).count()
    }

    pub fn render(&self) -> String {
        self.levels.iter().map(|l| l.symbol()).collect()
    }
}

/// NRZI: a 1 toggles the line level, a 0 holds it. The first output level
/// already reflects the first bit.
pub fn nrzi_encode(bits: &[bool], initial_level: Level, bit_rate: u64) -> LineSignal {
    debug_assert!(matches!(initial_level, Level::Low | Level::High));
    let levels = bits
        .iter()
        .scan(initial_level, |level, &b| {
            if b {
                *level = level.toggled();
            }
            Some(*level)
        })
        .collect();
    LineSignal { code: LineCode::Nrzi, initial: initial_level, levels, bit_rate }
}

const MLT3_CYCLE: [Level; 4] = [Level::Zero, Level::Plus, Level::Zero, Level::Minus];

/// MLT-3: a 1 advances one step through the cycle 0, +1, 0, -1; a 0 holds.
/// The line starts at 0.
pub fn mlt3_encode(bits: &[bool], bit_rate: u64) -> LineSignal {
    let levels = bits
        .iter()
        .scan(0usize, |phase, &b| {
            if b {
                *phase = (*phase + 1) % 4;
            }
            Some(MLT3_CYCLE[*phase])
        })
        .collect();
    LineSignal { code: LineCode::Mlt3, initial: Level::Zero, levels, bit_rate }
}

/// Fundamental frequency in Hz of a signal that repeats exactly.
///
/// The period is the smallest `p` with `levels[i] == levels[i + p]` over the
/// whole signal, and the signal must contain at least two full periods. A
/// constant signal has period 1 and is reported as 0 Hz.
pub fn fundamental_frequency(signal: &LineSignal) -> Result<f64, CodecError> {
    let levels = &signal.levels;
    let n = levels.len();
    if n == 0 {
        return Err(CodecError::AperiodicSignal);
    }
    if levels.iter().all(|&l| l == levels[0]) {
        return Ok(0.0);
    }
    (2..=n / 2)
        .find(|&p| (0..n - p).all(|i| levels[i] == levels[i + p]))
        .map(|p| signal.bit_rate as f64 / p as f64)
        .ok_or(CodecError::AperiodicSignal)
}
