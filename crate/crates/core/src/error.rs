use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{name} = {value} is out of range (expected {expected})")]
    OutOfRange {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("symbol {symbol} at position {position} is outside an alphabet of size {alphabet}")]
    SymbolOutOfRange {
        symbol: usize,
        position: usize,
        alphabet: usize,
    },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("codebook generation failed after {attempts} attempts (best minimum distance {best_min_pairwise}, required {required})")]
    CodebookGeneration {
        attempts: usize,
        best_min_pairwise: f64,
        required: f64,
    },
    #[error("invalid codebook: {0}")]
    InvalidCodebook(String),
    #[error("codebook has {available} codewords but the index space needs {required}")]
    CodebookTooSmall { available: usize, required: usize },
    #[error("invalid protocol configuration: {0}")]
    InvalidConfig(String),
    #[error("no usable blocks to decode")]
    NoUsableBlocks,
    #[error("enumeration of {size} outcomes exceeds the limit of {limit}")]
    EnumerationTooLarge { size: f64, limit: f64 },
    #[error("parse error: {0}")]
    Parse(String),
}

pub(crate) fn check_range(
    name: &'static str,
    value: f64,
    ok: bool,
    expected: &'static str,
) -> Result<()> {
    if ok && !value.is_nan() {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name,
            value,
            expected,
        })
    }
}
